use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kitaev_potts::pcut::Regime;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "kpotts", version, about = "Series, mean-field and exact-diagonalization runs for the Z3 Kitaev-Potts model")]
pub struct Cli {
    /// JSON object of parameters; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Validate the configuration and print the plan without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, env = "KPOTTS_OUT_DIR", default_value = "kpotts-out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Compare the full torus ground energy with the two decoupled Potts models.
    MapVerify(MapVerify),
    /// Count near-degenerate ground states of the Kitaev model on a torus.
    Degeneracy(Degeneracy),
    /// Enumerate connected clusters of the square lattice.
    Clusters(Clusters),
    /// Ground-state energy series per site.
    PcutSeries(PcutSeries),
    /// One-quasiparticle gap series and hopping amplitudes.
    Gap(Gap),
    /// Dispersion ω(k) on a k grid.
    Dispersion(Dispersion),
    /// Gap-closing point from DlogPadé and bare extrapolation.
    Extrapolate(Extrapolate),
    /// Merge the two energy branches and locate their crossing.
    MergeEnergy(MergeEnergy),
    /// Product-state mean-field scan.
    MeanfieldScan(MeanfieldScan),
    /// Geometric entanglement of the perturbed ground state.
    GmeScan(GmeScan),
    /// Error scaling of a cluster series against exact diagonalization.
    SeriesVsEd(SeriesVsEd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::MapVerify(_) => "map-verify",
            Command::Degeneracy(_) => "degeneracy",
            Command::Clusters(_) => "clusters",
            Command::PcutSeries(_) => "pcut-series",
            Command::Gap(_) => "gap",
            Command::Dispersion(_) => "dispersion",
            Command::Extrapolate(_) => "extrapolate",
            Command::MergeEnergy(_) => "merge-energy",
            Command::MeanfieldScan(_) => "meanfield-scan",
            Command::GmeScan(_) => "gme-scan",
            Command::SeriesVsEd(_) => "series-vs-ed",
        }
    }
}

pub const COMMANDS: [&str; 11] = [
    "map-verify",
    "degeneracy",
    "clusters",
    "pcut-series",
    "gap",
    "dispersion",
    "extrapolate",
    "merge-energy",
    "meanfield-scan",
    "gme-scan",
    "series-vs-ed",
];

#[derive(Debug, Clone, Args, Serialize)]
pub struct MapVerify {
    #[arg(long = "J", visible_alias = "j", default_value_t = 1.0)]
    pub j: f64,
    #[arg(long = "K", visible_alias = "k", default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value_t = 0.3)]
    pub lambda: f64,
    #[arg(long = "L", visible_alias = "l", default_value_t = 2)]
    pub l: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Degeneracy {
    #[arg(long = "L", visible_alias = "l", default_value_t = 2)]
    pub l: usize,
    #[arg(long, default_value_t = 3)]
    pub d: u32,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Exit with status 4 unless exactly this many states are found.
    #[arg(long)]
    pub expect: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKind {
    /// Bond clusters, counted by bonds.
    Bonds,
    /// Polyominoes, counted by sites.
    Sites,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Clusters {
    #[arg(long, default_value_t = 4)]
    pub max_size: usize,
    #[arg(long, value_enum, default_value_t = ClusterKind::Bonds)]
    pub kind: ClusterKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Small,
    Large,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Small => Regime::Small,
            RegimeArg::Large => Regime::Large,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PcutSeries {
    #[arg(long, value_enum, default_value_t = RegimeArg::Small)]
    pub regime: RegimeArg,
    #[arg(long, default_value_t = 4)]
    pub order: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Gap {
    #[arg(long, default_value_t = 3)]
    pub order: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Dispersion {
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 0.05)]
    pub x: f64,
    /// Points per direction of the k grid over [−π, π).
    #[arg(long, default_value_t = 32)]
    pub nk: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Extrapolate {
    /// Series file laid out like the bundled reference; defaults to it.
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Largest L + M of the approximants.
    #[arg(long, default_value_t = 7)]
    pub max_total: usize,
    #[arg(long, default_value_t = 0.0)]
    pub xmin: f64,
    #[arg(long, default_value_t = 0.5)]
    pub xmax: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MergeEnergy {
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 0.8)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 501)]
    pub points: usize,
    /// [L/M] Padé for both branches, as "L,M"; bare series otherwise.
    #[arg(long, value_parser = parse_pair)]
    pub pade: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeanfieldScan {
    #[arg(long, default_value_t = 0.0)]
    pub xmin: f64,
    #[arg(long, default_value_t = 0.3)]
    pub xmax: f64,
    #[arg(long, default_value_t = 301)]
    pub points: usize,
    #[arg(long, default_value_t = kitaev_potts::meanfield::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = kitaev_potts::meanfield::DEFAULT_SEED)]
    pub seed: u64,
    /// Jump size relative to the local spread of slope changes.
    #[arg(long, default_value_t = 5.0)]
    pub threshold: f64,
    /// Exit with status 4 unless the kink lies within `kink_tolerance` of this.
    #[arg(long)]
    pub expect_kink: Option<f64>,
    #[arg(long, default_value_t = 0.005)]
    pub kink_tolerance: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GmeScan {
    #[arg(long, default_value_t = 25)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub xmin: f64,
    #[arg(long, default_value_t = 0.3)]
    pub xmax: f64,
    #[arg(long, default_value_t = 301)]
    pub points: usize,
    #[arg(long, default_value_t = kitaev_potts::gme::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = kitaev_potts::gme::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeriesVsEd {
    /// Open grid cluster, as "L1,L2".
    #[arg(long, value_parser = parse_pair, default_value = "2,3")]
    pub grid: (usize, usize),
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub xmin: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub xmax: f64,
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    /// Exit with status 4 if the fitted slope is below this.
    #[arg(long)]
    pub min_slope: Option<f64>,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once([',', 'x'])
        .ok_or_else(|| format!("expected two integers like 3,4, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((p(a)?, p(b)?))
}
