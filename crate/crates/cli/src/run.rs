use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use kitaev_potts::analysis::{
    approximant_orders, bare_roots, dlog_pade_gap_closure, linspace, merge_and_locate_crossing, pade, Merge,
};
use kitaev_potts::clusters::{clusters_to_json, enumerate_clusters, enumerate_site_clusters};
use kitaev_potts::ed::{logspace, series_vs_ed, topological_degeneracy, verify_mapping};
use kitaev_potts::fixtures::{parse_printed_series, printed_series, PrintedSeries};
use kitaev_potts::gme::{self, gme_scan};
use kitaev_potts::lattice::{Couplings, SiteGraph};
use kitaev_potts::meanfield::scan_transition;
use kitaev_potts::pcut::flow::ORDER_CAP;
use kitaev_potts::pcut::{dispersion, gap_series, CalibrationRecord, Engine, Regime};
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{ensure, CliError};
use crate::output::{num, RunInfo, Table, Writer};

/// What a validated command will do and which files it writes.
pub struct Plan {
    pub steps: Vec<String>,
    pub outputs: Vec<String>,
}

fn plan(steps: &[String], outputs: &[&str]) -> Plan {
    Plan {
        steps: steps.to_vec(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    }
}

fn check_grid(lo: f64, hi: f64, points: usize, min_points: usize) -> Result<(), CliError> {
    ensure(lo.is_finite() && hi.is_finite() && lo < hi, || {
        format!("grid bounds must be finite with min < max, got [{lo}, {hi}]")
    })?;
    ensure(points >= min_points, || format!("grid needs at least {min_points} points, got {points}"))
}

fn check_order(order: usize) -> Result<(), CliError> {
    ensure((1..=ORDER_CAP).contains(&order), || format!("order must be in 1..={ORDER_CAP}, got {order}"))
}

fn check_series_file(path: &Option<std::path::PathBuf>) -> Result<(), CliError> {
    if let Some(p) = path {
        ensure(p.is_file(), || format!("series file {} not found", p.display()))?;
    }
    Ok(())
}

pub fn validate(cmd: &Command) -> Result<Plan, CliError> {
    Ok(match cmd {
        Command::MapVerify(a) => {
            ensure([a.j, a.k, a.lambda].iter().all(|v| v.is_finite() && *v >= 0.0), || {
                "couplings must be finite and non-negative".into()
            })?;
            ensure(a.l == 2, || format!("the mapping check runs on the L = 2 torus only, got L = {}", a.l))?;
            ensure(a.tolerance > 0.0, || "tolerance must be positive".into())?;
            plan(
                &[format!("Lanczos on the 3^8 torus and two 3^4 sublattices at J={} K={} λ={}", a.j, a.k, a.lambda)],
                &["map-verify.json"],
            )
        }
        Command::Degeneracy(a) => {
            ensure(a.l == 2, || format!("only L = 2 fits in memory, got L = {}", a.l))?;
            ensure((2..=3).contains(&a.d), || format!("d must be 2 or 3, got {}", a.d))?;
            ensure(a.lambda.is_finite() && a.lambda >= 0.0, || "λ must be non-negative".into())?;
            plan(&[format!("lowest levels of the d={} Kitaev model at λ={}", a.d, a.lambda)], &["degeneracy.json"])
        }
        Command::Clusters(a) => {
            ensure((1..=10).contains(&a.max_size), || format!("max-size must be in 1..=10, got {}", a.max_size))?;
            plan(
                &[format!("enumerate {:?} clusters up to size {}", a.kind, a.max_size)],
                &["clusters.json"],
            )
        }
        Command::PcutSeries(a) => {
            check_order(a.order)?;
            plan(
                &[format!("{:?}-coupling linked-cluster sum through order {}", a.regime, a.order)],
                &["pcut-series.json"],
            )
        }
        Command::Gap(a) => {
            check_order(a.order)?;
            plan(&[format!("one-quasiparticle amplitudes through order {}", a.order)], &["gap.json"])
        }
        Command::Dispersion(a) => {
            check_order(a.order)?;
            ensure(a.x.is_finite() && a.x >= 0.0, || "x must be non-negative".into())?;
            ensure(a.nk >= 2, || "nk must be at least 2".into())?;
            plan(
                &[format!("amplitudes through order {}, ω(k) at x={} on {}×{}", a.order, a.x, a.nk, a.nk)],
                &["dispersion.csv", "dispersion.json"],
            )
        }
        Command::Extrapolate(a) => {
            check_series_file(&a.series)?;
            check_grid(a.xmin, a.xmax, a.points, 2)?;
            ensure(a.max_total >= 1, || "max-total must be at least 1".into())?;
            plan(
                &[format!("DlogPadé and bare roots with L+M ≤ {} on x ∈ [{}, {}]", a.max_total, a.xmin, a.xmax)],
                &["extrapolate.csv", "extrapolate.json"],
            )
        }
        Command::MergeEnergy(a) => {
            check_series_file(&a.series)?;
            check_grid(a.theta_min, a.theta_max, a.points, 3)?;
            ensure(a.theta_min > 0.0 && a.theta_max < PI / 2.0, || "θ must lie inside (0, π/2)".into())?;
            let how = a.pade.map_or("bare series".to_string(), |(l, m)| format!("[{l}/{m}] Padé"));
            plan(
                &[format!("merge branches as {how} on {} θ points", a.points)],
                &["merge-energy.csv", "merge-energy.json"],
            )
        }
        Command::MeanfieldScan(a) => {
            check_grid(a.xmin, a.xmax, a.points, 8)?;
            ensure(a.xmin >= 0.0, || "x must be non-negative".into())?;
            ensure(a.restarts >= 1, || "restarts must be at least 1".into())?;
            plan(
                &[format!("{} points × {} restarts, seed {}", a.points, a.restarts, a.seed)],
                &["meanfield-scan.csv", "meanfield-scan.json"],
            )
        }
        Command::GmeScan(a) => {
            check_grid(a.xmin, a.xmax, a.points, 5)?;
            ensure(a.xmin >= 0.0, || "x must be non-negative".into())?;
            ensure(a.n >= gme::MIN_SITES, || format!("n must be at least {}", gme::MIN_SITES))?;
            ensure(a.restarts >= 1, || "restarts must be at least 1".into())?;
            plan(
                &[format!("n={}, {} points × {} restarts, seed {}", a.n, a.points, a.restarts, a.seed)],
                &["gme-scan.csv", "gme-scan.json"],
            )
        }
        Command::SeriesVsEd(a) => {
            check_order(a.order)?;
            check_grid(a.xmin, a.xmax, a.points, 2)?;
            ensure(a.xmin > 0.0, || "x grid must be positive for a log-log fit".into())?;
            let sites = a.grid.0 * a.grid.1;
            ensure(sites >= 2 && sites <= 12, || format!("grid must have 2..=12 sites, got {sites}"))?;
            plan(
                &[format!("{}×{} cluster through order {}, {} points", a.grid.0, a.grid.1, a.order, a.points)],
                &["series-vs-ed.csv", "series-vs-ed.json"],
            )
        }
    })
}

fn load_series(path: &Option<std::path::PathBuf>) -> Result<PrintedSeries, CliError> {
    match path {
        None => Ok(printed_series()?),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Ok(parse_printed_series(&text)?)
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Runs a validated command, writes its files and returns a short summary.
pub fn execute(cmd: &Command, info: &RunInfo, out: &Path) -> Result<Value, CliError> {
    let mut w = Writer::new(out)?;
    let summary = match cmd {
        Command::MapVerify(a) => {
            let r = verify_mapping(Couplings::new(a.j, a.k, a.lambda), a.l, a.tolerance)?;
            w.json(info, "map-verify.json", to_value(&r))?;
            if !r.pass {
                return Err(CliError::Mismatch(format!(
                    "mapping check failed: mismatch {:e}, min plaquette {}, leakage {:e}",
                    r.mismatch, r.min_plaquette, r.string_leakage
                )));
            }
            json!({ "pass": r.pass, "full_energy": r.full_energy, "mismatch": r.mismatch })
        }
        Command::Degeneracy(a) => {
            let r = topological_degeneracy(a.l, a.d, a.lambda, a.tolerance)?;
            w.json(info, "degeneracy.json", to_value(&r))?;
            if let Some(e) = a.expect.filter(|&e| e != r.count) {
                return Err(CliError::Mismatch(format!("expected {e} degenerate states, found {}", r.count)));
            }
            json!({ "count": r.count, "splitting": r.splitting })
        }
        Command::Clusters(a) => {
            let cs = match a.kind {
                ClusterKind::Bonds => enumerate_clusters(a.max_size),
                ClusterKind::Sites => enumerate_site_clusters(a.max_size),
            };
            let list: Value = serde_json::from_str(&clusters_to_json(&cs)?).expect("valid json");
            w.json(info, "clusters.json", json!({ "kind": a.kind, "clusters": list }))?;
            json!({ "classes": cs.len() })
        }
        Command::PcutSeries(a) => {
            let regime = Regime::from(a.regime);
            let s = Engine::new(regime, a.order)?.ground_energy_series();
            let calib = CalibrationRecord::for_regime(regime).to_json();
            w.json(info, "pcut-series.json", json!({ "series": s.to_json(), "calibration": calib }))?;
            json!({ "series": s.to_string() })
        }
        Command::Gap(a) => {
            let amps = Engine::new(Regime::Small, a.order)?.one_qp_amplitudes()?;
            let g = gap_series(&amps);
            w.json(info, "gap.json", json!({ "gap": g.to_json(), "hopping": amps.to_json() }))?;
            json!({ "gap": g.to_string() })
        }
        Command::Dispersion(a) => {
            let amps = Engine::new(Regime::Small, a.order)?.one_qp_amplitudes()?;
            let ks: Vec<f64> = (0..a.nk).map(|i| -PI + 2.0 * PI * i as f64 / a.nk as f64).collect();
            let eval = |k: (f64, f64)| dispersion(k, &amps).iter().rev().fold(0.0, |acc, c| acc * a.x + c);
            let mut t = Table::new(&["kx", "ky", "omega"]);
            let mut best = (f64::INFINITY, (0.0, 0.0));
            for &kx in &ks {
                for &ky in &ks {
                    let e = eval((kx, ky));
                    if e < best.0 {
                        best = (e, (kx, ky));
                    }
                    t.push(vec![num(kx), num(ky), num(e)]);
                }
            }
            w.csv(info, "dispersion.csv", &t)?;
            let report = json!({ "minimum": best.0, "k_min": [best.1 .0, best.1 .1], "gap": eval((0.0, 0.0)) });
            w.json(info, "dispersion.json", report.clone())?;
            report
        }
        Command::Extrapolate(a) => {
            let gap = load_series(&a.series)?.gap_small.to_f64();
            let window = (a.xmin, a.xmax);
            let orders: Vec<(usize, usize)> = approximant_orders(a.max_total)
                .into_iter()
                .filter(|&(l, m)| l + m + 1 < gap.len())
                .collect();
            let closure = dlog_pade_gap_closure(&gap, &orders, window)?;
            let roots = bare_roots(&gap, &(1..gap.len()).collect::<Vec<_>>(), window);
            let approximants: Vec<_> = orders
                .iter()
                .filter_map(|&(l, m)| pade(&gap, l, m).ok().filter(|_| l + m < gap.len()))
                .collect();
            let mut cols = vec!["x".to_string(), "bare".to_string()];
            cols.extend(approximants.iter().map(|p| format!("pade[{}/{}]", p.l, p.m)));
            let mut t = Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
            for x in linspace(a.xmin, a.xmax, a.points) {
                let mut row = vec![num(x), num(gap.iter().rev().fold(0.0, |acc, c| acc * x + c))];
                row.extend(approximants.iter().map(|p| num(p.eval(x))));
                t.push(row);
            }
            w.csv(info, "extrapolate.csv", &t)?;
            let bare: Vec<Value> = roots.iter().map(|(k, r)| json!({ "order": k, "root": r })).collect();
            w.json(info, "extrapolate.json", json!({ "gap_closure": to_value(&closure), "bare_roots": bare }))?;
            json!({ "x_c": closure.report.value, "range": [closure.min, closure.max] })
        }
        Command::MergeEnergy(a) => {
            let p = load_series(&a.series)?;
            let mut merge = Merge::from_series(&p.energy_small, &p.energy_large);
            if let Some(lm) = a.pade {
                merge = merge.pade(lm, lm)?;
            }
            let grid = linspace(a.theta_min, a.theta_max, a.points);
            let label = merge.small.label();
            let r = merge_and_locate_crossing(&merge, &label, &grid)?;
            let pole_free = a.pade.map(|_| merge.pole_free(&grid, r.report.value));
            let mut t = Table::new(&["theta", "small", "large", "energy", "d_lambda", "d2_lambda"]);
            for c in &r.curve {
                t.push(vec![num(c.theta), num(c.small), num(c.large), num(c.energy), num(c.d1), num(c.d2)]);
            }
            w.csv(info, "merge-energy.csv", &t)?;
            let report = json!({
                "label": r.label,
                "report": to_value(&r.report),
                "first_jump": r.first_jump,
                "second_jump": r.second_jump,
                "pole_free": pole_free,
            });
            w.json(info, "merge-energy.json", report)?;
            json!({ "theta_c": r.report.value, "first_jump": r.first_jump, "pole_free": pole_free })
        }
        Command::MeanfieldScan(a) => {
            let xs = linspace(a.xmin, a.xmax, a.points);
            let s = scan_transition(&xs, a.restarts, a.seed, a.threshold)?;
            let mut t = Table::new(&["x", "energy", "d_energy_dx", "branch"]);
            for p in &s.points {
                t.push(vec![num(p.x), num(p.energy), num(p.slope), p.branch.to_string()]);
            }
            w.csv(info, "meanfield-scan.csv", &t)?;
            w.json(info, "meanfield-scan.json", json!({ "report": to_value(&s.report), "jump": s.jump }))?;
            if let Some(e) = a.expect_kink {
                if (s.report.value - e).abs() > a.kink_tolerance {
                    return Err(CliError::Mismatch(format!(
                        "kink at {} is outside {e} ± {}",
                        s.report.value, a.kink_tolerance
                    )));
                }
            }
            json!({ "kink": s.report.value, "jump": s.jump })
        }
        Command::GmeScan(a) => {
            let xs = linspace(a.xmin, a.xmax, a.points);
            let s = gme_scan(&xs, a.n, a.restarts, a.seed)?;
            let mut t = Table::new(&["x", "gme", "d_gme_dx", "d2_gme_dx2", "theta", "phi", "alpha", "beta"]);
            for p in &s.points {
                let q = &p.ansatz;
                t.push(vec![
                    num(p.x),
                    num(p.gme),
                    num(p.slope),
                    num(p.curvature),
                    num(q.theta),
                    num(q.phi),
                    num(q.alpha),
                    num(q.beta),
                ]);
            }
            w.csv(info, "gme-scan.csv", &t)?;
            let report = json!({
                "n": s.n,
                "convexity_change": s.convexity_change,
                "derivative_jump": s.derivative_jump,
            });
            w.json(info, "gme-scan.json", report.clone())?;
            if s.convexity_change.is_none() {
                return Err(CliError::Numerical("no convexity change on the grid".into()));
            }
            report
        }
        Command::SeriesVsEd(a) => {
            let g = SiteGraph::open_grid(a.grid.0, a.grid.1);
            let s = Engine::new(Regime::Small, a.order)?.cluster_energy(&g);
            let fit = series_vs_ed(&g, &s, &logspace(a.xmin, a.xmax, a.points))?;
            let mut t = Table::new(&["x", "abs_error"]);
            for &(x, e) in &fit.points {
                t.push(vec![num(x), num(e)]);
            }
            w.csv(info, "series-vs-ed.csv", &t)?;
            w.json(
                info,
                "series-vs-ed.json",
                json!({ "slope": fit.slope, "intercept": fit.intercept, "series": s.to_json() }),
            )?;
            if let Some(m) = a.min_slope.filter(|&m| fit.slope < m) {
                return Err(CliError::Mismatch(format!("slope {} below {m}", fit.slope)));
            }
            json!({ "slope": fit.slope })
        }
    };
    Ok(json!({
        "command": info.command,
        "config_hash": format!("sha256:{}", info.hash),
        "summary": summary,
        "files": w.written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    }))
}
