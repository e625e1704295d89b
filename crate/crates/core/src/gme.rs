//! Second-order perturbed ground state of the mapped model as a sum over
//! configuration classes, and its geometric measure of entanglement against
//! translation-invariant product states.
//!
//! Labels are X eigenstates: 0 is the unperturbed vacuum, 1 and 2 are the
//! two quasiparticle flavours.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::optim;

pub const DEFAULT_RESTARTS: usize = 32;
pub const DEFAULT_SEED: u64 = 0x6e3;

/// Smallest n with a positive double-pair count 8n(2n − 7).
pub const MIN_SITES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassKind {
    Vacuum,
    NearestPair,
    DiagonalPair,
    StraightPair,
    CornerTwos,
    CornerOnes,
    LineTwos,
    LineOnes,
    DoublePair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigClass {
    pub kind: ClassKind,
    /// Number of listed terms.
    pub count: f64,
    pub amplitude: f64,
    pub ones: u32,
    pub twos: u32,
    /// Listed terms per distinct configuration.
    pub paths: f64,
}

impl ConfigClass {
    pub fn excited(&self) -> u32 {
        self.ones + self.twos
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigClassState {
    pub n: usize,
    pub x: f64,
    pub classes: Vec<ConfigClass>,
}

impl ConfigClassState {
    /// Σ over classes of (terms per configuration) × count × amplitude².
    pub fn norm_sqr(&self) -> f64 {
        self.classes
            .iter()
            .map(|c| c.count * c.paths * c.amplitude * c.amplitude)
            .sum()
    }

    /// ⟨P|Ψ⟩ for the unnormalized state.
    pub fn raw_overlap(&self, p: &ProductAnsatz) -> Complex64 {
        let [c0, c1, c2] = p.bra();
        self.classes
            .iter()
            .map(|c| {
                c0.powu(self.n as u32 - c.excited()) * c1.powu(c.ones) * c2.powu(c.twos)
                    * (c.count * c.amplitude)
            })
            .sum()
    }

    /// ⟨P|Ψ⟩ for the renormalized state.
    pub fn overlap(&self, p: &ProductAnsatz) -> Complex64 {
        self.raw_overlap(p) / self.norm_sqr().sqrt()
    }
}

pub fn build_perturbed_ground_state(x: f64, n: usize) -> Result<ConfigClassState> {
    if n < MIN_SITES {
        return Err(Error::TooFewSites { n, min: MIN_SITES });
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("x must be >= 0, got {x}")));
    }
    let nf = n as f64;
    let x2 = x * x;
    let class = |kind, count: f64, amplitude, ones, twos, paths| ConfigClass {
        kind,
        count,
        amplitude,
        ones,
        twos,
        paths,
    };
    use ClassKind::*;
    let classes = vec![
        class(Vacuum, 1.0, 1.0 - nf * x2 / 2.0, 0, 0, 1.0),
        class(NearestPair, 4.0 * nf, x / 2.0 + x2 / 4.0, 1, 1, 1.0),
        class(DiagonalPair, 8.0 * nf, x2 / 2.0, 1, 1, 2.0),
        class(StraightPair, 4.0 * nf, x2 / 2.0, 1, 1, 1.0),
        class(CornerTwos, 4.0 * nf, x2 / 3.0, 0, 3, 1.0),
        class(CornerOnes, 4.0 * nf, x2 / 3.0, 3, 0, 1.0),
        class(LineTwos, 2.0 * nf, x2 / 3.0, 0, 3, 1.0),
        class(LineOnes, 2.0 * nf, x2 / 3.0, 3, 0, 1.0),
        class(DoublePair, 8.0 * nf * (2.0 * nf - 7.0), x2 / 8.0, 2, 2, 2.0),
    ];
    Ok(ConfigClassState { n, x, classes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductAnsatz {
    pub theta: f64,
    pub phi: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ProductAnsatz {
    pub fn new(theta: f64, phi: f64, alpha: f64, beta: f64) -> Self {
        ProductAnsatz {
            theta,
            phi,
            alpha,
            beta,
        }
    }

    /// cos θ|0⟩ + e^{−iα} sin θ sin φ|1⟩ + e^{−iβ} sin θ cos φ|2⟩.
    pub fn ket(&self) -> [Complex64; 3] {
        let (s, c) = self.theta.sin_cos();
        [
            Complex64::new(c, 0.0),
            Complex64::from_polar(s * self.phi.sin(), -self.alpha),
            Complex64::from_polar(s * self.phi.cos(), -self.beta),
        ]
    }

    /// ⟨φ|i⟩.
    pub fn bra(&self) -> [Complex64; 3] {
        self.ket().map(|z| z.conj())
    }

    fn from_params(p: &[f64]) -> Self {
        ProductAnsatz::new(p[0], p[1], p[2], p[3])
    }
}

pub fn gme_of(state: &ConfigClassState, p: &ProductAnsatz) -> f64 {
    -state.overlap(p).norm_sqr().log2()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmeResult {
    pub ansatz: ProductAnsatz,
    pub gme: f64,
}

/// Multi-start Nelder-Mead on −|⟨P|Ψ⟩|². The first start is the vacuum
/// product state; the rest are seeded uniformly in angle space.
pub fn maximize_overlap(state: &ConfigClassState, restarts: usize, seed: u64) -> Result<GmeResult> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![vec![1e-3, PI / 4.0, 0.0, 0.0]];
    while starts.len() < restarts {
        starts.push(vec![
            rng.gen_range(0.0..PI / 2.0),
            rng.gen_range(0.0..PI / 2.0),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..2.0 * PI),
        ]);
    }
    let cost = |p: &[f64]| -state.overlap(&ProductAnsatz::from_params(p)).norm_sqr();
    let found = starts
        .par_iter()
        .map(|x0| optim::nelder_mead(&cost, x0, 0.1, 4000))
        .collect::<Result<Vec<_>>>()?;
    let (p, c) = found
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0[0].total_cmp(&b.0[0])))
        .expect("restarts >= 1");
    Ok(GmeResult {
        ansatz: ProductAnsatz::from_params(&p),
        gme: -(-c).log2(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmePoint {
    pub x: f64,
    pub gme: f64,
    pub slope: f64,
    pub curvature: f64,
    pub ansatz: ProductAnsatz,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmeScan {
    pub n: usize,
    pub points: Vec<GmePoint>,
    /// Where the second difference first turns from positive to negative.
    pub convexity_change: Option<f64>,
    /// Where the slope changes fastest: the extremum of the second
    /// difference beyond the convexity change.
    pub derivative_jump: Option<f64>,
}

pub fn gme_scan(xs: &[f64], n: usize, restarts: usize, seed: u64) -> Result<GmeScan> {
    if xs.len() < 5 {
        return Err(Error::InvalidArgument("scan grid needs at least 5 points".into()));
    }
    let results = xs
        .par_iter()
        .map(|&x| maximize_overlap(&build_perturbed_ground_state(x, n)?, restarts, seed))
        .collect::<Result<Vec<_>>>()?;
    let g: Vec<f64> = results.iter().map(|r| r.gme).collect();
    let m = xs.len();
    let slope = |i: usize| {
        let (a, b) = (i.saturating_sub(1), (i + 1).min(m - 1));
        (g[b] - g[a]) / (xs[b] - xs[a])
    };
    let curvature = |i: usize| {
        if i == 0 || i == m - 1 {
            return f64::NAN;
        }
        let (h1, h2) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
        2.0 * ((g[i + 1] - g[i]) / h2 - (g[i] - g[i - 1]) / h1) / (h1 + h2)
    };
    let points: Vec<GmePoint> = (0..m)
        .map(|i| GmePoint {
            x: xs[i],
            gme: g[i],
            slope: slope(i),
            curvature: curvature(i),
            ansatz: results[i].ansatz,
        })
        .collect();
    let mut convexity_change = None;
    let mut start = 1;
    for i in 1..m - 2 {
        let (a, b) = (points[i].curvature, points[i + 1].curvature);
        if a > 0.0 && b < 0.0 {
            convexity_change = Some(xs[i] + (xs[i + 1] - xs[i]) * a / (a - b));
            start = i + 1;
            break;
        }
    }
    let derivative_jump = convexity_change.and_then(|_| {
        (start..m - 1)
            .min_by(|&a, &b| points[a].curvature.total_cmp(&points[b].curvature))
            .map(|i| xs[i])
    });
    Ok(GmeScan {
        n,
        points,
        convexity_change,
        derivative_jump,
    })
}

/// Bonds of an L × L torus as (site, +x neighbour) and (site, +y neighbour).
fn torus_bonds(l: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(2 * l * l);
    for y in 0..l {
        for x in 0..l {
            let s = y * l + x;
            out.push((s, y * l + (x + 1) % l));
            out.push((s, ((y + 1) % l) * l + x));
        }
    }
    out
}

/// Explicit expansion of the listed terms on an L × L torus, as sparse
/// configuration → amplitude. Configurations are label vectors in site
/// order. Needs L ≥ 5 so that all listed shapes are distinct placements.
pub fn explicit_state(x: f64, l: usize) -> Result<HashMap<Vec<u8>, f64>> {
    if l < 5 {
        return Err(Error::InvalidLatticeSize(l));
    }
    let n = l * l;
    let state = build_perturbed_ground_state(x, n)?;
    let amp = |k: ClassKind| {
        state
            .classes
            .iter()
            .find(|c| c.kind == k)
            .map(|c| c.amplitude)
            .unwrap()
    };
    let site = |x: i64, y: i64| (y.rem_euclid(l as i64) as usize) * l + x.rem_euclid(l as i64) as usize;
    let mut out: HashMap<Vec<u8>, f64> = HashMap::new();
    let mut put = |labels: &[(usize, u8)], a: f64| {
        let mut cfg = vec![0u8; n];
        for &(s, v) in labels {
            cfg[s] = v;
        }
        *out.entry(cfg).or_insert(0.0) += a;
    };
    put(&[], amp(ClassKind::Vacuum));
    let bonds = torus_bonds(l);
    for &(i, j) in &bonds {
        for (a, b) in [(1, 2), (2, 1)] {
            put(&[(i, a), (j, b)], amp(ClassKind::NearestPair));
        }
    }
    for y in 0..l as i64 {
        for x in 0..l as i64 {
            let s = site(x, y);
            for (a, b) in [(1, 2), (2, 1)] {
                // two diagonals, each reached through two intermediate sites
                for d in [site(x + 1, y + 1), site(x + 1, y - 1)] {
                    for _ in 0..2 {
                        put(&[(s, a), (d, b)], amp(ClassKind::DiagonalPair));
                    }
                }
                for d in [site(x + 2, y), site(x, y + 2)] {
                    put(&[(s, a), (d, b)], amp(ClassKind::StraightPair));
                }
            }
            // L shapes with the corner at s: arms along ±x and ±y
            for (dx, dy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let shape = [s, site(x + dx, y), site(x, y + dy)];
                put(&shape.map(|t| (t, 2)), amp(ClassKind::CornerTwos));
                put(&shape.map(|t| (t, 1)), amp(ClassKind::CornerOnes));
            }
            for shape in [
                [s, site(x + 1, y), site(x + 2, y)],
                [s, site(x, y + 1), site(x, y + 2)],
            ] {
                put(&shape.map(|t| (t, 2)), amp(ClassKind::LineTwos));
                put(&shape.map(|t| (t, 1)), amp(ClassKind::LineOnes));
            }
        }
    }
    // ordered pairs of vertex-disjoint bonds, each oriented both ways
    for (p, &(i, j)) in bonds.iter().enumerate() {
        for (q, &(k, m)) in bonds.iter().enumerate() {
            if p == q || i == k || i == m || j == k || j == m {
                continue;
            }
            for (a, b) in [(1, 2), (2, 1)] {
                for (c, d) in [(1, 2), (2, 1)] {
                    put(&[(i, a), (j, b), (k, c), (m, d)], amp(ClassKind::DoublePair));
                }
            }
        }
    }
    Ok(out)
}

/// Brute-force ⟨P|Ψ⟩ over an explicit configuration list.
pub fn explicit_overlap(state: &HashMap<Vec<u8>, f64>, p: &ProductAnsatz) -> Complex64 {
    let c = p.bra();
    state
        .iter()
        .map(|(cfg, &a)| cfg.iter().map(|&v| c[v as usize]).product::<Complex64>() * a)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoublePairCount {
    pub l: usize,
    /// Listed terms, 8n(2n − 7) when the formula holds.
    pub terms: usize,
    pub formula: i64,
    /// Distinct four-excitation configurations they produce.
    pub distinct: usize,
    /// Configurations reached by more than two listed terms.
    pub overcounted: usize,
}

/// Recount of the double-pair class on an explicit L × L torus.
pub fn double_pair_recount(l: usize) -> DoublePairCount {
    let n = l * l;
    let bonds = torus_bonds(l);
    let mut seen: HashMap<Vec<(usize, u8)>, usize> = HashMap::new();
    let mut terms = 0;
    for (p, &(i, j)) in bonds.iter().enumerate() {
        for (q, &(k, m)) in bonds.iter().enumerate() {
            if p == q || i == k || i == m || j == k || j == m {
                continue;
            }
            for (a, b) in [(1u8, 2u8), (2, 1)] {
                for (c, d) in [(1u8, 2u8), (2, 1)] {
                    let mut cfg = vec![(i, a), (j, b), (k, c), (m, d)];
                    cfg.sort_unstable();
                    *seen.entry(cfg).or_insert(0) += 1;
                    terms += 1;
                }
            }
        }
    }
    DoublePairCount {
        l,
        terms,
        formula: 8 * n as i64 * (2 * n as i64 - 7),
        distinct: seen.len(),
        overcounted: seen.values().filter(|&&c| c > 2).count(),
    }
}
