//! Translation-invariant product states |Φ⟩^⊗n for the mapped model at three
//! symmetry levels: fully symmetric, one surviving transposition, general.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::f64::consts::{FRAC_PI_2, SQRT_2};

use crate::analysis::{EstimateKind, TransitionReport};
use crate::error::{Error, Result};
use crate::optim;

pub const DEFAULT_RESTARTS: usize = 64;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanFieldState {
    pub amplitudes: [Complex64; 3],
    /// (θ, α) of a0 = sin θ, a1 = a2 = e^{iα} cos θ/√2, when restricted.
    pub angles: Option<(f64, f64)>,
    pub energy: f64,
}

impl MeanFieldState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn branch(&self) -> Branch {
        let m: Vec<f64> = self.amplitudes.iter().map(|a| a.norm()).collect();
        let spread = |a: f64, b: f64| (a - b).abs() < 1e-4;
        if spread(m[0], m[1]) && spread(m[1], m[2]) {
            Branch::Symmetric
        } else if spread(m[0], m[1]) || spread(m[1], m[2]) || spread(m[0], m[2]) {
            Branch::Restricted
        } else {
            Branch::General
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Symmetric,
    Restricted,
    General,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Branch::Symmetric => "symmetric",
            Branch::Restricted => "restricted",
            Branch::General => "general",
        };
        f.write_str(s)
    }
}

/// −J(|a0 + a1 + a2|² − 1) − 4λ Σ|ai|⁴ for normalized amplitudes.
pub fn energy(j: f64, lambda: f64, a: &[Complex64; 3]) -> f64 {
    let sum: Complex64 = a.iter().sum();
    let quartic: f64 = a.iter().map(|z| z.norm_sqr().powi(2)).sum();
    -j * (sum.norm_sqr() - 1.0) - 4.0 * lambda * quartic
}

pub fn symmetric_energy(j: f64, lambda: f64) -> f64 {
    -2.0 * j - 4.0 / 3.0 * lambda
}

pub fn symmetric_state(j: f64, lambda: f64) -> MeanFieldState {
    let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    MeanFieldState {
        amplitudes: [a; 3],
        angles: None,
        energy: symmetric_energy(j, lambda),
    }
}

pub fn restricted_energy(j: f64, lambda: f64, theta: f64, alpha: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    -j * (c * c + SQRT_2 * (2.0 * theta).sin() * alpha.cos())
        - 4.0 * lambda * (s.powi(4) + 0.5 * c.powi(4))
}

fn restricted_state(j: f64, lambda: f64, theta: f64, alpha: f64) -> MeanFieldState {
    let (s, c) = theta.sin_cos();
    let a12 = Complex64::from_polar(c / SQRT_2, alpha);
    MeanFieldState {
        amplitudes: [Complex64::new(s, 0.0), a12, a12],
        angles: Some((theta, alpha)),
        energy: restricted_energy(j, lambda, theta, alpha),
    }
}

/// Value of x = 2λ/9J at which θ is a stationary point of the restricted
/// energy with α = 0.
pub fn stationarity_x(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let s2 = (2.0 * theta).sin();
    (s2 - 2.0 * SQRT_2 * (2.0 * theta).cos()) / (36.0 * s2 * (s * s - 0.5 * c * c))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictedResult {
    pub best: MeanFieldState,
    /// Every local minimum in θ ∈ [0, π/2], lowest energy first.
    pub branches: Vec<MeanFieldState>,
}

/// Minimizes over θ ∈ [0, π], α ∈ [0, 2π). For J ≥ 0 the optimal α aligns
/// cos α with sin 2θ, and θ → π − θ with α → α + π is a symmetry, so the
/// search runs over θ ∈ [0, π/2] with α = 0.
pub fn restricted_minimize(j: f64, lambda: f64) -> Result<RestrictedResult> {
    if j < 0.0 {
        return Err(Error::InvalidArgument("restricted family assumes J >= 0".into()));
    }
    let e = |t: f64| restricted_energy(j, lambda, t, 0.0);
    let n = 2000;
    let grid: Vec<f64> = (0..=n).map(|i| FRAC_PI_2 * i as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| e(t)).collect();
    let mut branches = Vec::new();
    for i in 0..=n {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = if i == n { f64::INFINITY } else { vals[i + 1] };
        if vals[i] > left || vals[i] > right || (vals[i] == left && i > 0) {
            continue;
        }
        let theta = if i == 0 || i == n {
            grid[i]
        } else {
            optim::brent(&e, grid[i - 1], grid[i + 1])?.0
        };
        branches.push(restricted_state(j, lambda, theta, 0.0));
    }
    branches.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(RestrictedResult {
        best: branches[0].clone(),
        branches,
    })
}

fn from_params(p: &[f64]) -> [Complex64; 3] {
    let a = [
        Complex64::new(p[0].abs(), 0.0),
        Complex64::new(p[1], p[2]),
        Complex64::new(p[3], p[4]),
    ];
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    a.map(|z| z / norm)
}

/// Multi-start Nelder-Mead over normalized amplitudes with a0 real and
/// nonnegative. Ties are broken by lexicographic amplitudes so the result
/// does not depend on thread scheduling.
pub fn general_minimize(j: f64, lambda: f64, restarts: usize, seed: u64) -> Result<MeanFieldState> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let cost = |p: &[f64]| {
        let norm: f64 = p.iter().map(|v| v * v).sum();
        if norm < 1e-12 {
            return f64::INFINITY;
        }
        energy(j, lambda, &from_params(p))
    };
    let starts: Vec<Vec<f64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..restarts)
            .map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    };
    let found = starts
        .par_iter()
        .map(|x0| optim::nelder_mead(&cost, x0, 0.2, 4000))
        .collect::<Result<Vec<_>>>()?;
    let key = |a: &[Complex64; 3]| [a[0].re, a[1].re, a[1].im, a[2].re, a[2].im];
    let best = found
        .into_iter()
        .map(|(p, e)| (from_params(&p), e))
        .min_by(|(a, ea), (b, eb)| {
            ea.total_cmp(eb).then_with(|| {
                key(a)
                    .iter()
                    .zip(key(b).iter())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .expect("restarts >= 1");
    Ok(MeanFieldState {
        amplitudes: best.0,
        angles: None,
        energy: energy(j, lambda, &best.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub x: f64,
    pub energy: f64,
    pub slope: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanFieldScan {
    pub points: Vec<ScanPoint>,
    pub report: TransitionReport,
    /// dε/dx right of the kink minus left of it.
    pub jump: f64,
}

/// General-minimizer energies on the grid at J = 1 and the location of the
/// jump in dε/dx. The jump must exceed `threshold` times the local spread of
/// slope changes; the location is refined by intersecting the two one-sided
/// tangent lines.
pub fn scan_transition(xs: &[f64], restarts: usize, seed: u64, threshold: f64) -> Result<MeanFieldScan> {
    if xs.len() < 8 {
        return Err(Error::InvalidArgument("scan grid needs at least 8 points".into()));
    }
    let states = xs
        .par_iter()
        .map(|&x| general_minimize(1.0, 4.5 * x, restarts, seed))
        .collect::<Result<Vec<_>>>()?;
    let e: Vec<f64> = states.iter().map(|s| s.energy).collect();
    let n = xs.len();
    let slope: Vec<f64> = (0..n - 1).map(|i| (e[i + 1] - e[i]) / (xs[i + 1] - xs[i])).collect();
    // change[i] lives at node i + 1
    let change: Vec<f64> = slope.windows(2).map(|w| w[1] - w[0]).collect();
    let (k, &peak) = change
        .iter()
        .enumerate()
        .skip(1)
        .take(change.len().saturating_sub(2))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .ok_or(Error::NoJump)?;
    let mut local: Vec<f64> = (k.saturating_sub(10)..(k + 11).min(change.len()))
        .filter(|&i| i + 1 < k || i > k + 1)
        .map(|i| change[i].abs())
        .collect();
    local.sort_by(f64::total_cmp);
    let noise = local.get(local.len() / 2).copied().unwrap_or(0.0);
    if peak.abs() <= threshold * noise || peak.abs() < 1e-9 {
        return Err(Error::NoJump);
    }
    // kink between nodes k and k + 2
    let (sl, sr) = (slope[k.saturating_sub(1)], slope[(k + 2).min(n - 2)]);
    let (xl, el) = (xs[k], e[k]);
    let (xr, er) = (xs[k + 2], e[k + 2]);
    let mut xc = if (sr - sl).abs() > 0.0 {
        (er - el + sl * xl - sr * xr) / (sl - sr)
    } else {
        xs[k + 1]
    };
    if !(xl..=xr).contains(&xc) {
        xc = xs[k + 1];
    }
    let points = (0..n)
        .map(|i| ScanPoint {
            x: xs[i],
            energy: e[i],
            slope: if i == 0 {
                slope[0]
            } else if i == n - 1 {
                slope[n - 2]
            } else {
                (e[i + 1] - e[i - 1]) / (xs[i + 1] - xs[i - 1])
            },
            branch: states[i].branch(),
        })
        .collect();
    let domain = (xs[0], xs[n - 1]);
    Ok(MeanFieldScan {
        points,
        report: TransitionReport::new(
            EstimateKind::DerivativeJump,
            xc,
            domain,
            json!({
                "method": "one-sided slopes, tangent intersection",
                "grid_points": n,
                "restarts": restarts,
                "seed": seed,
                "threshold": threshold,
                "local_noise": noise,
            }),
        ),
        jump: sr - sl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_values() {
        assert_eq!(symmetric_energy(1.0, 0.0), -2.0);
        assert_eq!(symmetric_energy(1.0, 3.0), -6.0);
        let s = symmetric_state(1.0, 0.7);
        assert!((energy(1.0, 0.7, &s.amplitudes) - s.energy).abs() < 1e-14);
    }

    #[test]
    fn restricted_limits() {
        let r = restricted_minimize(1.0, 0.0).unwrap();
        assert!((r.best.energy + 2.0).abs() < 1e-12);
        let r = restricted_minimize(0.0, 1.0).unwrap();
        assert!((r.best.energy + 4.0).abs() < 1e-12);
        let (theta, _) = r.best.angles.unwrap();
        assert!((theta.sin().powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationarity_matches_minimizer() {
        // polarized branch well past the kink
        let x = 0.2;
        let r = restricted_minimize(1.0, 4.5 * x).unwrap();
        let (theta, _) = r.best.angles.unwrap();
        assert!((stationarity_x(theta) - x).abs() < 1e-6);
    }
}
