//! Padé and DlogPadé extrapolation, gap closure, and the merge of the two
//! perturbative regimes along λ = sin θ, J = cos θ.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::series::RationalSeries;

/// Polynomials are coefficient vectors, lowest order first.
pub fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_eval_c(p: &[f64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn poly_derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

fn trim(p: &[f64]) -> &[f64] {
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut n = p.len();
    while n > 0 && p[n - 1].abs() <= 1e-14 * scale {
        n -= 1;
    }
    &p[..n]
}

/// All complex roots, from companion-matrix eigenvalues polished by Newton.
pub fn poly_roots(p: &[f64]) -> Vec<Complex64> {
    let p = trim(p);
    if p.len() < 2 {
        return Vec::new();
    }
    let deg = p.len() - 1;
    let lead = p[deg];
    let mut companion = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -p[i] / lead;
    }
    let dp = poly_derivative(p);
    companion
        .complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..50 {
                let d = poly_eval_c(&dp, z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = poly_eval_c(p, z) / d;
                z -= step;
                if step.norm() <= 1e-15 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

fn is_real(z: Complex64) -> bool {
    z.im.abs() <= 1e-9 * z.re.abs().max(1.0)
}

/// Smallest real root in (lo, hi], if any.
pub fn smallest_real_root(p: &[f64], lo: f64, hi: f64) -> Option<f64> {
    poly_roots(p)
        .into_iter()
        .filter(|&z| is_real(z) && z.re > lo && z.re <= hi)
        .map(|z| z.re)
        .min_by(f64::total_cmp)
}

/// Coefficients of log-derivative g'/g through order len(g) − 2.
pub fn log_derivative(g: &[f64]) -> Result<Vec<f64>> {
    if g.is_empty() || g[0] == 0.0 {
        return Err(Error::InvalidArgument("log derivative needs g(0) != 0".into()));
    }
    let dg = poly_derivative(g);
    // q with g q = g', solved order by order
    let mut q = Vec::with_capacity(dg.len());
    for k in 0..dg.len() {
        let s: f64 = (1..=k).map(|j| g[j] * q[k - j]).sum();
        q.push((dg[k] - s) / g[0]);
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PadeApproximant {
    pub l: usize,
    pub m: usize,
    pub num: Vec<f64>,
    /// Normalized to den[0] = 1.
    pub den: Vec<f64>,
    /// Ratio of extreme singular values of the denominator system.
    pub condition: f64,
}

impl PadeApproximant {
    pub fn eval(&self, x: f64) -> f64 {
        poly_eval(&self.num, x) / poly_eval(&self.den, x)
    }

    /// Value, first and second derivative.
    pub fn eval_d2(&self, x: f64) -> (f64, f64, f64) {
        let (n, n1, n2) = poly_d2(&self.num, x);
        let (d, d1, d2) = poly_d2(&self.den, x);
        let f = n / d;
        let f1 = (n1 - f * d1) / d;
        let f2 = (n2 - 2.0 * f1 * d1 - f * d2) / d;
        (f, f1, f2)
    }

    /// Taylor coefficients of num/den through `order`.
    pub fn taylor(&self, order: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let a = self.num.get(k).copied().unwrap_or(0.0);
            let s: f64 = (1..=k.min(self.m)).map(|j| self.den[j] * out[k - j]).sum();
            out.push(a - s);
        }
        out
    }

    pub fn poles(&self) -> Vec<Complex64> {
        poly_roots(&self.den)
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        poly_roots(&self.num)
    }

    /// Residue at a simple pole z.
    pub fn residue(&self, z: Complex64) -> Complex64 {
        poly_eval_c(&self.num, z) / poly_eval_c(&poly_derivative(&self.den), z)
    }
}

fn poly_d2(p: &[f64], x: f64) -> (f64, f64, f64) {
    let d1 = poly_derivative(p);
    let d2 = poly_derivative(&d1);
    (poly_eval(p, x), poly_eval(&d1, x), poly_eval(&d2, x))
}

/// [L/M] Padé approximant from the linear system with den[0] = 1.
pub fn pade(series: &[f64], l: usize, m: usize) -> Result<PadeApproximant> {
    let defective = |reason: String| Error::DefectivePade { l, m, reason };
    if series.len() < l + m + 1 {
        return Err(Error::SeriesTooShort {
            needed: l + m,
            have: series.len().saturating_sub(1),
        });
    }
    let c = |k: i64| if k < 0 { 0.0 } else { series[k as usize] };
    let mut den = vec![1.0];
    let mut condition = 1.0;
    if m > 0 {
        // Σ_{j=1..M} b_j c_{k−j} = −c_k for k = L+1 .. L+M
        let a = DMatrix::from_fn(m, m, |r, j| c((l + 1 + r) as i64 - (j + 1) as i64));
        let rhs = DVector::from_fn(m, |r, _| -c((l + 1 + r) as i64));
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        condition = if smax > 0.0 { smin / smax } else { 0.0 };
        // Rank-deficient but consistent systems (e.g. a constant series)
        // take the minimum-norm solution; the re-expansion check decides.
        let b = svd
            .solve(&rhs, 1e-13 * smax.max(f64::MIN_POSITIVE))
            .map_err(|e| defective(e.to_string()))?;
        den.extend(b.iter());
    }
    let num: Vec<f64> = (0..=l)
        .map(|k| (0..=k.min(m)).map(|j| den[j] * c(k as i64 - j as i64)).sum())
        .collect();
    let p = PadeApproximant {
        l,
        m,
        num,
        den,
        condition,
    };
    let scale = series[..=l + m].iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    let err = p
        .taylor(l + m)
        .iter()
        .zip(series)
        .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
    if !err.is_finite() || err > 1e-10 * scale {
        return Err(defective(format!("re-expansion residual {err:.3e}")));
    }
    if poly_eval(&p.den, 0.0) == 0.0 {
        return Err(defective("denominator vanishes at the origin".into()));
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    GapClosure,
    Crossing,
    DerivativeJump,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionReport {
    pub kind: EstimateKind,
    pub value: f64,
    pub domain: (f64, f64),
    pub method: serde_json::Value,
}

impl TransitionReport {
    pub fn new(kind: EstimateKind, value: f64, domain: (f64, f64), method: serde_json::Value) -> Self {
        debug_assert!(value >= domain.0 && value <= domain.1);
        TransitionReport {
            kind,
            value,
            domain,
            method,
        }
    }
}

/// Physical pole of one DlogPadé approximant of the gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DlogEstimate {
    pub l: usize,
    pub m: usize,
    pub pole: Option<f64>,
    /// Residue at the pole: the exponent of the closing gap.
    pub exponent: Option<f64>,
    pub defective: Option<String>,
}

/// Smallest positive real pole with positive residue, skipping poles that
/// sit on top of a zero of the numerator.
pub fn physical_pole(p: &PadeApproximant, window: (f64, f64)) -> Option<(f64, f64)> {
    let zeros = p.zeros();
    p.poles()
        .into_iter()
        .filter(|&z| is_real(z) && z.re > window.0 && z.re <= window.1)
        .filter(|&z| zeros.iter().all(|&w| (w - z).norm() > 1e-6 * z.norm().max(1.0)))
        .filter_map(|z| {
            let r = p.residue(Complex64::new(z.re, 0.0));
            (r.re > 1e-8).then_some((z.re, r.re))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

pub fn dlog_pade(g: &[f64], l: usize, m: usize, window: (f64, f64)) -> Result<DlogEstimate> {
    let q = log_derivative(g)?;
    Ok(match pade(&q, l, m) {
        Ok(p) => {
            let hit = physical_pole(&p, window);
            DlogEstimate {
                l,
                m,
                pole: hit.map(|h| h.0),
                exponent: hit.map(|h| h.1),
                defective: None,
            }
        }
        Err(e @ Error::DefectivePade { .. }) => DlogEstimate {
            l,
            m,
            pole: None,
            exponent: None,
            defective: Some(e.to_string()),
        },
        Err(e) => return Err(e),
    })
}

/// All (L, M) with L, M ≥ 2 and L + M ≤ `max_total`.
pub fn approximant_orders(max_total: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for l in 2..=max_total {
        for m in 2..=max_total - l {
            out.push((l, m));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapClosure {
    pub dlog: Vec<DlogEstimate>,
    /// Smallest positive root of the direct Padé approximant of the gap.
    pub direct: Vec<(usize, usize, Option<f64>)>,
    pub report: TransitionReport,
    /// Spread of the well-behaved DlogPadé poles.
    pub min: f64,
    pub max: f64,
}

/// Gap closure from DlogPadé approximants; the report value is the median
/// of the well-behaved poles.
pub fn dlog_pade_gap_closure(
    gap: &[f64],
    orders: &[(usize, usize)],
    window: (f64, f64),
) -> Result<GapClosure> {
    if gap.is_empty() || gap[0] <= 0.0 {
        return Err(Error::InvalidArgument("gap must be positive at the origin".into()));
    }
    let dlog = orders
        .iter()
        .map(|&(l, m)| dlog_pade(gap, l, m, window))
        .collect::<Result<Vec<_>>>()?;
    let direct = orders
        .iter()
        .filter(|&&(l, m)| l + m < gap.len())
        .map(|&(l, m)| {
            let root = pade(gap, l, m).ok().and_then(|p| {
                let poles = p.poles();
                p.zeros()
                    .into_iter()
                    .filter(|&z| is_real(z) && z.re > window.0 && z.re <= window.1)
                    .filter(|&z| poles.iter().all(|&w| (w - z).norm() > 1e-6))
                    .map(|z| z.re)
                    .min_by(f64::total_cmp)
            });
            (l, m, root)
        })
        .collect();
    let mut poles: Vec<f64> = dlog.iter().filter_map(|d| d.pole).collect();
    if poles.is_empty() {
        return Err(Error::NoRoot(format!(
            "no physical DlogPadé pole in ({}, {}]",
            window.0, window.1
        )));
    }
    poles.sort_by(f64::total_cmp);
    let median = if poles.len() % 2 == 1 {
        poles[poles.len() / 2]
    } else {
        0.5 * (poles[poles.len() / 2 - 1] + poles[poles.len() / 2])
    };
    let used: Vec<_> = dlog
        .iter()
        .filter(|d| d.pole.is_some())
        .map(|d| [d.l, d.m])
        .collect();
    let report = TransitionReport::new(
        EstimateKind::GapClosure,
        median,
        window,
        json!({ "method": "dlog-pade median", "approximants": used }),
    );
    Ok(GapClosure {
        dlog,
        direct,
        report,
        min: poles[0],
        max: poles[poles.len() - 1],
    })
}

/// Smallest positive root in the window of the series truncated at each
/// order.
pub fn bare_roots(series: &[f64], orders: &[usize], window: (f64, f64)) -> Vec<(usize, Option<f64>)> {
    orders
        .iter()
        .map(|&k| {
            let end = (k + 1).min(series.len());
            (k, smallest_real_root(&series[..end], window.0, window.1))
        })
        .collect()
}

/// A branch of the ground-state energy per site as a function of a single
/// expansion variable, with its first two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Approximant {
    Bare(Vec<f64>),
    Pade(PadeApproximant),
}

impl Approximant {
    pub fn label(&self) -> String {
        match self {
            Approximant::Bare(c) => format!("bare[{}]", c.len().saturating_sub(1)),
            Approximant::Pade(p) => format!("pade[{}/{}]", p.l, p.m),
        }
    }

    pub fn eval_d2(&self, x: f64) -> (f64, f64, f64) {
        match self {
            Approximant::Bare(c) => poly_d2(c, x),
            Approximant::Pade(p) => p.eval_d2(x),
        }
    }
}

/// Absolute energies per site of one sublattice from the two regimes.
///
/// Small coupling: E = 3J f(x) with f = ε_sc − 2x, x = 2λ/9J, so the dropped
/// −4λ/3 is restored. Large coupling: E = 2λ g(h) with g = ε_lc − 2 and the
/// h⁰ term of ε_lc replaced by 0, h = J/2λ.
#[derive(Debug, Clone)]
pub struct Merge {
    pub small: Approximant,
    pub large: Approximant,
}

impl Merge {
    pub fn from_series(small: &RationalSeries, large: &RationalSeries) -> Self {
        let mut f = small.to_f64();
        if f.len() < 2 {
            f.resize(2, 0.0);
        }
        f[1] -= 2.0;
        let mut g = large.to_f64();
        if g.is_empty() {
            g.push(0.0);
        }
        g[0] = -2.0;
        Merge {
            small: Approximant::Bare(f),
            large: Approximant::Bare(g),
        }
    }

    /// Both branches replaced by [L/M] Padé approximants of the shifted
    /// series.
    pub fn pade(&self, small: (usize, usize), large: (usize, usize)) -> Result<Self> {
        let coeffs = |a: &Approximant| match a {
            Approximant::Bare(c) => Ok(c.clone()),
            Approximant::Pade(_) => Err(Error::InvalidArgument("already a Padé merge".into())),
        };
        Ok(Merge {
            small: Approximant::Pade(pade(&coeffs(&self.small)?, small.0, small.1)?),
            large: Approximant::Pade(pade(&coeffs(&self.large)?, large.0, large.1)?),
        })
    }

    /// False if a denominator changes sign where its branch is used: the
    /// small-coupling one for θ ≤ `split`, the large-coupling one above.
    pub fn pole_free(&self, grid: &[f64], split: f64) -> bool {
        let clean = |a: &Approximant, xs: &mut dyn Iterator<Item = f64>| match a {
            Approximant::Bare(_) => true,
            Approximant::Pade(p) => {
                let vals: Vec<f64> = xs.map(|x| poly_eval(&p.den, x)).collect();
                vals.iter().all(|v| v.is_finite() && v.signum() == vals[0].signum())
            }
        };
        // both sides include the grid interval that brackets the split
        let cut = grid.iter().position(|&t| t > split).unwrap_or(grid.len());
        let (below, above) = (&grid[..(cut + 1).min(grid.len())], &grid[cut.saturating_sub(1)..]);
        let mut xs = below
            .iter()
            .filter(|t| t.cos() > 0.0)
            .map(|t| 2.0 * t.tan() / 9.0);
        let mut hs = above
            .iter()
            .filter(|t| t.sin() > 0.0)
            .map(|t| 0.5 / t.tan());
        clean(&self.small, &mut xs) && clean(&self.large, &mut hs)
    }

    /// (E, ∂_λ E, ∂²_λ E) at fixed J.
    pub fn small_energy(&self, j: f64, lambda: f64) -> (f64, f64, f64) {
        let x = 2.0 * lambda / (9.0 * j);
        let (f, f1, f2) = self.small.eval_d2(x);
        (3.0 * j * f, 2.0 / 3.0 * f1, 4.0 * f2 / (27.0 * j))
    }

    pub fn large_energy(&self, j: f64, lambda: f64) -> (f64, f64, f64) {
        let h = j / (2.0 * lambda);
        let (g, g1, g2) = self.large.eval_d2(h);
        (2.0 * lambda * g, 2.0 * (g - h * g1), 2.0 * h * h * g2 / lambda)
    }
}

/// First sign change of `sc − lc` from negative to positive on the grid,
/// refined by bisection.
pub fn locate_crossing(
    sc: &dyn Fn(f64) -> f64,
    lc: &dyn Fn(f64) -> f64,
    grid: &[f64],
) -> Result<f64> {
    let d = |t: f64| sc(t) - lc(t);
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (da, db) = (d(a), d(b));
        if da == 0.0 {
            return Ok(a);
        }
        if !(da < 0.0 && db >= 0.0) {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if d(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 4.0 * f64::EPSILON * b.abs() {
                break;
            }
        }
        return Ok(0.5 * (a + b));
    }
    Err(Error::NoCrossing(lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergePoint {
    pub theta: f64,
    pub small: f64,
    pub large: f64,
    pub energy: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingReport {
    pub label: String,
    pub report: TransitionReport,
    /// ∂_λ E(large) − ∂_λ E(small) at the crossing.
    pub first_jump: f64,
    pub second_jump: f64,
    pub curve: Vec<MergePoint>,
}

/// Crossing of the two branches on a θ grid, and the merged curve with its
/// Feynman-Hellmann derivatives.
pub fn merge_and_locate_crossing(merge: &Merge, label: &str, grid: &[f64]) -> Result<CrossingReport> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument("θ grid needs at least two points".into()));
    }
    let sc = |t: f64| merge.small_energy(t.cos(), t.sin()).0;
    let lc = |t: f64| merge.large_energy(t.cos(), t.sin()).0;
    let theta = locate_crossing(&sc, &lc, grid)?;
    let (j, l) = (theta.cos(), theta.sin());
    let (_, s1, s2) = merge.small_energy(j, l);
    let (_, l1, l2) = merge.large_energy(j, l);
    let curve = grid
        .iter()
        .map(|&t| {
            let (j, l) = (t.cos(), t.sin());
            let s = if j > 0.0 { merge.small_energy(j, l) } else { (f64::NAN, f64::NAN, f64::NAN) };
            let g = if l > 0.0 { merge.large_energy(j, l) } else { (f64::NAN, f64::NAN, f64::NAN) };
            let pick = if t <= theta { s } else { g };
            MergePoint {
                theta: t,
                small: s.0,
                large: g.0,
                energy: pick.0,
                d1: pick.1,
                d2: pick.2,
            }
        })
        .collect();
    let domain = (grid[0], grid[grid.len() - 1]);
    Ok(CrossingReport {
        label: label.to_string(),
        report: TransitionReport::new(
            EstimateKind::Crossing,
            theta,
            domain,
            json!({ "method": "bisection on E_small - E_large", "approximant": label, "grid_points": grid.len() }),
        ),
        first_jump: l1 - s1,
        second_jump: l2 - s2,
        curve,
    })
}

/// Largest mismatch between the analytic derivatives and central finite
/// differences in λ at fixed J, with step equal to the grid spacing. Points
/// closer than two steps to `exclude` are skipped.
pub fn check_derivatives(merge: &Merge, grid: &[f64], exclude: f64, tolerance: f64) -> Result<f64> {
    let step = grid.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for &t in grid {
        let (j, l) = (t.cos(), t.sin());
        if (t - exclude).abs() < 2.0 * step || l <= 2.0 * step || j <= 2.0 * step {
            continue;
        }
        let branch = |lam: f64| {
            if t <= exclude {
                merge.small_energy(j, lam)
            } else {
                merge.large_energy(j, lam)
            }
        };
        let (e0, d1, d2) = branch(l);
        let (ep, em) = (branch(l + step).0, branch(l - step).0);
        let fd1 = (ep - em) / (2.0 * step);
        let fd2 = (ep - 2.0 * e0 + em) / (step * step);
        let scale = 1.0 + d2.abs();
        worst = worst.max((fd1 - d1).abs()).max((fd2 - d2).abs() / scale);
    }
    if worst > tolerance {
        return Err(Error::GridTooCoarse {
            mismatch: worst,
            tolerance,
        });
    }
    Ok(worst)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
