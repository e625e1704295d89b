//! Exact diagonalization: dense for small Hilbert spaces, Lanczos with full
//! reorthogonalization and deflation otherwise.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::lattice::{
    build_full_hamiltonian, build_mapped_hamiltonian, build_torus, stabilizers, string_operators,
    Couplings, SiteGraph,
};
use crate::qudit::SparseOperator;
use crate::series::RationalSeries;

pub const DENSE_LIMIT: usize = 20_000;
pub const ITERATIVE_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos {
        tolerance: f64,
        max_iter: usize,
        seed: u64,
    },
}

impl Method {
    pub fn lanczos() -> Self {
        Method::Lanczos {
            tolerance: 1e-10,
            max_iter: 400,
            seed: 7,
        }
    }

    /// Dense up to 2000 states, Lanczos beyond.
    pub fn auto(dim: usize) -> Self {
        if dim <= 2000 {
            Method::Dense
        } else {
            Method::lanczos()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    pub method: Method,
    /// Lanczos steps summed over deflation rounds; 0 for dense.
    pub iterations: usize,
    pub max_residual: f64,
}

impl SpectrumResult {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Real symmetric matrix stored by rows.
#[derive(Debug, Clone)]
pub struct SymmetricMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SymmetricMatrix {
    /// Requires an exactly Hermitian operator with real matrix elements in
    /// the product basis.
    pub fn from_operator(op: &SparseOperator) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        let dim = op.dim();
        if dim > ITERATIVE_LIMIT {
            return Err(Error::DimensionTooLarge {
                dim,
                limit: ITERATIVE_LIMIT,
                method: "iterative",
            });
        }
        // Hermitian: column c holds the conjugate of row c
        let cols = op.to_numeric().columns();
        let mut rows = Vec::with_capacity(dim);
        for col in cols {
            let mut row = Vec::with_capacity(col.len());
            for (r, v) in col {
                if v.im.abs() > 1e-12 {
                    return Err(Error::InvalidArgument(
                        "complex matrix elements; use dense_complex".into(),
                    ));
                }
                row.push((r, v.re));
            }
            rows.push(row);
        }
        Ok(SymmetricMatrix { rows })
    }

    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        SymmetricMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().zip(&self.rows).for_each(|(yi, row)| {
            *yi = row.iter().map(|&(c, v)| v * x[c]).sum();
        });
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] += v;
            }
        }
        m
    }

    fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let mut hv = vec![0.0; v.len()];
        self.matvec(v, &mut hv);
        hv.iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Rayleigh quotient ⟨v|H|v⟩/⟨v|v⟩ accumulated in double-double.
    pub fn rayleigh_dd(&self, v: &[f64]) -> TwoFloat {
        let mut num = TwoFloat::from(0.0);
        let mut den = TwoFloat::from(0.0);
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = TwoFloat::from(0.0);
            for &(c, h) in row {
                acc += TwoFloat::new_mul(h, v[c]);
            }
            num += acc * v[r];
            den += TwoFloat::new_mul(v[r], v[r]);
        }
        num / den
    }
}

fn dense_symmetric(m: &SymmetricMatrix, count: usize) -> Result<SpectrumResult> {
    if m.dim() > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: m.dim(),
            limit: DENSE_LIMIT,
            method: "dense",
        });
    }
    let eig = SymmetricEigen::new(m.to_dense());
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(count.min(m.dim()));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    let max_residual = eigenvalues
        .iter()
        .zip(&vectors)
        .map(|(&e, v)| m.residual(e, v))
        .fold(0.0, f64::max);
    Ok(SpectrumResult {
        eigenvalues,
        vectors,
        method: Method::Dense,
        iterations: 0,
        max_residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn project_out(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(w, b);
            axpy(-c, b, w);
        }
    }
}

/// Lowest eigenpair of H restricted to the complement of `locked`.
fn lanczos_lowest(
    m: &SymmetricMatrix,
    locked: &[Vec<f64>],
    tolerance: f64,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<f64>, usize)> {
    let n = m.dim();
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project_out(&mut v, locked);
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut basis = vec![v];
    let (mut alpha, mut beta) = (Vec::<f64>::new(), Vec::<f64>::new());
    let mut w = vec![0.0; n];
    let steps = max_iter.min(n - locked.len());
    for j in 0..steps {
        m.matvec(&basis[j], &mut w);
        project_out(&mut w, locked);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        project_out(&mut w, &basis);
        let b = dot(&w, &w).sqrt();
        let k = j + 1;
        let done = b < 1e-13 || k == steps;
        if done || k % 8 == 0 {
            let t = DMatrix::from_fn(k, k, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let i = eig.eigenvalues.imin();
            let s = eig.eigenvectors.column(i);
            let estimate = (b * s[k - 1]).abs();
            if done || estimate < tolerance {
                let mut x = vec![0.0; n];
                for (q, &c) in basis.iter().zip(s.iter()) {
                    axpy(c, q, &mut x);
                }
                project_out(&mut x, locked);
                let nx = dot(&x, &x).sqrt();
                x.iter_mut().for_each(|e| *e /= nx);
                return Ok((eig.eigenvalues[i], x, k));
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|e| e / b).collect());
    }
    Err(Error::NotConverged(f64::NAN))
}

fn lanczos(m: &SymmetricMatrix, count: usize, method: Method) -> Result<SpectrumResult> {
    let Method::Lanczos {
        tolerance,
        max_iter,
        seed,
    } = method
    else {
        unreachable!()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut iterations = 0;
    for _ in 0..count.min(m.dim()) {
        let locked: Vec<Vec<f64>> = pairs.iter().map(|p| p.1.clone()).collect();
        let (e, v, k) = lanczos_lowest(m, &locked, tolerance, max_iter, &mut rng)?;
        iterations += k;
        pairs.push((e, v));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let max_residual = pairs
        .iter()
        .map(|(e, v)| m.residual(*e, v))
        .fold(0.0, f64::max);
    if max_residual > 100.0 * tolerance {
        return Err(Error::NotConverged(max_residual));
    }
    Ok(SpectrumResult {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        vectors: pairs.into_iter().map(|p| p.1).collect(),
        method,
        iterations,
        max_residual,
    })
}

/// The `count` lowest eigenpairs of a real symmetric matrix.
pub fn lowest_eigenpairs(m: &SymmetricMatrix, count: usize, method: Method) -> Result<SpectrumResult> {
    match method {
        Method::Dense => dense_symmetric(m, count),
        Method::Lanczos { .. } => lanczos(m, count, method),
    }
}

pub fn spectrum(op: &SparseOperator, count: usize, method: Method) -> Result<SpectrumResult> {
    let dim = op.dim();
    if matches!(method, Method::Dense) && dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: DENSE_LIMIT,
            method: "dense",
        });
    }
    lowest_eigenpairs(&SymmetricMatrix::from_operator(op)?, count, method)
}

pub fn ground_state(op: &SparseOperator, method: Method) -> Result<(f64, Vec<f64>)> {
    let mut r = spectrum(op, 1, method)?;
    Ok((r.eigenvalues[0], r.vectors.swap_remove(0)))
}

/// All eigenvalues of a Hermitian operator with complex entries.
pub fn dense_complex(op: &SparseOperator) -> Result<Vec<f64>> {
    if !op.is_hermitian() {
        return Err(Error::NonHermitian);
    }
    let dim = op.dim();
    if dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: DENSE_LIMIT,
            method: "dense",
        });
    }
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (c, col) in op.to_numeric().columns().into_iter().enumerate() {
        for (r, v) in col {
            m[(r, c)] += v;
        }
    }
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// ⟨u|O|v⟩ for real vectors.
pub fn matrix_element(op: &SparseOperator, u: &[f64], v: &[f64]) -> Complex64 {
    op.to_numeric()
        .columns()
        .par_iter()
        .enumerate()
        .map(|(c, col)| {
            col.iter()
                .map(|&(r, val)| val * u[r] * v[c])
                .sum::<Complex64>()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingReport {
    pub couplings: Couplings,
    pub full_energy: f64,
    pub sublattice_energies: [f64; 2],
    /// E_A + E_B − 2KN.
    pub mapped_energy: f64,
    pub mismatch: f64,
    /// Min over plaquettes of Re⟨B_p⟩ in the full ground state.
    pub min_plaquette: f64,
    pub ground_multiplicity: usize,
    /// Largest leakage 1 − ‖P_G S g‖² of a ground vector g out of the ground
    /// multiplet under the string operators that commute with H.
    pub string_leakage: f64,
    pub pass: bool,
}

/// Compares the Kitaev-Potts ground energy on an L = 2 torus with the sum of
/// the two decoupled transverse-field Potts models.
pub fn verify_mapping(c: Couplings, l: usize, tolerance: f64) -> Result<MappingReport> {
    if l != 2 {
        return Err(Error::InvalidLatticeSize(l));
    }
    let d = 3;
    let lat = build_torus(l)?;
    let h = build_full_hamiltonian(&lat, d, &c)?;
    let m = SymmetricMatrix::from_operator(&h)?;
    let spec = lowest_eigenpairs(&m, 12, Method::lanczos())?;
    let e0 = spec.eigenvalues[0];
    let ground: Vec<&Vec<f64>> = spec
        .vectors
        .iter()
        .zip(&spec.eigenvalues)
        .filter(|(_, &e)| e - e0 < 1e-8)
        .map(|(v, _)| v)
        .collect();
    let graphs = lat.sublattice_graphs();
    let mut sub = [0.0; 2];
    for (slot, g) in sub.iter_mut().zip(graphs.iter()) {
        let hm = build_mapped_hamiltonian(&g.graph, c.j, c.lambda)?;
        *slot = ground_state(&hm, Method::Dense)?.0;
    }
    let n = lat.num_plaquettes() as f64;
    let mapped = sub[0] + sub[1] - 2.0 * c.k * n;
    let (_, plaquettes) = stabilizers(&lat, d)?;
    let min_plaquette = plaquettes
        .iter()
        .map(|b| matrix_element(b, ground[0], ground[0]).re)
        .fold(f64::INFINITY, f64::min);
    let strings = string_operators(&lat, d)?;
    let mut symmetries = vec![strings.tz1, strings.tz2];
    if c.lambda == 0.0 {
        symmetries.push(strings.tx1);
        symmetries.push(strings.tx2);
    }
    let mut leakage = 0.0f64;
    for s in &symmetries {
        for g in &ground {
            let kept: f64 = ground
                .iter()
                .map(|u| matrix_element(s, u, g).norm_sqr())
                .sum();
            leakage = leakage.max(1.0 - kept);
        }
    }
    let mismatch = (e0 - mapped).abs();
    Ok(MappingReport {
        couplings: c,
        full_energy: e0,
        sublattice_energies: sub,
        mapped_energy: mapped,
        mismatch,
        min_plaquette,
        ground_multiplicity: ground.len(),
        string_leakage: leakage,
        pass: mismatch <= tolerance && (min_plaquette - 1.0).abs() <= 1e-8 && leakage <= 1e-8,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub d: u32,
    pub l: usize,
    pub lambda: f64,
    pub count: usize,
    pub lowest: Vec<f64>,
    /// Spread of the lowest d² levels.
    pub splitting: f64,
}

/// Number of levels within `tolerance` of the ground energy of the Kitaev
/// model (J = K = 1) with Potts coupling λ.
pub fn topological_degeneracy(l: usize, d: u32, lambda: f64, tolerance: f64) -> Result<DegeneracyReport> {
    let lat = build_torus(l)?;
    let h = if lambda == 0.0 {
        crate::lattice::kitaev_hamiltonian(&lat, d, 1.0, 1.0)?
    } else {
        build_full_hamiltonian(&lat, d, &Couplings::new(1.0, 1.0, lambda))?
    };
    let want = (d * d) as usize + 1;
    let m = SymmetricMatrix::from_operator(&h)?;
    let spec = lowest_eigenpairs(&m, want, Method::auto(m.dim()))?;
    let e0 = spec.eigenvalues[0];
    let count = spec.eigenvalues.iter().filter(|&&e| e - e0 <= tolerance).count();
    Ok(DegeneracyReport {
        d,
        l,
        lambda,
        count,
        splitting: spec.eigenvalues[want - 2] - e0,
        lowest: spec.eigenvalues,
    })
}

/// Q − x Σ_bonds (Ẑ_i Ẑ_j† + h.c.) in the X eigenbasis of every site, where
/// Q counts sites off the +1 eigenstate. Matrix elements are 0, 1, or −x and
/// are exact in floating point.
pub fn small_coupling_operator(graph: &SiteGraph, x: f64) -> Result<SymmetricMatrix> {
    let n = graph.num_sites;
    let dim = 3usize
        .checked_pow(n as u32)
        .filter(|&d| d <= DENSE_LIMIT)
        .ok_or(Error::DimensionTooLarge {
            dim: usize::MAX,
            limit: DENSE_LIMIT,
            method: "dense",
        })?;
    let pow: Vec<usize> = (0..n).map(|i| 3usize.pow(i as u32)).collect();
    let rows = (0..dim)
        .map(|idx| {
            let digit = |i: usize| idx / pow[i] % 3;
            let mut row: Vec<(usize, f64)> = Vec::new();
            let q = (0..n).filter(|&i| digit(i) != 0).count();
            if q > 0 {
                row.push((idx, q as f64));
            }
            // Ẑ lowers the X label by one, Ẑ† raises it
            for &(i, j) in &graph.bonds {
                let (a, b) = (digit(i), digit(j));
                for (na, nb) in [((a + 2) % 3, (b + 1) % 3), ((a + 1) % 3, (b + 2) % 3)] {
                    let to = idx - a * pow[i] - b * pow[j] + na * pow[i] + nb * pow[j];
                    row.push((to, -x));
                }
            }
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged
        })
        .collect();
    Ok(SymmetricMatrix::from_rows(rows))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// (x, |E_series − E_ED|).
    pub points: Vec<(f64, f64)>,
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Least-squares slope of log|E_series(x) − E_ED(x)| against log x. The
/// series is the cluster's vacuum energy without constants, in units of 3J.
pub fn series_vs_ed(graph: &SiteGraph, series: &RationalSeries, xs: &[f64]) -> Result<ScalingFit> {
    if xs.len() < 2 || xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::DegenerateFit);
    }
    let mut points = Vec::with_capacity(xs.len());
    for &x in xs {
        let m = small_coupling_operator(graph, x)?;
        let spec = lowest_eigenpairs(&m, 1, Method::Dense)?;
        let e = m.rayleigh_dd(&spec.vectors[0]);
        let ed = rational(e.hi()) + rational(e.lo());
        let diff = (series.eval_exact(&rational(x)) - ed).to_f64().unwrap_or(f64::NAN);
        points.push((x, diff.abs()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, d)| (x.ln(), d.ln())).collect();
    if logs.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::DegenerateFit);
    }
    let k = logs.len() as f64;
    let (mx, my) = (
        logs.iter().map(|p| p.0).sum::<f64>() / k,
        logs.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
        points,
    })
}

/// Log-spaced grid from a to b inclusive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n.max(2) - 1) as f64).exp())
        .collect()
}

/// Dense ground vector of a Hermitian operator as nalgebra vector, for
/// callers that need linear algebra on it.
pub fn ground_vector(op: &SparseOperator) -> Result<DVector<f64>> {
    Ok(DVector::from_vec(ground_state(op, Method::Dense)?.1))
}
