//! Generalized Pauli operators and site-labelled sparse operators.
//!
//! A [`SparseOperator`] is stored in the Weyl basis: every term is a product
//! of monomials X^a Z^b on distinct sites with an exact coefficient in Q(ω).
//! The d² monomials X^a Z^b form a basis of the d×d matrices, so this
//! representation is canonical, and operator equality, hermiticity and
//! vanishing commutators are decided by comparing term maps.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;

use crate::cyclo::Cyclo;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Z,
}

/// Dense d×d operator on one qudit, exact entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LocalOp {
    d: u32,
    entries: Vec<Cyclo>,
}

fn check_dim(d: u32) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// X (cyclic shift, X|j⟩ = |j+1⟩) or Z (clock, Z|j⟩ = ω^j|j⟩).
pub fn generalized_pauli(kind: PauliKind, d: u32) -> Result<LocalOp> {
    check_dim(d)?;
    let mut op = LocalOp::zero(d);
    for j in 0..d {
        match kind {
            PauliKind::X => op.set((j + 1) % d, j, Cyclo::one(d)),
            PauliKind::Z => op.set(j, j, Cyclo::omega_pow(d, j as i64)),
        }
    }
    Ok(op)
}

/// u = Σ_k |−k mod d⟩⟨k|; conjugates σ_x and σ_z into their adjoints.
pub fn conjugation_u(d: u32) -> Result<LocalOp> {
    check_dim(d)?;
    let mut op = LocalOp::zero(d);
    for k in 0..d {
        op.set((d - k) % d, k, Cyclo::one(d));
    }
    Ok(op)
}

impl LocalOp {
    pub fn zero(d: u32) -> Self {
        LocalOp {
            d,
            entries: vec![Cyclo::zero(d); (d * d) as usize],
        }
    }

    pub fn identity(d: u32) -> Self {
        let mut op = Self::zero(d);
        for j in 0..d {
            op.set(j, j, Cyclo::one(d));
        }
        op
    }

    /// Matrix unit |row⟩⟨col|.
    pub fn ket_bra(d: u32, row: u32, col: u32) -> Self {
        let mut op = Self::zero(d);
        op.set(row, col, Cyclo::one(d));
        op
    }

    /// X^a Z^b.
    pub fn weyl(d: u32, a: u32, b: u32) -> Self {
        let mut op = Self::zero(d);
        for j in 0..d {
            op.set((j + a) % d, j, Cyclo::omega_pow(d, (b * j) as i64));
        }
        op
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn get(&self, row: u32, col: u32) -> &Cyclo {
        &self.entries[(row * self.d + col) as usize]
    }

    pub fn set(&mut self, row: u32, col: u32, v: Cyclo) {
        let d = self.d;
        self.entries[(row * d + col) as usize] = v;
    }

    pub fn mul(&self, rhs: &LocalOp) -> LocalOp {
        assert_eq!(self.d, rhs.d);
        let d = self.d;
        let mut out = LocalOp::zero(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = Cyclo::zero(d);
                for k in 0..d {
                    let a = self.get(i, k);
                    let b = rhs.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn add(&self, rhs: &LocalOp) -> LocalOp {
        LocalOp {
            d: self.d,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &LocalOp) -> LocalOp {
        LocalOp {
            d: self.d,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Cyclo) -> LocalOp {
        LocalOp {
            d: self.d,
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    pub fn dagger(&self) -> LocalOp {
        let mut out = LocalOp::zero(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> LocalOp {
        let mut acc = LocalOp::identity(self.d);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Cyclo::is_zero)
    }

    /// Image of basis vector |col⟩ as (row, amplitude) pairs.
    pub fn apply_basis(&self, col: u32) -> Vec<(u32, Cyclo)> {
        (0..self.d)
            .filter_map(|row| {
                let v = self.get(row, col);
                (!v.is_zero()).then(|| (row, v.clone()))
            })
            .collect()
    }

    /// Coefficients c_ab with self = Σ c_ab X^a Z^b.
    pub fn weyl_decompose(&self) -> Vec<((u32, u32), Cyclo)> {
        let d = self.d;
        let inv_d = BigRational::new(1.into(), (d as i64).into());
        let mut out = Vec::new();
        for a in 0..d {
            for b in 0..d {
                // Tr((X^a Z^b)† M) = Σ_j ω^{−bj} M[j+a][j]
                let mut acc = Cyclo::zero(d);
                for j in 0..d {
                    let m = self.get((j + a) % d, j);
                    if !m.is_zero() {
                        acc += &(m * &Cyclo::omega_pow(d, -((b * j) as i64)));
                    }
                }
                if !acc.is_zero() {
                    out.push(((a, b), acc.scale(&inv_d)));
                }
            }
        }
        out
    }
}

impl fmt::Debug for LocalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LocalOp(d={}) [", self.d)?;
        for i in 0..self.d {
            let row: Vec<String> = (0..self.d).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Sorted list of (site, a, b) with (a, b) ≠ (0, 0): the monomial Π X^a Z^b.
pub type WeylString = Vec<(usize, u32, u32)>;

/// Exact many-body operator as a canonical sum of Weyl strings.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseOperator {
    num_sites: usize,
    d: u32,
    terms: BTreeMap<WeylString, Cyclo>,
}

impl fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "SparseOperator(n={}, d={}, {} terms)",
            self.num_sites,
            self.d,
            self.terms.len()
        )?;
        for (s, c) in self.terms.iter().take(12) {
            writeln!(f, "  ({c}) {s:?}")?;
        }
        Ok(())
    }
}

impl SparseOperator {
    pub fn zero(num_sites: usize, d: u32) -> Self {
        SparseOperator {
            num_sites,
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(num_sites: usize, d: u32) -> Self {
        Self::scalar(num_sites, d, Cyclo::one(d))
    }

    pub fn scalar(num_sites: usize, d: u32, c: Cyclo) -> Self {
        let mut op = Self::zero(num_sites, d);
        op.add_term(Vec::new(), c);
        op
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn weyl_terms(&self) -> impl Iterator<Item = (&WeylString, &Cyclo)> {
        self.terms.iter()
    }

    /// Terms as (coefficient, site → LocalOp) with identity factors omitted.
    pub fn terms(&self) -> Vec<(Cyclo, BTreeMap<usize, LocalOp>)> {
        self.terms
            .iter()
            .map(|(s, c)| {
                let factors = s
                    .iter()
                    .map(|&(site, a, b)| (site, LocalOp::weyl(self.d, a, b)))
                    .collect();
                (c.clone(), factors)
            })
            .collect()
    }

    fn add_term(&mut self, s: WeylString, c: Cyclo) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(s) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Builds an operator from explicit factor maps; the result is canonical.
    pub fn from_terms(
        num_sites: usize,
        d: u32,
        terms: impl IntoIterator<Item = (Cyclo, BTreeMap<usize, LocalOp>)>,
    ) -> Result<Self> {
        let mut out = Self::zero(num_sites, d);
        for (c, factors) in terms {
            let mut term = Self::scalar(num_sites, d, c);
            for (site, op) in factors {
                term = term.mul(&embed(&op, site, num_sites)?);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, rhs: &SparseOperator) -> SparseOperator {
        self.compatible(rhs);
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(s.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &SparseOperator) -> SparseOperator {
        self.add(&rhs.scale(&Cyclo::from_integer(self.d, -1)))
    }

    pub fn scale(&self, c: &Cyclo) -> SparseOperator {
        let mut out = Self::zero(self.num_sites, self.d);
        for (s, v) in &self.terms {
            out.add_term(s.clone(), v * c);
        }
        out
    }

    pub fn scale_rational(&self, r: &BigRational) -> SparseOperator {
        self.scale(&Cyclo::from_rational(self.d, r.clone()))
    }

    fn compatible(&self, rhs: &SparseOperator) {
        assert_eq!(self.d, rhs.d, "local dimension mismatch");
        assert_eq!(self.num_sites, rhs.num_sites, "site count mismatch");
    }

    pub fn mul(&self, rhs: &SparseOperator) -> SparseOperator {
        self.compatible(rhs);
        let d = self.d;
        let mut out = Self::zero(self.num_sites, d);
        for (s1, c1) in &self.terms {
            for (s2, c2) in &rhs.terms {
                let (s, phase) = mul_strings(d, s1, s2);
                let c = &(c1 * c2) * &Cyclo::omega_pow(d, phase);
                out.add_term(s, c);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> SparseOperator {
        let mut acc = Self::identity(self.num_sites, self.d);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn commutator(&self, rhs: &SparseOperator) -> SparseOperator {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    pub fn dagger(&self) -> SparseOperator {
        let d = self.d;
        let mut out = Self::zero(self.num_sites, d);
        for (s, c) in &self.terms {
            // (X^a Z^b)† = ω^{ab} X^{−a} Z^{−b}
            let mut phase = 0i64;
            let ns: WeylString = s
                .iter()
                .map(|&(site, a, b)| {
                    phase += (a * b) as i64;
                    (site, (d - a) % d, (d - b) % d)
                })
                .collect();
            out.add_term(ns, &c.conj() * &Cyclo::omega_pow(d, phase));
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.dagger()
    }

    /// Sites acted on non-trivially.
    pub fn support(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .terms
            .keys()
            .flat_map(|s| s.iter().map(|&(site, _, _)| site))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn dim(&self) -> usize {
        (self.d as usize).pow(self.num_sites as u32)
    }

    /// Image of a product basis state (base-d digits, site 0 least
    /// significant) under every term, exact amplitudes.
    pub fn apply_basis(&self, index: usize) -> Vec<(usize, Cyclo)> {
        let d = self.d as usize;
        let mut out: BTreeMap<usize, Cyclo> = BTreeMap::new();
        for (s, c) in &self.terms {
            let (new_index, phase) = apply_string(d, s, index);
            let amp = c * &Cyclo::omega_pow(self.d, phase);
            out.entry(new_index)
                .and_modify(|v| *v += &amp)
                .or_insert(amp);
        }
        out.into_iter().filter(|(_, v)| !v.is_zero()).collect()
    }

    /// Numeric form for matrix-vector products.
    pub fn to_numeric(&self) -> NumericOperator {
        NumericOperator {
            d: self.d as usize,
            dim: self.dim(),
            terms: self
                .terms
                .iter()
                .map(|(s, c)| (s.clone(), c.to_c64()))
                .collect(),
        }
    }
}

fn digit(index: usize, site: usize, d: usize) -> usize {
    (index / d.pow(site as u32)) % d
}

/// Applies Π X^a Z^b to |index⟩; returns the new index and the phase exponent.
fn apply_string(d: usize, s: &WeylString, index: usize) -> (usize, i64) {
    let mut new_index = index;
    let mut phase = 0i64;
    for &(site, a, b) in s {
        let j = digit(index, site, d);
        phase += (b as usize * j) as i64;
        let nj = (j + a as usize) % d;
        let place = d.pow(site as u32);
        new_index = new_index - j * place + nj * place;
    }
    (new_index, phase)
}

fn mul_strings(d: u32, s1: &WeylString, s2: &WeylString) -> (WeylString, i64) {
    // (X^a1 Z^b1)(X^a2 Z^b2) = ω^{b1 a2} X^{a1+a2} Z^{b1+b2}
    let mut out = Vec::with_capacity(s1.len() + s2.len());
    let mut phase = 0i64;
    let (mut i, mut j) = (0, 0);
    while i < s1.len() || j < s2.len() {
        let take1 = j >= s2.len() || (i < s1.len() && s1[i].0 < s2[j].0);
        let take2 = i >= s1.len() || (j < s2.len() && s2[j].0 < s1[i].0);
        if take1 {
            out.push(s1[i]);
            i += 1;
        } else if take2 {
            out.push(s2[j]);
            j += 1;
        } else {
            let (site, a1, b1) = s1[i];
            let (_, a2, b2) = s2[j];
            phase += (b1 * a2) as i64;
            let (a, b) = ((a1 + a2) % d, (b1 + b2) % d);
            if (a, b) != (0, 0) {
                out.push((site, a, b));
            }
            i += 1;
            j += 1;
        }
    }
    (out, phase)
}

/// `op` on `site`, identity elsewhere.
pub fn embed(op: &LocalOp, site: usize, num_sites: usize) -> Result<SparseOperator> {
    if site >= num_sites {
        return Err(Error::SiteOutOfRange { site, num_sites });
    }
    let d = op.d();
    let mut out = SparseOperator::zero(num_sites, d);
    for ((a, b), c) in op.weyl_decompose() {
        let s = if (a, b) == (0, 0) {
            Vec::new()
        } else {
            vec![(site, a, b)]
        };
        out.add_term(s, c);
    }
    Ok(out)
}

/// Product of Weyl monomials X^{a_i} Z^{b_i} on the given sites.
pub fn weyl_product(num_sites: usize, d: u32, factors: &[(usize, i64, i64)]) -> Result<SparseOperator> {
    let mut acc = SparseOperator::identity(num_sites, d);
    for &(site, a, b) in factors {
        if site >= num_sites {
            return Err(Error::SiteOutOfRange { site, num_sites });
        }
        let a = a.rem_euclid(d as i64) as u32;
        let b = b.rem_euclid(d as i64) as u32;
        let mut m = SparseOperator::zero(num_sites, d);
        let s = if (a, b) == (0, 0) {
            Vec::new()
        } else {
            vec![(site, a, b)]
        };
        m.add_term(s, Cyclo::one(d));
        acc = acc.mul(&m);
    }
    Ok(acc)
}

/// Floating-point copy of a [`SparseOperator`] for eigensolvers.
#[derive(Clone, Debug)]
pub struct NumericOperator {
    d: usize,
    dim: usize,
    terms: Vec<(WeylString, Complex64)>,
}

impl NumericOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// For each column index, the (row, value) entries. Float cancellations
    /// below 1e-13 are dropped.
    pub fn columns(&self) -> Vec<Vec<(usize, Complex64)>> {
        let roots: Vec<Complex64> = (0..self.d)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / self.d as f64))
            .collect();
        (0..self.dim)
            .map(|col| {
                let mut entries: BTreeMap<usize, Complex64> = BTreeMap::new();
                for (s, c) in &self.terms {
                    let (row, phase) = apply_string(self.d, s, col);
                    let v = c * roots[phase.rem_euclid(self.d as i64) as usize];
                    *entries.entry(row).or_insert(Complex64::new(0.0, 0.0)) += v;
                }
                entries.into_iter().filter(|(_, v)| v.norm() > 1e-13).collect()
            })
            .collect()
    }
}
