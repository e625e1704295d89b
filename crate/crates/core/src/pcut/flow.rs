//! Order-by-order solution of the flow equations for the quasiparticle
//! conserving generator.
//!
//! With H(ℓ) = Q + Σ_m F(ℓ; m) T_{m1}⋯T_{mk} the flow reads
//!   ∂F(m) = −|M(m)| F(m) + Σ_{m = m1 m2} [sgn M(m1) − sgn M(m2)] F(m1) F(m2),
//! where M is the sum of the indices, and F(ℓ; (n)) = e^{−|n|ℓ} at first
//! order. Every F is a finite sum of terms c ℓ^p e^{−μℓ}, integrated exactly.
//! The effective weights are C(m) = F(∞; m) for M(m) = 0.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::series::{format_rational, parse_rational};

pub const ORDER_CAP: usize = 8;

pub type Sequence = Vec<i8>;

/// Σ c ℓ^p e^{−μℓ}, keyed by (μ, p).
type Expr = BTreeMap<(u32, u32), BigRational>;

fn total(m: &[i8]) -> i32 {
    m.iter().map(|&n| n as i32).sum()
}

fn add_term(e: &mut Expr, key: (u32, u32), c: BigRational) {
    if c.is_zero() {
        return;
    }
    let slot = e.entry(key).or_insert_with(BigRational::zero);
    *slot += c;
    if slot.is_zero() {
        e.remove(&key);
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Solves ∂F = −a F + S with F(0) = 0.
fn integrate(source: &Expr, a: u32) -> Expr {
    let mut out = Expr::new();
    for (&(mu, p), c) in source {
        let beta = a as i64 - mu as i64;
        if beta == 0 {
            add_term(&mut out, (a, p + 1), c / BigRational::from_integer((p + 1).into()));
            continue;
        }
        // ∫_0^ℓ t^p e^{βt} dt = e^{βℓ} Σ_j (−1)^j p!/(p−j)! ℓ^{p−j}/β^{j+1} − (−1)^p p!/β^{p+1}
        let beta = BigRational::from_integer(beta.into());
        let pf = factorial(p);
        let mut beta_pow = beta.clone();
        for j in 0..=p {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let falling = BigRational::new(pf.clone(), factorial(p - j));
            let coeff = c * falling * BigRational::from_integer(sign.into()) / &beta_pow;
            add_term(&mut out, (mu, p - j), coeff);
            if j < p {
                beta_pow = &beta_pow * &beta;
            }
        }
        let sign = if p % 2 == 0 { -1 } else { 1 };
        let last = c * BigRational::from_integer(pf) * BigRational::from_integer(sign.into()) / beta_pow;
        add_term(&mut out, (a, 0), last);
    }
    out
}

fn product(x: &Expr, y: &Expr, scale: i32, into: &mut Expr) {
    let s = BigRational::from_integer(scale.into());
    for (&(m1, p1), c1) in x {
        for (&(m2, p2), c2) in y {
            add_term(into, (m1 + m2, p1 + p2), c1 * c2 * &s);
        }
    }
}

/// Exact weights C(m) of all index sequences with Σ m = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffTable {
    pub n_max: i8,
    pub max_order: usize,
    /// `orders[k − 1]` holds the sequences of length k.
    pub orders: Vec<BTreeMap<Sequence, BigRational>>,
}

impl CoeffTable {
    pub fn get(&self, m: &[i8]) -> BigRational {
        self.orders
            .get(m.len().wrapping_sub(1))
            .and_then(|o| o.get(m))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn order(&self, k: usize) -> &BTreeMap<Sequence, BigRational> {
        &self.orders[k - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sequence, &BigRational)> {
        self.orders.iter().flat_map(|o| o.iter())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<_> = self
            .iter()
            .map(|(m, c)| json!({ "sequence": m, "weight": format_rational(c) }))
            .collect();
        json!({ "n_max": self.n_max, "max_order": self.max_order, "entries": entries })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |what: &str| Error::InvalidArgument(format!("coefficient table: {what}"));
        let n_max = v["n_max"].as_i64().ok_or_else(|| bad("n_max"))? as i8;
        let max_order = v["max_order"].as_u64().ok_or_else(|| bad("max_order"))? as usize;
        let mut orders = vec![BTreeMap::new(); max_order];
        for e in v["entries"].as_array().ok_or_else(|| bad("entries"))? {
            let m: Sequence = serde_json::from_value(e["sequence"].clone())?;
            let w = parse_rational(e["weight"].as_str().ok_or_else(|| bad("weight"))?)?;
            if m.is_empty() || m.len() > max_order {
                return Err(bad("sequence length"));
            }
            orders[m.len() - 1].insert(m, w);
        }
        Ok(CoeffTable {
            n_max,
            max_order,
            orders,
        })
    }
}

/// Flow-equation weights for T_n with |n| ≤ `n_max`, through `max_order`.
pub fn pcut_coefficients(max_order: usize, n_max: i8) -> Result<CoeffTable> {
    if max_order > ORDER_CAP {
        return Err(Error::OrderCapExceeded {
            requested: max_order,
            cap: ORDER_CAP,
        });
    }
    if max_order == 0 || n_max < 1 {
        return Err(Error::InvalidArgument(
            "need max_order >= 1 and n_max >= 1".into(),
        ));
    }
    let bound = |k: usize| n_max as i32 * (max_order - k) as i32;
    // levels[k − 1]: F for sequences of length k that can still reach M = 0
    let mut levels: Vec<HashMap<Sequence, Expr>> = Vec::with_capacity(max_order);
    let first: HashMap<Sequence, Expr> = (-n_max..=n_max)
        .filter(|&n| (n as i32).abs() <= bound(1))
        .map(|n| {
            let mut e = Expr::new();
            e.insert((n.unsigned_abs() as u32, 0), BigRational::one());
            (vec![n], e)
        })
        .collect();
    levels.push(first);

    for k in 2..=max_order {
        let mut sources: HashMap<Sequence, Expr> = HashMap::new();
        for j in 1..k {
            for (m1, f1) in &levels[j - 1] {
                let s1 = total(m1).signum();
                for (m2, f2) in &levels[k - j - 1] {
                    let s = s1 - total(m2).signum();
                    if s == 0 || (total(m1) + total(m2)).abs() > bound(k) {
                        continue;
                    }
                    let mut m = m1.clone();
                    m.extend_from_slice(m2);
                    product(f1, f2, s, sources.entry(m).or_default());
                }
            }
        }
        let level: HashMap<Sequence, Expr> = sources
            .into_iter()
            .filter_map(|(m, src)| {
                let f = integrate(&src, total(&m).unsigned_abs());
                (!f.is_empty()).then_some((m, f))
            })
            .collect();
        levels.push(level);
    }

    let orders = levels
        .iter()
        .map(|level| {
            level
                .iter()
                .filter(|(m, _)| total(m) == 0)
                .filter_map(|(m, f)| {
                    debug_assert!(
                        f.keys().all(|&(mu, p)| mu > 0 || p == 0),
                        "secular term in C({m:?})"
                    );
                    f.get(&(0, 0))
                        .filter(|c| !c.is_zero())
                        .map(|c| (m.clone(), c.clone()))
                })
                .collect()
        })
        .collect();
    Ok(CoeffTable {
        n_max,
        max_order,
        orders,
    })
}

/// Expands a nested commutator, given as a binary tree, into sequence weights.
#[derive(Debug, Clone)]
pub enum Commutator {
    T(i8),
    C(Box<Commutator>, Box<Commutator>),
}

impl Commutator {
    pub fn t(n: i8) -> Self {
        Commutator::T(n)
    }

    pub fn c(a: Commutator, b: Commutator) -> Self {
        Commutator::C(Box::new(a), Box::new(b))
    }

    pub fn expand(&self) -> BTreeMap<Sequence, BigRational> {
        match self {
            Commutator::T(n) => BTreeMap::from([(vec![*n], BigRational::one())]),
            Commutator::C(a, b) => {
                let (ea, eb) = (a.expand(), b.expand());
                let mut out = BTreeMap::new();
                for (ma, ca) in &ea {
                    for (mb, cb) in &eb {
                        let mut ab = ma.clone();
                        ab.extend_from_slice(mb);
                        *out.entry(ab).or_insert_with(BigRational::zero) += ca * cb;
                        let mut ba = mb.clone();
                        ba.extend_from_slice(ma);
                        *out.entry(ba).or_insert_with(BigRational::zero) -= ca * cb;
                    }
                }
                out.retain(|_, c| !c.is_zero());
                out
            }
        }
    }
}

/// Sign of the k-th order when T'_n = −x T_n is replaced by T_n.
pub fn order_sign(k: usize) -> BigRational {
    if k % 2 == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}
