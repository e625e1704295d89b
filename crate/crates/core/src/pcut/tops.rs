//! Block operators T_n as exact operator templates in the site (Z) basis.
//!
//! Small coupling: quasiparticles are X eigenstates v_q, X v_q = ω^q v_q,
//! with Z v_q = v_{q−1}. A bond term Ẑ_i Ẑ_j† + h.c. moves the pair of
//! labels (a, b) to (a−1, b+1) and (a+1, b−1); T_n collects the moves that
//! change the number of nonzero labels by n.
//!
//! Large coupling: quasiparticles are misaligned bonds. X̂ + X̂† on a site is
//! split by the change n ∈ [−4, 4] in the number of misaligned bonds at it.

use std::collections::BTreeMap;

use crate::cyclo::Cyclo;
use crate::error::Result;
use crate::qudit::{weyl_product, SparseOperator};

const D: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Small,
    Large,
}

impl Regime {
    pub fn n_max(self) -> i8 {
        match self {
            Regime::Small => 2,
            Regime::Large => 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TOperatorSpec {
    pub regime: Regime,
    pub n_max: i8,
    /// Counting operator restricted to the template support.
    pub q: SparseOperator,
    /// T_n on the template support: two bond sites (small) or a site and its
    /// four neighbours, site 0 in the centre (large).
    pub t: BTreeMap<i8, SparseOperator>,
}

fn one_site(n: usize, site: usize, a: i64, b: i64) -> SparseOperator {
    weyl_product(n, D, &[(site, a, b)]).expect("site in range")
}

/// |v_q⟩⟨v_q| = (1/3) Σ_k ω^{−qk} X^k on `site`.
fn x_projector(n: usize, site: usize, q: u32) -> SparseOperator {
    let mut p = SparseOperator::zero(n, D);
    for k in 0..D {
        let c = Cyclo::omega_pow(D, -((q * k) as i64));
        p = p.add(&one_site(n, site, k as i64, 0).scale(&c));
    }
    p.scale(&Cyclo::from_ratio(D, 1, 3))
}

/// |r⟩⟨r| = (1/3) Σ_k ω^{−rk} Z^k on `site`.
fn z_projector(n: usize, site: usize, r: u32) -> SparseOperator {
    let mut p = SparseOperator::zero(n, D);
    for k in 0..D {
        let c = Cyclo::omega_pow(D, -((r * k) as i64));
        p = p.add(&one_site(n, site, 0, k as i64).scale(&c));
    }
    p.scale(&Cyclo::from_ratio(D, 1, 3))
}

/// |v_a⟩⟨v_b| = Z^{b−a} P_b.
fn qp_ket_bra(n: usize, site: usize, a: u32, b: u32) -> SparseOperator {
    one_site(n, site, 0, b as i64 - a as i64).mul(&x_projector(n, site, b))
}

/// (−(X + X†) + 2)/3 on one site: 0 on v_0, 1 on v_1 and v_2.
pub fn small_q_site(n: usize, site: usize) -> SparseOperator {
    let xs = one_site(n, site, 1, 0);
    let two = SparseOperator::scalar(n, D, Cyclo::from_integer(D, 2));
    two.sub(&xs.add(&xs.dagger())).scale(&Cyclo::from_ratio(D, 1, 3))
}

/// (2 − Ẑ_i Ẑ_j† − Ẑ_j Ẑ_i†)/3: 1 on a misaligned bond, 0 otherwise.
pub fn large_q_bond(n: usize, i: usize, j: usize) -> SparseOperator {
    let p = weyl_product(n, D, &[(i, 0, 1), (j, 0, -1)]).expect("sites in range");
    let two = SparseOperator::scalar(n, D, Cyclo::from_integer(D, 2));
    two.sub(&p.add(&p.dagger())).scale(&Cyclo::from_ratio(D, 1, 3))
}

fn nonzero(a: u32) -> i8 {
    (a != 0) as i8
}

/// T_n for the bond (i, j) of an `n`-site system.
pub fn small_bond_t(num_sites: usize, i: usize, j: usize) -> BTreeMap<i8, SparseOperator> {
    let mut t: BTreeMap<i8, SparseOperator> = (-2..=2)
        .map(|n| (n, SparseOperator::zero(num_sites, D)))
        .collect();
    for a in 0..D {
        for b in 0..D {
            for s in [1, 2] {
                // s = 1: (a−1, b+1); s = 2: (a+1, b−1)
                let (na, nb) = ((a + 3 - s) % 3, (b + s) % 3);
                let n = nonzero(na) + nonzero(nb) - nonzero(a) - nonzero(b);
                let term = qp_ket_bra(num_sites, i, na, a).mul(&qp_ket_bra(num_sites, j, nb, b));
                let slot = t.get_mut(&n).unwrap();
                *slot = slot.add(&term);
            }
        }
    }
    t
}

/// T_n for site `centre` with the given neighbours, in an `n`-site system.
pub fn large_site_t(
    num_sites: usize,
    centre: usize,
    neighbours: &[usize],
) -> BTreeMap<i8, SparseOperator> {
    let deg = neighbours.len() as i8;
    let mut t: BTreeMap<i8, SparseOperator> = (-deg..=deg)
        .map(|n| (n, SparseOperator::zero(num_sites, D)))
        .collect();
    let configs = 3usize.pow(neighbours.len() as u32);
    for r in 0..D {
        for cfg in 0..configs {
            let labels: Vec<u32> = (0..neighbours.len())
                .map(|k| (cfg / 3usize.pow(k as u32) % 3) as u32)
                .collect();
            let mut proj = z_projector(num_sites, centre, r);
            for (&site, &l) in neighbours.iter().zip(&labels) {
                proj = proj.mul(&z_projector(num_sites, site, l));
            }
            let misaligned = |c: u32| labels.iter().filter(|&&l| l != c).count() as i8;
            for s in [1i64, -1] {
                let nr = (r as i64 + s).rem_euclid(3) as u32;
                let n = misaligned(nr) - misaligned(r);
                let term = one_site(num_sites, centre, s, 0).mul(&proj);
                let slot = t.get_mut(&n).unwrap();
                *slot = slot.add(&term);
            }
        }
    }
    t.retain(|_, op| !op.is_zero());
    t
}

/// Block operators and counting operator on the template support.
pub fn decompose_t(regime: Regime) -> Result<TOperatorSpec> {
    match regime {
        Regime::Small => {
            let q = small_q_site(2, 0).add(&small_q_site(2, 1));
            Ok(TOperatorSpec {
                regime,
                n_max: 2,
                q,
                t: small_bond_t(2, 0, 1),
            })
        }
        Regime::Large => {
            let mut q = SparseOperator::zero(5, D);
            for nb in 1..5 {
                q = q.add(&large_q_bond(5, 0, nb));
            }
            Ok(TOperatorSpec {
                regime,
                n_max: 4,
                q,
                t: large_site_t(5, 0, &[1, 2, 3, 4]),
            })
        }
    }
}
