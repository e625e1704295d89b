use std::collections::BTreeMap;

use kitaev_potts::clusters::{canonical_bonds, enumerate_clusters};
use kitaev_potts::cyclo::Cyclo;
use kitaev_potts::fixtures::printed_series;
use kitaev_potts::lattice::SiteGraph;
use kitaev_potts::pcut::flow::order_sign;
use kitaev_potts::pcut::*;
use kitaev_potts::qudit::{weyl_product, SparseOperator};
use kitaev_potts::series::{ratio, RationalSeries, Variable};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

#[test]
fn small_coupling_energy_through_fifth_order() {
    let s = ground_energy_series(Regime::Small, 5).unwrap();
    let expect = RationalSeries::from_ratios(
        Variable::X,
        &[(-2, 3), (0, 1), (-2, 1), (-1, 1), (-17, 2), (-847, 36)],
    );
    assert_eq!(s, expect, "got {s}");
}

#[test]
fn gap_through_third_order() {
    let amps = one_qp_amplitudes(3).unwrap();
    let g = gap_series(&amps);
    let expect = RationalSeries::from_ratios(Variable::X, &[(1, 1), (-4, 1), (-10, 1), (-5, 1)]);
    assert_eq!(g, expect, "got {g}");
}

#[test]
fn large_coupling_energy_through_fourth_order() {
    let s = ground_energy_series(Regime::Large, 4).unwrap();
    let expect = RationalSeries::from_ratios(
        Variable::H,
        &[(0, 1), (0, 1), (-1, 2), (-1, 8), (-19, 672)],
    );
    assert_eq!(s, expect, "got {s}");
}

#[test]
fn sixth_order_matches_reference_series() {
    let printed = printed_series().unwrap();
    let small = ground_energy_series(Regime::Small, 6).unwrap();
    assert_eq!(small, printed.energy_small.truncate(6));
    let large = ground_energy_series(Regime::Large, 6).unwrap();
    for k in 1..=6 {
        assert_eq!(large.coeff(k), printed.energy_large.coeff(k), "h^{k}");
    }
}

/// Weights of the printed third-order effective Hamiltonian, expanded into
/// operator sequences (T_n themselves, not T' = −xT).
fn printed_third_order() -> [BTreeMap<Vec<i8>, BigRational>; 4] {
    use Commutator as C;
    let t = C::t;
    let add = |acc: &mut BTreeMap<Vec<i8>, BigRational>, c: C, w: BigRational| {
        for (m, v) in c.expand() {
            *acc.entry(m).or_insert_with(BigRational::zero) += v * &w;
        }
    };
    let mut o1 = BTreeMap::new();
    o1.insert(vec![0], ratio(-1, 1));
    let mut o2 = BTreeMap::new();
    add(&mut o2, C::c(t(1), t(-1)), ratio(1, 1));
    add(&mut o2, C::c(t(2), t(-2)), ratio(1, 2));
    let mut o3 = BTreeMap::new();
    for (c, w) in [
        (C::c(t(2), C::c(t(0), t(-2))), ratio(-1, 8)),
        (C::c(C::c(t(2), t(0)), t(-2)), ratio(-1, 8)),
        (C::c(t(1), C::c(t(1), t(-2))), ratio(-1, 2)),
        (C::c(C::c(t(2), t(-1)), t(-1)), ratio(-1, 2)),
        (C::c(t(1), C::c(t(0), t(-1))), ratio(-1, 2)),
        (C::c(C::c(t(1), t(0)), t(-1)), ratio(-1, 2)),
    ] {
        add(&mut o3, c, w);
    }
    for o in [&mut o2, &mut o3] {
        o.retain(|_, v| !v.is_zero());
    }
    [BTreeMap::new(), o1, o2, o3]
}

#[test]
fn third_order_table_matches_printed_commutators() {
    let table = pcut_coefficients(3, 2).unwrap();
    let printed = printed_third_order();
    for k in 1..=3 {
        let engine: BTreeMap<Vec<i8>, BigRational> = table
            .order(k)
            .iter()
            .map(|(m, c)| (m.clone(), c * order_sign(k)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        assert_eq!(engine, printed[k], "order {k}");
    }
}

fn q_commutator_holds(spec: &TOperatorSpec) {
    for (&n, t) in &spec.t {
        let lhs = spec.q.commutator(t);
        let rhs = t.scale(&Cyclo::from_integer(3, n as i64));
        assert_eq!(lhs, rhs, "{:?} n={n}", spec.regime);
        assert_eq!(t.dagger(), spec.t[&-n], "{:?} n={n}", spec.regime);
    }
}

#[test]
fn block_operators_raise_q_by_their_index() {
    q_commutator_holds(&decompose_t(Regime::Small).unwrap());
    q_commutator_holds(&decompose_t(Regime::Large).unwrap());
}

#[test]
fn block_operators_sum_to_the_perturbation() {
    let sum = |spec: &TOperatorSpec| {
        let any = spec.t.values().next().unwrap();
        spec.t
            .values()
            .fold(SparseOperator::zero(any.num_sites(), 3), |a, t| a.add(t))
    };
    let zz = weyl_product(2, 3, &[(0, 0, 1), (1, 0, -1)]).unwrap();
    assert_eq!(sum(&decompose_t(Regime::Small).unwrap()), zz.add(&zz.dagger()));
    let x = weyl_product(5, 3, &[(0, 1, 0)]).unwrap();
    assert_eq!(sum(&decompose_t(Regime::Large).unwrap()), x.add(&x.dagger()));
}

#[test]
fn effective_hamiltonian_conserves_q() {
    let spec = decompose_t(Regime::Small).unwrap();
    let table = pcut_coefficients(4, 2).unwrap();
    for k in 1..=4 {
        let h = effective_hamiltonian_order(&table, &spec.t, k);
        assert!(h.commutator(&spec.q).is_zero(), "order {k}");
        assert!(h.is_hermitian(), "order {k}");
    }
    let spec = decompose_t(Regime::Large).unwrap();
    let table = pcut_coefficients(2, 4).unwrap();
    for k in 1..=2 {
        let h = effective_hamiltonian_order(&table, &spec.t, k);
        assert!(h.commutator(&spec.q).is_zero(), "large order {k}");
    }
}

#[test]
fn exclusive_weights_start_at_cluster_size() {
    let engine = Engine::new(Regime::Small, 5).unwrap();
    let clusters = enumerate_clusters(5);
    let weights = engine.bond_cluster_weights(&clusters);
    for c in &clusters {
        let w = &weights[&canonical_bonds(&c.bond_coords())];
        let b = c.bonds.len();
        for k in 0..b.min(6) {
            assert!(w.coeff(k).is_zero(), "{} bonds, order {k}: {w}", b);
        }
    }
}

#[test]
fn dispersion_minimum_at_zone_centre() {
    let amps = one_qp_amplitudes(3).unwrap();
    let omega = |k: (f64, f64), x: f64| {
        dispersion(k, &amps)
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c)
    };
    let grid: Vec<f64> = (0..32)
        .map(|i| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / 32.0)
        .collect();
    for x in [0.01, 0.03, 0.05] {
        let at_zero = omega((0.0, 0.0), x);
        for &kx in &grid {
            for &ky in &grid {
                assert!(omega((kx, ky), x) >= at_zero - 1e-12, "x={x} k=({kx},{ky})");
            }
        }
    }
}

#[test]
fn calibration_constants() {
    let small = CalibrationRecord::for_regime(Regime::Small).unperturbed_energy();
    assert_eq!((small.j, small.lambda), (ratio(-2, 1), ratio(-4, 3)));
    let large = CalibrationRecord::for_regime(Regime::Large).unperturbed_energy();
    assert_eq!((large.j, large.lambda), (ratio(0, 1), ratio(-4, 1)));
}

fn random_tree() -> impl Strategy<Value = SiteGraph> {
    (2usize..=4)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(any::<prop::sample::Index>(), n - 1)))
        .prop_map(|(n, parents)| {
            let bonds = parents
                .iter()
                .enumerate()
                .map(|(i, p)| (p.index(i + 1), i + 1))
                .collect();
            SiteGraph::new(n, bonds)
        })
}

fn disjoint_union(a: &SiteGraph, b: &SiteGraph) -> SiteGraph {
    let off = a.num_sites;
    let mut bonds = a.bonds.clone();
    bonds.extend(b.bonds.iter().map(|&(i, j)| (i + off, j + off)));
    SiteGraph::new(a.num_sites + b.num_sites, bonds)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cluster_energies_are_additive(a in random_tree(), b in random_tree()) {
        let u = disjoint_union(&a, &b);
        for regime in [Regime::Small, Regime::Large] {
            let e = Engine::new(regime, 4).unwrap();
            let sum = e.cluster_energy(&a).add(&e.cluster_energy(&b));
            prop_assert_eq!(e.cluster_energy(&u), sum, "{:?}", regime);
        }
    }
}
