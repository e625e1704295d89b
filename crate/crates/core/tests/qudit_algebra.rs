use kitaev_potts::cyclo::Cyclo;
use kitaev_potts::lattice::{build_torus, stabilizers, string_operators};
use kitaev_potts::qudit::{generalized_pauli, weyl_product, LocalOp, PauliKind, SparseOperator};
use proptest::prelude::*;

fn product(ops: &[SparseOperator]) -> SparseOperator {
    ops.iter()
        .skip(1)
        .fold(ops[0].clone(), |acc, op| acc.mul(op))
}

#[test]
fn paulis_have_order_d() {
    for d in 2..=7 {
        for kind in [PauliKind::X, PauliKind::Z] {
            let s = generalized_pauli(kind, d).unwrap();
            assert_eq!(s.pow(d), LocalOp::identity(d));
            for k in 1..d {
                assert_ne!(s.pow(k), LocalOp::identity(d), "d={d} k={k}");
            }
        }
    }
}

#[test]
fn stabilizers_commute_and_multiply_to_identity() {
    for d in [2, 3] {
        let lat = build_torus(2).unwrap();
        let n = lat.num_edges();
        let (stars, plaquettes) = stabilizers(&lat, d).unwrap();
        let all: Vec<&SparseOperator> = stars.iter().chain(&plaquettes).collect();
        for a in &all {
            for b in &all {
                assert!(a.commutator(b).is_zero());
            }
            assert_eq!(a.pow(d), SparseOperator::identity(n, d));
        }
        assert_eq!(product(&stars), SparseOperator::identity(n, d));
        assert_eq!(product(&plaquettes), SparseOperator::identity(n, d));
    }
}

#[test]
fn stabilizers_commute_on_larger_torus() {
    let lat = build_torus(4).unwrap();
    let (stars, plaquettes) = stabilizers(&lat, 3).unwrap();
    for a in &stars {
        for b in &plaquettes {
            assert!(a.commutator(b).is_zero());
        }
    }
}

#[test]
fn string_operators_are_logical() {
    let d = 3;
    let lat = build_torus(2).unwrap();
    let (stars, plaquettes) = stabilizers(&lat, d).unwrap();
    let s = string_operators(&lat, d).unwrap();
    for t in [&s.tz1, &s.tz2, &s.tx1, &s.tx2] {
        for a in stars.iter().chain(&plaquettes) {
            assert!(t.commutator(a).is_zero());
        }
    }
    // each conjugate pair shares one edge and picks up a single phase
    let w = Cyclo::omega_pow(d, 1);
    for (z, x) in [(&s.tz1, &s.tx1), (&s.tz2, &s.tx2)] {
        let zx = z.mul(x);
        let xz = x.mul(z);
        assert!(zx == xz.scale(&w) || xz == zx.scale(&w));
    }
    assert!(s.tz1.commutator(&s.tx2).is_zero());
    assert!(s.tz2.commutator(&s.tx1).is_zero());
}

fn weyl_string() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((0i64..5, 0i64..5), 3)
}

proptest! {
    #[test]
    fn weyl_strings_commute_up_to_symplectic_phase(d in 2u32..=5, a in weyl_string(), b in weyl_string()) {
        let build = |s: &[(i64, i64)]| {
            let f: Vec<_> = s.iter().enumerate().map(|(i, &(x, z))| (i, x, z)).collect();
            weyl_product(3, d, &f).unwrap()
        };
        let (oa, ob) = (build(&a), build(&b));
        // X^a Z^b · X^c Z^e = ω^{bc − ea} X^c Z^e · X^a Z^b
        let phase: i64 = a.iter().zip(&b).map(|(&(x1, z1), &(x2, z2))| z1 * x2 - z2 * x1).sum();
        prop_assert_eq!(oa.mul(&ob), ob.mul(&oa).scale(&Cyclo::omega_pow(d, phase)));
    }

    #[test]
    fn adjoint_reverses_products(d in 2u32..=4, a in weyl_string(), b in weyl_string(), ca in -3i64..=3, cb in -3i64..=3) {
        let build = |s: &[(i64, i64)], c: i64| {
            let f: Vec<_> = s.iter().enumerate().map(|(i, &(x, z))| (i, x, z)).collect();
            weyl_product(3, d, &f).unwrap().scale(&Cyclo::omega_pow(d, c))
        };
        let (oa, ob) = (build(&a, ca), build(&b, cb));
        prop_assert_eq!(oa.mul(&ob).dagger(), ob.dagger().mul(&oa.dagger()));
        let h = oa.add(&oa.dagger());
        prop_assert!(h.is_hermitian());
    }
}
