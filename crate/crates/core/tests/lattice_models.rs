use kitaev_potts::cyclo::Cyclo;
use kitaev_potts::lattice::*;
use kitaev_potts::qudit::{weyl_product, SparseOperator};
use proptest::prelude::*;

fn diagonal_value(op: &SparseOperator, index: usize) -> f64 {
    let img = op.apply_basis(index);
    assert!(img.iter().all(|(i, _)| *i == index), "not diagonal");
    img.iter().map(|(_, c)| c.to_c64().re).sum()
}

#[test]
fn potts_term_commutes_with_plaquettes_and_z_strings() {
    let lat = build_torus(2).unwrap();
    let h = build_full_hamiltonian(&lat, 3, &Couplings::new(1.0, 1.0, 0.5)).unwrap();
    let (stars, plaquettes) = stabilizers(&lat, 3).unwrap();
    for b in &plaquettes {
        assert!(h.commutator(b).is_zero());
    }
    let s = string_operators(&lat, 3).unwrap();
    assert!(h.commutator(&s.tz1).is_zero());
    assert!(h.commutator(&s.tz2).is_zero());
    // the Potts term is what breaks the vertex symmetry
    assert!(!potts_hamiltonian(&lat, 3).unwrap().commutator(&stars[0]).is_zero());
}

#[test]
fn four_corner_pairs_per_vertex() {
    let lat = build_torus(4).unwrap();
    let pairs = lat.corner_pairs();
    assert_eq!(pairs.len(), 4 * lat.num_vertices());
    // every diagonal sublattice bond is hit by exactly two corners
    let mut hits = std::collections::HashMap::new();
    for cp in &pairs {
        let (u, v) = cp.mapped_bond(&lat);
        *hits.entry((u.min(v), u.max(v))).or_insert(0) += 1;
    }
    assert_eq!(hits.len(), 2 * lat.num_vertices());
    assert!(hits.values().all(|&c| c == 2));
}

#[test]
fn mapped_bond_is_minus_two_lambda_when_aligned() {
    let g = SiteGraph::new(2, vec![(0, 1)]);
    let h = build_mapped_hamiltonian(&g, 0.0, 1.5).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            let e = diagonal_value(&h, a + 3 * b);
            let expect = if a == b { -3.0 } else { 0.0 };
            assert!((e - expect).abs() < 1e-12, "({a},{b}) -> {e}");
        }
    }
}

#[test]
fn mapped_model_has_global_shift_symmetry() {
    let g = SiteGraph::open_grid(2, 3);
    let h = build_mapped_hamiltonian(&g, 0.7, 1.3).unwrap();
    let shift: Vec<_> = (0..6).map(|i| (i, 1, 0)).collect();
    let s = weyl_product(6, 3, &shift).unwrap();
    assert!(h.commutator(&s).is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn assembled_hamiltonians_are_hermitian(j in -2.0f64..2.0, k in -2.0f64..2.0, l in -2.0f64..2.0, d in 2u32..=3) {
        let lat = build_torus(2).unwrap();
        let h = build_full_hamiltonian(&lat, d, &Couplings::new(j, k, l)).unwrap();
        prop_assert!(h.is_hermitian());
        let g = &lat.sublattice_graphs()[0].graph;
        prop_assert!(build_mapped_hamiltonian(g, j, l).unwrap().is_hermitian());
    }

    // The Potts term is diagonal on the vertex-label states and counts the
    // aligned sublattice bonds: −λ per aligned corner pair.
    #[test]
    fn potts_energy_of_label_states(r in prop::collection::vec(0u32..3, 16)) {
        let lat = build_torus(4).unwrap();
        let potts = potts_hamiltonian(&lat, 3).unwrap();
        let e = diagonal_value(&potts, lat.label_state_index(&r, 3));
        let aligned = lat
            .corner_pairs()
            .iter()
            .filter(|cp| {
                let (u, v) = cp.mapped_bond(&lat);
                r[u] == r[v]
            })
            .count();
        prop_assert!((e + aligned as f64).abs() < 1e-9, "{} vs {}", e, aligned);
    }

    #[test]
    fn kitaev_vacuum_energy(j in 0.1f64..2.0, k in 0.1f64..2.0) {
        // |0…0⟩ has B_p = 1 everywhere; the star term averages to zero on it
        let lat = build_torus(2).unwrap();
        let h = kitaev_hamiltonian(&lat, 3, j, k).unwrap();
        let img = h.apply_basis(0);
        let diag: Cyclo = img
            .iter()
            .filter(|(i, _)| *i == 0)
            .fold(Cyclo::zero(3), |acc, (_, c)| acc + c.clone());
        prop_assert!((diag.to_c64().re + 8.0 * k).abs() < 1e-9);
    }
}
