use kitaev_potts::ed::*;
use kitaev_potts::fixtures::ed_patch;
use kitaev_potts::lattice::*;
use kitaev_potts::pcut::{Engine, Regime};
use kitaev_potts::qudit::weyl_product;
use kitaev_potts::series::{RationalSeries, Variable};
use kitaev_potts::Error;
use proptest::prelude::*;

#[test]
fn mapping_holds_on_the_small_torus() {
    let mut energies = Vec::new();
    for (j, k, l) in [(1.0, 1.0, 0.0), (1.0, 1.0, 0.3), (1.0, 1.0, 1.0), (1.0, 5.0, 0.3)] {
        let r = verify_mapping(Couplings::new(j, k, l), 2, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
        energies.push(r.full_energy);
    }
    assert!((energies[0] + 16.0).abs() < 1e-9);
    assert_eq!(verify_mapping(Couplings::new(1.0, 1.0, 0.0), 2, 1e-9).unwrap().ground_multiplicity, 9);
    // the plaquette term is a constant in the B_p = 1 sector
    assert!((energies[3] - energies[1] + 32.0).abs() < 1e-9);
    assert!(matches!(
        verify_mapping(Couplings::new(1.0, 1.0, 0.3), 4, 1e-9),
        Err(Error::InvalidLatticeSize(4))
    ));
}

#[test]
fn topological_ground_space() {
    assert_eq!(topological_degeneracy(2, 3, 0.0, 1e-9).unwrap().count, 9);
    assert_eq!(topological_degeneracy(2, 2, 0.0, 1e-9).unwrap().count, 4);
    let split = topological_degeneracy(2, 3, 0.05, 1e-9).unwrap();
    assert!(split.count < 9);
    assert!(split.splitting > 0.0);
}

#[test]
fn patch_fixture() {
    let f = ed_patch().unwrap();
    assert_eq!(f.graph, SiteGraph::periodic_grid(2, 2));
    let h = build_mapped_hamiltonian(&f.graph, f.j, f.lambda).unwrap();
    let (e, v) = ground_state(&h, Method::Dense).unwrap();
    assert!((e - f.ground_energy).abs() < 1e-10, "{e}");
    assert!((v.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn dense_and_iterative_agree() {
    let lat = build_torus(2).unwrap();
    let g = &lat.sublattice_graphs()[0].graph;
    for graph in [SiteGraph::open_grid(2, 3), SiteGraph::periodic_grid(2, 3), g.clone()] {
        let h = build_mapped_hamiltonian(&graph, 1.0, 0.8).unwrap();
        let a = spectrum(&h, 5, Method::Dense).unwrap();
        let b = spectrum(&h, 5, Method::lanczos()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
        assert!(a.max_residual < 1e-10);
        assert!(a.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(b.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn rejects_bad_input() {
    let x = weyl_product(2, 3, &[(0, 1, 0)]).unwrap();
    assert!(matches!(ground_state(&x, Method::Dense), Err(Error::NonHermitian)));
    let big = build_mapped_hamiltonian(&SiteGraph::open_grid(3, 4), 1.0, 1.0).unwrap();
    assert!(matches!(
        ground_state(&big, Method::Dense),
        Err(Error::DimensionTooLarge { .. })
    ));
}

#[test]
fn ground_energy_is_shift_invariant() {
    // Π X̂ commutes with H, so H and S H S† share a spectrum and S maps
    // the ground space onto itself
    let g = SiteGraph::open_grid(2, 3);
    let h = build_mapped_hamiltonian(&g, 1.0, 0.6).unwrap();
    let s = weyl_product(6, 3, &(0..6).map(|i| (i, 1, 0)).collect::<Vec<_>>()).unwrap();
    let rotated = s.mul(&h).mul(&s.dagger());
    let a = ground_state(&h, Method::Dense).unwrap();
    let b = ground_state(&rotated, Method::Dense).unwrap();
    assert!((a.0 - b.0).abs() < 1e-12);
    let overlap = matrix_element(&s, &a.1, &a.1).norm();
    assert!((overlap - 1.0).abs() < 1e-9, "{overlap}");
}

#[test]
fn label_basis_operator_matches_mapped_model() {
    // H/3J = Q − 2n/3 − x(#bonds + Σ T) with J = 1/3, λ = 3x/2
    let g = SiteGraph::open_grid(2, 2);
    let x = 0.037;
    let label = lowest_eigenpairs(&small_coupling_operator(&g, x).unwrap(), 4, Method::Dense).unwrap();
    let mapped = spectrum(&build_mapped_hamiltonian(&g, 1.0 / 3.0, 1.5 * x).unwrap(), 4, Method::Dense).unwrap();
    let shift = -(g.num_sites as f64) * 2.0 / 3.0 - x * g.bonds.len() as f64;
    for (a, b) in label.eigenvalues.iter().zip(&mapped.eigenvalues) {
        assert!((a + shift - b).abs() < 1e-12, "{a} {b}");
    }
}

#[test]
fn series_error_scaling() {
    let xs = logspace(1e-3, 1e-2, 10);
    let bond = SiteGraph::new(2, vec![(0, 1)]);
    let e = Engine::new(Regime::Small, 2).unwrap();
    let fit = series_vs_ed(&bond, &e.cluster_energy(&bond), &xs).unwrap();
    assert!((fit.slope - 3.0).abs() < 0.1, "{}", fit.slope);
    let grid = SiteGraph::open_grid(2, 3);
    let e = Engine::new(Regime::Small, 4).unwrap();
    let fit = series_vs_ed(&grid, &e.cluster_energy(&grid), &xs).unwrap();
    assert!(fit.slope >= 4.7, "{}", fit.slope);
}

#[test]
fn series_and_ed_agree_at_zero() {
    let g = SiteGraph::open_grid(2, 2);
    let m = small_coupling_operator(&g, 0.0).unwrap();
    let spec = lowest_eigenpairs(&m, 1, Method::Dense).unwrap();
    assert_eq!(spec.eigenvalues[0], 0.0);
    let s = RationalSeries::zero(Variable::X, 4);
    assert!(matches!(series_vs_ed(&g, &s, &[0.0, 0.1]), Err(Error::DegenerateFit)));
    assert!(matches!(series_vs_ed(&g, &s, &[0.1]), Err(Error::DegenerateFit)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ground_energy_is_variational(j in 0.0f64..2.0, l in 0.0f64..2.0, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let g = SiteGraph::open_grid(2, 2);
        let h = build_mapped_hamiltonian(&g, j, l).unwrap();
        let m = SymmetricMatrix::from_operator(&h).unwrap();
        let (e0, _) = ground_state(&h, Method::Dense).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..m.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        prop_assert!(m.rayleigh_dd(&v).hi() >= e0 - 1e-10);
    }
}
