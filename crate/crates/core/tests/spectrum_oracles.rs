mod common;

use std::f64::consts::PI;

use bipartite_core::spectrum::{expand_in_product_basis, resum_product_basis};
use bipartite_core::*;
use common::*;
use nalgebra::DMatrix;

#[test]
fn box_levels_follow_infinite_well() {
    let g = make_grid(-0.5, 1.5, 400).unwrap();
    let l = g.x_max() - g.x_min();
    let es = eigensolve(&hamiltonian(g, Potential::Box), Levels::Lowest(5)).unwrap();
    for (i, e) in es.energies().iter().enumerate() {
        let n = (i + 1) as f64;
        let exact = n * n * PI * PI / (2.0 * l * l);
        assert!(
            ((e - exact) / exact).abs() < 0.01,
            "level {n}: {e} vs {exact}"
        );
    }
}

#[test]
fn harmonic_levels_follow_half_integers() {
    let es = eigensolve(&harmonic(10.0, 400), Levels::Lowest(4)).unwrap();
    let e = es.energies();
    assert!((e[0] - 0.5).abs() < 1e-3);
    assert!((e[1] - 1.5).abs() < 1e-3);
    // positive distinct gaps of the lowest four levels sit near 1, 2, 3
    let gaps = gap_spectrum_pairwise(&es, Some(1e-2)).unwrap();
    let positive: Vec<f64> = gaps.positive_clusters().iter().map(|c| c.lambda).collect();
    assert_eq!(positive.len(), 3);
    for (g, expected) in positive.iter().zip([1.0, 2.0, 3.0]) {
        assert!((g - expected).abs() < 1e-2 * expected, "{g} vs {expected}");
    }
}

#[test]
fn eigenpairs_match_dense_diagonalization() {
    let g = make_grid(-4.0, 4.0, 48).unwrap();
    let h = hamiltonian(
        g,
        Potential::DoubleWell {
            barrier_height: 3.0,
            well_separation: 3.0,
        },
    );
    let es = eigensolve(&h, Levels::All).unwrap();
    let mut dense: Vec<f64> = h
        .to_dense()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    dense.sort_by(f64::total_cmp);
    for (a, b) in es.energies().iter().zip(&dense) {
        assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
    }
    for (e, psi) in es.energies().iter().zip(es.states()) {
        let hpsi = apply_hamiltonian(&h, psi).unwrap();
        let res = hpsi
            .add(&psi.scale(Complex64::new(-e, 0.0)))
            .unwrap()
            .norm();
        assert!(res <= 1e-10 * e.abs().max(1.0));
    }
    let ground = &es.states()[0];
    assert!((inner_product(ground, ground).unwrap().re - 1.0).abs() < 1e-12);
}

/// The direct Kronecker spectrum equals the pairwise level differences for
/// every potential and size.
#[test]
fn gap_operator_identity_over_potential_zoo() {
    for n in [4, 8, 16, 32] {
        let g = make_grid(-6.0, 6.0, n).unwrap();
        for (name, p) in Potential::builtin_set(&g) {
            let h = hamiltonian(g, p);
            let direct = gap_spectrum_direct(&h, DirectOptions::default()).unwrap();
            let es = eigensolve(&h, Levels::All).unwrap();
            let pairwise = gap_spectrum_pairwise(&es, None).unwrap();
            let report = match_spectra(&direct, &pairwise, 1e-8);
            assert!(report.matched, "{name} N={n}: {report:?}");

            assert_eq!(direct.len(), n * n);
            assert_eq!(direct.total_multiplicity(), n * n);
            assert!(direct.antisymmetry_defect() < 1e-10, "{name} N={n}");
            assert!(pairwise.clusters_antisymmetric(pairwise.cluster_tol));
            assert!(pairwise.zero_multiplicity() >= n);
            assert!(direct.trace().abs() < 1e-8 * (n * n) as f64);
        }
    }
}

#[test]
fn box_sixteen_matches_pairwise_oracle() {
    let g = make_grid(0.0, 1.0, 16).unwrap();
    let h = hamiltonian(g, Potential::Box);
    let direct = gap_spectrum_direct(&h, DirectOptions::default()).unwrap();
    let es = eigensolve(&h, Levels::All).unwrap();
    // oracle: brute-force ordered differences from the dense eigenvalues
    let mut levels: Vec<f64> = h
        .to_dense()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    levels.sort_by(f64::total_cmp);
    let mut oracle: Vec<f64> = levels
        .iter()
        .flat_map(|a| levels.iter().map(move |b| a - b))
        .collect();
    oracle.sort_by(f64::total_cmp);
    for (d, o) in direct.gaps.iter().zip(&oracle) {
        assert!((d - o).abs() < 1e-9);
    }
    let pairwise = gap_spectrum_pairwise(&es, None).unwrap();
    let labels = spectrum::attribute_by_value(&direct, &pairwise, 1e-8);
    assert!(labels.iter().all(Option::is_some));
    for (gap, label) in direct.gaps.iter().zip(&labels) {
        let (n, m) = label.unwrap();
        assert!((gap - (es.energies()[n] - es.energies()[m])).abs() < 1e-8);
    }
}

#[test]
fn attributed_pairs_are_gap_eigenvectors() {
    let h = harmonic(6.0, 24);
    let es = eigensolve(&h, Levels::All).unwrap();
    let spectrum = gap_spectrum_pairwise(&es, None).unwrap();
    for &(n, m) in spectrum.attributions.as_ref().unwrap() {
        let psi = stationary_bipartite(&es, n, m).unwrap();
        let k_psi = gap_operator_apply(&h, &psi).unwrap();
        let lambda = es.energies()[n] - es.energies()[m];
        let residual = k_psi
            .sub(&psi.scale(Complex64::new(lambda, 0.0)))
            .unwrap()
            .norm();
        let scale = es.energies()[n].abs().max(es.energies()[m].abs());
        assert!(residual <= 1e-8 * scale, "({n}, {m}) residual {residual}");
    }
}

#[test]
fn gap_operator_matches_explicit_kronecker_matrix() {
    let g = make_grid(-2.0, 2.0, 7).unwrap();
    let h = hamiltonian(g, Potential::HarmonicOscillator { omega: 1.3 });
    let mut r = rng(11);
    let psi = random_bipartite(g, &mut r);
    let fast = gap_operator_apply(&h, &psi).unwrap();
    // vec(Ψ) is column-major: index i + N j for Ψ(xᵢ, yⱼ)
    let k = spectrum::gap_operator_dense(&h).map(|v| Complex64::new(v, 0.0));
    let v = nalgebra::DVector::from_column_slice(psi.amplitudes().as_slice());
    let slow = DMatrix::from_column_slice(7, 7, (k * v).as_slice());
    assert!((fast.amplitudes() - slow).camax() < 1e-12);
    assert_eq!(
        gap_operator_apply(&h, &BipartiteWave::zeros(g)).unwrap(),
        BipartiteWave::zeros(g)
    );
}

#[test]
fn zero_gap_states_are_annihilated() {
    let h = harmonic(6.0, 30);
    let es = eigensolve(&h, Levels::Lowest(4)).unwrap();
    for n in 0..4 {
        let psi = stationary_bipartite(&es, n, n).unwrap();
        let out = gap_operator_apply(&h, &psi).unwrap();
        assert!(out.norm() <= 1e-8 * es.energies()[n].abs());
    }
}

#[test]
fn product_basis_is_complete() {
    let g = make_grid(-3.0, 3.0, 20).unwrap();
    let h = hamiltonian(
        g,
        Potential::DoubleWell {
            barrier_height: 1.0,
            well_separation: 2.0,
        },
    );
    let es = eigensolve(&h, Levels::All).unwrap();
    let mut r = rng(5);
    for _ in 0..3 {
        let psi = random_bipartite(g, &mut r);
        let c = expand_in_product_basis(&es, &psi).unwrap();
        let weight: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        assert!((weight - 1.0).abs() < 1e-10);
        let back = resum_product_basis(&es, &c).unwrap();
        assert!(back.distance(&psi).unwrap() < 1e-10);
    }
}

#[test]
fn match_report_serializes_with_spec_fields() {
    let h = harmonic(5.0, 6);
    let es = eigensolve(&h, Levels::All).unwrap();
    let a = gap_spectrum_pairwise(&es, None).unwrap();
    let b = gap_spectrum_direct(&h, DirectOptions::default()).unwrap();
    let report = match_spectra(&a, &b, 1e-8);
    let json: serde_json::Value = serde_json::to_value(&report).unwrap();
    assert_eq!(json["matched"], true);
    assert!(json["residuals_a"].as_array().unwrap().is_empty());
    let exact = match_spectra(&a, &b, 0.0);
    assert!(!exact.matched || exact.max_abs_deviation == 0.0);
}
