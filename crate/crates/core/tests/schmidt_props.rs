mod common;

use bipartite_core::*;
use common::*;
use rand::Rng;

#[test]
fn random_states_satisfy_parseval_and_reconstruct() {
    let g = make_grid(-1.0, 1.0, 24).unwrap();
    let mut r = rng(2024);
    for _ in 0..5 {
        let psi = random_bipartite(g, &mut r);
        let d = schmidt_decompose(&psi, 0.0).unwrap();
        assert_eq!(d.rank(), 24);
        assert!((d.weight_sum() - 1.0).abs() <= 1e-10);
        assert!(d.coefficients.windows(2).all(|w| w[0] >= w[1]));
        assert!(reconstruct(&d).unwrap().distance(&psi).unwrap() <= 1e-10);
        for (i, a) in d.left_states.iter().enumerate() {
            for (j, b) in d.left_states.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((inner_product(a, b).unwrap() - expected).norm() <= 1e-10);
                let right = inner_product(&d.right_states[i], &d.right_states[j]).unwrap();
                assert!((right - expected).norm() <= 1e-10);
            }
        }
    }
}

#[test]
fn product_state_has_rank_one_and_zero_entropy() {
    let g = make_grid(-4.0, 4.0, 50).unwrap();
    let psi = BipartiteWave::outer(&packet(g, 0.5, 0.6, 1.0), &packet(g, -1.0, 0.4, 0.0)).unwrap();
    assert_eq!(schmidt_rank(&psi, 1e-10).unwrap(), 1);
    assert!(entanglement_entropy(&psi).unwrap().abs() <= 1e-10);
}

#[test]
fn schmidt_data_is_invariant_along_trajectories() {
    let h = harmonic(6.0, 40);
    let g = *h.grid();
    let a = BipartiteWave::outer(&packet(g, -1.0, 0.6, 0.0), &packet(g, 1.0, 0.6, 0.0)).unwrap();
    let b = BipartiteWave::outer(&packet(g, 1.5, 0.5, 0.5), &packet(g, -0.5, 0.5, 0.0)).unwrap();
    let c = BipartiteWave::outer(&packet(g, 0.0, 0.8, -1.0), &packet(g, 0.0, 0.3, 0.7)).unwrap();
    let psi0 = a
        .add(&b.scale(Complex64::new(0.5, 0.2)))
        .unwrap()
        .add(&c.scale(Complex64::new(0.0, 0.4)))
        .unwrap()
        .normalized();
    let mu0 = schmidt_coefficients(&psi0).unwrap();
    let s0 = entanglement_entropy(&psi0).unwrap();
    let rank0 = schmidt_rank(&psi0, 1e-8).unwrap();
    assert_eq!(rank0, 3);
    let traj =
        propagate_bipartite_direct(&h, &psi0, &PropagationConfig::new(0.02, 200, 20).unwrap())
            .unwrap();
    for state in &traj.states {
        assert!((entanglement_entropy(state).unwrap() - s0).abs() <= 1e-9);
        assert_eq!(schmidt_rank(state, 1e-8).unwrap(), rank0);
        let mu = schmidt_coefficients(state).unwrap();
        for (x, y) in mu.iter().zip(&mu0).take(rank0) {
            assert!((x - y).abs() <= 1e-9);
        }
    }
}

#[test]
fn separated_slits_in_particle_mode_have_entropy_ln2() {
    let g = make_grid(-20.0, 20.0, 400).unwrap();
    let (s1, s2) = (SlitSpec::new(-8.0, 1.0, 0.0), SlitSpec::new(8.0, 1.0, 0.0));
    let p = build_double_slit(&g, &s1, &s2, SlitMode::Particle, 1.0).unwrap();
    assert_eq!(schmidt_rank(&p, 1e-10).unwrap(), 2);
    assert!((entanglement_entropy(&p).unwrap() - 2f64.ln()).abs() <= 1e-6);
    let w = build_double_slit(&g, &s1, &s2, SlitMode::Wave, 1.0).unwrap();
    assert_eq!(schmidt_rank(&w, 1e-10).unwrap(), 1);
}

#[test]
fn rank_tolerance_outside_unit_interval_is_rejected() {
    let g = make_grid(0.0, 1.0, 4).unwrap();
    let psi = random_bipartite(g, &mut rng(1));
    assert!(schmidt_decompose(&psi, 1.0).is_err());
    assert!(schmidt_decompose(&psi, -0.1).is_err());
}

#[test]
fn term_gram_route_matches_full_svd() {
    let g = make_grid(-6.0, 6.0, 80).unwrap();
    let mut r = rng(31);
    let terms: Vec<ProductTerm> = (0..3)
        .map(|_| ProductTerm {
            weight: random_complex(&mut r),
            left: packet(g, r.gen_range(-2.0..2.0), 0.7, r.gen_range(-1.0..1.0)),
            right: packet(g, r.gen_range(-2.0..2.0), 0.5, r.gen_range(-1.0..1.0)),
        })
        .collect();
    let psi = BipartiteWave::from_terms(g, &terms).unwrap();
    let full = schmidt_coefficients(&psi).unwrap();
    let small = schmidt_coefficients_of_terms(&terms).unwrap();
    for (a, b) in small.iter().zip(&full) {
        assert!(
            (a - b).abs() <= 1e-10 * full[0],
            "{small:?} vs {:?}",
            &full[..3]
        );
    }
    assert!(full[3] <= 1e-12 * full[0]);

    // coincident slits collapse the particle state to rank one
    let s = SlitSpec::new(0.0, 1.0, 0.0);
    let mu = schmidt_coefficients_of_terms(
        &double_slit_terms(&g, &s, &s, SlitMode::Particle, 1.0).unwrap(),
    )
    .unwrap();
    assert!((mu[0] - 1.0).abs() <= 1e-12 && mu[1].abs() <= 1e-7);
}
