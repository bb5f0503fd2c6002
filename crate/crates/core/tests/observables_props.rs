mod common;

use bipartite_core::*;
use common::*;

#[test]
fn product_states_reduce_to_one_body_expectations() {
    let g = make_grid(-5.0, 5.0, 64).unwrap();
    let h = hamiltonian(g, Potential::HarmonicOscillator { omega: 1.0 });
    let observables = LinearObservable::builtin_set(&h);
    let mut r = rng(7);
    for _ in 0..20 {
        let psi = random_wave(g, &mut r);
        let phi = random_wave(g, &mut r);
        let big = BipartiteWave::outer(&psi, &phi).unwrap();
        for (name, o) in &observables {
            let lhs = expectation(&big, o).unwrap();
            let rhs = o.one_body_expectation(&psi).unwrap();
            assert!(rhs.im.abs() <= 1e-10, "{name}");
            assert!(
                (lhs - rhs.re).abs() <= 1e-10 * rhs.re.abs().max(1.0),
                "{name}: {lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn entangled_states_report_unit_trace_norm() {
    let g = make_grid(-3.0, 3.0, 30).unwrap();
    let psi = random_bipartite(g, &mut rng(99));
    let report = expectation_report(&psi, &LinearObservable::Position).unwrap();
    assert!((report.trace_norm - 1.0).abs() <= 1e-12);
    assert!((report.raw - report.renormalized).abs() <= 1e-12);
}

#[test]
fn position_density_integrates_to_one_and_gives_mean_position() {
    let g = make_grid(-3.0, 3.0, 30).unwrap();
    let psi = random_bipartite(g, &mut rng(3));
    let density = position_density(&psi).unwrap();
    let dx = g.dx();
    assert!((dx * density.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    let mean: f64 = dx
        * density
            .iter()
            .zip(g.positions())
            .map(|(d, x)| d * x)
            .sum::<f64>();
    assert!((mean - expectation(&psi, &LinearObservable::Position).unwrap()).abs() <= 1e-10);
}

#[test]
fn unnormalized_input_is_rejected() {
    let g = make_grid(-1.0, 1.0, 8).unwrap();
    let psi = random_bipartite(g, &mut rng(4)).scale(Complex64::new(2.0, 0.0));
    assert!(matches!(
        position_density(&psi),
        Err(Error::NotNormalized { .. })
    ));
}

fn check_relative(density: &[f64], expected: &[f64]) {
    let total: f64 = expected.iter().sum();
    let target_total: f64 = density.iter().sum();
    for (d, e) in density.iter().zip(expected) {
        let e = e * target_total / total;
        if *d > 1e-12 {
            assert!(((d - e) / d).abs() <= 1e-9, "{d} vs {e}");
        }
    }
}

#[test]
fn static_double_slit_densities_match_closed_forms() {
    let g = make_grid(-20.0, 20.0, 500).unwrap();
    let (s1, s2) = (SlitSpec::new(-4.0, 1.5, 2.0), SlitSpec::new(4.0, 1.5, -2.0));
    let f1 = s1.wave_function(&g, 1.0).unwrap();
    let f2 = s2.wave_function(&g, 1.0).unwrap();

    let wave = build_double_slit(&g, &s1, &s2, SlitMode::Wave, 1.0).unwrap();
    let sum: Vec<f64> = f1
        .values()
        .iter()
        .zip(f2.values().iter())
        .map(|(a, b)| (a + b).norm_sqr())
        .collect();
    check_relative(&position_density(&wave).unwrap(), &sum);

    let particle = build_double_slit(&g, &s1, &s2, SlitMode::Particle, 1.0).unwrap();
    let mix: Vec<f64> = f1
        .values()
        .iter()
        .zip(f2.values().iter())
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .collect();
    check_relative(&position_density(&particle).unwrap(), &mix);

    let closed = SlitSpec {
        amplitude: 0.0,
        ..s2
    };
    let single = build_double_slit(&g, &s1, &closed, SlitMode::Wave, 1.0).unwrap();
    let one: Vec<f64> = f1.values().iter().map(|a| a.norm_sqr()).collect();
    check_relative(&position_density(&single).unwrap(), &one);
}

#[test]
fn overlapping_slits_deviate_from_mixture_within_bound() {
    let g = make_grid(-10.0, 10.0, 400).unwrap();
    for sep in [0.5, 1.0, 2.0, 3.0] {
        let (s1, s2) = (SlitSpec::new(-sep, 1.0, 0.0), SlitSpec::new(sep, 1.0, 0.0));
        let f1 = s1.wave_function(&g, 1.0).unwrap();
        let f2 = s2.wave_function(&g, 1.0).unwrap();
        let overlap = inner_product(&f1, &f2).unwrap().norm();
        let density =
            position_density(&build_double_slit(&g, &s1, &s2, SlitMode::Particle, 1.0).unwrap())
                .unwrap();
        let deviation: f64 = g.dx()
            * density
                .iter()
                .zip(f1.values().iter().zip(f2.values().iter()))
                .map(|(d, (a, b))| (d - 0.5 * (a.norm_sqr() + b.norm_sqr())).abs())
                .sum::<f64>();
        assert!(
            deviation <= 2.0 * overlap + 1e-12,
            "sep {sep}: {deviation} > 2·{overlap}"
        );
    }
}

#[test]
fn visibility_of_cosine_fringes_is_one() {
    let g = make_grid(0.0, 10.0, 1999).unwrap();
    let density: Vec<f64> = g
        .positions()
        .iter()
        .map(|x| (std::f64::consts::PI * x).cos().powi(2))
        .collect();
    let v = fringe_visibility(&g, &density, (0.1, 9.9)).unwrap();
    assert!((v - 1.0).abs() <= 1e-9);
    let flat = vec![1.0; g.n_points()];
    assert!(matches!(
        fringe_visibility(&g, &flat, (0.1, 9.9)),
        Err(Error::TooFewExtrema { .. })
    ));
}

#[test]
fn rho_acts_as_weighted_kernel() {
    let g = make_grid(-2.0, 2.0, 16).unwrap();
    let mut r = rng(8);
    let (psi, phi, chi) = (
        random_wave(g, &mut r),
        random_wave(g, &mut r),
        random_wave(g, &mut r),
    );
    // ϱ for ψφ* maps χ to ψ⟨φ, χ⟩
    let rho = rho_of(&BipartiteWave::outer(&psi, &phi).unwrap());
    let out = rho.apply(&chi).unwrap();
    let expected = psi.scale(inner_product(&phi, &chi).unwrap());
    assert!(
        out.add(&expected.scale(Complex64::new(-1.0, 0.0)))
            .unwrap()
            .norm()
            <= 1e-12
    );
}
