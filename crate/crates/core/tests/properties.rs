use proptest::prelude::*;
use purify::dynamics::{bloch_closed_form, evolve_modes, evolve_nojump_ode, uniform_grid, BlochVector};
use purify::model::{
    apply_generator, build_h_eff, build_liouvillian, dicke_transform, make_initial_state, swap_operator,
    unvectorize, vectorize, DensityMatrix, InitialStateSpec, SystemSpec,
};
use purify::multiqubit::{multiqubit_spectrum, normalized_linear_entropy_series};
use purify::numkernel::{eig_general, eigh, inner, ComplexMatrix, OdeTolerances, C64};
use purify::observables::{
    concurrence, concurrence_direct, hs_distance_sq, linear_entropy, overlap, purity,
};
use purify::spectral::{
    cardano_symmetric_eigs, critical_drive, dissipative_gap, mode_overlaps, symmetric_cubic, ModeSpectrum,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_state(seed: u64, n: usize) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_matrix(&mut rng, n);
    DensityMatrix::renormalized(&(&g * &g.adjoint())).unwrap()
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n);
    let (w, v) = eigh(&g.hermitian_part());
    let phases: Vec<C64> = w.iter().map(|x| C64::from_polar(1.0, *x)).collect();
    &(&v * &ComplexMatrix::diagonal(&phases)) * &v.adjoint()
}

fn product(p: f64, n: usize) -> DensityMatrix {
    make_initial_state(&InitialStateSpec::DiagonalProduct { p }, n).unwrap()
}

fn hs(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.matrix() - b.matrix()).frobenius_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eig_residual_and_biorthonormality(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n);
        let dec = eig_general(&a, 1e-10).unwrap();
        prop_assume!(!dec.defect_flag);
        let scale = a.frobenius_norm();
        for k in 0..n {
            let r = dec.right.column(k);
            let ar = a.matvec(&r).unwrap();
            let res: f64 = ar.iter().zip(&r).map(|(x, y)| (x - dec.eigenvalues[k] * y).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(res / scale < 1e-10);
        }
        prop_assert!(dec.biorthogonality_error() < 1e-9);
    }

    #[test]
    fn hermitian_input_gives_real_spectrum(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_matrix(&mut rng, n).hermitian_part();
        let dec = eig_general(&h, 1e-10).unwrap();
        for z in &dec.eigenvalues {
            prop_assert!(z.im.abs() < 1e-10);
        }
        for k in 0..n {
            let r = dec.right.column(k);
            let l = dec.left.column(k);
            let c = inner(&l, &r).norm() / (inner(&l, &l).norm().sqrt() * inner(&r, &r).norm().sqrt());
            prop_assert!((c - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn liouvillian_matches_direct_action(seed in any::<u64>(), omega in 0.0..4.0f64, eta in 0.0..1.0f64,
                                         gf in 0.0..2.0f64, delta in -1.0..1.0f64, n in 1usize..3) {
        let spec = SystemSpec::driven(n, omega, eta, 6.0).unwrap().with_gamma_f(gf).with_delta(delta);
        let rho = random_state(seed, spec.dim());
        let gen = build_liouvillian(&spec, true).unwrap();
        let via = unvectorize(&gen.matvec(&vectorize(rho.matrix())).unwrap(), spec.dim()).unwrap();
        let direct = apply_generator(&spec, rho.matrix(), true).unwrap();
        prop_assert!(via.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn decay_part_is_dissipative(omega in 0.0..4.0f64, eta in 0.0..1.0f64, gf in 0.0..2.0f64, n in 1usize..5) {
        let spec = SystemSpec::driven(n, omega, eta, 6.0).unwrap().with_gamma_f(gf);
        let h = build_h_eff(&spec).unwrap();
        let anti = (&h - &h.adjoint()).scale(C64::new(0.0, 0.5));
        let (w, _) = eigh(&anti);
        prop_assert!(w.iter().all(|x| *x >= -1e-12));
    }

    #[test]
    fn uniform_spectra_are_permutation_invariant(omega in 0.0..4.0f64, eta in 0.0..1.0f64, j in -1.0..1.0f64) {
        let spec = SystemSpec::driven(3, omega, eta, 6.0).unwrap().with_j(j);
        let h = build_h_eff(&spec).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let p = swap_operator(3, a, b);
            prop_assert!((&p * &h).max_abs_diff(&(&h * &p)) < 1e-12);
        }
        let mq = multiqubit_spectrum(&spec).unwrap();
        let swapped = &(&swap_operator(3, 0, 2) * &h) * &swap_operator(3, 0, 2);
        let other = eig_general(&swapped, 1e-7).unwrap();
        for z in mq.ms.eigenvalues() {
            let best = other.eigenvalues.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-9);
        }
    }

    #[test]
    fn dicke_transform_is_block_diagonal(omega in 0.0..4.0f64, eta in 0.0..1.0f64, j in -1.0..1.0f64, d in -1.0..1.0f64) {
        let spec = SystemSpec::driven(2, omega, eta, 6.0).unwrap().with_j(j).with_delta(d);
        let b = dicke_transform(&build_h_eff(&spec).unwrap()).unwrap();
        for k in 0..3 {
            prop_assert!(b[(k, 3)].norm() < 1e-14 && b[(3, k)].norm() < 1e-14);
        }
    }

    #[test]
    fn initial_states_are_valid(p in 0.0..=1.0f64, n in 1usize..5) {
        let rho = product(p, n);
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let (w, _) = eigh(rho.matrix());
        prop_assert!(w.iter().all(|x| *x >= -1e-12));
    }

    #[test]
    fn cardano_matches_numeric_block(omega in 0.0..4.0f64, eta in 0.0..1.0f64) {
        let spec = SystemSpec::driven(2, omega, eta, 6.0).unwrap();
        let (_, _, disc) = symmetric_cubic(&spec);
        prop_assume!(disc.norm() > 1e-6 * 6f64.powi(6));
        let roots = cardano_symmetric_eigs(&spec).unwrap();
        let block = dicke_transform(&build_h_eff(&spec).unwrap()).unwrap().block(0, 0, 3, 3);
        let numeric = eig_general(&block, 1e-12).unwrap();
        for z in &roots {
            let best = numeric.eigenvalues.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best <= 1e-9 * 6.0);
        }
    }

    #[test]
    fn overlap_sum_rule_and_sector_orthogonality(seed in any::<u64>(), omega in 0.0..4.0f64, eta in 0.0..1.0f64, p in 0.0..=1.0f64) {
        let spec = SystemSpec::driven(2, omega, eta, 6.0).unwrap();
        let ms = ModeSpectrum::compute(&spec).unwrap();
        prop_assume!(!ms.is_defective());
        let ov = mode_overlaps(&ms, &random_state(seed, 4)).unwrap();
        prop_assert!((ov.trace().re - 1.0).abs() < 1e-10 && ov.trace().im.abs() < 1e-10);
        let sym = mode_overlaps(&ms, &product(p, 2)).unwrap();
        let (_, a) = ms.subradiant_pair().unwrap();
        for k in (0..4).filter(|k| *k != a) {
            prop_assert!(sym.c[(a, k)].norm() <= 1e-12 && sym.c[(k, a)].norm() <= 1e-12);
        }
    }

    #[test]
    fn hs_distance_three_term_identity(s1 in any::<u64>(), s2 in any::<u64>(), n in 1usize..4) {
        let (a, b) = (random_state(s1, 1 << n), random_state(s2, 1 << n));
        let lhs = hs_distance_sq(&a, &b).unwrap();
        let rhs = purity(&a) + purity(&b) - 2.0 * overlap(&a, &b).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
        prop_assert!(lhs >= 0.0);
        prop_assert_eq!(linear_entropy(&a) + purity(&a), 1.0);
        prop_assert!(purity(&a) >= 1.0 / (1 << n) as f64 - 1e-10 && purity(&a) <= 1.0 + 1e-10);
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_state(seed ^ 0x5eed, 4);
        let u = random_unitary(&mut rng, 2).kron(&random_unitary(&mut rng, 2));
        let rotated = DensityMatrix::renormalized(&(&(&u * rho.matrix()) * &u.adjoint())).unwrap();
        let c = concurrence(&rho).unwrap();
        prop_assert!((c - concurrence(&rotated).unwrap()).abs() < 1e-9);
        prop_assert!((c - concurrence_direct(&rho).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn single_qubit_bloch_stays_in_plane(p in 0.0..=1.0f64, omega in 0.0..1.5f64, t in 0.0..20.0f64) {
        let spec = SystemSpec::driven(1, omega, 0.0, 6.0).unwrap();
        let b = bloch_closed_form(p, &spec, t).unwrap();
        prop_assert!(b.x == 0.0 && b.r <= 1.0 + 1e-10);
        let ms = ModeSpectrum::compute(&spec).unwrap();
        prop_assume!(!ms.is_defective());
        let s = evolve_modes(&ms, &product(p, 1), &[t]).unwrap();
        let v = BlochVector::from_state(&s.states[0]).unwrap();
        prop_assert!(v.x.abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mode_sum_and_ode_agree(omega in 0.0..4.0f64, eta in 0.0..1.0f64, p in 0.0..=1.0f64, j in -0.5..0.5f64) {
        let spec = SystemSpec::driven(2, omega, eta, 6.0).unwrap().with_j(j);
        let ms = ModeSpectrum::compute(&spec).unwrap();
        prop_assume!(!ms.is_defective() && ms.eig.condition < 1e4);
        let grid = uniform_grid(100.0 / 6.0, 101).unwrap();
        let a = evolve_modes(&ms, &product(p, 2), &grid).unwrap();
        let b = evolve_nojump_ode(&spec, &product(p, 2), &grid, OdeTolerances::default()).unwrap();
        let worst = a.states.iter().zip(&b.states).map(|(x, y)| hs(x, y)).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-6, "{}", worst);
    }

    #[test]
    fn normalized_entropy_is_bounded(seed in any::<u64>(), omega in 0.0..3.0f64, eta in 0.0..1.0f64) {
        let spec = SystemSpec::driven(3, omega, eta, 6.0).unwrap();
        let s = normalized_linear_entropy_series(&spec, &random_state(seed, 8), &uniform_grid(3.0, 31).unwrap(),
                                                 OdeTolerances::default()).unwrap();
        prop_assert!(s.iter().all(|v| *v >= -1e-10 && *v <= 1.0 + 1e-10));
    }
}

#[test]
fn gap_closes_at_critical_drive() {
    for eta in [0.0, 0.1, 0.5, 0.9] {
        let spec = SystemSpec::driven(2, critical_drive(eta, 6.0), eta, 6.0).unwrap();
        let gap = dissipative_gap(&ModeSpectrum::compute(&spec).unwrap()).unwrap();
        assert!(gap <= 1e-8 * 6.0, "η {eta}: {gap}");
    }
}

#[test]
fn integrator_error_shrinks_with_tolerance() {
    // Undriven single qubit: ρ_ee/ρ_ff = e^{−γ_e t}(1−p)/p exactly.
    let spec = SystemSpec::driven(1, 0.0, 0.0, 6.0).unwrap();
    let t: f64 = 1.3;
    let exact = (-6.0 * t).exp() * 0.7 / 0.3;
    let mut last = f64::INFINITY;
    for rel in [1e-4, 1e-6, 1e-8, 1e-10] {
        let tol = OdeTolerances { rel, abs: rel * 1e-2 };
        let s = evolve_nojump_ode(&spec, &product(0.3, 1), &[t], tol).unwrap();
        let err = (s.states[0].get(1, 1).re / s.states[0].get(0, 0).re - exact).abs();
        assert!(err <= last, "{rel}: {err} > {last}");
        last = err;
    }
    assert!(last < 1e-9);
}
