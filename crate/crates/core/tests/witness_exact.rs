mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use common::*;
use num_traits::ToPrimitive;
use nonclassical::analysis::{onset_exact, sweep, DEFAULT_TOL_NEG};
use nonclassical::moments::{MomentSource, RadialMomentSet};
use nonclassical::significance::{optimize_significance, SignificanceObjective, SignificanceOptions};
use nonclassical::states::{oracle_radial_moments, wigner_radial};
use nonclassical::witness::*;
use nonclassical::{Error, StateSpec};

fn oracle(state: StateSpec, k: usize) -> RadialMomentSet {
    oracle_radial_moments(&state, k).unwrap()
}

fn fock(eta: f64, k: usize) -> RadialMomentSet {
    oracle(StateSpec::fock_mixture(eta).unwrap(), k)
}

#[test]
fn single_photon_order_four_by_hand() {
    let w = optimize_witness(&fock(1.0, 4), 4, SolverOptions::default()).unwrap();
    assert!(rel(w.min_f, -7.0 / 99.0) < 1e-10, "{}", w.min_f);
    let c = w.witness.coeffs();
    assert!(rel(c[0], -19.0 / 33.0) < 1e-10);
    assert!(rel(c[1], 13.0 / 198.0) < 1e-10);
    assert!(w.bounded);

    let (exact_c, exact_min) = exact_min_f(&fock_moments(1, 1, 4), 4);
    assert_eq!(exact_min, rat(-7, 99));
    assert_eq!(exact_c, vec![rat(-19, 33), rat(13, 198)]);
}

#[test]
fn single_photon_order_two() {
    let w = optimize_witness(&fock(1.0, 2), 2, SolverOptions::default()).unwrap();
    assert!(rel(w.min_f, 0.1) < 1e-12);
    assert!(rel(w.witness.coeffs()[0], -0.3) < 1e-12);
}

/// Solver against fraction-exact elimination for a spread of states.
#[test]
fn min_f_matches_exact_rational_solution() {
    let cases = [
        (StateSpec::fock_mixture(1.0).unwrap(), fock_moments(1, 1, 20)),
        (StateSpec::fock_mixture(0.8).unwrap(), fock_moments(4, 5, 20)),
        (StateSpec::fock_mixture(0.62).unwrap(), fock_moments(31, 50, 20)),
        (StateSpec::fock_mixture(0.55).unwrap(), fock_moments(11, 20, 20)),
        (StateSpec::fock_mixture(0.5).unwrap(), fock_moments(1, 2, 20)),
        (StateSpec::fock_mixture(0.0).unwrap(), fock_moments(0, 1, 20)),
        (StateSpec::thermal(1.0).unwrap(), thermal_moments(1, 1, 20)),
        (StateSpec::coherent_phase_averaged(1.0).unwrap(), coherent_moments(1, 1, 20)),
    ];
    for (state, exact_mu) in cases {
        let m = oracle(state, 20);
        for order in (2..=20).step_by(2) {
            let (exact_c, exact_min) = exact_min_f(&exact_mu, order);
            let exact_min = exact_min.to_f64().unwrap();
            let w = optimize_witness(&m, order, SolverOptions::default()).unwrap();
            // f64 rounding of the inputs alone moves the answer by about
            // ε·cond, which reaches ~1e-8 relative by N = 20
            let tol = if order <= 16 { 1e-8 } else { 1e-7 };
            let err = (w.min_f - exact_min).abs();
            assert!(err <= tol * exact_min.abs().max(1e-3), "{state} N={order}: {} vs {exact_min}", w.min_f);
            for (got, want) in w.witness.coeffs().iter().zip(&exact_c) {
                let want = want.to_f64().unwrap();
                assert!(rel(*got, want) < 1e-6, "{state} N={order}: coefficient {got} vs {want}");
            }
        }
    }
}

#[test]
fn reference_table_for_experimental_fraction() {
    let table = [
        (2, 0.27908),
        (4, 0.11215),
        (6, 0.05068),
        (8, 0.022594),
        (10, 0.0080429),
        (12, -0.000120831),
        (14, -0.0049497),
        (16, -0.0079067),
    ];
    let m = fock(0.62, 16);
    for (order, want) in table {
        let got = optimize_witness(&m, order, SolverOptions::default()).unwrap().min_f;
        assert!(rel(got, want) < 1e-4, "N={order}: {got} vs {want}");
    }
}

#[test]
fn vacuum_minimum_is_reciprocal_of_size() {
    let m = fock(0.0, 20);
    for order in (2..=20).step_by(2) {
        let got = optimize_witness(&m, order, SolverOptions::default()).unwrap().min_f;
        assert!(rel(got, 1.0 / (order / 2 + 1) as f64) < 1e-8, "N={order}: {got}");
    }
}

#[test]
fn optimality_identity_holds() {
    for eta in [0.3, 0.62, 1.0] {
        let m = fock(eta, 16);
        for order in (2..=16).step_by(2) {
            let w = optimize_witness(&m, order, SolverOptions::default()).unwrap();
            assert!(rel(w.stationary_f, w.shortcut_f) < 1e-8, "eta={eta} N={order}");
        }
    }
}

#[test]
fn classical_states_stay_nonnegative() {
    let mut states = vec![StateSpec::fock_mixture(0.0).unwrap()];
    states.extend([0.5, 1.0, 5.0].map(|n| StateSpec::thermal(n).unwrap()));
    states.extend([0.5, 1.0, 4.0].map(|a| StateSpec::coherent_phase_averaged(a).unwrap()));
    for state in states {
        let m = oracle(state, 16);
        for order in (2..=16).step_by(2) {
            let w = optimize_witness(&m, order, SolverOptions::default()).unwrap();
            assert!(w.min_f >= -1e-9, "{state} N={order}: {}", w.min_f);
            assert!(psd_crosscheck(&m, order).unwrap().psd, "{state} N={order}");
        }
    }
}

#[test]
fn monotone_in_order() {
    for eta in [0.55, 0.62, 0.8, 1.0] {
        let m = fock(eta, 16);
        let mins: Vec<f64> = (2..=16)
            .step_by(2)
            .map(|n| optimize_witness(&m, n, SolverOptions::default()).unwrap().min_f)
            .collect();
        assert!(mins.windows(2).all(|w| w[1] <= w[0] + 1e-9), "eta={eta}: {mins:?}");
    }
}

#[test]
fn scale_invariance() {
    let base = optimize_witness(&fock(1.0, 4), 4, SolverOptions::default()).unwrap();
    for s2 in [0.25, 4.0] {
        for rescale in [true, false] {
            let opts = SolverOptions { rescale, ..Default::default() };
            let m = fock(1.0, 4).scaled(f64::sqrt(s2));
            let w = optimize_witness(&m, 4, opts).unwrap();
            assert!(rel(w.min_f, base.min_f) < 1e-8);
            for (l, (got, c)) in w.witness.coeffs().iter().zip(base.witness.coeffs()).enumerate() {
                assert!(rel(*got, c * s2.powi(-(l as i32 + 1))) < 1e-8, "s²={s2} l={}", l + 1);
            }
        }
    }
}

#[test]
fn expectation_examples() {
    let m = fock(1.0, 2);
    assert_eq!(evaluate_expectation(&Witness::new(2, vec![0.0]).unwrap(), &m).unwrap(), 1.0);
    assert!(rel(evaluate_expectation(&Witness::new(2, vec![-0.3]).unwrap(), &m).unwrap(), 0.1) < 1e-14);
    assert!(rel(evaluate_expectation(&Witness::new(2, vec![-1.0]).unwrap(), &m).unwrap(), 5.0) < 1e-14);
    let short = fock(1.0, 1);
    assert!(matches!(
        evaluate_expectation(&Witness::new(2, vec![-0.3]).unwrap(), &short),
        Err(Error::IncompleteInput(_))
    ));
}

#[test]
fn variance_example_against_radial_quadrature() {
    let state = StateSpec::fock_mixture(1.0).unwrap();
    let w = Witness::new(2, vec![-0.3]).unwrap();
    let v = evaluate_variance(&w, &oracle(state, 4)).unwrap();
    assert!(rel(v.variance, 0.0036) < 1e-12, "{}", v.variance);
    assert!(!v.negative);

    let weight = |r: f64| 2.0 * PI * r * wigner_radial(&state, r);
    let m1 = integrate(|r| weight(r) * (1.0 - 0.3 * r * r).powi(2), 0.0, 30.0, 120);
    let m2 = integrate(|r| weight(r) * (1.0 - 0.3 * r * r).powi(4), 0.0, 30.0, 120);
    assert!(rel(v.variance, m2 - m1 * m1) < 1e-9);

    assert_eq!(evaluate_variance(&Witness::new(2, vec![0.0]).unwrap(), &oracle(state, 4)).unwrap().variance, 0.0);
    assert!(matches!(evaluate_variance(&w, &oracle(state, 3)), Err(Error::IncompleteInput(_))));
}

#[test]
fn psd_examples() {
    let vac = fock(0.0, 20);
    for order in (2..=20).step_by(2) {
        assert!(psd_crosscheck(&vac, order).unwrap().psd, "N={order}");
    }
    assert!(!psd_crosscheck(&fock(1.0, 4), 4).unwrap().psd);
    let p = psd_crosscheck(&fock(1.0, 2), 2).unwrap();
    assert!(p.psd && p.min_eigenvalue > 0.0);
}

#[test]
fn psd_sign_agrees_with_minimum() {
    for eta in [0.0, 0.3, 0.5, 0.55, 0.62, 0.8, 1.0] {
        let m = fock(eta, 20);
        for order in (2..=20).step_by(2) {
            let w = optimize_witness(&m, order, SolverOptions::default()).unwrap();
            let negative = !w.bounded || w.min_f < -DEFAULT_TOL_NEG;
            assert_eq!(negative, !psd_crosscheck(&m, order).unwrap().psd, "eta={eta} N={order}");
        }
    }
}

#[test]
fn profile_examples() {
    let w2 = Witness::new(2, vec![-0.3]).unwrap();
    let f = witness_profile(&w2, &[0.0, 1.0]).unwrap();
    assert_eq!(f[0], 1.0);
    assert!((f[1] - 0.49).abs() < 1e-15);
    let grid: Vec<f64> = (0..400).map(|i| i as f64 * 0.01).collect();
    assert!(witness_profile(&w2, &grid).unwrap().iter().all(|&f| f >= 0.0));

    let w4 = optimize_witness(&fock(1.0, 4), 4, SolverOptions::default()).unwrap().witness;
    assert_eq!(w4.value(0.0), 1.0);
    // M(r) = 1 − (19/33) r² + (13/198) r⁴ has roots at r² = (57 ± √675)/13
    let state = StateSpec::fock_mixture(1.0).unwrap();
    for sign in [-1.0, 1.0] {
        let r = ((57.0 + sign * 675f64.sqrt()) / 13.0).sqrt();
        assert!(w4.value(r) < 1e-24, "root {r}: {}", w4.value(r));
        assert!(r > FRAC_1_SQRT_2);
        assert!(wigner_radial(&state, r) > 0.0);
    }
    assert!(witness_profile(&w4, &[-1.0]).is_err());
    assert!(witness_profile(&w4, &[f64::NAN]).is_err());
}

#[test]
fn exact_onsets() {
    let solver = SolverOptions::default();
    assert_eq!(onset_exact(&fock(1.0, 20), 20, DEFAULT_TOL_NEG, solver).unwrap().onset, Some(4));
    assert_eq!(onset_exact(&fock(0.62, 20), 20, DEFAULT_TOL_NEG, solver).unwrap().onset, Some(12));
    for eta in [0.0, 0.3, 0.5] {
        assert_eq!(onset_exact(&fock(eta, 20), 20, DEFAULT_TOL_NEG, solver).unwrap().onset, None);
    }
}

#[test]
fn sweep_is_nonincreasing_in_fraction() {
    let etas: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let points = sweep(&etas, 20, DEFAULT_TOL_NEG, SolverOptions::default()).unwrap();
    let defined: Vec<usize> = points.iter().filter_map(|p| p.onset).collect();
    assert!(defined.windows(2).all(|w| w[1] <= w[0]), "{defined:?}");
    assert!(points.iter().filter(|p| p.eta <= 0.5).all(|p| p.onset.is_none()));
    assert_eq!(points.last().unwrap().onset, Some(4));
}

#[test]
fn refused_orders_are_skipped_and_recorded() {
    let solver = SolverOptions { condition_cap: 1e3, ..Default::default() };
    let o = onset_exact(&fock(1.0, 12), 12, DEFAULT_TOL_NEG, solver).unwrap();
    assert!(!o.skipped.is_empty());
    assert!(o.skipped.iter().all(|d| d.condition_number > 1e3));
    assert!(o.min_f.iter().all(|(n, _)| o.skipped.iter().all(|d| d.order != *n)));
}

#[test]
fn raw_moments_either_solve_cleanly_or_refuse() {
    let raw = SolverOptions { rescale: false, ..Default::default() };
    let m = fock(0.62, 20);
    for order in (14..=20).step_by(2) {
        match optimize_witness(&m, order, raw) {
            Ok(w) => assert!(w.residual < 1e-8),
            Err(Error::IllConditioned(d)) => assert_eq!(d.order, order),
            Err(e) => panic!("unexpected {e}"),
        }
    }
    for order in (2..=16).step_by(2) {
        assert!(optimize_witness(&m, order, SolverOptions::default()).unwrap().residual < 1e-8);
    }
}

#[test]
fn solver_inputs_are_validated() {
    let m = fock(1.0, 4);
    assert!(matches!(optimize_witness(&m, 3, SolverOptions::default()), Err(Error::InvalidArgument(_))));
    assert!(matches!(optimize_witness(&m, 6, SolverOptions::default()), Err(Error::IncompleteInput(_))));
    let point = RadialMomentSet::new(vec![1.0, 0.0, 0.0, 0.0, 0.0], MomentSource::Oracle).unwrap();
    assert!(optimize_witness(&point, 4, SolverOptions::default()).is_err());
}

#[test]
fn significance_optimization_never_worsens() {
    let m = fock(1.0, 8);
    let fit = optimize_significance(
        SignificanceObjective::PhaseSpace(&m),
        &m,
        4,
        SolverOptions::default(),
        SignificanceOptions::default(),
    )
    .unwrap();
    let init = optimize_witness(&m, 4, SolverOptions::default()).unwrap();
    let sigma = evaluate_variance(&init.witness, &m).unwrap().variance.sqrt();
    assert!(rel(fit.initial_objective, (-7.0 / 99.0) / sigma) < 1e-10);
    assert!(fit.objective <= fit.initial_objective);
    assert!(fit.objective < 0.0);

    let vac = fock(0.0, 16);
    let fit = optimize_significance(
        SignificanceObjective::PhaseSpace(&vac),
        &vac,
        4,
        SolverOptions::default(),
        SignificanceOptions::default(),
    )
    .unwrap();
    assert!(fit.objective >= 0.0);

    let point = RadialMomentSet::new(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], MomentSource::Oracle).unwrap();
    assert!(matches!(
        optimize_significance(
            SignificanceObjective::PhaseSpace(&point),
            &point,
            2,
            SolverOptions::default(),
            SignificanceOptions::default()
        ),
        Err(Error::DegenerateStatistic(_))
    ));
}
