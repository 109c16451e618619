use proptest::prelude::*;

use sqzent::analytic::{
    critical_temperature, critical_temperature_bisection, entanglement_boundary, nu_minus_analytic,
    optimal_squeezing, r_function, thermal_occupation, thermal_y, CriticalTemperature,
    EntangledWindow, SymmetricCase,
};
use sqzent::numeric::golden_section_min;
use sqzent::{log_negativity, steady_state, BathSpec, SystemParams};

/// `ν̃₋` from the Lyapunov pipeline for the symmetric case with common phase `phi`.
fn numeric_nu(omega: f64, gamma: f64, coupling: f64, r: f64, nbar: f64, phi: f64) -> f64 {
    let sys = SystemParams::resonant(omega, coupling, gamma).unwrap();
    let bath = BathSpec::new(nbar, r, phi).unwrap().derive();
    log_negativity(&steady_state(&sys, &bath, &bath).unwrap())
        .unwrap()
        .nu_minus
}

#[test]
fn closed_form_matches_lyapunov_for_any_common_phase() {
    for phi in [0.0, 0.4, 1.3, 2.9, 4.4, 6.0] {
        for (gamma, coupling, r, nbar) in [(0.5, 0.7, 0.1, 0.0), (1.0, 0.2, 0.9, 0.6), (0.25, 1.7, 0.4, 1.5)] {
            let case = SymmetricCase::new(1.0, gamma, coupling, r, 0.0).unwrap();
            let analytic = 0.5 * (2.0 * nbar + 1.0) * r_function(gamma, coupling, r);
            let numeric = numeric_nu(1.0, gamma, coupling, r, nbar, phi);
            assert!((analytic - numeric).abs() < 1e-12, "phi={phi}: {analytic} vs {numeric}");
            if nbar == 0.0 {
                assert!((nu_minus_analytic(&case) - numeric).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn unequal_phases_break_the_closed_form() {
    let analytic = 0.5 * r_function(0.5, 0.7, 0.3);
    let numeric = numeric_nu(1.0, 0.5, 0.7, 0.3, 0.0, 0.0);
    assert!((analytic - numeric).abs() < 1e-12);
    let sys = SystemParams::resonant(1.0, 0.7, 0.5).unwrap();
    let b1 = BathSpec::new(0.0, 0.3, 0.0).unwrap().derive();
    let b2 = BathSpec::new(0.0, 0.3, 1.0).unwrap().derive();
    let shifted = log_negativity(&steady_state(&sys, &b1, &b2).unwrap()).unwrap().nu_minus;
    assert!((shifted - analytic).abs() > 1e-3);
}

#[test]
fn temperature_enters_through_y() {
    for t in [0.05, 0.3, 1.0, 4.0] {
        let case = SymmetricCase::new(1.0, 0.5, 0.7, 0.2, t).unwrap();
        let nbar = thermal_occupation(1.0, t);
        assert!((case.y() - (2.0 * nbar + 1.0)).abs() < 1e-12 * case.y());
        let numeric = numeric_nu(1.0, 0.5, 0.7, 0.2, nbar, 0.0);
        assert!((nu_minus_analytic(&case) - numeric).abs() < 1e-9);
    }
}

#[test]
fn large_squeezing_and_strong_coupling_destroy_entanglement() {
    for gamma in [0.25, 0.5, 1.0] {
        for k in 1..=20 {
            let coupling = 0.1 * k as f64;
            assert!(r_function(gamma, coupling, 5.0) > 1.0, "gamma={gamma} J={coupling}");
        }
        for r in [0.05, 0.3, 1.0] {
            let big = r_function(gamma, 1e3, r);
            assert!(big > 1.0);
            // leading correction is -χ S with χ ≈ γ / 2J
            let chi_s = gamma / 2e3 * (2.0 * r).sinh();
            assert!((big - (2.0 * r).cosh()).abs() < 1.01 * chi_s);
        }
    }
}

#[test]
fn threshold_consistency() {
    let (gamma, coupling, omega) = (0.5, 0.7, 1.0);
    for r in [0.08, 0.3] {
        let tc = critical_temperature(gamma, coupling, r, omega).value().unwrap();
        let y = thermal_y(omega, tc);
        assert!((y * r_function(gamma, coupling, r) - 1.0).abs() < 1e-12);
        let EntangledWindow::Interval { low, high } = entanglement_boundary(gamma, coupling, y) else {
            panic!("window at y(T_c) must exist");
        };
        let nearest = (r - low).abs().min((r - high).abs());
        assert!(nearest < 1e-8, "r={r} window=({low}, {high})");
    }
}

#[test]
fn closed_form_and_bisection_critical_temperatures_agree() {
    for (gamma, coupling) in [(0.5, 0.3), (0.5, 0.7), (0.5, 1.2), (1.0, 0.5), (0.25, 0.1)] {
        for r in [0.02, 0.1, 0.2, 0.35] {
            let a = critical_temperature(gamma, coupling, r, 1.0);
            let b = critical_temperature_bisection(gamma, coupling, r, 1.0, 1e-12);
            match (a, b) {
                (CriticalTemperature::Finite(x), CriticalTemperature::Finite(y)) => {
                    assert!((x - y).abs() < 1e-9, "{x} vs {y}");
                }
                (CriticalTemperature::NoEntanglement, CriticalTemperature::NoEntanglement) => {}
                other => panic!("disagree: {other:?}"),
            }
        }
    }
}

#[test]
fn critical_temperature_is_the_lyapunov_threshold() {
    let (gamma, coupling) = (0.5, 0.7);
    let opt = optimal_squeezing(gamma, coupling);
    let tc = critical_temperature(gamma, coupling, opt.r_opt, 1.0).value().unwrap();
    assert!((tc - 0.276).abs() < 5e-4, "{tc}");
    let nu_at = |t: f64| numeric_nu(1.0, gamma, coupling, opt.r_opt, thermal_occupation(1.0, t), 0.0);
    assert!((nu_at(tc) - 0.5).abs() < 1e-9);
    assert!(nu_at(tc * (1.0 - 1e-4)) < 0.5);
    assert!(nu_at(tc * (1.0 + 1e-4)) > 0.5);
}

#[test]
fn paper_optimum() {
    let opt = optimal_squeezing(0.5, 0.7);
    assert!((opt.r_opt - 0.1662).abs() < 1e-4, "{}", opt.r_opt);
    assert!((opt.r_value - 0.9478).abs() < 1e-4, "{}", opt.r_value);
    let (r_gs, big_r_gs) = golden_section_min(0.0, 1.0, 1e-12, |r| r_function(0.5, 0.7, r));
    assert!((r_gs - opt.r_opt).abs() < 1e-6);
    assert!((big_r_gs - opt.r_value).abs() < 1e-12);
}

#[test]
fn entangled_window_edges_are_numeric_sign_changes() {
    let EntangledWindow::Interval { low, high } = entanglement_boundary(0.5, 0.7, 1.0) else {
        panic!("paper point has an entangled window");
    };
    assert_eq!(low, 0.0);
    assert!(high.is_finite() && high > 0.1662);
    assert!((r_function(0.5, 0.7, high) - 1.0).abs() < 1e-9);
    let entangled = |r: f64| numeric_nu(1.0, 0.5, 0.7, r, 0.0, 0.0) < 0.5;
    assert!(entangled(high - 1e-6));
    assert!(!entangled(high + 1e-6));
    assert!(!entangled(0.0));
    assert!(entangled(1e-3));
}

proptest! {
    #[test]
    fn optimum_dominates_a_dense_grid(gamma in 0.1f64..2.0, coupling in 0.01f64..3.0) {
        let opt = optimal_squeezing(gamma, coupling);
        for k in 0..=400 {
            let r = 0.005 * k as f64;
            prop_assert!(opt.r_value <= r_function(gamma, coupling, r) + 1e-14);
        }
    }

    #[test]
    fn window_edges_solve_the_threshold(gamma in 0.1f64..2.0, coupling in 0.05f64..3.0, y in 1.0f64..1.2) {
        match entanglement_boundary(gamma, coupling, y) {
            EntangledWindow::Interval { low, high } => {
                prop_assert!(low < high);
                prop_assert!((y * r_function(gamma, coupling, high) - 1.0).abs() <= 1e-9);
                if low > 0.0 {
                    prop_assert!((y * r_function(gamma, coupling, low) - 1.0).abs() <= 1e-9);
                }
            }
            EntangledWindow::Empty => {
                prop_assert!(y * optimal_squeezing(gamma, coupling).r_value >= 1.0);
            }
        }
    }

    #[test]
    fn critical_temperature_separates_phases(gamma in 0.1f64..2.0, coupling in 0.05f64..3.0, r in 0.01f64..0.6) {
        if let CriticalTemperature::Finite(tc) = critical_temperature(gamma, coupling, r, 1.0) {
            let below = SymmetricCase::new(1.0, gamma, coupling, r, tc * 0.999).unwrap();
            let above = SymmetricCase::new(1.0, gamma, coupling, r, tc * 1.001).unwrap();
            prop_assert!(nu_minus_analytic(&below) < 0.5);
            prop_assert!(nu_minus_analytic(&above) > 0.5);
        } else {
            prop_assert!(r_function(gamma, coupling, r) >= 1.0 - 1e-14);
        }
    }
}
