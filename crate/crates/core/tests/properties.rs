use dampwave::certificates::{omega_window, predicted_exponents};
use dampwave::coefficients::{sample_envelope_violation, validation_samples};
use dampwave::decay::fit_decay_rate;
use dampwave::energetics::{apply_m, energy};
use dampwave::support::build_q;
use dampwave::{make_power_law, CoefficientField, Discretization, Grid, PowerLawEnvelope, Profile, Snapshot, SourceField};
use proptest::prelude::*;

fn unit_op(m: usize) -> Discretization {
    Discretization::new(&Grid::radial(3, 8.0, m).unwrap(), &CoefficientField::unit()).unwrap()
}

fn profile(coeffs: &[f64], op: &Discretization) -> Vec<f64> {
    op.grid.sample(|r| coeffs.iter().enumerate().map(|(k, c)| c * (-(r - k as f64).powi(2)).exp()).sum())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_quadratic(cu in prop::collection::vec(-2.0..2.0f64, 4), cv in prop::collection::vec(-2.0..2.0f64, 4)) {
        let op = unit_op(200);
        let snap = |s: f64| Snapshot {
            t: 0.0,
            u: profile(&cu, &op).iter().map(|v| s * v).collect(),
            ut: profile(&cv, &op).iter().map(|v| s * v).collect(),
        };
        let e1 = energy(&snap(1.0), &op).unwrap();
        prop_assert!(e1 >= 0.0);
        prop_assert_eq!(energy(&snap(4.0), &op).unwrap(), 16.0 * e1);
        prop_assert_eq!(energy(&snap(-1.0), &op).unwrap(), e1);
    }

    #[test]
    fn m_is_linear(cu in prop::collection::vec(-2.0..2.0f64, 4), cv in prop::collection::vec(-2.0..2.0f64, 4), s in -3.0..3.0f64) {
        let op = unit_op(200);
        let (u, v) = (profile(&cu, &op), profile(&cv, &op));
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| s * a + b).collect();
        let (mu, mv, mw) = (apply_m(&u, &op).unwrap(), apply_m(&v, &op).unwrap(), apply_m(&w, &op).unwrap());
        let scale = mu.iter().chain(&mv).fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..op.grid.m {
            prop_assert!((mw[i] - (s * mu[i] + mv[i])).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn energy_gain_per_derivative_is_two(mu in 0.1..4.0f64, delta in 0.01..0.5f64, k in 0usize..6) {
        let (p, q) = (predicted_exponents(mu, delta, k), predicted_exponents(mu, delta, k + 1));
        prop_assert!((q.energy_k - p.energy_k - 2.0).abs() <= 1e-12);
        prop_assert!((p.damping - predicted_exponents(mu, delta, 0).energy_k - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn omega_window_shrinks_with_alpha_and_grows_with_gamma(
        alpha in 0.0..1.0f64, da in 0.0..0.5f64, beta in 0.0..0.9f64, gamma in 0.0..0.5f64, dg in 0.0..0.4f64,
    ) {
        let lo = |a: f64, g: f64| {
            omega_window(&PowerLawEnvelope::with_exponents(a, beta, g)).unwrap().map(|w| w.0).unwrap_or(1.0)
        };
        prop_assert!(lo(alpha + da, gamma) >= lo(alpha, gamma));
        prop_assert!(lo(alpha, gamma + dg) <= lo(alpha, gamma));
    }

    #[test]
    fn power_law_fields_stay_in_their_envelope(
        alpha in -1.0..1.0f64, beta in -1.0..1.0f64, gamma in -1.0..1.0f64, a0 in 0.2..2.0f64, ka in 1.0..3.0f64,
    ) {
        let mut env = PowerLawEnvelope::with_exponents(alpha, beta, gamma);
        env.a0 = a0;
        env.a1 = a0 * ka;
        let field = make_power_law(env, Profile::PurePower).unwrap();
        prop_assert!(sample_envelope_violation(&field, &validation_samples()).unwrap().is_empty());
        // the smoothed profile needs room between the constants and may refuse
        if let Ok(smooth) = make_power_law(env, Profile::SmoothedPower) {
            prop_assert!(sample_envelope_violation(&smooth, &validation_samples()).unwrap().is_empty());
        }
    }

    #[test]
    fn pulse_source_keeps_its_support(radius in 0.1..5.0f64, rate in 0.0..2.0f64, t in 0.0..50.0f64, k in 0usize..4) {
        let h = SourceField::decaying_pulse(1.5, radius, rate, 3);
        for j in 0..20 {
            let r = radius * (1.0 + j as f64 * 0.1);
            match h.derivative(k, r, t) {
                Ok(v) => prop_assert_eq!(v, 0.0),
                Err(_) => prop_assert!(k > 3),
            }
        }
        prop_assert!(h.value(0.0, t) > 0.0);
    }

    #[test]
    fn power_laws_are_recovered(p in -6.0..2.0f64, c in 0.01..100.0f64) {
        let series: Vec<(f64, f64)> = (0..40).map(|j| 2.0 * 1.1f64.powi(j)).map(|t| (t, c * t.powf(p))).collect();
        let fit = fit_decay_rate(&series, (1.0, 1e4)).unwrap();
        prop_assert!((fit.slope - p).abs() <= 1e-6);
    }

    #[test]
    fn predicted_radius_is_monotone(t in 0.0..100.0f64, dt in 0.0..10.0f64, beta in 0.0..0.9f64, gamma in 0.0..0.9f64, ds in 0.0..0.1f64) {
        let q = build_q(&PowerLawEnvelope::with_exponents(0.0, beta, gamma), 2.0).unwrap();
        prop_assert!(q.predicted_radius(t + dt) >= q.predicted_radius(t));
        let q2 = build_q(&PowerLawEnvelope::with_exponents(0.0, beta + ds, gamma), 2.0).unwrap();
        prop_assert!(q2.predicted_radius(t) >= q.predicted_radius(t) * (1.0 - 1e-12));
    }
}
