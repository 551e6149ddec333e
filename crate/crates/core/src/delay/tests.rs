use super::*;
use crate::analytic::{saturation_tau, station_rate_pps, tau_for_collision_prob};
use crate::model::AccessModel;
use proptest::prelude::*;
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario(model: AccessModel, n: u32, m: u32, r: f64) -> Scenario {
    Scenario::table1(model, n, m, r).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn view_at_zero_tau() {
    let s = scenario(AccessModel::Basic, 50, 1, 2.0);
    let v = backoff_view(0.0, &s).unwrap();
    assert_eq!((v.p_idle_b, v.p_coll_b, v.p_succ_b), (1.0, 0.0, 0.0));
    assert_eq!(v.a1_us, s.timing.t_idle_us);
}

#[test]
fn view_equal_slots_degenerate() {
    let s = scenario(AccessModel::EqualSlot, 50, 1, 2.0);
    let t = s.timing.t_succ_us;
    for tau in [0.01, 0.2, 0.9] {
        let v = backoff_view(tau, &s).unwrap();
        assert!(rel(v.a1_us, t) < 1e-13);
        assert!(rel(v.a2_us2, t * t) < 1e-13);
        assert!(rel(v.a3_us3, t * t * t) < 1e-13);
    }
}

#[test]
fn view_mean_slot_monte_carlo() {
    let s = scenario(AccessModel::Basic, 50, 1, 2.0);
    let v = backoff_view(0.05, &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let coin = Uniform::new(0.0f64, 1.0).unwrap();
    let n = 10_000_000u32;
    let mut sum = 0.0;
    let mut residual = 0.0;
    for _ in 0..n {
        // outcome of the other 49 stations, each transmitting w.p. 0.05
        let mut k = 0;
        for _ in 0..49 {
            if coin.sample(&mut rng) < 0.05 {
                k += 1;
            }
        }
        let t = match k {
            0 => s.timing.t_idle_us,
            1 => s.timing.t_succ_us,
            _ => s.timing.t_coll_us,
        };
        sum += t;
        // residual of a uniformly placed arrival is t/2 weighted by t
        residual += t * coin.sample(&mut rng) * t;
    }
    let a1 = sum / f64::from(n);
    assert!(rel(a1, v.a1_us) < 1e-3, "{a1} vs {}", v.a1_us);
    let e_y = residual / sum;
    assert!(rel(e_y, vacation_moments(&v).0) < 5e-3);
}

#[test]
fn vacation_equal_slots() {
    let s = scenario(AccessModel::EqualSlot, 50, 1, 2.0);
    let t = s.timing.t_succ_us;
    let (y, y2) = vacation_moments(&backoff_view(0.03, &s).unwrap());
    assert!(rel(y, t / 2.0) < 1e-13);
    assert!(rel(y2, t * t / 3.0) < 1e-13);
    let b = scenario(AccessModel::Basic, 50, 1, 2.0);
    let (y0, _) = vacation_moments(&backoff_view(0.0, &b).unwrap());
    assert_eq!(y0, b.timing.t_idle_us / 2.0);
}

#[test]
fn countdown_pgf_examples() {
    let mac = MacParams::unlimited(16, 2.0).unwrap();
    for stage in 1..6 {
        assert_eq!(countdown_pgf(stage, &mac, 1.0).unwrap(), 1.0);
        let w = 16.0 * 2f64.powi(stage as i32 - 1);
        assert!(rel(countdown_pgf(stage, &mac, 0.0).unwrap(), 1.0 / w) < 1e-14);
    }
    let direct: f64 = (0..64).map(|k| 0.9f64.powi(k)).sum::<f64>() / 64.0;
    assert!(rel(countdown_pgf(3, &mac, 0.9).unwrap(), direct) < 1e-14);
    // series branch near z = 1
    let z: f64 = 1.0 - 1e-5;
    let direct: f64 = (0..64).map(|k| z.powi(k)).sum::<f64>() / 64.0;
    assert!(rel(countdown_pgf(3, &mac, z).unwrap(), direct) < 1e-14);
    assert!(countdown_pgf(0, &mac, 0.5).is_err());
}

#[test]
fn countdown_pgf_huge_window() {
    let mac = MacParams::unlimited(16, 2.0).unwrap();
    let v = countdown_pgf(70, &mac, 0.5).unwrap();
    assert!(v > 0.0 && v < 1e-15);
}

#[test]
fn transform_normalisation_and_single_attempt() {
    let s = scenario(AccessModel::Basic, 50, 1, 2.0);
    let v = backoff_view(0.003, &s).unwrap();
    let t = xne_transform(0.0, &v, &s.mac, 400).unwrap();
    assert!((t.value - 1.0).abs() < 1e-12);

    let alone = scenario(AccessModel::Basic, 1, 1, 2.0);
    let v = backoff_view(0.2, &alone).unwrap();
    assert_eq!(v.p_c, 0.0);
    let sarg = 1e-3;
    let t = xne_transform(sarg, &v, &alone.mac, 200).unwrap();
    let want = countdown_pgf(1, &alone.mac, v.slot_transform(sarg)).unwrap()
        * (-sarg * alone.timing.t_succ_us).exp();
    assert!(rel(t.value, want) < 1e-12);
}

#[test]
fn transform_truncation_tail() {
    let s = scenario(AccessModel::EqualSlot, 50, 1, 2.0);
    let tau = tau_for_collision_prob(0.3, 50, 1).unwrap();
    let v = backoff_view(tau, &s).unwrap();
    let a = xne_transform(1e-4, &v, &s.mac, 100).unwrap();
    let b = xne_transform(1e-4, &v, &s.mac, 200).unwrap();
    assert!((a.value - b.value).abs() < 1e-12);
    assert!((a.tail_bound - 0.3f64.powi(100)).abs() < 1e-60);
}

#[test]
fn transform_is_monotone() {
    let s = scenario(AccessModel::Basic, 20, 2, 1.5);
    let v = backoff_view(0.02, &s).unwrap();
    let mut prev = 1.0;
    for k in 0..50 {
        let x = xne_transform(f64::from(k) * 1e-5, &v, &s.mac, 200).unwrap().value;
        assert!(x <= prev + 1e-15);
        prev = x;
    }
}

#[test]
fn first_moment_without_collisions() {
    let s = scenario(AccessModel::EqualSlot, 1, 1, 2.0);
    let v = backoff_view(0.1, &s).unwrap();
    let t = s.timing.t_succ_us;
    let m = xne_moments(&v, &s.mac);
    assert!(rel(m[0].value(), 8.5 * t) < 1e-14);
    let b = scenario(AccessModel::Basic, 1, 1, 2.0);
    let v = backoff_view(0.1, &b).unwrap();
    let m = xne_moments(&v, &b.mac);
    assert!(rel(m[0].value(), v.a1_us * 7.5 + b.timing.t_succ_us) < 1e-14);
}

#[test]
fn staircase_at_r2() {
    let s = scenario(AccessModel::EqualSlot, 50, 1, 2.0);
    for (pc, finite) in [
        (0.1, [true, true, true]),
        (0.2, [true, true, false]),
        (0.3, [true, false, false]),
        (0.6, [false, false, false]),
    ] {
        let tau = tau_for_collision_prob(pc, 50, 1).unwrap();
        let v = backoff_view(tau, &s).unwrap();
        let m = xne_moments(&v, &s.mac);
        assert_eq!(m.map(|x| x.is_finite()), finite, "p_c = {pc}");
    }
}

#[test]
fn divergence_propagates_to_delay() {
    let s = scenario(AccessModel::EqualSlot, 50, 1, 2.0);
    let tau = tau_for_collision_prob(0.3, 50, 1).unwrap();
    let s = s.with_lambda(1e-3).unwrap();
    let d = delay_stats(&s, tau).unwrap();
    assert!(d.xne_m1.is_finite());
    assert!(!d.xne_m2.is_finite());
    assert!(!d.e_d_us.is_finite());
    assert!(!d.var_d_us2.is_finite());
    assert_eq!(serde_json::to_value(d.e_d_us).unwrap(), serde_json::json!("inf"));
}

#[test]
fn zero_load_limits() {
    let s = scenario(AccessModel::Basic, 50, 1, 2.0);
    let tau = 0.002;
    let d = delay_stats(&s, tau).unwrap();
    assert_eq!(d.rho, Utilization::Stable(0.0));
    let want = d.xne_m1.value() + d.e_y_us;
    assert!(rel(d.e_d_us.value(), want) < 1e-15);

    // D*(s) -> X*(s) Y*(s) as lambda -> 0
    let tiny = s.with_lambda(1e-9).unwrap();
    let v = backoff_view(tau, &s).unwrap();
    let sarg = 2e-4;
    let x = xne_transform(sarg, &v, &s.mac, 200).unwrap().value;
    let y = v.slot_transform_complement(sarg) / (sarg * v.a1_us);
    let d = delay_transform(sarg, &tiny, tau, 200).unwrap();
    assert!(rel(d, x * y) < 1e-6);
}

#[test]
fn retry_limit_zero_and_large() {
    let s = scenario(AccessModel::Basic, 50, 1, 2.0);
    let tau = tau_for_collision_prob(0.08, 50, 1).unwrap();
    let v = backoff_view(tau, &s).unwrap();

    let k0 = s.mac.with_retry(0);
    let r0 = xne_moments_retry(&v, &k0).unwrap();
    assert!(rel(r0.delivered[0], v.a1_us * 7.5 + s.timing.t_succ_us) < 1e-14);
    assert!(rel(r0.loss_rate, v.p_c) < 1e-14);

    let k60 = s.mac.with_retry(60);
    let r60 = xne_moments_retry(&v, &k60).unwrap();
    let m = xne_moments(&v, &s.mac);
    for n in 0..3 {
        assert!(rel(r60.delivered[n], m[n].value()) < 1e-9, "order {}", n + 1);
        assert!(rel(r60.service[n], m[n].value()) < 1e-9, "order {}", n + 1);
    }
}

#[test]
fn cwmax_limits() {
    let s = scenario(AccessModel::Basic, 50, 1, 2.0);
    let tau = tau_for_collision_prob(0.05, 50, 1).unwrap();
    let v = backoff_view(tau, &s).unwrap();
    let huge = MacParams::new(16, 2.0, None, Some(16 << 58)).unwrap();
    let c = xne_moments_cwmax(&v, &huge).unwrap();
    let m = xne_moments(&v, &s.mac);
    for n in 0..3 {
        assert!(rel(c[n], m[n].value()) < 1e-9);
    }

    // constant window: geometric attempts with a fixed countdown
    let flat = MacParams::new(16, 2.0, None, Some(16)).unwrap();
    let c = xne_moments_cwmax(&v, &flat).unwrap();
    let p = v.p_c;
    let want = v.a1_us * 7.5 / (1.0 - p) + s.timing.t_coll_us * p / (1.0 - p) + s.timing.t_succ_us;
    assert!(rel(c[0], want) < 1e-13);
}

#[test]
fn cwmax_second_moment_grows_with_cap() {
    let s = scenario(AccessModel::EqualSlot, 50, 1, 2.0);
    let tau = tau_for_collision_prob(0.3, 50, 1).unwrap();
    let v = backoff_view(tau, &s).unwrap();
    let mut prev = 0.0;
    for j in 0..12 {
        let mac = MacParams::new(16, 2.0, None, Some(16 << j)).unwrap();
        let m2 = xne_moments_cwmax(&v, &mac).unwrap()[1];
        assert!(m2.is_finite() && m2 > prev, "j = {j}");
        prev = m2;
    }
}

#[test]
fn rho_tilde_is_one_at_saturation() {
    for (model, n, m, r) in [
        (AccessModel::EqualSlot, 50, 1, 2.0),
        (AccessModel::Basic, 50, 1, 2.0),
        (AccessModel::RtsCts, 20, 3, 1.7),
        (AccessModel::Basic, 5, 2, 3.0),
    ] {
        let s = scenario(model, n, m, r);
        let tau_s = saturation_tau(&s).unwrap();
        let rt = rho_tilde_on_curve(&s, tau_s).unwrap();
        assert!((rt - 1.0).abs() < 1e-8, "{model} n={n}: {rt}");
    }
}

#[test]
fn large_population_boundary_near_one_over_r() {
    let s = scenario(AccessModel::EqualSlot, 500, 1, 2.0);
    let tau_s = saturation_tau(&s).unwrap();
    let pc = crate::analytic::conditional_collision_prob(tau_s, 500, 1);
    assert!(rel(pc, 0.5) < 0.01, "{pc}");
}

#[test]
fn lemma_rho_tilde_increasing() {
    let s = scenario(AccessModel::EqualSlot, 50, 1, 2.0);
    let hi = tau_for_collision_prob(0.5, 50, 1).unwrap();
    let mut prev = 0.0;
    for k in 1..400 {
        let tau = hi * f64::from(k) / 400.0;
        let rt = rho_tilde_on_curve(&s, tau).unwrap();
        assert!(rt >= prev, "tau = {tau}");
        prev = rt;
    }
}

#[test]
fn queue_identities() {
    let s = scenario(AccessModel::EqualSlot, 50, 1, 2.0);
    let tau = 0.004;
    let s = s.with_lambda(station_rate_pps(tau, &s)).unwrap();
    let d = delay_stats(&s, tau).unwrap();
    let rho = d.rho.value().unwrap();
    let q0 = queue_length_pgf(0.0, &s, tau, 200).unwrap();
    assert!((q0 - (1.0 - rho)).abs() < 1e-10);
    assert_eq!(queue_length_pgf(1.0, &s, tau, 200).unwrap(), 1.0);
    assert_eq!(delay_transform(0.0, &s, tau, 200).unwrap(), 1.0);
    assert!(rho > d.rho_tilde && rho < 1.0);
}

#[test]
fn delay_transform_slope_is_mean_delay() {
    let s = scenario(AccessModel::EqualSlot, 50, 1, 2.0);
    let tau = 0.001;
    let s = s.with_lambda(station_rate_pps(tau, &s)).unwrap();
    let d = delay_stats(&s, tau).unwrap();
    let e_d = d.e_d_us.value();
    let f = |h: f64| 1.0 - delay_transform(h, &s, tau, 200).unwrap();
    let h = 1e-9;
    let richardson = 2.0 * f(h / 2.0) / (h / 2.0) - f(h) / h;
    assert!(rel(richardson, e_d) < 1e-5, "{richardson} vs {e_d}");
}

#[test]
fn utilisation_unstable_past_saturation() {
    let s = scenario(AccessModel::EqualSlot, 50, 1, 2.0);
    let tau_s = saturation_tau(&s).unwrap();
    let d = delay_stats_on_curve(&s, tau_s * 1.05).unwrap();
    assert_eq!(d.rho, Utilization::Unstable);
    assert!(!d.e_d_us.is_finite());
}

fn stable_point() -> impl Strategy<Value = (Scenario, f64)> {
    (
        prop_oneof![
            Just(AccessModel::EqualSlot),
            Just(AccessModel::Basic),
            Just(AccessModel::RtsCts)
        ],
        5u32..80,
        1u32..4,
        1.2..3.0f64,
        0.05..0.95f64,
        0.02..0.9f64,
    )
        .prop_map(|(model, n, m, r, pos, load)| {
            let s = Scenario::table1(model, n, m, r).unwrap();
            let tau_s = saturation_tau(&s).unwrap();
            let tau = pos * tau_s;
            let lam = load * station_rate_pps(tau, &s);
            (s.with_lambda(lam).unwrap(), tau)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn view_partition((s, tau) in stable_point()) {
        let v = backoff_view(tau, &s).unwrap();
        prop_assert!((v.p_idle_b + v.p_coll_b + v.p_succ_b - 1.0).abs() < 1e-12);
        prop_assert!(v.a1_us > 0.0);
        prop_assert!(v.a2_us2 >= v.a1_us * v.a1_us * (1.0 - 1e-12));
    }

    #[test]
    fn utilisation_chain((s, tau) in stable_point()) {
        let d = delay_stats(&s, tau).unwrap();
        prop_assert!(d.rho_tilde < 1.0);
        let rho = d.rho.value().unwrap();
        prop_assert!(rho < 1.0);
        prop_assert!(rho > d.rho_tilde);
    }

    #[test]
    fn finiteness_matches_conditions((s, tau) in stable_point()) {
        let d = delay_stats(&s, tau).unwrap();
        let r = s.mac.r;
        prop_assert_eq!(d.e_d_us.is_finite(), d.p_c * r * r < 1.0);
        prop_assert_eq!(d.var_d_us2.is_finite(), d.p_c * r.powi(3) < 1.0);
        if let MomentValue::Finite(v) = d.var_d_us2 {
            prop_assert!(v > 0.0);
        }
    }

    #[test]
    fn vacation_variance_identity((s, tau) in stable_point()) {
        let v = backoff_view(tau, &s).unwrap();
        let (y, y2) = vacation_moments(&v);
        prop_assert!(y2 - y * y >= -1e-9 * y2);
    }

    #[test]
    fn rho_grows_to_one_at_boundary((s, _tau) in stable_point()) {
        let tau_s = saturation_tau(&s).unwrap();
        let mut prev = 0.0;
        for gap in [1e-1, 1e-2, 1e-3, 1e-5] {
            let d = delay_stats_on_curve(&s, tau_s * (1.0 - gap)).unwrap();
            let rho = d.rho.value().unwrap();
            prop_assert!(rho > prev);
            prev = rho;
        }
        prop_assert!(prev > 1.0 - 1e-3, "{}", prev);
    }
}
