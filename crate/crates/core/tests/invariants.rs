//! Property checks over randomized parameters.

use proptest::prelude::*;

use risf_core::channel::{
    moment_match, moment_match_via_moments, snr_cdf, snr_pdf, FisherFParams, GammaSumApprox, LinkBudget,
};
use risf_core::mc_sim::{
    dkw_epsilon, empirical_sop, pairwise_sum, simulate, EveMode, GMode, Scenario,
};
use risf_core::secrecy::{asc_quadrature, secrecy_capacity, sop_exact, sop_quadrature, SecrecyConfig};

fn link() -> impl Strategy<Value = FisherFParams> {
    (1.0f64..=5.0, 1.55f64..=6.0, 0.5f64..=2.0).prop_map(|(m, m_s, omega)| FisherFParams::new(m, m_s, omega).unwrap())
}

fn approx() -> impl Strategy<Value = GammaSumApprox> {
    (1u32..=16, link(), link(), -10.0f64..30.0).prop_map(|(n, l1, l2, db)| {
        moment_match(n, &l1, &l2).unwrap().at_snr(10f64.powf(db / 10.0))
    })
}

fn scenario(n: u32, trials: u64, seed: u64) -> Scenario {
    let link = FisherFParams::new(2.0, 3.0, 1.0).unwrap();
    let budget = |noise_dbm| LinkBudget {
        power_dbm: 30.0,
        noise_dbm,
        dist_ar_m: 10.0,
        dist_rx_m: 10.0,
        alpha: 3.0,
    };
    Scenario {
        n_elements: n,
        params_ar: link,
        params_rb: link,
        params_re: link,
        budget_b: budget(-40.0),
        budget_e: budget(-20.0),
        rate_nats: 1.0,
        trials,
        seed,
        eve_mode: EveMode::Coherent,
        g_mode: GMode::Independent,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moment_routes_agree(n in 1u32..=16, l1 in link(), l2 in link()) {
        let a = moment_match(n, &l1, &l2).unwrap();
        let b = moment_match_via_moments(n, &l1, &l2).unwrap();
        prop_assert!(((a.a - b.a) / b.a.abs().max(1.0)).abs() < 1e-10);
        prop_assert!(((a.b - b.b) / b.b).abs() < 1e-10);
        prop_assert!(a.a > -1.0 && a.b > 0.0);
    }

    #[test]
    fn fitted_shape_grows_linearly_with_elements(n in 1u32..=15, l1 in link(), l2 in link()) {
        let s1 = moment_match(n, &l1, &l2).unwrap();
        let s2 = moment_match(n + 1, &l1, &l2).unwrap();
        let step = (s2.a + 1.0) - (s1.a + 1.0);
        let unit = moment_match(1, &l1, &l2).unwrap().a + 1.0;
        prop_assert!((step - unit).abs() < 1e-9 * unit.max(1.0));
        prop_assert!((s1.b - s2.b).abs() < 1e-12 * s1.b);
    }

    #[test]
    fn cdf_is_a_distribution(ap in approx(), x1 in 1e-4f64..1e4, x2 in 1e-4f64..1e4) {
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let (c1, c2) = (snr_cdf(lo, &ap), snr_cdf(hi, &ap));
        prop_assert!((0.0..=1.0).contains(&c1) && (0.0..=1.0).contains(&c2));
        prop_assert!(c1 <= c2 + 1e-15);
        prop_assert!(snr_pdf(lo, &ap) >= 0.0);
    }

    #[test]
    fn secrecy_capacity_is_nonnegative_and_monotone(gb in 0.0f64..1e6, ge in 0.0f64..1e6, d in 0.0f64..1e3) {
        let c = secrecy_capacity(gb, ge);
        prop_assert!(c >= 0.0);
        prop_assert!(secrecy_capacity(gb + d, ge) >= c);
        prop_assert!(secrecy_capacity(gb, ge + d) <= c);
    }

    #[test]
    fn pairwise_sum_matches_compensated_sum(xs in prop::collection::vec(-1e6f64..1e6, 0..3000)) {
        let want: f64 = {
            let (mut s, mut c) = (0.0f64, 0.0f64);
            for &x in &xs {
                let t = s + x;
                c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
                s = t;
            }
            s + c
        };
        let scale: f64 = xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((pairwise_sum(&xs) - want).abs() <= 1e-13 * scale);
    }

    #[test]
    fn dkw_band_shrinks_with_samples(n in 1usize..1_000_000, alpha in 1e-4f64..0.5) {
        prop_assert!(dkw_epsilon(2 * n, alpha) < dkw_epsilon(n, alpha));
        prop_assert!(dkw_epsilon(n, alpha / 2.0) > dkw_epsilon(n, alpha));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sop_is_a_probability_decreasing_in_main_snr(
        n in 1u32..=10,
        l in link(),
        db_b in -10.0f64..30.0,
        db_e in -10.0f64..10.0,
        rate in 0.1f64..2.0,
    ) {
        let shape = moment_match(n, &l, &l).unwrap();
        let eve = shape.at_snr(10f64.powf(db_e / 10.0));
        let at = |db: f64| {
            let cfg = SecrecyConfig::new(rate, shape.at_snr(10f64.powf(db / 10.0)), eve).unwrap();
            sop_quadrature(&cfg).unwrap().value
        };
        let (p1, p2) = (at(db_b), at(db_b + 3.0));
        prop_assert!((0.0..=1.0).contains(&p1));
        prop_assert!(p2 <= p1);
    }

    #[test]
    fn sop_closed_form_tracks_quadrature(
        n in 1u32..=10,
        l in link(),
        db_b in -10.0f64..30.0,
        db_e in -10.0f64..10.0,
    ) {
        let shape = moment_match(n, &l, &l).unwrap();
        let cfg = SecrecyConfig::new(
            1.0,
            shape.at_snr(10f64.powf(db_b / 10.0)),
            shape.at_snr(10f64.powf(db_e / 10.0)),
        ).unwrap();
        let exact = sop_exact(&cfg).unwrap().value;
        let quad = sop_quadrature(&cfg).unwrap().value;
        prop_assert!(((exact - quad) / quad).abs() < 1e-6, "{exact} vs {quad}");
    }

    #[test]
    fn asc_is_positive_and_parts_are_consistent(
        n in 1u32..=10,
        l in link(),
        db_b in -10.0f64..30.0,
        db_e in -10.0f64..20.0,
    ) {
        let shape = moment_match(n, &l, &l).unwrap();
        let cfg = SecrecyConfig::new(
            1.0,
            shape.at_snr(10f64.powf(db_b / 10.0)),
            shape.at_snr(10f64.powf(db_e / 10.0)),
        ).unwrap();
        let asc = asc_quadrature(&cfg).unwrap();
        prop_assert!(asc.total > 0.0);
        prop_assert!(((asc.i1 + asc.i2 - asc.i3) - asc.total).abs() <= 1e-12 * asc.i1.abs().max(asc.total));
    }

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), n in 1u32..=8) {
        let sc = scenario(n, 400, seed);
        let a = simulate(&sc).unwrap();
        let b = simulate(&sc).unwrap();
        prop_assert_eq!(&a.samples, &b.samples);
        let sop = empirical_sop(&a.samples, sc.rate_nats).unwrap();
        prop_assert!((0.0..=1.0).contains(&sop.estimate));
    }
}
