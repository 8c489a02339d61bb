//! Property tests for the structural invariants that hold for arbitrary
//! inputs, not just the pinned fixtures.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use qpmkit::analysis::schmidt_decompose;
use qpmkit::counting::{estimate_gamma, klyshko_efficiency, RateMeasurement};
use qpmkit::domain::DomainConfiguration;
use qpmkit::jsi::DispersionMap;
use qpmkit::spectral::pmf_point;

fn domain_config() -> impl Strategy<Value = DomainConfiguration> {
    proptest::collection::vec((2.0f64..120.0, prop_oneof![Just(1i8), Just(-1i8)]), 1..60).prop_map(
        |pairs| {
            let (widths, signs) = pairs.into_iter().unzip();
            DomainConfiguration::new(widths, signs).expect("strategy yields valid configs")
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// φ(0) integrates the signed nonlinearity exactly.
    #[test]
    fn pmf_at_zero_is_signed_length(config in domain_config()) {
        let expected: f64 = config
            .domains_m()
            .map(|(z0, z1, s)| s * (z1 - z0))
            .sum();
        let phi = pmf_point(&config, 0.0);
        prop_assert!((phi.re - expected).abs() <= 1e-12 * config.total_length_m());
        prop_assert_eq!(phi.im, 0.0);
    }

    /// |φ(Δk)| never exceeds the crystal length, and is conjugate-symmetric
    /// in Δk.
    #[test]
    fn pmf_is_bounded_and_conjugate_symmetric(config in domain_config(), dk in -5e5f64..5e5) {
        let phi = pmf_point(&config, dk);
        prop_assert!(phi.norm() <= config.total_length_m() * (1.0 + 1e-12));
        let mirrored = pmf_point(&config, -dk);
        prop_assert!((mirrored - phi.conj()).norm() <= 1e-12 * config.total_length_m());
    }

    /// Domain CSV serialization round-trips bit-exactly.
    #[test]
    fn domain_csv_round_trip(config in domain_config()) {
        let mut bytes = Vec::new();
        config.save_csv(&mut bytes).expect("write");
        let back = DomainConfiguration::load_csv(bytes.as_slice()).expect("read");
        prop_assert_eq!(back, config);
    }

    /// Schmidt purity is invariant under global complex scaling.
    #[test]
    fn purity_scale_invariance(
        scale_re in -3.0f64..3.0,
        scale_im in -3.0f64..3.0,
        seed in 0u64..1000,
    ) {
        prop_assume!(scale_re.abs() + scale_im.abs() > 1e-3);
        let m = DMatrix::from_fn(9, 9, |i, j| {
            let x = (i as f64 + 1.0) * (j as f64 + 2.0) + seed as f64;
            Complex64::new((x * 0.37).sin(), (x * 0.11).cos())
        });
        let p0 = schmidt_decompose(&m).expect("decompose").purity();
        let scaled = m.map(|v| v * Complex64::new(scale_re, scale_im));
        let p1 = schmidt_decompose(&scaled).expect("decompose").purity();
        prop_assert!((p0 - p1).abs() < 1e-9);
        prop_assert!((1.0 / 9.0..=1.0 + 1e-12).contains(&p0));
    }

    /// Klyshko efficiencies are invariant under a common scaling of all
    /// rates; γ is invariant under independent per-arm losses.
    #[test]
    fn counting_invariances(
        a in 0.05f64..1.0,
        b in 0.05f64..1.0,
        scale in 0.1f64..100.0,
    ) {
        let base = RateMeasurement::new(9e4, 1.1e5, 2e4, 80.9e6, None).expect("rates");
        let h0 = klyshko_efficiency(&base).expect("klyshko");
        let scaled = RateMeasurement::new(9e4 * scale, 1.1e5 * scale, 2e4 * scale, 80.9e6, None)
            .expect("rates");
        let h1 = klyshko_efficiency(&scaled).expect("klyshko");
        prop_assert!((h0.signal - h1.signal).abs() < 1e-12);
        prop_assert!((h0.idler - h1.idler).abs() < 1e-12);

        let g0 = estimate_gamma(&base).expect("gamma").gamma;
        let lossy = RateMeasurement::new(9e4 * a, 1.1e5 * b, 2e4 * a * b, 80.9e6, None)
            .expect("rates");
        let g1 = estimate_gamma(&lossy).expect("gamma").gamma;
        prop_assert!((g0 - g1).abs() < 1e-12);
    }

    /// The dispersive map inverts to sub-femtosecond precision across the
    /// whole delay window.
    #[test]
    fn dispersion_map_inverts(dt in -12_500.0f64..12_500.0, dl in 100.0f64..1000.0) {
        let map = DispersionMap::new(dl, 1549.8, 20.0).expect("map");
        let back = map.wavelength_to_time(map.time_to_wavelength(dt));
        prop_assert!((back - dt).abs() < 1e-6);
    }
}
