use gaugefix::config::{Formulation, Outputs, RunConfig, Scenario, Stepper};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6_f64, Just(0.0), Just(std::f64::consts::PI), 1e-300..1e-200_f64]
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    (
        (
            prop_oneof![Just(Scenario::PlaneWave), Just(Scenario::ContaminatedPlaneWave), Just(Scenario::RandomSmooth)],
            4usize..128,
            finite(),
            finite(),
            finite(),
            prop_oneof![Just(Formulation::Canonical), Just(Formulation::GaugeFixed)],
            prop_oneof![Just(Stepper::Rk4), Just(Stepper::StormerVerlet)],
        ),
        (
            proptest::option::of(1usize..100),
            proptest::option::of(1usize..100),
            proptest::option::of(proptest::array::uniform3(-5i64..5)),
            proptest::option::of(proptest::array::uniform3(finite())),
            finite(),
            finite(),
            proptest::option::of(any::<u64>()),
            proptest::option::of(0usize..10),
            any::<bool>(),
            proptest::option::of("[a-z]{1,8}\\.csv"),
        ),
    )
        .prop_map(|(a, b)| RunConfig {
            scenario: a.0,
            grid_n: a.1,
            domain_length: a.2,
            dt: a.3,
            t_end: a.4,
            formulation: a.5,
            stepper: a.6,
            reproject_every: b.0,
            diagnostics_stride: b.1,
            mode: b.2,
            polarization: b.3,
            amplitude: b.4,
            contamination: b.5,
            seed: b.6,
            max_mode: b.7,
            project_initial: b.8,
            output: Outputs {
                csv: b.9.map(Into::into),
                final_snapshot: None,
            },
        })
}

proptest! {
    #![proptest_config(Config { cases: 256, rng_seed: RngSeed::Fixed(11), failure_persistence: None, ..Config::default() })]

    #[test]
    fn parse_serialize_parse_is_identity(cfg in run_config()) {
        let once = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(&once, &cfg);
        let twice = RunConfig::from_json(&once.to_json().unwrap()).unwrap();
        prop_assert_eq!(twice, once);
    }
}
