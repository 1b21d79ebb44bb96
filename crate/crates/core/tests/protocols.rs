use std::f64::consts::FRAC_PI_2;

use bosonic_fridge::dynamics::EvolveOptions;
use bosonic_fridge::error::Error;
use bosonic_fridge::presets;
use bosonic_fridge::protocols::{
    fit_simplified, run_schedule, rwa_comparison, steady_theta_c, transient_protocol, Coupling, FitMode, FitOptions,
    InitialState, RwaOptions, Schedule, Segment, TransientOptions,
};

#[test]
fn fit_recovers_a_known_simplified_coupling() {
    let p = presets::table1().with_dims([4, 14, 4]);
    let schedule = Schedule::single(FRAC_PI_2, 60.0, 1.0);
    let truth = 0.0123;
    let reference = run_schedule(
        &schedule,
        &p,
        Coupling::Simplified {
            ej_prime_ghz: truth,
            ej_doubleprime_ghz: 0.0,
        },
        EvolveOptions::default(),
    )
    .unwrap();
    let fit = fit_simplified(&reference.records, &schedule, &p, FitMode::On, &FitOptions::default()).unwrap();
    assert!((fit.ej_prime_ghz - truth).abs() / truth < 1e-3, "{fit:?}");
    assert!(fit.residual < 1e-2, "{}", fit.residual);
}

#[test]
fn schedule_records_are_continuous_across_segments() {
    let p = presets::table1().with_dims([4, 12, 4]);
    let schedule = Schedule::on_off(20.0, 20.0, 2, 0.5);
    let run = run_schedule(&schedule, &p, Coupling::Dressed, EvolveOptions::default()).unwrap();
    assert_eq!(run.records.len(), 161);
    for w in run.records.windows(2) {
        assert!((w[1].t_ns - w[0].t_ns - 0.5).abs() < 1e-12);
        assert!((w[1].theta_c_mk - w[0].theta_c_mk).abs() < 1.0);
    }
    assert_eq!(run.records[40].phi_rad, FRAC_PI_2);
    assert_eq!(run.records[41].phi_rad, 0.0);
    assert_eq!(run.records.last().unwrap().t_ns, 80.0);
}

#[test]
fn long_on_segment_approaches_the_steady_state() {
    let p = presets::table1().with_dims([5, 16, 5]);
    let tau = 1.0 / p.c.kappa();
    let schedule = Schedule::single(FRAC_PI_2, (30.0 * tau).round(), 10.0);
    let run = run_schedule(&schedule, &p, Coupling::Dressed, EvolveOptions::default()).unwrap();
    let last = run.records.last().unwrap().theta_c_mk;
    let steady = steady_theta_c(&p).unwrap();
    assert!((last - steady).abs() < 1e-4 * steady, "{last} vs {steady}");
}

#[test]
fn initial_occupations_are_respected() {
    let p = presets::table1().with_dims([6, 10, 4]);
    let schedule = Schedule {
        segments: vec![Segment {
            phi_rad: 0.0,
            duration_ns: 1.0,
        }],
        initial: InitialState::Occupations { n: [0.2, 1.0, 0.01] },
        sample_ns: 1.0,
    };
    let run = run_schedule(&schedule, &p, Coupling::Dressed, EvolveOptions::default()).unwrap();
    let n0 = run.records[0].n;
    assert!((n0[0] - 0.2).abs() < 1e-3 && (n0[1] - 1.0).abs() < 2e-2, "{n0:?}");
}

#[test]
fn invalid_schedules_are_rejected() {
    let p = presets::table1().with_dims([4, 8, 4]);
    for s in [
        Schedule::single(FRAC_PI_2, -1.0, 1.0),
        Schedule::single(FRAC_PI_2, 10.0, 0.0),
        Schedule {
            segments: vec![],
            initial: InitialState::Thermal,
            sample_ns: 1.0,
        },
    ] {
        let e = run_schedule(&s, &p, Coupling::Dressed, EvolveOptions::default()).unwrap_err();
        assert!(e.is_validation(), "{e}");
    }
}

#[test]
fn strong_damping_has_no_qualifying_minimum() {
    let p = presets::table1().with_dims([5, 14, 5]);
    let mut opts = TransientOptions::for_params(&p);
    opts.horizon_ns = 100.0;
    match transient_protocol(&p, &opts) {
        Err(Error::NoOscillation { horizon_ns }) => assert_eq!(horizon_ns, 100.0),
        Ok(r) => assert!(!r.event.qualifying, "{:?}", r.event),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn lab_and_rotating_frames_agree_on_a_tiny_system() {
    let p = presets::app_b().with_dims([3, 6, 3]);
    let schedule = Schedule::on_off(10.0, 5.0, 1, 1.0);
    let cmp = rwa_comparison(&p, &schedule, &RwaOptions::default()).unwrap();
    assert_eq!(cmp.times_ns.len(), 16);
    assert!(cmp.max_rel_dev < 0.05, "{}", cmp.max_rel_dev);
    assert!(cmp.stats_full.max_trace_drift < 1e-8);
}
