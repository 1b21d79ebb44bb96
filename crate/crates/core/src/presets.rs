//! Bundled parameter sets.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{OscillatorParams, SystemParams, UnitSystem};
use crate::protocols::{linear_grid, log_grid, rwa_schedule, FitMode, Schedule, SweepParam};

/// Truncation certified for [`table1`].
pub const TABLE1_DIMS: [usize; 3] = [12, 64, 8];
/// Truncation for the half-temperature parameter sets.
pub const HALF_TH_DIMS: [usize; 3] = [8, 30, 8];
/// Smaller truncation for the dense lab-frame comparison at half T_h.
pub const APP_B_DIMS: [usize; 3] = [6, 16, 6];

/// Ω/2π = (1, 4.5, 5.5) GHz, κ/2π = (0.01, 0.01, 0.025) GHz, E_J/2π = 0.2 GHz,
/// λ = 0.3, T_h = 768 mK, T_c = T_r = 50 mK, φ = π/2.
pub fn table1() -> SystemParams {
    SystemParams::resonant(
        OscillatorParams::new(1.0, 0.01, 50.0, 0.3),
        OscillatorParams::new(4.5, 0.01, 768.0, 0.3),
        OscillatorParams::new(5.5, 0.025, 50.0, 0.3),
        0.2,
        FRAC_PI_2,
        TABLE1_DIMS,
    )
}

/// Hot bath with k_B T_h = 8 h·(Ω_c/2π).
pub fn half_hot_temperature_mk() -> f64 {
    1e3 * 8.0 * table1().c.omega_ghz / UnitSystem::KB_OVER_H
}

/// [`table1`] with T_h halved, sized for the dense lab-frame run.
pub fn app_b() -> SystemParams {
    table1().with_t_hot(half_hot_temperature_mk()).with_dims(APP_B_DIMS)
}

/// Weak damping κ/2π = 0.001·Ω_c/2π on every mode and T_h halved.
pub fn fig3() -> SystemParams {
    let p = table1().with_t_hot(half_hot_temperature_mk()).with_dims(HALF_TH_DIMS);
    let k = 1e-3 * p.c.omega_ghz;
    p.with_kappa(k)
}

/// Truncation used by the time-dependent and sweep presets at the `table1`
/// temperatures.
pub const REDUCED_DIMS: [usize; 3] = [8, 40, 8];

/// [`table1`] with the reduced truncation, for runs that repeat many solves.
pub fn fig1b() -> SystemParams {
    table1().with_dims(REDUCED_DIMS)
}

/// Experiment attached to a preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Experiment {
    Steady,
    Schedule {
        schedule: Schedule,
    },
    Transient,
    Sweep {
        param: SweepParam,
        values: Vec<f64>,
        #[serde(default)]
        hot_tail: Option<f64>,
    },
    Fit {
        schedule: Schedule,
        mode: FitMode,
    },
    Rwa {
        schedule: Schedule,
    },
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub params: SystemParams,
    pub experiment: Experiment,
}

/// Alternating on/off windows of 120 ns, two cycles.
pub fn fig1b_schedule() -> Schedule {
    Schedule::on_off(120.0, 120.0, 2, 1.0)
}

/// Single "on" window of 100 ns for fitting E_J′.
pub fn fit_schedule() -> Schedule {
    Schedule::single(FRAC_PI_2, 100.0, 1.0)
}

pub fn all() -> Vec<Preset> {
    vec![
        Preset {
            name: "table1",
            description: "Steady state at the reference parameters",
            params: table1(),
            experiment: Experiment::Steady,
        },
        Preset {
            name: "fig1b",
            description: "On/off switching schedule from the bath-thermal state",
            params: fig1b(),
            experiment: Experiment::Schedule {
                schedule: fig1b_schedule(),
            },
        },
        Preset {
            name: "fig2",
            description: "Steady θ_c versus E_J, 12 log-spaced points up to 0.2 GHz",
            params: fig1b(),
            experiment: Experiment::Sweep {
                param: SweepParam::Ej,
                values: log_grid(0.01, 0.2, 12),
                hot_tail: None,
            },
        },
        Preset {
            name: "fig2_inset",
            description: "Steady θ_c versus T_h, 15 points from 200 to 2000 mK",
            params: table1().with_dims([6, 20, 6]),
            experiment: Experiment::Sweep {
                param: SweepParam::THot,
                values: linear_grid(200.0, 2000.0, 15),
                hot_tail: Some(1e-4),
            },
        },
        Preset {
            name: "fig3",
            description: "Switch-off at the first temperature minimum, weak damping, T_h halved",
            params: fig3(),
            experiment: Experiment::Transient,
        },
        Preset {
            name: "appB",
            description: "Lab-frame versus rotating-frame evolution, T_h halved",
            params: app_b(),
            experiment: Experiment::Rwa {
                schedule: rwa_schedule(&app_b()),
            },
        },
        Preset {
            name: "appC",
            description: "Thermality of the steady reduced cold state",
            params: table1(),
            experiment: Experiment::Steady,
        },
    ]
}

pub fn by_name(name: &str) -> Result<Preset> {
    all().into_iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = all().iter().map(|p| p.name).collect();
        Error::Validation(format!("unknown preset `{name}` (available: {})", names.join(", ")))
    })
}
