//! Temperatures, heat currents and performance figures.
//!
//! Heat currents are computed internally in rad/ns² (ħ = 1) and reported
//! in GHz² (frequency × rate, both divided by 2π), in attowatt, and in units
//! of Ω_c κ_c.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockSpace, Mode, Operator};
use crate::lindblad::{thermal_populations, DensityMatrix, Liouvillian};
use crate::linalg::hermitian_eigen;
use crate::model::{bose_occupation, occupation_temperature, SystemParams, UnitSystem};

/// Currents with |J_h| below this (rad/ns²) leave the COP undefined.
pub const CURRENT_FLOOR: f64 = 1e-15;

/// Temperature (mK) of the thermal state with mean occupation `mean_n` at
/// frequency `omega_ghz`.
pub fn temperature_from_energy(mean_n: f64, omega_ghz: f64) -> Result<f64> {
    if !(mean_n >= 0.0) {
        return Err(Error::InvalidArgument(format!("mean occupation must be non-negative, got {mean_n}")));
    }
    Ok(occupation_temperature(mean_n, omega_ghz))
}

/// Shannon entropy (nats) of a probability vector; negative entries count as 0.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// Von Neumann entropy (nats) of a Hermitian matrix.
pub fn von_neumann_entropy(rho: &Mat<C64>) -> Result<f64> {
    let (w, _) = hermitian_eigen(rho)?;
    Ok(shannon_entropy(&w))
}

/// Thermal populations at `temperature_mk` on a ladder of `dim` levels.
pub fn thermal_state_populations(temperature_mk: f64, omega_ghz: f64, dim: usize) -> Vec<f64> {
    thermal_populations(bose_occupation(omega_ghz, temperature_mk), dim)
}

/// Temperature (mK) of the thermal state on the same truncated ladder with
/// the same von Neumann entropy.
pub fn temperature_from_entropy(rho_reduced: &Mat<C64>, omega_ghz: f64) -> Result<f64> {
    let dim = rho_reduced.nrows();
    let s = von_neumann_entropy(rho_reduced)?;
    temperature_for_entropy(s, omega_ghz, dim)
}

/// Inverts T ↦ S(thermal(T)) on a `dim`-level ladder by bisection.
pub fn temperature_for_entropy(s: f64, omega_ghz: f64, dim: usize) -> Result<f64> {
    let s_max = (dim as f64).ln();
    if s <= 1e-14 {
        return Ok(0.0);
    }
    if s >= s_max - 1e-12 {
        return Err(Error::TruncationTooSmall { entropy: s, max: s_max });
    }
    let entropy_at = |t: f64| shannon_entropy(&thermal_state_populations(t, omega_ghz, dim));
    let mut hi = 1e3 * omega_ghz / UnitSystem::KB_OVER_H;
    while entropy_at(hi) < s {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::TruncationTooSmall { entropy: s, max: s_max });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let sm = entropy_at(mid);
        if (sm - s).abs() <= 1e-10 && hi - lo <= 1e-12 * hi {
            return Ok(mid);
        }
        if sm < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// J_α = Ω_α κ_α (n_B − ⟨n_α⟩) in rad/ns²; positive when heat flows from the
/// bath into the oscillator.
pub fn heat_current(mode: Mode, rho: &DensityMatrix, params: &SystemParams) -> Result<f64> {
    let osc = params.oscillator(mode);
    let n = rho.mean_n(mode.label())?;
    Ok(osc.omega() * osc.kappa() * (osc.bath_occupation() - n))
}

/// Tr{O L_α(ρ)} for the part of the generator attached to bath `mode`.
pub fn traced_current(l: &Liouvillian, mode: Mode, rho: &DensityMatrix, op: &Operator) -> Result<f64> {
    Ok(l.apply_bath(mode.label(), rho)?.expectation(op)?.re)
}

/// Current ratio J_c/J_h, or `None` when |J_h| is below [`CURRENT_FLOOR`].
pub fn cop(j_c: f64, j_h: f64) -> Option<f64> {
    (j_h.abs() > CURRENT_FLOOR).then(|| j_c / j_h)
}

/// Ω_c/Ω_h.
pub fn cop_frequency(params: &SystemParams) -> f64 {
    params.c.omega_ghz / params.h.omega_ghz
}

fn inverse_thermal(omega_ghz: f64, temperature_mk: f64) -> f64 {
    if temperature_mk == 0.0 {
        f64::INFINITY
    } else {
        omega_ghz / UnitSystem::thermal_frequency(temperature_mk)
    }
}

/// Ω_r/k_BT_r − Ω_h/k_BT_h − Ω_c/k_BT_c; cooling is allowed when positive.
pub fn cooling_condition(params: &SystemParams) -> f64 {
    inverse_thermal(params.r.omega_ghz, params.r.temperature_mk)
        - inverse_thermal(params.h.omega_ghz, params.h.temperature_mk)
        - inverse_thermal(params.c.omega_ghz, params.c.temperature_mk)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CarnotCop {
    Finite(f64),
    Infinite,
}

impl CarnotCop {
    pub fn value(self) -> Option<f64> {
        match self {
            CarnotCop::Finite(v) => Some(v),
            CarnotCop::Infinite => None,
        }
    }
}

/// (1 − T_r/T_h)/(T_r/T_c − 1).
pub fn carnot_cop(params: &SystemParams) -> CarnotCop {
    let (tc, th, tr) = (params.c.temperature_mk, params.h.temperature_mk, params.r.temperature_mk);
    if tr == tc {
        return CarnotCop::Infinite;
    }
    let hot = if th.is_infinite() { 1.0 } else { 1.0 - tr / th };
    CarnotCop::Finite(hot / (tr / tc - 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thermality {
    pub tvd: f64,
    pub theta_mk: f64,
    pub populations: Vec<f64>,
    pub thermal: Vec<f64>,
}

/// Total variation distance between the Fock populations of a reduced state
/// and the thermal state of equal mean energy on the same truncation.
pub fn thermality_distance(rho_reduced: &Mat<C64>, omega_ghz: f64) -> Result<Thermality> {
    let dim = rho_reduced.nrows();
    let populations: Vec<f64> = (0..dim).map(|i| rho_reduced[(i, i)].re).collect();
    let mean_n: f64 = populations.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let theta_mk = temperature_from_energy(mean_n.max(0.0), omega_ghz)?;
    let thermal = thermal_populations(mean_n.max(0.0), dim);
    let tvd = 0.5 * populations.iter().zip(&thermal).map(|(p, q)| (p - q).abs()).sum::<f64>();
    Ok(Thermality {
        tvd,
        theta_mk,
        populations,
        thermal,
    })
}

/// Heat currents of the three modes in every reported unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Currents {
    /// rad/ns² (ħ = 1).
    pub internal: [f64; 3],
    pub ghz2: [f64; 3],
    pub attowatt: [f64; 3],
    /// In units of Ω_c κ_c.
    pub dimensionless: [f64; 3],
}

impl Currents {
    pub fn from_internal(internal: [f64; 3], params: &SystemParams) -> Self {
        let two_pi_sq = (2.0 * std::f64::consts::PI).powi(2);
        let unit = params.c.omega() * params.c.kappa();
        Self {
            internal,
            ghz2: internal.map(|j| j / two_pi_sq),
            attowatt: internal.map(UnitSystem::power_attowatt),
            dimensionless: internal.map(|j| if unit > 0.0 { j / unit } else { f64::NAN }),
        }
    }
}

/// Everything reported about one state of the refrigerator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub mean_n: [f64; 3],
    pub bath_n: [f64; 3],
    /// Energy-matched temperature of each mode, mK.
    pub theta_mk: [f64; 3],
    pub theta_c_mk: f64,
    pub theta_c_entropy_mk: Option<f64>,
    /// θ_c / T_c.
    pub ratio: f64,
    pub currents: Currents,
    pub cop_current: Option<f64>,
    pub cop_freq: f64,
    pub cooling_margin: f64,
    pub carnot_cop: Option<f64>,
    pub carnot_infinite: bool,
    pub thermality_tvd: f64,
    /// Tr{Σ_β Ω_β n_β · L_α(ρ)}, rad/ns²; present when a generator was given.
    pub traced_currents: Option<[f64; 3]>,
    /// Tr{H_on · L_α(ρ)}, rad/ns²; reported, not asserted equal to `currents`.
    pub traced_currents_h_on: Option<[f64; 3]>,
}

/// Options for [`ThermoReport::compute`].
pub struct ReportInputs<'a> {
    pub liouvillian: Option<&'a Liouvillian>,
    pub free_hamiltonian: Option<&'a Operator>,
    pub h_on: Option<&'a Operator>,
    pub entropy: bool,
}

impl Default for ReportInputs<'_> {
    fn default() -> Self {
        Self {
            liouvillian: None,
            free_hamiltonian: None,
            h_on: None,
            entropy: true,
        }
    }
}

impl ThermoReport {
    pub fn compute(rho: &DensityMatrix, params: &SystemParams, inputs: ReportInputs<'_>) -> Result<Self> {
        let space: &FockSpace = rho.space();
        if !space.is_fridge() {
            return Err(Error::InvalidArgument("thermodynamic report needs a (c, h, r) space".into()));
        }
        let mut mean_n = [0.0; 3];
        let mut bath_n = [0.0; 3];
        let mut theta = [0.0; 3];
        let mut j = [0.0; 3];
        for m in Mode::ALL {
            let p = m.position();
            let osc = params.oscillator(m);
            mean_n[p] = rho.mean_occupation(p);
            bath_n[p] = osc.bath_occupation();
            theta[p] = temperature_from_energy(mean_n[p].max(0.0), osc.omega_ghz)?;
            j[p] = heat_current(m, rho, params)?;
        }
        let reduced = rho.reduced(Mode::C.label())?;
        let theta_c_entropy = if inputs.entropy {
            Some(temperature_from_entropy(&reduced, params.c.omega_ghz)?)
        } else {
            None
        };
        let thermality = thermality_distance(&reduced, params.c.omega_ghz)?;
        let traced = |op: Option<&Operator>| -> Result<Option<[f64; 3]>> {
            match (inputs.liouvillian, op) {
                (Some(l), Some(op)) => {
                    let mut out = [0.0; 3];
                    for m in Mode::ALL {
                        out[m.position()] = traced_current(l, m, rho, op)?;
                    }
                    Ok(Some(out))
                }
                _ => Ok(None),
            }
        };
        let carnot = carnot_cop(params);
        Ok(Self {
            mean_n,
            bath_n,
            theta_mk: theta,
            theta_c_mk: theta[0],
            theta_c_entropy_mk: theta_c_entropy,
            ratio: theta[0] / params.c.temperature_mk,
            currents: Currents::from_internal(j, params),
            cop_current: cop(j[0], j[1]),
            cop_freq: cop_frequency(params),
            cooling_margin: cooling_condition(params),
            carnot_cop: carnot.value(),
            carnot_infinite: carnot == CarnotCop::Infinite,
            thermality_tvd: thermality.tvd,
            traced_currents: traced(inputs.free_hamiltonian)?,
            traced_currents_h_on: traced(inputs.h_on)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn diag(p: &[f64]) -> Mat<C64> {
        Mat::<C64>::from_fn(p.len(), p.len(), |i, j| if i == j { C64::new(p[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    #[test]
    fn energy_temperature_examples() {
        assert_eq!(temperature_from_energy(0.0, 1.0).unwrap(), 0.0);
        let n = bose_occupation(1.0, 50.0);
        assert!((temperature_from_energy(n, 1.0).unwrap() - 50.0).abs() < 1e-12 * 50.0);
        assert!(temperature_from_energy(-0.1, 1.0).is_err());
        let a = temperature_from_energy(0.3, 1.0).unwrap();
        let b = temperature_from_energy(0.31, 1.0).unwrap();
        assert!(b > a);
    }

    #[test]
    fn entropy_temperature_examples() {
        let pure = diag(&[0.0, 1.0, 0.0]);
        assert_eq!(temperature_from_entropy(&pure, 1.0).unwrap(), 0.0);
        let p = thermal_state_populations(47.0, 1.0, 12);
        let t = temperature_from_entropy(&diag(&p), 1.0).unwrap();
        assert!((t - 47.0).abs() < 1e-6, "{t}");
        let mixed = diag(&[0.5, 0.5]);
        assert!(matches!(
            temperature_from_entropy(&mixed, 1.0),
            Err(Error::TruncationTooSmall { .. })
        ));
        assert!(temperature_for_entropy(0.3, 1.0, 10).unwrap() < temperature_for_entropy(0.4, 1.0, 10).unwrap());
    }

    #[test]
    fn cooling_margin_examples() {
        let p = presets::table1();
        let m = cooling_condition(&p);
        assert!((m - 4.038).abs() < 2e-3, "{m}");
        let eq = p.clone().with_t_hot(50.0);
        assert!(cooling_condition(&eq).abs() < 1e-12);
        let inf = p.clone().with_t_hot(f64::INFINITY);
        let expected = 5.5 / UnitSystem::thermal_frequency(50.0) - 1.0 / UnitSystem::thermal_frequency(50.0);
        assert!((cooling_condition(&inf) - expected).abs() < 1e-12);
    }

    #[test]
    fn carnot_examples() {
        let mut p = presets::table1();
        assert_eq!(carnot_cop(&p), CarnotCop::Infinite);
        p.r.temperature_mk = 60.0;
        let CarnotCop::Finite(v) = carnot_cop(&p) else { panic!() };
        assert!((v - (1.0 - 60.0 / 768.0) / 0.2).abs() < 1e-12);
        assert!((v - 4.609).abs() < 1e-3);
        p.h.temperature_mk = f64::INFINITY;
        assert_eq!(carnot_cop(&p), CarnotCop::Finite(1.0 / (60.0 / 50.0 - 1.0)));
    }

    #[test]
    fn thermality_examples() {
        let p = thermal_populations(0.7, 60);
        assert!(thermality_distance(&diag(&p), 1.0).unwrap().tvd < 1e-15);
        let mut fock = vec![0.0; 80];
        fock[1] = 1.0;
        let t = thermality_distance(&diag(&fock), 1.0).unwrap();
        assert!((t.tvd - 0.75).abs() < 1e-12);
        assert!((t.thermal[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cop_floor() {
        assert_eq!(cop(1.0, 0.0), None);
        assert_eq!(cop(1.0, 4.0), Some(0.25));
        assert!((cop_frequency(&presets::table1()) - 1.0 / 4.5).abs() < 1e-15);
    }
}
