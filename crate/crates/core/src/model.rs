//! Physical parameters and Hamiltonians of the refrigerator.
//!
//! User-facing frequencies are ordinary frequencies in GHz and temperatures
//! are in mK. Internally every energy and rate is an angular frequency in
//! rad/ns (ħ = 1), so time is measured in ns.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    a_nonlinear, annihilation, displacement_phase, embed, number, FockSpace, Mode, Operator,
};
use crate::sparse::CsrMatrix;

/// Unit conventions shared by the whole crate.
pub struct UnitSystem;

impl UnitSystem {
    /// k_B / h in GHz per kelvin.
    pub const KB_OVER_H: f64 = 20.836619;
    /// h / e² in ohm.
    pub const RESISTANCE_QUANTUM: f64 = 25812.807;
    /// ħ in J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;

    /// Ordinary frequency (GHz) to angular frequency (rad/ns).
    pub fn angular(freq_ghz: f64) -> f64 {
        2.0 * PI * freq_ghz
    }

    /// Thermal energy k_B·T expressed as a frequency in GHz.
    pub fn thermal_frequency(temperature_mk: f64) -> f64 {
        Self::KB_OVER_H * temperature_mk * 1e-3
    }

    /// Converts an internal power (rad²/ns²) into attowatt.
    pub fn power_attowatt(j_internal: f64) -> f64 {
        Self::HBAR * j_internal * 1e18 * 1e18
    }
}

/// Bose-Einstein occupation of a bath mode at `omega_ghz` and `temperature_mk`.
pub fn bose_occupation(omega_ghz: f64, temperature_mk: f64) -> f64 {
    if temperature_mk <= 0.0 {
        return 0.0;
    }
    let x = omega_ghz / UnitSystem::thermal_frequency(temperature_mk);
    1.0 / x.exp_m1()
}

/// Temperature (mK) at which a mode at `omega_ghz` has occupation `mean_n`.
/// Inverse of [`bose_occupation`]; zero occupation maps to zero temperature.
pub fn occupation_temperature(mean_n: f64, omega_ghz: f64) -> f64 {
    if mean_n <= 0.0 {
        return 0.0;
    }
    1e3 * (omega_ghz / UnitSystem::KB_OVER_H) / (1.0 / mean_n).ln_1p()
}

/// Zero-point phase amplitude λ = √(π Z / R_Q) of a resonator with impedance Z.
pub fn lambda_from_impedance(impedance_ohm: f64) -> Result<f64> {
    if !(impedance_ohm > 0.0) || !impedance_ohm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "impedance must be positive, got {impedance_ohm} Ω"
        )));
    }
    Ok((PI * impedance_ohm / UnitSystem::RESISTANCE_QUANTUM).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorParams {
    /// Ω/2π in GHz.
    pub omega_ghz: f64,
    /// κ/2π in GHz.
    pub kappa_ghz: f64,
    /// Bath temperature in mK.
    pub temperature_mk: f64,
    /// Zero-point phase amplitude (dimensionless).
    pub lambda: f64,
}

impl OscillatorParams {
    pub fn new(omega_ghz: f64, kappa_ghz: f64, temperature_mk: f64, lambda: f64) -> Self {
        Self {
            omega_ghz,
            kappa_ghz,
            temperature_mk,
            lambda,
        }
    }

    pub fn validate(&self, label: &str) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::Validation(format!("oscillator {label}: {what} (got {v})")))
        };
        if !(self.omega_ghz > 0.0) || !self.omega_ghz.is_finite() {
            return bad("omega_ghz must be positive", self.omega_ghz);
        }
        if !(self.kappa_ghz >= 0.0) || !self.kappa_ghz.is_finite() {
            return bad("kappa_ghz must be non-negative", self.kappa_ghz);
        }
        if !(self.temperature_mk >= 0.0) || !self.temperature_mk.is_finite() {
            return bad("temperature_mk must be non-negative", self.temperature_mk);
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be positive", self.lambda);
        }
        Ok(())
    }

    pub fn bath_occupation(&self) -> f64 {
        bose_occupation(self.omega_ghz, self.temperature_mk)
    }

    /// Ω in rad/ns.
    pub fn omega(&self) -> f64 {
        UnitSystem::angular(self.omega_ghz)
    }

    /// κ in 1/ns.
    pub fn kappa(&self) -> f64 {
        UnitSystem::angular(self.kappa_ghz)
    }
}

pub const DEFAULT_RESONANCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub c: OscillatorParams,
    pub h: OscillatorParams,
    pub r: OscillatorParams,
    /// E_J/2π in GHz.
    pub ej_ghz: f64,
    /// External phase bias in radians.
    pub phi_rad: f64,
    /// Fock truncation per mode in (c, h, r) order.
    pub dims: [usize; 3],
    /// Allowed relative violation of Ω_r = Ω_c + Ω_h.
    #[serde(default = "default_resonance_tol")]
    pub resonance_tol: f64,
}

fn default_resonance_tol() -> f64 {
    DEFAULT_RESONANCE_TOL
}

impl SystemParams {
    /// Builds parameters with Ω_r fixed to Ω_c + Ω_h.
    pub fn resonant(
        c: OscillatorParams,
        h: OscillatorParams,
        mut r: OscillatorParams,
        ej_ghz: f64,
        phi_rad: f64,
        dims: [usize; 3],
    ) -> Self {
        r.omega_ghz = c.omega_ghz + h.omega_ghz;
        Self {
            c,
            h,
            r,
            ej_ghz,
            phi_rad,
            dims,
            resonance_tol: DEFAULT_RESONANCE_TOL,
        }
    }

    pub fn oscillator(&self, mode: Mode) -> &OscillatorParams {
        match mode {
            Mode::C => &self.c,
            Mode::H => &self.h,
            Mode::R => &self.r,
        }
    }

    pub fn oscillator_mut(&mut self, mode: Mode) -> &mut OscillatorParams {
        match mode {
            Mode::C => &mut self.c,
            Mode::H => &mut self.h,
            Mode::R => &mut self.r,
        }
    }

    pub fn resonance_residual(&self) -> f64 {
        (self.r.omega_ghz - self.c.omega_ghz - self.h.omega_ghz).abs() / self.r.omega_ghz
    }

    pub fn validate(&self) -> Result<()> {
        for mode in Mode::ALL {
            self.oscillator(mode).validate(mode.label())?;
        }
        if !(self.ej_ghz >= 0.0) || !self.ej_ghz.is_finite() {
            return Err(Error::Validation(format!(
                "ej_ghz must be non-negative, got {}",
                self.ej_ghz
            )));
        }
        if !self.phi_rad.is_finite() {
            return Err(Error::Validation("phi_rad must be finite".into()));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(Error::Validation(format!("truncation {d} is below 2")));
        }
        let residual = self.resonance_residual();
        if residual > self.resonance_tol {
            return Err(Error::Validation(format!(
                "resonance violated: |Ω_r − Ω_c − Ω_h|/Ω_r = {residual:e} > {:e}",
                self.resonance_tol
            )));
        }
        Ok(())
    }

    /// Weak-coupling warnings: the local master equation assumes κ, E_J ≪ Ω.
    pub fn advisories(&self) -> Vec<String> {
        let min_omega = Mode::ALL
            .iter()
            .map(|&m| self.oscillator(m).omega_ghz)
            .fold(f64::INFINITY, f64::min);
        let limit = 0.25 * min_omega;
        let mut out = Vec::new();
        if self.ej_ghz >= limit {
            out.push(format!(
                "ej_ghz = {} is not small against min(omega) = {min_omega} GHz; the local master equation may be inaccurate",
                self.ej_ghz
            ));
        }
        for mode in Mode::ALL {
            let k = self.oscillator(mode).kappa_ghz;
            if k >= limit {
                out.push(format!(
                    "kappa_ghz of {mode} = {k} is not small against min(omega) = {min_omega} GHz"
                ));
            }
        }
        out
    }

    pub fn space(&self) -> Result<FockSpace> {
        FockSpace::fridge(self.dims[0], self.dims[1], self.dims[2])
    }

    /// E_J in rad/ns.
    pub fn ej(&self) -> f64 {
        UnitSystem::angular(self.ej_ghz)
    }

    pub fn with_phi(mut self, phi_rad: f64) -> Self {
        self.phi_rad = phi_rad;
        self
    }

    pub fn with_ej(mut self, ej_ghz: f64) -> Self {
        self.ej_ghz = ej_ghz;
        self
    }

    pub fn with_dims(mut self, dims: [usize; 3]) -> Self {
        self.dims = dims;
        self
    }

    pub fn with_t_hot(mut self, t_mk: f64) -> Self {
        self.h.temperature_mk = t_mk;
        self
    }

    /// Sets λ on all three oscillators.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        for m in Mode::ALL {
            self.oscillator_mut(m).lambda = lambda;
        }
        self
    }

    /// Sets κ on all three oscillators.
    pub fn with_kappa(mut self, kappa_ghz: f64) -> Self {
        for m in Mode::ALL {
            self.oscillator_mut(m).kappa_ghz = kappa_ghz;
        }
        self
    }
}

/// Embedded ladder and number operators of the three modes.
pub struct FridgeOperators {
    pub space: FockSpace,
    pub a: [Operator; 3],
    pub n: [Operator; 3],
}

impl FridgeOperators {
    pub fn new(space: &FockSpace) -> Result<Self> {
        if !space.is_fridge() {
            return Err(Error::InvalidArgument(format!(
                "expected a (c, h, r) space, got {space}"
            )));
        }
        let build = |f: fn(usize) -> Result<Operator>| -> Result<[Operator; 3]> {
            let ops: Vec<Operator> = Mode::ALL
                .iter()
                .map(|m| embed(&f(space.dims()[m.position()])?, m.label(), space))
                .collect::<Result<_>>()?;
            Ok(ops.try_into().expect("three modes"))
        };
        Ok(Self {
            space: space.clone(),
            a: build(annihilation)?,
            n: build(number)?,
        })
    }

    pub fn a(&self, mode: Mode) -> &Operator {
        &self.a[mode.position()]
    }

    pub fn n(&self, mode: Mode) -> &Operator {
        &self.n[mode.position()]
    }

    /// Σ_α Ω_α n_α in rad/ns.
    pub fn free_hamiltonian(&self, params: &SystemParams) -> Operator {
        Mode::ALL.iter().fold(Operator::zeros(&self.space), |acc, &m| {
            acc.add(&self.n(m).scale(params.oscillator(m).omega()))
                .expect("same space")
        })
    }
}

/// (a_r†)^k Â_c(k) Â_h(k) Â_r(k) a_h^k a_c^k, with Â replaced by the identity
/// when `dressed` is false.
fn transfer_term(
    params: &SystemParams,
    ops: &FridgeOperators,
    k: usize,
    dressed: bool,
) -> Result<Operator> {
    let space = &ops.space;
    let mut dressing = Operator::identity(space);
    if dressed {
        for m in Mode::ALL {
            let d = space.dims()[m.position()];
            let a_k = a_nonlinear(k, params.oscillator(m).lambda, d)?;
            dressing = dressing.mul(&embed(&a_k, m.label(), space)?)?;
        }
    }
    ops.a(Mode::R)
        .adjoint()
        .pow(k)
        .mul(&dressing)?
        .mul(&ops.a(Mode::H).pow(k))?
        .mul(&ops.a(Mode::C).pow(k))
}

fn fridge_ops(space: &FockSpace) -> Result<FridgeOperators> {
    FridgeOperators::new(space)
}

/// H_on = −E_J [a_r† Â_h(1) Â_c(1) Â_r(1) a_c a_h + h.c.]
pub fn build_h_on(params: &SystemParams, space: &FockSpace) -> Result<Operator> {
    let ops = fridge_ops(space)?;
    Ok(transfer_term(params, &ops, 1, true)?
        .plus_adjoint()
        .scale(-params.ej()))
}

/// H_off = E_J [(a_r†)² Â_h(2) Â_c(2) Â_r(2) a_c² a_h² + h.c.]
pub fn build_h_off(params: &SystemParams, space: &FockSpace) -> Result<Operator> {
    let ops = fridge_ops(space)?;
    Ok(transfer_term(params, &ops, 2, true)?
        .plus_adjoint()
        .scale(params.ej()))
}

/// Combines on/off parts as sin φ · H_on + cos φ · H_off. Coefficients below
/// machine epsilon are dropped so φ = π/2 and φ = 0 select one part exactly.
pub fn mix_on_off(phi_rad: f64, h_on: &Operator, h_off: &Operator) -> Result<Operator> {
    let (s, c) = phi_rad.sin_cos();
    let mut h = Operator::zeros(h_on.space());
    if s.abs() > f64::EPSILON {
        h = h.add(&h_on.scale(s))?;
    }
    if c.abs() > f64::EPSILON {
        h = h.add(&h_off.scale(c))?;
    }
    Ok(h)
}

/// H ≃ sin φ · H_on + cos φ · H_off
pub fn build_h_rwa(params: &SystemParams, space: &FockSpace) -> Result<Operator> {
    mix_on_off(params.phi_rad, &build_h_on(params, space)?, &build_h_off(params, space)?)
}

/// Warnings for a series truncation whose highest photon order exceeds a mode
/// dimension (those terms vanish identically).
pub fn series_advisories(space: &FockSpace, k_max: usize) -> Vec<String> {
    let order = 2 * k_max;
    space
        .labels()
        .iter()
        .zip(space.dims())
        .filter(|(_, &d)| order >= d)
        .map(|(l, d)| {
            format!("series order {order} reaches the truncation {d} of mode {l}; those terms vanish")
        })
        .collect()
}

/// Resonant rotating-frame Hamiltonian kept to index `k_max` of the on/off
/// sums: the on part collects photon orders 2k−1 with sign (−1)^k, the off
/// part orders 2k with sign (−1)^{k+1}. The photon-number-conserving k = 0
/// term −E_J cos φ Â_c(0)Â_h(0)Â_r(0) is added when `include_k0` is set.
pub fn build_rwa_series(
    params: &SystemParams,
    space: &FockSpace,
    k_max: usize,
    include_k0: bool,
) -> Result<Operator> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    for w in series_advisories(space, k_max) {
        log::warn!("{w}");
    }
    let ops = fridge_ops(space)?;
    let ej = params.ej();
    let (s, c) = params.phi_rad.sin_cos();
    let mut on = Operator::zeros(space);
    let mut off = Operator::zeros(space);
    for k in 1..=k_max {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let odd = 2 * k - 1;
        let even = 2 * k;
        on = on.add(&transfer_term(params, &ops, odd, true)?.plus_adjoint().scale(sign * ej))?;
        off = off.add(&transfer_term(params, &ops, even, true)?.plus_adjoint().scale(-sign * ej))?;
    }
    let mut h = mix_on_off(params.phi_rad, &on, &off)?;
    if include_k0 && c.abs() > f64::EPSILON {
        h = h.add(&transfer_term(params, &ops, 0, true)?.scale(-ej * c))?;
    }
    let _ = s;
    Ok(h)
}

/// Lab-frame Hamiltonian Σ Ω_α n_α − E_J cos(2φ̂_c + 2φ̂_h + 2φ̂_r + φ) with the
/// cosine assembled from displacement-phase operators. Dense.
pub fn build_h_full(params: &SystemParams, space: &FockSpace) -> Result<Operator> {
    let ops = fridge_ops(space)?;
    let mut u = CsrMatrix::identity(1);
    for m in Mode::ALL {
        let d = space.dims()[m.position()];
        let dp = displacement_phase(params.oscillator(m).lambda, d)?;
        u = u.kron(dp.matrix());
    }
    let u = Operator::new(space.clone(), u)?.scale(C64::from_polar(1.0, params.phi_rad));
    let cosine = u.plus_adjoint().scale(-0.5 * params.ej());
    ops.free_hamiltonian(params).add(&cosine)
}

/// Simplified on/off Hamiltonians with bare ladder operators:
/// H_on = −E_J′[a_r† a_c a_h + h.c.], H_off = E_J″[(a_r†)² a_c² a_h² + h.c.].
/// Couplings are ordinary frequencies in GHz.
pub fn build_h_simplified(
    ej_prime_ghz: f64,
    ej_doubleprime_ghz: f64,
    params: &SystemParams,
    space: &FockSpace,
) -> Result<(Operator, Operator)> {
    let ops = fridge_ops(space)?;
    let on = transfer_term(params, &ops, 1, false)?
        .plus_adjoint()
        .scale(-UnitSystem::angular(ej_prime_ghz));
    let off = transfer_term(params, &ops, 2, false)?
        .plus_adjoint()
        .scale(UnitSystem::angular(ej_doubleprime_ghz));
    Ok((on, off))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::a_nonlinear_diagonal;

    fn table1(dims: [usize; 3]) -> SystemParams {
        SystemParams::resonant(
            OscillatorParams::new(1.0, 0.01, 50.0, 0.3),
            OscillatorParams::new(4.5, 0.01, 768.0, 0.3),
            OscillatorParams::new(5.5, 0.025, 50.0, 0.3),
            0.2,
            PI / 2.0,
            dims,
        )
    }

    #[test]
    fn bose_occupation_examples() {
        let x: f64 = 1.0 / (0.050 * 20.836619);
        assert!((x - 0.959847).abs() < 5e-6);
        assert!((bose_occupation(1.0, 50.0) - 1.0 / x.exp_m1()).abs() < 1e-15);
        assert!((bose_occupation(1.0, 50.0) - 0.620616).abs() < 1e-6);
        assert!((bose_occupation(4.5, 768.0) - 3.079519).abs() < 1e-6);
        assert_eq!(bose_occupation(3.0, 0.0), 0.0);
    }

    #[test]
    fn occupation_round_trip() {
        for &(f, t) in &[(1.0, 50.0), (4.5, 768.0), (5.5, 3.0), (0.1, 2000.0)] {
            let n = bose_occupation(f, t);
            let back = occupation_temperature(n, f);
            assert!(((back - t) / t).abs() < 1e-12, "{f} {t} {back}");
        }
    }

    #[test]
    fn lambda_from_impedance_examples() {
        let z1 = UnitSystem::RESISTANCE_QUANTUM / PI;
        assert!((lambda_from_impedance(z1).unwrap() - 1.0).abs() < 1e-15);
        let z = 0.09 * UnitSystem::RESISTANCE_QUANTUM / PI;
        assert!((z - 739.4).abs() < 0.1);
        assert!((lambda_from_impedance(739.4).unwrap() - 0.3).abs() < 1e-4);
        assert!(lambda_from_impedance(1e-12).unwrap() < 1e-7);
        assert!(lambda_from_impedance(0.0).is_err());
        assert!(lambda_from_impedance(-3.0).is_err());
    }

    #[test]
    fn validation_and_advisories() {
        let p = table1([4, 4, 3]);
        p.validate().unwrap();
        assert!(p.advisories().is_empty());
        let mut bad = p.clone();
        bad.r.omega_ghz = 5.6;
        assert!(matches!(bad.validate(), Err(Error::Validation(_))));
        let mut neg = p.clone();
        neg.h.kappa_ghz = -1.0;
        assert!(neg.validate().is_err());
        let strong = p.clone().with_ej(0.5);
        assert_eq!(strong.advisories().len(), 1);
    }

    #[test]
    fn h_on_matrix_element() {
        let p = table1([3, 3, 3]);
        let space = p.space().unwrap();
        let h = build_h_on(&p, &space).unwrap();
        let from = space.index_of(&[1, 1, 0]);
        let to = space.index_of(&[0, 0, 1]);
        let a0 = a_nonlinear_diagonal(1, 0.3, 3).unwrap()[0];
        let expected = -p.ej() * a0.powi(3);
        assert!((h.get(to, from).re - expected).abs() < 1e-14);
        assert!((a0.powi(3) - 0.125872).abs() < 5e-6);
        for i in 0..space.dim() {
            assert_eq!(h.get(i, i), C64::new(0.0, 0.0));
        }
        assert!(h.is_hermitian(1e-12));
    }

    #[test]
    fn h_on_conserves_photon_combinations_and_energy() {
        let p = table1([4, 5, 3]);
        let space = p.space().unwrap();
        let ops = FridgeOperators::new(&space).unwrap();
        let h = build_h_on(&p, &space).unwrap();
        let q1 = ops.n(Mode::C).sub(ops.n(Mode::H)).unwrap();
        let q2 = ops.n(Mode::C).add(ops.n(Mode::R)).unwrap();
        assert_eq!(q1.commutator(&h).unwrap().matrix().max_abs(), 0.0);
        assert_eq!(q2.commutator(&h).unwrap().matrix().max_abs(), 0.0);
        let h0 = ops.free_hamiltonian(&p);
        assert!(h0.commutator(&h).unwrap().matrix().max_abs() < 1e-12);
    }

    #[test]
    fn h_off_matrix_element_and_structure() {
        let p = table1([3, 3, 3]);
        let space = p.space().unwrap();
        let h = build_h_off(&p, &space).unwrap();
        let a2 = a_nonlinear_diagonal(2, 0.3, 3).unwrap()[0];
        assert!((a2 - 0.150348).abs() < 1e-6);
        let from = space.index_of(&[2, 2, 0]);
        let to = space.index_of(&[0, 0, 2]);
        let expected = p.ej() * 2f64.sqrt().powi(3) * a2.powi(3);
        assert!((h.get(to, from).re - expected).abs() < 1e-14);
        assert!((expected / p.ej() - 0.009612).abs() < 1e-6);
        // brute force: explicit product of embedded operators
        let ops = FridgeOperators::new(&space).unwrap();
        let mut dress = Operator::identity(&space);
        for m in Mode::ALL {
            dress = dress
                .mul(&embed(&a_nonlinear(2, 0.3, 3).unwrap(), m.label(), &space).unwrap())
                .unwrap();
        }
        let t = ops.a(Mode::R).adjoint().pow(2)
            .mul(&dress).unwrap()
            .mul(&ops.a(Mode::C).pow(2)).unwrap()
            .mul(&ops.a(Mode::H).pow(2)).unwrap();
        let brute = t.plus_adjoint().scale(p.ej());
        assert!(brute.max_abs_diff(&h).unwrap() < 1e-15 * p.ej());
        // only two-photon moves
        for (i, j, _) in h.matrix().triplets() {
            let a = space.occupations(i);
            let b = space.occupations(j);
            assert_eq!((a[0] as i64 - b[0] as i64).abs(), 2);
        }
        assert!(h.is_hermitian(1e-12));
    }

    #[test]
    fn rwa_mixing() {
        let p = table1([3, 3, 3]);
        let space = p.space().unwrap();
        let on = build_h_on(&p, &space).unwrap();
        let off = build_h_off(&p, &space).unwrap();
        let h = build_h_rwa(&p.clone().with_phi(PI / 2.0), &space).unwrap();
        assert_eq!(h.max_abs_diff(&on).unwrap(), 0.0);
        let h = build_h_rwa(&p.clone().with_phi(0.0), &space).unwrap();
        assert_eq!(h.max_abs_diff(&off).unwrap(), 0.0);
        let h = build_h_rwa(&p.clone().with_phi(PI / 4.0), &space).unwrap();
        let target = on.add(&off).unwrap().scale(1.0 / 2f64.sqrt());
        assert!(h.max_abs_diff(&target).unwrap() < 1e-12);
    }

    #[test]
    fn series_k1_is_rwa_and_signs_are_pinned() {
        for phi in [0.0, 0.3, PI / 2.0, 2.0] {
            let p = table1([3, 3, 3]).with_phi(phi);
            let space = p.space().unwrap();
            let s = build_rwa_series(&p, &space, 1, false).unwrap();
            let h = build_h_rwa(&p, &space).unwrap();
            assert!(s.max_abs_diff(&h).unwrap() < 1e-14);
            assert!(s.is_hermitian(1e-12));
        }
        // on part: k = 1 carries −E_J, k = 2 (photon order 3) carries +E_J
        let p = table1([4, 4, 4]).with_phi(PI / 2.0);
        let space = p.space().unwrap();
        let s = build_rwa_series(&p, &space, 2, false).unwrap();
        let from = space.index_of(&[3, 3, 0]);
        let to = space.index_of(&[0, 0, 3]);
        assert!(s.get(to, from).re > 0.0);
        let from = space.index_of(&[1, 1, 0]);
        let to = space.index_of(&[0, 0, 1]);
        assert!(s.get(to, from).re < 0.0);
        assert!(s.is_hermitian(1e-12));
        assert!(build_rwa_series(&p, &space, 0, false).is_err());
        assert!(!series_advisories(&space, 2).is_empty());
        assert!(series_advisories(&space, 1).is_empty());
    }

    #[test]
    fn series_off_prefactor_small_lambda() {
        let lam = 1e-3;
        let p = table1([3, 3, 3]).with_lambda(lam).with_phi(0.0);
        let space = p.space().unwrap();
        let s = build_rwa_series(&p, &space, 3, false).unwrap();
        let from = space.index_of(&[2, 2, 0]);
        let to = space.index_of(&[0, 0, 2]);
        let bare = 2f64.sqrt().powi(3);
        let pref = s.get(to, from).re / (bare * p.ej());
        let ej_pp = 8.0 * lam.powi(6);
        assert!(((pref - ej_pp) / ej_pp).abs() < 1e-4);
    }

    #[test]
    fn series_converges_to_rwa_at_small_lambda() {
        let p = table1([6, 6, 6]).with_lambda(0.05).with_phi(PI / 4.0);
        let space = p.space().unwrap();
        let s = build_rwa_series(&p, &space, 3, false).unwrap();
        let h = build_h_rwa(&p, &space).unwrap();
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..space.dim() {
            for j in 0..space.dim() {
                let (a, b) = (space.occupations(i), space.occupations(j));
                if a.iter().chain(&b).all(|&n| n < 3) {
                    diff = diff.max((s.get(i, j) - h.get(i, j)).norm());
                    scale = scale.max(h.get(i, j).norm());
                }
            }
        }
        assert!(scale > 0.0);
        assert!(diff / scale <= 1e-3);
    }

    #[test]
    fn full_hamiltonian_limits() {
        let space = FockSpace::fridge(3, 3, 2).unwrap();
        let p = table1([3, 3, 2]).with_ej(0.0);
        let h = build_h_full(&p, &space).unwrap();
        let ops = FridgeOperators::new(&space).unwrap();
        assert!(h.max_abs_diff(&ops.free_hamiltonian(&p)).unwrap() < 1e-14);

        let p = table1([3, 3, 2]).with_lambda(1e-12).with_phi(0.7);
        let h = build_h_full(&p, &space).unwrap();
        let target = ops
            .free_hamiltonian(&p)
            .add(&Operator::identity(&space).scale(-p.ej() * 0.7f64.cos()))
            .unwrap();
        assert!(h.max_abs_diff(&target).unwrap() < 1e-9);

        let p = table1([3, 3, 2]).with_phi(0.4);
        let h = build_h_full(&p, &space).unwrap();
        assert!(h.is_hermitian(1e-12));
        for i in 0..space.dim() {
            assert!(h.get(i, i).im.abs() < 1e-15);
        }
    }

    #[test]
    fn simplified_hamiltonian() {
        let p = table1([3, 3, 3]);
        let space = p.space().unwrap();
        let (on, off) = build_h_simplified(0.05, 0.002, &p, &space).unwrap();
        let from = space.index_of(&[1, 1, 0]);
        let to = space.index_of(&[0, 0, 1]);
        assert!((on.get(to, from).re + UnitSystem::angular(0.05)).abs() < 1e-15);
        assert!(on.is_hermitian(1e-12) && off.is_hermitian(1e-12));

        // small-λ limit of the dressed model with E_J′ = 8λ³E_J
        let lam = 1e-4;
        let p = table1([3, 3, 3]).with_lambda(lam);
        let h_on = build_h_on(&p, &space).unwrap();
        let (simple, _) = build_h_simplified(8.0 * lam.powi(3) * p.ej_ghz, 0.0, &p, &space).unwrap();
        let rel = h_on.max_abs_diff(&simple).unwrap() / simple.matrix().max_abs();
        assert!(rel < 1e-6, "{rel}");
    }
}
