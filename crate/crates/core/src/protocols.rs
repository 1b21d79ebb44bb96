//! Experiments built on the solvers: piecewise on/off schedules, the
//! switch-off-at-first-minimum protocol, simplified-model fits, steady-state
//! sweeps and the lab-frame versus rotating-frame comparison.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    default_steady_tol, evolve_split_with, evolve_with, steady_state, EvolveOptions, EvolveStats,
};
use crate::error::{Error, Result};
use crate::fock::{Mode, Operator};
use crate::lindblad::{local_baths, Bath, DensityMatrix, Liouvillian, PairBasis};
use crate::model::{
    build_h_full, build_h_off, build_h_on, build_h_simplified, mix_on_off, occupation_temperature,
    SystemParams,
};
use crate::thermo::{temperature_from_entropy, Currents, ReportInputs, ThermoReport};

/// Piece of a schedule with constant phase bias.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub phi_rad: f64,
    pub duration_ns: f64,
}

/// Starting state of a schedule.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum InitialState {
    /// Product of the thermal states of the attached baths.
    #[default]
    Thermal,
    /// Product of thermal states with the given mean occupations (c, h, r).
    Occupations { n: [f64; 3] },
}

/// Piecewise-constant φ(t) plus sampling interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub initial: InitialState,
    pub sample_ns: f64,
}

impl Schedule {
    pub fn single(phi_rad: f64, duration_ns: f64, sample_ns: f64) -> Self {
        Self {
            segments: vec![Segment { phi_rad, duration_ns }],
            initial: InitialState::Thermal,
            sample_ns,
        }
    }

    /// `cycles` repetitions of an "on" window (φ = π/2) followed by an "off"
    /// window (φ = 0).
    pub fn on_off(on_ns: f64, off_ns: f64, cycles: usize, sample_ns: f64) -> Self {
        let mut segments = Vec::with_capacity(2 * cycles);
        for _ in 0..cycles {
            segments.push(Segment {
                phi_rad: std::f64::consts::FRAC_PI_2,
                duration_ns: on_ns,
            });
            segments.push(Segment {
                phi_rad: 0.0,
                duration_ns: off_ns,
            });
        }
        Self {
            segments,
            initial: InitialState::Thermal,
            sample_ns,
        }
    }

    pub fn duration_ns(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_ns).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Validation("schedule has no segments".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration_ns > 0.0 && s.duration_ns.is_finite()) {
                return Err(Error::Validation(format!(
                    "segment {i}: duration must be positive, got {}",
                    s.duration_ns
                )));
            }
            if !s.phi_rad.is_finite() {
                return Err(Error::Validation(format!("segment {i}: phi must be finite")));
            }
        }
        if !(self.sample_ns > 0.0 && self.sample_ns.is_finite()) {
            return Err(Error::Validation(format!(
                "sample interval must be positive, got {}",
                self.sample_ns
            )));
        }
        if let InitialState::Occupations { n } = &self.initial {
            if n.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(Error::Validation("initial occupations must be finite and non-negative".into()));
            }
        }
        Ok(())
    }
}

/// Which on/off Hamiltonians drive a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Coupling {
    /// Junction-dressed transfer terms.
    Dressed,
    /// Bare ladder operators with effective couplings in GHz.
    Simplified { ej_prime_ghz: f64, ej_doubleprime_ghz: f64 },
}

/// One sample of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t_ns: f64,
    /// Time in units of 1/κ_c.
    pub t_kappa_c: f64,
    pub phi_rad: f64,
    pub n: [f64; 3],
    pub theta_c_mk: f64,
    pub theta_c_entropy_mk: Option<f64>,
    /// Heat currents in attowatt.
    pub j_attowatt: [f64; 3],
}

impl Record {
    pub fn from_state(t_ns: f64, phi_rad: f64, rho: &DensityMatrix, params: &SystemParams) -> Result<Self> {
        let n = [0, 1, 2].map(|p| rho.mean_occupation(p));
        let theta_c_mk = occupation_temperature(n[0].max(0.0), params.c.omega_ghz);
        let theta_c_entropy_mk = temperature_from_entropy(&rho.reduced(Mode::C.label())?, params.c.omega_ghz).ok();
        Ok(Self {
            t_ns,
            t_kappa_c: t_ns * params.c.kappa(),
            phi_rad,
            n,
            theta_c_mk,
            theta_c_entropy_mk,
            j_attowatt: currents_from_occupations(&n, params).attowatt,
        })
    }
}

fn currents_from_occupations(n: &[f64; 3], params: &SystemParams) -> Currents {
    let j = Mode::ALL.map(|m| {
        let o = params.oscillator(m);
        o.omega() * o.kappa() * (o.bath_occupation() - n[m.position()])
    });
    Currents::from_internal(j, params)
}

/// Output of [`run_schedule`].
#[derive(Clone, Debug)]
pub struct ScheduleRun {
    pub records: Vec<Record>,
    pub stats: EvolveStats,
    pub final_state: DensityMatrix,
}

impl ScheduleRun {
    pub fn theta_c(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.theta_c_mk).collect()
    }
}

/// On/off Hamiltonians, baths and the common closed basis.
struct Generators {
    on: Operator,
    off: Operator,
    baths: Vec<Bath>,
    basis: Arc<PairBasis>,
}

impl Generators {
    fn new(params: &SystemParams, coupling: Coupling) -> Result<Self> {
        let space = params.space()?;
        let (on, off) = match coupling {
            Coupling::Dressed => (build_h_on(params, &space)?, build_h_off(params, &space)?),
            Coupling::Simplified {
                ej_prime_ghz,
                ej_doubleprime_ghz,
            } => build_h_simplified(ej_prime_ghz, ej_doubleprime_ghz, params, &space)?,
        };
        let baths = local_baths(params, &space)?;
        let jumps: Vec<&Operator> = baths.iter().flat_map(|b| b.jumps.iter().map(|j| &j.op)).collect();
        let basis = PairBasis::closure(&space, &[&on, &off], &jumps)?;
        Ok(Self { on, off, baths, basis })
    }

    fn liouvillian(&self, phi_rad: f64) -> Result<Liouvillian> {
        Liouvillian::with_basis(&mix_on_off(phi_rad, &self.on, &self.off)?, &self.baths, self.basis.clone())
    }

    fn initial(&self, init: &InitialState, params: &SystemParams) -> Result<DensityMatrix> {
        let n = match init {
            InitialState::Thermal => Mode::ALL.map(|m| params.oscillator(m).bath_occupation()),
            InitialState::Occupations { n } => *n,
        };
        DensityMatrix::thermal_product(self.basis.clone(), &n)
    }
}

fn sample_grid(t0: f64, duration: f64, step: f64) -> Vec<f64> {
    let n = (duration / step).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| t0 + i as f64 * step).collect();
    let end = t0 + duration;
    if end - grid[grid.len() - 1] > 1e-9 * step {
        grid.push(end);
    } else {
        *grid.last_mut().expect("non-empty") = end;
    }
    grid
}

/// Evolves the schedule segment by segment with the state carried across
/// switches. Solver failures are tagged with the segment index.
pub fn run_schedule(
    schedule: &Schedule,
    params: &SystemParams,
    coupling: Coupling,
    opts: EvolveOptions,
) -> Result<ScheduleRun> {
    params.validate()?;
    schedule.validate()?;
    let gens = Generators::new(params, coupling)?;
    let mut rho = gens.initial(&schedule.initial, params)?;
    let mut records = Vec::new();
    let mut stats = EvolveStats::default();
    let mut t0 = 0.0;
    for (index, seg) in schedule.segments.iter().enumerate() {
        let tag = |e: Error| Error::Segment {
            index,
            source: Box::new(e),
        };
        let l = gens.liouvillian(seg.phi_rad).map_err(tag)?;
        let grid = sample_grid(t0, seg.duration_ns, schedule.sample_ns);
        let mut observed = EvolveStats::default();
        let (fin, st) = evolve_with(&rho, &l, &grid, opts, |t, r| {
            if index > 0 && t == t0 {
                return Ok(());
            }
            observed.observe(r, &opts)?;
            records.push(Record::from_state(t, seg.phi_rad, r, params)?);
            Ok(())
        })
        .map_err(tag)?;
        stats.merge(&st);
        stats.merge(&observed);
        rho = fin;
        t0 += seg.duration_ns;
    }
    Ok(ScheduleRun {
        records,
        stats,
        final_state: rho,
    })
}

/// Vertex of the parabola through three points.
fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> (f64, f64) {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if !(a > 0.0) {
        return p1;
    }
    let b = d01 - a * (x0 + x1);
    let x = (-b / (2.0 * a)).clamp(x0, x2);
    let y = y0 + d01 * (x - x0) + a * (x - x0) * (x - x1);
    (x, y)
}

/// What a new sample told a [`MinimumDetector`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Detection {
    Nothing,
    /// The previous sample is the lowest local minimum so far.
    Candidate,
    /// The signal rose far enough above the candidate; refined (t, value).
    Confirmed(f64, f64),
}

/// Streaming detector of the first local minimum of a sampled signal.
///
/// A local minimum (first difference turning from negative to positive)
/// becomes a candidate once the signal has dropped below its first sample by
/// more than `prominence` (relative). It is confirmed when a later sample
/// rises above it by the same margin; a lower local minimum seen before that
/// replaces it. The location is refined by the parabola through the three
/// samples around the candidate.
#[derive(Clone, Debug)]
pub struct MinimumDetector {
    prominence: f64,
    start: Option<f64>,
    window: VecDeque<(f64, f64)>,
    candidate: Option<[(f64, f64); 3]>,
}

impl MinimumDetector {
    pub fn new(prominence: f64) -> Self {
        Self {
            prominence,
            start: None,
            window: VecDeque::with_capacity(3),
            candidate: None,
        }
    }

    pub fn push(&mut self, t: f64, y: f64) -> Detection {
        let start = *self.start.get_or_insert(y);
        let margin = self.prominence * start.abs().max(f64::MIN_POSITIVE);
        if self.window.len() == 3 {
            self.window.pop_front();
        }
        self.window.push_back((t, y));
        if let Some(c) = self.candidate {
            if y - c[1].1 > margin {
                let (x, v) = parabola_vertex(c[0], c[1], c[2]);
                return Detection::Confirmed(x, v);
            }
        }
        if self.window.len() < 3 {
            return Detection::Nothing;
        }
        let (p0, p1, p2) = (self.window[0], self.window[1], self.window[2]);
        let is_min = p1.1 < p0.1 && p2.1 > p1.1 && start - p1.1 > margin;
        let lower = self.candidate.is_none_or(|c| p1.1 < c[1].1);
        if is_min && lower {
            self.candidate = Some([p0, p1, p2]);
            return Detection::Candidate;
        }
        Detection::Nothing
    }
}

/// First confirmed local minimum of a sampled signal; see [`MinimumDetector`].
pub fn first_minimum(samples: &[(f64, f64)], prominence: f64) -> Option<(f64, f64)> {
    let mut det = MinimumDetector::new(prominence);
    samples.iter().find_map(|&(t, y)| match det.push(t, y) {
        Detection::Confirmed(x, v) => Some((x, v)),
        _ => None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientOptions {
    /// Sampling interval of θ_c on the dense output, ns.
    pub resolution_ns: f64,
    /// Give up looking for a minimum after this time, ns.
    pub horizon_ns: f64,
    /// Evolution after the switch, ns.
    pub off_duration_ns: f64,
    /// Minimum relative drop below the initial θ_c for a minimum to count.
    pub prominence: f64,
    /// Reference "on" steady temperature; solved for when absent.
    pub steady_theta_mk: Option<f64>,
    #[serde(skip)]
    pub evolve: EvolveOptions,
}

impl TransientOptions {
    /// Horizon 20/κ_c, off duration 2/κ_c.
    pub fn for_params(params: &SystemParams) -> Self {
        let relax = 20.0 / params.c.kappa();
        Self {
            resolution_ns: 0.05,
            horizon_ns: relax,
            off_duration_ns: 0.1 * relax,
            prominence: 1e-6,
            steady_theta_mk: None,
            evolve: EvolveOptions::default(),
        }
    }
}

/// Outcome of [`transient_protocol`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransientEvent {
    pub t_min_ns: f64,
    pub theta_min_mk: f64,
    pub steady_theta_mk: f64,
    /// θ_min < T_c^S.
    pub qualifying: bool,
    /// Time after the switch during which θ_c stays below T_c^S, ns.
    pub below_ns: f64,
    /// Whether θ_c was still below T_c^S at the end of the run.
    pub below_at_end: bool,
    pub resolution_ns: f64,
}

#[derive(Clone, Debug)]
pub struct TransientRun {
    pub event: TransientEvent,
    /// "On" samples up to the switch, then "off" samples.
    pub records: Vec<Record>,
    pub stats: EvolveStats,
}

/// Runs in the "on" mode from the bath-thermal state until θ_c reaches its
/// first minimum, switches to φ = 0 there and follows the "off" evolution.
pub fn transient_protocol(params: &SystemParams, opts: &TransientOptions) -> Result<TransientRun> {
    params.validate()?;
    let res = opts.resolution_ns;
    if !(res > 0.0) || !(opts.horizon_ns > res) || !(opts.off_duration_ns > res) {
        return Err(Error::Validation(
            "transient protocol needs resolution > 0 and horizon, off duration above it".into(),
        ));
    }
    let gens = Generators::new(params, Coupling::Dressed)?;
    let on_phi = std::f64::consts::FRAC_PI_2;
    let l_on = gens.liouvillian(on_phi)?;
    let steady_theta_mk = match opts.steady_theta_mk {
        Some(t) => t,
        None => {
            let ss = steady_state(&l_on, default_steady_tol(&l_on))?;
            occupation_temperature(ss.rho.mean_occupation(0).max(0.0), params.c.omega_ghz)
        }
    };
    let rho0 = gens.initial(&InitialState::Thermal, params)?;
    let theta = |r: &DensityMatrix| occupation_temperature(r.mean_occupation(0).max(0.0), params.c.omega_ghz);

    // "on" phase: sample θ_c on the dense output and keep the last states
    let mut it = crate::dynamics::Integrator::new(&l_on, &rho0, 0.0, opts.evolve)?;
    let mut det = MinimumDetector::new(opts.prominence);
    let mut recent: VecDeque<(f64, DensityMatrix)> = VecDeque::with_capacity(3);
    let mut saved: Vec<(f64, DensityMatrix)> = Vec::new();
    let mut records = Vec::new();
    let mut observed = EvolveStats::default();
    let mut k = 0usize;
    let found = loop {
        let t = k as f64 * res;
        if t > opts.horizon_ns {
            break None;
        }
        while it.t() < t {
            it.step(opts.horizon_ns + res)?;
        }
        let rho = if k == 0 { rho0.clone() } else { it.dense(t) };
        observed.observe(&rho, &opts.evolve)?;
        records.push(Record::from_state(t, on_phi, &rho, params)?);
        if recent.len() == 3 {
            recent.pop_front();
        }
        let th = theta(&rho);
        recent.push_back((t, rho));
        match det.push(t, th) {
            Detection::Candidate => saved = recent.iter().cloned().collect(),
            Detection::Confirmed(t_min, v) => break Some((t_min, v)),
            Detection::Nothing => {}
        }
        k += 1;
    };
    let Some((t_star, _)) = found else {
        return Err(Error::NoOscillation {
            horizon_ns: opts.horizon_ns,
        });
    };

    // rewind to the last saved sample at or before t*, then integrate to t*
    let (t_s, rho_s) = saved
        .iter()
        .rev()
        .find(|(t, _)| *t <= t_star)
        .cloned()
        .expect("minimum lies inside the saved window");
    let mut stats = it.stats().clone();
    let rho_star = if t_star - t_s > 1e-12 * res {
        let (r, st) = evolve_with(&rho_s, &l_on, &[t_s, t_star], opts.evolve, |_, _| Ok(()))?;
        stats.merge(&st);
        r
    } else {
        rho_s
    };
    records.retain(|r| r.t_ns <= t_star);
    let theta_min_mk = theta(&rho_star);
    records.push(Record::from_state(t_star, on_phi, &rho_star, params)?);

    // "off" phase
    let l_off = gens.liouvillian(0.0)?;
    let grid = sample_grid(t_star, opts.off_duration_ns, res);
    let mut crossing: Option<f64> = None;
    let mut prev = (t_star, theta_min_mk);
    let (_, st) = evolve_with(&rho_star, &l_off, &grid, opts.evolve, |t, r| {
        if t == t_star {
            return Ok(());
        }
        observed.observe(r, &opts.evolve)?;
        let rec = Record::from_state(t, 0.0, r, params)?;
        if crossing.is_none() && rec.theta_c_mk >= steady_theta_mk && prev.1 < steady_theta_mk {
            let f = (steady_theta_mk - prev.1) / (rec.theta_c_mk - prev.1);
            crossing = Some(prev.0 + f * (t - prev.0));
        }
        prev = (t, rec.theta_c_mk);
        records.push(rec);
        Ok(())
    })?;
    stats.merge(&st);
    stats.merge(&observed);

    let qualifying = theta_min_mk < steady_theta_mk;
    let end = t_star + opts.off_duration_ns;
    let below_ns = if qualifying { crossing.unwrap_or(end) - t_star } else { 0.0 };
    Ok(TransientRun {
        event: TransientEvent {
            t_min_ns: t_star,
            theta_min_mk,
            steady_theta_mk,
            qualifying,
            below_ns,
            below_at_end: qualifying && crossing.is_none(),
            resolution_ns: res,
        },
        records,
        stats,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Fit E_J′ with the other coupling held fixed.
    On,
    /// Fit E_J″ with the other coupling held fixed.
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptions {
    /// Golden-section stop: bracket width relative to its midpoint.
    pub rel_tol: f64,
    /// Starting point of the bracket scan, GHz; 8 λ_c λ_h λ_r E_J when absent.
    pub initial_ghz: Option<f64>,
    /// Value of the coupling that is not fitted, GHz.
    pub fixed_ghz: f64,
    /// Multiplicative step of the bracket scan.
    pub scan_factor: f64,
    pub max_scan: usize,
    #[serde(skip)]
    pub evolve: EvolveOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            initial_ghz: None,
            fixed_ghz: 0.0,
            scan_factor: 1.5,
            max_scan: 40,
            evolve: EvolveOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub mode: FitMode,
    pub ej_prime_ghz: f64,
    pub ej_doubleprime_ghz: f64,
    /// sqrt(Σ_t (θ_fit − θ_ref)²), mK.
    pub residual: f64,
    pub method: String,
    pub evaluations: usize,
    /// (coupling GHz, objective mK²) pairs of the bracket scan.
    pub scan: Vec<(f64, f64)>,
}

/// Small-λ coupling 8 λ_c λ_h λ_r E_J of the simplified "on" model, GHz.
pub fn weak_coupling_ej_prime(params: &SystemParams) -> f64 {
    8.0 * params.c.lambda * params.h.lambda * params.r.lambda * params.ej_ghz
}

/// Least-squares fit of one simplified-model coupling to a reference θ_c(t)
/// sampled on the same schedule: geometric bracket scan followed by
/// golden-section search.
pub fn fit_simplified(
    reference: &[Record],
    schedule: &Schedule,
    params: &SystemParams,
    mode: FitMode,
    opts: &FitOptions,
) -> Result<FitResult> {
    schedule.validate()?;
    if reference.len() < 3 {
        return Err(Error::Validation("reference trajectory needs at least 3 samples".into()));
    }
    if !(opts.rel_tol > 0.0) || !(opts.scan_factor > 1.0) || !(opts.fixed_ghz >= 0.0) {
        return Err(Error::Validation(
            "fit needs rel_tol > 0, scan_factor > 1 and a non-negative fixed coupling".into(),
        ));
    }
    let coupling = |x: f64| match mode {
        FitMode::On => Coupling::Simplified {
            ej_prime_ghz: x,
            ej_doubleprime_ghz: opts.fixed_ghz,
        },
        FitMode::Off => Coupling::Simplified {
            ej_prime_ghz: opts.fixed_ghz,
            ej_doubleprime_ghz: x,
        },
    };
    let mut evaluations = 0usize;
    let mut objective = |x: f64| -> Result<f64> {
        evaluations += 1;
        let run = run_schedule(schedule, params, coupling(x), opts.evolve)?;
        if run.records.len() != reference.len() {
            return Err(Error::DimensionMismatch {
                expected: reference.len(),
                found: run.records.len(),
            });
        }
        let mut s = 0.0;
        for (a, b) in run.records.iter().zip(reference) {
            if (a.t_ns - b.t_ns).abs() > 1e-9 * b.t_ns.abs().max(1.0) {
                return Err(Error::Validation(format!(
                    "reference sample at {} ns does not match schedule time {} ns",
                    b.t_ns, a.t_ns
                )));
            }
            s += (a.theta_c_mk - b.theta_c_mk).powi(2);
        }
        log::debug!("fit objective at {x:e} GHz: {s:e}");
        Ok(s)
    };

    let x0 = opts.initial_ghz.unwrap_or_else(|| match mode {
        FitMode::On => weak_coupling_ej_prime(params),
        FitMode::Off => 0.01 * params.ej_ghz,
    });
    if !(x0 > 0.0) {
        return Err(Error::Validation("fit needs a positive starting coupling".into()));
    }
    let g = opts.scan_factor;
    let mut scan = Vec::new();
    let mut eval = |x: f64, scan: &mut Vec<(f64, f64)>| -> Result<(f64, f64)> {
        let p = (x, objective(x)?);
        scan.push(p);
        Ok(p)
    };
    let p0 = eval(x0, &mut scan)?;
    let up = eval(x0 * g, &mut scan)?;
    let (step, mut a, mut b) = if up.1 < p0.1 {
        (g, p0, up)
    } else {
        let down = eval(x0 / g, &mut scan)?;
        if down.1 >= p0.1 {
            (1.0, down, p0)
        } else {
            (1.0 / g, p0, down)
        }
    };
    let (lo_x, hi_x) = loop {
        if step == 1.0 {
            break (a.0, up.0);
        }
        if scan.len() >= opts.max_scan {
            return Err(Error::FitFailure {
                reason: format!("objective not bracketed after {} evaluations", scan.len()),
                scan,
            });
        }
        let c = eval(b.0 * step, &mut scan)?;
        if c.1 > b.1 {
            break (a.0, c.0);
        }
        a = b;
        b = c;
    };
    let (mut lo, mut hi) = if lo_x < hi_x { (lo_x, hi_x) } else { (hi_x, lo_x) };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while (hi - lo) > opts.rel_tol * 0.5 * (hi + lo) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2)?;
        }
    }
    let (x, f) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    let (ej_prime_ghz, ej_doubleprime_ghz) = match mode {
        FitMode::On => (x, opts.fixed_ghz),
        FitMode::Off => (opts.fixed_ghz, x),
    };
    Ok(FitResult {
        mode,
        ej_prime_ghz,
        ej_doubleprime_ghz,
        residual: f.sqrt(),
        method: format!("geometric bracket (×{g}) + golden section, rel tol {:e}", opts.rel_tol),
        evaluations,
        scan,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// E_J/2π, GHz.
    Ej,
    /// T_h, mK.
    THot,
    /// λ on all modes.
    Lambda,
    /// κ/2π on all modes, GHz.
    Kappa,
}

impl SweepParam {
    pub fn apply(self, params: &SystemParams, value: f64) -> SystemParams {
        let p = params.clone();
        match self {
            SweepParam::Ej => p.with_ej(value),
            SweepParam::THot => p.with_t_hot(value),
            SweepParam::Lambda => p.with_lambda(value),
            SweepParam::Kappa => p.with_kappa(value),
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ej" => Ok(SweepParam::Ej),
            "t_hot" => Ok(SweepParam::THot),
            "lambda" => Ok(SweepParam::Lambda),
            "kappa" => Ok(SweepParam::Kappa),
            other => Err(Error::Validation(format!(
                "unknown sweep parameter `{other}` (expected ej, t_hot, lambda or kappa)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub base: SystemParams,
    /// Steady-state residual tolerance; 1e-10·D when absent.
    #[serde(default)]
    pub steady_tol: Option<f64>,
    /// Grow the hot-mode truncation per point until the thermal tail
    /// (n_B/(n_B+1))^d falls below this.
    #[serde(default)]
    pub hot_tail: Option<f64>,
}

impl SweepSpec {
    pub fn point_params(&self, value: f64) -> SystemParams {
        let mut p = self.param.apply(&self.base, value);
        if let Some(tail) = self.hot_tail {
            let n = p.h.bath_occupation();
            if n > 0.0 {
                let need = (tail.ln() / (n / (n + 1.0)).ln()).ceil() as usize;
                p.dims[1] = p.dims[1].max(need);
            }
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Validation("sweep grid is empty".into()));
        }
        if let Some(t) = self.hot_tail {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Validation(format!("hot_tail must lie in (0, 1), got {t}")));
            }
        }
        for &v in &self.values {
            self.point_params(v)
                .validate()
                .map_err(|e| Error::Validation(format!("sweep value {v}: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta_c_mk: f64,
    pub ratio: f64,
    pub j_attowatt: [f64; 3],
    pub cop_current: Option<f64>,
    pub cop_freq: f64,
    pub cooling_margin: f64,
    pub carnot_cop: Option<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub dims: [usize; 3],
    pub outcome: std::result::Result<SweepRow, String>,
}

/// Steady state and report at given parameters.
pub fn steady_report(params: &SystemParams, tol: Option<f64>) -> Result<(ThermoReport, f64)> {
    params.validate()?;
    let space = params.space()?;
    let h = crate::model::build_h_rwa(params, &space)?;
    let l = crate::lindblad::build_liouvillian(&h, params)?;
    let ss = steady_state(&l, tol.unwrap_or_else(|| default_steady_tol(&l)))?;
    let report = ThermoReport::compute(&ss.rho, params, ReportInputs::default())?;
    Ok((report, ss.residual))
}

/// Solves every grid point independently on `workers` threads (all
/// available when `None`). Failed points are recorded, not fatal.
pub fn sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    let point = |&value: &f64| -> SweepPoint {
        let p = spec.point_params(value);
        let outcome = steady_report(&p, spec.steady_tol)
            .map(|(r, residual)| SweepRow {
                theta_c_mk: r.theta_c_mk,
                ratio: r.ratio,
                j_attowatt: r.currents.attowatt,
                cop_current: r.cop_current,
                cop_freq: r.cop_freq,
                cooling_margin: r.cooling_margin,
                carnot_cop: r.carnot_cop,
                residual,
            })
            .map_err(|e| {
                log::warn!("sweep point {value}: {e}");
                e.to_string()
            });
        SweepPoint {
            value,
            dims: p.dims,
            outcome,
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| spec.values.par_iter().map(point).collect()))
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RwaOptions {
    /// Splitting step of the lab-frame run, ns.
    pub split_dt_ns: f64,
    #[serde(skip)]
    pub evolve: EvolveOptions,
}

impl Default for RwaOptions {
    fn default() -> Self {
        Self {
            split_dt_ns: 0.5,
            evolve: EvolveOptions::default(),
        }
    }
}

/// Switch on for 4/κ_c, then off for 2/κ_c, sampled every 1 ns.
pub fn rwa_schedule(params: &SystemParams) -> Schedule {
    let tau = 1.0 / params.c.kappa();
    Schedule::on_off((4.0 * tau).round(), (2.0 * tau).round(), 1, 1.0)
}

/// Sample times, φ and θ_c of one arm, with its integrator statistics.
type ArmOutput = (Vec<f64>, Vec<f64>, Vec<f64>, EvolveStats);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RwaComparison {
    pub times_ns: Vec<f64>,
    pub phi_rad: Vec<f64>,
    pub theta_full_mk: Vec<f64>,
    pub theta_rwa_mk: Vec<f64>,
    /// max_t |θ_rwa − θ_full| / θ_full.
    pub max_rel_dev: f64,
    pub mean_rel_dev: f64,
    /// Time-averaged cooling T_c − θ of each arm, mK.
    pub mean_cooling_full_mk: f64,
    pub mean_cooling_rwa_mk: f64,
    pub stats_full: EvolveStats,
    pub stats_rwa: EvolveStats,
}

impl RwaComparison {
    /// Whether the rotating-frame curve cools at least as much as the
    /// lab-frame curve on average.
    pub fn rwa_cools_at_least_as_strongly(&self) -> bool {
        self.mean_cooling_rwa_mk >= self.mean_cooling_full_mk
    }
}

/// Runs `schedule` from the bath-thermal state under the lab-frame junction
/// Hamiltonian and under the rotating-frame one and compares θ_c(t). The
/// lab-frame arm is dense and limited to D ≤ 4096.
pub fn rwa_comparison(params: &SystemParams, schedule: &Schedule, opts: &RwaOptions) -> Result<RwaComparison> {
    params.validate()?;
    schedule.validate()?;
    let space = params.space()?;
    if space.dim() > 4096 {
        return Err(Error::MemoryBudget(format!(
            "lab-frame run needs D = {} ≤ 4096; certify a smaller truncation for these parameters",
            space.dim()
        )));
    }
    let theta = |rho: &DensityMatrix| occupation_temperature(rho.mean_occupation(0).max(0.0), params.c.omega_ghz);
    let full_arm = || -> Result<ArmOutput> {
        let baths = local_baths(params, &space)?;
        let n = Mode::ALL.map(|m| params.oscillator(m).bath_occupation());
        let mut rho = DensityMatrix::thermal_product(PairBasis::full(&space), &n)?;
        let (mut times, mut phis, mut th) = (Vec::new(), Vec::new(), Vec::new());
        let mut stats = EvolveStats::default();
        let mut t0 = 0.0;
        for (index, seg) in schedule.segments.iter().enumerate() {
            let tag = |e: Error| Error::Segment {
                index,
                source: Box::new(e),
            };
            let h = build_h_full(&params.clone().with_phi(seg.phi_rad), &space).map_err(tag)?;
            let grid = sample_grid(t0, seg.duration_ns, schedule.sample_ns);
            let mut observed = EvolveStats::default();
            let (fin, st) = evolve_split_with(&rho, &h, &baths, &grid, opts.split_dt_ns, opts.evolve, |t, r| {
                if index > 0 && t == t0 {
                    return Ok(());
                }
                observed.observe(r, &opts.evolve)?;
                times.push(t);
                phis.push(seg.phi_rad);
                th.push(theta(r));
                Ok(())
            })
            .map_err(tag)?;
            stats.merge(&st);
            stats.merge(&observed);
            rho = fin;
            t0 += seg.duration_ns;
        }
        Ok((times, phis, th, stats))
    };
    let rwa_arm = || -> Result<ScheduleRun> { run_schedule(schedule, params, Coupling::Dressed, opts.evolve) };
    let (full, rwa) = rayon::join(full_arm, rwa_arm);
    let (times_ns, phi_rad, theta_full, stats_full) = full?;
    let rwa = rwa?;
    let theta_rwa = rwa.theta_c();
    if theta_rwa.len() != theta_full.len() {
        return Err(Error::DimensionMismatch {
            expected: theta_full.len(),
            found: theta_rwa.len(),
        });
    }
    let devs: Vec<f64> = theta_full
        .iter()
        .zip(&theta_rwa)
        .map(|(f, r)| (r - f).abs() / f)
        .collect();
    let t_c = params.c.temperature_mk;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(RwaComparison {
        max_rel_dev: devs.iter().cloned().fold(0.0, f64::max),
        mean_rel_dev: mean(&devs),
        mean_cooling_full_mk: t_c - mean(&theta_full),
        mean_cooling_rwa_mk: t_c - mean(&theta_rwa),
        times_ns,
        phi_rad,
        theta_full_mk: theta_full,
        theta_rwa_mk: theta_rwa,
        stats_full,
        stats_rwa: rwa.stats,
    })
}

/// Steady θ_c of the "on" mode, mK.
pub fn steady_theta_c(params: &SystemParams) -> Result<f64> {
    Ok(steady_report(params, None)?.0.theta_c_mk)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detector_on_damped_cosine() {
        let (gamma, w) = (0.2, 2.0);
        let f = |t: f64| 1.0 + (-gamma * t).exp() * (w * t).cos();
        // first minimum of e^{-γt} cos ωt: tan(ωt) = −γ/ω in (π/2, π)
        let exact = (std::f64::consts::PI - (gamma / w).atan()) / w;
        for &dt in &[0.05, 0.01] {
            let samples: Vec<(f64, f64)> = (0..2000).map(|i| (i as f64 * dt, f(i as f64 * dt))).collect();
            let (t, y) = first_minimum(&samples, 1e-6).unwrap();
            assert!((t - exact).abs() < dt, "{t} vs {exact}");
            assert!((y - f(exact)).abs() < 1e-3);
        }
    }

    #[test]
    fn detector_ignores_flat_noise() {
        let samples: Vec<(f64, f64)> = (0..50)
            .map(|i| (i as f64, 1.0 + 1e-12 * ((i * 7919) % 13) as f64))
            .collect();
        assert!(first_minimum(&samples, 1e-6).is_none());
        // monotone relaxation with roundoff wiggles in the tail
        let relax: Vec<(f64, f64)> = (0..400)
            .map(|i| {
                let t = i as f64 * 0.1;
                (t, 0.7 + 0.3 * (-t).exp() + 1e-13 * ((i * 31) % 7) as f64)
            })
            .collect();
        assert!(first_minimum(&relax, 1e-6).is_none());
    }

    #[test]
    fn detector_keeps_the_lower_candidate() {
        let ys = [5.0, 4.0, 3.0, 3.0000001, 2.0, 1.0, 1.5, 3.0];
        let samples: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect();
        let (t, _) = first_minimum(&samples, 1e-3).unwrap();
        assert!((t - 5.0).abs() < 1.0, "{t}");
    }

    #[test]
    fn vertex_of_exact_parabola() {
        let p = |x: f64| (x, 2.0 * (x - 0.3).powi(2) + 1.0);
        let (x, y) = parabola_vertex(p(0.0), p(0.5), p(1.2));
        assert!((x - 0.3).abs() < 1e-12);
        assert!((y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grids() {
        assert_eq!(sample_grid(1.0, 1.0, 0.25), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        let g = sample_grid(0.0, 1.0, 0.3);
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        let l = log_grid(0.01, 1.0, 3);
        assert!((l[1] - 0.1).abs() < 1e-15);
        assert_eq!(linear_grid(0.0, 1.0, 5)[2], 0.5);
    }

    #[test]
    fn schedule_validation() {
        let mut s = Schedule::single(0.0, 1.0, 0.1);
        assert!(s.validate().is_ok());
        s.segments[0].duration_ns = 0.0;
        assert!(s.validate().unwrap_err().is_validation());
        assert!(Schedule::on_off(1.0, 1.0, 0, 0.1).validate().is_err());
        assert_eq!(Schedule::on_off(2.0, 3.0, 2, 0.1).duration_ns(), 10.0);
    }

    #[test]
    fn sweep_param_parsing() {
        assert_eq!("t_hot".parse::<SweepParam>().unwrap(), SweepParam::THot);
        assert!("omega".parse::<SweepParam>().is_err());
    }
}
