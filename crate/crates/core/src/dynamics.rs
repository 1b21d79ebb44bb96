//! Time evolution and steady states of the master equation.
//!
//! Times are in ns, matching the rad/ns rates of the generator.

use std::collections::HashMap;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::Operator;
use crate::lindblad::{Bath, DensityMatrix, Liouvillian, PairBasis};
use crate::linalg::hermitian_eigen;
use crate::model::SystemParams;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Eigenvalue threshold below which states are clipped and renormalized.
pub const CLIP_THRESHOLD: f64 = -1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size in ns.
    pub h_max: Option<f64>,
    /// Store full density matrices at every grid time.
    pub keep_states: bool,
    /// Track the minimum eigenvalue of every recorded state.
    pub check_positivity: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_max: None,
            keep_states: false,
            check_positivity: false,
        }
    }
}

/// Integrator bookkeeping accumulated over a run.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvolveStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Largest |Tr ρ − 1| seen before renormalization.
    pub max_trace_drift: f64,
    /// Largest max |ρ − ρ†| before symmetrization.
    pub max_hermiticity_residue: f64,
    /// Smallest eigenvalue of the recorded states, when tracked.
    pub min_eigenvalue: Option<f64>,
}

impl EvolveStats {
    pub fn merge(&mut self, other: &EvolveStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.evaluations += other.evaluations;
        self.max_trace_drift = self.max_trace_drift.max(other.max_trace_drift);
        self.max_hermiticity_residue = self.max_hermiticity_residue.max(other.max_hermiticity_residue);
        self.min_eigenvalue = match (self.min_eigenvalue, other.min_eigenvalue) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }

    /// Folds the positivity check of an observed state into the stats.
    pub fn observe(&mut self, rho: &DensityMatrix, opts: &EvolveOptions) -> Result<()> {
        if opts.check_positivity {
            let m = rho.min_eigenvalue()?;
            self.min_eigenvalue = Some(self.min_eigenvalue.map_or(m, |x| x.min(m)));
        }
        Ok(())
    }
}

/// Thin trajectory: mean occupations per grid time, optionally full states.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub mean_n: Vec<Vec<f64>>,
    pub states: Vec<DensityMatrix>,
    pub stats: EvolveStats,
}

impl Trajectory {
    fn new() -> Self {
        Self {
            times: Vec::new(),
            mean_n: Vec::new(),
            states: Vec::new(),
            stats: EvolveStats::default(),
        }
    }

    fn record(&mut self, t: f64, rho: &DensityMatrix, opts: &EvolveOptions) -> Result<()> {
        self.times.push(t);
        self.mean_n
            .push((0..rho.space().num_modes()).map(|p| rho.mean_occupation(p)).collect());
        self.stats.observe(rho, opts)?;
        if opts.keep_states {
            self.states.push(rho.clone());
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

// Dormand–Prince 5(4) tableau with the 4th-order dense output of Hairer.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Adaptive Dormand–Prince integrator for dρ/dt = L ρ with dense output over
/// the last accepted step.
pub struct Integrator<'a> {
    l: &'a Liouvillian,
    basis: Arc<PairBasis>,
    opts: EvolveOptions,
    t: f64,
    h: f64,
    y: Vec<C64>,
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    rcont: [Vec<C64>; 5],
    t_old: f64,
    h_old: f64,
    stats: EvolveStats,
}

impl<'a> Integrator<'a> {
    pub fn new(l: &'a Liouvillian, rho0: &DensityMatrix, t0: f64, opts: EvolveOptions) -> Result<Self> {
        if rho0.len() != l.dim() {
            return Err(Error::DimensionMismatch {
                expected: l.dim(),
                found: rho0.len(),
            });
        }
        if !(opts.rtol > 0.0 && opts.atol > 0.0) {
            return Err(Error::InvalidArgument("rtol and atol must be positive".into()));
        }
        let n = l.dim();
        let zeros = || vec![ZERO; n];
        let mut it = Self {
            l,
            basis: l.basis().clone(),
            opts,
            t: t0,
            h: 0.0,
            y: rho0.data().to_vec(),
            k: std::array::from_fn(|_| zeros()),
            ytmp: zeros(),
            rcont: std::array::from_fn(|_| zeros()),
            t_old: t0,
            h_old: 0.0,
            stats: EvolveStats::default(),
        };
        it.eval(0, None);
        it.h = it.initial_step();
        for (r, y) in it.rcont[0].iter_mut().zip(&it.y) {
            *r = *y;
        }
        Ok(it)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn stats(&self) -> &EvolveStats {
        &self.stats
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::new(self.basis.clone(), self.y.clone()).expect("consistent basis")
    }

    /// Interval covered by the most recent accepted step.
    pub fn last_step(&self) -> (f64, f64) {
        (self.t_old, self.t)
    }

    /// Replaces the current state, e.g. after a switch of the generator's
    /// parameters at the same instant.
    pub fn reset(&mut self, rho: &DensityMatrix) {
        self.y.copy_from_slice(rho.data());
        self.eval(0, None);
        self.t_old = self.t;
        self.h_old = 0.0;
    }

    /// k[dst] = L · (y or ytmp)
    fn eval(&mut self, dst: usize, from_tmp: Option<()>) {
        let src = if from_tmp.is_some() { &self.ytmp } else { &self.y };
        let mut out = std::mem::take(&mut self.k[dst]);
        self.l.apply_vec(src, &mut out);
        self.k[dst] = out;
        self.stats.evaluations += 1;
    }

    fn weighted_norm(&self, v: &[C64], y: &[C64]) -> f64 {
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let sc = self.opts.atol + self.opts.rtol * b.norm();
                (a.norm() / sc).powi(2)
            })
            .sum();
        (s / v.len().max(1) as f64).sqrt()
    }

    fn initial_step(&mut self) -> f64 {
        let d0 = self.weighted_norm(&self.y, &self.y);
        let d1 = self.weighted_norm(&self.k[0], &self.y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        for i in 0..self.y.len() {
            self.ytmp[i] = self.y[i] + self.k[0][i] * h0;
        }
        self.eval(1, Some(()));
        let diff: Vec<C64> = self.k[1].iter().zip(&self.k[0]).map(|(a, b)| a - b).collect();
        let d2 = self.weighted_norm(&diff, &self.y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        let h = (100.0 * h0).min(h1);
        self.opts.h_max.map_or(h, |m| h.min(m))
    }

    fn stage(&mut self, coeffs: &[(usize, f64)], h: f64) {
        for i in 0..self.y.len() {
            let mut acc = ZERO;
            for &(j, a) in coeffs {
                acc += self.k[j][i] * a;
            }
            self.ytmp[i] = self.y[i] + acc * h;
        }
    }

    /// Takes one accepted step that does not pass `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<()> {
        let mut rejected_last = false;
        loop {
            let mut h = self.h.min(t_limit - self.t);
            if let Some(m) = self.opts.h_max {
                h = h.min(m);
            }
            if h <= 16.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }
            self.stage(&[(0, A21)], h);
            self.eval(1, Some(()));
            self.stage(&[(0, A31), (1, A32)], h);
            self.eval(2, Some(()));
            self.stage(&[(0, A41), (1, A42), (2, A43)], h);
            self.eval(3, Some(()));
            self.stage(&[(0, A51), (1, A52), (2, A53), (3, A54)], h);
            self.eval(4, Some(()));
            self.stage(&[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], h);
            self.eval(5, Some(()));
            self.stage(&[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)], h);
            self.eval(6, Some(()));
            let mut err = 0.0;
            for i in 0..self.y.len() {
                let e = (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7)
                    * h;
                let sc = self.opts.atol + self.opts.rtol * self.y[i].norm().max(self.ytmp[i].norm());
                err += (e.norm() / sc).powi(2);
            }
            let err = (err / self.y.len() as f64).sqrt();
            if !err.is_finite() {
                self.h = 0.1 * h;
                self.stats.rejected += 1;
                continue;
            }
            if err <= 1.0 {
                self.accept(h);
                let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
                self.h = if rejected_last { h.min(h * fac) } else { h * fac };
                self.stats.accepted += 1;
                return Ok(());
            }
            self.stats.rejected += 1;
            rejected_last = true;
            self.h = h * (0.9 * err.powf(-0.2)).max(0.2);
        }
    }

    fn accept(&mut self, h: f64) {
        for i in 0..self.y.len() {
            let y0 = self.y[i];
            let y1 = self.ytmp[i];
            let ydiff = y1 - y0;
            let bspl = self.k[0][i] * h - ydiff;
            self.rcont[0][i] = y0;
            self.rcont[1][i] = ydiff;
            self.rcont[2][i] = bspl;
            self.rcont[3][i] = ydiff - self.k[6][i] * h - bspl;
            self.rcont[4][i] = (self.k[0][i] * D1
                + self.k[2][i] * D3
                + self.k[3][i] * D4
                + self.k[4][i] * D5
                + self.k[5][i] * D6
                + self.k[6][i] * D7)
                * h;
        }
        self.t_old = self.t;
        self.h_old = h;
        self.t += h;
        std::mem::swap(&mut self.y, &mut self.ytmp);
        self.k.swap(0, 6);

        // L commutes with ρ ↦ ρ† and with scaling, so the FSAL derivative
        // receives the same projection as the state.
        let mut rho = DensityMatrix::new(self.basis.clone(), std::mem::take(&mut self.y)).expect("basis");
        let mut deriv = DensityMatrix::new(self.basis.clone(), std::mem::take(&mut self.k[0])).expect("basis");
        let herm = rho.hermiticity_residue();
        self.stats.max_hermiticity_residue = self.stats.max_hermiticity_residue.max(herm);
        rho.symmetrize();
        deriv.symmetrize();
        let drift = (rho.trace() - 1.0).norm();
        self.stats.max_trace_drift = self.stats.max_trace_drift.max(drift);
        if drift > 1e-13 {
            let tr = rho.normalize();
            for x in deriv.data_mut() {
                *x /= tr.re;
            }
            log::debug!("renormalized trace drift {drift:e} at t = {}", self.t);
        }
        self.k[0] = deriv.into_data();
        self.y = rho.into_data();
    }

    /// State at time `t` inside the last accepted step.
    pub fn dense(&self, t: f64) -> DensityMatrix {
        let data = if self.h_old == 0.0 || t >= self.t {
            self.y.clone()
        } else {
            let s = (t - self.t_old) / self.h_old;
            let s1 = 1.0 - s;
            (0..self.y.len())
                .map(|i| {
                    self.rcont[0][i]
                        + (self.rcont[1][i]
                            + (self.rcont[2][i] + (self.rcont[3][i] + self.rcont[4][i] * s1) * s) * s1)
                            * s
                })
                .collect()
        };
        let mut rho = DensityMatrix::new(self.basis.clone(), data).expect("basis");
        rho.symmetrize();
        rho
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Integrates from `t_grid[0]` through the grid, calling `observe` with the
/// dense-output state at every grid time. Returns the final state.
pub fn evolve_with(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    t_grid: &[f64],
    opts: EvolveOptions,
    mut observe: impl FnMut(f64, &DensityMatrix) -> Result<()>,
) -> Result<(DensityMatrix, EvolveStats)> {
    check_grid(t_grid)?;
    let mut it = Integrator::new(l, rho0, t_grid[0], opts)?;
    observe(t_grid[0], rho0)?;
    let t_end = *t_grid.last().expect("non-empty");
    let mut next = 1;
    while next < t_grid.len() {
        it.step(t_end)?;
        while next < t_grid.len() && t_grid[next] <= it.t() {
            let rho = if next == t_grid.len() - 1 { it.state() } else { it.dense(t_grid[next]) };
            observe(t_grid[next], &rho)?;
            next += 1;
        }
    }
    let stats = it.stats().clone();
    Ok((it.state(), stats))
}

/// Integrates the master equation and records a thin trajectory.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, t_grid: &[f64], opts: EvolveOptions) -> Result<Trajectory> {
    let mut traj = Trajectory::new();
    let (_, stats) = evolve_with(rho0, l, t_grid, opts, |t, rho| traj.record(t, rho, &opts))?;
    let observed = traj.stats.min_eigenvalue;
    traj.stats = stats;
    traj.stats.min_eigenvalue = observed;
    Ok(traj)
}

/// Fixed point of the master equation with diagnostics.
#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    /// ‖L vec(ρ)‖₂ of the returned state.
    pub residual: f64,
    pub method: String,
    /// Iterative-refinement sweeps after the factorization.
    pub iterations: usize,
    /// Most negative eigenvalue removed by clipping, if any.
    pub clipped: Option<f64>,
    pub unknowns: usize,
}

/// Default steady-state tolerance 1e-10 · D.
pub fn default_steady_tol(l: &Liouvillian) -> f64 {
    1e-10 * l.basis().space().dim() as f64
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves L vec(ρ) = 0 by replacing the equation of the vacuum population
/// with the normalization ⟨0|ρ|0⟩ = 1, factorizing the sparse system and
/// rescaling to unit trace. A single-entry row keeps the fill of the
/// factorization local; a full trace row would couple every population.
pub fn steady_state(l: &Liouvillian, tol: f64) -> Result<SteadyStateResult> {
    if !l.has_dissipation() {
        return Err(Error::SteadyStateMultiplicity);
    }
    let basis = l.basis().clone();
    let n = l.dim();
    let trace_row = basis.diagonal_index(0);
    let mut triplets: Vec<Triplet<usize, usize, C64>> = l
        .matrix()
        .triplets()
        .filter(|&(r, _, _)| r != trace_row)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    triplets.push(Triplet::new(trace_row, trace_row, C64::new(1.0, 0.0)));
    let a = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let mut rhs = Mat::<C64>::zeros(n, 1);
    rhs[(trace_row, 0)] = C64::new(1.0, 0.0);
    let mut x = lu.solve(&rhs);
    if (0..n).any(|i| !x[(i, 0)].re.is_finite() || !x[(i, 0)].im.is_finite()) {
        return Err(Error::SteadyStateMultiplicity);
    }

    // iterative refinement on the augmented system
    let mut iterations = 0;
    let apply_a = |v: &Mat<C64>| -> Vec<C64> {
        let col: Vec<C64> = (0..n).map(|i| v[(i, 0)]).collect();
        let mut out = vec![ZERO; n];
        l.apply_vec(&col, &mut out);
        out[trace_row] = col[trace_row];
        out
    };
    for _ in 0..3 {
        let ax = apply_a(&x);
        let mut r = Mat::<C64>::zeros(n, 1);
        for i in 0..n {
            r[(i, 0)] = rhs[(i, 0)] - ax[i];
        }
        let rn = (0..n).map(|i| r[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
        if rn <= 1e-3 * tol {
            break;
        }
        let dx = lu.solve(&r);
        for i in 0..n {
            x[(i, 0)] += dx[(i, 0)];
        }
        iterations += 1;
    }

    let data: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
    let mut rho = DensityMatrix::new(basis, data)?;
    rho.symmetrize();
    rho.normalize();
    let clipped = rho.clip_negative(CLIP_THRESHOLD)?;
    let mut lr = vec![ZERO; n];
    l.apply_vec(rho.data(), &mut lr);
    let residual = norm2(&lr);
    if residual > tol {
        return Err(Error::ResidualTooLarge { residual, tol });
    }
    Ok(SteadyStateResult {
        rho,
        residual,
        method: "sparse-lu+vacuum-row".into(),
        iterations,
        clipped,
        unknowns: n,
    })
}

/// Outcome of a truncation refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedDims {
    pub dims: [usize; 3],
    /// Observables at the certified dims.
    pub observables: Vec<f64>,
    /// Largest relative change seen when refining past the certified dims.
    pub max_change: f64,
    pub evaluations: usize,
}

fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs();
            if d <= 1e-14 {
                0.0
            } else {
                d / x.abs().max(y.abs())
            }
        })
        .fold(0.0, f64::max)
}

/// Grows each mode dimension by `step` until the extracted observables move
/// by less than `tol` (relative) between consecutive refinements. Passes
/// over the modes repeat until none needs to grow. Composite dimensions above
/// `max_dim` abort with a certification failure.
pub fn certify_truncation(
    params: &SystemParams,
    extractor: impl Fn(&SystemParams) -> Result<Vec<f64>>,
    step: usize,
    tol: f64,
    max_dim: usize,
) -> Result<CertifiedDims> {
    if step < 1 {
        return Err(Error::InvalidArgument("refinement step must be at least 1".into()));
    }
    if tol.is_infinite() && tol > 0.0 {
        return Ok(CertifiedDims {
            dims: params.dims,
            observables: Vec::new(),
            max_change: 0.0,
            evaluations: 0,
        });
    }
    let mut dims = params.dims;
    let mut evaluations = 1;
    let mut obs = extractor(&params.clone().with_dims(dims))?;
    let mut max_change: f64 = 0.0;
    loop {
        let mut grew = false;
        for pos in 0..3 {
            loop {
                let mut trial = dims;
                trial[pos] += step;
                let total: usize = trial.iter().product();
                if total > max_dim {
                    return Err(Error::Certification(format!(
                        "dims {trial:?} exceed the budget of {max_dim} states before converging (last certified {dims:?})"
                    )));
                }
                let next = extractor(&params.clone().with_dims(trial))?;
                evaluations += 1;
                let change = relative_change(&next, &obs);
                log::info!("truncation {trial:?}: relative change {change:e}");
                if change < tol {
                    max_change = max_change.max(change);
                    break;
                }
                dims = trial;
                obs = next;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    Ok(CertifiedDims {
        dims,
        observables: obs,
        max_change,
        evaluations,
    })
}

/// Evolution under a dense Hamiltonian plus sparse local dissipation by
/// Strang splitting: half unitary step, dissipative step, half unitary step.
/// The unitary factor is exact; the splitting error is O(dt²) in the
/// commutator of the coupling with the dissipator. `observe` sees the state
/// at every grid time; the final state is returned on the full basis.
pub fn evolve_split_with(
    rho0: &DensityMatrix,
    h: &Operator,
    baths: &[Bath],
    t_grid: &[f64],
    dt: f64,
    opts: EvolveOptions,
    mut observe: impl FnMut(f64, &DensityMatrix) -> Result<()>,
) -> Result<(DensityMatrix, EvolveStats)> {
    check_grid(t_grid)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("split step must be positive".into()));
    }
    let space = h.space().clone();
    let d = space.dim();
    if d > 4096 {
        return Err(Error::MemoryBudget(format!(
            "dense propagation needs D = {d} ≤ 4096; reduce the truncation"
        )));
    }
    let basis = PairBasis::full(&space);
    let dissipative = Liouvillian::with_basis(&Operator::zeros(&space), baths, basis.clone())?;
    let (w, v) = hermitian_eigen(&h.to_dense())?;
    let mut cache: HashMap<u64, Mat<C64>> = HashMap::new();
    let mut propagator = |tau: f64| -> Mat<C64> {
        cache
            .entry(tau.to_bits())
            .or_insert_with(|| {
                let scaled = Mat::<C64>::from_fn(d, d, |i, k| v[(i, k)] * C64::from_polar(1.0, -w[k] * tau));
                &scaled * v.adjoint()
            })
            .clone()
    };
    let sandwich = |u: &Mat<C64>, rho: &Mat<C64>| -> Mat<C64> { u * rho * u.adjoint() };

    let mut stats = EvolveStats::default();
    let mut rho = DensityMatrix::from_dense(basis.clone(), &rho0.to_dense())?;
    observe(t_grid[0], &rho)?;
    let mut it = Integrator::new(&dissipative, &rho, 0.0, opts)?;
    for win in t_grid.windows(2) {
        let span = win[1] - win[0];
        let steps = (span / dt).ceil().max(1.0) as usize;
        let tau = span / steps as f64;
        let half = propagator(0.5 * tau);
        let full = propagator(tau);
        let mut m = sandwich(&half, &rho.to_dense());
        for s in 0..steps {
            it.reset(&DensityMatrix::from_dense(basis.clone(), &m)?);
            let target = it.t() + tau;
            while it.t() < target {
                it.step(target)?;
            }
            m = it.state().to_dense();
            let u = if s + 1 == steps { &half } else { &full };
            m = sandwich(u, &m);
        }
        rho = DensityMatrix::from_dense(basis.clone(), &m)?;
        let herm = rho.hermiticity_residue();
        stats.max_hermiticity_residue = stats.max_hermiticity_residue.max(herm);
        rho.symmetrize();
        let drift = (rho.trace() - 1.0).norm();
        stats.max_trace_drift = stats.max_trace_drift.max(drift);
        rho.normalize();
        observe(win[1], &rho)?;
    }
    stats.merge(it.stats());
    Ok((rho, stats))
}

/// [`evolve_split_with`] recording a thin trajectory.
pub fn evolve_split(
    rho0: &DensityMatrix,
    h: &Operator,
    baths: &[Bath],
    t_grid: &[f64],
    dt: f64,
    opts: EvolveOptions,
) -> Result<Trajectory> {
    let mut traj = Trajectory::new();
    let (_, stats) = evolve_split_with(rho0, h, baths, t_grid, dt, opts, |t, rho| traj.record(t, rho, &opts))?;
    let observed = traj.stats.min_eigenvalue;
    traj.stats.merge(&stats);
    traj.stats.min_eigenvalue = observed.or(traj.stats.min_eigenvalue);
    Ok(traj)
}
