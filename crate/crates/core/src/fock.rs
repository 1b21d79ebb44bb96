//! Truncated bosonic Fock spaces and operators on them.
//!
//! Composite spaces use a fixed mode ordering; for the refrigerator it is
//! (c, h, r) and a basis state |n_c, n_h, n_r⟩ has index
//! `((n_c * dim_h) + n_h) * dim_r + n_r`.

use std::fmt;

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// The three refrigerator oscillators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Oscillator attached to the cold bath (the one being refrigerated).
    C,
    /// Oscillator attached to the hot bath.
    H,
    /// Oscillator attached to the room-temperature bath.
    R,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::C, Mode::H, Mode::R];

    pub fn label(self) -> &'static str {
        match self {
            Mode::C => "c",
            Mode::H => "h",
            Mode::R => "r",
        }
    }

    /// Position in the (c, h, r) tensor ordering.
    pub fn position(self) -> usize {
        match self {
            Mode::C => 0,
            Mode::H => 1,
            Mode::R => 2,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Tensor product of truncated single-mode Fock spaces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockSpace {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl FockSpace {
    pub fn new(modes: &[(&str, usize)]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidDimension("a Fock space needs at least one mode".into()));
        }
        let mut labels = Vec::with_capacity(modes.len());
        let mut dims = Vec::with_capacity(modes.len());
        for &(label, dim) in modes {
            if dim < 2 {
                return Err(Error::InvalidDimension(format!(
                    "mode `{label}` has dimension {dim}, need at least 2"
                )));
            }
            if labels.iter().any(|l: &String| l == label) {
                return Err(Error::InvalidArgument(format!("duplicate mode label `{label}`")));
            }
            labels.push(label.to_string());
            dims.push(dim);
        }
        Ok(Self { labels, dims })
    }

    /// The refrigerator space with modes (c, h, r).
    pub fn fridge(dim_c: usize, dim_h: usize, dim_r: usize) -> Result<Self> {
        Self::new(&[("c", dim_c), ("h", dim_h), ("r", dim_r)])
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(&[("a", dim)])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_modes(&self) -> usize {
        self.dims.len()
    }

    /// Composite dimension.
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    /// Whether this is a (c, h, r) refrigerator space.
    pub fn is_fridge(&self) -> bool {
        self.labels.len() == 3 && self.labels.iter().zip(["c", "h", "r"]).all(|(a, b)| a == b)
    }

    /// Index stride of the mode at `pos`.
    pub fn stride(&self, pos: usize) -> usize {
        self.dims[pos + 1..].iter().product()
    }

    pub fn index_of(&self, occupations: &[usize]) -> usize {
        debug_assert_eq!(occupations.len(), self.dims.len());
        occupations
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&n, &d)| acc * d + n)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.dims.len()];
        for (slot, &d) in occ.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        occ
    }

    /// Occupation of the mode at `pos` in basis state `index`.
    pub fn occupation(&self, index: usize, pos: usize) -> usize {
        (index / self.stride(pos)) % self.dims[pos]
    }
}

impl fmt::Display for FockSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self
            .labels
            .iter()
            .zip(&self.dims)
            .map(|(l, d)| format!("{l}:{d}"))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Storage {
    Sparse,
    Dense,
}

/// A square complex matrix on a Fock space.
#[derive(Clone, Debug)]
pub struct Operator {
    space: FockSpace,
    matrix: CsrMatrix,
}

impl Operator {
    pub fn new(space: FockSpace, matrix: CsrMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: &FockSpace) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: CsrMatrix::identity(d),
        }
    }

    pub fn zeros(space: &FockSpace) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: CsrMatrix::zeros(d, d),
        }
    }

    pub fn from_dense(space: &FockSpace, m: &Mat<C64>) -> Result<Self> {
        Self::new(space.clone(), CsrMatrix::from_dense(m, 0.0))
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix.get(i, j)
    }

    pub fn storage(&self) -> Storage {
        let d = self.dim() as f64;
        if self.matrix.nnz() as f64 > 0.25 * d * d {
            Storage::Dense
        } else {
            Storage::Sparse
        }
    }

    fn check_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.matmul(&other.matrix)?,
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.add(&other.matrix)?,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.sub(&other.matrix)?,
        })
    }

    pub fn scale(&self, s: impl Into<C64>) -> Operator {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(s.into()),
        }
    }

    pub fn adjoint(&self) -> Operator {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn pow(&self, k: usize) -> Operator {
        let mut out = Operator::identity(&self.space);
        for _ in 0..k {
            out = out.mul(self).expect("same space");
        }
        out
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// `self + self†`
    pub fn plus_adjoint(&self) -> Operator {
        self.add(&self.adjoint()).expect("same space")
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_residue(&self) -> f64 {
        self.matrix.hermiticity_residue()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residue() <= tol
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.check_space(other)?;
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn to_dense(&self) -> Mat<C64> {
        self.matrix.to_dense()
    }

    /// Real diagonal, e.g. for number-like operators.
    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }
}

fn single_mode(dim: usize, triplets: &[(usize, usize, C64)]) -> Result<Operator> {
    let space = FockSpace::single(dim)?;
    Operator::new(space, CsrMatrix::from_triplets(dim, dim, triplets))
}

/// Annihilation operator with ⟨n−1|a|n⟩ = √n.
pub fn annihilation(dim: usize) -> Result<Operator> {
    let t: Vec<_> = (1..dim.max(1))
        .map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)))
        .collect();
    single_mode(dim, &t)
}

pub fn creation(dim: usize) -> Result<Operator> {
    Ok(annihilation(dim)?.adjoint())
}

pub fn number(dim: usize) -> Result<Operator> {
    let t: Vec<_> = (1..dim.max(1)).map(|n| (n, n, C64::new(n as f64, 0.0))).collect();
    single_mode(dim, &t)
}

/// Generalized Laguerre polynomial L_n^{(k)}(x) by upward recurrence in n.
pub fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for m in 1..n {
        let m = m as f64;
        let next = ((2.0 * m + k + 1.0 - x) * cur - (m + k) * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Diagonal entries of Â(k) on levels `0..dim`:
/// (2λ)^k e^{−2λ²} n!/(n+k)! L_n^{(k)}(4λ²).
pub fn a_nonlinear_diagonal(k: usize, lambda: f64, dim: usize) -> Result<Vec<f64>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("dim = {dim}, need at least 2")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda = {lambda}, need lambda > 0")));
    }
    let x = 4.0 * lambda * lambda;
    let pref = (2.0 * lambda).powi(k as i32) * (-2.0 * lambda * lambda).exp();
    Ok((0..dim)
        .map(|n| {
            let ratio: f64 = (1..=k).map(|j| 1.0 / (n + j) as f64).product();
            pref * ratio * laguerre(n, k, x)
        })
        .collect())
}

/// The diagonal operator Â(k) dressing k-photon processes.
pub fn a_nonlinear(k: usize, lambda: f64, dim: usize) -> Result<Operator> {
    let diag: Vec<C64> = a_nonlinear_diagonal(k, lambda, dim)?
        .into_iter()
        .map(|v| C64::new(v, 0.0))
        .collect();
    Operator::new(FockSpace::single(dim)?, CsrMatrix::from_diagonal(&diag))
}

fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Matrix of e^{i 2λ (a + a†)} from the closed-form Fock matrix elements
/// ⟨m|·|n⟩ = i^{|m−n|} (2λ)^{|m−n|} e^{−2λ²} √(min!/max!) L_min^{(|m−n|)}(4λ²).
///
/// This is the projection of the infinite-dimensional operator, so it is
/// unitary only on levels well below the truncation.
pub fn displacement_phase(lambda: f64, dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("dim = {dim}, need at least 2")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda = {lambda}, need lambda > 0")));
    }
    let x = 4.0 * lambda * lambda;
    let damp = (-2.0 * lambda * lambda).exp();
    let mut t = Vec::with_capacity(dim * dim);
    for m in 0..dim {
        for n in 0..dim {
            let (lo, k) = if m >= n { (n, m - n) } else { (m, n - m) };
            let sqrt_ratio: f64 = (1..=k).map(|j| 1.0 / ((lo + j) as f64).sqrt()).product();
            let mag = (2.0 * lambda).powi(k as i32) * damp * sqrt_ratio * laguerre(lo, k, x);
            if mag != 0.0 {
                t.push((m, n, i_pow(k) * mag));
            }
        }
    }
    single_mode(dim, &t)
}

/// Matrix of e^{i 2λ (a + a†)} by exponentiating the truncated Hermitian
/// generator through its eigendecomposition. Independent of the Laguerre route.
pub fn displacement_phase_expm(lambda: f64, dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("dim = {dim}, need at least 2")));
    }
    let gen = Mat::<f64>::from_fn(dim, dim, |i, j| {
        if i + 1 == j {
            2.0 * lambda * (j as f64).sqrt()
        } else if j + 1 == i {
            2.0 * lambda * (i as f64).sqrt()
        } else {
            0.0
        }
    });
    let evd = gen
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let v = evd.U();
    let s = evd.S().column_vector();
    let phases: Vec<C64> = (0..dim).map(|i| C64::from_polar(1.0, s[i])).collect();
    let u = Mat::<C64>::from_fn(dim, dim, |i, j| {
        (0..dim)
            .map(|k| phases[k] * (v[(i, k)] * v[(j, k)]))
            .sum()
    });
    single_mode(dim, &CsrMatrix::from_dense(&u, 0.0).triplets().collect::<Vec<_>>())
}

/// Embeds a single-mode operator as 1 ⊗ … ⊗ op ⊗ … ⊗ 1.
pub fn embed(op: &Operator, mode: &str, space: &FockSpace) -> Result<Operator> {
    let pos = space.position(mode)?;
    let d = space.dims()[pos];
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.dim(),
        });
    }
    let left = CsrMatrix::identity(space.dims()[..pos].iter().product());
    let right = CsrMatrix::identity(space.dims()[pos + 1..].iter().product());
    let m = left.kron(op.matrix()).kron(&right);
    Operator::new(space.clone(), m)
}

/// Reduced density matrix of one mode of a dense composite state.
pub fn partial_trace(rho: MatRef<'_, C64>, keep: &str, space: &FockSpace) -> Result<Mat<C64>> {
    let dim = space.dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.nrows().max(rho.ncols()),
        });
    }
    let pos = space.position(keep)?;
    let d = space.dims()[pos];
    let stride = space.stride(pos);
    let mut out = Mat::<C64>::zeros(d, d);
    for i in 0..dim {
        let ni = space.occupation(i, pos);
        let base = i - ni * stride;
        for m in 0..d {
            out[(ni, m)] += rho[(i, base + m * stride)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn annihilation_elements() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.get(0, 1), re(1.0));
        assert_eq!(a.matrix().nnz(), 1);
        let a3 = annihilation(3).unwrap();
        assert!((a3.get(1, 2).re - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn number_operator_is_adag_a() {
        for dim in 2..8 {
            let a = annihilation(dim).unwrap();
            let n = a.adjoint().mul(&a).unwrap();
            let diag = n.diagonal_real();
            for (k, v) in diag.iter().enumerate() {
                assert!((v - k as f64).abs() < 1e-14);
            }
            assert_eq!(n.matrix().nnz(), dim - 1);
        }
    }

    #[test]
    fn invalid_dimension_rejected() {
        assert!(matches!(annihilation(1), Err(Error::InvalidDimension(_))));
        assert!(FockSpace::fridge(3, 1, 3).is_err());
        assert!(FockSpace::new(&[("a", 2), ("a", 3)]).is_err());
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre(0, 5, 7.3), 1.0);
        assert!((laguerre(1, 1, 0.36) - 1.64).abs() < 1e-15);
        // explicit (x² − 4x + 2)/2 at x = 1
        assert!((laguerre(2, 0, 1.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn a_nonlinear_examples() {
        let d = a_nonlinear_diagonal(1, 0.3, 4).unwrap();
        assert!((d[0] - 0.6 * (-0.18f64).exp()).abs() < 1e-15);
        assert!((d[0] - 0.501162).abs() < 1e-6);
        let d0 = a_nonlinear_diagonal(0, 0.3, 4).unwrap();
        assert!((d0[0] - 0.835270).abs() < 1e-6);
        for (n, v) in d0.iter().enumerate() {
            assert!((v - (-0.18f64).exp() * laguerre(n, 0, 0.36)).abs() < 1e-15);
        }
        assert!(a_nonlinear(1, 0.0, 4).is_err());
        assert!(a_nonlinear(1, 0.3, 1).is_err());
    }

    #[test]
    fn a_nonlinear_factorial_ratio_survives_large_n() {
        let d = a_nonlinear_diagonal(3, 0.3, 200).unwrap();
        assert!(d.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn displacement_phase_small_lambda_is_identity() {
        let u = displacement_phase(1e-9, 6).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(u.space())).unwrap() < 1e-8);
        let u0 = displacement_phase(0.0, 6).unwrap();
        assert!(u0.max_abs_diff(&Operator::identity(u0.space())).unwrap() == 0.0);
    }

    #[test]
    fn displacement_phase_vacuum_element() {
        let u = displacement_phase_expm(0.3, 20).unwrap();
        assert!((u.get(0, 0) - re((-0.18f64).exp())).norm() < 1e-10);
        let c = displacement_phase(0.3, 20).unwrap();
        assert!((c.get(0, 0).re - 0.835270).abs() < 1e-6);
    }

    #[test]
    fn displacement_phase_unitary_on_low_block() {
        let u = displacement_phase(0.3, 30).unwrap().to_dense();
        let p = u.adjoint() * &u;
        let mut worst: f64 = 0.0;
        for i in 0..15 {
            for j in 0..15 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - re(target)).norm());
            }
        }
        assert!(worst < 1e-8, "worst = {worst}");
    }

    #[test]
    fn closed_form_matches_expm_away_from_cutoff() {
        let closed = displacement_phase(0.4, 40).unwrap();
        let oracle = displacement_phase_expm(0.4, 40).unwrap();
        for m in 0..15 {
            for n in 0..15 {
                assert!((closed.get(m, n) - oracle.get(m, n)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn embed_number_eigenvalue() {
        let space = FockSpace::fridge(3, 4, 2).unwrap();
        let n_c = embed(&number(3).unwrap(), "c", &space).unwrap();
        for idx in 0..space.dim() {
            let occ = space.occupations(idx);
            assert_eq!(n_c.get(idx, idx).re, occ[0] as f64);
            assert_eq!(space.index_of(&occ), idx);
        }
        // ((n_c·dim_h) + n_h)·dim_r + n_r
        assert_eq!(space.index_of(&[2, 1, 1]), (2 * 4 + 1) * 2 + 1);
    }

    #[test]
    fn embedded_modes_commute_and_trace_factorizes() {
        let space = FockSpace::fridge(3, 4, 2).unwrap();
        let ac = embed(&annihilation(3).unwrap(), "c", &space).unwrap();
        let ah = embed(&annihilation(4).unwrap(), "h", &space).unwrap();
        let comm = ac.commutator(&ah).unwrap();
        assert_eq!(comm.matrix().nnz(), 0);

        let n = number(4).unwrap();
        let nh = embed(&n, "h", &space).unwrap();
        assert_eq!(nh.trace(), n.trace() * 6.0);
        assert!(matches!(embed(&n, "x", &space), Err(Error::UnknownMode(_))));
        assert!(embed(&n, "c", &space).is_err());
    }

    #[test]
    fn embed_is_multiplicative() {
        let space = FockSpace::fridge(3, 4, 2).unwrap();
        let a = annihilation(4).unwrap();
        let b = a_nonlinear(1, 0.3, 4).unwrap();
        let lhs = embed(&a.mul(&b).unwrap(), "h", &space).unwrap();
        let rhs = embed(&a, "h", &space)
            .unwrap()
            .mul(&embed(&b, "h", &space).unwrap())
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);
    }

    fn thermal_diag(d: usize, q: f64) -> Mat<C64> {
        let z: f64 = (0..d).map(|n| q.powi(n as i32)).sum();
        Mat::from_fn(d, d, |i, j| if i == j { re(q.powi(i as i32) / z) } else { re(0.0) })
    }

    fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
        Mat::from_fn(a.nrows() * b.nrows(), a.ncols() * b.ncols(), |i, j| {
            a[(i / b.nrows(), j / b.ncols())] * b[(i % b.nrows(), j % b.ncols())]
        })
    }

    #[test]
    fn partial_trace_of_product_state() {
        let space = FockSpace::fridge(3, 4, 2).unwrap();
        let mut rc = thermal_diag(3, 0.4);
        rc[(0, 1)] = C64::new(0.05, 0.02);
        rc[(1, 0)] = C64::new(0.05, -0.02);
        let rh = thermal_diag(4, 0.7);
        let rr = thermal_diag(2, 0.1);
        let rho = kron(&kron(&rc, &rh), &rr);
        let red = partial_trace(rho.as_ref(), "c", &space).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((red[(i, j)] - rc[(i, j)]).norm() < 1e-15);
            }
        }
        let red_h = partial_trace(rho.as_ref(), "h", &space).unwrap();
        for i in 0..4 {
            assert!((red_h[(i, i)] - rh[(i, i)]).norm() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_maximally_mixed() {
        let space = FockSpace::fridge(3, 4, 2).unwrap();
        let d = space.dim();
        let rho = Mat::from_fn(d, d, |i, j| if i == j { re(1.0 / d as f64) } else { re(0.0) });
        let red = partial_trace(rho.as_ref(), "c", &space).unwrap();
        let tr: C64 = (0..3).map(|i| red[(i, i)]).sum();
        assert!((tr - re(1.0)).norm() < 1e-12);
        for i in 0..3 {
            assert!((red[(i, i)].re - 1.0 / 3.0).abs() < 1e-15);
        }
        let bad = Mat::<C64>::zeros(5, 5);
        assert!(partial_trace(bad.as_ref(), "c", &space).is_err());
    }
}
