//! Local Lindblad master equation as a sparse superoperator.
//!
//! Density matrices are stored on a [`PairBasis`]: a list of (ket, bra)
//! index pairs that is closed under the generator. For the resonant
//! Hamiltonians only coherences between states that differ by whole
//! conversion quanta ever become populated, so the closure reached from the
//! diagonal is much smaller than the full D² space. The full basis uses
//! column stacking, `index = ket + bra · D`.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{annihilation, embed, FockSpace, Mode, Operator};
use crate::linalg::hermitian_eigen;
use crate::model::SystemParams;
use crate::sparse::CsrMatrix;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Index set of the matrix elements a density matrix may occupy.
#[derive(Debug)]
pub struct PairBasis {
    space: FockSpace,
    /// (ket, bra), sorted by (bra, ket).
    pairs: Vec<(usize, usize)>,
    lookup: Option<HashMap<(usize, usize), usize>>,
    diagonal: Vec<usize>,
    transpose: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl PairBasis {
    /// Every (ket, bra) pair, in column-stacking order.
    pub fn full(space: &FockSpace) -> Arc<Self> {
        let d = space.dim();
        let pairs = (0..d).flat_map(|b| (0..d).map(move |k| (k, b))).collect();
        Arc::new(Self::finish(space.clone(), pairs, false))
    }

    /// Smallest pair set containing the diagonal and closed under every
    /// sandwich term of the given Hamiltonians and jump operators.
    pub fn closure(space: &FockSpace, hamiltonians: &[&Operator], jumps: &[&Operator]) -> Result<Arc<Self>> {
        let mut terms = Vec::new();
        for h in hamiltonians {
            check_space(space, h)?;
            terms.extend(unitary_terms(h, C64::new(1.0, 0.0)));
        }
        for a in jumps {
            check_space(space, a)?;
            terms.extend(jump_terms(a, 1.0));
        }
        let d = space.dim();
        let mut seen: HashMap<(usize, usize), ()> = (0..d).map(|m| ((m, m), ())).collect();
        let mut queue: VecDeque<(usize, usize)> = (0..d).map(|m| (m, m)).collect();
        while let Some((m, n)) = queue.pop_front() {
            for t in &terms {
                t.for_each(m, n, |i, j, _| {
                    if seen.insert((i, j), ()).is_none() {
                        queue.push_back((i, j));
                    }
                });
            }
        }
        let mut pairs: Vec<(usize, usize)> = seen.into_keys().collect();
        pairs.sort_unstable_by_key(|&(k, b)| (b, k));
        let full = pairs.len() == d * d;
        Ok(Arc::new(Self::finish(space.clone(), pairs, !full)))
    }

    fn finish(space: FockSpace, pairs: Vec<(usize, usize)>, use_lookup: bool) -> Self {
        let d = space.dim();
        let lookup = use_lookup.then(|| pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect());
        let mut basis = Self {
            space,
            pairs,
            lookup,
            diagonal: Vec::new(),
            transpose: Vec::new(),
            blocks: Vec::new(),
        };
        basis.diagonal = (0..d).map(|m| basis.index_of(m, m).expect("diagonal present")).collect();
        basis.transpose = basis
            .pairs
            .iter()
            .map(|&(k, b)| basis.index_of(b, k).expect("closure is symmetric"))
            .collect();
        basis.blocks = ket_blocks(d, &basis.pairs);
        basis
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.lookup.is_none()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair(&self, i: usize) -> (usize, usize) {
        self.pairs[i]
    }

    pub fn index_of(&self, ket: usize, bra: usize) -> Option<usize> {
        match &self.lookup {
            Some(map) => map.get(&(ket, bra)).copied(),
            None => {
                let d = self.space.dim();
                (ket < d && bra < d).then_some(ket + bra * d)
            }
        }
    }

    /// Position of the population of basis state `m`.
    pub fn diagonal_index(&self, m: usize) -> usize {
        self.diagonal[m]
    }

    /// Index of the conjugate-transposed pair.
    pub fn transpose_index(&self, i: usize) -> usize {
        self.transpose[i]
    }

    /// Groups of kets coupled by at least one stored pair; the density matrix
    /// is block diagonal over them.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

fn ket_blocks(d: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(k, b) in pairs {
        let (rk, rb) = (find(&mut parent, k), find(&mut parent, b));
        if rk != rb {
            parent[rk.max(rb)] = rk.min(rb);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for m in 0..d {
        let r = find(&mut parent, m);
        groups.entry(r).or_default().push(m);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_unstable_by_key(|g| g[0]);
    out
}

fn check_space(space: &FockSpace, op: &Operator) -> Result<()> {
    if op.space() != space {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: op.dim(),
        });
    }
    Ok(())
}

/// One term c · X ρ Y of the generator; `None` stands for the identity.
struct Sandwich {
    /// Xᵀ, so that its rows enumerate the columns of X.
    left_t: Option<CsrMatrix>,
    right: Option<CsrMatrix>,
}

impl Sandwich {
    fn for_each(&self, m: usize, n: usize, mut f: impl FnMut(usize, usize, C64)) {
        let one = C64::new(1.0, 0.0);
        match (&self.left_t, &self.right) {
            (Some(x), Some(y)) => {
                for (i, a) in x.row(m) {
                    for (j, b) in y.row(n) {
                        f(i, j, a * b);
                    }
                }
            }
            (Some(x), None) => x.row(m).for_each(|(i, a)| f(i, n, a)),
            (None, Some(y)) => y.row(n).for_each(|(j, b)| f(m, j, b)),
            (None, None) => f(m, n, one),
        }
    }
}

fn unitary_terms(h: &Operator, scale: C64) -> Vec<Sandwich> {
    let mi = C64::new(0.0, -1.0) * scale;
    vec![
        Sandwich {
            left_t: Some(h.matrix().transpose().scale(mi)),
            right: None,
        },
        Sandwich {
            left_t: None,
            right: Some(h.matrix().scale(-mi)),
        },
    ]
}

fn jump_terms(a: &Operator, rate: f64) -> Vec<Sandwich> {
    let ad = a.matrix().adjoint();
    let ada = ad.matmul(a.matrix()).expect("square operator");
    let half = C64::new(-0.5 * rate, 0.0);
    vec![
        Sandwich {
            left_t: Some(a.matrix().transpose().scale(C64::new(rate, 0.0))),
            right: Some(ad),
        },
        Sandwich {
            left_t: Some(ada.transpose().scale(half)),
            right: None,
        },
        Sandwich {
            left_t: None,
            right: Some(ada.scale(half)),
        },
    ]
}

fn assemble(basis: &PairBasis, terms: &[Sandwich]) -> Result<CsrMatrix> {
    let n = basis.len();
    let mut triplets = Vec::new();
    let mut missing = None;
    for (col, &(m, k)) in basis.pairs.iter().enumerate() {
        for t in terms {
            t.for_each(m, k, |i, j, v| match basis.index_of(i, j) {
                Some(row) => triplets.push((row, col, v)),
                None => missing = Some((i, j)),
            });
        }
    }
    if let Some((i, j)) = missing {
        return Err(Error::InvalidArgument(format!(
            "pair basis is not closed under the generator (reaches ({i}, {j}))"
        )));
    }
    Ok(CsrMatrix::from_triplets(n, n, &triplets))
}

/// A jump operator with its rate (1/ns).
#[derive(Clone, Debug)]
pub struct Jump {
    pub op: Operator,
    pub rate: f64,
}

/// Dissipative channels attached to one bath.
#[derive(Clone, Debug)]
pub struct Bath {
    pub label: String,
    pub jumps: Vec<Jump>,
}

impl Bath {
    /// κ(n_B + 1) D[a] + κ n_B D[a†]; κ in 1/ns.
    pub fn thermal(label: &str, a: &Operator, kappa: f64, n_b: f64) -> Self {
        let mut jumps = vec![Jump {
            op: a.clone(),
            rate: kappa * (n_b + 1.0),
        }];
        if n_b > 0.0 {
            jumps.push(Jump {
                op: a.adjoint(),
                rate: kappa * n_b,
            });
        }
        Self {
            label: label.to_string(),
            jumps,
        }
    }
}

/// The three local thermal baths of the refrigerator.
pub fn local_baths(params: &SystemParams, space: &FockSpace) -> Result<Vec<Bath>> {
    Mode::ALL
        .iter()
        .map(|&m| {
            let osc = params.oscillator(m);
            let a = embed(&annihilation(space.dims()[space.position(m.label())?])?, m.label(), space)?;
            Ok(Bath::thermal(m.label(), &a, osc.kappa(), osc.bath_occupation()))
        })
        .collect()
}

/// Vectorized D[A] on the full column-stacked basis.
pub fn dissipator(jump: &Operator) -> CsrMatrix {
    let basis = PairBasis::full(jump.space());
    assemble(&basis, &jump_terms(jump, 1.0)).expect("full basis is closed")
}

/// Sparse generator split into its unitary part and one part per bath.
#[derive(Debug)]
pub struct Liouvillian {
    basis: Arc<PairBasis>,
    unitary: CsrMatrix,
    baths: Vec<(String, CsrMatrix)>,
    total: CsrMatrix,
}

impl Liouvillian {
    /// Assembles the generator on the given basis, which must be closed.
    pub fn with_basis(h: &Operator, baths: &[Bath], basis: Arc<PairBasis>) -> Result<Self> {
        check_space(basis.space(), h)?;
        let unitary = assemble(&basis, &unitary_terms(h, C64::new(1.0, 0.0)))?;
        let mut parts = Vec::with_capacity(baths.len());
        for bath in baths {
            let mut terms = Vec::new();
            for j in &bath.jumps {
                check_space(basis.space(), &j.op)?;
                terms.extend(jump_terms(&j.op, j.rate));
            }
            parts.push((bath.label.clone(), assemble(&basis, &terms)?));
        }
        let mut total = unitary.clone();
        for (_, p) in &parts {
            total = total.add(p)?;
        }
        Ok(Self {
            basis,
            unitary,
            baths: parts,
            total,
        })
    }

    /// Assembles the generator on the closure of `h` and the jumps.
    pub fn new(h: &Operator, baths: &[Bath]) -> Result<Self> {
        let jumps: Vec<&Operator> = baths.iter().flat_map(|b| b.jumps.iter().map(|j| &j.op)).collect();
        let basis = PairBasis::closure(h.space(), &[h], &jumps)?;
        Self::with_basis(h, baths, basis)
    }

    pub fn basis(&self) -> &Arc<PairBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.total
    }

    pub fn unitary_part(&self) -> &CsrMatrix {
        &self.unitary
    }

    pub fn bath_labels(&self) -> impl Iterator<Item = &str> {
        self.baths.iter().map(|(l, _)| l.as_str())
    }

    pub fn bath_part(&self, label: &str) -> Option<&CsrMatrix> {
        self.baths.iter().find(|(l, _)| l == label).map(|(_, m)| m)
    }

    pub fn has_dissipation(&self) -> bool {
        self.baths.iter().any(|(_, m)| m.nnz() > 0)
    }

    /// `out = L · x` on raw vectors.
    pub fn apply_vec(&self, x: &[C64], out: &mut [C64]) {
        self.total.par_mul_vec_into(x, out);
    }

    /// dρ/dt.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_basis(rho)?;
        let mut out = vec![ZERO; self.dim()];
        self.apply_vec(rho.data(), &mut out);
        Ok(DensityMatrix::from_raw(self.basis.clone(), out))
    }

    /// Contribution of one bath to dρ/dt.
    pub fn apply_bath(&self, label: &str, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_basis(rho)?;
        let part = self
            .bath_part(label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))?;
        Ok(DensityMatrix::from_raw(self.basis.clone(), part.mul_vec(rho.data())))
    }

    /// Dense copy of the superoperator for small systems.
    pub fn to_dense(&self) -> Result<Mat<C64>> {
        if self.dim() > 64 * 64 {
            return Err(Error::MemoryBudget(format!(
                "dense superoperator of dimension {} requested",
                self.dim()
            )));
        }
        Ok(self.total.to_dense())
    }

    fn check_basis(&self, rho: &DensityMatrix) -> Result<()> {
        if !Arc::ptr_eq(&self.basis, rho.basis()) && rho.basis().pairs() != self.basis.pairs() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.len(),
            });
        }
        Ok(())
    }
}

/// Master equation of the refrigerator for Hamiltonian `h`.
pub fn build_liouvillian(h: &Operator, params: &SystemParams) -> Result<Liouvillian> {
    Liouvillian::new(h, &local_baths(params, h.space())?)
}

/// Density matrix stored on a pair basis.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    basis: Arc<PairBasis>,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn new(basis: Arc<PairBasis>, data: Vec<C64>) -> Result<Self> {
        if data.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: data.len(),
            });
        }
        Ok(Self { basis, data })
    }

    pub(crate) fn from_raw(basis: Arc<PairBasis>, data: Vec<C64>) -> Self {
        Self { basis, data }
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(basis: Arc<PairBasis>, populations: &[f64]) -> Result<Self> {
        if populations.len() != basis.space().dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.space().dim(),
                found: populations.len(),
            });
        }
        let mut data = vec![ZERO; basis.len()];
        for (m, &p) in populations.iter().enumerate() {
            data[basis.diagonal_index(m)] = C64::new(p, 0.0);
        }
        Ok(Self { basis, data })
    }

    /// Product of truncated thermal states with the given mean occupations
    /// (Boltzmann weights renormalized on each truncated ladder).
    pub fn thermal_product(basis: Arc<PairBasis>, occupations: &[f64]) -> Result<Self> {
        let space = basis.space().clone();
        if occupations.len() != space.num_modes() {
            return Err(Error::DimensionMismatch {
                expected: space.num_modes(),
                found: occupations.len(),
            });
        }
        let single: Vec<Vec<f64>> = occupations
            .iter()
            .zip(space.dims())
            .map(|(&n, &d)| thermal_populations(n, d))
            .collect();
        let pops: Vec<f64> = (0..space.dim())
            .map(|m| {
                space
                    .occupations(m)
                    .iter()
                    .enumerate()
                    .map(|(k, &o)| single[k][o])
                    .product()
            })
            .collect();
        Self::from_populations(basis, &pops)
    }

    /// Projects a dense matrix onto the basis. Fails if weight outside the
    /// basis exceeds `1e-12`.
    pub fn from_dense(basis: Arc<PairBasis>, m: &Mat<C64>) -> Result<Self> {
        let d = basis.space().dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
        let data: Vec<C64> = basis.pairs().iter().map(|&(k, b)| m[(k, b)]).collect();
        if !basis.is_full() {
            let kept: f64 = data.iter().map(|v| v.norm_sqr()).sum();
            let total: f64 = (0..d).flat_map(|j| (0..d).map(move |i| (i, j))).map(|(i, j)| m[(i, j)].norm_sqr()).sum();
            if total - kept > 1e-24 {
                return Err(Error::InvalidArgument(format!(
                    "state has weight {:e} outside the pair basis",
                    (total - kept).sqrt()
                )));
            }
        }
        Ok(Self { basis, data })
    }

    pub fn basis(&self) -> &Arc<PairBasis> {
        &self.basis
    }

    pub fn space(&self) -> &FockSpace {
        self.basis.space()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, ket: usize, bra: usize) -> C64 {
        self.basis.index_of(ket, bra).map_or(ZERO, |i| self.data[i])
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let d = self.space().dim();
        let mut m = Mat::<C64>::zeros(d, d);
        for (&(k, b), &v) in self.basis.pairs().iter().zip(&self.data) {
            m[(k, b)] = v;
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.space().dim()).map(|m| self.data[self.basis.diagonal_index(m)]).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.space().dim())
            .map(|m| self.data[self.basis.diagonal_index(m)].re)
            .collect()
    }

    /// ⟨n⟩ of the mode at position `pos`.
    pub fn mean_occupation(&self, pos: usize) -> f64 {
        let space = self.space();
        (0..space.dim())
            .map(|m| space.occupation(m, pos) as f64 * self.data[self.basis.diagonal_index(m)].re)
            .sum()
    }

    pub fn mean_n(&self, mode: &str) -> Result<f64> {
        Ok(self.mean_occupation(self.space().position(mode)?))
    }

    /// Tr{O ρ}.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        check_space(self.space(), op)?;
        let mut acc = ZERO;
        for (&(k, b), &v) in self.basis.pairs().iter().zip(&self.data) {
            acc += op.get(b, k) * v;
        }
        Ok(acc)
    }

    /// Reduced density matrix of one mode.
    pub fn reduced(&self, mode: &str) -> Result<Mat<C64>> {
        let space = self.space();
        let pos = space.position(mode)?;
        let dk = space.dims()[pos];
        let stride = space.stride(pos);
        let mut out = Mat::<C64>::zeros(dk, dk);
        for (&(k, b), &v) in self.basis.pairs().iter().zip(&self.data) {
            let (ok, ob) = ((k / stride) % dk, (b / stride) % dk);
            if k - ok * stride == b - ob * stride {
                out[(ok, ob)] += v;
            }
        }
        Ok(out)
    }

    /// max |ρ − ρ†| elementwise.
    pub fn hermiticity_residue(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.data[i] - self.data[self.basis.transpose_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// ρ ← (ρ + ρ†)/2
    pub fn symmetrize(&mut self) {
        for i in 0..self.len() {
            let t = self.basis.transpose_index(i);
            if t >= i {
                let avg = 0.5 * (self.data[i] + self.data[t].conj());
                self.data[i] = avg;
                self.data[t] = avg.conj();
            }
        }
    }

    /// Rescales to unit trace; returns the trace before rescaling.
    pub fn normalize(&mut self) -> C64 {
        let tr = self.trace();
        let s = 1.0 / tr.re;
        self.data.iter_mut().for_each(|v| *v *= s);
        tr
    }

    fn block_matrix(&self, block: &[usize]) -> Mat<C64> {
        Mat::<C64>::from_fn(block.len(), block.len(), |i, j| self.get(block[i], block[j]))
    }

    /// Spectrum of the Hermitian part, block by block.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.space().dim());
        for block in self.basis.blocks() {
            if block.len() == 1 {
                out.push(self.get(block[0], block[0]).re);
                continue;
            }
            let (w, _) = hermitian_eigen(&self.block_matrix(block))?;
            out.extend(w);
        }
        Ok(out)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// If any eigenvalue is below `threshold`, sets the negative part of the
    /// spectrum to zero and renormalizes. Returns the most negative
    /// eigenvalue found when clipping happened.
    pub fn clip_negative(&mut self, threshold: f64) -> Result<Option<f64>> {
        let min = self.min_eigenvalue()?;
        if min >= threshold {
            return Ok(None);
        }
        let basis = self.basis.clone();
        for block in basis.blocks() {
            if block.len() == 1 {
                let i = basis.diagonal_index(block[0]);
                self.data[i].re = self.data[i].re.max(0.0);
                continue;
            }
            let (w, v) = hermitian_eigen(&self.block_matrix(block))?;
            if w.iter().all(|&x| x >= 0.0) {
                continue;
            }
            let n = block.len();
            for a in 0..n {
                for b in 0..n {
                    if let Some(idx) = basis.index_of(block[a], block[b]) {
                        self.data[idx] = (0..n)
                            .filter(|&k| w[k] > 0.0)
                            .map(|k| v[(a, k)] * v[(b, k)].conj() * w[k])
                            .sum();
                    }
                }
            }
        }
        self.normalize();
        log::warn!("clipped negative eigenvalue {min:e} and renormalized");
        Ok(Some(min))
    }
}

/// Boltzmann populations with mean occupation `n` (of the untruncated
/// ladder), renormalized on `dim` levels.
pub fn thermal_populations(n: f64, dim: usize) -> Vec<f64> {
    if n <= 0.0 {
        let mut p = vec![0.0; dim];
        p[0] = 1.0;
        return p;
    }
    let r = n / (n + 1.0);
    let mut p: Vec<f64> = (0..dim).map(|k| r.powi(k as i32)).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::creation;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn column_stacking_golden() {
        let space = FockSpace::single(2).unwrap();
        let sx = Operator::new(
            space.clone(),
            CsrMatrix::from_triplets(2, 2, &[(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]),
        )
        .unwrap();
        let a = annihilation(2).unwrap();
        let bath = Bath {
            label: "a".into(),
            jumps: vec![Jump { op: a.clone(), rate: 1.0 }],
        };
        let l = Liouvillian::with_basis(&sx, &[bath], PairBasis::full(&space)).unwrap();
        let m = l.matrix().to_dense();
        let expected = [
            [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)],
            [c(0.0, -1.0), c(-0.5, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
            [c(0.0, 1.0), c(0.0, 0.0), c(-0.5, 0.0), c(0.0, -1.0)],
            [c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(-1.0, 0.0)],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[(i, j)], expected[i][j], "entry ({i}, {j})");
            }
        }
    }

    #[test]
    fn dissipator_examples() {
        let a = annihilation(2).unwrap();
        let d = dissipator(&a);
        // |1><1| has column-stacked index 1 + 1·2 = 3
        let out = d.mul_vec(&[ZERO, ZERO, ZERO, c(1.0, 0.0)]);
        assert_eq!(out, vec![c(1.0, 0.0), ZERO, ZERO, c(-1.0, 0.0)]);
        let out = d.mul_vec(&[c(1.0, 0.0), ZERO, ZERO, ZERO]);
        assert!(out.iter().all(|v| *v == ZERO));
    }

    #[test]
    fn dissipator_is_trace_free() {
        let space = FockSpace::single(4).unwrap();
        let a = annihilation(4).unwrap().add(&creation(4).unwrap().scale(c(0.3, 0.2))).unwrap();
        let d = dissipator(&a);
        let basis = PairBasis::full(&space);
        let x: Vec<C64> = (0..16).map(|i| c((i as f64).sin(), (i as f64 * 0.7).cos())).collect();
        let y = d.mul_vec(&x);
        let tr: C64 = (0..4).map(|m| y[basis.diagonal_index(m)]).sum();
        assert!(tr.norm() < 1e-14);
    }

    #[test]
    fn closure_of_resonant_coupling() {
        let space = FockSpace::fridge(3, 3, 3).unwrap();
        let ac = embed(&annihilation(3).unwrap(), "c", &space).unwrap();
        let ah = embed(&annihilation(3).unwrap(), "h", &space).unwrap();
        let ar = embed(&annihilation(3).unwrap(), "r", &space).unwrap();
        let t = ar.adjoint().mul(&ac).unwrap().mul(&ah).unwrap().plus_adjoint();
        let basis = PairBasis::closure(&space, &[&t], &[&ac, &ah, &ar]).unwrap();
        for &(k, b) in basis.pairs() {
            let (x, y) = (space.occupations(k), space.occupations(b));
            let j = x[0] as i64 - y[0] as i64;
            assert_eq!(x[1] as i64 - y[1] as i64, j);
            assert_eq!(x[2] as i64 - y[2] as i64, -j);
        }
        assert!(basis.len() < space.dim() * space.dim() / 4);
        assert!(basis.pairs().windows(2).all(|w| (w[0].1, w[0].0) < (w[1].1, w[1].0)));
        for i in 0..basis.len() {
            assert_eq!(basis.transpose_index(basis.transpose_index(i)), i);
        }
    }

    #[test]
    fn thermal_populations_truncated() {
        let p = thermal_populations(1.0, 60);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(thermal_populations(0.0, 3), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn reduced_state_of_product() {
        let space = FockSpace::fridge(3, 4, 2).unwrap();
        let basis = PairBasis::full(&space);
        let rho = DensityMatrix::thermal_product(basis, &[0.4, 1.5, 0.0]).unwrap();
        let rc = rho.reduced("c").unwrap();
        let p = thermal_populations(0.4, 3);
        for i in 0..3 {
            assert!((rc[(i, i)].re - p[i]).abs() < 1e-15);
        }
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!((rho.mean_n("r").unwrap()).abs() < 1e-15);
    }

    #[test]
    fn clip_restores_positivity() {
        let space = FockSpace::single(2).unwrap();
        let basis = PairBasis::full(&space);
        let mut rho = DensityMatrix::new(
            basis,
            vec![c(1.0, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(-0.01, 0.0)],
        )
        .unwrap();
        assert!(rho.min_eigenvalue().unwrap() < 0.0);
        let m = rho.clip_negative(-1e-10).unwrap();
        assert!(m.is_some());
        assert!(rho.min_eigenvalue().unwrap() > -1e-14);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!(rho.hermiticity_residue() < 1e-15);
    }
}
