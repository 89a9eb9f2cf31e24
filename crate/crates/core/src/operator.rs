//! Dense complex operator algebra: Pauli embeddings, collective spins,
//! tensor products, commutators and a sorted Hermitian eigendecomposition.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{argument, Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Entrywise tolerance for the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on the norm of a state marked normalized.
pub const NORM_TOL: f64 = 1e-10;
/// Largest dimension produced by `kron` and the site embeddings.
pub const MAX_EMBED_DIM: usize = 1 << 14;
/// Largest number of sites accepted by the site embeddings.
pub const MAX_SITES: usize = 14;
/// Largest dimension of a collective-spin sector.
pub const MAX_COLLECTIVE_DIM: usize = 1 << 16;
/// Eigenvalues closer than this times `max(1, ‖H‖)` are degenerate.
pub const DEGENERACY_RTOL: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Dense Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Largest entrywise deviation `|A - A†|`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

impl HermitianOperator {
    /// Wraps `matrix` after checking shape, finiteness and Hermiticity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(argument("operator matrix must be square and non-empty"));
        }
        check_finite(&matrix)?;
        let deviation = hermiticity_defect(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { matrix })
    }

    /// Projects `matrix` onto its Hermitian part `(A + A†)/2`.
    pub fn hermitize(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(argument("operator matrix must be square and non-empty"));
        }
        check_finite(&matrix)?;
        Ok(Self::from_raw(hermitian_part(matrix)))
    }

    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(matrix.map(|x| C64::new(x, 0.0)))
    }

    pub(crate) fn from_raw(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(ComplexMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_raw(ComplexMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// True when every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_raw(self.matrix.map(|z| z * s))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self::from_raw(&self.matrix + &other.matrix))
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: f64, other: &Self) -> Result<()> {
        same_dim(self.dim(), other.dim())?;
        self.matrix.zip_apply(&other.matrix, |a, b| *a += b * s);
        Ok(())
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.matrix * v
    }

    /// `⟨a|self|b⟩`.
    pub fn matrix_element(&self, a: &DVector<C64>, b: &DVector<C64>) -> C64 {
        a.dotc(&(&self.matrix * b))
    }

    /// `self · other` as a general matrix.
    pub fn product(&self, other: &Self) -> Result<ComplexMatrix> {
        same_dim(self.dim(), other.dim())?;
        Ok(&self.matrix * &other.matrix)
    }

    /// Hermitian part of `self · other`, i.e. half the anticommutator.
    pub fn symmetrized_product(&self, other: &Self) -> Result<Self> {
        let p = self.product(other)?;
        Ok(Self::from_raw(hermitian_part(p)))
    }
}

pub(crate) fn hermitian_part(mut m: ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in 0..j {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    m
}

pub(crate) fn same_dim(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// Panics on dimension mismatch; use `checked_add` for a fallible sum.
impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator::from_raw(&self.matrix + &rhs.matrix)
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator::from_raw(&self.matrix - &rhs.matrix)
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scaled(rhs)
    }
}

/// Normalized complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Wraps amplitudes that must already have unit norm.
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(argument("state vector must be non-empty"));
        }
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm == 0.0 {
            return Err(argument("cannot normalize the zero vector"));
        }
        Ok(Self { amplitudes: amplitudes / C64::new(norm, 0.0) })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(argument("basis index out of range"));
        }
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Ok(Self { amplitudes: v })
    }

    pub(crate) fn from_raw(amplitudes: DVector<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        same_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        let f = C64::from_polar(1.0, phase);
        Self { amplitudes: self.amplitudes.map(|z| z * f) }
    }
}

/// Pauli matrix for one spin-1/2.
pub fn pauli(axis: Axis) -> HermitianOperator {
    let m = match axis {
        Axis::X => ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Axis::Z => ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    };
    HermitianOperator::from_raw(m)
}

/// Tensor product `a ⊗ b`.
pub fn kron(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    kron_with_capacity(a, b, MAX_EMBED_DIM)
}

pub fn kron_with_capacity(
    a: &HermitianOperator,
    b: &HermitianOperator,
    max_dim: usize,
) -> Result<HermitianOperator> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or(Error::Capacity { dim: usize::MAX, max: max_dim })?;
    if dim > max_dim {
        return Err(Error::Capacity { dim, max: max_dim });
    }
    Ok(HermitianOperator::from_raw(a.matrix.kronecker(&b.matrix)))
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 {
        return Err(argument("n_sites must be at least 1"));
    }
    if n_sites > MAX_SITES {
        return Err(Error::Capacity { dim: 1usize << n_sites.min(63), max: MAX_EMBED_DIM });
    }
    Ok(())
}

/// Product of Pauli matrices on distinct sites, embedded in `n_sites` spins.
///
/// Site 0 is the leftmost tensor factor (most significant bit of the basis
/// index) and bit value 0 is spin up, so `σ^z` on site 0 of two spins is
/// `diag(1, 1, -1, -1)`.
pub fn pauli_string(factors: &[(usize, Axis)], n_sites: usize) -> Result<HermitianOperator> {
    check_sites(n_sites)?;
    let mut seen = 0usize;
    for &(site, _) in factors {
        if site >= n_sites {
            return Err(argument("site index out of range"));
        }
        if seen & (1 << site) != 0 {
            return Err(argument("pauli_string sites must be distinct"));
        }
        seen |= 1 << site;
    }
    let dim = 1usize << n_sites;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut row = col;
        let mut amp = ONE;
        for &(site, axis) in factors {
            let shift = n_sites - 1 - site;
            let down = (col >> shift) & 1 == 1;
            match axis {
                Axis::X => row ^= 1 << shift,
                Axis::Y => {
                    row ^= 1 << shift;
                    amp *= if down { -I } else { I };
                }
                Axis::Z => {
                    if down {
                        amp = -amp;
                    }
                }
            }
        }
        m[(row, col)] = amp;
    }
    Ok(HermitianOperator::from_raw(m))
}

/// `I ⊗ … ⊗ σ^axis ⊗ … ⊗ I` with the Pauli matrix at `site`.
pub fn embed_pauli(site: usize, axis: Axis, n_sites: usize) -> Result<HermitianOperator> {
    pauli_string(&[(site, axis)], n_sites)
}

/// Total spin component `S^axis = ½ Σ σ_i^axis` restricted to the
/// maximum-spin sector `S = N/2`, basis ordered `m = S, S-1, …, -S`.
pub fn collective_spin(axis: Axis, n_spins: usize) -> Result<HermitianOperator> {
    if n_spins == 0 {
        return Err(argument("n_spins must be at least 1"));
    }
    let dim = n_spins + 1;
    if dim > MAX_COLLECTIVE_DIM {
        return Err(Error::Capacity { dim, max: MAX_COLLECTIVE_DIM });
    }
    let s = n_spins as f64 / 2.0;
    let m_of = |k: usize| s - k as f64;
    let mut out = ComplexMatrix::zeros(dim, dim);
    match axis {
        Axis::Z => {
            for k in 0..dim {
                out[(k, k)] = C64::new(m_of(k), 0.0);
            }
        }
        Axis::X | Axis::Y => {
            for k in 1..dim {
                let m = m_of(k);
                // ⟨m+1|S^+|m⟩
                let raise = libm::sqrt((s * (s + 1.0) - m * (m + 1.0)).max(0.0));
                let (upper, lower) = match axis {
                    Axis::X => (C64::new(raise / 2.0, 0.0), C64::new(raise / 2.0, 0.0)),
                    _ => (C64::new(0.0, -raise / 2.0), C64::new(0.0, raise / 2.0)),
                };
                out[(k - 1, k)] = upper;
                out[(k, k - 1)] = lower;
            }
        }
    }
    Ok(HermitianOperator::from_raw(out))
}

/// `ab - ba`.
pub fn commutator(a: &HermitianOperator, b: &HermitianOperator) -> Result<ComplexMatrix> {
    same_dim(a.dim(), b.dim())?;
    Ok(&a.matrix * &b.matrix - &b.matrix * &a.matrix)
}

/// Sorted eigenvalues and eigenvectors (columns) of a Hermitian operator at
/// one time point.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFrame {
    pub time: f64,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralFrame {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> StateVector {
        StateVector::from_raw(self.eigenvectors.column(k).into_owned())
    }

    /// `max(1, max |E|)`, the scale used for relative spectral tolerances.
    pub fn energy_scale(&self) -> f64 {
        self.eigenvalues.iter().fold(1.0f64, |acc, e| acc.max(e.abs()))
    }

    pub fn degeneracy_tolerance(&self) -> f64 {
        DEGENERACY_RTOL * self.energy_scale()
    }

    /// Maximal runs of consecutive levels closer than the degeneracy
    /// tolerance, as half-open index ranges covering every level.
    pub fn degenerate_blocks(&self) -> Vec<core::ops::Range<usize>> {
        let tol = self.degeneracy_tolerance();
        let mut blocks = Vec::new();
        let mut start = 0;
        for k in 1..=self.dim() {
            if k == self.dim() || self.eigenvalues[k] - self.eigenvalues[k - 1] > tol {
                blocks.push(start..k);
                start = k;
            }
        }
        blocks
    }

    /// The degenerate block containing level `n`.
    pub fn block_of(&self, n: usize) -> core::ops::Range<usize> {
        self.degenerate_blocks()
            .into_iter()
            .find(|b| b.contains(&n))
            .unwrap_or(n..n + 1)
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.degenerate_blocks().iter().all(|b| b.len() == 1)
    }

    /// Reconstructs `V diag(E) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, e) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(*e);
        }
        scaled * self.eigenvectors.adjoint()
    }
}

/// Index sets of the connected components of the union of the nonzero
/// patterns of `mats`. Each block is sorted; blocks are ordered by their
/// first index.
pub(crate) fn block_partition(mats: &[&ComplexMatrix]) -> Vec<Vec<usize>> {
    let n = mats[0].nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in mats {
        for j in 0..n {
            for i in 0..j {
                if m[(i, j)] != ZERO || m[(j, i)] != ZERO {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut root_block = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_block[r] == usize::MAX {
            root_block[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[root_block[r]].push(i);
    }
    blocks
}

/// Eigenvectors of one block, real when the block is real.
pub(crate) enum BlockVectors {
    Real(DMatrix<f64>),
    Complex(ComplexMatrix),
}

pub(crate) struct BlockEigen {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub vectors: BlockVectors,
}

pub(crate) fn submatrix(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

pub(crate) fn is_real_matrix(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn non_convergence(m: &ComplexMatrix) -> Error {
    Error::EigenNonConvergence {
        dim: m.nrows(),
        norm: m.norm(),
        asymmetry: hermiticity_defect(m),
    }
}

/// Diagonalizes one Hermitian block; eigenpairs in ascending order.
pub(crate) fn eigen_block(sub: &ComplexMatrix, indices: Vec<usize>) -> Result<BlockEigen> {
    let n = sub.nrows();
    let max_iter = 64 * n + 64;
    let mut order: Vec<usize> = (0..n).collect();
    if is_real_matrix(sub) {
        let real = sub.map(|z| z.re);
        let eig = SymmetricEigen::try_new(real, f64::EPSILON, max_iter)
            .ok_or_else(|| non_convergence(sub))?;
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(BlockEigen { indices, values, vectors: BlockVectors::Real(vectors) })
    } else {
        let eig = SymmetricEigen::try_new(sub.clone(), f64::EPSILON, max_iter)
            .ok_or_else(|| non_convergence(sub))?;
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(BlockEigen { indices, values, vectors: BlockVectors::Complex(vectors) })
    }
}

pub(crate) fn eigen_blocks(h: &ComplexMatrix, partition: Vec<Vec<usize>>) -> Result<Vec<BlockEigen>> {
    partition
        .into_iter()
        .map(|idx| {
            let sub = submatrix(h, &idx);
            eigen_block(&sub, idx)
        })
        .collect()
}

/// Rotates a vector so its largest-magnitude component is real positive.
fn fix_phase(v: &mut [C64]) {
    let max = v.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

fn first_nonzero(v: &[C64]) -> usize {
    v.iter().position(|z| z.norm() > 1e-12).unwrap_or(v.len())
}

/// Ascending eigendecomposition with a deterministic per-frame gauge.
///
/// Each eigenvector is scaled so its largest-magnitude component is real
/// positive. Equal eigenvalues are ordered by the index of the first
/// nonzero component. The matrix is split into the connected components of
/// its nonzero pattern first, so eigenvectors never mix decoupled sectors.
pub fn eigh_sorted(h: &HermitianOperator) -> Result<SpectralFrame> {
    eigh_at(h, 0.0)
}

/// As `eigh_sorted`, tagging the frame with `time`.
pub fn eigh_at(h: &HermitianOperator, time: f64) -> Result<SpectralFrame> {
    let n = h.dim();
    let blocks = eigen_blocks(&h.matrix, block_partition(&[&h.matrix]))?;
    let mut pairs: Vec<(f64, Vec<C64>)> = Vec::with_capacity(n);
    for b in &blocks {
        for k in 0..b.values.len() {
            let mut v = vec![ZERO; n];
            for (r, &gi) in b.indices.iter().enumerate() {
                v[gi] = match &b.vectors {
                    BlockVectors::Real(m) => C64::new(m[(r, k)], 0.0),
                    BlockVectors::Complex(m) => m[(r, k)],
                };
            }
            fix_phase(&mut v);
            pairs.push((b.values[k], v));
        }
    }
    pairs.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| first_nonzero(&a.1).cmp(&first_nonzero(&b.1)))
    });
    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| pairs[j].1[i]);
    Ok(SpectralFrame { time, eigenvalues, eigenvectors })
}
