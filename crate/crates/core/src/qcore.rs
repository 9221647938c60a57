//! Complex linear algebra and quantum-state primitives.
//!
//! Matrices are `nalgebra` dense complex matrices. The domain wrappers
//! ([`HermitianOperator`], [`DensityMatrix`], [`PureState`], [`Projector`])
//! validate their invariants on construction and are immutable afterwards.
//!
//! Entropies use a process-wide logarithm base, bits by default (see
//! [`set_log_base`]).

use std::sync::atomic::{AtomicU8, Ordering};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Eigenvalues at or below this value are treated as outside the support.
pub const EPS_SUPPORT: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-12;
const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PURE_NORM_TOL: f64 = 1e-12;
const PROJECTOR_IDEMPOTENCE_TOL: f64 = 1e-10;
const PROJECTOR_TRACE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    /// Factor converting a natural logarithm into this base.
    pub fn per_nat(self) -> f64 {
        match self {
            LogBase::Two => std::f64::consts::LOG2_E,
            LogBase::E => 1.0,
        }
    }

    pub fn log(self, x: f64) -> f64 {
        x.ln() * self.per_nat()
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        }
    }
}

static LOG_BASE: AtomicU8 = AtomicU8::new(0);

/// Sets the logarithm base used by every entropy in the process.
pub fn set_log_base(base: LogBase) {
    let code = match base {
        LogBase::Two => 0,
        LogBase::E => 1,
    };
    LOG_BASE.store(code, Ordering::Relaxed);
}

pub fn log_base() -> LogBase {
    match LOG_BASE.load(Ordering::Relaxed) {
        1 => LogBase::E,
        _ => LogBase::Two,
    }
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Discrete Weyl operator `X^a Z^b` on `C^d`, with `X|j⟩ = |j+1⟩` and
/// `Z|j⟩ = e^{2πij/d}|j⟩`.
pub fn weyl(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let phase = 2.0 * std::f64::consts::PI * ((b * j) % d) as f64 / d as f64;
        m[((j + a) % d, j)] = C64::from_polar(1.0, phase);
    }
    m
}

/// Gram-Schmidt (applied twice) on the columns of `m`.
///
/// Fails when the columns are numerically dependent.
pub fn orthonormalize_columns(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i).clone_owned();
                let proj = qi.dotc(&q.column(j));
                let mut col = q.column_mut(j);
                col -= qi * proj;
            }
        }
        let norm = q.column(j).norm();
        if norm < 1e-13 {
            return Err(Error::ZeroVector);
        }
        q.column_mut(j).unscale_mut(norm);
    }
    Ok(q)
}

/// Spectral decomposition with eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, i: usize) -> ComplexVector {
        self.vectors.column(i).clone_owned()
    }

    /// Rebuilds `Σ f(λ_i) v_i v_i†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (i, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(i);
            out += (v * v.adjoint()) * C64::new(w, 0.0);
        }
        out
    }
}

/// Eigendecomposition of a matrix assumed Hermitian; the Hermitian part is used.
pub(crate) fn eigh(m: &ComplexMatrix) -> Eigen {
    let n = m.nrows();
    if n == 1 {
        return Eigen {
            values: vec![m[(0, 0)].re],
            vectors: ComplexMatrix::identity(1, 1),
        };
    }
    let sym = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sym.eigenvalues[b].total_cmp(&sym.eigenvalues[a]));
    let values = order.iter().map(|&i| sym.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &sym.eigenvectors.column(src));
    }
    Eigen { values, vectors }
}

/// Number of eigenvalues above `threshold`.
pub(crate) fn support_rank(m: &ComplexMatrix, threshold: f64) -> usize {
    eigh(m).values.iter().filter(|&&l| l > threshold).count()
}

/// Hermitian operator on a `dim`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity (relative to the entry scale) and stores the
    /// exact Hermitian part.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let deviation = max_abs(&(&matrix - matrix.adjoint()));
        if deviation > HERMITIAN_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian(deviation));
        }
        Ok(Self::from_hermitian_part(&matrix))
    }

    /// Stores `(m + m†)/2` without validation, for computed operators.
    pub(crate) fn from_hermitian_part(matrix: &ComplexMatrix) -> Self {
        Self {
            matrix: hermitian_part(matrix),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let v = ComplexVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(x, 0.0)));
        Self {
            matrix: ComplexMatrix::from_diagonal(&v),
        }
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

    pub fn tensor(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator::from_hermitian_part(&kron(&self.matrix, &other.matrix))
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Re Tr(self · other)`.
    pub fn trace_product(&self, other: &ComplexMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.matrix[(i, j)] * other[(j, i)]).re;
            }
        }
        acc
    }

    /// `⟨v|A|v⟩` (real part).
    pub fn expectation(&self, v: &ComplexVector) -> f64 {
        v.dotc(&(&self.matrix * v)).re
    }

    pub fn scaled(&self, factor: f64) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn eig(&self) -> Eigen {
        eigh(&self.matrix)
    }
}

/// Eigendecomposition (`A = V Λ V†`, eigenvalues descending).
pub fn eig_hermitian(a: &HermitianOperator) -> Result<Eigen> {
    if a.matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(a.eig())
}

/// Positive unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let op = HermitianOperator::new(matrix)?;
        Self::from_operator(op)
    }

    pub fn from_operator(op: HermitianOperator) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {trace}")));
        }
        let min = op.eig().values.last().copied().unwrap_or(0.0);
        if min < -NEGATIVE_EIGENVALUE_TOL {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { op })
    }

    /// Wraps a computed state (e.g. a channel output) after symmetrizing.
    pub(crate) fn from_computed(matrix: &ComplexMatrix) -> Self {
        Self {
            op: HermitianOperator::from_hermitian_part(matrix),
        }
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self::from_computed(&state.projector_matrix())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scaled(1.0 / dim as f64),
        }
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Self::from_operator(HermitianOperator::diagonal(values))
    }

    /// Convex combination `Σ w_i ρ_i`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: rho.dim(),
                });
            }
            acc += rho.matrix() * C64::new(*w, 0.0);
        }
        Self::new(hermitian_part(&acc))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn as_operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            op: self.op.tensor(&other.op),
        }
    }

    /// Spectrum with entries in `[-1e-10, 0)` clamped to zero.
    pub fn spectrum(&self) -> Vec<f64> {
        self.op.eig().values.into_iter().map(clamp_eigenvalue).collect()
    }

    pub fn eig(&self) -> Eigen {
        let mut e = self.op.eig();
        e.values.iter_mut().for_each(|v| *v = clamp_eigenvalue(*v));
        e
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        max_abs(&(self.matrix() - other.matrix()))
    }
}

fn clamp_eigenvalue(v: f64) -> f64 {
    if (-NEGATIVE_EIGENVALUE_TOL..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// Unit vector state `|ψ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm < 1e-300 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = ComplexVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn projector_matrix(&self) -> ComplexMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

/// Orthogonal projector of a given rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    rank: usize,
    op: HermitianOperator,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let op = HermitianOperator::new(matrix)?;
        let m = op.matrix();
        let idem = max_abs(&(m * m - m));
        if idem > PROJECTOR_IDEMPOTENCE_TOL {
            return Err(Error::NotProjector(format!("|P^2 - P| = {idem:.3e}")));
        }
        let trace = op.trace();
        let rank = trace.round().max(0.0) as usize;
        if (trace - rank as f64).abs() > PROJECTOR_TRACE_TOL {
            return Err(Error::NotProjector(format!("trace {trace} is not an integer")));
        }
        Ok(Self { rank, op })
    }

    /// Projector onto the span of the given columns, which must be orthonormal.
    pub fn from_orthonormal_columns(basis: &ComplexMatrix) -> Result<Self> {
        let gram = basis.adjoint() * basis;
        let dev = max_abs(&(gram - ComplexMatrix::identity(basis.ncols(), basis.ncols())));
        if dev > 1e-10 {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self {
            rank: basis.ncols(),
            op: HermitianOperator::from_hermitian_part(&(basis * basis.adjoint())),
        })
    }

    /// Projector onto the span of `vectors`; numerical rank decided by the
    /// eigenvalues of `Σ v v†` exceeding `threshold`.
    pub fn onto_span(dim: usize, vectors: &[ComplexVector], threshold: f64) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidInput("no vectors to span".into()));
        }
        let mut gram = ComplexMatrix::zeros(dim, dim);
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            gram += v * v.adjoint();
        }
        let e = eigh(&gram);
        let rank = e.values.iter().filter(|&&l| l > threshold).count();
        let basis = e.vectors.columns(0, rank).clone_owned();
        Ok(Self {
            rank,
            op: HermitianOperator::from_hermitian_part(&(&basis * basis.adjoint())),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            rank: dim,
            op: HermitianOperator::identity(dim),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn as_operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    /// Orthonormal basis of the range as a `dim × rank` isometry.
    pub fn isometry(&self) -> ComplexMatrix {
        let e = self.op.eig();
        e.vectors.columns(0, self.rank).clone_owned()
    }
}

/// Which tensor factor a partial trace keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    /// The first factor `H` (trace out `K`).
    H,
    /// The second factor `K` (trace out `H`).
    K,
}

pub(crate) fn partial_trace_matrix(m: &ComplexMatrix, dh: usize, dk: usize, keep: Subsystem) -> ComplexMatrix {
    match keep {
        Subsystem::H => ComplexMatrix::from_fn(dh, dh, |i, j| {
            (0..dk).map(|k| m[(i * dk + k, j * dk + k)]).sum()
        }),
        Subsystem::K => ComplexMatrix::from_fn(dk, dk, |k, l| {
            (0..dh).map(|i| m[(i * dk + k, i * dk + l)]).sum()
        }),
    }
}

/// `Tr_K ω` (keep `H`) or `Tr_H ω` (keep `K`) for `ω` on `H ⊗ K`.
pub fn partial_trace(w: &DensityMatrix, dims: (usize, usize), keep: Subsystem) -> Result<DensityMatrix> {
    let (dh, dk) = dims;
    if dh * dk != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: dh * dk,
            got: w.dim(),
        });
    }
    Ok(DensityMatrix::from_computed(&partial_trace_matrix(w.matrix(), dh, dk, keep)))
}

/// Marginal of a pure state on `H ⊗ K`.
pub fn reduced_state(psi: &PureState, dims: (usize, usize), keep: Subsystem) -> Result<DensityMatrix> {
    let (dh, dk) = dims;
    if dh * dk != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: dh * dk,
            got: psi.dim(),
        });
    }
    // Reshape |ψ⟩ into the dh × dk coefficient matrix M; marginals are M M† and Mᵀ M̄.
    let a = psi.amplitudes();
    let coeff = ComplexMatrix::from_fn(dh, dk, |i, k| a[i * dk + k]);
    let m = match keep {
        Subsystem::H => &coeff * coeff.adjoint(),
        Subsystem::K => coeff.transpose() * coeff.map(|z| z.conj()),
    };
    Ok(DensityMatrix::from_computed(&m))
}

/// `log ρ` on the support of `ρ`, zero on its null space, in the configured base.
pub fn log_on_support(rho: &DensityMatrix) -> HermitianOperator {
    log_on_support_matrix(rho.matrix(), log_base())
}

pub(crate) fn log_on_support_matrix(m: &ComplexMatrix, base: LogBase) -> HermitianOperator {
    let e = eigh(m);
    HermitianOperator::from_hermitian_part(&e.reconstruct_with(|l| {
        if l > EPS_SUPPORT {
            base.log(l)
        } else {
            0.0
        }
    }))
}

/// `-Σ λ log λ` over eigenvalues above the support threshold.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    entropy_of_spectrum_in(values, log_base())
}

pub(crate) fn entropy_of_spectrum_in(values: &[f64], base: LogBase) -> f64 {
    let nats: f64 = values
        .iter()
        .filter(|&&l| l > EPS_SUPPORT)
        .map(|&l| -l * l.ln())
        .sum();
    (nats * base.per_nat()).max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.spectrum())
}

/// Binary entropy `h(x)` in the configured base.
pub fn binary_entropy(x: f64) -> f64 {
    entropy_of_spectrum(&[x, 1.0 - x])
}

/// A real number or `+∞`, e.g. a relative entropy whose support condition
/// fails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

pub type RelativeEntropy = ExtendedReal;

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            RelativeEntropy::Finite(v) => Some(v),
            RelativeEntropy::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, RelativeEntropy::Infinite)
    }
}

/// `H(ρ‖σ) = Tr ρ(log ρ − log σ)`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelativeEntropy> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    Ok(relative_entropy_unchecked(rho.matrix(), sigma.matrix(), log_base()))
}

pub(crate) fn relative_entropy_unchecked(rho: &ComplexMatrix, sigma: &ComplexMatrix, base: LogBase) -> RelativeEntropy {
    let er = eigh(rho);
    let es = eigh(sigma);
    let sigma_op = hermitian_part(sigma);
    // An eigenvector of ρ carrying weight but invisible to σ.
    for (i, &l) in er.values.iter().enumerate() {
        if l > EPS_SUPPORT {
            let v = er.vectors.column(i);
            let expect = v.dotc(&(&sigma_op * v)).re;
            if expect < EPS_SUPPORT {
                return RelativeEntropy::Infinite;
            }
        }
    }
    // Weight of ρ on the null space of σ.
    let mut leak = 0.0;
    let mut cross = 0.0;
    for (j, &mu) in es.values.iter().enumerate() {
        let f = es.vectors.column(j);
        let w = f.dotc(&(rho * f)).re;
        if mu > EPS_SUPPORT {
            cross += w * mu.ln();
        } else {
            leak += w.max(0.0);
        }
    }
    if leak > 1e-9 {
        return RelativeEntropy::Infinite;
    }
    let neg_entropy: f64 = er
        .values
        .iter()
        .filter(|&&l| l > EPS_SUPPORT)
        .map(|&l| l * l.ln())
        .sum();
    RelativeEntropy::Finite(((neg_entropy - cross) * base.per_nat()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, rng_for};
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    // Bit-valued expectations below assume the default base; no test in
    // this crate changes it.

    #[test]
    fn tensor_of_identities_and_basis_projectors() {
        let i2 = HermitianOperator::identity(2);
        assert_eq!(i2.tensor(&i2), HermitianOperator::identity(4));
        let a = HermitianOperator::diagonal(&[1.0, 0.0]);
        let b = HermitianOperator::diagonal(&[0.0, 1.0]);
        assert_eq!(a.tensor(&b), HermitianOperator::diagonal(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn tensor_trace_multiplies() {
        let mut rng = rng_for(7, "tensor-trace");
        for _ in 0..10 {
            let r = random_density(2, &mut rng);
            let s = random_density(2, &mut rng);
            assert_abs_diff_eq!(r.tensor(&s).as_operator().trace(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let bell = PureState::new(ComplexVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)])).unwrap();
        let m = partial_trace(&bell.density(), (2, 2), Subsystem::H).unwrap();
        assert!(m.distance(&DensityMatrix::maximally_mixed(2)) < 1e-15);
        let m2 = reduced_state(&bell, (2, 2), Subsystem::K).unwrap();
        assert!(m2.distance(&DensityMatrix::maximally_mixed(2)) < 1e-15);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            partial_trace(&rho, (3, 2), Subsystem::H),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn uniformly_entangled_rank_two_marginal_in_qutrits() {
        // (|0,1⟩ + |2,0⟩)/√2 in C³⊗C³; brute-force index contraction oracle.
        let mut amp = ComplexVector::zeros(9);
        let s = 1.0 / 2f64.sqrt();
        amp[1] = c(s);
        amp[6] = c(s);
        let psi = PureState::new(amp.clone()).unwrap();
        let rho = partial_trace(&psi.density(), (3, 3), Subsystem::H).unwrap();
        let mut brute = ComplexMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    brute[(i, j)] += amp[i * 3 + k] * amp[j * 3 + k].conj();
                }
            }
        }
        assert!(max_abs(&(rho.matrix() - &brute)) < 1e-15);
        assert!(rho.distance(&DensityMatrix::from_diagonal(&[0.5, 0.0, 0.5]).unwrap()) < 1e-15);
    }

    #[test]
    fn eig_known_spectra() {
        let e = eig_hermitian(&HermitianOperator::diagonal(&[1.0, 3.0])).unwrap();
        assert_abs_diff_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(1, 0)].norm(), 1.0, epsilon = 1e-14);

        let x = HermitianOperator::new(ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])).unwrap();
        let e = eig_hermitian(&x).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], -1.0, epsilon = 1e-14);
        let plus = e.vector(0);
        assert_abs_diff_eq!(plus[0].norm(), 1.0 / 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!((plus[0] - plus[1]).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_rejects_non_finite() {
        let mut m = ComplexMatrix::identity(2, 2);
        m[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = rng_for(11, "eig");
        for d in [2, 3, 5, 8] {
            let a = random_hermitian(d, &mut rng);
            let e = eig_hermitian(&a).unwrap();
            let rebuilt = e.reconstruct_with(|l| l);
            assert!(max_abs(&(rebuilt - a.matrix())) < 1e-10 * a.max_abs().max(1.0));
            let gram = e.vectors.adjoint() * &e.vectors;
            assert!(max_abs(&(gram - ComplexMatrix::identity(d, d))) < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn log_on_support_examples() {
        let l = log_on_support(&DensityMatrix::maximally_mixed(2));
        assert!(max_abs(&(l.matrix() - HermitianOperator::diagonal(&[-1.0, -1.0]).matrix())) < 1e-14);
        let l = log_on_support(&DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap());
        assert!(l.max_abs() < 1e-14);
        let l = log_on_support(&DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap());
        assert_abs_diff_eq!(l.matrix()[(0, 0)].re, 0.75f64.log2(), epsilon = 1e-14);
        assert_abs_diff_eq!(l.matrix()[(1, 1)].re, 0.25f64.log2(), epsilon = 1e-14);
    }

    #[test]
    fn entropy_examples() {
        let psi = PureState::normalized(ComplexVector::from_vec(vec![c(1.0), C64::new(0.3, -0.2)])).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&psi.density()), 0.0, epsilon = 1e-12);
        for d in [2, 3, 4] {
            assert_abs_diff_eq!(
                von_neumann_entropy(&DensityMatrix::maximally_mixed(d)),
                (d as f64).log2(),
                epsilon = 1e-12
            );
        }
        let h = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert_abs_diff_eq!(h, 0.811_278_124_459_132_8, epsilon = 1e-15);
        let rho = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&rho), h, epsilon = 1e-14);
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = rng_for(3, "relent");
        let r = random_density(3, &mut rng);
        assert_abs_diff_eq!(relative_entropy(&r, &r).unwrap().finite().unwrap(), 0.0, epsilon = 1e-10);

        let p0 = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(relative_entropy(&p0, &mixed).unwrap().finite().unwrap(), 1.0, epsilon = 1e-14);
        let p1 = DensityMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        assert!(relative_entropy(&p0, &p1).unwrap().is_infinite());
        assert!(relative_entropy(&p0, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn projector_validation() {
        assert!(Projector::new(HermitianOperator::diagonal(&[1.0, 0.0, 1.0]).into_matrix()).is_ok());
        assert!(Projector::new(HermitianOperator::diagonal(&[0.5, 0.0]).into_matrix()).is_err());
        let p = Projector::onto_span(2, &[PureState::basis(2, 0).amplitudes().clone()], 1e-10).unwrap();
        assert_eq!(p.rank(), 1);
        assert!(max_abs(&(p.matrix() - HermitianOperator::diagonal(&[1.0, 0.0]).matrix())) < 1e-14);
    }
}
