//! Tensor-product analyses: additivity probes, hereditary checks, the
//! projector structure of projected hereditary sets, uniformly entangled
//! states and the product-state decomposition criterion.
//!
//! States on `H ⊗ K` use the Kronecker convention of [`kron`]: index
//! `i·dim K + k` for `|i⟩ ⊗ |k⟩`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::channels::{tensor_channels, Channel, ProductChannel};
use crate::entropyopt::{
    chi, chi_with_seeds, holevo_capacity, min_output_entropy, min_output_entropy_seeded, CapacityReport,
    ConstraintSet, Ensemble, MinEntropyReport, OptimizerConfig, CAPACITY_TOL,
};
use crate::error::{Error, Result};
use crate::nnls::nnls;
use crate::optsets::{
    membership_c, membership_e, probe_directions, sample_optimal_set_c, sample_optimal_set_c_along,
    sample_optimal_set_e_along, sample_optimal_set_e_with, OptimalSetSample, MEMBERSHIP_TOL, PROBE_DIRECTIONS,
};
use crate::qcore::{
    kron, log_base, max_abs, reduced_state, relative_entropy_unchecked, weyl, ComplexMatrix, ComplexVector,
    DensityMatrix, ExtendedReal, HermitianOperator, Projector, PureState, Subsystem, C64,
};
use crate::report::{extended_json, matrix_json, number_json, vector_json};

/// Spectra flat within this are multiples of projectors.
pub const FLATNESS_TOL: f64 = 1e-6;
/// Additivity gaps at most this count as additive.
pub const ADDITIVITY_TOL: f64 = 1e-4;
/// Directions used to enumerate extreme points of projected sets.
pub const STRUCTURE_DIRECTIONS: usize = 200;
/// Support-function tolerance of the projective relations.
pub const RELATION_TOL: f64 = 1e-3;
/// Residual bound for decomposing marginals over single-channel optimal states.
pub const DECOMPOSITION_TOL: f64 = 1e-4;
/// Sample states fed to the hereditary check (pairs grow quadratically).
pub const HEREDITARY_MAX_STATES: usize = 24;
/// Pairs `i ≠ j` for the strong check are drawn from this many leading states.
pub const HEREDITARY_STRONG_STATES: usize = 6;

const SCHMIDT_THRESHOLD: f64 = 1e-10;
const ORTHONORMAL_TOL: f64 = 1e-10;
const EXACT_TOL: f64 = 1e-8;
const EIGENVALUE_CLUSTER: f64 = 1e-8;
const MARGINAL_DEDUP: f64 = 1e-6;
const VERIFY_SAMPLE_CAP: usize = 16;

fn check_product_dim(dim: usize, cfg: &OptimizerConfig) -> Result<()> {
    if dim > cfg.product_dim_cap {
        return Err(Error::ParameterOutOfRange {
            name: "product input dimension (raise product_dim_cap to allow)".into(),
            value: dim as f64,
        });
    }
    Ok(())
}

fn product_of(phi: &Channel, psi: &Channel, cfg: &OptimizerConfig) -> Result<ProductChannel> {
    check_product_dim(phi.dim_in() * psi.dim_in(), cfg)?;
    Ok(tensor_channels(phi, psi))
}

fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    ComplexVector::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()])
}

fn marginals(omega: &PureState, dims: (usize, usize)) -> Result<(DensityMatrix, DensityMatrix)> {
    Ok((reduced_state(omega, dims, Subsystem::H)?, reduced_state(omega, dims, Subsystem::K)?))
}

fn marginals_of_density(w: &DensityMatrix, dims: (usize, usize)) -> Result<(DensityMatrix, DensityMatrix)> {
    Ok((
        crate::qcore::partial_trace(w, dims, Subsystem::H)?,
        crate::qcore::partial_trace(w, dims, Subsystem::K)?,
    ))
}

fn relative_entropy_of(rho: &DensityMatrix, sigma: &DensityMatrix) -> ExtendedReal {
    relative_entropy_unchecked(rho.matrix(), sigma.matrix(), log_base())
}

// ---------------------------------------------------------------------------
// Uniformly entangled states

fn orthonormality_defect(vectors: &[ComplexVector]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.dotc(b) - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// `r^{-1/2} Σ_i |e_i ⊗ f_i⟩` for orthonormal systems `{e_i}` and `{f_i}`.
pub fn make_uniformly_entangled(eh: &[ComplexVector], ek: &[ComplexVector]) -> Result<PureState> {
    let r = eh.len();
    if r == 0 || ek.len() != r {
        return Err(Error::InvalidInput(format!(
            "need equal nonzero numbers of vectors, got {} and {}",
            eh.len(),
            ek.len()
        )));
    }
    for list in [eh, ek] {
        let d = list[0].len();
        if let Some(v) = list.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
        let defect = orthonormality_defect(list);
        if defect > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(defect));
        }
    }
    let dim = eh[0].len() * ek[0].len();
    let mut v = ComplexVector::zeros(dim);
    for (e, f) in eh.iter().zip(ek) {
        v += kron_vec(e, f);
    }
    PureState::new(v.unscale((r as f64).sqrt()))
}

/// Rank and flatness of a spectrum: nonzero eigenvalues should all equal `1/r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flatness {
    /// Number of eigenvalues above the numerical threshold.
    pub rank: usize,
    /// `max_i |λ_i − 1/rank|` over the nonzero eigenvalues.
    pub defect: f64,
    /// Second largest eigenvalue (0 for rank one).
    pub second_eigenvalue: f64,
}

impl Flatness {
    pub fn is_flat(&self) -> bool {
        self.defect <= FLATNESS_TOL
    }
}

fn flatness_of_spectrum(values: &[f64]) -> Flatness {
    let nonzero: Vec<f64> = values.iter().copied().filter(|&l| l > SCHMIDT_THRESHOLD).collect();
    let rank = nonzero.len().max(1);
    let level = 1.0 / rank as f64;
    let defect = nonzero.iter().map(|l| (l - level).abs()).fold(0.0, f64::max);
    Flatness {
        rank,
        defect,
        second_eigenvalue: values.get(1).copied().unwrap_or(0.0).max(0.0),
    }
}

/// Whether `rho` is a multiple of a projector.
pub fn flatness(rho: &DensityMatrix) -> Flatness {
    flatness_of_spectrum(&rho.spectrum())
}

/// Uniform entanglement rank of a bipartite pure state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformRank {
    /// `Some(r)` when the `r` nonzero Schmidt weights are flat within [`FLATNESS_TOL`].
    pub rank: Option<usize>,
    pub flatness_defect: f64,
    /// Schmidt weights (eigenvalues of the `H` marginal), descending.
    pub schmidt_weights: Vec<f64>,
}

pub fn uniform_entanglement_rank(psi: &PureState, dims: (usize, usize)) -> Result<UniformRank> {
    let weights = reduced_state(psi, dims, Subsystem::H)?.spectrum();
    let f = flatness_of_spectrum(&weights);
    Ok(UniformRank {
        rank: f.is_flat().then_some(f.rank),
        flatness_defect: f.defect,
        schmidt_weights: weights,
    })
}

/// Whether a bipartite pure state has Schmidt rank above one (up to [`FLATNESS_TOL`]).
pub fn is_entangled(psi: &PureState, dims: (usize, usize)) -> Result<bool> {
    let weights = reduced_state(psi, dims, Subsystem::H)?.spectrum();
    Ok(weights.get(1).copied().unwrap_or(0.0) > FLATNESS_TOL)
}

// ---------------------------------------------------------------------------
// Product-state decomposition criterion

/// Equal-weight generalized Bell decomposition of `(P/r) ⊗ (Q/r)`: the `r²`
/// vectors `(V ⊗ W)(X^a Z^b ⊗ I)|Φ_r⟩` with `V`, `W` isometries onto the ranges.
pub fn weyl_decomposition(p: &Projector, q: &Projector) -> Result<Ensemble> {
    let r = p.rank();
    if r == 0 || q.rank() != r {
        return Err(Error::InvalidInput(format!(
            "projector ranks must be equal and positive, got {} and {}",
            p.rank(),
            q.rank()
        )));
    }
    let v = p.isometry();
    let w = q.isometry();
    let scale = C64::new(1.0 / (r as f64).sqrt(), 0.0);
    let weight = 1.0 / (r * r) as f64;
    let mut members = Vec::with_capacity(r * r);
    for a in 0..r {
        for b in 0..r {
            let u = weyl(r, a, b);
            let mut vec = ComplexVector::zeros(p.dim() * q.dim());
            for i in 0..r {
                let left = &v * u.column(i);
                vec += kron_vec(&left, &w.column(i).clone_owned()) * scale;
            }
            members.push((weight, PureState::normalized(vec)?));
        }
    }
    Ensemble::new(members)
}

/// The spectral-projector argument against a decomposition with marginals
/// `ρ`, `σ` when one of them has two distinct positive eigenvalues
/// `λ₁ > λ₂`: every member is annihilated by `P₁ ⊗ Q₂` (Schmidt form), yet
/// `(P₁ ⊗ Q₂)(ρ ⊗ σ) = λ₁λ₂ (P₁ ⊗ Q₂) ≠ 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralContradiction {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `max_i ‖(P₁ ⊗ Q₂) φ_i‖²`.
    pub member_leak: f64,
    /// `Tr (P₁ ⊗ Q₂)(ρ ⊗ σ)`.
    pub product_weight: f64,
    /// Members vanish on `P₁ ⊗ Q₂` while `ρ ⊗ σ` does not.
    pub detected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductDecompositionReport {
    /// The decomposition is valid and the marginals are flat with equal ranks.
    pub valid: bool,
    /// Every member has marginals `ρ`, `σ` and the members average to `ρ ⊗ σ`.
    pub decomposition_ok: bool,
    pub marginal_residual: f64,
    pub average_residual: f64,
    pub rho_flatness: Flatness,
    pub sigma_flatness: Flatness,
    /// Both marginals are multiples of projectors of the same rank.
    pub flat_equal_rank: bool,
    pub spectral_test: Option<SpectralContradiction>,
}

fn eigen_projector(rho: &DensityMatrix, value: f64) -> Result<ComplexMatrix> {
    let e = rho.eig();
    let d = rho.dim();
    let mut p = ComplexMatrix::zeros(d, d);
    for (i, &l) in e.values.iter().enumerate() {
        if (l - value).abs() <= EIGENVALUE_CLUSTER {
            let v = e.vector(i);
            p += &v * v.adjoint();
        }
    }
    Ok(p)
}

fn distinct_positive(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &l in values {
        if l > SCHMIDT_THRESHOLD && out.iter().all(|&m| (m - l).abs() > EIGENVALUE_CLUSTER) {
            out.push(l);
        }
    }
    out
}

fn spectral_test(rho: &DensityMatrix, sigma: &DensityMatrix, decomposition: &Ensemble) -> Result<Option<SpectralContradiction>> {
    // Use whichever marginal has two distinct eigenvalues; the other supplies Q₂.
    let (lambda1, lambda2, op) = {
        let dr = distinct_positive(&rho.spectrum());
        let ds = distinct_positive(&sigma.spectrum());
        if dr.len() >= 2 {
            (dr[0], dr[1], kron(&eigen_projector(rho, dr[0])?, &eigen_projector(sigma, dr[1])?))
        } else if ds.len() >= 2 {
            (ds[0], ds[1], kron(&eigen_projector(rho, ds[1])?, &eigen_projector(sigma, ds[0])?))
        } else {
            return Ok(None);
        }
    };
    let member_leak = decomposition
        .members()
        .iter()
        .map(|(_, s)| (&op * s.amplitudes()).norm_squared())
        .fold(0.0, f64::max);
    let product = rho.tensor(sigma);
    let product_weight = (&op * product.matrix()).trace().re;
    Ok(Some(SpectralContradiction {
        lambda1,
        lambda2,
        member_leak,
        product_weight,
        detected: member_leak <= EXACT_TOL && product_weight > EXACT_TOL,
    }))
}

/// Checks a decomposition `ρ ⊗ σ = Σ π_i |φ_i⟩⟨φ_i|` with every `φ_i` having
/// marginals `ρ` and `σ`, and whether `ρ`, `σ` are flat with equal ranks.
pub fn verify_product_decomposition(rho: &DensityMatrix, sigma: &DensityMatrix, decomposition: &Ensemble) -> Result<ProductDecompositionReport> {
    let dims = (rho.dim(), sigma.dim());
    if decomposition.dim() != dims.0 * dims.1 {
        return Err(Error::DimensionMismatch {
            expected: dims.0 * dims.1,
            got: decomposition.dim(),
        });
    }
    let mut marginal_residual = 0.0_f64;
    for (_, s) in decomposition.members() {
        let (h, k) = marginals(s, dims)?;
        marginal_residual = marginal_residual
            .max(max_abs(&(h.matrix() - rho.matrix())))
            .max(max_abs(&(k.matrix() - sigma.matrix())));
    }
    let average_residual = max_abs(&(decomposition.average_matrix() - rho.tensor(sigma).matrix()));
    let decomposition_ok = marginal_residual <= EXACT_TOL && average_residual <= EXACT_TOL;
    let rho_flatness = flatness(rho);
    let sigma_flatness = flatness(sigma);
    let flat_equal_rank = rho_flatness.defect <= EXACT_TOL
        && sigma_flatness.defect <= EXACT_TOL
        && rho_flatness.rank == sigma_flatness.rank;
    Ok(ProductDecompositionReport {
        valid: decomposition_ok && flat_equal_rank,
        decomposition_ok,
        marginal_residual,
        average_residual,
        spectral_test: spectral_test(rho, sigma, decomposition)?,
        rho_flatness,
        sigma_flatness,
        flat_equal_rank,
    })
}

// ---------------------------------------------------------------------------
// Projected sets and their extreme points

/// A convex set of states on `H ⊗ K` given by a linear-maximization oracle.
pub trait ExposingSet: Sync {
    fn dims(&self) -> (usize, usize);
    /// A pure state of the set maximizing `Tr X ω^side`.
    fn expose(&self, x: &HermitianOperator, side: Subsystem) -> Result<PureState>;
}

fn marginal_expectation(state: &PureState, dims: (usize, usize), x: &HermitianOperator, side: Subsystem) -> Result<f64> {
    Ok(x.trace_product(reduced_state(state, dims, side)?.matrix()))
}

/// The convex hull of finitely many pure states.
#[derive(Clone, Debug)]
pub struct FiniteStateSet {
    states: Vec<PureState>,
    dims: (usize, usize),
}

impl FiniteStateSet {
    pub fn new(states: Vec<PureState>, dims: (usize, usize)) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidInput("empty state set".into()));
        }
        if let Some(s) = states.iter().find(|s| s.dim() != dims.0 * dims.1) {
            return Err(Error::DimensionMismatch {
                expected: dims.0 * dims.1,
                got: s.dim(),
            });
        }
        Ok(Self { states, dims })
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }
}

impl ExposingSet for FiniteStateSet {
    fn dims(&self) -> (usize, usize) {
        self.dims
    }

    fn expose(&self, x: &HermitianOperator, side: Subsystem) -> Result<PureState> {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, s) in self.states.iter().enumerate() {
            let v = marginal_expectation(s, self.dims, x, side)?;
            if v > best.0 + 1e-12 {
                best = (v, i);
            }
        }
        Ok(self.states[best.1].clone())
    }
}

fn restricted_top(p: &Projector, x: &HermitianOperator) -> ComplexVector {
    let v = p.isometry();
    let m = HermitianOperator::from_hermitian_part(&(v.adjoint() * x.matrix() * &v));
    &v * m.eig().vector(0)
}

/// All states supported on `H₀ ⊗ K₀`.
#[derive(Clone, Debug)]
pub struct SubspaceStates {
    pub h0: Projector,
    pub k0: Projector,
}

impl ExposingSet for SubspaceStates {
    fn dims(&self) -> (usize, usize) {
        (self.h0.dim(), self.k0.dim())
    }

    fn expose(&self, x: &HermitianOperator, side: Subsystem) -> Result<PureState> {
        // The top eigenspace of the lifted direction is (top vector) ⊗ (other factor).
        let (h, k) = match side {
            Subsystem::H => (restricted_top(&self.h0, x), self.k0.isometry().column(0).clone_owned()),
            Subsystem::K => (self.h0.isometry().column(0).clone_owned(), restricted_top(&self.k0, x)),
        };
        PureState::normalized(kron_vec(&h, &k))
    }
}

/// Convex hull of the maximally entangled states on `H₀ ⊗ K₀` (equal dimensions).
#[derive(Clone, Debug)]
pub struct MaximallyEntangledStates {
    h0: Projector,
    k0: Projector,
}

impl MaximallyEntangledStates {
    pub fn new(h0: Projector, k0: Projector) -> Result<Self> {
        if h0.rank() == 0 || h0.rank() != k0.rank() {
            return Err(Error::InvalidInput("subspaces must have equal positive dimension".into()));
        }
        Ok(Self { h0, k0 })
    }

    /// `r^{-1/2} Σ |v_i ⊗ w_i⟩` over the isometry columns.
    pub fn canonical_state(&self) -> Result<PureState> {
        let v = self.h0.isometry();
        let w = self.k0.isometry();
        let eh: Vec<ComplexVector> = v.column_iter().map(|c| c.clone_owned()).collect();
        let ek: Vec<ComplexVector> = w.column_iter().map(|c| c.clone_owned()).collect();
        make_uniformly_entangled(&eh, &ek)
    }
}

impl ExposingSet for MaximallyEntangledStates {
    fn dims(&self) -> (usize, usize) {
        (self.h0.dim(), self.k0.dim())
    }

    fn expose(&self, _x: &HermitianOperator, _side: Subsystem) -> Result<PureState> {
        // Every member has marginals P/r and Q/r, so all of them maximize.
        self.canonical_state()
    }
}

/// Convex hull of a collection of sets.
pub struct HullOfSets {
    parts: Vec<Box<dyn ExposingSet>>,
}

impl HullOfSets {
    pub fn new(parts: Vec<Box<dyn ExposingSet>>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("empty collection".into()))?
            .dims();
        if parts.iter().any(|p| p.dims() != first) {
            return Err(Error::InvalidInput("sets live on different spaces".into()));
        }
        Ok(Self { parts })
    }
}

impl ExposingSet for HullOfSets {
    fn dims(&self) -> (usize, usize) {
        self.parts[0].dims()
    }

    fn expose(&self, x: &HermitianOperator, side: Subsystem) -> Result<PureState> {
        let dims = self.dims();
        let mut best: Option<(f64, PureState)> = None;
        for p in &self.parts {
            let s = p.expose(x, side)?;
            let v = marginal_expectation(&s, dims, x, side)?;
            if best.as_ref().is_none_or(|(b, _)| v > *b + 1e-12) {
                best = Some((v, s));
            }
        }
        Ok(best.expect("nonempty").1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HereditaryLevel {
    Plain,
    Strong,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremeMarginal {
    #[serde(serialize_with = "serialize_density")]
    pub state: DensityMatrix,
    pub flatness: Flatness,
}

fn serialize_density<S: serde::Serializer>(rho: &DensityMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    matrix_json(rho.matrix()).serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub level: HereditaryLevel,
    pub extreme_h: Vec<ExtremeMarginal>,
    pub extreme_k: Vec<ExtremeMarginal>,
    pub max_flatness_defect: f64,
    pub ranks_equal: bool,
    /// Both projected hulls are single points.
    pub degenerate: bool,
    pub passes: bool,
}

/// Extreme points of `Θ_side(set)` found by maximizing along `directions`, deduplicated.
pub fn projected_extreme_points(
    set: &dyn ExposingSet,
    side: Subsystem,
    directions: &[HermitianOperator],
) -> Result<Vec<DensityMatrix>> {
    let dims = set.dims();
    let exposed: Vec<DensityMatrix> = directions
        .par_iter()
        .map(|x| reduced_state(&set.expose(x, side)?, dims, side))
        .collect::<Result<_>>()?;
    let mut out: Vec<DensityMatrix> = Vec::new();
    for m in exposed {
        if !out.iter().any(|o| max_abs(&(o.matrix() - m.matrix())) <= MARGINAL_DEDUP) {
            out.push(m);
        }
    }
    Ok(out)
}

/// Checks that every extreme point of both projections of a hereditary set is
/// a multiple of a projector, with a common rank at the strong level.
pub fn structure_theorem_check(set: &dyn ExposingSet, level: HereditaryLevel, seed: u64) -> Result<StructureReport> {
    let (dh, dk) = set.dims();
    let extreme = |side, dim| -> Result<Vec<ExtremeMarginal>> {
        let dirs = probe_directions(dim, STRUCTURE_DIRECTIONS, seed);
        Ok(projected_extreme_points(set, side, &dirs)?
            .into_iter()
            .map(|state| ExtremeMarginal {
                flatness: flatness(&state),
                state,
            })
            .collect())
    };
    let extreme_h = extreme(Subsystem::H, dh)?;
    let extreme_k = extreme(Subsystem::K, dk)?;
    let all = || extreme_h.iter().chain(&extreme_k);
    let max_flatness_defect = all().map(|e| e.flatness.defect).fold(0.0, f64::max);
    let first_rank = extreme_h[0].flatness.rank;
    let ranks_equal = all().all(|e| e.flatness.rank == first_rank);
    let degenerate = extreme_h.len() == 1 && extreme_k.len() == 1;
    let flat = max_flatness_defect <= FLATNESS_TOL;
    let passes = degenerate || (flat && (level == HereditaryLevel::Plain || ranks_equal));
    Ok(StructureReport {
        level,
        extreme_h,
        extreme_k,
        max_flatness_defect,
        ranks_equal,
        degenerate,
        passes,
    })
}

// ---------------------------------------------------------------------------
// Hereditary checks

/// Membership defect of a state in some convex set (`≤ MEMBERSHIP_TOL` means member).
pub trait MembershipOracle: Sync {
    fn defect(&self, rho: &DensityMatrix) -> Result<ExtendedReal>;
}

/// Membership in `A_C` of a channel.
pub struct CapacityOracle<'a> {
    pub channel: &'a Channel,
    pub report: &'a CapacityReport,
    pub cfg: &'a OptimizerConfig,
}

impl MembershipOracle for CapacityOracle<'_> {
    fn defect(&self, rho: &DensityMatrix) -> Result<ExtendedReal> {
        Ok(membership_c(self.channel, rho, self.report, self.cfg)?.defect)
    }
}

/// Membership in `A_E` of a channel: `Ĥ(ρ) − H_min`.
pub struct EntropyOracle<'a> {
    pub channel: &'a Channel,
    pub h_min: f64,
    pub cfg: &'a OptimizerConfig,
}

impl MembershipOracle for EntropyOracle<'_> {
    fn defect(&self, rho: &DensityMatrix) -> Result<ExtendedReal> {
        Ok(membership_e(self.channel, rho, self.h_min, self.cfg)?.defect)
    }
}

/// Membership in the convex hull of finitely many pure states.
pub struct HullOracle {
    pub generators: Vec<PureState>,
}

impl MembershipOracle for HullOracle {
    fn defect(&self, rho: &DensityMatrix) -> Result<ExtendedReal> {
        Ok(ExtendedReal::Finite(hull_decomposition(rho, &self.generators)?.1))
    }
}

/// Real coordinates in which the Euclidean norm is the Frobenius norm.
fn frobenius_coordinates(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(m[(i, i)].re);
        for j in i + 1..d {
            out.push(m[(i, j)].re * std::f64::consts::SQRT_2);
            out.push(m[(i, j)].im * std::f64::consts::SQRT_2);
        }
    }
    out
}

/// Best convex weights `w` with `Σ w_i |g_i⟩⟨g_i| ≈ ρ`, and the Frobenius residual.
pub fn hull_decomposition(rho: &DensityMatrix, generators: &[PureState]) -> Result<(Vec<f64>, f64)> {
    if generators.is_empty() {
        return Err(Error::InvalidInput("no generators".into()));
    }
    let d = rho.dim();
    if let Some(g) = generators.iter().find(|g| g.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: g.dim(),
        });
    }
    let rows = d * d + 1;
    let mut a = DMatrix::zeros(rows, generators.len());
    for (j, g) in generators.iter().enumerate() {
        for (i, c) in frobenius_coordinates(&g.projector_matrix()).into_iter().enumerate() {
            a[(i, j)] = c;
        }
        a[(rows - 1, j)] = 1.0;
    }
    let mut b = DVector::from_vec(frobenius_coordinates(rho.matrix()));
    b = b.push(1.0);
    let (w, _) = nnls(&a, &b);
    let fit: ComplexMatrix = generators
        .iter()
        .zip(w.iter())
        .fold(ComplexMatrix::zeros(d, d), |acc, (g, &wi)| acc + g.projector_matrix() * C64::new(wi, 0.0));
    let residual = (fit - rho.matrix()).norm();
    let weight_gap = (w.sum() - 1.0).abs();
    Ok((w.iter().copied().collect(), residual.max(weight_gap)))
}

#[derive(Clone, Debug, Serialize)]
pub struct StateViolation {
    pub index: usize,
    #[serde(serialize_with = "serialize_extended")]
    pub defect: ExtendedReal,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairViolation {
    pub first: usize,
    pub second: usize,
    #[serde(serialize_with = "serialize_extended")]
    pub defect: ExtendedReal,
}

fn serialize_extended<S: serde::Serializer>(x: &ExtendedReal, s: S) -> std::result::Result<S::Ok, S::Error> {
    extended_json(*x).serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct HereditaryReport {
    /// States whose marginal product was tested.
    pub tested: usize,
    pub violations: Vec<StateViolation>,
    pub strong_violations: Vec<PairViolation>,
    #[serde(serialize_with = "serialize_extended")]
    pub max_defect: ExtendedReal,
}

impl HereditaryReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.strong_violations.is_empty()
    }
}

fn is_violation(d: ExtendedReal) -> bool {
    d.finite().is_none_or(|v| v > MEMBERSHIP_TOL)
}

fn extended_max(a: ExtendedReal, b: ExtendedReal) -> ExtendedReal {
    match (a, b) {
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => ExtendedReal::Finite(x.max(y)),
        _ => ExtendedReal::Infinite,
    }
}

/// Tests `ω^H ⊗ ω^K ∈ 𝒜` for the first [`HEREDITARY_MAX_STATES`] states and,
/// when `strong`, `ω_i^H ⊗ ω_j^K ∈ 𝒜` for every ordered pair `i ≠ j` among the
/// first [`HEREDITARY_STRONG_STATES`].
pub fn hereditary_check(
    states: &[PureState],
    dims: (usize, usize),
    oracle: &dyn MembershipOracle,
    strong: bool,
) -> Result<HereditaryReport> {
    let states = &states[..states.len().min(HEREDITARY_MAX_STATES)];
    let margs: Vec<(DensityMatrix, DensityMatrix)> = states.iter().map(|s| marginals(s, dims)).collect::<Result<_>>()?;
    let mut pairs: Vec<(usize, usize)> = (0..margs.len()).map(|i| (i, i)).collect();
    if strong {
        let n = margs.len().min(HEREDITARY_STRONG_STATES);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    pairs.push((i, j));
                }
            }
        }
    }
    let defects: Vec<ExtendedReal> = pairs
        .par_iter()
        .map(|&(i, j)| oracle.defect(&margs[i].0.tensor(&margs[j].1)))
        .collect::<Result<_>>()?;
    let mut report = HereditaryReport {
        tested: states.len(),
        violations: Vec::new(),
        strong_violations: Vec::new(),
        max_defect: ExtendedReal::Finite(f64::NEG_INFINITY),
    };
    for (&(i, j), &d) in pairs.iter().zip(&defects) {
        report.max_defect = extended_max(report.max_defect, d);
        if !is_violation(d) {
            continue;
        }
        if i == j {
            report.violations.push(StateViolation { index: i, defect: d });
        } else {
            report.strong_violations.push(PairViolation {
                first: i,
                second: j,
                defect: d,
            });
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Additivity

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdditivityKind {
    MinEntropy,
    Capacity,
}

#[derive(Clone, Debug)]
pub struct AdditivityReport {
    pub kind: AdditivityKind,
    pub single_values: (f64, f64),
    pub product_value: f64,
    /// `H_min(Φ)+H_min(Ψ) − H_min(Φ⊗Ψ)` or `C̄(Φ⊗Ψ) − C̄(Φ) − C̄(Ψ)`; nonnegative up to noise.
    pub gap: f64,
    /// Best product-space optimizer (minimizer, or heaviest optimal ensemble member).
    pub witness: PureState,
    pub witness_rank: UniformRank,
    /// `‖Ω(Φ⊗Ψ) − Ω(Φ)⊗Ω(Ψ)‖_max` (capacity only).
    pub omega_product_residual: Option<f64>,
    /// Min-entropy: `max_φ H((Φ⊗Ψ)(φ⊗ψ₀)) − H_min(Φ⊗Ψ)` over sampled `A_E^Φ` states `φ`.
    /// Capacity: largest membership defect of sampled pure `ρ ⊗ σ` in `A_C^{Φ⊗Ψ}`.
    pub product_embedding_defect: Option<f64>,
    /// `max |H(Φρ⊗Ψσ‖Ω₁⊗Ω₂) − H(Φρ‖Ω₁) − H(Ψσ‖Ω₂)|` over the sampled pairs.
    pub relative_entropy_additivity_residual: Option<f64>,
    /// Largest `A_C` membership defect of pure marginals of sampled `A_C^{Φ⊗Ψ}` states.
    pub projected_membership_defect: Option<f64>,
    pub converged: bool,
}

impl AdditivityReport {
    pub fn additive(&self) -> bool {
        self.gap.abs() <= ADDITIVITY_TOL
    }

    pub fn to_json(&self) -> Value {
        json!({
            "additive": self.additive(),
            "converged": self.converged,
            "gap": number_json(self.gap),
            "kind": self.kind,
            "omega_product_residual": self.omega_product_residual.map(number_json),
            "product_embedding_defect": self.product_embedding_defect.map(number_json),
            "product_value": number_json(self.product_value),
            "projected_membership_defect": self.projected_membership_defect.map(number_json),
            "relative_entropy_additivity_residual": self.relative_entropy_additivity_residual.map(number_json),
            "single_values": [number_json(self.single_values.0), number_json(self.single_values.1)],
            "witness": vector_json(self.witness.amplitudes()),
            "witness_rank": self.witness_rank,
        })
    }
}

/// `H_min` of both factors and of the product, the latter seeded with
/// products of single-channel minimizers.
fn min_entropies(
    phi: &Channel,
    psi: &Channel,
    pc: &ProductChannel,
    cfg: &OptimizerConfig,
) -> Result<(MinEntropyReport, MinEntropyReport, MinEntropyReport)> {
    let m1 = min_output_entropy(phi, cfg)?;
    let m2 = min_output_entropy(psi, cfg)?;
    let seeds: Vec<ComplexVector> = m1
        .minimizers
        .iter()
        .take(4)
        .flat_map(|a| m2.minimizers.iter().take(4).map(move |b| a.tensor(b).amplitudes().clone()))
        .collect();
    let m12 = min_output_entropy_seeded(&pc.combined, &seeds, cfg, "product-min-entropy")?;
    Ok((m1, m2, m12))
}

/// Minimal-entropy additivity probe for `Φ ⊗ Ψ`.
pub fn additivity_min_entropy(phi: &Channel, psi: &Channel, cfg: &OptimizerConfig) -> Result<AdditivityReport> {
    let pc = product_of(phi, psi, cfg)?;
    let dims = pc.dims_in();
    let (m1, m2, m12) = min_entropies(phi, psi, &pc, cfg)?;
    let single_values = (m1.value, m2.value);
    let gap = m1.value + m2.value - m12.value;
    let witness = m12.minimizers[0].clone();
    let witness_rank = uniform_entanglement_rank(&witness, dims)?;

    let product_embedding_defect = if gap.abs() <= ADDITIVITY_TOL {
        let sample = sample_optimal_set_e_with(phi, &m1, cfg)?;
        let partner = &m2.minimizers[0];
        let defect = sample
            .states
            .iter()
            .take(VERIFY_SAMPLE_CAP)
            .map(|s| -> Result<f64> {
                let out = pc.combined.apply_pure(&s.tensor(partner))?;
                Ok(crate::qcore::entropy_of_spectrum_in(&out.spectrum(), log_base()) - m12.value)
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        Some(defect)
    } else {
        None
    };
    Ok(AdditivityReport {
        kind: AdditivityKind::MinEntropy,
        single_values,
        product_value: m12.value,
        gap,
        witness,
        witness_rank,
        omega_product_residual: None,
        product_embedding_defect,
        relative_entropy_additivity_residual: None,
        projected_membership_defect: None,
        converged: m1.converged && m2.converged && m12.converged,
    })
}

fn report_converged(r: &CapacityReport) -> bool {
    r.converged && r.max_distance_residual.finite().is_some_and(|v| v <= CAPACITY_TOL)
}

/// Largest `A_C` membership defect of the pure `side` marginals of `states`.
fn projected_pure_defect(
    states: &[PureState],
    dims: (usize, usize),
    side: Subsystem,
    channel: &Channel,
    report: &CapacityReport,
) -> Result<Option<f64>> {
    let mut worst: Option<f64> = None;
    for s in states {
        let m = reduced_state(s, dims, side)?;
        let e = m.eig();
        if e.values.get(1).copied().unwrap_or(0.0) > FLATNESS_TOL {
            continue;
        }
        let pure = PureState::normalized(e.vector(0))?;
        let d = match relative_entropy_of(&channel.apply_pure(&pure)?, &report.omega) {
            ExtendedReal::Finite(v) => report.value - v,
            ExtendedReal::Infinite => f64::INFINITY,
        };
        worst = Some(worst.map_or(d, |w: f64| w.max(d)));
    }
    Ok(worst)
}

/// Holevo-capacity additivity probe for `Φ ⊗ Ψ`.
pub fn additivity_capacity(phi: &Channel, psi: &Channel, cfg: &OptimizerConfig) -> Result<AdditivityReport> {
    let pc = product_of(phi, psi, cfg)?;
    let dims = pc.dims_in();
    let c1 = holevo_capacity(phi, &ConstraintSet::Full, cfg)?;
    let c2 = holevo_capacity(psi, &ConstraintSet::Full, cfg)?;
    let c12 = holevo_capacity(&pc.combined, &ConstraintSet::Full, cfg)?;
    let gap = c12.value - c1.value - c2.value;
    let omega_residual = max_abs(&(c12.omega.matrix() - c1.omega.tensor(&c2.omega).matrix()));
    let (_, heaviest) = c12
        .ensemble
        .members()
        .iter()
        .fold(None::<&(f64, PureState)>, |acc, m| match acc {
            Some(b) if b.0 >= m.0 => Some(b),
            _ => Some(m),
        })
        .expect("nonempty ensemble");
    let witness = heaviest.clone();
    let witness_rank = uniform_entanglement_rank(&witness, dims)?;
    let converged = report_converged(&c1) && report_converged(&c2) && report_converged(&c12);

    let mut embedding = None;
    let mut additivity_residual = None;
    let mut projected = None;
    if converged && gap.abs() <= ADDITIVITY_TOL {
        let s1 = sample_optimal_set_c(phi, &c1, cfg)?;
        let s2 = sample_optimal_set_c(psi, &c2, cfg)?;
        let omega_prod = c1.omega.tensor(&c2.omega);
        let mut worst_embed = f64::NEG_INFINITY;
        let mut worst_additivity = 0.0_f64;
        for a in s1.states.iter().take(VERIFY_SAMPLE_CAP) {
            let out_a = phi.apply_pure(a)?;
            for b in s2.states.iter().take(VERIFY_SAMPLE_CAP) {
                let out_b = psi.apply_pure(b)?;
                let joint = out_a.tensor(&out_b);
                let defect = match relative_entropy_of(&joint, &c12.omega) {
                    ExtendedReal::Finite(v) => c12.value - v,
                    ExtendedReal::Infinite => f64::INFINITY,
                };
                worst_embed = worst_embed.max(defect);
                if let (Some(j), Some(x), Some(y)) = (
                    relative_entropy_of(&joint, &omega_prod).finite(),
                    relative_entropy_of(&out_a, &c1.omega).finite(),
                    relative_entropy_of(&out_b, &c2.omega).finite(),
                ) {
                    worst_additivity = worst_additivity.max((j - x - y).abs());
                }
            }
        }
        embedding = Some(worst_embed);
        if omega_residual <= ADDITIVITY_TOL {
            additivity_residual = Some(worst_additivity);
        }
        let s12 = sample_optimal_set_c(&pc.combined, &c12, cfg)?;
        let h = projected_pure_defect(&s12.states, dims, Subsystem::H, phi, &c1)?;
        let k = projected_pure_defect(&s12.states, dims, Subsystem::K, psi, &c2)?;
        projected = match (h, k) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
    }
    Ok(AdditivityReport {
        kind: AdditivityKind::Capacity,
        single_values: (c1.value, c2.value),
        product_value: c12.value,
        gap,
        witness,
        witness_rank,
        omega_product_residual: Some(omega_residual),
        product_embedding_defect: embedding,
        relative_entropy_additivity_residual: additivity_residual,
        projected_membership_defect: projected,
        converged,
    })
}

/// Whether the product-average criterion for capacity additivity applies.
#[derive(Clone, Debug, Serialize)]
pub struct ProductAverageReport {
    pub applies: bool,
    /// `‖ρ̄ − ρ̄^H ⊗ ρ̄^K‖_max` for the optimal average `ρ̄` of the product ensemble.
    pub average_factorization_residual: f64,
    /// Largest second eigenvalue over extreme points of both projected samples.
    pub max_second_eigenvalue: f64,
    /// `C̄(Φ⊗Ψ) − C̄(Φ) − C̄(Ψ)`, computed only when the criterion applies.
    pub additivity_gap: Option<f64>,
    pub additivity_holds: Option<bool>,
}

pub fn product_average_check(
    phi: &Channel,
    psi: &Channel,
    product_report: &CapacityReport,
    product_sample: &OptimalSetSample,
    cfg: &OptimizerConfig,
) -> Result<ProductAverageReport> {
    if !report_converged(product_report) {
        return Err(Error::NotConverged(
            product_report.max_distance_residual.finite().unwrap_or(f64::INFINITY),
        ));
    }
    let dims = (phi.dim_in(), psi.dim_in());
    let average = product_report.ensemble.average();
    let (rh, rk) = marginals_of_density(&average, dims)?;
    let average_factorization_residual = max_abs(&(average.matrix() - rh.tensor(&rk).matrix()));
    let set = FiniteStateSet::new(product_sample.states.clone(), dims)?;
    let mut max_second = 0.0_f64;
    for (side, dim) in [(Subsystem::H, dims.0), (Subsystem::K, dims.1)] {
        let dirs = probe_directions(dim, STRUCTURE_DIRECTIONS, cfg.seed);
        for m in projected_extreme_points(&set, side, &dirs)? {
            max_second = max_second.max(flatness(&m).second_eigenvalue);
        }
    }
    let applies = average_factorization_residual <= FLATNESS_TOL && max_second <= FLATNESS_TOL;
    let (additivity_gap, additivity_holds) = if applies {
        let c1 = holevo_capacity(phi, &ConstraintSet::Full, cfg)?;
        let c2 = holevo_capacity(psi, &ConstraintSet::Full, cfg)?;
        let gap = product_report.value - c1.value - c2.value;
        (Some(gap), Some(gap.abs() <= RELATION_TOL))
    } else {
        (None, None)
    };
    Ok(ProductAverageReport {
        applies,
        average_factorization_residual,
        max_second_eigenvalue: max_second,
        additivity_gap,
        additivity_holds,
    })
}

// ---------------------------------------------------------------------------
// Assumption screens

/// Signed defects of the χ-function inequalities at one product-space state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AssumptionDefects {
    /// `χ(ω^H ⊗ ω^K) − χ(ω)`; below `−MEMBERSHIP_TOL` contradicts assumption A.
    pub a: f64,
    /// `χ(ω) − χ_Φ(ω^H) − χ_Ψ(ω^K)`; above tolerance violates subadditivity.
    pub subadd: f64,
    /// `χ(ρ⊗σ) − χ_Φ(ρ) − χ_Ψ(σ)` at the marginals.
    pub product_chi: f64,
    /// `Ĥ(ρ⊗σ) − Ĥ_Φ(ρ) − Ĥ_Ψ(σ)` at the marginals.
    pub product_closure: f64,
}

impl AssumptionDefects {
    pub fn assumption_a_holds(&self, tol: f64) -> bool {
        self.a >= -tol
    }

    /// Subadditivity is an inequality; the two product identities are equalities.
    pub fn assumption_b_holds(&self, tol: f64) -> bool {
        self.subadd <= tol && self.product_chi.abs() <= tol && self.product_closure.abs() <= tol
    }
}

/// Tensor product of two ensembles.
pub fn product_ensemble(a: &Ensemble, b: &Ensemble) -> Result<Ensemble> {
    let mut members = Vec::with_capacity(a.len() * b.len());
    for (p, s) in a.members() {
        for (q, t) in b.members() {
            members.push((p * q, s.tensor(t)));
        }
    }
    Ensemble::new(members)
}

/// All assumption defects at `ω`, sharing the χ evaluations between them.
pub fn assumption_screen(phi: &Channel, psi: &Channel, omega: &DensityMatrix, cfg: &OptimizerConfig) -> Result<AssumptionDefects> {
    let pc = product_of(phi, psi, cfg)?;
    let dims = pc.dims_in();
    if omega.dim() != dims.0 * dims.1 {
        return Err(Error::DimensionMismatch {
            expected: dims.0 * dims.1,
            got: omega.dim(),
        });
    }
    let (rho, sigma) = marginals_of_density(omega, dims)?;
    let chi_rho = chi(phi, &rho, cfg)?;
    let chi_sigma = chi(psi, &sigma, cfg)?;
    let seed = product_ensemble(&chi_rho.closure.ensemble, &chi_sigma.closure.ensemble)?;
    let chi_product = chi_with_seeds(&pc.combined, &rho.tensor(&sigma), &[seed], cfg)?;
    let chi_omega = chi(&pc.combined, omega, cfg)?;
    Ok(AssumptionDefects {
        a: chi_product.value - chi_omega.value,
        subadd: chi_omega.value - chi_rho.value - chi_sigma.value,
        product_chi: chi_product.value - chi_rho.value - chi_sigma.value,
        product_closure: chi_product.closure.value - chi_rho.closure.value - chi_sigma.closure.value,
    })
}

/// `χ_{Φ⊗Ψ}(ω^H ⊗ ω^K) − χ_{Φ⊗Ψ}(ω)`.
pub fn assumption_a_defect(phi: &Channel, psi: &Channel, omega: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(assumption_screen(phi, psi, omega, cfg)?.a)
}

/// `(subadd, product_chi, product_closure)` defects at `ω`.
pub fn assumption_b_defects(
    phi: &Channel,
    psi: &Channel,
    omega: &DensityMatrix,
    cfg: &OptimizerConfig,
) -> Result<(f64, f64, f64)> {
    let d = assumption_screen(phi, psi, omega, cfg)?;
    Ok((d.subadd, d.product_chi, d.product_closure))
}

// ---------------------------------------------------------------------------
// Projective relations and entangled-marginal scenarios

#[derive(Clone, Debug, Serialize)]
pub struct RelationDefect {
    pub name: String,
    /// `max_Y h_projected(Y) − h_single(Y)`: the projection leaves the single set.
    pub forward: f64,
    /// `max_Y h_single(Y) − h_projected(Y)`: the single set exceeds the projection.
    pub backward: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectiveReport {
    pub relations: Vec<RelationDefect>,
    pub omega_product_residual: f64,
    pub all_hold: bool,
}

fn lift(x: &HermitianOperator, side: Subsystem, other_dim: usize) -> HermitianOperator {
    let id = HermitianOperator::identity(other_dim);
    match side {
        Subsystem::H => x.tensor(&id),
        Subsystem::K => id.tensor(x),
    }
}

fn relation(
    name: &str,
    product_states: &[PureState],
    dims: (usize, usize),
    side: Subsystem,
    single_states: &[PureState],
    directions: &[HermitianOperator],
) -> Result<RelationDefect> {
    let mut forward = f64::NEG_INFINITY;
    let mut backward = f64::NEG_INFINITY;
    let margs: Vec<DensityMatrix> = product_states
        .iter()
        .map(|s| reduced_state(s, dims, side))
        .collect::<Result<_>>()?;
    for y in directions {
        let hp = margs.iter().map(|m| y.trace_product(m.matrix())).fold(f64::NEG_INFINITY, f64::max);
        let hs = crate::optsets::support_function(single_states, y);
        forward = forward.max(hp - hs);
        backward = backward.max(hs - hp);
    }
    Ok(RelationDefect {
        name: name.into(),
        forward,
        backward,
        holds: forward <= RELATION_TOL && backward <= RELATION_TOL,
    })
}

/// Compares `Θ_H`, `Θ_K` of the product optimal sets with the single-channel
/// optimal sets through support functions. Product sets are probed along the
/// lifted comparison directions so that each direction has its exposed point.
pub fn projective_relations_check(phi: &Channel, psi: &Channel, cfg: &OptimizerConfig) -> Result<ProjectiveReport> {
    let pc = product_of(phi, psi, cfg)?;
    let dims = pc.dims_in();
    let yh = probe_directions(dims.0, PROBE_DIRECTIONS, cfg.seed);
    let yk = probe_directions(dims.1, PROBE_DIRECTIONS, cfg.seed);
    let lifted: Vec<HermitianOperator> = yh
        .iter()
        .map(|y| lift(y, Subsystem::H, dims.1))
        .chain(yk.iter().map(|y| lift(y, Subsystem::K, dims.0)))
        .collect();

    let (m1, m2, m12) = min_entropies(phi, psi, &pc, cfg)?;
    let c1 = holevo_capacity(phi, &ConstraintSet::Full, cfg)?;
    let c2 = holevo_capacity(psi, &ConstraintSet::Full, cfg)?;
    let c12 = holevo_capacity(&pc.combined, &ConstraintSet::Full, cfg)?;

    let e1 = sample_optimal_set_e_along(phi, &m1, &yh, cfg)?;
    let e2 = sample_optimal_set_e_along(psi, &m2, &yk, cfg)?;
    let e12 = sample_optimal_set_e_along(&pc.combined, &m12, &lifted, cfg)?;
    let s1 = sample_optimal_set_c_along(phi, &c1, &yh, cfg)?;
    let s2 = sample_optimal_set_c_along(psi, &c2, &yk, cfg)?;
    let s12 = sample_optimal_set_c_along(&pc.combined, &c12, &lifted, cfg)?;

    let relations = vec![
        relation("theta_h(A_C) = A_C(phi)", &s12.states, dims, Subsystem::H, &s1.states, &yh)?,
        relation("theta_k(A_C) = A_C(psi)", &s12.states, dims, Subsystem::K, &s2.states, &yk)?,
        relation("theta_h(A_E) = A_E(phi)", &e12.states, dims, Subsystem::H, &e1.states, &yh)?,
        relation("theta_k(A_E) = A_E(psi)", &e12.states, dims, Subsystem::K, &e2.states, &yk)?,
    ];
    let all_hold = relations.iter().all(|r| r.holds);
    Ok(ProjectiveReport {
        relations,
        omega_product_residual: max_abs(&(c12.omega.matrix() - c1.omega.tensor(&c2.omega).matrix())),
        all_hold,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalDecomposition {
    pub index: usize,
    pub residual_h: f64,
    pub residual_k: f64,
}

/// Entangled optimal states must have marginals in the hulls of the
/// single-channel optimal pure states.
#[derive(Clone, Debug, Serialize)]
pub struct EntangledMarginalsReport {
    pub entangled: Vec<MarginalDecomposition>,
    pub max_residual: f64,
    pub holds: bool,
}

pub fn entangled_marginals_check(
    product_sample: &OptimalSetSample,
    dims: (usize, usize),
    left: &OptimalSetSample,
    right: &OptimalSetSample,
) -> Result<EntangledMarginalsReport> {
    let mut entangled = Vec::new();
    for (index, s) in product_sample.states.iter().enumerate() {
        if !is_entangled(s, dims)? {
            continue;
        }
        let (h, k) = marginals(s, dims)?;
        entangled.push(MarginalDecomposition {
            index,
            residual_h: hull_decomposition(&h, &left.states)?.1,
            residual_k: hull_decomposition(&k, &right.states)?.1,
        });
    }
    let max_residual = entangled
        .iter()
        .map(|e| e.residual_h.max(e.residual_k))
        .fold(0.0, f64::max);
    Ok(EntangledMarginalsReport {
        holds: max_residual <= DECOMPOSITION_TOL,
        entangled,
        max_residual,
    })
}

/// Indices and ranks of sampled states that are uniformly entangled with rank ≥ 2.
pub fn uniformly_entangled_states(states: &[PureState], dims: (usize, usize)) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (i, s) in states.iter().enumerate() {
        if let Some(r) = uniform_entanglement_rank(s, dims)?.rank {
            if r >= 2 {
                out.push((i, r));
            }
        }
    }
    Ok(out)
}

fn support_projector(rho: &DensityMatrix) -> Result<Projector> {
    let e = rho.eig();
    let vectors: Vec<ComplexVector> = (0..rho.dim())
        .filter(|&i| e.values[i] > SCHMIDT_THRESHOLD)
        .map(|i| e.vector(i))
        .collect();
    Projector::onto_span(rho.dim(), &vectors, 0.5)
}

/// Restrictions of `Φ` and `Ψ` to the supports of the marginals of `ω`.
pub fn subchannels_from_support(
    phi: &Channel,
    psi: &Channel,
    omega: &PureState,
) -> Result<(Channel, Channel)> {
    let dims = (phi.dim_in(), psi.dim_in());
    let (h, k) = marginals(omega, dims)?;
    Ok((phi.restrict(&support_projector(&h)?)?, psi.restrict(&support_projector(&k)?)?))
}

impl ProductDecompositionReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }
}

pub fn hereditary_json(report: &HereditaryReport) -> Value {
    let mut v = serde_json::to_value(report).expect("serializable");
    v["holds"] = json!(report.holds());
    v
}
