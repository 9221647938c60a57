//! Holevo capacity, unconstrained and over finitely generated constraint sets.
//!
//! The unconstrained loop alternates Blahut-Arimoto reweighting of a fixed
//! member set with a search for the pure state farthest (in output relative
//! entropy) from the current average image `Ω`. It stops when that maximal
//! distance exceeds the ensemble's Holevo quantity by at most
//! [`CAPACITY_TOL`], which bounds the suboptimality.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::qcore::{
    eigh, entropy_of_spectrum_in, hermitian_part, log_base, max_abs, relative_entropy_unchecked, support_rank,
    ComplexMatrix, ComplexVector, DensityMatrix, ExtendedReal, LogBase, PureState, C64, EPS_SUPPORT,
};

use super::closure::{chi, chi_with_seeds};
use super::ensemble::Ensemble;
use super::minent::{conjugate_from_runs, conjugate_runs, entropy_gradient_operator, eigenvector_residual_c};
use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::OptimizerConfig;

/// Certification threshold on the maximal-distance residual.
pub const CAPACITY_TOL: f64 = 1e-6;
/// Residual threshold of [`check_optimal_average`].
pub const OPTIMAL_AVERAGE_TOL: f64 = 1e-5;

const BA_TOL: f64 = 1e-11;
const BA_MAX_ITERS: usize = 20_000;
const PRUNE_WEIGHT: f64 = 1e-13;
const SUPPORT_TOL: f64 = 1e-10;
const DUPLICATE_OVERLAP: f64 = 1.0 - 1e-10;
const POLISH_TOL: f64 = 1e-10;

/// Admissible input states: everything, or the convex hull of generators.
#[derive(Clone, Debug)]
pub enum ConstraintSet {
    Full,
    Generators(Vec<DensityMatrix>),
}

impl ConstraintSet {
    pub fn generators(states: Vec<DensityMatrix>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidInput("constraint set needs at least one generator".into()))?;
        let d = first.dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.dim(),
            });
        }
        Ok(ConstraintSet::Generators(states))
    }

    pub fn is_full(&self) -> bool {
        matches!(self, ConstraintSet::Full)
    }
}

/// Capacity value with its optimal ensemble and certificate data.
#[derive(Clone, Debug)]
pub struct CapacityReport {
    pub value: f64,
    pub ensemble: Ensemble,
    /// `Ω = Φ(ρ̄)` for the ensemble average `ρ̄`.
    pub omega: DensityMatrix,
    /// Full constraint: `max_ω H(Φ(ω)‖Ω) − value`. Generators: the largest
    /// positive excess of `χ(ρ_j) + H(Φ(ρ_j)‖Ω)` over `value`.
    pub max_distance_residual: ExtendedReal,
    /// `‖Φ*(−log Ω + log Φ(φφ†))φ − C̄φ‖` per ensemble member.
    pub eigenvector_residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Mixing weights over the generators (generator constraints only).
    pub generator_weights: Option<Vec<f64>>,
}

impl CapacityReport {
    pub fn to_json(&self) -> serde_json::Value {
        use crate::report::{extended_json, matrix_json, number_json};
        serde_json::json!({
            "converged": self.converged,
            "ensemble": self.ensemble.to_report(),
            "generator_weights": self.generator_weights,
            "iterations": self.iterations,
            "eigenvector_residuals": self.eigenvector_residuals.iter().map(|r| number_json(*r)).collect::<Vec<_>>(),
            "max_distance_residual": extended_json(self.max_distance_residual),
            "omega": matrix_json(self.omega.matrix()),
            "value": number_json(self.value),
        })
    }

    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged(self.max_distance_residual.finite().unwrap_or(f64::INFINITY)))
        }
    }
}

/// `Φ*(−log Ω)`, whose expectation in `ψ` is `H(Φ(ψψ†)‖Ω) + H(Φ(ψψ†))` on the support of `Ω`.
pub(crate) fn distance_operator(channel: &Channel, omega: &DensityMatrix, base: LogBase) -> ComplexMatrix {
    let e = eigh(omega.matrix());
    let neg_log = e.reconstruct_with(|l| if l > EPS_SUPPORT { -base.log(l) } else { 0.0 });
    channel.dual_matrix(&neg_log)
}

struct Member {
    state: ComplexVector,
    output: ComplexMatrix,
    entropy: f64,
}

impl Member {
    fn new(channel: &Channel, state: ComplexVector, base: LogBase) -> Self {
        let output = channel.apply_vector(&state);
        let entropy = entropy_of_spectrum_in(&eigh(&output).values, base);
        Self { state, output, entropy }
    }
}

fn mix(members: &[Member], weights: &[f64]) -> ComplexMatrix {
    let d = members[0].output.nrows();
    let mut omega = ComplexMatrix::zeros(d, d);
    for (m, w) in members.iter().zip(weights) {
        omega += &m.output * C64::new(*w, 0.0);
    }
    hermitian_part(&omega)
}

/// Distances `H(Φ(ψ_i)‖Ω)` of every member, assuming supports are contained in `supp Ω`.
fn distances(members: &[Member], omega: &ComplexMatrix, base: LogBase) -> Vec<f64> {
    let e = eigh(omega);
    let neg_log = e.reconstruct_with(|l| if l > EPS_SUPPORT { -base.log(l) } else { 0.0 });
    members
        .iter()
        .map(|m| {
            let cross: f64 = (0..neg_log.nrows())
                .flat_map(|i| (0..neg_log.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| (m.output[(i, j)] * neg_log[(j, i)]).re)
                .sum();
            cross - m.entropy
        })
        .collect()
}

/// Blahut-Arimoto iteration on fixed members; returns the Holevo quantity.
fn reweight(members: &[Member], weights: &mut [f64], base: LogBase) -> f64 {
    let per_nat = base.per_nat();
    let mut chi = 0.0;
    for _ in 0..BA_MAX_ITERS {
        let omega = mix(members, weights);
        let dist = distances(members, &omega, base);
        chi = weights.iter().zip(&dist).map(|(w, d)| w * d).sum();
        let max = dist.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max - chi <= BA_TOL {
            break;
        }
        let mut total = 0.0;
        for (w, d) in weights.iter_mut().zip(&dist) {
            *w *= ((d - max) / per_nat).exp();
            total += *w;
        }
        weights.iter_mut().for_each(|w| *w /= total);
    }
    chi
}

fn holevo_of(members: &[Member], weights: &[f64], base: LogBase) -> f64 {
    let omega = mix(members, weights);
    let h = entropy_of_spectrum_in(&eigh(&omega).values, base);
    h - members.iter().zip(weights).map(|(m, w)| w * m.entropy).sum::<f64>()
}

/// Block ascent on the Holevo quantity: a line-searched gradient step on all
/// member states (weights fixed), then exact reweighting. Returns the final
/// Holevo quantity.
fn polish(channel: &Channel, members: &mut Vec<Member>, weights: &mut Vec<f64>, base: LogBase, cfg: &OptimizerConfig) -> f64 {
    let mut chi = reweight(members, weights, base);
    let mut step = 1.0;
    for _ in 0..cfg.max_iters {
        let omega = DensityMatrix::from_computed(&mix(members, weights));
        let a = distance_operator(channel, &omega, base);
        let dirs: Vec<ComplexVector> = members
            .iter()
            .map(|m| {
                let b = &a - entropy_gradient_operator(channel, &m.state, base);
                let bpsi = &b * &m.state;
                let mu = m.state.dotc(&bpsi);
                bpsi - &m.state * mu
            })
            .collect();
        let slope: f64 = dirs.iter().zip(weights.iter()).map(|(g, w)| 2.0 * w * g.norm_squared()).sum();
        let max_dir = dirs.iter().map(|g| g.norm()).fold(0.0, f64::max);
        if max_dir <= POLISH_TOL {
            break;
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..40 {
            let moved: Vec<Member> = members
                .iter()
                .zip(&dirs)
                .map(|(m, g)| {
                    let v = &m.state + g * C64::new(t, 0.0);
                    let n = v.norm();
                    Member::new(channel, v.unscale(n), base)
                })
                .collect();
            let c = holevo_of(&moved, weights, base);
            if c >= chi + 1e-4 * t * slope {
                accepted = Some(moved);
                break;
            }
            t *= 0.5;
        }
        let Some(moved) = accepted else { break };
        *members = moved;
        step = (2.0 * t).min(1e3);
        let previous = chi;
        chi = reweight(members, weights, base);
        if chi - previous <= 1e-15 && max_dir <= POLISH_TOL.sqrt() {
            break;
        }
    }
    merge_duplicates(members, weights);
    chi
}

fn merge_duplicates(members: &mut Vec<Member>, weights: &mut Vec<f64>) {
    let mut i = 0;
    while i < members.len() {
        let mut j = i + 1;
        while j < members.len() {
            if members[i].state.dotc(&members[j].state).norm_sqr() > DUPLICATE_OVERLAP {
                weights[i] += weights[j];
                members.remove(j);
                weights.remove(j);
            } else {
                j += 1;
            }
        }
        i += 1;
    }
}

/// Real coordinates of a Hermitian matrix (diagonal, then upper real/imag parts).
fn hermitian_coordinates(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(m[(i, i)].re);
    }
    for i in 0..d {
        for j in i + 1..d {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

/// Drops members until at most `d²` remain, keeping the average and never
/// increasing the mean output entropy.
fn caratheodory_reduce(members: &mut Vec<Member>, weights: &mut Vec<f64>) {
    let d = members[0].state.len();
    while members.len() > d * d {
        let n = members.len();
        let cols: Vec<Vec<f64>> = members
            .iter()
            .map(|m| hermitian_coordinates(&(&m.state * m.state.adjoint())))
            .collect();
        let a = DMatrix::from_fn(d * d, n, |i, j| cols[j][i]);
        let gram = a.transpose() * &a;
        let eig = SymmetricEigen::new(gram);
        let mut k = 0;
        for i in 1..n {
            if eig.eigenvalues[i] < eig.eigenvalues[k] {
                k = i;
            }
        }
        let mut c: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let dh: f64 = c.iter().zip(members.iter()).map(|(ci, m)| ci * m.entropy).sum();
        if dh < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        // w − t·c with the largest t keeping weights nonnegative.
        let mut t = f64::INFINITY;
        let mut hit = None;
        for (i, (&ci, &wi)) in c.iter().zip(weights.iter()).enumerate() {
            if ci > 1e-15 && wi / ci < t {
                t = wi / ci;
                hit = Some(i);
            }
        }
        let Some(hit) = hit else { break };
        for (w, ci) in weights.iter_mut().zip(&c) {
            *w = (*w - t * ci).max(0.0);
        }
        weights[hit] = 0.0;
        let mut i = 0;
        while i < members.len() {
            if weights[i] <= 0.0 {
                members.remove(i);
                weights.remove(i);
            } else {
                i += 1;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }
}

fn holevo_full(channel: &Channel, cfg: &OptimizerConfig) -> Result<CapacityReport> {
    let base = log_base();
    let d = channel.dim_in();
    let full_rank = support_rank(
        &channel.apply_matrix(DensityMatrix::maximally_mixed(d).matrix()),
        SUPPORT_TOL,
    );
    let mut members: Vec<Member> = (0..d)
        .map(|i| Member::new(channel, PureState::basis(d, i).amplitudes().clone(), base))
        .collect();
    let mut weights = vec![1.0 / d as f64; d];
    let mut residual = ExtendedReal::Infinite;
    let mut converged = false;
    let mut iterations = 0;
    let mut max_distance = f64::INFINITY;

    for outer in 0..cfg.capacity_iters {
        iterations = outer + 1;
        reweight(&members, &mut weights, base);
        // Prune negligible members.
        let mut i = 0;
        while i < members.len() && members.len() > 1 {
            if weights[i] < PRUNE_WEIGHT {
                members.remove(i);
                weights.remove(i);
            } else {
                i += 1;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);

        let omega = mix(&members, &weights);
        if support_rank(&omega, SUPPORT_TOL) < full_rank {
            // A pruned member carried support; restore the basis states.
            for j in 0..d {
                let b = PureState::basis(d, j).amplitudes().clone();
                members.push(Member::new(channel, b, base));
                weights.push(1e-6);
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            continue;
        }
        let chi_ens = polish(channel, &mut members, &mut weights, base, cfg);
        let omega_state = DensityMatrix::from_computed(&mix(&members, &weights));
        let a = distance_operator(channel, &omega_state, base);
        let mut order: Vec<usize> = (0..members.len()).collect();
        order.sort_by(|&x, &y| weights[y].total_cmp(&weights[x]).then(x.cmp(&y)));
        let seeds: Vec<ComplexVector> = order.iter().take(8).map(|&k| members[k].state.clone()).collect();
        let runs = conjugate_runs(channel, &a, &seeds, cfg.restarts, cfg, &format!("capacity-search-{outer}"));
        let found = conjugate_from_runs(&runs);
        max_distance = found.value;
        let gap = (max_distance - chi_ens).max(0.0);
        residual = ExtendedReal::Finite(gap);
        if gap <= CAPACITY_TOL {
            converged = true;
            break;
        }
        // Add every sufficiently far distinct candidate.
        let threshold = chi_ens + 0.5 * gap;
        let mut added = false;
        let mut candidates: Vec<&super::sphere::SphereRun> = runs.iter().filter(|r| r.value > threshold).collect();
        candidates.sort_by(|x, y| y.value.total_cmp(&x.value));
        for run in candidates.into_iter().take(4) {
            let dup = members
                .iter()
                .any(|m| m.state.dotc(&run.state).norm_sqr() > DUPLICATE_OVERLAP);
            if !dup {
                members.push(Member::new(channel, run.state.clone(), base));
                weights.push(0.0);
                added = true;
            }
        }
        if added {
            // Give new members a small share so reweighting can grow them.
            let share = 0.05 / weights.iter().filter(|w| **w == 0.0).count() as f64;
            for w in weights.iter_mut() {
                *w = if *w == 0.0 { share } else { *w * 0.95 };
            }
        }
    }

    caratheodory_reduce(&mut members, &mut weights);
    let ens_members: Vec<(f64, PureState)> = members
        .iter()
        .zip(&weights)
        .map(|(m, w)| (*w, PureState::normalized(m.state.clone()).expect("unit vector")))
        .collect();
    let ensemble = Ensemble::from_weights(ens_members, 0.0);
    let value = ensemble.holevo_quantity(channel).max(0.0);
    let omega = channel.apply(&ensemble.average())?;
    if let ExtendedReal::Finite(_) = residual {
        residual = ExtendedReal::Finite((max_distance - value).max(0.0));
        converged = converged || (max_distance - value) <= CAPACITY_TOL;
    }
    let eigenvector_residuals = ensemble
        .members()
        .iter()
        .map(|(_, s)| eigenvector_residual_c(channel, s, &omega, value))
        .collect();
    Ok(CapacityReport {
        value,
        ensemble,
        omega,
        max_distance_residual: residual,
        eigenvector_residuals,
        converged,
        iterations,
        generator_weights: None,
    })
}

fn mixture(gens: &[DensityMatrix], q: &[f64]) -> DensityMatrix {
    let d = gens[0].dim();
    let mut acc = ComplexMatrix::zeros(d, d);
    for (g, w) in gens.iter().zip(q) {
        acc += g.matrix() * C64::new(*w, 0.0);
    }
    DensityMatrix::from_computed(&hermitian_part(&acc))
}

fn simplex_point(y: &[f64]) -> Vec<f64> {
    let total: f64 = y.iter().map(|v| v * v).sum();
    if total <= 0.0 {
        return vec![1.0 / y.len() as f64; y.len()];
    }
    y.iter().map(|v| v * v / total).collect()
}

fn holevo_generators(channel: &Channel, gens: &[DensityMatrix], cfg: &OptimizerConfig) -> Result<CapacityReport> {
    let base = log_base();
    let k = gens.len();
    let objective = |q: &[f64]| -> f64 { chi(channel, &mixture(gens, q), cfg).map(|c| c.value).unwrap_or(0.0) };
    let q: Vec<f64> = match k {
        1 => vec![1.0],
        2 => {
            // χ is concave, so golden-section search on the segment is exact up to tolerance.
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let mut x1 = hi - g * (hi - lo);
            let mut x2 = lo + g * (hi - lo);
            let mut f1 = objective(&[x1, 1.0 - x1]);
            let mut f2 = objective(&[x2, 1.0 - x2]);
            while hi - lo > 1e-7 {
                if f1 < f2 {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + g * (hi - lo);
                    f2 = objective(&[x2, 1.0 - x2]);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - g * (hi - lo);
                    f1 = objective(&[x1, 1.0 - x1]);
                }
            }
            let mut best = (0.5 * (lo + hi), objective(&[0.5 * (lo + hi), 1.0 - 0.5 * (lo + hi)]));
            for x in [0.0, 1.0] {
                let f = objective(&[x, 1.0 - x]);
                if f > best.1 {
                    best = (x, f);
                }
            }
            vec![best.0, 1.0 - best.0]
        }
        _ => {
            let start = vec![1.0 / (k as f64).sqrt(); k];
            let opts = NelderMeadOptions {
                initial_step: 0.3,
                max_evals: 60 * k * k,
                f_tol: 1e-10,
                x_tol: 1e-7,
                restarts: 2,
            };
            let (y, _) = nelder_mead(|y| -objective(&simplex_point(y)), &start, &opts);
            let mut q = simplex_point(&y);
            let mut best_value = objective(&q);
            for j in 0..k {
                let mut vertex = vec![0.0; k];
                vertex[j] = 1.0;
                let f = objective(&vertex);
                if f > best_value {
                    best_value = f;
                    q = vertex;
                }
            }
            q
        }
    };

    let rho = mixture(gens, &q);
    let result = chi(channel, &rho, cfg)?;
    let value = result.value;
    let omega = channel.apply(&rho)?;
    let mut excess: f64 = 0.0;
    let mut infinite = false;
    for g in gens {
        let out = channel.apply(g)?;
        match relative_entropy_unchecked(out.matrix(), omega.matrix(), base) {
            ExtendedReal::Infinite => infinite = true,
            ExtendedReal::Finite(dist) => {
                let cg = chi_with_seeds(channel, g, &[], cfg)?.value;
                excess = excess.max(cg + dist - value);
            }
        }
    }
    let residual = if infinite {
        ExtendedReal::Infinite
    } else {
        ExtendedReal::Finite(excess.max(0.0))
    };
    let converged = matches!(residual, ExtendedReal::Finite(r) if r <= CAPACITY_TOL);
    let ensemble = result.closure.ensemble;
    let eigenvector_residuals = ensemble
        .members()
        .iter()
        .map(|(_, s)| eigenvector_residual_c(channel, s, &omega, value))
        .collect();
    Ok(CapacityReport {
        value,
        ensemble,
        omega,
        max_distance_residual: residual,
        eigenvector_residuals,
        converged,
        iterations: 1,
        generator_weights: Some(q),
    })
}

/// Holevo capacity `C̄(Φ; 𝒜)`.
pub fn holevo_capacity(channel: &Channel, constraint: &ConstraintSet, cfg: &OptimizerConfig) -> Result<CapacityReport> {
    cfg.validate()?;
    match constraint {
        ConstraintSet::Full => holevo_full(channel, cfg),
        ConstraintSet::Generators(gens) => {
            if let Some(bad) = gens.iter().find(|g| g.dim() != channel.dim_in()) {
                return Err(Error::DimensionMismatch {
                    expected: channel.dim_in(),
                    got: bad.dim(),
                });
            }
            if gens.is_empty() {
                return Err(Error::InvalidInput("constraint set needs at least one generator".into()));
            }
            holevo_generators(channel, gens, cfg)
        }
    }
}

/// Maximal-distance test for an optimal ensemble average.
#[derive(Clone, Debug)]
pub struct OptimalAverageCheck {
    pub is_optimal_average: bool,
    /// `|max_ω H(Φ(ω)‖Φ(ρ)) − χ_Φ(ρ)|`.
    pub residual: ExtendedReal,
    pub chi: f64,
    pub max_distance: ExtendedReal,
}

impl OptimalAverageCheck {
    pub fn to_json(&self) -> serde_json::Value {
        use crate::report::{extended_json, number_json};
        serde_json::json!({
            "chi": number_json(self.chi),
            "is_optimal_average": self.is_optimal_average,
            "max_distance": extended_json(self.max_distance),
            "residual": extended_json(self.residual),
        })
    }
}

pub fn check_optimal_average(channel: &Channel, rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<OptimalAverageCheck> {
    cfg.validate()?;
    let base = log_base();
    let chi_result = chi(channel, rho, cfg)?;
    let out = channel.apply(rho)?;
    let d = channel.dim_in();
    let full_rank = support_rank(
        &channel.apply_matrix(DensityMatrix::maximally_mixed(d).matrix()),
        SUPPORT_TOL,
    );
    if support_rank(out.matrix(), SUPPORT_TOL) < full_rank {
        // Some pure input leaves the support of Φ(ρ): the distance is infinite.
        return Ok(OptimalAverageCheck {
            is_optimal_average: false,
            residual: ExtendedReal::Infinite,
            chi: chi_result.value,
            max_distance: ExtendedReal::Infinite,
        });
    }
    let a = distance_operator(channel, &out, base);
    let seeds: Vec<ComplexVector> = chi_result
        .closure
        .ensemble
        .members()
        .iter()
        .map(|(_, s)| s.amplitudes().clone())
        .collect();
    let runs = conjugate_runs(channel, &a, &seeds, cfg.restarts, cfg, "optimal-average");
    let max_distance = conjugate_from_runs(&runs).value;
    let residual = (max_distance - chi_result.value).abs();
    Ok(OptimalAverageCheck {
        is_optimal_average: residual <= OPTIMAL_AVERAGE_TOL,
        residual: ExtendedReal::Finite(residual),
        chi: chi_result.value,
        max_distance: ExtendedReal::Finite(max_distance),
    })
}

/// Slack `C̄ − χ_Φ(ρ) − H(Φ(ρ)‖Ω)` of the capacity inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slack {
    Finite(f64),
    /// `supp Φ(ρ) ⊄ supp Ω`; the inequality cannot hold.
    NegativeInfinity,
}

impl Slack {
    pub fn finite(self) -> Option<f64> {
        match self {
            Slack::Finite(v) => Some(v),
            Slack::NegativeInfinity => None,
        }
    }
}

pub fn check_capacity_inequality(
    channel: &Channel,
    rho: &DensityMatrix,
    report: &CapacityReport,
    cfg: &OptimizerConfig,
) -> Result<Slack> {
    let out = channel.apply(rho)?;
    if out.dim() != report.omega.dim() {
        return Err(Error::DimensionMismatch {
            expected: report.omega.dim(),
            got: out.dim(),
        });
    }
    match relative_entropy_unchecked(out.matrix(), report.omega.matrix(), log_base()) {
        ExtendedReal::Infinite => Ok(Slack::NegativeInfinity),
        ExtendedReal::Finite(dist) => {
            let c = chi(channel, rho, cfg)?.value;
            Ok(Slack::Finite(report.value - c - dist))
        }
    }
}

/// `‖Φ(ρ̄) − Ω‖_max` for the report's own ensemble; a consistency check.
pub fn omega_consistency(channel: &Channel, report: &CapacityReport) -> f64 {
    max_abs(&(channel.apply_matrix(&report.ensemble.average_matrix()) - report.omega.matrix()))
}
