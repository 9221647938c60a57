//! The optimal sets of a channel: `A_E` (convex hull of minimal output
//! entropy states) and `A_C` (states attaining equality in the capacity
//! inequality), sampled through their pure extreme points.
//!
//! Samples combine multi-start optima with exposed-point probes: for a
//! Hermitian direction `X`, the optimizer is run on the objective tilted by
//! `tX` (small `t`), then polished on the untilted objective. The probes use
//! a fixed direction stream, so two samples drawn with the same seed are
//! probed along the same directions and their support functions compare
//! meaningfully.

use serde::Serialize;
use serde_json::{json, Value};

use crate::channels::Channel;
use crate::entropyopt::sphere::{ascend, build_starts, multi_start, Objective};
use crate::entropyopt::{
    chi, convex_closure_entropy, distance_operator, eigenvector_residual_c, eigenvector_residual_e, min_output_entropy,
    CapacityReport, MinEntropyReport, OptimizerConfig, CAPACITY_TOL,
};
use crate::error::{Error, Result};
use crate::qcore::{
    log_base, max_abs, relative_entropy_unchecked, ComplexMatrix, ComplexVector, DensityMatrix, ExtendedReal,
    HermitianOperator, Projector, PureState, C64,
};
use crate::random::{random_hermitian, rng_indexed};
use crate::report::{extended_json, matrix_json, number_json, vector_json};

/// Residual bound for certifying an extreme-point candidate.
pub const CERTIFICATION_TOL: f64 = 1e-5;
/// Defect bound for set membership.
pub const MEMBERSHIP_TOL: f64 = 1e-4;
/// States retained per sample.
pub const SAMPLE_CAP: usize = 512;
/// Directions probed while sampling and compared in support functions.
pub const PROBE_DIRECTIONS: usize = 50;
/// Numerical rank threshold of the support projector.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;
/// Support functions agreeing within this count as equal hulls.
pub const HULL_TOL: f64 = 1e-4;

const PROBE_TILT: f64 = 1e-2;
// The tilted stage only has to land near the exposed point; polishing finishes it.
const PROBE_ITERS: usize = 200;
// Certified candidates closer than this collapse to the best of their cluster.
const CLUSTER_OVERLAP: f64 = 1.0 - 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SetKind {
    /// Capacity-optimal set `A_C`.
    C,
    /// Minimal-entropy set `A_E`.
    E,
}

/// Deduplicated certified pure states of one optimal set.
#[derive(Clone, Debug)]
pub struct OptimalSetSample {
    pub kind: SetKind,
    pub states: Vec<PureState>,
    /// Eigenvector residual per state (all at most [`CERTIFICATION_TOL`]).
    pub residuals: Vec<f64>,
    /// Projector onto the span of `states`.
    pub support_projector: Projector,
    /// `H_min` for `E`, `C̄` for `C`.
    pub level: f64,
}

impl OptimalSetSample {
    pub fn dim(&self) -> usize {
        self.support_projector.dim()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind,
            "level": self.level,
            "residuals": self.residuals.iter().map(|r| number_json(*r)).collect::<Vec<_>>(),
            "states": self.states.iter().map(|s| vector_json(s.amplitudes())).collect::<Vec<_>>(),
            "support_projector": matrix_json(self.support_projector.matrix()),
            "support_rank": self.support_projector.rank(),
        })
    }
}

/// The shared probe directions `X_k` on `C^dim` for `k < count`.
pub fn probe_directions(dim: usize, count: usize, seed: u64) -> Vec<HermitianOperator> {
    (0..count)
        .map(|k| {
            let mut rng = rng_indexed(seed, &format!("probe-direction-{dim}"), k as u64);
            random_hermitian(dim, &mut rng)
        })
        .collect()
}

/// `h(X) = max_ψ ⟨ψ|X|ψ⟩` over the given states (the support function of their hull).
pub fn support_function(states: &[PureState], x: &HermitianOperator) -> f64 {
    states
        .iter()
        .map(|s| x.expectation(s.amplitudes()))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `max_k |h_a(X_k) − h_b(X_k)|`.
pub fn hull_disagreement(a: &[PureState], b: &[PureState], directions: &[HermitianOperator]) -> f64 {
    directions
        .iter()
        .map(|x| (support_function(a, x) - support_function(b, x)).abs())
        .fold(0.0, f64::max)
}

fn push_unique(states: &mut Vec<ComplexVector>, v: ComplexVector) {
    if states.len() >= SAMPLE_CAP {
        return;
    }
    if !states.iter().any(|s| s.dotc(&v).norm_sqr() > CLUSTER_OVERLAP) {
        states.push(v);
    }
}

/// Candidates from multi-start optima and tilted probes of the objective `a`.
fn candidates(
    channel: &Channel,
    a: Option<ComplexMatrix>,
    seeds: &[ComplexVector],
    directions: &[HermitianOperator],
    cfg: &OptimizerConfig,
    task: &str,
) -> Vec<ComplexVector> {
    let d = channel.dim_in();
    let base = log_base();
    let obj = Objective::new(channel, a.clone(), base);
    let starts = build_starts(d, seeds, cfg.restarts, cfg, task);
    let mut out: Vec<ComplexVector> = multi_start(&obj, &starts, cfg).into_iter().map(|r| r.state).collect();

    let probe_cfg = OptimizerConfig {
        max_iters: cfg.max_iters.min(PROBE_ITERS),
        ..cfg.clone()
    };
    let probed: Vec<ComplexVector> = {
        use rayon::prelude::*;
        directions
            .par_iter()
            .enumerate()
            .map(|(k, x)| {
                let tilt = x.matrix() * C64::new(PROBE_TILT, 0.0);
                let tilted = match &a {
                    Some(m) => m + tilt,
                    None => tilt,
                };
                let tilted_obj = Objective::new(channel, Some(tilted.clone()), base);
                let mut probe_starts = vec![x.eig().vector(0)];
                probe_starts.extend(seeds.iter().take(4).cloned());
                let probe_starts = build_starts(d, &probe_starts, 4, cfg, &format!("{task}-probe-{k}"));
                let best = multi_start(&tilted_obj, &probe_starts, &probe_cfg)
                    .into_iter()
                    .fold(None::<(ComplexVector, f64)>, |acc, r| match acc {
                        Some((_, v)) if v >= r.value => acc,
                        _ => Some((r.state, r.value)),
                    })
                    .map(|(s, _)| s)
                    .expect("probe starts");
                ascend(&obj, &best, cfg).state
            })
            .collect()
    };
    out.extend(probed);
    out
}

struct Certified {
    vector: ComplexVector,
    residual: f64,
    /// `|objective − level|`.
    gap: f64,
}

fn finish_sample(kind: SetKind, level: f64, dim: usize, mut certified: Vec<Certified>) -> Result<OptimalSetSample> {
    certified.sort_by(|a, b| a.gap.total_cmp(&b.gap).then(a.residual.total_cmp(&b.residual)));
    let mut vectors: Vec<ComplexVector> = Vec::new();
    let mut residuals = Vec::new();
    for Certified { vector: v, residual: r, .. } in certified {
        let before = vectors.len();
        push_unique(&mut vectors, v);
        if vectors.len() > before {
            residuals.push(r);
        }
    }
    if vectors.is_empty() {
        return Err(Error::InvalidInput(format!("no {kind:?}-optimal state certified")));
    }
    let support_projector = Projector::onto_span(dim, &vectors, SUPPORT_THRESHOLD)?;
    let states = vectors
        .into_iter()
        .map(|v| PureState::normalized(v).expect("unit vector"))
        .collect();
    Ok(OptimalSetSample {
        kind,
        states,
        residuals,
        support_projector,
        level,
    })
}

/// Samples the extreme points of `A_E`, using an existing minimal-entropy run.
pub fn sample_optimal_set_e_with(channel: &Channel, minent: &MinEntropyReport, cfg: &OptimizerConfig) -> Result<OptimalSetSample> {
    let directions = probe_directions(channel.dim_in(), PROBE_DIRECTIONS, cfg.seed);
    sample_optimal_set_e_along(channel, minent, &directions, cfg)
}

/// As [`sample_optimal_set_e_with`], probing along the given directions.
pub fn sample_optimal_set_e_along(
    channel: &Channel,
    minent: &MinEntropyReport,
    directions: &[HermitianOperator],
    cfg: &OptimizerConfig,
) -> Result<OptimalSetSample> {
    let seeds: Vec<ComplexVector> = minent.minimizers.iter().map(|s| s.amplitudes().clone()).collect();
    let h_min = minent.value;
    let mut all = seeds.clone();
    all.extend(candidates(channel, None, &seeds, directions, cfg, "optset-e"));
    let obj = Objective::new(channel, None, log_base());
    let certified: Vec<Certified> = all
        .into_iter()
        .filter_map(|v| {
            let s = PureState::normalized(v.clone()).ok()?;
            let gap = (obj.output_entropy(s.amplitudes()) - h_min).abs();
            let residual = eigenvector_residual_e(channel, &s, h_min);
            (gap <= CERTIFICATION_TOL && residual <= CERTIFICATION_TOL).then_some(Certified { vector: v, residual, gap })
        })
        .collect();
    finish_sample(SetKind::E, h_min, channel.dim_in(), certified)
}

pub fn sample_optimal_set_e(channel: &Channel, cfg: &OptimizerConfig) -> Result<OptimalSetSample> {
    let minent = min_output_entropy(channel, cfg)?;
    sample_optimal_set_e_with(channel, &minent, cfg)
}

/// Samples the extreme points of `A_C`: pure states whose output distance to
/// `Ω` reaches `C̄`, certified by the eigenvector condition.
pub fn sample_optimal_set_c(channel: &Channel, report: &CapacityReport, cfg: &OptimizerConfig) -> Result<OptimalSetSample> {
    let directions = probe_directions(channel.dim_in(), PROBE_DIRECTIONS, cfg.seed);
    sample_optimal_set_c_along(channel, report, &directions, cfg)
}

/// As [`sample_optimal_set_c`], probing along the given directions.
pub fn sample_optimal_set_c_along(
    channel: &Channel,
    report: &CapacityReport,
    directions: &[HermitianOperator],
    cfg: &OptimizerConfig,
) -> Result<OptimalSetSample> {
    let residual = report.max_distance_residual.finite().unwrap_or(f64::INFINITY);
    if !report.converged || residual > CAPACITY_TOL {
        return Err(Error::NotConverged(residual));
    }
    let base = log_base();
    let a = distance_operator(channel, &report.omega, base);
    let seeds: Vec<ComplexVector> = report.ensemble.members().iter().map(|(_, s)| s.amplitudes().clone()).collect();
    let mut all = seeds.clone();
    all.extend(candidates(channel, Some(a), &seeds, directions, cfg, "optset-c"));
    let c = report.value;
    let certified: Vec<Certified> = all
        .into_iter()
        .filter_map(|v| {
            let s = PureState::normalized(v.clone()).ok()?;
            let out = channel.apply_pure(&s).ok()?;
            let dist = relative_entropy_unchecked(out.matrix(), report.omega.matrix(), base).finite()?;
            let gap = (dist - c).abs();
            let residual = eigenvector_residual_c(channel, &s, &report.omega, c);
            (gap <= CERTIFICATION_TOL && residual <= CERTIFICATION_TOL).then_some(Certified { vector: v, residual, gap })
        })
        .collect();
    finish_sample(SetKind::C, c, channel.dim_in(), certified)
}

/// Membership defect `C̄ − χ_Φ(ρ) − H(Φ(ρ)‖Ω)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `+∞` when `supp Φ(ρ) ⊄ supp Ω`.
    pub defect: ExtendedReal,
}

/// `ρ ∈ A_C` up to [`MEMBERSHIP_TOL`]. A channel with `C̄ = 0` has every state
/// in `A_C`.
pub fn membership_c(channel: &Channel, rho: &DensityMatrix, report: &CapacityReport, cfg: &OptimizerConfig) -> Result<Membership> {
    if report.value <= 1e-12 {
        return Ok(Membership {
            member: true,
            defect: ExtendedReal::Finite(0.0),
        });
    }
    let out = channel.apply(rho)?;
    match relative_entropy_unchecked(out.matrix(), report.omega.matrix(), log_base()) {
        ExtendedReal::Infinite => Ok(Membership {
            member: false,
            defect: ExtendedReal::Infinite,
        }),
        ExtendedReal::Finite(dist) => {
            let defect = report.value - chi(channel, rho, cfg)?.value - dist;
            Ok(Membership {
                member: defect <= MEMBERSHIP_TOL,
                defect: ExtendedReal::Finite(defect),
            })
        }
    }
}

/// `ρ ∈ A_E` up to [`MEMBERSHIP_TOL`], via the defect `Ĥ_Φ(ρ) − H_min`.
pub fn membership_e(channel: &Channel, rho: &DensityMatrix, h_min: f64, cfg: &OptimizerConfig) -> Result<Membership> {
    let defect = convex_closure_entropy(channel, rho, cfg)?.value - h_min;
    Ok(Membership {
        member: defect <= MEMBERSHIP_TOL,
        defect: ExtendedReal::Finite(defect),
    })
}

/// Projector onto the span of every state in the samples.
pub fn minimal_support_projector(samples: &[&OptimalSetSample]) -> Result<Projector> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidInput("no samples given".into()))?;
    let dim = first.dim();
    let mut vectors = Vec::new();
    for s in samples {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        vectors.extend(s.states.iter().map(|p| p.amplitudes().clone()));
    }
    Projector::onto_span(dim, &vectors, SUPPORT_THRESHOLD)
}

/// Outcome of the coincidence test `A_E = A_C`.
#[derive(Clone, Debug)]
pub struct CoincidenceReport {
    pub coincide: bool,
    pub lambda: f64,
    /// `‖Φ*(−log Ω)P − λP‖_max` for the reported `λ`.
    pub condition_residual: f64,
    /// `C̄ + H_min`.
    pub lambda_expected: f64,
    /// `‖Φ*(−log Ω) − λ_expected·I‖_max`.
    pub unital_condition_residual: f64,
    pub support_rank: usize,
    /// Largest support-function gap between the two samples over the probe directions.
    pub hull_disagreement: f64,
    /// Bistochastic channels only: `‖Ω − I/d′‖_max`.
    pub chaotic_omega_residual: Option<f64>,
}

impl CoincidenceReport {
    pub fn hulls_agree(&self) -> bool {
        self.hull_disagreement <= HULL_TOL
    }

    pub fn to_json(&self) -> Value {
        json!({
            "chaotic_omega_residual": self.chaotic_omega_residual.map(number_json),
            "coincide": self.coincide,
            "condition_residual": number_json(self.condition_residual),
            "hull_disagreement": number_json(self.hull_disagreement),
            "hulls_agree": self.hulls_agree(),
            "lambda": number_json(self.lambda),
            "lambda_expected": number_json(self.lambda_expected),
            "support_rank": self.support_rank,
            "unital_condition_residual": number_json(self.unital_condition_residual),
        })
    }
}

/// Tests `Φ*(−log Ω)P = λP` on the minimal support `P` of both samples.
pub fn coincidence_test(
    channel: &Channel,
    capacity: &CapacityReport,
    minent: &MinEntropyReport,
    sample_e: &OptimalSetSample,
    sample_c: &OptimalSetSample,
    cfg: &OptimizerConfig,
) -> Result<CoincidenceReport> {
    if sample_e.kind != SetKind::E || sample_c.kind != SetKind::C {
        return Err(Error::InvalidInput("coincidence test needs one E sample and one C sample".into()));
    }
    let p = minimal_support_projector(&[sample_e, sample_c])?;
    let a = distance_operator(channel, &capacity.omega, log_base());
    let pm = p.matrix();
    let ap = &a * pm;
    let lambda_expected = capacity.value + minent.value;
    let residual_at = |l: f64| max_abs(&(&ap - pm * C64::new(l, 0.0)));
    let lambda_mean = HermitianOperator::from_hermitian_part(&a).trace_product(pm) / p.rank().max(1) as f64;
    let (lambda, condition_residual) = {
        let at_expected = residual_at(lambda_expected);
        let at_mean = residual_at(lambda_mean);
        if at_expected <= at_mean {
            (lambda_expected, at_expected)
        } else {
            (lambda_mean, at_mean)
        }
    };
    let d = channel.dim_in();
    let unital_condition_residual = max_abs(&(&a - ComplexMatrix::identity(d, d) * C64::new(lambda_expected, 0.0)));
    let coincide = condition_residual <= CERTIFICATION_TOL && (lambda - lambda_expected).abs() <= MEMBERSHIP_TOL;
    let directions = probe_directions(d, PROBE_DIRECTIONS, cfg.seed);
    let hull = hull_disagreement(&sample_e.states, &sample_c.states, &directions);
    let chaotic_omega_residual = channel.is_bistochastic().then(|| {
        max_abs(&(capacity.omega.matrix() - DensityMatrix::maximally_mixed(channel.dim_out()).matrix()))
    });
    Ok(CoincidenceReport {
        coincide,
        lambda,
        condition_residual,
        lambda_expected,
        unital_condition_residual,
        support_rank: p.rank(),
        hull_disagreement: hull,
        chaotic_omega_residual,
    })
}

pub fn membership_json(m: &Membership) -> Value {
    json!({ "defect": extended_json(m.defect), "member": m.member })
}
