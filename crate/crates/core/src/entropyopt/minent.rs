use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::qcore::{
    eigh, log_base, ComplexMatrix, ComplexVector, DensityMatrix, HermitianOperator, LogBase, PureState, EPS_SUPPORT,
};

use super::sphere::{basis_seeds, best_run, build_starts, multi_start, optimal_runs, Objective, SphereRun};
use super::OptimizerConfig;

/// Result of minimizing `ψ ↦ H(Φ(|ψ⟩⟨ψ|))`.
#[derive(Clone, Debug)]
pub struct MinEntropyReport {
    pub value: f64,
    /// Distinct local minimizers within `obj_tol` of `value`, best first.
    pub minimizers: Vec<PureState>,
    /// `‖Φ*(−log Φ(φφ†))φ − H_min·φ‖` per minimizer.
    pub residuals: Vec<f64>,
    pub restarts: usize,
    pub restarts_converged: usize,
    /// Whether the best restart met the gradient tolerance.
    pub converged: bool,
}

/// `Φ*(−log Φ(|ψ⟩⟨ψ|))`.
pub(crate) fn entropy_gradient_operator(channel: &Channel, psi: &ComplexVector, base: LogBase) -> ComplexMatrix {
    let e = eigh(&channel.apply_vector(psi));
    let neg_log = e.reconstruct_with(|l| if l > EPS_SUPPORT { -base.log(l) } else { 0.0 });
    channel.dual_matrix(&neg_log)
}

/// Eigenvector residual `‖Φ*(−log Φ(φφ†))φ − h·φ‖` of a minimal-entropy candidate.
pub fn eigenvector_residual_e(channel: &Channel, phi: &PureState, h_min: f64) -> f64 {
    let g = entropy_gradient_operator(channel, phi.amplitudes(), log_base());
    let v = phi.amplitudes();
    (g * v - v * crate::qcore::C64::new(h_min, 0.0)).norm()
}

/// Eigenvector residual `‖Φ*(−log Ω + log Φ(φφ†))φ − C·φ‖` of a capacity-optimal candidate.
pub fn eigenvector_residual_c(channel: &Channel, phi: &PureState, omega: &DensityMatrix, capacity: f64) -> f64 {
    let base = log_base();
    let a = super::capacity::distance_operator(channel, omega, base);
    let g = entropy_gradient_operator(channel, phi.amplitudes(), base);
    let v = phi.amplitudes();
    ((a - g) * v - v * crate::qcore::C64::new(capacity, 0.0)).norm()
}

impl MinEntropyReport {
    pub fn to_json(&self) -> serde_json::Value {
        use crate::report::{number_json, vector_json};
        serde_json::json!({
            "converged": self.converged,
            "minimizers": self.minimizers.iter().map(|s| vector_json(s.amplitudes())).collect::<Vec<_>>(),
            "residuals": self.residuals.iter().map(|r| number_json(*r)).collect::<Vec<_>>(),
            "restarts": self.restarts,
            "restarts_converged": self.restarts_converged,
            "value": number_json(self.value),
        })
    }
}

pub(crate) fn min_entropy_report(channel: &Channel, runs: &[SphereRun], cfg: &OptimizerConfig) -> MinEntropyReport {
    let best = best_run(runs).expect("at least one start");
    let log_dout = log_base().log(channel.dim_out() as f64);
    let value = (-runs[best].value).clamp(0.0, log_dout);
    let mut minimizers = Vec::new();
    let mut residuals = Vec::new();
    for i in optimal_runs(runs, cfg.obj_tol) {
        let state = PureState::normalized(runs[i].state.clone()).expect("unit vector");
        residuals.push(eigenvector_residual_e(channel, &state, value));
        minimizers.push(state);
    }
    MinEntropyReport {
        value,
        minimizers,
        residuals,
        restarts: runs.len(),
        restarts_converged: runs.iter().filter(|r| r.converged).count(),
        converged: runs[best].converged,
    }
}

/// Minimal output entropy `H_min(Φ)` by multi-start ascent over the sphere.
pub fn min_output_entropy(channel: &Channel, cfg: &OptimizerConfig) -> Result<MinEntropyReport> {
    min_output_entropy_seeded(channel, &[], cfg, "min-entropy")
}

/// As [`min_output_entropy`] with extra structured starting vectors.
pub fn min_output_entropy_seeded(
    channel: &Channel,
    seeds: &[ComplexVector],
    cfg: &OptimizerConfig,
    task: &str,
) -> Result<MinEntropyReport> {
    cfg.validate()?;
    let d = channel.dim_in();
    let obj = Objective::new(channel, None, log_base());
    let mut all_seeds = basis_seeds(d);
    all_seeds.extend(seeds.iter().filter(|s| s.len() == d).cloned());
    let starts = build_starts(d, &all_seeds, cfg.restarts, cfg, task);
    let runs = multi_start(&obj, &starts, cfg);
    Ok(min_entropy_report(channel, &runs, cfg))
}

/// Maximum of `⟨ψ|A|ψ⟩ − H(Φ(|ψ⟩⟨ψ|))` and a maximizer.
#[derive(Clone, Debug)]
pub struct ConjugateResult {
    pub value: f64,
    pub maximizer: PureState,
    /// Half the Riemannian gradient norm at the maximizer.
    pub residual: f64,
    pub converged: bool,
}

pub(crate) fn conjugate_runs(
    channel: &Channel,
    a: &ComplexMatrix,
    seeds: &[ComplexVector],
    count: usize,
    cfg: &OptimizerConfig,
    task: &str,
) -> Vec<SphereRun> {
    let d = channel.dim_in();
    let obj = Objective::new(channel, Some(a.clone()), log_base());
    let mut all_seeds: Vec<ComplexVector> = seeds.to_vec();
    let e = eigh(a);
    all_seeds.extend((0..d).map(|i| e.vector(i)));
    all_seeds.extend(basis_seeds(d));
    let starts = build_starts(d, &all_seeds, count, cfg, task);
    multi_start(&obj, &starts, cfg)
}

pub(crate) fn conjugate_from_runs(runs: &[SphereRun]) -> ConjugateResult {
    let best = best_run(runs).expect("at least one start");
    ConjugateResult {
        value: runs[best].value,
        maximizer: PureState::normalized(runs[best].state.clone()).expect("unit vector"),
        residual: runs[best].residual,
        converged: runs[best].converged,
    }
}

/// Conjugate function `H*_Φ(A)`.
pub fn conjugate(channel: &Channel, a: &HermitianOperator, cfg: &OptimizerConfig) -> Result<ConjugateResult> {
    cfg.validate()?;
    if a.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim_in(),
            got: a.dim(),
        });
    }
    let runs = conjugate_runs(channel, a.matrix(), &[], cfg.restarts, cfg, "conjugate");
    Ok(conjugate_from_runs(&runs))
}
