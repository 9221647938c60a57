//! Maximization of `f_A(ψ) = ⟨ψ|A|ψ⟩ − H(Φ(|ψ⟩⟨ψ|))` over unit vectors.
//!
//! With `G(ψ) = Φ*(−log Φ(|ψ⟩⟨ψ|))` and `B = A − G`, the Riemannian gradient
//! is `2(Bψ − ⟨ψ|B|ψ⟩ψ)`. Each iteration tries two candidates and keeps the
//! better one: the top eigenvector of `B` (a minorize-maximize step, monotone
//! whenever the new output stays inside the current output support) and an
//! Armijo-controlled gradient step with Barzilai-Borwein step length.

use rayon::prelude::*;

use crate::channels::Channel;
use crate::qcore::{
    eigh, entropy_of_spectrum_in, ComplexMatrix, ComplexVector, LogBase, PureState, C64, EPS_SUPPORT,
};

use super::OptimizerConfig;

const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const STALL_LIMIT: usize = 12;

pub(crate) struct Objective<'a> {
    channel: &'a Channel,
    a: Option<ComplexMatrix>,
    base: LogBase,
}

pub(crate) struct Evaluation {
    pub value: f64,
    /// `B = A − Φ*(−log Φ(ψψ†))`.
    pub b: ComplexMatrix,
}

impl<'a> Objective<'a> {
    pub fn new(channel: &'a Channel, a: Option<ComplexMatrix>, base: LogBase) -> Self {
        Self { channel, a, base }
    }

    pub fn output_entropy(&self, psi: &ComplexVector) -> f64 {
        let out = self.channel.apply_vector(psi);
        let values: Vec<f64> = if out.nrows() == 1 {
            vec![out[(0, 0)].re]
        } else {
            out.symmetric_eigenvalues().iter().copied().collect()
        };
        entropy_of_spectrum_in(&values, self.base)
    }

    fn linear(&self, psi: &ComplexVector) -> f64 {
        match &self.a {
            Some(a) => psi.dotc(&(a * psi)).re,
            None => 0.0,
        }
    }

    pub fn value(&self, psi: &ComplexVector) -> f64 {
        self.linear(psi) - self.output_entropy(psi)
    }

    pub fn evaluate(&self, psi: &ComplexVector) -> Evaluation {
        let out = self.channel.apply_vector(psi);
        let e = eigh(&out);
        let entropy = entropy_of_spectrum_in(&e.values, self.base);
        let base = self.base;
        let log = e.reconstruct_with(|l| if l > EPS_SUPPORT { base.log(l) } else { 0.0 });
        // Φ*(log Φ(ψψ†)) = −G
        let mut b = self.channel.dual_matrix(&log);
        if let Some(a) = &self.a {
            b += a;
        }
        Evaluation {
            value: self.linear(psi) - entropy,
            b,
        }
    }
}

/// Outcome of one local ascent.
#[derive(Clone, Debug)]
pub(crate) struct SphereRun {
    pub state: ComplexVector,
    pub value: f64,
    /// `‖Bψ − ⟨ψ|B|ψ⟩ψ‖`, half the Riemannian gradient norm.
    pub residual: f64,
    pub converged: bool,
}

/// Rotates the global phase so the largest-modulus entry is real positive.
pub(crate) fn canonical_phase(v: &ComplexVector) -> ComplexVector {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best_abs + 1e-12 {
            best = i;
            best_abs = z.norm();
        }
    }
    if best_abs <= 0.0 {
        return v.clone();
    }
    let phase = v[best].conj() / best_abs;
    v * phase
}

fn normalize(v: ComplexVector) -> ComplexVector {
    let n = v.norm();
    v.unscale(n)
}

fn tangent_residual(b: &ComplexMatrix, psi: &ComplexVector) -> (ComplexVector, f64) {
    let bpsi = b * psi;
    let mu = psi.dotc(&bpsi);
    let g = bpsi - psi * mu;
    let n = g.norm();
    (g, n)
}

/// Local ascent from `start`.
pub(crate) fn ascend(obj: &Objective<'_>, start: &ComplexVector, cfg: &OptimizerConfig) -> SphereRun {
    let mut psi = normalize(start.clone());
    let mut ev = obj.evaluate(&psi);
    let (mut g, mut gnorm) = tangent_residual(&ev.b, &psi);
    let mut prev: Option<(ComplexVector, ComplexVector)> = None;
    let mut step = 0.5;
    let mut stall = 0;
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        if gnorm <= cfg.grad_tol {
            converged = true;
            break;
        }
        let f0 = ev.value;

        // Minorize-maximize candidate.
        let eb = eigh(&ev.b);
        let mut top = eb.vector(0);
        let ov = top.dotc(&psi);
        if ov.norm() > 1e-300 {
            top *= ov.unscale(ov.norm());
        }
        let f_mm = obj.value(&top);

        // Gradient candidate.
        if let Some((ps, pg)) = &prev {
            let s = &psi - ps;
            let y = &g - pg;
            let sy = s.dotc(&y).re.abs();
            if sy > 1e-300 {
                step = (s.norm_squared() / sy).clamp(1e-8, 1e4);
            }
        }
        let mut t = step;
        let mut grad_candidate: Option<(ComplexVector, f64)> = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand = normalize(&psi + &g * C64::new(t, 0.0));
            let fc = obj.value(&cand);
            if fc >= f0 + ARMIJO_C * 2.0 * t * gnorm * gnorm {
                grad_candidate = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }

        let mut best: Option<(ComplexVector, f64)> = None;
        if f_mm > f0 {
            best = Some((top, f_mm));
        }
        if let Some((cand, fc)) = grad_candidate {
            if best.as_ref().is_none_or(|(_, fb)| fc > *fb) {
                best = Some((cand, fc));
                step = t;
            }
        }
        let Some((next, fnext)) = best else {
            // No ascent available at working precision.
            converged = gnorm <= cfg.grad_tol.sqrt();
            break;
        };
        if fnext - f0 <= cfg.obj_tol * 1e-3 {
            stall += 1;
        } else {
            stall = 0;
        }
        prev = Some((psi.clone(), g.clone()));
        psi = next;
        ev = obj.evaluate(&psi);
        let (ng, nn) = tangent_residual(&ev.b, &psi);
        g = ng;
        gnorm = nn;
        debug_assert!(fnext.is_finite());
        if stall >= STALL_LIMIT {
            converged = gnorm <= cfg.grad_tol.sqrt();
            break;
        }
    }
    if gnorm <= cfg.grad_tol {
        converged = true;
    }
    SphereRun {
        state: canonical_phase(&psi),
        value: ev.value,
        residual: gnorm,
        converged,
    }
}

/// Runs `ascend` from every start in parallel; results keep the start order.
pub(crate) fn multi_start(obj: &Objective<'_>, starts: &[ComplexVector], cfg: &OptimizerConfig) -> Vec<SphereRun> {
    starts.par_iter().map(|s| ascend(obj, s, cfg)).collect()
}

/// Starts: structured `seeds` followed by `count` Haar-random vectors drawn
/// from the stream `(cfg.seed, task, i)`.
pub(crate) fn build_starts(
    dim: usize,
    seeds: &[ComplexVector],
    count: usize,
    cfg: &OptimizerConfig,
    task: &str,
) -> Vec<ComplexVector> {
    let mut starts: Vec<ComplexVector> = seeds.to_vec();
    for i in 0..count {
        let mut rng = crate::random::rng_indexed(cfg.seed, task, i as u64);
        starts.push(crate::random::random_pure_state(dim, &mut rng).amplitudes().clone());
    }
    starts
}

pub(crate) fn basis_seeds(dim: usize) -> Vec<ComplexVector> {
    (0..dim).map(|i| PureState::basis(dim, i).amplitudes().clone()).collect()
}

/// Indices of runs whose values are within `tol` of the best, with states
/// deduplicated by overlap `> 1 − 1e-8`; best first.
pub(crate) fn optimal_runs(runs: &[SphereRun], tol: f64) -> Vec<usize> {
    let Some(best) = best_run(runs) else {
        return Vec::new();
    };
    let top = runs[best].value;
    let mut order: Vec<usize> = (0..runs.len()).filter(|&i| runs[i].value >= top - tol).collect();
    order.sort_by(|&i, &j| runs[j].value.total_cmp(&runs[i].value).then(i.cmp(&j)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let dup = kept
            .iter()
            .any(|&k| runs[k].state.dotc(&runs[i].state).norm_sqr() > 1.0 - 1e-8);
        if !dup {
            kept.push(i);
        }
    }
    kept
}

/// First run attaining the maximal value (index order breaks ties).
pub(crate) fn best_run(runs: &[SphereRun]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in runs.iter().enumerate() {
        if best.is_none_or(|b| r.value > runs[b].value) {
            best = Some(i);
        }
    }
    best
}
