//! Convex closure `Ĥ_Φ(ρ)`: minimal mean output entropy over pure-state
//! decompositions of a fixed average.
//!
//! Decompositions of `ρ = Σ_j λ_j e_j e_j†` (rank `r`) into `m ≥ r` vectors are
//! exactly `v_i = F u_i` with `F = [√λ_1 e_1, …, √λ_r e_r]` and `u_i` the rows
//! of an `m × r` matrix `U` with orthonormal columns. Minimizing over `U` on
//! this complex Stiefel manifold keeps the average fixed exactly.

use rayon::prelude::*;

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::qcore::{
    eigh, entropy_of_spectrum_in, log_base, max_abs, orthonormalize_columns, ComplexMatrix, ComplexVector,
    DensityMatrix, LogBase, PureState, C64, EPS_SUPPORT,
};
use crate::random::{random_isometry, rng_indexed};

use super::ensemble::Ensemble;
use super::sphere::canonical_phase;
use super::OptimizerConfig;

const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const STALL_LIMIT: usize = 15;
const MIN_MEMBER_WEIGHT: f64 = 1e-14;

/// Optimal fixed-average decomposition.
#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub value: f64,
    pub ensemble: Ensemble,
    /// `‖Σ π_i ψ_iψ_i† − ρ‖_max`.
    pub average_residual: f64,
    /// Riemannian gradient norm at the returned decomposition.
    pub gradient_norm: f64,
}

struct Frame {
    f: ComplexMatrix,
    f_adj: ComplexMatrix,
    inv_sqrt: Vec<f64>,
    basis: ComplexMatrix,
}

impl Frame {
    fn new(rho: &DensityMatrix) -> Self {
        let e = eigh(rho.matrix());
        let r = e.values.iter().filter(|&&l| l > EPS_SUPPORT).count().max(1);
        let d = rho.dim();
        let mut f = ComplexMatrix::zeros(d, r);
        let mut inv_sqrt = Vec::with_capacity(r);
        for j in 0..r {
            let l = e.values[j].max(EPS_SUPPORT);
            f.set_column(j, &(e.vectors.column(j) * C64::new(l.sqrt(), 0.0)));
            inv_sqrt.push(1.0 / l.sqrt());
        }
        let basis = e.vectors.columns(0, r).clone_owned();
        Self {
            f_adj: f.adjoint(),
            f,
            inv_sqrt,
            basis,
        }
    }

    fn rank(&self) -> usize {
        self.f.ncols()
    }

    /// Coordinates `u` with `F u = w` for `w` in the support.
    fn coordinates(&self, w: &ComplexVector) -> ComplexVector {
        let c = self.basis.adjoint() * w;
        ComplexVector::from_iterator(c.len(), c.iter().zip(&self.inv_sqrt).map(|(z, s)| z * s))
    }
}

struct StiefelObjective<'a> {
    channel: &'a Channel,
    frame: &'a Frame,
    base: LogBase,
}

impl StiefelObjective<'_> {
    fn member(&self, u: &ComplexMatrix, i: usize) -> ComplexVector {
        &self.frame.f * u.row(i).transpose()
    }

    fn value(&self, u: &ComplexMatrix) -> f64 {
        let mut total = 0.0;
        for i in 0..u.nrows() {
            let v = self.member(u, i);
            let t = v.norm_squared();
            if t <= 1e-300 {
                continue;
            }
            let out = self.channel.apply_vector(&v);
            let values: Vec<f64> = if out.nrows() == 1 {
                vec![out[(0, 0)].re / t]
            } else {
                out.symmetric_eigenvalues().iter().map(|l| l / t).collect()
            };
            total += t * entropy_of_spectrum_in(&values, self.base);
        }
        total
    }

    /// Value and Euclidean gradient `Z` (`dJ = Re Σ conj(dU_ij) Z_ij`).
    fn value_and_gradient(&self, u: &ComplexMatrix) -> (f64, ComplexMatrix) {
        let mut total = 0.0;
        let mut z = ComplexMatrix::zeros(u.nrows(), u.ncols());
        let base = self.base;
        for i in 0..u.nrows() {
            let v = self.member(u, i);
            let t = v.norm_squared();
            if t <= 1e-300 {
                continue;
            }
            let out = self.channel.apply_vector(&v);
            let e = eigh(&out);
            let values: Vec<f64> = e.values.iter().map(|l| l / t).collect();
            total += t * entropy_of_spectrum_in(&values, base);
            let neg_log = e.reconstruct_with(|l| {
                let x = l / t;
                if x > EPS_SUPPORT {
                    -base.log(x)
                } else {
                    0.0
                }
            });
            let g = self.channel.dual_matrix(&neg_log);
            let zi = (&self.frame.f_adj * (g * &v)) * C64::new(2.0, 0.0);
            z.set_row(i, &zi.transpose());
        }
        (total, z)
    }
}

fn riemannian_gradient(u: &ComplexMatrix, z: &ComplexMatrix) -> ComplexMatrix {
    let uz = u.adjoint() * z;
    let sym = (&uz + uz.adjoint()) * C64::new(0.5, 0.0);
    z - u * sym
}

fn retract(u: &ComplexMatrix) -> Option<ComplexMatrix> {
    orthonormalize_columns(u).ok()
}

fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

struct StiefelRun {
    u: ComplexMatrix,
    value: f64,
    gradient_norm: f64,
}

fn descend(obj: &StiefelObjective<'_>, start: ComplexMatrix, cfg: &OptimizerConfig) -> StiefelRun {
    let mut u = start;
    let (mut value, z) = obj.value_and_gradient(&u);
    let mut rg = riemannian_gradient(&u, &z);
    let mut gnorm = rg.norm();
    let mut prev: Option<(ComplexMatrix, ComplexMatrix)> = None;
    let mut step = 0.1;
    let mut stall = 0;
    for _ in 0..cfg.max_iters {
        if gnorm <= cfg.grad_tol {
            break;
        }
        if let Some((pu, pg)) = &prev {
            let s = &u - pu;
            let y = &rg - pg;
            let sy = inner(&s, &y).abs();
            if sy > 1e-300 {
                step = (s.norm_squared() / sy).clamp(1e-8, 1e3);
            }
        }
        let mut t = step;
        let mut accepted: Option<(ComplexMatrix, f64)> = None;
        for _ in 0..MAX_BACKTRACKS {
            if let Some(cand) = retract(&(&u - &rg * C64::new(t, 0.0))) {
                let fc = obj.value(&cand);
                if fc <= value - ARMIJO_C * t * gnorm * gnorm {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            break;
        };
        step = t;
        if value - fnext <= cfg.obj_tol * 1e-3 {
            stall += 1;
        } else {
            stall = 0;
        }
        prev = Some((u, rg));
        u = next;
        let (v, z) = obj.value_and_gradient(&u);
        value = v;
        rg = riemannian_gradient(&u, &z);
        gnorm = rg.norm();
        if stall >= STALL_LIMIT {
            break;
        }
    }
    StiefelRun {
        u,
        value,
        gradient_norm: gnorm,
    }
}

fn seed_matrix(frame: &Frame, seed: &Ensemble, m: usize) -> Option<ComplexMatrix> {
    if seed.len() > m || seed.dim() != frame.f.nrows() {
        return None;
    }
    let mut u = ComplexMatrix::zeros(m, frame.rank());
    for (i, (p, s)) in seed.members().iter().enumerate() {
        let w = s.amplitudes() * C64::new(p.sqrt(), 0.0);
        u.set_row(i, &frame.coordinates(&w).transpose());
    }
    retract(&u)
}

/// `Ĥ_Φ(ρ)` with the optimal decomposition.
pub fn convex_closure_entropy(channel: &Channel, rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<ClosureResult> {
    closure_with_seeds(channel, rho, &[], cfg)
}

/// As [`convex_closure_entropy`], additionally starting from the given
/// decompositions (which should average to approximately `rho`).
pub fn closure_with_seeds(
    channel: &Channel,
    rho: &DensityMatrix,
    seeds: &[Ensemble],
    cfg: &OptimizerConfig,
) -> Result<ClosureResult> {
    if rho.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim_in(),
            got: rho.dim(),
        });
    }
    let base = log_base();
    let frame = Frame::new(rho);
    let r = frame.rank();
    let d = rho.dim();
    if r == 1 {
        let state = PureState::normalized(frame.basis.column(0).clone_owned())?;
        let ensemble = Ensemble::singleton(PureState::normalized(canonical_phase(state.amplitudes()))?);
        let value = super::ensemble::mean_output_entropy_in(&ensemble, channel, base);
        let average_residual = max_abs(&(ensemble.average_matrix() - rho.matrix()));
        return Ok(ClosureResult {
            value,
            ensemble,
            average_residual,
            gradient_norm: 0.0,
        });
    }
    let m = cfg.ensemble_cap_for(d).max(r);
    let obj = StiefelObjective {
        channel,
        frame: &frame,
        base,
    };

    let mut starts = Vec::new();
    let mut spectral = ComplexMatrix::zeros(m, r);
    for j in 0..r {
        spectral[(j, j)] = C64::new(1.0, 0.0);
    }
    starts.push(spectral);
    starts.extend(seeds.iter().filter_map(|s| seed_matrix(&frame, s, m)));
    for i in 0..cfg.ensemble_restarts {
        let mut rng = rng_indexed(cfg.seed, "closure-start", i as u64);
        starts.push(random_isometry(m, r, &mut rng));
    }

    let runs: Vec<StiefelRun> = starts.into_par_iter().map(|s| descend(&obj, s, cfg)).collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.value < runs[best].value {
            best = i;
        }
    }
    let run = &runs[best];
    let mut members = Vec::with_capacity(m);
    for i in 0..m {
        let v = obj.member(&run.u, i);
        let t = v.norm_squared();
        if t > MIN_MEMBER_WEIGHT {
            members.push((t, PureState::normalized(canonical_phase(&v))?));
        }
    }
    let ensemble = Ensemble::from_weights(members, 0.0);
    let value = super::ensemble::mean_output_entropy_in(&ensemble, channel, base);
    let average_residual = max_abs(&(ensemble.average_matrix() - rho.matrix()));
    Ok(ClosureResult {
        value,
        ensemble,
        average_residual,
        gradient_norm: run.gradient_norm,
    })
}

/// `χ_Φ(ρ) = H(Φ(ρ)) − Ĥ_Φ(ρ)` and the optimal decomposition.
#[derive(Clone, Debug)]
pub struct ChiResult {
    pub value: f64,
    pub output_entropy: f64,
    pub closure: ClosureResult,
}

pub fn chi(channel: &Channel, rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<ChiResult> {
    chi_with_seeds(channel, rho, &[], cfg)
}

pub fn chi_with_seeds(
    channel: &Channel,
    rho: &DensityMatrix,
    seeds: &[Ensemble],
    cfg: &OptimizerConfig,
) -> Result<ChiResult> {
    let closure = closure_with_seeds(channel, rho, seeds, cfg)?;
    let out = channel.apply(rho)?;
    let output_entropy = entropy_of_spectrum_in(&out.spectrum(), log_base());
    Ok(ChiResult {
        value: (output_entropy - closure.value).max(0.0),
        output_entropy,
        closure,
    })
}
