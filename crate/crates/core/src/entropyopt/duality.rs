//! Dual evaluation `Ĥ_Φ(ρ) = max_A (Tr Aρ − H*_Φ(A))`.

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::qcore::{log_base, ComplexMatrix, ComplexVector, DensityMatrix, HermitianOperator, C64};

use super::minent::{conjugate_from_runs, conjugate_runs};
use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::OptimizerConfig;

const INNER_RESTARTS: usize = 2;

/// Best dual value and the operator attaining it.
#[derive(Clone, Debug)]
pub struct DualResult {
    pub value: f64,
    pub operator: HermitianOperator,
}

/// Traceless Hermitian matrix from `d² − 1` real coordinates.
fn traceless(d: usize, x: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d - 1 {
        m[(i, i)] += C64::new(x[k], 0.0);
        m[(d - 1, d - 1)] -= C64::new(x[k], 0.0);
        k += 1;
    }
    for i in 0..d {
        for j in i + 1..d {
            let z = C64::new(x[k], x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Lower bound on `Ĥ_Φ(ρ)` by derivative-free ascent over Hermitian `A`,
/// starting at `A₀ = Φ*(−log Φ(ρ))`. Adding multiples of the identity leaves
/// the dual objective unchanged, so only traceless shifts are searched.
pub fn closure_via_duality(channel: &Channel, rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<DualResult> {
    cfg.validate()?;
    let d = channel.dim_in();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho.dim(),
        });
    }
    let base = log_base();
    if d == 1 {
        let out = channel.apply(rho)?;
        return Ok(DualResult {
            value: crate::qcore::entropy_of_spectrum_in(&out.spectrum(), base),
            operator: HermitianOperator::zeros(1),
        });
    }
    let mixed = crate::qcore::eigh(rho.matrix());
    // Start from the tangent operator of ρ ↦ H(Φ(ρ)), built spectrally.
    let mut a0 = ComplexMatrix::zeros(d, d);
    {
        let out = channel.apply(rho)?;
        let e = crate::qcore::eigh(out.matrix());
        let neg_log = e.reconstruct_with(|l| if l > crate::qcore::EPS_SUPPORT { -base.log(l) } else { 0.0 });
        a0 += channel.dual_matrix(&neg_log);
    }
    let inner_cfg = OptimizerConfig {
        restarts: INNER_RESTARTS.min(cfg.restarts),
        ..cfg.clone()
    };
    let mut warm: Vec<ComplexVector> = (0..d).map(|i| mixed.vector(i)).collect();
    let mut dual = |x: &[f64]| -> f64 {
        let a = &a0 + traceless(d, x);
        let runs = conjugate_runs(channel, &a, &warm, inner_cfg.restarts, &inner_cfg, "duality-inner");
        let conj = conjugate_from_runs(&runs);
        warm[0] = conj.maximizer.amplitudes().clone();
        let linear = HermitianOperator::from_hermitian_part(&a).trace_product(rho.matrix());
        -(linear - conj.value)
    };
    let scale = crate::qcore::max_abs(&a0).max(1.0);
    let opts = NelderMeadOptions {
        initial_step: 0.25 * scale,
        max_evals: 100 * (d * d),
        f_tol: 1e-10,
        x_tol: 1e-6,
        restarts: 2,
    };
    let (x, neg) = nelder_mead(&mut dual, &vec![0.0; d * d - 1], &opts);
    Ok(DualResult {
        value: -neg,
        operator: HermitianOperator::from_hermitian_part(&(&a0 + traceless(d, &x))),
    })
}
