use serde::Serialize;

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::qcore::{entropy_of_spectrum_in, hermitian_part, ComplexMatrix, DensityMatrix, LogBase, PureState, C64};

const PROBABILITY_SUM_TOL: f64 = 1e-10;

/// Finite pure-state ensemble `{π_i, ψ_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    /// Validates positive weights summing to one, a common dimension and the
    /// `dim²` size bound.
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidInput("ensemble has no members".into()))?;
        let dim = first.1.dim();
        let mut total = 0.0;
        for (p, s) in &members {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.dim(),
                });
            }
            if !p.is_finite() || *p <= 0.0 {
                return Err(Error::InvalidInput(format!("ensemble weight {p} is not positive")));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidInput(format!("ensemble weights sum to {total}")));
        }
        if members.len() > dim * dim {
            return Err(Error::InvalidInput(format!(
                "ensemble has {} members, more than dim² = {}",
                members.len(),
                dim * dim
            )));
        }
        Ok(Self { members })
    }

    /// Builds from possibly unnormalized weights, dropping those below
    /// `min_weight` and rescaling the rest. No size bound is applied.
    pub(crate) fn from_weights(members: Vec<(f64, PureState)>, min_weight: f64) -> Self {
        let kept: Vec<(f64, PureState)> = members.into_iter().filter(|(p, _)| *p > min_weight).collect();
        let total: f64 = kept.iter().map(|(p, _)| p).sum();
        Self {
            members: kept.into_iter().map(|(p, s)| (p / total, s)).collect(),
        }
    }

    pub fn singleton(state: PureState) -> Self {
        Self {
            members: vec![(1.0, state)],
        }
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    pub(crate) fn average_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (p, s) in &self.members {
            acc += s.projector_matrix() * C64::new(*p, 0.0);
        }
        hermitian_part(&acc)
    }

    pub fn average(&self) -> DensityMatrix {
        DensityMatrix::from_computed(&self.average_matrix())
    }

    /// `Σ π_i H(Φ(ψ_i))`.
    pub fn mean_output_entropy(&self, channel: &Channel) -> f64 {
        mean_output_entropy_in(self, channel, crate::qcore::log_base())
    }

    /// Holevo quantity `H(Φ(ρ̄)) − Σ π_i H(Φ(ψ_i))`.
    pub fn holevo_quantity(&self, channel: &Channel) -> f64 {
        let base = crate::qcore::log_base();
        let avg = channel.apply_matrix(&self.average_matrix());
        let h_avg = entropy_of_spectrum_in(&crate::qcore::eigh(&avg).values, base);
        h_avg - mean_output_entropy_in(self, channel, base)
    }

    pub fn to_report(&self) -> Vec<EnsembleMember> {
        self.members
            .iter()
            .map(|(p, s)| EnsembleMember {
                probability: *p,
                state: crate::report::vector_json(s.amplitudes()),
            })
            .collect()
    }
}

pub(crate) fn mean_output_entropy_in(ens: &Ensemble, channel: &Channel, base: LogBase) -> f64 {
    ens.members
        .iter()
        .map(|(p, s)| {
            let out = channel.apply_vector(s.amplitudes());
            p * entropy_of_spectrum_in(&crate::qcore::eigh(&out).values, base)
        })
        .sum()
}

/// Serialized ensemble member: weight and amplitudes as `[re, im]` pairs.
#[derive(Clone, Debug, Serialize)]
pub struct EnsembleMember {
    pub probability: f64,
    pub state: Vec<[f64; 2]>,
}
