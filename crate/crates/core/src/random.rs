//! Seeded randomness: sub-seed derivation and random states/operators.
//!
//! Every random stream is a `ChaCha8Rng` keyed by a hash of
//! `(seed, task name, index)`, so results never depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qcore::{
    orthonormalize_columns, ComplexMatrix, ComplexVector, DensityMatrix, HermitianOperator, PureState, C64,
};

pub type SeededRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable sub-seed for `(seed, task, index)`.
pub fn derive_seed(seed: u64, task: &str, index: u64) -> u64 {
    // FNV-1a over the task name, then mixed with the seed and index.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in task.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(seed ^ h).wrapping_add(splitmix64(index)))
}

pub fn rng_for(seed: u64, task: &str) -> SeededRng {
    SeededRng::seed_from_u64(derive_seed(seed, task, 0))
}

pub fn rng_indexed(seed: u64, task: &str, index: u64) -> SeededRng {
    SeededRng::seed_from_u64(derive_seed(seed, task, index))
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    // Fill row-major so the stream layout does not depend on storage order.
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-distributed unit vector.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v = ComplexVector::from_iterator(dim, (0..dim).map(|_| complex_gaussian(rng)));
        if let Ok(p) = PureState::normalized(v) {
            return p;
        }
    }
}

/// Full-rank Ginibre state `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    let w = &g * g.adjoint();
    let t = w.trace().re;
    DensityMatrix::from_computed(&(w / C64::new(t, 0.0)))
}

/// Random Hermitian direction with unit Frobenius norm.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = gaussian_matrix(dim, dim, rng);
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let n = h.norm();
    HermitianOperator::from_hermitian_part(&(h / C64::new(n.max(1e-300), 0.0)))
}

/// Haar isometry (`rows × cols`, `rows ≥ cols`) from the QR factor of a
/// complex Gaussian matrix.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    loop {
        let g = gaussian_matrix(rows, cols, rng);
        if let Ok(q) = orthonormalize_columns(&g) {
            return q;
        }
    }
}

pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(dim, dim, rng)
}
