//! Seeded random states, channels and distributions.
//!
//! Everything is generated from an explicit RNG so that runs are
//! reproducible: the same master seed always yields the same objects,
//! independent of platform.

use num_complex::Complex64;
use rand::SeedableRng;
use rand::{Rng, RngExt};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{ChannelSemantics, CqChannel, IndexedChannelFamily};
use crate::linalg::{ComplexMatrix, DensityOperator, ProbabilityDistribution};

/// The crate-wide deterministic RNG.
pub type SeededRng = ChaCha12Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Derives an independent stream from a master seed and a stream index.
/// Used so that parallel or repeated sub-tasks get decorrelated, stable
/// randomness.
pub fn derived_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

/// Gaussian matrix hermitized: H = (A + A^dagger) / 2, scaled.
pub fn random_hermitian(dim: usize, scale: f64, rng: &mut impl Rng) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(dim, dim, |_, _| random_complex(rng) * scale);
    a.hermitized()
}

/// Hilbert-Schmidt random density operator: G G^dagger normalized.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    let m = g.matmul(&g.dagger());
    let tr = m.trace().re;
    DensityOperator::new(m.scale(1.0 / tr)).expect("normalized Gram matrix is a state")
}

/// Haar-ish random pure state (Gaussian vector, normalized).
pub fn random_pure(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    let v: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
    DensityOperator::pure(&v).expect("Gaussian vector is nonzero")
}

/// Random unitary via Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
        for u in &cols {
            let inner: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= inner * ui;
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in &mut v {
                *vi /= norm;
            }
            cols.push(v);
        }
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Uniform (flat Dirichlet) random probability vector.
pub fn random_distribution(n: usize, rng: &mut impl Rng) -> ProbabilityDistribution {
    let raw: Vec<f64> = (0..n)
        .map(|_| -rng.random::<f64>().max(1e-12).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    ProbabilityDistribution::new(raw.into_iter().map(|x| x / total).collect())
        .expect("normalized exponentials form a distribution")
}

/// Random cq-channel with `alphabet` Hilbert-Schmidt random outputs.
pub fn random_cq_channel(alphabet: usize, dim: usize, rng: &mut impl Rng) -> CqChannel {
    let outputs = (0..alphabet).map(|_| random_density(dim, rng)).collect();
    CqChannel::new(outputs).expect("outputs share the dimension")
}

/// Random classical-diagonal cq-channel: outputs diag(row) for random
/// stochastic rows.
pub fn random_classical_channel(alphabet: usize, dim: usize, rng: &mut impl Rng) -> CqChannel {
    let outputs = (0..alphabet)
        .map(|_| {
            let p = random_distribution(dim, rng);
            DensityOperator::classical(p.weights()).expect("stochastic row is a state")
        })
        .collect();
    CqChannel::new(outputs).expect("outputs share the dimension")
}

/// Random family of classical-diagonal channels.
pub fn random_classical_family(
    members: usize,
    alphabet: usize,
    dim: usize,
    semantics: ChannelSemantics,
    rng: &mut impl Rng,
) -> IndexedChannelFamily {
    let list = (0..members)
        .map(|_| random_classical_channel(alphabet, dim, rng))
        .collect();
    IndexedChannelFamily::new(semantics, list).expect("members share shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, Tolerances};

    #[test]
    fn random_density_is_valid_state() {
        let mut rng = rng_from_seed(7);
        for dim in [2, 3, 5] {
            let rho = random_density(dim, &mut rng);
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            let eigs = hermitian_eigenvalues(rho.matrix(), &Tolerances::default()).unwrap();
            assert!(eigs.last().unwrap() > &-1e-12);
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = rng_from_seed(11);
        let u = random_unitary(4, &mut rng);
        let gram = u.dagger().matmul(&u);
        assert!(gram.max_entry_diff(&ComplexMatrix::identity(4)) < 1e-10);
    }

    #[test]
    fn seeded_rng_is_reproducible() {
        let a = random_density(3, &mut rng_from_seed(42));
        let b = random_density(3, &mut rng_from_seed(42));
        assert_eq!(a.matrix().entries(), b.matrix().entries());
    }
}
