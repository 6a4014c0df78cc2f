//! Seeded random streams, uniform points on spheres and Haar rotations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::cone::{Dim, Matrix};

/// Named substreams drawn from one experiment seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Targets,
    MonteCarlo,
    Lattices,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Targets => 1,
            Stream::MonteCarlo => 2,
            Stream::Lattices => 3,
        }
    }
}

/// Independent generator for `(seed, stream, chunk)`.
pub fn substream(seed: u64, stream: Stream, chunk: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream.id() << 32 | chunk);
    rng
}

/// Uniform point on `S^{m-1} ⊂ R^m` from a normalized Gaussian vector.
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform point of the open unit ball in `R^m`, scaled by `radius`.
pub fn uniform_ball<R: Rng + ?Sized>(rng: &mut R, m: usize, radius: f64) -> Vec<f64> {
    let dir = uniform_sphere(rng, m);
    let r = radius * rng.random::<f64>().powf(1.0 / m as f64);
    dir.into_iter().map(|x| x * r).collect()
}

/// Uniform target `alpha ∈ S^n`.
pub fn random_alpha<R: Rng + ?Sized>(rng: &mut R, dim: Dim) -> Vec<f64> {
    uniform_sphere(rng, dim.sphere_ambient())
}

/// Haar-distributed element of `SO(m)`: Gram-Schmidt on a Gaussian matrix
/// (equivalent to QR with a positive diagonal), then a sign flip of the first
/// row if the determinant is negative.
pub fn haar_rotation<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Matrix<f64> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    while rows.len() < m {
        let mut v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for r in &rows {
                let proj: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(r).for_each(|(x, a)| *x -= proj * a);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            rows.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut mat = Matrix::from_rows(rows).expect("square");
    if mat.determinant() < 0.0 {
        for j in 0..m {
            let v = -*mat.get(0, j);
            mat.set(0, j, v);
        }
    }
    mat
}
