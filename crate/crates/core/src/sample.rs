//! Seeded random sampling of rotations, points, group elements and flags.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cartan::{CartanVector, FaceType, GroupElement, Point};
use crate::flags::Flag;
use crate::linalg::{determinant, qr, Mat};
use crate::words::{Letter, Word};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal deviate by the Box–Muller transform.
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random::<f64>();
    libm::sqrt(-2.0 * libm::log(u)) * libm::cos(2.0 * core::f64::consts::PI * v)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| normal(rng))
}

/// Haar-distributed element of `SO(n)`.
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<f64> {
    loop {
        let g = gaussian_matrix(n, n, rng);
        if let Some((mut q, _)) = qr(&g) {
            if determinant(&q) < 0.0 {
                for r in 0..n {
                    q[(r, 0)] = -q[(r, 0)];
                }
            }
            return q;
        }
    }
}

/// Random traceless vector with independent normal entries of the given scale.
pub fn random_traceless<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| scale * normal(rng)).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    v
}

pub fn random_cartan<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> CartanVector {
    CartanVector::from_unsorted(random_traceless(n, scale, rng)).expect("finite entries")
}

/// `k exp(diag d) kᵀ` with `k` Haar and `d` normal of the given scale.
pub fn random_point<R: Rng + ?Sized>(n: usize, spread: f64, rng: &mut R) -> Point<f64> {
    let k = random_rotation(n, rng);
    let d = random_traceless(n, spread, rng);
    let diag: Vec<f64> = d.iter().map(|v| libm::exp(*v)).collect();
    Point::from_spd(k.congruence(&Mat::from_diagonal(&diag)))
}

/// `k₁ exp(diag d) k₂`.
pub fn random_group_element<R: Rng + ?Sized>(n: usize, spread: f64, rng: &mut R) -> GroupElement<f64> {
    let k1 = random_rotation(n, rng);
    let k2 = random_rotation(n, rng);
    let d = random_traceless(n, spread, rng);
    let diag: Vec<f64> = d.iter().map(|v| libm::exp(*v)).collect();
    GroupElement::from_mat_unchecked(k1.matmul(&Mat::from_diagonal(&diag)).matmul(&k2))
}

/// Uniformly random reduced word: each letter drawn among those not cancelling its predecessor.
pub fn random_reduced_word<R: Rng + ?Sized>(rank: usize, length: usize, rng: &mut R) -> Word {
    let mut word: Word = Vec::with_capacity(length);
    while word.len() < length {
        let l = Letter::from_index(rng.random_range(0..2 * rank));
        if word.last().is_none_or(|&p| p != l.inv()) {
            word.push(l);
        }
    }
    word
}

pub fn random_flag<R: Rng + ?Sized>(face: &FaceType, rng: &mut R) -> Flag<f64> {
    Flag::standard(face.clone()).transform(&random_rotation(face.n(), rng))
}
