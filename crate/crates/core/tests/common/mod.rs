#![allow(dead_code)]

use jetsuita_core::forms::{GramMatrix, BasisKind};
use jetsuita_core::{GainFunction, MarkedPoint, Problem};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `m` points with `|ζ| ≤ radius` and pairwise distance at least `sep`.
pub fn random_points(r: &mut ChaCha8Rng, m: usize, radius: f64, sep: f64) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = Vec::with_capacity(m);
    while pts.len() < m {
        let z = Complex64::from_polar(radius * r.random::<f64>().sqrt(), 2.0 * std::f64::consts::PI * r.random::<f64>());
        if pts.iter().all(|w| (w - z).norm() >= sep) {
            pts.push(z);
        }
    }
    pts
}

pub fn random_coeff(r: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let a = c(2.0 * r.random::<f64>() - 1.0, 2.0 * r.random::<f64>() - 1.0);
        if a.norm() > 0.1 {
            return a;
        }
    }
}

/// 2-4 points on the disc with random `pⱼ ∈ [0.5, 3]`, `kⱼ ∈ {0, 1}` and
/// jets, the canonical `φ`, and `c ≡ 1` or `c = e^{t/2}` by parity of `seed`.
pub fn random_problem(seed: u64) -> Problem {
    let mut r = rng(seed);
    let m = r.random_range(2..=4);
    let pts = random_points(&mut r, m, 0.6, 0.25);
    let marked = pts
        .into_iter()
        .map(|z| {
            let p = 0.5 + 2.5 * r.random::<f64>();
            let k = r.random_range(0..=1);
            MarkedPoint::new(z, p, k, random_coeff(&mut r))
        })
        .collect();
    let mut problem = Problem::single_point();
    problem.name = format!("random_{seed}");
    problem.marked = marked;
    problem.gain = if seed.is_multiple_of(2) {
        GainFunction::constant(1.0).unwrap()
    } else {
        GainFunction::exponential(0.5).unwrap()
    };
    problem.numerics.degree = 24;
    problem
}

/// A random Hermitian positive definite matrix with condition at most `cond`.
pub fn random_gram(r: &mut ChaCha8Rng, n: usize, cond: f64) -> GramMatrix {
    let a = DMatrix::from_fn(n, n, |_, _| c(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
    let q = a.qr().q();
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(cond.powf(-(r.random::<f64>())), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let h = &q * d * q.adjoint();
    GramMatrix {
        entries: (&h + h.adjoint()) * c(0.5, 0.0),
        basis: BasisKind::Monomial,
        t: 0.0,
        description: "random".into(),
        error_estimate: 0.0,
        empty_region: false,
    }
}
