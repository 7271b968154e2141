//! The `∞→1` norm `max_{x ∈ {±1}ⁿ} ‖Mx‖₁` and certificates for it.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::DenseMatrix;
use crate::{Error, Result};

/// Default largest dimension for exhaustive enumeration.
pub const ENUMERATION_CAP: usize = 20;

/// Low bits enumerated per chunk; chunking is fixed so the result does not
/// depend on how chunks are scheduled.
const CHUNK_BITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    Exact,
    Lower,
    Upper,
}

impl NormMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NormMethod::Exact => "exact",
            NormMethod::Lower => "lower",
            NormMethod::Upper => "upper",
        }
    }
}

/// A norm value together with the maximizing sign vector when one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct NormResult {
    pub method: NormMethod,
    pub value: f64,
    pub certificate: Option<Vec<i8>>,
}

fn l1_of_product(m: &DenseMatrix, x: &[i8]) -> f64 {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .zip(x)
                .map(|(a, &s)| if s > 0 { *a } else { -*a })
                .sum::<f64>()
                .abs()
        })
        .sum()
}

fn require_square(m: &DenseMatrix) -> Result<usize> {
    if m.rows() != m.cols() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{}x{} matrix is not square",
            m.rows(),
            m.cols()
        )));
    }
    m.check_finite()?;
    Ok(m.rows())
}

/// Enumerates `x` with `x_0 = +1` (the norm is even in `x`), the top
/// `n − 1 − low` free bits fixed by `chunk`, the low bits in Gray-code order.
/// Every running value within `slack` of the best is recomputed exactly.
fn enumerate_chunk(m: &DenseMatrix, chunk: usize, low: usize, slack: f64) -> (f64, Vec<i8>) {
    let n = m.rows();
    let mut x = vec![1i8; n];
    // free coordinates are 1..n; coordinate 1 + b carries bit b
    for b in low..n - 1 {
        if chunk >> (b - low) & 1 == 1 {
            x[1 + b] = -1;
        }
    }
    let mut v = vec![0.0; n];
    let exact_v = |x: &[i8], v: &mut [f64]| {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = m
                .row(i)
                .iter()
                .zip(x)
                .map(|(a, &s)| if s > 0 { *a } else { -*a })
                .sum();
        }
    };
    exact_v(&x, &mut v);
    let mut best = l1_of_product(m, &x);
    let mut best_x = x.clone();
    let steps = 1usize << low;
    for k in 1..steps {
        let b = k.trailing_zeros() as usize;
        let col = 1 + b;
        x[col] = -x[col];
        let twice = if x[col] > 0 { 2.0 } else { -2.0 };
        for (i, vi) in v.iter_mut().enumerate() {
            *vi += twice * m.get(i, col);
        }
        if k % 1024 == 0 {
            exact_v(&x, &mut v);
        }
        let running: f64 = v.iter().map(|a| a.abs()).sum();
        if running > best - slack {
            let value = l1_of_product(m, &x);
            if value > best {
                best = value;
                best_x.copy_from_slice(&x);
            }
        }
    }
    (best, best_x)
}

/// Exact `‖M‖_{∞→1}` by enumerating `2^{n−1}` sign vectors, capped at
/// [`ENUMERATION_CAP`].
pub fn norm_inf_to_one_exact(m: &DenseMatrix) -> Result<NormResult> {
    norm_inf_to_one_exact_with_cap(m, ENUMERATION_CAP)
}

pub fn norm_inf_to_one_exact_with_cap(m: &DenseMatrix, cap: usize) -> Result<NormResult> {
    let n = require_square(m)?;
    if n > cap {
        return Err(Error::AboveEnumerationCap { n, cap });
    }
    if n == 0 {
        return Ok(NormResult {
            method: NormMethod::Exact,
            value: 0.0,
            certificate: Some(Vec::new()),
        });
    }
    let free = n - 1;
    let low = free.min(CHUNK_BITS);
    let chunks = 1usize << (free - low);
    let slack = 1e-9 * norm_inf_to_one_upper(m).value;

    #[cfg(feature = "parallel")]
    let results: Vec<(f64, Vec<i8>)> = {
        use rayon::prelude::*;
        (0..chunks)
            .into_par_iter()
            .map(|c| enumerate_chunk(m, c, low, slack))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(f64, Vec<i8>)> = (0..chunks)
        .map(|c| enumerate_chunk(m, c, low, slack))
        .collect();

    let (value, x) = results
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one chunk");
    Ok(NormResult {
        method: NormMethod::Exact,
        value,
        certificate: Some(x),
    })
}

#[inline]
fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// One sweep of single-coordinate flips of `x` given `mx = Mx`, applying
/// each flip that raises `‖Mx‖₁` by more than `slack`; returns the new value
/// if any flip was applied.
fn improving_flips(mt: &DenseMatrix, x: &mut [f64], mx: &mut [f64], value: f64, slack: f64) -> Option<f64> {
    let mut value = value;
    let mut improved = false;
    for k in 0..x.len() {
        let twice = -2.0 * x[k];
        let column = mt.row(k);
        let candidate: f64 = mx.iter().zip(column).map(|(v, c)| (v + twice * c).abs()).sum();
        if candidate > value + slack {
            x[k] = -x[k];
            for (v, c) in mx.iter_mut().zip(column) {
                *v += twice * c;
            }
            value = candidate;
            improved = true;
        }
    }
    improved.then_some(value)
}

/// Best value of alternating sign ascent over `restarts` random starts drawn
/// in order from one stream of `seed`; a lower bound on the exact norm.
///
/// Each start alternates `y = sign(Mx)`, `x = sign(Mᵀy)` (with `sign(0) = +1`)
/// until the value stops increasing, then sweeps single-coordinate flips of
/// `x` and resumes ascent after any improving sweep.
pub fn norm_inf_to_one_lower(m: &DenseMatrix, restarts: usize, seed: u64) -> Result<NormResult> {
    let n = require_square(m)?;
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let slack = 1e-12 * norm_inf_to_one_upper(m).value;
    let mut rng = crate::rng::stream(seed, crate::rng::tag::NORM);
    // columns of `m` as contiguous rows for the flip pass
    let mt = m.transpose();
    let mut best = f64::NEG_INFINITY;
    let mut best_x: Vec<i8> = vec![1; n];
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut mx = vec![0.0; n];
    let mut mty = vec![0.0; n];
    for _ in 0..restarts {
        for xi in x.iter_mut() {
            *xi = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        }
        m.mul_vec(&x, &mut mx);
        let mut value: f64 = mx.iter().map(|a| a.abs()).sum();
        loop {
            for (yi, a) in y.iter_mut().zip(&mx) {
                *yi = sign(*a);
            }
            m.mul_vec_t(&y, &mut mty);
            for (xi, a) in x.iter_mut().zip(&mty) {
                *xi = sign(*a);
            }
            m.mul_vec(&x, &mut mx);
            let next: f64 = mx.iter().map(|a| a.abs()).sum();
            if next > value + slack {
                value = next;
                continue;
            }
            value = value.max(next);
            match improving_flips(&mt, &mut x, &mut mx, next, slack) {
                Some(v) => value = v,
                None => break,
            }
        }
        let signs: Vec<i8> = x.iter().map(|&s| s as i8).collect();
        let value = l1_of_product(m, &signs);
        if value > best {
            best = value;
            best_x = signs;
        }
    }
    Ok(NormResult {
        method: NormMethod::Lower,
        value: best.max(0.0),
        certificate: Some(best_x),
    })
}

/// `Σ_{ij} |M_ij|`.
pub fn norm_inf_to_one_upper(m: &DenseMatrix) -> NormResult {
    NormResult {
        method: NormMethod::Upper,
        value: m.as_slice().iter().map(|a| a.abs()).sum(),
        certificate: None,
    }
}
