//! Lower bounds on the bounded-Lipschitz distance between path measures.
//!
//! A test function reads the path at a few grid times and the media vector,
//! `v = (θ(t₁), …, θ(t_k), ω)`, forms `s = ⟨c, v⟩`, and applies either
//! `A cos(s + φ)` or `A clamp(s − b, −1, 1)`. Under the sup metric on paths
//! and `ℓ∞` on media, `‖h‖∞ ≤ A` and `‖h‖_Lip ≤ A‖c‖₁`, so
//! `A = 1 / (2(1 + ‖c‖₁))` gives `2(‖h‖∞ + ‖h‖_Lip) ≤ 1`.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;

use super::EmpiricalMeasure;
use crate::math;
use crate::{Error, Result};

struct Feature {
    times: Vec<usize>,
    path_coef: Vec<f64>,
    media_coef: Vec<f64>,
    amplitude: f64,
    shift: f64,
    clipped: bool,
}

impl Feature {
    fn project(&self, m: &EmpiricalMeasure, i: usize) -> f64 {
        let mut s = 0.0;
        for (&k, c) in self.times.iter().zip(&self.path_coef) {
            s += c * m.theta.get(k, i);
        }
        for (w, c) in m.media.get(i).iter().zip(&self.media_coef) {
            s += c * w;
        }
        s
    }

    fn eval(&self, m: &EmpiricalMeasure, i: usize) -> f64 {
        let s = self.project(m, i);
        if self.clipped {
            self.amplitude * (s - self.shift).clamp(-1.0, 1.0)
        } else {
            self.amplitude * math::cos(s + self.shift)
        }
    }

    fn mean(&self, m: &EmpiricalMeasure) -> f64 {
        let n = m.theta.n();
        (0..n).map(|i| self.eval(m, i)).sum::<f64>() / n as f64
    }
}

fn random_feature(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    rng: &mut impl Rng,
    clipped: bool,
) -> Feature {
    let steps = a.theta.steps();
    let d = a.media.dim();
    let k = rng.gen_range(1..=4usize.min(steps + 1));
    let times: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=steps)).collect();
    let mut path_coef: Vec<f64> = (0..k).map(|_| crate::rng::box_muller(rng)).collect();
    let mut media_coef: Vec<f64> = (0..d)
        .map(|_| if rng.gen::<f64>() < 0.5 { 0.0 } else { crate::rng::box_muller(rng) })
        .collect();
    let l1: f64 = path_coef.iter().chain(&media_coef).map(|c| c.abs()).sum();
    // total slope log-uniform on [10⁻², 10²]
    let scale = math::powf(10.0, rng.gen_range(-2.0..2.0)) / l1.max(f64::MIN_POSITIVE);
    path_coef.iter_mut().for_each(|c| *c *= scale);
    media_coef.iter_mut().for_each(|c| *c *= scale);
    let l1: f64 = path_coef.iter().chain(&media_coef).map(|c| c.abs()).sum();
    let mut f = Feature {
        times,
        path_coef,
        media_coef,
        amplitude: 1.0 / (2.0 * (1.0 + l1)),
        shift: 0.0,
        clipped,
    };
    f.shift = if clipped {
        // centered between one atom of each measure
        let ia = rng.gen_range(0..a.theta.n());
        let ib = rng.gen_range(0..b.theta.n());
        0.5 * (f.project(a, ia) + f.project(b, ib))
    } else {
        rng.gen_range(0.0..TAU)
    };
    f
}

/// `max_h |∫h da − ∫h db|` over a random dictionary of `dictionary_size`
/// functions with `‖h‖_BL ≤ 1`, half Fourier and half clipped-ridge features.
pub fn dbl_lower_bound(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    dictionary_size: usize,
    seed: u64,
) -> Result<f64> {
    if a.theta.steps() != b.theta.steps() || a.dt != b.dt {
        return Err(Error::ShapeMismatch("measures live on different time grids".into()));
    }
    if a.media.dim() != b.media.dim() {
        return Err(Error::ShapeMismatch("media dimensions differ".into()));
    }
    if a.theta.n() == 0 || b.theta.n() == 0 {
        return Err(Error::InvalidArgument("empty measure".into()));
    }
    let mut rng = crate::rng::stream(seed, crate::rng::tag::DICTIONARY);
    let mut best: f64 = 0.0;
    for k in 0..dictionary_size {
        let f = random_feature(a, b, &mut rng, k % 2 == 1);
        best = best.max((f.mean(a) - f.mean(b)).abs());
    }
    Ok(best)
}
