use crate::{math, Error, Result};

/// `ln(4ⁿ exp(−η² n² p / (8 + 4η/(3n))))`.
pub fn bennett_log_tail(n: usize, p: f64, eta: f64) -> Result<f64> {
    let nf = n as f64;
    if !(eta > 0.0 && eta <= nf) {
        return Err(Error::InvalidArgument(alloc::format!(
            "eta = {eta} must lie in (0, n = {n}]"
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("p = {p} is not in (0, 1]")));
    }
    Ok(nf * math::ln(4.0) - eta * eta * nf * nf * p / (8.0 + 4.0 * eta / (3.0 * nf)))
}

/// The `η` at which the bound equals 1 (log-bound 0); it lies near
/// `√(8 ln 4 / (np))` and the bound is informative only above it.
pub fn bennett_crossover(n: usize, p: f64) -> Result<f64> {
    if n == 0 || !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("need n >= 1 and p in (0, 1], got {n}, {p}")));
    }
    let nf = n as f64;
    let ln4 = math::ln(4.0);
    let a = nf * nf * p;
    let b = -4.0 * ln4 / 3.0;
    let c = -8.0 * nf * ln4;
    Ok((-b + math::sqrt(b * b - 4.0 * a * c)) / (2.0 * a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossover_zeroes_the_log_bound() {
        for (n, p) in [(16, 0.3), (512, 8.0 / 512.0), (1000, 0.1)] {
            let eta = bennett_crossover(n, p).unwrap();
            if eta <= n as f64 {
                assert!(bennett_log_tail(n, p, eta).unwrap().abs() < 1e-9 * n as f64);
            }
            let approx = math::sqrt(8.0 * math::ln(4.0) / (n as f64 * p));
            assert!((eta / approx - 1.0).abs() < 0.2, "{eta} vs {approx}");
        }
    }

    #[test]
    fn closed_form_values() {
        let v = bennett_log_tail(1000, 0.1, 0.5).unwrap();
        // 1000 ln 4 − 25000 / (8 + 1/1500)
        let expected = 1000.0 * 4f64.ln() - 25_000.0 / (8.0 + 2.0 / 3000.0);
        assert!((v - expected).abs() < 1e-9);
        assert!((v + 1738.45).abs() < 0.01, "{v}");

        let edge = bennett_log_tail(10, 1.0, 10.0).unwrap();
        assert!((edge - (10.0 * 4f64.ln() - 1e4 / (8.0 + 4.0 / 3.0))).abs() < 1e-9);
    }

    #[test]
    fn decreasing_in_n_at_fixed_np() {
        // the exponent beats n ln 4 once η² np > 8 ln 4 (up to the 4η/3n term)
        for eta in [0.5, 1.0, 2.0] {
            for np in [64.0, 256.0, 1024.0] {
                let mut prev = f64::INFINITY;
                for n in [2048usize, 4096, 8192, 16384] {
                    let v = bennett_log_tail(n, np / n as f64, eta).unwrap();
                    assert!(v < prev);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn increasing_in_n_below_crossover() {
        let a = bennett_log_tail(100, 0.04, 0.1).unwrap();
        let b = bennett_log_tail(200, 0.02, 0.1).unwrap();
        assert!(b > a);
    }

    #[test]
    fn rejects_out_of_range_eta() {
        assert!(bennett_log_tail(10, 0.5, 0.0).is_err());
        assert!(bennett_log_tail(10, 0.5, 10.5).is_err());
    }
}
