//! Elementary functions that work with and without `std`.

#[cfg(feature = "std")]
macro_rules! forward {
    ($($name:ident / $_libm:ident),*) => {$(
        #[inline(always)]
        pub fn $name(x: f64) -> f64 { x.$name() }
    )*};
}

#[cfg(not(feature = "std"))]
macro_rules! forward {
    ($($name:ident / $libm:ident),*) => {$(
        #[inline(always)]
        pub fn $name(x: f64) -> f64 { libm::$libm(x) }
    )*};
}

forward!(sin / sin, cos / cos, exp / exp, ln / log, sqrt / sqrt, floor / floor, ceil / ceil, round / round);

#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.powf(y)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::pow(x, y)
    }
}

#[inline(always)]
pub fn powi(x: f64, k: i32) -> f64 {
    #[cfg(feature = "std")]
    {
        x.powi(k)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::pow(x, k as f64)
    }
}

#[inline(always)]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[inline(always)]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Wraps `x` into `[lo, lo + period)`.
#[inline]
pub fn wrap(x: f64, lo: f64, period: f64) -> f64 {
    let r = x - lo;
    let w = r - period * floor(r / period);
    // floor can round a tiny negative remainder up to exactly `period`
    if w >= period {
        lo
    } else {
        lo + w
    }
}

/// Mean of the chi distribution with `k` degrees of freedom, i.e. `E|N_k|`
/// for a standard Gaussian vector in `k` dimensions.
pub fn chi_mean(k: usize) -> f64 {
    let k = k as f64;
    core::f64::consts::SQRT_2 * exp(lgamma((k + 1.0) / 2.0) - lgamma(k / 2.0))
}
