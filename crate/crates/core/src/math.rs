//! Floating-point helpers that work without `std`.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `x * 2^e`, exact whenever the result is a normal number.
#[inline]
pub fn ldexp(x: f64, e: i32) -> f64 {
    libm::ldexp(x, e)
}

/// `ln(n) + 1`, the harmonic-type factor used by the covering bounds.
/// `n = 0` is treated as `n = 1`.
pub fn ln_plus_one(n: usize) -> f64 {
    ln(n.max(1) as f64) + 1.0
}

/// Max of a slice, `0.0` for an empty one.
pub fn max_or_zero(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}
