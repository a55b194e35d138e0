// libm keeps the numeric kernels identical with or without std.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Rounds to 9 decimals so that products like `6 * 0.25` compare exactly.
#[inline]
pub(crate) fn snap(x: f64) -> f64 {
    round(x * 1e9) / 1e9
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population (divide-by-n) standard deviation around `mean`.
pub(crate) fn population_std(values: &[f64], mean: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    sqrt(ss / values.len() as f64)
}

#[inline]
pub(crate) fn is_integral(x: f64) -> bool {
    libm::trunc(x) == x
}
