//! Float helpers routed through `libm` so results do not depend on the
//! platform's C math library or on whether `std` is enabled.

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Rounds half away from zero, like C `round`.
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
