//! Small shared numeric helpers.

/// Upper clamp applied to every exponential so that divisions stay finite.
pub const EXP_MAX: f64 = 1e30;

/// `exp(x)` clamped to [`EXP_MAX`].
#[inline]
pub fn exp_clamped(x: f64) -> f64 {
    f64::min(x.exp(), EXP_MAX)
}

/// Logistic sigmoid `1 / (1 + e^-x)` with the clamped exponential.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + exp_clamped(-x))
}

/// First derivative of the sigmoid, `s * (1 - s)`.
#[inline]
pub fn sigmoid_d1(s: f64) -> f64 {
    s * (1.0 - s)
}

/// Second derivative of the sigmoid, `s * (1 - s) * (1 - 2s)`.
#[inline]
pub fn sigmoid_d2(s: f64) -> f64 {
    s * (1.0 - s) * (1.0 - 2.0 * s)
}
