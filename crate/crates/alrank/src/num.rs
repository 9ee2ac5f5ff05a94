//! Shared numeric primitives. Stable forms: `sigmoid` never overflows and
//! `softplus` stays accurate for large-magnitude inputs.

/// Logistic function `1 / (1 + e^-x)`.
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)`, computed as `max(x, 0) + ln_1p(e^-|x|)`.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}
