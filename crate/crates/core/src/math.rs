//! Float helpers backed by `libm` so results do not depend on the host libm.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of one prediction, with the prediction clipped away
/// from 0 and 1.
#[inline]
pub(crate) fn bce(y_hat: f64, label: bool) -> f64 {
    const CLIP: f64 = 1e-7;
    let p = y_hat.clamp(CLIP, 1.0 - CLIP);
    if label {
        -ln(p)
    } else {
        -ln(1.0 - p)
    }
}

pub(crate) fn logit(p: f64) -> f64 {
    ln(p / (1.0 - p))
}
