use crate::error::{Error, Result};
use crate::motion::StrengthCurve;

/// Linear interpolation of `values` onto `target_len` uniformly spaced
/// samples spanning the same range. Endpoints are preserved exactly and every
/// output lies between its two neighbouring inputs.
pub fn resample_linear(values: &[f64], target_len: usize) -> Result<Vec<f64>> {
    if target_len < 2 {
        return Err(Error::Value(format!("target length must be >= 2, got {target_len}")));
    }
    if values.len() < 2 {
        return Err(Error::Value(format!(
            "cannot resample a curve of length {}",
            values.len()
        )));
    }
    let n = values.len();
    if n == target_len {
        return Ok(values.to_vec());
    }
    let span = (n - 1) as f64;
    let steps = (target_len - 1) as f64;
    let mut out = Vec::with_capacity(target_len);
    for i in 0..target_len {
        let pos = i as f64 * span / steps;
        let lo = (pos.floor() as usize).min(n - 2);
        let frac = pos - lo as f64;
        let (a, b) = (values[lo], values[lo + 1]);
        let v = a + frac * (b - a);
        out.push(v.clamp(a.min(b), a.max(b)));
    }
    out[0] = values[0];
    out[target_len - 1] = values[n - 1];
    Ok(out)
}

/// Curves that can be resampled onto a new sample count.
pub trait Resample: Sized {
    fn resample(&self, target_len: usize) -> Result<Self>;
}

impl Resample for StrengthCurve {
    fn resample(&self, target_len: usize) -> Result<Self> {
        let values = resample_linear(&self.values, target_len)?;
        let fps = self.fps * (target_len - 1) as f64 / (self.values.len() - 1) as f64;
        Ok(StrengthCurve {
            values,
            fps,
            normalization: self.normalization,
        })
    }
}

pub fn resample_curve<C: Resample>(curve: &C, target_len: usize) -> Result<C> {
    curve.resample(target_len)
}
