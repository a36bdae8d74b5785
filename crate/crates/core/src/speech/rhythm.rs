use crate::motion::{resample_linear, StrengthCurve};
use crate::speech::RhythmCurve;

/// Sample count both curves are brought to before comparison.
pub const RHYTHM_SAMPLES: usize = 64;

const CONSTANT_VARIANCE: f64 = 1e-20;

/// Pearson correlation, defined as 0 when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa / n < CONSTANT_VARIANCE || sbb / n < CONSTANT_VARIANCE {
        return 0.0;
    }
    (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
}

fn to_fixed(values: &[f64]) -> Vec<f64> {
    match values.len() {
        0 => vec![0.0; RHYTHM_SAMPLES],
        1 => vec![values[0]; RHYTHM_SAMPLES],
        _ => resample_linear(values, RHYTHM_SAMPLES).expect("length checked"),
    }
}

/// One minus the Pearson correlation of two value sequences after both are
/// resampled to [`RHYTHM_SAMPLES`] points. In `[0, 2]`, lower is more similar.
pub fn rhythm_cost_values(a: &[f64], b: &[f64]) -> f64 {
    1.0 - pearson(&to_fixed(a), &to_fixed(b))
}

pub fn rhythm_cost(node_strength: &StrengthCurve, phrase_rhythm: &RhythmCurve) -> f64 {
    rhythm_cost_values(&node_strength.values, &phrase_rhythm.values)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn reference_values() {
        let x: Vec<f64> = (0..30).map(|i| ((i as f64) * 0.4).sin() + 1.0).collect();
        assert!(rhythm_cost_values(&x, &x) < 1e-9);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let neg: Vec<f64> = x.iter().map(|v| 2.0 * mean - v).collect();
        assert!((rhythm_cost_values(&x, &neg) - 2.0).abs() < 1e-9);
        let ramp: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        assert_eq!(rhythm_cost_values(&ramp, &[0.4; 7]), 1.0);
        assert_eq!(rhythm_cost_values(&ramp, &[0.4]), 1.0);
    }

    proptest! {
        #[test]
        fn symmetric_and_affine_invariant(
            a in prop::collection::vec(0.0f64..1.0, 2..50),
            b in prop::collection::vec(0.0f64..1.0, 2..50),
            scale in 0.1f64..10.0,
            shift in -3.0f64..3.0,
        ) {
            let c = rhythm_cost_values(&a, &b);
            prop_assert!((0.0..=2.0).contains(&c));
            prop_assert!((c - rhythm_cost_values(&b, &a)).abs() < 1e-12);
            let scaled: Vec<f64> = a.iter().map(|v| v * scale + shift).collect();
            prop_assert!((c - rhythm_cost_values(&scaled, &b)).abs() < 1e-9);
        }
    }
}
