use crate::error::{Error, Result};
use crate::face::blendshape::{BlendshapeSequence, CHANNELS};

pub const SSIM_DELTA1: f64 = 1e-4;
pub const SSIM_DELTA2: f64 = 9e-4;

fn check_lengths(pred: &BlendshapeSequence, gt: &BlendshapeSequence) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch(format!(
            "prediction has {} frames, ground truth {}",
            pred.len(),
            gt.len()
        )));
    }
    Ok(())
}

/// Shape term plus motion term: `sum_t |b_t - g_t| + sum_{t>=1} |(b_t - b_{t-1}) - (g_t - g_{t-1})|`.
pub fn lip_loss(pred: &BlendshapeSequence, gt: &BlendshapeSequence) -> Result<f64> {
    check_lengths(pred, gt)?;
    if pred.len() < 2 {
        return Err(Error::Value("lip loss needs at least two frames".into()));
    }
    let (b, g) = (pred.frames(), gt.frames());
    let shape: f64 = b
        .iter()
        .zip(g)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
        .sum();
    let motion: f64 = (1..b.len())
        .map(|t| {
            (0..CHANNELS)
                .map(|c| {
                    let d = (b[t][c] - b[t - 1][c]) - (g[t][c] - g[t - 1][c]);
                    d * d
                })
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    Ok(shape + motion)
}

/// One minus the structural similarity of the two sequences, with means,
/// variances and covariance taken over all frame-channel entries.
pub fn ssim_loss(pred: &BlendshapeSequence, gt: &BlendshapeSequence, delta1: f64, delta2: f64) -> Result<f64> {
    check_lengths(pred, gt)?;
    if pred.is_empty() {
        return Err(Error::Value("SSIM of empty sequences".into()));
    }
    let b = pred.frames().iter().flatten();
    let g = gt.frames().iter().flatten();
    let n = (pred.len() * CHANNELS) as f64;
    let mu = b.clone().sum::<f64>() / n;
    let mu_hat = g.clone().sum::<f64>() / n;
    let (mut var, mut var_hat, mut cov) = (0.0, 0.0, 0.0);
    for (x, y) in b.zip(g) {
        let (dx, dy) = (x - mu, y - mu_hat);
        var += dx * dx;
        var_hat += dy * dy;
        cov += dx * dy;
    }
    let (var, var_hat, cov) = (var / n, var_hat / n, cov / n);
    let ssim = ((2.0 * mu * mu_hat + delta1) * (2.0 * cov + delta2))
        / ((mu * mu + mu_hat * mu_hat + delta1) * (var + var_hat + delta2));
    Ok(1.0 - ssim)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::face::blendshape::Weights;

    fn seq(frames: Vec<Weights>) -> BlendshapeSequence {
        BlendshapeSequence::new(frames, 25.0).unwrap()
    }

    #[test]
    fn single_channel_step() {
        let gt = seq(vec![[0.0; CHANNELS]; 2]);
        let mut p = vec![[0.0; CHANNELS]; 2];
        p[1][17] = 0.1;
        let loss = lip_loss(&seq(p), &gt).unwrap();
        assert!((loss - 0.2).abs() < 1e-12, "{loss}");
    }

    #[test]
    fn constant_offset() {
        let gt: Vec<Weights> = (0..5)
            .map(|t| std::array::from_fn(|c| 0.1 + 0.01 * ((t + c) % 7) as f64))
            .collect();
        let pred: Vec<Weights> = gt.iter().map(|f| f.map(|v| v + 0.05)).collect();
        let loss = lip_loss(&seq(pred), &seq(gt)).unwrap();
        assert!((loss - 5.0 * 0.05 * (CHANNELS as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ssim_cases() {
        let gt: Vec<Weights> = (0..6)
            .map(|t| std::array::from_fn(|c| 0.2 + 0.05 * ((3 * t + c) % 11) as f64))
            .collect();
        let g = seq(gt.clone());
        assert!(ssim_loss(&g, &g, SSIM_DELTA1, SSIM_DELTA2).unwrap().abs() < 1e-12);

        let n = (gt.len() * CHANNELS) as f64;
        let mu = gt.iter().flatten().sum::<f64>() / n;
        let var = gt.iter().flatten().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
        let reflected = seq(gt.iter().map(|f| f.map(|v| 2.0 * mu - v)).collect());
        let (d1, d2) = (SSIM_DELTA1, SSIM_DELTA2);
        let expected = 1.0 - (2.0 * mu * mu + d1) * (-2.0 * var + d2) / ((2.0 * mu * mu + d1) * (2.0 * var + d2));
        let got = ssim_loss(&reflected, &g, d1, d2).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 2.0).abs() < 0.05);

        let c = seq(vec![[0.4; CHANNELS]; 3]);
        assert_eq!(ssim_loss(&c, &c, d1, d2).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_lengths() {
        let a = seq(vec![[0.0; CHANNELS]; 3]);
        let b = seq(vec![[0.0; CHANNELS]; 4]);
        assert!(matches!(lip_loss(&a, &b), Err(Error::LengthMismatch(_))));
        assert!(matches!(
            ssim_loss(&a, &b, SSIM_DELTA1, SSIM_DELTA2),
            Err(Error::LengthMismatch(_))
        ));
    }

    fn frames(len: usize) -> impl Strategy<Value = Vec<Weights>> {
        prop::collection::vec(prop::array::uniform32(0.0f64..1.0), len).prop_map(|v| {
            v.into_iter()
                .map(|a| std::array::from_fn(|c| a[c % 32] * if c >= 32 { 0.5 } else { 1.0 }))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn symmetric_and_zero_on_identity((a, b) in (2usize..8).prop_flat_map(|n| (frames(n), frames(n)))) {
            let (a, b) = (seq(a), seq(b));
            prop_assert_eq!(lip_loss(&a, &a).unwrap(), 0.0);
            prop_assert!((lip_loss(&a, &b).unwrap() - lip_loss(&b, &a).unwrap()).abs() < 1e-12);
            let s1 = ssim_loss(&a, &b, SSIM_DELTA1, SSIM_DELTA2).unwrap();
            let s2 = ssim_loss(&b, &a, SSIM_DELTA1, SSIM_DELTA2).unwrap();
            prop_assert!((s1 - s2).abs() < 1e-12);
            prop_assert!((0.0..=2.0).contains(&s1) || s1.abs() < 1e-12);
        }
    }
}
