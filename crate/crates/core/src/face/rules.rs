use std::ops::Range;

use crate::error::{Error, Result};
use crate::face::blendshape::{channel_index, BlendshapeSequence, ARKIT_NAMES, CHANNELS};
use crate::face::PhonemeTimeline;

/// Channels that open the mouth and are capped to 0 on bilabials.
pub fn default_open_channels() -> Vec<usize> {
    [
        "jawOpen",
        "mouthLowerDownLeft",
        "mouthLowerDownRight",
        "mouthUpperUpLeft",
        "mouthUpperUpRight",
    ]
    .iter()
    .map(|n| channel_index(n).expect("ARKit channel"))
    .collect()
}

/// Channels that close the lips and are raised to 1 on bilabials.
pub fn default_closure_channels() -> Vec<usize> {
    ["mouthClose", "mouthPressLeft", "mouthPressRight"]
        .iter()
        .map(|n| channel_index(n).expect("ARKit channel"))
        .collect()
}

/// Per-frame closure strength: 1 on closure frames, falling linearly to 0
/// over `ramp_frames` frames on either side.
pub fn closure_envelope(ph: &PhonemeTimeline, ramp_frames: usize) -> Vec<f64> {
    let n = ph.len();
    let mut dist = vec![usize::MAX; n];
    let mut last = None;
    for (t, d) in dist.iter_mut().enumerate() {
        if ph.is_closure(t) {
            last = Some(t);
        }
        if let Some(l) = last {
            *d = t - l;
        }
    }
    last = None;
    for t in (0..n).rev() {
        if ph.is_closure(t) {
            last = Some(t);
        }
        if let Some(l) = last {
            dist[t] = dist[t].min(l - t);
        }
    }
    let span = (ramp_frames + 1) as f64;
    dist.into_iter()
        .map(|d| {
            if d == usize::MAX {
                0.0
            } else {
                (1.0 - d as f64 / span).max(0.0)
            }
        })
        .collect()
}

/// Forces the mouth shut on bilabial phonemes. With closure envelope `e`,
/// open channels become `min(x, 1 - e)` and closure channels `max(x, e)`;
/// every other channel is untouched.
pub fn articulation_correction(
    seq: &BlendshapeSequence,
    ph: &PhonemeTimeline,
    mouth_close_channels: &[usize],
    lip_closure_channels: &[usize],
    ramp_frames: usize,
) -> Result<BlendshapeSequence> {
    if ph.len() != seq.len() {
        return Err(Error::LengthMismatch(format!(
            "{} frames but {} phoneme labels",
            seq.len(),
            ph.len()
        )));
    }
    if let Some(c) = mouth_close_channels
        .iter()
        .chain(lip_closure_channels)
        .find(|&&c| c >= CHANNELS)
    {
        return Err(Error::Index {
            index: *c,
            len: CHANNELS,
        });
    }
    let env = closure_envelope(ph, ramp_frames);
    let frames = seq
        .frames()
        .iter()
        .zip(&env)
        .map(|(f, &e)| {
            let mut out = *f;
            if e > 0.0 {
                for &c in mouth_close_channels {
                    out[c] = out[c].min(1.0 - e);
                }
                for &c in lip_closure_channels {
                    out[c] = out[c].max(e);
                }
            }
            out
        })
        .collect();
    BlendshapeSequence::new(frames, seq.fps())
}

/// Upper-face channels: eyes, brows, cheek squints and nose sneers.
pub fn upper_face_mask() -> [bool; CHANNELS] {
    std::array::from_fn(|c| {
        let n = ARKIT_NAMES[c];
        n.starts_with("eye") || n.starts_with("brow") || n.starts_with("cheekSquint") || n.starts_with("noseSneer")
    })
}

/// A captured expression triggered by a semantic tag.
#[derive(Debug, Clone, PartialEq)]
pub struct IntentionExpression {
    tag: String,
    clip: BlendshapeSequence,
    upper_face_mask: [bool; CHANNELS],
}

impl IntentionExpression {
    /// Zeroes every channel outside the mask.
    pub fn new(tag: impl Into<String>, clip: &BlendshapeSequence, mask: [bool; CHANNELS]) -> Result<Self> {
        let frames = clip
            .frames()
            .iter()
            .map(|f| std::array::from_fn(|c| if mask[c] { f[c] } else { 0.0 }))
            .collect();
        Ok(IntentionExpression {
            tag: tag.into(),
            clip: BlendshapeSequence::new(frames, clip.fps())?,
            upper_face_mask: mask,
        })
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn clip(&self) -> &BlendshapeSequence {
        &self.clip
    }

    pub fn mask(&self) -> &[bool; CHANNELS] {
        &self.upper_face_mask
    }
}

/// Trapezoid over a span of `len` frames rising and falling over
/// `ramp_frames` frames.
pub fn trapezoid(len: usize, ramp_frames: usize) -> Vec<f64> {
    let span = (ramp_frames + 1) as f64;
    (0..len)
        .map(|i| {
            let edge = i.min(len - 1 - i) + 1;
            (edge as f64 / span).min(1.0)
        })
        .collect()
}

/// Blends the intention clip into the masked channels of `rhythmic` over
/// `span`: `out = (1 - w e) rhythmic + w e intention` with a trapezoid `e`.
/// The intention clip is uniformly resampled to the span length when needed.
pub fn fuse_expression(
    rhythmic: &BlendshapeSequence,
    intention: &IntentionExpression,
    span: Range<usize>,
    fusion_weight: f64,
    ramp_frames: usize,
) -> Result<BlendshapeSequence> {
    if span.start >= span.end || span.end > rhythmic.len() {
        return Err(Error::Span {
            start: span.start,
            end: span.end,
            len: rhythmic.len(),
        });
    }
    if !(0.0..=1.0).contains(&fusion_weight) {
        return Err(Error::Value(format!("fusion weight {fusion_weight} outside [0, 1]")));
    }
    if intention.clip.is_empty() {
        return Err(Error::Value("intention clip is empty".into()));
    }
    let expr = intention.clip.resampled(span.len());
    let env = trapezoid(span.len(), ramp_frames);
    let mask = intention.upper_face_mask;
    let mut frames = rhythmic.frames().to_vec();
    for (i, t) in span.enumerate() {
        let a = fusion_weight * env[i];
        for c in (0..CHANNELS).filter(|&c| mask[c]) {
            frames[t][c] = (1.0 - a) * frames[t][c] + a * expr.frames()[i][c];
        }
    }
    BlendshapeSequence::new(frames, rhythmic.fps())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::face::blendshape::Weights;

    const JAW: usize = 17;

    fn timeline(labels: &[&str]) -> PhonemeTimeline {
        PhonemeTimeline::new(labels.iter().map(|s| s.to_string()).collect())
    }

    fn open_mouth(n: usize, jaw: f64) -> BlendshapeSequence {
        let mut f = [0.3; CHANNELS];
        f[JAW] = jaw;
        BlendshapeSequence::new(vec![f; n], 25.0).unwrap()
    }

    #[test]
    fn no_closures_is_a_no_op() {
        let s = open_mouth(6, 0.7);
        let out = articulation_correction(
            &s,
            &timeline(&["a"; 6]),
            &default_open_channels(),
            &default_closure_channels(),
            3,
        )
        .unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn single_p_closes_the_jaw() {
        let s = open_mouth(5, 0.7);
        let out = articulation_correction(&s, &timeline(&["a", "a", "p", "a", "a"]), &[JAW], &[18], 0).unwrap();
        let jaw: Vec<f64> = out.frames().iter().map(|f| f[JAW]).collect();
        assert_eq!(jaw, vec![0.7, 0.7, 0.0, 0.7, 0.7]);
        assert_eq!(out.frames()[2][18], 1.0);
        assert_eq!(out.frames()[1][18], 0.3);
    }

    #[test]
    fn m_run_has_linear_ramps() {
        let s = open_mouth(11, 1.0);
        let labels = ["a", "a", "a", "m", "m", "m", "m", "m", "a", "a", "a"];
        let out = articulation_correction(&s, &timeline(&labels), &[JAW], &[], 2).unwrap();
        let jaw: Vec<f64> = out.frames().iter().map(|f| f[JAW]).collect();
        let third = 1.0 / 3.0;
        let expected = [
            1.0,
            2.0 * third,
            third,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            third,
            2.0 * third,
            1.0,
        ];
        for (a, b) in jaw.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{jaw:?}");
        }
    }

    #[test]
    fn fusion_endpoints() {
        let mut rf = [0.0; CHANNELS];
        rf[43] = 0.2;
        let rhythmic = BlendshapeSequence::new(vec![rf; 10], 25.0).unwrap();
        let mut ef = [0.0; CHANNELS];
        ef[43] = 0.8;
        let expr = BlendshapeSequence::new(vec![ef; 4], 25.0).unwrap();
        let intent = IntentionExpression::new("emphasis", &expr, upper_face_mask()).unwrap();
        assert_eq!(fuse_expression(&rhythmic, &intent, 3..7, 0.0, 2).unwrap(), rhythmic);
        let out = fuse_expression(&rhythmic, &intent, 3..7, 1.0, 0).unwrap();
        let col: Vec<f64> = out.frames().iter().map(|f| f[43]).collect();
        for (t, v) in col.iter().enumerate() {
            let want = if (3..7).contains(&t) { 0.8 } else { 0.2 };
            assert!((v - want).abs() < 1e-12, "{col:?}");
        }
        assert!(matches!(
            fuse_expression(&rhythmic, &intent, 7..12, 1.0, 0),
            Err(Error::Span { .. })
        ));
    }

    #[test]
    fn mask_zeroes_lower_face() {
        let expr = BlendshapeSequence::new(vec![[0.5; CHANNELS]; 2], 25.0).unwrap();
        let intent = IntentionExpression::new("happiness", &expr, upper_face_mask()).unwrap();
        assert_eq!(intent.clip().frames()[0][JAW], 0.0);
        assert_eq!(intent.clip().frames()[0][43], 0.5);
    }

    fn frames(len: usize) -> impl Strategy<Value = Vec<Weights>> {
        prop::collection::vec(prop::array::uniform32(0.0f64..1.0), len).prop_map(|v| {
            v.into_iter()
                .map(|a| std::array::from_fn(|c| a[(c * 7) % 32]))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn correction_is_idempotent(f in frames(12), marks in prop::collection::vec(any::<bool>(), 12), ramp in 0usize..4) {
            let labels: Vec<&str> = marks.iter().map(|m| if *m { "b" } else { "e" }).collect();
            let ph = timeline(&labels);
            let s = BlendshapeSequence::new(f, 25.0).unwrap();
            let (open, close) = (default_open_channels(), default_closure_channels());
            let once = articulation_correction(&s, &ph, &open, &close, ramp).unwrap();
            let twice = articulation_correction(&once, &ph, &open, &close, ramp).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn fusion_stays_in_the_hull(a in frames(9), b in frames(5), w in 0.0f64..=1.0, ramp in 0usize..4, start in 0usize..4) {
            let r = BlendshapeSequence::new(a, 25.0).unwrap();
            let e = BlendshapeSequence::new(b, 25.0).unwrap();
            let intent = IntentionExpression::new("fear", &e, upper_face_mask()).unwrap();
            let span = start..start + 5;
            let out = fuse_expression(&r, &intent, span.clone(), w, ramp).unwrap();
            let mask = upper_face_mask();
            for t in 0..9 {
                for (c, &masked) in mask.iter().enumerate() {
                    let x = r.frames()[t][c];
                    let y = out.frames()[t][c];
                    if !masked || !span.contains(&t) {
                        prop_assert_eq!(x, y);
                    } else {
                        let z = intent.clip().frames()[t - start][c];
                        prop_assert!(y >= x.min(z) - 1e-12 && y <= x.max(z) + 1e-12);
                    }
                }
            }
        }
    }
}
