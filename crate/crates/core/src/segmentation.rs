//! Splitting long database clips into motion-graph nodes at local minima of
//! motion strength.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{compute_motion_strength, MotionClip, StrengthCurve, DEFAULT_SMOOTH_WINDOW};
use crate::speech::SemanticLexicon;

/// One node of the motion graph: a slice of a source clip.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSegment {
    pub segment_id: String,
    pub source_id: String,
    pub source_range: Range<usize>,
    pub clip: MotionClip,
    /// Strength over the slice, normalized to unit max.
    pub strength: StrengthCurve,
    pub semantic_tag: Option<String>,
}

impl MotionSegment {
    pub fn len(&self) -> usize {
        self.source_range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_range.is_empty()
    }

    pub fn is_semantic(&self) -> bool {
        self.semantic_tag.is_some()
    }
}

pub fn segment_id(source_id: &str, start: usize) -> String {
    format!("{source_id}#{start}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationParams {
    /// Minimum node length in seconds; converted with `round(seconds * fps)`.
    pub min_segment_seconds: f64,
    pub prominence: f64,
    pub smooth_window: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            min_segment_seconds: 0.5,
            prominence: 0.05,
            smooth_window: DEFAULT_SMOOTH_WINDOW,
        }
    }
}

impl SegmentationParams {
    pub fn min_segment_len(&self, fps: f64) -> usize {
        ((self.min_segment_seconds * fps).round() as usize).max(2)
    }
}

/// Topographic depth of the dip at `t`: how far the lower of the two
/// enclosing maxima rises above it. Each side is scanned outward until a
/// value strictly below `values[t]` (or the curve edge) is reached.
fn dip_depth(values: &[f64], t: usize) -> f64 {
    let v = values[t];
    let mut left = v;
    for &x in values[..t].iter().rev() {
        if x < v {
            break;
        }
        left = left.max(x);
    }
    let mut right = v;
    for &x in &values[t + 1..] {
        if x < v {
            break;
        }
        right = right.max(x);
    }
    left.min(right) - v
}

/// Interior local minima of a unit-max curve usable as segment boundaries.
///
/// A frame qualifies when it is no higher than either neighbour, it is the
/// leftmost frame of any flat run, and its dip is at least `prominence`
/// deep. Boundaries (including the implicit ones at 0 and N) are kept at
/// least `min_segment_len` apart; in a conflict the lower minimum wins, ties
/// going to the earlier frame.
pub fn find_dividing_points(curve: &StrengthCurve, min_segment_len: usize, prominence: f64) -> Result<Vec<usize>> {
    if !curve.is_unit_max() {
        return Err(Error::Value("dividing points need a unit-max normalized curve".into()));
    }
    if min_segment_len == 0 {
        return Err(Error::Value("min_segment_len must be positive".into()));
    }
    if !(0.0..=1.0).contains(&prominence) {
        return Err(Error::Value(format!("prominence {prominence} outside [0, 1]")));
    }
    let v = &curve.values;
    let n = v.len();
    if n < 2 * min_segment_len || n < 3 {
        return Ok(Vec::new());
    }

    let mut candidates: Vec<usize> = (1..n - 1)
        .filter(|&t| v[t] <= v[t - 1] && v[t] <= v[t + 1] && v[t] != v[t - 1])
        .filter(|&t| dip_depth(v, t) >= prominence - 1e-12)
        .collect();
    candidates.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));

    let mut kept: Vec<usize> = Vec::new();
    for t in candidates {
        let clear_of_ends = t >= min_segment_len && n - t >= min_segment_len;
        let clear_of_kept = kept.iter().all(|&k| k.abs_diff(t) >= min_segment_len);
        if clear_of_ends && clear_of_kept {
            kept.push(t);
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

/// Cuts `clip` at `dividing_points`. `strength` is the whole-clip curve; each
/// segment receives its slice re-normalized to unit max.
pub fn segment_clip(
    clip: &MotionClip,
    strength: &StrengthCurve,
    dividing_points: &[usize],
) -> Result<Vec<MotionSegment>> {
    let n = clip.frame_count();
    if strength.len() != n {
        return Err(Error::LengthMismatch(format!(
            "strength curve has {} values for {n} frames",
            strength.len()
        )));
    }
    let mut bounds = Vec::with_capacity(dividing_points.len() + 2);
    bounds.push(0);
    for &d in dividing_points {
        if d == 0 || d >= n {
            return Err(Error::Value(format!("dividing point {d} outside (0, {n})")));
        }
        if d <= *bounds.last().unwrap() {
            return Err(Error::Value("dividing points must be strictly increasing".into()));
        }
        bounds.push(d);
    }
    bounds.push(n);

    bounds
        .windows(2)
        .map(|w| {
            let (start, end) = (w[0], w[1]);
            if end - start < 2 {
                return Err(Error::Value(format!(
                    "segment [{start}, {end}) is shorter than 2 frames"
                )));
            }
            Ok(MotionSegment {
                segment_id: segment_id(clip.source_id(), start),
                source_id: clip.source_id().to_string(),
                source_range: start..end,
                clip: clip.slice(start..end)?,
                strength: strength.slice_normalized(start, end),
                semantic_tag: None,
            })
        })
        .collect()
}

/// Segments a long database clip with the given parameters.
pub fn segment_long_clip(clip: &MotionClip, params: &SegmentationParams) -> Result<Vec<MotionSegment>> {
    let weights = clip.skeleton().default_strength_weights();
    let strength = compute_motion_strength(clip, &weights, params.smooth_window)?;
    let points = find_dividing_points(&strength, params.min_segment_len(clip.fps()), params.prominence)?;
    segment_clip(clip, &strength, &points)
}

/// Wraps a manually delimited semantic clip as a single, never-split node.
pub fn ingest_semantic_clip(clip: &MotionClip, tag: &str, lexicon: &SemanticLexicon) -> Result<MotionSegment> {
    if !lexicon.contains(tag) {
        return Err(Error::UnknownTag(tag.to_string()));
    }
    let weights = clip.skeleton().default_strength_weights();
    let strength = compute_motion_strength(clip, &weights, DEFAULT_SMOOTH_WINDOW)?;
    Ok(MotionSegment {
        segment_id: segment_id(clip.source_id(), 0),
        source_id: clip.source_id().to_string(),
        source_range: 0..clip.frame_count(),
        clip: clip.clone(),
        strength,
        semantic_tag: Some(tag.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::motion::{Frame, Joint, Normalization, Quat, Skeleton, Vec3};
    use crate::speech::Category;

    fn unit(values: &[f64]) -> StrengthCurve {
        StrengthCurve {
            values: values.to_vec(),
            fps: 25.0,
            normalization: Normalization::UnitMax,
        }
    }

    fn clip(n: usize, id: &str) -> MotionClip {
        let sk = Arc::new(Skeleton::new(vec![Joint::new("root", None, Vec3::zeros())], None).unwrap());
        let frames = (0..n)
            .map(|i| Frame {
                root_position: Vec3::new((i as f64 * 0.3).sin(), 0.0, 0.0),
                rotations: vec![Quat::identity()],
            })
            .collect();
        MotionClip::new(sk, 25.0, frames, id).unwrap()
    }

    #[test]
    fn monotone_curve_has_no_points() {
        let c = unit(&[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(find_dividing_points(&c, 1, 0.0).unwrap().is_empty());
    }

    #[test]
    fn two_dips() {
        let c = unit(&[1.0, 0.2, 1.0, 0.1, 1.0]);
        assert_eq!(find_dividing_points(&c, 1, 0.1).unwrap(), vec![1, 3]);
    }

    #[test]
    fn spacing_conflict_keeps_lower_minimum() {
        let c = unit(&[1.0, 1.0, 1.0, 0.2, 1.0, 0.1, 1.0, 1.0, 1.0]);
        assert_eq!(find_dividing_points(&c, 3, 0.05).unwrap(), vec![5]);
        let tie = unit(&[1.0, 1.0, 1.0, 0.1, 1.0, 0.1, 1.0, 1.0, 1.0]);
        assert_eq!(find_dividing_points(&tie, 3, 0.05).unwrap(), vec![3]);
    }

    #[test]
    fn short_curve_is_empty_and_unnormalized_is_error() {
        let c = unit(&[1.0, 0.2, 1.0, 0.1, 1.0]);
        assert!(find_dividing_points(&c, 3, 0.1).unwrap().is_empty());
        let raw = StrengthCurve {
            normalization: Normalization::Raw,
            ..c.clone()
        };
        assert!(matches!(find_dividing_points(&raw, 1, 0.1), Err(Error::Value(_))));
        let not_unit = unit(&[2.0, 0.2, 2.0]);
        assert!(matches!(find_dividing_points(&not_unit, 1, 0.1), Err(Error::Value(_))));
    }

    #[test]
    fn shallow_dips_and_plateaus() {
        let c = unit(&[1.0, 0.98, 1.0, 0.5, 0.5, 0.5, 1.0]);
        assert_eq!(find_dividing_points(&c, 1, 0.05).unwrap(), vec![3]);
    }

    #[test]
    fn tiling_of_ranges() {
        let c = clip(100, "db");
        let s = crate::motion::default_motion_strength(&c);
        let segs = segment_clip(&c, &s, &[40, 70]).unwrap();
        let lens: Vec<usize> = segs.iter().map(|s| s.len()).collect();
        assert_eq!(lens, vec![40, 30, 30]);
        assert_eq!(segs[1].segment_id, "db#40");
        assert!(segs
            .iter()
            .all(|s| s.strength.is_unit_max() && s.strength.len() == s.len()));

        let whole = segment_clip(&c, &s, &[]).unwrap();
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].clip, c);

        assert!(matches!(segment_clip(&c, &s, &[0]), Err(Error::Value(_))));
        assert!(matches!(segment_clip(&c, &s, &[100]), Err(Error::Value(_))));
        assert!(matches!(segment_clip(&c, &s, &[50, 50]), Err(Error::Value(_))));
    }

    #[test]
    fn semantic_ingestion() {
        let mut lex = SemanticLexicon::default();
        lex.insert("number_three", &["three"], Category::Number);
        lex.insert("left", &["left"], Category::Orientation);
        let c = clip(60, "sem3");
        let seg = ingest_semantic_clip(&c, "number_three", &lex).unwrap();
        assert_eq!(seg.len(), 60);
        assert_eq!(seg.source_range, 0..60);
        assert_eq!(seg.semantic_tag.as_deref(), Some("number_three"));
        let seg = ingest_semantic_clip(&c, "left", &lex).unwrap();
        assert_eq!(seg.semantic_tag.as_deref(), Some("left"));
        assert!(matches!(
            ingest_semantic_clip(&c, "waltz", &lex),
            Err(Error::UnknownTag(_))
        ));
    }

    proptest! {
        #[test]
        fn points_are_literal_minima_and_tile(
            raw in prop::collection::vec(0.0f64..1.0, 6..120),
            min_len in 1usize..8,
            prominence in 0.0f64..0.3,
        ) {
            let c = StrengthCurve { values: raw, fps: 25.0, normalization: Normalization::Raw }.normalized();
            let pts = find_dividing_points(&c, min_len, prominence).unwrap();
            let v = &c.values;
            let mut prev = 0;
            for &t in &pts {
                prop_assert!(t > 0 && t < v.len() - 1);
                prop_assert!(v[t] <= v[t - 1] && v[t] <= v[t + 1]);
                prop_assert!(t - prev >= min_len);
                prev = t;
            }
            prop_assert!(v.len() - prev >= min_len || pts.is_empty());
        }
    }
}
