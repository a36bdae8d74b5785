use std::fs;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Quaternion;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{bvh, Frame, Joint, MotionClip, Quat, Skeleton, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionFormat {
    Json,
    Bvh,
}

impl MotionFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(MotionFormat::Json),
            "bvh" => Some(MotionFormat::Bvh),
            _ => None,
        }
    }
}

/// Quaternions further than this from unit norm are rejected rather than
/// renormalized.
const RENORMALIZE_LIMIT: f64 = 1e-3;

pub fn load_motion_clip(path: &Path, format: MotionFormat) -> Result<MotionClip> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        MotionFormat::Json => parse_motion_json(&text),
        MotionFormat::Bvh => {
            let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("bvh").to_string();
            bvh::parse_bvh(&text, &id)
        }
    }
}

pub fn save_motion_json(clip: &MotionClip, path: &Path) -> Result<()> {
    fs::write(path, motion_to_json(clip)).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
pub(crate) struct ClipRecord {
    fps: Num,
    skeleton: SkeletonRecord,
    frames: Vec<FrameRecord>,
    source_id: String,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct SkeletonRecord {
    joints: Vec<JointRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    salient: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct JointRecord {
    name: String,
    #[serde(default)]
    parent: Option<ParentRef>,
    offset: [Num; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ParentRef {
    Index(usize),
    Name(String),
}

#[derive(Serialize, Deserialize)]
struct FrameRecord {
    root_pos: [Num; 3],
    rotations: Vec<[Num; 4]>,
}

/// A JSON number that may also arrive as one of the non-finite tokens some
/// writers emit (`NaN`, `Infinity`), so that it can be rejected as a value
/// error rather than a syntax error.
#[derive(Debug, Clone, Copy)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(v) => Ok(Num(v)),
            Raw::S(s) => match s.as_str() {
                "NaN" => Ok(Num(f64::NAN)),
                "Infinity" => Ok(Num(f64::INFINITY)),
                "-Infinity" => Ok(Num(f64::NEG_INFINITY)),
                other => Err(de::Error::custom(format!("expected a number, got {other:?}"))),
            },
        }
    }
}

fn vec3(v: &[Num; 3]) -> Vec3 {
    Vec3::new(v[0].0, v[1].0, v[2].0)
}

/// Quotes bare `NaN` / `Infinity` / `-Infinity` tokens outside strings.
fn quote_nonfinite_tokens(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    let mut in_string = false;
    let mut last = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if in_string {
            if c == b'\\' {
                i += 2;
                continue;
            }
            if c == b'"' {
                in_string = false;
            }
            i += 1;
            continue;
        }
        if c == b'"' {
            in_string = true;
            i += 1;
            continue;
        }
        let token = ["-Infinity", "Infinity", "NaN"]
            .into_iter()
            .find(|t| bytes[i..].starts_with(t.as_bytes()));
        if let Some(t) = token {
            out.push_str(&text[last..i]);
            out.push('"');
            out.push_str(t);
            out.push('"');
            i += t.len();
            last = i;
            continue;
        }
        i += 1;
    }
    out.push_str(&text[last..]);
    out
}

pub fn parse_motion_json(text: &str) -> Result<MotionClip> {
    let text = quote_nonfinite_tokens(text);
    let rec: ClipRecord = serde_json::from_str(&text).map_err(|e| {
        if e.is_data() {
            Error::Schema(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    })?;
    clip_from_record(rec)
}

pub(crate) fn skeleton_from_record(rec: SkeletonRecord) -> Result<Skeleton> {
    let names: Vec<String> = rec.joints.iter().map(|j| j.name.clone()).collect();
    let mut joints = Vec::with_capacity(rec.joints.len());
    for j in rec.joints {
        let parent = match j.parent {
            None => None,
            Some(ParentRef::Index(i)) => Some(i),
            Some(ParentRef::Name(n)) => Some(
                names
                    .iter()
                    .position(|m| *m == n)
                    .ok_or_else(|| Error::Schema(format!("unknown parent joint {n:?}")))?,
            ),
        };
        joints.push(Joint::new(j.name, parent, vec3(&j.offset)));
    }
    Skeleton::new(joints, rec.salient)
}

pub(crate) fn skeleton_to_record(sk: &Skeleton) -> SkeletonRecord {
    SkeletonRecord {
        joints: sk
            .joints()
            .iter()
            .map(|j| JointRecord {
                name: j.name.clone(),
                parent: j.parent.map(ParentRef::Index),
                offset: [Num(j.offset.x), Num(j.offset.y), Num(j.offset.z)],
            })
            .collect(),
        salient: Some(sk.salient_names().iter().map(|s| s.to_string()).collect()),
    }
}

pub(crate) fn clip_from_record(rec: ClipRecord) -> Result<MotionClip> {
    let skeleton = Arc::new(skeleton_from_record(rec.skeleton)?);
    if rec.frames.is_empty() {
        return Err(Error::Schema("clip has no frames".into()));
    }
    let mut frames = Vec::with_capacity(rec.frames.len());
    for (t, f) in rec.frames.iter().enumerate() {
        let root_position = vec3(&f.root_pos);
        if !root_position.iter().all(|v| v.is_finite()) {
            return Err(Error::Value(format!("frame {t}: non-finite root position")));
        }
        let rotations = f
            .rotations
            .iter()
            .map(|q| unit_quat(q[0].0, q[1].0, q[2].0, q[3].0))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Value(format!("frame {t}: {e}")))?;
        frames.push(Frame {
            root_position,
            rotations,
        });
    }
    if !rec.fps.0.is_finite() {
        return Err(Error::Value("non-finite fps".into()));
    }
    MotionClip::new(skeleton, rec.fps.0, frames, rec.source_id)
}

pub(crate) fn clip_to_record(clip: &MotionClip) -> ClipRecord {
    ClipRecord {
        fps: Num(clip.fps()),
        skeleton: skeleton_to_record(clip.skeleton()),
        frames: clip
            .frames()
            .iter()
            .map(|f| FrameRecord {
                root_pos: [Num(f.root_position.x), Num(f.root_position.y), Num(f.root_position.z)],
                rotations: f
                    .rotations
                    .iter()
                    .map(|q| [Num(q.w), Num(q.i), Num(q.j), Num(q.k)])
                    .collect(),
            })
            .collect(),
        source_id: clip.source_id().to_string(),
    }
}

pub fn motion_to_json(clip: &MotionClip) -> String {
    serde_json::to_string(&clip_to_record(clip)).expect("clip records serialize")
}

/// Builds a unit quaternion from (w, x, y, z), renormalizing small drift.
pub fn unit_quat(w: f64, x: f64, y: f64, z: f64) -> Result<Quat> {
    if ![w, x, y, z].iter().all(|v| v.is_finite()) {
        return Err(Error::Value("non-finite quaternion".into()));
    }
    let q = Quaternion::new(w, x, y, z);
    let n = q.norm();
    if (n - 1.0).abs() > RENORMALIZE_LIMIT {
        return Err(Error::Value(format!("quaternion norm {n} is not unit")));
    }
    if (n - 1.0).abs() <= 1e-12 {
        // already unit: keep the exact bits so files round-trip unchanged
        return Ok(Quat::new_unchecked(q));
    }
    Ok(Quat::new_normalize(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_JOINTS: &str = r#"{
        "fps": 30,
        "skeleton": {"joints": [
            {"name": "root", "parent": null, "offset": [0, 0, 0]},
            {"name": "head", "parent": 0, "offset": [0, 1.5, 0]}
        ]},
        "frames": [
            {"root_pos": [0, 0, 0], "rotations": [[1, 0, 0, 0], [1, 0, 0, 0]]},
            {"root_pos": [0, 0, 1], "rotations": [[1, 0, 0, 0], [1, 0, 0, 0]]}
        ],
        "source_id": "two"
    }"#;

    #[test]
    fn loads_identity_clip() {
        let c = parse_motion_json(TWO_JOINTS).unwrap();
        assert_eq!(c.frame_count(), 2);
        assert_eq!(c.fps(), 30.0);
        for f in c.frames() {
            for q in &f.rotations {
                assert_eq!([q.w, q.i, q.j, q.k], [1.0, 0.0, 0.0, 0.0]);
            }
        }
        assert_eq!(c.skeleton().salient_names(), vec!["root", "head"]);
    }

    #[test]
    fn nan_root_is_a_value_error() {
        let text = TWO_JOINTS.replacen("\"root_pos\": [0, 0, 1]", "\"root_pos\": [NaN, 0, 1]", 1);
        assert!(matches!(parse_motion_json(&text), Err(Error::Value(_))));
    }

    #[test]
    fn malformed_and_missing() {
        assert!(matches!(parse_motion_json("{ not json"), Err(Error::Parse(_))));
        let no_frames = r#"{"fps": 30, "skeleton": {"joints": [{"name":"r","offset":[0,0,0]}]}, "source_id": "x"}"#;
        assert!(matches!(parse_motion_json(no_frames), Err(Error::Schema(_))));
        let wrong_count = TWO_JOINTS.replacen("[[1, 0, 0, 0], [1, 0, 0, 0]]", "[[1, 0, 0, 0]]", 1);
        assert!(matches!(parse_motion_json(&wrong_count), Err(Error::Schema(_))));
    }

    #[test]
    fn parent_by_name_and_round_trip() {
        let text = TWO_JOINTS.replace("\"parent\": 0", "\"parent\": \"root\"");
        let c = parse_motion_json(&text).unwrap();
        assert_eq!(c.skeleton().joints()[1].parent, Some(0));
        let again = parse_motion_json(&motion_to_json(&c)).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn nonfinite_tokens_inside_strings_are_untouched() {
        assert_eq!(
            quote_nonfinite_tokens(r#"{"a":"NaN","b":NaN}"#),
            r#"{"a":"NaN","b":"NaN"}"#
        );
    }
}
