//! BVH (Biovision hierarchy) ingestion.
//!
//! Rotation channels are applied in the order the file lists them, so the
//! common `Zrotation Xrotation Yrotation` layout yields `q = qz * qx * qy`.
//! Angles are degrees. `End Site` blocks become leaf joints named
//! `<parent>_End` with identity rotation. Position channels on non-root
//! joints are read and ignored. Offsets keep the file's length unit.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::motion::{Frame, Joint, MotionClip, Quat, Skeleton, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Channel {
    Pos(usize),
    Rot(usize),
}

struct Tokens<'a> {
    inner: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.inner
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of BVH file".into()))
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let got = self.next()?;
        if got.eq_ignore_ascii_case(want) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {want:?}, found {got:?}")))
        }
    }

    fn number(&mut self) -> Result<f64> {
        let tok = self.next()?;
        let v: f64 = tok
            .parse()
            .map_err(|_| Error::Parse(format!("expected a number, found {tok:?}")))?;
        if !v.is_finite() {
            return Err(Error::Value(format!("non-finite number {tok:?}")));
        }
        Ok(v)
    }

    fn peek(&mut self) -> Option<&&'a str> {
        self.inner.peek()
    }
}

struct Hierarchy {
    joints: Vec<Joint>,
    /// (joint index, channel) in file order.
    channels: Vec<(usize, Channel)>,
}

fn parse_channel(name: &str) -> Result<Channel> {
    let lower = name.to_ascii_lowercase();
    let axis = match lower.chars().next() {
        Some('x') => 0,
        Some('y') => 1,
        Some('z') => 2,
        _ => return Err(Error::Parse(format!("unknown channel {name:?}"))),
    };
    match &lower[1..] {
        "position" => Ok(Channel::Pos(axis)),
        "rotation" => Ok(Channel::Rot(axis)),
        _ => Err(Error::Parse(format!("unknown channel {name:?}"))),
    }
}

fn parse_joint(tok: &mut Tokens<'_>, name: String, parent: Option<usize>, h: &mut Hierarchy) -> Result<()> {
    tok.expect("{")?;
    tok.expect("OFFSET")?;
    let offset = Vec3::new(tok.number()?, tok.number()?, tok.number()?);
    let index = h.joints.len();
    h.joints.push(Joint::new(name.clone(), parent, offset));

    if tok.peek().is_some_and(|t| t.eq_ignore_ascii_case("CHANNELS")) {
        tok.next()?;
        let count = tok.number()?;
        if count < 0.0 || count.fract() != 0.0 {
            return Err(Error::Parse(format!("bad channel count {count}")));
        }
        for _ in 0..count as usize {
            let ch = parse_channel(tok.next()?)?;
            h.channels.push((index, ch));
        }
    }

    loop {
        let t = tok.next()?;
        if t == "}" {
            return Ok(());
        }
        if t.eq_ignore_ascii_case("JOINT") {
            let child = tok.next()?.to_string();
            parse_joint(tok, child, Some(index), h)?;
        } else if t.eq_ignore_ascii_case("End") {
            tok.expect("Site")?;
            tok.expect("{")?;
            tok.expect("OFFSET")?;
            let off = Vec3::new(tok.number()?, tok.number()?, tok.number()?);
            tok.expect("}")?;
            h.joints.push(Joint::new(format!("{name}_End"), Some(index), off));
        } else {
            return Err(Error::Parse(format!("unexpected token {t:?} in joint {name:?}")));
        }
    }
}

fn axis_quat(axis: usize, degrees: f64) -> Quat {
    let a = match axis {
        0 => Vec3::x_axis(),
        1 => Vec3::y_axis(),
        _ => Vec3::z_axis(),
    };
    Quat::from_axis_angle(&a, degrees.to_radians())
}

pub fn parse_bvh(text: &str, source_id: &str) -> Result<MotionClip> {
    let mut tok = Tokens {
        inner: text.split_whitespace().peekable(),
    };
    tok.expect("HIERARCHY")?;
    tok.expect("ROOT")?;
    let root = tok.next()?.to_string();
    let mut h = Hierarchy {
        joints: Vec::new(),
        channels: Vec::new(),
    };
    parse_joint(&mut tok, root, None, &mut h)?;

    tok.expect("MOTION")?;
    tok.expect("Frames:")?;
    let n_frames = tok.number()?;
    if n_frames < 0.0 || n_frames.fract() != 0.0 {
        return Err(Error::Parse(format!("bad frame count {n_frames}")));
    }
    let n_frames = n_frames as usize;
    tok.expect("Frame")?;
    tok.expect("Time:")?;
    let frame_time = tok.number()?;
    if frame_time <= 0.0 {
        return Err(Error::Value(format!("frame time must be positive, got {frame_time}")));
    }

    let n_joints = h.joints.len();
    let mut frames = Vec::with_capacity(n_frames);
    for _ in 0..n_frames {
        let mut root_position = Vec3::zeros();
        let mut rotations = vec![Quat::identity(); n_joints];
        for &(joint, ch) in &h.channels {
            let v = tok.number()?;
            match ch {
                Channel::Pos(axis) if joint == 0 => root_position[axis] = v,
                Channel::Pos(_) => {}
                Channel::Rot(axis) => rotations[joint] *= axis_quat(axis, v),
            }
        }
        for q in &mut rotations {
            q.renormalize();
        }
        frames.push(Frame {
            root_position,
            rotations,
        });
    }
    if let Some(extra) = tok.peek() {
        return Err(Error::Parse(format!("trailing data after frames: {extra:?}")));
    }

    let skeleton = Skeleton::new(h.joints, None)?;
    MotionClip::new(Arc::new(skeleton), 1.0 / frame_time, frames, source_id)
}
