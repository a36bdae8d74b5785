//! Procedural test database: sinusoidal body motion on a 17-joint skeleton,
//! tagged semantic clips, a timed script and a tone-burst recording whose
//! onset strength follows chosen motion segments.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{Frame, Joint, MotionClip, Quat, Skeleton, Vec3};
use crate::pipeline::{ManifestEntry, DEFAULT_HOP_SECONDS};
use crate::segmentation::{segment_long_clip, MotionSegment, SegmentationParams};
use crate::speech::{write_wav, PcmAudio, TimedWord};

pub const FIXTURE_FPS: f64 = 25.0;
pub const FIXTURE_SAMPLE_RATE: u32 = 16000;
const PHRASE_GAP: f64 = 0.3;
const LEAD_IN: f64 = 0.3;

/// Tags given to semantic clips, in order, with a keyword phrase for each.
pub const SEMANTIC_SCRIPT: [(&str, &str); 8] = [
    ("left", "now please turn to the left"),
    ("number_three", "there are three things"),
    ("greeting", "hello and welcome everyone"),
    ("right", "look over to the right"),
    ("thanks", "thanks for watching today"),
    ("number_two", "we have two options"),
    ("farewell", "goodbye for now"),
    ("negation", "that is not the plan"),
];

const FILLER: [&str; 24] = [
    "so", "we", "can", "talk", "about", "this", "idea", "today", "and", "how", "it", "works", "for", "everyone", "in",
    "our", "team", "with", "simple", "steps", "that", "make", "sense", "here",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureOptions {
    pub seed: u64,
    pub n_clips: usize,
    pub n_semantic: usize,
    pub n_phrases: usize,
    pub clip_seconds: f64,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        FixtureOptions {
            seed: 0,
            n_clips: 4,
            n_semantic: 2,
            n_phrases: 8,
            clip_seconds: 8.0,
        }
    }
}

/// What each phrase of the script was built to match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseDesign {
    pub phrase_index: usize,
    /// Segment whose strength curve shaped the phrase's bursts.
    pub rhythm_segment: Option<String>,
    pub semantic_tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureManifest {
    pub options: FixtureOptions,
    /// Motion clip files (database and semantic), relative to the fixture root.
    pub motion_files: Vec<PathBuf>,
    pub database_dir: PathBuf,
    pub semantic_manifest: Option<PathBuf>,
    pub script: PathBuf,
    pub wav: PathBuf,
    pub config: PathBuf,
    pub phrases: Vec<PhraseDesign>,
}

pub fn fixture_skeleton() -> Skeleton {
    let j = |name: &str, parent: Option<usize>, x: f64, y: f64, z: f64| Joint::new(name, parent, Vec3::new(x, y, z));
    Skeleton::new(
        vec![
            j("Hips", None, 0.0, 0.95, 0.0),
            j("Spine", Some(0), 0.0, 0.1, 0.0),
            j("Chest", Some(1), 0.0, 0.25, 0.0),
            j("Neck", Some(2), 0.0, 0.2, 0.0),
            j("Head", Some(3), 0.0, 0.12, 0.0),
            j("LeftArm", Some(2), 0.18, 0.15, 0.0),
            j("LeftForeArm", Some(5), 0.28, 0.0, 0.0),
            j("LeftHand", Some(6), 0.25, 0.0, 0.0),
            j("RightArm", Some(2), -0.18, 0.15, 0.0),
            j("RightForeArm", Some(8), -0.28, 0.0, 0.0),
            j("RightHand", Some(9), -0.25, 0.0, 0.0),
            j("LeftUpLeg", Some(0), 0.1, -0.05, 0.0),
            j("LeftLeg", Some(11), 0.0, -0.45, 0.0),
            j("LeftFoot", Some(12), 0.0, -0.42, 0.0),
            j("RightUpLeg", Some(0), -0.1, -0.05, 0.0),
            j("RightLeg", Some(14), 0.0, -0.45, 0.0),
            j("RightFoot", Some(15), 0.0, -0.42, 0.0),
        ],
        None,
    )
    .expect("fixture skeleton is valid")
}

fn rot(axis: usize, angle: f64) -> Quat {
    let a = match axis {
        0 => Vec3::x_axis(),
        1 => Vec3::y_axis(),
        _ => Vec3::z_axis(),
    };
    Quat::from_axis_angle(&a, angle)
}

/// Resting pose with the arms lowered from the T-pose.
fn rest_rotations() -> Vec<Quat> {
    let mut r = vec![Quat::identity(); 17];
    r[5] = rot(2, -1.2);
    r[8] = rot(2, 1.2);
    r
}

/// Gesturing clip: every moving joint follows a base sinusoid plus a
/// second harmonic shared across the clip, so motion strength dips a few
/// times per period with bumps of clip-specific shape.
pub fn sinusoidal_clip(rng: &mut impl Rng, skeleton: &Arc<Skeleton>, id: &str, seconds: f64) -> Result<MotionClip> {
    let n = (seconds * FIXTURE_FPS).round() as usize;
    let freq = rng.random_range(0.35..0.85);
    // (joint, axis, amplitude, phase)
    let channels: Vec<(usize, usize, f64, f64)> = [
        (1, 1, 0.15),
        (2, 0, 0.08),
        (4, 1, 0.25),
        (5, 2, 0.6),
        (6, 1, 0.7),
        (8, 2, 0.6),
        (9, 1, 0.7),
        (11, 0, 0.05),
        (14, 0, 0.05),
    ]
    .iter()
    .map(|&(j, axis, amp)| (j, axis, amp * rng.random_range(0.5..1.2), rng.random_range(-0.3..0.3)))
    .collect();
    let sway = rng.random_range(0.02..0.06);
    let harmonic = rng.random_range(0.25..0.6);
    let harmonic_phase = rng.random_range(0.0..std::f64::consts::TAU);
    let start_phase = rng.random_range(0.0..std::f64::consts::TAU);
    let rest = rest_rotations();
    let frames = (0..n)
        .map(|t| {
            let phase = start_phase + std::f64::consts::TAU * freq * t as f64 / FIXTURE_FPS;
            let mut rotations = rest.clone();
            for &(j, axis, amp, off) in &channels {
                rotations[j] *= rot(
                    axis,
                    amp * ((phase + off).sin() + harmonic * (2.0 * phase + harmonic_phase).sin()),
                );
            }
            Frame {
                root_position: Vec3::new(sway * (0.5 * phase).sin(), 0.0, 0.0),
                rotations,
            }
        })
        .collect();
    MotionClip::new(skeleton.clone(), FIXTURE_FPS, frames, id)
}

/// Raise-hold-lower gesture of one arm, distinct per tag index.
pub fn semantic_clip(rng: &mut impl Rng, skeleton: &Arc<Skeleton>, id: &str, tag_index: usize) -> Result<MotionClip> {
    let seconds = rng.random_range(1.4..2.0);
    let n = (seconds * FIXTURE_FPS).round() as usize;
    let (arm, sign) = if tag_index.is_multiple_of(2) {
        (5, 1.0)
    } else {
        (8, -1.0)
    };
    let lift = 0.9 + 0.15 * (tag_index % 4) as f64;
    let wave = 0.2 * (tag_index / 2 % 3) as f64;
    let rest = rest_rotations();
    let frames = (0..n)
        .map(|t| {
            let u = t as f64 / (n - 1) as f64;
            let env = (u / 0.3).min(1.0).min((1.0 - u) / 0.3);
            let mut rotations = rest.clone();
            rotations[arm] *= rot(2, sign * lift * env);
            rotations[arm + 1] = rot(1, wave * env * (12.0 * u).sin());
            Frame {
                root_position: Vec3::zeros(),
                rotations,
            }
        })
        .collect();
    MotionClip::new(skeleton.clone(), FIXTURE_FPS, frames, id)
}

const BURST_TONES: [f64; 5] = [700.0, 1300.0, 1900.0, 2500.0, 3100.0];

/// Short decaying tone burst.
fn add_burst(samples: &mut [f64], at: usize, gain: f64, tone: f64) {
    let sr = FIXTURE_SAMPLE_RATE as f64;
    for k in 0..160 {
        if at + k >= samples.len() {
            break;
        }
        let x = k as f64 / sr;
        samples[at + k] += gain * (2.0 * std::f64::consts::PI * tone * x).sin() * (-(k as f64) / 32.0).exp();
    }
}

/// One burst per frame of `segment` stretched over `[start, start + duration]`,
/// with gain following the segment's strength. Consecutive bursts cycle
/// through distinct pitches so each registers as a fresh onset.
pub fn burst_times(segment: &MotionSegment, start: f64, duration: f64) -> Vec<(f64, f64)> {
    let v = &segment.strength.values;
    let span = (v.len() - 1) as f64;
    v.iter()
        .enumerate()
        .filter(|(_, g)| **g > 0.02)
        .map(|(t, g)| (start + duration * t as f64 / span, *g))
        .collect()
}

fn words_for(text: &str, start: f64, duration: f64, punct: &str) -> Vec<TimedWord> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let slot = duration / tokens.len() as f64;
    tokens
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let s = start + slot * i as f64;
            let last = i + 1 == tokens.len();
            TimedWord {
                word: if last { format!("{w}{punct}") } else { w.to_string() },
                start: s,
                end: if last { start + duration } else { s + slot - 0.02 },
            }
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("fixture types serialize") + "\n"
}

/// Writes a complete synthetic pipeline input under `root`. Identical
/// options produce identical bytes.
pub fn generate_fixture(root: &Path, opts: &FixtureOptions) -> Result<FixtureManifest> {
    if opts.n_clips == 0 {
        return Err(Error::Value("a fixture needs at least one database clip".into()));
    }
    if opts.n_phrases == 0 {
        return Err(Error::Value("a fixture needs at least one phrase".into()));
    }
    if opts.n_semantic > SEMANTIC_SCRIPT.len() {
        return Err(Error::Value(format!(
            "at most {} semantic clips",
            SEMANTIC_SCRIPT.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let skeleton = Arc::new(fixture_skeleton());
    let mut motion_files = Vec::new();

    let mut database = Vec::with_capacity(opts.n_clips);
    for i in 0..opts.n_clips {
        let id = format!("clip_{i:02}");
        let clip = sinusoidal_clip(&mut rng, &skeleton, &id, opts.clip_seconds)?;
        let rel = PathBuf::from("db").join(format!("{id}.json"));
        write_text(&root.join(&rel), &crate::motion::motion_to_json(&clip))?;
        motion_files.push(rel);
        database.push(clip);
    }

    let mut manifest = Vec::new();
    for (k, (tag, _)) in SEMANTIC_SCRIPT.iter().take(opts.n_semantic).enumerate() {
        let id = format!("sem_{k:02}_{tag}");
        let clip = semantic_clip(&mut rng, &skeleton, &id, k)?;
        let rel = PathBuf::from("semantic").join(format!("{id}.json"));
        write_text(&root.join(&rel), &crate::motion::motion_to_json(&clip))?;
        motion_files.push(rel);
        manifest.push(ManifestEntry {
            path: PathBuf::from(format!("{id}.json")),
            tag: tag.to_string(),
        });
    }
    let manifest_rel = PathBuf::from("semantic").join("manifest.json");
    write_text(&root.join(&manifest_rel), &to_json(&manifest))?;

    let params = SegmentationParams::default();
    let segmented = database
        .iter()
        .map(|c| segment_long_clip(c, &params))
        .collect::<Result<Vec<_>>>()?;

    let mut words = Vec::new();
    let mut designs = Vec::with_capacity(opts.n_phrases);
    let mut bursts: Vec<(f64, f64)> = Vec::new();
    let mut t = LEAD_IN;
    let mut semantic_used = 0;
    for i in 0..opts.n_phrases {
        let punct = if i + 1 == opts.n_phrases { "." } else { "," };
        if opts.n_semantic > 0 && i % 3 == 1 {
            let (tag, text) = SEMANTIC_SCRIPT[semantic_used % opts.n_semantic];
            semantic_used += 1;
            let duration = rng.random_range(1.4..2.0);
            words.extend(words_for(text, t, duration, punct));
            designs.push(PhraseDesign {
                phrase_index: i,
                rhythm_segment: None,
                semantic_tag: Some(tag.to_string()),
            });
            t += duration + PHRASE_GAP;
            continue;
        }
        let segs = &segmented[i % opts.n_clips];
        let pick = segs
            .iter()
            .enumerate()
            .max_by_key(|(k, s)| (s.len(), std::cmp::Reverse(*k)))
            .map(|(_, s)| s)
            .expect("segmentation yields at least one segment");
        let source = pick.clip.duration();
        let duration = (source * rng.random_range(0.9..1.15) - PHRASE_GAP).max(0.8);
        let n_words = rng.random_range(3..7);
        let text: Vec<&str> = (0..n_words)
            .map(|_| FILLER[rng.random_range(0..FILLER.len())])
            .collect();
        words.extend(words_for(&text.join(" "), t, duration, punct));
        bursts.extend(burst_times(pick, t, duration));
        designs.push(PhraseDesign {
            phrase_index: i,
            rhythm_segment: Some(pick.segment_id.clone()),
            semantic_tag: None,
        });
        t += duration + PHRASE_GAP;
    }

    let total = t + 0.5;
    let sr = FIXTURE_SAMPLE_RATE as f64;
    let mut signal = vec![0.0; (total * sr).ceil() as usize];
    for (k, (time, gain)) in bursts.into_iter().enumerate() {
        add_burst(
            &mut signal,
            (time * sr).round() as usize,
            12000.0 * gain,
            BURST_TONES[k % BURST_TONES.len()],
        );
    }
    let samples = signal
        .iter()
        .map(|v| v.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16)
        .collect();
    let wav_rel = PathBuf::from("speech.wav");
    write_wav(&root.join(&wav_rel), &PcmAudio::mono(samples, FIXTURE_SAMPLE_RATE))?;

    let script_rel = PathBuf::from("words.json");
    write_text(&root.join(&script_rel), &to_json(&words))?;

    let config = serde_json::json!({
        "database_dir": "db",
        "semantic_manifest": manifest_rel,
        "script": script_rel,
        "wav": wav_rel,
        "output_dir": "out",
        "cache_dir": "cache",
        "sigma": "auto",
        "hop_seconds": DEFAULT_HOP_SECONDS,
        "random_seed": opts.seed,
    });
    let config_rel = PathBuf::from("config.json");
    write_text(&root.join(&config_rel), &to_json(&config))?;

    let out = FixtureManifest {
        options: *opts,
        motion_files,
        database_dir: PathBuf::from("db"),
        semantic_manifest: Some(manifest_rel),
        script: script_rel,
        wav: wav_rel,
        config: config_rel,
        phrases: designs,
    };
    write_text(&root.join("fixture.json"), &to_json(&out))?;
    Ok(out)
}
