//! End-to-end wiring: analyze speech, build (or reuse) the motion graph,
//! pick a node per phrase, and stitch the result.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{build_graph, load_graph, save_graph, MotionGraph, SigmaPolicy, TransitionParams};
use crate::motion::{load_motion_clip, motion_to_json, MotionFormat};
use crate::optimizer::{synthesize_path, CostWeights, SynthesisPath};
use crate::segmentation::{ingest_semantic_clip, segment_long_clip, MotionSegment, SegmentationParams};
use crate::speech::{
    load_script, onset_envelope, read_wav, split_phrases, tag_phrases, Phrase, RhythmCurve, SemanticLexicon,
    DEFAULT_BREAKS, DEFAULT_MAX_GAP_SECONDS,
};
use crate::stitch::{assemble_detailed, Assembly, StitchParams};

pub const DEFAULT_HOP_SECONDS: f64 = 0.04;

/// Edge threshold as written in a config: a number or `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSetting {
    Value(f64),
    Keyword(String),
}

impl Default for SigmaSetting {
    fn default() -> Self {
        SigmaSetting::Keyword("auto".into())
    }
}

impl SigmaSetting {
    pub fn policy(&self) -> Result<SigmaPolicy> {
        match self {
            SigmaSetting::Value(v) => SigmaPolicy::parse(&v.to_string()),
            SigmaSetting::Keyword(s) => SigmaPolicy::parse(s),
        }
    }

    /// A CLI flag value: a number, or a keyword such as `auto`.
    pub fn from_flag(s: &str) -> Self {
        match s.trim().parse::<f64>() {
            Ok(v) => SigmaSetting::Value(v),
            Err(_) => SigmaSetting::Keyword(s.trim().to_string()),
        }
    }

    fn canonical(&self) -> String {
        match self {
            SigmaSetting::Value(v) => format!("{v:?}"),
            SigmaSetting::Keyword(s) => s.to_ascii_lowercase(),
        }
    }
}

fn default_hop() -> f64 {
    DEFAULT_HOP_SECONDS
}

fn default_gap() -> f64 {
    DEFAULT_MAX_GAP_SECONDS
}

/// Pipeline configuration. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub database_dir: PathBuf,
    #[serde(default)]
    pub semantic_manifest: Option<PathBuf>,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub weights: Option<PathBuf>,
    #[serde(default)]
    pub stitch: Option<PathBuf>,
    #[serde(default)]
    pub sigma: SigmaSetting,
    pub script: PathBuf,
    pub wav: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "default_hop")]
    pub hop_seconds: f64,
    #[serde(default = "default_gap")]
    pub max_gap_seconds: f64,
    #[serde(default)]
    pub segmentation: SegmentationParams,
    #[serde(default)]
    pub transition: TransitionParams,
    #[serde(default)]
    pub random_seed: u64,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        cfg.resolve_relative_to(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.database_dir);
        fix(&mut self.script);
        fix(&mut self.wav);
        fix(&mut self.output_dir);
        for p in [
            &mut self.semantic_manifest,
            &mut self.lexicon,
            &mut self.weights,
            &mut self.stitch,
            &mut self.cache_dir,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Checks that every input exists.
    pub fn validate(&self) -> Result<()> {
        if !self.database_dir.is_dir() {
            return Err(Error::Value(format!(
                "database dir {} does not exist",
                self.database_dir.display()
            )));
        }
        let files = [
            Some(&self.script),
            Some(&self.wav),
            self.semantic_manifest.as_ref(),
            self.lexicon.as_ref(),
            self.weights.as_ref(),
            self.stitch.as_ref(),
        ];
        for p in files.into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::Value(format!("input file {} does not exist", p.display())));
            }
        }
        self.sigma.policy()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Analyze,
    BuildGraph,
    Synthesize,
    Render,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Analyze => "analyze",
            Stage::BuildGraph => "build-graph",
            Stage::Synthesize => "synthesize",
            Stage::Render => "render",
            Stage::Write => "write",
        })
    }
}

/// A library error tagged with the pipeline stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

fn motion_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && MotionFormat::from_path(p).is_some())
        .collect();
    files.sort();
    Ok(files)
}

/// Loads and segments every `.json`/`.bvh` clip in `dir`, in file-name order.
pub fn load_database(dir: &Path, params: &SegmentationParams) -> Result<Vec<MotionSegment>> {
    let mut out = Vec::new();
    for path in motion_files(dir)? {
        let format = MotionFormat::from_path(&path).expect("filtered by extension");
        let clip = load_motion_clip(&path, format)?;
        out.extend(segment_long_clip(&clip, params)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub tag: String,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn manifest_clip_path(manifest: &Path, entry: &ManifestEntry) -> PathBuf {
    if entry.path.is_relative() {
        manifest.parent().unwrap_or(Path::new(".")).join(&entry.path)
    } else {
        entry.path.clone()
    }
}

/// Loads the manually tagged semantic clips listed in a manifest, one node each.
pub fn load_semantic_segments(manifest: &Path, lexicon: &SemanticLexicon) -> Result<Vec<MotionSegment>> {
    read_manifest(manifest)?
        .iter()
        .map(|entry| {
            let path = manifest_clip_path(manifest, entry);
            let format = MotionFormat::from_path(&path)
                .ok_or_else(|| Error::Value(format!("{}: unknown motion format", path.display())))?;
            let clip = load_motion_clip(&path, format)?;
            ingest_semantic_clip(&clip, &entry.tag, lexicon)
        })
        .collect()
}

/// Everything the graph depends on, for cache keys.
pub struct GraphInputs<'a> {
    pub database_dir: &'a Path,
    pub semantic_manifest: Option<&'a Path>,
    pub lexicon: &'a SemanticLexicon,
    pub sigma: &'a SigmaSetting,
    pub segmentation: &'a SegmentationParams,
    pub transition: &'a TransitionParams,
}

fn hash_file(h: &mut Sha256, label: &str, path: &Path) -> Result<()> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    h.update(label.as_bytes());
    h.update((bytes.len() as u64).to_le_bytes());
    h.update(&bytes);
    Ok(())
}

/// Hex SHA-256 over the database contents and every graph parameter.
pub fn graph_cache_key(inputs: &GraphInputs) -> Result<String> {
    let mut h = Sha256::new();
    h.update(b"talkmotion-graph-1\0");
    for p in motion_files(inputs.database_dir)? {
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        hash_file(&mut h, &format!("db:{name}\0"), &p)?;
    }
    if let Some(m) = inputs.semantic_manifest {
        hash_file(&mut h, "manifest\0", m)?;
        for entry in read_manifest(m)? {
            hash_file(
                &mut h,
                &format!("semantic:{}\0", entry.tag),
                &manifest_clip_path(m, &entry),
            )?;
        }
    }
    let params = serde_json::json!({
        "lexicon": inputs.lexicon,
        "sigma": inputs.sigma.canonical(),
        "segmentation": inputs.segmentation,
        "transition": inputs.transition,
    });
    h.update(params.to_string().as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Segments the database, adds semantic nodes, and builds the graph.
pub fn build_database_graph(inputs: &GraphInputs) -> Result<MotionGraph> {
    let mut segments = load_database(inputs.database_dir, inputs.segmentation)?;
    if segments.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if let Some(m) = inputs.semantic_manifest {
        segments.extend(load_semantic_segments(m, inputs.lexicon)?);
    }
    build_graph(segments, inputs.sigma.policy()?, *inputs.transition)
}

/// Phrases of a timed script, tagged with the lexicon.
pub fn analyze_script(script: &Path, lexicon: &SemanticLexicon, max_gap_seconds: f64) -> Result<Vec<Phrase>> {
    let words = load_script(script)?;
    let mut phrases = split_phrases(&words, max_gap_seconds, &DEFAULT_BREAKS)?;
    tag_phrases(&mut phrases, lexicon);
    Ok(phrases)
}

/// The onset envelope of the speech restricted to each phrase.
pub fn phrase_rhythms(wav: &Path, phrases: &[Phrase], hop_seconds: f64) -> Result<Vec<RhythmCurve>> {
    let audio = read_wav(wav)?;
    let envelope = onset_envelope(&audio, hop_seconds)?;
    Ok(phrases
        .iter()
        .map(|p| envelope.slice_seconds(p.start_seconds, p.end_seconds))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseReport {
    pub index: usize,
    pub text: String,
    pub start_seconds: f64,
    pub end_seconds: f64,
    pub semantic_tag: Option<String>,
    pub segment_id: String,
    pub node_semantic_tag: Option<String>,
    pub transition_cost: f64,
    pub phrase_cost: f64,
    pub missing_edge: bool,
    pub semantic_fallback: bool,
    pub target_seconds: f64,
    pub warped_seconds: f64,
    pub time_stretch_clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub total_cost: f64,
    pub sigma: f64,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub output_frames: usize,
    pub output_seconds: f64,
    pub phrase_span_seconds: f64,
    pub phrases: Vec<PhraseReport>,
    /// Human-readable fallback and clamping notices, in phrase order.
    pub events: Vec<String>,
}

pub fn build_report(graph: &MotionGraph, phrases: &[Phrase], path: &SynthesisPath, assembly: &Assembly) -> Report {
    let mut events = Vec::new();
    let rows = phrases
        .iter()
        .zip(&path.assignments)
        .zip(&path.per_phrase_costs)
        .zip(&assembly.placements)
        .map(|(((p, id), c), pl)| {
            if c.semantic_fallback {
                events.push(format!(
                    "phrase {}: no node tagged {:?}, used a non-semantic node",
                    p.index,
                    p.semantic_tag.as_deref().unwrap_or_default()
                ));
            }
            if c.missing_edge {
                events.push(format!(
                    "phrase {}: no graph edge into {id}, transition recomputed",
                    p.index
                ));
            }
            if pl.clamped {
                events.push(format!(
                    "phrase {}: time stretch clamped ({:.3} s slot, {:.3} s used)",
                    p.index, pl.target_seconds, pl.warped_seconds
                ));
            }
            PhraseReport {
                index: p.index,
                text: p.text.clone(),
                start_seconds: p.start_seconds,
                end_seconds: p.end_seconds,
                semantic_tag: p.semantic_tag.clone(),
                segment_id: id.clone(),
                node_semantic_tag: graph.node(id).and_then(|n| n.semantic_tag.clone()),
                transition_cost: c.transition,
                phrase_cost: c.semantic_or_rhythm,
                missing_edge: c.missing_edge,
                semantic_fallback: c.semantic_fallback,
                target_seconds: pl.target_seconds,
                warped_seconds: pl.warped_seconds,
                time_stretch_clamped: pl.clamped,
            }
        })
        .collect();
    Report {
        total_cost: path.total_cost,
        sigma: graph.sigma(),
        graph_nodes: graph.nodes().len(),
        graph_edges: graph.edges().len(),
        output_frames: assembly.clip.frame_count(),
        output_seconds: assembly.clip.duration(),
        phrase_span_seconds: phrases.last().map(|p| p.end_seconds).unwrap_or(0.0)
            - phrases.first().map(|p| p.start_seconds).unwrap_or(0.0),
        phrases: rows,
        events,
    }
}

/// Wall-clock timings, kept out of the report so that it stays reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub analyze_ms: f64,
    pub build_graph_ms: f64,
    pub synthesize_ms: f64,
    pub render_ms: f64,
    pub graph_cache_hit: bool,
    pub graph_cache_key: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub motion_path: PathBuf,
    pub report_path: PathBuf,
    pub path_path: PathBuf,
    pub timings_path: PathBuf,
    pub report: Report,
    pub timings: Timings,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn load_or_default<T: Default>(path: Option<&PathBuf>, load: impl Fn(&Path) -> Result<T>) -> Result<T> {
    path.map(|p| load(p)).transpose().map(Option::unwrap_or_default)
}

/// Runs analyze, build-graph (reusing a cached graph when the inputs hash
/// matches), synthesize and render, writing `motion.json`, `path.json`,
/// `report.json` and `timings.json` into the output directory.
pub fn run_pipeline(config: &PipelineConfig) -> std::result::Result<PipelineOutput, StageError> {
    config.validate().at(Stage::Config)?;
    let lexicon = match &config.lexicon {
        Some(p) => SemanticLexicon::load(p),
        None => Ok(SemanticLexicon::default_lexicon()),
    }
    .at(Stage::Config)?;
    let weights = load_or_default(config.weights.as_ref(), CostWeights::load).at(Stage::Config)?;
    let stitch = load_or_default(config.stitch.as_ref(), StitchParams::load).at(Stage::Config)?;
    stitch.validate().at(Stage::Config)?;

    let t = Instant::now();
    let phrases = analyze_script(&config.script, &lexicon, config.max_gap_seconds).at(Stage::Analyze)?;
    if phrases.is_empty() {
        return Err(Error::Value("script has no words".into())).at(Stage::Analyze);
    }
    let rhythms = phrase_rhythms(&config.wav, &phrases, config.hop_seconds).at(Stage::Analyze)?;
    let analyze_ms = ms(t);

    let t = Instant::now();
    let inputs = GraphInputs {
        database_dir: &config.database_dir,
        semantic_manifest: config.semantic_manifest.as_deref(),
        lexicon: &lexicon,
        sigma: &config.sigma,
        segmentation: &config.segmentation,
        transition: &config.transition,
    };
    let (graph, cache_hit, cache_key) = match &config.cache_dir {
        Some(dir) => {
            let key = graph_cache_key(&inputs).at(Stage::BuildGraph)?;
            let file = dir.join(format!("graph-{}.json", &key[..16]));
            if file.is_file() {
                (load_graph(&file).at(Stage::BuildGraph)?, true, Some(key))
            } else {
                let g = build_database_graph(&inputs).at(Stage::BuildGraph)?;
                fs::create_dir_all(dir)
                    .map_err(|e| Error::io(dir, e))
                    .at(Stage::BuildGraph)?;
                save_graph(&g, &file).at(Stage::BuildGraph)?;
                (g, false, Some(key))
            }
        }
        None => (build_database_graph(&inputs).at(Stage::BuildGraph)?, false, None),
    };
    let build_graph_ms = ms(t);

    let t = Instant::now();
    let path = synthesize_path(&graph, &phrases, &rhythms, &weights).at(Stage::Synthesize)?;
    let synthesize_ms = ms(t);

    let t = Instant::now();
    let assembly = assemble_detailed(&path, &graph, &phrases, &stitch).at(Stage::Render)?;
    let render_ms = ms(t);

    let report = build_report(&graph, &phrases, &path, &assembly);
    let timings = Timings {
        analyze_ms,
        build_graph_ms,
        synthesize_ms,
        render_ms,
        graph_cache_hit: cache_hit,
        graph_cache_key: cache_key,
    };
    let out = &config.output_dir;
    fs::create_dir_all(out)
        .map_err(|e| Error::io(out, e))
        .at(Stage::Write)?;
    let output = PipelineOutput {
        motion_path: out.join("motion.json"),
        report_path: out.join("report.json"),
        path_path: out.join("path.json"),
        timings_path: out.join("timings.json"),
        report,
        timings,
    };
    fs::write(&output.motion_path, motion_to_json(&assembly.clip))
        .map_err(|e| Error::io(&output.motion_path, e))
        .at(Stage::Write)?;
    write_json(&output.path_path, &path).at(Stage::Write)?;
    write_json(&output.report_path, &output.report).at(Stage::Write)?;
    write_json(&output.timings_path, &output.timings).at(Stage::Write)?;
    Ok(output)
}
