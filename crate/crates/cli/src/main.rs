use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use talkmotion::face::{
    articulation_correction, default_closure_channels, default_open_channels, lip_loss, read_blendshape_csv,
    read_phoneme_tsv, ssim_loss, PhonemeTimeline, SSIM_DELTA1, SSIM_DELTA2,
};
use talkmotion::fixture::{generate_fixture, FixtureOptions};
use talkmotion::graph::{load_graph, save_graph, TransitionParams};
use talkmotion::motion::save_motion_json;
use talkmotion::optimizer::{synthesize_path, CostWeights, SynthesisPath};
use talkmotion::pipeline::{
    analyze_script, build_database_graph, phrase_rhythms, run_pipeline, GraphInputs, PipelineConfig, SigmaSetting,
    StageError, DEFAULT_HOP_SECONDS,
};
use talkmotion::segmentation::SegmentationParams;
use talkmotion::speech::{Phrase, SemanticLexicon, DEFAULT_MAX_GAP_SECONDS};
use talkmotion::stitch::{assemble, StitchParams};
use talkmotion::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_PIPELINE: u8 = 3;

/// Speech-driven body animation from a motion graph.
#[derive(Parser)]
#[command(name = "talkmotion", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a motion database and write its transition graph.
    BuildGraph(BuildGraphArgs),
    /// Split a timed script into tagged phrases.
    Analyze(AnalyzeArgs),
    /// Choose one graph node per phrase.
    Synthesize(SynthesizeArgs),
    /// Stitch a node path into one motion clip.
    RenderPath(RenderPathArgs),
    /// Compare two blendshape sequences and show the closure correction.
    FaceCheck(FaceCheckArgs),
    /// Run every stage from a config file.
    Run(RunArgs),
    /// Write a synthetic database, script and recording.
    GenFixture(GenFixtureArgs),
}

#[derive(Args)]
struct BuildGraphArgs {
    #[arg(long)]
    db: PathBuf,
    /// Semantic clip manifest.
    #[arg(long)]
    semantic: Option<PathBuf>,
    /// Edge threshold: a number or `auto`.
    #[arg(long, default_value = "auto")]
    sigma: String,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    wav: PathBuf,
    #[arg(long)]
    script: PathBuf,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_GAP_SECONDS)]
    max_gap: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    phrases: PathBuf,
    #[arg(long)]
    wav: PathBuf,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_HOP_SECONDS)]
    hop: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderPathArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    path: PathBuf,
    #[arg(long)]
    phrases: PathBuf,
    #[arg(long)]
    stitch: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FaceCheckArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    phonemes: PathBuf,
    #[arg(long, default_value_t = 25.0)]
    fps: f64,
    /// Frames over which the closure correction ramps in and out.
    #[arg(long, default_value_t = 2)]
    ramp: usize,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    db: Option<PathBuf>,
    #[arg(long)]
    semantic: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    stitch: Option<PathBuf>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    wav: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Disable the graph cache.
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    hop: Option<f64>,
}

#[derive(Args)]
struct GenFixtureArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    clips: usize,
    #[arg(long, default_value_t = 2)]
    semantic: usize,
    #[arg(long, default_value_t = 8)]
    phrases: usize,
}

fn load_lexicon(path: Option<&Path>) -> talkmotion::Result<SemanticLexicon> {
    match path {
        Some(p) => SemanticLexicon::load(p),
        None => Ok(SemanticLexicon::default_lexicon()),
    }
}

fn read_phrases(path: &Path) -> Result<Vec<Phrase>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let phrases = serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    Ok(phrases)
}

fn write_pretty<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn build_graph_cmd(a: BuildGraphArgs) -> Result<()> {
    let lexicon = load_lexicon(a.lexicon.as_deref())?;
    let sigma = SigmaSetting::from_flag(&a.sigma);
    let inputs = GraphInputs {
        database_dir: &a.db,
        semantic_manifest: a.semantic.as_deref(),
        lexicon: &lexicon,
        sigma: &sigma,
        segmentation: &SegmentationParams::default(),
        transition: &TransitionParams::default(),
    };
    let graph = build_database_graph(&inputs)?;
    save_graph(&graph, &a.out)?;
    println!(
        "{} nodes, {} edges, sigma {}",
        graph.nodes().len(),
        graph.edges().len(),
        graph.sigma()
    );
    Ok(())
}

fn analyze_cmd(a: AnalyzeArgs) -> Result<()> {
    let lexicon = load_lexicon(a.lexicon.as_deref())?;
    let phrases = analyze_script(&a.script, &lexicon, a.max_gap)?;
    phrase_rhythms(&a.wav, &phrases, DEFAULT_HOP_SECONDS)?;
    write_pretty(&a.out, &phrases)?;
    let tagged = phrases.iter().filter(|p| p.semantic_tag.is_some()).count();
    println!("{} phrases, {tagged} semantic", phrases.len());
    Ok(())
}

fn synthesize_cmd(a: SynthesizeArgs) -> Result<()> {
    let graph = load_graph(&a.graph)?;
    let phrases = read_phrases(&a.phrases)?;
    let rhythms = phrase_rhythms(&a.wav, &phrases, a.hop)?;
    let weights = match &a.weights {
        Some(p) => CostWeights::load(p)?,
        None => CostWeights::default(),
    };
    let path = synthesize_path(&graph, &phrases, &rhythms, &weights)?;
    write_pretty(&a.out, &path)?;
    println!("total cost {}", path.total_cost);
    Ok(())
}

fn render_path_cmd(a: RenderPathArgs) -> Result<()> {
    let graph = load_graph(&a.graph)?;
    let path = SynthesisPath::load(&a.path)?;
    let phrases = read_phrases(&a.phrases)?;
    let params = match &a.stitch {
        Some(p) => StitchParams::load(p)?,
        None => StitchParams::default(),
    };
    let clip = assemble(&path, &graph, &phrases, &params)?;
    save_motion_json(&clip, &a.out)?;
    println!("{} frames at {} fps", clip.frame_count(), clip.fps());
    Ok(())
}

fn face_check_cmd(a: FaceCheckArgs) -> Result<()> {
    let pred = read_blendshape_csv(&a.pred, a.fps)?;
    let gt = read_blendshape_csv(&a.gt, a.fps)?;
    let intervals = read_phoneme_tsv(&a.phonemes)?;
    let timeline = PhonemeTimeline::from_intervals(&intervals, a.fps, pred.len());
    println!("lip_loss {}", lip_loss(&pred, &gt)?);
    println!("ssim_loss {}", ssim_loss(&pred, &gt, SSIM_DELTA1, SSIM_DELTA2)?);

    let corrected = articulation_correction(
        &pred,
        &timeline,
        &default_open_channels(),
        &default_closure_channels(),
        a.ramp,
    )?;
    let mut changed = 0;
    let mut max_change: f64 = 0.0;
    for (before, after) in pred.frames().iter().zip(corrected.frames()) {
        let d = before.iter().zip(after).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if d > 0.0 {
            changed += 1;
        }
        max_change = max_change.max(d);
    }
    println!("corrected_frames {changed}/{}", pred.len());
    println!("max_correction {max_change}");
    println!("corrected_lip_loss {}", lip_loss(&corrected, &gt)?);
    println!(
        "corrected_ssim_loss {}",
        ssim_loss(&corrected, &gt, SSIM_DELTA1, SSIM_DELTA2)?
    );
    Ok(())
}

fn run_cmd(a: RunArgs) -> Result<()> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    let cwd = std::env::current_dir()?;
    let abs = |p: PathBuf| if p.is_relative() { cwd.join(p) } else { p };
    if let Some(p) = a.db {
        cfg.database_dir = abs(p);
    }
    if let Some(p) = a.semantic {
        cfg.semantic_manifest = Some(abs(p));
    }
    if let Some(p) = a.lexicon {
        cfg.lexicon = Some(abs(p));
    }
    if let Some(p) = a.weights {
        cfg.weights = Some(abs(p));
    }
    if let Some(p) = a.stitch {
        cfg.stitch = Some(abs(p));
    }
    if let Some(s) = a.sigma {
        cfg.sigma = SigmaSetting::from_flag(&s);
    }
    if let Some(p) = a.script {
        cfg.script = abs(p);
    }
    if let Some(p) = a.wav {
        cfg.wav = abs(p);
    }
    if let Some(p) = a.out {
        cfg.output_dir = abs(p);
    }
    if let Some(p) = a.cache {
        cfg.cache_dir = Some(abs(p));
    }
    if a.no_cache {
        cfg.cache_dir = None;
    }
    if let Some(h) = a.hop {
        cfg.hop_seconds = h;
    }
    let out = run_pipeline(&cfg)?;
    println!("total cost {}", out.report.total_cost);
    for p in &out.report.phrases {
        println!("phrase {} -> {}", p.index, p.segment_id);
    }
    println!("wrote {}", out.motion_path.display());
    Ok(())
}

fn gen_fixture_cmd(a: GenFixtureArgs) -> Result<()> {
    let opts = FixtureOptions {
        seed: a.seed,
        n_clips: a.clips,
        n_semantic: a.semantic,
        n_phrases: a.phrases,
        ..FixtureOptions::default()
    };
    let m = generate_fixture(&a.out, &opts)?;
    println!("wrote {}", a.out.join(&m.config).display());
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let lib = err
        .downcast_ref::<StageError>()
        .map(|s| &s.source)
        .or_else(|| err.downcast_ref::<Error>());
    match lib {
        Some(e) if e.is_validation() => EXIT_VALIDATION,
        Some(_) => EXIT_PIPELINE,
        None if err.downcast_ref::<std::io::Error>().is_some() => EXIT_VALIDATION,
        None => EXIT_PIPELINE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildGraph(a) => build_graph_cmd(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Synthesize(a) => synthesize_cmd(a),
        Command::RenderPath(a) => render_path_cmd(a),
        Command::FaceCheck(a) => face_check_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::GenFixture(a) => gen_fixture_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
