use std::fs;

use talkmotion::fixture::{generate_fixture, FixtureOptions};
use talkmotion::pipeline::{analyze_script, load_database, phrase_rhythms, run_pipeline, PipelineConfig, Stage};
use talkmotion::speech::{rhythm_cost, SemanticLexicon};
use talkmotion::Error;

fn fixture(opts: &FixtureOptions) -> (tempfile::TempDir, PipelineConfig) {
    let dir = tempfile::tempdir().unwrap();
    let m = generate_fixture(dir.path(), opts).unwrap();
    let cfg = PipelineConfig::load(&dir.path().join(&m.config)).unwrap();
    (dir, cfg)
}

#[test]
fn fixture_is_reproducible() {
    let opts = FixtureOptions::default();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = generate_fixture(a.path(), &opts).unwrap();
    generate_fixture(b.path(), &opts).unwrap();
    for rel in ma.motion_files.iter().chain([&ma.script, &ma.wav, &ma.config]) {
        assert_eq!(
            fs::read(a.path().join(rel)).unwrap(),
            fs::read(b.path().join(rel)).unwrap(),
            "{rel:?}"
        );
    }
    let other = tempfile::tempdir().unwrap();
    generate_fixture(other.path(), &FixtureOptions { seed: 1, ..opts }).unwrap();
    assert_ne!(
        fs::read(a.path().join(&ma.wav)).unwrap(),
        fs::read(other.path().join(&ma.wav)).unwrap()
    );
}

#[test]
fn end_to_end_run() {
    let opts = FixtureOptions::default();
    let (dir, cfg) = fixture(&opts);
    let first = run_pipeline(&cfg).unwrap();
    assert!(!first.timings.graph_cache_hit);
    let report = &first.report;
    assert_eq!(report.phrases.len(), opts.n_phrases);
    assert!(report.graph_nodes > 0 && report.total_cost.is_finite());
    for p in &report.phrases {
        if let Some(tag) = &p.semantic_tag {
            assert_eq!(p.node_semantic_tag.as_ref(), Some(tag));
        } else {
            assert!(p.node_semantic_tag.is_none());
        }
    }
    let motion = fs::read(&first.motion_path).unwrap();
    let rep = fs::read(&first.report_path).unwrap();

    let second = run_pipeline(&cfg).unwrap();
    assert!(second.timings.graph_cache_hit);
    assert_eq!(fs::read(&second.motion_path).unwrap(), motion);
    assert_eq!(fs::read(&second.report_path).unwrap(), rep);
    drop(dir);
}

#[test]
fn missing_inputs_fail_at_config() {
    let (dir, mut cfg) = fixture(&FixtureOptions::default());
    cfg.wav = dir.path().join("absent.wav");
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Config);
    assert!(err.source.is_validation());
}

#[test]
fn empty_database_is_a_pipeline_error() {
    let (dir, cfg) = fixture(&FixtureOptions::default());
    for e in fs::read_dir(dir.path().join("db")).unwrap() {
        fs::remove_file(e.unwrap().path()).unwrap();
    }
    let cfg = PipelineConfig {
        semantic_manifest: None,
        cache_dir: None,
        ..cfg
    };
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.stage, Stage::BuildGraph);
    assert!(matches!(err.source, Error::EmptyGraph));
}

#[test]
fn seed_zero_writes_six_clips() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate_fixture(dir.path(), &FixtureOptions::default()).unwrap();
    assert_eq!(m.motion_files.len(), 6);
    assert!(m.motion_files.iter().all(|p| dir.path().join(p).is_file()));
}

#[test]
fn designed_rhythm_beats_other_segments() {
    let (tmp, cfg) = fixture(&FixtureOptions::default());
    let dir = tmp.path();
    let m: talkmotion::fixture::FixtureManifest =
        serde_json::from_str(&fs::read_to_string(dir.join("fixture.json")).unwrap()).unwrap();
    let lexicon = SemanticLexicon::default_lexicon();
    let phrases = analyze_script(&cfg.script, &lexicon, cfg.max_gap_seconds).unwrap();
    let rhythms = phrase_rhythms(&cfg.wav, &phrases, cfg.hop_seconds).unwrap();
    let segments = load_database(&cfg.database_dir, &cfg.segmentation).unwrap();
    let strength = |id: &str| &segments.iter().find(|s| s.segment_id == id).unwrap().strength;
    let designed: Vec<(usize, &str)> = m
        .phrases
        .iter()
        .filter_map(|d| d.rhythm_segment.as_deref().map(|s| (d.phrase_index, s)))
        .collect();
    let mut compared = 0;
    for &(i, a) in &designed {
        for &(_, b) in &designed {
            if a != b {
                assert!(
                    rhythm_cost(strength(a), &rhythms[i]) < rhythm_cost(strength(b), &rhythms[i]),
                    "{i}: {a} vs {b}"
                );
                compared += 1;
            }
        }
    }
    assert!(compared > 0);
}

#[test]
fn no_semantic_clips_still_completes() {
    let opts = FixtureOptions {
        n_semantic: 0,
        ..FixtureOptions::default()
    };
    let (_dir, cfg) = fixture(&opts);
    let out = run_pipeline(&cfg).unwrap();
    assert!(out
        .report
        .phrases
        .iter()
        .all(|p| p.semantic_tag.is_none() && p.node_semantic_tag.is_none()));
}

#[test]
fn left_phrase_gets_the_left_clip() {
    let opts = FixtureOptions {
        n_phrases: 3,
        n_semantic: 1,
        ..FixtureOptions::default()
    };
    let (_dir, cfg) = fixture(&opts);
    let out = run_pipeline(&cfg).unwrap();
    let p = &out.report.phrases[1];
    assert_eq!(p.semantic_tag.as_deref(), Some("left"));
    assert_eq!(p.node_semantic_tag.as_deref(), Some("left"));
    assert!(p.segment_id.starts_with("sem_00_left"));
    let path: talkmotion::optimizer::SynthesisPath =
        serde_json::from_str(&fs::read_to_string(&out.path_path).unwrap()).unwrap();
    assert_eq!(path.total_cost, out.report.total_cost);
}
