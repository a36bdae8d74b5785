//! Phonetic rhythm, phrase splitting and semantic tag detection.

mod lexicon;
mod onset;
mod phrases;
mod rhythm;
mod wav;

pub use lexicon::{tokenize, Category, LexiconEntry, SemanticLexicon};
pub use onset::{onset_envelope, RhythmCurve, MIN_WINDOW};
pub use phrases::{
    detect_semantic_tag, load_script, split_phrases, tag_phrases, Phrase, TimedWord, DEFAULT_BREAKS,
    DEFAULT_MAX_GAP_SECONDS,
};
pub use rhythm::{pearson, rhythm_cost, rhythm_cost_values, RHYTHM_SAMPLES};
pub use wav::{read_wav, write_wav, PcmAudio};
