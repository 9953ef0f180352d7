//! Joint correction of word segmentation and zero-width non-joiner placement
//! in Persian text.
//!
//! Each character of a sentence is tagged with the separator that follows it:
//! [`Tag::None`], [`Tag::Space`] or [`Tag::Zwnj`]. The crate provides the
//! pieces needed to train and evaluate a tagger on that representation:
//!
//! * [`charset`]: joining classes, digits and normalization of Persian text;
//! * [`corpus`]: corpus loading, ordered test/validation/train splits, statistics;
//! * [`labeling`]: stripped and retained-separator tag encodings, dataset files;
//! * [`noise`]: seeded separator-noise injection;
//! * [`crf`]: a linear-chain CRF trained with OWL-QN, Viterbi decoding, model files;
//! * [`eval`]: per-class precision/recall/F1, macro-F1 and string alignment.
//!
//! ```
//! use nimfasele::labeling::{decode, encode_stripped, Tag};
//!
//! let t = encode_stripped("mi\u{200C}konam").unwrap();
//! assert_eq!(t.tags[1], Tag::Zwnj);
//! assert_eq!(decode(&t), "mi\u{200C}konam");
//! ```

pub mod charset;
pub mod cli;
pub mod corpus;
pub mod crf;
pub mod eval;
pub mod labeling;
pub mod manifest;
pub mod noise;

pub use charset::{classify_joiner, is_digit, is_joiner, normalize_text, CharClassTable, JoinerClass};
pub use corpus::{Corpus, ParallelPair, SplitSpec};
pub use crf::{CrfModel, TrainConfig};
pub use eval::EvalReport;
pub use labeling::{Sample, Tag, TaggedSentence};
pub use noise::NoiseConfig;
