//! Linear-chain conditional random field over the three separator tags.

mod features;
mod io;
pub mod lattice;
mod model;
mod train;

pub use features::{extract_features, BoolFeature, FeatureTemplate, FeatureVocab};
pub use io::{load_model, save_model, FORMAT_VERSION, MAGIC};
pub use model::CrfModel;
pub use train::{
    build_vocab, log_likelihood_and_gradient, train, IterationReport, Objective, StopReason, TrainConfig, Trainer,
    TrainingLog,
};

#[derive(Debug, thiserror::Error)]
pub enum CrfError {
    #[error("feature index {index} out of range for a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid feature template: {0}")]
    Template(String),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("sample {sentence}: symbols, tags and mask differ in length")]
    BadSample { sentence: usize },
    #[error("cannot predict tags for an empty sequence")]
    EmptyInput,
    #[error("non-finite value while scoring sentence {sentence}")]
    Numeric { sentence: usize },
    #[error("training diverged at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("expected {expected} parameters, got {found}")]
    Parameters { expected: usize, found: usize },
    #[error("parameter {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("not a model file (missing CRFSEG1 header)")]
    BadMagic,
    #[error("model format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("model file is truncated")]
    Truncated,
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
