use std::sync::Arc;

use crate::charset::{is_separator, normalize_text};
use crate::labeling::{decode_parts, Tag};

use super::features::{FeatureTemplate, FeatureVocab};
use super::lattice::{self, Emissions, Transitions, L};
use super::CrfError;

/// A trained linear-chain CRF over the three separator tags.
///
/// Parameters are laid out flat as `state[feature * 3 + label]` followed by
/// `transition[from * 3 + to]`; [`CrfModel::parameters`] and
/// [`CrfModel::with_parameters`] use that layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    pub(crate) template: FeatureTemplate,
    pub(crate) vocab: Arc<FeatureVocab>,
    pub(crate) state: Vec<f64>,
    pub(crate) transition: Transitions,
}

impl CrfModel {
    /// A model with every weight at zero.
    pub fn zeros(template: FeatureTemplate, vocab: FeatureVocab) -> Self {
        let n = vocab.len() * L;
        CrfModel {
            template,
            vocab: Arc::new(vocab),
            state: vec![0.0; n],
            transition: [[0.0; L]; L],
        }
    }

    pub fn labels(&self) -> [Tag; 3] {
        Tag::ALL
    }

    pub fn template(&self) -> &FeatureTemplate {
        &self.template
    }

    pub fn vocab(&self) -> &FeatureVocab {
        &self.vocab
    }

    pub fn transitions(&self) -> &Transitions {
        &self.transition
    }

    pub fn state_weight(&self, feature: &str, label: Tag) -> Option<f64> {
        self.vocab
            .get(feature)
            .map(|id| self.state[id as usize * L + label.index()])
    }

    pub fn state_weights(&self) -> &[f64] {
        &self.state
    }

    pub fn num_parameters(&self) -> usize {
        self.state.len() + L * L
    }

    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.state.clone();
        p.extend(self.transition.iter().flatten());
        p
    }

    pub fn with_parameters(&self, params: &[f64]) -> Result<CrfModel, CrfError> {
        if params.len() != self.num_parameters() {
            return Err(CrfError::Parameters {
                expected: self.num_parameters(),
                found: params.len(),
            });
        }
        if let Some(i) = params.iter().position(|w| !w.is_finite()) {
            return Err(CrfError::NonFiniteWeight { index: i });
        }
        let (state, trans) = params.split_at(self.state.len());
        let mut transition = [[0.0; L]; L];
        for (k, w) in trans.iter().enumerate() {
            transition[k / L][k % L] = *w;
        }
        Ok(CrfModel {
            template: self.template.clone(),
            vocab: Arc::clone(&self.vocab),
            state: state.to_vec(),
            transition,
        })
    }

    /// Number of non-zero parameters.
    pub fn nonzero(&self) -> usize {
        self.state
            .iter()
            .chain(self.transition.iter().flatten())
            .filter(|w| **w != 0.0)
            .count()
    }

    /// Emission scores for the positions where `keep` is true.
    pub(crate) fn emissions(&self, symbols: &[char], keep: impl Fn(usize) -> bool) -> Vec<Emissions> {
        let mut buf = String::new();
        let mut ids = Vec::new();
        let mut out = Vec::with_capacity(symbols.len());
        for i in 0..symbols.len() {
            if !keep(i) {
                continue;
            }
            self.vocab.lookup(&self.template, symbols, i, &mut buf, &mut ids);
            let mut e = [0.0; L];
            for &f in &ids {
                let base = f as usize * L;
                for (y, slot) in e.iter_mut().enumerate() {
                    *slot += self.state[base + y];
                }
            }
            out.push(e);
        }
        out
    }

    /// Log partition function over the chain of positions where `mask` is true.
    pub fn log_partition(&self, symbols: &[char], mask: &[bool]) -> f64 {
        let em = self.emissions(symbols, |i| mask[i]);
        lattice::forward(&em, &self.transition).1
    }

    /// Score of a full tag assignment over the unmasked chain.
    pub fn score(&self, symbols: &[char], tags: &[Tag], mask: &[bool]) -> f64 {
        let em = self.emissions(symbols, |i| mask[i]);
        let path: Vec<usize> = tags
            .iter()
            .zip(mask)
            .filter(|(_, m)| **m)
            .map(|(t, _)| t.index())
            .collect();
        lattice::path_score(&em, &self.transition, &path)
    }

    /// Viterbi tags for a separator-free character sequence.
    pub fn predict(&self, chars: &[char]) -> Result<Vec<Tag>, CrfError> {
        if chars.is_empty() {
            return Err(CrfError::EmptyInput);
        }
        let em = self.emissions(chars, |_| true);
        Ok(lattice::viterbi(&em, &self.transition)
            .into_iter()
            .map(|y| Tag::ALL[y])
            .collect())
    }

    /// Viterbi tags over the positions where `mask` is true, with all symbols
    /// visible as context. Masked positions get a `NONE` placeholder.
    pub fn predict_masked(&self, symbols: &[char], mask: &[bool]) -> Result<Vec<Tag>, CrfError> {
        if symbols.is_empty() {
            return Err(CrfError::EmptyInput);
        }
        let em = self.emissions(symbols, |i| mask[i]);
        let mut path = lattice::viterbi(&em, &self.transition).into_iter();
        Ok(mask
            .iter()
            .map(|&m| if m { Tag::ALL[path.next().unwrap()] } else { Tag::None })
            .collect())
    }

    /// Normalizes `raw`, removes every separator, predicts and renders the result.
    pub fn correct(&self, raw: &str) -> Result<String, CrfError> {
        let chars: Vec<char> = normalize_text(raw).chars().filter(|c| !is_separator(*c)).collect();
        if chars.is_empty() {
            return Ok(String::new());
        }
        let mut tags = self.predict(&chars)?;
        *tags.last_mut().unwrap() = Tag::None;
        Ok(decode_parts(&chars, &tags))
    }

    /// Like [`CrfModel::correct`], but keeps the input separators as context,
    /// for models trained on retained-separator data.
    pub fn correct_retained(&self, raw: &str) -> Result<String, CrfError> {
        let normalized = normalize_text(raw);
        let symbols: Vec<char> = normalized.trim_matches(is_separator).chars().collect();
        if symbols.is_empty() {
            return Ok(String::new());
        }
        let mask: Vec<bool> = symbols.iter().map(|c| !is_separator(*c)).collect();
        let tags = self.predict_masked(&symbols, &mask)?;
        let (chars, mut tags): (Vec<char>, Vec<Tag>) = symbols
            .iter()
            .zip(tags)
            .zip(&mask)
            .filter(|(_, m)| **m)
            .map(|((c, t), _)| (*c, t))
            .unzip();
        *tags.last_mut().unwrap() = Tag::None;
        Ok(decode_parts(&chars, &tags))
    }
}
