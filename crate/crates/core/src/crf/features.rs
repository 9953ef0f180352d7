//! Observation features for the character tagger.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::charset::{is_digit, is_joiner};

use super::CrfError;

/// Boolean features of the focus character.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolFeature {
    IsFirst,
    IsLast,
    IsJoiner,
    IsDigit,
}

impl BoolFeature {
    pub const ALL: [BoolFeature; 4] = [
        BoolFeature::IsFirst,
        BoolFeature::IsLast,
        BoolFeature::IsJoiner,
        BoolFeature::IsDigit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoolFeature::IsFirst => "is_first",
            BoolFeature::IsLast => "is_last",
            BoolFeature::IsJoiner => "is_joiner",
            BoolFeature::IsDigit => "is_digit",
        }
    }

    pub fn from_name(name: &str) -> Option<BoolFeature> {
        BoolFeature::ALL.into_iter().find(|b| b.name() == name)
    }

    fn fires(self, symbols: &[char], i: usize) -> bool {
        match self {
            BoolFeature::IsFirst => i == 0,
            BoolFeature::IsLast => i + 1 == symbols.len(),
            BoolFeature::IsJoiner => is_joiner(symbols[i]),
            BoolFeature::IsDigit => is_digit(symbols[i]),
        }
    }
}

/// Which features are extracted at each position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureTemplate {
    /// Relative positions whose character identity becomes a feature.
    pub offsets: Vec<i32>,
    pub booleans: Vec<BoolFeature>,
}

impl Default for FeatureTemplate {
    /// Focus character, five on each side, and all four boolean features.
    fn default() -> Self {
        FeatureTemplate::window(5)
    }
}

pub(crate) const BEFORE_START: &str = "<s>";
pub(crate) const AFTER_END: &str = "</s>";

impl FeatureTemplate {
    /// `-radius..=radius` character window with all boolean features.
    pub fn window(radius: u32) -> Self {
        let r = radius as i32;
        FeatureTemplate {
            offsets: (-r..=r).collect(),
            booleans: BoolFeature::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), CrfError> {
        if !self.offsets.contains(&0) {
            return Err(CrfError::Template("offset 0 (the focus) must be present".into()));
        }
        let mut seen = self.offsets.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.offsets.len() {
            return Err(CrfError::Template("window offsets must be distinct".into()));
        }
        let mut b: Vec<&str> = self.booleans.iter().map(|b| b.name()).collect();
        b.sort_unstable();
        b.dedup();
        if b.len() != self.booleans.len() {
            return Err(CrfError::Template("boolean features must be distinct".into()));
        }
        Ok(())
    }

    /// Calls `emit` with each feature string of position `i`.
    pub(crate) fn visit(&self, symbols: &[char], i: usize, buf: &mut String, mut emit: impl FnMut(&str)) {
        for &off in &self.offsets {
            buf.clear();
            let j = i as i64 + off as i64;
            let _ = write!(buf, "c[{off:+}]=");
            if j < 0 {
                buf.push_str(BEFORE_START);
            } else if j as usize >= symbols.len() {
                buf.push_str(AFTER_END);
            } else {
                buf.push(symbols[j as usize]);
            }
            emit(buf);
        }
        for b in &self.booleans {
            if b.fires(symbols, i) {
                emit(b.name());
            }
        }
    }

    /// The features that fire at position `i`.
    pub fn extract_features(&self, symbols: &[char], i: usize) -> Result<Vec<String>, CrfError> {
        if i >= symbols.len() {
            return Err(CrfError::IndexOutOfRange {
                index: i,
                len: symbols.len(),
            });
        }
        let mut out = Vec::with_capacity(self.offsets.len() + self.booleans.len());
        let mut buf = String::new();
        self.visit(symbols, i, &mut buf, |f| out.push(f.to_string()));
        Ok(out)
    }
}

/// Default-template shorthand for [`FeatureTemplate::extract_features`].
pub fn extract_features(symbols: &[char], i: usize) -> Result<Vec<String>, CrfError> {
    FeatureTemplate::default().extract_features(symbols, i)
}

/// Bijection between feature strings and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureVocab {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl FeatureVocab {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, feature: &str) -> Option<u32> {
        self.ids.get(feature).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Adds `feature` if absent and returns its id.
    pub fn intern(&mut self, feature: &str) -> u32 {
        if let Some(&id) = self.ids.get(feature) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(feature.to_string());
        self.ids.insert(feature.to_string(), id);
        id
    }

    /// Rebuilds a vocabulary from names in id order; fails on duplicates.
    pub fn from_names(names: Vec<String>) -> Result<Self, CrfError> {
        let mut ids = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if ids.insert(n.clone(), i as u32).is_some() {
                return Err(CrfError::Template(format!("duplicate feature `{n}`")));
            }
        }
        Ok(FeatureVocab { ids, names })
    }

    /// Ids of the features at position `i` that are in the vocabulary.
    pub(crate) fn lookup(
        &self,
        template: &FeatureTemplate,
        symbols: &[char],
        i: usize,
        buf: &mut String,
        out: &mut Vec<u32>,
    ) {
        out.clear();
        template.visit(symbols, i, buf, |f| {
            if let Some(id) = self.get(f) {
                out.push(id);
            }
        });
    }
}
