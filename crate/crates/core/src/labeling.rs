//! Per-character tag encodings.
//!
//! Every non-separator character carries a tag naming the separator that
//! follows it. Two encodings exist:
//!
//! * stripped ([`encode_stripped`]): the separators are removed from the input
//!   and the model must place them from scratch;
//! * retained ([`encode_retained`]): the (possibly wrong) separators stay in
//!   the input as ordinary symbols, masked out of loss and metrics.

use std::fmt;
use std::io::{self, BufRead, Write};

use crate::charset::{is_separator, SPACE, ZWNJ};

/// The separator that follows a character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(u8)]
pub enum Tag {
    #[default]
    None = 0,
    Space = 1,
    Zwnj = 2,
}

impl Tag {
    pub const ALL: [Tag; 3] = [Tag::None, Tag::Space, Tag::Zwnj];
    pub const COUNT: usize = 3;

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Tag> {
        Tag::ALL.get(i).copied()
    }

    /// The tag produced by a separator character, `None` for other characters.
    pub fn from_separator(c: char) -> Option<Tag> {
        match c {
            SPACE => Some(Tag::Space),
            ZWNJ => Some(Tag::Zwnj),
            _ => None,
        }
    }

    /// The character this tag inserts after its position, if any.
    pub fn separator(self) -> Option<char> {
        match self {
            Tag::None => None,
            Tag::Space => Some(SPACE),
            Tag::Zwnj => Some(ZWNJ),
        }
    }

    pub fn digit(self) -> char {
        (b'0' + self as u8) as char
    }

    pub fn from_digit(c: char) -> Option<Tag> {
        c.to_digit(10).and_then(|d| Tag::from_index(d as usize))
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.digit())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("invalid sentence: {0}")]
    InvalidSentence(&'static str),
    #[error("alignment error: {chars} non-separator characters but {tags} tags")]
    Alignment { chars: usize, tags: usize },
}

/// Anything that can be fed to the CRF as a training or evaluation sequence.
pub trait Labeled {
    /// Input symbols. May include separators in the retained encoding.
    fn symbols(&self) -> &[char];
    fn tags(&self) -> &[Tag];
    /// `false` marks positions that contribute to neither loss nor metrics.
    fn mask(&self) -> &[bool];
}

/// A separator-free character sequence with one tag per character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub chars: Vec<char>,
    pub tags: Vec<Tag>,
    pub mask: Vec<bool>,
    pub source_text: String,
}

impl TaggedSentence {
    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn check(&self) -> Result<(), LabelError> {
        if self.tags.len() != self.chars.len() || self.mask.len() != self.chars.len() {
            return Err(LabelError::InvalidSentence("chars, tags and mask differ in length"));
        }
        if self.chars.iter().copied().any(is_separator) {
            return Err(LabelError::InvalidSentence("separator among characters"));
        }
        if self.tags.last().is_some_and(|t| *t != Tag::None) {
            return Err(LabelError::InvalidSentence("final tag must be NONE"));
        }
        Ok(())
    }
}

impl Labeled for TaggedSentence {
    fn symbols(&self) -> &[char] {
        &self.chars
    }
    fn tags(&self) -> &[Tag] {
        &self.tags
    }
    fn mask(&self) -> &[bool] {
        &self.mask
    }
}

/// A general labeled symbol sequence: the retained encoding, or anything read
/// back from a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sample {
    pub symbols: Vec<char>,
    pub tags: Vec<Tag>,
    pub mask: Vec<bool>,
}

impl Labeled for Sample {
    fn symbols(&self) -> &[char] {
        &self.symbols
    }
    fn tags(&self) -> &[Tag] {
        &self.tags
    }
    fn mask(&self) -> &[bool] {
        &self.mask
    }
}

impl From<TaggedSentence> for Sample {
    fn from(t: TaggedSentence) -> Self {
        Sample {
            symbols: t.chars,
            tags: t.tags,
            mask: t.mask,
        }
    }
}

impl Sample {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// One line of the dataset format: `symbols<TAB>tags<TAB>mask`.
    pub fn to_line(&self) -> String {
        let mut line: String = self.symbols.iter().collect();
        line.push('\t');
        line.extend(self.tags.iter().map(|t| t.digit()));
        line.push('\t');
        line.extend(self.mask.iter().map(|&m| if m { 'T' } else { 'F' }));
        line
    }

    pub fn from_line(line: &str) -> Result<Sample, DatasetError> {
        let mut parts = line.split('\t');
        let (Some(symbols), Some(tags), Some(mask), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(DatasetError::Format("expected three TAB-separated fields".into()));
        };
        let symbols: Vec<char> = symbols.chars().collect();
        let tags = tags
            .chars()
            .map(|c| Tag::from_digit(c).ok_or_else(|| DatasetError::Format(format!("bad tag `{c}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let mask = mask
            .chars()
            .map(|c| match c {
                'T' => Ok(true),
                'F' => Ok(false),
                _ => Err(DatasetError::Format(format!("bad mask flag `{c}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if tags.len() != symbols.len() || mask.len() != symbols.len() {
            return Err(DatasetError::Format(format!(
                "field lengths differ: {} symbols, {} tags, {} mask flags",
                symbols.len(),
                tags.len(),
                mask.len()
            )));
        }
        Ok(Sample { symbols, tags, mask })
    }
}

/// Encodes a well-formed gold sentence with its separators removed.
pub fn encode_stripped(gold: &str) -> Result<TaggedSentence, LabelError> {
    let mut chars = Vec::with_capacity(gold.len());
    let mut tags: Vec<Tag> = Vec::with_capacity(gold.len());
    let mut prev_sep = false;
    for c in gold.chars() {
        if let Some(tag) = Tag::from_separator(c) {
            if chars.is_empty() {
                return Err(LabelError::InvalidSentence("leading separator"));
            }
            if prev_sep {
                return Err(LabelError::InvalidSentence("adjacent separators"));
            }
            *tags.last_mut().unwrap() = tag;
            prev_sep = true;
        } else {
            chars.push(c);
            tags.push(Tag::None);
            prev_sep = false;
        }
    }
    if prev_sep {
        return Err(LabelError::InvalidSentence("trailing separator"));
    }
    let n = chars.len();
    Ok(TaggedSentence {
        chars,
        tags,
        mask: vec![true; n],
        source_text: gold.to_string(),
    })
}

/// Reads whatever separator decisions a text makes, without validation.
///
/// Each non-separator character is tagged with the first separator that
/// follows it. Leading separators are ignored, and a trailing separator is
/// kept on the last character.
pub fn read_separators(text: &str) -> (Vec<char>, Vec<Tag>) {
    let mut chars = Vec::new();
    let mut tags: Vec<Tag> = Vec::new();
    let mut after_sep = false;
    for c in text.chars() {
        if let Some(tag) = Tag::from_separator(c) {
            if let Some(last) = tags.last_mut() {
                if !after_sep {
                    *last = tag;
                }
            }
            after_sep = true;
        } else {
            chars.push(c);
            tags.push(Tag::None);
            after_sep = false;
        }
    }
    (chars, tags)
}

/// Renders characters and tags back to text.
pub fn decode_parts(chars: &[char], tags: &[Tag]) -> String {
    let mut out = String::with_capacity(chars.len() * 2);
    for (c, t) in chars.iter().zip(tags) {
        out.push(*c);
        if let Some(sep) = t.separator() {
            out.push(sep);
        }
    }
    out
}

pub fn decode(t: &TaggedSentence) -> String {
    decode_parts(&t.chars, &t.tags)
}

/// Builds the retained encoding of a noisy sentence.
///
/// `gold_tags` holds one tag per non-separator character of `noisy`, in order.
/// Separator symbols get a placeholder `NONE` tag and `mask = false`.
pub fn encode_retained(noisy: &str, gold_tags: &[Tag]) -> Result<Sample, LabelError> {
    let non_sep = noisy.chars().filter(|c| !is_separator(*c)).count();
    if non_sep != gold_tags.len() {
        return Err(LabelError::Alignment {
            chars: non_sep,
            tags: gold_tags.len(),
        });
    }
    let mut gold = gold_tags.iter();
    let mut sample = Sample::default();
    for c in noisy.chars() {
        sample.symbols.push(c);
        if is_separator(c) {
            sample.tags.push(Tag::None);
            sample.mask.push(false);
        } else {
            sample.tags.push(*gold.next().unwrap());
            sample.mask.push(true);
        }
    }
    Ok(sample)
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{0}")]
    Format(String),
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<DatasetError>,
    },
    #[error("line {line}: invalid UTF-8")]
    Utf8 { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Prefix of the optional metadata line at the top of a dataset file.
pub const META_PREFIX: &str = "#meta ";

/// Writes samples in the dataset format, preceded by a `#meta` line when given.
pub fn write_dataset<W: Write, S: std::borrow::Borrow<Sample>>(
    mut out: W,
    meta: Option<&str>,
    samples: impl IntoIterator<Item = S>,
) -> io::Result<()> {
    if let Some(meta) = meta {
        writeln!(out, "{META_PREFIX}{meta}")?;
    }
    for s in samples {
        writeln!(out, "{}", s.borrow().to_line())?;
    }
    out.flush()
}

/// A dataset file: samples plus the raw JSON of its `#meta` line, if present.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub meta: Option<String>,
    pub samples: Vec<Sample>,
}

/// Reads a dataset file. Other `#` lines and blank lines are skipped.
pub fn read_dataset<R: BufRead>(mut input: R) -> Result<Dataset, DatasetError> {
    let mut ds = Dataset::default();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|_| DatasetError::Utf8 { line: line_no })?;
        let line = line.strip_suffix('\n').unwrap_or(line);
        let line = line.strip_suffix('\r').unwrap_or(line);
        if let Some(meta) = line.strip_prefix(META_PREFIX) {
            ds.meta.get_or_insert_with(|| meta.to_string());
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let sample = Sample::from_line(line).map_err(|e| DatasetError::Line {
            line: line_no,
            source: Box::new(e),
        })?;
        ds.samples.push(sample);
    }
    Ok(ds)
}
