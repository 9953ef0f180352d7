//! Corpus ingestion, deterministic splitting and statistics.

use std::io::BufRead;

use crate::charset::{is_separator, CharClassTable, SPACE, ZWNJ};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: invalid UTF-8")]
    Decode { line: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: raw and gold differ in non-separator characters")]
    NotParallel { line: usize },
    #[error("cannot split an empty corpus")]
    Empty,
    #[error("invalid split fractions: test {test} + valid {valid} must be < 1 and each non-negative")]
    BadSplit { test: f64, valid: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Gold sentences: normalized, single separators, none at either end.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<String>,
    pub provenance: String,
}

impl Corpus {
    pub fn new(provenance: impl Into<String>, sentences: Vec<String>) -> Self {
        Corpus {
            sentences,
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Checks the two corpus invariants on one sentence.
pub fn is_well_formed(sentence: &str) -> bool {
    let chars: Vec<char> = sentence.chars().collect();
    if chars.first().copied().is_some_and(is_separator) || chars.last().copied().is_some_and(is_separator) {
        return false;
    }
    !chars.windows(2).any(|w| is_separator(w[0]) && is_separator(w[1]))
}

/// How a tokenized corpus file is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    /// One sentence per line, tokens separated by single spaces.
    #[default]
    Plain,
    /// `token<TAB>tag` per line, blank line between sentences. Tags are ignored
    /// and spaces inside a token become ZWNJ.
    Columns,
}

/// Counters from a corpus load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub sentences: usize,
    pub skipped_empty: usize,
}

fn lines_with_numbers<R: BufRead>(mut input: R) -> impl Iterator<Item = Result<(usize, String), CorpusError>> {
    let mut line_no = 0;
    let mut buf = Vec::new();
    std::iter::from_fn(move || {
        buf.clear();
        match input.read_until(b'\n', &mut buf) {
            Ok(0) => None,
            Ok(_) => {
                line_no += 1;
                if buf.last() == Some(&b'\n') {
                    buf.pop();
                }
                if buf.last() == Some(&b'\r') {
                    buf.pop();
                }
                Some(
                    String::from_utf8(std::mem::take(&mut buf))
                        .map(|s| (line_no, s))
                        .map_err(|_| CorpusError::Decode { line: line_no }),
                )
            }
            Err(e) => Some(Err(e.into())),
        }
    })
}

/// Normalizes and trims separators from both ends.
fn clean_sentence(table: &CharClassTable, raw: &str) -> String {
    let normalized = table.normalize(raw);
    normalized.trim_matches(is_separator).to_string()
}

/// Loads a tokenized training corpus.
pub fn load_tokenized_corpus<R: BufRead>(
    input: R,
    format: CorpusFormat,
    table: &CharClassTable,
    provenance: &str,
) -> Result<(Corpus, LoadReport), CorpusError> {
    let mut corpus = Corpus::new(provenance, Vec::new());
    let mut report = LoadReport::default();
    match format {
        CorpusFormat::Plain => {
            for item in lines_with_numbers(input) {
                let (_, line) = item?;
                let sentence = clean_sentence(table, &line);
                if sentence.is_empty() {
                    report.skipped_empty += 1;
                } else {
                    corpus.sentences.push(sentence);
                }
            }
        }
        CorpusFormat::Columns => {
            let mut tokens: Vec<String> = Vec::new();
            let flush = |tokens: &mut Vec<String>, corpus: &mut Corpus, report: &mut LoadReport| {
                if tokens.is_empty() {
                    return;
                }
                let sentence = clean_sentence(table, &tokens.join(" "));
                tokens.clear();
                if sentence.is_empty() {
                    report.skipped_empty += 1;
                } else {
                    corpus.sentences.push(sentence);
                }
            };
            for item in lines_with_numbers(input) {
                let (line_no, line) = item?;
                if line.trim().is_empty() {
                    flush(&mut tokens, &mut corpus, &mut report);
                    continue;
                }
                let token = match line.split_once('\t') {
                    Some((token, _tag)) => token,
                    None => {
                        return Err(CorpusError::Format {
                            line: line_no,
                            message: "expected token<TAB>tag".into(),
                        })
                    }
                };
                let token = token.trim_matches(is_separator);
                if token.is_empty() {
                    continue;
                }
                tokens.push(token.replace(SPACE, &ZWNJ.to_string()));
            }
            flush(&mut tokens, &mut corpus, &mut report);
        }
    }
    report.sentences = corpus.len();
    Ok((corpus, report))
}

/// Fractions for the ordered test / validation / train split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub valid_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.10,
            valid_fraction: 0.10,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let ok = |f: f64| f.is_finite() && f >= 0.0;
        if ok(self.test_fraction) && ok(self.valid_fraction) && self.test_fraction + self.valid_fraction < 1.0 {
            Ok(())
        } else {
            Err(CorpusError::BadSplit {
                test: self.test_fraction,
                valid: self.valid_fraction,
            })
        }
    }

    /// Sizes of the (test, valid, train) parts for `n` sentences, using floor.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let test = (self.test_fraction * n as f64).floor() as usize;
        let valid = (self.valid_fraction * n as f64).floor() as usize;
        (test, valid, n - test - valid)
    }
}

/// The three parts of a split corpus, in corpus order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub test: Corpus,
    pub valid: Corpus,
    pub train: Corpus,
}

/// Test is the first slice of the corpus, validation the next, train the rest.
pub fn split_corpus(c: &Corpus, spec: SplitSpec) -> Result<Split, CorpusError> {
    spec.validate()?;
    if c.is_empty() {
        return Err(CorpusError::Empty);
    }
    let (n_test, n_valid, _) = spec.sizes(c.len());
    let part = |name: &str, range: std::ops::Range<usize>| {
        Corpus::new(format!("{}#{name}", c.provenance), c.sentences[range].to_vec())
    };
    Ok(Split {
        test: part("test", 0..n_test),
        valid: part("valid", n_test..n_test + n_valid),
        train: part("train", n_test + n_valid..c.len()),
    })
}

/// A real-world sentence and its manual correction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelPair {
    pub raw: String,
    pub gold: String,
}

/// Loads `raw<TAB>gold` lines.
///
/// In strict mode each pair must agree on its non-separator characters.
pub fn load_parallel<R: BufRead>(
    input: R,
    table: &CharClassTable,
    strict: bool,
) -> Result<Vec<ParallelPair>, CorpusError> {
    let mut pairs = Vec::new();
    for item in lines_with_numbers(input) {
        let (line_no, line) = item?;
        if line.is_empty() {
            continue;
        }
        let (raw, gold) = line.split_once('\t').ok_or_else(|| CorpusError::Format {
            line: line_no,
            message: "missing TAB between raw and gold".into(),
        })?;
        let pair = ParallelPair {
            raw: table.normalize(raw),
            gold: clean_sentence(table, gold),
        };
        if strict && !same_letters(&pair.raw, &pair.gold) {
            return Err(CorpusError::NotParallel { line: line_no });
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

/// `true` when both texts have the same non-separator characters.
pub fn same_letters(a: &str, b: &str) -> bool {
    a.chars()
        .filter(|c| !is_separator(*c))
        .eq(b.chars().filter(|c| !is_separator(*c)))
}

/// Whether corpus character counts include separators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CharCount {
    #[default]
    WithSeparators,
    WithoutSeparators,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub words: usize,
    pub characters: usize,
}

impl std::ops::Add for CorpusStats {
    type Output = CorpusStats;
    fn add(self, o: CorpusStats) -> CorpusStats {
        CorpusStats {
            words: self.words + o.words,
            characters: self.characters + o.characters,
        }
    }
}

/// Word count is the number of space-separated tokens.
pub fn corpus_stats(c: &Corpus, convention: CharCount) -> CorpusStats {
    c.sentences
        .iter()
        .map(|s| CorpusStats {
            words: s.split(SPACE).filter(|t| !t.is_empty()).count(),
            characters: match convention {
                CharCount::WithSeparators => s.chars().count(),
                CharCount::WithoutSeparators => s.chars().filter(|c| !is_separator(*c)).count(),
            },
        })
        .fold(CorpusStats::default(), |a, b| a + b)
}
