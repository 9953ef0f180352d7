#![allow(dead_code)]

use nimfasele::crf::{build_vocab, extract_features, CrfModel, FeatureTemplate};
use nimfasele::labeling::{Labeled, Sample, Tag};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RE: char = '\u{0631}';
pub const NOUN_LETTERS: &[char] = &[
    '\u{0628}', '\u{062A}', '\u{06A9}', '\u{0646}', '\u{0633}', '\u{0644}', '\u{0641}', '\u{0647}', '\u{062C}',
    '\u{0634}', '\u{062F}', '\u{0627}',
];
pub const VERB_STEMS: &[&str] = &[
    "\u{06A9}\u{0646}\u{0645}",
    "\u{062E}\u{0648}\u{0627}\u{0646}\u{0645}",
    "\u{0646}\u{0648}\u{06CC}\u{0633}\u{0645}",
    "\u{06AF}\u{0648}\u{06CC}\u{0645}",
    "\u{0628}\u{06CC}\u{0646}\u{0645}",
];
pub const MI: &str = "\u{0645}\u{06CC}";
pub const ZWNJ: char = '\u{200C}';

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A sentence of nouns ending in re, each followed by a space, then a verb
/// written with the prefix mi and a ZWNJ.
pub fn synthetic_sentence<R: Rng>(rng: &mut R) -> String {
    let mut s = String::new();
    for _ in 0..rng.random_range(0..=5) {
        for _ in 0..rng.random_range(1..=3) {
            s.push(*NOUN_LETTERS.choose(rng).unwrap());
        }
        s.push(RE);
        s.push(' ');
    }
    s.push_str(MI);
    s.push(ZWNJ);
    s.push_str(VERB_STEMS.choose(rng).unwrap());
    s
}

pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<String> {
    let mut r = rng(seed);
    (0..n).map(|_| synthetic_sentence(&mut r)).collect()
}

pub fn random_tags<R: Rng>(rng: &mut R, n: usize) -> Vec<Tag> {
    (0..n).map(|_| Tag::ALL[rng.random_range(0..3)]).collect()
}

/// A random separator-free sequence over a small alphabet.
pub fn random_symbols<R: Rng>(rng: &mut R, n: usize) -> Vec<char> {
    const ALPHA: &[char] = &['a', 'b', 'c', '\u{0631}', '\u{0645}', '1'];
    (0..n).map(|_| *ALPHA.choose(rng).unwrap()).collect()
}

/// A random labeled sample; with `masked`, some positions are separators with `mask = false`.
pub fn random_sample<R: Rng>(rng: &mut R, n: usize, masked: bool) -> Sample {
    let mut s = Sample::default();
    let symbols = random_symbols(rng, n);
    for (i, c) in symbols.into_iter().enumerate() {
        if masked && i > 0 && rng.random_bool(0.3) {
            s.symbols.push(if rng.random_bool(0.5) { ' ' } else { ZWNJ });
            s.tags.push(Tag::None);
            s.mask.push(false);
        }
        s.symbols.push(c);
        s.tags.push(Tag::ALL[rng.random_range(0..3)]);
        s.mask.push(true);
    }
    s
}

/// A model whose vocabulary covers `data`, with weights uniform in `[-scale, scale]`.
pub fn random_model<R: Rng, S: Labeled>(rng: &mut R, data: &[S], scale: f64) -> CrfModel {
    let template = FeatureTemplate::default();
    let vocab = build_vocab(data, &template, 1);
    let zero = CrfModel::zeros(template, vocab);
    let w: Vec<f64> = (0..zero.num_parameters())
        .map(|_| rng.random_range(-scale..=scale))
        .collect();
    zero.with_parameters(&w).unwrap()
}

/// Path score computed directly from feature strings and the weight lookup.
pub fn score_by_hand(model: &CrfModel, symbols: &[char], tags: &[Tag], mask: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut prev: Option<Tag> = None;
    for i in 0..symbols.len() {
        if !mask[i] {
            continue;
        }
        for f in extract_features(symbols, i).unwrap() {
            total += model.state_weight(&f, tags[i]).unwrap_or(0.0);
        }
        if let Some(p) = prev {
            total += model.transitions()[p.index()][tags[i].index()];
        }
        prev = Some(tags[i]);
    }
    total
}

/// Every tag sequence of length `n`, in lexicographic order.
pub fn all_tag_sequences(n: usize) -> Vec<Vec<Tag>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<Tag>| {
                Tag::ALL.into_iter().map(move |t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    out
}

/// Brute-force log partition and argmax (first maximum in lexicographic order).
pub fn brute_force(model: &CrfModel, symbols: &[char]) -> (f64, Vec<Tag>) {
    let mask = vec![true; symbols.len()];
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut scores = Vec::new();
    for tags in all_tag_sequences(symbols.len()) {
        let s = score_by_hand(model, symbols, &tags, &mask);
        scores.push(s);
        if s > best.0 {
            best = (s, tags);
        }
    }
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_z = m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln();
    (log_z, best.1)
}

/// Relative error with an absolute floor of 1.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
