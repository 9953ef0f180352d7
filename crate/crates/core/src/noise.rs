//! Separator noise injection for building retained-separator datasets.
//!
//! Each clean sentence of length `l` (in characters) is corrupted in three
//! sequential steps, with rates `r1`, `r2`, `r3` drawn per sentence:
//!
//! 1. `⌊r1·l⌋` ZWNJs become spaces;
//! 2. `⌊r2·l⌋` spaces that follow a non-joiner character are deleted;
//! 3. `⌊r3·l'⌋` of the characters untouched so far are perturbed, where `l'`
//!    is the current length: a space becomes nothing or ZWNJ, a ZWNJ becomes
//!    nothing or space, and any other character either gets a ZWNJ or space
//!    appended (when no separator follows it) or loses the separator that
//!    follows it.
//!
//! Counts are capped by the number of eligible positions. Non-separator
//! characters are never altered, so the gold tags carry over unchanged.
//!
//! Randomness comes from ChaCha8 seeded with the configured seed and using
//! the sentence index as the stream number, which makes every sentence
//! reproducible on its own and lets datasets be built in parallel.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charset::{is_joiner, is_separator, SPACE, ZWNJ};
use crate::corpus::Corpus;
use crate::labeling::{encode_retained, encode_stripped, LabelError, Sample};

/// Identifies the random generator and how it is keyed; recorded in dataset metadata.
pub const GENERATOR_ID: &str = "chacha8/rand-0.9/seed=cfg.seed,stream=sentence_index";

/// Upper bounds of the per-sentence noise rates, plus the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub r1_max: f64,
    pub r2_max: f64,
    pub r3_max: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            r1_max: 0.15,
            r2_max: 0.20,
            r3_max: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NoiseError {
    #[error("noise rate bound {name} = {value} is outside [0, 1]")]
    BadRate { name: &'static str, value: f64 },
    #[error("sentence {index}: {source}")]
    Sentence {
        index: usize,
        #[source]
        source: LabelError,
    },
}

impl NoiseConfig {
    /// A configuration that leaves every sentence unchanged.
    pub fn zero(seed: u64) -> Self {
        NoiseConfig {
            r1_max: 0.0,
            r2_max: 0.0,
            r3_max: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, value) in [
            ("r1_max", self.r1_max),
            ("r2_max", self.r2_max),
            ("r3_max", self.r3_max),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::BadRate { name, value });
            }
        }
        Ok(())
    }

    pub fn rng_for(&self, sentence_index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(sentence_index as u64);
        rng
    }

    /// Draws the three rates, each uniform on the open interval `(0, max)`.
    pub fn draw_rates<R: Rng>(&self, rng: &mut R) -> NoiseRates {
        NoiseRates {
            r1: open_uniform(rng, self.r1_max),
            r2: open_uniform(rng, self.r2_max),
            r3: open_uniform(rng, self.r3_max),
        }
    }
}

fn open_uniform<R: Rng>(rng: &mut R, max: f64) -> f64 {
    if max <= 0.0 {
        return 0.0;
    }
    loop {
        let r = rng.random_range(0.0..max);
        if r > 0.0 {
            return r;
        }
    }
}

/// Concrete rates for one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseRates {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

/// What happened to one sentence. Positions index the working string as it
/// was at the start of the corresponding step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseDraw {
    pub rates: NoiseRates,
    pub zwnj_to_space: Vec<usize>,
    pub spaces_removed: Vec<usize>,
    pub perturbed: Vec<usize>,
}

/// A corrupted sentence with its retained-separator encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisySentence {
    pub noisy: String,
    pub sample: Sample,
    pub draw: NoiseDraw,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    ch: char,
    touched: bool,
}

fn count(rate: f64, len: usize, available: usize) -> usize {
    ((rate * len as f64).floor() as usize).min(available)
}

fn choose<R: Rng>(rng: &mut R, candidates: &[usize], amount: usize) -> Vec<usize> {
    let mut picked: Vec<usize> = index::sample(rng, candidates.len(), amount)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Corrupts `gold` using the seeded stream for `sentence_index`.
pub fn inject_noise(gold: &str, cfg: &NoiseConfig, sentence_index: usize) -> Result<NoisySentence, LabelError> {
    let mut rng = cfg.rng_for(sentence_index);
    let rates = cfg.draw_rates(&mut rng);
    inject_with_rates(gold, rates, &mut rng)
}

/// Corrupts `gold` with fixed rates; target positions still come from `rng`.
pub fn inject_with_rates<R: Rng>(gold: &str, rates: NoiseRates, rng: &mut R) -> Result<NoisySentence, LabelError> {
    let clean = encode_stripped(gold)?;
    let l = gold.chars().count();
    let mut slots: Vec<Slot> = gold.chars().map(|ch| Slot { ch, touched: false }).collect();
    let mut draw = NoiseDraw {
        rates,
        ..NoiseDraw::default()
    };

    // ZWNJ -> space
    let zwnjs: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].ch == ZWNJ).collect();
    let n1 = count(rates.r1, l, zwnjs.len());
    draw.zwnj_to_space = choose(rng, &zwnjs, n1);
    for &i in &draw.zwnj_to_space {
        slots[i] = Slot {
            ch: SPACE,
            touched: true,
        };
    }

    // drop spaces after non-joiners
    let eligible: Vec<usize> = (1..slots.len())
        .filter(|&i| {
            let s = slots[i];
            s.ch == SPACE && !s.touched && !is_separator(slots[i - 1].ch) && !is_joiner(slots[i - 1].ch)
        })
        .collect();
    let n2 = count(rates.r2, l, eligible.len());
    draw.spaces_removed = choose(rng, &eligible, n2);
    for &i in draw.spaces_removed.iter().rev() {
        slots.remove(i);
    }

    // perturb untouched characters
    let l_now = slots.len();
    let untouched: Vec<usize> = (0..l_now).filter(|&i| !slots[i].touched).collect();
    let n3 = count(rates.r3, l_now, untouched.len());
    draw.perturbed = choose(rng, &untouched, n3);
    for &i in draw.perturbed.iter().rev() {
        let coin = rng.random_bool(0.5);
        match slots[i].ch {
            SPACE => {
                if coin {
                    slots.remove(i);
                } else {
                    slots[i] = Slot {
                        ch: ZWNJ,
                        touched: true,
                    };
                }
            }
            ZWNJ => {
                if coin {
                    slots.remove(i);
                } else {
                    slots[i] = Slot {
                        ch: SPACE,
                        touched: true,
                    };
                }
            }
            _ => {
                slots[i].touched = true;
                match slots.get(i + 1) {
                    Some(next) if is_separator(next.ch) => {
                        slots.remove(i + 1);
                    }
                    _ => {
                        let sep = if coin { ZWNJ } else { SPACE };
                        slots.insert(i + 1, Slot { ch: sep, touched: true });
                    }
                }
            }
        }
    }

    let noisy: String = slots.iter().map(|s| s.ch).collect();
    let sample = encode_retained(&noisy, &clean.tags)?;
    Ok(NoisySentence { noisy, sample, draw })
}

/// Noises every sentence of `corpus`, using each sentence's position as its
/// stream index. Output order matches corpus order for any thread count.
pub fn build_noisy_dataset(corpus: &Corpus, cfg: &NoiseConfig) -> Result<Vec<Sample>, NoiseError> {
    build_noisy_dataset_from(corpus, cfg, 0)
}

/// Like [`build_noisy_dataset`], with stream indices starting at `first_index`.
/// Used when a split is noised separately from the rest of its corpus.
pub fn build_noisy_dataset_from(
    corpus: &Corpus,
    cfg: &NoiseConfig,
    first_index: usize,
) -> Result<Vec<Sample>, NoiseError> {
    cfg.validate()?;
    corpus
        .sentences
        .par_iter()
        .enumerate()
        .map(|(i, gold)| {
            let index = first_index + i;
            inject_noise(gold, cfg, index)
                .map(|n| n.sample)
                .map_err(|source| NoiseError::Sentence { index, source })
        })
        .collect()
}

/// The `#meta` record written at the top of dataset files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub mode: String,
    pub split: String,
    pub seed: Option<u64>,
    pub r1_max: Option<f64>,
    pub r2_max: Option<f64>,
    pub r3_max: Option<f64>,
    pub generator: Option<String>,
    pub first_index: usize,
    pub tool_version: String,
}

impl DatasetMeta {
    pub fn stripped(split: &str, first_index: usize) -> Self {
        DatasetMeta {
            mode: "A".into(),
            split: split.into(),
            seed: None,
            r1_max: None,
            r2_max: None,
            r3_max: None,
            generator: None,
            first_index,
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn noisy(split: &str, first_index: usize, cfg: &NoiseConfig) -> Self {
        DatasetMeta {
            mode: "B".into(),
            split: split.into(),
            seed: Some(cfg.seed),
            r1_max: Some(cfg.r1_max),
            r2_max: Some(cfg.r2_max),
            r3_max: Some(cfg.r3_max),
            generator: Some(GENERATOR_ID.into()),
            first_index,
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metadata serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::{Labeled, Tag};
    use proptest::prelude::*;

    const MI_KONAM: &str = "mi\u{200C}konam";

    #[test]
    fn zero_rates_are_identity() {
        let cfg = NoiseConfig::zero(7);
        for (i, g) in [
            "ab cd",
            MI_KONAM,
            "x",
            "\u{062F}\u{0631} \u{0628}\u{0627}\u{0631}\u{0647}",
        ]
        .iter()
        .enumerate()
        {
            let n = inject_noise(g, &cfg, i).unwrap();
            assert_eq!(n.noisy, *g);
            let clean = encode_stripped(g).unwrap();
            assert_eq!(n.sample, encode_retained(g, &clean.tags).unwrap());
        }
    }

    #[test]
    fn forced_zwnj_to_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rates = NoiseRates {
            r1: 1.0,
            r2: 0.0,
            r3: 0.0,
        };
        let n = inject_with_rates(MI_KONAM, rates, &mut rng).unwrap();
        assert_eq!(n.noisy, "mi konam");
        assert_eq!(n.draw.zwnj_to_space, vec![2]);
        assert_eq!(n.sample.tags[1], Tag::Zwnj);
        assert!(!n.sample.mask[2]);
    }

    #[test]
    fn forced_space_removal_after_non_joiner() {
        // "dar bare": re (U+0631) does not join forward, so its space is eligible
        let gold = "\u{062F}\u{0631} \u{0628}\u{0627}\u{0631}\u{0647}";
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = inject_with_rates(
            gold,
            NoiseRates {
                r1: 0.0,
                r2: 1.0,
                r3: 0.0,
            },
            &mut rng,
        )
        .unwrap();
        assert_eq!(n.noisy, "\u{062F}\u{0631}\u{0628}\u{0627}\u{0631}\u{0647}");
        assert_eq!(n.draw.spaces_removed, vec![2]);
        assert_eq!(n.sample.tags[1], Tag::Space);
        assert!(n.sample.mask.iter().all(|m| *m));

        // spaces after joiners stay: meem joins forward
        let gold = "\u{0645} \u{0628}";
        let n = inject_with_rates(
            gold,
            NoiseRates {
                r1: 0.0,
                r2: 1.0,
                r3: 0.0,
            },
            &mut rng,
        )
        .unwrap();
        assert_eq!(n.noisy, gold);
    }

    #[test]
    fn perturbation_step_cases() {
        let mut seen_insert = false;
        let mut seen_removal = false;
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = inject_with_rates(
                "ab c",
                NoiseRates {
                    r1: 0.0,
                    r2: 0.0,
                    r3: 0.3,
                },
                &mut rng,
            )
            .unwrap();
            // one position is perturbed
            assert_eq!(n.draw.perturbed.len(), 1);
            let p = n.draw.perturbed[0];
            match p {
                0 => {
                    assert!(n.noisy == "a b c" || n.noisy == "a\u{200C}b c");
                    seen_insert = true;
                }
                1 => {
                    assert_eq!(n.noisy, "abc");
                    seen_removal = true;
                }
                2 => assert!(n.noisy == "abc" || n.noisy == "ab\u{200C}c"),
                3 => assert!(n.noisy == "ab c " || n.noisy == "ab c\u{200C}"),
                _ => unreachable!(),
            }
        }
        assert!(seen_insert && seen_removal);
    }

    #[test]
    fn deterministic_per_index() {
        let cfg = NoiseConfig {
            seed: 42,
            ..NoiseConfig::default()
        };
        let g = "\u{0645}\u{06CC}\u{200C}\u{06A9}\u{0646}\u{0645} \u{062F}\u{0631} \u{0628}\u{0627}\u{0631}\u{0647}";
        assert_eq!(inject_noise(g, &cfg, 3).unwrap(), inject_noise(g, &cfg, 3).unwrap());
    }

    #[test]
    fn dataset_is_reproducible_and_seed_sensitive() {
        let sentences: Vec<String> = (0..100)
            .map(|i| {
                let words = [
                    "\u{062F}\u{0631}",
                    "\u{0645}\u{06CC}\u{200C}\u{0631}\u{0648}\u{0645}",
                    "\u{06A9}\u{062A}\u{0627}\u{0628}",
                    "\u{0628}\u{0627}\u{0631}\u{0647}",
                    "\u{0622}\u{0646}\u{200C}\u{0647}\u{0627}",
                ];
                (0..6)
                    .map(|k| words[(i * 7 + k * 3) % words.len()])
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let corpus = Corpus::new("t", sentences);
        let a = build_noisy_dataset(
            &corpus,
            &NoiseConfig {
                seed: 1,
                ..NoiseConfig::default()
            },
        )
        .unwrap();
        let b = build_noisy_dataset(
            &corpus,
            &NoiseConfig {
                seed: 1,
                ..NoiseConfig::default()
            },
        )
        .unwrap();
        let c = build_noisy_dataset(
            &corpus,
            &NoiseConfig {
                seed: 2,
                ..NoiseConfig::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let z = build_noisy_dataset(&corpus, &NoiseConfig::zero(9)).unwrap();
        for (s, g) in z.iter().zip(&corpus.sentences) {
            assert_eq!(*s, encode_retained(g, &encode_stripped(g).unwrap().tags).unwrap());
        }
    }

    #[test]
    fn invalid_configs() {
        let cfg = NoiseConfig {
            r2_max: 1.5,
            ..NoiseConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(NoiseError::BadRate { name: "r2_max", .. })
        ));
        let bad = Corpus::new("t", vec!["a  b".into()]);
        assert!(matches!(
            build_noisy_dataset(&bad, &NoiseConfig::default()),
            Err(NoiseError::Sentence { index: 0, .. })
        ));
    }

    fn sentence() -> impl Strategy<Value = String> {
        let letter = prop_oneof![
            Just('\u{0627}'),
            Just('\u{062F}'),
            Just('\u{0631}'),
            Just('\u{0648}'),
            Just('\u{0628}'),
            Just('\u{0645}'),
            Just('\u{06CC}'),
            Just('\u{06A9}'),
            Just('\u{06F5}'),
        ];
        let sep = prop_oneof![3 => Just(None), 2 => Just(Some(SPACE)), 1 => Just(Some(ZWNJ))];
        proptest::collection::vec((letter, sep), 1..80).prop_map(|v| {
            let n = v.len();
            let mut s = String::new();
            for (i, (c, sep)) in v.into_iter().enumerate() {
                s.push(c);
                if i + 1 < n {
                    s.extend(sep);
                }
            }
            s
        })
    }

    proptest! {
        #[test]
        fn noise_respects_bounds_and_preserves_letters(g in sentence(), seed in any::<u64>(), idx in 0usize..1000) {
            let cfg = NoiseConfig { seed, ..NoiseConfig::default() };
            let n = inject_noise(&g, &cfg, idx).unwrap();
            let l = g.chars().count();
            let bound = |r: f64| (r * l as f64).floor() as usize + 1;
            prop_assert!(n.draw.zwnj_to_space.len() <= bound(cfg.r1_max));
            prop_assert!(n.draw.spaces_removed.len() <= bound(cfg.r2_max));
            prop_assert!(n.draw.perturbed.len() <= bound(cfg.r3_max));
            prop_assert!(n.draw.rates.r1 > 0.0 && n.draw.rates.r1 < cfg.r1_max);
            prop_assert!(n.draw.rates.r2 > 0.0 && n.draw.rates.r2 < cfg.r2_max);
            prop_assert!(n.draw.rates.r3 > 0.0 && n.draw.rates.r3 < cfg.r3_max);
            let letters = |s: &str| s.chars().filter(|c| !is_separator(*c)).collect::<String>();
            prop_assert_eq!(letters(&n.noisy), letters(&g));
            let chars: Vec<char> = n.noisy.chars().collect();
            prop_assert!(!chars.windows(2).any(|w| is_separator(w[0]) && is_separator(w[1])));
            prop_assert!(!chars.first().copied().is_some_and(is_separator));
            let gold_tags: Vec<Tag> = n.sample.tags().iter().zip(n.sample.mask()).filter(|(_, m)| **m).map(|(t, _)| *t).collect();
            prop_assert_eq!(gold_tags, encode_stripped(&g).unwrap().tags);
        }
    }
}
