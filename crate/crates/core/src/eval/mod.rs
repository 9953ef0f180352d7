//! Separator-tagging metrics.
//!
//! Reports hold a 3×3 confusion matrix indexed `[gold][predicted]`; precision,
//! recall and F1 per tag and the macro-F1 (unweighted mean of the three class
//! F1 scores) are derived from it. A tag that occurs neither in the gold data
//! nor in the predictions scores F1 = 1 and is flagged as absent.

mod align;

use std::fmt::Write as _;

use serde::Serialize;

pub use align::{align, align_strings, Alignment, MatchingBlock};

use crate::corpus::ParallelPair;
use crate::labeling::{read_separators, Tag};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: {gold} gold tags, {pred} predicted tags, {mask} mask flags")]
    Length { gold: usize, pred: usize, mask: usize },
    #[error("raw and gold text differ in non-separator characters; use evaluate_external")]
    NotComparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences.
    pub support: u64,
    pub predicted: u64,
    /// Neither in gold nor predicted; the metrics are then defined as 1.
    pub absent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// `confusion[gold][predicted]`.
    pub confusion: [[u64; 3]; 3],
    pub per_class: [ClassMetrics; 3],
    pub macro_f1: f64,
    /// Positions that were not scored (masked, or unaligned).
    pub masked_skipped: u64,
}

/// Unweighted mean of per-class F1 scores.
pub fn macro_f1(class_f1: &[f64]) -> f64 {
    if class_f1.is_empty() {
        return 0.0;
    }
    class_f1.iter().sum::<f64>() / class_f1.len() as f64
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn from_confusion(confusion: [[u64; 3]; 3], masked_skipped: u64) -> Self {
        let per_class = std::array::from_fn(|k| {
            let tp = confusion[k][k];
            let support: u64 = confusion[k].iter().sum();
            let predicted: u64 = (0..3).map(|g| confusion[g][k]).sum();
            if support == 0 && predicted == 0 {
                return ClassMetrics {
                    precision: 1.0,
                    recall: 1.0,
                    f1: 1.0,
                    support,
                    predicted,
                    absent: true,
                };
            }
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support,
                predicted,
                absent: false,
            }
        });
        let f1s: Vec<f64> = per_class.iter().map(|c: &ClassMetrics| c.f1).collect();
        EvalReport {
            confusion,
            macro_f1: macro_f1(&f1s),
            per_class,
            masked_skipped,
        }
    }

    /// Scored positions.
    pub fn positions(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn support(&self) -> [u64; 3] {
        std::array::from_fn(|k| self.per_class[k].support)
    }

    /// Sums the counts of two reports and recomputes the rates.
    pub fn merge(&self, other: &EvalReport) -> EvalReport {
        let mut c = self.confusion;
        for (row, orow) in c.iter_mut().zip(&other.confusion) {
            for (x, y) in row.iter_mut().zip(orow) {
                *x += y;
            }
        }
        EvalReport::from_confusion(c, self.masked_skipped + other.masked_skipped)
    }

    /// Merges any number of reports; an empty input gives an empty report.
    pub fn merge_all<'a>(reports: impl IntoIterator<Item = &'a EvalReport>) -> EvalReport {
        reports
            .into_iter()
            .fold(EvalReport::from_confusion([[0; 3]; 3], 0), |acc, r| acc.merge(r))
    }

    /// `key=value` lines with every count and rate.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "positions={}", self.positions());
        let _ = writeln!(s, "masked_skipped={}", self.masked_skipped);
        for g in 0..3 {
            for p in 0..3 {
                let _ = writeln!(s, "confusion.{g}.{p}={}", self.confusion[g][p]);
            }
        }
        for (k, c) in self.per_class.iter().enumerate() {
            let _ = writeln!(s, "support.{k}={}", c.support);
            let _ = writeln!(s, "predicted.{k}={}", c.predicted);
            let _ = writeln!(s, "precision.{k}={:.6}", c.precision);
            let _ = writeln!(s, "recall.{k}={:.6}", c.recall);
            let _ = writeln!(s, "f1.{k}={:.6}", c.f1);
            let _ = writeln!(s, "absent.{k}={}", c.absent);
        }
        let _ = writeln!(s, "macro_f1={:.6}", self.macro_f1);
        s
    }

    /// A table with one row per system: class F1 for tags 0, 1, 2 and the average.
    pub fn render_table(rows: &[(&str, &EvalReport)]) -> String {
        let width = rows.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0).max(6);
        let mut s = String::new();
        let _ = writeln!(s, "{:width$} | {:^26} | {:^7}", "", "Class F1", "Avg. F1");
        let _ = writeln!(s, "{:width$} | {:^8} {:^8} {:^8} | {:^7}", "", "0", "1", "2", "");
        let _ = writeln!(s, "{}", "-".repeat(width + 40));
        for (name, r) in rows {
            let f: Vec<String> = r
                .per_class
                .iter()
                .map(|c| {
                    if c.absent {
                        format!("{:.4}*", c.f1)
                    } else {
                        format!("{:.4}", c.f1)
                    }
                })
                .collect();
            let _ = writeln!(
                s,
                "{:width$} | {:^8} {:^8} {:^8} | {:^7.4}",
                name, f[0], f[1], f[2], r.macro_f1
            );
        }
        if rows.iter().any(|(_, r)| r.per_class.iter().any(|c| c.absent)) {
            let _ = writeln!(s, "* tag absent from both gold and prediction");
        }
        s
    }

    /// Per-class precision/recall/F1 and the confusion matrix.
    pub fn render_details(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "tag  precision  recall     f1         support");
        for (k, c) in self.per_class.iter().enumerate() {
            let _ = writeln!(
                s,
                "{k:<4} {:<10.4} {:<10.4} {:<10.4} {}",
                c.precision, c.recall, c.f1, c.support
            );
        }
        let _ = writeln!(s, "macro-F1 {:.4}", self.macro_f1);
        let _ = writeln!(s, "confusion (rows gold, columns predicted):");
        for (g, row) in self.confusion.iter().enumerate() {
            let _ = writeln!(s, "  {g}: {:>8} {:>8} {:>8}", row[0], row[1], row[2]);
        }
        if self.masked_skipped > 0 {
            let _ = writeln!(s, "unscored positions: {}", self.masked_skipped);
        }
        s
    }
}

/// Scores `pred` against `gold` on the positions where `mask` is true.
pub fn evaluate(gold: &[Tag], pred: &[Tag], mask: &[bool]) -> Result<EvalReport, EvalError> {
    if gold.len() != pred.len() || gold.len() != mask.len() {
        return Err(EvalError::Length {
            gold: gold.len(),
            pred: pred.len(),
            mask: mask.len(),
        });
    }
    let mut confusion = [[0u64; 3]; 3];
    let mut skipped = 0;
    for ((g, p), m) in gold.iter().zip(pred).zip(mask) {
        if *m {
            confusion[g.index()][p.index()] += 1;
        } else {
            skipped += 1;
        }
    }
    Ok(EvalReport::from_confusion(confusion, skipped))
}

/// Scores the uncorrected text of `pair` as if it were a prediction of the gold tags.
pub fn score_baseline(pair: &ParallelPair) -> Result<EvalReport, EvalError> {
    let (raw_chars, raw_tags) = read_separators(&pair.raw);
    let (gold_chars, gold_tags) = read_separators(&pair.gold);
    if raw_chars != gold_chars {
        return Err(EvalError::NotComparable);
    }
    evaluate(&gold_tags, &raw_tags, &vec![true; gold_tags.len()])
}

/// Scores the output of an external corrector that may also have changed letters.
///
/// The non-separator characters of `corrected` are aligned against those of
/// `gold`. Columns where both sides hold the same character are scored by the
/// separator that follows it on each side; all other columns count towards
/// `masked_skipped`. `original` is not used for scoring: both gold and the
/// corrector's input share its letters, so aligning against gold is
/// equivalent, and the argument is kept so callers can pass the full triple.
pub fn evaluate_external(original: &str, corrected: &str, gold: &str) -> EvalReport {
    let _ = original;
    let (gold_chars, gold_tags) = read_separators(gold);
    let (corr_chars, corr_tags) = read_separators(corrected);
    let al = align(&gold_chars, &corr_chars);
    let mut confusion = [[0u64; 3]; 3];
    let mut skipped = 0;
    let (mut i, mut j) = (0, 0);
    for (g, c) in al.padded_a.iter().zip(&al.padded_b) {
        match (g, c) {
            (Some(x), Some(y)) if x == y => {
                confusion[gold_tags[i].index()][corr_tags[j].index()] += 1;
            }
            _ => skipped += 1,
        }
        i += g.is_some() as usize;
        j += c.is_some() as usize;
    }
    EvalReport::from_confusion(confusion, skipped)
}
