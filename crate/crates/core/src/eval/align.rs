//! Ratcliff/Obershelp alignment: take the longest contiguous matching block,
//! then recurse on the unmatched pieces to its left and right.
//!
//! Block selection follows Python's `difflib.SequenceMatcher` with no junk
//! heuristic: among longest blocks the one starting earliest in `a` wins, then
//! the one starting earliest in `b`.

use std::collections::HashMap;
use std::hash::Hash;

/// `a[a_start..a_start + len] == b[b_start..b_start + len]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingBlock {
    pub a_start: usize,
    pub b_start: usize,
    pub len: usize,
}

/// Two sequences padded to equal length. `None` is the placeholder column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment<T> {
    pub padded_a: Vec<Option<T>>,
    pub padded_b: Vec<Option<T>>,
    pub blocks: Vec<MatchingBlock>,
}

impl<T: Copy> Alignment<T> {
    pub fn len(&self) -> usize {
        self.padded_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.padded_a.is_empty()
    }

    /// Original `a` with placeholders removed.
    pub fn a(&self) -> Vec<T> {
        self.padded_a.iter().flatten().copied().collect()
    }

    pub fn b(&self) -> Vec<T> {
        self.padded_b.iter().flatten().copied().collect()
    }
}

impl Alignment<char> {
    /// Renders side `a` with `placeholder` in padded columns, for display.
    pub fn render_a(&self, placeholder: char) -> String {
        self.padded_a.iter().map(|c| c.unwrap_or(placeholder)).collect()
    }

    pub fn render_b(&self, placeholder: char) -> String {
        self.padded_b.iter().map(|c| c.unwrap_or(placeholder)).collect()
    }
}

struct Matcher<'a, T> {
    a: &'a [T],
    b: &'a [T],
    b2j: HashMap<T, Vec<usize>>,
}

impl<'a, T: Eq + Hash + Copy> Matcher<'a, T> {
    fn new(a: &'a [T], b: &'a [T]) -> Self {
        let mut b2j: HashMap<T, Vec<usize>> = HashMap::new();
        for (j, x) in b.iter().enumerate() {
            b2j.entry(*x).or_default().push(j);
        }
        Matcher { a, b, b2j }
    }

    fn longest_match(&self, alo: usize, ahi: usize, blo: usize, bhi: usize) -> MatchingBlock {
        let mut best = MatchingBlock {
            a_start: alo,
            b_start: blo,
            len: 0,
        };
        let mut j2len: HashMap<usize, usize> = HashMap::new();
        for i in alo..ahi {
            let mut next: HashMap<usize, usize> = HashMap::new();
            if let Some(js) = self.b2j.get(&self.a[i]) {
                for &j in js {
                    if j < blo {
                        continue;
                    }
                    if j >= bhi {
                        break;
                    }
                    let k = j.checked_sub(1).and_then(|p| j2len.get(&p)).copied().unwrap_or(0) + 1;
                    next.insert(j, k);
                    if k > best.len {
                        best = MatchingBlock {
                            a_start: i + 1 - k,
                            b_start: j + 1 - k,
                            len: k,
                        };
                    }
                }
            }
            j2len = next;
        }
        best
    }

    fn matching_blocks(&self) -> Vec<MatchingBlock> {
        let mut queue = vec![(0, self.a.len(), 0, self.b.len())];
        let mut blocks = Vec::new();
        while let Some((alo, ahi, blo, bhi)) = queue.pop() {
            let m = self.longest_match(alo, ahi, blo, bhi);
            if m.len == 0 {
                continue;
            }
            if alo < m.a_start && blo < m.b_start {
                queue.push((alo, m.a_start, blo, m.b_start));
            }
            if m.a_start + m.len < ahi && m.b_start + m.len < bhi {
                queue.push((m.a_start + m.len, ahi, m.b_start + m.len, bhi));
            }
            blocks.push(m);
        }
        blocks.sort_by_key(|m| (m.a_start, m.b_start));
        // merge adjacent blocks
        let mut merged: Vec<MatchingBlock> = Vec::with_capacity(blocks.len());
        for m in blocks {
            match merged.last_mut() {
                Some(last) if last.a_start + last.len == m.a_start && last.b_start + last.len == m.b_start => {
                    last.len += m.len;
                }
                _ => merged.push(m),
            }
        }
        merged
    }
}

/// Aligns two sequences. Unmatched stretches of `a` come first, padded
/// opposite with placeholders, followed by the unmatched stretch of `b`.
pub fn align<T: Eq + Hash + Copy>(a: &[T], b: &[T]) -> Alignment<T> {
    let blocks = Matcher::new(a, b).matching_blocks();
    let mut padded_a = Vec::with_capacity(a.len() + b.len());
    let mut padded_b = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let sentinel = MatchingBlock {
        a_start: a.len(),
        b_start: b.len(),
        len: 0,
    };
    for m in blocks.iter().chain(std::iter::once(&sentinel)) {
        for x in &a[i..m.a_start] {
            padded_a.push(Some(*x));
            padded_b.push(None);
        }
        for y in &b[j..m.b_start] {
            padded_a.push(None);
            padded_b.push(Some(*y));
        }
        for k in 0..m.len {
            padded_a.push(Some(a[m.a_start + k]));
            padded_b.push(Some(b[m.b_start + k]));
        }
        i = m.a_start + m.len;
        j = m.b_start + m.len;
    }
    Alignment {
        padded_a,
        padded_b,
        blocks,
    }
}

/// Character-level alignment of two strings.
pub fn align_strings(a: &str, b: &str) -> Alignment<char> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    align(&a, &b)
}
