//! Persian/Arabic-script character knowledge.
//!
//! This module answers three questions about a character: how it joins to its
//! neighbours, whether it is a digit, and what it normalizes to. The two
//! separator characters that the rest of the crate predicts, SPACE and ZWNJ,
//! are defined here as well.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use unicode_joining_type::{get_joining_type, JoiningType};

/// U+0020, the word separator.
pub const SPACE: char = ' ';
/// U+200C ZERO WIDTH NON-JOINER, the intra-word separator.
pub const ZWNJ: char = '\u{200C}';
/// U+200D ZERO WIDTH JOINER. Removed by normalization.
pub const ZWJ: char = '\u{200D}';

/// Returns `true` for the two characters whose placement is being predicted.
#[inline]
pub fn is_separator(c: char) -> bool {
    c == SPACE || c == ZWNJ
}

/// Cursive joining behaviour of a character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JoinerClass {
    /// Connects to both neighbours (joining types D, L and C).
    DualJoining,
    /// Connects only to the preceding letter (joining type R), e.g. alef, dal, re, vav.
    RightJoiningOnly,
    /// An Arabic-script letter that connects to neither side (joining type U).
    NonJoining,
    /// Anything that is not an Arabic-script letter.
    NonLetter,
}

impl JoinerClass {
    /// A ZWNJ placed after a character of this class has a visible effect.
    pub fn is_joiner(self) -> bool {
        self == JoinerClass::DualJoining
    }
}

const ARABIC_BLOCKS: &[(u32, u32)] = &[
    (0x0600, 0x06FF), // Arabic
    (0x0750, 0x077F), // Arabic Supplement
    (0x0870, 0x089F), // Arabic Extended-B
    (0x08A0, 0x08FF), // Arabic Extended-A
    (0xFB50, 0xFDFF), // Arabic Presentation Forms-A
    (0xFE70, 0xFEFF), // Arabic Presentation Forms-B
];

fn in_arabic_blocks(c: char) -> bool {
    let u = c as u32;
    ARABIC_BLOCKS.iter().any(|&(lo, hi)| (lo..=hi).contains(&u))
}

/// Classifies `c` by its Unicode joining type. Total over all scalar values.
pub fn classify_joiner(c: char) -> JoinerClass {
    if !in_arabic_blocks(c) || !c.is_alphabetic() {
        return JoinerClass::NonLetter;
    }
    match get_joining_type(c) {
        JoiningType::DualJoining | JoiningType::LeftJoining | JoiningType::JoinCausing => JoinerClass::DualJoining,
        JoiningType::RightJoining => JoinerClass::RightJoiningOnly,
        JoiningType::NonJoining => JoinerClass::NonJoining,
        JoiningType::Transparent => JoinerClass::NonLetter,
        _ => JoinerClass::NonLetter,
    }
}

/// Shorthand for `classify_joiner(c).is_joiner()`.
#[inline]
pub fn is_joiner(c: char) -> bool {
    classify_joiner(c).is_joiner()
}

/// ASCII, Persian (U+06F0..U+06F9) or Arabic-Indic (U+0660..U+0669) digit.
#[inline]
pub fn is_digit(c: char) -> bool {
    c.is_ascii_digit() || ('\u{06F0}'..='\u{06F9}').contains(&c) || ('\u{0660}'..='\u{0669}').contains(&c)
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mapping for U+{from:04X} is not idempotent: its replacement contains U+{offender:04X}, which is itself remapped")]
    NotIdempotent { from: u32, offender: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Character classification and normalization data.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone)]
pub struct CharClassTable {
    normalization: HashMap<char, String>,
}

impl Default for CharClassTable {
    fn default() -> Self {
        Self::persian()
    }
}

impl CharClassTable {
    /// The built-in Arabic-to-Persian canonicalization table.
    ///
    /// Arabic-Indic digits are left alone; see [`CharClassTable::with_digit_unification`].
    pub fn persian() -> Self {
        let mut map: HashMap<char, String> = HashMap::new();
        let mut put = |from: char, to: &str| {
            map.insert(from, to.to_string());
        };
        // ya and kaf
        put('\u{064A}', "\u{06CC}");
        put('\u{0649}', "\u{06CC}");
        put('\u{0643}', "\u{06A9}");
        // alef with hamza above/below, wasla and wavy hamza variants
        for c in ['\u{0623}', '\u{0625}', '\u{0671}', '\u{0672}', '\u{0673}'] {
            put(c, "\u{0627}");
        }
        // teh marbuta and Arabic heh goal variants
        put('\u{0629}', "\u{0647}");
        put('\u{06D5}', "\u{0647}");
        // tatweel and harakat
        put('\u{0640}', "");
        for u in 0x064Bu32..=0x065F {
            put(char::from_u32(u).unwrap(), "");
        }
        put('\u{0670}', "");
        Self { normalization: map }
    }

    /// Also maps Arabic-Indic digits U+0660..U+0669 to Persian digits.
    pub fn with_digit_unification(mut self) -> Self {
        for i in 0..10u32 {
            let from = char::from_u32(0x0660 + i).unwrap();
            let to = char::from_u32(0x06F0 + i).unwrap();
            self.normalization.insert(from, to.to_string());
        }
        self
    }

    /// Applies overrides read from a `<hex codepoint>\t<replacement>` table.
    ///
    /// An empty replacement deletes the character. Lines starting with `#` and
    /// blank lines are ignored. The merged table is checked for idempotence.
    pub fn with_overrides<R: BufRead>(mut self, reader: R) -> Result<Self, TableError> {
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (code, replacement) = line.split_once('\t').ok_or_else(|| TableError::Parse {
                line: line_no,
                message: "expected <hex codepoint><TAB><replacement>".into(),
            })?;
            let code = code.trim();
            let code = code
                .strip_prefix("U+")
                .or_else(|| code.strip_prefix("0x"))
                .unwrap_or(code);
            let from = u32::from_str_radix(code, 16)
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| TableError::Parse {
                    line: line_no,
                    message: format!("invalid codepoint `{code}`"),
                })?;
            if is_separator(from) {
                return Err(TableError::Parse {
                    line: line_no,
                    message: "separator characters cannot be remapped".into(),
                });
            }
            if replacement.chars().any(is_separator) {
                return Err(TableError::Parse {
                    line: line_no,
                    message: "replacement may not contain SPACE or ZWNJ".into(),
                });
            }
            self.normalization.insert(from, replacement.to_string());
        }
        self.check_idempotent()?;
        Ok(self)
    }

    fn check_idempotent(&self) -> Result<(), TableError> {
        for (&from, to) in &self.normalization {
            if let Some(offender) = to.chars().find(|c| self.maps(*c)) {
                return Err(TableError::NotIdempotent {
                    from: from as u32,
                    offender: offender as u32,
                });
            }
        }
        Ok(())
    }

    /// `true` when normalization changes `c`, including control and format
    /// characters, which are always dropped.
    fn maps(&self, c: char) -> bool {
        self.normalization.contains_key(&c) || is_dropped(c)
    }

    pub fn classify_joiner(&self, c: char) -> JoinerClass {
        classify_joiner(c)
    }

    pub fn is_joiner(&self, c: char) -> bool {
        is_joiner(c)
    }

    pub fn is_digit(&self, c: char) -> bool {
        is_digit(c)
    }

    /// Sorted view of the normalization map, for display and diagnostics.
    pub fn mappings(&self) -> BTreeMap<char, &str> {
        self.normalization.iter().map(|(k, v)| (*k, v.as_str())).collect()
    }

    /// Maps every character through the table, drops control and format
    /// characters (ZWNJ excepted), then collapses each run of separators to
    /// its first member.
    pub fn normalize(&self, s: &str) -> String {
        let mut out = String::with_capacity(s.len());
        let mut prev_sep = false;
        let mut push = |c: char, out: &mut String| {
            let sep = is_separator(c);
            if !(sep && prev_sep) {
                out.push(c);
            }
            prev_sep = sep;
        };
        for c in s.chars() {
            if let Some(rep) = self.normalization.get(&c) {
                for r in rep.chars() {
                    push(r, &mut out);
                }
            } else if !is_dropped(c) {
                push(c, &mut out);
            }
        }
        out
    }
}

/// Control characters and format characters other than ZWNJ.
fn is_dropped(c: char) -> bool {
    if c == ZWNJ {
        return false;
    }
    c.is_control() || is_format(c)
}

// General category Cf. std does not expose categories, so the ranges are listed.
fn is_format(c: char) -> bool {
    matches!(c as u32,
        0x00AD
        | 0x0600..=0x0605
        | 0x061C
        | 0x06DD
        | 0x070F
        | 0x0890..=0x0891
        | 0x08E2
        | 0x180E
        | 0x200B..=0x200F
        | 0x202A..=0x202E
        | 0x2060..=0x2064
        | 0x2066..=0x206F
        | 0xFEFF
        | 0xFFF9..=0xFFFB
        | 0x110BD
        | 0x110CD
        | 0x13430..=0x1343F
        | 0x1BCA0..=0x1BCA3
        | 0x1D173..=0x1D17A
        | 0xE0001
        | 0xE0020..=0xE007F)
}

/// Normalizes with the default Persian table.
pub fn normalize_text(s: &str) -> String {
    thread_local! {
        static TABLE: CharClassTable = CharClassTable::persian();
    }
    TABLE.with(|t| t.normalize(s))
}
