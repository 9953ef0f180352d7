//! Character classes and normalization.
//!
//! ```text
//! cargo run --example normalize
//! ```

use nimfasele::charset::{classify_joiner, CharClassTable};

fn main() -> anyhow::Result<()> {
    for c in ['\u{0628}', '\u{0631}', '\u{0627}', '\u{0621}', '\u{06F5}', 'a'] {
        println!("U+{:04X} {c}  {:?}", c as u32, classify_joiner(c));
    }

    // Arabic yeh and kaf, a tatweel, a doubled space and a stray left-to-right mark
    let raw = "\u{064A}\u{0643}\u{0640}  \u{0628}\u{200E}\u{0647}";
    let table = CharClassTable::persian();
    println!("{raw:?} -> {:?}", table.normalize(raw));

    let digits = CharClassTable::persian().with_digit_unification();
    println!("{:?}", digits.normalize("\u{06F1}\u{06F4}\u{06F0}\u{06F3}"));

    // extra entries: hex code point, TAB, replacement
    let custom = CharClassTable::persian().with_overrides("0041\ta\n# comment\n0042\t\n".as_bytes())?;
    println!("{:?}", custom.normalize("ABC"));
    Ok(())
}
