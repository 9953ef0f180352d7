//! Text model format.
//!
//! ```text
//! CRFSEG1
//! version 1
//! labels 0 1 2
//! offsets -5 -4 -3 -2 -1 0 1 2 3 4 5
//! booleans is_first is_last is_joiner is_digit
//! features <count>
//! <feature as JSON string>\t<w0>\t<w1>\t<w2>
//! ...
//! transitions
//! <w00>\t<w01>\t<w02>
//! <w10>\t<w11>\t<w12>
//! <w20>\t<w21>\t<w22>
//! end
//! ```
//!
//! Weights are the 16 hex digits of their IEEE-754 bit pattern, so a save and
//! load round trip is bit-exact.

use std::io::{BufRead, Write};
use std::sync::Arc;

use super::features::{BoolFeature, FeatureTemplate, FeatureVocab};
use super::lattice::L;
use super::model::CrfModel;
use super::CrfError;

pub const MAGIC: &str = "CRFSEG1";
pub const FORMAT_VERSION: u32 = 1;

fn hex(w: f64) -> String {
    format!("{:016x}", w.to_bits())
}

fn unhex(s: &str, line: usize) -> Result<f64, CrfError> {
    if s.len() != 16 {
        return Err(CrfError::Format {
            line,
            message: format!("bad weight `{s}`"),
        });
    }
    let bits = u64::from_str_radix(s, 16).map_err(|_| CrfError::Format {
        line,
        message: format!("bad weight `{s}`"),
    })?;
    let w = f64::from_bits(bits);
    if !w.is_finite() {
        return Err(CrfError::Format {
            line,
            message: "non-finite weight".into(),
        });
    }
    Ok(w)
}

pub fn save_model<W: Write>(model: &CrfModel, mut out: W) -> Result<(), CrfError> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "version {FORMAT_VERSION}")?;
    writeln!(out, "labels 0 1 2")?;
    let offsets: Vec<String> = model.template.offsets.iter().map(|o| o.to_string()).collect();
    writeln!(out, "offsets {}", offsets.join(" "))?;
    let booleans: Vec<&str> = model.template.booleans.iter().map(|b| b.name()).collect();
    writeln!(out, "booleans {}", booleans.join(" "))?;
    writeln!(out, "features {}", model.vocab.len())?;
    for (id, name) in model.vocab.names().iter().enumerate() {
        let w = &model.state[id * L..id * L + L];
        let key = serde_json::to_string(name).expect("strings serialize");
        writeln!(out, "{key}\t{}\t{}\t{}", hex(w[0]), hex(w[1]), hex(w[2]))?;
    }
    writeln!(out, "transitions")?;
    for row in &model.transition {
        writeln!(out, "{}\t{}\t{}", hex(row[0]), hex(row[1]), hex(row[2]))?;
    }
    writeln!(out, "end")?;
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: R,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String, CrfError> {
        let mut s = String::new();
        let n = self.inner.read_line(&mut s).map_err(|e| {
            if e.kind() == std::io::ErrorKind::InvalidData {
                CrfError::Format {
                    line: self.line + 1,
                    message: "invalid UTF-8".into(),
                }
            } else {
                CrfError::Io(e)
            }
        })?;
        if n == 0 {
            return Err(CrfError::Truncated);
        }
        self.line += 1;
        if s.ends_with('\n') {
            s.pop();
            if s.ends_with('\r') {
                s.pop();
            }
        }
        Ok(s)
    }

    fn keyed(&mut self, key: &str) -> Result<String, CrfError> {
        let s = self.next()?;
        match s.strip_prefix(key) {
            Some("") => Ok(String::new()),
            Some(rest) if rest.starts_with(' ') => Ok(rest[1..].to_string()),
            _ => Err(self.err(format!("expected `{key}`"))),
        }
    }

    fn err(&self, message: impl Into<String>) -> CrfError {
        CrfError::Format {
            line: self.line,
            message: message.into(),
        }
    }
}

pub fn load_model<R: BufRead>(input: R) -> Result<CrfModel, CrfError> {
    let mut lines = Lines { inner: input, line: 0 };
    let magic = lines.next().map_err(|e| match e {
        CrfError::Truncated => CrfError::BadMagic,
        other => other,
    })?;
    if magic != MAGIC {
        return Err(CrfError::BadMagic);
    }
    let version = lines.keyed("version")?;
    let version: u32 = version.trim().parse().map_err(|_| lines.err("bad version"))?;
    if version != FORMAT_VERSION {
        return Err(CrfError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if lines.keyed("labels")? != "0 1 2" {
        return Err(lines.err("unsupported label set"));
    }
    let offsets = lines
        .keyed("offsets")?
        .split_whitespace()
        .map(|o| o.parse::<i32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| lines.err("bad offset"))?;
    let booleans = lines
        .keyed("booleans")?
        .split_whitespace()
        .map(|b| BoolFeature::from_name(b).ok_or(()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| lines.err("unknown boolean feature"))?;
    let template = FeatureTemplate { offsets, booleans };
    template.validate()?;

    let count: usize = lines
        .keyed("features")?
        .trim()
        .parse()
        .map_err(|_| lines.err("bad feature count"))?;
    let mut names = Vec::with_capacity(count);
    let mut state = Vec::with_capacity(count * L);
    for _ in 0..count {
        let line = lines.next()?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 1 + L {
            return Err(lines.err("expected feature and three weights"));
        }
        let name: String = serde_json::from_str(fields[0]).map_err(|_| lines.err("bad feature string"))?;
        names.push(name);
        for f in &fields[1..] {
            state.push(unhex(f, lines.line)?);
        }
    }
    let vocab = FeatureVocab::from_names(names)?;

    if lines.next()? != "transitions" {
        return Err(lines.err("expected `transitions`"));
    }
    let mut transition = [[0.0; L]; L];
    for row in transition.iter_mut() {
        let line = lines.next()?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != L {
            return Err(lines.err("expected three transition weights"));
        }
        for (slot, f) in row.iter_mut().zip(fields) {
            *slot = unhex(f, lines.line)?;
        }
    }
    if lines.next()? != "end" {
        return Err(lines.err("expected `end`"));
    }
    Ok(CrfModel {
        template,
        vocab: Arc::new(vocab),
        state,
        transition,
    })
}
