//! Text serialization of [`Dbn`] snapshots.
//!
//! The grammar is documented in `docs/model-format.md`. Every parameter is
//! written with 17 significant digits, which reproduces each `f64` exactly
//! on load.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::dbn::Dbn;
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rbm::Rbm;

pub const FORMAT_NAME: &str = "boltzkit-dbn";
pub const FORMAT_VERSION: u32 = 1;

/// Free-form `key: value` pairs stored after the layers, sorted by key.
pub type Metadata = BTreeMap<String, String>;

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v:.16e}").unwrap();
    }
    out.push('\n');
}

/// Renders a model document.
pub fn to_text(dbn: &Dbn, metadata: &Metadata) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{FORMAT_NAME} {FORMAT_VERSION}").unwrap();
    let nodes: Vec<String> = dbn.nodes().iter().map(|n| n.to_string()).collect();
    writeln!(out, "nodes: {}", nodes.join(" ")).unwrap();
    for (k, layer) in dbn.layers().iter().enumerate() {
        writeln!(out, "layer {} ({} x {})", k + 1, layer.n_visible(), layer.n_hidden()).unwrap();
        out.push_str("weights:\n");
        for row in layer.weights().row_iter() {
            push_row(&mut out, row);
        }
        out.push_str("visible_bias:\n");
        push_row(&mut out, layer.visible_bias());
        out.push_str("hidden_bias:\n");
        push_row(&mut out, layer.hidden_bias());
    }
    out.push_str("metadata:\n");
    for (key, value) in metadata {
        if key.is_empty() || key.contains(':') || key.contains('\n') || value.contains('\n') {
            return Err(Error::domain(format!("metadata entry '{key}' cannot be stored")));
        }
        writeln!(out, "{key}: {value}").unwrap();
    }
    Ok(out)
}

/// Writes the model through a temporary file in the target directory and
/// renames it into place.
pub fn save_model(dbn: &Dbn, path: impl AsRef<Path>, metadata: &Metadata) -> Result<()> {
    let path = path.as_ref();
    let text = to_text(dbn, metadata)?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(Dbn, Metadata)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text)
}

struct Lines<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Lines<'a> {
    /// Next line with its starting byte offset; `None` at end of input.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        if self.pos >= self.text.len() {
            return None;
        }
        let start = self.pos;
        let rest = &self.text[start..];
        let (line, advance) = match rest.find('\n') {
            Some(i) => (&rest[..i], i + 1),
            None => (rest, rest.len()),
        };
        self.pos += advance;
        self.line += 1;
        Some((start, line.trim_end_matches('\r')))
    }

    fn err(&self, offset: usize, msg: impl std::fmt::Display) -> Error {
        Error::format(offset, format!("line {}: {msg}", self.line))
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let end = self.text.len();
        self.next().ok_or_else(|| Error::format(end, format!("unexpected end of file, expected {what}")))
    }

    fn expect_exact(&mut self, literal: &str) -> Result<()> {
        let (off, line) = self.expect(literal)?;
        if line != literal {
            return Err(self.err(off, format!("expected '{literal}', found '{line}'")));
        }
        Ok(())
    }

    fn numbers(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let (off, line) = self.expect(what)?;
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.err(off, format!("'{tok}' is not a finite number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != count {
            return Err(self.err(off, format!("{what} has {} values, expected {count}", values.len())));
        }
        Ok(values)
    }
}

/// Parses a model document. Any disagreement between declared and actual
/// sizes is an error.
pub fn from_text(text: &str) -> Result<(Dbn, Metadata)> {
    let mut lines = Lines { text, pos: 0, line: 0 };

    let (off, header) = lines.expect("header")?;
    let version = header
        .strip_prefix(FORMAT_NAME)
        .and_then(|rest| rest.strip_prefix(' '))
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| lines.err(off, format!("expected '{FORMAT_NAME} <version>'")))?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }

    let (off, line) = lines.expect("nodes")?;
    let nodes = line
        .strip_prefix("nodes:")
        .ok_or_else(|| lines.err(off, "expected 'nodes:'"))?
        .split_whitespace()
        .map(|t| t.parse::<usize>().ok().filter(|&n| n > 0))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| lines.err(off, "node sizes must be positive integers"))?;
    if nodes.len() < 2 {
        return Err(lines.err(off, "a model needs at least 2 node sizes"));
    }

    let mut layers = Vec::with_capacity(nodes.len() - 1);
    for k in 0..nodes.len() - 1 {
        let (m, n) = (nodes[k], nodes[k + 1]);
        let want = format!("layer {} ({m} x {n})", k + 1);
        lines.expect_exact(&want)?;
        lines.expect_exact("weights:")?;
        let mut w = Vec::with_capacity(m * n);
        for _ in 0..m {
            w.extend(lines.numbers(n, "weight row")?);
        }
        lines.expect_exact("visible_bias:")?;
        let a = lines.numbers(m, "visible bias")?;
        lines.expect_exact("hidden_bias:")?;
        let b = lines.numbers(n, "hidden bias")?;
        layers.push(Rbm::new(Matrix::from_vec(m, n, w)?, a, b)?);
    }

    lines.expect_exact("metadata:")?;
    let mut metadata = Metadata::new();
    while let Some((off, line)) = lines.next() {
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(": ")
            .or_else(|| line.strip_suffix(':').map(|k| (k, "")))
            .ok_or_else(|| lines.err(off, "expected 'key: value'"))?;
        if metadata.insert(key.to_string(), value.to_string()).is_some() {
            return Err(lines.err(off, format!("duplicate metadata key '{key}'")));
        }
    }

    Ok((Dbn::new(layers)?, metadata))
}
