//! Line-oriented text format for two-mode pure states.
//!
//! ```text
//! fock2 cutoff=<N>
//! <m> <n> <re> <im>
//! ...
//! ```
//!
//! Only nonzero amplitudes are listed; everything else is zero. Blank lines
//! and lines starting with `#` are ignored. Floats are written in Rust's
//! shortest round-trip form, so reading back reproduces every bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fock::{PureState2, C64};

pub fn parse(text: &str) -> Result<PureState2> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing `fock2 cutoff=<N>` header".into(),
    })?;
    let cutoff = parse_header(header).map_err(|message| Error::Parse {
        line: hline,
        message,
    })?;

    let mut state = PureState2::zeros(cutoff);
    for (line, body) in lines {
        let err = |message: String| Error::Parse { line, message };
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!(
                "expected `m n re im`, found {} fields",
                fields.len()
            )));
        }
        let m: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad index `{}`", fields[0])))?;
        let n: usize = fields[1]
            .parse()
            .map_err(|_| err(format!("bad index `{}`", fields[1])))?;
        let re: f64 = fields[2]
            .parse()
            .map_err(|_| err(format!("bad float `{}`", fields[2])))?;
        let im: f64 = fields[3]
            .parse()
            .map_err(|_| err(format!("bad float `{}`", fields[3])))?;
        if m > cutoff || n > cutoff {
            return Err(err(format!("index ({m}, {n}) beyond cutoff {cutoff}")));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(err("amplitude is not finite".into()));
        }
        state.set(m, n, C64::new(re, im));
    }
    Ok(state)
}

fn parse_header(header: &str) -> std::result::Result<usize, String> {
    let mut parts = header.split_whitespace();
    if parts.next() != Some("fock2") {
        return Err("header must start with `fock2`".into());
    }
    let field = parts
        .next()
        .ok_or_else(|| "header is missing `cutoff=<N>`".to_string())?;
    if parts.next().is_some() {
        return Err("unexpected trailing header fields".into());
    }
    let value = field
        .strip_prefix("cutoff=")
        .ok_or_else(|| format!("expected `cutoff=<N>`, found `{field}`"))?;
    value
        .parse()
        .map_err(|_| format!("bad cutoff `{value}`"))
}

pub fn render(state: &PureState2) -> String {
    let mut out = format!("fock2 cutoff={}\n", state.cutoff());
    for (m, n, a) in state.nonzero() {
        writeln!(out, "{m} {n} {:?} {:?}", a.re, a.im).unwrap();
    }
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<PureState2> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse(&text)
}

pub fn write(path: impl AsRef<Path>, state: &PureState2) -> std::io::Result<()> {
    std::fs::write(path, render(state))
}
