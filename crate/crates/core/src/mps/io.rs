//! Plain-text MPS dump format, used for test fixtures.
//!
//! ```text
//! tneda-mps 1
//! mode Amplitude
//! chi_max 4
//! bonds 1 2 4 2 1
//! <entries of site 0, row-major (l, s, r)>
//! <entries of site 1>
//! ...
//! ```

use std::fmt::Write as _;

use super::{Mode, Mps, SiteTensor};
use crate::error::{Error, Result};

const MAGIC: &str = "tneda-mps 1";

pub fn dump(m: &Mps) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "mode {}", m.mode().name()).unwrap();
    writeln!(out, "chi_max {}", m.chi_max()).unwrap();
    let bonds: Vec<String> = m.bond_dims().iter().map(|b| b.to_string()).collect();
    writeln!(out, "bonds {}", bonds.join(" ")).unwrap();
    for t in m.tensors() {
        let row: Vec<String> = t.data().iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

fn header<'a>(line: Option<(usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (no, text) = line.ok_or_else(|| Error::parse(0, format!("missing `{key}` line")))?;
    text.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .map(|rest| (no, rest.trim()))
        .ok_or_else(|| Error::parse(no, format!("expected `{key} ...`")))
}

pub fn load(text: &str) -> Result<Mps> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        Some((no, _)) => return Err(Error::parse(no, "missing tneda-mps header")),
        None => return Err(Error::parse(0, "empty input")),
    }
    let (no, mode) = header(lines.next(), "mode")?;
    let mode: Mode = mode.parse().map_err(|_| Error::parse(no, format!("unknown mode {mode:?}")))?;
    let (no, chi) = header(lines.next(), "chi_max")?;
    let chi_max: usize = chi.parse().map_err(|_| Error::parse(no, "chi_max is not an integer"))?;
    let (no, bonds) = header(lines.next(), "bonds")?;
    let bonds = bonds
        .split_whitespace()
        .map(|b| b.parse::<usize>().map_err(|_| Error::parse(no, format!("bad bond {b:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if bonds.len() < 2 {
        return Err(Error::parse(no, "need at least two bond entries"));
    }
    let mut tensors = Vec::with_capacity(bonds.len() - 1);
    for w in bonds.windows(2) {
        let (no, row) = lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("missing tensor line for site {}", tensors.len())))?;
        let data = row
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| Error::parse(no, format!("bad entry {v:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if data.len() != w[0] * 2 * w[1] {
            return Err(Error::parse(
                no,
                format!("expected {} entries, found {}", w[0] * 2 * w[1], data.len()),
            ));
        }
        tensors.push(SiteTensor::from_vec(w[0], w[1], data));
    }
    if let Some((no, _)) = lines.next() {
        return Err(Error::parse(no, "trailing data after last tensor"));
    }
    Mps::from_tensors(tensors, mode, chi_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn dump_load_identity() {
        for mode in [Mode::Amplitude, Mode::DirectPositive] {
            let m = Mps::random(6, 3, mode, &mut seeded(21)).unwrap();
            assert_eq!(load(&dump(&m)).unwrap(), m);
        }
    }

    #[test]
    fn load_reports_line_numbers() {
        let m = Mps::random(3, 2, Mode::Amplitude, &mut seeded(1)).unwrap();
        let text = dump(&m).replacen("bonds 1 2 2 1", "bonds 1 2 3 1", 1);
        match load(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(load("nonsense").is_err());
    }
}
