//! CSV persistence for coefficient fields and time-grid solutions.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly. Rows follow lexicographic lattice order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::{MultiIndex, Truncation};
use crate::picard::TimeGridField;
use crate::spectral::CoeffField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty input: expected a header line")]
    Empty,
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_row(out: &mut String, prefix: Option<f64>, n: &MultiIndex, v: Complex64) {
    if let Some(t) = prefix {
        out.push_str(&fmt_f(t));
        out.push(',');
    }
    for c in n.coords() {
        let _ = write!(out, "{c},");
    }
    let _ = writeln!(out, "{},{}", fmt_f(v.re), fmt_f(v.im));
}

fn header(nu: usize, with_time: bool) -> String {
    let mut cols: Vec<String> = Vec::new();
    if with_time {
        cols.push("t".into());
    }
    cols.extend((1..=nu).map(|j| format!("n_{j}")));
    cols.push("re".into());
    cols.push("im".into());
    cols.join(",")
}

/// `n_1..n_nu,re,im`.
pub fn field_to_csv(field: &CoeffField) -> String {
    let mut out = header(field.nu(), false);
    out.push('\n');
    for (n, v) in field.iter() {
        push_row(&mut out, None, n, *v);
    }
    out
}

/// `t,n_1..n_nu,re,im`, frame by frame.
pub fn solution_to_csv(sol: &TimeGridField) -> String {
    let mut out = header(sol.trunc().nu, true);
    out.push('\n');
    for (t, f) in sol.times.iter().zip(&sol.frames) {
        for (n, v) in f.iter() {
            push_row(&mut out, Some(*t), n, *v);
        }
    }
    out
}

struct Row {
    t: Option<f64>,
    n: MultiIndex,
    v: Complex64,
}

fn parse_rows(text: &str, with_time: bool) -> Result<(usize, Vec<(usize, Row)>), IoError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(IoError::Empty)?;
    let cols: Vec<&str> = head.split(',').map(str::trim).collect();
    let extra = if with_time { 3 } else { 2 };
    if cols.len() <= extra
        || cols[cols.len() - 2] != "re"
        || cols[cols.len() - 1] != "im"
        || (with_time && cols[0] != "t")
    {
        let want = if with_time { "t,n_1,...,n_nu,re,im" } else { "n_1,...,n_nu,re,im" };
        return Err(parse_err(1, format!("bad header {head:?}; expected {want}")));
    }
    let nu = cols.len() - extra;
    let mut rows = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != cols.len() {
            return Err(parse_err(ln, format!("expected {} fields, found {}", cols.len(), f.len())));
        }
        let num = |s: &str| -> Result<f64, IoError> {
            let v: f64 = s.parse().map_err(|_| parse_err(ln, format!("not a number: {s:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(ln, format!("non-finite value {s:?}")));
            }
            Ok(v)
        };
        let off = usize::from(with_time);
        let t = if with_time { Some(num(f[0])?) } else { None };
        let coords = f[off..off + nu]
            .iter()
            .map(|s| s.parse::<i64>().map_err(|_| parse_err(ln, format!("not an integer index: {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let v = Complex64::new(num(f[off + nu])?, num(f[off + nu + 1])?);
        rows.push((ln, Row { t, n: MultiIndex::new(coords), v }));
    }
    Ok((nu, rows))
}

fn radius_of<'a>(ns: impl Iterator<Item = &'a MultiIndex>) -> u32 {
    ns.map(MultiIndex::l1).max().unwrap_or(0) as u32
}

/// Inverse of [`field_to_csv`]; the truncation radius is the largest `|n|`.
pub fn field_from_csv(text: &str) -> Result<CoeffField, IoError> {
    let (nu, rows) = parse_rows(text, false)?;
    let trunc = Truncation { nu, radius: radius_of(rows.iter().map(|(_, r)| &r.n)) };
    let mut map = BTreeMap::new();
    for (ln, r) in rows {
        if map.insert(r.n.clone(), r.v).is_some() {
            return Err(parse_err(ln, format!("duplicate index {}", r.n)));
        }
    }
    Ok(CoeffField::from_map_unchecked(trunc, map))
}

/// Inverse of [`solution_to_csv`]; rows with equal `t` form one frame and
/// times must increase.
pub fn solution_from_csv(text: &str) -> Result<TimeGridField, IoError> {
    let (nu, rows) = parse_rows(text, true)?;
    if rows.is_empty() {
        return Err(parse_err(2, "no data rows"));
    }
    let trunc = Truncation { nu, radius: radius_of(rows.iter().map(|(_, r)| &r.n)) };
    let mut times: Vec<f64> = Vec::new();
    let mut maps: Vec<BTreeMap<MultiIndex, Complex64>> = Vec::new();
    for (ln, r) in rows {
        let t = r.t.unwrap_or_default();
        match times.last() {
            Some(&last) if last == t => {}
            Some(&last) if t < last => {
                return Err(parse_err(ln, format!("time {t} decreases (previous {last})")));
            }
            _ => {
                times.push(t);
                maps.push(BTreeMap::new());
            }
        }
        let map = maps.last_mut().expect("pushed above");
        if map.insert(r.n.clone(), r.v).is_some() {
            return Err(parse_err(ln, format!("duplicate index {} at t = {t}", r.n)));
        }
    }
    let frames = maps.into_iter().map(|m| CoeffField::from_map_unchecked(trunc, m)).collect();
    Ok(TimeGridField { times, frames })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_initial, DecayProfile};

    #[test]
    fn field_round_trip_is_exact() {
        let prof = DecayProfile::Exponential { amp: 1.0, rate: 0.7 };
        let f = make_initial(&prof, 2, Truncation::new(2, 3).unwrap(), 5).unwrap();
        let text = field_to_csv(&f);
        assert!(text.starts_with("n_1,n_2,re,im\n"));
        let g = field_from_csv(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(field_to_csv(&g), text);
    }

    #[test]
    fn solution_round_trip_is_exact() {
        let trunc = Truncation::new(1, 1).unwrap();
        let f = make_initial(&DecayProfile::Exponential { amp: 1.0, rate: 1.0 }, 2, trunc, 1).unwrap();
        let sol = TimeGridField { times: vec![0.0, 0.1 / 3.0], frames: vec![f.clone(), f] };
        let text = solution_to_csv(&sol);
        let back = solution_from_csv(&text).unwrap();
        assert_eq!(back, sol);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = field_from_csv("n_1,re,im\n0,1.0,0.0\n1,abc,0.0\n").unwrap_err();
        assert_eq!(e, IoError::Parse { line: 3, msg: "not a number: \"abc\"".into() });
        let e = field_from_csv("n_1,re\n").unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 1, .. }));
        let e = solution_from_csv("t,n_1,re,im\n0.1,0,1,0\n0.0,0,1,0\n").unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 3, .. }));
        let e = field_from_csv("n_1,re,im\n0,1,0\n0,2,0\n").unwrap_err();
        assert!(e.to_string().contains("line 3") && e.to_string().contains("duplicate"));
        assert_eq!(field_from_csv(""), Err(IoError::Empty));
    }
}
