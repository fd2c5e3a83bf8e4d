//! QAPLIB and TSPLIB (EUC_2D) text formats.

use std::fmt::Write as _;

use bops_core::objectives::{QapInstance, TspInstance};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("unexpected end of input while reading {0}")]
    Truncated(&'static str),
    #[error("invalid number {token:?} while reading {what}")]
    InvalidNumber { token: String, what: &'static str },
    #[error("{0} trailing value(s) after the instance")]
    TrailingData(usize),
    #[error("missing DIMENSION keyword")]
    MissingDimension,
    #[error("unsupported EDGE_WEIGHT_TYPE {0:?} (only EUC_2D is supported)")]
    UnsupportedEdgeWeightType(String),
    #[error("expected {expected} node coordinates, found {found}")]
    CoordinateCount { expected: usize, found: usize },
    #[error("malformed node line {0:?}")]
    MalformedNode(String),
    #[error("subset size {requested} outside 3..={available}")]
    BadSubset { requested: usize, available: usize },
    #[error(transparent)]
    Instance(#[from] bops_core::Error),
}

fn parse_number<T: std::str::FromStr>(token: &str, what: &'static str) -> Result<T, FormatError> {
    token.parse().map_err(|_| FormatError::InvalidNumber { token: token.to_string(), what })
}

/// `n`, then `n²` entries of `A` and `n²` of `B`, row-major, separated by any
/// whitespace.
pub fn parse_qaplib(text: &str) -> Result<QapInstance, FormatError> {
    let mut tokens = text.split_whitespace();
    let n: usize = parse_number(tokens.next().ok_or(FormatError::Truncated("n"))?, "n")?;
    if n < 2 {
        return Err(bops_core::Error::DimensionTooSmall(n).into());
    }
    let mut read_matrix = |what: &'static str| -> Result<Vec<f64>, FormatError> {
        (0..n * n).map(|_| parse_number(tokens.next().ok_or(FormatError::Truncated(what))?, what)).collect()
    };
    let a = read_matrix("matrix A")?;
    let b = read_matrix("matrix B")?;
    let rest = tokens.count();
    if rest > 0 {
        return Err(FormatError::TrailingData(rest));
    }
    Ok(QapInstance::new(n, a, b)?)
}

fn write_matrix(out: &mut String, n: usize, m: &[f64]) {
    for row in m.chunks(n) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

/// Inverse of [`parse_qaplib`]; values use the shortest round-tripping form.
pub fn write_qaplib(inst: &QapInstance) -> String {
    let n = inst.n();
    let mut out = format!("{n}\n\n");
    write_matrix(&mut out, n, inst.a());
    out.push('\n');
    write_matrix(&mut out, n, inst.b());
    out
}

fn keyword(line: &str) -> (String, String) {
    let (key, value) = match line.split_once(':') {
        Some((k, v)) => (k, v),
        None => line.split_once(char::is_whitespace).unwrap_or((line, "")),
    };
    (key.trim().to_ascii_uppercase(), value.trim().to_string())
}

/// Reads an EUC_2D TSPLIB file. Node ids are discarded and nodes kept in file
/// order; `subset = Some(k)` keeps the first `k`.
pub fn parse_tsplib(text: &str, subset: Option<usize>) -> Result<TspInstance, FormatError> {
    let mut dimension = None;
    let mut edge_type = None;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let mut in_coords = false;
    for line in lines.by_ref() {
        let (key, value) = keyword(line);
        match key.as_str() {
            "DIMENSION" => dimension = Some(parse_number::<usize>(&value, "DIMENSION")?),
            "EDGE_WEIGHT_TYPE" => edge_type = Some(value),
            "NODE_COORD_SECTION" => {
                in_coords = true;
                break;
            }
            "EOF" => break,
            _ => {}
        }
    }
    let n = dimension.ok_or(FormatError::MissingDimension)?;
    match edge_type.as_deref() {
        Some(t) if t.eq_ignore_ascii_case("EUC_2D") => {}
        other => return Err(FormatError::UnsupportedEdgeWeightType(other.unwrap_or("").to_string())),
    }
    let mut coords = Vec::with_capacity(n);
    if in_coords {
        for line in lines {
            if line.eq_ignore_ascii_case("EOF") {
                break;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                if coords.len() == n {
                    // another section follows
                    break;
                }
                return Err(FormatError::MalformedNode(line.to_string()));
            }
            let x = parse_number(fields[1], "node x")?;
            let y = parse_number(fields[2], "node y")?;
            coords.push((x, y));
        }
    }
    if coords.len() != n {
        return Err(FormatError::CoordinateCount { expected: n, found: coords.len() });
    }
    let inst = TspInstance::new(coords)?;
    match subset {
        None => Ok(inst),
        Some(k) if (3..=n).contains(&k) => Ok(inst.truncated(k)?),
        Some(k) => Err(FormatError::BadSubset { requested: k, available: n }),
    }
}

/// Inverse of [`parse_tsplib`] (1-based node ids).
pub fn write_tsplib(inst: &TspInstance, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME : {name}");
    let _ = writeln!(out, "TYPE : TSP");
    let _ = writeln!(out, "DIMENSION : {}", inst.n());
    let _ = writeln!(out, "EDGE_WEIGHT_TYPE : EUC_2D");
    let _ = writeln!(out, "NODE_COORD_SECTION");
    for (i, (x, y)) in inst.coords().iter().enumerate() {
        let _ = writeln!(out, "{} {x} {y}", i + 1);
    }
    out.push_str("EOF\n");
    out
}
