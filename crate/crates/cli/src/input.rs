//! Text input: rationals and symmetric matrices.

use std::str::FromStr;

use isoedge_core::{ExactMatrix, ExactScalar};

/// Parses `p/q` or `p`.
pub fn parse_rational(s: &str) -> Result<ExactScalar, String> {
    ExactScalar::from_str(s).map_err(|e| e.to_string())
}

/// First non-empty line `n`, then `n` lines of `n` whitespace-separated
/// rationals. The matrix must be symmetric.
pub fn parse_matrix(text: &str) -> Result<ExactMatrix, String> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or("empty input")?;
    let n: usize = header
        .parse()
        .map_err(|_| format!("first line must be the dimension, found `{header}`"))?;
    if n == 0 {
        return Err("dimension must be positive".into());
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| format!("expected {n} rows, found {i}"))?;
        let row = line
            .split_whitespace()
            .map(parse_rational)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("row {}: {e}", i + 1))?;
        if row.len() != n {
            return Err(format!("row {} has {} entries, expected {n}", i + 1, row.len()));
        }
        rows.push(row);
    }
    if let Some(extra) = lines.next() {
        return Err(format!("unexpected trailing line `{extra}`"));
    }
    let m = ExactMatrix::from_rows(rows).map_err(|e| e.to_string())?;
    m.check_symmetric().map_err(|e| e.to_string())?;
    Ok(m)
}

/// Inverse of [`parse_matrix`].
pub fn format_matrix(m: &ExactMatrix) -> String {
    let mut out = format!("{}\n", m.rows());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(ToString::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_matrices() {
        assert_eq!(parse_rational("-3/6").unwrap(), ExactScalar::ratio(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), ExactScalar::from_int(7));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1/0").is_err());
        let m = parse_matrix("2\n2 -1\n-1 2\n").unwrap();
        assert_eq!(m, ExactMatrix::from_i64(&[[2, -1], [-1, 2]]));
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn rejects_malformed_matrices() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2\n1 0\n").is_err());
        assert!(parse_matrix("2\n1 0 0\n0 1\n").is_err());
        assert!(parse_matrix("2\n1 1/2\n1/3 1\n").unwrap_err().contains("symmetric"));
        assert!(parse_matrix("2\n1 0\n0 1\n0 0\n").is_err());
        assert!(parse_matrix("x\n").is_err());
    }
}
