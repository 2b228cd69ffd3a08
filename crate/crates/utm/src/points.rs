//! Point files: one `x t` pair per line, separated by whitespace or a comma.
//! Blank lines and lines starting with `#` are skipped.

use crate::error::{Result, UtmError};

pub fn parse_points(src: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (no, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if fields.len() != 2 {
            return Err(UtmError::Parse(format!("line {}: expected two numbers, found {}", no + 1, fields.len())));
        }
        let num = |f: &str| -> Result<f64> {
            let v: f64 = f.parse().map_err(|_| UtmError::Parse(format!("line {}: '{f}' is not a number", no + 1)))?;
            if !v.is_finite() {
                return Err(UtmError::Parse(format!("line {}: '{f}' is not finite", no + 1)));
            }
            Ok(v)
        };
        out.push((num(fields[0])?, num(fields[1])?));
    }
    if out.is_empty() {
        return Err(UtmError::Parse("no points".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_separators() {
        let p = parse_points("# x t\n0.5 1\n\n2,0.25\n 3 ,\t4 \n").unwrap();
        assert_eq!(p, vec![(0.5, 1.0), (2.0, 0.25), (3.0, 4.0)]);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_points("1 2 3").is_err());
        assert!(parse_points("1 x").is_err());
        assert!(parse_points("1 inf").is_err());
        assert!(parse_points("# only comments").is_err());
    }
}
