use std::path::Path;

use serde_json::Value;
use weilrep::rational::parse_q;
use weilrep::symplectic::{QuadForm, SymplecticMatrix};
use weilrep::{Error, Mat, Result};

/// Inline JSON, or the contents of a file when `arg` names one.
fn json_arg(arg: &str) -> Result<Value> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| Error::Parse(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))
}

/// "1,-2,3/5" is a diagonal form; anything else is read as JSON (inline or file).
pub fn parse_form(arg: &str) -> Result<QuadForm> {
    let t = arg.trim();
    if !t.starts_with('[') && !Path::new(t).is_file() {
        let d = t.split(',').map(|x| parse_q(x.trim())).collect::<Result<Vec<_>>>()?;
        return Ok(QuadForm::diagonal(&d));
    }
    QuadForm::from_json(&json_arg(t)?)
}

pub fn parse_matrix(arg: &str) -> Result<Mat> {
    Mat::from_json(&json_arg(arg.trim())?)
}

pub fn parse_symplectic(arg: &str) -> Result<SymplecticMatrix> {
    let m = parse_matrix(arg)?;
    if !m.is_square() || m.rows % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("symplectic matrix must be 2n x 2n, got {} x {}", m.rows, m.cols)));
    }
    SymplecticMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use weilrep::rational::{q, qf};

    #[test]
    fn diagonal_list() {
        let f = parse_form("1, -2, 3/5").unwrap();
        assert_eq!(f, QuadForm::diagonal(&[q(1), q(-2), qf(3, 5)]));
        assert!(parse_form("1,x").is_err());
    }

    #[test]
    fn json_forms_and_matrices() {
        let f = parse_form(r#"[["1","1/2"],["1/2","0"]]"#).unwrap();
        assert_eq!(f.dim(), 2);
        let s = parse_symplectic("[[0,1],[-1,0]]").unwrap();
        assert!(s.in_omega());
        assert!(parse_symplectic("[[1,1],[0,2]]").is_err());
        assert!(parse_symplectic("[[1,0,0]]").is_err());
    }
}
