//! JSON file formats for states and distributions, and number formatting.
//!
//! States: `{"dim": d, "matrix": [[[re, im], ...], ...]}`, row-major.
//! Distributions: `{"probs": [p1, ..., pk]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::states::{validate_state, ClassicalDistribution, DensityMatrix};

#[derive(Debug, Deserialize, Serialize)]
struct StateFile {
    dim: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize, Serialize)]
struct DistributionFile {
    probs: Vec<f64>,
}

/// Either payload a state-like file may carry.
#[derive(Clone, Debug)]
pub enum StateInput {
    Quantum(DensityMatrix),
    Classical(ClassicalDistribution),
}

impl StateInput {
    /// Density matrix view; distributions become diagonal states.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            StateInput::Quantum(s) => Ok(s.clone()),
            StateInput::Classical(p) => DensityMatrix::from_probs(p.probs()),
        }
    }
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::InvalidInput(format!("malformed JSON: {e}"))
}

/// Parses a state file. Rank-deficient states are rejected when `full_rank` is set.
pub fn parse_state(text: &str, full_rank: bool) -> Result<DensityMatrix> {
    let f: StateFile = serde_json::from_str(text).map_err(parse_err)?;
    if f.matrix.len() != f.dim || f.matrix.iter().any(|r| r.len() != f.dim) {
        return Err(Error::InvalidInput(format!("matrix is not {0}x{0}", f.dim)));
    }
    let rows = f.matrix.iter().map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect()).collect();
    validate_state(&CMat::from_rows(rows)?, full_rank)
}

/// Parses a distribution file; zero entries are allowed only if `allow_zeros`.
pub fn parse_distribution(text: &str, allow_zeros: bool) -> Result<ClassicalDistribution> {
    let f: DistributionFile = serde_json::from_str(text).map_err(parse_err)?;
    if allow_zeros {
        ClassicalDistribution::with_zeros(f.probs)
    } else {
        ClassicalDistribution::new(f.probs)
    }
}

/// Accepts either file format, detected by its keys.
pub fn parse_state_or_distribution(text: &str, full_rank: bool) -> Result<StateInput> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    if v.get("probs").is_some() {
        Ok(StateInput::Classical(parse_distribution(text, !full_rank)?))
    } else if v.get("matrix").is_some() {
        Ok(StateInput::Quantum(parse_state(text, full_rank)?))
    } else {
        Err(Error::InvalidInput("expected a \"matrix\" or \"probs\" key".into()))
    }
}

/// Serializes a state in the file format.
pub fn state_to_json(state: &DensityMatrix) -> String {
    let m = state.matrix();
    let f = StateFile {
        dim: m.dim(),
        matrix: m.rows().iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect(),
    };
    serde_json::to_string(&f).expect("state serializes")
}

pub fn distribution_to_json(p: &ClassicalDistribution) -> String {
    serde_json::to_string(&DistributionFile { probs: p.probs().to_vec() }).expect("distribution serializes")
}

/// Seventeen significant digits in scientific notation; round-trips every `f64`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// Fifteen significant digits, for values printed on standard output.
pub fn fmt15(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        fmt17(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_round_trip() {
        let text = r#"{"dim": 2, "matrix": [[[0.6, 0.0], [0.0, 0.1]], [[0.0, -0.1], [0.4, 0.0]]]}"#;
        let s = parse_state(text, true).unwrap();
        let back = parse_state(&state_to_json(&s), true).unwrap();
        assert_eq!(s.matrix(), back.matrix());
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_state(r#"{"dim": 2, "matrix": [[[1,0]]]}"#, true).is_err());
        let pure = r#"{"dim": 2, "matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]}"#;
        assert!(matches!(parse_state(pure, true), Err(Error::RankDeficient { .. })));
        assert!(parse_distribution(r#"{"probs": [0.5, 0.6]}"#, false).is_err());
        assert!(matches!(
            parse_state_or_distribution(r#"{"probs": [0.9, 0.1]}"#, true).unwrap(),
            StateInput::Classical(_)
        ));
    }

    #[test]
    fn formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1.652_933_127_459_81, -2.5e-300, 6.02e23] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt15(0.5), "5.00000000000000e-1");
    }
}
