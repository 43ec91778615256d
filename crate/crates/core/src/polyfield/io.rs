//! JSON problem files.
//!
//! ```json
//! { "dim": 2,
//!   "components": [
//!     [ {"exp": [-2, 2], "coef": 3.0}, {"exp": [3, -3], "coef": 2.0} ],
//!     [ {"exp": [-3, 3], "coef": 2.0}, {"exp": ["2", "-2/1"], "coef": 3.0} ] ] }
//! ```
//!
//! Exponents are integers or `"p/q"` strings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::multi_index::{format_exponent, parse_exponent, Exponent, MultiIndex};
use super::{PolyError, SparsePolynomial, VectorField};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    dim: usize,
    components: Vec<Vec<TermRecord>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    exp: Vec<ExponentRecord>,
    coef: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRecord {
    Int(i64),
    Text(String),
}

impl ExponentRecord {
    fn to_exponent(&self) -> Result<Exponent, PolyError> {
        match self {
            ExponentRecord::Int(v) => Ok(Exponent::from_integer(*v)),
            ExponentRecord::Text(s) => parse_exponent(s),
        }
    }

    fn from_exponent(e: &Exponent) -> Self {
        if e.is_integer() {
            ExponentRecord::Int(*e.numer())
        } else {
            ExponentRecord::Text(format_exponent(e))
        }
    }
}

pub fn parse_field(json: &str) -> Result<VectorField, PolyError> {
    let file: ProblemFile = serde_json::from_str(json)?;
    if file.dim == 0 {
        return Err(PolyError::EmptyDimension);
    }
    if file.components.len() != file.dim {
        return Err(PolyError::DimensionMismatch {
            expected: file.dim,
            found: file.components.len(),
        });
    }
    let mut components = Vec::with_capacity(file.dim);
    for comp in &file.components {
        let mut terms = Vec::with_capacity(comp.len());
        for t in comp {
            if t.exp.len() != file.dim {
                return Err(PolyError::DimensionMismatch {
                    expected: file.dim,
                    found: t.exp.len(),
                });
            }
            let exps = t
                .exp
                .iter()
                .map(ExponentRecord::to_exponent)
                .collect::<Result<Vec<_>, _>>()?;
            terms.push((MultiIndex::new(exps), t.coef));
        }
        components.push(SparsePolynomial::from_terms(file.dim, terms)?);
    }
    VectorField::new(components)
}

pub fn field_to_json(field: &VectorField) -> String {
    let file = ProblemFile {
        dim: field.dim(),
        components: field
            .components()
            .iter()
            .map(|c| {
                c.terms()
                    .map(|(idx, coef)| TermRecord {
                        exp: idx
                            .exps()
                            .iter()
                            .map(ExponentRecord::from_exponent)
                            .collect(),
                        coef,
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("problem file serialization cannot fail")
}

pub fn load_field(path: &Path) -> Result<VectorField, PolyError> {
    let text = std::fs::read_to_string(path)?;
    parse_field(&text)
}

pub fn save_field(field: &VectorField, path: &Path) -> Result<(), PolyError> {
    std::fs::write(path, field_to_json(field))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAURENT: &str = r#"{
        "dim": 2,
        "components": [
            [ {"exp": [-2, 2], "coef": 3.0}, {"exp": [3, -3], "coef": 2.0} ],
            [ {"exp": [-3, 3], "coef": 2.0}, {"exp": ["2", "-4/2"], "coef": 3.0} ]
        ]
    }"#;

    #[test]
    fn parses_mixed_exponent_notation() {
        let f = parse_field(LAURENT).unwrap();
        assert_eq!(f.dim(), 2);
        assert_eq!(
            f.component(1).coefficient(&MultiIndex::from_ints(&[2, -2])),
            3.0
        );
        assert!(f.divergence().is_zero());
    }

    #[test]
    fn rejects_component_count_mismatch() {
        let json = r#"{"dim": 3, "components": [[], []]}"#;
        assert!(matches!(
            parse_field(json),
            Err(PolyError::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn rejects_exponent_length_mismatch() {
        let json = r#"{"dim": 2, "components": [[{"exp": [1], "coef": 1.0}], []]}"#;
        assert!(matches!(
            parse_field(json),
            Err(PolyError::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn rejects_zero_denominator() {
        let json = r#"{"dim": 1, "components": [[{"exp": ["1/0"], "coef": 1.0}]]}"#;
        assert!(matches!(parse_field(json), Err(PolyError::ZeroDenominator)));
    }

    #[test]
    fn rejects_zero_dimension_and_garbage() {
        assert!(parse_field(r#"{"dim": 0, "components": []}"#).is_err());
        assert!(matches!(parse_field("{"), Err(PolyError::Json(_))));
    }

    #[test]
    fn fractional_exponents_serialize_as_strings() {
        let mut p = SparsePolynomial::zero(1);
        p.add_term(MultiIndex::from_pairs(&[(-3, 2)]).unwrap(), 0.1);
        let f = VectorField::new(vec![p]).unwrap();
        let json = field_to_json(&f);
        assert!(json.contains("\"-3/2\""));
        assert_eq!(parse_field(&json).unwrap(), f);
    }
}
