//! JSON wire formats: derivations as `d_X(t)` coefficient lists and series
//! as arrays of coefficient strings indexed by exponent.

use serde::{Deserialize, Serialize};

use crate::derivation::{DerKind, HsDerivation};
use crate::error::{Error, Result};
use crate::integrate::{IntegrationResult, Route};
use crate::parse::parse_ratfn;
use crate::series::RatSeries;

/// `{"p": 2, "precision": 16, "gen_image": ["t", "1", ...]}`; giving `m`
/// instead of `precision` makes the derivation `m`-truncated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationSpec {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    pub gen_image: Vec<String>,
}

impl DerivationSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("derivation JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// `m_override` takes precedence over the file's own `m`.
    pub fn to_derivation(&self, m_override: Option<u32>) -> Result<HsDerivation> {
        let kind = match (m_override.or(self.m), self.precision) {
            (Some(m), _) => DerKind::Truncated { m },
            (None, Some(precision)) => DerKind::Formal { precision },
            (None, None) => DerKind::Formal {
                precision: self.gen_image.len().max(1),
            },
        };
        let images = self
            .gen_image
            .iter()
            .map(|s| parse_ratfn(s, self.p))
            .collect::<Result<Vec<_>>>()?;
        HsDerivation::new(self.p, kind, images)
    }

    pub fn from_derivation(d: &HsDerivation) -> Self {
        let (precision, m) = match d.kind() {
            DerKind::Formal { precision } => (Some(precision), None),
            DerKind::Truncated { m } => (None, Some(m)),
        };
        DerivationSpec {
            p: d.modulus(),
            precision,
            m,
            gen_image: d.images().iter().map(ToString::to_string).collect(),
        }
    }
}

/// Coefficient strings of a univariate series, trailing zeros kept.
pub fn series_to_strings(s: &RatSeries) -> Vec<String> {
    s.raw().iter().map(ToString::to_string).collect()
}

pub fn series_to_json(s: &RatSeries) -> String {
    serde_json::to_string(&series_to_strings(s)).expect("strings serialize")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub checked: usize,
    pub mismatches: Vec<usize>,
    pub passed: bool,
}

/// What `integrate` writes: the output derivation plus how it was found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrationRecord {
    pub law: String,
    pub derivation: DerivationSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical_element: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_polynomial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deflated_by: Option<u32>,
    pub audit: AuditRecord,
}

impl IntegrationRecord {
    pub fn new(res: &IntegrationResult) -> Self {
        let law = res.output.law().map(|f| f.to_string()).unwrap_or_default();
        let (mut minimal_polynomial, mut deflated_by) = (None, None);
        let mut cur = res;
        loop {
            match &cur.route {
                Route::Canonical { minimal_poly, .. } => {
                    minimal_polynomial = Some(minimal_poly.format());
                    break;
                }
                Route::Deflated { j, inner } => {
                    deflated_by.get_or_insert(*j);
                    cur = inner;
                }
                Route::Trivial => break,
            }
        }
        IntegrationRecord {
            law,
            derivation: DerivationSpec::from_derivation(&res.output),
            canonical_element: res.canonical_element().map(|c| c.x.to_string()),
            minimal_polynomial,
            deflated_by,
            audit: AuditRecord {
                checked: res.audit.checked,
                mismatches: res.audit.mismatches.clone(),
                passed: res.audit.passed(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::canonical_derivation;
    use crate::law::{make_law, LawKind, LawTag};

    #[test]
    fn derivation_round_trip() {
        let text = r#"{"p":2,"precision":8,"gen_image":["t","1","0","1/(t^2+1)"]}"#;
        let parsed = DerivationSpec::from_json(text).unwrap();
        let d = parsed.to_derivation(None).unwrap();
        assert_eq!(d.kind(), DerKind::Formal { precision: 8 });
        assert_eq!(d.on_t(3).to_string(), "1/(t^2+1)");
        let back = DerivationSpec::from_derivation(&d);
        assert_eq!(back.to_derivation(None).unwrap(), d);
        assert_eq!(
            parsed.to_derivation(Some(2)).unwrap().kind(),
            DerKind::Truncated { m: 2 }
        );
    }

    #[test]
    fn malformed_inputs() {
        assert!(DerivationSpec::from_json("{").is_err());
        let bad = r#"{"p":4,"precision":4,"gen_image":["t"]}"#;
        assert_eq!(
            DerivationSpec::from_json(bad).unwrap().to_derivation(None),
            Err(Error::NotPrime(4))
        );
        let bad_t = r#"{"p":3,"precision":4,"gen_image":["t+1"]}"#;
        assert!(DerivationSpec::from_json(bad_t).unwrap().to_derivation(None).is_err());
    }

    #[test]
    fn series_strings() {
        let gm = make_law(LawTag::Multiplicative, 2, LawKind::Formal).unwrap();
        let d = canonical_derivation(&gm, 4).unwrap();
        assert_eq!(series_to_json(d.gen_image()), r#"["t","t+1","0","0"]"#);
    }
}
