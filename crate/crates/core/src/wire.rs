//! JSON file formats. Every rational is a `"p/q"` (or `"p"`) string and every
//! operator uses the `c * T[z]` text form, so files round-trip bit-exactly.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::derive::{ClosedFds, Fds};
use crate::error::{Error, Result};
use crate::opmatrix::OpMatrix;
use crate::rational::{parse_rational, QMatrix, Rational};
use crate::scheme::LbsSpec;
use crate::shiftring::ShiftPoly;

/// Lowercase hex SHA-256 of a text.
pub fn fingerprint_text(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

fn parse_rows(rows: &[Vec<String>], what: &str) -> Result<QMatrix> {
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(|v| parse_rational(v)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Parse(format!("{what}: {e}")))?;
    QMatrix::from_rows(parsed).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn emit_rows(m: &QMatrix) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect())
        .collect()
}

/// Scheme definition file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub q: usize,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: Vec<Vec<String>>,
    pub velocities: Vec<Vec<i64>>,
    #[serde(rename = "S")]
    pub s: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibria: Option<Vec<Vec<String>>>,
}

impl SchemeFile {
    /// Parses JSON; syntax errors carry the serde line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("scheme file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme file serializes")
    }

    pub fn to_spec(&self) -> Result<LbsSpec> {
        let m = parse_rows(&self.m, "M")?;
        if m.rows() != self.q || m.cols() != self.q {
            return Err(Error::InvalidSpec(format!(
                "M is {}x{} but q = {}",
                m.rows(),
                m.cols(),
                self.q
            )));
        }
        if let Some(v) = self.velocities.iter().find(|v| v.len() != self.d) {
            return Err(Error::InvalidSpec(format!(
                "velocity {v:?} does not have d = {} components",
                self.d
            )));
        }
        let s = self
            .s
            .iter()
            .map(|v| parse_rational(v))
            .collect::<Result<Vec<Rational>>>()
            .map_err(|e| Error::Parse(format!("S: {e}")))?;
        let equilibria = self
            .equilibria
            .as_ref()
            .map(|rows| parse_rows(rows, "equilibria"))
            .transpose()?;
        LbsSpec::new(m, self.velocities.clone(), s, self.n, equilibria)
    }

    pub fn from_spec(spec: &LbsSpec, label: Option<String>) -> Self {
        SchemeFile {
            label,
            q: spec.q(),
            d: spec.d(),
            n: spec.n_conserved(),
            m: emit_rows(spec.moments()),
            velocities: spec.velocities().to_vec(),
            s: spec.relaxation().iter().map(ToString::to_string).collect(),
            equilibria: spec.equilibria().map(emit_rows),
        }
    }
}

/// Transport matrix given directly as operator text, for comparing
/// schemes that are specified by `T` rather than by `M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub d: usize,
    #[serde(rename = "T")]
    pub t: Vec<Vec<String>>,
}

impl TransportFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("transport file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transport file serializes")
    }

    pub fn to_matrix(&self) -> Result<OpMatrix> {
        let rows = self
            .t
            .iter()
            .map(|r| parse_ops(r, self.d))
            .collect::<Result<Vec<_>>>()?;
        OpMatrix::from_rows(rows)
    }

    pub fn from_matrix(t: &OpMatrix, label: Option<String>) -> Self {
        TransportFile {
            label,
            d: t.dim(),
            t: t.rows().map(ops_text).collect(),
        }
    }
}

/// Either kind of input file; a top-level `"T"` key selects a transport
/// file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputFile {
    Scheme(SchemeFile),
    Transport(TransportFile),
}

impl InputFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("input file: {e}")))?;
        if value.get("T").is_some() {
            TransportFile::from_json(text).map(InputFile::Transport)
        } else {
            SchemeFile::from_json(text).map(InputFile::Scheme)
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            InputFile::Scheme(s) => s.label.as_deref(),
            InputFile::Transport(t) => t.label.as_deref(),
        }
    }

    /// The transport matrix, built from `M` and the velocities for a
    /// scheme file.
    pub fn transport(&self) -> Result<OpMatrix> {
        match self {
            InputFile::Scheme(s) => Ok(s.to_spec()?.transport()),
            InputFile::Transport(t) => t.to_matrix(),
        }
    }
}

fn ops_text(ops: &[ShiftPoly]) -> Vec<String> {
    ops.iter().map(ToString::to_string).collect()
}

fn parse_ops(texts: &[String], dim: usize) -> Result<Vec<ShiftPoly>> {
    texts.iter().map(|t| ShiftPoly::parse(t, dim)).collect()
}

/// Serialized [`Fds`]; `moment` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdsWire {
    pub q: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub moment: usize,
    pub d: usize,
    pub gamma: Vec<String>,
    pub homogeneous: Vec<String>,
    pub cross: Vec<Vec<String>>,
    pub source: Vec<Vec<String>>,
}

impl FdsWire {
    pub fn from_fds(f: &Fds) -> Self {
        FdsWire {
            q: f.q(),
            n: f.n_conserved(),
            moment: f.moment() + 1,
            d: f.dim(),
            gamma: ops_text(f.gamma()),
            homogeneous: ops_text(f.homogeneous()),
            cross: f.cross().iter().map(|r| ops_text(r)).collect(),
            source: f.source().iter().map(|r| ops_text(r)).collect(),
        }
    }

    pub fn to_fds(&self) -> Result<Fds> {
        if self.moment == 0 {
            return Err(Error::Parse("moment index is 1-based".into()));
        }
        let gamma = parse_ops(&self.gamma, self.d)?;
        let cross = self
            .cross
            .iter()
            .map(|r| parse_ops(r, self.d))
            .collect::<Result<Vec<_>>>()?;
        let source = self
            .source
            .iter()
            .map(|r| parse_ops(r, self.d))
            .collect::<Result<Vec<_>>>()?;
        let f = Fds::from_parts(self.q, self.n, self.moment - 1, self.d, gamma, cross, source)?;
        if parse_ops(&self.homogeneous, self.d)? != f.homogeneous() {
            return Err(Error::Parse("homogeneous coefficients disagree with gamma".into()));
        }
        Ok(f)
    }

    /// Compact JSON used for fingerprinting.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("fds serializes")
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_text(&self.canonical_json())
    }
}

/// Serialized [`ClosedFds`]; `moment` is 1-based and `coeffs[lag][j]`
/// multiplies conserved moment `j + 1` at level `n - lag`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedFdsWire {
    pub moment: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub coeffs: Vec<Vec<String>>,
}

impl ClosedFdsWire {
    pub fn from_closed(c: &ClosedFds) -> Self {
        ClosedFdsWire {
            moment: c.moment() + 1,
            n: c.n_conserved(),
            d: c.dim(),
            coeffs: c.coeffs().iter().map(|r| ops_text(r)).collect(),
        }
    }

    pub fn to_closed(&self) -> Result<ClosedFds> {
        if self.moment == 0 {
            return Err(Error::Parse("moment index is 1-based".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|r| parse_ops(r, self.d))
            .collect::<Result<Vec<_>>>()?;
        let c = ClosedFds::new(self.moment - 1, self.d, coeffs)?;
        if c.n_conserved() != self.n {
            return Err(Error::Parse(format!(
                "N = {} but rows have {} entries",
                self.n,
                c.n_conserved()
            )));
        }
        Ok(c)
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_text(&serde_json::to_string(self).expect("closed fds serializes"))
    }
}

/// Output of `derive`: the scheme, its closed form when equilibria are
/// known, and fingerprints of both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdsDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub fds: FdsWire,
    pub fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<ClosedFdsWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_fingerprint: Option<String>,
}

impl FdsDocument {
    pub fn new(label: Option<String>, fds: &Fds, closed: Option<&ClosedFds>) -> Self {
        let fds = FdsWire::from_fds(fds);
        let closed = closed.map(ClosedFdsWire::from_closed);
        FdsDocument {
            label,
            fingerprint: fds.fingerprint(),
            closed_fingerprint: closed.as_ref().map(ClosedFdsWire::fingerprint),
            fds,
            closed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    /// Parses a document and checks that both fingerprints match the
    /// content.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FdsDocument = serde_json::from_str(text).map_err(|e| Error::Parse(format!("fds document: {e}")))?;
        if doc.fds.fingerprint() != doc.fingerprint {
            return Err(Error::Parse("fingerprint does not match fds content".into()));
        }
        if doc.closed.as_ref().map(ClosedFdsWire::fingerprint) != doc.closed_fingerprint {
            return Err(Error::Parse("closed fingerprint does not match closed content".into()));
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derive::{fds_close, fds_from_lbs};

    const D1Q2: &str = r#"{
        "label": "reference",
        "q": 2, "d": 1, "N": 1,
        "M": [["1", "1"], ["1", "-1"]],
        "velocities": [[1], [-1]],
        "S": ["0", "3/2"],
        "equilibria": [["1"], ["1/2"]]
    }"#;

    #[test]
    fn scheme_file_round_trip() {
        let file = SchemeFile::from_json(D1Q2).unwrap();
        let spec = file.to_spec().unwrap();
        let back = SchemeFile::from_spec(&spec, file.label.clone());
        assert_eq!(back, file);
        let again = SchemeFile::from_json(&back.to_json()).unwrap();
        assert_eq!(again.to_spec().unwrap(), spec);
    }

    #[test]
    fn scheme_file_errors() {
        let err = SchemeFile::from_json("{\n  \"q\": 2,\n  oops\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let bad_rational = D1Q2.replace("\"3/2\"", "\"1.5\"");
        assert!(matches!(
            SchemeFile::from_json(&bad_rational).unwrap().to_spec(),
            Err(Error::Parse(_))
        ));
        let bad_q = D1Q2.replace("\"q\": 2", "\"q\": 3");
        assert!(SchemeFile::from_json(&bad_q).unwrap().to_spec().is_err());
        let unknown = D1Q2.replace("\"label\"", "\"lable\"");
        assert!(SchemeFile::from_json(&unknown).is_err());
    }

    #[test]
    fn fds_document_round_trip() {
        let spec = SchemeFile::from_json(D1Q2).unwrap().to_spec().unwrap();
        let f = fds_from_lbs(&spec, 0).unwrap();
        let c = fds_close(&f, spec.equilibria().unwrap()).unwrap();
        let doc = FdsDocument::new(Some("reference".into()), &f, Some(&c));
        let text = doc.to_json();
        let parsed = FdsDocument::from_json(&text).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(parsed.fds.to_fds().unwrap(), f);
        assert_eq!(parsed.closed.unwrap().to_closed().unwrap(), c);
        assert_eq!(FdsDocument::new(None, &f, Some(&c)).fingerprint, doc.fingerprint);
    }

    #[test]
    fn transport_file_round_trip() {
        let text = r#"{"d": 1, "T": [["1 * T[1]", "0"], ["1/2 - 1/2 * T[-1]", "1"]]}"#;
        let input = InputFile::from_json(text).unwrap();
        let t = input.transport().unwrap();
        assert_eq!(t.get(1, 0), &ShiftPoly::parse("1/2 - 1/2 * T[-1]", 1).unwrap());
        let back = TransportFile::from_matrix(&t, None);
        assert_eq!(
            TransportFile::from_json(&back.to_json()).unwrap().to_matrix().unwrap(),
            t
        );
        let scheme = InputFile::from_json(D1Q2).unwrap();
        assert_eq!(scheme.label(), Some("reference"));
        assert_eq!(scheme.transport().unwrap().size(), 2);
        assert!(InputFile::from_json(r#"{"d": 1, "T": [["1 * T["]]}"#)
            .unwrap()
            .transport()
            .is_err());
    }

    #[test]
    fn tampered_document_rejected() {
        let spec = SchemeFile::from_json(D1Q2).unwrap().to_spec().unwrap();
        let f = fds_from_lbs(&spec, 0).unwrap();
        let doc = FdsDocument::new(None, &f, None);
        let tampered = doc.to_json().replacen("T[1]", "T[2]", 1);
        assert!(FdsDocument::from_json(&tampered).is_err());
    }
}
