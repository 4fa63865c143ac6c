//! Versioned JSON records for generated problems.

use serde::{Deserialize, Serialize};

use crate::expr::{parse_prefix, to_latex, to_prefix, Expr};

pub const FORMAT_VERSION: &str = "eid-1";

/// Serde adapter storing an [`Expr`] as its prefix string.
pub mod prefix_expr {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::expr::{parse_prefix, to_prefix, Expr};

    pub fn serialize<S: Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_prefix(e))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let s = String::deserialize(d)?;
        parse_prefix(&s).map_err(D::Error::custom)
    }
}

/// An expression in both serialized forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rendered {
    pub prefix: String,
    pub latex: String,
}

impl Rendered {
    pub fn of(e: &Expr) -> Self {
        Rendered { prefix: to_prefix(e), latex: to_latex(e) }
    }

    pub fn with_latex(e: &Expr, latex: String) -> Self {
        Rendered { prefix: to_prefix(e), latex }
    }

    pub fn expr(&self) -> Result<Expr, crate::expr::ExprError> {
        parse_prefix(&self.prefix)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordParams {
    pub a: String,
    pub b: String,
    pub m: String,
    pub l: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub eigenfunction: String,
    pub eigenvalue: String,
    pub log_derivative: String,
    pub new_coeff: String,
    pub invertible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub max_residual: f64,
    pub points: usize,
    pub window: (f64, f64),
}

/// The JSON form of a generated problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub version: String,
    pub family: String,
    pub n: u32,
    pub params: RecordParams,
    pub seed_form: String,
    pub constants: (String, String),
    pub resonant: bool,
    /// Coefficient `A` of `y'' + A y = 0`; the latex form is the displayed equation.
    pub equation: Rendered,
    pub solution: Rendered,
    pub trace: Vec<TraceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationSummary>,
}

impl ProblemRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
