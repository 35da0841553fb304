//! JSON forms of exact objects and the report envelope.
//!
//! Rationals and big integers travel as reduced `"p/q"` strings, complex
//! numbers as `[re, im]`. Exact payloads round-trip losslessly; schema
//! errors carry the JSON-pointer path of the offending value.

use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::equivalence::{Certificate, Definition, EquivalenceVerdict, Witness};
use crate::exactlin::{IntegerMatrix, Rational, RationalMatrix};
use crate::exponents::{Exponent, IntegralBasis, QBasis, SymbolTable};
use crate::sums::{reduce_turns, Coefficient, ExactCoefficient, ExponentialSum, Term};

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JsonError {
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid payload: {0}")]
    Invalid(String),
}

/// Serializes a complex number as `[re, im]`.
pub fn complex_pair<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn complex_from_pair<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    let [re, im] = <[f64; 2]>::deserialize(d)?;
    Ok(Complex64::new(re, im))
}

pub fn rational_to_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    let bad = || format!("not a rational: {text:?}");
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d <= BigInt::from(0) {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// `"p/q"` string form of a rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatStr(pub Rational);

impl Serialize for RatStr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational_to_string(&self.0))
    }
}

impl<'de> Deserialize<'de> for RatStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map(RatStr).map_err(serde::de::Error::custom)
    }
}

/// Integer as a decimal string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntStr(pub BigInt);

impl Serialize for IntStr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for IntStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.trim()
            .parse()
            .map(IntStr)
            .map_err(|_| serde::de::Error::custom(format!("not an integer: {s:?}")))
    }
}

fn rats(v: &[Rational]) -> Vec<RatStr> {
    v.iter().cloned().map(RatStr).collect()
}

fn unrats(v: Vec<RatStr>) -> Vec<Rational> {
    v.into_iter().map(|r| r.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolJson {
    pub name: String,
    /// Decimal literal as declared.
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolTableJson {
    pub symbols: Vec<SymbolJson>,
}

impl SymbolTableJson {
    pub fn from_table(t: &SymbolTable) -> Self {
        SymbolTableJson {
            symbols: t
                .declared()
                .iter()
                .map(|s| SymbolJson {
                    name: s.name.clone(),
                    value: s.literal.clone(),
                })
                .collect(),
        }
    }

    pub fn to_table(&self) -> Result<SymbolTable, JsonError> {
        let mut t = SymbolTable::new();
        for s in &self.symbols {
            t.declare(&s.name, &s.value)
                .map_err(|e| JsonError::Invalid(e.to_string()))?;
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentJson {
    /// Coordinates over the symbol table, unit symbol first.
    pub coords: Vec<RatStr>,
    pub value: f64,
    /// Human-readable form; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl ExponentJson {
    pub fn new(e: &Exponent, table: Option<&SymbolTable>) -> Self {
        ExponentJson {
            coords: rats(e.coords()),
            value: e.value(),
            text: table.map(|t| e.display(t).to_string()),
        }
    }

    pub fn to_exponent(&self) -> Exponent {
        Exponent::from_parts(self.coords.iter().map(|r| r.0.clone()).collect(), self.value)
    }
}

fn exps(v: &[Exponent], table: Option<&SymbolTable>) -> Vec<ExponentJson> {
    v.iter().map(|e| ExponentJson::new(e, table)).collect()
}

fn int_matrix_json(m: &IntegerMatrix) -> Vec<Vec<IntStr>> {
    m.row_vecs()
        .into_iter()
        .map(|r| r.into_iter().map(IntStr).collect())
        .collect()
}

fn int_matrix_from(rows: Vec<Vec<IntStr>>, cols: usize) -> Result<IntegerMatrix, JsonError> {
    let rows: Vec<Vec<BigInt>> = rows.into_iter().map(|r| r.into_iter().map(|x| x.0).collect()).collect();
    IntegerMatrix::from_rows(rows, cols).map_err(|e| JsonError::Invalid(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralBasisJson {
    pub basis: Vec<ExponentJson>,
    /// Row `j` gives the integer coordinates of exponent `j`.
    pub representation: Vec<Vec<IntStr>>,
}

impl IntegralBasisJson {
    pub fn new(b: &IntegralBasis, table: Option<&SymbolTable>) -> Self {
        IntegralBasisJson {
            basis: exps(&b.basis, table),
            representation: int_matrix_json(&b.representation),
        }
    }

    pub fn to_basis(&self) -> Result<IntegralBasis, JsonError> {
        Ok(IntegralBasis {
            basis: self.basis.iter().map(ExponentJson::to_exponent).collect(),
            representation: int_matrix_from(self.representation.clone(), self.basis.len())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QBasisJson {
    pub basis: Vec<ExponentJson>,
    pub basis_indices: Vec<usize>,
    pub representation: Vec<Vec<RatStr>>,
}

impl QBasisJson {
    pub fn new(b: &QBasis, table: Option<&SymbolTable>) -> Self {
        QBasisJson {
            basis: exps(&b.basis, table),
            basis_indices: b.basis_indices.clone(),
            representation: b.representation.row_vecs().iter().map(|r| rats(r)).collect(),
        }
    }

    pub fn to_basis(&self) -> Result<QBasis, JsonError> {
        let rows: Vec<Vec<Rational>> = self.representation.iter().cloned().map(unrats).collect();
        Ok(QBasis {
            basis: self.basis.iter().map(ExponentJson::to_exponent).collect(),
            basis_indices: self.basis_indices.clone(),
            representation: RationalMatrix::from_rows(rows, self.basis.len())
                .map_err(|e| JsonError::Invalid(e.to_string()))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub basis: IntegralBasisJson,
    /// `ψ(g_k)` in turns, reduced into `[0, 1)`.
    pub turns: Vec<RatStr>,
}

impl WitnessJson {
    pub fn new(w: &Witness, table: Option<&SymbolTable>) -> Self {
        WitnessJson {
            basis: IntegralBasisJson::new(&w.basis, table),
            turns: rats(&w.turns),
        }
    }

    pub fn to_witness(&self) -> Result<Witness, JsonError> {
        Ok(Witness {
            basis: self.basis.to_basis()?,
            turns: self.turns.iter().map(|t| reduce_turns(&t.0)).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub relation: Vec<IntStr>,
    pub defect: RatStr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub definition: Definition,
    pub equivalent: bool,
    pub witness: Option<WitnessJson>,
    pub certificate: Option<CertificateJson>,
    pub modulus_mismatch: Option<usize>,
    pub supports_differ: bool,
    pub support: Vec<ExponentJson>,
    pub phases: Vec<RatStr>,
}

impl VerdictJson {
    pub fn new(v: &EquivalenceVerdict, table: Option<&SymbolTable>) -> Self {
        VerdictJson {
            definition: v.definition,
            equivalent: v.equivalent,
            witness: v.witness.as_ref().map(|w| WitnessJson::new(w, table)),
            certificate: v.certificate.as_ref().map(|c| CertificateJson {
                relation: c.relation.iter().cloned().map(IntStr).collect(),
                defect: RatStr(c.defect.clone()),
            }),
            modulus_mismatch: v.modulus_mismatch,
            supports_differ: v.supports_differ,
            support: exps(&v.support, table),
            phases: rats(&v.phases),
        }
    }

    pub fn to_verdict(&self) -> Result<EquivalenceVerdict, JsonError> {
        Ok(EquivalenceVerdict {
            definition: self.definition,
            equivalent: self.equivalent,
            witness: self.witness.as_ref().map(WitnessJson::to_witness).transpose()?,
            certificate: self.certificate.as_ref().map(|c| Certificate {
                relation: c.relation.iter().map(|x| x.0.clone()).collect(),
                defect: c.defect.0.clone(),
            }),
            modulus_mismatch: self.modulus_mismatch,
            supports_differ: self.supports_differ,
            support: self.support.iter().map(ExponentJson::to_exponent).collect(),
            phases: self.phases.iter().map(|r| reduce_turns(&r.0)).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientJson {
    Exact { modulus: RatStr, turns: RatStr },
    Numeric([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponent: ExponentJson,
    pub coefficient: CoefficientJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumJson {
    pub name: String,
    pub symbols: SymbolTableJson,
    /// Declaration order.
    pub terms: Vec<TermJson>,
}

impl SumJson {
    pub fn new(f: &ExponentialSum) -> Self {
        let table = f.table();
        SumJson {
            name: f.name().to_string(),
            symbols: SymbolTableJson::from_table(table),
            terms: f
                .terms()
                .iter()
                .map(|t| TermJson {
                    exponent: ExponentJson::new(&t.exponent, Some(table)),
                    coefficient: match &t.coefficient {
                        Coefficient::Exact(c) => CoefficientJson::Exact {
                            modulus: RatStr(c.modulus().clone()),
                            turns: RatStr(c.turns().clone()),
                        },
                        Coefficient::Numeric(z) => CoefficientJson::Numeric([z.re, z.im]),
                    },
                })
                .collect(),
        }
    }

    /// Rebuilds the sum on a fresh table from the embedded symbols.
    pub fn to_sum(&self) -> Result<ExponentialSum, JsonError> {
        self.to_sum_in(Arc::new(self.symbols.to_table()?))
    }

    /// Rebuilds the sum on a given table, which must declare the same symbols.
    pub fn to_sum_in(&self, table: Arc<SymbolTable>) -> Result<ExponentialSum, JsonError> {
        let names: Vec<&str> = table.declared().iter().map(|s| s.name.as_str()).collect();
        let mine: Vec<&str> = self.symbols.symbols.iter().map(|s| s.name.as_str()).collect();
        if names != mine {
            return Err(JsonError::Invalid("symbol table does not match".into()));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let coords: Vec<Rational> = t.exponent.coords.iter().map(|r| r.0.clone()).collect();
            // the value is recomputed from the table, not trusted
            let e = table.exponent(coords).map_err(|e| JsonError::Invalid(e.to_string()))?;
            terms.push(match &t.coefficient {
                CoefficientJson::Exact { modulus, turns } => {
                    Term::exact(e, ExactCoefficient::new(modulus.0.clone(), turns.0.clone()))
                }
                CoefficientJson::Numeric([re, im]) => Term::numeric(e, Complex64::new(*re, *im)),
            });
        }
        ExponentialSum::new(self.name.clone(), table, terms).map_err(|e| JsonError::Invalid(e.to_string()))
    }
}

/// Envelope of every command's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub schema_version: String,
    pub command: String,
    pub inputs: serde_json::Value,
    pub result: serde_json::Value,
    pub tool_version: String,
}

impl JsonReport {
    pub fn new(command: &str, inputs: serde_json::Value, result: serde_json::Value) -> Self {
        JsonReport {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            inputs,
            result,
            tool_version: TOOL_VERSION.to_string(),
        }
    }
}

/// Parses JSON into `T`, reporting schema errors with a JSON-pointer path.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, JsonError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        JsonError::Schema {
            path: pointer(&path),
            message: e.into_inner().to_string(),
        }
    })
}

/// Converts a `a.b[3].c` path into `/a/b/3/c`.
fn pointer(path: &str) -> String {
    if path == "." {
        return String::new();
    }
    let mut out = String::new();
    for seg in path.split('.') {
        let mut rest = seg;
        while let Some(i) = rest.find('[') {
            let head = &rest[..i];
            if !head.is_empty() {
                out.push('/');
                out.push_str(&head.replace('~', "~0").replace('/', "~1"));
            }
            let close = rest[i..].find(']').map(|k| i + k).unwrap_or(rest.len());
            out.push('/');
            out.push_str(&rest[i + 1..close]);
            rest = rest.get(close + 1..).unwrap_or("");
        }
        if !rest.is_empty() {
            out.push('/');
            out.push_str(&rest.replace('~', "~0").replace('/', "~1"));
        }
    }
    out
}

pub fn verdict_from_json(text: &str) -> Result<EquivalenceVerdict, JsonError> {
    from_json::<VerdictJson>(text)?.to_verdict()
}

pub fn sum_from_json(text: &str) -> Result<ExponentialSum, JsonError> {
    from_json::<SumJson>(text)?.to_sum()
}
