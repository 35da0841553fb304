//! Finite exponential sums `Σ a_j e^{λ_j s}`.
//!
//! Coefficients are either exact (rational modulus, rational phase in
//! turns) or numeric (`f64` complex); a sum never mixes the two. Terms keep
//! their declaration order, which is what truncation uses; a separate
//! ordering by exponent value is maintained for display and evaluation.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactlin::Rational;
use crate::exponents::{Exponent, SymbolTable};

/// Terms with `λσ` above this natural-log scale are refused by
/// [`ExponentialSum::evaluate`].
pub const OVERFLOW_EXPONENT: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SumError {
    #[error("exact coefficients at term {index} cannot be merged into a (rational modulus, rational turns) pair")]
    ExactPhaseClosure { index: usize },
    #[error("sum mixes exact and numeric coefficients")]
    MixedModes,
    #[error("duplicate exponent at terms {first} and {second}")]
    DuplicateExponent { first: usize, second: usize },
    #[error("exponent at term {index} does not belong to the sum's symbol table")]
    TableMismatch { index: usize },
    #[error("term {term} overflows at this point (exponent {exponent:.3e})")]
    Overflow { term: usize, exponent: f64 },
    #[error("truncation length {n} outside 1..={len}")]
    TruncationOutOfRange { n: usize, len: usize },
    #[error("negative modulus")]
    NegativeModulus,
}

/// Reduces a rational into `[0, 1)`.
pub fn reduce_turns(q: &Rational) -> Rational {
    let fl = Rational::from_integer(q.numer().div_floor(q.denom()));
    q - fl
}

/// `modulus · e^{2πi·turns}` with both parts rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactCoefficient {
    modulus: Rational,
    turns: Rational,
}

impl ExactCoefficient {
    /// A negative modulus is folded into the phase as an extra half turn.
    pub fn new(modulus: Rational, turns: Rational) -> Self {
        let (modulus, turns) = if modulus.is_negative() {
            (-modulus, turns + Rational::new(1.into(), 2.into()))
        } else {
            (modulus, turns)
        };
        if modulus.is_zero() {
            return Self::zero();
        }
        ExactCoefficient {
            modulus,
            turns: reduce_turns(&turns),
        }
    }

    pub fn zero() -> Self {
        ExactCoefficient {
            modulus: Rational::zero(),
            turns: Rational::zero(),
        }
    }

    pub fn real(x: Rational) -> Self {
        Self::new(x, Rational::zero())
    }

    pub fn modulus(&self) -> &Rational {
        &self.modulus
    }

    pub fn turns(&self) -> &Rational {
        &self.turns
    }

    pub fn is_zero(&self) -> bool {
        self.modulus.is_zero()
    }

    /// Multiplies by `e^{2πi·delta}`.
    pub fn rotate(&self, delta: &Rational) -> Self {
        Self::new(self.modulus.clone(), &self.turns + delta)
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self::new(&self.modulus * factor, self.turns.clone())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.modulus.clone(), -self.turns.clone())
    }

    /// Exact sum when it stays in the class: equal phases add moduli,
    /// opposite phases subtract them.
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        if self.turns == other.turns {
            return Some(Self::new(&self.modulus + &other.modulus, self.turns.clone()));
        }
        let half = Rational::new(1.into(), 2.into());
        if reduce_turns(&(&self.turns - &other.turns)) == half {
            return Some(Self::new(&self.modulus - &other.modulus, self.turns.clone()));
        }
        None
    }

    pub fn to_complex(&self) -> Complex64 {
        let r = self.modulus.to_f64().unwrap_or(f64::NAN);
        unit_turn(&self.turns) * r
    }
}

/// `e^{2πi·q}` with exact values at quarter turns.
pub fn unit_turn(q: &Rational) -> Complex64 {
    let q = reduce_turns(q);
    let four = Rational::from_integer(4.into());
    let quarters = &q * &four;
    if quarters.is_integer() {
        return match quarters.to_integer().to_i32() {
            Some(0) => Complex64::new(1.0, 0.0),
            Some(1) => Complex64::new(0.0, 1.0),
            Some(2) => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let (s, c) = (TAU * q.to_f64().unwrap_or(f64::NAN)).sin_cos();
    Complex64::new(c, s)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Exact(ExactCoefficient),
    Numeric(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientMode {
    Exact,
    Numeric,
}

impl Coefficient {
    pub fn mode(&self) -> CoefficientMode {
        match self {
            Coefficient::Exact(_) => CoefficientMode::Exact,
            Coefficient::Numeric(_) => CoefficientMode::Numeric,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Coefficient::Exact(c) => c.to_complex(),
            Coefficient::Numeric(z) => *z,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact(c) => c.is_zero(),
            Coefficient::Numeric(z) => *z == Complex64::zero(),
        }
    }

    pub fn as_exact(&self) -> Option<&ExactCoefficient> {
        match self {
            Coefficient::Exact(c) => Some(c),
            Coefficient::Numeric(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub exponent: Exponent,
    pub coefficient: Coefficient,
}

impl Term {
    pub fn exact(exponent: Exponent, c: ExactCoefficient) -> Self {
        Term {
            exponent,
            coefficient: Coefficient::Exact(c),
        }
    }

    pub fn numeric(exponent: Exponent, z: Complex64) -> Self {
        Term {
            exponent,
            coefficient: Coefficient::Numeric(z),
        }
    }
}

/// A point `s = σ + it`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub sigma: f64,
    pub t: f64,
}

impl ComplexPoint {
    pub fn new(sigma: f64, t: f64) -> Self {
        ComplexPoint { sigma, t }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        ComplexPoint::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialSum {
    name: String,
    table: Arc<SymbolTable>,
    terms: Vec<Term>,
    sorted: Vec<usize>,
}

fn by_value(a: &Exponent, b: &Exponent) -> Ordering {
    a.value().total_cmp(&b.value()).then_with(|| a.coords().cmp(b.coords()))
}

/// Neumaier's compensated summation.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

impl ExponentialSum {
    /// Builds a sum whose exponents are already distinct. Zero terms are
    /// dropped.
    pub fn new(name: impl Into<String>, table: Arc<SymbolTable>, terms: Vec<Term>) -> Result<Self, SumError> {
        Self::validate(&table, &terms)?;
        let mut seen = std::collections::HashMap::new();
        for (i, t) in terms.iter().enumerate() {
            if let Some(&first) = seen.get(t.exponent.coords()) {
                return Err(SumError::DuplicateExponent { first, second: i });
            }
            seen.insert(t.exponent.coords().to_vec(), i);
        }
        Ok(Self::assemble(name.into(), table, terms))
    }

    /// Builds a sum, merging repeated exponents by coefficient addition.
    pub fn merged(name: impl Into<String>, table: Arc<SymbolTable>, terms: Vec<Term>) -> Result<Self, SumError> {
        Self::validate(&table, &terms)?;
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        let mut pos = std::collections::HashMap::new();
        for (i, t) in terms.into_iter().enumerate() {
            match pos.get(t.exponent.coords()) {
                None => {
                    pos.insert(t.exponent.coords().to_vec(), out.len());
                    out.push(t);
                }
                Some(&k) => {
                    let slot = &mut out[k].coefficient;
                    *slot = match (&*slot, &t.coefficient) {
                        (Coefficient::Exact(a), Coefficient::Exact(b)) => {
                            Coefficient::Exact(a.checked_add(b).ok_or(SumError::ExactPhaseClosure { index: i })?)
                        }
                        (Coefficient::Numeric(a), Coefficient::Numeric(b)) => Coefficient::Numeric(a + b),
                        _ => return Err(SumError::MixedModes),
                    };
                }
            }
        }
        Ok(Self::assemble(name.into(), table, out))
    }

    fn validate(table: &SymbolTable, terms: &[Term]) -> Result<(), SumError> {
        for (i, t) in terms.iter().enumerate() {
            if t.exponent.coords().len() != table.len() {
                return Err(SumError::TableMismatch { index: i });
            }
        }
        if let Some(first) = terms.first() {
            let mode = first.coefficient.mode();
            if terms.iter().any(|t| t.coefficient.mode() != mode) {
                return Err(SumError::MixedModes);
            }
        }
        Ok(())
    }

    fn assemble(name: String, table: Arc<SymbolTable>, terms: Vec<Term>) -> Self {
        let terms: Vec<Term> = terms.into_iter().filter(|t| !t.coefficient.is_zero()).collect();
        let mut sorted: Vec<usize> = (0..terms.len()).collect();
        sorted.sort_by(|&a, &b| by_value(&terms[a].exponent, &terms[b].exponent));
        ExponentialSum {
            name,
            table,
            terms,
            sorted,
        }
    }

    /// Idempotent normal form: zero terms dropped, sorted view refreshed.
    pub fn normalize(&self) -> Self {
        Self::assemble(self.name.clone(), self.table.clone(), self.terms.clone())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        ExponentialSum {
            name: name.into(),
            ..self.clone()
        }
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    /// Terms in declaration order.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Terms by ascending exponent value.
    pub fn sorted_terms(&self) -> impl Iterator<Item = &Term> {
        self.sorted.iter().map(|&i| &self.terms[i])
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient mode; an empty sum counts as exact.
    pub fn mode(&self) -> CoefficientMode {
        self.terms
            .first()
            .map_or(CoefficientMode::Exact, |t| t.coefficient.mode())
    }

    pub fn exponents(&self) -> Vec<Exponent> {
        self.terms.iter().map(|t| t.exponent.clone()).collect()
    }

    pub fn coefficient_of(&self, e: &Exponent) -> Option<&Coefficient> {
        self.terms.iter().find(|t| &t.exponent == e).map(|t| &t.coefficient)
    }

    pub fn max_abs_exponent(&self) -> f64 {
        self.terms.iter().map(|t| t.exponent.value().abs()).fold(0.0, f64::max)
    }

    /// `Σ a_j e^{λ_j s}` with compensated summation, in sorted order.
    pub fn evaluate(&self, s: ComplexPoint) -> Result<Complex64, SumError> {
        let mut re = Compensated::default();
        let mut im = Compensated::default();
        for &i in &self.sorted {
            let t = &self.terms[i];
            let lam = t.exponent.value();
            let growth = lam * s.sigma;
            if growth > OVERFLOW_EXPONENT {
                return Err(SumError::Overflow {
                    term: i,
                    exponent: growth,
                });
            }
            let (sn, cs) = (lam * s.t).sin_cos();
            let v = t.coefficient.to_complex() * Complex64::new(cs, sn) * growth.exp();
            re.add(v.re);
            im.add(v.im);
        }
        Ok(Complex64::new(re.value(), im.value()))
    }

    /// Vertical translation `s ↦ s + iτ`, always in numeric mode.
    pub fn translate(&self, tau: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let (sn, cs) = (t.exponent.value() * tau).sin_cos();
                Term::numeric(t.exponent.clone(), t.coefficient.to_complex() * Complex64::new(cs, sn))
            })
            .collect();
        Self::assemble(self.name.clone(), self.table.clone(), terms)
    }

    /// Translation by `τ = 2π·turns`. Stays exact when every `λ_j τ / 2π`
    /// is rational, i.e. when the sum is exact and every exponent is a
    /// rational multiple of the unit symbol.
    pub fn translate_turns(&self, turns: &Rational) -> Self {
        let exact_ok = self.mode() == CoefficientMode::Exact
            && (turns.is_zero() || self.terms.iter().all(|t| t.exponent.is_rational()));
        if !exact_ok {
            return self.translate(TAU * turns.to_f64().unwrap_or(f64::NAN));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let c = t.coefficient.as_exact().expect("exact mode");
                Term::exact(t.exponent.clone(), c.rotate(&(&t.exponent.coords()[0] * turns)))
            })
            .collect();
        Self::assemble(self.name.clone(), self.table.clone(), terms)
    }

    /// First `n` terms in declaration order.
    pub fn truncate(&self, n: usize) -> Result<Self, SumError> {
        if n == 0 || n > self.terms.len() {
            return Err(SumError::TruncationOutOfRange {
                n,
                len: self.terms.len(),
            });
        }
        Ok(Self::assemble(
            self.name.clone(),
            self.table.clone(),
            self.terms[..n].to_vec(),
        ))
    }

    /// Coefficient-wise complex conjugate (so that `f*(s̄)` conjugates).
    pub fn conjugate(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                exponent: t.exponent.clone(),
                coefficient: match &t.coefficient {
                    Coefficient::Exact(c) => Coefficient::Exact(c.conj()),
                    Coefficient::Numeric(z) => Coefficient::Numeric(z.conj()),
                },
            })
            .collect();
        Self::assemble(self.name.clone(), self.table.clone(), terms)
    }

    /// Replaces each coefficient through `f`, dropping resulting zeros.
    pub fn map_coefficients<F>(&self, mut f: F) -> Self
    where
        F: FnMut(usize, &Term) -> Coefficient,
    {
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| Term {
                exponent: t.exponent.clone(),
                coefficient: f(i, t),
            })
            .collect();
        Self::assemble(self.name.clone(), self.table.clone(), terms)
    }

    /// Precomputed `f64` form for fast repeated evaluation.
    pub fn evaluator(&self) -> SumEvaluator {
        SumEvaluator {
            terms: self
                .sorted_terms()
                .map(|t| (t.exponent.value(), t.coefficient.to_complex()))
                .collect(),
        }
    }
}

/// Anything that can be evaluated at a complex point.
pub trait Evaluator: Sync {
    fn eval(&self, s: Complex64) -> Complex64;
}

impl<F> Evaluator for F
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    fn eval(&self, s: Complex64) -> Complex64 {
        self(s)
    }
}

/// Floating-point image of an [`ExponentialSum`]; no overflow checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SumEvaluator {
    terms: Vec<(f64, Complex64)>,
}

impl SumEvaluator {
    pub fn from_pairs(terms: Vec<(f64, Complex64)>) -> Self {
        SumEvaluator { terms }
    }

    pub fn terms(&self) -> &[(f64, Complex64)] {
        &self.terms
    }

    /// `(f(s), f'(s))`.
    pub fn eval_with_derivative(&self, s: Complex64) -> (Complex64, Complex64) {
        let mut v = Complex64::zero();
        let mut d = Complex64::zero();
        for &(lam, a) in &self.terms {
            let e = a * (s * lam).exp();
            v += e;
            d += e * lam;
        }
        (v, d)
    }

    pub fn max_abs_exponent(&self) -> f64 {
        self.terms.iter().map(|t| t.0.abs()).fold(0.0, f64::max)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(lam, a)| lam == 0.0 || a == Complex64::zero())
    }
}

impl Evaluator for SumEvaluator {
    fn eval(&self, s: Complex64) -> Complex64 {
        let mut re = Compensated::default();
        let mut im = Compensated::default();
        for &(lam, a) in &self.terms {
            let v = a * (s * lam).exp();
            re.add(v.re);
            im.add(v.im);
        }
        Complex64::new(re.value(), im.value())
    }
}
