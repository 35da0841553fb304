//! Exponent sets as exact rational coordinate vectors over declared real
//! symbols, and the ℚ-bases / integral bases they generate.
//!
//! A [`SymbolTable`] lists real numbers the user asserts to be linearly
//! independent over ℚ (the unit `1` is always symbol 0). An [`Exponent`] is
//! a rational combination of them. All algebra works on the coordinates
//! only; the numeric symbol values are used solely for evaluation.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactlin::{GeneratedLattice, IntegerMatrix, Rational, RationalMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExponentError {
    #[error("duplicate exponent at positions {first} and {second}")]
    Duplicate { first: usize, second: usize },
    #[error("exponent list is empty")]
    Empty,
    #[error("coordinate vector of length {found} does not match symbol table of size {expected}")]
    TableMismatch { expected: usize, found: usize },
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` must have a finite nonzero value")]
    BadSymbolValue(String),
    #[error("invalid decimal literal `{0}`")]
    BadDecimal(String),
}

/// One declared real symbol. `value` is the exact rational reading of the
/// decimal literal it was declared with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub literal: String,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    symbols: Vec<Symbol>,
}

pub const UNIT_SYMBOL: &str = "1";

/// Parses a decimal literal (optional sign, optional fraction, optional
/// exponent) into an exact rational.
pub fn parse_decimal(text: &str) -> Result<Rational, ExponentError> {
    let bad = || ExponentError::BadDecimal(text.to_string());
    let (mantissa, exp10) = match text.find(['e', 'E']) {
        Some(p) => (&text[..p], text[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut n: BigInt = all.parse().map_err(|_| bad())?;
    if neg {
        n = -n;
    }
    let scale = exp10 - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Number of significant digits in a decimal literal.
pub fn significant_digits(text: &str) -> usize {
    let mantissa = text.split(['e', 'E']).next().unwrap_or("");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    digits.trim_start_matches('0').len()
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}

impl SymbolTable {
    /// A table holding only the unit symbol.
    pub fn new() -> Self {
        SymbolTable {
            symbols: vec![Symbol {
                name: UNIT_SYMBOL.to_string(),
                literal: "1".to_string(),
                value: Rational::one(),
            }],
        }
    }

    /// Declares a symbol from its decimal literal; returns its index.
    pub fn declare(&mut self, name: &str, literal: &str) -> Result<usize, ExponentError> {
        if self.index_of(name).is_some() {
            return Err(ExponentError::DuplicateSymbol(name.to_string()));
        }
        let value = parse_decimal(literal)?;
        if value.is_zero() {
            return Err(ExponentError::BadSymbolValue(name.to_string()));
        }
        self.symbols.push(Symbol {
            name: name.to_string(),
            literal: literal.to_string(),
            value,
        });
        Ok(self.symbols.len() - 1)
    }

    pub fn with(mut self, name: &str, literal: &str) -> Result<Self, ExponentError> {
        self.declare(name, literal)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Declared symbols, excluding the unit.
    pub fn declared(&self) -> &[Symbol] {
        &self.symbols[1..]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// Builds an exponent from a coordinate vector.
    pub fn exponent(&self, coords: Vec<Rational>) -> Result<Exponent, ExponentError> {
        if coords.len() != self.len() {
            return Err(ExponentError::TableMismatch {
                expected: self.len(),
                found: coords.len(),
            });
        }
        let value = coords
            .iter()
            .zip(&self.symbols)
            .fold(Rational::zero(), |acc, (c, s)| acc + c * &s.value);
        Ok(Exponent {
            coords,
            value: value.to_f64().unwrap_or(f64::NAN),
        })
    }

    /// A rational multiple of the unit symbol.
    pub fn rational(&self, q: Rational) -> Exponent {
        let mut coords = vec![Rational::zero(); self.len()];
        coords[0] = q;
        self.exponent(coords).expect("length matches")
    }

    /// Same symbols with every numeric value multiplied by `factor`.
    pub fn rescaled(&self, factor: &Rational) -> Self {
        SymbolTable {
            symbols: self
                .symbols
                .iter()
                .map(|s| Symbol {
                    value: &s.value * factor,
                    ..s.clone()
                })
                .collect(),
        }
    }
}

/// A real exponent `λ = Σ_i coords_i · symbol_i`. Equality and hashing look
/// at coordinates only.
#[derive(Debug, Clone)]
pub struct Exponent {
    coords: Vec<Rational>,
    value: f64,
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}

impl Eq for Exponent {}

impl std::hash::Hash for Exponent {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coords.hash(state)
    }
}

impl Exponent {
    /// Reassembles an exponent from stored parts without a table (used by
    /// deserialization).
    pub fn from_parts(coords: Vec<Rational>, value: f64) -> Self {
        Exponent { coords, value }
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// True when only the unit coordinate may be nonzero.
    pub fn is_rational(&self) -> bool {
        self.coords.iter().skip(1).all(Zero::is_zero)
    }

    /// Renders as a linear form over the table's symbol names.
    pub fn display<'a>(&'a self, table: &'a SymbolTable) -> ExponentDisplay<'a> {
        ExponentDisplay { exp: self, table }
    }
}

pub struct ExponentDisplay<'a> {
    exp: &'a Exponent,
    table: &'a SymbolTable,
}

impl fmt::Display for ExponentDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, s) in self.exp.coords.iter().zip(self.table.symbols()) {
            if c.is_zero() {
                continue;
            }
            let neg = c < &Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            if s.name == UNIT_SYMBOL {
                write!(f, "{mag}")?;
            } else {
                write!(f, "{mag}*{}", s.name)?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A ℚ-basis chosen among the exponents, with `representation[j]` giving
/// `λ_j = Σ_k r_{j,k} g_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QBasis {
    pub basis: Vec<Exponent>,
    /// Input positions of the basis elements.
    pub basis_indices: Vec<usize>,
    pub representation: RationalMatrix,
}

/// A ℤ-module basis of the module generated by the exponents, with integer
/// representation coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralBasis {
    pub basis: Vec<Exponent>,
    pub representation: IntegerMatrix,
}

fn check_distinct(exponents: &[Exponent]) -> Result<(), ExponentError> {
    if exponents.is_empty() {
        return Err(ExponentError::Empty);
    }
    let len = exponents[0].coords.len();
    let mut seen = std::collections::HashMap::new();
    for (i, e) in exponents.iter().enumerate() {
        if e.coords.len() != len {
            return Err(ExponentError::TableMismatch {
                expected: len,
                found: e.coords.len(),
            });
        }
        if let Some(&first) = seen.get(&e.coords) {
            return Err(ExponentError::Duplicate { first, second: i });
        }
        seen.insert(e.coords.clone(), i);
    }
    Ok(())
}

/// Writes `v` as a combination of the given basis rows.
fn coordinates_in(basis: &[Exponent], v: &Exponent) -> Vec<Rational> {
    if basis.is_empty() {
        return Vec::new();
    }
    let cols: Vec<Vec<Rational>> = basis.iter().map(|b| b.coords.clone()).collect();
    let bt = RationalMatrix::from_rows(cols, v.coords.len())
        .expect("uniform lengths")
        .transpose();
    bt.solve(&v.coords)
        .expect("dimensions agree")
        .expect("vector lies in the span")
}

/// ℚ-basis by Gaussian elimination in input order: an exponent joins the
/// basis when it is independent of those already chosen.
pub fn qbasis(exponents: &[Exponent]) -> Result<QBasis, ExponentError> {
    check_distinct(exponents)?;
    let dim = exponents[0].coords.len();
    // echelon rows of the chosen basis, kept reduced for the independence test
    let mut echelon: Vec<(usize, Vec<Rational>)> = Vec::new();
    let mut basis_indices = Vec::new();
    for (i, e) in exponents.iter().enumerate() {
        let mut v = e.coords.clone();
        for (p, row) in &echelon {
            if v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                *x -= &f * r;
            }
        }
        if let Some(p) = (0..dim).find(|&k| !v[k].is_zero()) {
            let inv = v[p].recip();
            for x in v.iter_mut() {
                *x *= &inv;
            }
            echelon.push((p, v));
            basis_indices.push(i);
        }
    }
    let basis: Vec<Exponent> = basis_indices.iter().map(|&i| exponents[i].clone()).collect();
    let rows: Vec<Vec<Rational>> = exponents.iter().map(|e| coordinates_in(&basis, e)).collect();
    let representation = RationalMatrix::from_rows(rows, basis.len()).expect("uniform rows");
    Ok(QBasis {
        basis,
        basis_indices,
        representation,
    })
}

/// Symbol coordinates of the exponents scaled to integers by their common
/// denominator `d`.
pub(crate) fn scaled_coordinates(exponents: &[Exponent]) -> (BigInt, Vec<Vec<BigInt>>) {
    let d = exponents
        .iter()
        .flat_map(|e| e.coords.iter())
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let dq = Rational::from_integer(d.clone());
    let rows = exponents
        .iter()
        .map(|e| e.coords.iter().map(|c| (c * &dq).to_integer()).collect())
        .collect();
    (d, rows)
}

/// Reads the integral basis off a lattice built from `scaled` (in order).
pub(crate) fn basis_from_lattice(
    table: &SymbolTable,
    lattice: &GeneratedLattice,
    d: &BigInt,
    scaled: &[Vec<BigInt>],
) -> IntegralBasis {
    let basis = lattice
        .basis()
        .into_iter()
        .map(|row| {
            let coords = row.into_iter().map(|x| Rational::new(x, d.clone())).collect();
            table.exponent(coords).expect("table length")
        })
        .collect();
    let rows = scaled
        .iter()
        .map(|v| lattice.coordinates(v).expect("generator lies in its lattice"))
        .collect();
    IntegralBasis {
        basis,
        representation: IntegerMatrix::from_rows(rows, lattice.rank()).expect("uniform rows"),
    }
}

/// Integral basis of the ℤ-module generated by the exponents: the Hermite
/// basis of their denominator-cleared symbol coordinates, built one
/// exponent at a time.
pub fn integral_basis(table: &SymbolTable, exponents: &[Exponent]) -> Result<IntegralBasis, ExponentError> {
    check_distinct(exponents)?;
    if exponents[0].coords.len() != table.len() {
        return Err(ExponentError::TableMismatch {
            expected: table.len(),
            found: exponents[0].coords.len(),
        });
    }
    let (d, scaled) = scaled_coordinates(exponents);
    let mut lattice = GeneratedLattice::new(table.len(), false);
    for v in &scaled {
        lattice.insert(v.clone(), &Rational::zero()).expect("uniform lengths");
    }
    Ok(basis_from_lattice(table, &lattice, &d, &scaled))
}

/// One row of an integral-basis trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub n: usize,
    pub basis: IntegralBasis,
    /// lcm of the coordinate denominators of all basis elements.
    pub denominator: BigInt,
}

/// Integral bases of the first `n` exponents of a generator, for `n = 1..=n_max`.
pub fn integral_basis_trace<G>(
    table: &SymbolTable,
    generator: G,
    n_max: usize,
) -> Result<Vec<TraceEntry>, ExponentError>
where
    G: Fn(usize) -> Exponent,
{
    let mut exps = Vec::with_capacity(n_max);
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        exps.push(generator(n));
        let basis = integral_basis(table, &exps)?;
        let denominator = basis
            .basis
            .iter()
            .flat_map(|b| b.coords.iter())
            .fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
        out.push(TraceEntry { n, basis, denominator });
    }
    Ok(out)
}

/// `λ_j = 2j − 1 + 1/(2(2j − 1))` for `j ≥ 1`: a rational exponent family
/// whose truncations need ever finer integral bases.
pub fn lambda0(j: usize) -> BigRational {
    assert!(j >= 1);
    let m = BigInt::from(2 * j - 1);
    Rational::from_integer(m.clone()) + Rational::new(BigInt::one(), m * 2)
}

/// Convenience wrapper over [`lambda0`] for the unit symbol.
pub fn lambda0_exponent(table: &SymbolTable, j: usize) -> Exponent {
    table.rational(lambda0(j))
}

pub type SharedTable = Arc<SymbolTable>;
