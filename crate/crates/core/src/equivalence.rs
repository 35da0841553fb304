//! Exact deciders for *-equivalence and finite-set Bohr equivalence.
//!
//! Two exact sums are compared on the union of their supports (a missing
//! term has coefficient zero). Writing `b_j = a_j e^{2πi q_j}`, the sums are
//! equivalent iff some ℚ-linear map sends every `λ_j` to `q_j` modulo 1,
//! which happens iff `Σ c_j q_j ∈ ℤ` for every integer relation
//! `Σ c_j λ_j = 0`. The relation lattice is computed exactly, so the answer
//! comes with either a witness (turns assigned to an integral basis) or a
//! certificate (one relation whose phase sum is not an integer).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactlin::{GeneratedLattice, Rational, RationalMatrix};
use crate::exponents::{basis_from_lattice, scaled_coordinates, Exponent, IntegralBasis};
use crate::sums::{reduce_turns, CoefficientMode, ExactCoefficient, ExponentialSum, SumError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquivError {
    #[error("sum `{0}` has numeric coefficients; equivalence needs exact input")]
    NonExactInput(String),
    #[error("sums use different symbol tables")]
    MixedSymbolTables,
    #[error("verdict does not verify: {0}")]
    VerdictMismatch(String),
    #[error(transparent)]
    Sum(#[from] SumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Definition {
    /// One map `ψ_n` per truncation depth.
    Star,
    /// A single map `ψ` on the whole span.
    Bohr,
}

/// Turns assigned to the elements of an integral basis;
/// `ψ(g_k) = 2π·turns[k]`. Integer representation coefficients make the
/// reduction of each turn into `[0, 1)` harmless.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub basis: IntegralBasis,
    pub turns: Vec<Rational>,
}

/// An integer relation `Σ c_j λ_j = 0` (indexed over the verdict's
/// support) with non-integral phase sum `defect`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub relation: Vec<BigInt>,
    pub defect: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceVerdict {
    pub definition: Definition,
    pub equivalent: bool,
    pub witness: Option<Witness>,
    pub certificate: Option<Certificate>,
    /// Index into the aligned support where moduli first differ.
    pub modulus_mismatch: Option<usize>,
    /// True when the two exponent sets differ and zero fill was applied.
    pub supports_differ: bool,
    /// Exponents where both coefficients are nonzero, in support order.
    pub support: Vec<Exponent>,
    /// Phase differences `q_j` on `support`, in turns.
    pub phases: Vec<Rational>,
}

/// One aligned support entry: the exponent and both coefficients.
#[derive(Debug, Clone)]
pub struct AlignedTerm {
    pub exponent: Exponent,
    pub a: ExactCoefficient,
    pub b: ExactCoefficient,
}

fn check_inputs(f1: &ExponentialSum, f2: &ExponentialSum) -> Result<(), EquivError> {
    for f in [f1, f2] {
        if f.mode() != CoefficientMode::Exact {
            return Err(EquivError::NonExactInput(f.name().to_string()));
        }
    }
    if f1.table() != f2.table() {
        return Err(EquivError::MixedSymbolTables);
    }
    Ok(())
}

/// Union of supports, `f1`'s declaration order first, missing entries zero.
pub fn align(f1: &ExponentialSum, f2: &ExponentialSum) -> Result<(Vec<AlignedTerm>, bool), EquivError> {
    check_inputs(f1, f2)?;
    let exact = |c: &crate::sums::Coefficient| c.as_exact().cloned().expect("exact mode");
    let mut out: Vec<AlignedTerm> = f1
        .terms()
        .iter()
        .map(|t| AlignedTerm {
            exponent: t.exponent.clone(),
            a: exact(&t.coefficient),
            b: ExactCoefficient::zero(),
        })
        .collect();
    let mut differ = false;
    for t in f2.terms() {
        match out.iter_mut().find(|x| x.exponent == t.exponent) {
            Some(x) => x.b = exact(&t.coefficient),
            None => {
                differ = true;
                out.push(AlignedTerm {
                    exponent: t.exponent.clone(),
                    a: ExactCoefficient::zero(),
                    b: exact(&t.coefficient),
                });
            }
        }
    }
    differ |= out.iter().any(|x| x.b.is_zero());
    Ok((out, differ))
}

fn decide(f1: &ExponentialSum, f2: &ExponentialSum, definition: Definition) -> Result<EquivalenceVerdict, EquivError> {
    let (aligned, supports_differ) = align(f1, f2)?;
    let mut verdict = EquivalenceVerdict {
        definition,
        equivalent: false,
        witness: None,
        certificate: None,
        modulus_mismatch: None,
        supports_differ,
        support: Vec::new(),
        phases: Vec::new(),
    };
    if let Some(j) = aligned.iter().position(|x| x.a.modulus() != x.b.modulus()) {
        verdict.modulus_mismatch = Some(j);
        return Ok(verdict);
    }
    let live: Vec<&AlignedTerm> = aligned.iter().filter(|x| !x.a.is_zero()).collect();
    verdict.support = live.iter().map(|x| x.exponent.clone()).collect();
    verdict.phases = live
        .iter()
        .map(|x| reduce_turns(&(x.b.turns() - x.a.turns())))
        .collect();
    if live.is_empty() {
        verdict.equivalent = true;
        verdict.witness = Some(Witness {
            basis: IntegralBasis {
                basis: Vec::new(),
                representation: crate::exactlin::IntegerMatrix::zeros(0, 0),
            },
            turns: Vec::new(),
        });
        return Ok(verdict);
    }
    // carry each phase through a Hermite basis of the support: a generator
    // that reduces to zero with a nonzero residual phase breaks equivalence
    let table = f1.table();
    let (d, scaled) = scaled_coordinates(&verdict.support);
    let q = &verdict.phases;
    let mut lattice = GeneratedLattice::new(table.len(), false);
    let mut failure = None;
    for (j, v) in scaled.iter().enumerate() {
        let res = lattice.insert(v.clone(), &q[j]).expect("uniform lengths");
        if res.is_some_and(|r| !r.tag.is_zero()) {
            failure = Some(j);
            break;
        }
    }
    if let Some(j) = failure {
        // replay with relation tracking up to the failing generator
        let mut tracked = GeneratedLattice::new(table.len(), true);
        for (i, v) in scaled.iter().enumerate().take(j + 1) {
            let res = tracked.insert(v.clone(), &q[i]).expect("uniform lengths");
            if i == j {
                let res = res.expect("same insertion sequence");
                let mut relation = res.relation.expect("tracked");
                relation.resize(scaled.len(), BigInt::zero());
                verdict.certificate = Some(primitive_certificate(relation, q));
            }
        }
        return Ok(verdict);
    }
    verdict.equivalent = true;
    verdict.witness = Some(Witness {
        basis: basis_from_lattice(table, &lattice, &d, &scaled),
        turns: lattice.tags(),
    });
    Ok(verdict)
}

/// Divides a failing relation by its content and makes its first nonzero
/// entry positive. If `c·q ∉ ℤ` then `(c/g)·q ∉ ℤ` as well.
fn primitive_certificate(mut relation: Vec<BigInt>, q: &[Rational]) -> Certificate {
    let g = relation.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let lead_negative = relation.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative());
    let g = if lead_negative { -g } else { g };
    for c in &mut relation {
        *c = &*c / &g;
    }
    let defect = relation.iter().zip(q).fold(Rational::zero(), |acc, (c, qj)| {
        acc + Rational::from_integer(c.clone()) * qj
    });
    Certificate {
        relation,
        defect: reduce_turns(&defect),
    }
}

/// Decides `f1 ∼* f2`.
pub fn star_equivalent(f1: &ExponentialSum, f2: &ExponentialSum) -> Result<EquivalenceVerdict, EquivError> {
    decide(f1, f2, Definition::Star)
}

/// Decides Bohr equivalence on a finite exponent set. For finite sets the
/// decision coincides with [`star_equivalent`]; only the reported
/// definition differs.
pub fn bohr_equivalent_finite(f1: &ExponentialSum, f2: &ExponentialSum) -> Result<EquivalenceVerdict, EquivError> {
    decide(f1, f2, Definition::Bohr)
}

/// Verdicts on the `n`-term truncations, `n = 1..=n_max`.
pub fn equivalence_trace(
    f1: &ExponentialSum,
    f2: &ExponentialSum,
    n_max: usize,
) -> Result<Vec<(usize, EquivalenceVerdict)>, EquivError> {
    check_inputs(f1, f2)?;
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let g1 = f1.truncate(n)?;
            let g2 = f2.truncate(n)?;
            Ok((n, star_equivalent(&g1, &g2)?))
        })
        .collect()
}

fn mismatch(msg: impl Into<String>) -> EquivError {
    EquivError::VerdictMismatch(msg.into())
}

/// Re-checks a verdict from scratch in exact arithmetic.
pub fn verify_verdict(
    verdict: &EquivalenceVerdict,
    f1: &ExponentialSum,
    f2: &ExponentialSum,
) -> Result<(), EquivError> {
    let (aligned, _) = align(f1, f2)?;
    let populated = [
        verdict.witness.is_some(),
        verdict.certificate.is_some(),
        verdict.modulus_mismatch.is_some(),
    ];
    if populated.iter().filter(|&&p| p).count() != 1 {
        return Err(mismatch(
            "exactly one of witness, certificate, modulus mismatch must be present",
        ));
    }
    if verdict.equivalent != verdict.witness.is_some() {
        return Err(mismatch("equivalent flag disagrees with witness presence"));
    }
    if let Some(j) = verdict.modulus_mismatch {
        let x = aligned.get(j).ok_or_else(|| mismatch("mismatch index out of range"))?;
        if x.a.modulus() == x.b.modulus() {
            return Err(mismatch(format!("moduli agree at index {j}")));
        }
        return Ok(());
    }
    if let Some(j) = aligned.iter().position(|x| x.a.modulus() != x.b.modulus()) {
        return Err(mismatch(format!("moduli differ at index {j} but no mismatch reported")));
    }
    let live: Vec<&AlignedTerm> = aligned.iter().filter(|x| !x.a.is_zero()).collect();
    if live.len() != verdict.support.len() || live.iter().zip(&verdict.support).any(|(x, e)| &x.exponent != e) {
        return Err(mismatch("support does not match the sums"));
    }
    let q: Vec<Rational> = live
        .iter()
        .map(|x| reduce_turns(&(x.b.turns() - x.a.turns())))
        .collect();
    if let Some(w) = &verdict.witness {
        let k = w.basis.basis.len();
        if w.turns.len() != k || w.basis.representation.cols() != k {
            return Err(mismatch("witness dimensions"));
        }
        if w.basis.representation.rows() != live.len() {
            return Err(mismatch("witness representation has wrong row count"));
        }
        if k > 0 {
            let coords: Vec<Vec<Rational>> = w.basis.basis.iter().map(|g| g.coords().to_vec()).collect();
            let dim = coords[0].len();
            let g = RationalMatrix::from_rows(coords, dim).map_err(|_| mismatch("ragged basis"))?;
            if g.rank() != k {
                return Err(mismatch("witness basis is not independent"));
            }
            for (j, x) in live.iter().enumerate() {
                let row: Vec<Rational> = w
                    .basis
                    .representation
                    .row(j)
                    .iter()
                    .map(|x| Rational::from_integer(x.clone()))
                    .collect();
                let recon = g
                    .transpose()
                    .mul_vec(&row)
                    .map_err(|_| mismatch("basis coordinate length"))?;
                if recon != x.exponent.coords() {
                    return Err(mismatch(format!(
                        "representation row {j} does not rebuild its exponent"
                    )));
                }
            }
        }
        for (j, x) in live.iter().enumerate() {
            let psi = w
                .basis
                .representation
                .row(j)
                .iter()
                .zip(&w.turns)
                .fold(Rational::zero(), |acc, (r, y)| {
                    acc + Rational::from_integer(r.clone()) * y
                });
            if x.a.rotate(&psi) != x.b {
                return Err(mismatch(format!("b_{j} != a_{j}·e^(iψ(λ_{j}))")));
            }
        }
        return Ok(());
    }
    let c = verdict.certificate.as_ref().expect("one field populated");
    if c.relation.len() != live.len() {
        return Err(mismatch("certificate length"));
    }
    if c.relation.iter().all(Zero::is_zero) {
        return Err(mismatch("zero relation"));
    }
    let dim = live[0].exponent.coords().len();
    let mut total = vec![Rational::zero(); dim];
    let mut defect = Rational::zero();
    for ((cj, x), qj) in c.relation.iter().zip(&live).zip(&q) {
        let cq = Rational::from_integer(cj.clone());
        for (t, e) in total.iter_mut().zip(x.exponent.coords()) {
            *t += &cq * e;
        }
        defect += &cq * qj;
    }
    if total.iter().any(|t| !t.is_zero()) {
        return Err(mismatch("certificate is not a relation among the exponents"));
    }
    let defect = reduce_turns(&defect);
    if defect.is_zero() || defect != c.defect || c.defect.is_negative() {
        return Err(mismatch("certificate defect"));
    }
    Ok(())
}
