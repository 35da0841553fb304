//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use apeq::exactlin::Rational;
use apeq::exponents::SymbolTable;
use apeq::sums::{ExactCoefficient, ExponentialSum, Term};
use num_bigint::BigInt;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::oracles::{OracleTerm, Q};

pub const SQRT2: &str = "1.41421356237309504880168872420969807856967187537694";
pub const SQRT3: &str = "1.73205080756887729352744634443004905527614305450641";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn table() -> Arc<SymbolTable> {
    Arc::new(
        SymbolTable::new()
            .with("r2", SQRT2)
            .and_then(|t| t.with("r3", SQRT3))
            .expect("valid literals"),
    )
}

pub fn big(q: &Q) -> Rational {
    Rational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

fn reduce(x: Q) -> Q {
    x - Q::from_integer(x.floor().to_integer())
}

/// How the second sum of an instance was derived from the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Twisted,
    RandomPhases,
    ModulusChanged,
    TwistedThenNudged,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub kind: Kind,
    pub table: Arc<SymbolTable>,
    pub f1: ExponentialSum,
    pub f2: ExponentialSum,
    pub o1: Vec<OracleTerm>,
    pub o2: Vec<OracleTerm>,
}

pub fn sum_from(name: &str, table: &Arc<SymbolTable>, terms: &[OracleTerm]) -> ExponentialSum {
    let ts = terms
        .iter()
        .map(|t| {
            let e = table
                .exponent(t.coords.iter().map(big).collect())
                .expect("coordinates fit the table");
            Term::exact(e, ExactCoefficient::new(big(&t.modulus), big(&t.turns)))
        })
        .collect();
    ExponentialSum::new(name, table.clone(), ts).expect("distinct exponents")
}

/// Up to 4 distinct exponents spanning at most 2 of the coordinates
/// (unit, r2, r3). Each active coordinate has a step `1/d`, `d ≤ 6`, and
/// exponents take multiples `m/d` with `|m| ≤ 3`.
pub fn random_exponents<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<Q>> {
    const ACTIVE: [&[usize]; 5] = [&[0], &[0, 1], &[1, 2], &[1], &[0, 2]];
    let active = ACTIVE[rng.gen_range(0..ACTIVE.len())];
    let steps: Vec<i128> = active.iter().map(|_| rng.gen_range(1..=6)).collect();
    let mut out: Vec<Vec<Q>> = Vec::new();
    while out.len() < n {
        let mut v = vec![Q::from_integer(0); 3];
        for (&k, &d) in active.iter().zip(&steps) {
            v[k] = q(rng.gen_range(-3..=3), d);
        }
        if v.iter().all(|x| *x == Q::from_integer(0)) || out.contains(&v) {
            continue;
        }
        out.push(v);
    }
    out
}

/// Phases `m/8` per coordinate scaled so every `Σ c_k y_k` has denominator dividing 8.
fn twist<R: Rng>(rng: &mut R, exps: &[Vec<Q>]) -> Vec<Q> {
    (0..3)
        .map(|k| {
            let d = exps.iter().fold(1i128, |acc, e| num_integer::lcm(acc, *e[k].denom()));
            q(rng.gen_range(0..8) * d, 8)
        })
        .collect()
}

pub fn apply_twist(terms: &[OracleTerm], y: &[Q]) -> Vec<OracleTerm> {
    terms
        .iter()
        .map(|t| {
            let shift: Q = t.coords.iter().zip(y).map(|(c, yk)| c * yk).sum();
            OracleTerm {
                coords: t.coords.clone(),
                modulus: t.modulus,
                turns: reduce(t.turns + shift),
            }
        })
        .collect()
}

pub fn random_terms<R: Rng>(rng: &mut R, exps: &[Vec<Q>]) -> Vec<OracleTerm> {
    exps.iter()
        .map(|e| OracleTerm {
            coords: e.clone(),
            modulus: q(rng.gen_range(1..=4), rng.gen_range(1..=4)),
            turns: q(rng.gen_range(0..8), 8),
        })
        .collect()
}

/// One instance of the random suite: ≤ 4 terms, ≤ 2 symbols in play,
/// coordinate denominators ≤ 6, phase denominators ≤ 8.
pub fn random_instance(seed: u64) -> Instance {
    let mut r = rng(seed);
    let n = r.gen_range(1..=4);
    let exps = random_exponents(&mut r, n);
    let o1 = random_terms(&mut r, &exps);
    let kind = match r.gen_range(0..6) {
        0 | 1 => Kind::Twisted,
        2 | 3 => Kind::RandomPhases,
        4 => Kind::ModulusChanged,
        _ => Kind::TwistedThenNudged,
    };
    let o2 = match kind {
        Kind::Twisted => {
            let y = twist(&mut r, &exps);
            apply_twist(&o1, &y)
        }
        Kind::RandomPhases => o1
            .iter()
            .map(|t| OracleTerm {
                turns: q(r.gen_range(0..8), 8),
                ..t.clone()
            })
            .collect(),
        Kind::ModulusChanged => {
            let mut o2 = o1.clone();
            let j = r.gen_range(0..o2.len());
            if o2.len() > 1 && r.gen_bool(0.5) {
                o2.remove(j);
            } else {
                o2[j].modulus += Q::from_integer(1);
            }
            o2
        }
        Kind::TwistedThenNudged => {
            let y = twist(&mut r, &exps);
            let mut o2 = apply_twist(&o1, &y);
            let j = r.gen_range(0..o2.len());
            o2[j].turns = reduce(o2[j].turns + q(r.gen_range(1..8), 8));
            o2
        }
    };
    let table = table();
    Instance {
        seed,
        kind,
        f1: sum_from("f1", &table, &o1),
        f2: sum_from("f2", &table, &o2),
        table,
        o1,
        o2,
    }
}

/// A numeric sum for the winding comparisons: 2–3 terms, exponents in
/// [−2, 2], coefficients of modulus in [0.3, 1.5].
pub fn random_numeric_terms<R: Rng>(rng: &mut R) -> Vec<(f64, Complex64)> {
    let n = rng.gen_range(2..=3);
    let mut out: Vec<(f64, Complex64)> = Vec::new();
    while out.len() < n {
        let l = rng.gen_range(-2.0..2.0);
        if out.iter().any(|(m, _)| (m - l).abs() < 0.2) {
            continue;
        }
        let a = Complex64::from_polar(rng.gen_range(0.3..1.5), rng.gen_range(0.0..std::f64::consts::TAU));
        out.push((l, a));
    }
    out
}
