//! Acceptance criteria, one pass/fail line each.

mod oracles;
mod support;

use std::f64::consts::TAU;
use std::time::Instant;

use apeq::approx::{
    almost_periods, bochner_fejer, default_step, mean_value, recover_coefficients, BFOrders, PeriodGrid,
};
use apeq::cli::{self, corpus_workspace};
use apeq::equivalence::{equivalence_trace, star_equivalent, verify_verdict, EquivalenceVerdict};
use apeq::exactlin::{hnf, invariant_factors, snf, IntegerMatrix, Rational};
use apeq::exponents::{integral_basis_trace, lambda0_exponent, SymbolTable};
use apeq::sums::{ComplexPoint, ExponentialSum, SumEvaluator};
use apeq::valuesets::{attainment_count, substrips, value_set_compare, ComparisonSpec, Rectangle};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use oracles::*;
use rand::Rng;
use rayon::prelude::*;
use support::*;

const SUITE: u64 = 500;

type Criterion<'a> = (&'a str, Box<dyn FnOnce() -> Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn suite() -> Vec<Instance> {
    (0..SUITE).map(random_instance).collect()
}

fn decider_soundness(instances: &[Instance]) -> (Outcome, Vec<EquivalenceVerdict>) {
    let start = Instant::now();
    let verdicts: Vec<EquivalenceVerdict> = instances
        .iter()
        .map(|i| star_equivalent(&i.f1, &i.f2).expect("exact input"))
        .collect();
    let failures = instances
        .iter()
        .zip(&verdicts)
        .filter(|(i, v)| verify_verdict(v, &i.f1, &i.f2).is_err())
        .count();
    let secs = start.elapsed().as_secs_f64();
    let equivalent = verdicts.iter().filter(|v| v.equivalent).count();
    let o = outcome(
        failures == 0 && secs < 5.0,
        format!(
            "{} verdicts ({equivalent} equivalent), {failures} fail verification, {secs:.2} s",
            instances.len()
        ),
    );
    (o, verdicts)
}

fn oracle_agreement(instances: &[Instance], verdicts: &[EquivalenceVerdict]) -> Outcome {
    let budget = OracleBudget::default();
    let rows: Vec<(bool, bool, bool)> = instances
        .par_iter()
        .zip(verdicts)
        .map(|(i, v)| {
            let grid = oracle_equiv(&i.o1, &i.o2, &budget);
            let (rel, report) = oracle_relation_test(&i.o1, &i.o2, budget.relation_bound);
            let binding = !report.complete || matches!(grid, OracleVerdict::NotEquivalent { truncated: true, .. });
            (v.equivalent == grid.equivalent(), v.equivalent == rel, binding)
        })
        .collect();
    let grid_bad = rows.iter().filter(|r| !r.0).count();
    let rel_bad = rows.iter().filter(|r| !r.1).count();
    let binding = rows.iter().filter(|r| r.2).count();
    outcome(
        grid_bad == 0 && rel_bad == 0 && binding == 0,
        format!(
            "phase-grid disagreements {grid_bad}, relation-test disagreements {rel_bad}, budget-bound cases {binding} (relation bound {}, grid step {})",
            budget.relation_bound,
            budget.phase_grid_step
        ),
    )
}

fn lambda0_trace() -> Outcome {
    let ws = corpus_workspace();
    let (a1, a2) = (ws.get("A1").unwrap(), ws.get("A2").unwrap());
    let start = Instant::now();
    let trace = equivalence_trace(a1, a2, 50).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let all = trace.len() == 50 && trace.iter().all(|(_, v)| v.equivalent);
    let table = SymbolTable::new();
    let basis = integral_basis_trace(&table, |j| lambda0_exponent(&table, j), 3).unwrap();
    let gens: Vec<String> = basis
        .iter()
        .map(|e| e.basis.basis[0].display(&table).to_string())
        .collect();
    let growing = basis.windows(2).all(|w| w[1].denominator > w[0].denominator);
    outcome(
        all && secs < 1.0 && growing && gens == ["3/2", "1/6", "1/30"],
        format!(
            "n ≤ 50 all equivalent: {all}, {secs:.3} s; integral basis {}",
            gens.join(" → ")
        ),
    )
}

fn truncation_pair() -> Outcome {
    let ws = corpus_workspace();
    let v = star_equivalent(ws.get("R1").unwrap(), ws.get("R2").unwrap()).unwrap();
    let out = cli::run(["apeq", "equiv", "paper.apeq", "R1", "R2"]);
    outcome(
        v.modulus_mismatch.is_some() && !v.equivalent && out.code == cli::EXIT_NEGATIVE,
        format!("modulus_mismatch at {:?}, exit code {}", v.modulus_mismatch, out.code),
    )
}

fn is_hermite(h: &IntegerMatrix) -> bool {
    let mut last: Option<usize> = None;
    let mut seen_zero = false;
    for i in 0..h.rows() {
        match h.row(i).iter().position(|x| !x.is_zero()) {
            None => seen_zero = true,
            Some(p) => {
                if seen_zero || last.is_some_and(|l| p <= l) || !h[(i, p)].is_positive() {
                    return false;
                }
                if (0..i).any(|k| h[(k, p)].is_negative() || h[(k, p)] >= h[(i, p)]) {
                    return false;
                }
                last = Some(p);
            }
        }
    }
    true
}

fn normal_forms() -> Outcome {
    let bad: usize = (0..1000u64)
        .into_par_iter()
        .filter(|&seed| {
            let mut r = rng(1_000_000 + seed);
            let (m, n) = (r.gen_range(1..=6), r.gen_range(1..=6));
            let rows: Vec<Vec<BigInt>> = (0..m)
                .map(|_| (0..n).map(|_| BigInt::from(r.gen_range(-20..=20))).collect())
                .collect();
            let a = IntegerMatrix::from_rows(rows, n).unwrap();
            let (h, t) = hnf(&a).unwrap();
            let (s, l, rr) = snf(&a).unwrap();
            let d = invariant_factors(&a);
            let chain = d.windows(2).all(|w| !w[0].is_zero() && w[1].is_multiple_of(&w[0]));
            let diagonal = (0..s.rows()).all(|i| (0..s.cols()).all(|j| i == j || s[(i, j)].is_zero()));
            let ok = t.mul(&a).unwrap() == h
                && t.det().unwrap().abs().is_one()
                && is_hermite(&h)
                && l.mul(&a).unwrap().mul(&rr).unwrap() == s
                && l.det().unwrap().abs().is_one()
                && rr.det().unwrap().abs().is_one()
                && diagonal
                && chain;
            !ok
        })
        .count();
    outcome(bad == 0, format!("1000 matrices, {bad} violations"))
}

fn winding_counts() -> Outcome {
    let budget = OracleBudget::default();
    let mut seeds = Vec::new();
    let mut seed = 0u64;
    let mut skipped = 0;
    while seeds.len() < 100 {
        seed += 1;
        let mut r = rng(2_000_000 + seed);
        let terms = random_numeric_terms(&mut r);
        let w = Complex64::new(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5));
        let t0 = r.gen_range(-50.0..50.0);
        let rect = (-1.0, 1.0, t0, t0 + 6.0);
        if boundary_margin(&terms, w, rect, 4000) < 1e-2 {
            skipped += 1;
            continue;
        }
        seeds.push((terms, w, rect));
    }
    let rows: Vec<(bool, bool, usize)> = seeds
        .par_iter()
        .map(|(terms, w, rect)| {
            let oracle = oracle_root_count(terms, *w, *rect, &budget);
            let f = SumEvaluator::from_pairs(terms.clone());
            let rep = attainment_count(&f, *w, &Rectangle::new(rect.0, rect.1, rect.2, rect.3).unwrap());
            let agree = rep.map(|r| r.count == oracle.roots.len()).unwrap_or(false);
            (agree, oracle.degenerate, oracle.roots.len())
        })
        .collect();
    let bad = rows.iter().filter(|r| !r.0).count();
    let degenerate = rows.iter().filter(|r| r.1).count();
    let roots: usize = rows.iter().map(|r| r.2).sum();
    outcome(
        bad == 0 && degenerate == 0,
        format!(
            "100 instances ({roots} roots in total), {bad} disagreements, {degenerate} flagged multiple roots, {skipped} rejected for boundary margin < 1e-2"
        ),
    )
}

fn equivalent_pairs() -> Vec<(ExponentialSum, ExponentialSum)> {
    let ws = corpus_workspace();
    let mut pairs = vec![(ws.get("E1").unwrap().clone(), ws.get("E2").unwrap().clone())];
    let mut seed = 0;
    while pairs.len() < 20 {
        let i = random_instance(3_000_000 + seed);
        seed += 1;
        if i.kind == Kind::Twisted && i.f1.len() >= 2 {
            pairs.push((i.f1, i.f2));
        }
    }
    pairs
}

fn equivalence_principle() -> Outcome {
    let pairs = equivalent_pairs();
    let spec = ComparisonSpec {
        n_samples: 10,
        seed: 0,
        tol: 1e-6,
        t_cap: 1e4,
    };
    let start = Instant::now();
    let rows: Vec<(bool, f64)> = pairs
        .iter()
        .map(|(f, g)| {
            let exact = star_equivalent(f, g).map(|v| v.equivalent).unwrap_or(false);
            let worst = substrips((-1.0, 1.0), 3)
                .into_iter()
                .map(|s| {
                    let c = value_set_compare(f, g, s, &spec);
                    c.forward.fraction.min(c.backward.fraction)
                })
                .fold(1.0, f64::min);
            (exact, worst)
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let not_exact = rows.iter().filter(|r| !r.0).count();
    let short = rows.iter().filter(|r| r.1 < 1.0).count();
    let worst = rows.iter().map(|r| r.1).fold(1.0, f64::min);
    outcome(
        not_exact == 0 && short == 0 && secs < 60.0,
        format!(
            "20 pairs × 3 substrips × 10 samples each way, {short} pairs below 1.0 (worst {worst:.2}), {secs:.1} s"
        ),
    )
}

fn mean_values() -> Outcome {
    let f = SumEvaluator::from_pairs(vec![(3.0, Complex64::new(2.0, 0.0)), (5.0, Complex64::new(0.0, 1.0))]);
    let got = recover_coefficients(&f, 0.0, &[3.0, 5.0], 200.0, default_step(200.0)).unwrap();
    let e3 = (got[0].1 - Complex64::new(2.0, 0.0)).norm();
    let e5 = (got[1].1 - Complex64::new(0.0, 1.0)).norm();
    // error envelope over one beat period 2π/Δ past T, Δ the distance to the nearest exponent
    let envelope = |lambda: f64, delta: f64, t: f64| -> f64 {
        (0..16)
            .map(|k| {
                let tt = t + k as f64 * TAU / (16.0 * delta);
                mean_value(&f, 0.0, lambda, tt, default_step(tt)).unwrap().value.norm()
            })
            .fold(0.0, f64::max)
    };
    let probes = [(4.0, 1.0), (1.0, 2.0), (6.5, 1.5)];
    let ratios: Vec<f64> = probes
        .par_iter()
        .map(|&(l, d)| envelope(l, d, 400.0) / envelope(l, d, 200.0))
        .collect();
    let ratios_ok = ratios.iter().all(|r| (0.3..=0.7).contains(r));
    let text: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    outcome(
        e3 < 0.05 && e5 < 0.05 && ratios_ok,
        format!(
            "errors {e3:.4}, {e5:.4} at T = 200; envelope ratios T→2T at probes 4, 1, 6.5: {}",
            text.join(", ")
        ),
    )
}

fn sup_deviation(p: &ExponentialSum, f: &ExponentialSum, strip: (f64, f64)) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        let sigma = strip.0 + (strip.1 - strip.0) * i as f64 / 10.0;
        for k in 0..=100 {
            let s = ComplexPoint::new(sigma, k as f64 * 0.5);
            worst = worst.max((p.evaluate(s).unwrap() - f.evaluate(s).unwrap()).norm());
        }
    }
    worst
}

fn fejer_convergence() -> Outcome {
    let ws = corpus_workspace();
    let strips = [
        ("A1", (-2.0, -1.0)),
        ("A2", (-2.0, -1.0)),
        ("E1", (-2.0, -1.0)),
        ("E2", (-2.0, -1.0)),
        ("E3", (-2.0, -1.0)),
        ("D1", (2.0, 3.0)),
        ("D2", (2.0, 3.0)),
        ("R1", (-1.0, 0.0)),
        ("R2", (-1.0, 0.0)),
    ];
    let rows: Vec<(String, bool, bool, f64)> = strips
        .par_iter()
        .map(|&(name, strip)| {
            let f = ws.get(name).unwrap();
            let mut devs = Vec::new();
            let mut weights_ok = true;
            for e in 1..=10 {
                let bf = bochner_fejer(f, &BFOrders::uniform(1 << e)).unwrap();
                weights_ok &= bf.weights.iter().all(|w| !w.is_negative() && *w <= Rational::one());
                devs.push(sup_deviation(&bf.polynomial, f, strip));
            }
            let monotone = devs.windows(2).all(|w| w[1] <= w[0]);
            (name.to_string(), monotone && weights_ok, devs[9] < 1e-3, devs[9])
        })
        .collect();
    let failing: Vec<&str> = rows.iter().filter(|r| !(r.1 && r.2)).map(|r| r.0.as_str()).collect();
    let worst = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    outcome(
        failing.is_empty(),
        format!(
            "{} corpus sums, orders 2..1024, largest final deviation {worst:.2e}, failing: {failing:?}",
            rows.len()
        ),
    )
}

fn single_exponential_period() -> Outcome {
    let f = SumEvaluator::from_pairs(vec![(1.0, Complex64::new(1.0, 0.0))]);
    let rep = almost_periods(&f, 0.01, (-1.0, 0.0), 60.0, PeriodGrid::for_max_exponent(1.0)).unwrap();
    let first = rep.periods.first().map(|p| (p.tau, p.defect));
    let near = first.is_some_and(|(t, d)| (t - TAU).abs() < 1e-6 && d <= 0.01);
    let incl = rep.inclusion_length.unwrap_or(f64::NAN);
    outcome(
        near && (incl / TAU - 1.0).abs() <= 0.1,
        format!("first τ {:?}, inclusion length {incl:.6}", first.map(|p| p.0)),
    )
}

fn main() {
    let total = Instant::now();
    let instances = suite();
    let (c1, verdicts) = decider_soundness(&instances);
    let criteria: Vec<Criterion> = vec![
        ("exact-decider soundness", Box::new(move || c1)),
        (
            "oracle agreement",
            Box::new(move || oracle_agreement(&instances, &verdicts)),
        ),
        ("lambda-0 trace", Box::new(lambda0_trace)),
        ("truncation pair not equivalent", Box::new(truncation_pair)),
        ("normal forms", Box::new(normal_forms)),
        ("winding counts", Box::new(winding_counts)),
        ("equivalence principle, forward", Box::new(equivalence_principle)),
        ("mean values", Box::new(mean_values)),
        ("Bochner-Fejer convergence", Box::new(fejer_convergence)),
        ("almost periods of e^s", Box::new(single_exponential_period)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failed += !o.pass as usize;
        println!(
            "{} {:>2}. {name}: {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of 10 criteria pass, {:.1} s",
        10 - failed,
        total.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
