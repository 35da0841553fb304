//! Brute-force reference implementations for the test suite.
//!
//! Nothing here calls into the library's linear algebra, equivalence or
//! value-set code. Exponents are plain coordinate vectors of small
//! rationals, sums are plain `(λ, a)` lists.
#![allow(dead_code)]

use num_complex::Complex64;
use num_rational::Ratio;

pub type Q = Ratio<i128>;

/// Budgets used by the oracles, echoed into results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBudget {
    pub relation_bound: i64,
    pub phase_grid_step: f64,
    pub root_seed_grid: usize,
    pub success_threshold: f64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            relation_bound: 30,
            phase_grid_step: 1e-3,
            root_seed_grid: 50,
            success_threshold: 1e-6,
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i128, b: i128) -> i128 {
    let g = {
        let (mut x, mut y) = (a.abs(), b.abs());
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x
    };
    a / g * b
}

/// Clears denominators of all coordinates by a common factor.
fn integer_rows(exps: &[Vec<Q>]) -> Vec<Vec<i128>> {
    let d = exps.iter().flatten().fold(1i128, |acc, q| lcm(acc, *q.denom()));
    exps.iter()
        .map(|e| e.iter().map(|q| (q * Q::from_integer(d)).to_integer()).collect())
        .collect()
}

/// All primitive `c` with `|c_j| ≤ bound` and `Σ c_j λ_j = 0`, up to sign
/// (first nonzero entry positive).
pub fn oracle_relations(exps: &[Vec<Q>], bound: i64) -> Vec<Vec<i64>> {
    let n = exps.len();
    assert!(n <= 4 && bound <= 60, "oracle budget exceeded");
    if n == 0 {
        return Vec::new();
    }
    let rows = integer_rows(exps);
    let dim = rows[0].len();
    // solve for the last nonzero exponent; enumerate the rest
    let p = (0..n).rev().find(|&j| rows[j].iter().any(|&x| x != 0));
    let mut out = Vec::new();
    let others: Vec<usize> = (0..n).filter(|&j| Some(j) != p).collect();
    let mut c = vec![0i64; n];
    let total = (2 * bound + 1).pow(others.len() as u32);
    for code in 0..total {
        let mut k = code;
        for &j in &others {
            c[j] = k % (2 * bound + 1) - bound;
            k /= 2 * bound + 1;
        }
        let mut acc = vec![0i128; dim];
        for &j in &others {
            for (a, x) in acc.iter_mut().zip(&rows[j]) {
                *a += c[j] as i128 * x;
            }
        }
        match p {
            None => {
                if acc.iter().all(|&a| a == 0) {
                    push_primitive(&mut out, &c);
                }
            }
            Some(p) => {
                // need c_p·row_p = −acc
                let piv = rows[p].iter().position(|&x| x != 0).unwrap();
                if (-acc[piv]) % rows[p][piv] != 0 {
                    continue;
                }
                let cp = -acc[piv] / rows[p][piv];
                if cp.abs() > bound as i128 {
                    continue;
                }
                if acc.iter().zip(&rows[p]).all(|(a, x)| a + cp * x == 0) {
                    c[p] = cp as i64;
                    push_primitive(&mut out, &c);
                }
            }
        }
    }
    out
}

fn push_primitive(out: &mut Vec<Vec<i64>>, c: &[i64]) {
    let g = c.iter().fold(0, |acc, &x| gcd(acc, x));
    if g != 1 {
        return;
    }
    let lead = c.iter().find(|&&x| x != 0).copied().unwrap_or(0);
    if lead > 0 {
        out.push(c.to_vec());
    }
}

/// Exact term of an oracle sum: exponent coordinates, modulus, phase in turns.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTerm {
    pub coords: Vec<Q>,
    pub modulus: Q,
    pub turns: Q,
}

fn frac_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Independent ℚ-basis with integral coordinates: pick independent
/// exponents greedily, express everything over them, then shrink each
/// basis element by the lcm of its column's denominators.
fn oracle_basis(exps: &[Vec<Q>]) -> Vec<Vec<i128>> {
    // row-echelon over the chosen generators, tracking combinations
    let mut chosen: Vec<usize> = Vec::new();
    let mut echelon: Vec<(Vec<Q>, Vec<Q>)> = Vec::new(); // (vector, combo over chosen)
    for (j, e) in exps.iter().enumerate() {
        let mut v = e.clone();
        let mut combo = vec![Q::from_integer(0); chosen.len()];
        for (ev, ec) in &echelon {
            let piv = ev.iter().position(|x| *x != Q::from_integer(0)).unwrap();
            if v[piv] != Q::from_integer(0) {
                let f = v[piv] / ev[piv];
                for (a, b) in v.iter_mut().zip(ev) {
                    *a -= f * b;
                }
                for (k, c) in ec.iter().enumerate() {
                    combo[k] += f * c;
                }
            }
        }
        if v.iter().any(|x| *x != Q::from_integer(0)) {
            // new generator: combo of the echelon row is "v = e − combo·chosen"
            let mut ec: Vec<Q> = combo.iter().map(|c| -c).collect();
            ec.push(Q::from_integer(1));
            for (_, old) in echelon.iter_mut() {
                old.push(Q::from_integer(0));
            }
            echelon.push((v, ec));
            chosen.push(j);
        }
    }
    // coordinates of each exponent over the chosen generators
    let k = chosen.len();
    let mut coords: Vec<Vec<Q>> = Vec::with_capacity(exps.len());
    for e in exps {
        let mut v = e.clone();
        let mut y = vec![Q::from_integer(0); k];
        for (ev, ec) in &echelon {
            let piv = ev.iter().position(|x| *x != Q::from_integer(0)).unwrap();
            if v[piv] != Q::from_integer(0) {
                let f = v[piv] / ev[piv];
                for (a, b) in v.iter_mut().zip(ev) {
                    *a -= f * b;
                }
                for (t, c) in ec.iter().enumerate() {
                    y[t] += f * c;
                }
            }
        }
        assert!(v.iter().all(|x| *x == Q::from_integer(0)));
        coords.push(y);
    }
    let scale: Vec<i128> = (0..k)
        .map(|t| coords.iter().fold(1i128, |acc, r| lcm(acc, *r[t].denom())))
        .collect();
    coords
        .iter()
        .map(|r| {
            r.iter()
                .zip(&scale)
                .map(|(x, s)| (x * Q::from_integer(*s)).to_integer())
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleVerdict {
    Equivalent {
        turns: Vec<f64>,
        residual: f64,
    },
    ModulusMismatch(usize),
    /// `truncated` is set when the zoom dropped candidate cells, so the
    /// negative is not a proof.
    NotEquivalent {
        best: f64,
        truncated: bool,
    },
}

impl OracleVerdict {
    pub fn equivalent(&self) -> bool {
        matches!(self, OracleVerdict::Equivalent { .. })
    }
}

/// Exponent coordinates with `(modulus, turns)` from each side.
type Aligned = (Vec<Q>, (Q, Q), (Q, Q));

fn aligned(f1: &[OracleTerm], f2: &[OracleTerm]) -> Vec<Aligned> {
    let zero = (Q::from_integer(0), Q::from_integer(0));
    let mut out: Vec<Aligned> = f1
        .iter()
        .map(|t| (t.coords.clone(), (t.modulus, t.turns), zero))
        .collect();
    for t in f2 {
        match out.iter_mut().find(|x| x.0 == t.coords) {
            Some(x) => x.2 = (t.modulus, t.turns),
            None => out.push((t.coords.clone(), zero, (t.modulus, t.turns))),
        }
    }
    out
}

/// Phase-grid search for a ℚ-linear ψ with `b_j = a_j e^{2πiψ(λ_j)}`.
///
/// Branch and bound on `[0,1)^k`: a cell of half-width `h` is kept while
/// the objective at its centre is within `L·k·h` of the success threshold
/// (`L` bounds the objective's slope), and split until the grid step is
/// reached; below that, only the best cells are zoomed further.
pub fn oracle_equiv(f1: &[OracleTerm], f2: &[OracleTerm], budget: &OracleBudget) -> OracleVerdict {
    let al = aligned(f1, f2);
    for (j, (_, a, b)) in al.iter().enumerate() {
        if a.0 != b.0 {
            return OracleVerdict::ModulusMismatch(j);
        }
    }
    let live: Vec<&Aligned> = al.iter().filter(|x| x.1 .0 != Q::from_integer(0)).collect();
    if live.is_empty() {
        return OracleVerdict::Equivalent {
            turns: Vec::new(),
            residual: 0.0,
        };
    }
    let exps: Vec<Vec<Q>> = live.iter().map(|x| x.0.clone()).collect();
    let to_f = |x: &Q| *x.numer() as f64 / *x.denom() as f64;
    let q: Vec<f64> = live.iter().map(|x| to_f(&(x.2 .1 - x.1 .1))).collect();
    let m: Vec<f64> = live.iter().map(|x| to_f(&x.1 .0)).collect();
    let r = oracle_basis(&exps);
    let k = r[0].len();
    // max_j |b_j − a_j e^{2πi(Ry)_j}| = max_j |a_j|·|e^{2πi q_j} − e^{2πi(Ry)_j}|
    let objective = |y: &[f64]| -> f64 {
        r.iter()
            .zip(&q)
            .zip(&m)
            .map(|((row, qj), mj)| {
                let ry: f64 = row.iter().zip(y).map(|(a, b)| *a as f64 * b).sum();
                mj * 2.0 * (std::f64::consts::PI * frac_dist(ry - qj)).sin()
            })
            .fold(0.0, f64::max)
    };
    if k == 0 {
        let v = objective(&[]);
        return if v <= budget.success_threshold {
            OracleVerdict::Equivalent {
                turns: Vec::new(),
                residual: v,
            }
        } else {
            OracleVerdict::NotEquivalent {
                best: v,
                truncated: false,
            }
        };
    }
    // |e^{ix} − e^{iy}| ≤ |x − y|, so moving y by h in sup norm moves term j by ≤ 2π|a_j|Σ_k|r_jk|·h
    let slope = r
        .iter()
        .zip(&m)
        .map(|(row, mj)| 2.0 * std::f64::consts::PI * mj * row.iter().map(|a| a.abs() as f64).sum::<f64>())
        .fold(0.0, f64::max);
    let origin = objective(&vec![0.0; k]);
    if origin <= budget.success_threshold {
        return OracleVerdict::Equivalent {
            turns: vec![0.0; k],
            residual: origin,
        };
    }
    let mut truncated = false;
    let mut cells: Vec<Vec<f64>> = vec![vec![0.5; k]];
    let mut half = 0.5;
    let mut best = f64::INFINITY;
    for _ in 0..60 {
        let mut next = Vec::new();
        for c in &cells {
            let v = objective(c);
            best = best.min(v);
            if v <= budget.success_threshold {
                return OracleVerdict::Equivalent {
                    turns: c.clone(),
                    residual: v,
                };
            }
            if v <= slope * half + budget.success_threshold {
                next.push(c.clone());
            }
        }
        if next.is_empty() {
            return OracleVerdict::NotEquivalent { best, truncated };
        }
        // zoom: below the grid step keep only the best few cells
        if half < budget.phase_grid_step {
            next.sort_by(|a, b| objective(a).total_cmp(&objective(b)));
            truncated |= next.len() > 4096;
            next.truncate(4096);
        }
        half /= 2.0;
        cells = next
            .iter()
            .flat_map(|c| {
                (0..1usize << k).map(move |mask| {
                    c.iter()
                        .enumerate()
                        .map(|(i, x)| if mask >> i & 1 == 1 { x + half } else { x - half })
                        .collect::<Vec<f64>>()
                })
            })
            .collect();
    }
    panic!("oracle_equiv did not resolve within its zoom depth");
}

fn det(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| *x).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det(&minor)
            })
            .sum(),
    }
}

fn gcd128(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd128(b, a % b)
    }
}

/// Enumerated relations together with a check that they generate the
/// whole relation lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationReport {
    pub bound: i64,
    pub relations: Vec<Vec<i64>>,
    /// `n − dim span`.
    pub rank: usize,
    /// The enumerated vectors have rank `rank` and the gcd of their
    /// maximal minors is 1, so they span the saturated lattice. When false
    /// the bound, not the input, limited the answer.
    pub complete: bool,
}

pub fn oracle_relation_lattice(exps: &[Vec<Q>], bound: i64) -> RelationReport {
    let relations = oracle_relations(exps, bound);
    let rank = exps.len() - oracle_basis(exps).first().map_or(0, Vec::len);
    let n = exps.len();
    let mut g = 0i128;
    if rank == 0 {
        g = 1;
    } else {
        let mut sorted = relations.clone();
        sorted.sort_by_key(|c| c.iter().map(|x| x.abs()).sum::<i64>());
        let vs: Vec<Vec<i128>> = sorted.iter().map(|c| c.iter().map(|&x| x as i128).collect()).collect();
        // gcd over (rank-subset of vectors) × (rank-subset of columns) minors
        let col_sets = subsets(n, rank);
        'outer: for rows in subsets(vs.len().min(40), rank) {
            for cols in &col_sets {
                let m: Vec<Vec<i128>> = rows.iter().map(|&r| cols.iter().map(|&c| vs[r][c]).collect()).collect();
                g = gcd128(g, det(&m));
                if g == 1 {
                    break 'outer;
                }
            }
        }
    }
    RelationReport {
        bound,
        relations,
        rank,
        complete: g == 1,
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Equivalence via relations: no modulus mismatch and every enumerated
/// relation has integral phase sum. The report says whether the
/// enumeration covered the whole lattice.
pub fn oracle_relation_test(f1: &[OracleTerm], f2: &[OracleTerm], bound: i64) -> (bool, RelationReport) {
    let al = aligned(f1, f2);
    let live: Vec<_> = al.iter().filter(|x| x.1 .0 != Q::from_integer(0)).collect();
    let exps: Vec<Vec<Q>> = live.iter().map(|x| x.0.clone()).collect();
    let report = if exps.is_empty() {
        RelationReport {
            bound,
            relations: Vec::new(),
            rank: 0,
            complete: true,
        }
    } else {
        oracle_relation_lattice(&exps, bound)
    };
    if al.iter().any(|(_, a, b)| a.0 != b.0) {
        return (false, report);
    }
    let q: Vec<Q> = live.iter().map(|x| x.2 .1 - x.1 .1).collect();
    let ok = report.relations.iter().all(|c| {
        let s: Q = c.iter().zip(&q).map(|(ci, qi)| Q::from_integer(*ci as i128) * qi).sum();
        s.is_integer()
    });
    (ok, report)
}

/// Roots of `f − w` inside a rectangle found by Newton from a dense seed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCount {
    pub roots: Vec<Complex64>,
    /// Some root had `|f'| < 1e-8`, so multiplicity may be miscounted.
    pub degenerate: bool,
}

pub fn eval(terms: &[(f64, Complex64)], s: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &(l, a) in terms {
        let e = a * (s * l).exp();
        v += e;
        d += e * l;
    }
    (v, d)
}

pub fn oracle_root_count(
    terms: &[(f64, Complex64)],
    w: Complex64,
    rect: (f64, f64, f64, f64),
    budget: &OracleBudget,
) -> RootCount {
    let (s0, s1, t0, t1) = rect;
    let n = budget.root_seed_grid;
    let mut roots: Vec<Complex64> = Vec::new();
    let mut degenerate = false;
    for a in 0..n {
        for b in 0..n {
            let mut z = Complex64::new(
                s0 + (s1 - s0) * (a as f64 + 0.5) / n as f64,
                t0 + (t1 - t0) * (b as f64 + 0.5) / n as f64,
            );
            let mut ok = false;
            for _ in 0..100 {
                let (v, d) = eval(terms, z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = (v - w) / d;
                z -= step;
                if !z.is_finite() || z.re.abs() > 1e3 {
                    break;
                }
                if step.norm() < 1e-14 * (1.0 + z.norm()) {
                    ok = (eval(terms, z).0 - w).norm() < 1e-9 * (1.0 + w.norm());
                    break;
                }
            }
            let inside = z.re > s0 && z.re < s1 && z.im > t0 && z.im < t1;
            if ok && inside && roots.iter().all(|r| (r - z).norm() > 1e-8) {
                if eval(terms, z).1.norm() < 1e-8 {
                    degenerate = true;
                }
                roots.push(z);
            }
        }
    }
    RootCount { roots, degenerate }
}

/// Minimum of `|f − w|` on a dense boundary sample.
pub fn boundary_margin(terms: &[(f64, Complex64)], w: Complex64, rect: (f64, f64, f64, f64), per_edge: usize) -> f64 {
    let (s0, s1, t0, t1) = rect;
    let c = [
        Complex64::new(s0, t0),
        Complex64::new(s1, t0),
        Complex64::new(s1, t1),
        Complex64::new(s0, t1),
    ];
    let mut m = f64::INFINITY;
    for e in 0..4 {
        for i in 0..per_edge {
            let z = c[e] + (c[(e + 1) % 4] - c[e]) * (i as f64 / per_edge as f64);
            m = m.min((eval(terms, z).0 - w).norm());
        }
    }
    m
}

/// Closed-form bound on the window mean of a single off-resonant term:
/// `|(1/2T)∫ a e^{iΔt} dt| ≤ |a|/(|Δ|T)`.
pub fn cross_term_bound(modulus: f64, delta: f64, t_half: f64) -> f64 {
    modulus / (delta.abs() * t_half)
}
