//! Value sets of exponential sums on vertical substrips.
//!
//! Whether `f` attains `w` inside a rectangle is decided by the argument
//! principle: the winding number of `f(∂R) − w` counts the solutions of
//! `f(s) = w` inside `R`. Roots are then located by Newton iteration.
//! Over a whole substrip attainment is only semi-decidable, so a search
//! that runs out of window reports the value as unresolved, never as
//! missing.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::equivalence::star_equivalent;
use crate::json::complex_pair;
use crate::sums::{CoefficientMode, ComplexPoint, Evaluator, ExponentialSum, SumEvaluator};

pub const BOUNDARY_GUARD: f64 = 1e-9;
pub const NEWTON_TOL: f64 = 1e-12;
pub const DEDUP_RADIUS: f64 = 1e-8;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const SLAB_HEIGHT: f64 = 8.0;
pub const SAMPLE_T_RANGE: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValueSetError {
    #[error(
        "f − w comes within {margin:.3e} of zero on the boundary; shift the rectangle by about {suggested_offset:.3e}"
    )]
    BoundaryTooClose { margin: f64, suggested_offset: f64 },
    #[error("function is constant on the rectangle")]
    Constant,
    #[error("invalid rectangle: need sigma_lo < sigma_hi and t_lo < t_hi")]
    BadRectangle,
    #[error("argument tracking failed to resolve the boundary")]
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectangle {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Rectangle {
    pub fn new(sigma_lo: f64, sigma_hi: f64, t_lo: f64, t_hi: f64) -> Result<Self, ValueSetError> {
        if !(sigma_lo < sigma_hi && t_lo < t_hi) || ![sigma_lo, sigma_hi, t_lo, t_hi].iter().all(|x| x.is_finite()) {
            return Err(ValueSetError::BadRectangle);
        }
        Ok(Rectangle {
            sigma_lo,
            sigma_hi,
            t_lo,
            t_hi,
        })
    }

    pub fn contains(&self, s: Complex64) -> bool {
        (self.sigma_lo..=self.sigma_hi).contains(&s.re) && (self.t_lo..=self.t_hi).contains(&s.im)
    }

    pub fn shifted(&self, tau: f64) -> Self {
        Rectangle {
            t_lo: self.t_lo + tau,
            t_hi: self.t_hi + tau,
            ..*self
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.sigma_lo, self.t_lo),
            Complex64::new(self.sigma_hi, self.t_lo),
            Complex64::new(self.sigma_hi, self.t_hi),
            Complex64::new(self.sigma_lo, self.t_hi),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttainmentReport {
    #[serde(serialize_with = "complex_pair")]
    pub target: Complex64,
    pub rectangle: Rectangle,
    /// Solutions of `f(s) = w` inside, with multiplicity.
    pub count: usize,
    pub boundary_margin: f64,
    pub roots: Vec<ComplexPoint>,
    pub boundary_samples: usize,
}

/// Winding number of `f − w` along the rectangle boundary, with adaptive
/// refinement until every argument increment is below π/2.
fn winding(f: &SumEvaluator, w: Complex64, rect: &Rectangle) -> Result<(i64, f64, usize), ValueSetError> {
    let lam = f.max_abs_exponent().max(1e-3);
    let corners = rect.corners();
    let mut total = 0.0;
    let mut margin = f64::INFINITY;
    let mut samples = 0usize;
    let offset = 1e-3 * (rect.sigma_hi - rect.sigma_lo).min(rect.t_hi - rect.t_lo);
    let too_close = |margin: f64| ValueSetError::BoundaryTooClose {
        margin,
        suggested_offset: offset,
    };
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let len = (b - a).norm();
        let n0 = ((len * lam * 2.0).ceil() as usize).max(16);
        let at = |u: f64| a + (b - a) * u;
        let mut prev_u = 0.0;
        let mut prev_g = f.eval(at(0.0)) - w;
        margin = margin.min(prev_g.norm());
        samples += 1;
        for i in 1..=n0 {
            let u1 = i as f64 / n0 as f64;
            // explicit stack of pending right endpoints
            let mut stack = vec![(u1, f.eval(at(u1)) - w, 0u32)];
            samples += 1;
            while let Some(&(u, g, depth)) = stack.last() {
                if prev_g.norm() < BOUNDARY_GUARD || g.norm() < BOUNDARY_GUARD {
                    return Err(too_close(prev_g.norm().min(g.norm())));
                }
                let d = (g / prev_g).arg();
                if d.abs() < FRAC_PI_2 {
                    total += d;
                    margin = margin.min(g.norm());
                    prev_u = u;
                    prev_g = g;
                    stack.pop();
                } else {
                    if depth > 48 {
                        return Err(too_close(margin.min(g.norm())));
                    }
                    let um = 0.5 * (prev_u + u);
                    let gm = f.eval(at(um)) - w;
                    samples += 1;
                    stack.push((um, gm, depth + 1));
                }
            }
        }
    }
    if margin < BOUNDARY_GUARD {
        return Err(too_close(margin));
    }
    let turns = total / TAU;
    let count = turns.round();
    if (turns - count).abs() > 0.25 {
        return Err(ValueSetError::Unresolved);
    }
    Ok((count as i64, margin, samples))
}

fn newton(f: &SumEvaluator, w: Complex64, mut z: Complex64, rect: &Rectangle) -> Option<Complex64> {
    let span = (rect.sigma_hi - rect.sigma_lo).max(rect.t_hi - rect.t_lo);
    for _ in 0..80 {
        let (v, d) = f.eval_with_derivative(z);
        let g = v - w;
        if d.norm() == 0.0 || !g.is_finite() {
            return None;
        }
        let step = g / d;
        z -= step;
        if !z.is_finite() || (z.re - rect.sigma_lo).abs() > 2.0 * span + 10.0 {
            return None;
        }
        if step.norm() <= NEWTON_TOL * (1.0 + z.norm()) {
            let r = (f.eval(z) - w).norm();
            let scale = 1.0 + w.norm();
            return (r <= 1e-9 * scale).then_some(z);
        }
    }
    None
}

fn locate_roots(f: &SumEvaluator, w: Complex64, rect: &Rectangle, count: usize) -> Vec<ComplexPoint> {
    let lam = f.max_abs_exponent().max(1e-3);
    let width = rect.sigma_hi - rect.sigma_lo;
    let height = rect.t_hi - rect.t_lo;
    let mut roots: Vec<Complex64> = Vec::new();
    let mut density = 1.0;
    for _ in 0..4 {
        let spacing = (0.5 / lam) / density;
        let ns = ((width / spacing).ceil() as usize).clamp(2, 64);
        let nt = ((height / spacing).ceil() as usize).clamp(2, 256);
        for a in 0..ns {
            for b in 0..nt {
                let seed = Complex64::new(
                    rect.sigma_lo + width * (a as f64 + 0.5) / ns as f64,
                    rect.t_lo + height * (b as f64 + 0.5) / nt as f64,
                );
                if let Some(z) = newton(f, w, seed, rect) {
                    if rect.contains(z) && roots.iter().all(|r| (r - z).norm() > DEDUP_RADIUS) {
                        roots.push(z);
                    }
                }
            }
            if roots.len() >= count {
                break;
            }
        }
        if roots.len() >= count {
            break;
        }
        density *= 2.0;
    }
    roots.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    roots.truncate(count);
    roots.into_iter().map(ComplexPoint::from).collect()
}

/// Counts solutions of `f(s) = w` inside `rect` and locates them.
pub fn attainment_count(f: &SumEvaluator, w: Complex64, rect: &Rectangle) -> Result<AttainmentReport, ValueSetError> {
    if f.is_constant() {
        return Err(ValueSetError::Constant);
    }
    let (count, margin, samples) = winding(f, w, rect)?;
    if count < 0 {
        return Err(ValueSetError::Unresolved);
    }
    let count = count as usize;
    let roots = if count > 0 {
        locate_roots(f, w, rect, count)
    } else {
        Vec::new()
    };
    Ok(AttainmentReport {
        target: w,
        rectangle: *rect,
        count,
        boundary_margin: margin,
        roots,
        boundary_samples: samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttainOutcome {
    pub found: Option<ComplexPoint>,
    /// `|f(s) − w|` at the found point, or the smallest value seen.
    pub residual: f64,
    /// Half-height of the explored window `t ∈ [−T, T]`.
    pub explored_t: f64,
}

fn slab_report(f: &SumEvaluator, w: Complex64, rect: Rectangle) -> Option<AttainmentReport> {
    let mut r = rect;
    for attempt in 0..4 {
        match attainment_count(f, w, &r) {
            Ok(rep) => return Some(rep),
            Err(ValueSetError::BoundaryTooClose { suggested_offset, .. }) => {
                let k = [1.0, -1.7, 2.3, -3.1][attempt];
                let d = suggested_offset * k;
                let ds = d.abs().min(0.01 * (rect.sigma_hi - rect.sigma_lo));
                r = Rectangle {
                    sigma_lo: rect.sigma_lo + ds,
                    sigma_hi: rect.sigma_hi - ds,
                    t_lo: rect.t_lo + d,
                    t_hi: rect.t_hi + d,
                };
            }
            Err(_) => return None,
        }
    }
    None
}

/// Expanding-window search for `s` with `Re s` in `sigma` and `|f(s) − w| ≤ tol`.
pub fn attains(f: &SumEvaluator, w: Complex64, sigma: (f64, f64), t_cap: f64, tol: f64) -> AttainOutcome {
    let mut best = f64::INFINITY;
    let mut explored = 0.0;
    let mut t_half = 16.0f64.min(t_cap);
    loop {
        // new slabs, nearest to the real axis first
        let mut lo = explored;
        while lo < t_half {
            let hi = (lo + SLAB_HEIGHT).min(t_half);
            for (a, b) in [(lo, hi), (-hi, -lo)] {
                let Ok(rect) = Rectangle::new(sigma.0, sigma.1, a, b) else {
                    continue;
                };
                let Some(rep) = slab_report(f, w, rect) else { continue };
                best = best.min(rep.boundary_margin);
                for r in &rep.roots {
                    let res = (f.eval(r.to_complex()) - w).norm();
                    best = best.min(res);
                    if res <= tol {
                        return AttainOutcome {
                            found: Some(*r),
                            residual: res,
                            explored_t: t_half,
                        };
                    }
                }
            }
            lo = hi;
        }
        explored = t_half;
        if t_half >= t_cap {
            break;
        }
        t_half = (2.0 * t_half).min(t_cap);
    }
    AttainOutcome {
        found: None,
        residual: best,
        explored_t: explored,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleOutcome {
    /// Point where the value was taken.
    pub source: ComplexPoint,
    #[serde(serialize_with = "complex_pair")]
    pub value: Complex64,
    pub outcome: AttainOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionSummary {
    /// Which sum's values are searched for, in which sum.
    pub values_of: String,
    pub searched_in: String,
    pub samples: Vec<SampleOutcome>,
    pub fraction: f64,
    /// Sample with the largest residual.
    pub worst: Option<SampleOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueSetComparison {
    pub substrip: (f64, f64),
    pub n_samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub t_cap: f64,
    pub forward: DirectionSummary,
    pub backward: DirectionSummary,
}

impl ValueSetComparison {
    pub fn all_attained(&self) -> bool {
        self.forward.fraction == 1.0 && self.backward.fraction == 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonSpec {
    pub n_samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub t_cap: f64,
}

impl Default for ComparisonSpec {
    fn default() -> Self {
        ComparisonSpec {
            n_samples: 10,
            seed: 0,
            tol: DEFAULT_TOL,
            t_cap: 1e4,
        }
    }
}

fn direction(
    src: &ExponentialSum,
    dst: &ExponentialSum,
    points: &[ComplexPoint],
    substrip: (f64, f64),
    spec: &ComparisonSpec,
) -> DirectionSummary {
    let fs = src.evaluator();
    let fd = dst.evaluator();
    let samples: Vec<SampleOutcome> = points
        .par_iter()
        .map(|&p| {
            let value = fs.eval(p.to_complex());
            SampleOutcome {
                source: p,
                value,
                outcome: attains(&fd, value, substrip, spec.t_cap, spec.tol),
            }
        })
        .collect();
    let hits = samples.iter().filter(|s| s.outcome.found.is_some()).count();
    let worst = samples
        .iter()
        .copied()
        .max_by(|a, b| a.outcome.residual.total_cmp(&b.outcome.residual));
    DirectionSummary {
        values_of: src.name().to_string(),
        searched_in: dst.name().to_string(),
        fraction: if samples.is_empty() {
            1.0
        } else {
            hits as f64 / samples.len() as f64
        },
        samples,
        worst,
    }
}

/// Samples values of each sum on the substrip and searches for them in
/// the other sum on the same substrip.
pub fn value_set_compare(
    f1: &ExponentialSum,
    f2: &ExponentialSum,
    substrip: (f64, f64),
    spec: &ComparisonSpec,
) -> ValueSetComparison {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw = |n: usize| -> Vec<ComplexPoint> {
        (0..n)
            .map(|_| {
                ComplexPoint::new(
                    rng.gen_range(substrip.0..substrip.1),
                    rng.gen_range(-SAMPLE_T_RANGE..=SAMPLE_T_RANGE),
                )
            })
            .collect()
    };
    let pts_forward = draw(spec.n_samples);
    let pts_backward = draw(spec.n_samples);
    ValueSetComparison {
        substrip,
        n_samples: spec.n_samples,
        seed: spec.seed,
        tol: spec.tol,
        t_cap: spec.t_cap,
        // values of f2 searched in f1, then values of f1 searched in f2
        forward: direction(f2, f1, &pts_forward, substrip, spec),
        backward: direction(f1, f2, &pts_backward, substrip, spec),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub strip: (f64, f64),
    pub comparisons: Vec<ValueSetComparison>,
    /// All fractions equal one on every substrip.
    pub consistent_with_equivalence: bool,
    /// Exact verdict when both sums have exact coefficients.
    pub exact_equivalent: Option<bool>,
    pub agrees_with_exact: Option<bool>,
}

/// Overlapping partition of `[a, b]` into `n` substrips.
pub fn substrips(strip: (f64, f64), n: usize) -> Vec<(f64, f64)> {
    let n = n.max(1);
    let w = (strip.1 - strip.0) / n as f64;
    (0..n)
        .map(|k| {
            let lo = strip.0 + k as f64 * w - 0.25 * w;
            let hi = strip.0 + (k + 1) as f64 * w + 0.25 * w;
            (lo.max(strip.0), hi.min(strip.1))
        })
        .collect()
}

pub fn equivalence_principle_experiment(
    f1: &ExponentialSum,
    f2: &ExponentialSum,
    strip: (f64, f64),
    n_substrips: usize,
    spec: &ComparisonSpec,
) -> ExperimentReport {
    let comparisons: Vec<ValueSetComparison> = substrips(strip, n_substrips)
        .into_iter()
        .enumerate()
        .map(|(k, sub)| {
            let spec_k = ComparisonSpec {
                seed: spec.seed.wrapping_add(k as u64),
                ..*spec
            };
            value_set_compare(f1, f2, sub, &spec_k)
        })
        .collect();
    let consistent = comparisons.iter().all(ValueSetComparison::all_attained);
    let exact_equivalent = (f1.mode() == CoefficientMode::Exact && f2.mode() == CoefficientMode::Exact)
        .then(|| star_equivalent(f1, f2).ok().map(|v| v.equivalent))
        .flatten();
    ExperimentReport {
        strip,
        comparisons,
        consistent_with_equivalence: consistent,
        agrees_with_exact: exact_equivalent.map(|e| e == consistent),
        exact_equivalent,
    }
}
