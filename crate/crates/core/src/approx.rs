//! Constructive approximation: Bochner–Fejér polynomials, mean values and
//! coefficient recovery, and a scan for ε-almost periods.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exactlin::Rational;
use crate::exponents::{integral_basis, IntegralBasis};
use crate::sums::{Coefficient, Evaluator, ExponentialSum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("expected {expected} orders (one per basis element) or a single order, got {found}")]
    OrderCount { expected: usize, found: usize },
    #[error("orders must be positive")]
    ZeroOrder,
    #[error("quadrature needs T > 0, step > 0 and step <= T/100 (T = {t_half}, step = {step})")]
    Quadrature { t_half: f64, step: f64 },
    #[error("candidate frequencies must be separated: min gap {gap}, requires T >= {needed}")]
    Separation { gap: f64, needed: f64 },
    #[error("invalid almost-period search: {0}")]
    Search(String),
}

/// Fejér orders, one per integral-basis element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BFOrders(pub Vec<u64>);

impl BFOrders {
    pub fn uniform(n: u64) -> Self {
        BFOrders(vec![n])
    }
}

#[derive(Debug, Clone)]
pub struct BFPolynomial {
    pub basis: IntegralBasis,
    /// Fejér order actually applied per basis element, in lattice units.
    pub lattice_orders: Vec<BigInt>,
    /// Weight per term of the base sum, in declaration order.
    pub weights: Vec<Rational>,
    /// `Σ p_j a_j e^{λ_j s}`, zero-weight terms dropped.
    pub polynomial: ExponentialSum,
}

/// Bochner–Fejér polynomial of a finite sum.
///
/// Each exponent has integer coordinates `m_{j,i}` over the integral basis
/// `h_i`. Orders are counted in symbol units: if `h_i` needs denominator
/// `d_i` to become an integer combination of the symbols, the Fejér kernel
/// on the `h_i`-lattice gets order `N_i·d_i`. The weight is
/// `p_j = Π_i max(0, 1 − |m_{j,i}| / (N_i·d_i))`.
pub fn bochner_fejer(sum: &ExponentialSum, orders: &BFOrders) -> Result<BFPolynomial, ApproxError> {
    if orders.0.contains(&0) {
        return Err(ApproxError::ZeroOrder);
    }
    if sum.is_empty() {
        return Ok(BFPolynomial {
            basis: IntegralBasis {
                basis: Vec::new(),
                representation: crate::exactlin::IntegerMatrix::zeros(0, 0),
            },
            lattice_orders: Vec::new(),
            weights: Vec::new(),
            polynomial: sum.clone(),
        });
    }
    let basis = integral_basis(sum.table(), &sum.exponents()).expect("sum exponents are distinct");
    let k = basis.basis.len();
    let per_element: Vec<u64> = match orders.0.len() {
        1 => vec![orders.0[0]; k],
        n if n == k => orders.0.clone(),
        n => return Err(ApproxError::OrderCount { expected: k, found: n }),
    };
    let lattice_orders: Vec<BigInt> = basis
        .basis
        .iter()
        .zip(&per_element)
        .map(|(h, &n)| {
            let d = h.coords().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            d * BigInt::from(n)
        })
        .collect();
    let weights: Vec<Rational> = (0..sum.len())
        .map(|j| {
            basis
                .representation
                .row(j)
                .iter()
                .zip(&lattice_orders)
                .fold(Rational::one(), |acc, (m, big_n)| {
                    if m.abs() >= *big_n {
                        Rational::zero()
                    } else {
                        acc * (Rational::one() - Rational::new(m.abs(), big_n.clone()))
                    }
                })
        })
        .collect();
    let polynomial = sum.map_coefficients(|j, t| match &t.coefficient {
        Coefficient::Exact(c) => Coefficient::Exact(c.scale(&weights[j])),
        Coefficient::Numeric(z) => Coefficient::Numeric(z * weights[j].to_f64().unwrap_or(0.0)),
    });
    Ok(BFPolynomial {
        basis,
        lattice_orders,
        weights,
        polynomial,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanValueEstimate {
    pub lambda: f64,
    pub sigma: f64,
    pub t_half: f64,
    pub step: f64,
    #[serde(serialize_with = "crate::json::complex_pair")]
    pub value: Complex64,
}

/// Default quadrature step for a window half-length.
pub fn default_step(t_half: f64) -> f64 {
    t_half / 1e5
}

/// Composite trapezoidal estimate of `(1/2T) ∫_{−T}^{T} f(σ+it) e^{−iλt} dt`.
pub fn mean_value<F: Evaluator + ?Sized>(
    f: &F,
    sigma: f64,
    lambda: f64,
    t_half: f64,
    step: f64,
) -> Result<MeanValueEstimate, ApproxError> {
    if !(t_half > 0.0 && step > 0.0 && step <= t_half / 100.0) {
        return Err(ApproxError::Quadrature { t_half, step });
    }
    let n = (2.0 * t_half / step).ceil() as usize;
    let h = 2.0 * t_half / n as f64;
    let g = |i: usize| {
        let t = -t_half + i as f64 * h;
        let (s, c) = (-lambda * t).sin_cos();
        f.eval(Complex64::new(sigma, t)) * Complex64::new(c, s)
    };
    const CHUNK: usize = 4096;
    let partial: Vec<Complex64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK + 1;
            let hi = ((c + 1) * CHUNK).min(n - 1);
            (lo..=hi).map(g).sum()
        })
        .collect();
    let interior: Complex64 = partial.into_iter().sum();
    let integral = h * (interior + 0.5 * (g(0) + g(n)));
    Ok(MeanValueEstimate {
        lambda,
        sigma,
        t_half,
        step,
        value: integral / (2.0 * t_half),
    })
}

/// Estimated Dirichlet coefficients `a(λ)` at each candidate frequency.
pub fn recover_coefficients<F: Evaluator + ?Sized>(
    f: &F,
    sigma: f64,
    candidates: &[f64],
    t_half: f64,
    step: f64,
) -> Result<Vec<(f64, Complex64)>, ApproxError> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if sorted.len() > 1 && !(gap > 0.0 && t_half >= 100.0 / gap) {
        return Err(ApproxError::Separation {
            gap,
            needed: 100.0 / gap,
        });
    }
    candidates
        .iter()
        .map(|&lambda| {
            let m = mean_value(f, sigma, lambda, t_half, step)?;
            Ok((lambda, m.value / (lambda * sigma).exp()))
        })
        .collect()
}

/// Sampling parameters of the almost-period scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodGrid {
    pub n_sigma: usize,
    pub n_t: usize,
    /// The `t` samples cover `[0, t_span]`.
    pub t_span: f64,
    pub tau_step: f64,
}

impl PeriodGrid {
    /// 11 × 101 sample grid, τ step `2π / (100·λ_max)`.
    pub fn for_max_exponent(lambda_max: f64) -> Self {
        let lam = if lambda_max > 0.0 { lambda_max } else { 1.0 };
        PeriodGrid {
            n_sigma: 11,
            n_t: 101,
            t_span: TAU,
            tau_step: TAU / (100.0 * lam),
        }
    }

    /// Same ranges, twice as many samples in each direction.
    pub fn refined(&self) -> Self {
        PeriodGrid {
            n_sigma: 2 * self.n_sigma - 1,
            n_t: 2 * self.n_t - 1,
            ..*self
        }
    }

    fn points(&self, strip: (f64, f64)) -> Vec<Complex64> {
        let lin = |lo: f64, hi: f64, n: usize, i: usize| {
            if n <= 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.n_sigma * self.n_t);
        for a in 0..self.n_sigma {
            for b in 0..self.n_t {
                out.push(Complex64::new(
                    lin(strip.0, strip.1, self.n_sigma, a),
                    lin(0.0, self.t_span, self.n_t, b),
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlmostPeriod {
    pub tau: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlmostPeriodReport {
    pub epsilon: f64,
    pub strip: (f64, f64),
    pub t_max: f64,
    pub grid: PeriodGrid,
    pub periods: Vec<AlmostPeriod>,
    /// Smallest `l` such that every length-`l` window of `[0, t_max]`
    /// contains a reported τ; absent when nothing qualified.
    pub inclusion_length: Option<f64>,
    /// Set when no τ qualified (the range was too short for this ε).
    pub empty: bool,
}

/// `max |f(s+iτ) − f(s)|` over the sample grid of the strip.
pub fn defect<F: Evaluator + ?Sized>(f: &F, tau: f64, strip: (f64, f64), grid: &PeriodGrid) -> f64 {
    let pts = grid.points(strip);
    let base: Vec<Complex64> = pts.iter().map(|&s| f.eval(s)).collect();
    defect_against(f, tau, &pts, &base)
}

fn defect_against<F: Evaluator + ?Sized>(f: &F, tau: f64, pts: &[Complex64], base: &[Complex64]) -> f64 {
    let shift = Complex64::new(0.0, tau);
    pts.iter()
        .zip(base)
        .map(|(&s, &v)| (f.eval(s + shift) - v).norm())
        .fold(0.0, f64::max)
}

/// Scans `τ ∈ (0, t_max]` for local minima of the defect and keeps those
/// whose refined defect is at most ε.
pub fn almost_periods<F: Evaluator + ?Sized>(
    f: &F,
    epsilon: f64,
    strip: (f64, f64),
    t_max: f64,
    grid: PeriodGrid,
) -> Result<AlmostPeriodReport, ApproxError> {
    if !(epsilon > 0.0) {
        return Err(ApproxError::Search("epsilon must be positive".into()));
    }
    if !(strip.0 <= strip.1) {
        return Err(ApproxError::Search("strip bounds out of order".into()));
    }
    if !(t_max > 0.0 && grid.tau_step > 0.0 && grid.n_sigma > 0 && grid.n_t > 0) {
        return Err(ApproxError::Search("empty search range or grid".into()));
    }
    let pts = grid.points(strip);
    let base: Vec<Complex64> = pts.iter().map(|&s| f.eval(s)).collect();
    let n = (t_max / grid.tau_step).floor() as usize;
    let d: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|i| defect_against(f, i as f64 * grid.tau_step, &pts, &base))
        .collect();
    let mut periods = Vec::new();
    for i in 1..n {
        if !(d[i] < d[i - 1] && d[i] <= d[i + 1]) {
            continue;
        }
        let lo = (i - 1) as f64 * grid.tau_step;
        let hi = (i + 1) as f64 * grid.tau_step;
        let (tau, def) = golden_min(|x| defect_against(f, x, &pts, &base), lo, hi);
        let (tau, def) = if def <= d[i] {
            (tau, def)
        } else {
            (i as f64 * grid.tau_step, d[i])
        };
        if def <= epsilon {
            periods.push(AlmostPeriod { tau, defect: def });
        }
    }
    let inclusion_length = (!periods.is_empty()).then(|| {
        let mut l = periods[0].tau;
        for w in periods.windows(2) {
            l = l.max(w[1].tau - w[0].tau);
        }
        l.max(t_max - periods.last().expect("nonempty").tau)
    });
    Ok(AlmostPeriodReport {
        epsilon,
        strip,
        t_max,
        grid,
        empty: periods.is_empty(),
        periods,
        inclusion_length,
    })
}

fn golden_min<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    for _ in 0..80 {
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
