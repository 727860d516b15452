//! Four-parameter logistic mapping from predicted scores to MOS,
//! `m(q) = β₁·(½ − 1/(1 + exp(β₂(q − β₃)))) + β₄`, fitted by multi-start
//! Levenberg–Marquardt.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_FIT_LEN: usize = 8;
pub const DEFAULT_FIT_SEED: u64 = 0x5eed_1095;
const RANDOM_STARTS: usize = 24;
const MAX_ITERATIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Logistic4 {
    pub params: [f64; 4],
    pub sse: f64,
    /// False when no start met the convergence test; `params` is then the best found.
    pub converged: bool,
}

impl Logistic4 {
    pub fn apply(&self, q: f64) -> f64 {
        logistic(&self.params, q)
    }
}

#[inline]
fn sigmoid_tail(z: f64) -> f64 {
    1.0 / (1.0 + z.exp())
}

pub fn logistic(p: &[f64; 4], q: f64) -> f64 {
    p[0] * (0.5 - sigmoid_tail(p[1] * (q - p[2]))) + p[3]
}

fn sse(p: &[f64; 4], x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(q, m)| (m - logistic(p, *q)).powi(2)).sum()
}

/// Runs LM from `start`; returns the final parameters, SSE and whether it converged.
fn levenberg_marquardt(start: [f64; 4], x: &[f64], y: &[f64]) -> ([f64; 4], f64, bool) {
    let mut p = start;
    let mut cost = sse(&p, x, y);
    if !cost.is_finite() {
        return (p, f64::INFINITY, false);
    }
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITERATIONS {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (q, m) in x.iter().zip(y) {
            let l = sigmoid_tail(p[1] * (q - p[2]));
            let dl = l * (1.0 - l);
            let j = Vector4::new(0.5 - l, p[0] * dl * (q - p[2]), -p[0] * dl * p[1], 1.0);
            let r = m - (p[0] * (0.5 - l) + p[3]);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        if jtr.amax() <= 1e-14 * (1.0 + cost) {
            return (p, cost, true);
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
            let trial_cost = sse(&trial, x, y);
            if trial_cost.is_finite() && trial_cost < cost {
                let rel = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                let small_step = step.iter().zip(&p).all(|(s, v)| s.abs() <= 1e-12 * (1.0 + v.abs()));
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                if rel < 1e-14 || small_step || cost == 0.0 {
                    return (p, cost, true);
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // no descent direction at any damping: a (numerically) stationary point
            return (p, cost, true);
        }
    }
    (p, cost, false)
}

fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares logistic fit of `mos` against `pred`, deterministic for a given seed.
pub fn fit_logistic4_seeded(pred: &[f64], mos: &[f64], seed: u64) -> Result<Logistic4> {
    if pred.len() != mos.len() {
        return Err(Error::DegenerateInput("length mismatch".into()));
    }
    if pred.len() < MIN_FIT_LEN {
        return Err(Error::DegenerateInput(format!(
            "logistic fit needs at least {MIN_FIT_LEN} samples, got {}",
            pred.len()
        )));
    }
    if pred.iter().chain(mos).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite sample".into()));
    }
    let spread = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (plo, phi) = spread(pred);
    let (mlo, mhi) = spread(mos);
    if plo == phi {
        return Err(Error::DegenerateInput("predictions have zero variance".into()));
    }
    if mlo == mhi {
        return Err(Error::DegenerateInput("MOS has zero variance".into()));
    }

    let n = pred.len() as f64;
    let pmean = pred.iter().sum::<f64>() / n;
    let pstd = (pred.iter().map(|v| (v - pmean).powi(2)).sum::<f64>() / n).sqrt();
    let mmean = mos.iter().sum::<f64>() / n;
    let slope = linear_slope(pred, mos);
    let sign = if slope < 0.0 { -1.0 } else { 1.0 };

    let mut starts = Vec::new();
    for s in [0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let b2 = sign * s / pstd;
        let b1 = if s <= 1.0 { 4.0 * slope / b2 } else { mhi - mlo };
        starts.push([b1, b2, pmean, mmean]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_STARTS {
        let b2 = sign * rng.random_range(-3.0f64..3.0).exp() / pstd;
        let b3 = rng.random_range(plo..=phi);
        let b1 = (mhi - mlo) * rng.random_range(0.5..4.0);
        let b4 = rng.random_range(mlo..=mhi);
        starts.push([b1, b2, b3, b4]);
    }

    let mut best: Option<Logistic4> = None;
    for start in starts {
        let (params, cost, converged) = levenberg_marquardt(start, pred, mos);
        if !cost.is_finite() {
            continue;
        }
        if best.is_none_or(|b| cost < b.sse) {
            best = Some(Logistic4 {
                params,
                sse: cost,
                converged,
            });
        }
    }
    best.ok_or_else(|| Error::DegenerateInput("no start produced a finite fit".into()))
}

pub fn fit_logistic4(pred: &[f64], mos: &[f64]) -> Result<Logistic4> {
    fit_logistic4_seeded(pred, mos, DEFAULT_FIT_SEED)
}
