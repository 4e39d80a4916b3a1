// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Discrete power law with exponential cutoff,
//! `p(x) = x^-alpha e^(-lambda x) / Z` for integers `x >= x_min`.
//!
//! Fits use only the tail's sufficient statistics `(n, sum ln x, sum x)`.
//! `ln Z` is evaluated relative to `x_min`: a direct sum over the first
//! terms, then an Euler–Maclaurin tail whose integral is reduced to a
//! bounded integrand on `[0, 1]` and integrated by adaptive Simpson.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum tail size for a fit.
pub const MIN_TAIL: usize = 100;
/// Nelder–Mead iteration cap per run.
pub const MAX_ITERATIONS: usize = 10_000;
const MAX_KS_CANDIDATES: usize = 50;
const DIRECT_TERMS: u64 = 1_000;

const LN_ALPHA_M1: (f64, f64) = (-9.210_340_371_976_182, 3.912_023_005_428_146); // alpha - 1 in [1e-4, 50]
const LN_LAMBDA: (f64, f64) = (-27.631_021_115_928_547, 3.912_023_005_428_146); // lambda in [1e-12, 50]

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, eps, 48)
}

/// `ln Z(alpha, lambda, x_min)`, relative tolerance about 1e-12.
pub fn ln_normalizer(alpha: f64, lambda: f64, x_min: u64) -> f64 {
    let x0 = x_min as f64;
    // g(x) = (x / x0)^-alpha e^(-lambda (x - x0)), so g(x0) = 1.
    let ln_g = |x: f64| -alpha * (x / x0).ln() - lambda * (x - x0);
    let mut sum = 0.0;
    let mut x = x_min;
    while x - x_min < DIRECT_TERMS {
        let term = ln_g(x as f64).exp();
        sum += term;
        x += 1;
        if term < 1e-18 * sum {
            return sum.ln() - alpha * x0.ln() - lambda * x0;
        }
    }
    let n = x as f64;
    let gn = ln_g(n).exp();
    let h = -alpha / n - lambda;
    let h1 = alpha / (n * n);
    let h2 = -2.0 * alpha / (n * n * n);
    let d1 = gn * h;
    let d3 = gn * (h * h * h + 3.0 * h * h1 + h2);
    // int_N^inf g = g(N) N / (alpha - 1) * int_0^1 exp(-lambda N (s^(-1/(alpha-1)) - 1)) ds
    let c = lambda * n;
    let beta = 1.0 / (alpha - 1.0);
    let j = if c == 0.0 {
        1.0
    } else {
        integrate(|s| if s <= 0.0 { 0.0 } else { (-c * (s.powf(-beta) - 1.0)).exp() }, 0.0, 1.0, 1e-14)
    };
    let integral = gn * n * beta * j;
    let tail = integral + gn / 2.0 - d1 / 12.0 + d3 / 720.0;
    (sum + tail).ln() - alpha * x0.ln() - lambda * x0
}

pub fn pmf(x: u64, alpha: f64, lambda: f64, x_min: u64) -> f64 {
    if x < x_min {
        return 0.0;
    }
    (-alpha * (x as f64).ln() - lambda * x as f64 - ln_normalizer(alpha, lambda, x_min)).exp()
}

/// Sufficient statistics of the samples `>= x_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailStats {
    pub x_min: u64,
    pub n: u64,
    pub sum_ln: f64,
    pub sum_x: f64,
    pub max: u64,
    pub distinct: usize,
}

/// Sorted histogram of positive samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub values: Vec<u64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_samples(samples: &[u64]) -> Self {
        let mut h: BTreeMap<u64, u64> = BTreeMap::new();
        for &s in samples.iter().filter(|&&s| s > 0) {
            *h.entry(s).or_insert(0) += 1;
        }
        Histogram { values: h.keys().copied().collect(), counts: h.values().copied().collect() }
    }

    pub fn tail(&self, x_min: u64) -> TailStats {
        let lo = self.values.partition_point(|&v| v < x_min);
        let mut t = TailStats { x_min, n: 0, sum_ln: 0.0, sum_x: 0.0, max: 0, distinct: self.values.len() - lo };
        for (&v, &c) in self.values[lo..].iter().zip(&self.counts[lo..]) {
            t.n += c;
            t.sum_ln += c as f64 * (v as f64).ln();
            t.sum_x += c as f64 * v as f64;
            t.max = v;
        }
        t
    }
}

/// Mean negative log-likelihood per tail sample.
fn mean_nll(t: &TailStats, alpha: f64, lambda: f64) -> f64 {
    let n = t.n as f64;
    alpha * t.sum_ln / n + lambda * t.sum_x / n + ln_normalizer(alpha, lambda, t.x_min)
}

pub fn log_likelihood(t: &TailStats, alpha: f64, lambda: f64) -> f64 {
    -(t.n as f64) * mean_nll(t, alpha, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    PowerLaw,
    Cutoff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub model: Model,
    pub x_min: u64,
    pub alpha: f64,
    pub lambda: f64,
    pub log_likelihood: f64,
    pub n_tail: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XminSelection {
    /// "user" or "ks".
    pub method: String,
    pub ks_distance: Option<f64>,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Cutoff fit when the likelihood-ratio test favours it, else the power law.
    pub selected: PowerLawFit,
    pub power_law: PowerLawFit,
    pub cutoff: PowerLawFit,
    pub lrt_statistic: f64,
    pub p_value: f64,
    pub iterations: usize,
    pub x_min_selection: XminSelection,
    pub warnings: Vec<String>,
}

fn check_tail(t: &TailStats) -> Result<()> {
    if (t.n as usize) < MIN_TAIL {
        return Err(Error::TooFew { what: "tail samples", needed: MIN_TAIL, got: t.n as usize });
    }
    if t.distinct < 2 {
        return Err(Error::DegenerateTail(format!("all {} tail samples equal {}", t.n, t.max)));
    }
    Ok(())
}

/// Pure power-law MLE by golden-section search on `ln(alpha - 1)`; the
/// objective is convex in alpha.
pub fn fit_power_law(t: &TailStats) -> Result<PowerLawFit> {
    check_tail(t)?;
    let f = |u: f64| mean_nll(t, 1.0 + u.exp(), 0.0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = LN_ALPHA_M1;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let alpha = 1.0 + (0.5 * (a + b)).exp();
    Ok(PowerLawFit {
        model: Model::PowerLaw,
        x_min: t.x_min,
        alpha,
        lambda: 0.0,
        log_likelihood: log_likelihood(t, alpha, 0.0),
        n_tail: t.n,
    })
}

fn clamp(p: [f64; 2]) -> [f64; 2] {
    [p[0].clamp(LN_ALPHA_M1.0, LN_ALPHA_M1.1), p[1].clamp(LN_LAMBDA.0, LN_LAMBDA.1)]
}

/// Bounded Nelder–Mead. Returns (best point, value, iterations).
fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: &F, start: [f64; 2], step: [f64; 2]) -> Result<([f64; 2], f64, usize)> {
    let mut simplex = [start, clamp([start[0] + step[0], start[1]]), clamp([start[0], start[1] + step[1]])];
    let mut values = simplex.map(f);
    for it in 0..MAX_ITERATIONS {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let spread = (values[2] - values[0]).abs();
        let size = simplex[1..]
            .iter()
            .map(|p| (p[0] - simplex[0][0]).abs().max((p[1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        if spread <= 1e-14 * values[0].abs().max(1.0) && size <= 1e-9 {
            return Ok((simplex[0], values[0], it));
        }
        let centroid = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let toward = |t: f64| clamp([centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])]);
        let r = toward(-1.0);
        let fr = f(r);
        if fr < values[0] {
            let e = toward(-2.0);
            let fe = f(e);
            (simplex[2], values[2]) = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < values[1] {
            (simplex[2], values[2]) = (r, fr);
        } else {
            let (c, fc) = if fr < values[2] {
                let c = toward(-0.5);
                (c, f(c))
            } else {
                let c = toward(0.5);
                (c, f(c))
            };
            if fc < values[2].min(fr) {
                (simplex[2], values[2]) = (c, fc);
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        simplex[0][0] + 0.5 * (simplex[i][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[i][1] - simplex[0][1]),
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    let p = simplex[best];
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        best_ll: -values[best],
        alpha: 1.0 + p[0].exp(),
        lambda: p[1].exp(),
    })
}

/// Cutoff MLE by Nelder–Mead on `(ln(alpha - 1), ln lambda)` from the best
/// of a small start grid, restarted at the optimum until it stops improving.
pub fn fit_cutoff(t: &TailStats, power_law_alpha: f64) -> Result<(PowerLawFit, usize)> {
    check_tail(t)?;
    let f = |p: [f64; 2]| mean_nll(t, 1.0 + p[0].exp(), p[1].exp());
    let mean = t.sum_x / t.n as f64;
    let mut starts = Vec::new();
    for a in [power_law_alpha, power_law_alpha - 0.5, power_law_alpha - 1.0, power_law_alpha + 0.5] {
        for l in [1e-6, 1e-4, 1e-3, 1e-2, 1e-1, 1.0 / mean] {
            starts.push(clamp([(a - 1.0).max(1e-4).ln(), l.ln()]));
        }
    }
    let mut best = starts
        .iter()
        .map(|&p| (p, f(p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let mut iterations = 0;
    for _ in 0..8 {
        let (p, v, it) = nelder_mead(&f, best.0, [0.2, 1.0])?;
        iterations += it;
        let improved = best.1 - v > 1e-13 * v.abs().max(1.0);
        if v <= best.1 {
            best = (p, v);
        }
        if !improved {
            break;
        }
    }
    let (alpha, lambda) = (1.0 + best.0[0].exp(), best.0[1].exp());
    Ok((
        PowerLawFit {
            model: Model::Cutoff,
            x_min: t.x_min,
            alpha,
            lambda,
            log_likelihood: log_likelihood(t, alpha, lambda),
            n_tail: t.n,
        },
        iterations,
    ))
}

/// Kolmogorov–Smirnov distance between the tail's empirical CDF and the
/// fitted discrete power law.
fn ks_distance(h: &Histogram, t: &TailStats, alpha: f64) -> f64 {
    let lo = h.values.partition_point(|&v| v < t.x_min);
    let ln_z = ln_normalizer(alpha, 0.0, t.x_min);
    let p = |y: u64| (-alpha * (y as f64).ln() - ln_z).exp();
    let n = t.n as f64;
    let mut emp = 0.0;
    let mut model = 0.0;
    let mut prev = t.x_min - 1;
    let mut d: f64 = 0.0;
    for (&v, &c) in h.values[lo..].iter().zip(&h.counts[lo..]) {
        if v - prev <= 2 * DIRECT_TERMS {
            model += (prev + 1..=v).map(p).sum::<f64>();
        } else {
            // P(prev < X <= v) = (Z(prev + 1) - Z(v + 1)) / Z(x_min)
            let upper = |m: u64| (ln_normalizer(alpha, 0.0, m) - ln_z).exp();
            model += upper(prev + 1) - upper(v + 1);
        }
        emp += c as f64 / n;
        d = d.max((emp - model).abs());
        prev = v;
    }
    d
}

/// `x_min` minimizing the KS distance of the power-law fit, over at most
/// 50 quantile-spaced candidates leaving at least [`MIN_TAIL`] samples.
pub fn select_x_min(h: &Histogram) -> Result<(u64, f64, usize)> {
    let total: u64 = h.counts.iter().sum();
    let mut eligible = Vec::new();
    let mut remaining = total;
    for (&v, &c) in h.values.iter().zip(&h.counts) {
        if remaining < MIN_TAIL as u64 {
            break;
        }
        if h.tail(v).distinct >= 2 {
            eligible.push(v);
        }
        remaining -= c;
    }
    if eligible.is_empty() {
        return Err(Error::TooFew { what: "samples for x_min selection", needed: MIN_TAIL, got: total as usize });
    }
    let candidates: Vec<u64> = if eligible.len() <= MAX_KS_CANDIDATES {
        eligible
    } else {
        let mut c: Vec<u64> = (0..MAX_KS_CANDIDATES)
            .map(|i| eligible[i * (eligible.len() - 1) / (MAX_KS_CANDIDATES - 1)])
            .collect();
        c.dedup();
        c
    };
    let scored: Vec<(u64, f64)> = candidates
        .par_iter()
        .map(|&x| {
            let t = h.tail(x);
            let alpha = fit_power_law(&t)?.alpha;
            Ok((x, ks_distance(h, &t, alpha)))
        })
        .collect::<Result<_>>()?;
    let (x, d) = scored.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))).unwrap();
    Ok((x, d, candidates.len()))
}

/// Fit both models on the tail `>= x_min` (KS-selected when `None`) and
/// keep the cutoff only if the likelihood-ratio test rejects the pure power
/// law at the 0.05 level.
pub fn fit_powerlaw_cutoff(samples: &[u64], x_min: Option<u64>) -> Result<FitReport> {
    let h = Histogram::from_samples(samples);
    let mut warnings = Vec::new();
    let dropped = samples.iter().filter(|&&s| s == 0).count();
    if dropped > 0 {
        warnings.push(format!("{dropped} zero samples ignored"));
    }
    let (x_min, selection) = match x_min {
        Some(0) => return Err(Error::Config("x_min must be positive".into())),
        Some(x) => (x, XminSelection { method: "user".into(), ks_distance: None, candidates: 0 }),
        None => {
            if h.values.len() == 1 {
                return Err(Error::DegenerateTail(format!("all samples equal {}", h.values[0])));
            }
            let (x, d, c) = select_x_min(&h)?;
            (x, XminSelection { method: "ks".into(), ks_distance: Some(d), candidates: c })
        }
    };
    let t = h.tail(x_min);
    let power_law = fit_power_law(&t)?;
    let (cutoff, iterations) = fit_cutoff(&t, power_law.alpha)?;
    let lrt_statistic = (2.0 * (cutoff.log_likelihood - power_law.log_likelihood)).max(0.0);
    let p_value = statrs::function::erf::erfc((lrt_statistic / 2.0).sqrt());
    let selected = if p_value < 0.05 { cutoff.clone() } else { power_law.clone() };
    Ok(FitReport {
        selected,
        power_law,
        cutoff,
        lrt_statistic,
        p_value,
        iterations,
        x_min_selection: selection,
        warnings,
    })
}
