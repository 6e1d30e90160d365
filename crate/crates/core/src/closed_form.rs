//! Analytical lower bounds for `(d,k)`-RLL input-constrained BSC and BEC.
//!
//! For `k = inf` the bound is a one-dimensional maximization,
//!
//! ```text
//! max_a (h_b(a p + (1-a)(1-p)) - h_b(p)) / (a d + 1),
//! ```
//!
//! and for finite `k` it is the ratio
//!
//! ```text
//! Σ_{i=d}^{k-1} r(a_i) Π_{j=d}^{i-1} (1 - a_j)
//! --------------------------------------------    over a_d..a_{k-1} in [0,1],
//!   d + 1 + Σ_{i=d}^{k-1} Π_{j=d}^{i} (1 - a_j)
//! ```
//!
//! with `r(a) = h_b(a p + (1-a)(1-p)) - h_b(p)` (empty products are 1). The
//! BEC bound is the noiseless capacity scaled by `1 - ε`, and the noiseless
//! capacity is the same ratio with `r(a) = h_b(a)`.
//!
//! The ratio is maximized as a fractional program: for a trial value `ρ`,
//! `max_a [N(a) - ρ D(a)]` separates into a backward recursion of concave
//! one-dimensional problems, and Dinkelbach updates `ρ <- N(a*) / D(a*)` until
//! the maximum is zero. A multi-start Nelder–Mead on the raw ratio runs as a
//! cross-check and wins if it ever finds a larger value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{RllSpec, RunLimit};
use crate::info::binary_entropy;
use crate::optim::{maximize_unit_interval, nelder_mead_max, NelderMeadOptions};
use crate::{Error, Result};

const SCAN_POINTS: usize = 256;
const ARG_TOL: f64 = 1e-10;
const RATIO_RESTARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFamily {
    BscDinf,
    BscDk,
    BecDinf,
    BecDk,
    Noiseless,
}

/// Maximizing parameters: `a` for `k = inf`, `(a_d, .., a_{k-1})` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedFormParams {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ClosedFormParams {
    pub fn as_slice(&self) -> &[f64] {
        match self {
            ClosedFormParams::Scalar(a) => std::slice::from_ref(a),
            ClosedFormParams::Vector(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// Bits per channel use.
    pub value: f64,
    pub argmax: ClosedFormParams,
    pub family: BoundFamily,
    /// Optimality gap of the maximization: `|max_a [N(a) - value D(a)]|` for
    /// the ratio forms, 0 for the scalar forms.
    pub gap: f64,
}

fn check_prob(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { what, value })
    }
}

/// Per-symbol reward `h_b(a p + (1-a)(1-p)) - h_b(p)` of the BSC.
pub fn bsc_symbol_reward(a: f64, p: f64) -> f64 {
    binary_entropy(a * p + (1.0 - a) * (1.0 - p)) - binary_entropy(p)
}

/// The `(d,inf)` BSC objective at `a`.
pub fn bsc_dinf_objective(d: usize, p: f64, a: f64) -> f64 {
    bsc_symbol_reward(a, p) / (a * d as f64 + 1.0)
}

/// The `(d,k)` ratio objective for a per-symbol reward `r`.
pub fn dk_ratio<R: Fn(f64) -> f64>(d: usize, a: &[f64], r: R) -> f64 {
    let (num, den) = ratio_parts(d, a, &r);
    num / den
}

fn ratio_parts<R: Fn(f64) -> f64>(d: usize, a: &[f64], r: &R) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = d as f64 + 1.0;
    let mut prefix = 1.0;
    for &ai in a {
        num += r(ai) * prefix;
        prefix *= 1.0 - ai;
        den += prefix;
    }
    (num, den)
}

/// The `(d,k)` BSC objective at `(a_d, .., a_{k-1})`.
pub fn bsc_dk_objective(d: usize, p: f64, a: &[f64]) -> f64 {
    dk_ratio(d, a, |ai| bsc_symbol_reward(ai, p))
}

fn maximize_dinf<R: Fn(f64) -> f64>(d: usize, r: R) -> (f64, f64) {
    maximize_unit_interval(|a| r(a) / (a * d as f64 + 1.0), SCAN_POINTS, ARG_TOL)
}

/// `max_a [N(a) - ρ D(a)]` by backward recursion over coordinates.
fn parametric_max<R: Fn(f64) -> f64>(d: usize, len: usize, rho: f64, r: &R) -> (f64, Vec<f64>) {
    let mut a = vec![0.0; len];
    let mut tail = 0.0;
    for i in (0..len).rev() {
        let v_next = tail;
        let (ai, vi) = maximize_unit_interval(|x| r(x) - rho * (1.0 - x) + (1.0 - x) * v_next, SCAN_POINTS, ARG_TOL);
        a[i] = ai;
        tail = vi;
    }
    (tail - rho * (d as f64 + 1.0), a)
}

fn maximize_dk<R: Fn(f64) -> f64>(d: usize, k: usize, r: R, seed: u64) -> (f64, Vec<f64>, f64) {
    let len = k - d;
    let mut a = vec![0.5; len];
    let mut rho = dk_ratio(d, &a, &r);
    let mut gap = f64::INFINITY;
    for _ in 0..200 {
        let (f, a_new) = parametric_max(d, len, rho, &r);
        let rho_new = dk_ratio(d, &a_new, &r);
        gap = f.abs();
        if rho_new > rho {
            rho = rho_new;
            a = a_new;
        }
        if f <= 1e-15 {
            break;
        }
    }

    // Cross-check on the raw ratio through a logistic reparameterization.
    let to_unit = |t: f64| 1.0 / (1.0 + (-t).exp());
    let objective = |t: &[f64]| dk_ratio(d, &t.iter().map(|&ti| to_unit(ti)).collect::<Vec<_>>(), &r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RATIO_RESTARTS {
        let start: Vec<f64> = (0..len).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (t, v) = nelder_mead_max(objective, &start, NelderMeadOptions { initial_step: 1.0, ..Default::default() });
        if v > rho + 1e-15 {
            rho = v;
            a = t.iter().map(|&ti| to_unit(ti)).collect();
            gap = parametric_max(d, len, rho, &r).0.abs();
        }
    }
    (rho, a, gap)
}

/// Lower bound for the `(d,inf)`-RLL input-constrained BSC(p).
pub fn bsc_dinf_bound(d: usize, p: f64) -> Result<BoundResult> {
    check_prob("BSC crossover probability", p)?;
    let (a, value) = maximize_dinf(d, |a| bsc_symbol_reward(a, p));
    Ok(BoundResult { value: value.max(0.0), argmax: ClosedFormParams::Scalar(a), family: BoundFamily::BscDinf, gap: 0.0 })
}

/// Lower bound for the `(d,k)`-RLL input-constrained BSC(p), `k` finite.
pub fn bsc_dk_bound(d: usize, k: usize, p: f64) -> Result<BoundResult> {
    check_prob("BSC crossover probability", p)?;
    if d >= k {
        return Err(Error::InvalidRll { d, k: k.to_string() });
    }
    let (value, a, gap) = maximize_dk(d, k, |a| bsc_symbol_reward(a, p), 0);
    Ok(BoundResult { value: value.max(0.0), argmax: ClosedFormParams::Vector(a), family: BoundFamily::BscDk, gap })
}

/// Noiseless capacity of a `(d,k)`-RLL constraint.
pub fn noiseless_capacity(spec: RllSpec) -> BoundResult {
    match spec.k() {
        RunLimit::Infinite => {
            let (a, value) = maximize_dinf(spec.d(), binary_entropy);
            BoundResult { value, argmax: ClosedFormParams::Scalar(a), family: BoundFamily::Noiseless, gap: 0.0 }
        }
        RunLimit::Finite(k) => {
            let (value, a, gap) = maximize_dk(spec.d(), k, binary_entropy, 0);
            BoundResult { value, argmax: ClosedFormParams::Vector(a), family: BoundFamily::Noiseless, gap }
        }
    }
}

/// Lower bound `C_{d,k} (1 - ε)` for the `(d,k)`-RLL input-constrained BEC(ε).
pub fn bec_bound(spec: RllSpec, eps: f64) -> Result<BoundResult> {
    check_prob("BEC erasure probability", eps)?;
    let c = noiseless_capacity(spec);
    let family = match spec.k() {
        RunLimit::Infinite => BoundFamily::BecDinf,
        RunLimit::Finite(_) => BoundFamily::BecDk,
    };
    Ok(BoundResult { value: c.value * (1.0 - eps), argmax: c.argmax, family, gap: c.gap })
}

/// Dispatch on the constraint: [`bsc_dinf_bound`] or [`bsc_dk_bound`].
pub fn bsc_bound(spec: RllSpec, p: f64) -> Result<BoundResult> {
    match spec.k() {
        RunLimit::Infinite => bsc_dinf_bound(spec.d(), p),
        RunLimit::Finite(k) => bsc_dk_bound(spec.d(), k, p),
    }
}
