//! Small derivative-free maximizers used by the solvers.
//!
//! Everything here maximizes. Scalar problems live on `[0, 1]`; simplex
//! problems are reparameterized through [`softmax`] so Nelder–Mead can run
//! unconstrained.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(x, f(x))` once the bracket is narrower than `tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Maximize `f` on `[0, 1]`: an evenly spaced scan of `grid_points` points
/// (endpoints included), then golden-section refinement inside the bracket of
/// the best scan point.
///
/// Ties go to the smallest `x`: the refined point only replaces the scan
/// winner when it is strictly better.
pub fn maximize_unit_interval<F: Fn(f64) -> f64>(f: F, grid_points: usize, tol: f64) -> (f64, f64) {
    let n = grid_points.max(3);
    let step = 1.0 / (n - 1) as f64;
    let mut best_i = 0;
    let mut best_f = f64::NEG_INFINITY;
    for i in 0..n {
        let v = f(i as f64 * step);
        if v > best_f {
            best_f = v;
            best_i = i;
        }
    }
    let best_x = best_i as f64 * step;
    let lo = (best_x - step).max(0.0);
    let hi = (best_x + step).min(1.0);
    let (gx, gf) = golden_section_max(&f, lo, hi, tol);
    if gf > best_f {
        (gx, gf)
    } else {
        (best_x, best_f)
    }
}

/// Options for [`nelder_mead_max`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop when the spread of function values across the simplex falls below this.
    pub f_tol: f64,
    /// ...and the simplex diameter falls below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            max_evals: 20_000,
            f_tol: 1e-14,
            x_tol: 1e-10,
        }
    }
}

/// Nelder–Mead maximization of `f` from `x0`.
///
/// Non-finite values are treated as `-inf`, so callers can reject infeasible
/// points by returning `f64::NEG_INFINITY`.
pub fn nelder_mead_max<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: NelderMeadOptions) -> (Vec<f64>, f64) {
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };
    if n == 0 {
        let v = eval(x0);
        return (Vec::new(), -v);
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x);
        simplex.push((x, v));
    }
    let mut evals = n + 1;

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
    };

    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_spread = simplex[n].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (f_spread.is_finite() && f_spread <= opts.f_tol && diameter <= opts.x_tol) || diameter < 1e-15 {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();

        // Reflection through the centroid.
        let xr = combine(&centroid, &worst.0, -alpha);
        let fr = eval(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = combine(&centroid, &worst.0, -gamma);
            let fe = eval(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = combine(&centroid, &xr, rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = combine(&centroid, &worst.0, rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < worst.1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let xs = combine(&best, &entry.0, sigma);
            let fs = eval(&xs);
            *entry = (xs, fs);
        }
        evals += n;
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, -v)
}

/// Map `n - 1` unconstrained logits to a point of the `n`-simplex; the last
/// logit is pinned at zero.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(0.0_f64, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    out.push((-m).exp());
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= s);
    out
}

/// Inverse of [`softmax`] for strictly positive probability vectors.
pub fn logits_from_probs(probs: &[f64]) -> Vec<f64> {
    let floor = 1e-12;
    let last = probs.last().copied().unwrap_or(1.0).max(floor).ln();
    probs[..probs.len().saturating_sub(1)]
        .iter()
        .map(|p| p.max(floor).ln() - last)
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Evenly spaced grid on the probability simplex in `dim` coordinates.
///
/// The per-axis resolution starts at `max_resolution` steps and is reduced
/// until the grid has at most `max_points` points. Points are emitted in
/// lexicographic order of their coordinates.
pub fn simplex_grid(dim: usize, max_resolution: usize, max_points: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1);
    let mut r = max_resolution.max(1);
    while r > 1 && binomial(r + dim - 1, dim - 1) > max_points as f64 {
        r -= 1;
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; dim];
    fn rec(pos: usize, remaining: usize, r: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        let dim = current.len();
        if pos == dim - 1 {
            current[pos] = remaining;
            out.push(current.iter().map(|&c| c as f64 / r as f64).collect());
            return;
        }
        for c in 0..=remaining {
            current[pos] = c;
            rec(pos + 1, remaining - c, r, current, out);
        }
    }
    rec(0, r, r, &mut current, &mut out);
    out
}
