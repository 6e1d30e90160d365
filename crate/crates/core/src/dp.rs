//! Average-reward dynamic program for the reverse directed information rate.
//!
//! The DP state is the belief `β(s) = P(s_{t-1} | x^{t-1})`, the action is a
//! stochastic matrix `P(x_t | s_{t-1})` (one row per state), the disturbance
//! is the input `x_t`, and the per-step reward is
//! `g(β, u) = I(X_t, S_{t-1}; Y_t | x^{t-1}) = H(Y) - H(Y | X, S)`.
//!
//! With a deterministic state update and a known initial state the belief is
//! always a point mass, so the solver runs relative value iteration directly
//! on the channel states. It searches stationary policies and certifies the
//! result through the Bellman equation `ρ + h(z) = sup_u [g(z,u) + E h(z')]`:
//! a small residual means `ρ` is the optimal average reward over all policies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::Fsc;
use crate::info::{clamp_prob, entropy, KahanSum};
use crate::optim::{logits_from_probs, maximize_unit_interval, nelder_mead_max, simplex_grid, softmax, NelderMeadOptions};
use crate::{Error, Result};

/// Tolerance on row sums of beliefs and policies.
pub const ROW_TOL: f64 = 1e-12;

/// Damping of the relative value iteration update, `h <- h + τ (T h - h)`.
/// Any `τ < 1` makes the iteration converge on periodic chains too.
const DAMPING: f64 = 0.5;

/// Span of successive iterates below which the iteration stops.
const SPAN_STOP: f64 = 1e-12;

/// Bracket width of the scalar inner maximization.
const INNER_TOL: f64 = 1e-10;

/// Simplex grid for more than two allowed inputs: 33 points per axis,
/// at most this many points in total.
const SIMPLEX_GRID_RESOLUTION: usize = 32;
const SIMPLEX_GRID_CAP: usize = 4096;
/// Iterations without span improvement after which the solver gives up.
const PLATEAU_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Required Bellman residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Coarse grid size of the scalar inner maximization.
    pub grid_points: usize,
    /// Nelder–Mead restarts for inner maximizations over more than two inputs.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100_000,
            grid_points: 64,
            restarts: 8,
            seed: 0,
        }
    }
}

/// A belief over channel states.
#[derive(Debug, Clone, PartialEq)]
pub struct DpState {
    belief: Vec<f64>,
}

impl DpState {
    pub fn point_mass(num_states: usize, s: usize) -> Self {
        let mut belief = vec![0.0; num_states];
        belief[s] = 1.0;
        DpState { belief }
    }

    pub fn from_belief(belief: Vec<f64>) -> Result<Self> {
        let sum: f64 = belief.iter().sum();
        if belief.iter().any(|&b| b < 0.0 || b.is_nan()) || (sum - 1.0).abs() > ROW_TOL {
            return Err(Error::InvalidRow { state: 0, reason: format!("belief {belief:?} is not a probability vector") });
        }
        Ok(DpState { belief })
    }

    pub fn belief(&self) -> &[f64] {
        &self.belief
    }

    /// The state carrying all the mass, if the belief is degenerate.
    pub fn point_mass_index(&self) -> Option<usize> {
        let mut idx = None;
        for (s, &b) in self.belief.iter().enumerate() {
            if b == 1.0 {
                idx = Some(s);
            } else if b != 0.0 {
                return None;
            }
        }
        idx
    }
}

/// One input distribution per channel state.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub rows: Vec<Vec<f64>>,
}

impl Policy {
    /// Validate `rows` against the channel's allowed inputs.
    pub fn new(fsc: &Fsc, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != fsc.num_states() {
            return Err(Error::DimensionMismatch { expected: fsc.num_states(), got: rows.len() });
        }
        for (s, row) in rows.iter().enumerate() {
            check_row(fsc, s, row)?;
        }
        Ok(Policy { rows })
    }

    /// Uniform over allowed inputs at every state.
    pub fn uniform(fsc: &Fsc) -> Self {
        let rows = (0..fsc.num_states())
            .map(|s| {
                let allowed = fsc.allowed_inputs(s);
                let mut row = vec![0.0; fsc.num_inputs()];
                allowed.iter().for_each(|&x| row[x] = 1.0 / allowed.len() as f64);
                row
            })
            .collect();
        Policy { rows }
    }

    /// Entries of each row on allowed inputs after the first one. For binary
    /// RLL channels this is `P(x = 1 | s)` at every state where one is allowed.
    pub fn free_parameters(&self, fsc: &Fsc) -> Vec<f64> {
        (0..fsc.num_states())
            .flat_map(|s| {
                let allowed = fsc.allowed_inputs(s);
                allowed.into_iter().skip(1).map(move |x| self.rows[s][x])
            })
            .collect()
    }
}

fn check_row(fsc: &Fsc, s: usize, row: &[f64]) -> Result<()> {
    if row.len() != fsc.num_inputs() {
        return Err(Error::DimensionMismatch { expected: fsc.num_inputs(), got: row.len() });
    }
    for (x, &p) in row.iter().enumerate() {
        if !(0.0..=1.0).contains(&clamp_prob(p)) || p.is_nan() {
            return Err(Error::InvalidRow { state: s, reason: format!("entry {p} outside [0, 1]") });
        }
        if p > 0.0 && !fsc.allowed[s][x] {
            return Err(Error::ForbiddenInput { state: s, input: x });
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_TOL {
        return Err(Error::InvalidRow { state: s, reason: format!("sums to {sum}") });
    }
    Ok(())
}

/// Per-state conditional output entropies `H(Y | x, s)`, cached for the solver.
struct Prepared<'a> {
    fsc: &'a Fsc,
    cond_entropy: Vec<Vec<f64>>,
}

impl<'a> Prepared<'a> {
    fn new(fsc: &'a Fsc) -> Self {
        let cond_entropy = fsc.emission.iter().map(|rows| rows.iter().map(|w| entropy(w)).collect()).collect();
        Prepared { fsc, cond_entropy }
    }

    /// `H(Y | s, row) - Σ_x row(x) H(Y | x, s)`.
    fn reward(&self, s: usize, row: &[f64]) -> f64 {
        let w = &self.fsc.emission[s];
        let mut out = vec![0.0; self.fsc.num_outputs()];
        let mut cond = KahanSum::new();
        for (x, &px) in row.iter().enumerate() {
            if px <= 0.0 {
                continue;
            }
            for (o, wy) in out.iter_mut().zip(&w[x]) {
                *o += px * wy;
            }
            cond.add(px * self.cond_entropy[s][x]);
        }
        (entropy(&out) - cond.value()).max(0.0)
    }

    fn q_value(&self, s: usize, row: &[f64], h: &[f64]) -> f64 {
        let future: f64 = row
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(x, &p)| p * h[self.fsc.next_state[s][x]])
            .sum();
        self.reward(s, row) + future
    }

    /// `sup_row [g(s, row) + Σ_x row(x) h(f(s, x))]` and a maximizing row.
    fn maximize(&self, s: usize, h: &[f64], opts: &SolverOptions) -> (Vec<f64>, f64) {
        let fsc = self.fsc;
        let allowed = fsc.allowed_inputs(s);
        let n_x = fsc.num_inputs();
        let embed = |probs: &[f64]| {
            let mut row = vec![0.0; n_x];
            for (&x, &p) in allowed.iter().zip(probs) {
                row[x] = p;
            }
            row
        };
        match allowed.len() {
            0 => unreachable!("validated channels allow an input at every state"),
            1 => {
                let row = embed(&[1.0]);
                let v = self.q_value(s, &row, h);
                (row, v)
            }
            2 => {
                let (a, v) = maximize_unit_interval(|a| self.q_value(s, &embed(&[1.0 - a, a]), h), opts.grid_points, INNER_TOL);
                (embed(&[1.0 - a, a]), v)
            }
            m => {
                let objective = |probs: &[f64]| self.q_value(s, &embed(probs), h);
                let mut best: Option<(Vec<f64>, f64)> = None;
                let consider = |probs: Vec<f64>, v: f64, best: &mut Option<(Vec<f64>, f64)>| {
                    let better = match best {
                        None => true,
                        Some((bp, bv)) => v > *bv || (v == *bv && probs.as_slice() < bp.as_slice()),
                    };
                    if better {
                        *best = Some((probs, v));
                    }
                };
                for probs in simplex_grid(m, SIMPLEX_GRID_RESOLUTION, SIMPLEX_GRID_CAP) {
                    let v = objective(&probs);
                    consider(probs, v, &mut best);
                }
                let grid_best = best.clone().expect("grid is non-empty").0;
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let nm = NelderMeadOptions { initial_step: 0.5, max_evals: 4000, f_tol: 1e-15, x_tol: 1e-11 };
                for r in 0..opts.restarts.max(1) {
                    let start = if r == 0 {
                        logits_from_probs(&grid_best.iter().map(|p| p.max(1e-6)).collect::<Vec<_>>())
                    } else {
                        (0..m - 1).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); 2.0 * z }).collect()
                    };
                    let (logits, v) = nelder_mead_max(|l| objective(&softmax(l)), &start, nm);
                    consider(softmax(&logits), v, &mut best);
                }
                let (probs, v) = best.expect("at least one candidate");
                (embed(&probs), v)
            }
        }
    }

    fn bellman_operator(&self, h: &[f64], opts: &SolverOptions) -> Vec<(Vec<f64>, f64)> {
        (0..self.fsc.num_states()).map(|s| self.maximize(s, h, opts)).collect()
    }
}

/// The per-step reward `I(X_t, S_{t-1}; Y_t | x^{t-1})` under a point-mass
/// belief at `s` and input distribution `row`.
pub fn reward(fsc: &Fsc, s: usize, row: &[f64]) -> Result<f64> {
    if s >= fsc.num_states() {
        return Err(Error::DimensionMismatch { expected: fsc.num_states(), got: s + 1 });
    }
    check_row(fsc, s, row)?;
    Ok(Prepared::new(fsc).reward(s, row))
}

/// The per-step reward under a general belief: `H(Y) - H(Y | X, S)` with
/// `P(x, s, y) = β(s) row_s(x) W[s][x][y]`.
pub fn belief_reward(fsc: &Fsc, z: &DpState, rows: &[Vec<f64>]) -> f64 {
    let mut out = vec![0.0; fsc.num_outputs()];
    let mut cond = KahanSum::new();
    for (s, &b) in z.belief().iter().enumerate() {
        if b <= 0.0 {
            continue;
        }
        for (x, &px) in rows[s].iter().enumerate() {
            let m = b * px;
            if m <= 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(&fsc.emission[s][x]) {
                *o += m * w;
            }
            cond.add(m * entropy(&fsc.emission[s][x]));
        }
    }
    (entropy(&out) - cond.value()).max(0.0)
}

/// Push a belief through the state update: `z'(s') = Σ_s z(s) 1{f(s, x) = s'}`.
pub fn next_dp_state(fsc: &Fsc, z: &DpState, x: usize) -> DpState {
    let mut belief = vec![0.0; fsc.num_states()];
    for (s, &b) in z.belief().iter().enumerate() {
        belief[fsc.next_state[s][x]] += b;
    }
    DpState { belief }
}

/// Law of the disturbance: `P(x) = Σ_s β(s) row_s(x)`.
pub fn disturbance_law(z: &DpState, rows: &[Vec<f64>]) -> Vec<f64> {
    let n_x = rows.first().map_or(0, Vec::len);
    let mut law = vec![0.0; n_x];
    for (b, row) in z.belief().iter().zip(rows) {
        for (l, p) in law.iter_mut().zip(row) {
            *l += b * p;
        }
    }
    law
}

/// Solution of the average-reward program.
#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    /// Optimal average reward, bits per channel use.
    pub rho: f64,
    /// Relative value function over channel states, zero at the initial state.
    pub h: Vec<f64>,
    pub policy: Policy,
    pub bellman_residual: f64,
    pub iterations: usize,
    /// False when the Bellman residual misses the tolerance.
    pub converged: bool,
    /// `span(h_{n+1} - h_n)` at the last iteration.
    pub final_span: f64,
    /// Smallest and largest entry of `T h - h` at the returned `h`; `rho` lies between.
    pub increment_bounds: (f64, f64),
}

fn span(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

/// Relative value iteration on the point-mass DP states.
///
/// Each sweep evaluates the Bellman operator `T` with an inner maximization
/// per state, applies the damped update and re-pins `h(s0) = 0`. Iteration
/// stops once `span(h_{n+1} - h_n)` drops below `min(1e-12, tolerance)`.
///
/// When the state graph is not strongly connected the optimal gain can
/// depend on the state, the span plateaus and the solution comes back with
/// `converged == false`; `rho` is then the Bellman increment at `s0`.
pub fn solve_average_reward(fsc: &Fsc, opts: &SolverOptions) -> Result<DpSolution> {
    fsc.ensure_valid()?;
    let unreachable: Vec<usize> = fsc
        .reachable_states()
        .iter()
        .enumerate()
        .filter(|(_, &r)| !r)
        .map(|(s, _)| s)
        .collect();
    if !unreachable.is_empty() {
        return Err(Error::Unreachable(unreachable));
    }

    let prep = Prepared::new(fsc);
    let n = fsc.num_states();
    let s0 = fsc.initial_state;
    let stop = SPAN_STOP.min(opts.tolerance);
    let mut h = vec![0.0; n];
    let mut iterations = 0;
    let mut final_span = f64::INFINITY;
    let mut best_span = f64::INFINITY;
    let mut since_improvement = 0usize;

    while iterations < opts.max_iterations {
        iterations += 1;
        let th = prep.bellman_operator(&h, opts);
        let mut next: Vec<f64> = h.iter().zip(&th).map(|(hi, (_, t))| hi + DAMPING * (t - hi)).collect();
        let pin = next[s0];
        next.iter_mut().for_each(|v| *v -= pin);
        let diff: Vec<f64> = next.iter().zip(&h).map(|(a, b)| a - b).collect();
        final_span = span(&diff);
        h = next;
        if final_span < stop {
            break;
        }
        // Floating-point noise can keep the span just above `stop`; accept the
        // iterate once it is already within tolerance and no longer improving.
        if final_span < best_span * 0.999 {
            best_span = final_span;
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement > 200 && final_span / DAMPING <= opts.tolerance {
                break;
            }
            // A span that has stopped shrinking well above tolerance means the
            // optimal gain differs between states; no constant-gain solution exists.
            if since_improvement > PLATEAU_ITERATIONS {
                break;
            }
        }
    }

    let th = prep.bellman_operator(&h, opts);
    let increments: Vec<f64> = th.iter().zip(&h).map(|((_, t), hi)| t - hi).collect();
    let lo = increments.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = increments.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let bellman_residual = increments.iter().map(|inc| (inc - mid).abs()).fold(0.0, f64::max);
    let converged = bellman_residual <= opts.tolerance;
    // Without a constant gain the increment at s0 tracks the optimal gain from s0.
    let rho = if converged { mid } else { increments[s0] };
    let policy = Policy { rows: th.into_iter().map(|(row, _)| row).collect() };

    Ok(DpSolution {
        rho,
        h,
        policy,
        bellman_residual,
        iterations,
        converged,
        final_span,
        increment_bounds: (lo, hi),
    })
}

/// Per-state Bellman gaps `|sup_row [g(s,row) + E h(f(s,x))] - ρ - h(s)|`.
pub fn bellman_residuals(fsc: &Fsc, rho: f64, h: &[f64], opts: &SolverOptions) -> Result<Vec<f64>> {
    if h.len() != fsc.num_states() {
        return Err(Error::DimensionMismatch { expected: fsc.num_states(), got: h.len() });
    }
    fsc.ensure_valid()?;
    let prep = Prepared::new(fsc);
    Ok((0..fsc.num_states())
        .map(|s| (prep.maximize(s, h, opts).1 - rho - h[s]).abs())
        .collect())
}

/// Largest Bellman gap over all states. A value within tolerance certifies
/// `rho` as the optimal average reward.
pub fn bellman_residual(fsc: &Fsc, rho: f64, h: &[f64], opts: &SolverOptions) -> Result<f64> {
    Ok(bellman_residuals(fsc, rho, h, opts)?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_rll_dmc, Dmc, RllSpec, RunLimit};
    use crate::info::binary_entropy;

    fn one_inf(p: f64) -> Fsc {
        make_rll_dmc(RllSpec::d_inf(1), Dmc::Bsc(p)).unwrap()
    }

    #[test]
    fn state_dependent_gain_is_flagged() {
        // From 0, input 0 leads to an absorbing BSC(0.1) state and input 1 to
        // an absorbing BSC(0.3) state; the best gain from 0 is the former.
        let w = |p: f64| vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
        let fsc = Fsc::new(vec![vec![1, 2], vec![1, 1], vec![2, 2]], vec![w(0.2), w(0.1), w(0.3)], 0).unwrap();
        let sol = solve_average_reward(&fsc, &SolverOptions::default()).unwrap();
        assert!(!sol.converged);
        assert!(sol.iterations < 5000);
        assert!((sol.rho - (1.0 - binary_entropy(0.1))).abs() < 1e-9, "{}", sol.rho);
    }

    #[test]
    fn reward_vanishes_on_useless_bsc() {
        let fsc = one_inf(0.5);
        for a in [0.0, 0.3, 0.5, 1.0] {
            assert!(reward(&fsc, 1, &[1.0 - a, a]).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn reward_matches_bsc_formula() {
        let p = 0.2;
        let fsc = make_rll_dmc(RllSpec::d_inf(2), Dmc::Bsc(p)).unwrap();
        for a in [0.0, 0.25, 0.6, 1.0] {
            let expected = binary_entropy(a * p + (1.0 - a) * (1.0 - p)) - binary_entropy(p);
            assert!((reward(&fsc, 2, &[1.0 - a, a]).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn reward_matches_bec_formula() {
        let e = 0.3;
        let fsc = make_rll_dmc(RllSpec::d_inf(1), Dmc::Bec(e)).unwrap();
        for a in [0.0, 0.2, 0.5, 0.9] {
            let expected = (1.0 - e) * binary_entropy(a);
            assert!((reward(&fsc, 1, &[1.0 - a, a]).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn reward_rejects_forbidden_input() {
        let fsc = one_inf(0.1);
        assert!(matches!(reward(&fsc, 0, &[0.5, 0.5]), Err(Error::ForbiddenInput { state: 0, input: 1 })));
        assert!(matches!(reward(&fsc, 1, &[0.5, 0.4]), Err(Error::InvalidRow { .. })));
    }

    #[test]
    fn belief_reward_agrees_at_point_masses() {
        let fsc = one_inf(0.15);
        let rows = vec![vec![1.0, 0.0], vec![0.6, 0.4]];
        for s in 0..2 {
            let z = DpState::point_mass(2, s);
            assert!((belief_reward(&fsc, &z, &rows) - reward(&fsc, s, &rows[s]).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn next_state_of_point_masses() {
        let fsc = one_inf(0.1);
        let z = DpState::point_mass(2, 1);
        assert_eq!(next_dp_state(&fsc, &z, 1).point_mass_index(), Some(0));
        assert_eq!(next_dp_state(&fsc, &z, 0).point_mass_index(), Some(1));
        let uniform = DpState::from_belief(vec![0.5, 0.5]).unwrap();
        assert_eq!(uniform.point_mass_index(), None);
        assert_eq!(next_dp_state(&fsc, &uniform, 0).point_mass_index(), Some(1));
    }

    #[test]
    fn disturbance_law_cases() {
        let rows = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        assert_eq!(disturbance_law(&DpState::point_mass(2, 1), &rows), vec![0.5, 0.5]);
        assert_eq!(disturbance_law(&DpState::point_mass(2, 0), &rows), vec![1.0, 0.0]);
        let mixed = DpState::from_belief(vec![0.5, 0.5]).unwrap();
        assert_eq!(disturbance_law(&mixed, &rows), vec![0.75, 0.25]);
    }

    #[test]
    fn solver_pins_initial_state_and_certifies() {
        let fsc = one_inf(0.1);
        let sol = solve_average_reward(&fsc, &SolverOptions::default()).unwrap();
        assert_eq!(sol.h[0], 0.0);
        assert!(sol.converged);
        assert!(sol.bellman_residual <= 1e-10);
        assert!(sol.increment_bounds.0 <= sol.rho && sol.rho <= sol.increment_bounds.1);
        assert!(sol.final_span < 1e-12);
        let check = bellman_residual(&fsc, sol.rho, &sol.h, &SolverOptions::default()).unwrap();
        assert!(check <= 1e-10);
    }

    #[test]
    fn single_output_channel_has_zero_rate() {
        let fsc = Fsc::new(vec![vec![0, 1], vec![1, 0]], vec![vec![vec![1.0]; 2]; 2], 0).unwrap();
        let sol = solve_average_reward(&fsc, &SolverOptions::default()).unwrap();
        assert_eq!(sol.rho, 0.0);
    }

    #[test]
    fn unreachable_states_rejected() {
        let w = vec![vec![vec![0.9, 0.1], vec![0.1, 0.9]]; 2];
        let fsc = Fsc::new(vec![vec![0, 0], vec![1, 0]], w, 0).unwrap();
        assert!(matches!(solve_average_reward(&fsc, &SolverOptions::default()), Err(Error::Unreachable(v)) if v == vec![1]));
    }

    #[test]
    fn perturbed_rho_fails_certification() {
        let fsc = one_inf(0.2);
        let opts = SolverOptions::default();
        let sol = solve_average_reward(&fsc, &opts).unwrap();
        let r = bellman_residual(&fsc, sol.rho + 0.01, &sol.h, &opts).unwrap();
        assert!(r >= 0.009, "{r}");
    }

    #[test]
    fn h_dimension_checked() {
        let fsc = one_inf(0.2);
        assert!(matches!(
            bellman_residual(&fsc, 0.0, &[0.0], &SolverOptions::default()),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn absorbing_degenerate_action_is_tolerated() {
        // At p = 0.5 the reward is zero everywhere; ties resolve to a = 0,
        // which makes state d absorbing. The iteration must still settle.
        let fsc = make_rll_dmc(RllSpec::d_inf(2), Dmc::Bsc(0.5)).unwrap();
        let sol = solve_average_reward(&fsc, &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.rho.abs() < 1e-15);
        assert_eq!(sol.policy.rows[2], vec![1.0, 0.0]);
    }

    #[test]
    fn ternary_input_channel_recovers_dmc_capacity() {
        // Single state, three inputs; inputs 0 and 2 are noiseless, input 1 is a
        // fair coin. Capacity is 1 bit, reached with P(x=1) = 0.
        let w = vec![vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]];
        let fsc = Fsc::new(vec![vec![0, 0, 0]], w, 0).unwrap();
        let sol = solve_average_reward(&fsc, &SolverOptions::default()).unwrap();
        assert!((sol.rho - 1.0).abs() < 1e-8, "{}", sol.rho);
        assert!(sol.converged);
    }

    #[test]
    fn state_k_forced_to_one() {
        let fsc = make_rll_dmc(RllSpec::new(0, RunLimit::Finite(2)).unwrap(), Dmc::Bsc(0.1)).unwrap();
        let sol = solve_average_reward(&fsc, &SolverOptions::default()).unwrap();
        assert_eq!(sol.policy.rows[2], vec![0.0, 1.0]);
        assert_eq!(sol.policy.free_parameters(&fsc).len(), 2);
    }
}
