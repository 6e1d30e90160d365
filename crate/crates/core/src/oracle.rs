//! Independent ground truth at desk scale.
//!
//! Everything here is computed by brute force from the channel definition:
//! N-letter information quantities by enumerating every `(x^N, y^N)`, the
//! per-step reward sum by enumerating input histories, noiseless constraint
//! capacities by power iteration on the adjacency matrix, and stationary
//! policy rewards both exactly and by Monte Carlo. None of it shares code with
//! the dynamic-programming solver beyond the entropy helpers.
//!
//! Input histories are encoded base `|X|` with the most recent symbol as the
//! least significant digit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::channel::{ConstraintGraph, Fsc};
use crate::dp::Policy;
use crate::info::{entropy, mutual_information, KahanSum};
use crate::markov::{absorption_probabilities, closed_classes, stationary_on_class};
use crate::{Error, Result};

/// Limit on `|X|^N |Y|^N` for full joint enumeration.
pub const JOINT_ENUMERATION_LIMIT: usize = 10_000_000;
/// Limit on `|X|^N` for input-history enumeration.
pub const HISTORY_ENUMERATION_LIMIT: usize = 1_000_000;
/// Tolerance used by the conservation checks.
pub const CONSERVATION_TOL: f64 = 1e-10;

/// Published seeds of the randomized channel corpus.
pub const CORPUS_SEEDS: [u64; 20] = [
    1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584, 4181, 6765, 10946,
];

/// Input distribution given the past inputs `x^{t-1}` (no output feedback).
pub trait InputLaw {
    fn num_inputs(&self) -> usize;
    /// `P(x_t = . | x^{t-1} = history)`.
    fn prob(&self, history: &[usize]) -> Vec<f64>;
}

/// A stationary Markov policy `P(x | s)` lifted to input histories.
#[derive(Debug, Clone)]
pub struct MarkovPolicyLaw {
    next_state: Vec<Vec<usize>>,
    initial_state: usize,
    rows: Vec<Vec<f64>>,
}

impl MarkovPolicyLaw {
    pub fn new(fsc: &Fsc, policy: &Policy) -> Self {
        MarkovPolicyLaw { next_state: fsc.next_state.clone(), initial_state: fsc.initial_state, rows: policy.rows.clone() }
    }
}

impl InputLaw for MarkovPolicyLaw {
    fn num_inputs(&self) -> usize {
        self.rows[0].len()
    }

    fn prob(&self, history: &[usize]) -> Vec<f64> {
        let s = history.iter().fold(self.initial_state, |s, &x| self.next_state[s][x]);
        self.rows[s].clone()
    }
}

/// An explicit table of conditionals, one per history up to a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedLaw {
    num_inputs: usize,
    /// `rows[t][code]` for histories of length `t`.
    rows: Vec<Vec<Vec<f64>>>,
}

impl TabulatedLaw {
    /// Flat Dirichlet conditionals for every history shorter than `horizon`.
    pub fn random<R: Rng>(num_inputs: usize, horizon: usize, rng: &mut R) -> Self {
        let rows = (0..horizon)
            .map(|t| (0..num_inputs.pow(t as u32)).map(|_| dirichlet(num_inputs, rng)).collect())
            .collect();
        TabulatedLaw { num_inputs, rows }
    }

    pub fn horizon(&self) -> usize {
        self.rows.len()
    }
}

impl InputLaw for TabulatedLaw {
    fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    fn prob(&self, history: &[usize]) -> Vec<f64> {
        let code = history.iter().fold(0, |c, &x| c * self.num_inputs + x);
        self.rows[history.len()][code].clone()
    }
}

fn dirichlet<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let g: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// N-letter information quantities from the known initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceStats {
    pub n: usize,
    /// `I(X^N; Y^N | s_0)`.
    pub mutual_info: f64,
    /// `I(Y^N -> X^N) = Σ_t I(Y^t; X_t | X^{t-1})`.
    pub reverse_di: f64,
    /// `I(X^{N-1} -> Y^N) = Σ_t I(X^{t-1}; Y_t | Y^{t-1})`.
    pub forward_lagged_di: f64,
    /// `Σ_t I(X_t, S_{t-1}; Y_t | X^{t-1})`.
    pub reward_sum: f64,
}

impl SequenceStats {
    /// `|I - (reverse + forward lagged)|`.
    pub fn conservation_error(&self) -> f64 {
        (self.mutual_info - self.reverse_di - self.forward_lagged_di).abs()
    }
}

fn guard(base: usize, exp: usize, limit: usize) -> Result<()> {
    let size = (base as f64).powi(exp as i32);
    if size > limit as f64 {
        return Err(Error::EnumerationGuard { size, limit: limit as f64 });
    }
    Ok(())
}

fn kahan_entropy<'a, I: IntoIterator<Item = &'a f64>>(masses: I) -> f64 {
    masses.into_iter().map(|&p| crate::info::neg_plogp(p)).collect::<KahanSum>().value()
}

fn decode(code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    let mut c = code;
    for slot in out.iter_mut().rev() {
        *slot = c % base;
        c /= base;
    }
    out
}

fn check_law_row(fsc: &Fsc, s: usize, row: &[f64]) -> Result<()> {
    if row.len() != fsc.num_inputs() {
        return Err(Error::DimensionMismatch { expected: fsc.num_inputs(), got: row.len() });
    }
    match row.iter().enumerate().find(|&(x, &p)| p > 0.0 && !fsc.allowed[s][x]) {
        Some((x, _)) => Err(Error::ForbiddenInput { state: s, input: x }),
        None => Ok(()),
    }
}

/// Histories of one length: `P(x^t)`, the state `s_t(x^t)` and the input
/// conditional after each history (empty for the last layer).
type HistoryLayer = (Vec<f64>, Vec<usize>, Vec<Vec<f64>>);

/// Layer-by-layer input-history law for `t = 0..=n`.
fn history_layers(fsc: &Fsc, law: &dyn InputLaw, n: usize) -> Result<Vec<HistoryLayer>> {
    let nx = fsc.num_inputs();
    let mut layers = Vec::with_capacity(n + 1);
    let mut px = vec![1.0];
    let mut st = vec![fsc.initial_state];
    for t in 0..=n {
        let mut rows = Vec::new();
        if t < n {
            rows.reserve(px.len());
            for (code, &s) in st.iter().enumerate() {
                let row = law.prob(&decode(code, nx, t));
                check_law_row(fsc, s, &row)?;
                rows.push(row);
            }
        }
        let next = if t < n {
            let mut npx = Vec::with_capacity(px.len() * nx);
            let mut nst = Vec::with_capacity(px.len() * nx);
            for (code, &p) in px.iter().enumerate() {
                for x in 0..nx {
                    npx.push(p * rows[code][x]);
                    nst.push(fsc.next_state[st[code]][x]);
                }
            }
            Some((npx, nst))
        } else {
            None
        };
        layers.push((px, st, rows));
        match next {
            Some((a, b)) => {
                px = a;
                st = b;
            }
            None => break,
        }
    }
    Ok(layers)
}

fn reward_sum_from_layers(fsc: &Fsc, layers: &[HistoryLayer], n: usize) -> f64 {
    let mut total = KahanSum::new();
    for (px, st, rows) in &layers[..n] {
        for (code, &p) in px.iter().enumerate() {
            if p > 0.0 {
                total.add(p * mutual_information(&rows[code], fsc.channel_at(st[code])));
            }
        }
    }
    total.value()
}

/// All four N-letter quantities by enumeration of `(x^N, y^N)`.
pub fn exact_sequence_stats(fsc: &Fsc, law: &dyn InputLaw, n: usize) -> Result<SequenceStats> {
    fsc.ensure_valid()?;
    let nx = fsc.num_inputs();
    let ny = fsc.num_outputs();
    guard(nx * ny, n, JOINT_ENUMERATION_LIMIT)?;
    let layers = history_layers(fsc, law, n)?;

    // joint[xcode * ny^t + ycode] = P(x^t, y^t).
    let mut joint = vec![1.0];
    let mut h_xy_prev = 0.0;
    let mut h_y_prev = 0.0;
    let mut h_x_prev = 0.0;
    let mut reverse = KahanSum::new();
    let mut forward = KahanSum::new();
    for t in 1..=n {
        let (_, st, rows) = &layers[t - 1];
        let ny_prev = ny.pow((t - 1) as u32);
        let ny_t = ny_prev * ny;
        let nx_prev = nx.pow((t - 1) as u32);
        let mut next = vec![0.0; nx_prev * nx * ny_t];
        // P(x^{t-1}, y^t).
        let mut lagged = vec![0.0; nx_prev * ny_t];
        for xc in 0..nx_prev {
            let s = st[xc];
            for yc in 0..ny_prev {
                let p = joint[xc * ny_prev + yc];
                if p == 0.0 {
                    continue;
                }
                for x in 0..nx {
                    let px = p * rows[xc][x];
                    for y in 0..ny {
                        let v = px * fsc.emission[s][x][y];
                        next[(xc * nx + x) * ny_t + yc * ny + y] = v;
                        lagged[xc * ny_t + yc * ny + y] += v;
                    }
                }
            }
        }
        let mut py = vec![0.0; ny_t];
        for (i, &v) in lagged.iter().enumerate() {
            py[i % ny_t] += v;
        }
        let h_x = kahan_entropy(&layers[t].0);
        let h_xy = kahan_entropy(&next);
        let h_y = kahan_entropy(&py);
        let h_lag = kahan_entropy(&lagged);
        reverse.add(h_x - h_x_prev - h_xy + h_lag);
        forward.add(h_y - h_y_prev - h_lag + h_xy_prev);
        h_x_prev = h_x;
        h_xy_prev = h_xy;
        h_y_prev = h_y;
        joint = next;
    }
    let mutual_info = h_x_prev + h_y_prev - h_xy_prev;
    Ok(SequenceStats {
        n,
        mutual_info,
        reverse_di: reverse.value(),
        forward_lagged_di: forward.value(),
        reward_sum: reward_sum_from_layers(fsc, &layers, n),
    })
}

/// `(1/N) Σ_{t=1}^N I(X_t, S_{t-1}; Y_t | X^{t-1})` for a stationary policy,
/// by enumeration of input histories.
pub fn reward_rate_oracle(fsc: &Fsc, policy: &Policy, n: usize) -> Result<f64> {
    fsc.ensure_valid()?;
    if n == 0 {
        return Ok(0.0);
    }
    guard(fsc.num_inputs(), n, HISTORY_ENUMERATION_LIMIT)?;
    let law = MarkovPolicyLaw::new(fsc, policy);
    let layers = history_layers(fsc, &law, n - 1)?;
    // The last layer holds histories of length n - 1 without conditionals.
    let mut total = KahanSum::new();
    for (t, (px, st, rows)) in layers.iter().enumerate() {
        for (code, &p) in px.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let row = if t + 1 < layers.len() { rows[code].clone() } else { law.prob(&decode(code, fsc.num_inputs(), t)) };
            total.add(p * mutual_information(&row, fsc.channel_at(st[code])));
        }
    }
    Ok(total.value() / n as f64)
}

/// `log2` of the Perron eigenvalue of the adjacency matrix.
///
/// Power iteration runs on `A + I` (aperiodic for any irreducible `A`) and
/// stops when the Collatz–Wielandt bounds agree to a relative 1e-12.
pub fn spectral_noiseless_capacity(g: &ConstraintGraph) -> Result<f64> {
    if g.edges.is_empty() || !g.is_irreducible() {
        return Err(Error::Reducible);
    }
    let a = g.adjacency();
    let n = g.num_states;
    let mut v = vec![1.0; n];
    let mut lambda = 1.0;
    for _ in 0..1_000_000 {
        let w: Vec<f64> = (0..n).map(|i| v[i] + (0..n).map(|j| a[i][j] as f64 * v[j]).sum::<f64>()).collect();
        let ratios = w.iter().zip(&v).map(|(wi, vi)| wi / vi);
        let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        lambda = 0.5 * (lo + hi);
        let norm = w.iter().cloned().fold(0.0, f64::max);
        v = w.into_iter().map(|x| x / norm).collect();
        if hi - lo <= 1e-12 * lambda {
            break;
        }
    }
    Ok((lambda - 1.0).log2())
}

/// Closed class of the policy-induced state chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    pub members: Vec<usize>,
    /// Probability of ending in this class from the initial state.
    pub absorption: f64,
    pub stationary: Vec<f64>,
    pub average_reward: f64,
}

/// Exact and simulated long-run reward of a stationary policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyChainStats {
    /// Long-run state law from the initial state.
    pub stationary: Vec<f64>,
    pub exact_average_reward: f64,
    pub mc_estimate: f64,
    /// Batch-means standard error of `mc_estimate`.
    pub mc_stderr: f64,
    pub closed_classes: Vec<ClassStats>,
}

const MC_BATCHES: usize = 100;

/// Solve for the stationary law of the chain `s -> f(s, x)`, `x ~ policy(s)`,
/// and estimate the average per-step reward along one seeded trajectory.
///
/// With several closed classes the exact part is reported per class and
/// weighted by absorption probability from the initial state.
pub fn simulate_policy(fsc: &Fsc, policy: &Policy, steps: usize, seed: u64) -> Result<PolicyChainStats> {
    fsc.ensure_valid()?;
    let policy = Policy::new(fsc, policy.rows.clone())?;
    let n = fsc.num_states();
    let mut p = vec![vec![0.0; n]; n];
    for s in 0..n {
        for (x, &q) in policy.rows[s].iter().enumerate() {
            p[s][fsc.next_state[s][x]] += q;
        }
    }
    let r: Vec<f64> = (0..n).map(|s| mutual_information(&policy.rows[s], fsc.channel_at(s))).collect();

    let classes = closed_classes(&p, &vec![true; n]);
    let absorb = absorption_probabilities(&p, &classes, fsc.initial_state)?;
    let mut stationary = vec![0.0; n];
    let mut exact = 0.0;
    let mut class_stats = Vec::with_capacity(classes.len());
    for (members, w) in classes.into_iter().zip(absorb) {
        let pi = stationary_on_class(&p, &members)?;
        let avg: f64 = pi.iter().zip(&r).map(|(a, b)| a * b).sum();
        for (acc, v) in stationary.iter_mut().zip(&pi) {
            *acc += w * v;
        }
        exact += w * avg;
        class_stats.push(ClassStats { members, absorption: w, stationary: pi, average_reward: avg });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batches = MC_BATCHES.min(steps.max(1));
    let per_batch = (steps / batches).max(1);
    let mut means = Vec::with_capacity(batches);
    let mut s = fsc.initial_state;
    for _ in 0..batches {
        let mut acc = KahanSum::new();
        for _ in 0..per_batch {
            acc.add(r[s]);
            let u: f64 = rng.random();
            let row = &policy.rows[s];
            let mut x = row.len() - 1;
            let mut cum = 0.0;
            for (i, &q) in row.iter().enumerate() {
                cum += q;
                if u < cum {
                    x = i;
                    break;
                }
            }
            while row[x] == 0.0 {
                x -= 1;
            }
            s = fsc.next_state[s][x];
        }
        means.push(acc.value() / per_batch as f64);
    }
    let b = means.len() as f64;
    let mc = means.iter().sum::<f64>() / b;
    let var = if means.len() > 1 { means.iter().map(|m| (m - mc).powi(2)).sum::<f64>() / (b - 1.0) } else { 0.0 };
    Ok(PolicyChainStats {
        stationary,
        exact_average_reward: exact,
        mc_estimate: mc,
        mc_stderr: (var / b).sqrt(),
        closed_classes: class_stats,
    })
}

/// A randomized small channel with a random history-dependent input law.
#[derive(Debug, Clone)]
pub struct CorpusCase {
    pub seed: u64,
    pub fsc: Fsc,
    pub law: TabulatedLaw,
    pub n: usize,
}

/// `|S| <= 3`, binary input and output, uniform random `f`, flat Dirichlet
/// emission rows, horizon `N <= 5`.
pub fn random_case(seed: u64) -> CorpusCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = rng.random_range(1..=3);
    let next_state = (0..ns).map(|_| (0..2).map(|_| rng.random_range(0..ns)).collect()).collect();
    let emission = (0..ns).map(|_| (0..2).map(|_| dirichlet(2, &mut rng)).collect()).collect();
    let s0 = rng.random_range(0..ns);
    let n = rng.random_range(1..=5);
    let fsc = Fsc::new(next_state, emission, s0).expect("corpus channel is well formed");
    let law = TabulatedLaw::random(2, n, &mut rng);
    CorpusCase { seed, fsc, law, n }
}

/// Outcome of one conservation-law check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationCheck {
    pub seed: u64,
    pub stats: SequenceStats,
    /// `I = reverse + forward lagged` within tolerance.
    pub conservation: bool,
    /// `I >= reverse`.
    pub mi_dominates: bool,
    /// `reverse >= reward sum`.
    pub reward_dominated: bool,
}

impl ConservationCheck {
    pub fn passed(&self) -> bool {
        self.conservation && self.mi_dominates && self.reward_dominated
    }
}

/// Run the conservation checks on the corpus, each published seed mixed
/// with `seed`. Cases run concurrently; results are in corpus order.
pub fn conservation_suite(seed: u64) -> Vec<ConservationCheck> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = CORPUS_SEEDS
            .iter()
            .map(|&base| {
                scope.spawn(move || {
                    let case = random_case(base ^ seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                    let stats = exact_sequence_stats(&case.fsc, &case.law, case.n).expect("corpus fits the guard");
                    ConservationCheck {
                        seed: case.seed,
                        stats,
                        conservation: stats.conservation_error() <= CONSERVATION_TOL,
                        mi_dominates: stats.mutual_info >= stats.reverse_di - CONSERVATION_TOL,
                        reward_dominated: stats.reverse_di >= stats.reward_sum - CONSERVATION_TOL,
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("corpus case panicked")).collect()
    })
}

/// Entropy of the input law over `x^N`, for checks against noiseless channels.
pub fn input_entropy(fsc: &Fsc, law: &dyn InputLaw, n: usize) -> Result<f64> {
    let layers = history_layers(fsc, law, n)?;
    Ok(entropy(&layers[n].0))
}
