//! Input-driven finite-state channels.
//!
//! A channel is described by its alphabets, a total deterministic next-state
//! table `f(s, x)`, an emission law `W[s][x][y] = P(y | x, s)`, a known initial
//! state and a per-state mask of allowed inputs. Constrained inputs stay in the
//! tables; the mask removes them from the action set of the solvers.
//!
//! For `(d,k)`-RLL constraints the state counts the current run of zeros since
//! the last one, capped at `d` when `k` is infinite and running up to `k`
//! otherwise. State `0` means "a one was just sent", which is also the initial
//! state.

pub(crate) mod file;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use file::{parse_channel, ChannelFile};

/// Tolerance on `Σ_y W[s][x][y] = 1`.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// An input-driven finite-state channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Fsc {
    pub state_names: Vec<String>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    /// `next_state[s][x] = f(s, x)`.
    pub next_state: Vec<Vec<usize>>,
    /// `emission[s][x][y] = P(y | x, s)`.
    pub emission: Vec<Vec<Vec<f64>>>,
    /// `allowed[s][x]` is false when input `x` violates the input constraint at `s`.
    pub allowed: Vec<Vec<bool>>,
    pub initial_state: usize,
}

impl Fsc {
    /// Build a channel with every input allowed, rejecting malformed tables.
    pub fn new(
        next_state: Vec<Vec<usize>>,
        emission: Vec<Vec<Vec<f64>>>,
        initial_state: usize,
    ) -> Result<Self> {
        let n_s = next_state.len();
        let n_x = next_state.first().map_or(0, Vec::len);
        let n_y = emission.first().and_then(|r| r.first()).map_or(0, Vec::len);
        let fsc = Fsc {
            state_names: (0..n_s).map(|i| i.to_string()).collect(),
            input_names: (0..n_x).map(|i| i.to_string()).collect(),
            output_names: (0..n_y).map(|i| i.to_string()).collect(),
            allowed: vec![vec![true; n_x]; n_s],
            next_state,
            emission,
            initial_state,
        };
        fsc.ensure_valid()?;
        Ok(fsc)
    }

    /// Replace the allowed-input mask, revalidating.
    pub fn with_allowed(mut self, allowed: Vec<Vec<bool>>) -> Result<Self> {
        self.allowed = allowed;
        self.ensure_valid()?;
        Ok(self)
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.input_names.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.output_names.len()
    }

    /// Inputs allowed at state `s`, in index order.
    pub fn allowed_inputs(&self, s: usize) -> Vec<usize> {
        (0..self.num_inputs()).filter(|&x| self.allowed[s][x]).collect()
    }

    /// The channel matrix `P(y | x, s)` at state `s`.
    pub fn channel_at(&self, s: usize) -> &[Vec<f64>] {
        &self.emission[s]
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = validate(self);
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidChannel(report))
        }
    }

    /// States reachable from the initial state through allowed inputs.
    pub fn reachable_states(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.initial_state];
        seen[self.initial_state] = true;
        while let Some(s) = stack.pop() {
            for x in self.allowed_inputs(s) {
                let t = self.next_state[s][x];
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// The labelled state graph restricted to allowed inputs.
    pub fn state_graph(&self) -> ConstraintGraph {
        let mut edges = Vec::new();
        for s in 0..self.num_states() {
            for x in self.allowed_inputs(s) {
                edges.push(LabeledEdge { from: s, label: x, to: self.next_state[s][x] });
            }
        }
        ConstraintGraph { num_states: self.num_states(), edges }
    }
}

/// One failed well-formedness condition of an [`Fsc`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyAlphabet(&'static str),
    NameCount { what: &'static str, expected: usize, got: usize },
    MissingTransition { state: usize, input: usize },
    TransitionOutOfRange { state: usize, input: usize, target: usize },
    MissingEmission { state: usize, input: usize },
    EmissionLength { state: usize, input: usize, expected: usize, got: usize },
    ProbabilityOutOfRange { state: usize, input: usize, output: usize, value: f64 },
    NotStochastic { state: usize, input: usize, sum: f64 },
    InitialStateOutOfRange(usize),
    AllowedShape { state: usize },
    NoAllowedInput { state: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            EmptyAlphabet(what) => write!(f, "{what} alphabet is empty"),
            NameCount { what, expected, got } => write!(f, "{what}: expected {expected} names, got {got}"),
            MissingTransition { state, input } => write!(f, "next_state missing for (state {state}, input {input})"),
            TransitionOutOfRange { state, input, target } => {
                write!(f, "next_state({state}, {input}) = {target} is not a state")
            }
            MissingEmission { state, input } => write!(f, "emission missing for (state {state}, input {input})"),
            EmissionLength { state, input, expected, got } => {
                write!(f, "emission({state}, {input}) has {got} entries, expected {expected}")
            }
            ProbabilityOutOfRange { state, input, output, value } => {
                write!(f, "emission({state}, {input})[{output}] = {value} is outside [0, 1]")
            }
            NotStochastic { state, input, sum } => write!(f, "emission({state}, {input}) sums to {sum}, not 1"),
            InitialStateOutOfRange(s) => write!(f, "initial state {s} is not a state"),
            AllowedShape { state } => write!(f, "allowed mask for state {state} has the wrong length"),
            NoAllowedInput { state } => write!(f, "state {state} allows no input"),
        }
    }
}

/// Every violated invariant of a channel; empty iff the channel is well formed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Check every structural invariant of `fsc`.
pub fn validate(fsc: &Fsc) -> ValidationReport {
    let mut v = Vec::new();
    let n_s = fsc.next_state.len();
    let n_x = fsc.input_names.len();
    let n_y = fsc.output_names.len();
    if n_s == 0 {
        v.push(Violation::EmptyAlphabet("state"));
    }
    if n_x == 0 {
        v.push(Violation::EmptyAlphabet("input"));
    }
    if n_y == 0 {
        v.push(Violation::EmptyAlphabet("output"));
    }
    if fsc.state_names.len() != n_s {
        v.push(Violation::NameCount { what: "states", expected: n_s, got: fsc.state_names.len() });
    }
    if fsc.emission.len() != n_s {
        for s in fsc.emission.len()..n_s {
            for x in 0..n_x {
                v.push(Violation::MissingEmission { state: s, input: x });
            }
        }
    }
    if fsc.initial_state >= n_s {
        v.push(Violation::InitialStateOutOfRange(fsc.initial_state));
    }
    for s in 0..n_s {
        let row = &fsc.next_state[s];
        for x in 0..n_x {
            match row.get(x) {
                None => v.push(Violation::MissingTransition { state: s, input: x }),
                Some(&t) if t >= n_s => v.push(Violation::TransitionOutOfRange { state: s, input: x, target: t }),
                _ => {}
            }
        }
        if let Some(em) = fsc.emission.get(s) {
            for x in 0..n_x {
                let Some(w) = em.get(x) else {
                    v.push(Violation::MissingEmission { state: s, input: x });
                    continue;
                };
                if w.len() != n_y {
                    v.push(Violation::EmissionLength { state: s, input: x, expected: n_y, got: w.len() });
                    continue;
                }
                for (y, &p) in w.iter().enumerate() {
                    if !(0.0..=1.0).contains(&p) || p.is_nan() {
                        v.push(Violation::ProbabilityOutOfRange { state: s, input: x, output: y, value: p });
                    }
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    v.push(Violation::NotStochastic { state: s, input: x, sum });
                }
            }
        }
        match fsc.allowed.get(s) {
            Some(mask) if mask.len() == n_x => {
                if n_x > 0 && !mask.iter().any(|&a| a) {
                    v.push(Violation::NoAllowedInput { state: s });
                }
            }
            _ => v.push(Violation::AllowedShape { state: s }),
        }
    }
    ValidationReport { violations: v }
}

/// Upper limit on zero runs: a finite `k` or no limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunLimit {
    Finite(usize),
    Infinite,
}

impl fmt::Display for RunLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunLimit::Finite(k) => write!(f, "{k}"),
            RunLimit::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for RunLimit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(RunLimit::Infinite);
        }
        t.parse::<usize>()
            .map(RunLimit::Finite)
            .map_err(|_| Error::Parse(format!("invalid run limit {s:?}; expected an integer or \"inf\"")))
    }
}

impl Serialize for RunLimit {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RunLimit::Finite(k) => serializer.serialize_u64(*k as u64),
            RunLimit::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for RunLimit {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(k) => Ok(RunLimit::Finite(k as usize)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A `(d,k)` run-length-limited constraint, `0 <= d < k <= inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRll")]
pub struct RllSpec {
    d: usize,
    k: RunLimit,
}

#[derive(Deserialize)]
struct RawRll {
    d: usize,
    k: RunLimit,
}

impl TryFrom<RawRll> for RllSpec {
    type Error = Error;

    fn try_from(raw: RawRll) -> Result<Self> {
        RllSpec::new(raw.d, raw.k)
    }
}

impl RllSpec {
    pub fn new(d: usize, k: RunLimit) -> Result<Self> {
        if let RunLimit::Finite(k) = k {
            if d >= k {
                return Err(Error::InvalidRll { d, k: k.to_string() });
            }
        }
        Ok(RllSpec { d, k })
    }

    /// `(d, inf)`, always valid.
    pub fn d_inf(d: usize) -> Self {
        RllSpec { d, k: RunLimit::Infinite }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> RunLimit {
        self.k
    }

    pub fn num_states(&self) -> usize {
        match self.k {
            RunLimit::Infinite => self.d + 1,
            RunLimit::Finite(k) => k + 1,
        }
    }

    /// Whether a binary sequence, read after a preceding `1`, obeys the constraint.
    pub fn admits_after_one(&self, bits: &[u8]) -> bool {
        let mut run = 0usize;
        for &b in bits {
            if b == 1 {
                if run < self.d {
                    return false;
                }
                run = 0;
            } else {
                run += 1;
                if let RunLimit::Finite(k) = self.k {
                    if run > k {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl fmt::Display for RllSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.d, self.k)
    }
}

/// Memoryless binary-input channels used with RLL constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dmc {
    /// Binary symmetric channel with crossover probability `p`.
    Bsc(f64),
    /// Binary erasure channel with erasure probability `ε`; outputs `0, 1, e`.
    Bec(f64),
}

impl Dmc {
    pub fn parameter(&self) -> f64 {
        match *self {
            Dmc::Bsc(p) | Dmc::Bec(p) => p,
        }
    }

    pub fn output_names(&self) -> Vec<String> {
        match self {
            Dmc::Bsc(_) => vec!["0".into(), "1".into()],
            Dmc::Bec(_) => vec!["0".into(), "1".into(), "e".into()],
        }
    }

    /// `matrix()[x][y] = P(y | x)`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        match *self {
            Dmc::Bsc(p) => vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
            Dmc::Bec(e) => vec![vec![1.0 - e, 0.0, e], vec![0.0, 1.0 - e, e]],
        }
    }

    fn check(&self) -> Result<()> {
        let (what, v) = match *self {
            Dmc::Bsc(p) => ("BSC crossover probability", p),
            Dmc::Bec(e) => ("BEC erasure probability", e),
        };
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(Error::InvalidProbability { what, value: v })
        }
    }
}

impl fmt::Display for Dmc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dmc::Bsc(p) => write!(f, "BSC({p})"),
            Dmc::Bec(e) => write!(f, "BEC({e})"),
        }
    }
}

/// Edge `from --label--> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledEdge {
    pub from: usize,
    pub label: usize,
    pub to: usize,
}

/// Edge-labelled directed graph presenting a constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintGraph {
    pub num_states: usize,
    pub edges: Vec<LabeledEdge>,
}

impl ConstraintGraph {
    /// `A[i][j]` = number of edges from `i` to `j`.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut a = vec![vec![0; self.num_states]; self.num_states];
        for e in &self.edges {
            a[e.from][e.to] += 1;
        }
        a
    }

    /// Target of the edge leaving `from` with `label`, if any.
    pub fn follow(&self, from: usize, label: usize) -> Option<usize> {
        self.edges.iter().find(|e| e.from == from && e.label == label).map(|e| e.to)
    }

    /// No vertex has two outgoing edges with the same label.
    pub fn is_deterministic(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().all(|e| seen.insert((e.from, e.label)))
    }

    pub fn is_irreducible(&self) -> bool {
        let adj = self.adjacency();
        crate::markov::strongly_connected(|i| adj[i].iter().enumerate().filter(|(_, &c)| c > 0).map(|(j, _)| j).collect(), self.num_states)
    }
}

/// The constraint graph of a `(d,k)`-RLL constraint.
pub fn constraint_graph(spec: RllSpec) -> ConstraintGraph {
    let d = spec.d();
    let mut edges = Vec::new();
    match spec.k() {
        RunLimit::Infinite => {
            for s in 0..=d {
                edges.push(LabeledEdge { from: s, label: 0, to: (s + 1).min(d) });
                if s == d {
                    edges.push(LabeledEdge { from: s, label: 1, to: 0 });
                }
            }
        }
        RunLimit::Finite(k) => {
            for s in 0..=k {
                if s < k {
                    edges.push(LabeledEdge { from: s, label: 0, to: s + 1 });
                }
                if s >= d {
                    edges.push(LabeledEdge { from: s, label: 1, to: 0 });
                }
            }
        }
    }
    ConstraintGraph { num_states: spec.num_states(), edges }
}

/// The `(d,k)`-RLL input-constrained DMC as an input-driven FSC.
///
/// Forbidden inputs keep a next-state entry (a self-loop) so the table stays
/// total, and are masked out in `allowed`.
pub fn make_rll_dmc(spec: RllSpec, dmc: Dmc) -> Result<Fsc> {
    dmc.check()?;
    let g = constraint_graph(spec);
    let n = spec.num_states();
    let mut next_state = vec![vec![0usize; 2]; n];
    let mut allowed = vec![vec![false; 2]; n];
    for (s, row) in next_state.iter_mut().enumerate() {
        for x in 0..2 {
            match g.follow(s, x) {
                Some(t) => {
                    row[x] = t;
                    allowed[s][x] = true;
                }
                None => row[x] = s,
            }
        }
    }
    let w = dmc.matrix();
    Ok(Fsc {
        state_names: (0..n).map(|s| s.to_string()).collect(),
        input_names: vec!["0".into(), "1".into()],
        output_names: dmc.output_names(),
        next_state,
        emission: vec![w; n],
        allowed,
        initial_state: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(d: usize, k: usize) -> RllSpec {
        RllSpec::new(d, RunLimit::Finite(k)).unwrap()
    }

    #[test]
    fn rll_bsc_is_valid() {
        let fsc = make_rll_dmc(RllSpec::d_inf(1), Dmc::Bsc(0.1)).unwrap();
        assert!(validate(&fsc).is_empty());
    }

    #[test]
    fn short_emission_row_is_reported() {
        let mut fsc = make_rll_dmc(RllSpec::d_inf(1), Dmc::Bsc(0.1)).unwrap();
        fsc.emission[1][0] = vec![0.8, 0.1];
        let report = validate(&fsc);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotStochastic { state: 1, input: 0, .. })));
    }

    #[test]
    fn missing_transition_is_reported() {
        let mut fsc = make_rll_dmc(RllSpec::d_inf(1), Dmc::Bsc(0.1)).unwrap();
        fsc.next_state[0].pop();
        let report = validate(&fsc);
        assert_eq!(report.violations, vec![Violation::MissingTransition { state: 0, input: 1 }]);
    }

    #[test]
    fn one_inf_transitions() {
        let fsc = make_rll_dmc(RllSpec::d_inf(1), Dmc::Bsc(0.2)).unwrap();
        assert_eq!(fsc.num_states(), 2);
        assert_eq!(fsc.next_state[0][0], 1);
        assert_eq!(fsc.next_state[1][0], 1);
        assert_eq!(fsc.next_state[1][1], 0);
        assert_eq!(fsc.allowed, vec![vec![true, false], vec![true, true]]);
        assert_eq!(fsc.initial_state, 0);
    }

    #[test]
    fn zero_one_state_k_forces_one() {
        let fsc = make_rll_dmc(fin(0, 1), Dmc::Bec(0.0)).unwrap();
        assert_eq!(fsc.allowed_inputs(1), vec![1]);
        assert_eq!(fsc.allowed_inputs(0), vec![0, 1]);
        assert_eq!(fsc.next_state[1][1], 0);
    }

    #[test]
    fn two_inf_forces_zero_before_d() {
        let fsc = make_rll_dmc(RllSpec::d_inf(2), Dmc::Bsc(0.1)).unwrap();
        assert_eq!(fsc.num_states(), 3);
        assert_eq!(fsc.allowed_inputs(0), vec![0]);
        assert_eq!(fsc.allowed_inputs(1), vec![0]);
        assert_eq!(fsc.allowed_inputs(2), vec![0, 1]);
    }

    #[test]
    fn adjacency_matrices() {
        assert_eq!(constraint_graph(RllSpec::d_inf(1)).adjacency(), vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(constraint_graph(RllSpec::d_inf(0)).adjacency(), vec![vec![2]]);
        let g = constraint_graph(fin(0, 1));
        assert_eq!(g.edges.len(), 3);
        assert_eq!(g.adjacency(), vec![vec![1, 1], vec![1, 0]]);
    }

    #[test]
    fn graphs_deterministic_and_irreducible() {
        for d in 0..4 {
            let g = constraint_graph(RllSpec::d_inf(d));
            assert!(g.is_deterministic() && g.is_irreducible());
            for k in d + 1..9 {
                let g = constraint_graph(fin(d, k));
                assert!(g.is_deterministic() && g.is_irreducible(), "({d},{k})");
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(matches!(RllSpec::new(2, RunLimit::Finite(2)), Err(Error::InvalidRll { .. })));
        assert!(matches!(
            make_rll_dmc(RllSpec::d_inf(1), Dmc::Bsc(1.5)),
            Err(Error::InvalidProbability { .. })
        ));
        assert!(make_rll_dmc(RllSpec::d_inf(1), Dmc::Bec(-0.1)).is_err());
    }

    #[test]
    fn run_limit_serializes_inf() {
        let spec = RllSpec::d_inf(3);
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(s, r#"{"d":3,"k":"inf"}"#);
        let back: RllSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<RllSpec>(r#"{"d":3,"k":2}"#).is_err());
    }

    fn all_sequences(len: usize) -> impl Iterator<Item = Vec<u8>> {
        (0..1u32 << len).map(move |code| (0..len).map(|i| ((code >> (len - 1 - i)) & 1) as u8).collect())
    }

    fn follows_allowed(fsc: &Fsc, bits: &[u8]) -> bool {
        let mut s = fsc.initial_state;
        for &b in bits {
            if !fsc.allowed[s][b as usize] {
                return false;
            }
            s = fsc.next_state[s][b as usize];
        }
        true
    }

    #[test]
    fn allowed_paths_are_exactly_constrained_sequences() {
        let mut specs: Vec<RllSpec> = (0..4).map(RllSpec::d_inf).collect();
        specs.extend([fin(0, 1), fin(0, 2), fin(1, 3), fin(2, 5), fin(3, 4)]);
        for spec in specs {
            let fsc = make_rll_dmc(spec, Dmc::Bsc(0.1)).unwrap();
            for len in 0..=12 {
                for bits in all_sequences(len) {
                    assert_eq!(
                        follows_allowed(&fsc, &bits),
                        spec.admits_after_one(&bits),
                        "{spec} {bits:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn rll_emission_is_state_independent() {
        let fsc = make_rll_dmc(fin(1, 3), Dmc::Bec(0.3)).unwrap();
        for s in 1..fsc.num_states() {
            assert_eq!(fsc.emission[s], fsc.emission[0]);
        }
    }
}
