//! Single-letter lower bounds from input distributions on V-graphs.
//!
//! A V-graph is an irreducible labelled graph on auxiliary vertices with at
//! most one outgoing edge per input symbol, `Φ(v, x) = v'`. Paired with the
//! channel it gives the (S,V)-product graph with edges
//! `(s, v) --(x, y)--> (f(s, x), Φ(v, x))` wherever `P(y | x, s) > 0`. An input
//! distribution `Q(x | s, v)` on the product drives a Markov chain; when the
//! chain has a single closed communicating class that is aperiodic, its
//! stationary law `π(s, v)` gives the bound
//!
//! ```text
//! C >= I(X; Y | S, V),  P(x, y, s, v) = π(s, v) Q(x | s, v) P(y | x, s).
//! ```
//!
//! Product vertices from which no infinite feasible path exists are pruned:
//! a feasible input at `(s, v)` must be allowed at `s`, have a `Φ` edge at `v`,
//! and lead to a vertex that is itself kept. `Q` rows of pruned vertices are
//! all zero.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::channel::file::{index_of, located};
use crate::channel::Fsc;
use crate::dp::Policy;
use crate::info::KahanSum;
use crate::markov::{balance_residual, closed_classes, period, stationary_on_class, strongly_connected};
use crate::optim::{nelder_mead_max, softmax, NelderMeadOptions};
use crate::{Error, Result};

/// Tolerance on `Q` row sums.
pub const Q_ROW_TOL: f64 = 1e-12;

/// Labelled graph on auxiliary vertices; `phi[v][x]` is the successor of `v` on input `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct VGraph {
    names: Vec<String>,
    phi: Vec<Vec<Option<usize>>>,
    v0: Option<usize>,
}

impl VGraph {
    pub fn new(names: Vec<String>, phi: Vec<Vec<Option<usize>>>, v0: Option<usize>) -> Result<Self> {
        let n = phi.len();
        if n == 0 {
            return Err(Error::InvalidVGraph("no vertices".into()));
        }
        if names.len() != n {
            return Err(Error::InvalidVGraph(format!("{} names for {n} vertices", names.len())));
        }
        let width = phi[0].len();
        if phi.iter().any(|row| row.len() != width) {
            return Err(Error::InvalidVGraph("phi rows have different lengths".into()));
        }
        if let Some(bad) = phi.iter().flatten().flatten().find(|&&t| t >= n) {
            return Err(Error::InvalidVGraph(format!("phi points to missing vertex {bad}")));
        }
        if matches!(v0, Some(v) if v >= n) {
            return Err(Error::InvalidVGraph("v0 is not a vertex".into()));
        }
        if !strongly_connected(|v| phi[v].iter().flatten().copied().collect(), n) {
            return Err(Error::InvalidVGraph("graph is not irreducible".into()));
        }
        Ok(VGraph { names, phi, v0 })
    }

    /// One vertex with a self-loop on every input.
    pub fn trivial(num_inputs: usize) -> Self {
        VGraph { names: vec!["*".into()], phi: vec![vec![Some(0); num_inputs]], v0: None }
    }

    /// De Bruijn graph whose vertex is the last `memory` inputs, most recent last.
    pub fn input_memory(num_inputs: usize, memory: usize) -> Self {
        if memory == 0 {
            return Self::trivial(num_inputs);
        }
        let n = num_inputs.pow(memory as u32);
        let phi = (0..n).map(|v| (0..num_inputs).map(|x| Some((v * num_inputs + x) % n)).collect()).collect();
        let names = (0..n)
            .map(|v| {
                let mut digits = Vec::with_capacity(memory);
                let mut c = v;
                for _ in 0..memory {
                    digits.push((c % num_inputs).to_string());
                    c /= num_inputs;
                }
                digits.reverse();
                digits.join("")
            })
            .collect();
        VGraph { names, phi, v0: None }
    }

    /// A copy of the channel's state graph under allowed inputs.
    pub fn from_state_graph(fsc: &Fsc) -> Result<Self> {
        let phi = (0..fsc.num_states())
            .map(|s| (0..fsc.num_inputs()).map(|x| fsc.allowed[s][x].then(|| fsc.next_state[s][x])).collect())
            .collect();
        VGraph::new(fsc.state_names.clone(), phi, None)
    }

    pub fn num_vertices(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self, v: usize, x: usize) -> Option<usize> {
        self.phi[v].get(x).copied().flatten()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn v0(&self) -> Option<usize> {
        self.v0
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VGraphFile {
    vertices: Vec<String>,
    phi: BTreeMap<String, String>,
    #[serde(default)]
    v0: Option<String>,
}

/// Parse a JSON V-graph file against the channel's input alphabet.
///
/// ```json
/// { "vertices": ["a", "b"], "phi": { "a,0": "a", "a,1": "b", "b,0": "a" }, "v0": "a" }
/// ```
pub fn parse_vgraph(text: &str, fsc: &Fsc) -> Result<VGraph> {
    let file: VGraphFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}: {e}", e.line())))?;
    let n = file.vertices.len();
    let mut phi = vec![vec![None; fsc.num_inputs()]; n];
    let mut problems = Vec::new();
    for (key, target) in &file.phi {
        let parsed = key.split_once(',').and_then(|(v, x)| {
            Some((index_of(&file.vertices, v.trim())?, index_of(&fsc.input_names, x.trim())?))
        });
        match (parsed, index_of(&file.vertices, target)) {
            (Some((v, x)), Some(t)) => phi[v][x] = Some(t),
            (None, _) => problems.push(located(text, key, format!("phi key {key:?} is not \"vertex,input\" with known names"))),
            (_, None) => problems.push(located(text, key, format!("phi {key:?} -> {target:?}: unknown vertex"))),
        }
    }
    let v0 = match &file.v0 {
        Some(name) => match index_of(&file.vertices, name) {
            Some(v) => Some(v),
            None => {
                problems.push(located(text, "v0", format!("v0 {name:?} is not a vertex")));
                None
            }
        },
        None => None,
    };
    if !problems.is_empty() {
        return Err(Error::Parse(problems.join("\n")));
    }
    VGraph::new(file.vertices, phi, v0)
}

/// Edge `(s, v) --(input, output)--> (s', v')` of the product graph, carrying `P(y | x, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductEdge {
    pub from: usize,
    pub to: usize,
    pub input: usize,
    pub output: usize,
    pub prob: f64,
}

/// The (S,V)-graph. Vertex `(s, v)` has index `s * |V| + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGraph {
    pub num_states: usize,
    pub num_vertices: usize,
    pub num_inputs: usize,
    pub edges: Vec<ProductEdge>,
    /// Feasible inputs per product vertex; empty for pruned vertices.
    pub feasible: Vec<Vec<usize>>,
    pub alive: Vec<bool>,
}

impl ProductGraph {
    pub fn node(&self, s: usize, v: usize) -> usize {
        s * self.num_vertices + v
    }

    pub fn split(&self, node: usize) -> (usize, usize) {
        (node / self.num_vertices, node % self.num_vertices)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_states * self.num_vertices
    }
}

/// Build the (S,V)-graph of `fsc` and `vg`.
pub fn build_product(fsc: &Fsc, vg: &VGraph) -> ProductGraph {
    let n_v = vg.num_vertices();
    let n = fsc.num_states() * n_v;
    let step = |node: usize, x: usize| -> Option<usize> {
        let (s, v) = (node / n_v, node % n_v);
        if !fsc.allowed[s][x] {
            return None;
        }
        vg.phi(v, x).map(|v2| fsc.next_state[s][x] * n_v + v2)
    };
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for node in 0..n {
            if alive[node] && !(0..fsc.num_inputs()).any(|x| step(node, x).is_some_and(|t| alive[t])) {
                alive[node] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut feasible = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for node in (0..n).filter(|&u| alive[u]) {
        let s = node / n_v;
        for x in 0..fsc.num_inputs() {
            let Some(to) = step(node, x).filter(|&t| alive[t]) else { continue };
            feasible[node].push(x);
            for (y, &prob) in fsc.emission[s][x].iter().enumerate() {
                if prob > 0.0 {
                    edges.push(ProductEdge { from: node, to, input: x, output: y, prob });
                }
            }
        }
    }
    ProductGraph { num_states: fsc.num_states(), num_vertices: n_v, num_inputs: fsc.num_inputs(), edges, feasible, alive }
}

/// Input distribution `Q(x | s, v)` on a product graph.
#[derive(Debug, Clone, PartialEq)]
pub struct QDist {
    /// One row per product vertex, over all inputs.
    pub rows: Vec<Vec<f64>>,
    /// `G(Q)` has a single closed communicating class.
    pub in_class_q: bool,
    pub aperiodic: bool,
}

impl QDist {
    /// Validate rows against the product graph and classify them.
    pub fn new(pg: &ProductGraph, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != pg.num_nodes() {
            return Err(Error::DimensionMismatch { expected: pg.num_nodes(), got: rows.len() });
        }
        for (node, row) in rows.iter().enumerate() {
            if row.len() != pg.num_inputs {
                return Err(Error::DimensionMismatch { expected: pg.num_inputs, got: row.len() });
            }
            let (s, v) = pg.split(node);
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidRow { state: node, reason: format!("Q at ({s},{v}) has entries outside [0, 1]") });
            }
            for (x, &p) in row.iter().enumerate() {
                if p > 0.0 && !pg.feasible[node].contains(&x) {
                    return Err(Error::InvalidRow {
                        state: node,
                        reason: format!("Q({x} | {s},{v}) > 0 but input {x} is infeasible there"),
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            let expected = if pg.alive[node] { 1.0 } else { 0.0 };
            if (sum - expected).abs() > Q_ROW_TOL {
                return Err(Error::InvalidRow { state: node, reason: format!("Q at ({s},{v}) sums to {sum}") });
            }
        }
        let mut q = QDist { rows, in_class_q: false, aperiodic: false };
        let c = classify(pg, &q);
        q.in_class_q = c.single_class;
        q.aperiodic = c.aperiodic;
        Ok(q)
    }

    /// Uniform over feasible inputs at every kept vertex.
    pub fn uniform(pg: &ProductGraph) -> Self {
        let rows = pg
            .feasible
            .iter()
            .map(|f| {
                let mut row = vec![0.0; pg.num_inputs];
                f.iter().for_each(|&x| row[x] = 1.0 / f.len() as f64);
                row
            })
            .collect();
        QDist::new(pg, rows).expect("uniform rows are valid")
    }

    /// `Q(x | s, v) = policy(x | s)` restricted to feasible inputs and
    /// renormalized; uniform over feasible inputs where the policy puts no
    /// mass on any of them.
    pub fn from_policy(pg: &ProductGraph, policy: &Policy) -> Result<Self> {
        let rows = (0..pg.num_nodes())
            .map(|node| {
                let (s, _) = pg.split(node);
                let mut row = vec![0.0; pg.num_inputs];
                let f = &pg.feasible[node];
                let mass: f64 = f.iter().map(|&x| policy.rows[s][x]).sum();
                for &x in f {
                    row[x] = if mass > 0.0 { policy.rows[s][x] / mass } else { 1.0 / f.len() as f64 };
                }
                row
            })
            .collect();
        QDist::new(pg, rows)
    }

    pub fn q(&self, pg: &ProductGraph, s: usize, v: usize) -> &[f64] {
        &self.rows[pg.node(s, v)]
    }
}

/// Closed-class structure of `G(Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub single_class: bool,
    pub aperiodic: bool,
    /// Members of the unique closed class, or empty when there is not exactly one.
    pub class_members: Vec<usize>,
    pub closed_classes: Vec<Vec<usize>>,
    /// Period of the unique closed class, 0 when there is not exactly one.
    pub period: usize,
}

fn transition_matrix(pg: &ProductGraph, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = pg.num_nodes();
    let mut m = vec![vec![0.0; n]; n];
    for e in &pg.edges {
        m[e.from][e.to] += rows[e.from][e.input] * e.prob;
    }
    m
}

/// Communicating-class analysis of the chain induced by `q`.
pub fn classify(pg: &ProductGraph, q: &QDist) -> Classification {
    let m = transition_matrix(pg, &q.rows);
    let classes = closed_classes(&m, &pg.alive);
    let single_class = classes.len() == 1;
    let (members, per) = if single_class { (classes[0].clone(), period(&m, &classes[0])) } else { (Vec::new(), 0) };
    Classification { single_class, aperiodic: single_class && per == 1, class_members: members, closed_classes: classes, period: per }
}

/// Stationary distribution on the product graph and the induced joint law.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDist {
    /// `π(s, v)` per product vertex.
    pub pi: Vec<f64>,
    /// `joint[node][x][y] = π(s, v) Q(x | s, v) P(y | x, s)`.
    pub joint: Vec<Vec<Vec<f64>>>,
    /// `max |π M - π|`.
    pub residual: f64,
}

impl StationaryDist {
    pub fn joint_mass(&self) -> f64 {
        self.joint.iter().flatten().flatten().copied().collect::<KahanSum>().value()
    }
}

fn require_regular(c: &Classification) -> Result<()> {
    if !c.single_class {
        return Err(Error::NotSingleClass(c.closed_classes.len()));
    }
    if !c.aperiodic {
        return Err(Error::Periodic(c.period));
    }
    Ok(())
}

fn stationary_for_class(pg: &ProductGraph, rows: &[Vec<f64>], class: &[usize], fsc: &Fsc) -> Result<StationaryDist> {
    let m = transition_matrix(pg, rows);
    let pi = stationary_on_class(&m, class)?;
    let residual = balance_residual(&m, &pi);
    let joint = (0..pg.num_nodes())
        .map(|node| {
            let (s, _) = pg.split(node);
            (0..pg.num_inputs)
                .map(|x| fsc.emission[s][x].iter().map(|w| pi[node] * rows[node][x] * w).collect())
                .collect()
        })
        .collect();
    Ok(StationaryDist { pi, joint, residual })
}

/// Unique stationary law of the chain induced by `q`.
pub fn stationary(pg: &ProductGraph, q: &QDist, fsc: &Fsc) -> Result<StationaryDist> {
    let c = classify(pg, q);
    require_regular(&c)?;
    stationary_for_class(pg, &q.rows, &c.class_members, fsc)
}

fn conditional_mi(pg: &ProductGraph, rows: &[Vec<f64>], pi: &[f64], fsc: &Fsc) -> f64 {
    let mut total = KahanSum::new();
    for node in (0..pg.num_nodes()).filter(|&u| pi[u] > 0.0) {
        let (s, _) = pg.split(node);
        let w = &fsc.emission[s];
        let q = &rows[node];
        let out: Vec<f64> = (0..fsc.num_outputs()).map(|y| (0..pg.num_inputs).map(|x| q[x] * w[x][y]).sum()).collect();
        let mut local = KahanSum::new();
        for x in 0..pg.num_inputs {
            if q[x] <= 0.0 {
                continue;
            }
            for y in 0..fsc.num_outputs() {
                if w[x][y] > 0.0 {
                    local.add(q[x] * w[x][y] * (w[x][y] / out[y]).log2());
                }
            }
        }
        total.add(pi[node] * local.value());
    }
    total.value().max(0.0)
}

/// Strong connectivity of the state graph under allowed inputs.
pub fn check_connected(fsc: &Fsc) -> bool {
    strongly_connected(|s| fsc.allowed_inputs(s).into_iter().map(|x| fsc.next_state[s][x]).collect(), fsc.num_states())
}

/// Value of the single-letter bound with its supporting data.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleLetterBound {
    pub value: f64,
    /// Vertex paired with the initial channel state.
    pub v0: usize,
    pub stationary: StationaryDist,
}

fn select_v0(pg: &ProductGraph, vg: &VGraph, fsc: &Fsc, class: &[usize]) -> Result<usize> {
    let in_class = |v: usize| class.contains(&pg.node(fsc.initial_state, v));
    match vg.v0() {
        Some(v) if in_class(v) => Ok(v),
        Some(_) => Err(Error::NoInitialVertex),
        None => (0..vg.num_vertices()).find(|&v| in_class(v)).ok_or(Error::NoInitialVertex),
    }
}

/// `I_Q(X; Y | S, V)` with all preconditions checked.
pub fn single_letter_report(fsc: &Fsc, vg: &VGraph, q: &QDist) -> Result<SingleLetterBound> {
    if !check_connected(fsc) {
        return Err(Error::NotConnected);
    }
    let pg = build_product(fsc, vg);
    let q = QDist::new(&pg, q.rows.clone())?;
    let c = classify(&pg, &q);
    require_regular(&c)?;
    let v0 = select_v0(&pg, vg, fsc, &c.class_members)?;
    let st = stationary_for_class(&pg, &q.rows, &c.class_members, fsc)?;
    let value = conditional_mi(&pg, &q.rows, &st.pi, fsc);
    Ok(SingleLetterBound { value, v0, stationary: st })
}

/// The single-letter bound `I_Q(X; Y | S, V)` in bits.
pub fn single_letter_bound(fsc: &Fsc, vg: &VGraph, q: &QDist) -> Result<f64> {
    single_letter_report(fsc, vg, q).map(|r| r.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QOptimizerOptions {
    /// Random starts in addition to the uniform start.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for QOptimizerOptions {
    fn default() -> Self {
        Self { restarts: 16, seed: 0 }
    }
}

/// Search for the `Q` maximizing the single-letter bound.
///
/// Rows are parameterized by softmax logits over feasible inputs, so every
/// candidate has full support on the product graph and shares its closed-class
/// structure; feasibility is therefore decided once, at the uniform `Q`.
pub fn optimize_q(fsc: &Fsc, vg: &VGraph, opts: &QOptimizerOptions) -> Result<(QDist, f64)> {
    if !check_connected(fsc) {
        return Err(Error::NotConnected);
    }
    let pg = build_product(fsc, vg);
    if !pg.alive.iter().any(|&a| a) {
        return Err(Error::NoFeasibleQ);
    }
    let uniform = QDist::uniform(&pg);
    let c = classify(&pg, &uniform);
    if require_regular(&c).is_err() || select_v0(&pg, vg, fsc, &c.class_members).is_err() {
        return Err(Error::NoFeasibleQ);
    }
    let class = c.class_members;

    let free: Vec<usize> = (0..pg.num_nodes()).filter(|&u| pg.feasible[u].len() >= 2).collect();
    let dim: usize = free.iter().map(|&u| pg.feasible[u].len() - 1).sum();
    let rows_from = |params: &[f64]| -> Vec<Vec<f64>> {
        let mut rows = uniform.rows.clone();
        let mut offset = 0;
        for &u in &free {
            let f = &pg.feasible[u];
            let probs = softmax(&params[offset..offset + f.len() - 1]);
            offset += f.len() - 1;
            for (&x, p) in f.iter().zip(probs) {
                rows[u][x] = p;
            }
        }
        rows
    };
    let value_of = |params: &[f64]| -> f64 {
        let rows = rows_from(params);
        let m = transition_matrix(&pg, &rows);
        match stationary_on_class(&m, &class) {
            Ok(pi) => conditional_mi(&pg, &rows, &pi, fsc),
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let mut best_params = vec![0.0; dim];
    let mut best_value = value_of(&best_params);
    if dim > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let normal = Normal::new(0.0, 2.0).expect("valid normal");
        let nm = NelderMeadOptions { initial_step: 1.0, max_evals: 4000 * dim.max(1), f_tol: 1e-15, x_tol: 1e-9 };
        let mut starts = vec![vec![0.0; dim]];
        for _ in 0..opts.restarts {
            starts.push((0..dim).map(|_| normal.sample(&mut rng)).collect());
        }
        for start in starts {
            let (p, v) = nelder_mead_max(value_of, &start, nm);
            if v > best_value {
                best_value = v;
                best_params = p;
            }
        }
        let polish = NelderMeadOptions { initial_step: 0.05, ..nm };
        let (p, v) = nelder_mead_max(value_of, &best_params, polish);
        if v > best_value {
            best_value = v;
            best_params = p;
        }
    }
    let q = QDist::new(&pg, rows_from(&best_params))?;
    Ok((q, best_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_rll_dmc, Dmc, RllSpec, RunLimit};
    use crate::info::binary_entropy;

    fn one_inf(dmc: Dmc) -> Fsc {
        make_rll_dmc(RllSpec::d_inf(1), dmc).unwrap()
    }

    #[test]
    fn trivial_vgraph_product_mirrors_state_graph() {
        let fsc = one_inf(Dmc::Bsc(0.1));
        let pg = build_product(&fsc, &VGraph::trivial(2));
        assert_eq!(pg.num_nodes(), 2);
        assert_eq!(pg.feasible, vec![vec![0], vec![0, 1]]);
        let mut pairs: Vec<(usize, usize, usize)> = pg.edges.iter().map(|e| (e.from, e.input, e.to)).collect();
        pairs.dedup();
        assert_eq!(pairs, vec![(0, 0, 1), (1, 0, 1), (1, 1, 0)]);
    }

    #[test]
    fn memory_one_product_has_only_legal_edges() {
        let fsc = one_inf(Dmc::Bsc(0.1));
        let vg = VGraph::input_memory(2, 1);
        let pg = build_product(&fsc, &vg);
        assert_eq!(pg.num_nodes(), 4);
        // Edge iff x is allowed at s and P(y | x, s) > 0.
        let mut expected = Vec::new();
        for s in 0..2 {
            for v in 0..2 {
                for x in 0..2 {
                    if !fsc.allowed[s][x] {
                        continue;
                    }
                    for y in 0..2 {
                        expected.push((s * 2 + v, fsc.next_state[s][x] * 2 + x, x, y));
                    }
                }
            }
        }
        let got: Vec<_> = pg.edges.iter().map(|e| (e.from, e.to, e.input, e.output)).collect();
        assert_eq!(got, expected);
        assert!(pg.edges.iter().all(|e| !(e.from / 2 == 0 && e.input == 1)));
    }

    #[test]
    fn noiseless_bec_has_no_erasure_edges() {
        let fsc = one_inf(Dmc::Bec(0.0));
        let pg = build_product(&fsc, &VGraph::trivial(2));
        assert!(pg.edges.iter().all(|e| e.output != 2));
        let noisy = build_product(&one_inf(Dmc::Bec(0.2)), &VGraph::trivial(2));
        assert!(noisy.edges.iter().any(|e| e.output == 2));
    }

    fn cycle_fsc() -> Fsc {
        // Two states; input 0 stays, input 1 toggles. Noiseless binary output.
        let w = vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 2];
        Fsc::new(vec![vec![0, 1], vec![1, 0]], w, 0).unwrap()
    }

    #[test]
    fn classification_cases() {
        let fsc = cycle_fsc();
        let pg = build_product(&fsc, &VGraph::trivial(2));
        let positive = QDist::uniform(&pg);
        assert!(positive.in_class_q && positive.aperiodic);

        let toggling = QDist::new(&pg, vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let c = classify(&pg, &toggling);
        assert!(c.single_class && !c.aperiodic);
        assert_eq!(c.period, 2);

        let staying = QDist::new(&pg, vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let c = classify(&pg, &staying);
        assert!(!c.single_class);
        assert_eq!(c.closed_classes.len(), 2);
    }

    #[test]
    fn two_closed_cycles_on_four_vertex_product() {
        // Memory-1 V-graph: from (s, v), input x goes to (s ^ x, x). Always
        // taking x = 0 from v = 0 and x = 1 from v = 1 splits the product into
        // the closed classes {(0,0)}, {(1,0)} and the 2-cycle {(0,1), (1,1)}.
        let fsc = cycle_fsc();
        let vg = VGraph::input_memory(2, 1);
        let pg = build_product(&fsc, &vg);
        assert_eq!(pg.num_nodes(), 4);
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let q = QDist::new(&pg, rows).unwrap();
        let c = classify(&pg, &q);
        assert!(!c.single_class);
        assert_eq!(c.closed_classes, vec![vec![0], vec![1, 3], vec![2]]);
        assert!(matches!(single_letter_bound(&fsc, &vg, &q), Err(Error::NotSingleClass(3))));
        // Periodic single class is rejected distinctly.
        let pg1 = build_product(&fsc, &VGraph::trivial(2));
        let toggling = QDist::new(&pg1, vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(single_letter_bound(&fsc, &VGraph::trivial(2), &toggling), Err(Error::Periodic(2))));
    }

    #[test]
    fn symmetric_cycle_uniform_pi() {
        let fsc = cycle_fsc();
        let pg = build_product(&fsc, &VGraph::trivial(2));
        let st = stationary(&pg, &QDist::uniform(&pg), &fsc).unwrap();
        assert!((st.pi[0] - 0.5).abs() < 1e-14 && (st.pi[1] - 0.5).abs() < 1e-14);
        assert!(st.residual <= 1e-12);
        assert!((st.joint_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constraint_graph_stationary_balance() {
        let fsc = one_inf(Dmc::Bsc(0.1));
        let vg = VGraph::from_state_graph(&fsc).unwrap();
        let pg = build_product(&fsc, &vg);
        let a = 0.37;
        let policy = Policy::new(&fsc, vec![vec![1.0, 0.0], vec![1.0 - a, a]]).unwrap();
        let q = QDist::from_policy(&pg, &policy).unwrap();
        let st = stationary(&pg, &q, &fsc).unwrap();
        let diag0 = pg.node(0, 0);
        let diag1 = pg.node(1, 1);
        assert!((st.pi[diag0] - a / (1.0 + a)).abs() < 1e-12);
        assert!((st.pi[diag1] - 1.0 / (1.0 + a)).abs() < 1e-12);
        assert!(st.residual <= 1e-12);
    }

    #[test]
    fn useless_channel_gives_zero() {
        let fsc = one_inf(Dmc::Bsc(0.5));
        let vg = VGraph::input_memory(2, 1);
        let pg = build_product(&fsc, &vg);
        assert!(single_letter_bound(&fsc, &vg, &QDist::uniform(&pg)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn connectivity() {
        for spec in [RllSpec::d_inf(0), RllSpec::d_inf(3), RllSpec::new(1, RunLimit::Finite(4)).unwrap()] {
            assert!(check_connected(&make_rll_dmc(spec, Dmc::Bsc(0.2)).unwrap()));
        }
        let w = vec![vec![vec![1.0], vec![1.0]]; 2];
        let absorbing = Fsc::new(vec![vec![1, 1], vec![1, 1]], w, 0).unwrap();
        assert!(!check_connected(&absorbing));
        let single = Fsc::new(vec![vec![0]], vec![vec![vec![1.0]]], 0).unwrap();
        assert!(check_connected(&single));
    }

    #[test]
    fn disconnected_channel_rejected() {
        let w = vec![vec![vec![0.9, 0.1], vec![0.1, 0.9]]; 2];
        let fsc = Fsc::new(vec![vec![1, 1], vec![1, 1]], w, 0).unwrap();
        let vg = VGraph::trivial(2);
        let pg = build_product(&fsc, &vg);
        assert!(matches!(single_letter_bound(&fsc, &vg, &QDist::uniform(&pg)), Err(Error::NotConnected)));
        assert!(matches!(optimize_q(&fsc, &vg, &QOptimizerOptions::default()), Err(Error::NotConnected)));
    }

    #[test]
    fn optimize_trivial_graph_on_bsc() {
        let p = 0.1;
        let fsc = make_rll_dmc(RllSpec::d_inf(0), Dmc::Bsc(p)).unwrap();
        let (_, v) = optimize_q(&fsc, &VGraph::trivial(2), &QOptimizerOptions::default()).unwrap();
        assert!((v - (1.0 - binary_entropy(p))).abs() < 1e-6);
    }

    #[test]
    fn optimum_beats_uniform() {
        let fsc = one_inf(Dmc::Bsc(0.2));
        let vg = VGraph::input_memory(2, 2);
        let pg = build_product(&fsc, &vg);
        let uniform = single_letter_bound(&fsc, &vg, &QDist::uniform(&pg)).unwrap();
        let (q, v) = optimize_q(&fsc, &vg, &QOptimizerOptions::default()).unwrap();
        assert!(v >= uniform - 1e-12);
        assert!((single_letter_bound(&fsc, &vg, &q).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn vgraph_validation() {
        assert!(VGraph::new(vec!["a".into(), "b".into()], vec![vec![Some(0), None], vec![Some(1), None]], None).is_err());
        assert!(VGraph::new(vec!["a".into()], vec![vec![Some(3)]], None).is_err());
        let g = VGraph::input_memory(2, 2);
        assert_eq!(g.names(), ["00", "01", "10", "11"]);
        assert_eq!(g.phi(1, 0), Some(2));
    }

    #[test]
    fn vgraph_file_parses() {
        let fsc = one_inf(Dmc::Bsc(0.1));
        let text = r#"{ "vertices": ["a", "b"], "phi": { "a,0": "b", "b,0": "b", "b,1": "a" }, "v0": "a" }"#;
        let vg = parse_vgraph(text, &fsc).unwrap();
        assert_eq!(vg, VGraph::new(vec!["a".into(), "b".into()], vec![vec![Some(1), None], vec![Some(1), Some(0)]], Some(0)).unwrap());
        let bad = r#"{ "vertices": ["a"], "phi": { "a,7": "a" } }"#;
        assert!(parse_vgraph(bad, &fsc).unwrap_err().to_string().contains("line 1"));
    }
}
