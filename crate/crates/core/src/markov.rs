//! Finite Markov chain helpers: communicating classes, periods, stationary laws.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::{Error, Result};

/// Whether the directed graph on `0..n` given by `succ` is strongly connected.
pub(crate) fn strongly_connected<F: Fn(usize) -> Vec<usize>>(succ: F, n: usize) -> bool {
    if n == 0 {
        return false;
    }
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in succ(i) {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    tarjan_scc(&g).len() == 1
}

/// Closed communicating classes of a transition matrix restricted to `active`
/// nodes; an edge is present where `p[i][j] > 0`. Each class is sorted.
pub(crate) fn closed_classes(p: &[Vec<f64>], active: &[bool]) -> Vec<Vec<usize>> {
    let n = p.len();
    let mut g = DiGraph::<usize, ()>::new();
    let mut node = vec![None; n];
    for i in 0..n {
        if active[i] {
            node[i] = Some(g.add_node(i));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if let (Some(a), Some(b)) = (node[i], node[j]) {
                if p[i][j] > 0.0 {
                    g.add_edge(a, b, ());
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|comp| {
            let mut members: Vec<usize> = comp.iter().map(|&ix| g[ix]).collect();
            members.sort_unstable();
            members
        })
        .filter(|members| {
            let inside: std::collections::HashSet<usize> = members.iter().copied().collect();
            members.iter().all(|&i| (0..n).all(|j| p[i][j] <= 0.0 || inside.contains(&j)))
        })
        .collect();
    classes.sort();
    classes
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a communicating class: gcd of `level(u) + 1 - level(v)` over edges
/// `u -> v` inside it, where levels come from a BFS.
pub(crate) fn period(p: &[Vec<f64>], class: &[usize]) -> usize {
    let n = p.len();
    let mut in_class = vec![false; n];
    class.iter().for_each(|&i| in_class[i] = true);
    let mut level = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    level[class[0]] = 0;
    queue.push_back(class[0]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if in_class[v] && p[u][v] > 0.0 && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0;
    for &u in class {
        for &v in class {
            if p[u][v] > 0.0 {
                let diff = (level[u] + 1).abs_diff(level[v]);
                g = gcd(g, diff);
            }
        }
    }
    g
}

/// Stationary law of the chain restricted to a closed class; zero elsewhere.
pub(crate) fn stationary_on_class(p: &[Vec<f64>], class: &[usize]) -> Result<Vec<f64>> {
    let m = class.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (r, &j) in class.iter().enumerate() {
        for (c, &i) in class.iter().enumerate() {
            a[(r, c)] = p[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for c in 0..m {
        a[(m - 1, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let sol = a.lu().solve(&b).ok_or(Error::Singular)?;
    let mut pi = vec![0.0; p.len()];
    for (r, &i) in class.iter().enumerate() {
        pi[i] = sol[r].max(0.0);
    }
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= s);
    Ok(pi)
}

/// Probability that the chain started at `start` is eventually absorbed in
/// each of `classes`.
pub(crate) fn absorption_probabilities(p: &[Vec<f64>], classes: &[Vec<usize>], start: usize) -> Result<Vec<f64>> {
    let n = p.len();
    let mut class_of = vec![None; n];
    for (c, members) in classes.iter().enumerate() {
        members.iter().for_each(|&i| class_of[i] = Some(c));
    }
    if let Some(c) = class_of[start] {
        let mut out = vec![0.0; classes.len()];
        out[c] = 1.0;
        return Ok(out);
    }
    let transient: Vec<usize> = (0..n).filter(|&i| class_of[i].is_none()).collect();
    let pos = |i: usize| transient.iter().position(|&t| t == i);
    let m = transient.len();
    let mut a = DMatrix::<f64>::identity(m, m);
    for (r, &i) in transient.iter().enumerate() {
        for (c, &j) in transient.iter().enumerate() {
            a[(r, c)] -= p[i][j];
        }
    }
    let lu = a.lu();
    let row = pos(start).expect("start is transient");
    let mut out = Vec::with_capacity(classes.len());
    for members in classes {
        let b = DVector::from_iterator(m, transient.iter().map(|&i| members.iter().map(|&j| p[i][j]).sum::<f64>()));
        let x = lu.solve(&b).ok_or(Error::Singular)?;
        out.push(x[row].clamp(0.0, 1.0));
    }
    Ok(out)
}

/// `max_j |(π P)_j - π_j|`.
pub(crate) fn balance_residual(p: &[Vec<f64>], pi: &[f64]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|j| ((0..n).map(|i| pi[i] * p[i][j]).sum::<f64>() - pi[j]).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_balance() {
        let a = 0.3;
        let p = vec![vec![0.0, 1.0], vec![a, 1.0 - a]];
        let pi = stationary_on_class(&p, &[0, 1]).unwrap();
        assert!((pi[0] - a / (1.0 + a)).abs() < 1e-14);
        assert!((pi[1] - 1.0 / (1.0 + a)).abs() < 1e-14);
        assert!(balance_residual(&p, &pi) < 1e-15);
    }

    #[test]
    fn classes_and_periods() {
        // 0 <-> 1 closed with period 2; 2 -> 3 -> 3 closed aperiodic; 4 transient.
        let p = vec![
            vec![0.0, 1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5, 0.0],
            vec![0.5, 0.0, 0.5, 0.0, 0.0],
        ];
        let classes = closed_classes(&p, &[true; 5]);
        assert_eq!(classes, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(period(&p, &classes[0]), 2);
        assert_eq!(period(&p, &classes[1]), 1);
        let abs = absorption_probabilities(&p, &classes, 4).unwrap();
        assert!((abs[0] - 0.5).abs() < 1e-14 && (abs[1] - 0.5).abs() < 1e-14);
    }
}
