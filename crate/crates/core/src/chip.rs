//! Chip-firing on finite multigraphs: reduced divisors and Baker–Norine rank.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Length, MetricGraph};
use crate::rational::Rational;

/// Connected loopless multigraph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChipGraph {
    /// Neighbours with edge multiplicities.
    adj: Vec<Vec<(usize, i64)>>,
    valence: Vec<i64>,
    edges: usize,
}

/// Result of reducing a divisor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub reduced: Vec<i64>,
    /// Net number of times each vertex fired: `reduced = D − L·script`.
    pub script: Vec<i64>,
}

impl ChipGraph {
    /// From an edge list; parallel edges add up, loops are ignored.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut mult: Vec<HashMap<usize, i64>> = vec![HashMap::new(); n];
        let mut count = 0;
        for &(a, b) in edges {
            if a == b {
                continue;
            }
            *mult[a].entry(b).or_insert(0) += 1;
            *mult[b].entry(a).or_insert(0) += 1;
            count += 1;
        }
        let adj: Vec<Vec<(usize, i64)>> = mult
            .into_iter()
            .map(|m| {
                let mut v: Vec<_> = m.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        let valence = adj.iter().map(|a| a.iter().map(|&(_, k)| k).sum()).collect();
        ChipGraph { adj, valence, edges: count }
    }

    /// The combinatorial graph of a model whose finite edges all have length 1.
    /// Infinite vertices are rejected.
    pub fn from_unit_model(graph: &MetricGraph) -> Result<Self> {
        let mut edges = Vec::with_capacity(graph.edge_count());
        for e in graph.edges() {
            match e.length {
                Length::Finite(l) if l == Rational::from_integer(1) => edges.push((e.ends[0], e.ends[1])),
                Length::Finite(_) => return Err(Error::NonIntegerLength(e.name.clone())),
                Length::Infinite => {
                    return Err(Error::InfiniteSupport(format!("infinite edge {}", e.name)));
                }
            }
        }
        Ok(Self::from_edges(graph.vertex_count(), &edges))
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn neighbours(&self, v: usize) -> &[(usize, i64)] {
        &self.adj[v]
    }

    pub fn valence(&self, v: usize) -> i64 {
        self.valence[v]
    }

    /// `|E| − |V| + 1`.
    pub fn genus(&self) -> i64 {
        self.edges as i64 - self.vertex_count() as i64 + 1
    }

    pub fn canonical(&self) -> Vec<i64> {
        self.valence.iter().map(|v| v - 2).collect()
    }

    /// `L·x` for the Laplacian `L = diag(valence) − A`.
    pub fn laplacian_apply(&self, x: &[i64]) -> Vec<i64> {
        (0..self.vertex_count())
            .map(|v| {
                self.valence[v] * x[v] - self.adj[v].iter().map(|&(w, k)| k * x[w]).sum::<i64>()
            })
            .collect()
    }

    /// Full Laplacian as a dense matrix.
    pub fn laplacian(&self) -> Vec<Vec<i64>> {
        let n = self.vertex_count();
        let mut l = vec![vec![0i64; n]; n];
        for v in 0..n {
            l[v][v] = self.valence[v];
            for &(w, k) in &self.adj[v] {
                l[v][w] -= k;
            }
        }
        l
    }

    fn distances(&self, q: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[q] = 0;
        let mut queue = VecDeque::from([q]);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() == 0 || self.distances(0).iter().all(|&d| d != usize::MAX)
    }

    /// The unique `q`-reduced divisor equivalent to `d`, with a firing script.
    pub fn reduce(&self, d: &[i64], q: usize) -> Reduction {
        let n = self.vertex_count();
        let mut d = d.to_vec();
        let mut script = vec![0i64; n];
        let dist = self.distances(q);
        let max_layer = dist.iter().copied().max().unwrap_or(0);

        // Step 1: clear debt layer by layer, from the farthest inward, by
        // firing the ball of the previous radius.
        for k in (1..=max_layer).rev() {
            let mut times = 0i64;
            for v in 0..n {
                if dist[v] == k && d[v] < 0 {
                    let inward: i64 = self.adj[v].iter().filter(|(w, _)| dist[*w] < k).map(|&(_, m)| m).sum();
                    times = times.max((-d[v] + inward - 1) / inward);
                }
            }
            if times > 0 {
                let ball: Vec<bool> = dist.iter().map(|&x| x < k).collect();
                self.fire_set(&mut d, &mut script, &ball, times);
            }
        }

        // Step 2: Dhar burning from q, firing the unburnt set as often as legal.
        loop {
            let unburnt = self.dhar(&d, q);
            if !unburnt.iter().any(|&u| u) {
                break;
            }
            let mut times = i64::MAX;
            for v in 0..n {
                if unburnt[v] {
                    let out: i64 = self.adj[v].iter().filter(|(w, _)| !unburnt[*w]).map(|&(_, m)| m).sum();
                    if out > 0 {
                        times = times.min(d[v] / out);
                    }
                }
            }
            debug_assert!(times >= 1 && times < i64::MAX);
            self.fire_set(&mut d, &mut script, &unburnt, times);
        }
        Reduction { reduced: d, script }
    }

    fn fire_set(&self, d: &mut [i64], script: &mut [i64], set: &[bool], times: i64) {
        for v in 0..self.vertex_count() {
            if !set[v] {
                continue;
            }
            script[v] += times;
            for &(w, m) in &self.adj[v] {
                if !set[w] {
                    d[v] -= m * times;
                    d[w] += m * times;
                }
            }
        }
    }

    /// Burns from `q`; returns the set of vertices left unburnt.
    /// Assumes `d` is nonnegative away from `q`.
    pub fn dhar(&self, d: &[i64], q: usize) -> Vec<bool> {
        let n = self.vertex_count();
        let mut burnt = vec![false; n];
        let mut fire_edges = vec![0i64; n];
        burnt[q] = true;
        let mut stack = vec![q];
        while let Some(v) = stack.pop() {
            for &(w, m) in &self.adj[v] {
                if burnt[w] {
                    continue;
                }
                fire_edges[w] += m;
                if fire_edges[w] > d[w] {
                    burnt[w] = true;
                    stack.push(w);
                }
            }
        }
        burnt.iter().map(|b| !b).collect()
    }

    pub fn is_reduced(&self, d: &[i64], q: usize) -> bool {
        (0..self.vertex_count()).all(|v| v == q || d[v] >= 0) && !self.dhar(d, q).iter().any(|&u| u)
    }

    /// Whether `d` is equivalent to an effective divisor.
    pub fn is_effective_class(&self, d: &[i64]) -> bool {
        if d.iter().sum::<i64>() < 0 {
            return false;
        }
        self.reduce(d, 0).reduced[0] >= 0
    }

    pub fn equivalent(&self, a: &[i64], b: &[i64]) -> bool {
        let diff: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        diff.iter().sum::<i64>() == 0 && self.reduce(&diff, 0).reduced.iter().all(|&c| c == 0)
    }

    /// Baker–Norine rank.
    pub fn rank(&self, d: &[i64]) -> i64 {
        RankSolver::new(self, true).rank(d)
    }

    /// Rank by exhaustive search only, never via Riemann–Roch.
    pub fn rank_exhaustive(&self, d: &[i64]) -> i64 {
        RankSolver::new(self, false).rank(d)
    }

    pub fn rank_at_least(&self, d: &[i64], k: i64) -> bool {
        RankSolver::new(self, true).at_least(d, k)
    }
}

/// Memoised rank search keyed by `q`-reduced representatives.
pub struct RankSolver<'a> {
    graph: &'a ChipGraph,
    shortcut: bool,
    memo: HashMap<(Vec<i64>, i64), bool>,
}

impl<'a> RankSolver<'a> {
    pub fn new(graph: &'a ChipGraph, riemann_roch_shortcut: bool) -> Self {
        RankSolver { graph, shortcut: riemann_roch_shortcut, memo: HashMap::new() }
    }

    pub fn rank(&mut self, d: &[i64]) -> i64 {
        let deg: i64 = d.iter().sum();
        if deg < 0 {
            return -1;
        }
        let g = self.graph.genus();
        if self.shortcut && deg > 2 * g + 2 {
            return deg - g;
        }
        let mut k = -1;
        while k < deg && self.at_least(d, k + 1) {
            k += 1;
        }
        k
    }

    /// `r(d) ≥ k`: every effective `E` of degree `k` leaves `d − E` effective up to equivalence.
    pub fn at_least(&mut self, d: &[i64], k: i64) -> bool {
        if k < 0 {
            return true;
        }
        let deg: i64 = d.iter().sum();
        if deg < k {
            return false;
        }
        let g = self.graph.genus();
        if self.shortcut && deg > 2 * g + 2 {
            return deg - g >= k;
        }
        let reduced = self.graph.reduce(d, 0).reduced;
        if reduced[0] < 0 {
            return false;
        }
        if k == 0 {
            return true;
        }
        let key = (reduced, k);
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let mut ok = true;
        let mut next = key.0.clone();
        for v in 0..self.graph.vertex_count() {
            next[v] -= 1;
            let sub = self.at_least(&next, k - 1);
            next[v] += 1;
            if !sub {
                ok = false;
                break;
            }
        }
        self.memo.insert(key, ok);
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> ChipGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        ChipGraph::from_edges(n, &edges)
    }

    fn banana(k: usize) -> ChipGraph {
        ChipGraph::from_edges(2, &vec![(0, 1); k])
    }

    fn check_certificate(g: &ChipGraph, d: &[i64], r: &Reduction) {
        let ls = g.laplacian_apply(&r.script);
        let expect: Vec<i64> = d.iter().zip(&ls).map(|(a, b)| a - b).collect();
        assert_eq!(expect, r.reduced);
    }

    #[test]
    fn reduced_is_fixed() {
        let g = cycle(4);
        let d = vec![0, 0, 1, 0];
        assert!(g.is_reduced(&d, 0));
        assert_eq!(g.reduce(&d, 0).reduced, d);
        let k = vec![3, 0, 0, 0];
        assert_eq!(g.reduce(&k, 0).reduced, k);
    }

    #[test]
    fn reduces_debt_and_certifies() {
        let g = cycle(5);
        let d = vec![0, -3, 4, 2, -1];
        let r = g.reduce(&d, 0);
        assert!(g.is_reduced(&r.reduced, 0));
        check_certificate(&g, &d, &r);
        // idempotent
        assert_eq!(g.reduce(&r.reduced, 0).reduced, r.reduced);
    }

    #[test]
    fn effective_classes_on_a_cycle() {
        let g = cycle(4);
        assert!(g.is_effective_class(&[1, 0, 2, 0]));
        assert!(!g.is_effective_class(&[-1, 0, 0, 0]));
        assert!(!g.is_effective_class(&[1, -1, 0, 0]));
        assert!(!g.is_effective_class(&[1, 0, -1, 0]));
    }

    #[test]
    fn ranks_on_small_graphs() {
        let g = cycle(4);
        assert_eq!(g.rank(&[1, 0, 0, 0]), 0);
        assert_eq!(g.rank(&[1, 0, 1, 0]), 1);
        assert_eq!(g.rank(&[0, 0, 0, 0]), 0);
        assert_eq!(g.rank(&[-1, 1, 0, 0]), -1);
        let b = banana(4);
        assert_eq!(b.genus(), 3);
        assert_eq!(b.rank_exhaustive(&b.canonical()), 2);
        let tree = ChipGraph::from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(tree.rank(&[0, 2, 1]), 3);
    }

    #[test]
    fn shortcut_agrees_with_search() {
        let b = banana(3);
        for d in [[5, 2], [4, 4], [7, 0]] {
            assert_eq!(b.rank(&d), b.rank_exhaustive(&d));
        }
    }
}
