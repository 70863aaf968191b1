//! Budgeted search for finite effective harmonic morphisms to metric trees.
//!
//! A candidate is built in four layers: a subdivision of every essential chain
//! into a number of pieces, a partition of the resulting vertices into fibers
//! whose quotient is a tree, edge degrees making every vertex harmonic, and
//! finally piece lengths, found by an exact LP. The search is incomplete: a
//! `None` only means nothing was found within the budget.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, MetricGraph};
use crate::harmonic::{EdgeImage, Morphism};
use crate::lifting::{liftable_augmented, LiftReport};
use crate::lp::strictly_positive_solution;
use crate::rational::Rational;

pub const NODE_LIMIT_VAR: &str = "TROPILIFT_NODE_LIMIT";
const DEFAULT_NODE_LIMIT: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Pieces per essential chain.
    pub max_subdivisions: usize,
    pub max_tree_vertices: usize,
    pub max_degree: u32,
    /// Search nodes per degree.
    pub node_limit: u64,
}

impl Default for SearchBudget {
    /// Node limit from `TROPILIFT_NODE_LIMIT` when set.
    fn default() -> Self {
        let node_limit = std::env::var(NODE_LIMIT_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n| n > 0)
            .unwrap_or(DEFAULT_NODE_LIMIT);
        SearchBudget { max_subdivisions: 3, max_tree_vertices: 32, max_degree: 4, node_limit }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub witness: Option<Morphism>,
    /// The whole space allowed by the budget was explored.
    pub complete: bool,
    pub nodes: u64,
}

/// Combinatorial source model: vertices and pieces with their chain.
struct Model {
    names: Vec<String>,
    genus: Vec<u32>,
    /// `(a, b, chain)`
    pieces: Vec<(usize, usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
    chain_lengths: Vec<Rational>,
}

fn build_model(graph: &MetricGraph, essential: &[usize], chains: &[crate::graph::Chain], k: &[usize]) -> Model {
    let mut names: Vec<String> = essential.iter().map(|&v| graph.vertex(v).name.clone()).collect();
    let mut genus: Vec<u32> = essential.iter().map(|&v| graph.vertex(v).genus).collect();
    let index: BTreeMap<usize, usize> = essential.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut pieces = Vec::new();
    for (ci, c) in chains.iter().enumerate() {
        let mut prev = index[&c.ends[0]];
        for j in 1..k[ci] {
            names.push(format!("{}@{}", c.name, j));
            genus.push(0);
            let v = names.len() - 1;
            pieces.push((prev, v, ci));
            prev = v;
        }
        pieces.push((prev, index[&c.ends[1]], ci));
    }
    let mut adj = vec![Vec::new(); names.len()];
    for (i, &(a, b, _)) in pieces.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    Model { names, genus, pieces, adj, chain_lengths: chains.iter().map(|c| c.length).collect() }
}

struct Searcher<'a> {
    m: &'a Model,
    d: u32,
    budget: SearchBudget,
    nodes: u64,
    exhausted: bool,
    order: Vec<usize>,
    class: Vec<Option<usize>>,
    members: Vec<Vec<usize>>,
    /// class pair → number of source pieces between them
    pairs: BTreeMap<(usize, usize), u32>,
    found: Option<Witness>,
}

struct Witness {
    class: Vec<usize>,
    targets: Vec<(usize, usize)>,
    piece_target: Vec<usize>,
    degree: Vec<u32>,
    target_lengths: Vec<BigRational>,
}

impl Searcher<'_> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.node_limit {
            self.exhausted = true;
        }
        !self.exhausted
    }

    fn connected(&self, a: usize, b: usize) -> bool {
        let mut stack = vec![a];
        let mut seen = vec![false; self.members.len()];
        seen[a] = true;
        while let Some(x) = stack.pop() {
            if x == b {
                return true;
            }
            for &(p, q) in self.pairs.keys() {
                let y = if p == x { q } else if q == x { p } else { continue };
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        false
    }

    /// Puts `v` in class `c`; returns the pairs whose counts were bumped, or `None` if invalid.
    fn place(&mut self, v: usize, c: usize) -> Option<Vec<(usize, usize)>> {
        let mut bumped = Vec::new();
        let mut ok = true;
        for &(w, _) in &self.m.adj[v] {
            let Some(cw) = self.class[w] else { continue };
            if cw == c {
                ok = false;
                break;
            }
            let key = (c.min(cw), c.max(cw));
            let count = self.pairs.get(&key).copied().unwrap_or(0);
            if count == 0 && self.connected(c, cw) {
                ok = false;
                break;
            }
            if count + 1 > self.d {
                ok = false;
                break;
            }
            self.pairs.insert(key, count + 1);
            bumped.push(key);
        }
        if !ok {
            self.unbump(&bumped);
            return None;
        }
        self.class[v] = Some(c);
        self.members[c].push(v);
        Some(bumped)
    }

    fn unbump(&mut self, bumped: &[(usize, usize)]) {
        for key in bumped {
            let c = self.pairs.get_mut(key).expect("bumped");
            *c -= 1;
            if *c == 0 {
                self.pairs.remove(key);
            }
        }
    }

    fn unplace(&mut self, v: usize, c: usize, bumped: &[(usize, usize)]) {
        self.unbump(bumped);
        self.class[v] = None;
        self.members[c].pop();
    }

    fn partitions(&mut self, k: usize) {
        if self.found.is_some() || !self.tick() {
            return;
        }
        if k == self.order.len() {
            self.degrees_for_partition();
            return;
        }
        let v = self.order[k];
        let existing = self.members.len();
        for c in 0..=existing {
            if c == existing {
                if existing >= self.budget.max_tree_vertices {
                    break;
                }
                self.members.push(Vec::new());
            } else if self.members[c].len() >= self.d as usize {
                continue;
            }
            if let Some(bumped) = self.place(v, c) {
                self.partitions(k + 1);
                self.unplace(v, c, &bumped);
            }
            if c == existing {
                self.members.pop();
            }
            if self.found.is_some() || self.exhausted {
                return;
            }
        }
    }

    fn degrees_for_partition(&mut self) {
        let class: Vec<usize> = self.class.iter().map(|c| c.expect("complete")).collect();
        let targets: Vec<(usize, usize)> = self.pairs.keys().copied().collect();
        let index: BTreeMap<(usize, usize), usize> = targets.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let piece_target: Vec<usize> = self
            .m
            .pieces
            .iter()
            .map(|&(a, b, _)| index[&(class[a].min(class[b]), class[a].max(class[b]))])
            .collect();
        // every vertex must see every target edge at its image
        let mut class_targets: Vec<Vec<usize>> = vec![Vec::new(); self.members.len()];
        for (t, &(a, b)) in targets.iter().enumerate() {
            class_targets[a].push(t);
            class_targets[b].push(t);
        }
        for v in 0..class.len() {
            let seen: Vec<usize> = self.m.adj[v].iter().map(|&(_, p)| piece_target[p]).collect();
            if class_targets[class[v]].iter().any(|t| !seen.contains(t)) {
                return;
            }
        }
        let mut over: Vec<Vec<usize>> = vec![Vec::new(); targets.len()];
        for (p, &t) in piece_target.iter().enumerate() {
            over[t].push(p);
        }
        let mut degree = vec![0u32; self.m.pieces.len()];
        let mut local = vec![0u32; class.len()];
        self.assign(0, 0, &over, &mut degree, &mut local, &class, &targets, &piece_target);
    }

    /// Compositions of `d` over the pieces above each target edge, keeping local degrees consistent.
    #[allow(clippy::too_many_arguments)]
    fn assign(
        &mut self,
        t: usize,
        i: usize,
        over: &[Vec<usize>],
        degree: &mut Vec<u32>,
        local: &mut Vec<u32>,
        class: &[usize],
        targets: &[(usize, usize)],
        piece_target: &[usize],
    ) {
        if self.found.is_some() || !self.tick() {
            return;
        }
        if t == over.len() {
            self.finish(degree, local, class, targets, piece_target);
            return;
        }
        let pieces = &over[t];
        let used: u32 = pieces[..i].iter().map(|&p| degree[p]).sum();
        let remaining = pieces.len() - i;
        if remaining == 0 {
            if used != self.d || !self.locally_consistent(t, pieces, degree, local) {
                return;
            }
            let saved = local.clone();
            self.set_local(pieces, degree, local);
            self.assign(t + 1, 0, over, degree, local, class, targets, piece_target);
            *local = saved;
            return;
        }
        let p = pieces[i];
        let max = self.d - used - (remaining as u32 - 1);
        if self.d < used + remaining as u32 {
            return;
        }
        for m in 1..=max {
            if i + 1 == pieces.len() && used + m != self.d {
                continue;
            }
            degree[p] = m;
            self.assign(t, i + 1, over, degree, local, class, targets, piece_target);
            if self.found.is_some() || self.exhausted {
                return;
            }
        }
        degree[p] = 0;
    }

    /// Sums at each endpoint over target edge `t` must match already fixed local degrees.
    fn locally_consistent(&self, _t: usize, pieces: &[usize], degree: &[u32], local: &[u32]) -> bool {
        let sums = self.endpoint_sums(pieces, degree);
        sums.iter().all(|(&v, &s)| local[v] == 0 || local[v] == s)
    }

    fn endpoint_sums(&self, pieces: &[usize], degree: &[u32]) -> BTreeMap<usize, u32> {
        let mut sums = BTreeMap::new();
        for &p in pieces {
            let (a, b, _) = self.m.pieces[p];
            *sums.entry(a).or_insert(0) += degree[p];
            *sums.entry(b).or_insert(0) += degree[p];
        }
        sums
    }

    fn set_local(&self, pieces: &[usize], degree: &[u32], local: &mut [u32]) {
        for (v, s) in self.endpoint_sums(pieces, degree) {
            local[v] = s;
        }
    }

    fn finish(&mut self, degree: &[u32], local: &[u32], class: &[usize], targets: &[(usize, usize)], piece_target: &[usize]) {
        // effectiveness: 2d_v − Σ(m_e − 1) − 2 + 2g(v) ≥ 0 over a genus-0 target
        for v in 0..class.len() {
            let ram: i64 = self.m.adj[v].iter().map(|&(_, p)| degree[p] as i64 - 1).sum();
            if 2 * (local[v] as i64) - ram - 2 + 2 * (self.m.genus[v] as i64) < 0 {
                return;
            }
        }
        let n = targets.len();
        let mut rows = vec![vec![BigRational::zero(); n]; self.m.chain_lengths.len()];
        for (p, &(_, _, c)) in self.m.pieces.iter().enumerate() {
            rows[c][piece_target[p]] += BigRational::new(BigInt::one(), BigInt::from(degree[p]));
        }
        let rhs: Vec<BigRational> = self
            .m
            .chain_lengths
            .iter()
            .map(|l| BigRational::new(BigInt::from(*l.numer()), BigInt::from(*l.denom())))
            .collect();
        if let Some(y) = strictly_positive_solution(&rows, &rhs) {
            self.found = Some(Witness {
                class: class.to_vec(),
                targets: targets.to_vec(),
                piece_target: piece_target.to_vec(),
                degree: degree.to_vec(),
                target_lengths: y,
            });
        }
    }
}

fn to_rational(x: &BigRational) -> Result<Rational> {
    match (x.numer().to_i64(), x.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Rational::new(n, d)),
        _ => Err(Error::Precondition("length out of range".into())),
    }
}

fn realize(m: &Model, w: &Witness) -> Result<Morphism> {
    let mut s = GraphBuilder::new();
    for (name, &g) in m.names.iter().zip(&m.genus) {
        s.vertex(name.clone(), g);
    }
    let mut piece_no = BTreeMap::new();
    for (p, &(a, b, c)) in m.pieces.iter().enumerate() {
        let y = to_rational(&w.target_lengths[w.piece_target[p]])?;
        let k = piece_no.entry(c).or_insert(0);
        *k += 1;
        s.finite_edge(format!("c{c}/{k}"), a, b, y / Rational::from_integer(w.degree[p] as i64));
    }
    let source = s.build()?;
    let classes = w.class.iter().max().map_or(0, |&c| c + 1);
    let mut t = GraphBuilder::new();
    for c in 0..classes {
        t.vertex(format!("t{c}"), 0);
    }
    for (i, &(a, b)) in w.targets.iter().enumerate() {
        t.finite_edge(format!("f{i}"), a, b, to_rational(&w.target_lengths[i])?);
    }
    let target = t.build()?;
    let emap = w.piece_target.iter().map(|&i| EdgeImage::Edge(i)).collect();
    Morphism::new(source, target, w.class.clone(), emap, w.degree.clone(), None)
}

/// Subdivision vectors with entries in `lo..=hi`, by increasing total.
fn subdivision_vectors(lo: &[usize], hi: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &l in lo {
        out = out
            .into_iter()
            .flat_map(|v| {
                (l..=hi.max(l)).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out.sort_by_key(|v| (v.iter().sum::<usize>(), v.clone()));
    out
}

/// A degree-`d` finite effective harmonic morphism from a model of `graph` to a
/// metric tree, within the budget.
pub fn search_morphism_to_tree(graph: &MetricGraph, d: u32, budget: SearchBudget) -> Result<SearchOutcome> {
    if graph.has_infinite_vertices() {
        return Err(Error::Precondition("graph must be compact".into()));
    }
    if d == 0 {
        return Err(Error::Precondition("degree must be positive".into()));
    }
    if graph.edge_count() == 0 {
        let mut t = GraphBuilder::new();
        t.vertex("t0", 0);
        let w = Morphism::new(graph.clone(), t.build()?, vec![0], vec![], vec![], Some(vec![d]))?;
        return Ok(SearchOutcome { witness: Some(w), complete: true, nodes: 1 });
    }
    let (essential, chains) = graph.essential_chains();
    let lo: Vec<usize> = chains.iter().map(|c| if c.ends[0] == c.ends[1] { 2 } else { 1 }).collect();
    let mut nodes = 0;
    for k in subdivision_vectors(&lo, budget.max_subdivisions) {
        let model = build_model(graph, &essential, &chains, &k);
        let mut order = Vec::with_capacity(model.names.len());
        let mut seen = vec![false; model.names.len()];
        seen[0] = true;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in &model.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        let mut s = Searcher {
            m: &model,
            d,
            budget: SearchBudget { node_limit: budget.node_limit - nodes, ..budget },
            nodes: 0,
            exhausted: false,
            order,
            class: vec![None; model.names.len()],
            members: Vec::new(),
            pairs: BTreeMap::new(),
            found: None,
        };
        s.partitions(0);
        nodes += s.nodes.min(budget.node_limit - nodes);
        if let Some(w) = s.found.take() {
            let phi = realize(&model, &w)?;
            debug_assert!(phi.is_finite() && phi.is_effective()? && phi.target().is_tree());
            debug_assert_eq!(phi.degree()?, d);
            return Ok(SearchOutcome { witness: Some(phi), complete: false, nodes });
        }
        if s.exhausted || nodes >= budget.node_limit {
            return Ok(SearchOutcome { witness: None, complete: false, nodes });
        }
    }
    Ok(SearchOutcome { witness: None, complete: true, nodes })
}

#[derive(Clone, Debug)]
pub struct GonalityOutcome {
    pub gonality_upper: Option<u32>,
    pub witness: Option<Morphism>,
    /// Every smaller degree was searched exhaustively within the budget.
    pub lower_degrees_complete: bool,
}

/// Least `d ≤ d_max` with a witness found within the budget.
pub fn tropical_gonality_upper(graph: &MetricGraph, d_max: u32, budget: SearchBudget) -> Result<GonalityOutcome> {
    let mut complete = true;
    for d in 1..=d_max.min(budget.max_degree.max(1)) {
        let out = search_morphism_to_tree(graph, d, budget)?;
        if let Some(w) = out.witness {
            assert!(d > 1 || graph.first_betti() == 0, "degree-1 finite harmonic morphisms are isomorphisms");
            return Ok(GonalityOutcome { gonality_upper: Some(d), witness: Some(w), lower_degrees_complete: complete });
        }
        complete &= out.complete;
    }
    Ok(GonalityOutcome { gonality_upper: None, witness: None, lower_degrees_complete: complete })
}

#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub degree: u32,
    pub lift: LiftReport,
    pub obstructed: Vec<String>,
    /// This particular witness has no lift to a morphism of curves.
    pub certifies_nonliftable: bool,
}

/// Runs the local lifting test on a witness to a tree.
pub fn lift_obstructed_gonality(witness: &Morphism, char_p: u64) -> Result<ObstructionReport> {
    if !witness.target().is_tree() {
        return Err(Error::TargetNotTree);
    }
    if !witness.is_finite() || !witness.is_effective()? {
        return Err(Error::Precondition("witness must be finite and effective".into()));
    }
    let lift = liftable_augmented(witness, char_p)?;
    let obstructed = lift.obstructed().map(|v| v.name.clone()).collect();
    Ok(ObstructionReport { degree: witness.degree()?, certifies_nonliftable: !lift.liftable, obstructed, lift })
}

/// Minimal genus-2 graphs without vertex weights: theta, dumbbell, figure-eight.
pub fn genus_two_graphs(lengths: [Rational; 3]) -> Vec<(&'static str, MetricGraph)> {
    let [a, b, c] = lengths;
    let mut theta = GraphBuilder::new();
    let x = theta.vertex("x", 0);
    let y = theta.vertex("y", 0);
    theta.finite_edge("e1", x, y, a);
    theta.finite_edge("e2", x, y, b);
    theta.finite_edge("e3", x, y, c);
    let mut dumbbell = GraphBuilder::new();
    let u = dumbbell.vertex("u", 0);
    let v = dumbbell.vertex("v", 0);
    dumbbell.cycle("l1", u, a);
    dumbbell.finite_edge("bridge", u, v, b);
    dumbbell.cycle("l2", v, c);
    let mut eight = GraphBuilder::new();
    let w = eight.vertex("w", 0);
    eight.cycle("l1", w, a);
    eight.cycle("l2", w, b);
    vec![
        ("theta", theta.build().expect("theta")),
        ("dumbbell", dumbbell.build().expect("dumbbell")),
        ("figure-eight", eight.build().expect("figure eight")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::int;

    fn budget() -> SearchBudget {
        SearchBudget { max_subdivisions: 3, max_tree_vertices: 32, max_degree: 4, node_limit: 1_000_000 }
    }

    #[test]
    fn trees_have_gonality_one() {
        let out = tropical_gonality_upper(&fixtures::path(4), 3, budget()).unwrap();
        assert_eq!(out.gonality_upper, Some(1));
    }

    #[test]
    fn circle_has_gonality_two() {
        let out = tropical_gonality_upper(&fixtures::circle(3), 3, budget()).unwrap();
        assert_eq!(out.gonality_upper, Some(2));
        assert!(out.lower_degrees_complete);
        let w = out.witness.unwrap();
        assert!(w.is_effective().unwrap() && w.is_finite() && w.target().is_tree());
    }

    #[test]
    fn genus_two_sweep() {
        for (name, g) in genus_two_graphs([int(1), int(2), int(3)]) {
            let out = tropical_gonality_upper(&g, 3, budget()).unwrap();
            assert_eq!(out.gonality_upper, Some(2), "{name}");
        }
    }

    #[test]
    fn banana_witness() {
        let g = fixtures::banana(&[int(1); 4]);
        let out = search_morphism_to_tree(&g, 2, budget()).unwrap();
        assert!(out.witness.is_some());
    }

    #[test]
    fn obstruction_reports() {
        let r = lift_obstructed_gonality(&fixtures::star_map(), 0).unwrap();
        assert_eq!(r.obstructed, vec!["p".to_string()]);
        assert!(r.certifies_nonliftable);
        let w = search_morphism_to_tree(&fixtures::circle(2), 2, budget()).unwrap().witness.unwrap();
        assert!(!lift_obstructed_gonality(&w, 0).unwrap().certifies_nonliftable);
    }
}
