//! Hyperelliptic involutions of minimal augmented metric graphs and the
//! lifting criterion for hyperelliptic skeleta.
//!
//! Every metric automorphism permutes essential vertices and essential edges,
//! so it becomes a plain graph automorphism once each essential edge is cut at
//! its quarter points. The cut model is simple and flips no edge.

use std::collections::HashMap;

use crate::divisors::weighted_rank;
use crate::error::{Error, Result};
use crate::graph::{Divisor, GraphBuilder, MetricGraph, PointLocation};
use crate::harmonic::{EdgeImage, Morphism};
use crate::rational::Rational;

/// No infinite vertices and no 1-valent vertices of genus 0.
pub fn is_minimal(graph: &MetricGraph) -> bool {
    !graph.has_infinite_vertices()
        && (0..graph.vertex_count()).all(|v| graph.valence(v) != 1 || graph.vertex(v).genus > 0)
}

fn is_essential(graph: &MetricGraph, v: usize) -> bool {
    graph.valence(v) != 2 || graph.vertex(v).genus > 0
}

/// The essential model with every essential edge cut at 1/4, 1/2 and 3/4 of its length.
/// Essential vertices keep their names; the new vertices are `"{edge}@1"`…`"{edge}@3"`.
pub fn quartered_essential_model(graph: &MetricGraph) -> Result<MetricGraph> {
    if graph.has_infinite_vertices() {
        return Err(Error::Precondition("graph must be compact".into()));
    }
    let (essential, chains) = graph.essential_chains();
    if essential.iter().all(|&v| !is_essential(graph, v)) {
        return Err(Error::Precondition("a circle has no essential vertices".into()));
    }
    let mut b = GraphBuilder::new();
    let mut index = HashMap::new();
    for &v in &essential {
        let vx = graph.vertex(v);
        index.insert(v, b.vertex(vx.name.clone(), vx.genus));
    }
    for c in &chains {
        let name = &c.name;
        let quarter = c.length / Rational::from_integer(4);
        let mut prev = index[&c.ends[0]];
        for k in 1..=3 {
            let m = b.vertex(format!("{name}@{k}"), 0);
            b.finite_edge(format!("{name}/{k}"), prev, m, quarter);
            prev = m;
        }
        b.finite_edge(format!("{name}/4"), prev, index[&c.ends[1]], quarter);
    }
    b.build()
}

/// An involution of a quartered essential model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Involution {
    pub model: MetricGraph,
    pub vertex_perm: Vec<usize>,
    pub edge_perm: Vec<usize>,
}

impl Involution {
    pub fn fixes_edge_pointwise(&self, e: usize) -> bool {
        let [a, b] = self.model.edge(e).ends;
        self.vertex_perm[a] == a && self.vertex_perm[b] == b
    }

    pub fn fixed_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_perm.len()).filter(|&v| self.vertex_perm[v] == v)
    }

    /// Quotient graph, with edge lengths multiplied by the stabilizer order.
    /// Returns the quotient and the quotient map as a degree-2 morphism.
    pub fn quotient(&self) -> Result<Morphism> {
        let g = &self.model;
        let mut vclass = vec![usize::MAX; g.vertex_count()];
        let mut b = GraphBuilder::new();
        for v in 0..g.vertex_count() {
            let w = self.vertex_perm[v];
            if vclass[v] == usize::MAX {
                let name = if w == v { g.vertex(v).name.clone() } else { format!("{}|{}", g.vertex(v).name, g.vertex(w).name) };
                let id = b.vertex(name, 0);
                vclass[v] = id;
                vclass[w] = id;
            }
        }
        let mut eclass = vec![usize::MAX; g.edge_count()];
        let mut degree = vec![0u32; g.edge_count()];
        for e in 0..g.edge_count() {
            let f = self.edge_perm[e];
            let fixed = f == e;
            degree[e] = if fixed { 2 } else { 1 };
            if eclass[e] == usize::MAX {
                let edge = g.edge(e);
                let l = edge.length.finite().expect("compact") * Rational::from_integer(degree[e] as i64);
                let id = b.finite_edge(edge.name.clone(), vclass[edge.ends[0]], vclass[edge.ends[1]], l);
                eclass[e] = id;
                eclass[f] = id;
            }
        }
        let target = b.build()?;
        let emap = eclass.into_iter().map(EdgeImage::Edge).collect();
        Morphism::new(g.clone(), target, vclass, emap, degree, None)
    }
}

struct Search<'a> {
    g: &'a MetricGraph,
    adj: Vec<Vec<(usize, usize)>>,
    edge_of: HashMap<(usize, usize), usize>,
    order: Vec<usize>,
    signature: Vec<(usize, u32, Vec<Rational>)>,
    perm: Vec<Option<usize>>,
    found: Vec<Vec<usize>>,
    bridges: std::collections::BTreeSet<usize>,
}

impl Search<'_> {
    fn consistent(&self, v: usize) -> bool {
        let w = self.perm[v].expect("assigned");
        self.adj[v].iter().all(|&(x, e)| match self.perm[x] {
            None => true,
            Some(y) => self
                .edge_of
                .get(&(w.min(y), w.max(y)))
                .is_some_and(|&f| self.g.edge(f).length == self.g.edge(e).length),
        })
    }

    fn run(&mut self, k: usize) {
        if k == self.order.len() {
            let perm: Vec<usize> = self.perm.iter().map(|p| p.expect("complete")).collect();
            if self.qualifies(&perm) {
                self.found.push(perm);
            }
            return;
        }
        let v = self.order[k];
        if self.perm[v].is_some() {
            return self.run(k + 1);
        }
        let candidates: Vec<usize> = (0..self.g.vertex_count())
            .filter(|&w| self.perm[w].is_none() && self.signature[w] == self.signature[v])
            .filter(|&w| w == v || self.g.vertex(v).genus == 0)
            .collect();
        for w in candidates {
            self.perm[v] = Some(w);
            self.perm[w] = Some(v);
            if self.consistent(v) && self.consistent(w) {
                self.run(k + 1);
            }
            self.perm[v] = None;
            self.perm[w] = None;
        }
    }

    fn edge_perm(&self, perm: &[usize]) -> Vec<usize> {
        (0..self.g.edge_count())
            .map(|e| {
                let [a, b] = self.g.edge(e).ends;
                let (x, y) = (perm[a], perm[b]);
                self.edge_of[&(x.min(y), x.max(y))]
            })
            .collect()
    }

    fn qualifies(&self, perm: &[usize]) -> bool {
        let eperm = self.edge_perm(perm);
        for &e in &self.bridges {
            let [a, b] = self.g.edge(e).ends;
            if perm[a] != a || perm[b] != b {
                return false;
            }
        }
        // quotient is a tree iff #orbits(V) − #orbits(E) = 1
        let vo = (0..perm.len()).filter(|&v| perm[v] >= v).count() as i64;
        let eo = (0..eperm.len()).filter(|&e| eperm[e] >= e).count() as i64;
        vo - eo == 1
    }
}

fn search_involutions(model: &MetricGraph) -> Vec<Involution> {
    let n = model.vertex_count();
    let mut adj = vec![Vec::new(); n];
    let mut edge_of = HashMap::new();
    for (i, e) in model.edges().iter().enumerate() {
        let [a, b] = e.ends;
        adj[a].push((b, i));
        adj[b].push((a, i));
        edge_of.insert((a.min(b), a.max(b)), i);
    }
    let signature = (0..n)
        .map(|v| {
            let mut ls: Vec<Rational> = adj[v].iter().map(|&(_, e)| model.edge(e).length.finite().expect("compact")).collect();
            ls.sort();
            (adj[v].len(), model.vertex(v).genus, ls)
        })
        .collect();
    // breadth-first order keeps every new vertex adjacent to an assigned one
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut s = Search {
        g: model,
        adj,
        edge_of,
        order,
        signature,
        perm: vec![None; n],
        found: Vec::new(),
        bridges: model.bridges().bridges,
    };
    s.run(0);
    let found = std::mem::take(&mut s.found);
    found
        .into_iter()
        .map(|perm| {
            let edge_perm = s.edge_perm(&perm);
            Involution { model: model.clone(), vertex_perm: perm, edge_perm }
        })
        .collect()
}

fn check_input(graph: &MetricGraph) -> Result<()> {
    if !is_minimal(graph) {
        return Err(Error::Precondition("graph must be minimal".into()));
    }
    if graph.genus() < 2 {
        return Err(Error::Precondition("genus must be at least 2".into()));
    }
    Ok(())
}

/// The involution fixing positive-genus points and bridges with tree quotient, if any.
pub fn find_hyperelliptic_involution(graph: &MetricGraph) -> Result<Option<Involution>> {
    check_input(graph)?;
    let model = quartered_essential_model(graph)?;
    let mut all = search_involutions(&model);
    assert!(all.len() <= 1, "hyperelliptic involution is not unique ({} found)", all.len());
    Ok(all.pop())
}

pub fn is_hyperelliptic(graph: &MetricGraph) -> Result<bool> {
    Ok(find_hyperelliptic_involution(graph)?.is_some())
}

/// Independent route: a degree-2 divisor with `r^# = 1` supported on vertices of the
/// quartered essential model.
pub fn is_hyperelliptic_by_rank(graph: &MetricGraph) -> Result<bool> {
    check_input(graph)?;
    let model = quartered_essential_model(graph)?;
    let n = model.vertex_count();
    for a in 0..n {
        for b in a..n {
            let d = &Divisor::vertex(a) + &Divisor::vertex(b);
            if weighted_rank(&model, &d)? >= 1 {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Number of tangent directions at `p` (a vertex of the involution's model) fixed by `s`.
pub fn kappa(s: &Involution, p: usize) -> Result<u32> {
    if s.vertex_perm[p] != p {
        return Err(Error::Precondition(format!("{} is not fixed by the involution", s.model.vertex(p).name)));
    }
    Ok(s.model.incident(p).iter().filter(|&&e| s.fixes_edge_pointwise(e)).count() as u32)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexCriterion {
    pub name: String,
    pub genus: u32,
    pub kappa: u32,
    pub bridges: u32,
}

#[derive(Clone, Debug)]
pub struct HyperellipticReport {
    pub hyperelliptic: bool,
    pub involution: Option<Involution>,
    /// Essential fixed vertices with their `κ` and bridge counts.
    pub vertices: Vec<VertexCriterion>,
    pub liftable: bool,
}

/// Bridge edge-ends at every vertex of `graph`.
fn bridge_counts(graph: &MetricGraph) -> Vec<u32> {
    let mut out = vec![0; graph.vertex_count()];
    for e in graph.bridges().bridges {
        for v in graph.edge(e).ends {
            out[v] += 1;
        }
    }
    out
}

/// Hyperelliptic, and `2g(p) ≥ κ(p) − 2` at every fixed point. The bridge-count form
/// `#bridges(p) ≤ 2g(p) + 2` is evaluated alongside and must agree.
pub fn liftable_hyperelliptic(graph: &MetricGraph) -> Result<HyperellipticReport> {
    let involution = find_hyperelliptic_involution(graph)?;
    let Some(s) = involution else {
        return Ok(HyperellipticReport { hyperelliptic: false, involution: None, vertices: Vec::new(), liftable: false });
    };
    let bridges = bridge_counts(&s.model);
    let mut vertices = Vec::new();
    for p in s.fixed_vertices() {
        if !is_essential(&s.model, p) {
            continue;
        }
        vertices.push(VertexCriterion {
            name: s.model.vertex(p).name.clone(),
            genus: s.model.vertex(p).genus,
            kappa: kappa(&s, p)?,
            bridges: bridges[p],
        });
    }
    let by_directions = vertices.iter().all(|c| 2 * c.genus + 2 >= c.kappa);
    let by_bridges = (0..s.model.vertex_count()).all(|p| bridges[p] <= 2 * s.model.vertex(p).genus + 2);
    debug_assert_eq!(by_directions, by_bridges, "fixed-direction and bridge-count criteria disagree");
    Ok(HyperellipticReport { hyperelliptic: true, involution: Some(s), vertices, liftable: by_directions })
}

/// Images of the essential vertices of the original graph under `s`, by name.
pub fn describe(s: &Involution) -> Vec<(String, String)> {
    (0..s.model.vertex_count())
        .filter(|&v| is_essential(&s.model, v) && v <= s.vertex_perm[v])
        .map(|v| (s.model.vertex(v).name.clone(), s.model.vertex(s.vertex_perm[v]).name.clone()))
        .collect()
}

/// Degree-2 divisor `x + s(x)` on the involution's model.
pub fn hyperelliptic_divisor(s: &Involution, x: usize) -> Divisor {
    let mut d = Divisor::point(PointLocation::Vertex(x));
    d.add_point(PointLocation::Vertex(s.vertex_perm[x]), 1);
    d
}
