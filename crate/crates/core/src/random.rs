//! Seeded generators for property tests: harmonic morphisms and unit-model divisors.
//!
//! Morphisms are built quotient first: pick a target graph, pick local degrees
//! over each target vertex, then glue sheets edge by edge. The result is then
//! perturbed by genus changes and contracted edges between preimages of a
//! common vertex, neither of which affects harmonicity.

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Edge, Length, MetricGraph, Vertex};
use crate::harmonic::{EdgeImage, Morphism};
use crate::rational::int;

#[derive(Clone, Copy, Debug)]
pub struct MorphismParams {
    pub max_degree: u32,
    pub max_target_vertices: usize,
    /// Independent cycles added to the random target tree.
    pub max_target_cycles: usize,
    pub infinite_legs: bool,
    pub contracted_edges: bool,
    pub max_genus: u32,
}

impl MorphismParams {
    /// Finite morphisms onto compact trees with genus 0 everywhere.
    pub fn tree_covers() -> Self {
        MorphismParams {
            max_degree: 3,
            max_target_vertices: 4,
            max_target_cycles: 0,
            infinite_legs: false,
            contracted_edges: false,
            max_genus: 0,
        }
    }
}

impl Default for MorphismParams {
    fn default() -> Self {
        MorphismParams {
            max_degree: 3,
            max_target_vertices: 4,
            max_target_cycles: 1,
            infinite_legs: true,
            contracted_edges: true,
            max_genus: 1,
        }
    }
}

/// Random composition of `n` into positive parts.
fn composition<R: Rng>(rng: &mut R, n: u32) -> Vec<u32> {
    let mut parts = vec![1u32];
    for _ in 1..n {
        if rng.gen_bool(0.5) {
            parts.push(1);
        } else {
            *parts.last_mut().unwrap() += 1;
        }
    }
    parts
}

fn connected(n: usize, edges: &[Edge]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut parts = n;
    for e in edges {
        let (a, b) = (find(&mut parent, e.ends[0]), find(&mut parent, e.ends[1]));
        if a != b {
            parent[a] = b;
            parts -= 1;
        }
    }
    parts <= 1
}

struct TargetShape {
    vertices: Vec<Vertex>,
    /// (ends, finite) per edge; lengths are fixed after the degrees are known.
    edges: Vec<[usize; 2]>,
    finite: Vec<bool>,
}

fn random_target<R: Rng>(rng: &mut R, p: &MorphismParams) -> TargetShape {
    let n = rng.gen_range(1..=p.max_target_vertices.max(1));
    let mut vertices: Vec<Vertex> = (0..n)
        .map(|i| Vertex { name: format!("w{i}"), infinite: false, genus: rng.gen_range(0..=p.max_genus) })
        .collect();
    let mut edges = Vec::new();
    let mut finite = Vec::new();
    for i in 1..n {
        edges.push([rng.gen_range(0..i), i]);
        finite.push(true);
    }
    if n >= 2 {
        for _ in 0..rng.gen_range(0..=p.max_target_cycles) {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            edges.push([a, b]);
            finite.push(true);
        }
    }
    if p.infinite_legs || n == 1 {
        let legs = if p.infinite_legs { rng.gen_range(usize::from(n == 1)..=2) } else { 0 };
        for k in 0..legs {
            let w = rng.gen_range(0..n);
            vertices.push(Vertex { name: format!("x{k}"), infinite: true, genus: 0 });
            edges.push([w, vertices.len() - 1]);
            finite.push(false);
        }
    }
    TargetShape { vertices, edges, finite }
}

/// A random harmonic morphism, or `None` when the glued source came out disconnected
/// or the target is a bare point.
pub fn try_random_morphism<R: Rng>(rng: &mut R, p: &MorphismParams) -> Option<Morphism> {
    let shape = random_target(rng, p);
    if shape.edges.is_empty() {
        return None;
    }
    let d = rng.gen_range(1..=p.max_degree.max(1));

    let mut src_vertices: Vec<Vertex> = Vec::new();
    let mut vertex_map = Vec::new();
    // preimages of each finite target vertex with their local degrees
    let mut over: Vec<Vec<(usize, u32)>> = vec![Vec::new(); shape.vertices.len()];
    for (w, v) in shape.vertices.iter().enumerate() {
        if v.infinite {
            continue;
        }
        for part in composition(rng, d) {
            over[w].push((src_vertices.len(), part));
            src_vertices.push(Vertex {
                name: format!("v{}", src_vertices.len()),
                infinite: false,
                genus: rng.gen_range(0..=p.max_genus),
            });
            vertex_map.push(w);
        }
    }

    // (ends, target edge, degree)
    let mut pieces: Vec<([usize; 2], usize, u32)> = Vec::new();
    for (f, ends) in shape.edges.iter().enumerate() {
        if shape.finite[f] {
            // pair degree-one sheets at both ends, then merge coincident sheets into edges
            let slots = |side: &[(usize, u32)]| -> Vec<usize> {
                side.iter().flat_map(|&(v, k)| std::iter::repeat(v).take(k as usize)).collect()
            };
            let left = slots(&over[ends[0]]);
            let mut right = slots(&over[ends[1]]);
            right.shuffle(rng);
            let mut counts: std::collections::BTreeMap<(usize, usize), u32> = Default::default();
            for (a, b) in left.into_iter().zip(right) {
                *counts.entry((a, b)).or_default() += 1;
            }
            for ((a, b), k) in counts {
                for part in composition(rng, k) {
                    pieces.push(([a, b], f, part));
                }
            }
        } else {
            for &(v, k) in &over[ends[0]] {
                for part in composition(rng, k) {
                    let x = src_vertices.len();
                    src_vertices.push(Vertex { name: format!("v{x}"), infinite: true, genus: 0 });
                    vertex_map.push(ends[1]);
                    pieces.push(([v, x], f, part));
                }
            }
        }
    }

    // target lengths divisible by every degree above them keep the source integral
    let mut target_len = Vec::with_capacity(shape.edges.len());
    for f in 0..shape.edges.len() {
        if !shape.finite[f] {
            target_len.push(Length::Infinite);
            continue;
        }
        let l = pieces.iter().filter(|pc| pc.1 == f).fold(1u32, |acc, pc| acc.lcm(&pc.2));
        target_len.push(Length::Finite(int((l * rng.gen_range(1..=2)) as i64)));
    }

    let mut src_edges = Vec::new();
    let mut edge_map = Vec::new();
    let mut edge_degree = Vec::new();
    for (ends, f, k) in &pieces {
        let length = target_len[*f].scaled(crate::rational::frac(1, *k as i64));
        src_edges.push(Edge { name: format!("e{}", src_edges.len()), ends: *ends, length });
        edge_map.push(EdgeImage::Edge(*f));
        edge_degree.push(*k);
    }
    if p.contracted_edges {
        for (w, pre) in over.iter().enumerate() {
            if pre.len() >= 2 && rng.gen_bool(0.3) {
                let a = rng.gen_range(0..pre.len());
                let b = (a + rng.gen_range(1..pre.len())) % pre.len();
                src_edges.push(Edge {
                    name: format!("e{}", src_edges.len()),
                    ends: [pre[a].0, pre[b].0],
                    length: Length::Finite(int(rng.gen_range(1..=2))),
                });
                edge_map.push(EdgeImage::Contracted(w));
                edge_degree.push(0);
            }
        }
    }
    if !connected(src_vertices.len(), &src_edges) {
        return None;
    }

    let tgt_edges = shape
        .edges
        .iter()
        .enumerate()
        .map(|(f, ends)| Edge { name: format!("f{f}"), ends: *ends, length: target_len[f].clone() })
        .collect();
    let source = MetricGraph::from_parts(src_vertices, src_edges).ok()?;
    let target = MetricGraph::from_parts(shape.vertices, tgt_edges).ok()?;
    Some(Morphism::new(source, target, vertex_map, edge_map, edge_degree, None).expect("glued sheets are harmonic"))
}

pub fn random_morphism<R: Rng>(rng: &mut R, p: &MorphismParams) -> Morphism {
    loop {
        if let Some(m) = try_random_morphism(rng, p) {
            return m;
        }
    }
}

/// Connected loopless multigraph with `n` vertices and at most `max_edges` unit edges.
pub fn random_unit_graph<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize) -> MetricGraph {
    let n = rng.gen_range(2..=max_vertices.max(2));
    let extra = rng.gen_range(0..=max_edges.saturating_sub(n - 1));
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push([rng.gen_range(0..i), i]);
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        edges.push([a, b]);
    }
    let vertices = (0..n).map(|i| Vertex { name: format!("u{i}"), infinite: false, genus: 0 }).collect();
    let edges = edges
        .into_iter()
        .enumerate()
        .map(|(i, ends)| Edge { name: format!("g{i}"), ends, length: Length::Finite(int(1)) })
        .collect();
    MetricGraph::from_parts(vertices, edges).expect("connected and loopless")
}

/// Vertex coefficients with total degree in `[lo, hi]`.
pub fn random_vertex_divisor<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> Vec<i64> {
    let deg = rng.gen_range(lo..=hi);
    let mut d = vec![0i64; n];
    for x in d.iter_mut() {
        *x = rng.gen_range(-1..=1);
    }
    let mut excess = deg - d.iter().sum::<i64>();
    while excess != 0 {
        let i = rng.gen_range(0..n);
        d[i] += excess.signum();
        excess -= excess.signum();
    }
    d
}
