//! Augmented metric graphs with exact rational edge lengths.
//!
//! A [`MetricGraph`] is always a concrete *model*: a finite vertex set and a
//! list of edges joining distinct vertices. Infinite vertices are 1-valent
//! leaves whose unique edge has infinite length. Every vertex carries a
//! genus (zero at infinite vertices), so the type doubles as an augmented
//! graph.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::rational::{denominator_lcm, format_rational, Rational};

/// Edge length: a positive rational or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Length {
    Finite(Rational),
    Infinite,
}

impl Length {
    pub fn finite(&self) -> Option<Rational> {
        match self {
            Length::Finite(l) => Some(*l),
            Length::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Length::Infinite)
    }

    pub fn scaled(&self, factor: Rational) -> Length {
        match self {
            Length::Finite(l) => Length::Finite(*l * factor),
            Length::Infinite => Length::Infinite,
        }
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(l) => f.write_str(&format_rational(l)),
            Length::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub infinite: bool,
    pub genus: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    /// For infinite edges `ends[0]` is the finite endpoint.
    pub ends: [usize; 2],
    pub length: Length,
}

impl Edge {
    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }

    /// Which end (0 or 1) sits at `v`.
    pub fn end_at(&self, v: usize) -> usize {
        if self.ends[0] == v {
            0
        } else {
            1
        }
    }
}

/// A tangent direction at a vertex, i.e. an edge-end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Direction {
    pub edge: usize,
    pub end: usize,
}

/// Genus assignment per vertex index.
pub type GenusFunction = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<usize>>,
}

impl MetricGraph {
    /// Builds and validates a model.
    pub fn from_parts(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        let graph = Self::from_parts_unchecked(vertices, edges);
        let diags = graph.validate();
        if diags.is_empty() {
            Ok(graph)
        } else {
            Err(Error::InvalidModel(diags))
        }
    }

    /// Builds a model without checking invariants; use [`validate`](Self::validate).
    pub fn from_parts_unchecked(vertices: Vec<Vertex>, mut edges: Vec<Edge>) -> Self {
        let n = vertices.len();
        for edge in &mut edges {
            let [a, b] = edge.ends;
            if a < n && b < n && vertices[a].infinite && !vertices[b].infinite {
                edge.ends = [b, a];
            }
        }
        let mut incidence = vec![Vec::new(); n];
        for (i, edge) in edges.iter().enumerate() {
            for (k, &v) in edge.ends.iter().enumerate() {
                if v < n && (k == 0 || edge.ends[0] != v) {
                    incidence[v].push(i);
                }
            }
        }
        MetricGraph { vertices, edges, incidence }
    }

    /// Lists every violated model invariant. Empty means valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        use DiagnosticKind::*;
        let mut out = Vec::new();
        let n = self.vertices.len();
        if n == 0 {
            out.push(Diagnostic::new(EmptyGraph, "", "no vertices"));
            return out;
        }
        let mut seen = HashSet::new();
        for v in &self.vertices {
            if !seen.insert(v.name.as_str()) {
                out.push(Diagnostic::new(DuplicateId, &v.name, "vertex"));
            }
        }
        let mut seen = HashSet::new();
        for e in &self.edges {
            if !seen.insert(e.name.as_str()) {
                out.push(Diagnostic::new(DuplicateId, &e.name, "edge"));
            }
        }
        let mut structural = false;
        for e in &self.edges {
            let [a, b] = e.ends;
            if a >= n || b >= n {
                out.push(Diagnostic::new(UnknownEndpoint, &e.name, ""));
                structural = true;
                continue;
            }
            if a == b {
                out.push(Diagnostic::new(LoopEdge, &e.name, ""));
                continue;
            }
            let touches_infinite = self.vertices[a].infinite || self.vertices[b].infinite;
            match (&e.length, touches_infinite) {
                (Length::Infinite, false) => {
                    out.push(Diagnostic::new(InfiniteLengthOnFiniteEdge, &e.name, ""))
                }
                (Length::Finite(_), true) => {
                    out.push(Diagnostic::new(FiniteLengthOnInfiniteEdge, &e.name, ""))
                }
                (Length::Finite(l), false) if *l <= Rational::zero() => {
                    out.push(Diagnostic::new(NonPositiveLength, &e.name, format_rational(l)))
                }
                _ => {}
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.infinite {
                if self.incidence[i].len() != 1 {
                    out.push(Diagnostic::new(
                        InfiniteVertexValence,
                        &v.name,
                        format!("valence {}", self.incidence[i].len()),
                    ));
                } else {
                    let e = &self.edges[self.incidence[i][0]];
                    if self.vertices[e.other(i)].infinite {
                        out.push(Diagnostic::new(InfiniteVertexValence, &v.name, "no finite part"));
                    }
                }
                if v.genus != 0 {
                    out.push(Diagnostic::new(InfiniteVertexGenus, &v.name, ""));
                }
            }
        }
        if !structural && !self.is_connected() {
            out.push(Diagnostic::new(Disconnected, &self.vertices[0].name, ""));
        }
        out
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &e in &self.incidence[v] {
                let w = self.edges[e].other(v);
                if w < n && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges incident to `v` (each listed once).
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    /// Tangent directions at `v` as edge-ends.
    pub fn directions(&self, v: usize) -> impl Iterator<Item = Direction> + '_ {
        self.incidence[v].iter().map(move |&e| Direction { edge: e, end: self.edges[e].end_at(v) })
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn is_infinite_vertex(&self, v: usize) -> bool {
        self.vertices[v].infinite
    }

    /// An edge is finite when neither endpoint is an infinite vertex.
    pub fn is_finite_edge(&self, e: usize) -> bool {
        !self.edges[e].length.is_infinite()
    }

    pub fn has_infinite_vertices(&self) -> bool {
        self.vertices.iter().any(|v| v.infinite)
    }

    pub fn finite_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(move |&v| !self.vertices[v].infinite)
    }

    pub fn genus_function(&self) -> GenusFunction {
        self.vertices.iter().map(|v| v.genus).collect()
    }

    /// Same model with a different genus function.
    pub fn with_genus(&self, genus: &[u32]) -> Result<Self> {
        if genus.len() != self.vertices.len() {
            return Err(Error::Precondition("genus function size".into()));
        }
        let mut out = self.clone();
        for (v, &g) in out.vertices.iter_mut().zip(genus) {
            if v.infinite && g != 0 {
                return Err(Error::InvalidModel(vec![Diagnostic::new(
                    DiagnosticKind::InfiniteVertexGenus,
                    &v.name,
                    "",
                )]));
            }
            v.genus = g;
        }
        Ok(out)
    }

    pub fn is_totally_degenerate(&self) -> bool {
        self.vertices.iter().all(|v| v.genus == 0)
    }

    /// First Betti number of the finite part.
    pub fn first_betti(&self) -> i64 {
        let vf = self.finite_vertices().count() as i64;
        let ef = (0..self.edges.len()).filter(|&e| self.is_finite_edge(e)).count() as i64;
        ef - vf + 1
    }

    /// `h₁ + Σ g(p)`.
    pub fn genus(&self) -> i64 {
        self.first_betti() + self.vertices.iter().map(|v| v.genus as i64).sum::<i64>()
    }

    /// `K = Σ (val(p) + 2g(p) − 2)(p)`.
    pub fn canonical_divisor(&self) -> Divisor {
        let mut k = Divisor::new();
        for v in 0..self.vertices.len() {
            let c = self.valence(v) as i64 + 2 * self.vertices[v].genus as i64 - 2;
            k.add_point(PointLocation::Vertex(v), c);
        }
        k
    }

    /// Canonical location for a point at `offset` along `edge` (measured from `ends[0]`).
    pub fn point_on_edge(&self, edge: usize, offset: Rational) -> Result<PointLocation> {
        let e = self.edges.get(edge).ok_or_else(|| Error::UnknownId(format!("edge #{edge}")))?;
        if offset < Rational::zero() {
            return Err(Error::NotRationalPoint(format!("{} offset {}", e.name, offset)));
        }
        if offset.is_zero() {
            return Ok(PointLocation::Vertex(e.ends[0]));
        }
        match e.length {
            Length::Finite(l) if offset == l => Ok(PointLocation::Vertex(e.ends[1])),
            Length::Finite(l) if offset > l => {
                Err(Error::NotRationalPoint(format!("{} offset {} beyond length", e.name, offset)))
            }
            _ => Ok(PointLocation::Edge { edge, offset }),
        }
    }

    /// Checks that a location refers to this model.
    pub fn check_point(&self, p: &PointLocation) -> Result<()> {
        match p {
            PointLocation::Vertex(v) if *v < self.vertices.len() => Ok(()),
            PointLocation::Vertex(v) => Err(Error::UnknownId(format!("vertex #{v}"))),
            PointLocation::Edge { edge, offset } => {
                let canon = self.point_on_edge(*edge, *offset)?;
                if &canon == p {
                    Ok(())
                } else {
                    Err(Error::NotRationalPoint("non-canonical edge offset".into()))
                }
            }
        }
    }

    pub fn describe_point(&self, p: &PointLocation) -> String {
        match p {
            PointLocation::Vertex(v) => self.vertices[*v].name.clone(),
            PointLocation::Edge { edge, offset } => {
                format!("{}+{}", self.edges[*edge].name, format_rational(offset))
            }
        }
    }

    /// Promotes the given points to vertices. Lengths split exactly.
    pub fn subdivide(&self, points: &[PointLocation]) -> Result<(MetricGraph, Refinement)> {
        let mut cuts: Vec<BTreeSet<Rational>> = vec![BTreeSet::new(); self.edges.len()];
        for p in points {
            self.check_point(p)?;
            if let PointLocation::Edge { edge, offset } = p {
                cuts[*edge].insert(*offset);
            }
        }
        let cuts: Vec<Vec<Rational>> = cuts.into_iter().map(|c| c.into_iter().collect()).collect();
        Ok(self.refine(&cuts, Rational::one()))
    }

    /// Rescales all lengths by the LCM of their denominators and splits every
    /// finite edge into unit edges. Infinite edges are left whole.
    pub fn uniformize(&self) -> (MetricGraph, Rational, Refinement) {
        self.uniformize_with(&[])
    }

    /// Like [`uniformize`](Self::uniformize) but also makes the given points land on vertices.
    pub fn uniformize_with(&self, points: &[PointLocation]) -> (MetricGraph, Rational, Refinement) {
        let mut denoms: Vec<Rational> =
            self.edges.iter().filter_map(|e| e.length.finite()).collect();
        for p in points {
            if let PointLocation::Edge { offset, .. } = p {
                denoms.push(*offset);
            }
        }
        let scale = Rational::from_integer(denominator_lcm(&denoms));
        let cuts: Vec<Vec<Rational>> = self
            .edges
            .iter()
            .map(|e| match e.length {
                Length::Finite(l) => {
                    let n = (l * scale).to_integer();
                    (1..n).map(|k| Rational::new(k, 1) / scale).collect()
                }
                Length::Infinite => points
                    .iter()
                    .filter_map(|p| match p {
                        PointLocation::Edge { edge, offset }
                            if self.edges[*edge].name == e.name =>
                        {
                            Some(*offset)
                        }
                        _ => None,
                    })
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect(),
            })
            .collect();
        let (graph, refinement) = self.refine(&cuts, scale);
        (graph, scale, refinement)
    }

    /// Core refinement: cut each edge at the given interior offsets (old units)
    /// and multiply every length by `scale`.
    pub fn refine(&self, cuts: &[Vec<Rational>], scale: Rational) -> (MetricGraph, Refinement) {
        let mut names: HashSet<String> = self.vertices.iter().map(|v| v.name.clone()).collect();
        let mut vertices = self.vertices.clone();
        let mut edges = Vec::new();
        let mut pieces = Vec::with_capacity(self.edges.len());
        let mut vertex_origin: Vec<PointLocation> =
            (0..self.vertices.len()).map(PointLocation::Vertex).collect();
        let mut edge_origin = Vec::new();
        for (ei, e) in self.edges.iter().enumerate() {
            let mut offs: Vec<Rational> = cuts.get(ei).cloned().unwrap_or_default();
            offs.sort();
            offs.dedup();
            offs.retain(|o| *o > Rational::zero() && e.length.finite().is_none_or(|l| *o < l));
            let mut cut_positions = vec![Rational::zero()];
            let mut cut_vertices = vec![e.ends[0]];
            for (k, o) in offs.iter().enumerate() {
                let mut name = format!("{}#{}", e.name, k + 1);
                while names.contains(&name) {
                    name.push('\'');
                }
                names.insert(name.clone());
                vertices.push(Vertex { name, infinite: false, genus: 0 });
                vertex_origin.push(PointLocation::Edge { edge: ei, offset: *o });
                cut_positions.push(*o * scale);
                cut_vertices.push(vertices.len() - 1);
            }
            let finite_end = e.length.finite().map(|l| l * scale);
            cut_vertices.push(e.ends[1]);
            let mut piece_edges = Vec::new();
            let count = cut_vertices.len() - 1;
            for k in 0..count {
                let length = if k + 1 < count {
                    Length::Finite(cut_positions[k + 1] - cut_positions[k])
                } else {
                    match finite_end {
                        Some(l) => Length::Finite(l - cut_positions[k]),
                        None => Length::Infinite,
                    }
                };
                let name = if count == 1 { e.name.clone() } else { format!("{}.{}", e.name, k) };
                edges.push(Edge { name, ends: [cut_vertices[k], cut_vertices[k + 1]], length });
                edge_origin.push((ei, cut_positions[k]));
                piece_edges.push(edges.len() - 1);
            }
            if let Some(l) = finite_end {
                cut_positions.push(l);
            }
            pieces.push(EdgePieces { cuts: cut_positions, edges: piece_edges, vertices: cut_vertices });
        }
        let graph = MetricGraph::from_parts_unchecked(vertices, edges);
        let refinement = Refinement {
            scale,
            old_vertex_count: self.vertices.len(),
            pieces,
            vertex_origin,
            edge_origin,
        };
        (graph, refinement)
    }

    /// Attaches a new leaf edge at `p` (a finite Λ-point).
    pub fn elementary_modification(
        &self,
        p: &PointLocation,
        new_length: Length,
    ) -> Result<(MetricGraph, Modification)> {
        self.check_point(p)?;
        if let PointLocation::Vertex(v) = p {
            if self.vertices[*v].infinite {
                return Err(Error::NotRationalPoint(format!(
                    "{} is an infinite vertex",
                    self.vertices[*v].name
                )));
            }
        }
        let (sub, refinement) = self.subdivide(std::slice::from_ref(p))?;
        let attach = match refinement.map_point(p) {
            PointLocation::Vertex(v) => v,
            PointLocation::Edge { .. } => unreachable!("subdivision promotes the point"),
        };
        let mut vertices = sub.vertices.clone();
        let mut edges = sub.edges.clone();
        let mut name = format!("{}~leaf", sub.vertices[attach].name);
        while vertices.iter().any(|v| v.name == name) {
            name.push('\'');
        }
        let infinite = new_length.is_infinite();
        vertices.push(Vertex { name: name.clone(), infinite, genus: 0 });
        let new_vertex = vertices.len() - 1;
        let mut ename = format!("{name}~edge");
        while edges.iter().any(|e| e.name == ename) {
            ename.push('\'');
        }
        edges.push(Edge { name: ename, ends: [attach, new_vertex], length: new_length });
        let new_edge = edges.len() - 1;
        let graph = MetricGraph::from_parts(vertices, edges)?;
        Ok((graph, Modification { refinement, attach, new_vertex, new_edge }))
    }

    /// Finite edges whose removal disconnects the finite part, plus the infinite leaf edges.
    pub fn bridges(&self) -> Bridges {
        let n = self.vertices.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut bridges = BTreeSet::new();
        let mut timer = 0usize;
        for root in self.finite_vertices() {
            if disc[root] != usize::MAX {
                continue;
            }
            // iterative DFS: (vertex, parent edge, next incidence index)
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(&mut (v, parent_edge, ref mut idx)) = stack.last_mut() {
                if *idx < self.incidence[v].len() {
                    let e = self.incidence[v][*idx];
                    *idx += 1;
                    if e == parent_edge || !self.is_finite_edge(e) {
                        continue;
                    }
                    let w = self.edges[e].other(v);
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, e, 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(u, _, _)) = stack.last() {
                        low[u] = low[u].min(low[v]);
                        if low[v] > disc[u] {
                            bridges.insert(parent_edge);
                        }
                    }
                }
            }
        }
        let infinite_leaves = (0..self.edges.len()).filter(|&e| !self.is_finite_edge(e)).collect();
        Bridges { bridges, infinite_leaves }
    }

    /// Same model with every length multiplied by `factor`.
    pub fn scaled(&self, factor: Rational) -> MetricGraph {
        let mut out = self.clone();
        for e in &mut out.edges {
            e.length = e.length.scaled(factor);
        }
        out
    }

    /// The model with infinite vertices and edges removed, with index maps
    /// from the old model (`None` for removed items).
    pub fn finite_part(&self) -> (MetricGraph, Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut vmap = vec![None; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.infinite {
                vmap[i] = Some(vertices.len());
                vertices.push(v.clone());
            }
        }
        let mut emap = vec![None; self.edges.len()];
        let mut edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if let (Some(a), Some(b)) = (vmap[e.ends[0]], vmap[e.ends[1]]) {
                emap[i] = Some(edges.len());
                edges.push(Edge { name: e.name.clone(), ends: [a, b], length: e.length.clone() });
            }
        }
        (MetricGraph::from_parts_unchecked(vertices, edges), vmap, emap)
    }

    /// Maximal paths whose interior vertices have valence 2 and genus 0, between
    /// essential vertices. A circle gets vertex 0 as its only essential vertex.
    /// Compact models only.
    pub fn essential_chains(&self) -> (Vec<usize>, Vec<Chain>) {
        let essential_at = |v: usize| self.valence(v) != 2 || self.vertices[v].genus > 0;
        let mut essential: Vec<usize> = (0..self.vertices.len()).filter(|&v| essential_at(v)).collect();
        if essential.is_empty() && !self.vertices.is_empty() {
            essential.push(0);
        }
        let is_end = |v: usize| essential.binary_search(&v).is_ok();
        let mut visited = vec![false; self.edges.len()];
        let mut chains = Vec::new();
        for &u in &essential {
            for &e0 in &self.incidence[u] {
                if visited[e0] {
                    continue;
                }
                let (mut cur, mut e, mut length) = (u, e0, Rational::zero());
                let mut edges = Vec::new();
                let end = loop {
                    visited[e] = true;
                    edges.push(e);
                    length += self.edges[e].length.finite().expect("compact model");
                    let next = self.edges[e].other(cur);
                    if is_end(next) {
                        break next;
                    }
                    cur = next;
                    e = *self.incidence[next].iter().find(|&&f| f != e).expect("valence 2");
                };
                chains.push(Chain { ends: [u, end], length, name: self.edges[e0].name.clone(), edges });
            }
        }
        (essential, chains)
    }

    /// Finite part is a tree (no cycles).
    pub fn is_tree(&self) -> bool {
        self.first_betti() == 0
    }
}

/// A maximal unbranched path between essential vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub ends: [usize; 2],
    pub length: Rational,
    /// Name of the first edge.
    pub name: String,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bridges {
    pub bridges: BTreeSet<usize>,
    pub infinite_leaves: BTreeSet<usize>,
}

#[derive(Clone, Debug)]
struct EdgePieces {
    /// Cut positions in new units, starting at 0 (and ending at the full length for finite edges).
    cuts: Vec<Rational>,
    edges: Vec<usize>,
    vertices: Vec<usize>,
}

/// Point translation from a model to a refined, possibly rescaled, model.
#[derive(Clone, Debug)]
pub struct Refinement {
    scale: Rational,
    old_vertex_count: usize,
    pieces: Vec<EdgePieces>,
    vertex_origin: Vec<PointLocation>,
    edge_origin: Vec<(usize, Rational)>,
}

impl Refinement {
    pub fn scale(&self) -> Rational {
        self.scale
    }

    /// Old point → new point.
    pub fn map_point(&self, p: &PointLocation) -> PointLocation {
        match p {
            PointLocation::Vertex(v) => PointLocation::Vertex(*v),
            PointLocation::Edge { edge, offset } => {
                let pieces = &self.pieces[*edge];
                let y = *offset * self.scale;
                let mut k = 0;
                while k + 1 < pieces.edges.len() && pieces.cuts[k + 1] <= y {
                    k += 1;
                }
                if y == pieces.cuts[k] {
                    PointLocation::Vertex(pieces.vertices[k])
                } else {
                    PointLocation::Edge { edge: pieces.edges[k], offset: y - pieces.cuts[k] }
                }
            }
        }
    }

    pub fn map_divisor(&self, d: &Divisor) -> Divisor {
        let mut out = Divisor::new();
        for (p, c) in d.iter() {
            out.add_point(self.map_point(p), c);
        }
        out
    }

    /// New point → old point.
    pub fn unmap_point(&self, p: &PointLocation) -> PointLocation {
        match p {
            PointLocation::Vertex(v) => self.vertex_origin[*v].clone(),
            PointLocation::Edge { edge, offset } => {
                let (old, start) = self.edge_origin[*edge];
                PointLocation::Edge { edge: old, offset: (start + *offset) / self.scale }
            }
        }
    }

    pub fn unmap_divisor(&self, d: &Divisor) -> Divisor {
        let mut out = Divisor::new();
        for (p, c) in d.iter() {
            out.add_point(self.unmap_point(p), c);
        }
        out
    }

    /// Whether a new vertex existed in the old model.
    pub fn is_original_vertex(&self, v: usize) -> bool {
        v < self.old_vertex_count
    }

    /// New edges that make up old edge `e`, in order from `ends[0]`.
    pub fn pieces_of(&self, e: usize) -> &[usize] {
        &self.pieces[e].edges
    }

    /// Old edge containing new edge `e`, and its start offset (new units).
    pub fn origin_of_edge(&self, e: usize) -> (usize, Rational) {
        self.edge_origin[e]
    }
}

/// Result of an elementary tropical modification.
#[derive(Clone, Debug)]
pub struct Modification {
    /// Original model → (subdivided) base of the modified model.
    pub refinement: Refinement,
    /// Vertex of the modified model where the leaf is attached.
    pub attach: usize,
    pub new_vertex: usize,
    pub new_edge: usize,
}

impl Modification {
    /// The retraction τ on points of the modified model.
    pub fn retract_point(&self, p: &PointLocation) -> PointLocation {
        match p {
            PointLocation::Vertex(v) if *v == self.new_vertex => PointLocation::Vertex(self.attach),
            PointLocation::Edge { edge, .. } if *edge == self.new_edge => {
                PointLocation::Vertex(self.attach)
            }
            other => other.clone(),
        }
    }

    /// τ_* extended linearly.
    pub fn retract_divisor(&self, d: &Divisor) -> Divisor {
        let mut out = Divisor::new();
        for (p, c) in d.iter() {
            out.add_point(self.retract_point(p), c);
        }
        out
    }
}

/// A Λ-point: a vertex, or an interior point of an edge at a rational offset from `ends[0]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointLocation {
    Vertex(usize),
    Edge { edge: usize, offset: Rational },
}

/// Finite integer combination of points, canonical (no zero coefficients).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divisor(BTreeMap<PointLocation, i64>);

impl Divisor {
    pub fn new() -> Self {
        Divisor(BTreeMap::new())
    }

    pub fn point(p: PointLocation) -> Self {
        let mut d = Divisor::new();
        d.add_point(p, 1);
        d
    }

    pub fn vertex(v: usize) -> Self {
        Divisor::point(PointLocation::Vertex(v))
    }

    pub fn from_vertex_coefficients(coeffs: &[i64]) -> Self {
        let mut d = Divisor::new();
        for (v, &c) in coeffs.iter().enumerate() {
            d.add_point(PointLocation::Vertex(v), c);
        }
        d
    }

    pub fn add_point(&mut self, p: PointLocation, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.0.entry(p.clone()).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.0.remove(&p);
        }
    }

    pub fn coefficient(&self, p: &PointLocation) -> i64 {
        self.0.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.0.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_effective(&self) -> bool {
        self.0.values().all(|&c| c >= 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PointLocation, i64)> {
        self.0.iter().map(|(p, &c)| (p, c))
    }

    pub fn support(&self) -> impl Iterator<Item = &PointLocation> {
        self.0.keys()
    }

    pub fn scaled(&self, k: i64) -> Divisor {
        let mut out = Divisor::new();
        for (p, c) in self.iter() {
            out.add_point(p.clone(), c * k);
        }
        out
    }

    /// Coefficients on vertices `0..n`; `None` if some support point is not a vertex.
    pub fn vertex_vector(&self, n: usize) -> Option<Vec<i64>> {
        let mut out = vec![0; n];
        for (p, c) in self.iter() {
            match p {
                PointLocation::Vertex(v) if *v < n => out[*v] = c,
                _ => return None,
            }
        }
        Some(out)
    }
}

impl AddAssign<&Divisor> for Divisor {
    fn add_assign(&mut self, rhs: &Divisor) {
        for (p, c) in rhs.iter() {
            self.add_point(p.clone(), c);
        }
    }
}

impl Add<&Divisor> for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Divisor> for &Divisor {
    type Output = Divisor;
    fn sub(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        out += &rhs.scaled(-1);
        out
    }
}

impl Neg for &Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        self.scaled(-1)
    }
}

/// Incremental constructor. Loops are subdivided at their midpoint.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, name: impl Into<String>, genus: u32) -> usize {
        self.vertices.push(Vertex { name: name.into(), infinite: false, genus });
        self.vertices.len() - 1
    }

    pub fn infinite_vertex(&mut self, name: impl Into<String>) -> usize {
        self.vertices.push(Vertex { name: name.into(), infinite: true, genus: 0 });
        self.vertices.len() - 1
    }

    pub fn edge(&mut self, name: impl Into<String>, a: usize, b: usize, length: Length) -> usize {
        self.edges.push(Edge { name: name.into(), ends: [a, b], length });
        self.edges.len() - 1
    }

    pub fn finite_edge(&mut self, name: impl Into<String>, a: usize, b: usize, length: Rational) -> usize {
        self.edge(name, a, b, Length::Finite(length))
    }

    /// Adds an infinite leaf at `v` and returns the new infinite vertex.
    pub fn leaf(&mut self, name: impl Into<String>, v: usize) -> usize {
        let name = name.into();
        let w = self.infinite_vertex(format!("{name}~inf"));
        self.edge(name, v, w, Length::Infinite);
        w
    }

    /// A cycle of the given length based at `v`, realised as two parallel
    /// half-length edges through a new midpoint vertex. Returns the midpoint.
    pub fn cycle(&mut self, name: impl Into<String>, v: usize, length: Rational) -> usize {
        let name = name.into();
        let mid = self.vertex(format!("{name}~mid"), 0);
        let half = length / Rational::from_integer(2);
        self.finite_edge(format!("{name}~a"), v, mid, half);
        self.finite_edge(format!("{name}~b"), v, mid, half);
        mid
    }

    pub fn build(self) -> Result<MetricGraph> {
        MetricGraph::from_parts(self.vertices, self.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn circle() -> MetricGraph {
        let mut b = GraphBuilder::new();
        let u = b.vertex("u", 0);
        let v = b.vertex("v", 0);
        b.finite_edge("e1", u, v, int(1));
        b.finite_edge("e2", v, u, int(1));
        b.build().unwrap()
    }

    fn banana(lengths: &[Rational]) -> MetricGraph {
        let mut b = GraphBuilder::new();
        let u = b.vertex("u", 0);
        let v = b.vertex("v", 0);
        for (i, l) in lengths.iter().enumerate() {
            b.finite_edge(format!("e{}", i + 1), u, v, *l);
        }
        b.build().unwrap()
    }

    fn path(n: usize) -> MetricGraph {
        let mut b = GraphBuilder::new();
        let vs: Vec<_> = (0..=n).map(|i| b.vertex(format!("p{i}"), 0)).collect();
        for i in 0..n {
            b.finite_edge(format!("s{i}"), vs[i], vs[i + 1], int(1));
        }
        b.build().unwrap()
    }

    #[test]
    fn circle_is_valid() {
        assert!(circle().validate().is_empty());
    }

    #[test]
    fn loop_edge_is_reported() {
        let g = MetricGraph::from_parts_unchecked(
            vec![Vertex { name: "a".into(), infinite: false, genus: 0 }],
            vec![Edge { name: "l".into(), ends: [0, 0], length: Length::Finite(int(1)) }],
        );
        let d = g.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::LoopEdge);
        assert_eq!(d[0].id, "l");
    }

    #[test]
    fn infinite_length_between_finite_vertices_is_reported() {
        let g = MetricGraph::from_parts_unchecked(
            vec![
                Vertex { name: "a".into(), infinite: false, genus: 0 },
                Vertex { name: "b".into(), infinite: false, genus: 0 },
            ],
            vec![Edge { name: "e".into(), ends: [0, 1], length: Length::Infinite }],
        );
        let kinds: Vec<_> = g.validate().iter().map(|d| d.kind).collect();
        assert_eq!(kinds, vec![DiagnosticKind::InfiniteLengthOnFiniteEdge]);
    }

    #[test]
    fn disconnected_and_bad_infinite_vertex() {
        let g = MetricGraph::from_parts_unchecked(
            vec![
                Vertex { name: "a".into(), infinite: false, genus: 0 },
                Vertex { name: "w".into(), infinite: true, genus: 1 },
            ],
            vec![],
        );
        let kinds: BTreeSet<_> = g.validate().iter().map(|d| d.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::InfiniteVertexValence));
        assert!(kinds.contains(&DiagnosticKind::InfiniteVertexGenus));
        assert!(kinds.contains(&DiagnosticKind::Disconnected));
    }

    #[test]
    fn betti_and_genus() {
        assert_eq!(circle().first_betti(), 1);
        assert_eq!(path(3).first_betti(), 0);
        let b = banana(&[int(1); 4]);
        assert_eq!(b.first_betti(), 3);
        assert_eq!(b.genus(), 3);
        // the same banana with every parallel edge subdivided once
        let mids: Vec<_> = (0..4).map(|e| PointLocation::Edge { edge: e, offset: frac(1, 2) }).collect();
        let (sub, _) = b.subdivide(&mids).unwrap();
        assert_eq!((sub.vertex_count(), sub.edge_count()), (6, 8));
        assert_eq!(sub.first_betti(), 3);

        let mut single = GraphBuilder::new();
        single.vertex("p", 2);
        assert_eq!(single.build().unwrap().genus(), 2);
    }

    #[test]
    fn canonical_divisors() {
        assert!(circle().canonical_divisor().is_zero());
        let k = banana(&[int(1); 4]).canonical_divisor();
        assert_eq!(k.coefficient(&PointLocation::Vertex(0)), 2);
        assert_eq!(k.coefficient(&PointLocation::Vertex(1)), 2);
        assert_eq!(k.degree(), 4);

        let mut b = GraphBuilder::new();
        let p = b.vertex("p", 1);
        let q = b.vertex("q", 0);
        b.finite_edge("e", p, q, int(1));
        let g = b.build().unwrap();
        assert_eq!(g.canonical_divisor().coefficient(&PointLocation::Vertex(p)), 1);
        assert_eq!(g.canonical_divisor().degree(), 2 * g.genus() - 2);
    }

    #[test]
    fn subdivide_circle_midpoint() {
        let g = circle();
        let (sub, r) = g.subdivide(&[PointLocation::Edge { edge: 0, offset: frac(1, 2) }]).unwrap();
        assert_eq!((sub.vertex_count(), sub.edge_count()), (3, 3));
        let total: Rational = sub.edges().iter().filter_map(|e| e.length.finite()).sum();
        assert_eq!(total, int(2));
        let mapped = r.map_point(&PointLocation::Edge { edge: 0, offset: frac(1, 2) });
        assert_eq!(mapped, PointLocation::Vertex(2));
        assert_eq!(r.unmap_point(&mapped), PointLocation::Edge { edge: 0, offset: frac(1, 2) });
    }

    #[test]
    fn subdivide_nothing_is_identity() {
        let g = circle();
        let (sub, _) = g.subdivide(&[]).unwrap();
        assert_eq!(sub, g);
    }

    #[test]
    fn subdivide_thirds() {
        let g = path(1);
        let (sub, _) = g.subdivide(&[PointLocation::Edge { edge: 0, offset: frac(1, 3) }]).unwrap();
        let lens: Vec<_> = sub.edges().iter().map(|e| e.length.finite().unwrap()).collect();
        assert_eq!(lens, vec![frac(1, 3), frac(2, 3)]);
    }

    #[test]
    fn uniformize_examples() {
        let (u, scale, _) = banana(&[int(1), int(2), int(2)]).uniformize();
        assert_eq!(scale, int(1));
        assert_eq!((u.vertex_count(), u.edge_count()), (4, 5));

        let (u, scale, _) = banana(&[frac(1, 2); 3]).uniformize();
        assert_eq!(scale, int(2));
        assert_eq!((u.vertex_count(), u.edge_count()), (2, 3));

        let (u, scale, r) = banana(&[frac(1, 2), frac(1, 3)]).uniformize();
        assert_eq!(scale, int(6));
        assert_eq!(r.pieces_of(0).len(), 3);
        assert_eq!(r.pieces_of(1).len(), 2);
        assert!(u.edges().iter().all(|e| e.length == Length::Finite(int(1))));
    }

    #[test]
    fn modification_keeps_genus_and_shifts_canonical() {
        let g = circle();
        let (m, modif) = g.elementary_modification(&PointLocation::Vertex(0), Length::Infinite).unwrap();
        assert_eq!(m.genus(), 1);
        let k = m.canonical_divisor();
        assert_eq!(k.coefficient(&PointLocation::Vertex(modif.new_vertex)), -1);
        assert_eq!(k.coefficient(&PointLocation::Vertex(modif.attach)), 1);
        let q = PointLocation::Edge { edge: modif.new_edge, offset: int(5) };
        assert_eq!(modif.retract_point(&q), PointLocation::Vertex(0));
    }

    #[test]
    fn modification_at_infinite_vertex_fails() {
        let mut b = GraphBuilder::new();
        let v = b.vertex("v", 0);
        let w = b.leaf("l", v);
        let g = b.build().unwrap();
        assert!(matches!(
            g.elementary_modification(&PointLocation::Vertex(w), Length::Infinite),
            Err(Error::NotRationalPoint(_))
        ));
    }

    #[test]
    fn retract_divisor_examples() {
        let g = circle();
        let (m, modif) = g.elementary_modification(&PointLocation::Vertex(0), Length::Infinite).unwrap();
        let away = Divisor::vertex(1);
        assert_eq!(modif.retract_divisor(&away), away);
        let q = PointLocation::Edge { edge: modif.new_edge, offset: int(1) };
        assert_eq!(modif.retract_divisor(&Divisor::point(q.clone())), Divisor::vertex(0));
        let mut d = Divisor::point(q).scaled(2);
        d.add_point(PointLocation::Vertex(0), -1);
        assert_eq!(modif.retract_divisor(&d), Divisor::vertex(0));
        assert!(m.validate().is_empty());
    }

    #[test]
    fn bridges_examples() {
        assert_eq!(path(2).bridges().bridges, BTreeSet::from([0, 1]));
        assert!(circle().bridges().bridges.is_empty());
        // dumbbell: two cycles joined by a segment
        let mut b = GraphBuilder::new();
        let x = b.vertex("x", 0);
        let y = b.vertex("y", 0);
        b.cycle("c1", x, int(1));
        b.cycle("c2", y, int(1));
        let seg = b.finite_edge("seg", x, y, int(1));
        let g = b.build().unwrap();
        assert_eq!(g.bridges().bridges, BTreeSet::from([seg]));
    }

    #[test]
    fn infinite_edges_are_oriented_from_the_finite_end() {
        let g = MetricGraph::from_parts(
            vec![
                Vertex { name: "w".into(), infinite: true, genus: 0 },
                Vertex { name: "v".into(), infinite: false, genus: 0 },
            ],
            vec![Edge { name: "e".into(), ends: [0, 1], length: Length::Infinite }],
        )
        .unwrap();
        assert_eq!(g.edge(0).ends, [1, 0]);
        assert_eq!(g.first_betti(), 0);
        assert_eq!(g.bridges().infinite_leaves, BTreeSet::from([0]));
    }
}
