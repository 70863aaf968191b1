//! Morphisms of metric graphs: validation, harmonicity, ramification and
//! divisor transport.

use std::collections::BTreeMap;

use num_integer::Integer;

use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::graph::{Direction, Divisor, Length, MetricGraph, PointLocation};
use crate::partition::Partition;
use crate::rational::Rational;

/// Image of a source edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeImage {
    Edge(usize),
    Contracted(usize),
}

/// A morphism between two concrete models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    source: MetricGraph,
    target: MetricGraph,
    vertex_map: Vec<usize>,
    edge_map: Vec<EdgeImage>,
    edge_degree: Vec<u32>,
    point_degrees: Option<Vec<u32>>,
}

/// Values of `R_{p'}` and, where defined, `r_{p'}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ramification {
    pub divisor: Divisor,
    /// `R_{p'}` per source vertex.
    pub big_r: Vec<i64>,
    /// `r_{p'}` per source vertex with `d_{p'} ≠ 0`.
    pub small_r: Vec<Option<i64>>,
}

impl Morphism {
    /// Builds and validates a morphism.
    pub fn new(
        source: MetricGraph,
        target: MetricGraph,
        vertex_map: Vec<usize>,
        edge_map: Vec<EdgeImage>,
        edge_degree: Vec<u32>,
        point_degrees: Option<Vec<u32>>,
    ) -> Result<Self> {
        let m = Morphism { source, target, vertex_map, edge_map, edge_degree, point_degrees };
        let diags = m.validate();
        if diags.is_empty() {
            Ok(m)
        } else {
            Err(Error::InvalidMorphism(diags))
        }
    }

    pub fn from_parts_unchecked(
        source: MetricGraph,
        target: MetricGraph,
        vertex_map: Vec<usize>,
        edge_map: Vec<EdgeImage>,
        edge_degree: Vec<u32>,
        point_degrees: Option<Vec<u32>>,
    ) -> Self {
        Morphism { source, target, vertex_map, edge_map, edge_degree, point_degrees }
    }

    /// The identity of a model, all degrees 1.
    pub fn identity(graph: &MetricGraph) -> Self {
        let point = if graph.edge_count() == 0 { Some(vec![1; graph.vertex_count()]) } else { None };
        Morphism {
            source: graph.clone(),
            target: graph.clone(),
            vertex_map: (0..graph.vertex_count()).collect(),
            edge_map: (0..graph.edge_count()).map(EdgeImage::Edge).collect(),
            edge_degree: vec![1; graph.edge_count()],
            point_degrees: point,
        }
    }

    /// Lists every violated invariant. Empty means valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        use DiagnosticKind::*;
        let mut out = Vec::new();
        let (src, tgt) = (&self.source, &self.target);
        if self.vertex_map.len() != src.vertex_count() {
            out.push(Diagnostic::new(MapSize, "vertex_map", ""));
        }
        if self.edge_map.len() != src.edge_count() || self.edge_degree.len() != src.edge_count() {
            out.push(Diagnostic::new(MapSize, "edge_map", ""));
        }
        if !out.is_empty() {
            return out;
        }
        for (v, &img) in self.vertex_map.iter().enumerate() {
            if img >= tgt.vertex_count() {
                out.push(Diagnostic::new(UnknownImage, &src.vertex(v).name, ""));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (e, edge) in src.edges().iter().enumerate() {
            let name = &edge.name;
            let d = self.edge_degree[e];
            let [a, b] = edge.ends;
            let (ia, ib) = (self.vertex_map[a], self.vertex_map[b]);
            match self.edge_map[e] {
                EdgeImage::Contracted(v) => {
                    if v >= tgt.vertex_count() {
                        out.push(Diagnostic::new(UnknownImage, name, ""));
                        continue;
                    }
                    if d != 0 {
                        out.push(Diagnostic::new(DegreeContractionMismatch, name, format!("degree {d}")));
                    }
                    if ia != v || ib != v {
                        out.push(Diagnostic::new(EndpointMismatch, name, "contracted"));
                    }
                }
                EdgeImage::Edge(t) => {
                    if t >= tgt.edge_count() {
                        out.push(Diagnostic::new(UnknownImage, name, ""));
                        continue;
                    }
                    if d == 0 {
                        out.push(Diagnostic::new(DegreeContractionMismatch, name, "degree 0"));
                    }
                    let te = tgt.edge(t);
                    let ok = (te.ends[0] == ia && te.ends[1] == ib)
                        || (te.ends[0] == ib && te.ends[1] == ia);
                    if !ok {
                        out.push(Diagnostic::new(EndpointMismatch, name, &te.name));
                    }
                    match (&edge.length, &te.length) {
                        (Length::Finite(l), Length::Finite(lt)) => {
                            if *lt != *l * Rational::from_integer(d as i64) {
                                out.push(Diagnostic::new(
                                    MetricMismatch,
                                    name,
                                    format!("{} != {} * {}", te.length, d, edge.length),
                                ));
                            }
                        }
                        (Length::Infinite, Length::Infinite) => {}
                        _ => out.push(Diagnostic::new(InfiniteEdgeImage, name, &te.name)),
                    }
                }
            }
        }
        let point_target = tgt.vertex_count() == 1 && tgt.edge_count() == 0;
        match (&self.point_degrees, point_target) {
            (None, true) => out.push(Diagnostic::new(PointDegreesMissing, &tgt.vertex(0).name, "")),
            (Some(_), false) => out.push(Diagnostic::new(PointDegreesUnexpected, "point_target_degrees", "")),
            (Some(pd), true) => {
                if pd.len() != src.vertex_count() {
                    out.push(Diagnostic::new(MapSize, "point_target_degrees", ""));
                } else {
                    for (v, &k) in pd.iter().enumerate() {
                        if k == 0 {
                            out.push(Diagnostic::new(PointDegreesMissing, &src.vertex(v).name, "zero degree"));
                        }
                    }
                }
            }
            (None, false) => {}
        }
        out
    }

    pub fn source(&self) -> &MetricGraph {
        &self.source
    }

    pub fn target(&self) -> &MetricGraph {
        &self.target
    }

    pub fn vertex_map(&self) -> &[usize] {
        &self.vertex_map
    }

    pub fn edge_map(&self) -> &[EdgeImage] {
        &self.edge_map
    }

    pub fn edge_degrees(&self) -> &[u32] {
        &self.edge_degree
    }

    pub fn point_degrees(&self) -> Option<&[u32]> {
        self.point_degrees.as_deref()
    }

    pub fn image_vertex(&self, v: usize) -> usize {
        self.vertex_map[v]
    }

    pub fn edge_degree(&self, e: usize) -> u32 {
        self.edge_degree[e]
    }

    pub fn is_point_target(&self) -> bool {
        self.target.vertex_count() == 1 && self.target.edge_count() == 0
    }

    /// Whether source edge `e` runs in the same direction as its image.
    fn forward(&self, e: usize) -> bool {
        match self.edge_map[e] {
            EdgeImage::Edge(t) => self.vertex_map[self.source.edge(e).ends[0]] == self.target.edge(t).ends[0],
            EdgeImage::Contracted(_) => true,
        }
    }

    /// The target direction a source direction maps to, if not contracted.
    pub fn image_direction(&self, dir: Direction) -> Option<Direction> {
        match self.edge_map[dir.edge] {
            EdgeImage::Edge(t) => {
                let end = if self.forward(dir.edge) { dir.end } else { 1 - dir.end };
                Some(Direction { edge: t, end })
            }
            EdgeImage::Contracted(_) => None,
        }
    }

    /// Per target direction at `φ(p')`, the sum of source direction degrees over it.
    fn direction_sums(&self, v: usize) -> BTreeMap<usize, u32> {
        let p = self.vertex_map[v];
        let mut sums: BTreeMap<usize, u32> = self.target.incident(p).iter().map(|&t| (t, 0)).collect();
        for &e in self.source.incident(v) {
            if let EdgeImage::Edge(t) = self.edge_map[e] {
                *sums.entry(t).or_insert(0) += self.edge_degree[e];
            }
        }
        sums
    }

    /// `d_{p'}(φ)`, or `NotHarmonic` naming the disagreeing directions.
    pub fn local_degree(&self, v: usize) -> Result<u32> {
        if self.is_point_target() {
            return self
                .point_degrees
                .as_ref()
                .map(|pd| pd[v])
                .ok_or(Error::PointTargetDegrees);
        }
        let sums = self.direction_sums(v);
        let mut values = sums.values();
        let Some(&first) = values.next() else {
            return Err(Error::NotHarmonic(format!("{} maps to an isolated vertex", self.source.vertex(v).name)));
        };
        if values.all(|&s| s == first) {
            Ok(first)
        } else {
            let detail: Vec<String> = sums
                .iter()
                .map(|(t, s)| format!("{}:{}", self.target.edge(*t).name, s))
                .collect();
            Err(Error::NotHarmonic(format!("{} [{}]", self.source.vertex(v).name, detail.join(", "))))
        }
    }

    /// All local degrees, failing on the first non-harmonic vertex.
    pub fn local_degrees(&self) -> Result<Vec<u32>> {
        (0..self.source.vertex_count()).map(|v| self.local_degree(v)).collect()
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit_v = vec![false; self.target.vertex_count()];
        for &p in &self.vertex_map {
            hit_v[p] = true;
        }
        let mut hit_e = vec![false; self.target.edge_count()];
        for img in &self.edge_map {
            if let EdgeImage::Edge(t) = img {
                hit_e[*t] = true;
            }
        }
        hit_v.iter().chain(hit_e.iter()).all(|&h| h)
    }

    pub fn is_harmonic(&self) -> bool {
        self.local_degrees().is_ok() && self.is_surjective() && self.degree().is_ok()
    }

    /// `deg φ`, checked to be independent of the target vertex.
    pub fn degree(&self) -> Result<u32> {
        let local = self.local_degrees()?;
        if !self.is_surjective() {
            return Err(Error::NotHarmonic("morphism is not surjective".into()));
        }
        let mut totals = vec![0u32; self.target.vertex_count()];
        for (v, &d) in local.iter().enumerate() {
            totals[self.vertex_map[v]] += d;
        }
        let first = totals[0];
        if let Some(p) = totals.iter().position(|&t| t != first) {
            return Err(Error::NotHarmonic(format!(
                "degree over {} is {} but {} over {}",
                self.target.vertex(p).name,
                totals[p],
                first,
                self.target.vertex(0).name
            )));
        }
        Ok(first)
    }

    pub fn is_finite(&self) -> bool {
        self.edge_degree.iter().all(|&d| d > 0)
    }

    /// `R_{p'}` and `r_{p'}` for every source vertex.
    pub fn ramification(&self) -> Result<Ramification> {
        let local = self.local_degrees()?;
        let mut divisor = Divisor::new();
        let mut big_r = Vec::with_capacity(local.len());
        let mut small_r = Vec::with_capacity(local.len());
        for (v, &d) in local.iter().enumerate() {
            let g_src = self.source.vertex(v).genus as i64;
            let g_tgt = self.target.vertex(self.vertex_map[v]).genus as i64;
            let mut defect = 0i64;
            let mut contracted = 0i64;
            for &e in self.source.incident(v) {
                let dv = self.edge_degree[e] as i64;
                defect += dv - 1;
                if dv == 0 {
                    contracted += 1;
                }
            }
            let r = d as i64 * (2 - 2 * g_tgt) - (2 - 2 * g_src) - defect;
            divisor.add_point(PointLocation::Vertex(v), r);
            big_r.push(r);
            small_r.push(if d != 0 { Some(r - contracted) } else { None });
        }
        Ok(Ramification { divisor, big_r, small_r })
    }

    /// `K_{Γ'} = φ*(K_Γ) + R`.
    pub fn riemann_hurwitz_check(&self) -> Result<bool> {
        let ram = self.ramification()?;
        let lhs = self.source.canonical_divisor();
        let rhs = &self.pullback(&self.target.canonical_divisor())? + &ram.divisor;
        Ok(lhs == rhs)
    }

    pub fn is_effective(&self) -> Result<bool> {
        let ram = self.ramification()?;
        Ok(self
            .source
            .finite_vertices()
            .all(|v| ram.small_r[v].is_none_or(|r| r >= 0)))
    }

    /// Finite with `R = 0`.
    pub fn is_etale(&self) -> Result<bool> {
        Ok(self.is_finite() && self.ramification()?.divisor.is_zero())
    }

    /// Finite with `R` supported on infinite vertices.
    pub fn is_generically_etale(&self) -> Result<bool> {
        let ram = self.ramification()?;
        Ok(self.is_finite() && self.source.finite_vertices().all(|v| ram.big_r[v] == 0))
    }

    /// Every nonzero edge degree (and point degree) is prime to `char_p`.
    pub fn is_tame(&self, char_p: u64) -> bool {
        if char_p == 0 {
            return true;
        }
        let coprime = |d: u32| d == 0 || (d as u64).gcd(&char_p) == 1;
        self.edge_degree.iter().all(|&d| coprime(d))
            && self.point_degrees.as_ref().is_none_or(|pd| pd.iter().all(|&d| coprime(d)))
    }

    /// Image of a source point.
    pub fn map_point(&self, p: &PointLocation) -> Result<PointLocation> {
        self.source.check_point(p)?;
        match p {
            PointLocation::Vertex(v) => Ok(PointLocation::Vertex(self.vertex_map[*v])),
            PointLocation::Edge { edge, offset } => match self.edge_map[*edge] {
                EdgeImage::Contracted(v) => Ok(PointLocation::Vertex(v)),
                EdgeImage::Edge(t) => {
                    let y = *offset * Rational::from_integer(self.edge_degree[*edge] as i64);
                    let y = if self.forward(*edge) {
                        y
                    } else {
                        self.target.edge(t).length.finite().expect("reversed edges are finite") - y
                    };
                    self.target.point_on_edge(t, y)
                }
            },
        }
    }

    /// Preimages of a target point with their local degrees (zero degrees omitted).
    pub fn preimages(&self, x: &PointLocation) -> Result<Vec<(PointLocation, u32)>> {
        self.target.check_point(x)?;
        let mut out = Vec::new();
        match x {
            PointLocation::Vertex(p) => {
                let local = self.local_degrees()?;
                for (v, &img) in self.vertex_map.iter().enumerate() {
                    if img == *p && local[v] > 0 {
                        out.push((PointLocation::Vertex(v), local[v]));
                    }
                }
            }
            PointLocation::Edge { edge: t, offset } => {
                for (e, img) in self.edge_map.iter().enumerate() {
                    if *img != EdgeImage::Edge(*t) {
                        continue;
                    }
                    let d = self.edge_degree[e];
                    let y = if self.forward(e) {
                        *offset
                    } else {
                        self.target.edge(*t).length.finite().expect("reversed edges are finite") - *offset
                    };
                    let x_src = y / Rational::from_integer(d as i64);
                    out.push((self.source.point_on_edge(e, x_src)?, d));
                }
            }
        }
        Ok(out)
    }

    /// `φ*(D)` with `φ*(p) = Σ_{p'↦p} d_{p'}(p')`.
    pub fn pullback(&self, d: &Divisor) -> Result<Divisor> {
        let mut out = Divisor::new();
        for (p, c) in d.iter() {
            for (q, k) in self.preimages(p)? {
                out.add_point(q, c * k as i64);
            }
        }
        Ok(out)
    }

    /// `φ_*(D')` with `φ_*(p') = (φ(p'))`.
    pub fn pushforward(&self, d: &Divisor) -> Result<Divisor> {
        let mut out = Divisor::new();
        for (p, c) in d.iter() {
            out.add_point(self.map_point(p)?, c);
        }
        Ok(out)
    }

    /// `D_x(φ)`.
    pub fn fiber_divisor(&self, x: &PointLocation) -> Result<Divisor> {
        self.pullback(&Divisor::point(x.clone()))
    }

    /// One partition of `d_{p'}` per tangent direction at `φ(p')`.
    pub fn local_partitions(&self, v: usize) -> Result<Vec<Partition>> {
        let d = self.local_degree(v)?;
        if d == 0 {
            return Err(Error::Precondition(format!(
                "{} has local degree 0",
                self.source.vertex(v).name
            )));
        }
        let p = self.vertex_map[v];
        let mut out = Vec::new();
        for &t in self.target.incident(p) {
            let parts: Vec<u32> = self
                .source
                .incident(v)
                .iter()
                .filter(|&&e| self.edge_map[e] == EdgeImage::Edge(t))
                .map(|&e| self.edge_degree[e])
                .collect();
            out.push(Partition::new(parts)?);
        }
        Ok(out)
    }

    /// Every target vertex receives the same total local degree. Returns `(p, total)` pairs.
    pub fn degree_over_vertices(&self) -> Result<Vec<u32>> {
        let local = self.local_degrees()?;
        let mut totals = vec![0u32; self.target.vertex_count()];
        for (v, &d) in local.iter().enumerate() {
            totals[self.vertex_map[v]] += d;
        }
        Ok(totals)
    }

    /// Replaces the source genus function.
    pub fn with_source_genus(&self, genus: &[u32]) -> Result<Morphism> {
        let mut m = self.clone();
        m.source = self.source.with_genus(genus)?;
        Ok(m)
    }

    pub fn with_target_genus(&self, genus: &[u32]) -> Result<Morphism> {
        let mut m = self.clone();
        m.target = self.target.with_genus(genus)?;
        Ok(m)
    }
}

/// Output of [`weak_resolution`].
#[derive(Clone, Debug)]
pub struct WeakResolution {
    pub morphism: Morphism,
    /// Number of non-regular finite vertices, each adding one copy of the target.
    pub degree_increase: u32,
}

struct Builder {
    sv: Vec<crate::graph::Vertex>,
    se: Vec<crate::graph::Edge>,
    vmap: Vec<usize>,
    emap: Vec<EdgeImage>,
    deg: Vec<u32>,
    tv: Vec<crate::graph::Vertex>,
    te: Vec<crate::graph::Edge>,
    counter: usize,
}

impl Builder {
    fn fresh(&mut self, stem: &str) -> String {
        self.counter += 1;
        format!("{stem}~r{}", self.counter)
    }

    fn src_vertex(&mut self, stem: &str, infinite: bool, image: usize) -> usize {
        let name = self.fresh(stem);
        self.sv.push(crate::graph::Vertex { name, infinite, genus: 0 });
        self.vmap.push(image);
        self.sv.len() - 1
    }

    fn src_edge(&mut self, stem: &str, ends: [usize; 2], length: Length, image: EdgeImage, d: u32) -> usize {
        let name = self.fresh(stem);
        self.se.push(crate::graph::Edge { name, ends, length });
        self.emap.push(image);
        self.deg.push(d);
        self.se.len() - 1
    }

    fn tgt_vertex(&mut self, stem: &str, infinite: bool) -> usize {
        let name = self.fresh(stem);
        self.tv.push(crate::graph::Vertex { name, infinite, genus: 0 });
        self.tv.len() - 1
    }

    fn tgt_edge(&mut self, stem: &str, ends: [usize; 2], length: Length) -> usize {
        let name = self.fresh(stem);
        self.te.push(crate::graph::Edge { name, ends, length });
        self.te.len() - 1
    }

    /// Current local degree of a source vertex along target edge `t`.
    fn degree_towards(&self, v: usize, t: usize) -> u32 {
        self.se
            .iter()
            .enumerate()
            .filter(|(e, edge)| edge.ends.contains(&v) && self.emap[*e] == EdgeImage::Edge(t))
            .map(|(e, _)| self.deg[e])
            .sum()
    }

    /// Attaches `count` copies of the target path `t_path` (finite edge then infinite edge,
    /// or a single infinite edge) at source vertex `v`.
    fn attach_copies(&mut self, v: usize, count: u32, path: &[usize]) {
        for _ in 0..count {
            let mut at = v;
            for &t in path {
                let [a, b] = self.te[t].ends;
                let from = self.vmap[at];
                let to = if a == from { b } else { a };
                let infinite = self.tv[to].infinite;
                let w = self.src_vertex("copy", infinite, to);
                let length = match self.te[t].length {
                    Length::Finite(l) => Length::Finite(l),
                    Length::Infinite => Length::Infinite,
                };
                self.src_edge("copy", [at, w], length, EdgeImage::Edge(t), 1);
                at = w;
            }
        }
    }
}

/// Extends a harmonic morphism to a tree into a finite one on modifications
/// of source and target.
pub fn weak_resolution(phi: &Morphism) -> Result<WeakResolution> {
    if phi.target.first_betti() != 0 {
        return Err(Error::TargetNotTree);
    }
    let local = phi.local_degrees()?;
    phi.degree()?;
    if phi.is_finite() && !phi.target.vertices().iter().enumerate().any(|(v, vx)| !vx.infinite && phi.target.valence(v) <= 1) {
        return Ok(WeakResolution { morphism: phi.clone(), degree_increase: 0 });
    }
    let mut b = Builder {
        sv: phi.source.vertices().to_vec(),
        se: phi.source.edges().to_vec(),
        vmap: phi.vertex_map.clone(),
        emap: phi.edge_map.clone(),
        deg: phi.edge_degree.clone(),
        tv: phi.target.vertices().to_vec(),
        te: phi.target.edges().to_vec(),
        counter: 0,
    };
    let n_src = b.sv.len();

    // Finite leaves of the target (and a point target) get an infinite end.
    let leaves: Vec<usize> = (0..b.tv.len()).filter(|&t| !b.tv[t].infinite && phi.target.valence(t) <= 1).collect();
    for t in leaves {
        let w = b.tgt_vertex("end", true);
        let new_edge = b.tgt_edge("end", [t, w], Length::Infinite);
        for v in 0..n_src {
            if b.vmap[v] == t && local[v] > 0 && !b.sv[v].infinite {
                b.attach_copies(v, local[v], &[new_edge]);
            }
        }
    }

    // Phase (i): a copy of the target at every finite vertex with d = 0.
    let tree_v = b.tv.len();
    let tree_e = b.te.len();
    let non_regular: Vec<usize> = (0..n_src).filter(|&v| local[v] == 0 && !b.sv[v].infinite).collect();
    for &v in &non_regular {
        let base = b.vmap[v];
        let mut copy_of = vec![usize::MAX; tree_v];
        copy_of[base] = v;
        // breadth-first over the target tree from the base vertex
        let mut queue = std::collections::VecDeque::from([base]);
        while let Some(t) = queue.pop_front() {
            for te in 0..tree_e {
                let [x, y] = b.te[te].ends;
                if x != t && y != t {
                    continue;
                }
                let other = if x == t { y } else { x };
                if copy_of[other] != usize::MAX {
                    continue;
                }
                let infinite = b.tv[other].infinite;
                let w = b.src_vertex("tree", infinite, other);
                copy_of[other] = w;
                let length = b.te[te].length.clone();
                b.src_edge("tree", [copy_of[t], w], length, EdgeImage::Edge(te), 1);
                queue.push_back(other);
            }
        }
    }

    // Phase (ii): contracted edges.
    let mut e = 0;
    while e < b.se.len() {
        let EdgeImage::Contracted(t) = b.emap[e] else {
            e += 1;
            continue;
        };
        let [a, c] = b.se[e].ends;
        let current_degree = |b: &Builder, v: usize| -> u32 {
            if b.sv[v].infinite {
                return 0;
            }
            let t = b.vmap[v];
            let first = (0..b.te.len()).find(|&te| b.te[te].ends.contains(&t));
            first.map_or(0, |te| b.degree_towards(v, te))
        };
        let over_t: Vec<(usize, u32)> = (0..b.sv.len())
            .filter(|&v| b.vmap[v] == t && v != a && v != c)
            .map(|v| (v, current_degree(&b, v)))
            .collect();
        let (da, dc) = (current_degree(&b, a), current_degree(&b, c));
        match b.se[e].length.clone() {
            Length::Finite(l) => {
                let half = l / Rational::from_integer(2);
                let w = b.tgt_vertex("mid", false);
                let winf = b.tgt_vertex("mid", true);
                let e0 = b.tgt_edge("leaf", [t, w], Length::Finite(half));
                let einf = b.tgt_edge("leaf", [w, winf], Length::Infinite);
                let m = b.src_vertex("mid", false, w);
                b.se[e].ends = [a, m];
                b.se[e].length = Length::Finite(half);
                b.emap[e] = EdgeImage::Edge(e0);
                b.deg[e] = 1;
                b.src_edge("half", [m, c], Length::Finite(half), EdgeImage::Edge(e0), 1);
                for _ in 0..2 {
                    let u = b.src_vertex("mid", true, winf);
                    b.src_edge("mid", [m, u], Length::Infinite, EdgeImage::Edge(einf), 1);
                }
                b.attach_copies(a, da.saturating_sub(1), &[e0, einf]);
                b.attach_copies(c, dc.saturating_sub(1), &[e0, einf]);
                for (v, d) in over_t {
                    b.attach_copies(v, d, &[e0, einf]);
                }
            }
            Length::Infinite => {
                // a is the finite end, c the infinite vertex
                let winf = b.tgt_vertex("end", true);
                let einf = b.tgt_edge("end", [t, winf], Length::Infinite);
                b.vmap[c] = winf;
                b.emap[e] = EdgeImage::Edge(einf);
                b.deg[e] = 1;
                b.attach_copies(a, da.saturating_sub(1), &[einf]);
                for (v, d) in over_t {
                    if !b.sv[v].infinite {
                        b.attach_copies(v, d, &[einf]);
                    }
                }
            }
        }
        e += 1;
    }

    let source = MetricGraph::from_parts(b.sv, b.se)?;
    let target = MetricGraph::from_parts(b.tv, b.te)?;
    let morphism = Morphism::new(source, target, b.vmap, b.emap, b.deg, None)?;
    debug_assert!(morphism.is_finite());
    Ok(WeakResolution { morphism, degree_increase: non_regular.len() as u32 })
}
