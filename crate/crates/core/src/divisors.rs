//! Divisor theory on metric graphs: principal divisors, linear equivalence,
//! rank and weighted rank. Everything reduces to chip-firing on a unit model
//! in which the relevant points are vertices.

use crate::chip::{ChipGraph, RankSolver};
use crate::error::{Error, Result};
use crate::graph::{Divisor, GraphBuilder, Length, MetricGraph, PointLocation, Refinement};
use crate::harmonic::Morphism;
use crate::rational::Rational;

/// Piecewise-affine function given by its values at the vertices of a model
/// on which it is affine along every edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    pub values: Vec<Rational>,
}

/// `div(F)`: the coefficient at a vertex is the sum of the outgoing slopes.
pub fn principal_divisor(graph: &MetricGraph, f: &RationalFunction) -> Result<Divisor> {
    if f.values.len() != graph.vertex_count() {
        return Err(Error::Precondition("one value per vertex is required".into()));
    }
    let mut out = Divisor::new();
    for e in graph.edges() {
        let Length::Finite(l) = e.length else {
            return Err(Error::InfiniteSupport(format!("infinite edge {}", e.name)));
        };
        let [a, b] = e.ends;
        let slope = (f.values[b] - f.values[a]) / l;
        if !slope.is_integer() {
            return Err(Error::Precondition(format!("non-integer slope {} on {}", slope, e.name)));
        }
        let s = slope.to_integer();
        out.add_point(PointLocation::Vertex(a), s);
        out.add_point(PointLocation::Vertex(b), -s);
    }
    Ok(out)
}

/// A unit-length model carrying a family of divisors on its vertices.
#[derive(Clone, Debug)]
pub struct UnitModel {
    /// Unit-length model of the finite part.
    pub graph: MetricGraph,
    /// Length scale applied to reach unit lengths.
    pub scale: Rational,
    pub chips: ChipGraph,
    pub divisors: Vec<Vec<i64>>,
    pub refinement: Refinement,
    finite_vertex: Vec<Option<usize>>,
    finite_edge: Vec<Option<usize>>,
}

impl UnitModel {
    /// Translates a point of the original graph to a vertex of the unit model, if it is one.
    pub fn vertex_of(&self, p: &PointLocation) -> Option<usize> {
        let local = match p {
            PointLocation::Vertex(v) => PointLocation::Vertex(self.finite_vertex[*v]?),
            PointLocation::Edge { edge, offset } => {
                PointLocation::Edge { edge: self.finite_edge[*edge]?, offset: *offset }
            }
        };
        match self.refinement.map_point(&local) {
            PointLocation::Vertex(v) => Some(v),
            PointLocation::Edge { .. } => None,
        }
    }
}

/// Builds a unit model of the finite part of `graph` on which every support
/// point of `divisors` (and of `extra`) is a vertex.
pub fn unit_model(graph: &MetricGraph, divisors: &[&Divisor], extra: &[PointLocation]) -> Result<UnitModel> {
    let (finite, vmap, emap) = graph.finite_part();
    let mut points = Vec::new();
    let localize = |p: &PointLocation| -> Result<PointLocation> {
        graph.check_point(p)?;
        match p {
            PointLocation::Vertex(v) => vmap[*v]
                .map(PointLocation::Vertex)
                .ok_or_else(|| Error::InfiniteSupport(graph.vertex(*v).name.clone())),
            PointLocation::Edge { edge, offset } => emap[*edge]
                .map(|e| PointLocation::Edge { edge: e, offset: *offset })
                .ok_or_else(|| Error::InfiniteSupport(graph.describe_point(p))),
        }
    };
    let mut local_divisors = Vec::new();
    for d in divisors {
        let mut ld = Divisor::new();
        for (p, c) in d.iter() {
            let q = localize(p)?;
            points.push(q.clone());
            ld.add_point(q, c);
        }
        local_divisors.push(ld);
    }
    for p in extra {
        points.push(localize(p)?);
    }
    let (unit, scale, refinement) = finite.uniformize_with(&points);
    let chips = ChipGraph::from_unit_model(&unit)?;
    let n = unit.vertex_count();
    let divisors = local_divisors
        .iter()
        .map(|d| refinement.map_divisor(d).vertex_vector(n).expect("support promoted to vertices"))
        .collect();
    Ok(UnitModel { graph: unit, scale, chips, divisors, refinement, finite_vertex: vmap, finite_edge: emap })
}

/// Rank options.
#[derive(Clone, Copy, Debug)]
pub struct RankOptions {
    /// Use `r = deg − g` when `deg > 2g + 2`.
    pub riemann_roch_shortcut: bool,
    /// Extra halving of every unit edge before the finite computation.
    pub extra_subdivision: bool,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions { riemann_roch_shortcut: true, extra_subdivision: false }
    }
}

fn halved(model: &UnitModel) -> Result<(ChipGraph, Vec<i64>)> {
    let cuts: Vec<Vec<Rational>> = model
        .graph
        .edges()
        .iter()
        .map(|_| vec![Rational::new(1, 2)])
        .collect();
    let (fine, _) = model.graph.refine(&cuts, Rational::from_integer(2));
    let chips = ChipGraph::from_unit_model(&fine)?;
    let mut d = model.divisors[0].clone();
    d.resize(fine.vertex_count(), 0);
    Ok((chips, d))
}

/// `r_Γ(D)`.
pub fn rank_metric(graph: &MetricGraph, d: &Divisor) -> Result<i64> {
    rank_metric_with(graph, d, RankOptions::default())
}

pub fn rank_metric_with(graph: &MetricGraph, d: &Divisor, options: RankOptions) -> Result<i64> {
    if d.degree() < 0 {
        // still validate the support
        unit_model(graph, &[d], &[])?;
        return Ok(-1);
    }
    let model = unit_model(graph, &[d], &[])?;
    if options.extra_subdivision {
        let (chips, dv) = halved(&model)?;
        return Ok(RankSolver::new(&chips, options.riemann_roch_shortcut).rank(&dv));
    }
    Ok(RankSolver::new(&model.chips, options.riemann_roch_shortcut).rank(&model.divisors[0]))
}

/// `r_Γ(D) ≥ k`, usually much cheaper than the full rank.
pub fn rank_at_least(graph: &MetricGraph, d: &Divisor, k: i64) -> Result<bool> {
    let model = unit_model(graph, &[d], &[])?;
    Ok(model.chips.rank_at_least(&model.divisors[0], k))
}

/// Whether `|D| ≠ ∅`.
pub fn is_effective_class(graph: &MetricGraph, d: &Divisor) -> Result<bool> {
    rank_at_least(graph, d, 0)
}

/// `Γ^#`: the genus function is replaced by `g(p)` attached cycles of the given length at each `p`.
/// Original vertex and edge indices are preserved.
pub fn virtual_cycle_graph(graph: &MetricGraph, cycle_length: Rational) -> Result<MetricGraph> {
    let mut b = GraphBuilder::new();
    for v in graph.vertices() {
        if v.infinite {
            b.infinite_vertex(v.name.clone());
        } else {
            b.vertex(v.name.clone(), 0);
        }
    }
    for e in graph.edges() {
        b.edge(e.name.clone(), e.ends[0], e.ends[1], e.length.clone());
    }
    for (i, v) in graph.vertices().iter().enumerate() {
        for k in 0..v.genus {
            b.cycle(format!("{}~virtual{}", v.name, k), i, cycle_length);
        }
    }
    b.build()
}

/// `r^#(D)`, the rank on `Γ^#`.
pub fn weighted_rank(graph: &MetricGraph, d: &Divisor) -> Result<i64> {
    weighted_rank_with_length(graph, d, Rational::from_integer(1))
}

pub fn weighted_rank_with_length(graph: &MetricGraph, d: &Divisor, cycle_length: Rational) -> Result<i64> {
    rank_metric(&virtual_cycle_graph(graph, cycle_length)?, d)
}

/// Whether `D₁ ∼ D₂`.
pub fn linearly_equivalent(graph: &MetricGraph, d1: &Divisor, d2: &Divisor) -> Result<bool> {
    Ok(equivalence_witness(graph, d1, d2)?.is_some())
}

/// A refined model and a rational function `F` on it with `D₂ = D₁ + div(F)`.
#[derive(Clone, Debug)]
pub struct EquivalenceWitness {
    /// Refinement of the finite part of the input graph (original scale).
    pub graph: MetricGraph,
    pub function: RationalFunction,
    pub refinement: Refinement,
}

pub fn equivalence_witness(graph: &MetricGraph, d1: &Divisor, d2: &Divisor) -> Result<Option<EquivalenceWitness>> {
    let model = unit_model(graph, &[d1, d2], &[])?;
    if d1.degree() != d2.degree() {
        return Ok(None);
    }
    let diff: Vec<i64> = model.divisors[0].iter().zip(&model.divisors[1]).map(|(a, b)| a - b).collect();
    let red = model.chips.reduce(&diff, 0);
    if red.reduced.iter().any(|&c| c != 0) {
        return Ok(None);
    }
    let inv = Rational::from_integer(1) / model.scale;
    Ok(Some(EquivalenceWitness {
        graph: model.graph.scaled(inv),
        function: RationalFunction {
            values: red.script.iter().map(|&s| Rational::from_integer(s) * inv).collect(),
        },
        refinement: model.refinement,
    }))
}

/// Sample points of a target: all vertices and one interior point per edge.
pub fn sample_points(graph: &MetricGraph) -> Vec<PointLocation> {
    let mut out: Vec<PointLocation> = (0..graph.vertex_count()).map(PointLocation::Vertex).collect();
    for (i, e) in graph.edges().iter().enumerate() {
        let offset = match e.length {
            Length::Finite(l) => l / Rational::from_integer(2),
            Length::Infinite => Rational::from_integer(1),
        };
        out.push(PointLocation::Edge { edge: i, offset });
    }
    out
}

#[derive(Clone, Debug)]
pub struct FiberReport {
    pub samples: usize,
    pub all_equivalent: bool,
    pub all_rank_at_least_one: bool,
}

/// Fibers of a finite harmonic morphism onto a tree: pairwise equivalence and rank ≥ 1.
pub fn fiber_report(phi: &Morphism) -> Result<FiberReport> {
    if phi.target().first_betti() != 0 {
        return Err(Error::TargetNotTree);
    }
    if !phi.is_finite() || !phi.is_harmonic() {
        return Err(Error::Precondition("a finite harmonic morphism is required".into()));
    }
    if phi.source().has_infinite_vertices() {
        return Err(Error::Precondition("source must be compact".into()));
    }
    let samples = sample_points(phi.target());
    let fibers: Vec<Divisor> = samples.iter().map(|x| phi.fiber_divisor(x)).collect::<Result<_>>()?;
    let refs: Vec<&Divisor> = fibers.iter().collect();
    let model = unit_model(phi.source(), &refs, &[])?;
    let first = &model.divisors[0];
    let all_equivalent = model.divisors.iter().all(|d| model.chips.equivalent(first, d));
    let mut solver = RankSolver::new(&model.chips, true);
    let all_rank_at_least_one = model.divisors.iter().all(|d| solver.at_least(d, 1));
    Ok(FiberReport { samples: samples.len(), all_equivalent, all_rank_at_least_one })
}

pub fn fibers_have_rank_one(phi: &Morphism) -> Result<bool> {
    let r = fiber_report(phi)?;
    Ok(r.all_equivalent && r.all_rank_at_least_one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::harmonic::EdgeImage;
    use crate::rational::{frac, int};

    fn v(i: usize) -> PointLocation {
        PointLocation::Vertex(i)
    }

    #[test]
    fn principal_divisor_examples() {
        let seg = fixtures::path(1);
        let zero = principal_divisor(&seg, &RationalFunction { values: vec![int(3), int(3)] }).unwrap();
        assert!(zero.is_zero());
        let slope = principal_divisor(&seg, &RationalFunction { values: vec![int(0), int(1)] }).unwrap();
        // outgoing slope +1 at p0, −1 at p1
        let mut expected = Divisor::vertex(0);
        expected.add_point(v(1), -1);
        assert_eq!(slope, expected);
        // tent on a 4-cycle: top at c2, bottom at c0
        let c = fixtures::circle(4);
        let tent = RationalFunction { values: vec![int(0), int(1), int(2), int(1)] };
        let d = principal_divisor(&c, &tent).unwrap();
        assert_eq!(d.degree(), 0);
        assert_eq!(d.coefficient(&v(0)), 2);
        assert_eq!(d.coefficient(&v(2)), -2);
        let bad = RationalFunction { values: vec![int(0), frac(1, 2), int(0), int(0)] };
        assert!(principal_divisor(&c, &bad).is_err());
    }

    #[test]
    fn rank_examples() {
        let c = fixtures::circle(2);
        let p = PointLocation::Edge { edge: 0, offset: frac(1, 3) };
        let mut neg = Divisor::point(p.clone());
        neg.add_point(v(0), -2);
        assert_eq!(rank_metric(&c, &neg).unwrap(), -1);
        assert_eq!(rank_metric(&c, &Divisor::point(p.clone())).unwrap(), 0);
        let mut two = Divisor::point(p);
        two.add_point(v(1), 1);
        assert_eq!(rank_metric(&c, &two).unwrap(), 1);
        let b = fixtures::banana(&[int(1); 4]);
        assert_eq!(rank_metric(&b, &b.canonical_divisor()).unwrap(), 2);
    }

    #[test]
    fn weighted_rank_examples() {
        let mut g = GraphBuilder::new();
        g.vertex("p", 1);
        let single = g.build().unwrap();
        assert_eq!(weighted_rank(&single, &Divisor::vertex(0).scaled(2)).unwrap(), 1);
        assert_eq!(rank_metric(&single, &Divisor::vertex(0).scaled(2)).unwrap(), 2);
        let c = fixtures::circle(3);
        let d = Divisor::vertex(1);
        assert_eq!(weighted_rank(&c, &d).unwrap(), rank_metric(&c, &d).unwrap());
        for (kappa, gp) in [(3, 1), (4, 1), (3, 2)] {
            let h = fixtures::hyper_family(kappa, gp);
            let two_p = Divisor::vertex(0).scaled(2);
            for len in [int(1), int(3), frac(1, 2)] {
                assert_eq!(weighted_rank_with_length(&h, &two_p, len).unwrap(), 1, "{kappa} {gp} {len}");
            }
        }
    }

    #[test]
    fn equivalence_examples() {
        let c = fixtures::circle(4);
        let d = Divisor::vertex(2);
        assert!(linearly_equivalent(&c, &d, &d).unwrap());
        assert!(!linearly_equivalent(&c, &Divisor::vertex(0), &d).unwrap());
        // on a tree any two points are equivalent, with an explicit witness
        let t = fixtures::path(2);
        let a = Divisor::point(PointLocation::Edge { edge: 0, offset: frac(1, 3) });
        let b = Divisor::vertex(2);
        let w = equivalence_witness(&t, &a, &b).unwrap().unwrap();
        let div = principal_divisor(&w.graph, &w.function).unwrap();
        assert_eq!(&w.refinement.map_divisor(&a) + &div, w.refinement.map_divisor(&b));
    }

    #[test]
    fn infinite_support_is_rejected() {
        let mut b = GraphBuilder::new();
        let x = b.vertex("x", 0);
        let w = b.leaf("l", x);
        let y = b.vertex("y", 0);
        b.finite_edge("e", x, y, int(1));
        let g = b.build().unwrap();
        assert!(matches!(rank_metric(&g, &Divisor::vertex(w)), Err(Error::InfiniteSupport(_))));
        assert_eq!(rank_metric(&g, &Divisor::vertex(y)).unwrap(), 1);
    }

    #[test]
    fn folding_circle_fibers() {
        // circle with vertices a, b, c, d (unit edges) folded onto the path a–b–c
        let src = fixtures::circle(4);
        let tgt = fixtures::path(2);
        let phi = Morphism::new(
            src,
            tgt,
            vec![0, 1, 2, 1],
            vec![EdgeImage::Edge(0), EdgeImage::Edge(1), EdgeImage::Edge(1), EdgeImage::Edge(0)],
            vec![1, 1, 1, 1],
            None,
        )
        .unwrap();
        assert_eq!(phi.degree().unwrap(), 2);
        assert!(fibers_have_rank_one(&phi).unwrap());
        let id = Morphism::identity(&fixtures::path(3));
        assert!(fibers_have_rank_one(&id).unwrap());
        assert!(matches!(fiber_report(&fixtures::tate_2_isogeny()), Err(Error::TargetNotTree)));
    }

    #[test]
    fn subdivision_oracle_agrees() {
        let b = fixtures::banana(&[int(1), int(2), int(2)]);
        let opts = RankOptions { riemann_roch_shortcut: false, extra_subdivision: true };
        for d in [b.canonical_divisor(), Divisor::vertex(0).scaled(2), Divisor::vertex(1)] {
            assert_eq!(rank_metric(&b, &d).unwrap(), rank_metric_with(&b, &d, opts).unwrap());
        }
    }
}
