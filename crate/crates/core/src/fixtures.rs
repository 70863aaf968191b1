//! Named built-in instances.

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, MetricGraph};
use crate::harmonic::{EdgeImage, Morphism};
use crate::rational::{frac, int, Rational};

/// Cycle of `n ≥ 2` unit edges.
pub fn circle(n: usize) -> MetricGraph {
    assert!(n >= 2, "a circle model needs at least two vertices");
    let mut b = GraphBuilder::new();
    let vs: Vec<_> = (0..n).map(|i| b.vertex(format!("c{i}"), 0)).collect();
    for i in 0..n {
        b.finite_edge(format!("s{i}"), vs[i], vs[(i + 1) % n], int(1));
    }
    b.build().expect("circle is valid")
}

/// Two vertices `x`, `y` joined by parallel edges `e1, e2, …`.
pub fn banana(lengths: &[Rational]) -> MetricGraph {
    let mut b = GraphBuilder::new();
    let x = b.vertex("x", 0);
    let y = b.vertex("y", 0);
    for (i, l) in lengths.iter().enumerate() {
        b.finite_edge(format!("e{}", i + 1), x, y, *l);
    }
    b.build().expect("banana is valid")
}

/// Path with `n` unit edges.
pub fn path(n: usize) -> MetricGraph {
    let mut b = GraphBuilder::new();
    let vs: Vec<_> = (0..=n).map(|i| b.vertex(format!("p{i}"), 0)).collect();
    for i in 0..n {
        b.finite_edge(format!("s{i}"), vs[i], vs[i + 1], int(1));
    }
    b.build().expect("path is valid")
}

/// Degree-4 map from a six-ended star onto a tripod; expansion factors
/// 2,2 / 2,2 / 3,1 over the three legs.
pub fn star_map() -> Morphism {
    let mut t = GraphBuilder::new();
    let o = t.vertex("o", 0);
    let legs: Vec<usize> = (0..3).map(|i| t.leaf(format!("t{i}"), o)).collect();
    let target = t.build().expect("tripod");

    let mut s = GraphBuilder::new();
    let p = s.vertex("p", 0);
    let spec = [("a1", 0, 2), ("a2", 0, 2), ("b1", 1, 2), ("b2", 1, 2), ("c1", 2, 3), ("c2", 2, 1)];
    let mut vmap = vec![o];
    for &(name, leg, _) in &spec {
        s.leaf(name, p);
        vmap.push(legs[leg]);
    }
    let source = s.build().expect("star");
    let emap = spec.iter().map(|&(_, leg, _)| EdgeImage::Edge(leg)).collect();
    let degrees = spec.iter().map(|&(_, _, d)| d).collect();
    Morphism::new(source, target, vmap, emap, degrees, None).expect("star map")
}

/// Degree-2 map from a circle of circumference 1 onto a circle of circumference 2,
/// both with two antipodal vertices.
pub fn tate_2_isogeny() -> Morphism {
    let mut t = GraphBuilder::new();
    let v0 = t.vertex("v0", 0);
    let v1 = t.vertex("v1", 0);
    t.finite_edge("f0", v0, v1, int(1));
    t.finite_edge("f1", v1, v0, int(1));
    let target = t.build().expect("target circle");
    let mut s = GraphBuilder::new();
    let u0 = s.vertex("u0", 0);
    let u1 = s.vertex("u1", 0);
    s.finite_edge("e0", u0, u1, frac(1, 2));
    s.finite_edge("e1", u1, u0, frac(1, 2));
    let source = s.build().expect("source circle");
    Morphism::new(source, target, vec![0, 1], vec![EdgeImage::Edge(0), EdgeImage::Edge(1)], vec![2, 2], None)
        .expect("tate")
}

/// B(1,1,1,1) → B(1,2,2): e1, e2 onto f1 with degree 1, e3 onto f2 and e4 onto f3 with degree 2.
pub fn ribet() -> Morphism {
    let source = banana(&[int(1); 4]);
    let mut t = GraphBuilder::new();
    let x = t.vertex("x", 0);
    let y = t.vertex("y", 0);
    t.finite_edge("f1", x, y, int(1));
    t.finite_edge("f2", x, y, int(2));
    t.finite_edge("f3", x, y, int(2));
    let target = t.build().expect("B(1,2,2)");
    Morphism::new(
        source,
        target,
        vec![0, 1],
        vec![EdgeImage::Edge(0), EdgeImage::Edge(0), EdgeImage::Edge(1), EdgeImage::Edge(2)],
        vec![1, 1, 2, 2],
        None,
    )
    .expect("ribet")
}

/// Central vertex `p` of genus `g_p` with `kappa` unit bridges, each ending in a
/// cycle of length 2. The graph is minimal when `kappa ≥ 2`, or `kappa ≥ 1` and `g_p ≥ 1`,
/// or `kappa = 0` and `g_p ≥ 1`.
pub fn hyper_family(kappa: usize, g_p: u32) -> MetricGraph {
    let mut b = GraphBuilder::new();
    let p = b.vertex("p", g_p);
    for i in 0..kappa {
        let q = b.vertex(format!("q{i}"), 0);
        b.finite_edge(format!("bridge{i}"), p, q, int(1));
        b.cycle(format!("loop{i}"), q, int(2));
    }
    b.build().expect("hyperelliptic family")
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &["CIRCLE", "BANANA", "STARMAP", "TATE2ISOGENY", "RIBET", "HYPER_FAMILY"];

/// A catalogue entry: either a bare graph or a morphism.
#[derive(Clone, Debug)]
pub enum Fixture {
    Graph(MetricGraph),
    Morphism(Morphism),
}

/// Looks up a fixture by name with optional numeric arguments,
/// e.g. `CIRCLE(4)`, `BANANA(1,2,2)`, `HYPER_FAMILY(3,0)`.
pub fn by_name(spec: &str) -> Result<Fixture> {
    let spec = spec.trim();
    let (name, args) = match spec.split_once('(') {
        Some((n, rest)) => (n.trim(), rest.trim_end_matches(')')),
        None => (spec, ""),
    };
    let args: Vec<&str> = args.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
    let bad = || Error::UnknownId(spec.to_string());
    let uint = |i: usize, default: usize| -> Result<usize> {
        args.get(i).map_or(Ok(default), |a| a.parse().map_err(|_| bad()))
    };
    match name.to_ascii_uppercase().as_str() {
        "CIRCLE" => {
            let n = uint(0, 4)?;
            if n < 2 {
                return Err(bad());
            }
            Ok(Fixture::Graph(circle(n)))
        }
        "BANANA" => {
            let lengths = if args.is_empty() {
                vec![int(1); 4]
            } else {
                args.iter().map(|a| crate::rational::parse_rational(a)).collect::<Result<Vec<_>>>()?
            };
            if lengths.len() < 2 || lengths.iter().any(|l| *l <= int(0)) {
                return Err(bad());
            }
            Ok(Fixture::Graph(banana(&lengths)))
        }
        "STARMAP" => Ok(Fixture::Morphism(star_map())),
        "TATE2ISOGENY" => Ok(Fixture::Morphism(tate_2_isogeny())),
        "RIBET" => Ok(Fixture::Morphism(ribet())),
        "HYPER_FAMILY" => {
            let kappa = uint(0, 3)?;
            let g = uint(1, 0)? as u32;
            if kappa == 0 && g == 0 {
                return Err(bad());
            }
            Ok(Fixture::Graph(hyper_family(kappa, g)))
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_validates() {
        for name in NAMES {
            match by_name(name).unwrap() {
                Fixture::Graph(g) => assert!(g.validate().is_empty(), "{name}"),
                Fixture::Morphism(m) => {
                    assert!(m.validate().is_empty(), "{name}");
                    assert!(m.is_harmonic(), "{name}");
                }
            }
        }
    }

    #[test]
    fn parameterised_names() {
        match by_name("BANANA(1,2,2)").unwrap() {
            Fixture::Graph(g) => assert_eq!(g.edge_count(), 3),
            _ => panic!(),
        }
        match by_name("HYPER_FAMILY(3,1)").unwrap() {
            Fixture::Graph(g) => assert_eq!(g.genus(), 4),
            _ => panic!(),
        }
        assert!(by_name("CIRCLE(1)").is_err());
        assert!(by_name("NOPE").is_err());
    }

    #[test]
    fn ribet_degree() {
        assert_eq!(ribet().degree().unwrap(), 2);
    }
}
