//! Regularized Jacobians of ℤ-metric graphs as critical groups of the unit
//! model, functorial maps along harmonic morphisms, and the monodromy pairing.

use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::abelian::{smith_diagonal, FiniteAbelianGroup};
use crate::chip::ChipGraph;
use crate::error::{Error, Result};
use crate::graph::{Divisor, Length, MetricGraph, PointLocation, Refinement};
use crate::harmonic::{EdgeImage, Morphism};
use crate::rational::Rational;

/// Refuse to enumerate groups larger than this.
pub const ENUMERATION_LIMIT: u128 = 1 << 20;

/// A degree-0 divisor class on the unit model, stored q-reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JacClass(pub Vec<i64>);

#[derive(Debug)]
pub struct CriticalGroup {
    pub graph: MetricGraph,
    pub unit: MetricGraph,
    pub refinement: Refinement,
    pub chips: ChipGraph,
    pub base: usize,
    pub group: FiniteAbelianGroup,
    pub spanning_trees: BigInt,
    inverse: OnceLock<Vec<Vec<BigRational>>>,
}

fn check_integral(graph: &MetricGraph) -> Result<()> {
    if graph.has_infinite_vertices() {
        return Err(Error::InfiniteSupport("Jacobians need a compact graph".into()));
    }
    for e in graph.edges() {
        match e.length {
            Length::Finite(l) if l.is_integer() => {}
            _ => return Err(Error::NonIntegerLength(e.name.clone())),
        }
    }
    Ok(())
}

fn reduced_laplacian(chips: &ChipGraph, base: usize) -> Vec<Vec<i64>> {
    let l = chips.laplacian();
    l.iter()
        .enumerate()
        .filter(|&(i, _)| i != base)
        .map(|(_, row)| row.iter().enumerate().filter(|&(j, _)| j != base).map(|(_, &x)| x).collect())
        .collect()
}

/// Fraction-free (Bareiss) determinant.
pub fn bareiss_determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Number of spanning trees by the matrix-tree theorem.
pub fn kirchhoff(chips: &ChipGraph) -> BigInt {
    bareiss_determinant(&reduced_laplacian(chips, 0))
}

/// Critical group of the unit model of a compact ℤ-metric graph.
pub fn regularized_jacobian(graph: &MetricGraph) -> Result<CriticalGroup> {
    check_integral(graph)?;
    let (unit, scale, refinement) = graph.uniformize();
    debug_assert!(scale.is_one());
    let chips = ChipGraph::from_unit_model(&unit)?;
    if !chips.is_connected() {
        return Err(Error::Precondition("graph is not connected".into()));
    }
    let base = 0;
    let diag = smith_diagonal(&reduced_laplacian(&chips, base));
    let cyclic: Vec<u64> = diag
        .iter()
        .map(|x| x.to_u64().ok_or_else(|| Error::Precondition("critical group too large".into())))
        .collect::<Result<_>>()?;
    let group = FiniteAbelianGroup::new(&cyclic)?;
    let spanning_trees = kirchhoff(&chips);
    assert_eq!(BigInt::from(group.order()), spanning_trees, "Smith form and matrix-tree count disagree");
    Ok(CriticalGroup {
        graph: graph.clone(),
        unit,
        refinement,
        chips,
        base,
        group,
        spanning_trees,
        inverse: OnceLock::new(),
    })
}

impl CriticalGroup {
    pub fn order(&self) -> u128 {
        self.group.order()
    }

    pub fn zero(&self) -> JacClass {
        JacClass(vec![0; self.unit.vertex_count()])
    }

    /// Class of a degree-0 vector on the unit model.
    pub fn class_of_vector(&self, v: &[i64]) -> Result<JacClass> {
        if v.len() != self.unit.vertex_count() {
            return Err(Error::Precondition("wrong vector length".into()));
        }
        if v.iter().sum::<i64>() != 0 {
            return Err(Error::Precondition("Jacobian classes have degree 0".into()));
        }
        Ok(JacClass(self.chips.reduce(v, self.base).reduced))
    }

    /// Class of a degree-0 divisor supported on integer points of the graph.
    pub fn class_of(&self, d: &Divisor) -> Result<JacClass> {
        let mapped = self.refinement.map_divisor(d);
        let v = mapped
            .vertex_vector(self.unit.vertex_count())
            .ok_or_else(|| Error::NotRationalPoint("support must be at integer points".into()))?;
        self.class_of_vector(&v)
    }

    /// A representative on the original graph.
    pub fn divisor_of(&self, c: &JacClass) -> Divisor {
        self.refinement.unmap_divisor(&Divisor::from_vertex_coefficients(&c.0))
    }

    pub fn add(&self, a: &JacClass, b: &JacClass) -> JacClass {
        let v: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
        JacClass(self.chips.reduce(&v, self.base).reduced)
    }

    pub fn neg(&self, a: &JacClass) -> JacClass {
        let v: Vec<i64> = a.0.iter().map(|x| -x).collect();
        JacClass(self.chips.reduce(&v, self.base).reduced)
    }

    pub fn times(&self, k: i64, a: &JacClass) -> JacClass {
        let v: Vec<i64> = a.0.iter().map(|x| k * x).collect();
        JacClass(self.chips.reduce(&v, self.base).reduced)
    }

    /// `(v) − (q)` for every unit vertex `v ≠ q`.
    pub fn generators(&self) -> Vec<JacClass> {
        (0..self.unit.vertex_count())
            .filter(|&v| v != self.base)
            .map(|v| {
                let mut x = vec![0; self.unit.vertex_count()];
                x[v] += 1;
                x[self.base] -= 1;
                JacClass(self.chips.reduce(&x, self.base).reduced)
            })
            .collect()
    }

    /// Subgroup generated by `gens`, by breadth-first closure.
    pub fn span(&self, gens: &[JacClass]) -> Result<Vec<JacClass>> {
        let mut seen: HashSet<JacClass> = HashSet::new();
        let mut queue = VecDeque::new();
        let zero = self.zero();
        seen.insert(zero.clone());
        queue.push_back(zero);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = self.add(&x, g);
                if seen.insert(y.clone()) {
                    if seen.len() as u128 > ENUMERATION_LIMIT {
                        return Err(Error::Precondition("group too large to enumerate".into()));
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut out: Vec<JacClass> = seen.into_iter().collect();
        out.sort();
        Ok(out)
    }

    pub fn elements(&self) -> Result<Vec<JacClass>> {
        let all = self.span(&self.generators())?;
        assert_eq!(all.len() as u128, self.order());
        Ok(all)
    }

    fn reduced_inverse(&self) -> &Vec<Vec<BigRational>> {
        self.inverse.get_or_init(|| {
            let m = reduced_laplacian(&self.chips, self.base);
            invert(&m)
        })
    }

    /// `⟨D₁, D₂⟩ = D₁ᵀ L⁺ D₂ mod 1`, in `[0, 1)`.
    pub fn pairing(&self, a: &JacClass, b: &JacClass) -> Rational {
        let inv = self.reduced_inverse();
        let idx: Vec<usize> = (0..self.unit.vertex_count()).filter(|&v| v != self.base).collect();
        let mut total = BigRational::zero();
        for (r, &i) in idx.iter().enumerate() {
            if a.0[i] == 0 {
                continue;
            }
            for (c, &j) in idx.iter().enumerate() {
                if b.0[j] != 0 {
                    total += &inv[r][c] * BigRational::from_integer(BigInt::from(a.0[i] * b.0[j]));
                }
            }
        }
        let frac = &total - total.floor();
        Rational::new(frac.numer().to_i64().expect("small"), frac.denom().to_i64().expect("small"))
    }
}

fn invert(m: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !a[i][k].is_zero()).expect("reduced Laplacian is invertible");
        a.swap(k, p);
        let pivot = a[k][k].clone();
        for x in a[k].iter_mut() {
            *x = &*x / &pivot;
        }
        for i in 0..n {
            if i != k && !a[i][k].is_zero() {
                let f = a[i][k].clone();
                for j in 0..2 * n {
                    let v = &f * &a[k][j];
                    a[i][j] -= v;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// The maps `φ_*` and `φ^*` between the critical groups of source and target.
#[derive(Debug)]
pub struct JacobianMap {
    pub phi: Morphism,
    pub source: CriticalGroup,
    pub target: CriticalGroup,
    degree: u32,
}

pub fn jacobian_map(phi: &Morphism) -> Result<JacobianMap> {
    if !phi.is_finite() {
        return Err(Error::Precondition("morphism must be finite".into()));
    }
    let degree = phi.degree()?;
    let source = regularized_jacobian(phi.source())?;
    let target = regularized_jacobian(phi.target())?;
    Ok(JacobianMap { phi: phi.clone(), source, target, degree })
}

impl JacobianMap {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Target edge and offset of the point at `offset` along source edge `e`.
    fn image_on_edge(&self, e: usize, offset: Rational) -> (usize, Rational) {
        let EdgeImage::Edge(f) = self.phi.edge_map()[e] else { unreachable!("finite morphism") };
        let d = Rational::from_integer(self.phi.edge_degree(e) as i64);
        let edge = self.phi.source().edge(e);
        let fe = self.phi.target().edge(f);
        if self.phi.image_vertex(edge.ends[0]) == fe.ends[0] {
            (f, offset * d)
        } else {
            (f, fe.length.finite().expect("finite") - offset * d)
        }
    }

    fn push_vertex(&self, v: usize) -> usize {
        let here = self.source.refinement.unmap_point(&PointLocation::Vertex(v));
        let there = match here {
            PointLocation::Vertex(u) => PointLocation::Vertex(self.phi.image_vertex(u)),
            PointLocation::Edge { edge, offset } => {
                let (f, off) = self.image_on_edge(edge, offset);
                self.phi.target().point_on_edge(f, off).expect("on edge")
            }
        };
        match self.target.refinement.map_point(&there) {
            PointLocation::Vertex(w) => w,
            PointLocation::Edge { .. } => unreachable!("integer points map to integer points"),
        }
    }

    /// `φ^*(w)` for a unit vertex of the target, as a vector on the source unit model.
    /// A preimage `x` of multiplicity `d` sitting `s/d` of the way from unit vertex
    /// `a` to `b` is replaced by the equivalent `(d − s)(a) + s(b)`.
    fn pull_vertex(&self, w: usize) -> Vec<i64> {
        let n = self.source.unit.vertex_count();
        let mut out = vec![0i64; n];
        let src = self.phi.source();
        let here = self.target.refinement.unmap_point(&PointLocation::Vertex(w));
        match here {
            PointLocation::Vertex(t) => {
                for v in 0..src.vertex_count() {
                    if self.phi.image_vertex(v) == t {
                        out[v] += self.phi.local_degree(v).expect("harmonic") as i64;
                    }
                }
            }
            PointLocation::Edge { edge: f, offset } => {
                let fl = self.phi.target().edge(f).length.finite().expect("finite");
                for e in 0..src.edge_count() {
                    if self.phi.edge_map()[e] != EdgeImage::Edge(f) {
                        continue;
                    }
                    let d = self.phi.edge_degree(e) as i64;
                    let forward = self.phi.image_vertex(src.edge(e).ends[0]) == self.phi.target().edge(f).ends[0];
                    // position along e, in units of 1/d
                    let j = if forward { offset } else { fl - offset }.to_integer();
                    let (k, s) = (j.div_euclid(d), j.rem_euclid(d));
                    let unit_at = |k: i64| -> usize {
                        let p = src.point_on_edge(e, Rational::from_integer(k)).expect("on edge");
                        match self.source.refinement.map_point(&p) {
                            PointLocation::Vertex(u) => u,
                            PointLocation::Edge { .. } => unreachable!("unit model"),
                        }
                    };
                    out[unit_at(k)] += d - s;
                    if s != 0 {
                        out[unit_at(k + 1)] += s;
                    }
                }
            }
        }
        out
    }

    pub fn pushforward(&self, c: &JacClass) -> JacClass {
        let mut v = vec![0i64; self.target.unit.vertex_count()];
        for (u, &x) in c.0.iter().enumerate() {
            if x != 0 {
                v[self.push_vertex(u)] += x;
            }
        }
        self.target.class_of_vector(&v).expect("degree 0")
    }

    pub fn pullback(&self, c: &JacClass) -> JacClass {
        let mut v = vec![0i64; self.source.unit.vertex_count()];
        for (w, &x) in c.0.iter().enumerate() {
            if x != 0 {
                for (u, y) in self.pull_vertex(w).into_iter().enumerate() {
                    v[u] += x * y;
                }
            }
        }
        self.source.class_of_vector(&v).expect("degree 0")
    }

    pub fn pushforward_image(&self) -> Result<Vec<JacClass>> {
        let gens: Vec<JacClass> = self.source.generators().iter().map(|g| self.pushforward(g)).collect();
        self.target.span(&gens)
    }

    pub fn is_surjective_pushforward(&self) -> Result<bool> {
        if self.source.order() < self.target.order() {
            return Ok(false);
        }
        Ok(self.pushforward_image()?.len() as u128 == self.target.order())
    }

    pub fn cokernel_pushforward_order(&self) -> Result<u128> {
        Ok(self.target.order() / self.pushforward_image()?.len() as u128)
    }

    pub fn kernel_pullback_order(&self) -> Result<u128> {
        let zero = self.source.zero();
        Ok(self.target.elements()?.iter().filter(|c| self.pullback(c) == zero).count() as u128)
    }

    /// `⟨φ^*α, β'⟩ = ⟨α, φ_*β'⟩` for every pair; returns the number of pairs checked, or
    /// the first failing pair.
    pub fn adjointness_check(&self) -> Result<std::result::Result<usize, (JacClass, JacClass)>> {
        let alphas = self.target.elements()?;
        let betas = self.source.elements()?;
        let pulled: Vec<JacClass> = alphas.iter().map(|a| self.pullback(a)).collect();
        let pushed: Vec<JacClass> = betas.iter().map(|b| self.pushforward(b)).collect();
        for (a, pa) in alphas.iter().zip(&pulled) {
            for (b, pb) in betas.iter().zip(&pushed) {
                if self.source.pairing(pa, b) != self.target.pairing(a, pb) {
                    return Ok(Err((a.clone(), b.clone())));
                }
            }
        }
        Ok(Ok(alphas.len() * betas.len()))
    }
}

/// Whether the pairing matrix on an enumerated group has trivial radical.
pub fn pairing_is_nondegenerate(g: &CriticalGroup) -> Result<bool> {
    let all = g.elements()?;
    let zero = g.zero();
    Ok(all.iter().filter(|&a| *a != zero).all(|a| all.iter().any(|b| !g.pairing(a, b).is_zero())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::int;

    #[test]
    fn cycle_groups() {
        for n in 2..=6 {
            let g = regularized_jacobian(&fixtures::circle(n)).unwrap();
            assert_eq!(g.group.factors(), &[n as u64]);
        }
    }

    #[test]
    fn ribet_orders_and_surjectivity() {
        let phi = fixtures::ribet();
        let j = jacobian_map(&phi).unwrap();
        assert_eq!(j.source.order(), 4);
        assert_eq!(j.target.order(), 8);
        assert!(!j.is_surjective_pushforward().unwrap());
        assert_eq!(j.adjointness_check().unwrap(), Ok(32));
        assert_eq!(j.cokernel_pushforward_order().unwrap(), j.kernel_pullback_order().unwrap());
    }

    /// Étale double cover of a 2-cycle by a 4-cycle.
    fn double_cover() -> Morphism {
        let (src, tgt) = (fixtures::circle(4), fixtures::circle(2));
        let emap = (0..4).map(|i| EdgeImage::Edge(i % 2)).collect();
        Morphism::new(src, tgt, vec![0, 1, 0, 1], emap, vec![1; 4], None).unwrap()
    }

    #[test]
    fn push_pull_is_multiplication_by_degree() {
        for phi in [fixtures::ribet(), double_cover()] {
            let j = jacobian_map(&phi).unwrap();
            let d = j.degree() as i64;
            for a in j.target.elements().unwrap() {
                assert_eq!(j.pushforward(&j.pullback(&a)), j.target.times(d, &a));
            }
        }
    }

    #[test]
    fn identity_is_identity() {
        let g = fixtures::banana(&[int(1), int(2), int(2)]);
        let j = jacobian_map(&Morphism::identity(&g)).unwrap();
        assert!(j.is_surjective_pushforward().unwrap());
        for a in j.target.elements().unwrap() {
            assert_eq!(j.pushforward(&a), a);
            assert_eq!(j.pullback(&a), a);
        }
    }

    #[test]
    fn pairing_on_cycle() {
        let g = regularized_jacobian(&fixtures::circle(5)).unwrap();
        let zero = g.zero();
        for a in g.elements().unwrap() {
            assert!(g.pairing(&a, &zero).is_zero());
            for b in g.elements().unwrap() {
                assert_eq!(g.pairing(&a, &b), g.pairing(&b, &a));
            }
        }
        assert!(pairing_is_nondegenerate(&g).unwrap());
        let b4 = regularized_jacobian(&fixtures::banana(&[int(1); 4])).unwrap();
        assert!(pairing_is_nondegenerate(&b4).unwrap());
        // (c1) − (c0) on a 5-cycle: the effective resistance 4/5
        let gen = g.class_of(&(&Divisor::vertex(1) - &Divisor::vertex(0))).unwrap();
        assert_eq!(g.pairing(&gen, &gen), Rational::new(4, 5));
    }

    #[test]
    fn rejects_non_integer_lengths() {
        let g = fixtures::banana(&[Rational::new(1, 2), int(1)]);
        assert!(matches!(regularized_jacobian(&g), Err(Error::NonIntegerLength(_))));
    }
}
