//! Counting lifts through the two-term complex `𝓔⁰ → 𝓔¹`.
//!
//! `𝓔¹` is the product of the cyclic groups `ℤ/d_e` over finite source edges.
//! `𝓔⁰` and `ρ` come from the residue curves and are supplied by the caller.

use crate::abelian::{FiniteAbelianGroup, GroupHom};
use crate::error::{Error, Result};
use crate::harmonic::{EdgeImage, Morphism};

/// Per-edge orders `d_e` over finite source edges, in edge order. This is the
/// presentation `ρ` must use for its codomain.
pub fn e1_presentation(phi: &Morphism) -> Result<Vec<u64>> {
    if !phi.is_finite() {
        return Err(Error::Precondition("morphism must be finite".into()));
    }
    let src = phi.source();
    Ok((0..src.edge_count())
        .filter(|&e| src.is_finite_edge(e))
        .map(|e| {
            debug_assert!(matches!(phi.edge_map()[e], EdgeImage::Edge(_)));
            phi.edge_degree(e) as u64
        })
        .collect())
}

pub fn e1_from_morphism(phi: &Morphism) -> Result<FiniteAbelianGroup> {
    FiniteAbelianGroup::new(&e1_presentation(phi)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cohomology {
    pub h0: FiniteAbelianGroup,
    pub h1: FiniteAbelianGroup,
}

/// `H⁰ = ker ρ` and `H¹ = coker ρ`.
pub fn complex_cohomology(rho: &GroupHom) -> Cohomology {
    Cohomology { h0: rho.kernel(), h1: rho.cokernel() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftCount {
    pub e0: FiniteAbelianGroup,
    pub e1: FiniteAbelianGroup,
    /// Number of gluing data, `|𝓔¹|`.
    pub gluing_data: u128,
    /// Isomorphism classes of lifts, `|H¹|`.
    pub classes: u128,
    /// Order of the automorphism group of each lift, `|H⁰|`.
    pub automorphisms: u128,
    pub image_order: u128,
    pub cohomology: Cohomology,
}

pub fn count_lifts(phi: &Morphism, rho: &GroupHom) -> Result<LiftCount> {
    let e1 = e1_from_morphism(phi)?;
    if rho.codomain() != e1 {
        return Err(Error::GroupMismatch(format!("codomain of rho is {} but the edge groups give {}", rho.codomain(), e1)));
    }
    let cohomology = complex_cohomology(rho);
    let e0 = rho.domain();
    let image_order = e1.order() / cohomology.h1.order();
    assert_eq!(image_order * cohomology.h0.order(), e0.order(), "index identity");
    Ok(LiftCount {
        gluing_data: e1.order(),
        classes: cohomology.h1.order(),
        automorphisms: cohomology.h0.order(),
        image_order,
        e0,
        e1,
        cohomology,
    })
}

/// `𝓔⁰ = (ℤ/2)²` (one `±1` per vertex) and `ρ` for the 2-isogeny fixture.
pub fn tate_rho() -> GroupHom {
    GroupHom::new(vec![2, 2], vec![2, 2], vec![vec![1, 1], vec![1, 1]]).expect("well-defined")
}
