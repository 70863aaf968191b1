//! Local liftability of augmented harmonic morphisms: one Hurwitz-type
//! existence question per finite source vertex.

use crate::error::{Error, Result};
use crate::harmonic::Morphism;
use crate::hurwitz::{a_set_nonempty, min_source_genus, tameness, HurwitzQuery, Tameness};
use crate::partition::Partition;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Liftable,
    Obstructed,
    /// The characteristic is not known to behave like characteristic zero here.
    Wild,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Liftable => "liftable",
            Verdict::Obstructed => "obstructed",
            Verdict::Wild => "wild",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexLiftReport {
    pub vertex: usize,
    pub name: String,
    pub degree: u32,
    pub g_source: u32,
    pub g_target: u32,
    pub partitions: Vec<Partition>,
    /// Number of extra simple branch points, equal to `R_{p'}`.
    pub r: i64,
    pub verdict: Verdict,
    /// Set when the verdict came from a closed-form shortcut instead of enumeration.
    pub shortcut: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftReport {
    pub liftable: bool,
    pub vertices: Vec<VertexLiftReport>,
}

impl LiftReport {
    pub fn obstructed(&self) -> impl Iterator<Item = &VertexLiftReport> {
        self.vertices.iter().filter(|v| v.verdict != Verdict::Liftable)
    }
}

/// Local profile data of `φ` at a finite source vertex.
pub fn vertex_query(phi: &Morphism, v: usize, char_p: u64) -> Result<HurwitzQuery> {
    let d = phi.local_degree(v)?;
    Ok(HurwitzQuery {
        g_source: phi.source().vertex(v).genus,
        g_target: phi.target().vertex(phi.image_vertex(v)).genus,
        d,
        mus: phi.local_partitions(v)?,
        char_p,
    })
}

/// The monomial shape: genus 0 over genus 0, two full cycles, everything else unramified.
fn is_power_map(q: &HurwitzQuery) -> bool {
    q.g_source == 0
        && q.g_target == 0
        && q.mus.iter().filter(|m| m.parts() == [q.d]).count() == 2
        && q.mus.iter().filter(|m| m.parts() != [q.d]).all(Partition::is_trivial)
}

fn decide(q: &HurwitzQuery) -> Result<(Verdict, Option<&'static str>)> {
    if q.d == 1 && q.g_source == q.g_target {
        return Ok((Verdict::Liftable, Some("degree one")));
    }
    if q.d >= 2 && is_power_map(q) {
        return Ok((Verdict::Liftable, Some("power map")));
    }
    if tameness(q) != Tameness::Tame {
        return Ok((Verdict::Wild, None));
    }
    if q.d >= 2 && q.mus.iter().all(Partition::is_trivial) && q.expected_r() >= 0 {
        return Ok((Verdict::Liftable, Some("unramified profile")));
    }
    let nonempty = a_set_nonempty(q)?;
    Ok((if nonempty { Verdict::Liftable } else { Verdict::Obstructed }, None))
}

fn check_preconditions(phi: &Morphism, char_p: u64) -> Result<()> {
    if !phi.is_finite() {
        return Err(Error::Precondition("morphism must be finite".into()));
    }
    phi.degree()?;
    if !phi.is_tame(char_p) {
        return Err(Error::NotTame(char_p));
    }
    Ok(())
}

/// Whether every finite source vertex admits a local cover with its profile.
pub fn liftable_augmented(phi: &Morphism, char_p: u64) -> Result<LiftReport> {
    check_preconditions(phi, char_p)?;
    let ram = phi.ramification()?;
    for v in phi.source().finite_vertices() {
        if let Some(r) = ram.small_r[v] {
            if r < 0 {
                return Err(Error::NotEffective { vertex: phi.source().vertex(v).name.clone(), r });
            }
        }
    }
    let mut vertices = Vec::new();
    for v in phi.source().finite_vertices() {
        let q = vertex_query(phi, v, char_p)?;
        debug_assert_eq!(q.expected_r(), ram.big_r[v]);
        let (verdict, shortcut) = decide(&q)?;
        vertices.push(VertexLiftReport {
            vertex: v,
            name: phi.source().vertex(v).name.clone(),
            degree: q.d,
            g_source: q.g_source,
            g_target: q.g_target,
            r: q.expected_r(),
            partitions: q.mus,
            verdict,
            shortcut,
        });
    }
    let liftable = vertices.iter().all(|r| r.verdict == Verdict::Liftable);
    Ok(LiftReport { liftable, vertices })
}

/// Least source genus function (values ≤ `g_max`) making every local cover exist.
/// Infinite vertices get genus 0. `None` if some vertex needs more than `g_max`.
pub fn genus_relaxed_lift(phi: &Morphism, g_max: u32, char_p: u64) -> Result<Option<Vec<u32>>> {
    check_preconditions(phi, char_p)?;
    let mut genus = vec![0u32; phi.source().vertex_count()];
    for v in phi.source().finite_vertices() {
        let q = vertex_query(phi, v, char_p)?;
        let best = if q.d == 1 {
            Some(q.g_target).filter(|&g| g <= g_max)
        } else if q.g_target == 0 && is_power_map(&HurwitzQuery { g_source: 0, ..q.clone() }) {
            Some(0)
        } else if q.mus.iter().all(Partition::is_trivial) && tameness(&q) == Tameness::Tame {
            // smallest g' with d(2 − 2g) + 2g' − 2 ≥ 0
            let need = 2 - q.d as i64 * (2 - 2 * q.g_target as i64);
            let g = (need.max(0) + 1) / 2;
            Some(g as u32).filter(|&g| g <= g_max)
        } else {
            if tameness(&q) != Tameness::Tame {
                return Err(Error::WildCharacteristic { char_p, degree: q.d });
            }
            min_source_genus(q.g_target, q.d, &q.mus, g_max, char_p)?
        };
        match best {
            Some(g) => genus[v] = g,
            None => return Ok(None),
        }
    }
    Ok(Some(genus))
}

/// Generically étale and tame: the combinatorial shape of a tame covering.
pub fn check_tame_covering_shadow(phi: &Morphism, char_p: u64) -> Result<bool> {
    Ok(phi.is_generically_etale()? && phi.is_tame(char_p))
}
