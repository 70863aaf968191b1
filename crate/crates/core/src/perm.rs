//! Small permutations (degree ≤ 8) and their conjugacy classes.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::partition::Partition;

pub const MAX_DEGREE: usize = 8;

/// A permutation of `0..d`, padded with fixed points up to `MAX_DEGREE`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm([u8; MAX_DEGREE]);

impl Perm {
    pub fn identity() -> Self {
        let mut a = [0u8; MAX_DEGREE];
        for (i, x) in a.iter_mut().enumerate() {
            *x = i as u8;
        }
        Perm(a)
    }

    pub fn from_images(images: &[u8]) -> Self {
        let mut p = Perm::identity();
        p.0[..images.len()].copy_from_slice(images);
        p
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        let mut out = [0u8; MAX_DEGREE];
        for (i, x) in out.iter_mut().enumerate() {
            *x = self.0[other.0[i] as usize];
        }
        Perm(out)
    }

    pub fn inverse(&self) -> Perm {
        let mut out = [0u8; MAX_DEGREE];
        for (i, &x) in self.0.iter().enumerate() {
            out[x as usize] = i as u8;
        }
        Perm(out)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// Cycle lengths on `0..d`, sorted descending.
    pub fn cycle_type(&self, d: usize) -> Vec<u32> {
        let mut seen = [false; MAX_DEGREE];
        let mut out = Vec::new();
        for start in 0..d {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.0[i] as usize;
                len += 1;
            }
            out.push(len);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// `a b a⁻¹ b⁻¹`.
    pub fn commutator(a: &Perm, b: &Perm) -> Perm {
        a.compose(b).compose(&a.inverse()).compose(&b.inverse())
    }
}

/// Orbit labels on `0..d`; merged as permutations are added.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Orbits([u8; MAX_DEGREE]);

impl Orbits {
    pub fn discrete() -> Self {
        Orbits(Perm::identity().0)
    }

    pub fn join(&self, p: &Perm, d: usize) -> Orbits {
        let mut labels = self.0;
        for i in 0..d {
            let (a, b) = (labels[i], labels[p.0[i] as usize]);
            if a != b {
                let (keep, drop) = (a.min(b), a.max(b));
                for l in labels.iter_mut().take(d) {
                    if *l == drop {
                        *l = keep;
                    }
                }
            }
        }
        Orbits(labels)
    }

    pub fn is_transitive(&self, d: usize) -> bool {
        self.0[..d].iter().all(|&l| l == 0)
    }
}

/// All of `S_d` grouped by cycle type.
pub struct SymmetricGroup {
    pub degree: usize,
    pub elements: Vec<Perm>,
    pub classes: BTreeMap<Vec<u32>, Vec<Perm>>,
}

fn build(d: usize) -> SymmetricGroup {
    let mut elements = Vec::new();
    let mut current: Vec<u8> = (0..d as u8).collect();
    // Heap's algorithm
    let mut c = vec![0usize; d];
    elements.push(Perm::from_images(&current));
    let mut i = 0;
    while i < d {
        if c[i] < i {
            if i % 2 == 0 {
                current.swap(0, i);
            } else {
                current.swap(c[i], i);
            }
            elements.push(Perm::from_images(&current));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    elements.sort();
    let mut classes: BTreeMap<Vec<u32>, Vec<Perm>> = BTreeMap::new();
    for p in &elements {
        classes.entry(p.cycle_type(d)).or_default().push(*p);
    }
    SymmetricGroup { degree: d, elements, classes }
}

/// Memoised `S_d` for `1 ≤ d ≤ MAX_DEGREE`.
pub fn symmetric_group(d: usize) -> &'static SymmetricGroup {
    static CACHE: [OnceLock<SymmetricGroup>; MAX_DEGREE + 1] = [const { OnceLock::new() }; MAX_DEGREE + 1];
    assert!((1..=MAX_DEGREE).contains(&d), "degree out of range");
    CACHE[d].get_or_init(|| build(d))
}

impl SymmetricGroup {
    pub fn class(&self, mu: &Partition) -> &[Perm] {
        self.classes.get(mu.parts()).map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn factorial(d: usize) -> u64 {
    (1..=d as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_sizes() {
        for d in 1..=6 {
            let g = symmetric_group(d);
            assert_eq!(g.elements.len() as u64, factorial(d));
            let total: usize = g.classes.values().map(Vec::len).sum();
            assert_eq!(total, g.elements.len());
        }
        let s4 = symmetric_group(4);
        assert_eq!(s4.class(&"2,2".parse().unwrap()).len(), 3);
        assert_eq!(s4.class(&"3,1".parse().unwrap()).len(), 8);
        assert_eq!(s4.class(&"2,1,1".parse().unwrap()).len(), 6);
    }

    #[test]
    fn composition_and_inverse() {
        let a = Perm::from_images(&[1, 2, 0]);
        assert_eq!(a.compose(&a.inverse()), Perm::identity());
        assert_eq!(a.cycle_type(3), vec![3]);
        assert_eq!(a.compose(&a).compose(&a), Perm::identity());
        let t = Perm::from_images(&[1, 0, 2]);
        assert_eq!(a.compose(&t).apply(0), a.apply(1));
    }

    #[test]
    fn orbits() {
        let t = Perm::from_images(&[1, 0, 2, 3]);
        let u = Perm::from_images(&[0, 1, 3, 2]);
        let o = Orbits::discrete().join(&t, 4).join(&u, 4);
        assert!(!o.is_transitive(4));
        let w = Perm::from_images(&[0, 2, 1, 3]);
        assert!(o.join(&w, 4).is_transitive(4));
    }
}
