//! Hurwitz numbers by exhaustive enumeration of monodromy tuples in `S_d`.

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::perm::{factorial, symmetric_group, Orbits, Perm, MAX_DEGREE};

/// `H^d_{g',g}(μ₁,…,μ_s)` in characteristic `char_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HurwitzQuery {
    pub g_source: u32,
    pub g_target: u32,
    pub d: u32,
    pub mus: Vec<Partition>,
    pub char_p: u64,
}

impl HurwitzQuery {
    pub fn new(g_source: u32, g_target: u32, d: u32, mus: Vec<Partition>) -> Self {
        HurwitzQuery { g_source, g_target, d, mus, char_p: 0 }
    }

    pub fn with_char(mut self, char_p: u64) -> Self {
        self.char_p = char_p;
        self
    }

    /// `R = d(2−2g) + 2g' − 2 − sd + Σ l(μᵢ)`, the number of extra simple branch points.
    pub fn expected_r(&self) -> i64 {
        let d = self.d as i64;
        d * (2 - 2 * self.g_target as i64) + 2 * self.g_source as i64 - 2 - self.mus.len() as i64 * d
            + self.mus.iter().map(|m| m.len() as i64).sum::<i64>()
    }

    fn check(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Precondition("degree must be positive".into()));
        }
        if self.d as usize > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(self.d));
        }
        for m in &self.mus {
            if m.sum() != self.d {
                return Err(Error::Precondition(format!("{m} is not a partition of {}", self.d)));
            }
        }
        Ok(())
    }
}

/// Tameness of a query in positive characteristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tameness {
    /// `p = 0` or `p > d`: the characteristic-zero count applies.
    Tame,
    /// Some entry is divisible by `p`.
    Wild,
    /// Entries prime to `p` but `p ≤ d`: the monodromy group may still have order divisible by `p`.
    Ambiguous,
}

pub fn tameness(q: &HurwitzQuery) -> Tameness {
    let p = q.char_p;
    if p == 0 || p > q.d as u64 {
        return Tameness::Tame;
    }
    let wild = q.mus.iter().flat_map(|m| m.parts()).any(|&x| x as u64 % p == 0);
    if wild {
        Tameness::Wild
    } else {
        Tameness::Ambiguous
    }
}

/// Entries prime to the characteristic (ambiguous queries count as tame here).
pub fn is_tame_query(q: &HurwitzQuery) -> bool {
    tameness(q) != Tameness::Wild
}

/// Exact Hurwitz number with the underlying tuple count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HurwitzNumber {
    pub tuples: u128,
    pub d_factorial: u64,
}

impl HurwitzNumber {
    pub fn value(&self) -> Ratio<i128> {
        Ratio::new(self.tuples as i128, self.d_factorial as i128)
    }

    pub fn is_zero(&self) -> bool {
        self.tuples == 0
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EnumerationOptions {
    /// Fix `σ₁` to one representative and multiply by its class size.
    pub fix_first_class: bool,
    /// Drop the transitivity requirement.
    pub intransitive: bool,
}

#[derive(Clone, Copy)]
enum Factor<'a> {
    Commutator,
    Class(&'a [Perm], &'a [u32]),
}

struct Enumerator<'a> {
    d: usize,
    factors: Vec<Factor<'a>>,
    all: &'a [Perm],
    transitive: bool,
}

impl Enumerator<'_> {
    fn count_from(&self, level: usize, product: Perm, orbits: Orbits) -> u128 {
        if level == self.factors.len() {
            let ok = product.is_identity() && (!self.transitive || orbits.is_transitive(self.d));
            return ok as u128;
        }
        let last = level + 1 == self.factors.len();
        match self.factors[level] {
            Factor::Class(_, ty) if last => {
                let x = product.inverse();
                if x.cycle_type(self.d) != ty {
                    return 0;
                }
                let orbits = orbits.join(&x, self.d);
                (!self.transitive || orbits.is_transitive(self.d)) as u128
            }
            Factor::Class(elems, _) => elems
                .iter()
                .map(|x| self.count_from(level + 1, product.compose(x), orbits.join(x, self.d)))
                .sum(),
            Factor::Commutator => {
                let mut total = 0;
                for a in self.all {
                    let oa = orbits.join(a, self.d);
                    for b in self.all {
                        let c = Perm::commutator(a, b);
                        total += self.count_from(level + 1, product.compose(&c), oa.join(b, self.d));
                    }
                }
                total
            }
        }
    }

    /// Splits the first level across threads.
    fn count(&self) -> u128 {
        if self.factors.is_empty() {
            return (self.d == 1) as u128;
        }
        if self.factors.len() == 1 {
            return self.count_from(0, Perm::identity(), Orbits::discrete());
        }
        let start = Orbits::discrete();
        match self.factors[0] {
            Factor::Class(elems, _) => elems
                .par_iter()
                .map(|x| self.count_from(1, *x, start.join(x, self.d)))
                .sum(),
            Factor::Commutator => self
                .all
                .par_iter()
                .map(|a| {
                    let oa = start.join(a, self.d);
                    self.all
                        .iter()
                        .map(|b| self.count_from(1, Perm::commutator(a, b), oa.join(b, self.d)))
                        .sum::<u128>()
                })
                .sum(),
        }
    }
}

/// Counts tuples `(a₁,b₁,…,a_g,b_g, σ₁,…,σ_s, τ₁,…,τ_R)` with product 1.
pub fn count_tuples(q: &HurwitzQuery, options: EnumerationOptions) -> Result<u128> {
    q.check()?;
    let r = q.expected_r();
    if r < 0 {
        return Err(Error::NegativeRamification(r));
    }
    let d = q.d as usize;
    let group = symmetric_group(d);
    let transposition: Partition = {
        let mut parts = vec![1u32; d];
        if d >= 2 {
            parts.truncate(d - 1);
            parts[0] = 2;
        }
        Partition::new(parts)?
    };
    if d == 1 && r > 0 {
        return Ok(0);
    }
    let mut factors = Vec::new();
    for _ in 0..q.g_target {
        factors.push(Factor::Commutator);
    }
    let mut mus: Vec<&Partition> = q.mus.iter().collect();
    let tau = &transposition;
    for _ in 0..r {
        mus.push(tau);
    }
    let mut multiplier = 1u128;
    let mut fixed: Option<Perm> = None;
    if options.fix_first_class && !q.mus.is_empty() {
        let class = group.class(&q.mus[0]);
        multiplier = class.len() as u128;
        fixed = Some(class[0]);
        mus.remove(0);
    }
    for m in &mus {
        factors.push(Factor::Class(group.class(m), m.parts()));
    }
    let e = Enumerator { d, factors, all: &group.elements, transitive: !options.intransitive };
    let count = match fixed {
        Some(x) => e.count_from(0, x, Orbits::discrete().join(&x, d)),
        None => e.count(),
    };
    Ok(count * multiplier)
}

/// Exact `H^d_{g',g}(μ₁,…,μ_s)`; refuses negative `R` and non-tame characteristic.
pub fn hurwitz_number(q: &HurwitzQuery) -> Result<HurwitzNumber> {
    hurwitz_number_with(q, EnumerationOptions::default())
}

pub fn hurwitz_number_with(q: &HurwitzQuery, options: EnumerationOptions) -> Result<HurwitzNumber> {
    q.check()?;
    let r = q.expected_r();
    if r < 0 {
        return Err(Error::NegativeRamification(r));
    }
    if tameness(q) != Tameness::Tame {
        return Err(Error::WildCharacteristic { char_p: q.char_p, degree: q.d });
    }
    let tuples = count_tuples(q, options)?;
    Ok(HurwitzNumber { tuples, d_factorial: factorial(q.d as usize) })
}

/// Non-emptiness of the set of covers with the given profiles.
pub fn a_set_nonempty(q: &HurwitzQuery) -> Result<bool> {
    Ok(!hurwitz_number(q)?.is_zero())
}

/// Least `g' ≤ g_max` with `R ≥ 0` and a nonzero Hurwitz number.
pub fn min_source_genus(g_target: u32, d: u32, mus: &[Partition], g_max: u32, char_p: u64) -> Result<Option<u32>> {
    for g in 0..=g_max {
        let q = HurwitzQuery { g_source: g, g_target, d, mus: mus.to_vec(), char_p };
        if q.expected_r() < 0 {
            continue;
        }
        if a_set_nonempty(&q)? {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// No degree-4 rational map has ramification profile (2,2), (2,2), (3,1).
pub fn no_degree4_profile_221_31() -> bool {
    let mus = ["2,2", "2,2", "3,1"].iter().map(|s| s.parse().expect("partition")).collect();
    matches!(a_set_nonempty(&HurwitzQuery::new(0, 0, 4, mus)), Ok(false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mus(list: &[&str]) -> Vec<Partition> {
        list.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn expected_r_examples() {
        assert_eq!(HurwitzQuery::new(0, 0, 4, mus(&["2,2", "2,2", "3,1"])).expected_r(), 0);
        for g in 0..4 {
            assert_eq!(HurwitzQuery::new(g, 0, 2, vec![]).expected_r(), 2 + 2 * g as i64);
        }
        assert_eq!(HurwitzQuery::new(1, 0, 3, mus(&["3", "3", "3"])).expected_r(), 0);
    }

    #[test]
    fn tameness_examples() {
        let q = HurwitzQuery::new(0, 0, 4, mus(&["2,2"]));
        assert!(is_tame_query(&q));
        assert!(is_tame_query(&q.clone().with_char(5)));
        assert!(!is_tame_query(&q.clone().with_char(2)));
        assert_eq!(tameness(&q.with_char(3)), Tameness::Ambiguous);
    }

    #[test]
    fn degree_two_values() {
        for g in 0..3 {
            let h = hurwitz_number(&HurwitzQuery::new(g, 0, 2, vec![])).unwrap();
            assert_eq!(h.value(), Ratio::new(1, 2));
        }
    }

    #[test]
    fn vanishing_profile() {
        let q = HurwitzQuery::new(0, 0, 4, mus(&["2,2", "2,2", "3,1"]));
        assert!(hurwitz_number(&q).unwrap().is_zero());
        let loose = EnumerationOptions { intransitive: true, ..Default::default() };
        assert_eq!(count_tuples(&q, loose).unwrap(), 0);
        assert!(no_degree4_profile_221_31());
    }

    #[test]
    fn cubic_torus() {
        let h = hurwitz_number(&HurwitzQuery::new(1, 0, 3, mus(&["3", "3", "3"]))).unwrap();
        assert_eq!(h.tuples, 2);
        assert_eq!(h.value(), Ratio::new(1, 3));
    }

    #[test]
    fn refusals() {
        let neg = HurwitzQuery::new(0, 0, 3, mus(&["3", "3", "3"]));
        assert!(matches!(hurwitz_number(&neg), Err(Error::NegativeRamification(-2))));
        let wild = HurwitzQuery::new(0, 0, 2, mus(&["2", "2"])).with_char(2);
        assert!(matches!(hurwitz_number(&wild), Err(Error::WildCharacteristic { .. })));
        assert!(matches!(
            hurwitz_number(&HurwitzQuery::new(0, 0, 9, vec![])),
            Err(Error::DegreeTooLarge(9))
        ));
    }

    #[test]
    fn min_genus_examples() {
        assert_eq!(min_source_genus(0, 2, &[], 3, 0).unwrap(), Some(0));
        let star = mus(&["2,2", "2,2", "3,1"]);
        assert_eq!(min_source_genus(0, 4, &star, 0, 0).unwrap(), None);
        let g = min_source_genus(0, 4, &star, 3, 0).unwrap().unwrap();
        assert!(g >= 1);
    }

    #[test]
    fn fixing_the_first_class_agrees() {
        let fast = EnumerationOptions { fix_first_class: true, ..Default::default() };
        let cases = [
            HurwitzQuery::new(0, 0, 4, mus(&["2,2", "2,2", "3,1"])),
            HurwitzQuery::new(1, 0, 4, mus(&["2,2", "2,2", "3,1"])),
            HurwitzQuery::new(0, 0, 3, mus(&["3", "3"])),
            HurwitzQuery::new(1, 0, 3, mus(&["3", "3", "3"])),
            HurwitzQuery::new(0, 0, 4, mus(&["4", "2,1,1"])),
            HurwitzQuery::new(2, 1, 2, mus(&["2"])),
        ];
        for q in cases {
            let opts = EnumerationOptions::default();
            assert_eq!(count_tuples(&q, opts).unwrap(), count_tuples(&q, fast).unwrap(), "{q:?}");
        }
    }
}
