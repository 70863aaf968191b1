//! Finite abelian groups given by cyclic presentations, and homomorphisms
//! between them. Everything reduces to Smith normal form over ℤ.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Nonzero diagonal entries of the Smith normal form, each dividing the next.
/// The number of entries is the rank of the matrix.
pub fn smith_diagonal(rows: &[Vec<i64>]) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    smith_diagonal_big(&mut a)
}

pub fn smith_diagonal_big(a: &mut [Vec<BigInt>]) -> Vec<BigInt> {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut changed = false;
            for i in t + 1..m {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..n {
                    let v = &a[t][j] * &q;
                    a[i][j] -= v;
                }
                if !a[i][t].is_zero() {
                    a.swap(t, i);
                    changed = true;
                }
            }
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let v = &row[t] * &q;
                    row[j] -= v;
                }
                if !a[t][j].is_zero() {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // the pivot must divide the rest of the block
            let bad = (t + 1..m).find_map(|i| (t + 1..n).find(|&j| !(&a[i][j] % &a[t][t]).is_zero()).map(|j| (i, j)));
            match bad {
                Some((i, _)) => {
                    for j in t..n {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

fn to_u64(x: &BigInt) -> Result<u64> {
    x.to_u64().ok_or_else(|| Error::Precondition(format!("group factor {x} out of range")))
}

/// `⊕ ℤ/nᵢ` in invariant-factor form: every factor > 1 and each divides the next.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

impl FiniteAbelianGroup {
    /// Canonical form of `⊕ ℤ/nᵢ`; zero factors are rejected.
    pub fn new(cyclic: &[u64]) -> Result<Self> {
        if cyclic.contains(&0) {
            return Err(Error::Precondition("cyclic factor 0 gives an infinite group".into()));
        }
        let rows: Vec<Vec<i64>> = (0..cyclic.len())
            .map(|i| (0..cyclic.len()).map(|j| if i == j { cyclic[i] as i64 } else { 0 }).collect())
            .collect();
        let factors = smith_diagonal(&rows)
            .iter()
            .map(to_u64)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|&f| f != 1)
            .collect();
        Ok(FiniteAbelianGroup { factors })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { factors: Vec::new() }
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> u128 {
        self.factors.iter().map(|&f| f as u128).product()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// `#{x : n·x = 0}`; these counts over all `n` determine the group.
    pub fn torsion_count(&self, n: u64) -> u128 {
        self.factors.iter().map(|&f| f.gcd(&n) as u128).product()
    }
}

impl std::fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.factors.iter().map(|n| format!("Z/{n}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Cokernel of `ℤᵏ → ℤᵐ` given by `relations` (columns) as a finite group;
/// errors if the cokernel is infinite.
pub fn finite_cokernel(m: usize, relations: &[Vec<i64>]) -> Result<FiniteAbelianGroup> {
    let rows: Vec<Vec<i64>> = (0..m).map(|i| relations.iter().map(|c| c[i]).collect()).collect();
    let diag = smith_diagonal(&rows);
    if diag.len() < m {
        return Err(Error::Precondition("cokernel is infinite".into()));
    }
    let cyclic = diag.iter().map(to_u64).collect::<Result<Vec<_>>>()?;
    FiniteAbelianGroup::new(&cyclic)
}

/// A homomorphism `⊕ ℤ/aᵢ → ⊕ ℤ/bⱼ`; column `i` of `matrix` is the image of the `i`-th generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    domain: Vec<u64>,
    codomain: Vec<u64>,
    /// `matrix[j][i]`, row per codomain generator.
    matrix: Vec<Vec<i64>>,
}

impl GroupHom {
    pub fn new(domain: Vec<u64>, codomain: Vec<u64>, matrix: Vec<Vec<i64>>) -> Result<Self> {
        if domain.contains(&0) || codomain.contains(&0) {
            return Err(Error::IllDefinedHom("cyclic factor 0".into()));
        }
        if matrix.len() != codomain.len() || matrix.iter().any(|r| r.len() != domain.len()) {
            return Err(Error::IllDefinedHom(format!(
                "matrix must be {}x{}",
                codomain.len(),
                domain.len()
            )));
        }
        for (j, row) in matrix.iter().enumerate() {
            for (i, &x) in row.iter().enumerate() {
                if (domain[i] as i128 * x as i128).rem_euclid(codomain[j] as i128) != 0 {
                    return Err(Error::IllDefinedHom(format!(
                        "generator {i} has order {} but its image coordinate {j} is {x} mod {}",
                        domain[i], codomain[j]
                    )));
                }
            }
        }
        Ok(GroupHom { domain, codomain, matrix })
    }

    pub fn zero(domain: Vec<u64>, codomain: Vec<u64>) -> Self {
        let matrix = vec![vec![0; domain.len()]; codomain.len()];
        GroupHom { domain, codomain, matrix }
    }

    pub fn domain_presentation(&self) -> &[u64] {
        &self.domain
    }

    pub fn codomain_presentation(&self) -> &[u64] {
        &self.codomain
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn domain(&self) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(&self.domain).expect("validated")
    }

    pub fn codomain(&self) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(&self.codomain).expect("validated")
    }

    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        self.matrix
            .iter()
            .zip(&self.codomain)
            .map(|(row, &b)| {
                let s: i128 = row.iter().zip(x).map(|(&m, &v)| m as i128 * v as i128).sum();
                s.rem_euclid(b as i128) as i64
            })
            .collect()
    }

    /// `ℤᵐ / (columns of M, columns of diag(b))`.
    pub fn cokernel(&self) -> FiniteAbelianGroup {
        let m = self.codomain.len();
        let mut rels: Vec<Vec<i64>> = (0..self.domain.len()).map(|i| self.matrix.iter().map(|r| r[i]).collect()).collect();
        for (j, &b) in self.codomain.iter().enumerate() {
            let mut c = vec![0; m];
            c[j] = b as i64;
            rels.push(c);
        }
        finite_cokernel(m, &rels).expect("finite codomain")
    }

    /// Pontryagin dual `⊕ ℤ/bⱼ → ⊕ ℤ/aᵢ`, entries `aᵢ·M[j][i]/bⱼ`.
    pub fn dual(&self) -> GroupHom {
        let matrix = (0..self.domain.len())
            .map(|i| {
                (0..self.codomain.len())
                    .map(|j| {
                        let num = self.domain[i] as i128 * self.matrix[j][i] as i128;
                        (num / self.codomain[j] as i128) as i64
                    })
                    .collect()
            })
            .collect();
        GroupHom { domain: self.codomain.clone(), codomain: self.domain.clone(), matrix }
    }

    /// Kernel, as the dual of the cokernel of the dual map.
    pub fn kernel(&self) -> FiniteAbelianGroup {
        self.dual().cokernel()
    }

    pub fn image_order(&self) -> u128 {
        self.codomain().order() / self.cokernel().order()
    }
}

/// Every element of `⊕ ℤ/nᵢ` as a coordinate vector.
pub fn elements(cyclic: &[u64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &n in cyclic {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..n as i64).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Brute-force kernel and cokernel sizes together with their torsion counts
/// for `n = 1..=exponent`; only for small groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForce {
    pub kernel_order: u128,
    pub cokernel_order: u128,
    pub kernel_torsion: Vec<u128>,
    pub cokernel_torsion: Vec<u128>,
}

pub fn brute_force(h: &GroupHom) -> BruteForce {
    let reduce = |v: &[i64]| -> Vec<i64> { v.iter().zip(&h.codomain).map(|(&x, &b)| x.rem_euclid(b as i64)).collect() };
    let dom = elements(&h.domain);
    let kernel: Vec<&Vec<i64>> = dom.iter().filter(|x| h.apply(x).iter().all(|&y| y == 0)).collect();
    let image: std::collections::HashSet<Vec<i64>> = dom.iter().map(|x| h.apply(x)).collect();
    let cod = elements(&h.codomain);
    let max_n = h.domain.iter().chain(&h.codomain).copied().fold(1u64, |a, b| a.lcm(&b));
    let mut kernel_torsion = Vec::new();
    let mut cokernel_torsion = Vec::new();
    for n in 1..=max_n as i64 {
        kernel_torsion.push(
            kernel
                .iter()
                .filter(|x| x.iter().zip(&h.domain).all(|(&v, &a)| (n * v).rem_euclid(a as i64) == 0))
                .count() as u128,
        );
        let hits = cod
            .iter()
            .filter(|y| image.contains(&reduce(&y.iter().map(|v| n * v).collect::<Vec<_>>())))
            .count();
        cokernel_torsion.push((hits / image.len()) as u128);
    }
    BruteForce {
        kernel_order: kernel.len() as u128,
        cokernel_order: (cod.len() / image.len()) as u128,
        kernel_torsion,
        cokernel_torsion,
    }
}
