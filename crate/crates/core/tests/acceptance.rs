//! One PASS/FAIL line per acceptance criterion, with wall-clock limits.
//! Run with `cargo test -p tropilift-core --test acceptance`.

use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tropilift::divisors::{fiber_report, rank_metric_with, RankOptions};
use tropilift::fixtures;
use tropilift::gluing::{count_lifts, tate_rho};
use tropilift::gonality::{genus_two_graphs, tropical_gonality_upper, SearchBudget};
use tropilift::hurwitz::{a_set_nonempty, hurwitz_number, HurwitzQuery};
use tropilift::hyperelliptic::liftable_hyperelliptic;
use tropilift::jacobian::{jacobian_map, regularized_jacobian};
use tropilift::lifting::{genus_relaxed_lift, liftable_augmented};
use tropilift::random::{random_morphism, random_unit_graph, random_vertex_divisor, MorphismParams};
use tropilift::rational::{frac, int};
use tropilift::{Divisor, EdgeImage, GraphBuilder, MetricGraph, Morphism, Partition, PointLocation};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn p(parts: &[u32]) -> Partition {
    Partition::new(parts.to_vec()).unwrap()
}

// --- plain permutation oracle, independent of the library's enumerator ---

fn perms(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for q in perms(d - 1) {
        for pos in 0..d {
            let mut v = q.clone();
            v.insert(pos, d - 1);
            out.push(v);
        }
    }
    out
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // apply b first
    b.iter().map(|&i| a[i]).collect()
}

fn cycle_type(a: &[usize]) -> Vec<u32> {
    let mut seen = vec![false; a.len()];
    let mut out = Vec::new();
    for s in 0..a.len() {
        if !seen[s] {
            let mut len = 0;
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                i = a[i];
                len += 1;
            }
            out.push(len);
        }
    }
    out.sort_unstable_by(|x, y| y.cmp(x));
    out
}

fn transitive(gens: &[&Vec<usize>], d: usize) -> bool {
    let mut reached = vec![false; d];
    reached[0] = true;
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for g in gens {
            if !reached[g[i]] {
                reached[g[i]] = true;
                stack.push(g[i]);
            }
        }
    }
    reached.into_iter().all(|r| r)
}

/// Transitive triples with the given cycle types and product one, brute force.
fn triple_count(d: usize, types: [&[u32]; 3]) -> u64 {
    let all = perms(d);
    let mut n = 0;
    for a in all.iter().filter(|a| cycle_type(a) == types[0]) {
        for b in all.iter().filter(|b| cycle_type(b) == types[1]) {
            for c in all.iter().filter(|c| cycle_type(c) == types[2]) {
                let prod = compose(&compose(a, b), c);
                if prod.iter().enumerate().all(|(i, &x)| i == x) && transitive(&[a, b, c], d) {
                    n += 1;
                }
            }
        }
    }
    n
}

fn factorial(d: u64) -> u64 {
    (1..=d).product()
}

// --- criteria ---

fn c1() -> Check {
    let q = HurwitzQuery::new(0, 0, 4, vec![p(&[2, 2]), p(&[2, 2]), p(&[3, 1])]);
    ensure(q.expected_r() == 0, "R should vanish")?;
    let h = hurwitz_number(&q).map_err(err)?;
    let oracle = triple_count(4, [&[2, 2], &[2, 2], &[3, 1]]);
    ensure(h.tuples == 0 && oracle == 0, format!("library {} tuples, brute force {oracle}", h.tuples))?;
    Ok("H = 0 (brute force over S4^3 agrees)".into())
}

fn c2() -> Check {
    for g in 0..=3u32 {
        let q = HurwitzQuery::new(g, 0, 2, vec![]);
        let h = hurwitz_number(&q).map_err(err)?;
        // 2g + 2 copies of the only transposition of S2 always multiply to one
        ensure(q.expected_r() == 2 * g as i64 + 2, "R = 2g + 2")?;
        ensure(h.value() == Ratio::new(1, 2), format!("g={g}: {}", h.value()))?;
    }
    Ok("H = 1/2 for g = 0..3".into())
}

fn c3() -> Check {
    let mus = vec![p(&[3]), p(&[3]), p(&[3])];
    let g = (0..4).find(|&g| HurwitzQuery::new(g, 0, 3, mus.clone()).expected_r() == 0).ok_or("no R = 0 genus")?;
    let h = hurwitz_number(&HurwitzQuery::new(g, 0, 3, mus)).map_err(err)?;
    let oracle = Ratio::new(triple_count(3, [&[3], &[3], &[3]]) as i128, factorial(3) as i128);
    ensure(g == 1, format!("R = 0 at g' = {g}"))?;
    ensure(h.value() == oracle && oracle == Ratio::new(1, 3), format!("library {}, oracle {oracle}", h.value()))?;
    Ok(format!("H at g'={g} is {} > 0", h.value()))
}

fn c4() -> Check {
    for d in 2..=6 {
        let q = HurwitzQuery::new(0, 0, d, vec![p(&[d]), p(&[d])]);
        ensure(a_set_nonempty(&q).map_err(err)?, format!("empty at d={d}"))?;
    }
    Ok("non-empty for d = 2..6".into())
}

fn c5() -> Check {
    let phi = fixtures::star_map();
    let report = liftable_augmented(&phi, 0).map_err(err)?;
    let obstructed: Vec<&str> = report.obstructed().map(|v| v.name.as_str()).collect();
    ensure(!report.liftable && obstructed == ["p"], format!("obstructed at {obstructed:?}"))?;
    let genera = genus_relaxed_lift(&phi, 3, 0).map_err(err)?.ok_or("no lift with g' <= 3")?;
    let centre = phi.source().vertex_index("p").unwrap();
    ensure(genera[centre] >= 1, "central genus should grow")?;
    let relaxed = phi.with_source_genus(&genera).map_err(err)?;
    ensure(liftable_augmented(&relaxed, 0).map_err(err)?.liftable, "relaxed morphism still obstructed")?;
    Ok(format!("only p obstructed; g'(p) = {} lifts", genera[centre]))
}

fn c6() -> Check {
    let c = count_lifts(&fixtures::tate_2_isogeny(), &tate_rho()).map_err(err)?;
    ensure(
        (c.gluing_data, c.classes, c.automorphisms) == (4, 2, 2),
        format!("got ({}, {}, {})", c.gluing_data, c.classes, c.automorphisms),
    )?;
    Ok("4 gluing data, 2 classes, 2 automorphisms".into())
}

/// Spanning trees of the unit model by checking every edge subset.
fn spanning_trees_brute(g: &MetricGraph) -> u64 {
    // unit model: every edge of integer length ℓ becomes a path of ℓ unit edges
    let mut n = g.vertex_count();
    let mut edges = Vec::new();
    for e in g.edges() {
        let l = e.length.finite().unwrap().to_integer() as usize;
        let mut prev = e.ends[0];
        for _ in 1..l {
            edges.push((prev, n));
            prev = n;
            n += 1;
        }
        edges.push((prev, e.ends[1]));
    }
    let m = edges.len();
    let mut count = 0;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let mut acyclic = true;
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    acyclic = false;
                    break;
                }
                parent[ra] = rb;
            }
        }
        count += acyclic as u64;
    }
    count
}

fn c7() -> Check {
    let b1111 = fixtures::banana(&[int(1); 4]);
    let b122 = fixtures::banana(&[int(1), int(2), int(2)]);
    for (g, want) in [(&b1111, 4u128), (&b122, 8)] {
        let jac = regularized_jacobian(g).map_err(err)?;
        let trees = spanning_trees_brute(g) as u128;
        ensure(jac.order() == want && trees == want, format!("SNF {} vs trees {trees}, want {want}", jac.order()))?;
    }
    let j = jacobian_map(&fixtures::ribet()).map_err(err)?;
    ensure(!j.is_surjective_pushforward().map_err(err)?, "pushforward is surjective")?;
    Ok("|Jac B(1,1,1,1)| = 4, |Jac B(1,2,2)| = 8, pushforward not onto".into())
}

/// `K_{Γ'} = φ*K_Γ + R` at one source vertex, from the graph data alone.
fn riemann_hurwitz_at(phi: &Morphism, v: usize) -> bool {
    let (s, t) = (phi.source(), phi.target());
    let w = phi.image_vertex(v);
    let degrees: Vec<u32> = s.incident(v).iter().map(|&e| phi.edge_degree(e)).collect();
    // local degree from any one target direction
    let local: u32 = match t.incident(w).first() {
        Some(&f) => s
            .incident(v)
            .iter()
            .filter(|&&e| phi.edge_map()[e] == EdgeImage::Edge(f))
            .map(|&e| phi.edge_degree(e) * if s.edge(e).ends[0] == s.edge(e).ends[1] { 2 } else { 1 })
            .sum(),
        None => return false,
    };
    let (gs, gt) = (s.vertex(v).genus as i64, t.vertex(w).genus as i64);
    let k_src = s.valence(v) as i64 - 2 + 2 * gs;
    let k_tgt = t.valence(w) as i64 - 2 + 2 * gt;
    let r = local as i64 * (2 - 2 * gt) - (2 - 2 * gs) - degrees.iter().map(|&d| d as i64 - 1).sum::<i64>();
    k_src == local as i64 * k_tgt + r
}

fn c8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let params = MorphismParams::default();
    for i in 0..200 {
        let phi = random_morphism(&mut rng, &params);
        let lib = phi.riemann_hurwitz_check().map_err(err)?;
        let oracle = (0..phi.source().vertex_count()).all(|v| riemann_hurwitz_at(&phi, v));
        ensure(lib && oracle, format!("sample {i}: library {lib}, oracle {oracle}"))?;
    }
    Ok("200/200 random morphisms".into())
}

fn c9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let params = MorphismParams::tree_covers();
    let mut fibers = 0;
    for i in 0..50 {
        let phi = random_morphism(&mut rng, &params);
        let r = fiber_report(&phi).map_err(err)?;
        ensure(r.all_equivalent && r.all_rank_at_least_one, format!("sample {i}: {r:?}"))?;
        // equivalence again through the critical group: D_x − D_y is trivial in Jac
        let jac = regularized_jacobian(phi.source()).map_err(err)?;
        let base = phi.fiber_divisor(&PointLocation::Vertex(0)).map_err(err)?;
        for w in 1..phi.target().vertex_count() {
            let d = phi.fiber_divisor(&PointLocation::Vertex(w)).map_err(err)?;
            let diff: Divisor = &d - &base;
            ensure(jac.class_of(&diff).map_err(err)? == jac.zero(), format!("sample {i}: fibers differ in Jac"))?;
        }
        fibers += r.samples;
    }
    Ok(format!("50/50 random covers of trees, {fibers} fibers"))
}

fn c10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let exact = RankOptions { riemann_roch_shortcut: false, extra_subdivision: false };
    for i in 0..500 {
        let g = random_unit_graph(&mut rng, 5, 8);
        let genus = g.genus();
        let coeffs = random_vertex_divisor(&mut rng, g.vertex_count(), -1, 2 * genus);
        let d = Divisor::from_vertex_coefficients(&coeffs);
        let k_minus_d = &g.canonical_divisor() - &d;
        let r = rank_metric_with(&g, &d, exact).map_err(err)?;
        let rk = rank_metric_with(&g, &k_minus_d, exact).map_err(err)?;
        ensure(r - rk == d.degree() + 1 - genus, format!("sample {i}: r={r}, r(K-D)={rk}, deg={}, g={genus}", d.degree()))?;
    }
    Ok("500/500 random divisors".into())
}

fn c11() -> Check {
    for kappa in 2..=4usize {
        for g_p in 0..=2u32 {
            let r = liftable_hyperelliptic(&fixtures::hyper_family(kappa, g_p)).map_err(err)?;
            ensure(r.hyperelliptic, format!("kappa={kappa}, g={g_p}: not hyperelliptic"))?;
            let want = 2 * g_p + 2 >= kappa as u32;
            ensure(r.liftable == want, format!("kappa={kappa}, g={g_p}: liftable={}", r.liftable))?;
        }
    }
    let r = liftable_hyperelliptic(&fixtures::hyper_family(3, 0)).map_err(err)?;
    ensure(!r.liftable, "kappa=3, g=0 should not lift")?;
    Ok("kappa = 2..4, g(p) = 0..2 match 2g(p) >= kappa - 2".into())
}

fn validate_witness(graph: &MetricGraph, phi: &Morphism) -> Result<(), String> {
    ensure(phi.validate().is_empty(), "invalid morphism")?;
    ensure(phi.is_harmonic() && phi.is_finite(), "not finite harmonic")?;
    ensure(phi.is_effective().map_err(err)?, "not effective")?;
    ensure(phi.target().is_tree(), "target is not a tree")?;
    ensure(phi.source().genus() == graph.genus(), "source genus changed")?;
    Ok(())
}

fn c12() -> Check {
    let budget = SearchBudget::default();
    let mut cases: Vec<(String, MetricGraph, u32)> = Vec::new();
    cases.push(("path".into(), fixtures::path(3), 1));
    let mut tripod = GraphBuilder::new();
    let o = tripod.vertex("o", 0);
    for (i, l) in [int(1), int(2), frac(1, 2)].into_iter().enumerate() {
        let leaf = tripod.vertex(format!("l{i}"), 0);
        tripod.finite_edge(format!("t{i}"), o, leaf, l);
    }
    cases.push(("tripod".into(), tripod.build().unwrap(), 1));
    for n in 2..=5 {
        cases.push((format!("circle({n})"), fixtures::circle(n), 2));
    }
    let triples = [[int(1), int(1), int(1)], [int(1), int(2), int(3)], [int(2), int(1), frac(1, 2)]];
    for lengths in triples {
        for (name, g) in genus_two_graphs(lengths) {
            cases.push((format!("{name}{lengths:?}"), g, 2));
        }
    }
    for (name, g, want) in &cases {
        let out = tropical_gonality_upper(g, 3, budget).map_err(err)?;
        ensure(out.gonality_upper == Some(*want), format!("{name}: {:?}", out.gonality_upper))?;
        validate_witness(g, out.witness.as_ref().unwrap()).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} graphs, all witnesses valid", cases.len()))
}

fn c13() -> Check {
    let j = jacobian_map(&fixtures::ribet()).map_err(err)?;
    let pairs = j.adjointness_check().map_err(err)?.map_err(|(a, b)| format!("fails at {a:?}, {b:?}"))?;
    ensure(pairs == 32, format!("{pairs} pairs"))?;
    let c4_to_c2 = {
        let emap = (0..4).map(|i| EdgeImage::Edge(i % 2)).collect();
        Morphism::new(fixtures::circle(4), fixtures::circle(2), vec![0, 1, 0, 1], emap, vec![1; 4], None).unwrap()
    };
    let c6_to_c2 = {
        let emap = (0..6).map(|i| EdgeImage::Edge(i % 2)).collect();
        Morphism::new(fixtures::circle(6), fixtures::circle(2), vec![0, 1, 0, 1, 0, 1], emap, vec![1; 6], None).unwrap()
    };
    let fixtures_list = [
        fixtures::ribet(),
        c4_to_c2,
        c6_to_c2,
        Morphism::identity(&fixtures::banana(&[int(1), int(2), int(2)])),
    ];
    for phi in &fixtures_list {
        let j = jacobian_map(phi).map_err(err)?;
        let (c, k) = (j.cokernel_pushforward_order().map_err(err)?, j.kernel_pullback_order().map_err(err)?);
        ensure(c == k, format!("|coker| = {c}, |ker| = {k}"))?;
    }
    Ok(format!("32 pairs adjoint; duality on {} maps", fixtures_list.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check, u64); 13] = [
        ("Hurwitz vanishing", c1, 1),
        ("Hurwitz value H2 = 1/2", c2, 4),
        ("degree-3 positivity", c3, 1),
        ("A-set existence", c4, 10),
        ("star-map obstruction", c5, 30),
        ("gluing cohomology", c6, 1),
        ("Jacobian orders", c7, 1),
        ("Riemann-Hurwitz suite", c8, 60),
        ("fiber properties", c9, 120),
        ("Riemann-Roch oracle", c10, 60),
        ("hyperelliptic criteria", c11, 5),
        ("gonality sanity", c12, 120),
        ("monodromy pairing", c13, 5),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (status, detail) = match (&result, in_time) {
            (Ok(msg), true) => ("PASS", msg.clone()),
            (Ok(msg), false) => ("FAIL", format!("{msg}; too slow")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {:>2}. {name}: {detail} [{:.3}s / {limit}s]", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
