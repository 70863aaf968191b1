//! Inputs shared by the benchmarks.

use tropilift::fixtures;
use tropilift::hurwitz::HurwitzQuery;
use tropilift::rational::int;
use tropilift::{Divisor, MetricGraph, Partition};

/// `H^d_{0,0}((d),(d))` plus the profile with vanishing count.
pub fn hurwitz_queries() -> Vec<(String, HurwitzQuery)> {
    let p = |v: &[u32]| Partition::new(v.to_vec()).expect("partition");
    let mut out: Vec<(String, HurwitzQuery)> = (3..=6)
        .map(|d| (format!("power_map/{d}"), HurwitzQuery::new(0, 0, d, vec![p(&[d]), p(&[d])])))
        .collect();
    out.push(("vanishing/4".into(), HurwitzQuery::new(0, 0, 4, vec![p(&[2, 2]), p(&[2, 2]), p(&[3, 1])])));
    out
}

/// Banana graphs with a divisor of degree `g` at one end.
pub fn rank_inputs() -> Vec<(String, MetricGraph, Divisor)> {
    (2..=4usize)
        .map(|g| {
            let graph = fixtures::banana(&vec![int(1); g + 1]);
            let d = Divisor::from_vertex_coefficients(&[g as i64, 0]);
            (format!("banana/{}", g + 1), graph, d)
        })
        .collect()
}

pub fn jacobian_inputs() -> Vec<(String, MetricGraph)> {
    vec![
        ("circle/12".into(), fixtures::circle(12)),
        ("banana/1,2,2".into(), fixtures::banana(&[int(1), int(2), int(2)])),
        ("banana/2,3,4,5".into(), fixtures::banana(&[int(2), int(3), int(4), int(5)])),
    ]
}
