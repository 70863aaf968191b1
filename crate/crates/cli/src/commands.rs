use num_rational::Ratio;
use serde_json::{json, Value};

use tropilift::divisors::{rank_metric, weighted_rank};
use tropilift::gluing::{count_lifts, tate_rho};
use tropilift::gonality::{lift_obstructed_gonality, tropical_gonality_upper, SearchBudget};
use tropilift::hurwitz::{hurwitz_number, tameness, HurwitzQuery, Tameness};
use tropilift::hyperelliptic::{describe, liftable_hyperelliptic};
use tropilift::io::{bundle_to_json, divisor_to_json, graph_to_dot, graph_to_json, morphism_to_dot, parse_gluing_data};
use tropilift::jacobian::{jacobian_map, regularized_jacobian};
use tropilift::lifting::{genus_relaxed_lift, liftable_augmented, LiftReport};
use tropilift::{Divisor, Error, MetricGraph, Morphism, Partition, Result};

use crate::input::{self, Loaded, Source};

/// A command's result in every output format.
pub struct Report {
    pub json: Value,
    pub text: String,
    pub dot: Option<String>,
    /// Exit with status 1 after printing (a negative validation verdict).
    pub invalid: bool,
}

impl Report {
    fn new(json: Value, text: impl Into<String>) -> Self {
        Report { json, text: text.into(), dot: None, invalid: false }
    }

    fn with_dot(mut self, dot: String) -> Self {
        self.dot = Some(dot);
        self
    }
}

fn ratio_string(r: Ratio<i128>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn divisor_text(g: &MetricGraph, d: &Divisor) -> String {
    if d.is_zero() {
        return "0".into();
    }
    d.iter().map(|(p, c)| format!("{c}*{}", g.describe_point(p))).collect::<Vec<_>>().join(" + ")
}

pub fn genus(src: &Source) -> Result<Report> {
    let g = src.graph()?;
    let json = json!({
        "genus": g.genus(),
        "first_betti": g.first_betti(),
        "vertex_genus": g.vertices().iter().map(|v| v.genus as i64).sum::<i64>(),
    });
    Ok(Report::new(json, g.genus().to_string()).with_dot(graph_to_dot(&g)))
}

pub fn canonical(src: &Source) -> Result<Report> {
    let g = src.graph()?;
    let k = g.canonical_divisor();
    Ok(Report::new(divisor_to_json(&g, &k), divisor_text(&g, &k)))
}

pub fn rank(src: &Source, divisor: &str, weighted: bool) -> Result<Report> {
    let g = src.graph()?;
    let d = input::divisor(&g, divisor)?;
    let r = if weighted { weighted_rank(&g, &d)? } else { rank_metric(&g, &d)? };
    let json = json!({"rank": r, "degree": d.degree(), "weighted": weighted});
    Ok(Report::new(json, r.to_string()))
}

pub fn check_morphism(src: &Source) -> Result<Report> {
    let phi = match src.morphism() {
        Ok(phi) => phi,
        Err(e) => {
            let (path, root) = match &e {
                Error::At { path, .. } => (Some(path.clone()), e.root()),
                _ => (None, &e),
            };
            let Error::InvalidMorphism(diags) = root else { return Err(e) };
            let list: Vec<Value> = diags
                .iter()
                .map(|d| json!({"kind": d.kind.as_str(), "id": d.id, "detail": d.detail}))
                .collect();
            let text = diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n");
            let mut r = Report::new(json!({"valid": false, "path": path, "diagnostics": list}), format!("invalid\n{text}"));
            r.invalid = true;
            return Ok(r);
        }
    };
    let harmonic = phi.is_harmonic();
    let degree = phi.degree().ok();
    let effective = if harmonic { phi.is_effective().ok() } else { None };
    let json = json!({
        "valid": true,
        "harmonic": harmonic,
        "degree": degree,
        "finite": phi.is_finite(),
        "effective": effective,
        "etale": if harmonic { phi.is_etale().ok() } else { None },
        "local_degrees": phi.local_degrees().ok(),
    });
    let mut text = format!("valid\nharmonic: {harmonic}\nfinite: {}", phi.is_finite());
    if let Some(d) = degree {
        text.push_str(&format!("\ndegree: {d}"));
    }
    if let Some(e) = effective {
        text.push_str(&format!("\neffective: {e}"));
    }
    if let Err(e) = phi.local_degrees() {
        text.push_str(&format!("\n{e}"));
    }
    Ok(Report::new(json, text).with_dot(morphism_to_dot(&phi)))
}

pub fn ramification(src: &Source) -> Result<Report> {
    let phi = src.morphism()?;
    let ram = phi.ramification()?;
    let local = phi.local_degrees()?;
    let s = phi.source();
    let rows: Vec<Value> = (0..s.vertex_count())
        .map(|v| {
            json!({
                "vertex": s.vertex(v).name,
                "local_degree": local[v],
                "R": ram.big_r[v],
                "r": ram.small_r[v],
            })
        })
        .collect();
    let rh = phi.riemann_hurwitz_check()?;
    let mut text: Vec<String> = (0..s.vertex_count())
        .map(|v| format!("{}: d={} R={}", s.vertex(v).name, local[v], ram.big_r[v]))
        .collect();
    text.push(format!("riemann-hurwitz: {rh}"));
    let json = json!({"vertices": rows, "divisor": divisor_to_json(s, &ram.divisor), "riemann_hurwitz": rh});
    Ok(Report::new(json, text.join("\n")))
}

pub fn hurwitz(gs: u32, gt: u32, d: u32, mus: &[String], char_p: u64) -> Result<Report> {
    let mus = mus.iter().map(|m| m.parse()).collect::<Result<Vec<Partition>>>()?;
    let q = HurwitzQuery::new(gs, gt, d, mus).with_char(char_p);
    let h = hurwitz_number(&q)?;
    let json = json!({
        "value": ratio_string(h.value()),
        "tuples": h.tuples.to_string(),
        "R": q.expected_r(),
        "tame": tameness(&q) == Tameness::Tame,
    });
    Ok(Report::new(json, h.value().to_string()))
}

fn lift_json(report: &LiftReport) -> Value {
    let vertices: Vec<Value> = report
        .vertices
        .iter()
        .map(|v| {
            json!({
                "vertex": v.name,
                "degree": v.degree,
                "g_source": v.g_source,
                "g_target": v.g_target,
                "partitions": v.partitions.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "R": v.r,
                "verdict": v.verdict.as_str(),
                "shortcut": v.shortcut,
            })
        })
        .collect();
    json!({"liftable": report.liftable, "vertices": vertices})
}

fn lift_text(report: &LiftReport) -> String {
    let mut lines = vec![report.liftable.to_string()];
    for v in report.obstructed() {
        let parts: Vec<String> = v.partitions.iter().map(|p| p.to_string()).collect();
        lines.push(format!(
            "{} at {}: degree {}, genus {} over {}, profiles {}, R = {}",
            v.verdict.as_str(),
            v.name,
            v.degree,
            v.g_source,
            v.g_target,
            parts.join(" "),
            v.r
        ));
    }
    lines.join("\n")
}

pub fn liftable(src: &Source, char_p: u64, relax: Option<u32>) -> Result<Report> {
    let phi = src.morphism()?;
    let report = liftable_augmented(&phi, char_p)?;
    let mut json = lift_json(&report);
    let mut text = lift_text(&report);
    if let Some(g_max) = relax {
        let relaxed = genus_relaxed_lift(&phi, g_max, char_p)?;
        let s = phi.source();
        json["relaxed_genus"] = match &relaxed {
            Some(genus) => Value::Object(
                genus.iter().enumerate().map(|(v, g)| (s.vertex(v).name.clone(), json!(g))).collect(),
            ),
            None => Value::Null,
        };
        text.push_str(&match relaxed {
            Some(genus) => {
                let raised: Vec<String> = genus
                    .iter()
                    .enumerate()
                    .filter(|&(v, &g)| g != s.vertex(v).genus)
                    .map(|(v, g)| format!("{}={g}", s.vertex(v).name))
                    .collect();
                format!("\nrelaxed genus: {}", if raised.is_empty() { "unchanged".into() } else { raised.join(", ") })
            }
            None => format!("\nno relaxed lift with genus <= {g_max}"),
        });
    }
    Ok(Report::new(json, text).with_dot(morphism_to_dot(&phi)))
}

pub fn gluing_count(src: &Source, gluing: Option<&std::path::PathBuf>) -> Result<Report> {
    let phi = src.morphism()?;
    let rho = match gluing {
        Some(path) => parse_gluing_data(&phi, &input::read_json(Some(path))?)?,
        None if src.fixture.as_deref().is_some_and(|f| f.eq_ignore_ascii_case("TATE2ISOGENY")) => tate_rho(),
        None => return Err(Error::Precondition("--gluing is required for this morphism".into())),
    };
    let c = count_lifts(&phi, &rho)?;
    let json = json!({
        "gluing_data": c.gluing_data.to_string(),
        "lift_classes": c.classes.to_string(),
        "automorphisms": c.automorphisms.to_string(),
        "h0": c.cohomology.h0.to_string(),
        "h1": c.cohomology.h1.to_string(),
        "e0": c.e0.to_string(),
        "e1": c.e1.to_string(),
    });
    let text = format!(
        "gluing data: {}\nlift classes: {}\nautomorphisms per lift: {}",
        c.gluing_data, c.classes, c.automorphisms
    );
    Ok(Report::new(json, text))
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum JacobianCheck {
    Surjective,
    Adjoint,
}

pub fn jacobian(src: &Source, check: Option<JacobianCheck>) -> Result<Report> {
    match src.load()? {
        Loaded::Graph(g) => {
            if check.is_some() {
                return Err(Error::Precondition("--check needs a morphism".into()));
            }
            let jac = regularized_jacobian(&g)?;
            let json = json!({
                "order": jac.order().to_string(),
                "group": jac.group.to_string(),
                "invariants": jac.group.factors(),
                "spanning_trees": jac.spanning_trees.to_string(),
            });
            Ok(Report::new(json, format!("{} (order {})", jac.group, jac.order())))
        }
        Loaded::Morphism(phi) => {
            let j = jacobian_map(&phi)?;
            match check {
                Some(JacobianCheck::Surjective) => {
                    let s = j.is_surjective_pushforward()?;
                    Ok(Report::new(json!({"surjective": s}), s.to_string()))
                }
                Some(JacobianCheck::Adjoint) => match j.adjointness_check()? {
                    Ok(pairs) => Ok(Report::new(json!({"adjoint": true, "pairs": pairs}), format!("true ({pairs} pairs)"))),
                    Err((a, b)) => Ok(Report::new(
                        json!({"adjoint": false, "counterexample": [a.0, b.0]}),
                        format!("false at {:?}, {:?}", a.0, b.0),
                    )),
                },
                None => {
                    let json = json!({
                        "source": {"group": j.source.group.to_string(), "order": j.source.order().to_string()},
                        "target": {"group": j.target.group.to_string(), "order": j.target.order().to_string()},
                        "degree": j.degree(),
                        "pushforward_surjective": j.is_surjective_pushforward()?,
                        "cokernel_pushforward": j.cokernel_pushforward_order()?.to_string(),
                        "kernel_pullback": j.kernel_pullback_order()?.to_string(),
                    });
                    let text = format!(
                        "source: {} (order {})\ntarget: {} (order {})\npushforward surjective: {}",
                        j.source.group,
                        j.source.order(),
                        j.target.group,
                        j.target.order(),
                        j.is_surjective_pushforward()?
                    );
                    Ok(Report::new(json, text))
                }
            }
        }
    }
}

pub fn hyperelliptic(src: &Source) -> Result<Report> {
    let g = src.graph()?;
    let r = liftable_hyperelliptic(&g)?;
    let pairs: Vec<Value> = r.involution.as_ref().map(describe).unwrap_or_default().into_iter().map(|(a, b)| json!([a, b])).collect();
    let vertices: Vec<Value> = r
        .vertices
        .iter()
        .map(|c| json!({"vertex": c.name, "genus": c.genus, "kappa": c.kappa, "bridges": c.bridges}))
        .collect();
    let json = json!({"hyperelliptic": r.hyperelliptic, "liftable": r.liftable, "involution": pairs, "fixed_vertices": vertices});
    let mut text = format!("hyperelliptic: {}", r.hyperelliptic);
    if r.hyperelliptic {
        text.push_str(&format!("\nliftable: {}", r.liftable));
        for c in &r.vertices {
            text.push_str(&format!("\n{}: g={} kappa={}", c.name, c.genus, c.kappa));
        }
    }
    let mut report = Report::new(json, text);
    if let Some(s) = &r.involution {
        report = report.with_dot(s.quotient().map(|q| morphism_to_dot(&q)).unwrap_or_else(|_| graph_to_dot(&s.model)));
    }
    Ok(report)
}

fn budget(node_limit: Option<u64>) -> SearchBudget {
    let mut b = SearchBudget::default();
    if let Some(n) = node_limit {
        b.node_limit = n;
    }
    b
}

fn witness_outcome(g: &MetricGraph, dmax: u32, node_limit: Option<u64>) -> Result<(Option<u32>, Option<Morphism>, bool)> {
    let out = tropical_gonality_upper(g, dmax, budget(node_limit))?;
    Ok((out.gonality_upper, out.witness, out.lower_degrees_complete))
}

pub fn gonality(src: &Source, dmax: u32, node_limit: Option<u64>) -> Result<Report> {
    let g = src.graph()?;
    let (d, witness, complete) = witness_outcome(&g, dmax, node_limit)?;
    let json = json!({
        "gonality_upper": d,
        "lower_degrees_complete": complete,
        "witness": witness.as_ref().map(bundle_to_json),
    });
    let text = match d {
        Some(d) if complete => format!("{d}"),
        Some(d) => format!("<= {d} (smaller degrees not exhausted)"),
        None => format!("no witness of degree <= {dmax} within budget"),
    };
    let mut report = Report::new(json, text);
    if let Some(w) = &witness {
        report = report.with_dot(morphism_to_dot(w));
    }
    Ok(report)
}

pub fn obstruct(src: &Source, dmax: u32, node_limit: Option<u64>, char_p: u64) -> Result<Report> {
    let g = src.graph()?;
    let (d, witness, _) = witness_outcome(&g, dmax, node_limit)?;
    let Some(w) = witness else {
        return Ok(Report::new(json!({"gonality_upper": null}), format!("no witness of degree <= {dmax} within budget")));
    };
    let r = lift_obstructed_gonality(&w, char_p)?;
    let json = json!({
        "gonality_upper": d,
        "certifies_nonliftable": r.certifies_nonliftable,
        "obstructed": r.obstructed,
        "lift": lift_json(&r.lift),
        "witness": bundle_to_json(&w),
    });
    let text = format!(
        "degree {} witness {}\n{}",
        r.degree,
        if r.certifies_nonliftable { "does not lift" } else { "lifts" },
        lift_text(&r.lift)
    );
    Ok(Report::new(json, text).with_dot(morphism_to_dot(&w)))
}

pub fn fixture(name: &str) -> Result<Report> {
    let src = Source { input: None, fixture: Some(name.into()), graphs: None, morphism: None };
    let (json, dot) = match src.load()? {
        Loaded::Graph(g) => (graph_to_json(&g), graph_to_dot(&g)),
        Loaded::Morphism(m) => (bundle_to_json(&m), morphism_to_dot(&m)),
    };
    let text = serde_json::to_string_pretty(&json)?;
    Ok(Report::new(json, text).with_dot(dot))
}

pub fn fixture_list() -> Report {
    let names = tropilift::fixtures::NAMES;
    Report::new(json!(names), names.join("\n"))
}
