//! JSON and DOT formats for graphs, morphisms, divisors and gluing data.
//! Rationals are `"p/q"` strings and infinite lengths are `"inf"`. Parse
//! errors carry a JSON-pointer path.

use serde_json::{json, Map, Value};

use crate::abelian::GroupHom;
use crate::error::{Error, Result};
use crate::gluing::e1_presentation;
use crate::graph::{Divisor, Edge, Length, MetricGraph, PointLocation, Vertex};
use crate::harmonic::{EdgeImage, Morphism};
use crate::rational::{format_rational, parse_rational};

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn child(path: &str, token: impl std::fmt::Display) -> String {
    format!("{path}/{}", escape(&token.to_string()))
}

fn schema(path: &str, msg: impl Into<String>) -> Error {
    Error::at(path, Error::Precondition(msg.into()))
}

fn get<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| schema(path, format!("missing field {key:?}")))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn as_u64(v: &Value, path: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn as_i64(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| schema(path, "expected an integer"))
}

fn length_to_json(l: &Length) -> Value {
    match l {
        Length::Finite(x) => Value::String(format_rational(x)),
        Length::Infinite => Value::String("inf".into()),
    }
}

pub fn graph_to_json(g: &MetricGraph) -> Value {
    let vertices: Vec<Value> = g
        .vertices()
        .iter()
        .map(|v| json!({"id": v.name, "genus": v.genus, "infinite": v.infinite}))
        .collect();
    let edges: Vec<Value> = g
        .edges()
        .iter()
        .map(|e| {
            json!({
                "id": e.name,
                "ends": [g.vertex(e.ends[0]).name, g.vertex(e.ends[1]).name],
                "length": length_to_json(&e.length),
            })
        })
        .collect();
    json!({"vertices": vertices, "edges": edges})
}

pub fn parse_graph(v: &Value) -> Result<MetricGraph> {
    parse_graph_at(v, "")
}

fn parse_graph_at(v: &Value, root: &str) -> Result<MetricGraph> {
    let vpath = child(root, "vertices");
    let mut vertices = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (i, item) in as_array(get(v, "vertices", root)?, &vpath)?.iter().enumerate() {
        let p = child(&vpath, i);
        let name = as_str(get(item, "id", &p)?, &child(&p, "id"))?.to_string();
        let genus = match item.get("genus") {
            None => 0,
            Some(g) => u32::try_from(as_u64(g, &child(&p, "genus"))?).map_err(|_| schema(&child(&p, "genus"), "genus too large"))?,
        };
        let infinite = match item.get("infinite") {
            None => false,
            Some(b) => b.as_bool().ok_or_else(|| schema(&child(&p, "infinite"), "expected a boolean"))?,
        };
        index.insert(name.clone(), vertices.len());
        vertices.push(Vertex { name, infinite, genus });
    }
    let epath = child(root, "edges");
    let mut edges = Vec::new();
    for (i, item) in as_array(get(v, "edges", root)?, &epath)?.iter().enumerate() {
        let p = child(&epath, i);
        let name = as_str(get(item, "id", &p)?, &child(&p, "id"))?.to_string();
        let ends_path = child(&p, "ends");
        let ends_v = as_array(get(item, "ends", &p)?, &ends_path)?;
        if ends_v.len() != 2 {
            return Err(schema(&ends_path, "expected two endpoints"));
        }
        let mut ends = [0usize; 2];
        for (k, end) in ends_v.iter().enumerate() {
            let ep = child(&ends_path, k);
            let id = as_str(end, &ep)?;
            ends[k] = *index.get(id).ok_or_else(|| Error::at(&ep, Error::UnknownId(id.to_string())))?;
        }
        let lpath = child(&p, "length");
        let text = as_str(get(item, "length", &p)?, &lpath)?;
        let length = if text.trim() == "inf" {
            Length::Infinite
        } else {
            Length::Finite(parse_rational(text).map_err(|e| Error::at(&lpath, e))?)
        };
        edges.push(Edge { name, ends, length });
    }
    MetricGraph::from_parts(vertices, edges).map_err(|e| Error::at(if root.is_empty() { "/" } else { root }, e))
}

pub fn morphism_to_json(phi: &Morphism) -> Value {
    let (src, tgt) = (phi.source(), phi.target());
    let mut vmap = Map::new();
    for (v, &w) in phi.vertex_map().iter().enumerate() {
        vmap.insert(src.vertex(v).name.clone(), Value::String(tgt.vertex(w).name.clone()));
    }
    let mut emap = Map::new();
    let mut degrees = Map::new();
    for (e, img) in phi.edge_map().iter().enumerate() {
        let name = src.edge(e).name.clone();
        let value = match img {
            EdgeImage::Edge(f) => json!({"edge": tgt.edge(*f).name}),
            EdgeImage::Contracted(w) => json!({"contracted_to": tgt.vertex(*w).name}),
        };
        emap.insert(name.clone(), value);
        degrees.insert(name, json!(phi.edge_degree(e)));
    }
    let mut out = Map::new();
    out.insert("vertex_map".into(), Value::Object(vmap));
    out.insert("edge_map".into(), Value::Object(emap));
    out.insert("edge_degree".into(), Value::Object(degrees));
    if let Some(pd) = phi.point_degrees() {
        let m: Map<String, Value> =
            pd.iter().enumerate().map(|(v, &d)| (src.vertex(v).name.clone(), json!(d))).collect();
        out.insert("point_target_degrees".into(), Value::Object(m));
    }
    Value::Object(out)
}

pub fn parse_morphism(source: MetricGraph, target: MetricGraph, v: &Value) -> Result<Morphism> {
    parse_morphism_at(source, target, v, "")
}

fn parse_morphism_at(source: MetricGraph, target: MetricGraph, v: &Value, root: &str) -> Result<Morphism> {
    let tv = |id: &str, p: &str| -> Result<usize> {
        target.vertex_index(id).ok_or_else(|| Error::at(p, Error::UnknownId(id.to_string())))
    };
    let vm_path = child(root, "vertex_map");
    let vm = as_object(get(v, "vertex_map", root)?, &vm_path)?;
    let mut vertex_map = vec![usize::MAX; source.vertex_count()];
    for (k, val) in vm {
        let p = child(&vm_path, k);
        let sv = source.vertex_index(k).ok_or_else(|| Error::at(&p, Error::UnknownId(k.clone())))?;
        vertex_map[sv] = tv(as_str(val, &p)?, &p)?;
    }
    if let Some(v) = vertex_map.iter().position(|&x| x == usize::MAX) {
        return Err(schema(&vm_path, format!("no image for vertex {:?}", source.vertex(v).name)));
    }
    let em_path = child(root, "edge_map");
    let em = as_object(get(v, "edge_map", root)?, &em_path)?;
    let mut edge_map = vec![None; source.edge_count()];
    for (k, val) in em {
        let p = child(&em_path, k);
        let se = source.edge_index(k).ok_or_else(|| Error::at(&p, Error::UnknownId(k.clone())))?;
        let img = if let Some(f) = val.get("edge") {
            let fp = child(&p, "edge");
            let id = as_str(f, &fp)?;
            EdgeImage::Edge(target.edge_index(id).ok_or_else(|| Error::at(&fp, Error::UnknownId(id.to_string())))?)
        } else if let Some(w) = val.get("contracted_to") {
            let wp = child(&p, "contracted_to");
            EdgeImage::Contracted(tv(as_str(w, &wp)?, &wp)?)
        } else {
            return Err(schema(&p, "expected {\"edge\": id} or {\"contracted_to\": id}"));
        };
        edge_map[se] = Some(img);
    }
    let edge_map: Vec<EdgeImage> = edge_map
        .into_iter()
        .enumerate()
        .map(|(e, img)| img.ok_or_else(|| schema(&em_path, format!("no image for edge {:?}", source.edge(e).name))))
        .collect::<Result<_>>()?;
    let ed_path = child(root, "edge_degree");
    let ed = as_object(get(v, "edge_degree", root)?, &ed_path)?;
    let mut edge_degree = vec![None; source.edge_count()];
    for (k, val) in ed {
        let p = child(&ed_path, k);
        let se = source.edge_index(k).ok_or_else(|| Error::at(&p, Error::UnknownId(k.clone())))?;
        edge_degree[se] = Some(u32::try_from(as_u64(val, &p)?).map_err(|_| schema(&p, "degree too large"))?);
    }
    let edge_degree: Vec<u32> = edge_degree
        .into_iter()
        .enumerate()
        .map(|(e, d)| d.ok_or_else(|| schema(&ed_path, format!("no degree for edge {:?}", source.edge(e).name))))
        .collect::<Result<_>>()?;
    let point_degrees = match v.get("point_target_degrees") {
        None | Some(Value::Null) => None,
        Some(pd) => {
            let pd_path = child(root, "point_target_degrees");
            let obj = as_object(pd, &pd_path)?;
            let mut out = vec![0u32; source.vertex_count()];
            for (k, val) in obj {
                let p = child(&pd_path, k);
                let sv = source.vertex_index(k).ok_or_else(|| Error::at(&p, Error::UnknownId(k.clone())))?;
                out[sv] = u32::try_from(as_u64(val, &p)?).map_err(|_| schema(&p, "degree too large"))?;
            }
            Some(out)
        }
    };
    Morphism::new(source, target, vertex_map, edge_map, edge_degree, point_degrees)
        .map_err(|e| Error::at(if root.is_empty() { "/" } else { root }, e))
}

/// `{"source", "target", "morphism"}` in one document.
pub fn bundle_to_json(phi: &Morphism) -> Value {
    json!({
        "source": graph_to_json(phi.source()),
        "target": graph_to_json(phi.target()),
        "morphism": morphism_to_json(phi),
    })
}

pub fn parse_bundle(v: &Value) -> Result<Morphism> {
    let source = parse_graph_at(get(v, "source", "")?, "/source")?;
    let target = parse_graph_at(get(v, "target", "")?, "/target")?;
    parse_morphism_at(source, target, get(v, "morphism", "")?, "/morphism")
}

pub fn divisor_to_json(g: &MetricGraph, d: &Divisor) -> Value {
    let items: Vec<Value> = d
        .iter()
        .map(|(p, c)| {
            let at = match p {
                PointLocation::Vertex(v) => json!({"vertex": g.vertex(*v).name}),
                PointLocation::Edge { edge, offset } => {
                    json!({"edge": g.edge(*edge).name, "offset": format_rational(offset)})
                }
            };
            json!({"at": at, "coeff": c})
        })
        .collect();
    Value::Array(items)
}

/// Offsets are measured from the first endpoint (the finite one on an infinite edge).
pub fn parse_divisor(g: &MetricGraph, v: &Value) -> Result<Divisor> {
    let mut d = Divisor::new();
    for (i, item) in as_array(v, "")?.iter().enumerate() {
        let p = child("", i);
        let at_path = child(&p, "at");
        let at = get(item, "at", &p)?;
        let coeff = as_i64(get(item, "coeff", &p)?, &child(&p, "coeff"))?;
        let loc = if let Some(vid) = at.get("vertex") {
            let vp = child(&at_path, "vertex");
            let id = as_str(vid, &vp)?;
            PointLocation::Vertex(g.vertex_index(id).ok_or_else(|| Error::at(&vp, Error::UnknownId(id.to_string())))?)
        } else if let Some(eid) = at.get("edge") {
            let ep = child(&at_path, "edge");
            let id = as_str(eid, &ep)?;
            let e = g.edge_index(id).ok_or_else(|| Error::at(&ep, Error::UnknownId(id.to_string())))?;
            let op = child(&at_path, "offset");
            let offset = parse_rational(as_str(get(at, "offset", &at_path)?, &op)?).map_err(|e| Error::at(&op, e))?;
            g.point_on_edge(e, offset).map_err(|e| Error::at(&op, e))?
        } else {
            return Err(schema(&at_path, "expected {\"vertex\": id} or {\"edge\": id, \"offset\": q}"));
        };
        d.add_point(loc, coeff);
    }
    Ok(d)
}

/// Gluing data: `{"factors": [{"vertex": id, "order": n}, …], "rho": [[…], …]}` with one
/// row of `rho` per finite source edge (in edge order) and one column per factor.
pub fn parse_gluing_data(phi: &Morphism, v: &Value) -> Result<GroupHom> {
    let fpath = "/factors";
    let mut domain = Vec::new();
    for (i, item) in as_array(get(v, "factors", "")?, fpath)?.iter().enumerate() {
        let p = child(fpath, i);
        if let Some(vid) = item.get("vertex") {
            let id = as_str(vid, &child(&p, "vertex"))?;
            if phi.source().vertex_index(id).is_none() {
                return Err(Error::at(child(&p, "vertex"), Error::UnknownId(id.to_string())));
            }
        }
        domain.push(as_u64(get(item, "order", &p)?, &child(&p, "order"))?);
    }
    let codomain = e1_presentation(phi)?;
    let rpath = "/rho";
    let mut matrix = Vec::new();
    for (j, row) in as_array(get(v, "rho", "")?, rpath)?.iter().enumerate() {
        let p = child(rpath, j);
        let entries = as_array(row, &p)?
            .iter()
            .enumerate()
            .map(|(i, x)| as_i64(x, &child(&p, i)))
            .collect::<Result<Vec<_>>>()?;
        matrix.push(entries);
    }
    GroupHom::new(domain, codomain, matrix).map_err(|e| Error::at(rpath, e))
}

pub fn gluing_data_to_json(phi: &Morphism, rho: &GroupHom, vertices: &[usize]) -> Value {
    let factors: Vec<Value> = rho
        .domain_presentation()
        .iter()
        .zip(vertices)
        .map(|(n, &v)| json!({"vertex": phi.source().vertex(v).name, "order": n}))
        .collect();
    json!({"factors": factors, "rho": rho.matrix()})
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn length_label(l: &Length) -> String {
    match l {
        Length::Finite(x) => format_rational(x),
        Length::Infinite => "inf".into(),
    }
}

fn graph_body(g: &MetricGraph, prefix: &str, edge_label: impl Fn(usize) -> String) -> String {
    let mut out = String::new();
    for v in g.vertices() {
        let mut label = v.name.clone();
        if v.genus > 0 {
            label.push_str(&format!(" (g={})", v.genus));
        }
        let shape = if v.infinite { ", shape=point" } else { "" };
        out.push_str(&format!("  {} [label={}{}];\n", dot_id(&format!("{prefix}{}", v.name)), dot_id(&label), shape));
    }
    for (i, e) in g.edges().iter().enumerate() {
        out.push_str(&format!(
            "  {} -- {} [label={}];\n",
            dot_id(&format!("{prefix}{}", g.vertex(e.ends[0]).name)),
            dot_id(&format!("{prefix}{}", g.vertex(e.ends[1]).name)),
            dot_id(&edge_label(i)),
        ));
    }
    out
}

pub fn graph_to_dot(g: &MetricGraph) -> String {
    let body = graph_body(g, "", |e| format!("{} ℓ={}", g.edge(e).name, length_label(&g.edge(e).length)));
    format!("graph G {{\n{body}}}\n")
}

/// Source and target side by side; source edges are labelled `ℓ=p/q, d=k`.
pub fn morphism_to_dot(phi: &Morphism) -> String {
    let (src, tgt) = (phi.source(), phi.target());
    let s = graph_body(src, "s:", |e| {
        format!("ℓ={}, d={}", length_label(&src.edge(e).length), phi.edge_degree(e))
    });
    let t = graph_body(tgt, "t:", |e| format!("ℓ={}", length_label(&tgt.edge(e).length)));
    format!(
        "graph Phi {{\n subgraph cluster_source {{\n  label=\"source\";\n{s} }}\n subgraph cluster_target {{\n  label=\"target\";\n{t} }}\n}}\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, Fixture};

    #[test]
    fn round_trips() {
        for name in fixtures::NAMES {
            match fixtures::by_name(name).unwrap() {
                Fixture::Graph(g) => assert_eq!(parse_graph(&graph_to_json(&g)).unwrap(), g),
                Fixture::Morphism(m) => {
                    let back = parse_bundle(&bundle_to_json(&m)).unwrap();
                    assert_eq!(bundle_to_json(&back), bundle_to_json(&m));
                }
            }
        }
    }

    #[test]
    fn zero_length_is_rejected() {
        let v = json!({"vertices": [{"id": "a"}, {"id": "b"}], "edges": [{"id": "e", "ends": ["a", "b"], "length": "0/1"}]});
        let err = parse_graph(&v).unwrap_err();
        assert!(matches!(err.root(), Error::InvalidModel(_)), "{err}");
    }

    #[test]
    fn malformed_rational_has_path() {
        let v = json!({"vertices": [{"id": "a"}, {"id": "b"}], "edges": [{"id": "e", "ends": ["a", "b"], "length": "3/0"}]});
        let err = parse_graph(&v).unwrap_err();
        assert!(err.to_string().starts_with("/edges/0/length"), "{err}");
        assert!(matches!(err.root(), Error::MalformedRational(_)));
    }

    #[test]
    fn unknown_vertex_in_morphism() {
        let m = fixtures::tate_2_isogeny();
        let mut doc = bundle_to_json(&m);
        doc["morphism"]["vertex_map"]["u0"] = json!("nowhere");
        let err = parse_bundle(&doc).unwrap_err();
        assert_eq!(err.to_string(), "/morphism/vertex_map/u0: unknown id \"nowhere\"");
    }

    #[test]
    fn divisors() {
        let g = fixtures::circle(3);
        let d = parse_divisor(&g, &json!([{"at": {"vertex": "c0"}, "coeff": 2}, {"at": {"edge": "s1", "offset": "1/2"}, "coeff": -1}])).unwrap();
        assert_eq!(d.degree(), 1);
        assert_eq!(parse_divisor(&g, &divisor_to_json(&g, &d)).unwrap(), d);
        assert!(parse_divisor(&g, &json!([{"at": {"edge": "s1", "offset": "2/1"}, "coeff": 1}])).is_err());
    }

    #[test]
    fn gluing_json() {
        let phi = fixtures::tate_2_isogeny();
        let rho = crate::gluing::tate_rho();
        let doc = gluing_data_to_json(&phi, &rho, &[0, 1]);
        assert_eq!(parse_gluing_data(&phi, &doc).unwrap(), rho);
    }

    #[test]
    fn dot_output() {
        let dot = morphism_to_dot(&fixtures::tate_2_isogeny());
        assert!(dot.contains("d=2"));
        assert!(graph_to_dot(&fixtures::circle(2)).starts_with("graph G {"));
    }
}
