//! Loading graphs, morphisms and divisors from files, stdin or the fixture catalog.

use std::io::Read;
use std::path::PathBuf;

use clap::Args;
use serde_json::Value;
use tropilift::fixtures::{self, Fixture};
use tropilift::io::{parse_bundle, parse_divisor, parse_graph, parse_morphism};
use tropilift::{Divisor, Error, MetricGraph, Morphism, Result};

/// Where the main input comes from. With neither flag, a JSON document is read from stdin.
#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Graph or bundle JSON file (`-` for stdin).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["fixture", "graphs"])]
    pub input: Option<PathBuf>,
    /// Built-in instance, e.g. `RIBET` or `BANANA(1,2,2)`.
    #[arg(long, value_name = "NAME", conflicts_with = "graphs")]
    pub fixture: Option<String>,
    /// Source and target graph files; use with `--morphism`.
    #[arg(long, num_args = 2, value_names = ["SOURCE", "TARGET"], requires = "morphism")]
    pub graphs: Option<Vec<PathBuf>>,
    /// Morphism JSON file (maps only), paired with `--graphs`.
    #[arg(long, value_name = "FILE", requires = "graphs")]
    pub morphism: Option<PathBuf>,
}

pub enum Loaded {
    Graph(MetricGraph),
    Morphism(Morphism),
}

pub fn read_json(path: Option<&PathBuf>) -> Result<Value> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", p.display())))?,
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Error::Precondition(format!("cannot read stdin: {e}")))?;
            s
        }
    };
    Ok(serde_json::from_str(&text)?)
}

fn from_document(v: &Value) -> Result<Loaded> {
    if v.get("morphism").is_some() {
        Ok(Loaded::Morphism(parse_bundle(v)?))
    } else {
        Ok(Loaded::Graph(parse_graph(v)?))
    }
}

impl Source {
    pub fn load(&self) -> Result<Loaded> {
        if let Some(name) = &self.fixture {
            return Ok(match fixtures::by_name(name)? {
                Fixture::Graph(g) => Loaded::Graph(g),
                Fixture::Morphism(m) => Loaded::Morphism(m),
            });
        }
        if let (Some(graphs), Some(m)) = (&self.graphs, &self.morphism) {
            let source = parse_graph(&read_json(Some(&graphs[0]))?)?;
            let target = parse_graph(&read_json(Some(&graphs[1]))?)?;
            return Ok(Loaded::Morphism(parse_morphism(source, target, &read_json(Some(m))?)?));
        }
        from_document(&read_json(self.input.as_ref())?)
    }

    pub fn graph(&self) -> Result<MetricGraph> {
        match self.load()? {
            Loaded::Graph(g) => Ok(g),
            Loaded::Morphism(_) => Err(Error::Precondition("expected a graph, got a morphism".into())),
        }
    }

    pub fn morphism(&self) -> Result<Morphism> {
        match self.load()? {
            Loaded::Morphism(m) => Ok(m),
            Loaded::Graph(_) => Err(Error::Precondition("expected a morphism bundle, got a graph".into())),
        }
    }
}

/// A divisor given inline as JSON or as `@FILE`.
pub fn divisor(g: &MetricGraph, arg: &str) -> Result<Divisor> {
    let v = match arg.strip_prefix('@') {
        Some(path) => read_json(Some(&PathBuf::from(path)))?,
        None => serde_json::from_str(arg)?,
    };
    parse_divisor(g, &v).map_err(|e| match e {
        Error::At { path, source } => Error::at(format!("divisor{path}"), *source),
        e => e,
    })
}
