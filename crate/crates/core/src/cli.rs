//! Text formats and command dispatch for the `raag-sep` binary.
//!
//! Graph files:
//!
//! ```text
//! # ℤ²
//! vertices a b
//! edge a b
//! ```
//!
//! Complex files name their graph and list vertices by nonnegative id:
//!
//! ```text
//! graph zz.graph
//! vertex 0
//! base 0
//! edge a 0 0
//! ```
//!
//! The canonical form written by [`format_graph`] and [`format_complex`] drops
//! comments and blank lines, lists edges of a graph with endpoints in
//! declaration order, lists vertices by ascending id, and lists complex edges
//! by generator (declaration order) and then source id.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::complex::{CoverComplex, LabeledComplex};
use crate::construct::{construct, verify_theorem_a};
use crate::develop::develop_hull;
use crate::error::{Error, Result};
use crate::raag::{DefiningGraph, NormalForm};
use crate::separate::{member, min_sep_index_oracle, sep_growth, separate, short_transversal, stallings_separate};

pub const SCHEMA: u32 = 1;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Non-blank, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

pub fn parse_graph(text: &str) -> Result<DefiningGraph> {
    let mut names: Option<Vec<String>> = None;
    let mut edges = Vec::new();
    for (line, toks) in content_lines(text) {
        match toks[0] {
            "vertices" => {
                if names.is_some() {
                    return Err(parse_err(line, "second vertices line"));
                }
                if toks.len() < 2 {
                    return Err(parse_err(line, "no vertices declared"));
                }
                names = Some(toks[1..].iter().map(|s| s.to_string()).collect());
            }
            "edge" => {
                let Some(names) = &names else {
                    return Err(parse_err(line, "edge before the vertices line"));
                };
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `edge <u> <v>`"));
                }
                let index = |s: &str| {
                    names
                        .iter()
                        .position(|n| n == s)
                        .ok_or_else(|| parse_err(line, format!("undeclared vertex {s}")))
                };
                let (u, v) = (index(toks[1])?, index(toks[2])?);
                if u == v {
                    return Err(parse_err(line, format!("loop at {}", toks[1])));
                }
                edges.push((line, u.min(v), u.max(v)));
            }
            other => return Err(parse_err(line, format!("unknown keyword {other}"))),
        }
    }
    let names = names.ok_or_else(|| parse_err(0, "missing vertices line"))?;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (line, u, v) in edges {
        if pairs.contains(&(u, v)) {
            return Err(parse_err(line, "duplicate edge"));
        }
        pairs.push((u, v));
    }
    DefiningGraph::from_indices(names, &pairs).map_err(|e| parse_err(0, e.to_string()))
}

pub fn format_graph(g: &DefiningGraph) -> String {
    let mut out = format!("vertices {}\n", g.names().join(" "));
    let mut edges = g.edges().to_vec();
    edges.sort();
    for (u, v) in edges {
        out += &format!("edge {} {}\n", g.name(u), g.name(v));
    }
    out
}

/// The path named on the `graph` line of a complex file.
pub fn complex_graph_path(text: &str) -> Result<String> {
    let mut found = None;
    for (line, toks) in content_lines(text) {
        if toks[0] == "graph" {
            if toks.len() != 2 {
                return Err(parse_err(line, "expected `graph <path>`"));
            }
            if found.is_some() {
                return Err(parse_err(line, "second graph line"));
            }
            found = Some(toks[1].to_string());
        }
    }
    found.ok_or_else(|| parse_err(0, "missing graph line"))
}

pub fn parse_complex(text: &str, graph: Arc<DefiningGraph>) -> Result<LabeledComplex> {
    let mut ids: Vec<(u64, usize)> = Vec::new();
    let mut base: Option<(usize, u64)> = None;
    let mut edges: Vec<(usize, usize, u64, u64)> = Vec::new();
    let id_of = |line: usize, s: &str| {
        s.parse::<u64>()
            .map_err(|_| parse_err(line, format!("bad vertex id {s}")))
    };
    for (line, toks) in content_lines(text) {
        match toks[0] {
            "graph" => {}
            "vertex" => {
                if toks.len() != 2 {
                    return Err(parse_err(line, "expected `vertex <id>`"));
                }
                let id = id_of(line, toks[1])?;
                if ids.iter().any(|&(x, _)| x == id) {
                    return Err(parse_err(line, format!("duplicate vertex {id}")));
                }
                ids.push((id, line));
            }
            "base" => {
                if toks.len() != 2 {
                    return Err(parse_err(line, "expected `base <id>`"));
                }
                if base.is_some() {
                    return Err(parse_err(line, "second base line"));
                }
                base = Some((line, id_of(line, toks[1])?));
            }
            "edge" => {
                if toks.len() != 4 {
                    return Err(parse_err(line, "expected `edge <gen> <src> <dst>`"));
                }
                let v = graph
                    .index_of(toks[1])
                    .ok_or_else(|| parse_err(line, format!("unknown generator {}", toks[1])))?;
                edges.push((line, v, id_of(line, toks[2])?, id_of(line, toks[3])?));
            }
            other => return Err(parse_err(line, format!("unknown keyword {other}"))),
        }
    }
    ids.sort();
    let sorted: Vec<u64> = ids.iter().map(|&(id, _)| id).collect();
    let vertex = |line: usize, id: u64| {
        sorted
            .binary_search(&id)
            .map_err(|_| parse_err(line, format!("dangling vertex {id}")))
    };
    let (bline, bid) = base.ok_or_else(|| parse_err(0, "missing base line"))?;
    let mut c = LabeledComplex::new(graph, sorted.len(), vertex(bline, bid)?);
    c.set_ids(sorted.clone());
    for (line, v, s, d) in edges {
        let (x, y) = (vertex(line, s)?, vertex(line, d)?);
        c.add_edge(v, x, y).map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(c)
}

pub fn format_complex(c: &LabeledComplex, graph_path: &str) -> String {
    let ids = c.ids();
    let mut out = format!("graph {graph_path}\n");
    for id in ids {
        out += &format!("vertex {id}\n");
    }
    out += &format!("base {}\n", ids[c.base()]);
    for v in 0..c.graph().len() {
        for (x, y) in c.sigma(v).iter().enumerate() {
            if let Some(y) = y {
                out += &format!("edge {} {} {}\n", c.graph().name(v), ids[x], ids[*y]);
            }
        }
    }
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// Graph, optional complex, and optional normalized word from the command flags.
///
/// An explicit graph path wins over the complex file's `graph` line, which is
/// otherwise resolved relative to the complex file.
pub fn parse_inputs(
    graph: Option<&Path>,
    complex: Option<&Path>,
    word: Option<&str>,
) -> Result<(Arc<DefiningGraph>, Option<LabeledComplex>, Option<NormalForm>)> {
    let ctext = complex.map(read).transpose()?;
    let gpath: PathBuf = match (graph, complex, &ctext) {
        (Some(g), _, _) => g.to_path_buf(),
        (None, Some(c), Some(text)) => {
            let named = PathBuf::from(complex_graph_path(text)?);
            c.parent().map(|d| d.join(&named)).unwrap_or(named)
        }
        _ => return Err(Error::Input("no graph given".into())),
    };
    let g = Arc::new(parse_graph(&read(&gpath)?)?);
    let z = ctext.map(|t| parse_complex(&t, g.clone())).transpose()?;
    let w = word
        .map(|w| g.parse_word(w).and_then(|l| g.normal_form(&l)))
        .transpose()?;
    Ok((g, z, w))
}

#[derive(Parser, Debug)]
#[command(name = "raag-sep", version, about = "Separation certificates for subgroups of right-angled Artin groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Inputs {
    /// Graph file
    #[arg(short = 'g', long)]
    pub graph: Option<PathBuf>,
    /// Complex file
    #[arg(short = 'z', long)]
    pub complex: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Shortlex normal form of a word
    Normalize {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short = 'w', long)]
        word: String,
    },
    /// Decide whether g lies in π₁Z
    Member {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short = 'w', long)]
        word: String,
    },
    /// Finite cover whose base stabilizer contains π₁Z and misses g
    Separate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short = 'w', long)]
        word: String,
        /// Use the free-group path (edgeless graphs only)
        #[arg(long)]
        stallings: bool,
    },
    /// Build the compact local isometry Y ⊇ Z in which g does not close
    TheoremA {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short = 'w', long)]
        word: String,
        /// Write Y as a complex file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonical completion of Z to a finite cover
    Complete {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convex hull of a set of group elements
    Hull {
        #[command(flatten)]
        inputs: Inputs,
        /// A point, as a word; repeat for more
        #[arg(short = 'p', long = "point", required = true)]
        points: Vec<String>,
    },
    /// Minimal index of a subgroup containing the generators and not g
    Oracle {
        #[command(flatten)]
        inputs: Inputs,
        /// A subgroup generator, as a word; repeat for more
        #[arg(long = "gens")]
        gens: Vec<String>,
        #[arg(short = 'w', long)]
        word: String,
        #[arg(long = "max", default_value_t = 8)]
        m_max: usize,
    },
    /// Separability growth of π₁Z at a radius
    SepGrowth {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long = "max", default_value_t = 8)]
        m_max: usize,
    },
    /// Check that Z is a local isometry
    Check {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Short transversal of a cover's base stabilizer
    Transversal {
        #[command(flatten)]
        inputs: Inputs,
    },
}

fn words(g: &DefiningGraph, ws: &[NormalForm]) -> Vec<String> {
    ws.iter().map(|w| g.format_word(w.letters())).collect()
}

fn letters_json(g: &DefiningGraph, w: &NormalForm) -> Vec<String> {
    w.letters().iter().map(|&l| g.format_letter(l)).collect()
}

pub fn cover_json(c: &CoverComplex) -> Value {
    let z = c.complex();
    let g = z.graph();
    let ids = z.ids();
    let perms: Vec<Vec<u64>> = (0..g.len())
        .map(|v| c.permutation(v).into_iter().map(|y| ids[y]).collect())
        .collect();
    json!({
        "vertices": ids,
        "base": ids[z.base()],
        "generators": g.names(),
        "permutations": perms,
    })
}

pub fn complex_json(z: &LabeledComplex) -> Value {
    let g = z.graph();
    let ids = z.ids();
    let mut edges = Vec::new();
    for v in 0..g.len() {
        for (x, y) in z.sigma(v).iter().enumerate() {
            if let Some(y) = y {
                edges.push(json!([g.name(v), ids[x], ids[*y]]));
            }
        }
    }
    json!({
        "vertices": ids,
        "base": ids[z.base()],
        "generators": g.names(),
        "edges": edges,
    })
}

fn need<T>(x: Option<T>, what: &str) -> Result<T> {
    x.ok_or_else(|| Error::Input(format!("missing {what}")))
}

fn local_isometry(z: &LabeledComplex) -> Result<()> {
    if z.is_local_isometry() {
        Ok(())
    } else {
        Err(Error::Precondition("input not a local isometry".into()))
    }
}

fn graph_line(inputs: &Inputs) -> Result<String> {
    match &inputs.graph {
        Some(p) => Ok(p.display().to_string()),
        None => complex_graph_path(&read(need(inputs.complex.as_deref(), "complex file")?)?),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// Runs one command; the result carries `"schema": 1`.
pub fn run(cmd: &Command) -> Result<Value> {
    let mut out = dispatch(cmd)?;
    out["schema"] = json!(SCHEMA);
    Ok(out)
}

fn dispatch(cmd: &Command) -> Result<Value> {
    match cmd {
        Command::Normalize { inputs, word } => {
            let (g, _, w) = parse_inputs(inputs.graph.as_deref(), inputs.complex.as_deref(), Some(word))?;
            let w = w.unwrap();
            Ok(json!({"normal_form": letters_json(&g, &w), "length": w.len()}))
        }
        Command::Member { inputs, word } => {
            let (_, z, w) = parse_inputs(inputs.graph.as_deref(), inputs.complex.as_deref(), Some(word))?;
            let z = need(z, "complex file")?;
            local_isometry(&z)?;
            Ok(json!({"member": member(&z, &w.unwrap())}))
        }
        Command::Separate { inputs, word, stallings } => {
            let (g, z, w) = parse_inputs(inputs.graph.as_deref(), inputs.complex.as_deref(), Some(word))?;
            let (z, w) = (need(z, "complex file")?, w.unwrap());
            local_isometry(&z)?;
            if member(&z, &w) {
                return Err(Error::Precondition("g lies in π₁Z".into()));
            }
            let (cert, bound) = if *stallings {
                (stallings_separate(g.len(), &z, &w)?, z.vertex_count() + w.len())
            } else {
                (separate(&z, &w)?, z.vertex_count() * (w.len() + 1))
            };
            // re-check from scratch rather than trusting the construction
            cert.verify()?;
            Ok(json!({
                "index": cert.index,
                "bound": bound,
                "verified": true,
                "g": g.format_word(cert.g.letters()),
                "subgroup_gens": words(&g, &cert.subgroup_gens),
                "cover": cover_json(&cert.cover),
            }))
        }
        Command::TheoremA { inputs, word, out } => {
            let (_, z, w) = parse_inputs(inputs.graph.as_deref(), inputs.complex.as_deref(), Some(word))?;
            let (z, w) = (need(z, "complex file")?, w.unwrap());
            let c = construct(&z, &w)?;
            let report = verify_theorem_a(&z, &w, &c.y);
            if !report.passes() {
                return Err(Error::Verification(report.failures().join("; ")));
            }
            if let Some(p) = out {
                write(p, &format_complex(&c.y, &graph_line(inputs)?))?;
            }
            let part = &c.partition;
            Ok(json!({
                "vertices": c.y.vertex_count(),
                "bound": report.bound,
                "verified": true,
                "report": report,
                "classes": {
                    "z": part.z_class.len(),
                    "n": part.n_class.len(),
                    "t": part.t_class.len(),
                    "h": part.h_class.len(),
                    "b": part.b_class.len(),
                },
                "chain": part.chain.links.iter().map(|l| l.length()).collect::<Vec<_>>(),
                "saturation": c.saturation,
                "complex": complex_json(&c.y),
            }))
        }
        Command::Complete { inputs, out } => {
            let (_, z, _) = parse_inputs(inputs.graph.as_deref(), inputs.complex.as_deref(), None)?;
            let z = need(z, "complex file")?;
            local_isometry(&z)?;
            let cover = z.canonical_completion()?;
            let contains_z = z.embeds_via(cover.complex(), &(0..z.vertex_count()).collect::<Vec<_>>());
            if !contains_z {
                return Err(Error::Verification("completion does not contain Z".into()));
            }
            if let Some(p) = out {
                write(p, &format_complex(cover.complex(), &graph_line(inputs)?))?;
            }
            Ok(json!({"degree": cover.degree(), "contains_z": true, "cover": cover_json(&cover)}))
        }
        Command::Hull { inputs, points } => {
            let (g, _, _) = parse_inputs(inputs.graph.as_deref(), inputs.complex.as_deref(), None)?;
            let pts = points
                .iter()
                .map(|p| g.parse_word(p).and_then(|l| g.normal_form(&l)))
                .collect::<Result<Vec<_>>>()?;
            let d = develop_hull(&g, &pts);
            Ok(json!({
                "size": d.len(),
                "edges": d.edge_count(),
                "hyperplanes": d.crossed_keys().len(),
                "interval_closed": d.is_interval_closed(),
                "vertices": words(&g, d.vertices()),
            }))
        }
        Command::Oracle { inputs, gens, word, m_max } => {
            let (g, _, w) = parse_inputs(inputs.graph.as_deref(), inputs.complex.as_deref(), Some(word))?;
            let gens = gens
                .iter()
                .map(|h| g.parse_word(h).and_then(|l| g.normal_form(&l)))
                .collect::<Result<Vec<_>>>()?;
            let m = min_sep_index_oracle(&g, &gens, &w.unwrap(), *m_max)?;
            Ok(json!({"min_index": m, "m_max": m_max}))
        }
        Command::SepGrowth { inputs, n, m_max } => {
            let (_, z, _) = parse_inputs(inputs.graph.as_deref(), inputs.complex.as_deref(), None)?;
            let z = need(z, "complex file")?;
            local_isometry(&z)?;
            Ok(serde_json::to_value(sep_growth(&z, *n, *m_max)?).expect("report serializes"))
        }
        Command::Check { inputs } => {
            let (g, z, _) = parse_inputs(inputs.graph.as_deref(), inputs.complex.as_deref(), None)?;
            let z = need(z, "complex file")?;
            let report = z.check_local_isometry()?;
            let violations: Vec<Value> = report
                .violations
                .iter()
                .map(|v| json!({"vertex": z.ids()[v.vertex], "a": g.format_letter(v.a), "b": g.format_letter(v.b)}))
                .collect();
            if !violations.is_empty() {
                return Err(Error::Verification(format!(
                    "{} missing squares, first at vertex {} between {} and {}",
                    violations.len(),
                    violations[0]["vertex"],
                    violations[0]["a"],
                    violations[0]["b"]
                )));
            }
            Ok(json!({
                "local_isometry": true,
                "vertices": z.vertex_count(),
                "edges": z.edge_count(),
                "connected": z.is_connected(),
                "pi1_generators": words(&g, &z.pi1_generators()),
            }))
        }
        Command::Transversal { inputs } => {
            let (g, z, _) = parse_inputs(inputs.graph.as_deref(), inputs.complex.as_deref(), None)?;
            let z = need(z, "complex file")?;
            let base = z.base();
            let cover = CoverComplex::new(z).map_err(|e| Error::Input(format!("not a cover: {e}")))?;
            let t = short_transversal(&cover, base)?;
            Ok(json!({
                "degree": cover.degree(),
                "max_length": t.iter().map(NormalForm::len).max().unwrap_or(0),
                "transversal": words(&g, &t),
            }))
        }
    }
}

/// The JSON printed for a failed command.
pub fn error_json(e: &Error) -> Value {
    let kind = match e {
        Error::Input(_) | Error::Parse { .. } => "input",
        Error::Precondition(_) => "precondition",
        Error::Invariant(_) => "invariant",
        Error::Verification(_) => "verification",
        Error::ConstructionIncomplete(_) => "construction_incomplete",
        Error::Budget { .. } => "budget",
    };
    let mut out = json!({"schema": SCHEMA, "error": kind, "message": e.to_string()});
    if let Error::Budget { partial, .. } = e {
        out["ruled_out_below"] = json!(partial.map(|m| m + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = parse_graph("# torus\nvertices a b\n\nedge b a\n").unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.adjacent(0, 1));
        assert_eq!(format_graph(&g), "vertices a b\nedge a b\n");
        assert_eq!(parse_graph(&format_graph(&g)).unwrap(), g);
    }

    #[test]
    fn graph_errors_name_the_line() {
        let e = parse_graph("vertices a b\nedge a c\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        assert!(matches!(parse_graph("edge a b\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_graph("vertices a\nedge a a\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_graph("vertices a b\nedge a b\nedge b a\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_graph("# nothing\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn word_normalized_on_load() {
        let g = parse_graph("vertices a b\nedge a b\n").unwrap();
        let w = g.normal_form(&g.parse_word("b a").unwrap()).unwrap();
        assert_eq!(g.format_word(w.letters()), "a b");
        assert!(g.parse_word("c").is_err());
    }

    #[test]
    fn complex_round_trip() {
        let g = Arc::new(parse_graph("vertices v\n").unwrap());
        let text = "graph z.graph\nvertex 7\nvertex 3\nvertex 5\nbase 3\nedge v 7 3\nedge v 3 5\nedge v 5 7\n";
        let c = parse_complex(text, g.clone()).unwrap();
        assert_eq!(c.ids(), &[3, 5, 7]);
        assert_eq!(c.base(), 0);
        let canon = format_complex(&c, "z.graph");
        assert_eq!(canon, "graph z.graph\nvertex 3\nvertex 5\nvertex 7\nbase 3\nedge v 3 5\nedge v 5 7\nedge v 7 3\n");
        assert_eq!(parse_complex(&canon, g).unwrap(), c);
        assert_eq!(complex_graph_path(text).unwrap(), "z.graph");
    }

    #[test]
    fn complex_errors_name_the_line() {
        let g = Arc::new(parse_graph("vertices v w\n").unwrap());
        let bad = |t: &str| parse_complex(t, g.clone()).unwrap_err();
        assert!(matches!(bad("graph x\nvertex 0\nbase 0\nedge v 0 1\n"), Error::Parse { line: 4, .. }));
        assert!(matches!(bad("graph x\nvertex 0\nbase 0\nedge u 0 0\n"), Error::Parse { line: 4, .. }));
        assert!(matches!(bad("graph x\nvertex 0\nvertex 0\nbase 0\n"), Error::Parse { line: 3, .. }));
        assert!(matches!(bad("graph x\nvertex -1\n"), Error::Parse { line: 2, .. }));
        assert!(matches!(bad("graph x\nvertex 0\nbase 2\n"), Error::Parse { line: 3, .. }));
        assert!(matches!(bad("graph x\nvertex 0\n"), Error::Parse { .. }));
        assert!(matches!(
            bad("graph x\nvertex 0\nvertex 1\nbase 0\nedge v 0 1\nedge v 0 0\n"),
            Error::Parse { line: 6, .. }
        ));
    }

    #[test]
    fn error_json_reports_partial_progress() {
        let e = Error::Budget { msg: "out".into(), partial: Some(4) };
        let v = error_json(&e);
        assert_eq!(v["error"], "budget");
        assert_eq!(v["ruled_out_below"], 5);
        assert_eq!(e.exit_code(), 4);
    }
}
