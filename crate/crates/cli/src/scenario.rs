//! Scenario files: flat sectioned `key = value` text.
//!
//! ```text
//! [space]
//! model = tree
//! edge = o,a,1
//! edge = o,b,1
//!
//! [set legA]
//! type = subtree
//! vertices = o,a
//!
//! [run]
//! algorithm = cyclic
//! sets = legA
//! x0 = b
//! ```
//!
//! `#` starts a comment that runs to the end of the line.
//!
//! Point syntax: comma-separated coordinates (Euclidean; ambient coordinates
//! on the hyperboloid), `exp(w1, ..., wd)` for the hyperboloid point reached
//! from the origin along the tangent vector `w`, a vertex name or
//! `A->B:dist` in trees, and `left | right` in products (parenthesize a
//! product factor that is itself a product).

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::path::Path;

use cat0::barycenter::validate_weights;
use cat0::{ConvexSet, MetricTree, Point, Space, SpaceModel, StopRule};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}{}: {message}", key.as_ref().map(|k| format!(", key `{k}`")).unwrap_or_default())]
pub struct ScenarioError {
    pub line: usize,
    pub key: Option<String>,
    pub message: String,
}

fn err(line: usize, key: Option<&str>, message: impl Into<String>) -> ScenarioError {
    ScenarioError { line, key: key.map(String::from), message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Euclidean(usize),
    Hyperboloid(usize),
    Tree,
    Product(Box<Model>, Box<Model>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeSource {
    Inline(Vec<(String, String, f64)>),
    /// Edge list file, path as written in the scenario (relative paths are
    /// taken from the scenario's directory).
    File {
        path: String,
        edges: Vec<(String, String, f64)>,
    },
}

impl TreeSource {
    pub fn edges(&self) -> &[(String, String, f64)] {
        match self {
            TreeSource::Inline(e) | TreeSource::File { edges: e, .. } => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSpec {
    pub model: Model,
    pub tree: Option<TreeSource>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointSpec {
    Coords(Vec<f64>),
    Tangent(Vec<f64>),
    Vertex(String),
    OnEdge { from: String, to: String, dist: f64 },
    Product(Box<PointSpec>, Box<PointSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec {
    Halfspace { normal: Vec<f64>, offset: f64 },
    Hyperplane { normal: Vec<f64>, offset: f64 },
    HyperbolicHalfspace { normal: Vec<f64> },
    Ball { center: PointSpec, radius: f64 },
    Subtree { vertices: Vec<String>, spurs: Vec<(String, String, f64)> },
    Product { left: String, right: String },
    Intersection { members: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetDecl {
    pub name: String,
    /// Sets living in one factor of a product space, for use by `product` sets.
    pub factor: Option<Factor>,
    pub spec: SetSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Cyclic,
    Averaged,
    FixedPoint,
    Certify,
    Barycenter,
}

impl Algorithm {
    fn keyword(self) -> &'static str {
        match self {
            Algorithm::Cyclic => "cyclic",
            Algorithm::Averaged => "averaged",
            Algorithm::FixedPoint => "fixed_point",
            Algorithm::Certify => "certify",
            Algorithm::Barycenter => "barycenter",
        }
    }
}

/// Operator iterated by `fixed_point`, built from the projections onto `sets`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorSpec {
    /// `P_{sets[n−1]} ∘ … ∘ P_{sets[0]}`: the first listed set acts first.
    Composition,
    /// Barycentric combination with the run weights.
    Combination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub sets: Vec<String>,
    pub weights: Option<Vec<f64>>,
    pub x0: Option<PointSpec>,
    pub witness: Option<PointSpec>,
    pub shadow_set: Option<String>,
    pub points: Vec<PointSpec>,
    pub operator: OperatorSpec,
    pub stop: StopRule,
    pub seed: u64,
    pub samples: usize,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub space: SpaceSpec,
    pub sets: Vec<SetDecl>,
    pub run: RunSpec,
}

/// A scenario with its space, sets and points constructed.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub space: Space,
    /// Sets of the full space, by name.
    pub sets: HashMap<String, ConvexSet>,
    /// Sets in `[set]` order that live in the full space.
    pub order: Vec<String>,
    pub x0: Option<Point>,
    pub witness: Option<Point>,
    pub points: Vec<Point>,
}

impl Resolved {
    pub fn run_sets(&self, names: &[String]) -> Vec<ConvexSet> {
        names.iter().map(|n| self.sets[n].clone()).collect()
    }
}

// ---- reading ----

struct Entry {
    line: usize,
    key: String,
    value: String,
}

struct Section {
    line: usize,
    header: String,
    entries: Vec<Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Result<Option<Entry>, ScenarioError> {
        let mut found: Vec<usize> =
            self.entries.iter().enumerate().filter(|(_, e)| e.key == key).map(|(i, _)| i).collect();
        match found.len() {
            0 => Ok(None),
            1 => Ok(Some(self.entries.remove(found[0]))),
            _ => {
                let second = &self.entries[found.swap_remove(1)];
                Err(err(second.line, Some(key), "duplicate key"))
            }
        }
    }

    fn take_all(&mut self, key: &str) -> Vec<Entry> {
        let (hit, rest): (Vec<Entry>, Vec<Entry>) = self.entries.drain(..).partition(|e| e.key == key);
        self.entries = rest;
        hit
    }

    fn require(&mut self, key: &str) -> Result<Entry, ScenarioError> {
        self.take(key)?.ok_or_else(|| err(self.line, Some(key), format!("missing mandatory key in [{}]", self.header)))
    }

    fn finish(self) -> Result<(), ScenarioError> {
        match self.entries.first() {
            Some(e) => Err(err(e.line, Some(&e.key), format!("unknown key in [{}]", self.header))),
            None => Ok(()),
        }
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>, ScenarioError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if s.is_empty() {
            continue;
        }
        if let Some(h) = s.strip_prefix('[') {
            let header =
                h.strip_suffix(']').ok_or_else(|| err(line, None, format!("malformed section header `{s}`")))?;
            sections.push(Section { line, header: header.trim().to_string(), entries: Vec::new() });
            continue;
        }
        let (key, value) =
            s.split_once('=').ok_or_else(|| err(line, None, format!("expected `key = value`, got `{s}`")))?;
        let section = sections.last_mut().ok_or_else(|| err(line, Some(key.trim()), "key outside of any section"))?;
        section.entries.push(Entry { line, key: key.trim().to_string(), value: value.trim().to_string() });
    }
    Ok(sections)
}

fn real(e: &Entry, s: &str) -> Result<f64, ScenarioError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| err(e.line, Some(&e.key), format!("`{}` is not a number", s.trim())))
        .and_then(|x| if x.is_finite() { Ok(x) } else { Err(err(e.line, Some(&e.key), "number must be finite")) })
}

fn reals(e: &Entry) -> Result<Vec<f64>, ScenarioError> {
    e.value.split(',').map(|s| real(e, s)).collect()
}

fn names(e: &Entry) -> Result<Vec<String>, ScenarioError> {
    let v: Vec<String> = e.value.split(',').map(|s| s.trim().to_string()).collect();
    if v.iter().any(|s| s.is_empty()) {
        return Err(err(e.line, Some(&e.key), "empty name in list"));
    }
    Ok(v)
}

fn integer<T: std::str::FromStr>(e: &Entry) -> Result<T, ScenarioError> {
    e.value.parse().map_err(|_| err(e.line, Some(&e.key), format!("`{}` is not a nonnegative integer", e.value)))
}

fn triple(e: &Entry) -> Result<(String, String, f64), ScenarioError> {
    let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b, l] if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string(), real(e, l)?)),
        _ => Err(err(e.line, Some(&e.key), format!("expected `A,B,length`, got `{}`", e.value))),
    }
}

/// Splits at the first occurrence of `sep` outside parentheses.
fn split_top(s: &str, sep: char) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => return Some((&s[..i], &s[i + c.len_utf8()..])),
            _ => {}
        }
    }
    None
}

fn strip_parens(s: &str) -> &str {
    let t = s.trim();
    if t.starts_with('(') && t.ends_with(')') {
        // only if the outer pair matches
        let inner = &t[1..t.len() - 1];
        let mut depth = 0i32;
        for c in inner.chars() {
            depth += match c {
                '(' => 1,
                ')' => -1,
                _ => 0,
            };
            if depth < 0 {
                return t;
            }
        }
        return inner.trim();
    }
    t
}

fn parse_model(e: &Entry, s: &str) -> Result<Model, ScenarioError> {
    let s = s.trim();
    let bad = || err(e.line, Some(&e.key), format!("unknown model `{s}`"));
    if s == "tree" {
        return Ok(Model::Tree);
    }
    let (head, rest) = s.split_once('(').ok_or_else(bad)?;
    let args = rest.strip_suffix(')').ok_or_else(bad)?;
    let dim = || -> Result<usize, ScenarioError> {
        match args.trim().parse::<usize>() {
            Ok(d) if d >= 1 => Ok(d),
            _ => Err(err(e.line, Some(&e.key), format!("dimension must be a positive integer, got `{args}`"))),
        }
    };
    match head.trim() {
        "euclidean" => Ok(Model::Euclidean(dim()?)),
        "hyperboloid" => Ok(Model::Hyperboloid(dim()?)),
        "product" => {
            let (l, r) = split_top(args, ',').ok_or_else(bad)?;
            Ok(Model::Product(Box::new(parse_model(e, l)?), Box::new(parse_model(e, r)?)))
        }
        _ => Err(bad()),
    }
}

fn parse_point(e: &Entry, s: &str) -> Result<PointSpec, ScenarioError> {
    let s = strip_parens(s);
    if let Some((l, r)) = split_top(s, '|') {
        return Ok(PointSpec::Product(Box::new(parse_point(e, l)?), Box::new(parse_point(e, r)?)));
    }
    if let Some(args) = s.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
        return Ok(PointSpec::Tangent(args.split(',').map(|x| real(e, x)).collect::<Result<_, _>>()?));
    }
    if let Some((path, dist)) = s.split_once(':') {
        let (from, to) = path
            .split_once("->")
            .ok_or_else(|| err(e.line, Some(&e.key), format!("expected `A->B:dist`, got `{s}`")))?;
        return Ok(PointSpec::OnEdge { from: from.trim().into(), to: to.trim().into(), dist: real(e, dist)? });
    }
    let first = s.chars().next().unwrap_or(' ');
    if first.is_ascii_digit() || first == '-' || first == '+' || first == '.' {
        return Ok(PointSpec::Coords(s.split(',').map(|x| real(e, x)).collect::<Result<_, _>>()?));
    }
    if s.is_empty() || s.contains([',', ' ']) {
        return Err(err(e.line, Some(&e.key), format!("cannot read point `{s}`")));
    }
    Ok(PointSpec::Vertex(s.to_string()))
}

fn parse_space(mut sec: Section, base: Option<&Path>) -> Result<SpaceSpec, ScenarioError> {
    let m = sec.require("model")?;
    let model = parse_model(&m, &m.value)?;
    let edge_lines = sec.take_all("edge");
    let file = sec.take("edges_file")?;
    let needs_tree = model_has_tree(&model);
    let tree = match (edge_lines.is_empty(), file) {
        (true, None) => None,
        (false, Some(f)) => {
            return Err(err(f.line, Some("edges_file"), "use either edge lines or edges_file, not both"))
        }
        (false, None) => Some(TreeSource::Inline(edge_lines.iter().map(triple).collect::<Result<_, _>>()?)),
        (true, Some(f)) => {
            let path = match base {
                Some(b) => b.join(&f.value),
                None => f.value.clone().into(),
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|x| err(f.line, Some("edges_file"), format!("cannot read {}: {x}", path.display())))?;
            let tree = MetricTree::parse_edge_list(&text)
                .map_err(|x| err(f.line, Some("edges_file"), format!("{}: {x}", path.display())))?;
            let edges = tree
                .edges()
                .iter()
                .map(|e| (tree.vertex_name(e.a).to_string(), tree.vertex_name(e.b).to_string(), e.length))
                .collect();
            Some(TreeSource::File { path: f.value, edges })
        }
    };
    match (&tree, needs_tree) {
        (None, true) => return Err(err(sec.line, Some("edge"), "a tree model needs `edge` lines or `edges_file`")),
        (Some(_), false) => return Err(err(sec.line, Some("edge"), "edges given but the model has no tree")),
        _ => {}
    }
    sec.finish()?;
    Ok(SpaceSpec { model, tree })
}

fn model_has_tree(m: &Model) -> bool {
    match m {
        Model::Tree => true,
        Model::Product(l, r) => model_has_tree(l) || model_has_tree(r),
        _ => false,
    }
}

fn parse_set(mut sec: Section, name: String) -> Result<SetDecl, ScenarioError> {
    let t = sec.require("type")?;
    let factor = match sec.take("factor")? {
        None => None,
        Some(f) => Some(match f.value.as_str() {
            "left" => Factor::Left,
            "right" => Factor::Right,
            _ => return Err(err(f.line, Some("factor"), "factor must be `left` or `right`")),
        }),
    };
    let spec = match t.value.as_str() {
        "halfspace" | "hyperplane" => {
            let normal = reals(&sec.require("normal")?)?;
            let offset = match sec.take("offset")? {
                Some(o) => real(&o, &o.value)?,
                None => 0.0,
            };
            if t.value == "halfspace" {
                SetSpec::Halfspace { normal, offset }
            } else {
                SetSpec::Hyperplane { normal, offset }
            }
        }
        "hyperbolic_halfspace" => SetSpec::HyperbolicHalfspace { normal: reals(&sec.require("normal")?)? },
        "ball" => {
            let c = sec.require("center")?;
            let r = sec.require("radius")?;
            SetSpec::Ball { center: parse_point(&c, &c.value)?, radius: real(&r, &r.value)? }
        }
        "subtree" => {
            let vertices = names(&sec.require("vertices")?)?;
            let spurs = sec.take_all("spur").iter().map(triple).collect::<Result<_, _>>()?;
            SetSpec::Subtree { vertices, spurs }
        }
        "product" => {
            let l = sec.require("left")?;
            let r = sec.require("right")?;
            SetSpec::Product { left: l.value, right: r.value }
        }
        "intersection" => SetSpec::Intersection { members: names(&sec.require("members")?)? },
        other => return Err(err(t.line, Some("type"), format!("unknown set type `{other}`"))),
    };
    sec.finish()?;
    Ok(SetDecl { name, factor, spec })
}

fn parse_run(mut sec: Section) -> Result<(RunSpec, HashMap<&'static str, usize>), ScenarioError> {
    let mut lines = HashMap::new();
    let a = sec.require("algorithm")?;
    let algorithm = match a.value.as_str() {
        "cyclic" => Algorithm::Cyclic,
        "averaged" => Algorithm::Averaged,
        "fixed_point" => Algorithm::FixedPoint,
        "certify" => Algorithm::Certify,
        "barycenter" => Algorithm::Barycenter,
        other => return Err(err(a.line, Some("algorithm"), format!("unknown algorithm `{other}`"))),
    };
    let mut rec = |key: &'static str, e: &Option<Entry>| {
        if let Some(e) = e {
            lines.insert(key, e.line);
        }
    };
    let sets_e = sec.take("sets")?;
    rec("sets", &sets_e);
    let weights_e = sec.take("weights")?;
    rec("weights", &weights_e);
    let x0_e = sec.take("x0")?;
    rec("x0", &x0_e);
    let witness_e = sec.take("witness")?;
    rec("witness", &witness_e);
    let shadow_e = sec.take("shadow_set")?;
    rec("shadow_set", &shadow_e);
    let op_e = sec.take("operator")?;
    let point_es = sec.take_all("point");
    if let Some(p) = point_es.first() {
        lines.insert("point", p.line);
    }

    let sets = sets_e.as_ref().map(names).transpose()?.unwrap_or_default();
    let weights = match &weights_e {
        Some(w) => {
            let v = reals(w)?;
            validate_weights(&v).map_err(|x| err(w.line, Some("weights"), x.to_string()))?;
            Some(v)
        }
        None => None,
    };
    let x0 = x0_e.as_ref().map(|e| parse_point(e, &e.value)).transpose()?;
    let witness = witness_e.as_ref().map(|e| parse_point(e, &e.value)).transpose()?;
    let points = point_es.iter().map(|e| parse_point(e, &e.value)).collect::<Result<Vec<_>, _>>()?;
    let operator = match &op_e {
        None => OperatorSpec::Composition,
        Some(o) => match o.value.as_str() {
            "composition" => OperatorSpec::Composition,
            "combination" => OperatorSpec::Combination,
            other => return Err(err(o.line, Some("operator"), format!("unknown operator `{other}`"))),
        },
    };
    let mut stop = StopRule::default();
    if let Some(e) = sec.take("max_iter")? {
        stop.max_iter = integer(&e)?;
        if stop.max_iter == 0 {
            return Err(err(e.line, Some("max_iter"), "max_iter must be >= 1"));
        }
    }
    if let Some(e) = sec.take("residual_tol")? {
        stop.residual_tol = nonnegative(&e)?;
    }
    if let Some(e) = sec.take("stall_tol")? {
        stop.stall_tol = nonnegative(&e)?;
    }
    let seed = sec.take("seed")?.map(|e| integer(&e)).transpose()?.unwrap_or(0);
    let samples = match sec.take("samples")? {
        Some(e) => match integer::<usize>(&e)? {
            0 => return Err(err(e.line, Some("samples"), "samples must be >= 1")),
            n => n,
        },
        None => 1000,
    };
    let output = sec.take("output")?.map(|e| e.value);

    let missing = |key: &str| err(sec.line, Some(key), format!("missing mandatory key for algorithm {}", a.value));
    match algorithm {
        Algorithm::Cyclic | Algorithm::Averaged | Algorithm::FixedPoint => {
            if sets.is_empty() {
                return Err(missing("sets"));
            }
            if x0.is_none() {
                return Err(missing("x0"));
            }
        }
        Algorithm::Barycenter if points.is_empty() => return Err(missing("point")),
        _ => {}
    }
    if let Some(w) = &weights_e {
        let n = if algorithm == Algorithm::Barycenter { points.len() } else { sets.len() };
        if weights.as_ref().map_or(0, Vec::len) != n {
            return Err(err(w.line, Some("weights"), format!("expected {n} weights")));
        }
    }
    if operator == OperatorSpec::Combination && algorithm != Algorithm::FixedPoint {
        return Err(err(
            op_e.as_ref().map_or(sec.line, |e| e.line),
            Some("operator"),
            "operator only applies to fixed_point",
        ));
    }
    sec.finish()?;
    let run = RunSpec {
        algorithm,
        sets,
        weights,
        x0,
        witness,
        shadow_set: shadow_e.map(|e| e.value),
        points,
        operator,
        stop,
        seed,
        samples,
        output,
    };
    Ok((run, lines))
}

fn nonnegative(e: &Entry) -> Result<f64, ScenarioError> {
    let x = real(e, &e.value)?;
    if x < 0.0 {
        return Err(err(e.line, Some(&e.key), "must be >= 0"));
    }
    Ok(x)
}

/// Where each declaration came from, for error messages after parsing.
#[derive(Default)]
struct Lines {
    space: usize,
    sets: HashMap<String, usize>,
    run: HashMap<&'static str, usize>,
    run_header: usize,
}

/// Parses and validates a scenario. `base` is the directory used for
/// relative `edges_file` paths.
pub fn parse_scenario(text: &str, base: Option<&Path>) -> Result<Scenario, ScenarioError> {
    let mut space = None;
    let mut run = None;
    let mut sets = Vec::new();
    let mut lines = Lines::default();
    let mut seen = HashSet::new();
    for sec in split_sections(text)? {
        let line = sec.line;
        let header = sec.header.clone();
        if header == "space" {
            if space.is_some() {
                return Err(err(line, None, "duplicate [space] section"));
            }
            lines.space = line;
            space = Some(parse_space(sec, base)?);
        } else if header == "run" {
            if run.is_some() {
                return Err(err(line, None, "duplicate [run] section"));
            }
            lines.run_header = line;
            let (r, l) = parse_run(sec)?;
            lines.run = l;
            run = Some(r);
        } else if let Some(name) = header.strip_prefix("set ") {
            let name = name.trim().to_string();
            if name.is_empty() || name.contains([',', ' ']) {
                return Err(err(line, None, format!("invalid set name `{name}`")));
            }
            if !seen.insert(name.clone()) {
                return Err(err(line, None, format!("duplicate set `{name}`")));
            }
            lines.sets.insert(name.clone(), line);
            sets.push(parse_set(sec, name)?);
        } else {
            return Err(err(line, None, format!("unknown section [{header}]")));
        }
    }
    let space = space.ok_or_else(|| err(0, None, "missing [space] section"))?;
    let run = run.ok_or_else(|| err(0, None, "missing [run] section"))?;
    let scenario = Scenario { space, sets, run };
    scenario.resolve_with(&lines)?;
    Ok(scenario)
}

// ---- resolving ----

fn build_space(model: &Model, tree: Option<&MetricTree>) -> Space {
    match model {
        Model::Euclidean(d) => Space::euclidean(*d),
        Model::Hyperboloid(d) => Space::hyperboloid(*d),
        Model::Tree => Space::tree(tree.expect("checked while parsing").clone()),
        Model::Product(l, r) => Space::product(&build_space(l, tree), &build_space(r, tree)),
    }
}

fn build_point(space: &Space, p: &PointSpec) -> Result<Point, String> {
    match p {
        PointSpec::Coords(v) => {
            let pt = if matches!(space.model(), SpaceModel::Hyperboloid { .. }) {
                Point::Hyperboloid(v.clone())
            } else {
                Point::euclidean(v.clone())
            };
            space.check(&pt).map_err(|e| e.to_string())?;
            Ok(pt)
        }
        PointSpec::Tangent(w) => {
            let pt = Point::Hyperboloid(cat0::hyperboloid::from_origin_tangent(w));
            space.check(&pt).map_err(|e| e.to_string())?;
            Ok(pt)
        }
        PointSpec::Vertex(name) => space.vertex(name).map_err(|e| e.to_string()),
        PointSpec::OnEdge { from, to, dist } => {
            let tree = space.as_tree().ok_or("`A->B:dist` points need a tree space")?;
            let id = |n: &str| tree.vertex_id(n).ok_or_else(|| format!("unknown vertex `{n}`"));
            let (f, t) = (id(from)?, id(to)?);
            let edge = tree.edge_between(f, t).ok_or_else(|| format!("no edge {from}-{to}"))?;
            let len = tree.edges()[edge].length;
            if !(0.0..=len).contains(dist) {
                return Err(format!("distance {dist} outside edge {from}-{to} of length {len}"));
            }
            Ok(Point::Tree(tree.point_between(f, t, *dist).expect("edge exists")))
        }
        PointSpec::Product(l, r) => {
            let (ls, rs) = space.factors().ok_or("`left | right` points need a product space")?;
            Ok(Point::product(build_point(&ls, l)?, build_point(&rs, r)?))
        }
    }
}

impl Scenario {
    pub fn build_space(&self) -> Space {
        let tree = self.space.tree.as_ref().map(|t| {
            MetricTree::new(t.edges().iter().map(|(a, b, l)| (a.clone(), b.clone(), *l))).expect("validated tree")
        });
        build_space(&self.space.model, tree.as_ref())
    }

    /// Constructs the space, sets and points.
    pub fn resolve(&self) -> Result<Resolved, ScenarioError> {
        self.resolve_with(&Lines::default())
    }

    fn resolve_with(&self, lines: &Lines) -> Result<Resolved, ScenarioError> {
        let tree = match &self.space.tree {
            Some(t) => Some(
                MetricTree::new(t.edges().iter().map(|(a, b, l)| (a.clone(), b.clone(), *l)))
                    .map_err(|e| err(lines.space, Some("edge"), e.to_string()))?,
            ),
            None => None,
        };
        let space = build_space(&self.space.model, tree.as_ref());
        let factors = space.factors();

        let mut built: HashMap<String, (Option<Factor>, ConvexSet)> = HashMap::new();
        let mut order = Vec::new();
        for decl in &self.sets {
            let line = lines.sets.get(&decl.name).copied().unwrap_or(0);
            let set_err = |key: Option<&str>, m: String| err(line, key, format!("set `{}`: {m}", decl.name));
            let home = match decl.factor {
                None => space.clone(),
                Some(f) => {
                    let (l, r) = factors
                        .clone()
                        .ok_or_else(|| set_err(Some("factor"), "factor given but the space is not a product".into()))?;
                    if f == Factor::Left {
                        l
                    } else {
                        r
                    }
                }
            };
            let lookup = |n: &str, want: Option<Factor>, key: &str| -> Result<ConvexSet, ScenarioError> {
                match built.get(n) {
                    Some((f, s)) if *f == want => Ok(s.clone()),
                    Some(_) => Err(set_err(Some(key), format!("set `{n}` lives in a different space"))),
                    None => Err(set_err(Some(key), format!("unresolved set reference `{n}`"))),
                }
            };
            let name = &decl.name;
            let set = match &decl.spec {
                SetSpec::Halfspace { normal, offset } => ConvexSet::halfspace(&home, name, normal.clone(), *offset),
                SetSpec::Hyperplane { normal, offset } => ConvexSet::hyperplane(&home, name, normal.clone(), *offset),
                SetSpec::HyperbolicHalfspace { normal } => ConvexSet::hyperbolic_halfspace(&home, name, normal.clone()),
                SetSpec::Ball { center, radius } => {
                    let c = build_point(&home, center).map_err(|m| set_err(Some("center"), m))?;
                    ConvexSet::ball(&home, name, c, *radius)
                }
                SetSpec::Subtree { vertices, spurs } => {
                    let v: Vec<&str> = vertices.iter().map(String::as_str).collect();
                    let s: Vec<(&str, &str, f64)> =
                        spurs.iter().map(|(a, b, l)| (a.as_str(), b.as_str(), *l)).collect();
                    ConvexSet::subtree(&home, name, &v, &s)
                }
                SetSpec::Product { left, right } => {
                    let l = lookup(left, Some(Factor::Left), "left")?;
                    let r = lookup(right, Some(Factor::Right), "right")?;
                    ConvexSet::product(&home, name, l, r)
                }
                SetSpec::Intersection { members } => {
                    let m = members.iter().map(|n| lookup(n, decl.factor, "members")).collect::<Result<Vec<_>, _>>()?;
                    ConvexSet::intersection(&home, name, m)
                }
            }
            .map_err(|e| set_err(None, e.to_string()))?;
            if decl.factor.is_none() {
                order.push(name.clone());
            }
            built.insert(name.clone(), (decl.factor, set));
        }
        let sets: HashMap<String, ConvexSet> =
            built.into_iter().filter(|(_, (f, _))| f.is_none()).map(|(n, (_, s))| (n, s)).collect();

        let run = &self.run;
        let rline = |k: &'static str| lines.run.get(k).copied().unwrap_or(lines.run_header);
        for n in &run.sets {
            if !sets.contains_key(n) {
                return Err(err(rline("sets"), Some("sets"), format!("unresolved set reference `{n}`")));
            }
        }
        if let Some(n) = &run.shadow_set {
            if !sets.contains_key(n) {
                return Err(err(rline("shadow_set"), Some("shadow_set"), format!("unresolved set reference `{n}`")));
            }
        }
        let point = |p: &Option<PointSpec>, key: &'static str| {
            p.as_ref().map(|p| build_point(&space, p).map_err(|m| err(rline(key), Some(key), m))).transpose()
        };
        let x0 = point(&run.x0, "x0")?;
        let witness = point(&run.witness, "witness")?;
        let points = run
            .points
            .iter()
            .map(|p| build_point(&space, p).map_err(|m| err(rline("point"), Some("point"), m)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Resolved { space, sets, order, x0, witness, points })
    }
}

// ---- writing ----

fn join_reals(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Euclidean(d) => write!(f, "euclidean({d})"),
            Model::Hyperboloid(d) => write!(f, "hyperboloid({d})"),
            Model::Tree => f.write_str("tree"),
            Model::Product(l, r) => write!(f, "product({l}, {r})"),
        }
    }
}

impl fmt::Display for PointSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointSpec::Coords(v) => f.write_str(&join_reals(v)),
            PointSpec::Tangent(w) => write!(f, "exp({})", join_reals(w)),
            PointSpec::Vertex(n) => f.write_str(n),
            PointSpec::OnEdge { from, to, dist } => write!(f, "{from}->{to}:{dist:?}"),
            PointSpec::Product(l, r) => {
                if matches!(**l, PointSpec::Product(..)) {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " | ")?;
                if matches!(**r, PointSpec::Product(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "[space]\nmodel = {}", self.space.model)?;
        match &self.space.tree {
            Some(TreeSource::Inline(edges)) => {
                for (a, b, l) in edges {
                    writeln!(out, "edge = {a},{b},{l:?}")?;
                }
            }
            Some(TreeSource::File { path, .. }) => writeln!(out, "edges_file = {path}")?,
            None => {}
        }
        for decl in &self.sets {
            writeln!(out, "\n[set {}]", decl.name)?;
            match decl.factor {
                Some(Factor::Left) => writeln!(out, "factor = left")?,
                Some(Factor::Right) => writeln!(out, "factor = right")?,
                None => {}
            }
            match &decl.spec {
                SetSpec::Halfspace { normal, offset } | SetSpec::Hyperplane { normal, offset } => {
                    let t = if matches!(decl.spec, SetSpec::Halfspace { .. }) { "halfspace" } else { "hyperplane" };
                    writeln!(out, "type = {t}\nnormal = {}\noffset = {offset:?}", join_reals(normal))?;
                }
                SetSpec::HyperbolicHalfspace { normal } => {
                    writeln!(out, "type = hyperbolic_halfspace\nnormal = {}", join_reals(normal))?
                }
                SetSpec::Ball { center, radius } => {
                    writeln!(out, "type = ball\ncenter = {center}\nradius = {radius:?}")?
                }
                SetSpec::Subtree { vertices, spurs } => {
                    writeln!(out, "type = subtree\nvertices = {}", vertices.join(","))?;
                    for (a, b, l) in spurs {
                        writeln!(out, "spur = {a},{b},{l:?}")?;
                    }
                }
                SetSpec::Product { left, right } => writeln!(out, "type = product\nleft = {left}\nright = {right}")?,
                SetSpec::Intersection { members } => {
                    writeln!(out, "type = intersection\nmembers = {}", members.join(","))?
                }
            }
        }
        let r = &self.run;
        writeln!(out, "\n[run]\nalgorithm = {}", r.algorithm.keyword())?;
        if !r.sets.is_empty() {
            writeln!(out, "sets = {}", r.sets.join(","))?;
        }
        if let Some(w) = &r.weights {
            writeln!(out, "weights = {}", join_reals(w))?;
        }
        if let Some(p) = &r.x0 {
            writeln!(out, "x0 = {p}")?;
        }
        if let Some(p) = &r.witness {
            writeln!(out, "witness = {p}")?;
        }
        if let Some(s) = &r.shadow_set {
            writeln!(out, "shadow_set = {s}")?;
        }
        for p in &r.points {
            writeln!(out, "point = {p}")?;
        }
        if r.operator == OperatorSpec::Combination {
            writeln!(out, "operator = combination")?;
        }
        writeln!(
            out,
            "max_iter = {}\nresidual_tol = {:?}\nstall_tol = {:?}\nseed = {}\nsamples = {}",
            r.stop.max_iter, r.stop.residual_tol, r.stop.stall_tol, r.seed, r.samples
        )?;
        if let Some(o) = &r.output {
            writeln!(out, "output = {o}")?;
        }
        f.write_str(&out)
    }
}
