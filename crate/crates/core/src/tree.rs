//! Finite metric trees: acyclic connected graphs with positive edge lengths,
//! viewed as geodesic metric spaces (0-hyperbolic, hence CAT(0)).

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// A location on a tree: an edge and the distance from that edge's `a` vertex.
///
/// Vertices have a designated representative (the smallest incident edge id,
/// offset measured from its `a` vertex), see [`MetricTree::canonical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreePoint {
    pub edge: usize,
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub struct MetricTree {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    // row-major all-pairs vertex distances
    vdist: Vec<f64>,
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
}

impl MetricTree {
    pub fn new<I, S>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, f64)>,
        S: Into<String>,
    {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |name: String| -> usize {
            if let Some(&i) = index.get(&name) {
                return i;
            }
            names.push(name.clone());
            index.insert(name, names.len() - 1);
            names.len() - 1
        };
        let mut list = Vec::new();
        for (a, b, length) in edges {
            let (a, b) = (a.into(), b.into());
            if !(length.is_finite() && length > 0.0) {
                return Err(Error::InvalidTree(format!("edge {a}-{b} has non-positive or non-finite length {length}")));
            }
            if a == b {
                return Err(Error::InvalidTree(format!("self loop at vertex {a}")));
            }
            let (ia, ib) = (intern(a), intern(b));
            list.push(Edge { a: ia, b: ib, length });
        }
        Self::from_parts(names, index, list)
    }

    /// Parses a whitespace separated edge list, one `vertexA vertexB length`
    /// per line. Blank lines and lines starting with `#` are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            if fields.len() != 3 {
                return Err(parse_err(format!("expected `vertexA vertexB length`, found {} fields", fields.len())));
            }
            let length: f64 =
                fields[2].parse().map_err(|_| parse_err(format!("invalid edge length `{}`", fields[2])))?;
            if !(length.is_finite() && length > 0.0) {
                return Err(parse_err(format!("edge length must be positive, got {length}")));
            }
            if fields[0] == fields[1] {
                return Err(parse_err(format!("self loop at vertex `{}`", fields[0])));
            }
            edges.push((fields[0].to_string(), fields[1].to_string(), length));
        }
        Self::new(edges)
    }

    fn from_parts(names: Vec<String>, index: HashMap<String, usize>, edges: Vec<Edge>) -> Result<Self> {
        let n = names.len();
        if edges.is_empty() {
            return Err(Error::InvalidTree("a tree needs at least one edge".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges on {} vertices: a tree has exactly one fewer edge than vertices",
                edges.len(),
                n
            )));
        }
        let mut incident = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            incident[e.a].push(id);
            incident[e.b].push(id);
        }

        // BFS from vertex 0 gives parent pointers; connectivity + edge count => acyclic
        let mut parent = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &id in &incident[v] {
                let e = edges[id];
                let w = if e.a == v { e.b } else { e.a };
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, id));
                    depth[w] = depth[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidTree(format!("vertex `{}` is not connected to `{}`", names[v], names[0])));
        }

        let mut vdist = vec![0.0; n * n];
        for s in 0..n {
            let row = &mut vdist[s * n..(s + 1) * n];
            let mut done = vec![false; n];
            done[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &id in &incident[v] {
                    let e = edges[id];
                    let w = if e.a == v { e.b } else { e.a };
                    if !done[w] {
                        done[w] = true;
                        row[w] = row[v] + e.length;
                        queue.push_back(w);
                    }
                }
            }
        }

        Ok(Self { names, index, edges, incident, vdist, parent, depth })
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Edge joining two vertices, if they are adjacent.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.incident[u].iter().copied().find(|&id| {
            let e = self.edges[id];
            (e.a == u && e.b == v) || (e.a == v && e.b == u)
        })
    }

    pub fn vertex_distance(&self, u: usize, v: usize) -> f64 {
        self.vdist[u * self.names.len() + v]
    }

    /// The designated representative of vertex `v`.
    pub fn vertex_point(&self, v: usize) -> TreePoint {
        let id = self.incident[v][0];
        let e = self.edges[id];
        TreePoint { edge: id, offset: if e.a == v { 0.0 } else { e.length } }
    }

    pub fn named_vertex(&self, name: &str) -> Option<TreePoint> {
        self.vertex_id(name).map(|v| self.vertex_point(v))
    }

    /// Point on the edge joining `from` and `to`, at distance `dist` from `from`.
    pub fn point_between(&self, from: usize, to: usize, dist: f64) -> Option<TreePoint> {
        let id = self.edge_between(from, to)?;
        let e = self.edges[id];
        let offset = if e.a == from { dist } else { e.length - dist };
        Some(self.canonical(TreePoint { edge: id, offset }))
    }

    /// Rewrites endpoint offsets to the vertex representative.
    pub fn canonical(&self, p: TreePoint) -> TreePoint {
        match self.vertex_at(p) {
            Some(v) => self.vertex_point(v),
            None => p,
        }
    }

    /// The vertex at `p`, if `p` sits exactly on an endpoint of its edge.
    pub fn vertex_at(&self, p: TreePoint) -> Option<usize> {
        let e = self.edges[p.edge];
        if p.offset <= 0.0 {
            Some(e.a)
        } else if p.offset >= e.length {
            Some(e.b)
        } else {
            None
        }
    }

    pub fn validate(&self, p: &TreePoint) -> Result<()> {
        let Some(e) = self.edges.get(p.edge) else {
            return Err(Error::InvalidPoint(format!("edge id {} out of range ({} edges)", p.edge, self.edges.len())));
        };
        if !(p.offset.is_finite() && p.offset >= 0.0 && p.offset <= e.length) {
            return Err(Error::InvalidPoint(format!(
                "offset {} outside [0, {}] on edge {}",
                p.offset, e.length, p.edge
            )));
        }
        Ok(())
    }

    /// Distance from `p` to vertex `v`.
    pub fn distance_to_vertex(&self, p: TreePoint, v: usize) -> f64 {
        let e = self.edges[p.edge];
        let via_a = p.offset + self.vertex_distance(e.a, v);
        let via_b = (e.length - p.offset) + self.vertex_distance(e.b, v);
        via_a.min(via_b)
    }

    pub fn distance(&self, p: TreePoint, q: TreePoint) -> f64 {
        if p.edge == q.edge {
            return (p.offset - q.offset).abs();
        }
        self.exit_route(p, q).0
    }

    /// Shortest route between points on different edges: total length, the
    /// vertex where the route leaves `p`'s edge and the vertex where it
    /// enters `q`'s edge.
    fn exit_route(&self, p: TreePoint, q: TreePoint) -> (f64, usize, usize) {
        let (ep, eq) = (self.edges[p.edge], self.edges[q.edge]);
        let legs_p = [(ep.a, p.offset), (ep.b, ep.length - p.offset)];
        let legs_q = [(eq.a, q.offset), (eq.b, eq.length - q.offset)];
        let mut best = (f64::INFINITY, ep.a, eq.a);
        for &(u, lu) in &legs_p {
            for &(v, lv) in &legs_q {
                let total = lu + self.vertex_distance(u, v) + lv;
                if total < best.0 {
                    best = (total, u, v);
                }
            }
        }
        best
    }

    /// Edges along the unique vertex path from `u` to `v`, as
    /// `(edge id, entered-from vertex)` pairs in travel order.
    pub fn vertex_path(&self, u: usize, v: usize) -> Vec<(usize, usize)> {
        let (mut x, mut y) = (u, v);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while self.depth[x] > self.depth[y] {
            let (px, id) = self.parent[x].expect("non-root vertex has a parent");
            up.push((id, x));
            x = px;
        }
        while self.depth[y] > self.depth[x] {
            let (py, id) = self.parent[y].expect("non-root vertex has a parent");
            down.push((id, py));
            y = py;
        }
        while x != y {
            let (px, ix) = self.parent[x].expect("non-root vertex has a parent");
            let (py, iy) = self.parent[y].expect("non-root vertex has a parent");
            up.push((ix, x));
            down.push((iy, py));
            x = px;
            y = py;
        }
        up.extend(down.into_iter().rev());
        up
    }

    /// Point at arc length `s` from `from` toward `to` on edge `id`.
    fn along_edge(&self, id: usize, from: usize, s: f64) -> TreePoint {
        let e = self.edges[id];
        let offset = if e.a == from { s } else { e.length - s };
        self.canonical(TreePoint { edge: id, offset: offset.clamp(0.0, e.length) })
    }

    /// Point at parameter `t` on the geodesic from `p` to `q`.
    pub fn geodesic(&self, p: TreePoint, q: TreePoint, t: f64) -> TreePoint {
        if t <= 0.0 {
            return self.canonical(p);
        }
        if t >= 1.0 {
            return self.canonical(q);
        }
        if p.edge == q.edge {
            let offset = p.offset + t * (q.offset - p.offset);
            return self.canonical(TreePoint { edge: p.edge, offset });
        }
        let (total, u, v) = self.exit_route(p, q);
        let mut remaining = t * total;

        let ep = self.edges[p.edge];
        let first = if u == ep.a { p.offset } else { ep.length - p.offset };
        if remaining <= first {
            let offset = if u == ep.a { p.offset - remaining } else { p.offset + remaining };
            return self.canonical(TreePoint { edge: p.edge, offset });
        }
        remaining -= first;

        for (id, from) in self.vertex_path(u, v) {
            let len = self.edges[id].length;
            if remaining <= len {
                return self.along_edge(id, from, remaining);
            }
            remaining -= len;
        }

        let eq = self.edges[q.edge];
        let last = if v == eq.a { q.offset } else { eq.length - q.offset };
        let s = remaining.min(last);
        let offset = if v == eq.a { s } else { eq.length - s };
        self.canonical(TreePoint { edge: q.edge, offset })
    }

    /// A star with `legs` leaves `l0, l1, ...` attached to centre `o`.
    pub fn star(legs: usize, length: f64) -> Result<Self> {
        Self::new((0..legs).map(|i| ("o".to_string(), format!("l{i}"), length)))
    }

    /// The tripod: centre `o` and unit legs to `a`, `b`, `c`.
    pub fn tripod() -> Self {
        Self::new([("o", "a", 1.0), ("o", "b", 1.0), ("o", "c", 1.0)]).expect("tripod is a tree")
    }

    /// A five-edge caterpillar: spine `s0-s1-s2`, one leaf hanging off
    /// each spine vertex.
    pub fn caterpillar() -> Self {
        Self::new([("s0", "s1", 1.0), ("s1", "s2", 1.5), ("s0", "f0", 0.75), ("s1", "f1", 1.25), ("s2", "f2", 0.5)])
            .expect("caterpillar is a tree")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tripod_distances() {
        let t = MetricTree::tripod();
        let a = t.named_vertex("a").unwrap();
        let b = t.named_vertex("b").unwrap();
        assert_eq!(t.distance(a, b), 2.0);
        let mid = t.geodesic(a, b, 0.5);
        assert_eq!(mid, t.named_vertex("o").unwrap());
    }

    #[test]
    fn vertex_representative_uses_smallest_incident_edge() {
        let t = MetricTree::tripod();
        let o = t.vertex_id("o").unwrap();
        assert_eq!(t.vertex_point(o), TreePoint { edge: 0, offset: 0.0 });
        // `o` written as the far end of edge 2 canonicalizes to edge 0
        let e2 = t.edges()[2];
        let alt = TreePoint { edge: 2, offset: if e2.a == o { 0.0 } else { e2.length } };
        assert_eq!(t.canonical(alt), t.vertex_point(o));
    }

    #[test]
    fn rejects_cycles_and_disconnected_graphs() {
        let cyc = MetricTree::new([("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]);
        assert!(matches!(cyc, Err(Error::InvalidTree(_))));
        let split = MetricTree::new([("a", "b", 1.0), ("c", "d", 1.0), ("a", "b", 2.0)]);
        assert!(matches!(split, Err(Error::InvalidTree(_))));
        assert!(MetricTree::new([("a", "b", 0.0)]).is_err());
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let text = "# tripod\no a 1\n\no b one\n";
        match MetricTree::parse_edge_list(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        match MetricTree::parse_edge_list("o a 1 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        let t = MetricTree::parse_edge_list("o a 1\no b 1\n  o c 1  \n").unwrap();
        assert_eq!(t.vertex_count(), 4);
    }

    #[test]
    fn geodesic_crosses_the_spine() {
        let t = MetricTree::caterpillar();
        let v = |n: &str| t.vertex_id(n).unwrap();
        let p = t.point_between(v("f0"), v("s0"), 0.25).unwrap();
        let q = t.point_between(v("s2"), v("f2"), 0.25).unwrap();
        let d = t.distance(p, q);
        assert!((d - (0.5 + 1.0 + 1.5 + 0.25)).abs() < 1e-15);
        for &s in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let r = t.geodesic(p, q, s);
            assert!((t.distance(p, r) - s * d).abs() < 1e-12);
            assert!((t.distance(r, q) - (1.0 - s) * d).abs() < 1e-12);
        }
    }
}
