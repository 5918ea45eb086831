//! Closed geodesically convex sets with closed-form metric projections.

use crate::error::{Error, Result};
use crate::hyperboloid;
use crate::space::{Point, Space, SpaceModel};
use crate::tree::{MetricTree, TreePoint};

/// Residual target of the inner cyclic solve used for [`SetKind::Intersection`].
pub const INTERSECTION_RESIDUAL: f64 = 1e-10;
const INTERSECTION_MAX_CYCLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet {
    pub name: String,
    kind: SetKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    /// `{x : <a, x> ≤ b}`.
    EuclideanHalfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// `{x : <a, x> = b}`.
    EuclideanHyperplane {
        normal: Vec<f64>,
        offset: f64,
    },
    /// `{x : m(u, x) ≤ 0}` with `m(u, u) = 1`.
    HyperbolicHalfspace {
        normal: Vec<f64>,
    },
    GeodesicBall {
        center: Point,
        radius: f64,
    },
    Subtree(Subtree),
    ProductSet(Box<ConvexSet>, Box<ConvexSet>),
    /// Intersection of member sets; projected approximately by an inner
    /// cyclic-projection solve.
    Intersection(Vec<ConvexSet>),
}

/// A connected union of whole edges (between member vertices) and partial
/// edges ("spurs") hanging off member vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Subtree {
    members: Vec<bool>,
    spurs: Vec<Spur>,
    // vertices of the subtree and spur tips; the projection of an outside
    // point is always one of them
    gates: Vec<TreePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spur {
    pub edge: usize,
    pub base: usize,
    pub length: f64,
}

impl Subtree {
    /// `vertices` must induce a connected subgraph; each spur is
    /// `(member vertex, neighbour outside the subtree, length < edge length)`.
    pub fn new(tree: &MetricTree, vertices: &[&str], spurs: &[(&str, &str, f64)]) -> Result<Self> {
        let vid =
            |name: &str| tree.vertex_id(name).ok_or_else(|| Error::InvalidSet(format!("unknown vertex `{name}`")));
        if vertices.is_empty() {
            return Err(Error::InvalidSet("subtree needs at least one vertex".into()));
        }
        let mut members = vec![false; tree.vertex_count()];
        for v in vertices {
            members[vid(v)?] = true;
        }

        // connectivity of the induced subgraph
        let start = members.iter().position(|m| *m).expect("nonempty");
        let mut seen = vec![false; members.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &id in tree.incident_edges(v) {
                let e = tree.edges()[id];
                let w = if e.a == v { e.b } else { e.a };
                if members[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if members.iter().zip(&seen).any(|(m, s)| *m && !s) {
            return Err(Error::InvalidSet("subtree vertices are not connected".into()));
        }

        let mut spur_list = Vec::new();
        for &(base, toward, length) in spurs {
            let (b, t) = (vid(base)?, vid(toward)?);
            if !members[b] || members[t] {
                return Err(Error::InvalidSet(format!(
                    "spur {base}->{toward} must leave the subtree from a member vertex"
                )));
            }
            let edge = tree
                .edge_between(b, t)
                .ok_or_else(|| Error::InvalidSet(format!("no edge between `{base}` and `{toward}`")))?;
            let full = tree.edges()[edge].length;
            if !(length > 0.0 && length < full) {
                return Err(Error::InvalidSet(format!(
                    "spur length {length} must lie in (0, {full}); include the vertex for a full edge"
                )));
            }
            if spur_list.iter().any(|s: &Spur| s.edge == edge) {
                return Err(Error::InvalidSet(format!("duplicate spur on edge {base}-{toward}")));
            }
            spur_list.push(Spur { edge, base: b, length });
        }

        let mut gates: Vec<TreePoint> =
            members.iter().enumerate().filter(|(_, m)| **m).map(|(v, _)| tree.vertex_point(v)).collect();
        for s in &spur_list {
            let e = tree.edges()[s.edge];
            let offset = if e.a == s.base { s.length } else { e.length - s.length };
            gates.push(TreePoint { edge: s.edge, offset });
        }
        Ok(Self { members, spurs: spur_list, gates })
    }

    fn contains(&self, tree: &MetricTree, p: TreePoint) -> bool {
        if let Some(v) = tree.vertex_at(p) {
            return self.members[v];
        }
        let e = tree.edges()[p.edge];
        if self.members[e.a] && self.members[e.b] {
            return true;
        }
        self.spurs.iter().any(|s| {
            s.edge == p.edge && {
                let from_base = if e.a == s.base { p.offset } else { e.length - p.offset };
                from_base <= s.length
            }
        })
    }

    fn project(&self, tree: &MetricTree, p: TreePoint) -> TreePoint {
        if self.contains(tree, p) {
            return tree.canonical(p);
        }
        let mut best = (f64::INFINITY, self.gates[0]);
        for g in &self.gates {
            let d = tree.distance(p, *g);
            if d < best.0 {
                best = (d, *g);
            }
        }
        tree.canonical(best.1)
    }
}

fn model_err(what: &str, space: &Space) -> Error {
    Error::InvalidSet(format!("{what} is not defined on {}", space.describe()))
}

fn check_normal(normal: &[f64], dim: usize) -> Result<f64> {
    if normal.len() != dim {
        return Err(Error::InvalidSet(format!("normal has {} components, expected {dim}", normal.len())));
    }
    let norm_sq: f64 = normal.iter().map(|x| x * x).sum();
    if !(norm_sq.is_finite() && norm_sq > 0.0) {
        return Err(Error::InvalidSet("normal vector must be nonzero and finite".into()));
    }
    Ok(norm_sq)
}

impl ConvexSet {
    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn halfspace(space: &Space, name: &str, normal: Vec<f64>, offset: f64) -> Result<Self> {
        let SpaceModel::Euclidean { dim } = space.model() else {
            return Err(model_err("a Euclidean halfspace", space));
        };
        check_normal(&normal, *dim)?;
        if !offset.is_finite() {
            return Err(Error::InvalidSet("offset must be finite".into()));
        }
        Ok(Self { name: name.into(), kind: SetKind::EuclideanHalfspace { normal, offset } })
    }

    pub fn hyperplane(space: &Space, name: &str, normal: Vec<f64>, offset: f64) -> Result<Self> {
        let SpaceModel::Euclidean { dim } = space.model() else {
            return Err(model_err("a Euclidean hyperplane", space));
        };
        check_normal(&normal, *dim)?;
        if !offset.is_finite() {
            return Err(Error::InvalidSet("offset must be finite".into()));
        }
        Ok(Self { name: name.into(), kind: SetKind::EuclideanHyperplane { normal, offset } })
    }

    /// `{x : m(u, x) ≤ 0}`; `u` must be spacelike and is rescaled to `m(u, u) = 1`.
    pub fn hyperbolic_halfspace(space: &Space, name: &str, mut normal: Vec<f64>) -> Result<Self> {
        let SpaceModel::Hyperboloid { dim } = space.model() else {
            return Err(model_err("a hyperbolic halfspace", space));
        };
        if normal.len() != dim + 1 {
            return Err(Error::InvalidSet(format!("normal has {} components, expected {}", normal.len(), dim + 1)));
        }
        let q = hyperboloid::minkowski(&normal, &normal);
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidSet("hyperbolic halfspace normal must be spacelike".into()));
        }
        let s = q.sqrt().recip();
        normal.iter_mut().for_each(|x| *x *= s);
        Ok(Self { name: name.into(), kind: SetKind::HyperbolicHalfspace { normal } })
    }

    pub fn ball(space: &Space, name: &str, center: Point, radius: f64) -> Result<Self> {
        space.check(&center)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSet(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { name: name.into(), kind: SetKind::GeodesicBall { center: space.canonical(&center), radius } })
    }

    pub fn subtree(space: &Space, name: &str, vertices: &[&str], spurs: &[(&str, &str, f64)]) -> Result<Self> {
        let tree = space.as_tree().ok_or_else(|| model_err("a subtree", space))?;
        Ok(Self { name: name.into(), kind: SetKind::Subtree(Subtree::new(tree, vertices, spurs)?) })
    }

    pub fn product(space: &Space, name: &str, left: ConvexSet, right: ConvexSet) -> Result<Self> {
        let (ls, rs) = space.factors().ok_or_else(|| model_err("a product set", space))?;
        left.validate(&ls)?;
        right.validate(&rs)?;
        Ok(Self { name: name.into(), kind: SetKind::ProductSet(Box::new(left), Box::new(right)) })
    }

    pub fn intersection(space: &Space, name: &str, members: Vec<ConvexSet>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidSet("intersection of zero sets".into()));
        }
        for m in &members {
            m.validate(space)?;
        }
        Ok(Self { name: name.into(), kind: SetKind::Intersection(members) })
    }

    /// Whether [`project`](Self::project) is exact (everything but intersections).
    pub fn is_exact(&self) -> bool {
        match &self.kind {
            SetKind::Intersection(_) => false,
            SetKind::ProductSet(l, r) => l.is_exact() && r.is_exact(),
            _ => true,
        }
    }

    /// Checks that this set lives in `space`.
    pub fn validate(&self, space: &Space) -> Result<()> {
        match (&self.kind, space.model()) {
            (SetKind::EuclideanHalfspace { normal, .. }, SpaceModel::Euclidean { dim })
            | (SetKind::EuclideanHyperplane { normal, .. }, SpaceModel::Euclidean { dim }) => {
                check_normal(normal, *dim).map(|_| ())
            }
            (SetKind::HyperbolicHalfspace { normal }, SpaceModel::Hyperboloid { dim }) if normal.len() == dim + 1 => {
                Ok(())
            }
            (SetKind::GeodesicBall { center, .. }, _) => space.check(center),
            (SetKind::Subtree(st), SpaceModel::MetricTree(t)) if st.members.len() == t.vertex_count() => Ok(()),
            (SetKind::ProductSet(l, r), SpaceModel::Product(..)) => {
                let (ls, rs) = space.factors().expect("product");
                l.validate(&ls)?;
                r.validate(&rs)
            }
            (SetKind::Intersection(members), _) => members.iter().try_for_each(|m| m.validate(space)),
            _ => Err(Error::SpaceMismatch(format!("set `{}` does not belong to {}", self.name, space.describe()))),
        }
    }

    /// Metric projection `P_C x`.
    pub fn project(&self, space: &Space, x: &Point) -> Result<Point> {
        space.check(x)?;
        match (&self.kind, x) {
            (SetKind::EuclideanHalfspace { normal, offset }, Point::Euclidean(v)) => {
                let excess = dot(normal, v) - offset;
                if excess <= 0.0 {
                    return Ok(x.clone());
                }
                let s = excess / dot(normal, normal);
                Ok(Point::Euclidean(v.iter().zip(normal).map(|(xi, ai)| xi - s * ai).collect()))
            }
            (SetKind::EuclideanHyperplane { normal, offset }, Point::Euclidean(v)) => {
                let s = (dot(normal, v) - offset) / dot(normal, normal);
                Ok(Point::Euclidean(v.iter().zip(normal).map(|(xi, ai)| xi - s * ai).collect()))
            }
            (SetKind::HyperbolicHalfspace { normal }, Point::Hyperboloid(v)) => {
                let m = hyperboloid::minkowski(normal, v);
                if m <= 0.0 {
                    return Ok(x.clone());
                }
                let mut y: Vec<f64> = v.iter().zip(normal).map(|(xi, ui)| xi - m * ui).collect();
                hyperboloid::project_to_sheet(&mut y);
                Ok(Point::Hyperboloid(y))
            }
            (SetKind::GeodesicBall { center, radius }, _) => {
                let d = space.distance(center, x)?;
                if d <= *radius {
                    return Ok(space.canonical(x));
                }
                space.geodesic_point(center, x, radius / d)
            }
            (SetKind::Subtree(st), Point::Tree(p)) => {
                let tree = space.as_tree().ok_or_else(|| model_err("a subtree", space))?;
                if st.members.len() != tree.vertex_count() {
                    return Err(Error::SpaceMismatch(format!("subtree `{}` belongs to another tree", self.name)));
                }
                Ok(Point::Tree(st.project(tree, *p)))
            }
            (SetKind::ProductSet(l, r), Point::Product(pl, pr)) => {
                let (ls, rs) = space.factors().ok_or_else(|| model_err("a product set", space))?;
                Ok(Point::product(l.project(&ls, pl)?, r.project(&rs, pr)?))
            }
            (SetKind::Intersection(members), _) => project_intersection(space, members, x),
            _ => Err(Error::SpaceMismatch(format!("set `{}` does not belong to {}", self.name, space.describe()))),
        }
    }

    pub fn distance_to(&self, space: &Space, x: &Point) -> Result<f64> {
        let p = self.project(space, x)?;
        space.distance(x, &p)
    }

    /// Membership up to the model's check tolerance.
    pub fn contains(&self, space: &Space, x: &Point) -> Result<bool> {
        Ok(self.distance_to(space, x)? <= space.check_tol())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_intersection(space: &Space, members: &[ConvexSet], x: &Point) -> Result<Point> {
    let mut cur = space.canonical(x);
    for _ in 0..INTERSECTION_MAX_CYCLES {
        let mut residual: f64 = 0.0;
        for m in members {
            residual = residual.max(m.distance_to(space, &cur)?);
        }
        if residual <= INTERSECTION_RESIDUAL {
            return Ok(cur);
        }
        for m in members {
            cur = m.project(space, &cur)?;
        }
    }
    Err(Error::Domain(format!(
        "inner cyclic solve for the intersection did not reach residual {INTERSECTION_RESIDUAL:e}; \
         the members may not intersect"
    )))
}

/// `d(x,y)² − d(x,P_C x)² − d(P_C x,y)²` for `y ∈ C`.
pub fn projection_defect(space: &Space, set: &ConvexSet, x: &Point, y: &Point) -> Result<f64> {
    if !set.contains(space, y)? {
        return Err(Error::Domain(format!("witness point is not in set `{}`", set.name)));
    }
    let px = set.project(space, x)?;
    Ok(space.distance_sq(x, y)? - space.distance_sq(x, &px)? - space.distance_sq(&px, y)?)
}
