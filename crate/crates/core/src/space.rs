//! Concrete CAT(0) space models and their metric geometry.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hyperboloid;
use crate::tolerance::ToleranceConfig;
use crate::tree::{MetricTree, TreePoint};

#[derive(Debug, Clone)]
pub enum SpaceModel {
    Euclidean {
        dim: usize,
    },
    /// Hyperbolic space of dimension `dim`, points in `dim + 1` ambient coordinates.
    Hyperboloid {
        dim: usize,
    },
    MetricTree(Arc<MetricTree>),
    Product(Box<SpaceModel>, Box<SpaceModel>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Euclidean(Vec<f64>),
    Hyperboloid(Vec<f64>),
    Tree(TreePoint),
    Product(Box<Point>, Box<Point>),
}

impl Point {
    pub fn euclidean(coords: impl Into<Vec<f64>>) -> Self {
        Point::Euclidean(coords.into())
    }

    pub fn product(left: Point, right: Point) -> Self {
        Point::Product(Box::new(left), Box::new(right))
    }

    /// Coordinates of a Euclidean or hyperboloid point.
    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Euclidean(v) | Point::Hyperboloid(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Euclidean(v) | Point::Hyperboloid(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "({})", parts.join(", "))
            }
            Point::Tree(p) => write!(f, "edge {}@{:?}", p.edge, p.offset),
            Point::Product(l, r) => write!(f, "[{l} | {r}]"),
        }
    }
}

impl SpaceModel {
    fn describe(&self) -> String {
        match self {
            SpaceModel::Euclidean { dim } => format!("euclidean({dim})"),
            SpaceModel::Hyperboloid { dim } => format!("hyperboloid({dim})"),
            SpaceModel::MetricTree(t) => {
                format!("tree({} vertices, {} edges)", t.vertex_count(), t.edges().len())
            }
            SpaceModel::Product(l, r) => format!("product({}, {})", l.describe(), r.describe()),
        }
    }

    fn contains_hyperboloid(&self) -> bool {
        match self {
            SpaceModel::Hyperboloid { .. } => true,
            SpaceModel::Product(l, r) => l.contains_hyperboloid() || r.contains_hyperboloid(),
            _ => false,
        }
    }

    fn check(&self, p: &Point, tol: &ToleranceConfig) -> Result<()> {
        match (self, p) {
            (SpaceModel::Euclidean { dim }, Point::Euclidean(v)) => {
                if v.len() != *dim {
                    return Err(Error::SpaceMismatch(format!(
                        "point has {} coordinates, space is euclidean({dim})",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                Ok(())
            }
            (SpaceModel::Hyperboloid { dim }, Point::Hyperboloid(v)) => {
                if v.len() != dim + 1 {
                    return Err(Error::SpaceMismatch(format!(
                        "point has {} coordinates, hyperboloid({dim}) needs {}",
                        v.len(),
                        dim + 1
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                let drift = hyperboloid::sheet_drift(v);
                if v[0] < 1.0 - tol.on_manifold || drift.abs() > tol.on_manifold * v[0] * v[0] {
                    return Err(Error::InvalidPoint(format!(
                        "off the hyperboloid sheet: m(v,v)+1 = {drift:e}, v[0] = {}",
                        v[0]
                    )));
                }
                Ok(())
            }
            (SpaceModel::MetricTree(t), Point::Tree(q)) => t.validate(q),
            (SpaceModel::Product(ls, rs), Point::Product(lp, rp)) => {
                ls.check(lp, tol)?;
                rs.check(rp, tol)
            }
            (model, point) => Err(Error::SpaceMismatch(format!(
                "{} point does not belong to {}",
                point_kind(point),
                model.describe()
            ))),
        }
    }

    // Callers have already validated both points.
    fn dist(&self, p: &Point, q: &Point) -> f64 {
        match (self, p, q) {
            (SpaceModel::Hyperboloid { .. }, Point::Hyperboloid(a), Point::Hyperboloid(b)) => {
                hyperboloid::distance(a, b)
            }
            (SpaceModel::MetricTree(t), Point::Tree(a), Point::Tree(b)) => t.distance(*a, *b),
            _ => self.dist_sq(p, q).sqrt(),
        }
    }

    // squared distance without a round trip through sqrt where possible
    fn dist_sq(&self, p: &Point, q: &Point) -> f64 {
        match (self, p, q) {
            (SpaceModel::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
            }
            (SpaceModel::Product(ls, rs), Point::Product(pl, pr), Point::Product(ql, qr)) => {
                ls.dist_sq(pl, ql) + rs.dist_sq(pr, qr)
            }
            (SpaceModel::Hyperboloid { .. }, ..) | (SpaceModel::MetricTree(_), ..) => {
                let d = self.dist(p, q);
                d * d
            }
            _ => unreachable!("points validated against the model"),
        }
    }

    fn geodesic(&self, p: &Point, q: &Point, t: f64) -> Point {
        match (self, p, q) {
            (SpaceModel::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => {
                Point::Euclidean(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect())
            }
            (SpaceModel::Hyperboloid { .. }, Point::Hyperboloid(a), Point::Hyperboloid(b)) => {
                Point::Hyperboloid(hyperboloid::geodesic(a, b, t))
            }
            (SpaceModel::MetricTree(tr), Point::Tree(a), Point::Tree(b)) => Point::Tree(tr.geodesic(*a, *b, t)),
            (SpaceModel::Product(ls, rs), Point::Product(pl, pr), Point::Product(ql, qr)) => {
                Point::product(ls.geodesic(pl, ql, t), rs.geodesic(pr, qr, t))
            }
            _ => unreachable!("points validated against the model"),
        }
    }

    fn canonical(&self, p: &Point) -> Point {
        match (self, p) {
            (SpaceModel::MetricTree(t), Point::Tree(q)) => Point::Tree(t.canonical(*q)),
            (SpaceModel::Product(ls, rs), Point::Product(l, r)) => Point::product(ls.canonical(l), rs.canonical(r)),
            _ => p.clone(),
        }
    }
}

fn point_kind(p: &Point) -> &'static str {
    match p {
        Point::Euclidean(_) => "euclidean",
        Point::Hyperboloid(_) => "hyperboloid",
        Point::Tree(_) => "tree",
        Point::Product(..) => "product",
    }
}

/// A space model together with its tolerances. Cheap to clone.
#[derive(Debug, Clone)]
pub struct Space {
    model: Arc<SpaceModel>,
    tol: ToleranceConfig,
}

impl Space {
    pub fn new(model: SpaceModel, tol: ToleranceConfig) -> Result<Self> {
        tol.validate()?;
        validate_model(&model)?;
        Ok(Self { model: Arc::new(model), tol })
    }

    pub fn euclidean(dim: usize) -> Self {
        assert!(dim >= 1, "euclidean dimension must be positive");
        Self::from_model(SpaceModel::Euclidean { dim })
    }

    pub fn hyperboloid(dim: usize) -> Self {
        assert!(dim >= 1, "hyperboloid dimension must be positive");
        Self::from_model(SpaceModel::Hyperboloid { dim })
    }

    pub fn tree(tree: MetricTree) -> Self {
        Self::from_model(SpaceModel::MetricTree(Arc::new(tree)))
    }

    pub fn product(left: &Space, right: &Space) -> Self {
        Self::from_model(SpaceModel::Product(Box::new((*left.model).clone()), Box::new((*right.model).clone())))
    }

    fn from_model(model: SpaceModel) -> Self {
        Self { model: Arc::new(model), tol: ToleranceConfig::default() }
    }

    pub fn with_tolerances(mut self, tol: ToleranceConfig) -> Result<Self> {
        tol.validate()?;
        self.tol = tol;
        Ok(self)
    }

    pub fn model(&self) -> &SpaceModel {
        &self.model
    }

    pub fn tol(&self) -> &ToleranceConfig {
        &self.tol
    }

    pub fn describe(&self) -> String {
        self.model.describe()
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.model.contains_hyperboloid()
    }

    /// Inequality slack appropriate for this model.
    pub fn check_tol(&self) -> f64 {
        if self.is_hyperbolic() {
            self.tol.hyperbolic_tol
        } else {
            self.tol.eq_tol
        }
    }

    /// The tree of a `MetricTree` model.
    pub fn as_tree(&self) -> Option<&MetricTree> {
        match &*self.model {
            SpaceModel::MetricTree(t) => Some(t),
            _ => None,
        }
    }

    /// Left and right factors of a product model.
    pub fn factors(&self) -> Option<(Space, Space)> {
        match &*self.model {
            SpaceModel::Product(l, r) => Some((
                Space { model: Arc::new((**l).clone()), tol: self.tol },
                Space { model: Arc::new((**r).clone()), tol: self.tol },
            )),
            _ => None,
        }
    }

    /// Validates that `p` is a well-formed point of this space.
    pub fn check(&self, p: &Point) -> Result<()> {
        self.model.check(p, &self.tol)
    }

    pub fn canonical(&self, p: &Point) -> Point {
        self.model.canonical(p)
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.model.dist(p, q))
    }

    pub fn distance_sq(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.model.dist_sq(p, q))
    }

    /// `(1 - t) p ⊕ t q`: the point at fraction `t` along the geodesic.
    pub fn geodesic_point(&self, p: &Point, q: &Point, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("geodesic parameter {t} outside [0, 1]")));
        }
        self.check(p)?;
        self.check(q)?;
        if t == 0.0 {
            return Ok(self.canonical(p));
        }
        if t == 1.0 {
            return Ok(self.canonical(q));
        }
        Ok(self.model.geodesic(p, q, t))
    }

    pub fn geodesic(&self, start: &Point, end: &Point) -> Result<GeodesicSegment> {
        let length = self.distance(start, end)?;
        Ok(GeodesicSegment { space: self.clone(), start: self.canonical(start), end: self.canonical(end), length })
    }

    /// Quasilinearization `<xz, yw>` of the bound vectors `xz` and `yw`:
    /// `½(d(x,w)² + d(z,y)² − d(x,y)² − d(z,w)²)`.
    pub fn quasilinearization(&self, x: &Point, z: &Point, y: &Point, w: &Point) -> Result<f64> {
        let d_xw = self.distance_sq(x, w)?;
        let d_zy = self.distance_sq(z, y)?;
        let d_xy = self.distance_sq(x, y)?;
        let d_zw = self.distance_sq(z, w)?;
        Ok(0.5 * (d_xw + d_zy - d_xy - d_zw))
    }

    /// Right side minus left side of the quadratic CAT(0) inequality
    /// `d(x_t, z)² ≤ (1−t) d(x,z)² + t d(y,z)² − t(1−t) d(x,y)²`.
    pub fn cat0_defect(&self, x: &Point, y: &Point, z: &Point, t: f64) -> Result<f64> {
        let xt = self.geodesic_point(x, y, t)?;
        let rhs = (1.0 - t) * self.distance_sq(x, z)? + t * self.distance_sq(y, z)?
            - t * (1.0 - t) * self.distance_sq(x, y)?;
        Ok(rhs - self.distance_sq(&xt, z)?)
    }

    pub fn points_close(&self, p: &Point, q: &Point) -> Result<bool> {
        Ok(self.distance(p, q)? <= self.check_tol())
    }

    /// Hyperboloid point from ambient coordinates; rejected if off the sheet.
    pub fn hyperboloid_point(&self, coords: Vec<f64>) -> Result<Point> {
        let p = Point::Hyperboloid(coords);
        self.check(&p)?;
        Ok(p)
    }

    /// Tree point on `edge` at `offset` from its `a` vertex, canonicalized.
    pub fn tree_point(&self, edge: usize, offset: f64) -> Result<Point> {
        let tree = self.as_tree().ok_or_else(|| Error::SpaceMismatch(format!("{} is not a tree", self.describe())))?;
        let p = TreePoint { edge, offset };
        tree.validate(&p)?;
        Ok(Point::Tree(tree.canonical(p)))
    }

    /// The named vertex of a tree model.
    pub fn vertex(&self, name: &str) -> Result<Point> {
        let tree = self.as_tree().ok_or_else(|| Error::SpaceMismatch(format!("{} is not a tree", self.describe())))?;
        tree.named_vertex(name).map(Point::Tree).ok_or_else(|| Error::InvalidPoint(format!("unknown vertex `{name}`")))
    }
}

fn validate_model(model: &SpaceModel) -> Result<()> {
    match model {
        SpaceModel::Euclidean { dim } | SpaceModel::Hyperboloid { dim } if *dim == 0 => {
            Err(Error::Domain("dimension must be positive".into()))
        }
        SpaceModel::Product(l, r) => {
            validate_model(l)?;
            validate_model(r)
        }
        _ => Ok(()),
    }
}

/// Constant-speed geodesic `γ: [0, 1] → X`.
#[derive(Debug, Clone)]
pub struct GeodesicSegment {
    space: Space,
    pub start: Point,
    pub end: Point,
    pub length: f64,
}

impl GeodesicSegment {
    pub fn at(&self, t: f64) -> Result<Point> {
        self.space.geodesic_point(&self.start, &self.end, t)
    }
}

/// Planar comparison triangle with the given side lengths, in canonical pose:
/// first vertex at the origin, second on the nonnegative horizontal axis,
/// third in the closed upper half plane.
pub fn comparison_triangle(d_xy: f64, d_yz: f64, d_zx: f64, eq_tol: f64) -> Result<[[f64; 2]; 3]> {
    let sides = [d_xy, d_yz, d_zx];
    if sides.iter().any(|s| !s.is_finite() || *s < 0.0)
        || d_xy > d_yz + d_zx + eq_tol
        || d_yz > d_xy + d_zx + eq_tol
        || d_zx > d_xy + d_yz + eq_tol
    {
        return Err(Error::InfeasibleTriangle(d_xy, d_yz, d_zx));
    }
    let third = if d_xy == 0.0 {
        [d_zx, 0.0]
    } else {
        let u = (d_xy * d_xy + d_zx * d_zx - d_yz * d_yz) / (2.0 * d_xy);
        [u, (d_zx * d_zx - u * u).max(0.0).sqrt()]
    };
    Ok([[0.0, 0.0], [d_xy, 0.0], third])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar(a: [f64; 2], b: [f64; 2]) -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    #[test]
    fn distance_examples() {
        let e2 = Space::euclidean(2);
        let d = e2.distance(&Point::euclidean([0.0, 0.0]), &Point::euclidean([3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);

        let h2 = Space::hyperboloid(2);
        let p = h2.hyperboloid_point(vec![1.0, 0.0, 0.0]).unwrap();
        let q = h2.hyperboloid_point(vec![1f64.cosh(), 1f64.sinh(), 0.0]).unwrap();
        assert!((h2.distance(&p, &q).unwrap() - 1.0).abs() < 1e-14);

        let tri = Space::tree(MetricTree::tripod());
        let (a, b) = (tri.vertex("a").unwrap(), tri.vertex("b").unwrap());
        assert_eq!(tri.distance(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn mismatches_and_invalid_points() {
        let e2 = Space::euclidean(2);
        let err = e2.distance(&Point::euclidean([0.0]), &Point::euclidean([1.0, 0.0]));
        assert!(matches!(err, Err(Error::SpaceMismatch(_))));
        let h2 = Space::hyperboloid(2);
        let off = Point::Hyperboloid(vec![2.0, 0.0, 0.0]);
        let o = Point::Hyperboloid(vec![1.0, 0.0, 0.0]);
        assert!(matches!(h2.distance(&off, &o), Err(Error::InvalidPoint(_))));
        assert!(matches!(h2.distance(&Point::euclidean([1.0, 0.0, 0.0]), &o), Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn geodesic_point_examples() {
        let e2 = Space::euclidean(2);
        let p = Point::euclidean([0.0, 0.0]);
        let q = Point::euclidean([2.0, 0.0]);
        assert_eq!(e2.geodesic_point(&p, &q, 0.5).unwrap(), Point::euclidean([1.0, 0.0]));
        assert_eq!(e2.geodesic_point(&p, &q, 0.0).unwrap(), p);
        assert!(matches!(e2.geodesic_point(&p, &q, 1.5), Err(Error::Domain(_))));

        let tri = Space::tree(MetricTree::tripod());
        let (a, b) = (tri.vertex("a").unwrap(), tri.vertex("b").unwrap());
        assert_eq!(tri.geodesic_point(&a, &b, 0.5).unwrap(), tri.vertex("o").unwrap());
    }

    #[test]
    fn quasilinearization_examples() {
        let e2 = Space::euclidean(2);
        let o = Point::euclidean([0.0, 0.0]);
        let ex = Point::euclidean([1.0, 0.0]);
        let ey = Point::euclidean([0.0, 1.0]);
        assert_eq!(e2.quasilinearization(&o, &ex, &o, &ey).unwrap(), 0.0);

        let tri = Space::tree(MetricTree::tripod());
        let (a, b, c) = (tri.vertex("a").unwrap(), tri.vertex("b").unwrap(), tri.vertex("o").unwrap());
        assert_eq!(tri.quasilinearization(&a, &c, &b, &c).unwrap(), -1.0);
        // <xy, xy> = d(x,y)^2
        assert_eq!(tri.quasilinearization(&a, &b, &a, &b).unwrap(), 4.0);
    }

    #[test]
    fn cat0_defect_examples() {
        let tri = Space::tree(MetricTree::tripod());
        let (a, b, c) = (tri.vertex("a").unwrap(), tri.vertex("b").unwrap(), tri.vertex("c").unwrap());
        assert_eq!(tri.cat0_defect(&a, &b, &c, 0.5).unwrap(), 2.0);
        assert_eq!(tri.cat0_defect(&a, &b, &c, 0.0).unwrap(), 0.0);

        let e3 = Space::euclidean(3);
        let x = Point::euclidean([0.3, -1.2, 2.0]);
        let y = Point::euclidean([1.7, 0.4, -0.5]);
        let z = Point::euclidean([-0.9, 0.8, 0.1]);
        assert!(e3.cat0_defect(&x, &y, &z, 0.5).unwrap().abs() < 1e-12);
        assert!(matches!(e3.cat0_defect(&x, &y, &z, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn comparison_triangle_examples() {
        let eq = comparison_triangle(2.0, 2.0, 2.0, 1e-9).unwrap();
        assert_eq!(eq[1], [2.0, 0.0]);
        assert!((eq[2][0] - 1.0).abs() < 1e-15 && (eq[2][1] - 3f64.sqrt()).abs() < 1e-15);

        let flat = comparison_triangle(1.0, 1.0, 2.0, 1e-9).unwrap();
        assert_eq!(flat, [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);

        let right = comparison_triangle(3.0, 4.0, 5.0, 1e-9).unwrap();
        assert_eq!(right[2], [3.0, 4.0]);
        assert!((planar(right[1], right[2]) - 4.0).abs() < 1e-15);

        assert!(matches!(comparison_triangle(1.0, 1.0, 3.0, 1e-9), Err(Error::InfeasibleTriangle(..))));
    }

    #[test]
    fn product_distance_is_pythagorean() {
        let sp = Space::product(&Space::euclidean(1), &Space::tree(MetricTree::tripod()));
        let p = Point::product(Point::euclidean([0.0]), sp.factors().unwrap().1.vertex("a").unwrap());
        let q = Point::product(Point::euclidean([3.0]), sp.factors().unwrap().1.vertex("o").unwrap());
        assert!((sp.distance(&p, &q).unwrap() - 10f64.sqrt()).abs() < 1e-15);
    }
}
