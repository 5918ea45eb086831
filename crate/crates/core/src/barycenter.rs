//! Weighted Fréchet means (barycenters) `w₁x₁ ⊕ … ⊕ wₙxₙ`: the unique
//! minimizer of `F(x) = Σ wᵢ d(x, xᵢ)²`.
//!
//! [`frechet_mean`] picks an exact or fast-converging route per model:
//!
//! * one point: the point itself;
//! * two points: the geodesic point `geodesic_point(x₁, x₂, w₂)`;
//! * Euclidean: the weighted coordinate mean;
//! * metric tree: `F` restricted to any edge is a single quadratic in the
//!   edge offset, so the global minimizer is found exactly by one scan over
//!   the edges;
//! * hyperboloid: damped Riemannian Newton iteration on `F`;
//! * product: the mean of each factor.
//!
//! [`inductive_mean`] is the model-agnostic route that uses nothing but
//! geodesic interpolation. It converges at a first-order rate and is kept as
//! an independent cross-check.

use crate::error::{Error, Result};
use crate::hyperboloid;
use crate::space::{Point, Space, SpaceModel};
use crate::tolerance::ToleranceConfig;
use crate::tree::{MetricTree, TreePoint};

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoints {
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl WeightedPoints {
    pub fn new(space: &Space, points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidWeights("at least one point is required".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidWeights(format!("{} points but {} weights", points.len(), weights.len())));
        }
        validate_weights(&weights)?;
        for p in &points {
            space.check(p)?;
        }
        Ok(Self { points, weights })
    }

    pub fn uniform(space: &Space, points: Vec<Point>) -> Result<Self> {
        let n = points.len().max(1);
        Self::new(space, points, vec![1.0 / n as f64; n])
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn positive(&self) -> (Vec<&Point>, Vec<f64>) {
        self.points.iter().zip(&self.weights).filter(|(_, w)| **w > 0.0).map(|(p, w)| (p, *w)).unzip()
    }
}

/// Weights must be nonnegative and sum to 1 within `1e-12`.
pub fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("weight list is empty".into()));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!("weight {w} is negative or not finite")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(format!("weights must sum to 1 (sum is {total})")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanMethod {
    /// Exact or model-specific solver (see module docs).
    #[default]
    Auto,
    /// Geodesic-only inductive sweeps, for every model.
    Inductive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycenterConfig {
    pub sweep_limit: usize,
    pub step_tol: f64,
    pub objective_tol: f64,
    pub method: MeanMethod,
}

impl Default for BarycenterConfig {
    fn default() -> Self {
        Self::from_tolerances(&ToleranceConfig::default())
    }
}

impl BarycenterConfig {
    pub fn from_tolerances(tol: &ToleranceConfig) -> Self {
        Self { sweep_limit: tol.max_barycenter_sweeps, step_tol: 1e-10, objective_tol: 1e-12, method: MeanMethod::Auto }
    }

    pub fn inductive(self) -> Self {
        Self { method: MeanMethod::Inductive, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.sweep_limit == 0 {
            return Err(Error::Domain("sweep_limit must be >= 1".into()));
        }
        Ok(())
    }
}

/// `F(x) = Σ wᵢ d(x, xᵢ)²`.
pub fn frechet_objective(space: &Space, wp: &WeightedPoints, x: &Point) -> Result<f64> {
    let mut total = 0.0;
    for (p, w) in wp.points.iter().zip(&wp.weights) {
        total += w * space.distance_sq(x, p)?;
    }
    Ok(total)
}

/// `F(y) − F(x*) − d(x*, y)²`; nonnegative when `x*` is the minimizer.
pub fn variance_defect(space: &Space, wp: &WeightedPoints, x_star: &Point, y: &Point) -> Result<f64> {
    Ok(frechet_objective(space, wp, y)? - frechet_objective(space, wp, x_star)? - space.distance_sq(x_star, y)?)
}

pub fn frechet_mean(space: &Space, wp: &WeightedPoints, cfg: &BarycenterConfig) -> Result<Point> {
    cfg.validate()?;
    if cfg.method == MeanMethod::Inductive {
        return inductive_mean(space, wp, cfg);
    }
    let (points, weights) = wp.positive();
    match points.len() {
        1 => Ok(space.canonical(points[0])),
        2 => {
            let t = weights[1] / (weights[0] + weights[1]);
            space.geodesic_point(points[0], points[1], t)
        }
        _ => mean_in_model(space, &points, &weights, cfg),
    }
}

fn mean_in_model(space: &Space, points: &[&Point], weights: &[f64], cfg: &BarycenterConfig) -> Result<Point> {
    match space.model() {
        SpaceModel::Euclidean { dim } => {
            let mut acc = vec![0.0; *dim];
            for (p, w) in points.iter().zip(weights) {
                let Point::Euclidean(v) = p else { unreachable!("validated") };
                acc.iter_mut().zip(v).for_each(|(a, x)| *a += w * x);
            }
            Ok(Point::Euclidean(acc))
        }
        SpaceModel::MetricTree(tree) => {
            let pts: Vec<TreePoint> = points
                .iter()
                .map(|p| match p {
                    Point::Tree(t) => *t,
                    _ => unreachable!("validated"),
                })
                .collect();
            Ok(Point::Tree(tree_mean(tree, &pts, weights)))
        }
        SpaceModel::Hyperboloid { .. } => karcher_mean(space, points, weights, cfg),
        SpaceModel::Product(..) => {
            let (ls, rs) = space.factors().expect("product model");
            let (lp, rp): (Vec<Point>, Vec<Point>) = points
                .iter()
                .map(|p| match p {
                    Point::Product(l, r) => ((**l).clone(), (**r).clone()),
                    _ => unreachable!("validated"),
                })
                .unzip();
            let left = mean_in_model(&ls, &lp.iter().collect::<Vec<_>>(), weights, cfg)?;
            let right = mean_in_model(&rs, &rp.iter().collect::<Vec<_>>(), weights, cfg)?;
            Ok(Point::product(left, right))
        }
    }
}

/// Exact tree barycenter. Along edge `(a, b)` every point `xᵢ` sits at a
/// signed position `cᵢ` on the line through the edge (`-d(a,xᵢ)` behind `a`,
/// `L + d(b,xᵢ)` beyond `b`, its own offset if interior), so
/// `F(s) = Σ wᵢ (s − cᵢ)²` and the edge minimizer is `clamp(Σ wᵢ cᵢ, 0, L)`.
fn tree_mean(tree: &MetricTree, points: &[TreePoint], weights: &[f64]) -> TreePoint {
    let total_w: f64 = weights.iter().sum();
    let mut best: Option<(f64, TreePoint)> = None;
    for (id, e) in tree.edges().iter().enumerate() {
        let positions: Vec<f64> = points
            .iter()
            .map(|p| {
                if p.edge == id && tree.vertex_at(*p).is_none() {
                    p.offset
                } else {
                    let da = tree.distance_to_vertex(*p, e.a);
                    let db = tree.distance_to_vertex(*p, e.b);
                    if da <= db {
                        -da
                    } else {
                        e.length + db
                    }
                }
            })
            .collect();
        let centroid = positions.iter().zip(weights).map(|(c, w)| w * c).sum::<f64>() / total_w;
        let s = centroid.clamp(0.0, e.length);
        let value: f64 = positions.iter().zip(weights).map(|(c, w)| w * (s - c) * (s - c)).sum();
        if best.is_none_or(|(v, _)| value < v) {
            best = Some((value, TreePoint { edge: id, offset: s }));
        }
    }
    tree.canonical(best.expect("tree has an edge").1)
}

fn hyperbolic_objective(coords: &[&[f64]], weights: &[f64], x: &[f64]) -> f64 {
    coords.iter().zip(weights).map(|(c, w)| w * hyperboloid::distance(x, c).powi(2)).sum()
}

/// Damped Riemannian Newton iteration for `½F`. At `x` the Hessian of
/// `½d(·, p)²` is the identity along `log_x p` and `d·coth d` across it; the
/// Newton system is solved by conjugate gradients in the tangent space
/// (where the Minkowski form is positive definite) and the step is halved
/// until `F` decreases.
fn karcher_mean(space: &Space, points: &[&Point], weights: &[f64], cfg: &BarycenterConfig) -> Result<Point> {
    let coords: Vec<&[f64]> = points.iter().map(|p| p.coords().expect("hyperboloid point")).collect();
    let start = weights.iter().enumerate().fold(0, |best, (i, w)| if *w > weights[best] { i } else { best });
    let mut x = coords[start].to_vec();
    let mut fx = hyperbolic_objective(&coords, weights, &x);
    let mut step = f64::INFINITY;
    for _ in 0..cfg.sweep_limit {
        let mut grad = vec![0.0; x.len()];
        let mut dirs = Vec::with_capacity(coords.len());
        let mut reach: f64 = 0.0;
        for (c, w) in coords.iter().zip(weights) {
            let v = hyperboloid::log(&x, c);
            grad.iter_mut().zip(&v).for_each(|(g, vi)| *g += w * vi);
            let d = hyperboloid::minkowski(&v, &v).max(0.0).sqrt();
            reach = reach.max(d);
            let zeta = if d < 1e-8 { 1.0 } else { d / d.tanh() };
            let u = if d > 0.0 { v.iter().map(|vi| vi / d).collect() } else { vec![0.0; v.len()] };
            dirs.push((*w, zeta, u));
        }
        let gnorm = hyperboloid::minkowski(&grad, &grad).max(0.0).sqrt();
        if gnorm <= cfg.step_tol {
            return Ok(Point::Hyperboloid(x));
        }
        let hess = |v: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; v.len()];
            for (w, zeta, u) in &dirs {
                let along = hyperboloid::minkowski(v, u);
                out.iter_mut()
                    .zip(v)
                    .zip(u)
                    .for_each(|((o, vi), ui)| *o += w * (zeta * vi + (1.0 - zeta) * along * ui));
            }
            out
        };
        let mut dir = conjugate_gradient(&hess, &grad, x.len());
        let descent = hyperboloid::minkowski(&dir, &grad);
        if descent.is_nan() || descent <= 0.0 {
            dir = grad.clone();
        }
        // the minimizer lies in the convex hull, so no step needs to be
        // longer than the farthest data point
        let len = hyperboloid::minkowski(&dir, &dir).max(0.0).sqrt();
        let mut s = if len > reach && reach > 0.0 { reach / len } else { 1.0 };
        let accepted = loop {
            let trial: Vec<f64> = dir.iter().map(|d| s * d).collect();
            let y = hyperboloid::exp(&x, &trial);
            let on_sheet = y.iter().all(|c| c.is_finite())
                && y[0] >= 1.0
                && hyperboloid::sheet_drift(&y).abs() <= 1e-10 * y[0] * y[0];
            let fy = hyperbolic_objective(&coords, weights, &y);
            if on_sheet && fy < fx {
                break Some((y, fy));
            }
            s *= 0.5;
            if s < 1e-12 {
                break None;
            }
        };
        let Some((y, fy)) = accepted else {
            // no representable decrease left: x is a minimizer to working precision
            return Ok(Point::Hyperboloid(x));
        };
        step = s * hyperboloid::minkowski(&dir, &dir).max(0.0).sqrt();
        x = y;
        fx = fy;
        if step <= cfg.step_tol {
            return Ok(Point::Hyperboloid(x));
        }
    }
    let last = Point::Hyperboloid(x);
    let wp = WeightedPoints { points: points.iter().map(|p| (*p).clone()).collect(), weights: weights.to_vec() };
    Err(Error::ConvergenceFailure {
        sweeps: cfg.sweep_limit,
        objective: frechet_objective(space, &wp, &last)?,
        step,
        last: Box::new(last),
    })
}

// Solves `A v = b` for a symmetric positive definite `A` on the tangent space,
// with the Minkowski form as inner product.
fn conjugate_gradient(a: &dyn Fn(&[f64]) -> Vec<f64>, b: &[f64], iters: usize) -> Vec<f64> {
    let dot = hyperboloid::minkowski;
    let mut v = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let stop = 1e-30 * rr;
    for _ in 0..iters {
        if rr <= stop {
            break;
        }
        let ap = a(&p);
        let pap = dot(&p, &ap);
        if pap.is_nan() || pap <= 0.0 {
            break;
        }
        let k = rr / pap;
        v.iter_mut().zip(&p).for_each(|(vi, pi)| *vi += k * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= k * api);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + beta * *pi);
        rr = rr_new;
    }
    v
}

/// Geodesic-only weighted inductive mean.
///
/// Starts at the heaviest point (lowest index on ties) with accumulated
/// weight `W = w_start`; each visit of point `i` moves the running point
/// `s ← geodesic_point(s, xᵢ, wᵢ / (W + wᵢ))` and adds `wᵢ` to `W`. The first
/// sweep visits the remaining points in index order, later sweeps all of
/// them. In Euclidean space one sweep already yields the exact mean.
pub fn inductive_mean(space: &Space, wp: &WeightedPoints, cfg: &BarycenterConfig) -> Result<Point> {
    cfg.validate()?;
    let (points, weights) = wp.positive();
    let start = weights.iter().enumerate().fold(0, |best, (i, w)| if *w > weights[best] { i } else { best });
    let mut s = space.canonical(points[start]);
    let mut acc = weights[start];
    let mut prev_objective = f64::INFINITY;
    let mut prev_point: Option<Point> = None;
    let mut step = f64::INFINITY;

    for sweep in 0..cfg.sweep_limit {
        for (i, (p, w)) in points.iter().zip(&weights).enumerate() {
            if sweep == 0 && i == start {
                continue;
            }
            acc += w;
            s = space.geodesic_point(&s, p, w / acc)?;
        }
        let objective = frechet_objective(space, wp, &s)?;
        if let Some(prev) = &prev_point {
            step = space.distance(prev, &s)?;
            if step <= cfg.step_tol || prev_objective - objective <= cfg.objective_tol {
                return Ok(s);
            }
        }
        prev_objective = objective;
        prev_point = Some(s.clone());
    }
    Err(Error::ConvergenceFailure { sweeps: cfg.sweep_limit, objective: prev_objective, step, last: Box::new(s) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{rng_for, sample_point, sample_weights};

    fn e(v: &[f64]) -> Point {
        Point::euclidean(v.to_vec())
    }

    #[test]
    fn objective_examples() {
        let e2 = Space::euclidean(2);
        let single = WeightedPoints::new(&e2, vec![e(&[1.0, 2.0])], vec![1.0]).unwrap();
        assert_eq!(frechet_objective(&e2, &single, &e(&[1.0, 2.0])).unwrap(), 0.0);
        let pair = WeightedPoints::uniform(&e2, vec![e(&[0.0, 0.0]), e(&[2.0, 0.0])]).unwrap();
        assert_eq!(frechet_objective(&e2, &pair, &e(&[1.0, 0.0])).unwrap(), 1.0);

        let tri = Space::tree(MetricTree::tripod());
        let leaves = ["a", "b", "c"].map(|n| tri.vertex(n).unwrap()).to_vec();
        let wp = WeightedPoints::uniform(&tri, leaves).unwrap();
        let o = tri.vertex("o").unwrap();
        assert!((frechet_objective(&tri, &wp, &o).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mean_examples() {
        let e2 = Space::euclidean(2);
        let wp = WeightedPoints::new(&e2, vec![e(&[0.0, 0.0]), e(&[4.0, 0.0])], vec![0.25, 0.75]).unwrap();
        assert_eq!(frechet_mean(&e2, &wp, &BarycenterConfig::default()).unwrap(), e(&[3.0, 0.0]));

        let tri = Space::tree(MetricTree::tripod());
        let leaves = ["a", "b", "c"].map(|n| tri.vertex(n).unwrap()).to_vec();
        let wp = WeightedPoints::uniform(&tri, leaves).unwrap();
        let m = frechet_mean(&tri, &wp, &BarycenterConfig::default()).unwrap();
        assert_eq!(m, tri.vertex("o").unwrap());
    }

    #[test]
    fn variance_defect_examples() {
        let e2 = Space::euclidean(2);
        let wp = WeightedPoints::uniform(&e2, vec![e(&[0.0, 0.0]), e(&[2.0, 0.0])]).unwrap();
        let d = variance_defect(&e2, &wp, &e(&[1.0, 0.0]), &e(&[0.0, 0.0])).unwrap();
        assert_eq!(d, 0.0);

        let tri = Space::tree(MetricTree::tripod());
        let leaves = ["a", "b", "c"].map(|n| tri.vertex(n).unwrap()).to_vec();
        let wp = WeightedPoints::uniform(&tri, leaves).unwrap();
        let o = tri.vertex("o").unwrap();
        let a = tri.vertex("a").unwrap();
        assert_eq!(variance_defect(&tri, &wp, &o, &o).unwrap(), 0.0);
        assert!((variance_defect(&tri, &wp, &o, &a).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_weights() {
        let e1 = Space::euclidean(1);
        let pts = vec![e(&[0.0]), e(&[1.0])];
        let err = WeightedPoints::new(&e1, pts.clone(), vec![0.45, 0.45]).unwrap_err();
        assert!(err.to_string().contains("weights must sum to 1"));
        assert!(WeightedPoints::new(&e1, pts.clone(), vec![1.5, -0.5]).is_err());
        assert!(WeightedPoints::new(&e1, pts, vec![1.0]).is_err());
    }

    #[test]
    fn inductive_mean_is_exact_in_euclidean_space() {
        let e3 = Space::euclidean(3);
        let mut rng = rng_for(5, 0);
        let pts: Vec<Point> = (0..5).map(|_| sample_point(&e3, &mut rng)).collect();
        let w = sample_weights(5, &mut rng);
        let wp = WeightedPoints::new(&e3, pts, w).unwrap();
        let exact = frechet_mean(&e3, &wp, &BarycenterConfig::default()).unwrap();
        let ind = inductive_mean(&e3, &wp, &BarycenterConfig::default()).unwrap();
        assert!(e3.distance(&exact, &ind).unwrap() < 1e-12);
    }

    #[test]
    fn inductive_mean_approaches_tree_mean() {
        let tri = Space::tree(MetricTree::caterpillar());
        let mut rng = rng_for(9, 0);
        let pts: Vec<Point> = (0..4).map(|_| sample_point(&tri, &mut rng)).collect();
        let wp = WeightedPoints::uniform(&tri, pts).unwrap();
        let exact = frechet_mean(&tri, &wp, &BarycenterConfig::default()).unwrap();
        let cfg = BarycenterConfig { sweep_limit: 400, ..BarycenterConfig::default() }.inductive();
        let approx = match frechet_mean(&tri, &wp, &cfg) {
            Ok(p) => p,
            Err(Error::ConvergenceFailure { last, .. }) => *last,
            Err(e) => panic!("{e}"),
        };
        assert!(tri.distance(&exact, &approx).unwrap() < 0.05);
        let f_exact = frechet_objective(&tri, &wp, &exact).unwrap();
        let f_approx = frechet_objective(&tri, &wp, &approx).unwrap();
        assert!(f_exact <= f_approx + 1e-12);
    }

    #[test]
    fn hyperbolic_mean_satisfies_first_order_condition() {
        let h = Space::hyperboloid(2);
        let mut rng = rng_for(13, 0);
        let pts: Vec<Point> = (0..5).map(|_| sample_point(&h, &mut rng)).collect();
        let w = sample_weights(5, &mut rng);
        let wp = WeightedPoints::new(&h, pts, w).unwrap();
        let m = frechet_mean(&h, &wp, &BarycenterConfig::default()).unwrap();
        let x = m.coords().unwrap();
        let mut grad = vec![0.0; 3];
        for (p, w) in wp.points().iter().zip(wp.weights()) {
            let v = hyperboloid::log(x, p.coords().unwrap());
            grad.iter_mut().zip(&v).for_each(|(g, vi)| *g += w * vi);
        }
        assert!(hyperboloid::minkowski(&grad, &grad).max(0.0).sqrt() < 1e-9);
    }

    #[test]
    fn hyperbolic_mean_converges_for_spread_points() {
        use rand_distr::{Distribution, StandardNormal};
        let h = Space::hyperboloid(2);
        let mut rng = rng_for(29, 0);
        for _ in 0..300 {
            let pts: Vec<Point> = (0..5)
                .map(|_| {
                    let w: Vec<f64> = (0..2)
                        .map(|_| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            4.0 * z
                        })
                        .collect();
                    Point::Hyperboloid(hyperboloid::from_origin_tangent(&w))
                })
                .collect();
            let wp = WeightedPoints::new(&h, pts, sample_weights(5, &mut rng)).unwrap();
            let m = frechet_mean(&h, &wp, &BarycenterConfig::default()).unwrap();
            for _ in 0..20 {
                let y = sample_point(&h, &mut rng);
                assert!(variance_defect(&h, &wp, &m, &y).unwrap() >= -1e-6);
            }
        }
    }

    #[test]
    fn sweep_limit_failure_is_reported() {
        let h = Space::hyperboloid(2);
        let mut rng = rng_for(17, 0);
        let pts: Vec<Point> = (0..4).map(|_| sample_point(&h, &mut rng)).collect();
        let wp = WeightedPoints::uniform(&h, pts).unwrap();
        let cfg = BarycenterConfig { sweep_limit: 1, step_tol: 0.0, ..BarycenterConfig::default() };
        match frechet_mean(&h, &wp, &cfg) {
            Err(Error::ConvergenceFailure { sweeps, objective, .. }) => {
                assert_eq!(sweeps, 1);
                assert!(objective > 0.0);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }
}
