//! Self-maps of a space and the calculus of (quasi) α-firmly nonexpansive
//! operators.
//!
//! An operator `T` is α-firmly nonexpansive on `D × E` when
//!
//! ```text
//! d(Tx,Ty)² + (1 − 2α) d(x,y)² ≤ 2(1 − α) Δ_T(x,y)      x ∈ D, y ∈ E
//! ```
//!
//! where `Δ_T(x,y) = <xy, TxTy>` is the discrepancy. Every inequality is
//! exposed as a *defect* (right side minus left side), so a value
//! `≥ −tolerance` certifies the inequality at that input.

use std::fmt;
use std::sync::Arc;

use rand::Rng as _;

use crate::barycenter::{frechet_mean, validate_weights, BarycenterConfig, WeightedPoints};
use crate::certifier::{min_defect, Witness};
use crate::error::{Error, Result};
use crate::sampling::sample_point;
use crate::sets::ConvexSet;
use crate::space::{Point, Space};

pub type PointMap = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

#[derive(Clone)]
pub enum OperatorKind {
    Identity,
    Constant(Point),
    Projection(ConvexSet),
    /// Factors applied right to left: `[T, S]` is `TS`, i.e. `S` first.
    Composition(Vec<Operator>),
    /// `w₁T₁ ⊕ … ⊕ wₙTₙ`: `Tx` is the barycenter of the images `Tᵢx`.
    ConvexCombination {
        weights: Vec<f64>,
        ops: Vec<Operator>,
    },
    /// Opaque user map.
    Pointwise {
        name: String,
        map: PointMap,
    },
}

#[derive(Clone)]
pub struct Operator {
    kind: OperatorKind,
    pub claimed_alpha: Option<f64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator").field("name", &self.name()).field("claimed_alpha", &self.claimed_alpha).finish()
    }
}

impl Operator {
    fn from_kind(kind: OperatorKind) -> Self {
        Self { kind, claimed_alpha: None }
    }

    pub fn identity() -> Self {
        Self::from_kind(OperatorKind::Identity)
    }

    pub fn constant(c: Point) -> Self {
        Self::from_kind(OperatorKind::Constant(c))
    }

    pub fn projection(set: ConvexSet) -> Self {
        Self::from_kind(OperatorKind::Projection(set))
    }

    /// `factors[0] ∘ factors[1] ∘ …` (the last factor is applied first).
    pub fn compose(factors: Vec<Operator>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidOperator("composition needs at least one factor".into()));
        }
        Ok(Self::from_kind(OperatorKind::Composition(factors)))
    }

    pub fn combination(weights: Vec<f64>, ops: Vec<Operator>) -> Result<Self> {
        if weights.len() != ops.len() || ops.is_empty() {
            return Err(Error::InvalidOperator(format!(
                "convex combination needs one weight per operator ({} weights, {} operators)",
                weights.len(),
                ops.len()
            )));
        }
        validate_weights(&weights)?;
        Ok(Self::from_kind(OperatorKind::ConvexCombination { weights, ops }))
    }

    pub fn pointwise(name: &str, map: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        Self::from_kind(OperatorKind::Pointwise { name: name.into(), map: Arc::new(map) })
    }

    pub fn with_claimed_alpha(mut self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        self.claimed_alpha = Some(alpha);
        Ok(self)
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            OperatorKind::Identity => "Id".into(),
            OperatorKind::Constant(c) => format!("const{c}"),
            OperatorKind::Projection(set) => format!("P[{}]", set.name),
            OperatorKind::Composition(f) => f.iter().map(|o| o.name()).collect::<Vec<_>>().join("∘"),
            OperatorKind::ConvexCombination { weights, ops } => {
                let terms: Vec<String> = weights.iter().zip(ops).map(|(w, o)| format!("{w}·{}", o.name())).collect();
                format!("({})", terms.join(" ⊕ "))
            }
            OperatorKind::Pointwise { name, .. } => name.clone(),
        }
    }

    pub fn apply(&self, space: &Space, x: &Point) -> Result<Point> {
        space.check(x)?;
        match &self.kind {
            OperatorKind::Identity => Ok(x.clone()),
            OperatorKind::Constant(c) => {
                space.check(c)?;
                Ok(c.clone())
            }
            OperatorKind::Projection(set) => set.project(space, x),
            OperatorKind::Composition(factors) => {
                let mut cur = x.clone();
                for f in factors.iter().rev() {
                    cur = f.apply(space, &cur)?;
                }
                Ok(cur)
            }
            OperatorKind::ConvexCombination { weights, ops } => {
                let images = ops.iter().map(|op| op.apply(space, x)).collect::<Result<Vec<_>>>()?;
                let wp = WeightedPoints::new(space, images, weights.clone())?;
                frechet_mean(space, &wp, &BarycenterConfig::from_tolerances(space.tol()))
            }
            OperatorKind::Pointwise { name, map } => {
                let y = map(x);
                space.check(&y).map_err(|e| Error::InvalidOperator(format!("map `{name}` left the space: {e}")))?;
                Ok(y)
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

/// `Δ_T(x, y) = <xy, TxTy>`.
pub fn discrepancy(space: &Space, op: &Operator, x: &Point, y: &Point) -> Result<f64> {
    let tx = op.apply(space, x)?;
    let ty = op.apply(space, y)?;
    space.quasilinearization(x, y, &tx, &ty)
}

/// `2(1−α) Δ_T(x,y) − d(Tx,Ty)² − (1−2α) d(x,y)²`.
pub fn alpha_firm_defect(space: &Space, op: &Operator, alpha: f64, x: &Point, y: &Point) -> Result<f64> {
    check_alpha(alpha)?;
    let tx = op.apply(space, x)?;
    let ty = op.apply(space, y)?;
    let delta = space.quasilinearization(x, y, &tx, &ty)?;
    Ok(2.0 * (1.0 - alpha) * delta - space.distance_sq(&tx, &ty)? - (1.0 - 2.0 * alpha) * space.distance_sq(x, y)?)
}

/// Checks `d(Ty, y) ≤ tolerance` and returns the displacement.
pub fn ensure_fixed(space: &Space, op: &Operator, y: &Point) -> Result<f64> {
    let ty = op.apply(space, y)?;
    let disp = space.distance(&ty, y)?;
    if disp > space.check_tol() {
        return Err(Error::NotAFixedPoint(disp));
    }
    Ok(disp)
}

/// `d(x,y)² − ((1−α)/α) d(x,Tx)² − d(Tx,y)²` for a fixed point `y` of `T`.
pub fn quasi_firm_defect(space: &Space, op: &Operator, alpha: f64, x: &Point, y: &Point) -> Result<f64> {
    check_alpha(alpha)?;
    ensure_fixed(space, op, y)?;
    let tx = op.apply(space, x)?;
    Ok(space.distance_sq(x, y)? - (1.0 - alpha) / alpha * space.distance_sq(x, &tx)? - space.distance_sq(&tx, y)?)
}

/// Constant of `TS` for quasi α-firm `S` and `T`:
/// `(α_S + α_T − 2α_Sα_T) / (1 − α_Sα_T)`.
pub fn composition_alpha(alpha_s: f64, alpha_t: f64) -> Result<f64> {
    check_alpha(alpha_s)?;
    check_alpha(alpha_t)?;
    Ok((alpha_s + alpha_t - 2.0 * alpha_s * alpha_t) / (1.0 - alpha_s * alpha_t))
}

/// Left fold of [`composition_alpha`] over the constants of `T₁, T₂, …`.
pub fn composition_alpha_fold(alphas: &[f64]) -> Result<f64> {
    let (first, rest) = alphas.split_first().ok_or_else(|| Error::Domain("no constants to fold".into()))?;
    check_alpha(*first)?;
    rest.iter().try_fold(*first, |acc, a| composition_alpha(acc, *a))
}

/// `τ = (1−α_S)/α_S + (1−α_T)/α_T`.
pub fn tau_value(alpha_s: f64, alpha_t: f64) -> Result<f64> {
    check_alpha(alpha_s)?;
    check_alpha(alpha_t)?;
    Ok((1.0 - alpha_s) / alpha_s + (1.0 - alpha_t) / alpha_t)
}

/// Constant of a convex combination of quasi α-firm operators: the largest one.
pub fn combination_alpha(alphas: &[f64]) -> Result<f64> {
    if alphas.is_empty() {
        return Err(Error::Domain("no constants given".into()));
    }
    for a in alphas {
        check_alpha(*a)?;
    }
    Ok(alphas.iter().copied().fold(f64::MIN, f64::max))
}

/// The four auxiliary quantities of the composition lemma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lmuv {
    pub l: f64,
    pub m: f64,
    pub u: f64,
    pub v: f64,
}

pub fn lmuv_values(space: &Space, s: &Operator, t: &Operator, x: &Point, y: &Point) -> Result<Lmuv> {
    let (sx, sy) = (s.apply(space, x)?, s.apply(space, y)?);
    let (tsx, tsy) = (t.apply(space, &sx)?, t.apply(space, &sy)?);
    let d_xy = space.distance_sq(x, y)?;
    let d_s = space.distance_sq(&sx, &sy)?;
    let d_ts = space.distance_sq(&tsx, &tsy)?;
    let delta_s = space.quasilinearization(x, y, &sx, &sy)?;
    let delta_t = space.quasilinearization(&sx, &sy, &tsx, &tsy)?;
    let delta_ts = space.quasilinearization(x, y, &tsx, &tsy)?;
    Ok(Lmuv {
        l: d_xy - 2.0 * delta_s + d_s,
        m: d_s - 2.0 * delta_t + d_ts,
        u: delta_ts + d_s - delta_s - delta_t,
        v: d_xy - 2.0 * delta_ts + d_ts,
    })
}

/// `c_S² L + c_T² M + 2 c_S c_T U` with `c = (1−α)/(τα)`; nonnegative values
/// support the hypothesis of the composition lemma at `(x, y)`.
pub fn composition_condition_defect(
    space: &Space,
    s: &Operator,
    t: &Operator,
    alpha_s: f64,
    alpha_t: f64,
    x: &Point,
    y: &Point,
) -> Result<f64> {
    let tau = tau_value(alpha_s, alpha_t)?;
    let cs = (1.0 - alpha_s) / (tau * alpha_s);
    let ct = (1.0 - alpha_t) / (tau * alpha_t);
    let q = lmuv_values(space, s, t, x, y)?;
    Ok(cs * cs * q.l + ct * ct * q.m + 2.0 * cs * ct * q.u)
}

/// Smallest `φ(tᵢ) − φ(tᵢ₊₁)` over a grid, with `φ(t) = d(x_t, y_t)`,
/// `x_t = (1−t)x ⊕ tTx`, `y_t = (1−t)y ⊕ tTy`. Nonnegative values mean `φ`
/// is nonincreasing on the grid (the older notion of firm nonexpansiveness).
pub fn phi_monotonicity_defect(space: &Space, op: &Operator, x: &Point, y: &Point, grid: usize) -> Result<f64> {
    if grid < 2 {
        return Err(Error::Domain("grid needs at least two nodes".into()));
    }
    let (tx, ty) = (op.apply(space, x)?, op.apply(space, y)?);
    let phi = |t: f64| -> Result<f64> {
        space.distance(&space.geodesic_point(x, &tx, t)?, &space.geodesic_point(y, &ty, t)?)
    };
    let mut prev = phi(0.0)?;
    let mut worst = f64::INFINITY;
    for i in 1..grid {
        let cur = phi(i as f64 / (grid - 1) as f64)?;
        worst = worst.min(prev - cur);
        prev = cur;
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateScope {
    Full,
    QuasiOnly(Vec<Point>),
}

/// Sampled evidence that an operator is (quasi) α-firmly nonexpansive.
#[derive(Debug, Clone)]
pub struct AlphaCertificate {
    pub operator: String,
    pub alpha: f64,
    pub scope: CertificateScope,
    pub samples: usize,
    pub seed: u64,
    pub worst_defect: f64,
    pub witness: Witness,
    pub tolerance: f64,
    pub passed: bool,
}

impl AlphaCertificate {
    pub fn report_line(&self) -> String {
        let scope = match &self.scope {
            CertificateScope::Full => "full".to_string(),
            CertificateScope::QuasiOnly(f) => format!("quasi({} fixed points)", f.len()),
        };
        format!(
            "operator={}, alpha={:?}, scope={}, samples={}, seed={}, worst_defect={:.16e}, pass={}",
            self.operator, self.alpha, scope, self.samples, self.seed, self.worst_defect, self.passed
        )
    }
}

/// Samples `samples` inputs and records the worst α-firmness defect. For
/// quasi scope the second argument cycles through the supplied fixed points,
/// each validated by one application of the operator.
pub fn certify_alpha(
    space: &Space,
    op: &Operator,
    alpha: f64,
    scope: CertificateScope,
    samples: usize,
    seed: u64,
) -> Result<AlphaCertificate> {
    check_alpha(alpha)?;
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let (worst_defect, witness) = match &scope {
        CertificateScope::Full => min_defect(samples, seed, |rng| {
            let x = sample_point(space, rng);
            let y = sample_point(space, rng);
            let d = alpha_firm_defect(space, op, alpha, &x, &y)?;
            Ok((d, Witness::points(vec![x, y])))
        })?,
        CertificateScope::QuasiOnly(fixed) => {
            if fixed.is_empty() {
                return Err(Error::Domain("quasi scope needs at least one fixed point".into()));
            }
            for y in fixed {
                ensure_fixed(space, op, y)?;
            }
            min_defect(samples, seed, |rng| {
                let x = sample_point(space, rng);
                let y = &fixed[rng.random_range(0..fixed.len())];
                let d = quasi_firm_defect(space, op, alpha, &x, y)?;
                Ok((d, Witness::points(vec![x, y.clone()])))
            })?
        }
    };
    let tolerance = space.check_tol();
    Ok(AlphaCertificate {
        operator: op.name(),
        alpha,
        scope,
        samples,
        seed,
        worst_defect,
        witness,
        tolerance,
        passed: worst_defect >= -tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::MetricTree;

    fn e(v: &[f64]) -> Point {
        Point::euclidean(v.to_vec())
    }

    fn lower_half(space: &Space) -> Operator {
        Operator::projection(ConvexSet::halfspace(space, "v<=0", vec![0.0, 1.0], 0.0).unwrap())
    }

    fn left_half(space: &Space) -> Operator {
        Operator::projection(ConvexSet::halfspace(space, "u<=0", vec![1.0, 0.0], 0.0).unwrap())
    }

    #[test]
    fn apply_examples() {
        let e2 = Space::euclidean(2);
        assert_eq!(Operator::identity().apply(&e2, &e(&[2.0, 3.0])).unwrap(), e(&[2.0, 3.0]));
        assert_eq!(lower_half(&e2).apply(&e2, &e(&[1.0, 1.0])).unwrap(), e(&[1.0, 0.0]));
        let avg = Operator::combination(vec![0.5, 0.5], vec![lower_half(&e2), left_half(&e2)]).unwrap();
        assert_eq!(avg.apply(&e2, &e(&[1.0, 1.0])).unwrap(), e(&[0.5, 0.5]));
        let c = Operator::constant(e(&[7.0, 7.0]));
        assert_eq!(c.apply(&e2, &e(&[0.0, 1.0])).unwrap(), e(&[7.0, 7.0]));
    }

    #[test]
    fn composition_applies_right_to_left() {
        let e1 = Space::euclidean(1);
        let double = Operator::pointwise("double", |p| match p {
            Point::Euclidean(v) => Point::Euclidean(vec![2.0 * v[0]]),
            _ => unreachable!(),
        });
        let shift = Operator::pointwise("shift", |p| match p {
            Point::Euclidean(v) => Point::Euclidean(vec![v[0] + 1.0]),
            _ => unreachable!(),
        });
        let ts = Operator::compose(vec![double, shift]).unwrap();
        assert_eq!(ts.apply(&e1, &e(&[1.0])).unwrap(), e(&[4.0]));
        assert!(Operator::compose(vec![]).is_err());
    }

    #[test]
    fn discrepancy_examples() {
        let e2 = Space::euclidean(2);
        let (x, y) = (e(&[1.0, 1.0]), e(&[-1.0, 2.0]));
        let d2 = e2.distance_sq(&x, &y).unwrap();
        assert!((discrepancy(&e2, &Operator::identity(), &x, &y).unwrap() - d2).abs() < 1e-14);
        assert_eq!(discrepancy(&e2, &Operator::constant(e(&[3.0, 0.0])), &x, &y).unwrap(), 0.0);
        assert_eq!(discrepancy(&e2, &lower_half(&e2), &x, &y).unwrap(), 4.0);
        assert_eq!(discrepancy(&e2, &lower_half(&e2), &y, &x).unwrap(), 4.0);
    }

    #[test]
    fn alpha_firm_defect_examples() {
        let e2 = Space::euclidean(2);
        let (x, y) = (e(&[1.0, 1.0]), e(&[-1.0, 2.0]));
        for alpha in [0.1, 0.5, 0.9] {
            assert!(alpha_firm_defect(&e2, &Operator::identity(), alpha, &x, &y).unwrap().abs() < 1e-13);
        }
        let c = Operator::constant(e(&[0.0, 0.0]));
        assert_eq!(alpha_firm_defect(&e2, &c, 0.5, &x, &y).unwrap(), 0.0);
        assert_eq!(alpha_firm_defect(&e2, &lower_half(&e2), 0.5, &x, &y).unwrap(), 0.0);
        assert!(matches!(alpha_firm_defect(&e2, &c, 1.0, &x, &y), Err(Error::Domain(_))));
    }

    #[test]
    fn quasi_firm_defect_examples() {
        let e2 = Space::euclidean(2);
        let p = lower_half(&e2);
        let o = e(&[0.0, 0.0]);
        assert_eq!(quasi_firm_defect(&e2, &p, 0.5, &o, &o).unwrap(), 0.0);
        assert_eq!(quasi_firm_defect(&e2, &p, 0.5, &e(&[0.0, 2.0]), &o).unwrap(), 0.0);
        assert_eq!(quasi_firm_defect(&e2, &p, 0.5, &e(&[3.0, 1.0]), &o).unwrap(), 0.0);
        assert!(matches!(quasi_firm_defect(&e2, &p, 0.5, &o, &e(&[0.0, 1.0])), Err(Error::NotAFixedPoint(_))));
    }

    #[test]
    fn alpha_calculus() {
        assert!((composition_alpha(0.5, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((composition_alpha(1.0 / 3.0, 0.5).unwrap() - 0.6).abs() < 1e-15);
        assert!((composition_alpha_fold(&[0.5, 0.5, 0.5]).unwrap() - 0.75).abs() < 1e-15);
        assert!(composition_alpha(0.0, 0.5).is_err());
        assert_eq!(tau_value(0.5, 0.5).unwrap(), 2.0);
        assert!((tau_value(1.0 / 3.0, 0.5).unwrap() - 3.0).abs() < 1e-15);
        assert!((tau_value(0.9, 0.9).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(combination_alpha(&[0.5, 0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(combination_alpha(&[0.3, 0.7]).unwrap(), 0.7);
        assert_eq!(combination_alpha(&[0.4]).unwrap(), 0.4);
        assert!(combination_alpha(&[]).is_err());
        assert!(combination_alpha(&[0.3, 1.2]).is_err());
    }

    #[test]
    fn lmuv_examples() {
        let e2 = Space::euclidean(2);
        let (x, y) = (e(&[1.0, 1.0]), e(&[0.0, 0.0]));
        let id = Operator::identity();
        let zero = lmuv_values(&e2, &id, &id, &x, &e(&[-2.0, 0.5])).unwrap();
        for q in [zero.l, zero.m, zero.u, zero.v] {
            assert!(q.abs() < 1e-14);
        }
        let p = lower_half(&e2);
        assert_eq!(lmuv_values(&e2, &p, &id, &x, &y).unwrap(), Lmuv { l: 1.0, m: 0.0, u: 0.0, v: 1.0 });
        assert_eq!(lmuv_values(&e2, &p, &p, &x, &y).unwrap(), Lmuv { l: 1.0, m: 0.0, u: 0.0, v: 1.0 });
    }

    #[test]
    fn composition_condition_examples() {
        let e2 = Space::euclidean(2);
        let (x, y) = (e(&[1.0, 1.0]), e(&[0.0, 0.0]));
        let id = Operator::identity();
        assert!(composition_condition_defect(&e2, &id, &id, 0.5, 0.5, &x, &e(&[3.0, 1.0])).unwrap().abs() < 1e-14);
        let p = lower_half(&e2);
        assert_eq!(composition_condition_defect(&e2, &p, &p, 0.5, 0.5, &x, &y).unwrap(), 0.25);
        let q = left_half(&e2);
        assert_eq!(composition_condition_defect(&e2, &p, &q, 0.5, 0.5, &x, &y).unwrap(), 0.5);
    }

    #[test]
    fn projections_satisfy_phi_monotonicity() {
        let tri = Space::tree(MetricTree::tripod());
        let leg = Operator::projection(ConvexSet::subtree(&tri, "leg a", &["o", "a"], &[]).unwrap());
        let b = tri.vertex("b").unwrap();
        let c = tri.vertex("c").unwrap();
        assert!(phi_monotonicity_defect(&tri, &leg, &b, &c, 17).unwrap() >= -1e-12);
    }

    #[test]
    fn certificates() {
        let e2 = Space::euclidean(2);
        let p = lower_half(&e2);
        let cert = certify_alpha(&e2, &p, 0.5, CertificateScope::Full, 500, 1).unwrap();
        assert!(cert.passed, "{}", cert.report_line());
        let bogus = certify_alpha(&e2, &p, 0.1, CertificateScope::Full, 500, 1).unwrap();
        assert!(!bogus.passed);
        let w = &bogus.witness.points;
        let again = alpha_firm_defect(&e2, &p, 0.1, &w[0], &w[1]).unwrap();
        assert_eq!(again, bogus.worst_defect);
        let quasi = certify_alpha(&e2, &p, 0.5, CertificateScope::QuasiOnly(vec![e(&[0.0, -1.0])]), 300, 2).unwrap();
        assert!(quasi.passed);
        assert!(quasi.report_line().contains("scope=quasi(1 fixed points)"));
        assert!(matches!(
            certify_alpha(&e2, &p, 0.5, CertificateScope::QuasiOnly(vec![e(&[0.0, 1.0])]), 10, 2),
            Err(Error::NotAFixedPoint(_))
        ));
    }
}
