//! Randomized certification of the CAT(0) inequalities.
//!
//! A check draws `samples` inputs, sample `i` from the ChaCha8 stream `i` of
//! the check seed, evaluates a defect that is nonnegative whenever the
//! inequality holds and keeps the smallest one. Samples run on the rayon
//! pool; the reduction picks the smallest defect and, among equal defects,
//! the lowest sample index, so reports do not depend on scheduling.

use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::barycenter::{frechet_mean, variance_defect, BarycenterConfig, WeightedPoints};
use crate::error::{Error, Result};
use crate::iteration::{averaged_projections, cyclic_projections, StopRule};
use crate::operators::{
    alpha_firm_defect, combination_alpha, composition_alpha_fold, discrepancy, ensure_fixed, quasi_firm_defect,
    Operator, OperatorKind,
};
use crate::sampling::{rng_for, sample_point, sample_weights, SampleRng};
use crate::sets::{projection_defect, ConvexSet};
use crate::space::{Point, Space};
use crate::tree::MetricTree;

/// Slack for checks whose evaluation goes through an iterative barycenter.
pub const BARYCENTER_TOL: f64 = 1e-6;

/// Inputs at which a defect was evaluated.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Witness {
    pub points: Vec<Point>,
    pub t: Option<f64>,
    pub weights: Option<Vec<f64>>,
}

impl Witness {
    pub fn points(points: Vec<Point>) -> Self {
        Self { points, ..Self::default() }
    }

    fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    fn with_weights(mut self, w: Vec<f64>) -> Self {
        self.weights = Some(w);
        self
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        write!(f, "points=[{}]", pts.join("; "))?;
        if let Some(t) = self.t {
            write!(f, " t={t:?}")?;
        }
        if let Some(w) = &self.weights {
            write!(f, " weights={w:?}")?;
        }
        Ok(())
    }
}

fn worse(a: f64, b: f64) -> bool {
    (a.is_nan() && !b.is_nan()) || a < b
}

/// Runs `f` on `samples` independent streams of `seed` and returns the
/// smallest defect with its witness. NaN counts as the worst possible
/// defect. The first error by sample index is returned if any sample fails.
pub fn min_defect<F>(samples: usize, seed: u64, f: F) -> Result<(f64, Witness)>
where
    F: Fn(&mut SampleRng) -> Result<(f64, Witness)> + Sync,
{
    type Acc = (usize, Result<(f64, Witness)>);
    let pick = |a: Acc, b: Acc| -> Acc {
        let (first, second) = if a.0 <= b.0 { (a, b) } else { (b, a) };
        match (&first.1, &second.1) {
            (Err(_), _) => first,
            (_, Err(_)) => second,
            (Ok((da, _)), Ok((db, _))) => {
                if worse(*db, *da) {
                    second
                } else {
                    first
                }
            }
        }
    };
    (0..samples)
        .into_par_iter()
        .map(|i| (i, f(&mut rng_for(seed, i as u64))))
        .reduce_with(pick)
        .map(|(_, r)| r)
        .unwrap_or_else(|| Err(Error::Spec("samples must be >= 1".into())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FejerAlgorithm {
    Cyclic,
    Averaged,
}

#[derive(Debug, Clone)]
pub enum CheckKind {
    /// `cat0_defect(x, y, z, t) ≥ 0`.
    Cat0,
    /// `|⟨→xz, →yw⟩| ≤ d(x,z) d(y,w)`.
    CauchySchwarz,
    /// `d(Px, Py)² ≤ Δ_P(x, y)`.
    ProjectionFirm { set: ConvexSet },
    /// `d(x,y)² ≥ d(x,Px)² + d(Px,y)²` for `y ∈ C`.
    ProjectionIneq { set: ConvexSet },
    /// α-firmness over all pairs.
    AlphaFirm { op: Operator, alpha: f64 },
    /// `d(Tx, Ty) ≤ d(x, y)`.
    Nonexpansive { op: Operator },
    /// Quasi α-firmness against the given fixed points.
    QuasiFirm { op: Operator, alpha: f64, fixed_points: Vec<Point> },
    /// Quasi firmness of `T₁T₂…Tₖ` with the folded composition constant;
    /// each factor carries its own constant, `witness` is a common fixed point.
    CompositionTheorem { factors: Vec<(Operator, f64)>, witness: Point },
    /// Quasi firmness of `w₁T₁ ⊕ … ⊕ wₖTₖ` with constant `max αᵢ`.
    CombinationTheorem { ops: Vec<(Operator, f64)>, weights: Vec<f64>, witness: Point },
    /// Geodesics between fixed points stay fixed; fixed points are drawn by
    /// projecting samples onto `fixed_set`.
    FixConvexity { op: Operator, fixed_set: ConvexSet },
    /// `F(y) − F(x*) ≥ d(x*, y)²` for random instances of `points` points.
    VarianceIneq { points: usize },
    /// Fejér monotonicity of a projection run from a random start against
    /// `witness ∈ ⋂ sets`.
    FejerRun { sets: Vec<ConvexSet>, algorithm: FejerAlgorithm, witness: Point, max_iter: usize },
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Cat0 => "Cat0",
            CheckKind::CauchySchwarz => "CauchySchwarz",
            CheckKind::ProjectionFirm { .. } => "ProjectionFirm",
            CheckKind::ProjectionIneq { .. } => "ProjectionIneq",
            CheckKind::AlphaFirm { .. } => "AlphaFirm",
            CheckKind::Nonexpansive { .. } => "Nonexpansive",
            CheckKind::QuasiFirm { .. } => "QuasiFirm",
            CheckKind::CompositionTheorem { .. } => "CompositionTheorem",
            CheckKind::CombinationTheorem { .. } => "CombinationTheorem",
            CheckKind::FixConvexity { .. } => "FixConvexity",
            CheckKind::VarianceIneq { .. } => "VarianceIneq",
            CheckKind::FejerRun { .. } => "FejerRun",
        }
    }

    fn subject(&self) -> Option<String> {
        match self {
            CheckKind::ProjectionFirm { set } | CheckKind::ProjectionIneq { set } => Some(set.name.clone()),
            CheckKind::AlphaFirm { op, alpha } | CheckKind::QuasiFirm { op, alpha, .. } => {
                Some(format!("{} alpha={alpha}", op.name()))
            }
            CheckKind::Nonexpansive { op } | CheckKind::FixConvexity { op, .. } => Some(op.name()),
            CheckKind::CompositionTheorem { factors, .. } => {
                Some(factors.iter().map(|(o, _)| o.name()).collect::<Vec<_>>().join("∘"))
            }
            CheckKind::CombinationTheorem { ops, .. } => {
                Some(ops.iter().map(|(o, _)| o.name()).collect::<Vec<_>>().join(" ⊕ "))
            }
            CheckKind::VarianceIneq { points } => Some(format!("{points} points")),
            CheckKind::FejerRun { algorithm, sets, .. } => Some(format!("{algorithm:?} over {} sets", sets.len())),
            CheckKind::Cat0 | CheckKind::CauchySchwarz => None,
        }
    }
}

fn op_uses_barycenter(op: &Operator) -> bool {
    match op.kind() {
        OperatorKind::ConvexCombination { .. } => true,
        OperatorKind::Composition(f) => f.iter().any(op_uses_barycenter),
        _ => false,
    }
}

#[derive(Debug, Clone)]
pub struct CheckSpec {
    pub kind: CheckKind,
    pub space: Space,
    pub samples: usize,
    pub seed: u64,
}

impl CheckSpec {
    pub fn new(kind: CheckKind, space: Space, samples: usize, seed: u64) -> Self {
        Self { kind, space, samples, seed }
    }

    /// Short human-readable identifier: kind, subject and model.
    pub fn label(&self) -> String {
        match self.kind.subject() {
            Some(s) => format!("{} {} on {}", self.kind.name(), s, self.space.describe()),
            None => format!("{} on {}", self.kind.name(), self.space.describe()),
        }
    }

    pub fn tolerance(&self) -> f64 {
        let barycentric = match &self.kind {
            CheckKind::CombinationTheorem { .. } | CheckKind::VarianceIneq { .. } => true,
            CheckKind::FejerRun { algorithm, .. } => *algorithm == FejerAlgorithm::Averaged,
            CheckKind::AlphaFirm { op, .. }
            | CheckKind::Nonexpansive { op }
            | CheckKind::QuasiFirm { op, .. }
            | CheckKind::FixConvexity { op, .. } => op_uses_barycenter(op),
            CheckKind::CompositionTheorem { factors, .. } => factors.iter().any(|(o, _)| op_uses_barycenter(o)),
            _ => false,
        };
        if barycentric {
            BARYCENTER_TOL.max(self.space.check_tol())
        } else {
            self.space.check_tol()
        }
    }

    /// Checks that the payload fits the kind and the space.
    pub fn validate(&self) -> Result<()> {
        let space = &self.space;
        if self.samples == 0 {
            return Err(Error::Spec("samples must be >= 1".into()));
        }
        let spec_err = |e: Error| Error::Spec(format!("{}: {e}", self.kind.name()));
        let alpha_ok = |a: f64| {
            if a > 0.0 && a < 1.0 {
                Ok(())
            } else {
                Err(Error::Spec(format!("alpha = {a} must lie in (0, 1)")))
            }
        };
        match &self.kind {
            CheckKind::Cat0 | CheckKind::CauchySchwarz => Ok(()),
            CheckKind::ProjectionFirm { set } | CheckKind::ProjectionIneq { set } => {
                set.validate(space).map_err(spec_err)
            }
            CheckKind::AlphaFirm { alpha, .. } => alpha_ok(*alpha),
            CheckKind::Nonexpansive { .. } => Ok(()),
            CheckKind::QuasiFirm { op, alpha, fixed_points } => {
                alpha_ok(*alpha)?;
                if fixed_points.is_empty() {
                    return Err(Error::Spec("QuasiFirm needs at least one fixed point".into()));
                }
                fixed_points.iter().try_for_each(|y| ensure_fixed(space, op, y).map(|_| ()).map_err(spec_err))
            }
            CheckKind::CompositionTheorem { factors, witness } => {
                if factors.is_empty() {
                    return Err(Error::Spec("CompositionTheorem needs at least one factor".into()));
                }
                for (op, a) in factors {
                    alpha_ok(*a)?;
                    ensure_fixed(space, op, witness).map_err(spec_err)?;
                }
                Ok(())
            }
            CheckKind::CombinationTheorem { ops, weights, witness } => {
                if ops.is_empty() || ops.len() != weights.len() {
                    return Err(Error::Spec(format!(
                        "CombinationTheorem needs one weight per operator ({} weights, {} operators)",
                        weights.len(),
                        ops.len()
                    )));
                }
                crate::barycenter::validate_weights(weights).map_err(spec_err)?;
                for (op, a) in ops {
                    alpha_ok(*a)?;
                    ensure_fixed(space, op, witness).map_err(spec_err)?;
                }
                Ok(())
            }
            CheckKind::FixConvexity { fixed_set, .. } => fixed_set.validate(space).map_err(spec_err),
            CheckKind::VarianceIneq { points } => {
                if *points == 0 {
                    Err(Error::Spec("VarianceIneq needs at least one point".into()))
                } else {
                    Ok(())
                }
            }
            CheckKind::FejerRun { sets, witness, max_iter, .. } => {
                if sets.is_empty() || *max_iter == 0 {
                    return Err(Error::Spec("FejerRun needs sets and max_iter >= 1".into()));
                }
                for s in sets {
                    s.validate(space).map_err(spec_err)?;
                    if !s.contains(space, witness).map_err(spec_err)? {
                        return Err(Error::Spec(format!("FejerRun witness is not in `{}`", s.name)));
                    }
                }
                Ok(())
            }
        }
    }

    /// Draws one input for this check.
    fn draw(&self, rng: &mut SampleRng) -> Result<Witness> {
        let space = &self.space;
        let pts = |n: usize, rng: &mut SampleRng| -> Vec<Point> { (0..n).map(|_| sample_point(space, rng)).collect() };
        Ok(match &self.kind {
            CheckKind::Cat0 => {
                let p = pts(3, rng);
                Witness::points(p).with_t(rng.random::<f64>())
            }
            CheckKind::CauchySchwarz => Witness::points(pts(4, rng)),
            CheckKind::ProjectionFirm { .. } | CheckKind::AlphaFirm { .. } | CheckKind::Nonexpansive { .. } => {
                Witness::points(pts(2, rng))
            }
            CheckKind::ProjectionIneq { set } => {
                let p = pts(2, rng);
                let y = set.project(space, &p[1])?;
                Witness::points(vec![p[0].clone(), y])
            }
            CheckKind::QuasiFirm { fixed_points, .. } => {
                let x = sample_point(space, rng);
                let y = fixed_points[rng.random_range(0..fixed_points.len())].clone();
                Witness::points(vec![x, y])
            }
            CheckKind::CompositionTheorem { witness, .. } | CheckKind::CombinationTheorem { witness, .. } => {
                Witness::points(vec![sample_point(space, rng), witness.clone()])
            }
            CheckKind::FixConvexity { fixed_set, .. } => {
                let p = pts(2, rng);
                let a = fixed_set.project(space, &p[0])?;
                let b = fixed_set.project(space, &p[1])?;
                Witness::points(vec![a, b]).with_t(rng.random::<f64>())
            }
            CheckKind::VarianceIneq { points } => {
                // instance points first, the challenger last
                let p = pts(points + 1, rng);
                Witness::points(p).with_weights(sample_weights(*points, rng))
            }
            CheckKind::FejerRun { .. } => Witness::points(pts(1, rng)),
        })
    }

    /// Defect of this check at `w`; nonnegative when the inequality holds.
    pub fn evaluate(&self, w: &Witness) -> Result<f64> {
        let space = &self.space;
        let p = &w.points;
        let need = |n: usize| {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::Spec(format!("{} witness needs {n} points, got {}", self.kind.name(), p.len())))
            }
        };
        let t = || w.t.ok_or_else(|| Error::Spec(format!("{} witness needs t", self.kind.name())));
        match &self.kind {
            CheckKind::Cat0 => {
                need(3)?;
                space.cat0_defect(&p[0], &p[1], &p[2], t()?)
            }
            CheckKind::CauchySchwarz => {
                need(4)?;
                let q = space.quasilinearization(&p[0], &p[2], &p[1], &p[3])?;
                Ok(space.distance(&p[0], &p[2])? * space.distance(&p[1], &p[3])? - q.abs())
            }
            CheckKind::ProjectionFirm { set } => {
                need(2)?;
                let op = Operator::projection(set.clone());
                let (px, py) = (set.project(space, &p[0])?, set.project(space, &p[1])?);
                Ok(discrepancy(space, &op, &p[0], &p[1])? - space.distance_sq(&px, &py)?)
            }
            CheckKind::ProjectionIneq { set } => {
                need(2)?;
                projection_defect(space, set, &p[0], &p[1])
            }
            CheckKind::AlphaFirm { op, alpha } => {
                need(2)?;
                alpha_firm_defect(space, op, *alpha, &p[0], &p[1])
            }
            CheckKind::Nonexpansive { op } => {
                need(2)?;
                let (tx, ty) = (op.apply(space, &p[0])?, op.apply(space, &p[1])?);
                Ok(space.distance(&p[0], &p[1])? - space.distance(&tx, &ty)?)
            }
            CheckKind::QuasiFirm { op, alpha, .. } => {
                need(2)?;
                quasi_firm_defect(space, op, *alpha, &p[0], &p[1])
            }
            CheckKind::CompositionTheorem { factors, .. } => {
                need(2)?;
                let alphas: Vec<f64> = factors.iter().map(|(_, a)| *a).collect();
                let alpha = composition_alpha_fold(&alphas)?;
                let op = Operator::compose(factors.iter().map(|(o, _)| o.clone()).collect())?;
                quasi_firm_defect(space, &op, alpha, &p[0], &p[1])
            }
            CheckKind::CombinationTheorem { ops, weights, .. } => {
                need(2)?;
                let alphas: Vec<f64> = ops.iter().map(|(_, a)| *a).collect();
                let alpha = combination_alpha(&alphas)?;
                let op = Operator::combination(weights.clone(), ops.iter().map(|(o, _)| o.clone()).collect())?;
                quasi_firm_defect(space, &op, alpha, &p[0], &p[1])
            }
            CheckKind::FixConvexity { op, .. } => {
                need(2)?;
                let m = space.geodesic_point(&p[0], &p[1], t()?)?;
                let mut worst: f64 = 0.0;
                for q in [&p[0], &p[1], &m] {
                    worst = worst.max(space.distance(q, &op.apply(space, q)?)?);
                }
                Ok(-worst)
            }
            CheckKind::VarianceIneq { points } => {
                need(points + 1)?;
                let weights =
                    w.weights.clone().ok_or_else(|| Error::Spec("VarianceIneq witness needs weights".into()))?;
                let wp = WeightedPoints::new(space, p[..*points].to_vec(), weights)?;
                let mean = frechet_mean(space, &wp, &BarycenterConfig::from_tolerances(space.tol()))?;
                variance_defect(space, &wp, &mean, &p[*points])
            }
            CheckKind::FejerRun { sets, algorithm, witness, max_iter } => {
                need(1)?;
                let rule = StopRule { max_iter: *max_iter, ..StopRule::default() };
                let trace = match algorithm {
                    FejerAlgorithm::Cyclic => cyclic_projections(space, sets, &p[0], &rule, Some(witness))?,
                    FejerAlgorithm::Averaged => averaged_projections(
                        space,
                        sets,
                        None,
                        &p[0],
                        &rule,
                        &BarycenterConfig::from_tolerances(space.tol()),
                        Some(witness),
                    )?,
                };
                Ok(trace.worst_fejer_gap())
            }
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub label: String,
    pub kind: &'static str,
    pub samples: usize,
    pub seed: u64,
    pub worst_defect: f64,
    /// Inputs achieving `worst_defect`.
    pub witness: Witness,
    pub tolerance: f64,
    pub passed: bool,
    pub elapsed: Duration,
}

pub fn run_check(spec: &CheckSpec) -> Result<CheckResult> {
    spec.validate()?;
    let start = Instant::now();
    let (worst_defect, witness) = min_defect(spec.samples, spec.seed, |rng| {
        let w = spec.draw(rng)?;
        Ok((spec.evaluate(&w)?, w))
    })?;
    let tolerance = spec.tolerance();
    Ok(CheckResult {
        label: spec.label(),
        kind: spec.kind.name(),
        samples: spec.samples,
        seed: spec.seed,
        worst_defect,
        witness,
        tolerance,
        passed: worst_defect >= -tolerance,
        elapsed: start.elapsed(),
    })
}

/// Re-evaluates the defect at a recorded witness.
pub fn evaluate_witness(spec: &CheckSpec, witness: &Witness) -> Result<f64> {
    spec.evaluate(witness)
}

#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub seed: Option<u64>,
    pub entries: Vec<CheckResult>,
    pub wall_time: Duration,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.entries.iter().filter(|e| !e.passed)
    }

    /// Columns `kind,samples,seed,worst_defect,pass`; the kind field holds
    /// the check label and is quoted when it contains a comma. Timing is
    /// left out so equal runs give equal bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,samples,seed,worst_defect,pass\n");
        for e in &self.entries {
            writeln!(out, "{},{},{},{:.16e},{}", csv_field(&e.label), e.samples, e.seed, e.worst_defect, e.passed)
                .expect("writing to a String");
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let pass = self.entries.iter().filter(|e| e.passed).count();
        if let Some(seed) = self.seed {
            writeln!(out, "seed {seed}").unwrap();
        }
        for e in &self.entries {
            writeln!(
                out,
                "[{}] {} samples={} worst_defect={:.6e} tol={:e} ({:.1?})",
                if e.passed { "PASS" } else { "FAIL" },
                e.label,
                e.samples,
                e.worst_defect,
                e.tolerance,
                e.elapsed
            )
            .unwrap();
            if !e.passed {
                writeln!(out, "       witness: {}", e.witness).unwrap();
            }
        }
        writeln!(out, "{pass}/{} checks passed in {:.2?}", self.entries.len(), self.wall_time).unwrap();
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs every check in order; `seed` is recorded as the suite seed.
pub fn run_suite(specs: &[CheckSpec], seed: Option<u64>) -> Result<CertificateReport> {
    if specs.is_empty() {
        return Err(Error::Spec("empty suite".into()));
    }
    let start = Instant::now();
    let entries = specs.iter().map(run_check).collect::<Result<Vec<_>>>()?;
    Ok(CertificateReport { seed, entries, wall_time: start.elapsed() })
}

/// Checks that all in-scope inequalities hold on the shipped models:
/// Euclidean(3), Hyperboloid(2), the tripod, the caterpillar and
/// Euclidean(1) × tripod. Check `k` runs with seed `seed + k`.
pub fn default_suite(seed: u64) -> Result<Vec<CheckSpec>> {
    let e2 = Space::euclidean(2);
    let e3 = Space::euclidean(3);
    let h2 = Space::hyperboloid(2);
    let tri = Space::tree(MetricTree::tripod());
    let cat = Space::tree(MetricTree::caterpillar());
    let prod = Space::product(&Space::euclidean(1), &tri);
    let models = [&e3, &h2, &tri, &cat, &prod];

    let e = |v: &[f64]| Point::euclidean(v.to_vec());
    let h_origin = h2.hyperboloid_point(vec![1.0, 0.0, 0.0])?;
    let proj = |s: &ConvexSet| Operator::projection(s.clone());

    let lower = ConvexSet::halfspace(&e2, "v<=0", vec![0.0, 1.0], 0.0)?;
    let left = ConvexSet::halfspace(&e2, "u<=0", vec![1.0, 0.0], 0.0)?;
    let diag = ConvexSet::halfspace(&e2, "u+v<=0", vec![1.0, 1.0], 0.0)?;
    let e_ball = ConvexSet::ball(&e2, "B((1,0),1)", e(&[1.0, 0.0]), 1.0)?;
    let h_lower = ConvexSet::hyperbolic_halfspace(&h2, "x1<=0", vec![0.0, 1.0, 0.0])?;
    let h_left = ConvexSet::hyperbolic_halfspace(&h2, "x2<=0", vec![0.0, 0.0, 1.0])?;
    let h_ball = ConvexSet::ball(&h2, "B(o,0.5)", h_origin.clone(), 0.5)?;
    let leg_a = ConvexSet::subtree(&tri, "leg a", &["o", "a"], &[])?;
    let leg_b = ConvexSet::subtree(&tri, "leg b", &["o", "b"], &[])?;
    let spur_c = ConvexSet::subtree(&tri, "o+c/2", &["o"], &[("o", "c", 0.5)])?;
    let cat_mid = ConvexSet::subtree(&cat, "s1-s2", &["s1", "s2"], &[("s1", "f1", 0.25)])?;
    let cat_end = ConvexSet::subtree(&cat, "s0-s1", &["s0", "s1"], &[])?;
    let origin = e(&[0.0, 0.0]);
    let o = tri.vertex("o")?;

    let mut kinds: Vec<(CheckKind, &Space, usize)> = Vec::new();
    for m in models {
        kinds.push((CheckKind::Cat0, m, 1000));
        kinds.push((CheckKind::CauchySchwarz, m, 1000));
    }
    for (set, space) in [
        (&lower, &e2),
        (&e_ball, &e2),
        (&h_lower, &h2),
        (&h_ball, &h2),
        (&leg_a, &tri),
        (&spur_c, &tri),
        (&cat_mid, &cat),
    ] {
        kinds.push((CheckKind::ProjectionFirm { set: set.clone() }, space, 1000));
        kinds.push((CheckKind::ProjectionIneq { set: set.clone() }, space, 1000));
    }
    kinds.push((CheckKind::AlphaFirm { op: proj(&cat_mid), alpha: 0.5 }, &cat, 1000));
    kinds.push((CheckKind::Nonexpansive { op: proj(&h_ball) }, &h2, 1000));
    kinds.push((CheckKind::QuasiFirm { op: proj(&lower), alpha: 0.5, fixed_points: vec![origin.clone()] }, &e2, 1000));
    kinds.push((
        CheckKind::CompositionTheorem {
            factors: vec![(proj(&left), 0.5), (proj(&lower), 0.5)],
            witness: origin.clone(),
        },
        &e2,
        1000,
    ));
    kinds.push((
        CheckKind::CompositionTheorem {
            factors: vec![(proj(&h_left), 0.5), (proj(&h_lower), 0.5)],
            witness: h_origin.clone(),
        },
        &h2,
        1000,
    ));
    kinds.push((
        CheckKind::CompositionTheorem {
            factors: vec![(proj(&leg_b), 0.5), (proj(&leg_a), 0.5), (proj(&spur_c), 0.5)],
            witness: o.clone(),
        },
        &tri,
        1000,
    ));
    kinds.push((
        CheckKind::CombinationTheorem {
            ops: vec![(proj(&lower), 0.5), (proj(&left), 0.5), (proj(&diag), 0.5)],
            weights: vec![0.25, 0.25, 0.5],
            witness: origin.clone(),
        },
        &e2,
        500,
    ));
    kinds.push((
        CheckKind::CombinationTheorem {
            ops: vec![(proj(&leg_a), 0.5), (proj(&leg_b), 0.5), (proj(&spur_c), 0.5)],
            weights: vec![1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0],
            witness: o.clone(),
        },
        &tri,
        500,
    ));
    let e_quadrant = ConvexSet::intersection(&e2, "third quadrant", vec![lower.clone(), left.clone()])?;
    kinds.push((
        CheckKind::FixConvexity { op: Operator::compose(vec![proj(&left), proj(&lower)])?, fixed_set: e_quadrant },
        &e2,
        500,
    ));
    kinds.push((
        CheckKind::FixConvexity {
            op: Operator::compose(vec![proj(&cat_end), proj(&cat_mid)])?,
            fixed_set: ConvexSet::intersection(&cat, "s1", vec![cat_end.clone(), cat_mid.clone()])?,
        },
        &cat,
        500,
    ));
    kinds.push((CheckKind::VarianceIneq { points: 4 }, &e3, 300));
    kinds.push((CheckKind::VarianceIneq { points: 3 }, &tri, 300));
    kinds.push((CheckKind::VarianceIneq { points: 3 }, &h2, 100));
    kinds.push((
        CheckKind::FejerRun {
            sets: vec![lower.clone(), diag.clone()],
            algorithm: FejerAlgorithm::Cyclic,
            witness: e(&[-1.0, -1.0]),
            max_iter: 60,
        },
        &e2,
        200,
    ));
    kinds.push((
        CheckKind::FejerRun {
            sets: vec![leg_a.clone(), leg_b.clone()],
            algorithm: FejerAlgorithm::Averaged,
            witness: o,
            max_iter: 20,
        },
        &tri,
        200,
    ));
    kinds.push((
        CheckKind::FejerRun {
            sets: vec![h_lower, h_left],
            algorithm: FejerAlgorithm::Cyclic,
            witness: h_origin,
            max_iter: 60,
        },
        &h2,
        200,
    ));

    Ok(kinds
        .into_iter()
        .enumerate()
        .map(|(k, (kind, space, samples))| CheckSpec::new(kind, space.clone(), samples, seed.wrapping_add(k as u64)))
        .collect())
}
