//! Fixed-point iteration drivers: plain Picard iteration `x_n = T x_{n−1}`,
//! cyclic projections and averaged projections, all recording an
//! [`IterationTrace`].

use std::fmt;
use std::io::{self, Write};

use crate::barycenter::{frechet_mean, validate_weights, BarycenterConfig, WeightedPoints};
use crate::error::{Error, Result};
use crate::operators::{ensure_fixed, Operator};
use crate::sets::ConvexSet;
use crate::space::{Point, Space};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_iter: usize,
    pub residual_tol: f64,
    pub stall_tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_iter: 1000, residual_tol: 1e-8, stall_tol: 1e-12 }
    }
}

impl StopRule {
    pub fn with_max_iter(max_iter: usize) -> Self {
        Self { max_iter, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIter,
    Stalled,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "Converged",
            StopReason::MaxIter => "MaxIter",
            StopReason::Stalled => "Stalled",
        })
    }
}

/// Where the Fejér gaps were measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Supplied,
    /// No witness was given; the final iterate stands in for one.
    FinalIterateProxy,
}

#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub points: Vec<Point>,
    /// `max_i d(x_n, C_i)` for projection methods, `d(x_n, T x_n)` for
    /// plain fixed-point iteration.
    pub residuals: Vec<f64>,
    /// `d(x_{n−1}, x_n)`; zero at `n = 0`.
    pub steps: Vec<f64>,
    /// `d(x_{n−1}, y*) − d(x_n, y*)`; zero at `n = 0`.
    pub fejer_gaps: Vec<f64>,
    pub witness: Point,
    pub witness_kind: WitnessKind,
    pub shadows: Option<Vec<Point>>,
    pub shadows_approximate: bool,
    /// Monitored gap `d(x_n, P_γ x̄_n) − d(x_n, x̄_n)` at termination.
    pub technical_gap: Option<f64>,
    pub stop_reason: StopReason,
}

impl IterationTrace {
    /// Number of iterations performed.
    pub fn iterations(&self) -> usize {
        self.points.len() - 1
    }

    pub fn last(&self) -> &Point {
        self.points.last().expect("trace holds x0")
    }

    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("trace holds x0")
    }

    pub fn worst_fejer_gap(&self) -> f64 {
        self.fejer_gaps.iter().copied().fold(0.0, f64::min)
    }

    pub fn fejer_violations(&self, tol: f64) -> usize {
        self.fejer_gaps.iter().filter(|g| **g < -tol).count()
    }

    /// CSV with columns `n,residual,fejer_gap,step,shadow_dist`; floats carry
    /// 17 significant digits and `shadow_dist` is empty without shadows.
    pub fn write_csv<W: Write>(&self, space: &Space, mut out: W) -> io::Result<()> {
        writeln!(out, "n,residual,fejer_gap,step,shadow_dist")?;
        for n in 0..self.points.len() {
            let shadow = match &self.shadows {
                Some(s) => {
                    let d = space
                        .distance(&self.points[n], &s[n])
                        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
                    format!("{d:.16e}")
                }
                None => String::new(),
            };
            writeln!(
                out,
                "{n},{:.16e},{:.16e},{:.16e},{shadow}",
                self.residuals[n], self.fejer_gaps[n], self.steps[n]
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self, space: &Space) -> String {
        let mut buf = Vec::new();
        self.write_csv(space, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

struct Recorder<'a> {
    space: &'a Space,
    witness: Option<Point>,
    points: Vec<Point>,
    residuals: Vec<f64>,
    steps: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(space: &'a Space, x0: Point, witness: Option<Point>) -> Self {
        Self { space, witness, points: vec![x0], residuals: Vec::new(), steps: vec![0.0] }
    }

    fn current(&self) -> &Point {
        self.points.last().expect("nonempty")
    }

    fn push(&mut self, x: Point) -> Result<f64> {
        let step = self.space.distance(self.current(), &x)?;
        self.points.push(x);
        self.steps.push(step);
        Ok(step)
    }

    fn finish(self, stop_reason: StopReason) -> Result<IterationTrace> {
        let (witness, witness_kind) = match self.witness {
            Some(w) => (w, WitnessKind::Supplied),
            None => (self.current().clone(), WitnessKind::FinalIterateProxy),
        };
        let dists = self.points.iter().map(|p| self.space.distance(p, &witness)).collect::<Result<Vec<_>>>()?;
        let mut fejer_gaps = vec![0.0];
        fejer_gaps.extend(dists.windows(2).map(|w| w[0] - w[1]));
        debug_assert_eq!(self.residuals.len(), self.points.len());
        Ok(IterationTrace {
            points: self.points,
            residuals: self.residuals,
            steps: self.steps,
            fejer_gaps,
            witness,
            witness_kind,
            shadows: None,
            shadows_approximate: false,
            technical_gap: None,
            stop_reason,
        })
    }
}

fn at_iteration<T>(iteration: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Iteration { iteration, source: Box::new(e) })
}

/// Picard iteration `x_n = T x_{n−1}`, declared converged once the residual
/// `d(x_n, T x_n)` is at most `residual_tol`.
pub fn fixed_point_iterate(
    space: &Space,
    op: &Operator,
    x0: &Point,
    rule: &StopRule,
    witness: Option<&Point>,
) -> Result<IterationTrace> {
    rule.validate()?;
    space.check(x0)?;
    if let Some(w) = witness {
        ensure_fixed(space, op, w)?;
    }
    let mut rec = Recorder::new(space, space.canonical(x0), witness.cloned());
    loop {
        let n = rec.points.len() - 1;
        let image = at_iteration(n + 1, op.apply(space, rec.current()))?;
        let residual = space.distance(rec.current(), &image)?;
        rec.residuals.push(residual);
        if residual <= rule.residual_tol {
            return rec.finish(StopReason::Converged);
        }
        if n >= rule.max_iter {
            return rec.finish(StopReason::MaxIter);
        }
        rec.push(image)?;
    }
}

fn check_sets(space: &Space, sets: &[ConvexSet]) -> Result<()> {
    if sets.is_empty() {
        return Err(Error::Domain("at least one set is required".into()));
    }
    sets.iter().try_for_each(|s| s.validate(space))
}

fn check_witness_in_sets(space: &Space, sets: &[ConvexSet], witness: Option<&Point>) -> Result<()> {
    if let Some(w) = witness {
        for s in sets {
            let d = s.distance_to(space, w)?;
            if d > space.check_tol() {
                return Err(Error::NotAFixedPoint(d));
            }
        }
    }
    Ok(())
}

fn residual(space: &Space, sets: &[ConvexSet], x: &Point) -> Result<f64> {
    let mut r: f64 = 0.0;
    for s in sets {
        r = r.max(s.distance_to(space, x)?);
    }
    Ok(r)
}

/// Cyclic projections `x_n = P_{[n]} x_{n−1}` with `[n]` running through
/// `1, …, N, 1, …`. `max_iter` counts single projections. The run stalls
/// when a full cycle moves the iterate by at most `stall_tol` in total.
pub fn cyclic_projections(
    space: &Space,
    sets: &[ConvexSet],
    x0: &Point,
    rule: &StopRule,
    witness: Option<&Point>,
) -> Result<IterationTrace> {
    rule.validate()?;
    check_sets(space, sets)?;
    space.check(x0)?;
    check_witness_in_sets(space, sets, witness)?;
    let mut rec = Recorder::new(space, space.canonical(x0), witness.cloned());
    let n_sets = sets.len();
    loop {
        let n = rec.points.len() - 1;
        let r = at_iteration(n, residual(space, sets, rec.current()))?;
        rec.residuals.push(r);
        if r <= rule.residual_tol {
            return rec.finish(StopReason::Converged);
        }
        if n >= n_sets {
            let cycle_motion: f64 = rec.steps[rec.steps.len() - n_sets..].iter().sum();
            if cycle_motion <= rule.stall_tol {
                return rec.finish(StopReason::Stalled);
            }
        }
        if n >= rule.max_iter {
            return rec.finish(StopReason::MaxIter);
        }
        let next = at_iteration(n + 1, sets[n % n_sets].project(space, rec.current()))?;
        rec.push(next)?;
    }
}

/// Averaged projections `x_n = w₁P₁x_{n−1} ⊕ … ⊕ w_N P_N x_{n−1}`.
pub fn averaged_projections(
    space: &Space,
    sets: &[ConvexSet],
    weights: Option<&[f64]>,
    x0: &Point,
    rule: &StopRule,
    cfg: &BarycenterConfig,
    witness: Option<&Point>,
) -> Result<IterationTrace> {
    rule.validate()?;
    check_sets(space, sets)?;
    space.check(x0)?;
    let weights: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != sets.len() {
                return Err(Error::InvalidWeights(format!("{} weights for {} sets", w.len(), sets.len())));
            }
            validate_weights(w)?;
            w.to_vec()
        }
        None => vec![1.0 / sets.len() as f64; sets.len()],
    };
    check_witness_in_sets(space, sets, witness)?;
    let mut rec = Recorder::new(space, space.canonical(x0), witness.cloned());
    loop {
        let n = rec.points.len() - 1;
        let images = at_iteration(n, sets.iter().map(|s| s.project(space, rec.current())).collect::<Result<Vec<_>>>())?;
        let mut r: f64 = 0.0;
        for img in &images {
            r = r.max(space.distance(rec.current(), img)?);
        }
        rec.residuals.push(r);
        if r <= rule.residual_tol {
            return rec.finish(StopReason::Converged);
        }
        if n >= 1 && rec.steps[n] <= rule.stall_tol {
            return rec.finish(StopReason::Stalled);
        }
        if n >= rule.max_iter {
            return rec.finish(StopReason::MaxIter);
        }
        let wp = WeightedPoints::new(space, images, weights.clone())?;
        let next = at_iteration(n + 1, frechet_mean(space, &wp, cfg))?;
        rec.push(next)?;
    }
}
