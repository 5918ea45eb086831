//! Executes a parsed scenario.

use std::fmt::Write as _;
use std::path::Path;

use cat0::certifier::{CheckKind, CheckSpec, FejerAlgorithm};
use cat0::diagnostics::annotate_shadows;
use cat0::iteration::{averaged_projections, cyclic_projections, fixed_point_iterate, WitnessKind};
use cat0::{frechet_mean, run_suite, BarycenterConfig, IterationTrace, Operator, StopReason, WeightedPoints};

use crate::scenario::{parse_scenario, Algorithm, OperatorSpec, Resolved, Scenario};
use crate::CliError;

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Command-line values that take precedence over the scenario's `[run]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Whatever `[run] algorithm` asks for.
    Run,
    Certify,
    Mean,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse_scenario(&text, path.parent())
        .map_err(|source| CliError::Scenario { path: path.display().to_string(), source })
}

fn apply(scenario: &Scenario, o: Overrides) -> Result<Scenario, CliError> {
    let mut s = scenario.clone();
    if let Some(seed) = o.seed {
        s.run.seed = seed;
    }
    if let Some(n) = o.max_iter {
        if n == 0 {
            return Err(CliError::Invalid("--max-iter must be >= 1".into()));
        }
        s.run.stop.max_iter = n;
    }
    if let Some(t) = o.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::Invalid("--tol must be a finite number >= 0".into()));
        }
        s.run.stop.residual_tol = t;
    }
    Ok(s)
}

/// Runs `scenario`; a relative `output` path is taken from `base`, normally
/// the scenario file's directory.
pub fn execute(scenario: &Scenario, command: Command, overrides: Overrides, base: &Path) -> Result<Outcome, CliError> {
    let mut s = apply(scenario, overrides)?;
    if let Some(o) = &s.run.output {
        s.run.output = Some(base.join(o).display().to_string());
    }
    let r = s.resolve().map_err(|source| CliError::Scenario { path: "scenario".into(), source })?;
    let algorithm = match command {
        Command::Run => s.run.algorithm,
        Command::Certify => Algorithm::Certify,
        Command::Mean => Algorithm::Barycenter,
    };
    match algorithm {
        Algorithm::Cyclic | Algorithm::Averaged | Algorithm::FixedPoint => iterate(&s, &r, algorithm),
        Algorithm::Certify => certify(&s, &r),
        Algorithm::Barycenter => mean(&s, &r),
    }
}

fn write_output(path: &Option<String>, contents: &str) -> Result<(), CliError> {
    if let Some(p) = path {
        std::fs::write(p, contents).map_err(|source| CliError::Io { path: p.clone(), source })?;
    }
    Ok(())
}

fn iterate(s: &Scenario, r: &Resolved, algorithm: Algorithm) -> Result<Outcome, CliError> {
    let run = &s.run;
    let space = &r.space;
    let sets = r.run_sets(&run.sets);
    let x0 = r.x0.as_ref().expect("checked while parsing");
    let witness = r.witness.as_ref();
    let core = |context: &str| {
        let context = context.to_string();
        move |source| CliError::Core { context, source }
    };
    let mut trace: IterationTrace = match algorithm {
        Algorithm::Cyclic => {
            cyclic_projections(space, &sets, x0, &run.stop, witness).map_err(core("cyclic projections"))?
        }
        Algorithm::Averaged => averaged_projections(
            space,
            &sets,
            run.weights.as_deref(),
            x0,
            &run.stop,
            &BarycenterConfig::from_tolerances(space.tol()),
            witness,
        )
        .map_err(core("averaged projections"))?,
        _ => {
            let projections: Vec<Operator> = sets.into_iter().map(Operator::projection).collect();
            let op = match run.operator {
                OperatorSpec::Composition => Operator::compose(projections),
                OperatorSpec::Combination => {
                    let n = projections.len();
                    Operator::combination(run.weights.clone().unwrap_or(vec![1.0 / n as f64; n]), projections)
                }
            }
            .map_err(core("operator"))?;
            fixed_point_iterate(space, &op, x0, &run.stop, witness).map_err(core("fixed-point iteration"))?
        }
    };
    let shadow = match &run.shadow_set {
        Some(name) => Some(annotate_shadows(space, &mut trace, &r.sets[name]).map_err(core("shadows"))?),
        None => None,
    };
    write_output(&run.output, &trace.to_csv(space))?;

    let fejer_tol = space.check_tol();
    let mut out = String::new();
    writeln!(out, "algorithm: {} on {}", algorithm_name(algorithm), space.describe()).unwrap();
    writeln!(out, "iterations: {}", trace.iterations()).unwrap();
    writeln!(out, "final residual: {:.6e}", trace.final_residual()).unwrap();
    writeln!(out, "final point: {}", trace.last()).unwrap();
    let proxy = match trace.witness_kind {
        WitnessKind::Supplied => "",
        WitnessKind::FinalIterateProxy => " (final iterate used as witness)",
    };
    writeln!(
        out,
        "fejer violations: {} (worst gap {:.3e}){proxy}",
        trace.fejer_violations(fejer_tol),
        trace.worst_fejer_gap()
    )
    .unwrap();
    if let Some(sh) = shadow {
        writeln!(
            out,
            "shadows: worst cauchy defect {:.3e} at (n, m) = ({}, {}), technical gap {:.3e}{}",
            sh.worst_cauchy,
            sh.cauchy_pair.0,
            sh.cauchy_pair.1,
            sh.technical_gap,
            if sh.approximate { " (approximate projections)" } else { "" }
        )
        .unwrap();
    }
    writeln!(out, "stop reason: {}", trace.stop_reason).unwrap();
    let code = if trace.stop_reason == StopReason::Converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    Ok(Outcome { code, summary: out })
}

fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Cyclic => "cyclic projections",
        Algorithm::Averaged => "averaged projections",
        Algorithm::FixedPoint => "fixed-point iteration",
        Algorithm::Certify => "certify",
        Algorithm::Barycenter => "barycenter",
    }
}

/// Checks drawn on the scenario's own space: the model inequalities, the
/// projection inequalities for every declared set and, when `[run]` names
/// sets and a common point of them, the composition, combination and Fejér
/// checks on those sets. Check `k` uses seed `seed + k`.
pub fn scenario_suite(s: &Scenario, r: &Resolved) -> Result<Vec<CheckSpec>, CliError> {
    let n = s.run.samples;
    let mut kinds =
        vec![(CheckKind::Cat0, n), (CheckKind::CauchySchwarz, n), (CheckKind::VarianceIneq { points: 3 }, n / 10 + 1)];
    for name in &r.order {
        let set = r.sets[name].clone();
        kinds.push((CheckKind::ProjectionFirm { set: set.clone() }, n));
        kinds.push((CheckKind::ProjectionIneq { set }, n));
    }
    if let (false, Some(w)) = (s.run.sets.is_empty(), &r.witness) {
        let sets = r.run_sets(&s.run.sets);
        let proj: Vec<(Operator, f64)> = sets.iter().map(|c| (Operator::projection(c.clone()), 0.5)).collect();
        let k = sets.len();
        let weights = s.run.weights.clone().unwrap_or(vec![1.0 / k as f64; k]);
        kinds.push((CheckKind::CompositionTheorem { factors: proj.clone(), witness: w.clone() }, n));
        kinds.push((CheckKind::CombinationTheorem { ops: proj, weights, witness: w.clone() }, n / 10 + 1));
        kinds.push((
            CheckKind::FejerRun {
                sets,
                algorithm: FejerAlgorithm::Cyclic,
                witness: w.clone(),
                max_iter: s.run.stop.max_iter.min(200),
            },
            n / 10 + 1,
        ));
    }
    let specs: Vec<CheckSpec> = kinds
        .into_iter()
        .enumerate()
        .map(|(k, (kind, samples))| CheckSpec::new(kind, r.space.clone(), samples, s.run.seed.wrapping_add(k as u64)))
        .collect();
    for spec in &specs {
        spec.validate().map_err(|source| CliError::Core { context: spec.label(), source })?;
    }
    Ok(specs)
}

fn certify(s: &Scenario, r: &Resolved) -> Result<Outcome, CliError> {
    let specs = scenario_suite(s, r)?;
    let report =
        run_suite(&specs, Some(s.run.seed)).map_err(|source| CliError::Core { context: "certify".into(), source })?;
    write_output(&s.run.output, &report.to_csv())?;
    let code = if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(Outcome { code, summary: report.to_text() })
}

fn mean(s: &Scenario, r: &Resolved) -> Result<Outcome, CliError> {
    if r.points.is_empty() {
        return Err(CliError::Invalid("the scenario lists no `point` entries".into()));
    }
    let k = r.points.len();
    let weights = match &s.run.weights {
        Some(w) if w.len() == k => w.clone(),
        _ => vec![1.0 / k as f64; k],
    };
    let wp = WeightedPoints::new(&r.space, r.points.clone(), weights)
        .map_err(|source| CliError::Core { context: "points".into(), source })?;
    let cfg = BarycenterConfig::from_tolerances(r.space.tol());
    let m =
        frechet_mean(&r.space, &wp, &cfg).map_err(|source| CliError::Core { context: "barycenter".into(), source })?;
    let line = format!("{m}\n");
    write_output(&s.run.output, &line)?;
    Ok(Outcome { code: EXIT_OK, summary: format!("barycenter of {k} points on {}: {line}", r.space.describe()) })
}
