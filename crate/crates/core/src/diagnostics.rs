//! Shadow sequences, Fejér/Cauchy checks and asymptotic-center estimation
//! for recorded iteration traces.

use crate::barycenter::{frechet_mean, BarycenterConfig, WeightedPoints};
use crate::error::{Error, Result};
use crate::iteration::IterationTrace;
use crate::sets::ConvexSet;
use crate::space::{Point, Space};

/// Projections `x̄_n = P_C x_n` of a trace onto a target set.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowSequence {
    pub points: Vec<Point>,
    /// Set when `C` has no closed-form projection and shadows come from an
    /// inner cyclic solve.
    pub approximate: bool,
}

pub fn shadow_sequence(space: &Space, points: &[Point], set: &ConvexSet) -> Result<ShadowSequence> {
    set.validate(space)?;
    let shadows = points
        .iter()
        .map(|x| {
            space.check(x)?;
            set.project(space, x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShadowSequence { points: shadows, approximate: !set.is_exact() })
}

/// Smallest value of `d(x_n,x̄_n)² − d(x_m,x̄_m)² − d(x̄_m,x̄_n)²` over all
/// `m ≥ n`, with the index pair achieving it.
pub fn cauchy_defect(space: &Space, points: &[Point], shadows: &[Point]) -> Result<(f64, usize, usize)> {
    if points.len() != shadows.len() {
        return Err(Error::Domain(format!("{} points but {} shadows", points.len(), shadows.len())));
    }
    let gaps = points.iter().zip(shadows).map(|(x, s)| space.distance_sq(x, s)).collect::<Result<Vec<_>>>()?;
    let mut worst = (0.0, 0, 0);
    for n in 0..points.len() {
        for m in n + 1..points.len() {
            let d = gaps[n] - gaps[m] - space.distance_sq(&shadows[m], &shadows[n])?;
            if d < worst.0 {
                worst = (d, n, m);
            }
        }
    }
    Ok(worst)
}

/// Nearest point to `y` on the geodesic from `a` to `b`, returned with its
/// parameter. Closed form in Euclidean space, golden-section search on the
/// (convex) distance along the segment otherwise.
pub fn project_onto_geodesic(space: &Space, a: &Point, b: &Point, y: &Point) -> Result<(f64, Point)> {
    if let (Point::Euclidean(a), Point::Euclidean(b), Point::Euclidean(y)) = (a, b, y) {
        let ab: f64 = a.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum();
        if ab == 0.0 {
            return Ok((0.0, Point::Euclidean(a.clone())));
        }
        let dot: f64 = a.iter().zip(b).zip(y).map(|((p, q), r)| (q - p) * (r - p)).sum();
        let t = (dot / ab).clamp(0.0, 1.0);
        let p = a.iter().zip(b).map(|(p, q)| (1.0 - t) * p + t * q).collect();
        return Ok((t, Point::Euclidean(p)));
    }
    let seg = space.geodesic(a, b)?;
    if seg.length == 0.0 {
        return Ok((0.0, space.canonical(a)));
    }
    let f = |t: f64| -> Result<f64> { space.distance(y, &seg.at(t)?) };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while hi - lo > 1e-12 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d)?;
        }
    }
    let mut best = (0.5 * (lo + hi), f(0.5 * (lo + hi))?);
    for t in [0.0, 1.0] {
        let v = f(t)?;
        if v < best.1 {
            best = (t, v);
        }
    }
    Ok((best.0, seg.at(best.0)?))
}

/// Monitored gap `max_k d(x_N, P_{γ_k} x̄_N) − d(x_N, x̄_N)` at the final
/// iterate, where `γ_k` runs from `limit` to the shadow `x̄_k` for up to
/// `max_geodesics` evenly spaced `k`.
pub fn technical_gap(
    space: &Space,
    points: &[Point],
    shadows: &[Point],
    limit: &Point,
    max_geodesics: usize,
) -> Result<f64> {
    let (Some(x), Some(s)) = (points.last(), shadows.last()) else {
        return Err(Error::Domain("empty trace".into()));
    };
    let base = space.distance(x, s)?;
    let stride = shadows.len().div_ceil(max_geodesics.max(1)).max(1);
    let mut gap = f64::NEG_INFINITY;
    for target in shadows.iter().step_by(stride).chain(std::iter::once(s)) {
        let (_, p) = project_onto_geodesic(space, limit, target, s)?;
        gap = gap.max(space.distance(x, &p)? - base);
    }
    Ok(gap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowReport {
    pub worst_cauchy: f64,
    pub cauchy_pair: (usize, usize),
    pub technical_gap: f64,
    pub approximate: bool,
}

/// Computes the shadows of `trace` onto `set`, stores them (with the
/// technical gap) in the trace and returns the Cauchy/gap summary. The
/// final shadow serves as the estimated limit.
pub fn annotate_shadows(space: &Space, trace: &mut IterationTrace, set: &ConvexSet) -> Result<ShadowReport> {
    let shadows = shadow_sequence(space, &trace.points, set)?;
    let (worst_cauchy, n, m) = cauchy_defect(space, &trace.points, &shadows.points)?;
    let limit = shadows.points.last().expect("trace holds x0").clone();
    let gap = technical_gap(space, &trace.points, &shadows.points, &limit, 32)?;
    trace.shadows = Some(shadows.points);
    trace.shadows_approximate = shadows.approximate;
    trace.technical_gap = Some(gap);
    Ok(ShadowReport { worst_cauchy, cauchy_pair: (n, m), technical_gap: gap, approximate: shadows.approximate })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCenter {
    pub point: Point,
    /// `max_{n ≥ tail_start} d(point, x_n)`.
    pub radius: f64,
    /// Always true: the pool is a finite candidate set, not a minimization.
    pub heuristic: bool,
}

/// Best candidate for `argmin_x max_{n ≥ tail_start} d(x, x_n)` among the
/// tail points, their pairwise midpoints and the uniform mean of the tail.
/// Earlier candidates win ties.
pub fn asymptotic_center_estimate(space: &Space, points: &[Point], tail_start: usize) -> Result<AsymptoticCenter> {
    if tail_start >= points.len() {
        return Err(Error::Domain(format!("tail_start {tail_start} leaves an empty tail of {} points", points.len())));
    }
    let tail = &points[tail_start..];
    let mut pool: Vec<Point> = tail.to_vec();
    for i in 0..tail.len() {
        for j in i + 1..tail.len() {
            pool.push(space.geodesic_point(&tail[i], &tail[j], 0.5)?);
        }
    }
    let wp = WeightedPoints::uniform(space, tail.to_vec())?;
    pool.push(frechet_mean(space, &wp, &BarycenterConfig::from_tolerances(space.tol()))?);

    let mut best: Option<(f64, usize)> = None;
    for (k, c) in pool.iter().enumerate() {
        let mut r: f64 = 0.0;
        for x in tail {
            r = r.max(space.distance(c, x)?);
        }
        if best.is_none_or(|(b, _)| r < b) {
            best = Some((r, k));
        }
    }
    let (radius, k) = best.expect("pool is nonempty");
    Ok(AsymptoticCenter { point: pool.swap_remove(k), radius, heuristic: true })
}
