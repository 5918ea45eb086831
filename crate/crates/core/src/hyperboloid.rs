//! Hyperboloid model numerics.
//!
//! Points are vectors `v` of length `dim + 1` on the upper sheet
//! `m(v, v) = -1`, `v[0] > 0`, where `m(u, v) = -u[0] v[0] + sum_{i>=1} u[i] v[i]`.

/// Minkowski bilinear form.
pub fn minkowski(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let spatial: f64 = u[1..].iter().zip(&v[1..]).map(|(a, b)| a * b).sum();
    spatial - u[0] * v[0]
}

/// Rescales a timelike vector back onto the upper sheet.
pub fn project_to_sheet(v: &mut [f64]) {
    let q = -minkowski(v, v);
    if q > 0.0 {
        let s = q.sqrt().recip();
        let sign = if v[0] < 0.0 { -s } else { s };
        v.iter_mut().for_each(|x| *x *= sign);
    }
}

/// `m(v, v) + 1`, the signed drift off the sheet.
pub fn sheet_drift(v: &[f64]) -> f64 {
    minkowski(v, v) + 1.0
}

/// Hyperbolic distance `arcosh(-m(u, v))`, evaluated as
/// `2 asinh(|u - v|_m / 2)` which stays accurate for nearby points.
pub fn distance(u: &[f64], v: &[f64]) -> f64 {
    let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let chord_sq = minkowski(&diff, &diff).max(0.0);
    2.0 * (0.5 * chord_sq.sqrt()).asinh()
}

/// `sinh(a) / sinh(b)` for `0 <= a <= b`, `b > 0`, without overflow.
fn sinh_ratio(a: f64, b: f64) -> f64 {
    if b < 20.0 {
        a.sinh() / b.sinh()
    } else {
        (a - b).exp() * (-(-2.0 * a).exp_m1()) / (-(-2.0 * b).exp_m1())
    }
}

/// Point at parameter `t` on the geodesic from `u` to `v`.
pub fn geodesic(u: &[f64], v: &[f64], t: f64) -> Vec<f64> {
    let theta = distance(u, v);
    let mut out: Vec<f64> = if theta < 1e-8 {
        // sinh ratios degenerate to linear weights; error is O(theta^3)
        u.iter().zip(v).map(|(a, b)| (1.0 - t) * a + t * b).collect()
    } else {
        let wa = sinh_ratio((1.0 - t) * theta, theta);
        let wb = sinh_ratio(t * theta, theta);
        u.iter().zip(v).map(|(a, b)| wa * a + wb * b).collect()
    };
    project_to_sheet(&mut out);
    out
}

/// Riemannian logarithm at `base`: the tangent vector pointing to `target`
/// with Minkowski norm equal to the distance.
pub fn log(base: &[f64], target: &[f64]) -> Vec<f64> {
    let mb = minkowski(base, target);
    let mut u: Vec<f64> = target.iter().zip(base).map(|(y, x)| y + mb * x).collect();
    // remove any normal component left by roundoff
    let n = minkowski(base, &u);
    u.iter_mut().zip(base).for_each(|(ui, xi)| *ui += n * xi);
    let norm = minkowski(&u, &u).max(0.0).sqrt();
    let theta = distance(base, target);
    if norm == 0.0 {
        return vec![0.0; base.len()];
    }
    let s = theta / norm;
    u.iter_mut().for_each(|x| *x *= s);
    u
}

/// Riemannian exponential at `base` of a tangent vector. The normal
/// component of `tangent` (roundoff, typically) is discarded first.
pub fn exp(base: &[f64], tangent: &[f64]) -> Vec<f64> {
    let n = minkowski(base, tangent);
    let tangent: Vec<f64> = tangent.iter().zip(base).map(|(v, x)| v + n * x).collect();
    let norm = minkowski(&tangent, &tangent).max(0.0).sqrt();
    let mut out: Vec<f64> = if norm < 1e-300 {
        base.to_vec()
    } else {
        let (c, s) = (norm.cosh(), norm.sinh() / norm);
        base.iter().zip(&tangent).map(|(x, v)| c * x + s * v).collect()
    };
    project_to_sheet(&mut out);
    out
}

/// Base point `(1, 0, ..., 0)`.
pub fn origin(dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim + 1];
    v[0] = 1.0;
    v
}

/// Image under the exponential map at the origin of the spatial vector `w`.
pub fn from_origin_tangent(w: &[f64]) -> Vec<f64> {
    let mut tangent = Vec::with_capacity(w.len() + 1);
    tangent.push(0.0);
    tangent.extend_from_slice(w);
    exp(&origin(w.len()), &tangent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_along_axis() {
        let u = origin(2);
        let v = vec![1f64.cosh(), 1f64.sinh(), 0.0];
        assert!((distance(&u, &v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn geodesic_midpoint_on_axis() {
        let u = origin(2);
        let v = vec![2f64.cosh(), 2f64.sinh(), 0.0];
        let m = geodesic(&u, &v, 0.5);
        assert!((m[0] - 1f64.cosh()).abs() < 1e-14);
        assert!((m[1] - 1f64.sinh()).abs() < 1e-14);
    }

    #[test]
    fn exp_log_roundtrip() {
        let x = from_origin_tangent(&[0.3, -0.7]);
        let y = from_origin_tangent(&[-1.1, 0.4]);
        let v = log(&x, &y);
        assert!((minkowski(&v, &v).sqrt() - distance(&x, &y)).abs() < 1e-12);
        let back = exp(&x, &v);
        assert!(distance(&back, &y) < 1e-12);
    }

    #[test]
    fn far_points_do_not_overflow() {
        let u = from_origin_tangent(&[30.0, 0.0]);
        let v = from_origin_tangent(&[-30.0, 0.0]);
        let m = geodesic(&u, &v, 0.5);
        assert!(m.iter().all(|x| x.is_finite()));
        assert!(distance(&m, &origin(2)) < 1e-6);
    }
}
