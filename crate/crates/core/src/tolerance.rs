use crate::error::{Error, Result};

/// Numerical tolerances shared by every computation on a [`Space`](crate::Space).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Equality / inequality slack for exact models (Euclidean, trees).
    pub eq_tol: f64,
    /// Allowed drift of a hyperboloid point off the sheet `m(v, v) = -1`,
    /// relative to `v[0]^2`.
    pub on_manifold: f64,
    /// Inequality slack for anything involving the hyperboloid model.
    pub hyperbolic_tol: f64,
    pub max_barycenter_sweeps: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { eq_tol: 1e-9, on_manifold: 1e-10, hyperbolic_tol: 1e-7, max_barycenter_sweeps: 200 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.eq_tol) && ok(self.on_manifold) && ok(self.hyperbolic_tol)) {
            return Err(Error::Domain("all tolerances must be finite and > 0".into()));
        }
        if self.max_barycenter_sweeps == 0 {
            return Err(Error::Domain("max_barycenter_sweeps must be >= 1".into()));
        }
        Ok(())
    }
}
