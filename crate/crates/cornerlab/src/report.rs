//! Report types shared by the estimators and the CLI: point estimates,
//! log-log fits, and their JSON/CSV forms. Every report carries the seed
//! and parameters needed to reproduce it bit for bit.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// A single scalar Monte Carlo estimate.
#[derive(Debug, Clone, Serialize)]
pub struct MCReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub estimator: String,
    pub params: Value,
    pub seed: u64,
    pub samples: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub extras: Value,
}

impl MCReport {
    pub fn new(
        estimator: &str,
        params: Value,
        seed: u64,
        samples: u64,
        estimate: f64,
        stderr: f64,
    ) -> Self {
        MCReport {
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            estimator: estimator.to_string(),
            params,
            seed,
            samples,
            estimate,
            stderr,
            ci95: (estimate - 1.96 * stderr, estimate + 1.96 * stderr),
            wall_time_ms: None,
            extras: Value::Null,
        }
    }
}

/// One abscissa of a fit: a measured estimate with its uncertainty.
#[derive(Debug, Clone, Serialize)]
pub struct FitPoint {
    pub x: f64,
    pub y: f64,
    pub stderr: f64,
    pub n: u64,
}

/// A log-log exponent fit over measured points.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub estimator: String,
    pub params: Value,
    pub seed: u64,
    pub points: Vec<FitPoint>,
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub exponent_ci95: (f64, f64),
    /// reference value this exponent is compared against
    pub target: f64,
    pub target_label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub extras: Value,
}

impl FitReport {
    pub fn points_csv(&self) -> String {
        let mut out = String::from("x,y,stderr,n\n");
        for p in &self.points {
            out.push_str(&format!("{},{:.9e},{:.9e},{}\n", p.x, p.y, p.stderr, p.n));
        }
        out
    }
}

/// Weighted least squares for `ln y = a + b ln x`, weighting each point by
/// its log-space variance. Points with nonpositive values or relative
/// standard error above `max_rel_err` are excluded.
pub fn fit_loglog(points: &[FitPoint], max_rel_err: f64) -> Option<(f64, f64)> {
    let usable: Vec<&FitPoint> = points
        .iter()
        .filter(|p| p.x > 0.0 && p.y > 0.0 && p.stderr >= 0.0 && p.stderr < max_rel_err * p.y)
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let mut sw = 0.0;
    let mut swx = 0.0;
    let mut swy = 0.0;
    let mut swxx = 0.0;
    let mut swxy = 0.0;
    for p in usable {
        let lx = p.x.ln();
        let ly = p.y.ln();
        // sigma of ln y ~ stderr / y; floor keeps exact points usable
        let s = (p.stderr / p.y).max(1e-9);
        let w = 1.0 / (s * s);
        sw += w;
        swx += w * lx;
        swy += w * ly;
        swxx += w * lx * lx;
        swxy += w * lx * ly;
    }
    let det = sw * swxx - swx * swx;
    if det.abs() < 1e-30 {
        return None;
    }
    let slope = (sw * swxy - swx * swy) / det;
    let slope_var = sw / det;
    Some((slope, slope_var.sqrt()))
}

/// Binomial standard error for a frequency estimate.
pub fn binomial_stderr(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Mean and standard error of the mean from exact integer sums.
pub fn mean_stderr(sum: i128, sum_sq: i128, n: u64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::INFINITY);
    }
    let nf = n as f64;
    let mean = sum as f64 / nf;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let var = (sum_sq as f64 - nf * mean * mean) / (nf - 1.0);
    (mean, (var.max(0.0) / nf).sqrt())
}
