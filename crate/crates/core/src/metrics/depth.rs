use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthMetrics {
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub rmse: f64,
    pub rmse_log: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_3: f64,
}

/// Error and threshold-accuracy metrics over matched object depths.
pub fn depth_metrics(gt: &[f64], pred: &[f64]) -> Result<DepthMetrics, MetricsError> {
    if gt.len() != pred.len() {
        return Err(MetricsError::LengthMismatch(gt.len(), pred.len()));
    }
    if gt.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if gt.iter().chain(pred).any(|d| !(*d > 0.0)) {
        return Err(MetricsError::NonPositiveDepth);
    }
    let n = gt.len() as f64;
    let mut m = DepthMetrics {
        abs_rel: 0.0,
        sq_rel: 0.0,
        rmse: 0.0,
        rmse_log: 0.0,
        delta_1: 0.0,
        delta_2: 0.0,
        delta_3: 0.0,
    };
    for (&g, &p) in gt.iter().zip(pred) {
        let diff = p - g;
        m.abs_rel += diff.abs() / g;
        m.sq_rel += diff * diff / g;
        m.rmse += diff * diff;
        m.rmse_log += (p.ln() - g.ln()).powi(2);
        let ratio = (p / g).max(g / p);
        m.delta_1 += (ratio < 1.25) as u8 as f64;
        m.delta_2 += (ratio < 1.25 * 1.25) as u8 as f64;
        m.delta_3 += (ratio < 1.25 * 1.25 * 1.25) as u8 as f64;
    }
    m.abs_rel /= n;
    m.sq_rel /= n;
    m.rmse = (m.rmse / n).sqrt();
    m.rmse_log = (m.rmse_log / n).sqrt();
    m.delta_1 /= n;
    m.delta_2 /= n;
    m.delta_3 /= n;
    Ok(m)
}
