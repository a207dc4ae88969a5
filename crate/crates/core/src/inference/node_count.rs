//! Node count from the collective low-frequency response at the probed node.

use crate::scalar::Scalar;

use super::record::ResponseRecord;
use super::InferenceError;

/// The estimate needs `omega0 <= lambda2_hat / MIN_LAMBDA2_OVER_OMEGA`.
pub const MIN_LAMBDA2_OVER_OMEGA: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCountEstimate<T> {
    pub n_hat: T,
    pub x_max: T,
    pub amplitude: T,
    pub frequency: T,
}

impl<T: Scalar> NodeCountEstimate<T> {
    /// `n_hat` rounded to the nearest count (at least one).
    pub fn rounded(&self) -> usize {
        self.n_hat.round().to_usize().unwrap_or(1).max(1)
    }
}

/// `n_hat = 2 a0 / (x_max omega0)` with `x_max` the peak `|x_i|` over the
/// record, which must span a full probe period. When `lambda2_hat` is given
/// the probe frequency is checked against it.
pub fn estimate_node_count<T: Scalar>(
    record: &ResponseRecord<T>,
    lambda2_hat: Option<T>,
) -> Result<NodeCountEstimate<T>, InferenceError> {
    let (a0, w) = (record.probe.amplitude, record.probe.frequency);
    if let Some(l2) = lambda2_hat {
        let limit = l2 / T::lit(MIN_LAMBDA2_OVER_OMEGA);
        // Slack so that a ratio of exactly 1/50 passes despite rounding.
        if w > limit * T::lit(1.0 + 1e-12) {
            return Err(InferenceError::FrequencyTooHigh { omega0: w.as_f64(), limit: limit.as_f64() });
        }
    }
    let period = record.probe.period();
    // One missing sample at the edge is tolerated: windows need not start on the grid.
    if record.coverage() + record.step() < period * T::lit(1.0 - 1e-9) {
        return Err(InferenceError::WindowTooShort { window: record.coverage().as_f64(), period: period.as_f64() });
    }
    let x_max = record.max_abs();
    if !(x_max > T::zero()) {
        return Err(InferenceError::ZeroResponse);
    }
    Ok(NodeCountEstimate { n_hat: T::lit(2.0) * a0 / (x_max * w), x_max, amplitude: a0, frequency: w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ProbeSignal;

    fn synthetic(n: f64, span_periods: f64) -> ResponseRecord<f64> {
        let (a0, w) = (1e-3, 0.01);
        let probe = ProbeSignal::new(0, a0, w);
        let p = probe.period();
        let m = 1000;
        let times: Vec<f64> = (0..(m as f64 * span_periods) as usize).map(|k| 300.0 + k as f64 * p / m as f64).collect();
        let values = times.iter().map(|t| (2.0 * a0 / (n * w)) * (1.0 - (w * t).cos()) / 2.0).collect();
        ResponseRecord::new(probe, 0, times, values)
    }

    #[test]
    fn inverts_the_zero_mode_peak() {
        let est = estimate_node_count(&synthetic(50.0, 1.0), None).unwrap();
        assert!((est.n_hat - 50.0).abs() < 1e-3, "{}", est.n_hat);
        assert_eq!(est.rounded(), 50);
    }

    #[test]
    fn short_window_rejected() {
        assert!(matches!(
            estimate_node_count(&synthetic(50.0, 0.5), None),
            Err(InferenceError::WindowTooShort { .. })
        ));
    }

    #[test]
    fn frequency_guard() {
        let r = synthetic(50.0, 1.0);
        assert!(estimate_node_count(&r, Some(0.5)).is_ok());
        assert!(matches!(estimate_node_count(&r, Some(0.4)), Err(InferenceError::FrequencyTooHigh { .. })));
    }
}
