use crate::dynamics::{ProbeSignal, Trajectory};
use crate::scalar::Scalar;

/// Deviation samples `x_j^i(t)` of one node over a measurement window.
///
/// `times` are measured from the start of the run; the probe's own
/// `start_time` is accounted for wherever the phase matters.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRecord<T> {
    pub probe: ProbeSignal<T>,
    pub node: usize,
    pub times: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> ResponseRecord<T> {
    pub fn new(probe: ProbeSignal<T>, node: usize, times: Vec<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(times.len(), values.len());
        Self { probe, node, times, values }
    }

    /// Samples of `node` with `start <= t < start + length`.
    pub fn from_trajectory(traj: &Trajectory<T>, probe: &ProbeSignal<T>, node: usize, start: T, length: T) -> Self {
        // Slack of a millionth of a sample so grid points that land on the edges by
        // rounding are kept.
        let slack = traj.sample_step().unwrap_or(T::zero()) * T::lit(1e-6);
        let r = traj.reference[node];
        let (mut times, mut values) = (Vec::new(), Vec::new());
        for (k, &t) in traj.times.iter().enumerate() {
            if t + slack >= start && t + slack < start + length {
                times.push(t);
                values.push(traj.states[[k, node]] - r);
            }
        }
        Self { probe: *probe, node, times, values }
    }

    /// One record per node, all over the same window.
    pub fn all_nodes(traj: &Trajectory<T>, probe: &ProbeSignal<T>, start: T, length: T) -> Vec<Self> {
        (0..traj.node_count()).map(|j| Self::from_trajectory(traj, probe, j, start, length)).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample spacing (zero for fewer than two samples).
    pub fn step(&self) -> T {
        if self.times.len() < 2 {
            T::zero()
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// Time covered by the samples, counting one sampling cell per sample.
    pub fn coverage(&self) -> T {
        match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => b - a + self.step(),
            _ => T::zero(),
        }
    }

    pub fn peak_to_peak(&self) -> T {
        let (lo, hi) = self
            .values
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if self.values.is_empty() {
            T::zero()
        } else {
            hi - lo
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
