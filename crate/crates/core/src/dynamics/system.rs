use crate::graph::Graph;
use crate::scalar::Scalar;

use super::DynamicsError;

/// Shape of an odd, attractive interaction function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingKind {
    /// `K sin(y)`
    Kuramoto,
    /// `K y`
    Linear,
    /// `K tanh(y)`
    Tanh,
}

impl std::str::FromStr for CouplingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kuramoto" | "sin" => Ok(Self::Kuramoto),
            "linear" => Ok(Self::Linear),
            "tanh" => Ok(Self::Tanh),
            other => Err(format!("unknown coupling {other:?} (expected kuramoto, linear or tanh)")),
        }
    }
}

impl std::fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Kuramoto => "kuramoto",
            Self::Linear => "linear",
            Self::Tanh => "tanh",
        })
    }
}

/// Per-edge interaction `f(y)` with strength `K > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling<T> {
    pub kind: CouplingKind,
    pub strength: T,
}

impl<T: Scalar> Coupling<T> {
    pub fn new(kind: CouplingKind, strength: T) -> Self {
        Self { kind, strength }
    }

    #[inline]
    pub fn force(&self, y: T) -> T {
        self.strength
            * match self.kind {
                CouplingKind::Kuramoto => y.sin(),
                CouplingKind::Linear => y,
                CouplingKind::Tanh => y.tanh(),
            }
    }

    /// `f'(y)`.
    #[inline]
    pub fn slope(&self, y: T) -> T {
        self.strength
            * match self.kind {
                CouplingKind::Kuramoto => y.cos(),
                CouplingKind::Linear => T::one(),
                CouplingKind::Tanh => {
                    let c = y.cosh();
                    T::one() / (c * c)
                }
            }
    }

    /// Upper bound on `|f'(y)|` over all `y`.
    pub fn max_slope(&self) -> T {
        self.strength
    }
}

/// Injected sinusoid `a0 sin(omega0 (t - start))` at a single node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSignal<T> {
    pub node: usize,
    pub amplitude: T,
    pub frequency: T,
    pub start_time: T,
}

impl<T: Scalar> ProbeSignal<T> {
    pub fn new(node: usize, amplitude: T, frequency: T) -> Self {
        Self { node, amplitude, frequency, start_time: T::zero() }
    }

    pub fn with_amplitude(self, amplitude: T) -> Self {
        Self { amplitude, ..self }
    }

    /// `2 pi / omega0`.
    pub fn period(&self) -> T {
        T::TAU() / self.frequency
    }

    #[inline]
    pub fn value(&self, t: T) -> T {
        if t < self.start_time {
            T::zero()
        } else {
            self.amplitude * (self.frequency * (t - self.start_time)).sin()
        }
    }

    pub(crate) fn validate(&self, n: usize) -> Result<(), DynamicsError> {
        if self.node >= n {
            return Err(DynamicsError::InvalidProbe(format!("node {} outside 0..{n}", self.node)));
        }
        if !(self.amplitude >= T::zero()) || !(self.frequency > T::zero()) {
            return Err(DynamicsError::InvalidProbe(format!(
                "amplitude {} must be >= 0 and frequency {} > 0",
                self.amplitude, self.frequency
            )));
        }
        Ok(())
    }
}

/// Diffusively coupled first-order network dynamics
/// `y_i' = omega_i - sum_j a_ij f_ij(y_i - y_j) + xi_i(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec<T> {
    graph: Graph,
    couplings: Vec<Coupling<T>>,
    drives: Vec<T>,
}

impl<T: Scalar> SystemSpec<T> {
    /// `couplings` is aligned with `graph.edges()`; each edge carries one
    /// symmetric interaction.
    pub fn new(graph: Graph, couplings: Vec<Coupling<T>>, drives: Vec<T>) -> Result<Self, DynamicsError> {
        if couplings.len() != graph.edge_count() {
            return Err(DynamicsError::DimensionMismatch { expected: graph.edge_count(), got: couplings.len() });
        }
        if drives.len() != graph.node_count() {
            return Err(DynamicsError::DimensionMismatch { expected: graph.node_count(), got: drives.len() });
        }
        if let Some(c) = couplings.iter().find(|c| !(c.strength > T::zero()) || !c.strength.is_finite()) {
            return Err(DynamicsError::InvalidCoupling(format!("strength {} must be positive", c.strength)));
        }
        Ok(Self { graph, couplings, drives })
    }

    /// Same interaction on every edge.
    pub fn uniform(graph: Graph, coupling: Coupling<T>, drives: Vec<T>) -> Result<Self, DynamicsError> {
        let couplings = vec![coupling; graph.edge_count()];
        Self::new(graph, couplings, drives)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn couplings(&self) -> &[Coupling<T>] {
        &self.couplings
    }

    pub fn drives(&self) -> &[T] {
        &self.drives
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn min_strength(&self) -> T {
        self.couplings.iter().map(|c| c.strength).fold(T::infinity(), T::min)
    }

    /// Gershgorin bound `2 max_i sum_j max|f'_ij|` on the Jacobian spectrum.
    pub fn spectral_bound(&self) -> T {
        let mut row = vec![T::zero(); self.node_count()];
        for (&(i, j), c) in self.graph.edges().iter().zip(&self.couplings) {
            row[i] = row[i] + c.max_slope();
            row[j] = row[j] + c.max_slope();
        }
        row.into_iter().fold(T::zero(), T::max) * T::lit(2.0)
    }

    /// Copy with the mean drive removed, so a phase-locked state becomes a
    /// fixed point.
    pub fn co_rotating(&self) -> Self {
        let mean = self.drives.iter().copied().sum::<T>() / T::count(self.drives.len());
        Self { drives: self.drives.iter().map(|&w| w - mean).collect(), ..self.clone() }
    }

    /// Writes `y'(t)` into `out`.
    #[inline]
    pub fn derivative_into(&self, y: &[T], t: T, probe: Option<&ProbeSignal<T>>, out: &mut [T]) {
        out.copy_from_slice(&self.drives);
        for (&(i, j), c) in self.graph.edges().iter().zip(&self.couplings) {
            let f = c.force(y[i] - y[j]);
            out[i] = out[i] - f;
            out[j] = out[j] + f;
        }
        if let Some(p) = probe {
            out[p.node] = out[p.node] + p.value(t);
        }
    }

    pub fn derivative(&self, y: &[T], t: T, probe: Option<&ProbeSignal<T>>) -> Vec<T> {
        let mut out = vec![T::zero(); y.len()];
        self.derivative_into(y, t, probe, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::erdos_renyi;
    use crate::rng::XorShift64Star;

    fn two_node(kind: CouplingKind) -> SystemSpec<f64> {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        SystemSpec::uniform(g, Coupling::new(kind, 1.0), vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn two_node_kuramoto_rates() {
        let s = two_node(CouplingKind::Kuramoto);
        assert_eq!(s.derivative(&[0.0, 0.0], 0.0, None), vec![0.0, 0.0]);
        let d = s.derivative(&[std::f64::consts::FRAC_PI_2, 0.0], 0.0, None);
        assert!((d[0] + 1.0).abs() < 1e-15 && (d[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn couplings_are_odd_and_attractive() {
        for kind in [CouplingKind::Kuramoto, CouplingKind::Linear, CouplingKind::Tanh] {
            let c = Coupling::new(kind, 1.7);
            for k in 0..50 {
                let y = -3.0 + 0.123 * k as f64;
                assert!((c.force(-y) + c.force(y)).abs() < 1e-14);
            }
            assert!(c.slope(0.0) > 0.0);
            // slope matches a central difference
            let h = 1e-6;
            let fd = (c.force(0.4 + h) - c.force(0.4 - h)) / (2.0 * h);
            assert!((fd - c.slope(0.4)).abs() < 1e-8);
        }
    }

    #[test]
    fn matches_naive_double_loop() {
        let g = erdos_renyi(5, 7, 3).unwrap();
        let mut r = XorShift64Star::new(9);
        let kinds = [CouplingKind::Kuramoto, CouplingKind::Linear, CouplingKind::Tanh];
        let couplings: Vec<_> =
            (0..7).map(|e| Coupling::new(kinds[e % 3], r.uniform(0.5, 2.0))).collect();
        let drives: Vec<f64> = (0..5).map(|_| r.uniform(-0.2, 0.2)).collect();
        let s = SystemSpec::new(g.clone(), couplings.clone(), drives.clone()).unwrap();
        let y: Vec<f64> = (0..5).map(|_| r.uniform(-1.0, 1.0)).collect();
        let probe = ProbeSignal::new(2, 0.3, 1.1);
        let t = 0.77;
        let got = s.derivative(&y, t, Some(&probe));
        for i in 0..5 {
            let mut want = drives[i];
            for j in 0..5 {
                if let Some(e) = g.edges().iter().position(|&(a, b)| (a, b) == (i.min(j), i.max(j))) {
                    if i != j {
                        want -= couplings[e].force(y[i] - y[j]);
                    }
                }
            }
            if i == 2 {
                want += 0.3 * (1.1f64 * t).sin();
            }
            assert!((got[i] - want).abs() <= 1e-14, "node {i}: {} vs {want}", got[i]);
        }
    }

    #[test]
    fn probe_is_silent_before_start() {
        let p = ProbeSignal { node: 0, amplitude: 1.0, frequency: 2.0, start_time: 5.0 };
        assert_eq!(p.value(4.9), 0.0);
        assert!((p.value(5.0 + std::f64::consts::FRAC_PI_4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        assert!(SystemSpec::uniform(g.clone(), Coupling::new(CouplingKind::Linear, 0.0), vec![0.0; 2]).is_err());
        assert!(SystemSpec::uniform(g.clone(), Coupling::new(CouplingKind::Linear, 1.0), vec![0.0; 3]).is_err());
        assert!(SystemSpec::new(g, vec![], vec![0.0; 2]).is_err());
        assert_eq!("Tanh".parse::<CouplingKind>(), Ok(CouplingKind::Tanh));
    }

    #[test]
    fn co_rotating_frame_has_zero_mean() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let s = SystemSpec::uniform(g, Coupling::new(CouplingKind::Kuramoto, 1.0), vec![0.3, 0.1, 0.5]).unwrap();
        let c = s.co_rotating();
        assert!(c.drives().iter().sum::<f64>().abs() < 1e-15);
        assert!((c.drives()[0] - 0.0).abs() < 1e-15);
    }
}
