//! Turns a configuration into a graph, a dynamical system and a probe target.

use probenet::dynamics::{find_fixed_point, Coupling, SystemSpec};
use probenet::inference::{
    BurnIn, FrequencyReference, InferenceSettings, LinearizedSystem, NodeCountPolicy, ProbeTarget, ScanSettings,
    SimulatedSystem, WindowSampling,
};
use probenet::rng::XorShift64Star;
use probenet::{erdos_renyi, load_graph, watts_strogatz, FixedPoint, Graph, System};

use crate::config::{GraphSource, Measurement, Reference, ScenarioConfig};
use crate::StageError;

pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 100;

pub fn build_graph(cfg: &ScenarioConfig) -> Result<Graph, StageError> {
    let seed = cfg.seed.unwrap_or(0);
    let g = match &cfg.graph {
        GraphSource::ErdosRenyi { n, m } => erdos_renyi(*n, *m, seed),
        GraphSource::WattsStrogatz { n, k, beta } => watts_strogatz(*n, *k, *beta, seed),
        GraphSource::File(p) => load_graph(p),
    };
    g.map_err(|e| StageError::new("graph", e))
}

/// Drives i.i.d. uniform in `[-spread K, spread K]`.
pub fn drives(cfg: &ScenarioConfig, n: usize) -> Vec<f64> {
    let mut r = XorShift64Star::new(cfg.drive_seed());
    let half = cfg.drive_spread * cfg.strength;
    (0..n).map(|_| r.uniform(-half, half)).collect()
}

pub struct Scenario {
    pub graph: Graph,
    pub spec: System,
    pub fixed_point: FixedPoint,
}

impl Scenario {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self, StageError> {
        let graph = build_graph(cfg)?;
        let n = graph.node_count();
        let spec = SystemSpec::uniform(graph.clone(), Coupling::new(cfg.coupling, cfg.strength), drives(cfg, n))
            .map_err(|e| StageError::new("dynamics", e))?;
        let fixed_point = find_fixed_point(&spec, &vec![0.0; n], FIXED_POINT_TOL, FIXED_POINT_MAX_ITER)
            .map_err(|e| StageError::new("fixed-point", e))?;
        log::info!(
            "scenario: n = {n}, m = {}, lambda2 = {:.6e}, lambdan = {:.6e}, residual = {:.3e}",
            graph.edge_count(),
            fixed_point.lambda2(),
            fixed_point.lambda_max(),
            fixed_point.residual
        );
        Ok(Self { graph, spec, fixed_point })
    }

    pub fn n(&self) -> usize {
        self.graph.node_count()
    }

    /// The system under test: nonlinear simulation or its exact linearization.
    pub fn target(&self, cfg: &ScenarioConfig) -> Box<dyn ProbeTarget<f64>> {
        if cfg.linearized {
            return Box::new(LinearizedSystem::from_fixed_point(&self.fixed_point));
        }
        let mut sim = SimulatedSystem::new(self.spec.clone(), self.fixed_point.clone());
        if let Some(dt) = cfg.dt {
            sim = sim.with_dt(dt);
        }
        if cfg.noise > 0.0 {
            sim = sim.with_noise(cfg.noise, cfg.seed.unwrap_or(0) ^ 0x6E6F_6973_65);
        }
        Box::new(sim)
    }
}

pub fn scan_settings(cfg: &ScenarioConfig, n: usize) -> ScanSettings<f64> {
    let mut s = ScanSettings::new(n, cfg.amplitude());
    s.f_min = cfg.f_min;
    s.f_max = cfg.f_max;
    s.points = cfg.points;
    s.threshold_ratio = cfg.threshold;
    s.lambda2_level = cfg.lambda2_level;
    if let Some(level) = cfg.lambdan_level {
        s.lambdan_level = level;
    }
    s.plateau_points = cfg.plateau_points;
    s
}

pub fn burn_in(cfg: &ScenarioConfig) -> BurnIn<f64> {
    cfg.horizon.map_or(BurnIn::Auto, BurnIn::Horizon)
}

pub fn inference_settings(cfg: &ScenarioConfig, n: usize) -> InferenceSettings<f64> {
    let mut s = InferenceSettings::new(n, cfg.amplitude());
    s.freq_ratio = cfg.freq_ratio;
    s.reference = match cfg.reference {
        Reference::Estimated => FrequencyReference::Estimated,
        Reference::True => FrequencyReference::True,
    };
    s.node_count = if cfg.true_n {
        NodeCountPolicy::Known(n)
    } else {
        NodeCountPolicy::Estimate { freq_ratio: cfg.node_count_ratio }
    };
    s.scan = scan_settings(cfg, n);
    s.scan_node = cfg.scan_node;
    s.burn_in = burn_in(cfg);
    s.sampling = match cfg.measurement {
        Measurement::Average => WindowSampling::Average,
        // A quarter period into the window, where sin = 1.
        Measurement::Single => WindowSampling::Single { phase: 0.25 },
    };
    s.pairs_only = cfg.pairs_only;
    s
}
