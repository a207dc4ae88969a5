//! Command-line surface.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use probenet::dynamics::CouplingKind;

use crate::config::{Reference, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "probenet", version, about = "Network inference by sinusoidal probing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an Erdős–Rényi or Watts–Strogatz graph and write its edge list.
    GenGraph {
        /// er or ws (defaults to the configured kind)
        kind: Option<String>,
        /// Output file (default: <out-dir>/graph.edges)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the probe frequency and estimate the spectrum range.
    ScanSpectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the number of nodes from low-frequency responses.
    EstimateN {
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct the Jacobian from one probe per node.
    InferNetwork {
        #[command(flatten)]
        common: Common,
    },
    /// Scan, node count, reconstruction and frequency-ratio sweep in one run.
    FullPipeline {
        #[command(flatten)]
        common: Common,
    },
    /// Cross-check the simulator, the closed-form response and the fixed-point solver.
    OracleCheck {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// INI-style scenario file; flags override its values
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub out_dir: Option<PathBuf>,
    /// omega0 / lambda2 for reconstruction
    #[arg(long, value_name = "F")]
    pub freq_ratio: Option<f64>,
    /// Probe amplitude a0 (default 1e-3 K)
    #[arg(long, value_name = "F")]
    pub amplitude: Option<f64>,
    /// Fixed integration step
    #[arg(long, value_name = "F")]
    pub dt: Option<f64>,
    /// Total length of each probing run; measurement uses its last period
    #[arg(long, value_name = "F")]
    pub horizon: Option<f64>,
    /// Probe the exact linearization instead of simulating the nonlinear system
    #[arg(long)]
    pub linearized: bool,
    /// One experiment per ordered node pair
    #[arg(long)]
    pub pairs_only: bool,
    /// Amplitude of additive per-step noise
    #[arg(long, value_name = "F")]
    pub noise: Option<f64>,

    /// er, ws or file
    #[arg(long, value_name = "KIND")]
    pub graph: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub graph_file: Option<PathBuf>,
    /// kuramoto, linear or tanh
    #[arg(long)]
    pub coupling: Option<CouplingKind>,
    /// estimated or true: which lambda2 the frequency ratios refer to
    #[arg(long)]
    pub reference: Option<String>,
    /// Use the true node count in the reconstruction
    #[arg(long)]
    pub true_n: bool,
    /// Frequency ratios for the reconstruction-error sweep
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub sweep: Option<Vec<f64>>,
    /// Frequency ratios for node-count estimation
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub ratios: Option<Vec<f64>>,
    /// Probed nodes for node-count estimation
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub probe_nodes: Option<Vec<usize>>,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::GenGraph { common, .. }
            | Command::ScanSpectrum { common }
            | Command::EstimateN { common }
            | Command::InferNetwork { common }
            | Command::FullPipeline { common }
            | Command::OracleCheck { common } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::GenGraph { .. } => "gen-graph",
            Command::ScanSpectrum { .. } => "scan-spectrum",
            Command::EstimateN { .. } => "estimate-n",
            Command::InferNetwork { .. } => "infer-network",
            Command::FullPipeline { .. } => "full-pipeline",
            Command::OracleCheck { .. } => "oracle-check",
        }
    }
}

impl Common {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::from_file(p)?,
            None => ScenarioConfig::default(),
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Result<()> {
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        if let Some(v) = self.freq_ratio {
            cfg.freq_ratio = v;
        }
        if self.amplitude.is_some() {
            cfg.amplitude = self.amplitude;
        }
        if self.dt.is_some() {
            cfg.dt = self.dt;
        }
        if self.horizon.is_some() {
            cfg.horizon = self.horizon;
        }
        cfg.linearized |= self.linearized;
        cfg.pairs_only |= self.pairs_only;
        cfg.true_n |= self.true_n;
        if let Some(v) = self.noise {
            cfg.noise = v;
        }
        if self.graph.is_some() || self.n.is_some() || self.m.is_some() || self.k.is_some() || self.beta.is_some() || self.graph_file.is_some()
        {
            cfg.set_graph(self.graph.as_deref(), self.n, self.m, self.k, self.beta, self.graph_file.clone())?;
        }
        if let Some(c) = self.coupling {
            cfg.coupling = c;
        }
        if let Some(r) = &self.reference {
            cfg.reference = match r.as_str() {
                "estimated" => Reference::Estimated,
                "true" => Reference::True,
                other => bail!("--reference expects estimated or true, got {other:?}"),
            };
        }
        if let Some(v) = &self.sweep {
            cfg.sweep = v.clone();
        }
        if let Some(v) = &self.ratios {
            cfg.node_count_ratios = v.clone();
        }
        if let Some(v) = &self.probe_nodes {
            cfg.probe_nodes = v.clone();
        }
        Ok(())
    }
}
