//! Scenario configuration: defaults, INI file, then command-line flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ini::Ini;
use probenet::dynamics::CouplingKind;

/// Sections written by the tool into manifests and skipped on reload.
pub const OUTPUT_SECTIONS: &[&str] = &["run", "results", "timing"];

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    ErdosRenyi { n: usize, m: usize },
    WattsStrogatz { n: usize, k: usize, beta: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Estimated,
    True,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measurement {
    Average,
    Single,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: Option<u64>,
    pub graph: GraphSource,

    pub coupling: CouplingKind,
    pub strength: f64,
    /// Drives are uniform in `[-spread K, spread K]`.
    pub drive_spread: f64,
    pub drive_seed: Option<u64>,

    /// `None` means `1e-3 K`.
    pub amplitude: Option<f64>,
    pub freq_ratio: f64,
    pub node_count_ratio: f64,
    pub node_count_ratios: Vec<f64>,
    pub probe_nodes: Vec<usize>,
    pub reference: Reference,
    pub scan_node: usize,
    pub measurement: Measurement,
    pub pairs_only: bool,
    pub true_n: bool,
    pub sweep: Vec<f64>,

    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
    pub threshold: f64,
    pub lambda2_level: f64,
    /// `None` means `1.5 / n`.
    pub lambdan_level: Option<f64>,
    pub plateau_points: usize,

    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub linearized: bool,
    pub noise: f64,

    pub out_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: None,
            graph: GraphSource::ErdosRenyi { n: 120, m: 329 },
            coupling: CouplingKind::Kuramoto,
            strength: 1.0,
            drive_spread: 0.1,
            drive_seed: None,
            amplitude: None,
            freq_ratio: 0.01,
            node_count_ratio: 0.01,
            node_count_ratios: vec![0.02, 0.01, 0.005],
            probe_nodes: vec![0],
            reference: Reference::Estimated,
            scan_node: 0,
            measurement: Measurement::Average,
            pairs_only: false,
            true_n: false,
            sweep: vec![0.01, 0.05, 0.1, 0.5, 1.0],
            f_min: 1e-3,
            f_max: 1e2,
            points: 51,
            threshold: 0.1,
            lambda2_level: 0.9,
            lambdan_level: None,
            plateau_points: 4,
            dt: None,
            horizon: None,
            linearized: false,
            noise: 0.0,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|e| anyhow!("bad list item {x:?}: {e}")))
        .collect()
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => bail!("expected a boolean, got {other:?}"),
    }
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| anyhow!("{e}"))
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl ScenarioConfig {
    /// Reads `path` on top of the defaults. Relative graph paths are resolved
    /// against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::default();
        cfg.apply_ini(&text, base).with_context(|| format!("in config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn apply_ini(&mut self, text: &str, base: &Path) -> Result<()> {
        let ini = Ini::load_from_str(text)?;
        // Graph parameters are collected first because the kind decides which apply.
        let (mut kind, mut n, mut m, mut k, mut beta, mut file) = (None, None, None, None, None, None);
        for (section, props) in ini.iter() {
            let sec = section.unwrap_or("scenario");
            if OUTPUT_SECTIONS.contains(&sec) {
                continue;
            }
            for (key, value) in props.iter() {
                let ctx = || format!("[{sec}] {key} = {value}");
                match (sec, key) {
                    ("scenario", "seed") => self.seed = Some(parse(value).with_context(ctx)?),
                    ("scenario", "out_dir") => self.out_dir = PathBuf::from(value),
                    ("graph", "kind") => kind = Some(value.trim().to_ascii_lowercase()),
                    ("graph", "n") => n = Some(parse(value).with_context(ctx)?),
                    ("graph", "m") => m = Some(parse(value).with_context(ctx)?),
                    ("graph", "k") => k = Some(parse(value).with_context(ctx)?),
                    ("graph", "beta") => beta = Some(parse(value).with_context(ctx)?),
                    ("graph", "path") => file = Some(base.join(value.trim())),
                    ("dynamics", "coupling") => self.coupling = parse(value).with_context(ctx)?,
                    ("dynamics", "strength") => self.strength = parse(value).with_context(ctx)?,
                    ("dynamics", "drive_spread") => self.drive_spread = parse(value).with_context(ctx)?,
                    ("dynamics", "drive_seed") => self.drive_seed = Some(parse(value).with_context(ctx)?),
                    ("probe", "amplitude") => self.amplitude = Some(parse(value).with_context(ctx)?),
                    ("probe", "freq_ratio") => self.freq_ratio = parse(value).with_context(ctx)?,
                    ("probe", "node_count_ratio") => self.node_count_ratio = parse(value).with_context(ctx)?,
                    ("probe", "node_count_ratios") => self.node_count_ratios = parse_list(value).with_context(ctx)?,
                    ("probe", "probe_nodes") => self.probe_nodes = parse_list(value).with_context(ctx)?,
                    ("probe", "reference") => {
                        self.reference = match value.trim() {
                            "estimated" => Reference::Estimated,
                            "true" => Reference::True,
                            other => bail!("{}: expected estimated|true, got {other:?}", ctx()),
                        }
                    }
                    ("probe", "scan_node") => self.scan_node = parse(value).with_context(ctx)?,
                    ("probe", "measurement") => {
                        self.measurement = match value.trim() {
                            "average" => Measurement::Average,
                            "single" => Measurement::Single,
                            other => bail!("{}: expected average|single, got {other:?}", ctx()),
                        }
                    }
                    ("probe", "pairs_only") => self.pairs_only = parse_bool(value).with_context(ctx)?,
                    ("probe", "true_n") => self.true_n = parse_bool(value).with_context(ctx)?,
                    ("probe", "sweep") => self.sweep = parse_list(value).with_context(ctx)?,
                    ("scan", "f_min") => self.f_min = parse(value).with_context(ctx)?,
                    ("scan", "f_max") => self.f_max = parse(value).with_context(ctx)?,
                    ("scan", "points") => self.points = parse(value).with_context(ctx)?,
                    ("scan", "threshold") => self.threshold = parse(value).with_context(ctx)?,
                    ("scan", "lambda2_level") => self.lambda2_level = parse(value).with_context(ctx)?,
                    ("scan", "lambdan_level") => {
                        self.lambdan_level = match value.trim() {
                            "auto" => None,
                            v => Some(parse(v).with_context(ctx)?),
                        }
                    }
                    ("scan", "plateau_points") => self.plateau_points = parse(value).with_context(ctx)?,
                    ("integrator", "dt") => {
                        self.dt = match value.trim() {
                            "auto" => None,
                            v => Some(parse(v).with_context(ctx)?),
                        }
                    }
                    ("integrator", "horizon") => {
                        self.horizon = match value.trim() {
                            "auto" => None,
                            v => Some(parse(v).with_context(ctx)?),
                        }
                    }
                    ("integrator", "linearized") => self.linearized = parse_bool(value).with_context(ctx)?,
                    ("integrator", "noise") => self.noise = parse(value).with_context(ctx)?,
                    _ => bail!("unknown key {key:?} in section [{sec}]"),
                }
            }
        }
        self.set_graph(kind.as_deref(), n, m, k, beta, file)
    }

    /// Merges graph parameters into the current source. A missing kind keeps
    /// the current one.
    pub fn set_graph(
        &mut self,
        kind: Option<&str>,
        n: Option<usize>,
        m: Option<usize>,
        k: Option<usize>,
        beta: Option<f64>,
        file: Option<PathBuf>,
    ) -> Result<()> {
        let current = match &self.graph {
            GraphSource::ErdosRenyi { .. } => "er",
            GraphSource::WattsStrogatz { .. } => "ws",
            GraphSource::File(_) => "file",
        };
        let kind = kind.unwrap_or(if file.is_some() { "file" } else { current });
        let (cur_n, cur_m, cur_k, cur_beta) = match &self.graph {
            GraphSource::ErdosRenyi { n, m } => (*n, *m, 4, 0.1),
            GraphSource::WattsStrogatz { n, k, beta } => (*n, 329, *k, *beta),
            GraphSource::File(_) => (120, 329, 4, 0.1),
        };
        self.graph = match kind {
            "er" => GraphSource::ErdosRenyi { n: n.unwrap_or(cur_n), m: m.unwrap_or(cur_m) },
            "ws" => GraphSource::WattsStrogatz { n: n.unwrap_or(cur_n), k: k.unwrap_or(cur_k), beta: beta.unwrap_or(cur_beta) },
            "file" => match (file, &self.graph) {
                (Some(p), _) => GraphSource::File(p),
                (None, GraphSource::File(p)) => GraphSource::File(p.clone()),
                (None, _) => bail!("graph kind 'file' needs a path"),
            },
            other => bail!("unknown graph kind {other:?} (expected er, ws or file)"),
        };
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("strength", self.strength),
            ("freq_ratio", self.freq_ratio),
            ("node_count_ratio", self.node_count_ratio),
            ("f_min", self.f_min),
            ("f_max", self.f_max),
            ("threshold", self.threshold),
            ("lambda2_level", self.lambda2_level),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive and finite, got {v}");
            }
        }
        for (name, v) in [("amplitude", self.amplitude), ("dt", self.dt), ("horizon", self.horizon), ("lambdan_level", self.lambdan_level)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("{name} must be positive and finite, got {v}");
                }
            }
        }
        if !(self.drive_spread >= 0.0) || !(self.noise >= 0.0) {
            bail!("drive_spread and noise must be non-negative");
        }
        if self.node_count_ratios.iter().chain(&self.sweep).any(|r| !(*r > 0.0)) {
            bail!("frequency ratios must be positive");
        }
        if self.seed.is_none() && !matches!(self.graph, GraphSource::File(_)) {
            bail!("a seed is required for generated graphs (--seed or [scenario] seed)");
        }
        Ok(())
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude.unwrap_or(1e-3 * self.strength)
    }

    /// Seed of the natural drives: explicit, else the scenario seed, else zero.
    pub fn drive_seed(&self) -> u64 {
        self.drive_seed.or(self.seed).unwrap_or(0)
    }

    /// Fully resolved configuration as INI text; reloading it reproduces `self`.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<f64>| v.map_or("auto".to_string(), |x| x.to_string());
        writeln!(s, "[scenario]").unwrap();
        if let Some(seed) = self.seed {
            writeln!(s, "seed = {seed}").unwrap();
        }
        writeln!(s, "out_dir = {}", self.out_dir.display()).unwrap();
        writeln!(s, "\n[graph]").unwrap();
        match &self.graph {
            GraphSource::ErdosRenyi { n, m } => writeln!(s, "kind = er\nn = {n}\nm = {m}").unwrap(),
            GraphSource::WattsStrogatz { n, k, beta } => writeln!(s, "kind = ws\nn = {n}\nk = {k}\nbeta = {beta}").unwrap(),
            GraphSource::File(p) => {
                let abs = std::fs::canonicalize(p).unwrap_or_else(|_| p.clone());
                writeln!(s, "kind = file\npath = {}", abs.display()).unwrap()
            }
        }
        writeln!(s, "\n[dynamics]").unwrap();
        writeln!(s, "coupling = {}", self.coupling).unwrap();
        writeln!(s, "strength = {}", self.strength).unwrap();
        writeln!(s, "drive_spread = {}", self.drive_spread).unwrap();
        writeln!(s, "drive_seed = {}", self.drive_seed()).unwrap();
        writeln!(s, "\n[probe]").unwrap();
        writeln!(s, "amplitude = {}", self.amplitude()).unwrap();
        writeln!(s, "freq_ratio = {}", self.freq_ratio).unwrap();
        writeln!(s, "node_count_ratio = {}", self.node_count_ratio).unwrap();
        writeln!(s, "node_count_ratios = {}", join(&self.node_count_ratios)).unwrap();
        writeln!(s, "probe_nodes = {}", join(&self.probe_nodes)).unwrap();
        let reference = match self.reference {
            Reference::Estimated => "estimated",
            Reference::True => "true",
        };
        writeln!(s, "reference = {reference}").unwrap();
        writeln!(s, "scan_node = {}", self.scan_node).unwrap();
        let measurement = match self.measurement {
            Measurement::Average => "average",
            Measurement::Single => "single",
        };
        writeln!(s, "measurement = {measurement}").unwrap();
        writeln!(s, "pairs_only = {}", self.pairs_only).unwrap();
        writeln!(s, "true_n = {}", self.true_n).unwrap();
        writeln!(s, "sweep = {}", join(&self.sweep)).unwrap();
        writeln!(s, "\n[scan]").unwrap();
        writeln!(s, "f_min = {}", self.f_min).unwrap();
        writeln!(s, "f_max = {}", self.f_max).unwrap();
        writeln!(s, "points = {}", self.points).unwrap();
        writeln!(s, "threshold = {}", self.threshold).unwrap();
        writeln!(s, "lambda2_level = {}", self.lambda2_level).unwrap();
        writeln!(s, "lambdan_level = {}", opt(self.lambdan_level)).unwrap();
        writeln!(s, "plateau_points = {}", self.plateau_points).unwrap();
        writeln!(s, "\n[integrator]").unwrap();
        writeln!(s, "dt = {}", opt(self.dt)).unwrap();
        writeln!(s, "horizon = {}", opt(self.horizon)).unwrap();
        writeln!(s, "linearized = {}", self.linearized).unwrap();
        writeln!(s, "noise = {}", self.noise).unwrap();
        s
    }
}
