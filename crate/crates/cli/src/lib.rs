//! Experiment driver for probenet: scenario configuration, seeded runs and
//! CSV/manifest outputs.

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;
pub mod scenario;

/// Failure tagged with the pipeline stage it came from.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub source: anyhow::Error,
}

impl StageError {
    pub fn new(stage: &'static str, source: impl Into<anyhow::Error>) -> Self {
        Self { stage, source: source.into() }
    }

    /// Process exit code; distinct per stage.
    pub fn exit_code(&self) -> i32 {
        match self.stage {
            "config" => 2,
            "graph" => 3,
            "dynamics" => 4,
            "fixed-point" => 5,
            "scan-spectrum" => 6,
            "estimate-n" => 7,
            "probing" => 8,
            "reconstruction" => 9,
            "io" => 10,
            "oracle" => 11,
            _ => 1,
        }
    }
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "stage {} failed: {:#}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {}

/// Caps the global thread pool at `PROBENET_THREADS` when set.
pub fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("PROBENET_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("PROBENET_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("PROBENET_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}
