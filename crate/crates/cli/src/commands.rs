//! Subcommand implementations.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, Context};
use probenet::dynamics::{integrate, Coupling, CouplingKind, ProbeSignal, SystemSpec};
use probenet::inference::{
    estimate_node_count, infer_network_with_scan, scan_spectrum, NetworkInference, ProbeTarget, ResponseRecord,
    SpectrumScanResult,
};
use probenet::laplacian::{laplacian_from_edge_weights, unweighted_laplacian};
use probenet::oracle::{brute_force_response, closed_form_response};
use probenet::rng::XorShift64Star;
use probenet::erdos_renyi;
use rayon::prelude::*;

use crate::cli::Command;
use crate::config::{Reference, ScenarioConfig};
use crate::output::{num, write_csv, write_matrix, write_scatter, Manifest};
use crate::scenario::{self, Scenario};
use crate::StageError;

pub fn run(command: &Command) -> Result<(), StageError> {
    let mut common = command.common().clone();
    if let Command::GenGraph { kind: Some(kind), .. } = command {
        common.graph.get_or_insert_with(|| kind.clone());
    }
    let mut cfg = common.resolve().map_err(|e| StageError::new("config", e))?;
    if matches!(command, Command::OracleCheck { .. }) && cfg.seed.is_none() {
        cfg.seed = Some(0);
    }
    cfg.validate().map_err(|e| StageError::new("config", e))?;
    match command {
        Command::GenGraph { out, .. } => gen_graph(&cfg, out.clone()),
        Command::ScanSpectrum { .. } => with_out_dir(&cfg, scan),
        Command::EstimateN { .. } => with_out_dir(&cfg, estimate_n),
        Command::InferNetwork { common } => with_out_dir(&cfg, |c| infer(c, common.sweep.is_some())),
        Command::FullPipeline { .. } => with_out_dir(&cfg, full_pipeline),
        Command::OracleCheck { .. } => oracle_check(&cfg),
    }
}

fn io<E: Into<anyhow::Error>>(e: E) -> StageError {
    StageError::new("io", e)
}

fn with_out_dir(cfg: &ScenarioConfig, f: impl FnOnce(&ScenarioConfig) -> Result<(), StageError>) -> Result<(), StageError> {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))
        .map_err(io)?;
    f(cfg)
}

fn out(cfg: &ScenarioConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

fn inference_error(e: probenet::inference::InferenceError, fallback: &'static str) -> StageError {
    let stage = match e.stage() {
        Some(s) => match s {
            probenet::inference::Stage::Scan => "scan-spectrum",
            probenet::inference::Stage::NodeCount => "estimate-n",
            probenet::inference::Stage::Probing => "probing",
            probenet::inference::Stage::Reconstruction => "reconstruction",
        },
        None => fallback,
    };
    StageError::new(stage, e)
}

fn gen_graph(cfg: &ScenarioConfig, out_path: Option<PathBuf>) -> Result<(), StageError> {
    let g = scenario::build_graph(cfg)?;
    let path = match out_path {
        Some(p) => p,
        None => {
            fs::create_dir_all(&cfg.out_dir).map_err(io)?;
            out(cfg, "graph.edges")
        }
    };
    g.write(&path).map_err(io)?;
    let d = unweighted_laplacian::<f64>(&g).spectrum().map_err(|e| StageError::new("graph", e))?;
    println!(
        "n = {}\nm = {}\nlambda2 = {}\nlambdan = {}\nwritten {}",
        g.node_count(),
        g.edge_count(),
        num(d.values[1]),
        num(d.values[g.node_count() - 1]),
        path.display()
    );
    Ok(())
}

fn manifest(cfg: &ScenarioConfig, command: &str, s: &Scenario) -> Manifest {
    let mut m = Manifest::new(cfg.to_ini(), command);
    m.result("n", s.n());
    m.result("m", s.graph.edge_count());
    m.result("lambda2", num(s.fixed_point.lambda2()));
    m.result("lambdan", num(s.fixed_point.lambda_max()));
    m.result("fixed_point_residual", num(s.fixed_point.residual));
    m
}

fn run_scan(cfg: &ScenarioConfig, s: &Scenario, target: &dyn ProbeTarget<f64>) -> Result<SpectrumScanResult<f64>, StageError> {
    if cfg.scan_node >= s.n() {
        return Err(StageError::new("config", anyhow!("scan_node {} outside 0..{}", cfg.scan_node, s.n())));
    }
    scan_spectrum(target, cfg.scan_node, &scenario::scan_settings(cfg, s.n())).map_err(|e| StageError::new("scan-spectrum", e))
}

fn write_scan(cfg: &ScenarioConfig, scan: &SpectrumScanResult<f64>, m: &mut Manifest, s: &Scenario) -> Result<(), StageError> {
    let rows = scan.frequencies.iter().zip(&scan.responding_fraction).map(|(&w, &f)| {
        format!("{},{},{},{}", num(w), num(f), num(scan.lambda2_hat), num(scan.lambdan_hat))
    });
    write_csv(&out(cfg, "scan.csv"), "omega0,fraction,lambda2_hat,lambdan_hat", rows).map_err(io)?;
    m.result("lambda2_hat", num(scan.lambda2_hat));
    m.result("lambdan_hat", num(scan.lambdan_hat));
    m.result("lambda2_hat_over_lambda2", num(scan.lambda2_hat / s.fixed_point.lambda2()));
    m.result("lambdan_hat_over_lambdan", num(scan.lambdan_hat / s.fixed_point.lambda_max()));
    Ok(())
}

fn scan(cfg: &ScenarioConfig) -> Result<(), StageError> {
    let t0 = Instant::now();
    let s = Scenario::build(cfg)?;
    let target = s.target(cfg);
    let mut m = manifest(cfg, "scan-spectrum", &s);
    let result = run_scan(cfg, &s, target.as_ref())?;
    write_scan(cfg, &result, &mut m, &s)?;
    m.timing("scan", t0.elapsed().as_secs_f64());
    m.write(&out(cfg, "manifest.ini")).map_err(io)?;
    println!(
        "lambda2_hat = {} (true {})\nlambdan_hat = {} (true {})",
        num(result.lambda2_hat),
        num(s.fixed_point.lambda2()),
        num(result.lambdan_hat),
        num(s.fixed_point.lambda_max())
    );
    Ok(())
}

/// `(lambda2 reference, lambda2 bound for the low-frequency guard)`.
fn reference_lambda2(cfg: &ScenarioConfig, s: &Scenario, scan: Option<&SpectrumScanResult<f64>>) -> (f64, f64) {
    match (cfg.reference, scan) {
        (Reference::Estimated, Some(sc)) => (sc.lambda2_hat, sc.lambda2_hat),
        _ => (s.fixed_point.lambda2(), s.fixed_point.lambda2()),
    }
}

fn run_node_counts(
    cfg: &ScenarioConfig,
    s: &Scenario,
    target: &dyn ProbeTarget<f64>,
    lambda2_ref: f64,
    guard: f64,
) -> Result<Vec<(usize, f64, f64)>, StageError> {
    let jobs: Vec<(usize, f64)> =
        cfg.probe_nodes.iter().flat_map(|&i| cfg.node_count_ratios.iter().map(move |&r| (i, r))).collect();
    if let Some(&(bad, _)) = jobs.iter().find(|(i, _)| *i >= s.n()) {
        return Err(StageError::new("config", anyhow!("probe node {bad} outside 0..{}", s.n())));
    }
    let amplitude = cfg.amplitude();
    let burn = scenario::burn_in(cfg);
    jobs.par_iter()
        .map(|&(i, ratio)| {
            let probe = ProbeSignal::new(i, amplitude, ratio * lambda2_ref);
            let p = probe.period();
            let b = burn.resolve(lambda2_ref, p)?;
            let traj = target.probe(&probe, b, b + p)?;
            let rec = ResponseRecord::from_trajectory(&traj, &probe, i, b, p);
            let est = estimate_node_count(&rec, Some(guard))?;
            Ok((i, ratio, est.n_hat))
        })
        .collect::<Result<Vec<_>, probenet::inference::InferenceError>>()
        .map_err(|e| StageError::new("estimate-n", e))
}

fn write_node_counts(cfg: &ScenarioConfig, rows: &[(usize, f64, f64)], m: &mut Manifest) -> Result<(), StageError> {
    write_csv(
        &out(cfg, "node_count.csv"),
        "probe_node,omega0_over_lambda2,n_hat",
        rows.iter().map(|(i, r, n)| format!("{i},{},{}", num(*r), num(*n))),
    )
    .map_err(io)?;
    for (i, r, n) in rows {
        m.result(&format!("n_hat_node{i}_ratio{r}"), num(*n));
    }
    Ok(())
}

fn estimate_n(cfg: &ScenarioConfig) -> Result<(), StageError> {
    let t0 = Instant::now();
    let s = Scenario::build(cfg)?;
    let target = s.target(cfg);
    let mut m = manifest(cfg, "estimate-n", &s);
    let scan = match cfg.reference {
        Reference::Estimated => Some(run_scan(cfg, &s, target.as_ref())?),
        Reference::True => None,
    };
    if let Some(sc) = &scan {
        m.result("lambda2_hat", num(sc.lambda2_hat));
    }
    let (l2, guard) = reference_lambda2(cfg, &s, scan.as_ref());
    let rows = run_node_counts(cfg, &s, target.as_ref(), l2, guard)?;
    write_node_counts(cfg, &rows, &mut m)?;
    m.timing("estimate_n", t0.elapsed().as_secs_f64());
    m.write(&out(cfg, "manifest.ini")).map_err(io)?;
    for (i, r, n) in &rows {
        println!("node {i} ratio {r}: n_hat = {n:.4}");
    }
    Ok(())
}

fn run_inference(
    cfg: &ScenarioConfig,
    s: &Scenario,
    target: &dyn ProbeTarget<f64>,
    scan: &SpectrumScanResult<f64>,
    ratio: f64,
) -> Result<NetworkInference<f64>, StageError> {
    let mut settings = scenario::inference_settings(cfg, s.n());
    settings.freq_ratio = ratio;
    infer_network_with_scan(target, &settings, scan.clone()).map_err(|e| inference_error(e, "probing"))
}

fn write_inference(cfg: &ScenarioConfig, s: &Scenario, r: &NetworkInference<f64>, m: &mut Manifest) -> Result<(), StageError> {
    let truth = s.fixed_point.jacobian.matrix();
    write_matrix(&out(cfg, "jhat.csv"), &r.estimate.j_hat).map_err(io)?;
    write_matrix(&out(cfg, "jpinv_hat.csv"), &r.estimate.j_pinv_hat).map_err(io)?;
    write_scatter(&out(cfg, "scatter.csv"), truth, &r.estimate.j_hat).map_err(io)?;
    m.result("omega0", num(r.omega0));
    m.result("omega0_over_lambda2", num(r.omega0 / s.fixed_point.lambda2()));
    m.result("burn_in", num(r.burn_in));
    m.result("n_used", num(r.estimate.n_used));
    m.result("constant_mode_overlap", num(r.estimate.constant_mode_overlap));
    m.result("raw_asymmetry", num(r.asymmetry));
    if let Some(e) = r.estimate.rel_frobenius_error {
        m.result("rel_frobenius_error", num(e));
    }
    if let Some(c) = r.correlation {
        m.result("scatter_correlation", num(c));
    }
    for t in &r.timings {
        m.timing(&t.stage.to_string().replace('-', "_"), t.elapsed.as_secs_f64());
    }
    println!(
        "omega0/lambda2 = {:.4}, n_used = {:.3}, rel_frobenius_error = {}, correlation = {}",
        r.omega0 / s.fixed_point.lambda2(),
        r.estimate.n_used,
        r.estimate.rel_frobenius_error.map_or("n/a".into(), num),
        r.correlation.map_or("n/a".into(), num)
    );
    Ok(())
}

fn run_sweep(
    cfg: &ScenarioConfig,
    s: &Scenario,
    target: &dyn ProbeTarget<f64>,
    scan: &SpectrumScanResult<f64>,
    done: Option<(f64, &NetworkInference<f64>)>,
    m: &mut Manifest,
) -> Result<(), StageError> {
    let t0 = Instant::now();
    let mut rows = Vec::new();
    for &ratio in &cfg.sweep {
        let err = match done {
            Some((r, res)) if r == ratio => res.estimate.rel_frobenius_error,
            _ => run_inference(cfg, s, target, scan, ratio)?.estimate.rel_frobenius_error,
        }
        .ok_or_else(|| StageError::new("reconstruction", anyhow!("no ground truth for the error sweep")))?;
        log::info!("sweep ratio {ratio}: rel error {err:.4e}");
        println!("sweep ratio {ratio}: rel_frobenius_error = {err:.6e}");
        rows.push(format!("{},{}", num(ratio), num(err)));
    }
    write_csv(&out(cfg, "sweep.csv"), "ratio,rel_frobenius_error", rows).map_err(io)?;
    m.timing("sweep", t0.elapsed().as_secs_f64());
    Ok(())
}

fn infer(cfg: &ScenarioConfig, sweep: bool) -> Result<(), StageError> {
    let s = Scenario::build(cfg)?;
    let target = s.target(cfg);
    let mut m = manifest(cfg, "infer-network", &s);
    let t0 = Instant::now();
    let scan = run_scan(cfg, &s, target.as_ref())?;
    m.timing("scan", t0.elapsed().as_secs_f64());
    m.result("lambda2_hat", num(scan.lambda2_hat));
    let r = run_inference(cfg, &s, target.as_ref(), &scan, cfg.freq_ratio)?;
    write_inference(cfg, &s, &r, &mut m)?;
    if sweep {
        run_sweep(cfg, &s, target.as_ref(), &scan, Some((cfg.freq_ratio, &r)), &mut m)?;
    }
    m.write(&out(cfg, "manifest.ini")).map_err(io)
}

fn full_pipeline(cfg: &ScenarioConfig) -> Result<(), StageError> {
    let s = Scenario::build(cfg)?;
    let target = s.target(cfg);
    let mut m = manifest(cfg, "full-pipeline", &s);

    let t0 = Instant::now();
    let scan = run_scan(cfg, &s, target.as_ref())?;
    write_scan(cfg, &scan, &mut m, &s)?;
    m.timing("scan", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let (l2, guard) = reference_lambda2(cfg, &s, Some(&scan));
    let rows = run_node_counts(cfg, &s, target.as_ref(), l2, guard)?;
    write_node_counts(cfg, &rows, &mut m)?;
    m.timing("node_count_study", t0.elapsed().as_secs_f64());

    let r = run_inference(cfg, &s, target.as_ref(), &scan, cfg.freq_ratio)?;
    write_inference(cfg, &s, &r, &mut m)?;
    run_sweep(cfg, &s, target.as_ref(), &scan, Some((cfg.freq_ratio, &r)), &mut m)?;
    m.write(&out(cfg, "manifest.ini")).map_err(io)
}

/// Tolerances of the oracle report.
pub const RK4_VS_CLOSED_FORM: f64 = 1e-6;
pub const CLOSED_FORM_VS_BRUTE_FORCE: f64 = 1e-9;
pub const FIXED_POINT_RESIDUAL: f64 = 1e-10;
const ORACLE_GRAPHS: usize = 5;

/// Worst `|integrate - closed form|` and `|brute force - closed form|` on a
/// random 10-node linear-coupling system.
pub fn linear_oracle_gaps(seed: u64) -> anyhow::Result<(f64, f64)> {
    let mut r = XorShift64Star::new(seed);
    let n = 10;
    let m = 9 + r.below(12) as usize;
    let g = erdos_renyi(n, m, r.next_u64())?;
    let weights: Vec<f64> = (0..m).map(|_| r.uniform(0.5, 1.5)).collect();
    let couplings = weights.iter().map(|&k| Coupling::new(CouplingKind::Linear, k)).collect();
    let l = laplacian_from_edge_weights(&g, &weights)?;
    let d = l.spectrum()?;
    let spec = SystemSpec::new(g, couplings, vec![0.0; n])?;
    let probe = ProbeSignal::new(r.below(n as u64) as usize, 1e-3, d.values[1] * r.uniform(0.05, 2.0));
    let horizon = 10.0 * probe.period();
    let ln = d.values[n - 1];

    let dt = (0.05 / ln).min(probe.period() / 400.0);
    let stride = ((horizon / dt) as usize / 200).max(1);
    let traj = integrate(&spec, &vec![0.0; n], Some(&probe), horizon, dt, stride)?;
    let mut rk4 = 0.0f64;
    for (k, &t) in traj.times.iter().enumerate() {
        for j in 0..n {
            rk4 = rk4.max((traj.states[[k, j]] - closed_form_response(&d, j, &probe, t)).abs());
        }
    }

    let dt = (0.005 / ln).min(probe.period() / 4000.0);
    let stride = ((horizon / dt) as usize / 200).max(1);
    let bf = brute_force_response(&l, &probe, horizon, dt, stride)?;
    let mut brute = 0.0f64;
    for (k, &t) in bf.times.iter().enumerate() {
        for j in 0..n {
            brute = brute.max((bf.states[[k, j]] - closed_form_response(&d, j, &probe, t)).abs());
        }
    }
    Ok((rk4, brute))
}

fn oracle_check(cfg: &ScenarioConfig) -> Result<(), StageError> {
    let base = cfg.seed.unwrap_or(0);
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..ORACLE_GRAPHS {
        let (a, b) = linear_oracle_gaps(base.wrapping_add(k as u64)).map_err(|e| StageError::new("oracle", e))?;
        worst = (worst.0.max(a), worst.1.max(b));
    }
    let s = Scenario::build(cfg)?;
    let checks = [
        ("rk4 vs closed form", worst.0, RK4_VS_CLOSED_FORM),
        ("closed form vs brute force", worst.1, CLOSED_FORM_VS_BRUTE_FORCE),
        ("fixed-point residual", s.fixed_point.residual, FIXED_POINT_RESIDUAL),
    ];
    let mut failed = Vec::new();
    for (name, value, tol) in checks {
        let ok = value <= tol;
        println!("{} {name}: {value:.3e} (tolerance {tol:.0e})", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(StageError::new("oracle", anyhow!("failed checks: {}", failed.join(", "))))
    }
}
