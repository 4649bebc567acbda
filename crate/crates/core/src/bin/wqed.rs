use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wqed::lattice::{evolve_exact, orthogonality_probe, LatticeSpec};
use wqed::markov;
use wqed::spectral::{
    closure_check, default_xgrid, field_snapshot, total_probability, trajectory, InitialState,
    QuadratureSpec, SpectralError,
};
use wqed::{Subspace, SystemParams};

const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_NON_CONVERGENCE: u8 = 3;

/// Exact two-qubit waveguide dynamics: spectra, trajectories, field maps.
#[derive(Parser, Debug)]
#[command(name = "wqed", version, disable_help_subcommand = true)]
struct Cli {
    /// spectrum | evolve | field | closure | markov-compare | oracle-compare
    mode: String,
    /// flat key=value config file; flags below override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// output path prefix (files get mode-specific suffixes)
    #[arg(long, default_value = "wqed")]
    out: String,

    #[arg(long = "gamma_over_omega", alias = "gamma-over-omega")]
    gamma_over_omega: Option<f64>,
    #[arg(long = "Gamma_over_gamma", alias = "gamma_res_over_gamma")]
    big_gamma_over_gamma: Option<f64>,
    #[arg(long = "d_over_lambda", alias = "d-over-lambda")]
    d_over_lambda: Option<f64>,
    /// trajectory length in units of gamma*t
    #[arg(long = "t_max", alias = "t-max")]
    t_max: Option<f64>,
    #[arg(long = "n_points", alias = "n-points")]
    n_points: Option<usize>,
    /// integration window half-width in units of 2*gamma + Gamma
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long = "base_nodes", alias = "base-nodes")]
    base_nodes: Option<usize>,
    #[arg(long)]
    refine: Option<u32>,
    /// comma-separated snapshot times in gamma*t (field mode)
    #[arg(long = "snapshot_times", alias = "snapshot-times")]
    snapshot_times: Option<String>,
    /// x grid bounds in units of lambda (field mode); defaults to the light cone
    #[arg(long = "x_min", alias = "x-min")]
    x_min: Option<f64>,
    #[arg(long = "x_max", alias = "x-max")]
    x_max: Option<f64>,
    #[arg(long = "n_x", alias = "n-x")]
    n_x: Option<usize>,
    /// detuning grid bounds, (eps - Omega)/gamma (spectrum mode)
    #[arg(long = "u_min", alias = "u-min")]
    u_min: Option<f64>,
    #[arg(long = "u_max", alias = "u-max")]
    u_max: Option<f64>,
    #[arg(long = "n_eps", alias = "n-eps")]
    n_eps: Option<usize>,
    #[arg(long = "n_wg", alias = "n-wg")]
    n_wg: Option<usize>,
    #[arg(long = "n_res", alias = "n-res")]
    n_res: Option<usize>,
    #[arg(long = "wg_window", alias = "wg-window")]
    wg_window: Option<f64>,
    #[arg(long = "res_window", alias = "res-window")]
    res_window: Option<f64>,
}

#[derive(Debug, Clone)]
struct RunConfig {
    mode: String,
    out: String,
    gamma_over_omega: f64,
    big_gamma_over_gamma: f64,
    d_over_lambda: f64,
    t_max: f64,
    n_points: usize,
    kappa: f64,
    base_nodes: usize,
    refine: u32,
    snapshot_times: Vec<f64>,
    x_min: Option<f64>,
    x_max: Option<f64>,
    n_x: usize,
    u_min: f64,
    u_max: f64,
    n_eps: usize,
    n_wg: usize,
    n_res: usize,
    wg_window: f64,
    res_window: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: String::new(),
            out: "wqed".into(),
            gamma_over_omega: 0.01,
            big_gamma_over_gamma: 0.1,
            d_over_lambda: 1.0,
            t_max: 10.0,
            n_points: 400,
            kappa: 25.0,
            base_nodes: 12,
            refine: 0,
            snapshot_times: vec![0.5, 1.0, 3.0],
            x_min: None,
            x_max: None,
            n_x: 801,
            u_min: -6.0,
            u_max: 6.0,
            n_eps: 601,
            n_wg: 4000,
            n_res: 4000,
            wg_window: 640.0,
            res_window: 160.0,
        }
    }
}

#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("invalid value for {key}: {value:?}")))
}

fn parse_times(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

impl RunConfig {
    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "mode" => self.mode = value.trim().to_string(),
            "out" => self.out = value.trim().to_string(),
            "gamma_over_omega" => self.gamma_over_omega = parse_num(key, value)?,
            "Gamma_over_gamma" | "gamma_res_over_gamma" => {
                self.big_gamma_over_gamma = parse_num(key, value)?
            }
            "d_over_lambda" => self.d_over_lambda = parse_num(key, value)?,
            "t_max" => self.t_max = parse_num(key, value)?,
            "n_points" => self.n_points = parse_num(key, value)?,
            "kappa" => self.kappa = parse_num(key, value)?,
            "base_nodes" => self.base_nodes = parse_num(key, value)?,
            "refine" => self.refine = parse_num(key, value)?,
            "snapshot_times" => self.snapshot_times = parse_times(key, value)?,
            "x_min" => self.x_min = Some(parse_num(key, value)?),
            "x_max" => self.x_max = Some(parse_num(key, value)?),
            "n_x" => self.n_x = parse_num(key, value)?,
            "u_min" => self.u_min = parse_num(key, value)?,
            "u_max" => self.u_max = parse_num(key, value)?,
            "n_eps" => self.n_eps = parse_num(key, value)?,
            "n_wg" => self.n_wg = parse_num(key, value)?,
            "n_res" => self.n_res = parse_num(key, value)?,
            "wg_window" => self.wg_window = parse_num(key, value)?,
            "res_window" => self.res_window = parse_num(key, value)?,
            _ => return Err(ConfigError(format!("unknown config key: {key}"))),
        }
        Ok(())
    }

    fn load_file(&mut self, path: &PathBuf) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key=value", lineno + 1)))?;
            self.apply(key.trim(), value)?;
        }
        Ok(())
    }

    fn apply_cli(&mut self, cli: &Cli) {
        self.mode = cli.mode.clone();
        self.out = cli.out.clone();
        macro_rules! take {
            ($($field:ident <- $opt:ident),* $(,)?) => {
                $(if let Some(v) = cli.$opt { self.$field = v; })*
            };
        }
        take!(
            gamma_over_omega <- gamma_over_omega,
            big_gamma_over_gamma <- big_gamma_over_gamma,
            d_over_lambda <- d_over_lambda,
            t_max <- t_max,
            n_points <- n_points,
            kappa <- kappa,
            base_nodes <- base_nodes,
            refine <- refine,
            n_x <- n_x,
            u_min <- u_min,
            u_max <- u_max,
            n_eps <- n_eps,
            n_wg <- n_wg,
            n_res <- n_res,
            wg_window <- wg_window,
            res_window <- res_window,
        );
        if let Some(v) = cli.x_min {
            self.x_min = Some(v);
        }
        if let Some(v) = cli.x_max {
            self.x_max = Some(v);
        }
        if let Some(s) = &cli.snapshot_times {
            self.snapshot_times = parse_times("snapshot_times", s).unwrap_or_default();
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        const MODES: [&str; 6] = [
            "spectrum",
            "evolve",
            "field",
            "closure",
            "markov-compare",
            "oracle-compare",
        ];
        if !MODES.contains(&self.mode.as_str()) {
            return Err(ConfigError(format!(
                "unknown mode {:?}; expected one of {MODES:?}",
                self.mode
            )));
        }
        for (name, v) in [
            ("gamma_over_omega", self.gamma_over_omega),
            ("d_over_lambda", self.d_over_lambda),
            ("t_max", self.t_max),
            ("kappa", self.kappa),
            ("wg_window", self.wg_window),
            ("res_window", self.res_window),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError(format!("{name} must be positive, got {v}")));
            }
        }
        if self.big_gamma_over_gamma < 0.0 || !self.big_gamma_over_gamma.is_finite() {
            return Err(ConfigError(format!(
                "Gamma_over_gamma must be >= 0, got {}",
                self.big_gamma_over_gamma
            )));
        }
        if self.n_points < 2 || self.n_eps < 2 || self.n_x < 2 {
            return Err(ConfigError("grids need at least 2 points".into()));
        }
        if self.n_wg < 2 || self.n_res < 2 {
            return Err(ConfigError("lattice needs at least 2 modes".into()));
        }
        if self.mode == "field" && self.snapshot_times.is_empty() {
            return Err(ConfigError("field mode needs snapshot_times".into()));
        }
        Ok(())
    }

    fn params(&self) -> Result<SystemParams, ConfigError> {
        SystemParams::from_paper_units(
            self.gamma_over_omega,
            self.big_gamma_over_gamma,
            self.d_over_lambda,
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    fn quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            kappa: self.kappa,
            base_nodes: self.base_nodes,
            refine: self.refine,
            ..QuadratureSpec::default()
        }
    }

    fn lattice(&self) -> LatticeSpec {
        LatticeSpec {
            n_wg: self.n_wg,
            n_res: self.n_res,
            wg_window_w: self.wg_window,
            res_window_w: self.res_window,
        }
    }

    /// Sorted key=value view embedded in every output header.
    fn resolved(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("mode", self.mode.clone());
        m.insert("gamma_over_omega", fmt_f(self.gamma_over_omega));
        m.insert("Gamma_over_gamma", fmt_f(self.big_gamma_over_gamma));
        m.insert("d_over_lambda", fmt_f(self.d_over_lambda));
        m.insert("t_max", fmt_f(self.t_max));
        m.insert("n_points", self.n_points.to_string());
        m.insert("kappa", fmt_f(self.kappa));
        m.insert("base_nodes", self.base_nodes.to_string());
        m.insert("refine", self.refine.to_string());
        m.insert(
            "snapshot_times",
            self.snapshot_times
                .iter()
                .map(|t| fmt_f(*t))
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert(
            "x_min",
            self.x_min.map_or("auto".into(), fmt_f),
        );
        m.insert(
            "x_max",
            self.x_max.map_or("auto".into(), fmt_f),
        );
        m.insert("n_x", self.n_x.to_string());
        m.insert("u_min", fmt_f(self.u_min));
        m.insert("u_max", fmt_f(self.u_max));
        m.insert("n_eps", self.n_eps.to_string());
        m.insert("n_wg", self.n_wg.to_string());
        m.insert("n_res", self.n_res.to_string());
        m.insert("wg_window", fmt_f(self.wg_window));
        m.insert("res_window", fmt_f(self.res_window));
        m
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(cfg: &RunConfig) -> String {
    let mut s = String::new();
    for (k, v) in cfg.resolved() {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

fn write_file(path: &str, contents: &str) -> Result<(), ConfigError> {
    std::fs::write(path, contents)
        .map_err(|e| ConfigError(format!("cannot write {path}: {e}")))?;
    println!("wrote {path}");
    Ok(())
}

fn time_grid(cfg: &RunConfig, gamma: f64) -> (Vec<f64>, Vec<f64>) {
    let gts: Vec<f64> = (0..cfg.n_points)
        .map(|i| cfg.t_max * i as f64 / (cfg.n_points - 1) as f64)
        .collect();
    let ts = gts.iter().map(|gt| gt / gamma).collect();
    (gts, ts)
}

fn trajectory_csv(
    cfg: &RunConfig,
    gts: &[f64],
    traj: &wqed::spectral::QubitTrajectory,
    markov: Option<&[markov::MarkovPoint]>,
) -> String {
    let mut s = header(cfg);
    s.push_str("gamma_t, rho_pp, rho_mm, re_rho_pm, im_rho_pm, concurrence");
    if markov.is_some() {
        s.push_str(", markov_rho_pp, markov_rho_mm, markov_concurrence");
    }
    s.push('\n');
    for (i, gt) in gts.iter().enumerate() {
        let _ = write!(
            s,
            "{}, {}, {}, {}, {}, {}",
            fmt_f(*gt),
            fmt_f(traj.rho_pp[i]),
            fmt_f(traj.rho_mm[i]),
            fmt_f(traj.rho_pm[i].re),
            fmt_f(traj.rho_pm[i].im),
            fmt_f(traj.concurrence[i]),
        );
        if let Some(m) = markov {
            let _ = write!(
                s,
                ", {}, {}, {}",
                fmt_f(m[i].rho_pp),
                fmt_f(m[i].rho_mm),
                fmt_f(m[i].concurrence),
            );
        }
        s.push('\n');
    }
    s
}

fn convergence_report(params: &SystemParams, quad: &QuadratureSpec) -> Result<f64, ConfigError> {
    let reports = closure_check(params, quad);
    let mut worst: f64 = 0.0;
    for r in &reports {
        println!(
            "closure[{}]: total={:.12} continuum={:.12} localized={:.12} quad_error={:.3e} nodes={}",
            r.subspace, r.total, r.continuum, r.localized, r.quad_error, r.node_count
        );
        worst = worst.max((r.total - 1.0).abs()).max(r.quad_error);
    }
    Ok(worst)
}

fn run(cfg: &RunConfig) -> Result<u8, ConfigError> {
    let params = cfg.params()?;
    let quad = cfg.quad();
    let gamma = params.gamma_wg;
    let init = InitialState::qubit_one();

    let non_convergence = |e: SpectralError| -> ConfigError {
        ConfigError(format!("non-convergence: {e}"))
    };

    match cfg.mode.as_str() {
        "spectrum" => {
            let mut s = header(cfg);
            s.push_str(
                "u_over_gamma, trans_even, trans_odd, loss_even, loss_odd, abs_t_physical\n",
            );
            for i in 0..cfg.n_eps {
                let u = cfg.u_min
                    + (cfg.u_max - cfg.u_min) * i as f64 / (cfg.n_eps - 1) as f64;
                let eps = params.omega + u * gamma;
                let even = wqed::eigen_lossy::scattering_coeffs(&params, Subspace::Even, eps);
                let odd = wqed::eigen_lossy::scattering_coeffs(&params, Subspace::Odd, eps);
                let (t_phys, _) = wqed::eigen_lossless::physical_transmission(&params, eps);
                let _ = writeln!(
                    s,
                    "{}, {}, {}, {}, {}, {}",
                    fmt_f(u),
                    fmt_f(even.t1.norm_sqr()),
                    fmt_f(odd.t1.norm_sqr()),
                    fmt_f(even.res_out.norm_sqr()),
                    fmt_f(odd.res_out.norm_sqr()),
                    fmt_f(t_phys.norm()),
                );
            }
            write_file(&format!("{}_spectrum.csv", cfg.out), &s)?;
        }
        "closure" => {
            let worst = convergence_report(&params, &quad)?;
            let reports = closure_check(&params, &quad);
            let mut s = String::from("{\n");
            for (i, r) in reports.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "  \"{}\": {{\"total\": {}, \"continuum\": {}, \"localized\": {}, \"quad_error\": {}, \"node_count\": {}}}{}",
                    r.subspace,
                    fmt_f(r.total),
                    fmt_f(r.continuum),
                    fmt_f(r.localized),
                    fmt_f(r.quad_error),
                    r.node_count,
                    if i == 0 { "," } else { "" },
                );
            }
            s.push_str("}\n");
            write_file(&format!("{}_closure.json", cfg.out), &s)?;
            if worst > 1e-6 {
                eprintln!("error: non-convergence closure_defect={worst:.3e}");
                return Ok(EXIT_NON_CONVERGENCE);
            }
        }
        "evolve" | "markov-compare" => {
            convergence_report(&params, &quad)?;
            let (gts, ts) = time_grid(cfg, gamma);
            let traj = trajectory(&params, &init, &ts, &quad).map_err(non_convergence)?;
            let markov_side = if cfg.mode == "markov-compare" {
                Some(markov::trajectory(&params, &ts))
            } else {
                None
            };
            let csv = trajectory_csv(cfg, &gts, &traj, markov_side.as_deref());
            write_file(&format!("{}_trajectory.csv", cfg.out), &csv)?;
            if let Some(m) = &markov_side {
                let mut dev: f64 = 0.0;
                for (i, p) in m.iter().enumerate() {
                    dev = dev.max(
                        (traj.rho_pp[i] - p.rho_pp).abs()
                            + (traj.rho_mm[i] - p.rho_mm).abs()
                            + (traj.concurrence[i] - p.concurrence).abs(),
                    );
                }
                let summary = serde_json::json!({ "markov_deviation": dev });
                write_file(
                    &format!("{}_markov.json", cfg.out),
                    &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
                )?;
                println!("markov_deviation = {dev:.6e}");
            }
        }
        "oracle-compare" => {
            let (gts, ts) = time_grid(cfg, gamma);
            let lattice = cfg.lattice();
            let t_rec = lattice.recurrence_time(&params);
            if *ts.last().unwrap() > 0.5 * t_rec {
                return Err(ConfigError(format!(
                    "t_max {} exceeds half the lattice recurrence time {} (gamma*t = {}); \
                     shrink t_max or enlarge n_wg",
                    ts.last().unwrap(),
                    0.5 * t_rec,
                    0.5 * t_rec * gamma,
                )));
            }
            let traj = trajectory(&params, &init, &ts, &quad).map_err(non_convergence)?;
            let oracle = evolve_exact(&params, &init, &ts, &lattice);
            let csv = trajectory_csv(cfg, &gts, &traj, None);
            write_file(&format!("{}_trajectory.csv", cfg.out), &csv)?;
            let mut dev: f64 = 0.0;
            for i in 0..ts.len() {
                dev = dev
                    .max((traj.rho_pp[i] - oracle.rho_pp[i]).abs())
                    .max((traj.rho_mm[i] - oracle.rho_mm[i]).abs());
            }
            let probe = orthogonality_probe(&params, &lattice);
            let summary = serde_json::json!({
                "max_rho_deviation": dev,
                "recurrence_time_gamma_t": t_rec * gamma,
                "orthogonality_probe": probe,
            });
            write_file(
                &format!("{}_oracle.json", cfg.out),
                &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
            )?;
            println!("oracle max|drho| = {dev:.6e} (recurrence gamma*t = {:.3})", t_rec * gamma);
        }
        "field" => {
            convergence_report(&params, &quad)?;
            let lambda = wqed::model::wavelength(&params);
            let mut probs = Vec::new();
            for &gt in &cfg.snapshot_times {
                let t = gt / gamma;
                let grid = match (cfg.x_min, cfg.x_max) {
                    (Some(lo), Some(hi)) => (0..cfg.n_x)
                        .map(|i| {
                            lambda
                                * (lo + (hi - lo) * i as f64 / (cfg.n_x - 1) as f64)
                        })
                        .collect(),
                    _ => default_xgrid(&params, t, cfg.n_x),
                };
                let snap =
                    field_snapshot(&params, &init, t, &grid, &quad).map_err(non_convergence)?;
                let total = total_probability(&snap);
                probs.push(serde_json::json!({
                    "gamma_t": gt,
                    "total_probability": total,
                    "qubit_probability": snap.qubit_prob(),
                    "waveguide_probability": snap.waveguide_prob,
                    "reservoir_probability": snap.reservoir_prob,
                }));
                let mut s = header(cfg);
                let _ = writeln!(s, "# snapshot_gamma_t = {}", fmt_f(gt));
                s.push_str("x_over_lambda, density\n");
                for (x, dens) in snap.x.iter().zip(&snap.density) {
                    let _ = writeln!(s, "{}, {}", fmt_f(x / lambda), fmt_f(*dens));
                }
                write_file(&format!("{}_field_gt{gt}.csv", cfg.out), &s)?;
                println!("gamma_t={gt}: total_probability={total:.10}");
                if (total - 1.0).abs() > 1e-4 {
                    eprintln!(
                        "error: non-convergence total_probability={total} at gamma_t={gt}"
                    );
                    return Ok(EXIT_NON_CONVERGENCE);
                }
            }
            let summary = serde_json::json!({ "snapshots": probs });
            write_file(
                &format!("{}_field.json", cfg.out),
                &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
            )?;
        }
        _ => unreachable!("validated earlier"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("WQED_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        if let Err(e) = cfg.load_file(path) {
            eprintln!("error: invalid-config {e}");
            return ExitCode::from(EXIT_INVALID_CONFIG);
        }
    }
    cfg.apply_cli(&cli);
    if let Err(e) = cfg.validate().and_then(|_| cfg.params().map(|_| ())) {
        eprintln!("error: invalid-config {e}");
        return ExitCode::from(EXIT_INVALID_CONFIG);
    }
    match run(&cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let msg = e.to_string();
            if msg.starts_with("non-convergence") {
                eprintln!("error: {msg}");
                ExitCode::from(EXIT_NON_CONVERGENCE)
            } else {
                eprintln!("error: invalid-config {msg}");
                ExitCode::from(EXIT_INVALID_CONFIG)
            }
        }
    }
}
