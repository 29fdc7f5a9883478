use std::path::PathBuf;

use clap::Args;
use nhsense_core::dynamics::{
    evolve_master_equation_with, evolve_schrodinger_with, initial_state, steps_for_span, DEFAULT_STEPS_PER_PERIOD,
};
use nhsense_core::experiments::sweep::{parse_protocol, Branch};
use nhsense_core::noise::DEFAULT_DELTA_P_REL;
use nhsense_core::spectral::{ep_proximity, optimal_time};
use nhsense_core::{
    eigensystem, hamiltonian_nh, min_lambda_uncertainty, monte_carlo_uncertainty, polar_decomposition,
    population_uncertainty, reproduce_figure, run_sweep, susceptibility_chi, EvolveOptions, FigureDataset,
    FigureOptions, Kernel, LambdaProtocol, Manifest, NoiseModel, SensorConfig, SweepSpec, Table,
};

use crate::resolve::{parse_grid, parse_span, CliError, Resolver};

#[derive(Debug, Clone, Default, Args)]
pub struct SensorArgs {
    /// Nominal coupling g0 (required)
    #[arg(long, allow_negative_numbers = true)]
    pub g0: Option<f64>,
    /// Detuning amplitude [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub delta0: Option<f64>,
    /// Loss amplitude [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    /// Modulation frequency [default: pi]
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Gain/loss ratio [default: -1]
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Perturbation added to the coupling [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Level energy [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
}

fn sensor(r: &mut Resolver, a: &SensorArgs) -> Result<SensorConfig, CliError> {
    let config = SensorConfig {
        g0: r.f64_req("g0", a.g0)?,
        delta0: r.f64_or("delta0", a.delta0, 0.0)?,
        gamma0: r.f64_or("gamma0", a.gamma0, 0.0)?,
        omega: r.f64_or("omega", a.omega, std::f64::consts::PI)?,
        alpha: r.f64_or("alpha", a.alpha, -1.0)?,
        lambda: r.f64_or("lambda", a.lambda, 0.0)?,
        epsilon: r.f64_or("epsilon", a.epsilon, 1.0)?,
        ..SensorConfig::default()
    };
    config.validate()?;
    Ok(config)
}

fn dataset(name: &str, tables: Vec<Table>, manifest: Manifest) -> FigureDataset {
    FigureDataset { figure_id: name.into(), tables, manifest }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub sensor: SensorArgs,
    /// Single evaluation time [default: 0]
    #[arg(long, allow_negative_numbers = true, conflicts_with = "t_grid")]
    pub t: Option<f64>,
    /// Time grid as min:max:n
    #[arg(long)]
    pub t_grid: Option<String>,
}

pub fn spectrum(a: &SpectrumArgs, r: &mut Resolver) -> Result<FigureDataset, CliError> {
    let cfg = sensor(r, &a.sensor)?;
    let times = match r.opt_str("t-grid", a.t_grid.as_deref())? {
        Some(s) => parse_grid("t-grid", &s)?.values(),
        None => vec![r.f64_or("t", a.t, 0.0)?],
    };
    let names = [
        "e_plus_re", "e_plus_im", "e_minus_re", "e_minus_im", "de_re", "de_im", "chi_re", "chi_im", "a", "b", "c",
        "rho_sq", "theta", "ep_flag",
    ];
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(times.len()); names.len()];
    let mut status = Vec::with_capacity(times.len());
    for &t in &times {
        let p = cfg.trajectory_at(t);
        let s = eigensystem(&hamiltonian_nh(&p, cfg.epsilon), &p, cfg.epsilon)?;
        let chi = susceptibility_chi(&p);
        let pd = polar_decomposition(&p, cfg.alpha);
        let row = [
            s.e_plus.re,
            s.e_plus.im,
            s.e_minus.re,
            s.e_minus.im,
            s.delta_e.re,
            s.delta_e.im,
            chi.re(),
            chi.im(),
            pd.a,
            pd.b,
            pd.c,
            pd.rho_sq,
            pd.theta,
            flag(s.ep_condition_flag),
        ];
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
        status.push(if s.ep_condition_flag { "ep" } else { "ok" }.to_string());
    }
    let mut table = Table::new("spectrum").with_real("t", times);
    for (name, c) in names.iter().zip(cols) {
        table = table.with_real(*name, c);
    }
    Ok(dataset("spectrum", vec![table.with_text("status", status)], Manifest::new()))
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub sensor: SensorArgs,
    /// schrodinger or master [default: schrodinger]
    #[arg(long)]
    pub kernel: Option<String>,
    /// Integration span as start:end [default: 0:2T]
    #[arg(long, allow_hyphen_values = true)]
    pub t_span: Option<String>,
    /// Number of evenly spaced output samples, endpoints included [default: 401]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Total RK4 steps (overrides --steps-per-period)
    #[arg(long)]
    pub steps: Option<usize>,
    /// [default: 20000]
    #[arg(long)]
    pub steps_per_period: Option<usize>,
    /// Starting eigenvector, plus or minus [default: minus]
    #[arg(long)]
    pub initial: Option<String>,
    /// propagated or analysis-only [default: propagated]
    #[arg(long)]
    pub protocol: Option<String>,
    /// Skip the half-step accuracy rerun
    #[arg(long)]
    pub no_guard: bool,
}

fn sample_times(span: (f64, f64), n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![span.1];
    }
    (0..n).map(|i| if i + 1 == n { span.1 } else { span.0 + (span.1 - span.0) * i as f64 / (n - 1) as f64 }).collect()
}

pub fn evolve(a: &EvolveArgs, r: &mut Resolver) -> Result<FigureDataset, CliError> {
    let cfg = sensor(r, &a.sensor)?;
    let kernel = r.str_or("kernel", a.kernel.as_deref(), "schrodinger")?;
    let master = match kernel.as_str() {
        "schrodinger" => false,
        "master" => true,
        other => return Err(CliError::Usage(format!("unknown evolve kernel `{other}`"))),
    };
    let default_span = format!("0:{}", 2.0 * cfg.period());
    let span = parse_span("t-span", &r.str_or("t-span", a.t_span.as_deref(), &default_span)?)?;
    let samples = r.usize_or("samples", a.samples, 401)?;
    let per_period = r.usize_or("steps-per-period", a.steps_per_period, DEFAULT_STEPS_PER_PERIOD)?;
    let steps = r.usize_or("steps", a.steps, steps_for_span(cfg.period(), span.1 - span.0, per_period))?;
    let branch: Branch = r.str_or("initial", a.initial.as_deref(), "minus")?.parse()?;
    let protocol = parse_protocol(&r.str_or("protocol", a.protocol.as_deref(), "propagated")?)?;
    let guard = !r.switch("no-guard", a.no_guard)?;
    let opts = EvolveOptions { accuracy_guard: guard, protocol, ..EvolveOptions::default() };

    let start = match protocol {
        LambdaProtocol::Propagated => cfg.clone(),
        LambdaProtocol::AnalysisOnly => cfg.with_lambda(0.0),
    };
    let psi0 = initial_state(&start, span.0, branch.initial());
    let times = sample_times(span, samples);
    let rec = if master {
        let rho0 = psi0.outer_conj(&psi0) * (1.0 / psi0.norm_sqr());
        evolve_master_equation_with(&cfg, rho0, span, steps, &times, &opts)?
    } else {
        evolve_schrodinger_with(&cfg, psi0, span, steps, &times, &opts)?
    };

    let mut m = Manifest::new();
    m.set("n_steps", rec.n_steps as i64);
    m.set_f64("max_snap_error", rec.max_snap_error);
    let guard_text = match &rec.guard {
        None => "off",
        Some(g) => {
            m.set_f64("guard_max_deviation", g.max_deviation);
            if g.passed() {
                "pass"
            } else {
                log::warn!("accuracy guard: populations moved by {:e} on halving the step", g.max_deviation);
                "fail"
            }
        }
    };
    let n = rec.times.len();
    let t_pi: Vec<f64> = rec.times.iter().map(|t| t / cfg.half_period()).collect();
    let mut table = Table::new("evolve")
        .with_real("t", rec.times.clone())
        .with_real("t_pi", t_pi)
        .with_real("p_plus", rec.populations_plus.clone())
        .with_real("p_minus", rec.populations_minus.clone());
    if let Some(states) = rec.states() {
        table = table.with_real("log_scale", states.iter().map(|s| s.log_scale).collect());
    }
    if let Some(rhos) = rec.density_matrices() {
        let norm = rec.p_plus_norm.clone().unwrap_or_else(|| vec![f64::NAN; n]);
        table = table
            .with_real("p_plus_raw", rec.populations_plus.clone())
            .with_real("p_plus_norm", norm)
            .with_real("purity", rhos.iter().map(|d| d.purity()).collect());
        m.set_f64("max_trace_drift", rec.max_trace_drift);
    }
    let status = rec.ep_degenerate.iter().map(|&e| if e { "ep" } else { "ok" }.to_string()).collect();
    table = table
        .with_real("ep_degenerate", rec.ep_degenerate.iter().map(|&e| flag(e)).collect())
        .with_text("guard", vec![guard_text.to_string(); n])
        .with_text("status", status);
    Ok(dataset("evolve", vec![table], m))
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub sensor: SensorArgs,
    /// spectral, schrodinger, master or noise [default: spectral]
    #[arg(long)]
    pub kernel: Option<String>,
    /// lambda grid in units of g0, min:max:n
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_grid: Option<String>,
    /// Time grid in units of pi/omega, min:max:n
    #[arg(long, allow_hyphen_values = true)]
    pub t_grid: Option<String>,
    /// Comma-separated subset of the kernel's columns
    #[arg(long)]
    pub outputs: Option<String>,
    #[arg(long)]
    pub eta_plus: Option<f64>,
    #[arg(long)]
    pub eta_minus: Option<f64>,
    /// Relative shot-noise spread of P+ [default: 0.03]
    #[arg(long)]
    pub delta_p_rel: Option<f64>,
    #[arg(long)]
    pub seed: Option<usize>,
    #[arg(long)]
    pub steps_per_period: Option<usize>,
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub no_guard: bool,
}

pub fn sweep(a: &SweepArgs, r: &mut Resolver) -> Result<FigureDataset, CliError> {
    let cfg = sensor(r, &a.sensor)?;
    let kernel: Kernel = r.str_or("kernel", a.kernel.as_deref(), "spectral")?.parse()?;
    let lg = r.opt_str("lambda-grid", a.lambda_grid.as_deref())?.ok_or_else(|| crate::resolve::missing("lambda-grid"))?;
    let tg = r.opt_str("t-grid", a.t_grid.as_deref())?.ok_or_else(|| crate::resolve::missing("t-grid"))?;
    let mut spec = SweepSpec::new(cfg, parse_grid("lambda-grid", &lg)?, parse_grid("t-grid", &tg)?, kernel);
    spec.outputs = r.opt_str("outputs", a.outputs.as_deref())?.map(|s| s.split(',').map(|c| c.trim().to_string()).collect());
    spec.noise = NoiseModel::new(r.f64_or("eta-plus", a.eta_plus, 0.0)?, r.f64_or("eta-minus", a.eta_minus, 0.0)?)?
        .with_delta_p_rel(r.f64_or("delta-p-rel", a.delta_p_rel, DEFAULT_DELTA_P_REL)?)
        .with_seed(r.usize_or("seed", a.seed, 0)? as u64);
    spec.steps_per_period = r.usize_or("steps-per-period", a.steps_per_period, DEFAULT_STEPS_PER_PERIOD)?;
    spec.initial = r.str_or("initial", a.initial.as_deref(), "minus")?.parse()?;
    spec.protocol = parse_protocol(&r.str_or("protocol", a.protocol.as_deref(), "propagated")?)?;
    spec.accuracy_guard = !r.switch("no-guard", a.no_guard)?;
    Ok(run_sweep(&spec)?)
}

#[derive(Debug, Clone, Default, Args)]
pub struct FigureArgs {
    /// Figure id, e.g. fig2a or figC1
    #[arg(long)]
    pub id: Option<String>,
    /// Multiplies the number of grid intervals [default: 1]
    #[arg(long)]
    pub grid_scale: Option<f64>,
    #[arg(long)]
    pub steps_per_period: Option<usize>,
}

pub fn figure(a: &FigureArgs, r: &mut Resolver) -> Result<FigureDataset, CliError> {
    let id = r.opt_str("id", a.id.as_deref())?.ok_or_else(|| crate::resolve::missing("id"))?;
    let opts = FigureOptions {
        grid_scale: r.f64_or("grid-scale", a.grid_scale, 1.0)?,
        steps_per_period: r.usize_or("steps-per-period", a.steps_per_period, DEFAULT_STEPS_PER_PERIOD)?,
    };
    Ok(reproduce_figure(&id, &opts)?)
}

#[derive(Debug, Clone, Default, Args)]
pub struct OptimalTimeArgs {
    #[command(flatten)]
    pub sensor: SensorArgs,
    /// Search range as start:end, at least one period [default: 0:T]
    #[arg(long, allow_hyphen_values = true)]
    pub t_range: Option<String>,
}

pub fn optimal(a: &OptimalTimeArgs, r: &mut Resolver) -> Result<FigureDataset, CliError> {
    let cfg = sensor(r, &a.sensor)?;
    let default_range = format!("0:{}", cfg.period());
    let range = parse_span("t-range", &r.str_or("t-range", a.t_range.as_deref(), &default_range)?)?;
    let opt = optimal_time(&cfg, range)?;
    let prox = ep_proximity(&cfg, range)?;
    let p = cfg.trajectory_at(opt.tau);
    let table = Table::new("optimal_time")
        .with_real("tau", vec![opt.tau])
        .with_real("tau_pi", vec![opt.tau / cfg.half_period()])
        .with_text("regime", vec![opt.regime.as_str().to_string()])
        .with_real("max_gap", vec![opt.max_gap])
        .with_real("c", vec![opt.c])
        .with_real("de_abs", vec![nhsense_core::energy_splitting(&p).norm()])
        .with_real("chi_abs", vec![susceptibility_chi(&p).magnitude()])
        .with_real("de_min", vec![prox.de_min])
        .with_real("de_min_t", vec![prox.t_min]);
    Ok(dataset("optimal_time", vec![table], Manifest::new()))
}

#[derive(Debug, Clone, Default, Args)]
pub struct NoiseArgs {
    /// Noise-free population P+ (required)
    #[arg(long)]
    pub p_plus: Option<f64>,
    /// Population susceptibility dP+/d(lambda) (required)
    #[arg(long, allow_negative_numbers = true)]
    pub chi: Option<f64>,
    /// Shot-noise spread of P+ [default: delta-p-rel * p-plus]
    #[arg(long)]
    pub dp_plus: Option<f64>,
    #[arg(long)]
    pub delta_p_rel: Option<f64>,
    #[arg(long)]
    pub eta_plus: Option<f64>,
    #[arg(long)]
    pub eta_minus: Option<f64>,
    /// Symmetric eta grid min:max:n (overrides --eta-plus/--eta-minus)
    #[arg(long)]
    pub eta_grid: Option<String>,
    /// Monte Carlo samples per row; 0 skips the check [default: 0]
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<usize>,
}

pub fn noise(a: &NoiseArgs, r: &mut Resolver) -> Result<FigureDataset, CliError> {
    let p = r.f64_req("p-plus", a.p_plus)?;
    let chi = r.f64_req("chi", a.chi)?;
    let rel = r.f64_or("delta-p-rel", a.delta_p_rel, DEFAULT_DELTA_P_REL)?;
    let dp = r.f64_or("dp-plus", a.dp_plus, rel * p)?;
    let seed = r.usize_or("seed", a.seed, 0)? as u64;
    let mc = r.usize_or("mc-samples", a.mc_samples, 0)?;
    let etas: Vec<(f64, f64)> = match r.opt_str("eta-grid", a.eta_grid.as_deref())? {
        Some(s) => parse_grid("eta-grid", &s)?.values().into_iter().map(|e| (e, e)).collect(),
        None => vec![(r.f64_or("eta-plus", a.eta_plus, 0.0)?, r.f64_or("eta-minus", a.eta_minus, 0.0)?)],
    };
    let mut cols: [Vec<f64>; 5] = Default::default();
    let mut mc_col = Vec::new();
    for &(ep, em) in &etas {
        let model = NoiseModel::new(ep, em)?.with_seed(seed).with_delta_p_rel(rel);
        let dpp = population_uncertainty(p, dp, &model);
        for (c, v) in cols.iter_mut().zip([ep, em, dp, dpp, min_lambda_uncertainty(dpp, chi).value()]) {
            c.push(v);
        }
        if mc > 0 {
            mc_col.push(monte_carlo_uncertainty(p, dp, &model, mc)?);
        }
    }
    let [ep, em, dpc, dpp, dl] = cols;
    let mut table = Table::new("noise")
        .with_real("eta_plus", ep)
        .with_real("eta_minus", em)
        .with_real("dp_plus", dpc)
        .with_real("dp_prime", dpp)
        .with_real("dlambda", dl);
    if mc > 0 {
        table = table.with_real("dp_prime_mc", mc_col);
    }
    let mut m = Manifest::new();
    m.set("seed", seed as i64);
    Ok(dataset("noise", vec![table], m))
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run
    #[arg(long)]
    pub manifest: PathBuf,
}
