//! Hard-coded parameter sets for each figure dataset.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::peak::{exceedance_interval, find_peak};
use super::sweep::{
    config_to_manifest, grid_to_manifest, run_sweep, sweep_steps, Branch, Kernel, SweepSpec, TOOL_VERSION,
};
use super::table::{Column, FigureDataset, Grid, Manifest, Table};
use crate::dynamics::{
    evolve_master_equation_with, evolve_schrodinger_with, finite_diff_susceptibility, initial_state, EvolveOptions,
    InitialState, DEFAULT_STEPS_PER_PERIOD,
};
use crate::error::ExperimentError;
use crate::model::SensorConfig;
use crate::noise::{crossover_eta, min_lambda_uncertainty, Crossover, OperatingPoint, DEFAULT_DELTA_P_REL};
use crate::spectral::{enhancement_se, ep_proximity, optimal_time, susceptibility_chi, Enhancement};

pub const FIGURE_IDS: &[&str] = &[
    "fig1a", "fig1b", "fig2a", "fig2b", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6", "figA1a", "figA1b",
    "figB1a", "figB1b", "figB1", "figC1",
];

/// Sampling time of the eigenstate-sensor curves, in units of `π/ω`.
pub const T_SENSE_PI: f64 = 0.98;
/// Working point of the noise study, in units of `g0`.
pub const NOISE_WORKING_POINT_G0: f64 = -0.0618;
/// Reference populations at the noise working point (non-Hermitian, Hermitian).
pub const NOISE_POPULATIONS: (f64, f64) = (0.3784, 0.49);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureOptions {
    /// Multiplies the number of intervals of every grid.
    pub grid_scale: f64,
    pub steps_per_period: usize,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self { grid_scale: 1.0, steps_per_period: DEFAULT_STEPS_PER_PERIOD }
    }
}

impl FigureOptions {
    pub fn scaled(grid_scale: f64) -> Self {
        Self { grid_scale, ..Self::default() }
    }

    fn grid(&self, min: f64, max: f64, n: usize) -> Grid {
        Grid::new(min, max, n).scaled(self.grid_scale)
    }
}

fn fig1_config(g0: f64) -> SensorConfig {
    SensorConfig::harmonic(g0, 0.04, 0.2, PI, -1.0)
}

/// Fig. 4/5 parameter sets `a` and `b`.
fn dynamics_config(panel_b: bool) -> SensorConfig {
    if panel_b {
        SensorConfig::harmonic(0.02, 0.01, 0.04, PI, -1.0)
    } else {
        SensorConfig::harmonic(0.01, 0.04, 0.02, PI, -1.0)
    }
}

fn sensing_config(gamma0: f64) -> SensorConfig {
    SensorConfig::harmonic(0.01, 0.04, gamma0, PI, -1.0)
}

fn far_config() -> SensorConfig {
    SensorConfig::harmonic(0.02, 0.04, 0.1, PI, -1.0)
}

fn base_manifest(id: &str, config: &SensorConfig, opts: &FigureOptions) -> Manifest {
    let mut m = Manifest::new();
    m.set("kind", "figure");
    m.set("figure_id", id);
    m.set("tool_version", TOOL_VERSION);
    m.set_f64("grid_scale", opts.grid_scale);
    m.set("steps_per_period", opts.steps_per_period as i64);
    m.set("seed", 0i64);
    config_to_manifest(config, &mut m);
    m
}

fn rename(mut ds: FigureDataset, id: &str, opts: &FigureOptions, config: &SensorConfig) -> FigureDataset {
    ds.figure_id = id.to_string();
    ds.tables[0].name = id.to_string();
    let mut m = base_manifest(id, config, opts);
    for key in ["kernel", "outputs", "lambda_g0_min", "lambda_g0_max", "lambda_g0_n", "time_pi_min", "time_pi_max", "time_pi_n"] {
        if let Some(v) = ds.manifest.get(key) {
            m.set(key, v.clone());
        }
    }
    ds.manifest = m;
    ds
}

fn sheet(
    id: &str,
    config: SensorConfig,
    kernel: Kernel,
    lambda: Grid,
    time: Grid,
    outputs: &[&str],
    opts: &FigureOptions,
) -> Result<FigureDataset, ExperimentError> {
    let mut spec = SweepSpec::new(config.clone(), lambda, time, kernel).with_outputs(outputs);
    spec.steps_per_period = opts.steps_per_period;
    Ok(rename(run_sweep(&spec)?, id, opts, &config))
}

pub fn reproduce_figure(id: &str, opts: &FigureOptions) -> Result<FigureDataset, ExperimentError> {
    if !(opts.grid_scale.is_finite() && opts.grid_scale > 0.0) {
        return Err(ExperimentError::BadGrid("grid_scale"));
    }
    let spectral_sheet = ["de_re", "de_im", "de_abs", "chi_re", "chi_im", "chi_abs", "ep_flag"];
    match id {
        "fig1a" | "fig1b" => {
            let g0 = if id == "fig1a" { 0.02 } else { 0.1 };
            let (l, t) = (opts.grid(-1.0, 1.0, 1001), opts.grid(0.0, 2.0, 1001));
            sheet(id, fig1_config(g0), Kernel::Spectral, l, t, &spectral_sheet, opts)
        }
        "fig2a" => splitting_curves(id, 0.02, None, opts),
        "fig2b" => splitting_curves(id, 0.1, Some(1.0), opts),
        "fig3" => enhancement_curves(opts),
        "fig4a" | "fig4b" => population_trace(id, dynamics_config(id == "fig4b"), opts),
        "fig5a" | "fig5b" => {
            let (l, t) = (opts.grid(-1.0, 1.0, 1001), opts.grid(0.0, 4.0, 1001));
            let cfg = dynamics_config(id == "fig5b");
            sheet(id, cfg, Kernel::Schrodinger, l, t, &["p_plus", "p_minus", "chi"], opts)
        }
        "fig6" => sensing_enhancement(opts),
        "figA1a" => {
            let (l, t) = (opts.grid(-0.5, 0.5, 1001), opts.grid(0.0, 2.0, 1001));
            let mut ds =
                sheet(id, far_config(), Kernel::Spectral, l, t, &["de_abs", "chi_abs", "chi_h_abs", "se"], opts)?;
            let prox = ep_proximity(&far_config(), (0.0, far_config().period()))?;
            ds.manifest.set_f64("de_min", prox.de_min);
            ds.manifest.set_f64("de_min_t_pi", prox.t_min / far_config().half_period());
            Ok(ds)
        }
        "figA1b" => {
            let (l, t) = (opts.grid(-0.5, 0.5, 1001), opts.grid(0.0, 4.0, 201));
            sheet(id, far_config(), Kernel::Schrodinger, l, t, &["p_plus", "chi", "chi_h", "sp"], opts)
        }
        "figB1a" | "figB1b" | "figB1" => noise_curves(id, opts),
        "figC1" => master_curves(opts),
        other => Err(ExperimentError::UnknownFigure(other.to_string())),
    }
}

struct SpectralCurve {
    de_nh: Vec<f64>,
    de_h: Vec<f64>,
    chi_nh: Vec<f64>,
    chi_h: Vec<f64>,
    se: Vec<f64>,
}

fn spectral_curve(config: &SensorConfig, t: f64, lambdas_g0: &[f64]) -> SpectralCurve {
    let mut c = SpectralCurve { de_nh: vec![], de_h: vec![], chi_nh: vec![], chi_h: vec![], se: vec![] };
    for &x in lambdas_g0 {
        let cfg = config.with_lambda(x * config.g0);
        let p = cfg.trajectory_at(t);
        let ph = cfg.hermitian_companion().trajectory_at(t);
        c.de_nh.push(crate::spectral::energy_splitting(&p).norm());
        c.de_h.push(crate::spectral::energy_splitting(&ph).norm());
        c.chi_nh.push(susceptibility_chi(&p).magnitude());
        c.chi_h.push(susceptibility_chi(&ph).magnitude());
        c.se.push(enhancement_se(&p, &ph).value());
    }
    c
}

/// |Δ_E(τ)| and |χ(τ)| against λ for the sensor and its Hermitian companion.
/// `tau_pi = None` picks the optimal window.
fn splitting_curves(
    id: &str,
    g0: f64,
    tau_pi: Option<f64>,
    opts: &FigureOptions,
) -> Result<FigureDataset, ExperimentError> {
    let config = fig1_config(g0);
    let grid = opts.grid(-1.0, 1.0, 2001);
    let x = grid.values();
    let mut m = base_manifest(id, &config, opts);
    let tau = match tau_pi {
        Some(u) => u * config.half_period(),
        None => {
            let opt = optimal_time(&config, (0.0, config.period()))?;
            m.set("tau_regime", opt.regime.as_str());
            m.set_f64("tau_pi_reference", 0.295);
            opt.tau
        }
    };
    m.set_f64("tau_pi", tau / config.half_period());
    grid_to_manifest("lambda_g0", &grid, &mut m);
    let c = spectral_curve(&config, tau, &x);
    let table = Table::new(id)
        .with_real("lambda_g0", x)
        .with_real("de_abs_nh", c.de_nh)
        .with_real("de_abs_h", c.de_h)
        .with_real("chi_abs_nh", c.chi_nh)
        .with_real("chi_abs_h", c.chi_h);
    Ok(FigureDataset { figure_id: id.into(), tables: vec![table], manifest: m })
}

fn enhancement_curves(opts: &FigureOptions) -> Result<FigureDataset, ExperimentError> {
    let (ca, cb) = (fig1_config(0.02), fig1_config(0.1));
    let grid = opts.grid(-1.0, 1.0, 2001);
    let x = grid.values();
    let tau_a = optimal_time(&ca, (0.0, ca.period()))?.tau;
    let tau_b = cb.half_period();
    let mut m = base_manifest("fig3", &cb, opts);
    grid_to_manifest("lambda_g0", &grid, &mut m);
    m.set_f64("tau_pi_g0_0p02", tau_a / ca.half_period());
    m.set_f64("tau_pi_g0_0p1", 1.0);
    let probe = cb.with_lambda(0.006689 * cb.g0);
    let se_probe = enhancement_se(&probe.trajectory_at(tau_b), &probe.hermitian_companion().trajectory_at(tau_b));
    m.set_f64("se_g0_0p1_at_lambda_g0_0p006689", se_probe.value());
    m.set_f64("se_reference", 9.21);
    m.set("curves", "se_g0_0p02 at the optimal window; se_g0_0p1 at t = pi/omega");
    let table = Table::new("fig3")
        .with_real("lambda_g0", x.clone())
        .with_real("se_g0_0p02", spectral_curve(&ca, tau_a, &x).se)
        .with_real("se_g0_0p1", spectral_curve(&cb, tau_b, &x).se);
    Ok(FigureDataset { figure_id: "fig3".into(), tables: vec![table], manifest: m })
}

fn population_trace(id: &str, config: SensorConfig, opts: &FigureOptions) -> Result<FigureDataset, ExperimentError> {
    let grid = opts.grid(0.0, 4.0, 2001);
    let u = grid.values();
    let times: Vec<f64> = u.iter().map(|x| x * config.half_period()).collect();
    let n = sweep_steps(&grid, opts.steps_per_period);
    let psi0 = initial_state(&config, 0.0, InitialState::Minus);
    let rec = evolve_schrodinger_with(
        &config,
        psi0,
        (0.0, grid.max * config.half_period()),
        n,
        &times,
        &EvolveOptions::default(),
    )?;
    let mut m = base_manifest(id, &config, opts);
    grid_to_manifest("time_pi", &grid, &mut m);
    m.set("initial", Branch::Minus.as_str());
    m.set("n_steps", n as i64);
    if let Some(g) = &rec.guard {
        m.set_f64("guard_max_deviation", g.max_deviation);
        m.set("guard", if g.passed() { "pass" } else { "fail" });
    }
    let log_scale = rec.states().unwrap_or_default().iter().map(|s| s.log_scale).collect();
    let status = rec.ep_degenerate.iter().map(|&e| if e { "ep" } else { "ok" }.to_string()).collect();
    let table = Table::new(id)
        .with_real("t_pi", u)
        .with_real("t", rec.times.clone())
        .with_real("p_plus", rec.populations_plus.clone())
        .with_real("p_minus", rec.populations_minus.clone())
        .with_real("ep_degenerate", rec.ep_degenerate.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect())
        .with_real("log_scale", log_scale)
        .with_text("status", status);
    Ok(FigureDataset { figure_id: id.into(), tables: vec![table], manifest: m })
}

/// Population at one sampling time for each λ (absolute units), NaN on
/// failures. `master` selects the raw quadratic-form population of the
/// Lindblad run.
pub fn population_curve(config: &SensorConfig, t: f64, lambdas: &[f64], steps_per_period: usize, master: bool) -> Vec<f64> {
    let grid = Grid::new(0.0, t / config.half_period(), 2);
    let n = sweep_steps(&grid, steps_per_period);
    lambdas
        .par_iter()
        .map(|&l| {
            let cfg = config.with_lambda(l);
            let psi0 = initial_state(&cfg, 0.0, InitialState::Minus);
            let opts = EvolveOptions::default();
            let rec = if master {
                let rho0 = psi0.outer_conj(&psi0) * (1.0 / psi0.norm_sqr());
                evolve_master_equation_with(&cfg, rho0, (0.0, t), n, &[t], &opts)
            } else {
                evolve_schrodinger_with(&cfg, psi0, (0.0, t), n, &[t], &opts)
            };
            rec.map_or(f64::NAN, |r| r.populations_plus[0])
        })
        .collect()
}

fn chi_of(lambdas: &[f64], p: &[f64]) -> Result<Vec<f64>, ExperimentError> {
    let pairs: Vec<(f64, f64)> = lambdas.iter().copied().zip(p.iter().copied()).collect();
    let mut chi: Vec<f64> = finite_diff_susceptibility(&pairs)?.into_iter().map(|s| s.chi).collect();
    chi.push(f64::NAN);
    Ok(chi)
}

fn sensing_enhancement(opts: &FigureOptions) -> Result<FigureDataset, ExperimentError> {
    let (nh, h) = (sensing_config(0.02), sensing_config(0.0));
    let grid = opts.grid(-0.2, 0.0, 201);
    let x = grid.values();
    let lambdas: Vec<f64> = x.iter().map(|v| v * nh.g0).collect();
    let t = T_SENSE_PI * nh.half_period();
    let p_nh = population_curve(&nh, t, &lambdas, opts.steps_per_period, false);
    let p_h = population_curve(&h, t, &lambdas, opts.steps_per_period, false);
    let chi_nh = chi_of(&lambdas, &p_nh)?;
    let chi_h = chi_of(&lambdas, &p_h)?;
    let sp: Vec<f64> = chi_nh.iter().zip(&chi_h).map(|(a, b)| Enhancement::from_magnitudes(*a, *b).value()).collect();

    let curve = |name: &str, p: Vec<f64>, chi: Vec<f64>| {
        Table::new(name).with_real("lambda_g0", x.clone()).with_real("lambda", lambdas.clone()).with_real("p_plus", p).with_real("chi", chi)
    };
    let sp_table = Table::new("fig6_sp")
        .with_real("lambda_g0", x.clone())
        .with_real("chi_nh", chi_nh.clone())
        .with_real("chi_h", chi_h.clone())
        .with_real("sp", sp);
    let mut m = base_manifest("fig6", &nh, opts);
    m.set_f64("gamma0_hermitian", 0.0);
    m.set_f64("t_pi", T_SENSE_PI);
    grid_to_manifest("lambda_g0", &grid, &mut m);
    if let Ok(peak) = find_peak(&sp_table, "sp", "lambda_g0") {
        m.set_f64("sp_peak", peak.value);
        m.set_f64("sp_peak_lambda_g0", peak.location);
        m.set("sp_peak_grid_limited", peak.grid_limited);
    }
    if let Ok(Some(e)) = exceedance_interval(&sp_table, "sp", "lambda_g0", 50.0) {
        m.set_f64("sp_above_50_lower_g0", e.lower);
        m.set_f64("sp_above_50_upper_g0", e.upper);
    }
    let tables = vec![curve("fig6_nh", p_nh, chi_nh), curve("fig6_h", p_h, chi_h), sp_table];
    Ok(FigureDataset { figure_id: "fig6".into(), tables, manifest: m })
}

/// χ of both sensors at the noise working point (forward difference over one
/// `10⁻³ g0` step), plus the computed populations there.
pub struct WorkingPoint {
    pub chi_nh: f64,
    pub chi_h: f64,
    pub p_nh: f64,
    pub p_h: f64,
}

pub fn noise_working_point(steps_per_period: usize) -> WorkingPoint {
    let (nh, h) = (sensing_config(0.02), sensing_config(0.0));
    let t = T_SENSE_PI * nh.half_period();
    let l0 = NOISE_WORKING_POINT_G0 * nh.g0;
    let lambdas = [l0, l0 + 1e-3 * nh.g0];
    let p_nh = population_curve(&nh, t, &lambdas, steps_per_period, false);
    let p_h = population_curve(&h, t, &lambdas, steps_per_period, false);
    let dl = lambdas[1] - lambdas[0];
    WorkingPoint {
        chi_nh: (p_nh[1] - p_nh[0]) / dl,
        chi_h: (p_h[1] - p_h[0]) / dl,
        p_nh: p_nh[0],
        p_h: p_h[0],
    }
}

fn noise_curves(id: &str, opts: &FigureOptions) -> Result<FigureDataset, ExperimentError> {
    let wp = noise_working_point(opts.steps_per_period);
    let nh = OperatingPoint::relative(NOISE_POPULATIONS.0, wp.chi_nh, DEFAULT_DELTA_P_REL);
    let h = OperatingPoint::relative(NOISE_POPULATIONS.1, wp.chi_h, DEFAULT_DELTA_P_REL);
    let grid = opts.grid(0.0, 0.1, 2001);
    let eta = grid.values();
    let g0 = sensing_config(0.02).g0;
    let dp_nh: Vec<f64> = eta.iter().map(|&e| nh.dp_prime(e)).collect();
    let dp_h: Vec<f64> = eta.iter().map(|&e| h.dp_prime(e)).collect();
    let dl = |dp: &[f64], chi: f64| -> Vec<f64> { dp.iter().map(|&d| min_lambda_uncertainty(d, chi).value()).collect() };
    let (dl_nh, dl_h) = (dl(&dp_nh, nh.chi), dl(&dp_h, h.chi));

    let mut m = base_manifest(id, &sensing_config(0.02), opts);
    grid_to_manifest("eta", &grid, &mut m);
    m.set_f64("lambda_g0", NOISE_WORKING_POINT_G0);
    m.set_f64("t_pi", T_SENSE_PI);
    m.set_f64("p_plus_nh", nh.p);
    m.set_f64("p_plus_h", h.p);
    m.set_f64("p_plus_nh_computed", wp.p_nh);
    m.set_f64("p_plus_h_computed", wp.p_h);
    m.set_f64("chi_nh", wp.chi_nh);
    m.set_f64("chi_h", wp.chi_h);
    m.set_f64("delta_p_rel", DEFAULT_DELTA_P_REL);
    m.set_f64("crossover_eta_reference", 0.05263);
    match crossover_eta(&nh, &h, (grid.min, grid.max))? {
        Crossover::At(e) => m.set_f64("crossover_eta", e),
        Crossover::Degenerate(e) => {
            m.set_f64("crossover_eta", e);
            m.set("crossover_degenerate", true);
        }
        Crossover::None => m.set("crossover_eta", "none"),
    }

    let mut a = Table::new("figB1a").with_real("eta", eta.clone()).with_real("dp_prime_nh", dp_nh).with_real("dp_prime_h", dp_h);
    let to_g0 = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x / g0).collect() };
    let b = Table::new("figB1b")
        .with_real("eta", eta)
        .with_real("dlambda_nh", dl_nh.clone())
        .with_real("dlambda_h", dl_h.clone())
        .with_real("dlambda_nh_g0", to_g0(&dl_nh))
        .with_real("dlambda_h_g0", to_g0(&dl_h));
    let tables = match id {
        "figB1a" => vec![a],
        "figB1b" => vec![b],
        _ => {
            a.name = "figB1a".into();
            vec![a, b]
        }
    };
    Ok(FigureDataset { figure_id: id.into(), tables, manifest: m })
}

pub const MASTER_GAMMAS: [f64; 3] = [0.0, 0.02, 0.04];

pub fn master_suffix(gamma0: f64) -> String {
    format!("gamma0_{}", format!("{gamma0:.2}").replace('.', "p"))
}

fn master_curves(opts: &FigureOptions) -> Result<FigureDataset, ExperimentError> {
    let grid = opts.grid(-0.2, 0.2, 401);
    let x = grid.values();
    let base = sensing_config(0.0);
    let lambdas: Vec<f64> = x.iter().map(|v| v * base.g0).collect();
    let t = T_SENSE_PI * base.half_period();
    let mut table = Table::new("figC1").with_real("lambda_g0", x);
    let mut m = base_manifest("figC1", &base, opts);
    grid_to_manifest("lambda_g0", &grid, &mut m);
    m.set_f64("t_pi", T_SENSE_PI);
    m.set("gamma0_values", "0,0.02,0.04");
    let n = sweep_steps(&Grid::new(0.0, T_SENSE_PI, 2), opts.steps_per_period);
    for g in MASTER_GAMMAS {
        let cfg = base.with_gamma0(g);
        let runs: Vec<(f64, f64)> = lambdas
            .par_iter()
            .map(|&l| {
                let c = cfg.with_lambda(l);
                let psi0 = initial_state(&c, 0.0, InitialState::Minus);
                let rho0 = psi0.outer_conj(&psi0) * (1.0 / psi0.norm_sqr());
                match evolve_master_equation_with(&c, rho0, (0.0, t), n, &[t], &EvolveOptions::default()) {
                    Ok(r) => (r.populations_plus[0], r.p_plus_norm.as_ref().map_or(f64::NAN, |v| v[0])),
                    Err(_) => (f64::NAN, f64::NAN),
                }
            })
            .collect();
        let raw: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let norm: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let s = master_suffix(g);
        table.push(format!("chi_raw_{s}"), Column::Real(chi_of(&lambdas, &raw)?));
        table.push(format!("chi_norm_{s}"), Column::Real(chi_of(&lambdas, &norm)?));
        table.push(format!("p_plus_raw_{s}"), Column::Real(raw));
        table.push(format!("p_plus_norm_{s}"), Column::Real(norm));
    }
    Ok(FigureDataset { figure_id: "figC1".into(), tables: vec![table], manifest: m })
}
