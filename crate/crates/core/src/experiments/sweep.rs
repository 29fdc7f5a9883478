//! (λ, t) grid sweeps over the spectral, Schrödinger, master-equation and
//! noise kernels.

use std::str::FromStr;

use rayon::prelude::*;

use super::table::{Column, FigureDataset, Grid, Manifest, Table};
use crate::algebra::ComplexMat2;
use crate::dynamics::{
    evolve_master_equation_with, evolve_schrodinger_with, initial_state, EvolutionRecord, EvolveOptions,
    InitialState, LambdaProtocol, DEFAULT_STEPS_PER_PERIOD,
};
use crate::error::ExperimentError;
use crate::model::{hamiltonian_nh, Modulation, SensorConfig};
use crate::noise::{min_lambda_uncertainty, noisy_population, population_uncertainty, NoiseModel};
use crate::spectral::{eigensystem, enhancement_se, polar_decomposition, susceptibility_chi, Enhancement};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Spectral,
    Schrodinger,
    Master,
    Noise,
}

impl Kernel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Spectral => "spectral",
            Self::Schrodinger => "schrodinger",
            Self::Master => "master",
            Self::Noise => "noise",
        }
    }

    /// Value columns this kernel can emit, in output order.
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Self::Spectral => &[
                "e_plus_re",
                "e_plus_im",
                "e_minus_re",
                "e_minus_im",
                "de_re",
                "de_im",
                "de_abs",
                "chi_re",
                "chi_im",
                "chi_abs",
                "chi_h_abs",
                "se",
                "a",
                "b",
                "c",
                "rho_sq",
                "theta",
                "ep_flag",
            ],
            Self::Schrodinger => {
                &["p_plus", "p_minus", "ep_degenerate", "log_scale", "chi", "p_plus_h", "chi_h", "sp", "guard"]
            }
            Self::Noise => &[
                "p_plus",
                "p_minus",
                "ep_degenerate",
                "log_scale",
                "chi",
                "p_plus_h",
                "chi_h",
                "sp",
                "guard",
                "p_prime",
                "dp_prime",
                "dlambda_min",
            ],
            Self::Master => &[
                "p_plus_raw",
                "p_minus_raw",
                "p_plus_norm",
                "ep_degenerate",
                "chi_raw",
                "chi_norm",
                "purity",
                "trace_drift",
                "p_plus_raw_h",
                "chi_raw_h",
                "sp",
                "guard",
            ],
        }
    }
}

impl FromStr for Kernel {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "schrodinger" => Ok(Self::Schrodinger),
            "master" => Ok(Self::Master),
            "noise" => Ok(Self::Noise),
            other => Err(ExperimentError::Manifest(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Eigenvector the dynamics kernels start from at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    Plus,
    #[default]
    Minus,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Plus => "plus",
            Self::Minus => "minus",
        }
    }

    pub fn initial(&self) -> InitialState {
        match self {
            Self::Plus => InitialState::Plus,
            Self::Minus => InitialState::Minus,
        }
    }
}

impl FromStr for Branch {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" => Ok(Self::Plus),
            "minus" => Ok(Self::Minus),
            other => Err(ExperimentError::Manifest(format!("unknown initial branch `{other}`"))),
        }
    }
}

fn protocol_str(p: LambdaProtocol) -> &'static str {
    match p {
        LambdaProtocol::Propagated => "propagated",
        LambdaProtocol::AnalysisOnly => "analysis-only",
    }
}

pub fn parse_protocol(s: &str) -> Result<LambdaProtocol, ExperimentError> {
    match s {
        "propagated" => Ok(LambdaProtocol::Propagated),
        "analysis-only" => Ok(LambdaProtocol::AnalysisOnly),
        other => Err(ExperimentError::Manifest(format!("unknown lambda protocol `{other}`"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// `lambda` is ignored; the grid supplies it.
    pub config: SensorConfig,
    /// In units of `g0`.
    pub lambda_grid: Grid,
    /// In units of `π/ω`.
    pub time_grid: Grid,
    pub kernel: Kernel,
    /// `None` emits every column of the kernel.
    pub outputs: Option<Vec<String>>,
    pub noise: NoiseModel,
    pub steps_per_period: usize,
    pub initial: Branch,
    pub protocol: LambdaProtocol,
    pub accuracy_guard: bool,
}

impl SweepSpec {
    pub fn new(config: SensorConfig, lambda_grid: Grid, time_grid: Grid, kernel: Kernel) -> Self {
        Self {
            config,
            lambda_grid,
            time_grid,
            kernel,
            outputs: None,
            noise: NoiseModel { eta_plus: 0.0, eta_minus: 0.0, delta_p_rel: 0.03, seed: 0 },
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            initial: Branch::Minus,
            protocol: LambdaProtocol::Propagated,
            accuracy_guard: true,
        }
    }

    pub fn with_outputs(mut self, outputs: &[&str]) -> Self {
        self.outputs = Some(outputs.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.config.validate()?;
        self.lambda_grid.validate("lambda_grid")?;
        self.time_grid.validate("time_grid")?;
        if self.kernel != Kernel::Spectral && self.time_grid.min < 0.0 {
            return Err(ExperimentError::BadGrid("time_grid (dynamics starts at t = 0)"));
        }
        self.noise.validate()?;
        for o in self.outputs.iter().flatten() {
            if !self.kernel.columns().contains(&o.as_str()) {
                return Err(ExperimentError::MissingColumn(format!("{o} (kernel {})", self.kernel.as_str())));
            }
        }
        Ok(())
    }

    fn wants(&self, column: &str) -> bool {
        self.outputs.as_ref().is_none_or(|o| o.iter().any(|c| c == column))
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = Manifest::new();
        m.set("kind", "sweep");
        m.set("tool_version", TOOL_VERSION);
        m.set("kernel", self.kernel.as_str());
        config_to_manifest(&self.config, &mut m);
        grid_to_manifest("lambda_g0", &self.lambda_grid, &mut m);
        grid_to_manifest("time_pi", &self.time_grid, &mut m);
        if let Some(o) = &self.outputs {
            m.set("outputs", o.join(","));
        }
        m.set_f64("eta_plus", self.noise.eta_plus);
        m.set_f64("eta_minus", self.noise.eta_minus);
        m.set_f64("delta_p_rel", self.noise.delta_p_rel);
        m.set("seed", self.noise.seed as i64);
        m.set("steps_per_period", self.steps_per_period as i64);
        m.set("initial", self.initial.as_str());
        m.set("lambda_protocol", protocol_str(self.protocol));
        m.set("accuracy_guard", self.accuracy_guard);
        m
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self, ExperimentError> {
        let mut spec = Self::new(
            config_from_manifest(m)?,
            grid_from_manifest("lambda_g0", m)?,
            grid_from_manifest("time_pi", m)?,
            m.get_str("kernel")?.parse()?,
        );
        spec.outputs = m.get_str("outputs").ok().map(|s| s.split(',').map(str::to_string).collect());
        spec.noise = NoiseModel {
            eta_plus: m.get_f64("eta_plus")?,
            eta_minus: m.get_f64("eta_minus")?,
            delta_p_rel: m.get_f64("delta_p_rel")?,
            seed: m.get_usize("seed")? as u64,
        };
        spec.steps_per_period = m.get_usize("steps_per_period")?;
        spec.initial = m.get_str("initial")?.parse()?;
        spec.protocol = parse_protocol(m.get_str("lambda_protocol")?)?;
        spec.accuracy_guard = m.get_bool("accuracy_guard")?;
        Ok(spec)
    }
}

pub fn config_to_manifest(c: &SensorConfig, m: &mut Manifest) {
    m.set_f64("epsilon", c.epsilon);
    m.set_f64("g0", c.g0);
    m.set_f64("delta0", c.delta0);
    m.set_f64("gamma0", c.gamma0);
    m.set_f64("omega", c.omega);
    m.set_f64("alpha", c.alpha);
    m.set_f64("lambda", c.lambda);
    m.set(
        "modulation",
        match c.modulation {
            Modulation::Harmonic => "harmonic",
            Modulation::Tabulated(_) => "tabulated",
        },
    );
}

pub fn config_from_manifest(m: &Manifest) -> Result<SensorConfig, ExperimentError> {
    if m.get_str("modulation").unwrap_or("harmonic") != "harmonic" {
        return Err(ExperimentError::Manifest("tabulated trajectories cannot be replayed from a manifest".into()));
    }
    let c = SensorConfig {
        epsilon: m.get_f64("epsilon")?,
        g0: m.get_f64("g0")?,
        delta0: m.get_f64("delta0")?,
        gamma0: m.get_f64("gamma0")?,
        omega: m.get_f64("omega")?,
        alpha: m.get_f64("alpha")?,
        lambda: m.get_f64("lambda")?,
        modulation: Modulation::Harmonic,
    };
    c.validate()?;
    Ok(c)
}

pub fn grid_to_manifest(prefix: &str, g: &Grid, m: &mut Manifest) {
    m.set_f64(format!("{prefix}_min"), g.min);
    m.set_f64(format!("{prefix}_max"), g.max);
    m.set(format!("{prefix}_n"), g.n as i64);
}

pub fn grid_from_manifest(prefix: &str, m: &Manifest) -> Result<Grid, ExperimentError> {
    Ok(Grid::new(
        m.get_f64(&format!("{prefix}_min"))?,
        m.get_f64(&format!("{prefix}_max"))?,
        m.get_usize(&format!("{prefix}_n"))?,
    ))
}

/// Smallest number of steps per half period `m ≥ m_min` that puts every
/// node of `grid` (in half periods) on the step lattice, if one exists
/// within a factor 20 of `m_min`.
pub fn aligned_half_period_steps(grid: &Grid, m_min: usize) -> Option<usize> {
    let on_lattice = |x: f64, m: usize| {
        let v = x * m as f64;
        (v - v.round()).abs() <= 1e-7 * v.abs().max(1.0)
    };
    (m_min.max(1)..=20 * m_min.max(1)).find(|&m| on_lattice(grid.min, m) && on_lattice(grid.step(), m))
}

/// Steps for an evolution over `[0, t_max]` (in half periods) hitting every
/// grid node. Falls back to snapping when no aligned lattice is found.
pub fn sweep_steps(grid: &Grid, steps_per_period: usize) -> usize {
    let m_min = steps_per_period.div_ceil(2);
    let m = aligned_half_period_steps(grid, m_min).unwrap_or(m_min);
    ((grid.max * m as f64).round() as usize).max(1)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<FigureDataset, ExperimentError> {
    spec.validate()?;
    let lambdas_g0 = spec.lambda_grid.values();
    let times_pi = spec.time_grid.values();
    let unit = spec.config.half_period();
    let g0 = spec.config.g0;
    let lambdas: Vec<f64> = lambdas_g0.iter().map(|x| x * g0).collect();
    let times: Vec<f64> = times_pi.iter().map(|u| u * unit).collect();
    let (nl, nt) = (lambdas.len(), times.len());

    let mut table = Table::new("sweep");
    let axis = |f: &dyn Fn(usize, usize) -> f64| -> Vec<f64> {
        (0..nt).flat_map(|it| (0..nl).map(move |il| (it, il))).map(|(it, il)| f(it, il)).collect()
    };
    table.push("t_pi", Column::Real(axis(&|it, _| times_pi[it])));
    table.push("t", Column::Real(axis(&|it, _| times[it])));
    table.push("lambda_g0", Column::Real(axis(&|_, il| lambdas_g0[il])));
    table.push("lambda", Column::Real(axis(&|_, il| lambdas[il])));

    let (values, status) = match spec.kernel {
        Kernel::Spectral => spectral_columns(spec, &lambdas, &times),
        Kernel::Schrodinger | Kernel::Noise => schrodinger_columns(spec, &lambdas, &times),
        Kernel::Master => master_columns(spec, &lambdas, &times),
    };
    for (name, col) in values {
        if spec.wants(name) {
            table.push(name, col);
        }
    }
    table.push("status", Column::Text(status));

    let mut manifest = spec.to_manifest();
    manifest.set("figure_id", "sweep");
    Ok(FigureDataset { figure_id: "sweep".into(), tables: vec![table], manifest })
}

type Columns = (Vec<(&'static str, Column)>, Vec<String>);

fn spectral_columns(spec: &SweepSpec, lambdas: &[f64], times: &[f64]) -> Columns {
    const N: usize = 18;
    let nodes: Vec<(f64, f64)> = times.iter().flat_map(|&t| lambdas.iter().map(move |&l| (t, l))).collect();
    let rows: Vec<([f64; N], String)> = nodes
        .par_iter()
        .map(|&(t, lambda)| {
            let cfg = spec.config.with_lambda(lambda);
            let p = cfg.trajectory_at(t);
            let h = hamiltonian_nh(&p, cfg.epsilon);
            match eigensystem(&h, &p, cfg.epsilon) {
                Ok(s) => {
                    let chi = susceptibility_chi(&p);
                    let p_h = cfg.hermitian_companion().trajectory_at(t);
                    let pd = polar_decomposition(&p, cfg.alpha);
                    let de = s.delta_e;
                    let row = [
                        s.e_plus.re,
                        s.e_plus.im,
                        s.e_minus.re,
                        s.e_minus.im,
                        de.re,
                        de.im,
                        de.norm(),
                        chi.re(),
                        chi.im(),
                        chi.magnitude(),
                        susceptibility_chi(&p_h).magnitude(),
                        enhancement_se(&p, &p_h).value(),
                        pd.a,
                        pd.b,
                        pd.c,
                        pd.rho_sq,
                        pd.theta,
                        if s.ep_condition_flag { 1.0 } else { 0.0 },
                    ];
                    let status = if s.ep_condition_flag { "ep" } else { "ok" };
                    (row, status.to_string())
                }
                Err(e) => ([f64::NAN; N], e.to_string()),
            }
        })
        .collect();
    let names = Kernel::Spectral.columns();
    let cols = (0..N).map(|j| (names[j], Column::Real(rows.iter().map(|r| r.0[j]).collect()))).collect();
    (cols, rows.into_iter().map(|r| r.1).collect())
}

/// Per-λ result of one dynamics run, indexed by time.
struct DynRun {
    p: Vec<f64>,
    p_minus: Vec<f64>,
    p_norm: Vec<f64>,
    ep: Vec<bool>,
    log_scale: Vec<f64>,
    purity: Vec<f64>,
    drift: f64,
    guard: &'static str,
    error: Option<String>,
}

impl DynRun {
    fn failed(nt: usize, msg: String) -> Self {
        Self {
            p: vec![f64::NAN; nt],
            p_minus: vec![f64::NAN; nt],
            p_norm: vec![f64::NAN; nt],
            ep: vec![false; nt],
            log_scale: vec![f64::NAN; nt],
            purity: vec![f64::NAN; nt],
            drift: f64::NAN,
            guard: "off",
            error: Some(msg),
        }
    }

    fn from_record(rec: EvolutionRecord) -> Self {
        let guard = match &rec.guard {
            None => "off",
            Some(g) if g.passed() => "pass",
            Some(_) => "fail",
        };
        let (log_scale, purity) = match (&rec.states(), &rec.density_matrices()) {
            (Some(s), _) => (s.iter().map(|s| s.log_scale).collect(), vec![1.0; s.len()]),
            (_, Some(d)) => (vec![0.0; d.len()], d.iter().map(|d| d.purity()).collect()),
            _ => unreachable!("record holds one snapshot kind"),
        };
        Self {
            p_norm: rec.p_plus_norm.clone().unwrap_or_else(|| rec.populations_plus.clone()),
            p: rec.populations_plus,
            p_minus: rec.populations_minus,
            ep: rec.ep_degenerate,
            log_scale,
            purity,
            drift: rec.max_trace_drift,
            guard,
            error: None,
        }
    }
}

fn evolve_all(spec: &SweepSpec, config: &SensorConfig, lambdas: &[f64], times: &[f64], master: bool) -> Vec<DynRun> {
    let n_steps = sweep_steps(&spec.time_grid, spec.steps_per_period);
    let t_end = spec.time_grid.max * config.half_period();
    let opts = EvolveOptions { accuracy_guard: spec.accuracy_guard, protocol: spec.protocol, ..Default::default() };
    lambdas
        .par_iter()
        .map(|&lambda| {
            let cfg = config.with_lambda(lambda);
            let start = match spec.protocol {
                LambdaProtocol::Propagated => cfg.clone(),
                LambdaProtocol::AnalysisOnly => cfg.with_lambda(0.0),
            };
            let psi0 = initial_state(&start, 0.0, spec.initial.initial());
            let rec = if master {
                let rho0: ComplexMat2 = psi0.outer_conj(&psi0) * (1.0 / psi0.norm_sqr());
                evolve_master_equation_with(&cfg, rho0, (0.0, t_end), n_steps, times, &opts)
            } else {
                evolve_schrodinger_with(&cfg, psi0, (0.0, t_end), n_steps, times, &opts)
            };
            match rec {
                Ok(r) => DynRun::from_record(r),
                Err(e) => DynRun::failed(times.len(), e.to_string()),
            }
        })
        .collect()
}

/// Forward difference along λ at each time, time-major; NaN in the last λ column.
fn chi_sheet(runs: &[DynRun], lambdas: &[f64], nt: usize, pick: impl Fn(&DynRun) -> &[f64]) -> Vec<f64> {
    let nl = lambdas.len();
    let mut out = Vec::with_capacity(nt * nl);
    for it in 0..nt {
        for il in 0..nl {
            out.push(if il + 1 < nl {
                (pick(&runs[il + 1])[it] - pick(&runs[il])[it]) / (lambdas[il + 1] - lambdas[il])
            } else {
                f64::NAN
            });
        }
    }
    out
}

fn sheet(runs: &[DynRun], nt: usize, pick: impl Fn(&DynRun, usize) -> f64) -> Vec<f64> {
    (0..nt).flat_map(|it| runs.iter().map(move |r| (r, it))).map(|(r, it)| pick(r, it)).collect()
}

fn status_sheet(runs: &[DynRun], nt: usize) -> Vec<String> {
    (0..nt)
        .flat_map(|it| runs.iter().map(move |r| (r, it)))
        .map(|(r, it)| match &r.error {
            Some(e) => e.clone(),
            None if r.ep[it] => "ep".to_string(),
            None => "ok".to_string(),
        })
        .collect()
}

fn ratio(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| Enhancement::from_magnitudes(*x, *y).value()).collect()
}

fn schrodinger_columns(spec: &SweepSpec, lambdas: &[f64], times: &[f64]) -> Columns {
    let nt = times.len();
    let runs = evolve_all(spec, &spec.config, lambdas, times, false);
    let chi = chi_sheet(&runs, lambdas, nt, |r| &r.p);
    let wants_h = ["p_plus_h", "chi_h", "sp"].iter().any(|c| spec.wants(c));
    let (p_h, chi_h) = if wants_h {
        let h = evolve_all(spec, &spec.config.hermitian_companion(), lambdas, times, false);
        (sheet(&h, nt, |r, it| r.p[it]), chi_sheet(&h, lambdas, nt, |r| &r.p))
    } else {
        (vec![f64::NAN; nt * lambdas.len()], vec![f64::NAN; nt * lambdas.len()])
    };
    let p = sheet(&runs, nt, |r, it| r.p[it]);
    let mut cols = vec![
        ("p_plus", Column::Real(p.clone())),
        ("p_minus", Column::Real(sheet(&runs, nt, |r, it| r.p_minus[it]))),
        ("ep_degenerate", Column::Real(sheet(&runs, nt, |r, it| if r.ep[it] { 1.0 } else { 0.0 }))),
        ("log_scale", Column::Real(sheet(&runs, nt, |r, it| r.log_scale[it]))),
        ("chi", Column::Real(chi.clone())),
        ("sp", Column::Real(ratio(&chi, &chi_h))),
        ("p_plus_h", Column::Real(p_h)),
        ("chi_h", Column::Real(chi_h)),
        ("guard", Column::Text(sheet_text(&runs, nt))),
    ];
    if spec.kernel == Kernel::Noise {
        let m = &spec.noise;
        let dp: Vec<f64> = p.iter().map(|&p| population_uncertainty(p, m.delta_p(p), m)).collect();
        let p_prime = p.iter().map(|&p| noisy_population(p, 0.5 * m.eta_plus, 0.5 * m.eta_minus)).collect();
        let dl = dp.iter().zip(&chi).map(|(&d, &c)| min_lambda_uncertainty(d, c).value()).collect();
        cols.push(("p_prime", Column::Real(p_prime)));
        cols.push(("dp_prime", Column::Real(dp)));
        cols.push(("dlambda_min", Column::Real(dl)));
    }
    (order(spec.kernel, cols), status_sheet(&runs, nt))
}

fn sheet_text(runs: &[DynRun], nt: usize) -> Vec<String> {
    (0..nt).flat_map(|_| runs.iter().map(|r| r.guard.to_string())).collect()
}

fn master_columns(spec: &SweepSpec, lambdas: &[f64], times: &[f64]) -> Columns {
    let nt = times.len();
    let runs = evolve_all(spec, &spec.config, lambdas, times, true);
    let chi_raw = chi_sheet(&runs, lambdas, nt, |r| &r.p);
    let wants_h = ["p_plus_raw_h", "chi_raw_h", "sp"].iter().any(|c| spec.wants(c));
    let (p_h, chi_h) = if wants_h {
        let h = evolve_all(spec, &spec.config.hermitian_companion(), lambdas, times, true);
        (sheet(&h, nt, |r, it| r.p[it]), chi_sheet(&h, lambdas, nt, |r| &r.p))
    } else {
        (vec![f64::NAN; nt * lambdas.len()], vec![f64::NAN; nt * lambdas.len()])
    };
    let cols = vec![
        ("p_plus_raw", Column::Real(sheet(&runs, nt, |r, it| r.p[it]))),
        ("p_minus_raw", Column::Real(sheet(&runs, nt, |r, it| r.p_minus[it]))),
        ("p_plus_norm", Column::Real(sheet(&runs, nt, |r, it| r.p_norm[it]))),
        ("ep_degenerate", Column::Real(sheet(&runs, nt, |r, it| if r.ep[it] { 1.0 } else { 0.0 }))),
        ("chi_raw", Column::Real(chi_raw.clone())),
        ("chi_norm", Column::Real(chi_sheet(&runs, lambdas, nt, |r| &r.p_norm))),
        ("purity", Column::Real(sheet(&runs, nt, |r, it| r.purity[it]))),
        ("trace_drift", Column::Real(sheet(&runs, nt, |r, _| r.drift))),
        ("sp", Column::Real(ratio(&chi_raw, &chi_h))),
        ("p_plus_raw_h", Column::Real(p_h)),
        ("chi_raw_h", Column::Real(chi_h)),
        ("guard", Column::Text(sheet_text(&runs, nt))),
    ];
    (order(Kernel::Master, cols), status_sheet(&runs, nt))
}

fn order(kernel: Kernel, mut cols: Vec<(&'static str, Column)>) -> Vec<(&'static str, Column)> {
    let names = kernel.columns();
    cols.sort_by_key(|(n, _)| names.iter().position(|c| c == n).expect("known column"));
    cols
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn hermitian_spectral_sweep_has_real_splitting() {
        let c = SensorConfig::harmonic(0.1, 0.04, 0.0, PI, -1.0);
        let spec = SweepSpec::new(c, Grid::new(-1.0, 1.0, 2), Grid::new(0.0, 2.0, 2), Kernel::Spectral);
        let ds = run_sweep(&spec).unwrap();
        let t = &ds.tables[0];
        assert_eq!(t.n_rows(), 4);
        assert!(t.real("de_im").unwrap().iter().all(|v| v.abs() < 1e-14));
        // time-major: first two rows share t
        assert_eq!(t.real("t_pi").unwrap(), &[0.0, 0.0, 2.0, 2.0]);
    }

    #[test]
    fn divergent_chi_is_infinite_at_the_ep_node() {
        let c = SensorConfig::harmonic(0.1, 0.04, 0.2, PI, -1.0);
        let spec = SweepSpec::new(c, Grid::new(-1.0, 1.0, 3), Grid::new(0.0, 2.0, 3), Kernel::Spectral)
            .with_outputs(&["chi_abs", "de_abs", "ep_flag"]);
        let ds = run_sweep(&spec).unwrap();
        let t = &ds.tables[0];
        // node (t = π/ω, λ = 0) is row 4
        assert_eq!(t.real("chi_abs").unwrap()[4], f64::INFINITY);
        assert_eq!(t.real("de_abs").unwrap()[4], 0.0);
        assert_eq!(t.text("status").unwrap()[4], "ep");
        assert_eq!(t.column_names().collect::<Vec<_>>(), ["t_pi", "t", "lambda_g0", "lambda", "de_abs", "chi_abs", "ep_flag", "status"]);
    }

    #[test]
    fn unknown_output_is_rejected() {
        let c = SensorConfig::harmonic(0.1, 0.04, 0.2, PI, -1.0);
        let spec = SweepSpec::new(c, Grid::new(-1.0, 1.0, 3), Grid::new(0.0, 2.0, 3), Kernel::Spectral)
            .with_outputs(&["p_plus"]);
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn aligned_steps_put_samples_on_nodes() {
        let g = Grid::new(0.0, 4.0, 2001);
        assert_eq!(aligned_half_period_steps(&g, 10_000), Some(10_000));
        let g = Grid::new(0.98, 1.02, 3);
        let m = aligned_half_period_steps(&g, 10_001).unwrap();
        assert!(m >= 10_001 && (0.98 * m as f64).fract().abs() < 1e-6);
        assert_eq!(sweep_steps(&Grid::new(0.0, 1.0, 11), 20_000), 10_000);
    }

    #[test]
    fn manifest_round_trip() {
        let c = SensorConfig::harmonic(0.02, 0.01, 0.04, PI, -1.0);
        let mut spec = SweepSpec::new(c, Grid::new(-0.5, 0.5, 11), Grid::new(0.0, 4.0, 21), Kernel::Noise)
            .with_outputs(&["p_plus", "dp_prime"]);
        spec.noise.eta_plus = 0.05;
        spec.noise.eta_minus = 0.05;
        spec.protocol = LambdaProtocol::AnalysisOnly;
        let back = SweepSpec::from_manifest(&spec.to_manifest()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn schrodinger_and_master_sweeps_run() {
        let c = SensorConfig::harmonic(0.01, 0.04, 0.02, PI, -1.0);
        let mut spec = SweepSpec::new(c, Grid::new(-0.1, 0.0, 3), Grid::new(0.0, 0.98, 3), Kernel::Schrodinger);
        spec.steps_per_period = 2000;
        let ds = run_sweep(&spec).unwrap();
        let t = &ds.tables[0];
        assert_eq!(t.n_rows(), 9);
        let p = t.real("p_plus").unwrap();
        let pm = t.real("p_minus").unwrap();
        for i in 0..9 {
            assert!((p[i] + pm[i] - 1.0).abs() < 1e-10);
        }
        assert!(t.real("chi").unwrap()[2].is_nan());
        assert!(t.real("sp").unwrap()[6].is_finite());

        spec.kernel = Kernel::Master;
        let ds = run_sweep(&spec).unwrap();
        let t = &ds.tables[0];
        assert!(t.real("trace_drift").unwrap().iter().all(|d| *d < 1e-9));
        assert!(t.text("status").unwrap().iter().all(|s| s == "ok"));
    }
}
