//! Lindblad evolution of the physical qubit with a time-dependent decay rate.
//!
//! `dρ/dt = −i[H₀ + λσx, ρ] + γ(t) (σ₋ρσ₊ − ½{σ₊σ₋, ρ})` with `H₀` the
//! Hermitian part of the sensor Hamiltonian and `γ(t) = γ₋(t)` taken from the
//! sensor trajectory.

use log::warn;

use super::integrator::{propagate, StepGrid};
use super::{
    check_step_density, population_deviation, AccuracyGuard, DensityMatrix, EvolutionRecord, EvolveOptions,
    LambdaProtocol, Snapshots,
};
use crate::algebra::{ComplexMat2, C64, I};
use crate::error::{DynamicsError, ModelError};
use crate::model::{hamiltonian_nh, SensorConfig};
use crate::spectral::spectrum_at;

pub fn evolve_master_equation(
    config: &SensorConfig,
    rho0: ComplexMat2,
    t_span: (f64, f64),
    n_steps: usize,
    sample_times: &[f64],
) -> Result<EvolutionRecord, DynamicsError> {
    evolve_master_equation_with(config, rho0, t_span, n_steps, sample_times, &EvolveOptions::default())
}

pub fn evolve_master_equation_with(
    config: &SensorConfig,
    rho0: ComplexMat2,
    t_span: (f64, f64),
    n_steps: usize,
    sample_times: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionRecord, DynamicsError> {
    config.validate()?;
    if config.gamma0 < 0.0 {
        return Err(ModelError::InvalidParameter {
            name: "gamma0",
            reason: "decay rate must be nonnegative for the master equation".into(),
        }
        .into());
    }
    let start = DensityMatrix::new(t_span.0, rho0)?;
    let grid = StepGrid::new(t_span.0, t_span.1, n_steps)?;
    check_step_density(config.period(), &grid, opts.min_steps_per_period)?;
    let (nodes, max_snap_error) = grid.snap(sample_times)?;

    let evolution = match opts.protocol {
        LambdaProtocol::Propagated => config.clone(),
        LambdaProtocol::AnalysisOnly => config.with_lambda(0.0),
    };
    let (states, max_trace_drift) = run(&evolution, &grid, start.rho, &nodes)?;

    let mut rec = EvolutionRecord {
        times: nodes.iter().map(|&k| grid.time(k)).collect(),
        snapshots: Snapshots::Mixed(Vec::new()),
        populations_plus: Vec::with_capacity(states.len()),
        populations_minus: Vec::with_capacity(states.len()),
        ep_degenerate: Vec::with_capacity(states.len()),
        p_plus_norm: Some(Vec::with_capacity(states.len())),
        guard: None,
        max_snap_error,
        max_trace_drift,
        n_steps,
    };
    for d in &states {
        let (q_plus, q_minus, degenerate) = projections(config, d);
        rec.populations_plus.push(q_plus.re);
        rec.populations_minus.push(q_minus.re);
        rec.ep_degenerate.push(degenerate);
        let norm = q_plus.norm() / (q_plus.norm() + q_minus.norm());
        rec.p_plus_norm.as_mut().unwrap().push(norm);
    }

    if opts.accuracy_guard {
        let fine_nodes: Vec<usize> = nodes.iter().map(|k| 2 * k).collect();
        let (fine, _) = run(&evolution, &grid.refined(), start.rho, &fine_nodes)?;
        let fine_p: Vec<f64> = fine.iter().map(|d| projections(config, d).0.re).collect();
        let guard = AccuracyGuard {
            max_deviation: population_deviation(&rec.populations_plus, &fine_p),
            tolerance: opts.guard_tolerance,
        };
        if !guard.passed() {
            warn!("step-halving changes master-equation populations by {:e}", guard.max_deviation);
        }
        rec.guard = Some(guard);
    }
    rec.snapshots = Snapshots::Mixed(states);
    Ok(rec)
}

/// `q± = ⟨φ̂±|ρ|φ±⟩` in the sensor's biorthonormal basis. NaN at an EP.
fn projections(config: &SensorConfig, d: &DensityMatrix) -> (C64, C64, bool) {
    let s = spectrum_at(config, d.t);
    if s.ep_condition_flag {
        let nan = C64::new(f64::NAN, f64::NAN);
        return (nan, nan, true);
    }
    let q = |left: &crate::algebra::ComplexVec2, right| left.pair(&d.rho.apply(right));
    (q(&s.left_plus, &s.right_plus), q(&s.left_minus, &s.right_minus), false)
}

fn run(
    config: &SensorConfig,
    grid: &StepGrid,
    rho0: ComplexMat2,
    nodes: &[usize],
) -> Result<(Vec<DensityMatrix>, f64), DynamicsError> {
    let lower = ComplexMat2::lowering();
    let raise = ComplexMat2::raising();
    let number = raise.matmul(&lower);
    let rhs = |t: f64, rho: &ComplexMat2| {
        let mut p = config.trajectory_at(t);
        let gamma = p.gamma_minus;
        p.gamma_minus = 0.0;
        p.gamma_plus = 0.0;
        let h0 = hamiltonian_nh(&p, config.epsilon);
        let unitary = h0.commutator(rho).scale(-I);
        let jump = lower.matmul(rho).matmul(&raise) - number.anticommutator(rho) * 0.5;
        unitary + jump * gamma
    };
    let mut drift = 0.0f64;
    let mut out = Vec::with_capacity(nodes.len());
    propagate(
        grid,
        rho0,
        rhs,
        nodes,
        |rho| {
            let tr = rho.trace();
            drift = drift.max((tr - 1.0).norm());
            if tr.re != 0.0 {
                *rho = *rho * (1.0 / tr.re);
            }
        },
        |_, t, rho| {
            if !rho.is_finite() {
                return Err(DynamicsError::Blowup(t));
            }
            out.push(DensityMatrix { t, rho: *rho });
            Ok(())
        },
    )?;
    Ok((out, drift))
}
