//! Non-unitary Schrödinger propagation `i dΨ/dt = H(t) Ψ`.

use std::cell::Cell;

use log::warn;

use super::integrator::{propagate, StepGrid};
use super::population::normalized_population;
use super::{
    check_step_density, population_deviation, AccuracyGuard, EvolutionRecord, EvolveOptions, InitialState,
    LambdaProtocol, Snapshots, StateVector,
};
use crate::algebra::{ComplexVec2, I};
use crate::error::DynamicsError;
use crate::model::SensorConfig;
use crate::spectral::spectrum_at;

/// Resolves an initial state against the spectrum of `config` at `t`.
pub fn initial_state(config: &SensorConfig, t: f64, which: InitialState) -> ComplexVec2 {
    match which {
        InitialState::Plus => spectrum_at(config, t).right_plus,
        InitialState::Minus => spectrum_at(config, t).right_minus,
        InitialState::Custom(v) => v,
    }
}

/// Propagates with `config.lambda` in both the Hamiltonian and the analysis
/// basis, with the default options (half-step accuracy guard on).
pub fn evolve_schrodinger(
    config: &SensorConfig,
    psi0: ComplexVec2,
    t_span: (f64, f64),
    n_steps: usize,
    sample_times: &[f64],
) -> Result<EvolutionRecord, DynamicsError> {
    evolve_schrodinger_with(config, psi0, t_span, n_steps, sample_times, &EvolveOptions::default())
}

pub fn evolve_schrodinger_with(
    config: &SensorConfig,
    psi0: ComplexVec2,
    t_span: (f64, f64),
    n_steps: usize,
    sample_times: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionRecord, DynamicsError> {
    config.validate()?;
    let grid = StepGrid::new(t_span.0, t_span.1, n_steps)?;
    check_step_density(config.period(), &grid, opts.min_steps_per_period)?;
    let (nodes, max_snap_error) = grid.snap(sample_times)?;
    let start = StateVector::new(t_span.0, psi0)?;

    let evolution = match opts.protocol {
        LambdaProtocol::Propagated => config.clone(),
        LambdaProtocol::AnalysisOnly => config.with_lambda(0.0),
    };

    let states = run(&evolution, &grid, start, &nodes)?;
    let mut rec = EvolutionRecord {
        times: nodes.iter().map(|&k| grid.time(k)).collect(),
        populations_plus: Vec::with_capacity(states.len()),
        populations_minus: Vec::with_capacity(states.len()),
        ep_degenerate: Vec::with_capacity(states.len()),
        snapshots: Snapshots::Pure(Vec::new()),
        p_plus_norm: None,
        guard: None,
        max_snap_error,
        max_trace_drift: 0.0,
        n_steps,
    };
    for s in &states {
        let p = normalized_population(&spectrum_at(config, s.t), &s.amplitudes);
        rec.populations_plus.push(p.p_plus());
        rec.populations_minus.push(p.p_minus());
        rec.ep_degenerate.push(p.is_degenerate());
    }

    if opts.accuracy_guard {
        let fine = grid.refined();
        let fine_nodes: Vec<usize> = nodes.iter().map(|k| 2 * k).collect();
        let fine_states = run(&evolution, &fine, start, &fine_nodes)?;
        let fine_p: Vec<f64> = fine_states
            .iter()
            .map(|s| normalized_population(&spectrum_at(config, s.t), &s.amplitudes).p_plus())
            .collect();
        let guard = AccuracyGuard {
            max_deviation: population_deviation(&rec.populations_plus, &fine_p),
            tolerance: opts.guard_tolerance,
        };
        if !guard.passed() {
            warn!(
                "step-halving changes populations by {:e} (> {:e}) with {} steps",
                guard.max_deviation, guard.tolerance, n_steps
            );
        }
        rec.guard = Some(guard);
    }
    rec.snapshots = Snapshots::Pure(states);
    Ok(rec)
}

fn run(
    config: &SensorConfig,
    grid: &StepGrid,
    start: StateVector,
    nodes: &[usize],
) -> Result<Vec<StateVector>, DynamicsError> {
    let rhs = |t: f64, psi: &ComplexVec2| config.hamiltonian_at(t).apply(psi).scale(-I);
    let log_scale = Cell::new(start.log_scale);
    let blowup = Cell::new(false);
    let mut out = Vec::with_capacity(nodes.len());
    propagate(
        grid,
        start.amplitudes,
        rhs,
        nodes,
        |psi| {
            let n = psi.norm();
            if n > 0.0 && n.is_finite() {
                *psi = *psi * (1.0 / n);
                log_scale.set(log_scale.get() + n.ln());
            } else {
                blowup.set(true);
            }
        },
        |_, t, psi| {
            if blowup.get() || !psi.is_finite() {
                return Err(DynamicsError::Blowup(t));
            }
            out.push(StateVector { t, amplitudes: *psi, log_scale: log_scale.get() });
            Ok(())
        },
    )?;
    if blowup.get() {
        return Err(DynamicsError::Blowup(grid.end));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::algebra::C64;
    use crate::dynamics::{steps_for_span, DEFAULT_STEPS_PER_PERIOD};

    #[test]
    fn hermitian_static_rabi_oscillation() {
        // H = ε + g σx: P(|1⟩) = cos²(g t)
        let c = SensorConfig::harmonic(0.3, 0.0, 0.0, PI, -1.0);
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let n = steps_for_span(c.period(), 5.0, 2000);
        let rec = evolve_schrodinger(&c, ComplexVec2::basis(0), (0.0, 5.0), n, &times).unwrap();
        for s in rec.states().unwrap() {
            let want = (0.3 * s.t).cos().powi(2);
            assert!((s.amplitudes[0].norm_sqr() - want).abs() < 1e-10);
            assert!(s.log_scale.abs() < 1e-10);
        }
        assert!(rec.guard.unwrap().passed());
    }

    #[test]
    fn loss_only_decay_matches_exponential() {
        // decoupled, no detuning: |1⟩ decays as exp(-½∫γ₋), |0⟩ gains as exp(+½∫γ₋)
        let c = SensorConfig::harmonic(0.0, 0.0, 0.2, PI, -1.0);
        let n = steps_for_span(c.period(), 2.0, DEFAULT_STEPS_PER_PERIOD);
        let rec = evolve_schrodinger(&c, ComplexVec2::basis(0), (0.0, 2.0), n, &[2.0]).unwrap();
        let s = rec.states().unwrap()[0];
        // ∫₀² 0.2 sin²(πt/2) dt = 0.2
        assert!((s.log_scale - (-0.1)).abs() < 1e-10);
    }

    #[test]
    fn renormalization_does_not_change_populations() {
        let c = SensorConfig::harmonic(0.02, 0.01, 0.04, PI, -1.0);
        let psi0 = initial_state(&c, 0.0, InitialState::Minus);
        let n = steps_for_span(c.period(), 1.0, 4000);
        let a = evolve_schrodinger(&c, psi0, (0.0, 1.0), n, &[0.5, 0.9]).unwrap();
        let b = evolve_schrodinger(&c, psi0.scale(C64::new(1e6, 0.0)), (0.0, 1.0), n, &[0.5, 0.9]).unwrap();
        for (x, y) in a.populations_plus.iter().zip(&b.populations_plus) {
            assert!((x - y).abs() < 1e-13);
        }
        let shift = b.states().unwrap()[0].log_scale - a.states().unwrap()[0].log_scale;
        assert!((shift - 1e6f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = SensorConfig::harmonic(0.02, 0.01, 0.04, PI, -1.0);
        let psi = ComplexVec2::basis(0);
        assert!(matches!(
            evolve_schrodinger(&c, psi, (0.0, 2.0), 100, &[1.0]),
            Err(DynamicsError::TooFewSteps { .. })
        ));
        assert_eq!(
            evolve_schrodinger(&c, ComplexVec2::basis(0) * 0.0, (0.0, 2.0), 4000, &[1.0]),
            Err(DynamicsError::ZeroState)
        );
        assert!(evolve_schrodinger(&c, psi, (0.0, 2.0), 4000, &[3.0]).is_err());
        let mut bad = c.clone();
        bad.omega = f64::NAN;
        assert!(evolve_schrodinger(&bad, psi, (0.0, 2.0), 4000, &[1.0]).is_err());
    }

    #[test]
    fn analysis_only_protocol_differs_from_propagated() {
        let c = SensorConfig::harmonic(0.01, 0.04, 0.02, PI, -1.0).with_lambda(-0.0005);
        let psi0 = initial_state(&c, 0.0, InitialState::Minus);
        let n = steps_for_span(c.period(), 0.98, 4000);
        let prop = evolve_schrodinger(&c, psi0, (0.0, 0.98), n, &[0.98]).unwrap();
        let opts = EvolveOptions { protocol: LambdaProtocol::AnalysisOnly, ..Default::default() };
        let ana = evolve_schrodinger_with(&c, psi0, (0.0, 0.98), n, &[0.98], &opts).unwrap();
        assert!(prop.populations_plus[0].is_finite() && ana.populations_plus[0].is_finite());
        assert!((prop.populations_plus[0] - ana.populations_plus[0]).abs() > 1e-9);
    }
}
