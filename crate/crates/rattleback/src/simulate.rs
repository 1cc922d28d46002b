//! Time integration of the real dynamics.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, Params, RigidBodyParams, State};
use crate::ode::{self, DenseStep, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Sample spacing for the returned trajectory; every accepted step when unset.
    pub output_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 0.1, max_steps: 5_000_000, output_step: None }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1e-2], got {v}")));
            }
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidParameter("max_step must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be positive".into()));
        }
        if let Some(dt) = self.output_step {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParameter("output_step must be positive".into()));
            }
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            max_steps: self.max_steps,
            ..Tolerances::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub energies: Vec<f64>,
    pub geometric: Vec<f64>,
    /// Largest relative deviation of H from its initial value over all steps.
    pub h_drift: f64,
    pub l_drift: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }

    /// CSV with header `t,w1,w2,w3,g1,g2,g3,H,G`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Domain(format!("csv output: {e}"));
        w.write_record(["t", "w1", "w2", "w3", "g1", "g2", "g3", "H", "G"]).map_err(io)?;
        for k in 0..self.times.len() {
            let s = &self.states[k];
            let mut row = vec![self.times[k]];
            row.extend_from_slice(&s.to_array());
            row.push(self.energies[k]);
            row.push(self.geometric[k]);
            w.write_record(row.iter().map(|v| format_f64(*v))).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Domain(format!("csv output: {e}")))?;
        Ok(())
    }
}

/// Shortest round-trip-safe form with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn relative(x: f64, x0: f64) -> f64 {
    if x0 == 0.0 {
        (x - x0).abs()
    } else {
        ((x - x0) / x0).abs()
    }
}

fn field(params: &Params) -> impl FnMut(f64, &[f64], &mut [f64]) -> Result<()> + '_ {
    move |_t, y, dy| {
        let d = model::rhs(&State::from_slice(y), params)?;
        dy[..3].copy_from_slice(d.omega_dot.as_slice());
        dy[3..].copy_from_slice(d.gamma_dot.as_slice());
        Ok(())
    }
}

/// Drives the integrator over `[0, t_end]`, handing every accepted step to
/// `visit`. Errors from the vector field become integration failures
/// carrying the last accepted state.
fn drive(
    state0: &State,
    params: &Params,
    t_end: f64,
    cfg: &IntegratorConfig,
    mut visit: impl FnMut(&DenseStep, &[f64]),
) -> Result<usize> {
    cfg.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    model::rhs(state0, params)?;
    let mut last = (0.0, state0.to_array().to_vec());
    let mut f = field(params);
    let res = ode::integrate(&mut f, 0.0, &state0.to_array(), t_end, &cfg.tolerances(), |step| {
        let mut end = vec![0.0; 6];
        step.eval(step.t1(), &mut end);
        visit(step, &end);
        last = (step.t1(), end);
        true
    });
    match res {
        Ok(sol) => Ok(sol.stats.accepted),
        Err(e @ Error::Integration { .. }) => Err(e),
        Err(e) => Err(Error::Integration { t: last.0, reason: e.to_string(), last_state: last.1 }),
    }
}

fn push_sample(traj: &mut Trajectory, t: f64, s: State, params: &Params) {
    traj.times.push(t);
    traj.energies.push(model::energy(&s, params).unwrap_or(f64::NAN));
    traj.geometric.push(model::geometric(&s));
    traj.states.push(s);
}

pub fn integrate(state0: &State, params: &Params, t_end: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let h0 = model::energy(state0, params)?;
    let l0 = model::geometric(state0);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*state0],
        energies: vec![h0],
        geometric: vec![l0],
        h_drift: 0.0,
        l_drift: 0.0,
        steps: 0,
    };
    let mut next_sample = 1usize;
    let mut buf = [0.0; 6];
    let mut energy_err = None;
    let steps = drive(state0, params, t_end, cfg, |step, end| {
        let s_end = State::from_slice(end);
        match model::energy(&s_end, params) {
            Ok(h) => traj.h_drift = traj.h_drift.max(relative(h, h0)),
            Err(e) => energy_err = Some(e),
        }
        traj.l_drift = traj.l_drift.max(relative(model::geometric(&s_end), l0));
        match cfg.output_step {
            None => push_sample(&mut traj, step.t1(), s_end, params),
            Some(dt) => loop {
                let t = (next_sample as f64 * dt).min(t_end);
                if t > step.t1() || (t == traj.times[traj.times.len() - 1]) {
                    break;
                }
                step.eval(t, &mut buf);
                let s = if t == step.t1() { s_end } else { State::from_slice(&buf) };
                push_sample(&mut traj, t, s, params);
                next_sample += 1;
                if t == t_end {
                    break;
                }
            },
        }
    })?;
    if let Some(e) = energy_err {
        return Err(e);
    }
    traj.steps = steps;
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReversalEvent {
    pub t: f64,
    /// Sign of ω3 before the crossing.
    pub from_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinProbe {
    pub events: Vec<ReversalEvent>,
    /// Smallest γ3 seen; negative means the body turned over.
    pub min_gamma3: f64,
    pub final_omega3: f64,
}

/// Accepted steps a new sign of ω3 must persist before it counts.
pub const DEBOUNCE_STEPS: usize = 10;

/// Tracks sign changes of ω3 with a persistence window.
#[derive(Debug, Clone)]
pub struct SignTracker {
    confirmed: f64,
    pending: Option<(f64, bool, usize)>,
    prev: (f64, f64),
    pub events: Vec<ReversalEvent>,
}

impl SignTracker {
    pub fn new(t0: f64, w0: f64) -> Self {
        SignTracker { confirmed: w0.signum(), pending: None, prev: (t0, w0), events: Vec::new() }
    }

    pub fn push(&mut self, t: f64, w: f64) {
        let (tp, wp) = self.prev;
        self.prev = (t, w);
        if self.confirmed == 0.0 || w == 0.0 {
            return;
        }
        let sign = w.signum();
        match self.pending {
            None if sign != self.confirmed => {
                let tc = if wp.signum() != sign && wp != w { tp + (t - tp) * wp / (wp - w) } else { t };
                self.pending = Some((tc, self.confirmed > 0.0, 0));
            }
            Some((tc, from, n)) => {
                if sign == self.confirmed {
                    self.pending = None;
                } else if n + 1 >= DEBOUNCE_STEPS {
                    self.events.push(ReversalEvent { t: tc, from_positive: from });
                    self.confirmed = sign;
                    self.pending = None;
                } else {
                    self.pending = Some((tc, from, n + 1));
                }
            }
            None => {}
        }
    }
}

/// Spins the body about the vertical with a small initial tilt and records
/// persistent sign changes of ω3. No initial spin means no reversals.
pub fn spin_reversal_probe(
    params: &Params,
    w0: f64,
    tilt: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<SpinProbe> {
    let state0 = State::new([0.0, 0.0, w0], [tilt.sin(), 0.0, tilt.cos()])?;
    let mut tracker = SignTracker::new(0.0, w0);
    let mut min_gamma3 = state0.gamma[2];
    let mut final_omega3 = w0;
    drive(&state0, params, t_end, cfg, |step, end| {
        tracker.push(step.t1(), end[2]);
        min_gamma3 = min_gamma3.min(end[5]);
        final_omega3 = end[2];
    })?;
    Ok(SpinProbe { events: tracker.events, min_gamma3, final_omega3 })
}

/// Largest `max(|ω1|, |ω2|, |γ3|)` seen along the trajectory.
pub fn manifold_residual(params: &Params, state0: &State, t_end: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let off = |y: &[f64]| y[0].abs().max(y[1].abs()).max(y[5].abs());
    let mut worst = off(&state0.to_array());
    drive(state0, params, t_end, cfg, |_, end| worst = worst.max(off(end)))?;
    Ok(worst)
}

/// Relative drifts of the heavy rigid body's energy, geometric integral and
/// area integral `L = Σ I_i γ_i ω_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RigidDrift {
    pub h_drift: f64,
    pub g_drift: f64,
    pub l_drift: f64,
    pub steps: usize,
}

pub fn rigid_body_drift(
    state0: &State,
    rb: &RigidBodyParams,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<RigidDrift> {
    cfg.validate()?;
    rb.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    let h0 = model::rigid_body_energy(state0, rb);
    let g0 = model::geometric(state0);
    let l0 = model::rigid_body_integral(state0, rb);
    let mut out = RigidDrift { h_drift: 0.0, g_drift: 0.0, l_drift: 0.0, steps: 0 };
    let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let d = model::rigid_body_rhs(&State::from_slice(y), rb);
        dy[..3].copy_from_slice(d.omega_dot.as_slice());
        dy[3..].copy_from_slice(d.gamma_dot.as_slice());
        Ok(())
    };
    let mut end = [0.0; 6];
    let sol = ode::integrate(&mut f, 0.0, &state0.to_array(), t_end, &cfg.tolerances(), |step| {
        step.eval(step.t1(), &mut end);
        let s = State::from_slice(&end);
        out.h_drift = out.h_drift.max(relative(model::rigid_body_energy(&s, rb), h0));
        out.g_drift = out.g_drift.max(relative(model::geometric(&s), g0));
        out.l_drift = out.l_drift.max(relative(model::rigid_body_integral(&s, rb), l0));
        true
    })?;
    out.steps = sol.stats.accepted;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> Params {
        Params::from_principal(0.5, 0.6, 0.8, 0.3, [2.0, 1.0, 0.5], 1.0, 1.0).unwrap()
    }

    #[test]
    fn rigid_body_integrals_conserved() {
        let rb = RigidBodyParams::new(1.0, 1.0, 2.0, [0.4, 0.0, 0.0], 1.5).unwrap();
        let x = State::new([0.3, -0.7, 1.1], [0.2, 0.5, 0.84]).unwrap();
        let d = rigid_body_drift(&x, &rb, 50.0, &IntegratorConfig::default()).unwrap();
        assert!(d.h_drift < 1e-8 && d.g_drift < 1e-8 && d.l_drift < 1e-9, "{d:?}");
    }

    #[test]
    fn equilibrium_is_constant() {
        let x = State::new([0.0; 3], [0.0, 0.0, 1.0]).unwrap();
        let tr =
            integrate(&x, &flat(), 5.0, &IntegratorConfig { output_step: Some(1.0), ..Default::default() }).unwrap();
        assert_eq!(tr.times, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(tr.states.iter().all(|s| *s == x));
        assert_eq!((tr.h_drift, tr.l_drift), (0.0, 0.0));
    }

    #[test]
    fn axis_spin_stays_on_axis() {
        let x = State::new([0.0, 0.0, 2.0], [0.0, 0.0, 1.0]).unwrap();
        let tr = integrate(&x, &flat(), 10.0, &IntegratorConfig::default()).unwrap();
        let last = tr.last();
        assert!(last.omega[0].abs() < 1e-12 && last.gamma[0].abs() < 1e-12);
        assert!(tr.h_drift < 1e-10 && tr.l_drift < 1e-10);
    }

    #[test]
    fn sampling_grid() {
        let x = State::new([0.1, 0.2, 1.0], [0.1, 0.0, 0.99]).unwrap();
        let cfg = IntegratorConfig { output_step: Some(0.3), ..Default::default() };
        let tr = integrate(&x, &flat(), 1.0, &cfg).unwrap();
        assert_eq!(tr.times.len(), 5);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bad_configs() {
        let x = State::new([0.0; 3], [0.0, 0.0, 1.0]).unwrap();
        assert!(integrate(&x, &flat(), -1.0, &IntegratorConfig::default()).is_err());
        let cfg = IntegratorConfig { rel_tol: 0.5, ..Default::default() };
        assert!(integrate(&x, &flat(), 1.0, &cfg).is_err());
        let cfg = IntegratorConfig { max_steps: 0, ..Default::default() };
        assert!(integrate(&x, &flat(), 1.0, &cfg).is_err());
    }

    #[test]
    fn step_limit_is_an_integration_failure() {
        let x = State::new([0.3, 0.2, 1.0], [0.1, 0.0, 0.99]).unwrap();
        let cfg = IntegratorConfig { max_steps: 5, ..Default::default() };
        match integrate(&x, &flat(), 10.0, &cfg) {
            Err(Error::Integration { last_state, .. }) => assert_eq!(last_state.len(), 6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tracker_debounces_chatter() {
        let mut tr = SignTracker::new(0.0, 1.0);
        // brief excursion below zero, shorter than the window
        for (k, w) in [0.5, -0.1, -0.1, 0.2, 0.3].iter().enumerate() {
            tr.push(k as f64 + 1.0, *w);
        }
        assert!(tr.events.is_empty());
        tr.push(6.0, 0.2);
        tr.push(7.0, -0.2);
        for k in 0..DEBOUNCE_STEPS {
            tr.push(8.0 + k as f64, -0.5);
        }
        assert_eq!(tr.events.len(), 1);
        assert!((tr.events[0].t - 6.5).abs() < 1e-12);
        assert!(tr.events[0].from_positive);
    }

    #[test]
    fn no_spin_no_reversal() {
        let p = flat();
        let probe = spin_reversal_probe(&p, 0.0, 0.02, 20.0, &IntegratorConfig::default()).unwrap();
        assert!(probe.events.is_empty());
    }

    #[test]
    fn manifold_is_invariant() {
        let p = flat();
        let x = State::new([0.0, 0.0, 0.7], [0.3f64.sin(), 0.0, 0.0]).unwrap();
        let x = State::new([0.0, 0.0, 0.7], [x.gamma[0], 0.3f64.cos(), 0.0]).unwrap();
        assert!(manifold_residual(&p, &x, 10.0, &IntegratorConfig::default()).unwrap() <= 1e-9);
    }

    #[test]
    fn csv_layout() {
        let x = State::new([0.0; 3], [0.0, 0.0, 1.0]).unwrap();
        let tr =
            integrate(&x, &flat(), 1.0, &IntegratorConfig { output_step: Some(0.5), ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,w1,w2,w3,g1,g2,g3,H,G");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 9);
        assert_eq!(first[0], "0.0000000000000000e0");
        assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
