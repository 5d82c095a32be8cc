//! Dormand–Prince 5(4) embedded pair with PI step-size control.
//!
//! The fifth-order solution is propagated (local extrapolation) and the
//! embedded fourth-order solution only feeds the error estimate. Every
//! accepted step is recorded; there is no dense output between steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A first-order system `y' = f(t, y)`.
///
/// Implementations must be pure: identical `(t, y)` give identical output.
pub trait OdeSystem {
    fn dimension(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

/// Step-size control settings.
///
/// `max_step` and `min_step` are resolved against the integration span when
/// left unset: `max_step` defaults to the whole span and `min_step` to
/// `1e-14 * span`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_step: f64,
    pub max_step: Option<f64>,
    pub min_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            initial_step: 1e-8,
            max_step: None,
            min_step: None,
            max_steps: 10_000_000,
        }
    }
}

impl IntegrationConfig {
    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "{name} must be finite and > 0, got {v}"
                )))
            }
        };
        positive("abs_tol", self.abs_tol)?;
        positive("rel_tol", self.rel_tol)?;
        positive("initial_step", self.initial_step)?;
        if let Some(h) = self.max_step {
            positive("max_step", h)?;
        }
        if let Some(h) = self.min_step {
            positive("min_step", h)?;
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be positive"));
        }
        Ok(())
    }

    /// Resolved `(min_step, initial_step, max_step)` for a given span.
    fn resolve(&self, span: f64) -> Result<(f64, f64, f64)> {
        let max_step = self.max_step.unwrap_or(span);
        let min_step = self.min_step.unwrap_or(1e-14 * span);
        let initial = self.initial_step.min(max_step);
        if !(min_step <= initial && initial <= max_step) {
            return Err(Error::invalid(format!(
                "step bounds must satisfy min_step <= initial_step <= max_step, got {min_step} / {initial} / {max_step}"
            )));
        }
        Ok((min_step, initial, max_step))
    }
}

pub type Predicate<'a> = Box<dyn Fn(f64, &[f64]) -> bool + Sync + 'a>;

/// Terminating condition checked at every accepted node.
pub struct StopEvent<'a> {
    pub label: String,
    pub predicate: Predicate<'a>,
}

impl<'a> StopEvent<'a> {
    pub fn new(
        label: impl Into<String>,
        predicate: impl Fn(f64, &[f64]) -> bool + Sync + 'a,
    ) -> Self {
        Self {
            label: label.into(),
            predicate: Box::new(predicate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedEnd,
    Event(String),
    StepUnderflow,
    StepBudgetExhausted,
}

/// Accepted nodes of one integration run, with the right-hand side
/// evaluated at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub nodes: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory always holds the start node")
    }

    pub fn last_node(&self) -> f64 {
        *self
            .nodes
            .last()
            .expect("trajectory always holds the start node")
    }

    pub fn reached_end(&self) -> bool {
        self.termination == Termination::ReachedEnd
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;

/// Integrate `system` from `t0` to `t_end`.
///
/// Steps are shortened so that every entry of `stops` inside `(t0, t_end)`
/// becomes an accepted node. Events are tested on accepted nodes only; the
/// first node at which a predicate holds ends the run.
pub fn integrate(
    system: &dyn OdeSystem,
    t0: f64,
    state0: &[f64],
    t_end: f64,
    config: &IntegrationConfig,
    stops: &[f64],
    events: &[StopEvent<'_>],
) -> Result<Trajectory> {
    config.validate()?;
    let n = system.dimension();
    if !(t0.is_finite() && t_end.is_finite() && t0 < t_end) {
        return Err(Error::invalid(format!(
            "need finite t0 < t_end, got {t0}, {t_end}"
        )));
    }
    if state0.len() != n {
        return Err(Error::invalid(format!(
            "initial state has length {} but the system dimension is {n}",
            state0.len()
        )));
    }
    if state0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("initial state contains a non-finite value"));
    }
    let span = t_end - t0;
    let (min_step, mut h, max_step) = config.resolve(span)?;

    let mut stops: Vec<f64> = stops
        .iter()
        .copied()
        .filter(|&s| s > t0 && s < t_end)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(t_end);
    let mut next_stop = 0usize;

    let mut t = t0;
    let mut y = state0.to_vec();
    let mut k1 = vec![0.0; n];
    system.rhs(t, &y, &mut k1);

    let mut trajectory = Trajectory {
        nodes: vec![t0],
        states: vec![y.clone()],
        derivatives: vec![k1.clone()],
        termination: Termination::ReachedEnd,
    };

    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err_prev: f64 = 1e-4;
    let mut accepted = 0usize;

    loop {
        let target = stops[next_stop];
        let mut landing = false;
        if t + h >= target {
            h = target - t;
            landing = true;
        } else if t + 1.5 * h > target {
            // avoid leaving a sliver before the stop
            h = 0.5 * (target - t);
        }

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        system.rhs(t + C2 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        system.rhs(t + C3 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        system.rhs(t + C4 * h, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        system.rhs(t + C5 * h, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if landing { target } else { t + h };
        system.rhs(t_new, &tmp, &mut k6);
        for i in 0..n {
            y_new[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        system.rhs(t_new, &y_new, &mut k7);

        let mut err_sq = 0.0;
        let mut finite = true;
        for i in 0..n {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = config.abs_tol + config.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = e / scale;
            err_sq += r * r;
            finite &= y_new[i].is_finite() && k7[i].is_finite();
        }
        let err = if finite {
            (err_sq / n as f64).sqrt()
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            accepted += 1;
            trajectory.nodes.push(t);
            trajectory.states.push(y.clone());
            trajectory.derivatives.push(k1.clone());

            if let Some(ev) = events.iter().find(|ev| (ev.predicate)(t, &y)) {
                trajectory.termination = Termination::Event(ev.label.clone());
                return Ok(trajectory);
            }
            if landing {
                next_stop += 1;
                if next_stop == stops.len() {
                    return Ok(trajectory);
                }
            }
            if accepted >= config.max_steps {
                trajectory.termination = Termination::StepBudgetExhausted;
                return Ok(trajectory);
            }

            let err_c = err.max(1e-10);
            let factor = SAFETY * err_c.powf(-PI_ALPHA) * err_prev.powf(PI_BETA);
            err_prev = err_c;
            h = (h * factor.clamp(MIN_FACTOR, MAX_FACTOR)).min(max_step);
        } else {
            let factor = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                0.1
            };
            h *= factor;
            if h < min_step {
                trajectory.termination = Termination::StepUnderflow;
                return Ok(trajectory);
            }
        }
    }
}
