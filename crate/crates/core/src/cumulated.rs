//! Cumulated-densities shooting problem.
//!
//! With `φ(y) = ∫_0^{√y} r u(r) dr` and `S(y) = −√y v'(√y)`, radial
//! self-similar profiles solve
//!
//! ```text
//! φ'' + φ'/4 + φ' S / (2y) = 0,   S' + τ S / 4 = φ',
//! φ(0) = 0,  φ'(0) = a,  S(0) = 0,
//! ```
//!
//! and the total mass is `M / 2π = φ(∞)`. The system is singular at the
//! origin, so integration starts at `y = ε` from a first-order Taylor seed.
//!
//! Internally the second unknown is `ψ = log(e^{y/4} φ')`, which obeys
//! `ψ' = −S / (2y)`. This is the same equation written for a variable that
//! keeps full relative accuracy while `φ'` decays like `e^{−y/4}`, and it
//! makes `e^{y/4} φ'` non-increasing node to node whenever `S > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{self, IntegrationConfig, MonotoneCubic, OdeSystem, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulatedParams {
    /// Shooting parameter `a = u(0) / 2 = φ'(0)`.
    pub a: f64,
    pub tau: f64,
    pub eps: f64,
    /// End of the exported profile window.
    pub y_max: f64,
    /// The solve continues past `y_max` until `S` has decayed by this many
    /// e-folds, so that limits at infinity are integrated rather than guessed.
    pub tail_efolds: f64,
    pub integration: IntegrationConfig,
}

impl CumulatedParams {
    pub fn new(a: f64, tau: f64) -> Self {
        Self {
            a,
            tau,
            eps: 1e-6,
            y_max: 30.0,
            tail_efolds: 30.0,
            integration: IntegrationConfig::default(),
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_y_max(mut self, y_max: f64) -> Self {
        self.y_max = y_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::invalid(format!(
                "a must be positive, got {}",
                self.a
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::invalid(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::invalid(format!(
                "eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        if !(self.y_max.is_finite() && self.y_max > 1.0) {
            return Err(Error::invalid(format!(
                "y_max must exceed 1, got {}",
                self.y_max
            )));
        }
        if !(self.tail_efolds.is_finite() && self.tail_efolds >= 0.0) {
            return Err(Error::invalid(
                "tail_efolds must be finite and non-negative",
            ));
        }
        self.integration.validate()
    }

    /// Far end of the integration: `S` decays at rate `min{1, τ}/4`.
    pub fn y_far(&self) -> f64 {
        self.y_max.max(4.0 * self.tail_efolds / self.tau.min(1.0))
    }
}

/// Initial data at `y = ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub y0: f64,
    pub phi: f64,
    pub dphi: f64,
    pub s: f64,
}

/// First-order Taylor data at `ε`, dropping `O(ε²)` in `φ'` and `S`:
/// `φ'(ε) = a − a(1+2a)ε/4`, `φ(ε) = aε − a(1+2a)ε²/8`, `S(ε) = aε`.
pub fn seed(params: &CumulatedParams) -> Result<Seed> {
    params.validate()?;
    let CumulatedParams { a, eps, .. } = *params;
    let curvature = 0.25 * a * (1.0 + 2.0 * a);
    let dphi = a - curvature * eps;
    if dphi <= 0.0 {
        return Err(Error::InvalidSeed(format!(
            "eps = {eps} too large for a = {a}: seeded phi' = {dphi} is not positive"
        )));
    }
    Ok(Seed {
        y0: eps,
        phi: a * eps - 0.5 * curvature * eps * eps,
        dphi,
        s: a * eps,
    })
}

/// Leading truncation error of the seeded `S(ε)`, `a (1 + 2a + τ) ε² / 8`.
///
/// The seed is first order in `S`, so this offset is carried into the
/// solution; checks that are tight near the origin must allow for it.
pub fn seed_defect(params: &CumulatedParams) -> f64 {
    let CumulatedParams { a, tau, eps, .. } = *params;
    0.125 * a * (1.0 + 2.0 * a + tau) * eps * eps
}

struct CumulatedSystem {
    tau: f64,
}

impl OdeSystem for CumulatedSystem {
    fn dimension(&self) -> usize {
        3
    }

    // state = [φ, ψ, S] with φ' = exp(ψ − y/4)
    fn rhs(&self, y: f64, state: &[f64], out: &mut [f64]) {
        let dphi = (state[1] - 0.25 * y).exp();
        out[0] = dphi;
        out[1] = -0.5 * state[2] / y;
        out[2] = dphi - 0.25 * self.tau * state[2];
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulatedNode {
    pub y: f64,
    pub phi: f64,
    pub dphi: f64,
    pub s: f64,
    /// `log(e^{y/4} φ'(y))`
    pub log_scaled_dphi: f64,
}

impl CumulatedNode {
    pub fn scaled_dphi(&self) -> f64 {
        self.log_scaled_dphi.exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CumulatedProfile {
    pub params: CumulatedParams,
    nodes: Vec<CumulatedNode>,
    window_len: usize,
}

impl CumulatedProfile {
    /// Nodes on `[ε, y_max]`.
    pub fn window(&self) -> &[CumulatedNode] {
        &self.nodes[..self.window_len]
    }

    /// Nodes on `[ε, y_far]`, the window followed by the tail continuation.
    pub fn nodes(&self) -> &[CumulatedNode] {
        &self.nodes
    }

    pub fn far(&self) -> &CumulatedNode {
        self.nodes.last().unwrap()
    }

    pub fn d2phi(&self, n: &CumulatedNode) -> f64 {
        -n.dphi * (0.25 + 0.5 * n.s / n.y)
    }

    pub fn ds(&self, n: &CumulatedNode) -> f64 {
        n.dphi - 0.25 * self.params.tau * n.s
    }

    pub fn d2s(&self, n: &CumulatedNode) -> f64 {
        self.d2phi(n) - 0.25 * self.params.tau * self.ds(n)
    }

    /// Running `∫_ε^y S(z)/z dz` at every node, from the quintic Hermite rule.
    pub fn cumulative_s_over_z(&self) -> Result<Vec<f64>> {
        let n = &self.nodes;
        let ys: Vec<f64> = n.iter().map(|n| n.y).collect();
        let mut f = Vec::with_capacity(n.len());
        let mut df = Vec::with_capacity(n.len());
        let mut ddf = Vec::with_capacity(n.len());
        for n in n {
            let (s, ds, d2s, y) = (n.s, self.ds(n), self.d2s(n), n.y);
            f.push(s / y);
            df.push(ds / y - s / (y * y));
            ddf.push(d2s / y - 2.0 * ds / (y * y) + 2.0 * s / (y * y * y));
        }
        integrator::cumulative_hermite5(&ys, &f, &df, &ddf)
    }

    /// `∫_ε^{y_far} S dy`.
    pub fn integral_of_s(&self) -> Result<f64> {
        let n = &self.nodes;
        let ys: Vec<f64> = n.iter().map(|n| n.y).collect();
        let s: Vec<f64> = n.iter().map(|n| n.s).collect();
        let ds: Vec<f64> = n.iter().map(|n| self.ds(n)).collect();
        let dds: Vec<f64> = n.iter().map(|n| self.d2s(n)).collect();
        Ok(*integrator::cumulative_hermite5(&ys, &s, &ds, &dds)?
            .last()
            .unwrap())
    }
}

/// Integrate from the seed to the far horizon with a node forced at `y_max`.
pub fn solve(params: &CumulatedParams) -> Result<CumulatedProfile> {
    let sd = seed(params)?;
    let y_far = params.y_far();
    let psi0 = sd.dphi.ln() + 0.25 * sd.y0;
    let system = CumulatedSystem { tau: params.tau };
    let stops = if y_far > params.y_max {
        vec![params.y_max]
    } else {
        vec![]
    };
    let tr = integrator::integrate(
        &system,
        sd.y0,
        &[sd.phi, psi0, sd.s],
        y_far,
        &params.integration,
        &stops,
        &[],
    )?;
    if tr.termination != Termination::ReachedEnd {
        return Err(Error::Integration {
            context: format!("cumulated solve a = {}, tau = {}", params.a, params.tau),
            at: tr.last_node(),
            termination: tr.termination,
        });
    }
    let nodes: Vec<CumulatedNode> = tr
        .nodes
        .iter()
        .zip(&tr.states)
        .map(|(&y, st)| CumulatedNode {
            y,
            phi: st[0],
            dphi: (st[1] - 0.25 * y).exp(),
            s: st[2],
            log_scaled_dphi: st[1],
        })
        .collect();
    if nodes
        .iter()
        .any(|n| !(n.phi.is_finite() && n.s.is_finite() && n.log_scaled_dphi.is_finite()))
    {
        return Err(Error::NonFinite("cumulated profile".into()));
    }
    let window_len = nodes
        .iter()
        .position(|n| n.y >= params.y_max)
        .map_or(nodes.len(), |i| i + 1);
    Ok(CumulatedProfile {
        params: *params,
        nodes,
        window_len,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// `φ(∞) = M / 2π`.
    pub mass_over_2pi: f64,
    /// `σ = 2 l`.
    pub sigma: f64,
    /// `l = lim e^{y/4} φ'(y)`.
    pub l: f64,
    /// `v(0) = ½ ∫_0^∞ S(z)/z dz`.
    pub v0: f64,
    /// `(τ/4) ∫_0^∞ S dy`, an independent route to the mass.
    #[serde(rename = "mass_from_S")]
    pub mass_from_s: f64,
    /// `φ(y_max)`, the truncated mass estimate.
    pub phi_at_y_max: f64,
}

impl DerivedQuantities {
    pub fn mass(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.mass_over_2pi
    }

    /// `|mass_over_2pi − mass_from_s| / mass_over_2pi`.
    pub fn mass_consistency(&self) -> f64 {
        (self.mass_over_2pi - self.mass_from_s).abs() / self.mass_over_2pi
    }
}

fn columns(profile: &CumulatedProfile) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = profile.nodes();
    let ys = n.iter().map(|n| n.y).collect();
    let f = n.iter().map(|n| n.s / n.y).collect();
    let df = n
        .iter()
        .map(|n| (profile.ds(n) * n.y - n.s) / (n.y * n.y))
        .collect();
    (ys, f, df)
}

/// Beyond the far node `S` is modelled as `S_far e^{−k(z − y_far)}` with
/// `k = min{1, τ}/4`, giving `∫ S/z ≈ S_far / (k y_far + 1)`.
fn s_over_z_tail(profile: &CumulatedProfile) -> f64 {
    let far = profile.far();
    let k = 0.25 * profile.params.tau.min(1.0);
    far.s / (k * far.y + 1.0)
}

pub fn derive(profile: &CumulatedProfile) -> Result<DerivedQuantities> {
    let p = &profile.params;
    let far = profile.far();
    let l = far.scaled_dphi();
    let phi_tail = 4.0 * far.dphi;

    let int_s_over_z = *profile.cumulative_s_over_z()?.last().unwrap();
    // on (0, ε) S(z)/z is a up to O(ε)
    let v0 = 0.5 * (p.a * p.eps + int_s_over_z + s_over_z_tail(profile));

    let int_s = profile.integral_of_s()?;
    // (τ/4) ∫_{far}^∞ S = S_far + ∫_{far}^∞ φ'
    let mass_from_s = 0.25 * p.tau * (0.5 * p.a * p.eps * p.eps + int_s) + far.s + phi_tail;

    let d = DerivedQuantities {
        mass_over_2pi: far.phi + phi_tail,
        sigma: 2.0 * l,
        l,
        v0,
        mass_from_s,
        phi_at_y_max: profile.window().last().unwrap().phi,
    };
    if [d.mass_over_2pi, d.sigma, d.v0, d.mass_from_s]
        .iter()
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite("derived quantities".into()));
    }
    Ok(d)
}

/// `(M/2π)² − 4 M/2π − ∫_0^∞ φ'(2φ − 2S − y) dy`, zero for exact solutions.
pub fn mass_identity_residual(
    profile: &CumulatedProfile,
    derived: &DerivedQuantities,
) -> Result<f64> {
    let p = &profile.params;
    let nodes = profile.nodes();
    let ys: Vec<f64> = nodes.iter().map(|n| n.y).collect();
    let g: Vec<f64> = nodes
        .iter()
        .map(|n| n.dphi * (2.0 * n.phi - 2.0 * n.s - n.y))
        .collect();
    let dg: Vec<f64> = nodes
        .iter()
        .map(|n| {
            profile.d2phi(n) * (2.0 * n.phi - 2.0 * n.s - n.y)
                + n.dphi * (2.0 * n.dphi - 2.0 * profile.ds(n) - 1.0)
        })
        .collect();
    let m = derived.mass_over_2pi;
    let far = profile.far();
    // near the origin the integrand is −a y; past y_far φ' = l e^{−y/4}, φ = m, S = 0
    let head = -0.5 * p.a * p.eps * p.eps;
    let tail = far.dphi * (8.0 * m - 4.0 * far.y - 16.0);
    let integral = head + integrator::hermite_quadrature(&ys, &g, &dg)? + tail;
    Ok(m * m - 4.0 * m - integral)
}

/// Fraction of the total mass inside `y ≤ y_in`, i.e. `|ξ| ≤ √y_in`.
pub fn mass_fraction_within(
    profile: &CumulatedProfile,
    derived: &DerivedQuantities,
    y_in: f64,
) -> Result<f64> {
    let nodes = profile.nodes();
    let x = nodes.iter().map(|n| n.y).collect();
    let f = nodes.iter().map(|n| n.phi).collect();
    let d = nodes.iter().map(|n| n.dphi).collect();
    let phi = MonotoneCubic::new(x, f, d)?;
    Ok(phi.eval(y_in)? / derived.mass_over_2pi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Radial profiles `u(r) = 2φ'(r²)` and `v(r) = ½ ∫_{r²}^∞ S(z)/z dz`.
pub fn reconstruct(profile: &CumulatedProfile, r_grid: &[f64]) -> Result<Reconstruction> {
    let p = &profile.params;
    let (lo, hi) = (p.eps.sqrt(), p.y_max.sqrt());
    if let Some(&r) = r_grid.iter().find(|&&r| !(r >= lo && r <= hi)) {
        return Err(Error::OutOfRange { value: r, lo, hi });
    }
    if r_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("r grid must be strictly increasing"));
    }
    let win = profile.window();
    let dphi = MonotoneCubic::new(
        win.iter().map(|n| n.y).collect(),
        win.iter().map(|n| n.dphi).collect(),
        win.iter().map(|n| profile.d2phi(n)).collect(),
    )?;
    let (ys, f, df) = columns(profile);
    let s_over_z = MonotoneCubic::new(ys, f, df)?;
    let tail = s_over_z_tail(profile);

    let mut u = Vec::with_capacity(r_grid.len());
    let mut v = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        // clamp guards the round trip sqrt(y)^2 at the window ends
        let y = (r * r).clamp(p.eps, p.y_max);
        u.push(2.0 * dphi.eval(y)?);
        v.push(0.5 * (s_over_z.integral_to_end(y)? + tail));
    }
    Ok(Reconstruction {
        r: r_grid.to_vec(),
        u,
        v,
    })
}
