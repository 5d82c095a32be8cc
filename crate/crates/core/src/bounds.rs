//! Closed-form a-priori bounds for the shooting problem and a checker that
//! measures every one of them against a solved cumulated profile.
//!
//! Conventions: `m = M/2π`, `l = lim e^{y/4} φ'(y)`, `I(τ) = log τ/(τ − 1)`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cumulated::{self, CumulatedProfile, DerivedQuantities};
use crate::error::{Error, Result};
use crate::search;

/// Absolute slack used for every inequality.
pub const SLACK: f64 = 1e-8;
/// Tolerance for identities along a profile, relative to `max(1, |value|)`.
pub const IDENTITY_TOL: f64 = 1e-6;
/// Relative tolerance between the two mass routes.
pub const MASS_CONSISTENCY_TOL: f64 = 1e-5;
/// Tolerance on `(m² − 4m − ∫φ'(2φ − 2S − y)) / max(1, m²)`.
pub const MASS_IDENTITY_TOL: f64 = 1e-5;

const SERIES_BAND: f64 = 1e-4;

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

/// `(1 − e^{−x})/x`, equal to 1 at `x = 0`.
fn one_minus_exp_over(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// `I(τ) = log τ / (τ − 1)`, with `I(1) = 1`.
pub fn log_ratio(tau: f64) -> Result<f64> {
    positive("tau", tau)?;
    let x = tau - 1.0;
    if x.abs() < SERIES_BAND {
        Ok(1.0 - x / 2.0 + x * x / 3.0 - x * x * x / 4.0)
    } else {
        Ok(tau.ln() / x)
    }
}

/// Majorant profile `h(y; τ)` with `S(y) ≤ a y h(y; τ)`.
pub fn h(y: f64, tau: f64) -> Result<f64> {
    positive("tau", tau)?;
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::invalid(format!(
            "y must be finite and non-negative, got {y}"
        )));
    }
    // 4/(y(τ−1)) (e^{−y/4} − e^{−τy/4}) = e^{−min{1,τ}y/4} (1 − e^{−x})/x, x = |τ−1|y/4
    Ok((-0.25 * tau.min(1.0) * y).exp() * one_minus_exp_over(0.25 * (tau - 1.0).abs() * y))
}

/// Majorant profile `g(y; a, τ)` with `S(y) ≤ a y g(y; a, τ)`.
pub fn g_point(y: f64, a: f64, tau: f64) -> Result<f64> {
    positive("a", a)?;
    positive("tau", tau)?;
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::invalid(format!(
            "y must be finite and non-negative, got {y}"
        )));
    }
    Ok(if tau <= 1.0 {
        let e = 0.25 * tau * y;
        tau / (tau * e.exp() + a * e.exp_m1())
    } else {
        let e = 0.25 * y;
        1.0 / (e.exp() + a * e.exp_m1())
    })
}

/// Upper envelope for `M/2π` from the existence theorem.
pub fn f_upper(a: f64, tau: f64) -> Result<f64> {
    positive("a", a)?;
    positive("tau", tau)?;
    let c = 2.0 / 3.0 * PI * PI;
    Ok(if tau <= 0.5 {
        (4.0 * a).min(4.0)
    } else if tau <= 1.0 {
        (4.0 * a).min(c)
    } else {
        (4.0 * a).min(c * tau).min(4.0 * (tau + 1.0))
    })
}

/// Lower envelope for `M/2π` from the existence theorem.
pub fn g_lower(a: f64, tau: f64) -> Result<f64> {
    positive("a", a)?;
    positive("tau", tau)?;
    let gauss = 4.0 * a * (-2.0 * a * log_ratio(tau)?).exp();
    Ok(if tau <= 1.0 {
        gauss.max(4.0 * a * tau / (a + tau))
    } else {
        gauss.max(4.0 * a / (a + 1.0))
    })
}

/// A threshold on `a` that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Finite(f64),
    Unbounded,
}

impl Threshold {
    pub fn admits(&self, a: f64) -> bool {
        match *self {
            Threshold::Finite(t) => a <= t,
            Threshold::Unbounded => true,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Threshold::Finite(t) => Some(t),
            Threshold::Unbounded => None,
        }
    }

    fn max(self, other: f64) -> Self {
        match self {
            Threshold::Finite(t) => Threshold::Finite(t.max(other)),
            Threshold::Unbounded => Threshold::Unbounded,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(t) => write!(f, "{t}"),
            Threshold::Unbounded => f.write_str("inf"),
        }
    }
}

/// Shooting values `a ≤ j(τ)` give `M ≤ 8π`.
pub fn j(tau: f64) -> Result<Threshold> {
    positive("tau", tau)?;
    if tau <= 0.5 {
        return Ok(Threshold::Unbounded);
    }
    let e = (1.0 - 0.5 / tau).exp();
    let base = e / (2.0 * tau - e);
    Ok(Threshold::Finite(if tau <= 1.0 {
        tau * base
    } else {
        base
    }))
}

/// Largest `a` for which the profile estimates guarantee `τ S/2 ≤ 1`:
/// the better of `j(τ)` and `½ τ^{1/(τ−1)} = ½ e^{I(τ)}`.
pub fn sc_threshold(tau: f64) -> Result<Threshold> {
    Ok(j(tau)?.max(0.5 * log_ratio(tau)?.exp()))
}

/// Maximizer of `a ↦ a e^{−2a I(τ)}`.
pub fn a_star(tau: f64) -> Result<f64> {
    Ok(0.5 / log_ratio(tau)?)
}

/// The `τ` beyond which the Gaussian lower bound alone forces mass above `8π`.
pub fn tau_bar() -> f64 {
    let target = 0.5 / std::f64::consts::E;
    let (lo, hi) = search::bisect(|t| Ok(log_ratio(t)? - target), 2.0, 100.0, 1e-14, 200)
        .expect("I(τ) − 1/(2e) changes sign on [2, 100]");
    0.5 * (lo + hi)
}

/// Open set of `v(0) > 0` excluded by `v(0) ≤ σ I(τ) e^{v(0)}`, present when `σ I(τ) < 1/e`.
pub fn forbidden_v0(sigma: f64, tau: f64) -> Result<Option<(f64, f64)>> {
    positive("sigma", sigma)?;
    let c = sigma * log_ratio(tau)?;
    if c >= 1.0 / std::f64::consts::E {
        return Ok(None);
    }
    // x − c e^x is concave with peak at x_c = −log c > 1
    let xc = -c.ln();
    let f = |x: f64| Ok(x - c * x.exp());
    let (lo1, hi1) = search::bisect(f, 0.0, xc, 1e-13, 200)?;
    let mut right = xc + 1.0;
    while f(right)? > 0.0 {
        right = xc + 2.0 * (right - xc);
    }
    let (lo2, hi2) = search::bisect(f, xc, right, 1e-13, 200)?;
    Ok(Some((0.5 * (lo1 + hi1), 0.5 * (lo2 + hi2))))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    ScalarBound,
    PointwiseBound,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    pub kind: BoundKind,
    /// False when the hypotheses of the bound do not hold for this `(a, τ)`.
    pub applies: bool,
    pub passed: bool,
    /// Smallest margin `rhs − lhs` (bounds) or `−|residual|` (identities);
    /// absent when the entry does not apply.
    pub worst_slack: Option<f64>,
    pub tolerance: f64,
    /// Abscissa `y` of the worst margin, for pointwise entries.
    pub location: Option<f64>,
}

impl BoundEntry {
    fn skipped(name: &str, kind: BoundKind) -> Self {
        Self {
            name: name.into(),
            kind,
            applies: false,
            passed: true,
            worst_slack: None,
            tolerance: 0.0,
            location: None,
        }
    }

    fn measured(
        name: &str,
        kind: BoundKind,
        slack: f64,
        tolerance: f64,
        location: Option<f64>,
    ) -> Self {
        Self {
            name: name.into(),
            kind,
            applies: true,
            passed: slack >= -tolerance,
            worst_slack: Some(slack),
            tolerance,
            location,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub a: f64,
    pub tau: f64,
    pub eps: f64,
    /// Pointwise checks skip nodes below this abscissa, where the seed
    /// truncation dominates.
    pub pointwise_from: f64,
    /// Tolerance of pointwise bounds on `φ` and `S`: the base slack plus
    /// twice the seed truncation offset.
    pub pointwise_tolerance: f64,
    /// Relative tolerance of the lower bounds on `φ'`, which also absorb
    /// the seed offset accumulated through `∫ S/z`.
    pub dphi_tolerance: f64,
    pub entries: Vec<BoundEntry>,
    /// Interval of `v(0)` ruled out for this `σ`, if any. Informational.
    pub forbidden_v0: Option<(f64, f64)>,
}

impl BoundsReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn entry(&self, name: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "bounds for a = {}, tau = {} (pointwise from y = {:e})\n{:<34} {:<9} {:<7} {:>14} {:>12}\n",
            self.a, self.tau, self.pointwise_from, "entry", "kind", "status", "worst slack", "at y"
        );
        for e in &self.entries {
            let kind = match e.kind {
                BoundKind::ScalarBound => "scalar",
                BoundKind::PointwiseBound => "pointwise",
                BoundKind::Identity => "identity",
            };
            let status = match (e.applies, e.passed) {
                (false, _) => "n/a",
                (true, true) => "pass",
                (true, false) => "FAIL",
            };
            let slack = e
                .worst_slack
                .map_or("-".to_string(), |s| format!("{s:.4e}"));
            let at = e.location.map_or("-".to_string(), |y| format!("{y:.4e}"));
            out.push_str(&format!(
                "{:<34} {:<9} {:<7} {:>14} {:>12}\n",
                e.name, kind, status, slack, at
            ));
        }
        if let Some((lo, hi)) = self.forbidden_v0 {
            out.push_str(&format!(
                "v(0) cannot lie in ({lo:.6}, {hi:.6}) for this sigma\n"
            ));
        }
        out
    }
}

/// Running minimum of a margin over the nodes.
struct Worst {
    slack: f64,
    at: Option<f64>,
}

impl Worst {
    fn new() -> Self {
        Self {
            slack: f64::INFINITY,
            at: None,
        }
    }

    fn see(&mut self, slack: f64, y: f64) {
        // NaN margins count as violations
        let s = if slack.is_nan() {
            f64::NEG_INFINITY
        } else {
            slack
        };
        if s < self.slack {
            self.slack = s;
            self.at = Some(y);
        }
    }

    fn entry(self, name: &str, kind: BoundKind, tol: f64) -> BoundEntry {
        BoundEntry::measured(name, kind, self.slack, tol, self.at)
    }
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189),
    (0.906_179_845_938_664, 0.236_926_885_056_189),
];

/// `∫_{x0}^{x1} e^{−k(x1 − z)} p(z) dz` with `p` the cubic Hermite interpolant.
fn damped_hermite_integral(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, k: f64) -> f64 {
    const PANELS: usize = 4;
    let h = x1 - x0;
    let w = h / PANELS as f64;
    let mut total = 0.0;
    for p in 0..PANELS {
        let c = x0 + (p as f64 + 0.5) * w;
        for &(xi, wi) in &GAUSS5 {
            let z = c + 0.5 * w * xi;
            let s = (z - x0) / h;
            let (s2, s3) = (s * s, s * s * s);
            let val = (2.0 * s3 - 3.0 * s2 + 1.0) * f0
                + (s3 - 2.0 * s2 + s) * h * d0
                + (-2.0 * s3 + 3.0 * s2) * f1
                + (s3 - s2) * h * d1;
            total += 0.5 * w * wi * (-k * (x1 - z)).exp() * val;
        }
    }
    total
}

/// Evaluate every bound and identity on a solved profile.
pub fn check_all(profile: &CumulatedProfile, derived: &DerivedQuantities) -> Result<BoundsReport> {
    use BoundKind::*;

    let p = &profile.params;
    let (a, tau) = (p.a, p.tau);
    let m = derived.mass_over_2pi;
    let (sigma, l, v0) = (derived.sigma, derived.l, derived.v0);
    let i_tau = log_ratio(tau)?;
    let k = tau.min(1.0);
    let y_from = 2.0 * p.eps;
    let nodes = profile.nodes();
    let pts: Vec<_> = nodes.iter().filter(|n| n.y >= y_from).collect();
    let defect = cumulated::seed_defect(p);
    let tol = SLACK + 2.0 * defect;
    let tol_dphi = SLACK + defect * (2.0 + (profile.far().y / p.eps).ln());

    let mut entries = Vec::new();
    let scalar =
        |name: &str, slack: f64| BoundEntry::measured(name, ScalarBound, slack, SLACK, None);

    // ---- scalar bounds on v(0), σ and the mass
    entries.push(scalar("v0_upper_log_ratio", 2.0 * a * i_tau - v0));
    entries.push(scalar("v0_lower_log", v0 - (2.0 * a * i_tau).ln_1p()));
    entries.push(scalar("v0_self_consistent", sigma * v0.exp() * i_tau - v0));
    entries.push(BoundEntry::measured(
        "sigma_v0_product",
        Identity,
        -((sigma * v0.exp() - 2.0 * a) / (2.0 * a)).abs(),
        IDENTITY_TOL,
        None,
    ));
    entries.push(scalar(
        "sigma_lower_gaussian",
        sigma - 2.0 * a * (-2.0 * a * i_tau).exp(),
    ));
    entries.push(scalar(
        "sigma_upper",
        (0.5 * m).min(2.0 * a / (2.0 * a * i_tau + 1.0)) - sigma,
    ));
    entries.push(scalar(
        "sigma_lower_refined",
        l - a * (1.0 + a / k).powi(-2),
    ));
    entries.push(scalar("mass_lower_sigma", m - 2.0 * sigma));
    entries.push(scalar(
        "mass_lower_gaussian",
        m - 4.0 * a * (-2.0 * a * i_tau).exp(),
    ));
    entries.push(scalar(
        "existence_envelope",
        (m - g_lower(a, tau)?).min(f_upper(a, tau)? - m),
    ));
    entries.push(scalar(
        "mass_between_l_and_a",
        (m / 4.0 - l).min(a - m / 4.0),
    ));
    entries.push(if tau == 1.0 {
        scalar("mass_lower_tau_one", m - 2.0 * (-(-2.0 * a).exp_m1()))
    } else {
        BoundEntry::skipped("mass_lower_tau_one", ScalarBound)
    });
    entries.push(if tau >= 1.0 {
        scalar("mass_lower_tau_ge_one", m - 4.0 * a / (a + 1.0))
    } else {
        BoundEntry::skipped("mass_lower_tau_ge_one", ScalarBound)
    });
    entries.push(if tau < 1.0 {
        scalar("mass_lower_tau_lt_one", m - 4.0 * a * tau / (a + tau))
    } else {
        BoundEntry::skipped("mass_lower_tau_lt_one", ScalarBound)
    });
    let known_upper = if tau <= 0.5 {
        4.0
    } else if tau <= 1.0 {
        2.0 / 3.0 * PI * PI
    } else {
        (2.0 / 3.0 * PI * PI * tau).min(4.0 * (tau + 1.0))
    };
    entries.push(scalar("mass_upper_known", known_upper - m));
    let small_a = j(tau)?.admits(a) || a <= 1.0;
    entries.push(if small_a {
        scalar("mass_upper_small_a", 4.0 * a.min(1.0) - m)
    } else {
        BoundEntry::skipped("mass_upper_small_a", ScalarBound)
    });

    let residual = cumulated::mass_identity_residual(profile, derived)?;
    entries.push(BoundEntry::measured(
        "mass_identity",
        Identity,
        -(residual / m.powi(2).max(1.0)).abs(),
        MASS_IDENTITY_TOL,
        None,
    ));
    entries.push(BoundEntry::measured(
        "mass_two_routes",
        Identity,
        -derived.mass_consistency(),
        MASS_CONSISTENCY_TOL,
        None,
    ));

    // ---- pointwise bounds along the profile
    let mut incr = Worst::new();
    let mut prev_phi = f64::NEG_INFINITY;
    for n in &pts {
        incr.see((n.phi - prev_phi).min(n.dphi).min(-profile.d2phi(n)), n.y);
        prev_phi = n.phi;
    }
    entries.push(incr.entry("phi_increasing_concave", PointwiseBound, tol));

    let mut between = Worst::new();
    for n in &pts {
        between.see(n.s.min(n.phi - n.s), n.y);
    }
    entries.push(between.entry("s_between_zero_and_phi", PointwiseBound, tol));

    let mut scaled = Worst::new();
    let mut prev = f64::INFINITY;
    let (ln_a, ln_l) = (a.ln(), l.ln());
    for n in &pts {
        let e = n.log_scaled_dphi;
        scaled.see((ln_a - e).min(e - ln_l).min(prev - e), n.y);
        prev = e;
    }
    entries.push(scaled.entry("scaled_dphi_decreasing", PointwiseBound, tol_dphi));

    let mut basic = Worst::new();
    let mut with_mass = Worst::new();
    let mut refined = Worst::new();
    for n in &pts {
        let q = -(-0.25 * n.y).exp_m1(); // 1 − e^{−y/4}
        let near = n.y * (-0.25 * n.y).exp() / ((1.0 + 1.0 / a) - (-0.25 * n.y).exp());
        let upper = (4.0 * a * q).min(m);
        basic.see((n.phi - 4.0 * l * q).min(4.0 * a * q - n.phi), n.y);
        with_mass.see((n.phi - m * q).min(upper - n.phi), n.y);
        refined.see((n.phi - (m * q).max(near)).min(upper - n.phi), n.y);
    }
    entries.push(basic.entry("phi_envelope_basic", PointwiseBound, tol));
    entries.push(with_mass.entry("phi_envelope_mass", PointwiseBound, tol));
    entries.push(refined.entry("phi_envelope_refined", PointwiseBound, tol));

    entries.push(if tau >= 1.0 {
        let mut w = Worst::new();
        for n in &pts {
            let e = (-0.25 * n.y).exp();
            let s_cap = n.y * e / ((1.0 + 1.0 / a) - e);
            let phi_floor = 4.0 * (1.0 - e) / ((1.0 + 1.0 / a) - e);
            w.see((s_cap - n.s).min(n.phi - phi_floor.max(m * (1.0 - e))), n.y);
        }
        w.entry("phi_envelope_tau_ge_one", PointwiseBound, tol)
    } else {
        BoundEntry::skipped("phi_envelope_tau_ge_one", PointwiseBound)
    });

    let mut s_phi = Worst::new();
    let mut s_dphi = Worst::new();
    let mut s_half = Worst::new();
    let mut s_h = Worst::new();
    let mut s_g = Worst::new();
    let mut s_unif = Worst::new();
    for n in &pts {
        let decay = (-0.25 * tau * n.y).exp();
        s_phi.see(n.s - decay * n.phi, n.y);
        s_dphi.see(
            n.s - n.y * n.dphi * one_minus_exp_over(0.25 * tau * n.y),
            n.y,
        );
        s_half.see(0.5 * n.phi * (1.0 + decay) - n.s, n.y);
        s_h.see(a * n.y * h(n.y, tau)? - n.s, n.y);
        s_g.see(a * n.y * g_point(n.y, a, tau)? - n.s, n.y);
        s_unif.see(k * n.y / (0.25 * k * n.y).exp_m1() - n.s, n.y);
    }
    entries.push(s_phi.entry("s_lower_phi", PointwiseBound, tol));
    entries.push(s_dphi.entry("s_lower_dphi", PointwiseBound, tol));
    entries.push(s_half.entry("s_upper_half_phi", PointwiseBound, tol));
    // also the lower bound on v'(r), which is the same inequality after y = r²
    entries.push(s_h.entry("s_upper_h", PointwiseBound, tol));
    entries.push(s_g.entry("s_upper_g", PointwiseBound, tol));
    entries.push(s_unif.entry("s_uniform", PointwiseBound, tol));

    // φ' lower bounds, compared after scaling by e^{y/4}
    let mut d_gauss = Worst::new();
    let mut d_g = Worst::new();
    let floor = a * (-2.0 * a * i_tau).exp();
    for n in &pts {
        // compared as logs: relative margins on φ'
        let e = n.log_scaled_dphi;
        d_gauss.see(e - floor.ln(), n.y);
        let b = if tau >= 1.0 {
            a / ((1.0 + a) - a * (-0.25 * n.y).exp()).powi(2)
        } else {
            let r = a / tau;
            a / ((r + 1.0) - r * (-0.25 * tau * n.y).exp()).powi(2)
        };
        d_g.see(e - b.ln(), n.y);
    }
    entries.push(d_gauss.entry("dphi_lower_gaussian", PointwiseBound, tol_dphi));
    if tau >= 1.0 {
        entries.push(d_g.entry("dphi_lower_g_tau_ge_one", PointwiseBound, tol_dphi));
        entries.push(BoundEntry::skipped(
            "dphi_lower_g_tau_lt_one",
            PointwiseBound,
        ));
    } else {
        entries.push(BoundEntry::skipped(
            "dphi_lower_g_tau_ge_one",
            PointwiseBound,
        ));
        entries.push(d_g.entry("dphi_lower_g_tau_lt_one", PointwiseBound, tol_dphi));
    }

    // identities along the profile, using ∫ S/z on the solver grid
    let cum = profile.cumulative_s_over_z()?;
    let head = a * p.eps;

    let mut formula = Worst::new();
    for (n, c) in nodes.iter().zip(&cum).filter(|(n, _)| n.y >= y_from) {
        // log of e^{y/4} φ' against log a − ½ ∫_0^y S/z
        formula.see(
            -(n.log_scaled_dphi - (a.ln() - 0.5 * (head + c))).abs(),
            n.y,
        );
    }
    entries.push(formula.entry("dphi_integral_form", Identity, IDENTITY_TOL));

    let mut s_int = Worst::new();
    let kk = 0.25 * tau;
    // ∫_0^ε e^{−k(ε−z)} φ ≈ a ε²/2
    let mut damped = 0.5 * a * p.eps * p.eps;
    for w in nodes.windows(2) {
        let (n0, n1) = (&w[0], &w[1]);
        damped = (-kk * (n1.y - n0.y)).exp() * damped
            + damped_hermite_integral(n0.y, n1.y, n0.phi, n1.phi, n0.dphi, n1.dphi, kk);
        if n1.y >= y_from {
            let predicted = n1.phi - kk * damped;
            s_int.see(-(n1.s - predicted).abs() / n1.phi.max(1.0), n1.y);
        }
    }
    entries.push(s_int.entry("s_integral_form", Identity, IDENTITY_TOL));

    // v(y) = ½ ∫_y^∞ S/z, with v(0) from the derived quantities
    let total = *cum.last().unwrap();
    let v_tail = v0 - 0.5 * (head + total);
    let c_decay = sigma * v0.exp() / k;
    let mut v_range = Worst::new();
    let mut v_decay = Worst::new();
    let mut prev_v = f64::INFINITY;
    for (n, c) in nodes.iter().zip(&cum).filter(|(n, _)| n.y >= y_from) {
        let v = 0.5 * (total - c) + v_tail;
        v_range.see(v.min(v0 - v).min(2.0 * a * i_tau - v).min(prev_v - v), n.y);
        v_decay.see(c_decay * (-0.25 * k * n.y).exp() - v, n.y);
        prev_v = v;
    }
    entries.push(v_range.entry("v_range", PointwiseBound, tol));
    entries.push(v_decay.entry("v_decay", PointwiseBound, tol));

    entries.push(if sc_threshold(tau)?.admits(a) {
        let mut sc = Worst::new();
        for n in &pts {
            sc.see(1.0 - 0.5 * tau * n.s, n.y);
        }
        sc.entry("s_small_enough", PointwiseBound, tol)
    } else {
        BoundEntry::skipped("s_small_enough", PointwiseBound)
    });

    Ok(BoundsReport {
        a,
        tau,
        eps: p.eps,
        pointwise_from: y_from,
        pointwise_tolerance: tol,
        dphi_tolerance: tol_dphi,
        entries,
        forbidden_v0: forbidden_v0(sigma, tau)?,
    })
}

/// Solve, derive and check in one call.
pub fn check_params(params: &cumulated::CumulatedParams) -> Result<BoundsReport> {
    let profile = cumulated::solve(params)?;
    let derived = cumulated::derive(&profile)?;
    check_all(&profile, &derived)
}
