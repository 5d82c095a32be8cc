//! Bifurcation-level computations built on repeated shooting solves.
//!
//! Sweeps run on the ambient rayon pool; results are always ordered by the
//! input grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::cumulated::{self, CumulatedParams};
use crate::error::{Error, Result};
use crate::search;
use crate::wmodel::{self, WParams};

/// `M/2π` of the critical mass `8π`.
pub const CRITICAL: f64 = 4.0;

/// Margin above [`CRITICAL`] that counts as supercritical when locating `τ*`.
pub const TAU_STAR_THRESHOLD: f64 = 1e-6;

/// Required agreement between a polished root and the target mass.
pub const ROOT_TOL: f64 = 1e-6;

/// `n` points log-spaced on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::invalid(format!(
            "log grid needs 0 < lo < hi and n >= 2, got [{lo}, {hi}], n = {n}"
        )));
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    Ok(g)
}

fn mass_at(base: &CumulatedParams, a: f64) -> Result<cumulated::DerivedQuantities> {
    let p = CumulatedParams { a, ..*base };
    cumulated::derive(&cumulated::solve(&p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassSample {
    pub a: f64,
    pub mass_over_2pi: f64,
    pub sigma: f64,
    pub v0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub at: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassCurve {
    pub tau: f64,
    pub samples: Vec<MassSample>,
    pub failures: Vec<SampleFailure>,
    pub argmax_a: f64,
    pub max_mass_over_2pi: f64,
}

impl MassCurve {
    /// Samples violating `g_lower ≤ M/2π ≤ f_upper` beyond the bound slack.
    pub fn envelope_violations(&self) -> Vec<MassSample> {
        self.samples
            .iter()
            .filter(|s| {
                let lo = bounds::g_lower(s.a, self.tau).unwrap_or(f64::NAN);
                let hi = bounds::f_upper(s.a, self.tau).unwrap_or(f64::NAN);
                !(s.mass_over_2pi >= lo - bounds::SLACK && s.mass_over_2pi <= hi + bounds::SLACK)
            })
            .copied()
            .collect()
    }
}

pub fn mass_curve(tau: f64, a_grid: &[f64]) -> Result<MassCurve> {
    mass_curve_with(&CumulatedParams::new(1.0, tau), a_grid)
}

/// Mass curve over `a_grid` using the numerical settings of `base` (its `a` is ignored).
pub fn mass_curve_with(base: &CumulatedParams, a_grid: &[f64]) -> Result<MassCurve> {
    if a_grid.iter().any(|a| !(a.is_finite() && *a > 0.0))
        || a_grid.windows(2).any(|w| !(w[0] < w[1]))
    {
        return Err(Error::invalid(
            "a grid must be positive and strictly increasing",
        ));
    }
    let results: Vec<(f64, Result<cumulated::DerivedQuantities>)> =
        a_grid.par_iter().map(|&a| (a, mass_at(base, a))).collect();
    let mut samples = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (a, r) in results {
        match r {
            Ok(d) => samples.push(MassSample {
                a,
                mass_over_2pi: d.mass_over_2pi,
                sigma: d.sigma,
                v0: d.v0,
            }),
            Err(e) => failures.push(SampleFailure {
                at: a,
                error: e.to_string(),
            }),
        }
    }
    if samples.len() < 3 {
        return Err(Error::Search(format!(
            "only {} of {} mass samples succeeded at tau = {}",
            samples.len(),
            a_grid.len(),
            base.tau
        )));
    }
    let (i, best) = samples
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.mass_over_2pi.total_cmp(&y.1.mass_over_2pi))
        .map(|(i, s)| (i, *s))
        .unwrap();
    let (mut argmax_a, mut max_mass) = (best.a, best.mass_over_2pi);
    if i > 0 && i + 1 < samples.len() {
        // interior peak: refine in log a on the bracketing triple
        let (lo, hi) = (samples[i - 1].a.ln(), samples[i + 1].a.ln());
        let (x, m) = search::golden_max(
            |x| Ok(mass_at(base, x.exp())?.mass_over_2pi),
            lo,
            hi,
            1e-6,
            200,
        )?;
        if m > max_mass {
            argmax_a = x.exp();
            max_mass = m;
        }
    }
    Ok(MassCurve {
        tau: base.tau,
        samples,
        failures,
        argmax_a,
        max_mass_over_2pi: max_mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MStar {
    pub tau: f64,
    /// `sup_a M(a,τ)/2π`, never below the large-`a` limit 4.
    pub mass_over_2pi: f64,
    /// Maximizer when the supremum is reached inside the window.
    pub argmax_a: Option<f64>,
    /// Whether a finite `a` exceeds the large-`a` limit.
    pub attained: bool,
    /// Largest mass actually computed in the window.
    pub window_max: f64,
    pub window_argmax: f64,
}

/// Search window and sample count for [`m_star`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MStarWindow {
    pub a_lo: f64,
    pub a_hi: f64,
    pub samples: usize,
}

impl Default for MStarWindow {
    fn default() -> Self {
        Self {
            a_lo: 1e-3,
            a_hi: 1e4,
            samples: 200,
        }
    }
}

pub fn m_star(tau: f64) -> Result<MStar> {
    m_star_with(&CumulatedParams::new(1.0, tau), &MStarWindow::default())
}

pub fn m_star_with(base: &CumulatedParams, window: &MStarWindow) -> Result<MStar> {
    let curve = mass_curve_with(base, &log_grid(window.a_lo, window.a_hi, window.samples)?)?;
    if !curve.max_mass_over_2pi.is_finite() {
        return Err(Error::Search(format!(
            "non-finite mass curve at tau = {}",
            base.tau
        )));
    }
    let attained = curve.max_mass_over_2pi > CRITICAL;
    Ok(MStar {
        tau: base.tau,
        mass_over_2pi: curve.max_mass_over_2pi.max(CRITICAL),
        argmax_a: attained.then_some(curve.argmax_a),
        attained,
        window_max: curve.max_mass_over_2pi,
        window_argmax: curve.argmax_a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauStar {
    pub lo: f64,
    pub hi: f64,
    pub threshold: f64,
    pub evaluations: usize,
}

/// Bisection on `τ` for the onset of `max_a M(a,τ)/2π > 4 + threshold`.
pub fn tau_star(lo: f64, hi: f64, width: f64, threshold: f64) -> Result<TauStar> {
    tau_star_with(
        &CumulatedParams::new(1.0, 1.0),
        &MStarWindow::default(),
        lo,
        hi,
        width,
        threshold,
    )
}

pub fn tau_star_with(
    base: &CumulatedParams,
    window: &MStarWindow,
    mut lo: f64,
    mut hi: f64,
    width: f64,
    threshold: f64,
) -> Result<TauStar> {
    if !(lo > 0.0 && hi > lo && width > 0.0 && threshold >= 0.0) {
        return Err(Error::invalid(format!(
            "need 0 < lo < hi, width > 0, threshold >= 0; got [{lo}, {hi}], {width}, {threshold}"
        )));
    }
    let mut evaluations = 0;
    let mut supercritical = |tau: f64| -> Result<bool> {
        evaluations += 1;
        let p = CumulatedParams { tau, ..*base };
        Ok(m_star_with(&p, window)?.window_max > CRITICAL + threshold)
    };
    if supercritical(lo)? {
        return Err(Error::Search(format!(
            "already supercritical at the lower end tau = {lo}"
        )));
    }
    if !supercritical(hi)? {
        return Err(Error::Search(format!(
            "not supercritical at the upper end tau = {hi}"
        )));
    }
    while hi - lo >= width {
        let mid = 0.5 * (lo + hi);
        if supercritical(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(TauStar {
        lo,
        hi,
        threshold,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub a: f64,
    /// `M/2π` from a fresh solve at `a`.
    pub mass_over_2pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityResult {
    pub tau: f64,
    pub target_mass_over_2pi: f64,
    pub roots: Vec<Root>,
    pub a_lo: f64,
    pub a_hi: f64,
    pub grid_len: usize,
    pub failures: Vec<SampleFailure>,
}

pub fn multiplicity(tau: f64, target: f64) -> Result<MultiplicityResult> {
    multiplicity_with(&CumulatedParams::new(1.0, tau), target, 400)
}

/// All roots of `M(a,τ)/2π = target` visible on a log grid of `n` points.
///
/// Roots closer together than the grid spacing can be missed.
pub fn multiplicity_with(
    base: &CumulatedParams,
    target: f64,
    n: usize,
) -> Result<MultiplicityResult> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::invalid(format!(
            "target must be positive, got {target}"
        )));
    }
    // M/2π ≤ 4a, so roots sit at a ≥ target/4
    let a_lo = (1e-3f64).min(target / 8.0);
    let a_hi = 1e4;
    let curve = mass_curve_with(base, &log_grid(a_lo, a_hi, n)?)?;
    if curve.max_mass_over_2pi <= target {
        return Err(Error::Search(format!(
            "target {target} is not below the maximal mass {} at tau = {}",
            curve.max_mass_over_2pi, base.tau
        )));
    }
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for w in curve.samples.windows(2) {
        let (f0, f1) = (w[0].mass_over_2pi - target, w[1].mass_over_2pi - target);
        if f0 == 0.0 {
            brackets.push((w[0].a, w[0].a));
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            brackets.push((w[0].a, w[1].a));
        }
    }
    if let Some(last) = curve.samples.last() {
        if last.mass_over_2pi == target {
            brackets.push((last.a, last.a));
        }
    }
    // a peak between samples can hide two crossings
    if brackets.is_empty() {
        let x = curve.argmax_a;
        if let Some(i) = curve.samples.iter().position(|s| s.a > x) {
            if i > 0 {
                brackets.push((curve.samples[i - 1].a, x));
                brackets.push((x, curve.samples[i].a));
            }
        }
    }
    let roots: Vec<Result<Root>> = brackets
        .par_iter()
        .map(|&(lo, hi)| {
            let a = if lo == hi {
                lo
            } else {
                let (l, h) = search::bisect(
                    |x| Ok(mass_at(base, x.exp())?.mass_over_2pi - target),
                    lo.ln(),
                    hi.ln(),
                    1e-13,
                    200,
                )?;
                (0.5 * (l + h)).exp()
            };
            let m = mass_at(base, a)?.mass_over_2pi;
            if (m - target).abs() >= ROOT_TOL {
                return Err(Error::Search(format!(
                    "root near a = {a} re-solves to {m}, off target {target} by more than {ROOT_TOL}"
                )));
            }
            Ok(Root { a, mass_over_2pi: m })
        })
        .collect();
    Ok(MultiplicityResult {
        tau: base.tau,
        target_mass_over_2pi: target,
        roots: roots.into_iter().collect::<Result<_>>()?,
        a_lo,
        a_hi,
        grid_len: n,
        failures: curve.failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracRow {
    pub a: f64,
    pub mass_over_2pi: f64,
    /// `4 − M/2π`.
    pub gap: f64,
    pub v0: f64,
    /// `log(2a I(τ) + 1)`, which `v0` must exceed.
    pub v0_floor: f64,
    /// `(M/2π)² − 4M/2π − ∫φ'(2φ − 2S − y)`.
    pub identity_residual: f64,
    /// Share of the mass inside `|ξ| ≤ 1`.
    pub fraction_within_unit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracReport {
    pub tau: f64,
    pub rows: Vec<DiracRow>,
    pub gap_shrinking: bool,
    pub v0_increasing: bool,
    pub concentrating: bool,
    /// `max |R(a)| / max(1, (M/2π)²)` over the rows.
    pub worst_identity: f64,
}

pub fn dirac_diagnostic(tau: f64, a_sequence: &[f64]) -> Result<DiracReport> {
    dirac_diagnostic_with(&CumulatedParams::new(1.0, tau), a_sequence)
}

pub fn dirac_diagnostic_with(base: &CumulatedParams, a_sequence: &[f64]) -> Result<DiracReport> {
    if a_sequence.is_empty()
        || a_sequence.windows(2).any(|w| !(w[0] < w[1]))
        || a_sequence[0] <= 0.0
    {
        return Err(Error::invalid(
            "a sequence must be positive, non-empty and increasing",
        ));
    }
    let i_tau = bounds::log_ratio(base.tau)?;
    let rows: Vec<Result<DiracRow>> = a_sequence
        .par_iter()
        .map(|&a| {
            let prof = cumulated::solve(&CumulatedParams { a, ..*base })?;
            let d = cumulated::derive(&prof)?;
            Ok(DiracRow {
                a,
                mass_over_2pi: d.mass_over_2pi,
                gap: CRITICAL - d.mass_over_2pi,
                v0: d.v0,
                v0_floor: (2.0 * a * i_tau).ln_1p(),
                identity_residual: cumulated::mass_identity_residual(&prof, &d)?,
                fraction_within_unit: cumulated::mass_fraction_within(&prof, &d, 1.0)?,
            })
        })
        .collect();
    let rows: Vec<DiracRow> = rows.into_iter().collect::<Result<_>>()?;
    let pairs = || rows.windows(2);
    Ok(DiracReport {
        tau: base.tau,
        gap_shrinking: pairs().all(|w| w[1].gap.abs() < w[0].gap.abs()),
        v0_increasing: pairs().all(|w| w[1].v0 > w[0].v0),
        concentrating: pairs().all(|w| w[1].fraction_within_unit > w[0].fraction_within_unit),
        worst_identity: rows
            .iter()
            .map(|r| r.identity_residual.abs() / r.mass_over_2pi.powi(2).max(1.0))
            .fold(0.0, f64::max),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SRow {
    pub s: f64,
    pub sigma: f64,
    pub log_sigma: f64,
    pub v0: f64,
    pub log_v0: f64,
    pub mass: f64,
    pub log1p_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SDiagram {
    pub tau: f64,
    pub rows: Vec<SRow>,
    pub failures: Vec<SampleFailure>,
}

impl SDiagram {
    pub fn max_sigma(&self) -> Option<&SRow> {
        self.rows.iter().max_by(|x, y| x.sigma.total_cmp(&y.sigma))
    }
}

/// Default `s` grid, `[−10, 20]` in steps of `0.25`.
pub fn default_s_grid() -> Vec<f64> {
    (0..=120).map(|i| -10.0 + 0.25 * i as f64).collect()
}

pub fn s_diagram(tau: f64, s_grid: &[f64]) -> Result<SDiagram> {
    s_diagram_with(&WParams::new(0.0, tau), s_grid)
}

pub fn s_diagram_with(base: &WParams, s_grid: &[f64]) -> Result<SDiagram> {
    WParams { s: 0.0, ..*base }.validate()?;
    let results: Vec<(f64, Result<wmodel::WDerived>)> = s_grid
        .par_iter()
        .map(|&s| {
            (
                s,
                wmodel::solve_w(&WParams { s, ..*base }).and_then(|p| wmodel::derive_w(&p)),
            )
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (s, r) in results {
        match r {
            Ok(d) => rows.push(SRow {
                s,
                sigma: d.sigma,
                log_sigma: d.sigma.ln(),
                v0: d.v0,
                log_v0: d.v0.ln(),
                mass: d.mass,
                log1p_mass: d.mass.ln_1p(),
            }),
            Err(e) => failures.push(SampleFailure {
                at: s,
                error: e.to_string(),
            }),
        }
    }
    Ok(SDiagram {
        tau: base.tau,
        rows,
        failures,
    })
}
