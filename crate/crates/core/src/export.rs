//! CSV and JSON artifacts. Every float is rounded to 12 significant digits
//! so that output is stable across platforms and runs.

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{MassCurve, SDiagram};
use crate::cumulated::{CumulatedParams, CumulatedProfile, DerivedQuantities};
use crate::error::{Error, Result};
use crate::wmodel::{WDerived, WProfile};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to [`SIGNIFICANT_DIGITS`].
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Shortest text that reads back as `round_sig(x)`.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 || !r.is_finite() || (1e-4..1e12).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Rounds every number inside `v` in place.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes `x` and rounds its numbers.
pub fn to_rounded_value<T: Serialize + ?Sized>(x: &T) -> Result<Value> {
    let mut v = serde_json::to_value(x).map_err(|e| Error::Export(e.to_string()))?;
    round_json(&mut v);
    Ok(v)
}

/// Pretty JSON text with a trailing newline.
pub fn to_json_text(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Export(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Export(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt_sig(*x)))
            .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Export(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
}

/// Window of the cumulated profile, `y,phi,dphi,S`.
pub fn profile_csv(profile: &CumulatedProfile) -> Result<String> {
    csv_text(
        &["y", "phi", "dphi", "S"],
        profile
            .window()
            .iter()
            .map(|n| vec![n.y, n.phi, n.dphi, n.s]),
    )
}

/// Window of the w profile, `r,w,dw,M`.
pub fn w_profile_csv(profile: &WProfile) -> Result<String> {
    csv_text(
        &["r", "w", "dw", "M"],
        profile
            .window()
            .iter()
            .map(|n| vec![n.r, n.w, n.dw, n.mass]),
    )
}

pub fn mass_curve_csv(curve: &MassCurve) -> Result<String> {
    csv_text(
        &["a", "mass_over_2pi", "sigma", "v0"],
        curve
            .samples
            .iter()
            .map(|s| vec![s.a, s.mass_over_2pi, s.sigma, s.v0]),
    )
}

pub fn s_diagram_csv(d: &SDiagram) -> Result<String> {
    csv_text(
        &["s", "sigma", "log_sigma", "v0", "log_v0", "M", "log1p_M"],
        d.rows.iter().map(|r| {
            vec![
                r.s,
                r.sigma,
                r.log_sigma,
                r.v0,
                r.log_v0,
                r.mass,
                r.log1p_mass,
            ]
        }),
    )
}

/// Derived quantities with the parameters that produced them.
pub fn derived_json(params: &CumulatedParams, d: &DerivedQuantities) -> Result<Value> {
    let mut v = to_rounded_value(d)?;
    v["params"] = to_rounded_value(params)?;
    Ok(v)
}

pub fn w_derived_json(d: &WDerived) -> Result<Value> {
    to_rounded_value(d)
}

/// `{config, result, diagnostics}` envelope used by every JSON artifact.
pub fn envelope(config: Value, result: Value, diagnostics: Value) -> Value {
    json!({ "config": config, "result": result, "diagnostics": diagnostics })
}
