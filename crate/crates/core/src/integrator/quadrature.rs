//! Quadrature of sampled functions on non-uniform grids.

use crate::error::{Error, Result};

fn check_nodes(nodes: &[f64], values: &[f64]) -> Result<()> {
    if nodes.len() != values.len() {
        return Err(Error::invalid("nodes and values differ in length"));
    }
    if nodes.len() < 2 {
        return Err(Error::invalid("quadrature needs at least two samples"));
    }
    if nodes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(
            "quadrature nodes must be strictly increasing",
        ));
    }
    Ok(())
}

/// Composite trapezoid rule.
pub fn trapezoid(nodes: &[f64], values: &[f64]) -> Result<f64> {
    check_nodes(nodes, values)?;
    Ok(nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
        .sum())
}

/// Integral of the sampled function over `[nodes[0], nodes[last]]`.
///
/// Pairs of intervals are integrated with the three-point rule exact for
/// quadratics on uneven spacing; a leftover final interval falls back to the
/// quadratic through the last three nodes. Two samples reduce to a trapezoid.
pub fn quadrature(nodes: &[f64], values: &[f64]) -> Result<f64> {
    check_nodes(nodes, values)?;
    let n = nodes.len();
    if n == 2 {
        return trapezoid(nodes, values);
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        total += simpson_pair(&nodes[i..i + 3], &values[i..i + 3]);
        i += 2;
    }
    if i + 1 < n {
        // one interval left: integrate the last parabola over its final leg
        total += last_leg(&nodes[n - 3..], &values[n - 3..]);
    }
    Ok(total)
}

fn simpson_pair(x: &[f64], f: &[f64]) -> f64 {
    let h0 = x[1] - x[0];
    let h1 = x[2] - x[1];
    let s = h0 + h1;
    s / 6.0 * ((2.0 - h1 / h0) * f[0] + s * s / (h0 * h1) * f[1] + (2.0 - h0 / h1) * f[2])
}

fn last_leg(x: &[f64], f: &[f64]) -> f64 {
    // integral over [x1, x2] of the quadratic through (x0,f0), (x1,f1), (x2,f2)
    let h0 = x[1] - x[0];
    let h1 = x[2] - x[1];
    let w0 = -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    let w1 = h1 * (h1 + 3.0 * h0) / (6.0 * h0);
    let w2 = h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
    w0 * f[0] + w1 * f[1] + w2 * f[2]
}

/// Integral over one interval of the cubic Hermite interpolant.
#[inline]
pub fn hermite_interval(h: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> f64 {
    0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1)
}

/// Integral of a function known with its derivative at every node,
/// using the cubic Hermite interpolant on each interval.
pub fn hermite_quadrature(nodes: &[f64], values: &[f64], slopes: &[f64]) -> Result<f64> {
    Ok(*cumulative_hermite(nodes, values, slopes)?.last().unwrap())
}

/// Running integral from `nodes[0]` to every node.
pub fn cumulative_hermite(nodes: &[f64], values: &[f64], slopes: &[f64]) -> Result<Vec<f64>> {
    check_nodes(nodes, values)?;
    if slopes.len() != nodes.len() {
        return Err(Error::invalid("nodes and slopes differ in length"));
    }
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..nodes.len() {
        acc += hermite_interval(
            nodes[i] - nodes[i - 1],
            values[i - 1],
            values[i],
            slopes[i - 1],
            slopes[i],
        );
        out.push(acc);
    }
    Ok(out)
}

/// Integral over one interval of the quintic Hermite interpolant built
/// from values, first and second derivatives at both ends.
#[inline]
pub fn hermite5_interval(h: f64, f: [f64; 2], d: [f64; 2], dd: [f64; 2]) -> f64 {
    0.5 * h * (f[0] + f[1]) + h * h / 10.0 * (d[0] - d[1]) + h * h * h / 120.0 * (dd[0] + dd[1])
}

/// Running integral from `nodes[0]` using [`hermite5_interval`] on each interval.
pub fn cumulative_hermite5(
    nodes: &[f64],
    values: &[f64],
    slopes: &[f64],
    curvatures: &[f64],
) -> Result<Vec<f64>> {
    check_nodes(nodes, values)?;
    if slopes.len() != nodes.len() || curvatures.len() != nodes.len() {
        return Err(Error::invalid(
            "nodes and derivative columns differ in length",
        ));
    }
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..nodes.len() {
        acc += hermite5_interval(
            nodes[i] - nodes[i - 1],
            [values[i - 1], values[i]],
            [slopes[i - 1], slopes[i]],
            [curvatures[i - 1], curvatures[i]],
        );
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_on_any_grid() {
        let x = [0.0, 0.1, 0.15, 0.6, 1.0];
        let f = [1.0; 5];
        assert!((quadrature(&x, &f).unwrap() - 1.0).abs() < 1e-15);
        assert!((trapezoid(&x, &f).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_is_exact() {
        let x: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let f = x.clone();
        assert!((trapezoid(&x, &f).unwrap() - 2.0).abs() < 1e-14);
        assert!((quadrature(&x, &f).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn decaying_exponential_on_fine_grid() {
        let x: Vec<f64> = (0..=30_000).map(|i| i as f64 * 1e-3).collect();
        let f: Vec<f64> = x.iter().map(|z| (-z / 4.0).exp()).collect();
        let exact = 4.0 * (1.0 - (-7.5f64).exp());
        assert!((quadrature(&x, &f).unwrap() - exact).abs() < 1e-6);
        assert!((trapezoid(&x, &f).unwrap() - exact).abs() < 1e-6);
    }

    #[test]
    fn hermite_is_exact_for_cubics() {
        let x = [0.0, 0.3, 1.1, 2.0];
        let f: Vec<f64> = x.iter().map(|t| t * t * t - t).collect();
        let d: Vec<f64> = x.iter().map(|t| 3.0 * t * t - 1.0).collect();
        let exact = 2.0f64.powi(4) / 4.0 - 2.0;
        assert!((hermite_quadrature(&x, &f, &d).unwrap() - exact).abs() < 1e-13);
    }

    #[test]
    fn quintic_hermite_is_exact_for_quintics() {
        let x = [0.0f64, 0.4, 1.3, 2.0];
        let f: Vec<f64> = x.iter().map(|t| t.powi(5) - 2.0 * t * t).collect();
        let d: Vec<f64> = x.iter().map(|t| 5.0 * t.powi(4) - 4.0 * t).collect();
        let dd: Vec<f64> = x.iter().map(|t| 20.0 * t.powi(3) - 4.0).collect();
        let exact = 2.0f64.powi(6) / 6.0 - 2.0 * 8.0 / 3.0;
        let c = cumulative_hermite5(&x, &f, &d, &dd).unwrap();
        assert!((c[3] - exact).abs() < 1e-12);
        assert!(cumulative_hermite5(&x, &f, &d, &dd[..2]).is_err());
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(quadrature(&[1.0], &[1.0]).is_err());
        assert!(quadrature(&[0.0, 0.0, 1.0], &[1.0, 1.0, 1.0]).is_err());
        assert!(trapezoid(&[0.0, 1.0], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn quadratics_exact_on_random_grids(
            gaps in prop::collection::vec(0.01f64..1.0, 2..30),
            c in -3.0f64..3.0, b in -3.0f64..3.0, a in -3.0f64..3.0,
        ) {
            let mut x = vec![0.0];
            for g in &gaps { x.push(x.last().unwrap() + g); }
            let f: Vec<f64> = x.iter().map(|t| a * t * t + b * t + c).collect();
            let l = *x.last().unwrap();
            let exact = a * l * l * l / 3.0 + b * l * l / 2.0 + c * l;
            let q = quadrature(&x, &f).unwrap();
            prop_assert!((q - exact).abs() < 1e-9 * (1.0 + exact.abs()));
        }
    }
}
