//! Piecewise cubic Hermite interpolation with supplied slopes.
//!
//! Slopes are limited with the Fritsch–Carlson conditions so that monotone
//! data give a monotone interpolant.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    f: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, f: Vec<f64>, mut d: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != f.len() || x.len() != d.len() {
            return Err(Error::invalid(
                "interpolation needs >= 2 nodes with matching values and slopes",
            ));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid(
                "interpolation nodes must be strictly increasing",
            ));
        }
        for i in 0..x.len() - 1 {
            let secant = (f[i + 1] - f[i]) / (x[i + 1] - x[i]);
            if secant == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            // slopes against the secant direction are flattened
            if d[i] * secant < 0.0 {
                d[i] = 0.0;
            }
            if d[i + 1] * secant < 0.0 {
                d[i + 1] = 0.0;
            }
            let alpha = d[i] / secant;
            let beta = d[i + 1] / secant;
            let r = alpha * alpha + beta * beta;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                d[i] = t * alpha * secant;
                d[i + 1] = t * beta * secant;
            }
        }
        Ok(Self { x, f, d })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    fn locate(&self, t: f64) -> usize {
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { value: t, lo, hi });
        }
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Ok(h00 * self.f[i] + h10 * h * self.d[i] + h01 * self.f[i + 1] + h11 * h * self.d[i + 1])
    }

    /// Integral of the interpolant from `t` to the right end of the domain.
    pub fn integral_to_end(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { value: t, lo, hi });
        }
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        // partial first interval, integrating the cubic in the local variable
        let s = (t - self.x[i]) / h;
        let full = |s: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            let s4 = s3 * s;
            let h00 = 0.5 * s4 - s3 + s;
            let h10 = 0.25 * s4 - 2.0 / 3.0 * s3 + 0.5 * s2;
            let h01 = -0.5 * s4 + s3;
            let h11 = 0.25 * s4 - s3 / 3.0;
            h * (h00 * self.f[i]
                + h10 * h * self.d[i]
                + h01 * self.f[i + 1]
                + h11 * h * self.d[i + 1])
        };
        let mut total = full(1.0) - full(s);
        for j in i + 1..self.x.len() - 1 {
            let hj = self.x[j + 1] - self.x[j];
            total += super::quadrature::hermite_interval(
                hj,
                self.f[j],
                self.f[j + 1],
                self.d[j],
                self.d[j + 1],
            );
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        let x = vec![0.0, 0.5, 1.0, 2.0];
        let f: Vec<f64> = x.iter().map(|t| 1.0 + t + t * t * t).collect();
        let d: Vec<f64> = x.iter().map(|t| 1.0 + 3.0 * t * t).collect();
        let c = MonotoneCubic::new(x, f, d).unwrap();
        for t in [0.0, 0.1, 0.77, 1.5, 2.0] {
            assert!((c.eval(t).unwrap() - (1.0 + t + t * t * t)).abs() < 1e-12);
        }
        let exact = |t: f64| 2.0 + 2.0 + 4.0 - (t + t * t / 2.0 + t.powi(4) / 4.0);
        assert!((c.integral_to_end(0.3).unwrap() - exact(0.3)).abs() < 1e-12);
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let x = vec![0.0, 1.0, 1.1, 3.0];
        let f = vec![0.0, 1.0, 1.0, 5.0];
        let d = vec![10.0, 10.0, 10.0, 10.0];
        let c = MonotoneCubic::new(x, f, d).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=300 {
            let v = c.eval(k as f64 * 0.01).unwrap();
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn out_of_range_is_an_error() {
        let c = MonotoneCubic::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(c.eval(1.5).is_err());
        assert!(c.eval(-0.1).is_err());
    }
}
