//! Radial profiles of the form `P(r) * exp(-a r^k)` with `k` in {1, 2}.
//!
//! All derivative operations stay inside this family, so Laplacians and
//! repeated operator applications are exact polynomial manipulations.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    /// Polynomial coefficients in `r`, lowest degree first.
    pub(crate) poly: Vec<f64>,
    /// Decay rate `a`.
    pub(crate) rate: f64,
    /// Exponent `k` of `r` inside the exponential.
    pub(crate) power: u32,
}

impl RadialProfile {
    pub fn new(poly: Vec<f64>, rate: f64, power: u32) -> Self {
        assert!(power == 1 || power == 2, "exponent power must be 1 or 2");
        let mut p = RadialProfile { poly, rate, power };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.poly.len() > 1 && self.poly.last() == Some(&0.0) {
            self.poly.pop();
        }
        if self.poly.is_empty() {
            self.poly.push(0.0);
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let p = self.poly.iter().rev().fold(0.0, |acc, &c| acc * r + c);
        p * (-self.rate * r.powi(self.power as i32)).exp()
    }

    /// `d/dr`.
    pub fn derivative(&self) -> RadialProfile {
        let n = self.poly.len();
        let k = self.power as usize;
        let mut out = vec![0.0; n + k - 1];
        for (i, &c) in self.poly.iter().enumerate().skip(1) {
            out[i - 1] += i as f64 * c;
        }
        let factor = self.rate * self.power as f64;
        for (i, &c) in self.poly.iter().enumerate() {
            out[i + k - 1] -= factor * c;
        }
        RadialProfile::new(out, self.rate, self.power)
    }

    /// Divides by `r`. Fails when the constant term is not negligible, i.e.
    /// when the result would be singular at the origin.
    pub fn over_r(&self) -> Result<RadialProfile> {
        let scale = self.poly.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if self.poly[0].abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::config(
                "radial profile is not smooth enough at the origin for this operator",
            ));
        }
        if self.poly.len() == 1 {
            return Ok(RadialProfile::new(vec![0.0], self.rate, self.power));
        }
        Ok(RadialProfile::new(
            self.poly[1..].to_vec(),
            self.rate,
            self.power,
        ))
    }

    /// `(1/r) d/dr`; the gradient of `f(|x - c|)` is `(x - c) * (D f)(r)`.
    pub fn radial_d(&self) -> Result<RadialProfile> {
        self.derivative().over_r()
    }

    /// 2D Laplacian of the radial function: `2 D f + r^2 D^2 f`.
    pub fn laplacian(&self) -> Result<RadialProfile> {
        let d1 = self.radial_d()?;
        let d2 = d1.radial_d()?;
        let mut out = vec![0.0; d1.poly.len().max(d2.poly.len() + 2)];
        for (i, &c) in d1.poly.iter().enumerate() {
            out[i] += 2.0 * c;
        }
        for (i, &c) in d2.poly.iter().enumerate() {
            out[i + 2] += c;
        }
        Ok(RadialProfile::new(out, self.rate, self.power))
    }

    /// `alpha * self + beta * other`; both must share the exponential.
    pub fn combine(&self, alpha: f64, other: &RadialProfile, beta: f64) -> RadialProfile {
        debug_assert!(self.rate == other.rate && self.power == other.power);
        let n = self.poly.len().max(other.poly.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.poly.iter().enumerate() {
            out[i] += alpha * c;
        }
        for (i, &c) in other.poly.iter().enumerate() {
            out[i] += beta * c;
        }
        RadialProfile::new(out, self.rate, self.power)
    }

    pub fn scaled(&self, s: f64) -> RadialProfile {
        RadialProfile::new(
            self.poly.iter().map(|c| c * s).collect(),
            self.rate,
            self.power,
        )
    }

    /// Rewrites `f(rho)` as a function of `r` with `rho = shape * r`.
    pub fn with_shape(&self, shape: f64) -> RadialProfile {
        let mut s = 1.0;
        let poly = self
            .poly
            .iter()
            .map(|c| {
                let v = c * s;
                s *= shape;
                v
            })
            .collect();
        RadialProfile::new(
            poly,
            self.rate * shape.powi(self.power as i32),
            self.power,
        )
    }
}
