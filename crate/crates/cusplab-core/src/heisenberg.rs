//! Heisenberg group arithmetic in floating point.
//!
//! The group lives on `C^{n-1} x R` with the twisted multiplication
//! `(z, v) * (z', v') = (z + z', v + v' + 2 Im(z . conj z'))`. This module
//! provides:
//! - [`HeisenbergPoint`]: a point with horizontal part `z` and vertical
//!   part `v`, for `n >= 2`
//! - [`HeisenbergPoint::compose`] / [`HeisenbergPoint::inverse`]: the group law
//! - [`HeisenbergPoint::cygan_gauge`]: the homogeneous gauge
//!   `(|z|^4 + v^2)^(1/4)` and the right-invariant distance it induces
//! - [`HeisenbergPoint::sup_dist`]: the coordinate sup-norm distance used as
//!   the right-invariant reference metric (boxes in it are metric balls)
//! - [`HeisenbergPoint::dilate`]: the anisotropic dilation
//!   `(z, v) -> (e^s z, e^{2s} v)` under which the gauge is homogeneous
//!
//! Exact-rational group arithmetic lives with [`crate::rational::RationalPoint`];
//! this module is the floating-point side used by gauges, distances and fits.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// A point of the `(2n-1)`-dimensional Heisenberg group, `n >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergPoint {
    zeta: Vec<Complex64>,
    v: f64,
}

/// Value of the Cygan gauge; nonnegative, zero exactly at the identity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Gauge(f64);

impl Gauge {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl HeisenbergPoint {
    /// Builds a point from its horizontal and vertical parts.
    ///
    /// Rejects `n = 1` (no horizontal part) and non-finite coordinates.
    pub fn new(zeta: Vec<Complex64>, v: f64) -> Result<Self> {
        if zeta.is_empty() {
            return Err(Error::invalid(
                "Heisenberg point needs at least one horizontal coordinate (n >= 2)",
            ));
        }
        if !v.is_finite() || zeta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("Heisenberg point coordinates must be finite"));
        }
        Ok(HeisenbergPoint { zeta, v })
    }

    /// The identity element of the group with parameter `n`.
    pub fn identity(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("group parameter n must be >= 2"));
        }
        Ok(HeisenbergPoint {
            zeta: vec![Complex64::new(0.0, 0.0); n - 1],
            v: 0.0,
        })
    }

    /// Builds a point from flat coordinates `[re_1, im_1, .., re_{n-1}, im_{n-1}, v]`.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 || coords.len() % 2 == 0 {
            return Err(Error::invalid(
                "flat coordinates must have odd length 2n-1 with n >= 2",
            ));
        }
        let zeta = coords[..coords.len() - 1]
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        Self::new(zeta, coords[coords.len() - 1])
    }

    /// Flat coordinates `[re_1, im_1, .., v]`, the layout shared with the
    /// exact-rational side.
    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.zeta.len() + 1);
        for z in &self.zeta {
            out.push(z.re);
            out.push(z.im);
        }
        out.push(self.v);
        out
    }

    /// Group parameter: the group has dimension `2n - 1`.
    pub fn n(&self) -> usize {
        self.zeta.len() + 1
    }

    pub fn zeta(&self) -> &[Complex64] {
        &self.zeta
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    fn check_same_n(&self, other: &Self) -> Result<()> {
        if self.zeta.len() != other.zeta.len() {
            return Err(Error::DimensionMismatch {
                left: self.zeta.len(),
                right: other.zeta.len(),
            });
        }
        Ok(())
    }

    /// Group multiplication `(z, v)(z', v') = (z + z', v + v' + 2 Im(z . conj z'))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        let zeta: Vec<Complex64> = self
            .zeta
            .iter()
            .zip(&other.zeta)
            .map(|(a, b)| a + b)
            .collect();
        // Im(a * conj(b)) = im(a) re(b) - re(a) im(b)
        let twist: f64 = self
            .zeta
            .iter()
            .zip(&other.zeta)
            .map(|(a, b)| a.im * b.re - a.re * b.im)
            .sum();
        Ok(HeisenbergPoint {
            zeta,
            v: self.v + other.v + 2.0 * twist,
        })
    }

    /// Group inverse; negation of all coordinates.
    pub fn inverse(&self) -> Self {
        HeisenbergPoint {
            zeta: self.zeta.iter().map(|z| -z).collect(),
            v: -self.v,
        }
    }

    /// The Cygan gauge `(|z|^4 + v^2)^(1/4)`.
    pub fn cygan_gauge(&self) -> Gauge {
        let norm_sq: f64 = self.zeta.iter().map(|z| z.norm_sqr()).sum();
        Gauge((norm_sq * norm_sq + self.v * self.v).sqrt().sqrt())
    }

    /// Cygan distance `|p q^{-1}|`; invariant under common right translation.
    pub fn cygan_dist(&self, other: &Self) -> Result<f64> {
        Ok(self.compose(&other.inverse())?.cygan_gauge().value())
    }

    /// Anisotropic dilation `(z, v) -> (e^s z, e^{2s} v)`.
    ///
    /// The gauge is homogeneous of degree one: `|dilate(p, s)| = e^s |p|`.
    pub fn dilate(&self, s: f64) -> Self {
        let a = s.exp();
        HeisenbergPoint {
            zeta: self.zeta.iter().map(|z| z * a).collect(),
            v: self.v * a * a,
        }
    }

    /// Sup-norm of the flat coordinates; the gauge of the reference metric.
    pub fn sup_norm(&self) -> f64 {
        let horiz = self
            .zeta
            .iter()
            .map(|z| z.re.abs().max(z.im.abs()))
            .fold(0.0, f64::max);
        horiz.max(self.v.abs())
    }

    /// Right-invariant reference distance: sup-norm of the coordinates of
    /// `p q^{-1}`. Boxes with sides along the coordinate axes are balls of
    /// this metric, which is what the anisotropic cover geometry relies on.
    pub fn sup_dist(&self, other: &Self) -> Result<f64> {
        Ok(self.compose(&other.inverse())?.sup_norm())
    }
}
