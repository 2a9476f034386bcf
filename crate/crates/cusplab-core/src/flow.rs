//! The diagonal flow on unimodular planar lattices.
//!
//! A point of the modular surface side of the dictionary is a unimodular
//! lattice `L = B Z^2`; the flow acts by `a_t = diag(e^t, e^{-t})` and the
//! excursion depth of the orbit is read off the shortest-vector function
//! `d(L) = min_{v in L \ {0}} |v|`. This module provides:
//! - [`PlanarLattice`]: a 2x2 unimodular basis with the flow action
//! - [`PlanarLattice::shortest_vector`]: Gauss-Lagrange reduction with the
//!   unimodular transform tracked, so callers can certify the minimum
//! - [`excursion_profile`]: `d(a_t u_x Z^2)` sampled on a uniform grid
//! - [`cf_expansion`] / [`convergents`]: exact continued fractions, plus the
//!   predicted dip times `t = (1/2) ln(q / |q x - p|)` of the profile
//! - [`excursion_exponent`]: a finite-horizon proxy for the excursion rate
//! - [`jb_classical_dimension`]: the classical line formulas `2/(1+gamma)`
//!   and `2 + 2/(1+gamma)`, exact over the rationals

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

const DET_TOLERANCE: f64 = 1e-9;

/// A unimodular lattice in the plane, given by basis columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarLattice {
    /// `columns[j]` is the j-th basis vector.
    columns: [[f64; 2]; 2],
}

/// A certified shortest vector: the vector, its Euclidean norm, and its
/// integer coefficients in the basis the lattice was constructed with.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShortestVector {
    pub vector: [f64; 2],
    pub norm: f64,
    pub coefficients: [i64; 2],
}

impl PlanarLattice {
    pub fn from_columns(b1: [f64; 2], b2: [f64; 2]) -> Result<Self> {
        let det = b1[0] * b2[1] - b1[1] * b2[0];
        if !det.is_finite() || (det.abs() - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::invalid(format!(
                "basis is not unimodular: |det| = {}",
                det.abs()
            )));
        }
        Ok(PlanarLattice { columns: [b1, b2] })
    }

    /// The standard lattice `Z^2`.
    pub fn standard() -> Self {
        PlanarLattice {
            columns: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// The horocycle point `u_x Z^2` with `u_x` upper triangular unipotent.
    pub fn horocycle(x: f64) -> Self {
        PlanarLattice {
            columns: [[1.0, 0.0], [x, 1.0]],
        }
    }

    /// Applies the diagonal flow `a_t = diag(e^t, e^{-t})`.
    pub fn flow(&self, t: f64) -> Self {
        let (a, b) = (t.exp(), (-t).exp());
        PlanarLattice {
            columns: [
                [self.columns[0][0] * a, self.columns[0][1] * b],
                [self.columns[1][0] * a, self.columns[1][1] * b],
            ],
        }
    }

    pub fn columns(&self) -> &[[f64; 2]; 2] {
        &self.columns
    }

    /// A shortest nonzero vector, computed by Gauss-Lagrange reduction.
    ///
    /// The returned coefficients express the vector in the original basis;
    /// a brute-force scan over a coefficient box containing them certifies
    /// the minimum independently.
    pub fn shortest_vector(&self) -> ShortestVector {
        let mut b1 = self.columns[0];
        let mut b2 = self.columns[1];
        // unimodular transform: columns of (c1, c2) track b1, b2 in the
        // original basis
        let mut c1: [i64; 2] = [1, 0];
        let mut c2: [i64; 2] = [0, 1];

        let norm_sq = |v: &[f64; 2]| v[0] * v[0] + v[1] * v[1];
        let dot = |u: &[f64; 2], v: &[f64; 2]| u[0] * v[0] + u[1] * v[1];

        for _ in 0..10_000 {
            if norm_sq(&b2) < norm_sq(&b1) {
                std::mem::swap(&mut b1, &mut b2);
                std::mem::swap(&mut c1, &mut c2);
            }
            let mu = (dot(&b1, &b2) / norm_sq(&b1)).round();
            if mu == 0.0 {
                break;
            }
            let m = mu as i64;
            b2[0] -= mu * b1[0];
            b2[1] -= mu * b1[1];
            c2[0] -= m * c1[0];
            c2[1] -= m * c1[1];
        }

        ShortestVector {
            vector: b1,
            norm: norm_sq(&b1).sqrt(),
            coefficients: c1,
        }
    }

    /// Shortest-vector norm, the excursion-depth function `d`.
    pub fn shortest_norm(&self) -> f64 {
        self.shortest_vector().norm
    }

    /// A random unimodular basis: rotation * diag(e^s, e^{-s}) * shear.
    pub fn random_unimodular<R: rand::Rng>(rng: &mut R) -> Self {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let s: f64 = rng.gen_range(-1.5..1.5);
        let x: f64 = rng.gen_range(-2.0..2.0);
        let (sin, cos) = theta.sin_cos();
        let (a, b) = (s.exp(), (-s).exp());
        // columns of R(theta) * diag(a, b) * [[1, x], [0, 1]]
        let col1 = [cos * a, sin * a];
        let col2 = [cos * a * x - sin * b, sin * a * x + cos * b];
        PlanarLattice::from_columns(col1, col2).expect("construction is unimodular")
    }
}

/// Shortest-vector norm of `a_t u_x Z^2`, by reduction on the factored form.
///
/// Lattice vectors are `(e^t (m + n x), e^{-t} n)`; forming the scaled basis
/// first and subtracting columns loses the small combinations `m + n x` to
/// cancellation once `e^t` dwarfs them. This reduction keeps the integer
/// coefficients `(m, n)` and re-evaluates components from them with a fused
/// multiply-add, so each norm carries full relative precision at any `t`
/// the coefficients can represent (|t| up to ~80).
pub fn horocycle_shortest_norm(x: f64, t: f64) -> Result<f64> {
    if !x.is_finite() || !t.is_finite() || t.abs() > 80.0 {
        return Err(Error::invalid("horocycle reduction needs finite x and |t| <= 80"));
    }
    let grow = t.exp();
    let shrink = (-t).exp();
    // component evaluation from exact integer coefficients
    let eval = |c: (i128, i128)| -> [f64; 2] {
        let u = (c.1 as f64).mul_add(x, c.0 as f64);
        [grow * u, shrink * c.1 as f64]
    };
    let norm_sq = |v: &[f64; 2]| v[0] * v[0] + v[1] * v[1];

    let mut c1 = (1i128, 0i128);
    let mut c2 = (0i128, 1i128);
    let mut v1 = eval(c1);
    let mut v2 = eval(c2);
    for _ in 0..10_000 {
        if norm_sq(&v2) < norm_sq(&v1) {
            std::mem::swap(&mut c1, &mut c2);
            std::mem::swap(&mut v1, &mut v2);
        }
        let mu = ((v1[0] * v2[0] + v1[1] * v2[1]) / norm_sq(&v1)).round();
        if mu == 0.0 {
            break;
        }
        let m = mu as i128;
        c2 = (c2.0 - m * c1.0, c2.1 - m * c1.1);
        v2 = eval(c2);
    }
    Ok(norm_sq(&v1).sqrt())
}

/// Samples of `d(a_t u_x Z^2)` on the uniform grid `t = 0, dt, .., T`.
#[derive(Debug, Clone, Serialize)]
pub struct ExcursionProfile {
    pub x: f64,
    pub times: Vec<f64>,
    pub shortvec: Vec<f64>,
}

impl ExcursionProfile {
    /// Indices of strict interior local minima of the profile.
    pub fn local_minima(&self) -> Vec<usize> {
        let d = &self.shortvec;
        (1..d.len().saturating_sub(1))
            .filter(|&i| d[i] < d[i - 1] && d[i] < d[i + 1])
            .collect()
    }
}

/// Samples the excursion-depth function of the horocycle point `u_x Z^2`
/// along the flow, on the grid `t = 0, dt, .., T`.
pub fn excursion_profile(x: f64, t_max: f64, dt: f64) -> Result<ExcursionProfile> {
    if !(dt > 0.0) || !(t_max >= dt) || !t_max.is_finite() {
        return Err(Error::invalid("profile needs dt > 0 and T >= dt"));
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut shortvec = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = i as f64 * dt;
        times.push(t);
        shortvec.push(horocycle_shortest_norm(x, t)?);
    }
    Ok(ExcursionProfile { x, times, shortvec })
}

/// Finite-horizon estimate of the excursion rate of `u_x Z^2`.
#[derive(Debug, Clone, Serialize)]
pub struct ExcursionExponent {
    /// Max of `(-ln d(t)) / t` over the dips in the tail window `(T/2, T]`
    /// (the grid endpoint stands in when the tail is monotone).
    pub value: f64,
    /// Set when the profile has fewer than 3 local minima overall; the
    /// estimate is then dominated by the horizon, not by excursions.
    pub low_confidence: bool,
    pub minima_count: usize,
}

/// Estimates the excursion rate from a sampled profile.
///
/// Only the tail window `(T/2, T]` enters the maximum: early dips carry
/// transients of size `(ln const)/t` that do not vanish with the horizon.
/// Divergent orbits (monotone tails, e.g. rational `x`) are captured by the
/// endpoint sample, where `(-ln d(T))/T -> 1`.
pub fn excursion_exponent(profile: &ExcursionProfile) -> Result<ExcursionExponent> {
    let len = profile.times.len();
    if len < 3 {
        return Err(Error::invalid("profile too short for an exponent estimate"));
    }
    let t_max = *profile.times.last().unwrap();
    let minima = profile.local_minima();
    let half = t_max / 2.0;
    let mut candidates: Vec<usize> = minima
        .iter()
        .copied()
        .filter(|&i| profile.times[i] > half)
        .collect();
    candidates.push(len - 1);

    let value = candidates
        .iter()
        .map(|&i| -profile.shortvec[i].ln() / profile.times[i])
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(ExcursionExponent {
        value,
        low_confidence: minima.len() < 3,
        minima_count: minima.len(),
    })
}

/// A continued-fraction expansion prefix.
///
/// `terminated` is set when the input is rational with an expansion shorter
/// than the requested length; the full finite expansion is then returned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CfExpansion {
    pub quotients: Vec<i128>,
    pub terminated: bool,
}

/// Exact continued-fraction partial quotients of a rational number.
pub fn cf_expansion_exact(x: &BigRational, k: usize) -> Result<CfExpansion> {
    if k == 0 {
        return Err(Error::invalid("expansion length k must be >= 1"));
    }
    let mut quotients = Vec::with_capacity(k);
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    let mut terminated = false;
    for _ in 0..k {
        let a = num.div_floor(&den);
        let rem = &num - &a * &den;
        let Some(a) = a.to_i128() else {
            terminated = false;
            break;
        };
        quotients.push(a);
        if rem.is_zero() {
            terminated = true;
            break;
        }
        num = den;
        den = rem;
    }
    Ok(CfExpansion {
        quotients,
        terminated,
    })
}

/// Continued-fraction partial quotients of `x`, computed exactly on the
/// binary rational that `x` represents.
pub fn cf_expansion(x: f64, k: usize) -> Result<CfExpansion> {
    let exact = BigRational::from_float(x)
        .ok_or_else(|| Error::invalid("continued fraction of a non-finite number"))?;
    cf_expansion_exact(&exact, k)
}

/// Convergents `p_k / q_k` of `x` with `q_k <= max_q`.
pub fn convergents(x: &BigRational, max_q: u64) -> Vec<(BigInt, BigInt)> {
    let cf = match cf_expansion_exact(x, 64) {
        Ok(cf) => cf,
        Err(_) => return Vec::new(),
    };
    let mut out = Vec::new();
    let (mut p_prev, mut q_prev) = (BigInt::from(0), BigInt::from(1));
    let (mut p, mut q) = (BigInt::from(1), BigInt::from(0));
    for a in &cf.quotients {
        let a = BigInt::from(*a);
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        if q_next > BigInt::from(max_q) {
            break;
        }
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push((p.clone(), q.clone()));
    }
    out
}

/// The predicted dip of the excursion profile generated by one convergent.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergentDip {
    pub p: i64,
    pub q: u64,
    /// Time of the local minimum contributed by the lattice vector
    /// `(q x - p, q)`: the norm `(e^{2t} delta^2 + e^{-2t} q^2)^(1/2)` is
    /// minimal at `t = (1/2) ln(q / delta)` with `delta = |q x - p|`.
    pub time: f64,
    /// Value of the vector norm at the dip, `sqrt(2 q delta)`.
    pub depth: f64,
}

/// Dip times of the excursion profile predicted by the convergents of `x`.
pub fn convergent_dips(x: f64, max_q: u64) -> Result<Vec<ConvergentDip>> {
    let exact = BigRational::from_float(x)
        .ok_or_else(|| Error::invalid("dips of a non-finite number"))?;
    let mut out = Vec::new();
    for (p, q) in convergents(&exact, max_q) {
        let delta = (&exact * &q - &p).abs();
        if delta.is_zero() {
            continue; // exact hit: the orbit diverges past this convergent
        }
        let q_f = q.to_f64().unwrap();
        let delta_f = delta.to_f64().unwrap();
        if !(delta_f > 0.0) {
            continue;
        }
        out.push(ConvergentDip {
            p: p.to_i64().unwrap_or(i64::MAX),
            q: q.to_u64().unwrap_or(u64::MAX),
            time: 0.5 * (q_f / delta_f).ln(),
            depth: (2.0 * q_f * delta_f).sqrt(),
        });
    }
    Ok(out)
}

/// The two classical line formulas: the dimension `2/(1+gamma)` of the set
/// of badly-approximable-at-order-`gamma` exceptions on the line, and its
/// homogeneous counterpart `2 + 2/(1+gamma)`.
pub fn jb_classical_dimension(gamma: &BigRational) -> Result<(BigRational, BigRational)> {
    let one = BigRational::from(BigInt::from(1));
    if gamma < &one {
        return Err(Error::invalid("gamma must be >= 1"));
    }
    let two = BigRational::from(BigInt::from(2));
    let line = &two / (&one + gamma);
    let homogeneous = &two + &line;
    Ok((line, homogeneous))
}
