//! Exact rational points, heights, and enumeration by height band.
//!
//! A rational point of the `(2n-1)`-dimensional group is a tuple of exact
//! rationals (real/imaginary horizontal parts, then the vertical part); its
//! *height* is the least common multiple of the coordinate denominators in
//! lowest terms. This module provides:
//! - [`RationalPoint`]: exact coordinates plus cached height, with the exact
//!   group law for odd arity `>= 3`
//! - [`EnumBox`]: a coordinate-wise half-open box with exact rational bounds
//! - [`enumerate_height_band`] / [`count_height_band`]: complete,
//!   duplicate-free enumeration of the points with height in the dyadic band
//!   `(C/2, C]`, deterministic for any worker count
//! - [`count_slope`]: log-log slope of band counts against the band top
//! - [`diophantine_witnesses`]: the finite-truncation violations of the
//!   gauge inequality `d_Cyg(lambda, r) >= C / h(r)^gamma`
//!
//! The enumeration kernel walks, for each height `h` in the band, the grid
//! of numerator tuples `k/h` inside the box and keeps exactly the tuples
//! whose reduced denominators have lcm equal to `h`. Every point in the band
//! is therefore produced exactly once, and the ordering (ascending height,
//! then ascending numerator tuples; materialized results are sorted
//! coordinate-lexicographically) does not depend on thread count.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fit::{log_log_fit, DimensionFit};
use crate::heisenberg::HeisenbergPoint;

/// Renders an exact rational as `p/q` (or just `p` for integers).
pub fn rational_str(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A point with exact rational coordinates and its height.
///
/// Coordinates are stored in the flat layout `[re_1, im_1, .., v]` shared
/// with [`HeisenbergPoint`]; arity 1 is the line mode used by the
/// one-dimensional counting control.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RationalPoint {
    coords: Vec<BigRational>,
    height: u64,
}

/// Height of a coordinate tuple: lcm of the denominators in lowest terms.
pub fn height_of(coords: &[BigRational]) -> Result<u64> {
    if coords.is_empty() {
        return Err(Error::invalid("height of an empty coordinate tuple"));
    }
    let mut l = BigUint::from(1u32);
    for c in coords {
        l = l.lcm(&c.denom().magnitude());
    }
    l.to_u64()
        .ok_or_else(|| Error::invalid("height does not fit in 64 bits"))
}

impl RationalPoint {
    pub fn new(coords: Vec<BigRational>) -> Result<Self> {
        let height = height_of(&coords)?;
        Ok(RationalPoint { coords, height })
    }

    /// Builds a point from numerator/denominator pairs (reduced internally).
    pub fn from_pairs(pairs: &[(i64, u64)]) -> Result<Self> {
        let coords = pairs
            .iter()
            .map(|&(p, q)| {
                if q == 0 {
                    return Err(Error::invalid("zero denominator"));
                }
                Ok(BigRational::new(BigInt::from(p), BigInt::from(q)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn arity(&self) -> usize {
        self.coords.len()
    }

    /// Group parameter when the arity is the odd number `2n - 1`, `n >= 2`.
    pub fn group_n(&self) -> Option<usize> {
        if self.coords.len() >= 3 && self.coords.len() % 2 == 1 {
            Some(self.coords.len() / 2 + 1)
        } else {
            None
        }
    }

    fn require_group(&self) -> Result<usize> {
        self.group_n()
            .ok_or_else(|| Error::invalid("operation needs odd arity 2n-1 with n >= 2"))
    }

    /// Exact group multiplication; both operands must share the arity.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.require_group()?;
        if self.arity() != other.arity() {
            return Err(Error::DimensionMismatch {
                left: self.arity() / 2,
                right: other.arity() / 2,
            });
        }
        let m = self.arity() - 1;
        let mut coords: Vec<BigRational> = (0..m)
            .map(|i| &self.coords[i] + &other.coords[i])
            .collect();
        // v + v' + 2 sum_i (im_i re'_i - re_i im'_i)
        let mut twist = BigRational::zero();
        for i in (0..m).step_by(2) {
            twist += &self.coords[i + 1] * &other.coords[i] - &self.coords[i] * &other.coords[i + 1];
        }
        let two = BigRational::from(BigInt::from(2));
        coords.push(&self.coords[m] + &other.coords[m] + two * twist);
        Self::new(coords)
    }

    /// Exact group inverse: negation of every coordinate.
    pub fn inverse(&self) -> Self {
        RationalPoint {
            coords: self.coords.iter().map(|c| -c).collect(),
            height: self.height,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Floating-point view of the same group element (odd arity only).
    pub fn to_float(&self) -> Result<HeisenbergPoint> {
        self.require_group()?;
        HeisenbergPoint::from_coords(&self.coords_f64())
    }

    pub fn coord_strings(&self) -> Vec<String> {
        self.coords.iter().map(rational_str).collect()
    }
}

impl Serialize for RationalPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RationalPoint", 2)?;
        st.serialize_field("coords", &self.coord_strings())?;
        st.serialize_field("height", &self.height)?;
        st.end()
    }
}

/// A coordinate-wise half-open box `prod_i [lower_i, upper_i)` with exact
/// rational bounds. The lower-inclusive convention makes disjoint unions of
/// boxes partition counts exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumBox {
    lower: Vec<BigRational>,
    upper: Vec<BigRational>,
}

impl EnumBox {
    pub fn new(lower: Vec<BigRational>, upper: Vec<BigRational>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid("box bounds must be nonempty and of equal arity"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l >= u) {
            return Err(Error::invalid("box needs lower < upper on every axis"));
        }
        Ok(EnumBox { lower, upper })
    }

    /// The unit cube `[0, 1)^arity`.
    pub fn unit_cube(arity: usize) -> Result<Self> {
        let zero = BigRational::zero();
        let one = BigRational::from(BigInt::from(1));
        Self::new(vec![zero; arity], vec![one; arity])
    }

    pub fn arity(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[BigRational] {
        &self.lower
    }

    pub fn upper(&self) -> &[BigRational] {
        &self.upper
    }

    pub fn contains(&self, coords: &[BigRational]) -> bool {
        coords.len() == self.arity()
            && coords
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(c, (l, u))| c >= l && c < u)
    }

    pub fn volume_f64(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l).to_f64().unwrap_or(f64::NAN))
            .product()
    }

    fn sides_f64(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l).to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// Numerator range on each axis for the grid of spacing `1/h`:
    /// `k/h` lies in `[l, u)` iff `ceil(h l) <= k <= ceil(h u) - 1`.
    fn numerator_ranges(&self, h: u64) -> Result<Option<Vec<(i64, i64)>>> {
        let h_big = BigInt::from(h);
        let mut out = Vec::with_capacity(self.arity());
        for (l, u) in self.lower.iter().zip(&self.upper) {
            let lo = ceil_big(&(l.numer() * &h_big), l.denom());
            let hi = ceil_big(&(u.numer() * &h_big), u.denom()) - 1;
            if lo > hi {
                return Ok(None); // no grid point of spacing 1/h on this axis
            }
            let lo = lo
                .to_i64()
                .ok_or_else(|| Error::invalid("numerator range exceeds i64"))?;
            let hi = hi
                .to_i64()
                .ok_or_else(|| Error::invalid("numerator range exceeds i64"))?;
            out.push((lo, hi));
        }
        Ok(Some(out))
    }
}

impl Serialize for EnumBox {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EnumBox", 2)?;
        let lo: Vec<String> = self.lower.iter().map(rational_str).collect();
        let hi: Vec<String> = self.upper.iter().map(rational_str).collect();
        st.serialize_field("lower", &lo)?;
        st.serialize_field("upper", &hi)?;
        st.end()
    }
}

fn ceil_big(numer: &BigInt, denom: &BigInt) -> BigInt {
    // denom > 0 by BigRational normalization
    numer.div_ceil(denom)
}

/// Ceiling on the estimated candidate-grid work of an enumeration call.
#[derive(Debug, Clone, Copy)]
pub struct Budget(pub f64);

impl Budget {
    pub const UNLIMITED: Budget = Budget(f64::INFINITY);

    pub fn new(ceiling: f64) -> Self {
        Budget(ceiling)
    }
}

impl Default for Budget {
    /// Roughly a minute of grid walking on one desktop core.
    fn default() -> Self {
        Budget(2e9)
    }
}

/// Heights making up the dyadic band `(C/2, C]`.
pub fn band_heights(c: u64) -> std::ops::RangeInclusive<u64> {
    c / 2 + 1..=c
}

/// Estimated number of grid candidates visited for heights in `[h_lo, h_hi]`.
pub fn work_estimate(bx: &EnumBox, h_lo: u64, h_hi: u64) -> f64 {
    let sides = bx.sides_f64();
    let mut total = 0.0;
    let mut h = h_lo as f64;
    while h <= h_hi as f64 {
        total += sides.iter().map(|s| s * h + 1.0).product::<f64>();
        h += 1.0;
    }
    total
}

fn check_budget(bx: &EnumBox, h_lo: u64, h_hi: u64, budget: Budget) -> Result<()> {
    let estimate = work_estimate(bx, h_lo, h_hi);
    if estimate > budget.0 {
        return Err(Error::ResourceBudget {
            estimate,
            budget: budget.0,
        });
    }
    Ok(())
}

/// A grid candidate that passed the exact-height filter.
///
/// Borrowed view into the enumeration walker; call [`Candidate::to_point`]
/// to materialize the reduced coordinates.
pub struct Candidate<'a> {
    reduced_numer: &'a [i64],
    reduced_denom: &'a [u64],
    height: u64,
}

impl Candidate<'_> {
    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn to_point(&self) -> RationalPoint {
        let coords = self
            .reduced_numer
            .iter()
            .zip(self.reduced_denom)
            .map(|(&p, &q)| BigRational::new_raw(BigInt::from(p), BigInt::from(q)))
            .collect();
        RationalPoint {
            coords,
            height: self.height,
        }
    }

    /// Writes the floating-point coordinates into `out`.
    pub fn write_coords_f64(&self, out: &mut [f64]) {
        for ((&p, &q), slot) in self.reduced_numer.iter().zip(self.reduced_denom).zip(out) {
            *slot = p as f64 / q as f64;
        }
    }
}

struct Walker {
    ranges: Vec<(i64, i64)>,
    height: u64,
    numer: Vec<i64>,
    denom: Vec<u64>,
}

impl Walker {
    fn run<F: FnMut(Candidate)>(bx: &EnumBox, h: u64, f: &mut F) -> Result<()> {
        debug_assert!(h >= 1);
        let Some(ranges) = bx.numerator_ranges(h)? else {
            return Ok(());
        };
        let arity = ranges.len();
        let mut w = Walker {
            ranges,
            height: h,
            numer: vec![0; arity],
            denom: vec![1; arity],
        };
        w.descend(0, 1, f);
        Ok(())
    }

    /// Depth-first walk over numerator tuples; `prefix_lcm` is the lcm of
    /// the reduced denominators of coordinates `< depth`. Every reduced
    /// denominator divides `h`, so the point has height `h` exactly when
    /// the final lcm equals `h`.
    fn descend<F: FnMut(Candidate)>(&mut self, depth: usize, prefix_lcm: u64, f: &mut F) {
        let (lo, hi) = self.ranges[depth];
        let h = self.height;
        let last = depth + 1 == self.ranges.len();
        for k in lo..=hi {
            let g = num_integer::gcd(k.unsigned_abs(), h);
            let d = h / g;
            let l = prefix_lcm / num_integer::gcd(prefix_lcm, d) * d;
            self.numer[depth] = k / g as i64;
            self.denom[depth] = d;
            if last {
                if l == h {
                    f(Candidate {
                        reduced_numer: &self.numer,
                        reduced_denom: &self.denom,
                        height: h,
                    });
                }
            } else {
                self.descend(depth + 1, l, f);
            }
        }
    }
}

/// Visits every point with height exactly `h` in the box, ascending
/// numerator order. Single-threaded building block of the band walks.
pub fn visit_height(bx: &EnumBox, h: u64, mut f: impl FnMut(Candidate)) -> Result<()> {
    Walker::run(bx, h, &mut f)
}

/// Visits every point with height in `[h_lo, h_hi]`, ascending height then
/// ascending numerators, after a budget check.
pub fn visit_heights(
    bx: &EnumBox,
    h_lo: u64,
    h_hi: u64,
    budget: Budget,
    mut f: impl FnMut(Candidate),
) -> Result<()> {
    if h_lo < 1 || h_hi < h_lo {
        return Err(Error::invalid("height range must satisfy 1 <= h_lo <= h_hi"));
    }
    check_budget(bx, h_lo, h_hi, budget)?;
    for h in h_lo..=h_hi {
        Walker::run(bx, h, &mut f)?;
    }
    Ok(())
}

/// All points with height in the band `(C/2, C]`, complete and
/// duplicate-free, sorted coordinate-lexicographically.
///
/// Internally parallel over heights; the output is identical for any worker
/// count.
pub fn enumerate_height_band(bx: &EnumBox, c: u64, budget: Budget) -> Result<Vec<RationalPoint>> {
    if c < 1 {
        return Err(Error::invalid("band top C must be >= 1"));
    }
    let (h_lo, h_hi) = band_heights(c).into_inner();
    check_budget(bx, h_lo, h_hi, budget)?;
    let heights: Vec<u64> = (h_lo..=h_hi).collect();
    let mut per_height: Vec<Vec<RationalPoint>> = heights
        .par_iter()
        .map(|&h| {
            let mut points = Vec::new();
            Walker::run(bx, h, &mut |cand: Candidate| points.push(cand.to_point()))?;
            Ok(points)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<RationalPoint> = per_height.drain(..).flatten().collect();
    out.sort_unstable_by(|a, b| a.coords.cmp(&b.coords));
    Ok(out)
}

/// Number of points with height in `(C/2, C]`, without materializing them.
pub fn count_height_band(bx: &EnumBox, c: u64, budget: Budget) -> Result<u64> {
    if c < 1 {
        return Err(Error::invalid("band top C must be >= 1"));
    }
    let (h_lo, h_hi) = band_heights(c).into_inner();
    check_budget(bx, h_lo, h_hi, budget)?;
    (h_lo..=h_hi)
        .into_par_iter()
        .map(|h| {
            let mut count = 0u64;
            Walker::run(bx, h, &mut |_| count += 1)?;
            Ok(count)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Number of points with height `<= h_max`.
pub fn count_heights_through(bx: &EnumBox, h_max: u64, budget: Budget) -> Result<u64> {
    if h_max < 1 {
        return Err(Error::invalid("h_max must be >= 1"));
    }
    check_budget(bx, 1, h_max, budget)?;
    (1..=h_max)
        .into_par_iter()
        .map(|h| {
            let mut count = 0u64;
            Walker::run(bx, h, &mut |_| count += 1)?;
            Ok(count)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// One dyadic band of a counting experiment.
#[derive(Debug, Clone, Serialize)]
pub struct BandCount {
    pub c: u64,
    pub count: u64,
}

/// Band counts over a box, the raw material of the counting experiments.
#[derive(Debug, Clone, Serialize)]
pub struct CountSeries {
    pub bands: Vec<BandCount>,
    #[serde(rename = "box")]
    pub enum_box: EnumBox,
}

/// Outcome of [`count_slope`]: the series, the log-log fit over nonempty
/// bands, and the band tops that were empty (excluded from the fit).
#[derive(Debug, Clone, Serialize)]
pub struct CountSlope {
    pub series: CountSeries,
    pub fit: DimensionFit,
    pub empty_bands: Vec<u64>,
}

/// Least-squares slope of `log(band count)` against `log C`.
///
/// Needs at least three strictly increasing band tops; empty bands are kept
/// in the series but excluded from (and flagged next to) the fit.
pub fn count_slope(bx: &EnumBox, c_values: &[u64], budget: Budget) -> Result<CountSlope> {
    if c_values.len() < 3 {
        return Err(Error::invalid("count_slope needs at least 3 band tops"));
    }
    if c_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("band tops must be strictly increasing"));
    }
    if c_values[0] < 1 {
        return Err(Error::invalid("band tops must be >= 1"));
    }
    let bands = c_values
        .iter()
        .map(|&c| {
            Ok(BandCount {
                c,
                count: count_height_band(bx, c, budget)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let empty_bands: Vec<u64> = bands.iter().filter(|b| b.count == 0).map(|b| b.c).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = bands
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| (b.c as f64, b.count as f64))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::invalid("fewer than two nonempty bands; nothing to fit"));
    }
    let fit = log_log_fit(&xs, &ys)?;
    Ok(CountSlope {
        series: CountSeries {
            bands,
            enum_box: bx.clone(),
        },
        fit,
        empty_bands,
    })
}

/// A finite-truncation violation of the gauge inequality.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub point: RationalPoint,
    pub distance: f64,
}

/// All rational points `r` in the box with `h(r) <= h_max` and
/// `d_Cyg(lambda, r) < C / h(r)^gamma`, sorted coordinate-lexicographically.
///
/// An empty list certifies, at truncation `h_max` and constant `C`, that no
/// violation of the type-`gamma` inequality occurs in the box; a nonempty
/// list exhibits the violating approximants.
pub fn diophantine_witnesses(
    lambda: &HeisenbergPoint,
    gamma: f64,
    c: f64,
    h_max: u64,
    bx: &EnumBox,
    budget: Budget,
) -> Result<Vec<Witness>> {
    if gamma < 1.0 {
        return Err(Error::invalid("gamma must be >= 1"));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("constant C must be positive"));
    }
    if h_max < 1 {
        return Err(Error::invalid("h_max must be >= 1"));
    }
    if bx.arity() != 2 * lambda.n() - 1 {
        return Err(Error::DimensionMismatch {
            left: lambda.n() - 1,
            right: bx.arity() / 2,
        });
    }
    check_budget(bx, 1, h_max, budget)?;

    let arity = bx.arity();
    let mut per_height: Vec<Vec<Witness>> = (1..=h_max)
        .into_par_iter()
        .map(|h| {
            let threshold = c * (h as f64).powf(-gamma);
            let mut found = Vec::new();
            let mut coords = vec![0.0; arity];
            Walker::run(bx, h, &mut |cand: Candidate| {
                cand.write_coords_f64(&mut coords);
                let r = HeisenbergPoint::from_coords(&coords).expect("walker arity is valid");
                let distance = lambda.cygan_dist(&r).expect("arity checked above");
                if distance < threshold {
                    found.push(Witness {
                        point: cand.to_point(),
                        distance,
                    });
                }
            })?;
            Ok(found)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Witness> = per_height.drain(..).flatten().collect();
    out.sort_unstable_by(|a, b| a.point.coords.cmp(&b.point.coords));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn unit_cube3() -> EnumBox {
        EnumBox::unit_cube(3).unwrap()
    }

    /// Independent oracle: loop over all denominator tuples `q_i <= c_max`
    /// and coprime numerators, keep points in the box, dedupe by reduced
    /// coordinates, then filter by height band. Exercises a completely
    /// different code path than the grid walker.
    fn naive_band_oracle(bx: &EnumBox, c: u64) -> Vec<RationalPoint> {
        use std::collections::BTreeSet;
        let arity = bx.arity();
        let mut seen: BTreeSet<Vec<BigRational>> = BTreeSet::new();
        let mut denoms = vec![1u64; arity];
        loop {
            // numerators per axis: all k with k/q in [lower, upper)
            let mut numerators: Vec<Vec<i64>> = Vec::new();
            for (axis, &q) in denoms.iter().enumerate() {
                let mut ks = Vec::new();
                // scan a generous window around the box
                let lo = bx.lower()[axis].to_f64().unwrap();
                let hi = bx.upper()[axis].to_f64().unwrap();
                let k_lo = (lo * q as f64).floor() as i64 - 2;
                let k_hi = (hi * q as f64).ceil() as i64 + 2;
                for k in k_lo..=k_hi {
                    let x = rat(k, q as i64);
                    if x >= bx.lower()[axis] && x < bx.upper()[axis] {
                        ks.push(k);
                    }
                }
                numerators.push(ks);
            }
            let mut idx = vec![0usize; arity];
            'grid: loop {
                let coords: Vec<BigRational> = idx
                    .iter()
                    .enumerate()
                    .map(|(a, &i)| rat(numerators[a][i], denoms[a] as i64))
                    .collect();
                seen.insert(coords);
                for a in (0..arity).rev() {
                    idx[a] += 1;
                    if idx[a] < numerators[a].len() {
                        continue 'grid;
                    }
                    idx[a] = 0;
                    if a == 0 {
                        break 'grid;
                    }
                }
                if numerators.iter().any(|v| v.is_empty()) {
                    break;
                }
            }
            // odometer over denominator tuples
            let mut axis = arity;
            loop {
                if axis == 0 {
                    let mut out: Vec<RationalPoint> = seen
                        .into_iter()
                        .map(|coords| RationalPoint::new(coords).unwrap())
                        .filter(|p| p.height() > c / 2 && p.height() <= c)
                        .collect();
                    out.sort_by(|a, b| a.coords.cmp(&b.coords));
                    return out;
                }
                axis -= 1;
                denoms[axis] += 1;
                if denoms[axis] <= c {
                    break;
                }
                denoms[axis] = 1;
            }
        }
    }

    /// Count of points with height exactly h in the unit cube of given
    /// arity, by Moebius inversion over the divisors of h.
    fn unit_cube_height_count(h: u64, arity: u32) -> i64 {
        let mut total: i64 = 0;
        for d in 1..=h {
            if h % d != 0 {
                continue;
            }
            let mu = moebius(h / d);
            total += mu * (d as i64).pow(arity);
        }
        total
    }

    fn moebius(mut n: u64) -> i64 {
        let mut primes = 0;
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                n /= p;
                if n % p == 0 {
                    return 0;
                }
                primes += 1;
            }
            p += 1;
        }
        if n > 1 {
            primes += 1;
        }
        if primes % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn height_examples() {
        assert_eq!(height_of(&[rat(0, 1), rat(0, 1), rat(0, 1)]).unwrap(), 1);
        assert_eq!(height_of(&[rat(1, 2), rat(1, 3), rat(1, 4)]).unwrap(), 12);
        assert_eq!(height_of(&[rat(3, 1), rat(2, 1), rat(5, 1)]).unwrap(), 1);
        // reduction happens before the lcm: 2/4 has denominator 2
        assert_eq!(height_of(&[rat(2, 4)]).unwrap(), 2);
    }

    #[test]
    fn exact_group_law_matches_float_side() {
        let a = RationalPoint::from_pairs(&[(0, 1), (1, 1), (0, 1)]).unwrap();
        let b = RationalPoint::from_pairs(&[(1, 1), (0, 1), (0, 1)]).unwrap();
        let c = a.compose(&b).unwrap();
        assert_eq!(c.coords(), &[rat(1, 1), rat(1, 1), rat(2, 1)]);
    }

    #[test]
    fn exact_associativity_and_inverse_law() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let mut pts = Vec::new();
            for _ in 0..3 {
                let pairs: Vec<(i64, u64)> = (0..3)
                    .map(|_| (rng.gen_range(-12..12), rng.gen_range(1..12)))
                    .collect();
                pts.push(RationalPoint::from_pairs(&pairs).unwrap());
            }
            let (a, b, c) = (&pts[0], &pts[1], &pts[2]);
            let l = a.compose(b).unwrap().compose(c).unwrap();
            let r = a.compose(&b.compose(c).unwrap()).unwrap();
            assert_eq!(l, r, "exact associativity must hold");
            let e = a.compose(&a.inverse()).unwrap();
            assert!(e.is_identity(), "p * p^-1 must be the identity exactly");
        }
    }

    #[test]
    fn band_c1_contains_only_the_origin() {
        let pts = enumerate_height_band(&unit_cube3(), 1, Budget::UNLIMITED).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].is_identity());
        assert_eq!(pts[0].height(), 1);
    }

    #[test]
    fn band_c2_contains_the_seven_half_integer_points() {
        let pts = enumerate_height_band(&unit_cube3(), 2, Budget::UNLIMITED).unwrap();
        assert_eq!(pts.len(), 7);
        for p in &pts {
            assert_eq!(p.height(), 2);
            for c in p.coords() {
                assert!(c.is_zero() || *c == rat(1, 2));
            }
        }
    }

    #[test]
    fn bands_match_naive_denominator_oracle_on_shifted_boxes() {
        let boxes = [
            unit_cube3(),
            EnumBox::new(
                vec![rat(1, 3), rat(-1, 2), rat(0, 1)],
                vec![rat(4, 3), rat(1, 2), rat(1, 1)],
            )
            .unwrap(),
            EnumBox::new(
                vec![rat(-1, 2), rat(-1, 2), rat(-1, 2)],
                vec![rat(1, 2), rat(1, 2), rat(1, 2)],
            )
            .unwrap(),
        ];
        for bx in &boxes {
            for c in 1..=8 {
                let ours = enumerate_height_band(bx, c, Budget::UNLIMITED).unwrap();
                let oracle = naive_band_oracle(bx, c);
                assert_eq!(ours, oracle, "band C={c} mismatch on box {bx:?}");
            }
        }
    }

    #[test]
    fn unit_cube_band_counts_match_moebius_oracle() {
        let bx = unit_cube3();
        for c in [1u64, 2, 4, 8, 16, 32, 64] {
            let ours = count_height_band(&bx, c, Budget::UNLIMITED).unwrap();
            let oracle: i64 = band_heights(c).map(|h| unit_cube_height_count(h, 3)).sum();
            assert_eq!(ours as i64, oracle, "count mismatch in band (C/2, C] at C={c}");
        }
    }

    #[test]
    fn height_divides_common_denominator() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let q = rng.gen_range(1..=100u64);
            let pairs: Vec<(i64, u64)> = (0..3).map(|_| (rng.gen_range(0..q as i64 + 1), q)).collect();
            let p = RationalPoint::from_pairs(&pairs).unwrap();
            assert_eq!(q % p.height(), 0, "height must divide the common denominator");
        }
    }

    #[test]
    fn dyadic_bands_partition_the_height_range() {
        let bx = unit_cube3();
        let m = 5;
        let mut total = 0;
        for e in 1..=m {
            total += count_height_band(&bx, 1 << e, Budget::UNLIMITED).unwrap();
        }
        let through = count_heights_through(&bx, 1 << m, Budget::UNLIMITED).unwrap();
        let h1 = count_height_band(&bx, 1, Budget::UNLIMITED).unwrap();
        assert_eq!(total, through - h1);
    }

    #[test]
    fn enumeration_is_deterministic_across_worker_counts() {
        let bx = unit_cube3();
        let baseline = enumerate_height_band(&bx, 12, Budget::UNLIMITED).unwrap();
        for threads in [1usize, 2, 7] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let run = pool.install(|| enumerate_height_band(&bx, 12, Budget::UNLIMITED).unwrap());
            assert_eq!(run, baseline, "{threads}-thread run differs");
        }
        let a = serde_json::to_string(&baseline).unwrap();
        let b = serde_json::to_string(&enumerate_height_band(&bx, 12, Budget::UNLIMITED).unwrap())
            .unwrap();
        assert_eq!(a, b, "serialized output must be byte-identical across runs");
    }

    #[test]
    fn budget_is_enforced() {
        let bx = unit_cube3();
        let err = enumerate_height_band(&bx, 64, Budget::new(10.0)).unwrap_err();
        assert!(matches!(err, Error::ResourceBudget { .. }));
    }

    #[test]
    fn count_slope_validates_inputs() {
        let bx = unit_cube3();
        assert!(count_slope(&bx, &[8, 16], Budget::UNLIMITED).is_err());
        assert!(count_slope(&bx, &[16, 8, 32], Budget::UNLIMITED).is_err());
    }

    #[test]
    fn line_mode_counts_are_totient_sums() {
        // heights in arity 1 are plain denominators, so band counts over
        // [0, 1) are sums of Euler totients
        let bx = EnumBox::unit_cube(1).unwrap();
        let totient = |q: u64| -> u64 {
            let mut n = q;
            let mut result = q;
            let mut p = 2;
            while p * p <= n {
                if n % p == 0 {
                    while n % p == 0 {
                        n /= p;
                    }
                    result -= result / p;
                }
                p += 1;
            }
            if n > 1 {
                result -= result / n;
            }
            result
        };
        for c in [4u64, 16, 64] {
            let ours = count_height_band(&bx, c, Budget::UNLIMITED).unwrap();
            let oracle: u64 = band_heights(c).map(totient).sum();
            assert_eq!(ours, oracle);
        }
    }

    #[test]
    fn witnesses_origin_cases() {
        let bx = unit_cube3();
        let origin = HeisenbergPoint::identity(2).unwrap();
        // the origin itself is rational and inside the box: distance 0 < 1
        let ws = diophantine_witnesses(&origin, 1.0, 1.0, 1, &bx, Budget::UNLIMITED).unwrap();
        assert_eq!(ws.len(), 1);
        assert!(ws[0].point.is_identity());
        assert_eq!(ws[0].distance, 0.0);
        // shifted box excluding the origin: no height-1 witness survives
        let shifted = EnumBox::new(
            vec![rat(1, 4), rat(1, 4), rat(1, 4)],
            vec![rat(3, 4), rat(3, 4), rat(3, 4)],
        )
        .unwrap();
        let ws = diophantine_witnesses(&origin, 1.0, 1.0, 1, &shifted, Budget::UNLIMITED).unwrap();
        assert!(ws.is_empty());
    }

    #[test]
    fn witnesses_catch_vertical_liouville_truncations() {
        // lambda = (0, s) with s = sum_{k<=4} 2^{-k!}; the k<=3 truncation
        // (0, 49/64) has height 64 and Cygan distance (2^-24)^(1/2) = 2^-12,
        // which violates the type-2 inequality with C = 2: 2 * 64^-2 = 2^-11.
        let s = 0.5 + 0.25 + 2f64.powi(-6) + 2f64.powi(-24);
        let lambda = HeisenbergPoint::from_coords(&[0.0, 0.0, s]).unwrap();
        let bx = unit_cube3();
        let ws = diophantine_witnesses(&lambda, 2.0, 2.0, 64, &bx, Budget::UNLIMITED).unwrap();
        assert!(!ws.is_empty());
        let target = RationalPoint::from_pairs(&[(0, 1), (0, 1), (49, 64)]).unwrap();
        let hit = ws.iter().find(|w| w.point == target).expect("truncation must appear");
        assert!((hit.distance - 2f64.powi(-12)).abs() < 1e-15);
    }

    #[test]
    fn witness_json_renders_exact_rationals() {
        let target = RationalPoint::from_pairs(&[(1, 2), (0, 1), (3, 4)]).unwrap();
        let json = serde_json::to_string(&target).unwrap();
        assert_eq!(json, r#"{"coords":["1/2","0","3/4"],"height":4}"#);
    }

    #[test]
    fn box_validation() {
        assert!(EnumBox::new(vec![rat(0, 1)], vec![rat(0, 1)]).is_err());
        assert!(EnumBox::new(vec![rat(1, 1)], vec![rat(0, 1)]).is_err());
        assert!(EnumBox::new(vec![], vec![]).is_err());
        let one = BigRational::one();
        assert!(EnumBox::new(vec![BigRational::zero()], vec![one.clone(), one]).is_err());
    }
}
