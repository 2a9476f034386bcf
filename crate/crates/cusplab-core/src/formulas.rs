//! Closed-form dimension evaluators, exact over the rationals.
//!
//! The inputs are the root-space dimensions of a rank-one flow: the adjoint
//! action splits the Lie algebra as
//! `g = g_{-2a} + g_{-a} + g_0 + g_a + g_{2a}`, and every exponent in the
//! counting and dimension statements is a combination of these five numbers
//! with the simple root `alpha`. All evaluators take exact rational
//! arguments and return exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Dimensions of the five root spaces of a rank-one flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootSpaceDims {
    pub minus_two_alpha: u32,
    pub minus_alpha: u32,
    pub zero: u32,
    pub alpha: u32,
    pub two_alpha: u32,
}

impl RootSpaceDims {
    pub fn new(dims: [u32; 5]) -> Self {
        RootSpaceDims {
            minus_two_alpha: dims[0],
            minus_alpha: dims[1],
            zero: dims[2],
            alpha: dims[3],
            two_alpha: dims[4],
        }
    }

    /// Root-space dimensions of the isometry group of complex hyperbolic
    /// n-space: `dim g_{+-a} = 2(n-1)`, `dim g_{+-2a} = 1`,
    /// `dim g_0 = n^2 - 2n + 2`.
    pub fn complex_hyperbolic(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("complex hyperbolic data needs n >= 2"));
        }
        Ok(RootSpaceDims {
            minus_two_alpha: 1,
            minus_alpha: 2 * (n - 1),
            zero: n * n - 2 * n + 2,
            alpha: 2 * (n - 1),
            two_alpha: 1,
        })
    }

    /// Root-space dimensions of the modular-surface flow on
    /// `SL(2, R) / SL(2, Z)` (simple root 2, no double root space).
    pub fn modular_surface() -> Self {
        RootSpaceDims::new([0, 1, 1, 1, 0])
    }

    pub fn total(&self) -> u32 {
        self.minus_two_alpha + self.minus_alpha + self.zero + self.alpha + self.two_alpha
    }
}

fn big(n: u32) -> BigRational {
    BigRational::from(BigInt::from(n))
}

fn validate_range(gamma: &BigRational, alpha: &BigRational, dims: &RootSpaceDims) -> Result<()> {
    if alpha <= &BigRational::zero() {
        return Err(Error::invalid("alpha must be positive"));
    }
    if gamma < &BigRational::zero() {
        return Err(Error::invalid("gamma must be >= 0"));
    }
    let limit = if dims.two_alpha == 0 {
        alpha.clone()
    } else {
        &big(2) * alpha
    };
    if gamma >= &limit {
        return Err(Error::invalid(format!(
            "gamma out of range: needs gamma < {}",
            limit
        )));
    }
    Ok(())
}

/// Dimension of the expanding-horospherical part of the exceptional set:
/// `((a - g)/a) dim g_a` when the double root space is empty, and
/// `((4a - g)/(4a)) dim g_a + ((2a - g)/(2a)) dim g_{2a}` otherwise.
pub fn horospherical_dimension(
    gamma: &BigRational,
    alpha: &BigRational,
    dims: &RootSpaceDims,
) -> Result<BigRational> {
    validate_range(gamma, alpha, dims)?;
    if dims.two_alpha == 0 {
        Ok((alpha - gamma) / alpha * big(dims.alpha))
    } else {
        let four_alpha = &big(4) * alpha;
        let two_alpha = &big(2) * alpha;
        Ok(&(&(&four_alpha - gamma) / &four_alpha) * &big(dims.alpha)
            + &(&(&two_alpha - gamma) / &two_alpha) * &big(dims.two_alpha))
    }
}

/// Hausdorff dimension of the set of non-Diophantine points of a given type
/// for a rank-one flow: the contracting and centralizing directions enter
/// with full dimension, the expanding directions with the fractional
/// weights of [`horospherical_dimension`].
pub fn rank_one_dimension(
    gamma: &BigRational,
    alpha: &BigRational,
    dims: &RootSpaceDims,
) -> Result<BigRational> {
    let fiber = horospherical_dimension(gamma, alpha, dims)?;
    let full = big(dims.minus_two_alpha) + big(dims.minus_alpha) + big(dims.zero);
    Ok(full + fiber)
}

/// Multi-cusp refinement: per-cusp rates combine through their minimum.
pub fn multi_cusp_dimension(
    gammas: &[BigRational],
    alpha: &BigRational,
    dims: &RootSpaceDims,
) -> Result<BigRational> {
    if gammas.is_empty() {
        return Err(Error::invalid("multi-cusp evaluation needs at least one rate"));
    }
    for g in gammas {
        validate_range(g, alpha, dims)?;
    }
    let min = gammas.iter().min().expect("nonempty");
    rank_one_dimension(min, alpha, dims)
}

/// Hausdorff dimension `((gamma + 1)/gamma) n - 1` of the non-Diophantine
/// set of the `(2n-1)`-dimensional Heisenberg group at exponent `gamma`,
/// with respect to the right-invariant reference distance.
pub fn heisenberg_dimension(gamma: &BigRational, n: u32) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::invalid("Heisenberg dimension needs n >= 2"));
    }
    let one = big(1);
    if gamma < &one {
        return Err(Error::invalid("gamma must be >= 1"));
    }
    Ok(&(&(gamma + &one) / gamma) * &big(n) - &one)
}

/// Homogeneous-side rate corresponding to a gauge-side exponent `gamma`:
/// `2 - 2/gamma` (simple root 1). Exact over the rationals.
pub fn gauge_rate_to_flow_rate(gamma: &BigRational) -> Result<BigRational> {
    if gamma < &big(1) {
        return Err(Error::invalid("gauge-side gamma must be >= 1"));
    }
    Ok(big(2) - big(2) / gamma)
}

/// Homogeneous-side rate corresponding to a classical line exponent:
/// `2(gamma - 1)/(gamma + 1)` (simple root 2). Exact over the rationals.
pub fn line_rate_to_flow_rate(gamma: &BigRational) -> Result<BigRational> {
    let one = big(1);
    if gamma < &one {
        return Err(Error::invalid("classical gamma must be >= 1"));
    }
    Ok(&big(2) * &(gamma - &one) / (gamma + &one))
}

/// Exponent of the per-level measure-retention ratio of the tree
/// construction, as a function of the flow-side rate:
/// `(dim g_a + 2 dim g_{2a}) - (2a/(2a - g)) dim g_a - (4a/(2a - g)) dim g_{2a}`.
///
/// Requires a nonempty double root space (the anisotropic-box construction).
pub fn retention_exponent(
    gamma: &BigRational,
    alpha: &BigRational,
    dims: &RootSpaceDims,
) -> Result<BigRational> {
    validate_range(gamma, alpha, dims)?;
    if dims.two_alpha == 0 {
        return Err(Error::invalid(
            "retention exponent is defined for a nonempty double root space",
        ));
    }
    let two_alpha = &big(2) * alpha;
    let four_alpha = &big(4) * alpha;
    let gap = &two_alpha - gamma;
    Ok(big(dims.alpha + 2 * dims.two_alpha)
        - &two_alpha / &gap * big(dims.alpha)
        - &four_alpha / &gap * big(dims.two_alpha))
}
