//! Anisotropic covers and the tree-like Cantor construction.
//!
//! Around each rational point `r` of height `h` sits a box with radius
//! `c h^{-gamma}` along the `2(n-1)` horizontal coordinates and `c h^{-2gamma}`
//! along the vertical coordinate. With respect to the sup-norm reference
//! distance these boxes are metric balls of the Cygan geometry, and two
//! constructions are built out of them:
//! - [`build_cover`]: the cover of the exceptional set by the boxes of all
//!   rational centers with height in `(l, H]`, together with the
//!   [`subdivide_count`] of each box into cubes of vertical side
//! - [`CantorTree`]: a nested family grown level by level; each extension
//!   enumerates rational centers in a height band inside every leaf, keeps a
//!   greedily-disjoint subfamily of child boxes built at exponent
//!   `gamma + epsilon`, and records the measure-retention ratio and maximal
//!   diameter that the lower-bound evaluator [`tree_lower_bound`] consumes.
//!
//! Retention ratios are taken as the infimum over parents, matching what the
//! lower bound needs; diameters are taken in the sup metric.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{visit_heights, work_estimate, Budget, Candidate, EnumBox, RationalPoint};

/// Default first scale of the Cantor construction.
pub const DEFAULT_FIRST_SCALE: u64 = 8;
/// Default box-scale constant of the Cantor construction.
pub const DEFAULT_R0: f64 = 0.25;

/// An anisotropic box centered at a rational point.
#[derive(Debug, Clone)]
pub struct CygBox {
    center: RationalPoint,
    center_f64: Vec<f64>,
    gamma: f64,
    scale: f64,
    horizontal_radius: f64,
    vertical_radius: f64,
}

impl CygBox {
    /// Builds the box of exponent `gamma` and scale constant `c` around a
    /// rational center: radii `c h^{-gamma}` (horizontal) and `c h^{-2gamma}`
    /// (vertical, equal to `rh^2 / c`).
    pub fn new(center: RationalPoint, gamma: f64, scale: f64) -> Result<Self> {
        if center.group_n().is_none() {
            return Err(Error::invalid("box center must have odd arity 2n-1, n >= 2"));
        }
        if gamma < 1.0 || !gamma.is_finite() {
            return Err(Error::invalid("box exponent gamma must be >= 1"));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::invalid("box scale constant must be positive"));
        }
        let h = center.height() as f64;
        let center_f64 = center.coords_f64();
        Ok(CygBox {
            center,
            center_f64,
            gamma,
            scale,
            horizontal_radius: scale * h.powf(-gamma),
            vertical_radius: scale * h.powf(-2.0 * gamma),
        })
    }

    pub fn center(&self) -> &RationalPoint {
        &self.center
    }

    pub fn center_f64(&self) -> &[f64] {
        &self.center_f64
    }

    pub fn height(&self) -> u64 {
        self.center.height()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The scale constant `c` the radii were built with.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn horizontal_radius(&self) -> f64 {
        self.horizontal_radius
    }

    pub fn vertical_radius(&self) -> f64 {
        self.vertical_radius
    }

    pub fn arity(&self) -> usize {
        self.center_f64.len()
    }

    fn radius_on_axis(&self, axis: usize) -> f64 {
        if axis + 1 == self.arity() {
            self.vertical_radius
        } else {
            self.horizontal_radius
        }
    }

    /// Volume of the box as a product of side lengths.
    pub fn volume(&self) -> f64 {
        let m = self.arity() - 1;
        (2.0 * self.horizontal_radius).powi(m as i32) * 2.0 * self.vertical_radius
    }

    /// Diameter in the sup metric: the largest side.
    pub fn diameter(&self) -> f64 {
        2.0 * self.horizontal_radius.max(self.vertical_radius)
    }

    pub fn disjoint_from(&self, other: &CygBox) -> bool {
        debug_assert_eq!(self.arity(), other.arity());
        (0..self.arity()).any(|i| {
            (self.center_f64[i] - other.center_f64[i]).abs()
                >= self.radius_on_axis(i) + other.radius_on_axis(i)
        })
    }

    pub fn contains_box(&self, inner: &CygBox) -> bool {
        self.arity() == inner.arity()
            && (0..self.arity()).all(|i| {
                let r_out = self.radius_on_axis(i);
                let r_in = inner.radius_on_axis(i);
                inner.center_f64[i] - r_in >= self.center_f64[i] - r_out
                    && inner.center_f64[i] + r_in <= self.center_f64[i] + r_out
            })
    }

    pub fn contains_coords(&self, coords: &[f64]) -> bool {
        coords.len() == self.arity()
            && (0..self.arity()).all(|i| {
                (coords[i] - self.center_f64[i]).abs() <= self.radius_on_axis(i)
            })
    }

    /// The box as an exact half-open enumeration region `[c - r, c + r)`.
    pub fn to_enum_box(&self) -> Result<EnumBox> {
        let (lower, upper) = (0..self.arity())
            .map(|i| {
                let r = self.radius_on_axis(i);
                (
                    BigRational::from_float(self.center_f64[i] - r).unwrap(),
                    BigRational::from_float(self.center_f64[i] + r).unwrap(),
                )
            })
            .unzip();
        EnumBox::new(lower, upper)
    }

    /// Shrunken enumeration region whose points keep a box of radii
    /// `(rh, rv)` inside this box.
    fn deflated_enum_box(&self, rh: f64, rv: f64) -> Option<EnumBox> {
        let mut lower = Vec::with_capacity(self.arity());
        let mut upper = Vec::with_capacity(self.arity());
        for i in 0..self.arity() {
            let margin = if i + 1 == self.arity() { rv } else { rh };
            let lo = self.center_f64[i] - self.radius_on_axis(i) + margin;
            let hi = self.center_f64[i] + self.radius_on_axis(i) - margin;
            if !(lo < hi) {
                return None;
            }
            lower.push(BigRational::from_float(lo).unwrap());
            upper.push(BigRational::from_float(hi).unwrap());
        }
        EnumBox::new(lower, upper).ok()
    }
}

impl Serialize for CygBox {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CygBox", 5)?;
        st.serialize_field("center", &self.center.coord_strings())?;
        st.serialize_field("height", &self.center.height())?;
        st.serialize_field("gamma", &self.gamma)?;
        st.serialize_field("horizontal_radius", &self.horizontal_radius)?;
        st.serialize_field("vertical_radius", &self.vertical_radius)?;
        st.end()
    }
}

/// Cover of the exceptional set at truncation `l`: one box of exponent
/// `gamma` and scale `c` per rational point in the region with height in
/// `(l, h_max]`, in ascending-height then ascending-numerator order.
///
/// An empty range (`l >= h_max`) yields an empty cover.
pub fn build_cover(
    region: &EnumBox,
    gamma: f64,
    l: u64,
    h_max: u64,
    c: f64,
    budget: Budget,
) -> Result<Vec<CygBox>> {
    if region.arity() < 3 || region.arity() % 2 == 0 {
        return Err(Error::invalid("cover region must have odd arity 2n-1, n >= 2"));
    }
    if gamma < 1.0 {
        return Err(Error::invalid("cover exponent gamma must be >= 1"));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("cover scale constant must be positive"));
    }
    if l >= h_max {
        return Ok(Vec::new());
    }
    let mut boxes = Vec::new();
    visit_heights(region, l + 1, h_max, budget, |cand: Candidate| {
        boxes.push(CygBox::new(cand.to_point(), gamma, c).expect("validated above"));
    })?;
    Ok(boxes)
}

/// Number of cubes with side equal to the vertical radius needed to tile
/// the box: `ceil(rh / rv)` per horizontal axis, i.e. `ceil(h^gamma)` to the
/// power `2n - 2` for the exact cover radii.
pub fn subdivide_count(b: &CygBox) -> Result<u128> {
    let per_axis = (b.horizontal_radius() / b.vertical_radius()).ceil();
    if !per_axis.is_finite() || per_axis < 1.0 || per_axis > u128::MAX as f64 {
        return Err(Error::invalid("degenerate radius ratio"));
    }
    let per_axis = per_axis as u128;
    let exponent = (b.arity() - 1) as u32;
    per_axis
        .checked_pow(exponent)
        .ok_or_else(|| Error::invalid("cube subdivision count overflows"))
}

/// Parameters of the Cantor construction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CantorParams {
    /// Target exponent; the children certify failure of type `gamma`.
    pub gamma: f64,
    /// Construction slack; child boxes use exponent `gamma + epsilon`.
    pub epsilon: f64,
    /// Box-scale constant of the child boxes.
    pub r0: f64,
    /// Group parameter; the ambient arity is `2n - 1`.
    pub n: u32,
}

/// Whether extensions must obey the super-exponential scale schedule
/// `log l_{j+1} >= j^2 log(l_j .. l_1)` exactly, or merely increase.
///
/// The strict schedule is what the asymptotic lower-bound argument uses; at
/// desk scale it forces band populations that grow like `l_1^16`, so finite
/// demonstrations run relaxed and the evaluator consumes whatever retention
/// the construction actually achieved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScheduleMode {
    Strict,
    Relaxed,
}

/// One constructed level: the scale it was built at, the kept boxes, the
/// measure-retention ratio of the extension (infimum over parents), and the
/// maximal box diameter.
#[derive(Debug, Clone, Serialize)]
pub struct CantorLevel {
    pub scale: u64,
    pub retention: f64,
    pub max_diameter: f64,
    pub boxes: Vec<CygBox>,
}

/// A tree-like nested family of anisotropic boxes.
#[derive(Debug, Clone)]
pub struct CantorTree {
    root: EnumBox,
    params: CantorParams,
    levels: Vec<CantorLevel>,
    degenerate: bool,
}

/// Per-extension statistics: the retention ratio `Delta_j` of extension `j`
/// and the maximal diameter `d_{j+1}` of the level it created.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelStat {
    pub retention: f64,
    pub diameter: f64,
}

impl CantorTree {
    pub fn new(root: EnumBox, params: CantorParams) -> Result<Self> {
        if params.n < 2 {
            return Err(Error::invalid("group parameter n must be >= 2"));
        }
        if root.arity() != 2 * params.n as usize - 1 {
            return Err(Error::invalid("root arity must equal 2n - 1"));
        }
        if params.gamma < 1.0 || !(params.epsilon > 0.0) || !(params.r0 > 0.0) {
            return Err(Error::invalid(
                "construction needs gamma >= 1, epsilon > 0, r0 > 0",
            ));
        }
        Ok(CantorTree {
            root,
            params,
            levels: Vec::new(),
            degenerate: false,
        })
    }

    pub fn root(&self) -> &EnumBox {
        &self.root
    }

    pub fn params(&self) -> &CantorParams {
        &self.params
    }

    pub fn levels(&self) -> &[CantorLevel] {
        &self.levels
    }

    pub fn schedule(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.scale).collect()
    }

    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Child-box exponent `gamma + epsilon`.
    pub fn child_exponent(&self) -> f64 {
        self.params.gamma + self.params.epsilon
    }

    /// Diameter of the root region in the sup metric.
    pub fn root_diameter(&self) -> f64 {
        self.root
            .lower()
            .iter()
            .zip(self.root.upper())
            .map(|(l, u)| (u - l).to_f64().unwrap_or(f64::NAN))
            .fold(0.0, f64::max)
    }

    /// Centers of the deepest level, as float coordinate tuples.
    pub fn leaf_points(&self) -> Vec<Vec<f64>> {
        match self.levels.last() {
            Some(level) => level.boxes.iter().map(|b| b.center_f64.clone()).collect(),
            None => Vec::new(),
        }
    }

    /// Per-extension statistics consumed by [`tree_lower_bound`].
    pub fn stats(&self) -> Vec<LevelStat> {
        self.levels
            .iter()
            .map(|l| LevelStat {
                retention: l.retention,
                diameter: l.max_diameter,
            })
            .collect()
    }

    /// Lower bound on the Hausdorff dimension of the intersection, from the
    /// recorded statistics and the ambient measure-growth exponent `k`.
    pub fn lower_bound(&self, k: f64) -> Result<f64> {
        tree_lower_bound(&self.stats(), k)
    }

    fn check_schedule(&self, l_next: u64, mode: ScheduleMode) -> Result<()> {
        if l_next < 1 {
            return Err(Error::invalid("scale must be >= 1"));
        }
        if let Some(&last) = self.schedule().last() {
            if l_next <= last {
                return Err(Error::ScheduleViolation(format!(
                    "scales must increase strictly: {l_next} after {last}"
                )));
            }
        }
        if mode == ScheduleMode::Strict {
            // exact integer form of log l_{m+1} >= m^2 log(l_m .. l_1)
            let m = self.levels.len() as u32;
            if m >= 1 {
                let product: BigUint = self
                    .schedule()
                    .iter()
                    .map(|&l| BigUint::from(l))
                    .product();
                let required = product.pow(m * m);
                if BigUint::from(l_next) < required {
                    return Err(Error::ScheduleViolation(format!(
                        "strict schedule needs l >= {required}, got {l_next}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Extends the tree by one level at scale `l_next`.
    ///
    /// For every leaf box the rational points with height in
    /// `(l_next/2, l_next]` are enumerated inside the leaf (shrunk so child
    /// boxes nest), child boxes of exponent `gamma + epsilon` and scale `r0`
    /// are built around them, and children overlapping a previously kept
    /// sibling are discarded greedily in enumeration order. A leaf left with
    /// no children flags the tree degenerate and the level is not added.
    pub fn extend(&mut self, l_next: u64, mode: ScheduleMode, budget: Budget) -> Result<()> {
        if self.degenerate {
            return Err(Error::invalid("tree is degenerate; no further extension"));
        }
        self.check_schedule(l_next, mode)?;

        let gamma_child = self.child_exponent();
        let r0 = self.params.r0;
        let h_lo = l_next / 2 + 1;
        let h_hi = l_next;
        // deflation margins: the largest child radius in the band, padded so
        // that nesting survives floating-point rounding
        let pad = 1.0 + 1e-9;
        let rh_max = r0 * (h_lo as f64).powf(-gamma_child) * pad;
        let rv_max = r0 * (h_lo as f64).powf(-2.0 * gamma_child) * pad;

        enum Parent<'a> {
            Root(&'a EnumBox),
            Box(&'a CygBox),
        }

        let parents: Vec<Parent> = match self.levels.last() {
            None => vec![Parent::Root(&self.root)],
            Some(level) => level.boxes.iter().map(Parent::Box).collect(),
        };

        let deflate = |p: &Parent| -> Option<EnumBox> {
            match p {
                Parent::Root(root) => {
                    let mut lower = Vec::new();
                    let mut upper = Vec::new();
                    for i in 0..root.arity() {
                        let margin = if i + 1 == root.arity() { rv_max } else { rh_max };
                        let lo = root.lower()[i].to_f64().unwrap() + margin;
                        let hi = root.upper()[i].to_f64().unwrap() - margin;
                        if !(lo < hi) {
                            return None;
                        }
                        lower.push(BigRational::from_float(lo).unwrap());
                        upper.push(BigRational::from_float(hi).unwrap());
                    }
                    EnumBox::new(lower, upper).ok()
                }
                Parent::Box(b) => b.deflated_enum_box(rh_max, rv_max),
            }
        };

        // budget applies to the whole extension
        let estimate: f64 = parents
            .iter()
            .filter_map(|p| deflate(p).map(|bx| work_estimate(&bx, h_lo, h_hi)))
            .sum();
        if estimate > budget.0 {
            return Err(Error::ResourceBudget {
                estimate,
                budget: budget.0,
            });
        }

        struct Extension {
            kept: Vec<CygBox>,
            retention: f64,
        }

        let arity = self.root.arity();
        // cell size covers any pair of child boxes: overlap on a horizontal
        // axis needs |dc| < rh_a + rh_b <= 2 rh_max, so checking the 3x3
        // neighborhood of horizontal cells finds every possible collision
        let cell = 2.0 * rh_max;
        let results: Vec<Extension> = parents
            .par_iter()
            .map(|parent| {
                let parent_volume = match parent {
                    Parent::Root(root) => root.volume_f64(),
                    Parent::Box(b) => b.volume(),
                };
                let mut kept: Vec<CygBox> = Vec::new();
                let mut grid: std::collections::HashMap<(i64, i64), Vec<u32>> =
                    std::collections::HashMap::new();
                let mut kept_volume = 0.0;
                let mut coords = vec![0.0f64; arity];
                if let Some(region) = deflate(parent) {
                    visit_heights(&region, h_lo, h_hi, Budget::UNLIMITED, |cand: Candidate| {
                        // geometry test on plain floats first; exact
                        // coordinates materialize only for kept children
                        cand.write_coords_f64(&mut coords);
                        let h = cand.height() as f64;
                        let rh = r0 * h.powf(-gamma_child);
                        let rv = r0 * h.powf(-2.0 * gamma_child);
                        let cx = (coords[0] / cell).floor() as i64;
                        let cy = (coords[1] / cell).floor() as i64;
                        let mut disjoint_from_kept = true;
                        'scan: for dx in -1..=1 {
                            for dy in -1..=1 {
                                let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                                    continue;
                                };
                                for &idx in bucket {
                                    let s = &kept[idx as usize];
                                    let separated = (0..arity).any(|i| {
                                        let r = if i + 1 == arity { rv } else { rh };
                                        (s.center_f64[i] - coords[i]).abs()
                                            >= s.radius_on_axis(i) + r
                                    });
                                    if !separated {
                                        disjoint_from_kept = false;
                                        break 'scan;
                                    }
                                }
                            }
                        }
                        if disjoint_from_kept {
                            let child = CygBox::new(cand.to_point(), gamma_child, r0)
                                .expect("params validated at construction");
                            kept_volume += child.volume();
                            grid.entry((cx, cy)).or_default().push(kept.len() as u32);
                            kept.push(child);
                        }
                    })
                    .expect("budget pre-checked");
                }
                Extension {
                    retention: kept_volume / parent_volume,
                    kept,
                }
            })
            .collect();

        if let Some(empty) = results.iter().position(|r| r.kept.is_empty()) {
            self.degenerate = true;
            return Err(Error::DegenerateLevel {
                scale: l_next,
                parent: empty,
            });
        }

        let retention = results
            .iter()
            .map(|r| r.retention)
            .fold(f64::INFINITY, f64::min);
        let boxes: Vec<CygBox> = results.into_iter().flat_map(|r| r.kept).collect();
        let max_diameter = boxes.iter().map(CygBox::diameter).fold(0.0, f64::max);

        self.levels.push(CantorLevel {
            scale: l_next,
            retention,
            max_diameter,
            boxes,
        });
        Ok(())
    }
}

impl Serialize for CantorTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CantorTree", 6)?;
        st.serialize_field("params", &self.params)?;
        st.serialize_field("root", &self.root)?;
        st.serialize_field("schedule", &self.schedule())?;
        st.serialize_field("levels", &self.levels)?;
        st.serialize_field("stats", &self.stats())?;
        st.serialize_field("degenerate", &self.degenerate)?;
        st.end()
    }
}

/// Outcome of checking the four tree-like conditions on a constructed tree:
/// a single root, within-level disjointness, nesting of each level in the
/// previous one, and strictly decreasing diameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TreeConditions {
    pub single_root: bool,
    pub levels_disjoint: bool,
    pub nested: bool,
    pub diameters_decrease: bool,
}

impl TreeConditions {
    pub fn all_hold(&self) -> bool {
        self.single_root && self.levels_disjoint && self.nested && self.diameters_decrease
    }
}

/// Checks the tree-like conditions directly from the stored boxes.
pub fn check_tree_conditions(tree: &CantorTree) -> TreeConditions {
    let root_lower: Vec<f64> = tree.root().lower().iter().map(|r| r.to_f64().unwrap()).collect();
    let root_upper: Vec<f64> = tree.root().upper().iter().map(|r| r.to_f64().unwrap()).collect();

    let in_root = |b: &CygBox| {
        (0..b.arity()).all(|i| {
            let r = b.radius_on_axis(i);
            b.center_f64()[i] - r >= root_lower[i] && b.center_f64()[i] + r <= root_upper[i]
        })
    };

    let mut levels_disjoint = true;
    for level in tree.levels() {
        if level.boxes.is_empty() {
            levels_disjoint = false;
            continue;
        }
        // bucket boxes by horizontal cell; a colliding pair must share a
        // 3x3 cell neighborhood once the cell covers two horizontal radii
        let rh_max = level
            .boxes
            .iter()
            .map(CygBox::horizontal_radius)
            .fold(0.0, f64::max);
        let cell = 2.0 * rh_max;
        let mut grid: std::collections::HashMap<(i64, i64), Vec<u32>> =
            std::collections::HashMap::new();
        'level: for (idx, b) in level.boxes.iter().enumerate() {
            let cx = (b.center_f64()[0] / cell).floor() as i64;
            let cy = (b.center_f64()[1] / cell).floor() as i64;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                        continue;
                    };
                    for &j in bucket {
                        if !b.disjoint_from(&level.boxes[j as usize]) {
                            levels_disjoint = false;
                            break 'level;
                        }
                    }
                }
            }
            grid.entry((cx, cy)).or_default().push(idx as u32);
        }
    }

    let mut nested = true;
    for (depth, level) in tree.levels().iter().enumerate() {
        if depth == 0 {
            nested &= level.boxes.iter().all(in_root);
        } else {
            let parents = &tree.levels()[depth - 1].boxes;
            nested &= level
                .boxes
                .par_iter()
                .all(|b| parents.iter().any(|p| p.contains_box(b)));
        }
    }

    let mut diameters = vec![tree.root_diameter()];
    diameters.extend(tree.levels().iter().map(|l| l.max_diameter));
    let diameters_decrease = diameters.windows(2).all(|w| w[1] < w[0]);

    TreeConditions {
        single_root: tree.root().arity() == 2 * tree.params().n as usize - 1,
        levels_disjoint,
        nested,
        diameters_decrease,
    }
}

/// Lower bound `k - max_j (sum_{i<=j} log(1/Delta_i)) / log(1/d_{j+1})`
/// from per-extension statistics, the finite-level proxy of the limsup form.
///
/// Needs at least one extension; every retention must lie in `(0, 1]` (a
/// zero retention degenerates the bound) and diameters must decrease
/// strictly and lie in `(0, 1)`.
pub fn tree_lower_bound(stats: &[LevelStat], k: f64) -> Result<f64> {
    let logs: Vec<(f64, f64)> = stats
        .iter()
        .map(|s| {
            if !(s.retention > 0.0) {
                return Err(Error::invalid("retention ratio must be positive"));
            }
            if s.retention > 1.0 {
                return Err(Error::invalid("retention ratio must be <= 1"));
            }
            if !(s.diameter > 0.0 && s.diameter < 1.0) {
                return Err(Error::invalid("diameters must lie in (0, 1)"));
            }
            Ok((-s.retention.log2(), -s.diameter.log2()))
        })
        .collect::<Result<_>>()?;
    tree_lower_bound_from_logs(&logs, k)
}

/// Log-space form of [`tree_lower_bound`]: entry `j` carries
/// `(log2(1/Delta_j), log2(1/d_{j+1}))`. Usable when the retention ratios
/// themselves would underflow.
pub fn tree_lower_bound_from_logs(logs: &[(f64, f64)], k: f64) -> Result<f64> {
    if logs.is_empty() {
        return Err(Error::invalid("lower bound needs at least one extension"));
    }
    if !(k > 0.0) {
        return Err(Error::invalid("ambient exponent k must be positive"));
    }
    let mut prev_diam_log = 0.0;
    let mut cum = 0.0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for &(log_inv_delta, log_inv_diam) in logs {
        if log_inv_delta < 0.0 {
            return Err(Error::invalid("retention ratio must be <= 1"));
        }
        if log_inv_diam <= prev_diam_log {
            return Err(Error::invalid("diameters must decrease strictly"));
        }
        prev_diam_log = log_inv_diam;
        cum += log_inv_delta;
        worst = worst.max(cum / log_inv_diam);
    }
    Ok(k - worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn unit_cube3() -> EnumBox {
        EnumBox::unit_cube(3).unwrap()
    }

    #[test]
    fn cover_of_the_height_two_band() {
        let boxes = build_cover(&unit_cube3(), 2.0, 1, 2, 1.0, Budget::UNLIMITED).unwrap();
        assert_eq!(boxes.len(), 7);
        for b in &boxes {
            assert_eq!(b.height(), 2);
            assert!((b.horizontal_radius() - 0.25).abs() < 1e-15);
            assert!((b.vertical_radius() - 0.0625).abs() < 1e-15);
        }
    }

    #[test]
    fn cover_with_empty_height_range_is_empty() {
        let boxes = build_cover(&unit_cube3(), 2.0, 5, 5, 1.0, Budget::UNLIMITED).unwrap();
        assert!(boxes.is_empty());
        let boxes = build_cover(&unit_cube3(), 2.0, 9, 5, 1.0, Budget::UNLIMITED).unwrap();
        assert!(boxes.is_empty());
    }

    #[test]
    fn cover_heights_stay_in_range() {
        let boxes = build_cover(&unit_cube3(), 1.0, 2, 6, 0.5, Budget::UNLIMITED).unwrap();
        assert!(!boxes.is_empty());
        for b in &boxes {
            assert!(b.height() > 2 && b.height() <= 6);
        }
    }

    #[test]
    fn vertical_radius_is_squared_horizontal_up_to_scale() {
        let p = RationalPoint::from_pairs(&[(1, 3), (0, 1), (2, 3)]).unwrap();
        let b = CygBox::new(p, 1.5, 0.5).unwrap();
        let expected = b.horizontal_radius() * b.horizontal_radius() / 0.5;
        assert!((b.vertical_radius() - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn subdivision_counts() {
        let half = RationalPoint::from_pairs(&[(1, 2), (0, 1), (0, 1)]).unwrap();
        // h = 2, gamma = 2: ceil(h^gamma)^(2n-2) = 16
        let b = CygBox::new(half.clone(), 2.0, 1.0).unwrap();
        assert_eq!(subdivide_count(&b).unwrap(), 16);
        // height 1: radii coincide, a single cube
        let origin = RationalPoint::from_pairs(&[(0, 1), (0, 1), (0, 1)]).unwrap();
        let b = CygBox::new(origin, 2.0, 1.0).unwrap();
        assert_eq!(subdivide_count(&b).unwrap(), 1);
        // arity 5 (n = 3), h = 2, gamma = 1: 2^4
        let p5 = RationalPoint::from_pairs(&[(1, 2), (0, 1), (0, 1), (0, 1), (0, 1)]).unwrap();
        let b = CygBox::new(p5, 1.0, 1.0).unwrap();
        assert_eq!(subdivide_count(&b).unwrap(), 16);
    }

    fn small_tree(gamma: f64, epsilon: f64, r0: f64) -> CantorTree {
        let params = CantorParams {
            gamma,
            epsilon,
            r0,
            n: 2,
        };
        CantorTree::new(unit_cube3(), params).unwrap()
    }

    #[test]
    fn first_extension_keeps_disjoint_children() {
        let mut tree = small_tree(1.0, 0.1, 0.25);
        tree.extend(8, ScheduleMode::Strict, Budget::UNLIMITED).unwrap();
        let level = &tree.levels()[0];
        assert!(!level.boxes.is_empty());
        for (i, a) in level.boxes.iter().enumerate() {
            for b in &level.boxes[i + 1..] {
                assert!(a.disjoint_from(b), "kept children must be pairwise disjoint");
            }
        }
        assert!(level.retention > 0.0 && level.retention <= 1.0);
        let conditions = check_tree_conditions(&tree);
        assert!(conditions.all_hold(), "{conditions:?}");
    }

    #[test]
    fn retention_matches_definition_for_uniform_child_heights() {
        // scale 2 makes every child height exactly 2, so the recorded ratio
        // must equal kept * child_volume / parent_volume
        let mut tree = small_tree(1.0, 0.5, 0.2);
        tree.extend(2, ScheduleMode::Strict, Budget::UNLIMITED).unwrap();
        let level = &tree.levels()[0];
        assert!(level.boxes.iter().all(|b| b.height() == 2));
        let child_volume = level.boxes[0].volume();
        let expected = level.boxes.len() as f64 * child_volume / 1.0;
        assert!((level.retention - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn schedule_is_enforced_exactly_in_strict_mode() {
        let mut tree = small_tree(1.0, 0.1, 0.25);
        tree.extend(2, ScheduleMode::Strict, Budget::UNLIMITED).unwrap();
        tree.extend(16, ScheduleMode::Strict, Budget::UNLIMITED).unwrap();
        assert_eq!(tree.depth(), 2);
        // third extension needs l >= (2*16)^4 = 1048576 in strict mode
        let err = tree
            .clone()
            .extend(1_048_575, ScheduleMode::Strict, Budget::UNLIMITED)
            .unwrap_err();
        assert!(matches!(err, Error::ScheduleViolation(_)), "{err}");
        // the budget gate rejects the compliant scale long before any work
        let err = tree
            .clone()
            .extend(1_048_576, ScheduleMode::Strict, Budget::new(1e6))
            .unwrap_err();
        assert!(matches!(err, Error::ResourceBudget { .. }), "{err}");
        // non-increasing scales are rejected in either mode
        let err = tree
            .clone()
            .extend(16, ScheduleMode::Relaxed, Budget::UNLIMITED)
            .unwrap_err();
        assert!(matches!(err, Error::ScheduleViolation(_)));
    }

    #[test]
    fn starved_leaves_flag_a_degenerate_level() {
        // r0 so small that no rational of moderate height fits in any leaf
        let mut tree = small_tree(1.0, 0.1, 0.01);
        tree.extend(2, ScheduleMode::Strict, Budget::UNLIMITED).unwrap();
        let err = tree.extend(8, ScheduleMode::Strict, Budget::UNLIMITED).unwrap_err();
        assert!(matches!(err, Error::DegenerateLevel { .. }), "{err}");
        assert!(tree.degenerate());
        assert_eq!(tree.depth(), 1, "partial tree survives");
        assert!(tree.extend(16, ScheduleMode::Strict, Budget::UNLIMITED).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        // no mass lost: the bound is the ambient exponent
        let stats = [
            LevelStat { retention: 1.0, diameter: 0.5 },
            LevelStat { retention: 1.0, diameter: 0.25 },
        ];
        assert_eq!(tree_lower_bound(&stats, 3.0).unwrap(), 3.0);

        // single ratio 1/4 at diameter 1/16: 3 - log 4 / log 16 = 2.5, exact
        // because the logs are dyadic
        let stats = [LevelStat { retention: 0.25, diameter: 0.0625 }];
        assert_eq!(tree_lower_bound(&stats, 3.0).unwrap(), 2.5);
    }

    #[test]
    fn lower_bound_never_drops_when_a_full_level_is_added() {
        let base = vec![
            LevelStat { retention: 0.3, diameter: 0.125 },
            LevelStat { retention: 0.2, diameter: 0.015 },
        ];
        let before = tree_lower_bound(&base, 3.0).unwrap();
        let mut extended = base.clone();
        extended.push(LevelStat { retention: 1.0, diameter: 0.001 });
        let after = tree_lower_bound(&extended, 3.0).unwrap();
        assert!(after >= before);
    }

    #[test]
    fn lower_bound_rejects_bad_stats() {
        assert!(tree_lower_bound(&[], 3.0).is_err());
        let zero = [LevelStat { retention: 0.0, diameter: 0.5 }];
        assert!(tree_lower_bound(&zero, 3.0).is_err());
        let widening = [
            LevelStat { retention: 0.5, diameter: 0.25 },
            LevelStat { retention: 0.5, diameter: 0.5 },
        ];
        assert!(tree_lower_bound(&widening, 3.0).is_err());
    }

    #[test]
    fn synthetic_schedule_converges_to_the_closed_form() {
        // schedule in log2 space with steep growth: every ratio equals the
        // asymptotic value up to 1/growth
        let n = 2u32;
        for gamma in [1.5f64, 2.0, 3.0] {
            let gp = gamma + 0.1;
            let mut log_l = 3.0f64; // log2 l_1 = 3
            let mut sum_log = 0.0;
            let mut logs = Vec::new();
            for j in 0..6u32 {
                if j > 0 {
                    let growth = ((j * j) as f64).max(64.0);
                    log_l = growth * sum_log;
                }
                sum_log += log_l;
                logs.push((2.0 * n as f64 * (gp - 1.0) * log_l, 2.0 * gp * log_l));
            }
            let bound = tree_lower_bound_from_logs(&logs, (2 * n - 1) as f64).unwrap();
            let expected = (1.0 + gp) / gp * n as f64 - 1.0;
            assert!(
                (bound - expected).abs() < 0.05,
                "gamma={gamma}: bound {bound} vs limit {expected}"
            );
        }
    }

    #[test]
    fn cover_box_enum_box_roundtrip_contains_center() {
        let p = RationalPoint::from_pairs(&[(1, 2), (1, 2), (1, 2)]).unwrap();
        let b = CygBox::new(p.clone(), 2.0, 1.0).unwrap();
        let region = b.to_enum_box().unwrap();
        assert!(region.contains(p.coords()));
        assert!(b.contains_coords(&p.coords_f64()));
        assert_eq!(region.arity(), 3);
    }

    #[test]
    fn tree_rejects_bad_parameters() {
        let params = CantorParams { gamma: 0.5, epsilon: 0.1, r0: 0.25, n: 2 };
        assert!(CantorTree::new(unit_cube3(), params).is_err());
        let params = CantorParams { gamma: 2.0, epsilon: 0.1, r0: 0.25, n: 3 };
        assert!(CantorTree::new(unit_cube3(), params).is_err());
        let boxes = build_cover(&unit_cube3(), 0.5, 1, 2, 1.0, Budget::UNLIMITED);
        assert!(boxes.is_err());
        assert!(rat(1, 2) < rat(1, 1)); // keep the helper exercised
    }
}
