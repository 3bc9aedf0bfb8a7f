//! Plane geometry under the Chebyshev norm: the metric itself, midpoint
//! boxes, corner domains bounded below by a unit-circle arc, and the dumbbell
//! neck space assembled from reflected copies of those domains.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance for closed-set membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Hard cap on the width and height of a corner domain.
pub const CORNER_SIZE_LIMIT: f64 = 1.0 / 64.0;

/// A position in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Shorthand constructor.
pub fn point(x: f64, y: f64) -> Point {
    Point { x, y }
}

impl Point {
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// l∞ (Chebyshev) distance: the larger of the coordinate gaps.
pub fn linf_dist(p: Point, q: Point) -> f64 {
    (p.x - q.x).abs().max((p.y - q.y).abs())
}

/// Closed axis-aligned box, possibly degenerate to a segment or a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Box2 {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Box2 {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Box2 {
        Box2 { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn center(&self) -> Point {
        point(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p.x >= self.x0 - tol && p.x <= self.x1 + tol && p.y >= self.y0 - tol && p.y <= self.y1 + tol
    }

    pub fn intersects(&self, other: &Box2) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    /// Grow the box by `m` on every side.
    pub fn padded(&self, m: f64) -> Box2 {
        Box2::new(self.x0 - m, self.x1 + m, self.y0 - m, self.y1 + m)
    }
}

/// The set of l∞ midpoints of `p` and `q`.
///
/// Always an axis-aligned box: a vertical segment when the pair moves more
/// horizontally, a horizontal segment when it moves more vertically, a single
/// point for diagonal pairs and for `p == q`. Membership in the returned box
/// is equivalent to the two defining distance equalities.
pub fn mid_region(p: Point, q: Point) -> Box2 {
    let adx = (p.x - q.x).abs();
    let ady = (p.y - q.y).abs();
    let theta = adx.max(ady);
    if theta == 0.0 {
        return Box2::new(p.x, p.x, p.y, p.y);
    }
    let half = 0.5 * theta;
    if adx >= ady {
        let mx = 0.5 * (p.x + q.x);
        Box2::new(mx, mx, p.y.max(q.y) - half, p.y.min(q.y) + half)
    } else {
        let my = 0.5 * (p.y + q.y);
        Box2::new(p.x.max(q.x) - half, p.x.min(q.x) + half, my, my)
    }
}

/// A region of the plane that is an interval in `y` over every vertical line.
///
/// This is all the structure the measure pipeline needs: exact membership,
/// a bounding box, and the `y`-interval per abscissa for slice integration.
pub trait PlanarRegion {
    fn contains(&self, p: Point) -> bool;
    fn bbox(&self) -> Box2;
    /// The closed `y`-interval of the region over `x`, or `None` when the
    /// vertical line misses the region.
    fn y_span(&self, x: f64) -> Option<(f64, f64)>;

    /// Whether the region meets the closed box. Exact for the region kinds in
    /// this crate (each `y_span` endpoint is monotone or unimodal in `x`).
    fn intersects_box(&self, b: &Box2) -> bool {
        if !self.bbox().intersects(b) {
            return false;
        }
        // Sample columns densely enough for the region kinds used here; exact
        // overrides are provided where it matters.
        let n = 64;
        for k in 0..=n {
            let x = b.x0 + (b.x1 - b.x0) * (k as f64) / (n as f64);
            if let Some((lo, hi)) = self.y_span(x) {
                if lo <= b.y1 && b.y0 <= hi {
                    return true;
                }
            }
        }
        false
    }

    /// Area of `box ∩ region` by slice integration (overridden exactly for
    /// rectangles and the whole plane).
    fn overlap_area(&self, b: &Box2) -> f64 {
        self.clip_moments(b).0
    }

    /// Geometric centroid of `box ∩ region`, or `None` when the overlap has
    /// zero area.
    fn clip_centroid(&self, b: &Box2) -> Option<Point> {
        let (area, mx, my) = self.clip_moments(b);
        if area > 0.0 {
            Some(point(mx / area, my / area))
        } else {
            None
        }
    }

    /// `(area, ∫x, ∫y)` of `box ∩ region` by composite Simpson slice
    /// integration over `x`. The regions in this crate have smooth, nearly
    /// flat span boundaries at cell scale, so a fixed panel count is ample.
    fn clip_moments(&self, b: &Box2) -> (f64, f64, f64) {
        if b.x1 <= b.x0 || b.y1 <= b.y0 || !self.bbox().intersects(b) {
            return (0.0, 0.0, 0.0);
        }
        let panels = 64usize;
        let dx = (b.x1 - b.x0) / panels as f64;
        let eval = |x: f64| -> (f64, f64) {
            match self.y_span(x) {
                Some((lo, hi)) => {
                    let lo = lo.max(b.y0);
                    let hi = hi.min(b.y1);
                    if hi > lo {
                        (hi - lo, 0.5 * (hi * hi - lo * lo))
                    } else {
                        (0.0, 0.0)
                    }
                }
                None => (0.0, 0.0),
            }
        };
        let mut area = 0.0;
        let mut mx = 0.0;
        let mut my = 0.0;
        for k in 0..panels {
            let x0 = b.x0 + k as f64 * dx;
            let xm = x0 + 0.5 * dx;
            let x1 = x0 + dx;
            let (h0, g0) = eval(x0);
            let (hm, gm) = eval(xm);
            let (h1, g1) = eval(x1);
            area += dx / 6.0 * (h0 + 4.0 * hm + h1);
            mx += dx / 6.0 * (x0 * h0 + 4.0 * xm * hm + x1 * h1);
            my += dx / 6.0 * (g0 + 4.0 * gm + g1);
        }
        (area, mx, my)
    }
}

/// The whole plane.
#[derive(Clone, Copy, Debug)]
pub struct WholePlane;

impl PlanarRegion for WholePlane {
    fn contains(&self, _p: Point) -> bool {
        true
    }
    fn bbox(&self) -> Box2 {
        Box2::new(f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY)
    }
    fn y_span(&self, _x: f64) -> Option<(f64, f64)> {
        Some((f64::NEG_INFINITY, f64::INFINITY))
    }
    fn intersects_box(&self, _b: &Box2) -> bool {
        true
    }
    fn clip_moments(&self, b: &Box2) -> (f64, f64, f64) {
        let area = b.area();
        let c = b.center();
        (area, c.x * area, c.y * area)
    }
}

/// A closed axis-aligned rectangle region.
#[derive(Clone, Copy, Debug)]
pub struct RectRegion(pub Box2);

impl PlanarRegion for RectRegion {
    fn contains(&self, p: Point) -> bool {
        self.0.contains(p, MEMBERSHIP_TOL)
    }
    fn bbox(&self) -> Box2 {
        self.0
    }
    fn y_span(&self, x: f64) -> Option<(f64, f64)> {
        if x >= self.0.x0 && x <= self.0.x1 {
            Some((self.0.y0, self.0.y1))
        } else {
            None
        }
    }
    fn intersects_box(&self, b: &Box2) -> bool {
        self.0.intersects(b)
    }
    fn clip_moments(&self, b: &Box2) -> (f64, f64, f64) {
        let i = Box2::new(
            b.x0.max(self.0.x0),
            b.x1.min(self.0.x1),
            b.y0.max(self.0.y0),
            b.y1.min(self.0.y1),
        );
        if i.x1 <= i.x0 || i.y1 <= i.y0 {
            return (0.0, 0.0, 0.0);
        }
        let area = i.area();
        let c = i.center();
        (area, c.x * area, c.y * area)
    }
}

/// One violated corner-domain constraint with a witness point and the signed
/// margin (negative or zero means violated).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintViolation {
    pub constraint: String,
    pub witness_x: f64,
    pub witness_y: f64,
    pub margin: f64,
}

/// The local domain bounded below by the upper arc of a unit circle.
///
/// The domain is `{(x, y) : a ≤ x ≤ b, S(x) ≤ y ≤ d + (b−a)/2}` where
/// `S(x) = yc + sqrt(1 − (x−xc)²)` projects vertically onto the arc. The
/// fields `c` and `d` record the vertical extent used by the size
/// constraints: both the width `b−a` and the height `d + (b−a)/2 − c` must
/// stay below 1/64, and the circle center must satisfy the eccentricity
/// bound `|x − xc| < (y − yc)/2` throughout the domain.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CornerDomain {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub xc: f64,
    pub yc: f64,
}

impl CornerDomain {
    pub fn new(a: f64, b: f64, c: f64, d: f64, xc: f64, yc: f64) -> Result<CornerDomain> {
        for v in [a, b, c, d, xc, yc] {
            if !v.is_finite() {
                return Err(Error::InvalidDomain("non-finite corner-domain field".into()));
            }
        }
        if a >= b {
            return Err(Error::InvalidDomain(format!("requires a < b, got a={a}, b={b}")));
        }
        Ok(CornerDomain { a, b, c, d, xc, yc })
    }

    /// The documented default domain: symmetric about the top of the arc,
    /// comfortably inside the 1/64 size constraints.
    pub fn demo() -> CornerDomain {
        CornerDomain {
            a: -0.005,
            b: 0.005,
            c: -0.002,
            d: 0.005,
            xc: 0.0,
            yc: -1.0,
        }
    }

    /// The flat upper edge of the domain.
    pub fn top(&self) -> f64 {
        self.d + 0.5 * (self.b - self.a)
    }

    /// Vertical projection onto the circular lower boundary, `S(x)`.
    ///
    /// Errors when `x` falls outside `[a, b]` or the arc is not reachable.
    pub fn lower_boundary(&self, x: f64) -> Result<f64> {
        if !(x >= self.a - MEMBERSHIP_TOL && x <= self.b + MEMBERSHIP_TOL) {
            return Err(Error::OutsideRange { value: x, lo: self.a, hi: self.b });
        }
        let dx = x - self.xc;
        if dx.abs() >= 1.0 {
            return Err(Error::InvalidDomain(format!(
                "arc not reachable from x={x}: |x - xc| = {} >= 1",
                dx.abs()
            )));
        }
        Ok(self.yc + (1.0 - dx * dx).sqrt())
    }

    /// `S(x)` without the range check; used internally where `x` is already
    /// clamped to `[a, b]`.
    pub(crate) fn boundary_unchecked(&self, x: f64) -> f64 {
        let dx = x - self.xc;
        self.yc + (1.0 - (dx * dx).min(1.0)).sqrt()
    }

    /// Closed membership with absolute tolerance [`MEMBERSHIP_TOL`].
    pub fn contains(&self, p: Point) -> bool {
        if p.x < self.a - MEMBERSHIP_TOL || p.x > self.b + MEMBERSHIP_TOL {
            return false;
        }
        if p.y > self.top() + MEMBERSHIP_TOL {
            return false;
        }
        p.y >= self.boundary_unchecked(p.x.clamp(self.a, self.b)) - MEMBERSHIP_TOL
    }

    /// Check every domain constraint on the given grid and report each
    /// violation with a witness point. An empty report means the domain is
    /// valid at this resolution.
    pub fn validate(&self, grid_step: f64) -> Result<Vec<ConstraintViolation>> {
        if !(grid_step > 0.0) {
            return Err(Error::Precondition(format!("grid_step must be positive, got {grid_step}")));
        }
        let mut report = Vec::new();
        let width = self.b - self.a;
        let top = self.top();
        let height = top - self.c;

        let width_margin = CORNER_SIZE_LIMIT - width;
        if width_margin <= 0.0 {
            report.push(ConstraintViolation {
                constraint: "width_limit".into(),
                witness_x: self.b,
                witness_y: top,
                margin: width_margin,
            });
        }
        let height_margin = CORNER_SIZE_LIMIT - height;
        if height_margin <= 0.0 {
            report.push(ConstraintViolation {
                constraint: "height_limit".into(),
                witness_x: self.b,
                witness_y: top,
                margin: height_margin,
            });
        }

        let reach_a = 1.0 - (self.a - self.xc).abs();
        let reach_b = 1.0 - (self.b - self.xc).abs();
        let (reach_margin, reach_x) = if reach_a <= reach_b { (reach_a, self.a) } else { (reach_b, self.b) };
        if reach_margin <= 0.0 {
            report.push(ConstraintViolation {
                constraint: "arc_reach".into(),
                witness_x: reach_x,
                witness_y: self.c,
                margin: reach_margin,
            });
            // S is undefined past the arc ends; the remaining checks need it.
            return Ok(report);
        }

        let nx = ((width / grid_step).ceil() as usize).clamp(1, 4096);
        let ny = (((height.max(grid_step)) / grid_step).ceil() as usize).clamp(1, 4096);
        let xs: Vec<f64> = (0..=nx).map(|k| self.a + width * (k as f64) / (nx as f64)).collect();
        let ys: Vec<f64> = (0..=ny).map(|k| self.c + height * (k as f64) / (ny as f64)).collect();

        // Eccentricity bound at every bounding-box vertex and grid point.
        let mut min_margin = f64::INFINITY;
        let mut witness = point(self.a, self.c);
        for &x in &xs {
            for &y in &ys {
                let m = 0.5 * (y - self.yc) - (x - self.xc).abs();
                if m < min_margin {
                    min_margin = m;
                    witness = point(x, y);
                }
            }
        }
        if min_margin <= 0.0 {
            report.push(ConstraintViolation {
                constraint: "center_offset_bound".into(),
                witness_x: witness.x,
                witness_y: witness.y,
                margin: min_margin,
            });
        }

        // Chord bound: S(mid) - (S(x1)+S(x2))/2 <= (x1-x2)^2 / 2.
        let mut worst = f64::NEG_INFINITY;
        let mut chord_witness = point(self.a, self.c);
        for (i, &x1) in xs.iter().enumerate() {
            for &x2 in &xs[i..] {
                let mid = 0.5 * (x1 + x2);
                let gap = self.boundary_unchecked(mid)
                    - 0.5 * (self.boundary_unchecked(x1) + self.boundary_unchecked(x2));
                let excess = gap - 0.5 * (x1 - x2) * (x1 - x2);
                if excess > worst {
                    worst = excess;
                    chord_witness = point(mid, self.boundary_unchecked(mid));
                }
            }
        }
        if worst > 1e-12 {
            report.push(ConstraintViolation {
                constraint: "chord_midpoint_bound".into(),
                witness_x: chord_witness.x,
                witness_y: chord_witness.y,
                margin: -worst,
            });
        }

        Ok(report)
    }
}

/// A corner domain seen as a planar region (above the arc, below the top).
#[derive(Clone, Copy, Debug)]
pub struct CornerRegion(pub CornerDomain);

impl PlanarRegion for CornerRegion {
    fn contains(&self, p: Point) -> bool {
        self.0.contains(p)
    }
    fn bbox(&self) -> Box2 {
        Box2::new(self.0.a, self.0.b, self.0.c, self.0.top())
    }
    fn y_span(&self, x: f64) -> Option<(f64, f64)> {
        if x < self.0.a - MEMBERSHIP_TOL || x > self.0.b + MEMBERSHIP_TOL {
            return None;
        }
        let lo = self.0.boundary_unchecked(x.clamp(self.0.a, self.0.b));
        let hi = self.0.top();
        if lo <= hi {
            Some((lo, hi))
        } else {
            None
        }
    }
    fn intersects_box(&self, b: &Box2) -> bool {
        if !self.bbox().intersects(b) {
            return false;
        }
        let x0 = b.x0.max(self.0.a);
        let x1 = b.x1.min(self.0.b);
        if x0 > x1 {
            return false;
        }
        if b.y0 > self.0.top() {
            return false;
        }
        // S is concave with its minimum over [x0, x1] at an endpoint.
        let min_s = self.0.boundary_unchecked(x0).min(self.0.boundary_unchecked(x1));
        min_s <= b.y1
    }
}

/// Reflections applied to a corner domain when embedding it into the neck
/// space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reflection {
    pub flip_x: bool,
    pub flip_y: bool,
}

/// Parameters of the dumbbell space: two blocks joined by a thin corridor
/// whose concave transitions are unit-circle arcs continued by straight
/// ramps of sub-unit slope.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NeckParams {
    /// Height of the corridor at its narrowest section.
    pub neck_height: f64,
    /// Distance between the two block corners (full corridor length).
    pub neck_length: f64,
    /// Half-length of the flat narrow section around the center.
    pub flat_half_length: f64,
    /// Slope at which the straight ramps leave the arcs; must stay below 1
    /// so that midpoints always exist, and below ~0.447 so that the arc
    /// pieces satisfy the corner-domain eccentricity bound.
    pub ramp_slope: f64,
}

impl Default for NeckParams {
    fn default() -> Self {
        NeckParams {
            neck_height: 0.004,
            neck_length: 2.2,
            flat_half_length: 0.15,
            ramp_slope: 0.4,
        }
    }
}

/// The assembled dumbbell space.
///
/// Membership is `|y| ≤ P(|x|)` where the half-profile `P` is flat at `h/2`
/// on the narrow section, follows a unit-circle arc up to `ramp_slope`, rises
/// along a straight ramp to the block corner, and is flat at `s/2` across the
/// block. The four stored corner domains are the un-reflected local models of
/// the arc transitions; `reflections` records where each copy sits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NeckSpace {
    pub left_block: Box2,
    pub right_block: Box2,
    pub neck_height: f64,
    pub neck_length: f64,
    pub corner_domains: [CornerDomain; 4],
    pub reflections: [Reflection; 4],
    flat_half: f64,
    arc_end: f64,
    corner_x: f64,
    ramp_slope: f64,
    block_side: f64,
}

impl NeckSpace {
    pub fn build(p: NeckParams) -> Result<NeckSpace> {
        let h = p.neck_height;
        let l = p.neck_length;
        if !(h > 0.0) || !(l > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "neck height and length must be positive, got h={h}, l={l}"
            )));
        }
        if h >= CORNER_SIZE_LIMIT {
            return Err(Error::InvalidDomain(format!(
                "neck height {h} too large for valid corner transitions (needs < {CORNER_SIZE_LIMIT})"
            )));
        }
        let sigma = p.ramp_slope;
        if !(sigma > 0.0 && sigma < 0.447) {
            return Err(Error::InvalidDomain(format!(
                "ramp slope must lie in (0, 0.447), got {sigma}"
            )));
        }
        let x_t = p.flat_half_length;
        let arc_dx = sigma / (1.0 + sigma * sigma).sqrt();
        let x_r = x_t + arc_dx;
        let x_b = 0.5 * l;
        if !(x_t > 0.0) || x_r >= x_b {
            return Err(Error::InvalidDomain(format!(
                "corridor too short: needs neck_length/2 > flat_half_length + {arc_dx:.4}"
            )));
        }
        let arc_top = 0.5 * h + 1.0 - 1.0 / (1.0 + sigma * sigma).sqrt();
        let half_side = arc_top + sigma * (x_b - x_r);
        let s = 2.0 * half_side;

        let left_block = Box2::new(-x_b - s, -x_b, -half_side, half_side);
        let right_block = Box2::new(x_b, x_b + s, -half_side, half_side);

        // Un-reflected local model of the transition arc, one patch per
        // corner, centered at the tangency with the flat neck edge.
        let patch_w = 1.0 / 128.0;
        let yc = -0.5 * h - 1.0;
        let make_patch = |xc: f64| -> Result<CornerDomain> {
            let a = xc;
            let b = xc + patch_w;
            let min_s = yc + (1.0 - patch_w * patch_w).sqrt();
            let c = min_s - 1e-6;
            let top = (0.5 * h).min(c + CORNER_SIZE_LIMIT - 1e-9);
            let d = top - 0.5 * (b - a);
            CornerDomain::new(a, b, c, d, xc, yc)
        };
        let br = make_patch(x_t)?;
        let bl = make_patch(-x_t - patch_w)?;
        let corner_domains = [br, bl, br, bl];
        let reflections = [
            Reflection { flip_x: false, flip_y: false },
            Reflection { flip_x: true, flip_y: false },
            Reflection { flip_x: false, flip_y: true },
            Reflection { flip_x: true, flip_y: true },
        ];

        Ok(NeckSpace {
            left_block,
            right_block,
            neck_height: h,
            neck_length: l,
            corner_domains,
            reflections,
            flat_half: x_t,
            arc_end: x_r,
            corner_x: x_b,
            ramp_slope: sigma,
            block_side: s,
        })
    }

    pub fn block_side(&self) -> f64 {
        self.block_side
    }

    /// Half-height of the space over `|x|`, or `None` beyond the blocks.
    pub fn half_profile(&self, ax: f64) -> Option<f64> {
        if ax < 0.0 {
            return self.half_profile(-ax);
        }
        if ax <= self.flat_half {
            Some(0.5 * self.neck_height)
        } else if ax <= self.arc_end {
            let dx = ax - self.flat_half;
            Some(0.5 * self.neck_height + 1.0 - (1.0 - dx * dx).sqrt())
        } else if ax <= self.corner_x {
            let arc_top = 0.5 * self.neck_height + 1.0
                - (1.0 - (self.arc_end - self.flat_half).powi(2)).sqrt();
            Some(arc_top + self.ramp_slope * (ax - self.arc_end))
        } else if ax <= self.corner_x + self.block_side {
            Some(0.5 * self.block_side)
        } else {
            None
        }
    }

    /// Closed membership with tolerance [`MEMBERSHIP_TOL`].
    pub fn contains(&self, p: Point) -> bool {
        let ax = p.x.abs();
        if ax > self.corner_x + self.block_side + MEMBERSHIP_TOL {
            return false;
        }
        let ax = ax.min(self.corner_x + self.block_side);
        match self.half_profile(ax) {
            Some(half) => p.y.abs() <= half + MEMBERSHIP_TOL,
            None => false,
        }
    }

    pub fn bbox(&self) -> Box2 {
        let x_max = self.corner_x + self.block_side;
        Box2::new(-x_max, x_max, -0.5 * self.block_side, 0.5 * self.block_side)
    }

    /// Validate the embedded corner domains and the profile invariants.
    pub fn validate(&self, grid_step: f64) -> Result<Vec<ConstraintViolation>> {
        let mut all = Vec::new();
        for cd in &self.corner_domains {
            all.extend(cd.validate(grid_step)?);
        }
        Ok(all)
    }
}

impl PlanarRegion for NeckSpace {
    fn contains(&self, p: Point) -> bool {
        NeckSpace::contains(self, p)
    }
    fn bbox(&self) -> Box2 {
        NeckSpace::bbox(self)
    }
    fn y_span(&self, x: f64) -> Option<(f64, f64)> {
        self.half_profile(x.abs()).map(|h| (-h, h))
    }
    fn intersects_box(&self, b: &Box2) -> bool {
        if !self.bbox().intersects(b) {
            return false;
        }
        // P(|x|) is nondecreasing in |x|, so its maximum over the box's
        // x-range sits at the abscissa of largest magnitude.
        let ax_max = if b.x0 <= 0.0 && b.x1 >= 0.0 {
            b.x1.abs().max(b.x0.abs())
        } else {
            b.x0.abs().max(b.x1.abs())
        };
        let ax_max = ax_max.min(self.corner_x + self.block_side);
        let beta = b.y0.max(-b.y1);
        match self.half_profile(ax_max) {
            Some(h) => beta <= h + MEMBERSHIP_TOL,
            None => false,
        }
    }
}

/// Outcome of the weak-convexity sampling check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub samples: usize,
    pub with_midpoint: usize,
    pub fraction: f64,
    /// A few witnesses of pairs whose midpoint set misses the region.
    pub failures: Vec<(Point, Point)>,
}

/// Sample point pairs from `region` and report the fraction whose l∞
/// midpoint box meets the region. A weakly geodesically convex region must
/// report exactly 1.0.
pub fn weak_convexity_fraction<R: PlanarRegion>(
    region: &R,
    n_samples: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    if n_samples == 0 {
        return Err(Error::Precondition("n_samples must be at least 1".into()));
    }
    let bbox = region.bbox();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Result<Point> {
        for _ in 0..100_000 {
            let x = rng.gen_range(bbox.x0..=bbox.x1);
            let y = rng.gen_range(bbox.y0..=bbox.y1);
            let p = point(x, y);
            if region.contains(p) {
                return Ok(p);
            }
        }
        Err(Error::Precondition("rejection sampling failed: region too thin in its bounding box".into()))
    };
    let mut ok = 0usize;
    let mut failures = Vec::new();
    for _ in 0..n_samples {
        let p = draw(&mut rng)?;
        let q = draw(&mut rng)?;
        let mid = mid_region(p, q);
        if region.intersects_box(&mid) {
            ok += 1;
        } else if failures.len() < 8 {
            failures.push((p, q));
        }
    }
    Ok(ConvexityReport {
        samples: n_samples,
        with_midpoint: ok,
        fraction: ok as f64 / n_samples as f64,
        failures,
    })
}

impl NeckSpace {
    /// Convenience wrapper around [`weak_convexity_fraction`].
    pub fn check_weak_convexity(&self, n_samples: usize, seed: u64) -> Result<ConvexityReport> {
        weak_convexity_fraction(self, n_samples, seed)
    }
}
