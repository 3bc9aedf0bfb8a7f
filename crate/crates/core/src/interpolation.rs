//! The midpoint map on a corner domain, pushforward of transport plans to
//! midpoint measures, dyadic geodesic construction, and the algebraic
//! Jacobian inequality behind the dimension-4 entropy bound.
//!
//! Pairs that move more vertically than horizontally (including diagonal
//! ties) take the plain Euclidean midpoint. Horizontal pairs are corrected
//! vertically against the circular lower boundary `S`: the midpoint keeps
//! the averaged height *above the arc* in square-root coordinates, plus a
//! `(Δx)²` lift that keeps it inside the domain.

use serde::{Deserialize, Serialize};

use crate::geometry::{linf_dist, point, CornerDomain, CornerRegion, PlanarRegion, Point};
use crate::measure::DiscreteMeasure;
use crate::transport::{refine_lexicographic, PairClass, TransportPlan};
use crate::{Error, Result};

/// Which branch of the midpoint map produced a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MidpointBranch {
    /// Plain Euclidean midpoint (non-horizontal pairs).
    Euclidean,
    /// Vertically corrected midpoint against the arc (horizontal pairs).
    ArcCorrected,
}

impl MidpointBranch {
    /// Wire token used by the CSV export.
    pub fn csv_token(&self) -> &'static str {
        match self {
            MidpointBranch::Euclidean => "Mdef1",
            MidpointBranch::ArcCorrected => "Mdef2",
        }
    }
}

/// Tolerance absorbed when clamping `y - S(x)` at zero near the arc.
const SQRT_CLAMP_TOL: f64 = 1e-14;

/// Height of a point above the arc, clamped at zero within rounding.
fn height_above(e: &CornerDomain, p: Point) -> Result<f64> {
    let s = e.lower_boundary(p.x)?;
    let u = p.y - s;
    if u < -SQRT_CLAMP_TOL {
        return Err(Error::BelowBoundary { x: p.x, y: p.y, boundary: s });
    }
    Ok(u.max(0.0))
}

/// The corrected midpoint of a pair in the corner domain.
///
/// Non-horizontal pairs (including diagonal ties and `z0 == z1`) map to the
/// Euclidean midpoint. Horizontal pairs map to
/// `((x0+x1)/2, (S(x0)+S(x1))/2 + (x0−x1)² + ¼(√(y0−S(x0)) + √(y1−S(x1)))²)`,
/// with the height projected onto the admissible midpoint band
/// `[max(y0,y1) − θ/2, min(y0,y1) + θ/2]`. Near the diagonal boundary of the
/// horizontal class, pairs with very different heights above the arc produce
/// a raw correction below that band, where no vertical position can satisfy
/// both distance equalities except inside it; the projection is inactive
/// everywhere else. The projected height is still nondecreasing in both
/// heights and stays above the arc, since the band's lower edge exceeds
/// `S((x0+x1)/2)` whenever both points sit above the boundary.
pub fn midpoint_map(e: &CornerDomain, z0: Point, z1: Point) -> Result<(Point, MidpointBranch)> {
    if PairClass::of(z0, z1) == PairClass::H {
        let s0 = e.lower_boundary(z0.x)?;
        let s1 = e.lower_boundary(z1.x)?;
        let u0 = height_above(e, z0)?;
        let u1 = height_above(e, z1)?;
        let root = 0.5 * (u0.sqrt() + u1.sqrt());
        let dx = z0.x - z1.x;
        let raw = 0.5 * (s0 + s1) + dx * dx + root * root;
        let half = 0.5 * dx.abs();
        let band_lo = z0.y.max(z1.y) - half;
        let band_hi = z0.y.min(z1.y) + half;
        let m = point(0.5 * (z0.x + z1.x), raw.clamp(band_lo, band_hi));
        Ok((m, MidpointBranch::ArcCorrected))
    } else {
        // still reject points below the boundary so both branches share the
        // same domain contract
        height_above(e, z0)?;
        height_above(e, z1)?;
        Ok((point(0.5 * (z0.x + z1.x), 0.5 * (z0.y + z1.y)), MidpointBranch::Euclidean))
    }
}

/// One plan entry together with its assigned midpoint.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MidpointEntry {
    pub entry_index: usize,
    pub source: Point,
    pub target: Point,
    pub midpoint: Point,
    pub mass: f64,
    pub branch: MidpointBranch,
}

/// All midpoints of a plan, with the collision tolerance used by the
/// essential-injectivity diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MidpointAssignment {
    pub entries: Vec<MidpointEntry>,
    pub collision_tol: f64,
}

impl MidpointAssignment {
    /// Fraction of mass whose midpoint lies within `collision_tol` (l∞) of
    /// another entry's midpoint.
    pub fn collision_mass_fraction(&self) -> f64 {
        let n = self.entries.len();
        let mut colliding = 0.0;
        for i in 0..n {
            let mut hit = false;
            for j in 0..n {
                if i != j
                    && linf_dist(self.entries[i].midpoint, self.entries[j].midpoint)
                        <= self.collision_tol
                {
                    hit = true;
                    break;
                }
            }
            if hit {
                colliding += self.entries[i].mass;
            }
        }
        colliding
    }

    /// Largest deviation from the two midpoint distance equalities.
    pub fn max_midpoint_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for e in &self.entries {
            let theta = linf_dist(e.source, e.target);
            worst = worst.max((linf_dist(e.source, e.midpoint) - 0.5 * theta).abs());
            worst = worst.max((linf_dist(e.target, e.midpoint) - 0.5 * theta).abs());
        }
        worst
    }

    /// CSV export `src_x,src_y,dst_x,dst_y,mid_x,mid_y,mass,branch`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("src_x,src_y,dst_x,dst_y,mid_x,mid_y,mass,branch\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                e.source.x,
                e.source.y,
                e.target.x,
                e.target.y,
                e.midpoint.x,
                e.midpoint.y,
                e.mass,
                e.branch.csv_token()
            ));
        }
        out
    }
}

fn assignment_of<F>(plan: &TransportPlan, collision_tol: f64, mut mid: F) -> Result<MidpointAssignment>
where
    F: FnMut(Point, Point) -> Result<(Point, MidpointBranch)>,
{
    let mut entries = Vec::with_capacity(plan.entries().len());
    for (k, e) in plan.entries().iter().enumerate() {
        let (src, dst) = plan.endpoints(k);
        let (midpoint, branch) = mid(src, dst)?;
        entries.push(MidpointEntry {
            entry_index: k,
            source: src,
            target: dst,
            midpoint,
            mass: e.mass,
            branch,
        });
    }
    Ok(MidpointAssignment { entries, collision_tol })
}

fn bin_assignment<R: PlanarRegion>(
    assignment: &MidpointAssignment,
    plan: &TransportPlan,
    region: &R,
    eps_mid: f64,
) -> Result<DiscreteMeasure> {
    let cloud = DiscreteMeasure::from_weighted_points(
        assignment.entries.iter().map(|e| (e.midpoint, e.mass)).collect(),
        plan.source().cell_size(),
        plan.source().domain_tag(),
    )?;
    cloud.block_average(eps_mid, region)
}

/// Push a plan forward through the corrected midpoint map and re-bin the
/// atoms onto an `eps_mid` grid clipped to the corner domain.
///
/// `eps_mid` defaults to half the source cell size. Errors if any midpoint
/// escapes the domain, which indicates an invalid domain or plan.
pub fn pushforward_midpoint(
    e: &CornerDomain,
    plan: &TransportPlan,
    eps_mid: Option<f64>,
) -> Result<(MidpointAssignment, DiscreteMeasure)> {
    let eps_mid = eps_mid.unwrap_or(0.5 * plan.source().cell_size());
    let assignment = assignment_of(plan, 0.25 * eps_mid, |s, t| midpoint_map(e, s, t))?;
    for entry in &assignment.entries {
        if !e.contains(entry.midpoint) {
            return Err(Error::MidpointOutsideDomain { x: entry.midpoint.x, y: entry.midpoint.y });
        }
    }
    let measure = bin_assignment(&assignment, plan, &CornerRegion(*e), eps_mid)?;
    Ok((assignment, measure))
}

/// Push a plan forward through plain Euclidean midpoints, re-binned onto an
/// `eps_mid` grid clipped to `region`. Used for translation references and
/// for purely vertical/diagonal transports, where no correction applies.
pub fn pushforward_euclidean<R: PlanarRegion>(
    region: &R,
    plan: &TransportPlan,
    eps_mid: Option<f64>,
) -> Result<(MidpointAssignment, DiscreteMeasure)> {
    let eps_mid = eps_mid.unwrap_or(0.5 * plan.source().cell_size());
    let assignment = assignment_of(plan, 0.25 * eps_mid, |s, t| {
        Ok((point(0.5 * (s.x + t.x), 0.5 * (s.y + t.y)), MidpointBranch::Euclidean))
    })?;
    let measure = bin_assignment(&assignment, plan, region, eps_mid)?;
    Ok((assignment, measure))
}

/// Measures along the dyadic geodesic at times `k/2^depth`.
///
/// Each level solves the lexicographic refinement between adjacent measures
/// and takes corrected midpoints; endpoints are returned unchanged.
pub fn dyadic_geodesic(
    e: &CornerDomain,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    depth: u32,
    face_tol: f64,
) -> Result<Vec<(f64, DiscreteMeasure)>> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    fn bisect(
        e: &CornerDomain,
        t0: f64,
        m0: &DiscreteMeasure,
        t1: f64,
        m1: &DiscreteMeasure,
        level: u32,
        face_tol: f64,
        out: &mut Vec<(f64, DiscreteMeasure)>,
    ) -> Result<()> {
        if level == 0 {
            return Ok(());
        }
        let plan = refine_lexicographic(m0, m1, face_tol)?;
        let (_, mid) = pushforward_midpoint(e, &plan, None)?;
        let tm = 0.5 * (t0 + t1);
        bisect(e, t0, m0, tm, &mid, level - 1, face_tol, out)?;
        out.push((tm, mid));
        bisect(e, tm, out.last().map(|(_, m)| m.clone()).as_ref().unwrap(), t1, m1, level - 1, face_tol, out)?;
        Ok(())
    }
    let mut inner = Vec::new();
    bisect(e, 0.0, mu0, 1.0, mu1, depth, face_tol, &mut inner)?;
    let mut all = Vec::with_capacity(inner.len() + 2);
    all.push((0.0, mu0.clone()));
    all.extend(inner);
    all.push((1.0, mu1.clone()));
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times"));
    all.dedup_by(|a, b| a.0 == b.0);
    Ok(all)
}

/// Outcome of the algebraic Jacobian inequality check.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct JacobianCheck {
    pub j_m: f64,
    pub j_t: f64,
    pub holds: bool,
}

/// Check `J_M^(1/4) ≥ (1 + (ab)^(1/4))/2 − 1e−12` where
/// `J_M = (1+a)/2 · (1 + b + √r + b/√r)/4` and `J_T = a·b`, for partial
/// derivatives `a`, `b` and height ratio `r` of a horizontal transport.
pub fn jacobian_inequality_check(a: f64, b: f64, r: f64) -> Result<JacobianCheck> {
    if !(a >= 0.0) || !(b >= 0.0) {
        return Err(Error::Precondition(format!("derivatives must be nonnegative, got a={a}, b={b}")));
    }
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("height ratio must be positive, got r={r}")));
    }
    let root_r = r.sqrt();
    let j_m = 0.5 * (1.0 + a) * 0.25 * (1.0 + b + root_r + b / root_r);
    let j_t = a * b;
    let holds = j_m.powf(0.25) >= 0.5 * (1.0 + j_t.powf(0.25)) - 1e-12;
    Ok(JacobianCheck { j_m, j_t, holds })
}
