//! Exact discrete quadratic optimal transport under the l∞ cost with the
//! three-stage lexicographic refinement, plus cyclical-monotonicity and
//! map-structure audits over the resulting plans.
//!
//! Stage one minimizes `Σ mass · ‖z−w‖∞²`. Stage two minimizes the
//! horizontal squared displacement over the stage-one optimal face, stage
//! three the vertical squared displacement over the stage-two face. Faces
//! are identified through reduced costs at the optimal potentials, so each
//! refinement is itself an exact transportation solve restricted to the
//! zero-reduced-cost arcs of the previous stage.

mod simplex;

pub use simplex::{solve_transportation, SimplexOutcome};

use serde::{Deserialize, Serialize};

use crate::geometry::{linf_dist, Point};
use crate::measure::{DiscreteMeasure, KahanSum};
use crate::{Error, Result};

/// Relative tolerance that defines the optimal face between stages.
pub const DEFAULT_FACE_TOL: f64 = 1e-9;

/// Marginal conservation tolerance for plans.
pub const MARGINAL_TOL: f64 = 1e-10;

/// Entry masses at or below this absolute threshold are dropped from plans.
const FLOW_DUST: f64 = 1e-15;

/// Which refinement stage produced a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Opt1,
    Opt2,
    Opt3,
}

/// Horizontal / vertical / diagonal movement class of a support pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairClass {
    H,
    V,
    D,
}

impl PairClass {
    /// Exact comparison on stored coordinates, ties to `D`.
    pub fn of(src: Point, dst: Point) -> PairClass {
        let adx = (src.x - dst.x).abs();
        let ady = (src.y - dst.y).abs();
        if adx > ady {
            PairClass::H
        } else if adx < ady {
            PairClass::V
        } else {
            PairClass::D
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PairClass::H => "H",
            PairClass::V => "V",
            PairClass::D => "D",
        }
    }
}

/// The three cost functionals of a plan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostTriple {
    /// `Σ mass · ‖z−w‖∞²`
    pub primary: f64,
    /// `Σ mass · |Δx|²`
    pub secondary: f64,
    /// `Σ mass · |Δy|²`
    pub tertiary: f64,
}

impl CostTriple {
    /// Lexicographic comparison with an absolute tolerance per component.
    pub fn lex_less_than(&self, other: &CostTriple, tol: f64) -> bool {
        if self.primary < other.primary - tol {
            return true;
        }
        if self.primary > other.primary + tol {
            return false;
        }
        if self.secondary < other.secondary - tol {
            return true;
        }
        if self.secondary > other.secondary + tol {
            return false;
        }
        self.tertiary < other.tertiary - tol
    }

    pub fn max_component_diff(&self, other: &CostTriple) -> f64 {
        (self.primary - other.primary)
            .abs()
            .max((self.secondary - other.secondary).abs())
            .max((self.tertiary - other.tertiary).abs())
    }
}

/// One coupling entry between a source atom and a target atom.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub source_index: usize,
    pub target_index: usize,
    pub mass: f64,
}

/// A sparse coupling between two discrete measures with cost bookkeeping.
#[derive(Clone, Debug)]
pub struct TransportPlan {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    entries: Vec<PlanEntry>,
    stage: Stage,
    costs: CostTriple,
}

impl TransportPlan {
    /// Assemble a plan from raw entries, dropping flow dust, sorting
    /// deterministically and verifying the marginals.
    pub fn from_entries(
        source: DiscreteMeasure,
        target: DiscreteMeasure,
        entries: Vec<PlanEntry>,
        stage: Stage,
    ) -> Result<TransportPlan> {
        let mut kept: Vec<PlanEntry> = entries.into_iter().filter(|e| e.mass > FLOW_DUST).collect();
        kept.sort_by_key(|e| (e.source_index, e.target_index));
        for e in &kept {
            if e.source_index >= source.len() || e.target_index >= target.len() {
                return Err(Error::Precondition("plan entry index out of range".into()));
            }
        }
        let costs = compute_costs(&source, &target, &kept);
        let plan = TransportPlan { source, target, entries: kept, stage, costs };
        plan.validate_marginals()?;
        Ok(plan)
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn costs(&self) -> CostTriple {
        self.costs
    }

    pub fn primary_cost(&self) -> f64 {
        self.costs.primary
    }

    pub fn secondary_cost(&self) -> f64 {
        self.costs.secondary
    }

    pub fn tertiary_cost(&self) -> f64 {
        self.costs.tertiary
    }

    /// Endpoints of entry `k`.
    pub fn endpoints(&self, k: usize) -> (Point, Point) {
        let e = &self.entries[k];
        (
            self.source.atoms()[e.source_index].position,
            self.target.atoms()[e.target_index].position,
        )
    }

    /// Largest absolute deviation of the row/column sums from the marginals.
    pub fn marginal_residual(&self) -> f64 {
        let mut row = vec![KahanSum::new(); self.source.len()];
        let mut col = vec![KahanSum::new(); self.target.len()];
        for e in &self.entries {
            row[e.source_index].add(e.mass);
            col[e.target_index].add(e.mass);
        }
        let mut worst = 0.0f64;
        for (i, a) in self.source.atoms().iter().enumerate() {
            worst = worst.max((row[i].value() - a.mass).abs());
        }
        for (j, b) in self.target.atoms().iter().enumerate() {
            worst = worst.max((col[j].value() - b.mass).abs());
        }
        worst
    }

    pub fn validate_marginals(&self) -> Result<()> {
        let r = self.marginal_residual();
        if r > MARGINAL_TOL {
            return Err(Error::MassMismatch { source_total: r, target_total: MARGINAL_TOL });
        }
        Ok(())
    }

    /// CSV export `src_x,src_y,dst_x,dst_y,mass,class`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("src_x,src_y,dst_x,dst_y,mass,class\n");
        for (k, e) in self.entries.iter().enumerate() {
            let (s, t) = self.endpoints(k);
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.x,
                s.y,
                t.x,
                t.y,
                e.mass,
                PairClass::of(s, t).label()
            ));
        }
        out
    }
}

fn compute_costs(source: &DiscreteMeasure, target: &DiscreteMeasure, entries: &[PlanEntry]) -> CostTriple {
    let mut c1 = KahanSum::new();
    let mut c2 = KahanSum::new();
    let mut c3 = KahanSum::new();
    for e in entries {
        let s = source.atoms()[e.source_index].position;
        let t = target.atoms()[e.target_index].position;
        let d = linf_dist(s, t);
        c1.add(e.mass * d * d);
        c2.add(e.mass * (s.x - t.x) * (s.x - t.x));
        c3.add(e.mass * (s.y - t.y) * (s.y - t.y));
    }
    CostTriple { primary: c1.value(), secondary: c2.value(), tertiary: c3.value() }
}

fn cost_matrix<F: Fn(Point, Point) -> f64>(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    f: F,
) -> Vec<f64> {
    let n = target.len();
    let mut c = vec![0.0; source.len() * n];
    for (i, a) in source.atoms().iter().enumerate() {
        for (j, b) in target.atoms().iter().enumerate() {
            c[i * n + j] = f(a.position, b.position);
        }
    }
    c
}

fn check_masses(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<()> {
    let t0 = mu0.total_mass();
    let t1 = mu1.total_mass();
    if (t0 - t1).abs() > MARGINAL_TOL {
        return Err(Error::MassMismatch { source_total: t0, target_total: t1 });
    }
    Ok(())
}

fn supplies(mu: &DiscreteMeasure) -> Vec<f64> {
    mu.atoms().iter().map(|a| a.mass).collect()
}

fn entries_of(outcome: &SimplexOutcome) -> Vec<PlanEntry> {
    outcome
        .basis
        .iter()
        .zip(&outcome.flows)
        .filter(|(_, &f)| f > FLOW_DUST)
        .map(|(&(i, j), &f)| PlanEntry { source_index: i, target_index: j, mass: f })
        .collect()
}

/// Minimize the primary cost `Σ mass · ‖z−w‖∞²` exactly.
pub fn solve_primary(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<TransportPlan> {
    check_masses(mu0, mu1)?;
    let c1 = cost_matrix(mu0, mu1, |s, t| {
        let d = linf_dist(s, t);
        d * d
    });
    let out = solve_transportation(&supplies(mu0), &supplies(mu1), &c1, None, None, 1)?;
    TransportPlan::from_entries(mu0.clone(), mu1.clone(), entries_of(&out), Stage::Opt1)
}

/// Full three-stage refinement: tertiary cost minimized among the secondary
/// minimizers among the primary minimizers. Faces between stages are the
/// arcs whose reduced cost stays below `face_tol` relative to the stage's
/// cost scale.
pub fn refine_lexicographic(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    face_tol: f64,
) -> Result<TransportPlan> {
    check_masses(mu0, mu1)?;
    if !(face_tol >= 0.0) {
        return Err(Error::Precondition(format!("face_tol must be nonnegative, got {face_tol}")));
    }
    let supply = supplies(mu0);
    let demand = supplies(mu1);
    let m = mu0.len();
    let n = mu1.len();

    let c1 = cost_matrix(mu0, mu1, |s, t| {
        let d = linf_dist(s, t);
        d * d
    });
    let out1 = solve_transportation(&supply, &demand, &c1, None, None, 1)?;

    let face = |cost: &[f64], out: &SimplexOutcome, prev: Option<&Vec<bool>>| -> Vec<bool> {
        let mut scale = 0.0f64;
        for (idx, &c) in cost.iter().enumerate() {
            if prev.map_or(true, |p| p[idx]) {
                scale = scale.max(c.abs());
            }
        }
        let tol = face_tol * scale.max(1e-300);
        let mut mask: Vec<bool> = (0..m * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                prev.map_or(true, |p| p[idx]) && out.reduced_cost(cost, n, i, j) <= tol
            })
            .collect();
        // basic arcs define the face even when potentials carry rounding dust
        for &(i, j) in &out.basis {
            mask[i * n + j] = true;
        }
        mask
    };

    let mask2 = face(&c1, &out1, None);
    let c2 = cost_matrix(mu0, mu1, |s, t| (s.x - t.x) * (s.x - t.x));
    let out2 = solve_transportation(
        &supply,
        &demand,
        &c2,
        Some(&mask2),
        Some((&out1.basis, &out1.flows)),
        2,
    )?;

    let mask3 = face(&c2, &out2, Some(&mask2));
    let c3 = cost_matrix(mu0, mu1, |s, t| (s.y - t.y) * (s.y - t.y));
    let out3 = solve_transportation(
        &supply,
        &demand,
        &c3,
        Some(&mask3),
        Some((&out2.basis, &out2.flows)),
        3,
    )?;

    TransportPlan::from_entries(mu0.clone(), mu1.clone(), entries_of(&out3), Stage::Opt3)
}

/// Cross-check backend: one solve of `c1 + λ·c2 + λ²·c3` with
/// `λ = lambda_rel · scale(c1)/scale(c2)`-style weighting. Used by tests to
/// confirm the staged pipeline lands on the same lexicographic face.
#[derive(Clone, Debug)]
pub struct ScalarizedSolution {
    pub entries: Vec<PlanEntry>,
    pub costs: CostTriple,
}

pub fn solve_scalarized(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    lambda_rel: f64,
) -> Result<ScalarizedSolution> {
    check_masses(mu0, mu1)?;
    let c1 = cost_matrix(mu0, mu1, |s, t| {
        let d = linf_dist(s, t);
        d * d
    });
    let c2 = cost_matrix(mu0, mu1, |s, t| (s.x - t.x) * (s.x - t.x));
    let c3 = cost_matrix(mu0, mu1, |s, t| (s.y - t.y) * (s.y - t.y));
    // The three costs share the coordinate scale, so the weight is relative
    // as-is: secondary ties are broken at lambda, tertiary at lambda².
    let lambda = lambda_rel;
    let mixed: Vec<f64> = c1
        .iter()
        .zip(c2.iter().zip(&c3))
        .map(|(&a, (&b, &c))| a + lambda * b + lambda * lambda * c)
        .collect();
    let out = solve_transportation(&supplies(mu0), &supplies(mu1), &mixed, None, None, 1)?;
    let entries = entries_of(&out);
    let costs = compute_costs(mu0, mu1, &entries);
    Ok(ScalarizedSolution { entries, costs })
}

/// Per-class mass totals of a plan.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct ClassMasses {
    pub horizontal: f64,
    pub vertical: f64,
    pub diagonal: f64,
}

/// Classify every entry as H, V or D and total the class masses.
pub fn classify_pairs(plan: &TransportPlan) -> (Vec<PairClass>, ClassMasses) {
    let mut classes = Vec::with_capacity(plan.entries().len());
    let mut masses = ClassMasses::default();
    for (k, e) in plan.entries().iter().enumerate() {
        let (s, t) = plan.endpoints(k);
        let class = PairClass::of(s, t);
        classes.push(class);
        match class {
            PairClass::H => masses.horizontal += e.mass,
            PairClass::V => masses.vertical += e.mass,
            PairClass::D => masses.diagonal += e.mass,
        }
    }
    (classes, masses)
}

/// A support-pair witness of an audit violation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PairWitness {
    pub entry_a: usize,
    pub entry_b: usize,
    pub src_a: Point,
    pub dst_a: Point,
    pub src_b: Point,
    pub dst_b: Point,
    pub violation: f64,
}

/// Options for the cyclical-monotonicity audit.
#[derive(Clone, Copy, Debug)]
pub struct AuditOptions {
    /// Absolute tolerance for the equality guards of the conditional swap
    /// conditions.
    pub eq_tol: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { eq_tol: 1e-12 }
    }
}

/// Maximum positive violation of each swap condition over all support pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CyclicalAudit {
    pub comcyc_max: f64,
    pub vercyc_max: f64,
    pub horcyc_max: f64,
    pub max_violation: f64,
    pub comcyc_witness: Option<PairWitness>,
    pub vercyc_witness: Option<PairWitness>,
    pub horcyc_witness: Option<PairWitness>,
}

/// Evaluate the three pairwise swap conditions over every unordered support
/// pair: the plain l∞² swap inequality always, and the guarded vertical and
/// horizontal swap inequalities on non-diagonal pairs.
pub fn audit_cyclical(plan: &TransportPlan, opts: AuditOptions) -> CyclicalAudit {
    let entries = plan.entries();
    let pts: Vec<(Point, Point)> = (0..entries.len()).map(|k| plan.endpoints(k)).collect();
    let classes: Vec<PairClass> = pts.iter().map(|&(s, t)| PairClass::of(s, t)).collect();
    let mut audit = CyclicalAudit {
        comcyc_max: 0.0,
        vercyc_max: 0.0,
        horcyc_max: 0.0,
        max_violation: 0.0,
        comcyc_witness: None,
        vercyc_witness: None,
        horcyc_witness: None,
    };
    let linf2 = |p: Point, q: Point| {
        let d = linf_dist(p, q);
        d * d
    };
    for a in 0..pts.len() {
        let (z1, w1) = pts[a];
        for b in (a + 1)..pts.len() {
            let (z2, w2) = pts[b];
            let witness = |violation: f64| PairWitness {
                entry_a: a,
                entry_b: b,
                src_a: z1,
                dst_a: w1,
                src_b: z2,
                dst_b: w2,
                violation,
            };

            let com = (linf2(z1, w1) + linf2(z2, w2)) - (linf2(z1, w2) + linf2(z2, w1));
            if com > audit.comcyc_max {
                audit.comcyc_max = com;
                audit.comcyc_witness = Some(witness(com));
            }

            // The guarded conditions mirror the case split of the optimal
            // plans: diagonal pairs only carry the plain condition.
            if classes[a] == PairClass::D || classes[b] == PairClass::D {
                continue;
            }
            let dx2 = |p: Point, q: Point| (p.x - q.x) * (p.x - q.x);
            let dy2 = |p: Point, q: Point| (p.y - q.y) * (p.y - q.y);

            let x_keep = dx2(z1, w1) + dx2(z2, w2);
            let x_swap = dx2(z1, w2) + dx2(z2, w1);
            if (x_keep - x_swap).abs() <= opts.eq_tol {
                let ver = (dy2(z1, w1) + dy2(z2, w2)) - (dy2(z1, w2) + dy2(z2, w1));
                if ver > audit.vercyc_max {
                    audit.vercyc_max = ver;
                    audit.vercyc_witness = Some(witness(ver));
                }
            }

            let y_keep = dy2(z1, w1) + dy2(z2, w2);
            let y_swap = dy2(z1, w2) + dy2(z2, w1);
            if (y_keep - y_swap).abs() <= opts.eq_tol {
                let hor = (dx2(z1, w1) + dx2(z2, w2)) - (dx2(z1, w2) + dx2(z2, w1));
                if hor > audit.horcyc_max {
                    audit.horcyc_max = hor;
                    audit.horcyc_witness = Some(witness(hor));
                }
            }
        }
    }
    audit.max_violation = audit.comcyc_max.max(audit.vercyc_max).max(audit.horcyc_max);
    audit
}

/// Fraction of source mass split across two or more targets.
///
/// Entries below `1e-9` of their atom's mass are ignored as numerical dust.
pub fn audit_map_structure(plan: &TransportPlan) -> f64 {
    let mut outgoing = vec![0usize; plan.source().len()];
    for e in plan.entries() {
        let atom_mass = plan.source().atoms()[e.source_index].mass;
        if e.mass > 1e-9 * atom_mass {
            outgoing[e.source_index] += 1;
        }
    }
    let mut split = KahanSum::new();
    for (i, a) in plan.source().atoms().iter().enumerate() {
        if outgoing[i] >= 2 {
            split.add(a.mass);
        }
    }
    split.value()
}

/// One violated order condition.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrderViolation {
    /// `"vertical"` when two sources sharing `x` map to targets sharing `x`
    /// with inverted `y` order; `"horizontal"` for the mirrored condition.
    pub axis: &'static str,
    pub witness: PairWitness,
}

/// Report of the monotone-order audit.
#[derive(Clone, Debug, Serialize)]
pub struct OrderAudit {
    pub checked_pairs: usize,
    pub violations: Vec<OrderViolation>,
    pub split_fraction: f64,
}

/// Verify the difference-quotient sign conditions on support pairs that
/// share a coordinate (within `eq_tol`) and whose images share the matching
/// coordinate. Requires the plan to be approximately map-induced.
pub fn audit_monotone_order(
    plan: &TransportPlan,
    eq_tol: f64,
    max_split_fraction: f64,
) -> Result<OrderAudit> {
    let split = audit_map_structure(plan);
    if split > max_split_fraction {
        return Err(Error::Precondition(format!(
            "plan is not map-like: split fraction {split} exceeds {max_split_fraction}"
        )));
    }
    let pts: Vec<(Point, Point)> = (0..plan.entries().len()).map(|k| plan.endpoints(k)).collect();
    let mut violations = Vec::new();
    let mut checked = 0usize;
    for a in 0..pts.len() {
        let (z1, w1) = pts[a];
        for b in (a + 1)..pts.len() {
            let (z2, w2) = pts[b];
            // shared x, distinct y, images share x: vertical order must keep
            if (z1.x - z2.x).abs() <= eq_tol
                && (z1.y - z2.y).abs() > eq_tol
                && (w1.x - w2.x).abs() <= eq_tol
            {
                checked += 1;
                let q = (w1.y - w2.y) * (z1.y - z2.y);
                if q < 0.0 && (w1.y - w2.y).abs() > eq_tol {
                    violations.push(OrderViolation {
                        axis: "vertical",
                        witness: PairWitness {
                            entry_a: a,
                            entry_b: b,
                            src_a: z1,
                            dst_a: w1,
                            src_b: z2,
                            dst_b: w2,
                            violation: -q,
                        },
                    });
                }
            }
            // shared y, distinct x, images share y: horizontal order must keep
            if (z1.y - z2.y).abs() <= eq_tol
                && (z1.x - z2.x).abs() > eq_tol
                && (w1.y - w2.y).abs() <= eq_tol
            {
                checked += 1;
                let q = (w1.x - w2.x) * (z1.x - z2.x);
                if q < 0.0 && (w1.x - w2.x).abs() > eq_tol {
                    violations.push(OrderViolation {
                        axis: "horizontal",
                        witness: PairWitness {
                            entry_a: a,
                            entry_b: b,
                            src_a: z1,
                            dst_a: w1,
                            src_b: z2,
                            dst_b: w2,
                            violation: -q,
                        },
                    });
                }
            }
        }
    }
    Ok(OrderAudit { checked_pairs: checked, violations, split_fraction: split })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;
    use crate::measure::Atom;

    fn unit_measure(points: &[Point]) -> DiscreteMeasure {
        let w = 1.0 / points.len() as f64;
        DiscreteMeasure::new(
            points.iter().map(|&p| Atom { position: p, mass: w }).collect(),
            1.0,
            "t",
        )
        .unwrap()
    }

    /// Plan with prescribed pairings, for audit tests.
    fn manual_plan(src: &[Point], dst: &[Point], pairs: &[(usize, usize)]) -> TransportPlan {
        let mu0 = unit_measure(src);
        let mu1 = unit_measure(dst);
        // measure atoms are sorted by position; remap given indices
        let find = |mu: &DiscreteMeasure, p: Point| {
            mu.atoms().iter().position(|a| a.position == p).unwrap()
        };
        let entries = pairs
            .iter()
            .map(|&(i, j)| PlanEntry {
                source_index: find(&mu0, src[i]),
                target_index: find(&mu1, dst[j]),
                mass: 1.0 / src.len() as f64,
            })
            .collect();
        TransportPlan::from_entries(mu0, mu1, entries, Stage::Opt3).unwrap()
    }

    #[test]
    fn solve_primary_single_pair() {
        let mu0 = unit_measure(&[point(0.0, 0.0)]);
        let mu1 = unit_measure(&[point(1.0, 0.0)]);
        let plan = solve_primary(&mu0, &mu1).unwrap();
        assert_eq!(plan.entries().len(), 1);
        assert!((plan.primary_cost() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solve_primary_identity_is_zero_cost() {
        let pts = [point(0.1, 0.9), point(0.4, 0.2), point(0.7, 0.5)];
        let mu = unit_measure(&pts);
        let plan = solve_primary(&mu, &mu).unwrap();
        assert!(plan.primary_cost().abs() < 1e-15);
        for (k, e) in plan.entries().iter().enumerate() {
            assert_eq!(e.source_index, e.target_index);
            let (s, t) = plan.endpoints(k);
            assert_eq!(s, t);
        }
    }

    #[test]
    fn solve_primary_two_by_two_cost() {
        let mu0 = unit_measure(&[point(0.0, 0.0), point(0.0, 1.0)]);
        let mu1 = unit_measure(&[point(2.0, 0.0), point(2.0, 1.0)]);
        let plan = solve_primary(&mu0, &mu1).unwrap();
        assert!((plan.primary_cost() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn refine_selects_straight_pairing() {
        let mu0 = unit_measure(&[point(0.0, 0.0), point(0.0, 1.0)]);
        let mu1 = unit_measure(&[point(2.0, 0.0), point(2.0, 1.0)]);
        let plan = refine_lexicographic(&mu0, &mu1, DEFAULT_FACE_TOL).unwrap();
        assert_eq!(plan.stage(), Stage::Opt3);
        assert!((plan.primary_cost() - 4.0).abs() < 1e-12);
        assert!(plan.tertiary_cost().abs() < 1e-12, "crossed pairing slipped through");
        for (k, _) in plan.entries().iter().enumerate() {
            let (s, t) = plan.endpoints(k);
            assert_eq!(s.y, t.y);
        }
    }

    #[test]
    fn refine_vertical_instance_uses_secondary() {
        let mu0 = unit_measure(&[point(0.0, 0.0), point(1.0, 0.0)]);
        let mu1 = unit_measure(&[point(0.0, 2.0), point(1.0, 2.0)]);
        let plan = refine_lexicographic(&mu0, &mu1, DEFAULT_FACE_TOL).unwrap();
        assert!((plan.primary_cost() - 4.0).abs() < 1e-12);
        assert!(plan.secondary_cost().abs() < 1e-12);
        assert!((plan.tertiary_cost() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn refine_single_pair_unchanged() {
        let mu0 = unit_measure(&[point(0.0, 0.0)]);
        let mu1 = unit_measure(&[point(1.0, 0.25)]);
        let p1 = solve_primary(&mu0, &mu1).unwrap();
        let p3 = refine_lexicographic(&mu0, &mu1, DEFAULT_FACE_TOL).unwrap();
        assert_eq!(p1.entries(), p3.entries());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(PairClass::of(point(0.0, 0.0), point(2.0, 1.0)), PairClass::H);
        assert_eq!(PairClass::of(point(0.0, 0.0), point(1.0, 3.0)), PairClass::V);
        assert_eq!(PairClass::of(point(0.0, 0.0), point(2.0, 2.0)), PairClass::D);
    }

    #[test]
    fn classify_masses_sum_to_one() {
        let mu0 = unit_measure(&[point(0.0, 0.0), point(0.3, 0.4), point(0.9, 0.1)]);
        let mu1 = unit_measure(&[point(1.0, 0.2), point(0.2, 1.0), point(0.5, 0.5)]);
        let plan = refine_lexicographic(&mu0, &mu1, DEFAULT_FACE_TOL).unwrap();
        let (classes, masses) = classify_pairs(&plan);
        assert_eq!(classes.len(), plan.entries().len());
        let total = masses.horizontal + masses.vertical + masses.diagonal;
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn audit_crossed_plan_fails_vercyc() {
        // comcyc passes but the vertical swap improves: violation 2
        let plan = manual_plan(
            &[point(0.0, 0.0), point(0.0, 1.0)],
            &[point(2.0, 1.0), point(2.0, 0.0)],
            &[(0, 0), (1, 1)],
        );
        let audit = audit_cyclical(&plan, AuditOptions::default());
        assert!(audit.comcyc_max <= 1e-12, "comcyc {}", audit.comcyc_max);
        assert!((audit.vercyc_max - 2.0).abs() < 1e-12, "vercyc {}", audit.vercyc_max);
    }

    #[test]
    fn audit_identity_plan_clean() {
        let pts = [point(0.0, 0.0), point(0.5, 0.2), point(0.1, 0.8)];
        let mu = unit_measure(&pts);
        let plan = refine_lexicographic(&mu, &mu, DEFAULT_FACE_TOL).unwrap();
        let audit = audit_cyclical(&plan, AuditOptions::default());
        assert_eq!(audit.max_violation, 0.0);
    }

    #[test]
    fn audit_opt3_plans_pass_on_random_instances() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for trial in 0..20 {
            let n = rng.gen_range(3..=10usize);
            let src: Vec<Point> = (0..n).map(|_| point(rng.gen(), rng.gen())).collect();
            let dst: Vec<Point> = (0..n).map(|_| point(rng.gen(), rng.gen())).collect();
            let mu0 = unit_measure(&src);
            let mu1 = unit_measure(&dst);
            let plan = refine_lexicographic(&mu0, &mu1, DEFAULT_FACE_TOL).unwrap();
            let audit = audit_cyclical(&plan, AuditOptions::default());
            assert!(
                audit.max_violation <= 1e-9,
                "trial {trial}: violation {} witness {:?}",
                audit.max_violation,
                audit.comcyc_witness
            );
        }
    }

    #[test]
    fn map_structure_identity_and_split() {
        let pts = [point(0.0, 0.0), point(1.0, 0.0)];
        let mu = unit_measure(&pts);
        let plan = refine_lexicographic(&mu, &mu, DEFAULT_FACE_TOL).unwrap();
        assert_eq!(audit_map_structure(&plan), 0.0);

        // one source atom split 50/50 across two targets
        let mu0 = DiscreteMeasure::new(
            vec![
                Atom { position: point(0.0, 0.0), mass: 0.5 },
                Atom { position: point(3.0, 0.0), mass: 0.5 },
            ],
            1.0,
            "t",
        )
        .unwrap();
        let mu1 = unit_measure(&[point(0.0, 1.0), point(0.25, 1.0), point(3.0, 1.0), point(3.25, 1.0)]);
        let plan = solve_primary(&mu0, &mu1).unwrap();
        let split = audit_map_structure(&plan);
        assert!((split - 1.0).abs() < 1e-12, "both atoms split, got {split}");
    }

    #[test]
    fn monotone_order_identity_and_translation() {
        let grid: Vec<Point> = (0..3)
            .flat_map(|i| (0..3).map(move |j| point(i as f64 * 0.1, j as f64 * 0.1)))
            .collect();
        let mu0 = unit_measure(&grid);
        let shifted: Vec<Point> = grid.iter().map(|p| point(p.x, p.y + 0.1)).collect();
        let mu1 = unit_measure(&shifted);
        let plan = refine_lexicographic(&mu0, &mu1, DEFAULT_FACE_TOL).unwrap();
        let audit = audit_monotone_order(&plan, 1e-12, 0.05).unwrap();
        assert!(audit.violations.is_empty(), "{:?}", audit.violations);
        assert!(audit.checked_pairs > 0);
    }

    #[test]
    fn monotone_order_detects_swap() {
        // two sources sharing x mapped to targets sharing x in reversed order
        let plan = manual_plan(
            &[point(0.0, 0.0), point(0.0, 1.0)],
            &[point(0.5, 1.0), point(0.5, 0.0)],
            &[(0, 0), (1, 1)],
        );
        let audit = audit_monotone_order(&plan, 1e-12, 1.0).unwrap();
        assert_eq!(audit.violations.len(), 1);
        assert_eq!(audit.violations[0].axis, "vertical");
    }

    #[test]
    fn stagewise_primary_cost_preserved() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let n = 6;
            let src: Vec<Point> = (0..n).map(|_| point(rng.gen(), rng.gen())).collect();
            let dst: Vec<Point> = (0..n).map(|_| point(rng.gen(), rng.gen())).collect();
            let mu0 = unit_measure(&src);
            let mu1 = unit_measure(&dst);
            let p1 = solve_primary(&mu0, &mu1).unwrap();
            let p3 = refine_lexicographic(&mu0, &mu1, DEFAULT_FACE_TOL).unwrap();
            let rel = (p3.primary_cost() - p1.primary_cost()).abs() / p1.primary_cost().max(1e-300);
            assert!(rel <= 1e-8, "primary cost drifted by {rel}");
            assert!(p3.secondary_cost() <= p1.secondary_cost() + 1e-12);
        }
    }

    #[test]
    fn scalarized_agrees_with_staged() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let n = 5;
            let src: Vec<Point> = (0..n).map(|_| point(rng.gen(), rng.gen())).collect();
            let dst: Vec<Point> = (0..n).map(|_| point(rng.gen(), rng.gen())).collect();
            let mu0 = unit_measure(&src);
            let mu1 = unit_measure(&dst);
            let staged = refine_lexicographic(&mu0, &mu1, DEFAULT_FACE_TOL).unwrap();
            let scalar = solve_scalarized(&mu0, &mu1, 1e-7).unwrap();
            let rel = staged.costs().max_component_diff(&scalar.costs)
                / staged.primary_cost().max(1e-300);
            assert!(rel <= 1e-7, "backends disagree by {rel}");
        }
    }

    #[test]
    fn mass_mismatch_is_rejected() {
        let mu0 = unit_measure(&[point(0.0, 0.0)]);
        let bad = DiscreteMeasure::new(
            vec![Atom { position: point(1.0, 0.0), mass: 1.0 }],
            1.0,
            "t",
        )
        .unwrap();
        // same totals here; build a genuinely mismatched pair via raw atoms
        let _ = bad;
        let half = DiscreteMeasure::new(
            vec![
                Atom { position: point(1.0, 0.0), mass: 0.5 },
                Atom { position: point(2.0, 0.0), mass: 0.5 },
            ],
            1.0,
            "t",
        )
        .unwrap();
        // totals match (both are probability measures), so force mismatch by
        // constructing unnormalized supplies directly through the solver
        let res = solve_transportation(&[0.6], &[0.5], &[1.0], None, None, 1);
        assert!(matches!(res, Err(Error::MassMismatch { .. })));
        let _ = (mu0, half);
    }
}
