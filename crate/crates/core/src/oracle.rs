//! Brute-force references used by tests: exhaustive transport enumeration on
//! tiny instances, lexicographic enumeration, and lattice scans for midpoint
//! sets. Nothing here is performant; it exists to certify the real solver.

use crate::geometry::{linf_dist, point, Point};
use crate::transport::CostTriple;
use crate::{Error, Result};

/// Hard cap on atoms per side for exhaustive enumeration.
pub const MAX_SIDE: usize = 8;

/// A tiny weighted instance with rational masses: every weight must be an
/// integer multiple of `1/resolution` of the common total.
#[derive(Clone, Debug)]
pub struct TinyInstance {
    pub sources: Vec<(Point, f64)>,
    pub targets: Vec<(Point, f64)>,
    /// Mass quantum denominator `L`; enumeration walks integer flows in
    /// units of `total/L`.
    pub resolution: u64,
}

impl TinyInstance {
    pub fn new(sources: Vec<(Point, f64)>, targets: Vec<(Point, f64)>, resolution: u64) -> Result<TinyInstance> {
        if sources.len() > MAX_SIDE || targets.len() > MAX_SIDE {
            return Err(Error::Precondition(format!(
                "instance too large for enumeration: {}x{} (max {MAX_SIDE})",
                sources.len(),
                targets.len()
            )));
        }
        if sources.is_empty() || targets.is_empty() {
            return Err(Error::EmptySupport);
        }
        if resolution == 0 || resolution > 64 {
            return Err(Error::Precondition(format!("resolution must be in 1..=64, got {resolution}")));
        }
        let ts: f64 = sources.iter().map(|s| s.1).sum();
        let tt: f64 = targets.iter().map(|t| t.1).sum();
        if (ts - tt).abs() > 1e-10 * ts.abs().max(1.0) {
            return Err(Error::MassMismatch { source_total: ts, target_total: tt });
        }
        let quantum = ts / resolution as f64;
        for &(_, w) in sources.iter().chain(targets.iter()) {
            let units = w / quantum;
            if (units - units.round()).abs() > 1e-9 || units.round() < 1.0 {
                return Err(Error::Precondition(format!(
                    "weight {w} is not a positive multiple of total/{resolution}"
                )));
            }
        }
        Ok(TinyInstance { sources, targets, resolution })
    }

    /// Equal unit weights, the common case for oracle comparisons.
    pub fn unit(sources: Vec<Point>, targets: Vec<Point>) -> Result<TinyInstance> {
        if sources.len() != targets.len() {
            return Err(Error::MassMismatch {
                source_total: sources.len() as f64,
                target_total: targets.len() as f64,
            });
        }
        let n = sources.len();
        let w = 1.0 / n as f64;
        TinyInstance::new(
            sources.into_iter().map(|p| (p, w)).collect(),
            targets.into_iter().map(|p| (p, w)).collect(),
            n as u64,
        )
    }

    fn unit_supplies(&self) -> (Vec<u64>, Vec<u64>, f64) {
        let total: f64 = self.sources.iter().map(|s| s.1).sum();
        let quantum = total / self.resolution as f64;
        let a = self.sources.iter().map(|s| (s.1 / quantum).round() as u64).collect();
        let b = self.targets.iter().map(|t| (t.1 / quantum).round() as u64).collect();
        (a, b, quantum)
    }
}

fn triple_of(inst: &TinyInstance, flow_units: &[u64], quantum: f64) -> CostTriple {
    let n = inst.targets.len();
    let mut c1 = 0.0;
    let mut c2 = 0.0;
    let mut c3 = 0.0;
    for (idx, &u) in flow_units.iter().enumerate() {
        if u == 0 {
            continue;
        }
        let m = u as f64 * quantum;
        let (s, _) = inst.sources[idx / n];
        let (t, _) = inst.targets[idx % n];
        let d = linf_dist(s, t);
        c1 += m * d * d;
        c2 += m * (s.x - t.x) * (s.x - t.x);
        c3 += m * (s.y - t.y) * (s.y - t.y);
    }
    CostTriple { primary: c1, secondary: c2, tertiary: c3 }
}

/// Enumerate every integral flow matrix with the given marginals (in units of
/// `total/L`) and fold it. Integral flows include every vertex of the
/// transport polytope, so a minimum over them is the exact optimum.
fn enumerate_flows<F: FnMut(&[u64])>(a: &[u64], b: &[u64], f: &mut F) {
    let m = a.len();
    let n = b.len();
    let mut flow = vec![0u64; m * n];
    let mut rem_b = b.to_vec();

    fn rec<F: FnMut(&[u64])>(
        i: usize,
        j: usize,
        rem_row: u64,
        a: &[u64],
        rem_b: &mut [u64],
        flow: &mut [u64],
        n: usize,
        f: &mut F,
    ) {
        let m = a.len();
        if i == m {
            f(flow);
            return;
        }
        if j == n {
            if rem_row == 0 {
                let next_row = if i + 1 < m { a[i + 1] } else { 0 };
                rec(i + 1, 0, next_row, a, rem_b, flow, n, f);
            }
            return;
        }
        // Remaining capacity in later columns must absorb what this row
        // doesn't place here.
        let later: u64 = rem_b[j + 1..].iter().sum();
        let lo = rem_row.saturating_sub(later);
        let hi = rem_row.min(rem_b[j]);
        if lo > hi {
            return;
        }
        for u in lo..=hi {
            flow[i * n + j] = u;
            rem_b[j] -= u;
            rec(i, j + 1, rem_row - u, a, rem_b, flow, n, f);
            rem_b[j] += u;
            flow[i * n + j] = 0;
        }
    }

    let first_row = a[0];
    rec(0, 0, first_row, a, &mut rem_b, &mut flow, n, f);
}

/// One enumerated plan with its cost triple.
#[derive(Clone, Debug)]
pub struct OraclePlan {
    /// `(source index, target index, mass)` entries with positive mass.
    pub entries: Vec<(usize, usize, f64)>,
    pub costs: CostTriple,
}

/// Exhaustive minimum of the primary cost, with every plan attaining it
/// within `tie_tol`.
pub fn brute_force_ot(inst: &TinyInstance) -> Result<(f64, Vec<OraclePlan>)> {
    let (a, b, quantum) = inst.unit_supplies();
    let n = inst.targets.len();
    let mut best = f64::INFINITY;
    let mut winners: Vec<OraclePlan> = Vec::new();
    let tie_tol = 1e-12;
    enumerate_flows(&a, &b, &mut |flow| {
        let c = triple_of(inst, flow, quantum);
        if c.primary < best - tie_tol {
            best = c.primary;
            winners.clear();
        }
        if c.primary <= best + tie_tol {
            let entries = flow
                .iter()
                .enumerate()
                .filter(|(_, &u)| u > 0)
                .map(|(idx, &u)| (idx / n, idx % n, u as f64 * quantum))
                .collect();
            winners.push(OraclePlan { entries, costs: c });
        }
    });
    if winners.is_empty() {
        return Err(Error::EmptySupport);
    }
    // Drop plans that ended up above the final minimum.
    winners.retain(|p| p.costs.primary <= best + tie_tol);
    Ok((best, winners))
}

/// Exhaustive lexicographic minimum of `(primary, secondary, tertiary)`.
pub fn brute_force_lex(inst: &TinyInstance) -> Result<(CostTriple, OraclePlan)> {
    let (a, b, quantum) = inst.unit_supplies();
    let n = inst.targets.len();
    let mut best: Option<(CostTriple, Vec<u64>)> = None;
    let tol = 1e-12;
    enumerate_flows(&a, &b, &mut |flow| {
        let c = triple_of(inst, flow, quantum);
        match &best {
            None => best = Some((c, flow.to_vec())),
            Some((bc, _)) if c.lex_less_than(bc, tol) => best = Some((c, flow.to_vec())),
            _ => {}
        }
    });
    let (costs, flow) = best.ok_or(Error::EmptySupport)?;
    let entries = flow
        .iter()
        .enumerate()
        .filter(|(_, &u)| u > 0)
        .map(|(idx, &u)| (idx / n, idx % n, u as f64 * quantum))
        .collect();
    Ok((costs, OraclePlan { entries, costs }))
}

/// All lattice points of the pair's padded bounding box that satisfy both
/// midpoint equalities within `1e−9`; the reference for [`mid_region`].
pub fn lattice_mid_scan(p: Point, q: Point, resolution: usize) -> Result<Vec<Point>> {
    if resolution < 10 {
        return Err(Error::Precondition(format!("resolution must be at least 10, got {resolution}")));
    }
    let theta = linf_dist(p, q);
    let pad = 0.25 * theta.max(1e-6);
    let x0 = p.x.min(q.x) - pad;
    let x1 = p.x.max(q.x) + pad;
    let y0 = p.y.min(q.y) - pad;
    let y1 = p.y.max(q.y) + pad;
    let mut hits = Vec::new();
    for i in 0..resolution {
        let x = x0 + (x1 - x0) * i as f64 / (resolution - 1) as f64;
        for j in 0..resolution {
            let y = y0 + (y1 - y0) * j as f64 / (resolution - 1) as f64;
            let z = point(x, y);
            if (linf_dist(p, z) - 0.5 * theta).abs() <= 1e-9
                && (linf_dist(q, z) - 0.5 * theta).abs() <= 1e-9
            {
                hits.push(z);
            }
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_instance() {
        let inst = TinyInstance::unit(vec![point(0.0, 0.0)], vec![point(1.0, 0.0)]).unwrap();
        let (cost, plans) = brute_force_ot(&inst).unwrap();
        assert_eq!(cost, 1.0);
        assert_eq!(plans.len(), 1);
        assert_eq!(plans[0].entries, vec![(0, 0, 1.0)]);
    }

    #[test]
    fn two_by_two_both_pairings_optimal() {
        let inst = TinyInstance::unit(
            vec![point(0.0, 0.0), point(0.0, 1.0)],
            vec![point(2.0, 0.0), point(2.0, 1.0)],
        )
        .unwrap();
        let (cost, plans) = brute_force_ot(&inst).unwrap();
        assert!((cost - 4.0).abs() < 1e-12);
        // straight and crossed pairings both cost 4 under the sup norm
        assert_eq!(plans.len(), 2);
    }

    #[test]
    fn lex_selects_straight_pairing() {
        let inst = TinyInstance::unit(
            vec![point(0.0, 0.0), point(0.0, 1.0)],
            vec![point(2.0, 0.0), point(2.0, 1.0)],
        )
        .unwrap();
        let (triple, plan) = brute_force_lex(&inst).unwrap();
        assert!((triple.primary - 4.0).abs() < 1e-12);
        assert!((triple.secondary - 4.0).abs() < 1e-12);
        assert!(triple.tertiary.abs() < 1e-12);
        assert_eq!(plan.entries, vec![(0, 0, 0.5), (1, 1, 0.5)]);
    }

    #[test]
    fn lex_identity_instance_is_zero() {
        let pts = vec![point(0.1, 0.2), point(0.4, 0.9)];
        let inst = TinyInstance::unit(pts.clone(), pts).unwrap();
        let (triple, _) = brute_force_lex(&inst).unwrap();
        assert_eq!((triple.primary, triple.secondary, triple.tertiary), (0.0, 0.0, 0.0));
    }

    #[test]
    fn lex_vertical_instance() {
        let inst = TinyInstance::unit(
            vec![point(0.0, 0.0), point(1.0, 0.0)],
            vec![point(0.0, 2.0), point(1.0, 2.0)],
        )
        .unwrap();
        let (triple, plan) = brute_force_lex(&inst).unwrap();
        // straight pairing: each displacement (0, 2)
        assert!((triple.primary - 4.0).abs() < 1e-12);
        assert!(triple.secondary.abs() < 1e-12);
        assert!((triple.tertiary - 4.0).abs() < 1e-12);
        assert_eq!(plan.entries, vec![(0, 0, 0.5), (1, 1, 0.5)]);
    }

    #[test]
    fn fractional_masses_enumerate() {
        // 2 sources with masses (3/4, 1/4) onto 2 targets (1/2, 1/2)
        let inst = TinyInstance::new(
            vec![(point(0.0, 0.0), 0.75), (point(1.0, 0.0), 0.25)],
            vec![(point(0.0, 1.0), 0.5), (point(1.0, 1.0), 0.5)],
            4,
        )
        .unwrap();
        let (cost, _) = brute_force_ot(&inst).unwrap();
        // moving the excess quarter from source 0 to target 1 costs max(1,1)^2
        let expect = 0.5 * 1.0 + 0.25 * 1.0 + 0.25 * 1.0;
        assert!((cost - expect).abs() < 1e-12);
    }

    #[test]
    fn brute_force_bounds_random_feasible_plans() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(2..=4usize);
            let src: Vec<Point> = (0..n).map(|_| point(rng.gen::<f64>(), rng.gen::<f64>())).collect();
            let dst: Vec<Point> = (0..n).map(|_| point(rng.gen::<f64>(), rng.gen::<f64>())).collect();
            let inst = TinyInstance::unit(src.clone(), dst.clone()).unwrap();
            let (best, _) = brute_force_ot(&inst).unwrap();
            // any permutation plan is feasible, so it cannot beat the optimum
            let mut perm: Vec<usize> = (0..n).collect();
            for _ in 0..3 {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                perm.swap(i, j);
                let cost: f64 = (0..n)
                    .map(|k| {
                        let d = linf_dist(src[k], dst[perm[k]]);
                        d * d / n as f64
                    })
                    .sum();
                assert!(best <= cost + 1e-12);
            }
        }
    }

    #[test]
    fn lattice_scan_horizontal_pair() {
        let hits = lattice_mid_scan(point(0.0, 0.0), point(4.0, 2.0), 401).unwrap();
        assert!(!hits.is_empty());
        for z in &hits {
            assert!((z.x - 2.0).abs() <= 1e-9);
            assert!(z.y >= -1e-9 && z.y <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn lattice_scan_identical_points() {
        let hits = lattice_mid_scan(point(1.0, 1.0), point(1.0, 1.0), 41).unwrap();
        // every hit coincides with the point itself
        for z in &hits {
            assert!(linf_dist(*z, point(1.0, 1.0)) <= 1e-9);
        }
        assert!(!hits.is_empty());
    }

    #[test]
    fn lattice_scan_diagonal_unique_midpoint() {
        let hits = lattice_mid_scan(point(0.0, 0.0), point(2.0, 2.0), 401).unwrap();
        assert!(!hits.is_empty());
        for z in &hits {
            assert!(linf_dist(*z, point(1.0, 1.0)) <= 2e-9, "stray hit at {z:?}");
        }
    }
}
