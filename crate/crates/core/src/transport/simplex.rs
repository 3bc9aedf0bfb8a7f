//! Dense transportation-problem network simplex.
//!
//! Solves `min Σ c_ij x_ij` subject to row sums = supply, column sums =
//! demand, `x ≥ 0`, with an optional arc mask used by the lexicographic
//! stages to restrict pivoting to an optimal face. The basis is a spanning
//! tree over the bipartite node set; potentials and the tree are rebuilt in
//! `O(m+n)` after each pivot, which is cheap next to the entering-arc scan.

use crate::measure::KahanSum;
use crate::{Error, Result};

/// Result of one transportation solve.
#[derive(Clone, Debug)]
pub struct SimplexOutcome {
    /// Basic arcs (spanning tree), `m + n - 1` of them.
    pub basis: Vec<(usize, usize)>,
    /// Flow on each basic arc, same order as `basis`.
    pub flows: Vec<f64>,
    /// Source potentials.
    pub u: Vec<f64>,
    /// Target potentials.
    pub v: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl SimplexOutcome {
    /// Reduced cost of arc `(i, j)` at the final potentials.
    pub fn reduced_cost(&self, cost: &[f64], n: usize, i: usize, j: usize) -> f64 {
        cost[i * n + j] - self.u[i] - self.v[j]
    }
}

struct Tree {
    m: usize,
    n: usize,
    arcs: Vec<(usize, usize)>,
    flows: Vec<f64>,
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<u32>,
    pot: Vec<f64>,
}

const NO_NODE: usize = usize::MAX;

impl Tree {
    fn node_count(&self) -> usize {
        self.m + self.n
    }

    /// Rebuild adjacency, parent pointers, depths and potentials from the
    /// current arc list.
    fn rebuild(&mut self, cost: &[f64], stage: u8) -> Result<()> {
        let nn = self.node_count();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nn];
        for (idx, &(i, j)) in self.arcs.iter().enumerate() {
            adj[i].push((self.m + j, idx));
            adj[self.m + j].push((i, idx));
        }
        self.parent.clear();
        self.parent.resize(nn, NO_NODE);
        self.parent_arc.clear();
        self.parent_arc.resize(nn, usize::MAX);
        self.depth.clear();
        self.depth.resize(nn, 0);
        self.pot.clear();
        self.pot.resize(nn, 0.0);
        let mut seen = vec![false; nn];
        let mut queue = std::collections::VecDeque::new();
        seen[0] = true;
        queue.push_back(0usize);
        let mut visited = 1usize;
        while let Some(node) = queue.pop_front() {
            for &(next, arc) in &adj[node] {
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                visited += 1;
                self.parent[next] = node;
                self.parent_arc[next] = arc;
                self.depth[next] = self.depth[node] + 1;
                let (i, j) = self.arcs[arc];
                let c = cost[i * self.n + j];
                self.pot[next] = if next >= self.m {
                    // target node: v[j] = c - u[i]
                    c - self.pot[i]
                } else {
                    // source node: u[i] = c - v[j]
                    c - self.pot[self.m + j]
                };
                queue.push_back(next);
            }
        }
        if visited != nn {
            return Err(Error::SolverStall { stage, iterations: 0 });
        }
        Ok(())
    }
}

/// Northwest-corner starting basis: deterministic spanning tree with
/// `m + n - 1` arcs.
fn northwest_basis(supply: &[f64], demand: &[f64]) -> (Vec<(usize, usize)>, Vec<f64>) {
    let m = supply.len();
    let n = demand.len();
    let mut arcs = Vec::with_capacity(m + n - 1);
    let mut flows = Vec::with_capacity(m + n - 1);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut ra = supply[0];
    let mut rb = demand[0];
    loop {
        let f = ra.min(rb).max(0.0);
        arcs.push((i, j));
        flows.push(f);
        ra -= f;
        rb -= f;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if (ra <= rb && i < m - 1) || j == n - 1 {
            i += 1;
            ra += supply[i];
        } else {
            j += 1;
            rb += demand[j];
        }
    }
    (arcs, flows)
}

/// Solve a dense transportation problem.
///
/// `cost` is row-major `m × n`. Masked arcs (`allowed[idx] == false`) are
/// priced out with a large cost; the final solution must leave them at zero
/// flow or the restricted problem is reported infeasible. `warm` restarts
/// from a previous basis and its flows.
pub fn solve_transportation(
    supply: &[f64],
    demand: &[f64],
    cost: &[f64],
    allowed: Option<&[bool]>,
    warm: Option<(&[(usize, usize)], &[f64])>,
    stage: u8,
) -> Result<SimplexOutcome> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 {
        return Err(Error::EmptySupport);
    }
    debug_assert_eq!(cost.len(), m * n);
    let total_supply: f64 = supply.iter().sum();
    let total_demand: f64 = demand.iter().sum();
    if (total_supply - total_demand).abs() > 1e-10 * total_supply.abs().max(1.0) {
        return Err(Error::MassMismatch { source_total: total_supply, target_total: total_demand });
    }

    let mut cost_scale = 0.0f64;
    for (idx, &c) in cost.iter().enumerate() {
        if allowed.map_or(true, |a| a[idx]) {
            cost_scale = cost_scale.max(c.abs());
        }
    }
    let enter_tol = 1e-11 * cost_scale.max(1e-300);

    // Price masked arcs out instead of excluding them structurally; this
    // keeps cold starts and degenerate bases valid under any mask.
    let big_m = 1e6 * cost_scale.max(1e-12);
    let effective: Vec<f64>;
    let cost_eff: &[f64] = match allowed {
        Some(mask) => {
            effective = cost
                .iter()
                .zip(mask)
                .map(|(&c, &ok)| if ok { c } else { big_m })
                .collect();
            &effective
        }
        None => cost,
    };

    let (arcs, flows) = match warm {
        Some((basis, basis_flows)) => (basis.to_vec(), basis_flows.to_vec()),
        None => northwest_basis(supply, demand),
    };
    let mut tree = Tree {
        m,
        n,
        arcs,
        flows,
        parent: Vec::new(),
        parent_arc: Vec::new(),
        depth: Vec::new(),
        pot: Vec::new(),
    };
    tree.rebuild(cost_eff, stage)?;

    let arc_count = m * n;
    let block = (arc_count as f64).sqrt().ceil() as usize;
    let block = block.clamp(64.min(arc_count), 8192);
    let max_iter = 500 * (m + n) + 2000;
    let mut cursor = 0usize;
    let mut iterations = 0usize;
    let mut degenerate_streak = 0usize;
    let mut bland = false;

    loop {
        if iterations > max_iter {
            return Err(Error::SolverStall { stage, iterations });
        }

        // entering arc
        let mut entering: Option<(usize, usize)> = None;
        if bland {
            for idx in 0..arc_count {
                let (i, j) = (idx / n, idx % n);
                let rc = cost_eff[idx] - tree.pot[i] - tree.pot[m + j];
                if rc < -enter_tol {
                    entering = Some((i, j));
                    break;
                }
            }
        } else {
            let mut scanned = 0usize;
            while scanned < arc_count {
                let mut best_rc = -enter_tol;
                let mut best: Option<(usize, usize)> = None;
                let len = block.min(arc_count - scanned);
                for off in 0..len {
                    let real = (cursor + off) % arc_count;
                    let (i, j) = (real / n, real % n);
                    let rc = cost_eff[real] - tree.pot[i] - tree.pot[m + j];
                    if rc < best_rc {
                        best_rc = rc;
                        best = Some((i, j));
                    }
                }
                scanned += len;
                cursor = (cursor + len) % arc_count;
                if best.is_some() {
                    entering = best;
                    break;
                }
            }
        }

        let (ei, ej) = match entering {
            Some(e) => e,
            None => break, // optimal
        };

        // cycle: entering arc plus the tree path from target node back to
        // the source node
        let mut a = ei;
        let mut b = m + ej;
        let mut path_a: Vec<usize> = Vec::new(); // arcs walking up from a
        let mut path_b: Vec<usize> = Vec::new();
        while tree.depth[a] > tree.depth[b] {
            path_a.push(tree.parent_arc[a]);
            a = tree.parent[a];
        }
        while tree.depth[b] > tree.depth[a] {
            path_b.push(tree.parent_arc[b]);
            b = tree.parent[b];
        }
        while a != b {
            path_a.push(tree.parent_arc[a]);
            a = tree.parent[a];
            path_b.push(tree.parent_arc[b]);
            b = tree.parent[b];
        }

        // Pushing δ on the entering arc adds outflow at source ei and inflow
        // at target m+ej, so on both tree paths the first arc loses δ and
        // signs alternate from there (the tree is bipartite, so every path
        // alternates source/target nodes).
        let mut deltas: Vec<(usize, f64)> = Vec::with_capacity(path_a.len() + path_b.len());
        for (k, &arc) in path_b.iter().enumerate() {
            deltas.push((arc, if k % 2 == 0 { -1.0 } else { 1.0 }));
        }
        for (k, &arc) in path_a.iter().enumerate() {
            deltas.push((arc, if k % 2 == 0 { -1.0 } else { 1.0 }));
        }

        // ratio test over arcs losing flow
        let mut delta = f64::INFINITY;
        let mut leaving: Option<usize> = None;
        for &(arc, sign) in &deltas {
            if sign < 0.0 {
                let f = tree.flows[arc];
                let take = match leaving {
                    None => true,
                    Some(cur) => f < delta || (f == delta && tree.arcs[arc] < tree.arcs[cur]),
                };
                if take {
                    delta = f;
                    leaving = Some(arc);
                }
            }
        }
        let leaving = match leaving {
            Some(l) => l,
            None => {
                // no arc loses flow: unbounded cycle cannot happen in a
                // balanced transportation problem
                return Err(Error::SolverStall { stage, iterations });
            }
        };
        let delta = delta.max(0.0);

        for &(arc, sign) in &deltas {
            tree.flows[arc] = (tree.flows[arc] + sign * delta).max(0.0);
        }
        tree.arcs[leaving] = (ei, ej);
        tree.flows[leaving] = delta;
        tree.rebuild(cost_eff, stage)?;

        iterations += 1;
        if delta <= 0.0 {
            degenerate_streak += 1;
            if degenerate_streak > 4 * (m + n) {
                bland = true;
            }
        } else {
            degenerate_streak = 0;
            bland = false;
        }
    }

    // A masked arc still carrying flow means the restricted problem had no
    // feasible solution on the allowed arcs.
    if let Some(mask) = allowed {
        for (idx, &(i, j)) in tree.arcs.iter().enumerate() {
            if !mask[i * n + j] && tree.flows[idx] > 1e-10 * total_supply.max(1.0) {
                return Err(Error::SolverStall { stage, iterations });
            }
        }
    }

    let mut objective = KahanSum::new();
    for (idx, &(i, j)) in tree.arcs.iter().enumerate() {
        objective.add(tree.flows[idx] * cost[i * n + j]);
    }
    let (u, v) = (tree.pot[..m].to_vec(), tree.pot[m..].to_vec());
    Ok(SimplexOutcome {
        basis: tree.arcs,
        flows: tree.flows,
        u,
        v,
        objective: objective.value(),
        iterations,
    })
}
