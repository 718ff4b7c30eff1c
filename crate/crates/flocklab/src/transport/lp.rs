//! Exact transportation linear program via successive shortest paths.
//!
//! The graph is complete bipartite (atoms of `mu` to atoms of `nu`) with the
//! torus ground cost. Node potentials keep reduced costs nonnegative, so each
//! augmentation follows a Dijkstra shortest path; augmenting by the full
//! bottleneck zeroes a supply, a demand, or a backward arc each round, which
//! terminates quickly at the sizes the cap allows.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::AtomicMeasure;
use crate::domain::torus_distance;
use crate::error::{Error, Result};

/// Upper bound on `n1 * n2` for the LP oracle.
pub const LP_SIZE_CAP: usize = 4096;

const MASS_EPS: f64 = 1e-15;

/// One nonzero entry of a transport plan.
#[derive(Clone, Copy, Debug)]
pub struct PlanEntry {
    pub from: usize,
    pub to: usize,
    pub mass: f64,
}

/// Feasible coupling between two atomic measures.
#[derive(Clone, Debug)]
pub struct CouplingPlan {
    pub entries: Vec<PlanEntry>,
}

impl CouplingPlan {
    /// Row sums (mass leaving each source atom).
    pub fn source_marginal(&self, n1: usize) -> Vec<f64> {
        let mut m = vec![0.0; n1];
        for e in &self.entries {
            m[e.from] += e.mass;
        }
        m
    }

    /// Column sums (mass arriving at each target atom).
    pub fn target_marginal(&self, n2: usize) -> Vec<f64> {
        let mut m = vec![0.0; n2];
        for e in &self.entries {
            m[e.to] += e.mass;
        }
        m
    }
}

#[derive(PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on dist
        other.dist.total_cmp(&self.dist)
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Solve the transportation LP for a given cost matrix (row-major n1 x n2).
/// Returns the optimal total cost and a plan.
fn solve_transport(
    supply_in: &[f64],
    demand_in: &[f64],
    cost: &[f64],
) -> Result<(f64, CouplingPlan)> {
    let n1 = supply_in.len();
    let n2 = demand_in.len();
    let n = n1 + n2;
    let mut supply = supply_in.to_vec();
    let mut demand = demand_in.to_vec();
    let mut flow = vec![0.0; n1 * n2];
    let mut pot = vec![0.0; n]; // node potentials
    let inf = f64::INFINITY;

    let mut remaining: f64 = demand.iter().sum();
    let mut rounds = 0usize;
    while remaining > 1e-12 {
        rounds += 1;
        if rounds > 200_000 {
            return Err(Error::DegenerateFit("transport LP failed to converge".into()));
        }
        // multi-source Dijkstra on reduced costs
        let mut dist = vec![inf; n];
        let mut parent = vec![usize::MAX; n];
        let mut settled = vec![false; n];
        let mut heap = BinaryHeap::new();
        for (i, s) in supply.iter().enumerate() {
            if *s > MASS_EPS {
                dist[i] = 0.0;
                heap.push(HeapItem { dist: 0.0, node: i });
            }
        }
        let mut target = usize::MAX;
        while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
            if settled[u] || d > dist[u] {
                continue;
            }
            settled[u] = true;
            if u >= n1 && demand[u - n1] > MASS_EPS {
                target = u;
                break;
            }
            if u < n1 {
                // forward arcs i -> j
                for j in 0..n2 {
                    let v = n1 + j;
                    if settled[v] {
                        continue;
                    }
                    let rc = (cost[u * n2 + j] + pot[u] - pot[v]).max(0.0);
                    if d + rc < dist[v] {
                        dist[v] = d + rc;
                        parent[v] = u;
                        heap.push(HeapItem { dist: dist[v], node: v });
                    }
                }
            } else {
                // backward arcs j -> i along existing flow
                let j = u - n1;
                for i in 0..n1 {
                    if settled[i] || flow[i * n2 + j] <= MASS_EPS {
                        continue;
                    }
                    let rc = (-cost[i * n2 + j] + pot[u] - pot[i]).max(0.0);
                    if d + rc < dist[i] {
                        dist[i] = d + rc;
                        parent[i] = u;
                        heap.push(HeapItem { dist: dist[i], node: i });
                    }
                }
            }
        }
        if target == usize::MAX {
            return Err(Error::DegenerateFit("transport LP: no augmenting path".into()));
        }
        let d_target = dist[target];
        for u in 0..n {
            pot[u] += dist[u].min(d_target);
        }
        // bottleneck along the path
        let mut bottleneck = demand[target - n1];
        let mut u = target;
        while parent[u] != usize::MAX {
            let p = parent[u];
            if u < n1 {
                // backward arc p(sink) -> u(source)
                bottleneck = bottleneck.min(flow[u * n2 + (p - n1)]);
            }
            u = p;
        }
        bottleneck = bottleneck.min(supply[u]);
        debug_assert!(bottleneck > 0.0);
        // apply
        let source = u;
        let mut v = target;
        while parent[v] != usize::MAX {
            let p = parent[v];
            if v >= n1 {
                flow[p * n2 + (v - n1)] += bottleneck;
            } else {
                flow[v * n2 + (p - n1)] -= bottleneck;
            }
            v = p;
        }
        supply[source] -= bottleneck;
        demand[target - n1] -= bottleneck;
        remaining -= bottleneck;
    }

    let mut entries = Vec::new();
    let mut total = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            let f = flow[i * n2 + j];
            if f > MASS_EPS {
                entries.push(PlanEntry { from: i, to: j, mass: f });
                total += f * cost[i * n2 + j];
            }
        }
    }
    Ok((total, CouplingPlan { entries }))
}

fn check_cap(n1: usize, n2: usize) -> Result<()> {
    let size = n1 * n2;
    if size > LP_SIZE_CAP {
        return Err(Error::SizeCap { size, cap: LP_SIZE_CAP });
    }
    Ok(())
}

fn cost_matrix<const D: usize>(
    mu: &AtomicMeasure<D>,
    nu: &AtomicMeasure<D>,
    squared: bool,
) -> Vec<f64> {
    let mut c = Vec::with_capacity(mu.len() * nu.len());
    for p in &mu.points {
        for q in &nu.points {
            let d = torus_distance(p, q);
            c.push(if squared { d * d } else { d });
        }
    }
    c
}

/// Exact W2 between atomic measures by linear programming.
/// Returns the distance and the optimal coupling.
pub fn w2_discrete_oracle<const D: usize>(
    mu: &AtomicMeasure<D>,
    nu: &AtomicMeasure<D>,
) -> Result<(f64, CouplingPlan)> {
    check_cap(mu.len(), nu.len())?;
    let cost = cost_matrix(mu, nu, true);
    let (total, plan) = solve_transport(&mu.weights, &nu.weights, &cost)?;
    Ok((total.max(0.0).sqrt(), plan))
}

/// Exact W1 between atomic measures by linear programming.
pub fn w1_discrete<const D: usize>(
    mu: &AtomicMeasure<D>,
    nu: &AtomicMeasure<D>,
) -> Result<f64> {
    check_cap(mu.len(), nu.len())?;
    let cost = cost_matrix(mu, nu, false);
    let (total, _) = solve_transport(&mu.weights, &nu.weights, &cost)?;
    Ok(total.max(0.0))
}
