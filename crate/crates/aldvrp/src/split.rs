//! Optimal partition of a giant tour into feasible vehicle routes: shortest
//! path on the auxiliary DAG over tour positions, with a route-count label to
//! respect the fleet size.

use crate::error::{Error, Result};
use crate::evaluate::{Evaluator, Solution};

/// Default cap on customers per route during arc enumeration.
pub const DEFAULT_MAX_ROUTE_LEN: usize = 40;

/// Splits `tour` (a permutation of all customers) into the minimum-total-
/// energy set of contiguous routes that each satisfy capacity, battery and
/// horizon, using at most `fleet_size` vehicles.
///
/// Ties prefer fewer routes, then the first-found (smallest predecessor)
/// split points.
pub fn split_with(tour: &[usize], ev: &Evaluator, max_route_len: usize) -> Result<Solution> {
    let inst = ev.instance;
    let n = tour.len();
    let fleet = inst.fleet_size;
    if n == 0 {
        return Ok(Solution::default());
    }

    let inf = f64::INFINITY;
    // cost[v][r]: cheapest way to serve the first v tour customers with r routes.
    let mut cost = vec![vec![inf; fleet + 1]; n + 1];
    let mut pred = vec![vec![usize::MAX; fleet + 1]; n + 1];
    cost[0][0] = 0.0;

    for u in 0..n {
        if cost[u].iter().all(|c| !c.is_finite()) {
            continue;
        }
        let mut demand = 0.0;
        for v in u + 1..=n.min(u + max_route_len) {
            demand += inst.demand(tour[v - 1]);
            if demand > inst.vehicle.load_capacity {
                break; // loads only grow with the subsequence
            }
            let route = match ev.route(0, &tour[u..v]) {
                Ok(route) => route,
                Err(Error::HorizonExceeded { .. }) => continue,
                Err(e) => return Err(e),
            };
            if route.energy > inst.vehicle.battery_capacity
                || route.arrival_end > inst.horizon
            {
                continue;
            }
            let w = route.energy;
            for r in 0..fleet {
                if cost[u][r].is_finite() && cost[u][r] + w < cost[v][r + 1] {
                    cost[v][r + 1] = cost[u][r] + w;
                    pred[v][r + 1] = u;
                }
            }
        }
    }

    // Fewest routes wins ties on cost.
    let mut best: Option<(f64, usize)> = None;
    for r in 1..=fleet {
        if cost[n][r].is_finite() {
            let better = match best {
                None => true,
                Some((c, _)) => cost[n][r] < c,
            };
            if better {
                best = Some((cost[n][r], r));
            }
        }
    }
    let (_, mut r) = best.ok_or(Error::InfeasibleTour { fleet_size: fleet })?;

    let mut boundaries = Vec::new();
    let mut v = n;
    while v > 0 {
        let u = pred[v][r];
        boundaries.push((u, v));
        v = u;
        r -= 1;
    }
    boundaries.reverse();

    let lists: Vec<Vec<usize>> = boundaries
        .iter()
        .map(|&(u, v)| tour[u..v].to_vec())
        .collect();
    ev.solution(&lists)
}

/// Split with the default route-length cap.
pub fn split(tour: &[usize], ev: &Evaluator) -> Result<Solution> {
    split_with(tour, ev, DEFAULT_MAX_ROUTE_LEN)
}
