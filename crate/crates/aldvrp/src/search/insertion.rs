//! Insertion operators: random, greedy (cheapest feasible) and regret-k.

use super::{SearchCtx, Working};
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Feasible insertions of `customer` into route `r`, as `(cost_delta, pos)`
/// sorted cheapest first.
fn route_candidates(w: &Working, ctx: &SearchCtx, customer: usize, r: usize) -> Vec<(f64, usize)> {
    let route = &w.routes[r];
    let inst = ctx.ev.instance;
    let load: f64 = route.iter().map(|&v| inst.demand(v)).sum();
    if load + inst.demand(customer) > inst.vehicle.load_capacity {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut scratch = Vec::with_capacity(route.len() + 1);
    for pos in 0..=route.len() {
        scratch.clear();
        scratch.extend_from_slice(&route[..pos]);
        scratch.push(customer);
        scratch.extend_from_slice(&route[pos..]);
        if let Some(cost) = ctx.route_cost(&scratch) {
            out.push((cost - w.energies[r], pos));
        }
    }
    out.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    out
}

fn apply_insert(w: &mut Working, ctx: &SearchCtx, customer: usize, r: usize, pos: usize) {
    w.routes[r].insert(pos, customer);
    w.energies[r] = ctx
        .ev
        .route_cost(&w.routes[r])
        .map(|(e, _)| e)
        .expect("candidate insertion was feasible");
}

/// Opens a fresh single-customer route if the fleet allows it.
fn open_route(w: &mut Working, ctx: &SearchCtx, customer: usize) -> Result<()> {
    if w.routes.len() >= ctx.ev.instance.fleet_size {
        return Err(Error::InsertionFailed { customer });
    }
    let cost = ctx
        .route_cost(&[customer])
        .ok_or(Error::InsertionFailed { customer })?;
    w.routes.push(vec![customer]);
    w.energies.push(cost);
    Ok(())
}

/// Inserts each removed customer at a uniformly random feasible position.
pub fn insert_random(
    w: &mut Working,
    removed: &[usize],
    rng: &mut ChaCha8Rng,
    ctx: &SearchCtx,
) -> Result<()> {
    let mut pending = removed.to_vec();
    pending.shuffle(rng);
    for customer in pending {
        let mut slots = Vec::new();
        for r in 0..w.routes.len() {
            for (_, pos) in route_candidates(w, ctx, customer, r) {
                slots.push((r, pos));
            }
        }
        if slots.is_empty() {
            open_route(w, ctx, customer)?;
            continue;
        }
        let (r, pos) = slots[rng.random_range(0..slots.len())];
        apply_insert(w, ctx, customer, r, pos);
    }
    Ok(())
}

/// Best feasible insertion per pending customer, maintained lazily: entries
/// recompute only for routes that changed since the last query.
struct CandidateTable {
    // per pending customer: per route, Option<sorted candidates>
    rows: Vec<Vec<Option<Vec<(f64, usize)>>>>,
}

impl CandidateTable {
    fn new(customers: usize, routes: usize) -> Self {
        CandidateTable {
            rows: vec![vec![None; routes]; customers],
        }
    }

    fn invalidate_route(&mut self, r: usize) {
        for row in &mut self.rows {
            if r < row.len() {
                row[r] = None;
            }
        }
    }

    fn add_route(&mut self) {
        for row in &mut self.rows {
            row.push(None);
        }
    }

    fn ensure(&mut self, w: &Working, ctx: &SearchCtx, ci: usize, customer: usize) {
        for r in 0..w.routes.len() {
            if self.rows[ci][r].is_none() {
                self.rows[ci][r] = Some(route_candidates(w, ctx, customer, r));
            }
        }
    }

    /// Up to `k` globally cheapest candidates for one customer.
    fn top_k(&self, ci: usize, k: usize) -> Vec<(f64, usize, usize)> {
        let mut all: Vec<(f64, usize, usize)> = Vec::new();
        for (r, cands) in self.rows[ci].iter().enumerate() {
            for &(cost, pos) in cands.as_deref().unwrap_or(&[]) {
                all.push((cost, r, pos));
            }
        }
        all.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        all.truncate(k);
        all
    }
}

/// Repeatedly applies the globally cheapest feasible insertion. Customers
/// with no feasible position anywhere trigger a new route while the fleet
/// allows, otherwise the repair fails.
pub fn insert_greedy(w: &mut Working, removed: &[usize], ctx: &SearchCtx) -> Result<()> {
    insert_by_priority(w, removed, ctx, 1)
}

/// Regret-k insertion: the customer with the largest gap between its best and
/// k-th best insertion cost goes first, at its best position. Customers with
/// fewer than k feasible positions take precedence.
pub fn insert_regret(w: &mut Working, removed: &[usize], k: usize, ctx: &SearchCtx) -> Result<()> {
    insert_by_priority(w, removed, ctx, k.max(1))
}

fn insert_by_priority(w: &mut Working, removed: &[usize], ctx: &SearchCtx, k: usize) -> Result<()> {
    let mut pending = removed.to_vec();
    pending.sort_unstable();
    let mut table = CandidateTable::new(pending.len(), w.routes.len());
    let mut done = vec![false; pending.len()];

    for _ in 0..pending.len() {
        let mut best_choice: Option<(f64, f64, usize, usize, usize)> = None; // (regret desc, cost, ci, r, pos)
        let mut stranded: Option<usize> = None;
        for ci in 0..pending.len() {
            if done[ci] {
                continue;
            }
            table.ensure(w, ctx, ci, pending[ci]);
            let top = table.top_k(ci, k);
            if top.is_empty() {
                stranded.get_or_insert(ci);
                continue;
            }
            let best = top[0];
            let regret = if k == 1 {
                0.0
            } else if top.len() < k {
                f64::INFINITY // fewer than k options: highest priority
            } else {
                top[k - 1].0 - best.0
            };
            let better = match best_choice {
                None => true,
                Some((br, bc, ..)) => regret > br || (regret == br && best.0 < bc),
            };
            if better {
                best_choice = Some((regret, best.0, ci, best.1, best.2));
            }
        }

        if let Some(ci) = stranded {
            // No feasible slot anywhere for this customer: open a route.
            open_route(w, ctx, pending[ci])?;
            done[ci] = true;
            table.add_route();
            continue;
        }
        let (_, _, ci, r, pos) =
            best_choice.expect("either a candidate or a stranded customer exists");
        apply_insert(w, ctx, pending[ci], r, pos);
        done[ci] = true;
        table.invalidate_route(r);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{EvalMode, Evaluator};
    use crate::model::{generate_instance, GeneratorConfig, Instance};
    use crate::search::SearchConfig;
    use rand::SeedableRng;

    fn setup(n: usize, seed: u64) -> (Instance, SearchConfig) {
        (
            generate_instance(n, seed, &GeneratorConfig::default()).unwrap(),
            SearchConfig::default(),
        )
    }

    fn working_of(inst: &Instance, lists: &[Vec<usize>], cfg: &SearchConfig) -> Working {
        let ev = Evaluator::new(inst, cfg.mode).with_service_time(cfg.service_time);
        Working::from_solution(&ev.solution(lists).unwrap())
    }

    #[test]
    fn single_customer_greedy_equals_regret() {
        let (inst, cfg) = setup(6, 31);
        let ctx = SearchCtx::new(&inst, &cfg);
        let lists = vec![vec![1, 2], vec![4, 5, 6]];
        for k in [2, 3, 5] {
            let mut g = working_of(&inst, &lists, &cfg);
            insert_greedy(&mut g, &[3], &ctx).unwrap();
            let mut r = working_of(&inst, &lists, &cfg);
            insert_regret(&mut r, &[3], k, &ctx).unwrap();
            assert_eq!(g.routes, r.routes, "k = {k}");
        }
    }

    #[test]
    fn insertion_cost_is_route_energy_difference() {
        let (inst, cfg) = setup(5, 32);
        let ctx = SearchCtx::new(&inst, &cfg);
        let w = working_of(&inst, &[vec![1, 2, 4]], &cfg);
        let ev = Evaluator::new(&inst, EvalMode::RealTime);
        let before = ev.route(0, &[1, 2, 4]).unwrap().energy;
        for (cost, pos) in route_candidates(&w, &ctx, 3, 0) {
            let mut visits = vec![1, 2, 4];
            visits.insert(pos, 3);
            let after = ev.route(0, &visits).unwrap().energy;
            assert!(
                (cost - (after - before)).abs() < 1e-9,
                "pos {pos}: {cost} vs {}",
                after - before
            );
        }
    }

    #[test]
    fn greedy_matches_brute_force_cheapest_insertion_trace() {
        let (mut inst, cfg) = setup(5, 33);
        inst.fleet_size = 2;
        let ctx = SearchCtx::new(&inst, &cfg);
        let start = vec![vec![1], vec![2]];
        let removed = [3, 4, 5];

        let mut w = working_of(&inst, &start, &cfg);
        insert_greedy(&mut w, &removed, &ctx).unwrap();

        // Independent trace: full enumeration of (customer, route, position)
        // at every step, applying the cheapest feasible insertion.
        let ev = Evaluator::new(&inst, EvalMode::RealTime);
        let mut routes = start.clone();
        let mut pending: Vec<usize> = removed.to_vec();
        while !pending.is_empty() {
            let mut best: Option<(f64, usize, usize, usize)> = None;
            for (pi, &c) in pending.iter().enumerate() {
                for (ri, route) in routes.iter().enumerate() {
                    let load: f64 =
                        route.iter().map(|&v| inst.demand(v)).sum::<f64>() + inst.demand(c);
                    if load > inst.vehicle.load_capacity {
                        continue;
                    }
                    let base = ev.route(0, route).unwrap().energy;
                    for pos in 0..=route.len() {
                        let mut trial = route.clone();
                        trial.insert(pos, c);
                        let Ok(r) = ev.route(0, &trial) else { continue };
                        if r.energy > inst.vehicle.battery_capacity {
                            continue;
                        }
                        let delta = r.energy - base;
                        let better = match best {
                            None => true,
                            Some((bd, ..)) => delta < bd,
                        };
                        if better {
                            best = Some((delta, pi, ri, pos));
                        }
                    }
                }
            }
            let (_, pi, ri, pos) = best.expect("feasible insertion exists");
            let c = pending.remove(pi);
            routes[ri].insert(pos, c);
        }

        assert_eq!(w.routes, routes);
    }

    #[test]
    fn random_insertion_covers_everyone_or_fails_cleanly() {
        let (mut inst, cfg) = setup(8, 34);
        inst.fleet_size = 4;
        let ctx = SearchCtx::new(&inst, &cfg);
        let mut w = working_of(&inst, &[vec![1, 2], vec![3, 4]], &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        insert_random(&mut w, &[5, 6, 7, 8], &mut rng, &ctx).unwrap();
        assert_eq!(w.customer_count(), 8);
    }

    #[test]
    fn fleet_exhaustion_fails_with_the_customer_named() {
        let (mut inst, cfg) = setup(3, 35);
        // Nothing fits in a shared route, and only one vehicle exists.
        let max_demand = inst
            .customers()
            .map(|c| inst.demand(c))
            .fold(0.0, f64::max);
        inst.vehicle.load_capacity = max_demand + 1.0;
        inst.fleet_size = 1;
        let ctx = SearchCtx::new(&inst, &cfg);
        let mut w = working_of(&inst, &[vec![1]], &cfg);
        let err = insert_greedy(&mut w, &[2, 3], &ctx).unwrap_err();
        assert!(matches!(err, Error::InsertionFailed { .. }));
    }

    #[test]
    fn regret_covers_everyone_and_is_deterministic() {
        let (mut inst, cfg) = setup(8, 36);
        inst.fleet_size = 3;
        let ctx = SearchCtx::new(&inst, &cfg);
        let lists = vec![vec![1, 2], vec![3, 4]];
        let mut a = working_of(&inst, &lists, &cfg);
        insert_regret(&mut a, &[5, 6, 7, 8], 3, &ctx).unwrap();
        let mut b = working_of(&inst, &lists, &cfg);
        insert_regret(&mut b, &[5, 6, 7, 8], 3, &ctx).unwrap();
        assert_eq!(a.routes, b.routes);
        assert_eq!(a.customer_count(), 8);
    }
}
