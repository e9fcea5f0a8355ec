//! Removal operators: detour-cost, load/service-time and Shaw relatedness.

use super::{SearchCtx, Working};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Rank-biased index into a list of `len` candidates sorted best-first:
/// `floor(len * u^bias)`. Bias -> infinity collapses onto the top rank.
fn rank_biased_index(len: usize, bias: f64, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    ((len as f64 * u.powf(bias)) as usize).min(len - 1)
}

fn remove_customer(w: &mut Working, ctx: &SearchCtx, customer: usize) {
    let (r, p) = w.position_of(customer).expect("customer present");
    w.routes[r].remove(p);
    w.energies[r] = if w.routes[r].is_empty() {
        0.0
    } else {
        ctx.ev
            .route_cost(&w.routes[r])
            .map(|(e, _)| e)
            .unwrap_or(f64::INFINITY)
    };
    w.compact();
}

/// Detour cost of serving `customer` where it currently sits: route energy
/// with it minus route energy without it.
pub fn detour_cost(w: &Working, ctx: &SearchCtx, customer: usize) -> f64 {
    let (r, p) = w.position_of(customer).expect("customer present");
    let mut without = w.routes[r].clone();
    without.remove(p);
    let rest = if without.is_empty() {
        0.0
    } else {
        ctx.ev
            .route_cost(&without)
            .map(|(e, _)| e)
            .unwrap_or(f64::INFINITY)
    };
    w.energies[r] - rest
}

/// Removes the `count` customers with the largest detour costs, randomized by
/// rank-biased selection; detours are refreshed after every removal.
pub fn remove_distance(
    w: &mut Working,
    count: usize,
    rng: &mut ChaCha8Rng,
    ctx: &SearchCtx,
) -> Vec<usize> {
    let mut removed = Vec::with_capacity(count);
    for _ in 0..count {
        let mut ranked: Vec<(usize, f64)> = w
            .routes
            .iter()
            .flatten()
            .map(|&c| (c, 0.0))
            .collect();
        if ranked.is_empty() {
            break;
        }
        for entry in ranked.iter_mut() {
            entry.1 = detour_cost(w, ctx, entry.0);
        }
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        let pick = ranked[rank_biased_index(ranked.len(), ctx.cfg.rank_bias, rng)].0;
        remove_customer(w, ctx, pick);
        removed.push(pick);
    }
    removed
}

/// Removes customers ranked by demand (heaviest first), breaking ties by the
/// later departure time in the starting solution.
pub fn remove_load(
    w: &mut Working,
    count: usize,
    rng: &mut ChaCha8Rng,
    ctx: &SearchCtx,
) -> Vec<usize> {
    let inst = ctx.ev.instance;
    let mut ranked: Vec<(usize, f64, f64)> = Vec::new(); // (customer, demand, departure)
    for route in &w.routes {
        if let Ok(full) = ctx.ev.route(0, route) {
            for (i, &c) in route.iter().enumerate() {
                ranked.push((c, inst.demand(c), full.departures[i]));
            }
        }
    }
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.0.cmp(&b.0))
    });

    let mut removed = Vec::with_capacity(count);
    for _ in 0..count.min(ranked.len()) {
        let at = rank_biased_index(ranked.len(), ctx.cfg.rank_bias, rng);
        let (c, _, _) = ranked.remove(at);
        remove_customer(w, ctx, c);
        removed.push(c);
    }
    removed
}

/// Normalized relatedness `R(i, j) = w_d * d_hat + w_q * |q_i - q_j|_hat`;
/// smaller values mean more related.
pub fn relatedness(ctx: &SearchCtx, i: usize, j: usize) -> f64 {
    let inst = ctx.ev.instance;
    let d_hat = if ctx.max_pair_distance > 0.0 {
        inst.distance(i, j) / ctx.max_pair_distance
    } else {
        0.0
    };
    let q_hat = if ctx.max_demand_gap > 0.0 {
        (inst.demand(i) - inst.demand(j)).abs() / ctx.max_demand_gap
    } else {
        0.0
    };
    ctx.cfg.shaw_weight_distance * d_hat + ctx.cfg.shaw_weight_demand * q_hat
}

/// Shaw removal: a uniformly drawn seed customer, then repeatedly the
/// customer most related to a random already-removed one.
pub fn remove_shaw(
    w: &mut Working,
    count: usize,
    rng: &mut ChaCha8Rng,
    ctx: &SearchCtx,
) -> Vec<usize> {
    let mut present: Vec<usize> = w.routes.iter().flatten().copied().collect();
    present.sort_unstable();
    if present.is_empty() {
        return Vec::new();
    }
    let seed = present[rng.random_range(0..present.len())];
    remove_customer(w, ctx, seed);
    present.retain(|&c| c != seed);
    let mut removed = vec![seed];

    while removed.len() < count && !present.is_empty() {
        let anchor = removed[rng.random_range(0..removed.len())];
        let next = present
            .iter()
            .copied()
            .min_by(|&a, &b| {
                relatedness(ctx, anchor, a)
                    .partial_cmp(&relatedness(ctx, anchor, b))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            })
            .expect("present non-empty");
        remove_customer(w, ctx, next);
        present.retain(|&c| c != next);
        removed.push(next);
    }
    removed
}
