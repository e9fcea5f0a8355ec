//! First-improvement local search: relocate, swap and intra-route segment
//! reversal, over granular neighborhoods on large instances.

use super::{improves, SearchCtx, Working};

/// Applies first-improvement moves until a full sweep finds none. The
/// objective never increases.
pub fn local_search(w: &mut Working, ctx: &SearchCtx) {
    loop {
        let improved = relocate_sweep(w, ctx) || swap_sweep(w, ctx) || reversal_sweep(w, ctx);
        if !improved {
            break;
        }
    }
}

/// Candidate (route, position) targets for moving `customer`, restricted to
/// positions adjacent to its geometric neighbors on large instances.
fn relocation_targets(w: &Working, ctx: &SearchCtx, customer: usize) -> Vec<(usize, usize)> {
    let n = ctx.ev.instance.n();
    let mut targets = Vec::new();
    if ctx.exhaustive(n) {
        for (r, route) in w.routes.iter().enumerate() {
            for pos in 0..=route.len() {
                targets.push((r, pos));
            }
        }
        return targets;
    }
    for &nb in &ctx.neighbors[customer] {
        if let Some((r, p)) = w.position_of(nb) {
            targets.push((r, p));
            targets.push((r, p + 1));
        }
    }
    targets.sort_unstable();
    targets.dedup();
    targets
}

fn try_route_pair(
    w: &mut Working,
    ctx: &SearchCtx,
    r1: usize,
    new1: Vec<usize>,
    r2: usize,
    new2: Vec<usize>,
) -> bool {
    debug_assert_ne!(r1, r2);
    let old = w.energies[r1] + w.energies[r2];
    let cost1 = if new1.is_empty() {
        Some(0.0)
    } else {
        ctx.route_cost(&new1)
    };
    let (Some(c1), Some(c2)) = (cost1, ctx.route_cost(&new2)) else {
        return false;
    };
    if !improves(c1 + c2, old) {
        return false;
    }
    w.routes[r1] = new1;
    w.energies[r1] = c1;
    w.routes[r2] = new2;
    w.energies[r2] = c2;
    w.compact();
    true
}

fn try_single_route(w: &mut Working, ctx: &SearchCtx, r: usize, new: Vec<usize>) -> bool {
    let Some(cost) = ctx.route_cost(&new) else {
        return false;
    };
    if !improves(cost, w.energies[r]) {
        return false;
    }
    w.routes[r] = new;
    w.energies[r] = cost;
    true
}

fn relocate_sweep(w: &mut Working, ctx: &SearchCtx) -> bool {
    let customers: Vec<usize> = w.routes.iter().flatten().copied().collect();
    for customer in customers {
        let Some((r1, p1)) = w.position_of(customer) else {
            continue;
        };
        for (r2, p2) in relocation_targets(w, ctx, customer) {
            if r1 == r2 {
                let route = &w.routes[r1];
                if p2 == p1 || p2 == p1 + 1 || p2 > route.len() {
                    continue;
                }
                let mut new = route.clone();
                new.remove(p1);
                let at = if p2 > p1 { p2 - 1 } else { p2 };
                new.insert(at, customer);
                if try_single_route(w, ctx, r1, new) {
                    return true;
                }
            } else {
                if p2 > w.routes[r2].len() {
                    continue;
                }
                let mut new1 = w.routes[r1].clone();
                new1.remove(p1);
                let mut new2 = w.routes[r2].clone();
                new2.insert(p2, customer);
                if try_route_pair(w, ctx, r1, new1, r2, new2) {
                    return true;
                }
            }
        }
    }
    false
}

fn swap_sweep(w: &mut Working, ctx: &SearchCtx) -> bool {
    let n = ctx.ev.instance.n();
    let customers: Vec<usize> = w.routes.iter().flatten().copied().collect();
    for &c1 in &customers {
        let partners: Vec<usize> = if ctx.exhaustive(n) {
            customers.iter().copied().filter(|&c| c > c1).collect()
        } else {
            ctx.neighbors[c1].iter().copied().filter(|&c| c > c1).collect()
        };
        for c2 in partners {
            let Some((r1, p1)) = w.position_of(c1) else { continue };
            let Some((r2, p2)) = w.position_of(c2) else { continue };
            if r1 == r2 {
                let mut new = w.routes[r1].clone();
                new.swap(p1, p2);
                if try_single_route(w, ctx, r1, new) {
                    return true;
                }
            } else {
                let mut new1 = w.routes[r1].clone();
                let mut new2 = w.routes[r2].clone();
                new1[p1] = c2;
                new2[p2] = c1;
                if try_route_pair(w, ctx, r1, new1, r2, new2) {
                    return true;
                }
            }
        }
    }
    false
}

/// Intra-route 2-opt: reverses every segment of length >= 2.
fn reversal_sweep(w: &mut Working, ctx: &SearchCtx) -> bool {
    for r in 0..w.routes.len() {
        let len = w.routes[r].len();
        if len < 2 {
            continue;
        }
        for i in 0..len - 1 {
            for j in i + 1..len {
                let mut new = w.routes[r].clone();
                new[i..=j].reverse();
                if try_single_route(w, ctx, r, new) {
                    return true;
                }
            }
        }
    }
    false
}
