//! LNS + local search engine: removal and insertion operators, simulated-
//! annealing acceptance, roulette operator selection and the route-pool feed.

pub mod insertion;
pub mod local_search;
pub mod removal;

use crate::error::{Error, Result};
use crate::evaluate::{EvalMode, Evaluator, Solution};
use crate::model::Instance;
use crate::split::split_with;
use crate::spp::{crossed_threshold, solve_spp, RoutePool};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// Stopping rule for one LNS run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Iterations(u64),
    WallClock(Duration),
}

/// Tunable parameters of the search. All defaults are configurable through
/// the JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Fraction of customers removed per iteration, drawn uniformly.
    pub removal_frac: (f64, f64),
    /// Regret depths instantiated as separate insertion operators.
    pub regret_ks: Vec<usize>,
    pub shaw_weight_distance: f64,
    pub shaw_weight_demand: f64,
    /// Rank-bias exponent of the randomized removal selection:
    /// index = floor(len * u^rank_bias).
    pub rank_bias: f64,
    /// The start temperature accepts a solution this much worse ...
    pub sa_worse_frac: f64,
    /// ... with this probability.
    pub sa_accept_prob: f64,
    /// Geometric cooling factor per iteration.
    pub sa_cooling: f64,
    pub roulette_new_best: f64,
    pub roulette_improving: f64,
    pub roulette_accepted: f64,
    /// Set partitioning fires each time the pool grows past a multiple of
    /// this limit.
    pub pool_limit: usize,
    pub spp_enabled: bool,
    /// Whether an improving set-partitioning result replaces the current
    /// search solution.
    pub spp_feedback: bool,
    pub spp_time_cap_secs: f64,
    /// Cap on customers per route in the split of the initial giant tour.
    pub max_route_len: usize,
    /// Granular-neighborhood size for local search and relocation targets.
    pub neighbor_count: usize,
    /// Instances up to this size use exhaustive move neighborhoods.
    pub full_scan_limit: usize,
    pub service_time: f64,
    pub mode: EvalMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            removal_frac: (0.1, 0.3),
            regret_ks: vec![2, 3],
            shaw_weight_distance: 0.75,
            shaw_weight_demand: 0.25,
            rank_bias: 5.0,
            sa_worse_frac: 0.05,
            sa_accept_prob: 0.5,
            sa_cooling: 0.9995,
            roulette_new_best: 33.0,
            roulette_improving: 9.0,
            roulette_accepted: 1.0,
            pool_limit: 2000,
            spp_enabled: true,
            spp_feedback: true,
            spp_time_cap_secs: 5.0,
            max_route_len: 40,
            neighbor_count: 16,
            full_scan_limit: 25,
            service_time: 0.0,
            mode: EvalMode::RealTime,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.removal_frac;
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return Err(Error::validation(
                "removal_frac must satisfy 0 < lo <= hi < 1",
            ));
        }
        if self.regret_ks.iter().any(|&k| k < 2) {
            return Err(Error::validation("regret depths must be >= 2"));
        }
        if !(0.0 < self.sa_accept_prob && self.sa_accept_prob < 1.0) {
            return Err(Error::validation("sa_accept_prob must be in (0, 1)"));
        }
        if !(0.0 < self.sa_cooling && self.sa_cooling <= 1.0) {
            return Err(Error::validation("sa_cooling must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Search-time view of a solution: visit lists plus cached route energies.
#[derive(Debug, Clone, PartialEq)]
pub struct Working {
    pub routes: Vec<Vec<usize>>,
    pub energies: Vec<f64>,
}

impl Working {
    pub fn from_solution(sol: &Solution) -> Self {
        Working {
            routes: sol.routes.iter().map(|r| r.visits.clone()).collect(),
            energies: sol.routes.iter().map(|r| r.energy).collect(),
        }
    }

    pub fn objective(&self) -> f64 {
        self.energies.iter().sum()
    }

    pub fn to_solution(&self, ev: &Evaluator) -> Result<Solution> {
        ev.solution(&self.routes)
    }

    pub fn customer_count(&self) -> usize {
        self.routes.iter().map(|r| r.len()).sum()
    }

    /// Drops empty routes left behind by removals or relocations.
    pub fn compact(&mut self) {
        let mut i = 0;
        while i < self.routes.len() {
            if self.routes[i].is_empty() {
                self.routes.swap_remove(i);
                self.energies.swap_remove(i);
            } else {
                i += 1;
            }
        }
    }

    /// Position of a customer as (route index, index within route).
    pub fn position_of(&self, customer: usize) -> Option<(usize, usize)> {
        for (r, route) in self.routes.iter().enumerate() {
            if let Some(p) = route.iter().position(|&v| v == customer) {
                return Some((r, p));
            }
        }
        None
    }
}

/// Shared read-only context for the operators.
pub struct SearchCtx<'a> {
    pub ev: Evaluator<'a>,
    pub cfg: &'a SearchConfig,
    /// Per customer (index 1..=n): other customers sorted by distance.
    pub neighbors: Vec<Vec<usize>>,
    /// Largest customer-pair distance, for Shaw normalization.
    pub max_pair_distance: f64,
    /// Largest customer demand difference, for Shaw normalization.
    pub max_demand_gap: f64,
}

impl<'a> SearchCtx<'a> {
    pub fn new(instance: &'a Instance, cfg: &'a SearchConfig) -> Self {
        let ev = Evaluator::new(instance, cfg.mode).with_service_time(cfg.service_time);
        let n = instance.n();
        let mut neighbors = vec![Vec::new(); n + 1];
        let mut max_pair_distance = 0.0f64;
        let mut max_demand_gap = 0.0f64;
        for c in 1..=n {
            let mut others: Vec<usize> = (1..=n).filter(|&o| o != c).collect();
            for &o in &others {
                max_pair_distance = max_pair_distance.max(instance.distance(c, o));
                max_demand_gap =
                    max_demand_gap.max((instance.demand(c) - instance.demand(o)).abs());
            }
            others.sort_by(|&a, &b| {
                instance
                    .distance(c, a)
                    .partial_cmp(&instance.distance(c, b))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            others.truncate(cfg.neighbor_count);
            neighbors[c] = others;
        }
        Self {
            ev,
            cfg,
            neighbors,
            max_pair_distance,
            max_demand_gap,
        }
    }

    /// Route energy if the route satisfies capacity, battery and horizon;
    /// `None` otherwise.
    pub fn route_cost(&self, visits: &[usize]) -> Option<f64> {
        let inst = self.ev.instance;
        let load: f64 = visits.iter().map(|&v| inst.demand(v)).sum();
        if load > inst.vehicle.load_capacity {
            return None;
        }
        match self.ev.route_cost(visits) {
            Ok((energy, _)) if energy <= inst.vehicle.battery_capacity => Some(energy),
            _ => None,
        }
    }

    pub fn exhaustive(&self, n: usize) -> bool {
        n <= self.cfg.full_scan_limit
    }
}

/// Strictly-better threshold scaled to the objective magnitude.
pub(crate) fn improves(new: f64, old: f64) -> bool {
    new < old - 1e-9 * (old.abs() + 1.0)
}

pub(crate) fn roulette(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random_range(0.0..total);
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

/// Nearest-neighbor giant tour over the distance matrix.
pub fn nearest_neighbor_tour(instance: &Instance) -> Vec<usize> {
    let n = instance.n();
    let mut tour = Vec::with_capacity(n);
    let mut visited = vec![false; n + 1];
    let mut at = 0usize;
    for _ in 0..n {
        let next = (1..=n)
            .filter(|&c| !visited[c])
            .min_by(|&a, &b| {
                instance
                    .distance(at, a)
                    .partial_cmp(&instance.distance(at, b))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            })
            .expect("unvisited customer remains");
        visited[next] = true;
        tour.push(next);
        at = next;
    }
    tour
}

/// Initial solution: nearest-neighbor giant tour split into routes.
pub fn initial_solution(ctx: &SearchCtx) -> Result<Solution> {
    let tour = nearest_neighbor_tour(ctx.ev.instance);
    split_with(&tour, &ctx.ev, ctx.cfg.max_route_len)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RemovalOp {
    Distance,
    Load,
    Shaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InsertionOp {
    Random,
    Greedy,
    Regret(usize),
}

/// Aggregate result of one LNS run.
#[derive(Debug, Clone)]
pub struct LnsOutcome {
    pub best: Solution,
    /// Best objective reached by LNS + local search alone (no set-
    /// partitioning result feeding it).
    pub best_lns_objective: f64,
    pub iterations: u64,
    pub spp_invocations: u64,
    pub spp_improvements: u64,
}

/// Runs the LNS with a private route pool; deterministic per
/// `(instance, config, seed, budget)`.
pub fn lns_run(
    instance: &Instance,
    cfg: &SearchConfig,
    seed: u64,
    budget: Budget,
) -> Result<(Solution, RoutePool)> {
    let pool = RoutePool::new();
    let outcome = lns_run_shared(instance, cfg, seed, budget, &pool, &mut |_, _, _, _| {})?;
    Ok((outcome.best, pool))
}

/// LNS run publishing routes to a caller-owned (possibly shared) pool.
/// `progress` receives `(iter, current_objective, best_objective, temp)`.
pub fn lns_run_shared(
    instance: &Instance,
    cfg: &SearchConfig,
    seed: u64,
    budget: Budget,
    pool: &RoutePool,
    progress: &mut dyn FnMut(u64, f64, f64, f64),
) -> Result<LnsOutcome> {
    cfg.validate()?;
    let ctx = SearchCtx::new(instance, cfg);
    let n = instance.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let started = Instant::now();

    let initial = initial_solution(&ctx)?;
    let mut current = Working::from_solution(&initial);
    let mut best = initial.clone();
    let mut best_lns = initial.objective;

    // Per-run counter of successful pool additions; with one worker this is
    // exactly the pool size, so triggering on multiples of the limit realizes
    // "fires when the pool size crosses the limit".
    let mut adds_since_spp = 0usize;
    let publish = |w: &Working, adds: &mut usize| {
        for (route, &energy) in w.routes.iter().zip(&w.energies) {
            if pool.add(route, energy) {
                *adds += 1;
            }
        }
    };
    publish(&current, &mut adds_since_spp);

    let removal_ops = [RemovalOp::Distance, RemovalOp::Load, RemovalOp::Shaw];
    let mut insertion_ops = vec![InsertionOp::Random, InsertionOp::Greedy];
    insertion_ops.extend(cfg.regret_ks.iter().map(|&k| InsertionOp::Regret(k)));
    let mut removal_weights = vec![1.0; removal_ops.len()];
    let mut insertion_weights = vec![1.0; insertion_ops.len()];

    let mut temp = cfg.sa_worse_frac * initial.objective / (1.0 / cfg.sa_accept_prob).ln();
    if !temp.is_finite() || temp <= 0.0 {
        temp = 1.0;
    }

    let mut iterations = 0u64;
    let mut spp_invocations = 0u64;
    let mut spp_improvements = 0u64;

    loop {
        match budget {
            Budget::Iterations(max) => {
                if iterations >= max {
                    break;
                }
            }
            Budget::WallClock(limit) => {
                if started.elapsed() >= limit {
                    break;
                }
            }
        }
        iterations += 1;

        let ri = roulette(&removal_weights, &mut rng);
        let ii = roulette(&insertion_weights, &mut rng);
        let frac = rng.random_range(cfg.removal_frac.0..=cfg.removal_frac.1);
        let count = ((frac * n as f64).ceil() as usize).clamp(1, n.saturating_sub(1).max(1));

        let mut score = 0.0;
        if n >= 2 {
            let mut candidate = current.clone();
            let removed = match removal_ops[ri] {
                RemovalOp::Distance => removal::remove_distance(&mut candidate, count, &mut rng, &ctx),
                RemovalOp::Load => removal::remove_load(&mut candidate, count, &mut rng, &ctx),
                RemovalOp::Shaw => removal::remove_shaw(&mut candidate, count, &mut rng, &ctx),
            };
            let repaired = match insertion_ops[ii] {
                InsertionOp::Random => insertion::insert_random(&mut candidate, &removed, &mut rng, &ctx),
                InsertionOp::Greedy => insertion::insert_greedy(&mut candidate, &removed, &ctx),
                InsertionOp::Regret(k) => insertion::insert_regret(&mut candidate, &removed, k, &ctx),
            };
            if repaired.is_ok() {
                local_search::local_search(&mut candidate, &ctx);
                publish(&candidate, &mut adds_since_spp);

                let obj = candidate.objective();
                let cur_obj = current.objective();
                if improves(obj, best_lns) {
                    score = cfg.roulette_new_best;
                    best_lns = obj;
                    if improves(obj, best.objective) {
                        best = candidate.to_solution(&ctx.ev)?;
                    }
                    current = candidate;
                } else if improves(obj, cur_obj) {
                    score = cfg.roulette_improving;
                    current = candidate;
                } else {
                    let delta = obj - cur_obj;
                    if rng.random::<f64>() < (-delta / temp).exp() {
                        score = cfg.roulette_accepted;
                        current = candidate;
                    }
                }
            }
        }

        removal_weights[ri] += score;
        insertion_weights[ii] += score;
        temp *= cfg.sa_cooling;

        if cfg.spp_enabled
            && crossed_threshold(0, adds_since_spp, cfg.pool_limit)
        {
            adds_since_spp -= cfg.pool_limit;
            spp_invocations += 1;
            let out = solve_spp(
                pool,
                instance,
                &best,
                &ctx.ev,
                Duration::from_secs_f64(cfg.spp_time_cap_secs),
            )?;
            if out.improved {
                spp_improvements += 1;
                if cfg.spp_feedback {
                    current = Working::from_solution(&out.solution);
                    best = out.solution;
                }
            }
        }

        progress(iterations, current.objective(), best.objective, temp);
    }

    Ok(LnsOutcome {
        best,
        best_lns_objective: best_lns,
        iterations,
        spp_invocations,
        spp_improvements,
    })
}
