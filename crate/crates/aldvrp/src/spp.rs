//! Route pool and exact set partitioning over pooled routes.

use crate::error::{Error, Result};
use crate::evaluate::{Evaluator, Solution};
use crate::model::Instance;
use std::collections::HashMap;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Fixed 256-bit customer set; customer `c` occupies bit `c - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CustomerSet([u64; 4]);

pub const MAX_SPP_CUSTOMERS: usize = 256;

impl CustomerSet {
    pub fn insert(&mut self, customer: usize) {
        let bit = customer - 1;
        self.0[bit / 64] |= 1 << (bit % 64);
    }

    pub fn contains(&self, customer: usize) -> bool {
        let bit = customer - 1;
        self.0[bit / 64] & (1 << (bit % 64)) != 0
    }

    pub fn intersects(&self, other: &CustomerSet) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    pub fn union_with(&mut self, other: &CustomerSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    pub fn remove_all(&mut self, other: &CustomerSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    /// Lowest customer id present, if any.
    pub fn first(&self) -> Option<usize> {
        for (i, &w) in self.0.iter().enumerate() {
            if w != 0 {
                return Some(i * 64 + w.trailing_zeros() as usize + 1);
            }
        }
        None
    }

    pub fn from_visits(visits: &[usize]) -> CustomerSet {
        let mut set = CustomerSet::default();
        for &v in visits {
            set.insert(v);
        }
        set
    }
}

/// One pooled route: the visit order, its customer set and its energy cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub visits: Vec<usize>,
    pub customers: CustomerSet,
    pub cost: f64,
}

#[derive(Default)]
struct PoolInner {
    columns: Vec<Column>,
    index: HashMap<Vec<usize>, usize>,
}

/// Deduplicated repository of feasible routes. Additions are serialized
/// internally, so workers may publish concurrently through a shared reference.
#[derive(Default)]
pub struct RoutePool {
    inner: Mutex<PoolInner>,
}

impl RoutePool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a route column. Returns true when the column is new (or
    /// strictly cheaper than the stored column with the identical visit
    /// order — unreachable while evaluation stays deterministic), false for
    /// duplicates.
    pub fn add(&self, visits: &[usize], cost: f64) -> bool {
        if visits.is_empty() {
            return false;
        }
        let mut inner = self.inner.lock().expect("pool mutex");
        match inner.index.get(visits) {
            Some(&at) => {
                let stored = inner.columns[at].cost;
                debug_assert!(
                    (stored - cost).abs() <= 1e-6 * stored.abs().max(1.0),
                    "same visit order evaluated to different energies: {stored} vs {cost}"
                );
                if cost < stored - 1e-9 * stored.abs().max(1.0) {
                    inner.columns[at].cost = cost;
                    true
                } else {
                    false
                }
            }
            None => {
                let col = Column {
                    visits: visits.to_vec(),
                    customers: CustomerSet::from_visits(visits),
                    cost,
                };
                let at = inner.columns.len();
                inner.index.insert(col.visits.clone(), at);
                inner.columns.push(col);
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("pool mutex").columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Copy of the current columns.
    pub fn snapshot(&self) -> Vec<Column> {
        self.inner.lock().expect("pool mutex").columns.clone()
    }

    /// One JSON object per line: `{"visits": [...], "cost": ...}`.
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        for col in self.snapshot() {
            #[derive(serde::Serialize)]
            struct Line<'a> {
                visits: &'a [usize],
                cost: f64,
            }
            let line = crate::model::to_decimal_json(&Line {
                visits: &col.visits,
                cost: col.cost,
            })?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// True when the pool size moved across a multiple of `limit`.
pub fn crossed_threshold(before: usize, after: usize, limit: usize) -> bool {
    limit > 0 && after / limit > before / limit
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SppStatus {
    /// Search space exhausted: result is optimal over pool ∪ incumbent.
    Optimal,
    /// Time cap hit; result is the best found so far.
    Timeout,
    /// No covering partition exists in the pool; incumbent returned.
    NoPartition,
}

#[derive(Debug, Clone)]
pub struct SppOutcome {
    pub solution: Solution,
    pub status: SppStatus,
    pub improved: bool,
    pub explored_nodes: u64,
}

struct SppSearch<'a> {
    by_customer: Vec<Vec<usize>>, // customer -> column ids, cheapest first
    columns: &'a [Column],
    amortized: Vec<f64>, // customer -> cheapest cost/|S| over covering columns
    fleet_size: usize,
    deadline: Instant,
    best_cost: f64,
    best: Option<Vec<usize>>,
    found_any: bool,
    timed_out: bool,
    nodes: u64,
}

impl SppSearch<'_> {
    fn dfs(&mut self, uncovered: CustomerSet, chosen: &mut Vec<usize>, acc: f64, lb_rest: f64) {
        self.nodes += 1;
        if self.nodes % 4096 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        let Some(customer) = uncovered.first() else {
            self.found_any = true;
            if acc < self.best_cost - 1e-9 * self.best_cost.abs().max(1.0) {
                self.best_cost = acc;
                self.best = Some(chosen.clone());
            }
            return;
        };
        if chosen.len() >= self.fleet_size {
            return;
        }
        let candidate_ids = std::mem::take(&mut self.by_customer[customer]);
        for &col_id in &candidate_ids {
            let col = &self.columns[col_id];
            if !col
                .customers
                .0
                .iter()
                .zip(&uncovered.0)
                .all(|(c, u)| c & !u == 0)
            {
                continue; // overlaps an already covered customer
            }
            let mut lb_delta = 0.0;
            for &v in &col.visits {
                lb_delta += self.amortized[v];
            }
            let acc2 = acc + col.cost;
            let lb2 = lb_rest - lb_delta;
            // Prune only strictly worse subtrees so equal-cost partitions
            // still register as found.
            if acc2 + lb2 > self.best_cost + 1e-9 * self.best_cost.abs().max(1.0) {
                continue;
            }
            let mut next = uncovered;
            next.remove_all(&col.customers);
            chosen.push(col_id);
            self.dfs(next, chosen, acc2, lb2);
            chosen.pop();
            if self.timed_out {
                break;
            }
        }
        self.by_customer[customer] = candidate_ids;
    }
}

/// Exact branch-and-bound set partitioning over the pool's columns,
/// depth-first on the lowest-index uncovered customer, bounded by the sum of
/// cheapest amortized per-customer costs. Returns the incumbent unless a
/// strictly better partition is proven.
pub fn solve_spp(
    pool: &RoutePool,
    instance: &Instance,
    incumbent: &Solution,
    ev: &Evaluator,
    time_cap: Duration,
) -> Result<SppOutcome> {
    let n = instance.n();
    if n > MAX_SPP_CUSTOMERS {
        return Err(Error::Validation(format!(
            "set partitioning supports at most {MAX_SPP_CUSTOMERS} customers, instance has {n}"
        )));
    }
    let mut columns = pool.snapshot();
    if columns.is_empty() {
        return Err(Error::validation("route pool is empty"));
    }
    // Deterministic order regardless of insertion interleaving.
    columns.sort_by(|a, b| {
        a.cost
            .partial_cmp(&b.cost)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.visits.cmp(&b.visits))
    });

    let mut by_customer = vec![Vec::new(); n + 1];
    let mut amortized = vec![f64::INFINITY; n + 1];
    for (id, col) in columns.iter().enumerate() {
        let share = col.cost / col.visits.len() as f64;
        for &v in &col.visits {
            by_customer[v].push(id);
            if share < amortized[v] {
                amortized[v] = share;
            }
        }
    }

    let mut all = CustomerSet::default();
    for c in 1..=n {
        all.insert(c);
    }
    let uncovered_lb: f64 = (1..=n).map(|c| amortized[c]).sum();
    let coverable = (1..=n).all(|c| !by_customer[c].is_empty());

    let mut search = SppSearch {
        by_customer,
        columns: &columns,
        amortized,
        fleet_size: instance.fleet_size,
        deadline: Instant::now() + time_cap,
        best_cost: incumbent.objective,
        best: None,
        found_any: false,
        timed_out: false,
        nodes: 0,
    };
    if coverable && uncovered_lb.is_finite() {
        let mut chosen = Vec::new();
        search.dfs(all, &mut chosen, 0.0, uncovered_lb);
    }

    let improved = search.best.is_some();
    let status = if search.timed_out {
        SppStatus::Timeout
    } else if !search.found_any {
        SppStatus::NoPartition
    } else {
        SppStatus::Optimal
    };
    let solution = match search.best {
        Some(ids) => {
            let lists: Vec<Vec<usize>> =
                ids.iter().map(|&id| columns[id].visits.clone()).collect();
            ev.solution(&lists)?
        }
        None => incumbent.clone(),
    };
    Ok(SppOutcome {
        solution,
        status,
        improved,
        explored_nodes: search.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::EvalMode;
    use crate::model::{generate_instance, GeneratorConfig, Instance};

    fn instance(n: usize, seed: u64) -> Instance {
        let mut inst = generate_instance(n, seed, &GeneratorConfig::default()).unwrap();
        inst.fleet_size = n; // singletons always representable
        inst
    }

    fn cap() -> Duration {
        Duration::from_secs(5)
    }

    #[test]
    fn fresh_route_inserts_duplicate_does_not() {
        let pool = RoutePool::new();
        assert!(pool.add(&[1, 2], 10.0));
        assert!(!pool.add(&[1, 2], 10.0));
        assert!(pool.add(&[2, 1], 11.0)); // different order is a new column
        assert_eq!(pool.len(), 2);
    }

    #[test]
    fn incumbent_only_pool_returns_incumbent_optimal() {
        let inst = instance(4, 7);
        let ev = Evaluator::new(&inst, EvalMode::RealTime);
        let incumbent = ev.solution(&[vec![1, 2], vec![3, 4]]).unwrap();
        let pool = RoutePool::new();
        for route in &incumbent.routes {
            pool.add(&route.visits, route.energy);
        }
        let out = solve_spp(&pool, &inst, &incumbent, &ev, cap()).unwrap();
        assert_eq!(out.status, SppStatus::Optimal);
        assert!(!out.improved);
        assert_eq!(out.solution.objective, incumbent.objective);
    }

    #[test]
    fn singleton_pool_yields_all_singletons() {
        let inst = instance(5, 8);
        let ev = Evaluator::new(&inst, EvalMode::RealTime);
        let pool = RoutePool::new();
        for c in inst.customers() {
            let route = ev.route(0, &[c]).unwrap();
            pool.add(&[c], route.energy);
        }
        // Expensive incumbent so the unique partition improves on it.
        let incumbent = ev.solution(&[vec![1, 2, 3, 4, 5]]).unwrap();
        let worse = Solution {
            objective: incumbent.objective * 10.0,
            ..incumbent
        };
        let out = solve_spp(&pool, &inst, &worse, &ev, cap()).unwrap();
        assert_eq!(out.status, SppStatus::Optimal);
        assert!(out.improved);
        assert_eq!(out.solution.routes.len(), 5);
    }

    #[test]
    fn no_partition_flag_when_pool_cannot_cover() {
        let inst = instance(4, 9);
        let ev = Evaluator::new(&inst, EvalMode::RealTime);
        let pool = RoutePool::new();
        let r = ev.route(0, &[1, 2]).unwrap();
        pool.add(&[1, 2], r.energy); // customers 3, 4 never covered
        let incumbent = ev
            .solution(&[vec![1, 2], vec![3], vec![4]])
            .unwrap();
        let out = solve_spp(&pool, &inst, &incumbent, &ev, cap()).unwrap();
        assert_eq!(out.status, SppStatus::NoPartition);
        assert_eq!(out.solution.objective, incumbent.objective);
    }

    #[test]
    fn matches_subset_enumeration_on_small_pools() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..10 {
            let n = 6;
            let inst = instance(n, 300 + trial);
            let ev = Evaluator::new(&inst, EvalMode::RealTime);
            let pool = RoutePool::new();
            // Random feasible columns over 1..=6.
            let mut cols: Vec<(Vec<usize>, f64)> = Vec::new();
            while cols.len() < 14 {
                let mut customers: Vec<usize> = (1..=n).collect();
                customers.shuffle(&mut rng);
                let k = rng.random_range(1..=3);
                let mut visits = customers[..k].to_vec();
                visits.sort_unstable();
                if rng.random_bool(0.5) {
                    visits.reverse();
                }
                let route = ev.route(0, &visits).unwrap();
                if pool.add(&visits, route.energy) {
                    cols.push((visits, route.energy));
                }
            }
            let incumbent = ev
                .solution(&(1..=n).map(|c| vec![c]).collect::<Vec<_>>())
                .unwrap();
            for route in &incumbent.routes {
                if pool.add(&route.visits, route.energy) {
                    cols.push((route.visits.clone(), route.energy));
                }
            }

            // Brute force over all column subsets.
            let mut brute = incumbent.objective;
            let m = cols.len();
            for mask in 1u32..(1 << m) {
                if mask.count_ones() as usize > inst.fleet_size {
                    continue;
                }
                let mut seen = CustomerSet::default();
                let mut cost = 0.0;
                let mut ok = true;
                for (i, (visits, c)) in cols.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        let set = CustomerSet::from_visits(visits);
                        if seen.intersects(&set) {
                            ok = false;
                            break;
                        }
                        seen.union_with(&set);
                        cost += c;
                    }
                }
                if ok && seen.len() == n && cost < brute {
                    brute = cost;
                }
            }

            let out = solve_spp(&pool, &inst, &incumbent, &ev, cap()).unwrap();
            assert_eq!(out.status, SppStatus::Optimal);
            assert!(
                ((out.solution.objective - brute) / brute).abs() < 1e-9,
                "trial {trial}: spp {} vs brute {brute}",
                out.solution.objective
            );
        }
    }

    #[test]
    fn threshold_crossing_fires_on_multiples() {
        assert!(crossed_threshold(9, 10, 10));
        assert!(!crossed_threshold(8, 9, 10));
        assert!(crossed_threshold(19, 21, 10));
        assert!(!crossed_threshold(10, 10, 10));
        assert!(!crossed_threshold(0, 5, 0));
    }

    #[test]
    fn jsonl_dump_has_one_line_per_column() {
        let pool = RoutePool::new();
        pool.add(&[1], 4.0);
        pool.add(&[2, 3], 9.5);
        let mut buf = Vec::new();
        pool.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("visits").is_some() && v.get("cost").is_some());
        }
    }
}
