//! Ground-truth baselines: exhaustive enumeration for small instances and
//! Simpson quadrature for arc energies.

use crate::error::{Error, Result};
use crate::evaluate::{EvalMode, Evaluator, Solution};
use crate::model::{Instance, SpeedProfile, VehicleParams};
use crate::timetravel::arrival_time;

pub const DEFAULT_EXACT_GUARD: usize = 10;

/// Globally optimal solution by enumerating every assignment of customers to
/// at most `fleet_size` vehicles and every visit order per vehicle, under the
/// real-time load model. Guarded against large instances.
pub fn exact_solve(instance: &Instance) -> Result<Solution> {
    exact_solve_guarded(instance, DEFAULT_EXACT_GUARD)
}

pub fn exact_solve_guarded(instance: &Instance, max_n: usize) -> Result<Solution> {
    let n = instance.n();
    if n > max_n {
        return Err(Error::SizeGuard { n, max: max_n });
    }
    let ev = Evaluator::new(instance, EvalMode::RealTime);
    let mut search = Enumeration {
        ev,
        instance,
        routes: Vec::new(),
        loads: Vec::new(),
        best: None,
    };
    search.place(1);
    let (lists, _) = search.best.ok_or(Error::InfeasibleTour {
        fleet_size: instance.fleet_size,
    })?;
    ev.solution(&lists)
}

struct Enumeration<'a> {
    ev: Evaluator<'a>,
    instance: &'a Instance,
    routes: Vec<Vec<usize>>,
    loads: Vec<f64>,
    best: Option<(Vec<Vec<usize>>, f64)>,
}

impl Enumeration<'_> {
    /// Inserts customers in id order into every position of every open route
    /// or a fresh route; each unordered collection of ordered routes is
    /// generated exactly once because removing the highest id reverses the
    /// construction uniquely.
    fn place(&mut self, customer: usize) {
        let n = self.instance.n();
        if customer > n {
            self.evaluate_leaf();
            return;
        }
        let demand = self.instance.demand(customer);
        for r in 0..self.routes.len() {
            if self.loads[r] + demand > self.instance.vehicle.load_capacity {
                continue;
            }
            self.loads[r] += demand;
            for pos in 0..=self.routes[r].len() {
                self.routes[r].insert(pos, customer);
                self.place(customer + 1);
                self.routes[r].remove(pos);
            }
            self.loads[r] -= demand;
        }
        if self.routes.len() < self.instance.fleet_size
            && demand <= self.instance.vehicle.load_capacity
        {
            self.routes.push(vec![customer]);
            self.loads.push(demand);
            self.place(customer + 1);
            self.routes.pop();
            self.loads.pop();
        }
    }

    fn evaluate_leaf(&mut self) {
        let mut total = 0.0;
        for route in &self.routes {
            match self.ev.route_cost(route) {
                Ok((energy, _)) if energy <= self.instance.vehicle.battery_capacity => {
                    total += energy;
                    if let Some((_, best)) = &self.best {
                        if total > *best {
                            return; // partial sum already dominated
                        }
                    }
                }
                _ => return,
            }
        }
        let better = match &self.best {
            None => true,
            Some((best_lists, best)) => {
                if total < best - 1e-12 * best.abs() {
                    true
                } else if (total - best).abs() <= 1e-12 * best.abs() {
                    canonical(&self.routes) < canonical(best_lists)
                } else {
                    false
                }
            }
        };
        if better {
            self.best = Some((self.routes.clone(), total));
        }
    }
}

/// Canonical form for lexicographic tie-breaking: routes sorted by first
/// customer, flattened with separators.
fn canonical(lists: &[Vec<usize>]) -> Vec<usize> {
    let mut sorted: Vec<&Vec<usize>> = lists.iter().collect();
    sorted.sort();
    let mut flat = Vec::new();
    for route in sorted {
        flat.extend_from_slice(route);
        flat.push(0);
    }
    flat
}

/// Composite Simpson integration of the power demand over the traversal
/// window found by the exact arrival function. Samples the profile speed
/// directly, independent of the closed-form antiderivative.
pub fn quad_energy(
    profile: &SpeedProfile,
    d: f64,
    depart: f64,
    load: f64,
    p: &VehicleParams,
    steps: usize,
) -> Result<f64> {
    if steps < 1000 {
        return Err(Error::validation("quadrature needs at least 1000 steps"));
    }
    let arrival = arrival_time(profile, d, depart)?;
    if arrival <= depart {
        return Ok(0.0);
    }
    let steps = steps + steps % 2;
    let h = (arrival - depart) / steps as f64;
    let segments = profile.segments();
    let mut cursor = segments.partition_point(|s| s.t1 <= depart);

    // Samples run in increasing time, so the segment cursor only advances.
    let mut acc = 0.0;
    for k in 0..=steps {
        let t = depart + h * k as f64;
        while cursor + 1 < segments.len() && t >= segments[cursor].t1 {
            cursor += 1;
        }
        let seg = &segments[cursor];
        let f = crate::energy::power(seg.speed_at(t), seg.accel(), load, p);
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * f;
    }
    Ok(acc * h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::arc_energy;
    use crate::evaluate::evaluate_route;
    use crate::model::{generate_instance, GeneratorConfig, Instance};

    fn single_vehicle(n: usize, seed: u64) -> Instance {
        let cfg = GeneratorConfig {
            fleet_size: Some(1),
            vehicle: crate::model::VehicleParams {
                load_capacity: 100.0 * n as f64 + 1.0,
                ..GeneratorConfig::default().vehicle
            },
            ..GeneratorConfig::default()
        };
        generate_instance(n, seed, &cfg).unwrap()
    }

    #[test]
    fn one_customer_is_the_single_route() {
        let inst = single_vehicle(1, 61);
        let sol = exact_solve(&inst).unwrap();
        assert_eq!(sol.routes.len(), 1);
        assert_eq!(sol.routes[0].visits, vec![1]);
        let direct = evaluate_route(&[1], &inst, EvalMode::RealTime).unwrap();
        assert_eq!(sol.objective, direct.energy);
    }

    #[test]
    fn three_customers_single_vehicle_is_min_over_six_orders() {
        let inst = single_vehicle(3, 62);
        let sol = exact_solve(&inst).unwrap();
        let orders = [
            [1, 2, 3],
            [1, 3, 2],
            [2, 1, 3],
            [2, 3, 1],
            [3, 1, 2],
            [3, 2, 1],
        ];
        let brute = orders
            .iter()
            .map(|o| evaluate_route(o, &inst, EvalMode::RealTime).unwrap().energy)
            .fold(f64::INFINITY, f64::min);
        assert!((sol.objective - brute).abs() < 1e-12 * brute);
    }

    #[test]
    fn guard_refuses_large_instances() {
        let inst = generate_instance(12, 63, &GeneratorConfig::default()).unwrap();
        assert!(matches!(
            exact_solve(&inst),
            Err(Error::SizeGuard { n: 12, max: 10 })
        ));
    }

    #[test]
    fn relabeling_customers_preserves_the_objective() {
        let inst = single_vehicle(4, 64);
        let mut relabeled = inst.clone();
        // Swap customers 1 and 3 (ids stay positional).
        relabeled.nodes.swap(1, 3);
        relabeled.nodes[1].id = 1;
        relabeled.nodes[3].id = 3;
        let size = relabeled.nodes.len();
        let map = |i: usize| match i {
            1 => 3,
            3 => 1,
            other => other,
        };
        let mut dist = vec![vec![0.0; size]; size];
        let mut assign = vec![vec![0usize; size]; size];
        for i in 0..size {
            for j in 0..size {
                dist[i][j] = inst.distances[map(i)][map(j)];
                assign[i][j] = inst.profile_assignment[map(i)][map(j)];
            }
        }
        relabeled.distances = dist;
        relabeled.profile_assignment = assign;
        relabeled.validate().unwrap();

        let a = exact_solve(&inst).unwrap();
        let b = exact_solve(&relabeled).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-9 * a.objective);
    }

    #[test]
    fn multi_vehicle_enumeration_beats_or_ties_single_tour() {
        let mut inst = single_vehicle(4, 65);
        inst.fleet_size = 2;
        let two = exact_solve(&inst).unwrap();
        inst.fleet_size = 1;
        let one = exact_solve(&inst).unwrap();
        assert!(two.objective <= one.objective + 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form_on_constant_speed() {
        let profile = SpeedProfile::new(vec![0.0], vec![1.2], 200.0).unwrap();
        let p = GeneratorConfig::default().vehicle;
        let (closed, _) = arc_energy(&profile, 30.0, 5.0, 400.0, &p).unwrap();
        let quad = quad_energy(&profile, 30.0, 5.0, 400.0, &p, 1000).unwrap();
        assert!(((closed - quad) / closed).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form_on_ramps() {
        let profile = SpeedProfile::new(vec![0.0, 10.0], vec![0.5, 1.5], 200.0).unwrap();
        let p = GeneratorConfig::default().vehicle;
        let (closed, _) = arc_energy(&profile, 9.0, 2.0, 650.0, &p).unwrap();
        let quad = quad_energy(&profile, 9.0, 2.0, 650.0, &p, 100_000).unwrap();
        assert!(
            ((closed - quad) / closed).abs() < 1e-9,
            "closed {closed} vs quad {quad}"
        );
    }

    #[test]
    fn quadrature_converges_as_steps_double() {
        let inst = generate_instance(3, 66, &GeneratorConfig::default()).unwrap();
        let profile = &inst.profile_classes[1];
        let coarse = quad_energy(profile, 42.0, 17.0, 350.0, &inst.vehicle, 100_000).unwrap();
        let fine = quad_energy(profile, 42.0, 17.0, 350.0, &inst.vehicle, 200_000).unwrap();
        assert!(((fine - coarse) / fine).abs() < 1e-10);
    }

    #[test]
    fn quadrature_rejects_too_few_steps() {
        let profile = SpeedProfile::new(vec![0.0], vec![1.0], 100.0).unwrap();
        let p = GeneratorConfig::default().vehicle;
        assert!(quad_energy(&profile, 1.0, 0.0, 0.0, &p, 999).is_err());
    }
}
