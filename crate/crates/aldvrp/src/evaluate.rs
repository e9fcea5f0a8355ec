//! Route and solution evaluation: schedule propagation, feasibility checks,
//! objectives under the different load models, and gap reporting.

use crate::energy::{arc_energy, arc_energy_minlp};
use crate::error::{Error, Result};
use crate::model::{Instance, START_DEPOT};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// How the load term of the power model is evaluated along a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Remaining load on each arc (exact integral). The reference model.
    #[default]
    RealTime,
    /// Load term dropped everywhere.
    NoLoad,
    /// Initial load carried on every arc.
    InitialLoad,
    /// Remaining load fed through the linearized per-phase recursion;
    /// parity reporting only.
    MinlpApprox,
}

/// One vehicle's evaluated route: visit order plus the derived schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub vehicle: usize,
    pub visits: Vec<usize>,
    /// Departure time from each visited customer.
    pub departures: Vec<f64>,
    /// Remaining load after serving each visited customer.
    pub loads: Vec<f64>,
    /// Cumulative energy after serving each visited customer.
    pub cumulative_energy: Vec<f64>,
    /// Arrival time at the end depot.
    pub arrival_end: f64,
    /// Total energy on arrival at the end depot.
    pub energy: f64,
}

/// A full solution: one route per used vehicle.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub objective: f64,
}

impl Solution {
    pub fn visit_lists(&self) -> Vec<Vec<usize>> {
        self.routes.iter().map(|r| r.visits.clone()).collect()
    }
}

/// Evaluation context: instance, load model, and per-customer service time.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    pub instance: &'a Instance,
    pub mode: EvalMode,
    pub service_time: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a Instance, mode: EvalMode) -> Self {
        Self {
            instance,
            mode,
            service_time: 0.0,
        }
    }

    pub fn with_service_time(mut self, service_time: f64) -> Self {
        self.service_time = service_time;
        self
    }

    /// Evaluates the visit sequence of one vehicle. Departure from the depot
    /// is at time 0; the load on each arc follows the evaluation mode.
    pub fn route(&self, vehicle: usize, visits: &[usize]) -> Result<Route> {
        let inst = self.instance;
        let n = inst.n();
        let mut seen = vec![false; n + 2];
        for &v in visits {
            if v == 0 || v > n {
                return Err(Error::Validation(format!("{v} is not a customer id")));
            }
            if seen[v] {
                return Err(Error::Validation(format!("customer {v} visited twice")));
            }
            seen[v] = true;
        }

        let initial_load: f64 = visits.iter().map(|&v| inst.demand(v)).sum();
        let mut remaining = initial_load;
        let mut time = 0.0;
        let mut energy = 0.0;
        let mut departures = Vec::with_capacity(visits.len());
        let mut loads = Vec::with_capacity(visits.len());
        let mut cumulative = Vec::with_capacity(visits.len());

        let mut prev = START_DEPOT;
        for &next in visits.iter().chain(std::iter::once(&inst.end_depot())) {
            let arc_load = match self.mode {
                EvalMode::RealTime | EvalMode::MinlpApprox => remaining,
                EvalMode::NoLoad => 0.0,
                EvalMode::InitialLoad => initial_load,
            };
            let d = inst.distance(prev, next);
            let profile = inst.profile(prev, next);
            let (e, arrival) = match self.mode {
                EvalMode::MinlpApprox => arc_energy_minlp(profile, d, time, arc_load, &inst.vehicle)?,
                _ => arc_energy(profile, d, time, arc_load, &inst.vehicle)?,
            };
            energy += e;
            if next == inst.end_depot() {
                return Ok(Route {
                    vehicle,
                    visits: visits.to_vec(),
                    departures,
                    loads,
                    cumulative_energy: cumulative,
                    arrival_end: arrival,
                    energy,
                });
            }
            remaining -= inst.demand(next);
            time = arrival + self.service_time;
            if time > inst.horizon {
                return Err(Error::HorizonExceeded {
                    distance: d,
                    depart: arrival,
                });
            }
            departures.push(time);
            loads.push(remaining);
            cumulative.push(energy);
            prev = next;
        }
        unreachable!("loop always returns at the end depot");
    }

    /// Energy and end-depot arrival of a visit sequence, without building the
    /// per-visit schedule. The caller guarantees `visits` are distinct
    /// customer ids; this is the hot path of the search operators.
    pub fn route_cost(&self, visits: &[usize]) -> Result<(f64, f64)> {
        let inst = self.instance;
        let initial_load: f64 = visits.iter().map(|&v| inst.demand(v)).sum();
        let mut remaining = initial_load;
        let mut time = 0.0;
        let mut energy = 0.0;
        let mut prev = START_DEPOT;
        for &next in visits.iter().chain(std::iter::once(&inst.end_depot())) {
            let arc_load = match self.mode {
                EvalMode::RealTime | EvalMode::MinlpApprox => remaining,
                EvalMode::NoLoad => 0.0,
                EvalMode::InitialLoad => initial_load,
            };
            let d = inst.distance(prev, next);
            let profile = inst.profile(prev, next);
            let (e, arrival) = match self.mode {
                EvalMode::MinlpApprox => arc_energy_minlp(profile, d, time, arc_load, &inst.vehicle)?,
                _ => arc_energy(profile, d, time, arc_load, &inst.vehicle)?,
            };
            energy += e;
            if next == inst.end_depot() {
                return Ok((energy, arrival));
            }
            remaining -= inst.demand(next);
            time = arrival + self.service_time;
            if time > inst.horizon {
                return Err(Error::HorizonExceeded {
                    distance: d,
                    depart: arrival,
                });
            }
            prev = next;
        }
        unreachable!("loop always returns at the end depot");
    }

    /// Evaluates a set of visit lists into a full solution.
    pub fn solution(&self, visit_lists: &[Vec<usize>]) -> Result<Solution> {
        let mut routes = Vec::with_capacity(visit_lists.len());
        let mut objective = 0.0;
        for (vehicle, visits) in visit_lists.iter().enumerate() {
            let route = self.route(vehicle, visits)?;
            objective += route.energy;
            routes.push(route);
        }
        Ok(Solution { routes, objective })
    }
}

/// Spec-default evaluation: no service time.
pub fn evaluate_route(visits: &[usize], instance: &Instance, mode: EvalMode) -> Result<Route> {
    Evaluator::new(instance, mode).route(0, visits)
}

// ---------------------------------------------------------------------------
// Feasibility
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    UncoveredCustomer,
    DuplicateVisit,
    UnknownNode,
    Capacity,
    Battery,
    FleetSize,
    Horizon,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub vehicle: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Verdict over every model constraint: coverage, duplicates, capacity,
/// battery, fleet size and horizon. Battery and horizon are judged on the
/// exact real-time model regardless of how the solution was produced.
pub fn check_feasible(solution: &Solution, instance: &Instance) -> Feasibility {
    let n = instance.n();
    let mut violations = Vec::new();
    let mut count = vec![0usize; n + 1];

    for route in &solution.routes {
        for &v in &route.visits {
            if v == 0 || v > n {
                violations.push(Violation {
                    kind: ViolationKind::UnknownNode,
                    vehicle: Some(route.vehicle),
                    detail: format!("node {v} is not a customer"),
                });
            } else {
                count[v] += 1;
            }
        }
    }
    for c in 1..=n {
        if count[c] == 0 {
            violations.push(Violation {
                kind: ViolationKind::UncoveredCustomer,
                vehicle: None,
                detail: format!("customer {c} is not visited"),
            });
        } else if count[c] > 1 {
            violations.push(Violation {
                kind: ViolationKind::DuplicateVisit,
                vehicle: None,
                detail: format!("customer {c} visited {} times", count[c]),
            });
        }
    }

    if solution.routes.len() > instance.fleet_size {
        violations.push(Violation {
            kind: ViolationKind::FleetSize,
            vehicle: None,
            detail: format!(
                "{} routes exceed the fleet of {}",
                solution.routes.len(),
                instance.fleet_size
            ),
        });
    }

    let ev = Evaluator::new(instance, EvalMode::RealTime);
    for route in &solution.routes {
        let load: f64 = route
            .visits
            .iter()
            .filter(|&&v| v >= 1 && v <= n)
            .map(|&v| instance.demand(v))
            .sum();
        if load > instance.vehicle.load_capacity {
            violations.push(Violation {
                kind: ViolationKind::Capacity,
                vehicle: Some(route.vehicle),
                detail: format!(
                    "vehicle {} departs with {load} kg > Qe = {}",
                    route.vehicle, instance.vehicle.load_capacity
                ),
            });
        }
        if route.visits.iter().any(|&v| v == 0 || v > n)
            || route.visits.iter().collect::<std::collections::HashSet<_>>().len()
                != route.visits.len()
        {
            continue; // schedule undefined for malformed routes
        }
        match ev.route(route.vehicle, &route.visits) {
            Ok(exact) => {
                if exact.energy > instance.vehicle.battery_capacity {
                    violations.push(Violation {
                        kind: ViolationKind::Battery,
                        vehicle: Some(route.vehicle),
                        detail: format!(
                            "vehicle {} uses {} > Qb = {}",
                            route.vehicle, exact.energy, instance.vehicle.battery_capacity
                        ),
                    });
                }
                if exact.arrival_end > instance.horizon {
                    violations.push(Violation {
                        kind: ViolationKind::Horizon,
                        vehicle: Some(route.vehicle),
                        detail: format!(
                            "vehicle {} finishes at {} past the horizon {}",
                            route.vehicle, exact.arrival_end, instance.horizon
                        ),
                    });
                }
            }
            Err(_) => violations.push(Violation {
                kind: ViolationKind::Horizon,
                vehicle: Some(route.vehicle),
                detail: format!("vehicle {} cannot finish within the horizon", route.vehicle),
            }),
        }
    }

    Feasibility {
        feasible: violations.is_empty(),
        violations,
    }
}

// ---------------------------------------------------------------------------
// Load-model comparison
// ---------------------------------------------------------------------------

/// Objectives of the three load models and their percentage gaps relative to
/// the real-time objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    /// Real-time-optimized objective, evaluated under the real-time model.
    pub w: f64,
    /// No-load-optimized objective, evaluated under the no-load model.
    pub w_no_load: f64,
    /// Initial-load-optimized routes re-evaluated under the real-time model.
    pub w_ini_load: f64,
    pub g_no_load: f64,
    pub g_ini_load: f64,
}

fn gap_percent(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        0.0
    } else {
        (value / reference - 1.0) * 100.0
    }
}

/// Builds the gap report from the three per-model solver results. All
/// objectives are recomputed here so stale stored values cannot leak in.
pub fn compare_load_models(
    sol_realtime: &Solution,
    sol_noload: &Solution,
    sol_iniload: &Solution,
    instance: &Instance,
    service_time: f64,
) -> Result<EvalReport> {
    let real = Evaluator::new(instance, EvalMode::RealTime).with_service_time(service_time);
    let noload = Evaluator::new(instance, EvalMode::NoLoad).with_service_time(service_time);

    let w = real.solution(&sol_realtime.visit_lists())?.objective;
    let w_no_load = noload.solution(&sol_noload.visit_lists())?.objective;
    let w_ini_load = real.solution(&sol_iniload.visit_lists())?.objective;

    Ok(EvalReport {
        w,
        w_no_load,
        w_ini_load,
        g_no_load: gap_percent(w_no_load, w),
        g_ini_load: gap_percent(w_ini_load, w),
    })
}

/// Exact CSV header for gap reports.
pub const REPORT_CSV_HEADER: &str = "ins,n,W,W_no_load,G_no_load,G_ini_load";

pub fn report_csv_row(label: &str, n: usize, report: &EvalReport) -> String {
    use crate::model::fmt_decimal;
    format!(
        "{label},{n},{},{},{},{}",
        fmt_decimal(report.w),
        fmt_decimal(report.w_no_load),
        fmt_decimal(report.g_no_load),
        fmt_decimal(report.g_ini_load),
    )
}

// ---------------------------------------------------------------------------
// Solution JSON
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteFile {
    pub vehicle: usize,
    pub visits: Vec<usize>,
    pub departures: Vec<f64>,
    pub loads: Vec<f64>,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub routes: Vec<RouteFile>,
    pub objective: f64,
}

impl From<&Solution> for SolutionFile {
    fn from(sol: &Solution) -> Self {
        SolutionFile {
            routes: sol
                .routes
                .iter()
                .map(|r| RouteFile {
                    vehicle: r.vehicle,
                    visits: r.visits.clone(),
                    departures: r.departures.clone(),
                    loads: r.loads.clone(),
                    energy: r.energy,
                })
                .collect(),
            objective: sol.objective,
        }
    }
}

impl SolutionFile {
    /// Re-evaluates the stored visit lists under the given context.
    pub fn reevaluate(&self, ev: &Evaluator) -> Result<Solution> {
        let lists: Vec<Vec<usize>> = self.routes.iter().map(|r| r.visits.clone()).collect();
        ev.solution(&lists)
    }
}

pub fn solution_to_json(solution: &Solution) -> Result<String> {
    crate::model::to_decimal_json(&SolutionFile::from(solution))
}

pub fn save_solution(solution: &Solution, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, solution_to_json(solution)?)?;
    Ok(())
}

pub fn load_solution_file(path: impl AsRef<Path>) -> Result<SolutionFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
