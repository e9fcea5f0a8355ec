//! Problem data model: nodes, vehicle parameters, speed profiles, instance
//! JSON I/O and a FIFO-respecting synthetic instance generator.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Index of the start depot.
pub const START_DEPOT: usize = 0;

/// A node of the routing graph. Index 0 is the start depot, `n + 1` the end
/// depot, and 1..=n are customers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub demand: f64,
}

/// Vehicle mass, capacities and the coefficients of the power model
/// `P = r v + s v^2 + c v^3 + (M + L) |a| v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Curb mass M in kg.
    #[serde(rename = "M")]
    pub mass: f64,
    /// Load capacity Q_e in kg.
    #[serde(rename = "Qe")]
    pub load_capacity: f64,
    /// Battery capacity Q_b in energy units.
    #[serde(rename = "Qb")]
    pub battery_capacity: f64,
    /// Power per unit speed.
    pub r: f64,
    /// Power per unit speed squared.
    pub s: f64,
    /// Power per unit speed cubed.
    pub c: f64,
    /// Linearized resistance coefficient (power per unit speed) used only by
    /// the approximate energy recursion.
    pub gamma: f64,
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::validation("vehicle mass M must be > 0"));
        }
        if !(self.load_capacity > 0.0) {
            return Err(Error::validation("load capacity Qe must be > 0"));
        }
        if !(self.battery_capacity > 0.0) {
            return Err(Error::validation("battery capacity Qb must be > 0"));
        }
        for (name, v) in [
            ("r", self.r),
            ("s", self.s),
            ("c", self.c),
            ("gamma", self.gamma),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!(
                    "vehicle coefficient {name} must be finite and >= 0"
                )));
            }
        }
        Ok(())
    }
}

/// One constant-acceleration span of a speed profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSegment {
    pub t0: f64,
    pub t1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl ProfileSegment {
    pub fn accel(&self) -> f64 {
        if self.t1 > self.t0 {
            (self.v1 - self.v0) / (self.t1 - self.t0)
        } else {
            0.0
        }
    }

    pub fn width(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Speed at absolute time `t`, assuming `t0 <= t <= t1`.
    pub fn speed_at(&self, t: f64) -> f64 {
        let v = self.v0 + self.accel() * (t - self.t0);
        if v.abs() < 1e-12 {
            0.0
        } else {
            v
        }
    }

    /// Distance covered over the whole segment (trapezoid, exact for linear
    /// speed).
    pub fn distance(&self) -> f64 {
        0.5 * (self.v0 + self.v1) * self.width()
    }
}

/// Piecewise-linear speed over absolute time, shared by all traversals of an
/// arc. Constructed from breakpoints and per-breakpoint speeds; the last
/// speed extends at a constant value up to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    breakpoints: Vec<f64>,
    speeds: Vec<f64>,
    horizon: f64,
    segments: Vec<ProfileSegment>,
}

impl SpeedProfile {
    /// Validating constructor. Speeds are linearly interpolated between
    /// breakpoints, so the profile is continuous by construction.
    pub fn new(breakpoints: Vec<f64>, speeds: Vec<f64>, horizon: f64) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::validation("profile needs at least one breakpoint"));
        }
        if breakpoints.len() != speeds.len() {
            return Err(Error::validation(
                "profile breakpoints and speeds must have equal length",
            ));
        }
        for w in breakpoints.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::validation("breakpoints must be strictly increasing"));
            }
        }
        if !(breakpoints[0] >= 0.0) || !breakpoints[0].is_finite() {
            return Err(Error::validation("first breakpoint must be >= 0"));
        }
        for &v in &speeds {
            if !v.is_finite() {
                return Err(Error::validation("speed must be finite"));
            }
            if v < 0.0 {
                return Err(Error::validation("speed < 0"));
            }
        }
        if !horizon.is_finite() || horizon < *breakpoints.last().unwrap() {
            return Err(Error::validation("horizon must be >= the last breakpoint"));
        }
        let segments = build_segments(&breakpoints, &speeds, horizon);
        Ok(Self {
            breakpoints,
            speeds,
            horizon,
            segments,
        })
    }

    /// Unvalidated constructor from raw segments. Unlike [`SpeedProfile::new`]
    /// this can represent discontinuous or degenerate profiles; intended for
    /// tests and diagnostics, not for instances.
    pub fn from_segments(segments: Vec<ProfileSegment>, horizon: f64) -> Self {
        let breakpoints = segments
            .iter()
            .map(|s| s.t0)
            .chain(segments.last().map(|s| s.t1))
            .collect();
        let speeds = segments
            .iter()
            .map(|s| s.v0)
            .chain(segments.last().map(|s| s.v1))
            .collect();
        Self {
            breakpoints,
            speeds,
            horizon,
            segments,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// All constant-acceleration segments covering `[0, horizon]`, including
    /// the constant extensions before the first and after the last breakpoint.
    pub fn segments(&self) -> &[ProfileSegment] {
        &self.segments
    }

    pub fn num_intervals(&self) -> usize {
        self.segments.len()
    }

    /// Speed at absolute time `t` (clamped to `[0, horizon]`). Right-continuous
    /// at interior breakpoints.
    pub fn speed_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.horizon);
        let idx = self
            .segments
            .partition_point(|s| s.t1 <= t)
            .min(self.segments.len().saturating_sub(1));
        self.segments[idx].speed_at(t)
    }

    /// Acceleration of the segment containing `t` (right-continuous).
    pub fn accel_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.horizon);
        let idx = self
            .segments
            .partition_point(|s| s.t1 <= t)
            .min(self.segments.len().saturating_sub(1));
        self.segments[idx].accel()
    }

    /// True when adjacent segments agree on the shared boundary speed.
    pub fn is_continuous(&self) -> bool {
        self.segments
            .windows(2)
            .all(|w| (w[0].v1 - w[1].v0).abs() <= 1e-12)
    }
}

fn build_segments(breakpoints: &[f64], speeds: &[f64], horizon: f64) -> Vec<ProfileSegment> {
    let mut segs = Vec::with_capacity(breakpoints.len() + 1);
    if breakpoints[0] > 0.0 {
        segs.push(ProfileSegment {
            t0: 0.0,
            t1: breakpoints[0],
            v0: speeds[0],
            v1: speeds[0],
        });
    }
    for m in 1..breakpoints.len() {
        segs.push(ProfileSegment {
            t0: breakpoints[m - 1],
            t1: breakpoints[m],
            v0: speeds[m - 1],
            v1: speeds[m],
        });
    }
    let t_last = *breakpoints.last().unwrap();
    let v_last = *speeds.last().unwrap();
    if horizon > t_last {
        segs.push(ProfileSegment {
            t0: t_last,
            t1: horizon,
            v0: v_last,
            v1: v_last,
        });
    }
    segs
}

/// A validated ALD-EVRP instance. Immutable after construction; safe to share
/// across worker threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub nodes: Vec<Node>,
    /// Distance matrix in km, `(n + 2) x (n + 2)`.
    pub distances: Vec<Vec<f64>>,
    /// Shared speed-profile classes.
    pub profile_classes: Vec<SpeedProfile>,
    /// Per-arc class index, `(n + 2) x (n + 2)`.
    pub profile_assignment: Vec<Vec<usize>>,
    pub vehicle: VehicleParams,
    pub fleet_size: usize,
    pub horizon: f64,
}

impl Instance {
    /// Number of customers.
    pub fn n(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn end_depot(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn customers(&self) -> impl Iterator<Item = usize> {
        1..=self.n()
    }

    pub fn demand(&self, node: usize) -> f64 {
        self.nodes[node].demand
    }

    pub fn total_demand(&self) -> f64 {
        self.nodes.iter().map(|n| n.demand).sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i][j]
    }

    pub fn profile(&self, i: usize, j: usize) -> &SpeedProfile {
        &self.profile_classes[self.profile_assignment[i][j]]
    }

    pub fn validate(&self) -> Result<()> {
        let size = self.nodes.len();
        if size < 3 {
            return Err(Error::validation(
                "instance needs a start depot, an end depot and at least one customer",
            ));
        }
        let end = size - 1;
        for (idx, node) in self.nodes.iter().enumerate() {
            if node.id != idx {
                return Err(Error::Validation(format!(
                    "node at position {idx} has id {}; ids must be 0..=n+1 in order",
                    node.id
                )));
            }
            if !node.x.is_finite() || !node.y.is_finite() || !node.demand.is_finite() {
                return Err(Error::Validation(format!("node {idx} has non-finite data")));
            }
            let is_depot = idx == START_DEPOT || idx == end;
            if is_depot && node.demand != 0.0 {
                return Err(Error::Validation(format!(
                    "depot {idx} must have demand 0, got {}",
                    node.demand
                )));
            }
            if !is_depot && node.demand < 0.0 {
                return Err(Error::Validation(format!(
                    "customer {idx} must have demand >= 0, got {}",
                    node.demand
                )));
            }
        }
        if self.distances.len() != size || self.distances.iter().any(|row| row.len() != size) {
            return Err(Error::Validation(format!(
                "distance matrix must be {size}x{size}"
            )));
        }
        for i in 0..size {
            for j in 0..size {
                let d = self.distances[i][j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Validation(format!(
                        "distance [{i}][{j}] must be finite and >= 0"
                    )));
                }
                // The two depots describe the same physical location, so the
                // depot-depot arc may have zero length.
                let depot_pair = (i == START_DEPOT && j == end) || (i == end && j == START_DEPOT);
                if i != j && !depot_pair && d == 0.0 {
                    return Err(Error::Validation(format!(
                        "distance [{i}][{j}] must be > 0 between distinct locations"
                    )));
                }
            }
        }
        if self.profile_classes.is_empty() {
            return Err(Error::validation("at least one profile class is required"));
        }
        for p in &self.profile_classes {
            if (p.horizon() - self.horizon).abs() > 1e-9 {
                return Err(Error::validation(
                    "profile horizon must match the instance horizon",
                ));
            }
            if !p.is_continuous() {
                return Err(Error::validation("profile must be continuous"));
            }
        }
        if self.profile_assignment.len() != size
            || self.profile_assignment.iter().any(|row| row.len() != size)
        {
            return Err(Error::Validation(format!(
                "profile assignment must be {size}x{size}"
            )));
        }
        for row in &self.profile_assignment {
            for &cls in row {
                if cls >= self.profile_classes.len() {
                    return Err(Error::Validation(format!(
                        "profile assignment index {cls} out of range"
                    )));
                }
            }
        }
        self.vehicle.validate()?;
        if self.fleet_size == 0 {
            return Err(Error::validation("fleet_size must be >= 1"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::validation("horizon must be finite and > 0"));
        }
        let total = self.total_demand();
        let capacity = self.fleet_size as f64 * self.vehicle.load_capacity;
        if total > capacity {
            return Err(Error::Validation(format!(
                "total demand {total} exceeds fleet capacity {capacity}"
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ProfilesFile {
    breakpoints: Vec<Vec<f64>>,
    speeds: Vec<Vec<f64>>,
    assignment: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    nodes: Vec<Node>,
    distances: Vec<Vec<f64>>,
    profiles: ProfilesFile,
    vehicle: VehicleParams,
    fleet_size: usize,
    horizon: f64,
}

/// Loads and validates an instance from its JSON file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    instance_from_json(&text)
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    if file.profiles.breakpoints.len() != file.profiles.speeds.len() {
        return Err(Error::validation(
            "profiles.breakpoints and profiles.speeds must list the same classes",
        ));
    }
    let profile_classes = file
        .profiles
        .breakpoints
        .into_iter()
        .zip(file.profiles.speeds)
        .map(|(bp, sp)| SpeedProfile::new(bp, sp, file.horizon))
        .collect::<Result<Vec<_>>>()?;
    let instance = Instance {
        nodes: file.nodes,
        distances: file.distances,
        profile_classes,
        profile_assignment: file.profiles.assignment,
        vehicle: file.vehicle,
        fleet_size: file.fleet_size,
        horizon: file.horizon,
    };
    instance.validate()?;
    Ok(instance)
}

/// Serializes a validated instance to the schema JSON.
pub fn instance_to_json(instance: &Instance) -> Result<String> {
    instance.validate()?;
    let file = InstanceFile {
        nodes: instance.nodes.clone(),
        distances: instance.distances.clone(),
        profiles: ProfilesFile {
            breakpoints: instance
                .profile_classes
                .iter()
                .map(|p| p.breakpoints().to_vec())
                .collect(),
            speeds: instance
                .profile_classes
                .iter()
                .map(|p| p.speeds().to_vec())
                .collect(),
            assignment: instance.profile_assignment.clone(),
        },
        vehicle: instance.vehicle,
        fleet_size: instance.fleet_size,
        horizon: instance.horizon,
    };
    to_decimal_json(&file)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let json = instance_to_json(instance)?;
    std::fs::write(path, json)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Decimal JSON formatting
// ---------------------------------------------------------------------------

/// Formats a finite float in plain decimal notation with at least nine
/// significant digits, preserving the exact binary value.
pub fn fmt_decimal(value: f64) -> String {
    if value == 0.0 {
        return "0.0".to_string();
    }
    // Rust's Display prints the shortest decimal (never scientific) string
    // that round-trips; pad with zeros up to nine significant digits.
    let mut s = format!("{value}");
    let digits = s
        .chars()
        .filter(|c| c.is_ascii_digit())
        .collect::<String>();
    let sig = digits.trim_start_matches('0').len();
    if sig < 9 {
        if !s.contains('.') {
            s.push('.');
        }
        for _ in sig..9 {
            s.push('0');
        }
    }
    s
}

struct DecimalFormatter;

impl serde_json::ser::Formatter for DecimalFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(fmt_decimal(value).as_bytes())
    }
}

/// JSON serialization with all floats in decimal (non-scientific) notation.
pub fn to_decimal_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, DecimalFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits utf-8"))
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

/// Settings for the synthetic instance generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    /// Side of the square placement region, km.
    pub area: f64,
    /// Customer demand range, kg.
    pub demand_range: (f64, f64),
    /// Road distance = Euclidean distance times this factor.
    pub detour_factor: f64,
    /// Duration of the linear ramp connecting two plateaus, min.
    pub ramp_minutes: f64,
    /// Constant speeds of the six traffic regimes of the reference class,
    /// km/min.
    pub plateau_speeds: Vec<f64>,
    /// Absolute times at which the regime changes, min.
    pub plateau_boundaries: Vec<f64>,
    /// Number of profile classes; class 0 is the unjittered reference.
    pub profile_classes: usize,
    /// Relative plateau-speed jitter for classes beyond the reference.
    pub speed_jitter: f64,
    pub horizon: f64,
    pub vehicle: VehicleParams,
    /// Fixed fleet size; when absent the fleet is sized from total demand.
    pub fleet_size: Option<usize>,
    /// Target average vehicle fill when sizing the fleet automatically.
    pub target_fill: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            area: 60.0,
            demand_range: (10.0, 100.0),
            detour_factor: 1.3,
            ramp_minutes: 10.0,
            plateau_speeds: vec![0.7, 1.1, 0.8, 0.9, 1.15, 0.75],
            plateau_boundaries: vec![30.0, 60.0, 90.0, 150.0, 300.0],
            profile_classes: 4,
            speed_jitter: 0.15,
            horizon: 600.0,
            vehicle: VehicleParams {
                mass: 1500.0,
                load_capacity: 1000.0,
                battery_capacity: 150_000.0,
                r: 100.0,
                s: 80.0,
                c: 40.0,
                gamma: 220.0,
            },
            fleet_size: None,
            target_fill: 0.6,
        }
    }
}

/// Builds the piecewise-linear profile for one set of plateau speeds: constant
/// regimes connected by linear ramps centred on each regime boundary.
fn plateau_profile(speeds: &[f64], boundaries: &[f64], ramp: f64, horizon: f64) -> SpeedProfile {
    assert_eq!(speeds.len(), boundaries.len() + 1);
    let half = ramp / 2.0;
    let mut bp = vec![0.0];
    let mut sp = vec![speeds[0]];
    for (k, &b) in boundaries.iter().enumerate() {
        bp.push(b - half);
        sp.push(speeds[k]);
        bp.push(b + half);
        sp.push(speeds[k + 1]);
    }
    SpeedProfile::new(bp, sp, horizon).expect("generated profile is valid")
}

/// Generates a synthetic instance; a pure function of `(n, seed, config)`.
pub fn generate_instance(n: usize, seed: u64, config: &GeneratorConfig) -> Result<Instance> {
    if n == 0 {
        return Err(Error::validation("n must be >= 1"));
    }
    if config.plateau_speeds.len() != config.plateau_boundaries.len() + 1 {
        return Err(Error::validation(
            "plateau_speeds must have one more entry than plateau_boundaries",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = n + 2;
    let center = config.area / 2.0;

    let mut nodes = Vec::with_capacity(size);
    nodes.push(Node {
        id: 0,
        x: center,
        y: center,
        demand: 0.0,
    });
    for id in 1..=n {
        let x = rng.random_range(0.0..config.area);
        let y = rng.random_range(0.0..config.area);
        let demand = rng.random_range(config.demand_range.0..=config.demand_range.1);
        nodes.push(Node { id, x, y, demand });
    }
    nodes.push(Node {
        id: n + 1,
        x: center,
        y: center,
        demand: 0.0,
    });

    let mut distances = vec![vec![0.0; size]; size];
    for i in 0..size {
        for j in 0..size {
            if i == j {
                continue;
            }
            let dx = nodes[i].x - nodes[j].x;
            let dy = nodes[i].y - nodes[j].y;
            distances[i][j] = (dx * dx + dy * dy).sqrt() * config.detour_factor;
        }
    }

    let classes = config.profile_classes.max(1);
    let mut profile_classes = Vec::with_capacity(classes);
    profile_classes.push(plateau_profile(
        &config.plateau_speeds,
        &config.plateau_boundaries,
        config.ramp_minutes,
        config.horizon,
    ));
    for _ in 1..classes {
        let speeds: Vec<f64> = config
            .plateau_speeds
            .iter()
            .map(|&v| {
                let factor = rng.random_range(1.0 - config.speed_jitter..=1.0 + config.speed_jitter);
                (v * factor).max(0.2)
            })
            .collect();
        profile_classes.push(plateau_profile(
            &speeds,
            &config.plateau_boundaries,
            config.ramp_minutes,
            config.horizon,
        ));
    }

    let mut profile_assignment = vec![vec![0usize; size]; size];
    for row in profile_assignment.iter_mut() {
        for slot in row.iter_mut() {
            *slot = rng.random_range(0..classes);
        }
    }

    let total_demand: f64 = nodes.iter().map(|nd| nd.demand).sum();
    let fleet_size = match config.fleet_size {
        Some(k) => k,
        None => {
            let per_vehicle = config.vehicle.load_capacity * config.target_fill;
            ((total_demand / per_vehicle).ceil() as usize).max(1)
        }
    };

    let instance = Instance {
        nodes,
        distances,
        profile_classes,
        profile_assignment,
        vehicle: config.vehicle,
        fleet_size,
        horizon: config.horizon,
    };
    instance.validate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_instance_json() -> String {
        r#"{
            "nodes": [
                {"id": 0, "x": 0.0, "y": 0.0, "demand": 0.0},
                {"id": 1, "x": 3.0, "y": 4.0, "demand": 25.0},
                {"id": 2, "x": 0.0, "y": 0.0, "demand": 0.0}
            ],
            "distances": [
                [0.0, 5.0, 0.0],
                [5.0, 0.0, 5.0],
                [0.0, 5.0, 0.0]
            ],
            "profiles": {
                "breakpoints": [[0.0, 100.0]],
                "speeds": [[1.0, 1.0]],
                "assignment": [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
            },
            "vehicle": {"M": 1000.0, "Qe": 100.0, "Qb": 100000.0,
                        "r": 0.1, "s": 0.01, "c": 0.001, "gamma": 0.15},
            "fleet_size": 1,
            "horizon": 500.0
        }"#
        .to_string()
    }

    #[test]
    fn minimal_one_customer_file_loads() {
        let inst = instance_from_json(&minimal_instance_json()).unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.nodes.len(), 3);
        assert_eq!(inst.end_depot(), 2);
    }

    #[test]
    fn negative_speed_is_rejected() {
        let text = minimal_instance_json().replace("[[1.0, 1.0]]", "[[1.0, -1.0]]");
        let err = instance_from_json(&text).unwrap_err();
        assert!(err.to_string().contains("speed < 0"), "got: {err}");
    }

    #[test]
    fn save_load_round_trip_is_identity() {
        let inst = generate_instance(6, 42, &GeneratorConfig::default()).unwrap();
        let json = instance_to_json(&inst).unwrap();
        let reloaded = instance_from_json(&json).unwrap();
        assert_eq!(inst, reloaded);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GeneratorConfig::default();
        let a = generate_instance(4, 1, &cfg).unwrap();
        let b = generate_instance(4, 1, &cfg).unwrap();
        assert_eq!(instance_to_json(&a).unwrap(), instance_to_json(&b).unwrap());
    }

    #[test]
    fn reference_profile_hits_quoted_plateau_speeds() {
        let inst = generate_instance(3, 9, &GeneratorConfig::default()).unwrap();
        let reference = &inst.profile_classes[0];
        assert_eq!(reference.speed_at(45.0), 1.1);
        assert_eq!(reference.speed_at(120.0), 0.9);
    }

    #[test]
    fn generated_profiles_are_continuous_and_nonnegative() {
        let inst = generate_instance(10, 3, &GeneratorConfig::default()).unwrap();
        for p in &inst.profile_classes {
            assert!(p.is_continuous());
            let steps = 2000;
            for k in 0..=steps {
                let t = inst.horizon * k as f64 / steps as f64;
                assert!(p.speed_at(t) >= 0.0);
            }
        }
    }

    #[test]
    fn decimal_formatting_has_nine_significant_digits() {
        assert_eq!(fmt_decimal(0.5), "0.500000000");
        assert_eq!(fmt_decimal(45.0), "45.0000000");
        assert_eq!(fmt_decimal(0.0), "0.0");
        assert_eq!(fmt_decimal(-1.25), "-1.25000000");
        let long = fmt_decimal(123456789.25);
        assert_eq!(long, "123456789.25");
        // Exact round-trip through the padded representation.
        for v in [0.1 + 0.2, 1.0 / 3.0, 1e-7, 12345.6789, -9.81] {
            assert_eq!(fmt_decimal(v).parse::<f64>().unwrap(), v);
            assert!(!fmt_decimal(v).contains('e') && !fmt_decimal(v).contains('E'));
        }
    }

    #[test]
    fn fleet_override_must_fit_demand() {
        let cfg = GeneratorConfig {
            fleet_size: Some(1),
            ..GeneratorConfig::default()
        };
        // 30 customers at up to 100 kg cannot fit one 1000 kg vehicle.
        let err = generate_instance(30, 7, &cfg).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
