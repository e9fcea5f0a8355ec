//! Closed-form energy integration of the power model over constant-
//! acceleration segments, with motion-phase classification.

use crate::error::{Error, Result};
use crate::model::{SpeedProfile, VehicleParams};
use crate::timetravel::{arrival_time, traverse};

/// Motion phase of a constant-acceleration segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// a > 0
    Accel,
    /// a = 0, v > 0
    Cruise,
    /// a < 0
    Decel,
    /// a = 0, v = 0
    Idle,
}

impl Phase {
    pub fn classify(v: f64, a: f64) -> Phase {
        if a > 0.0 {
            Phase::Accel
        } else if a < 0.0 {
            Phase::Decel
        } else if v > 0.0 {
            Phase::Cruise
        } else {
            Phase::Idle
        }
    }
}

/// Energy drawn over one constant-acceleration segment at constant load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentEnergy {
    pub t_start: f64,
    pub t_end: f64,
    pub v_start: f64,
    pub v_end: f64,
    pub accel: f64,
    pub load: f64,
    pub phase: Phase,
    pub energy: f64,
}

/// Instantaneous power demand `r v + s v^2 + c v^3 + (M + L) |a| v`.
pub fn power(v: f64, a: f64, load: f64, p: &VehicleParams) -> f64 {
    (p.r + (p.mass + load) * a.abs()) * v + p.s * v * v + p.c * v * v * v
}

/// Exact integral of the power over `[t_start, t_end]` with
/// `V(t) = v_start + a (t - t_start)`: the degree-4 polynomial antiderivative
/// evaluated at the segment width, so no division by `a` is involved.
pub fn segment_energy(
    t_start: f64,
    t_end: f64,
    v_start: f64,
    accel: f64,
    load: f64,
    p: &VehicleParams,
) -> Result<SegmentEnergy> {
    if !(t_end >= t_start) {
        return Err(Error::InvalidSegment(format!(
            "segment end {t_end} before start {t_start}"
        )));
    }
    let dt = t_end - t_start;
    let v_end = v_start + accel * dt;
    if v_start < -1e-9 || v_end < -1e-9 {
        return Err(Error::InvalidSegment(format!(
            "speed goes negative ({v_start} -> {v_end}); split the segment upstream"
        )));
    }
    let v0 = v_start.max(0.0);
    let a = accel;
    // Integrals of V, V^2, V^3 over the segment width.
    let i1 = v0 * dt + 0.5 * a * dt * dt;
    let i2 = v0 * v0 * dt + v0 * a * dt * dt + a * a * dt * dt * dt / 3.0;
    let i3 = v0 * v0 * v0 * dt
        + 1.5 * v0 * v0 * a * dt * dt
        + v0 * a * a * dt * dt * dt
        + 0.25 * a * a * a * dt * dt * dt * dt;
    let energy = (p.r + (p.mass + load) * a.abs()) * i1 + p.s * i2 + p.c * i3;
    Ok(SegmentEnergy {
        t_start,
        t_end,
        v_start: v0,
        v_end: v_end.max(0.0),
        accel: a,
        load,
        phase: Phase::classify(v0, a),
        energy,
    })
}

/// Exact energy of traversing `d` km starting at `depart` with constant load,
/// split at the profile breakpoints. Returns the total together with the
/// arrival time from the same traversal.
pub fn arc_energy(
    profile: &SpeedProfile,
    d: f64,
    depart: f64,
    load: f64,
    p: &VehicleParams,
) -> Result<(f64, f64)> {
    let mut total = 0.0;
    let mut bad: Option<Error> = None;
    let arrival = traverse(profile, d, depart, |t0, t1, v0, v1| {
        let a = if t1 > t0 { (v1 - v0) / (t1 - t0) } else { 0.0 };
        match segment_energy(t0, t1, v0, a, load, p) {
            Ok(seg) => total += seg.energy,
            Err(e) => bad = Some(e),
        }
    })?;
    if let Some(e) = bad {
        return Err(e);
    }
    Ok((total, arrival))
}

/// Arc energy under the linearized recursion that approximates each phase with
/// a `gamma`-scaled midpoint-speed product. A literal transcription of the
/// per-phase update rules, keyed on the interval containing the departure;
/// kept for parity reporting only. The exact integral above is the solver's
/// source of truth.
pub fn arc_energy_minlp(
    profile: &SpeedProfile,
    d: f64,
    depart: f64,
    load: f64,
    p: &VehicleParams,
) -> Result<(f64, f64)> {
    let arrival = arrival_time(profile, d, depart)?;
    let segs = profile.segments();
    let m = segs
        .partition_point(|s| s.t1 <= depart)
        .min(segs.len() - 1);
    let seg = segs[m];
    let a_dep = seg.accel();
    let v_dep = seg.speed_at(depart);
    let span = arrival - depart;
    let mass_term = |a: f64| p.gamma + a.abs() * (p.mass + load);

    let energy = match Phase::classify(v_dep, a_dep) {
        // Duration times (gamma + |a|(M+L)) times the speed at mid-span,
        // extrapolated with the departure interval's ramp.
        Phase::Accel => {
            let v_mid = seg.v0 + a_dep * (0.5 * (depart + arrival) - seg.t0);
            span * mass_term(a_dep) * v_mid
        }
        // Cruise at V_m until the interval ends, with a correction built from
        // the ramp two intervals back; beyond the interval end only the
        // gamma term remains.
        Phase::Cruise => {
            let v_m = seg.v1;
            let t_m = seg.t1.min(arrival);
            let (a_back, v_back, t_back) = if m >= 1 {
                (segs[m - 1].accel(), segs[m - 1].v0, segs[m - 1].t0)
            } else {
                (0.0, seg.v0, seg.t0)
            };
            let bracket = if a_back != 0.0 {
                v_m + a_back * ((v_back - v_m) / (2.0 * a_back) + depart - t_back)
            } else {
                v_m
            };
            (t_m - depart) * mass_term(a_back) * bracket
                + v_m * p.gamma * (arrival - t_m).max(0.0)
        }
        // Deceleration is charged at gamma times the interval's entry speed.
        Phase::Decel => p.gamma * seg.v0 * span,
        // Idle until the interval ends, then ramp away with the next
        // interval's acceleration.
        Phase::Idle => {
            let t_m = seg.t1;
            let (a_next, v_m) = if m + 1 < segs.len() {
                (segs[m + 1].accel(), segs[m + 1].v0)
            } else {
                (0.0, seg.v1)
            };
            let after = (arrival - t_m).max(0.0);
            after * mass_term(a_next) * (v_m + a_next * 0.5 * after)
                + v_m * p.gamma * (t_m - depart).min(span).max(0.0)
        }
    };
    Ok((energy.max(0.0), arrival))
}
