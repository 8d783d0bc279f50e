//! Physics checks run by `verify` against a session config.

use std::fmt;

use gyrohaptic::checks::{generic_body_rate, measure_nutation_frequency, measure_precession_period, torque_free_drift};
use gyrohaptic::session::{Session, SessionConfig};

pub const PRECESSION_TOLERANCE: f64 = 0.02;
pub const CONSERVATION_TOLERANCE: f64 = 1e-8;
pub const NUTATION_TOLERANCE: f64 = 0.05;
pub const DIRECTION_TOLERANCE: f64 = 1e-12;
pub const CONSERVATION_STEPS: usize = 10_000;
pub const NUTATION_PERTURBATION_RAD_S: f64 = 0.5;
pub const NUTATION_WINDOW_S: f64 = 2.0;
pub const FORCE_RUN_S: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Pass,
    Fail,
    Skipped(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.status {
            Status::Pass => write!(f, "{:<18} PASS  {}", self.name, self.detail),
            Status::Fail => write!(f, "{:<18} FAIL  {}", self.name, self.detail),
            Status::Skipped(why) => write!(f, "{:<18} skipped ({why})", self.name),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

fn judged(name: &'static str, ok: bool, detail: String) -> Check {
    Check { name, status: if ok { Status::Pass } else { Status::Fail }, detail }
}

pub fn precession_check(config: &SessionConfig) -> Check {
    let name = "precession period";
    if config.wheel.spin_rate_rad_s == 0.0 {
        return Check { name, status: Status::Skipped("ω=0"), detail: String::new() };
    }
    match measure_precession_period(&config.wheel, config.initial_theta_rad, config.dt) {
        Ok(m) => judged(
            name,
            m.relative_error() <= PRECESSION_TOLERANCE,
            format!(
                "measured {:.4} s, predicted {:.4} s, error {:.3}% (tol {}%)",
                m.measured_s,
                m.predicted_s,
                100.0 * m.relative_error(),
                100.0 * PRECESSION_TOLERANCE
            ),
        ),
        Err(e) => judged(name, false, e.to_string()),
    }
}

pub fn conservation_check(config: &SessionConfig) -> Check {
    let name = "conservation";
    let omega = generic_body_rate(config.wheel.spin_rate_rad_s);
    match torque_free_drift(&config.wheel, omega, config.dt, CONSERVATION_STEPS) {
        Ok(d) => judged(
            name,
            d.momentum < CONSERVATION_TOLERANCE && d.energy < CONSERVATION_TOLERANCE,
            format!(
                "|L| drift {:.3e}, energy drift {:.3e} over {CONSERVATION_STEPS} steps (tol {CONSERVATION_TOLERANCE:e})",
                d.momentum, d.energy
            ),
        ),
        Err(e) => judged(name, false, e.to_string()),
    }
}

pub fn nutation_check(config: &SessionConfig) -> Check {
    let name = "nutation frequency";
    if config.wheel.spin_rate_rad_s == 0.0 {
        return Check { name, status: Status::Skipped("ω=0"), detail: String::new() };
    }
    match measure_nutation_frequency(
        &config.wheel,
        config.initial_theta_rad,
        NUTATION_PERTURBATION_RAD_S,
        config.dt,
        NUTATION_WINDOW_S,
    ) {
        Ok(m) => judged(
            name,
            m.relative_error() <= NUTATION_TOLERANCE,
            format!(
                "measured {:.3} rad/s, predicted {:.3} rad/s, error {:.3}% (tol {}%)",
                m.measured_rad_s,
                m.predicted_rad_s,
                100.0 * m.relative_error(),
                100.0 * NUTATION_TOLERANCE
            ),
        ),
        Err(e) => judged(name, false, e.to_string()),
    }
}

/// Largest emitted force over a session run, and the worst angle between a
/// clamped force and its pre-clamp direction.
pub fn max_force_check(config: &SessionConfig) -> Check {
    let name = "max force";
    let cap = config.caps.max_force_n;
    let mut session = match Session::new(config.clone()) {
        Ok(s) => s,
        Err(e) => return judged(name, false, e.to_string()),
    };
    let ticks = (FORCE_RUN_S / config.dt).round() as u64;
    let mut max_force: f64 = 0.0;
    let mut worst_direction: f64 = 0.0;
    for _ in 0..ticks {
        if let Err(e) = session.tick() {
            return judged(name, false, e.to_string());
        }
        let f = session.last_forces();
        for (raw, out) in [(f.raw_force_a, f.force_a), (f.raw_force_b, f.force_b)] {
            max_force = max_force.max(out.norm());
            if raw.norm() > 0.0 && out.norm() > 0.0 {
                let (r, o) = (raw / raw.norm(), out / out.norm());
                worst_direction = worst_direction.max((r - o).norm());
            }
        }
    }
    judged(
        name,
        max_force <= cap && worst_direction <= DIRECTION_TOLERANCE,
        format!(
            "max |F| {max_force:.4} N (cap {cap} N), direction error {worst_direction:.2e} over {FORCE_RUN_S} s"
        ),
    )
}

pub fn verify(config: &SessionConfig) -> Report {
    Report {
        checks: vec![
            precession_check(config),
            conservation_check(config),
            nutation_check(config),
            max_force_check(config),
        ],
    }
}
