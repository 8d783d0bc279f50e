//! Whole-integrator physics checks: precession period, nutation frequency and
//! conservation drift, measured from simulated trajectories.

use crate::dynamics::{
    angular_momentum, azimuth, gravity_torque, kinetic_energy, nutation_frequency, polar_angle,
    precession_rate, step_with, wheel_inertia, DynamicsError, RigidBodyState, WheelParams,
};
use crate::math::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodMeasurement {
    pub measured_s: f64,
    pub predicted_s: f64,
}

impl PeriodMeasurement {
    pub fn relative_error(&self) -> f64 {
        ((self.measured_s - self.predicted_s) / self.predicted_s).abs()
    }
}

/// Releases the wheel at `theta0` with pure spin and times one full turn of the
/// axle azimuth. Compared against `2π / Ω` of the gyroscopic approximation.
pub fn measure_precession_period(
    params: &WheelParams,
    theta0: f64,
    dt: f64,
) -> Result<PeriodMeasurement, DynamicsError> {
    let omega = precession_rate(params)?;
    let predicted_s = std::f64::consts::TAU / omega.abs();
    let inertia = wheel_inertia(params)?;
    let mut state = RigidBodyState::with_axle(theta0, 0.0, params.spin_rate_rad_s);
    let mut prev_az = azimuth(state.orientation);
    let mut unwrapped = 0.0_f64;
    let max_ticks = (3.0 * predicted_s / dt).ceil() as u64;
    while state.tick < max_ticks {
        let prev_t = state.t;
        let prev_unwrapped = unwrapped;
        state = step_with(&state, &inertia, dt, |q, _| gravity_torque(params, q))?;
        let az = azimuth(state.orientation);
        let mut delta = az - prev_az;
        if delta > std::f64::consts::PI {
            delta -= std::f64::consts::TAU;
        } else if delta < -std::f64::consts::PI {
            delta += std::f64::consts::TAU;
        }
        unwrapped += delta;
        prev_az = az;
        if unwrapped.abs() >= std::f64::consts::TAU {
            let frac = (std::f64::consts::TAU - prev_unwrapped.abs()) / (unwrapped.abs() - prev_unwrapped.abs());
            let measured_s = prev_t + frac * (state.t - prev_t);
            return Ok(PeriodMeasurement { measured_s, predicted_s });
        }
    }
    Ok(PeriodMeasurement { measured_s: f64::INFINITY, predicted_s })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyMeasurement {
    pub measured_rad_s: f64,
    pub predicted_rad_s: f64,
}

impl FrequencyMeasurement {
    pub fn relative_error(&self) -> f64 {
        ((self.measured_rad_s - self.predicted_rad_s) / self.predicted_rad_s).abs()
    }
}

/// Dominant angular frequency of `Θ(t)` from mean-crossings of the inclination trace.
///
/// The wheel starts at `theta0` with pure spin plus a small transverse body rate
/// `perturbation_rad_s` about body `x`.
pub fn measure_nutation_frequency(
    params: &WheelParams,
    theta0: f64,
    perturbation_rad_s: f64,
    dt: f64,
    window_s: f64,
) -> Result<FrequencyMeasurement, DynamicsError> {
    let predicted_rad_s = nutation_frequency(params)?;
    let inertia = wheel_inertia(params)?;
    let mut state = RigidBodyState::with_axle(theta0, 0.0, params.spin_rate_rad_s);
    state.omega_body.x = perturbation_rad_s;
    let n = (window_s / dt).round() as usize;
    let mut thetas = Vec::with_capacity(n + 1);
    let mut times = Vec::with_capacity(n + 1);
    thetas.push(polar_angle(state.orientation));
    times.push(state.t);
    for _ in 0..n {
        state = step_with(&state, &inertia, dt, |q, _| gravity_torque(params, q))?;
        thetas.push(polar_angle(state.orientation));
        times.push(state.t);
    }
    let measured_rad_s = mean_crossing_frequency(&times, &thetas).unwrap_or(0.0);
    Ok(FrequencyMeasurement { measured_rad_s, predicted_rad_s })
}

/// Angular frequency from the interpolated crossings of a signal through its mean.
/// `None` when fewer than two crossings occur.
pub fn mean_crossing_frequency(times: &[f64], values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut crossings = Vec::new();
    for i in 1..values.len() {
        let a = values[i - 1] - mean;
        let b = values[i] - mean;
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            let frac = a / (a - b);
            crossings.push(times[i - 1] + frac * (times[i] - times[i - 1]));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    let half_periods = (crossings.len() - 1) as f64;
    Some(std::f64::consts::PI * half_periods / span)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftMeasurement {
    /// Largest relative deviation of `|L_world|` from its initial value.
    pub momentum: f64,
    /// Largest relative deviation of the kinetic energy from its initial value.
    pub energy: f64,
}

/// Torque-free integration from the default orientation with body rate `omega_body`.
pub fn torque_free_drift(
    params: &WheelParams,
    omega_body: Vec3,
    dt: f64,
    steps: usize,
) -> Result<DriftMeasurement, DynamicsError> {
    let inertia = wheel_inertia(params)?;
    let mut state = RigidBodyState::new(crate::dynamics::axle_orientation(0.6, 0.2), omega_body);
    let l0 = angular_momentum(&inertia, state.omega_body, state.orientation).norm();
    let e0 = kinetic_energy(&inertia, state.omega_body);
    let mut out = DriftMeasurement { momentum: 0.0, energy: 0.0 };
    for _ in 0..steps {
        state = step_with(&state, &inertia, dt, |_, _| Vec3::zero())?;
        let l = angular_momentum(&inertia, state.omega_body, state.orientation).norm();
        let e = kinetic_energy(&inertia, state.omega_body);
        out.momentum = out.momentum.max(((l - l0) / l0).abs());
        out.energy = out.energy.max(((e - e0) / e0).abs());
    }
    Ok(out)
}

/// Body rate used for the "generic spin" conservation check: a transverse wobble
/// on top of the configured spin, so every Euler-equation coupling term is live.
pub fn generic_body_rate(spin_rate_rad_s: f64) -> Vec3 {
    Vec3::new(1.3, -0.7, spin_rate_rad_s + 2.0)
}
