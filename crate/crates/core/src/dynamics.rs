//! Rigid-body dynamics of a symmetric spinning wheel on a pivoted handle.
//!
//! Conventions: world `+z` is up and gravity acts along `-z`; the pivot sits at
//! the world origin; the axle is body `+z`, and the wheel centre is at
//! `handle_length * axle`. A positive spin rate is counter-clockwise when viewed
//! from the `+axle` end, so angular momentum points along `+axle`.
//!
//! The engine integrates the full Euler rigid-body equations with a fixed-step
//! classical RK4 scheme; precession and nutation both emerge from it. The
//! steady gyroscopic approximation is exposed separately as an oracle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::{Quat, Vec3};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precession/nutation undefined for zero spin rate")]
    UndefinedForZeroSpin,
    #[error("numerical blow-up at tick {tick}")]
    NumericalBlowup { tick: u64 },
}

/// Principal moments of inertia about the pivot, body axes. `z` is the spin axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct InertiaTensor<T: Real = f64> {
    pub principal: Vec3<T>,
}

impl<T: Real> InertiaTensor<T> {
    pub fn symmetric(transverse: T, spin: T) -> Self {
        Self { principal: Vec3::new(transverse, transverse, spin) }
    }

    pub fn spin(&self) -> T {
        self.principal.z
    }

    pub fn transverse(&self) -> T {
        self.principal.x
    }

    /// Positive, finite moments satisfying the triangle inequality.
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let p = self.principal;
        if !p.is_finite() || p.x <= T::zero() || p.y <= T::zero() || p.z <= T::zero() {
            return Err(DynamicsError::InvalidParameter(format!(
                "inertia moments must be positive and finite, got {p:?}"
            )));
        }
        // small slack so exact-equality bodies (thin disk: I_s = 2 I_t) pass after rounding
        let slack = T::one() + T::lit(1e-12);
        if p.z > (p.x + p.y) * slack || p.x > (p.y + p.z) * slack || p.y > (p.x + p.z) * slack {
            return Err(DynamicsError::InvalidParameter(format!(
                "inertia moments violate the triangle inequality: {p:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub enum InertiaModel<T: Real = f64> {
    /// Thin rim; bicycle wheels are rim-dominated.
    Hoop,
    /// Uniform solid disk.
    Disk,
    Explicit(InertiaTensor<T>),
}

fn default_gravity<T: Real>() -> T {
    T::lit(9.81)
}

fn default_inertia_model<T: Real>() -> InertiaModel<T> {
    InertiaModel::Hoop
}

/// Physical description of the wheel + handle system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct WheelParams<T: Real = f64> {
    pub mass_kg: T,
    pub wheel_radius_m: T,
    /// Pivot to wheel centre.
    pub handle_length_m: T,
    /// Signed spin about the axle, rad/s.
    pub spin_rate_rad_s: T,
    #[serde(default = "default_inertia_model")]
    pub inertia_model: InertiaModel<T>,
    #[serde(default = "default_gravity")]
    pub gravity_m_s2: T,
}

impl<T: Real> Default for WheelParams<T> {
    /// 23-inch inner-diameter bicycle wheel (radius 0.2921 m), 1.5 kg, 0.15 m handle, 30 rad/s.
    fn default() -> Self {
        Self {
            mass_kg: T::lit(1.5),
            wheel_radius_m: T::lit(0.2921),
            handle_length_m: T::lit(0.15),
            spin_rate_rad_s: T::lit(30.0),
            inertia_model: InertiaModel::Hoop,
            gravity_m_s2: default_gravity(),
        }
    }
}

impl<T: Real> WheelParams<T> {
    /// Every violated constraint, one message per field.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = |name: &str, v: T, out: &mut Vec<String>| {
            if !(v.is_finite() && v > T::zero()) {
                out.push(format!("{name} must be positive and finite (got {v:?})"));
            }
        };
        positive("mass_kg", self.mass_kg, &mut out);
        positive("wheel_radius_m", self.wheel_radius_m, &mut out);
        positive("gravity_m_s2", self.gravity_m_s2, &mut out);
        if !(self.handle_length_m.is_finite() && self.handle_length_m >= T::zero()) {
            out.push(format!(
                "handle_length_m must be finite and non-negative (got {:?})",
                self.handle_length_m
            ));
        }
        if !self.spin_rate_rad_s.is_finite() {
            out.push(format!("spin_rate_rad_s must be finite (got {:?})", self.spin_rate_rad_s));
        }
        if let InertiaModel::Explicit(t) = self.inertia_model {
            if let Err(DynamicsError::InvalidParameter(m)) = t.validate() {
                out.push(format!("inertia_model: {m}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(DynamicsError::InvalidParameter(problems.join("; ")))
        }
    }
}

/// Orientation, body-frame angular velocity and the tick clock of the wheel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct RigidBodyState<T: Real = f64> {
    /// Body to world.
    pub orientation: Quat<T>,
    pub omega_body: Vec3<T>,
    pub tick: u64,
    /// Always `tick * dt`, never accumulated.
    pub t: T,
}

impl<T: Real> RigidBodyState<T> {
    pub fn new(orientation: Quat<T>, omega_body: Vec3<T>) -> Self {
        Self { orientation: orientation.normalized(), omega_body, tick: 0, t: T::zero() }
    }

    /// Axle at polar angle `theta` from `+z` and azimuth `azimuth` from `+x`,
    /// spinning at `spin` about the axle with no transverse rate.
    pub fn with_axle(theta: T, azimuth: T, spin: T) -> Self {
        Self::new(axle_orientation(theta, azimuth), Vec3::new(T::zero(), T::zero(), spin))
    }

    /// World-frame unit axle direction.
    pub fn axle(&self) -> Vec3<T> {
        axle_direction(self.orientation)
    }

    pub fn omega_world(&self) -> Vec3<T> {
        self.orientation.rotate(self.omega_body)
    }
}

/// Orientation whose body `+z` axis points at polar angle `theta`, azimuth `azimuth`.
pub fn axle_orientation<T: Real>(theta: T, azimuth: T) -> Quat<T> {
    Quat::from_axis_angle(Vec3::unit_z(), azimuth) * Quat::from_axis_angle(Vec3::unit_y(), theta)
}

#[inline]
pub fn axle_direction<T: Real>(orientation: Quat<T>) -> Vec3<T> {
    orientation.rotate(Vec3::unit_z())
}

/// Principal moments about the pivot for the configured mass distribution.
///
/// The transverse moments include the parallel-axis term `M r²`.
pub fn wheel_inertia<T: Real>(params: &WheelParams<T>) -> Result<InertiaTensor<T>, DynamicsError> {
    let m = params.mass_kg;
    let rad = params.wheel_radius_m;
    if !(m.is_finite() && m > T::zero()) {
        return Err(DynamicsError::InvalidParameter(format!("mass_kg must be positive (got {m:?})")));
    }
    if !(rad.is_finite() && rad > T::zero()) {
        return Err(DynamicsError::InvalidParameter(format!(
            "wheel_radius_m must be positive (got {rad:?})"
        )));
    }
    let arm = params.handle_length_m;
    let offset = m * arm * arm;
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let tensor = match params.inertia_model {
        InertiaModel::Hoop => InertiaTensor::symmetric(half * m * rad * rad + offset, m * rad * rad),
        InertiaModel::Disk => {
            InertiaTensor::symmetric(quarter * m * rad * rad + offset, half * m * rad * rad)
        }
        InertiaModel::Explicit(t) => {
            t.validate()?;
            t
        }
    };
    Ok(tensor)
}

/// World-frame angular momentum `R(q) (I ω_body)`.
pub fn angular_momentum<T: Real>(
    inertia: &InertiaTensor<T>,
    omega_body: Vec3<T>,
    orientation: Quat<T>,
) -> Vec3<T> {
    orientation.rotate(inertia.principal.hadamard(omega_body))
}

/// Rotational kinetic energy `½ ω·Iω`.
pub fn kinetic_energy<T: Real>(inertia: &InertiaTensor<T>, omega_body: Vec3<T>) -> T {
    T::lit(0.5) * omega_body.dot(inertia.principal.hadamard(omega_body))
}

/// Gravitational potential of the wheel centre relative to the pivot height.
pub fn potential_energy<T: Real>(params: &WheelParams<T>, orientation: Quat<T>) -> T {
    params.mass_kg * params.gravity_m_s2 * params.handle_length_m * axle_direction(orientation).z
}

/// Gravity torque about the pivot, world frame: `(r â) × (−M g ẑ)`.
///
/// Its magnitude is `r M g sin Θ`; it is horizontal and perpendicular to the axle.
pub fn gravity_torque<T: Real>(params: &WheelParams<T>, orientation: Quat<T>) -> Vec3<T> {
    let lever = axle_direction(orientation) * params.handle_length_m;
    let weight = Vec3::new(T::zero(), T::zero(), -(params.mass_kg * params.gravity_m_s2));
    lever.cross(weight)
}

/// Steady precession rate of the gyroscopic approximation, `r M g / (I_s ω)`.
///
/// Positive means the axle azimuth increases (counter-clockwise seen from above).
pub fn precession_rate<T: Real>(params: &WheelParams<T>) -> Result<T, DynamicsError> {
    let inertia = wheel_inertia(params)?;
    let spin = params.spin_rate_rad_s;
    if spin == T::zero() {
        return Err(DynamicsError::UndefinedForZeroSpin);
    }
    let torque_scale = params.handle_length_m * params.mass_kg * params.gravity_m_s2;
    Ok(torque_scale / (inertia.spin() * spin))
}

/// Fast-top nutation angular frequency estimate `I_s |ω| / I_t`.
pub fn nutation_frequency<T: Real>(params: &WheelParams<T>) -> Result<T, DynamicsError> {
    let inertia = wheel_inertia(params)?;
    let spin = params.spin_rate_rad_s;
    if spin == T::zero() {
        return Err(DynamicsError::UndefinedForZeroSpin);
    }
    Ok(inertia.spin() * spin.abs() / inertia.transverse())
}

/// Inclination of the axle from `+z`, in `[0, π]`.
pub fn polar_angle<T: Real>(orientation: Quat<T>) -> T {
    let a = axle_direction(orientation);
    (a.x * a.x + a.y * a.y).sqrt().atan2(a.z)
}

/// Azimuth of the axle's horizontal projection measured from `+x` toward `+y`, in `(-π, π]`.
pub fn azimuth<T: Real>(orientation: Quat<T>) -> T {
    let a = axle_direction(orientation);
    a.y.atan2(a.x)
}

#[derive(Clone, Copy)]
struct Derivative<T: Real> {
    q_dot: Quat<T>,
    omega_dot: Vec3<T>,
}

#[inline]
fn derivative<T: Real, F>(inertia: &InertiaTensor<T>, q: Quat<T>, omega: Vec3<T>, torque: &F) -> Derivative<T>
where
    F: Fn(Quat<T>, Vec3<T>) -> Vec3<T>,
{
    let tau_body = q.inverse_rotate(torque(q, omega));
    let moments = inertia.principal;
    let gyro = omega.cross(moments.hadamard(omega));
    let rhs = tau_body - gyro;
    let omega_dot = Vec3::new(rhs.x / moments.x, rhs.y / moments.y, rhs.z / moments.z);
    let half = T::lit(0.5);
    let wq = q * Quat::new(T::zero(), omega.x, omega.y, omega.z);
    let q_dot = Quat::new(wq.w * half, wq.x * half, wq.y * half, wq.z * half);
    Derivative { q_dot, omega_dot }
}

/// One RK4 step of Euler's equations `I ω̇ + ω × Iω = τ_body`, `q̇ = ½ q ⊗ ω`.
///
/// `torque` returns the total external world-frame torque for a trial
/// orientation and body rate; it is evaluated at every stage.
pub fn step_with<T: Real, F>(
    state: &RigidBodyState<T>,
    inertia: &InertiaTensor<T>,
    dt: T,
    torque: F,
) -> Result<RigidBodyState<T>, DynamicsError>
where
    F: Fn(Quat<T>, Vec3<T>) -> Vec3<T>,
{
    let next_tick = state.tick + 1;
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(DynamicsError::InvalidParameter(format!("dt must be positive (got {dt:?})")));
    }
    let half_dt = dt * T::lit(0.5);
    let (q0, w0) = (state.orientation, state.omega_body);

    let k1 = derivative(inertia, q0, w0, &torque);
    let k2 = derivative(inertia, q0.add_scaled(k1.q_dot, half_dt), w0 + k1.omega_dot * half_dt, &torque);
    let k3 = derivative(inertia, q0.add_scaled(k2.q_dot, half_dt), w0 + k2.omega_dot * half_dt, &torque);
    let k4 = derivative(inertia, q0.add_scaled(k3.q_dot, dt), w0 + k3.omega_dot * dt, &torque);

    let two = T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let omega_sum = k1.omega_dot + k2.omega_dot * two + k3.omega_dot * two + k4.omega_dot;
    let omega_body = w0 + omega_sum * sixth;
    let q_sum = Quat::new(
        k1.q_dot.w + two * k2.q_dot.w + two * k3.q_dot.w + k4.q_dot.w,
        k1.q_dot.x + two * k2.q_dot.x + two * k3.q_dot.x + k4.q_dot.x,
        k1.q_dot.y + two * k2.q_dot.y + two * k3.q_dot.y + k4.q_dot.y,
        k1.q_dot.z + two * k2.q_dot.z + two * k3.q_dot.z + k4.q_dot.z,
    );
    let raw = q0.add_scaled(q_sum, sixth);
    let norm = raw.norm();
    if !(raw.is_finite() && omega_body.is_finite() && norm > T::zero() && norm.is_finite()) {
        return Err(DynamicsError::NumericalBlowup { tick: next_tick });
    }
    let t = T::from_u64(next_tick).ok_or(DynamicsError::NumericalBlowup { tick: next_tick })? * dt;
    Ok(RigidBodyState { orientation: raw.normalized(), omega_body, tick: next_tick, t })
}

/// One fixed step under gravity plus a user torque held constant (world frame) over the step.
pub fn step<T: Real>(
    state: &RigidBodyState<T>,
    params: &WheelParams<T>,
    user_torque_world: Vec3<T>,
    dt: T,
) -> Result<RigidBodyState<T>, DynamicsError> {
    let inertia = wheel_inertia(params)?;
    step_with(state, &inertia, dt, |q, _| gravity_torque(params, q) + user_torque_world)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn hoop(m: f64, r_wheel: f64, arm: f64, spin: f64) -> WheelParams {
        WheelParams {
            mass_kg: m,
            wheel_radius_m: r_wheel,
            handle_length_m: arm,
            spin_rate_rad_s: spin,
            inertia_model: InertiaModel::Hoop,
            gravity_m_s2: 9.81,
        }
    }

    #[test]
    fn hoop_inertia_matches_hand_evaluation() {
        // 1.5 * 0.2921^2 = 0.127983615
        let i = wheel_inertia(&hoop(1.5, 0.2921, 0.0, 0.0)).unwrap();
        assert!((i.spin() - 0.127_983_615).abs() < 1e-15);
        assert!((i.spin() - 0.12799).abs() < 1e-5);

        let unit = wheel_inertia(&hoop(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(unit.spin(), 1.0);
        assert_eq!(unit.transverse(), 0.5);
    }

    #[test]
    fn pivot_offset_adds_parallel_axis_term() {
        let i = wheel_inertia(&hoop(1.5, 0.2921, 0.15, 0.0)).unwrap();
        assert!((i.transverse() - 0.097_741_807_5).abs() < 1e-15);
        let mut disk = hoop(2.0, 0.5, 0.1, 0.0);
        disk.inertia_model = InertiaModel::Disk;
        let i = wheel_inertia(&disk).unwrap();
        assert!((i.spin() - 0.25).abs() < 1e-15);
        assert!((i.transverse() - (0.125 + 0.02)).abs() < 1e-15);
    }

    #[test]
    fn explicit_inertia_passes_through() {
        let mut p = hoop(1.0, 1.0, 0.3, 0.0);
        p.inertia_model = InertiaModel::Explicit(InertiaTensor::symmetric(0.2, 0.4));
        let i = wheel_inertia(&p).unwrap();
        assert_eq!(i.principal, Vec3::new(0.2, 0.2, 0.4));
    }

    #[test]
    fn rejects_non_positive_mass_and_radius() {
        assert!(matches!(wheel_inertia(&hoop(0.0, 1.0, 0.0, 0.0)), Err(DynamicsError::InvalidParameter(_))));
        assert!(matches!(wheel_inertia(&hoop(1.0, -1.0, 0.0, 0.0)), Err(DynamicsError::InvalidParameter(_))));
        let mut p = hoop(1.0, 1.0, 0.0, 0.0);
        p.inertia_model = InertiaModel::Explicit(InertiaTensor { principal: Vec3::new(0.1, 0.1, 0.5) });
        assert!(wheel_inertia(&p).is_err());
        assert_eq!(hoop(-1.0, 0.0, -0.1, f64::NAN).problems().len(), 4);
    }

    #[test]
    fn angular_momentum_examples() {
        let i = InertiaTensor::<f64>::symmetric(0.5, 1.0);
        let l = angular_momentum(&i, Vec3::new(0.0, 0.0, 10.0), Quat::identity());
        assert_eq!(l, Vec3::new(0.0, 0.0, 10.0));
        assert_eq!(angular_momentum(&i, Vec3::zero(), Quat::identity()), Vec3::zero());

        let i = InertiaTensor::<f64>::symmetric(0.1, 0.12799);
        let l = angular_momentum(&i, Vec3::new(0.0, 0.0, 30.0), Quat::identity());
        assert!((l.norm() - 3.8397).abs() < 1e-12);
    }

    #[test]
    fn positive_spin_points_momentum_along_axle() {
        let i = InertiaTensor::<f64>::symmetric(0.5, 1.0);
        let q = axle_orientation(0.7, -1.2);
        let l = angular_momentum(&i, Vec3::new(0.0, 0.0, 4.0), q);
        let a = axle_direction(q);
        assert!((l - a * 4.0).max_abs() < 1e-14);
    }

    #[test]
    fn gravity_torque_examples() {
        let p = WheelParams { handle_length_m: 0.2, mass_kg: 2.0, ..hoop(2.0, 0.3, 0.2, 0.0) };
        let tau = gravity_torque(&p, axle_orientation(FRAC_PI_2, 0.0));
        assert!((tau.norm() - 3.924).abs() < 1e-12);
        // axle along +x: torque along +y
        assert!((tau - Vec3::new(0.0, 3.924, 0.0)).max_abs() < 1e-12);
        assert_eq!(gravity_torque(&p, Quat::identity()), Vec3::zero());
        let no_arm = WheelParams { handle_length_m: 0.0, ..p };
        assert_eq!(gravity_torque(&no_arm, axle_orientation(1.0, 0.3)).norm(), 0.0);
    }

    #[test]
    fn precession_rate_examples() {
        let p = WheelParams {
            inertia_model: InertiaModel::Explicit(InertiaTensor::symmetric(0.1, 0.12799)),
            ..hoop(1.5, 0.2921, 0.15, 30.0)
        };
        // 0.15 * 1.5 * 9.81 / (0.12799 * 30)
        assert!((precession_rate(&p).unwrap() - 0.574_849_597_624_814_5).abs() < 1e-12);
        let fast = WheelParams { spin_rate_rad_s: 60.0, ..p };
        assert!((precession_rate(&fast).unwrap() * 2.0 - precession_rate(&p).unwrap()).abs() < 1e-15);
        let still = WheelParams { spin_rate_rad_s: 0.0, ..p };
        assert_eq!(precession_rate(&still), Err(DynamicsError::UndefinedForZeroSpin));
        assert!(precession_rate(&WheelParams { spin_rate_rad_s: -30.0, ..p }).unwrap() < 0.0);
    }

    #[test]
    fn nutation_frequency_examples() {
        let p = WheelParams {
            inertia_model: InertiaModel::Explicit(InertiaTensor::symmetric(0.0978, 0.12799)),
            ..hoop(1.5, 0.2921, 0.15, 60.0)
        };
        // 0.12799 * 60 / 0.0978
        assert!((nutation_frequency(&p).unwrap() - 78.521_472_392_638_03).abs() < 1e-9);
        let equal = WheelParams {
            inertia_model: InertiaModel::Explicit(InertiaTensor::symmetric(0.3, 0.3)),
            spin_rate_rad_s: 10.0,
            ..p
        };
        assert!((nutation_frequency(&equal).unwrap() - 10.0).abs() < 1e-12);
        assert!(nutation_frequency(&WheelParams { spin_rate_rad_s: 0.0, ..p }).is_err());
    }

    #[test]
    fn polar_angle_examples() {
        assert_eq!(polar_angle(Quat::<f64>::identity()), 0.0);
        assert!((polar_angle(axle_orientation(FRAC_PI_2, 0.0)) - FRAC_PI_2).abs() < 1e-15);
        let q = Quat::rotation_between(Vec3::unit_z(), Vec3::new(0.0, 0.3f64.sin(), 0.3f64.cos()));
        assert!((polar_angle(q) - 0.3).abs() < 1e-15);
        assert!((polar_angle(axle_orientation(PI, 0.0)) - PI).abs() < 1e-15);
    }

    #[test]
    fn symmetry_axis_spin_is_a_fixed_point() {
        let i = InertiaTensor::<f64>::symmetric(0.0977, 0.128);
        let mut s = RigidBodyState::with_axle(0.4, 0.2, 25.0);
        let axle0 = s.axle();
        for _ in 0..1000 {
            s = step_with(&s, &i, 1e-3, |_, _| Vec3::zero()).unwrap();
        }
        assert!((s.omega_body - Vec3::new(0.0, 0.0, 25.0)).max_abs() < 1e-12);
        assert!((s.axle() - axle0).max_abs() < 1e-12);
        assert_eq!(s.tick, 1000);
        assert_eq!(s.t, 1000.0 * 1e-3);
    }

    #[test]
    fn step_is_bit_deterministic() {
        let p = hoop(1.5, 0.2921, 0.15, 30.0);
        let s0 = RigidBodyState::new(axle_orientation(1.1, 0.3), Vec3::new(0.4, -0.2, 30.0));
        let a = step(&s0, &p, Vec3::new(0.01, 0.0, 0.0), 1e-3).unwrap();
        let b = step(&s0, &p, Vec3::new(0.01, 0.0, 0.0), 1e-3).unwrap();
        assert_eq!(a.orientation.w.to_bits(), b.orientation.w.to_bits());
        assert_eq!(a.omega_body.x.to_bits(), b.omega_body.x.to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn blowup_is_reported_with_tick() {
        let i = InertiaTensor::<f64>::symmetric(0.1, 0.1);
        let mut s = RigidBodyState::with_axle(0.5, 0.0, 1.0);
        s.tick = 41;
        let err = step_with(&s, &i, 1e-3, |_, _| Vec3::new(f64::INFINITY, 0.0, 0.0)).unwrap_err();
        assert_eq!(err, DynamicsError::NumericalBlowup { tick: 42 });
    }

    #[test]
    fn zero_spin_is_a_legal_pendulum() {
        let p = hoop(1.5, 0.2921, 0.15, 0.0);
        let mut s = RigidBodyState::with_axle(FRAC_PI_2, 0.0, 0.0);
        for _ in 0..200 {
            s = step(&s, &p, Vec3::zero(), 1e-3).unwrap();
        }
        // falls toward -z without precessing
        assert!(s.axle().z < -0.05);
        assert!(s.axle().y.abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let p: WheelParams<f32> = WheelParams::default();
        let tau = gravity_torque(&p, axle_orientation(0.5f32, 0.0));
        let expect = 0.15f32 * 1.5 * 9.81 * 0.5f32.sin();
        assert!((tau.norm() - expect).abs() < 1e-5);
        let s = step(&RigidBodyState::with_axle(0.5f32, 0.0, 30.0), &p, Vec3::zero(), 1e-3).unwrap();
        assert!((s.orientation.norm() - 1.0).abs() < 1e-6);
    }
}
