//! Force effects rendered at a device end-effector, the gyroscopic reaction
//! force law, force clamping and the servo tick.

mod servo;

pub use servo::{servo_tick, ServoOutput, ServoSettings, Stabilizer, Steering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::DevicePose;
use crate::math::Vec3;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HapticsError {
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Device-side state consumed by the effects for one servo tick.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HapticFrame<T: Real = f64> {
    pub position: Vec3<T>,
    pub velocity: Vec3<T>,
    pub tick: u64,
    pub dt: T,
}

impl<T: Real> HapticFrame<T> {
    pub fn from_pose(pose: &DevicePose<T>, dt: T) -> Self {
        Self { position: pose.position, velocity: pose.velocity, tick: pose.tick, dt }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct SpringEffect<T: Real = f64> {
    pub anchor: Vec3<T>,
    /// N/m
    pub stiffness: T,
    /// N·s/m
    #[serde(default)]
    pub damping: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ViscosityEffect<T: Real = f64> {
    /// N·s/m
    pub coefficient: T,
}

/// Piecewise-linear scalar function given by `(position_m, force_n)` knots.
///
/// Knot abscissae are strictly increasing; outside the knot range the end value
/// is held. Malformed tables are rejected at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[T; 2]>", into = "Vec<[T; 2]>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct PiecewiseLinear<T: Real = f64> {
    knots: Vec<[T; 2]>,
}

impl<T: Real> PiecewiseLinear<T> {
    pub fn new(knots: Vec<[T; 2]>) -> Result<Self, HapticsError> {
        if knots.len() < 2 {
            return Err(HapticsError::InvalidEffect(format!(
                "position function needs at least 2 knots, got {}",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !(k[0].is_finite() && k[1].is_finite())) {
            return Err(HapticsError::InvalidEffect("position function knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(HapticsError::InvalidEffect(
                "position function abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self { knots })
    }

    /// A function that is identically zero.
    pub fn zero() -> Self {
        Self { knots: vec![[-T::one(), T::zero()], [T::one(), T::zero()]] }
    }

    pub fn knots(&self) -> &[[T; 2]] {
        &self.knots
    }

    pub fn eval(&self, x: T) -> T {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if x <= first[0] {
            return first[1];
        }
        if x >= last[0] {
            return last[1];
        }
        // first knot strictly greater than x; guaranteed in 1..len
        let hi = self.knots.partition_point(|k| k[0] <= x);
        let [x0, y0] = self.knots[hi - 1];
        let [x1, y1] = self.knots[hi];
        y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
    }
}

impl<T: Real> TryFrom<Vec<[T; 2]>> for PiecewiseLinear<T> {
    type Error = HapticsError;
    fn try_from(knots: Vec<[T; 2]>) -> Result<Self, Self::Error> {
        Self::new(knots)
    }
}

impl<T: Real> From<PiecewiseLinear<T>> for Vec<[T; 2]> {
    fn from(f: PiecewiseLinear<T>) -> Self {
        f.knots
    }
}

/// Per-axis force as a function of the matching position coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct PositionFunctionEffect<T: Real = f64> {
    pub fx: PiecewiseLinear<T>,
    pub fy: PiecewiseLinear<T>,
    pub fz: PiecewiseLinear<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub enum ForceEffect<T: Real = f64> {
    Spring(SpringEffect<T>),
    Viscosity(ViscosityEffect<T>),
    PositionFunction(PositionFunctionEffect<T>),
}

impl<T: Real> ForceEffect<T> {
    pub fn validate(&self) -> Result<(), HapticsError> {
        let non_negative = |name: &str, v: T| {
            if v.is_finite() && v >= T::zero() {
                Ok(())
            } else {
                Err(HapticsError::InvalidEffect(format!("{name} must be finite and >= 0 (got {v:?})")))
            }
        };
        match self {
            ForceEffect::Spring(s) => {
                non_negative("spring stiffness", s.stiffness)?;
                non_negative("spring damping", s.damping)?;
                if !s.anchor.is_finite() {
                    return Err(HapticsError::InvalidEffect("spring anchor must be finite".into()));
                }
                Ok(())
            }
            ForceEffect::Viscosity(v) => non_negative("viscosity coefficient", v.coefficient),
            // tables are validated when built
            ForceEffect::PositionFunction(_) => Ok(()),
        }
    }

    pub fn eval(&self, frame: &HapticFrame<T>) -> Vec3<T> {
        match self {
            ForceEffect::Spring(s) => eval_spring(s, frame),
            ForceEffect::Viscosity(v) => eval_viscosity(v, frame),
            ForceEffect::PositionFunction(p) => eval_position_function(p, frame),
        }
    }
}

/// `F = k (anchor − p) − d v`
pub fn eval_spring<T: Real>(effect: &SpringEffect<T>, frame: &HapticFrame<T>) -> Vec3<T> {
    (effect.anchor - frame.position) * effect.stiffness - frame.velocity * effect.damping
}

/// `F = −c v`
pub fn eval_viscosity<T: Real>(effect: &ViscosityEffect<T>, frame: &HapticFrame<T>) -> Vec3<T> {
    frame.velocity * (-effect.coefficient)
}

pub fn eval_position_function<T: Real>(effect: &PositionFunctionEffect<T>, frame: &HapticFrame<T>) -> Vec3<T> {
    let p = frame.position;
    Vec3::new(effect.fx.eval(p.x), effect.fy.eval(p.y), effect.fz.eval(p.z))
}

/// Vector sum of every effect evaluated on `frame`; zero for an empty scene.
pub fn compose<T: Real>(effects: &[ForceEffect<T>], frame: &HapticFrame<T>) -> Vec3<T> {
    effects.iter().fold(Vec3::zero(), |acc, e| acc + e.eval(frame))
}

/// Reaction torque the spinning wheel exerts on whatever turns its axle at
/// `axle_rate_world`: `−(Ω × L)`.
pub fn reaction_torque<T: Real>(l_world: Vec3<T>, axle_rate_world: Vec3<T>) -> Vec3<T> {
    -axle_rate_world.cross(l_world)
}

/// Handle force realizing the gyroscopic reaction torque at lever arm `r` along `axle`.
///
/// Returns the force `F` applied at `r·axle` whose moment about the pivot equals
/// the component of `−(Ω × L)` perpendicular to the axle: `F = (τ × â) / r`.
/// The result is perpendicular to the axle, bilinear in `(L, Ω)` and vanishes
/// when either is zero or when they are parallel.
pub fn gyroscopic_resistance<T: Real>(
    l_world: Vec3<T>,
    axle_rate_world: Vec3<T>,
    axle: Vec3<T>,
    handle_length_m: T,
) -> Result<Vec3<T>, HapticsError> {
    if !(handle_length_m.is_finite() && handle_length_m > T::zero()) {
        return Err(HapticsError::InvalidParameter(format!(
            "handle length must be positive (got {handle_length_m:?})"
        )));
    }
    let tau = reaction_torque(l_world, axle_rate_world);
    Ok(tau.cross(axle) / handle_length_m)
}

/// Capability envelope of one haptic device.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct DeviceCaps<T: Real = f64> {
    pub max_force_n: T,
    /// Side of the axis-aligned cubic workspace, centred at the origin.
    pub workspace_side_m: T,
    pub servo_rate_hz: T,
}

impl<T: Real> Default for DeviceCaps<T> {
    /// 2 lbf (≈ 9 N) force, a 4-inch cube workspace and a 1 kHz servo rate.
    fn default() -> Self {
        Self { max_force_n: T::lit(9.0), workspace_side_m: T::lit(0.1016), servo_rate_hz: T::lit(1000.0) }
    }
}

impl<T: Real> DeviceCaps<T> {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("max_force_n", self.max_force_n),
            ("workspace_side_m", self.workspace_side_m),
            ("servo_rate_hz", self.servo_rate_hz),
        ] {
            if !(v.is_finite() && v > T::zero()) {
                out.push(format!("caps.{name} must be positive and finite (got {v:?})"));
            }
        }
        out
    }

    pub fn half_side(&self) -> T {
        self.workspace_side_m * T::lit(0.5)
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        p.max_abs() <= self.half_side()
    }
}

/// Scale `force` down to the device cap if needed, preserving its direction exactly.
///
/// The output never exceeds `max_force_n` in magnitude and the operation is idempotent.
pub fn clamp_force<T: Real>(force: Vec3<T>, caps: &DeviceCaps<T>) -> Vec3<T> {
    let cap = caps.max_force_n;
    let n = force.norm();
    if n <= cap {
        return force;
    }
    let scale = cap / n;
    let out = force * scale;
    if out.norm() <= cap {
        out
    } else {
        // rounding put us a hair over the cap
        force * (scale * (T::one() - T::lit(4.0) * T::epsilon()))
    }
}
