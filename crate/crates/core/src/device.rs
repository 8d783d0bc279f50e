//! Virtual haptic devices: pose sources, the mirrored two-device coupling that
//! makes a pair of end-effectors act as the two ends of one rigid axle, the
//! spherical motion constraint and workspace calibration.
//!
//! A physical device driver would be another [`PoseSource`] variant plus a force
//! sink; only virtual sources exist here.

use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::Vec3;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeviceError {
    #[error("cannot project the origin onto the constraint sphere")]
    DegenerateProjection,
    #[error("handle positions coincide; axle direction undefined")]
    DegenerateAxle,
    #[error("calibration extent has zero volume")]
    DegenerateCalibration,
    #[error("invalid pose source: {0}")]
    InvalidSource(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DevicePose<T: Real = f64> {
    pub position: Vec3<T>,
    pub velocity: Vec3<T>,
    pub tick: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Relation between device A and device B coordinates.
///
/// The two devices hold opposite ends of one virtual axle and face each other
/// across the pivot. A B reading with the mirrored axes negated and reflected
/// through the pivot is a point in A's frame, so a rigid axle reads
/// `b == couple(a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct CouplingMap<T: Real = f64> {
    pub mirrored_axes: Vec<Axis>,
    /// Radius of the constraint sphere both handles move on, workspace metres.
    pub radius_m: T,
    /// Stiffness of the spring pulling the pair back into mirror alignment, N/m.
    #[serde(default = "default_coupling_stiffness")]
    pub stiffness_n_m: T,
}

fn default_coupling_stiffness<T: Real>() -> T {
    T::lit(200.0)
}

impl<T: Real> Default for CouplingMap<T> {
    fn default() -> Self {
        Self {
            mirrored_axes: vec![Axis::Y],
            radius_m: T::lit(0.0508),
            stiffness_n_m: default_coupling_stiffness(),
        }
    }
}

impl<T: Real> CouplingMap<T> {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.radius_m.is_finite() && self.radius_m > T::zero()) {
            out.push(format!("coupling.radius_m must be positive (got {:?})", self.radius_m));
        }
        if !(self.stiffness_n_m.is_finite() && self.stiffness_n_m >= T::zero()) {
            out.push(format!("coupling.stiffness_n_m must be >= 0 (got {:?})", self.stiffness_n_m));
        }
        out
    }

    /// Per-axis sign: −1 on mirrored axes, +1 elsewhere.
    pub fn signs(&self) -> Vec3<T> {
        let s = |a: Axis| if self.mirrored_axes.contains(&a) { -T::one() } else { T::one() };
        Vec3::new(s(Axis::X), s(Axis::Y), s(Axis::Z))
    }

    /// Negate the mirrored axes. An involution.
    pub fn mirror(&self, v: Vec3<T>) -> Vec3<T> {
        v.hadamard(self.signs())
    }

    /// Carry a position or force between the two device frames, `−mirror(v)`.
    /// An involution.
    pub fn to_partner(&self, v: Vec3<T>) -> Vec3<T> {
        -self.mirror(v)
    }
}

/// `raw · radius / |raw|`
pub fn project_spherical<T: Real>(raw: Vec3<T>, radius: T) -> Result<Vec3<T>, DeviceError> {
    let n = raw.norm();
    if !(n > T::zero() && n.is_finite()) {
        return Err(DeviceError::DegenerateProjection);
    }
    if n == radius {
        return Ok(raw);
    }
    Ok(raw * (radius / n))
}

/// Negate the mirrored axes of both position and velocity.
pub fn couple<T: Real>(pose: &DevicePose<T>, map: &CouplingMap<T>) -> DevicePose<T> {
    DevicePose { position: map.mirror(pose.position), velocity: map.mirror(pose.velocity), tick: pose.tick }
}

/// Pose of the B handle expressed in A's frame.
pub fn partner_in_a<T: Real>(b: &DevicePose<T>, map: &CouplingMap<T>) -> DevicePose<T> {
    DevicePose { position: map.to_partner(b.position), velocity: map.to_partner(b.velocity), tick: b.tick }
}

/// Unit vector from the B end to the A end of the virtual axle (both in A's frame).
pub fn axle_from_handles<T: Real>(a: &DevicePose<T>, b_in_a: &DevicePose<T>) -> Result<Vec3<T>, DeviceError> {
    (a.position - b_in_a.position).normalized().ok_or(DeviceError::DegenerateAxle)
}

/// Restoring forces (device frames) that pull the pair back into mirror alignment.
///
/// With `e = a − mirror(b)`, each end is pulled toward the midpoint between
/// itself and its partner's mirror image, the stiffness split equally between the
/// two ends: `F_a = −k e / 4`, `F_b = −mirror(F_a)`. Expressed in A's frame the
/// two forces are identical, so the pair rotates the axle back into line.
pub fn coupling_correction<T: Real>(
    a: &DevicePose<T>,
    b: &DevicePose<T>,
    map: &CouplingMap<T>,
) -> (Vec3<T>, Vec3<T>) {
    let discrepancy = a.position - map.mirror(b.position);
    let half = T::lit(0.5);
    let force_a = -(discrepancy * half) * (map.stiffness_n_m * half);
    let force_b = -map.mirror(force_a);
    (force_a, force_b)
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct Aabb<T: Real = f64> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn centered_cube(side: T) -> Self {
        let h = side * T::lit(0.5);
        Self { min: Vec3::new(-h, -h, -h), max: Vec3::new(h, h, h) }
    }
}

/// Per-axis affine map `p ↦ scale ∘ p + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct AffineMap<T: Real = f64> {
    pub scale: Vec3<T>,
    pub offset: Vec3<T>,
}

impl<T: Real> AffineMap<T> {
    pub fn identity() -> Self {
        Self { scale: Vec3::new(T::one(), T::one(), T::one()), offset: Vec3::zero() }
    }

    pub fn apply(&self, p: Vec3<T>) -> Vec3<T> {
        p.hadamard(self.scale) + self.offset
    }

    /// Velocities and other displacements ignore the offset.
    pub fn apply_linear(&self, v: Vec3<T>) -> Vec3<T> {
        v.hadamard(self.scale)
    }

    pub fn inverse(&self) -> Self {
        let s = self.scale;
        let inv = Vec3::new(T::one() / s.x, T::one() / s.y, T::one() / s.z);
        Self { scale: inv, offset: -self.offset.hadamard(inv) }
    }
}

/// Affine map taking the raw device extent onto `target` (normally the centred
/// workspace cube).
pub fn calibrate<T: Real>(raw: &Aabb<T>, target: &Aabb<T>) -> Result<AffineMap<T>, DeviceError> {
    let span = raw.max - raw.min;
    if !(span.is_finite() && span.x > T::zero() && span.y > T::zero() && span.z > T::zero()) {
        return Err(DeviceError::DegenerateCalibration);
    }
    let target_span = target.max - target.min;
    let scale = Vec3::new(target_span.x / span.x, target_span.y / span.y, target_span.z / span.z);
    let offset = target.min - raw.min.hadamard(scale);
    Ok(AffineMap { scale, offset })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Straight segments between samples; the device is always held.
    #[default]
    Linear,
    /// Each sample holds until the next; the device counts as held only within
    /// the session's hold window after a sample. This is how live pointer input
    /// is recorded for replay.
    Hold,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptSample {
    pub tick: u64,
    pub position: Vec3,
}

/// Pre-recorded end-effector trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScriptRepr", into = "ScriptRepr")]
pub struct Script {
    samples: Vec<ScriptSample>,
    interpolation: Interpolation,
}

#[derive(Serialize, Deserialize)]
struct ScriptRepr {
    samples: Vec<ScriptSample>,
    #[serde(default)]
    interpolation: Interpolation,
}

impl TryFrom<ScriptRepr> for Script {
    type Error = DeviceError;
    fn try_from(r: ScriptRepr) -> Result<Self, DeviceError> {
        Script::new(r.samples, r.interpolation)
    }
}

impl From<Script> for ScriptRepr {
    fn from(s: Script) -> Self {
        ScriptRepr { samples: s.samples, interpolation: s.interpolation }
    }
}

impl Script {
    pub fn new(samples: Vec<ScriptSample>, interpolation: Interpolation) -> Result<Self, DeviceError> {
        if samples.is_empty() {
            return Err(DeviceError::InvalidSource("scripted trajectory is empty".into()));
        }
        if samples.windows(2).any(|w| w[1].tick <= w[0].tick) {
            return Err(DeviceError::InvalidSource("scripted ticks must be strictly increasing".into()));
        }
        if samples.iter().any(|s| !s.position.is_finite()) {
            return Err(DeviceError::InvalidSource("scripted positions must be finite".into()));
        }
        Ok(Self { samples, interpolation })
    }

    pub fn samples(&self) -> &[ScriptSample] {
        &self.samples
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Position at `tick` with end-clamping, and the tick of the governing sample.
    pub fn position_at(&self, tick: u64) -> (Vec3, Option<u64>) {
        let s = &self.samples;
        let idx = s.partition_point(|x| x.tick <= tick);
        if idx == 0 {
            return match self.interpolation {
                Interpolation::Linear => (s[0].position, Some(s[0].tick)),
                Interpolation::Hold => (s[0].position, None),
            };
        }
        let prev = s[idx - 1];
        if idx == s.len() || self.interpolation == Interpolation::Hold {
            return (prev.position, Some(prev.tick));
        }
        let next = s[idx];
        let frac = (tick - prev.tick) as f64 / (next.tick - prev.tick) as f64;
        (prev.position + (next.position - prev.position) * frac, Some(prev.tick))
    }
}

/// Last-value-wins mailbox for live pointer positions.
///
/// Writers replace the whole value under a lock, so readers never see a torn pose.
#[derive(Debug, Default)]
pub struct PoseSlot {
    inner: Mutex<Option<(Vec3, u64)>>,
}

impl PoseSlot {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn store(&self, position: Vec3) {
        let mut guard = self.inner.lock().unwrap_or_else(|p| p.into_inner());
        let seq = guard.map_or(1, |(_, s)| s + 1);
        *guard = Some((position, seq));
    }

    /// Latest position and its update sequence number.
    pub fn load(&self) -> Option<(Vec3, u64)> {
        *self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }
}

/// Where an end-effector's position comes from.
#[derive(Clone, Debug)]
pub enum PoseSource {
    Scripted(Script),
    Interactive(InteractiveSource),
}

#[derive(Clone, Debug)]
pub struct InteractiveSource {
    slot: Arc<PoseSlot>,
    last_seq: u64,
    last_update_tick: Option<u64>,
}

impl InteractiveSource {
    pub fn new(slot: Arc<PoseSlot>) -> Self {
        Self { slot, last_seq: 0, last_update_tick: None }
    }

    pub fn slot(&self) -> &Arc<PoseSlot> {
        &self.slot
    }
}

/// Position sample from a source at one tick.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reading {
    pub position: Option<Vec3>,
    /// Tick of the input that governs this reading; `None` before any input.
    pub input_tick: Option<u64>,
    /// True when a new live value arrived at this tick.
    pub fresh_update: bool,
}

impl PoseSource {
    /// Raw position reading at `tick`. Velocity is reconstructed by the caller
    /// (see [`poll`]) from consecutive readings.
    pub fn read(&mut self, tick: u64) -> Reading {
        match self {
            PoseSource::Scripted(s) => {
                let (p, input_tick) = s.position_at(tick);
                let position = match (s.interpolation(), input_tick) {
                    (Interpolation::Hold, None) => None,
                    _ => Some(p),
                };
                Reading { position, input_tick, fresh_update: false }
            }
            PoseSource::Interactive(src) => match src.slot.load() {
                None => Reading { position: None, input_tick: None, fresh_update: false },
                Some((p, seq)) => {
                    let fresh_update = seq != src.last_seq;
                    if fresh_update {
                        src.last_seq = seq;
                        src.last_update_tick = Some(tick);
                    }
                    Reading { position: Some(p), input_tick: src.last_update_tick, fresh_update }
                }
            },
        }
    }

    /// Whether the device counts as held at `tick`, given the reading for that tick.
    pub fn held(&self, reading: &Reading, tick: u64, hold_window_ticks: u64) -> bool {
        let within = |t: Option<u64>| t.is_some_and(|t| tick.saturating_sub(t) <= hold_window_ticks);
        match self {
            PoseSource::Scripted(s) => match s.interpolation() {
                Interpolation::Linear => true,
                Interpolation::Hold => within(reading.input_tick),
            },
            PoseSource::Interactive(_) => within(reading.input_tick),
        }
    }
}

/// Pose of a scripted source at `tick`: interpolated position, finite-difference
/// velocity over one step `dt`.
pub fn poll(source: &Script, tick: u64, dt: f64) -> DevicePose {
    let (p, _) = source.position_at(tick);
    let velocity = if tick == 0 { Vec3::zero() } else { (p - source.position_at(tick - 1).0) / dt };
    DevicePose { position: p, velocity, tick }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose(p: Vec3) -> DevicePose {
        DevicePose { position: p, velocity: Vec3::zero(), tick: 0 }
    }

    #[test]
    fn project_spherical_examples() {
        let p = project_spherical(Vec3::new(0.2, 0.0, 0.0), 0.1).unwrap();
        assert_eq!(p, Vec3::new(0.1, 0.0, 0.0));
        let on = Vec3::new(0.06, 0.08, 0.0);
        assert_eq!(project_spherical(on, 0.1).unwrap(), on);
        assert_eq!(project_spherical(Vec3::<f64>::zero(), 0.1), Err(DeviceError::DegenerateProjection));
    }

    #[test]
    fn couple_examples() {
        let map = CouplingMap::default();
        let p = DevicePose { position: Vec3::new(0.01, 0.03, -0.02), velocity: Vec3::new(0.0, 1.0, 0.0), tick: 7 };
        let c = couple(&p, &map);
        assert_eq!(c.position, Vec3::new(0.01, -0.03, -0.02));
        assert_eq!(c.velocity, Vec3::new(0.0, -1.0, 0.0));
        assert_eq!(couple(&pose(Vec3::zero()), &map).position.y, 0.0);
        assert_eq!(couple(&c, &map), p);
    }

    #[test]
    fn axle_from_handles_examples() {
        let a = axle_from_handles(&pose(Vec3::new(0.1, 0.0, 0.0)), &pose(Vec3::new(-0.1, 0.0, 0.0))).unwrap();
        assert_eq!(a, Vec3::unit_x());
        let same = pose(Vec3::new(0.1, 0.1, 0.0));
        assert_eq!(axle_from_handles(&same, &same), Err(DeviceError::DegenerateAxle));
        let d = axle_from_handles(&same, &pose(Vec3::new(-0.1, -0.1, 0.0))).unwrap();
        assert!((d - Vec3::new(0.707_106_781_186_547_5, 0.707_106_781_186_547_5, 0.0)).max_abs() < 1e-15);
    }

    #[test]
    fn coupling_correction_examples() {
        let map = CouplingMap { stiffness_n_m: 200.0, ..CouplingMap::default() };
        let a = pose(Vec3::new(0.04, 0.03, 0.01));
        let b = couple(&a, &map);
        assert_eq!(coupling_correction(&a, &b, &map), (Vec3::zero(), Vec3::zero()));

        // A.y = +0.03, B.y = −0.02: discrepancy 0.01, each end gets 200 · 0.005 · ½ = 0.5 N
        let a = pose(Vec3::new(0.0, 0.03, 0.0));
        let b = pose(Vec3::new(0.0, -0.02, 0.0));
        let (fa, fb) = coupling_correction(&a, &b, &map);
        assert!((fa - Vec3::new(0.0, -0.5, 0.0)).max_abs() < 1e-15);
        assert!((fb - Vec3::new(0.0, -0.5, 0.0)).max_abs() < 1e-15);
        assert_eq!(fa, -map.mirror(fb));
        assert_eq!(map.to_partner(fb), fa);
    }

    #[test]
    fn rigid_axle_ends_are_antipodal_in_a_frame() {
        let map = CouplingMap::default();
        let a = pose(Vec3::new(0.03, 0.02, -0.01));
        let b = couple(&a, &map);
        assert_eq!(partner_in_a(&b, &map).position, -a.position);
        let axle = axle_from_handles(&a, &partner_in_a(&b, &map)).unwrap();
        assert!((axle - a.position.normalized().unwrap()).max_abs() < 1e-15);
    }

    #[test]
    fn calibrate_examples() {
        let target = Aabb::centered_cube(0.1016);
        let id = calibrate(&target, &target).unwrap();
        assert_eq!(id.scale, Vec3::new(1.0, 1.0, 1.0));
        assert_eq!(id.offset, Vec3::zero());

        let unit = Aabb { min: Vec3::zero(), max: Vec3::new(1.0, 1.0, 1.0) };
        let m = calibrate(&unit, &target).unwrap();
        assert!((m.scale - Vec3::new(0.1016, 0.1016, 0.1016)).max_abs() < 1e-15);
        assert!((m.offset - Vec3::new(-0.0508, -0.0508, -0.0508)).max_abs() < 1e-15);
        assert!((m.apply(unit.min) - target.min).max_abs() < 1e-15);
        assert!((m.apply(unit.max) - target.max).max_abs() < 1e-15);

        let flat = Aabb { min: Vec3::zero(), max: Vec3::new(1.0, 0.0, 1.0) };
        assert_eq!(calibrate(&flat, &target), Err(DeviceError::DegenerateCalibration));
    }

    fn two_point(interp: Interpolation) -> Script {
        Script::new(
            vec![
                ScriptSample { tick: 0, position: Vec3::new(0.0, 0.0, 0.0) },
                ScriptSample { tick: 1000, position: Vec3::new(0.02, -0.04, 0.01) },
            ],
            interp,
        )
        .unwrap()
    }

    #[test]
    fn poll_examples() {
        let s = two_point(Interpolation::Linear);
        let mid = poll(&s, 500, 1e-3);
        assert!((mid.position - Vec3::new(0.01, -0.02, 0.005)).max_abs() < 1e-15);
        assert!((mid.velocity - Vec3::new(0.02, -0.04, 0.01)).max_abs() < 1e-9);

        let after = poll(&s, 5000, 1e-3);
        assert_eq!(after.position, Vec3::new(0.02, -0.04, 0.01));
        assert_eq!(after.velocity, Vec3::zero());

        let constant = Script::new(
            vec![
                ScriptSample { tick: 0, position: Vec3::new(0.01, 0.0, 0.0) },
                ScriptSample { tick: 10, position: Vec3::new(0.01, 0.0, 0.0) },
            ],
            Interpolation::Linear,
        )
        .unwrap();
        assert!((0..20).all(|t| poll(&constant, t, 1e-3).velocity == Vec3::zero()));
    }

    #[test]
    fn empty_or_unordered_scripts_are_rejected() {
        assert!(matches!(Script::new(vec![], Interpolation::Linear), Err(DeviceError::InvalidSource(_))));
        let dup = vec![
            ScriptSample { tick: 3, position: Vec3::zero() },
            ScriptSample { tick: 3, position: Vec3::zero() },
        ];
        assert!(Script::new(dup, Interpolation::Linear).is_err());
        assert!(serde_json::from_str::<Script>(r#"{"samples":[]}"#).is_err());
    }

    #[test]
    fn hold_scripts_are_held_only_inside_the_window() {
        let s = two_point(Interpolation::Hold);
        let mut src = PoseSource::Scripted(s);
        let r = src.read(10);
        assert_eq!(r.position, Some(Vec3::zero()));
        assert!(src.held(&r, 10, 50));
        let r = src.read(200);
        assert!(!src.held(&r, 200, 50));
        let r = src.read(1000);
        assert_eq!(r.position, Some(Vec3::new(0.02, -0.04, 0.01)));
        assert!(src.held(&r, 1000, 50));
    }

    #[test]
    fn interactive_slot_is_last_value_wins() {
        let slot = PoseSlot::new();
        let mut src = PoseSource::Interactive(InteractiveSource::new(slot.clone()));
        assert_eq!(src.read(0).position, None);
        slot.store(Vec3::new(0.01, 0.0, 0.0));
        slot.store(Vec3::new(0.02, 0.0, 0.0));
        let r = src.read(5);
        assert_eq!(r.position, Some(Vec3::new(0.02, 0.0, 0.0)));
        assert!(r.fresh_update);
        assert_eq!(r.input_tick, Some(5));
        let r = src.read(6);
        assert!(!r.fresh_update);
        assert_eq!(r.input_tick, Some(5));
        assert!(src.held(&r, 6, 10));
        let r = src.read(100);
        assert!(!src.held(&r, 100, 10));
    }
}
