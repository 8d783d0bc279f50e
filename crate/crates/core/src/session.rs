//! The fixed-rate simulation loop: owns the wheel, its state and both devices,
//! applies parameter changes at tick boundaries and emits decimated snapshots.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::device::{
    calibrate, Aabb, AffineMap, CouplingMap, InteractiveSource, Interpolation, PoseSlot, PoseSource,
    Reading, Script, ScriptSample,
};
use crate::dynamics::{
    angular_momentum, gravity_torque, polar_angle, wheel_inertia, DynamicsError, RigidBodyState, WheelParams,
};
use crate::haptics::{servo_tick, DeviceCaps, ForceEffect, HapticFrame, ServoSettings, Stabilizer, Steering};
use crate::math::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("numerical blow-up at tick {tick}; session halted")]
    Blowup { tick: u64 },
    #[error("session halted at tick {tick}")]
    Halted { tick: u64 },
}

/// Where one device's end-effector position comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Scripted(Script),
    /// Live pointer input delivered through a [`PoseSlot`].
    Interactive,
    /// The opposite end of the rigid axle held through the peer device.
    Mirror,
    /// Nobody holds this end.
    Released,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceSetup {
    pub a: SourceSpec,
    pub b: SourceSpec,
    /// Raw extent of the source coordinates; mapped onto the workspace cube when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_extent: Option<Aabb>,
}

/// Parameter change applied before the given tick is computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduledParams {
    pub tick: u64,
    pub params: WheelParams,
}

fn default_hold_window() -> u64 {
    250
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub wheel: WheelParams,
    pub caps: DeviceCaps,
    pub coupling: CouplingMap,
    #[serde(default)]
    pub effects: Vec<ForceEffect>,
    pub feel_gain: f64,
    /// Servo period, seconds; must equal `1 / caps.servo_rate_hz`.
    pub dt: f64,
    pub snapshot_decimation: u64,
    pub initial_theta_rad: f64,
    #[serde(default)]
    pub initial_azimuth_rad: f64,
    pub stabilizer: Stabilizer,
    pub steering: Steering,
    /// Ticks a live input keeps its device held after the last update.
    #[serde(default = "default_hold_window")]
    pub hold_window_ticks: u64,
    pub devices: DeviceSetup,
    #[serde(default)]
    pub schedule: Vec<ScheduledParams>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let coupling = CouplingMap::default();
        let devices = DeviceSetup {
            a: SourceSpec::Scripted(demo_sweep(coupling.radius_m, 10.0, 1e-3)),
            b: SourceSpec::Mirror,
            raw_extent: None,
        };
        Self {
            wheel: WheelParams::default(),
            caps: DeviceCaps::default(),
            coupling,
            effects: Vec::new(),
            feel_gain: 1.0,
            dt: 1e-3,
            snapshot_decimation: 16,
            initial_theta_rad: FRAC_PI_2,
            initial_azimuth_rad: 0.0,
            stabilizer: Stabilizer::default(),
            steering: Steering::default(),
            hold_window_ticks: default_hold_window(),
            devices,
            schedule: Vec::new(),
        }
    }
}

/// Handle-A trajectory of the bundled demo: the axle starts horizontal along
/// `+x`, swings ±0.6 rad in azimuth every 4 s and nods ±0.2 rad every 5 s.
/// Sampled every 100 ticks on the constraint sphere.
pub fn demo_sweep(radius_m: f64, duration_s: f64, dt: f64) -> Script {
    let every = 100u64;
    let last = (duration_s / dt).round() as u64;
    let samples = (0..=last / every)
        .map(|k| {
            let tick = k * every;
            let t = tick as f64 * dt;
            let azimuth = 0.6 * (TAU * t / 4.0).sin();
            let elevation = 0.2 * (TAU * t / 5.0).sin();
            let position = Vec3::new(
                azimuth.cos() * elevation.cos(),
                azimuth.sin() * elevation.cos(),
                elevation.sin(),
            ) * radius_m;
            ScriptSample { tick, position }
        })
        .collect();
    Script::new(samples, Interpolation::Linear).expect("demo sweep ticks are increasing")
}

impl SessionConfig {
    pub fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = self.wheel.problems().into_iter().map(|p| format!("wheel.{p}")).collect();
        out.extend(self.caps.problems());
        out.extend(self.coupling.problems());
        for (i, e) in self.effects.iter().enumerate() {
            if let Err(err) = e.validate() {
                out.push(format!("effects[{i}]: {err}"));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            out.push(format!("dt must be positive (got {})", self.dt));
        } else if (self.dt * self.caps.servo_rate_hz - 1.0).abs() > 1e-9 {
            out.push(format!(
                "dt ({}) must equal 1 / caps.servo_rate_hz ({})",
                self.dt, self.caps.servo_rate_hz
            ));
        }
        if self.snapshot_decimation < 1 {
            out.push("snapshot_decimation must be >= 1".into());
        }
        if !(self.feel_gain.is_finite() && self.feel_gain >= 0.0) {
            out.push(format!("feel_gain must be >= 0 (got {})", self.feel_gain));
        }
        if !(self.initial_theta_rad.is_finite() && (0.0..=PI).contains(&self.initial_theta_rad)) {
            out.push(format!("initial_theta_rad must be in [0, pi] (got {})", self.initial_theta_rad));
        }
        if !self.initial_azimuth_rad.is_finite() {
            out.push("initial_azimuth_rad must be finite".into());
        }
        for (name, v) in [
            ("stabilizer.stiffness", self.stabilizer.stiffness),
            ("stabilizer.damping", self.stabilizer.damping),
            ("steering.stiffness", self.steering.stiffness),
            ("steering.damping", self.steering.damping),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                out.push(format!("{name} must be >= 0 (got {v})"));
            }
        }
        if self.devices.a == SourceSpec::Mirror && self.devices.b == SourceSpec::Mirror {
            out.push("devices: a and b cannot both mirror each other".into());
        }
        if let Some(extent) = &self.devices.raw_extent {
            if calibrate(extent, &Aabb::centered_cube(self.caps.workspace_side_m)).is_err() {
                out.push("devices.raw_extent has zero volume".into());
            }
        }
        for (i, s) in self.schedule.iter().enumerate() {
            for p in s.params.problems() {
                out.push(format!("schedule[{i}].params.{p}"));
            }
        }
        if self.schedule.windows(2).any(|w| w[1].tick < w[0].tick) {
            out.push("schedule must be sorted by tick".into());
        }
        out
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SessionError::InvalidConfig(problems))
        }
    }

    /// SHA-256 of the canonical JSON serialization, lowercase hex.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn servo_settings(&self) -> ServoSettings {
        ServoSettings {
            caps: self.caps,
            coupling: self.coupling.clone(),
            effects: self.effects.clone(),
            feel_gain: self.feel_gain,
            stabilizer: self.stabilizer,
            steering: self.steering,
        }
    }
}

/// State of the simulation as seen by renderers, the socket stream and trace files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub t: f64,
    /// Unit world-frame axle direction.
    pub axle: Vec3,
    /// Inclination of the axle from vertical, rad.
    pub theta: f64,
    /// Cosmetic wheel rotation angle in `[0, 2π)`; renderers draw the spokes at
    /// `(cos, sin)` of it.
    pub wheel_phase: f64,
    pub l_world: Vec3,
    /// Gravity torque about the pivot.
    pub tau_world: Vec3,
    pub force_a: Vec3,
    pub force_b: Vec3,
    /// Spin rate about the axle, rad/s.
    pub omega: f64,
    pub pos_a: Vec3,
    pub pos_b: Vec3,
}

/// Servo-tick output retained alongside each snapshot for verification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TickForces {
    pub raw_force_a: Vec3,
    pub raw_force_b: Vec3,
    pub force_a: Vec3,
    pub force_b: Vec3,
}

struct Device {
    source: Option<PoseSource>,
    mirror: bool,
    prev_position: Vec3,
    /// Fresh live inputs seen so far, for replay.
    input_log: Vec<ScriptSample>,
    interactive: bool,
}

pub struct Session {
    config: SessionConfig,
    params: WheelParams,
    settings: ServoSettings,
    state: RigidBodyState,
    wheel_phase: f64,
    staged: Option<WheelParams>,
    applied_changes: Vec<ScheduledParams>,
    schedule_cursor: usize,
    devices: [Device; 2],
    slots: [Arc<PoseSlot>; 2],
    calibration: AffineMap,
    last: Snapshot,
    last_forces: TickForces,
    halted: Option<u64>,
}

/// Identifies one of the two devices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeviceId {
    A,
    B,
}

impl DeviceId {
    fn index(self) -> usize {
        match self {
            DeviceId::A => 0,
            DeviceId::B => 1,
        }
    }
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self, SessionError> {
        config.validate()?;
        let params = config.wheel;
        let state = RigidBodyState::with_axle(config.initial_theta_rad, config.initial_azimuth_rad, params.spin_rate_rad_s);
        let calibration = match &config.devices.raw_extent {
            Some(extent) => calibrate(extent, &Aabb::centered_cube(config.caps.workspace_side_m))
                .map_err(|e| SessionError::InvalidConfig(vec![e.to_string()]))?,
            None => AffineMap::identity(),
        };
        let slots = [PoseSlot::new(), PoseSlot::new()];
        let make = |spec: &SourceSpec, slot: &Arc<PoseSlot>| Device {
            source: match spec {
                SourceSpec::Scripted(s) => Some(PoseSource::Scripted(s.clone())),
                SourceSpec::Interactive => Some(PoseSource::Interactive(InteractiveSource::new(slot.clone()))),
                SourceSpec::Mirror | SourceSpec::Released => None,
            },
            mirror: *spec == SourceSpec::Mirror,
            prev_position: Vec3::zero(),
            input_log: Vec::new(),
            interactive: *spec == SourceSpec::Interactive,
        };
        let devices = [make(&config.devices.a, &slots[0]), make(&config.devices.b, &slots[1])];
        let settings = config.servo_settings();
        let mut session = Self {
            params,
            settings,
            state,
            wheel_phase: 0.0,
            staged: None,
            applied_changes: Vec::new(),
            schedule_cursor: 0,
            devices,
            slots,
            calibration,
            last: Snapshot::default_at(state),
            last_forces: TickForces { raw_force_a: Vec3::zero(), raw_force_b: Vec3::zero(), force_a: Vec3::zero(), force_b: Vec3::zero() },
            halted: None,
            config,
        };
        let (poses, _) = session.resolve_positions(0);
        session.devices[0].prev_position = poses[0];
        session.devices[1].prev_position = poses[1];
        session.last = session.snapshot_now(poses, Vec3::zero(), Vec3::zero());
        Ok(session)
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn params(&self) -> &WheelParams {
        &self.params
    }

    pub fn state(&self) -> &RigidBodyState {
        &self.state
    }

    pub fn tick_index(&self) -> u64 {
        self.state.tick
    }

    pub fn is_halted(&self) -> bool {
        self.halted.is_some()
    }

    /// Mailbox for live pointer input to `device`; only read when that device's
    /// source is interactive.
    pub fn pose_slot(&self, device: DeviceId) -> Arc<PoseSlot> {
        self.slots[device.index()].clone()
    }

    /// Snapshot of the most recent tick (or the initial state before any tick).
    pub fn current_snapshot(&self) -> Snapshot {
        self.last
    }

    pub fn last_forces(&self) -> TickForces {
        self.last_forces
    }

    /// Stage new wheel parameters. They take effect atomically before the
    /// returned tick is computed; a later call before then replaces them.
    pub fn set_params(&mut self, new: WheelParams) -> Result<u64, SessionError> {
        let problems = new.problems();
        if !problems.is_empty() {
            return Err(SessionError::InvalidParams(problems));
        }
        self.staged = Some(new);
        Ok(self.state.tick + 1)
    }

    fn apply_params(&mut self, new: WheelParams) {
        // same motion, different wheel: orientation and transverse rates carry over
        if new.spin_rate_rad_s != self.params.spin_rate_rad_s {
            self.state.omega_body.z = new.spin_rate_rad_s;
        }
        self.params = new;
    }

    /// Advance one servo tick. Returns a snapshot every `snapshot_decimation` ticks.
    pub fn tick(&mut self) -> Result<Option<Snapshot>, SessionError> {
        if let Some(tick) = self.halted {
            return Err(SessionError::Halted { tick });
        }
        let n = self.state.tick + 1;
        while let Some(entry) = self.config.schedule.get(self.schedule_cursor) {
            if entry.tick > n {
                break;
            }
            let params = entry.params;
            self.schedule_cursor += 1;
            self.apply_params(params);
        }
        if let Some(staged) = self.staged.take() {
            self.applied_changes.push(ScheduledParams { tick: n, params: staged });
            self.apply_params(staged);
        }

        let dt = self.config.dt;
        let (positions, held) = self.resolve_positions(n);
        let frames: [HapticFrame; 2] = std::array::from_fn(|i| HapticFrame {
            position: positions[i],
            velocity: (positions[i] - self.devices[i].prev_position) / dt,
            tick: n,
            dt,
        });
        let out = match servo_tick(&frames[0], &frames[1], held, &self.state, &self.params, &self.settings) {
            Ok(out) => out,
            Err(DynamicsError::NumericalBlowup { tick }) => {
                self.halted = Some(tick);
                return Err(SessionError::Blowup { tick });
            }
            Err(e) => {
                // params were validated, so this is a numerical failure as well
                self.halted = Some(n);
                let _ = e;
                return Err(SessionError::Blowup { tick: n });
            }
        };
        for (d, p) in self.devices.iter_mut().zip(positions) {
            d.prev_position = p;
        }
        self.state = out.state;
        let mut phase = (self.wheel_phase + self.state.omega_body.z * dt).rem_euclid(TAU);
        if phase >= TAU {
            phase = 0.0;
        }
        self.wheel_phase = phase;
        self.last_forces = TickForces {
            raw_force_a: out.raw_force_a,
            raw_force_b: out.raw_force_b,
            force_a: out.force_a,
            force_b: out.force_b,
        };
        self.last = self.snapshot_now(positions, out.force_a, out.force_b);
        if n.is_multiple_of(self.config.snapshot_decimation) {
            Ok(Some(self.last))
        } else {
            Ok(None)
        }
    }

    /// Run `ticks` ticks, handing every emitted snapshot to `sink`.
    pub fn run<F: FnMut(&Snapshot, &TickForces)>(&mut self, ticks: u64, mut sink: F) -> Result<(), SessionError> {
        for _ in 0..ticks {
            if let Some(s) = self.tick()? {
                sink(&s, &self.last_forces);
            }
        }
        Ok(())
    }

    fn snapshot_now(&self, positions: [Vec3; 2], force_a: Vec3, force_b: Vec3) -> Snapshot {
        let inertia = wheel_inertia(&self.params).expect("validated params");
        let q = self.state.orientation;
        Snapshot {
            tick: self.state.tick,
            t: self.state.t,
            axle: self.state.axle(),
            theta: polar_angle(q),
            wheel_phase: self.wheel_phase,
            l_world: angular_momentum(&inertia, self.state.omega_body, q),
            tau_world: gravity_torque(&self.params, q),
            force_a,
            force_b,
            omega: self.state.omega_body.z,
            pos_a: positions[0],
            pos_b: positions[1],
        }
    }

    /// Workspace positions of both handles at tick `n` and whether anyone holds the axle.
    fn resolve_positions(&mut self, n: u64) -> ([Vec3; 2], bool) {
        let hold = self.config.hold_window_ticks;
        let calibration = self.calibration;
        let mut own: [Option<Vec3>; 2] = [None, None];
        let mut held = [false, false];
        for (i, d) in self.devices.iter_mut().enumerate() {
            if let Some(src) = d.source.as_mut() {
                let reading: Reading = src.read(n);
                if d.interactive && reading.fresh_update {
                    if let Some(p) = reading.position {
                        d.input_log.push(ScriptSample { tick: n, position: p });
                    }
                }
                held[i] = src.held(&reading, n, hold);
                own[i] = reading.position.map(|p| calibration.apply(p));
            }
        }
        let map = &self.config.coupling;
        let mut out = [Vec3::zero(); 2];
        for i in 0..2 {
            let peer = 1 - i;
            let use_peer = (self.devices[i].mirror || !held[i]) && held[peer];
            out[i] = match (held[i], use_peer, own[i], own[peer]) {
                (true, _, Some(p), _) => p,
                (_, true, _, Some(peer_p)) => map.mirror(peer_p),
                _ => Vec3::zero(),
            };
        }
        let any_held = held[0] || held[1];
        if !any_held {
            // handles ride along with the free wheel
            let a = self.state.axle() * map.radius_m;
            out = [a, map.mirror(a)];
        }
        (out, any_held)
    }

    /// Configuration that reproduces this session's run so far from scripts
    /// alone: live inputs become hold-interpolated scripts and applied
    /// parameter changes join the schedule.
    pub fn replay_config(&self) -> SessionConfig {
        let mut cfg = self.config.clone();
        let convert = |spec: &SourceSpec, d: &Device| match spec {
            SourceSpec::Interactive if !d.input_log.is_empty() => {
                SourceSpec::Scripted(Script::new(d.input_log.clone(), Interpolation::Hold).expect("log ticks increase"))
            }
            SourceSpec::Interactive => SourceSpec::Released,
            other => other.clone(),
        };
        cfg.devices.a = convert(&self.config.devices.a, &self.devices[0]);
        cfg.devices.b = convert(&self.config.devices.b, &self.devices[1]);
        let mut schedule = cfg.schedule.clone();
        schedule.extend(self.applied_changes.iter().copied());
        // stable: original entries stay ahead of live changes on the same tick
        schedule.sort_by_key(|s| s.tick);
        cfg.schedule = schedule;
        cfg
    }
}

impl Snapshot {
    fn default_at(state: RigidBodyState) -> Self {
        Snapshot {
            tick: state.tick,
            t: state.t,
            axle: state.axle(),
            theta: polar_angle(state.orientation),
            wheel_phase: 0.0,
            l_world: Vec3::zero(),
            tau_world: Vec3::zero(),
            force_a: Vec3::zero(),
            force_b: Vec3::zero(),
            omega: state.omega_body.z,
            pos_a: Vec3::zero(),
            pos_b: Vec3::zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn released() -> SessionConfig {
        SessionConfig {
            devices: DeviceSetup { a: SourceSpec::Released, b: SourceSpec::Released, raw_extent: None },
            ..SessionConfig::default()
        }
    }

    #[test]
    fn default_config_starts_horizontal() {
        let s = Session::new(SessionConfig::default()).unwrap();
        assert!((s.current_snapshot().theta - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(s.current_snapshot().tick, 0);
        assert_eq!(s.current_snapshot().wheel_phase, 0.0);
    }

    #[test]
    fn invalid_config_lists_offending_fields() {
        let mut cfg = SessionConfig::default();
        cfg.wheel.mass_kg = -1.0;
        cfg.snapshot_decimation = 0;
        match Session::new(cfg) {
            Err(SessionError::InvalidConfig(p)) => {
                assert!(p.iter().any(|m| m.contains("mass_kg")), "{p:?}");
                assert!(p.iter().any(|m| m.contains("snapshot_decimation")), "{p:?}");
            }
            other => panic!("expected config error, got {:?}", other.err()),
        }
    }

    #[test]
    fn dt_must_match_servo_rate() {
        let cfg = SessionConfig { dt: 2e-3, ..SessionConfig::default() };
        assert!(matches!(Session::new(cfg), Err(SessionError::InvalidConfig(_))));
    }

    #[test]
    fn identical_configs_give_identical_first_snapshot() {
        let mut a = Session::new(SessionConfig::default()).unwrap();
        let mut b = Session::new(SessionConfig::default()).unwrap();
        let first = |s: &mut Session| loop {
            if let Some(snap) = s.tick().unwrap() {
                break snap;
            }
        };
        assert_eq!(first(&mut a), first(&mut b));
    }

    #[test]
    fn snapshot_count_follows_decimation() {
        let mut s = Session::new(SessionConfig::default()).unwrap();
        let mut n = 0;
        s.run(1000, |_, _| n += 1).unwrap();
        assert_eq!(n, 62);
    }

    #[test]
    fn wheel_phase_accumulates_spin() {
        let mut cfg = released();
        cfg.wheel.spin_rate_rad_s = 30.0;
        let mut s = Session::new(cfg).unwrap();
        s.run(1000, |_, _| {}).unwrap();
        // 30 rad mod 2π
        assert!((s.current_snapshot().wheel_phase - 4.867_258_771_281_655).abs() < 1e-9);
    }

    #[test]
    fn t_is_tick_times_dt() {
        let mut s = Session::new(released()).unwrap();
        s.run(777, |_, _| {}).unwrap();
        assert_eq!(s.current_snapshot().t, 777.0 * 1e-3);
    }

    #[test]
    fn set_params_takes_effect_next_tick() {
        let mut s = Session::new(released()).unwrap();
        s.run(100, |_, _| {}).unwrap();
        let before = s.current_snapshot();
        let mut doubled = *s.params();
        doubled.mass_kg *= 2.0;
        assert_eq!(s.set_params(doubled).unwrap(), 101);
        s.tick().unwrap();
        let after = s.current_snapshot();
        let expect = |snap: &Snapshot, m: f64| 0.15 * m * 9.81 * snap.theta.sin();
        assert!((before.tau_world.norm() - expect(&before, 1.5)).abs() < 1e-12);
        assert!((after.tau_world.norm() - expect(&after, 3.0)).abs() < 1e-12);
        assert_eq!(after.tick, 101);
    }

    #[test]
    fn invalid_params_are_rejected_and_session_unchanged() {
        let mut s = Session::new(released()).unwrap();
        let bad = WheelParams { mass_kg: -1.0, ..WheelParams::default() };
        assert!(matches!(s.set_params(bad), Err(SessionError::InvalidParams(_))));
        assert_eq!(s.params(), &WheelParams::default());
    }

    #[test]
    fn identical_params_cause_no_discontinuity() {
        let mut a = Session::new(released()).unwrap();
        let mut b = Session::new(released()).unwrap();
        a.run(50, |_, _| {}).unwrap();
        b.run(50, |_, _| {}).unwrap();
        let same = *a.params();
        a.set_params(same).unwrap();
        a.run(50, |_, _| {}).unwrap();
        b.run(50, |_, _| {}).unwrap();
        assert_eq!(a.current_snapshot(), b.current_snapshot());
    }

    #[test]
    fn zero_spin_removes_gyroscopic_reaction() {
        let mut s = Session::new(SessionConfig::default()).unwrap();
        s.run(200, |_, _| {}).unwrap();
        let mut p = *s.params();
        p.spin_rate_rad_s = 0.0;
        s.set_params(p).unwrap();
        s.tick().unwrap();
        assert!(s.current_snapshot().omega.abs() < 1e-12);
        // only transverse momentum remains
        let snap = s.current_snapshot();
        assert!(snap.l_world.dot(snap.axle).abs() < 1e-12);
    }

    #[test]
    fn replay_config_captures_live_inputs() {
        let cfg = SessionConfig {
            devices: DeviceSetup { a: SourceSpec::Interactive, b: SourceSpec::Mirror, raw_extent: None },
            ..SessionConfig::default()
        };
        let mut live = Session::new(cfg).unwrap();
        let slot = live.pose_slot(DeviceId::A);
        let mut stream = Vec::new();
        for k in 0..600u64 {
            if k % 8 == 0 && k < 400 {
                let az = k as f64 * 1e-3;
                slot.store(Vec3::new(az.cos(), az.sin(), 0.0) * 0.0508);
            }
            if k == 300 {
                let mut p = *live.params();
                p.spin_rate_rad_s = 45.0;
                live.set_params(p).unwrap();
            }
            if let Some(s) = live.tick().unwrap() {
                stream.push(s);
            }
        }
        let mut again = Session::new(live.replay_config()).unwrap();
        let mut replayed = Vec::new();
        again.run(600, |s, _| replayed.push(*s)).unwrap();
        assert_eq!(stream, replayed);
    }
}
