//! Message generators shared by the protocol and acceptance tests.
#![allow(dead_code)]

use proptest::prelude::*;

use gyrohaptic::dynamics::{InertiaModel, InertiaTensor, WheelParams};
use gyrohaptic::math::Vec3;
use gyrohaptic::session::{DeviceId, SessionConfig, Snapshot};
use gyrohaptic_gateway::config::{preset, PRESET_NAMES};
use gyrohaptic_gateway::protocol::{ClientMessage, ServerMessage};

pub fn float() -> impl Strategy<Value = f64> {
    use proptest::num::f64::{NEGATIVE, NORMAL, POSITIVE, SUBNORMAL, ZERO};
    NORMAL | SUBNORMAL | ZERO | NEGATIVE | POSITIVE
}

pub fn vec3() -> impl Strategy<Value = Vec3> {
    (float(), float(), float()).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn inertia_model() -> impl Strategy<Value = InertiaModel> {
    prop_oneof![
        Just(InertiaModel::Hoop),
        Just(InertiaModel::Disk),
        (float(), float()).prop_map(|(t, s)| InertiaModel::Explicit(InertiaTensor::symmetric(t, s))),
    ]
}

/// Any representable params, valid or not; the wire format does not judge them.
pub fn wheel_params() -> impl Strategy<Value = WheelParams> {
    (float(), float(), float(), float(), inertia_model(), float()).prop_map(|(m, big_r, r, w, model, g)| WheelParams {
        mass_kg: m,
        wheel_radius_m: big_r,
        handle_length_m: r,
        spin_rate_rad_s: w,
        inertia_model: model,
        gravity_m_s2: g,
    })
}

fn device() -> impl Strategy<Value = DeviceId> {
    prop_oneof![Just(DeviceId::A), Just(DeviceId::B)]
}

pub fn client_message() -> impl Strategy<Value = ClientMessage> {
    prop_oneof![
        (any::<u64>(), wheel_params()).prop_map(|(reference, params)| ClientMessage::SetParams { reference, params }),
        (any::<u64>(), device(), vec3(), any::<Option<u64>>()).prop_map(|(reference, device, position, tick_hint)| {
            ClientMessage::Pointer { reference, device, position, tick_hint }
        }),
        any::<u64>().prop_map(|reference| ClientMessage::Start { reference }),
        any::<u64>().prop_map(|reference| ClientMessage::Pause { reference }),
        any::<u64>().prop_map(|reference| ClientMessage::Reset { reference }),
        (any::<u64>(), ".*").prop_map(|(reference, name)| ClientMessage::LoadPreset { reference, name }),
    ]
}

fn snapshot() -> impl Strategy<Value = Snapshot> {
    (
        (any::<u64>(), float(), vec3(), float(), float(), vec3()),
        (vec3(), vec3(), vec3(), float(), vec3(), vec3()),
    )
        .prop_map(|((tick, t, axle, theta, wheel_phase, l_world), (tau_world, force_a, force_b, omega, pos_a, pos_b))| {
            Snapshot { tick, t, axle, theta, wheel_phase, l_world, tau_world, force_a, force_b, omega, pos_a, pos_b }
        })
}

fn config() -> impl Strategy<Value = SessionConfig> {
    (prop::sample::select(&PRESET_NAMES[..]), wheel_params(), 1u64..64).prop_map(|(name, wheel, decimation)| {
        SessionConfig { wheel, snapshot_decimation: decimation, ..preset(name, &SessionConfig::default()).unwrap() }
    })
}

pub fn server_message() -> impl Strategy<Value = ServerMessage> {
    prop_oneof![
        4 => snapshot().prop_map(ServerMessage::Snapshot),
        2 => (any::<u64>(), any::<u64>()).prop_map(|(reference, effective_tick)| ServerMessage::Ack { reference, effective_tick }),
        2 => (any::<Option<u64>>(), "[a-z_]{1,20}", ".*").prop_map(|(reference, code, message)| ServerMessage::Error { reference, code, message }),
        1 => config().prop_map(|c| ServerMessage::Hello { config: Box::new(c) }),
    ]
}
