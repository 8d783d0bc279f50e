//! Gyroscope haptics core: rigid-body wheel dynamics, haptic force rendering,
//! device coupling, the fixed-rate session loop and trace recording.
//!
//! The math, dynamics and haptics layers are generic over [`scalar::Real`]
//! (`f32` or `f64`); the session and trace layers run in `f64`.

pub mod checks;
pub mod device;
pub mod dynamics;
pub mod haptics;
pub mod math;
pub mod scalar;
pub mod session;
pub mod trace;

pub type Vec3f = math::Vec3<f32>;
pub type Vec3d = math::Vec3<f64>;
pub type Quatf = math::Quat<f32>;
pub type Quatd = math::Quat<f64>;
pub type WheelParamsf = dynamics::WheelParams<f32>;
pub type WheelParamsd = dynamics::WheelParams<f64>;
pub type RigidBodyStatef = dynamics::RigidBodyState<f32>;
pub type RigidBodyStated = dynamics::RigidBodyState<f64>;
pub type InertiaTensorf = dynamics::InertiaTensor<f32>;
pub type InertiaTensord = dynamics::InertiaTensor<f64>;

pub use dynamics::{RigidBodyState, WheelParams};
pub use math::{Quat, Vec3};
pub use session::{Session, SessionConfig, SessionError, Snapshot};
