//! Linear transport `∂t y + a(t,x) ∂x y = 0` by the method of characteristics.
//!
//! Coefficients of either sign are accepted; negative speeds are mapped to
//! positive ones by `x → L - x` internally, and every public quantity is in
//! physical coordinates. Before any integration the coefficient is extended
//! to all of space-time by even reflection and periodicity, so characteristic
//! steps never leave its domain of definition.

mod characteristic;
mod coefficient;
mod solve;

pub use characteristic::{
    default_step, entrance_derivatives, entrance_time, flow, integrate_characteristic, solution_gradient,
    CharacteristicRecord, EntranceClass,
};
pub use coefficient::{extend_coefficient, Coefficient, Direction, ExtendedCoefficient, ExtensionMap, SpeedField};
pub use solve::{entrance_labels, lipschitz_bound, solve_linear_transport, TransportOptions};
