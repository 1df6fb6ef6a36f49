//! Central values of quadratic twists and their cubic moment.

mod cutoff;
mod moment;
mod twist;

pub use cutoff::{v_function, VFunction, VKind};
pub use moment::{cubic_moment, omega_f, FormContribution, GeometricBudget, LevelInfo, MomentConfig, MomentMode, MomentReport};
pub use twist::{functional_equation_sign_test, l_half_squared, l_half_twisted, root_number, twist_split, LValue, SignTest};
