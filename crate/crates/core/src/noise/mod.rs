//! Driving Brownian family, the delayed dyadic smoothing `wⁿ`, the
//! localisation events `Lₙ(t)`, controls `h` and the shift-projection `πₙ∘τₙ`.

mod brownian;
mod control;
mod localization;
mod projection;
mod smoothing;

pub use brownian::{sample_family, sample_family_replica, BrownianFamily, SeedRecord};
pub use control::ControlPath;
pub use localization::{first_violation, localization_indicator, localization_threshold, max_interval_index, MIN_ALPHA};
pub use projection::{h_t_norm_sq, project_shift, TimeModeArray};
pub use smoothing::{dyadic_floor, dyadic_floor_steps, smoothed_field, SmoothedNoise};
