//! Hölder and fractional Sobolev estimators, geometric sets, and gated
//! Monte Carlo moments.

mod holder;
mod moments;
mod sets;
mod sobolev;

pub use holder::{
    holder_modulus, holder_norm, holder_norm_with, HolderEstimate, ModulusEstimate, PairMax, SpaceTimeSamples,
    SpaceTimeWindow, DEFAULT_PAIR_BUDGET,
};
pub use moments::{lp_moment, mean_estimate, probability, MomentEstimate, CONFIDENCE};
pub use sets::{enlarge_set, shrinking_set, BoxRegion, CellSet};
pub use sobolev::{frac_sobolev, SobolevNorm};
