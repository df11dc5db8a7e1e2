//! Differential-privacy accounting primitives and leaf mechanisms.

mod leaf;
mod normal;
mod zcdp;

pub use leaf::{
    em_epsilon_for_rho, exp_mech_select, gaussian_count_noise_sd, gaussian_leaf_counts,
    noisy_counts, LeafMechanismConfig, LeafMechanismKind,
};
pub use normal::{log_std_normal_cdf, std_normal_cdf, std_normal_interval, std_normal_sf};
pub use zcdp::{gaussian_tight_delta, max_rho_for, zcdp_to_dp, EpsilonDelta, ZcdpBudget};
