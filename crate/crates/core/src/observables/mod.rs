//! Quantities derived from echoes and covariance matrices.

mod correlators;
mod entanglement;
mod rate;
mod scaling;
mod timescales;

pub use correlators::{sigma_z_expectation, sigma_zz_connected};
pub use entanglement::{
    concurrence_from_echo, reduced_density_matrix, wootters_concurrence, wootters_concurrence_of,
};
pub use rate::{
    fit_short_time_rate, gaussian_rate_correlator, gaussian_rate_mode_sum, GaussianRate,
    RateMethod,
};
pub use scaling::{
    correlation_length, field_derivative, fit_linear_in_log, fit_power_law, locate_peak,
    locate_peak_and_fit_scaling, DerivativeSweep, Peak, ScalingFit,
};
pub use timescales::{
    characteristic_times, delta_echo, detect_derivative_step, detect_revival_onset,
    group_velocity, smoothed_time_derivative, typical_time, CharacteristicTimes, REVIVAL_SIGNIFICANCE,
    REVIVAL_WINDOW, SMOOTHING_WINDOW,
};
