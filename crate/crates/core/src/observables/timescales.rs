//! Quasiparticle velocities and the time scales they set, plus detectors
//! for the revival features of an echo time series.

use crate::error::{Error, Result};
use crate::fermion::EchoSeries;
use crate::lattice::QuenchProtocol;

/// `1` for weak coupling, `1/epsilon` for strong coupling, crossing at `epsilon = 1`.
pub fn typical_time(epsilon: f64) -> f64 {
    if epsilon > 1.0 {
        1.0 / epsilon
    } else {
        1.0
    }
}

/// Maximal slope of `e_k = 2 sqrt(J^2 + lambda^2 - 2 J lambda cos k)`,
/// namely `2 min(lambda_f, J)`.
pub fn group_velocity(lambda_f: f64, j: f64) -> f64 {
    2.0 * lambda_f.min(j)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicTimes {
    pub t_typ: f64,
    pub v_g: f64,
    /// Revival after a global quench, `N / (2 v_g)`.
    pub t_star: f64,
    /// Interference time for qubits on opposite sites, `t_star / 2`.
    pub tau_star: f64,
    /// Time until the qubits feel each other through the chain, `d / (2 v_g)`.
    pub t_ind: f64,
    /// Revival without a quench, `N / v_g`.
    pub t_star_equilibrium: f64,
    pub t_ind_equilibrium: f64,
}

/// Time scales of a protocol; they are infinite when `v_g = 0`.
pub fn characteristic_times(p: &QuenchProtocol) -> CharacteristicTimes {
    let v_g = group_velocity(p.lambda_f, p.j);
    let over_v = |x: f64| if v_g > 0.0 { x / v_g } else { f64::INFINITY };
    let t_star = over_v(p.n as f64 / 2.0);
    let t_ind = over_v(p.d as f64 / 2.0);
    CharacteristicTimes {
        t_typ: typical_time(p.epsilon),
        v_g,
        t_star,
        tau_star: t_star / 2.0,
        t_ind,
        t_star_equilibrium: 2.0 * t_star,
        t_ind_equilibrium: 2.0 * t_ind,
    }
}

/// `L - L_single^2`: the echo of a common bath minus that of two
/// independent baths.
pub fn delta_echo(common: &EchoSeries, single: &EchoSeries) -> Result<Vec<f64>> {
    if common.times != single.times {
        return Err(Error::GridMismatch(format!(
            "{} vs {} samples",
            common.times.len(),
            single.times.len()
        )));
    }
    Ok(common
        .echo
        .iter()
        .zip(&single.echo)
        .map(|(l, s)| l - s * s)
        .collect())
}

/// Width of the centered moving average applied to time derivatives.
pub const SMOOTHING_WINDOW: usize = 5;

/// Finite-difference `dL/dt` (central inside, one-sided at the ends)
/// followed by a centered moving average of [`SMOOTHING_WINDOW`] points.
pub fn smoothed_time_derivative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len().min(values.len());
    if n < 2 {
        return vec![0.0; n];
    }
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (values[b] - values[a]) / (times[b] - times[a])
        })
        .collect();
    let half = SMOOTHING_WINDOW / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            raw[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Window, in time units, over which the trend ending at a candidate
/// revival is measured.
pub const REVIVAL_WINDOW: f64 = 2.0;

/// A sign change of the smoothed derivative counts as a revival only if the
/// mean `|dL/dt|` over the preceding [`REVIVAL_WINDOW`] is at least this
/// fraction of its mean since `t_min`.
pub const REVIVAL_SIGNIFICANCE: f64 = 0.5;

/// First time after `t_min` at which the smoothed derivative changes sign at
/// the end of an active trend, linearly interpolated between samples.
///
/// A decay turning into a rise marks the revival after a quench. Without a
/// quench the echo instead flattens into a shallow minimum long before the
/// revival, which then shows up as a sharp maximum; the trend condition
/// skips the minimum and the maximum is reported.
pub fn detect_revival_onset(times: &[f64], echo: &[f64], t_min: f64) -> Option<f64> {
    let slope = smoothed_time_derivative(times, echo);
    let mean_abs = |lo: f64, hi: f64| {
        let (sum, count) = times
            .iter()
            .zip(&slope)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .fold((0.0, 0usize), |(s, c), (_, d)| (s + d.abs(), c + 1));
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    };
    (1..slope.len())
        .filter(|&i| times[i - 1] > t_min)
        .filter(|&i| (slope[i - 1] < 0.0 && slope[i] >= 0.0) || (slope[i - 1] > 0.0 && slope[i] <= 0.0))
        .map(|i| {
            let (s0, s1) = (slope[i - 1], slope[i]);
            times[i - 1] + (times[i] - times[i - 1]) * s0 / (s0 - s1)
        })
        .find(|&tc| {
            let recent = mean_abs((tc - REVIVAL_WINDOW).max(t_min), tc);
            recent > 0.0 && recent >= REVIVAL_SIGNIFICANCE * mean_abs(t_min, tc)
        })
}

/// First time inside `search` where `|dL/dt|` reaches `factor` times its
/// mean over `plateau`.
pub fn detect_derivative_step(
    times: &[f64],
    echo: &[f64],
    plateau: (f64, f64),
    search: (f64, f64),
    factor: f64,
) -> Option<f64> {
    let slope = smoothed_time_derivative(times, echo);
    let inside = |t: f64, w: (f64, f64)| t >= w.0 && t <= w.1;
    let plateau_vals: Vec<f64> = times
        .iter()
        .zip(&slope)
        .filter(|(t, _)| inside(**t, plateau))
        .map(|(_, s)| s.abs())
        .collect();
    if plateau_vals.is_empty() {
        return None;
    }
    let level = plateau_vals.iter().sum::<f64>() / plateau_vals.len() as f64;
    times
        .iter()
        .zip(&slope)
        .find(|(t, s)| inside(**t, search) && s.abs() >= factor * level)
        .map(|(t, _)| *t)
}
