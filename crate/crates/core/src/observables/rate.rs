//! Short-time Gaussian decay `L(t) ~ 1 - alpha t^2`. The rate equals the
//! ground-state variance of `-epsilon (Z_0 + Z_d)` and is computed three
//! ways: a sum over normal modes, connected correlators, and a fit to the
//! echo itself.

use crate::error::{Error, Result};
use crate::fermion::{BdgDecomposition, CovarianceMatrix, EchoSeries};

use super::correlators::{sigma_z_expectation, sigma_zz_connected};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    ModeSum,
    Correlator,
    ShortTimeFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianRate {
    pub alpha: f64,
    pub method: RateMethod,
    /// RMS misfit of the parabola; only set for fitted rates.
    pub residual: Option<f64>,
}

fn check_distance(n: usize, d: usize) -> Result<()> {
    if d >= n {
        return Err(Error::InvalidInput(format!("distance {d} out of range for N = {n}")));
    }
    Ok(())
}

/// Mode sum over the Bogoliubov coefficients of the initial Hamiltonian:
///
/// ```text
/// alpha = 4 eps^2 sum_{k != l} [ (g_0k h_0l + g_dk h_dl)^2 - 2 h_dk h_0l g_dl g_0k
///                               - h_0k h_0l g_0k g_0l - h_dk h_dl g_dk g_dl ]
/// ```
///
/// The last two terms pair `g_0k g_0l` (and `g_dk g_dl`); repeating the
/// index `k` there does not reproduce the variance. Diagonal `k = l` terms
/// cancel, so excluding them is exact.
pub fn gaussian_rate_mode_sum(decomp: &BdgDecomposition, epsilon: f64, d: usize) -> Result<GaussianRate> {
    let n = decomp.n();
    check_distance(n, d)?;
    let (g, h) = (decomp.g(), decomp.h());
    let mut sum = 0.0;
    for k in 0..n {
        let (g0k, h0k, gdk, hdk) = (g[(0, k)], h[(0, k)], g[(d, k)], h[(d, k)]);
        for l in (0..n).filter(|&l| l != k) {
            let (g0l, h0l, gdl, hdl) = (g[(0, l)], h[(0, l)], g[(d, l)], h[(d, l)]);
            let mixed = g0k * h0l + gdk * hdl;
            sum += mixed * mixed
                - 2.0 * hdk * h0l * gdl * g0k
                - h0k * h0l * g0k * g0l
                - hdk * hdl * gdk * gdl;
        }
    }
    Ok(GaussianRate {
        alpha: 4.0 * epsilon * epsilon * sum,
        method: RateMethod::ModeSum,
        residual: None,
    })
}

/// `alpha = 2 eps^2 (<Z_0 Z_d>_c + 1 - <Z_0>^2)`. For `d = 0` the connected
/// self-correlator is `1 - <Z_0>^2`, i.e. a single defect of strength
/// `2 eps`.
pub fn gaussian_rate_correlator(c0: &CovarianceMatrix, epsilon: f64, d: usize) -> Result<GaussianRate> {
    check_distance(c0.n(), d)?;
    let z0 = sigma_z_expectation(c0, 0)?;
    let connected = if d == 0 {
        1.0 - z0 * z0
    } else {
        sigma_zz_connected(c0, 0, d)?
    };
    Ok(GaussianRate {
        alpha: 2.0 * epsilon * epsilon * (connected + 1.0 - z0 * z0),
        method: RateMethod::Correlator,
        residual: None,
    })
}

/// Minimum number of samples inside the fit window.
pub const MIN_FIT_POINTS: usize = 10;

/// Least-squares fit of `1 - alpha t^2` on `t in [0, 0.1 t_typ]`.
pub fn fit_short_time_rate(series: &EchoSeries, t_typ: f64) -> Result<GaussianRate> {
    let window = 0.1 * t_typ;
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.echo)
        .filter(|(t, _)| **t <= window)
        .map(|(&t, &l)| (t, l))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientResolution(format!(
            "{} samples in [0, {window}], need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let (num, den) = pts.iter().fold((0.0, 0.0), |(num, den), &(t, l)| {
        let t2 = t * t;
        (num + t2 * (1.0 - l), den + t2 * t2)
    });
    if den == 0.0 {
        return Err(Error::InsufficientResolution("all samples at t = 0".into()));
    }
    let alpha = num / den;
    let sq: f64 = pts
        .iter()
        .map(|&(t, l)| {
            let r = l - (1.0 - alpha * t * t);
            r * r
        })
        .sum();
    Ok(GaussianRate {
        alpha,
        method: RateMethod::ShortTimeFit,
        residual: Some((sq / pts.len() as f64).sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::{diagonalize_chain, ground_state_covariance};
    use crate::lattice::{FieldConfiguration, QuenchProtocol};

    #[test]
    fn zero_coupling_gives_zero_rate() {
        let p = QuenchProtocol::new(10, 0.7, 0.5, 0.0, 3).unwrap();
        let d = diagonalize_chain(&FieldConfiguration::uniform(10, 0.7), &p).unwrap();
        let c0 = ground_state_covariance(&d).unwrap();
        assert_eq!(gaussian_rate_mode_sum(&d, 0.0, 3).unwrap().alpha, 0.0);
        assert_eq!(gaussian_rate_correlator(&c0, 0.0, 3).unwrap().alpha, 0.0);
    }

    #[test]
    fn fit_recovers_parabola() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 1e-3).collect();
        let echo = times.iter().map(|t| 1.0 - 3.0 * t * t).collect();
        let p = QuenchProtocol::new(4, 1.0, 1.0, 0.1, 1).unwrap();
        let s = EchoSeries { times, echo, protocol: p };
        let fit = fit_short_time_rate(&s, 1.0).unwrap();
        assert!((fit.alpha - 3.0).abs() < 1e-10);
        assert!(fit.residual.unwrap() < 1e-12);
    }

    #[test]
    fn fit_needs_resolution() {
        let times = vec![0.0, 0.05, 0.1, 0.5];
        let echo = vec![1.0; 4];
        let p = QuenchProtocol::new(4, 1.0, 1.0, 0.1, 1).unwrap();
        let s = EchoSeries { times, echo, protocol: p };
        assert!(matches!(
            fit_short_time_rate(&s, 1.0),
            Err(Error::InsufficientResolution(_))
        ));
    }
}
