//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every entry point returns a flat `Float64Array` or throws a string.

use ising_echo::observables::gaussian_rate_correlator;
use ising_echo::{echo_timeseries, uniform_ground_state, FixedTimeEcho, QuenchProtocol};
use wasm_bindgen::prelude::*;

/// Largest chain the page will diagonalize; beyond this the UI stalls.
pub const MAX_SITES: usize = 200;
pub const MAX_SAMPLES: usize = 2001;

fn protocol(n: usize, lambda_i: f64, lambda_f: f64, epsilon: f64, d: usize) -> Result<QuenchProtocol, String> {
    if n > MAX_SITES {
        return Err(format!("n = {n} exceeds the demo limit of {MAX_SITES}"));
    }
    QuenchProtocol::new(n, lambda_i, lambda_f, epsilon, d).map_err(|e| e.to_string())
}

fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
        return Err(format!("bad grid {lo}:{hi}:{step}"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > MAX_SAMPLES {
        return Err(format!("{count} samples requested, at most {MAX_SAMPLES}"));
    }
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

/// `L(t)` at `t = 0, dt, ..., t_max`.
#[wasm_bindgen]
pub fn echo_series(
    n: usize,
    lambda_i: f64,
    lambda_f: f64,
    epsilon: f64,
    d: usize,
    t_max: f64,
    dt: f64,
) -> Result<Vec<f64>, String> {
    let p = protocol(n, lambda_i, lambda_f, epsilon, d)?;
    let times = grid(0.0, t_max, dt)?;
    Ok(echo_timeseries(&p, &times).map_err(|e| e.to_string())?.echo)
}

/// `L(t)` at one time for `lambda_i = lo, lo + step, ..., hi`.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn echo_vs_lambda_i(
    n: usize,
    lambda_f: f64,
    epsilon: f64,
    d: usize,
    t: f64,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<Vec<f64>, String> {
    let p = protocol(n, lo, lambda_f, epsilon, d)?;
    let fixed = FixedTimeEcho::new(&p, t).map_err(|e| e.to_string())?;
    grid(lo, hi, step)?
        .into_iter()
        .map(|li| {
            let c0 = uniform_ground_state(&p, li)?;
            fixed.echo(&c0)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())
}

/// Gaussian decay rate `alpha(d)` for `d = 1, ..., n / 2`.
#[wasm_bindgen]
pub fn alpha_vs_distance(n: usize, lambda_i: f64, epsilon: f64) -> Result<Vec<f64>, String> {
    let p = protocol(n, lambda_i, lambda_i, epsilon, 1)?;
    let c0 = uniform_ground_state(&p, lambda_i).map_err(|e| e.to_string())?;
    (1..=n / 2)
        .map(|d| gaussian_rate_correlator(&c0, epsilon, d).map(|r| r.alpha))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())
}
