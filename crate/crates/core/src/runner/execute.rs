//! Execution of each scenario kind into a [`ResultTable`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::table::{PlotLayout, ResultTable};
use super::{join, Param, Point, Scenario, ScenarioKind};
use crate::error::{Error, Result};
use crate::fermion::{
    diagonalize_chain, single_defect_echo, uniform_ground_state, CovarianceMatrix, FixedTimeEcho,
    QuenchDynamics,
};
use crate::lattice::{FieldConfiguration, QuenchProtocol};
use crate::observables::{
    characteristic_times, concurrence_from_echo, delta_echo, detect_derivative_step,
    detect_revival_onset, field_derivative, fit_short_time_rate, gaussian_rate_correlator,
    gaussian_rate_mode_sum, locate_peak, locate_peak_and_fit_scaling, sigma_z_expectation,
    smoothed_time_derivative, DerivativeSweep, REVIVAL_SIGNIFICANCE, REVIVAL_WINDOW, SMOOTHING_WINDOW,
};
use crate::oracle::OracleQuench;

/// Revivals are searched for after this time.
pub const REVIVAL_T_MIN: f64 = 5.0;

/// A derivative step is flagged when `|dL/dt|` reaches this multiple of its
/// plateau level.
pub const STEP_FACTOR: f64 = 2.0;

/// Plateau window of the step detector, in units of `tau*`.
pub const STEP_PLATEAU: (f64, f64) = (0.5, 0.8);

/// Search window of the step detector, in units of `tau*`.
pub const STEP_SEARCH: (f64, f64) = (0.8, 1.3);

/// Samples used by the short-time fit in `alpha-vs-distance`.
const FIT_SAMPLES: usize = 21;

/// Runs a validated scenario.
pub fn run_scenario(s: &Scenario) -> Result<ResultTable> {
    s.validate()?;
    let mut table = match s.kind {
        ScenarioKind::EpsilonSweep | ScenarioKind::QuenchProtocolGrid => time_series(s)?,
        ScenarioKind::ShortTime => short_time(s)?,
        ScenarioKind::LambdaScan => field_scan(s, false)?,
        ScenarioKind::DerivativeScan => field_scan(s, true)?,
        ScenarioKind::SizeScaling => size_scaling(s)?,
        ScenarioKind::AlphaVsDistance => alpha_vs_distance(s)?,
        ScenarioKind::Revival => revival(s)?,
        ScenarioKind::Independence => independence(s)?,
        ScenarioKind::OracleCompare => oracle_compare(s)?,
    };
    table.prepend_meta(common_metadata(s));
    table.set_timestamp(now());
    log::info!("{}: {} rows", s.name, table.len());
    Ok(table)
}

#[cfg(not(target_arch = "wasm32"))]
fn now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(target_arch = "wasm32")]
fn now() -> u64 {
    0
}

fn common_metadata(s: &Scenario) -> Vec<(String, String)> {
    let mut m: Vec<(String, String)> = vec![
        ("name".into(), s.name.clone()),
        ("kind".into(), s.kind.to_string()),
        ("code_version".into(), env!("CARGO_PKG_VERSION").into()),
    ];
    let swept = |p: Param| {
        s.sweep.as_ref().is_some_and(|w| w.param == p) || s.series.as_ref().is_some_and(|w| w.param == p)
    };
    for p in Param::ALL {
        if !swept(p) && !(s.kind == ScenarioKind::OracleCompare && p != Param::N && p != Param::J) {
            m.push((p.as_str().into(), p.get(&s.base).to_string()));
        }
    }
    m.push(("boundary".into(), s.base.boundary.to_string()));
    for (key, sweep) in [("sweep", &s.sweep), ("series", &s.series)] {
        if let Some(w) = sweep {
            m.push((key.into(), w.param.to_string()));
            m.push((format!("{key}_values"), join(&w.values)));
        }
    }
    m.push(("time_grid".into(), s.time_grid.describe()));
    m
}

/// Maps `f` over `items`, in parallel when the feature is on; order is kept.
fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Leading columns naming the series and sweep parameters.
fn prefix_columns(s: &Scenario) -> Vec<&'static str> {
    s.series.iter().chain(s.sweep.iter()).map(|w| w.param.as_str()).collect()
}

fn prefix_values(pt: &Point) -> Vec<f64> {
    pt.series.into_iter().chain(pt.sweep).collect()
}

fn table_with(s: &Scenario, extra: &[&str]) -> ResultTable {
    let mut cols = prefix_columns(s);
    cols.extend_from_slice(extra);
    ResultTable::new(s.name.clone(), &cols)
}

fn layout(x: &str, y: &[&str], group: Vec<&str>) -> PlotLayout {
    PlotLayout {
        x: x.into(),
        y: y.iter().map(|c| c.to_string()).collect(),
        group: group.into_iter().map(String::from).collect(),
    }
}

fn concurrences(echo: &[f64]) -> Result<Vec<f64>> {
    echo.iter().map(|&l| concurrence_from_echo(l)).collect()
}

fn time_series(s: &Scenario) -> Result<ResultTable> {
    let times = s.times();
    let points = s.points()?;
    let series = par_map(&points, |pt| QuenchDynamics::new(&pt.protocol)?.series(&times))?;
    let mut table = table_with(s, &["t", "L", "concurrence"]);
    for (pt, ser) in points.iter().zip(&series) {
        let conc = concurrences(&ser.echo)?;
        for k in 0..times.len() {
            let mut row = prefix_values(pt);
            row.extend([times[k], ser.echo[k], conc[k]]);
            table.push_row(row)?;
        }
    }
    table.set_plot(layout("t", &["L"], prefix_columns(s)));
    Ok(table)
}

fn short_time(s: &Scenario) -> Result<ResultTable> {
    let times = s.times();
    let points = s.points()?;
    let results = par_map(&points, |pt| {
        let q = QuenchDynamics::new(&pt.protocol)?;
        let alpha = gaussian_rate_correlator(q.initial(), pt.protocol.epsilon, pt.protocol.d)?.alpha;
        Ok((q.series(&times)?, alpha))
    })?;
    let mut table = table_with(s, &["t", "L", "concurrence", "alpha", "L_parabolic", "t_typ"]);
    for (pt, (ser, alpha)) in points.iter().zip(&results) {
        let conc = concurrences(&ser.echo)?;
        let t_typ = characteristic_times(&pt.protocol).t_typ;
        for (k, &t) in times.iter().enumerate() {
            let mut row = prefix_values(pt);
            row.extend([t, ser.echo[k], conc[k], *alpha, 1.0 - alpha * t * t, t_typ]);
            table.push_row(row)?;
        }
    }
    table.set_plot(layout("t", &["L", "L_parabolic"], prefix_columns(s)));
    Ok(table)
}

/// `L[x][t]` with `param` set to each `x` on top of `base`.
fn echo_grid(base: &QuenchProtocol, param: Param, xs: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    if param == Param::LambdaI {
        // Only the initial state changes: one propagator pair per time.
        let fixed = times.iter().map(|&t| FixedTimeEcho::new(base, t)).collect::<Result<Vec<_>>>()?;
        return par_map(xs, |&x| {
            let c0 = uniform_ground_state(base, x)?;
            fixed.iter().map(|f| f.echo(&c0)).collect()
        });
    }
    let shared = match param {
        Param::LambdaF | Param::Epsilon | Param::D => Some(uniform_ground_state(base, base.lambda_i)?),
        _ => None,
    };
    par_map(xs, |&x| {
        let mut p = *base;
        param.set(&mut p, x)?;
        p.validate()?;
        let q = match &shared {
            Some(c0) => QuenchDynamics::with_initial(&p, c0.clone())?,
            None => QuenchDynamics::new(&p)?,
        };
        times.iter().map(|&t| q.echo_at(t)).collect()
    })
}

/// Echo from the fully polarized initial state, for every `x` and time.
fn polarized_grid(base: &QuenchProtocol, param: Param, xs: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let polarized = CovarianceMatrix::polarized(base.n);
    if param == Param::LambdaI {
        let row = times
            .iter()
            .map(|&t| FixedTimeEcho::new(base, t)?.echo(&polarized))
            .collect::<Result<Vec<_>>>()?;
        return Ok(vec![row; xs.len()]);
    }
    par_map(xs, |&x| {
        let mut p = *base;
        param.set(&mut p, x)?;
        let q = QuenchDynamics::with_initial(&p, polarized.clone())?;
        times.iter().map(|&t| q.echo_at(t)).collect()
    })
}

/// Per-time derivative along the field grid, laid out like the echo grid.
fn derivative_grid(xs: &[f64], grid: &[Vec<f64>], n_times: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![vec![0.0; n_times]; xs.len()];
    for k in 0..n_times {
        let column: Vec<f64> = grid.iter().map(|row| row[k]).collect();
        for (i, d) in field_derivative(xs, &column)?.into_iter().enumerate() {
            out[i][k] = d;
        }
    }
    Ok(out)
}

fn other_lambda(p: Param) -> Option<Param> {
    match p {
        Param::LambdaI => Some(Param::LambdaF),
        Param::LambdaF => Some(Param::LambdaI),
        _ => None,
    }
}

/// `lambda-scan-at-fixed-time` and `derivative-scan`.
///
/// When the series parameter is the complementary field, `L_swapped` holds
/// the curve with the roles of the two fields exchanged: the series value is
/// kept for the swept field and the sweep runs over the other one.
fn field_scan(s: &Scenario, derivative: bool) -> Result<ResultTable> {
    let sweep = s.sweep.as_ref().expect("validated");
    let times = s.times();
    let swap_param = s
        .series
        .as_ref()
        .filter(|w| Some(w.param) == other_lambda(sweep.param))
        .map(|w| w.param);
    let mut extra = vec!["t", "L", "concurrence", "L_polarized"];
    if derivative {
        extra.push("dL_dlambda");
    }
    if swap_param.is_some() {
        extra.push("L_swapped");
        if derivative {
            extra.push("dL_swapped");
        }
    }
    let mut table = table_with(s, &extra);
    let groups: Vec<Option<f64>> = match &s.series {
        Some(w) => w.values.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    for g in groups {
        let mut base = s.base;
        if let (Some(w), Some(v)) = (&s.series, g) {
            w.param.set(&mut base, v)?;
        }
        let xs = &sweep.values;
        let main = echo_grid(&base, sweep.param, xs, &times)?;
        let polarized = polarized_grid(&base, sweep.param, xs, &times)?;
        let swapped = match (swap_param, g) {
            (Some(q), Some(v)) => {
                let mut b = base;
                sweep.param.set(&mut b, v)?;
                Some(echo_grid(&b, q, xs, &times)?)
            }
            _ => None,
        };
        let (d_main, d_swapped) = if derivative {
            let dm = derivative_grid(xs, &main, times.len())?;
            let ds = swapped.as_ref().map(|sw| derivative_grid(xs, sw, times.len())).transpose()?;
            (Some(dm), ds)
        } else {
            (None, None)
        };
        for (i, &x) in xs.iter().enumerate() {
            for (k, &t) in times.iter().enumerate() {
                let mut row: Vec<f64> = g.into_iter().collect();
                row.extend([x, t, main[i][k], concurrence_from_echo(main[i][k])?, polarized[i][k]]);
                if let Some(d) = &d_main {
                    row.push(d[i][k]);
                }
                if let Some(sw) = &swapped {
                    row.push(sw[i][k]);
                    if let Some(ds) = &d_swapped {
                        row.push(ds[i][k]);
                    }
                }
                table.push_row(row)?;
            }
        }
    }
    let mut group = prefix_columns(s);
    group.pop();
    if times.len() > 1 {
        group.push("t");
    }
    let y: &[&str] = if derivative { &["dL_dlambda"] } else { &["L"] };
    table.set_plot(layout(sweep.param.as_str(), y, group));
    Ok(table)
}

/// Field grid `center + k step`, `|k step| <= half_width`, rounded to the
/// step's decimal resolution.
fn refined_grid(center: f64, half_width: f64, step: f64) -> Vec<f64> {
    let k = (half_width / step + 1e-9).floor() as i64;
    let snapped = (center / step).round() * step;
    (-k..=k).map(|i| super::config::tidy(snapped + i as f64 * step)).collect()
}

fn size_scaling(s: &Scenario) -> Result<ResultTable> {
    let sweep = s.sweep.as_ref().expect("validated");
    let sizes = &s.series.as_ref().expect("validated").values;
    let t = s.times()[0];
    let sweeps = par_map(sizes, |&n| {
        let mut base = s.base;
        Param::N.set(&mut base, n)?;
        let fixed = FixedTimeEcho::new(&base, t)?;
        let derivative_on = |xs: &[f64]| -> Result<Vec<f64>> {
            let echo = xs
                .iter()
                .map(|&x| fixed.echo(&uniform_ground_state(&base, x)?))
                .collect::<Result<Vec<_>>>()?;
            field_derivative(xs, &echo)
        };
        let coarse = derivative_on(&sweep.values)?;
        let (fields, derivative) = match s.refine {
            Some(r) => {
                let peak = locate_peak(&sweep.values, &coarse)?;
                let fine = refined_grid(peak.position, r.half_width, r.step);
                let d = derivative_on(&fine)?;
                (fine, d)
            }
            None => (sweep.values.clone(), coarse),
        };
        Ok(DerivativeSweep { n: base.n, fields, derivative })
    })?;
    let (peaks, position, height) = locate_peak_and_fit_scaling(&sweeps, 1.0)?;
    let mut table = ResultTable::new(s.name.clone(), &["n", "t", "lambda_max", "dL_dlambda_max", "distance"]);
    for (sw, peak) in sweeps.iter().zip(&peaks) {
        table.push_row(vec![sw.n as f64, t, peak.position, peak.height, 1.0 - peak.position])?;
    }
    if let Some(r) = s.refine {
        table.add_meta("refine", format!("half_width={} step={}", r.half_width, r.step));
    }
    table.add_meta("lambda_c", 1);
    table.add_meta("position_exponent", position.exponent);
    table.add_meta("position_prefactor", position.prefactor);
    table.add_meta("position_residual", position.residual);
    table.add_meta("position_sizes", join(&position.sizes));
    table.add_meta("height_slope", height.exponent);
    table.add_meta("height_intercept", height.prefactor);
    table.add_meta("height_residual", height.residual);
    table.add_meta("height_sizes", join(&height.sizes));
    table.set_plot(layout("n", &["distance"], Vec::new()));
    Ok(table)
}

fn alpha_vs_distance(s: &Scenario) -> Result<ResultTable> {
    let sweep = s.sweep.as_ref().expect("validated");
    let mut table = table_with(
        s,
        &["alpha_correlator", "alpha_mode_sum", "alpha_fit", "alpha_inf", "alpha_excess"],
    );
    let groups: Vec<Option<f64>> = match &s.series {
        Some(w) => w.values.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    for g in groups {
        let mut base = s.base;
        if let (Some(w), Some(v)) = (&s.series, g) {
            w.param.set(&mut base, v)?;
        }
        let decomp = diagonalize_chain(&FieldConfiguration::uniform(base.n, base.lambda_i), &base)?;
        let c0 = crate::fermion::ground_state_covariance(&decomp)?;
        let z0 = sigma_z_expectation(&c0, 0)?;
        let eps = base.epsilon;
        let alpha_inf = 2.0 * eps * eps * (1.0 - z0 * z0);
        let rows = par_map(&sweep.values, |&d| {
            let mut p = base;
            Param::D.set(&mut p, d)?;
            p.validate()?;
            let corr = gaussian_rate_correlator(&c0, eps, p.d)?.alpha;
            let modes = gaussian_rate_mode_sum(&decomp, eps, p.d)?.alpha;
            let fit = if eps > 0.0 {
                let t_typ = characteristic_times(&p).t_typ;
                let window = 0.1 * t_typ;
                let times: Vec<f64> =
                    (0..FIT_SAMPLES).map(|k| window * k as f64 / (FIT_SAMPLES - 1) as f64).collect();
                let series = QuenchDynamics::with_initial(&p, c0.clone())?.series(&times)?;
                fit_short_time_rate(&series, t_typ)?.alpha
            } else {
                0.0
            };
            Ok([d, corr, modes, fit, alpha_inf, corr - alpha_inf])
        })?;
        for r in rows {
            let mut row: Vec<f64> = g.into_iter().collect();
            row.extend(r);
            table.push_row(row)?;
        }
    }
    let mut group = prefix_columns(s);
    group.pop();
    table.set_plot(layout("d", &["alpha_correlator"], group));
    Ok(table)
}

/// Revival onset and derivative-step times of one series.
fn revival_events(times: &[f64], echo: &[f64], tau_star: f64) -> (f64, f64) {
    let onset = detect_revival_onset(times, echo, REVIVAL_T_MIN).unwrap_or(f64::NAN);
    let step = if tau_star.is_finite() {
        detect_derivative_step(
            times,
            echo,
            (STEP_PLATEAU.0 * tau_star, STEP_PLATEAU.1 * tau_star),
            (STEP_SEARCH.0 * tau_star, STEP_SEARCH.1 * tau_star),
            STEP_FACTOR,
        )
        .unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    (onset, step)
}

fn revival(s: &Scenario) -> Result<ResultTable> {
    let times = s.times();
    let points = s.points()?;
    let series = par_map(&points, |pt| QuenchDynamics::new(&pt.protocol)?.series(&times))?;
    let mut table = table_with(
        s,
        &["t", "L", "concurrence", "dL_dt", "t_star", "tau_star", "t_onset", "t_step"],
    );
    for (pt, ser) in points.iter().zip(&series) {
        let ct = characteristic_times(&pt.protocol);
        let t_star = if pt.protocol.lambda_i == pt.protocol.lambda_f {
            ct.t_star_equilibrium
        } else {
            ct.t_star
        };
        let tau_star = t_star / 2.0;
        let slope = smoothed_time_derivative(&times, &ser.echo);
        let (onset, step) = revival_events(&times, &ser.echo, tau_star);
        let conc = concurrences(&ser.echo)?;
        for (k, &t) in times.iter().enumerate() {
            let mut row = prefix_values(pt);
            row.extend([t, ser.echo[k], conc[k], slope[k], t_star, tau_star, onset, step]);
            table.push_row(row)?;
        }
    }
    table.add_meta("revival_t_min", REVIVAL_T_MIN);
    table.add_meta("revival_window", REVIVAL_WINDOW);
    table.add_meta("revival_significance", REVIVAL_SIGNIFICANCE);
    table.add_meta("smoothing_window", SMOOTHING_WINDOW);
    table.add_meta("step_factor", STEP_FACTOR);
    table.add_meta("step_plateau_tau", format!("{},{}", STEP_PLATEAU.0, STEP_PLATEAU.1));
    table.add_meta("step_search_tau", format!("{},{}", STEP_SEARCH.0, STEP_SEARCH.1));
    table.set_plot(layout("t", &["L"], prefix_columns(s)));
    Ok(table)
}

fn independence(s: &Scenario) -> Result<ResultTable> {
    let times = s.times();
    let points = s.points()?;
    let results = par_map(&points, |pt| {
        let common = QuenchDynamics::new(&pt.protocol)?.series(&times)?;
        let single = single_defect_echo(&pt.protocol, &times)?;
        let delta = delta_echo(&common, &single)?;
        Ok((common, single, delta))
    })?;
    let mut table = table_with(
        s,
        &["t", "L", "L_single", "L_ind", "delta_L", "concurrence", "t_ind"],
    );
    for (pt, (common, single, delta)) in points.iter().zip(&results) {
        let ct = characteristic_times(&pt.protocol);
        let t_ind = if pt.protocol.lambda_i == pt.protocol.lambda_f {
            ct.t_ind_equilibrium
        } else {
            ct.t_ind
        };
        let conc = concurrences(&common.echo)?;
        for (k, &t) in times.iter().enumerate() {
            let ls = single.echo[k];
            let mut row = prefix_values(pt);
            row.extend([t, common.echo[k], ls, ls * ls, delta[k], conc[k], t_ind]);
            table.push_row(row)?;
        }
    }
    table.add_meta("independence_threshold", 1e-3);
    table.set_plot(layout("t", &["delta_L"], prefix_columns(s)));
    Ok(table)
}

/// Random protocols on the scenario's chain, reproducible from the seed.
pub(crate) fn random_protocols(base: &QuenchProtocol, cases: usize, seed: u64) -> Result<Vec<QuenchProtocol>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|_| {
            let p = QuenchProtocol {
                lambda_i: rng.gen_range(0.2..=2.0),
                lambda_f: rng.gen_range(0.2..=2.0),
                epsilon: rng.gen_range(0.05..=20.0),
                d: rng.gen_range(0..base.n),
                ..*base
            };
            p.validate()?;
            Ok(p)
        })
        .collect()
}

fn oracle_compare(s: &Scenario) -> Result<ResultTable> {
    let times = s.times();
    let protocols = random_protocols(&s.base, s.cases, s.seed)?;
    let results = par_map(&protocols, |p| {
        let fermion = QuenchDynamics::new(p)?;
        let oracle = OracleQuench::new(p)?;
        times.iter().map(|&t| Ok((fermion.echo_at(t)?, oracle.echo(t)))).collect::<Result<Vec<_>>>()
    })?;
    let mut table = ResultTable::new(
        s.name.clone(),
        &["case", "lambda_i", "lambda_f", "epsilon", "d", "t", "L_fermion", "L_oracle", "abs_diff", "max_abs_diff"],
    );
    let mut worst = 0.0f64;
    for (case, (p, pairs)) in protocols.iter().zip(&results).enumerate() {
        let max = pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(max);
        for (&t, &(lf, lo)) in times.iter().zip(pairs) {
            table.push_row(vec![
                case as f64,
                p.lambda_i,
                p.lambda_f,
                p.epsilon,
                p.d as f64,
                t,
                lf,
                lo,
                (lf - lo).abs(),
                max,
            ])?;
        }
    }
    if !worst.is_finite() {
        return Err(Error::InvalidInput("non-finite echo difference".into()));
    }
    table.add_meta("cases", s.cases);
    table.add_meta("seed", s.seed);
    table.add_meta("max_abs_diff", worst);
    table.set_plot(layout("t", &["abs_diff"], vec!["case"]));
    Ok(table)
}
