//! Field derivatives of the echo and finite-size scaling of their peaks.

use crate::error::{Error, Result};

/// Correlation length `|ln lambda|^{-1}` of the Ising ground state; infinite
/// at the critical field.
pub fn correlation_length(lambda_i: f64) -> Result<f64> {
    if !(lambda_i > 0.0) {
        return Err(Error::Domain {
            value: lambda_i,
            domain: "(0, inf)",
        });
    }
    Ok(1.0 / lambda_i.ln().abs())
}

fn uniform_step(grid: &[f64]) -> Result<f64> {
    let step = grid[1] - grid[0];
    if !(step > 0.0) {
        return Err(Error::InvalidInput("grid must be ascending".into()));
    }
    for w in grid.windows(2) {
        let other = w[1] - w[0];
        if (other - step).abs() > 1e-9 * step.max(1.0) {
            return Err(Error::NonUniformGrid { first: step, other });
        }
    }
    Ok(step)
}

/// Second-order finite differences: central inside, one-sided three-point
/// stencils at the two ends.
pub fn field_derivative(grid: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if grid.len() < 3 || grid.len() != values.len() {
        return Err(Error::InvalidInput(format!(
            "need >= 3 matching samples, got {} fields and {} values",
            grid.len(),
            values.len()
        )));
    }
    let h = uniform_step(grid)?;
    let n = values.len();
    Ok((0..n)
        .map(|i| match i {
            0 => (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h),
            i if i == n - 1 => (3.0 * values[i] - 4.0 * values[i - 1] + values[i - 2]) / (2.0 * h),
            i => (values[i + 1] - values[i - 1]) / (2.0 * h),
        })
        .collect())
}

/// Maximum of `|f|` refined by a parabola through the three samples around
/// the largest grid value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub position: f64,
    /// Signed value of the derivative at the refined position.
    pub height: f64,
    pub index: usize,
}

pub fn locate_peak(grid: &[f64], values: &[f64]) -> Result<Peak> {
    if grid.len() < 3 || grid.len() != values.len() {
        return Err(Error::InvalidInput("peak search needs >= 3 matching samples".into()));
    }
    let index = (0..values.len())
        .max_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()))
        .unwrap();
    if index == 0 || index == values.len() - 1 {
        return Err(Error::PeakAtBoundary { index, len: values.len() });
    }
    let (ym, y0, yp) = (values[index - 1], values[index], values[index + 1]);
    let sign = y0.signum();
    let (ym, y0a, yp) = (ym * sign, y0 * sign, yp * sign);
    let curvature = ym - 2.0 * y0a + yp;
    let h = grid[index + 1] - grid[index];
    let (offset, height) = if curvature < 0.0 {
        let offset = 0.5 * (ym - yp) / curvature;
        (offset, y0a - 0.25 * (ym - yp) * offset)
    } else {
        (0.0, y0a)
    };
    Ok(Peak {
        position: grid[index] + offset * h,
        height: sign * height,
        index,
    })
}

/// Least-squares line through transformed data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS residual in the fitted coordinates.
    pub residual: f64,
    /// Abscissae actually used (after outlier exclusion).
    pub sizes: Vec<f64>,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res = x.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    (slope, intercept, res)
}

fn rms(r: &[f64]) -> f64 {
    (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt()
}

fn check_fit_input(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::InvalidInput("fit needs >= 2 matching points".into()));
    }
    Ok(())
}

/// `y = prefactor * x^exponent`, fitted on log-log axes.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<ScalingFit> {
    check_fit_input(x, y)?;
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (slope, intercept, res) = linear_fit(&lx, &ly);
    Ok(ScalingFit {
        exponent: slope,
        prefactor: intercept.exp(),
        residual: rms(&res),
        sizes: x.to_vec(),
    })
}

/// `y = prefactor + exponent * ln x`.
pub fn fit_linear_in_log(x: &[f64], y: &[f64]) -> Result<ScalingFit> {
    check_fit_input(x, y)?;
    if x.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput("log fit needs positive abscissae".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let (slope, intercept, res) = linear_fit(&lx, y);
    Ok(ScalingFit {
        exponent: slope,
        prefactor: intercept,
        residual: rms(&res),
        sizes: x.to_vec(),
    })
}

/// Refits without the smallest size when its squared residual exceeds three
/// times the mean squared residual.
fn with_exclusion(
    x: &[f64],
    y: &[f64],
    fit: impl Fn(&[f64], &[f64]) -> Result<ScalingFit>,
    residuals: impl Fn(&ScalingFit, f64, f64) -> f64,
) -> Result<ScalingFit> {
    let full = fit(x, y)?;
    if x.len() < 4 {
        return Ok(full);
    }
    let smallest = (0..x.len()).min_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap();
    let sq: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| residuals(&full, a, b).powi(2))
        .collect();
    let mean = sq.iter().sum::<f64>() / sq.len() as f64;
    if sq[smallest] > 3.0 * mean {
        let (xs, ys): (Vec<f64>, Vec<f64>) = x
            .iter()
            .zip(y)
            .enumerate()
            .filter(|(i, _)| *i != smallest)
            .map(|(_, (a, b))| (*a, *b))
            .unzip();
        fit(&xs, &ys)
    } else {
        Ok(full)
    }
}

/// Derivative sweep `dL/dlambda` on a uniform field grid for one chain size.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSweep {
    pub n: usize,
    pub fields: Vec<f64>,
    pub derivative: Vec<f64>,
}

/// Peaks of every sweep, the power-law fit of `|lambda_c - lambda_max|`
/// against `N`, and the fit of the peak height against `ln N`.
pub fn locate_peak_and_fit_scaling(
    sweeps: &[DerivativeSweep],
    lambda_c: f64,
) -> Result<(Vec<Peak>, ScalingFit, ScalingFit)> {
    if sweeps.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "scaling fit needs >= 4 sizes, got {}",
            sweeps.len()
        )));
    }
    let peaks = sweeps
        .iter()
        .map(|s| locate_peak(&s.fields, &s.derivative))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<f64> = sweeps.iter().map(|s| s.n as f64).collect();
    let shifts: Vec<f64> = peaks.iter().map(|p| (lambda_c - p.position).abs()).collect();
    let heights: Vec<f64> = peaks.iter().map(|p| p.height.abs()).collect();
    let position_fit = with_exclusion(&sizes, &shifts, fit_power_law, |f, x, y| {
        y.ln() - f.prefactor.ln() - f.exponent * x.ln()
    })?;
    let height_fit = with_exclusion(&sizes, &heights, fit_linear_in_log, |f, x, y| {
        y - f.prefactor - f.exponent * x.ln()
    })?;
    Ok((peaks, position_fit, height_fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(a: f64, step: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + step * i as f64).collect()
    }

    #[test]
    fn correlation_length_examples() {
        assert_abs_diff_eq!(correlation_length(std::f64::consts::E).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(correlation_length(0.95).unwrap(), 19.496, epsilon = 1e-3);
        assert_abs_diff_eq!(correlation_length(1.5).unwrap(), 2.4663, epsilon = 1e-4);
        assert!(correlation_length(1.0).unwrap().is_infinite());
        assert!(correlation_length(0.0).is_err());
    }

    #[test]
    fn derivative_of_simple_sweeps() {
        let x = grid(0.1, 0.05, 20);
        let flat = vec![0.3; 20];
        assert!(field_derivative(&x, &flat).unwrap().iter().all(|d| d.abs() < 1e-12));
        let lin: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        for d in field_derivative(&x, &lin).unwrap() {
            assert_abs_diff_eq!(d, 2.0, epsilon = 1e-10);
        }
        let quad: Vec<f64> = x.iter().map(|v| v * v).collect();
        for (d, v) in field_derivative(&x, &quad).unwrap().iter().zip(&x) {
            assert_abs_diff_eq!(*d, 2.0 * v, epsilon = 1e-10);
        }
    }

    #[test]
    fn derivative_rejects_bad_grids() {
        assert!(matches!(
            field_derivative(&[0.0, 0.1, 0.3], &[1.0, 1.0, 1.0]),
            Err(Error::NonUniformGrid { .. })
        ));
        assert!(field_derivative(&[0.0, 0.1], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn parabolic_peak_refinement() {
        let x = grid(0.0, 0.1, 21);
        let y: Vec<f64> = x.iter().map(|v| 3.0 - (v - 1.23).powi(2)).collect();
        let p = locate_peak(&x, &y).unwrap();
        assert_abs_diff_eq!(p.position, 1.23, epsilon = 1e-12);
        assert_abs_diff_eq!(p.height, 3.0, epsilon = 1e-12);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(locate_peak(&x, &neg).unwrap().height, -3.0, epsilon = 1e-12);
        let edge: Vec<f64> = x.clone();
        assert!(matches!(locate_peak(&x, &edge), Err(Error::PeakAtBoundary { .. })));
    }

    #[test]
    fn power_law_recovers_generator() {
        let sizes = [50.0, 100.0, 200.0, 400.0, 800.0];
        let shift: Vec<f64> = sizes.iter().map(|n: &f64| n.powf(-1.0)).collect();
        let fit = fit_power_law(&sizes, &shift).unwrap();
        assert_abs_diff_eq!(fit.exponent, -1.0, epsilon = 0.01);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn scaling_pipeline_on_synthetic_peaks() {
        let sweeps: Vec<DerivativeSweep> = [50usize, 100, 200, 400]
            .iter()
            .map(|&n| {
                let center = 1.0 - 1.0 / n as f64;
                let height = 0.5 + 0.2 * (n as f64).ln();
                let fields = grid(0.95, 0.0005, 201);
                let derivative = fields
                    .iter()
                    .map(|x| height / (1.0 + 1e4 * (x - center).powi(2)))
                    .collect();
                DerivativeSweep { n, fields, derivative }
            })
            .collect();
        let (peaks, pos, height) = locate_peak_and_fit_scaling(&sweeps, 1.0).unwrap();
        assert_eq!(peaks.len(), 4);
        assert_abs_diff_eq!(pos.exponent, -1.0, epsilon = 0.01);
        assert_abs_diff_eq!(height.exponent, 0.2, epsilon = 1e-6);
        assert!(locate_peak_and_fit_scaling(&sweeps[..3], 1.0).is_err());
    }
}
