use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Concurrence of the qubit pair from the echo: `C = sqrt(L)`.
pub fn concurrence_from_echo(echo: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&echo) {
        return Err(Error::Domain {
            value: echo,
            domain: "[0, 1]",
        });
    }
    Ok(echo.sqrt())
}

/// Qubit density matrix in the basis `{uu, ud, du, dd}` for decoherence
/// factor `d`.
pub fn reduced_density_matrix(d: Complex64) -> Matrix4<Complex64> {
    let mut rho = Matrix4::zeros();
    rho[(0, 0)] = Complex64::new(0.5, 0.0);
    rho[(3, 3)] = Complex64::new(0.5, 0.0);
    rho[(0, 3)] = d * 0.5;
    rho[(3, 0)] = d.conj() * 0.5;
    rho
}

/// Wootters concurrence `max(0, e1 - e2 - e3 - e4)` of a two-qubit state,
/// where `e_i` are the decreasing square roots of the eigenvalues of
/// `R = rho (Y x Y) rho^* (Y x Y)`.
///
/// The roots are obtained as the singular values of `sqrt(rho) sqrt(rho~)`,
/// which avoids taking square roots of tiny eigenvalues of `R`. Eigenvalues
/// of `rho` below `1e-14` are treated as exact zeros.
pub fn wootters_concurrence_of(rho: &Matrix4<Complex64>) -> f64 {
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    // Y x Y in the {uu, ud, du, dd} basis.
    let mut yy = Matrix4::from_element(zero);
    yy[(0, 3)] = i * i;
    yy[(3, 0)] = i * i;
    yy[(1, 2)] = -(i * i);
    yy[(2, 1)] = -(i * i);

    let eig = rho.symmetric_eigen();
    let mut sqrt_rho = Matrix4::from_element(zero);
    for (p, v) in eig.eigenvalues.iter().zip(eig.eigenvectors.column_iter()) {
        if *p > 1e-14 {
            sqrt_rho += v * v.adjoint() * Complex64::new(p.sqrt(), 0.0);
        }
    }
    let sqrt_tilde = yy * sqrt_rho.map(|z| z.conj()) * yy;
    let mut roots: Vec<f64> = (sqrt_rho * sqrt_tilde)
        .singular_values()
        .iter()
        .copied()
        .collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    (roots[0] - roots[1] - roots[2] - roots[3]).max(0.0)
}

/// Concurrence of the dephased Bell state with `|D| = decoherence_modulus`.
pub fn wootters_concurrence(decoherence_modulus: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&decoherence_modulus) {
        return Err(Error::Domain {
            value: decoherence_modulus,
            domain: "[0, 1]",
        });
    }
    Ok(wootters_concurrence_of(&reduced_density_matrix(Complex64::new(
        decoherence_modulus,
        0.0,
    ))))
}
