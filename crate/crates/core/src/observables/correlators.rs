use crate::error::{Error, Result};
use crate::fermion::CovarianceMatrix;

fn check_site(c: &CovarianceMatrix, site: usize) -> Result<()> {
    if site >= c.n() {
        return Err(Error::InvalidInput(format!(
            "site {site} out of range for N = {}",
            c.n()
        )));
    }
    Ok(())
}

/// `<Z_j> = 2 <c_j^dag c_j> - 1`; `+1` is the field-aligned state.
pub fn sigma_z_expectation(c: &CovarianceMatrix, site: usize) -> Result<f64> {
    check_site(c, site)?;
    Ok(2.0 * c.hopping(site, site).re - 1.0)
}

/// `<Z_i Z_j> - <Z_i><Z_j>` from Wick's theorem:
/// `4 (<c_i^dag c_j><c_i c_j^dag> - <c_i^dag c_j^dag><c_i c_j>)`.
pub fn sigma_zz_connected(c: &CovarianceMatrix, i: usize, j: usize) -> Result<f64> {
    check_site(c, i)?;
    check_site(c, j)?;
    if i == j {
        return Err(Error::InvalidInput(
            "connected correlator needs distinct sites".into(),
        ));
    }
    let normal = c.hopping(i, j) * c.hole(i, j);
    let anomalous = c.anomalous_dag(i, j) * c.anomalous(i, j);
    Ok(4.0 * (normal - anomalous).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::{diagonalize_chain, ground_state_covariance};
    use crate::lattice::{FieldConfiguration, QuenchProtocol};

    #[test]
    fn polarized_state() {
        let c = CovarianceMatrix::polarized(6);
        for s in 0..6 {
            assert_eq!(sigma_z_expectation(&c, s).unwrap(), 1.0);
        }
        for (i, j) in [(0, 1), (0, 3), (2, 5)] {
            assert_eq!(sigma_zz_connected(&c, i, j).unwrap(), 0.0);
        }
    }

    #[test]
    fn bad_sites() {
        let c = CovarianceMatrix::polarized(4);
        assert!(sigma_z_expectation(&c, 4).is_err());
        assert!(sigma_zz_connected(&c, 1, 1).is_err());
        assert!(sigma_zz_connected(&c, 0, 9).is_err());
    }

    #[test]
    fn large_field_tends_to_polarized() {
        let p = QuenchProtocol::new(12, 1.0, 1.0, 0.1, 1).unwrap();
        let mut last = -1.0;
        for lambda in [2.0, 10.0, 100.0, 1000.0] {
            let d = diagonalize_chain(&FieldConfiguration::uniform(12, lambda), &p).unwrap();
            let z = sigma_z_expectation(&ground_state_covariance(&d).unwrap(), 0).unwrap();
            assert!(z > last && z <= 1.0);
            last = z;
        }
        assert!(1.0 - last < 1e-6);
    }
}
