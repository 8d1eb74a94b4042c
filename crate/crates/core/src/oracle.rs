//! Brute-force reference: the spin Hamiltonian as a dense `2^N x 2^N` matrix.
//!
//! Basis states are bit strings; bit `j` set means `Z_j = +1`. The qubits are
//! never part of the Hilbert space: each channel is a separate chain
//! Hamiltonian and the echo is the overlap of the two evolved chain states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::lattice::{
    channel_fields, Boundary, Channel, FieldConfiguration, QuenchProtocol, Stage,
};

/// Largest chain accepted for single diagonalizations.
pub const MAX_SITES: usize = 12;
/// Largest chain accepted for echo evaluation (two channel diagonalizations).
pub const MAX_ECHO_SITES: usize = 10;

/// Gap below which the ground state is reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

fn guard(what: &'static str, n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::SizeGuard { what, n, max })
    } else {
        Ok(())
    }
}

/// Real symmetric many-body operator (the Ising Hamiltonian is real in the
/// `Z` basis).
#[derive(Debug, Clone)]
pub struct ManyBodyOperator {
    n: usize,
    matrix: DMatrix<f64>,
}

impl ManyBodyOperator {
    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigen(&self) -> Result<SpectralDecomposition> {
        let dim = self.dimension();
        let eig = symmetric_eigen(&self.matrix)?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.values[a].total_cmp(&eig.values[b]));
        let values = DVector::from_iterator(dim, order.iter().map(|&k| eig.values[k]));
        let vectors = DMatrix::from_fn(dim, dim, |i, c| eig.vectors[(i, order[c])]);
        Ok(SpectralDecomposition { values, vectors })
    }
}

/// `H = V diag(E) V^T` with ascending `E`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// `exp(-iHt) |psi>`.
    pub fn evolve(&self, psi: &ManyBodyState, t: f64) -> ManyBodyState {
        let v = &self.vectors;
        let coeffs = DVector::from_iterator(
            v.ncols(),
            v.column_iter().zip(self.values.iter()).map(|(col, &e)| {
                let proj: Complex64 = col
                    .iter()
                    .zip(psi.amplitudes.iter())
                    .map(|(&c, a)| a * c)
                    .sum();
                proj * Complex64::from_polar(1.0, -e * t)
            }),
        );
        let amplitudes = DVector::from_fn(v.nrows(), |i, _| {
            v.row(i).iter().zip(coeffs.iter()).map(|(&x, c)| c * x).sum()
        });
        ManyBodyState { n: psi.n, amplitudes }
    }
}

#[derive(Debug, Clone)]
pub struct ManyBodyState {
    n: usize,
    amplitudes: DVector<Complex64>,
}

impl ManyBodyState {
    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`
    pub fn overlap(&self, other: &ManyBodyState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    fn z_value(basis: usize, site: usize) -> f64 {
        if basis >> site & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn sigma_z(&self, site: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| a.norm_sqr() * Self::z_value(b, site))
            .sum()
    }

    pub fn sigma_zz(&self, i: usize, j: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| a.norm_sqr() * Self::z_value(b, i) * Self::z_value(b, j))
            .sum()
    }

    /// Variance of `sum_s w_s Z_s` (a diagonal operator).
    pub fn z_variance(&self, weights: &[(usize, f64)]) -> f64 {
        let (mut m1, mut m2) = (0.0, 0.0);
        for (b, a) in self.amplitudes.iter().enumerate() {
            let v: f64 = weights.iter().map(|&(s, w)| w * Self::z_value(b, s)).sum();
            m1 += a.norm_sqr() * v;
            m2 += a.norm_sqr() * v * v;
        }
        m2 - m1 * m1
    }

    /// Weight of the state outside the parity sector `sign`.
    pub fn parity_leakage(&self, sign: f64) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| parity(*b, self.n) != sign)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Eigenvalue of `prod_j Z_j` if the state lies in one sector.
    pub fn parity(&self) -> Option<f64> {
        [1.0, -1.0]
            .into_iter()
            .find(|&s| self.parity_leakage(s) < 1e-10)
    }
}

fn parity(basis: usize, n: usize) -> f64 {
    // Z_j = -1 on cleared bits.
    if (n - basis.count_ones() as usize).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Dense `-J sum X_j X_{j+1} - sum lambda_j Z_j`.
pub fn build_spin_hamiltonian(
    fields: &FieldConfiguration,
    j: f64,
    boundary: Boundary,
) -> Result<ManyBodyOperator> {
    let n = fields.len();
    guard("dense spin Hamiltonian", n, MAX_SITES)?;
    if n == 0 {
        return Err(Error::InvalidInput("empty chain".into()));
    }
    let dim = 1usize << n;
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut bonds: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|s| (s, s + 1)).collect();
    if boundary == Boundary::PeriodicSpin && n > 1 {
        bonds.push((n - 1, 0));
    }
    for b in 0..dim {
        matrix[(b, b)] = -fields
            .values()
            .iter()
            .enumerate()
            .map(|(s, &l)| l * ManyBodyState::z_value(b, s))
            .sum::<f64>();
        for &(l, r) in &bonds {
            let flipped = b ^ (1 << l) ^ (1 << r);
            matrix[(flipped, b)] -= j;
        }
    }
    Ok(ManyBodyOperator { n, matrix })
}

/// `prod_j Z_j` as a dense diagonal operator.
pub fn parity_operator(n: usize) -> Result<ManyBodyOperator> {
    guard("parity operator", n, MAX_SITES)?;
    let dim = 1usize << n;
    let matrix = DMatrix::from_diagonal(&DVector::from_fn(dim, |b, _| parity(b, n)));
    Ok(ManyBodyOperator { n, matrix })
}

/// Lowest eigenvector with its largest amplitude made real and positive.
pub fn ground_state(op: &ManyBodyOperator) -> Result<ManyBodyState> {
    Ok(ground_state_with_energy(op)?.1)
}

pub fn ground_state_with_energy(op: &ManyBodyOperator) -> Result<(f64, ManyBodyState)> {
    let spectrum = op.eigen()?;
    if spectrum.values.len() > 1 {
        let gap = spectrum.values[1] - spectrum.values[0];
        if gap < DEGENERACY_TOL {
            return Err(Error::DegenerateGroundState { gap });
        }
    }
    let col = spectrum.vectors.column(0);
    let lead = col.iamax();
    let sign = col[lead].signum();
    let amplitudes = col.map(|x| Complex64::new(sign * x, 0.0));
    Ok((spectrum.values[0], ManyBodyState { n: op.n, amplitudes }))
}

/// Ground state of the uniform chain at the protocol's initial field.
pub fn initial_state(p: &QuenchProtocol) -> Result<ManyBodyState> {
    let pre = channel_fields(p, Channel::DownDown, Stage::PreQuench);
    ground_state(&build_spin_hamiltonian(&pre, p.j, p.boundary)?)
}

/// Dense evaluation of a quench: initial state plus both channel spectra.
#[derive(Debug, Clone)]
pub struct OracleQuench {
    initial: ManyBodyState,
    down: SpectralDecomposition,
    up: SpectralDecomposition,
}

impl OracleQuench {
    pub fn new(p: &QuenchProtocol) -> Result<Self> {
        let up = channel_fields(p, Channel::UpUp, Stage::PostQuench);
        Self::with_up_fields(p, &up)
    }

    /// One qubit coupled at site 0.
    pub fn single_defect(p: &QuenchProtocol) -> Result<Self> {
        Self::with_up_fields(p, &crate::lattice::single_defect_fields(p))
    }

    fn with_up_fields(p: &QuenchProtocol, up: &FieldConfiguration) -> Result<Self> {
        p.validate()?;
        guard("oracle echo", p.n, MAX_ECHO_SITES)?;
        let down = channel_fields(p, Channel::DownDown, Stage::PostQuench);
        Ok(OracleQuench {
            initial: initial_state(p)?,
            down: build_spin_hamiltonian(&down, p.j, p.boundary)?.eigen()?,
            up: build_spin_hamiltonian(up, p.j, p.boundary)?.eigen()?,
        })
    }

    pub fn initial(&self) -> &ManyBodyState {
        &self.initial
    }

    pub fn evolve(&self, channel: Channel, t: f64) -> ManyBodyState {
        match channel {
            Channel::DownDown => self.down.evolve(&self.initial, t),
            Channel::UpUp => self.up.evolve(&self.initial, t),
        }
    }

    /// Decoherence factor `<G| e^{iH_dd t} e^{-iH_uu t} |G>`.
    pub fn decoherence(&self, t: f64) -> Complex64 {
        self.evolve(Channel::DownDown, t)
            .overlap(&self.evolve(Channel::UpUp, t))
    }

    pub fn echo(&self, t: f64) -> f64 {
        self.decoherence(t).norm_sqr()
    }
}

/// `|<G| e^{iH_dd t} e^{-iH_uu t} |G>|^2` by dense evolution.
pub fn oracle_echo(p: &QuenchProtocol, t: f64) -> Result<f64> {
    Ok(OracleQuench::new(p)?.echo(t))
}

/// Ground-state variance of `-epsilon (Z_0 + Z_d)` at the initial field.
pub fn oracle_variance(p: &QuenchProtocol) -> Result<f64> {
    p.validate()?;
    guard("oracle variance", p.n, MAX_SITES)?;
    let g = initial_state(p)?;
    Ok(g.z_variance(&[(0, -p.epsilon), (p.d, -p.epsilon)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sorted_spectrum(op: &ManyBodyOperator) -> Vec<f64> {
        op.eigen().unwrap().values.iter().copied().collect()
    }

    #[test]
    fn two_site_bond() {
        let op = build_spin_hamiltonian(&FieldConfiguration::uniform(2, 0.0), 0.7, Boundary::Open).unwrap();
        let ev = sorted_spectrum(&op);
        for (got, want) in ev.iter().zip([-0.7, -0.7, 0.7, 0.7]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_free_spins() {
        let op = build_spin_hamiltonian(&FieldConfiguration::uniform(2, 1.0), 0.0, Boundary::Open).unwrap();
        let ev = sorted_spectrum(&op);
        for (got, want) in ev.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn size_guard() {
        let err = build_spin_hamiltonian(&FieldConfiguration::uniform(13, 1.0), 1.0, Boundary::Open);
        assert!(matches!(err, Err(Error::SizeGuard { .. })));
        let p = QuenchProtocol::new(12, 1.0, 0.5, 0.1, 1).unwrap();
        assert!(matches!(oracle_echo(&p, 1.0), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn polarized_ground_state() {
        let op = build_spin_hamiltonian(&FieldConfiguration::uniform(4, 1.0), 0.0, Boundary::PeriodicSpin)
            .unwrap();
        let g = ground_state(&op).unwrap();
        assert_abs_diff_eq!(g.amplitudes()[15].re, 1.0, epsilon = 1e-12);
        for s in 0..4 {
            assert_abs_diff_eq!(g.sigma_z(s), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_ground_state_reported() {
        let op = build_spin_hamiltonian(&FieldConfiguration::uniform(4, 0.0), 1.0, Boundary::PeriodicSpin)
            .unwrap();
        assert!(matches!(
            ground_state(&op),
            Err(Error::DegenerateGroundState { .. })
        ));
    }

    #[test]
    fn finite_gap_in_ordered_phase() {
        let op = build_spin_hamiltonian(&FieldConfiguration::uniform(8, 0.5), 1.0, Boundary::PeriodicSpin)
            .unwrap();
        let ev = sorted_spectrum(&op);
        assert!(ev[1] - ev[0] > DEGENERACY_TOL);
    }

    #[test]
    fn parity_is_conserved() {
        let n = 6;
        let par = parity_operator(n).unwrap();
        let fields = FieldConfiguration::new(vec![0.7, 1.1, 0.7, 0.7, 1.1, 0.7]);
        for boundary in [Boundary::PeriodicSpin, Boundary::Open] {
            let h = build_spin_hamiltonian(&fields, 1.0, boundary).unwrap();
            let comm = h.matrix() * par.matrix() - par.matrix() * h.matrix();
            assert!(comm.amax() < 1e-12);
        }
        let p = QuenchProtocol::new(n, 0.8, 0.5, 0.3, 2).unwrap();
        assert_eq!(initial_state(&p).unwrap().parity(), Some(1.0));
    }

    #[test]
    fn echo_trivia() {
        let p = QuenchProtocol::new(6, 1.5, 0.5, 0.4, 2).unwrap();
        let q = OracleQuench::new(&p).unwrap();
        assert_abs_diff_eq!(q.echo(0.0), 1.0, epsilon = 1e-12);
        for t in [0.5, 3.0, 9.0] {
            for ch in [Channel::UpUp, Channel::DownDown] {
                assert_abs_diff_eq!(q.evolve(ch, t).norm(), 1.0, epsilon = 1e-10);
            }
            let swapped = q.evolve(Channel::UpUp, t).overlap(&q.evolve(Channel::DownDown, t));
            assert_abs_diff_eq!(swapped.norm_sqr(), q.echo(t), epsilon = 1e-14);
        }
        let flat = QuenchProtocol { epsilon: 0.0, ..p };
        for t in [0.5, 3.0] {
            assert_abs_diff_eq!(oracle_echo(&flat, t).unwrap(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn variance_trivia() {
        let p = QuenchProtocol::new(6, 1.5, 0.5, 0.0, 2).unwrap();
        assert_eq!(oracle_variance(&p).unwrap(), 0.0);
        // J -> 0 limit: product state, zero variance.
        let g = ground_state(
            &build_spin_hamiltonian(&FieldConfiguration::uniform(6, 1.0), 0.0, Boundary::PeriodicSpin).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(g.z_variance(&[(0, -0.3), (2, -0.3)]), 0.0, epsilon = 1e-12);
    }
}
