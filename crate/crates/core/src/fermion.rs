//! Free-fermion dynamics: Bogoliubov diagonalization, Gaussian covariance
//! matrices and the determinant form of the Loschmidt echo.
//!
//! Conventions: the Nambu vector is `Psi = (c^dag, c)` and the covariance is
//! `C = <Psi Psi^dag>`, whose blocks read `[[<c^dag c>, <c^dag c^dag>],
//! [<c c>, <c c^dag>]]`. Normal modes satisfy `c_i = sum_k g_ik eta_k +
//! h_ik eta_k^dag`, so a positive-energy eigenvector of the single-particle
//! matrix is the column `(h_k; g_k)` and its particle-hole partner
//! `(g_k; h_k)` carries energy `-e_k`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::lattice::{
    channel_fields, chain_hamiltonian, single_defect_fields, Channel, FieldConfiguration,
    QuenchProtocol, Stage,
};

/// Single-particle energies below this magnitude are treated as zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-12;

/// Echo values above `1 + ECHO_OVERSHOOT_TOL` signal an inconsistent pipeline.
pub const ECHO_OVERSHOOT_TOL: f64 = 1e-6;

/// Eigen-decomposition of a `2N x 2N` single-particle matrix arranged in
/// particle-hole pairs.
#[derive(Debug, Clone)]
pub struct BdgDecomposition {
    /// All `2N` eigenvalues in ascending order: `-e_{N-1} .. -e_0, e_0 .. e_{N-1}`.
    energies: DVector<f64>,
    /// Orthogonal matrix whose column `a` is the eigenvector of `energies[a]`.
    modes: DMatrix<f64>,
    /// Bogoliubov blocks; column `k` belongs to the positive energy `e_k`.
    g: DMatrix<f64>,
    h: DMatrix<f64>,
}

impl BdgDecomposition {
    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    /// Non-negative single-particle energies `e_k`, ascending.
    pub fn mode_energies(&self) -> DVector<f64> {
        self.energies.rows(self.n(), self.n()).into_owned()
    }

    pub fn modes(&self) -> &DMatrix<f64> {
        &self.modes
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Ground-state energy `-1/2 sum_k e_k` of `1/2 Psi^dag H Psi`.
    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.mode_energies().sum()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.modes.clone();
        for (mut col, &e) in scaled.column_iter_mut().zip(self.energies.iter()) {
            col *= e;
        }
        scaled * self.modes.transpose()
    }
}

fn swap_halves(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len() / 2;
    DVector::from_fn(2 * n, |i, _| v[(i + n) % (2 * n)])
}

/// Fixes the sign so that the largest-magnitude component is positive and
/// returns the index of that component.
fn canonicalize(v: &mut DVector<f64>) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
    best
}

/// Modified Gram-Schmidt with rank detection.
fn orthonormal_basis(vectors: impl IntoIterator<Item = DVector<f64>>) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for mut v in vectors {
        for b in &basis {
            let overlap = b.dot(&v);
            v.axpy(-overlap, b, 1.0);
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    basis
}

/// Builds zero-energy columns `(a + b)/sqrt(2)` from the kernel, with `a`
/// even and `b` odd under the block swap, so that every column is orthogonal
/// to its own particle-hole partner.
fn balanced_zero_modes(kernel: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    let even = orthonormal_basis(kernel.iter().map(|v| (v + swap_halves(v)) * 0.5));
    let odd = orthonormal_basis(kernel.iter().map(|v| (v - swap_halves(v)) * 0.5));
    if even.len() != odd.len() || even.len() * 2 != kernel.len() {
        return Err(Error::UnbalancedZeroModes {
            plus: even.len(),
            minus: odd.len(),
        });
    }
    Ok(even
        .iter()
        .zip(&odd)
        .map(|(a, b)| (a + b) * std::f64::consts::FRAC_1_SQRT_2)
        .collect())
}

/// Diagonalizes a real symmetric single-particle matrix.
///
/// Positive-energy eigenvectors come from the eigensolver; their partners are
/// generated by swapping the two blocks, which makes the particle-hole
/// pairing exact even inside degenerate subspaces. Ties in energy are broken
/// by the index of the largest component.
pub fn diagonalize(hamiltonian: &DMatrix<f64>) -> Result<BdgDecomposition> {
    let dim = hamiltonian.nrows();
    if dim == 0 || dim != hamiltonian.ncols() || !dim.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "single-particle matrix must be square with even dimension, got {}x{}",
            hamiltonian.nrows(),
            hamiltonian.ncols()
        )));
    }
    let scale = hamiltonian.amax().max(1.0);
    if (hamiltonian - hamiltonian.transpose()).amax() > 1e-12 * scale {
        return Err(Error::InvalidInput("single-particle matrix is not symmetric".into()));
    }
    let n = dim / 2;

    let eig = symmetric_eigen(hamiltonian)?;

    let mut positive: Vec<(f64, usize, DVector<f64>)> = Vec::with_capacity(n);
    let mut kernel = Vec::new();
    for (e, col) in eig.values.iter().zip(eig.vectors.column_iter()) {
        let mut v = col.into_owned();
        if e.abs() < ZERO_MODE_TOL {
            kernel.push(v);
        } else if *e > 0.0 {
            let lead = canonicalize(&mut v);
            positive.push((*e, lead, v));
        }
    }

    let mut pairs: Vec<(f64, usize, DVector<f64>)> = Vec::with_capacity(n);
    if !kernel.is_empty() {
        warn!(
            "{} zero-energy single-particle modes; assigning them to the empty side",
            kernel.len() / 2
        );
        for mut v in balanced_zero_modes(&kernel)? {
            let lead = canonicalize(&mut v);
            pairs.push((0.0, lead, v));
        }
    }
    pairs.extend(positive);
    if pairs.len() != n {
        return Err(Error::UnbalancedZeroModes {
            plus: pairs.len(),
            minus: dim - pairs.len(),
        });
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut energies = DVector::zeros(dim);
    let mut modes = DMatrix::zeros(dim, dim);
    let mut g = DMatrix::zeros(n, n);
    let mut h = DMatrix::zeros(n, n);
    for (k, (e, _, v)) in pairs.iter().enumerate() {
        energies[n + k] = *e;
        energies[n - 1 - k] = -*e;
        modes.set_column(n + k, v);
        modes.set_column(n - 1 - k, &swap_halves(v));
        h.set_column(k, &v.rows(0, n));
        g.set_column(k, &v.rows(n, n));
    }
    Ok(BdgDecomposition { energies, modes, g, h })
}

/// Diagonalizes the chain with the given fields.
pub fn diagonalize_chain(
    fields: &FieldConfiguration,
    protocol: &QuenchProtocol,
) -> Result<BdgDecomposition> {
    diagonalize(&chain_hamiltonian(fields, protocol.j, protocol.boundary)?)
}

/// Two-point function `<Psi Psi^dag>` of a Gaussian state.
///
/// The imaginary part is absent for real covariances such as ground states.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    re: DMatrix<f64>,
    im: Option<DMatrix<f64>>,
}

impl CovarianceMatrix {
    pub fn from_real(re: DMatrix<f64>) -> Result<Self> {
        Self::from_parts(re, None)
    }

    pub fn from_parts(re: DMatrix<f64>, im: Option<DMatrix<f64>>) -> Result<Self> {
        let dim = re.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || re.ncols() != dim {
            return Err(Error::InvalidInput(format!(
                "covariance must be 2N x 2N, got {}x{}",
                re.nrows(),
                re.ncols()
            )));
        }
        if let Some(im) = &im {
            if im.shape() != re.shape() {
                return Err(Error::InvalidInput("real and imaginary parts differ in shape".into()));
            }
        }
        Ok(CovarianceMatrix { re, im })
    }

    /// Fully polarized state `|up up ... up>`: every mode occupied.
    pub fn polarized(n: usize) -> Self {
        let mut re = DMatrix::zeros(2 * n, 2 * n);
        re.view_mut((0, 0), (n, n)).fill_with_identity();
        CovarianceMatrix { re, im: None }
    }

    pub fn n(&self) -> usize {
        self.re.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> Option<&DMatrix<f64>> {
        self.im.as_ref()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        Complex64::new(
            self.re[(row, col)],
            self.im.as_ref().map_or(0.0, |im| im[(row, col)]),
        )
    }

    /// `<c_i^dag c_j>`
    pub fn hopping(&self, i: usize, j: usize) -> Complex64 {
        self.get(i, j)
    }

    /// `<c_i^dag c_j^dag>`
    pub fn anomalous_dag(&self, i: usize, j: usize) -> Complex64 {
        self.get(i, self.n() + j)
    }

    /// `<c_i c_j>`
    pub fn anomalous(&self, i: usize, j: usize) -> Complex64 {
        let n = self.n();
        self.get(n + i, j)
    }

    /// `<c_i c_j^dag>`
    pub fn hole(&self, i: usize, j: usize) -> Complex64 {
        let n = self.n();
        self.get(n + i, n + j)
    }

    pub fn trace(&self) -> f64 {
        self.re.trace()
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match &self.im {
            Some(im) => self.re.zip_map(im, Complex64::new),
            None => self.re.map(|x| Complex64::new(x, 0.0)),
        }
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let re = (&self.re - self.re.transpose()).amax();
        let im = self.im.as_ref().map_or(0.0, |im| (im + im.transpose()).amax());
        re.max(im)
    }

    /// Eigenvalues (ascending) of the Hermitian covariance, via the real
    /// symmetric embedding `[[Re, -Im], [Im, Re]]` whose spectrum is that of
    /// `C` with every value doubled.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let dim = self.dim();
        let mut emb = DMatrix::zeros(2 * dim, 2 * dim);
        emb.view_mut((0, 0), (dim, dim)).copy_from(&self.re);
        emb.view_mut((dim, dim), (dim, dim)).copy_from(&self.re);
        if let Some(im) = &self.im {
            emb.view_mut((dim, 0), (dim, dim)).copy_from(im);
            emb.view_mut((0, dim), (dim, dim)).copy_from(&(-im));
        }
        let emb = (&emb + emb.transpose()) * 0.5;
        let mut vals: Vec<f64> = symmetric_eigen(&emb)?.values.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals.into_iter().step_by(2).collect())
    }

    fn hermitize(mut self) -> Self {
        self.re = (&self.re + self.re.transpose()) * 0.5;
        if let Some(im) = &mut self.im {
            *im = (&*im - im.transpose()) * 0.5;
        }
        self
    }
}

/// Ground-state covariance: the projector onto the positive-energy modes.
pub fn ground_state_covariance(decomp: &BdgDecomposition) -> Result<CovarianceMatrix> {
    let n = decomp.n();
    if let Some(&e) = decomp.mode_energies().iter().find(|e| e.abs() < ZERO_MODE_TOL) {
        return Err(Error::AmbiguousVacuum { energy: e });
    }
    let filled = decomp.modes.columns(n, n);
    let re = filled * filled.transpose();
    CovarianceMatrix::from_real((&re + re.transpose()) * 0.5)
}

/// Single-particle propagator `exp(-i H t) = U exp(-i Lambda t) U^T`, stored
/// as real and imaginary parts. It is complex symmetric because `U` is real.
#[derive(Debug, Clone)]
pub struct Propagator {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl Propagator {
    pub fn new(decomp: &BdgDecomposition, t: f64) -> Self {
        let u = &decomp.modes;
        let mut cos_u = u.clone();
        let mut sin_u = u.clone();
        for (k, &e) in decomp.energies.iter().enumerate() {
            let (s, c) = (e * t).sin_cos();
            cos_u.column_mut(k).scale_mut(c);
            sin_u.column_mut(k).scale_mut(-s);
        }
        Propagator {
            re: cos_u * u.transpose(),
            im: sin_u * u.transpose(),
        }
    }

    /// `W C W^dag`.
    pub fn conjugate(&self, c: &CovarianceMatrix) -> CovarianceMatrix {
        let (wr, wi) = (&self.re, &self.im);
        let (xr, xi) = match &c.im {
            None => (wr * &c.re, wi * &c.re),
            Some(ci) => (wr * &c.re - wi * ci, wr * ci + wi * &c.re),
        };
        // W^dag = conj(W) because W is symmetric.
        let re = &xr * wr + &xi * wi;
        let im = &xi * wr - &xr * wi;
        CovarianceMatrix { re, im: Some(im) }.hermitize()
    }
}

/// `C(t) = exp(-iHt) C(0) exp(iHt)` using the spectral decomposition of `H`.
pub fn evolve_covariance(c0: &CovarianceMatrix, decomp: &BdgDecomposition, t: f64) -> CovarianceMatrix {
    if t == 0.0 {
        return c0.clone();
    }
    let ct = Propagator::new(decomp, t).conjugate(c0);
    debug_assert!(
        (ct.trace() - c0.trace()).abs() < 1e-8 * c0.dim() as f64,
        "trace not conserved under evolution"
    );
    ct
}

/// `ln |det M|` via LU with partial pivoting, or `None` when a pivot
/// vanishes exactly.
pub fn log_abs_det(m: &DMatrix<Complex64>) -> Option<f64> {
    crate::linalg::log_abs_det(m)
}

/// `L = |det(1 - C_dd - C_uu)|^{1/2}`.
pub fn loschmidt_echo(c_dd: &CovarianceMatrix, c_uu: &CovarianceMatrix) -> Result<f64> {
    if c_dd.dim() != c_uu.dim() {
        return Err(Error::InvalidInput(format!(
            "covariance dimensions differ: {} vs {}",
            c_dd.dim(),
            c_uu.dim()
        )));
    }
    let dim = c_dd.dim();
    // Form the sum first so that the result is symmetric in its arguments.
    let sum_re = &c_dd.re + &c_uu.re;
    let sum_im = match (&c_dd.im, &c_uu.im) {
        (Some(a), Some(b)) => Some(a + b),
        (Some(a), None) | (None, Some(a)) => Some(a.clone()),
        (None, None) => None,
    };
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::new(
            delta - sum_re[(i, j)],
            -sum_im.as_ref().map_or(0.0, |im| im[(i, j)]),
        )
    });
    echo_from_matrix(m)
}

/// `|det M|^{1/2}` with the singular and overshoot policies of the echo.
fn echo_from_matrix(m: DMatrix<Complex64>) -> Result<f64> {
    let value = match log_abs_det(&m) {
        Some(log_det) => (0.5 * log_det).exp(),
        None => {
            warn!("1 - C_dd - C_uu is exactly singular; echo is zero");
            0.0
        }
    };
    if !(value <= 1.0 + ECHO_OVERSHOOT_TOL) {
        return Err(Error::EchoOutOfRange { value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Echo time series for one protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoSeries {
    pub times: Vec<f64>,
    pub echo: Vec<f64>,
    pub protocol: QuenchProtocol,
}

impl EchoSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Concurrence `sqrt(L)` of the qubit pair.
    pub fn concurrence(&self) -> Vec<f64> {
        self.echo.iter().map(|l| l.sqrt()).collect()
    }
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidInput("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("times must be strictly ascending".into()));
    }
    Ok(())
}

/// Cached state of one quench: the initial covariance and the two post-quench
/// channel decompositions. Each diagonalization happens once.
#[derive(Debug, Clone)]
pub struct QuenchDynamics {
    protocol: QuenchProtocol,
    initial: CovarianceMatrix,
    down: BdgDecomposition,
    up: BdgDecomposition,
    kernel: EchoKernel,
}

/// The echo matrix rotated into the down-channel eigenbasis:
/// `1 - P_d X_d P_d^* - O P_u X_u P_u^* O^T`, with `X = U^T C(0) U`,
/// `O = U_d^T U_u` and `P = exp(-i E t)` diagonal. Only the phases depend on
/// time, so each time point costs four real products and one LU.
#[derive(Debug, Clone)]
struct EchoKernel {
    x_down_re: DMatrix<f64>,
    x_down_im: Option<DMatrix<f64>>,
    x_up_re: DMatrix<f64>,
    x_up_im: Option<DMatrix<f64>>,
    overlap: DMatrix<f64>,
}

impl EchoKernel {
    fn new(initial: &CovarianceMatrix, down: &BdgDecomposition, up: &BdgDecomposition) -> Self {
        let rotate = |u: &DMatrix<f64>| {
            let re = u.transpose() * &initial.re * u;
            let im = initial.im.as_ref().map(|im| u.transpose() * im * u);
            (re, im)
        };
        let (x_down_re, x_down_im) = rotate(&down.modes);
        let (x_up_re, x_up_im) = rotate(&up.modes);
        EchoKernel {
            x_down_re,
            x_down_im,
            x_up_re,
            x_up_im,
            overlap: down.modes.transpose() * &up.modes,
        }
    }

    /// `X_kl exp(-i (E_k - E_l) t)` as real and imaginary parts.
    fn phased(
        re: &DMatrix<f64>,
        im: Option<&DMatrix<f64>>,
        energies: &DVector<f64>,
        t: f64,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        let dim = re.nrows();
        let phases: Vec<(f64, f64)> = energies.iter().map(|e| (e * t).sin_cos()).collect();
        let mut out_re = DMatrix::zeros(dim, dim);
        let mut out_im = DMatrix::zeros(dim, dim);
        for l in 0..dim {
            let (sl, cl) = phases[l];
            for k in 0..dim {
                let (sk, ck) = phases[k];
                // exp(-i (E_k - E_l) t) = (ck cl + sk sl) - i (sk cl - ck sl)
                let (pr, pi) = (ck * cl + sk * sl, -(sk * cl - ck * sl));
                let (xr, xi) = (re[(k, l)], im.map_or(0.0, |m| m[(k, l)]));
                out_re[(k, l)] = xr * pr - xi * pi;
                out_im[(k, l)] = xr * pi + xi * pr;
            }
        }
        (out_re, out_im)
    }

    fn echo(&self, down: &BdgDecomposition, up: &BdgDecomposition, t: f64) -> Result<f64> {
        let (a_re, a_im) = Self::phased(&self.x_down_re, self.x_down_im.as_ref(), &down.energies, t);
        let (b_re, b_im) = Self::phased(&self.x_up_re, self.x_up_im.as_ref(), &up.energies, t);
        let o = &self.overlap;
        let ot = o.transpose();
        let b_re = o * b_re * &ot;
        let b_im = o * b_im * &ot;
        let dim = o.nrows();
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            Complex64::new(delta - a_re[(i, j)] - b_re[(i, j)], -a_im[(i, j)] - b_im[(i, j)])
        });
        echo_from_matrix(m)
    }
}

impl QuenchDynamics {
    /// Both qubits coupled, at sites `0` and `d`.
    pub fn new(protocol: &QuenchProtocol) -> Result<Self> {
        let up = channel_fields(protocol, Channel::UpUp, Stage::PostQuench);
        Self::with_up_fields(protocol, &up, None)
    }

    /// One qubit coupled at site 0; `d` is ignored.
    pub fn single_defect(protocol: &QuenchProtocol) -> Result<Self> {
        Self::with_up_fields(protocol, &single_defect_fields(protocol), None)
    }

    /// Both qubits coupled, starting from an arbitrary initial covariance.
    pub fn with_initial(protocol: &QuenchProtocol, initial: CovarianceMatrix) -> Result<Self> {
        let up = channel_fields(protocol, Channel::UpUp, Stage::PostQuench);
        Self::with_up_fields(protocol, &up, Some(initial))
    }

    fn with_up_fields(
        protocol: &QuenchProtocol,
        up_fields: &FieldConfiguration,
        initial: Option<CovarianceMatrix>,
    ) -> Result<Self> {
        protocol.validate()?;
        let initial = match initial {
            Some(c) if c.n() != protocol.n => {
                return Err(Error::InvalidInput(format!(
                    "initial covariance has N = {}, protocol has N = {}",
                    c.n(),
                    protocol.n
                )))
            }
            Some(c) => c,
            None => {
                let pre = channel_fields(protocol, Channel::DownDown, Stage::PreQuench);
                ground_state_covariance(&diagonalize_chain(&pre, protocol)?)?
            }
        };
        let down_fields = channel_fields(protocol, Channel::DownDown, Stage::PostQuench);
        let down = diagonalize_chain(&down_fields, protocol)?;
        let up = diagonalize_chain(up_fields, protocol)?;
        let kernel = EchoKernel::new(&initial, &down, &up);
        Ok(QuenchDynamics { protocol: *protocol, initial, down, up, kernel })
    }

    pub fn protocol(&self) -> &QuenchProtocol {
        &self.protocol
    }

    pub fn initial(&self) -> &CovarianceMatrix {
        &self.initial
    }

    pub fn down(&self) -> &BdgDecomposition {
        &self.down
    }

    pub fn up(&self) -> &BdgDecomposition {
        &self.up
    }

    pub fn echo_at(&self, t: f64) -> Result<f64> {
        if self.protocol.epsilon == 0.0 {
            // Identical channels: the overlap is the norm of the state.
            return Ok(1.0);
        }
        self.kernel.echo(&self.down, &self.up, t)
    }

    /// The echo through explicitly evolved covariances; slower than
    /// [`QuenchDynamics::echo_at`] and kept as its cross-check.
    pub fn echo_at_direct(&self, t: f64) -> Result<f64> {
        let c_dd = evolve_covariance(&self.initial, &self.down, t);
        let c_uu = evolve_covariance(&self.initial, &self.up, t);
        loschmidt_echo(&c_dd, &c_uu)
    }

    pub fn series(&self, times: &[f64]) -> Result<EchoSeries> {
        validate_times(times)?;
        let echo = times.iter().map(|&t| self.echo_at(t)).collect::<Result<Vec<_>>>()?;
        Ok(EchoSeries {
            times: times.to_vec(),
            echo,
            protocol: self.protocol,
        })
    }
}

/// Echo `L(t)` of the two-qubit protocol on the given time grid.
pub fn echo_timeseries(protocol: &QuenchProtocol, times: &[f64]) -> Result<EchoSeries> {
    QuenchDynamics::new(protocol)?.series(times)
}

/// Echo of a single qubit coupled at site 0 with strength `epsilon`.
pub fn single_defect_echo(protocol: &QuenchProtocol, times: &[f64]) -> Result<EchoSeries> {
    QuenchDynamics::single_defect(protocol)?.series(times)
}

/// Echo at a fixed time for many initial states sharing the post-quench
/// channels. Conjugating by the down-channel propagator leaves
/// `|det(1 - C - M C M^dag)|` with `M = W_d^dag W_u`, built once.
#[derive(Debug, Clone)]
pub struct FixedTimeEcho {
    m_re: DMatrix<f64>,
    m_im: DMatrix<f64>,
}

impl FixedTimeEcho {
    pub fn new(protocol: &QuenchProtocol, t: f64) -> Result<Self> {
        protocol.validate()?;
        let down = channel_fields(protocol, Channel::DownDown, Stage::PostQuench);
        let up = channel_fields(protocol, Channel::UpUp, Stage::PostQuench);
        let wd = Propagator::new(&diagonalize_chain(&down, protocol)?, t);
        let wu = Propagator::new(&diagonalize_chain(&up, protocol)?, t);
        // W_d^dag = conj(W_d) since W_d is complex symmetric.
        Ok(FixedTimeEcho {
            m_re: &wd.re * &wu.re + &wd.im * &wu.im,
            m_im: &wd.re * &wu.im - &wd.im * &wu.re,
        })
    }

    pub fn echo(&self, initial: &CovarianceMatrix) -> Result<f64> {
        if initial.dim() != self.m_re.nrows() {
            return Err(Error::InvalidInput(format!(
                "initial covariance has dimension {}, propagators have {}",
                initial.dim(),
                self.m_re.nrows()
            )));
        }
        let (mr, mi) = (&self.m_re, &self.m_im);
        let (xr, xi) = match &initial.im {
            None => (mr * &initial.re, mi * &initial.re),
            Some(ci) => (mr * &initial.re - mi * ci, mr * ci + mi * &initial.re),
        };
        // M^dag = M_re^T - i M_im^T
        let re = &xr * mr.transpose() + &xi * mi.transpose();
        let im = &xi * mr.transpose() - &xr * mi.transpose();
        let moved = CovarianceMatrix { re, im: Some(im) }.hermitize();
        loschmidt_echo(initial, &moved)
    }
}

/// Ground-state covariance of the uniform chain at field `lambda`.
pub fn uniform_ground_state(protocol: &QuenchProtocol, lambda: f64) -> Result<CovarianceMatrix> {
    let fields = FieldConfiguration::uniform(protocol.n, lambda);
    ground_state_covariance(&diagonalize_chain(&fields, protocol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_coupling_matrices, build_single_particle_hamiltonian, Boundary};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn tfim(n: usize, lambda: f64, boundary: Boundary) -> DMatrix<f64> {
        chain_hamiltonian(&FieldConfiguration::uniform(n, lambda), 1.0, boundary).unwrap()
    }

    fn dispersion(n: usize, lambda: f64) -> Vec<f64> {
        let mut e: Vec<f64> = (0..n)
            .map(|m| {
                let k = PI * (2 * m + 1) as f64 / n as f64;
                2.0 * (lambda * lambda - 2.0 * lambda * k.cos() + 1.0).sqrt()
            })
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn check_invariants(h: &DMatrix<f64>, d: &BdgDecomposition) {
        let dim = h.nrows();
        let u = d.modes();
        assert!((u.transpose() * u - DMatrix::identity(dim, dim)).amax() < 1e-10);
        assert!((d.reconstruct() - h).amax() < 1e-10);
        let n = d.n();
        let block = DMatrix::from_fn(dim, n, |i, k| {
            if i < n {
                d.h()[(i, k)]
            } else {
                d.g()[(i - n, k)]
            }
        });
        assert!((u.columns(n, n) - &block).amax() < 1e-8);
        for k in 0..n {
            let partner = swap_halves(&u.column(n + k).into_owned());
            assert!((u.column(n - 1 - k) - partner).amax() < 1e-8);
        }
    }

    #[test]
    fn one_mode_matrix() {
        let h = DMatrix::from_row_slice(2, 2, &[-0.8, 0.0, 0.0, 0.8]);
        let d = diagonalize(&h).unwrap();
        assert_eq!(d.energies().as_slice(), &[-0.8, 0.8]);
        assert_abs_diff_eq!(d.modes().clone(), DMatrix::identity(2, 2), epsilon = 1e-15);
        check_invariants(&h, &d);
    }

    #[test]
    fn tfim_energies_match_dispersion() {
        let h = tfim(8, 1.5, Boundary::PeriodicSpin);
        let d = diagonalize(&h).unwrap();
        check_invariants(&h, &d);
        for (got, want) in d.mode_energies().iter().zip(dispersion(8, 1.5)) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn rejects_malformed_matrices() {
        assert!(diagonalize(&DMatrix::zeros(3, 3)).is_err());
        assert!(diagonalize(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn zero_modes_are_paired() {
        // Open chain at zero field hosts one pair of edge zero modes.
        let h = tfim(6, 0.0, Boundary::Open);
        let d = diagonalize(&h).unwrap();
        check_invariants(&h, &d);
        assert!(d.mode_energies()[0].abs() < ZERO_MODE_TOL);
        assert!(matches!(
            ground_state_covariance(&d),
            Err(Error::AmbiguousVacuum { .. })
        ));

        let d = diagonalize(&DMatrix::zeros(6, 6)).unwrap();
        check_invariants(&DMatrix::zeros(6, 6), &d);
    }

    #[test]
    fn polarized_limit() {
        let cm = build_coupling_matrices(&FieldConfiguration::uniform(5, 0.7), 0.0, Boundary::Open)
            .unwrap();
        let d = diagonalize(&build_single_particle_hamiltonian(&cm)).unwrap();
        let c0 = ground_state_covariance(&d).unwrap();
        assert_abs_diff_eq!(c0.re().clone(), CovarianceMatrix::polarized(5).re().clone(), epsilon = 1e-15);
    }

    #[test]
    fn ground_state_is_pure() {
        for lambda in [0.3, 1.0, 1.7] {
            let c0 = ground_state_covariance(&diagonalize(&tfim(10, lambda, Boundary::PeriodicSpin)).unwrap())
                .unwrap();
            assert!(c0.hermiticity_error() < 1e-12);
            assert_abs_diff_eq!(c0.trace(), 10.0, epsilon = 1e-8);
            for ev in c0.spectrum().unwrap() {
                assert!(ev.abs() < 1e-8 || (ev - 1.0).abs() < 1e-8, "eigenvalue {ev}");
            }
        }
    }

    #[test]
    fn evolution_at_zero_time_is_identity() {
        let c0 = ground_state_covariance(&diagonalize(&tfim(6, 1.5, Boundary::PeriodicSpin)).unwrap()).unwrap();
        let d = diagonalize(&tfim(6, 0.5, Boundary::PeriodicSpin)).unwrap();
        assert_eq!(evolve_covariance(&c0, &d, 0.0), c0);
        let tiny = Propagator::new(&d, 0.0).conjugate(&c0);
        assert!((tiny.re() - c0.re()).amax() < 1e-12);
    }

    #[test]
    fn evolution_preserves_spectrum() {
        let c0 = ground_state_covariance(&diagonalize(&tfim(6, 1.5, Boundary::PeriodicSpin)).unwrap()).unwrap();
        let fields = FieldConfiguration::new(vec![0.9, 0.5, 0.5, 0.9, 0.5, 0.5]);
        let d = diagonalize(&chain_hamiltonian(&fields, 1.0, Boundary::PeriodicSpin).unwrap()).unwrap();
        let before = c0.spectrum().unwrap();
        for t in [0.3, 2.0, 17.0] {
            let ct = evolve_covariance(&c0, &d, t);
            assert!(ct.hermiticity_error() < 1e-10);
            for (a, b) in ct.spectrum().unwrap().iter().zip(&before) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn echo_symmetric_and_bounded() {
        let p = QuenchProtocol::new(8, 1.2, 0.4, 0.7, 3).unwrap();
        let dyn_ = QuenchDynamics::new(&p).unwrap();
        let c_dd = evolve_covariance(dyn_.initial(), dyn_.down(), 1.3);
        let c_uu = evolve_covariance(dyn_.initial(), dyn_.up(), 1.3);
        let a = loschmidt_echo(&c_dd, &c_uu).unwrap();
        let b = loschmidt_echo(&c_uu, &c_dd).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a));
        assert_abs_diff_eq!(loschmidt_echo(&c_dd, &c_dd).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn echo_rejects_mismatched_dimensions() {
        let a = CovarianceMatrix::polarized(2);
        let b = CovarianceMatrix::polarized(3);
        assert!(loschmidt_echo(&a, &b).is_err());
    }

    #[test]
    fn singular_overlap_reports_zero() {
        // Fully occupied vs fully empty: orthogonal states.
        let full = CovarianceMatrix::polarized(3);
        let mut empty = DMatrix::zeros(6, 6);
        empty.view_mut((3, 3), (3, 3)).fill_with_identity();
        let empty = CovarianceMatrix::from_real(empty).unwrap();
        assert_eq!(loschmidt_echo(&full, &empty).unwrap(), 0.0);
    }

    #[test]
    fn overshoot_is_an_error() {
        let mut bad = DMatrix::zeros(2, 2);
        bad[(0, 0)] = -1.0;
        let bad = CovarianceMatrix::from_real(bad).unwrap();
        let zero = CovarianceMatrix::from_real(DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(
            loschmidt_echo(&bad, &zero),
            Err(Error::EchoOutOfRange { .. })
        ));
    }

    #[test]
    fn series_examples() {
        let times: Vec<f64> = (0..20).map(|i| 0.5 * i as f64).collect();
        let p = QuenchProtocol::new(10, 1.3, 0.6, 0.0, 2).unwrap();
        let s = echo_timeseries(&p, &times).unwrap();
        assert!(s.echo.iter().all(|&l| l == 1.0));
        let s = single_defect_echo(&p, &times).unwrap();
        assert!(s.echo.iter().all(|&l| l == 1.0));

        let p = QuenchProtocol::new(10, 1.3, 0.6, 0.4, 2).unwrap();
        let s = echo_timeseries(&p, &times).unwrap();
        assert_abs_diff_eq!(s.echo[0], 1.0, epsilon = 1e-10);
        assert!(s.echo[1..].iter().all(|&l| l < 1.0));
        let single = single_defect_echo(&p, &times).unwrap();
        assert_abs_diff_eq!(single.echo[0], 1.0, epsilon = 1e-10);

        assert!(echo_timeseries(&p, &[1.0, 0.5]).is_err());
        assert!(echo_timeseries(&p, &[-1.0]).is_err());
    }

    #[test]
    fn rotated_echo_matches_direct_evolution() {
        let p = QuenchProtocol::new(12, 0.8, 1.4, 2.5, 5).unwrap();
        let q = QuenchDynamics::new(&p).unwrap();
        for t in [0.0, 0.3, 1.7, 9.0, 40.0] {
            assert_abs_diff_eq!(q.echo_at(t).unwrap(), q.echo_at_direct(t).unwrap(), epsilon = 1e-11);
        }
        let q = QuenchDynamics::with_initial(&p, CovarianceMatrix::polarized(12)).unwrap();
        assert_abs_diff_eq!(q.echo_at(2.0).unwrap(), q.echo_at_direct(2.0).unwrap(), epsilon = 1e-11);
    }

    #[test]
    fn fixed_time_echo_matches_dynamics() {
        let p = QuenchProtocol::new(10, 0.0, 0.7, 0.3, 3).unwrap();
        let fixed = FixedTimeEcho::new(&p, 4.0).unwrap();
        for lambda in [0.4, 1.0, 2.2] {
            let c0 = uniform_ground_state(&p, lambda).unwrap();
            let want = QuenchDynamics::with_initial(&p, c0.clone()).unwrap().echo_at_direct(4.0).unwrap();
            assert_abs_diff_eq!(fixed.echo(&c0).unwrap(), want, epsilon = 1e-11);
        }
        let polarized = CovarianceMatrix::polarized(10);
        let want = QuenchDynamics::with_initial(&p, polarized.clone()).unwrap().echo_at_direct(4.0).unwrap();
        assert_abs_diff_eq!(fixed.echo(&polarized).unwrap(), want, epsilon = 1e-11);
        assert!(fixed.echo(&CovarianceMatrix::polarized(8)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn spectrum_symmetric_about_zero(
            fields in prop::collection::vec(0.0f64..3.0, 2..9),
            j in 0.1f64..2.0,
            periodic in any::<bool>(),
        ) {
            let n = fields.len();
            let boundary = if periodic && n % 2 == 0 { Boundary::PeriodicSpin } else { Boundary::Open };
            let h = chain_hamiltonian(&FieldConfiguration::new(fields), j, boundary).unwrap();
            let mut ev: Vec<f64> = crate::linalg::symmetric_eigen(&h).unwrap().values.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            let scale = ev.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for k in 0..2 * n {
                prop_assert!((ev[k] + ev[2 * n - 1 - k]).abs() <= 1e-10 * scale);
            }
            let d = diagonalize(&h).unwrap();
            prop_assert!((d.reconstruct() - &h).amax() < 1e-10 * scale);
        }

        #[test]
        fn echo_stays_in_unit_interval(
            lambda_i in 0.2f64..2.0,
            lambda_f in 0.2f64..2.0,
            epsilon in 0.05f64..20.0,
            d in 0usize..8,
            t in 0.0f64..10.0,
        ) {
            let p = QuenchProtocol::new(8, lambda_i, lambda_f, epsilon, d).unwrap();
            let l = QuenchDynamics::new(&p).unwrap().echo_at(t).unwrap();
            prop_assert!((0.0..=1.0).contains(&l));
        }

        #[test]
        fn reflection_symmetry(
            lambda_i in 0.2f64..2.0,
            lambda_f in 0.2f64..2.0,
            epsilon in 0.05f64..5.0,
            d in 1usize..10,
            t in 0.0f64..10.0,
        ) {
            let p = QuenchProtocol::new(10, lambda_i, lambda_f, epsilon, d).unwrap();
            let q = QuenchProtocol { d: 10 - d, ..p };
            let a = QuenchDynamics::new(&p).unwrap().echo_at(t).unwrap();
            let b = QuenchDynamics::new(&q).unwrap().echo_at(t).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn zero_coupling_echo_is_one_through_determinant(
            lambda_i in 0.2f64..2.0,
            lambda_f in 0.2f64..2.0,
            t in 0.0f64..10.0,
        ) {
            let p = QuenchProtocol::new(8, lambda_i, lambda_f, 0.0, 3).unwrap();
            let dy = QuenchDynamics::new(&p).unwrap();
            let c = evolve_covariance(dy.initial(), dy.down(), t);
            let c_up = evolve_covariance(dy.initial(), dy.up(), t);
            prop_assert!((loschmidt_echo(&c, &c_up).unwrap() - 1.0).abs() < 1e-8);
        }
    }
}
