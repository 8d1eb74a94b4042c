//! Chain geometry, per-site transverse fields and the quadratic fermion form
//! of the transverse-field Ising Hamiltonian
//!
//! ```text
//! H = -J sum_j X_j X_{j+1} - sum_j lambda_j Z_j
//! ```
//!
//! After the Jordan-Wigner mapping (`Z_j = 2 n_j - 1`) the Hamiltonian reads
//! `sum c^dag A c + 1/2 (c^dag B c^dag + h.c.)`, and in the Nambu basis
//! `Psi = (c^dag_0 .. c^dag_{N-1}, c_0 .. c_{N-1})` it is `1/2 Psi^dag H Psi`
//! with `H = [[-A, -B], [B, A]]`. The constant `1/2 tr A + sum lambda_j`
//! vanishes identically, so the spectrum of the quadratic form is the
//! many-body spectrum of the even-parity sector.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Boundary condition of the spin chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// `X_N = X_0`. Fermions see antiperiodic boundaries (even parity sector).
    PeriodicSpin,
    /// No bond between sites `N-1` and `0`.
    Open,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::PeriodicSpin => "periodic-spin",
            Boundary::Open => "open",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic-spin" | "periodic" => Ok(Boundary::PeriodicSpin),
            "open" => Ok(Boundary::Open),
            other => Err(Error::InvalidInput(format!("unknown boundary `{other}`"))),
        }
    }
}

/// Qubit configuration selecting the chain Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Both qubits up: extra field `epsilon` on sites `0` and `d`.
    UpUp,
    /// Both qubits down: bare chain.
    DownDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    PreQuench,
    PostQuench,
}

/// One complete quench experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchProtocol {
    pub n: usize,
    pub j: f64,
    pub lambda_i: f64,
    pub lambda_f: f64,
    pub epsilon: f64,
    pub d: usize,
    pub boundary: Boundary,
}

impl QuenchProtocol {
    /// Protocol with `J = 1` and periodic spin boundaries.
    pub fn new(n: usize, lambda_i: f64, lambda_f: f64, epsilon: f64, d: usize) -> Result<Self> {
        let p = QuenchProtocol {
            n,
            j: 1.0,
            lambda_i,
            lambda_f,
            epsilon,
            d,
            boundary: Boundary::PeriodicSpin,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Result<Self> {
        self.boundary = boundary;
        self.validate()?;
        Ok(self)
    }

    pub fn with_coupling(mut self, j: f64) -> Result<Self> {
        self.j = j;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProtocol(msg));
        if self.n < 2 {
            return bad(format!("N must be at least 2, got {}", self.n));
        }
        if self.boundary == Boundary::PeriodicSpin && !self.n.is_multiple_of(2) {
            return bad(format!("periodic-spin boundary needs even N, got {}", self.n));
        }
        if !(self.j.is_finite() && self.j > 0.0) {
            return bad(format!("J must be positive, got {}", self.j));
        }
        for (name, v) in [
            ("lambda_i", self.lambda_i),
            ("lambda_f", self.lambda_f),
            ("epsilon", self.epsilon),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.d >= self.n {
            return bad(format!("separation d = {} must be below N = {}", self.d, self.n));
        }
        Ok(())
    }
}

/// Site-resolved transverse fields.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfiguration(Vec<f64>);

impl FieldConfiguration {
    pub fn new(values: Vec<f64>) -> Self {
        FieldConfiguration(values)
    }

    pub fn uniform(n: usize, lambda: f64) -> Self {
        FieldConfiguration(vec![lambda; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Adds `delta` to the field at `site`.
    pub fn add_defect(&mut self, site: usize, delta: f64) {
        self.0[site] += delta;
    }
}

/// Fields seen by the chain in the given qubit channel and stage.
///
/// The initial state is the bare-chain ground state, so the pre-quench
/// configuration ignores the channel.
pub fn channel_fields(p: &QuenchProtocol, channel: Channel, stage: Stage) -> FieldConfiguration {
    match stage {
        Stage::PreQuench => FieldConfiguration::uniform(p.n, p.lambda_i),
        Stage::PostQuench => {
            let mut f = FieldConfiguration::uniform(p.n, p.lambda_f);
            if channel == Channel::UpUp {
                f.add_defect(0, p.epsilon);
                f.add_defect(p.d, p.epsilon);
            }
            f
        }
    }
}

/// Post-quench fields for a single qubit coupled at site 0.
pub fn single_defect_fields(p: &QuenchProtocol) -> FieldConfiguration {
    let mut f = FieldConfiguration::uniform(p.n, p.lambda_f);
    f.add_defect(0, p.epsilon);
    f
}

/// Symmetric `A` and antisymmetric `B` of the quadratic fermion Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl CouplingMatrices {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

pub fn build_coupling_matrices(
    fields: &FieldConfiguration,
    j: f64,
    boundary: Boundary,
) -> Result<CouplingMatrices> {
    let n = fields.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 sites, got {n}")));
    }
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for (site, &lambda) in fields.values().iter().enumerate() {
        a[(site, site)] = -2.0 * lambda;
    }

    let mut bond = |l: usize, r: usize, coupling: f64| {
        a[(l, r)] -= coupling;
        a[(r, l)] -= coupling;
        b[(l, r)] -= coupling;
        b[(r, l)] += coupling;
    };
    for site in 0..n - 1 {
        bond(site, site + 1, j);
    }
    if boundary == Boundary::PeriodicSpin {
        // X_{N-1} X_0 = -P (c^dag_{N-1} - c_{N-1})(c^dag_0 + c_0) with P = +1.
        bond(n - 1, 0, -j);
    }
    Ok(CouplingMatrices { a, b })
}

/// The `2N x 2N` single-particle matrix `[[-A, -B], [B, A]]`.
pub fn build_single_particle_hamiltonian(cm: &CouplingMatrices) -> DMatrix<f64> {
    let n = cm.n();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&(-&cm.a));
    h.view_mut((0, n), (n, n)).copy_from(&(-&cm.b));
    h.view_mut((n, 0), (n, n)).copy_from(&cm.b);
    h.view_mut((n, n), (n, n)).copy_from(&cm.a);
    h
}

/// Single-particle matrix of a chain with the given fields.
pub fn chain_hamiltonian(
    fields: &FieldConfiguration,
    j: f64,
    boundary: Boundary,
) -> Result<DMatrix<f64>> {
    Ok(build_single_particle_hamiltonian(&build_coupling_matrices(fields, j, boundary)?))
}
