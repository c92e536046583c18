use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, hermitian_eigenvalues, trace_re, CMatrix, CVector};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-9;

/// Hermitian positive-semidefinite transmit covariance with a trace budget.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitCovariance {
    q: CMatrix,
}

impl TransmitCovariance {
    pub fn new(q: CMatrix, p_max: f64) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::InvalidCovariance(format!("{}x{} is not square", q.nrows(), q.ncols())));
        }
        let dev = hermitian_deviation(&q);
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidCovariance(format!("Hermitian deviation {dev:e}")));
        }
        let min_eig = hermitian_eigenvalues(&q).last().copied().unwrap_or(0.0);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidCovariance(format!("minimum eigenvalue {min_eig:e}")));
        }
        let tr = trace_re(&q);
        if tr > p_max + TRACE_TOL {
            return Err(Error::InvalidCovariance(format!("trace {tr} exceeds budget {p_max}")));
        }
        Ok(Self { q })
    }

    /// `power · v vᴴ` for a unit vector `v`.
    pub fn rank_one(power: f64, v: &CVector) -> Self {
        let mut q = v * v.adjoint() * num_complex::Complex64::from(power.max(0.0));
        // Enforce exact Hermitian symmetry against rounding.
        let qh = q.adjoint();
        q = (q + qh) * num_complex::Complex64::from(0.5);
        Self { q }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            q: CMatrix::zeros(n, n),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.q
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.q)
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }
}
