//! Finite-dimensional Krein spaces and operators on them.
//!
//! A Krein space is ℂⁿ with an invertible Hermitian Gram matrix J and the
//! indefinite product [u, v] = v* J u. The adjoint of an operator C with
//! respect to that product is C⁺ = J⁻¹ C* J. An operator N is normal when
//! it commutes with N⁺, equivalently when its selfadjoint real and
//! imaginary parts A = (N + N⁺)/2, B = (N - N⁺)/(2i) commute. A real
//! polynomial p is definitizing for N when [p(A,B)v, v] ≥ 0 for all v,
//! which in matrix terms says J·p(A,B) is Hermitian positive semidefinite.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::poly::Poly2;
use num_complex::Complex64;
use std::sync::Arc;

/// Tolerance profile for the numeric layer. All values are relative to the
/// scale of the matrices involved unless stated otherwise.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Hermitian symmetry checks.
    pub hermitian: f64,
    /// Slack below zero allowed for "positive semidefinite" minimum
    /// eigenvalues.
    pub psd_slack: f64,
    /// Rank decision threshold of the PSD factorization.
    pub rank_cutoff: f64,
    /// Commutation check in polynomial matrix substitution.
    pub commutation: f64,
    /// Acceptance residual of commutant solves and identity checks.
    pub residual: f64,
    /// Relative eigenvalue clustering radius.
    pub cluster: f64,
    /// Absolute snap radius from float eigenvalues to exact rationals.
    pub snap: f64,
    /// Matching distance between float spectra and exact variety points
    /// (absolute).
    pub point_match: f64,
    /// Set-equality matching for spectra (relative).
    pub spectrum_match: f64,
    /// Absolute margin below which a scalar function value counts as not
    /// invertible.
    pub invert_margin: f64,
    /// Absolute floor for denominators in the decomposition step.
    pub denom_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            psd_slack: 1e-9,
            rank_cutoff: 1e-9,
            commutation: 1e-10,
            residual: 1e-8,
            cluster: 1e-8,
            snap: 1e-6,
            point_match: 1e-6,
            spectrum_match: 1e-8,
            invert_margin: 1e-10,
            denom_floor: 1e-12,
        }
    }
}

impl Tolerances {
    /// Apply `key=value` overrides ("psd_slack=1e-8,residual=1e-7").
    pub fn apply_overrides(&mut self, spec: &str) -> Result<()> {
        for part in spec.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidProblem(format!("bad tolerance override '{part}'")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidProblem(format!("bad tolerance value '{value}'")))?;
            if v <= 0.0 {
                return Err(Error::InvalidProblem(format!("tolerance '{key}' must be positive")));
            }
            match key.trim() {
                "hermitian" => self.hermitian = v,
                "psd_slack" => self.psd_slack = v,
                "rank_cutoff" => self.rank_cutoff = v,
                "commutation" => self.commutation = v,
                "residual" => self.residual = v,
                "cluster" => self.cluster = v,
                "snap" => self.snap = v,
                "point_match" => self.point_match = v,
                "spectrum_match" => self.spectrum_match = v,
                "invert_margin" => self.invert_margin = v,
                "denom_floor" => self.denom_floor = v,
                other => {
                    return Err(Error::InvalidProblem(format!("unknown tolerance key '{other}'")))
                }
            }
        }
        Ok(())
    }
}

/// ℂⁿ with an invertible Hermitian Gram matrix.
#[derive(Debug, Clone)]
pub struct KreinSpace {
    dim: usize,
    gram: CMatrix,
    gram_inv: CMatrix,
    /// Spectral condition number of the Gram matrix (reported, not gated).
    condition: f64,
}

impl KreinSpace {
    /// Validates Hermitian symmetry (to 1e-12 relative) and invertibility.
    pub fn new(gram: CMatrix) -> Result<Arc<Self>> {
        if !gram.is_square() {
            return Err(Error::DimensionMismatch("Gram matrix must be square".into()));
        }
        let dim = gram.rows();
        let scale = gram.fro_norm().max(1e-300);
        let herm = gram.hermitian_residual() / scale;
        if herm > 1e-12 {
            return Err(Error::NotHermitian { residual: herm, tol: 1e-12 });
        }
        let (evals, _) = gram.eigh();
        let min_abs = evals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let max_abs = evals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if dim > 0 && min_abs <= 1e-12 * max_abs.max(1.0) {
            return Err(Error::SingularGram);
        }
        let gram_inv = gram.inverse().map_err(|_| Error::SingularGram)?;
        let condition = if dim == 0 { 1.0 } else { max_abs / min_abs };
        Ok(Arc::new(Self { dim, gram, gram_inv, condition }))
    }

    pub fn hilbert(dim: usize) -> Arc<Self> {
        Self::new(CMatrix::identity(dim)).expect("identity Gram is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn gram_inv(&self) -> &CMatrix {
        &self.gram_inv
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// The indefinite product [u, v] = v* J u.
    pub fn product(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        assert_eq!(u.len(), self.dim);
        assert_eq!(v.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate() {
            for (j, uj) in u.iter().enumerate() {
                acc += vi.conj() * self.gram[(i, j)] * uj;
            }
        }
        acc
    }
}

/// A matrix bound to a Krein space.
#[derive(Debug, Clone)]
pub struct KreinOperator {
    space: Arc<KreinSpace>,
    matrix: CMatrix,
}

impl KreinOperator {
    pub fn new(space: Arc<KreinSpace>, matrix: CMatrix) -> Result<Self> {
        if matrix.rows() != space.dim() || matrix.cols() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{} on a space of dimension {}",
                matrix.rows(),
                matrix.cols(),
                space.dim()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &Arc<KreinSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn norm(&self) -> f64 {
        self.matrix.spectral_norm()
    }

    /// Krein adjoint C⁺ = J⁻¹ C* J.
    pub fn adjoint(&self) -> KreinOperator {
        let m = self
            .space
            .gram_inv()
            .matmul(&self.matrix.conj_transpose())
            .matmul(self.space.gram());
        KreinOperator { space: Arc::clone(&self.space), matrix: m }
    }

    /// Selfadjoint real and imaginary parts A = (N + N⁺)/2, B = (N - N⁺)/(2i).
    pub fn real_imag(&self) -> (CMatrix, CMatrix) {
        let adj = self.adjoint();
        let a = self.matrix.add(&adj.matrix).scale(Complex64::new(0.5, 0.0));
        let b = self.matrix.sub(&adj.matrix).scale(Complex64::new(0.0, -0.5));
        (a, b)
    }

    /// Commutes with its Krein adjoint, tested through ‖AB - BA‖ ≤ tol·‖A‖‖B‖.
    pub fn is_normal(&self, tol: f64) -> bool {
        let (a, b) = self.real_imag();
        let scale = a.fro_norm() * b.fro_norm();
        let comm = a.matmul(&b).sub(&b.matmul(&a)).fro_norm();
        scale == 0.0 || comm <= tol * scale
    }

    pub fn compose(&self, rhs: &KreinOperator) -> KreinOperator {
        KreinOperator {
            space: Arc::clone(&self.space),
            matrix: self.matrix.matmul(&rhs.matrix),
        }
    }
}

/// Outcome of the definitizing test for one polynomial.
#[derive(Debug, Clone)]
pub struct DefinitizingCertificate {
    /// Eigenvalues of J·p(A,B), ascending.
    pub eigenvalues: Vec<f64>,
    /// Relative Hermitian asymmetry of J·p(A,B).
    pub hermitian_residual: f64,
    pub is_definitizing: bool,
    /// For non-real p: the real reduction (p + p#)/2, which induces the
    /// same operator.
    pub real_reduction: Option<Poly2>,
    /// Whether the reduction reproduces p(A,B) (within the residual
    /// tolerance); `None` when p is real.
    pub reduction_matches: Option<bool>,
}

/// Tests [p(A,B)v, v] ≥ 0 for all v: forms G = J·p(A,B), requires G
/// Hermitian and positive semidefinite up to the given slacks.
pub fn is_definitizing(
    p: &Poly2,
    n: &KreinOperator,
    tols: &Tolerances,
) -> Result<DefinitizingCertificate> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (a, b) = n.real_imag();
    let pab = p.mat_subst(&a, &b, tols.commutation)?;
    let g = n.space().gram().matmul(&pab);
    // a form that vanishes up to roundoff relative to the ambient scale is
    // the zero form (positive semidefinite with empty spectrum support)
    let reference = n.space().gram().fro_norm() * p.norm_bound(a.fro_norm(), b.fro_norm());
    let vanished = g.fro_norm() <= tols.rank_cutoff * reference;
    let scale = g.fro_norm();
    let herm = if vanished || scale == 0.0 { 0.0 } else { g.hermitian_residual() / scale };
    let (evals, _) = if vanished { (vec![0.0; g.rows()], CMatrix::identity(g.rows())) } else { g.eigh() };
    let min_eig = evals.first().copied().unwrap_or(0.0);
    let hermitian_ok = herm <= tols.hermitian;
    let psd_ok = vanished || scale == 0.0 || min_eig >= -tols.psd_slack * scale;
    let (real_reduction, reduction_matches) = if p.is_real() {
        (None, None)
    } else {
        let q = p.add(&p.sharp()).scale(&crate::scalar::GaussianRational::from_ratio(1, 2));
        let qab = q.mat_subst(&a, &b, tols.commutation)?;
        let diff = qab.sub(&pab).fro_norm();
        let matches = diff <= tols.residual * pab.fro_norm().max(1.0);
        (Some(q), Some(matches))
    };
    Ok(DefinitizingCertificate {
        eigenvalues: evals,
        hermitian_residual: herm,
        is_definitizing: hermitian_ok && psd_ok,
        real_reduction,
        reduction_matches,
    })
}

/// Factorization of a Hermitian PSD matrix G as S*S with S of full row
/// rank r = rank(G); eigenvalues within the rank cutoff are clamped to 0.
/// `reference` is the ambient scale against which G may have vanished up
/// to roundoff (pass 0 when G is exact).
pub fn psd_factor(g: &CMatrix, reference: f64, tols: &Tolerances) -> Result<(CMatrix, usize)> {
    let n = g.rows();
    let scale = g.fro_norm();
    if scale <= tols.rank_cutoff * reference || scale == 0.0 {
        // vanished up to roundoff: the zero form factors through rank zero
        return Ok((CMatrix::zeros(0, n), 0));
    }
    let herm = g.hermitian_residual() / scale;
    if herm > tols.hermitian {
        return Err(Error::NotHermitian { residual: herm, tol: tols.hermitian });
    }
    let (evals, u) = g.eigh();
    let min_eig = evals.first().copied().unwrap_or(0.0);
    if min_eig < -tols.psd_slack * scale {
        return Err(Error::NotPsd { min_eig, slack: tols.psd_slack * scale });
    }
    // descending order so the kept rows come first
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| evals[j].partial_cmp(&evals[i]).unwrap());
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&k| evals[k] > tols.rank_cutoff * scale)
        .collect();
    let r = kept.len();
    let mut s = CMatrix::zeros(r, n);
    for (row, &k) in kept.iter().enumerate() {
        let lam = evals[k].max(0.0).sqrt();
        for col in 0..n {
            s[(row, col)] = u[(col, k)].conj() * lam;
        }
    }
    Ok((s, r))
}
