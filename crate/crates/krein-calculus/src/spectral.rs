//! Spectral measures of normal matrices on the embedded Hilbert spaces.
//!
//! A normal matrix M splits into commuting Hermitian parts
//! H₁ = (M + M*)/2 and H₂ = (M - M*)/(2i). The decomposition diagonalizes
//! H₁ by Jacobi rotations, rediagonalizes the compression of H₂ inside
//! every H₁ eigenspace, clusters the resulting complex eigenvalues and
//! assembles one Hermitian idempotent projection per cluster. Spectral
//! integrals are then finite sums Σ f(λ)·P_λ.

use crate::embedding::{EmbeddingSystem, IdentityCheck};
use crate::error::{Error, Result};
use crate::krein::Tolerances;
use crate::linalg::CMatrix;
use crate::rng::SplitMix64;
use num_complex::Complex64;
use num_traits::Zero;

/// Spectral measure of a normal matrix: clustered eigenvalues with
/// matching orthogonal projections.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<Complex64>,
    projections: Vec<CMatrix>,
    unitary: CMatrix,
    dim: usize,
}

impl SpectralData {
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn projection(&self, k: usize) -> &CMatrix {
        &self.projections[k]
    }

    pub fn num_clusters(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Σ f(λ)·P_λ.
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (lam, p) in self.eigenvalues.iter().zip(&self.projections) {
            acc = acc.add(&p.scale(f(*lam)));
        }
        acc
    }

    /// Σ `values[k]`·P_k with values aligned to the cluster order; errors on
    /// length mismatch.
    pub fn integrate_values(&self, values: &[Complex64]) -> Result<CMatrix> {
        if values.len() != self.eigenvalues.len() {
            return Err(Error::MissingValue {
                z: self
                    .eigenvalues
                    .get(values.len())
                    .map(|z| (z.re, z.im))
                    .unwrap_or((f64::NAN, f64::NAN)),
            });
        }
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (v, p) in values.iter().zip(&self.projections) {
            acc = acc.add(&p.scale(*v));
        }
        Ok(acc)
    }

    /// E(Δ) for Δ given as a cluster predicate.
    pub fn projection_where(&self, pred: impl Fn(Complex64) -> bool) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (lam, p) in self.eigenvalues.iter().zip(&self.projections) {
            if pred(*lam) {
                acc = acc.add(p);
            }
        }
        acc
    }

    /// Index of the cluster matching z within `tol`, requiring uniqueness.
    pub fn match_eigenvalue(&self, z: Complex64, tol: f64) -> Option<usize> {
        let hits: Vec<usize> = self
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, lam)| (*lam - z).norm() <= tol)
            .map(|(k, _)| k)
            .collect();
        if hits.len() == 1 {
            Some(hits[0])
        } else {
            None
        }
    }
}

/// Spectral decomposition of a normal matrix.
pub fn spectral_decomposition(m: &CMatrix, tols: &Tolerances) -> Result<SpectralData> {
    assert!(m.is_square(), "spectral decomposition needs a square matrix");
    let n = m.rows();
    if n == 0 {
        return Ok(SpectralData {
            eigenvalues: Vec::new(),
            projections: Vec::new(),
            unitary: CMatrix::zeros(0, 0),
            dim: 0,
        });
    }
    let scale = m.fro_norm().max(1e-300);
    let mstar = m.conj_transpose();
    let comm = m.matmul(&mstar).sub(&mstar.matmul(m)).fro_norm();
    // the floor lets matrices that are zero up to roundoff pass as normal
    let floor = tols.commutation * (scale + 1.0);
    if comm > tols.commutation * scale * scale && comm > floor {
        return Err(Error::NotNormal { residual: comm / (scale * scale), tol: tols.commutation });
    }
    let h1 = m.add(&mstar).scale(Complex64::new(0.5, 0.0));
    let h2 = m.sub(&mstar).scale(Complex64::new(0.0, -0.5));
    let (vals1, u1) = h1.eigh();

    // cluster the real parts
    let ctol = tols.cluster * scale;
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, &v) in vals1.iter().enumerate() {
        match groups.last_mut() {
            Some((rep, idxs)) if (v - *rep).abs() <= ctol => idxs.push(k),
            _ => groups.push((v, vec![k])),
        }
    }

    // refine each real-part eigenspace by the compressed imaginary part
    let mut vectors: Vec<(Complex64, Vec<Complex64>)> = Vec::new();
    for (_, idxs) in &groups {
        let v = u1.columns(idxs);
        let re_mean = idxs.iter().map(|&k| vals1[k]).sum::<f64>() / idxs.len() as f64;
        let compressed = v.conj_transpose().matmul(&h2).matmul(&v);
        let (vals2, u2) = compressed.eigh();
        let refined = v.matmul(&u2);
        for (c, &im) in vals2.iter().enumerate() {
            let lam = Complex64::new(re_mean, im);
            vectors.push((lam, refined.column(c)));
        }
    }

    // cluster the complex eigenvalues and assemble projections
    let mut clusters: Vec<(Complex64, Vec<Vec<Complex64>>)> = Vec::new();
    for (lam, vec) in vectors {
        match clusters.iter_mut().find(|(rep, _)| (*rep - lam).norm() <= ctol) {
            Some((_, vecs)) => vecs.push(vec),
            None => clusters.push((lam, vec![vec])),
        }
    }
    // deterministic ordering: by real part then imaginary part
    clusters.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap());

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projections = Vec::with_capacity(clusters.len());
    let mut unitary = CMatrix::zeros(n, n);
    let mut col = 0;
    for (lam, vecs) in &clusters {
        let mut p = CMatrix::zeros(n, n);
        for v in vecs {
            for i in 0..n {
                for jj in 0..n {
                    p[(i, jj)] += v[i] * v[jj].conj();
                }
            }
            for (i, &vi) in v.iter().enumerate() {
                unitary[(i, col)] = vi;
            }
            col += 1;
        }
        eigenvalues.push(*lam);
        projections.push(p);
    }
    Ok(SpectralData { eigenvalues, projections, unitary, dim: n })
}

/// Spectral data of Θ(N) and of every Θ_j(N).
pub struct TransportedSpectra {
    pub total: SpectralData,
    pub locals: Vec<SpectralData>,
}

pub fn transported_spectra(sys: &EmbeddingSystem, tols: &Tolerances) -> Result<TransportedSpectra> {
    let total = spectral_decomposition(&sys.theta_n()?, tols)?;
    let mut locals = Vec::with_capacity(sys.num_polys());
    for j in 0..sys.num_polys() {
        let tjn = sys.theta_j(j, sys.operator().matrix())?;
        locals.push(spectral_decomposition(&tjn, tols)?);
    }
    Ok(TransportedSpectra { total, locals })
}

fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = a.fro_norm().max(b.fro_norm()).max(1.0);
    a.sub(b).fro_norm() / scale
}

/// Is z (numerically) one of the real variety positions?
fn in_real_variety(z: Complex64, vreal: &[Complex64], tol: f64) -> bool {
    vreal.iter().any(|w| (*w - z).norm() <= tol)
}

/// Pointwise eigenvalue bound tying each definitizing polynomial to the
/// total form on the spectrum of Θ(N): |p_j(z)| ≤ ‖R_jR_j*‖·|Σ p_k(z)|,
/// plus the zero-locus check that eigenvalues annihilating the total form
/// lie in the real variety.
pub fn speknorm_check(
    sys: &EmbeddingSystem,
    total: &SpectralData,
    vreal: &[Complex64],
    tols: &Tolerances,
) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let sum_at = |z: Complex64| -> Complex64 {
        sys.defpolys()
            .iter()
            .map(|p| p.eval_at_complex(z))
            .fold(Complex64::zero(), |a, b| a + b)
    };
    for j in 0..sys.num_polys() {
        let rr_norm = sys.rj_rj_star(j).spectral_norm();
        let mut worst: f64 = 0.0;
        for &z in total.eigenvalues() {
            let pj = sys.defpolys()[j].eval_at_complex(z).norm();
            let total_val = sum_at(z).norm();
            let scale = pj.max(total_val).max(1.0);
            let violation = (pj - rr_norm * total_val) / scale;
            worst = worst.max(violation);
        }
        out.push(IdentityCheck::new("speknorm", Some(j), worst.max(0.0), tols.residual));
    }
    // zeros of the total form on the spectrum must be real variety points
    let mut worst = 0.0f64;
    for &z in total.eigenvalues() {
        let tv = sum_at(z).norm();
        if tv <= tols.residual && !in_real_variety(z, vreal, tols.point_match) {
            worst = 1.0;
        }
    }
    out.push(IdentityCheck::new("speknorm_zero_locus", None, worst, tols.residual));
    out
}

/// The spectral transfer identities: the weighted-projection form of
/// R_jR_j*·E(ℂ∖V_ℝ), the image of the measure under Γ_j, and the
/// transport of integrals through Ξ_j.
pub fn spectral_transfer_checks(
    sys: &EmbeddingSystem,
    spectra: &TransportedSpectra,
    vreal: &[Complex64],
    seed: u64,
    tols: &Tolerances,
) -> Result<Vec<IdentityCheck>> {
    let tol = tols.residual;
    let mut out = Vec::new();
    let total = &spectra.total;
    let sum_at = |z: Complex64| -> Complex64 {
        sys.defpolys()
            .iter()
            .map(|p| p.eval_at_complex(z))
            .fold(Complex64::zero(), |a, b| a + b)
    };
    let off_variety = |z: Complex64| !in_real_variety(z, vreal, tols.point_match);
    let e_off = total.projection_where(off_variety);

    let mut rng = SplitMix64::new(seed);
    let random_values =
        |rng: &mut SplitMix64, n: usize| -> Vec<Complex64> { (0..n).map(|_| rng.next_complex()).collect() };

    for j in 0..sys.num_polys() {
        let rr = sys.rj_rj_star(j);
        // R_jR_j*·E(ℂ∖V_ℝ) = Σ_{λ∉V_ℝ} p_j(λ)/Σp_k(λ) · P_λ
        let lhs = rr.matmul(&e_off);
        let rhs = total.integrate(|z| {
            if off_variety(z) {
                sys.defpolys()[j].eval_at_complex(z) / sum_at(z)
            } else {
                Complex64::zero()
            }
        });
        out.push(IdentityCheck::new("korvda", Some(j), rel_diff(&lhs, &rhs), tol));

        let local = &spectra.locals[j];
        // Γ_j(E({λ})) = E_j({λ}) per clustered eigenvalue of Θ(N)
        let mut worst = 0.0f64;
        for (k, &lam) in total.eigenvalues().iter().enumerate() {
            let gamma = sys.gamma_j(j, total.projection(k))?;
            let ej = match local.match_eigenvalue(lam, tols.point_match.max(tol * 10.0)) {
                Some(idx) => local.projection(idx).clone(),
                None => CMatrix::zeros(local.dim(), local.dim()),
            };
            worst = worst.max(rel_diff(&gamma, &ej));
        }
        out.push(IdentityCheck::new("normtransf_projection", Some(j), worst, tol));

        // integral transfers with random bounded h
        let h_vals = random_values(&mut rng, total.num_clusters());
        let h_of = |z: Complex64| -> Result<Complex64> {
            let idx = total
                .match_eigenvalue(z, tols.point_match.max(tol * 10.0))
                .ok_or(Error::MissingValue { z: (z.re, z.im) })?;
            Ok(h_vals[idx])
        };
        let int_total = total.integrate_values(&h_vals)?;
        let mut local_vals = Vec::with_capacity(local.num_clusters());
        for &mu in local.eigenvalues() {
            local_vals.push(h_of(mu)?);
        }
        let int_local = local.integrate_values(&local_vals)?;
        // Γ_j(∫h dE) = ∫h dE_j
        let gamma_int = sys.gamma_j(j, &int_total)?;
        out.push(IdentityCheck::new(
            "normtransf_integral",
            Some(j),
            rel_diff(&gamma_int, &int_local),
            tol,
        ));
        // Ξ_j(∫h dE_j) = Ξ(R_jR_j*·∫h dE)
        let lhs = sys.xi_j(j, &int_local)?;
        let rhs = sys.xi(&rr.matmul(&int_total))?;
        out.push(IdentityCheck::new("zuef2", Some(j), rel_diff(&lhs, &rhs), tol));

        // Ξ_j(∫f dE_j) = Ξ(∫_{σ∖V_ℝ} f·p_j/Σp dE + R_jR_j*·∫_{σ∩V_ℝ} f dE)
        let f_vals = random_values(&mut rng, total.num_clusters());
        let mut f_local = Vec::with_capacity(local.num_clusters());
        for &mu in local.eigenvalues() {
            let idx = total
                .match_eigenvalue(mu, tols.point_match.max(tol * 10.0))
                .ok_or(Error::MissingValue { z: (mu.re, mu.im) })?;
            f_local.push(f_vals[idx]);
        }
        let lhs = sys.xi_j(j, &local.integrate_values(&f_local)?)?;
        let weighted = total.integrate(|z| {
            let idx = total.match_eigenvalue(z, 0.0).expect("own eigenvalue");
            if off_variety(z) {
                f_vals[idx] * sys.defpolys()[j].eval_at_complex(z) / sum_at(z)
            } else {
                Complex64::zero()
            }
        });
        let on_var = total.integrate(|z| {
            let idx = total.match_eigenvalue(z, 0.0).expect("own eigenvalue");
            if off_variety(z) {
                Complex64::zero()
            } else {
                f_vals[idx]
            }
        });
        let rhs = sys.xi(&weighted.add(&rr.matmul(&on_var)))?;
        out.push(IdentityCheck::new("lre0", Some(j), rel_diff(&lhs, &rhs), tol));
    }
    Ok(out)
}
