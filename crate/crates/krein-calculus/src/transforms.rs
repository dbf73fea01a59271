//! Transport of definitizing polynomials under shift, scaling and
//! inversion of the operator, plus the selfadjoint / unitary special
//! cases.
//!
//! For N + βI the polynomial p(x - Re β, y - Im β) is definitizing; for αN
//! the rotated-and-scaled substitution with 1/α; for N⁻¹ the composite
//! Φ⁻¹(ϖ(Φ(p))), where Φ is the change of variables (x,y) → (z,w) =
//! (x+iy, x-iy) and ϖ the coefficient reversal (zw)^d q(1/z, 1/w).

use crate::embedding::EmbeddingSystem;
use crate::error::{Error, Result};
use crate::ideal::groebner_untracked;
use crate::krein::{is_definitizing, KreinOperator, Tolerances};
use crate::linalg::CMatrix;
use crate::poly::{Poly2, VarPair};
use crate::scalar::GaussianRational;
use num_complex::Complex64;

/// p(x - Re β, y - Im β), definitizing for N + βI when p is definitizing
/// for N.
pub fn shift_definitizing(p: &Poly2, beta: &GaussianRational) -> Poly2 {
    let vars = VarPair::Xy;
    let re = GaussianRational::new(beta.re.clone(), num_rational::BigRational::from_integer(0.into()));
    let im = GaussianRational::new(beta.im.clone(), num_rational::BigRational::from_integer(0.into()));
    let x_image = Poly2::x().sub(&Poly2::constant(re, vars));
    let y_image = Poly2::y().sub(&Poly2::constant(im, vars));
    p.substitute(&x_image, &y_image)
}

/// p(x·Re(1/α) - y·Im(1/α), x·Im(1/α) + y·Re(1/α)), definitizing for αN.
pub fn scale_definitizing(p: &Poly2, alpha: &GaussianRational) -> Result<Poly2> {
    let inv = alpha.inv().ok_or(Error::ZeroPolynomial)?;
    let zero = num_rational::BigRational::from_integer(0.into());
    let re = GaussianRational::new(inv.re.clone(), zero.clone());
    let im = GaussianRational::new(inv.im.clone(), zero);
    let x_image = Poly2::x().scale(&re).sub(&Poly2::y().scale(&im));
    let y_image = Poly2::x().scale(&im).add(&Poly2::y().scale(&re));
    Ok(p.substitute(&x_image, &y_image))
}

/// Φ⁻¹(ϖ(Φ(p))), definitizing for N⁻¹ when p is real definitizing for a
/// bijective N.
pub fn invert_definitizing(p: &Poly2) -> Result<Poly2> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    p.phi_transform()?.varpi()?.phi_inverse()
}

/// Report of one transported generator.
#[derive(Debug, Clone)]
pub struct TransformReport {
    pub original: Poly2,
    pub transformed: Poly2,
    pub definitizing_ok: bool,
    pub min_eigenvalue: f64,
}

/// Outcome of the inverse transport on a whole embedding system.
#[derive(Debug, Clone)]
pub struct InverseTransport {
    pub reports: Vec<TransformReport>,
    /// ⟨transformed generators⟩ is zero-dimensional (exact, in (x,y)).
    pub ideal_zero_dim_ok: bool,
    /// ⟨ϖ(Φ(p_j))⟩ is zero-dimensional (exact, in (z,w)).
    pub reversed_ideal_zero_dim_ok: bool,
    pub pass: bool,
}

/// Transports every definitizing generator to N⁻¹, reruns the definitizing
/// test there, and checks zero-dimensionality of the transported ideal.
pub fn invdefbar_check(sys: &EmbeddingSystem, tols: &Tolerances) -> Result<InverseTransport> {
    let n = sys.operator();
    let eig = n.matrix().eigenvalues()?;
    if eig.iter().any(|z| z.norm() <= 1e-10) {
        return Err(Error::Singular);
    }
    let n_inv_mat = n.matrix().inverse()?;
    let n_inv = KreinOperator::new(std::sync::Arc::clone(n.space()), n_inv_mat)?;

    let mut reports = Vec::with_capacity(sys.num_polys());
    let mut transformed = Vec::with_capacity(sys.num_polys());
    let mut reversed = Vec::with_capacity(sys.num_polys());
    for p in sys.defpolys() {
        let q = invert_definitizing(p)?;
        let cert = is_definitizing(&q, &n_inv, tols)?;
        reversed.push(p.phi_transform()?.varpi()?);
        reports.push(TransformReport {
            original: p.clone(),
            transformed: q.clone(),
            definitizing_ok: cert.is_definitizing,
            min_eigenvalue: cert.eigenvalues.first().copied().unwrap_or(0.0),
        });
        transformed.push(q);
    }
    let ideal_zero_dim_ok = groebner_untracked(&transformed).is_zero_dimensional();
    let reversed_ideal_zero_dim_ok = groebner_untracked(&reversed).is_zero_dimensional();
    let pass = ideal_zero_dim_ok
        && reversed_ideal_zero_dim_ok
        && reports.iter().all(|r| r.definitizing_ok);
    Ok(InverseTransport { reports, ideal_zero_dim_ok, reversed_ideal_zero_dim_ok, pass })
}

/// Selfadjoint / unitary detection with the canonical vanishing polynomial
/// checks and the spectral symmetry claims.
#[derive(Debug, Clone)]
pub struct SpecialCaseReport {
    pub selfadjoint: bool,
    /// y(A, B) = B vanishes (only when selfadjoint).
    pub selfadjoint_poly_vanishes: Option<bool>,
    pub unitary: bool,
    /// (x² + y² - 1)(A, B) vanishes (only when unitary).
    pub unitary_poly_vanishes: Option<bool>,
    /// Eigenvalues off the reference curve (ℝ or the unit circle),
    /// paired with their mirror images.
    pub off_curve: Vec<Complex64>,
    /// Every off-curve eigenvalue has its mirror in the spectrum.
    pub pairing_ok: Option<bool>,
    /// Every off-curve eigenvalue is the image ξ+iη of a variety point.
    pub contained_in_variety_images: Option<bool>,
}

/// Detects N = N⁺ and N N⁺ = N⁺ N = I numerically, verifies the canonical
/// definitizing polynomials vanish, and checks the symmetry of σ(N) with
/// respect to the reference curve. Variety images (ξ+iη for variety points
/// (ξ,η)) may be supplied to check that off-curve spectrum sits inside them.
pub fn special_case_check(
    n: &KreinOperator,
    variety_images: &[Complex64],
    tols: &Tolerances,
) -> Result<SpecialCaseReport> {
    let scale = n.norm().max(1.0);
    let adj = n.adjoint();
    let selfadjoint = n.matrix().sub(adj.matrix()).fro_norm() <= tols.residual * scale;
    let prod1 = n.matrix().matmul(adj.matrix());
    let prod2 = adj.matrix().matmul(n.matrix());
    let id = CMatrix::identity(n.matrix().rows());
    let unitary = prod1.sub(&id).fro_norm() <= tols.residual * scale * scale
        && prod2.sub(&id).fro_norm() <= tols.residual * scale * scale;

    let (a, b) = n.real_imag();
    let selfadjoint_poly_vanishes = if selfadjoint {
        // p = y evaluates to B
        Some(b.fro_norm() <= tols.residual * scale)
    } else {
        None
    };
    let unitary_poly_vanishes = if unitary {
        let p = Poly2::parse("x^2 + y^2 - 1").expect("static polynomial");
        let val = p.mat_subst(&a, &b, tols.commutation)?;
        Some(val.fro_norm() <= tols.residual * scale * scale)
    } else {
        None
    };

    let mut off_curve = Vec::new();
    let mut pairing_ok = None;
    let mut contained = None;
    if selfadjoint || unitary {
        let eig = n.matrix().eigenvalues()?;
        let tol = tols.spectrum_match * scale;
        let mirror: Box<dyn Fn(Complex64) -> Complex64> = if selfadjoint {
            Box::new(|z: Complex64| z.conj())
        } else {
            Box::new(|z: Complex64| 1.0 / z.conj())
        };
        let on_curve = |z: Complex64| {
            if selfadjoint {
                z.im.abs() <= tol
            } else {
                (z.norm() - 1.0).abs() <= tol
            }
        };
        let mut pairs_ok = true;
        let mut cont_ok = true;
        for &z in &eig {
            if on_curve(z) {
                continue;
            }
            off_curve.push(z);
            if !eig.iter().any(|w| (*w - mirror(z)).norm() <= tol) {
                pairs_ok = false;
            }
            if !variety_images.iter().any(|w| (*w - z).norm() <= tols.point_match) {
                cont_ok = false;
            }
        }
        pairing_ok = Some(pairs_ok);
        contained = Some(cont_ok);
    }
    Ok(SpecialCaseReport {
        selfadjoint,
        selfadjoint_poly_vanishes,
        unitary,
        unitary_poly_vanishes,
        off_curve,
        pairing_ok,
        contained_in_variety_images: contained,
    })
}
