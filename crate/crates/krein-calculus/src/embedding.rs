//! Hilbert-space embeddings of a definitizable normal operator.
//!
//! From the semidefinite forms J·p_j(A,B) the builder factors matrices
//! T_j: ℂ^{r_j} → 𝒦 with T_j T_j⁺ = p_j(A,B) and T: ℂ^r → 𝒦 with
//! T T⁺ = Σ_k p_k(A,B); the column spaces play the role of the Hilbert
//! spaces 𝓗_j and 𝓗. The connecting contractions R_j satisfy T R_j = T_j
//! and Σ_k R_k R_k* = I. On top of those sit the transfer maps
//!
//! * Θ(C) = T⁻¹ C T and Θ_j(C) = T_j⁻¹ C T_j (Krein → Hilbert),
//! * Γ_j(D) = R_j⁻¹ D R_j (𝓗 → 𝓗_j),
//! * Ξ(D) = T D T⁺, Ξ_j(D) = T_j D T_j⁺, Λ_j(D) = R_j D R_j*.
//!
//! Θ is only defined on operators that leave ran T invariant; membership is
//! certified a posteriori through the residual of the solve. Rank-zero
//! factors (p_j(A,B) = 0) are carried as 0-column matrices so every formula
//! stays uniform.

use crate::error::{Error, Result};
use crate::krein::{is_definitizing, KreinOperator, Tolerances};
use crate::linalg::CMatrix;
use crate::poly::Poly2;
use crate::rng::SplitMix64;
use crate::scalar::GaussianRational;
use std::sync::Arc;

/// One checked identity: a stable tag, an optional embedding index, the
/// relative residual and the tolerance it was held against.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub tag: &'static str,
    pub index: Option<usize>,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl IdentityCheck {
    pub fn new(tag: &'static str, index: Option<usize>, residual: f64, tol: f64) -> Self {
        Self { tag, index, residual, tol, pass: residual <= tol }
    }
}

fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = a.fro_norm().max(b.fro_norm()).max(1.0);
    a.sub(b).fro_norm() / scale
}

/// The embedding system of one definitizable normal operator.
#[derive(Debug, Clone)]
pub struct EmbeddingSystem {
    n: KreinOperator,
    n_adj: KreinOperator,
    a: CMatrix,
    b: CMatrix,
    defpolys: Vec<Poly2>,
    /// p_j(A,B)
    p_ab: Vec<CMatrix>,
    /// Σ_k p_k(A,B)
    sum_p: CMatrix,
    t: CMatrix,
    t_adj: CMatrix,
    t_pinv: CMatrix,
    tj: Vec<CMatrix>,
    tj_adj: Vec<CMatrix>,
    tj_pinv: Vec<CMatrix>,
    rj: Vec<CMatrix>,
    tols: Tolerances,
}

/// Factors the embedding system; every polynomial in `defpolys` must pass
/// the definitizing test for `n`.
pub fn build_embedding(
    n: &KreinOperator,
    defpolys: &[Poly2],
    tols: &Tolerances,
) -> Result<EmbeddingSystem> {
    assert!(!defpolys.is_empty(), "need at least one definitizing polynomial");
    if !n.is_normal(tols.commutation) {
        let (a, b) = n.real_imag();
        let scale = a.fro_norm() * b.fro_norm();
        let res = if scale == 0.0 { 0.0 } else { a.matmul(&b).sub(&b.matmul(&a)).fro_norm() / scale };
        return Err(Error::NotNormal { residual: res, tol: tols.commutation });
    }
    let space = n.space();
    let j = space.gram();
    let j_inv = space.gram_inv();
    let (a, b) = n.real_imag();

    let mut p_ab = Vec::with_capacity(defpolys.len());
    for (idx, p) in defpolys.iter().enumerate() {
        let cert = is_definitizing(p, n, tols)?;
        if !cert.is_definitizing {
            return Err(Error::NotDefinitizing {
                index: idx,
                reason: format!(
                    "min eigenvalue {:.3e}, hermitian residual {:.3e}",
                    cert.eigenvalues.first().copied().unwrap_or(0.0),
                    cert.hermitian_residual
                ),
            });
        }
        p_ab.push(p.mat_subst(&a, &b, tols.commutation)?);
    }
    let mut sum_p = CMatrix::zeros(space.dim(), space.dim());
    for m in &p_ab {
        sum_p = sum_p.add(m);
    }

    // T from the total form, T_j from the individual ones; the ambient
    // scale lets factors that vanish up to roundoff come out rank zero
    let j_norm = j.fro_norm();
    let mut reference = 0.0f64;
    for p in defpolys {
        reference += j_norm * p.norm_bound(a.fro_norm(), b.fro_norm());
    }
    let (s_total, _) = crate::krein::psd_factor(&j.matmul(&sum_p), reference, tols)?;
    let t = j_inv.matmul(&s_total.conj_transpose());
    let t_adj = s_total; // T⁺ = T*J = S
    let t_pinv = t.pinv_full_col()?;

    let mut tj = Vec::with_capacity(p_ab.len());
    let mut tj_adj = Vec::with_capacity(p_ab.len());
    let mut tj_pinv = Vec::with_capacity(p_ab.len());
    for m in &p_ab {
        let (s, _) = crate::krein::psd_factor(&j.matmul(m), reference, tols)?;
        let tjm = j_inv.matmul(&s.conj_transpose());
        tj_pinv.push(tjm.pinv_full_col()?);
        tj.push(tjm);
        tj_adj.push(s);
    }

    // R_j from R_j* T⁺ = T_j⁺ (exact-rank least squares through the
    // full-row-rank pseudo-inverse of T⁺)
    let t_adj_pinv = t_adj.pinv_full_row()?;
    let mut rj = Vec::with_capacity(p_ab.len());
    for (idx, sj) in tj_adj.iter().enumerate() {
        let rj_star = sj.matmul(&t_adj_pinv);
        let residual = rel_diff(&rj_star.matmul(&t_adj), sj);
        if residual > tols.residual {
            return Err(Error::ResidualTooLarge { residual, tol: tols.residual });
        }
        let r = rj_star.conj_transpose();
        // consistency: T R_j = T_j
        let check = rel_diff(&t.matmul(&r), &tj[idx]);
        if check > tols.residual {
            return Err(Error::ResidualTooLarge { residual: check, tol: tols.residual });
        }
        rj.push(r);
    }

    Ok(EmbeddingSystem {
        n: n.clone(),
        n_adj: n.adjoint(),
        a,
        b,
        defpolys: defpolys.to_vec(),
        p_ab,
        sum_p,
        t,
        t_adj,
        t_pinv,
        tj,
        tj_adj,
        tj_pinv,
        rj,
        tols: *tols,
    })
}

impl EmbeddingSystem {
    pub fn operator(&self) -> &KreinOperator {
        &self.n
    }

    pub fn operator_adjoint(&self) -> &KreinOperator {
        &self.n_adj
    }

    pub fn space(&self) -> &Arc<crate::krein::KreinSpace> {
        self.n.space()
    }

    pub fn real_part(&self) -> &CMatrix {
        &self.a
    }

    pub fn imag_part(&self) -> &CMatrix {
        &self.b
    }

    pub fn defpolys(&self) -> &[Poly2] {
        &self.defpolys
    }

    pub fn num_polys(&self) -> usize {
        self.defpolys.len()
    }

    pub fn p_of_ab(&self, j: usize) -> &CMatrix {
        &self.p_ab[j]
    }

    pub fn sum_p(&self) -> &CMatrix {
        &self.sum_p
    }

    pub fn t(&self) -> &CMatrix {
        &self.t
    }

    pub fn t_adj(&self) -> &CMatrix {
        &self.t_adj
    }

    pub fn t_j(&self, j: usize) -> &CMatrix {
        &self.tj[j]
    }

    pub fn t_j_adj(&self, j: usize) -> &CMatrix {
        &self.tj_adj[j]
    }

    pub fn r_j(&self, j: usize) -> &CMatrix {
        &self.rj[j]
    }

    /// dim 𝓗
    pub fn h_dim(&self) -> usize {
        self.t.cols()
    }

    /// dim 𝓗_j
    pub fn hj_dim(&self, j: usize) -> usize {
        self.tj[j].cols()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tols
    }

    /// Θ(C) = T⁻¹ C T; errors when C does not (numerically) leave ran T
    /// invariant.
    pub fn theta(&self, c: &CMatrix) -> Result<CMatrix> {
        let d = self.t_pinv.matmul(c).matmul(&self.t);
        let lhs = self.t.matmul(&d);
        let rhs = c.matmul(&self.t);
        let scale = c.fro_norm().max(1.0) * self.t.fro_norm().max(1.0);
        let residual = lhs.sub(&rhs).fro_norm() / scale;
        if residual > self.tols.residual {
            return Err(Error::ResidualTooLarge { residual, tol: self.tols.residual });
        }
        Ok(d)
    }

    /// Θ_j(C) = T_j⁻¹ C T_j.
    pub fn theta_j(&self, j: usize, c: &CMatrix) -> Result<CMatrix> {
        let d = self.tj_pinv[j].matmul(c).matmul(&self.tj[j]);
        let lhs = self.tj[j].matmul(&d);
        let rhs = c.matmul(&self.tj[j]);
        let scale = c.fro_norm().max(1.0) * self.tj[j].fro_norm().max(1.0);
        let residual = lhs.sub(&rhs).fro_norm() / scale;
        if residual > self.tols.residual {
            return Err(Error::ResidualTooLarge { residual, tol: self.tols.residual });
        }
        Ok(d)
    }

    /// Γ_j(D) = R_j⁻¹ D R_j.
    pub fn gamma_j(&self, j: usize, d: &CMatrix) -> Result<CMatrix> {
        let r = &self.rj[j];
        let dj = r.pinv_full_col()?.matmul(d).matmul(r);
        let residual = rel_diff(&r.matmul(&dj), &d.matmul(r));
        if residual > self.tols.residual {
            return Err(Error::ResidualTooLarge { residual, tol: self.tols.residual });
        }
        Ok(dj)
    }

    /// Ξ(D) = T D T⁺.
    pub fn xi(&self, d: &CMatrix) -> Result<CMatrix> {
        if d.rows() != self.h_dim() || d.cols() != self.h_dim() {
            return Err(Error::DimensionMismatch(format!(
                "xi expects a {}x{} operator",
                self.h_dim(),
                self.h_dim()
            )));
        }
        Ok(self.t.matmul(d).matmul(&self.t_adj))
    }

    /// Ξ_j(D) = T_j D T_j⁺.
    pub fn xi_j(&self, j: usize, d: &CMatrix) -> Result<CMatrix> {
        let rj_dim = self.hj_dim(j);
        if d.rows() != rj_dim || d.cols() != rj_dim {
            return Err(Error::DimensionMismatch(format!("xi_j expects a {rj_dim}x{rj_dim} operator")));
        }
        Ok(self.tj[j].matmul(d).matmul(&self.tj_adj[j]))
    }

    /// Λ_j(D) = R_j D R_j*.
    pub fn lambda_j(&self, j: usize, d: &CMatrix) -> Result<CMatrix> {
        let rj_dim = self.hj_dim(j);
        if d.rows() != rj_dim || d.cols() != rj_dim {
            return Err(Error::DimensionMismatch(format!(
                "lambda_j expects a {rj_dim}x{rj_dim} operator"
            )));
        }
        Ok(self.rj[j].matmul(d).matmul(&self.rj[j].conj_transpose()))
    }

    pub fn theta_n(&self) -> Result<CMatrix> {
        self.theta(self.n.matrix())
    }

    pub fn theta_a(&self) -> Result<CMatrix> {
        self.theta(&self.a)
    }

    pub fn theta_b(&self) -> Result<CMatrix> {
        self.theta(&self.b)
    }

    /// R_j R_j* on 𝓗.
    pub fn rj_rj_star(&self, j: usize) -> CMatrix {
        self.rj[j].matmul(&self.rj[j].conj_transpose())
    }

    /// Structural invariants of the factorization, as residual checks:
    /// T_jT_j⁺ = p_j(A,B), TT⁺ = Σ p_k(A,B), TR_j = T_j, Σ R_kR_k* = I.
    pub fn invariant_checks(&self) -> Vec<IdentityCheck> {
        let tol = self.tols.residual;
        let mut out = Vec::new();
        let tt = self.t.matmul(&self.t_adj);
        out.push(IdentityCheck::new("factor_total", None, rel_diff(&tt, &self.sum_p), tol));
        for j in 0..self.num_polys() {
            let tjtj = self.tj[j].matmul(&self.tj_adj[j]);
            out.push(IdentityCheck::new("factor_j", Some(j), rel_diff(&tjtj, &self.p_ab[j]), tol));
            out.push(IdentityCheck::new(
                "t_times_rj",
                Some(j),
                rel_diff(&self.t.matmul(&self.rj[j]), &self.tj[j]),
                tol,
            ));
        }
        let mut sum_rr = CMatrix::zeros(self.h_dim(), self.h_dim());
        for j in 0..self.num_polys() {
            sum_rr = sum_rr.add(&self.rj_rj_star(j));
        }
        out.push(IdentityCheck::new(
            "partition_of_identity",
            None,
            rel_diff(&sum_rr, &CMatrix::identity(self.h_dim())),
            tol,
        ));
        out
    }

    /// The transfer identities, each evaluated with C = N, C = N⁺ and a
    /// handful of random integer polynomials u(A,B).
    pub fn verify_transfer_lemmas(&self, seed: u64) -> Result<Vec<IdentityCheck>> {
        let tol = self.tols.residual;
        let mut out = self.invariant_checks();
        let theta_n = self.theta_n()?;
        let theta_n_adj = self.theta(self.n_adj.matrix())?;
        let theta_a = self.theta_a()?;
        let theta_b = self.theta_b()?;
        let tt_adj = self.t_adj.matmul(&self.t); // T⁺T on 𝓗

        let cases: Vec<(&CMatrix, CMatrix)> = vec![
            (self.n.matrix(), theta_n.clone()),
            (self.n_adj.matrix(), theta_n_adj.clone()),
        ];

        for j in 0..self.num_polys() {
            let rr = self.rj_rj_star(j);
            for (c, theta_c) in &cases {
                let theta_j_c = self.theta_j(j, c)?;
                // Θ(C) R_jR_j* = R_j Θ_j(C) R_j* = R_jR_j* Θ(C)
                let lhs = theta_c.matmul(&rr);
                let mid = self.rj[j].matmul(&theta_j_c).matmul(&self.rj[j].conj_transpose());
                let rhs = rr.matmul(theta_c);
                let r1 = rel_diff(&lhs, &mid).max(rel_diff(&mid, &rhs));
                out.push(IdentityCheck::new("zuef", Some(j), r1, tol));
                // Θ_j(C) = Γ_j(Θ(C))
                let gamma = self.gamma_j(j, theta_c)?;
                out.push(IdentityCheck::new("zuefvor", Some(j), rel_diff(&theta_j_c, &gamma), tol));
            }
            // Θ(T_jT_j⁺) = R_jR_j* T⁺T = T⁺T R_jR_j*
            let theta_tjtj = self.theta(&self.tj[j].matmul(&self.tj_adj[j]))?;
            let prod1 = rr.matmul(&tt_adj);
            let prod2 = tt_adj.matmul(&rr);
            let r3 = rel_diff(&theta_tjtj, &prod1).max(rel_diff(&prod1, &prod2));
            out.push(IdentityCheck::new("zuef3", Some(j), r3, tol));
            // p_j(Θ(A),Θ(B)) = R_jR_j* Σ_k p_k(Θ(A),Θ(B)) (both orders)
            let pj_theta = self.defpolys[j].mat_subst(&theta_a, &theta_b, self.tols.commutation)?;
            let mut sum_theta = CMatrix::zeros(self.h_dim(), self.h_dim());
            for p in &self.defpolys {
                sum_theta = sum_theta.add(&p.mat_subst(&theta_a, &theta_b, self.tols.commutation)?);
            }
            let r4 = rel_diff(&pj_theta, &rr.matmul(&sum_theta))
                .max(rel_diff(&pj_theta, &sum_theta.matmul(&rr)));
            out.push(IdentityCheck::new("heaybab", Some(j), r4, tol));
        }

        // p_j(A,B)·u(A,B) = Ξ_j(u(Θ_j(A),Θ_j(B))) = Ξ(R_jR_j*·u(Θ(A),Θ(B)))
        let mut rng = SplitMix64::new(seed);
        for _ in 0..3 {
            let u = random_int_poly(&mut rng, 2, 2);
            let u_ab = u.mat_subst(&self.a, &self.b, self.tols.commutation)?;
            let u_theta = u.mat_subst(&theta_a, &theta_b, self.tols.commutation)?;
            for j in 0..self.num_polys() {
                let lhs = self.p_ab[j].matmul(&u_ab);
                let theta_j_a = self.theta_j(j, &self.a)?;
                let theta_j_b = self.theta_j(j, &self.b)?;
                let u_theta_j = u.mat_subst(&theta_j_a, &theta_j_b, self.tols.commutation)?;
                let mid = self.xi_j(j, &u_theta_j)?;
                let rhs = self.xi(&self.rj_rj_star(j).matmul(&u_theta))?;
                let r = rel_diff(&lhs, &mid).max(rel_diff(&mid, &rhs));
                out.push(IdentityCheck::new("tt2479", Some(j), r, tol));
            }
        }
        Ok(out)
    }
}

/// Random polynomial with small integer coefficients.
pub fn random_int_poly(rng: &mut SplitMix64, max_deg: u32, bound: i64) -> Poly2 {
    let mut p = Poly2::zero(crate::poly::VarPair::Xy);
    for i in 0..=max_deg {
        for j in 0..=max_deg {
            if i + j > max_deg {
                continue;
            }
            let c = GaussianRational::from_int(rng.next_small_int(bound));
            if !c.is_zero() {
                p = p.add(&Poly2::monomial(i, j, c, crate::poly::VarPair::Xy));
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein::KreinSpace;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pl(s: &str) -> Poly2 {
        Poly2::parse(s).unwrap()
    }

    /// Flip space, N = iI + E, definitizing (x, y-1).
    fn ex1() -> EmbeddingSystem {
        let j = CMatrix::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]);
        let space = KreinSpace::new(j).unwrap();
        let n = CMatrix::from_rows(vec![vec![c(0., 1.), c(1., 0.)], vec![c(0., 0.), c(0., 1.)]]);
        let op = KreinOperator::new(space, n).unwrap();
        build_embedding(&op, &[pl("x"), pl("y - 1")], &Tolerances::default()).unwrap()
    }

    /// ℂ³ = ℂ ⊕ flip, N = 2 ⊕ (iI + E), definitizing (x², y² - y).
    fn ex2() -> EmbeddingSystem {
        let j = CMatrix::from_rows(vec![
            vec![c(1., 0.), c(0., 0.), c(0., 0.)],
            vec![c(0., 0.), c(0., 0.), c(1., 0.)],
            vec![c(0., 0.), c(1., 0.), c(0., 0.)],
        ]);
        let space = KreinSpace::new(j).unwrap();
        let n = CMatrix::from_rows(vec![
            vec![c(2., 0.), c(0., 0.), c(0., 0.)],
            vec![c(0., 0.), c(0., 1.), c(1., 0.)],
            vec![c(0., 0.), c(0., 0.), c(0., 1.)],
        ]);
        let op = KreinOperator::new(space, n).unwrap();
        build_embedding(&op, &[pl("x^2"), pl("y^2 - y")], &Tolerances::default()).unwrap()
    }

    /// Hilbert space, N = diag(1, i, -2), definitizing (1).
    fn ex3() -> EmbeddingSystem {
        let space = KreinSpace::hilbert(3);
        let n = CMatrix::diag(&[c(1., 0.), c(0., 1.), c(-2., 0.)]);
        let op = KreinOperator::new(space, n).unwrap();
        build_embedding(&op, &[pl("1")], &Tolerances::default()).unwrap()
    }

    #[test]
    fn flip_embedding_has_one_dimensional_target() {
        let sys = ex1();
        assert_eq!(sys.h_dim(), 1);
        assert_eq!(sys.hj_dim(0), 1);
        assert_eq!(sys.hj_dim(1), 0); // p_2(A,B) = B - I = 0
        // T = (1, 0)^T and T⁺ = (0, 1)
        assert!((sys.t()[(0, 0)] - c(1., 0.)).norm() < 1e-12);
        assert!(sys.t()[(1, 0)].norm() < 1e-12);
        assert!(sys.t_adj()[(0, 0)].norm() < 1e-12);
        assert!((sys.t_adj()[(0, 1)] - c(1., 0.)).norm() < 1e-12);
        // Θ(N) = [i]
        let tn = sys.theta_n().unwrap();
        assert!((tn[(0, 0)] - c(0., 1.)).norm() < 1e-12);
    }

    #[test]
    fn block_embedding_matches_hand_computation() {
        let sys = ex2();
        assert_eq!(sys.h_dim(), 1);
        // T = (2, 0, 0)^T
        assert!((sys.t()[(0, 0)] - c(2., 0.)).norm() < 1e-12);
        // Θ(N) = [2]
        let tn = sys.theta_n().unwrap();
        assert!((tn[(0, 0)] - c(2., 0.)).norm() < 1e-11);
        // R_1 R_1* = I on the one-dimensional target
        let rr = sys.rj_rj_star(0);
        assert!((rr[(0, 0)] - c(1., 0.)).norm() < 1e-10);
    }

    #[test]
    fn hilbert_embedding_is_the_identity() {
        let sys = ex3();
        assert_eq!(sys.h_dim(), 3);
        assert!(sys.t().sub(&CMatrix::identity(3)).fro_norm() < 1e-12);
        let tn = sys.theta_n().unwrap();
        assert!(tn.sub(sys.operator().matrix()).fro_norm() < 1e-12);
        // R_1 = I
        assert!(sys.r_j(0).sub(&CMatrix::identity(3)).fro_norm() < 1e-10);
        // Ξ is the identity transport
        let d = CMatrix::diag(&[c(1., 1.), c(0., 2.), c(3., 0.)]);
        assert!(sys.xi(&d).unwrap().sub(&d).fro_norm() < 1e-12);
    }

    #[test]
    fn xi_of_identity_reproduces_the_total_form() {
        for sys in [ex1(), ex2(), ex3()] {
            let id = CMatrix::identity(sys.h_dim());
            let xi_id = sys.xi(&id).unwrap();
            assert!(xi_id.sub(sys.sum_p()).fro_norm() <= 1e-10 * sys.sum_p().fro_norm().max(1.0));
        }
    }

    #[test]
    fn xi_on_flip_space_hits_the_nilpotent_direction() {
        let sys = ex1();
        // Ξ([c]) = c · T T⁺ = c · E
        let d = CMatrix::diag(&[c(3., -2.)]);
        let out = sys.xi(&d).unwrap();
        assert!((out[(0, 1)] - c(3., -2.)).norm() < 1e-12);
        assert!(out[(0, 0)].norm() + out[(1, 0)].norm() + out[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn transfer_lemmas_hold_on_reference_systems() {
        for (name, sys) in [("ex1", ex1()), ("ex2", ex2()), ("ex3", ex3())] {
            let checks = sys.verify_transfer_lemmas(7).unwrap();
            for chk in &checks {
                assert!(
                    chk.pass,
                    "{name}: identity {} (index {:?}) residual {:.3e} > {:.3e}",
                    chk.tag, chk.index, chk.residual, chk.tol
                );
            }
        }
    }

    #[test]
    fn theta_rejects_operators_outside_the_commutant() {
        let sys = ex2();
        // a generic matrix does not leave ran T invariant
        let bad = CMatrix::from_rows(vec![
            vec![c(0., 0.), c(1., 0.), c(0., 0.)],
            vec![c(1., 0.), c(0., 0.), c(0., 0.)],
            vec![c(0., 0.), c(0., 0.), c(1., 0.)],
        ]);
        assert!(matches!(sys.theta(&bad), Err(Error::ResidualTooLarge { .. })));
    }

    #[test]
    fn theta_is_multiplicative_and_star_preserving() {
        for sys in [ex1(), ex2(), ex3()] {
            let n = sys.operator().matrix();
            let nadj = sys.operator_adjoint().matrix();
            let tn = sys.theta(n).unwrap();
            let tnadj = sys.theta(nadj).unwrap();
            // Θ(N N⁺) = Θ(N)Θ(N⁺)
            let prod = sys.theta(&n.matmul(nadj)).unwrap();
            assert!(prod.sub(&tn.matmul(&tnadj)).fro_norm() <= 1e-9 * prod.fro_norm().max(1.0));
            // Θ(I) = I
            let id = sys.theta(&CMatrix::identity(sys.space().dim())).unwrap();
            assert!(id.sub(&CMatrix::identity(sys.h_dim())).fro_norm() < 1e-9);
            // Θ(N⁺) = Θ(N)* (Hilbert adjoint)
            assert!(tnadj.sub(&tn.conj_transpose()).fro_norm() < 1e-9);
        }
    }

    #[test]
    fn transported_operators_are_normal() {
        for sys in [ex1(), ex2(), ex3()] {
            let tn = sys.theta_n().unwrap();
            let comm = tn.matmul(&tn.conj_transpose()).sub(&tn.conj_transpose().matmul(&tn));
            assert!(comm.fro_norm() <= 1e-10 * tn.fro_norm().max(1.0).powi(2));
            for j in 0..sys.num_polys() {
                let tjn = sys.theta_j(j, sys.operator().matrix()).unwrap();
                let comm = tjn.matmul(&tjn.conj_transpose()).sub(&tjn.conj_transpose().matmul(&tjn));
                assert!(comm.fro_norm() <= 1e-10 * tjn.fro_norm().max(1.0).powi(2));
            }
        }
    }

    #[test]
    fn spectra_of_local_transports_sit_inside_the_total_one() {
        // every eigenvalue of Θ_j(N) matches one of Θ(N)
        for sys in [ex1(), ex2(), ex3()] {
            let sigma: Vec<Complex64> = sys.theta_n().unwrap().eigenvalues().unwrap();
            for j in 0..sys.num_polys() {
                let sj = sys.theta_j(j, sys.operator().matrix()).unwrap().eigenvalues().unwrap();
                for ev in sj {
                    let ok = sigma.iter().any(|s| (s - ev).norm() <= 1e-8 * s.norm().max(1.0));
                    assert!(ok, "eigenvalue {ev} of a local transport missing from the total spectrum");
                }
            }
        }
    }

    #[test]
    fn xi_j_factors_through_lambda_j() {
        // T_j = T R_j gives Ξ_j = Ξ ∘ Λ_j
        let mut rng = SplitMix64::new(40);
        for sys in [ex1(), ex2(), ex3()] {
            for j in 0..sys.num_polys() {
                let dim = sys.hj_dim(j);
                let d = CMatrix::from_fn(dim, dim, |_, _| rng.next_complex());
                let direct = sys.xi_j(j, &d).unwrap();
                let through = sys.xi(&sys.lambda_j(j, &d).unwrap()).unwrap();
                let scale = direct.fro_norm().max(1.0);
                assert!(direct.sub(&through).fro_norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn zero_rank_factors_keep_formulas_uniform() {
        let sys = ex1();
        // p_2(A,B) = 0: the factor has zero columns and all transports vanish
        assert_eq!(sys.hj_dim(1), 0);
        let d = CMatrix::zeros(0, 0);
        let xi = sys.xi_j(1, &d).unwrap();
        assert_eq!(xi.rows(), 2);
        assert_eq!(xi.fro_norm(), 0.0);
        let lam = sys.lambda_j(1, &d).unwrap();
        assert_eq!(lam.rows(), 1);
        assert_eq!(lam.fro_norm(), 0.0);
    }

    #[test]
    fn not_definitizing_is_reported_with_index() {
        let space = KreinSpace::hilbert(2);
        let n = KreinOperator::new(space, CMatrix::diag(&[c(1., 0.), c(2., 0.)])).unwrap();
        let err = build_embedding(&n, &[pl("1"), pl("-1")], &Tolerances::default()).unwrap_err();
        match err {
            Error::NotDefinitizing { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
