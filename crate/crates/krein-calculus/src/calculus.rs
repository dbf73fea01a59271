//! The functional calculus φ ↦ φ(N).
//!
//! Functions live on the disjoint union of the spectrum of Θ(N) and the
//! variety of the definitizing ideal: complex scalars at spectral points
//! away from the real variety, cosets in 𝒜(w) = ℂ\[x,y\]/(P(w)·Q(w)) at real
//! variety points w, cosets in ℬ(ξ,η) = ℂ\[x,y\]/Q((ξ,η)) at nonreal variety
//! points. Such a function decomposes as
//!
//! φ(z) = r(z) + Σ_j f_j(z)·p_j(z)
//!
//! with an exact polynomial r obtained by Chinese-remainder interpolation
//! of the cosets and a shared bounded quotient f_j = (φ - r)/Σ p_k away
//! from the real variety. Applying
//!
//! Ψ(r, f_1, …, f_m) = r(A,B) + Σ_k Ξ_k(∫ f_k dE_k)
//!
//! to any decomposition yields φ(N); independence of the decomposition is
//! exercised by the ideal-membership test and the acceptance suite rather
//! than assumed.

use crate::embedding::{build_embedding, EmbeddingSystem};
use crate::error::{Error, Result};
use crate::ideal::{
    groebner, quotient_algebra, variety, Coset, CrtSolver, IdealData, LiftSystem, QuotientAlgebra,
    VarietyPoint,
};
use crate::krein::{KreinOperator, Tolerances};
use crate::linalg::CMatrix;
use crate::poly::{Poly2, VarPair};
use crate::rng::SplitMix64;
use crate::scalar::GaussianRational;
use crate::spectral::{transported_spectra, SpectralData, TransportedSpectra};
use num_complex::Complex64;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Assembled calculus context for one definitizable normal operator: the
/// embedding system, the exact ideal data with its variety, the spectral
/// measures of the transported operators, and the cached exact solvers.
pub struct Calculus {
    sys: EmbeddingSystem,
    ideal: IdealData,
    quotient: QuotientAlgebra,
    variety: Vec<VarietyPoint>,
    spectra: TransportedSpectra,
    /// Indices of real / nonreal variety points.
    real_pts: Vec<usize>,
    nonreal_pts: Vec<usize>,
    /// For each nonreal point, the index of its coordinate-conjugate.
    conj_pair: BTreeMap<usize, usize>,
    /// For each Θ(N) eigenvalue cluster, the real variety point it matches.
    cluster_point: Vec<Option<usize>>,
    /// For each variety point, the cluster it matches (real points only).
    point_cluster: Vec<Option<usize>>,
    /// Clusters away from the real variety (the scalar part of the domain).
    scalar_clusters: Vec<usize>,
    /// CRT solver over the decomposition moduli (one per variety point,
    /// 𝒜(w) at real w, ℬ at nonreal points); `None` for an empty variety.
    crt: Option<CrtSolver>,
    /// Cofactor lift for W = V_ℝ(I) ∩ σ(Θ(N)).
    lift: LiftSystem,
    /// Variety indices of the window W.
    window: Vec<usize>,
    tols: Tolerances,
    scale: f64,
}

impl Calculus {
    /// Builds the full context. The definitizing polynomials must be real,
    /// each must pass the definitizing test, and the ideal they generate
    /// must be zero-dimensional.
    pub fn build(n: &KreinOperator, defpolys: &[Poly2], tols: &Tolerances) -> Result<Arc<Self>> {
        if defpolys.is_empty() {
            return Err(Error::InvalidProblem("need at least one definitizing polynomial".into()));
        }
        for (k, p) in defpolys.iter().enumerate() {
            if !p.is_real() {
                return Err(Error::InvalidProblem(format!(
                    "definitizing polynomial #{k} has non-real coefficients; replace it by (p + p#)/2"
                )));
            }
            if p.vars() != VarPair::Xy {
                return Err(Error::InvalidProblem("definitizing polynomials live in (x, y)".into()));
            }
        }
        let sys = build_embedding(n, defpolys, tols)?;
        let ideal = groebner(defpolys);
        if !ideal.is_zero_dimensional() {
            return Err(Error::NotZeroDimensional);
        }
        let quotient = quotient_algebra(&ideal)?;
        let var = variety(&ideal, &quotient, tols.snap)?;
        let spectra = transported_spectra(&sys, tols)?;

        let real_pts: Vec<usize> =
            var.iter().enumerate().filter(|(_, p)| p.is_real).map(|(k, _)| k).collect();
        let nonreal_pts: Vec<usize> =
            var.iter().enumerate().filter(|(_, p)| !p.is_real).map(|(k, _)| k).collect();
        let mut conj_pair = BTreeMap::new();
        for &k in &nonreal_pts {
            let cx = var[k].x.conj();
            let cy = var[k].y.conj();
            let partner = var
                .iter()
                .position(|p| p.same_coords(&cx, &cy))
                .ok_or_else(|| Error::InvalidProblem("variety is not conjugation-closed".into()))?;
            conj_pair.insert(k, partner);
        }

        let mut cluster_point = vec![None; spectra.total.num_clusters()];
        let mut point_cluster = vec![None; var.len()];
        for (c, &z) in spectra.total.eigenvalues().iter().enumerate() {
            for &k in &real_pts {
                if (var[k].as_complex() - z).norm() <= tols.point_match {
                    if cluster_point[c].is_some() {
                        return Err(Error::InvalidProblem(
                            "two variety points match one spectral cluster".into(),
                        ));
                    }
                    cluster_point[c] = Some(k);
                    point_cluster[k] = Some(c);
                }
            }
        }
        let scalar_clusters: Vec<usize> = (0..spectra.total.num_clusters())
            .filter(|&c| cluster_point[c].is_none())
            .collect();

        let crt = if var.is_empty() {
            None
        } else {
            let moduli: Vec<Arc<QuotientAlgebra>> = var
                .iter()
                .map(|p| {
                    if p.is_real {
                        Arc::clone(&p.algebra_a)
                    } else {
                        Arc::clone(&p.algebra_b)
                    }
                })
                .collect();
            // The intersection of the moduli is I · Π_{a real} P(a): the
            // product of all local components recovers I, and the extra
            // radicals upgrade the real factors from Q(a) to P(a)·Q(a).
            // Presenting it by the products p_j·g keeps the degrees low.
            let mut radical_prod = crate::ideal::groebner_untracked(&[Poly2::one(VarPair::Xy)]);
            for pt in var.iter().filter(|p| p.is_real) {
                radical_prod = crate::ideal::product_ideal(&radical_prod, &pt.local_p);
            }
            let mut joint_gens = Vec::new();
            for p in ideal.generators() {
                for g in radical_prod.groebner_basis() {
                    joint_gens.push(p.mul(g));
                }
            }
            let joint_ideal = crate::ideal::groebner_untracked(&joint_gens);
            let joint = Arc::new(quotient_algebra(&joint_ideal)?);
            Some(CrtSolver::with_joint(moduli, joint)?)
        };

        let window: Vec<usize> = real_pts
            .iter()
            .copied()
            .filter(|&k| point_cluster[k].is_some())
            .collect();
        let window_pts: Vec<&VarietyPoint> = window.iter().map(|&k| &var[k]).collect();
        let lift = LiftSystem::new(&ideal, &window_pts);

        let scale = n.norm().max(1.0);
        Ok(Arc::new(Self {
            sys,
            ideal,
            quotient,
            variety: var,
            spectra,
            real_pts,
            nonreal_pts,
            conj_pair,
            cluster_point,
            point_cluster,
            scalar_clusters,
            crt,
            lift,
            window,
            tols: *tols,
            scale,
        }))
    }

    pub fn system(&self) -> &EmbeddingSystem {
        &self.sys
    }

    pub fn operator(&self) -> &KreinOperator {
        self.sys.operator()
    }

    pub fn ideal(&self) -> &IdealData {
        &self.ideal
    }

    pub fn quotient(&self) -> &QuotientAlgebra {
        &self.quotient
    }

    pub fn variety(&self) -> &[VarietyPoint] {
        &self.variety
    }

    pub fn real_points(&self) -> &[usize] {
        &self.real_pts
    }

    pub fn nonreal_points(&self) -> &[usize] {
        &self.nonreal_pts
    }

    pub fn conjugate_of(&self, nonreal_idx: usize) -> usize {
        self.conj_pair[&nonreal_idx]
    }

    pub fn spectra(&self) -> &TransportedSpectra {
        &self.spectra
    }

    pub fn total_spectrum(&self) -> &SpectralData {
        &self.spectra.total
    }

    /// Clusters of σ(Θ(N)) away from the real variety.
    pub fn scalar_clusters(&self) -> &[usize] {
        &self.scalar_clusters
    }

    /// The real variety point matched by a spectral cluster, if any.
    pub fn cluster_point(&self, cluster: usize) -> Option<usize> {
        self.cluster_point[cluster]
    }

    /// The spectral cluster matched by a real variety point, if any.
    pub fn point_cluster(&self, point: usize) -> Option<usize> {
        self.point_cluster[point]
    }

    /// Variety indices of W = V_ℝ(I) ∩ σ(Θ(N)).
    pub fn window(&self) -> &[usize] {
        &self.window
    }

    pub fn lift_system(&self) -> &LiftSystem {
        &self.lift
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tols
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn num_polys(&self) -> usize {
        self.sys.num_polys()
    }

    /// χ_w(z) = max_j |h_j(z)| over the generators of Q(w); diagnostic for
    /// the growth behaviour of functions near a real variety point.
    pub fn compute_chi(&self, point_idx: usize, z: Complex64) -> Result<f64> {
        let pt = self
            .variety
            .get(point_idx)
            .ok_or(Error::NotInVariety)?;
        if !pt.is_real {
            return Err(Error::NotInVariety);
        }
        Ok(pt
            .local_q
            .groebner_basis()
            .iter()
            .map(|h| h.eval_at_complex(z).norm())
            .fold(0.0, f64::max))
    }

    /// σ(N) as deduplicated eigenvalue clusters of the plain matrix.
    pub fn operator_spectrum(&self) -> Result<Vec<Complex64>> {
        let eig = self.sys.operator().matrix().eigenvalues()?;
        let tol = self.tols.spectrum_match * self.scale;
        let mut out: Vec<Complex64> = Vec::new();
        for e in eig {
            if !out.iter().any(|z| (*z - e).norm() <= tol) {
                out.push(e);
            }
        }
        out.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        Ok(out)
    }
}

/// An element of the function class: scalars on the spectral clusters away
/// from the real variety, 𝒜-cosets at real variety points, ℬ-cosets at
/// nonreal points.
#[derive(Clone)]
pub struct CalcFunction {
    calc: Arc<Calculus>,
    scalars: BTreeMap<usize, Complex64>,
    real_cosets: BTreeMap<usize, Coset>,
    nonreal_cosets: BTreeMap<usize, Coset>,
}

impl std::fmt::Debug for CalcFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CalcFunction")
            .field("scalars", &self.scalars)
            .field("real_points", &self.real_cosets.keys().collect::<Vec<_>>())
            .field("nonreal_points", &self.nonreal_cosets.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl CalcFunction {
    fn validate(self) -> Result<Self> {
        let c = &self.calc;
        for &k in c.scalar_clusters() {
            if !self.scalars.contains_key(&k) {
                let z = c.total_spectrum().eigenvalues()[k];
                return Err(Error::MissingValue { z: (z.re, z.im) });
            }
        }
        if self.scalars.len() != c.scalar_clusters().len() {
            return Err(Error::InvalidProblem("scalar values outside the domain".into()));
        }
        for &k in c.real_points() {
            let coset = self
                .real_cosets
                .get(&k)
                .ok_or_else(|| Error::InvalidProblem(format!("missing coset at variety point #{k}")))?;
            if coset.algebra().as_ref() != c.variety()[k].algebra_a.as_ref() {
                return Err(Error::AlgebraMismatch);
            }
        }
        for &k in c.nonreal_points() {
            let coset = self
                .nonreal_cosets
                .get(&k)
                .ok_or_else(|| Error::InvalidProblem(format!("missing coset at variety point #{k}")))?;
            if coset.algebra().as_ref() != c.variety()[k].algebra_b.as_ref() {
                return Err(Error::AlgebraMismatch);
            }
        }
        if self.real_cosets.len() != c.real_points().len()
            || self.nonreal_cosets.len() != c.nonreal_points().len()
        {
            return Err(Error::InvalidProblem("cosets outside the domain".into()));
        }
        Ok(self)
    }

    pub fn context(&self) -> &Arc<Calculus> {
        &self.calc
    }

    pub fn scalar_at(&self, cluster: usize) -> Option<Complex64> {
        self.scalars.get(&cluster).copied()
    }

    pub fn coset_at(&self, point_idx: usize) -> Option<&Coset> {
        self.real_cosets.get(&point_idx).or_else(|| self.nonreal_cosets.get(&point_idx))
    }

    /// max(1, ‖N‖, sup |scalars|, max coset coordinate magnitude).
    pub fn scale(&self) -> f64 {
        let mut s = self.calc.scale();
        for v in self.scalars.values() {
            s = s.max(v.norm());
        }
        for cs in self.real_cosets.values().chain(self.nonreal_cosets.values()) {
            for c in cs.coords() {
                s = s.max(c.to_complex().norm());
            }
        }
        s
    }

    fn check_same_context(&self, rhs: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.calc, &rhs.calc) {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_context(rhs)?;
        let mut scalars = BTreeMap::new();
        for (&k, v) in &self.scalars {
            scalars.insert(k, v + rhs.scalars[&k]);
        }
        let mut real_cosets = BTreeMap::new();
        for (&k, c) in &self.real_cosets {
            real_cosets.insert(k, c.add(&rhs.real_cosets[&k])?);
        }
        let mut nonreal_cosets = BTreeMap::new();
        for (&k, c) in &self.nonreal_cosets {
            nonreal_cosets.insert(k, c.add(&rhs.nonreal_cosets[&k])?);
        }
        Ok(Self { calc: Arc::clone(&self.calc), scalars, real_cosets, nonreal_cosets })
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_same_context(rhs)?;
        let mut scalars = BTreeMap::new();
        for (&k, v) in &self.scalars {
            scalars.insert(k, v * rhs.scalars[&k]);
        }
        let mut real_cosets = BTreeMap::new();
        for (&k, c) in &self.real_cosets {
            real_cosets.insert(k, c.mul(&rhs.real_cosets[&k])?);
        }
        let mut nonreal_cosets = BTreeMap::new();
        for (&k, c) in &self.nonreal_cosets {
            nonreal_cosets.insert(k, c.mul(&rhs.nonreal_cosets[&k])?);
        }
        Ok(Self { calc: Arc::clone(&self.calc), scalars, real_cosets, nonreal_cosets })
    }

    pub fn scale_by(&self, c: Complex64) -> Self {
        let g = GaussianRational::from_f64_exact(c.re, c.im).expect("finite scalar");
        let scalars = self.scalars.iter().map(|(&k, v)| (k, v * c)).collect();
        let real_cosets = self.real_cosets.iter().map(|(&k, cs)| (k, cs.scale(&g))).collect();
        let nonreal_cosets = self.nonreal_cosets.iter().map(|(&k, cs)| (k, cs.scale(&g))).collect();
        Self { calc: Arc::clone(&self.calc), scalars, real_cosets, nonreal_cosets }
    }

    /// The involution: conjugate scalars, conjugate cosets at real points,
    /// and swap coordinate-conjugate nonreal points.
    pub fn sharp(&self) -> Result<Self> {
        let c = &self.calc;
        let scalars = self.scalars.iter().map(|(&k, v)| (k, v.conj())).collect();
        let mut real_cosets = BTreeMap::new();
        for (&k, cs) in &self.real_cosets {
            real_cosets.insert(k, cs.sharp_into(&c.variety()[k].algebra_a));
        }
        let mut nonreal_cosets = BTreeMap::new();
        for &k in c.nonreal_points() {
            let partner = c.conjugate_of(k);
            let source = &self.nonreal_cosets[&partner];
            nonreal_cosets.insert(k, source.sharp_into(&c.variety()[k].algebra_b));
        }
        Self { calc: Arc::clone(c), scalars, real_cosets, nonreal_cosets }.validate()
    }
}

/// Incremental construction of a `CalcFunction` from scattered values;
/// `build` validates that the domain is covered exactly.
pub struct CalcFunctionBuilder {
    calc: Arc<Calculus>,
    scalars: BTreeMap<usize, Complex64>,
    real_cosets: BTreeMap<usize, Coset>,
    nonreal_cosets: BTreeMap<usize, Coset>,
}

impl CalcFunctionBuilder {
    pub fn new(calc: &Arc<Calculus>) -> Self {
        Self {
            calc: Arc::clone(calc),
            scalars: BTreeMap::new(),
            real_cosets: BTreeMap::new(),
            nonreal_cosets: BTreeMap::new(),
        }
    }

    pub fn scalar(mut self, cluster: usize, v: Complex64) -> Self {
        self.scalars.insert(cluster, v);
        self
    }

    pub fn coset(mut self, point_idx: usize, c: Coset) -> Self {
        if self.calc.variety()[point_idx].is_real {
            self.real_cosets.insert(point_idx, c);
        } else {
            self.nonreal_cosets.insert(point_idx, c);
        }
        self
    }

    pub fn build(self) -> Result<CalcFunction> {
        CalcFunction {
            calc: self.calc,
            scalars: self.scalars,
            real_cosets: self.real_cosets,
            nonreal_cosets: self.nonreal_cosets,
        }
        .validate()
    }
}

/// A polynomial viewed as a calculus function: its values at spectral
/// points and its residue classes at the variety.
pub fn embed_poly(calc: &Arc<Calculus>, s: &Poly2) -> Result<CalcFunction> {
    if s.vars() != VarPair::Xy {
        return Err(Error::InvalidProblem("calculus functions live in (x, y)".into()));
    }
    let mut scalars = BTreeMap::new();
    for &k in calc.scalar_clusters() {
        let z = calc.total_spectrum().eigenvalues()[k];
        scalars.insert(k, s.eval_at_complex(z));
    }
    let mut real_cosets = BTreeMap::new();
    for &k in calc.real_points() {
        real_cosets.insert(k, Coset::from_poly(s, &calc.variety()[k].algebra_a));
    }
    let mut nonreal_cosets = BTreeMap::new();
    for &k in calc.nonreal_points() {
        nonreal_cosets.insert(k, Coset::from_poly(s, &calc.variety()[k].algebra_b));
    }
    CalcFunction { calc: Arc::clone(calc), scalars, real_cosets, nonreal_cosets }.validate()
}

/// The constant-one function.
pub fn unit_function(calc: &Arc<Calculus>) -> Result<CalcFunction> {
    embed_poly(calc, &Poly2::one(VarPair::Xy))
}

/// The identity function z ↦ z, i.e. the polynomial x + iy.
pub fn identity_function(calc: &Arc<Calculus>) -> Result<CalcFunction> {
    let s = Poly2::x().add(&Poly2::y().scale(&GaussianRational::i()));
    embed_poly(calc, &s)
}

/// A function given by scalar values and jets of partial derivatives at the
/// variety points. At a real point w the jet must cover
/// J(w) = {0..d_x-1}×{0..d_y-1} ∪ {(d_x,0), (0,d_y)}; at a nonreal point the
/// grid {0..d_x-1}×{0..d_y-1}. The Taylor polynomial
/// Σ jet(k,l)/(k!l!) · (x-ξ)^k (y-η)^l is reduced into the local algebra.
pub fn embed_jet(
    calc: &Arc<Calculus>,
    scalar_values: &BTreeMap<usize, Complex64>,
    jets: &BTreeMap<usize, BTreeMap<(u32, u32), Complex64>>,
) -> Result<CalcFunction> {
    let mut scalars = BTreeMap::new();
    for &k in calc.scalar_clusters() {
        let z = calc.total_spectrum().eigenvalues()[k];
        let v = scalar_values.get(&k).ok_or(Error::MissingValue { z: (z.re, z.im) })?;
        scalars.insert(k, *v);
    }
    let taylor = |point_idx: usize, required: &[(u32, u32)]| -> Result<Poly2> {
        let pt = &calc.variety()[point_idx];
        let jet = jets
            .get(&point_idx)
            .ok_or(Error::MissingJet { point: point_idx, k: 0, l: 0 })?;
        let vars = VarPair::Xy;
        let dx_lin = Poly2::var_first(vars).sub(&Poly2::constant(pt.x.clone(), vars));
        let dy_lin = Poly2::var_second(vars).sub(&Poly2::constant(pt.y.clone(), vars));
        let mut acc = Poly2::zero(vars);
        for &(k, l) in required {
            let v = jet
                .get(&(k, l))
                .ok_or(Error::MissingJet { point: point_idx, k: k as usize, l: l as usize })?;
            let g = GaussianRational::from_f64_exact(v.re, v.im)
                .ok_or_else(|| Error::InvalidProblem("non-finite jet entry".into()))?;
            let fact = factorial(k) * factorial(l);
            let coeff = &g * &GaussianRational::from_ratio(1, fact);
            acc = acc.add(&dx_lin.pow(k).mul(&dy_lin.pow(l)).scale(&coeff));
        }
        Ok(acc)
    };
    let mut real_cosets = BTreeMap::new();
    for &k in calc.real_points() {
        let pt = &calc.variety()[k];
        let mut required = Vec::new();
        for a in 0..pt.d_x {
            for b in 0..pt.d_y {
                required.push((a, b));
            }
        }
        required.push((pt.d_x, 0));
        required.push((0, pt.d_y));
        let poly = taylor(k, &required)?;
        real_cosets.insert(k, Coset::from_poly(&poly, &pt.algebra_a));
    }
    let mut nonreal_cosets = BTreeMap::new();
    for &k in calc.nonreal_points() {
        let pt = &calc.variety()[k];
        let mut required = Vec::new();
        for a in 0..pt.d_x {
            for b in 0..pt.d_y {
                required.push((a, b));
            }
        }
        let poly = taylor(k, &required)?;
        nonreal_cosets.insert(k, Coset::from_poly(&poly, &pt.algebra_b));
    }
    CalcFunction { calc: Arc::clone(calc), scalars, real_cosets, nonreal_cosets }.validate()
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product::<i64>().max(1)
}

/// The function a·δ_ζ: value a at the variety point ζ, zero elsewhere.
pub fn delta(calc: &Arc<Calculus>, point_idx: usize, a: Coset) -> Result<CalcFunction> {
    if point_idx >= calc.variety().len() {
        return Err(Error::NotInVariety);
    }
    let pt = &calc.variety()[point_idx];
    let expected = if pt.is_real { &pt.algebra_a } else { &pt.algebra_b };
    if a.algebra().as_ref() != expected.as_ref() {
        return Err(Error::AlgebraMismatch);
    }
    let mut scalars = BTreeMap::new();
    for &k in calc.scalar_clusters() {
        scalars.insert(k, Complex64::zero());
    }
    let mut real_cosets = BTreeMap::new();
    for &k in calc.real_points() {
        let alg = &calc.variety()[k].algebra_a;
        real_cosets.insert(k, if k == point_idx { a.clone() } else { alg.zero_coset() });
    }
    let mut nonreal_cosets = BTreeMap::new();
    for &k in calc.nonreal_points() {
        let alg = &calc.variety()[k].algebra_b;
        nonreal_cosets.insert(k, if k == point_idx { a.clone() } else { alg.zero_coset() });
    }
    CalcFunction { calc: Arc::clone(calc), scalars, real_cosets, nonreal_cosets }.validate()
}

/// The Riesz-type function e·δ_ζ with e the unit of the local algebra.
pub fn unit_delta(calc: &Arc<Calculus>, point_idx: usize) -> Result<CalcFunction> {
    let pt = calc.variety().get(point_idx).ok_or(Error::NotInVariety)?;
    let e = if pt.is_real { pt.algebra_a.unit_coset() } else { pt.algebra_b.unit_coset() };
    delta(calc, point_idx, e)
}

/// A decomposition datum (r, f_1, …, f_m): an exact polynomial plus one
/// bounded function per definitizing polynomial, sampled on the eigenvalue
/// clusters of Θ(N).
#[derive(Debug, Clone)]
pub struct Triple {
    pub r: Poly2,
    /// `f[j][c]` = f_j at the c-th cluster of σ(Θ(N)).
    pub f: Vec<Vec<Complex64>>,
}

impl Triple {
    pub fn polynomial(r: Poly2, calc: &Calculus) -> Self {
        let clusters = calc.total_spectrum().num_clusters();
        Self { r, f: vec![vec![Complex64::zero(); clusters]; calc.num_polys()] }
    }

    /// t# = (r#, conj f_1, …, conj f_m).
    pub fn sharp(&self) -> Self {
        Self {
            r: self.r.sharp(),
            f: self.f.iter().map(|row| row.iter().map(|v| v.conj()).collect()).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            r: self.r.add(&rhs.r),
            f: self
                .f
                .iter()
                .zip(&rhs.f)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }
}

/// Decomposes φ into a Triple: r interpolates the cosets through the CRT,
/// and every f_j is the shared quotient (φ(z) - r(z)) / Σ_k p_k(z) away
/// from the real variety, zero on it.
pub fn decompose(phi: &CalcFunction) -> Result<Triple> {
    let calc = &phi.calc;
    let r = match &calc.crt {
        None => Poly2::zero(VarPair::Xy),
        Some(solver) => {
            let mut targets = Vec::with_capacity(calc.variety().len());
            for (k, pt) in calc.variety().iter().enumerate() {
                let coset = if pt.is_real {
                    phi.real_cosets[&k].clone()
                } else {
                    phi.nonreal_cosets[&k].clone()
                };
                targets.push(coset);
            }
            solver.interpolate(&targets)?
        }
    };
    let clusters = calc.total_spectrum().num_clusters();
    let mut shared = vec![Complex64::zero(); clusters];
    let floor = calc.tols.denom_floor * calc.scale();
    for &c in calc.scalar_clusters() {
        let z = calc.total_spectrum().eigenvalues()[c];
        let denom: Complex64 = calc
            .sys
            .defpolys()
            .iter()
            .map(|p| p.eval_at_complex(z))
            .fold(Complex64::zero(), |a, b| a + b);
        if denom.norm() <= floor {
            return Err(Error::VanishingDenominator { re: z.re, im: z.im });
        }
        shared[c] = (phi.scalars[&c] - r.eval_at_complex(z)) / denom;
    }
    Ok(Triple { r, f: vec![shared; calc.num_polys()] })
}

/// Ψ(r, f_1, …, f_m) = r(A,B) + Σ_k Ξ_k(∫ f_k dE_k); the f_k are restricted
/// from the clusters of Θ(N) to the spectrum of each Θ_k(N).
pub fn psi_apply(calc: &Calculus, t: &Triple) -> Result<CMatrix> {
    let mut acc = t.r.mat_subst(
        calc.sys.real_part(),
        calc.sys.imag_part(),
        calc.tols.commutation,
    )?;
    let match_tol = calc.tols.point_match;
    for k in 0..calc.num_polys() {
        let local = &calc.spectra.locals[k];
        if local.dim() == 0 {
            continue;
        }
        let mut values = Vec::with_capacity(local.num_clusters());
        for &mu in local.eigenvalues() {
            let idx = calc
                .total_spectrum()
                .match_eigenvalue(mu, match_tol)
                .ok_or(Error::MissingValue { z: (mu.re, mu.im) })?;
            values.push(t.f[k][idx]);
        }
        let integral = local.integrate_values(&values)?;
        acc = acc.add(&calc.sys.xi_j(k, &integral)?);
    }
    Ok(acc)
}

/// The product of ℛ: (r, f)·(s, g) = (rs, rg_j + sf_j + f_j·Σ_k g_k p_k).
pub fn triple_mul(calc: &Calculus, t: &Triple, u: &Triple) -> Triple {
    let clusters = calc.total_spectrum().eigenvalues();
    let m = calc.num_polys();
    let r_vals: Vec<Complex64> = clusters.iter().map(|&z| t.r.eval_at_complex(z)).collect();
    let s_vals: Vec<Complex64> = clusters.iter().map(|&z| u.r.eval_at_complex(z)).collect();
    let p_vals: Vec<Vec<Complex64>> = calc
        .sys
        .defpolys()
        .iter()
        .map(|p| clusters.iter().map(|&z| p.eval_at_complex(z)).collect())
        .collect();
    let mut f = Vec::with_capacity(m);
    for j in 0..m {
        let mut row = Vec::with_capacity(clusters.len());
        for c in 0..clusters.len() {
            let sum_gp: Complex64 = (0..m).map(|k| u.f[k][c] * p_vals[k][c]).sum();
            row.push(r_vals[c] * u.f[j][c] + s_vals[c] * t.f[j][c] + t.f[j][c] * sum_gp);
        }
        f.push(row);
    }
    Triple { r: t.r.mul(&u.r), f }
}

/// Report of the ideal-membership test for a triple.
#[derive(Debug, Clone)]
pub struct IdealMembership {
    /// r + Σ f_k p_k vanishes on the spectral clusters away from V_ℝ.
    pub vanishes_off_variety: bool,
    /// Worst residual of that condition.
    pub off_variety_residual: f64,
    /// r lies in the constrained ideal J.
    pub r_in_constrained_ideal: bool,
    /// (f_j + u_j) vanishes on W for the lifted cofactors u.
    pub window_condition: bool,
    pub window_residual: f64,
    /// The lifted cofactors, when the membership holds.
    pub cofactors: Option<Vec<Poly2>>,
}

impl IdealMembership {
    pub fn holds(&self) -> bool {
        self.vanishes_off_variety && self.r_in_constrained_ideal && self.window_condition
    }
}

/// Membership of a triple in the kernel ideal 𝒩: the scalar identity
/// r + Σ f_k p_k = 0 away from the real variety, r ∈ J with a cofactor
/// lift vanishing on W, and f_j + u_j = 0 on W.
pub fn in_ideal_n(calc: &Calculus, t: &Triple, tol: f64) -> Result<IdealMembership> {
    let clusters = calc.total_spectrum().eigenvalues();
    let scale = calc.scale();
    let mut off_res: f64 = 0.0;
    for &c in calc.scalar_clusters() {
        let z = clusters[c];
        let mut acc = t.r.eval_at_complex(z);
        for (k, p) in calc.sys.defpolys().iter().enumerate() {
            acc += t.f[k][c] * p.eval_at_complex(z);
        }
        off_res = off_res.max(acc.norm());
    }
    let vanishes_off = off_res <= tol * scale;

    let r_in = calc.lift.contains(&t.r);
    let (window_ok, window_res, cof) = if r_in {
        let u = calc.lift.lift(&t.r)?;
        let mut worst: f64 = 0.0;
        for &pt_idx in calc.window() {
            let cluster = calc.point_cluster(pt_idx).expect("window points match clusters");
            let z = clusters[cluster];
            for (j, uj) in u.iter().enumerate() {
                let v = t.f[j][cluster] + uj.eval_at_complex(z);
                worst = worst.max(v.norm());
            }
        }
        (worst <= tol * scale, worst, Some(u))
    } else {
        (false, f64::INFINITY, None)
    };
    Ok(IdealMembership {
        vanishes_off_variety: vanishes_off,
        off_variety_residual: off_res,
        r_in_constrained_ideal: r_in,
        window_condition: window_ok,
        window_residual: window_res,
        cofactors: cof,
    })
}

/// φ(N): decompose and apply Ψ.
pub fn phi_of_n(phi: &CalcFunction) -> Result<CMatrix> {
    let t = decompose(phi)?;
    psi_apply(&phi.calc, &t)
}

/// Pointwise inverse. Scalars must stay away from zero by the invertibility
/// margin; every coset must be invertible in its local algebra.
pub fn calc_invert(phi: &CalcFunction) -> Result<CalcFunction> {
    let calc = &phi.calc;
    let margin = calc.tols.invert_margin;
    let mut scalars = BTreeMap::new();
    for (&k, v) in &phi.scalars {
        if v.norm() <= margin {
            let z = calc.total_spectrum().eigenvalues()[k];
            return Err(Error::NotInvertibleAt { point: format!("spectral point {z}") });
        }
        scalars.insert(k, Complex64::new(1.0, 0.0) / v);
    }
    let invert_coset = |k: usize, c: &Coset| -> Result<Coset> {
        let pt = &calc.variety()[k];
        if c.value_at(&pt.x, &pt.y).is_zero() {
            return Err(Error::NotInvertibleAt {
                point: format!("variety point ({}, {})", pt.x, pt.y),
            });
        }
        c.invert()
    };
    let mut real_cosets = BTreeMap::new();
    for (&k, c) in &phi.real_cosets {
        real_cosets.insert(k, invert_coset(k, c)?);
    }
    let mut nonreal_cosets = BTreeMap::new();
    for (&k, c) in &phi.nonreal_cosets {
        nonreal_cosets.insert(k, invert_coset(k, c)?);
    }
    CalcFunction { calc: Arc::clone(calc), scalars, real_cosets, nonreal_cosets }.validate()
}

/// Result of the spectrum formula comparison.
#[derive(Debug, Clone)]
pub struct SpectrumFormula {
    /// σ(N) as eigenvalue clusters of the plain matrix.
    pub sigma_n: Vec<Complex64>,
    /// σ(Θ(N)) ∪ (V_ℝ(I) ∩ σ(N)) ∪ the admissible nonreal variety images.
    pub formula: Vec<Complex64>,
    pub pass: bool,
}

/// Checks σ(N) = σ(Θ(N)) ∪ (V_ℝ(I) ∩ σ(N)) ∪ {ξ+iη : (ξ,η) nonreal variety
/// point whose image and conjugate-image both lie in σ(N)}.
pub fn spectrum_formula_check(calc: &Calculus) -> Result<SpectrumFormula> {
    let sigma_n = calc.operator_spectrum()?;
    let tol = calc.tols.spectrum_match * calc.scale();
    let in_sigma = |z: Complex64| sigma_n.iter().any(|s| (*s - z).norm() <= tol);

    let mut formula: Vec<Complex64> = calc.total_spectrum().eigenvalues().to_vec();
    let push_unique = |list: &mut Vec<Complex64>, z: Complex64| {
        if !list.iter().any(|s| (*s - z).norm() <= tol) {
            list.push(z);
        }
    };
    for &k in calc.real_points() {
        let z = calc.variety()[k].as_complex();
        if in_sigma(z) {
            push_unique(&mut formula, z);
        }
    }
    for &k in calc.nonreal_points() {
        let image = {
            let pt = &calc.variety()[k];
            pt.x.to_complex() + Complex64::new(0.0, 1.0) * pt.y.to_complex()
        };
        let partner = calc.conjugate_of(k);
        let partner_image = {
            let pt = &calc.variety()[partner];
            pt.x.to_complex() + Complex64::new(0.0, 1.0) * pt.y.to_complex()
        };
        if in_sigma(image) && in_sigma(partner_image) {
            push_unique(&mut formula, image);
        }
    }
    formula.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let pass = sigma_n.iter().all(|z| formula.iter().any(|s| (*s - *z).norm() <= tol))
        && formula.iter().all(|z| sigma_n.iter().any(|s| (*s - *z).norm() <= tol));
    Ok(SpectrumFormula { sigma_n, formula, pass })
}

/// Random function with given seed: independent scalars at spectral points
/// and independent small-integer polynomial cosets at variety points.
pub fn random_function(calc: &Arc<Calculus>, rng: &mut SplitMix64) -> Result<CalcFunction> {
    let mut scalars = BTreeMap::new();
    for &k in calc.scalar_clusters() {
        scalars.insert(k, rng.next_complex());
    }
    let mut real_cosets = BTreeMap::new();
    for &k in calc.real_points() {
        let p = crate::embedding::random_int_poly(rng, 2, 2);
        real_cosets.insert(k, Coset::from_poly(&p, &calc.variety()[k].algebra_a));
    }
    let mut nonreal_cosets = BTreeMap::new();
    for &k in calc.nonreal_points() {
        let p = crate::embedding::random_int_poly(rng, 2, 2);
        nonreal_cosets.insert(k, Coset::from_poly(&p, &calc.variety()[k].algebra_b));
    }
    CalcFunction { calc: Arc::clone(calc), scalars, real_cosets, nonreal_cosets }.validate()
}

/// Random element of the kernel ideal 𝒩, built from a random member of the
/// constrained ideal J and its lifted cofactors: the triple
/// (r, -u_1, …, -u_m) satisfies both membership conditions by construction.
pub fn random_ideal_element(calc: &Calculus, rng: &mut SplitMix64) -> Result<Triple> {
    let basis = calc.lift.constrained_ideal().groebner_basis();
    let mut r = Poly2::zero(VarPair::Xy);
    for g in basis {
        let c = GaussianRational::from_int(rng.next_small_int(3));
        let e = (rng.next_range(2) as u32, rng.next_range(2) as u32);
        r = r.add(&g.mul(&Poly2::monomial(e.0, e.1, c, VarPair::Xy)));
    }
    let u = calc.lift.lift(&r)?;
    let clusters = calc.total_spectrum().eigenvalues();
    let f: Vec<Vec<Complex64>> = u
        .iter()
        .map(|uj| clusters.iter().map(|&z| -uj.eval_at_complex(z)).collect())
        .collect();
    Ok(Triple { r, f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein::KreinSpace;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pl(s: &str) -> Poly2 {
        Poly2::parse(s).unwrap()
    }

    fn ex1() -> Arc<Calculus> {
        let j = CMatrix::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]);
        let space = KreinSpace::new(j).unwrap();
        let n = CMatrix::from_rows(vec![vec![c(0., 1.), c(1., 0.)], vec![c(0., 0.), c(0., 1.)]]);
        let op = KreinOperator::new(space, n).unwrap();
        Calculus::build(&op, &[pl("x"), pl("y - 1")], &Tolerances::default()).unwrap()
    }

    fn ex2() -> Arc<Calculus> {
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
        Calculus::build(&op, &[pl("x^2"), pl("y^2 - y")], &Tolerances::default()).unwrap()
    }

    fn ex3() -> Arc<Calculus> {
        let space = KreinSpace::hilbert(3);
        let n = CMatrix::diag(&[c(1., 0.), c(0., 1.), c(-2., 0.)]);
        let op = KreinOperator::new(space, n).unwrap();
        Calculus::build(&op, &[pl("1")], &Tolerances::default()).unwrap()
    }

    #[test]
    fn context_classification() {
        let calc = ex1();
        // variety {(0,1)}; spectrum {i} matches it; no scalar clusters
        assert_eq!(calc.variety().len(), 1);
        assert_eq!(calc.scalar_clusters().len(), 0);
        assert_eq!(calc.window(), &[0]);

        let calc = ex2();
        // variety {(0,0),(0,1)}, spectrum {2} off the variety
        assert_eq!(calc.variety().len(), 2);
        assert_eq!(calc.scalar_clusters().len(), 1);
        assert!(calc.window().is_empty());

        let calc = ex3();
        assert!(calc.variety().is_empty());
        assert_eq!(calc.scalar_clusters().len(), 3);
    }

    #[test]
    fn identity_function_reproduces_the_operator() {
        for calc in [ex1(), ex2(), ex3()] {
            let id = identity_function(&calc).unwrap();
            let out = phi_of_n(&id).unwrap();
            let n = calc.operator().matrix();
            assert!(out.sub(n).fro_norm() <= 1e-9 * n.fro_norm().max(1.0));
        }
    }

    #[test]
    fn unit_function_reproduces_the_identity() {
        for calc in [ex1(), ex2(), ex3()] {
            let one = unit_function(&calc).unwrap();
            let out = phi_of_n(&one).unwrap();
            let id = CMatrix::identity(calc.operator().matrix().rows());
            assert!(out.sub(&id).fro_norm() <= 1e-9);
        }
    }

    #[test]
    fn decompose_examples() {
        // flip example: the interpolant represents x + iy, no scalar part
        let calc = ex1();
        let id = identity_function(&calc).unwrap();
        let t = decompose(&id).unwrap();
        let expect = Coset::from_poly(&pl("x + i*y"), &calc.variety()[0].algebra_a);
        assert_eq!(Coset::from_poly(&t.r, &calc.variety()[0].algebra_a), expect);
        assert!(t.f.iter().all(|row| row.iter().all(|v| v.norm() < 1e-14)));

        // Hilbert example: r = 0, f = φ
        let calc = ex3();
        let phi = embed_poly(&calc, &pl("x - 3*y")).unwrap();
        let t = decompose(&phi).unwrap();
        assert!(t.r.is_zero());
        for &cidx in calc.scalar_clusters() {
            let z = calc.total_spectrum().eigenvalues()[cidx];
            let expect = pl("x - 3*y").eval_at_complex(z);
            assert!((t.f[0][cidx] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn block_example_delta_decomposition() {
        // δ at the point (0,0): r ≡ 1 mod P·Q there, ≡ 0 at (0,1), and
        // f_j(2) = -r(2,0)/4
        let calc = ex2();
        let zero_idx = calc
            .variety()
            .iter()
            .position(|pt| pt.y.is_zero())
            .unwrap();
        let phi = unit_delta(&calc, zero_idx).unwrap();
        let t = decompose(&phi).unwrap();
        let r20 = t.r.eval(c(2.0, 0.0), c(0.0, 0.0));
        let cidx = calc.scalar_clusters()[0];
        assert!((t.f[0][cidx] - (-r20 / 4.0)).norm() < 1e-12);
        // and the operator vanishes: 0 is not in σ(N)
        let out = phi_of_n(&phi).unwrap();
        assert!(out.fro_norm() < 1e-9, "norm {}", out.fro_norm());
    }

    #[test]
    fn block_example_riesz_projection() {
        // δ at the point (0,1) ~ i: the block projection diag(0,1,1)
        let calc = ex2();
        let i_idx = calc
            .variety()
            .iter()
            .position(|pt| pt.y == GaussianRational::one())
            .unwrap();
        let phi = unit_delta(&calc, i_idx).unwrap();
        let p = phi_of_n(&phi).unwrap();
        let expected = CMatrix::diag(&[c(0., 0.), c(1., 0.), c(1., 0.)]);
        assert!(p.sub(&expected).fro_norm() < 1e-9);
        // idempotent, commutes with N, restricted spectrum is {i}
        assert!(p.matmul(&p).sub(&p).fro_norm() < 1e-9);
        let n = calc.operator().matrix();
        assert!(p.matmul(n).sub(&n.matmul(&p)).fro_norm() < 1e-9);
    }

    #[test]
    fn flip_example_riesz_projection_is_identity() {
        let calc = ex1();
        let phi = unit_delta(&calc, 0).unwrap();
        let p = phi_of_n(&phi).unwrap();
        assert!(p.sub(&CMatrix::identity(2)).fro_norm() < 1e-9);
    }

    #[test]
    fn homomorphism_on_random_functions() {
        for calc in [ex1(), ex2(), ex3()] {
            let mut rng = SplitMix64::new(2024);
            for _ in 0..25 {
                let phi = random_function(&calc, &mut rng).unwrap();
                let psi = random_function(&calc, &mut rng).unwrap();
                let scale = phi.scale().max(psi.scale());
                let lhs = phi_of_n(&phi.mul(&psi).unwrap()).unwrap();
                let rhs = phi_of_n(&phi).unwrap().matmul(&phi_of_n(&psi).unwrap());
                assert!(
                    lhs.sub(&rhs).fro_norm() <= 1e-8 * scale * scale.max(1.0),
                    "multiplicativity failed: {}",
                    lhs.sub(&rhs).fro_norm()
                );
                let lhs = phi_of_n(&phi.add(&psi).unwrap()).unwrap();
                let rhs = phi_of_n(&phi).unwrap().add(&phi_of_n(&psi).unwrap());
                assert!(lhs.sub(&rhs).fro_norm() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn sharp_maps_to_krein_adjoint() {
        for calc in [ex1(), ex2(), ex3()] {
            let mut rng = SplitMix64::new(77);
            for _ in 0..10 {
                let phi = random_function(&calc, &mut rng).unwrap();
                let lhs = phi_of_n(&phi.sharp().unwrap()).unwrap();
                let op = KreinOperator::new(Arc::clone(calc.operator().space()), phi_of_n(&phi).unwrap())
                    .unwrap();
                let rhs = op.adjoint();
                let scale = phi.scale();
                assert!(lhs.sub(rhs.matrix()).fro_norm() <= 1e-8 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn psi_vanishes_on_the_kernel_ideal() {
        for calc in [ex1(), ex2(), ex3()] {
            let mut rng = SplitMix64::new(4242);
            for _ in 0..10 {
                let n_elem = random_ideal_element(&calc, &mut rng).unwrap();
                let m = in_ideal_n(&calc, &n_elem, 1e-8).unwrap();
                assert!(m.holds(), "constructed element must lie in the kernel ideal");
                let out = psi_apply(&calc, &n_elem).unwrap();
                assert!(out.fro_norm() <= 1e-8 * calc.scale(), "norm {}", out.fro_norm());
            }
        }
    }

    #[test]
    fn psi_is_invariant_under_kernel_perturbations() {
        for calc in [ex1(), ex2(), ex3()] {
            let mut rng = SplitMix64::new(808);
            let phi = random_function(&calc, &mut rng).unwrap();
            let t = decompose(&phi).unwrap();
            let base = psi_apply(&calc, &t).unwrap();
            for _ in 0..10 {
                let n_elem = random_ideal_element(&calc, &mut rng).unwrap();
                let shifted = psi_apply(&calc, &t.add(&n_elem)).unwrap();
                assert!(shifted.sub(&base).fro_norm() <= 1e-8 * calc.scale());
            }
        }
    }

    #[test]
    fn triple_product_matches_operator_product() {
        for calc in [ex1(), ex2(), ex3()] {
            let mut rng = SplitMix64::new(99);
            for _ in 0..10 {
                let phi = random_function(&calc, &mut rng).unwrap();
                let psi = random_function(&calc, &mut rng).unwrap();
                let t = decompose(&phi).unwrap();
                let u = decompose(&psi).unwrap();
                let prod = triple_mul(&calc, &t, &u);
                let lhs = psi_apply(&calc, &prod).unwrap();
                let rhs = psi_apply(&calc, &t).unwrap().matmul(&psi_apply(&calc, &u).unwrap());
                let scale = phi.scale().max(psi.scale()).powi(2).max(1.0);
                assert!(lhs.sub(&rhs).fro_norm() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn triple_commutators_lie_in_the_kernel_ideal() {
        for calc in [ex2(), ex3()] {
            let mut rng = SplitMix64::new(55);
            let phi = random_function(&calc, &mut rng).unwrap();
            let psi = random_function(&calc, &mut rng).unwrap();
            let t = decompose(&phi).unwrap();
            let u = decompose(&psi).unwrap();
            let tu = triple_mul(&calc, &t, &u);
            let ut = triple_mul(&calc, &u, &t);
            let comm = Triple {
                r: tu.r.sub(&ut.r),
                f: tu
                    .f
                    .iter()
                    .zip(&ut.f)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                    .collect(),
            };
            let m = in_ideal_n(&calc, &comm, 1e-7).unwrap();
            assert!(m.holds(), "commutator must lie in the kernel ideal: {m:?}");
        }
    }

    #[test]
    fn unit_triple_is_neutral() {
        let calc = ex2();
        let mut rng = SplitMix64::new(31);
        let phi = random_function(&calc, &mut rng).unwrap();
        let t = decompose(&phi).unwrap();
        let unit = Triple::polynomial(pl("1"), &calc);
        let prod = triple_mul(&calc, &t, &unit);
        let lhs = psi_apply(&calc, &prod).unwrap();
        let rhs = psi_apply(&calc, &t).unwrap();
        assert!(lhs.sub(&rhs).fro_norm() <= 1e-9 * phi.scale());
    }

    #[test]
    fn nontrivial_kernel_membership_examples() {
        let calc = ex2();
        // t = (1, 0, 0) is not in the kernel ideal
        let t = Triple::polynomial(pl("1"), &calc);
        let m = in_ideal_n(&calc, &t, 1e-8).unwrap();
        assert!(!m.holds());
        assert!(!m.r_in_constrained_ideal);
        // the zero triple is
        let z = Triple::polynomial(Poly2::zero(VarPair::Xy), &calc);
        assert!(in_ideal_n(&calc, &z, 1e-8).unwrap().holds());
    }

    #[test]
    fn inversion_examples() {
        // z - 1 is invertible on the block example (1 ∉ σ(N))
        let calc = ex2();
        let phi = embed_poly(&calc, &pl("x + i*y - 1")).unwrap();
        let inv = calc_invert(&phi).unwrap();
        let prod = phi_of_n(&inv).unwrap().matmul(&phi_of_n(&phi).unwrap());
        assert!(prod.sub(&CMatrix::identity(3)).fro_norm() <= 1e-8);
        // z - i vanishes at the variety point (0,1) on the flip example
        let calc = ex1();
        let phi = embed_poly(&calc, &pl("x + i*y - i")).unwrap();
        match calc_invert(&phi) {
            Err(Error::NotInvertibleAt { point }) => assert!(point.contains("(0, 1)")),
            other => panic!("expected NotInvertibleAt, got {other:?}"),
        }
    }

    #[test]
    fn spectrum_formula_on_reference_instances() {
        // σ(N) = {2, i} = σ(Θ(N)) ∪ (V_ℝ ∩ σ(N))
        let calc = ex2();
        let report = spectrum_formula_check(&calc).unwrap();
        assert!(report.pass);
        assert_eq!(report.sigma_n.len(), 2);
        // Hilbert example: σ(N) = σ(Θ(N))
        let report = spectrum_formula_check(&ex3()).unwrap();
        assert!(report.pass);
        assert_eq!(report.sigma_n.len(), 3);
        // flip example: {i} with empty Θ-contribution beyond the variety
        let report = spectrum_formula_check(&ex1()).unwrap();
        assert!(report.pass);
        assert_eq!(report.sigma_n.len(), 1);
    }

    #[test]
    fn jets_of_polynomials_match_embedding() {
        // dyadic coefficients keep every float jet entry exact
        let calc = ex2();
        let s = pl("x^2*y + 2*x - 1/4*y + 4");
        let direct = embed_poly(&calc, &s).unwrap();
        // build the jet of s at every variety point by exact differentiation
        let mut jets: BTreeMap<usize, BTreeMap<(u32, u32), Complex64>> = BTreeMap::new();
        for (idx, pt) in calc.variety().iter().enumerate() {
            let mut jet = BTreeMap::new();
            for k in 0..=4u32 {
                for l in 0..=4u32 {
                    let d = partial_derivative(&s, k, l);
                    let v = d.eval(pt.x.to_complex(), pt.y.to_complex());
                    jet.insert((k, l), v);
                }
            }
            jets.insert(idx, jet);
        }
        let mut scalar_values = BTreeMap::new();
        for &cidx in calc.scalar_clusters() {
            let z = calc.total_spectrum().eigenvalues()[cidx];
            scalar_values.insert(cidx, s.eval_at_complex(z));
        }
        let from_jet = embed_jet(&calc, &scalar_values, &jets).unwrap();
        for &k in calc.real_points() {
            assert_eq!(from_jet.coset_at(k), direct.coset_at(k), "coset mismatch at point {k}");
        }
        let out_direct = phi_of_n(&direct).unwrap();
        let out_jet = phi_of_n(&from_jet).unwrap();
        assert!(out_direct.sub(&out_jet).fro_norm() <= 1e-9 * direct.scale());
    }

    /// Exact partial derivative helper for the jet test.
    fn partial_derivative(p: &Poly2, k: u32, l: u32) -> Poly2 {
        let mut out = Poly2::zero(VarPair::Xy);
        for (e, c) in p.terms() {
            if e.i < k || e.j < l {
                continue;
            }
            let mut factor = GaussianRational::one();
            for s in 0..k {
                factor = &factor * &GaussianRational::from_int((e.i - s) as i64);
            }
            for s in 0..l {
                factor = &factor * &GaussianRational::from_int((e.j - s) as i64);
            }
            out = out.add(&Poly2::monomial(e.i - k, e.j - l, &factor * c, VarPair::Xy));
        }
        out
    }

    #[test]
    fn constant_jet_embeds_as_scaled_unit() {
        let calc = ex2();
        let val = c(0.5, -2.0);
        let mut jets: BTreeMap<usize, BTreeMap<(u32, u32), Complex64>> = BTreeMap::new();
        for (idx, _) in calc.variety().iter().enumerate() {
            let mut jet = BTreeMap::new();
            for k in 0..=4u32 {
                for l in 0..=4u32 {
                    jet.insert((k, l), if k == 0 && l == 0 { val } else { Complex64::zero() });
                }
            }
            jets.insert(idx, jet);
        }
        let mut scalar_values = BTreeMap::new();
        for &cidx in calc.scalar_clusters() {
            scalar_values.insert(cidx, val);
        }
        let phi = embed_jet(&calc, &scalar_values, &jets).unwrap();
        let expected = phi_of_n(&unit_function(&calc).unwrap()).unwrap().scale(val);
        let got = phi_of_n(&phi).unwrap();
        assert!(got.sub(&expected).fro_norm() <= 1e-9 * val.norm().max(1.0));
    }

    #[test]
    fn locality_at_points_without_spectral_mass() {
        // on the block example both variety points have E{w} = 0; changing a
        // function inside the kernel of the projection π_w must not change
        // the operator
        let calc = ex2();
        let mut rng = SplitMix64::new(512);
        let phi = random_function(&calc, &mut rng).unwrap();
        let base = phi_of_n(&phi).unwrap();
        for &w in calc.real_points() {
            let pt = &calc.variety()[w];
            assert!(calc.point_cluster(w).is_none(), "E{{w}} = 0 required for this test");
            // a generator of Q(w) is zero in B(w) but generally nonzero in A(w)
            for q in pt.local_q.groebner_basis() {
                let bump = Coset::from_poly(q, &pt.algebra_a);
                if bump.is_zero() {
                    continue;
                }
                let bumped = phi.add(&delta(&calc, w, bump).unwrap()).unwrap();
                // same class under the projection into B(w)
                let pa = phi.coset_at(w).unwrap().project_into(&pt.algebra_b).unwrap();
                let pb = bumped.coset_at(w).unwrap().project_into(&pt.algebra_b).unwrap();
                assert_eq!(pa, pb);
                let out = phi_of_n(&bumped).unwrap();
                assert!(out.sub(&base).fro_norm() <= 1e-8 * phi.scale());
            }
        }
    }

    #[test]
    fn chi_diagnostic_values() {
        let calc = ex2();
        // at the point (0,1): Q = <x^2, y-1>, z = eps + i gives max(eps^2, 0)
        let idx = calc.variety().iter().position(|pt| pt.y == GaussianRational::one()).unwrap();
        let eps = 1e-3;
        let chi = calc.compute_chi(idx, c(eps, 1.0)).unwrap();
        assert!((chi - eps * eps).abs() < 1e-12);
        // at the point itself the diagnostic vanishes
        let chi = calc.compute_chi(idx, c(0.0, 1.0)).unwrap();
        assert_eq!(chi, 0.0);
        // maximal-ideal component: Q = <x, y-1> gives max(eps, eps) = eps
        let calc = ex1();
        let chi = calc.compute_chi(0, c(eps, 1.0 + eps)).unwrap();
        assert!((chi - eps).abs() < 1e-15);
        // out-of-range points are rejected
        assert!(calc.compute_chi(99, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn pointwise_algebra_laws() {
        // a generator embeds to a nonzero class in the depth-two algebra
        let calc = ex1();
        let gen = embed_poly(&calc, &pl("x")).unwrap();
        assert!(!gen.coset_at(0).unwrap().is_zero());
        // the unit is neutral and inverts to itself
        let unit = unit_function(&calc).unwrap();
        let inv_unit = calc_invert(&unit).unwrap();
        let mut rng = SplitMix64::new(313);
        let phi = random_function(&calc, &mut rng).unwrap();
        let lhs = phi.mul(&unit).unwrap();
        assert_eq!(phi_of_n(&lhs).unwrap().sub(&phi_of_n(&phi).unwrap()).fro_norm(), 0.0);
        assert_eq!(
            phi_of_n(&inv_unit).unwrap().sub(&CMatrix::identity(2)).fro_norm(),
            0.0
        );
        // the involution is involutive
        let back = phi.sharp().unwrap().sharp().unwrap();
        assert_eq!(phi_of_n(&back).unwrap().sub(&phi_of_n(&phi).unwrap()).fro_norm(), 0.0);
        // point masses with unit value are multiplicatively idempotent
        let calc = ex2();
        let d = unit_delta(&calc, 0).unwrap();
        let sq = d.mul(&d).unwrap();
        assert_eq!(sq.coset_at(0).unwrap(), d.coset_at(0).unwrap());
        assert!(sq.coset_at(1).unwrap().is_zero());
    }

    #[test]
    fn psi_of_sharp_is_the_krein_adjoint() {
        for calc in [ex1(), ex2(), ex3()] {
            let mut rng = SplitMix64::new(901);
            for _ in 0..5 {
                let phi = random_function(&calc, &mut rng).unwrap();
                let t = decompose(&phi).unwrap();
                let lhs = psi_apply(&calc, &t.sharp()).unwrap();
                let rhs = KreinOperator::new(
                    Arc::clone(calc.operator().space()),
                    psi_apply(&calc, &t).unwrap(),
                )
                .unwrap()
                .adjoint();
                let scale = phi.scale().max(1.0);
                assert!(lhs.sub(rhs.matrix()).fro_norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn calculus_output_lands_in_the_double_commutant_sample() {
        // φ(N) commutes with polynomials in A, B and with N, N⁺
        for calc in [ex1(), ex2(), ex3()] {
            let mut rng = SplitMix64::new(606);
            let (a, b) = (calc.system().real_part(), calc.system().imag_part());
            for _ in 0..5 {
                let phi = random_function(&calc, &mut rng).unwrap();
                let out = phi_of_n(&phi).unwrap();
                let mut commutant: Vec<CMatrix> = vec![
                    calc.operator().matrix().clone(),
                    calc.system().operator_adjoint().matrix().clone(),
                ];
                for _ in 0..3 {
                    let u = crate::embedding::random_int_poly(&mut rng, 2, 2);
                    commutant.push(u.mat_subst(a, b, 1e-10).unwrap());
                }
                for m in &commutant {
                    let comm = out.matmul(m).sub(&m.matmul(&out)).fro_norm();
                    let scale = out.fro_norm().max(1.0) * m.fro_norm().max(1.0);
                    assert!(comm <= 1e-8 * scale, "commutator residual {comm}");
                }
            }
        }
    }

    /// e^{x+iy} as jet data: value and all partial derivatives at a point
    /// (ξ, η) are i^l e^{ξ+iη}.
    fn exp_jet_at(xi: f64, eta: f64, max_k: u32, max_l: u32) -> BTreeMap<(u32, u32), Complex64> {
        let base = Complex64::new(xi, eta).exp();
        let mut jet = BTreeMap::new();
        for k in 0..=max_k {
            for l in 0..=max_l {
                jet.insert((k, l), base * Complex64::new(0.0, 1.0).powu(l));
            }
        }
        jet
    }

    #[test]
    fn analytic_jets_reproduce_the_matrix_exponential() {
        // on the flip example N = iI + E: exp(N) = e^i (I + E)
        let calc = ex1();
        let mut jets = BTreeMap::new();
        jets.insert(0usize, exp_jet_at(0.0, 1.0, 2, 2));
        let phi = embed_jet(&calc, &BTreeMap::new(), &jets).unwrap();
        let out = phi_of_n(&phi).unwrap();
        let ei = Complex64::new(0.0, 1.0).exp();
        let expected = CMatrix::from_rows(vec![vec![ei, ei], vec![Complex64::zero(), ei]]);
        assert!(out.sub(&expected).fro_norm() <= 1e-12 * expected.fro_norm());

        // on the order-3 Jordan block at i: exp(N) = e^i (I + E + E²/2);
        // the depth-two jet with the corner entries carries exactly the
        // information the calculus needs
        let j = CMatrix::from_rows(vec![
            vec![c(0., 0.), c(0., 0.), c(1., 0.)],
            vec![c(0., 0.), c(1., 0.), c(0., 0.)],
            vec![c(1., 0.), c(0., 0.), c(0., 0.)],
        ]);
        let space = KreinSpace::new(j).unwrap();
        let n = CMatrix::from_rows(vec![
            vec![c(0., 1.), c(1., 0.), c(0., 0.)],
            vec![c(0., 0.), c(0., 1.), c(1., 0.)],
            vec![c(0., 0.), c(0., 0.), c(0., 1.)],
        ]);
        let op = KreinOperator::new(space, n.clone()).unwrap();
        let calc = Calculus::build(&op, &[pl("x^2"), pl("y - 1")], &Tolerances::default()).unwrap();
        let mut jets = BTreeMap::new();
        jets.insert(0usize, exp_jet_at(0.0, 1.0, 3, 2));
        let phi = embed_jet(&calc, &BTreeMap::new(), &jets).unwrap();
        let out = phi_of_n(&phi).unwrap();
        let e = CMatrix::from_rows(vec![
            vec![c(0., 0.), c(1., 0.), c(0., 0.)],
            vec![c(0., 0.), c(0., 0.), c(1., 0.)],
            vec![c(0., 0.), c(0., 0.), c(0., 0.)],
        ]);
        let expected = CMatrix::identity(3)
            .add(&e)
            .add(&e.matmul(&e).scale(c(0.5, 0.0)))
            .scale(ei);
        assert!(
            out.sub(&expected).fro_norm() <= 1e-12 * expected.fro_norm(),
            "residual {}",
            out.sub(&expected).fro_norm()
        );
    }
}
