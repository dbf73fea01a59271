//! Problem and report formats, the reference-corpus generator, and the
//! verification pipeline behind the command-line front end.
//!
//! Problems are JSON: a Gram matrix and operator as row-major `[re, im]`
//! pairs, definitizing polynomials as text, optional calculus functions and
//! tolerance overrides. Reports collect every identity that was checked
//! with its residual and tolerance; the rollup is the conjunction of all
//! checks. Serialization relies on shortest-round-trip float formatting,
//! so equal inputs produce byte-identical reports.

use crate::calculus::{
    self, decompose, embed_poly, identity_function, phi_of_n, psi_apply, random_function,
    random_ideal_element, spectrum_formula_check, unit_delta, CalcFunction, Calculus,
};
use crate::embedding::IdentityCheck;
use crate::error::{Error, Result};
use crate::ideal::Coset;
use crate::krein::{KreinOperator, KreinSpace, Tolerances};
use crate::linalg::CMatrix;
use crate::poly::{Poly2, VarPair};
use crate::rng::SplitMix64;
use crate::scalar::GaussianRational;
use crate::spectral::{spectral_transfer_checks, speknorm_check};
use crate::transforms::{invdefbar_check, special_case_check};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Environment variable holding default tolerance overrides in
/// `key=value,key=value` form.
pub const TOLERANCE_ENV: &str = "KREIN_CALC_TOLERANCES";

// ---------------------------------------------------------------------------
// Problem format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub dim: usize,
    /// Row-major complex entries of the Gram matrix.
    pub gram: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub space: SpaceSpec,
    /// Row-major complex entries of the operator.
    pub operator: Vec<[f64; 2]>,
    /// Definitizing polynomials in text form.
    pub definitizing: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<FunctionSpec>,
    /// Tolerance overrides, keyed as in `Tolerances::apply_overrides`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub options: BTreeMap<String, f64>,
}

/// A calculus function in a problem file: a polynomial shorthand, a delta
/// at a variety point, or the explicit value/coset table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Poly {
        poly: String,
    },
    Delta {
        delta: DeltaSpec,
    },
    Explicit {
        #[serde(default)]
        scalars: Vec<ScalarEntry>,
        #[serde(default)]
        real_cosets: Vec<RealCosetEntry>,
        #[serde(default)]
        nonreal_cosets: Vec<NonrealCosetEntry>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSpec {
    /// Variety point coordinates as complex pairs `[[re,im],[re,im]]`.
    pub point: [[f64; 2]; 2],
    /// Coset value as a polynomial.
    pub poly: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarEntry {
    pub z: [f64; 2],
    pub v: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealCosetEntry {
    /// Real coordinates (a_x, a_y) of the variety point.
    pub point: [f64; 2],
    pub poly: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonrealCosetEntry {
    pub point: [[f64; 2]; 2],
    pub poly: String,
}

impl ProblemSpec {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.space.dim;
        if self.space.gram.len() != n * n {
            return Err(Error::InvalidProblem(format!(
                "gram has {} entries, expected {}",
                self.space.gram.len(),
                n * n
            )));
        }
        if self.operator.len() != n * n {
            return Err(Error::InvalidProblem(format!(
                "operator has {} entries, expected {}",
                self.operator.len(),
                n * n
            )));
        }
        if self.definitizing.is_empty() {
            return Err(Error::InvalidProblem("need at least one definitizing polynomial".into()));
        }
        for (k, v) in &self.options {
            if *v <= 0.0 {
                return Err(Error::InvalidProblem(format!("tolerance '{k}' must be positive")));
            }
        }
        Ok(())
    }

    pub fn gram_matrix(&self) -> CMatrix {
        flat_to_matrix(self.space.dim, &self.space.gram)
    }

    pub fn operator_matrix(&self) -> CMatrix {
        flat_to_matrix(self.space.dim, &self.operator)
    }

    pub fn polynomials(&self) -> Result<Vec<Poly2>> {
        self.definitizing.iter().map(|s| Poly2::parse_in(s, VarPair::Xy)).collect()
    }

    /// Tolerances from defaults, environment, then per-problem options.
    pub fn tolerances(&self, extra: Option<&str>) -> Result<Tolerances> {
        let mut tols = Tolerances::default();
        if let Ok(env) = std::env::var(TOLERANCE_ENV) {
            tols.apply_overrides(&env)?;
        }
        let opts: Vec<String> = self.options.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if !opts.is_empty() {
            tols.apply_overrides(&opts.join(","))?;
        }
        if let Some(extra) = extra {
            tols.apply_overrides(extra)?;
        }
        Ok(tols)
    }
}

fn flat_to_matrix(n: usize, entries: &[[f64; 2]]) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = entries[i * n + j];
        Complex64::new(re, im)
    })
}

pub fn matrix_to_flat(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.rows() * m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Report format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct LemmaEntry {
    pub tag: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl From<&IdentityCheck> for LemmaEntry {
    fn from(c: &IdentityCheck) -> Self {
        Self { tag: c.tag.to_string(), index: c.index, residual: c.residual, tol: c.tol, pass: c.pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DefinitizingEntry {
    pub poly: String,
    pub pass: bool,
    pub min_eigenvalue: f64,
    pub hermitian_residual: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarietyEntry {
    pub point: [String; 2],
    pub is_real: bool,
    pub d_x: u32,
    pub d_y: u32,
    pub dim_a: usize,
    pub dim_b: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdealSummary {
    /// The ideal is taken as generated by the user-supplied list; each
    /// generator is verified definitizing, but no attempt is made to prove
    /// the list generates every real definitizing polynomial.
    pub generated_by_user_list: bool,
    pub generators: Vec<String>,
    pub groebner_basis: Vec<String>,
    pub quotient_dim: usize,
    pub variety: Vec<VarietyEntry>,
    /// Σ dim ℬ(a) = dim ℂ\[x,y\]/I (exact).
    pub local_dimension_count_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    pub theta_spectrum: Vec<[f64; 2]>,
    pub local_spectra: Vec<Vec<[f64; 2]>>,
    pub operator_spectrum: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumFormulaEntry {
    pub sigma_n: Vec<[f64; 2]>,
    pub formula: Vec<[f64; 2]>,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingSummary {
    pub h_dim: usize,
    pub hj_dims: Vec<usize>,
    pub gram_condition: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub instance: String,
    pub rollup: bool,
    pub definitizing_results: Vec<DefinitizingEntry>,
    pub embedding: EmbeddingSummary,
    pub ideal_summary: IdealSummary,
    pub spectral_summary: SpectralSummary,
    pub lemma_checks: Vec<LemmaEntry>,
    pub spectrum_formula: SpectrumFormulaEntry,
    /// φ(N) for every function supplied with the problem.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub calculus_outputs: Vec<CalcOutput>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Short human-readable summary, one line per check group.
    pub fn summary(&self) -> String {
        let mut lines = Vec::new();
        lines.push(format!(
            "instance {}: {}",
            self.instance,
            if self.rollup { "PASS" } else { "FAIL" }
        ));
        lines.push(format!(
            "  definitizing: {}/{} ok",
            self.definitizing_results.iter().filter(|d| d.pass).count(),
            self.definitizing_results.len()
        ));
        lines.push(format!(
            "  ideal: quotient dim {}, {} variety points, local dimension count {}",
            self.ideal_summary.quotient_dim,
            self.ideal_summary.variety.len(),
            if self.ideal_summary.local_dimension_count_ok { "ok" } else { "FAIL" }
        ));
        let failed: Vec<String> = self
            .lemma_checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}{}", c.tag, c.index.map(|k| format!("[{k}]")).unwrap_or_default()))
            .collect();
        if failed.is_empty() {
            lines.push(format!("  identities: {} checks ok", self.lemma_checks.len()));
        } else {
            lines.push(format!("  identities FAILED: {}", failed.join(", ")));
        }
        lines.push(format!(
            "  spectrum formula: {}",
            if self.spectrum_formula.pass { "ok" } else { "FAIL" }
        ));
        lines.join("\n")
    }
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// Builds the calculus context from a problem file.
pub fn build_calculus(spec: &ProblemSpec, tol_overrides: Option<&str>) -> Result<Arc<Calculus>> {
    spec.validate()?;
    let tols = spec.tolerances(tol_overrides)?;
    let space = KreinSpace::new(spec.gram_matrix())?;
    let op = KreinOperator::new(space, spec.operator_matrix())?;
    let polys = spec.polynomials()?;
    Calculus::build(&op, &polys, &tols)
}

fn complex_list(zs: &[Complex64]) -> Vec<[f64; 2]> {
    zs.iter().map(|z| [z.re, z.im]).collect()
}

/// Runs the structural analysis: definitizing certificates, embedding
/// residuals, ideal summary, spectral summaries, transfer identities and
/// the spectrum formula. Functions supplied with the problem are evaluated
/// into the report.
pub fn analyze(instance: &str, spec: &ProblemSpec, tol_overrides: Option<&str>) -> Result<Report> {
    let calc = build_calculus(spec, tol_overrides)?;
    let mut report = analyze_built(instance, &calc)?;
    for f in &spec.functions {
        let func = resolve_function(&calc, f)?;
        let m = phi_of_n(&func)?;
        report.calculus_outputs.push(CalcOutput {
            function: function_label(f),
            dim: m.rows(),
            matrix: matrix_to_flat(&m),
        });
    }
    Ok(report)
}

/// Analysis over an already-built context.
pub fn analyze_built(instance: &str, calc: &Arc<Calculus>) -> Result<Report> {
    let tols = *calc.tolerances();
    let sys = calc.system();
    let mut rollup = true;

    let mut definitizing_results = Vec::new();
    for p in sys.defpolys() {
        let cert = crate::krein::is_definitizing(p, sys.operator(), &tols)?;
        rollup &= cert.is_definitizing;
        definitizing_results.push(DefinitizingEntry {
            poly: p.to_string(),
            pass: cert.is_definitizing,
            min_eigenvalue: cert.eigenvalues.first().copied().unwrap_or(0.0),
            hermitian_residual: cert.hermitian_residual,
            tol: tols.psd_slack,
        });
    }

    let embedding = EmbeddingSummary {
        h_dim: sys.h_dim(),
        hj_dims: (0..sys.num_polys()).map(|j| sys.hj_dim(j)).collect(),
        gram_condition: sys.space().condition(),
    };

    let local_sum: usize = calc.variety().iter().map(|p| p.algebra_b.dim()).sum();
    let ideal_summary = IdealSummary {
        generated_by_user_list: true,
        generators: calc.ideal().generators().iter().map(|p| p.to_string()).collect(),
        groebner_basis: calc.ideal().groebner_basis().iter().map(|p| p.to_string()).collect(),
        quotient_dim: calc.quotient().dim(),
        variety: calc
            .variety()
            .iter()
            .map(|pt| VarietyEntry {
                point: [pt.x.to_string(), pt.y.to_string()],
                is_real: pt.is_real,
                d_x: pt.d_x,
                d_y: pt.d_y,
                dim_a: pt.algebra_a.dim(),
                dim_b: pt.algebra_b.dim(),
            })
            .collect(),
        local_dimension_count_ok: local_sum == calc.quotient().dim(),
    };
    rollup &= ideal_summary.local_dimension_count_ok;

    let spectral_summary = SpectralSummary {
        theta_spectrum: complex_list(calc.total_spectrum().eigenvalues()),
        local_spectra: calc
            .spectra()
            .locals
            .iter()
            .map(|sd| complex_list(sd.eigenvalues()))
            .collect(),
        operator_spectrum: complex_list(&calc.operator_spectrum()?),
    };

    let mut checks: Vec<IdentityCheck> = sys.verify_transfer_lemmas(0x9e3779b9)?;
    let vreal: Vec<Complex64> = calc
        .real_points()
        .iter()
        .map(|&k| calc.variety()[k].as_complex())
        .collect();
    checks.extend(speknorm_check(sys, calc.total_spectrum(), &vreal, &tols));
    checks.extend(spectral_transfer_checks(sys, calc.spectra(), &vreal, 0x51ce, &tols)?);
    let lemma_checks: Vec<LemmaEntry> = checks.iter().map(LemmaEntry::from).collect();
    rollup &= lemma_checks.iter().all(|c| c.pass);

    let formula = spectrum_formula_check(calc)?;
    rollup &= formula.pass;
    let spectrum_formula = SpectrumFormulaEntry {
        sigma_n: complex_list(&formula.sigma_n),
        formula: complex_list(&formula.formula),
        tol: tols.spectrum_match,
        pass: formula.pass,
    };

    Ok(Report {
        instance: instance.to_string(),
        rollup,
        definitizing_results,
        embedding,
        ideal_summary,
        spectral_summary,
        lemma_checks,
        spectrum_formula,
        calculus_outputs: Vec::new(),
    })
}

/// The full verification: analysis plus the calculus property suite
/// (identity reproduction, homomorphism spot checks, kernel-ideal
/// invariance, Riesz projections, special cases, inverse transport).
pub fn verify(instance: &str, spec: &ProblemSpec, tol_overrides: Option<&str>) -> Result<Report> {
    let calc = build_calculus(spec, tol_overrides)?;
    let mut report = analyze_built(instance, &calc)?;
    for f in &spec.functions {
        let func = resolve_function(&calc, f)?;
        let m = phi_of_n(&func)?;
        report.calculus_outputs.push(CalcOutput {
            function: function_label(f),
            dim: m.rows(),
            matrix: matrix_to_flat(&m),
        });
    }
    let tols = *calc.tolerances();
    let scale = calc.scale();
    let mut extra: Vec<IdentityCheck> = Vec::new();

    // identity reproduction
    let id_fn = identity_function(&calc)?;
    let out = phi_of_n(&id_fn)?;
    let n_mat = calc.operator().matrix();
    extra.push(IdentityCheck::new(
        "identity_reproduction",
        None,
        out.sub(n_mat).fro_norm() / n_mat.fro_norm().max(1.0),
        1e-9,
    ));

    // homomorphism spot checks
    let mut rng = SplitMix64::new(0xab5e11);
    let mut worst_mul: f64 = 0.0;
    let mut worst_add: f64 = 0.0;
    let mut worst_sharp: f64 = 0.0;
    for _ in 0..20 {
        let phi = random_function(&calc, &mut rng)?;
        let psi = random_function(&calc, &mut rng)?;
        let s = phi.scale().max(psi.scale()).powi(2).max(1.0);
        let mul = phi_of_n(&phi.mul(&psi)?)?
            .sub(&phi_of_n(&phi)?.matmul(&phi_of_n(&psi)?))
            .fro_norm();
        worst_mul = worst_mul.max(mul / s);
        let add = phi_of_n(&phi.add(&psi)?)?
            .sub(&phi_of_n(&phi)?.add(&phi_of_n(&psi)?))
            .fro_norm();
        worst_add = worst_add.max(add / s);
        let lhs = phi_of_n(&phi.sharp()?)?;
        let adj = KreinOperator::new(Arc::clone(calc.operator().space()), phi_of_n(&phi)?)?.adjoint();
        worst_sharp = worst_sharp.max(lhs.sub(adj.matrix()).fro_norm() / s);
    }
    extra.push(IdentityCheck::new("homomorphism_mul", None, worst_mul, tols.residual));
    extra.push(IdentityCheck::new("homomorphism_add", None, worst_add, tols.residual));
    extra.push(IdentityCheck::new("homomorphism_star", None, worst_sharp, tols.residual));

    // kernel-ideal invariance of Ψ
    let mut worst_inv: f64 = 0.0;
    let base_fn = random_function(&calc, &mut rng)?;
    let base_triple = decompose(&base_fn)?;
    let base = psi_apply(&calc, &base_triple)?;
    for _ in 0..10 {
        let elem = random_ideal_element(&calc, &mut rng)?;
        let shifted = psi_apply(&calc, &base_triple.add(&elem))?;
        worst_inv = worst_inv.max(shifted.sub(&base).fro_norm() / scale);
        let vanished = psi_apply(&calc, &elem)?;
        worst_inv = worst_inv.max(vanished.fro_norm() / scale);
    }
    extra.push(IdentityCheck::new("kernel_ideal_invariance", None, worst_inv, tols.residual));

    // Riesz projections at every variety point
    for (idx, _) in calc.variety().iter().enumerate() {
        let phi = unit_delta(&calc, idx)?;
        let p = phi_of_n(&phi)?;
        let idem = p.matmul(&p).sub(&p).fro_norm() / scale;
        let comm = p.matmul(n_mat).sub(&n_mat.matmul(&p)).fro_norm() / scale;
        extra.push(IdentityCheck::new("riesz_idempotent", Some(idx), idem, tols.residual));
        extra.push(IdentityCheck::new("riesz_commutes", Some(idx), comm, tols.residual));
    }

    // special cases and inverse transport
    let vreal_images: Vec<Complex64> = calc
        .variety()
        .iter()
        .map(|pt| pt.x.to_complex() + Complex64::new(0.0, 1.0) * pt.y.to_complex())
        .collect();
    let special = special_case_check(calc.operator(), &vreal_images, &tols)?;
    if special.selfadjoint {
        extra.push(IdentityCheck::new(
            "selfadjoint_vanishing",
            None,
            if special.selfadjoint_poly_vanishes == Some(true) { 0.0 } else { 1.0 },
            tols.residual,
        ));
    }
    if special.unitary {
        extra.push(IdentityCheck::new(
            "unitary_vanishing",
            None,
            if special.unitary_poly_vanishes == Some(true) { 0.0 } else { 1.0 },
            tols.residual,
        ));
    }
    let invertible = calc
        .operator()
        .matrix()
        .eigenvalues()?
        .iter()
        .all(|z| z.norm() > 1e-10);
    if invertible {
        // defective eigenvalues exactly at zero can evade the float screen;
        // the exact singularity from the solver means "not invertible"
        match invdefbar_check(calc.system(), &tols) {
            Ok(inv) => extra.push(IdentityCheck::new(
                "inverse_transport",
                None,
                if inv.pass { 0.0 } else { 1.0 },
                tols.residual,
            )),
            Err(Error::Singular) => {}
            Err(e) => return Err(e),
        }
    }

    report.lemma_checks.extend(extra.iter().map(LemmaEntry::from));
    report.rollup &= report.lemma_checks.iter().all(|c| c.pass);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Function evaluation (the `calc` command)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CalcOutput {
    pub function: String,
    pub dim: usize,
    /// Row-major complex entries of φ(N).
    pub matrix: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalcReport {
    pub instance: String,
    pub outputs: Vec<CalcOutput>,
    /// Residuals of (φψ)(N) = φ(N)ψ(N) over the supplied set.
    pub product_checks: Vec<LemmaEntry>,
    pub rollup: bool,
}

/// Resolves one function spec against a built context.
pub fn resolve_function(calc: &Arc<Calculus>, spec: &FunctionSpec) -> Result<CalcFunction> {
    let tols = calc.tolerances();
    match spec {
        FunctionSpec::Poly { poly } => embed_poly(calc, &Poly2::parse_in(poly, VarPair::Xy)?),
        FunctionSpec::Delta { delta } => {
            let px = Complex64::new(delta.point[0][0], delta.point[0][1]);
            let py = Complex64::new(delta.point[1][0], delta.point[1][1]);
            let idx = calc
                .variety()
                .iter()
                .position(|pt| {
                    (pt.x.to_complex() - px).norm() <= tols.point_match
                        && (pt.y.to_complex() - py).norm() <= tols.point_match
                })
                .ok_or(Error::NotInVariety)?;
            let pt = &calc.variety()[idx];
            let alg = if pt.is_real { &pt.algebra_a } else { &pt.algebra_b };
            let value = Coset::from_poly(&Poly2::parse_in(&delta.poly, VarPair::Xy)?, alg);
            calculus::delta(calc, idx, value)
        }
        FunctionSpec::Explicit { scalars, real_cosets, nonreal_cosets } => {
            let mut builder = calculus::CalcFunctionBuilder::new(calc);
            for entry in scalars {
                let z = Complex64::new(entry.z[0], entry.z[1]);
                let cluster = calc
                    .total_spectrum()
                    .match_eigenvalue(z, tols.point_match)
                    .ok_or(Error::MissingValue { z: (z.re, z.im) })?;
                builder = builder.scalar(cluster, Complex64::new(entry.v[0], entry.v[1]));
            }
            for entry in real_cosets {
                let idx = calc
                    .variety()
                    .iter()
                    .position(|pt| {
                        pt.is_real
                            && (pt.x.to_complex().re - entry.point[0]).abs() <= tols.point_match
                            && (pt.y.to_complex().re - entry.point[1]).abs() <= tols.point_match
                    })
                    .ok_or(Error::NotInVariety)?;
                let pt = &calc.variety()[idx];
                let coset = Coset::from_poly(&Poly2::parse_in(&entry.poly, VarPair::Xy)?, &pt.algebra_a);
                builder = builder.coset(idx, coset);
            }
            for entry in nonreal_cosets {
                let px = Complex64::new(entry.point[0][0], entry.point[0][1]);
                let py = Complex64::new(entry.point[1][0], entry.point[1][1]);
                let idx = calc
                    .variety()
                    .iter()
                    .position(|pt| {
                        !pt.is_real
                            && (pt.x.to_complex() - px).norm() <= tols.point_match
                            && (pt.y.to_complex() - py).norm() <= tols.point_match
                    })
                    .ok_or(Error::NotInVariety)?;
                let pt = &calc.variety()[idx];
                let coset = Coset::from_poly(&Poly2::parse_in(&entry.poly, VarPair::Xy)?, &pt.algebra_b);
                builder = builder.coset(idx, coset);
            }
            builder.build()
        }
    }
}

fn function_label(spec: &FunctionSpec) -> String {
    match spec {
        FunctionSpec::Poly { poly } => poly.clone(),
        FunctionSpec::Delta { delta } => format!("({})*delta", delta.poly),
        FunctionSpec::Explicit { .. } => "explicit".to_string(),
    }
}

/// Evaluates every supplied function and spot-checks multiplicativity on
/// consecutive pairs.
pub fn calc_functions(
    instance: &str,
    spec: &ProblemSpec,
    functions: &[FunctionSpec],
    tol_overrides: Option<&str>,
) -> Result<CalcReport> {
    let calc = build_calculus(spec, tol_overrides)?;
    let tols = *calc.tolerances();
    let mut outputs = Vec::new();
    let mut resolved = Vec::new();
    for f in functions {
        let func = resolve_function(&calc, f)?;
        let m = phi_of_n(&func)?;
        outputs.push(CalcOutput {
            function: function_label(f),
            dim: m.rows(),
            matrix: matrix_to_flat(&m),
        });
        resolved.push(func);
    }
    let mut product_checks = Vec::new();
    for pair in resolved.windows(2) {
        let (phi, psi) = (&pair[0], &pair[1]);
        let s = phi.scale().max(psi.scale()).powi(2).max(1.0);
        let lhs = phi_of_n(&phi.mul(psi)?)?;
        let rhs = phi_of_n(phi)?.matmul(&phi_of_n(psi)?);
        let residual = lhs.sub(&rhs).fro_norm() / s;
        product_checks.push(LemmaEntry {
            tag: "product_transport".into(),
            index: Some(product_checks.len()),
            residual,
            tol: tols.residual,
            pass: residual <= tols.residual,
        });
    }
    let rollup = product_checks.iter().all(|c| c.pass);
    Ok(CalcReport { instance: instance.to_string(), outputs, product_checks, rollup })
}

// ---------------------------------------------------------------------------
// Corpus generator
// ---------------------------------------------------------------------------

fn flat(rows: Vec<Vec<(f64, f64)>>) -> Vec<[f64; 2]> {
    rows.into_iter().flatten().map(|(re, im)| [re, im]).collect()
}

fn problem(dim: usize, gram: Vec<Vec<(f64, f64)>>, op: Vec<Vec<(f64, f64)>>, polys: &[&str]) -> ProblemSpec {
    ProblemSpec {
        space: SpaceSpec { dim, gram: flat(gram) },
        operator: flat(op),
        definitizing: polys.iter().map(|s| s.to_string()).collect(),
        functions: Vec::new(),
        options: BTreeMap::new(),
    }
}

/// Names accepted by the generator.
pub const GENERATOR_NAMES: &[&str] = &[
    "ex1",
    "ex2",
    "ex3",
    "jordan-at-i",
    "degenerate",
    "selfadjoint",
    "unitary",
    "random",
];

/// Deterministic corpus instances. `seed` and `dim` only matter for
/// "random".
pub fn generate(name: &str, seed: u64, dim: usize) -> Result<ProblemSpec> {
    match name {
        // flip space, N = iI + E, list (x, y-1)
        "ex1" => Ok(problem(
            2,
            vec![
                vec![(0., 0.), (1., 0.)],
                vec![(1., 0.), (0., 0.)],
            ],
            vec![
                vec![(0., 1.), (1., 0.)],
                vec![(0., 0.), (0., 1.)],
            ],
            &["x", "y - 1"],
        )),
        // ℂ ⊕ flip, N = 2 ⊕ (iI + E), list (x^2, y^2 - y)
        "ex2" => Ok(problem(
            3,
            vec![
                vec![(1., 0.), (0., 0.), (0., 0.)],
                vec![(0., 0.), (0., 0.), (1., 0.)],
                vec![(0., 0.), (1., 0.), (0., 0.)],
            ],
            vec![
                vec![(2., 0.), (0., 0.), (0., 0.)],
                vec![(0., 0.), (0., 1.), (1., 0.)],
                vec![(0., 0.), (0., 0.), (0., 1.)],
            ],
            &["x^2", "y^2 - y"],
        )),
        // Hilbert space, N = diag(1, i, -2), list (1)
        "ex3" => Ok(problem(
            3,
            vec![
                vec![(1., 0.), (0., 0.), (0., 0.)],
                vec![(0., 0.), (1., 0.), (0., 0.)],
                vec![(0., 0.), (0., 0.), (1., 0.)],
            ],
            vec![
                vec![(1., 0.), (0., 0.), (0., 0.)],
                vec![(0., 0.), (0., 1.), (0., 0.)],
                vec![(0., 0.), (0., 0.), (-2., 0.)],
            ],
            &["1"],
        )),
        // order-3 Jordan block at i on the antidiagonal Gram
        "jordan-at-i" => Ok(problem(
            3,
            vec![
                vec![(0., 0.), (0., 0.), (1., 0.)],
                vec![(0., 0.), (1., 0.), (0., 0.)],
                vec![(1., 0.), (0., 0.), (0., 0.)],
            ],
            vec![
                vec![(0., 1.), (1., 0.), (0., 0.)],
                vec![(0., 0.), (0., 1.), (1., 0.)],
                vec![(0., 0.), (0., 0.), (0., 1.)],
            ],
            &["x^2", "y - 1"],
        )),
        // every p_j(A,B) = 0: zero-dimensional target spaces throughout
        "degenerate" => Ok(problem(
            2,
            vec![
                vec![(1., 0.), (0., 0.)],
                vec![(0., 0.), (-1., 0.)],
            ],
            vec![
                vec![(1., 0.), (0., 0.)],
                vec![(0., 0.), (2., 0.)],
            ],
            &["y", "x^2 - 3*x + 2"],
        )),
        // flip-space Jordan block at 1, N = N⁺
        "selfadjoint" => Ok(problem(
            2,
            vec![
                vec![(0., 0.), (1., 0.)],
                vec![(1., 0.), (0., 0.)],
            ],
            vec![
                vec![(1., 0.), (1., 0.)],
                vec![(0., 0.), (1., 0.)],
            ],
            &["y", "x - 1"],
        )),
        // signature (1,1,-1) diagonal unitary
        "unitary" => Ok(problem(
            3,
            vec![
                vec![(1., 0.), (0., 0.), (0., 0.)],
                vec![(0., 0.), (1., 0.), (0., 0.)],
                vec![(0., 0.), (0., 0.), (-1., 0.)],
            ],
            vec![
                vec![(1., 0.), (0., 0.), (0., 0.)],
                vec![(0., 0.), (0., 1.), (0., 0.)],
                vec![(0., 0.), (0., 0.), (-1., 0.)],
            ],
            &["x", "x^2 + y^2 - 1"],
        )),
        "random" => Ok(generate_random(seed, dim)),
        other => Err(Error::UnknownInstance(other.to_string())),
    }
}

/// Random instance: a block-diagonal model (Hilbert eigenvalues, flip-space
/// Jordan blocks at rational points, rotation blocks with conjugate-pair
/// spectrum) conjugated by a random unitary. The definitizing list
/// (p₁(x), p₂(y)) is built from squared vanishing factors, so positivity
/// and the zero-dimensional ideal hold by construction. Factors are
/// deduplicated and at most two Krein blocks are drawn, keeping every local
/// multiplicity at two: float eigenvalues of the multiplication matrices
/// then stay well inside the rational snap radius.
fn generate_random(seed: u64, dim: usize) -> ProblemSpec {
    let n_target = dim.clamp(2, 16);
    let mut rng = SplitMix64::new(seed ^ 0xc0ffee);
    #[derive(Clone, Copy)]
    enum Block {
        // eigenvalue (a, b), signature +1
        Hilbert(i64, i64),
        // flip Jordan block of size 2 at the rational point (a, b)
        Jordan(i64, i64),
        // rotation block: A = aI + [[0,1],[-1,0]], B = bI; x-spectrum a ± i
        Rotation(i64, i64),
    }
    let mut blocks = Vec::new();
    let mut total = 0usize;
    let mut krein_blocks = 0usize;
    while total < n_target {
        let a = rng.next_small_int(1);
        let b = rng.next_small_int(1);
        let kind = rng.next_range(3);
        let block = if total + 2 > n_target || krein_blocks >= 2 {
            Block::Hilbert(a, b)
        } else {
            match kind {
                0 => Block::Hilbert(a, b),
                1 => Block::Jordan(a, b),
                _ => Block::Rotation(a, b),
            }
        };
        total += match block {
            Block::Hilbert(..) => 1,
            _ => {
                krein_blocks += 1;
                2
            }
        };
        blocks.push(block);
    }
    let n = total;
    let mut gram = CMatrix::zeros(n, n);
    let mut op = CMatrix::zeros(n, n);
    let mut row = 0usize;
    // deduplicated vanishing factors: (x - a) for Jordan, ((x-a)^2 + 1) for
    // rotation, (y - b) wherever a Krein block sits; squaring the products
    // afterwards enforces both positivity and the required vanishing order
    let mut jordan_a: Vec<i64> = Vec::new();
    let mut rotation_a: Vec<i64> = Vec::new();
    let mut krein_b: Vec<i64> = Vec::new();
    for block in &blocks {
        match *block {
            Block::Hilbert(a, b) => {
                gram[(row, row)] = Complex64::new(1.0, 0.0);
                op[(row, row)] = Complex64::new(a as f64, b as f64);
                row += 1;
            }
            Block::Jordan(a, b) => {
                gram[(row, row + 1)] = Complex64::new(1.0, 0.0);
                gram[(row + 1, row)] = Complex64::new(1.0, 0.0);
                op[(row, row)] = Complex64::new(a as f64, b as f64);
                op[(row + 1, row + 1)] = Complex64::new(a as f64, b as f64);
                op[(row, row + 1)] = Complex64::new(1.0, 0.0);
                if !jordan_a.contains(&a) {
                    jordan_a.push(a);
                }
                if !krein_b.contains(&b) {
                    krein_b.push(b);
                }
                row += 2;
            }
            Block::Rotation(a, b) => {
                gram[(row, row + 1)] = Complex64::new(1.0, 0.0);
                gram[(row + 1, row)] = Complex64::new(1.0, 0.0);
                op[(row, row)] = Complex64::new(a as f64, b as f64);
                op[(row + 1, row + 1)] = Complex64::new(a as f64, b as f64);
                op[(row, row + 1)] = Complex64::new(1.0, 0.0);
                op[(row + 1, row)] = Complex64::new(-1.0, 0.0);
                if !rotation_a.contains(&a) {
                    rotation_a.push(a);
                }
                if !krein_b.contains(&b) {
                    krein_b.push(b);
                }
                row += 2;
            }
        }
    }
    let x = Poly2::x();
    let y = Poly2::y();
    let mut px = Poly2::one(VarPair::Xy);
    for &a in &jordan_a {
        px = px.mul(&x.sub(&Poly2::constant(GaussianRational::from_int(a), VarPair::Xy)));
    }
    for &a in &rotation_a {
        let lin = x.sub(&Poly2::constant(GaussianRational::from_int(a), VarPair::Xy));
        px = px.mul(&lin.mul(&lin).add(&Poly2::one(VarPair::Xy)));
    }
    let mut py = Poly2::one(VarPair::Xy);
    for &b in &krein_b {
        py = py.mul(&y.sub(&Poly2::constant(GaussianRational::from_int(b), VarPair::Xy)));
    }
    // square everything so values at Hilbert eigenvalues stay nonnegative
    let p1 = px.mul(&px);
    let p2 = py.mul(&py);

    // conjugate by a product of random complex Givens rotations
    let mut u = CMatrix::identity(n);
    for _ in 0..(2 * n) {
        let i = rng.next_range(n as u64) as usize;
        let mut j = rng.next_range(n as u64) as usize;
        if i == j {
            j = (j + 1) % n;
        }
        let angle = rng.next_f64() * std::f64::consts::PI;
        let phase = Complex64::new(0.0, rng.next_f64() * std::f64::consts::TAU).exp();
        let (c, s) = (angle.cos(), angle.sin());
        let mut g = CMatrix::identity(n);
        g[(i, i)] = Complex64::new(c, 0.0);
        g[(i, j)] = phase * s;
        g[(j, i)] = -phase.conj() * s;
        g[(j, j)] = Complex64::new(c, 0.0);
        u = u.matmul(&g);
    }
    let uc = u.conj_transpose();
    let gram = uc.matmul(&gram).matmul(&u);
    let op = uc.matmul(&op).matmul(&u);

    ProblemSpec {
        space: SpaceSpec { dim: n, gram: matrix_to_flat(&gram) },
        operator: matrix_to_flat(&op),
        definitizing: vec![p1.to_string(), p2.to_string()],
        functions: Vec::new(),
        options: BTreeMap::new(),
    }
}

/// The acceptance corpus: the three reference instances, the structured
/// specials and a batch of seeded random constructions.
pub fn acceptance_corpus() -> Vec<(String, ProblemSpec)> {
    let mut out = Vec::new();
    for name in ["ex1", "ex2", "ex3", "jordan-at-i", "degenerate", "selfadjoint", "unitary"] {
        out.push((name.to_string(), generate(name, 0, 0).expect("static corpus")));
    }
    for seed in 1..=6u64 {
        let name = format!("random-{seed}");
        out.push((name, generate("random", seed, 4 + (seed as usize % 4)).expect("random corpus")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_roundtrip_is_exact() {
        for (name, spec) in acceptance_corpus() {
            let json = spec.to_json().unwrap();
            let back = ProblemSpec::from_json(&json).unwrap();
            assert_eq!(spec, back, "round trip failed for {name}");
            // byte-identical serialization
            assert_eq!(json, back.to_json().unwrap());
        }
    }

    #[test]
    fn corpus_instances_build() {
        for (name, spec) in acceptance_corpus() {
            let calc = build_calculus(&spec, None);
            assert!(calc.is_ok(), "{name} failed to build: {:?}", calc.err());
        }
    }

    #[test]
    fn analyze_passes_on_reference_instances() {
        for name in ["ex1", "ex2", "ex3"] {
            let spec = generate(name, 0, 0).unwrap();
            let report = analyze(name, &spec, None).unwrap();
            assert!(report.rollup, "{name}: {}", report.summary());
        }
    }

    #[test]
    fn analyze_rejects_non_definitizing_input() {
        let mut spec = generate("ex3", 0, 0).unwrap();
        spec.definitizing = vec!["-1".to_string()];
        let err = analyze("bad", &spec, None).unwrap_err();
        assert!(matches!(err, Error::NotDefinitizing { .. }));
    }

    #[test]
    fn degenerate_instance_has_zero_dimensional_targets() {
        let spec = generate("degenerate", 0, 0).unwrap();
        let calc = build_calculus(&spec, None).unwrap();
        assert_eq!(calc.system().h_dim(), 0);
        assert!(calc.total_spectrum().eigenvalues().is_empty());
        let report = analyze_built("degenerate", &calc).unwrap();
        assert!(report.rollup, "{}", report.summary());
    }

    #[test]
    fn generator_rejects_unknown_names() {
        assert!(matches!(generate("nope", 0, 0), Err(Error::UnknownInstance(_))));
    }

    #[test]
    fn random_instances_are_reproducible() {
        let a = generate("random", 7, 6).unwrap();
        let b = generate("random", 7, 6).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = generate("random", 8, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tolerance_overrides_parse() {
        let spec = generate("ex1", 0, 0).unwrap();
        let tols = spec.tolerances(Some("residual=1e-7,psd_slack=1e-8")).unwrap();
        assert_eq!(tols.residual, 1e-7);
        assert_eq!(tols.psd_slack, 1e-8);
        assert!(spec.tolerances(Some("bogus=1")).is_err());
        assert!(spec.tolerances(Some("residual=-1")).is_err());
    }

    #[test]
    fn calc_command_reproduces_the_operator() {
        let spec = generate("ex1", 0, 0).unwrap();
        let fns = vec![FunctionSpec::Poly { poly: "x + i*y".into() }];
        let report = calc_functions("ex1", &spec, &fns, None).unwrap();
        assert_eq!(report.outputs.len(), 1);
        let m = &report.outputs[0].matrix;
        // N = [[i, 1], [0, i]]
        assert!((m[0][1] - 1.0).abs() < 1e-9);
        assert!((m[1][1]).abs() < 1e-9);
        assert!((m[0][0]).abs() < 1e-9 && (m[2][0]).abs() < 1e-9);
    }

    #[test]
    fn calc_command_evaluates_delta_functions() {
        let spec = generate("ex2", 0, 0).unwrap();
        let fns = vec![
            FunctionSpec::Delta {
                delta: DeltaSpec { point: [[0., 0.], [1., 0.]], poly: "1".into() },
            },
            FunctionSpec::Delta {
                delta: DeltaSpec { point: [[0., 0.], [0., 0.]], poly: "1".into() },
            },
        ];
        let report = calc_functions("ex2", &spec, &fns, None).unwrap();
        // δ at (0,1) is the block projection diag(0,1,1)
        let m = &report.outputs[0].matrix;
        assert!((m[0][0]).abs() < 1e-9);
        assert!((m[4][0] - 1.0).abs() < 1e-9);
        assert!((m[8][0] - 1.0).abs() < 1e-9);
        // δ at (0,0) gives the zero operator (0 not in σ(N))
        let z = &report.outputs[1].matrix;
        assert!(z.iter().all(|[re, im]| re.abs() < 1e-9 && im.abs() < 1e-9));
        assert!(report.rollup);
    }

    #[test]
    fn explicit_function_spec_loads() {
        let spec = generate("ex2", 0, 0).unwrap();
        let calc = build_calculus(&spec, None).unwrap();
        let f = FunctionSpec::Explicit {
            scalars: vec![ScalarEntry { z: [2.0, 0.0], v: [5.0, 1.0] }],
            real_cosets: vec![
                RealCosetEntry { point: [0.0, 0.0], poly: "x + 1".into() },
                RealCosetEntry { point: [0.0, 1.0], poly: "y".into() },
            ],
            nonreal_cosets: vec![],
        };
        let func = resolve_function(&calc, &f).unwrap();
        let cluster = calc.scalar_clusters()[0];
        assert_eq!(func.scalar_at(cluster), Some(Complex64::new(5.0, 1.0)));
        // loading reduced the polynomials into cosets
        let idx0 = calc.variety().iter().position(|p| p.y.is_zero()).unwrap();
        assert_eq!(
            func.coset_at(idx0).unwrap().representative(),
            Poly2::parse("x + 1").unwrap()
        );
    }

    #[test]
    fn verify_passes_on_small_instances() {
        for name in ["ex1", "ex3", "degenerate"] {
            let spec = generate(name, 0, 0).unwrap();
            let report = verify(name, &spec, None).unwrap();
            assert!(report.rollup, "{name}: {}", report.summary());
        }
    }
}
