//! The functional calculus φ ↦ φ(N): embedding polynomials, decomposing
//! functions into an interpolant plus weighted quotients, applying Ψ, and
//! the homomorphism laws.
//!
//! ```bash
//! cargo run --example functional_calculus
//! ```

use krein_calculus::calculus::{
    decompose, embed_poly, identity_function, phi_of_n, psi_apply, random_function,
    spectrum_formula_check,
};
use krein_calculus::io;
use krein_calculus::poly::Poly2;
use krein_calculus::rng::SplitMix64;

fn main() {
    let spec = io::generate("ex2", 0, 0).unwrap();
    let calc = io::build_calculus(&spec, None).unwrap();

    println!("variety points:");
    for pt in calc.variety() {
        println!("  ({}, {})  dim A = {}, dim B = {}", pt.x, pt.y, pt.algebra_a.dim(), pt.algebra_b.dim());
    }
    println!("spectrum of Theta(N): {:?}", calc.total_spectrum().eigenvalues());

    // the identity function reproduces the operator
    let id = identity_function(&calc).unwrap();
    let n_back = phi_of_n(&id).unwrap();
    println!("\nidentity function applied:\n{n_back}");

    // its decomposition: an exact interpolant and the shared quotient
    let t = decompose(&id).unwrap();
    println!("interpolant r = {}", t.r);
    for (j, row) in t.f.iter().enumerate() {
        println!("f_{j} on the spectral clusters: {row:?}");
    }
    let psi = psi_apply(&calc, &t).unwrap();
    println!("Psi of the decomposition, residual vs N: {:.3e}", psi.sub(&n_back).fro_norm());

    // a polynomial function of N
    let sq = embed_poly(&calc, &Poly2::parse("x^2 + y^2").unwrap()).unwrap();
    println!("\n(x^2 + y^2)(N) =\n{}", phi_of_n(&sq).unwrap());

    // multiplicativity on random functions
    let mut rng = SplitMix64::new(12);
    let phi = random_function(&calc, &mut rng).unwrap();
    let psi_fn = random_function(&calc, &mut rng).unwrap();
    let lhs = phi_of_n(&phi.mul(&psi_fn).unwrap()).unwrap();
    let rhs = phi_of_n(&phi).unwrap().matmul(&phi_of_n(&psi_fn).unwrap());
    println!(
        "\nhomomorphism check on random functions: residual {:.3e}",
        lhs.sub(&rhs).fro_norm()
    );

    // the spectrum formula
    let formula = spectrum_formula_check(&calc).unwrap();
    println!(
        "spectrum formula: sigma(N) = {:?} matches {:?} -> {}",
        formula.sigma_n,
        formula.formula,
        if formula.pass { "ok" } else { "FAIL" }
    );
}
