//! Krein spaces and operators: the indefinite Gram form, Krein adjoints,
//! normality, the definitizing test and the semidefinite factorization.
//!
//! ```bash
//! cargo run --example krein_basics
//! ```

use krein_calculus::krein::{is_definitizing, psd_factor, KreinOperator, KreinSpace, Tolerances};
use krein_calculus::linalg::CMatrix;
use krein_calculus::poly::Poly2;
use num_complex::Complex64;
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() {
    let tols = Tolerances::default();

    // the flip space: C^2 with the antidiagonal Gram form
    let j = CMatrix::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]);
    let space = KreinSpace::new(j).unwrap();
    println!("Gram condition number: {}", space.condition());

    // N = iI + E is normal: its adjoint is -iI + E and both parts commute
    let n_mat = CMatrix::from_rows(vec![vec![c(0., 1.), c(1., 0.)], vec![c(0., 0.), c(0., 1.)]]);
    let n = KreinOperator::new(Arc::clone(&space), n_mat).unwrap();
    println!("N normal: {}", n.is_normal(1e-10));
    println!("N+ =\n{}", n.adjoint().matrix());
    let (a, b) = n.real_imag();
    println!("real part A =\n{a}");
    println!("imag part B =\n{b}");

    // p = x is definitizing: J*A = diag(0, 1) is positive semidefinite
    for text in ["x", "y - 1", "-1"] {
        let p = Poly2::parse(text).unwrap();
        let cert = is_definitizing(&p, &n, &tols).unwrap();
        println!(
            "p = {text:>5}: definitizing = {}, eigenvalues of J*p(A,B): {:?}",
            cert.is_definitizing, cert.eigenvalues
        );
    }

    // a non-real definitizing polynomial reduces to its real part
    let p = Poly2::parse("x + i*y - i").unwrap();
    let cert = is_definitizing(&p, &n, &tols).unwrap();
    println!(
        "p = x + i(y - 1): reduction {} induces the same form (match = {:?})",
        cert.real_reduction.as_ref().unwrap(),
        cert.reduction_matches
    );

    // semidefinite factorization G = S*S with minimal row count
    let g = CMatrix::diag(&[c(4., 0.), c(0., 0.), c(0., 0.)]);
    let (s, rank) = psd_factor(&g, 0.0, &tols).unwrap();
    println!("diag(4,0,0) factors through rank {rank}: S = {s}");
}
