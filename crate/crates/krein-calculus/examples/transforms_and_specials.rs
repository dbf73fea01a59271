//! Transporting definitizing polynomials to shifted, scaled and inverted
//! operators, and the selfadjoint / unitary special cases with their
//! spectral symmetry.
//!
//! ```bash
//! cargo run --example transforms_and_specials
//! ```

use krein_calculus::embedding::build_embedding;
use krein_calculus::io;
use krein_calculus::krein::{KreinOperator, KreinSpace, Tolerances};
use krein_calculus::poly::Poly2;
use krein_calculus::scalar::GaussianRational;
use krein_calculus::transforms::{
    invdefbar_check, invert_definitizing, scale_definitizing, shift_definitizing,
    special_case_check,
};

fn main() {
    let tols = Tolerances::default();
    let p = |s: &str| Poly2::parse(s).unwrap();

    // shift and scale act by exact substitution
    println!("shift y by beta = i:      {}", shift_definitizing(&p("y"), &GaussianRational::i()));
    println!("scale x by alpha = -1:    {}", scale_definitizing(&p("x"), &GaussianRational::from_int(-1)).unwrap());

    // the inverse transport composes the change of variables with the
    // coefficient reversal
    for s in ["y", "x", "x^2 + y^2 - 1"] {
        println!("inverse transport of {s:>13}: {}", invert_definitizing(&p(s)).unwrap());
    }

    // full inverse-transport check on the flip-space instance
    let spec = io::generate("ex1", 0, 0).unwrap();
    let space = KreinSpace::new(spec.gram_matrix()).unwrap();
    let n = KreinOperator::new(space, spec.operator_matrix()).unwrap();
    let sys = build_embedding(&n, &spec.polynomials().unwrap(), &tols).unwrap();
    let report = invdefbar_check(&sys, &tols).unwrap();
    println!("\ninverse transport on the flip instance: pass = {}", report.pass);
    for rep in &report.reports {
        println!(
            "  {} -> {}  definitizing for N^-1: {} (min eigenvalue {:.2e})",
            rep.original, rep.transformed, rep.definitizing_ok, rep.min_eigenvalue
        );
    }
    println!(
        "  transported ideal zero-dimensional: {}, reversed ideal: {}",
        report.ideal_zero_dim_ok, report.reversed_ideal_zero_dim_ok
    );

    // special cases: the selfadjoint and unitary corpus instances
    for name in ["selfadjoint", "unitary"] {
        let spec = io::generate(name, 0, 0).unwrap();
        let space = KreinSpace::new(spec.gram_matrix()).unwrap();
        let op = KreinOperator::new(space, spec.operator_matrix()).unwrap();
        let calc = io::build_calculus(&spec, None).unwrap();
        let images: Vec<_> = calc.variety().iter().map(|pt| pt.as_complex()).collect();
        let rep = special_case_check(&op, &images, &tols).unwrap();
        println!(
            "\n{name}: selfadjoint = {} (y vanishes: {:?}), unitary = {} (x^2+y^2-1 vanishes: {:?})",
            rep.selfadjoint, rep.selfadjoint_poly_vanishes, rep.unitary, rep.unitary_poly_vanishes
        );
        println!(
            "  off-curve spectrum: {:?}, mirror pairing ok: {:?}",
            rep.off_curve, rep.pairing_ok
        );
    }
}
