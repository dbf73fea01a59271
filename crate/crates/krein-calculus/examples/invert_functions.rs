//! Pointwise inversion in the function class: a function whose scalar
//! values stay away from zero and whose cosets are invertible in their
//! local algebras has an inverse, and the two operators multiply to the
//! identity. A coset vanishing at its variety point is reported with the
//! offending point.
//!
//! ```bash
//! cargo run --example invert_functions
//! ```

use krein_calculus::calculus::{calc_invert, embed_poly, phi_of_n};
use krein_calculus::io;
use krein_calculus::linalg::CMatrix;
use krein_calculus::poly::Poly2;

fn main() {
    let spec = io::generate("ex2", 0, 0).unwrap();
    let calc = io::build_calculus(&spec, None).unwrap();

    // z - 1 is invertible: 1 is neither in the spectrum nor a variety image
    let phi = embed_poly(&calc, &Poly2::parse("x + i*y - 1").unwrap()).unwrap();
    let inv = calc_invert(&phi).unwrap();
    let prod = phi_of_n(&inv).unwrap().matmul(&phi_of_n(&phi).unwrap());
    println!(
        "(z - 1)^(-1)(N) * (z - 1)(N) vs identity: residual {:.3e}",
        prod.sub(&CMatrix::identity(3)).fro_norm()
    );
    println!("(z - 1)^(-1)(N) =\n{}", phi_of_n(&inv).unwrap());

    // z - i vanishes at the variety point (0, 1): inversion must refuse
    let phi = embed_poly(&calc, &Poly2::parse("x + i*y - i").unwrap()).unwrap();
    match calc_invert(&phi) {
        Err(e) => println!("\n(z - i) is not invertible: {e}"),
        Ok(_) => println!("\nunexpected: (z - i) inverted"),
    }

    // a scalar value too close to zero is also refused
    let phi = embed_poly(&calc, &Poly2::parse("x + i*y - 2").unwrap()).unwrap();
    match calc_invert(&phi) {
        Err(e) => println!("(z - 2) is not invertible: {e}"),
        Ok(_) => println!("unexpected: (z - 2) inverted"),
    }
}
