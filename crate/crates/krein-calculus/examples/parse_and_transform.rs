//! Exact bivariate polynomials: parsing, the coefficient involution, the
//! change of variables (x, y) ↔ (z, w) = (x + iy, x - iy), coefficient
//! reversal, and matrix substitution.
//!
//! ```bash
//! cargo run --example parse_and_transform
//! ```

use krein_calculus::linalg::CMatrix;
use krein_calculus::poly::Poly2;
use num_complex::Complex64;

fn main() {
    // exact parse/print round trip over Gaussian rationals
    let circle = Poly2::parse("x^2 + y^2 - 1").unwrap();
    println!("parsed: {circle}");
    println!("round trip: {}", Poly2::parse(&circle.to_string()).unwrap());

    // the involution p#(x,y) = conj(p(conj x, conj y)) conjugates coefficients
    let p = Poly2::parse("1/2*x + 3/4*i*y - i").unwrap();
    println!("p      = {p}");
    println!("p#     = {}", p.sharp());
    println!("p real = {}, circle real = {}", p.is_real(), circle.is_real());

    // the change of variables is a ring isomorphism
    let q = circle.phi_transform().unwrap();
    println!("circle in (z, w): {q}"); // zw - 1
    println!("back in (x, y):   {}", q.phi_inverse().unwrap());

    // coefficient reversal (zw)^d q(1/z, 1/w)
    let rev = q.varpi().unwrap();
    println!("reversed: {rev}"); // 1 - zw
    let z = Complex64::new(0.8, 0.3);
    let w = Complex64::new(-1.1, 0.5);
    let lhs = rev.eval(z, w);
    let rhs = (z * w).powi(q.max_degree().0 as i32) * q.eval(1.0 / z, 1.0 / w);
    println!("reversal identity residual: {:.3e}", (lhs - rhs).norm());

    // matrix substitution with commuting arguments
    let e = CMatrix::from_rows(vec![
        vec![Complex64::new(0., 0.), Complex64::new(1., 0.)],
        vec![Complex64::new(0., 0.), Complex64::new(0., 0.)],
    ]);
    let id = CMatrix::identity(2);
    let m = Poly2::parse("x^2").unwrap().mat_subst(&e, &id, 1e-10).unwrap();
    println!("x^2 at the nilpotent shift: norm {:.1e} (E^2 = 0)", m.fro_norm());
    let n = Poly2::parse("x + i*y").unwrap().mat_subst(&e, &id, 1e-10).unwrap();
    println!("x + iy at (E, I):\n{n}");
}
