//! The exact ideal kernel: reduced Gröbner bases with cofactors, quotient
//! algebras, variety points with local primary components, coset
//! arithmetic, Chinese-remainder interpolation and the constrained
//! cofactor lift.
//!
//! ```bash
//! cargo run --example groebner_ideals
//! ```

use krein_calculus::ideal::{
    crt_interpolate, groebner, lift_membership, quotient_algebra, variety, Coset,
};
use krein_calculus::poly::Poly2;

fn main() {
    let p = |s: &str| Poly2::parse(s).unwrap();
    let gens = [p("x^2"), p("y^2 - y")];
    let ideal = groebner(&gens);
    println!("generators:      {:?}", gens.iter().map(|g| g.to_string()).collect::<Vec<_>>());
    println!(
        "reduced basis:   {:?}",
        ideal.groebner_basis().iter().map(|g| g.to_string()).collect::<Vec<_>>()
    );
    for (k, g) in ideal.groebner_basis().iter().enumerate() {
        let combo: Vec<String> = ideal.cofactors()[k].iter().map(|c| c.to_string()).collect();
        println!("  {g} = ({}) * gen", combo.join(") , ("));
    }

    let alg = quotient_algebra(&ideal).unwrap();
    println!("quotient dimension: {}", alg.dim());
    println!(
        "standard monomials: {:?}",
        alg.basis().iter().map(|e| format!("x^{} y^{}", e.i, e.j)).collect::<Vec<_>>()
    );

    let points = variety(&ideal, &alg, 1e-6).unwrap();
    println!("variety ({} points):", points.len());
    for pt in &points {
        println!(
            "  ({}, {})  real={}  d_x={} d_y={}  dim A={} dim B={}",
            pt.x, pt.y, pt.is_real, pt.d_x, pt.d_y,
            pt.algebra_a.dim(), pt.algebra_b.dim()
        );
        println!(
            "    local component: {:?}",
            pt.local_q.groebner_basis().iter().map(|g| g.to_string()).collect::<Vec<_>>()
        );
    }

    // coset arithmetic: (1 + x) is invertible in the local algebra at (0, 0)
    let local = &points[0].algebra_b;
    let c = Coset::from_poly(&p("1 + x"), local);
    let inv = c.invert().unwrap();
    println!("(1 + x)^(-1) in the local algebra: {}", inv.representative());

    // Chinese-remainder interpolation: 0 at (0,0), 1 at (0,1) gives y
    let targets = vec![points[0].algebra_b.zero_coset(), points[1].algebra_b.unit_coset()];
    let interp = crt_interpolate(&targets).unwrap();
    println!("interpolant with residues (0, 1): {interp}");

    // constrained lift: x^3 = x * x^2 with the cofactor vanishing at (0,0)
    let window = vec![&points[0]];
    let u = lift_membership(&p("x^3"), &ideal, &window).unwrap();
    println!(
        "x^3 = ({}) * x^2 + ({}) * (y^2 - y), cofactor vanishes on the window",
        u[0], u[1]
    );
}
