//! Riesz projections from point masses: (e·δ_ζ)(N) is an idempotent
//! commuting with N whose range carries the spectral part at ζ; point
//! masses at variety points outside the spectrum vanish, and values in the
//! kernel of the local projection π_w do not matter when the spectral
//! measure puts no mass at w.
//!
//! ```bash
//! cargo run --example riesz_projections
//! ```

use krein_calculus::calculus::{delta, phi_of_n, random_function, unit_delta};
use krein_calculus::ideal::Coset;
use krein_calculus::io;
use krein_calculus::rng::SplitMix64;

fn main() {
    let spec = io::generate("ex2", 0, 0).unwrap();
    let calc = io::build_calculus(&spec, None).unwrap();
    let n = calc.operator().matrix();

    for (idx, pt) in calc.variety().iter().enumerate() {
        let phi = unit_delta(&calc, idx).unwrap();
        let p = phi_of_n(&phi).unwrap();
        println!("point ({}, {}):", pt.x, pt.y);
        println!("  (e delta)(N) =\n{p}");
        println!("  idempotency residual: {:.3e}", p.matmul(&p).sub(&p).fro_norm());
        println!(
            "  commutation with N:   {:.3e}",
            p.matmul(n).sub(&n.matmul(&p)).fro_norm()
        );
    }

    // locality: both variety points carry no spectral mass here, so bumping
    // a function by a generator of Q(w) (zero in B(w), nonzero in A(w))
    // leaves the operator unchanged
    let mut rng = SplitMix64::new(3);
    let phi = random_function(&calc, &mut rng).unwrap();
    let base = phi_of_n(&phi).unwrap();
    let w = calc.real_points()[0];
    let pt = &calc.variety()[w];
    let bump_poly = &pt.local_q.groebner_basis()[0];
    let bump = Coset::from_poly(bump_poly, &pt.algebra_a);
    println!("\nbump at ({}, {}) by {} (zero in B, nonzero in A: {})", pt.x, pt.y, bump_poly, !bump.is_zero());
    let bumped = phi.add(&delta(&calc, w, bump).unwrap()).unwrap();
    let shifted = phi_of_n(&bumped).unwrap();
    println!("operator change under the bump: {:.3e}", shifted.sub(&base).fro_norm());

    // the growth diagnostic near a real variety point
    let idx = calc.real_points()[1];
    let z = num_complex::Complex64::new(1e-3, 1.0);
    println!(
        "\ngrowth diagnostic chi at ({}, {}) for z = {z}: {:.3e}",
        calc.variety()[idx].x,
        calc.variety()[idx].y,
        calc.compute_chi(idx, z).unwrap()
    );
}
