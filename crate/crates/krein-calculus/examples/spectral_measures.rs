//! Spectral measures of the transported normal operators: simultaneous
//! diagonalization of the commuting Hermitian parts, spectral integrals,
//! the pointwise eigenvalue bound, and the measure-transfer identities.
//!
//! ```bash
//! cargo run --example spectral_measures
//! ```

use krein_calculus::embedding::build_embedding;
use krein_calculus::io;
use krein_calculus::krein::{KreinOperator, KreinSpace, Tolerances};
use krein_calculus::linalg::CMatrix;
use krein_calculus::spectral::{
    spectral_decomposition, spectral_transfer_checks, speknorm_check, transported_spectra,
};
use num_complex::Complex64;

fn main() {
    let tols = Tolerances::default();

    // a normal matrix decomposes into clustered eigenvalues and projections
    let m = CMatrix::diag(&[
        Complex64::new(1., 0.),
        Complex64::new(0., 1.),
        Complex64::new(1., 0.),
    ]);
    let sd = spectral_decomposition(&m, &tols).unwrap();
    println!("eigenvalue clusters of diag(1, i, 1): {:?}", sd.eigenvalues());
    let e_at_i = sd.projection_where(|z| (z - Complex64::new(0., 1.)).norm() < 1e-8);
    println!("spectral projection at i =\n{e_at_i}");
    let back = sd.integrate(|z| z);
    println!("reassembled from the measure, residual {:.3e}", back.sub(&m).fro_norm());

    // the transported spectra of a Krein instance and the transfer checks
    let spec = io::generate("ex2", 0, 0).unwrap();
    let space = KreinSpace::new(spec.gram_matrix()).unwrap();
    let n = KreinOperator::new(space, spec.operator_matrix()).unwrap();
    let polys = spec.polynomials().unwrap();
    let sys = build_embedding(&n, &polys, &tols).unwrap();
    let spectra = transported_spectra(&sys, &tols).unwrap();
    println!("\nspectrum of Theta(N): {:?}", spectra.total.eigenvalues());
    for (j, local) in spectra.locals.iter().enumerate() {
        println!("spectrum of Theta_{j}(N): {:?}", local.eigenvalues());
    }

    // the real variety positions of the ideal <x^2, y^2 - y> are 0 and i
    let vreal = vec![Complex64::new(0., 0.), Complex64::new(0., 1.)];
    println!("\npointwise bound and zero-locus checks:");
    for chk in speknorm_check(&sys, &spectra.total, &vreal, &tols) {
        println!("  {:<22} residual {:.3e} {}", chk.tag, chk.residual, if chk.pass { "ok" } else { "FAIL" });
    }
    println!("measure-transfer identities:");
    for chk in spectral_transfer_checks(&sys, &spectra, &vreal, 5, &tols).unwrap() {
        println!(
            "  {:<22} {} residual {:.3e} {}",
            chk.tag,
            chk.index.map(|k| format!("[{k}]")).unwrap_or_default(),
            chk.residual,
            if chk.pass { "ok" } else { "FAIL" }
        );
    }
}
