//! Hilbert-space embeddings: factoring T_j T_j⁺ = p_j(A,B) and
//! T T⁺ = Σ p_k(A,B), the connecting contractions R_j, the transfer maps
//! Θ / Θ_j / Γ_j / Ξ / Ξ_j / Λ_j, and the identity suite they satisfy.
//!
//! ```bash
//! cargo run --example build_embeddings
//! ```

use krein_calculus::embedding::build_embedding;
use krein_calculus::io;
use krein_calculus::krein::{KreinOperator, KreinSpace, Tolerances};

fn main() {
    // the block instance: C ⊕ flip space, N = 2 ⊕ (iI + E)
    let spec = io::generate("ex2", 0, 0).unwrap();
    let space = KreinSpace::new(spec.gram_matrix()).unwrap();
    let n = KreinOperator::new(space, spec.operator_matrix()).unwrap();
    let polys = spec.polynomials().unwrap();
    let sys = build_embedding(&n, &polys, &Tolerances::default()).unwrap();

    println!("definitizing list: {:?}", spec.definitizing);
    println!("dim H = {}, dim H_j = {:?}", sys.h_dim(), (0..sys.num_polys()).map(|j| sys.hj_dim(j)).collect::<Vec<_>>());
    println!("T =\n{}", sys.t());
    println!("T+ = {}", sys.t_adj());

    // the main operator transported to the Hilbert side
    let theta_n = sys.theta_n().unwrap();
    println!("Theta(N) = {theta_n}");

    // Xi transports back: Xi(I) recovers the total semidefinite form
    let id = krein_calculus::linalg::CMatrix::identity(sys.h_dim());
    println!("Xi(I) =\n{}", sys.xi(&id).unwrap());

    // the full transfer-identity report
    println!("\ntransfer identities:");
    for chk in sys.verify_transfer_lemmas(7).unwrap() {
        println!(
            "  {:<24} {} residual {:.3e} (tol {:.1e}) {}",
            chk.tag,
            chk.index.map(|k| format!("[{k}]")).unwrap_or_else(|| "   ".into()),
            chk.residual,
            chk.tol,
            if chk.pass { "ok" } else { "FAIL" }
        );
    }
}
