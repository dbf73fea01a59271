//! End-to-end pipeline: generate a corpus instance, run the structural
//! analysis and the full verification, and emit the JSON report — the same
//! flow the `kreinfc` binary drives from the command line.
//!
//! ```bash
//! cargo run --example full_pipeline
//! ```

use krein_calculus::io;

fn main() {
    // a seeded random instance: block-normal model under a random unitary
    let spec = io::generate("random", 7, 6).unwrap();
    println!("definitizing list: {:?}", spec.definitizing);
    println!("dimension: {}", spec.space.dim);

    let report = io::analyze("random-7", &spec, None).unwrap();
    println!("\n{}", report.summary());

    println!("\nvariety table:");
    for v in &report.ideal_summary.variety {
        println!(
            "  ({}, {})  real={}  d_x={} d_y={}  dim A={} dim B={}",
            v.point[0], v.point[1], v.is_real, v.d_x, v.d_y, v.dim_a, v.dim_b
        );
    }

    let verified = io::verify("random-7", &spec, None).unwrap();
    println!(
        "\nfull verification: {} ({} identity checks)",
        if verified.rollup { "PASS" } else { "FAIL" },
        verified.lemma_checks.len()
    );

    // the JSON report round-trips byte-identically for equal inputs
    let json = verified.to_json().unwrap();
    println!("\nreport excerpt:\n{}", &json[..json.len().min(600)]);
}
