use gaplab_core::*;

fn main() {
    // --- covering improvement grid ---
    for &x in &[500u64, 1000, 2000] {
        let t0 = std::time::Instant::now();
        let triv = max_covered_y(x, Strategy::Trivial, None, 0, 500).unwrap();
        let er = max_covered_y(x, Strategy::ErdosRankin, None, 0, 500).unwrap();
        let (plan, _) = plan_erdos_rankin(x, er.y, default_z(x)).unwrap();
        let witness = crt_witness(&plan).unwrap();
        let ok = verify_gap_witness(&witness).unwrap();
        println!(
            "x={x} trivial_y={} er_y={} ratio={:.4} z={:.3} witness_digits={} verified={} t={:.2}s",
            triv.y,
            er.y,
            er.y as f64 / x as f64,
            default_z(x),
            witness.n.to_string().len(),
            ok,
            t0.elapsed().as_secs_f64()
        );
    }

    // --- random-stage product bound at x = 500 ---
    let t0 = std::time::Instant::now();
    let mut uncovered_total = 0usize;
    let mut survivor_total = 0usize;
    let mut tbar = 0.0;
    let seeds = 200u64;
    for seed in 0..seeds {
        let (_, rep) = plan_random_weighted(500, 500, 3.0, seed).unwrap();
        uncovered_total += rep.uncovered_after_random.len();
        survivor_total += rep.survivors.len();
        tbar = rep.mean_hit_expectation;
    }
    let freq = uncovered_total as f64 / survivor_total as f64;
    let bound = (-tbar).exp();
    let se = (freq * (1.0 - freq) / survivor_total as f64).sqrt();
    println!(
        "random-stage: survivors_per_seed={} tbar={tbar:.4} freq={freq:.4} exp(-t)={bound:.4} 3se={:.4} pass={} t={:.2}s",
        survivor_total as u64 / seeds,
        3.0 * se,
        freq <= bound + 3.0 * se,
        t0.elapsed().as_secs_f64()
    );

    // --- unconditional pipeline: theta = 1/2 ---
    let t0 = std::time::Instant::now();
    let theta = BigRational::new(1.into(), 2.into());
    let report = gap_bound_pipeline(
        &theta,
        BasisFamily::OneMinusP1P2,
        &[11],
        (2, 120),
        2_000_000,
        1e-9,
    )
    .unwrap();
    println!(
        "theta=1/2: k={} lambda={:.10} m={} tuple_k={} diameter={} proven={} t={:.1}s",
        report.k,
        report.lambda_max,
        report.primes_guaranteed,
        report.tuple.tuple.k(),
        report.gap_bound,
        report.tuple.proven_optimal,
        t0.elapsed().as_secs_f64()
    );
    let rejected: Vec<u32> = report.search.rejected.iter().map(|r| r.k).collect();
    println!("rejected probes: {rejected:?}");
}
