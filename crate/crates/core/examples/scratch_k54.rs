// scratch experiment harness (not part of the library surface)
use gaplab_core::simplex::BasisFamily;
use gaplab_core::solve_ratio_enriched;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let k: u32 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(54);
    let fam: BasisFamily = match args.get(2).map(String::as_str) {
        None | Some("om") => BasisFamily::OneMinusP1P2,
        Some("ps") => BasisFamily::PowerSums,
        Some(b) if b.starts_with('b') => BasisFamily::BoundaryPowerSums(b[1..].parse().unwrap()),
        Some(t) => t.parse().unwrap(),
    };
    let deg: u32 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(14);
    let enrich: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0);
    let cap: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(150);
    let t0 = Instant::now();
    let cert = solve_ratio_enriched(k, fam, deg, enrich, cap, 1e-12, None).unwrap();
    println!(
        "k={k} {} n={} enrich={enrich} cap={cap} lambda={:.9} exact={} ok={} t={:.1}s",
        cert.basis,
        cert.basis_len,
        cert.lambda_max,
        &cert.exact_rayleigh[..18.min(cert.exact_rayleigh.len())],
        cert.exact_check_passed,
        t0.elapsed().as_secs_f64()
    );
}
