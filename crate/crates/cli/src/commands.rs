//! One run function per subcommand: parse and resolve parameters, call the
//! library, and package the result with its config echo.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use gaplab_core::{
    crt_witness, default_z, empirical_weight_expectation, g_moments, gap_bound_pipeline,
    gap_growth_curves, interval_prime_counts, is_admissible, max_covered_y, max_gap_scan,
    max_gap_scan_oracle, mc_concentration, narrowest_tuple, plan_erdos_rankin, plan_greedy_only,
    plan_random_weighted, plan_trivial, primes_after_k_tuple, product_ratio_lower_bound,
    solve_ratio_enriched, verify_cover, verify_gap_witness, BasisFamily, BigRational,
    CoveringPlan, Error, GapWitness, Signature, Strategy,
};
use serde_json::{json, Value};

use crate::output::{CommandOutput, CsvTable};
use crate::GlobalOpts;

// ---- shared parsing ---------------------------------------------------------

/// Accepts `7`, `22/7`, and terminating decimals like `0.5` — all exact.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: gaplab_core::BigInt = num.trim().parse().context("bad numerator")?;
        let d: gaplab_core::BigInt = den.trim().parse().context("bad denominator")?;
        if d == 0.into() {
            bail!("zero denominator in `{text}`");
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let digits = format!("{whole}{frac}");
        let n: gaplab_core::BigInt = digits.parse().with_context(|| format!("bad number `{text}`"))?;
        let d = gaplab_core::BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(BigRational::new(n, d));
    }
    let n: gaplab_core::BigInt = text.parse().with_context(|| format!("bad number `{text}`"))?;
    Ok(BigRational::from_integer(n))
}

fn parse_shift_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|part| part.trim().parse::<u64>().with_context(|| format!("bad shift `{part}`")))
        .collect()
}

/// Resolved config = global flags + per-command fields, sorted keys.
fn config_with(global: &GlobalOpts, fields: Value) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("seed".into(), json!(global.seed));
    map.insert("format".into(), json!(global.format.tag()));
    map.insert("threads".into(), json!(global.threads));
    if let Value::Object(extra) = fields {
        map.extend(extra);
    }
    Value::Object(map)
}

// ---- optimize ---------------------------------------------------------------

#[derive(Args)]
pub struct OptimizeArgs {
    /// Number of simplex variables (tuple length)
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
    /// Basis family: one-minus-p1-p2 | power-sums | one-minus-p1-up-to-pR
    #[arg(long, default_value = "one-minus-p1-p2")]
    pub family: String,
    /// Total-degree cap for the basis
    #[arg(long, default_value_t = 11)]
    pub max_degree: u32,
    /// Certify the ratio exceeds this value (rational or decimal, exact)
    #[arg(long)]
    pub target: Option<String>,
    /// Rounds of eigenvector-guided basis enrichment
    #[arg(long, default_value_t = 0)]
    pub enrich: usize,
    /// Term cap per enriched candidate polynomial
    #[arg(long, default_value_t = 150)]
    pub term_cap: usize,
    /// Floating-point eigensolve tolerance (the certificate is exact anyway)
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

pub fn run_optimize(global: &GlobalOpts, args: &OptimizeArgs) -> Result<CommandOutput> {
    let family: BasisFamily = args.family.parse()?;
    let target = args.target.as_deref().map(parse_rational).transpose()?;
    let cert = solve_ratio_enriched(
        args.k,
        family,
        args.max_degree,
        args.enrich,
        args.term_cap,
        args.tolerance,
        target.as_ref(),
    )?;
    let verified = match target {
        Some(_) => cert.exceeds_target && cert.exact_check_passed,
        None => true,
    };
    Ok(CommandOutput {
        command: "optimize",
        config: config_with(
            global,
            json!({
                "k": args.k,
                "family": family.tag(),
                "max-degree": args.max_degree,
                "target": args.target,
                "enrich": args.enrich,
                "term-cap": args.term_cap,
                "tolerance": args.tolerance,
            }),
        ),
        result: serde_json::to_value(&cert)?,
        verified,
        table: None,
    })
}

// ---- tuple ------------------------------------------------------------------

#[derive(Subcommand)]
pub enum TupleAction {
    /// Check admissibility with one witness residue class per prime
    Verify(TupleVerifyArgs),
    /// Narrowest admissible tuple: exhaustive (proven) up to 8 shifts, greedy beyond
    Search(TupleSearchArgs),
    /// The classical seed: the first k primes beyond k, shifted to start at 0
    ShiftedPrimes(TupleShiftedArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
pub struct TupleVerifyArgs {
    /// Comma-separated shifts, e.g. 0,2,6
    #[arg(value_name = "SHIFTS")]
    pub shifts: Option<String>,
    /// JSON file holding an array of shifts
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Args)]
pub struct TupleSearchArgs {
    /// Tuple length
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
    /// Candidate-diameter probe budget for the greedy descent
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: u64,
}

#[derive(Args)]
pub struct TupleShiftedArgs {
    /// Tuple length
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
}

pub fn run_tuple_verify(global: &GlobalOpts, args: &TupleVerifyArgs) -> Result<CommandOutput> {
    let (shifts, source) = match (&args.shifts, &args.file) {
        (Some(text), None) => (parse_shift_list(text)?, json!("inline")),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let shifts: Vec<u64> =
                serde_json::from_str(&text).context("file must hold a JSON array of shifts")?;
            (shifts, json!(path.display().to_string()))
        }
        _ => unreachable!("clap group enforces exactly one input"),
    };
    let witness = is_admissible(&shifts)?;
    let admissible = witness.is_admissible();
    let diameter = shifts.last().copied().unwrap_or(0) - shifts.first().copied().unwrap_or(0);
    Ok(CommandOutput {
        command: "tuple-verify",
        config: config_with(global, json!({ "shifts": shifts, "source": source })),
        result: json!({
            "k": shifts.len(),
            "diameter": diameter,
            "admissible": admissible,
            "witness": witness,
        }),
        verified: admissible,
        table: None,
    })
}

pub fn run_tuple_search(global: &GlobalOpts, args: &TupleSearchArgs) -> Result<CommandOutput> {
    let found = narrowest_tuple(args.k, args.budget)?;
    Ok(CommandOutput {
        command: "tuple-search",
        config: config_with(global, json!({ "k": args.k, "budget": args.budget })),
        result: json!({
            "k": args.k,
            "shifts": found.tuple.shifts(),
            "diameter": found.tuple.diameter(),
            "proven_optimal": found.proven_optimal,
            "method": found.method,
        }),
        verified: true,
        table: None,
    })
}

pub fn run_tuple_shifted(global: &GlobalOpts, args: &TupleShiftedArgs) -> Result<CommandOutput> {
    let (tuple, witness) = primes_after_k_tuple(args.k)?;
    Ok(CommandOutput {
        command: "tuple-shifted-primes",
        config: config_with(global, json!({ "k": args.k })),
        result: json!({
            "k": args.k,
            "shifts": tuple.shifts(),
            "diameter": tuple.diameter(),
            "witness": witness,
        }),
        verified: true,
        table: None,
    })
}

// ---- cover ------------------------------------------------------------------

#[derive(Args)]
pub struct CoverArgs {
    /// trivial | erdos-rankin | greedy-only | random-weighted
    #[arg(long)]
    pub strategy: String,
    /// Sieving limit: one residue class per prime ≤ x
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub x: u64,
    /// Target length, or `auto` to search for the maximum fully covered y
    #[arg(long, default_value = "auto")]
    pub y: String,
    /// Small-prime threshold, or `auto` for the built-in slow-growing formula
    #[arg(long, default_value = "auto")]
    pub z: String,
    /// Attach the CRT gap witness, re-verified by independent trial division
    #[arg(long)]
    pub emit_witness: bool,
    /// Verification-probe budget for `--y auto`
    #[arg(long, default_value_t = 300)]
    pub budget: u64,
}

fn build_plan(
    strategy: Strategy,
    x: u64,
    y: u64,
    z: f64,
    seed: u64,
) -> Result<(CoveringPlan, Option<Value>)> {
    Ok(match strategy {
        Strategy::Trivial => (plan_trivial(x, y)?, None),
        Strategy::GreedyOnly => (plan_greedy_only(x, y)?, None),
        Strategy::ErdosRankin => {
            let (plan, report) = plan_erdos_rankin(x, y, z)?;
            (plan, Some(serde_json::to_value(&report)?))
        }
        Strategy::RandomWeighted => {
            let (plan, report) = plan_random_weighted(x, y, z, seed)?;
            (plan, Some(serde_json::to_value(&report)?))
        }
    })
}

fn witness_value(plan: &CoveringPlan) -> Result<(Value, bool)> {
    let witness: GapWitness = crt_witness(plan)?;
    let reverified = verify_gap_witness(&witness)?;
    let mut value = serde_json::to_value(&witness)?;
    if let Value::Object(map) = &mut value {
        map.insert("reverified".into(), json!(reverified));
    }
    Ok((value, reverified))
}

pub fn run_cover(global: &GlobalOpts, args: &CoverArgs) -> Result<CommandOutput> {
    let strategy: Strategy = args.strategy.parse()?;
    let z_arg = match args.z.as_str() {
        "auto" => None,
        text => Some(text.parse::<f64>().with_context(|| format!("bad z `{text}`"))?),
    };
    let z = z_arg.unwrap_or_else(|| default_z(args.x));
    let uses_z = matches!(strategy, Strategy::ErdosRankin | Strategy::RandomWeighted);
    let config = config_with(
        global,
        json!({
            "strategy": args.strategy,
            "x": args.x,
            "y": args.y,
            "z": if uses_z { json!(z) } else { Value::Null },
            "emit-witness": args.emit_witness,
            "budget": args.budget,
        }),
    );
    let (y, max_report) = match args.y.as_str() {
        "auto" => {
            let report = max_covered_y(args.x, strategy, z_arg, global.seed, args.budget)?;
            (report.y, Some(serde_json::to_value(&report)?))
        }
        text => {
            let y: u64 = text.parse().with_context(|| format!("bad y `{text}`"))?;
            (y, None)
        }
    };
    if y == 0 {
        bail!("no coverable y found within the probe budget");
    }
    let (plan, stage_report) = build_plan(strategy, args.x, y, z, global.seed)?;
    let cover = verify_cover(&plan)?;
    let mut stages = serde_json::Map::new();
    for (_, _, stage) in plan.choices() {
        let tag = match serde_json::to_value(stage)? {
            Value::String(s) => s,
            _ => unreachable!("stage serializes to a string"),
        };
        let slot = stages.entry(tag).or_insert(json!(0u64));
        *slot = json!(slot.as_u64().unwrap() + 1);
    }
    let witness = if args.emit_witness && cover.covered {
        Some(witness_value(&plan)?)
    } else {
        None
    };
    let verified = cover.covered && witness.as_ref().map(|&(_, ok)| ok).unwrap_or(true);
    const UNCOVERED_CAP: usize = 200;
    Ok(CommandOutput {
        command: "cover",
        config,
        result: json!({
            "x": args.x,
            "y": y,
            "covered": cover.covered,
            "uncovered_count": cover.uncovered.len(),
            "uncovered": cover.uncovered.iter().take(UNCOVERED_CAP).collect::<Vec<_>>(),
            "stage_counts": Value::Object(stages),
            "max_cover": max_report,
            "stage_report": stage_report,
            "plan": serde_json::to_value(&plan)?,
            "witness": witness.map(|(v, _)| v),
        }),
        verified,
        table: None,
    })
}

// ---- gaps -------------------------------------------------------------------

#[derive(Subcommand)]
pub enum GapsAction {
    /// Maximal-gap table below the limit, cross-checked by two scans
    Scan(GapsScanArgs),
    /// Growth comparison: max gap against log² and the slow-log form
    Curves(GapsCurvesArgs),
    /// Histogram of prime counts in sliding windows (X, X+y]
    Intervals(GapsIntervalsArgs),
}

#[derive(Args)]
pub struct GapsScanArgs {
    /// Scan primes below this bound
    #[arg(long)]
    pub limit: u64,
}

#[derive(Args)]
pub struct GapsCurvesArgs {
    /// Largest sampling point
    #[arg(long)]
    pub limit: u64,
    /// Sampling stride (default limit/20)
    #[arg(long)]
    pub step: Option<u64>,
}

#[derive(Args)]
pub struct GapsIntervalsArgs {
    /// Window starting points range over [x-lo, 2·x-lo]
    #[arg(long)]
    pub x_lo: u64,
    /// Window length
    #[arg(long)]
    pub y: u64,
    /// Number of sampled windows (exhaustive when the range is smaller)
    #[arg(long, default_value_t = 200_000)]
    pub budget: u64,
    /// Threshold multiplier: windows with < c·ln(y) primes are "deficient"
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

pub fn run_gaps_scan(global: &GlobalOpts, args: &GapsScanArgs) -> Result<CommandOutput> {
    let records = max_gap_scan(args.limit)?;
    let oracle = max_gap_scan_oracle(args.limit)?;
    let cross_checked = records == oracle;
    let table = CsvTable {
        headers: vec!["p", "next", "gap", "maximal"],
        rows: records
            .iter()
            .map(|r| {
                vec![r.p.to_string(), r.next.to_string(), r.gap.to_string(), r.maximal.to_string()]
            })
            .collect(),
    };
    Ok(CommandOutput {
        command: "gaps-scan",
        config: config_with(global, json!({ "limit": args.limit })),
        result: json!({
            "limit": args.limit,
            "cross_checked": cross_checked,
            "records": records,
        }),
        verified: cross_checked,
        table: Some(table),
    })
}

pub fn run_gaps_curves(global: &GlobalOpts, args: &GapsCurvesArgs) -> Result<CommandOutput> {
    let step = args.step.unwrap_or_else(|| (args.limit / 20).max(1));
    let rows = gap_growth_curves(args.limit, step)?;
    let table = CsvTable {
        headers: vec!["x", "max_gap", "log2_x", "rankin_form"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.x.to_string(),
                    r.max_gap.to_string(),
                    format!("{:.6}", r.log2_x),
                    r.rankin_form.map(|v| format!("{v:.6}")).unwrap_or_default(),
                ]
            })
            .collect(),
    };
    Ok(CommandOutput {
        command: "gaps-curves",
        config: config_with(global, json!({ "limit": args.limit, "step": step })),
        result: json!({ "limit": args.limit, "step": step, "rows": rows }),
        verified: true,
        table: Some(table),
    })
}

pub fn run_gaps_intervals(global: &GlobalOpts, args: &GapsIntervalsArgs) -> Result<CommandOutput> {
    let report = interval_prime_counts(args.x_lo, args.y, args.budget, args.c)?;
    let table = CsvTable {
        headers: vec!["count", "windows"],
        rows: report
            .histogram
            .iter()
            .map(|(count, windows)| vec![count.to_string(), windows.to_string()])
            .collect(),
    };
    Ok(CommandOutput {
        command: "gaps-intervals",
        config: config_with(
            global,
            json!({ "x-lo": args.x_lo, "y": args.y, "budget": args.budget, "c": args.c }),
        ),
        result: serde_json::to_value(&report)?,
        verified: true,
        table: Some(table),
    })
}

// ---- expect -----------------------------------------------------------------

#[derive(Args)]
pub struct ExpectArgs {
    /// Level of distribution θ ∈ (0, 1], rational or decimal (exact)
    #[arg(long)]
    pub theta: String,
    /// Certified sieve ratio; the expectation limit is ratio·θ/2
    #[arg(long, required_unless_present = "pipeline", conflicts_with = "pipeline")]
    pub ratio: Option<String>,
    /// Run the full chain instead: smallest certified k, then a narrow tuple
    #[arg(long)]
    pub pipeline: bool,
    /// Tuple length the plain expectation refers to (bookkeeping only)
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Basis family for --pipeline
    #[arg(long, default_value = "one-minus-p1-p2")]
    pub family: String,
    /// Nested degree schedule for --pipeline, e.g. 8,11
    #[arg(long, default_value = "11", value_delimiter = ',')]
    pub schedule: Vec<u32>,
    /// Smallest k the pipeline search may consider
    #[arg(long, default_value_t = 2)]
    pub k_lo: u32,
    /// Largest k the pipeline search may consider
    #[arg(long, default_value_t = 120)]
    pub k_hi: u32,
    /// Tuple-search budget for --pipeline
    #[arg(long, default_value_t = 2_000_000)]
    pub tuple_budget: u64,
    /// Floating-point eigensolve tolerance
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

pub fn run_expect(global: &GlobalOpts, args: &ExpectArgs) -> Result<CommandOutput> {
    let theta = parse_rational(&args.theta)?;
    if args.pipeline {
        let family: BasisFamily = args.family.parse()?;
        let config = config_with(
            global,
            json!({
                "theta": args.theta,
                "pipeline": true,
                "family": family.tag(),
                "schedule": args.schedule,
                "k-lo": args.k_lo,
                "k-hi": args.k_hi,
                "tuple-budget": args.tuple_budget,
                "tolerance": args.tolerance,
            }),
        );
        return match gap_bound_pipeline(
            &theta,
            family,
            &args.schedule,
            (args.k_lo, args.k_hi),
            args.tuple_budget,
            args.tolerance,
        ) {
            Ok(report) => Ok(CommandOutput {
                command: "expect-pipeline",
                config,
                result: serde_json::to_value(&report)?,
                verified: true,
                table: None,
            }),
            Err(Error::SearchExhausted { lo, hi }) => Ok(CommandOutput {
                command: "expect-pipeline",
                config,
                result: json!({
                    "certified": false,
                    "reason": format!(
                        "no k in [{lo}, {hi}] certified ratio > 2/theta with the given schedule"
                    ),
                }),
                verified: false,
                table: None,
            }),
            Err(other) => Err(other.into()),
        };
    }
    let ratio = parse_rational(args.ratio.as_deref().expect("clap requires ratio"))?;
    let params = gaplab_core::ExpectationParams { theta, ratio, k: args.k };
    let (limit, m) = gaplab_core::guaranteed_primes(&params)?;
    Ok(CommandOutput {
        command: "expect",
        config: config_with(
            global,
            json!({ "theta": args.theta, "ratio": args.ratio, "k": args.k }),
        ),
        result: json!({
            "expectation_limit": limit.to_string(),
            "primes_guaranteed": m,
        }),
        verified: true,
        table: None,
    })
}

// ---- concentrate ------------------------------------------------------------

#[derive(Args)]
pub struct ConcentrateArgs {
    /// Profile dimension
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: u32,
    /// Monte Carlo sample count
    #[arg(long, default_value_t = 200_000)]
    pub samples: u64,
    /// Estimate P(Σ Z_i < threshold)
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

pub fn run_concentrate(global: &GlobalOpts, args: &ConcentrateArgs) -> Result<CommandOutput> {
    let profile = g_moments(args.k)?;
    let concentration = mc_concentration(args.k, args.samples, args.threshold, global.seed)?;
    let ratio_bound = product_ratio_lower_bound(args.k, args.samples, global.seed)?;
    Ok(CommandOutput {
        command: "concentrate",
        config: config_with(
            global,
            json!({ "k": args.k, "samples": args.samples, "threshold": args.threshold }),
        ),
        result: json!({
            "profile": profile,
            "concentration": concentration,
            "product_ratio": ratio_bound,
        }),
        verified: true,
        table: None,
    })
}

// ---- weights ----------------------------------------------------------------

#[derive(Args)]
pub struct WeightsArgs {
    /// Comma-separated shifts (1 ≤ k ≤ 4, brute-force scan)
    #[arg(long, value_delimiter = ',', required = true)]
    pub shifts: Vec<u64>,
    /// Divisor-sum truncation R
    #[arg(long)]
    pub r: f64,
    /// Weights are scanned over (X, 2X]
    #[arg(long)]
    pub x: u64,
    /// Boundary power β of the profile (1 − P₁)^β
    #[arg(long, default_value_t = 1)]
    pub beta: u32,
}

pub fn run_weights(global: &GlobalOpts, args: &WeightsArgs) -> Result<CommandOutput> {
    let k = args.shifts.len() as u32;
    let profile = gaplab_core::expand_signature(k.max(1), &Signature::new(vec![], args.beta));
    let stats = empirical_weight_expectation(&args.shifts, args.r, args.x, &profile)?;
    Ok(CommandOutput {
        command: "weights",
        config: config_with(
            global,
            json!({ "shifts": args.shifts, "r": args.r, "x": args.x, "beta": args.beta }),
        ),
        result: serde_json::to_value(&stats)?,
        verified: true,
        table: None,
    })
}
