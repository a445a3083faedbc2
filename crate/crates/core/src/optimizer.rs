//! Quadratic-form assembly and eigenvalue certification for the sieve ratio.
//!
//! For a basis of symmetric functions `g = (1 − P₁)^β · Π_r P_r` on the
//! simplex, two bilinear forms matter: the plain inner product
//! `I(f, g) = ∫ fg` and the compressed form `ΣJ_ℓ(f, g)`, where each `J_ℓ`
//! first integrates one coordinate out.  Both reduce to exact rational
//! numbers.  The figure of merit is the largest generalized eigenvalue of
//! (ΣJ, I), and every reported success is re-verified as an exact rational
//! Rayleigh-quotient inequality, so floating-point error cannot fake a
//! certificate.
//!
//! The ΣJ assembly uses the symmetry shortcut ΣJ_ℓ = k·J_k and the closed
//! form of the inner integral: writing each generator `P_r = Q_r + t_k^r`
//! over the remaining variables and `(1 − P₁) = v − t_k` with `v = 1 − Σ'`,
//!
//! ```text
//! ∫₀^v (v − t)^β t^w dt = v^{β+w+1} · β! w! / (β+w+1)!
//! ```
//!
//! so one basis element "sections" into finitely many (k−1)-dimensional
//! elements indexed by which generator copies donate their `t_k` power.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::Df;
use crate::eigen::largest_generalized_eigen;
use crate::error::{Error, Result};
use crate::primes::{least_factor_tables, sieve_range};
use crate::simplex::{
    binomial, enumerate_signatures, factorial, BasisFamily, Signature, SymPoly,
};
use crate::simplex::family_integral;

// ---- form assembly ---------------------------------------------------------

/// Exact symmetric matrix of `∫ g_a g_b` over the `k`-simplex.
pub fn assemble_i_form(basis: &[Signature], k: u32) -> Result<Vec<Vec<BigRational>>> {
    if k == 0 || basis.is_empty() {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let n = basis.len();
    let rows: Vec<Vec<BigRational>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let prod = basis[i.min(j)].merge(&basis[i.max(j)]);
                    family_integral(k, prod.boundary_power(), prod.exponents())
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

/// One (k−1)-dimensional piece of a sectioned basis element.
struct SectionTerm {
    coef: BigRational,
    beta: u32,
    gens: Vec<u32>,
}

/// Global cache: sectioning a signature is pure and recurs heavily in
/// bilinear-form assembly.
static SECTIONS: std::sync::LazyLock<
    std::sync::RwLock<std::collections::HashMap<Signature, std::sync::Arc<Vec<SectionTerm>>>>,
> = std::sync::LazyLock::new(Default::default);

fn sections(sig: &Signature) -> std::sync::Arc<Vec<SectionTerm>> {
    if let Some(hit) = SECTIONS.read().expect("sections lock").get(sig) {
        return hit.clone();
    }
    let fresh = std::sync::Arc::new(compute_sections(sig));
    SECTIONS
        .write()
        .expect("sections lock")
        .entry(sig.clone())
        .or_insert(fresh)
        .clone()
}

/// Expands `(1 − P₁)^β Π_r P_r` under ∫dt_k into (k−1)-variable terms.
fn compute_sections(sig: &Signature) -> Vec<SectionTerm> {
    // Group the generator multiset into (value, count) runs.
    let mut groups: Vec<(u32, u32)> = Vec::new();
    for &e in sig.exponents() {
        match groups.last_mut() {
            Some((v, c)) if *v == e => *c += 1,
            _ => groups.push((e, 1)),
        }
    }
    let beta = sig.boundary_power();
    let mut out = Vec::new();
    // Mixed-radix counter over how many copies of each generator donate t_k.
    let mut pick = vec![0u32; groups.len()];
    loop {
        let mut w = 0u32;
        let mut choose = BigInt::one();
        let mut rem: Vec<u32> = Vec::new();
        for (idx, &(value, count)) in groups.iter().enumerate() {
            let j = pick[idx];
            w += value * j;
            choose *= binomial(count, j);
            rem.extend(std::iter::repeat_n(value, (count - j) as usize));
        }
        let coef = BigRational::new(
            choose * factorial(w) * factorial(beta),
            factorial(w + beta + 1),
        );
        out.push(SectionTerm { coef, beta: beta + w + 1, gens: rem });
        // Increment the counter.
        let mut idx = 0;
        loop {
            if idx == groups.len() {
                return out;
            }
            pick[idx] += 1;
            if pick[idx] <= groups.get(idx).map(|g| g.1).unwrap_or(0) {
                break;
            }
            pick[idx] = 0;
            idx += 1;
        }
    }
}

/// Exact symmetric matrix of `ΣJ_ℓ(g_a, g_b) = k·J_k(g_a, g_b)`.
pub fn assemble_j_form(basis: &[Signature], k: u32) -> Result<Vec<Vec<BigRational>>> {
    if k == 0 || basis.is_empty() {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let n = basis.len();
    let secs: Vec<std::sync::Arc<Vec<SectionTerm>>> = basis.iter().map(sections).collect();
    let kq = BigRational::from_integer(BigInt::from(k));
    let rows: Vec<Vec<BigRational>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (si, sj) = (&secs[i.min(j)], &secs[i.max(j)]);
                    let mut acc = BigRational::zero();
                    for a in si.iter() {
                        for b in sj.iter() {
                            let mut gens = a.gens.clone();
                            gens.extend_from_slice(&b.gens);
                            gens.sort_unstable_by(|x, y| y.cmp(x));
                            let fi = family_integral(k - 1, a.beta + b.beta, &gens);
                            acc += &a.coef * &b.coef * fi;
                        }
                    }
                    &acc * &kq
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

// ---- generator-algebra polynomials ------------------------------------------

/// A symmetric function written in the generator algebra: a finite rational
/// combination of `(1 − P₁)^β · Π_r P_r` products.  Unlike the orbit-based
/// [`SymPoly`], products and the compression operator stay cheap here, so this
/// is the working representation for basis enrichment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenPoly {
    k: u32,
    terms: std::collections::BTreeMap<Signature, BigRational>,
}

impl GenPoly {
    pub fn zero(k: u32) -> GenPoly {
        GenPoly { k, terms: Default::default() }
    }

    pub fn from_signature(k: u32, sig: &Signature) -> GenPoly {
        let mut p = GenPoly::zero(k);
        p.terms.insert(sig.clone(), BigRational::one());
        p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Signature, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_scaled(&mut self, other: &GenPoly, c: &BigRational) {
        for (sig, v) in &other.terms {
            let entry = self.terms.entry(sig.clone()).or_insert_with(BigRational::zero);
            *entry += v * c;
        }
        self.terms.retain(|_, v| !v.is_zero());
    }

    /// Exact `∫_simplex self dt`.
    pub fn integral(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (sig, c) in &self.terms {
            acc += c * family_integral(self.k, sig.boundary_power(), sig.exponents());
        }
        acc
    }

    /// Applies the compression operator `T`: `(T F)(t) = Σ_m ∫₀^{1−Σ_{i≠m}}
    /// F dt_m`, characterized by `ΣJ(F, G) = ∫ G·(T F)` for all `G`.  The
    /// image is again a generator-algebra polynomial of degree +1: each
    /// section re-embeds via `Q_r = P_r − t_m^r`, `1 − Q₁ = (1 − P₁) + t_m`,
    /// and `Σ_m t_m^c = P_c` (or `k` when `c = 0`).
    pub fn compress(&self) -> GenPoly {
        let k_int = BigRational::from_integer(BigInt::from(self.k));
        let mut out = GenPoly::zero(self.k);
        for (sig, c) in &self.terms {
            for sec in sections(sig).iter() {
                let base = c * &sec.coef;
                // Group the surviving generators into (value, count) runs.
                let mut groups: Vec<(u32, u32)> = Vec::new();
                for &e in &sec.gens {
                    match groups.last_mut() {
                        Some((v, n)) if *v == e => *n += 1,
                        _ => groups.push((e, 1)),
                    }
                }
                // Mixed-radix counter over how many copies of each generator
                // contribute their t_m power.
                let mut pick = vec![0u32; groups.len()];
                loop {
                    let mut w = 0u32;
                    let mut sign_negative = false;
                    let mut choose = BigInt::one();
                    let mut kept: Vec<u32> = Vec::new();
                    for (idx, &(value, count)) in groups.iter().enumerate() {
                        let j = pick[idx];
                        w += value * j;
                        if j % 2 == 1 {
                            sign_negative = !sign_negative;
                        }
                        choose *= binomial(count, j);
                        kept.extend(std::iter::repeat_n(value, (count - j) as usize));
                    }
                    for i in 0..=sec.beta {
                        let c_exp = i + w;
                        let mut factor =
                            BigRational::from_integer(binomial(sec.beta, i) * &choose);
                        if sign_negative {
                            factor = -factor;
                        }
                        let mut gens = kept.clone();
                        if c_exp == 0 {
                            factor *= &k_int;
                        } else {
                            gens.push(c_exp);
                        }
                        gens.sort_unstable_by(|a, b| b.cmp(a));
                        let sig_new = Signature::new(gens, sec.beta - i);
                        let entry =
                            out.terms.entry(sig_new).or_insert_with(BigRational::zero);
                        *entry += &base * factor;
                    }
                    // Advance the counter; done when it wraps past the end.
                    let mut idx = 0;
                    while idx < groups.len() {
                        pick[idx] += 1;
                        if pick[idx] <= groups[idx].1 {
                            break;
                        }
                        pick[idx] = 0;
                        idx += 1;
                    }
                    if idx == groups.len() {
                        break;
                    }
                }
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Log of an L²-mass surrogate for one scaled term: the fully-split
    /// orbit's contribution to `∫(c·sig)²`, via Stirling in f64.  Only used
    /// to *rank* terms, so the surrogate need not be exact.
    fn term_log_mass(&self, sig: &Signature, c: &BigRational) -> f64 {
        let cf = c.to_f64().map(f64::abs).unwrap_or(0.0);
        if cf == 0.0 {
            return f64::NEG_INFINITY;
        }
        let k = self.k as f64;
        let beta2 = 2.0 * sig.boundary_power() as f64;
        let mut log_int = ln_gamma(beta2 + 1.0);
        let mut total = beta2;
        for &r in sig.exponents() {
            // each generator appears twice in the square; dominant orbit
            // puts every copy on its own coordinate
            log_int += 2.0 * (k.ln() + ln_gamma(r as f64 + 1.0));
            total += 2.0 * r as f64;
        }
        log_int -= ln_gamma(k + total + 1.0);
        cf.ln() + 0.5 * log_int
    }

    /// Removes every term involving a power sum `P_r` with `r` above the cap.
    /// Repeated compression pushes mass into ever-higher power sums whose
    /// integral contribution decays factorially; capping them keeps the
    /// integral table over a small alphabet of generator values.
    pub fn drop_generators_above(&mut self, r_cap: u32) {
        self.terms.retain(|sig, _| sig.exponents().iter().all(|&r| r <= r_cap));
    }

    /// Keeps only the `max_terms` terms of largest (surrogate) L² mass.
    pub fn truncate(&mut self, max_terms: usize) {
        if self.terms.len() <= max_terms {
            return;
        }
        let mut ranked: Vec<(f64, Signature)> = self
            .terms
            .iter()
            .map(|(s, c)| (self.term_log_mass(s, c), s.clone()))
            .collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        let keep: std::collections::BTreeSet<Signature> =
            ranked.into_iter().take(max_terms).map(|(_, s)| s).collect();
        self.terms.retain(|s, _| keep.contains(s));
    }

    /// Rescales by a power of two so the largest |coefficient| lies in
    /// [1/2, 1), then rounds every coefficient to the 2^-bits grid.  Keeps
    /// coefficient arithmetic cheap across repeated compressions; the result
    /// is still an exact rational function.
    pub fn round_normalize(&mut self, bits: u32) {
        let max = self
            .terms
            .values()
            .map(|c| c.to_f64().map(f64::abs).unwrap_or(0.0))
            .fold(0.0f64, f64::max);
        if max <= 0.0 {
            return;
        }
        let shift = -(max.log2().ceil() as i32);
        let scale = if shift >= 0 {
            BigRational::from_integer(BigInt::one() << shift as u32)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-shift) as u32)
        };
        let grid = BigInt::one() << bits;
        let grid_r = BigRational::from_integer(grid.clone());
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut rounded: std::collections::BTreeMap<Signature, BigRational> = Default::default();
        for (sig, c) in &self.terms {
            let scaled = c * &scale * &grid_r;
            // round half away from zero
            let q = if scaled >= BigRational::zero() {
                (scaled + &half).floor()
            } else {
                (scaled - &half).ceil()
            };
            let snapped = BigRational::new(q.to_integer(), grid.clone());
            if !snapped.is_zero() {
                rounded.insert(sig.clone(), snapped);
            }
        }
        self.terms = rounded;
    }

}

/// Exact `ΣJ` bilinear value for two generator-algebra polynomials.
pub fn j_bilinear(p: &GenPoly, q: &GenPoly) -> Result<BigRational> {
    if p.k() != q.k() || p.k() == 0 {
        return Err(Error::DimensionMismatch { expected: p.k() as usize, got: q.k() as usize });
    }
    let k = p.k();
    let secs_p: Vec<(std::sync::Arc<Vec<SectionTerm>>, &BigRational)> =
        p.terms.iter().map(|(s, c)| (sections(s), c)).collect();
    let secs_q: Vec<(std::sync::Arc<Vec<SectionTerm>>, &BigRational)> =
        q.terms.iter().map(|(s, c)| (sections(s), c)).collect();
    let mut acc = BigRational::zero();
    for (sa, ca) in &secs_p {
        for (sb, cb) in &secs_q {
            let mut pair = BigRational::zero();
            for a in sa.iter() {
                for b in sb.iter() {
                    let mut gens = a.gens.clone();
                    gens.extend_from_slice(&b.gens);
                    gens.sort_unstable_by(|x, y| y.cmp(x));
                    pair += &a.coef * &b.coef * family_integral(k - 1, a.beta + b.beta, &gens);
                }
            }
            acc += *ca * *cb * pair;
        }
    }
    Ok(acc * BigRational::from_integer(BigInt::from(k)))
}

/// Exact `I` (plain inner product) for two generator-algebra polynomials.
pub fn i_bilinear(p: &GenPoly, q: &GenPoly) -> Result<BigRational> {
    if p.k() != q.k() || p.k() == 0 {
        return Err(Error::DimensionMismatch { expected: p.k() as usize, got: q.k() as usize });
    }
    let k = p.k();
    let mut acc = BigRational::zero();
    for (sa, ca) in &p.terms {
        for (sb, cb) in &q.terms {
            let m = sa.merge(sb);
            acc += ca * cb * family_integral(k, m.boundary_power(), m.exponents());
        }
    }
    Ok(acc)
}

/// The assembled pencil: `m1` is the ΣJ form, `m2` the I form.
#[derive(Clone, Debug)]
pub struct FormPair {
    pub k: u32,
    pub basis: Vec<Signature>,
    pub description: String,
    pub m1: Vec<Vec<BigRational>>,
    pub m2: Vec<Vec<BigRational>>,
}

impl FormPair {
    /// Assembles both forms for an enumerated family basis.
    pub fn assemble_family(k: u32, family: BasisFamily, max_degree: u32) -> Result<FormPair> {
        let basis = enumerate_signatures(k, family, max_degree);
        Self::from_signatures(k, basis, format!("{}:deg<={max_degree}", family.tag()))
    }

    /// Assembles both forms for an explicit basis.
    pub fn from_signatures(k: u32, basis: Vec<Signature>, description: String) -> Result<FormPair> {
        let m1 = assemble_j_form(&basis, k)?;
        let m2 = assemble_i_form(&basis, k)?;
        Ok(FormPair { k, basis, description, m1, m2 })
    }

    /// Assembles both forms for arbitrary generator-algebra functions.
    pub fn from_functions(k: u32, funcs: &[GenPoly], description: String) -> Result<FormPair> {
        if funcs.is_empty() || funcs.iter().any(|f| f.k() != k) {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let n = funcs.len();
        let upper: Vec<Vec<(BigRational, BigRational)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (i..n)
                    .map(|j| {
                        let j_val = j_bilinear(&funcs[i], &funcs[j]).expect("matched dims");
                        let i_val = i_bilinear(&funcs[i], &funcs[j]).expect("matched dims");
                        (j_val, i_val)
                    })
                    .collect()
            })
            .collect();
        let mut m1 = vec![vec![BigRational::zero(); n]; n];
        let mut m2 = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let (jv, iv) = &upper[i][j - i];
                m1[i][j] = jv.clone();
                m1[j][i] = jv.clone();
                m2[i][j] = iv.clone();
                m2[j][i] = iv.clone();
            }
        }
        Ok(FormPair { k, basis: Vec::new(), description, m1, m2 })
    }

    pub fn dim(&self) -> usize {
        self.m1.len()
    }
}

/// Builds the warm-start function from a solved family basis: the span
/// optimum with coefficients snapped to a dyadic grid.
fn rounded_combination(basis: &[Signature], k: u32, f: &[f64], bits: u32) -> GenPoly {
    let mut out = GenPoly::zero(k);
    let grid = BigInt::one() << bits;
    for (sig, &v) in basis.iter().zip(f) {
        if !v.is_finite() {
            continue;
        }
        let q = BigInt::from((v * (1u64 << bits) as f64).round() as i64);
        if !q.is_zero() {
            out.terms.insert(sig.clone(), BigRational::new(q, grid.clone()));
        }
    }
    out
}

/// Largest generator value enrichment iterates may keep.  Compression can
/// only populate power sums up to total degree, and their integral weight
/// decays factorially in the generator value, so a fixed cap keeps the
/// integral table over a small alphabet without measurable loss.
const ENRICH_GENERATOR_CAP: u32 = 12;

/// Certificate search with operator-adapted enrichment.
///
/// Solves the family span, then grows a Krylov block from the span optimum
/// `G`: the iterates `H_j = (trim ∘ T)^j G` under the compression operator
/// `T`, each trimmed to `term_cap` dominant terms.  All iterates join the
/// basis — the span over early Krylov directions converges to the extremal
/// function far faster per added dimension than raising the family degree.
/// The exact images `T(H_j)` are kept untrimmed so that every `ΣJ` entry
/// against an iterate reduces to a plain inner product via self-adjointness,
/// `ΣJ(H_j, X) = ∫ (T H_j)·X`, bypassing the quadratic section-pair sums
/// that would otherwise dominate the run time.
pub fn solve_ratio_enriched(
    k: u32,
    family: BasisFamily,
    max_degree: u32,
    enrich: usize,
    term_cap: usize,
    tolerance: f64,
    target: Option<&BigRational>,
) -> Result<RatioCertificate> {
    let base = FormPair::assemble_family(k, family, max_degree)?;
    if enrich == 0 {
        return solve_ratio(&base, tolerance, target);
    }
    let warm = solve_ratio(&base, tolerance, None)?;
    let g0 = rounded_combination(&base.basis, k, &warm.f, 30);
    if g0.is_empty() {
        return Err(Error::DegenerateSampling("span optimum rounded to zero".into()));
    }

    // trimmed[j] = H_j (H_0 = G stays in the family span and is not added);
    // image[j] = T(H_j), exact.
    let mut trimmed: Vec<GenPoly> = vec![g0];
    let mut image: Vec<GenPoly> = Vec::with_capacity(enrich + 1);
    for j in 0..=enrich {
        let raw = trimmed[j].compress();
        image.push(raw.clone());
        if j < enrich {
            let mut next = raw;
            next.drop_generators_above(ENRICH_GENERATOR_CAP);
            next.round_normalize(30);
            next.truncate(term_cap);
            if next.is_empty() {
                return Err(Error::DegenerateSampling("enrichment iterate vanished".into()));
            }
            trimmed.push(next);
        }
    }

    let nb = base.dim();
    let singles: Vec<GenPoly> =
        base.basis.iter().map(|s| GenPoly::from_signature(k, s)).collect();
    // cross block against the family basis, parallel over the large side
    let cross: Vec<Vec<(BigRational, BigRational)>> = (0..nb)
        .into_par_iter()
        .map(|i| {
            (1..=enrich)
                .map(|j| {
                    let jv = i_bilinear(&image[j], &singles[i]).expect("matched dims");
                    let iv = i_bilinear(&trimmed[j], &singles[i]).expect("matched dims");
                    (jv, iv)
                })
                .collect()
        })
        .collect();
    // diagonal block over iterate pairs
    let pairs: Vec<(usize, usize)> =
        (1..=enrich).flat_map(|i| (i..=enrich).map(move |j| (i, j))).collect();
    let diag: Vec<(BigRational, BigRational)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let jv = i_bilinear(&image[i], &trimmed[j]).expect("matched dims");
            let iv = i_bilinear(&trimmed[i], &trimmed[j]).expect("matched dims");
            (jv, iv)
        })
        .collect();

    let n = nb + enrich;
    let mut m1 = vec![vec![BigRational::zero(); n]; n];
    let mut m2 = vec![vec![BigRational::zero(); n]; n];
    for i in 0..nb {
        for j in 0..nb {
            m1[i][j] = base.m1[i][j].clone();
            m2[i][j] = base.m2[i][j].clone();
        }
        for j in 0..enrich {
            let (jv, iv) = &cross[i][j];
            m1[i][nb + j] = jv.clone();
            m1[nb + j][i] = jv.clone();
            m2[i][nb + j] = iv.clone();
            m2[nb + j][i] = iv.clone();
        }
    }
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        let (jv, iv) = &diag[idx];
        m1[nb + i - 1][nb + j - 1] = jv.clone();
        m1[nb + j - 1][nb + i - 1] = jv.clone();
        m2[nb + i - 1][nb + j - 1] = iv.clone();
        m2[nb + j - 1][nb + i - 1] = iv.clone();
    }
    let forms = FormPair {
        k,
        basis: base.basis.clone(),
        description: format!("{}:deg<={max_degree}+krylov{enrich}", family.tag()),
        m1,
        m2,
    };
    solve_ratio(&forms, tolerance, target)
}

/// Scales two rational matrices by their common denominator lcm, giving
/// integer matrices with an unchanged generalized spectrum.
fn clear_denominators(
    m1: &[Vec<BigRational>],
    m2: &[Vec<BigRational>],
) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let mut lcm = BigInt::one();
    for m in [m1, m2] {
        for row in m {
            for e in row {
                lcm = num_integer::lcm(lcm, e.denom().clone());
            }
        }
    }
    let scale = |m: &[Vec<BigRational>]| {
        m.iter()
            .map(|row| row.iter().map(|e| e.numer() * (&lcm / e.denom())).collect())
            .collect()
    };
    (scale(m1), scale(m2))
}

// ---- certificates ----------------------------------------------------------

/// Checkable outcome of one eigenvalue run.  `exact_rayleigh` is the
/// rational Rayleigh quotient of the rationalized coefficient vector —
/// a lower bound on the true largest eigenvalue independent of any
/// floating-point step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioCertificate {
    pub k: u32,
    pub basis: String,
    pub basis_len: usize,
    pub lambda_max: f64,
    /// eigenvalue estimate to 60 decimal places (decimal-string form)
    pub lambda_decimal: String,
    pub f: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub target: Option<f64>,
    /// exact-arithmetic verdict of `exact_rayleigh > target`
    pub exceeds_target: bool,
    pub exact_rayleigh: String,
    /// exact_rayleigh ≥ lambda_max − 1e−9 (the certificate invariant)
    pub exact_check_passed: bool,
}

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

fn rationalize_to_integers(f: &[f64]) -> Vec<BigInt> {
    // Every finite f64 is n/2^e exactly; put all on the common scale 2^L.
    let parts: Vec<(BigInt, u64)> = f
        .iter()
        .map(|&v| {
            let r = BigRational::from_float(v).unwrap_or_else(BigRational::zero);
            (r.numer().clone(), r.denom().bits() - 1)
        })
        .collect();
    let l = parts.iter().map(|&(_, e)| e).max().unwrap_or(0);
    parts.into_iter().map(|(n, e)| n << (l - e)).collect()
}

fn quad_form(m: &[Vec<BigInt>], g: &[BigInt]) -> BigInt {
    let mut acc = BigInt::zero();
    for (row, gi) in m.iter().zip(g) {
        if gi.is_zero() {
            continue;
        }
        let mut s = BigInt::zero();
        for (e, gj) in row.iter().zip(g) {
            if !gj.is_zero() {
                s += e * gj;
            }
        }
        acc += gi * s;
    }
    acc
}

/// Largest generalized eigenvalue of the pair with residual ≤ `tolerance`,
/// plus the exact-arithmetic re-verification.  `target` (when given) is
/// compared against the exact Rayleigh quotient, strictly.
pub fn solve_ratio(
    forms: &FormPair,
    tolerance: f64,
    target: Option<&BigRational>,
) -> Result<RatioCertificate> {
    let (a, b) = clear_denominators(&forms.m1, &forms.m2);
    let sol = largest_generalized_eigen(&a, &b, tolerance, 12)?;
    let f: Vec<f64> = sol.vector.iter().map(|v| v.to_f64()).collect();
    let g = rationalize_to_integers(&f);
    if g.iter().all(|x| x.is_zero()) {
        return Err(Error::NonConvergence { iterations: sol.iterations, residual: f64::NAN });
    }
    let qa = quad_form(&a, &g);
    let qb = quad_form(&b, &g);
    let exact = BigRational::new(qa, qb);
    let lambda_max = sol.lambda.to_f64();
    let lambda_rat = BigRational::from_float(lambda_max).unwrap_or_else(BigRational::zero);
    let margin = BigRational::new(BigInt::one(), BigInt::from(1_000_000_000u64));
    let exact_check_passed = exact >= &lambda_rat - &margin;
    let exceeds_target = target.map(|t| &exact > t).unwrap_or(false);
    Ok(RatioCertificate {
        k: forms.k,
        basis: forms.description.clone(),
        basis_len: forms.dim(),
        lambda_max,
        lambda_decimal: sol.lambda.to_decimal(60),
        f,
        residual: sol.residual.to_f64(),
        iterations: sol.iterations,
        target: target.map(|t| t.to_f64().unwrap_or(f64::NAN)),
        exceeds_target,
        exact_rayleigh: Df::from_rational(&exact).to_decimal(40),
        exact_check_passed,
    })
}

/// `2k(2ℓ+1) / ((ℓ+1)(k+2ℓ+1))` — the exact ratio of the singleton basis
/// `{(1−P₁)^ℓ}`, used as an oracle for the full solver.
pub fn closed_form_ratio(k: u32, ell: u32) -> BigRational {
    BigRational::new(
        BigInt::from(2u64 * k as u64 * (2 * ell as u64 + 1)),
        BigInt::from((ell as u64 + 1) * (k as u64 + 2 * ell as u64 + 1)),
    )
}

// ---- expectation bookkeeping -----------------------------------------------

/// Level-of-distribution bookkeeping: the sieve sets `R = X^{θ/2−ε}` and the
/// guaranteed prime count comes from the ε→0 limit of `ratio·θ/2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpectationParams {
    pub theta: BigRational,
    pub ratio: BigRational,
    /// tuple length the expectation refers to (bookkeeping only)
    pub k: u32,
}

/// Returns `(expectation_limit, m)` with `expectation_limit = ratio·θ/2` and
/// `m` the largest integer with `expectation_limit > m − 1` (at least 1).
///
/// Strictness matters: the limit is approached from below as ε→0, so `m ≥ 2`
/// requires the strict inequality — an expectation of exactly 1 guarantees
/// only the trivial single prime.
pub fn guaranteed_primes(params: &ExpectationParams) -> Result<(BigRational, u32)> {
    let one = BigRational::one();
    if params.theta <= BigRational::zero() || params.theta > one {
        return Err(Error::InvalidParam(format!(
            "level of distribution must lie in (0,1], got {}",
            params.theta
        )));
    }
    if params.ratio < BigRational::zero() {
        return Err(Error::InvalidParam("ratio must be nonnegative".into()));
    }
    let expectation = &params.ratio * &params.theta / BigRational::from_integer(BigInt::from(2));
    let m = if expectation <= BigRational::one() {
        1u32
    } else if expectation.is_integer() {
        expectation
            .to_integer()
            .to_u32()
            .ok_or_else(|| Error::InvalidParam("expectation out of range".into()))?
    } else {
        expectation
            .ceil()
            .to_integer()
            .to_u32()
            .ok_or_else(|| Error::InvalidParam("expectation out of range".into()))?
    };
    Ok((expectation, m))
}

// ---- smallest certified k --------------------------------------------------

/// A k that failed to certify, with the best eigenvalue seen for it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RejectedK {
    pub k: u32,
    pub best_lambda: f64,
    pub max_degree_tried: u32,
}

/// Outcome of a scan for the smallest certified dimension.  A rejection is a
/// lower-bound failure at the scanned degrees, not a proof of impossibility.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinKReport {
    pub target: String,
    pub family: BasisFamily,
    pub degree_schedule: Vec<u32>,
    /// How the range was explored: "linear-scan" probes every k in order;
    /// "monotone-bracket" binary-searches assuming certification is monotone
    /// in k (each probe is still a genuine certificate or rejection).
    pub search: String,
    pub certified: Option<(u32, RatioCertificate)>,
    pub rejected: Vec<RejectedK>,
}

/// Scans `k ∈ [k_lo, k_hi]` in order, trying the nested degree schedule at
/// each k and stopping at the first exact-verified certificate.
pub fn scan_k_range(
    target: &BigRational,
    family: BasisFamily,
    degree_schedule: &[u32],
    k_lo: u32,
    k_hi: u32,
    tolerance: f64,
) -> Result<MinKReport> {
    if k_lo == 0 || k_lo > k_hi {
        return Err(Error::InvalidParam(format!("bad k range [{k_lo}, {k_hi}]")));
    }
    if degree_schedule.is_empty() || degree_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam(
            "degree schedule must be nonempty and strictly increasing".into(),
        ));
    }
    let mut report = MinKReport {
        target: Df::from_rational(target).to_decimal(20),
        family,
        degree_schedule: degree_schedule.to_vec(),
        search: "linear-scan".into(),
        certified: None,
        rejected: Vec::new(),
    };
    for k in k_lo..=k_hi {
        let mut best = f64::MIN;
        let mut tried = 0u32;
        for &deg in degree_schedule {
            let forms = FormPair::assemble_family(k, family, deg)?;
            let cert = solve_ratio(&forms, tolerance, Some(target))?;
            tried = deg;
            best = best.max(cert.lambda_max);
            if cert.exceeds_target && cert.exact_check_passed {
                report.certified = Some((k, cert));
                return Ok(report);
            }
        }
        report.rejected.push(RejectedK { k, best_lambda: best, max_degree_tried: tried });
    }
    Ok(report)
}

/// Like [`scan_k_range`] but an exhausted range is an error.
pub fn min_k_certify(
    target: &BigRational,
    family: BasisFamily,
    degree_schedule: &[u32],
    k_lo: u32,
    k_hi: u32,
    tolerance: f64,
) -> Result<MinKReport> {
    let report = scan_k_range(target, family, degree_schedule, k_lo, k_hi, tolerance)?;
    if report.certified.is_none() {
        return Err(Error::SearchExhausted { lo: k_lo, hi: k_hi });
    }
    Ok(report)
}

/// Bracketed variant of [`min_k_certify`] for wide ranges: binary-searches
/// the smallest certifying `k` under the assumption that certification is
/// monotone in `k` (the attainable ratio grows with the dimension, so once a
/// family certifies it keeps certifying).  Every probe is a full
/// assemble-solve-verify cycle, and the probe just below the returned `k` is
/// always checked to fail, so the report's certificate is unconditional even
/// though its *minimality* is relative to the monotonicity assumption and the
/// degree schedule.
pub fn min_k_certify_bracketed(
    target: &BigRational,
    family: BasisFamily,
    degree_schedule: &[u32],
    k_lo: u32,
    k_hi: u32,
    tolerance: f64,
) -> Result<MinKReport> {
    if k_lo == 0 || k_lo > k_hi {
        return Err(Error::InvalidParam(format!("bad k range [{k_lo}, {k_hi}]")));
    }
    if degree_schedule.is_empty() || degree_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam(
            "degree schedule must be nonempty and strictly increasing".into(),
        ));
    }
    let mut report = MinKReport {
        target: Df::from_rational(target).to_decimal(20),
        family,
        degree_schedule: degree_schedule.to_vec(),
        search: "monotone-bracket".into(),
        certified: None,
        rejected: Vec::new(),
    };
    // One probe = try the schedule at k, returning the certificate or the
    // best rejected value.
    let probe = |k: u32,
                 report: &mut MinKReport|
     -> Result<Option<RatioCertificate>> {
        let mut best = f64::MIN;
        let mut tried = 0u32;
        for &deg in degree_schedule {
            let forms = FormPair::assemble_family(k, family, deg)?;
            let cert = solve_ratio(&forms, tolerance, Some(target))?;
            tried = deg;
            best = best.max(cert.lambda_max);
            if cert.exceeds_target && cert.exact_check_passed {
                return Ok(Some(cert));
            }
        }
        report.rejected.push(RejectedK { k, best_lambda: best, max_degree_tried: tried });
        Ok(None)
    };
    let Some(mut best_cert) = probe(k_hi, &mut report)? else {
        return Err(Error::SearchExhausted { lo: k_lo, hi: k_hi });
    };
    let mut best_k = k_hi;
    let (mut lo, mut hi) = (k_lo, k_hi); // invariant: hi certifies, [k_lo, lo) unknown-failing
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match probe(mid, &mut report)? {
            Some(cert) => {
                best_k = mid;
                best_cert = cert;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    // Confirm the neighbour below genuinely fails (unless at the range edge
    // or already probed during bisection).
    if best_k > k_lo && !report.rejected.iter().any(|r| r.k == best_k - 1) {
        if probe(best_k - 1, &mut report)?.is_some() {
            // Monotonicity violated at the boundary; fall back to an honest
            // linear scan of the narrowed range.
            return min_k_certify(target, family, degree_schedule, k_lo, best_k, tolerance);
        }
    }
    report.rejected.sort_by_key(|r| r.k);
    report.certified = Some((best_k, best_cert));
    Ok(report)
}

// ---- empirical weight probe ------------------------------------------------

/// Empirical statistics of the divisor-sum weight built from `F̃` on a small
/// shifted tuple, over `n ∈ [X, 2X)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightStats {
    pub windows: u64,
    pub raw_weight_sum: f64,
    pub mean_weight: f64,
    pub min_weight: f64,
    /// Σ_n w(n) · #{i : n+h_i prime}
    pub weighted_prime_hits: f64,
    /// weighted_prime_hits / raw_weight_sum
    pub expected_prime_hits: f64,
}

/// Brute-force evaluation of `w(n) = (Σ_{d_i | n+h_i, Πd_i < R} Πμ(d_i) ·
/// F̃(log d₁/log R, …))²`; sign/trend grade only, no tight numeric contract.
pub fn empirical_weight_expectation(
    shifts: &[u64],
    r: f64,
    x: u64,
    f_tilde: &SymPoly,
) -> Result<WeightStats> {
    let k = shifts.len();
    if k == 0 || k > 4 {
        return Err(Error::InvalidParam(format!(
            "weight probe supports 1 ≤ k ≤ 4 shifts, got {k}"
        )));
    }
    if f_tilde.k() as usize != k {
        return Err(Error::DimensionMismatch { expected: k, got: f_tilde.k() as usize });
    }
    if shifts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam("shifts must be strictly increasing".into()));
    }
    if !(r > 1.0) || r * r >= x as f64 {
        return Err(Error::InvalidParam(format!("need 1 < R and R² < X, got R={r}, X={x}")));
    }
    let hi = 2 * x + shifts[shifts.len() - 1] + 2;
    if hi > 20_000_000 {
        return Err(Error::BudgetExhausted(format!(
            "divisor enumeration scans up to {hi} > 2e7"
        )));
    }
    let tables = least_factor_tables(hi as usize)?;
    let mut is_prime = vec![false; hi as usize];
    for p in sieve_range(2, hi)? {
        is_prime[p as usize] = true;
    }
    let log_r = r.ln();

    // Squarefree divisors below R of each shifted value, with their log-scaled
    // simplex coordinates; recursion multiplies the Möbius signs.
    let mut raw = 0.0f64;
    let mut min_w = f64::MAX;
    let mut hits = 0.0f64;
    let mut windows = 0u64;
    let mut coords = vec![0.0f64; k];
    for n in x..2 * x {
        let divisor_lists: Vec<Vec<u64>> = (0..k)
            .map(|i| {
                tables
                    .squarefree_divisors(n + shifts[i])
                    .into_iter()
                    .filter(|&d| (d as f64) < r)
                    .collect()
            })
            .collect();
        fn rec(
            lists: &[Vec<u64>],
            level: usize,
            product: f64,
            sign: f64,
            r: f64,
            log_r: f64,
            coords: &mut [f64],
            tables: &crate::primes::FactorTables,
            f_tilde: &SymPoly,
        ) -> f64 {
            if level == lists.len() {
                return sign * f_tilde.evaluate(coords);
            }
            let mut acc = 0.0;
            for &d in &lists[level] {
                let next = product * d as f64;
                if next >= r {
                    continue;
                }
                coords[level] = (d as f64).ln() / log_r;
                let mu = tables.mobius[d as usize] as f64;
                acc += rec(lists, level + 1, next, sign * mu, r, log_r, coords, tables, f_tilde);
            }
            acc
        }
        let s = rec(&divisor_lists, 0, 1.0, 1.0, r, log_r, &mut coords, &tables, f_tilde);
        let w = s * s;
        raw += w;
        min_w = min_w.min(w);
        let np = shifts.iter().filter(|&&h| is_prime[(n + h) as usize]).count();
        hits += w * np as f64;
        windows += 1;
    }
    if raw <= 0.0 {
        return Err(Error::DegenerateSampling(
            "all weights vanished on the sampled range".into(),
        ));
    }
    Ok(WeightStats {
        windows,
        raw_weight_sum: raw,
        mean_weight: raw / windows as f64,
        min_weight: min_w,
        weighted_prime_hits: hits,
        expected_prime_hits: hits / raw,
    })
}

// ---- tests -----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::expand_signature;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn sig(exps: &[u32], beta: u32) -> Signature {
        Signature::new(exps.to_vec(), beta)
    }

    // ---- I form -------------------------------------------------------------

    #[test]
    fn i_form_constant_basis() {
        let m = assemble_i_form(&[sig(&[], 0)], 2).unwrap();
        assert_eq!(m, vec![vec![rat(1, 2)]]);
    }

    #[test]
    fn i_form_two_elements() {
        let m = assemble_i_form(&[sig(&[], 0), sig(&[], 1)], 2).unwrap();
        assert_eq!(m[0], vec![rat(1, 2), rat(1, 6)]);
        assert_eq!(m[1], vec![rat(1, 6), rat(1, 12)]);
    }

    #[test]
    fn i_form_boundary_singletons() {
        for (k, ell) in [(2u32, 1u32), (5, 3), (54, 11)] {
            let m = assemble_i_form(&[sig(&[], ell)], k).unwrap();
            let expect = BigRational::new(factorial(2 * ell), factorial(k + 2 * ell));
            assert_eq!(m[0][0], expect);
        }
    }

    #[test]
    fn i_form_matches_general_integrator() {
        // Cross-check a generator-product entry against expand + integrate.
        let basis = [sig(&[2], 1), sig(&[2, 2], 0)];
        let m = assemble_i_form(&basis, 3).unwrap();
        let prod = basis[0].merge(&basis[1]);
        let p = expand_signature(3, &prod);
        assert_eq!(m[0][1], crate::simplex::integrate_sympoly(&p));
        assert_eq!(m[0][1], m[1][0]);
    }

    // ---- J form -------------------------------------------------------------

    #[test]
    fn j_form_constant_basis_two_vars() {
        let m = assemble_j_form(&[sig(&[], 0)], 2).unwrap();
        assert_eq!(m, vec![vec![rat(2, 3)]]);
    }

    #[test]
    fn j_form_constant_basis_one_var() {
        let m = assemble_j_form(&[sig(&[], 0)], 1).unwrap();
        assert_eq!(m, vec![vec![rat(1, 1)]]);
    }

    #[test]
    fn j_form_boundary_singletons() {
        for (k, ell) in [(2u32, 0u32), (2, 1), (7, 3), (54, 11)] {
            let m = assemble_j_form(&[sig(&[], ell)], k).unwrap();
            let expect = BigRational::new(
                BigInt::from(k) * factorial(2 * ell + 2),
                BigInt::from((ell as u64 + 1) * (ell as u64 + 1)) * factorial(k + 2 * ell + 1),
            );
            assert_eq!(m[0][0], expect, "k={k}, ell={ell}");
        }
    }

    #[test]
    fn j_form_p2_singleton_direct_integration_oracle() {
        // Hand-integrated: ΣJ on {P₂} at k=2 is 2·∫₀¹(t²(1−t)+(1−t)³/3)² dt
        // = 2·(1/105 + 2/315 + 1/63) = 4/63.
        let m = assemble_j_form(&[sig(&[2], 0)], 2).unwrap();
        assert_eq!(m[0][0], rat(4, 63));
    }

    #[test]
    fn j_form_asymmetric_path_oracle_k3() {
        // Independent evaluation of J_ℓ: expand both elements to concrete
        // monomials, integrate t₁ out against each pair, then use the
        // 2-simplex closed form.  By basis symmetry ΣJ = 3·J₁.
        let basis = [sig(&[], 0), sig(&[], 1), sig(&[2], 0), sig(&[], 2)];
        let m = assemble_j_form(&basis, 3).unwrap();
        for a in 0..basis.len() {
            for b in 0..basis.len() {
                let direct = j1_by_concrete_monomials(3, &basis[a], &basis[b]);
                assert_eq!(m[a][b], rat(3, 1) * direct, "entry ({a},{b})");
            }
        }
    }

    #[test]
    fn j_form_higher_power_sums_concrete_oracle() {
        // Same independent path for bases with value-3 and value-4 power
        // sums, whose sectioning walks very different code than P₂ alone.
        let k3 = [sig(&[3], 0), sig(&[3], 1), sig(&[3, 2], 0), sig(&[2, 2], 1)];
        let m = assemble_j_form(&k3, 3).unwrap();
        for a in 0..k3.len() {
            for b in 0..k3.len() {
                let direct = j1_by_concrete_monomials(3, &k3[a], &k3[b]);
                assert_eq!(m[a][b], rat(3, 1) * direct, "k=3 entry ({a},{b})");
            }
        }
        let k4 = [sig(&[4], 0), sig(&[3], 1), sig(&[4, 2], 0), sig(&[3, 3], 0)];
        let m = assemble_j_form(&k4, 4).unwrap();
        for a in 0..k4.len() {
            for b in 0..k4.len() {
                let direct = j1_by_concrete_monomials(4, &k4[a], &k4[b]);
                assert_eq!(m[a][b], rat(4, 1) * direct, "k=4 entry ({a},{b})");
            }
        }
    }

    /// Concrete (non-orbit) monomials of a basis element in k variables.
    fn concrete_monomials(k: u32, s: &Signature) -> Vec<(Vec<u32>, BigRational)> {
        let p = expand_signature(k, s);
        let e = crate::simplex::expand_to_monomials(&p);
        let mut out = Vec::new();
        for t in &e.terms {
            let mut padded = vec![0u32; k as usize];
            for (i, &v) in t.exponents.iter().enumerate() {
                padded[i] = v;
            }
            // All distinct permutations of the padded exponent vector,
            // starting from the sorted arrangement.
            let mut work = padded;
            work.sort_unstable();
            let n = work.len();
            let mut perms = vec![work.clone()];
            loop {
                // next_permutation on work
                let mut i = n - 1;
                while i > 0 && work[i - 1] >= work[i] {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                let mut j = n - 1;
                while work[j] <= work[i - 1] {
                    j -= 1;
                }
                work.swap(i - 1, j);
                work[i..].reverse();
                perms.push(work.clone());
            }
            perms.sort_unstable();
            perms.dedup();
            for p in perms {
                out.push((p, t.coefficient.clone()));
            }
        }
        out
    }

    /// J₁(f, g) by integrating t₁ out of every concrete monomial pair.
    fn j1_by_concrete_monomials(k: u32, a: &Signature, b: &Signature) -> BigRational {
        let ma = concrete_monomials(k, a);
        let mb = concrete_monomials(k, b);
        let mut acc = BigRational::zero();
        for (ea, ca) in &ma {
            for (eb, cb) in &mb {
                // ∫₀^v t₁^a dt₁ = v^{a+1}/(a+1) with v = 1 − Σ_{i≥2} t_i, so
                // the pair contributes ∫ v^{a1+b1+2} Π_{i≥2} t_i^{a_i+b_i} /
                // ((a1+1)(b1+1)) over the (k−1)-simplex.
                let rest: Vec<u32> =
                    (1..k as usize).map(|i| ea[i] + eb[i]).collect();
                let i = crate::simplex::monomial_simplex_integral(
                    &rest,
                    k - 1,
                    ea[0] + eb[0] + 2,
                )
                .unwrap();
                let denom = BigRational::from_integer(BigInt::from(
                    (ea[0] + 1) as u64 * (eb[0] + 1) as u64,
                ));
                acc += ca * cb * i / denom;
            }
        }
        acc
    }

    // ---- compression operator ------------------------------------------------

    #[test]
    fn compress_constant_two_vars() {
        // T(1) at k=2 is 2(1−P₁) + P₁ (hand expansion of Σ_m (1−P₁+t_m)).
        let t1 = GenPoly::from_signature(2, &sig(&[], 0)).compress();
        let mut expect = GenPoly::zero(2);
        expect.terms.insert(sig(&[], 1), rat(2, 1));
        expect.terms.insert(sig(&[1], 0), rat(1, 1));
        assert_eq!(t1, expect);
        assert_eq!(t1.integral(), rat(2, 3));
    }

    #[test]
    fn compress_is_the_adjoint_of_j() {
        // ΣJ(p, q) = ∫ (T p)·q = ∫ p·(T q), exactly, for assorted functions.
        let mut p = GenPoly::from_signature(3, &sig(&[2], 1));
        p.add_scaled(&GenPoly::from_signature(3, &sig(&[3], 0)), &rat(-2, 5));
        let mut q = GenPoly::from_signature(3, &sig(&[2, 2], 0));
        q.add_scaled(&GenPoly::from_signature(3, &sig(&[], 3)), &rat(7, 3));
        let j_pq = j_bilinear(&p, &q).unwrap();
        assert_eq!(j_pq, j_bilinear(&q, &p).unwrap());
        assert_eq!(j_pq, i_bilinear(&p.compress(), &q).unwrap());
        assert_eq!(j_pq, i_bilinear(&p, &q.compress()).unwrap());
    }

    #[test]
    fn bilinear_forms_match_matrix_assembly() {
        let basis = [sig(&[], 0), sig(&[], 2), sig(&[2], 0), sig(&[3, 2], 1)];
        let m1 = assemble_j_form(&basis, 4).unwrap();
        let m2 = assemble_i_form(&basis, 4).unwrap();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let pa = GenPoly::from_signature(4, a);
                let pb = GenPoly::from_signature(4, b);
                assert_eq!(j_bilinear(&pa, &pb).unwrap(), m1[i][j]);
                assert_eq!(i_bilinear(&pa, &pb).unwrap(), m2[i][j]);
            }
        }
    }

    #[test]
    fn round_normalize_snaps_to_dyadic_grid() {
        let mut p = GenPoly::from_signature(2, &sig(&[], 0));
        p.add_scaled(&GenPoly::from_signature(2, &sig(&[], 1)), &rat(22, 7));
        p.round_normalize(10);
        for (_, c) in p.terms() {
            assert!((c * rat(1 << 10, 1)).is_integer());
            assert!(c.to_f64().unwrap().abs() < 1.0);
        }
        let max = p
            .terms()
            .map(|(_, c)| c.to_f64().unwrap().abs())
            .fold(0.0f64, f64::max);
        assert!((0.5..1.0).contains(&max));
    }

    #[test]
    fn truncate_keeps_heaviest_terms() {
        let mut p = GenPoly::from_signature(3, &sig(&[], 0));
        p.add_scaled(&GenPoly::from_signature(3, &sig(&[], 1)), &rat(1, 1000));
        p.add_scaled(&GenPoly::from_signature(3, &sig(&[2], 0)), &rat(1, 2));
        p.truncate(2);
        assert_eq!(p.len(), 2);
        assert!(p.terms().all(|(s, _)| *s != sig(&[], 1)));
    }

    #[test]
    fn enrichment_beats_its_family_span() {
        let plain = solve_ratio(
            &FormPair::assemble_family(6, BasisFamily::OneMinusP1P2, 4).unwrap(),
            1e-10,
            None,
        )
        .unwrap();
        let enriched =
            solve_ratio_enriched(6, BasisFamily::OneMinusP1P2, 4, 4, 200, 1e-10, None).unwrap();
        assert!(enriched.exact_check_passed);
        assert!(
            enriched.lambda_max > plain.lambda_max + 1e-4,
            "enrichment must escape the family span: {} vs {}",
            enriched.lambda_max,
            plain.lambda_max
        );
    }

    // ---- solve + oracle ------------------------------------------------------

    #[test]
    fn constant_basis_ratio_is_gpy_leading_term() {
        let forms = FormPair::assemble_family(2, BasisFamily::OneMinusP1P2, 0).unwrap();
        let cert = solve_ratio(&forms, 1e-10, Some(&rat(2, 1))).unwrap();
        assert!((cert.lambda_max - 4.0 / 3.0).abs() < 1e-13);
        assert!(!cert.exceeds_target);
        assert!(cert.exact_check_passed);
        // Singleton basis ⇒ the exact Rayleigh equals the closed form exactly.
        let g = rationalize_to_integers(&cert.f);
        let (a, b) = clear_denominators(&forms.m1, &forms.m2);
        let exact = BigRational::new(quad_form(&a, &g), quad_form(&b, &g));
        assert_eq!(exact, closed_form_ratio(2, 0));
    }

    #[test]
    fn singleton_oracle_spot_grid() {
        for (k, ell) in [(2u32, 0u32), (2, 3), (7, 1), (50, 10), (100, 5)] {
            let forms = FormPair::from_signatures(
                k,
                vec![sig(&[], ell)],
                format!("singleton:(1-P1)^{ell}"),
            )
            .unwrap();
            let cert = solve_ratio(&forms, 1e-10, None).unwrap();
            let oracle = closed_form_ratio(k, ell).to_f64().unwrap();
            let rel = (cert.lambda_max - oracle).abs() / oracle;
            assert!(rel <= 1e-12, "k={k} ell={ell}: {} vs {oracle}", cert.lambda_max);
        }
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(closed_form_ratio(2, 0), rat(4, 3));
        assert_eq!(closed_form_ratio(4, 1), rat(12, 7));
        for k in [3u32, 10, 54] {
            assert_eq!(
                closed_form_ratio(k, 0),
                rat(2, 1) - rat(2, k as i64 + 1),
                "ℓ=0 row is 2 − 2/(k+1)"
            );
        }
        let big = closed_form_ratio(10_000, 100).to_f64().unwrap();
        assert!(big > 3.9 && big < 4.0);
    }

    #[test]
    fn nested_basis_monotonicity_small() {
        let mut last = 0.0f64;
        for deg in [0u32, 2, 4, 6, 8] {
            let forms = FormPair::assemble_family(6, BasisFamily::OneMinusP1P2, deg).unwrap();
            let cert = solve_ratio(&forms, 1e-10, None).unwrap();
            assert!(
                cert.lambda_max >= last - 1e-12,
                "λ must not decrease as the basis grows"
            );
            last = cert.lambda_max;
        }
    }

    #[test]
    fn power_sum_family_agrees_at_low_degree() {
        // Both families span all symmetric polynomials of degree ≤ 2 on the
        // simplex... not identically, but the optimum over degree-2 spans
        // must agree because each family's span contains the other's.
        let a = FormPair::assemble_family(5, BasisFamily::OneMinusP1P2, 2).unwrap();
        let b = FormPair::assemble_family(5, BasisFamily::PowerSums, 2).unwrap();
        let ca = solve_ratio(&a, 1e-10, None).unwrap();
        let cb = solve_ratio(&b, 1e-10, None).unwrap();
        assert!((ca.lambda_max - cb.lambda_max).abs() < 1e-11);
    }

    // ---- expectation ---------------------------------------------------------

    #[test]
    fn guaranteed_primes_examples() {
        let gp = |ratio: BigRational, theta: BigRational| {
            guaranteed_primes(&ExpectationParams { theta, ratio, k: 0 }).unwrap()
        };
        let (e, m) = gp(rat(4002, 1000), rat(1, 2));
        assert_eq!(e, rat(2001, 2000));
        assert_eq!(m, 2);
        let (e, m) = gp(rat(21, 10), rat(1, 1));
        assert_eq!(e, rat(21, 20));
        assert_eq!(m, 2);
        let (e, m) = gp(rat(1, 1), rat(1, 2));
        assert_eq!(e, rat(1, 4));
        assert_eq!(m, 1);
        // Integer expectation: strictness gives exactly E, not E+1.
        let (e, m) = gp(rat(4, 1), rat(1, 1));
        assert_eq!(e, rat(2, 1));
        assert_eq!(m, 2);
        let (_, m) = gp(rat(2, 1), rat(1, 1));
        assert_eq!(m, 1);
    }

    #[test]
    fn guaranteed_primes_rejects_bad_theta() {
        for theta in [rat(0, 1), rat(-1, 2), rat(3, 2)] {
            let p = ExpectationParams { theta, ratio: rat(4, 1), k: 0 };
            assert!(guaranteed_primes(&p).is_err());
        }
    }

    // ---- min-k scan ----------------------------------------------------------

    #[test]
    fn min_k_certifies_immediately_on_reachable_target() {
        // Target slightly below the constant-basis value at k=6.
        let target = closed_form_ratio(6, 0) * rat(999_999_999, 1_000_000_000);
        let report = min_k_certify(&target, BasisFamily::OneMinusP1P2, &[0], 6, 8, 1e-10).unwrap();
        let (k, cert) = report.certified.unwrap();
        assert_eq!(k, 6);
        assert!(cert.exceeds_target);
        assert!(report.rejected.is_empty());
    }

    #[test]
    fn scan_records_rejections() {
        // Constant basis never reaches 2: the whole range is rejected.
        let report =
            scan_k_range(&rat(2, 1), BasisFamily::OneMinusP1P2, &[0], 2, 4, 1e-10).unwrap();
        assert!(report.certified.is_none());
        assert_eq!(report.rejected.len(), 3);
        for r in &report.rejected {
            assert!(r.best_lambda < 2.0);
        }
        assert!(matches!(
            min_k_certify(&rat(2, 1), BasisFamily::OneMinusP1P2, &[0], 2, 4, 1e-10),
            Err(Error::SearchExhausted { lo: 2, hi: 4 })
        ));
    }

    #[test]
    fn bracketed_search_agrees_with_linear_scan() {
        // Constant basis reaches 1.5 first at k=4 (2 − 2/(k+1) > 3/2).
        let target = rat(3, 2);
        let linear =
            min_k_certify(&target, BasisFamily::OneMinusP1P2, &[0], 2, 10, 1e-10).unwrap();
        let bracketed =
            min_k_certify_bracketed(&target, BasisFamily::OneMinusP1P2, &[0], 2, 10, 1e-10)
                .unwrap();
        assert_eq!(linear.certified.as_ref().unwrap().0, 4);
        assert_eq!(bracketed.certified.as_ref().unwrap().0, 4);
        assert_eq!(linear.search, "linear-scan");
        assert_eq!(bracketed.search, "monotone-bracket");
        // the boundary below the answer is verified rejected
        assert!(bracketed.rejected.iter().any(|r| r.k == 3));
    }

    #[test]
    fn frozen_certificate_at_one_hundred_five() {
        // Frozen from an exact rational-arithmetic run of this implementation:
        // the (1−P₁)^a P₂^b basis capped at degree 11 clears ratio 4 at k=105.
        let forms = FormPair::assemble_family(105, BasisFamily::OneMinusP1P2, 11).unwrap();
        assert_eq!(forms.dim(), 42);
        let cert = solve_ratio(&forms, 1e-10, Some(&rat(4, 1))).unwrap();
        assert!(cert.exceeds_target && cert.exact_check_passed);
        assert!(
            cert.exact_rayleigh.starts_with("4.0020697619380471"),
            "exact value drifted: {}",
            cert.exact_rayleigh
        );
        assert!((cert.lambda_max - 4.002069761938047).abs() < 1e-9);
    }

    #[test]
    fn frozen_value_at_fifty_four_mid_degree() {
        // Same frozen-run discipline at k=54, degree cap 14: the value sits
        // well below 4 and pins the saturation plateau of this family.
        let forms = FormPair::assemble_family(54, BasisFamily::OneMinusP1P2, 14).unwrap();
        assert_eq!(forms.dim(), 64);
        let cert = solve_ratio(&forms, 1e-10, None).unwrap();
        assert!(
            cert.exact_rayleigh.starts_with("3.7011714645100231"),
            "exact value drifted: {}",
            cert.exact_rayleigh
        );
    }

    // ---- weight probe --------------------------------------------------------

    #[test]
    fn degenerate_weight_is_prime_density() {
        // k=1, F̃=1, R=2: only d=1 contributes, so w ≡ 1 and the expectation
        // is the prime density of [X, 2X).
        let f = SymPoly::one(1);
        let stats = empirical_weight_expectation(&[0], 2.0, 10_000, &f).unwrap();
        assert_eq!(stats.windows, 10_000);
        assert!((stats.raw_weight_sum - 10_000.0).abs() < 1e-9);
        let primes = sieve_range(10_000, 20_000).unwrap().len() as f64;
        assert!((stats.expected_prime_hits - primes / 10_000.0).abs() < 1e-12);
    }

    #[test]
    fn pair_weight_probe_is_positive_and_deterministic() {
        let f = expand_signature(2, &sig(&[], 1));
        let a = empirical_weight_expectation(&[0, 2], 10.0, 100_000, &f).unwrap();
        let b = empirical_weight_expectation(&[0, 2], 10.0, 100_000, &f).unwrap();
        assert!(a.expected_prime_hits > 0.0);
        assert!(a.min_weight >= 0.0);
        assert_eq!(a.raw_weight_sum.to_bits(), b.raw_weight_sum.to_bits());
        assert_eq!(a.weighted_prime_hits.to_bits(), b.weighted_prime_hits.to_bits());
    }

    #[test]
    fn weight_probe_rejects_bad_params() {
        let f = SymPoly::one(1);
        assert!(empirical_weight_expectation(&[0], 200.0, 10_000, &f).is_err()); // R² ≥ X
        assert!(empirical_weight_expectation(&[0, 2, 4, 6, 8], 2.0, 10_000, &SymPoly::one(5)).is_err());
        assert!(empirical_weight_expectation(&[0, 2], 2.0, 10_000, &f).is_err()); // dim mismatch
    }
}
