//! Concentration-of-measure analysis for the product profile.
//!
//! For large dimension `k` the ratio maximization admits an explicit
//! near-optimal product shape `F(t₁,…,t_k) = Π G(tᵢ)` on the simplex, with
//! `G(t) = A/(1 + c·t)` on `[0, k^{−3/4}]`, `c = k·ln k`, and `A` chosen so
//! `∫G² = 1`.  Interpreting `G²` as a probability density turns the two
//! quadratic forms into probabilities of sums of i.i.d. variables `Zᵢ`:
//! the denominator form is exactly `P(ΣZᵢ < 1)` and each numerator term is
//! at least `(∫₀^{1/2}G)²·P(ΣZᵢ < ½)`.  This module computes the moments of
//! `G²` by deterministic quadrature, samples `Zᵢ` by closed-form inverse
//! CDF, and assembles the resulting lower bound on the ratio, whose growth
//! with `k` is logarithmic.

use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

// ---- the profile and its moments --------------------------------------------

/// The truncated reciprocal profile `G(t) = scale/(1 + rate·t)` on
/// `[0, cutoff]`, normalized so `G²` is a probability density, together
/// with the moment quantities the concentration argument tracks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GProfile {
    pub k: u32,
    /// support endpoint `k^{−3/4}`
    pub cutoff: f64,
    /// reciprocal slope `c = k·ln k` (zero when k = 1)
    pub rate: f64,
    /// normalizing amplitude `A`
    pub scale: f64,
    /// `μ = ∫ t·G(t)² dt`
    pub mu: f64,
    /// `σ² = ∫ (t−μ)²·G(t)² dt`
    pub sigma_sq: f64,
    /// `∫ G`
    pub g_integral: f64,
    /// `∫₀^{min(cutoff, 1/2)} G`
    pub g_half_integral: f64,
    /// `3k·μ` — the mean constraint holds iff this is below 1
    pub mu_times_3k: f64,
    /// `k·σ²` — must trend to 0 for concentration
    pub k_sigma_sq: f64,
    /// `k·(∫G)²` — must grow for the ratio to grow
    pub k_g_integral_sq: f64,
    /// independent quadrature of `∫G²` after normalization (≈ 1)
    pub gsq_norm: f64,
}

impl GProfile {
    /// Builds the profile for any `k ≥ 1` (the public moment entry point
    /// [`g_moments`] additionally enforces the documented `k ≥ 2` domain).
    pub fn new(k: u32) -> Result<GProfile> {
        if k == 0 {
            return Err(Error::InvalidParam("profile needs k ≥ 1".into()));
        }
        let kf = k as f64;
        let cutoff = kf.powf(-0.75);
        let rate = kf * kf.ln();
        // The unscaled integrands vary on scale 1/rate inside a much longer
        // support, which defeats plain interval adaptivity at large k.  The
        // substitution 1 + rate·t = e^{s·v} (v ∈ [0,1], s = ln(1+rate·cutoff))
        // makes every integrand a tame exponential; for k = 1 the rate is 0
        // and the identity map is used.
        let s = (1.0 + rate * cutoff).ln();
        let to_t = move |v: f64| {
            if rate == 0.0 {
                v * cutoff
            } else {
                ((s * v).exp() - 1.0) / rate
            }
        };
        let jac = move |v: f64| {
            if rate == 0.0 {
                cutoff
            } else {
                s / rate * (s * v).exp()
            }
        };
        // normalization from quadrature of the unscaled square
        let raw_norm =
            adaptive_simpson(&|v| (1.0 + rate * to_t(v)).powi(-2) * jac(v), 0.0, 1.0, 1e-14);
        let scale = raw_norm.sqrt().recip();
        let g = move |v: f64| scale / (1.0 + rate * to_t(v));
        let quad = |f: &dyn Fn(f64) -> f64, hi: f64| adaptive_simpson(f, 0.0, hi, 1e-14);
        let mu = quad(&|v| to_t(v) * g(v) * g(v) * jac(v), 1.0);
        let second = quad(&|v| to_t(v).powi(2) * g(v) * g(v) * jac(v), 1.0);
        let sigma_sq = second - mu * mu;
        let g_integral = quad(&|v| g(v) * jac(v), 1.0);
        // the support only sticks out past 1/2 for k ≤ 2
        let v_half = if cutoff <= 0.5 {
            1.0
        } else if rate == 0.0 {
            0.5 / cutoff
        } else {
            (1.0 + rate * 0.5).ln() / s
        };
        let g_half_integral = quad(&|v| g(v) * jac(v), v_half);
        let gsq_norm = quad(&|v| g(v) * g(v) * jac(v), 1.0);
        Ok(GProfile {
            k,
            cutoff,
            rate,
            scale,
            mu,
            sigma_sq,
            g_integral,
            g_half_integral,
            mu_times_3k: 3.0 * kf * mu,
            k_sigma_sq: kf * sigma_sq,
            k_g_integral_sq: kf * g_integral * g_integral,
            gsq_norm,
        })
    }

    /// CDF of the density `G²`: `A²·t/(1 + c·t)`, clamped to the support.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.cutoff {
            return 1.0;
        }
        self.scale * self.scale * t / (1.0 + self.rate * t)
    }

    /// Inverse CDF: `t = u/(A² − c·u)`, exact because the antiderivative of
    /// `G²` is rational in `t`.
    pub fn quantile(&self, u: f64) -> f64 {
        let a2 = self.scale * self.scale;
        (u / (a2 - self.rate * u)).clamp(0.0, self.cutoff)
    }
}

/// Moments and constraint indicators of the profile, by deterministic
/// adaptive quadrature.  Requires `k ≥ 2`.
pub fn g_moments(k: u32) -> Result<GProfile> {
    if k < 2 {
        return Err(Error::InvalidParam(format!("moment report needs k ≥ 2, got {k}")));
    }
    GProfile::new(k)
}

// ---- quadrature -------------------------------------------------------------

/// Adaptive Simpson with Richardson error control; deterministic.  The
/// tolerance is relative to the coarse whole-interval estimate, so integrals
/// of very different magnitudes are resolved equally well.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    let tol_abs = tol.max(1e-16) * whole.abs().max(f64::MIN_POSITIVE);
    rec(f, a, fa, b, fb, m, fm, whole, tol_abs, 52)
}

// ---- Monte Carlo ------------------------------------------------------------

/// Samples are drawn in fixed-size chunks, each from its own counter-based
/// stream of the seeded generator, so results are identical regardless of
/// how chunks are scheduled across threads.
const SAMPLE_CHUNK: u64 = 4096;

fn u01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Estimate and one binomial standard error of `P(Σᵢ Zᵢ < threshold)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationEstimate {
    pub k: u32,
    pub samples: u64,
    pub threshold: f64,
    pub seed: u64,
    pub hits: u64,
    pub estimate: f64,
    /// one binomial standard error
    pub radius: f64,
    /// mean of the sum, `k·μ`, for orientation
    pub sum_mean: f64,
    /// standard deviation of the sum, `√(k·σ²)`
    pub sum_sd: f64,
}

/// Monte Carlo estimate of `P(Z₁+⋯+Z_k < threshold)` for i.i.d. `Zᵢ` with
/// density `G²`, by inverse-CDF sampling.  Deterministic given the seed,
/// independent of thread count.
pub fn mc_concentration(
    k: u32,
    samples: u64,
    threshold: f64,
    seed: u64,
) -> Result<ConcentrationEstimate> {
    if samples < 10_000 {
        return Err(Error::InvalidParam(format!(
            "need at least 10000 samples for a stable estimate, got {samples}"
        )));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidParam(format!("threshold must be positive, got {threshold}")));
    }
    let profile = GProfile::new(k)?;
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let lo = chunk * SAMPLE_CHUNK;
            let hi = samples.min(lo + SAMPLE_CHUNK);
            let mut h = 0u64;
            for _ in lo..hi {
                let mut sum = 0.0;
                for _ in 0..k {
                    sum += profile.quantile(u01(&mut rng));
                    if sum >= threshold {
                        break;
                    }
                }
                if sum < threshold {
                    h += 1;
                }
            }
            h
        })
        .sum();
    let estimate = hits as f64 / samples as f64;
    Ok(ConcentrationEstimate {
        k,
        samples,
        threshold,
        seed,
        hits,
        estimate,
        radius: (estimate * (1.0 - estimate) / samples as f64).sqrt(),
        sum_mean: k as f64 * profile.mu,
        sum_sd: (k as f64 * profile.sigma_sq).sqrt(),
    })
}

/// The probabilistic lower bound on the ratio of the two quadratic forms
/// at the product profile, with its ingredients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioLowerBound {
    pub k: u32,
    pub samples: u64,
    pub seed: u64,
    /// `∫₀^{1/2} G`
    pub g_half_integral: f64,
    /// `P(ΣZ < ½)` estimate and standard error
    pub p_half: f64,
    pub p_half_radius: f64,
    /// `P(ΣZ < 1)` estimate and standard error
    pub p_one: f64,
    pub p_one_radius: f64,
    /// `k·(∫₀^{1/2}G)²·P(ΣZ<½)/P(ΣZ<1)`
    pub bound: f64,
    /// `bound / log₁₀ k` (absent at k = 1)
    pub bound_per_log10_k: Option<f64>,
}

/// Estimates the lower bound `ΣJ/I ≥ k·(∫₀^{1/2}G)²·P(ΣZ<½)/P(ΣZ<1)`.
/// Both probabilities come from one pass over shared samples, which also
/// guarantees `p_half ≤ p_one`.  The zero-denominator error is defensive:
/// `k·μ` stays below 1/2 for every k (it tends to 1/4 from above), so
/// `P(ΣZ<1)` is never small and a zero estimate indicates a broken sampler
/// rather than an unlucky run.
pub fn product_ratio_lower_bound(k: u32, samples: u64, seed: u64) -> Result<RatioLowerBound> {
    if samples < 10_000 {
        return Err(Error::InvalidParam(format!(
            "need at least 10000 samples for a stable estimate, got {samples}"
        )));
    }
    let profile = GProfile::new(k)?;
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let (hits_half, hits_one): (u64, u64) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let lo = chunk * SAMPLE_CHUNK;
            let hi = samples.min(lo + SAMPLE_CHUNK);
            let (mut h_half, mut h_one) = (0u64, 0u64);
            for _ in lo..hi {
                let mut sum = 0.0;
                for _ in 0..k {
                    sum += profile.quantile(u01(&mut rng));
                    if sum >= 1.0 {
                        break;
                    }
                }
                if sum < 1.0 {
                    h_one += 1;
                    if sum < 0.5 {
                        h_half += 1;
                    }
                }
            }
            (h_half, h_one)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if hits_one == 0 {
        return Err(Error::DegenerateSampling(format!(
            "no sampled sum fell below 1 in {samples} samples at k = {k}"
        )));
    }
    let n = samples as f64;
    let p_half = hits_half as f64 / n;
    let p_one = hits_one as f64 / n;
    let bound = k as f64 * profile.g_half_integral * profile.g_half_integral * p_half / p_one;
    Ok(RatioLowerBound {
        k,
        samples,
        seed,
        g_half_integral: profile.g_half_integral,
        p_half,
        p_half_radius: (p_half * (1.0 - p_half) / n).sqrt(),
        p_one,
        p_one_radius: (p_one * (1.0 - p_one) / n).sqrt(),
        bound,
        bound_per_log10_k: (k > 1).then(|| bound / (k as f64).log10()),
    })
}

// ---- tests ------------------------------------------------------------------
