//! Closed-form and numerical probability machinery.
//!
//! Under H1 two consecutive analog samples `z_i = s_i + w_i` are a zero-mean
//! Gaussian pair with covariance
//!
//! ```text
//! C = [ σ_s² + σ²      r     ]
//!     [     r      σ_s² + σ² ]
//! ```
//!
//! and the probability that their one-bit quantizations agree is
//! `p = 2·P(z_1 >= 0, z_2 >= 0)`. The orthant probability of a bivariate
//! normal with correlation `ρ` is `1/4 + asin(ρ)/(2π)`, which gives
//! `p = 1/2 + asin(ρ)/π`. [`orthant_prob_quadrature`] evaluates the same
//! orthant integral numerically and serves as the check on that closed form.
//!
//! Gaussian (CLT) approximations of the false-alarm and detection rates need
//! the mean and variance of the agreement count `Y` under each hypothesis.
//! Two moment sets are provided, see [`TheoryMode`].

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::Error;
use crate::model::{DetectorDirection, Hypothesis, ModelParams};
use crate::roc::{CurveSource, RocCurve, RocPoint};

/// Standard normal upper-tail probability `Q(x) = P(Z >= x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// How [`AgreementProb::p`] was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    Quadrature,
}

/// Probability that two consecutive bits agree under H1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementProb {
    pub p: f64,
    /// Correlation of the analog pair, `r / (σ_s² + σ²)`.
    pub rho: f64,
    pub method: Method,
}

impl AgreementProb {
    /// Probability that consecutive bits differ, `1 - p`.
    pub fn p_prime(&self) -> f64 {
        1.0 - self.p
    }
}

/// Closed-form agreement probability `1/2 + asin(ρ)/π`.
pub fn agreement_prob(params: &ModelParams) -> AgreementProb {
    let rho = params.rho();
    AgreementProb { p: 0.5 + rho.asin() / PI, rho, method: Method::ClosedForm }
}

/// Agreement probability from the numerically integrated orthant probability.
pub fn agreement_prob_quadrature(params: &ModelParams) -> Result<AgreementProb, Error> {
    let c = params.total_variance();
    let orthant = orthant_prob_quadrature(c, params.r, c)?;
    Ok(AgreementProb { p: 2.0 * orthant, rho: params.rho(), method: Method::Quadrature })
}

const ORTHANT_TOL: f64 = 1e-10;
const ORTHANT_MAX_DEPTH: u32 = 50;
/// Integration domain in standard deviations.
const ORTHANT_TRUNCATION: f64 = 10.0;

/// `P(z_1 >= 0, z_2 >= 0)` for a zero-mean bivariate normal with covariance
/// `[[c11, c12], [c12, c22]]`, by adaptive quadrature.
///
/// The double integral is reduced to one dimension by conditioning on `z_1`:
/// with standardized `x = z_1/√c11`,
/// `P = ∫_0^∞ φ(x) · Q(-ρx / √(1-ρ²)) dx`. The outer integral is truncated at
/// ten standard deviations and refined by adaptive Simpson until neighbouring
/// estimates agree to well below `1e-9`.
pub fn orthant_prob_quadrature(c11: f64, c12: f64, c22: f64) -> Result<f64, Error> {
    if !(c11 > 0.0 && c22 > 0.0 && c11 * c22 - c12 * c12 > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let rho = c12 / (c11 * c22).sqrt();
    let cond_sd = (1.0 - rho * rho).sqrt();
    let integrand = |x: f64| {
        let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        density * q_function(-rho * x / cond_sd)
    };
    // Split where the conditional probability changes fastest so the first
    // panel resolves the step at the origin when |ρ| is close to 1.
    let knee = (4.0 * cond_sd).min(1.0);
    let mut total = 0.0;
    for (a, b) in [(0.0, knee), (knee, 2.0), (2.0, 5.0), (5.0, ORTHANT_TRUNCATION)] {
        total += adaptive_simpson(&integrand, a, b, ORTHANT_TOL, ORTHANT_MAX_DEPTH);
    }
    Ok(total)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Which set of H1 moments to use for the Gaussian approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoryMode {
    /// H1 mean `2p(n-1)N` and variance `2p(1-2p)(n-1)N`, as originally
    /// printed. The variance is negative whenever `p > 1/2`.
    PaperLiteral,
    /// H1 mean `p(n-1)N` and variance `p(1-p)(n-1)N`: agreement indicators
    /// treated as independent Bernoulli(`p`).
    Consistent,
}

impl TheoryMode {
    pub fn curve_source(self) -> CurveSource {
        match self {
            TheoryMode::PaperLiteral => CurveSource::TheoryPaperLiteral,
            TheoryMode::Consistent => CurveSource::TheoryConsistent,
        }
    }
}

/// Mean and variance of the agreement count under one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryMoments {
    pub mean: f64,
    pub variance: f64,
    pub hypothesis: Hypothesis,
    pub mode: TheoryMode,
}

/// Moments of `Y` under `h`. H0 moments are the exact binomial ones and do not
/// depend on the mode.
pub fn moments(params: &ModelParams, h: Hypothesis, mode: TheoryMode) -> TheoryMoments {
    let pairs = params.pair_count() as f64;
    let (mean, variance) = match (h, mode) {
        (Hypothesis::H0, _) => (0.5 * pairs, 0.25 * pairs),
        (Hypothesis::H1, TheoryMode::PaperLiteral) => {
            let p = agreement_prob(params).p;
            (2.0 * p * pairs, 2.0 * p * (1.0 - 2.0 * p) * pairs)
        }
        (Hypothesis::H1, TheoryMode::Consistent) => {
            let p = agreement_prob(params).p;
            (p * pairs, p * (1.0 - p) * pairs)
        }
    };
    TheoryMoments { mean, variance, hypothesis: h, mode }
}

/// Gaussian-approximation probability of declaring H1 when `Y` has the given
/// moments.
pub fn gaussian_fire_prob(m: &TheoryMoments, eta: f64, direction: DetectorDirection) -> Result<f64, Error> {
    if m.variance < 0.0 {
        return Err(Error::NegativeVariance { variance: m.variance });
    }
    if m.variance == 0.0 {
        let fires = match direction {
            DetectorDirection::GreaterIsH1 => m.mean >= eta,
            DetectorDirection::LessIsH1 => m.mean <= eta,
        };
        return Ok(if fires { 1.0 } else { 0.0 });
    }
    let z = (eta - m.mean) / m.variance.sqrt();
    Ok(match direction {
        DetectorDirection::GreaterIsH1 => q_function(z),
        DetectorDirection::LessIsH1 => q_function(-z),
    })
}

/// Theoretical ROC from the Gaussian approximation.
///
/// Fails with [`Error::NegativeVariance`] when the chosen mode yields a
/// negative H1 variance; the curve is never patched.
pub fn theory_roc(
    params: &ModelParams,
    mode: TheoryMode,
    direction: DetectorDirection,
    thresholds: &[f64],
) -> Result<RocCurve, Error> {
    let h0 = moments(params, Hypothesis::H0, mode);
    let h1 = moments(params, Hypothesis::H1, mode);
    let points = thresholds
        .iter()
        .map(|&eta| {
            Ok(RocPoint {
                eta,
                pfa: gaussian_fire_prob(&h0, eta, direction)?,
                pd: gaussian_fire_prob(&h1, eta, direction)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(RocCurve { points, source: mode.curve_source(), direction, trials_used: 0 })
}

/// Exact `P(Y >= eta | H0)`: the upper tail of `Binomial((n-1)N, 1/2)`.
///
/// Under H0 every bit is an independent fair coin, so the consecutive-pair
/// agreement indicators are themselves iid Bernoulli(1/2).
pub fn exact_h0_tail(params: &ModelParams, eta: u64) -> f64 {
    binomial_half_upper_tail(params.pair_count() as u64, eta)
}

/// Exact probability that the detector fires under H0 for a real threshold.
pub fn exact_h0_fire_prob(params: &ModelParams, eta: f64, direction: DetectorDirection) -> f64 {
    let trials = params.pair_count() as u64;
    match direction {
        DetectorDirection::GreaterIsH1 => {
            if eta <= 0.0 {
                1.0
            } else {
                binomial_half_upper_tail(trials, eta.ceil() as u64)
            }
        }
        DetectorDirection::LessIsH1 => {
            if eta < 0.0 {
                0.0
            } else {
                // P(Y <= η) = P(Y >= m - ⌊η⌋) by symmetry of Binomial(m, 1/2)
                let floor = eta.floor() as u64;
                if floor >= trials {
                    1.0
                } else {
                    binomial_half_upper_tail(trials, trials - floor)
                }
            }
        }
    }
}

/// `P(X >= k)` for `X ~ Binomial(trials, 1/2)`, summed exactly in integers.
pub fn binomial_half_upper_tail(trials: u64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > trials {
        return 0.0;
    }
    // Sum whichever side has fewer terms.
    let (lo, hi, complement) = if k > trials / 2 { (k, trials, false) } else { (0, k - 1, true) };
    let mut coeff = BigUint::one();
    for j in 0..lo {
        coeff = coeff * (trials - j) / (j + 1);
    }
    let mut sum = BigUint::zero();
    for j in lo..=hi {
        sum += &coeff;
        if j < trials {
            coeff = coeff * (trials - j) / (j + 1);
        }
    }
    let frac = ratio_to_power_of_two(&sum, trials);
    if complement {
        1.0 - frac
    } else {
        frac
    }
}

/// `num / 2^exp` rounded to `f64`.
fn ratio_to_power_of_two(num: &BigUint, exp: u64) -> f64 {
    let bits = num.bits();
    let shift = bits.saturating_sub(64);
    let top = (num >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    let scale = shift as i64 - exp as i64;
    libm::ldexp(top, scale.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(r: f64, sigma2: f64, num_sensors: usize) -> ModelParams {
        ModelParams { n: 20, num_sensors, sigma_s2: 1.0, r, sigma2 }
    }

    // Standard normal upper tail by an independent route: the positive-term
    // Taylor series of erf for small arguments and the Laplace continued
    // fraction of the Mills ratio in the tail.
    fn q_oracle(x: f64) -> f64 {
        if x < 0.0 {
            return 1.0 - q_oracle(-x);
        }
        if x < 2.0 {
            // erf(t) = 2/√π · e^{-t²} · Σ 2^k t^{2k+1} / (1·3·…·(2k+1))
            let t = x / 2f64.sqrt();
            let mut term = t;
            let mut sum = t;
            let mut k = 0.0;
            while term > 1e-20 * sum {
                k += 1.0;
                term *= 2.0 * t * t / (2.0 * k + 1.0);
                sum += term;
            }
            let erf = 2.0 / PI.sqrt() * (-t * t).exp() * sum;
            0.5 * (1.0 - erf)
        } else {
            // Q(x) = φ(x) / (x + 1/(x + 2/(x + 3/(x + …))))
            let mut frac = x;
            for k in (1..200).rev() {
                frac = x + k as f64 / frac;
            }
            (-0.5 * x * x).exp() / (2.0 * PI).sqrt() / frac
        }
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!(q_function(8.0) < 1e-15);
        // mpmath reference values
        let table = [
            (0.5, 0.308_537_538_725_986_9),
            (1.0, 0.158_655_253_931_457_05),
            (2.0, 0.022_750_131_948_179_207),
            (3.0, 0.001_349_898_031_630_094_5),
            (5.0, 2.866_515_718_791_939e-7),
            (8.0, 6.220_960_574_271_784e-16),
            (-1.5, 0.933_192_798_731_141_9),
        ];
        for (x, expected) in table {
            let got = q_function(x);
            assert!(((got - expected) / expected).abs() < 1e-12, "Q({x}) = {got}");
            let oracle = q_oracle(x);
            assert!(((oracle - expected) / expected).abs() < 1e-12, "oracle Q({x}) = {oracle}");
        }
    }

    #[test]
    fn q_function_matches_oracle_on_grid() {
        for i in -800..=800 {
            let x = i as f64 / 100.0;
            let (got, want) = (q_function(x), q_oracle(x));
            assert!(((got - want) / want).abs() < 1e-12, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn agreement_prob_reference() {
        let a = agreement_prob(&params(0.5, 1e-4, 1));
        assert!((a.rho - 0.5 / 1.0001).abs() < 1e-15);
        assert!((a.p - 0.666_648_291_180_610_7).abs() < 1e-12);
        assert!((a.p_prime() - (1.0 - a.p)).abs() < 1e-15);
        assert_eq!(agreement_prob(&params(0.0, 1e-4, 1)).p, 0.5);
        let near_one = agreement_prob(&ModelParams { sigma_s2: 1.0, r: 0.4999999, sigma2: 1e-12, ..params(0.0, 1e-4, 1) });
        assert!(near_one.p > 0.66);
    }

    #[test]
    fn orthant_quadrature_reference() {
        assert!((orthant_prob_quadrature(1.0, 0.0, 1.0).unwrap() - 0.25).abs() < 1e-10);
        assert!((orthant_prob_quadrature(1.0, 0.99999, 1.0).unwrap() - 0.5).abs() < 2e-3);
        let o = orthant_prob_quadrature(1.0001, 0.5, 1.0001).unwrap();
        // mpmath 2-D quadrature of the bivariate density: 0.333324145590305...
        assert!((o - 0.333_324_145_590_305_3).abs() < 1e-8, "{o}");
        let q = agreement_prob_quadrature(&params(0.5, 1e-4, 1)).unwrap();
        assert_eq!(q.method, Method::Quadrature);
        assert!((q.p - 0.666_648_291_180_610_7).abs() < 2e-8);
    }

    #[test]
    fn orthant_rejects_indefinite() {
        assert!(matches!(orthant_prob_quadrature(1.0, 1.0, 1.0), Err(Error::NotPositiveDefinite)));
        assert!(matches!(orthant_prob_quadrature(-1.0, 0.0, 1.0), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn closed_form_matches_quadrature_grid() {
        for rho in [-0.49, -0.25, 0.0, 0.1, 0.25, 0.49] {
            for sigma2 in [1e-4, 1e-2, 1.0] {
                let p = ModelParams { n: 20, num_sensors: 1, sigma_s2: 1.0, r: rho * (1.0 + sigma2), sigma2 };
                let closed = agreement_prob(&p).p;
                let quad = agreement_prob_quadrature(&p).unwrap().p;
                assert!((closed - quad).abs() <= 1e-9, "rho {rho} sigma2 {sigma2}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn h0_moments_match_binomial() {
        let m = moments(&params(0.5, 1e-4, 1), Hypothesis::H0, TheoryMode::PaperLiteral);
        assert_eq!((m.mean, m.variance), (9.5, 4.75));
        let m = moments(&params(0.5, 1e-4, 3), Hypothesis::H0, TheoryMode::Consistent);
        assert_eq!((m.mean, m.variance), (28.5, 14.25));
    }

    #[test]
    fn h1_moments_both_modes() {
        let prm = params(0.5, 1e-4, 1);
        let p = 0.666_648_291_180_610_7;
        let c = moments(&prm, Hypothesis::H1, TheoryMode::Consistent);
        assert!((c.mean - 19.0 * p).abs() < 1e-10);
        assert!((c.mean - 12.666).abs() < 1e-3);
        assert!((c.variance - 4.222).abs() < 1e-3);
        let l = moments(&prm, Hypothesis::H1, TheoryMode::PaperLiteral);
        assert!((l.mean - 38.0 * p).abs() < 1e-10);
        assert!(l.variance < 0.0);
    }

    #[test]
    fn theory_roc_points() {
        let prm = params(0.5, 1e-4, 1);
        let c = theory_roc(&prm, TheoryMode::Consistent, DetectorDirection::GreaterIsH1, &[9.5, 19.0 * 0.666_648_291_180_610_7])
            .unwrap();
        assert_eq!(c.points[0].pfa, 0.5);
        assert!((c.points[1].pd - 0.5).abs() < 1e-12);
        assert!(matches!(
            theory_roc(&prm, TheoryMode::PaperLiteral, DetectorDirection::GreaterIsH1, &[9.5]),
            Err(Error::NegativeVariance { .. })
        ));
        // p < 1/2 keeps the literal variance positive
        let neg = params(-0.3, 1e-4, 1);
        let c = theory_roc(&neg, TheoryMode::PaperLiteral, DetectorDirection::LessIsH1, &[9.5]).unwrap();
        assert_eq!(c.points[0].pfa, 0.5);
    }

    #[test]
    fn less_is_h1_flips_tails() {
        let prm = params(-0.3, 1e-4, 1);
        let g = theory_roc(&prm, TheoryMode::Consistent, DetectorDirection::GreaterIsH1, &[7.5]).unwrap();
        let l = theory_roc(&prm, TheoryMode::Consistent, DetectorDirection::LessIsH1, &[7.5]).unwrap();
        assert!((g.points[0].pfa + l.points[0].pfa - 1.0).abs() < 1e-12);
        assert!(l.points[0].pd > l.points[0].pfa);
    }

    fn binomial_tail_by_pascal(trials: usize, k: usize) -> f64 {
        let mut row = vec![1u64];
        for _ in 0..trials {
            let mut next = vec![1u64; row.len() + 1];
            for j in 1..row.len() {
                next[j] = row[j - 1] + row[j];
            }
            row = next;
        }
        let num: u64 = row.iter().skip(k).sum();
        num as f64 / (1u64 << trials) as f64
    }

    #[test]
    fn exact_tail_reference() {
        let prm = params(0.5, 1e-4, 1);
        assert_eq!(exact_h0_tail(&prm, 0), 1.0);
        assert_eq!(exact_h0_tail(&prm, 14), 16664.0 / 524288.0);
        assert_eq!(exact_h0_tail(&prm, 10), 0.5);
        assert_eq!(exact_h0_tail(&prm, 19), 1.0 / 524288.0);
        assert_eq!(exact_h0_tail(&prm, 20), 0.0);
        for trials in [1usize, 2, 7, 19, 38, 57] {
            for k in 0..=trials + 1 {
                let want = binomial_tail_by_pascal(trials, k);
                let got = binomial_half_upper_tail(trials as u64, k as u64);
                assert!((got - want).abs() <= 1e-15 * want.max(1e-300) + 1e-16, "{trials} {k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn exact_tail_large_trial_count() {
        // Bin(3001, 1/2) is symmetric about 1500.5
        assert!((binomial_half_upper_tail(3001, 1501) - 0.5).abs() < 1e-15);
        assert!(binomial_half_upper_tail(3001, 3001) == 0.0 || binomial_half_upper_tail(3001, 3001) < 1e-300);
    }

    #[test]
    fn exact_fire_prob_directions() {
        let prm = params(-0.3, 1e-4, 1);
        assert_eq!(exact_h0_fire_prob(&prm, -0.5, DetectorDirection::GreaterIsH1), 1.0);
        assert_eq!(exact_h0_fire_prob(&prm, 19.5, DetectorDirection::GreaterIsH1), 0.0);
        assert_eq!(exact_h0_fire_prob(&prm, -0.5, DetectorDirection::LessIsH1), 0.0);
        assert_eq!(exact_h0_fire_prob(&prm, 19.5, DetectorDirection::LessIsH1), 1.0);
        // P(Y <= 4) = P(Y >= 15)
        assert_eq!(exact_h0_fire_prob(&prm, 4.5, DetectorDirection::LessIsH1), exact_h0_tail(&prm, 15));
    }

    proptest! {
        #[test]
        fn p_is_antisymmetric_in_r(r in -0.49f64..0.49, sigma2 in 1e-6f64..2.0) {
            let a = agreement_prob(&params(r, sigma2, 1)).p;
            let b = agreement_prob(&params(-r, sigma2, 1)).p;
            prop_assert!((a + b - 1.0).abs() < 1e-14);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert_eq!(a > 0.5, r > 0.0);
        }

        #[test]
        fn p_increases_with_r(r1 in -0.49f64..0.49, dr in 1e-6f64..0.1, sigma2 in 1e-6f64..2.0) {
            let r2 = (r1 + dr).min(0.4999);
            prop_assume!(r2 > r1);
            prop_assert!(agreement_prob(&params(r1, sigma2, 1)).p < agreement_prob(&params(r2, sigma2, 1)).p);
        }

        #[test]
        fn q_complements(x in -40.0f64..40.0) {
            prop_assert!((q_function(x) + q_function(-x) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn exact_tail_non_increasing(n in 2usize..40, sensors in 1usize..4) {
            let prm = ModelParams { n, num_sensors: sensors, ..params(0.5, 1e-4, 1) };
            let m = prm.pair_count() as u64;
            let tails: Vec<f64> = (0..=m + 1).map(|k| exact_h0_tail(&prm, k)).collect();
            prop_assert_eq!(tails[0], 1.0);
            prop_assert_eq!(*tails.last().unwrap(), 0.0);
            prop_assert!(tails.windows(2).all(|w| w[1] <= w[0]));
        }

        #[test]
        fn h0_moments_equal_binomial(n in 2usize..200, sensors in 1usize..8) {
            let prm = ModelParams { n, num_sensors: sensors, ..params(0.5, 1e-4, 1) };
            let m = (prm.pair_count()) as f64;
            for mode in [TheoryMode::PaperLiteral, TheoryMode::Consistent] {
                let h0 = moments(&prm, Hypothesis::H0, mode);
                prop_assert_eq!(h0.mean, m * 0.5);
                prop_assert_eq!(h0.variance, m * 0.25);
            }
        }
    }
}
