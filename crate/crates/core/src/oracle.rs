//! Closed forms for the middle-third Cantor map carrying the Bernoulli
//! `(p, 1-p)` measure.
//!
//! Everything here is computed from `p` alone, without the map or transfer
//! operator machinery, so that disagreements with the general code point at
//! one side. A word with `j` ones and `n - j` twos has
//! `log μ(I) - α log|I| = j u_1 + (n - j) u_2` where
//! `u_1 = ln p + α ln 3` and `u_2 = ln(1-p) + α ln 3`.

use crate::error::{Error, Result};
pub use crate::numeric::log_factorials;
use crate::numeric::{log_sum_exp, sum_compensated};

/// Highest level accepted by the combinatorial zeta oracle.
pub const MAX_LEVEL: usize = 5000;

fn ln3() -> f64 {
    3f64.ln()
}

/// `ln 2 / ln 3`.
pub fn cantor_dimension() -> f64 {
    2f64.ln() / ln3()
}

/// Per-symbol values `(u_1, u_2)` of `ψ - αφ`.
pub fn per_symbol_values(p: f64, alpha: f64) -> (f64, f64) {
    (p.ln() + alpha * ln3(), (1.0 - p).ln() + alpha * ln3())
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "p must lie in (0,1), got {p}"
        )))
    }
}

/// Level-wise hit data of `ζ_α^μ` for the Bernoulli Cantor measure: for each
/// `n`, the log of the number of words of length `n` with
/// `ln a <= log μ(I) - α log|I| <= ln b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliZeta {
    pub p: f64,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    /// `log_counts[n-1]`, `-inf` when level `n` has no hit.
    pub log_counts: Vec<f64>,
}

impl BernoulliZeta {
    pub fn new(p: f64, alpha: f64, a: f64, b: f64, levels: usize) -> Result<Self> {
        check_p(p)?;
        if !(a > 0.0 && b > a) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < a < b, got a = {a}, b = {b}"
            )));
        }
        if levels == 0 || levels > MAX_LEVEL {
            return Err(Error::LevelTooLarge {
                level: levels,
                max: MAX_LEVEL,
            });
        }
        let (u1, u2) = per_symbol_values(p, alpha);
        let (la, lb) = (a.ln(), b.ln());
        let lf = log_factorials(levels);
        let log_counts = (1..=levels)
            .map(|n| {
                let hits: Vec<f64> = (0..=n)
                    .filter(|&j| {
                        let v = j as f64 * u1 + (n - j) as f64 * u2;
                        la <= v && v <= lb
                    })
                    .map(|j| lf[n] - lf[j] - lf[n - j])
                    .collect();
                log_sum_exp(&hits)
            })
            .collect();
        Ok(BernoulliZeta {
            p,
            alpha,
            a,
            b,
            log_counts,
        })
    }

    pub fn levels(&self) -> usize {
        self.log_counts.len()
    }

    /// `log w_n(σ) = log #hits_n - σ n ln 3`.
    pub fn log_terms(&self, sigma: f64) -> Vec<f64> {
        self.log_counts
            .iter()
            .enumerate()
            .map(|(i, c)| c - sigma * (i + 1) as f64 * ln3())
            .collect()
    }

    pub fn partial(&self, sigma: f64) -> f64 {
        sum_compensated(self.log_terms(sigma).into_iter().map(f64::exp))
    }

    /// Exact hit counts for levels where they fit in a `u64`.
    pub fn hit_counts(&self) -> Vec<u64> {
        self.log_counts
            .iter()
            .map(|c| {
                if c.is_finite() {
                    c.exp().round() as u64
                } else {
                    0
                }
            })
            .collect()
    }
}

/// `sum_{n <= N} 3^{-σn} #{words of length n in the window}`.
pub fn bernoulli_cantor_zeta(
    p: f64,
    alpha: f64,
    a: f64,
    b: f64,
    sigma: f64,
    levels: usize,
) -> Result<f64> {
    Ok(BernoulliZeta::new(p, alpha, a, b, levels)?.partial(sigma))
}

/// `T(q) = ln(p^q + (1-p)^q) / ln 3`.
pub fn bernoulli_tau(p: f64, q: f64) -> f64 {
    log_sum_exp(&[q * p.ln(), q * (1.0 - p).ln()]) / ln3()
}

/// `T'(q)`, increasing from `ln min(p,1-p) / ln 3` to `ln max(p,1-p) / ln 3`.
pub fn bernoulli_tau_derivative(p: f64, q: f64) -> f64 {
    let (l1, l2) = (p.ln(), (1.0 - p).ln());
    // weight of the first symbol under the (p^q, (1-p)^q) normalization
    let w1 = 1.0 / (1.0 + (q * (l2 - l1)).exp());
    (w1 * l1 + (1.0 - w1) * l2) / ln3()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliSpectrum {
    pub xi: f64,
    pub delta: f64,
    /// Set for `p = 1/2`, where `T` is linear and only `α = ln2/ln3` occurs.
    pub degenerate: bool,
}

/// Open interval of attainable `α`.
pub fn bernoulli_alpha_range(p: f64) -> (f64, f64) {
    let (a, b) = (-p.ln() / ln3(), -(1.0 - p).ln() / ln3());
    (a.min(b), a.max(b))
}

/// Legendre transform of [`bernoulli_tau`]: `ξ_α` solves `T'(ξ) = -α` and
/// `δ_α = T(ξ_α) + α ξ_α`.
pub fn bernoulli_spectrum(p: f64, alpha: f64) -> Result<BernoulliSpectrum> {
    check_p(p)?;
    let (lo, hi) = bernoulli_alpha_range(p);
    if p == 0.5 {
        if (alpha - lo).abs() <= 1e-12 {
            return Ok(BernoulliSpectrum {
                xi: 0.0,
                delta: cantor_dimension(),
                degenerate: true,
            });
        }
        return Err(Error::AlphaOutOfRange { alpha, lo, hi });
    }
    if !(alpha > lo && alpha < hi) {
        return Err(Error::AlphaOutOfRange { alpha, lo, hi });
    }
    let f = |q: f64| bernoulli_tau_derivative(p, q) + alpha;
    let (mut a, mut b) = (-1.0, 1.0);
    while f(a) > 0.0 {
        a *= 2.0;
    }
    while f(b) < 0.0 {
        b *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if f(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let xi = 0.5 * (a + b);
    Ok(BernoulliSpectrum {
        xi,
        delta: bernoulli_tau(p, xi) + alpha * xi,
        degenerate: false,
    })
}

/// `(2 · 3^{-σ}) / (1 - 2 · 3^{-σ})`, the zeta function of the
/// `(1/2, 1/2)` measure at `α = ln2/ln3` for any window containing 1.
pub fn halfhalf_zeta_closed(sigma: f64) -> Result<f64> {
    let abscissa = cantor_dimension();
    if sigma <= abscissa {
        return Err(Error::AtOrBelowAbscissa { sigma, abscissa });
    }
    let r = 2.0 * 3f64.powf(-sigma);
    Ok(r / (1.0 - r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliVariance {
    pub variance: f64,
    /// `1 / sqrt(2 ln 3 · variance)`.
    pub omega: f64,
    pub xi: f64,
    pub delta: f64,
}

/// Variance of `ψ - αφ` under the Bernoulli equilibrium measure at `ξ_α`,
/// with weights proportional to `p_i^{ξ_α}`.
pub fn bernoulli_variance(p: f64, alpha: f64) -> Result<BernoulliVariance> {
    let s = bernoulli_spectrum(p, alpha)?;
    if s.degenerate {
        return Err(Error::DegenerateVariance);
    }
    let (u1, u2) = per_symbol_values(p, alpha);
    let w1 = 1.0 / (1.0 + (s.xi * ((1.0 - p).ln() - p.ln())).exp());
    let w2 = 1.0 - w1;
    let mean = w1 * u1 + w2 * u2;
    let variance = w1 * (u1 - mean).powi(2) + w2 * (u2 - mean).powi(2);
    if !(variance > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    Ok(BernoulliVariance {
        variance,
        omega: 1.0 / (2.0 * ln3() * variance).sqrt(),
        xi: s.xi,
        delta: s.delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha0() -> f64 {
        -(0.3f64.ln() + 0.7f64.ln()) / (2.0 * ln3())
    }

    #[test]
    fn halfhalf_partial_sum() {
        let z = bernoulli_cantor_zeta(0.5, cantor_dimension(), 0.5, 2.0, 1.0, 10).unwrap();
        let exact: f64 = (1..=10).map(|n| (2.0f64 / 3.0).powi(n)).sum();
        assert!((z - exact).abs() < 1e-13);
        assert!((z - 1.965317).abs() < 1e-6);
    }

    #[test]
    fn entire_regime_stops_growing() {
        let z = BernoulliZeta::new(0.3, 1.2, 0.37, 2.72, 40).unwrap();
        let counts = z.hit_counts();
        assert!(counts[9..].iter().all(|&c| c == 0));
        let a = bernoulli_cantor_zeta(0.3, 1.2, 0.37, 2.72, 0.7, 12).unwrap();
        let b = bernoulli_cantor_zeta(0.3, 1.2, 0.37, 2.72, 0.7, 40).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tau_values() {
        for p in [0.2, 0.3, 0.5] {
            assert!((bernoulli_tau(p, 0.0) - cantor_dimension()).abs() < 1e-15);
            assert!(bernoulli_tau(p, 1.0).abs() < 1e-15);
        }
        assert!((bernoulli_tau(0.3, 2.0) + 0.495832).abs() < 1e-6);
    }

    #[test]
    fn spectrum_values() {
        let s = bernoulli_spectrum(0.3, alpha0()).unwrap();
        assert!(s.xi.abs() < 1e-12 && (s.delta - cantor_dimension()).abs() < 1e-12);
        let (_, hi) = bernoulli_alpha_range(0.3);
        let near = bernoulli_spectrum(0.3, hi - 1e-9).unwrap();
        assert!(near.delta < 1e-6);
        let flat = bernoulli_spectrum(0.5, cantor_dimension()).unwrap();
        assert!(flat.degenerate && (flat.delta - cantor_dimension()).abs() < 1e-15);
        assert_eq!(
            bernoulli_spectrum(0.3, 1.2).unwrap_err().kind(),
            "AlphaOutOfRange"
        );
    }

    #[test]
    fn spectrum_is_legendre_transform() {
        for alpha in [0.4, 0.6, 0.9, 1.05] {
            let s = bernoulli_spectrum(0.3, alpha).unwrap();
            let inf = (-40000..=40000)
                .map(|i| {
                    let q = s.xi + i as f64 * 1e-5;
                    bernoulli_tau(0.3, q) + alpha * q
                })
                .fold(f64::INFINITY, f64::min);
            assert!((s.delta - inf).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_values() {
        assert!((halfhalf_zeta_closed(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((halfhalf_zeta_closed(2.0).unwrap() - 2.0 / 7.0).abs() < 1e-15);
        assert_eq!(
            halfhalf_zeta_closed(cantor_dimension()).unwrap_err().kind(),
            "AtOrBelowAbscissa"
        );
    }

    #[test]
    fn variance_values() {
        let v = bernoulli_variance(0.3, alpha0()).unwrap();
        assert!((v.variance - 0.179478).abs() < 1e-6);
        assert!((v.omega - 1.592416).abs() < 1e-6);
        assert_eq!(
            bernoulli_variance(0.5, cantor_dimension())
                .unwrap_err()
                .kind(),
            "DegenerateVariance"
        );
    }

    #[test]
    fn complement_symmetry() {
        let a = BernoulliZeta::new(0.3, 0.8, 0.2, 3.0, 20)
            .unwrap()
            .hit_counts();
        let b = BernoulliZeta::new(0.7, 0.8, 0.2, 3.0, 20)
            .unwrap()
            .hit_counts();
        assert_eq!(a, b);
    }
}
