//! Zeta functions over cylinders and periodic orbits: the multifractal zeta
//! function `ζ_α^μ`, the geometric zeta function of the gaps, the `g`-zeta
//! function, and tools to read off abscissas and growth exponents.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{CookieCutterMap, Word};
use crate::error::{Error, Result};
use crate::levels::{LevelTable, DEFAULT_DEPTH};
use crate::numeric::{fit_line, log_sum_exp, CompensatedSum};
use crate::thermo::{distortion_constant, gibbs_weights, Potential};

/// Largest period enumerated by [`g_zeta_partial`] for two branches.
pub const MAX_PERIODIC_LEVEL: usize = 22;

/// Bisection width of [`abscissa_estimate`].
pub const ABSCISSA_TOLERANCE: f64 = 1e-4;

/// Largest tail, relative to the partial sum, accepted by
/// [`growth_exponent_fit`].
pub const TAIL_TOLERANCE: f64 = 0.01;

/// Regularity `α` and the constants of the sandwich `a|I|^α <= μ(I) <= b|I|^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaConfig {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
}

impl ZetaConfig {
    pub fn new(alpha: f64, a: f64, b: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "α must be finite, got {alpha}"
            )));
        }
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < a < b, got a = {a}, b = {b}"
            )));
        }
        Ok(ZetaConfig { alpha, a, b })
    }

    /// `[ln a, ln b]`.
    pub fn log_window(&self) -> (f64, f64) {
        (self.a.ln(), self.b.ln())
    }

    /// `ln a <= log μ - α log|I| <= ln b`.
    pub fn hits(&self, log_weight: f64, log_length: f64) -> bool {
        let (lo, hi) = self.log_window();
        let v = log_weight - self.alpha * log_length;
        lo <= v && v <= hi
    }
}

/// A truncated series `sum_{n <= N} w_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaEvaluation {
    pub sigma: f64,
    /// `log w_n` for `n = 1..=N`, `-inf` where a level contributes nothing.
    pub log_terms: Vec<f64>,
    pub terms: Vec<f64>,
    /// Number of contributing intervals per level; exact below `2^53`.
    pub hits: Vec<f64>,
    pub partial: f64,
    /// Geometric extrapolation of the terms beyond `N`.
    pub tail: f64,
}

impl ZetaEvaluation {
    pub fn from_log_terms(sigma: f64, log_terms: Vec<f64>, hits: Vec<f64>) -> Self {
        let terms: Vec<f64> = log_terms.iter().map(|l| l.exp()).collect();
        let partial = terms.iter().copied().collect::<CompensatedSum>().value();
        let tail = tail_estimate(&log_terms);
        ZetaEvaluation {
            sigma,
            log_terms,
            terms,
            hits,
            partial,
            tail,
        }
    }

    pub fn levels(&self) -> usize {
        self.terms.len()
    }

    /// `partial + tail`.
    pub fn total(&self) -> f64 {
        self.partial + self.tail
    }
}

/// `w_N r / (1 - r)` with `r` the per-level ratio between the last two
/// nonzero terms; zero once the last level is empty, infinite when the
/// terms do not decay.
///
/// Lattice potentials can make consecutive terms alternate (the window holds
/// one more lattice point at every other level). When the last step grows,
/// the ratio is taken between the sums of the last two pairs of levels
/// instead, and the tail is infinite only if those do not decay either.
pub fn tail_estimate(log_terms: &[f64]) -> f64 {
    let finite: Vec<usize> = (0..log_terms.len())
        .filter(|&i| log_terms[i].is_finite())
        .collect();
    let Some(&last) = finite.last() else {
        return 0.0;
    };
    if last + 1 != log_terms.len() {
        return 0.0;
    }
    if finite.len() < 2 {
        return f64::INFINITY;
    }
    let prev = finite[finite.len() - 2];
    let rate = (log_terms[last] - log_terms[prev]) / (last - prev) as f64;
    if rate >= 0.0 {
        return paired_tail(log_terms);
    }
    (log_terms[last] + rate).exp() / -rate.exp_m1()
}

fn paired_tail(log_terms: &[f64]) -> f64 {
    let n = log_terms.len();
    if n < 4 || log_terms[n - 4..].iter().any(|t| !t.is_finite()) {
        return f64::INFINITY;
    }
    let last = log_sum_exp(&log_terms[n - 2..]);
    let rate = last - log_sum_exp(&log_terms[n - 4..n - 2]);
    if rate >= 0.0 {
        return f64::INFINITY;
    }
    (last + rate).exp() / -rate.exp_m1()
}

/// Per-level hit counts of the sandwich condition for levels `1..=n`.
pub fn hit_counts(table: &LevelTable, cfg: &ZetaConfig, n: usize) -> Result<Vec<f64>> {
    table.level(n)?;
    Ok(table.levels()[..n]
        .par_iter()
        .map(|level| {
            let logs: Vec<f64> = (0..level.len())
                .filter(|&i| cfg.hits(level.log_weight[i], level.log_length[i]))
                .map(|i| level.log_multiplicity(i))
                .collect();
            count_from_log(log_sum_exp(&logs))
        })
        .collect())
}

fn count_from_log(l: f64) -> f64 {
    let c = l.exp();
    if c < 9.007_199_254_740_992e15 {
        c.round()
    } else {
        c
    }
}

/// `ζ_α^μ(σ)` truncated at level `n`, from precomputed levels.
pub fn zeta_from_table(
    table: &LevelTable,
    cfg: &ZetaConfig,
    sigma: f64,
    n: usize,
) -> Result<ZetaEvaluation> {
    table.level(n)?;
    let per_level: Vec<(f64, f64)> = table.levels()[..n]
        .par_iter()
        .map(|level| {
            let (mut terms, mut counts) = (Vec::new(), Vec::new());
            for i in 0..level.len() {
                if cfg.hits(level.log_weight[i], level.log_length[i]) {
                    let m = level.log_multiplicity(i);
                    terms.push(m + sigma * level.log_length[i]);
                    counts.push(m);
                }
            }
            (log_sum_exp(&terms), count_from_log(log_sum_exp(&counts)))
        })
        .collect();
    let (log_terms, hits) = per_level.into_iter().unzip();
    Ok(ZetaEvaluation::from_log_terms(sigma, log_terms, hits))
}

/// `sum_{n <= N} sum_{a|I|^α <= μ(I) <= b|I|^α} |I|^σ` for the Gibbs measure
/// of the normalized potential `psi`.
pub fn mf_zeta_partial(
    map: &CookieCutterMap,
    psi: &Potential,
    cfg: &ZetaConfig,
    sigma: f64,
    n: usize,
) -> Result<ZetaEvaluation> {
    zeta_from_table(
        &LevelTable::build(map, psi, n, DEFAULT_DEPTH)?,
        cfg,
        sigma,
        n,
    )
}

/// `sum_j ℓ_j^s`.
pub fn geometric_zeta(gaps: &[f64], s: Complex64) -> Complex64 {
    let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
    for &l in gaps {
        let t = (s * l.ln()).exp();
        re.add(t.re);
        im.add(t.im);
    }
    Complex64::new(re.value(), im.value())
}

/// `log sum ℓ^σ` over the gaps created at each stage `1..=stages`.
pub fn geometric_log_terms(map: &CookieCutterMap, stages: usize, sigma: f64) -> Result<Vec<f64>> {
    Ok(map
        .gap_lengths_by_stage(stages)?
        .iter()
        .map(|gaps| log_sum_exp(&gaps.iter().map(|l| sigma * l.ln()).collect::<Vec<_>>()))
        .collect())
}

/// Built-in window functions for [`g_zeta_partial`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// Indicator of `[lo, hi]`.
    Indicator {
        lo: f64,
        hi: f64,
    },
    /// `exp(-(x - center)^2 / (2 width^2))`.
    Gaussian {
        center: f64,
        width: f64,
    },
    Zero,
}

impl Window {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Window::Indicator { lo, hi } => {
                if lo <= x && x <= hi {
                    1.0
                } else {
                    0.0
                }
            }
            Window::Gaussian { center, width } => {
                (-(x - center).powi(2) / (2.0 * width * width)).exp()
            }
            Window::Zero => 0.0,
        }
    }
}

/// `sum_{n <= N} sum_{T^n x = x} exp(s φ^n(x) + ξ v) g(v)` with
/// `v = ψ^n(x) - α φ^n(x)`, one term per word.
#[derive(Debug, Clone, PartialEq)]
pub struct GZetaEvaluation {
    pub per_level: Vec<Complex64>,
    pub value: Complex64,
}

pub fn g_zeta_partial<G>(
    map: &CookieCutterMap,
    psi: &Potential,
    alpha: f64,
    xi: f64,
    g: G,
    s: Complex64,
    n: usize,
) -> Result<GZetaEvaluation>
where
    G: Fn(f64) -> f64 + Sync,
{
    let max = ((MAX_PERIODIC_LEVEL as f64) * 2f64.ln() / (map.k() as f64).ln()).floor() as usize;
    if n == 0 || n > max {
        return Err(Error::LevelTooLarge { level: n, max });
    }
    psi.validate(map)?;
    let k = map.k();
    let phi = Potential::LogDerivative;
    let per_level: Vec<Complex64> = (1..=n)
        .map(|level| {
            let terms: Vec<Complex64> = (0..k.pow(level as u32))
                .into_par_iter()
                .map(|i| {
                    let word = Word::from_index(i, level, k);
                    let x = map.periodic_point(&word).x;
                    let orbit = map.orbit(&word, x);
                    let f = phi.birkhoff_on_orbit(map, &word, &orbit);
                    let v = psi.birkhoff_on_orbit(map, &word, &orbit) - alpha * f;
                    let weight = g(v);
                    if weight == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(s.re * f + xi * v, s.im * f).exp() * weight
                    }
                })
                .collect();
            let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
            for t in terms {
                re.add(t.re);
                im.add(t.im);
            }
            Complex64::new(re.value(), im.value())
        })
        .collect();
    let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
    for t in &per_level {
        re.add(t.re);
        im.add(t.im);
    }
    Ok(GZetaEvaluation {
        per_level,
        value: Complex64::new(re.value(), im.value()),
    })
}

/// `exp(slope) - 1` of a line through `log w_n` over the last half of the
/// levels; `-1` when fewer than two of those levels are nonzero.
pub fn growth_rate(log_terms: &[f64]) -> Result<f64> {
    let n = log_terms.len();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (n - n / 2..n)
        .filter(|&i| log_terms[i].is_finite())
        .map(|i| ((i + 1) as f64, log_terms[i]))
        .unzip();
    if xs.len() < 2 {
        return Ok(-1.0);
    }
    Ok(fit_line(&xs, &ys)?.slope.exp_m1())
}

/// Abscissa of convergence: the `σ` where the fitted per-level growth rate
/// of `w_n(σ)` crosses zero, found by bisection inside `bracket`.
pub fn abscissa_estimate<F>(mut log_terms_at: F, bracket: (f64, f64)) -> Result<f64>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "empty σ bracket [{lo}, {hi}]"
        )));
    }
    let r_lo = growth_rate(&log_terms_at(lo)?)?;
    let r_hi = growth_rate(&log_terms_at(hi)?)?;
    if !(r_lo > 0.0 && r_hi < 0.0) {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > ABSCISSA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if growth_rate(&log_terms_at(mid)?)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fit of `log ζ(σ) ≈ log c - κ log(σ - δ_α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    /// `(σ, ζ(σ))` with `ζ` the partial sum plus its tail estimate.
    pub samples: Vec<(f64, f64)>,
    pub kappa: f64,
    pub c: f64,
    /// Largest absolute residual of the log-log fit.
    pub residual: f64,
}

pub fn growth_exponent_fit<F>(
    mut evaluate: F,
    delta_alpha: f64,
    sigma_grid: &[f64],
) -> Result<GrowthFit>
where
    F: FnMut(f64) -> Result<ZetaEvaluation>,
{
    if sigma_grid.len() < 2 {
        return Err(Error::InvalidParameter(
            "growth fit needs at least two σ values".into(),
        ));
    }
    let mut samples = Vec::with_capacity(sigma_grid.len());
    for &sigma in sigma_grid {
        if !(sigma > delta_alpha) {
            return Err(Error::InvalidParameter(format!(
                "σ = {sigma} is not above δ_α = {delta_alpha}"
            )));
        }
        let e = evaluate(sigma)?;
        if !(e.tail <= TAIL_TOLERANCE * e.partial) {
            return Err(Error::TailNotConverged {
                sigma,
                tail: e.tail,
                partial: e.partial,
            });
        }
        samples.push((sigma, e.total()));
    }
    let xs: Vec<f64> = samples
        .iter()
        .map(|(s, _)| (s - delta_alpha).ln())
        .collect();
    let ys: Vec<f64> = samples.iter().map(|(_, z)| z.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(GrowthFit {
        samples,
        kappa: -fit.slope,
        c: fit.intercept.exp(),
        residual: fit.max_residual,
    })
}

/// One side of the sandwich between `ζ_α^μ` and `g`-zeta functions with
/// indicator windows.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichBounds {
    /// Window of the upper comparison `ζ_{α,χ1}`.
    pub upper_window: (f64, f64),
    /// Window of the lower comparison `ζ_{α,χ2}`; `None` when empty.
    pub lower_window: Option<(f64, f64)>,
    pub upper_factor: f64,
    pub lower_factor: f64,
    pub upper_sum: f64,
    pub lower_sum: f64,
    /// `upper_factor · upper_sum - ζ`.
    pub upper_margin: f64,
    /// `ζ - lower_factor · lower_sum`.
    pub lower_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub sigma: f64,
    pub xi: f64,
    pub levels: usize,
    /// Empirical `K_φ`.
    pub k_phi: f64,
    /// Empirical Gibbs constants.
    pub gibbs_c: f64,
    pub gibbs_d: f64,
    /// `Δ = |ξ| ln(D/C) + K_φ |α|`.
    pub inflation: f64,
    pub zeta: f64,
    /// Windows `[ln a ∓ Δ, ln b ± Δ]` and factors
    /// `e^{±|K_φ(σ - ξα)|} C^{|ξ|}`, `D^{-|ξ|}`.
    pub constructive: SandwichBounds,
    /// Windows and factors that follow from the Gibbs bounds, the
    /// distortion bound and the sandwich term by term.
    pub term_by_term: SandwichBounds,
}

/// Both readings of the comparison between `ζ_α^μ(σ)` and the `g`-zeta
/// functions, truncated at the same level `n`.
pub fn sandwich_check(
    map: &CookieCutterMap,
    psi: &Potential,
    cfg: &ZetaConfig,
    xi: f64,
    sigma: f64,
    n: usize,
    m: usize,
) -> Result<SandwichReport> {
    let alpha = cfg.alpha;
    let (la, lb) = cfg.log_window();
    let k_phi = distortion_constant(map, &Potential::LogDerivative, n)?.constant;
    let (mut gibbs_c, mut gibbs_d) = (f64::INFINITY, 0.0_f64);
    for level in 1..=n {
        let g = gibbs_weights(map, psi, level, m)?;
        gibbs_c = gibbs_c.min(g.gibbs_c);
        gibbs_d = gibbs_d.max(g.gibbs_d);
    }
    let (lc, ld) = (gibbs_c.ln(), gibbs_d.ln());
    let inflation = xi.abs() * (ld - lc) + k_phi * alpha.abs();
    if lb - la <= 2.0 * inflation {
        return Err(Error::WindowDegenerate {
            width: lb - la,
            inflation,
        });
    }
    let zeta = zeta_from_table(&LevelTable::enumerate(map, psi, n, m)?, cfg, sigma, n)?.partial;
    let g_sum = |lo: f64, hi: f64| -> Result<f64> {
        let w = Window::Indicator { lo, hi };
        Ok(g_zeta_partial(
            map,
            psi,
            alpha,
            xi,
            |v| w.eval(v),
            Complex64::new(sigma, 0.0),
            n,
        )?
        .value
        .re)
    };
    let shift = (k_phi * (sigma - xi * alpha)).abs();
    let bounds =
        |upper: (f64, f64), lower: (f64, f64), f_up: f64, f_lo: f64| -> Result<SandwichBounds> {
            let upper_sum = g_sum(upper.0, upper.1)?;
            let lower_window = (lower.0 <= lower.1).then_some(lower);
            let lower_sum = match lower_window {
                Some((lo, hi)) => g_sum(lo, hi)?,
                None => 0.0,
            };
            Ok(SandwichBounds {
                upper_window: upper,
                lower_window,
                upper_factor: f_up,
                lower_factor: f_lo,
                upper_sum,
                lower_sum,
                upper_margin: f_up * upper_sum - zeta,
                lower_margin: zeta - f_lo * lower_sum,
            })
        };
    let constructive = bounds(
        (la - inflation, lb + inflation),
        (la + inflation, lb - inflation),
        (shift + xi.abs() * lc).exp(),
        (-shift - xi.abs() * ld).exp(),
    )?;
    // log|I| = φ^n(x) + e with |e| <= K_φ, log μ(I) = ψ^n(x) + c with
    // c in [ln C, ln D], and log μ - α log|I| = h in [ln a, ln b], so
    // σ log|I| = σ φ^n + ξ v + ξ c - ξ h + (σ - ξα) e.
    let spread = alpha.abs() * k_phi;
    let term_by_term = bounds(
        (la - ld - spread, lb - lc + spread),
        (la + ld + spread, lb + lc - spread),
        (shift + (xi * lc).max(xi * ld) + (-xi * la).max(-xi * lb)).exp(),
        (-shift + (xi * lc).min(xi * ld) + (-xi * la).min(-xi * lb)).exp(),
    )?;
    Ok(SandwichReport {
        sigma,
        xi,
        levels: n,
        k_phi,
        gibbs_c,
        gibbs_d,
        inflation,
        zeta,
        constructive,
        term_by_term,
    })
}
