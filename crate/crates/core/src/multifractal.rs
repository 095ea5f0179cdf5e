//! Regularity of cylinders, the sets `I_α`, the implicit function `δ_α(ξ)`,
//! the Hausdorff spectrum `δ_α = min_ξ δ_α(ξ)` and the two `τ(q)` curves.
//!
//! Sign conventions: `T(q)` is defined by `P(T(q) φ + q ψ) = 0`, which makes
//! `δ_α(ξ) = T(ξ) + αξ` and `δ_α = inf_q {T(q) + αq}`. The box-counting
//! exponent `τ(q) = lim log S_ε(q) / log ε` of the partition sum
//! `S_ε(q) = sum μ(I)^q` comes out as `-T(q)`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dynamics::{BasicInterval, CookieCutterMap, Word};
use crate::error::{Error, Result};
use crate::numeric::{bracket_minimum, brent, fit_line, golden_section, log_sum_exp};
use crate::thermo::{
    periodic_sums, transfer_matrix, LinearFamily, MarkovGibbs, PeriodicSums, Potential,
};

/// Period used for the `I_α` and Condition A checks inside [`xi_alpha`].
pub const DEFAULT_PERIOD: usize = 10;
/// `0` must clear both ends of `I_α` by this much to count as interior.
pub const INTERIOR_TOLERANCE: f64 = 1e-12;
/// Periodic averages of `ψ - αφ` below this are treated as a coboundary.
pub const COBOUNDARY_TOLERANCE: f64 = 1e-10;
/// Bound on `|dδ_α/dξ|` at the reported minimizer.
pub const CRITICALITY_TOLERANCE: f64 = 1e-8;
/// Step of the central difference used to verify criticality.
pub const CRITICALITY_STEP: f64 = 1e-4;

/// `log μ(I) / log |I|`.
pub fn regularity(interval: &BasicInterval, weight: f64) -> Result<f64> {
    regularity_from_logs(weight.ln(), interval.log_length)
}

pub fn regularity_from_logs(log_weight: f64, log_length: f64) -> Result<f64> {
    if !(log_weight.is_finite() && log_length < 0.0) {
        return Err(Error::ZeroMeasureInterval);
    }
    Ok(log_weight / log_length)
}

/// Periodic Birkhoff sums of `ψ` and `φ`, reused across many `α`.
#[derive(Debug, Clone)]
pub struct PeriodicTable {
    rows: Vec<PeriodicSums>,
    max_period: usize,
}

impl PeriodicTable {
    pub fn new(map: &CookieCutterMap, psi: &Potential, max_period: usize) -> Result<Self> {
        Ok(PeriodicTable {
            rows: periodic_sums(map, &[psi, &Potential::LogDerivative], max_period)?,
            max_period,
        })
    }

    /// Values within `1e-13` of the running extreme are ties and keep the
    /// shorter word.
    fn extremes<F: Fn(&PeriodicSums) -> f64>(&self, f: F) -> (f64, Word, f64, Word) {
        const TIE: f64 = 1e-13;
        let mut lo = (f64::INFINITY, &self.rows[0].word);
        let mut hi = (f64::NEG_INFINITY, &self.rows[0].word);
        for row in &self.rows {
            let v = f(row);
            if v < lo.0 - TIE {
                lo = (v, &row.word);
            }
            if v > hi.0 + TIE {
                hi = (v, &row.word);
            }
        }
        (lo.0, lo.1.clone(), hi.0, hi.1.clone())
    }

    pub fn i_alpha(&self, alpha: f64) -> AlphaInterval {
        let (lo, lo_word, hi, hi_word) =
            self.extremes(|r| (r.sums[0] - alpha * r.sums[1]) / r.period() as f64);
        AlphaInterval {
            alpha,
            lo,
            hi,
            contains_zero_strictly: lo < -INTERIOR_TOLERANCE && hi > INTERIOR_TOLERANCE,
            lo_word,
            hi_word,
            max_period: self.max_period,
        }
    }

    pub fn alpha_range(&self) -> AlphaRange {
        let (lo, lo_word, hi, hi_word) = self.extremes(|r| r.sums[0] / r.sums[1]);
        AlphaRange {
            lo,
            hi,
            lo_word,
            hi_word,
        }
    }
}

/// Inner approximation of `I_α = {∫ψ - αφ dμ : μ invariant}` by periodic
/// orbit averages.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaInterval {
    pub alpha: f64,
    pub lo: f64,
    pub hi: f64,
    pub contains_zero_strictly: bool,
    pub lo_word: Word,
    pub hi_word: Word,
    pub max_period: usize,
}

pub fn i_alpha(
    map: &CookieCutterMap,
    psi: &Potential,
    alpha: f64,
    max_period: usize,
) -> Result<AlphaInterval> {
    Ok(PeriodicTable::new(map, psi, max_period)?.i_alpha(alpha))
}

/// Range of the periodic ratios `ψ^n(x) / φ^n(x)`; `0 ∈ I_α` exactly for `α`
/// in the closure of this range.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaRange {
    pub lo: f64,
    pub hi: f64,
    pub lo_word: Word,
    pub hi_word: Word,
}

pub fn alpha_range(
    map: &CookieCutterMap,
    psi: &Potential,
    max_period: usize,
) -> Result<AlphaRange> {
    Ok(PeriodicTable::new(map, psi, max_period)?.alpha_range())
}

/// Point of the multifractal spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub alpha: f64,
    pub xi: f64,
    pub delta: f64,
    /// Central-difference estimate of `dδ_α/dξ` at `xi`.
    pub derivative: f64,
    /// Final golden-section bracket.
    pub bracket: (f64, f64),
    /// Evaluations of `δ_α(ξ)` spent by the search.
    pub evaluations: usize,
}

/// `φ` and `ψ` sampled once at the working depth.
#[derive(Debug, Clone)]
pub struct SpectrumProblem {
    family: LinearFamily,
    table: PeriodicTable,
}

impl SpectrumProblem {
    pub fn new(map: &CookieCutterMap, psi: &Potential, m: usize) -> Result<Self> {
        Self::with_period(map, psi, m, DEFAULT_PERIOD)
    }

    pub fn with_period(
        map: &CookieCutterMap,
        psi: &Potential,
        m: usize,
        max_period: usize,
    ) -> Result<Self> {
        Ok(SpectrumProblem {
            family: LinearFamily::new(map, &Potential::LogDerivative, psi, m)?,
            table: PeriodicTable::new(map, psi, max_period)?,
        })
    }

    pub fn family(&self) -> &LinearFamily {
        &self.family
    }

    pub fn table(&self) -> &PeriodicTable {
        &self.table
    }

    /// Root `δ` of `P((δ - ξα) φ + ξ ψ) = 0`.
    pub fn delta_of_xi(&self, alpha: f64, xi: f64) -> Result<f64> {
        self.family.zero_in_first(xi, xi * alpha)
    }

    /// `dδ_α/dξ = -∫(ψ - αφ) dμ / ∫φ dμ` for the equilibrium state at `(δ_α(ξ), ξ)`.
    pub fn delta_derivative(&self, alpha: f64, xi: f64) -> Result<f64> {
        let delta = self.delta_of_xi(alpha, xi)?;
        let (e_phi, e_psi) = self.family.means(delta - xi * alpha, xi)?;
        Ok(-(e_psi - alpha * e_phi) / e_phi)
    }

    /// Root `T` of `P(T φ + q ψ) = 0`.
    pub fn tau(&self, q: f64) -> Result<f64> {
        self.family.zero_in_first(q, 0.0)
    }

    pub fn xi_alpha(&self, alpha: f64) -> Result<SpectrumPoint> {
        let interval = self.table.i_alpha(alpha);
        let coboundary = self.table.rows.iter().all(|r| {
            ((r.sums[0] - alpha * r.sums[1]) / r.period() as f64).abs() < COBOUNDARY_TOLERANCE
        });
        if coboundary {
            return Err(Error::ConditionAViolated { alpha });
        }
        if !interval.contains_zero_strictly {
            return Err(Error::ZeroNotInterior {
                alpha,
                lo: interval.lo,
                hi: interval.hi,
            });
        }
        let mut evaluations = 0usize;
        let mut f = |xi: f64| {
            evaluations += 1;
            self.delta_of_xi(alpha, xi)
        };
        let (a, _, c) = bracket_minimum(&mut f, 0.0, 0.25, 1e4)?;
        let min = golden_section(&mut f, a, c, 1e-5)?;
        let (mut lo, mut hi) = min.bracket;
        let g = |xi: f64| self.delta_derivative(alpha, xi);
        let (glo, ghi) = (g(lo)?, g(hi)?);
        if glo.signum() == ghi.signum() {
            lo = a;
            hi = c;
        }
        let xi = brent(g, lo, hi, 1e-14, 200)?;
        let delta = f(xi)?;
        let h = CRITICALITY_STEP;
        let derivative = (f(xi + h)? - f(xi - h)?) / (2.0 * h);
        if derivative.abs() >= CRITICALITY_TOLERANCE {
            return Err(Error::CriticalityCheckFailed { derivative });
        }
        Ok(SpectrumPoint {
            alpha,
            xi,
            delta,
            derivative,
            bracket: min.bracket,
            evaluations,
        })
    }
}

pub fn delta_alpha_of_xi(
    map: &CookieCutterMap,
    psi: &Potential,
    alpha: f64,
    xi: f64,
    m: usize,
) -> Result<f64> {
    LinearFamily::new(map, &Potential::LogDerivative, psi, m)?.zero_in_first(xi, xi * alpha)
}

/// The critical `ξ_α` and `δ_α = δ_α(ξ_α)`.
///
/// Requires `0` strictly inside `I_α` (periodic orbits up to
/// [`DEFAULT_PERIOD`]) and `ψ - αφ` not a coboundary.
pub fn xi_alpha(
    map: &CookieCutterMap,
    psi: &Potential,
    alpha: f64,
    m: usize,
) -> Result<SpectrumPoint> {
    SpectrumProblem::new(map, psi, m)?.xi_alpha(alpha)
}

/// `T(q)` with `P(T(q) φ + q ψ) = 0`.
pub fn tau_pressure(map: &CookieCutterMap, psi: &Potential, q: f64, m: usize) -> Result<f64> {
    LinearFamily::new(map, &Potential::LogDerivative, psi, m)?.zero_in_first(q, 0.0)
}

/// Box-counting estimate of `τ(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauPartition {
    pub q: f64,
    /// Intercept of the fit `a + b/n` through the per-level ratios.
    pub value: f64,
    /// `(n, log S_ε(q) / log ε)` with `ε` the mesh at level `n`.
    pub per_level: Vec<(usize, f64)>,
}

/// Per-level `log μ(cell)` on a uniform grid whose mesh is the largest
/// level-`n` cylinder, each cylinder assigned to the cell of its midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    pub n: usize,
    pub log_mesh: f64,
    pub log_cells: Vec<f64>,
}

pub fn grid_measures(
    map: &CookieCutterMap,
    psi: &Potential,
    levels: &[usize],
    m: usize,
) -> Result<Vec<GridMeasure>> {
    let depth = crate::thermo::effective_depth(map, psi, m)?;
    let gibbs = MarkovGibbs::new(&transfer_matrix(map, psi, depth)?)?;
    let max = levels.iter().copied().max().unwrap_or(0);
    if levels.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one level is needed".into(),
        ));
    }
    map.check_level(max)?;
    let mut cylinders = crate::dynamics::CylinderLevel::first(map);
    let mut out = Vec::with_capacity(levels.len());
    for (n, log_mu) in gibbs.levels(max) {
        while cylinders.n < n {
            cylinders = cylinders.refine(map);
        }
        if !levels.contains(&n) {
            continue;
        }
        let log_mesh = cylinders
            .log_length
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mesh = log_mesh.exp();
        let mut cells: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
        for (i, lm) in log_mu.iter().enumerate() {
            let mid = 0.5 * (cylinders.left[i] + cylinders.right[i]);
            cells
                .entry((mid / mesh).floor() as i64)
                .or_default()
                .push(*lm);
        }
        let log_cells = cells.values().map(|v| log_sum_exp(v)).collect();
        out.push(GridMeasure {
            n,
            log_mesh,
            log_cells,
        });
    }
    Ok(out)
}

impl GridMeasure {
    /// `log S_ε(q) / log ε`.
    pub fn ratio(&self, q: f64) -> f64 {
        let terms: Vec<f64> = self.log_cells.iter().map(|l| q * l).collect();
        log_sum_exp(&terms) / self.log_mesh
    }
}

fn extrapolate(q: f64, grids: &[GridMeasure]) -> Result<TauPartition> {
    let per_level: Vec<(usize, f64)> = grids.iter().map(|g| (g.n, g.ratio(q))).collect();
    let value = if per_level.len() == 1 {
        per_level[0].1
    } else {
        let xs: Vec<f64> = per_level.iter().map(|(n, _)| 1.0 / *n as f64).collect();
        let ys: Vec<f64> = per_level.iter().map(|(_, r)| *r).collect();
        fit_line(&xs, &ys)?.intercept
    };
    Ok(TauPartition {
        q,
        value,
        per_level,
    })
}

pub fn tau_partition(
    map: &CookieCutterMap,
    psi: &Potential,
    q: f64,
    levels: &[usize],
    m: usize,
) -> Result<TauPartition> {
    extrapolate(q, &grid_measures(map, psi, levels, m)?)
}

/// Both `τ` curves on a common `q` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TauCurve {
    pub q: Vec<f64>,
    /// `T(q)` from the pressure equation.
    pub pressure: Vec<f64>,
    /// Box-counting `τ(q)`.
    pub partition: Vec<f64>,
}

impl TauCurve {
    /// Smallest discrete second difference of `T`, scaled by the grid steps.
    pub fn min_second_difference(&self) -> f64 {
        self.q
            .windows(3)
            .zip(self.pressure.windows(3))
            .map(|(q, t)| {
                let s1 = (t[1] - t[0]) / (q[1] - q[0]);
                let s2 = (t[2] - t[1]) / (q[2] - q[1]);
                s2 - s1
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn tau_curve(
    map: &CookieCutterMap,
    psi: &Potential,
    q: &[f64],
    levels: &[usize],
    m: usize,
) -> Result<TauCurve> {
    let problem = LinearFamily::new(map, &Potential::LogDerivative, psi, m)?;
    let pressure = q
        .par_iter()
        .map(|&q| problem.zero_in_first(q, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let grids = grid_measures(map, psi, levels, m)?;
    let partition = q
        .iter()
        .map(|&q| extrapolate(q, &grids).map(|t| t.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(TauCurve {
        q: q.to_vec(),
        pressure,
        partition,
    })
}

/// Spectrum over a grid of `α`; failures are kept per point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub points: Vec<(f64, Result<SpectrumPoint>)>,
}

impl SpectrumCurve {
    pub fn solved(&self) -> impl Iterator<Item = &SpectrumPoint> {
        self.points.iter().filter_map(|(_, r)| r.as_ref().ok())
    }

    /// Whether `δ_α` is concave along the solved points, up to `tol`.
    pub fn is_concave(&self, tol: f64) -> bool {
        let pts: Vec<&SpectrumPoint> = self.solved().collect();
        pts.windows(3).all(|w| {
            let s1 = (w[1].delta - w[0].delta) / (w[1].alpha - w[0].alpha);
            let s2 = (w[2].delta - w[1].delta) / (w[2].alpha - w[1].alpha);
            s2 <= s1 + tol
        })
    }

    pub fn max(&self) -> Option<&SpectrumPoint> {
        self.solved().max_by(|a, b| a.delta.total_cmp(&b.delta))
    }
}

pub fn spectrum_curve(
    map: &CookieCutterMap,
    psi: &Potential,
    alphas: &[f64],
    m: usize,
) -> Result<SpectrumCurve> {
    let problem = SpectrumProblem::new(map, psi, m)?;
    let points = alphas
        .par_iter()
        .map(|&a| (a, problem.xi_alpha(a)))
        .collect();
    Ok(SpectrumCurve { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle;

    fn l3() -> f64 {
        3f64.ln()
    }
    fn delta() -> f64 {
        2f64.ln() / l3()
    }
    fn alpha0() -> f64 {
        -(0.3f64.ln() + 0.7f64.ln()) / (2.0 * l3())
    }
    fn psi03() -> Potential {
        Potential::bernoulli(&[0.3, 0.7])
    }

    #[test]
    fn regularity_examples() {
        let map = fixtures::cantor();
        let ivs = map.basic_intervals(2).unwrap();
        let r = regularity(&ivs[1], 0.21).unwrap();
        assert!((r - 0.21f64.ln() / (1.0f64 / 9.0).ln()).abs() < 1e-14);
        assert!((r - 0.710282).abs() < 1e-6);
        let r = regularity(&ivs[3], 0.25).unwrap();
        assert!((r - delta()).abs() < 1e-14);
        assert!((regularity(&ivs[0], ivs[0].length).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(
            regularity(&ivs[0], 0.0).unwrap_err().kind(),
            "ZeroMeasureInterval"
        );
    }

    #[test]
    fn i_alpha_examples() {
        let map = fixtures::cantor();
        let ia = i_alpha(&map, &psi03(), alpha0(), 10).unwrap();
        assert!((ia.lo + 0.423649).abs() < 1e-6 && (ia.hi - 0.423649).abs() < 1e-6);
        assert_eq!(ia.lo_word, Word::one_based(&[1], 2).unwrap());
        assert_eq!(ia.hi_word, Word::one_based(&[2], 2).unwrap());
        assert!(ia.contains_zero_strictly);
        let ia = i_alpha(&map, &psi03(), 1.2, 10).unwrap();
        assert!((ia.lo - 0.114362).abs() < 1e-6 && (ia.hi - 0.961660).abs() < 1e-6);
        assert!(!ia.contains_zero_strictly);
        let ia = i_alpha(&map, &Potential::bernoulli(&[0.5, 0.5]), delta(), 10).unwrap();
        assert!(ia.lo.abs() < 1e-14 && ia.hi.abs() < 1e-14);
    }

    #[test]
    fn alpha_range_examples() {
        let map = fixtures::cantor();
        let r = alpha_range(&map, &psi03(), 10).unwrap();
        assert!((r.lo + 0.7f64.ln() / l3()).abs() < 1e-14);
        assert!((r.hi + 0.3f64.ln() / l3()).abs() < 1e-14);
        assert!(1.2 > r.hi);
        let r = alpha_range(&map, &Potential::bernoulli(&[0.5, 0.5]), 10).unwrap();
        assert!((r.lo - delta()).abs() < 1e-14 && (r.hi - delta()).abs() < 1e-14);
    }

    #[test]
    fn delta_alpha_of_xi_examples() {
        let map = fixtures::cantor();
        let d0 = delta_alpha_of_xi(&map, &psi03(), alpha0(), 0.0, 4).unwrap();
        assert!((d0 - delta()).abs() < 1e-12);
        let d1 = delta_alpha_of_xi(&map, &psi03(), alpha0(), 1.0, 4).unwrap();
        assert!((d1 - alpha0()).abs() < 1e-12);
        let half = Potential::bernoulli(&[0.5, 0.5]);
        for (a, x) in [(0.5, 2.0), (0.9, -1.5), (0.3, 0.7)] {
            let d = delta_alpha_of_xi(&map, &half, a, x, 4).unwrap();
            assert!((d - (delta() + x * (a - delta()))).abs() < 1e-12);
        }
    }

    #[test]
    fn xi_alpha_examples() {
        let map = fixtures::cantor();
        let p = xi_alpha(&map, &psi03(), alpha0(), 4).unwrap();
        assert!(p.xi.abs() < 1e-6);
        assert!((p.delta - delta()).abs() < 1e-6);
        let p = xi_alpha(&map, &psi03(), 0.9, 4).unwrap();
        let o = oracle::bernoulli_spectrum(0.3, 0.9).unwrap();
        assert!((p.delta - o.delta).abs() < 1e-8);
        assert!((p.xi - o.xi).abs() < 1e-6);
        assert_eq!(
            xi_alpha(&map, &psi03(), 1.2, 4).unwrap_err().kind(),
            "ZeroNotInterior"
        );
        let half = Potential::bernoulli(&[0.5, 0.5]);
        assert_eq!(
            xi_alpha(&map, &half, delta(), 4).unwrap_err().kind(),
            "ConditionAViolated"
        );
    }

    #[test]
    fn tau_pressure_examples() {
        let map = fixtures::cantor();
        assert!((tau_pressure(&map, &psi03(), 0.0, 4).unwrap() - delta()).abs() < 1e-12);
        assert!(tau_pressure(&map, &psi03(), 1.0, 4).unwrap().abs() < 1e-12);
        assert!((tau_pressure(&map, &psi03(), 2.0, 4).unwrap() + 0.495832).abs() < 1e-6);
    }

    #[test]
    fn tau_partition_examples() {
        let map = fixtures::cantor();
        let levels: Vec<usize> = (10..=14).collect();
        let t2 = tau_partition(&map, &psi03(), 2.0, &levels, 4).unwrap();
        assert!((t2.value - 0.495832).abs() < 5e-3);
        let t1 = tau_partition(&map, &psi03(), 1.0, &levels, 4).unwrap();
        assert!(t1.value.abs() < 5e-3);
        let half =
            tau_partition(&map, &Potential::bernoulli(&[0.5, 0.5]), 0.0, &levels, 4).unwrap();
        assert!((half.value + delta()).abs() < 5e-3);
    }

    #[test]
    fn legendre_identity_and_convexity() {
        let map = fixtures::moebius();
        let psi = psi03();
        let problem = SpectrumProblem::new(&map, &psi, 6).unwrap();
        let alpha = 0.5;
        let qs: Vec<f64> = (-6..=6).map(|i| i as f64 * 0.5).collect();
        let ts: Vec<f64> = qs.iter().map(|&q| problem.tau(q).unwrap()).collect();
        for (&q, &t) in qs.iter().zip(&ts) {
            let d = problem.delta_of_xi(alpha, q).unwrap();
            assert!((d - (t + alpha * q)).abs() < 1e-10);
        }
        let curve = TauCurve {
            q: qs.clone(),
            pressure: ts,
            partition: vec![0.0; qs.len()],
        };
        assert!(curve.min_second_difference() > 0.0);
    }
}
