use rayon::prelude::*;

use crate::dynamics::{CookieCutterMap, Word};
use crate::error::{Error, Result};
use crate::thermo::potential::Potential;
use crate::thermo::transfer::LinearFamily;

/// Longest period enumerated for periodic-orbit sums.
pub const MAX_PERIOD: usize = 14;

/// Mean tolerance for an observable treated as centered.
pub const CENTERING_TOLERANCE: f64 = 1e-6;

/// Default step of the second difference in [`asymptotic_variance`].
pub const VARIANCE_STEP: f64 = 1e-4;

/// Birkhoff sums of several potentials along one periodic orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSums {
    pub word: Word,
    pub sums: Vec<f64>,
}

impl PeriodicSums {
    pub fn period(&self) -> usize {
        self.word.len()
    }
}

/// Whether the word is the lexicographically smallest of its rotations.
fn is_necklace(symbols: &[usize]) -> bool {
    let n = symbols.len();
    (1..n).all(|r| {
        for j in 0..n {
            let (a, b) = (symbols[j], symbols[(j + r) % n]);
            if a != b {
                return a < b;
            }
        }
        true
    })
}

/// Birkhoff sums of `potentials` at one periodic point per cyclic class of
/// words of length `1..=max_period`, ordered by period then lexicographically.
pub fn periodic_sums(
    map: &CookieCutterMap,
    potentials: &[&Potential],
    max_period: usize,
) -> Result<Vec<PeriodicSums>> {
    if max_period == 0 || max_period > MAX_PERIOD {
        return Err(Error::LevelTooLarge {
            level: max_period,
            max: MAX_PERIOD,
        });
    }
    map.check_level(max_period)?;
    for p in potentials {
        p.validate(map)?;
    }
    let k = map.k();
    let mut out = Vec::new();
    for n in 1..=max_period {
        let level: Vec<PeriodicSums> = (0..k.pow(n as u32))
            .into_par_iter()
            .filter_map(|i| {
                let word = Word::from_index(i, n, k);
                if !is_necklace(word.symbols()) {
                    return None;
                }
                let x = map.periodic_point(&word).x;
                let orbit = map.orbit(&word, x);
                let sums = potentials
                    .iter()
                    .map(|p| p.birkhoff_on_orbit(map, &word, &orbit))
                    .collect();
                Some(PeriodicSums { word, sums })
            })
            .collect();
        out.extend(level);
    }
    Ok(out)
}

/// Extreme periodic averages `f^n(x)/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LivsicReport {
    pub max_abs: f64,
    pub min_signed: f64,
    pub max_signed: f64,
    pub argmin: Word,
    pub argmax: Word,
    pub max_period: usize,
}

/// Periodic-orbit test for `f` being cohomologous to zero: all periodic
/// averages vanish exactly when it is.
///
/// Averages within `1e-13` of the running extreme count as ties and keep the
/// earlier (shorter) word.
pub fn livsic_discrepancy(
    map: &CookieCutterMap,
    f: &Potential,
    max_period: usize,
) -> Result<LivsicReport> {
    let sums = periodic_sums(map, &[f], max_period)?;
    let mut report = LivsicReport {
        max_abs: 0.0,
        min_signed: f64::INFINITY,
        max_signed: f64::NEG_INFINITY,
        argmin: sums[0].word.clone(),
        argmax: sums[0].word.clone(),
        max_period,
    };
    const TIE: f64 = 1e-13;
    for s in &sums {
        let avg = s.sums[0] / s.period() as f64;
        report.max_abs = report.max_abs.max(avg.abs());
        if avg < report.min_signed - TIE {
            report.min_signed = avg;
            report.argmin = s.word.clone();
        }
        if avg > report.max_signed + TIE {
            report.max_signed = avg;
            report.argmax = s.word.clone();
        }
    }
    Ok(report)
}

/// Empirical distortion of Birkhoff sums within cylinders.
#[derive(Debug, Clone, PartialEq)]
pub struct Distortion {
    /// `max_{n <= N} per_level[n-1]`.
    pub constant: f64,
    /// `max_w |ψ^n(g_w 0) - ψ^n(g_w 1)|` for each level `n`.
    pub per_level: Vec<f64>,
}

/// Lower bound for `K_ψ` from the two endpoint orbits of every cylinder of
/// levels `1..=max_level`.
pub fn distortion_constant(
    map: &CookieCutterMap,
    potential: &Potential,
    max_level: usize,
) -> Result<Distortion> {
    map.check_level(max_level)?;
    potential.validate(map)?;
    let k = map.k();
    // (point, Birkhoff sum) of the orbits ending at 0 and at 1
    let mut current: Vec<[(f64, f64); 2]> = vec![[(0.0, 0.0), (1.0, 0.0)]];
    let mut per_level = Vec::with_capacity(max_level);
    for _ in 0..max_level {
        let len = current.len();
        current = (0..k * len)
            .into_par_iter()
            .map(|i| {
                let s = i / len;
                let g = map.branch(s);
                current[i % len].map(|(y, sum)| (g.eval(y), sum + potential.value_at(map, s, y)))
            })
            .collect();
        let worst = current
            .iter()
            .map(|[a, b]| (a.1 - b.1).abs())
            .fold(0.0, f64::max);
        per_level.push(worst);
    }
    let constant = per_level.iter().copied().fold(0.0, f64::max);
    Ok(Distortion {
        constant,
        per_level,
    })
}

/// Second derivative of `t -> P(base + t * observable)` at 0, i.e. the
/// asymptotic variance of a centered observable under `μ_base`.
pub fn asymptotic_variance(
    map: &CookieCutterMap,
    base: &Potential,
    observable: &Potential,
    m: usize,
) -> Result<f64> {
    asymptotic_variance_with_step(map, base, observable, m, VARIANCE_STEP)
}

pub fn asymptotic_variance_with_step(
    map: &CookieCutterMap,
    base: &Potential,
    observable: &Potential,
    m: usize,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let family = LinearFamily::new(map, base, observable, m)?;
    let (_, mean) = family.means(1.0, 0.0)?;
    if mean.abs() > CENTERING_TOLERANCE {
        return Err(Error::NonCenteredObservable { mean });
    }
    let p0 = family.pressure(1.0, 0.0)?;
    let plus = family.pressure(1.0, h)?;
    let minus = family.pressure(1.0, -h)?;
    Ok((plus - 2.0 * p0 + minus) / (h * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn delta() -> f64 {
        2f64.ln() / 3f64.ln()
    }

    #[test]
    fn necklaces() {
        assert!(is_necklace(&[0, 0, 1]));
        assert!(!is_necklace(&[0, 1, 0]));
        assert!(is_necklace(&[0, 1, 0, 1]));
        assert!(!is_necklace(&[1, 0]));
    }

    #[test]
    fn necklace_counts() {
        // binary necklaces of length 1..6: 2, 3, 4, 6, 8, 14
        let map = fixtures::cantor();
        let sums = periodic_sums(&map, &[&Potential::LogDerivative], 6).unwrap();
        assert_eq!(sums.len(), 2 + 3 + 4 + 6 + 8 + 14);
    }

    #[test]
    fn livsic_on_cantor() {
        let map = fixtures::cantor();
        let cob = Potential::regularity_observable(&Potential::bernoulli(&[0.5, 0.5]), delta());
        assert!(livsic_discrepancy(&map, &cob, 10).unwrap().max_abs < 1e-12);
        let f = Potential::regularity_observable(&Potential::bernoulli(&[0.3, 0.7]), delta());
        assert!(livsic_discrepancy(&map, &f, 10).unwrap().max_abs > 0.1);
        let alpha_max = -0.3f64.ln() / 3f64.ln();
        let g = Potential::regularity_observable(&Potential::bernoulli(&[0.3, 0.7]), alpha_max);
        let r = livsic_discrepancy(&map, &g, 10).unwrap();
        assert!(r.min_signed.abs() < 1e-15);
        assert_eq!(r.argmin, Word::one_based(&[1], 2).unwrap());
    }

    #[test]
    fn distortion_vanishes_for_affine_and_locally_constant() {
        let map = fixtures::cantor();
        assert!(
            distortion_constant(&map, &Potential::LogDerivative, 10)
                .unwrap()
                .constant
                < 1e-12
        );
        let psi = Potential::bernoulli(&[0.3, 0.7]);
        assert_eq!(distortion_constant(&map, &psi, 10).unwrap().constant, 0.0);
    }

    #[test]
    fn distortion_on_moebius_is_bounded_and_monotone() {
        let map = fixtures::moebius();
        let d = distortion_constant(&map, &Potential::LogDerivative, 12).unwrap();
        assert!(d.constant.is_finite() && d.constant > 0.0);
        let running: Vec<f64> = d
            .per_level
            .iter()
            .scan(0.0_f64, |m, v| {
                *m = m.max(*v);
                Some(*m)
            })
            .collect();
        let increments: Vec<f64> = running.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(increments.iter().all(|&x| x >= 0.0));
        assert!(increments[10] < increments[2] * 0.1 + 1e-15);
    }

    #[test]
    fn variance_of_bernoulli_observable() {
        let map = fixtures::cantor();
        let alpha0 = -(0.3f64.ln() + 0.7f64.ln()) / (2.0 * 3f64.ln());
        let obs = Potential::regularity_observable(&Potential::bernoulli(&[0.3, 0.7]), alpha0);
        let v = asymptotic_variance(&map, &Potential::bernoulli(&[0.5, 0.5]), &obs, 4).unwrap();
        let exact = ((0.3f64.ln() - 0.7f64.ln()) / 2.0).powi(2);
        assert!((v - exact).abs() < 1e-6, "{v} {exact}");
        let cob = Potential::regularity_observable(&Potential::bernoulli(&[0.5, 0.5]), delta());
        let z = asymptotic_variance(&map, &Potential::bernoulli(&[0.5, 0.5]), &cob, 4).unwrap();
        assert!(z.abs() < 1e-8);
        let err = asymptotic_variance(
            &map,
            &Potential::bernoulli(&[0.5, 0.5]),
            &Potential::constant(1.0),
            4,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "NonCenteredObservable");
    }
}
