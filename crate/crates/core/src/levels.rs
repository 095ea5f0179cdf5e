//! Per-level cylinder data `(log|I_w|, log μ(I_w))` shared by the zeta
//! evaluations and the on-disk cache.

use rayon::prelude::*;

use crate::dynamics::{Branch, CookieCutterMap, CylinderLevel};
use crate::error::{Error, Result};
use crate::numeric::log_factorials;
use crate::thermo::{
    effective_depth, transfer_matrix, MarkovGibbs, Potential, NORMALIZATION_TOLERANCE,
};

/// Default transfer-matrix depth for Gibbs weights.
pub const DEFAULT_DEPTH: usize = 10;

/// Largest total number of type classes held by a compressed table.
pub const MAX_CLASSES: usize = 1 << 24;

/// Highest level of a compressed table; `k^n` stays below `f64::MAX` for
/// `k = 2`.
pub const MAX_COMPRESSED_LEVEL: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// One entry per word, lexicographic.
    Enumerated,
    /// One entry per vector of symbol counts. Valid when both the length and
    /// the measure of a cylinder depend only on how often each symbol occurs,
    /// i.e. affine branches and a locally constant potential.
    TypeClasses,
}

impl Layout {
    pub fn code(self) -> u8 {
        match self {
            Layout::Enumerated => 0,
            Layout::TypeClasses => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Layout::Enumerated),
            1 => Some(Layout::TypeClasses),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub n: usize,
    pub log_length: Vec<f64>,
    pub log_weight: Vec<f64>,
    /// Log of the number of words in each entry; `None` for enumerated levels.
    pub log_multiplicity: Option<Vec<f64>>,
}

impl Level {
    pub fn len(&self) -> usize {
        self.log_length.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_length.is_empty()
    }

    pub fn log_multiplicity(&self, i: usize) -> f64 {
        self.log_multiplicity.as_ref().map_or(0.0, |m| m[i])
    }
}

/// Levels `1..=N` of a map with a normalized potential.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTable {
    k: usize,
    depth: usize,
    layout: Layout,
    levels: Vec<Level>,
}

fn check_normalized(log_lambda: f64) -> Result<()> {
    if log_lambda.abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized {
            pressure: log_lambda,
        });
    }
    Ok(())
}

/// Whether [`Layout::TypeClasses`] is exact for this pair.
pub fn compressible(map: &CookieCutterMap, psi: &Potential) -> bool {
    map.is_affine() && psi.is_locally_constant(map)
}

impl LevelTable {
    /// Type classes when exact, otherwise full enumeration.
    pub fn build(map: &CookieCutterMap, psi: &Potential, n: usize, m: usize) -> Result<Self> {
        if compressible(map, psi) {
            Self::type_classes(map, psi, n)
        } else {
            Self::enumerate(map, psi, n, m)
        }
    }

    pub fn enumerate(map: &CookieCutterMap, psi: &Potential, n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "level count must be positive".into(),
            ));
        }
        map.check_level(n)?;
        let depth = effective_depth(map, psi, m)?;
        let gibbs = MarkovGibbs::new(&transfer_matrix(map, psi, depth)?)?;
        check_normalized(gibbs.log_lambda())?;
        let mut cylinders = CylinderLevel::first(map);
        let mut levels = Vec::with_capacity(n);
        for (level, log_weight) in gibbs.levels(n) {
            while cylinders.n < level {
                cylinders = cylinders.refine(map);
            }
            levels.push(Level {
                n: level,
                log_length: cylinders.log_length.clone(),
                log_weight,
                log_multiplicity: None,
            });
        }
        Ok(LevelTable {
            k: map.k(),
            depth,
            layout: Layout::Enumerated,
            levels,
        })
    }

    pub fn type_classes(map: &CookieCutterMap, psi: &Potential, n: usize) -> Result<Self> {
        if !compressible(map, psi) {
            return Err(Error::InvalidParameter(
                "type classes need affine branches and a locally constant potential".into(),
            ));
        }
        let k = map.k();
        if n == 0 || n > MAX_COMPRESSED_LEVEL {
            return Err(Error::LevelTooLarge {
                level: n,
                max: MAX_COMPRESSED_LEVEL,
            });
        }
        let total: f64 = (1..=n).map(|l| class_count(l, k)).sum();
        if total > MAX_CLASSES as f64 {
            return Err(Error::LevelTooLarge {
                level: n,
                max: MAX_COMPRESSED_LEVEL,
            });
        }
        let log_lambda = crate::thermo::pressure(map, psi, 1)?.value;
        check_normalized(log_lambda)?;
        let log_slope: Vec<f64> = map
            .branches()
            .iter()
            .map(|b| match b {
                Branch::Affine { slope, .. } => slope.abs().ln(),
                Branch::Moebius { .. } => unreachable!("checked affine"),
            })
            .collect();
        let log_w: Vec<f64> = (0..k)
            .map(|s| psi.value_at(map, s, 0.0) - log_lambda)
            .collect();
        let lf = log_factorials(n);
        let levels = (1..=n)
            .into_par_iter()
            .map(|l| {
                let classes = compositions(l, k);
                let dot = |c: &[usize], v: &[f64]| {
                    c.iter().zip(v).map(|(&c, v)| c as f64 * v).sum::<f64>()
                };
                Level {
                    n: l,
                    log_length: classes.iter().map(|c| dot(c, &log_slope)).collect(),
                    log_weight: classes.iter().map(|c| dot(c, &log_w)).collect(),
                    log_multiplicity: Some(
                        classes
                            .iter()
                            .map(|c| lf[l] - c.iter().map(|&j| lf[j]).sum::<f64>())
                            .collect(),
                    ),
                }
            })
            .collect();
        Ok(LevelTable {
            k,
            depth: 1,
            layout: Layout::TypeClasses,
            levels,
        })
    }

    /// Reassembles a table from stored parts, checking the shapes.
    pub fn from_levels(k: usize, depth: usize, layout: Layout, levels: Vec<Level>) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewBranches(k));
        }
        for (i, level) in levels.iter().enumerate() {
            let n = i + 1;
            let expected = match layout {
                Layout::Enumerated => k.checked_pow(n as u32),
                Layout::TypeClasses => {
                    let c = class_count(n, k);
                    (c <= MAX_CLASSES as f64).then_some(c as usize)
                }
            };
            let shape_ok = level.n == n
                && Some(level.len()) == expected
                && level.log_weight.len() == level.len()
                && match (&level.log_multiplicity, layout) {
                    (None, Layout::Enumerated) => true,
                    (Some(m), Layout::TypeClasses) => m.len() == level.len(),
                    _ => false,
                };
            if !shape_ok {
                return Err(Error::InvalidParameter(format!(
                    "level {n} has an inconsistent shape"
                )));
            }
        }
        Ok(LevelTable {
            k,
            depth,
            layout,
            levels,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn max_level(&self) -> usize {
        self.levels.len()
    }

    /// Level `n` (1-based).
    pub fn level(&self, n: usize) -> Result<&Level> {
        if n == 0 || n > self.levels.len() {
            return Err(Error::LevelTooLarge {
                level: n,
                max: self.levels.len(),
            });
        }
        Ok(&self.levels[n - 1])
    }

    /// The first `n` levels.
    pub fn truncated(&self, n: usize) -> Result<LevelTable> {
        self.level(n)?;
        Ok(LevelTable {
            k: self.k,
            depth: self.depth,
            layout: self.layout,
            levels: self.levels[..n].to_vec(),
        })
    }
}

/// `C(n + k - 1, k - 1)` as a float.
fn class_count(n: usize, k: usize) -> f64 {
    (1..k)
        .fold(1.0, |acc, i| acc * (n + i) as f64 / i as f64)
        .round()
}

/// Symbol-count vectors of length `k` summing to `n`, lexicographically
/// decreasing in the first count.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .rev()
        .flat_map(|first| {
            compositions(n - first, k - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::numeric::log_sum_exp;

    #[test]
    fn compositions_enumerate_type_classes() {
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(class_count(3, 3), 10.0);
    }

    #[test]
    fn compressed_matches_enumerated() {
        let map = fixtures::cantor();
        let psi = Potential::bernoulli(&[0.3, 0.7]);
        let full = LevelTable::enumerate(&map, &psi, 8, 4).unwrap();
        let comp = LevelTable::type_classes(&map, &psi, 8).unwrap();
        for n in 1..=8 {
            let (f, c) = (full.level(n).unwrap(), comp.level(n).unwrap());
            // masses of all cylinders with j first symbols
            for j in 0..=n {
                let idx: Vec<f64> = (0..f.len())
                    .filter(|i| (0..n).filter(|b| (i >> b) & 1 == 0).count() == j)
                    .map(|i| f.log_weight[i])
                    .collect();
                let e = n - j;
                let from_classes = c.log_weight[e] + c.log_multiplicity(e);
                assert!((log_sum_exp(&idx) - from_classes).abs() < 1e-12);
                assert!((c.log_length[e] + n as f64 * 3f64.ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unnormalized_is_rejected() {
        let map = fixtures::cantor();
        let err = LevelTable::build(&map, &Potential::bernoulli(&[0.3, 0.3]), 4, 4).unwrap_err();
        assert_eq!(err.kind(), "NotNormalized");
        let err = LevelTable::enumerate(&map, &Potential::LogDerivative, 4, 4).unwrap_err();
        assert_eq!(err.kind(), "NotNormalized");
    }

    #[test]
    fn moebius_levels_sum_to_one() {
        let map = fixtures::moebius();
        let t = LevelTable::build(&map, &Potential::bernoulli(&[0.4, 0.6]), 10, 6).unwrap();
        assert_eq!(t.layout(), Layout::Enumerated);
        for level in t.levels() {
            assert!(log_sum_exp(&level.log_weight).abs() < 1e-12);
        }
    }

    #[test]
    fn from_levels_checks_shape() {
        let map = fixtures::cantor();
        let t = LevelTable::build(&map, &Potential::bernoulli(&[0.5, 0.5]), 5, 4).unwrap();
        let rebuilt =
            LevelTable::from_levels(2, t.depth(), t.layout(), t.levels().to_vec()).unwrap();
        assert_eq!(rebuilt, t);
        let mut broken = t.levels().to_vec();
        broken[2].log_weight.pop();
        assert!(LevelTable::from_levels(2, 1, t.layout(), broken).is_err());
    }
}
