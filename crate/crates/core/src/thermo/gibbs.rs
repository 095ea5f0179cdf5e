use rayon::prelude::*;

use crate::dynamics::{CookieCutterMap, Word};
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, sum_compensated};
use crate::thermo::potential::Potential;
use crate::thermo::transfer::{effective_depth, transfer_matrix, TransferMatrix};

/// Largest pressure accepted for a potential treated as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-8;

/// The stationary Markov measure of a depth-`m` transfer matrix.
///
/// For a word `w` of length `n >= m`,
/// `log μ(w) = log h(w_1..w_{m-1}) + sum over length-m windows (log W - log λ)
///           + log l̄(w_{n-m+2}..w_n) - log Z`
/// with `h`, `l` the right and left Perron vectors, `l̄(c) = sum_t l(c t)` and
/// `Z = sum_c h(c) l̄(c)`. Shorter words get the marginals of level `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovGibbs {
    k: usize,
    depth: usize,
    log_weights: Vec<f64>,
    log_lambda: f64,
    log_h: Vec<f64>,
    log_lbar: Vec<f64>,
    log_z: f64,
}

impl MarkovGibbs {
    pub fn new(matrix: &TransferMatrix) -> Result<Self> {
        let eig = matrix.leading_eigen(true)?;
        let k = matrix.k();
        let block = matrix.dim() / k;
        let left = eig.left.as_ref().expect("left vector requested");
        let log_h: Vec<f64> = (0..block).map(|c| eig.right[c * k].ln()).collect();
        let log_lbar: Vec<f64> = (0..block)
            .map(|c| left[c * k..(c + 1) * k].iter().sum::<f64>().ln())
            .collect();
        let log_z = log_sum_exp(
            &log_h
                .iter()
                .zip(&log_lbar)
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        );
        Ok(MarkovGibbs {
            k,
            depth: matrix.depth(),
            log_weights: matrix.log_weights().to_vec(),
            log_lambda: eig.log_lambda,
            log_h,
            log_lbar,
            log_z,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `log λ` of the underlying matrix, i.e. the discrete pressure.
    pub fn log_lambda(&self) -> f64 {
        self.log_lambda
    }

    /// Iterates over `log μ` of all words of lengths `1..=max_level`.
    pub fn levels(&self, max_level: usize) -> GibbsLevels<'_> {
        GibbsLevels {
            gibbs: self,
            max_level,
            next: 1,
            base: None,
            marginals: Vec::new(),
        }
    }

    /// `log μ` of all words of length `n`, in lexicographic order.
    pub fn log_weights_at(&self, n: usize) -> Vec<f64> {
        self.levels(n).last().map(|(_, v)| v).unwrap_or_default()
    }

    fn finish(&self, base: &[f64]) -> Vec<f64> {
        let block = self.log_lbar.len();
        base.par_iter()
            .enumerate()
            .map(|(i, b)| b + self.log_lbar[i % block] - self.log_z)
            .collect()
    }

    fn extend(&self, base: &[f64]) -> Vec<f64> {
        let size = self.log_weights.len();
        (0..base.len() * self.k)
            .into_par_iter()
            .map(|i| base[i / self.k] + self.log_weights[i % size] - self.log_lambda)
            .collect()
    }
}

/// Level-by-level iterator produced by [`MarkovGibbs::levels`].
pub struct GibbsLevels<'a> {
    gibbs: &'a MarkovGibbs,
    max_level: usize,
    next: usize,
    /// Unfinished sums for the last completed level `>= m`.
    base: Option<Vec<f64>>,
    /// Pending marginals for levels below `m`, deepest first.
    marginals: Vec<Vec<f64>>,
}

impl Iterator for GibbsLevels<'_> {
    type Item = (usize, Vec<f64>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next > self.max_level {
            return None;
        }
        let g = self.gibbs;
        let m = g.depth;
        let n = self.next;
        self.next += 1;
        if self.base.is_none() {
            let base: Vec<f64> = (0..g.log_weights.len())
                .map(|v| g.log_h[v / g.k] + g.log_weights[v] - g.log_lambda)
                .collect();
            let top = g.finish(&base);
            let mut marginals = vec![top];
            for _ in 1..m {
                let prev = marginals.last().unwrap();
                let coarser: Vec<f64> = prev.chunks(g.k).map(log_sum_exp).collect();
                marginals.push(coarser);
            }
            self.marginals = marginals;
            self.base = Some(base);
        }
        if n < m {
            return Some((n, self.marginals[m - n].clone()));
        }
        if n == m {
            self.marginals.truncate(1);
            return Some((n, self.marginals.pop().unwrap()));
        }
        let base = self.base.take().unwrap();
        let extended = g.extend(&base);
        let out = g.finish(&extended);
        self.base = Some(extended);
        Some((n, out))
    }
}

/// Cylinder weights of a Gibbs measure at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsApproximation {
    pub level: usize,
    pub depth: usize,
    pub log_weights: Vec<f64>,
    pub weights: Vec<f64>,
    /// `|sum μ(I_w) - 1|`.
    pub normalization_defect: f64,
    /// Smallest observed `μ(I_w) / exp(ψ^n(x) - n P)`.
    pub gibbs_c: f64,
    /// Largest observed `μ(I_w) / exp(ψ^n(x) - n P)`.
    pub gibbs_d: f64,
}

/// Markov approximation of the Gibbs measure of a normalized potential.
///
/// The Gibbs ratios are sampled at the periodic representative and at both
/// endpoints of every cylinder.
pub fn gibbs_weights(
    map: &CookieCutterMap,
    potential: &Potential,
    n: usize,
    m: usize,
) -> Result<GibbsApproximation> {
    map.check_level(n)?;
    let depth = effective_depth(map, potential, m)?;
    let gibbs = MarkovGibbs::new(&transfer_matrix(map, potential, depth)?)?;
    let p = gibbs.log_lambda();
    if p.abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized { pressure: p });
    }
    let log_weights = gibbs.log_weights_at(n);
    let weights: Vec<f64> = log_weights.iter().map(|l| l.exp()).collect();
    let normalization_defect = (sum_compensated(weights.iter().copied()) - 1.0).abs();
    let k = map.k();
    let (lo, hi) = (0..log_weights.len())
        .into_par_iter()
        .map(|i| {
            let word = Word::from_index(i, n, k);
            let x = map.periodic_point(&word).x;
            [x, 0.0, 1.0]
                .iter()
                .map(|&z| {
                    let orbit = map.orbit(&word, z);
                    log_weights[i]
                        - (potential.birkhoff_on_orbit(map, &word, &orbit) - n as f64 * p)
                })
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
                    (a.min(r), b.max(r))
                })
        })
        .reduce(
            || (f64::INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.min(b.0), a.1.max(b.1)),
        );
    Ok(GibbsApproximation {
        level: n,
        depth,
        log_weights,
        weights,
        normalization_defect,
        gibbs_c: lo.exp(),
        gibbs_d: hi.exp(),
    })
}

/// `sum_w μ(I_w) f(x_w)` with `x_w` the periodic representative of `I_w`.
pub fn measure_integral(
    map: &CookieCutterMap,
    gibbs: &GibbsApproximation,
    f: &Potential,
) -> Result<f64> {
    f.validate(map)?;
    let n = gibbs.level;
    let k = map.k();
    let terms: Vec<f64> = (0..gibbs.weights.len())
        .into_par_iter()
        .map(|i| {
            let word = Word::from_index(i, n, k);
            let x = map.periodic_point(&word).x;
            let y1 = if n == 1 {
                x
            } else {
                map.compose(&Word::from_index(i % k.pow(n as u32 - 1), n - 1, k), x)
            };
            gibbs.weights[i] * f.value_at(map, word.symbols()[0], y1)
        })
        .collect();
    Ok(sum_compensated(terms))
}
