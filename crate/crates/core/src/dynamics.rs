//! Cookie-cutter maps given by their inverse branches.
//!
//! A map `T` with `k` increasing or decreasing expanding branches is
//! described by the contractions `g_i = (T|I_i)^{-1}: [0,1] -> I_i`. The
//! basic interval of a word `w = w_1 ... w_n` is
//! `I_w = g_{w_1} ∘ ... ∘ g_{w_n}([0,1])`, and words are always enumerated in
//! lexicographic order, so the word with symbols `w` has index
//! `sum_i w_i k^{n-1-i}` (symbols are 0-based internally).

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::thermo::Potential;

const DERIVATIVE_SAMPLES: usize = 1 << 12;
const IMAGE_TOLERANCE: f64 = 1e-12;
const FIXED_POINT_TOLERANCE: f64 = 1e-15;
const FIXED_POINT_MAX_ITER: usize = 200;

/// One inverse branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// `g(x) = slope * x + intercept`
    Affine { slope: f64, intercept: f64 },
    /// `g(x) = (a x + b) / (c x + d)`
    Moebius { a: f64, b: f64, c: f64, d: f64 },
}

impl Branch {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Branch::Affine { slope, intercept } => slope * x + intercept,
            Branch::Moebius { a, b, c, d } => (a * x + b) / (c * x + d),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Branch::Affine { slope, .. } => slope,
            Branch::Moebius { a, b, c, d } => {
                let den = c * x + d;
                (a * d - b * c) / (den * den)
            }
        }
    }

    /// `(g(x) - g(y)) / (x - y)` in closed form, also valid for `x == y`.
    ///
    /// Used for interval lengths so that tiny cylinders keep full relative
    /// precision instead of suffering cancellation in `right - left`.
    pub fn difference_quotient(&self, x: f64, y: f64) -> f64 {
        match *self {
            Branch::Affine { slope, .. } => slope,
            Branch::Moebius { a, b, c, d } => (a * d - b * c) / ((c * x + d) * (c * y + d)),
        }
    }

    /// Inverse of the branch, i.e. `T` restricted to the branch image.
    pub fn inverse(&self, x: f64) -> f64 {
        match *self {
            Branch::Affine { slope, intercept } => (x - intercept) / slope,
            Branch::Moebius { a, b, c, d } => (b - d * x) / (c * x - a),
        }
    }

    /// `g([0,1])` as an ordered pair.
    pub fn image(&self) -> (f64, f64) {
        let (u, v) = (self.eval(0.0), self.eval(1.0));
        if u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }

    fn check_monotone(&self, index: usize) -> Result<()> {
        let ok = match *self {
            Branch::Affine { slope, intercept } => {
                slope != 0.0 && slope.is_finite() && intercept.is_finite()
            }
            Branch::Moebius { a, b, c, d } => {
                let det = a * d - b * c;
                // the pole -d/c must stay off [0,1]
                let den0 = d;
                let den1 = c + d;
                [a, b, c, d].iter().all(|v| v.is_finite())
                    && det != 0.0
                    && den0 != 0.0
                    && den1 != 0.0
                    && den0.signum() == den1.signum()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NonMonotone(index))
        }
    }
}

/// A branch together with its declared image interval.
///
/// When `image` is `None` the image is taken to be `g([0,1])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSpec {
    pub branch: Branch,
    pub image: Option<(f64, f64)>,
}

impl BranchSpec {
    pub fn affine(slope: f64, intercept: f64) -> Self {
        BranchSpec {
            branch: Branch::Affine { slope, intercept },
            image: None,
        }
    }

    pub fn moebius(a: f64, b: f64, c: f64, d: f64) -> Self {
        BranchSpec {
            branch: Branch::Moebius { a, b, c, d },
            image: None,
        }
    }

    pub fn with_image(mut self, lo: f64, hi: f64) -> Self {
        self.image = Some((lo, hi));
        self
    }
}

/// A validated cookie-cutter map.
#[derive(Debug, Clone, PartialEq)]
pub struct CookieCutterMap {
    branches: Vec<Branch>,
    images: Vec<(f64, f64)>,
    sup_derivative: Vec<f64>,
    inf_derivative: Vec<f64>,
}

impl CookieCutterMap {
    /// Validates the branches and samples the derivative bounds.
    pub fn new(specs: &[BranchSpec]) -> Result<Self> {
        if specs.len() < 2 {
            return Err(Error::TooFewBranches(specs.len()));
        }
        let mut images = Vec::with_capacity(specs.len());
        let mut sup_derivative = Vec::with_capacity(specs.len());
        let mut inf_derivative = Vec::with_capacity(specs.len());
        for (i, spec) in specs.iter().enumerate() {
            let g = spec.branch;
            g.check_monotone(i)?;
            let (lo_d, hi_d) = (0..=DERIVATIVE_SAMPLES)
                .map(|j| g.derivative(j as f64 / DERIVATIVE_SAMPLES as f64).abs())
                .fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            if hi_d >= 1.0 {
                return Err(Error::NotContracting {
                    branch: i,
                    sup_derivative: hi_d,
                });
            }
            let (lo, hi) = g.image();
            if lo < -IMAGE_TOLERANCE || hi > 1.0 + IMAGE_TOLERANCE {
                return Err(Error::ImageOutsideUnit { branch: i, lo, hi });
            }
            if let Some((dlo, dhi)) = spec.image {
                if (dlo - lo).abs() > IMAGE_TOLERANCE || (dhi - hi).abs() > IMAGE_TOLERANCE {
                    return Err(Error::ImageMismatch { branch: i, lo, hi });
                }
            }
            images.push((lo.max(0.0), hi.min(1.0)));
            sup_derivative.push(hi_d);
            inf_derivative.push(lo_d);
        }
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                let (a, b) = (images[i], images[j]);
                if a.0.max(b.0) < a.1.min(b.1) {
                    return Err(Error::OverlappingBranches {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        for i in 1..images.len() {
            if images[i].0 < images[i - 1].1 {
                return Err(Error::UnorderedBranches(i));
            }
        }
        Ok(CookieCutterMap {
            branches: specs.iter().map(|s| s.branch).collect(),
            images,
            sup_derivative,
            inf_derivative,
        })
    }

    pub fn k(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, symbol: usize) -> &Branch {
        &self.branches[symbol]
    }

    pub fn images(&self) -> &[(f64, f64)] {
        &self.images
    }

    /// Sampled `sup |g'|` over all branches.
    pub fn sup_derivative(&self) -> f64 {
        self.sup_derivative.iter().copied().fold(0.0, f64::max)
    }

    /// Sampled `inf |g'|` over all branches.
    pub fn inf_derivative(&self) -> f64 {
        self.inf_derivative
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn branch_derivative_bounds(&self, symbol: usize) -> (f64, f64) {
        (self.inf_derivative[symbol], self.sup_derivative[symbol])
    }

    /// Whether every branch is affine, so that `log|T'|` is constant on
    /// first-level intervals.
    pub fn is_affine(&self) -> bool {
        self.branches
            .iter()
            .all(|b| matches!(b, Branch::Affine { .. }))
    }

    /// Largest level whose cylinders are enumerated (`k^n <= 2^22`).
    pub fn max_level(&self) -> usize {
        max_exponent(self.k(), 1 << 22)
    }

    /// Largest transfer-matrix depth (`k^m <= 2^12`).
    pub fn max_depth(&self) -> usize {
        max_exponent(self.k(), 1 << 12)
    }

    pub fn check_level(&self, n: usize) -> Result<()> {
        let max = self.max_level();
        if n == 0 || n > max {
            return Err(Error::LevelTooLarge { level: n, max });
        }
        Ok(())
    }

    /// The symbol of the first-level interval containing `x`.
    pub fn symbol_of(&self, x: f64) -> Result<usize> {
        self.images
            .iter()
            .position(|&(lo, hi)| x >= lo - IMAGE_TOLERANCE && x <= hi + IMAGE_TOLERANCE)
            .ok_or(Error::PointOutsideRepeller(x))
    }

    /// `g_{w_1} ∘ ... ∘ g_{w_n}(x)`.
    pub fn compose(&self, word: &Word, x: f64) -> f64 {
        word.symbols()
            .iter()
            .rev()
            .fold(x, |y, &s| self.branches[s].eval(y))
    }

    /// Backward orbit `y_0, ..., y_n` with `y_n = z` and
    /// `y_j = g_{w_{j+1}}(y_{j+1})`, so that `T^j(y_0) = y_j`.
    pub fn orbit(&self, word: &Word, z: f64) -> Vec<f64> {
        let n = word.len();
        let mut ys = vec![0.0; n + 1];
        ys[n] = z;
        for j in (0..n).rev() {
            ys[j] = self.branches[word.symbols()[j]].eval(ys[j + 1]);
        }
        ys
    }

    /// Endpoints and log-length of `I_w`, the length computed as a product
    /// of difference quotients.
    pub fn cylinder(&self, word: &Word) -> (f64, f64, f64) {
        let (mut x, mut y, mut log_len) = (0.0_f64, 1.0_f64, 0.0_f64);
        for &s in word.symbols().iter().rev() {
            let g = &self.branches[s];
            log_len += g.difference_quotient(x, y).abs().ln();
            let (gx, gy) = (g.eval(x), g.eval(y));
            x = gx;
            y = gy;
        }
        (x.min(y), x.max(y), log_len)
    }

    pub fn periodic_point(&self, word: &Word) -> PeriodicPoint {
        let mut x = 0.5;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let next = self.compose(word, x);
            let done = (next - x).abs() < FIXED_POINT_TOLERANCE;
            x = next;
            if done {
                break;
            }
        }
        PeriodicPoint {
            x,
            word: word.clone(),
        }
    }

    /// All `k^n` basic intervals of level `n` in lexicographic order.
    pub fn basic_intervals(&self, n: usize) -> Result<Vec<BasicInterval>> {
        self.check_level(n)?;
        let level = self.cylinder_level(n)?;
        let k = self.k();
        Ok((0..level.len())
            .into_par_iter()
            .map(|i| {
                let word = Word::from_index(i, n, k);
                let rep_point = self.periodic_point(&word).x;
                BasicInterval {
                    left: level.left[i],
                    right: level.right[i],
                    length: level.log_length[i].exp(),
                    log_length: level.log_length[i],
                    rep_point,
                    word,
                }
            })
            .collect())
    }

    /// Endpoints and log-lengths of all level-`n` cylinders.
    pub fn cylinder_level(&self, n: usize) -> Result<CylinderLevel> {
        self.check_level(n)?;
        let mut level = CylinderLevel::first(self);
        while level.n < n {
            level = level.refine(self);
        }
        Ok(level)
    }

    /// The components of `[0,1]` minus the first-level images, as
    /// `(left, right)` pairs.
    pub fn base_gaps(&self) -> Vec<(f64, f64)> {
        let mut gaps = Vec::new();
        let mut cursor = 0.0;
        for &(lo, hi) in &self.images {
            if lo > cursor {
                gaps.push((cursor, lo));
            }
            cursor = hi;
        }
        if cursor < 1.0 {
            gaps.push((cursor, 1.0));
        }
        gaps
    }

    /// Gap lengths grouped by the stage that creates them: stage `n` removes
    /// `g_w(gap)` from every level-`(n-1)` interval `I_w`.
    pub fn gap_lengths_by_stage(&self, stages: usize) -> Result<Vec<Vec<f64>>> {
        if stages == 0 {
            return Err(Error::InvalidParameter(
                "gap stage count must be at least 1".into(),
            ));
        }
        if stages > self.max_level() + 1 {
            return Err(Error::LevelTooLarge {
                level: stages,
                max: self.max_level() + 1,
            });
        }
        let base = self.base_gaps();
        // (x, y, log length) of g_w(gap) for every word w of the previous stage
        let mut current: Vec<(f64, f64, f64)> =
            base.iter().map(|&(x, y)| (x, y, (y - x).ln())).collect();
        let mut out = Vec::with_capacity(stages);
        out.push(current.iter().map(|g| g.2.exp()).collect::<Vec<_>>());
        for _ in 1..stages {
            let len = current.len();
            current = (0..self.k() * len)
                .into_par_iter()
                .map(|i| {
                    let (x, y, l) = current[i % len];
                    let g = &self.branches[i / len];
                    (
                        g.eval(x),
                        g.eval(y),
                        l + g.difference_quotient(x, y).abs().ln(),
                    )
                })
                .collect();
            out.push(current.iter().map(|g| g.2.exp()).collect());
        }
        Ok(out)
    }

    /// Lengths of all gaps created by stages `1..=stages`, stage by stage.
    pub fn gap_lengths(&self, stages: usize) -> Result<Vec<f64>> {
        Ok(self
            .gap_lengths_by_stage(stages)?
            .into_iter()
            .flatten()
            .collect())
    }
}

/// Validates a list of branch specs into a map.
pub fn build_map(specs: &[BranchSpec]) -> Result<CookieCutterMap> {
    CookieCutterMap::new(specs)
}

/// `ψ^n(x) = ψ(x) + ψ(Tx) + ... + ψ(T^{n-1}x)` at the periodic point of `word`.
pub fn birkhoff_sum(map: &CookieCutterMap, potential: &Potential, word: &Word) -> Result<f64> {
    let x = map.periodic_point(word).x;
    potential.birkhoff(map, word, x)
}

fn max_exponent(k: usize, cap: usize) -> usize {
    let mut n = 0;
    let mut size = 1usize;
    while size.saturating_mul(k) <= cap {
        size *= k;
        n += 1;
    }
    n
}

/// A finite word over `{0, ..., k-1}`. Displayed 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    /// Builds a word from 0-based symbols.
    pub fn new(symbols: Vec<usize>, k: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        if let Some(&symbol) = symbols.iter().find(|&&s| s >= k) {
            return Err(Error::SymbolOutOfRange { symbol, k });
        }
        Ok(Word(symbols))
    }

    /// Builds a word from 1-based symbols, the usual way of writing them.
    pub fn one_based(symbols: &[usize], k: usize) -> Result<Self> {
        if let Some(&symbol) = symbols.iter().find(|&&s| s == 0 || s > k) {
            return Err(Error::SymbolOutOfRange { symbol, k });
        }
        Word::new(symbols.iter().map(|s| s - 1).collect(), k)
    }

    /// The word of length `n` with lexicographic index `index`.
    pub fn from_index(mut index: usize, n: usize, k: usize) -> Self {
        let mut symbols = vec![0; n];
        for slot in symbols.iter_mut().rev() {
            *slot = index % k;
            index /= k;
        }
        Word(symbols)
    }

    pub fn index(&self, k: usize) -> usize {
        self.0.iter().fold(0, |acc, &s| acc * k + s)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", s + 1)?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicInterval {
    pub word: Word,
    pub left: f64,
    pub right: f64,
    pub length: f64,
    pub log_length: f64,
    /// Periodic point with itinerary `word` repeated.
    pub rep_point: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPoint {
    pub x: f64,
    pub word: Word,
}

impl PeriodicPoint {
    pub fn period(&self) -> usize {
        self.word.len()
    }
}

/// Endpoints and log-lengths of every cylinder of one level, indexed
/// lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderLevel {
    pub n: usize,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub log_length: Vec<f64>,
}

impl CylinderLevel {
    pub fn first(map: &CookieCutterMap) -> Self {
        let mut level = CylinderLevel {
            n: 0,
            left: vec![0.0],
            right: vec![1.0],
            log_length: vec![0.0],
        };
        level = level.refine(map);
        level
    }

    /// The next level, obtained by prepending each symbol: `I_{s w} = g_s(I_w)`.
    pub fn refine(&self, map: &CookieCutterMap) -> Self {
        let len = self.left.len();
        let next: Vec<(f64, f64, f64)> = (0..map.k() * len)
            .into_par_iter()
            .map(|i| {
                let g = map.branch(i / len);
                let j = i % len;
                let (x, y) = (self.left[j], self.right[j]);
                let (gx, gy) = (g.eval(x), g.eval(y));
                let l = self.log_length[j] + g.difference_quotient(x, y).abs().ln();
                (gx.min(gy), gx.max(gy), l)
            })
            .collect();
        let mut level = CylinderLevel {
            n: self.n + 1,
            left: Vec::with_capacity(next.len()),
            right: Vec::with_capacity(next.len()),
            log_length: Vec::with_capacity(next.len()),
        };
        for (l, r, ll) in next {
            level.left.push(l);
            level.right.push(r);
            level.log_length.push(ll);
        }
        level
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}
