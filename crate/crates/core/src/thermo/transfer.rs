use crate::dynamics::CookieCutterMap;
use crate::error::{Error, Result};
use crate::numeric::{brent, sum_compensated};
use crate::thermo::potential::{CylinderSample, Potential};

const POWER_TOLERANCE: f64 = 1e-13;
const POWER_MAX_ITER: usize = 100_000;

/// The Ruelle operator restricted to functions constant on depth-`m`
/// cylinders.
///
/// Entry `(u, v)` is `exp ψ(x_v)` when the first `m-1` symbols of `u` are the
/// last `m-1` symbols of `v` (so `T` maps the cylinder `v` over `u`), and 0
/// otherwise. Only the `k^m` log-weights are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    k: usize,
    depth: usize,
    log_weights: Vec<f64>,
}

impl TransferMatrix {
    pub fn from_sample(sample: &CylinderSample) -> Self {
        TransferMatrix {
            k: sample.k,
            depth: sample.depth,
            log_weights: sample.values.clone(),
        }
    }

    pub fn from_log_weights(k: usize, depth: usize, log_weights: Vec<f64>) -> Result<Self> {
        if depth == 0 || log_weights.len() != k.pow(depth as u32) {
            return Err(Error::InvalidParameter(format!(
                "{} log-weights do not fit depth {depth} over {k} symbols",
                log_weights.len()
            )));
        }
        Ok(TransferMatrix {
            k,
            depth,
            log_weights,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.log_weights.len()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    fn block(&self) -> usize {
        self.dim() / self.k
    }

    pub fn entry(&self, u: usize, v: usize) -> f64 {
        if v % self.block() == u / self.k {
            self.log_weights[v].exp()
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|u| (0..self.dim()).map(|v| self.entry(u, v)).collect())
            .collect()
    }

    /// `y = M h` with the weights `w` (already scaled).
    fn apply(&self, w: &[f64], h: &[f64], y: &mut [f64]) {
        let block = self.block();
        for c in 0..block {
            let mut z = 0.0;
            for s in 0..self.k {
                let v = s * block + c;
                z += w[v] * h[v];
            }
            for t in 0..self.k {
                y[c * self.k + t] = z;
            }
        }
    }

    /// `y = M^T l`.
    fn apply_transpose(&self, w: &[f64], l: &[f64], y: &mut [f64]) {
        let block = self.block();
        for (v, out) in y.iter_mut().enumerate() {
            let base = (v % block) * self.k;
            let z: f64 = l[base..base + self.k].iter().sum();
            *out = w[v] * z;
        }
    }

    /// Leading eigenvalue and positive eigenvectors by power iteration.
    pub fn leading_eigen(&self, with_left: bool) -> Result<PerronEigen> {
        let shift = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::InvalidParameter(
                "transfer matrix weights must be finite".into(),
            ));
        }
        let w: Vec<f64> = self.log_weights.iter().map(|l| (l - shift).exp()).collect();
        let (lambda, right, residual, iterations) = power_iterate(
            self.dim(),
            |h, y| self.apply(&w, h, y),
            "right Perron eigenvector",
        )?;
        let left = if with_left {
            Some(
                power_iterate(
                    self.dim(),
                    |l, y| self.apply_transpose(&w, l, y),
                    "left Perron eigenvector",
                )?
                .1,
            )
        } else {
            None
        };
        Ok(PerronEigen {
            log_lambda: lambda.ln() + shift,
            right,
            left,
            residual,
            iterations,
        })
    }
}

fn power_iterate<F>(dim: usize, apply: F, what: &'static str) -> Result<(f64, Vec<f64>, f64, usize)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut h = vec![1.0 / dim as f64; dim];
    let mut y = vec![0.0; dim];
    let mut previous = f64::NAN;
    for iteration in 1..=POWER_MAX_ITER {
        apply(&h, &mut y);
        let lambda = sum_compensated(y.iter().copied());
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::NoConvergence {
                what,
                iterations: iteration,
            });
        }
        let residual =
            sum_compensated(y.iter().zip(&h).map(|(a, b)| (a - lambda * b).abs())) / lambda;
        for (hi, yi) in h.iter_mut().zip(&y) {
            *hi = yi / lambda;
        }
        if residual < POWER_TOLERANCE && (lambda - previous).abs() <= POWER_TOLERANCE * lambda {
            return Ok((lambda, h, residual, iteration));
        }
        previous = lambda;
    }
    Err(Error::NoConvergence {
        what,
        iterations: POWER_MAX_ITER,
    })
}

/// Leading eigen-data of a transfer matrix. The eigenvectors are normalized
/// to unit 1-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronEigen {
    pub log_lambda: f64,
    pub right: Vec<f64>,
    pub left: Option<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
}

impl PerronEigen {
    /// Weights `l_v h_v / sum l h` of the equilibrium state on depth-`m`
    /// cylinders. `sum_v f_v * weight_v` is the derivative of `log λ` in the
    /// direction of the log-weights `f`.
    pub fn equilibrium(&self) -> Vec<f64> {
        let left = self
            .left
            .as_ref()
            .expect("equilibrium needs the left eigenvector");
        let z = sum_compensated(left.iter().zip(&self.right).map(|(l, h)| l * h));
        left.iter()
            .zip(&self.right)
            .map(|(l, h)| l * h / z)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureResult {
    pub value: f64,
    pub depth: usize,
    pub lambda: f64,
    pub residual: f64,
    /// `|P_m - P_{m-1}|`, zero when the potential is locally constant (the
    /// discretization is then exact).
    pub truncation_error: f64,
}

/// Depth at which `potential` is sampled: 1 when it only depends on the first
/// symbol, `m` otherwise.
pub fn effective_depth(map: &CookieCutterMap, potential: &Potential, m: usize) -> Result<usize> {
    let max = map.max_depth();
    if m == 0 || m > max {
        return Err(Error::DepthTooLarge { depth: m, max });
    }
    Ok(if potential.is_locally_constant(map) {
        1
    } else {
        m
    })
}

pub fn transfer_matrix(
    map: &CookieCutterMap,
    potential: &Potential,
    m: usize,
) -> Result<TransferMatrix> {
    Ok(TransferMatrix::from_sample(&potential.sample(map, m)?))
}

pub fn pressure(map: &CookieCutterMap, potential: &Potential, m: usize) -> Result<PressureResult> {
    let depth = effective_depth(map, potential, m)?;
    let eig = transfer_matrix(map, potential, depth)?.leading_eigen(false)?;
    let truncation_error = if depth == 1 || m == 1 {
        0.0
    } else {
        let coarse = transfer_matrix(map, potential, m - 1)?.leading_eigen(false)?;
        (eig.log_lambda - coarse.log_lambda).abs()
    };
    Ok(PressureResult {
        value: eig.log_lambda,
        depth: m,
        lambda: eig.log_lambda.exp(),
        residual: eig.residual,
        truncation_error,
    })
}

/// `ψ - P(ψ)`.
pub fn normalize(map: &CookieCutterMap, potential: &Potential, m: usize) -> Result<Potential> {
    let p = pressure(map, potential, m)?.value;
    Ok(if p == 0.0 {
        potential.clone()
    } else {
        potential.shifted(-p)
    })
}

/// Two potentials sampled once, for repeated pressure evaluations of
/// `a * first + b * second`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFamily {
    k: usize,
    depth: usize,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl LinearFamily {
    pub fn new(
        map: &CookieCutterMap,
        first: &Potential,
        second: &Potential,
        m: usize,
    ) -> Result<Self> {
        let both = Potential::combination(1.0, first.clone(), 1.0, second.clone(), 0.0);
        let depth = effective_depth(map, &both, m)?;
        Ok(LinearFamily {
            k: map.k(),
            depth,
            first: first.sample(map, depth)?.values,
            second: second.sample(map, depth)?.values,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn matrix(&self, a: f64, b: f64) -> TransferMatrix {
        let log_weights = self
            .first
            .iter()
            .zip(&self.second)
            .map(|(f, g)| a * f + b * g)
            .collect();
        TransferMatrix {
            k: self.k,
            depth: self.depth,
            log_weights,
        }
    }

    /// `P(a * first + b * second)`.
    pub fn pressure(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.matrix(a, b).leading_eigen(false)?.log_lambda)
    }

    /// `(∫ first dμ, ∫ second dμ)` for the equilibrium state `μ` of
    /// `a * first + b * second`, which are the partial derivatives of the
    /// discrete pressure.
    pub fn means(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        let eq = self.matrix(a, b).leading_eigen(true)?.equilibrium();
        let f = sum_compensated(eq.iter().zip(&self.first).map(|(m, v)| m * v));
        let g = sum_compensated(eq.iter().zip(&self.second).map(|(m, v)| m * v));
        Ok((f, g))
    }

    /// Range of the sampled values of `first`.
    pub fn first_range(&self) -> (f64, f64) {
        range(&self.first)
    }

    pub fn second_range(&self) -> (f64, f64) {
        range(&self.second)
    }

    /// Solves `P(a * first + b * second) = 0` and returns `a + offset`; the
    /// root finder works in the shifted variable so its tolerance applies to
    /// the returned value. Requires `first < 0` everywhere, which makes the
    /// pressure strictly decreasing in `a`.
    pub fn zero_in_first(&self, b: f64, offset: f64) -> Result<f64> {
        let (lo, hi) = self.first_range();
        if hi >= 0.0 {
            return Err(Error::BracketFailure(format!(
                "first potential is not negative (max sample {hi})"
            )));
        }
        let p0 = self.pressure(0.0, b)?;
        if p0 == 0.0 {
            return Ok(offset);
        }
        // P(a) - P(0) lies between a*lo and a*hi, so the root is between
        // -P0/lo and -P0/hi.
        let (r1, r2) = (-p0 / lo, -p0 / hi);
        let (mut left, mut right) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let pad = 1e-9 * (1.0 + left.abs().max(right.abs()));
        left -= pad;
        right += pad;
        brent(
            |x| self.pressure(x - offset, b),
            left + offset,
            right + offset,
            1e-15,
            300,
        )
    }
}

fn range(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Hausdorff dimension of the repeller: the root of `s -> P(s φ)`.
pub fn solve_bowen(map: &CookieCutterMap, m: usize) -> Result<f64> {
    let family = LinearFamily::new(map, &Potential::LogDerivative, &Potential::constant(0.0), m)?;
    let p0 = family.pressure(0.0, 0.0)?;
    if p0 <= 0.0 {
        return Err(Error::BracketFailure(format!(
            "P(0) = {p0} is not positive"
        )));
    }
    family.zero_in_first(0.0, 0.0)
}
