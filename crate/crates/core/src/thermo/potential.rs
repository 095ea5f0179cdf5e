use crate::dynamics::{CookieCutterMap, Word};
use crate::error::{Error, Result};
use crate::numeric::sum_compensated;

/// A Hölder function on the repeller.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// Constant on each first-level interval, one value per branch symbol.
    LocallyConstant(Vec<f64>),
    /// `φ = -log|T'|`.
    LogDerivative,
    /// `c1 * first + c2 * second + constant`.
    Combination(Box<Combination>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    pub c1: f64,
    pub first: Potential,
    pub c2: f64,
    pub second: Potential,
    pub constant: f64,
}

impl Potential {
    /// `log p_i` on the `i`-th branch; the Gibbs measure is Bernoulli `(p_1, ..., p_k)`.
    pub fn bernoulli(probabilities: &[f64]) -> Self {
        Potential::LocallyConstant(probabilities.iter().map(|p| p.ln()).collect())
    }

    pub fn constant(value: f64) -> Self {
        Potential::combination(
            0.0,
            Potential::LogDerivative,
            0.0,
            Potential::LogDerivative,
            value,
        )
    }

    pub fn combination(
        c1: f64,
        first: Potential,
        c2: f64,
        second: Potential,
        constant: f64,
    ) -> Self {
        Potential::Combination(Box::new(Combination {
            c1,
            first,
            c2,
            second,
            constant,
        }))
    }

    /// `self + c`.
    pub fn shifted(&self, c: f64) -> Self {
        Potential::combination(1.0, self.clone(), 0.0, Potential::LogDerivative, c)
    }

    /// `(s - ξα) φ + ξ ψ`, the family behind the multifractal spectrum.
    pub fn spectrum_family(psi: &Potential, s: f64, xi: f64, alpha: f64) -> Self {
        Potential::combination(
            s - xi * alpha,
            Potential::LogDerivative,
            xi,
            psi.clone(),
            0.0,
        )
    }

    /// `ψ - α φ`.
    pub fn regularity_observable(psi: &Potential, alpha: f64) -> Self {
        Potential::combination(1.0, psi.clone(), -alpha, Potential::LogDerivative, 0.0)
    }

    pub fn validate(&self, map: &CookieCutterMap) -> Result<()> {
        match self {
            Potential::LocallyConstant(values) => {
                if values.len() != map.k() {
                    return Err(Error::PotentialArity {
                        expected: map.k(),
                        got: values.len(),
                    });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "locally constant potential values must be finite".into(),
                    ));
                }
                Ok(())
            }
            Potential::LogDerivative => Ok(()),
            Potential::Combination(c) => {
                if !(c.c1.is_finite() && c.c2.is_finite() && c.constant.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "combination coefficients must be finite".into(),
                    ));
                }
                c.first.validate(map)?;
                c.second.validate(map)
            }
        }
    }

    /// Whether the potential only depends on the first symbol of the coding.
    pub fn is_locally_constant(&self, map: &CookieCutterMap) -> bool {
        match self {
            Potential::LocallyConstant(_) => true,
            Potential::LogDerivative => map.is_affine(),
            Potential::Combination(c) => {
                (c.c1 == 0.0 || c.first.is_locally_constant(map))
                    && (c.c2 == 0.0 || c.second.is_locally_constant(map))
            }
        }
    }

    /// Value at `g_symbol(y)`.
    pub fn value_at(&self, map: &CookieCutterMap, symbol: usize, y: f64) -> f64 {
        match self {
            Potential::LocallyConstant(values) => values[symbol],
            Potential::LogDerivative => map.branch(symbol).derivative(y).abs().ln(),
            Potential::Combination(c) => {
                let mut v = c.constant;
                if c.c1 != 0.0 {
                    v += c.c1 * c.first.value_at(map, symbol, y);
                }
                if c.c2 != 0.0 {
                    v += c.c2 * c.second.value_at(map, symbol, y);
                }
                v
            }
        }
    }

    /// Value at a point of the first-level intervals.
    pub fn eval(&self, map: &CookieCutterMap, x: f64) -> Result<f64> {
        let symbol = map.symbol_of(x)?;
        let y = map.branch(symbol).inverse(x);
        Ok(self.value_at(map, symbol, y))
    }

    /// `ψ^n(y_0)` where `y_0 = g_w(z)`, i.e. the Birkhoff sum along the orbit
    /// that follows the itinerary `w` and then lands on `z`.
    ///
    /// Combinations are summed componentwise, so the result is exactly the
    /// same linear combination of the component sums.
    pub fn birkhoff(&self, map: &CookieCutterMap, word: &Word, z: f64) -> Result<f64> {
        self.validate(map)?;
        let orbit = map.orbit(word, z);
        Ok(self.birkhoff_on_orbit(map, word, &orbit))
    }

    pub(crate) fn birkhoff_on_orbit(
        &self,
        map: &CookieCutterMap,
        word: &Word,
        orbit: &[f64],
    ) -> f64 {
        let symbols = word.symbols();
        match self {
            Potential::LocallyConstant(values) => {
                sum_compensated(symbols.iter().map(|&s| values[s]))
            }
            Potential::LogDerivative => sum_compensated(
                symbols
                    .iter()
                    .enumerate()
                    .map(|(j, &s)| map.branch(s).derivative(orbit[j + 1]).abs().ln()),
            ),
            Potential::Combination(c) => {
                let mut v = c.constant * symbols.len() as f64;
                if c.c1 != 0.0 {
                    v += c.c1 * c.first.birkhoff_on_orbit(map, word, orbit);
                }
                if c.c2 != 0.0 {
                    v += c.c2 * c.second.birkhoff_on_orbit(map, word, orbit);
                }
                v
            }
        }
    }

    /// Values at the periodic representatives of all depth-`m` cylinders,
    /// in lexicographic order.
    pub fn sample(&self, map: &CookieCutterMap, m: usize) -> Result<CylinderSample> {
        use rayon::prelude::*;
        self.validate(map)?;
        let max = map.max_depth();
        if m == 0 || m > max {
            return Err(Error::DepthTooLarge { depth: m, max });
        }
        let k = map.k();
        let size = k.pow(m as u32);
        let values = if self.is_locally_constant(map) {
            (0..size)
                .map(|i| self.value_at(map, i / k.pow(m as u32 - 1), 0.0))
                .collect()
        } else {
            (0..size)
                .into_par_iter()
                .map(|i| {
                    let word = Word::from_index(i, m, k);
                    let x = map.periodic_point(&word).x;
                    // T(x) for the periodic point x of the word
                    let y1 = if m == 1 {
                        x
                    } else {
                        map.compose(&Word::from_index(i % k.pow(m as u32 - 1), m - 1, k), x)
                    };
                    self.value_at(map, word.symbols()[0], y1)
                })
                .collect()
        };
        Ok(CylinderSample {
            k,
            depth: m,
            values,
        })
    }
}

/// A potential sampled once per depth-`m` cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSample {
    pub k: usize,
    pub depth: usize,
    pub values: Vec<f64>,
}
