//! Truncated power series with exact rational coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    X,
    H,
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::X => write!(f, "x"),
            Variable::H => write!(f, "h"),
        }
    }
}

pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses "num/den" or a bare integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSeries {
    pub variable: Variable,
    pub coeffs: Vec<BigRational>,
}

impl RationalSeries {
    pub fn new(variable: Variable, coeffs: Vec<BigRational>) -> Self {
        RationalSeries { variable, coeffs }
    }

    pub fn zero(variable: Variable, max_order: usize) -> Self {
        RationalSeries {
            variable,
            coeffs: vec![BigRational::zero(); max_order + 1],
        }
    }

    pub fn from_ratios(variable: Variable, pairs: &[(i64, i64)]) -> Self {
        RationalSeries {
            variable,
            coeffs: pairs.iter().map(|&(n, d)| ratio(n, d)).collect(),
        }
    }

    pub fn max_order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn truncate(&self, max_order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(max_order + 1, BigRational::zero());
        RationalSeries::new(self.variable, coeffs)
    }

    pub fn add(&self, rhs: &RationalSeries) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalSeries::new(
            self.variable,
            (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect(),
        )
    }

    pub fn sub(&self, rhs: &RationalSeries) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalSeries::new(
            self.variable,
            (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect(),
        )
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RationalSeries::new(self.variable, self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Product truncated at the shorter of the two orders.
    pub fn mul(&self, rhs: &RationalSeries) -> Self {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            for (j, b) in rhs.coeffs.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        RationalSeries::new(self.variable, out)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(k.into()))
            .collect();
        RationalSeries::new(self.variable, coeffs)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.to_f64().iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "variable": self.variable,
            "coefficients": self.coeffs.iter().map(format_rational).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let variable: Variable = serde_json::from_value(v["variable"].clone())?;
        let coeffs = v["coefficients"]
            .as_array()
            .ok_or_else(|| Error::InvalidArgument("coefficients must be an array".into()))?
            .iter()
            .map(|c| {
                c.as_str()
                    .ok_or_else(|| Error::InvalidArgument("coefficient must be a string".into()))
                    .and_then(parse_rational)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RationalSeries::new(variable, coeffs))
    }
}

impl fmt::Display for RationalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c}){}", self.variable)?,
                _ => write!(f, "({c}){}^{k}", self.variable)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
