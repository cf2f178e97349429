//! Synthetic Re-Co data: the two linear worked examples, an XOR case and
//! custom linear responses over the same covariates.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Feature};
use crate::rng::{stream, tag};
use crate::{Error, Result};

/// Divisor of the X7 construction.
pub const X7_SCALE: f64 = 3.66;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example {
    /// Y = 0.8 X1 + X2 + 1.2 X3 + X11 + ε
    One,
    /// Y = 0.8 X1 + X2 + 1.2 X3 + ε
    Two,
    /// Y = X1 xor X2 for fair bits in a balanced, shuffled design.
    Xor,
    /// Y = Σ c_i X_i + ε over X1..X11 (missing coefficients are zero).
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub n: usize,
    pub seed: u64,
    /// Equicorrelation of X1..X6.
    pub rho: f64,
    pub sigma_eps: f64,
    pub example: Example,
}

impl SimSpec {
    pub fn new(example: Example, n: usize, seed: u64) -> Self {
        SimSpec {
            n,
            seed,
            rho: 0.7,
            sigma_eps: 0.25,
            example,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::ZeroRows);
        }
        // one-factor construction needs rho >= 0; the matrix itself is PD for rho > -0.2
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        if !(self.sigma_eps.is_finite() && self.sigma_eps >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma_eps must be non-negative, got {}",
                self.sigma_eps
            )));
        }
        if let Example::Custom(c) = &self.example {
            if c.len() > 11 || c.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidConfig(
                    "custom coefficients: at most 11 finite values".into(),
                ));
            }
        }
        Ok(())
    }
}

fn normals(seed: u64, index: u64, n: usize) -> Vec<f64> {
    let mut rng = stream(seed, tag::SIM, index);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Columns are Y, X1..X10; the hidden X11 is not emitted.
pub fn generate(spec: &SimSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n;
    if spec.example == Example::Xor {
        // balanced design: each (X1, X2) pair appears n/4 times, remainder drawn at random
        let mut rng = stream(spec.seed, tag::SIM, 100);
        let mut bits: Vec<(u8, u8)> = (0..n)
            .map(|i| {
                if i < n - n % 4 {
                    ((i % 2) as u8, (i / 2 % 2) as u8)
                } else {
                    (rng.random::<bool>() as u8, rng.random::<bool>() as u8)
                }
            })
            .collect();
        bits.shuffle(&mut rng);
        return Dataset::new(vec![
            Feature::categorical("Y", bits.iter().map(|(a, b)| a ^ b)).response(),
            Feature::categorical("X1", bits.iter().map(|b| b.0)),
            Feature::categorical("X2", bits.iter().map(|b| b.1)),
        ]);
    }
    // stream 0: common factor; 1..=6: idiosyncratic parts; 8..=11: X8..X11; 12: ε
    let idx: [u64; 12] = [0, 1, 2, 3, 4, 5, 6, 8, 9, 10, 11, 12];
    let mut draws = crate::par::map_indexed(idx.len(), |j| normals(spec.seed, idx[j], n)).into_iter();
    let z0 = draws.next().unwrap();
    let (a, b) = (libm::sqrt(spec.rho), libm::sqrt(1.0 - spec.rho));
    let mut x: Vec<Vec<f64>> = vec![Vec::new(); 12];
    for xi in x.iter_mut().take(7).skip(1) {
        let zi = draws.next().unwrap();
        *xi = z0.iter().zip(&zi).map(|(c, e)| a * c + b * e).collect();
    }
    for xi in x.iter_mut().skip(8) {
        *xi = draws.next().unwrap();
    }
    let eps = draws.next().unwrap();
    x[7] = (0..n)
        .map(|i| (x[1][i] + x[2][i] + x[3][i] + x[4][i] + x[11][i]) / X7_SCALE)
        .collect();
    let coef: Vec<f64> = match &spec.example {
        Example::One => vec![0.8, 1.0, 1.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        Example::Two => vec![0.8, 1.0, 1.2],
        Example::Custom(c) => c.clone(),
        Example::Xor => unreachable!(),
    };
    let y: Vec<f64> = (0..n)
        .map(|i| coef.iter().enumerate().map(|(j, c)| c * x[j + 1][i]).sum::<f64>() + spec.sigma_eps * eps[i])
        .collect();
    let mut cols = vec![Feature::continuous("Y", y).response()];
    for (j, xi) in x.into_iter().enumerate().take(11).skip(1) {
        cols.push(Feature::continuous(format!("X{j}"), xi));
    }
    Dataset::new(cols)
}

/// Names of the emitted covariates for the linear examples.
pub fn covariate_names() -> Vec<String> {
    (1..=10).map(|j| format!("X{j}")).collect()
}
