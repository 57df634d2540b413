//! Gauss–Hermite rules and the truncated position operator of a harmonic trap.
//!
//! Both come from the same object: the Jacobi matrix of the Hermite
//! recurrence. In Fock space that matrix is `(b + b†)/√2`, so its eigenvectors
//! give the discrete-variable representation used to evaluate functions of
//! position on a truncated phonon basis.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights for `∫ f(t) e^{-t²} dt ≈ Σ w_i f(t_i)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub–Welsch construction with `n` nodes.
    pub fn new(n: usize) -> Result<Self> {
        let dvr = TrapPositionBasis::new(n, 0.0, std::f64::consts::FRAC_1_SQRT_2)?;
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let weights = (0..n)
            .map(|k| sqrt_pi * dvr.transform[(0, k)].powi(2))
            .collect();
        Ok(Self {
            nodes: dvr.nodes,
            weights,
        })
    }

    /// Average of `f` over the trap ground-state density centred at `x0`
    /// with standard deviation `sigma`.
    pub fn ground_state_average(&self, x0: f64, sigma: f64, f: impl Fn(f64) -> f64) -> f64 {
        let scale = std::f64::consts::SQRT_2 * sigma;
        let total: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(x0 + scale * t))
            .sum();
        total / std::f64::consts::PI.sqrt()
    }
}

/// Eigenbasis of the truncated position operator `x0 + η (b + b†)` on
/// `dim` Fock states.
///
/// Columns of `transform` are eigenvectors; `nodes` the matching positions.
#[derive(Debug, Clone)]
pub struct TrapPositionBasis {
    pub nodes: Vec<f64>,
    pub transform: Mat<f64>,
}

impl TrapPositionBasis {
    pub fn new(dim: usize, x0: f64, eta_ld: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("basis dimension must be positive".into()));
        }
        let x = Mat::<f64>::from_fn(dim, dim, |i, j| {
            if i == j {
                x0
            } else if i + 1 == j {
                eta_ld * (j as f64).sqrt()
            } else if j + 1 == i {
                eta_ld * (i as f64).sqrt()
            } else {
                0.0
            }
        });
        let evd = x
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let mut transform = evd.U().to_owned();
        // fix the sign convention so the ground-state row is non-negative
        for k in 0..dim {
            if transform[(0, k)] < 0.0 {
                for i in 0..dim {
                    transform[(i, k)] = -transform[(i, k)];
                }
            }
        }
        let nodes = evd.S().column_vector().iter().copied().collect();
        Ok(Self { nodes, transform })
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Matrix of `f(x̂)` in the Fock basis.
    pub fn operator(&self, f: impl Fn(f64) -> Complex64) -> Mat<Complex64> {
        let dim = self.dim();
        let values: Vec<Complex64> = self.nodes.iter().map(|&x| f(x)).collect();
        Mat::from_fn(dim, dim, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, v) in values.iter().enumerate() {
                acc += v * (self.transform[(i, k)] * self.transform[(j, k)]);
            }
            acc
        })
    }

    /// Real-valued variant of [`operator`](Self::operator).
    pub fn real_operator(&self, f: impl Fn(f64) -> f64) -> Mat<f64> {
        let dim = self.dim();
        let values: Vec<f64> = self.nodes.iter().map(|&x| f(x)).collect();
        Mat::from_fn(dim, dim, |i, j| {
            values
                .iter()
                .enumerate()
                .map(|(k, v)| v * self.transform[(i, k)] * self.transform[(j, k)])
                .sum()
        })
    }
}
