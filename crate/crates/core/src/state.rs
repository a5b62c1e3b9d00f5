use alloc::vec;
use alloc::vec::Vec;

use crate::discretization::DirichletOperator;
use crate::math::{abs, sup_norm};
use crate::{Error, Result};

/// A pair `U = (u, v)` of node-valued fields on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl StateField {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::GridMismatch { expected: u.len(), found: v.len() });
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("state field has non-finite entries".into()));
        }
        Ok(Self { u, v })
    }

    pub fn zeros(nodes: usize) -> Self {
        Self { u: vec![0.0; nodes], v: vec![0.0; nodes] }
    }

    /// Stacks `(u, v)` into one vector of length `2N`.
    pub fn from_flat(x: &[f64]) -> Self {
        let n = x.len() / 2;
        Self { u: x[..n].to_vec(), v: x[n..].to_vec() }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.u.len());
        x.extend_from_slice(&self.u);
        x.extend_from_slice(&self.v);
        x
    }

    pub fn nodes(&self) -> usize {
        self.u.len()
    }

    pub fn check_nodes(&self, expected: usize) -> Result<()> {
        if self.u.len() != expected || self.v.len() != expected {
            return Err(Error::GridMismatch { expected, found: self.u.len().max(self.v.len()) });
        }
        Ok(())
    }

    /// `‖u‖_∞ + ‖v‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.u) + sup_norm(&self.v)
    }

    /// `max(‖u‖_∞, ‖v‖_∞)`, the residual measure of the solvers.
    pub fn sup_norm_max(&self) -> f64 {
        sup_norm(&self.u).max(sup_norm(&self.v))
    }

    /// `‖u‖_{H₀¹} + ‖v‖_{H₀¹}` through the stiffness form.
    pub fn h_norm(&self, laplacian: &DirichletOperator) -> f64 {
        laplacian.h1_norm(&self.u) + laplacian.h1_norm(&self.v)
    }

    pub fn scaled(&self, p: f64) -> Self {
        Self { u: self.u.iter().map(|x| p * x).collect(), v: self.v.iter().map(|x| p * x).collect() }
    }

    pub fn abs(&self) -> Self {
        Self { u: self.u.iter().map(|x| abs(*x)).collect(), v: self.v.iter().map(|x| abs(*x)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            u: self.u.iter().zip(&other.u).map(|(a, b)| f(*a, *b)).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_v(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn u_positive(&self) -> bool {
        self.u.iter().all(|x| *x > 0.0)
    }

    pub fn v_positive(&self) -> bool {
        self.v.iter().all(|x| *x > 0.0)
    }

    pub fn is_positive(&self) -> bool {
        self.u_positive() && self.v_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| *x < 0.0)
    }

    /// Cosine between the stacked vectors.
    pub fn cosine(&self, other: &Self) -> f64 {
        let a = self.to_flat();
        let b = other.to_flat();
        let na = crate::math::norm2(&a);
        let nb = crate::math::norm2(&b);
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        crate::math::dot(&a, &b) / (na * nb)
    }
}
