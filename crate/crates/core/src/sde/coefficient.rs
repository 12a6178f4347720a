use alloc::vec::Vec;

use crate::grid::SpaceTimeField;

/// A coefficient evaluable at any `(t, x)`: a drift (`len = d`) or a
/// diffusion matrix (`len = d*d`, row-major).
pub trait Coefficient: Sync {
    fn len(&self) -> usize;

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<C: Coefficient + ?Sized> Coefficient for &C {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (**self).eval(t, x, out)
    }
}

/// Grid fields are interpolated (multilinear in space, linear in time).
impl Coefficient for SpaceTimeField {
    fn len(&self) -> usize {
        self.components()
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        self.evaluate_into(t, x, out)
    }
}

/// Closed-form coefficient.
pub struct FnCoefficient<F> {
    len: usize,
    f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64]) + Sync> FnCoefficient<F> {
    pub fn new(len: usize, f: F) -> Self {
        Self { len, f }
    }
}

impl<F: Fn(f64, &[f64], &mut [f64]) + Sync> Coefficient for FnCoefficient<F> {
    fn len(&self) -> usize {
        self.len
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.f)(t, x, out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constant(pub Vec<f64>);

impl Constant {
    pub fn zero(len: usize) -> Self {
        Constant(alloc::vec![0.0; len])
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = alloc::vec![0.0; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = 1.0;
        }
        Constant(m)
    }
}

impl Coefficient for Constant {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn eval(&self, _t: f64, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.0);
    }
}
