//! Fixed-size 2x2 algebra for phase-space covariances and gains.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Real 2x2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

/// Real 2-vector.
pub type Vec2 = [f64; 2];

/// Complex 2-vector.
pub type CVec2 = [C64; 2];

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2([[a, 0.0], [0.0, d]])
    }

    pub fn from_cols(c0: Vec2, c1: Vec2) -> Self {
        Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
    }

    pub fn outer(u: Vec2, v: Vec2) -> Self {
        Mat2([[u[0] * v[0], u[0] * v[1]], [u[1] * v[0], u[1] * v[1]]])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2([
            [m[1][1] / d, -m[0][1] / d],
            [-m[1][0] / d, m[0][0] / d],
        ]))
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Quadratic form `v^T M v`.
    pub fn quad(&self, v: Vec2) -> f64 {
        let w = self.mul_vec(v);
        v[0] * w[0] + v[1] * w[1]
    }

    /// Symmetric part `(M + M^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        (*self + self.transpose()).scale(0.5)
    }

    pub fn asymmetry(&self) -> f64 {
        (self.0[0][1] - self.0[1][0]).abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |a, &x| a.max(x.abs()))
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn sym_eigenvalues(&self) -> [f64; 2] {
        let s = self.symmetrized();
        let (a, b, d) = (s.0[0][0], s.0[0][1], s.0[1][1]);
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mean - r, mean + r]
    }

    /// Eigen-decomposition of the symmetric part: ascending eigenvalues with
    /// unit eigenvectors (columns).
    pub fn sym_eigen(&self) -> ([f64; 2], [Vec2; 2]) {
        let s = self.symmetrized();
        let (a, b, d) = (s.0[0][0], s.0[0][1], s.0[1][1]);
        let vals = self.sym_eigenvalues();
        let theta = 0.5 * (2.0 * b).atan2(a - d);
        let (sn, cs) = theta.sin_cos();
        // (cs, sn) is the eigenvector of the larger eigenvalue.
        let big = [cs, sn];
        let small = [-sn, cs];
        (vals, [small, big])
    }

    /// Symmetric positive-definite square root.
    pub fn sqrt_spd(&self) -> Option<Self> {
        let (vals, vecs) = self.sym_eigen();
        if vals[0] < 0.0 {
            return None;
        }
        let mut out = Mat2::ZERO;
        for k in 0..2 {
            out = out + Mat2::outer(vecs[k], vecs[k]).scale(vals[k].sqrt());
        }
        Some(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(m)
    }
}

/// Complex 2x2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat2(pub [[C64; 2]; 2]);

impl CMat2 {
    pub fn from_real(m: Mat2) -> Self {
        let r = m.0;
        CMat2([
            [C64::from(r[0][0]), C64::from(r[0][1])],
            [C64::from(r[1][0]), C64::from(r[1][1])],
        ])
    }

    /// `s I - M` for complex scalar `s`.
    pub fn shifted_neg(s: C64, m: Mat2) -> Self {
        let r = m.0;
        CMat2([
            [s - r[0][0], C64::from(-r[0][1])],
            [C64::from(-r[1][0]), s - r[1][1]],
        ])
    }

    pub fn inverse(&self) -> Option<Self> {
        let m = &self.0;
        let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        Some(CMat2([
            [m[1][1] / d, -m[0][1] / d],
            [-m[1][0] / d, m[0][0] / d],
        ]))
    }

    pub fn mul_vec(&self, v: CVec2) -> CVec2 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }
}

/// Real and imaginary parts of a complex 2-vector as separate real vectors.
pub fn split(v: CVec2) -> (Vec2, Vec2) {
    ([v[0].re, v[1].re], [v[0].im, v[1].im])
}

pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}
