//! Rectangular phase-space grids holding Wigner functions in ledger units.

use crate::units::{PURITY_SCALE, WIGNER_BOUND};
use serde::{Deserialize, Serialize};

/// Uniformly spaced axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    /// `len` points from `lo` to `hi` inclusive.
    pub fn linspace(lo: f64, hi: f64, len: usize) -> Self {
        assert!(len >= 2, "axis needs at least two points");
        Axis {
            start: lo,
            step: (hi - lo) / (len - 1) as f64,
            len,
        }
    }

    /// Symmetric axis `center +- half_width`.
    pub fn centered(center: f64, half_width: f64, len: usize) -> Self {
        Axis::linspace(center - half_width, center + half_width, len)
    }

    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }
}

/// Real Wigner function `W(X, P)` sampled on a rectangular grid.
///
/// `values[ix * p_axis.len + ip]` holds `W(x_axis[ix], p_axis[ip])`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x_axis: Axis,
    pub p_axis: Axis,
    pub values: Vec<f64>,
}

/// Location and value of the grid minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMin {
    pub value: f64,
    pub x: f64,
    pub p: f64,
}

impl WignerGrid {
    pub fn from_fn<F: Fn(f64, f64) -> f64>(x_axis: Axis, p_axis: Axis, f: F) -> Self {
        let mut values = Vec::with_capacity(x_axis.len * p_axis.len);
        for i in 0..x_axis.len {
            let x = x_axis.at(i);
            for j in 0..p_axis.len {
                values.push(f(x, p_axis.at(j)));
            }
        }
        WignerGrid {
            x_axis,
            p_axis,
            values,
        }
    }

    #[inline]
    pub fn get(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p_axis.len + ip]
    }

    pub fn cell_area(&self) -> f64 {
        self.x_axis.step * self.p_axis.step
    }

    /// Riemann sum of `W dX dP`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn min(&self) -> GridMin {
        let (k, &value) = self
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        let (ix, ip) = (k / self.p_axis.len, k % self.p_axis.len);
        GridMin {
            value,
            x: self.x_axis.at(ix),
            p: self.p_axis.at(ip),
        }
    }

    pub fn argmax(&self) -> GridMin {
        let (k, &value) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        let (ix, ip) = (k / self.p_axis.len, k % self.p_axis.len);
        GridMin {
            value,
            x: self.x_axis.at(ix),
            p: self.p_axis.at(ip),
        }
    }

    /// `sum |min(W, 0)| dX dP`.
    pub fn negative_volume(&self) -> f64 {
        self.values.iter().map(|&w| (-w).max(0.0)).sum::<f64>() * self.cell_area()
    }

    /// `4 pi sum W^2 dX dP`, equal to one for pure states.
    pub fn purity(&self) -> f64 {
        PURITY_SCALE * self.values.iter().map(|w| w * w).sum::<f64>() * self.cell_area()
    }

    /// Position marginal `integral W dP` at every X sample.
    pub fn marginal_x(&self) -> Vec<f64> {
        let np = self.p_axis.len;
        self.values
            .chunks(np)
            .map(|row| row.iter().sum::<f64>() * self.p_axis.step)
            .collect()
    }

    /// Momentum marginal `integral W dX` at every P sample.
    pub fn marginal_p(&self) -> Vec<f64> {
        let np = self.p_axis.len;
        let mut out = vec![0.0; np];
        for row in self.values.chunks(np) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += w;
            }
        }
        out.iter().map(|s| s * self.x_axis.step).collect()
    }

    /// Mean `(X, P)`.
    pub fn mean(&self) -> [f64; 2] {
        let area = self.cell_area();
        let (mut mx, mut mp) = (0.0, 0.0);
        for ix in 0..self.x_axis.len {
            let x = self.x_axis.at(ix);
            for ip in 0..self.p_axis.len {
                let w = self.get(ix, ip);
                mx += w * x;
                mp += w * self.p_axis.at(ip);
            }
        }
        [mx * area, mp * area]
    }

    /// `sum |W_a - W_b| dX dP` for grids sharing the same axes.
    pub fn l1_distance(&self, other: &WignerGrid) -> f64 {
        assert_eq!(self.x_axis, other.x_axis, "x axes differ");
        assert_eq!(self.p_axis, other.p_axis, "p axes differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.cell_area()
    }

    pub fn max_abs_difference(&self, other: &WignerGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// True when every sample lies within the Wigner bound `1 / (2 pi)`,
    /// up to `slack`.
    pub fn within_bound(&self, slack: f64) -> bool {
        self.values.iter().all(|w| w.abs() <= WIGNER_BOUND + slack)
    }
}
