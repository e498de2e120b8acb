//! Complex polynomials in the frequency variable and their roots.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

const MAX_ABERTH_ITERS: usize = 500;

/// Polynomial with complex coefficients in ascending order of power.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    /// Builds a polynomial, dropping trailing exact zeros.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| C64::from(c)).collect())
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    /// `lead * prod (z - r)`.
    pub fn from_roots(roots: &[C64], lead: C64) -> Self {
        let mut p = Poly::constant(lead);
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, C64::from(1.0)]));
        }
        p
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> C64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == C64::new(0.0, 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn eval_real(&self, x: f64) -> C64 {
        self.eval(C64::from(x))
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(C64::new(0.0, 0.0));
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Polynomial whose coefficients are conjugated; on the real axis it
    /// evaluates to the conjugate of `self`.
    pub fn conj_coeffs(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let out = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or_default()
                    + other.coeffs.get(k).copied().unwrap_or_default()
            })
            .collect();
        Poly::new(out)
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `|P(x)|^2` on the real axis as a polynomial with real coefficients.
    pub fn abs_sq(&self) -> Poly {
        let p = self.mul(&self.conj_coeffs());
        Poly::new(p.coeffs.iter().map(|c| C64::from(c.re)).collect())
    }

    /// Largest relative magnitude of the odd-power or imaginary coefficients,
    /// which vanish for an even real polynomial.
    pub fn even_real_defect(&self) -> f64 {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 1 { c.norm() } else { c.im.abs() })
            .fold(0.0, f64::max)
            / scale
    }

    /// For an even polynomial `P(w) = Q(w^2)`, returns `Q`.
    pub fn even_to_square(&self) -> Poly {
        Poly::new(self.coeffs.iter().step_by(2).copied().collect())
    }

    /// All complex roots.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let n = self.degree();
        match n {
            0 => Ok(Vec::new()),
            1 => Ok(vec![-self.coeffs[0] / self.coeffs[1]]),
            2 => Ok(quadratic_roots(self.coeffs[2], self.coeffs[1], self.coeffs[0]).to_vec()),
            _ => aberth(self),
        }
    }
}

/// Roots of `a z^2 + b z + c` without cancellation.
pub fn quadratic_roots(a: C64, b: C64, c: C64) -> [C64; 2] {
    let disc = (b * b - a * c * 4.0).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 {
        -(b + disc) * 0.5
    } else {
        -(b - disc) * 0.5
    };
    if q.norm() == 0.0 {
        return [C64::new(0.0, 0.0); 2];
    }
    [q / a, c / q]
}

/// Aberth-Ehrlich simultaneous iteration followed by Newton polishing.
fn aberth(p: &Poly) -> Result<Vec<C64>> {
    let n = p.degree();
    let lead = p.leading();
    let monic: Vec<C64> = p.coeffs.iter().map(|&c| c / lead).collect();
    let monic = Poly::new(monic);
    let dp = monic.derivative();

    // Initial guesses on a circle scaled to the geometric root magnitude.
    let c0 = monic.coeffs[0].norm();
    let radius = if c0 > 0.0 {
        c0.powf(1.0 / n as f64)
    } else {
        1.0 + monic.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    };
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            C64::from_polar(radius, ang)
        })
        .collect();

    let spread = {
        let mags: Vec<f64> = monic
            .coeffs
            .iter()
            .map(|c| c.norm())
            .filter(|&m| m > 0.0)
            .collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    };

    let mut converged = false;
    for _ in 0..MAX_ABERTH_ITERS {
        let mut max_step = 0.0_f64;
        for i in 0..n {
            let pv = monic.eval(z[i]);
            let dv = dp.eval(z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let mut sum = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    sum += C64::from(1.0) / (z[i] - z[j]);
                }
            }
            let step = ratio / (C64::from(1.0) - ratio * sum);
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(f64::MIN_POSITIVE));
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged || z.iter().any(|r| !r.is_finite()) {
        return Err(Error::RootFinding {
            degree: n,
            iterations: MAX_ABERTH_ITERS,
            spread,
        });
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let dv = dp.eval(*r);
            if dv.norm() == 0.0 {
                break;
            }
            let step = monic.eval(*r) / dv;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    Ok(z)
}
