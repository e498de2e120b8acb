use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::params::DerivedScales;
use crate::poly::{quadratic_roots, Poly};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, SQRT_2};

/// Stationary linear plant in ledger units:
///
/// ```text
/// dX/dt = omega_m P
/// dP/dt = -omega_m X - gamma_m P + g a1 + f_th
/// y     = cos(theta) a1 + sin(theta) (a2 + g X)
/// ```
///
/// with `g = sqrt(2) Lambda`, unit white vacuum quadratures and a white
/// thermal force of double-sided density `s_f_th`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantModel {
    pub omega_m: f64,
    pub gamma_m: f64,
    /// Measurement rate `alpha x_q / hbar` [s^-1/2].
    pub lambda: f64,
    pub theta: f64,
    pub s_f_th: f64,
}

/// Noise channels driving the plant, in the order used by transfer vectors.
pub const CHANNELS: [&str; 3] = ["a1", "a2", "f_th"];

impl PlantModel {
    pub fn new(omega_m: f64, gamma_m: f64, lambda: f64, theta: f64, s_f_th: f64) -> Result<Self> {
        let p = PlantModel {
            omega_m,
            gamma_m,
            lambda,
            theta,
            s_f_th,
        };
        p.validate()?;
        Ok(p)
    }

    /// Plant for a parameter set, read out in the phase quadrature.
    pub fn from_scales(s: &DerivedScales) -> Result<Self> {
        PlantModel::new(
            s.omega_m,
            s.gamma_m,
            s.lambda_rate,
            FRAC_PI_2,
            thermal_force_density(s.gamma_m, s.n_th),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.omega_m,
            self.gamma_m,
            self.lambda,
            self.theta,
            self.s_f_th,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter {
                field: "plant",
                reason: format!("non-finite entry in {self:?}"),
            });
        }
        if !(self.omega_m > 0.0) {
            return Err(Error::InvalidParameter {
                field: "omega_m",
                reason: format!("must be positive, got {}", self.omega_m),
            });
        }
        if !(self.gamma_m > 0.0) {
            return Err(Error::UnstablePlant(format!(
                "gamma_m = {} (needs strict damping)",
                self.gamma_m
            )));
        }
        if !(2.0 * self.omega_m != self.gamma_m) {
            return Err(Error::Unsupported(
                "critically damped plant (repeated mechanical pole)".into(),
            ));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidParameter {
                field: "lambda",
                reason: format!("must be non-negative, got {}", self.lambda),
            });
        }
        if self.s_f_th < 0.0 {
            return Err(Error::InvalidParameter {
                field: "s_f_th",
                reason: format!("must be non-negative, got {}", self.s_f_th),
            });
        }
        Ok(())
    }

    /// Readout coupling `g = sqrt(2) Lambda`.
    pub fn coupling(&self) -> f64 {
        SQRT_2 * self.lambda
    }

    /// Drift matrix `A`.
    pub fn drift(&self) -> Mat2 {
        Mat2::new(0.0, self.omega_m, -self.omega_m, -self.gamma_m)
    }

    /// Columns of the noise input matrix `B` for (a1, a2, f_th).
    pub fn noise_inputs(&self) -> [Vec2; 3] {
        [[0.0, self.coupling()], [0.0, 0.0], [0.0, 1.0]]
    }

    /// Row `C` of the readout, `y = C x + D w`.
    pub fn readout(&self) -> Vec2 {
        [self.coupling() * self.theta.sin(), 0.0]
    }

    /// Direct feed-through `D` of (a1, a2, f_th) into `y`.
    pub fn feedthrough(&self) -> [f64; 3] {
        [self.theta.cos(), self.theta.sin(), 0.0]
    }

    /// Double-sided densities of (a1, a2, f_th).
    pub fn noise_densities(&self) -> [f64; 3] {
        [1.0, 1.0, self.s_f_th]
    }

    /// Process noise `B S B^T`.
    pub fn process_noise(&self) -> Mat2 {
        let g = self.coupling();
        Mat2::diag(0.0, g * g + self.s_f_th)
    }

    /// Cross covariance `B S D^T` between process and readout noise.
    pub fn cross_noise(&self) -> Vec2 {
        [0.0, self.coupling() * self.theta.cos()]
    }

    /// Monic mechanical denominator `D(w) = w^2 + i gamma_m w - omega_m^2`
    /// (Fourier convention `d/dt -> -i w`). Its roots lie in the lower half
    /// plane.
    pub fn denominator(&self) -> Poly {
        Poly::new(vec![
            C64::from(-self.omega_m * self.omega_m),
            C64::new(0.0, self.gamma_m),
            C64::from(1.0),
        ])
    }

    /// Roots of [`Self::denominator`].
    pub fn poles(&self) -> [C64; 2] {
        quadratic_roots(
            C64::from(1.0),
            C64::new(0.0, self.gamma_m),
            C64::from(-self.omega_m * self.omega_m),
        )
    }

    /// Numerators over `D(w)` of the transfer from (a1, a2, f_th) to `y`.
    pub fn output_numerators(&self) -> [Poly; 3] {
        let (s, c) = self.theta.sin_cos();
        let g = self.coupling();
        let w = self.omega_m;
        let d = self.denominator();
        [
            d.scale(C64::from(c))
                .add(&Poly::from_real(&[-s * g * g * w])),
            d.scale(C64::from(s)),
            Poly::from_real(&[-s * g * w]),
        ]
    }

    /// Numerators over `D(w)` of the transfer from (a1, a2, f_th) to X and P.
    pub fn state_numerators(&self) -> [[Poly; 3]; 2] {
        let g = self.coupling();
        let w = self.omega_m;
        let zero = Poly::from_real(&[0.0]);
        [
            [
                Poly::from_real(&[-g * w]),
                zero.clone(),
                Poly::from_real(&[-w]),
            ],
            [
                Poly::new(vec![C64::from(0.0), C64::new(0.0, g)]),
                zero,
                Poly::new(vec![C64::from(0.0), C64::new(0.0, 1.0)]),
            ],
        ]
    }
}

/// Thermal force density giving `Var X = Var P = 2 n_th + 1` without
/// measurement.
pub fn thermal_force_density(gamma_m: f64, n_th: f64) -> f64 {
    2.0 * gamma_m * (2.0 * n_th + 1.0)
}
