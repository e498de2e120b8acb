use super::model::PlantModel;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use serde::{Deserialize, Serialize};

const MAX_NEWTON_ITERS: usize = 200;
const RESIDUAL_TOL: f64 = 1e-10;

/// Solves `A V + V A^T + M = 0` for symmetric `V`.
pub fn lyapunov(a: Mat2, m: Mat2) -> Result<Mat2> {
    let a = a.0;
    let m = m.symmetrized().0;
    // unknowns (v11, v12, v22)
    let mut sys = [
        [2.0 * a[0][0], 2.0 * a[0][1], 0.0, -m[0][0]],
        [a[1][0], a[0][0] + a[1][1], a[0][1], -m[0][1]],
        [0.0, 2.0 * a[1][0], 2.0 * a[1][1], -m[1][1]],
    ];
    let v = solve3(&mut sys)
        .ok_or_else(|| Error::UnstablePlant("Lyapunov operator is singular".into()))?;
    Ok(Mat2::new(v[0], v[1], v[1], v[2]))
}

/// Gaussian elimination with partial pivoting on an augmented 3x4 system.
#[allow(clippy::needless_range_loop)]
fn solve3(m: &mut [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col] == 0.0 || !m[piv][col].is_finite() {
            return None;
        }
        m.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][3] - s) / m[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn is_stable(a: Mat2) -> bool {
    a.trace() < 0.0 && a.det() > 0.0
}

/// Stationary Kalman filter of the plant driven by vacuum and thermal noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KalmanSolution {
    /// Conditional covariance of (X, P) given the whole past record.
    pub v_c: Mat2,
    /// Unconditional stationary covariance.
    pub sigma_prior: Mat2,
    /// Innovation gain `V C^T + N`.
    pub gain: Vec2,
    pub iterations: usize,
    /// Relative Riccati residual at the returned solution.
    pub residual: f64,
}

impl KalmanSolution {
    /// Error dynamics `A - L C`.
    pub fn closed_loop(&self, plant: &PlantModel) -> Mat2 {
        plant.drift() - Mat2::outer(self.gain, plant.readout())
    }
}

/// Unconditional covariance from `A S + S A^T + B S_w B^T = 0`.
pub fn prior_covariance(plant: &PlantModel) -> Result<Mat2> {
    plant.validate()?;
    lyapunov(plant.drift(), plant.process_noise())
}

/// Solves the filter Riccati equation
/// `A V + V A^T + Q - (V C^T + N)(C V + N^T) = 0` by Newton-Kleinman
/// iteration from a stabilizing gain.
pub fn kalman_steady_state(plant: &PlantModel) -> Result<KalmanSolution> {
    plant.validate()?;
    let sigma_prior = prior_covariance(plant)?;
    let n = plant.cross_noise();
    let c = plant.readout();
    let a_t = plant.drift() - Mat2::outer(n, c);
    let q_t = plant.process_noise() - Mat2::outer(n, n);

    let (v, iterations) = if c[0] == 0.0 {
        (lyapunov(a_t, q_t)?, 0)
    } else {
        let mut l = if is_stable(a_t) {
            [0.0, 0.0]
        } else {
            let w = plant.omega_m;
            let w_eff = -a_t.get(1, 0);
            [w / c[0], (w - w_eff) / c[0]]
        };
        let mut v = Mat2::ZERO;
        let mut done = None;
        for it in 1..=MAX_NEWTON_ITERS {
            let a_k = a_t - Mat2::outer(l, c);
            if !is_stable(a_k) {
                return Err(Error::Riccati(format!("iterate {it} lost stability")));
            }
            v = lyapunov(a_k, q_t + Mat2::outer(l, l))?;
            let next = v.mul_vec(c);
            let change = ((next[0] - l[0]).powi(2) + (next[1] - l[1]).powi(2)).sqrt();
            let size = (next[0].powi(2) + next[1].powi(2)).sqrt();
            l = next;
            if change <= 1e-15 * size {
                done = Some(it);
                break;
            }
        }
        let it = done.ok_or_else(|| {
            Error::Riccati(format!("no convergence in {MAX_NEWTON_ITERS} iterations"))
        })?;
        (v, it)
    };

    let residual = riccati_residual(plant, v);
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::Riccati(format!("relative residual {residual:e}")));
    }
    let vc = v.mul_vec(c);
    Ok(KalmanSolution {
        v_c: v,
        sigma_prior,
        gain: [vc[0] + n[0], vc[1] + n[1]],
        iterations,
        residual,
    })
}

/// Relative residual of the filter Riccati equation at `v`.
pub fn riccati_residual(plant: &PlantModel, v: Mat2) -> f64 {
    let a = plant.drift();
    let q = plant.process_noise();
    let vc = v.mul_vec(plant.readout());
    let n = plant.cross_noise();
    let k = [vc[0] + n[0], vc[1] + n[1]];
    let av = a * v;
    let kk = Mat2::outer(k, k);
    let r = av + av.transpose() + q - kk;
    let scale = av.max_abs() + q.max_abs() + kk.max_abs();
    if scale == 0.0 {
        0.0
    } else {
        r.max_abs() / scale
    }
}
