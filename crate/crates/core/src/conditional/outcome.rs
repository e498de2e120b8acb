use super::input::{MeasurementOutcome, Provenance};
use crate::error::{Error, Result};
use crate::linalg::{dot, Mat2, Vec2};
use crate::plant::PhotonKernels;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{PI, SQRT_2};

/// Below this `||L||^2` the photon leaves no trace in the record.
const POINT_MASS_NORM: f64 = 1e-14;
/// Relative eigenvalue of `V_L` treated as zero.
const RANK_TOL: f64 = 1e-10;
const NORM_SLACK: f64 = 1e-6;
/// Smallest acceptable rejection-sampling acceptance rate.
const MIN_ACCEPTANCE: f64 = 1e-3;

/// Density of `Z = (Re Z, Im Z)`,
/// `w[Z] = (1 - ||L||^2 + |Z|^2) N(Z; 0, V_L)`.
///
/// When `V_L` is singular the density lives on a line (`omega_f = 0`) or
/// collapses to a point mass at the origin (`L = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutcomeDensity {
    Point,
    Line {
        /// Unit direction of the support.
        dir: Vec2,
        /// Variance of the Gaussian factor along `dir`.
        var: f64,
        /// `1 - ||L||^2`.
        a: f64,
    },
    Plane {
        v_l: Mat2,
        inv: Mat2,
        norm: f64,
        a: f64,
    },
}

impl OutcomeDensity {
    pub fn from_kernels(k: &PhotonKernels) -> Result<Self> {
        if !(k.l_norm_sq <= 1.0 + NORM_SLACK) {
            return Err(Error::KernelInvariant(format!(
                "||L||^2 = {} exceeds one",
                k.l_norm_sq
            )));
        }
        let a = (1.0 - k.l_norm_sq).max(0.0);
        if k.l_norm_sq <= POINT_MASS_NORM {
            return Ok(OutcomeDensity::Point);
        }
        let (vals, vecs) = k.v_l.sym_eigen();
        if vals[0] <= RANK_TOL * vals[1] {
            return Ok(OutcomeDensity::Line {
                dir: canonical(vecs[1]),
                var: vals[1],
                a,
            });
        }
        let v_l = k.v_l.symmetrized();
        Ok(OutcomeDensity::Plane {
            v_l,
            inv: v_l.inverse().expect("full rank"),
            norm: 1.0 / (2.0 * PI * v_l.det().sqrt()),
            a,
        })
    }

    /// Planar density at `z`; zero for the degenerate cases.
    pub fn eval(&self, z: Vec2) -> f64 {
        match *self {
            OutcomeDensity::Plane { inv, norm, a, .. } => {
                (a + dot(z, z)) * norm * (-0.5 * inv.quad(z)).exp()
            }
            _ => 0.0,
        }
    }

    /// Density of the coordinate `t` along the support of a line density.
    pub fn eval_line(&self, t: f64) -> f64 {
        match *self {
            OutcomeDensity::Line { var, a, .. } => {
                (a + t * t) * (-0.5 * t * t / var).exp() / (2.0 * PI * var).sqrt()
            }
            _ => 0.0,
        }
    }

    /// Analytic `E[Z Z^T] = V_L + 2 V_L^2`.
    pub fn second_moment(&self) -> Mat2 {
        match *self {
            OutcomeDensity::Point => Mat2::ZERO,
            OutcomeDensity::Line { dir, var, .. } => {
                Mat2::outer(dir, dir).scale(var + 2.0 * var * var)
            }
            OutcomeDensity::Plane { v_l, .. } => v_l + (v_l * v_l).scale(2.0),
        }
    }

    /// Total probability by quadrature on a disk grown until the tail is
    /// negligible: trapezoid in angle, Simpson in whitened radius.
    pub fn total_mass(&self) -> f64 {
        match *self {
            OutcomeDensity::Point => 1.0,
            OutcomeDensity::Line { var, a, .. } => {
                // integrate over t = sqrt(var) r, r >= 0, twice
                let f = |r: f64| (a + var * r * r) * (-0.5 * r * r).exp();
                2.0 * simpson(f, disk_radius(var.max(a))) / (2.0 * PI).sqrt()
            }
            OutcomeDensity::Plane { v_l, a, .. } => {
                let n_phi = 64;
                let (vals, vecs) = v_l.sym_eigen();
                let big = vals[1].max(a);
                (0..n_phi)
                    .map(|j| {
                        let phi = 2.0 * PI * j as f64 / n_phi as f64;
                        let (s, c) = phi.sin_cos();
                        // |Z|^2 = r^2 e^T V_L e for Z = V_L^{1/2} r e
                        let e2 = vals[0] * c * c * dot(vecs[0], vecs[0])
                            + vals[1] * s * s * dot(vecs[1], vecs[1]);
                        let f = |r: f64| (a + r * r * e2) * (-0.5 * r * r).exp() * r;
                        simpson(f, disk_radius(big))
                    })
                    .sum::<f64>()
                    / n_phi as f64
            }
        }
    }

    /// Stationary points of `w`: the origin and `+-t u` along each
    /// eigenvector `u` with `t^2 = 2 lambda - (1 - ||L||^2) > 0`.
    fn stationary_points(&self) -> Vec<Vec2> {
        let mut out = vec![[0.0, 0.0]];
        match *self {
            OutcomeDensity::Point => {}
            OutcomeDensity::Line { dir, var, a } => {
                let t2 = 2.0 * var - a;
                if t2 > 0.0 {
                    out.push([dir[0] * t2.sqrt(), dir[1] * t2.sqrt()]);
                }
            }
            OutcomeDensity::Plane { v_l, a, .. } => {
                let (vals, vecs) = v_l.sym_eigen();
                for (lam, u) in vals.iter().zip(vecs) {
                    let t2 = 2.0 * lam - a;
                    if t2 > 0.0 {
                        let u = canonical(u);
                        out.push([u[0] * t2.sqrt(), u[1] * t2.sqrt()]);
                    }
                }
            }
        }
        out
    }

    /// Log-density up to a constant, with the degenerate cases measured
    /// along their support.
    fn log_density(&self, z: Vec2) -> f64 {
        match *self {
            OutcomeDensity::Point => {
                if z == [0.0, 0.0] {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            OutcomeDensity::Line { dir, .. } => self.eval_line(dot(dir, z)).ln(),
            OutcomeDensity::Plane { .. } => self.eval(z).ln(),
        }
    }
}

fn canonical(u: Vec2) -> Vec2 {
    if u[0] < 0.0 || (u[0] == 0.0 && u[1] < 0.0) {
        [-u[0], -u[1]]
    } else {
        u
    }
}

/// Whitened radius beyond which `(1 + s r^2) exp(-r^2 / 2)` is below 1e-18.
fn disk_radius(scale: f64) -> f64 {
    let mut r = 8.0;
    while (1.0 + scale * r * r) * (-0.5 * r * r).exp() > 1e-18 {
        r *= 1.25;
    }
    r
}

fn simpson<F: Fn(f64) -> f64>(f: F, r_max: f64) -> f64 {
    let n = 4096;
    let h = r_max / n as f64;
    let mut s = f(0.0) + f(r_max);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}

/// Outcome density of the kernels.
pub fn outcome_density(k: &PhotonKernels) -> Result<OutcomeDensity> {
    OutcomeDensity::from_kernels(k)
}

/// Downhill-simplex maximization of `f` in the plane.
pub fn nelder_mead<F: Fn(Vec2) -> f64>(f: F, start: Vec2, step: f64, max_iter: usize) -> Vec2 {
    let neg = |x: Vec2| {
        let v = -f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut s = [
        (start, neg(start)),
        ([start[0] + step, start[1]], 0.0),
        ([start[0], start[1] + step], 0.0),
    ];
    s[1].1 = neg(s[1].0);
    s[2].1 = neg(s[2].0);
    let lerp = |a: Vec2, b: Vec2, t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (s[2].1 - s[0].1).abs();
        let size = (s[2].0[0] - s[0].0[0])
            .hypot(s[2].0[1] - s[0].0[1])
            .max((s[1].0[0] - s[0].0[0]).hypot(s[1].0[1] - s[0].0[1]));
        if spread <= 1e-15 * s[0].1.abs().max(1e-300) && size <= 1e-12 * (1.0 + step) {
            break;
        }
        let c = lerp(s[0].0, s[1].0, 0.5);
        let r = lerp(c, s[2].0, -1.0);
        let fr = neg(r);
        if fr < s[0].1 {
            let e = lerp(c, s[2].0, -2.0);
            let fe = neg(e);
            s[2] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < s[1].1 {
            s[2] = (r, fr);
        } else {
            let (cp, fc) = if fr < s[2].1 {
                let p = lerp(c, r, 0.5);
                (p, neg(p))
            } else {
                let p = lerp(c, s[2].0, 0.5);
                (p, neg(p))
            };
            if fc < s[2].1.min(fr) {
                s[2] = (cp, fc);
            } else {
                let best = s[0].0;
                for v in s.iter_mut().skip(1) {
                    v.0 = lerp(best, v.0, 0.5);
                    v.1 = neg(v.0);
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    s[0].0
}

/// Simplex search for the mode of `w` from the origin and from
/// `|Z| = sqrt(lambda_max)` along the leading eigenvector.
pub fn search_most_probable(d: &OutcomeDensity) -> Vec2 {
    let (seed, scale) = match *d {
        OutcomeDensity::Point => return [0.0, 0.0],
        OutcomeDensity::Line { dir, var, .. } => {
            ([dir[0] * var.sqrt(), dir[1] * var.sqrt()], var.sqrt())
        }
        OutcomeDensity::Plane { v_l, .. } => {
            let (vals, vecs) = v_l.sym_eigen();
            let u = canonical(vecs[1]);
            (
                [u[0] * vals[1].sqrt(), u[1] * vals[1].sqrt()],
                vals[1].sqrt(),
            )
        }
    };
    let f = |z: Vec2| d.log_density(z);
    let a = nelder_mead(f, [0.0, 0.0], 0.5 * scale, 2000);
    let b = nelder_mead(f, seed, 0.5 * scale, 2000);
    let best = if f(a) >= f(b) { a } else { b };
    match *d {
        OutcomeDensity::Line { dir, .. } => {
            let t = dot(dir, best);
            canonical([dir[0] * t, dir[1] * t])
        }
        _ => canonical(best),
    }
}

/// Most probable `Z`, with the translation set to zero.
///
/// The simplex search locates the basin; the returned point is the exact
/// stationary point of `w` closest to it in value.
pub fn most_probable_outcome(k: &PhotonKernels) -> Result<MeasurementOutcome> {
    let d = OutcomeDensity::from_kernels(k)?;
    let searched = search_most_probable(&d);
    let mut best = searched;
    for z in d.stationary_points() {
        if d.log_density(z) >= d.log_density(best) {
            best = z;
        }
    }
    Ok(MeasurementOutcome {
        z: C64::new(best[0], best[1]),
        x_c: [0.0, 0.0],
        provenance: Provenance::MostProbable,
    })
}

/// Rejection sampler for `w[Z]` with proposal `N(0, 2 V_L)`; the ratio
/// `w / q` is then bounded.
#[derive(Debug, Clone, Copy)]
pub struct OutcomeSampler {
    density: OutcomeDensity,
    /// Proposal factor `sqrt(2 lambda_k) u_k` per eigen-direction.
    axes: [Vec2; 2],
    bound: f64,
}

impl OutcomeSampler {
    pub fn new(density: OutcomeDensity) -> Result<Self> {
        let mut axes = [[0.0; 2]; 2];
        let bound = match density {
            OutcomeDensity::Point => 1.0,
            OutcomeDensity::Line { dir, var, a } => {
                let s = (2.0 * var).sqrt();
                axes[0] = [dir[0] * s, dir[1] * s];
                SQRT_2 * ratio_peak(a, var)
            }
            OutcomeDensity::Plane { v_l, a, .. } => {
                let (vals, vecs) = v_l.sym_eigen();
                for k in 0..2 {
                    let s = (2.0 * vals[k]).sqrt();
                    axes[k] = [vecs[k][0] * s, vecs[k][1] * s];
                }
                2.0 * ratio_peak(a, vals[1])
            }
        };
        let rate = 1.0 / bound;
        if rate < MIN_ACCEPTANCE {
            return Err(Error::LowAcceptance { rate });
        }
        Ok(OutcomeSampler {
            density,
            axes,
            bound,
        })
    }

    /// Expected acceptance rate.
    pub fn acceptance_rate(&self) -> f64 {
        1.0 / self.bound
    }

    /// Ratio `w / (bound q)` at a proposal drawn as `axes . n`.
    fn accept_prob(&self, n: Vec2) -> f64 {
        match self.density {
            OutcomeDensity::Point => 1.0,
            OutcomeDensity::Line { var, a, .. } => {
                let t2 = 2.0 * var * n[0] * n[0];
                SQRT_2 * (a + t2) * (-0.25 * t2 / var).exp() / self.bound
            }
            OutcomeDensity::Plane { a, .. } => {
                let z = self.point(n);
                // Z^T V_L^{-1} Z = 2 |n|^2
                2.0 * (a + dot(z, z)) * (-0.5 * dot(n, n)).exp() / self.bound
            }
        }
    }

    fn point(&self, n: Vec2) -> Vec2 {
        [
            self.axes[0][0] * n[0] + self.axes[1][0] * n[1],
            self.axes[0][1] * n[0] + self.axes[1][1] * n[1],
        ]
    }

    /// Draws one sample, counting proposals in `tries`.
    pub fn draw<R: Rng>(&self, rng: &mut R, tries: &mut u64) -> Vec2 {
        loop {
            *tries += 1;
            let n: Vec2 = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
            let u: f64 = rng.random();
            if u < self.accept_prob(n) {
                return self.point(n);
            }
        }
    }

    /// `count` samples from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<Vec2>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tries = 0u64;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(self.draw(&mut rng, &mut tries));
            if tries >= 10_000 {
                let rate = out.len() as f64 / tries as f64;
                if rate < MIN_ACCEPTANCE {
                    return Err(Error::LowAcceptance { rate });
                }
            }
        }
        Ok(out)
    }
}

/// Peak of `(a + t^2) exp(-t^2 / (4 lambda))` over `t`.
fn ratio_peak(a: f64, lambda: f64) -> f64 {
    if 4.0 * lambda > a {
        4.0 * lambda * (a / (4.0 * lambda) - 1.0).exp()
    } else {
        a
    }
}

/// One outcome drawn from `w[Z]`, with the translation set to zero.
pub fn sample_outcome(k: &PhotonKernels, seed: u64) -> Result<MeasurementOutcome> {
    let s = OutcomeSampler::new(OutcomeDensity::from_kernels(k)?)?;
    let z = s.sample(seed, 1)?[0];
    Ok(MeasurementOutcome {
        z: C64::new(z[0], z[1]),
        x_c: [0.0, 0.0],
        provenance: Provenance::Sampled { seed },
    })
}
