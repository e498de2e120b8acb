use super::spectrum::RationalSpectrum;
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

/// Minimum-phase factor from the cepstrum of `log S`, used only to validate
/// the root-based factorization.
///
/// The real axis is mapped onto the unit circle by `w = scale * tan(t / 2)`,
/// which sends the upper half plane to the disk interior. Keeping the
/// non-negative cepstral coefficients of `log S` gives `log phi` analytic in
/// the disk. Returns `(w, phi(w))` at the `n - 1` finite sample frequencies.
pub fn cepstral_factor(s: &RationalSpectrum, scale: f64, n: usize) -> Result<Vec<(f64, C64)>> {
    if n < 8 || !n.is_multiple_of(2) || !(scale > 0.0) {
        return Err(Error::InvalidParameter {
            field: "cepstral grid",
            reason: format!("need even n >= 8 and positive scale, got n = {n}, scale = {scale}"),
        });
    }
    let s_inf = s.high_frequency_limit();
    if !(s_inf > 0.0 && s_inf.is_finite()) {
        return Err(Error::InvalidSpectrum(
            "cepstral factorization needs a finite positive high-frequency limit".into(),
        ));
    }
    let omega = |k: usize| scale * (std::f64::consts::PI * k as f64 / n as f64).tan();
    let mut buf: Vec<C64> = (0..n)
        .map(|k| {
            let v = if k == n / 2 { s_inf } else { s.eval(omega(k)) };
            C64::from(v.ln())
        })
        .collect();
    if buf.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpectrum(
            "spectrum is not positive on the axis".into(),
        ));
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let norm = 1.0 / n as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let weight = match k {
            0 => 0.5,
            k if k < n / 2 => 1.0,
            k if k == n / 2 => 0.5,
            _ => 0.0,
        };
        *c *= weight * norm;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok((0..n)
        .filter(|&k| k != n / 2)
        .map(|k| (omega(k), buf[k].exp()))
        .collect())
}
