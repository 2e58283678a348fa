//! Embedded Runge–Kutta 5(4) (Dormand–Prince) with adaptive step control.

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Step-size controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeControls {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; 0 picks one from the tolerance.
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeControls {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: 0.0,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th minus 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const D: usize>(y: &[f64; D], terms: &[(f64, &[f64; D])], h: f64) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Adaptive integrator over a fixed-size real state.
///
/// `observe(t, y)` is called after every accepted step; returning `false`
/// stops the integration early.
pub fn integrate<const D: usize, F, O>(
    mut f: F,
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    ctl: &OdeControls,
    mut observe: O,
) -> Result<(f64, [f64; D])>
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
    O: FnMut(f64, &[f64; D]) -> Result<bool>,
{
    let mut t = t0;
    let mut y = y0;
    if t_end <= t0 {
        return Ok((t, y));
    }
    let mut k1 = f(t, &y);
    let mut h = if ctl.h_init > 0.0 {
        ctl.h_init
    } else {
        let scale: f64 = y.iter().map(|v| v.abs()).fold(0.0, f64::max) * ctl.rtol + ctl.atol;
        let rate: f64 = k1.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if rate > 0.0 {
            (0.01 * scale / rate).powf(0.2).min(t_end - t0) * 0.1
        } else {
            (t_end - t0) * 1e-3
        }
    };
    h = h.min(ctl.h_max).max(ctl.h_min);
    let mut steps = 0usize;
    while t < t_end {
        if steps >= ctl.max_steps {
            return Err(Error::StepFailure { t, h });
        }
        steps += 1;
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k2 = f(t + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = f(t + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(
            t + C4 * h,
            &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = f(
            t + h,
            &axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                h,
            ),
        );
        let y_new = axpy(
            &y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            h,
        );
        let k7 = f(t + h, &y_new);
        let mut err = 0.0f64;
        for i in 0..D {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            err = 1e10;
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            k1 = k7;
            if !observe(t, &y)? {
                return Ok((t, y));
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(ctl.h_max);
        } else {
            h *= (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
            if h < ctl.h_min {
                return Err(Error::StepFailure { t, h });
            }
        }
    }
    Ok((t, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let ctl = OdeControls::default();
        let (t, y) = integrate(
            |_, y: &[f64; 1]| [-2.0 * y[0]],
            0.0,
            [1.0],
            3.0,
            &ctl,
            |_, _| Ok(true),
        )
        .unwrap();
        assert_eq!(t, 3.0);
        assert!((y[0] - (-6.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_long_run() {
        let ctl = OdeControls::default();
        let tf = 20.0 * core::f64::consts::PI;
        let (_, y) = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            tf,
            &ctl,
            |_, _| Ok(true),
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-7 && y[1].abs() < 1e-7);
    }

    #[test]
    fn early_stop() {
        let ctl = OdeControls::default();
        let (t, _) = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            100.0,
            &ctl,
            |t, _| Ok(t < 1.0),
        )
        .unwrap();
        assert!(t >= 1.0 && t < 100.0);
    }

    #[test]
    fn step_underflow_reports_failure() {
        let ctl = OdeControls {
            h_min: 1e-3,
            ..OdeControls::default()
        };
        // finite-time blow-up forces the step below h_min
        let r = integrate(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            [1.0],
            2.0,
            &ctl,
            |_, _| Ok(true),
        );
        assert!(matches!(r, Err(Error::StepFailure { .. })));
    }
}
