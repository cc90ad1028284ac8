//! Adaptive Dormand–Prince 5(4) integrator for complex-valued systems.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the number of attempted steps.
    pub max_steps: usize,
    /// Largest allowed step; `None` means unbounded.
    pub h_max: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 10_000_000, h_max: None }
    }
}

impl OdeOptions {
    /// Relative tolerance `tol`, absolute tolerance `tol/100`.
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol * 1e-2, ..Self::default() }
    }
}

/// Which time points to record.
#[derive(Debug, Clone, Copy)]
pub enum Output<'a> {
    /// The initial point and every accepted step.
    EveryStep,
    /// Only the given times (increasing, within `[t0, t_final]`). Steps are
    /// shortened to land on them exactly.
    At(&'a [f64]),
}

#[derive(Debug, Clone, Default)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub accepted: usize,
    pub rejected: usize,
}

// Dormand–Prince tableau.
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Error coefficients b - b*.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += *c * k[i];
        }
        *o = y[i] + h * acc;
    }
}

fn error_norm(y0: &[C64], y1: &[C64], err: &[C64], opts: &OdeOptions) -> f64 {
    let mut sum = 0.0;
    for i in 0..y0.len() {
        let scale = opts.atol + opts.rtol * y0[i].norm().max(y1[i].norm());
        sum += (err[i].norm() / scale).powi(2);
    }
    (sum / y0.len().max(1) as f64).sqrt()
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t_final`.
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[C64], t_final: f64, output: Output<'_>, opts: &OdeOptions) -> Result<Solution>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if !(t_final > t0) || !t_final.is_finite() {
        return Err(Error::InvalidParams(format!("t_final ({t_final}) must exceed t0 ({t0})")));
    }
    if !(opts.rtol > 0.0) || !(opts.atol > 0.0) {
        return Err(Error::InvalidParams("tolerances must be positive".into()));
    }
    if let Output::At(ts) = output {
        let ordered = ts.windows(2).all(|w| w[1] > w[0]);
        let in_range = ts.iter().all(|&t| t >= t0 && t <= t_final);
        if !ordered || !in_range {
            return Err(Error::InvalidParams("output times must be increasing and inside [t0, t_final]".into()));
        }
    }

    let n = y0.len();
    let zero = C64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut err = vec![zero; n];

    let mut sol = Solution::default();
    let mut next_out = 0usize;
    match output {
        Output::EveryStep => {
            sol.times.push(t0);
            sol.states.push(y.clone());
        }
        Output::At(ts) => {
            while next_out < ts.len() && ts[next_out] == t0 {
                sol.times.push(t0);
                sol.states.push(y.clone());
                next_out += 1;
            }
        }
    }

    let mut t = t0;
    f(t, &y, &mut k1);

    // Initial step (Hairer, Nørsett & Wanner, II.4).
    let sc = |v: &C64| opts.atol + opts.rtol * v.norm();
    let d0 = (y.iter().map(|v| (v.norm() / sc(v)).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt();
    let d1 = (k1.iter().zip(&y).map(|(k, v)| (k.norm() / sc(v)).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(t_final - t0);
    if let Some(hm) = opts.h_max {
        h = h.min(hm);
    }

    let span = t_final - t0;
    let mut attempts = 0usize;
    while t < t_final {
        attempts += 1;
        if attempts > opts.max_steps {
            return Err(Error::NonConvergence { last_good_time: t });
        }
        let h_min = 1e-14 * t.abs().max(span).max(1e-300);
        if h < h_min {
            return Err(Error::NonConvergence { last_good_time: t });
        }
        // Land exactly on the next output time or the end point.
        let target = match output {
            Output::At(ts) if next_out < ts.len() => ts[next_out],
            _ => t_final,
        };
        let mut hit_target = false;
        let mut step = h;
        if t + step >= target || target - (t + step) < 1e-12 * span {
            step = target - t;
            hit_target = true;
        }

        combine(&mut tmp, &y, step, &[(A21, &k1)]);
        f(t + C2 * step, &tmp, &mut k2);
        combine(&mut tmp, &y, step, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * step, &tmp, &mut k3);
        combine(&mut tmp, &y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * step, &tmp, &mut k4);
        combine(&mut tmp, &y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * step, &tmp, &mut k5);
        combine(&mut tmp, &y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        f(t + step, &tmp, &mut k6);
        combine(&mut y_new, &y, step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        f(t + step, &y_new, &mut k7);
        for i in 0..n {
            err[i] = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = error_norm(&y, &y_new, &err, opts);
        if !en.is_finite() {
            h = step * 0.1;
            sol.rejected += 1;
            continue;
        }

        let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        if en <= 1.0 {
            t = if hit_target { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            sol.accepted += 1;
            match output {
                Output::EveryStep => {
                    sol.times.push(t);
                    sol.states.push(y.clone());
                }
                Output::At(ts) => {
                    while next_out < ts.len() && ts[next_out] <= t {
                        sol.times.push(ts[next_out]);
                        sol.states.push(y.clone());
                        next_out += 1;
                    }
                }
            }
            // A step truncated to hit an output time says little about the
            // natural step size; keep the previous one in that case.
            if !(hit_target && step < h) {
                h = step * factor;
            }
        } else {
            sol.rejected += 1;
            h = step * factor.min(1.0);
        }
        if let Some(hm) = opts.h_max {
            h = h.min(hm);
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_and_rotation() {
        // y' = (-0.5 + 3i) y, y(0) = 1
        let lambda = C64::new(-0.5, 3.0);
        let opts = OdeOptions { rtol: 1e-11, atol: 1e-13, ..OdeOptions::default() };
        let ts: Vec<f64> = (1..=20).map(|k| 0.25 * k as f64).collect();
        let sol = dopri5(
            |_, y, dy| dy[0] = lambda * y[0],
            0.0,
            &[C64::new(1.0, 0.0)],
            5.0,
            Output::At(&ts),
            &opts,
        )
        .unwrap();
        assert_eq!(sol.times, ts);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            let exact = (lambda * *t).exp();
            assert!((y[0] - exact).norm() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn every_step_ends_at_t_final() {
        let sol = dopri5(
            |t, _, dy| dy[0] = C64::new(t.cos(), 0.0),
            0.0,
            &[C64::new(0.0, 0.0)],
            3.0,
            Output::EveryStep,
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(*sol.times.last().unwrap(), 3.0);
        assert!(sol.times.windows(2).all(|w| w[1] > w[0]));
        assert!((sol.states.last().unwrap()[0].re - 3f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn blow_up_reports_last_good_time() {
        // y' = y², y(0) = 1 explodes at t = 1.
        let res = dopri5(
            |_, y, dy| dy[0] = y[0] * y[0],
            0.0,
            &[C64::new(1.0, 0.0)],
            2.0,
            Output::EveryStep,
            &OdeOptions { max_steps: 100_000, ..OdeOptions::default() },
        );
        match res {
            Err(Error::NonConvergence { last_good_time }) => {
                assert!(last_good_time > 0.99 && last_good_time < 1.0 + 1e-6, "{last_good_time}")
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let f = |_: f64, _: &[C64], dy: &mut [C64]| dy[0] = C64::new(0.0, 0.0);
        let y0 = [C64::new(1.0, 0.0)];
        let opts = OdeOptions::default();
        assert!(dopri5(f, 0.0, &y0, 0.0, Output::EveryStep, &opts).is_err());
        assert!(dopri5(f, 0.0, &y0, 1.0, Output::At(&[0.5, 0.2]), &opts).is_err());
        assert!(dopri5(f, 0.0, &y0, 1.0, Output::At(&[2.0]), &opts).is_err());
    }
}
