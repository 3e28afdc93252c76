//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! Only what the radial solvers need: integration over a single interval
//! (callers split at profile joins), a per-step hook that may rescale the
//! state or request a stop, and a shared step budget.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("step budget of {0} steps exhausted")]
    BudgetExhausted(usize),
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

/// How the local error of each component is weighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorScale {
    /// `abs + rel * |y_i|`.
    Mixed { rel: f64, abs: f64 },
    /// `abs * max_j |y_j| + rel * |y_i|`; homogeneous of degree one, so a
    /// linear system produces the same step sequence for any scaling of
    /// its initial data.
    StateRelative { rel: f64, abs: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub scale: ErrorScale,
    pub max_steps: usize,
    steps: usize,
    last_h: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const D: usize> {
    pub t: f64,
    pub y: [f64; D],
    pub stopped: bool,
}

#[inline]
fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

impl Dopri5 {
    pub fn new(scale: ErrorScale, max_steps: usize) -> Self {
        Self {
            scale,
            max_steps,
            steps: 0,
            last_h: None,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Forget the step size carried over from the previous interval.
    pub fn reset_step(&mut self) {
        self.last_h = None;
    }

    fn error_norm<const D: usize>(&self, y: &[f64; D], y_new: &[f64; D], err: &[f64; D]) -> f64 {
        let mut acc = 0.0;
        match self.scale {
            ErrorScale::Mixed { rel, abs } => {
                for i in 0..D {
                    let sc = abs + rel * y[i].abs().max(y_new[i].abs());
                    acc += (err[i] / sc).powi(2);
                }
            }
            ErrorScale::StateRelative { rel, abs } => {
                let big = y
                    .iter()
                    .chain(y_new.iter())
                    .fold(0.0_f64, |m, v| m.max(v.abs()));
                for i in 0..D {
                    let sc = abs * big + rel * y[i].abs().max(y_new[i].abs());
                    if sc == 0.0 {
                        if err[i] != 0.0 {
                            return f64::INFINITY;
                        }
                        continue;
                    }
                    acc += (err[i] / sc).powi(2);
                }
            }
        }
        (acc / D as f64).sqrt()
    }

    fn initial_step<const D: usize, F>(&self, f: &mut F, t0: f64, y0: &[f64; D], f0: &[f64; D], span: f64) -> f64
    where
        F: FnMut(f64, &[f64; D]) -> [f64; D],
    {
        let zero = [0.0; D];
        let d0 = self.error_norm(y0, y0, y0);
        let d1 = self.error_norm(y0, y0, f0);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 || !d0.is_finite() || !d1.is_finite() {
            1e-6 * span.abs()
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(span.abs());
        let dir = span.signum();
        let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
        let f1 = f(t0 + dir * h0, &y1);
        let mut diff = zero;
        for i in 0..D {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = self.error_norm(y0, y0, &diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 || !d2.is_finite() {
            (h0 * 1e-3).max(1e-6 * span.abs())
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1).min(span.abs())
    }

    /// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
    ///
    /// `on_step` sees each accepted state and may modify it in place
    /// (rescaling a linear system) or stop the integration early.
    pub fn integrate<const D: usize, F, H>(
        &mut self,
        mut f: F,
        t0: f64,
        t1: f64,
        y0: [f64; D],
        mut on_step: H,
    ) -> Result<Outcome<D>, IntegrationError>
    where
        F: FnMut(f64, &[f64; D]) -> [f64; D],
        H: FnMut(f64, &mut [f64; D]) -> Control,
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(Outcome { t: t0, y: y0, stopped: false });
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = match self.last_h {
            Some(h) => h.min(span.abs()),
            None => self.initial_step(&mut f, t0, &y0, &k1, span),
        };
        let h_min = 1e-14 * (t0.abs().max(t1.abs()).max(1.0));

        loop {
            if self.steps >= self.max_steps {
                return Err(IntegrationError::BudgetExhausted(self.max_steps));
            }
            let remaining = (t1 - t).abs();
            let last = h >= remaining * (1.0 - 1e-12);
            let step = if last { remaining } else { h };
            let hs = dir * step;

            let k2 = f(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
            let k3 = f(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + hs,
                &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t_new = if last { t1 } else { t + hs };
            let k7 = f(t_new, &y_new);

            let mut err = [0.0; D];
            for i in 0..D {
                err[i] = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let en = self.error_norm(&y, &y_new, &err);
            self.steps += 1;

            let finite = y_new.iter().all(|v| v.is_finite()) && en.is_finite();
            if finite && en <= 1.0 {
                t = t_new;
                y = y_new;
                k1 = k7;
                let factor = if en == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                if !last {
                    h = step * factor;
                }
                self.last_h = Some(h);
                let before = y;
                let control = on_step(t, &mut y);
                if y != before {
                    // the hook rescaled the state; the stored slope must follow
                    k1 = f(t, &y);
                }
                if control == Control::Stop {
                    return Ok(Outcome { t, y, stopped: true });
                }
                if last {
                    return Ok(Outcome { t, y, stopped: false });
                }
            } else {
                let factor = if finite {
                    (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    0.1
                };
                h = step * factor;
                if h < h_min {
                    return Err(if finite {
                        IntegrationError::StepUnderflow(t)
                    } else {
                        IntegrationError::NonFinite(t)
                    });
                }
            }
        }
    }
}
