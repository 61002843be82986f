//! Dormand–Prince 5(4) integrator with PI step-size control.
//!
//! The error norm is the RMS of the local error estimate scaled per component
//! by `atol + rtol * max(|y_old|, |y_new|)`, so components that grow like
//! `exp(x^2)` are controlled relative to their own running magnitude.

use crate::{Error, Result};

/// Right-hand side `y' = f(x, y)` of a first-order system.
pub trait System {
    fn dim(&self) -> usize;
    fn rhs(&self, x: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub safety: f64,
    /// Lower bound on the step shrink factor.
    pub fac_min: f64,
    /// Upper bound on the step growth factor.
    pub fac_max: f64,
    /// PI stabilization exponent (0.04 in Hairer's code).
    pub beta: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 200_000,
            safety: 0.9,
            fac_min: 0.2,
            fac_max: 10.0,
            beta: 0.04,
        }
    }
}

/// Final state of an integration together with bookkeeping.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: f64,
    pub y: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    /// Sum over accepted steps of the absolute local error estimate, per component.
    pub local_error_sum: Vec<f64>,
}

// Butcher tableau.
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
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl Dopri5 {
    pub fn with_tolerance(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// Integrates from `x0` to `x1` (`x1 >= x0`) and returns the state at `x1`.
    pub fn integrate<S: System>(&self, sys: &S, x0: f64, y0: &[f64], x1: f64) -> Result<Outcome> {
        let mut out = None;
        self.integrate_through(sys, x0, y0, &[x1], |_, o| out = Some(o.clone()))?;
        Ok(out.expect("one output point"))
    }

    /// Integrates through the ascending points `xs`, landing exactly on each
    /// one and handing the state to `visit`.
    pub fn integrate_through<S, F>(
        &self,
        sys: &S,
        x0: f64,
        y0: &[f64],
        xs: &[f64],
        mut visit: F,
    ) -> Result<Outcome>
    where
        S: System,
        F: FnMut(usize, &Outcome),
    {
        let n = sys.dim();
        assert_eq!(y0.len(), n, "initial state has wrong dimension");
        if !(self.rtol > 0.0) || !(self.atol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be positive (rtol = {}, atol = {})",
                self.rtol, self.atol
            )));
        }
        if xs.windows(2).any(|w| w[1] < w[0]) || xs.first().is_some_and(|&x| x < x0) {
            return Err(Error::InvalidArgument(
                "output points must be ascending and not before the start".into(),
            ));
        }

        let mut st = Outcome {
            x: x0,
            y: y0.to_vec(),
            accepted: 0,
            rejected: 0,
            local_error_sum: vec![0.0; n],
        };
        let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
        let mut ytmp = vec![0.0; n];
        let mut ynew = vec![0.0; n];
        let mut yerr = vec![0.0; n];

        sys.rhs(st.x, &st.y, &mut k[0]);
        let mut h = match xs.last() {
            Some(&xe) if xe > x0 => self.initial_step(sys, x0, &st.y, &k[0], xe - x0),
            _ => 0.0,
        };
        let expo1 = 0.2 - self.beta * 0.75;
        let mut facold: f64 = 1e-4;
        let mut last_rejected = false;

        for (idx, &target) in xs.iter().enumerate() {
            while st.x < target {
                if st.accepted + st.rejected >= self.max_steps {
                    return Err(Error::ToleranceNotMet {
                        at: st.x,
                        reason: format!("step budget of {} exhausted", self.max_steps),
                    });
                }
                let remaining = target - st.x;
                let landing = h >= remaining * (1.0 - 1e-12);
                let hs = if landing { remaining } else { h };
                if hs <= 64.0 * f64::EPSILON * st.x.abs().max(1.0) {
                    return Err(Error::ToleranceNotMet {
                        at: st.x,
                        reason: format!("step size underflow (h = {hs:e})"),
                    });
                }

                self.stages(sys, st.x, hs, &st.y, &mut k, &mut ytmp, &mut ynew);
                let mut err = 0.0;
                for i in 0..n {
                    yerr[i] = hs
                        * (E1 * k[0][i]
                            + E3 * k[2][i]
                            + E4 * k[3][i]
                            + E5 * k[4][i]
                            + E6 * k[5][i]
                            + E7 * k[6][i]);
                    let sc = self.atol + self.rtol * st.y[i].abs().max(ynew[i].abs());
                    let r = yerr[i] / sc;
                    err += r * r;
                }
                let err = (err / n as f64).sqrt();

                if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
                    // Shrink hard and retry; persistent non-finite values mean overflow.
                    if ynew.iter().any(|v| v.is_infinite()) && hs < 1e-6 {
                        return Err(Error::NonFinite { at: st.x + hs });
                    }
                    h = hs * self.fac_min;
                    st.rejected += 1;
                    last_rejected = true;
                    continue;
                }

                let fac11 = err.powf(expo1);
                let fac = (fac11 / facold.powf(self.beta) / self.safety)
                    .clamp(1.0 / self.fac_max, 1.0 / self.fac_min);
                let hnew = hs / fac;

                if err <= 1.0 {
                    facold = err.max(1e-4);
                    st.accepted += 1;
                    st.x = if landing { target } else { st.x + hs };
                    std::mem::swap(&mut st.y, &mut ynew);
                    for (acc, e) in st.local_error_sum.iter_mut().zip(&yerr) {
                        *acc += e.abs();
                    }
                    // FSAL: the last stage is the derivative at the new point.
                    let (first, rest) = k.split_at_mut(1);
                    first[0].copy_from_slice(&rest[5]);
                    let proposal = if last_rejected { hnew.min(hs) } else { hnew };
                    // A step shortened to land on an output point does not
                    // shrink the proposal for the next segment.
                    h = if landing && hs < h { proposal.max(h) } else { proposal };
                    last_rejected = false;
                } else {
                    h = hs / (fac11 / self.safety).min(1.0 / self.fac_min);
                    st.rejected += 1;
                    last_rejected = true;
                }
            }
            visit(idx, &st);
        }
        Ok(st)
    }

    #[allow(clippy::too_many_arguments)]
    fn stages<S: System>(
        &self,
        sys: &S,
        x: f64,
        h: f64,
        y: &[f64],
        k: &mut [Vec<f64>; 7],
        ytmp: &mut [f64],
        ynew: &mut [f64],
    ) {
        let n = y.len();
        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k[0][i];
        }
        sys.rhs(x + C2 * h, ytmp, &mut k[1]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        sys.rhs(x + C3 * h, ytmp, &mut k[2]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        sys.rhs(x + C4 * h, ytmp, &mut k[3]);
        for i in 0..n {
            ytmp[i] =
                y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        sys.rhs(x + C5 * h, ytmp, &mut k[4]);
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k[0][i]
                    + A62 * k[1][i]
                    + A63 * k[2][i]
                    + A64 * k[3][i]
                    + A65 * k[4][i]);
        }
        sys.rhs(x + h, ytmp, &mut k[5]);
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k[0][i]
                    + A73 * k[2][i]
                    + A74 * k[3][i]
                    + A75 * k[4][i]
                    + A76 * k[5][i]);
        }
        sys.rhs(x + h, ynew, &mut k[6]);
    }

    /// Starting step from Hairer, Nørsett & Wanner (II.4), capped by the span.
    fn initial_step<S: System>(&self, sys: &S, x: f64, y: &[f64], f0: &[f64], span: f64) -> f64 {
        let n = y.len();
        let scale = |i: usize| self.atol + self.rtol * y[i].abs();
        let rms = |v: &dyn Fn(usize) -> f64| {
            let big = (0..n).map(|i| v(i).abs()).fold(0.0, f64::max);
            if big == 0.0 || !big.is_finite() {
                return big;
            }
            big * ((0..n).map(|i| (v(i) / big).powi(2)).sum::<f64>() / n as f64).sqrt()
        };
        let d0 = rms(&|i| y[i] / scale(i));
        let d1 = rms(&|i| f0[i] / scale(i));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        }
        .min(span);
        let y1: Vec<f64> = (0..n).map(|i| y[i] + h0 * f0[i]).collect();
        let mut f1 = vec![0.0; n];
        sys.rhs(x + h0, &y1, &mut f1);
        let d2 = rms(&|i| (f1[i] - f0[i]) / scale(i)) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        // The first step is never shorter than 1e-8 of the span.
        (100.0 * h0).min(h1).max(1e-8 * span).min(span)
    }
}
