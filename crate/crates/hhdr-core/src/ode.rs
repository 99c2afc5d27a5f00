//! Adaptive embedded Runge-Kutta integrator of order 5(4)
//! (Dormand-Prince coefficients, FSAL, PI step-size control).
//!
//! The integrator is deterministic: identical inputs produce bit-identical
//! step sequences regardless of the surrounding thread count.

/// Why an integration stopped early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeFailure {
    /// The accepted+rejected step count hit the budget.
    StepBudget { t_reached: f64 },
    /// The step size collapsed below `t * EPS` without meeting the error
    /// target (stiffness or a non-smooth right-hand side).
    StepUnderflow { t_reached: f64, h: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct DormandPrince5 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Initial step; estimated from the first derivative when `None`.
    pub h_initial: Option<f64>,
}

impl Default for DormandPrince5 {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_steps: 20_000_000,
            h_initial: None,
        }
    }
}

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN_INV: f64 = 5.0; // largest step shrink: h/5
const FAC_MAX_INV: f64 = 0.1; // largest step growth: 10 h

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl DormandPrince5 {
    /// Integrate `dy/dt = f(t, y)` from `t0` to `t_end` (`t_end > t0`).
    /// `observe` fires at `t0` and after every accepted step.
    pub fn integrate<const N: usize, F, O>(
        &self,
        f: F,
        t0: f64,
        t_end: f64,
        y0: [f64; N],
        mut observe: O,
    ) -> Result<([f64; N], StepStats), (OdeFailure, StepStats)>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N]),
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut stats = StepStats::default();
        observe(t, &y);

        let scale = |yi: f64, yni: f64| self.abs_tol + self.rel_tol * yi.abs().max(yni.abs());
        let mut h = self.h_initial.unwrap_or_else(|| {
            // Crude first-step estimate from the derivative magnitude,
            // refined immediately by the controller.
            let d0: f64 = y
                .iter()
                .map(|&v| (v / scale(v, v)).powi(2))
                .sum::<f64>()
                .sqrt();
            let d1: f64 = k1
                .iter()
                .zip(&y)
                .map(|(&d, &v)| (d / scale(v, v)).powi(2))
                .sum::<f64>()
                .sqrt();
            let h0 = if d1 > 1e-10 { 0.01 * d0 / d1 } else { 1e-6 };
            h0.clamp(1e-10, (t_end - t0) * 0.1).max(1e-12)
        });
        let mut facold: f64 = 1e-4;

        while t < t_end {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err((OdeFailure::StepBudget { t_reached: t }, stats));
            }
            if h < t.abs().max(1.0) * f64::EPSILON * 16.0 {
                return Err((OdeFailure::StepUnderflow { t_reached: t, h }, stats));
            }
            if h >= t_end - t {
                h = t_end - t;
            }

            let stage = |coeffs: &[f64], ks: &[&[f64; N]], y: &[f64; N]| -> [f64; N] {
                let mut out = *y;
                for (a, k) in coeffs.iter().zip(ks) {
                    for i in 0..N {
                        out[i] += h * a * k[i];
                    }
                }
                out
            };

            let y2 = stage(&A2, &[&k1], &y);
            let k2 = f(t + C[1] * h, &y2);
            let y3 = stage(&A3, &[&k1, &k2], &y);
            let k3 = f(t + C[2] * h, &y3);
            let y4 = stage(&A4, &[&k1, &k2, &k3], &y);
            let k4 = f(t + C[3] * h, &y4);
            let y5 = stage(&A5, &[&k1, &k2, &k3, &k4], &y);
            let k5 = f(t + C[4] * h, &y5);
            let y6 = stage(&A6, &[&k1, &k2, &k3, &k4, &k5], &y);
            let k6 = f(t + C[5] * h, &y6);
            let ynew = stage(&B, &[&k1, &k2, &k3, &k4, &k5, &k6], &y);
            let k7 = f(t + h, &ynew);

            let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
            let mut err_sq = 0.0;
            for i in 0..N {
                let e: f64 = E.iter().zip(&ks).map(|(c, k)| c * k[i]).sum();
                let sc = scale(y[i], ynew[i]);
                err_sq += (h * e / sc).powi(2);
            }
            let err = (err_sq / N as f64).sqrt();

            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                let fac = (fac11 / facold.powf(BETA) / SAFE)
                    .clamp(FAC_MAX_INV, FAC_MIN_INV);
                facold = err.max(1e-4);
                t += h;
                y = ynew;
                k1 = k7; // FSAL
                stats.accepted += 1;
                observe(t, &y);
                h /= fac;
                if t >= t_end {
                    break;
                }
            } else {
                stats.rejected += 1;
                h /= (fac11 / SAFE).min(FAC_MIN_INV);
            }
        }
        Ok((y, stats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_accurate() {
        let solver = DormandPrince5 {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            ..Default::default()
        };
        let (y, stats) = solver
            .integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, 5.0, [1.0], |_, _| {})
            .unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-10);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let solver = DormandPrince5 {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            ..Default::default()
        };
        let (y, _) = solver
            .integrate(
                |_, y: &[f64; 2]| [y[1], -y[0]],
                0.0,
                20.0 * std::f64::consts::PI,
                [1.0, 0.0],
                |_, _| {},
            )
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-7, "cos end {}", y[0]);
        assert!(y[1].abs() < 1e-7, "sin end {}", y[1]);
    }

    #[test]
    fn lands_exactly_on_t_end() {
        let solver = DormandPrince5::default();
        let mut last_t = 0.0;
        let (_, _) = solver
            .integrate(
                |_, y: &[f64; 1]| [0.3 * y[0]],
                0.0,
                7.7,
                [0.5],
                |t, _| last_t = t,
            )
            .unwrap();
        assert_eq!(last_t, 7.7);
    }

    #[test]
    fn step_budget_is_enforced() {
        let solver = DormandPrince5 {
            max_steps: 10,
            ..Default::default()
        };
        let r = solver.integrate(
            |_, y: &[f64; 2]| [y[1], -1000.0 * y[0]],
            0.0,
            1e6,
            [1.0, 0.0],
            |_, _| {},
        );
        match r {
            Err((OdeFailure::StepBudget { t_reached }, stats)) => {
                assert!(t_reached < 1e6);
                assert_eq!(stats.accepted + stats.rejected, 10);
            }
            other => panic!("expected step budget failure, got {other:?}"),
        }
    }

    #[test]
    fn fifth_order_convergence() {
        // End-state error against a tight-tolerance reference must drop
        // consistently with a 5th-order method when tolerances shrink.
        let reference = {
            let solver = DormandPrince5 {
                rel_tol: 1e-13,
                abs_tol: 1e-15,
                ..Default::default()
            };
            solver
                .integrate(
                    |t, y: &[f64; 1]| [y[0] * (t).sin()],
                    0.0,
                    10.0,
                    [1.0],
                    |_, _| {},
                )
                .unwrap()
                .0[0]
        };
        let run = |tol: f64| {
            let solver = DormandPrince5 {
                rel_tol: tol,
                abs_tol: tol * 1e-3,
                ..Default::default()
            };
            (solver
                .integrate(
                    |t, y: &[f64; 1]| [y[0] * (t).sin()],
                    0.0,
                    10.0,
                    [1.0],
                    |_, _| {},
                )
                .unwrap()
                .0[0]
                - reference)
                .abs()
        };
        let e1 = run(1e-5);
        let e2 = run(1e-8);
        assert!(e2 < e1, "error must shrink with tolerance: {e1} vs {e2}");
        assert!(e2 < 1e-7, "tight-tolerance error too large: {e2}");
    }
}
