//! Cumulant u(a, λ), extinction functional v(a) and the Laplace transforms of
//! CSBP and CSBPI marginals.
//!
//! u solves ∂u/∂a = -ψ(u), u(0, λ) = λ. Closed forms are used for the pure
//! quadratic and pure stable families; everything else goes through an
//! adaptive Dormand-Prince integration of w = ln u, so that the absolute step
//! tolerance on w is a relative tolerance on u.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanisms::{exp_m1_plus, BranchingMechanism, ImmigrationMechanism, Jumps};
use crate::ode::{self, OdeOptions, Trajectory};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Closed,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub method: Method,
    pub est_error: f64,
}

impl KernelValue {
    fn closed(value: f64) -> Self {
        Self {
            value,
            method: Method::Closed,
            est_error: value.abs() * 4.0 * f64::EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CumulantSolver {
    mechanism: BranchingMechanism,
    ode_rel_tol: f64,
    quad_rel_tol: f64,
}

/// λ ladder used to approach v(a) = lim u(a, λ).
const V_LADDER_STEP: f64 = 1e3;
const V_LADDER_MAX: f64 = 1e300;
const MAX_STEPS: usize = 1_000_000;

impl CumulantSolver {
    pub fn new(mechanism: BranchingMechanism) -> Self {
        Self {
            mechanism,
            ode_rel_tol: 1e-10,
            quad_rel_tol: 1e-9,
        }
    }

    pub fn with_tolerances(
        mechanism: BranchingMechanism,
        ode_rel_tol: f64,
        quad_rel_tol: f64,
    ) -> Result<Self> {
        if !(ode_rel_tol > 0.0 && quad_rel_tol > 0.0) {
            return Err(Error::param("solver tolerances must be positive"));
        }
        Ok(Self {
            mechanism,
            ode_rel_tol,
            quad_rel_tol,
        })
    }

    pub fn mechanism(&self) -> &BranchingMechanism {
        &self.mechanism
    }

    pub fn ode_rel_tol(&self) -> f64 {
        self.ode_rel_tol
    }

    pub fn quad_rel_tol(&self) -> f64 {
        self.quad_rel_tol
    }

    /// Whether u(a, λ) has a closed form for this mechanism.
    pub fn has_closed_form(&self) -> bool {
        let m = &self.mechanism;
        match m.jumps() {
            Jumps::None => true,
            Jumps::Stable { .. } => m.alpha() == 0.0 && m.beta() == 0.0,
            Jumps::FiniteList { .. } => false,
        }
    }

    fn u_closed(&self, a: f64, lambda: f64) -> Option<f64> {
        let m = &self.mechanism;
        if lambda == 0.0 {
            return Some(0.0);
        }
        match m.jumps() {
            Jumps::None => {
                let (alpha, beta) = (m.alpha(), m.beta());
                Some(if alpha == 0.0 {
                    lambda / (1.0 + beta * a * lambda)
                } else {
                    let decay = (-alpha * a).exp();
                    let one_minus = -(-alpha * a).exp_m1();
                    alpha * lambda * decay / (alpha + beta * lambda * one_minus)
                })
            }
            Jumps::Stable { c, gamma } if m.alpha() == 0.0 && m.beta() == 0.0 => {
                let theta = gamma - 1.0;
                Some((lambda.powf(-theta) + c * theta * a).powf(-1.0 / theta))
            }
            _ => None,
        }
    }

    /// ψ(u)/u, finite as u → 0.
    fn psi_ratio(&self, u: f64) -> f64 {
        let m = &self.mechanism;
        let jumps = match m.jumps() {
            Jumps::None => 0.0,
            Jumps::Stable { c, gamma } => c * u.powf(gamma - 1.0),
            Jumps::FiniteList { atoms } => atoms
                .iter()
                .map(|&(r, mass)| {
                    let x = u * r;
                    if x == 0.0 {
                        0.0
                    } else {
                        mass * r * exp_m1_plus(x) / x
                    }
                })
                .sum(),
        };
        m.alpha() + m.beta() * u + jumps
    }

    /// Dense trajectory of w(s) = ln u(s, λ) on `[0, a]`; requires λ > 0.
    pub fn log_trajectory(&self, a: f64, lambda: f64) -> Result<Trajectory> {
        let opts = OdeOptions {
            atol: self.ode_rel_tol,
            rtol: 0.0,
            max_steps: MAX_STEPS,
        };
        ode::integrate(|w| -self.psi_ratio(w.exp()), lambda.ln(), a, &opts)
            .map_err(|(_, w)| ode::integration_error(a, lambda, w.exp()))
    }

    fn check_args(a: f64, lambda: f64) -> Result<()> {
        if !(a >= 0.0 && lambda >= 0.0) || a.is_nan() || lambda.is_nan() {
            return Err(Error::param(format!(
                "u(a, λ) needs a, λ >= 0, got a={a}, λ={lambda}"
            )));
        }
        Ok(())
    }

    /// u(a, λ) by the generic ODE path, bypassing closed forms.
    pub fn u_numeric(&self, a: f64, lambda: f64) -> Result<KernelValue> {
        Self::check_args(a, lambda)?;
        if lambda == 0.0 || a == 0.0 {
            return Ok(KernelValue::closed(lambda));
        }
        if lambda.is_infinite() {
            return self.v(a);
        }
        let traj = self.log_trajectory(a, lambda)?;
        let value = traj.y_end().exp();
        Ok(KernelValue {
            value,
            method: Method::Ode,
            est_error: value * traj.error_estimate,
        })
    }

    /// u(a, λ) with its method and error estimate.
    pub fn u_value(&self, a: f64, lambda: f64) -> Result<KernelValue> {
        Self::check_args(a, lambda)?;
        if a == 0.0 {
            return Ok(KernelValue::closed(lambda));
        }
        if lambda.is_infinite() {
            return self.v(a);
        }
        match self.u_closed(a, lambda) {
            Some(v) => Ok(KernelValue::closed(v)),
            None => self.u_numeric(a, lambda),
        }
    }

    pub fn u(&self, a: f64, lambda: f64) -> Result<f64> {
        self.u_value(a, lambda).map(|k| k.value)
    }

    fn v_closed(&self, a: f64) -> Option<f64> {
        let m = &self.mechanism;
        match m.jumps() {
            Jumps::None if m.beta() > 0.0 => Some(if m.alpha() == 0.0 {
                1.0 / (m.beta() * a)
            } else {
                m.alpha() / (m.beta() * (m.alpha() * a).exp_m1())
            }),
            Jumps::Stable { c, gamma } if m.alpha() == 0.0 && m.beta() == 0.0 => {
                let theta = gamma - 1.0;
                Some((c * theta * a).powf(-1.0 / theta))
            }
            _ => None,
        }
    }

    /// v(a) = lim_{λ→∞} u(a, λ), finite under the Grey condition.
    pub fn v(&self, a: f64) -> Result<KernelValue> {
        if !self.mechanism.is_grey() {
            return Err(Error::Unsupported(format!(
                "v(a) requires the Grey condition; {} fails it",
                self.mechanism
            )));
        }
        if !(a > 0.0) {
            return Err(Error::param(format!("v(a) needs a > 0, got {a}")));
        }
        if let Some(v) = self.v_closed(a) {
            return Ok(KernelValue::closed(v));
        }
        self.v_numeric(a)
    }

    /// v(a) through the λ ladder, bypassing closed forms.
    pub fn v_numeric(&self, a: f64) -> Result<KernelValue> {
        if !self.mechanism.is_grey() {
            return Err(Error::Unsupported(format!(
                "v(a) requires the Grey condition; {} fails it",
                self.mechanism
            )));
        }
        let mut lambda = V_LADDER_STEP;
        let mut prev = self.u_numeric(a, lambda)?;
        while lambda < V_LADDER_MAX {
            lambda *= V_LADDER_STEP;
            let next = self.u_numeric(a, lambda)?;
            let change = (next.value - prev.value).abs();
            if change < self.ode_rel_tol * next.value {
                return Ok(KernelValue {
                    value: next.value,
                    method: Method::Ode,
                    est_error: next.est_error + change,
                });
            }
            prev = next;
        }
        Err(ode::integration_error(a, lambda, prev.value))
    }

    /// E[exp(-λ Y_a) | Y_0 = x0] for the CSBP(ψ).
    pub fn csbp_laplace(&self, a: f64, lambda: f64, x0: f64) -> Result<KernelValue> {
        if !(x0 >= 0.0) {
            return Err(Error::param(format!("x0 must be >= 0, got {x0}")));
        }
        let u = self.u_value(a, lambda)?;
        let value = (-x0 * u.value).exp();
        Ok(KernelValue {
            value,
            method: u.method,
            est_error: value * x0 * u.est_error,
        })
    }

    /// ∫_0^a φ(u(s, λ)) ds in closed form when φ is linear and u is closed.
    fn immigration_integral_closed(&self, imm: &ImmigrationMechanism, a: f64, lambda: f64) -> Option<f64> {
        let rate = imm.linear_rate()?;
        if rate == 0.0 {
            return Some(0.0);
        }
        let m = &self.mechanism;
        let integral_u = match m.jumps() {
            Jumps::None => {
                let (alpha, beta) = (m.alpha(), m.beta());
                match (alpha == 0.0, beta == 0.0) {
                    (true, true) => lambda * a,
                    (false, true) => lambda * (-(-alpha * a).exp_m1()) / alpha,
                    (true, false) => (beta * a * lambda).ln_1p() / beta,
                    (false, false) => {
                        (beta * lambda * (-(-alpha * a).exp_m1()) / alpha).ln_1p() / beta
                    }
                }
            }
            Jumps::Stable { c, gamma } if m.alpha() == 0.0 && m.beta() == 0.0 => {
                let theta = gamma - 1.0;
                let e = (theta - 1.0) / theta;
                let w0 = lambda.powf(-theta);
                let wa = w0 + c * theta * a;
                (wa.powf(e) - w0.powf(e)) / (c * (theta - 1.0))
            }
            _ => return None,
        };
        Some(rate * integral_u)
    }

    /// ∫_0^a φ(u(s, λ)) ds.
    pub fn immigration_integral(
        &self,
        imm: &ImmigrationMechanism,
        a: f64,
        lambda: f64,
    ) -> Result<KernelValue> {
        Self::check_args(a, lambda)?;
        if a == 0.0 || lambda == 0.0 {
            return Ok(KernelValue::closed(0.0));
        }
        if let Some(v) = self.immigration_integral_closed(imm, a, lambda) {
            return Ok(KernelValue::closed(v));
        }
        let max_intervals = 20_000;
        if self.has_closed_form() {
            let r = quad::integrate_partition(
                |s| imm.phi(self.u_closed(s, lambda).expect("closed form")),
                &[0.0, a],
                self.quad_rel_tol,
                0.0,
                max_intervals,
            )?;
            return Ok(KernelValue {
                value: r.value,
                method: Method::Ode,
                est_error: r.est_error,
            });
        }
        let traj = self.log_trajectory(a, lambda)?;
        let r = quad::integrate_partition(
            |s| imm.phi(traj.eval(s).exp()),
            &traj.mesh(),
            self.quad_rel_tol,
            0.0,
            max_intervals,
        )?;
        // Interpolation error enters through φ(u); bound it by φ' ≤ φ(u)/u·(relative error).
        let interp = r.value.abs() * traj.error_estimate;
        Ok(KernelValue {
            value: r.value,
            method: Method::Ode,
            est_error: r.est_error + interp,
        })
    }

    /// exp(-x0 u(a, λ) - ∫_0^a φ(u(s, λ)) ds), the CSBPI(ψ, φ) kernel.
    pub fn csbpi_laplace(
        &self,
        imm: &ImmigrationMechanism,
        a: f64,
        lambda: f64,
        x0: f64,
    ) -> Result<KernelValue> {
        if !(x0 >= 0.0) {
            return Err(Error::param(format!("x0 must be >= 0, got {x0}")));
        }
        let u = self.u_value(a, lambda)?;
        let integral = self.immigration_integral(imm, a, lambda)?;
        let exponent = x0 * u.value + integral.value;
        let value = (-exponent).exp();
        let method = if u.method == Method::Closed && integral.method == Method::Closed {
            Method::Closed
        } else {
            Method::Ode
        };
        Ok(KernelValue {
            value,
            method,
            est_error: value * (x0 * u.est_error + integral.est_error),
        })
    }
}
