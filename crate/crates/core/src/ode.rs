//! Dormand-Prince 5(4) integrator for scalar autonomous ODEs y' = f(y), with
//! the standard fourth-order continuous extension for dense output.

use crate::error::Error;

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

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Absolute tolerance on y per step.
    pub atol: f64,
    /// Relative tolerance on y per step.
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            max_steps: 1_000_000,
        }
    }
}

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone, Copy)]
struct Segment {
    t0: f64,
    h: f64,
    rcont: [f64; 5],
}

impl Segment {
    fn eval(&self, t: f64) -> f64 {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.rcont;
        r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)))
    }
}

/// Accepted trajectory on `[0, t_end]` with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    segments: Vec<Segment>,
    t_end: f64,
    y_end: f64,
    /// Sum of the accepted local error estimates.
    pub error_estimate: f64,
}

impl Trajectory {
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn y_end(&self) -> f64 {
        self.y_end
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    /// Step boundaries, starting at 0 and ending at `t_end`.
    pub fn mesh(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.segments.iter().map(|s| s.t0).collect();
        m.push(self.t_end);
        m
    }

    /// Dense-output value at `t` in `[0, t_end]`.
    pub fn eval(&self, t: f64) -> f64 {
        if self.segments.is_empty() {
            return self.y_end;
        }
        if t >= self.t_end {
            return self.y_end;
        }
        let idx = self
            .segments
            .partition_point(|s| s.t0 <= t)
            .saturating_sub(1);
        self.segments[idx].eval(t)
    }
}

fn initial_step<F: Fn(f64) -> f64>(f: &F, y0: f64, f0: f64, t_end: f64, opts: &OdeOptions) -> f64 {
    let sk = opts.atol + opts.rtol * y0.abs();
    let d0 = y0.abs() / sk;
    let d1 = f0.abs() / sk;
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(t_end);
    let y1 = y0 + h0 * f0;
    let f1 = f(y1);
    let d2 = (f1 - f0).abs() / sk / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(t_end)
}

/// Integrates y' = f(y), y(0) = y0 on `[0, t_end]`.
///
/// On failure returns `(t_reached, y_reached)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    y0: f64,
    t_end: f64,
    opts: &OdeOptions,
) -> std::result::Result<Trajectory, (f64, f64)> {
    if t_end <= 0.0 {
        return Ok(Trajectory {
            segments: Vec::new(),
            t_end: 0.0,
            y_end: y0,
            error_estimate: 0.0,
        });
    }
    let safety = 0.9;
    let fac_min = 0.2;
    let fac_max = 10.0;
    let beta = 0.04;
    let expo = 0.2 - beta * 0.75;

    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = f(y);
    let mut h = initial_step(&f, y, k1, t_end, opts);
    let mut err_old: f64 = 1e-4;
    let mut segments = Vec::new();
    let mut error_estimate = 0.0;
    let mut reject = false;

    for _ in 0..opts.max_steps {
        if t + 1.01 * h >= t_end {
            h = t_end - t;
        }
        let k2 = f(y + h * A21 * k1);
        let k3 = f(y + h * (A31 * k1 + A32 * k2));
        let k4 = f(y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
        let k7 = f(y_new);
        let err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let sk = opts.atol + opts.rtol * y.abs().max(y_new.abs());
        let err = (err_vec / sk).abs();

        if !y_new.is_finite() || !err.is_finite() {
            h *= 0.1;
            reject = true;
            if h < 1e-300 {
                return Err((t, y));
            }
            continue;
        }

        if err <= 1.0 {
            let ydiff = y_new - y;
            let bspl = h * k1 - ydiff;
            let rcont = [
                y,
                ydiff,
                bspl,
                ydiff - h * k7 - bspl,
                h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
            ];
            segments.push(Segment { t0: t, h, rcont });
            error_estimate += err_vec.abs();
            t += h;
            y = y_new;
            k1 = k7;
            if t >= t_end {
                return Ok(Trajectory {
                    segments,
                    t_end,
                    y_end: y,
                    error_estimate,
                });
            }
            let err_c = err.max(1e-10);
            let mut fac = err_c.powf(expo) / err_old.powf(beta) / safety;
            fac = fac.clamp(1.0 / fac_max, 1.0 / fac_min);
            let h_new = h / fac;
            err_old = err_c;
            h = if reject { h_new.min(h) } else { h_new };
            reject = false;
        } else {
            let fac = (err.powf(expo) / safety).min(1.0 / fac_min);
            h /= fac;
            reject = true;
        }
    }
    Err((t, y))
}

/// Error wrapper used by the kernels.
pub(crate) fn integration_error(a: f64, lambda: f64, last_u: f64) -> Error {
    Error::IntegrationFailure { a, lambda, last_u }
}
