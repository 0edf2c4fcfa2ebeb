//! Exponential-integral kernel calculus.
//!
//! The one-dimensional transport kernel is the normalized exponential
//! integral
//!
//! ```text
//! K(x) = (1/2) * int_{|x|}^inf e^{-t}/t dt = E1(|x|) / 2,
//! ```
//!
//! even, strictly positive away from the origin and log-singular at 0.
//! All integral identities the solvers need (`int K`, `int s K`, interval
//! masses, the Fourier symbol, the 3D epsilon-scaled kernel mass) are
//! exposed here as closed forms so that no quadrature routine ever has to
//! sample the singular point.

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Mass of `K` over a half line cut at the singular point:
/// `int_0^inf K = 1/2` by the total-mass identity. Exposed as a constant so
/// callers never evaluate the closed forms at their removable limit.
pub const HALF_LINE_MASS: f64 = 0.5;

/// Value of the kernel `K` at a nonzero argument.
///
/// Invariants: finite, strictly positive, even in the argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue(f64);

impl KernelValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<KernelValue> for f64 {
    fn from(v: KernelValue) -> f64 {
        v.0
    }
}

/// Exponential integral `E1(x) = int_x^inf e^{-t}/t dt` for `x > 0`.
///
/// Power series around 0 for `x <= 1`, modified-Lentz continued fraction
/// for `x > 1`; relative error below 1e-13 over the whole range.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("exp_integral_e1", format!("requires x > 0, got {x}")));
    }
    if x <= 1.0 {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let contrib = -term / kf;
            sum += contrib;
            if contrib.abs() < 1e-17 * (sum.abs() + 1e-300) {
                break;
            }
        }
        Ok(-EULER_GAMMA - x.ln() + sum)
    } else {
        // E1(x) = e^{-x} / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))
        let tiny = 1e-300;
        let b0 = x + 1.0;
        let mut f = b0;
        let mut c = b0;
        let mut d = 0.0;
        for k in 1..200 {
            let kf = k as f64;
            let a = -kf * kf;
            let b = x + 2.0 * kf + 1.0;
            d = b + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok((-x).exp() / f)
    }
}

/// Exponential integral `E2(x) = e^{-x} - x E1(x)` for `x >= 0`; `E2(0) = 1`.
pub fn exp_integral_e2(x: f64) -> Result<f64> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::domain("exp_integral_e2", format!("requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok((-x).exp() - x * exp_integral_e1(x)?)
}

/// Normalized exponential-integral kernel `K(x) = E1(|x|)/2`, `x != 0`.
pub fn kernel_k(x: f64) -> Result<KernelValue> {
    if x == 0.0 {
        return Err(Error::domain("kernel_k", "logarithmic singularity at x = 0"));
    }
    Ok(KernelValue(0.5 * exp_integral_e1(x.abs())?))
}

/// Fourier symbol of the kernel: `K_hat(xi) = arctan(xi) / (xi * sqrt(2 pi))`,
/// with the removable singularity at `xi = 0` filled by `1/sqrt(2 pi)`.
pub fn kernel_fourier(xi: f64) -> f64 {
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let a = xi.abs();
    if a < 1e-4 {
        // arctan(x)/x = 1 - x^2/3 + x^4/5 - ...
        let x2 = xi * xi;
        norm * (1.0 - x2 / 3.0 + x2 * x2 / 5.0)
    } else {
        norm * a.atan() / a
    }
}

/// Upper-tail mass `int_x^inf K(s) ds = e^{-x}/2 - x K(x)` for `x > 0`.
///
/// The limit value 1/2 at `x = 0` is [`HALF_LINE_MASS`].
pub fn tail_from(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("tail_from", format!("requires x > 0, got {x}")));
    }
    Ok(0.5 * (-x).exp() - x * kernel_k(x)?.value())
}

/// Mass from a negative cut: `int_{-x}^inf K(s) ds = 1 - e^{-x}/2 + x K(x)`
/// where the argument is `-x < 0`.
pub fn head_from(minus_x: f64) -> Result<f64> {
    if !(minus_x < 0.0) {
        return Err(Error::domain("head_from", format!("requires a negative cut, got {minus_x}")));
    }
    let x = -minus_x;
    Ok(1.0 - 0.5 * (-x).exp() + x * kernel_k(x)?.value())
}

/// First moment of the upper tail,
/// `int_x^inf s K(s) ds = x e^{-x}/4 + e^{-x}/4 - x^2 K(x)/2` for `x > 0`,
/// continued by `1/4` at `x = 0`.
///
/// By evenness of `K` the same value equals `int_{-x}^inf s K(s) ds`.
pub fn first_moment_tail(x: f64) -> Result<f64> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::domain("first_moment_tail", format!("requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.25);
    }
    let e = (-x).exp();
    Ok(0.25 * x * e + 0.25 * e - 0.5 * x * x * kernel_k(x)?.value())
}

/// Total mass above an arbitrary cut, `int_a^inf K(s) ds`, valid for any
/// finite `a` including 0 (where it is 1/2 by continuity).
pub fn mass_above(a: f64) -> f64 {
    if a == 0.0 {
        HALF_LINE_MASS
    } else if a > 0.0 {
        tail_from(a).expect("a > 0")
    } else {
        head_from(a).expect("a < 0")
    }
}

/// Signed first moment above an arbitrary cut, `int_a^inf s K(|s|) ds`.
///
/// The integrand is odd, so the value depends only on `|a|`.
pub fn first_moment_above(a: f64) -> f64 {
    first_moment_tail(a.abs()).expect("|a| >= 0")
}

/// Kernel mass of the interval `[a, b]`: `int_a^b K(s) ds`, closed form.
pub fn kernel_mass(a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    mass_above(a) - mass_above(b)
}

/// First kernel moment of the interval `[a, b]`: `int_a^b s K(|s|) ds`.
pub fn kernel_first_moment(a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    first_moment_above(a) - first_moment_above(b)
}

/// The 3D epsilon-scaled kernel at separation `r` for constant absorption:
/// `alpha * e^{-alpha r / eps} / (4 pi eps r^2)`.
pub fn kernel_eps_const(alpha: f64, eps: f64, r: f64) -> Result<f64> {
    if !(alpha > 0.0 && eps > 0.0) {
        return Err(Error::domain("kernel_eps_const", format!("requires alpha, eps > 0, got alpha={alpha}, eps={eps}")));
    }
    if !(r > 0.0) {
        return Err(Error::domain("kernel_eps_const", format!("singular at separation r = 0, got {r}")));
    }
    Ok(alpha * (-alpha * r / eps).exp() / (4.0 * std::f64::consts::PI * eps * r * r))
}

/// Companion closed form: mass of the 3D kernel over a ball of radius `r`
/// around its center, `1 - e^{-alpha r / eps}`. Tends to 1 as `r -> inf`.
pub fn ball_mass_const(alpha: f64, eps: f64, r: f64) -> Result<f64> {
    if !(alpha > 0.0 && eps > 0.0 && r >= 0.0) {
        return Err(Error::domain("ball_mass_const", format!("requires alpha, eps > 0 and r >= 0, got alpha={alpha}, eps={eps}, r={r}")));
    }
    Ok(1.0 - (-alpha * r / eps).exp())
}

/// Envelope bounds on the kernel:
/// `e^{-|x|} ln(1 + 2/|x|)/4 <= K(x) <= e^{-|x|} ln(1 + 1/|x|)/2`.
pub fn envelope_bounds(x: f64) -> (f64, f64) {
    let a = x.abs();
    let e = (-a).exp();
    (0.25 * e * (2.0 / a).ln_1p(), 0.5 * e * (1.0 / a).ln_1p())
}
