//! Absorption coefficient fields `alpha(x)`.
//!
//! Every field carries strictly positive lower and upper bounds
//! `0 < c0 <= alpha(x) <= c1` and supports point evaluation, gradients and
//! attenuation line integrals. Fields are extended to the whole space by
//! clamping, so optical depths along rays leaving the domain stay
//! well-defined.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::quadrature::GaussRule;

#[derive(Debug, Clone)]
pub enum AbsorptionField {
    /// Spatially constant coefficient; enables closed-form fast paths.
    Constant(f64),
    /// Radial polynomial profile `alpha(|x - center|) = sum_k c_k r^k`,
    /// with bounds taken over `r` in `[0, r_max]`.
    RadialPoly {
        center: Vec3,
        coeffs: Vec<f64>,
        r_max: f64,
        bounds: (f64, f64),
    },
    /// Values on a regular grid with trilinear interpolation, clamped to
    /// the grid box outside. Smooth fields should be supplied with enough
    /// resolution for the interpolant to track their derivatives.
    Grid {
        origin: Vec3,
        spacing: Vec3,
        dims: [usize; 3],
        values: Vec<f64>,
        bounds: (f64, f64),
    },
}

impl AbsorptionField {
    pub fn constant(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Config(format!("constant absorption must be positive, got {alpha}")));
        }
        Ok(AbsorptionField::Constant(alpha))
    }

    /// Radial polynomial profile; the positivity bounds are established by
    /// dense sampling of `[0, r_max]`.
    pub fn radial_poly(center: Vec3, coeffs: Vec<f64>, r_max: f64) -> Result<Self> {
        if coeffs.is_empty() || !(r_max > 0.0) {
            return Err(Error::Config("radial profile needs coefficients and a positive range".into()));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let n = 20_000;
        for i in 0..=n {
            let v = horner(&coeffs, r_max * i as f64 / n as f64);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(lo > 0.0) {
            return Err(Error::Config(format!("radial absorption profile not strictly positive on [0, {r_max}]: min {lo}")));
        }
        Ok(AbsorptionField::RadialPoly { center, coeffs, r_max, bounds: (lo, hi) })
    }

    pub fn grid(origin: Vec3, spacing: Vec3, dims: [usize; 3], values: Vec<f64>) -> Result<Self> {
        if dims.iter().any(|&d| d < 2) || values.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::Config("grid absorption needs dims >= 2 per axis and matching value count".into()));
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(lo > 0.0) {
            return Err(Error::Config(format!("grid absorption must be strictly positive, min {lo}")));
        }
        Ok(AbsorptionField::Grid { origin, spacing, dims, values, bounds: (lo, hi) })
    }

    /// Lower and upper bounds `(c0, c1)`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            AbsorptionField::Constant(a) => (*a, *a),
            AbsorptionField::RadialPoly { bounds, .. } => *bounds,
            AbsorptionField::Grid { bounds, .. } => *bounds,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, AbsorptionField::Constant(_))
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        match self {
            AbsorptionField::Constant(a) => *a,
            AbsorptionField::RadialPoly { center, coeffs, r_max, .. } => {
                let r = (x - center).norm().min(*r_max);
                horner(coeffs, r)
            }
            AbsorptionField::Grid { origin, spacing, dims, values, .. } => {
                let mut t = [0.0; 3];
                let mut i0 = [0usize; 3];
                for k in 0..3 {
                    let s = ((x[k] - origin[k]) / spacing[k]).clamp(0.0, (dims[k] - 1) as f64);
                    let i = (s.floor() as usize).min(dims[k] - 2);
                    i0[k] = i;
                    t[k] = s - i as f64;
                }
                let idx = |i: usize, j: usize, k: usize| values[(i * dims[1] + j) * dims[2] + k];
                let mut acc = 0.0;
                for di in 0..2 {
                    for dj in 0..2 {
                        for dk in 0..2 {
                            let w = (if di == 0 { 1.0 - t[0] } else { t[0] })
                                * (if dj == 0 { 1.0 - t[1] } else { t[1] })
                                * (if dk == 0 { 1.0 - t[2] } else { t[2] });
                            acc += w * idx(i0[0] + di, i0[1] + dj, i0[2] + dk);
                        }
                    }
                }
                acc
            }
        }
    }

    /// Gradient of the field; closed form for the analytic kinds, central
    /// differences for the grid interpolant.
    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        match self {
            AbsorptionField::Constant(_) => Vec3::zeros(),
            AbsorptionField::RadialPoly { center, coeffs, r_max, .. } => {
                let d = x - center;
                let r = d.norm();
                if r < 1e-14 || r > *r_max {
                    return Vec3::zeros();
                }
                let dpdr = horner_derivative(coeffs, r);
                d * (dpdr / r)
            }
            AbsorptionField::Grid { spacing, .. } => {
                let mut g = Vec3::zeros();
                for k in 0..3 {
                    let h = 0.5 * spacing[k];
                    let mut xp = *x;
                    let mut xm = *x;
                    xp[k] += h;
                    xm[k] -= h;
                    g[k] = (self.eval(&xp) - self.eval(&xm)) / (2.0 * h);
                }
                g
            }
        }
    }

    /// Attenuation line integral `int_[a,b] alpha(xi) ds(xi)` by composite
    /// Gauss-Legendre with panel length at most `eps/2`, so the optical
    /// depth is resolved to the kernel scale.
    pub fn line_integral(&self, a: &Vec3, b: &Vec3, eps: f64) -> f64 {
        let len = (b - a).norm();
        if len == 0.0 {
            return 0.0;
        }
        if let AbsorptionField::Constant(alpha) = self {
            return alpha * len;
        }
        let rule = GaussRule::new(4);
        let panels = (len / (0.5 * eps)).ceil().max(1.0) as usize;
        let dir = (b - a) / len;
        rule.integrate_composite(0.0, len, panels, |t| self.eval(&(a + dir * t)))
    }
}

fn horner(coeffs: &[f64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c)
}

fn horner_derivative(coeffs: &[f64], r: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, c)| acc * r + k as f64 * c)
}
