//! Grey incident radiation and the two source terms of the integral
//! equations.
//!
//! The boundary data is a frequency-integrated intensity `g(n) >= 0` on the
//! unit sphere. Two attenuated moments of it drive the solvers:
//!
//! * the half-space source
//!   `G(x) = int_{n.N < 0} g(n) e^{-x/|n.N|} dn` feeding the boundary-layer
//!   equation, and
//! * the domain source
//!   `S(x) = int_{S^2} g(n) exp(-int_[x, x_Omega(x,n)] alpha/eps) dn`
//!   feeding the full-domain equation.

use crate::absorption::AbsorptionField;
use crate::error::{Error, Result};
use crate::geometry::{ConvexDomain, Vec3};
use crate::quadrature::{adaptive_simpson, GaussRule};

/// Frequency-integrated incident radiation on the unit sphere.
#[derive(Debug, Clone)]
pub enum AngularSource {
    /// Constant intensity `c` in every direction.
    Isotropic { level: f64 },
    /// Intensity `c` inside a cone of the given half angle around `axis`,
    /// optionally rolled off by a cosine taper of angular width `taper`
    /// (the intensity is `c` up to `half_angle - taper` and 0 beyond
    /// `half_angle`). A zero taper gives the sharp indicator.
    Cone { axis: Vec3, half_angle: f64, level: f64, taper: f64 },
    /// Values on a latitude-longitude grid, bilinearly interpolated and
    /// clamped at zero. Rows run over `theta` in `[0, pi]` (n_theta values),
    /// columns over `phi` in `[0, 2 pi)` (n_phi values, periodic).
    Tabulated { n_theta: usize, n_phi: usize, values: Vec<f64> },
}

impl AngularSource {
    pub fn isotropic(level: f64) -> Result<Self> {
        if level < 0.0 || !level.is_finite() {
            return Err(Error::Config(format!("isotropic level must be nonnegative, got {level}")));
        }
        Ok(AngularSource::Isotropic { level })
    }

    pub fn cone(axis: Vec3, half_angle: f64, level: f64, taper: f64) -> Result<Self> {
        let n = axis.norm();
        if !(n > 0.0) {
            return Err(Error::Config("cone axis must be a nonzero vector".into()));
        }
        if !(half_angle > 0.0 && half_angle <= std::f64::consts::PI) || level < 0.0 || taper < 0.0 || taper > half_angle {
            return Err(Error::Config(format!("invalid cone parameters: half_angle={half_angle}, level={level}, taper={taper}")));
        }
        Ok(AngularSource::Cone { axis: axis / n, half_angle, level, taper })
    }

    pub fn tabulated(n_theta: usize, n_phi: usize, values: Vec<f64>) -> Result<Self> {
        if n_theta < 2 || n_phi < 2 || values.len() != n_theta * n_phi {
            return Err(Error::Config("tabulated source needs an n_theta x n_phi grid with n >= 2".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("tabulated source values must be finite".into()));
        }
        Ok(AngularSource::Tabulated { n_theta, n_phi, values })
    }

    /// Intensity in direction `n` (unit vector); nonnegative by
    /// construction, tabulated values clamped at zero.
    pub fn eval(&self, n: &Vec3) -> f64 {
        match self {
            AngularSource::Isotropic { level } => *level,
            AngularSource::Cone { axis, half_angle, level, taper } => {
                let theta = n.dot(axis).clamp(-1.0, 1.0).acos();
                if theta >= *half_angle {
                    0.0
                } else if theta <= half_angle - taper {
                    *level
                } else {
                    let s = (theta - (half_angle - taper)) / taper;
                    0.5 * level * (1.0 + (std::f64::consts::PI * s).cos())
                }
            }
            AngularSource::Tabulated { n_theta, n_phi, values } => {
                let theta = n.z.clamp(-1.0, 1.0).acos();
                let phi = n.y.atan2(n.x).rem_euclid(2.0 * std::f64::consts::PI);
                let st = theta / std::f64::consts::PI * (*n_theta as f64 - 1.0);
                let it = (st.floor() as usize).min(n_theta - 2);
                let tt = st - it as f64;
                let sp = phi / (2.0 * std::f64::consts::PI) * *n_phi as f64;
                let ip = (sp.floor() as usize).min(n_phi - 1);
                let tp = sp - ip as f64;
                let ip1 = (ip + 1) % n_phi;
                let v = |i: usize, j: usize| values[i * n_phi + j];
                let interp = (1.0 - tt) * ((1.0 - tp) * v(it, ip) + tp * v(it, ip1))
                    + tt * ((1.0 - tp) * v(it + 1, ip) + tp * v(it + 1, ip1));
                interp.max(0.0)
            }
        }
    }

    /// Total mass `||g||_1 = int_{S^2} g(n) dn`.
    pub fn norm_l1(&self) -> f64 {
        match self {
            AngularSource::Isotropic { level } => 4.0 * std::f64::consts::PI * level,
            AngularSource::Cone { half_angle, level, taper, .. } => {
                // rotationally symmetric around the axis
                let profile = |theta: f64| {
                    if theta >= *half_angle {
                        0.0
                    } else if theta <= half_angle - taper {
                        *level
                    } else {
                        let s = (theta - (half_angle - taper)) / taper;
                        0.5 * level * (1.0 + (std::f64::consts::PI * s).cos())
                    }
                };
                2.0 * std::f64::consts::PI
                    * adaptive_simpson(&|t: f64| profile(t) * t.sin(), 0.0, *half_angle, 1e-13)
            }
            AngularSource::Tabulated { .. } => {
                let rule = GaussRule::new(32);
                let nphi = 64;
                let mut acc = 0.0;
                for j in 0..nphi {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / nphi as f64;
                    acc += rule.integrate(-1.0, 1.0, |mu| {
                        let s = (1.0 - mu * mu).max(0.0).sqrt();
                        self.eval(&Vec3::new(s * phi.cos(), s * phi.sin(), mu))
                    });
                }
                acc * 2.0 * std::f64::consts::PI / nphi as f64
            }
        }
    }

    /// Supremum `||g||_inf`.
    pub fn norm_linf(&self) -> f64 {
        match self {
            AngularSource::Isotropic { level } => *level,
            AngularSource::Cone { level, .. } => *level,
            AngularSource::Tabulated { values, .. } => {
                values.iter().cloned().fold(0.0, f64::max).max(0.0)
            }
        }
    }

    fn is_isotropic(&self) -> bool {
        matches!(self, AngularSource::Isotropic { .. })
    }
}

/// Quadrature orders for the angular integrals.
#[derive(Debug, Clone, Copy)]
pub struct AngularQuadrature {
    /// Gauss-Legendre order per polar panel (hemisphere integrals) or for
    /// the full polar range (sphere integrals).
    pub n_polar: usize,
    /// Uniform azimuth count.
    pub n_azimuth: usize,
}

impl Default for AngularQuadrature {
    fn default() -> Self {
        AngularQuadrature { n_polar: 64, n_azimuth: 64 }
    }
}

/// Half-space source `G(x) = int_{n.N < 0} g(n) e^{-x/|n.N|} dn` at optical
/// depth `x >= 0` from the wall with outward normal `normal`.
///
/// The polar integral runs over `mu = |n.N|` on log-graded composite
/// panels accumulating towards `mu = 0`, where the integrand has an
/// internal layer of width `x`; the azimuth is a uniform (trapezoidal,
/// spectrally accurate for periodic integrands) rule.
pub fn planar_source(g: &AngularSource, normal: &Vec3, x: f64) -> Result<f64> {
    planar_source_with(g, normal, x, AngularQuadrature::default())
}

pub fn planar_source_with(
    g: &AngularSource,
    normal: &Vec3,
    x: f64,
    quad: AngularQuadrature,
) -> Result<f64> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::domain("planar_source", format!("requires optical depth x >= 0, got {x}")));
    }
    let profile = azimuth_profile(g, normal, quad.n_azimuth);
    Ok(hemisphere_mu_integral(x, quad.n_polar, |mu| profile.average(mu)))
}

/// Azimuth-averaged intensity over the incoming hemisphere as a function
/// of `mu = |n.N|`; the phi average is independent of the depth, so it is
/// factored out of the attenuation integral.
struct AzimuthProfile<'a> {
    g: &'a AngularSource,
    frame: Option<(Vec3, Vec3, Vec3)>,
    n_azimuth: usize,
}

fn azimuth_profile<'a>(g: &'a AngularSource, normal: &Vec3, n_azimuth: usize) -> AzimuthProfile<'a> {
    if g.is_isotropic() {
        AzimuthProfile { g, frame: None, n_azimuth }
    } else {
        let nrm = normal.normalize();
        let t1 = orthonormal_partner(&nrm);
        let t2 = nrm.cross(&t1);
        AzimuthProfile { g, frame: Some((nrm, t1, t2)), n_azimuth }
    }
}

impl AzimuthProfile<'_> {
    /// `(1/(2 pi)) int_0^{2 pi} g(n(mu, phi)) dphi` scaled back by `2 pi`,
    /// i.e. the phi-integrated intensity at polar depth `mu`.
    fn average(&self, mu: f64) -> f64 {
        match (&self.frame, self.g) {
            (None, AngularSource::Isotropic { level }) => 2.0 * std::f64::consts::PI * level,
            (Some((nrm, t1, t2)), g) => {
                let s = (1.0 - mu * mu).max(0.0).sqrt();
                let mut acc = 0.0;
                for j in 0..self.n_azimuth {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / self.n_azimuth as f64;
                    let n = -mu * nrm + s * (phi.cos() * t1 + phi.sin() * t2);
                    acc += g.eval(&n);
                }
                acc * 2.0 * std::f64::consts::PI / self.n_azimuth as f64
            }
            _ => unreachable!("isotropic sources carry no frame"),
        }
    }
}

/// `int_0^1 h(mu) e^{-x/mu} dmu` on panels geometrically graded towards 0.
fn hemisphere_mu_integral(x: f64, order: usize, h: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussRule::new(order.clamp(4, 256).min(64).max(8));
    if x == 0.0 {
        // no attenuation layer; a single high-order panel suffices
        return GaussRule::new(order.clamp(8, 256)).integrate(0.0, 1.0, |mu| h(mu));
    }
    // below mu = x/36 the attenuation is under e^{-36}; the sliver
    // contributes less than mu_min * h, which is dropped
    let mu_min = (x / 36.0).min(0.25);
    let mut breaks = vec![1.0f64];
    let mut m = 0.5;
    while m > mu_min {
        breaks.push(m);
        m *= 0.5;
    }
    breaks.push(mu_min);
    breaks.reverse();
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        acc += rule.integrate(w[0], w[1], |mu| h(mu) * (-x / mu).exp());
    }
    acc
}

fn orthonormal_partner(n: &Vec3) -> Vec3 {
    let abs = [n.x.abs(), n.y.abs(), n.z.abs()];
    let mut k = 0;
    for i in 1..3 {
        if abs[i] < abs[k] {
            k = i;
        }
    }
    let mut e = Vec3::zeros();
    e[k] = 1.0;
    (e - n * n.dot(&e)).normalize()
}

/// Domain source
/// `S(x) = int_{S^2} g(n) exp(-(1/eps) int_[x, x_Omega(x,n)] alpha) dn`
/// by product sphere quadrature with per-ray attenuation line integrals.
pub fn domain_source(
    g: &AngularSource,
    domain: &ConvexDomain,
    alpha: &AbsorptionField,
    eps: f64,
    x: &Vec3,
) -> Result<f64> {
    domain_source_with(g, domain, alpha, eps, x, AngularQuadrature::default())
}

pub fn domain_source_with(
    g: &AngularSource,
    domain: &ConvexDomain,
    alpha: &AbsorptionField,
    eps: f64,
    x: &Vec3,
    quad: AngularQuadrature,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::domain("domain_source", format!("requires eps > 0, got {eps}")));
    }
    if !domain.is_interior(x) {
        return Err(Error::Geometry(format!("domain_source requires a strictly interior point, got {x:?}")));
    }
    // Polar axis adapted to the source: aligning with a cone axis turns its
    // edges into polar circles, which become panel boundaries below.
    let (axis, mut breaks) = match g {
        AngularSource::Cone { axis, half_angle, taper, .. } => {
            let mut b = vec![-1.0, half_angle.cos(), 1.0];
            if *taper > 0.0 {
                b.push((half_angle - taper).cos());
            }
            (*axis, b)
        }
        _ => (Vec3::z(), vec![-1.0, 0.0, 1.0]),
    };
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let t1 = orthonormal_partner(&axis);
    let t2 = axis.cross(&t1);
    let rule = GaussRule::new(quad.n_polar);
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        for (mu, wmu) in rule.mapped(w[0], w[1]) {
            let s = (1.0 - mu * mu).max(0.0).sqrt();
            let mut ring = 0.0;
            for j in 0..quad.n_azimuth {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / quad.n_azimuth as f64;
                let n = mu * axis + s * (phi.cos() * t1 + phi.sin() * t2);
                let (x_om, _) = domain.ray_exit(x, &n)?;
                let tau = alpha.line_integral(x, &x_om, eps) / eps;
                ring += g.eval(&n) * (-tau).exp();
            }
            acc += wmu * ring * 2.0 * std::f64::consts::PI / quad.n_azimuth as f64;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::exp_integral_e2;
    use approx::assert_abs_diff_eq;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn isotropic_planar_source_matches_e2() {
        let g = AngularSource::isotropic(1.0).unwrap();
        let n = Vec3::x();
        assert_abs_diff_eq!(planar_source(&g, &n, 0.0).unwrap(), TWO_PI, epsilon = 1e-12);
        // G(x) = 2 pi c E2(x)
        for &x in &[1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 12.0] {
            let got = planar_source(&g, &n, x).unwrap();
            let want = TWO_PI * exp_integral_e2(x).unwrap();
            assert!(
                (got - want).abs() <= 1e-9 * TWO_PI,
                "G({x}) = {got}, want {want}, err {}",
                (got - want).abs()
            );
        }
        assert_abs_diff_eq!(
            planar_source(&g, &n, 1.0).unwrap(),
            TWO_PI * 0.148_495_506_775_922_05,
            epsilon = 1e-8
        );
    }

    #[test]
    fn planar_source_is_nonincreasing_and_bounded() {
        let g = AngularSource::cone(Vec3::new(1.0, 0.3, -0.2), 0.7, 2.0, 0.1).unwrap();
        let n = Vec3::new(0.0, 0.0, 1.0);
        let l1 = g.norm_l1();
        let mut prev = f64::INFINITY;
        for &x in &[0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 12.0, 40.0] {
            let v = planar_source(&g, &n, x).unwrap();
            assert!(v <= prev + 1e-12, "not monotone at {x}");
            assert!(v <= l1 * (-x).exp() + 1e-12, "bound violated at {x}");
            prev = v;
        }
    }

    #[test]
    fn planar_source_isotropic_is_frame_independent() {
        let g = AngularSource::isotropic(0.7).unwrap();
        let a = planar_source(&g, &Vec3::x(), 0.8).unwrap();
        let b = planar_source(&g, &Vec3::new(-0.3, 0.9, 0.3).normalize(), 0.8).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn cone_norms() {
        // sharp cone: ||g||_1 = 2 pi (1 - cos h) c
        let g = AngularSource::cone(Vec3::z(), 0.5, 3.0, 0.0).unwrap();
        assert_abs_diff_eq!(g.norm_l1(), TWO_PI * (1.0 - 0.5f64.cos()) * 3.0, epsilon = 1e-9);
        assert_eq!(g.norm_linf(), 3.0);
        // isotropic
        let iso = AngularSource::isotropic(2.0).unwrap();
        assert_abs_diff_eq!(iso.norm_l1(), 8.0 * std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn tabulated_source_interpolates() {
        // g = 1 + cos(theta) sampled on a grid
        let (nt, np) = (33, 64);
        let mut values = Vec::with_capacity(nt * np);
        for i in 0..nt {
            let theta = std::f64::consts::PI * i as f64 / (nt - 1) as f64;
            for _ in 0..np {
                values.push(1.0 + theta.cos());
            }
        }
        let g = AngularSource::tabulated(nt, np, values).unwrap();
        let v = g.eval(&Vec3::new(0.0, 0.0, 1.0));
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        let v = g.eval(&Vec3::new(1.0, 0.0, 0.0));
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-3);
        // ||g||_1 = int (1 + cos) dn = 4 pi
        assert_abs_diff_eq!(g.norm_l1(), 4.0 * std::f64::consts::PI, epsilon = 1e-2);
    }

    #[test]
    fn domain_source_isotropic_ball_center() {
        let ball = ConvexDomain::ball(Vec3::zeros(), 1.0).unwrap();
        let alpha = AbsorptionField::constant(1.0).unwrap();
        let g = AngularSource::isotropic(1.0).unwrap();
        for &eps in &[0.5, 0.2, 0.1] {
            let v = domain_source(&g, &ball, &alpha, eps, &Vec3::zeros()).unwrap();
            let want = 4.0 * std::f64::consts::PI * (-1.0 / eps).exp();
            assert_abs_diff_eq!(v, want, epsilon = 1e-10 * want.max(1e-12));
        }
    }

    #[test]
    fn domain_source_deep_interior_bound_and_decay() {
        let ball = ConvexDomain::ball(Vec3::zeros(), 1.0).unwrap();
        let alpha = AbsorptionField::radial_poly(Vec3::zeros(), vec![1.0, 0.0, 0.5], 1.0).unwrap();
        let (c0, _) = alpha.bounds();
        let g = AngularSource::cone(Vec3::z(), 1.0, 1.5, 0.2).unwrap();
        let x = Vec3::new(0.2, 0.1, -0.1);
        let d = ball.signed_distance(&x);
        let mut prev = f64::INFINITY;
        for &eps in &[0.4, 0.2, 0.1] {
            let v = domain_source(&g, &ball, &alpha, eps, &x).unwrap();
            assert!(v <= g.norm_l1() * (-c0 * d / eps).exp() + 1e-12);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn domain_source_cone_refinement_oracle() {
        // near-boundary point, tapered cone aligned with the inward normal
        let ball = ConvexDomain::ball(Vec3::zeros(), 1.0).unwrap();
        let alpha = AbsorptionField::constant(1.0).unwrap();
        let g = AngularSource::cone(-Vec3::x(), 0.8, 1.0, 0.25).unwrap();
        let x = Vec3::new(0.9, 0.0, 0.0);
        let coarse = domain_source_with(&g, &ball, &alpha, 0.1, &x, AngularQuadrature { n_polar: 64, n_azimuth: 64 }).unwrap();
        let fine = domain_source_with(&g, &ball, &alpha, 0.1, &x, AngularQuadrature { n_polar: 128, n_azimuth: 128 }).unwrap();
        assert!(
            ((coarse - fine) / fine).abs() <= 1e-6,
            "refinement drift {} (coarse {coarse}, fine {fine})",
            ((coarse - fine) / fine).abs()
        );
    }
}
