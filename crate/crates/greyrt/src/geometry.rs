//! Convex-domain oracle.
//!
//! Supplies every geometric primitive the non-local integral equations
//! need: membership, ray exit points `x_Omega(x, n)`, closest-point
//! projection onto the boundary, outward normals, curvature bounds and the
//! rigid motions that map a boundary point to the origin with its outward
//! normal to `-e1`.
//!
//! Supported shapes are the ball and the axis-aligned ellipsoid. Both have
//! closed-form ray intersections and normals, and both satisfy the standing
//! smoothness/curvature hypotheses exactly.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;

const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ball { radius: f64 },
    Ellipsoid { semi_axes: Vec3 },
}

/// A bounded convex body with smooth boundary and strictly positive
/// curvature, described by its shape and center.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDomain {
    shape: Shape,
    center: Vec3,
}

/// Boundary point with its outward unit normal and the local minimal
/// radius of curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub point: Vec3,
    pub normal: Vec3,
    pub min_curvature_radius: f64,
}

/// Rigid motion `x -> Q (x - p)` taking its anchor boundary point `p` to
/// the origin and the outward normal `N_p` to `-e1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidMotion {
    rotation: Matrix3<f64>,
    anchor: Vec3,
}

impl RigidMotion {
    pub fn apply_point(&self, x: &Vec3) -> Vec3 {
        self.rotation * (x - self.anchor)
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inverse_point(&self, y: &Vec3) -> Vec3 {
        self.rotation.transpose() * y + self.anchor
    }

    pub fn inverse_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation.transpose() * v
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }
}

impl ConvexDomain {
    pub fn ball(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Geometry(format!("ball radius must be positive, got {radius}")));
        }
        Ok(ConvexDomain { shape: Shape::Ball { radius }, center })
    }

    pub fn ellipsoid(center: Vec3, semi_axes: Vec3) -> Result<Self> {
        if !semi_axes.iter().all(|a| *a > 0.0 && a.is_finite()) {
            return Err(Error::Geometry(format!("ellipsoid semi-axes must be positive, got {semi_axes:?}")));
        }
        Ok(ConvexDomain { shape: Shape::Ellipsoid { semi_axes }, center })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    fn semi_axes(&self) -> Vec3 {
        match &self.shape {
            Shape::Ball { radius } => Vec3::new(*radius, *radius, *radius),
            Shape::Ellipsoid { semi_axes } => *semi_axes,
        }
    }

    /// Implicit function, negative inside:
    /// `sum_i ((x_i - c_i)/a_i)^2 - 1`.
    pub fn implicit(&self, x: &Vec3) -> f64 {
        let a = self.semi_axes();
        let d = x - self.center;
        (d.x / a.x).powi(2) + (d.y / a.y).powi(2) + (d.z / a.z).powi(2) - 1.0
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        self.implicit(x) <= 0.0
    }

    pub fn is_interior(&self, x: &Vec3) -> bool {
        self.implicit(x) < 0.0
    }

    pub fn volume(&self) -> f64 {
        let a = self.semi_axes();
        4.0 / 3.0 * std::f64::consts::PI * a.x * a.y * a.z
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.semi_axes().max()
    }

    /// Global minimal radius of curvature of the boundary; for semi-axes
    /// `a >= b >= c` the maximal principal curvature is `a / c^2`, attained
    /// at the end of the longest axis.
    pub fn min_curvature_radius(&self) -> f64 {
        let a = self.semi_axes();
        a.min() * a.min() / a.max()
    }

    /// Upper bound for `max_{x in closure} |x|^2`, used by the explicit
    /// supersolutions. Exact for the ball, a safe bound for the ellipsoid.
    pub fn sup_norm_sq_bound(&self) -> f64 {
        let r = self.center.norm() + self.semi_axes().max();
        r * r
    }

    /// Outward unit normal at a boundary point.
    pub fn normal_at(&self, p: &Vec3) -> Vec3 {
        let a = self.semi_axes();
        let d = p - self.center;
        Vec3::new(d.x / (a.x * a.x), d.y / (a.y * a.y), d.z / (a.z * a.z)).normalize()
    }

    /// Local minimal radius of curvature at a boundary point, from the
    /// eigenvalues of the shape operator restricted to the tangent plane.
    pub fn local_min_curvature_radius(&self, p: &Vec3) -> f64 {
        let a = self.semi_axes();
        let d = p - self.center;
        // gradient and (constant) Hessian of the implicit function
        let g = Vec3::new(2.0 * d.x / (a.x * a.x), 2.0 * d.y / (a.y * a.y), 2.0 * d.z / (a.z * a.z));
        let gn = g.norm();
        let n = g / gn;
        let (t1, t2) = tangent_basis(&n);
        let h = Vec3::new(2.0 / (a.x * a.x), 2.0 / (a.y * a.y), 2.0 / (a.z * a.z));
        let hij = |u: &Vec3, v: &Vec3| (u.x * h.x * v.x + u.y * h.y * v.y + u.z * h.z * v.z) / gn;
        let (m11, m12, m22) = (hij(&t1, &t1), hij(&t1, &t2), hij(&t2, &t2));
        let mean = 0.5 * (m11 + m22);
        let disc = (0.25 * (m11 - m22).powi(2) + m12 * m12).sqrt();
        let kappa_max = mean + disc;
        1.0 / kappa_max
    }

    pub fn boundary_sample(&self, p: &Vec3) -> BoundarySample {
        BoundarySample {
            point: *p,
            normal: self.normal_at(p),
            min_curvature_radius: self.local_min_curvature_radius(p),
        }
    }

    /// Unique exit point of the backwards ray `{x - t n : t > 0}` on the
    /// boundary, so that `x = x_Omega + s n` with `s = |x - x_Omega|`.
    pub fn ray_exit(&self, x: &Vec3, n: &Vec3) -> Result<(Vec3, f64)> {
        if self.implicit(x) > 1e-12 {
            return Err(Error::Geometry(format!("ray_exit requires a point of the closed domain, got {x:?}")));
        }
        let a = self.semi_axes();
        let d = x - self.center;
        // scaled coordinates map the body to the unit ball
        let y = Vec3::new(d.x / a.x, d.y / a.y, d.z / a.z);
        let m = Vec3::new(n.x / a.x, n.y / a.y, n.z / a.z);
        let mm = m.norm_squared();
        let my = m.dot(&y);
        let disc = my * my - mm * (y.norm_squared() - 1.0);
        let s = (my + disc.max(0.0).sqrt()) / mm;
        Ok((x - s * n, s))
    }

    /// Closest boundary point and distance, valid inside the uniqueness
    /// tube `dist(x, boundary) < R` with `R` the minimal curvature radius.
    pub fn project_boundary(&self, x: &Vec3) -> Result<(BoundarySample, f64)> {
        let p = self.nearest_boundary_point(x);
        let d = (x - p).norm();
        if self.is_interior(x) && d >= self.min_curvature_radius() {
            return Err(Error::Geometry(format!(
                "projection not unique: dist {d} exceeds the curvature radius {}",
                self.min_curvature_radius()
            )));
        }
        Ok((self.boundary_sample(&p), d))
    }

    /// Signed distance to the boundary: positive inside, negative outside.
    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => radius - (x - self.center).norm(),
            Shape::Ellipsoid { .. } => {
                let p = self.nearest_boundary_point(x);
                let d = (x - p).norm();
                if self.implicit(x) <= 0.0 {
                    d
                } else {
                    -d
                }
            }
        }
    }

    /// Closest point on the boundary, total and deterministic (interior
    /// ties are broken towards the smallest semi-axis, then by axis index).
    pub fn nearest_boundary_point(&self, x: &Vec3) -> Vec3 {
        let a = self.semi_axes();
        let d = x - self.center;
        match &self.shape {
            Shape::Ball { radius } => {
                let n = d.norm();
                if n < 1e-14 * radius {
                    // center: every direction ties, pick +x
                    self.center + Vec3::new(*radius, 0.0, 0.0)
                } else {
                    self.center + d * (radius / n)
                }
            }
            Shape::Ellipsoid { .. } => self.center + ellipsoid_nearest(&a, &d),
        }
    }

    /// The rigid motion anchored at a boundary sample. The rotation rows
    /// are `-N_p` and a tangent pair completed by Gram-Schmidt against the
    /// coordinate axis of smallest normal component (ties broken by axis
    /// index), so the construction is deterministic.
    pub fn rigid_motion(&self, sample: &BoundarySample) -> RigidMotion {
        let n = sample.normal;
        let (t1, t2) = tangent_basis(&n);
        let r1 = -n;
        let rotation = Matrix3::from_rows(&[r1.transpose(), t1.transpose(), t2.transpose()]);
        RigidMotion { rotation, anchor: sample.point }
    }

    /// Deterministic quasi-uniform boundary samples: Fibonacci-sphere
    /// directions mapped onto the boundary.
    pub fn fibonacci_boundary_samples(&self, count: usize) -> Vec<BoundarySample> {
        let a = self.semi_axes();
        (0..count)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = 2.0 * std::f64::consts::PI * (i as f64) / GOLDEN_RATIO;
                let w = Vec3::new(r * phi.cos(), r * phi.sin(), z);
                let p = self.center + Vec3::new(a.x * w.x, a.y * w.y, a.z * w.z);
                self.boundary_sample(&p)
            })
            .collect()
    }
}

/// Deterministic orthonormal tangent pair for a unit vector `n`: the seed
/// axis is the coordinate axis with the smallest `|n_k|` (smallest index on
/// ties), orthogonalized against `n`; the second tangent closes a
/// right-handed frame with `-n` as first row.
fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let abs = [n.x.abs(), n.y.abs(), n.z.abs()];
    let mut k = 0;
    for i in 1..3 {
        if abs[i] < abs[k] {
            k = i;
        }
    }
    let mut e = Vec3::zeros();
    e[k] = 1.0;
    let t1 = (e - n * n.dot(&e)).normalize();
    let t2 = (-n).cross(&t1);
    (t1, t2)
}

/// Nearest point on the origin-centered ellipsoid with semi-axes `a` to
/// the query `y`, via the Lagrange condition `p_i = y_i a_i^2/(a_i^2 - l)`.
///
/// For components with `y_i != 0` the global minimizer is the unique root
/// of `G(l) = sum (y_i a_i / (a_i^2 - l))^2 = 1` below `min a_i^2`; exact
/// zero components admit off-subspace candidates with `l = a_k^2`, which
/// are enumerated and compared.
fn ellipsoid_nearest(a: &Vec3, y: &Vec3) -> Vec3 {
    let ax = [a.x, a.y, a.z];
    let yv = [y.x, y.y, y.z];
    let nonzero: Vec<usize> = (0..3).filter(|&i| yv[i] != 0.0).collect();
    let zero: Vec<usize> = (0..3).filter(|&i| yv[i] == 0.0).collect();

    if nonzero.is_empty() {
        // query at the center: nearest boundary point is along the
        // smallest semi-axis
        let mut k = 0;
        for i in 1..3 {
            if ax[i] < ax[k] {
                k = i;
            }
        }
        let mut p = [0.0; 3];
        p[k] = ax[k];
        return Vec3::new(p[0], p[1], p[2]);
    }

    let mut best: Option<([f64; 3], f64)> = None;
    let mut consider = |p: [f64; 3]| {
        let d2 = (0..3).map(|i| (p[i] - yv[i]).powi(2)).sum::<f64>();
        if best.map_or(true, |(_, bd)| d2 < bd - 1e-30) {
            best = Some((p, d2));
        }
    };

    // candidate with p_k = 0 on all zero components: root of G restricted
    // to the nonzero ones
    let lam_cap = nonzero.iter().map(|&i| ax[i] * ax[i]).fold(f64::INFINITY, f64::min);
    let g = |lam: f64| -> f64 {
        nonzero.iter().map(|&i| (yv[i] * ax[i] / (ax[i] * ax[i] - lam)).powi(2)).sum()
    };
    // bracket the root in (-inf, lam_cap)
    let scale: f64 = nonzero.iter().map(|&i| (yv[i] * ax[i]).abs()).fold(0.0, f64::max);
    let mut lo = lam_cap - (1.0 + scale);
    while g(lo) >= 1.0 {
        lo = lam_cap - 2.0 * (lam_cap - lo);
    }
    let mut hi = lam_cap - 1e-300;
    // G(hi) may overflow; bisection only needs its sign relative to 1
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = 0.5 * (lo + hi);
    let mut p = [0.0; 3];
    for &i in &nonzero {
        p[i] = yv[i] * ax[i] * ax[i] / (ax[i] * ax[i] - lam);
    }
    consider(p);

    // off-subspace candidates for exact zero components: l = a_k^2
    for &k in &zero {
        let lam = ax[k] * ax[k];
        let mut p = [0.0; 3];
        let mut feasible = true;
        let mut rem = 1.0;
        for &i in &nonzero {
            let denom = ax[i] * ax[i] - lam;
            if denom.abs() < 1e-300 {
                feasible = false;
                break;
            }
            p[i] = yv[i] * ax[i] * ax[i] / denom;
            rem -= (p[i] / ax[i]).powi(2);
        }
        if feasible && rem >= 0.0 {
            p[k] = ax[k] * rem.sqrt();
            consider(p);
        }
    }

    let (p, _) = best.expect("at least one candidate");
    Vec3::new(p[0], p[1], p[2])
}
