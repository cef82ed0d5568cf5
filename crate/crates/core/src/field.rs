//! Uniform 1D grids, sampled fields, finite-difference derivatives and
//! the discrete L2 / H2 pairings used throughout the crate.

use std::ops::{Add, Mul, Sub};

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// A point of the unit sphere, or a tangent/field value in R^3.
pub type Vec3 = Vector3<f64>;

/// Tolerance on | |u| - 1 | accepted when building a [`SpinField`].
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Smallest admissible number of nodes.
pub const MIN_POINTS: usize = 8;

/// Uniform grid on `[center - X, center + X]`.
///
/// Grids built with [`Grid::new`] are symmetric about zero. A shifted copy
/// ([`Grid::shifted`]) relabels the same samples in a translated coordinate,
/// which is how fields are viewed in a frame centred on a moving wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n: usize,
    center: f64,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Grid> {
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} nodes, got {n}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        Ok(Grid {
            half_width,
            n,
            center: 0.0,
        })
    }

    /// The same nodes expressed in the coordinate `x + offset`.
    pub fn shifted(&self, offset: f64) -> Grid {
        Grid {
            center: self.center + offset,
            ..*self
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.center - self.half_width + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Same number of nodes and spacing; the coordinate labels may differ.
    pub fn congruent(&self, other: &Grid) -> bool {
        self.n == other.n && self.half_width == other.half_width
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(X = {}, N = {}, center = {}) vs (X = {}, N = {}, center = {})",
                self.half_width, self.n, self.center, other.half_width, other.n, other.center
            )))
        }
    }
}

/// Real samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples on a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl FnMut(f64) -> f64) -> ScalarField {
        let values = grid.nodes().map(f).collect();
        ScalarField { grid, values }
    }

    pub fn zeros(grid: Grid) -> ScalarField {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        let values = self
            .grid
            .nodes()
            .zip(&self.values)
            .map(|(x, &v)| f(x, v))
            .collect();
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(ScalarField {
            grid: self.grid,
            values,
        })
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        self.map(|_, v| s * v)
    }
}

/// Sphere-valued samples: the magnetization u(t, .) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinField {
    grid: Grid,
    values: Vec<Vec3>,
}

impl SpinField {
    /// Validates the length and the unit-norm constraint.
    pub fn new(grid: Grid, values: Vec<Vec3>) -> Result<SpinField> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples on a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some((node, norm)) = values
            .iter()
            .map(|v| v.norm())
            .enumerate()
            .find(|(_, n)| !((n - 1.0).abs() <= UNIT_NORM_TOL))
        {
            return Err(Error::NotUnitNorm { node, norm });
        }
        Ok(SpinField { grid, values })
    }

    /// Samples `f` and projects each sample onto the sphere.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> Vec3) -> Result<SpinField> {
        let values = grid
            .nodes()
            .map(|x| sphere_project(f(x)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpinField { grid, values })
    }

    pub fn constant(grid: Grid, v: Vec3) -> Result<SpinField> {
        let v = sphere_project(v)?;
        Ok(SpinField {
            grid,
            values: vec![v; grid.len()],
        })
    }

    /// Caller guarantees unit norm (e.g. values fresh from projection).
    pub(crate) fn from_unit_values(grid: Grid, values: Vec<Vec3>) -> SpinField {
        debug_assert_eq!(values.len(), grid.len());
        SpinField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec3> {
        self.values
    }

    pub fn component(&self, k: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| v[k]).collect(),
        }
    }

    /// Largest | |u(x_i)| - 1 | over the nodes.
    pub fn norm_drift(&self) -> f64 {
        self.values
            .iter()
            .fold(0.0, |m, v| m.max((v.norm() - 1.0).abs()))
    }

    /// Nodewise rotation by `theta` about e1.
    pub fn rotated(&self, theta: f64) -> SpinField {
        SpinField {
            grid: self.grid,
            values: self.values.iter().map(|v| rotate(theta, v)).collect(),
        }
    }

    /// View of the field in a frame attached to a wall at `position` with
    /// phase `phase`: values rotated by `-phase`, coordinates `x - position`.
    pub fn recentred(&self, phase: f64, position: f64) -> SpinField {
        SpinField {
            grid: self.grid.shifted(-position),
            values: self.values.iter().map(|v| rotate(-phase, v)).collect(),
        }
    }

    /// Same samples on a relabelled, congruent grid.
    pub fn relabelled(&self, grid: Grid) -> Result<SpinField> {
        if !self.grid.congruent(&grid) {
            return Err(Error::GridMismatch("relabelling needs a congruent grid".into()));
        }
        Ok(SpinField {
            grid,
            values: self.values.clone(),
        })
    }
}

/// Pair of real fields: mobile-frame coordinates r = (r1, r2).
#[derive(Debug, Clone, PartialEq)]
pub struct PairField {
    r1: ScalarField,
    r2: ScalarField,
}

impl PairField {
    pub fn new(r1: ScalarField, r2: ScalarField) -> Result<PairField> {
        r1.grid.check_same(&r2.grid)?;
        Ok(PairField { r1, r2 })
    }

    pub fn from_fn(grid: Grid, f: impl FnMut(f64) -> (f64, f64)) -> PairField {
        let (a, b): (Vec<f64>, Vec<f64>) = grid.nodes().map(f).unzip();
        PairField {
            r1: ScalarField { grid, values: a },
            r2: ScalarField { grid, values: b },
        }
    }

    pub fn zeros(grid: Grid) -> PairField {
        PairField {
            r1: ScalarField::zeros(grid),
            r2: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.r1.grid
    }

    pub fn r1(&self) -> &ScalarField {
        &self.r1
    }

    pub fn r2(&self) -> &ScalarField {
        &self.r2
    }

    pub fn components(&self) -> [&ScalarField; 2] {
        [&self.r1, &self.r2]
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> PairField {
        PairField {
            r1: f(&self.r1),
            r2: f(&self.r2),
        }
    }

    pub fn zip_with(&self, other: &PairField, f: impl Fn(f64, f64) -> f64 + Copy) -> Result<PairField> {
        Ok(PairField {
            r1: self.r1.zip_with(&other.r1, f)?,
            r2: self.r2.zip_with(&other.r2, f)?,
        })
    }

    pub fn add(&self, other: &PairField) -> Result<PairField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &PairField) -> Result<PairField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> PairField {
        self.map_components(|f| f.scaled(s))
    }

    /// Sup over nodes of the pointwise Euclidean norm |r(x)|.
    pub fn sup_norm(&self) -> f64 {
        self.r1
            .values
            .iter()
            .zip(&self.r2.values)
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// Componentwise-summed L2 pairing.
    pub fn inner_l2(&self, other: &PairField) -> Result<f64> {
        Ok(inner_l2(&self.r1, &other.r1)? + inner_l2(&self.r2, &other.r2)?)
    }

    /// Discrete (H2)^2 norm.
    pub fn h2_norm(&self) -> f64 {
        let h = self.grid().spacing();
        (h2_norm_sq(&self.r1.values, h) + h2_norm_sq(&self.r2.values, h)).sqrt()
    }
}

/// Three-point first derivative with second-order one-sided closures.
pub(crate) fn d1_slice<T>(f: &[T], h: f64, out: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    debug_assert!(n >= 3 && out.len() == n);
    let c = 0.5 / h;
    out[0] = (f[1] * 4.0 - f[0] * 3.0 - f[2]) * c;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) * c;
    }
    out[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) * c;
}

/// Three-point Laplacian with second-order one-sided closures.
pub(crate) fn d2_slice<T>(f: &[T], h: f64, out: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    debug_assert!(n >= 4 && out.len() == n);
    let c = 1.0 / (h * h);
    out[0] = (f[0] * 2.0 - f[1] * 5.0 + f[2] * 4.0 - f[3]) * c;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i] * 2.0 + f[i - 1]) * c;
    }
    out[n - 1] = (f[n - 1] * 2.0 - f[n - 2] * 5.0 + f[n - 3] * 4.0 - f[n - 4]) * c;
}

/// Trapezoid quadrature of the pointwise product.
pub(crate) fn trapezoid_dot(f: &[f64], g: &[f64], h: f64) -> f64 {
    let n = f.len();
    let interior: f64 = f.iter().zip(g).map(|(a, b)| a * b).sum();
    h * (interior - 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1]))
}

fn h2_norm_sq(f: &[f64], h: f64) -> f64 {
    let mut df = vec![0.0; f.len()];
    let mut ddf = vec![0.0; f.len()];
    d1_slice(f, h, &mut df);
    d2_slice(f, h, &mut ddf);
    trapezoid_dot(f, f, h) + trapezoid_dot(&df, &df, h) + trapezoid_dot(&ddf, &ddf, h)
}

pub fn d1(f: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; f.values.len()];
    d1_slice(&f.values, f.grid.spacing(), &mut out);
    ScalarField {
        grid: f.grid,
        values: out,
    }
}

pub fn d2(f: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; f.values.len()];
    d2_slice(&f.values, f.grid.spacing(), &mut out);
    ScalarField {
        grid: f.grid,
        values: out,
    }
}

/// Discrete L2 pairing (trapezoid rule over the grid).
pub fn inner_l2(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    f.grid.check_same(&g.grid)?;
    Ok(trapezoid_dot(&f.values, &g.values, f.grid.spacing()))
}

/// Discrete H2 distance between two spin fields, summed over components.
pub fn h2_dist(u: &SpinField, w: &SpinField) -> Result<f64> {
    u.grid.check_same(&w.grid)?;
    let h = u.grid.spacing();
    let mut total = 0.0;
    let mut diff = vec![0.0; u.values.len()];
    for k in 0..3 {
        for (d, (a, b)) in diff.iter_mut().zip(u.values.iter().zip(&w.values)) {
            *d = a[k] - b[k];
        }
        total += h2_norm_sq(&diff, h);
    }
    Ok(total.sqrt())
}

/// Discrete H2 norm of a vector-valued field, summed over components.
pub fn h2_norm_of(grid: &Grid, values: &[Vec3]) -> f64 {
    let h = grid.spacing();
    let mut comp = vec![0.0; values.len()];
    let mut total = 0.0;
    for k in 0..3 {
        for (c, v) in comp.iter_mut().zip(values) {
            *c = v[k];
        }
        total += h2_norm_sq(&comp, h);
    }
    total.sqrt()
}

/// Rotation R_theta about the e1 axis.
#[inline]
pub fn rotate(theta: f64, v: &Vec3) -> Vec3 {
    let (s, c) = theta.sin_cos();
    Vec3::new(v[0], c * v[1] - s * v[2], s * v[1] + c * v[2])
}

pub fn sphere_project(v: Vec3) -> Result<Vec3> {
    let n = v.norm();
    if !(n > 1e-14) {
        return Err(Error::DegenerateVector(n));
    }
    Ok(v / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::new(20.0, n).unwrap()
    }

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    #[test]
    fn grid_rejects_small_or_degenerate() {
        assert!(Grid::new(20.0, 7).is_err());
        assert!(Grid::new(0.0, 33).is_err());
        assert!(Grid::new(f64::NAN, 33).is_err());
        let g = grid(1025);
        assert_eq!(g.node(0), -20.0);
        assert_eq!(g.node(1024), 20.0);
        assert_eq!(g.node(512), 0.0);
    }

    #[test]
    fn derivatives_exact_on_polynomials() {
        let g = grid(101);
        let lin = ScalarField::from_fn(g, |x| x);
        let d = d1(&lin);
        for v in &d.values()[1..100] {
            assert!((v - 1.0).abs() <= 1e-12);
        }
        let quad = ScalarField::from_fn(g, |x| x * x);
        let dd = d2(&quad);
        for v in &dd.values()[1..100] {
            assert!((v - 2.0).abs() <= 1e-10);
        }
        let c = ScalarField::from_fn(g, |_| 3.7);
        assert!(d1(&c).max_abs() <= 1e-12);
        assert!(d2(&c).max_abs() <= 1e-12);
    }

    // Truncation oracle: the leading error of the three-point Laplacian is
    // (h^2 / 12) f''''; for sech, max |f''''| = 5 at x = 0.
    #[test]
    fn d2_of_sech_matches_closed_form_at_second_order() {
        let err = |n: usize| {
            let g = grid(n);
            let f = ScalarField::from_fn(g, sech);
            let dd = d2(&f);
            g.nodes()
                .zip(dd.values())
                .skip(1)
                .take(n - 2)
                .map(|(x, v)| (v - (x.sinh().powi(2) - 1.0) / x.cosh().powi(3)).abs())
                .fold(0.0, f64::max)
        };
        let e1 = err(1025);
        let h = grid(1025).spacing();
        let leading = h * h / 12.0 * 5.0;
        assert!((e1 - leading).abs() <= 0.01 * leading, "{e1} vs {leading}");
        let ratio = e1 / err(2049);
        assert!((ratio - 4.0).abs() <= 0.8, "ratio {ratio}");
    }

    #[test]
    fn inner_l2_examples() {
        let g = grid(1025);
        let s = ScalarField::from_fn(g, sech);
        let v = inner_l2(&s, &s).unwrap();
        // Quadrature oracle: integral of sech^2 over [-20, 20] is 2 tanh 20.
        assert!((v - 2.0).abs() <= 1e-6, "{v}");
        assert_eq!(inner_l2(&s, &ScalarField::zeros(g)).unwrap(), 0.0);
        let odd = ScalarField::from_fn(g, |x| x);
        assert!(inner_l2(&odd, &s).unwrap().abs() <= 1e-12);
        let other = ScalarField::zeros(grid(513));
        assert!(matches!(inner_l2(&s, &other), Err(Error::GridMismatch(_))));
        assert!(inner_l2(&s, &s.relabel_for_test(1.0)).is_err());
    }

    impl ScalarField {
        fn relabel_for_test(&self, off: f64) -> ScalarField {
            ScalarField {
                grid: self.grid.shifted(off),
                values: self.values.clone(),
            }
        }
    }

    #[test]
    fn rotation_examples() {
        let e1 = Vec3::new(1.0, 0.0, 0.0);
        assert_eq!(rotate(1.234, &e1), e1);
        let r = rotate(std::f64::consts::FRAC_PI_2, &Vec3::new(0.0, 0.0, 1.0));
        assert!((r - Vec3::new(0.0, -1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn sphere_project_examples() {
        assert_eq!(sphere_project(Vec3::new(0.0, 0.0, 2.0)).unwrap(), Vec3::new(0.0, 0.0, 1.0));
        let p = sphere_project(Vec3::new(1.0, 1.0, 1.0)).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((p - Vec3::new(s, s, s)).amax() <= 1e-15);
        let u = Vec3::new(0.6, 0.0, 0.8);
        assert!((sphere_project(u).unwrap() - u).amax() <= 1e-16);
        assert!(matches!(
            sphere_project(Vec3::new(1e-15, 0.0, 0.0)),
            Err(Error::DegenerateVector(_))
        ));
    }

    #[test]
    fn spin_field_validation() {
        let g = grid(16);
        let bad = vec![Vec3::new(1.0, 0.0, 1e-4); 16];
        assert!(SpinField::new(g, bad).is_err());
        assert!(SpinField::new(g, vec![Vec3::x(); 15]).is_err());
        let ok = SpinField::new(g, vec![Vec3::x(); 16]).unwrap();
        assert_eq!(ok.norm_drift(), 0.0);
    }

    #[test]
    fn h2_dist_identity_and_trivial_rotation() {
        let g = grid(257);
        let u = SpinField::from_fn(g, |x| Vec3::new(x.tanh(), 0.0, sech(x))).unwrap();
        assert_eq!(h2_dist(&u, &u).unwrap(), 0.0);
        assert_eq!(h2_dist(&u, &u.rotated(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn h2_dist_of_rotated_wall_matches_dense_quadrature() {
        // For w = R_theta u the difference lives in components 2, 3 only:
        // (0, sin t sech, (1 - cos t) sech) scaled, so ||u - w||_H2^2 =
        // 2 (1 - cos t) * (||sech||^2 + ||sech'||^2 + ||sech''||^2).
        // Continuum values: 2, 2/3, 14/15 over R.
        let theta = 0.1;
        let g = grid(1025);
        let u = SpinField::from_fn(g, |x| Vec3::new(x.tanh(), 0.0, sech(x))).unwrap();
        let w = u.rotated(theta);
        let got = h2_dist(&u, &w).unwrap();

        // Dense composite Simpson quadrature of the exact derivatives.
        let m = 400_000;
        let (a, b) = (-20.0f64, 20.0f64);
        let hh = (b - a) / m as f64;
        let integrand = |x: f64| {
            let s = sech(x);
            let t = x.tanh();
            let d1 = -s * t;
            let d2 = s * (t * t - s * s);
            s * s + d1 * d1 + d2 * d2
        };
        let mut acc = integrand(a) + integrand(b);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(a + i as f64 * hh);
        }
        let dense = (2.0 * (1.0 - theta.cos()) * acc * hh / 3.0).sqrt();
        assert!(got > 0.0);

        // The discrete value carries the O(h^2) stencil bias; one Richardson
        // step removes it and must land on the dense quadrature.
        let fine = {
            let g = grid(2049);
            let u = SpinField::from_fn(g, |x| Vec3::new(x.tanh(), 0.0, sech(x))).unwrap();
            h2_dist(&u, &u.rotated(theta)).unwrap()
        };
        let extrapolated = (4.0 * fine - got) / 3.0;
        let rel = (extrapolated - dense).abs() / dense;
        assert!(rel <= 1e-6, "extrapolated {extrapolated} vs dense {dense} (rel {rel:e})");
        assert!((got - dense).abs() / dense <= 1e-3);
    }
}
