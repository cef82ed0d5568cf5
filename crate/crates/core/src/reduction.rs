//! Mobile-frame coordinates r = (r1, r2) of the moving-frame solution,
//! the linear operators ell, L, A = JL, and the reduced right-hand side
//! A r + R_delta(x, r, r_x, r_xx) with its explicit pieces.
//!
//! `lift_project_rhs` evaluates the same quantity through the full
//! moving-frame equation (exact chain-rule lift, then projection on M1, M2)
//! and serves as the independent check of every reduced coefficient.

use nalgebra::{Complex, Matrix2};

use crate::dynamics::moving_point;
use crate::error::{Error, Result};
use crate::field::{d1, d2, PairField, ScalarField, SpinField, Vec3};
use crate::walls::{frame_jet, sech, th, MobileFrame, FRAME_M2};

/// Inputs with |r|^2 above this are rejected by `frame_lift`.
pub const LIFT_MARGIN: f64 = 1e-10;

/// Pointwise bound |r|^2 <= 1/2 of the reduced system's a priori regime.
pub const REDUCED_R2_MAX: f64 = 0.5;

pub fn frame_coords(v: &SpinField, frame: &MobileFrame) -> Result<PairField> {
    v.grid().check_same(frame.grid())?;
    let m2 = frame.m2();
    let mut r1 = Vec::with_capacity(v.values().len());
    let mut r2 = Vec::with_capacity(v.values().len());
    for (i, ((vi, m0), m1)) in v.values().iter().zip(frame.m0()).zip(frame.m1()).enumerate() {
        let c0 = vi.dot(m0);
        if !(c0 > 0.0) {
            return Err(Error::OutOfChart { node: i, value: c0 });
        }
        r1.push(vi.dot(m1));
        r2.push(vi.dot(&m2));
    }
    PairField::new(
        ScalarField::new(*v.grid(), r1)?,
        ScalarField::new(*v.grid(), r2)?,
    )
}

/// sqrt(1 - |r|^2) M0 + r1 M1 + r2 M2.
pub fn frame_reconstruct(r: &PairField, frame: &MobileFrame) -> Result<SpinField> {
    r.grid().check_same(frame.grid())?;
    let mut out = Vec::with_capacity(r.grid().len());
    for (i, (((&a, &b), m0), m1)) in r
        .r1()
        .values()
        .iter()
        .zip(r.r2().values())
        .zip(frame.m0())
        .zip(frame.m1())
        .enumerate()
    {
        let n2 = a * a + b * b;
        if n2 > 1.0 - LIFT_MARGIN {
            return Err(Error::ChartDegenerate { node: i, r2: n2 });
        }
        out.push((1.0 - n2).sqrt() * m0 + a * m1 + b * FRAME_M2);
    }
    SpinField::new(*r.grid(), out)
}

/// v and its first two x-derivatives from (r, r_x, r_xx).
#[derive(Debug, Clone)]
pub struct LiftedField {
    pub v: Vec<Vec3>,
    pub v_x: Vec<Vec3>,
    pub v_xx: Vec<Vec3>,
}

/// Exact product/chain rule through the closed-form frame derivatives.
pub fn frame_lift(r: &PairField, r_x: &PairField, r_xx: &PairField) -> Result<LiftedField> {
    let grid = *r.grid();
    grid.check_same(r_x.grid())?;
    grid.check_same(r_xx.grid())?;
    let n = grid.len();
    let mut out = LiftedField {
        v: Vec::with_capacity(n),
        v_x: Vec::with_capacity(n),
        v_xx: Vec::with_capacity(n),
    };
    for (i, x) in grid.nodes().enumerate() {
        let (a, b) = (r.r1().values()[i], r.r2().values()[i]);
        let (pa, pb) = (r_x.r1().values()[i], r_x.r2().values()[i]);
        let (qa, qb) = (r_xx.r1().values()[i], r_xx.r2().values()[i]);
        let n2 = a * a + b * b;
        if n2 > 1.0 - LIFT_MARGIN {
            return Err(Error::ChartDegenerate { node: i, r2: n2 });
        }
        let s = (1.0 - n2).sqrt();
        let rp = a * pa + b * pb;
        let s_x = -rp / s;
        let s_xx = -(pa * pa + pb * pb + a * qa + b * qb) / s - rp * rp / (s * s * s);
        let j = frame_jet(x);
        out.v.push(s * j.m0 + a * j.m1 + b * FRAME_M2);
        out.v_x.push(s_x * j.m0 + s * j.m0_x + pa * j.m1 + a * j.m1_x + pb * FRAME_M2);
        out.v_xx.push(
            s_xx * j.m0
                + 2.0 * s_x * j.m0_x
                + s * j.m0_xx
                + qa * j.m1
                + 2.0 * pa * j.m1_x
                + a * j.m1_xx
                + qb * FRAME_M2,
        );
    }
    Ok(out)
}

/// ell f = f_x + th(x) f.
pub fn op_ell(f: &ScalarField) -> ScalarField {
    let df = d1(f);
    df.map(|_, v| v).zip_with(&f.map(|x, v| th(x) * v), |a, b| a + b).expect("same grid")
}

/// ell* f = -f_x + th(x) f.
pub fn op_ell_adjoint(f: &ScalarField) -> ScalarField {
    d1(f).zip_with(&f.map(|x, v| th(x) * v), |a, b| -a + b).expect("same grid")
}

/// L f = f_xx + (1 - 2 th^2 x) f.
pub fn op_l(f: &ScalarField) -> ScalarField {
    d2(f).zip_with(&f.map(|x, v| potential(x) * v), |a, b| a + b).expect("same grid")
}

/// The potential 1 - 2 th^2 x of L.
#[inline]
pub fn potential(x: f64) -> f64 {
    let t = th(x);
    1.0 - 2.0 * t * t
}

/// J = [[1, 1], [-1, 1]].
pub fn j_matrix() -> Matrix2<f64> {
    Matrix2::new(1.0, 1.0, -1.0, 1.0)
}

/// Eigenvalues of J from trace and determinant.
pub fn j_eigenvalues() -> [Complex<f64>; 2] {
    let j = j_matrix();
    let tr = j.trace();
    let det = j.determinant();
    let disc = Complex::new(tr * tr / 4.0 - det, 0.0).sqrt();
    let half = Complex::new(tr / 2.0, 0.0);
    [half + disc, half - disc]
}

/// A r = J diag(L, L) r = (L r1 + L r2, -L r1 + L r2).
pub fn op_a(r: &PairField) -> PairField {
    let l1 = op_l(r.r1());
    let l2 = op_l(r.r2());
    PairField::new(
        l1.zip_with(&l2, |a, b| a + b).expect("same grid"),
        l1.zip_with(&l2, |a, b| -a + b).expect("same grid"),
    )
    .expect("same grid")
}

/// The six pieces of the reduced right-hand side.
#[derive(Debug, Clone)]
pub struct ReducedRhsParts {
    /// A r
    pub linear_part: PairField,
    /// -delta diag(ell, ell) r
    pub ell_term: PairField,
    /// G(r) r_xx
    pub g_term: PairField,
    /// H1(x, r) r_x
    pub h1_term: PairField,
    /// H2(r)(r_x, r_x)
    pub h2_term: PairField,
    /// P_delta(x, r)
    pub p_term: PairField,
}

impl ReducedRhsParts {
    pub fn total(&self) -> PairField {
        [&self.ell_term, &self.g_term, &self.h1_term, &self.h2_term, &self.p_term]
            .iter()
            .fold(self.linear_part.clone(), |acc, p| acc.add(p).expect("same grid"))
    }

    /// Everything except the linear part.
    pub fn remainder(&self) -> PairField {
        [&self.g_term, &self.h1_term, &self.h2_term, &self.p_term]
            .iter()
            .fold(self.ell_term.clone(), |acc, p| acc.add(p).expect("same grid"))
    }
}

/// Pointwise nonlinear pieces: (G q, H1 p, H2(p, p), P_delta).
fn nonlinear_point(x: f64, r: [f64; 2], p: [f64; 2], q: [f64; 2], delta: f64) -> [[f64; 2]; 4] {
    let [r1, r2] = r;
    let n2 = r1 * r1 + r2 * r2;
    let s = (1.0 - n2).sqrt();
    let sc = sech(x);
    let t = th(x);
    let sc2 = sc * sc;
    // sh x / ch^2 x
    let shc = t * sc;

    let g = [
        [r1 * r2 / s, r2 * r2 / s + s - 1.0],
        [-r1 * r1 / s - s + 1.0, -r1 * r2 / s],
    ];
    let g_q = [g[0][0] * q[0] + g[0][1] * q[1], g[1][0] * q[0] + g[1][1] * q[1]];

    let c = 2.0 * sc / s;
    let h1 = [
        [r2 * s - r1 * r2 * r2, -r2 + r2 * r1 * r1],
        [r2 - r2 * r2 * r2, s * r2 + r1 * r2 * r2],
    ];
    let h1_p = [
        c * (h1[0][0] * p[0] + h1[0][1] * p[1]),
        c * (h1[1][0] * p[0] + h1[1][1] * p[1]),
    ];

    let rp = r1 * p[0] + r2 * p[1];
    let pp = p[0] * p[0] + p[1] * p[1];
    let coef = ((1.0 - n2) * pp + rp * rp) / (1.0 - n2).powf(1.5);
    let h2 = [coef * (s * r1 + r2), coef * (s * r2 - r1)];

    let p1 = 2.0 * r2 * (s - 1.0) * sc2 - 2.0 * r1 * r2 * shc - 2.0 * r1 * n2 * sc2 - 2.0 * r1 * r1 * s * shc
        + r1 * r1 * r1
        + r2 * (1.0 - s)
        + r1 * r2 * r2
        - delta * (sc * (s - 1.0 + r1 * r1) + (s - 1.0) * r1 * t);
    // The r1 (s - 1) term mirrors r2 (1 - s) in p1; it is required for the
    // reduction to agree with the moving-frame equation.
    let p2 = -2.0 * r1 * (s - 1.0) * sc2 + 2.0 * r1 * r1 * shc - 2.0 * r2 * n2 * sc2 - 2.0 * r1 * r2 * s * shc
        + r2 * n2
        + r1 * (s - 1.0)
        - delta * (sc * r1 * r2 + (s - 1.0) * r2 * t);

    [g_q, h1_p, h2, [p1, p2]]
}

fn check_regime(r: &PairField, delta: f64) -> Result<()> {
    if !(delta.abs() <= 1.0) {
        return Err(Error::OutOfRegime(format!("|delta| = {} > 1", delta.abs())));
    }
    for (i, (a, b)) in r.r1().values().iter().zip(r.r2().values()).enumerate() {
        let n2 = a * a + b * b;
        if !(n2 <= REDUCED_R2_MAX) {
            return Err(Error::OutOfRegime(format!("|r|^2 = {n2} > 1/2 at node {i}")));
        }
    }
    Ok(())
}

/// A r + R_delta(x, r, r_x, r_xx) with r_x = d1 r and r_xx = d2 r.
pub fn reduced_rhs(r: &PairField, delta: f64) -> Result<(PairField, ReducedRhsParts)> {
    check_regime(r, delta)?;
    let grid = *r.grid();
    let rx = r.map_components(d1);
    let rxx = r.map_components(d2);
    let n = grid.len();
    let mut cols: [[Vec<f64>; 2]; 4] = Default::default();
    for c in cols.iter_mut().flatten() {
        c.reserve(n);
    }
    for (i, x) in grid.nodes().enumerate() {
        let at = |f: &PairField| [f.r1().values()[i], f.r2().values()[i]];
        let parts = nonlinear_point(x, at(r), at(&rx), at(&rxx), delta);
        for (k, part) in parts.iter().enumerate() {
            cols[k][0].push(part[0]);
            cols[k][1].push(part[1]);
        }
    }
    let to_pair = |[a, b]: [Vec<f64>; 2]| {
        PairField::new(ScalarField::new(grid, a).expect("len"), ScalarField::new(grid, b).expect("len"))
            .expect("same grid")
    };
    let [g, h1, h2, p] = cols;
    let ell_r = r.map_components(op_ell);
    let parts = ReducedRhsParts {
        linear_part: op_a(r),
        ell_term: ell_r.scaled(-delta),
        g_term: to_pair(g),
        h1_term: to_pair(h1),
        h2_term: to_pair(h2),
        p_term: to_pair(p),
    };
    Ok((parts.total(), parts))
}

/// Moving-frame right-hand side evaluated on the exact lift of (r, d1 r,
/// d2 r) and projected on (M1, M2).
pub fn lift_project_rhs(r: &PairField, delta: f64) -> Result<PairField> {
    let grid = *r.grid();
    let lifted = frame_lift(r, &r.map_components(d1), &r.map_components(d2))?;
    let (mut a, mut b) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for (i, x) in grid.nodes().enumerate() {
        let rhs = moving_point(&lifted.v[i], &lifted.v_x[i], &lifted.v_xx[i], delta);
        let j = frame_jet(x);
        a.push(rhs.dot(&j.m1));
        b.push(rhs.dot(&FRAME_M2));
    }
    PairField::new(ScalarField::new(grid, a)?, ScalarField::new(grid, b)?)
}
