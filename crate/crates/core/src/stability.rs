//! Kernel/orthogonal splitting r = R_Lambda + W around the wall, the
//! Lyapunov functional V(W), spectral diagnostics of L and A = JL, and
//! exponential decay fits.

use nalgebra::{DMatrix, Matrix2, Vector2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{inner_l2, rotate, Grid, PairField, ScalarField, SpinField};
use crate::reduction::{frame_coords, frame_reconstruct, op_l, potential};
use crate::walls::{frame_m1, sech, wall_m0, MobileFrame, FRAME_M2};

/// Orthogonality slack above which `lyapunov_v` logs a warning.
pub const ORTHOGONALITY_WARN: f64 = 1e-6;

/// Symmetry part Lambda = (theta, sigma) of a wall: phase and position.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Lambda {
    pub theta: f64,
    pub sigma: f64,
}

impl Lambda {
    pub fn new(theta: f64, sigma: f64) -> Lambda {
        Lambda { theta, sigma }
    }

    fn as_vector(self) -> Vector2<f64> {
        Vector2::new(self.theta, self.sigma)
    }

    fn from_vector(v: Vector2<f64>) -> Lambda {
        Lambda::new(v[0], v[1])
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub lambda: Lambda,
    pub w: PairField,
    pub newton_iters: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ChartOptions {
    pub newton_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Inputs with sup |r| above this are treated as outside the chart.
    pub max_sup: f64,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            newton_tol: 1e-12,
            max_iter: 50,
            fd_step: 1e-6,
            max_sup: 0.5,
        }
    }
}

/// a1 = (0, sech), a2 = (sech, 0): the kernel of L in each component.
pub fn kernel_basis(grid: &Grid) -> (PairField, PairField) {
    (
        PairField::from_fn(*grid, |x| (0.0, sech(x))),
        PairField::from_fn(*grid, |x| (sech(x), 0.0)),
    )
}

/// Mobile-frame coordinates of R_theta M0(x - sigma).
pub fn r_of_lambda(lambda: Lambda, grid: &Grid) -> Result<PairField> {
    let mut r1 = Vec::with_capacity(grid.len());
    let mut r2 = Vec::with_capacity(grid.len());
    for (i, x) in grid.nodes().enumerate() {
        let m = rotate(lambda.theta, &wall_m0(x - lambda.sigma));
        let c0 = m.dot(&wall_m0(x));
        if !(c0 > 0.0) {
            return Err(Error::OutOfChart { node: i, value: c0 });
        }
        r1.push(m.dot(&frame_m1(x)));
        r2.push(m.dot(&FRAME_M2));
    }
    PairField::new(ScalarField::new(*grid, r1)?, ScalarField::new(*grid, r2)?)
}

fn kernel_projections(r: &PairField) -> Vector2<f64> {
    let grid = r.grid();
    let s = ScalarField::from_fn(*grid, sech);
    Vector2::new(
        inner_l2(r.r2(), &s).expect("same grid"),
        inner_l2(r.r1(), &s).expect("same grid"),
    )
}

/// h(Lambda) = (<R_Lambda, a1>, <R_Lambda, a2>).
pub fn h_map(lambda: Lambda, grid: &Grid) -> Result<Vector2<f64>> {
    Ok(kernel_projections(&r_of_lambda(lambda, grid)?))
}

/// Central-difference Jacobian of `h_map`; columns are d/dtheta, d/dsigma.
pub fn h_jacobian(lambda: Lambda, grid: &Grid, step: f64) -> Result<Matrix2<f64>> {
    let mut jac = Matrix2::zeros();
    for k in 0..2 {
        let mut e = Vector2::zeros();
        e[k] = step;
        let base = lambda.as_vector();
        let plus = h_map(Lambda::from_vector(base + e), grid)?;
        let minus = h_map(Lambda::from_vector(base - e), grid)?;
        jac.set_column(k, &((plus - minus) / (2.0 * step)));
    }
    Ok(jac)
}

/// Solve h(Lambda) = (<r, a1>, <r, a2>) by Newton from Lambda = 0 and
/// return W = r - R_Lambda.
pub fn extract_coordinates(r: &PairField, opts: &ChartOptions) -> Result<Decomposition> {
    let sup = r.sup_norm();
    if !(sup <= opts.max_sup) {
        return Err(Error::Precondition(format!(
            "sup |r| = {sup} exceeds the chart neighbourhood {}",
            opts.max_sup
        )));
    }
    let grid = r.grid();
    let target = kernel_projections(r);
    let mut lambda = Vector2::zeros();
    let mut residual = f64::INFINITY;
    for iter in 0..=opts.max_iter {
        let current = Lambda::from_vector(lambda);
        let f = h_map(current, grid)? - target;
        residual = f.amax();
        if residual <= opts.newton_tol {
            let w = r.sub(&r_of_lambda(current, grid)?)?;
            return Ok(Decomposition {
                lambda: current,
                w,
                newton_iters: iter,
                residual,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let jac = h_jacobian(current, grid, opts.fd_step)?;
        let step = jac.lu().solve(&f).ok_or(Error::ChartFailure {
            iters: iter,
            residual,
        })?;
        lambda -= step;
        if !lambda.iter().all(|v| v.is_finite()) {
            break;
        }
    }
    Err(Error::ChartFailure {
        iters: opts.max_iter,
        residual,
    })
}

/// Decompose a lab-frame field around a wall guess (phase, position).
///
/// The field is viewed in the frame of the guessed wall, split there, and
/// the returned Lambda is made absolute again; W stays on the recentred grid.
pub fn decompose_field(u: &SpinField, phase: f64, position: f64, opts: &ChartOptions) -> Result<Decomposition> {
    let local = u.recentred(phase, position);
    let frame = MobileFrame::new(*local.grid());
    let r = frame_coords(&local, &frame)?;
    let mut d = extract_coordinates(&r, opts)?;
    d.lambda.theta += phase;
    d.lambda.sigma += position;
    Ok(d)
}

/// Wall R_theta M0(x - sigma) perturbed by W, where W is sampled on the
/// wall-centred grid `grid.shifted(-sigma)`.
pub fn perturbed_wall(lambda: Lambda, w: &PairField, grid: &Grid) -> Result<SpinField> {
    let centred = grid.shifted(-lambda.sigma);
    centred.check_same(w.grid())?;
    let v = frame_reconstruct(w, &MobileFrame::new(centred))?;
    v.rotated(lambda.theta).relabelled(*grid)
}

/// Project out a1 and a2 under the trapezoid inner product.
pub fn project_orthogonal(w: &PairField) -> PairField {
    let grid = *w.grid();
    let s = ScalarField::from_fn(grid, sech);
    let ss = inner_l2(&s, &s).expect("same grid");
    let c1 = inner_l2(w.r1(), &s).expect("same grid") / ss;
    let c2 = inner_l2(w.r2(), &s).expect("same grid") / ss;
    PairField::new(
        w.r1().zip_with(&s, |a, b| a - c1 * b).expect("same grid"),
        w.r2().zip_with(&s, |a, b| a - c2 * b).expect("same grid"),
    )
    .expect("same grid")
}

/// Deterministic smooth direction in the discrete orthogonal complement of
/// the kernel, scaled to the given H2 norm.
pub fn orthogonal_perturbation(grid: &Grid, h2_amplitude: f64, seed: u64) -> Result<PairField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.random_range(-4.0..4.0),
                rng.random_range(0.6..2.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    let raw = PairField::from_fn(*grid, |x| {
        bumps.iter().fold((0.0, 0.0), |(p, q), &(c, w, a, b)| {
            let g = (-(x - c) * (x - c) / (2.0 * w * w)).exp();
            (p + a * g, q + b * g)
        })
    });
    let w = project_orthogonal(&raw);
    let norm = w.h2_norm();
    if !(norm > 0.0) {
        return Err(Error::Numerical("degenerate random perturbation".into()));
    }
    Ok(w.scaled(h2_amplitude / norm))
}

/// V(W) = (||L W1||^2 + ||L W2||^2) / 2.
pub fn lyapunov_v(w: &PairField) -> f64 {
    let (a1, a2) = kernel_basis(w.grid());
    let slack = w
        .inner_l2(&a1)
        .expect("same grid")
        .abs()
        .max(w.inner_l2(&a2).expect("same grid").abs());
    if slack > ORTHOGONALITY_WARN {
        log::warn!("lyapunov_v: W is not kernel-orthogonal (|<W, a_i>| = {slack:e})");
    }
    let l1 = op_l(w.r1());
    let l2 = op_l(w.r2());
    0.5 * (inner_l2(&l1, &l1).expect("same grid") + inner_l2(&l2, &l2).expect("same grid"))
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// Largest eigenvalues of the discrete L, descending.
    pub eigenvalues: Vec<f64>,
    /// |<phi_k, sech / |sech|>| for each reported eigenvector.
    pub overlap_sech: Vec<f64>,
    /// Real parts of the spectrum of A on the orthogonal complement of the
    /// kernel lie in [a_re_min, a_re_max]; A = JL has eigenvalues (1 +- i) lambda.
    pub a_re_max: f64,
    pub a_re_min: f64,
}

pub const SPECTRUM_MAX_POINTS: usize = 4097;

pub const SPECTRUM_HEADER: &str = "index,eigenvalue,overlap_sech";

/// Dense symmetric eigensolve of L with homogeneous Dirichlet closure.
pub fn spectral_report(grid: &Grid, k: usize) -> Result<SpectralReport> {
    let n = grid.len();
    if n > SPECTRUM_MAX_POINTS {
        return Err(Error::Precondition(format!(
            "dense spectrum needs N <= {SPECTRUM_MAX_POINTS}, got {n}"
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::Precondition(format!("k = {k} must lie in 1..{n}")));
    }
    let h2 = grid.spacing() * grid.spacing();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, x) in grid.nodes().enumerate() {
        m[(i, i)] = -2.0 / h2 + potential(x);
        if i + 1 < n {
            m[(i, i + 1)] = 1.0 / h2;
            m[(i + 1, i)] = 1.0 / h2;
        }
    }
    let eig = m.symmetric_eigen();
    if !eig.eigenvalues.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical("symmetric eigensolve produced non-finite values".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let s: Vec<f64> = grid.nodes().map(sech).collect();
    let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut eigenvalues = Vec::with_capacity(k);
    let mut overlap_sech = Vec::with_capacity(k);
    for &j in order.iter().take(k) {
        eigenvalues.push(eig.eigenvalues[j]);
        let col = eig.eigenvectors.column(j);
        let dot: f64 = col.iter().zip(&s).map(|(a, b)| a * b).sum();
        overlap_sech.push((dot / (s_norm * col.norm())).abs());
    }
    Ok(SpectralReport {
        a_re_max: eig.eigenvalues[order[1]],
        a_re_min: eig.eigenvalues[order[n - 1]],
        eigenvalues,
        overlap_sech,
    })
}

impl SpectralReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SPECTRUM_HEADER}\n");
        for (i, (e, o)) in self.eigenvalues.iter().zip(&self.overlap_sech).enumerate() {
            out.push_str(&format!("{i},{e:.16e},{o:.16e}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Minus the slope of ln(value) against t.
    pub rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

pub const DECAY_MIN_SAMPLES: usize = 10;

/// Least-squares fit of ln(value) = c - rate t over samples with t >= t_skip.
pub fn decay_fit(series: &[(f64, f64)], t_skip: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= t_skip).collect();
    if pts.len() < DECAY_MIN_SAMPLES {
        return Err(Error::DecayFit(format!(
            "need at least {DECAY_MIN_SAMPLES} samples after t = {t_skip}, got {}",
            pts.len()
        )));
    }
    if let Some(&(t, v)) = pts.iter().find(|&&(_, v)| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DecayFit(format!(
            "value {v:e} at t = {t} is not positive; the series has reached its noise floor"
        )));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, v) in &pts {
        let (dt, dy) = (t - tm, v.ln() - ym);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if !(stt > 0.0) {
        return Err(Error::DecayFit("all samples share one time".into()));
    }
    let slope = sty / stt;
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * n {
        1.0
    } else {
        (sty * sty / (stt * syy)).min(1.0)
    };
    Ok(DecayFit {
        rate: -slope,
        r_squared,
        samples: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::op_a;
    use crate::walls::{symmetric_wall, th};

    fn default_grid() -> Grid {
        Grid::new(20.0, 1025).unwrap()
    }

    #[test]
    fn kernel_basis_examples() {
        let g = default_grid();
        let (a1, a2) = kernel_basis(&g);
        assert!(a1.inner_l2(&a2).unwrap().abs() <= 1e-12);
        assert!((a1.inner_l2(&a1).unwrap() - 2.0).abs() <= 1e-6);
        assert!((a2.inner_l2(&a2).unwrap() - 2.0).abs() <= 1e-6);
        // The three-point truncation of L sech is 5h^2/12 in sup norm, per row
        // of J, so 2 * 5h^2/12.
        let h = g.spacing();
        let bound = 2.0 * 5.0 * h * h / 12.0 * 1.001;
        assert!(op_a(&a1).sup_norm() <= bound);
        assert!(op_a(&a2).sup_norm() <= bound);
    }

    #[test]
    fn r_of_lambda_examples() {
        let g = default_grid();
        assert_eq!(r_of_lambda(Lambda::default(), &g).unwrap().sup_norm(), 0.0);

        let theta = 0.2f64;
        let r = r_of_lambda(Lambda::new(theta, 0.0), &g).unwrap();
        for (x, (a, b)) in g.nodes().zip(r.r1().values().iter().zip(r.r2().values())) {
            assert!((a - (1.0 - theta.cos()) * th(x) * sech(x)).abs() <= 1e-12);
            assert!((b + theta.sin() * sech(x)).abs() <= 1e-12);
        }

        let lam = Lambda::new(0.3, -0.4);
        let v = frame_reconstruct(&r_of_lambda(lam, &g).unwrap(), &MobileFrame::new(g)).unwrap();
        let exact = symmetric_wall(lam.theta, lam.sigma, &g).unwrap();
        for (p, q) in v.values().iter().zip(exact.values()) {
            assert!((p - q).amax() <= 1e-12);
        }
        assert!(matches!(
            r_of_lambda(Lambda::new(0.0, 5.0), &g),
            Err(Error::OutOfChart { .. })
        ));
    }

    #[test]
    fn dh_at_zero_is_minus_two() {
        let g = default_grid();
        let jac = h_jacobian(Lambda::default(), &g, 1e-6).unwrap();
        assert!((jac - Matrix2::new(-2.0, 0.0, 0.0, -2.0)).amax() <= 1e-6, "{jac}");
    }

    #[test]
    fn extraction_examples() {
        let g = default_grid();
        let opts = ChartOptions::default();
        let d = extract_coordinates(&r_of_lambda(Lambda::new(0.1, 0.3), &g).unwrap(), &opts).unwrap();
        assert!((d.lambda.theta - 0.1).abs() <= 1e-10);
        assert!((d.lambda.sigma - 0.3).abs() <= 1e-10);
        assert!(d.w.sup_norm() <= 1e-10);
        assert!(d.residual <= 1e-12);

        let z = extract_coordinates(&PairField::zeros(g), &opts).unwrap();
        assert_eq!(z.lambda, Lambda::default());
        assert_eq!(z.w.sup_norm(), 0.0);
        assert_eq!(z.newton_iters, 0);
    }

    #[test]
    fn extraction_grid_of_lambdas() {
        let g = Grid::new(20.0, 513).unwrap();
        let opts = ChartOptions { max_sup: 0.9, ..ChartOptions::default() };
        for &theta in &[-0.4, -0.2, 0.0, 0.2, 0.4] {
            for &sigma in &[-0.8, -0.4, 0.0, 0.4, 0.8] {
                let lam = Lambda::new(theta, sigma);
                let d = extract_coordinates(&r_of_lambda(lam, &g).unwrap(), &opts).unwrap();
                assert!((d.lambda.theta - theta).abs() <= 1e-10);
                assert!((d.lambda.sigma - sigma).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn decomposition_is_orthogonal_and_idempotent() {
        let g = default_grid();
        let opts = ChartOptions::default();
        let (a1, a2) = kernel_basis(&g);
        for seed in 0..4 {
            let w0 = orthogonal_perturbation(&g, 0.05, seed).unwrap();
            let r = r_of_lambda(Lambda::new(0.15, -0.2), &g).unwrap().add(&w0.scaled(2.0)).unwrap();
            let d = extract_coordinates(&r, &opts).unwrap();
            assert!(d.w.inner_l2(&a1).unwrap().abs() <= 1e-9);
            assert!(d.w.inner_l2(&a2).unwrap().abs() <= 1e-9);
            let again = extract_coordinates(&r_of_lambda(d.lambda, &g).unwrap().add(&d.w).unwrap(), &opts).unwrap();
            assert!((again.lambda.theta - d.lambda.theta).abs() <= 1e-9);
            assert!((again.lambda.sigma - d.lambda.sigma).abs() <= 1e-9);
            assert!(again.w.sub(&d.w).unwrap().sup_norm() <= 1e-9);
        }
    }

    #[test]
    fn extraction_rejects_far_inputs() {
        let g = Grid::new(20.0, 257).unwrap();
        let far = PairField::from_fn(g, |_| (0.7, 0.0));
        assert!(matches!(extract_coordinates(&far, &ChartOptions::default()), Err(Error::Precondition(_))));
        let opts = ChartOptions { max_iter: 1, max_sup: 1.0, ..ChartOptions::default() };
        let r = r_of_lambda(Lambda::new(0.4, 0.6), &g).unwrap();
        assert!(matches!(extract_coordinates(&r, &opts), Err(Error::ChartFailure { .. })));
    }

    #[test]
    fn decompose_field_recovers_perturbed_wall() {
        let g = default_grid();
        let lam = Lambda::new(0.7, 3.25);
        let centred = g.shifted(-lam.sigma);
        let w = orthogonal_perturbation(&centred, 1e-2, 11).unwrap();
        let u = perturbed_wall(lam, &w, &g).unwrap();
        let d = decompose_field(&u, 0.7, 3.25, &ChartOptions::default()).unwrap();
        assert!((d.lambda.theta - lam.theta).abs() <= 1e-10);
        assert!((d.lambda.sigma - lam.sigma).abs() <= 1e-10);
        assert!(d.w.sub(&w).unwrap().sup_norm() <= 1e-10);

        // For an unperturbed wall any nearby guess lands on the same absolute
        // Lambda; with W present the split depends on the reference frame at
        // order |W| times the guess offset.
        let pure = symmetric_wall(lam.theta, lam.sigma, &g).unwrap();
        let d0 = decompose_field(&pure, 0.6, 3.0, &ChartOptions::default()).unwrap();
        assert!((d0.lambda.theta - lam.theta).abs() <= 1e-9);
        assert!((d0.lambda.sigma - lam.sigma).abs() <= 1e-9);
        let d2 = decompose_field(&u, 0.6, 3.0, &ChartOptions::default()).unwrap();
        assert!((d2.lambda.theta - lam.theta).abs() <= 1e-2 * 0.25);
        assert!((d2.lambda.sigma - lam.sigma).abs() <= 1e-2 * 0.25);
    }

    #[test]
    fn perturbation_is_orthogonal_and_scaled() {
        let g = default_grid();
        let (a1, a2) = kernel_basis(&g);
        let w = orthogonal_perturbation(&g, 1e-3, 42).unwrap();
        assert!((w.h2_norm() - 1e-3).abs() <= 1e-15);
        assert!(w.inner_l2(&a1).unwrap().abs() <= 1e-15);
        assert!(w.inner_l2(&a2).unwrap().abs() <= 1e-15);
        assert_eq!(w, orthogonal_perturbation(&g, 1e-3, 42).unwrap());
        assert_ne!(w, orthogonal_perturbation(&g, 1e-3, 43).unwrap());
    }

    #[test]
    fn lyapunov_examples() {
        let g = default_grid();
        let (a1, a2) = kernel_basis(&g);
        assert_eq!(lyapunov_v(&PairField::zeros(g)), 0.0);
        assert!(lyapunov_v(&a1) <= 1e-6);

        // Adding kernel directions changes V only through the cross term
        // 2 eps <L W, L a>, where L a is the O(h^2) truncation of L sech; it
        // scales with |W|.
        let change = |amp: f64, eps: f64| {
            let w = orthogonal_perturbation(&g, amp, 5).unwrap();
            let shifted = w.add(&a1.scaled(eps)).unwrap().add(&a2.scaled(eps)).unwrap();
            (lyapunov_v(&shifted) - lyapunov_v(&w)).abs()
        };
        for eps in [1e-4, 1e-3, 1e-2] {
            assert!(change(1e-3, eps) <= 1e-6 * eps, "{}", change(1e-3, eps) / eps);
        }
        let ratio = change(1e-2, 1e-4) / change(1e-3, 1e-4);
        assert!((ratio - 10.0).abs() <= 0.5, "{ratio}");
    }

    #[test]
    fn lyapunov_is_a_norm_on_the_complement() {
        let g = default_grid();
        let mut worst = f64::INFINITY;
        for seed in 0..100 {
            let w = orthogonal_perturbation(&g, 1.0, 1000 + seed).unwrap();
            worst = worst.min(lyapunov_v(&w).sqrt() / w.h2_norm());
        }
        assert!(worst >= 0.3, "smallest ratio {worst}");
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(potential(0.0), 1.0);
        let g = default_grid();
        let rep = spectral_report(&g, 6).unwrap();
        assert_eq!(rep.eigenvalues.len(), 6);
        assert!(rep.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(rep.eigenvalues[0].abs() <= 1e-3, "{}", rep.eigenvalues[0]);
        assert!(rep.overlap_sech[0] >= 0.999);
        assert!((-1.05..=-0.90).contains(&rep.eigenvalues[1]), "{}", rep.eigenvalues[1]);
        assert_eq!(rep.a_re_max, rep.eigenvalues[1]);
        assert!(rep.a_re_min < -1000.0);

        let coarse = spectral_report(&Grid::new(20.0, 513).unwrap(), 2).unwrap();
        let ratio = coarse.eigenvalues[0] / rep.eigenvalues[0];
        assert!((ratio - 4.0).abs() <= 0.8, "ratio {ratio}");

        assert!(spectral_report(&Grid::new(20.0, 4099).unwrap(), 2).is_err());
        let csv = rep.to_csv();
        assert!(csv.starts_with(SPECTRUM_HEADER));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn decay_fit_examples() {
        let exp: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64, (-(i as f64)).exp())).collect();
        let f = decay_fit(&exp, 0.0).unwrap();
        assert!((f.rate - 1.0).abs() <= 1e-10);
        assert!((f.r_squared - 1.0).abs() <= 1e-12);

        let flat: Vec<(f64, f64)> = (0..12).map(|i| (i as f64, 3.5)).collect();
        let f = decay_fit(&flat, 0.0).unwrap();
        assert!(f.rate.abs() <= 1e-12);

        assert!(decay_fit(&exp, 5.0).is_err());
        let mut bad = exp.clone();
        bad[4].1 = 0.0;
        assert!(matches!(decay_fit(&bad, 0.0), Err(Error::DecayFit(_))));
    }
}
