//! Pointwise evaluation of the null expansion operator theta(u) for
//! spacelike graphs t = u(x) in a slab, and its evaluation over a grid.
//!
//! The assembly is analytic in (x, u, grad u, Hess u): writing Z for the
//! unit future tangent of the graph inside the slab and N for the slab
//! normal, the expansion with respect to K = Z + N splits as
//! theta = H_Sigma + beta(Z, Z) + H_P, and its second-order part is
//! exactly a^{ij} u_ij with a^{ij} = nu h^{ij} + nu^3 u^i u^j.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::real::Real;

use super::{GraphGrid, SlabChart};

/// Spacelikeness guard: require |grad u|^2 <= 1 - EPS_SPACELIKE.
pub const EPS_SPACELIKE: f64 = 1e-3;

/// Full pointwise evaluation of the operator and its decomposition.
#[derive(Clone, Debug)]
pub struct OperatorEval<F> {
    pub theta: F,
    /// Lorentz factor nu = (1 - |grad u|^2)^{-1/2}.
    pub nu: F,
    /// |grad u|^2 in the slab's spatial metric.
    pub grad_sq: F,
    /// Principal symbol coefficients a^{ij}.
    pub a: Mat<F>,
    /// Mean curvature of the graph inside the slab.
    pub h_sigma: F,
    /// beta(Z, Z), the slab bending seen by the graph's unit tangent.
    pub b_zz: F,
    /// Mean curvature H_P of the slab in the ambient space.
    pub h_p: F,
    /// theta - a^{ij} u_ij; depends only on (x, u, grad u).
    pub lower_order: F,
}

/// Lorentz factor of a graph with gradient `grad` at slab point
/// (t, x); errors when the graph fails the spacelikeness guard.
pub fn nu_of<F: Real>(slab: &SlabChart<F>, t: F, x: &[F], grad: &[F]) -> Result<F> {
    let h = slab.spatial_metric(t, x);
    let (hinv, _) = h.inverse()?;
    let mut q = F::zero();
    for i in 0..slab.d {
        for j in 0..slab.d {
            q = q + hinv[(i, j)] * grad[i] * grad[j];
        }
    }
    if q > F::one() - F::of(EPS_SPACELIKE) {
        return Err(Error::NotSpacelike { grad_sq: q.to_f64().unwrap_or(f64::NAN), node: 0 });
    }
    Ok((F::one() - q).powf(F::of(-0.5)))
}

/// Principal symbol coefficients a^{ij} = nu h^{ij} + nu^3 u^i u^j.
pub fn principal_coeffs<F: Real>(
    slab: &SlabChart<F>,
    t: F,
    x: &[F],
    grad: &[F],
) -> Result<Mat<F>> {
    Ok(eval_pointwise(slab, x, t, grad, &Mat::zeros(slab.d, slab.d))?.a)
}

/// Evaluate theta(u) and its decomposition from pointwise data: slab
/// spatial position `x`, graph height `u`, gradient and Hessian.
pub fn eval_pointwise<F: Real>(
    slab: &SlabChart<F>,
    x: &[F],
    u: F,
    grad: &[F],
    hess: &Mat<F>,
) -> Result<OperatorEval<F>> {
    let d = slab.d;
    assert_eq!(grad.len(), d);
    let h = slab.spatial_metric(u, x);
    let (hinv, _) = h.inverse()?;
    let dt_h = slab.spatial_metric_dt(u, x);
    let dx_h = slab.spatial_metric_dx(u, x);

    let mut q = F::zero();
    for i in 0..d {
        for j in 0..d {
            q = q + hinv[(i, j)] * grad[i] * grad[j];
        }
    }
    if q > F::one() - F::of(EPS_SPACELIKE) {
        return Err(Error::NotSpacelike { grad_sq: q.to_f64().unwrap_or(f64::NAN), node: 0 });
    }
    let nu = (F::one() - q).powf(F::of(-0.5));
    let nu2 = nu * nu;
    let nu3 = nu2 * nu;

    // Raised gradient and derivatives along the graph.
    let up: Vec<F> = (0..d)
        .map(|i| (0..d).map(|j| hinv[(i, j)] * grad[j]).sum())
        .collect();
    // Total derivative of h_jk along the graph: D_i h = dx_h_i + u_i dt_h.
    let dh: Vec<Mat<F>> = (0..d).map(|i| dx_h[i].add(&dt_h.scale(grad[i]))).collect();
    // D_i h^{jk} = -(hinv D_i h hinv)^{jk}.
    let dhinv: Vec<Mat<F>> =
        (0..d).map(|i| hinv.matmul(&dh[i]).matmul(&hinv).scale(-F::one())).collect();
    // D_i u^j and D_i q.
    let dup = Mat::from_fn(d, d, |i, j| {
        let mut acc = F::zero();
        for k in 0..d {
            acc = acc + dhinv[i][(j, k)] * grad[k] + hinv[(j, k)] * hess[(k, i)];
        }
        acc
    });
    let dq: Vec<F> = (0..d)
        .map(|i| {
            let mut acc = F::zero();
            for k in 0..d {
                for l in 0..d {
                    acc = acc + dhinv[i][(k, l)] * grad[k] * grad[l];
                }
                acc = acc + F::of(2.0) * up[k] * hess[(k, i)];
            }
            acc
        })
        .collect();
    let dnu: Vec<F> = (0..d).map(|i| nu3 * dq[i].half()).collect();

    // Slab Christoffels at (u, x): unit lapse, zero shift.
    // Gamma^0_ij = dt_h/2; Gamma^k_0j = hinv dt_h / 2; spatial Gamma from
    // the fixed-time partials dx_h.
    let gamma0 = dt_h.scale(F::of(0.5));
    let gamma_mixed = hinv.matmul(&dt_h).scale(F::of(0.5)); // [k][j]
    let gamma_sp = |k: usize, i: usize, j: usize| -> F {
        let mut acc = F::zero();
        for l in 0..d {
            acc = acc
                + hinv[(k, l)] * (dx_h[i][(j, l)] + dx_h[j][(i, l)] - dx_h[l][(i, j)]);
        }
        acc.half()
    };

    // Covariant derivative of Z = (nu, nu u^j) along the graph tangent
    // E_i = (u_i, delta_i), split into coordinate and connection parts.
    let mut s_low = Mat::zeros(d, d);
    for i in 0..d {
        let dz0 = dnu[i];
        let mut c0 = F::zero();
        for l in 0..d {
            c0 = c0 + dt_h[(i, l)] * up[l];
        }
        c0 = nu * c0.half();
        let _ = &gamma0;
        let mut dzk = vec![F::zero(); d];
        for k in 0..d {
            dzk[k] = dnu[i] * up[k] + nu * dup[(i, k)];
            let mut conn = F::zero();
            // u_i Gamma^k_{0l} u^l
            for l in 0..d {
                conn = conn + grad[i] * gamma_mixed[(k, l)] * up[l];
            }
            // Gamma^k_{i0}
            conn = conn + gamma_mixed[(k, i)];
            // Gamma^k_{im} u^m
            for mth in 0..d {
                conn = conn + gamma_sp(k, i, mth) * up[mth];
            }
            dzk[k] = dzk[k] + nu * conn;
        }
        for j in 0..d {
            let mut acc = -(dz0 + c0) * grad[j];
            for k in 0..d {
                acc = acc + dzk[k] * h[(k, j)];
            }
            s_low[(i, j)] = acc;
        }
    }

    // Inverse induced metric of the graph inside the slab.
    let ghat = Mat::from_fn(d, d, |i, j| hinv[(i, j)] + nu2 * up[i] * up[j]);
    let mut h_sigma = F::zero();
    for i in 0..d {
        for j in 0..d {
            h_sigma = h_sigma + ghat[(i, j)] * s_low[(i, j)];
        }
    }

    let beta = slab.second_fundamental_form(u, x);
    let mut b_quad = beta[(0, 0)];
    for i in 0..d {
        b_quad = b_quad + F::of(2.0) * beta[(0, 1 + i)] * up[i];
        for j in 0..d {
            b_quad = b_quad + beta[(1 + i, 1 + j)] * up[i] * up[j];
        }
    }
    let b_zz = nu2 * b_quad;
    let h_p = slab.mean_curvature(u, x);
    let theta = h_sigma + b_zz + h_p;

    let a = Mat::from_fn(d, d, |i, j| nu * hinv[(i, j)] + nu3 * up[i] * up[j]);
    let mut principal = F::zero();
    for i in 0..d {
        for j in 0..d {
            principal = principal + a[(i, j)] * hess[(i, j)];
        }
    }
    Ok(OperatorEval {
        theta,
        nu,
        grad_sq: q,
        a,
        h_sigma,
        b_zz,
        h_p,
        lower_order: theta - principal,
    })
}

/// The three pieces H_Sigma, beta(Z,Z), H_P of the expansion.
pub fn decompose_theta<F: Real>(
    slab: &SlabChart<F>,
    x: &[F],
    u: F,
    grad: &[F],
    hess: &Mat<F>,
) -> Result<(F, F, F)> {
    let e = eval_pointwise(slab, x, u, grad, hess)?;
    Ok((e.h_sigma, e.b_zz, e.h_p))
}

/// theta(u) over the interior nodes of a grid (None on the boundary).
#[derive(Clone, Debug)]
pub struct ThetaField<F> {
    pub shape: Vec<usize>,
    pub values: Vec<Option<F>>,
}

impl<F: Real> ThetaField<F> {
    pub fn interior_max_abs(&self) -> F {
        self.values
            .iter()
            .flatten()
            .map(|v| v.abs())
            .fold(F::zero(), F::max)
    }

    pub fn write_csv<W: std::io::Write>(&self, grid: &GraphGrid<F>, mut w: W) -> Result<()> {
        for a in 0..grid.d {
            write!(w, "x{a},")?;
        }
        writeln!(w, "u,theta")?;
        for idx in 0..grid.len() {
            let Some(theta) = self.values[idx] else {
                continue;
            };
            for c in grid.coords(idx) {
                write!(w, "{:.17e},", c)?;
            }
            writeln!(w, "{:.17e},{:.17e}", grid.u[idx], theta)?;
        }
        Ok(())
    }
}

pub fn theta_of_graph<F: Real>(slab: &SlabChart<F>, grid: &GraphGrid<F>) -> Result<ThetaField<F>> {
    if grid.d != slab.d {
        return Err(Error::LatticeMismatch(format!(
            "grid dimension {} vs slab dimension {}",
            grid.d, slab.d
        )));
    }
    let mut values = vec![None; grid.len()];
    for idx in grid.interior_indices() {
        let x = grid.coords(idx);
        let grad = grid.gradient(idx)?;
        let hess = grid.hessian(idx)?;
        let eval = eval_pointwise(slab, &x, grid.u[idx], &grad, &hess).map_err(|e| match e {
            Error::NotSpacelike { grad_sq, .. } => Error::NotSpacelike { grad_sq, node: idx },
            other => other,
        })?;
        values[idx] = Some(eval.theta);
    }
    Ok(ThetaField { shape: grid.shape.clone(), values })
}

#[cfg(test)]
mod tests {
    use super::super::slabs::*;
    use super::*;

    #[test]
    fn linear_graph_on_hyperplane_is_exactly_null_flat() {
        // u = k x^1 slices the null hyperplane {t = k x^1 + c}; theta = 0
        // and the discrete operator is exact on linear data.
        let slab = minkowski_hyperplane::<f64>(4, 1.0);
        let grid = GraphGrid::from_fn(
            vec![-1.0, -1.0],
            vec![1.0, 1.0],
            vec![9, 9],
            |x: &[f64]| 0.6 * x[0],
        );
        let field = theta_of_graph(&slab, &grid).unwrap();
        assert!(field.interior_max_abs() < 1e-13);
    }

    #[test]
    fn steep_graph_fails_spacelike_guard() {
        let slab = minkowski_hyperplane::<f64>(4, 1.0);
        let grid = GraphGrid::from_fn(
            vec![-1.0, -1.0],
            vec![1.0, 1.0],
            vec![9, 9],
            |x: &[f64]| 0.9999 * x[0],
        );
        match theta_of_graph(&slab, &grid) {
            Err(Error::NotSpacelike { grad_sq, node }) => {
                assert!(grad_sq > 1.0 - EPS_SPACELIKE);
                assert!(node > 0);
            }
            other => panic!("expected spacelike guard, got {other:?}"),
        }
    }

    #[test]
    fn cone_graph_has_constant_theta() {
        // Graph of u = t0 + sqrt(|x - x0|^2 + z0^2) over the hyperplane
        // {x^3 = 0} slices the future light cone with vertex at
        // (t0, x0, -z0); the expansion w.r.t. K = Z + N is 2/z0.
        let slab = minkowski_hyperplane::<f64>(4, 1.0);
        let (x0, z0, t0) = ([0.15, -0.2], 1.7, 0.4);
        let cone = |x: &[f64]| {
            let rx = x[0] - x0[0];
            let ry = x[1] - x0[1];
            t0 + (rx * rx + ry * ry + z0 * z0).sqrt()
        };
        // Analytic derivatives: exact evaluation of the operator.
        let x = [0.5, 0.3];
        let (rx, ry) = (x[0] - x0[0], x[1] - x0[1]);
        let rho = (rx * rx + ry * ry + z0 * z0).sqrt();
        let grad = [rx / rho, ry / rho];
        let hess = Mat::from_rows(&[
            &[(1.0 - grad[0] * grad[0]) / rho, -grad[0] * grad[1] / rho],
            &[-grad[0] * grad[1] / rho, (1.0 - grad[1] * grad[1]) / rho],
        ]);
        let eval = eval_pointwise(&slab, &x, cone(&x), &grad, &hess).unwrap();
        assert!(
            (eval.theta - 2.0 / z0).abs() < 1e-12,
            "analytic cone theta {} vs {}",
            eval.theta,
            2.0 / z0
        );
        // Discrete evaluation converges to the same constant.
        let grid =
            GraphGrid::from_fn(vec![-0.6, -0.6], vec![0.6, 0.6], vec![41, 41], cone);
        let field = theta_of_graph(&slab, &grid).unwrap();
        let mut worst: f64 = 0.0;
        for v in field.values.iter().flatten() {
            worst = worst.max((v - 2.0 / z0).abs());
        }
        assert!(worst < 5e-4, "discrete cone worst error {worst:.3e}");
    }

    #[test]
    fn cylinder_null_slice_converges_at_second_order() {
        // u = rho cos(phi) is the cylinder slice of the null hyperplane
        // {t = x^1}: continuum theta = 0, discrete error O(h^2).
        let rho = 1.3;
        let slab = minkowski_cylinder::<f64>(rho);
        let err_at = |nodes: usize| -> f64 {
            let grid = GraphGrid::from_fn(
                vec![-0.6, -0.5],
                vec![0.6, 0.5],
                vec![nodes, nodes],
                |x: &[f64]| rho * x[0].cos(),
            );
            theta_of_graph(&slab, &grid).unwrap().interior_max_abs()
        };
        let e1 = err_at(31);
        let e2 = err_at(61);
        let ratio = e1 / e2;
        assert!(
            (3.0..5.5).contains(&ratio),
            "convergence ratio {ratio} (errors {e1:.3e}, {e2:.3e})"
        );
    }

    #[test]
    fn shell_static_slice_theta() {
        // u = const on the Schwarzschild shell: the round sphere with
        // outgoing null expansion 2 sqrt(f0) / r0, exercising the
        // time-time component of the slab bending.
        let (m, r0) = (1.0, 4.0);
        let f0: f64 = 1.0 - 2.0 * m / r0;
        let slab = schwarzschild_shell::<f64>(m, r0);
        let grid = GraphGrid::from_fn(
            vec![0.9, -0.4],
            vec![2.2, 0.4],
            vec![17, 17],
            |_x: &[f64]| 0.3,
        );
        let field = theta_of_graph(&slab, &grid).unwrap();
        let expect = 2.0 * f0.sqrt() / r0;
        for v in field.values.iter().flatten() {
            assert!((v - expect).abs() < 1e-10, "shell theta {v} vs {expect}");
        }
    }

    #[test]
    fn lower_order_part_ignores_hessian() {
        // theta - a^{ij} u_ij must depend only on (x, u, grad u): feed two
        // different Hessians with identical first-order data.
        let slab = schwarzschild_shell::<f64>(1.0, 5.0);
        let x = [1.2, 0.3];
        let grad = [0.21, -0.4];
        let h1 = Mat::from_rows(&[&[0.7, -0.2], &[-0.2, 1.4]]);
        let h2 = Mat::from_rows(&[&[-3.0, 0.9], &[0.9, 0.4]]);
        let e1 = eval_pointwise(&slab, &x, 0.7, &grad, &h1).unwrap();
        let e2 = eval_pointwise(&slab, &x, 0.7, &grad, &h2).unwrap();
        assert!(
            (e1.lower_order - e2.lower_order).abs() < 1e-12,
            "lower-order parts differ: {} vs {}",
            e1.lower_order,
            e2.lower_order
        );
        assert!((e1.theta - e2.theta).abs() > 1e-3, "thetas should differ");
    }

    #[test]
    fn principal_coeffs_match_formula() {
        let slab = minkowski_cylinder::<f64>(2.0);
        let grad = [0.5, -0.3];
        let a = principal_coeffs(&slab, 0.1, &[0.2, 0.7], &grad).unwrap();
        let hinv = [[0.25, 0.0], [0.0, 1.0]];
        let up = [hinv[0][0] * grad[0], hinv[1][1] * grad[1]];
        let q = up[0] * grad[0] + up[1] * grad[1];
        let nu = (1.0 - q as f64).powf(-0.5);
        for i in 0..2 {
            for j in 0..2 {
                let expect = nu * hinv[i][j] + nu.powi(3) * up[i] * up[j];
                assert!((a[(i, j)] - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn nu_matches_flat_formula() {
        let slab = minkowski_hyperplane::<f64>(4, 1.0);
        let nu = nu_of(&slab, 0.0, &[0.1, 0.2], &[0.6, 0.0]).unwrap();
        assert!((nu - (1.0f64 - 0.36).powf(-0.5)).abs() < 1e-14);
        assert!(nu_of(&slab, 0.0, &[0.0, 0.0], &[0.9999, 0.0]).is_err());
    }
}
