//! Null expansion of spacelike graphs over a timelike slab.
//!
//! A [`SlabChart`] describes a timelike hypersurface P with product-form
//! metric -dt^2 + h_ij(t, x) dx^i dx^j, its second fundamental form beta
//! in the ambient spacetime and its mean curvature H_P.  A spacelike
//! graph t = u(x) inside P is a codimension-two surface whose outward
//! null expansion theta(u) is a quasilinear second-order operator in u.

mod banded;
mod grid;
mod operator;
mod solver;

pub use banded::BandedMatrix;
pub use grid::GraphGrid;
pub use operator::{
    decompose_theta, eval_pointwise, nu_of, principal_coeffs, theta_of_graph, OperatorEval,
    ThetaField, EPS_SPACELIKE,
};
pub use solver::{solve_theta, NewtonOptions, SolveReport, ThetaTarget};

use crate::error::{Error, Result};
use crate::linalg::{bilinear, Mat};
use crate::real::Real;
use crate::spacetime::{catalog as metrics, MetricModel};

type ScalarFn<F> = Box<dyn Fn(F, &[F]) -> F + Send + Sync>;
type MatFn<F> = Box<dyn Fn(F, &[F]) -> Mat<F> + Send + Sync>;
type MatsFn<F> = Box<dyn Fn(F, &[F]) -> Vec<Mat<F>> + Send + Sync>;
type VecFn<F> = Box<dyn Fn(F, &[F]) -> Vec<F> + Send + Sync>;

/// Link from slab coordinates (t, x) to an ambient spacetime model, with
/// the unit spacelike normal of P expressed in ambient components.
pub struct AmbientLink<F> {
    pub model: MetricModel<F>,
    pub embed: VecFn<F>,
    pub normal: VecFn<F>,
}

/// Timelike slab P with metric -dt^2 + h_ij(t, x) dx^i dx^j.
pub struct SlabChart<F> {
    pub name: String,
    /// Number of spatial slab coordinates (ambient dimension minus two).
    pub d: usize,
    h: MatFn<F>,
    dt_h: MatFn<F>,
    dx_h: MatsFn<F>,
    /// Second fundamental form beta(X, Y) = g(nabla_X N, Y) of P in the
    /// ambient space, over the slab coordinates (index 0 = t).
    beta: MatFn<F>,
    h_p: ScalarFn<F>,
    pub ambient: Option<AmbientLink<F>>,
}

impl<F: Real> SlabChart<F> {
    pub fn spatial_metric(&self, t: F, x: &[F]) -> Mat<F> {
        (self.h)(t, x)
    }
    pub fn spatial_metric_dt(&self, t: F, x: &[F]) -> Mat<F> {
        (self.dt_h)(t, x)
    }
    pub fn spatial_metric_dx(&self, t: F, x: &[F]) -> Vec<Mat<F>> {
        (self.dx_h)(t, x)
    }
    pub fn second_fundamental_form(&self, t: F, x: &[F]) -> Mat<F> {
        (self.beta)(t, x)
    }
    pub fn mean_curvature(&self, t: F, x: &[F]) -> F {
        (self.h_p)(t, x)
    }

    /// Compare the analytic beta / H_P data against an ambient
    /// finite-difference computation at slab point (t, x); returns the
    /// worst absolute defect.  Also checks that the declared normal is
    /// unit and orthogonal to the embedded tangent basis.
    pub fn ambient_defect(&self, t: F, x: &[F]) -> Result<F> {
        let link = self
            .ambient
            .as_ref()
            .ok_or_else(|| Error::Validation(format!("slab `{}` has no ambient link", self.name)))?;
        let model = &link.model;
        let n = model.n;
        let dsl = self.d + 1;
        let here = (link.embed)(t, x);
        let g = model.metric_components(&here)?;
        let gamma = model.christoffel_components(&here)?;
        let nrm = (link.normal)(t, x);

        // Tangent basis and normal derivatives by central differences in
        // the slab coordinates.
        let step = F::of(1e-5);
        let eval = |a: usize, delta: F| -> (Vec<F>, Vec<F>) {
            let mut tt = t;
            let mut xx = x.to_vec();
            if a == 0 {
                tt = tt + delta;
            } else {
                xx[a - 1] = xx[a - 1] + delta;
            }
            ((link.embed)(tt, &xx), (link.normal)(tt, &xx))
        };
        let mut tangents: Vec<Vec<F>> = Vec::with_capacity(dsl);
        let mut dnormal: Vec<Vec<F>> = Vec::with_capacity(dsl);
        for a in 0..dsl {
            let (ep, np) = eval(a, step);
            let (em, nm) = eval(a, -step);
            tangents.push((0..n).map(|m| (ep[m] - em[m]) / (F::of(2.0) * step)).collect());
            dnormal.push((0..n).map(|m| (np[m] - nm[m]) / (F::of(2.0) * step)).collect());
        }

        let mut worst = (bilinear(&g, &nrm, &nrm) - F::one()).abs();
        for ta in &tangents {
            worst = worst.max(bilinear(&g, &nrm, ta).abs());
        }
        // Induced metric must match -dt^2 + h.
        let h = self.spatial_metric(t, x);
        for a in 0..dsl {
            for b in 0..dsl {
                let ind = bilinear(&g, &tangents[a], &tangents[b]);
                let expect = if a == 0 && b == 0 {
                    -F::one()
                } else if a == 0 || b == 0 {
                    F::zero()
                } else {
                    h[(a - 1, b - 1)]
                };
                worst = worst.max((ind - expect).abs());
            }
        }
        // beta(a, b) = g(nabla_{E_a} N, E_b).
        let beta = self.second_fundamental_form(t, x);
        let mut trace = F::zero();
        let hinv = self.spatial_metric(t, x).inverse()?.0;
        for a in 0..dsl {
            let mut cov: Vec<F> = dnormal[a].clone();
            for m in 0..n {
                for nu in 0..n {
                    for r in 0..n {
                        cov[m] = cov[m] + gamma[m][(nu, r)] * tangents[a][nu] * nrm[r];
                    }
                }
            }
            for b in 0..dsl {
                let val = bilinear(&g, &cov, &tangents[b]);
                worst = worst.max((val - beta[(a, b)]).abs());
            }
        }
        // H_P = trace of beta in the slab metric.
        trace = trace - beta[(0, 0)];
        for i in 0..self.d {
            for j in 0..self.d {
                trace = trace + hinv[(i, j)] * beta[(1 + i, 1 + j)];
            }
        }
        worst = worst.max((trace - self.mean_curvature(t, x)).abs());
        Ok(worst)
    }
}

pub mod slabs {
    //! The slab catalog: flat hyperplane, round cylinder and a
    //! Schwarzschild shell at constant area radius.

    use super::*;

    /// Timelike hyperplane {x^{n-1} = 0} in n-dimensional Minkowski
    /// space; `normal_sign` picks the orientation of N = +/- d/dx^{n-1}.
    pub fn minkowski_hyperplane<F: Real>(n: usize, normal_sign: F) -> SlabChart<F> {
        assert!(n >= 3);
        assert!(normal_sign == F::one() || normal_sign == -F::one());
        let d = n - 2;
        SlabChart {
            name: format!("hyperplane{n}"),
            d,
            h: Box::new(move |_t, _x| Mat::identity(d)),
            dt_h: Box::new(move |_t, _x| Mat::zeros(d, d)),
            dx_h: Box::new(move |_t, _x| vec![Mat::zeros(d, d); d]),
            beta: Box::new(move |_t, _x| Mat::zeros(d + 1, d + 1)),
            h_p: Box::new(|_t, _x| F::zero()),
            ambient: Some(AmbientLink {
                model: metrics::minkowski(n),
                embed: Box::new(move |t, x| {
                    let mut c = Vec::with_capacity(n);
                    c.push(t);
                    c.extend_from_slice(x);
                    c.push(F::zero());
                    c
                }),
                normal: Box::new(move |_t, _x| {
                    let mut v = vec![F::zero(); n];
                    v[n - 1] = normal_sign;
                    v
                }),
            }),
        }
    }

    /// Round cylinder of radius `rho` (times the time axis) in Minkowski
    /// 4-space, slab coordinates (t, phi, z), outward normal.
    pub fn minkowski_cylinder<F: Real>(rho: F) -> SlabChart<F> {
        SlabChart {
            name: "cylinder".into(),
            d: 2,
            h: Box::new(move |_t, _x| {
                let mut m = Mat::identity(2);
                m[(0, 0)] = rho * rho;
                m
            }),
            dt_h: Box::new(move |_t, _x| Mat::zeros(2, 2)),
            dx_h: Box::new(move |_t, _x| vec![Mat::zeros(2, 2); 2]),
            beta: Box::new(move |_t, _x| {
                let mut b = Mat::zeros(3, 3);
                b[(1, 1)] = rho;
                b
            }),
            h_p: Box::new(move |_t, _x| F::one() / rho),
            ambient: Some(AmbientLink {
                model: metrics::minkowski(4),
                embed: Box::new(move |t, x| vec![t, rho * x[0].cos(), rho * x[0].sin(), x[1]]),
                normal: Box::new(move |_t, x| vec![F::zero(), x[0].cos(), x[0].sin(), F::zero()]),
            }),
        }
    }

    /// Timelike shell {r = r0} in the Schwarzschild exterior, r0 > 2M,
    /// slab coordinates (t', theta, phi) with proper time t' = sqrt(f0) t
    /// so the induced metric is the product -dt'^2 + r0^2 dOmega^2.
    pub fn schwarzschild_shell<F: Real>(mass: F, r0: F) -> SlabChart<F> {
        let two = F::of(2.0);
        let f0 = F::one() - two * mass / r0;
        assert!(f0 > F::zero(), "shell must sit outside the horizon");
        let sf = f0.sqrt();
        let fprime = two * mass / (r0 * r0);
        SlabChart {
            name: "shell".into(),
            d: 2,
            h: Box::new(move |_t, x| {
                let mut m = Mat::zeros(2, 2);
                m[(0, 0)] = r0 * r0;
                m[(1, 1)] = r0 * r0 * x[0].sin() * x[0].sin();
                m
            }),
            dt_h: Box::new(move |_t, _x| Mat::zeros(2, 2)),
            dx_h: Box::new(move |_t, x| {
                let mut dtheta = Mat::zeros(2, 2);
                dtheta[(1, 1)] = two * r0 * r0 * x[0].sin() * x[0].cos();
                vec![dtheta, Mat::zeros(2, 2)]
            }),
            beta: Box::new(move |_t, x| {
                let mut b = Mat::zeros(3, 3);
                b[(0, 0)] = -fprime / (two * sf);
                b[(1, 1)] = sf * r0;
                b[(2, 2)] = sf * r0 * x[0].sin() * x[0].sin();
                b
            }),
            h_p: Box::new(move |_t, _x| fprime / (two * sf) + two * sf / r0),
            ambient: Some(AmbientLink {
                model: metrics::schwarzschild_exterior(mass),
                embed: Box::new(move |t, x| vec![t / sf, r0, x[0], x[1]]),
                normal: Box::new(move |_t, _x| vec![F::zero(), sf, F::zero(), F::zero()]),
            }),
        }
    }

    /// Parse a slab spec such as `cylinder{rho=1}` or `shell{M=1,r0=4}`.
    pub fn from_spec<F: Real>(spec: &str) -> Result<SlabChart<F>> {
        let spec = spec.trim();
        let (name, args) = match spec.find('{') {
            Some(i) => {
                if !spec.ends_with('}') {
                    return Err(Error::Validation(format!("malformed slab spec `{spec}`")));
                }
                (&spec[..i], &spec[i + 1..spec.len() - 1])
            }
            None => (spec, ""),
        };
        let mut params = std::collections::BTreeMap::new();
        for pair in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Validation(format!("bad slab parameter `{pair}`")))?;
            let val: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("non-numeric slab parameter `{pair}`")))?;
            params.insert(k.trim().to_string(), val);
        }
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let known: &[&str] = match name {
            "hyperplane" => &["n", "normal_sign"],
            "cylinder" => &["rho"],
            "shell" => &["M", "r0"],
            _ => {
                return Err(Error::UnknownHypersurface(name.to_string()));
            }
        };
        for key in params.keys() {
            if !known.contains(&key.as_str()) {
                return Err(Error::Validation(format!(
                    "slab `{name}` does not take parameter `{key}`"
                )));
            }
        }
        Ok(match name {
            "hyperplane" => {
                let ns = get("normal_sign", 1.0);
                if ns != 1.0 && ns != -1.0 {
                    return Err(Error::Validation("normal_sign must be +1 or -1".into()));
                }
                minkowski_hyperplane(get("n", 4.0) as usize, F::of(ns))
            }
            "cylinder" => {
                let rho = get("rho", 1.0);
                if rho <= 0.0 {
                    return Err(Error::Validation("cylinder radius must be positive".into()));
                }
                minkowski_cylinder(F::of(rho))
            }
            "shell" => {
                let (m, r0) = (get("M", 1.0), get("r0", 4.0));
                if r0 <= 2.0 * m {
                    return Err(Error::Validation(
                        "shell radius must sit outside the horizon (r0 > 2M)".into(),
                    ));
                }
                schwarzschild_shell(F::of(m), F::of(r0))
            }
            _ => unreachable!(),
        })
    }
}
