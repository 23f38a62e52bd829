//! Metric catalog and pointwise curvature evaluation.
//!
//! A [`MetricModel`] bundles a coordinate chart, an analytic metric
//! component evaluator, optional analytic Christoffel symbols and the
//! chart's validity domain.  Curvature is assembled from the Christoffel
//! symbols by central differences.

use crate::error::{Error, Result};
use crate::linalg::{bilinear, euclidean_norm_sq, Mat};
use crate::real::Real;

/// Tolerance for causal classification, relative to the coordinate
/// Euclidean norm of the vector (the fixed background Riemannian metric
/// is chosen as the chart's Euclidean metric).
pub fn null_tolerance<F: Real>() -> F {
    F::of(1e-9)
}

/// Curvature identity tolerance for finite-difference paths.
pub const CURVATURE_TOL_FD: f64 = 1e-6;
/// Curvature identity tolerance when analytic Christoffels are available.
pub const CURVATURE_TOL_ANALYTIC: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimePoint<F> {
    pub chart: String,
    pub coords: Vec<F>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector<F> {
    pub base: SpacetimePoint<F>,
    pub components: Vec<F>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CausalClass {
    Timelike,
    Null,
    Spacelike,
}

/// Riemann tensor components R^mu_{nu rho sigma} at a point, flat storage.
#[derive(Clone, Debug)]
pub struct Riemann<F> {
    pub n: usize,
    data: Vec<F>,
}

impl<F: Real> Riemann<F> {
    fn zeros(n: usize) -> Self {
        Riemann { n, data: vec![F::zero(); n * n * n * n] }
    }
    #[inline]
    pub fn get(&self, m: usize, nu: usize, r: usize, s: usize) -> F {
        self.data[((m * self.n + nu) * self.n + r) * self.n + s]
    }
    #[inline]
    fn set(&mut self, m: usize, nu: usize, r: usize, s: usize, v: F) {
        self.data[((m * self.n + nu) * self.n + r) * self.n + s] = v;
    }
}

/// Curvature data at a point: R^mu_{nu rho sigma}, the fully lowered
/// R_{mu nu rho sigma} and the Ricci tensor R_{nu sigma} = R^mu_{nu mu sigma}.
#[derive(Clone, Debug)]
pub struct CurvatureSample<F> {
    pub point: SpacetimePoint<F>,
    pub riemann: Riemann<F>,
    pub riemann_low: Riemann<F>,
    pub ricci: Mat<F>,
}

impl<F: Real> CurvatureSample<F> {
    /// Worst violation of the algebraic Riemann symmetries and the first
    /// Bianchi identity, for diagnostics.
    pub fn symmetry_violation(&self) -> F {
        let n = self.riemann_low.n;
        let rl = &self.riemann_low;
        let mut worst = F::zero();
        for m in 0..n {
            for nu in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = rl.get(m, nu, r, s);
                        worst = worst.max((v + rl.get(nu, m, r, s)).abs());
                        worst = worst.max((v + rl.get(m, nu, s, r)).abs());
                        worst = worst.max((v - rl.get(r, s, m, nu)).abs());
                        let bianchi =
                            v + rl.get(m, r, s, nu) + rl.get(m, s, nu, r);
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst.max(self.ricci.asymmetry())
    }
}

type MetricFn<F> = Box<dyn Fn(&[F]) -> Mat<F> + Send + Sync>;
type ChristoffelFn<F> = Box<dyn Fn(&[F]) -> Vec<Mat<F>> + Send + Sync>;

/// Open interval bounds for one coordinate; `None` means unbounded.
#[derive(Clone, Copy, Debug)]
pub struct CoordBound<F> {
    pub lower: Option<F>,
    pub upper: Option<F>,
}

impl<F> CoordBound<F> {
    pub fn unbounded() -> Self {
        CoordBound { lower: None, upper: None }
    }
    pub fn above(lo: F) -> Self {
        CoordBound { lower: Some(lo), upper: None }
    }
    pub fn open(lo: F, hi: F) -> Self {
        CoordBound { lower: Some(lo), upper: Some(hi) }
    }
}

pub struct MetricModel<F> {
    pub name: String,
    pub chart: String,
    pub n: usize,
    pub params: Vec<(String, F)>,
    metric: MetricFn<F>,
    analytic_christoffel: Option<ChristoffelFn<F>>,
    pub domain: Vec<CoordBound<F>>,
}

impl<F: Real> MetricModel<F> {
    pub fn new(
        name: impl Into<String>,
        chart: impl Into<String>,
        n: usize,
        params: Vec<(String, F)>,
        metric: MetricFn<F>,
        analytic_christoffel: Option<ChristoffelFn<F>>,
        domain: Vec<CoordBound<F>>,
    ) -> Self {
        assert!(n >= 3, "spacetime dimension must be at least 3");
        assert_eq!(domain.len(), n);
        MetricModel { name: name.into(), chart: chart.into(), n, params, metric, analytic_christoffel, domain }
    }

    /// Generic component-function interface: metric given as a closure,
    /// Christoffels obtained by finite differences.
    pub fn from_components(
        name: impl Into<String>,
        chart: impl Into<String>,
        n: usize,
        metric: MetricFn<F>,
        domain: Vec<CoordBound<F>>,
    ) -> Self {
        Self::new(name, chart, n, Vec::new(), metric, None, domain)
    }

    pub fn has_analytic_christoffel(&self) -> bool {
        self.analytic_christoffel.is_some()
    }

    pub fn point(&self, coords: &[F]) -> SpacetimePoint<F> {
        assert_eq!(coords.len(), self.n);
        SpacetimePoint { chart: self.chart.clone(), coords: coords.to_vec() }
    }

    pub fn tangent(&self, coords: &[F], components: &[F]) -> TangentVector<F> {
        assert_eq!(components.len(), self.n);
        TangentVector { base: self.point(coords), components: components.to_vec() }
    }

    fn check_chart(&self, p: &SpacetimePoint<F>) -> Result<()> {
        if p.chart != self.chart {
            return Err(Error::ChartMismatch { expected: self.chart.clone(), got: p.chart.clone() });
        }
        Ok(())
    }

    /// Finite-difference step per axis.
    fn fd_step(&self, x: F) -> F {
        F::of(1e-5) * x.abs().max(F::one())
    }

    /// True when `coords` lie inside the chart domain, leaving `margin`
    /// finite-difference stencil radii to every bound.
    pub fn coords_in_domain(&self, coords: &[F], stencil_radius: usize) -> bool {
        for (i, b) in self.domain.iter().enumerate() {
            let m = F::from_usize(stencil_radius).unwrap() * self.fd_step(coords[i]);
            if let Some(lo) = b.lower {
                if coords[i] - m <= lo {
                    return false;
                }
            }
            if let Some(hi) = b.upper {
                if coords[i] + m >= hi {
                    return false;
                }
            }
        }
        true
    }

    fn require_domain(&self, coords: &[F], stencil_radius: usize) -> Result<()> {
        if !self.coords_in_domain(coords, stencil_radius) {
            return Err(Error::Domain(format!(
                "{:?} not inside `{}` domain with stencil radius {stencil_radius}",
                coords.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>(),
                self.chart
            )));
        }
        Ok(())
    }

    /// Metric components g_{mu nu} at a point.
    pub fn metric_at(&self, p: &SpacetimePoint<F>) -> Result<Mat<F>> {
        self.check_chart(p)?;
        self.require_domain(&p.coords, 0)?;
        Ok((self.metric)(&p.coords))
    }

    /// Metric components straight from coordinates (used by the
    /// integrators, which work on raw state vectors).
    pub fn metric_components(&self, coords: &[F]) -> Result<Mat<F>> {
        self.require_domain(coords, 0)?;
        Ok((self.metric)(coords))
    }

    /// Christoffel symbols Gamma^mu_{nu rho}; `result[mu][(nu, rho)]`.
    pub fn christoffel_at(&self, p: &SpacetimePoint<F>) -> Result<Vec<Mat<F>>> {
        self.check_chart(p)?;
        self.christoffel_components(&p.coords)
    }

    pub fn christoffel_components(&self, coords: &[F]) -> Result<Vec<Mat<F>>> {
        if let Some(gamma) = &self.analytic_christoffel {
            self.require_domain(coords, 0)?;
            return Ok(gamma(coords));
        }
        self.require_domain(coords, 1)?;
        self.christoffel_fd(coords)
    }

    /// Central-difference Christoffels from the metric evaluator.
    pub fn christoffel_fd(&self, coords: &[F]) -> Result<Vec<Mat<F>>> {
        let n = self.n;
        self.require_domain(coords, 1)?;
        let g = (self.metric)(coords);
        let (ginv, _) = g.inverse()?;
        // dg[k] = d g_{ij} / d x^k
        let mut dg: Vec<Mat<F>> = Vec::with_capacity(n);
        let mut xp = coords.to_vec();
        for k in 0..n {
            let h = self.fd_step(coords[k]);
            xp[k] = coords[k] + h;
            let gp = (self.metric)(&xp);
            xp[k] = coords[k] - h;
            let gm = (self.metric)(&xp);
            xp[k] = coords[k];
            dg.push(gp.sub(&gm).scale(F::one() / (F::of(2.0) * h)));
        }
        let mut out = Vec::with_capacity(n);
        for m in 0..n {
            out.push(Mat::from_fn(n, n, |nu, rho| {
                let mut acc = F::zero();
                for s in 0..n {
                    acc = acc
                        + ginv[(m, s)]
                            * (dg[nu][(s, rho)] + dg[rho][(s, nu)] - dg[s][(nu, rho)]);
                }
                acc.half()
            }));
        }
        Ok(out)
    }

    /// Riemann and Ricci curvature at a point, assembled from the
    /// Christoffel symbols and their central differences.
    pub fn curvature_at(&self, p: &SpacetimePoint<F>) -> Result<CurvatureSample<F>> {
        self.check_chart(p)?;
        self.curvature_components(&p.coords).map(|(riemann, riemann_low, ricci)| CurvatureSample {
            point: p.clone(),
            riemann,
            riemann_low,
            ricci,
        })
    }

    pub fn curvature_components(&self, coords: &[F]) -> Result<(Riemann<F>, Riemann<F>, Mat<F>)> {
        let n = self.n;
        let extra = if self.analytic_christoffel.is_some() { 1 } else { 2 };
        self.require_domain(coords, extra)?;
        let gamma = self.christoffel_components(coords)?;
        // dGamma[k][mu][(nu, rho)]
        let mut dgamma: Vec<Vec<Mat<F>>> = Vec::with_capacity(n);
        let mut xp = coords.to_vec();
        for k in 0..n {
            let h = self.fd_step(coords[k]);
            xp[k] = coords[k] + h;
            let gp = self.christoffel_components(&xp)?;
            xp[k] = coords[k] - h;
            let gm = self.christoffel_components(&xp)?;
            xp[k] = coords[k];
            let inv2h = F::one() / (F::of(2.0) * h);
            dgamma.push(
                gp.into_iter()
                    .zip(gm)
                    .map(|(a, b)| a.sub(&b).scale(inv2h))
                    .collect(),
            );
        }
        let mut riemann = Riemann::zeros(n);
        for m in 0..n {
            for nu in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let mut v = dgamma[r][m][(nu, s)] - dgamma[s][m][(nu, r)];
                        for l in 0..n {
                            v = v + gamma[m][(r, l)] * gamma[l][(nu, s)]
                                - gamma[m][(s, l)] * gamma[l][(nu, r)];
                        }
                        riemann.set(m, nu, r, s, v);
                    }
                }
            }
        }
        let g = (self.metric)(coords);
        let mut low = Riemann::zeros(n);
        for m in 0..n {
            for nu in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let mut v = F::zero();
                        for l in 0..n {
                            v = v + g[(m, l)] * riemann.get(l, nu, r, s);
                        }
                        low.set(m, nu, r, s, v);
                    }
                }
            }
        }
        let ricci = Mat::from_fn(n, n, |nu, s| {
            (0..n).map(|m| riemann.get(m, nu, m, s)).sum()
        });
        Ok((riemann, low, ricci))
    }

    /// Lorentzian inner product g(X, Y) of two tangent vectors at `p`.
    pub fn inner(&self, p: &SpacetimePoint<F>, x: &TangentVector<F>, y: &TangentVector<F>) -> Result<F> {
        if x.base != *p || y.base != *p {
            return Err(Error::BaseMismatch);
        }
        let g = self.metric_at(p)?;
        Ok(bilinear(&g, &x.components, &y.components))
    }

    /// Causal classification of a nonzero tangent vector.
    pub fn classify(&self, p: &SpacetimePoint<F>, x: &TangentVector<F>) -> Result<CausalClass> {
        let norm_sq = euclidean_norm_sq(&x.components);
        if norm_sq == F::zero() {
            return Err(Error::ZeroVector);
        }
        let q = self.inner(p, x, x)?;
        let thr = null_tolerance::<F>() * norm_sq;
        Ok(if q.abs() <= thr {
            CausalClass::Null
        } else if q < F::zero() {
            CausalClass::Timelike
        } else {
            CausalClass::Spacelike
        })
    }

    /// Ric(X, X) straight from coordinates; used by the Raychaudhuri flow.
    pub fn ricci_quadratic(&self, coords: &[F], x: &[F]) -> Result<F> {
        let (_, _, ricci) = self.curvature_components(coords)?;
        Ok(bilinear(&ricci, x, x))
    }
}

pub mod catalog {
    //! The fixed analytic spacetime catalog: Minkowski, Schwarzschild
    //! (exterior and ingoing Eddington-Finkelstein charts), de Sitter in
    //! the flat slicing, and a plane-wave metric in Brinkmann coordinates.

    use super::*;

    /// Minkowski space in global inertial coordinates (t, x^1, ..).
    pub fn minkowski<F: Real>(n: usize) -> MetricModel<F> {
        let metric: MetricFn<F> = Box::new(move |_x: &[F]| {
            Mat::from_fn(n, n, |i, j| {
                if i != j {
                    F::zero()
                } else if i == 0 {
                    -F::one()
                } else {
                    F::one()
                }
            })
        });
        let gamma: ChristoffelFn<F> =
            Box::new(move |_x: &[F]| (0..n).map(|_| Mat::zeros(n, n)).collect());
        MetricModel::new(
            format!("minkowski{n}"),
            "minkowski",
            n,
            vec![],
            metric,
            Some(gamma),
            vec![CoordBound::unbounded(); n],
        )
    }

    /// Schwarzschild exterior in (t, r, theta, phi), r > 2M.
    pub fn schwarzschild_exterior<F: Real>(mass: F) -> MetricModel<F> {
        let m = mass;
        let metric: MetricFn<F> = Box::new(move |x: &[F]| {
            let (r, th) = (x[1], x[2]);
            let f = F::one() - F::of(2.0) * m / r;
            let mut g = Mat::zeros(4, 4);
            g[(0, 0)] = -f;
            g[(1, 1)] = F::one() / f;
            g[(2, 2)] = r * r;
            g[(3, 3)] = r * r * th.sin() * th.sin();
            g
        });
        let gamma: ChristoffelFn<F> = Box::new(move |x: &[F]| {
            let (r, th) = (x[1], x[2]);
            let f = F::one() - F::of(2.0) * m / r;
            let (sin, cos) = (th.sin(), th.cos());
            let mut g: Vec<Mat<F>> = (0..4).map(|_| Mat::zeros(4, 4)).collect();
            let m_over_r2 = m / (r * r);
            // t
            g[0][(0, 1)] = m_over_r2 / f;
            g[0][(1, 0)] = g[0][(0, 1)];
            // r
            g[1][(0, 0)] = m_over_r2 * f;
            g[1][(1, 1)] = -m_over_r2 / f;
            g[1][(2, 2)] = -(r - F::of(2.0) * m);
            g[1][(3, 3)] = -(r - F::of(2.0) * m) * sin * sin;
            // theta
            g[2][(1, 2)] = F::one() / r;
            g[2][(2, 1)] = g[2][(1, 2)];
            g[2][(3, 3)] = -sin * cos;
            // phi
            g[3][(1, 3)] = F::one() / r;
            g[3][(3, 1)] = g[3][(1, 3)];
            g[3][(2, 3)] = cos / sin;
            g[3][(3, 2)] = g[3][(2, 3)];
            g
        });
        MetricModel::new(
            "schwarzschild",
            "schwarzschild_exterior",
            4,
            vec![("M".into(), m)],
            metric,
            Some(gamma),
            vec![
                CoordBound::unbounded(),
                CoordBound::above(F::of(2.0) * m),
                CoordBound::open(F::zero(), F::of(std::f64::consts::PI)),
                CoordBound::unbounded(),
            ],
        )
    }

    /// Schwarzschild in ingoing Eddington-Finkelstein coordinates
    /// (v, r, theta, phi), r > 0; horizon-penetrating.
    pub fn schwarzschild_ef<F: Real>(mass: F) -> MetricModel<F> {
        let m = mass;
        let metric: MetricFn<F> = Box::new(move |x: &[F]| {
            let (r, th) = (x[1], x[2]);
            let f = F::one() - F::of(2.0) * m / r;
            let mut g = Mat::zeros(4, 4);
            g[(0, 0)] = -f;
            g[(0, 1)] = F::one();
            g[(1, 0)] = F::one();
            g[(2, 2)] = r * r;
            g[(3, 3)] = r * r * th.sin() * th.sin();
            g
        });
        let gamma: ChristoffelFn<F> = Box::new(move |x: &[F]| {
            let (r, th) = (x[1], x[2]);
            let (sin, cos) = (th.sin(), th.cos());
            let mut g: Vec<Mat<F>> = (0..4).map(|_| Mat::zeros(4, 4)).collect();
            let m_over_r2 = m / (r * r);
            // v
            g[0][(0, 0)] = m_over_r2;
            g[0][(2, 2)] = -r;
            g[0][(3, 3)] = -r * sin * sin;
            // r
            g[1][(0, 0)] = m_over_r2 * (F::one() - F::of(2.0) * m / r);
            g[1][(0, 1)] = -m_over_r2;
            g[1][(1, 0)] = -m_over_r2;
            g[1][(2, 2)] = -(r - F::of(2.0) * m);
            g[1][(3, 3)] = -(r - F::of(2.0) * m) * sin * sin;
            // theta
            g[2][(1, 2)] = F::one() / r;
            g[2][(2, 1)] = g[2][(1, 2)];
            g[2][(3, 3)] = -sin * cos;
            // phi
            g[3][(1, 3)] = F::one() / r;
            g[3][(3, 1)] = g[3][(1, 3)];
            g[3][(2, 3)] = cos / sin;
            g[3][(3, 2)] = g[3][(2, 3)];
            g
        });
        MetricModel::new(
            "schwarzschild_ef",
            "schwarzschild_ef",
            4,
            vec![("M".into(), m)],
            metric,
            Some(gamma),
            vec![
                CoordBound::unbounded(),
                CoordBound::above(F::zero()),
                CoordBound::open(F::zero(), F::of(std::f64::consts::PI)),
                CoordBound::unbounded(),
            ],
        )
    }

    /// de Sitter space in the flat slicing, ds^2 = -dt^2 + e^{2Ht} dx^2.
    pub fn de_sitter<F: Real>(hubble: F, n: usize) -> MetricModel<F> {
        let hh = hubble;
        let metric: MetricFn<F> = Box::new(move |x: &[F]| {
            let a2 = (F::of(2.0) * hh * x[0]).exp();
            Mat::from_fn(n, n, |i, j| {
                if i != j {
                    F::zero()
                } else if i == 0 {
                    -F::one()
                } else {
                    a2
                }
            })
        });
        let gamma: ChristoffelFn<F> = Box::new(move |x: &[F]| {
            let a2 = (F::of(2.0) * hh * x[0]).exp();
            let mut g: Vec<Mat<F>> = (0..n).map(|_| Mat::zeros(n, n)).collect();
            for i in 1..n {
                g[0][(i, i)] = hh * a2;
                g[i][(0, i)] = hh;
                g[i][(i, 0)] = hh;
            }
            g
        });
        MetricModel::new(
            format!("desitter{n}"),
            "desitter_flat",
            n,
            vec![("H".into(), hh)],
            metric,
            Some(gamma),
            vec![CoordBound::unbounded(); n],
        )
    }

    /// Plane wave in Brinkmann coordinates (u, v, x, y) with profile
    /// H(u, x, y) = -k^2 (x^2 + y^2); satisfies the null energy condition
    /// (Ric(du, du) = 2k^2 >= 0) and focuses transverse Jacobi fields with
    /// angular frequency k.
    pub fn pp_wave<F: Real>(k: F) -> MetricModel<F> {
        let metric: MetricFn<F> = Box::new(move |x: &[F]| {
            let prof = -k * k * (x[2] * x[2] + x[3] * x[3]);
            let mut g = Mat::zeros(4, 4);
            g[(0, 0)] = prof;
            g[(0, 1)] = F::one();
            g[(1, 0)] = F::one();
            g[(2, 2)] = F::one();
            g[(3, 3)] = F::one();
            g
        });
        let gamma: ChristoffelFn<F> = Box::new(move |x: &[F]| {
            let k2 = k * k;
            let mut g: Vec<Mat<F>> = (0..4).map(|_| Mat::zeros(4, 4)).collect();
            g[1][(0, 2)] = -k2 * x[2];
            g[1][(2, 0)] = g[1][(0, 2)];
            g[1][(0, 3)] = -k2 * x[3];
            g[1][(3, 0)] = g[1][(0, 3)];
            g[2][(0, 0)] = k2 * x[2];
            g[3][(0, 0)] = k2 * x[3];
            g
        });
        MetricModel::new(
            "ppwave",
            "brinkmann",
            4,
            vec![("k".into(), k)],
            metric,
            Some(gamma),
            vec![CoordBound::unbounded(); 4],
        )
    }

    /// Parse a metric spec string such as `schwarzschild{M=1}` or
    /// `minkowski{n=4}` into a catalog model.
    pub fn from_spec<F: Real>(spec: &str) -> Result<MetricModel<F>> {
        let spec = spec.trim();
        let (name, args) = match spec.find('{') {
            Some(i) => {
                if !spec.ends_with('}') {
                    return Err(Error::Validation(format!("malformed metric spec `{spec}`")));
                }
                (&spec[..i], &spec[i + 1..spec.len() - 1])
            }
            None => (spec, ""),
        };
        let mut params = std::collections::BTreeMap::new();
        for pair in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Validation(format!("bad metric parameter `{pair}`")))?;
            let val: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("non-numeric metric parameter `{pair}`")))?;
            params.insert(k.trim().to_string(), val);
        }
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let known: &[&str] = match name {
            "minkowski" => &["n"],
            "schwarzschild" | "schwarzschild_ef" => &["M"],
            "desitter" => &["H", "n"],
            "ppwave" => &["k"],
            _ => {
                return Err(Error::Validation(format!(
                    "unknown metric `{name}` (valid: minkowski, schwarzschild, schwarzschild_ef, desitter, ppwave)"
                )))
            }
        };
        for key in params.keys() {
            if !known.contains(&key.as_str()) {
                return Err(Error::Validation(format!(
                    "metric `{name}` does not take parameter `{key}`"
                )));
            }
        }
        Ok(match name {
            "minkowski" => minkowski(get("n", 4.0) as usize),
            "schwarzschild" => schwarzschild_exterior(F::of(get("M", 1.0))),
            "schwarzschild_ef" => schwarzschild_ef(F::of(get("M", 1.0))),
            "desitter" => de_sitter(F::of(get("H", 1.0)), get("n", 4.0) as usize),
            "ppwave" => pp_wave(F::of(get("k", 1.0))),
            _ => unreachable!(),
        })
    }
}
