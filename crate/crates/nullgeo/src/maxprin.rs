//! Maximum-principle harnesses for null hypersurfaces: hypothesis
//! checking for touching pairs of graphs, support-family probes
//! (focusing lower bounds and below-boundedness of the second
//! fundamental forms), and totally-geodesic verification for model null
//! hypersurfaces.

use crate::congruence::{riccati_evolve, support_cone_at};
use crate::error::{Error, Result};
use crate::geodesic::build_screen_frame;
use crate::graphop::{theta_of_graph, GraphGrid, SlabChart};
use crate::linalg::{bilinear, Mat};
use crate::ode::StepControl;
use crate::real::Real;
use crate::spacetime::{catalog as metrics, MetricModel};

/// Default expansion tolerance for analytically evaluated graphs.
pub fn analytic_theta_tol<F: Real>() -> F {
    F::of(1e-6)
}

/// Expansion tolerance for grid-evaluated graphs: 10 h^2 with the
/// coarsest spacing of the lattice.
pub fn discrete_theta_tol<F: Real>(grid: &GraphGrid<F>) -> F {
    let h = grid.h.iter().copied().fold(F::zero(), F::max);
    F::of(10.0) * h * h
}

/// A pair of ordered graphs over the same slab, candidate for the
/// maximum principle: `lower` with theta >= 0 and `upper` with
/// theta <= 0, touching from below.
pub struct TouchingPair<'a, F> {
    pub slab: &'a SlabChart<F>,
    pub lower: &'a GraphGrid<F>,
    pub upper: &'a GraphGrid<F>,
}

#[derive(Clone, Debug)]
pub struct TouchReport<F> {
    /// min over nodes of upper - lower.
    pub touch_gap: F,
    /// Interior nodes where the graphs touch (within the gap tolerance).
    pub touch_nodes: Vec<usize>,
    /// min over interior nodes of theta(lower).
    pub theta_lower_min: F,
    /// max over interior nodes of theta(upper).
    pub theta_upper_max: F,
    pub theta_tol: F,
    /// Human-readable hypothesis violations; empty when all hold.
    pub violations: Vec<String>,
    pub hypotheses_met: bool,
}

/// Check the maximum-principle hypotheses for a touching pair.
pub fn check_touching_hypotheses<F: Real>(
    pair: &TouchingPair<'_, F>,
    theta_tol: F,
) -> Result<TouchReport<F>> {
    if !pair.lower.same_lattice(pair.upper) {
        return Err(Error::LatticeMismatch(
            "touching pair must share one lattice".into(),
        ));
    }
    let gap_tol = F::of(1e-10)
        * pair
            .upper
            .u
            .iter()
            .chain(&pair.lower.u)
            .map(|v| v.abs())
            .fold(F::one(), F::max);
    let mut touch_gap = F::infinity();
    let mut touch_nodes = Vec::new();
    for idx in 0..pair.lower.len() {
        let gap = pair.upper.u[idx] - pair.lower.u[idx];
        touch_gap = touch_gap.min(gap);
        if gap.abs() <= gap_tol && pair.lower.is_interior(idx) {
            touch_nodes.push(idx);
        }
    }
    let th_lower = theta_of_graph(pair.slab, pair.lower)?;
    let th_upper = theta_of_graph(pair.slab, pair.upper)?;
    let theta_lower_min = th_lower
        .values
        .iter()
        .flatten()
        .copied()
        .fold(F::infinity(), F::min);
    let theta_upper_max = th_upper
        .values
        .iter()
        .flatten()
        .copied()
        .fold(-F::infinity(), F::max);

    let mut violations = Vec::new();
    if touch_gap < -gap_tol {
        violations.push(format!(
            "ordering: upper graph dips {:e} below the lower graph",
            -touch_gap
        ));
    }
    if touch_nodes.is_empty() {
        violations.push(format!(
            "touching: smallest interior gap is {touch_gap:e}, the graphs never meet"
        ));
    }
    if theta_lower_min < -theta_tol {
        violations.push(format!(
            "lower expansion: min theta = {theta_lower_min:e} < -{theta_tol:e}"
        ));
    }
    if theta_upper_max > theta_tol {
        violations.push(format!(
            "upper expansion: max theta = {theta_upper_max:e} > {theta_tol:e}"
        ));
    }
    let hypotheses_met = violations.is_empty();
    Ok(TouchReport {
        touch_gap,
        touch_nodes,
        theta_lower_min,
        theta_upper_max,
        theta_tol,
        violations,
        hypotheses_met,
    })
}

#[derive(Clone, Debug)]
pub struct CoincidenceReport<F> {
    pub max_gap: F,
    pub coincide: bool,
}

/// Conclusion check: graphs satisfying the hypotheses must agree.
pub fn coincidence_check<F: Real>(
    lower: &GraphGrid<F>,
    upper: &GraphGrid<F>,
    tol: F,
) -> Result<CoincidenceReport<F>> {
    if !lower.same_lattice(upper) {
        return Err(Error::LatticeMismatch("pair must share one lattice".into()));
    }
    let max_gap = lower
        .u
        .iter()
        .zip(&upper.u)
        .map(|(a, b)| (*a - *b).abs())
        .fold(F::zero(), F::max);
    Ok(CoincidenceReport { max_gap, coincide: max_gap <= tol })
}

/// Per-radius data of a support-cone family at one point.
#[derive(Clone, Debug)]
pub struct SupportFamilyReport<F> {
    pub radii: Vec<F>,
    pub theta: Vec<F>,
    /// eps(r) = (n-2)/r; theta_r >= -eps(r) under the energy condition.
    pub eps: Vec<F>,
    pub focusing_ok: bool,
    /// Lower bound for the Hessian of a graph representation of the
    /// r-cone: lambda_min(b_r) minus the largest slab bending eigenvalue.
    pub hessian_min_eig: Vec<F>,
    /// Largest lower bound valid for every radius in the family.
    pub uniform_lower: F,
    /// Whether the bounds are monotone in r (so the smallest radius
    /// bounds the entire family from below).
    pub lower_bounded: bool,
}

/// Probe the support-cone family at an ambient point: expansions,
/// focusing margins and Hessian lower bounds for each radius.
/// `beta_screen_max` is the largest eigenvalue of the bending form of
/// the reference hypersurface carrying the graphs (zero for an ambient
/// probe with no slab).
pub fn probe_at<F: Real>(
    model: &MetricModel<F>,
    coords: &[F],
    k: &[F],
    beta_screen_max: F,
    radii: &[F],
    ctrl: &StepControl<F>,
) -> Result<SupportFamilyReport<F>> {
    let p = model.point(coords);
    let kv = model.tangent(coords, k);
    let reports = support_cone_at(model, &p, &kv, radii, ctrl)?;
    let nm2 = F::from_usize(model.n - 2).unwrap();
    let tol = F::of(1e-7);
    let mut radii_out = Vec::new();
    let mut theta = Vec::new();
    let mut eps = Vec::new();
    let mut hessian_min_eig = Vec::new();
    let mut focusing_ok = true;
    for rep in &reports {
        radii_out.push(rep.r);
        theta.push(rep.theta);
        let e = nm2 / rep.r;
        if rep.theta < -e - tol {
            focusing_ok = false;
        }
        eps.push(e);
        let lam_min = rep.b.symmetrize().sym_eigenvalues()[0];
        hessian_min_eig.push(lam_min - beta_screen_max);
    }
    let uniform_lower = hessian_min_eig.iter().copied().fold(F::infinity(), F::min);
    let lower_bounded = hessian_min_eig.windows(2).all(|w| w[1] >= w[0] - tol);
    Ok(SupportFamilyReport {
        radii: radii_out,
        theta,
        eps,
        focusing_ok,
        hessian_min_eig,
        uniform_lower,
        lower_bounded,
    })
}

/// Support-family probe at a slab point carrying a graph with the given
/// gradient: embeds the point, forms the outgoing null direction
/// K = Z + N and probes the ambient support cones, discounting the slab
/// bending in the Hessian bound.
pub fn support_family_probe<F: Real>(
    slab: &SlabChart<F>,
    t: F,
    x: &[F],
    grad: &[F],
    radii: &[F],
    ctrl: &StepControl<F>,
) -> Result<SupportFamilyReport<F>> {
    let link = slab
        .ambient
        .as_ref()
        .ok_or_else(|| Error::Validation(format!("slab `{}` has no ambient link", slab.name)))?;
    let model = &link.model;
    let n = model.n;
    let d = slab.d;
    let here = (link.embed)(t, x);

    // Tangent basis of the slab by central differences of the embedding.
    let step = F::of(1e-5);
    let basis = |a: usize| -> Vec<F> {
        let mut tp = t;
        let mut tm = t;
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        if a == 0 {
            tp = tp + step;
            tm = tm - step;
        } else {
            xp[a - 1] = xp[a - 1] + step;
            xm[a - 1] = xm[a - 1] - step;
        }
        let ep = (link.embed)(tp, &xp);
        let em = (link.embed)(tm, &xm);
        (0..n).map(|m| (ep[m] - em[m]) / (F::of(2.0) * step)).collect()
    };
    let nu = crate::graphop::nu_of(slab, t, x, grad)?;
    let h = slab.spatial_metric(t, x);
    let (hinv, _) = h.inverse()?;
    let up: Vec<F> = (0..d)
        .map(|i| (0..d).map(|j| hinv[(i, j)] * grad[j]).sum())
        .collect();
    // Z = nu (E_0 + u^i E_i), K = Z + N.
    let e0 = basis(0);
    let mut k: Vec<F> = (0..n).map(|m| nu * e0[m]).collect();
    for i in 0..d {
        let ei = basis(1 + i);
        for m in 0..n {
            k[m] = k[m] + nu * up[i] * ei[m];
        }
    }
    let nrm = (link.normal)(t, x);
    for m in 0..n {
        k[m] = k[m] + nrm[m];
    }

    // Largest bending eigenvalue of the slab (spatial block, w.r.t. h).
    let beta = slab.second_fundamental_form(t, x);
    let beta_sp = Mat::from_fn(d, d, |i, j| beta[(1 + i, 1 + j)]);
    let (hvals, hvecs) = h.sym_eigen();
    let hinv_sqrt = Mat::from_fn(d, d, |i, j| {
        let mut acc = F::zero();
        for kk in 0..d {
            acc = acc + hvecs[(i, kk)] * hvecs[(j, kk)] / hvals[kk].sqrt();
        }
        acc
    });
    let beta_screen_max = *hinv_sqrt
        .matmul(&beta_sp)
        .matmul(&hinv_sqrt)
        .sym_eigenvalues()
        .last()
        .unwrap();

    probe_at(model, &here, &k, beta_screen_max, radii, ctrl)
}

/// A model null hypersurface with a closed-form null generator field,
/// used for totally-geodesic verification.
pub struct NullHypersurface<F> {
    pub name: String,
    pub model: MetricModel<F>,
    sample_points: Vec<Vec<F>>,
    k_field: Box<dyn Fn(&[F]) -> Vec<F> + Send + Sync>,
}

impl<F: Real> NullHypersurface<F> {
    pub fn sample_points(&self) -> &[Vec<F>] {
        &self.sample_points
    }
    pub fn generator_at(&self, coords: &[F]) -> Vec<F> {
        (self.k_field)(coords)
    }
}

/// Catalog lookup: `minkowski_null_hyperplane`,
/// `schwarzschild_horizon{M=..}` or `desitter_horizon{H=..}`.
pub fn null_hypersurface<F: Real>(spec: &str) -> Result<NullHypersurface<F>> {
    let spec = spec.trim();
    let (name, args) = match spec.find('{') {
        Some(i) if spec.ends_with('}') => (&spec[..i], &spec[i + 1..spec.len() - 1]),
        Some(_) => return Err(Error::Validation(format!("malformed hypersurface spec `{spec}`"))),
        None => (spec, ""),
    };
    let mut params = std::collections::BTreeMap::new();
    for pair in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Validation(format!("bad hypersurface parameter `{pair}`")))?;
        let val: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Validation(format!("non-numeric parameter `{pair}`")))?;
        params.insert(k.trim().to_string(), val);
    }
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    match name {
        "minkowski_null_hyperplane" => {
            let mut pts = Vec::new();
            for s in [-1.0, 0.0, 0.8] {
                for y in [-0.5, 0.7] {
                    pts.push(vec![F::of(s), F::of(s), F::of(y), F::of(0.3 * s + 0.1)]);
                }
            }
            Ok(NullHypersurface {
                name: name.into(),
                model: metrics::minkowski(4),
                sample_points: pts,
                k_field: Box::new(|_c: &[F]| {
                    vec![F::one(), F::one(), F::zero(), F::zero()]
                }),
            })
        }
        "schwarzschild_horizon" => {
            let m = get("M", 1.0);
            let r = F::of(2.0 * m);
            let mut pts = Vec::new();
            for v in [0.0, 2.0] {
                for th in [0.9, 1.5, 2.1] {
                    pts.push(vec![F::of(v), r, F::of(th), F::of(0.4)]);
                }
            }
            Ok(NullHypersurface {
                name: format!("schwarzschild_horizon(M={m})"),
                model: metrics::schwarzschild_ef(F::of(m)),
                sample_points: pts,
                k_field: Box::new(|_c: &[F]| {
                    vec![F::one(), F::zero(), F::zero(), F::zero()]
                }),
            })
        }
        "desitter_horizon" => {
            let hh = get("H", 1.0);
            let hf = F::of(hh);
            let mut pts = Vec::new();
            for t in [0.0, 0.4] {
                for (cx, cy) in [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8)] {
                    let rad = (-hf * F::of(t)).exp() / hf;
                    pts.push(vec![F::of(t), rad * F::of(cx), rad * F::of(cy), F::zero()]);
                }
            }
            Ok(NullHypersurface {
                name: format!("desitter_horizon(H={hh})"),
                model: metrics::de_sitter(hf, 4),
                sample_points: pts,
                k_field: Box::new(move |c: &[F]| {
                    let norm =
                        (c[1] * c[1] + c[2] * c[2] + c[3] * c[3]).sqrt();
                    let scale = (-hf * c[0]).exp() / norm;
                    vec![F::one(), -scale * c[1], -scale * c[2], -scale * c[3]]
                }),
            })
        }
        _ => Err(Error::UnknownHypersurface(name.to_string())),
    }
}

/// Measure the Weingarten map of the hypersurface at a point directly
/// from the generator field: b_ij = g(nabla_{e_i} K, e_j) in the screen
/// basis adapted to K.
pub fn measure_weingarten<F: Real>(
    surface: &NullHypersurface<F>,
    coords: &[F],
) -> Result<Mat<F>> {
    let model = &surface.model;
    let n = model.n;
    let k = surface.generator_at(coords);
    let p = model.point(coords);
    let frame = build_screen_frame(model, &p, &k)?;
    let g = model.metric_components(coords)?;
    let gamma = model.christoffel_components(coords)?;
    let pdim = n - 2;
    // dk[nu][mu] = partial_nu K^mu by central differences of the field.
    let mut dk = vec![vec![F::zero(); n]; n];
    for nu in 0..n {
        let hstep = F::of(1e-5) * coords[nu].abs().max(F::one());
        let mut cp = coords.to_vec();
        cp[nu] = cp[nu] + hstep;
        let kp = surface.generator_at(&cp);
        cp[nu] = coords[nu] - hstep;
        let km = surface.generator_at(&cp);
        for mu in 0..n {
            dk[nu][mu] = (kp[mu] - km[mu]) / (F::of(2.0) * hstep);
        }
    }
    Ok(Mat::from_fn(pdim, pdim, |i, j| {
        let mut cov = vec![F::zero(); n];
        for mu in 0..n {
            let mut acc = F::zero();
            for nu in 0..n {
                acc = acc + frame.e[i][nu] * dk[nu][mu];
                for r in 0..n {
                    acc = acc + gamma[mu][(nu, r)] * frame.e[i][nu] * k[r];
                }
            }
            cov[mu] = acc;
        }
        bilinear(&g, &cov, &frame.e[j])
    }))
}

#[derive(Clone, Debug)]
pub struct TotallyGeodesicReport<F> {
    pub name: String,
    /// Worst |b| over the sample points, measured from the generator field.
    pub max_direct: F,
    /// Worst |b| along a generator under the Riccati flow seeded with the
    /// measured value.
    pub max_riccati: F,
    pub totally_geodesic: bool,
}

/// Verify that a catalog hypersurface is totally geodesic (b = 0) by two
/// independent routes: pointwise measurement of the generator field and
/// the Riccati flow along a generator.
pub fn verify_totally_geodesic<F: Real>(
    surface: &NullHypersurface<F>,
    flow_span: F,
    ctrl: &StepControl<F>,
) -> Result<TotallyGeodesicReport<F>> {
    let mut max_direct = F::zero();
    for coords in surface.sample_points() {
        let b = measure_weingarten(surface, coords)?;
        max_direct = max_direct.max(b.max_abs());
    }
    let start = &surface.sample_points()[0];
    let model = &surface.model;
    let p = model.point(start);
    let k = model.tangent(start, &surface.generator_at(start));
    let b0 = measure_weingarten(surface, start)?;
    let nodes: Vec<F> = (1..=4)
        .map(|i| flow_span * F::from_usize(i).unwrap() / F::of(4.0))
        .collect();
    let flow = riccati_evolve(model, &p, &k, &b0, flow_span, &nodes, ctrl)?;
    let mut max_riccati = F::zero();
    for s in &flow {
        max_riccati = max_riccati.max(s.b.max_abs());
    }
    let tol = F::of(1e-6);
    Ok(TotallyGeodesicReport {
        name: surface.name.clone(),
        max_direct,
        max_riccati,
        totally_geodesic: max_direct < tol && max_riccati < tol,
    })
}
