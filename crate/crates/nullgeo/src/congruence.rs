//! Weingarten (Riccati) and Raychaudhuri flows along null geodesics, cone
//! congruences through a vertex, and support-cone comparison data.

use crate::error::{Error, Result};
use crate::geodesic::{
    self, build_screen_frame, FlowInit, Sigma2Source,
};
use crate::linalg::Mat;
use crate::ode::StepControl;
use crate::real::Real;
use crate::spacetime::{MetricModel, SpacetimePoint, TangentVector};

/// Condition-number guard for inverting the Jacobi matrix near vertices
/// and conjugate points.
pub fn cond_guard<F: Real>() -> F {
    F::of(1e12)
}

/// One sample of a Weingarten flow.
#[derive(Clone, Debug)]
pub struct WeingartenSample<F> {
    pub s: F,
    pub coords: Vec<F>,
    /// Weingarten map in the transported screen basis.
    pub b: Mat<F>,
    /// Expansion theta = tr b.
    pub theta: F,
    /// Shear scalar sigma^2 = |sym(b) - (theta/(n-2)) I|^2.
    pub shear_sq: F,
}

fn shear_sq_of<F: Real>(b: &Mat<F>) -> F {
    let p = b.rows;
    let bs = b.symmetrize();
    let tr = bs.trace();
    let mut frob = F::zero();
    for i in 0..p {
        for j in 0..p {
            frob = frob + bs[(i, j)] * bs[(j, i)];
        }
    }
    frob - tr * tr / F::from_usize(p).unwrap()
}

/// Evolve the Riccati equation b' = -b^2 - R_scr along the null geodesic
/// seeded by (`p`, `v0`), in the parallel-transported screen basis built
/// at `p`.  Blow-up beyond the norm guard aborts with the last parameter.
pub fn riccati_evolve<F: Real>(
    model: &MetricModel<F>,
    p: &SpacetimePoint<F>,
    v0: &TangentVector<F>,
    b0: &Mat<F>,
    s_end: F,
    nodes: &[F],
    ctrl: &StepControl<F>,
) -> Result<Vec<WeingartenSample<F>>> {
    if v0.base != *p {
        return Err(Error::BaseMismatch);
    }
    let frame = build_screen_frame(model, p, &v0.components)?;
    let out = geodesic::integrate_flow(
        model,
        FlowInit {
            coords: p.coords.clone(),
            tangent: v0.components.clone(),
            transported: frame.e.clone(),
            jacobi: None,
            riccati: Some(b0.clone()),
            theta: None,
        },
        s_end,
        nodes,
        ctrl,
    )?;
    Ok(out
        .samples
        .into_iter()
        .map(|fs| {
            let b = fs.b.unwrap();
            let theta = b.trace();
            let shear_sq = shear_sq_of(&b);
            WeingartenSample { s: fs.s, coords: fs.coords, b, theta, shear_sq }
        })
        .collect())
}

#[derive(Clone, Copy, Debug)]
pub struct ThetaSample<F> {
    pub s: F,
    pub theta: F,
}

/// Evolve the Raychaudhuri equation
/// theta' = -Ric(eta', eta') - sigma^2 - theta^2/(n-2).
/// With [`Sigma2Source::FromRiccati`] a Weingarten map (seed `b0`) is
/// co-integrated in the same system and sources the shear scalar.
pub fn raychaudhuri_evolve<F: Real>(
    model: &MetricModel<F>,
    p: &SpacetimePoint<F>,
    v0: &TangentVector<F>,
    theta0: F,
    source: Sigma2Source,
    b0: Option<&Mat<F>>,
    s_end: F,
    nodes: &[F],
    ctrl: &StepControl<F>,
) -> Result<Vec<ThetaSample<F>>> {
    if v0.base != *p {
        return Err(Error::BaseMismatch);
    }
    if source == Sigma2Source::FromRiccati && b0.is_none() {
        return Err(Error::Validation(
            "shear from the Weingarten map requires a seed b0".into(),
        ));
    }
    let frame = build_screen_frame(model, p, &v0.components)?;
    let out = geodesic::integrate_flow(
        model,
        FlowInit {
            coords: p.coords.clone(),
            tangent: v0.components.clone(),
            transported: frame.e.clone(),
            jacobi: None,
            riccati: b0.cloned(),
            theta: Some((theta0, source)),
        },
        s_end,
        nodes,
        ctrl,
    )?;
    Ok(out
        .samples
        .into_iter()
        .map(|fs| ThetaSample { s: fs.s, theta: fs.theta.unwrap() })
        .collect())
}

/// One sample of a cone congruence, at affine distance `tau` from the
/// vertex.
#[derive(Clone, Debug)]
pub struct ConeSample<F> {
    pub tau: F,
    pub coords: Vec<F>,
    pub a: Mat<F>,
    pub b: Mat<F>,
    pub theta: F,
    pub det_a: F,
}

/// Congruence of the null cone through `vertex` along the generator with
/// tangent `k0`: Jacobi data A(0) = 0, A'(0) = I, Weingarten map
/// b(tau) = A'(tau) A(tau)^{-1} at the requested `taus` (all > 0).
pub fn cone_congruence<F: Real>(
    model: &MetricModel<F>,
    vertex: &SpacetimePoint<F>,
    k0: &TangentVector<F>,
    taus: &[F],
    ctrl: &StepControl<F>,
) -> Result<Vec<ConeSample<F>>> {
    if k0.base != *vertex {
        return Err(Error::BaseMismatch);
    }
    let pdim = model.n - 2;
    let frame = build_screen_frame(model, vertex, &k0.components)?;
    let s_end = taus
        .iter()
        .copied()
        .fold(F::zero(), F::max);
    if s_end <= F::zero() {
        return Err(Error::Validation("cone congruence needs a positive sample".into()));
    }
    let out = geodesic::integrate_flow(
        model,
        FlowInit {
            coords: vertex.coords.clone(),
            tangent: k0.components.clone(),
            transported: frame.e.clone(),
            jacobi: Some((Mat::zeros(pdim, pdim), Mat::identity(pdim))),
            riccati: None,
            theta: None,
        },
        s_end,
        taus,
        ctrl,
    )?;
    let mut samples = Vec::new();
    for fs in out.samples {
        if fs.s <= F::zero() {
            continue;
        }
        if !taus.iter().any(|&t| (t - fs.s).abs() <= F::of(1e-12) * t.abs().max(F::one())) {
            continue;
        }
        let a = fs.a.unwrap();
        let da = fs.da.unwrap();
        let (ainv, cond) = a.inverse()?;
        if cond > cond_guard::<F>() {
            return Err(Error::IllConditioned { cond: cond.to_f64().unwrap_or(f64::NAN) });
        }
        let b = da.matmul(&ainv);
        let theta = b.trace();
        samples.push(ConeSample { tau: fs.s, coords: fs.coords, det_a: a.det(), a, b, theta });
    }
    Ok(samples)
}

/// Support-cone data at `p`: for each radius r the past cone from the
/// point eta(r) on the generator through `p`, evaluated at `p` with
/// respect to the future tangent K.  All radii share the screen frame
/// built at `p`, so the Weingarten maps are directly comparable.
#[derive(Clone, Debug)]
pub struct SupportConeReport<F> {
    pub r: F,
    /// Null second fundamental form of the support cone at p w.r.t. K.
    pub b: Mat<F>,
    pub theta: F,
    /// theta + (n-2)/r; nonnegative under the null energy condition.
    pub focusing_margin: F,
}

pub fn support_cone_at<F: Real>(
    model: &MetricModel<F>,
    p: &SpacetimePoint<F>,
    k0: &TangentVector<F>,
    radii: &[F],
    ctrl: &StepControl<F>,
) -> Result<Vec<SupportConeReport<F>>> {
    if k0.base != *p {
        return Err(Error::BaseMismatch);
    }
    let n = model.n;
    let pdim = n - 2;
    let mut radii_sorted: Vec<F> = radii.to_vec();
    radii_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if radii_sorted.first().map_or(true, |&r| r <= F::zero()) {
        return Err(Error::Validation("support cone radii must be positive".into()));
    }
    let s_end = *radii_sorted.last().unwrap();
    let traj = geodesic::integrate_geodesic(model, p, k0, s_end, &radii_sorted, ctrl, true)?;
    let mut reports = Vec::new();
    for &r in &radii_sorted {
        let at = traj
            .samples
            .iter()
            .find(|s| (s.s - r).abs() <= F::of(1e-12) * r.max(F::one()))
            .ok_or_else(|| Error::StepFailure(format!("node {r} not sampled")))?;
        let frame = at.frame.as_ref().ok_or(Error::MissingFrame)?;
        // Reverse leg: from eta(r) back to p along -eta'(r), carrying the
        // same transported screen basis and vertex Jacobi data.
        let w: Vec<F> = at.tangent.iter().map(|&c| -c).collect();
        let out = geodesic::integrate_flow(
            model,
            FlowInit {
                coords: at.coords.clone(),
                tangent: w,
                transported: frame.e.clone(),
                jacobi: Some((Mat::zeros(pdim, pdim), Mat::identity(pdim))),
                riccati: None,
                theta: None,
            },
            r,
            &[r],
            ctrl,
        )?;
        let back = out
            .samples
            .iter()
            .find(|s| (s.s - r).abs() <= F::of(1e-12) * r.max(F::one()))
            .ok_or_else(|| Error::StepFailure("reverse leg endpoint missing".into()))?;
        let a = back.a.as_ref().unwrap();
        let da = back.da.as_ref().unwrap();
        let (ainv, cond) = a.inverse()?;
        if cond > cond_guard::<F>() {
            return Err(Error::IllConditioned { cond: cond.to_f64().unwrap_or(f64::NAN) });
        }
        // b w.r.t. the reverse tangent W = -K; flip sign for K.
        let b = da.matmul(&ainv).scale(-F::one());
        let theta = b.trace();
        let margin = theta + F::from_usize(n - 2).unwrap() / r;
        reports.push(SupportConeReport { r, b, theta, focusing_margin: margin });
    }
    Ok(reports)
}

/// Lowest focusing margin theta_{p,K,r} + (n-2)/r over the given radii.
pub fn focusing_margin<F: Real>(
    model: &MetricModel<F>,
    p: &SpacetimePoint<F>,
    k0: &TangentVector<F>,
    radii: &[F],
    ctrl: &StepControl<F>,
) -> Result<F> {
    let reports = support_cone_at(model, p, k0, radii, ctrl)?;
    Ok(reports
        .iter()
        .map(|r| r.focusing_margin)
        .fold(F::infinity(), F::min))
}

/// Scan the generator seeded by (`p`, `v0`) for the first conjugate point
/// (det A = 0 with vertex data A(0) = 0, A'(0) = I), excluding the vertex
/// itself.  Returns the bisected parameter, accurate to about 1e-9, or
/// `None` when det A keeps its sign on (0, s_end].
pub fn conjugate_point_scan<F: Real>(
    model: &MetricModel<F>,
    p: &SpacetimePoint<F>,
    v0: &TangentVector<F>,
    s_end: F,
    ctrl: &StepControl<F>,
) -> Result<Option<F>> {
    if v0.base != *p {
        return Err(Error::BaseMismatch);
    }
    let pdim = model.n - 2;
    let frame = build_screen_frame(model, p, &v0.components)?;
    let grid = 200usize;
    let nodes: Vec<F> = (1..=grid)
        .map(|i| s_end * F::from_usize(i).unwrap() / F::from_usize(grid).unwrap())
        .collect();
    let out = geodesic::integrate_flow(
        model,
        FlowInit {
            coords: p.coords.clone(),
            tangent: v0.components.clone(),
            transported: frame.e.clone(),
            jacobi: Some((Mat::zeros(pdim, pdim), Mat::identity(pdim))),
            riccati: None,
            theta: None,
        },
        s_end,
        &nodes,
        ctrl,
    )?;
    // g(s) = det A and g'(s) = tr(adj(A) A') at the grid nodes; the
    // vertex sample (det = 0 by construction) is skipped.  A conjugate
    // point is either a sign change of g (odd multiplicity) or a zero
    // local minimum of |g| (even multiplicity), where g' changes sign.
    let g_of = |a: &Mat<F>, da: &Mat<F>| -> (F, F) {
        (a.det(), a.adjugate().matmul(da).trace())
    };
    let node_g: Vec<(F, F, F)> = out
        .samples
        .iter()
        .skip(1)
        .map(|fs| {
            let (g, dg) = g_of(fs.a.as_ref().unwrap(), fs.da.as_ref().unwrap());
            (fs.s, g, dg)
        })
        .collect();
    let g_scale = node_g.iter().map(|&(_, g, _)| g.abs()).fold(F::zero(), F::max);
    // Refinement: re-integrate from the stored state at a grid node and
    // report (g, g') at the requested parameter.
    let eval_from = |idx: usize, s: F| -> Result<(F, F)> {
        let start = &out.samples[idx + 1];
        if s <= start.s {
            let (g, dg) = g_of(start.a.as_ref().unwrap(), start.da.as_ref().unwrap());
            return Ok((g, dg));
        }
        let run = geodesic::integrate_flow(
            model,
            FlowInit {
                coords: start.coords.clone(),
                tangent: start.tangent.clone(),
                transported: start.transported.clone(),
                jacobi: Some((start.a.clone().unwrap(), start.da.clone().unwrap())),
                riccati: None,
                theta: None,
            },
            s - start.s,
            &[s - start.s],
            ctrl,
        )?;
        let last = run.samples.last().unwrap();
        Ok(g_of(last.a.as_ref().unwrap(), last.da.as_ref().unwrap()))
    };
    let tol = F::of(1e-9);
    for (idx, w) in node_g.windows(2).enumerate() {
        let (s0, g0, dg0) = w[0];
        let (s1, g1, dg1) = w[1];
        if (g0 > F::zero()) != (g1 > F::zero()) {
            // Odd-multiplicity crossing: bisect on g.
            let (mut lo, mut hi) = (s0, s1);
            let positive_lo = g0 > F::zero();
            while hi - lo > tol * hi.abs().max(F::one()) {
                let mid = (lo + hi).half();
                let (g, _) = eval_from(idx, mid)?;
                if (g > F::zero()) == positive_lo && g != F::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some((lo + hi).half()));
        }
        if (dg0 > F::zero()) != (dg1 > F::zero()) {
            // Extremum of g inside the interval: bisect on g'.
            let (mut lo, mut hi) = (s0, s1);
            let positive_lo = dg0 > F::zero();
            while hi - lo > tol * hi.abs().max(F::one()) {
                let mid = (lo + hi).half();
                let (_, dg) = eval_from(idx, mid)?;
                if (dg > F::zero()) == positive_lo && dg != F::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = (lo + hi).half();
            let (g, _) = eval_from(idx, root)?;
            if g.abs() <= F::of(1e-8) * g_scale.max(F::one()) {
                return Ok(Some(root));
            }
        }
    }
    Ok(None)
}

/// CSV writer for Weingarten flow samples.
pub fn write_weingarten_csv<F: Real, W: std::io::Write>(
    samples: &[WeingartenSample<F>],
    mut w: W,
) -> Result<()> {
    let Some(first) = samples.first() else {
        return Ok(());
    };
    let p = first.b.rows;
    write!(w, "s,theta,shear_sq")?;
    for i in 0..p {
        for j in 0..p {
            write!(w, ",b{i}{j}")?;
        }
    }
    writeln!(w)?;
    for s in samples {
        write!(w, "{:.17e},{:.17e},{:.17e}", s.s, s.theta, s.shear_sq)?;
        for v in &s.b.data {
            write!(w, ",{:.17e}", v)?;
        }
        writeln!(w)?;
    }
    Ok(())
}
