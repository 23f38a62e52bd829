//! Null geodesics, parallel transport, screen frames and Jacobi fields.
//!
//! Everything rides on one coupled first-order system so that the
//! adaptive step control sees the geodesic, the transported frame and any
//! Jacobi/Weingarten data simultaneously.

use crate::error::{Error, Result};
use crate::linalg::{bilinear, euclidean_norm_sq, Mat};
use crate::ode::{self, StepControl};
use crate::real::Real;
use crate::spacetime::{MetricModel, SpacetimePoint, TangentVector};

/// Null-constraint drift beyond this aborts an integration.
pub fn drift_tolerance<F: Real>() -> F {
    F::of(1e-6)
}

/// Weingarten norm beyond which the Riccati flow is declared blown up.
pub fn blowup_threshold<F: Real>() -> F {
    F::of(1e8)
}

/// Pseudo-orthonormal frame adapted to a null direction K:
/// `l` is the companion null vector with <K, L> = -2 alpha, and `e` holds
/// n-2 orthonormal spacelike screen vectors orthogonal to both.
#[derive(Clone, Debug)]
pub struct ScreenFrame<F> {
    pub k: Vec<F>,
    pub l: Vec<F>,
    pub e: Vec<Vec<F>>,
}

impl<F: Real> ScreenFrame<F> {
    pub fn screen_dim(&self) -> usize {
        self.e.len()
    }

    /// Worst deviation from the defining inner-product relations at `g`.
    pub fn orthonormality_defect(&self, g: &Mat<F>) -> F {
        let mut worst = bilinear(g, &self.k, &self.k).abs();
        worst = worst.max(bilinear(g, &self.l, &self.l).abs());
        for (i, ei) in self.e.iter().enumerate() {
            worst = worst.max(bilinear(g, &self.k, ei).abs());
            worst = worst.max(bilinear(g, &self.l, ei).abs());
            for (j, ej) in self.e.iter().enumerate() {
                let target = if i == j { F::one() } else { F::zero() };
                worst = worst.max((bilinear(g, ei, ej) - target).abs());
            }
        }
        worst
    }
}

/// Construct a screen frame for the null vector `k` at `p`.
///
/// A unit timelike direction T is taken from the negative-eigenvalue
/// eigenvector of the metric matrix; with alpha = -<K, T> the companion
/// null vector is L = T - (K/alpha - T), and the screen basis comes from
/// Gram-Schmidt on the coordinate directions projected onto the screen.
pub fn build_screen_frame<F: Real>(
    model: &MetricModel<F>,
    p: &SpacetimePoint<F>,
    k: &[F],
) -> Result<ScreenFrame<F>> {
    let g = model.metric_at(p)?;
    let n = model.n;
    let kk = bilinear(&g, k, k);
    if kk.abs() > crate::spacetime::null_tolerance::<F>() * euclidean_norm_sq(k) {
        return Err(Error::Validation(format!(
            "screen frame requires a null vector, got <K,K> = {:e}",
            kk
        )));
    }
    let (eigvals, eigvecs) = g.sym_eigen();
    if eigvals.iter().filter(|&&e| e < F::zero()).count() != 1 {
        return Err(Error::DegenerateFrame);
    }
    // Eigenvalues are ascending, so the timelike direction is column 0.
    let mut t: Vec<F> = (0..n).map(|i| eigvecs[(i, 0)]).collect();
    let tn = (-bilinear(&g, &t, &t)).sqrt();
    for c in t.iter_mut() {
        *c = *c / tn;
    }
    let mut alpha = -bilinear(&g, k, &t);
    if alpha < F::zero() {
        // Orient T to the same time side as K.
        for c in t.iter_mut() {
            *c = -*c;
        }
        alpha = -alpha;
    }
    if alpha.abs() < F::of(1e-12) {
        return Err(Error::DegenerateFrame);
    }
    let s: Vec<F> = (0..n).map(|i| k[i] / alpha - t[i]).collect();
    let l: Vec<F> = (0..n).map(|i| t[i] - s[i]).collect();
    let kl = bilinear(&g, k, &l);

    let mut e: Vec<Vec<F>> = Vec::with_capacity(n - 2);
    let keep_threshold = F::of(1e-8) * g.max_abs().max(F::one());
    for mu in 0..n {
        if e.len() == n - 2 {
            break;
        }
        let mut basis = vec![F::zero(); n];
        basis[mu] = F::one();
        // Project onto the screen (orthogonal complement of K and L).
        let xl = bilinear(&g, &basis, &l);
        let xk = bilinear(&g, &basis, k);
        let mut w: Vec<F> = (0..n).map(|i| basis[i] - (xl * k[i] + xk * l[i]) / kl).collect();
        for ej in &e {
            let c = bilinear(&g, &w, ej);
            for i in 0..n {
                w[i] = w[i] - c * ej[i];
            }
        }
        let q = bilinear(&g, &w, &w);
        if q > keep_threshold {
            let norm = q.sqrt();
            for c in w.iter_mut() {
                *c = *c / norm;
            }
            e.push(w);
        }
    }
    if e.len() != n - 2 {
        return Err(Error::DegenerateFrame);
    }
    Ok(ScreenFrame { k: k.to_vec(), l, e })
}

/// Screen-projected tidal operator (R_scr)_{ij} = R(e_i, K, e_j, K),
/// contracted with the fully lowered Riemann tensor.
pub fn screen_curvature<F: Real>(
    model: &MetricModel<F>,
    coords: &[F],
    k: &[F],
    e: &[Vec<F>],
) -> Result<Mat<F>> {
    let (_, low, _) = model.curvature_components(coords)?;
    let n = model.n;
    let p = e.len();
    Ok(Mat::from_fn(p, p, |i, j| {
        let mut acc = F::zero();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        acc = acc + low.get(a, b, c, d) * e[i][a] * k[b] * e[j][c] * k[d];
                    }
                }
            }
        }
        acc
    }))
}

/// Source of the shear scalar in the Raychaudhuri equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sigma2Source {
    /// sigma^2 = 0 (shear-free ansatz).
    Zero,
    /// sigma^2 from the co-integrated Weingarten map.
    FromRiccati,
}

/// Initial data for the coupled flow.
pub(crate) struct FlowInit<F> {
    pub coords: Vec<F>,
    pub tangent: Vec<F>,
    /// Parallel-transported vectors; when curvature terms are active the
    /// first n-2 of these must form the screen basis.
    pub transported: Vec<Vec<F>>,
    /// Jacobi data (A, A') evolving by A'' = -R_scr A.
    pub jacobi: Option<(Mat<F>, Mat<F>)>,
    /// Weingarten map evolving by b' = -b^2 - R_scr.
    pub riccati: Option<Mat<F>>,
    /// Expansion scalar evolving by the Raychaudhuri equation.
    pub theta: Option<(F, Sigma2Source)>,
}

#[derive(Clone, Debug)]
pub(crate) struct FlowSample<F> {
    pub s: F,
    pub coords: Vec<F>,
    pub tangent: Vec<F>,
    pub transported: Vec<Vec<F>>,
    pub a: Option<Mat<F>>,
    pub da: Option<Mat<F>>,
    pub b: Option<Mat<F>>,
    pub theta: Option<F>,
    pub null_residual: F,
}

pub(crate) struct FlowOutput<F> {
    pub samples: Vec<FlowSample<F>>,
    pub max_null_drift: F,
}

struct Layout {
    n: usize,
    p: usize,
    nvec: usize,
    jacobi: bool,
    riccati: bool,
    theta: bool,
}

impl Layout {
    fn dim(&self) -> usize {
        2 * self.n
            + self.nvec * self.n
            + if self.jacobi { 2 * self.p * self.p } else { 0 }
            + if self.riccati { self.p * self.p } else { 0 }
            + usize::from(self.theta)
    }
    fn vec_at(&self, i: usize) -> usize {
        2 * self.n + i * self.n
    }
    fn jacobi_at(&self) -> usize {
        2 * self.n + self.nvec * self.n
    }
    fn riccati_at(&self) -> usize {
        self.jacobi_at() + if self.jacobi { 2 * self.p * self.p } else { 0 }
    }
    fn theta_at(&self) -> usize {
        self.riccati_at() + if self.riccati { self.p * self.p } else { 0 }
    }
}

fn mat_from_slice<F: Real>(p: usize, s: &[F]) -> Mat<F> {
    Mat::from_fn(p, p, |i, j| s[i * p + j])
}

/// Integrate the coupled flow, sampling at `nodes` (plus both endpoints).
pub(crate) fn integrate_flow<F: Real>(
    model: &MetricModel<F>,
    init: FlowInit<F>,
    s_end: F,
    nodes: &[F],
    ctrl: &StepControl<F>,
) -> Result<FlowOutput<F>> {
    let n = model.n;
    let p = n - 2;
    let needs_curvature = init.jacobi.is_some() || init.riccati.is_some() || init.theta.is_some();
    if needs_curvature && init.transported.len() < p {
        return Err(Error::MissingFrame);
    }
    let layout = Layout {
        n,
        p,
        nvec: init.transported.len(),
        jacobi: init.jacobi.is_some(),
        riccati: init.riccati.is_some(),
        theta: init.theta.is_some(),
    };
    let sigma2 = init.theta.as_ref().map(|(_, s)| *s);
    if sigma2 == Some(Sigma2Source::FromRiccati) && !layout.riccati {
        return Err(Error::Validation(
            "Raychaudhuri shear source requires a co-integrated Weingarten map".into(),
        ));
    }

    let mut y0 = Vec::with_capacity(layout.dim());
    y0.extend_from_slice(&init.coords);
    y0.extend_from_slice(&init.tangent);
    for w in &init.transported {
        assert_eq!(w.len(), n);
        y0.extend_from_slice(w);
    }
    if let Some((a, da)) = &init.jacobi {
        y0.extend(a.data.iter().copied());
        y0.extend(da.data.iter().copied());
    }
    if let Some(b) = &init.riccati {
        y0.extend(b.data.iter().copied());
    }
    if let Some((th, _)) = &init.theta {
        y0.push(*th);
    }

    let rhs = |_s: F, y: &[F]| -> Result<Vec<F>> {
        let coords = &y[..n];
        let v = &y[n..2 * n];
        let gamma = model.christoffel_components(coords)?;
        let mut dy = vec![F::zero(); layout.dim()];
        dy[..n].copy_from_slice(v);
        let transport = |w: &[F], out: &mut [F]| {
            for m in 0..n {
                let mut acc = F::zero();
                for a in 0..n {
                    for b in 0..n {
                        acc = acc + gamma[m][(a, b)] * v[a] * w[b];
                    }
                }
                out[m] = -acc;
            }
        };
        transport(v, &mut dy[n..2 * n]);
        for i in 0..layout.nvec {
            let at = layout.vec_at(i);
            let w = y[at..at + n].to_vec();
            transport(&w, &mut dy[at..at + n]);
        }
        if needs_curvature {
            let e: Vec<Vec<F>> =
                (0..p).map(|i| y[layout.vec_at(i)..layout.vec_at(i) + n].to_vec()).collect();
            let (_, low, ricci) = model.curvature_components(coords)?;
            let r_scr = Mat::from_fn(p, p, |i, j| {
                let mut acc = F::zero();
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            for d in 0..n {
                                acc = acc + low.get(a, b, c, d) * e[i][a] * v[b] * e[j][c] * v[d];
                            }
                        }
                    }
                }
                acc
            });
            if layout.jacobi {
                let at = layout.jacobi_at();
                let pp = p * p;
                let a = mat_from_slice(p, &y[at..at + pp]);
                // A' = dA, dA' = -R_scr A
                dy[at..at + pp].copy_from_slice(&y[at + pp..at + 2 * pp]);
                let dda = r_scr.matmul(&a).scale(-F::one());
                for i in 0..p {
                    for j in 0..p {
                        dy[at + pp + i * p + j] = dda[(i, j)];
                    }
                }
            }
            let b_now = if layout.riccati {
                let at = layout.riccati_at();
                Some(mat_from_slice(p, &y[at..at + p * p]))
            } else {
                None
            };
            if let Some(b) = &b_now {
                let at = layout.riccati_at();
                let db = b.matmul(b).add(&r_scr).scale(-F::one());
                for i in 0..p {
                    for j in 0..p {
                        dy[at + i * p + j] = db[(i, j)];
                    }
                }
            }
            if layout.theta {
                let at = layout.theta_at();
                let theta = y[at];
                let ric_vv = bilinear(&ricci, v, v);
                let shear_sq = match sigma2.unwrap() {
                    Sigma2Source::Zero => F::zero(),
                    Sigma2Source::FromRiccati => {
                        let b = b_now.as_ref().unwrap();
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
                };
                dy[at] = -ric_vv - shear_sq - theta * theta / F::from_usize(p).unwrap();
            }
        }
        Ok(dy)
    };

    let mut samples: Vec<FlowSample<F>> = Vec::new();
    let mut max_drift = F::zero();
    let mut pending: Vec<F> = nodes
        .iter()
        .copied()
        .filter(|&x| x > F::zero() && x < s_end)
        .collect();
    pending.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pending.dedup();
    pending.push(s_end);
    let mut next = 0usize;

    let out = ode::integrate(
        rhs,
        F::zero(),
        &y0,
        s_end,
        &pending,
        ctrl,
        |s, y| {
            let coords = &y[..n];
            let v = &y[n..2 * n];
            let g = model.metric_components(coords)?;
            let residual = bilinear(&g, v, v);
            let drift = residual.abs() / euclidean_norm_sq(v).max(F::one());
            max_drift = max_drift.max(drift);
            if drift > drift_tolerance::<F>() {
                return Err(Error::StepFailure(format!(
                    "null constraint drift {drift:e} exceeds tolerance at s = {s}"
                )));
            }
            if layout.riccati {
                let at = layout.riccati_at();
                let b = mat_from_slice(p, &y[at..at + p * p]);
                if b.max_abs() > blowup_threshold::<F>() {
                    return Err(Error::BlowUp { last_s: s.to_f64().unwrap_or(f64::NAN) });
                }
            }
            let is_node = s == F::zero()
                || (next < pending.len()
                    && (s - pending[next]).abs() <= F::of(1e-12) * s.abs().max(F::one()));
            if is_node {
                if s != F::zero() {
                    next += 1;
                }
                let transported = (0..layout.nvec)
                    .map(|i| y[layout.vec_at(i)..layout.vec_at(i) + n].to_vec())
                    .collect();
                let (a, da) = if layout.jacobi {
                    let at = layout.jacobi_at();
                    let pp = p * p;
                    (
                        Some(mat_from_slice(p, &y[at..at + pp])),
                        Some(mat_from_slice(p, &y[at + pp..at + 2 * pp])),
                    )
                } else {
                    (None, None)
                };
                let b = if layout.riccati {
                    let at = layout.riccati_at();
                    Some(mat_from_slice(p, &y[at..at + p * p]))
                } else {
                    None
                };
                let theta = if layout.theta { Some(y[layout.theta_at()]) } else { None };
                samples.push(FlowSample {
                    s,
                    coords: coords.to_vec(),
                    tangent: v.to_vec(),
                    transported,
                    a,
                    da,
                    b,
                    theta,
                    null_residual: residual,
                });
            }
            Ok(())
        },
    )?;
    let _ = out;
    Ok(FlowOutput { samples, max_null_drift: max_drift })
}

/// One sample of a null geodesic.
#[derive(Clone, Debug)]
pub struct TrajectorySample<F> {
    pub s: F,
    pub coords: Vec<F>,
    pub tangent: Vec<F>,
    pub frame: Option<ScreenFrame<F>>,
    pub null_residual: F,
}

#[derive(Debug)]
pub struct NullTrajectory<F> {
    pub chart: String,
    pub samples: Vec<TrajectorySample<F>>,
    pub max_null_drift: F,
}

impl<F: Real> NullTrajectory<F> {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let n = self.samples.first().map(|s| s.coords.len()).unwrap_or(0);
        write!(w, "s")?;
        for i in 0..n {
            write!(w, ",x{i}")?;
        }
        for i in 0..n {
            write!(w, ",v{i}")?;
        }
        writeln!(w, ",null_residual")?;
        for s in &self.samples {
            write!(w, "{:.17e}", s.s)?;
            for c in s.coords.iter().chain(&s.tangent) {
                write!(w, ",{:.17e}", c)?;
            }
            writeln!(w, ",{:.17e}", s.null_residual)?;
        }
        Ok(())
    }
}

/// Integrate the null geodesic with initial point `p` and null tangent
/// `v0` over [0, s_end].  With `carry_frame` a screen frame is built at
/// `p` and parallel-transported, so every sample carries an adapted frame.
pub fn integrate_geodesic<F: Real>(
    model: &MetricModel<F>,
    p: &SpacetimePoint<F>,
    v0: &TangentVector<F>,
    s_end: F,
    nodes: &[F],
    ctrl: &StepControl<F>,
    carry_frame: bool,
) -> Result<NullTrajectory<F>> {
    if v0.base != *p {
        return Err(Error::BaseMismatch);
    }
    match model.classify(p, v0)? {
        crate::spacetime::CausalClass::Null => {}
        other => {
            return Err(Error::Validation(format!(
                "geodesic seed must be null, classified as {other:?}"
            )))
        }
    }
    let mut transported = Vec::new();
    let mut carried_l = None;
    if carry_frame {
        let frame = build_screen_frame(model, p, &v0.components)?;
        transported.extend(frame.e.iter().cloned());
        transported.push(frame.l.clone());
        carried_l = Some(());
    }
    let out = integrate_flow(
        model,
        FlowInit {
            coords: p.coords.clone(),
            tangent: v0.components.clone(),
            transported,
            jacobi: None,
            riccati: None,
            theta: None,
        },
        s_end,
        nodes,
        ctrl,
    )?;
    let pdim = model.n - 2;
    let samples = out
        .samples
        .into_iter()
        .map(|fs| {
            let frame = carried_l.map(|_| ScreenFrame {
                k: fs.tangent.clone(),
                l: fs.transported[pdim].clone(),
                e: fs.transported[..pdim].to_vec(),
            });
            TrajectorySample {
                s: fs.s,
                coords: fs.coords,
                tangent: fs.tangent,
                frame,
                null_residual: fs.null_residual,
            }
        })
        .collect();
    Ok(NullTrajectory { chart: model.chart.clone(), samples, max_null_drift: out.max_null_drift })
}

/// Parallel-transport the vectors `w0` along the null geodesic seeded by
/// (`p`, `v0`); returns (s, transported vectors) at the requested nodes.
pub fn parallel_transport<F: Real>(
    model: &MetricModel<F>,
    p: &SpacetimePoint<F>,
    v0: &TangentVector<F>,
    w0: &[Vec<F>],
    s_end: F,
    nodes: &[F],
    ctrl: &StepControl<F>,
) -> Result<Vec<(F, Vec<Vec<F>>)>> {
    if v0.base != *p {
        return Err(Error::BaseMismatch);
    }
    let out = integrate_flow(
        model,
        FlowInit {
            coords: p.coords.clone(),
            tangent: v0.components.clone(),
            transported: w0.to_vec(),
            jacobi: None,
            riccati: None,
            theta: None,
        },
        s_end,
        nodes,
        ctrl,
    )?;
    Ok(out.samples.into_iter().map(|s| (s.s, s.transported)).collect())
}

/// One sample of a Jacobi matrix evolution.
#[derive(Clone, Debug)]
pub struct JacobiSample<F> {
    pub s: F,
    pub coords: Vec<F>,
    pub a: Mat<F>,
    pub da: Mat<F>,
    pub det_a: F,
}

/// Evolve the matrix Jacobi equation A'' = -R_scr A along the geodesic,
/// with the screen frame built at `p` and parallel-transported.
pub fn jacobi_evolve<F: Real>(
    model: &MetricModel<F>,
    p: &SpacetimePoint<F>,
    v0: &TangentVector<F>,
    a0: &Mat<F>,
    da0: &Mat<F>,
    s_end: F,
    nodes: &[F],
    ctrl: &StepControl<F>,
) -> Result<Vec<JacobiSample<F>>> {
    if v0.base != *p {
        return Err(Error::BaseMismatch);
    }
    let frame = build_screen_frame(model, p, &v0.components)?;
    let out = integrate_flow(
        model,
        FlowInit {
            coords: p.coords.clone(),
            tangent: v0.components.clone(),
            transported: frame.e.clone(),
            jacobi: Some((a0.clone(), da0.clone())),
            riccati: None,
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
            let a = fs.a.unwrap();
            let det = a.det();
            JacobiSample { s: fs.s, coords: fs.coords, a, da: fs.da.unwrap(), det_a: det }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::catalog::*;

    const PI: f64 = std::f64::consts::PI;

    fn ctrl() -> StepControl<f64> {
        StepControl::default()
    }

    #[test]
    fn minkowski_screen_frame_matches_expectation() {
        let m = minkowski::<f64>(4);
        let p = m.point(&[0.0; 4]);
        let f = build_screen_frame(&m, &p, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.e.len(), 2);
        assert!((f.e[0][2] - 1.0).abs() < 1e-12 && f.e[0][0].abs() < 1e-12);
        assert!((f.e[1][3] - 1.0).abs() < 1e-12);
        let g = m.metric_at(&p).unwrap();
        assert!(f.orthonormality_defect(&g) < 1e-12);
        assert!((bilinear(&g, &f.k, &f.l) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn ef_horizon_screen_frame_is_angular() {
        let m = schwarzschild_ef::<f64>(1.0);
        let p = m.point(&[0.0, 2.0, PI / 2.0, 0.0]);
        let f = build_screen_frame(&m, &p, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let g = m.metric_at(&p).unwrap();
        assert!(f.orthonormality_defect(&g) < 1e-10);
        // Screen vectors are unit angular directions (1/r factors).
        assert!((f.e[0][2].abs() - 0.5).abs() < 1e-10, "{:?}", f.e);
        assert!((f.e[1][3].abs() - 0.5).abs() < 1e-10, "{:?}", f.e);
    }

    #[test]
    fn screen_frame_rejects_non_null() {
        let m = minkowski::<f64>(4);
        let p = m.point(&[0.0; 4]);
        assert!(build_screen_frame(&m, &p, &[1.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn pp_wave_screen_curvature_is_k_squared() {
        let m = pp_wave::<f64>(0.8);
        let e = vec![vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]];
        let r = screen_curvature(&m, &[0.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0], &e).unwrap();
        assert!((r[(0, 0)] - 0.64).abs() < 1e-8, "{:?}", r);
        assert!((r[(1, 1)] - 0.64).abs() < 1e-8);
        assert!(r[(0, 1)].abs() < 1e-10);
    }

    #[test]
    fn minkowski_null_line() {
        let m = minkowski::<f64>(4);
        let p = m.point(&[0.0; 4]);
        let v = m.tangent(&[0.0; 4], &[1.0, 1.0, 0.0, 0.0]);
        let traj = integrate_geodesic(&m, &p, &v, 5.0, &[2.5], &ctrl(), true).unwrap();
        let last = traj.samples.last().unwrap();
        assert!((last.coords[0] - 5.0).abs() < 1e-10);
        assert!((last.coords[1] - 5.0).abs() < 1e-10);
        assert!(traj.max_null_drift < 1e-12);
    }

    #[test]
    fn horizon_generator_stays_at_r_2m() {
        let m = schwarzschild_ef::<f64>(1.0);
        let coords = [0.0, 2.0, PI / 2.0, 0.0];
        let p = m.point(&coords);
        let v = m.tangent(&coords, &[1.0, 0.0, 0.0, 0.0]);
        let nodes: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let traj = integrate_geodesic(&m, &p, &v, 10.0, &nodes, &ctrl(), true).unwrap();
        for s in &traj.samples {
            assert!((s.coords[1] - 2.0).abs() < 1e-8, "r drifted to {}", s.coords[1]);
        }
        // Affine tangent decays like exp(-kappa v) with surface gravity 1/4M.
        let last = traj.samples.last().unwrap();
        assert!(last.tangent[0] < 1.0);
    }

    #[test]
    fn photon_sphere_orbit() {
        let m = schwarzschild_exterior::<f64>(1.0);
        let coords = [0.0, 3.0, PI / 2.0, 0.0];
        let p = m.point(&coords);
        // Null condition with L = 1: vt = r / sqrt(f) = sqrt(27).
        let vt = (27.0f64).sqrt();
        let v = m.tangent(&coords, &[vt, 0.0, 0.0, 1.0]);
        assert_eq!(m.classify(&p, &v).unwrap(), crate::spacetime::CausalClass::Null);
        let traj = integrate_geodesic(&m, &p, &v, 2.0 * PI, &[], &ctrl(), false).unwrap();
        for s in &traj.samples {
            assert!((s.coords[1] - 3.0).abs() < 1e-7, "left photon sphere: r = {}", s.coords[1]);
        }
        assert!(traj.max_null_drift < 1e-8);
    }

    #[test]
    fn transport_preserves_inner_products() {
        let m = schwarzschild_ef::<f64>(1.0);
        let coords = [0.0, 5.0, 1.2, 0.3];
        let p = m.point(&coords);
        // Outgoing radial null: g(v,v) = vv (2 vr - f vv) = 0 at vr = f/2.
        let f0 = 1.0 - 2.0 / 5.0;
        let v = m.tangent(&coords, &[1.0, f0 / 2.0, 0.0, 0.0]);
        let frame = build_screen_frame(&m, &p, &v.components).unwrap();
        let w0 = vec![frame.e[0].clone(), frame.e[1].clone(), frame.l.clone()];
        let out = parallel_transport(&m, &p, &v, &w0, 4.0, &[2.0], &ctrl()).unwrap();
        let traj = integrate_geodesic(&m, &p, &v, 4.0, &[2.0], &ctrl(), false).unwrap();
        for ((s, ws), ts) in out.iter().zip(&traj.samples) {
            let g = m.metric_components(&ts.coords).unwrap();
            assert!((s - ts.s).abs() < 1e-12);
            assert!((bilinear(&g, &ws[0], &ws[0]) - 1.0).abs() < 1e-9);
            assert!((bilinear(&g, &ws[1], &ws[1]) - 1.0).abs() < 1e-9);
            assert!(bilinear(&g, &ws[0], &ws[1]).abs() < 1e-9);
            assert!(bilinear(&g, &ws[2], &ws[2]).abs() < 1e-9);
            assert!(bilinear(&g, &ws[0], &ts.tangent).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_jacobi_is_linear() {
        let m = minkowski::<f64>(4);
        let p = m.point(&[0.0; 4]);
        let v = m.tangent(&[0.0; 4], &[1.0, 1.0, 0.0, 0.0]);
        let a0 = Mat::zeros(2, 2);
        let da0 = Mat::identity(2);
        let out = jacobi_evolve(&m, &p, &v, &a0, &da0, 3.0, &[1.0, 2.0], &ctrl()).unwrap();
        for s in &out {
            assert!((s.a[(0, 0)] - s.s).abs() < 1e-10);
            assert!((s.det_a - s.s * s.s).abs() < 1e-9);
        }
    }

    #[test]
    fn pp_wave_jacobi_vanishes_at_pi_over_k() {
        let m = pp_wave::<f64>(1.0);
        let p = m.point(&[0.0; 4]);
        let v = m.tangent(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]);
        let a0 = Mat::identity(2);
        let da0 = Mat::zeros(2, 2);
        let out = jacobi_evolve(&m, &p, &v, &a0, &da0, 3.3, &[PI / 2.0, PI], &ctrl()).unwrap();
        let half = out.iter().find(|s| (s.s - PI / 2.0).abs() < 1e-10).unwrap();
        assert!(half.a[(0, 0)].abs() < 1e-8, "cos(pi/2) expected, got {}", half.a[(0, 0)]);
        let at_pi = out.iter().find(|s| (s.s - PI).abs() < 1e-10).unwrap();
        assert!((at_pi.a[(0, 0)] + 1.0).abs() < 1e-8);
        assert!(at_pi.det_a - 1.0 < 1e-6);
    }

    #[test]
    fn jacobi_wronskian_is_constant() {
        // W = A1'^T A2 - A1^T A2' is conserved for the matrix Jacobi
        // equation with symmetric R_scr.
        let m = pp_wave::<f64>(0.6);
        let p = m.point(&[0.0, 0.0, 0.2, -0.1]);
        // Off the wave axis the null lift of d/du needs a dv component:
        // g(K,K) = g_uu + 2 K^v = 0.
        let vv = 0.36 * (0.2f64.powi(2) + 0.1f64.powi(2)) / 2.0;
        let v = m.tangent(&[0.0, 0.0, 0.2, -0.1], &[1.0, vv, 0.0, 0.0]);
        let run = |a0: Mat<f64>, da0: Mat<f64>| {
            jacobi_evolve(&m, &p, &v, &a0, &da0, 2.0, &[1.0, 2.0], &ctrl()).unwrap()
        };
        let s1 = run(Mat::identity(2), Mat::zeros(2, 2));
        let s2 = run(Mat::zeros(2, 2), Mat::identity(2));
        for (u, w) in s1.iter().zip(&s2) {
            let wr = u.da.transpose().matmul(&w.a).sub(&u.a.transpose().matmul(&w.da));
            // At s = 0 the Wronskian is -I.
            let defect = wr.add(&Mat::identity(2)).max_abs();
            assert!(defect < 1e-8, "Wronskian drift {defect:.3e} at s = {}", u.s);
        }
    }

    #[test]
    fn non_null_seed_rejected() {
        let m = minkowski::<f64>(4);
        let p = m.point(&[0.0; 4]);
        let v = m.tangent(&[0.0; 4], &[1.0, 0.5, 0.0, 0.0]);
        assert!(integrate_geodesic(&m, &p, &v, 1.0, &[], &ctrl(), false).is_err());
    }

    #[test]
    fn chart_exit_reports_domain_error() {
        // Radially infalling null ray hits r = 0 in finite parameter.
        let m = schwarzschild_ef::<f64>(1.0);
        let coords = [0.0, 3.0, PI / 2.0, 0.0];
        let p = m.point(&coords);
        // Ingoing: v stays constant, r decreases: tangent (0, -1, 0, 0).
        let v = m.tangent(&coords, &[0.0, -1.0, 0.0, 0.0]);
        let res = integrate_geodesic(&m, &p, &v, 10.0, &[], &ctrl(), false);
        assert!(matches!(res, Err(Error::Domain(_))), "{res:?}");
    }
}
