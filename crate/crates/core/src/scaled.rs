//! The scaled operator `H_ε = -d²/ds² + λ(ε) ε⁻² V(s/ε)`: its resolvent in
//! factorized form, the expansion data of `T_ε(k)` and convergence sweeps
//! against the limit operators.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Potential, ScalingFamily};
use crate::linalg::{condition_number, Matrix};
use crate::pointint::{self, Momentum, PointInteraction};
use crate::quadrature::GaussLegendre;
use crate::resonance::{Case, ResonanceReport};
use crate::scalar::Real;

const KINK_RULE_ORDER: usize = 24;

/// Limit operator a sweep compares against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target<T> {
    Dirichlet,
    Point(PointInteraction<T>),
}

/// Serializable name of a [`Target`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Dirichlet,
    PointInteraction,
}

impl<T: Real> Target<T> {
    /// Dirichlet in case I, the point interaction built from the computed
    /// constants in case II.
    pub fn from_report(report: &ResonanceReport<T>) -> Result<Self> {
        match report.case {
            Case::NonResonant => Ok(Target::Dirichlet),
            Case::Resonant => {
                let c = report.constants.as_ref().ok_or_else(|| {
                    Error::TargetMismatch("resonant report carries no coupling constants".into())
                })?;
                Ok(Target::Point(PointInteraction::from_constants(c)?))
            }
        }
    }

    pub fn kind(&self) -> TargetKind {
        match self {
            Target::Dirichlet => TargetKind::Dirichlet,
            Target::Point(_) => TargetKind::PointInteraction,
        }
    }

    /// Vertex parameters; the Dirichlet target maps to `λ̂ = ∞`.
    pub fn interaction(&self) -> PointInteraction<T> {
        match self {
            Target::Dirichlet => PointInteraction::dirichlet(),
            Target::Point(p) => *p,
        }
    }

    pub fn kernel(&self, k: Momentum<T>, s: T, sp: T) -> Result<Complex<T>> {
        match self {
            Target::Dirichlet => Ok(pointint::resolvent_dirichlet(k, s, sp)),
            Target::Point(p) => pointint::resolvent_point(p, k, s, sp),
        }
    }
}

/// Discretized `T_ε(k) = [1 + λ(ε) u G_{εk} v]⁻¹` together with what is
/// needed to evaluate the resolvent kernel of `H_ε`.
#[derive(Debug, Clone)]
pub struct ScaledResolvent<T: Real> {
    eps: T,
    k: Momentum<T>,
    lambda: T,
    pot: Potential<T>,
    t_matrix: Matrix<Complex<T>>,
    condition_number: T,
    fine: GaussLegendre<T>,
}

/// Builds [`ScaledResolvent`] with `λ(ε)` taken from `family`.
pub fn build_t_matrix<T: Real>(
    pot: &Potential<T>,
    family: &ScalingFamily<T>,
    eps: T,
    k: Momentum<T>,
) -> Result<ScaledResolvent<T>> {
    let lambda = family.lambda(eps)?;
    ScaledResolvent::with_coupling(pot, eps, lambda, k)
}

fn c<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

impl<T: Real> ScaledResolvent<T> {
    /// Assembles and inverts `1 + λ u G_{εk} v` for an explicit coupling `λ`.
    pub fn with_coupling(pot: &Potential<T>, eps: T, lambda: T, k: Momentum<T>) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument("coupling must be finite".into()));
        }
        let ek = k.value() * eps;
        let i = Complex::new(T::zero(), T::one());
        let pre = i / (ek * T::lit(2.0));
        let w = pot.grid().difference_kernel_matrix(|r: T| pre * (i * ek * r).exp(), true);
        let (u, v) = (pot.u(), pot.v());
        let n = u.len();
        let m = Matrix::from_fn(n, n, |a, b| {
            let d = if a == b { c(T::one()) } else { c(T::zero()) };
            d + w[(a, b)] * (lambda * u[a] * v[b])
        });
        let t_matrix = m.inverse().map_err(|_| Error::SingularTMatrix { eps: eps.as_f64() })?;
        let cond = condition_number(&m, &t_matrix);
        if !cond.is_finite() || cond * T::epsilon() > T::lit(1e-2) {
            return Err(Error::SingularTMatrix { eps: eps.as_f64() });
        }
        log::debug!("T-matrix at eps = {eps}: condition number {:.3e}", cond.as_f64());
        Ok(Self {
            eps,
            k,
            lambda,
            pot: pot.clone(),
            t_matrix,
            condition_number: cond,
            fine: GaussLegendre::new(KINK_RULE_ORDER),
        })
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn momentum(&self) -> Momentum<T> {
        self.k
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn t_matrix(&self) -> &Matrix<Complex<T>> {
        &self.t_matrix
    }

    pub fn condition_number(&self) -> T {
        self.condition_number
    }

    pub fn potential(&self) -> &Potential<T> {
        &self.pot
    }

    /// `T_ε f` for nodal values `f`.
    pub fn apply(&self, f: &[Complex<T>]) -> Vec<Complex<T>> {
        self.t_matrix.mul_vec(f)
    }

    /// `∫ G_k(s - εx) V(x) G_k(εx - s') dx`, split at both kinks.
    fn smooth_part(&self, s: T, sp: T) -> Complex<T> {
        let k = self.k;
        let eps = self.eps;
        let mut acc = c(T::zero());
        for panel in self.pot.grid().panels() {
            let mut cuts = vec![panel.lo, panel.hi];
            for x in [s / eps, sp / eps] {
                if x > panel.lo && x < panel.hi {
                    cuts.push(x);
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cut points"));
            for win in cuts.windows(2) {
                let (a, b) = (win[0], win[1]);
                if b <= a {
                    continue;
                }
                acc += self.fine.integrate(a, b, |x: T| {
                    let vbar = self.pot.value_in_segment(x, panel.lo, panel.hi);
                    pointint::free_resolvent_kernel(k, s - eps * x)
                        * pointint::free_resolvent_kernel(k, eps * x - sp)
                        * vbar
                });
            }
        }
        acc
    }

    /// Kernel of `(H_ε - k²)⁻¹` at `(s, s')`.
    pub fn kernel(&self, s: T, sp: T) -> Complex<T> {
        let k = self.k;
        let eps = self.eps;
        let grid = self.pot.grid();
        let (u, v) = (self.pot.u(), self.pot.v());
        let free = pointint::free_resolvent_kernel(k, s - sp);
        if self.pot.samples().iter().all(|&x| x == T::zero()) {
            return free;
        }
        let cvec: Vec<Complex<T>> = grid
            .nodes()
            .iter()
            .zip(u)
            .map(|(&x, &ux)| pointint::free_resolvent_kernel(k, eps * x - sp) * ux)
            .collect();
        let z = self.apply(&cvec);
        // c - z = λ K z is smooth, so only it meets the nodal quadrature;
        // the kinked product c·a is integrated exactly.
        let a = grid.kink_weights(s / eps, |x: T| {
            pointint::free_resolvent_kernel(k, s - eps * x)
        });
        let mut rest = c(T::zero());
        for (idx, (&ai, (&ci, &zi))) in a.iter().zip(cvec.iter().zip(&z)).enumerate() {
            rest += ai * v[idx] * (ci - zi);
        }
        let correction = self.smooth_part(s, sp) - rest;
        free - correction * (self.lambda / eps)
    }
}

/// Scalar products of `T_ε(k)` against the moment functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRow<T> {
    pub eps: T,
    /// `(v, T u)`.
    pub f0: Complex<T>,
    /// `((·)v, T u)`.
    pub f1: Complex<T>,
    /// `(v, T (·)u)`.
    pub f2: Complex<T>,
    /// `((·)v, T (·)u)`.
    pub f3: Complex<T>,
    pub condition_number: T,
}

impl<T: Real> ProbeRow<T> {
    /// Rescaled products `[F₀/ε, F₁, F₂, εF₃]`, each with a finite limit.
    pub fn normalized(&self) -> [Complex<T>; 4] {
        [self.f0 / self.eps, self.f1, self.f2, self.f3 * self.eps]
    }
}

pub const PROBE_NAMES: [&str; 4] = ["f0_over_eps", "f1", "f2", "eps_f3"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEstimate<T> {
    pub name: &'static str,
    /// Extrapolation from the three smallest `ε`.
    pub estimate: Complex<T>,
    /// Difference between the two overlapping extrapolations.
    pub residual: T,
    pub target: Complex<T>,
    /// `|estimate - target| / max(1, |target|)`.
    pub deviation: T,
    /// Set when `residual` exceeds the requested tolerance.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTable<T> {
    pub k: Complex<T>,
    pub target: TargetKind,
    pub rows: Vec<ProbeRow<T>>,
    pub estimates: Vec<ProbeEstimate<T>>,
}

/// Limits of the rescaled products `[F₀/ε, F₁, F₂, εF₃]` for the limit
/// operator described by `target`.
pub fn expansion_targets<T: Real>(target: &Target<T>, k: Momentum<T>) -> [Complex<T>; 4] {
    let zero = c(T::zero());
    let kv = k.value();
    let i = Complex::new(T::zero(), T::one());
    match target {
        Target::Dirichlet => [-i * kv * T::lit(2.0), zero, zero, zero],
        Target::Point(p) => {
            let (c1, c2, lh) = (p.c1(), p.c2(), p.lambda_hat());
            let den = kv * (T::lit(2.0) * p.norm_sq()) + i * lh;
            let f0 = -i * kv * T::lit(2.0) * (kv * (T::lit(2.0) * c2 * c2) + i * lh) / den;
            let f12 = kv * (T::lit(4.0) * c1 * c2) / den;
            let f3 = -i * (T::lit(4.0) * c2 * c2) / den;
            [f0, f12, f12, f3]
        }
    }
}

fn check_eps_list<T: Real>(family: &ScalingFamily<T>, eps_list: &[T]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("eps list is empty".into()));
    }
    for w in eps_list.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidArgument("eps list must be strictly decreasing".into()));
        }
    }
    for &e in eps_list {
        family.check_eps(e)?;
    }
    Ok(())
}

/// Richardson step for `f(ε) = f₀ + aε + O(ε²)` from two samples.
fn richardson<T: Real>(e1: T, f1: Complex<T>, e2: T, f2: Complex<T>) -> Complex<T> {
    (f2 * e1 - f1 * e2) / (e1 - e2)
}

/// Computes the scalar products at every `ε` and extrapolates their
/// limits, comparing with the values implied by `target`.
pub fn expansion_probe<T: Real>(
    pot: &Potential<T>,
    family: &ScalingFamily<T>,
    k: Momentum<T>,
    eps_list: &[T],
    target: &Target<T>,
    tol: T,
) -> Result<ProbeTable<T>> {
    check_eps_list(family, eps_list)?;
    if eps_list.len() < 3 {
        return Err(Error::InvalidArgument("extrapolation needs at least three eps values".into()));
    }
    let x = pot.nodes();
    let w = pot.weights();
    let u: Vec<Complex<T>> = pot.u().iter().map(|&a| c(a)).collect();
    let xu: Vec<Complex<T>> = pot.u().iter().zip(x).map(|(&a, &s)| c(a * s)).collect();
    let dot = |f: &[Complex<T>], moment: bool| -> Complex<T> {
        let mut acc = c(T::zero());
        for idx in 0..f.len() {
            let m = if moment { x[idx] } else { T::one() };
            acc += f[idx] * (w[idx] * pot.v()[idx] * m);
        }
        acc
    };
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let sr = build_t_matrix(pot, family, eps, k)?;
        let tu = sr.apply(&u);
        let txu = sr.apply(&xu);
        rows.push(ProbeRow {
            eps,
            f0: dot(&tu, false),
            f1: dot(&tu, true),
            f2: dot(&txu, false),
            f3: dot(&txu, true),
            condition_number: sr.condition_number(),
        });
    }
    let targets = expansion_targets(target, k);
    let n = rows.len();
    let (a, b, cc) = (&rows[n - 3], &rows[n - 2], &rows[n - 1]);
    let (na, nb, nc) = (a.normalized(), b.normalized(), cc.normalized());
    let estimates = (0..4)
        .map(|q| {
            let r1 = richardson(a.eps, na[q], b.eps, nb[q]);
            let r2 = richardson(b.eps, nb[q], cc.eps, nc[q]);
            let residual = (r2 - r1).norm();
            let deviation = (r2 - targets[q]).norm() / T::one().max(targets[q].norm());
            ProbeEstimate {
                name: PROBE_NAMES[q],
                estimate: r2,
                residual,
                target: targets[q],
                deviation,
                flagged: residual > tol * T::one().max(r2.norm()),
            }
        })
        .collect();
    Ok(ProbeTable {
        k: k.value(),
        target: target.kind(),
        rows,
        estimates,
    })
}

/// Points `s` forming the tensor grid of probe pairs `(s, s')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid<T> {
    pub points: Vec<T>,
}

impl<T: Real> Default for ProbeGrid<T> {
    fn default() -> Self {
        let pts = [-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0];
        Self {
            points: pts.iter().map(|&p| T::lit(p)).collect(),
        }
    }
}

impl<T: Real> ProbeGrid<T> {
    /// Inserts the midpoint between neighbouring points.
    pub fn refined(&self) -> Self {
        let mut points = Vec::with_capacity(2 * self.points.len());
        for (idx, &p) in self.points.iter().enumerate() {
            points.push(p);
            if let Some(&q) = self.points.get(idx + 1) {
                points.push((p + q) * T::lit(0.5));
            }
        }
        Self { points }
    }

    /// Tensor pairs, without pairs touching `s = 0` when the target is
    /// Dirichlet (both kernels vanish there).
    pub fn pairs(&self, target: TargetKind) -> Vec<(T, T)> {
        let mut out = Vec::with_capacity(self.points.len() * self.points.len());
        for &s in &self.points {
            for &sp in &self.points {
                if target == TargetKind::Dirichlet && (s == T::zero() || sp == T::zero()) {
                    continue;
                }
                out.push((s, sp));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord<T> {
    pub target: TargetKind,
    pub k: Complex<T>,
    pub eps_list: Vec<T>,
    /// Sup over the probe pairs of `|scaled - limit|`.
    pub errors: Vec<T>,
    pub condition_numbers: Vec<T>,
    /// Log-log least squares slope, present for three or more `ε` values.
    pub fitted_rate: Option<T>,
}

impl<T: Real> ConvergenceRecord<T> {
    pub fn is_monotone(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }
}

/// Slope of the least squares line through `(ln x, ln y)`; `None` with
/// fewer than three points or a non-positive value.
pub fn fitted_rate<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    if x.len() < 3 || x.len() != y.len() || x.iter().chain(y).any(|&v| !(v > T::zero())) {
        return None;
    }
    let n = T::from_usize_lossy(x.len());
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (*a - mx) * (*b - my);
        sxx += (*a - mx) * (*a - mx);
    }
    if sxx == T::zero() {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Sup of `|scaled - target|` over the probe pairs for a single resolvent.
pub fn sup_error<T: Real>(sr: &ScaledResolvent<T>, target: &Target<T>, probes: &ProbeGrid<T>) -> Result<T> {
    let mut worst = T::zero();
    for (s, sp) in probes.pairs(target.kind()) {
        let d = (sr.kernel(s, sp) - target.kernel(sr.momentum(), s, sp)?).norm();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Compares the scaled resolvent kernel with the limit kernel along
/// `eps_list`.
pub fn convergence_sweep<T: Real>(
    pot: &Potential<T>,
    family: &ScalingFamily<T>,
    k: Momentum<T>,
    eps_list: &[T],
    probes: &ProbeGrid<T>,
    target: &Target<T>,
) -> Result<ConvergenceRecord<T>> {
    check_eps_list(family, eps_list)?;
    if probes.points.is_empty() {
        return Err(Error::InvalidArgument("probe grid is empty".into()));
    }
    let mut errors = Vec::with_capacity(eps_list.len());
    let mut conds = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let sr = build_t_matrix(pot, family, eps, k)?;
        let err = sup_error(&sr, target, probes)?;
        log::info!("eps = {eps}: sup error {:.3e}", err.as_f64());
        errors.push(err);
        conds.push(sr.condition_number());
    }
    Ok(ConvergenceRecord {
        target: target.kind(),
        k: k.value(),
        eps_list: eps_list.to_vec(),
        fitted_rate: fitted_rate(eps_list, &errors),
        errors,
        condition_numbers: conds,
    })
}
