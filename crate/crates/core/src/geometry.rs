//! Curvature profiles of bent waveguides, the scaling family, and the
//! reduction from geometry to the effective one-dimensional potential.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{Grid, GridSpec};
use crate::scalar::Real;

/// Constant-curvature piece `[start, end]` with curvature `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub start: T,
    pub end: T,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind<T> {
    PiecewiseConstant(Vec<Segment<T>>),
    /// `height · (1 - ((s - center)/half_width)²)²` on `|s - center| ≤ half_width`.
    Bump { height: T, half_width: T, center: T },
    Samples(CubicSpline<T>),
}

/// Compactly supported signed curvature `γ(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile<T> {
    kind: ProfileKind<T>,
    support: (T, T),
}

impl<T: Real> CurvatureProfile<T> {
    pub fn piecewise_constant(mut segments: Vec<Segment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidProfile("no segments".into()));
        }
        segments.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap_or(std::cmp::Ordering::Equal));
        for s in &segments {
            if !(s.start.is_finite() && s.end.is_finite() && s.value.is_finite()) {
                return Err(Error::InvalidProfile("non-finite segment data".into()));
            }
            if s.end <= s.start {
                return Err(Error::InvalidProfile(format!(
                    "segment [{}, {}] has non-positive length",
                    s.start, s.end
                )));
            }
        }
        if segments.windows(2).any(|w| w[1].start < w[0].end) {
            return Err(Error::InvalidProfile("segments overlap".into()));
        }
        let support = (segments[0].start, segments[segments.len() - 1].end);
        Ok(Self {
            kind: ProfileKind::PiecewiseConstant(segments),
            support,
        })
    }

    /// Circular arc of total bending angle `theta` on `[0, length]`.
    pub fn constant_arc(theta: T, length: T) -> Result<Self> {
        Self::piecewise_constant(vec![Segment {
            start: T::zero(),
            end: length,
            value: theta / length,
        }])
    }

    pub fn bump(height: T, half_width: T, center: T) -> Result<Self> {
        if !(height.is_finite() && half_width.is_finite() && center.is_finite()) {
            return Err(Error::InvalidProfile("non-finite bump parameters".into()));
        }
        if half_width <= T::zero() {
            return Err(Error::InvalidProfile("bump half_width must be positive".into()));
        }
        Ok(Self {
            kind: ProfileKind::Bump {
                height,
                half_width,
                center,
            },
            support: (center - half_width, center + half_width),
        })
    }

    /// Tabulated curvature, interpolated by a cubic spline with zero end
    /// slopes; zero outside `[s_0, s_last]`.
    pub fn samples(s: Vec<T>, gamma: Vec<T>) -> Result<Self> {
        let spline = CubicSpline::clamped(s, gamma)?;
        let support = (spline.knots[0], spline.knots[spline.knots.len() - 1]);
        Ok(Self {
            kind: ProfileKind::Samples(spline),
            support,
        })
    }

    pub fn kind(&self) -> &ProfileKind<T> {
        &self.kind
    }

    pub fn support(&self) -> (T, T) {
        self.support
    }

    fn inside(&self, s: T) -> bool {
        s >= self.support.0 && s <= self.support.1
    }

    /// `γ(s)`.
    pub fn gamma(&self, s: T) -> T {
        if !self.inside(s) {
            return T::zero();
        }
        match &self.kind {
            ProfileKind::PiecewiseConstant(segs) => segs
                .iter()
                .find(|g| s >= g.start && s <= g.end)
                .map_or(T::zero(), |g| g.value),
            ProfileKind::Bump {
                height,
                half_width,
                center,
            } => {
                let x = (s - *center) / *half_width;
                let q = T::one() - x * x;
                *height * q * q
            }
            ProfileKind::Samples(sp) => sp.eval(s).0,
        }
    }

    /// `γ'(s)`; zero inside constant pieces.
    pub fn gamma_prime(&self, s: T) -> T {
        if !self.inside(s) {
            return T::zero();
        }
        match &self.kind {
            ProfileKind::PiecewiseConstant(_) => T::zero(),
            ProfileKind::Bump {
                height,
                half_width,
                center,
            } => {
                let x = (s - *center) / *half_width;
                -T::lit(4.0) * *height * x * (T::one() - x * x) / *half_width
            }
            ProfileKind::Samples(sp) => sp.eval(s).1,
        }
    }

    /// `γ''(s)`; zero inside constant pieces.
    pub fn gamma_second(&self, s: T) -> T {
        if !self.inside(s) {
            return T::zero();
        }
        match &self.kind {
            ProfileKind::PiecewiseConstant(_) => T::zero(),
            ProfileKind::Bump {
                height,
                half_width,
                center,
            } => {
                let x = (s - *center) / *half_width;
                T::lit(4.0) * *height * (T::lit(3.0) * x * x - T::one()) / (*half_width * *half_width)
            }
            ProfileKind::Samples(sp) => sp.eval(s).2,
        }
    }

    /// Points where `γ` may fail to be smooth, including the support ends.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut b = match &self.kind {
            ProfileKind::PiecewiseConstant(segs) => {
                segs.iter().flat_map(|g| [g.start, g.end]).collect::<Vec<_>>()
            }
            ProfileKind::Bump { .. } | ProfileKind::Samples(_) => vec![self.support.0, self.support.1],
        };
        b.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        b.dedup();
        b
    }

    /// Profile with every curvature value multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let kind = match &self.kind {
            ProfileKind::PiecewiseConstant(segs) => ProfileKind::PiecewiseConstant(
                segs.iter()
                    .map(|g| Segment {
                        value: g.value * factor,
                        ..*g
                    })
                    .collect(),
            ),
            ProfileKind::Bump {
                height,
                half_width,
                center,
            } => ProfileKind::Bump {
                height: *height * factor,
                half_width: *half_width,
                center: *center,
            },
            ProfileKind::Samples(sp) => ProfileKind::Samples(sp.scaled(factor)),
        };
        Self {
            kind,
            support: self.support,
        }
    }

    /// `sup |γ|` sampled on the default grid plus breakpoints.
    pub fn sup_norm(&self) -> T {
        let grid = self.grid(GridSpec::default()).expect("profile support is a valid grid");
        grid.nodes()
            .iter()
            .chain(self.breakpoints().iter())
            .map(|&s| self.gamma(s).abs())
            .fold(T::zero(), T::max)
    }

    pub fn grid(&self, spec: GridSpec) -> Result<Grid<T>> {
        Grid::composite(&self.breakpoints(), spec)
    }
}

/// Cubic spline with prescribed zero end slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline<T> {
    knots: Vec<T>,
    values: Vec<T>,
    second: Vec<T>,
}

impl<T: Real> CubicSpline<T> {
    pub fn clamped(knots: Vec<T>, values: Vec<T>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::InvalidProfile(
                "samples need at least two points and matching s/gamma lengths".into(),
            ));
        }
        if knots.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidProfile("non-finite sample".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile("sample abscissae must be strictly increasing".into()));
        }
        // Tridiagonal system for the second derivatives, clamped ends y' = 0.
        let h: Vec<T> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let six = T::lit(6.0);
        let two = T::lit(2.0);
        let mut sub = vec![T::zero(); n];
        let mut diag = vec![T::zero(); n];
        let mut sup = vec![T::zero(); n];
        let mut rhs = vec![T::zero(); n];
        diag[0] = two * h[0];
        sup[0] = h[0];
        rhs[0] = six * ((values[1] - values[0]) / h[0]);
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = two * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = six * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
        }
        sub[n - 1] = h[n - 2];
        diag[n - 1] = two * h[n - 2];
        rhs[n - 1] = -six * ((values[n - 1] - values[n - 2]) / h[n - 2]);
        for i in 1..n {
            let m = sub[i] / diag[i - 1];
            diag[i] -= m * sup[i - 1];
            rhs[i] = rhs[i] - m * rhs[i - 1];
        }
        let mut second = vec![T::zero(); n];
        second[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            second[i] = (rhs[i] - sup[i] * second[i + 1]) / diag[i];
        }
        Ok(Self { knots, values, second })
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    fn scaled(&self, f: T) -> Self {
        Self {
            knots: self.knots.clone(),
            values: self.values.iter().map(|&v| v * f).collect(),
            second: self.second.iter().map(|&v| v * f).collect(),
        }
    }

    /// Value, first and second derivative at `s` (inside the knot range).
    pub fn eval(&self, s: T) -> (T, T, T) {
        let n = self.knots.len();
        let i = self.knots.partition_point(|&k| k <= s).clamp(1, n - 1) - 1;
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - s) / h;
        let b = (s - self.knots[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let six = T::lit(6.0);
        let val = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / six;
        let d1 = (y1 - y0) / h - (T::lit(3.0) * a * a - T::one()) * h * m0 / six
            + (T::lit(3.0) * b * b - T::one()) * h * m1 / six;
        let d2 = a * m0 + b * m1;
        (val, d1, d2)
    }
}

/// `λ(ε) = 1 + Σ λ_n εⁿ` together with the width exponent and half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingFamily<T> {
    pub lambda_coeffs: Vec<T>,
    pub alpha: T,
    pub d: T,
    pub eps_max: T,
}

impl<T: Real> ScalingFamily<T> {
    pub fn new(lambda_coeffs: Vec<T>, alpha: T, d: T, eps_max: T) -> Result<Self> {
        let fam = Self {
            lambda_coeffs,
            alpha,
            d,
            eps_max,
        };
        fam.validate()?;
        Ok(fam)
    }

    /// `λ ≡ 1` with `α = 3`, `d = 1`, `ε ≤ 1`.
    pub fn unperturbed() -> Self {
        Self {
            lambda_coeffs: Vec::new(),
            alpha: T::lit(3.0),
            d: T::one(),
            eps_max: T::one(),
        }
    }

    /// First-order family `λ(ε) = 1 + λ₁ε`.
    pub fn linear(lambda1: T) -> Self {
        Self {
            lambda_coeffs: vec![lambda1],
            ..Self::unperturbed()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > T::one()) {
            return Err(Error::InvalidFamily(format!("alpha must exceed 1 (got {})", self.alpha)));
        }
        if !(self.d.is_finite() && self.d > T::zero()) {
            return Err(Error::InvalidFamily(format!("d must be positive (got {})", self.d)));
        }
        if !(self.eps_max.is_finite() && self.eps_max > T::zero()) {
            return Err(Error::InvalidFamily(format!(
                "eps_max must be positive (got {})",
                self.eps_max
            )));
        }
        if self.lambda_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidFamily("non-finite lambda coefficient".into()));
        }
        const CHECKS: usize = 2048;
        for i in 1..=CHECKS {
            let eps = self.eps_max * T::from_usize_lossy(i) / T::from_usize_lossy(CHECKS);
            if self.lambda_unchecked(eps) <= T::zero() {
                return Err(Error::InvalidFamily(format!("lambda(eps) <= 0 at eps = {eps}")));
            }
        }
        Ok(())
    }

    /// Whether the width exponent satisfies `α > 5/2`, the hypothesis of the
    /// resolvent convergence statement.
    pub fn convergence_admissible(&self) -> bool {
        self.alpha > T::lit(2.5)
    }

    /// Truncation order `N` of the series (number of coefficients).
    pub fn truncation_order(&self) -> usize {
        self.lambda_coeffs.len()
    }

    pub fn lambda1(&self) -> T {
        self.lambda_coeffs.first().copied().unwrap_or_else(T::zero)
    }

    pub fn check_eps(&self, eps: T) -> Result<()> {
        if eps > T::zero() && eps <= self.eps_max {
            Ok(())
        } else {
            Err(Error::EpsOutOfRange {
                eps: eps.as_f64(),
                eps_max: self.eps_max.as_f64(),
            })
        }
    }

    /// Truncated series, Horner evaluation, no range check.
    pub fn lambda_unchecked(&self, eps: T) -> T {
        let tail = self
            .lambda_coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| (acc + c) * eps);
        T::one() + tail
    }

    pub fn lambda(&self, eps: T) -> Result<T> {
        self.check_eps(eps)?;
        Ok(self.lambda_unchecked(eps))
    }
}

/// `∫ γ ds` on the profile's own quadrature grid.
pub fn bending_angle<T: Real>(profile: &CurvatureProfile<T>) -> T {
    let grid = profile
        .grid(GridSpec::default())
        .expect("profile support is a valid grid");
    grid.integrate(|s| profile.gamma(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledAngle<T> {
    /// `θ √λ(ε)`.
    pub exact: T,
    /// `θ (1 + λ₁ε/2)`.
    pub first_order: T,
}

pub fn scaled_bending_angle<T: Real>(
    profile: &CurvatureProfile<T>,
    family: &ScalingFamily<T>,
    eps: T,
) -> Result<ScaledAngle<T>> {
    let lambda = family.lambda(eps)?;
    let theta = bending_angle(profile);
    Ok(ScaledAngle {
        exact: theta * lambda.sqrt(),
        first_order: theta * (T::one() + T::lit(0.5) * family.lambda1() * eps),
    })
}

/// Three-term effective potential of the curvilinear strip at `(s, u)`,
/// `u` in the unit strip `(-d, d)`.
pub fn effective_potential_2d<T: Real>(
    profile: &CurvatureProfile<T>,
    family: &ScalingFamily<T>,
    eps: T,
    s: T,
    u: T,
) -> Result<T> {
    let lambda = family.lambda(eps)?;
    if u.abs() >= family.d {
        return Err(Error::InvalidArgument(format!(
            "|u| = {} must be below the half-width d = {}",
            u.abs(),
            family.d
        )));
    }
    let x = s / eps;
    let g = profile.gamma(x);
    let g1 = profile.gamma_prime(x);
    let g2 = profile.gamma_second(x);
    let e1 = eps.powf(family.alpha - T::one());
    let sl = lambda.sqrt();
    let den = T::one() + e1 * u * sl * g;
    if den <= T::zero() {
        return Err(Error::WidthExceedsCurvatureRadius { denominator: den.as_f64() });
    }
    let t1 = -lambda * g * g / (T::lit(4.0) * den * den);
    let t2 = e1 * u * sl * g2 / (T::lit(2.0) * den.powi(3));
    let t3 = -T::lit(1.25) * e1 * e1 * u * u * lambda * g1 * g1 / den.powi(4);
    Ok(t1 + t2 + t3)
}

/// `E_{ε,n} = (nπ / (2 d ε^α))²`.
pub fn transverse_threshold<T: Real>(family: &ScalingFamily<T>, n: u32, eps: T) -> Result<T> {
    if n == 0 {
        return Err(Error::ZeroModeIndex);
    }
    family.check_eps(eps)?;
    let nf = T::from_u32(n).expect("mode index representable");
    let e = nf * T::PI() / (T::lit(2.0) * family.d * eps.powf(family.alpha));
    Ok(e * e)
}

type PotentialFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Potential sampled on a composite Gauss–Legendre grid, with the
/// factorization `u = sgn(V)|V|^½`, `v = |V|^½`.
#[derive(Clone)]
pub struct Potential<T> {
    grid: Grid<T>,
    breakpoints: Vec<T>,
    samples: Vec<T>,
    u: Vec<T>,
    v: Vec<T>,
    moment: T,
    eval: PotentialFn<T>,
}

impl<T: Real> fmt::Debug for Potential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("support", &self.support())
            .field("nodes", &self.grid.len())
            .field("moment", &self.moment)
            .finish()
    }
}

impl<T: Real> Potential<T> {
    /// Samples `f` on `[breakpoints[0], breakpoints[last]]`, smooth between
    /// consecutive breakpoints. `f` is only ever evaluated inside the support.
    pub fn from_fn(
        breakpoints: &[T],
        spec: GridSpec,
        f: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        let grid = Grid::composite(breakpoints, spec)?;
        let samples: Vec<T> = grid.nodes().iter().map(|&s| f(s)).collect();
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("potential has non-finite samples".into()));
        }
        let v: Vec<T> = samples.iter().map(|x| x.abs().sqrt()).collect();
        let u: Vec<T> = samples
            .iter()
            .zip(&v)
            .map(|(&x, &vi)| if x < T::zero() { -vi } else if x > T::zero() { vi } else { T::zero() })
            .collect();
        let moment = grid.integrate_samples(&samples);
        Ok(Self {
            grid,
            breakpoints: breakpoints.to_vec(),
            samples,
            u,
            v,
            moment,
            eval: Arc::new(f),
        })
    }

    /// `V = -depth` on `[center - half_width, center + half_width]`.
    pub fn square_well(depth: T, half_width: T, spec: GridSpec) -> Result<Self> {
        if half_width <= T::zero() {
            return Err(Error::InvalidArgument("square well half-width must be positive".into()));
        }
        Self::from_fn(&[-half_width, half_width], spec, move |_| -depth)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn nodes(&self) -> &[T] {
        self.grid.nodes()
    }

    pub fn weights(&self) -> &[T] {
        self.grid.weights()
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn u(&self) -> &[T] {
        &self.u
    }

    pub fn v(&self) -> &[T] {
        &self.v
    }

    /// `∫ V ds = (v, u)`.
    pub fn moment(&self) -> T {
        self.moment
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn support(&self) -> (T, T) {
        (self.grid.lo(), self.grid.hi())
    }

    /// `V(s)`, zero outside the support.
    pub fn value(&self, s: T) -> T {
        let (lo, hi) = self.support();
        if s < lo || s > hi {
            T::zero()
        } else {
            (self.eval)(s)
        }
    }

    /// `V(s)` evaluated from inside the segment `[a, b]`: points on the
    /// edges are nudged inward so that jumps at breakpoints resolve to the
    /// segment's own side.
    pub fn value_in_segment(&self, s: T, a: T, b: T) -> T {
        let nudge = (b - a) * T::lit(1e-12);
        (self.eval)(s.max(a + nudge).min(b - nudge))
    }

    /// Same potential multiplied by `factor` on the same grid.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        let eval = self.eval.clone();
        Self::from_fn(
            &self.breakpoints,
            self.grid_spec(),
            move |s| factor * eval(s),
        )
    }

    /// The same potential resampled on a different grid.
    pub fn resampled(&self, spec: GridSpec) -> Result<Self> {
        let eval = self.eval.clone();
        Self::from_fn(&self.breakpoints, spec, move |s| eval(s))
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            panels_per_segment: self.grid.panels().len() / (self.breakpoints.len() - 1),
            nodes_per_panel: self.grid.nodes_per_panel(),
        }
    }

    pub fn require_nonzero_moment(&self) -> Result<()> {
        let scale: T = self.samples.iter().zip(self.weights()).map(|(x, w)| x.abs() * *w).sum();
        if self.moment == T::zero() || self.moment.abs() <= scale * T::epsilon() * T::lit(64.0) {
            Err(Error::DegeneratePotential)
        } else {
            Ok(())
        }
    }
}

/// `V̄ = -γ²/4` sampled on the profile's grid.
pub fn effective_potential<T: Real>(profile: &CurvatureProfile<T>, spec: GridSpec) -> Result<Potential<T>> {
    let p = profile.clone();
    let pot = Potential::from_fn(&profile.breakpoints(), spec, move |s| {
        let g = p.gamma(s);
        -g * g / T::lit(4.0)
    })?;
    if pot.samples().iter().all(|&x| x == T::zero()) {
        return Err(Error::DegeneratePotential);
    }
    pot.require_nonzero_moment()?;
    Ok(pot)
}

/// Serialized form of a curvature profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<[f64; 2]>,
    pub parameters: ProfileParameters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKindName {
    PiecewiseConstant,
    Bump,
    Samples,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileParameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
}

fn require<V: Clone>(field: &Option<V>, name: &str, kind: &str) -> Result<V> {
    field
        .clone()
        .ok_or_else(|| Error::InvalidProfile(format!("kind \"{kind}\" requires parameters.{name}")))
}

impl ProfileSpec {
    pub fn to_profile<T: Real>(&self) -> Result<CurvatureProfile<T>> {
        let p = &self.parameters;
        let reject_extra = |names: &[(&str, bool)], kind: &str| -> Result<()> {
            match names.iter().find(|(_, present)| *present) {
                Some((n, _)) => Err(Error::InvalidProfile(format!(
                    "parameters.{n} is not valid for kind \"{kind}\""
                ))),
                None => Ok(()),
            }
        };
        let profile = match self.kind {
            ProfileKindName::PiecewiseConstant => {
                reject_extra(
                    &[
                        ("height", p.height.is_some()),
                        ("half_width", p.half_width.is_some()),
                        ("center", p.center.is_some()),
                        ("s", p.s.is_some()),
                        ("gamma", p.gamma.is_some()),
                    ],
                    "piecewise_constant",
                )?;
                let segs = require(&p.segments, "segments", "piecewise_constant")?;
                CurvatureProfile::piecewise_constant(
                    segs.iter()
                        .map(|s| Segment {
                            start: T::lit(s[0]),
                            end: T::lit(s[1]),
                            value: T::lit(s[2]),
                        })
                        .collect(),
                )?
            }
            ProfileKindName::Bump => {
                reject_extra(
                    &[
                        ("segments", p.segments.is_some()),
                        ("s", p.s.is_some()),
                        ("gamma", p.gamma.is_some()),
                    ],
                    "bump",
                )?;
                CurvatureProfile::bump(
                    T::lit(require(&p.height, "height", "bump")?),
                    T::lit(require(&p.half_width, "half_width", "bump")?),
                    T::lit(p.center.unwrap_or(0.0)),
                )?
            }
            ProfileKindName::Samples => {
                reject_extra(
                    &[
                        ("segments", p.segments.is_some()),
                        ("height", p.height.is_some()),
                        ("half_width", p.half_width.is_some()),
                        ("center", p.center.is_some()),
                    ],
                    "samples",
                )?;
                CurvatureProfile::samples(
                    require(&p.s, "s", "samples")?.into_iter().map(T::lit).collect(),
                    require(&p.gamma, "gamma", "samples")?.into_iter().map(T::lit).collect(),
                )?
            }
        };
        if let Some([lo, hi]) = self.support {
            let (plo, phi) = profile.support();
            let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
            if (plo.as_f64() - lo).abs() > tol || (phi.as_f64() - hi).abs() > tol {
                return Err(Error::InvalidProfile(format!(
                    "declared support [{lo}, {hi}] does not match the parameters' support [{plo}, {phi}]"
                )));
            }
        }
        Ok(profile)
    }
}
