//! Zero-energy resonance detection for `H = -d²/ds² + V` with compactly
//! supported `V`, by ODE shooting and by the Birman–Schwinger eigenproblem,
//! and the coupling constants of the limiting point interaction.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Potential;
use crate::linalg::{weighted_dot, Matrix};
use crate::ode::{self, OdeOptions};
use crate::roots;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// No zero-energy resonance.
    #[serde(rename = "I")]
    NonResonant,
    /// Zero-energy resonance present.
    #[serde(rename = "II")]
    Resonant,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Case::NonResonant => f.write_str("I"),
            Case::Resonant => f.write_str("II"),
        }
    }
}

/// Affine continuation `value + slope·(s - edge)` of a solution beyond the
/// support of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineTail<T> {
    pub edge: T,
    pub value: T,
    pub slope: T,
}

impl<T: Real> AffineTail<T> {
    pub fn eval(&self, s: T) -> T {
        self.value + self.slope * (s - self.edge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions<T> {
    pub ode: OdeOptions<T>,
    /// Resonance criterion `|b| <= tol (|a| + 1)` on the right tail `a + b s`.
    pub tol: T,
}

impl<T: Real> Default for ShootingOptions<T> {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            tol: T::lit(1e-8),
        }
    }
}

/// Solutions of `-ψ'' + Vψ = 0` started flat (`ψ = 1`, `ψ' = 0`) from
/// either edge of the support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootingSolution<T> {
    /// Left-started solution at the grid nodes.
    pub psi_left: Vec<T>,
    /// Right-started solution at the grid nodes.
    pub psi_right: Vec<T>,
    /// Right tail of the left-started solution.
    pub left_exit: AffineTail<T>,
    /// Left tail of the right-started solution.
    pub right_exit: AffineTail<T>,
    /// Linear growth coefficient of the left solution right of the support.
    pub wronskian_slope: T,
    /// Signed defect `b / (|a| + 1)`; vanishes exactly at a resonance.
    pub match_defect: T,
}

fn march<T: Real>(
    pot: &Potential<T>,
    opts: &OdeOptions<T>,
    forward: bool,
) -> Result<(Vec<T>, [T; 2])> {
    let grid = pot.grid();
    let np = grid.nodes_per_panel();
    let mut out = vec![T::zero(); grid.len()];
    let mut y = [T::one(), T::zero()];
    let panels: Vec<usize> = if forward {
        (0..grid.panels().len()).collect()
    } else {
        (0..grid.panels().len()).rev().collect()
    };
    for p in panels {
        let panel = grid.panels()[p];
        let rhs = |s: T, y: &[T; 2]| [y[1], pot.value_in_segment(s, panel.lo, panel.hi) * y[0]];
        let idx: Vec<usize> = if forward {
            (panel.first..panel.first + np).collect()
        } else {
            (panel.first..panel.first + np).rev().collect()
        };
        let mut t = if forward { panel.lo } else { panel.hi };
        for i in idx {
            let s = grid.nodes()[i];
            y = ode::integrate(rhs, t, y, s, opts)?;
            out[i] = y[0];
            t = s;
        }
        let end = if forward { panel.hi } else { panel.lo };
        y = ode::integrate(rhs, t, y, end, opts)?;
    }
    Ok((out, y))
}

pub fn shoot<T: Real>(pot: &Potential<T>, opts: &ShootingOptions<T>) -> Result<ShootingSolution<T>> {
    let (lo, hi) = pot.support();
    let (psi_left, yl) = march(pot, &opts.ode, true)?;
    let (psi_right, yr) = march(pot, &opts.ode, false)?;
    Ok(ShootingSolution {
        psi_left,
        psi_right,
        left_exit: AffineTail {
            edge: hi,
            value: yl[0],
            slope: yl[1],
        },
        right_exit: AffineTail {
            edge: lo,
            value: yr[0],
            slope: yr[1],
        },
        wronskian_slope: yl[1],
        match_defect: yl[1] / (yl[0].abs() + T::one()),
    })
}

/// Case decision from the left-started solution: resonant iff the linear
/// coefficient emerging on the right vanishes within tolerance.
pub fn detect_resonance_shooting<T: Real>(
    pot: &Potential<T>,
    opts: &ShootingOptions<T>,
) -> Result<(Case, ShootingSolution<T>)> {
    pot.require_nonzero_moment()?;
    let sol = shoot(pot, opts)?;
    let case = if sol.match_defect.abs() <= opts.tol {
        Case::Resonant
    } else {
        Case::NonResonant
    };
    Ok((case, sol))
}

/// How the integral operators are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NystromRule {
    /// Kernel times quadrature weight at every node pair.
    Plain,
    /// Product integration on the diagonal panel (spectrally accurate for
    /// the `|s - s'|` kink).
    #[default]
    Product,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Nyström discretization of `m_n(s, s') = -u(s) |s - s'|^{n+1} v(s') / (2 (n+1)!)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirmanSchwingerKernel<T> {
    order: usize,
    rule: NystromRule,
    matrix: Matrix<T>,
}

impl<T: Real> BirmanSchwingerKernel<T> {
    pub fn new(pot: &Potential<T>, order: usize, rule: NystromRule) -> Self {
        let c = T::lit(2.0 * factorial(order + 1));
        let p = (order + 1) as i32;
        let k = pot
            .grid()
            .difference_kernel_matrix(|r: T| r.powi(p) / c, rule == NystromRule::Product);
        let (u, v) = (pot.u(), pot.v());
        let matrix = Matrix::from_fn(k.rows(), k.cols(), |i, j| -u[i] * k[(i, j)] * v[j]);
        Self { order, rule, matrix }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rule(&self) -> NystromRule {
        self.rule
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn apply(&self, f: &[T]) -> Vec<T> {
        self.matrix.mul_vec(f)
    }
}

/// `Q m₀ Q` with `P = (v, ·) u / (v, u)` and `Q = 1 - P`.
fn projected_kernel<T: Real>(pot: &Potential<T>, m0: &Matrix<T>) -> Matrix<T> {
    let n = pot.nodes().len();
    let vu = pot.moment();
    let (u, v, w) = (pot.u(), pot.v(), pot.weights());
    let q = Matrix::from_fn(n, n, |i, j| {
        let p = u[i] * v[j] * w[j] / vu;
        if i == j {
            T::one() - p
        } else {
            -p
        }
    });
    q.matmul(m0).matmul(&q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsOptions<T> {
    /// Resonance iff `|μ + 1| <= tol` for the eigenvalue `μ` nearest `-1`.
    pub tol: T,
    pub rule: NystromRule,
}

impl<T: Real> Default for BsOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-6),
            rule: NystromRule::Product,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsDetection<T> {
    pub case: Case,
    /// Eigenvector for the eigenvalue nearest `-1`, scaled so that the
    /// associated resonance function has left tail 1. Present in case II.
    pub phi0: Option<Vec<T>>,
    /// Eigenvalue of `Q m₀ Q` nearest `-1`.
    pub eigenvalue: Complex<T>,
    /// `|μ + 1|`.
    pub gap: T,
    /// Distance from `-1` of the second-nearest eigenvalue.
    pub next_gap: T,
}

struct NearestMode<T> {
    eigenvalue: Complex<T>,
    gap: T,
    next_gap: T,
    vector: Vec<T>,
}

fn eigenvalues_f64<T: Real>(a: &Matrix<T>) -> Result<Vec<Complex<f64>>> {
    let n = a.rows();
    let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| a[(i, j)].as_f64());
    let schur = nalgebra::linalg::Schur::try_new(m, 1e-14, 10_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

fn nearest_mode<T: Real>(pot: &Potential<T>, m0: &Matrix<T>) -> Result<NearestMode<T>> {
    let a = projected_kernel(pot, m0);
    let mut eig = eigenvalues_f64(&a)?;
    let target = Complex::new(-1.0, 0.0);
    eig.sort_by(|x, y| {
        (x - target)
            .norm()
            .partial_cmp(&(y - target).norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mu = eig[0];
    let gap = (mu - target).norm();
    let next_gap = eig.get(1).map_or(f64::INFINITY, |e| (e - target).norm());

    // Inverse iteration on the real part of the selected eigenvalue.
    let n = a.rows();
    let mut shift = T::lit(mu.re);
    let mut lu = None;
    for attempt in 0..8 {
        let shifted = Matrix::from_fn(n, n, |i, j| if i == j { a[(i, j)] - shift } else { a[(i, j)] });
        match shifted.lu() {
            Ok(f) => {
                lu = Some(f);
                break;
            }
            Err(_) => {
                shift += T::lit(1e-12 * 10f64.powi(attempt)) * (T::one() + shift.abs());
            }
        }
    }
    let lu = lu.ok_or(Error::SingularMatrix)?;
    let mut x: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(0.37) * T::lit(((i * 7919) % 101) as f64 / 101.0))
        .collect();
    for _ in 0..8 {
        let y = lu.solve(&x);
        let norm = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::Eigen("inverse iteration broke down".into()));
        }
        x = y.into_iter().map(|v| v / norm).collect();
    }
    Ok(NearestMode {
        eigenvalue: Complex::new(T::lit(mu.re), T::lit(mu.im)),
        gap: T::lit(gap),
        next_gap: T::lit(next_gap),
        vector: x,
    })
}

/// `(c₁, c₂)` read off from a solution `φ` of `φ + Q m₀ Q φ = 0`:
/// `c₁ = (v, m₀φ)/(v, u)`, `c₂ = ((·)v, φ)/2`.
fn constants_from_phi<T: Real>(pot: &Potential<T>, m0: &Matrix<T>, phi: &[T]) -> (T, T) {
    let w = pot.weights();
    let m0phi = m0.mul_vec(phi);
    let c1 = weighted_dot(w, pot.v(), &m0phi) / pot.moment();
    let sv: Vec<T> = pot.nodes().iter().zip(pot.v()).map(|(&s, &v)| s * v).collect();
    let c2 = T::lit(0.5) * weighted_dot(w, &sv, phi);
    (c1, c2)
}

/// Birman–Schwinger detection: eigenvalue of `Q m₀ Q` nearest `-1`.
pub fn detect_resonance_bs<T: Real>(pot: &Potential<T>, opts: &BsOptions<T>) -> Result<BsDetection<T>> {
    pot.require_nonzero_moment()?;
    let m0 = BirmanSchwingerKernel::new(pot, 0, opts.rule);
    let mode = nearest_mode(pot, m0.matrix())?;
    let case = if mode.gap <= opts.tol {
        Case::Resonant
    } else {
        Case::NonResonant
    };
    if case == Case::Resonant && mode.next_gap <= opts.tol {
        return Err(Error::NonSimpleResonance { multiplicity: 2 });
    }
    let phi0 = if case == Case::Resonant {
        Some(normalize_phi(pot, m0.matrix(), mode.vector)?)
    } else {
        None
    };
    Ok(BsDetection {
        case,
        phi0,
        eigenvalue: mode.eigenvalue,
        gap: mode.gap,
        next_gap: mode.next_gap,
    })
}

/// Scales `φ` so that the resonance function it encodes has left tail
/// `-c₁ - c₂ = 1`.
fn normalize_phi<T: Real>(pot: &Potential<T>, m0: &Matrix<T>, phi: Vec<T>) -> Result<Vec<T>> {
    let (c1, c2) = constants_from_phi(pot, m0, &phi);
    let tail = -(c1 + c2);
    let scale = phi.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if tail.abs() <= T::epsilon().sqrt() * scale * (pot.support().1 - pot.support().0) {
        return Err(Error::Eigen("resonance function has vanishing left tail".into()));
    }
    Ok(phi.into_iter().map(|x| x / tail).collect())
}

/// Coupling constants from both computational routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants<T> {
    pub c1: T,
    pub c2: T,
    pub lambda_hat: T,
    pub c1_via_phi: T,
    pub c2_via_phi: T,
    pub lambda_hat_via_phi: T,
}

/// Computes `c₁`, `c₂` by direct quadrature of the resonance function and
/// again from `φ₀`; fails when the two routes disagree beyond `tol`
/// (relative to `max(1, |value|)`). `λ̂ = λ₁ ∫ V ψ_r²`.
pub fn compute_constants<T: Real>(
    pot: &Potential<T>,
    psi_r: &[T],
    phi0: &[T],
    lambda1: T,
    tol: T,
) -> Result<Constants<T>> {
    pot.require_nonzero_moment()?;
    let grid = pot.grid();
    let w = grid.weights();
    let vbar = pot.samples();
    let half = T::lit(0.5);
    let kink = grid.difference_kernel_matrix(|r: T| r * half, true);
    let vpsi: Vec<T> = vbar.iter().zip(psi_r).map(|(&a, &b)| a * b).collect();
    let inner = kink.mul_vec(&vpsi);
    let c1 = weighted_dot(w, vbar, &inner) / pot.moment();
    let svpsi: Vec<T> = pot.nodes().iter().zip(&vpsi).map(|(&s, &x)| s * x).collect();
    let c2 = -half * grid.integrate_samples(&svpsi);
    let lambda_hat = lambda1 * weighted_dot(w, &vpsi, psi_r);

    let m0 = Matrix::from_fn(inner.len(), inner.len(), |i, j| -pot.u()[i] * kink[(i, j)] * pot.v()[j]);
    let (c1_phi, c2_phi) = constants_from_phi(pot, &m0, phi0);
    let sgn_phi: Vec<T> = vbar
        .iter()
        .zip(phi0)
        .map(|(&x, &p)| if x < T::zero() { -p } else if x > T::zero() { p } else { T::zero() })
        .collect();
    let lambda_hat_phi = lambda1 * weighted_dot(w, &sgn_phi, phi0);

    for (name, a, b) in [
        ("c1", c1, c1_phi),
        ("c2", c2, c2_phi),
        ("lambda_hat", lambda_hat, lambda_hat_phi),
    ] {
        if (a - b).abs() > tol * T::one().max(a.abs()) {
            return Err(Error::ConstantsMismatch {
                quantity: name,
                direct: a.as_f64(),
                via_phi: b.as_f64(),
            });
        }
    }
    if c1 * c1 + c2 * c2 <= T::epsilon() {
        return Err(Error::VanishingCouplings);
    }
    Ok(Constants {
        c1,
        c2,
        lambda_hat,
        c1_via_phi: c1_phi,
        c2_via_phi: c2_phi,
        lambda_hat_via_phi: lambda_hat_phi,
    })
}

/// Resonance function on the grid plus its constant tails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceFunction<T> {
    pub values: Vec<T>,
    pub left_tail: T,
    pub right_tail: T,
    /// Residual linear coefficient of the right tail (zero at an exact resonance).
    pub right_slope: T,
}

/// Which detector decides the reported case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    Shooting,
    #[default]
    BirmanSchwinger,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions<T> {
    pub shooting: ShootingOptions<T>,
    pub bs: BsOptions<T>,
    pub authority: Detector,
    /// Cross-method tolerance for the constants and for `u ψ_r = -φ₀`.
    pub constants_tol: T,
}

impl<T: Real> Default for AnalysisOptions<T> {
    fn default() -> Self {
        Self {
            shooting: ShootingOptions::default(),
            bs: BsOptions::default(),
            authority: Detector::BirmanSchwinger,
            constants_tol: T::lit(1e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceReport<T> {
    pub case: Case,
    pub authority: Detector,
    /// Residual of the deciding criterion (shooting defect or spectral gap).
    pub defect: T,
    pub shooting_case: Case,
    pub shooting_defect: T,
    pub bs_case: Case,
    pub bs_gap: T,
    pub bs_eigenvalue: [T; 2],
    pub nodes: Vec<T>,
    pub psi_r: Option<ResonanceFunction<T>>,
    pub phi0: Option<Vec<T>>,
    /// `max_s |u(s) ψ_r(s) + φ₀(s)|`.
    pub phi_mismatch: Option<T>,
    pub constants: Option<Constants<T>>,
}

impl<T: Real> ResonanceReport<T> {
    pub fn methods_agree(&self) -> bool {
        self.shooting_case == self.bs_case
    }
}

/// Runs both detectors and, in case II, produces `ψ_r`, `φ₀` and the
/// constants.
pub fn analyze<T: Real>(pot: &Potential<T>, lambda1: T, opts: &AnalysisOptions<T>) -> Result<ResonanceReport<T>> {
    let (shooting_case, sol) = detect_resonance_shooting(pot, &opts.shooting)?;
    let m0 = BirmanSchwingerKernel::new(pot, 0, opts.bs.rule);
    let mode = nearest_mode(pot, m0.matrix())?;
    let bs_case = if mode.gap <= opts.bs.tol {
        Case::Resonant
    } else {
        Case::NonResonant
    };
    let (case, defect) = match opts.authority {
        Detector::Shooting => (shooting_case, sol.match_defect),
        Detector::BirmanSchwinger => (bs_case, mode.gap),
    };
    let mut report = ResonanceReport {
        case,
        authority: opts.authority,
        defect,
        shooting_case,
        shooting_defect: sol.match_defect,
        bs_case,
        bs_gap: mode.gap,
        bs_eigenvalue: [mode.eigenvalue.re, mode.eigenvalue.im],
        nodes: pot.nodes().to_vec(),
        psi_r: None,
        phi0: None,
        phi_mismatch: None,
        constants: None,
    };
    if case == Case::NonResonant {
        return Ok(report);
    }
    if mode.next_gap <= opts.bs.tol {
        return Err(Error::NonSimpleResonance { multiplicity: 2 });
    }
    let phi0 = normalize_phi(pot, m0.matrix(), mode.vector)?;
    let psi = sol.psi_left;
    let mismatch = pot
        .u()
        .iter()
        .zip(&psi)
        .zip(&phi0)
        .map(|((&u, &p), &f)| (u * p + f).abs())
        .fold(T::zero(), T::max);
    let constants = compute_constants(pot, &psi, &phi0, lambda1, opts.constants_tol)?;
    report.psi_r = Some(ResonanceFunction {
        values: psi,
        left_tail: T::one(),
        right_tail: sol.left_exit.value,
        right_slope: sol.left_exit.slope,
    });
    report.phi0 = Some(phi0);
    report.phi_mismatch = Some(mismatch);
    report.constants = Some(constants);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions<T> {
    /// Number of uniformly spaced samples of the defect over the range.
    pub samples: usize,
    /// Absolute tolerance on the root parameter.
    pub xtol: T,
    pub analysis: AnalysisOptions<T>,
}

impl<T: Real> Default for ScanOptions<T> {
    fn default() -> Self {
        Self {
            samples: 200,
            xtol: T::lit(1e-13),
            analysis: AnalysisOptions {
                authority: Detector::Shooting,
                ..AnalysisOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectSample<T> {
    pub param: T,
    pub defect: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRoot<T> {
    pub param: T,
    pub report: ResonanceReport<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult<T> {
    pub roots: Vec<ScanRoot<T>>,
    pub trace: Vec<DefectSample<T>>,
}

/// Locates every sign change of the shooting defect of `family(param)` over
/// `range`, refines it with Brent's method and analyzes the root.
pub fn resonance_scan<T: Real>(
    family: impl Fn(T) -> Result<Potential<T>>,
    range: (T, T),
    lambda1: T,
    opts: &ScanOptions<T>,
) -> Result<ScanResult<T>> {
    let (lo, hi) = range;
    if !(lo < hi) || opts.samples < 2 {
        return Err(Error::InvalidArgument("scan needs lo < hi and at least two samples".into()));
    }
    let defect = |p: T| -> Result<T> {
        let pot = family(p)?;
        Ok(shoot(&pot, &opts.analysis.shooting)?.match_defect)
    };
    let mut trace = Vec::with_capacity(opts.samples);
    for i in 0..opts.samples {
        let p = lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(opts.samples - 1);
        trace.push(DefectSample { param: p, defect: defect(p)? });
    }
    let mut params = Vec::new();
    for w in trace.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.defect == T::zero() {
            params.push(a.param);
        } else if a.defect.signum() != b.defect.signum() && b.defect != T::zero() {
            params.push(roots::brent(defect, a.param, b.param, opts.xtol, 200)?);
        }
    }
    if let Some(last) = trace.last() {
        if last.defect == T::zero() {
            params.push(last.param);
        }
    }
    let mut roots = Vec::with_capacity(params.len());
    for p in params {
        let pot = family(p)?;
        let report = analyze(&pot, lambda1, &opts.analysis)?;
        roots.push(ScanRoot { param: p, report });
    }
    log::debug!("scan over [{lo}, {hi}] found {} root(s)", roots.len());
    Ok(ScanResult { roots, trace })
}
