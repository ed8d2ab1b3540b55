//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use squeezeline::geometry::{effective_potential, CurvatureProfile, Potential};
use squeezeline::quadrature::GridSpec;
use squeezeline::Result;

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Dirichlet-boxed finite-difference Green's function of
/// `-d²/ds² + w(s) + κ²` on `[-half_box, half_box]` with spacing `h`.
pub struct FdResolvent {
    pub h: f64,
    pub half_box: f64,
    diag: Vec<f64>,
}

impl FdResolvent {
    pub fn new(w: impl Fn(f64) -> f64, kappa: f64, half_box: f64, h: f64) -> Self {
        let n = (2.0 * half_box / h).round() as usize - 1;
        let diag = (1..=n)
            .map(|i| {
                let s = -half_box + i as f64 * h;
                2.0 / (h * h) + w(s) + kappa * kappa
            })
            .collect();
        Self { h, half_box, diag }
    }

    /// Interior index of the grid point `s` (which must lie on the grid).
    pub fn index(&self, s: f64) -> usize {
        let x = (s + self.half_box) / self.h;
        let i = x.round();
        assert!((x - i).abs() < 1e-6, "{s} is not a grid point");
        i as usize - 1
    }

    /// Column `G(·, s')` from a discrete delta at `s'` (Thomas algorithm).
    pub fn column(&self, sp: f64) -> Vec<f64> {
        let n = self.diag.len();
        let off = -1.0 / (self.h * self.h);
        let mut rhs = vec![0.0; n];
        rhs[self.index(sp)] = 1.0 / self.h;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = off / self.diag[0];
        d[0] = rhs[0] / self.diag[0];
        for i in 1..n {
            let m = self.diag[i] - off * c[i - 1];
            c[i] = off / m;
            d[i] = (rhs[i] - off * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }
}

pub fn square_well(sqrt_depth_times_a: f64, a: f64) -> Result<Potential<f64>> {
    let p = sqrt_depth_times_a / a;
    Potential::square_well(p * p, a, GridSpec::default())
}

pub fn arc_potential(theta: f64) -> Result<Potential<f64>> {
    effective_potential(&CurvatureProfile::constant_arc(theta, 1.0)?, GridSpec::default())
}

/// Asymmetric two-step well: `-p²` on `[-1, 0]`, `-p²/4` on `[0, 1.5]`.
pub fn step_well(p: f64) -> Result<Potential<f64>> {
    Potential::from_fn(&[-1.0, 0.0, 1.5], GridSpec::default(), move |s| {
        if s < 0.0 {
            -p * p
        } else {
            -p * p / 4.0
        }
    })
}

/// Resonance constants read off from the tails of the left-normalized
/// resonance function: `c₁ = -(ψ₊ + ψ₋)/2`, `c₂ = (ψ₊ - ψ₋)/2`.
pub fn constants_from_tails(right_tail: f64) -> (f64, f64) {
    (-(right_tail + 1.0) / 2.0, (right_tail - 1.0) / 2.0)
}
