//! Limit operators on the line: the point interaction parametrized by
//! `(c₁, c₂, λ̂)` and its Dirichlet-decoupled counterpart.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::resonance::Constants;
use crate::scalar::Real;

/// 2×2 complex matrix stored row-major.
pub type Mat2<T> = [[Complex<T>; 2]; 2];

/// Spectral parameter `k` with `k²` the energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Momentum<T>(Complex<T>);

impl<T: Real> Momentum<T> {
    /// Off-shell momentum; requires `Im k > 0`.
    pub fn new(k: Complex<T>) -> Result<Self> {
        if !(k.im > T::zero()) || !k.re.is_finite() || !k.im.is_finite() {
            return Err(Error::InvalidMomentum {
                re: k.re.as_f64(),
                im: k.im.as_f64(),
                reason: "resolvent evaluation requires Im k > 0",
            });
        }
        Ok(Self(k))
    }

    pub fn from_parts(re: T, im: T) -> Result<Self> {
        Self::new(Complex::new(re, im))
    }

    /// `k = i`, energy `-1`.
    pub fn imaginary_unit() -> Self {
        Self(Complex::new(T::zero(), T::one()))
    }

    pub fn value(&self) -> Complex<T> {
        self.0
    }

    pub fn energy(&self) -> Complex<T> {
        self.0 * self.0
    }
}

/// Coupling parameters of the limiting vertex. `lambda_hat = +∞` encodes
/// the Dirichlet-decoupled operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointInteraction<T> {
    c1: T,
    c2: T,
    lambda_hat: T,
}

fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

impl<T: Real> PointInteraction<T> {
    pub fn new(c1: T, c2: T, lambda_hat: T) -> Result<Self> {
        if !c1.is_finite() || !c2.is_finite() {
            return Err(Error::InvalidArgument("c1 and c2 must be finite".into()));
        }
        if lambda_hat.is_nan() || lambda_hat == T::neg_infinity() {
            return Err(Error::InvalidArgument(
                "lambda_hat must be a real number or +inf".into(),
            ));
        }
        if c1 * c1 + c2 * c2 <= T::zero() {
            return Err(Error::VanishingCouplings);
        }
        Ok(Self { c1, c2, lambda_hat })
    }

    pub fn from_constants(c: &Constants<T>) -> Result<Self> {
        Self::new(c.c1, c.c2, c.lambda_hat)
    }

    /// Free line: `c₁ = 1`, `c₂ = 0`, `λ̂ = 0`.
    pub fn free() -> Self {
        Self {
            c1: T::one(),
            c2: T::zero(),
            lambda_hat: T::zero(),
        }
    }

    /// `δ` interaction of strength `alpha`.
    pub fn delta(alpha: T) -> Result<Self> {
        Self::new(T::one(), T::zero(), alpha)
    }

    pub fn dirichlet() -> Self {
        Self {
            c1: T::one(),
            c2: T::zero(),
            lambda_hat: T::infinity(),
        }
    }

    pub fn c1(&self) -> T {
        self.c1
    }

    pub fn c2(&self) -> T {
        self.c2
    }

    pub fn lambda_hat(&self) -> T {
        self.lambda_hat
    }

    pub fn is_dirichlet(&self) -> bool {
        self.lambda_hat.is_infinite()
    }

    /// `c₁² + c₂²`.
    pub fn norm_sq(&self) -> T {
        self.c1 * self.c1 + self.c2 * self.c2
    }

    /// `c₂ = -c₁`, where the generic boundary conditions degenerate.
    pub fn special_branch(&self) -> bool {
        (self.c1 + self.c2).abs() <= T::epsilon() * (self.c1.abs() + self.c2.abs())
    }

    /// `(tc₁, tc₂, t²λ̂)`, which describes the same operator.
    pub fn rescaled(&self, t: T) -> Result<Self> {
        Self::new(t * self.c1, t * self.c2, t * t * self.lambda_hat)
    }

    pub fn vertex_unitary(&self) -> Mat2<T> {
        vertex_unitary(self.c1, self.c2, self.lambda_hat).expect("validated couplings")
    }
}

/// Vertex unitary `U` of the coupling `(U - I)Ψ + i(U + I)Ψ' = 0`.
pub fn vertex_unitary<T: Real>(c1: T, c2: T, lambda_hat: T) -> Result<Mat2<T>> {
    if c1 * c1 + c2 * c2 <= T::zero() {
        return Err(Error::VanishingCouplings);
    }
    let zero = Complex::new(T::zero(), T::zero());
    if lambda_hat.is_infinite() && lambda_hat > T::zero() {
        let m = re(-T::one());
        return Ok([[m, zero], [zero, m]]);
    }
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let i = i_unit::<T>();
    let lh = i * lambda_hat;
    let den = re(two * (c1 * c1 + c2 * c2)) + lh;
    let off = re(two * (c1 * c1 - c2 * c2)) / den;
    Ok([
        [(re(-four * c1 * c2) - lh) / den, off],
        [off, (re(four * c1 * c2) - lh) / den],
    ])
}

fn mat_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn adjoint<T: Real>(a: &Mat2<T>) -> Mat2<T> {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Frobenius norm of `A A† - I`.
pub fn unitarity_defect<T: Real>(a: &Mat2<T>) -> T {
    let p = mat_mul(a, &adjoint(a));
    let mut acc = T::zero();
    for (i, row) in p.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let d = if i == j { x - re(T::one()) } else { x };
            acc += d.norm_sqr();
        }
    }
    acc.sqrt()
}

/// Largest entrywise difference of two matrices.
pub fn max_abs_diff<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> T {
    let mut m = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

/// One-sided boundary values at the vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryData<T> {
    pub f_plus: Complex<T>,
    pub f_minus: Complex<T>,
    pub df_plus: Complex<T>,
    pub df_minus: Complex<T>,
}

impl<T: Real> BoundaryData<T> {
    pub fn real(f_plus: T, f_minus: T, df_plus: T, df_minus: T) -> Self {
        Self {
            f_plus: re(f_plus),
            f_minus: re(f_minus),
            df_plus: re(df_plus),
            df_minus: re(df_minus),
        }
    }

    /// Sum of the moduli of the four entries.
    pub fn magnitude(&self) -> T {
        self.f_plus.norm() + self.f_minus.norm() + self.df_plus.norm() + self.df_minus.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BcResiduals<T> {
    /// `|(U - I)Ψ + i(U + I)Ψ'|` with `Ψ = (f(0⁺), f(0⁻))`, `Ψ' = (f'(0⁺), -f'(0⁻))`.
    pub unitary_form: T,
    /// Residual of the explicit matching conditions.
    pub explicit: T,
}

impl<T: Real> BcResiduals<T> {
    pub fn max(&self) -> T {
        self.unitary_form.max(self.explicit)
    }
}

/// Evaluates both forms of the vertex conditions on `data`.
pub fn check_boundary_conditions<T: Real>(pi: &PointInteraction<T>, data: &BoundaryData<T>) -> BcResiduals<T> {
    let u = pi.vertex_unitary();
    let one = re(T::one());
    let i = i_unit::<T>();
    let psi = [data.f_plus, data.f_minus];
    let dpsi = [data.df_plus, -data.df_minus];
    let mut unitary_form = T::zero();
    for r in 0..2 {
        let mut acc = Complex::new(T::zero(), T::zero());
        for c in 0..2 {
            let id = if r == c { one } else { Complex::new(T::zero(), T::zero()) };
            acc += (u[r][c] - id) * psi[c] + i * (u[r][c] + id) * dpsi[c];
        }
        unitary_form += acc.norm_sqr();
    }
    let unitary_form = unitary_form.sqrt();

    let (c1, c2, lh) = (pi.c1, pi.c2, pi.lambda_hat);
    let explicit = if pi.is_dirichlet() {
        (data.f_plus.norm_sqr() + data.f_minus.norm_sqr()).sqrt()
    } else if pi.special_branch() {
        let a = data.f_minus;
        let b = data.df_plus - data.f_plus * (lh / (T::lit(4.0) * c1 * c1));
        (a.norm_sqr() + b.norm_sqr()).sqrt()
    } else {
        let (p, m) = (c1 + c2, c1 - c2);
        let a = data.f_plus * p - data.f_minus * m;
        let b = data.df_plus * m - data.df_minus * p - data.f_minus * (lh / p);
        (a.norm_sqr() + b.norm_sqr()).sqrt()
    };
    BcResiduals {
        unitary_form,
        explicit,
    }
}

/// Solutions of the explicit conditions spanned by two free parameters
/// `(a, b)`; used to probe equivalence of the two forms.
pub fn admissible_boundary_data<T: Real>(pi: &PointInteraction<T>, a: Complex<T>, b: Complex<T>) -> BoundaryData<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let (c1, c2, lh) = (pi.c1, pi.c2, pi.lambda_hat);
    if pi.is_dirichlet() {
        BoundaryData {
            f_plus: zero,
            f_minus: zero,
            df_plus: a,
            df_minus: b,
        }
    } else if pi.special_branch() {
        BoundaryData {
            f_plus: a,
            f_minus: zero,
            df_plus: a * (lh / (T::lit(4.0) * c1 * c1)),
            df_minus: b,
        }
    } else if (c1 - c2).abs() <= T::epsilon() * (c1.abs() + c2.abs()) {
        // c₂ = c₁: f(0⁺) = 0 and f'(0⁻) fixed by f(0⁻)
        let p = c1 + c2;
        BoundaryData {
            f_plus: zero,
            f_minus: a,
            df_plus: b,
            df_minus: -a * (lh / (p * p)),
        }
    } else {
        let (p, m) = (c1 + c2, c1 - c2);
        BoundaryData {
            f_plus: a * m,
            f_minus: a * p,
            df_plus: (b * p + a * lh) / m,
            df_minus: b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringData<T> {
    pub k: T,
    pub t_left: Complex<T>,
    pub t_right: Complex<T>,
    pub r_left: Complex<T>,
    pub r_right: Complex<T>,
}

impl<T: Real> ScatteringData<T> {
    /// `S = [[T, Rʳ], [Rˡ, T]]`.
    pub fn matrix(&self) -> Mat2<T> {
        [[self.t_left, self.r_right], [self.r_left, self.t_right]]
    }

    /// `|T|² + |Rˡ|²`.
    pub fn flux(&self) -> T {
        self.t_left.norm_sqr() + self.r_left.norm_sqr()
    }
}

/// On-shell amplitudes at real momentum `k ≥ 0`.
pub fn scattering<T: Real>(pi: &PointInteraction<T>, k: T) -> Result<ScatteringData<T>> {
    if !(k >= T::zero()) || !k.is_finite() {
        return Err(Error::InvalidMomentum {
            re: k.as_f64(),
            im: 0.0,
            reason: "on-shell scattering requires real k >= 0",
        });
    }
    let zero = Complex::new(T::zero(), T::zero());
    let minus_one = re(-T::one());
    let (c1, c2, lh) = (pi.c1, pi.c2, pi.lambda_hat);
    let n = pi.norm_sq();
    let (t, rl, rr) = if pi.is_dirichlet() || (k == T::zero() && lh != T::zero()) {
        (zero, minus_one, minus_one)
    } else if lh == T::zero() {
        let t = re((c1 * c1 - c2 * c2) / n);
        let r = T::lit(2.0) * c1 * c2 / n;
        (t, re(r), re(-r))
    } else {
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let i = i_unit::<T>();
        let den = re(two * k * n) + i * lh;
        let t = re(two * k * (c1 * c1 - c2 * c2)) / den;
        let rl = (re(four * k * c1 * c2) - i * lh) / den;
        let rr = -(re(four * k * c1 * c2) + i * lh) / den;
        (t, rl, rr)
    };
    Ok(ScatteringData {
        k,
        t_left: t,
        t_right: t,
        r_left: rl,
        r_right: rr,
    })
}

/// The single negative eigenvalue present when `λ̂ < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundState<T> {
    /// Purely imaginary momentum `k₀ = iκ`.
    pub k0: Complex<T>,
    pub energy: T,
    /// Decay rate `κ = |λ̂| / (2(c₁² + c₂²))`.
    pub kappa: T,
    /// Amplitude on `s > 0`.
    pub amp_plus: T,
    /// Amplitude on `s < 0`.
    pub amp_minus: T,
}

impl<T: Real> BoundState<T> {
    /// `ψ₀(s)`; at `s = 0` the right-hand value is returned.
    pub fn value(&self, s: T) -> T {
        if s >= T::zero() {
            self.amp_plus * (-self.kappa * s).exp()
        } else {
            self.amp_minus * (self.kappa * s).exp()
        }
    }

    pub fn derivative(&self, s: T) -> T {
        if s >= T::zero() {
            -self.kappa * self.amp_plus * (-self.kappa * s).exp()
        } else {
            self.kappa * self.amp_minus * (self.kappa * s).exp()
        }
    }

    pub fn boundary_data(&self) -> BoundaryData<T> {
        BoundaryData::real(
            self.amp_plus,
            self.amp_minus,
            -self.kappa * self.amp_plus,
            self.kappa * self.amp_minus,
        )
    }
}

/// Bound state of the point interaction, `None` unless `λ̂ < 0`.
pub fn bound_state<T: Real>(pi: &PointInteraction<T>) -> Option<BoundState<T>> {
    let lh = pi.lambda_hat;
    if !(lh < T::zero()) {
        return None;
    }
    let n = pi.norm_sq();
    let kappa = lh.abs() / (T::lit(2.0) * n);
    let a = (lh.abs() / T::lit(2.0)).sqrt() / n;
    Some(BoundState {
        k0: Complex::new(T::zero(), kappa),
        energy: -kappa * kappa,
        kappa,
        amp_plus: a * (pi.c1 - pi.c2),
        amp_minus: a * (pi.c1 + pi.c2),
    })
}

/// `G_k(x) = (i/2k) e^{ik|x|}`.
pub fn free_resolvent_kernel<T: Real>(k: Momentum<T>, x: T) -> Complex<T> {
    let k = k.0;
    let i = i_unit::<T>();
    i / (k * T::lit(2.0)) * (i * k * x.abs()).exp()
}

/// `G'_k(x) = -sgn(x) e^{ik|x|} / 2`, with `sgn(0) = 0`.
pub fn free_resolvent_derivative<T: Real>(k: Momentum<T>, x: T) -> Complex<T> {
    if x == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let i = i_unit::<T>();
    (i * k.0 * x.abs()).exp() * (-x.signum() / T::lit(2.0))
}

/// Kernel of the Dirichlet-decoupled resolvent.
pub fn resolvent_dirichlet<T: Real>(k: Momentum<T>, s: T, sp: T) -> Complex<T> {
    let i = i_unit::<T>();
    free_resolvent_kernel(k, s - sp)
        + i * k.0 * T::lit(2.0) * free_resolvent_kernel(k, s) * free_resolvent_kernel(k, sp)
}

/// Kernel of the point-interaction resolvent; errors when `k²` is the
/// bound-state energy.
pub fn resolvent_point<T: Real>(pi: &PointInteraction<T>, k: Momentum<T>, s: T, sp: T) -> Result<Complex<T>> {
    if pi.is_dirichlet() {
        return Ok(resolvent_dirichlet(k, s, sp));
    }
    let kv = k.0;
    let i = i_unit::<T>();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let (c1, c2, lh) = (pi.c1, pi.c2, pi.lambda_hat);
    let den = kv * (two * pi.norm_sq()) + i * lh;
    let scale = (kv * (two * pi.norm_sq())).norm() + lh.abs();
    if den.norm() <= T::lit(64.0) * T::epsilon() * scale {
        return Err(Error::ResolventPole);
    }
    let g = |x: T| free_resolvent_kernel(k, x);
    let dg = |x: T| free_resolvent_derivative(k, x);
    let a = i * kv * two * (kv * (two * c2 * c2) + i * lh) / den;
    let b = i * (four * c2 * c2) / den;
    let c = kv * (four * c1 * c2) / den;
    Ok(g(s - sp) + a * g(s) * g(sp) + b * dg(s) * dg(sp) + c * (g(s) * dg(sp) + dg(s) * g(sp)))
}
