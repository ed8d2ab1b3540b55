//! Gauss–Legendre rules, composite panel grids, and product-integration
//! weights for kernels with a derivative jump (`|s - s'|`-type kinks).

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{Real, Scalar};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes by Newton iteration on the three-term Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        let one = T::one();
        let two = T::lit(2.0);
        for i in 0..(n + 1) / 2 {
            let mut x = T::lit((std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos());
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = two / ((one - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `∫_a^b f` with the rule mapped onto `[a, b]`.
    pub fn integrate<S: Scalar<Real = T>>(&self, a: T, b: T, mut f: impl FnMut(T) -> S) -> S {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(S::zero(), |acc, (&x, &w)| acc + f(mid + half * x) * S::from_real(w * half))
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize_lossy(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Panel and node counts of a composite Gauss–Legendre grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub panels_per_segment: usize,
    pub nodes_per_panel: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            panels_per_segment: 16,
            nodes_per_panel: 8,
        }
    }
}

impl GridSpec {
    pub fn refined(self) -> Self {
        Self {
            panels_per_segment: self.panels_per_segment * 2,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel<T> {
    pub lo: T,
    pub hi: T,
    /// Index of the panel's first node in the global node list.
    pub first: usize,
}

/// Composite Gauss–Legendre grid over a union of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    rule: GaussLegendre<T>,
    bary: Vec<T>,
    fine: GaussLegendre<T>,
    panels: Vec<Panel<T>>,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Grid<T> {
    /// Builds panels on each segment `[b_k, b_{k+1}]` of the sorted
    /// breakpoint list; panel edges always include the breakpoints.
    pub fn composite(breakpoints: &[T], spec: GridSpec) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidGrid("need at least two breakpoints".into()));
        }
        if spec.panels_per_segment == 0 || spec.nodes_per_panel == 0 {
            return Err(Error::InvalidGrid("panel and node counts must be positive".into()));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidGrid("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("breakpoints must be strictly increasing".into()));
        }
        let rule = GaussLegendre::new(spec.nodes_per_panel);
        let n = rule.len();
        let bary = barycentric_weights(rule.nodes());
        let fine = GaussLegendre::new(2 * n + 8);
        let mut panels = Vec::new();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let m = T::from_usize_lossy(spec.panels_per_segment);
        for seg in breakpoints.windows(2) {
            let h = (seg[1] - seg[0]) / m;
            for p in 0..spec.panels_per_segment {
                let lo = seg[0] + h * T::from_usize_lossy(p);
                let hi = if p + 1 == spec.panels_per_segment {
                    seg[1]
                } else {
                    seg[0] + h * T::from_usize_lossy(p + 1)
                };
                let half = (hi - lo) * T::lit(0.5);
                let mid = (hi + lo) * T::lit(0.5);
                panels.push(Panel {
                    lo,
                    hi,
                    first: nodes.len(),
                });
                for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                    nodes.push(mid + half * x);
                    weights.push(w * half);
                }
            }
        }
        Ok(Self {
            rule,
            bary,
            fine,
            panels,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn panels(&self) -> &[Panel<T>] {
        &self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.rule.len()
    }

    pub fn lo(&self) -> T {
        self.panels[0].lo
    }

    pub fn hi(&self) -> T {
        self.panels[self.panels.len() - 1].hi
    }

    /// Panel index owning node `i`.
    #[inline]
    pub fn panel_of_node(&self, i: usize) -> usize {
        i / self.rule.len()
    }

    /// Index of a panel whose open interior contains `x`.
    pub fn panel_containing(&self, x: T) -> Option<usize> {
        if x <= self.lo() || x >= self.hi() {
            return None;
        }
        let idx = self.panels.partition_point(|p| p.hi <= x);
        (idx < self.panels.len() && self.panels[idx].lo < x).then_some(idx)
    }

    /// Quadrature sum `Σ w_i f_i` of samples at the nodes.
    pub fn integrate_samples<S: Scalar<Real = T>>(&self, f: &[S]) -> S {
        assert_eq!(f.len(), self.len());
        self.weights
            .iter()
            .zip(f)
            .fold(S::zero(), |acc, (&w, &x)| acc + S::from_real(w) * x)
    }

    /// Quadrature of a function evaluated at the nodes.
    pub fn integrate<S: Scalar<Real = T>>(&self, mut f: impl FnMut(T) -> S) -> S {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(S::zero(), |acc, (&x, &w)| acc + f(x) * S::from_real(w))
    }

    /// Lagrange basis of panel `p` evaluated at `x`, written into `out`.
    fn lagrange_basis(&self, p: usize, x: T, out: &mut [T]) {
        let panel = self.panels[p];
        let xi = (T::lit(2.0) * x - panel.lo - panel.hi) / (panel.hi - panel.lo);
        let nodes = self.rule.nodes();
        if let Some(j) = nodes.iter().position(|&n| n == xi) {
            out.iter_mut().for_each(|o| *o = T::zero());
            out[j] = T::one();
            return;
        }
        let mut denom = T::zero();
        for ((o, &n), &b) in out.iter_mut().zip(nodes).zip(&self.bary) {
            *o = b / (xi - n);
            denom += *o;
        }
        out.iter_mut().for_each(|o| *o /= denom);
    }

    /// Weights `W_j ≈ ∫_{panel p} h(x) ℓ_j(x) dx` for an integrand `h` that
    /// is smooth on the panel except for a kink at `c`.
    fn panel_product_weights<S: Scalar<Real = T>>(
        &self,
        p: usize,
        c: T,
        h: &impl Fn(T) -> S,
        out: &mut [S],
    ) {
        let panel = self.panels[p];
        out.iter_mut().for_each(|o| *o = S::zero());
        let mut basis = vec![T::zero(); self.rule.len()];
        let pieces: [(T, T); 2] = [(panel.lo, c.max(panel.lo)), (c.min(panel.hi), panel.hi)];
        for (a, b) in pieces {
            if b <= a {
                continue;
            }
            let half = (b - a) * T::lit(0.5);
            let mid = (a + b) * T::lit(0.5);
            for (&x, &w) in self.fine.nodes().iter().zip(self.fine.weights()) {
                let s = mid + half * x;
                self.lagrange_basis(p, s, &mut basis);
                let hs = h(s) * S::from_real(w * half);
                for (o, &l) in out.iter_mut().zip(&basis) {
                    *o += hs * S::from_real(l);
                }
            }
        }
    }

    /// Weights `W_i` with `Σ_i W_i f(x_i) ≈ ∫ h(x) f(x) dx` where `h` has a
    /// derivative jump at `c`. The panel containing `c` (if any) uses product
    /// integration; every other node gets `h(x_i) w_i`.
    pub fn kink_weights<S: Scalar<Real = T>>(&self, c: T, h: impl Fn(T) -> S) -> Vec<S> {
        let mut out: Vec<S> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| h(x) * S::from_real(w))
            .collect();
        if let Some(p) = self.panel_containing(c) {
            let first = self.panels[p].first;
            let n = self.rule.len();
            self.panel_product_weights(p, c, &h, &mut out[first..first + n]);
        }
        out
    }

    /// Nyström matrix `K_ij` with `Σ_j K_ij f(x_j) ≈ ∫ g(|x_i - x|) f(x) dx`.
    ///
    /// With `product = true` the diagonal panel of every row is integrated
    /// against the Lagrange interpolant of `f`, which restores spectral
    /// accuracy for kernels with a kink on the diagonal. With
    /// `product = false` every entry is `g(|x_i - x_j|) w_j`.
    pub fn difference_kernel_matrix<S: Scalar<Real = T>>(
        &self,
        g: impl Fn(T) -> S,
        product: bool,
    ) -> Matrix<S> {
        let n = self.len();
        let mut m = Matrix::from_fn(n, n, |i, j| {
            g((self.nodes[i] - self.nodes[j]).abs()) * S::from_real(self.weights[j])
        });
        if product {
            let np = self.rule.len();
            let mut buf = vec![S::zero(); np];
            for i in 0..n {
                let p = self.panel_of_node(i);
                let xi = self.nodes[i];
                self.panel_product_weights(p, xi, &|x: T| g((xi - x).abs()), &mut buf);
                let first = self.panels[p].first;
                for (j, &b) in buf.iter().enumerate() {
                    m[(i, first + j)] = b;
                }
            }
        }
        m
    }
}

fn barycentric_weights<T: Real>(nodes: &[T]) -> Vec<T> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let prod = nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .fold(T::one(), |acc, (_, &xm)| acc * (xj - xm));
            T::one() / prod
        })
        .collect()
}
