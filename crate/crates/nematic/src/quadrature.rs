//! Weighted quadrature for axisymmetric averages on the sphere.
//!
//! For a function of the polar cosine `r = ω·Ω`, the normalized surface
//! measure on `S^{n-1}` reduces to `C_n (1-r²)^{(n-3)/2} dr` on `(-1, 1)`.
//! [`QuadratureRule`] is a Gauss–Gegenbauer rule for exactly that weight,
//! so the endpoint singularity at `n = 2` is absorbed into the weights.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, invalid, Result};

/// Node count used when callers do not ask for a specific resolution.
pub const DEFAULT_NODES: usize = 128;

/// Gauss rule for the weight `(1-r²)^{(n-3)/2}` on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the `m`-point rule for dimension `n`.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("dimension n = {n} must be at least 2")));
        }
        if m < 1 {
            return Err(invalid("node count must be at least 1"));
        }
        let a = (n as f64 - 3.0) / 2.0;
        let (nodes, weights) = gauss_gegenbauer(m, a);
        Ok(Self { n, nodes, weights })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ wᵢ k(rᵢ)`, i.e. `∫ k(r) (1-r²)^{(n-3)/2} dr`.
    pub fn integrate(&self, k: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * k(r))
            .sum()
    }

    /// Gibbs weights `wᵢ e^{η rᵢ²} / Z`, normalized to sum to one.
    ///
    /// The exponent is shifted by `η` before exponentiation so large `η` does not overflow.
    pub fn gibbs_weights(&self, eta: f64) -> Vec<f64> {
        let mut g: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * (eta * (r * r - 1.0)).exp())
            .collect();
        let z: f64 = g.iter().sum();
        for v in &mut g {
            *v /= z;
        }
        g
    }

    /// Average of `k(ω·Ω)` against the Gibbs density `e^{η (ω·Ω)²}`.
    pub fn average(&self, k: impl Fn(f64) -> f64, eta: f64) -> Result<f64> {
        axisymmetric_average(k, eta, self)
    }
}

/// Builds the `m`-point rule for dimension `n`.
pub fn build_rule(n: usize, m: usize) -> Result<QuadratureRule> {
    QuadratureRule::new(n, m)
}

/// Process-wide cache of immutable rules, keyed by `(n, m)`.
pub fn shared_rule(n: usize, m: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&(n, m)) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(QuadratureRule::new(n, m)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert((n, m), rule.clone());
    Ok(rule)
}

/// `∫ k(r) e^{ηr²} w(r) dr / ∫ e^{ηr²} w(r) dr` with `w = (1-r²)^{(n-3)/2}`.
pub fn axisymmetric_average(k: impl Fn(f64) -> f64, eta: f64, rule: &QuadratureRule) -> Result<f64> {
    if !eta.is_finite() {
        return Err(domain(format!("non-finite eta = {eta}")));
    }
    let g = rule.gibbs_weights(eta);
    let mut acc = 0.0;
    for (&r, &gi) in rule.nodes.iter().zip(&g) {
        let v = k(r);
        if !v.is_finite() {
            return Err(domain(format!("integrand is not finite at r = {r}")));
        }
        acc += gi * v;
    }
    Ok(acc)
}

/// `∫₋₁¹ (1-r²)^{(n-3)/2} dr = √π Γ((n-1)/2) / Γ(n/2)`.
pub fn weight_total(n: usize) -> f64 {
    let nf = n as f64;
    (std::f64::consts::PI.sqrt().ln() + ln_gamma((nf - 1.0) / 2.0) - ln_gamma(nf / 2.0)).exp()
}

/// Surface area of the unit sphere `S^{n-1}` in `ℝⁿ` (unnormalized).
pub fn sphere_area(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * std::f64::consts::PI.powf(nf / 2.0) / gamma(nf / 2.0)
}

/// Recurrence coefficient `β_k` of the monic Gegenbauer polynomials with weight `(1-x²)^a`.
fn gegenbauer_beta(k: usize, a: f64) -> f64 {
    let k = k as f64;
    if k == 1.0 {
        1.0 / (3.0 + 2.0 * a)
    } else {
        k * (k + 2.0 * a) / ((2.0 * k + 2.0 * a + 1.0) * (2.0 * k + 2.0 * a - 1.0))
    }
}

/// Orthonormal polynomials `p̃_0 … p̃_m` at `x` and the derivative of `p̃_m`.
///
/// Returns `(p̃_m(x), p̃_m'(x), Σ_{k<m} p̃_k(x)²)`.
fn orthonormal_eval(x: f64, m: usize, sqrt_beta: &[f64], mu0: f64) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut dp_prev = 0.0;
    let mut p = 1.0 / mu0.sqrt();
    let mut dp = 0.0;
    let mut sum_sq = 0.0;
    for k in 0..m {
        sum_sq += p * p;
        let b_next = sqrt_beta[k + 1];
        let b_k = sqrt_beta[k];
        let p_next = (x * p - b_k * p_prev) / b_next;
        let dp_next = (p + x * dp - b_k * dp_prev) / b_next;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
    }
    (p, dp, sum_sq)
}

/// Gauss–Gegenbauer nodes and weights for the weight `(1-x²)^a`, `a > -1`.
///
/// Starting values come from the eigenvalues of the Jacobi matrix; each node is then
/// polished by Newton iteration on the three-term recurrence, and the weights are the
/// Christoffel numbers `1 / Σ_k p̃_k(xᵢ)²`.
pub fn gauss_gegenbauer(m: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    let mu0 = (std::f64::consts::PI.sqrt().ln() + ln_gamma(a + 1.0) - ln_gamma(a + 1.5)).exp();
    // sqrt_beta[k] couples p̃_{k-1} and p̃_k; index 0 is unused.
    let sqrt_beta: Vec<f64> = (0..=m)
        .map(|k| if k == 0 { 0.0 } else { gegenbauer_beta(k, a).sqrt() })
        .collect();

    let mut jacobi = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        jacobi[(k - 1, k)] = sqrt_beta[k];
        jacobi[(k, k - 1)] = sqrt_beta[k];
    }
    let mut guess: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    guess.sort_by(|x, y| x.total_cmp(y));

    let mut nodes = Vec::with_capacity(m);
    for &x0 in &guess {
        let mut x = x0;
        for _ in 0..8 {
            let (p, dp, _) = orthonormal_eval(x, m, &sqrt_beta, mu0);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-17 * x.abs().max(1.0) {
                break;
            }
        }
        nodes.push(x.clamp(-1.0, 1.0));
    }
    // enforce exact reflection symmetry of the rule
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let s = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -s;
        nodes[j] = s;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| 1.0 / orthonormal_eval(x, m, &sqrt_beta, mu0).2)
        .collect();
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    (nodes, weights)
}

/// Radially symmetric interaction kernel `x ↦ K(|x|)` on `ℝⁿ`.
pub struct RadialKernel {
    n: usize,
    support: Option<f64>,
    profile: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for RadialKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialKernel")
            .field("n", &self.n)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl RadialKernel {
    /// Kernel from a radial profile; `support = None` means unbounded support.
    pub fn new(
        n: usize,
        support: Option<f64>,
        profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if n < 1 {
            return Err(invalid("kernel dimension must be positive"));
        }
        if let Some(r) = support {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid(format!("support radius {r} must be positive and finite")));
            }
        }
        Ok(Self {
            n,
            support,
            profile: Box::new(profile),
        })
    }

    /// Unit-mass Gaussian with identity covariance.
    pub fn gaussian(n: usize) -> Self {
        let norm = (2.0 * std::f64::consts::PI).powf(-(n as f64) / 2.0);
        Self {
            n,
            support: None,
            profile: Box::new(move |xi| norm * (-0.5 * xi * xi).exp()),
        }
    }

    /// Normalized indicator of the ball of the given radius.
    pub fn uniform_ball(n: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("ball radius {radius} must be positive and finite")));
        }
        let volume = sphere_area(n) * radius.powi(n as i32) / n as f64;
        let height = 1.0 / volume;
        Self::new(n, Some(radius), move |xi| if xi <= radius { height } else { 0.0 })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }

    pub fn eval(&self, xi: f64) -> f64 {
        (self.profile)(xi)
    }

    /// Radius beyond which `K(ξ) ξ^{n+1} < 1e-16` (the support radius when it is finite).
    fn truncation_radius(&self) -> Result<f64> {
        if let Some(r) = self.support {
            return Ok(r);
        }
        let p = self.n as i32 + 1;
        let tail = |xi: f64| self.eval(xi).abs() * xi.powi(p);
        let mut r = 1.0;
        for _ in 0..200 {
            // require the tail to stay small over a stretch, not at a single point
            if (0..8).all(|j| tail(r * (1.0 + j as f64 / 8.0)) < 1e-16) {
                return Ok(r);
            }
            r *= 1.25;
        }
        Err(domain("kernel second moment does not converge"))
    }

    /// `∫_{ℝⁿ} K(|x|) |x|^p dx`.
    fn radial_moment(&self, p: i32) -> Result<f64> {
        let r = self.truncation_radius()?;
        let n = self.n as i32;
        let f = |xi: f64| self.eval(xi) * xi.powi(n - 1 + p);
        let v = adaptive_integrate(&f, 0.0, r, 1e-12)?;
        Ok(sphere_area(self.n) * v)
    }

    /// `∫ K(|x|) dx`, which must be one for an admissible kernel.
    pub fn mass(&self) -> Result<f64> {
        self.radial_moment(0)
    }
}

/// Nonlocality moment `β = (1/2n) ∫ K(|x|) |x|² dx`.
pub fn kernel_beta(kernel: &RadialKernel) -> Result<f64> {
    let mass = kernel.mass()?;
    if (mass - 1.0).abs() > 1e-8 {
        return Err(invalid(format!("kernel is not normalized: mass = {mass}")));
    }
    let m2 = kernel.radial_moment(2)?;
    if !m2.is_finite() {
        return Err(domain("kernel second moment is not finite"));
    }
    Ok((m2 / (2.0 * kernel.n as f64)).max(0.0))
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WEIGHTS_K[7] * fc;
    let mut g = GK_WEIGHTS_G[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += GK_WEIGHTS_K[i] * s;
        if i % 2 == 1 {
            g += GK_WEIGHTS_G[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7, 15) integration to an absolute tolerance.
pub fn adaptive_integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    let mut pieces = vec![(a, b, gauss_kronrod_15(f, a, b))];
    for _ in 0..5000 {
        let (total, err) = pieces
            .iter()
            .fold((0.0, 0.0), |(s, e), p| (s + p.2 .0, e + p.2 .1));
        if !total.is_finite() {
            return Err(domain("integrand is not finite"));
        }
        if err <= abs_tol {
            return Ok(total);
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("non-empty");
        let (lo, hi, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        pieces.push((lo, mid, gauss_kronrod_15(f, lo, mid)));
        pieces.push((mid, hi, gauss_kronrod_15(f, mid, hi)));
    }
    Err(domain("adaptive quadrature did not reach the requested tolerance"))
}
