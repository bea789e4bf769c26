//! Generalized collision invariants of a uniaxial Gibbs state.
//!
//! The vector GCI is `ψ(ω) = h_η(ω·Ω) P_{Ω^⊥}ω`, where `h_η` is the odd bounded
//! solution of the singular boundary-value problem
//!
//! ```text
//! (1-r²) h'' + (2η(1-r²) - (n+1)) r h' - (2ηr² + n - 1) h = r,   r ∈ (-1, 1).
//! ```
//!
//! `h_η` is expanded in the odd polynomials `r T_{2k}(r)`, `k < K`. Two projections
//! are available: testing the equation against the same polynomials under the
//! Gegenbauer weight (no exponential factor, well conditioned for every `η`), and the
//! symmetric energy form with weight `(1-r²)^{(n±1)/2} e^{ηr²}`, whose condition
//! number grows like `e^η`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::equilibria::s2;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{shared_rule, QuadratureRule};

/// Default number of odd basis polynomials.
pub const DEFAULT_BASIS: usize = 48;

/// Relative residual above which a solve is reported as under-resolved.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// How the boundary-value problem is projected onto the polynomial space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Strong form tested against the basis with the weight `(1-r²)^{(n-3)/2}`.
    #[default]
    Jacobi,
    /// Symmetric weak form with the Gibbs-weighted energy inner product.
    /// The weight `e^{η(r²-1)}` makes the Gram matrix ill-conditioned, and
    /// beyond `η ≈ 15` the strong residual no longer meets [`RESIDUAL_TOLERANCE`].
    Energy,
}

/// `T_k(s)`, `T_k'(s)`, `T_k''(s)` for `k < count`.
fn chebyshev_with_derivatives(s: f64, count: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut t = vec![0.0; count.max(2)];
    let mut dt = vec![0.0; count.max(2)];
    let mut d2t = vec![0.0; count.max(2)];
    t[0] = 1.0;
    t[1] = s;
    dt[1] = 1.0;
    for k in 1..count.saturating_sub(1) {
        t[k + 1] = 2.0 * s * t[k] - t[k - 1];
        dt[k + 1] = 2.0 * t[k] + 2.0 * s * dt[k] - dt[k - 1];
        d2t[k + 1] = 4.0 * dt[k] + 2.0 * s * d2t[k] - d2t[k - 1];
    }
    t.truncate(count);
    dt.truncate(count);
    d2t.truncate(count);
    (t, dt, d2t)
}

/// Values, first and second derivatives of `φ_k(r) = r T_{2k}(r) = r T_k(2r² - 1)`.
fn basis_at(r: f64, count: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let s = 2.0 * r * r - 1.0;
    let (t, dt, d2t) = chebyshev_with_derivatives(s, count);
    let phi = t.iter().map(|v| r * v).collect();
    let dphi = t.iter().zip(&dt).map(|(a, b)| a + 4.0 * r * r * b).collect();
    let d2phi = dt
        .iter()
        .zip(&d2t)
        .map(|(a, b)| 12.0 * r * a + 16.0 * r * r * r * b)
        .collect();
    (phi, dphi, d2phi)
}

/// Discrete `h_η` with its diagnostics.
#[derive(Debug, Clone)]
pub struct GciSolution {
    eta: f64,
    n: usize,
    scheme: Scheme,
    coeffs: Vec<f64>,
    residual: f64,
    compat_defect: f64,
    rule: Arc<QuadratureRule>,
}

impl GciSolution {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn basis_size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Relative residual `‖Lh - r‖ / ‖r‖` in `L²((1-r²)^{(n-1)/2} dr)`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Gibbs-weighted mean of the source term; zero when the problem is solvable.
    pub fn compatibility_defect(&self) -> f64 {
        self.compat_defect
    }

    /// The quadrature rule used for assembly, reused for averages of `h`.
    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// `(h, h', h'')` at `r`.
    pub fn eval_with_derivatives(&self, r: f64) -> (f64, f64, f64) {
        let (phi, dphi, d2phi) = basis_at(r, self.coeffs.len());
        let dot = |v: &[f64]| v.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum::<f64>();
        (dot(&phi), dot(&dphi), dot(&d2phi))
    }

    pub fn h(&self, r: f64) -> f64 {
        self.eval_with_derivatives(r).0
    }

    /// `L h - r` at `r`.
    pub fn strong_residual(&self, r: f64) -> f64 {
        let (h, dh, d2h) = self.eval_with_derivatives(r);
        apply_operator(self.eta, self.n, r, h, dh, d2h) - r
    }

    /// `(∫(1-r²)^{(n-1)/2} h² dr, ∫(1-r²)^{(n+1)/2} (h')² dr)`.
    pub fn weighted_norms(&self) -> (f64, f64) {
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for (&r, &w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            let (h, dh, _) = self.eval_with_derivatives(r);
            let s = 1.0 - r * r;
            l2 += w * s * h * h;
            h1 += w * s * s * dh * dh;
        }
        (l2, h1)
    }
}

fn apply_operator(eta: f64, n: usize, r: f64, h: f64, dh: f64, d2h: f64) -> f64 {
    let nf = n as f64;
    let s = 1.0 - r * r;
    s * d2h + (2.0 * eta * s - (nf + 1.0)) * r * dh - (2.0 * eta * r * r + nf - 1.0) * h
}

fn check_inputs(eta: f64, n: usize, basis: usize) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(invalid(format!("eta = {eta} must be finite and non-negative")));
    }
    if n < 2 {
        return Err(invalid(format!("dimension n = {n} must be at least 2")));
    }
    if basis < 1 {
        return Err(invalid("basis size must be positive"));
    }
    Ok(())
}

/// Solves for `h_η` with the default scheme.
pub fn solve_h(eta: f64, n: usize, basis: usize) -> Result<GciSolution> {
    solve_h_with(eta, n, basis, Scheme::default())
}

/// Solves for `h_η` with an explicit projection scheme.
pub fn solve_h_with(eta: f64, n: usize, basis: usize, scheme: Scheme) -> Result<GciSolution> {
    check_inputs(eta, n, basis)?;
    let k = basis;
    let rule = shared_rule(n, 4 * k)?;
    let nodes = rule.nodes();
    let weights = rule.weights();

    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut b = DVector::<f64>::zeros(k);
    for (&r, &w) in nodes.iter().zip(weights) {
        let (phi, dphi, d2phi) = basis_at(r, k);
        let s = 1.0 - r * r;
        match scheme {
            Scheme::Jacobi => {
                let lphi: Vec<f64> = (0..k)
                    .map(|j| apply_operator(eta, n, r, phi[j], dphi[j], d2phi[j]))
                    .collect();
                for i in 0..k {
                    let wi = w * phi[i];
                    for j in 0..k {
                        a[(i, j)] += wi * lphi[j];
                    }
                    b[i] += wi * r;
                }
            }
            Scheme::Energy => {
                let e = w * (eta * (r * r - 1.0)).exp();
                let nf = n as f64;
                let mass = e * s * (2.0 * eta * r * r + nf - 1.0);
                let stiff = e * s * s;
                for i in 0..k {
                    for j in 0..k {
                        a[(i, j)] += stiff * dphi[i] * dphi[j] + mass * phi[i] * phi[j];
                    }
                    b[i] -= e * s * r * phi[i];
                }
            }
        }
    }

    let coeffs = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::NumericDomain("singular GCI system".into()))?;
    let coeffs: Vec<f64> = coeffs.iter().copied().collect();

    // residual of the strong form, and the solvability defect of the source
    let mut res2 = 0.0;
    let mut src2 = 0.0;
    let mut compat = 0.0;
    let mut mass = 0.0;
    let gibbs = rule.gibbs_weights(eta);
    for ((&r, &w), &g) in nodes.iter().zip(weights).zip(&gibbs) {
        let (phi, dphi, d2phi) = basis_at(r, k);
        let dot = |v: &[f64]| v.iter().zip(&coeffs).map(|(x, y)| x * y).sum::<f64>();
        let lh = apply_operator(eta, n, r, dot(&phi), dot(&dphi), dot(&d2phi));
        let s = 1.0 - r * r;
        res2 += w * s * (lh - r) * (lh - r);
        src2 += w * s * r * r;
        compat += g * r * s.sqrt();
        mass += g;
    }
    let residual = (res2 / src2).sqrt();
    if !residual.is_finite() || residual > RESIDUAL_TOLERANCE {
        return Err(Error::ResolutionInsufficient {
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(GciSolution {
        eta,
        n,
        scheme,
        coeffs,
        residual,
        compat_defect: (compat / mass).abs(),
        rule,
    })
}

/// `g(θ) = -2η h_η(cos θ) sin θ` together with its first two derivatives.
#[derive(Debug, Clone)]
pub struct GProfile {
    solution: GciSolution,
}

impl GProfile {
    pub fn solution(&self) -> &GciSolution {
        &self.solution
    }

    /// `(g, g', g'')` at `θ`.
    pub fn eval_with_derivatives(&self, theta: f64) -> (f64, f64, f64) {
        let eta = self.solution.eta;
        let (c, s) = (theta.cos(), theta.sin());
        let (h, dh, d2h) = self.solution.eval_with_derivatives(c);
        let g = -2.0 * eta * h * s;
        let dg = -2.0 * eta * (-dh * s * s + h * c);
        let d2g = -2.0 * eta * (d2h * s * s * s - 3.0 * dh * s * c - h * s);
        (g, dg, d2g)
    }

    pub fn g(&self, theta: f64) -> f64 {
        self.eval_with_derivatives(theta).0
    }

    /// Residual of `(sin^{n-2} g')'/sin^{n-2} - U'g' - (n-2)g/sin² + U'` with `U' = 2η cos θ sin θ`.
    pub fn residual(&self, theta: f64) -> f64 {
        let n = self.solution.n as f64;
        let eta = self.solution.eta;
        let (g, dg, d2g) = self.eval_with_derivatives(theta);
        g_equation_residual(n, eta, theta, g, dg, d2g)
    }
}

fn g_equation_residual(n: f64, eta: f64, theta: f64, g: f64, dg: f64, d2g: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    let du = 2.0 * eta * c * s;
    d2g + (n - 2.0) * c / s * dg - du * dg - (n - 2.0) * g / (s * s) + du
}

/// Solves for `g` through the `h` formulation.
pub fn solve_g(eta: f64, n: usize, basis: usize) -> Result<GProfile> {
    Ok(GProfile {
        solution: solve_h(eta, n, basis)?,
    })
}

/// Closed-form solution at `n = 2`.
///
/// At `n = 2` the `g` equation is first order in `g'`, with solution
/// `g(θ) = θ + C ∫₀^θ e^{-(η/2) cos 2φ} dφ`. Expanding the exponential in its
/// Fourier–Bessel series gives `g(θ) = -Σ_{k≥1} (-1)^k (I_k/I_0)(η/2) sin(2kθ)/k`.
#[derive(Debug, Clone)]
pub struct ClosedFormN2 {
    eta: f64,
    /// `I_k(η/2) / I_0(η/2)` for `k = 1 … terms`.
    ratios: Vec<f64>,
}

/// `I_k(x)/I_0(x)` for `k = 1 … terms` by backward recurrence on `I_k/I_{k-1}`.
pub fn bessel_i_ratios(x: f64, terms: usize) -> Vec<f64> {
    if x == 0.0 {
        return vec![0.0; terms];
    }
    let start = terms + 40 + (2.0 * x) as usize;
    let mut t = vec![0.0; start + 2];
    for k in (1..=start).rev() {
        t[k] = 1.0 / (2.0 * k as f64 / x + t[k + 1]);
    }
    let mut out = Vec::with_capacity(terms);
    let mut prod = 1.0;
    for tk in t.iter().skip(1).take(terms) {
        prod *= tk;
        out.push(prod);
    }
    out
}

/// Builds the `n = 2` closed form with `terms` Fourier modes.
pub fn h_closed_form_n2(eta: f64, terms: usize) -> Result<ClosedFormN2> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(invalid(format!("eta = {eta} must be finite and non-negative")));
    }
    Ok(ClosedFormN2 {
        eta,
        ratios: bessel_i_ratios(eta / 2.0, terms.max(1)),
    })
}

impl ClosedFormN2 {
    /// `h(r) = (1/2η) Σ (-1)^k (I_k/I_0)/k · U_{2k-1}(r)`; the `η → 0` limit `-r/4` at `η = 0`.
    pub fn h(&self, r: f64) -> f64 {
        if self.eta == 0.0 {
            return -r / 4.0;
        }
        // U_{2k-1}(r) = sin(2kθ)/sin θ, generated by the Chebyshev recurrence
        let mut u_prev = 1.0; // U_0
        let mut u = 2.0 * r; // U_1
        let mut acc = 0.0;
        for (i, &rk) in self.ratios.iter().enumerate() {
            let k = (i + 1) as f64;
            let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * rk / k * u;
            for _ in 0..2 {
                let next = 2.0 * r * u - u_prev;
                u_prev = u;
                u = next;
            }
        }
        acc / (2.0 * self.eta)
    }

    /// `(g, g', g'')` at `θ`.
    pub fn g_with_derivatives(&self, theta: f64) -> (f64, f64, f64) {
        let (mut g, mut dg, mut d2g) = (0.0, 0.0, 0.0);
        for (i, &rk) in self.ratios.iter().enumerate() {
            let k = (i + 1) as f64;
            let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let (sn, cs) = (2.0 * k * theta).sin_cos();
            g -= sign * rk * sn / k;
            dg -= sign * rk * 2.0 * cs;
            d2g += sign * rk * 4.0 * k * sn;
        }
        (g, dg, d2g)
    }

    pub fn g(&self, theta: f64) -> f64 {
        self.g_with_derivatives(theta).0
    }

    /// Residual of `g'' - η sin 2θ (g' - 1)`.
    pub fn residual(&self, theta: f64) -> f64 {
        let (g, dg, d2g) = self.g_with_derivatives(theta);
        g_equation_residual(2.0, self.eta, theta, g, dg, d2g)
    }
}

/// The three auxiliary coefficients entering the director equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTildes {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub rho: f64,
    pub eta: f64,
}

fn check_consistent(eta: f64, n: usize, h: &GciSolution) -> Result<()> {
    if h.n != n || (h.eta - eta).abs() > 1e-14 * eta.abs().max(1.0) {
        return Err(invalid(format!(
            "GCI solved for (eta = {}, n = {}) used with (eta = {eta}, n = {n})",
            h.eta, h.n
        )));
    }
    Ok(())
}

/// `γ̃₁ = 2ηρ/(n-1) ⟨h X(1-X²)⟩`, `γ̃₂ = 2ηρ/(n-1) ⟨h X³(1-X²)⟩`, `γ̃₃ = (1-n/η)γ̃₁ - 2γ̃₂`.
pub fn gamma_tildes(eta: f64, n: usize, rho: f64, h: &GciSolution) -> Result<GammaTildes> {
    check_consistent(eta, n, h)?;
    if !(eta > 0.0) {
        return Err(invalid("gamma tildes need eta > 0"));
    }
    let rule = h.rule();
    let g = rule.gibbs_weights(eta);
    let (mut m1, mut m3) = (0.0, 0.0);
    for (&r, &gi) in rule.nodes().iter().zip(&g) {
        let v = gi * h.h(r) * r * (1.0 - r * r);
        m1 += v;
        m3 += v * r * r;
    }
    let nf = n as f64;
    let pref = 2.0 * eta * rho / (nf - 1.0);
    let gamma1 = pref * m1;
    let gamma2 = pref * m3;
    Ok(GammaTildes {
        gamma1,
        gamma2,
        gamma3: (1.0 - nf / eta) * gamma1 - 2.0 * gamma2,
        rho,
        eta,
    })
}

/// Nodes for integrals over `θ ∈ (0, π)`.
const THETA_NODES: usize = 256;

/// `⟨⟨g U'⟩⟩ = ∫₀^π g U' e^{η cos²θ} sin^{n-2}θ dθ / ∫₀^π e^{η cos²θ} sin^{n-2}θ dθ`,
/// evaluated in the angle variable by Gauss–Legendre quadrature.
pub fn bracket_g_du(eta: f64, n: usize, h: &GciSolution) -> Result<f64> {
    check_consistent(eta, n, h)?;
    let profile = GProfile {
        solution: h.clone(),
    };
    // the n = 3 rule has unit weight, i.e. Gauss–Legendre
    let legendre = shared_rule(3, THETA_NODES)?;
    let half = std::f64::consts::FRAC_PI_2;
    let (mut num, mut den) = (0.0, 0.0);
    for (&xi, &wi) in legendre.nodes().iter().zip(legendre.weights()) {
        let theta = half * (xi + 1.0);
        let (c, s) = (theta.cos(), theta.sin());
        let weight = wi * (eta * (c * c - 1.0)).exp() * s.powi(n as i32 - 2);
        num += weight * profile.g(theta) * 2.0 * eta * c * s;
        den += weight;
    }
    Ok(num / den)
}

/// Mobility constant `c = (n-1) Λ S₂(η) / ⟨⟨g U'⟩⟩`.
pub fn constant_c(eta: f64, n: usize, lambda: f64, h: &GciSolution) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::LambdaZero);
    }
    Ok(lambda * constant_c_lambda0(eta, n, h)?)
}

/// `c̃ = (n-1) S₂(η) / ⟨⟨g U'⟩⟩`, the mobility constant divided by `Λ`.
pub fn constant_c_lambda0(eta: f64, n: usize, h: &GciSolution) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(invalid("the mobility constant needs eta > 0"));
    }
    let den = bracket_g_du(eta, n, h)?;
    if !(den > 0.0) {
        return Err(Error::NumericDomain(format!(
            "non-positive bracket <<g U'>> = {den} at eta = {eta}"
        )));
    }
    Ok((n as f64 - 1.0) * s2(eta, n)? / den)
}

/// `c̃(η)` with a fresh default-resolution solve.
pub fn c_over_lambda(eta: f64, n: usize) -> Result<f64> {
    let h = solve_h(eta, n, DEFAULT_BASIS)?;
    constant_c_lambda0(eta, n, &h)
}
