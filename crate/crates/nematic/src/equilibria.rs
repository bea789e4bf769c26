//! Gibbs equilibria: order parameters, the nematic branch and fourth moments.
//!
//! A uniaxial Gibbs state with concentration `η` and axis `Ω` has density
//! proportional to `e^{η (ω·Ω)²}`. All of its moments reduce to one-dimensional
//! averages in `X = ω·Ω`, computed with [`QuadratureRule`].

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{shared_rule, QuadratureRule, DEFAULT_NODES};
use crate::tensor::{projector_perp, uniaxial, Tensor4};

/// Physical and model constants shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Space dimension.
    pub n: usize,
    /// Interaction strength.
    pub alpha: f64,
    /// Shape parameter of the molecules.
    pub lambda: f64,
    /// Polymer viscous coefficient.
    pub zeta: f64,
    /// Second moment of the interaction kernel.
    pub beta: f64,
}

impl ModelParams {
    pub fn new(n: usize, alpha: f64, lambda: f64, zeta: f64, beta: f64) -> Result<Self> {
        let p = Self {
            n,
            alpha,
            lambda,
            zeta,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!("dimension n = {} must be at least 2", self.n)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha = {} must be positive", self.alpha)));
        }
        if !(-1.0..=1.0).contains(&self.lambda) {
            return Err(invalid(format!("Lambda = {} must lie in [-1, 1]", self.lambda)));
        }
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(invalid(format!("zeta = {} must be non-negative", self.zeta)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(invalid(format!("beta = {} must be non-negative", self.beta)));
        }
        Ok(())
    }
}

/// A point of the stable nematic branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub rho: f64,
    pub eta: f64,
    pub s2: f64,
    pub s4: f64,
    /// Leading eigenvalue of the Q-tensor.
    pub lambda: f64,
}

/// Minimum of the branch `η ↦ ρ(η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub rho_star: f64,
    pub eta_star: f64,
    pub lambda_star: f64,
}

/// Fourth-moment coefficients of a uniaxial Gibbs state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ACoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

fn rule_for(n: usize) -> Result<Arc<QuadratureRule>> {
    shared_rule(n, DEFAULT_NODES)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(invalid(format!("eta = {eta} must be finite and non-negative")));
    }
    Ok(())
}

/// Average of `k` against the Gibbs weight when `k` has zero uniform mean.
///
/// Subtracting the (vanishing) uniform part before exponentiation keeps full relative
/// accuracy as `η → 0`, where the average itself is `O(η)`.
fn centered_average(rule: &QuadratureRule, k: impl Fn(f64) -> f64, eta: f64) -> f64 {
    if eta <= 1.0 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (&r, &w) in rule.nodes().iter().zip(rule.weights()) {
            let e = (eta * r * r).exp_m1();
            num += w * k(r) * e;
            den += w * (1.0 + e);
        }
        num / den
    } else {
        let g = rule.gibbs_weights(eta);
        rule.nodes().iter().zip(&g).map(|(&r, &gi)| gi * k(r)).sum()
    }
}

fn plain_average(rule: &QuadratureRule, k: impl Fn(f64) -> f64, eta: f64) -> f64 {
    let g = rule.gibbs_weights(eta);
    rule.nodes().iter().zip(&g).map(|(&r, &gi)| gi * k(r)).sum()
}

/// `P₂(X) = (nX² - 1)/(n - 1)`.
pub fn p2(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    (nf * x * x - 1.0) / (nf - 1.0)
}

/// `P₄(X) = [3 - 6(n+2)X² + (n+2)(n+4)X⁴] / ((n-1)(n+1))`.
pub fn p4(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    let x2 = x * x;
    (3.0 - 6.0 * (nf + 2.0) * x2 + (nf + 2.0) * (nf + 4.0) * x2 * x2) / ((nf - 1.0) * (nf + 1.0))
}

/// Order parameter `S₂(η) = ⟨P₂(ω·Ω)⟩`.
pub fn s2(eta: f64, n: usize) -> Result<f64> {
    check_eta(eta)?;
    let rule = rule_for(n)?;
    Ok(centered_average(&rule, |x| p2(n, x), eta))
}

/// Fourth-order order parameter `S₄(η) = ⟨P₄(ω·Ω)⟩`.
pub fn s4(eta: f64, n: usize) -> Result<f64> {
    check_eta(eta)?;
    let rule = rule_for(n)?;
    Ok(centered_average(&rule, |x| p4(n, x), eta))
}

/// `dS₂/dη`, by differentiation under the integral: `⟨P₂ X²⟩ - ⟨P₂⟩⟨X²⟩`.
pub fn s2_prime(eta: f64, n: usize) -> Result<f64> {
    check_eta(eta)?;
    let rule = rule_for(n)?;
    let mean_x2 = plain_average(&rule, |x| x * x, eta);
    let s = centered_average(&rule, |x| p2(n, x), eta);
    let cov = plain_average(&rule, |x| (p2(n, x) - s) * (x * x - mean_x2), eta);
    Ok(cov)
}

/// Density on the branch at concentration `η`: `ρ = η / (α S₂(η))`.
pub fn rho_of_eta(eta: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    check_eta(eta)?;
    if eta == 0.0 {
        return Err(Error::NumericDomain(
            "rho(eta) is singular at eta = 0 (S2(0) = 0)".into(),
        ));
    }
    Ok(eta / (params.alpha * s2(eta, params.n)?))
}

fn rho_prime_numerator(eta: f64, n: usize) -> Result<f64> {
    // ρ'(η) ∝ S₂ - η S₂'
    Ok(s2(eta, n)? - eta * s2_prime(eta, n)?)
}

/// Critical density below which only the isotropic state exists.
pub fn critical_point(params: &ModelParams) -> Result<CriticalPoint> {
    params.validate()?;
    let n = params.n;
    if n == 2 {
        // ρ(η) = ρ* + a η + b η² + …; eliminate the two leading corrections.
        let h = 1e-3;
        let r1 = rho_of_eta(h, params)?;
        let r2 = rho_of_eta(h / 2.0, params)?;
        let r3 = rho_of_eta(h / 4.0, params)?;
        let e1 = 2.0 * r2 - r1;
        let e2 = 2.0 * r3 - r2;
        let rho_star = (4.0 * e2 - e1) / 3.0;
        return Ok(CriticalPoint {
            rho_star,
            eta_star: 0.0,
            lambda_star: 0.0,
        });
    }

    // bracket the interior minimum of ρ(η) by a geometric scan
    let mut grid = Vec::new();
    let mut eta = 1e-3;
    while eta < 200.0 {
        grid.push(eta);
        eta *= 1.05;
    }
    let values: Vec<f64> = grid
        .iter()
        .map(|&e| rho_of_eta(e, params))
        .collect::<Result<_>>()?;
    let imin = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    if imin == 0 || imin + 1 == grid.len() {
        return Err(Error::IterationLimit {
            context: "critical_point bracket scan".into(),
            lo: grid[0],
            hi: grid[grid.len() - 1],
        });
    }
    let (mut lo, mut hi) = (grid[imin - 1], grid[imin + 1]);

    // golden-section search on ρ(η)
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = rho_of_eta(x1, params)?;
    let mut f2 = rho_of_eta(x2, params)?;
    let mut iters = 0;
    while hi - lo > 1e-6 * hi {
        iters += 1;
        if iters > 200 {
            return Err(Error::IterationLimit {
                context: "critical_point golden section".into(),
                lo,
                hi,
            });
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = rho_of_eta(x1, params)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = rho_of_eta(x2, params)?;
        }
    }

    // Golden section resolves η only to ~√ε relative; polish on the stationarity
    // condition S₂ - η S₂' = 0, which has a simple root.
    let (mut a, mut b) = (lo * 0.95, hi * 1.05);
    let mut fa = rho_prime_numerator(a, n)?;
    let fb = rho_prime_numerator(b, n)?;
    if fa.signum() == fb.signum() {
        return Err(Error::IterationLimit {
            context: "critical_point stationarity bracket".into(),
            lo: a,
            hi: b,
        });
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= 1e-13 * m {
            break;
        }
        let fm = rho_prime_numerator(m, n)?;
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let eta_star = 0.5 * (a + b);
    let rho_star = rho_of_eta(eta_star, params)?;
    let nf = n as f64;
    Ok(CriticalPoint {
        rho_star,
        eta_star,
        lambda_star: (nf - 1.0) * eta_star / (nf * params.alpha * rho_star),
    })
}

/// Largest root of `η = α ρ S₂(η)`: the concentration of the stable nematic branch.
pub fn eta_of_rho(rho: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!("rho = {rho} must be positive")));
    }
    let n = params.n;
    let f = |eta: f64| -> Result<f64> { Ok(eta - params.alpha * rho * s2(eta, n)?) };

    // η_max: F(η) > 0 beyond the largest root; S₂ < 1 gives the bound η > αρ.
    // Scanning downward from there, the first negative value brackets the largest root.
    let eta_max = params.alpha * rho + 1.0;
    let mut bracket = None;
    let mut hi = eta_max;
    while hi > 1e-6 {
        let lo = hi / 1.02;
        if f(lo)? < 0.0 {
            bracket = Some((lo, hi));
            break;
        }
        hi = lo;
    }
    if bracket.is_none() {
        // F may be negative only on a window narrower than the scan step near η*.
        let cp = critical_point(params)?;
        if rho > cp.rho_star && cp.eta_star > 0.0 && f(cp.eta_star)? < 0.0 {
            bracket = Some((cp.eta_star, eta_max));
        } else {
            return Err(Error::NoNematicBranch {
                rho,
                rho_star: cp.rho_star,
            });
        }
    }
    let (mut lo, mut hi) = bracket.expect("bracket set above");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * mid {
            break;
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut root = 0.5 * (lo + hi);
    // Newton polish
    let fp = 1.0 - params.alpha * rho * s2_prime(root, n)?;
    if fp != 0.0 {
        let step = f(root)? / fp;
        if step.abs() < (hi - lo).max(1e-12 * root) {
            root -= step;
        }
    }
    Ok(root)
}

/// Equilibrium data on the stable branch at density `ρ`.
pub fn equilibrium(rho: f64, params: &ModelParams) -> Result<EquilibriumPoint> {
    let eta = eta_of_rho(rho, params)?;
    let n = params.n;
    let s2v = s2(eta, n)?;
    let nf = n as f64;
    Ok(EquilibriumPoint {
        rho,
        eta,
        s2: s2v,
        s4: s4(eta, n)?,
        lambda: (nf - 1.0) * eta / (nf * params.alpha * rho),
    })
}

/// Moments `⟨X⁴⟩`, `⟨X²(1-X²)⟩`, `⟨(1-X²)²⟩` of the Gibbs state.
fn quartic_moments(eta: f64, n: usize) -> Result<(f64, f64, f64)> {
    let rule = rule_for(n)?;
    let g = rule.gibbs_weights(eta);
    let (mut m4, mut m22, mut m0) = (0.0, 0.0, 0.0);
    for (&r, &gi) in rule.nodes().iter().zip(&g) {
        let x2 = r * r;
        m4 += gi * x2 * x2;
        m22 += gi * x2 * (1.0 - x2);
        m0 += gi * (1.0 - x2) * (1.0 - x2);
    }
    Ok((m4, m22, m0))
}

/// Coefficients `a₁, a₂, a₃` of the uniaxial fourth-moment decomposition.
pub fn a_coeffs(eta: f64, n: usize) -> Result<ACoeffs> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid(format!("eta = {eta} must be positive")));
    }
    let (m4, m22, m0) = quartic_moments(eta, n)?;
    let nf = n as f64;
    let c22 = m22 / (nf - 1.0);
    let c0 = m0 / ((nf - 1.0) * (nf + 1.0));
    Ok(ACoeffs {
        a1: m4 - 6.0 * c22 + 3.0 * c0,
        a2: c22 - c0,
        a3: c0,
    })
}

/// Uniaxial fourth-order tensor
/// `𝔸_Ω = Ω⁴ - 6/(n+4) (Ω⊗Ω⊗Id)_s + 3/((n+2)(n+4)) (Id⊗Id)_s`.
pub fn a4_tensor(omega: &DVector<f64>) -> Tensor4 {
    let n = omega.len();
    let nf = n as f64;
    let oo = omega * omega.transpose();
    Tensor4::power4(omega)
        .add_scaled(&Tensor4::sym_with_identity(&oo), -6.0 / (nf + 4.0))
        .add_scaled(&Tensor4::sym_identity(n), 3.0 / ((nf + 2.0) * (nf + 4.0)))
}

fn check_unit(omega: &DVector<f64>) -> Result<()> {
    if omega.len() < 2 {
        return Err(invalid("director must have at least two components"));
    }
    if (omega.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("director is not a unit vector: |Ω| = {}", omega.norm())));
    }
    Ok(())
}

/// Fourth moment `𝕋 = ⟨ω⊗ω⊗ω⊗ω⟩` of the Gibbs state and its trace-free part `ℚ`.
///
/// `𝕋` is built from the decomposition `ω = XΩ + √(1-X²) v` with `v` uniform on the
/// unit sphere of `Ω^⊥`, so only the three one-dimensional averages enter.
pub fn fourth_moment_tensors(eta: f64, n: usize, omega: &DVector<f64>) -> Result<(Tensor4, Tensor4)> {
    check_eta(eta)?;
    check_unit(omega)?;
    if omega.len() != n {
        return Err(invalid(format!(
            "director has {} components but n = {n}",
            omega.len()
        )));
    }
    let nf = n as f64;
    let (m4, m22, m0) = quartic_moments(eta, n)?;
    let p = projector_perp(omega);
    let oo = omega * omega.transpose();

    let t = Tensor4::power4(omega)
        .scale(m4)
        .add_scaled(&Tensor4::outer(&oo, &p).symmetrize(), 6.0 * m22 / (nf - 1.0))
        .add_scaled(
            &Tensor4::outer(&p, &p).symmetrize(),
            3.0 * m0 / ((nf - 1.0) * (nf + 1.0)),
        );
    let q2 = uniaxial(omega) * s2(eta, n)?;
    let q4 = t
        .clone()
        .add_scaled(&Tensor4::sym_with_identity(&q2), -6.0 / (nf + 4.0))
        .add_scaled(&Tensor4::sym_identity(n), -3.0 / (nf * (nf + 2.0)));
    Ok((t, q4))
}

/// `Q = S₂(η) (Ω⊗Ω - Id/n)` for the Gibbs state.
pub fn gibbs_q_tensor(eta: f64, omega: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_unit(omega)?;
    Ok(uniaxial(omega) * s2(eta, omega.len())?)
}
