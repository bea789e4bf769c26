//! Spatially homogeneous Doi model on the circle.
//!
//! The orientation density is stored by its even Fourier modes,
//! `f(φ) = Σ_{|m|≤K} f̂_{2m} e^{i2mφ}`, with respect to the normalized measure
//! `dφ/2π`, so `f̂₀` is the density `ρ`. Only `m ≥ 0` is kept; negative modes are
//! conjugates. Odd harmonics never appear, which makes head–tail symmetry structural.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::equilibria::ModelParams;
use crate::error::{invalid, Error, Result};
use crate::gci::{bessel_i_ratios, solve_h, GciSolution, DEFAULT_BASIS};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Even-harmonic representation of an orientation density at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationState {
    coeffs: Vec<Complex64>,
    t: f64,
}

impl OrientationState {
    /// `coeffs[m] = f̂_{2m}` for `m = 0 … K`. The mean mode must be real and positive.
    pub fn new(coeffs: Vec<Complex64>, t: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("an orientation state needs at least the mean mode"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(invalid("Fourier coefficients must be finite"));
        }
        let f0 = coeffs[0];
        if !(f0.re > 0.0) || f0.im.abs() > 1e-14 * f0.re {
            return Err(invalid("mean mode must be real and positive"));
        }
        let mut coeffs = coeffs;
        coeffs[0] = Complex64::new(f0.re, 0.0);
        Ok(Self { coeffs, t })
    }

    /// Uniform density `ρ` truncated at order `K`.
    pub fn uniform(rho: f64, order: usize) -> Result<Self> {
        let mut c = vec![ZERO; order + 1];
        c[0] = Complex64::new(rho, 0.0);
        Self::new(c, 0.0)
    }

    /// Projection of `ρ G_{ηA_Ω}` with `Ω = (cos ψ, sin ψ)`:
    /// `f̂_{2m} = ρ (I_m/I_0)(η/2) e^{-i2mψ}`.
    pub fn gibbs(rho: f64, eta: f64, psi: f64, order: usize) -> Result<Self> {
        if !(rho > 0.0) || !(eta >= 0.0) || !eta.is_finite() {
            return Err(invalid("Gibbs state needs rho > 0 and finite eta >= 0"));
        }
        let ratios = bessel_i_ratios(eta / 2.0, order.max(1));
        let mut c = vec![ZERO; order + 1];
        c[0] = Complex64::new(rho, 0.0);
        for m in 1..=order {
            c[m] = rho * ratios[m - 1] * Complex64::from_polar(1.0, -2.0 * m as f64 * psi);
        }
        Self::new(c, 0.0)
    }

    /// Random positive state with mass `ρ` and geometrically decaying harmonics.
    pub fn random(rho: f64, order: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = vec![ZERO; order + 1];
        c[0] = Complex64::new(rho, 0.0);
        let mut amp = 0.3 * rho;
        for cm in c.iter_mut().skip(1) {
            amp *= 0.5;
            *cm = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
        }
        Self::new(c, 0.0)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Non-negative modes `f̂_{2m}`, `m = 0 … K`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `f̂_{2m}` for any integer `m` (zero outside the truncation).
    pub fn coeff(&self, m: i64) -> Complex64 {
        let k = m.unsigned_abs() as usize;
        if k >= self.coeffs.len() {
            ZERO
        } else if m >= 0 {
            self.coeffs[k]
        } else {
            self.coeffs[k].conj()
        }
    }

    pub fn mass(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `L²` norm with respect to the normalized measure.
    pub fn norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().skip(1).map(|c| c.norm_sqr()).sum();
        (self.coeffs[0].norm_sqr() + 2.0 * s).sqrt()
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let tail: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, c)| (c * Complex64::from_polar(1.0, 2.0 * m as f64 * phi)).re)
            .sum();
        self.coeffs[0].re + 2.0 * tail
    }

    /// Values at `φ_j = πj/M`, `j = 0 … M-1`.
    pub fn sample(&self, points: usize) -> Vec<f64> {
        synthesize(&self.coeffs, points)
    }

    /// Smallest value of `f / f̂₀` over a `4K`-point grid.
    pub fn min_relative_density(&self) -> f64 {
        let pts = (4 * self.order()).max(16);
        self.sample(pts).into_iter().fold(f64::INFINITY, f64::min) / self.mass()
    }

    /// True when `min f ≥ -1e-8 f̂₀` on the monitoring grid.
    pub fn positivity_ok(&self) -> bool {
        self.min_relative_density() >= -1e-8
    }

    /// Same state truncated or zero-padded to order `K`.
    pub fn resized(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, ZERO);
        Self { coeffs: c, t: self.t }
    }
}

/// Real trigonometric polynomial with modes `c[m]`, sampled at `φ_j = πj/M`.
fn synthesize(c: &[Complex64], points: usize) -> Vec<f64> {
    assert!(points > 2 * (c.len() - 1), "grid too coarse for the truncation");
    let mut buf = vec![ZERO; points];
    buf[0] = c[0];
    for (m, &cm) in c.iter().enumerate().skip(1) {
        buf[m] += cm;
        buf[points - m] += cm.conj();
    }
    FftPlanner::new().plan_fft_inverse(points).process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Fourier modes `m = 0 … kmax` of real samples on `φ_j = πj/M`.
fn analyze(values: &[f64], kmax: usize) -> Vec<Complex64> {
    let points = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(points).process(&mut buf);
    buf.into_iter().take(kmax + 1).map(|z| z / points as f64).collect()
}

fn grid_angles(points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |j| PI * j as f64 / points as f64)
}

/// Fourier coefficient of `U⁰'` on `e^{i2φ}`: `-iα f̂₂ / 2`.
fn potential_slope(state: &OrientationState, alpha: f64) -> Complex64 {
    -I * alpha * state.coeff(1) / 2.0
}

fn collision_modes(state: &OrientationState, alpha: f64, kmax: usize) -> Vec<Complex64> {
    let up = potential_slope(state, alpha);
    let um = up.conj();
    (0..=kmax)
        .map(|m| {
            let mi = m as i64;
            let k = m as f64;
            -4.0 * k * k * state.coeff(mi)
                + I * 2.0 * k * (up * state.coeff(mi - 1) + um * state.coeff(mi + 1))
        })
        .collect()
}

/// Maier–Saupe collision rate `f'' + (f U⁰')'`, Galerkin-truncated at the state's order.
pub fn collision(state: &OrientationState, alpha: f64) -> Vec<Complex64> {
    collision_modes(state, alpha, state.order())
}

/// Velocity gradient `(∇u)_{ij} = ∂_i u_j` of the shear `u = (γ̇ y, 0)`.
pub fn shear_gradient(rate: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, 0.0, rate, 0.0)
}

/// `(E, w)` with `W = [[0, -w], [w, 0]]`.
fn strain_and_spin(grad_u: &Matrix2<f64>) -> Result<(Matrix2<f64>, f64)> {
    let scale = 1.0 + grad_u.amax();
    if grad_u.trace().abs() > 1e-12 * scale {
        return Err(invalid("velocity gradient must be trace-free"));
    }
    let e = (grad_u + grad_u.transpose()) * 0.5;
    let w = 0.5 * (grad_u[(1, 0)] - grad_u[(0, 1)]);
    Ok((e, w))
}

/// Transport rate `-(f φ̇)'` for `φ̇ = Λ(-e₁₁ sin 2φ + e₁₂ cos 2φ) - w`.
pub fn transport(state: &OrientationState, grad_u: &Matrix2<f64>, lambda: f64) -> Result<Vec<Complex64>> {
    let (e, w) = strain_and_spin(grad_u)?;
    Ok(transport_rate(state, &e, w, lambda))
}

fn transport_rate(state: &OrientationState, e: &Matrix2<f64>, w: f64, lambda: f64) -> Vec<Complex64> {
    let v = lambda * Complex64::new(e[(0, 1)], e[(0, 0)]) / 2.0;
    let vc = v.conj();
    (0..=state.order())
        .map(|m| {
            let mi = m as i64;
            -I * 2.0 * m as f64 * (v * state.coeff(mi - 1) + vc * state.coeff(mi + 1) - w * state.coeff(mi))
        })
        .collect()
}

/// Second moment `Q_f = (1/ρ)∫(ω⊗ω - Id/2) f`.
pub fn q_tensor(state: &OrientationState) -> Matrix2<f64> {
    let f2 = state.coeff(1) / state.mass();
    let (qxx, qxy) = (0.5 * f2.re, -0.5 * f2.im);
    Matrix2::new(qxx, qxy, qxy, -qxx)
}

/// Macroscopic moments of a non-isotropic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub rho: f64,
    pub q: Matrix2<f64>,
    /// Leading eigenvalue of `Q_f`.
    pub lambda: f64,
    /// Director angle in `(-π/2, π/2]`.
    pub theta: f64,
    /// Canonical director `(cos θ, sin θ)`.
    pub omega: Vector2<f64>,
    /// `Σ_f = Q_f/(2λ_f)`.
    pub sigma: Matrix2<f64>,
    /// `η_f = 2αρλ_f`.
    pub eta: f64,
    /// Scalar order parameter `2λ_f`.
    pub s2: f64,
}

pub fn moments(state: &OrientationState, alpha: f64) -> Result<Moments> {
    let rho = state.mass();
    let f2 = state.coeff(1);
    if f2.norm() <= 1e-14 * rho {
        return Err(Error::DegenerateMoment);
    }
    let q = q_tensor(state);
    let lambda = f2.norm() / (2.0 * rho);
    let mut theta = -f2.arg() / 2.0;
    if theta <= -PI / 2.0 {
        theta += PI;
    }
    Ok(Moments {
        rho,
        q,
        lambda,
        theta,
        omega: Vector2::new(theta.cos(), theta.sin()),
        sigma: q / (2.0 * lambda),
        eta: alpha * f2.norm(),
        s2: 2.0 * lambda,
    })
}

/// Free energy and its dissipation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergy {
    /// `A⁰ = ∫(f log f - f + ½U⁰f)`.
    pub a0: f64,
    /// `∫ f |∂_φ(log f + U⁰)|²`.
    pub dissipation: f64,
}

fn quadrature_points(order: usize) -> usize {
    (16 * order).max(128)
}

pub fn free_energy(state: &OrientationState, alpha: f64) -> Result<FreeEnergy> {
    let pts = quadrature_points(state.order());
    let f = state.sample(pts);
    let dc: Vec<Complex64> = state
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| I * 2.0 * m as f64 * c)
        .collect();
    let df = synthesize(&dc, pts);
    let min = f.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::Positivity { min });
    }
    let rho = state.mass();
    let f2 = state.coeff(1);
    let (mut a0, mut diss) = (0.0, 0.0);
    for ((phi, fv), dfv) in grid_angles(pts).zip(&f).zip(&df) {
        let z = f2 * Complex64::from_polar(1.0, 2.0 * phi);
        let u = -0.5 * alpha * z.re + 0.5 * alpha * rho;
        let du = alpha * z.im;
        a0 += fv * fv.ln() - fv + 0.5 * u * fv;
        let flux = dfv + fv * du;
        diss += flux * flux / fv;
    }
    Ok(FreeEnergy {
        a0: a0 / pts as f64,
        dissipation: diss / pts as f64,
    })
}

/// Outcome of the GCI orthogonality test `∫ C(f) ψ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GciResidual {
    /// `|∫ C(f) ψ| / (‖C(f)‖ ‖ψ‖)`.
    pub relative: f64,
    pub absolute: f64,
    /// Concentration used for the GCI profile.
    pub eta: f64,
}

/// Fourier modes `m = 0 … kmax` of the GCI direction `h_η(cos(φ-θ)) sin(φ-θ)`.
pub fn gci_modes(h: &GciSolution, theta: f64, kmax: usize) -> Vec<Complex64> {
    let pts = (8 * kmax + 16).max(512);
    let vals: Vec<f64> = grid_angles(pts)
        .map(|phi| {
            let (s, c) = (phi - theta).sin_cos();
            h.h(c) * s
        })
        .collect();
    analyze(&vals, kmax)
}

/// GCI residual with the profile at the state's own concentration `η_f`.
pub fn gci_residual(state: &OrientationState, alpha: f64) -> Result<GciResidual> {
    let mom = moments(state, alpha)?;
    gci_residual_at(state, alpha, mom.eta)
}

/// GCI residual with the profile at an arbitrary concentration (contrast runs).
pub fn gci_residual_at(state: &OrientationState, alpha: f64, eta: f64) -> Result<GciResidual> {
    let mom = moments(state, alpha)?;
    let h = solve_h(eta, 2, DEFAULT_BASIS)?;
    // the exact collision of a truncated state reaches one mode further
    let kmax = state.order() + 1;
    let c = collision_modes(state, alpha, kmax);
    let psi = gci_modes(&h, mom.theta, kmax);
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(m, (x, y))| if m == 0 { x * y.conj() } else { 2.0 * (x * y.conj()).re * Complex64::new(1.0, 0.0) })
            .sum()
    };
    let num = inner(&c, &psi).re;
    let nc = inner(&c, &c).re.sqrt();
    let np = inner(&psi, &psi).re.sqrt();
    let denom = nc * np;
    Ok(GciResidual {
        relative: if denom > 0.0 { num.abs() / denom } else { 0.0 },
        absolute: num.abs(),
        eta,
    })
}

/// Exponential time differencing schemes; the diffusion `-4m²/ε` is integrated exactly
/// and equilibria of the full right-hand side are fixed points of every step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Second-order Cox–Matthews scheme.
    #[default]
    Etd2,
    /// Fourth-order Cox–Matthews scheme.
    Etd4,
}

/// `φ₁, φ₂, φ₃` of `z`, with `φ_k(z) = Σ_j z^j/(j+k)!`.
fn phi_functions(z: f64) -> [f64; 3] {
    if z.abs() < 0.5 {
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let k = k + 1;
            // term_j = z^j/(j+k)!
            let mut term = (1..=k).fold(1.0, |p, i| p / i as f64);
            let mut acc = 0.0;
            for j in 0..30 {
                acc += term;
                term *= z / (j + k + 1) as f64;
            }
            *slot = acc;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [p1, p2, p3]
    }
}

/// Homogeneous run configuration (`n = 2`).
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Deborah number.
    pub eps: f64,
    /// `(∇u)_{ij} = ∂_i u_j`, trace-free.
    pub grad_u: Matrix2<f64>,
    pub dt: f64,
    pub t_max: f64,
    /// Spacing of recorded states.
    pub output_interval: f64,
    pub integrator: Integrator,
}

impl SimConfig {
    /// Defaults: `dt = min(ε/40, 10⁻³)`, `t_max = 1`, 100 recorded intervals.
    pub fn new(params: ModelParams, eps: f64, grad_u: Matrix2<f64>) -> Result<Self> {
        let cfg = Self {
            params,
            eps,
            grad_u,
            dt: default_dt(eps),
            t_max: 1.0,
            output_interval: 0.01,
            integrator: Integrator::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.params.n != 2 {
            return Err(invalid("the kinetic simulator runs in dimension n = 2"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(invalid("eps must be positive"));
        }
        if !(self.dt > 0.0) || !(self.t_max >= 0.0) || !(self.output_interval > 0.0) {
            return Err(invalid("dt and output interval must be positive, t_max non-negative"));
        }
        strain_and_spin(&self.grad_u)?;
        Ok(())
    }
}

pub fn default_dt(eps: f64) -> f64 {
    (eps / 40.0).min(1e-3)
}

/// Per-mode factors of one scheme at step `h`.
#[derive(Debug, Clone)]
struct EtdFactors {
    exp_half: Vec<f64>,
    exp_full: Vec<f64>,
    /// `(h/2) φ₁(Lh/2)`.
    half_phi1: Vec<f64>,
    /// `h φ₁(Lh)`.
    phi1: Vec<f64>,
    /// `h φ₂(Lh)`.
    phi2: Vec<f64>,
    /// `h(φ₁ - 3φ₂ + 4φ₃)`, `h(φ₂ - 2φ₃)`, `h(4φ₃ - φ₂)` at `Lh`.
    rk4: Vec<[f64; 3]>,
}

impl EtdFactors {
    fn new(order: usize, eps: f64, h: f64) -> Self {
        let mut f = Self {
            exp_half: Vec::with_capacity(order + 1),
            exp_full: Vec::with_capacity(order + 1),
            half_phi1: Vec::with_capacity(order + 1),
            phi1: Vec::with_capacity(order + 1),
            phi2: Vec::with_capacity(order + 1),
            rk4: Vec::with_capacity(order + 1),
        };
        for m in 0..=order {
            let l = -4.0 * (m * m) as f64 / eps;
            let [p1, p2, p3] = phi_functions(l * h);
            let [q1, _, _] = phi_functions(l * h / 2.0);
            f.exp_half.push((l * h / 2.0).exp());
            f.exp_full.push((l * h).exp());
            f.half_phi1.push(h / 2.0 * q1);
            f.phi1.push(h * p1);
            f.phi2.push(h * p2);
            f.rk4.push([h * (p1 - 3.0 * p2 + 4.0 * p3), h * (p2 - 2.0 * p3), h * (4.0 * p3 - p2)]);
        }
        f
    }
}

/// Fixed-step integrator for one configuration and truncation order.
#[derive(Debug, Clone)]
pub struct Stepper {
    alpha: f64,
    lambda: f64,
    eps: f64,
    e: Matrix2<f64>,
    w: f64,
    dt: f64,
    integrator: Integrator,
    order: usize,
    factors: EtdFactors,
}

impl Stepper {
    pub fn new(config: &SimConfig, order: usize) -> Result<Self> {
        config.validate()?;
        let (e, w) = strain_and_spin(&config.grad_u)?;
        Ok(Self::with_dt(config, order, config.dt, e, w))
    }

    fn with_dt(config: &SimConfig, order: usize, dt: f64, e: Matrix2<f64>, w: f64) -> Self {
        Self {
            alpha: config.params.alpha,
            lambda: config.params.lambda,
            eps: config.eps,
            e,
            w,
            dt,
            integrator: config.integrator,
            order,
            factors: EtdFactors::new(order, config.eps, dt),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Full right-hand side `-(fφ̇)' + C(f)/ε`.
    pub fn rhs(&self, state: &OrientationState) -> Vec<Complex64> {
        let c = collision(state, self.alpha);
        let t = transport_rate(state, &self.e, self.w, self.lambda);
        c.iter().zip(&t).map(|(c, t)| c / self.eps + t).collect()
    }

    /// Right-hand side without the diagonal diffusion part.
    fn nonstiff(&self, c: &[Complex64]) -> Vec<Complex64> {
        let state = OrientationState { coeffs: c.to_vec(), t: 0.0 };
        let up = potential_slope(&state, self.alpha);
        let um = up.conj();
        let tr = transport_rate(&state, &self.e, self.w, self.lambda);
        (0..=self.order)
            .map(|m| {
                let mi = m as i64;
                I * 2.0 * m as f64 * (up * state.coeff(mi - 1) + um * state.coeff(mi + 1)) / self.eps + tr[m]
            })
            .collect()
    }

    pub fn step(&self, state: &OrientationState) -> Result<OrientationState> {
        if state.order() != self.order {
            return Err(invalid("state order does not match the stepper"));
        }
        let u = &state.coeffs;
        let dt = self.dt;
        let fa = &self.factors;
        let range = 0..=self.order;
        let nu = self.nonstiff(u);
        let next: Vec<Complex64> = match self.integrator {
            Integrator::Etd2 => {
                let a: Vec<Complex64> = range.clone().map(|m| fa.exp_full[m] * u[m] + fa.phi1[m] * nu[m]).collect();
                let na = self.nonstiff(&a);
                range.map(|m| a[m] + fa.phi2[m] * (na[m] - nu[m])).collect()
            }
            Integrator::Etd4 => {
                let a: Vec<Complex64> = range.clone().map(|m| fa.exp_half[m] * u[m] + fa.half_phi1[m] * nu[m]).collect();
                let na = self.nonstiff(&a);
                let b: Vec<Complex64> = range.clone().map(|m| fa.exp_half[m] * u[m] + fa.half_phi1[m] * na[m]).collect();
                let nb = self.nonstiff(&b);
                let c: Vec<Complex64> = range
                    .clone()
                    .map(|m| fa.exp_half[m] * a[m] + fa.half_phi1[m] * (2.0 * nb[m] - nu[m]))
                    .collect();
                let nc = self.nonstiff(&c);
                range
                    .map(|m| {
                        let [g1, g2, g3] = fa.rk4[m];
                        fa.exp_full[m] * u[m] + g1 * nu[m] + 2.0 * g2 * (na[m] + nb[m]) + g3 * nc[m]
                    })
                    .collect()
            }
        };
        let t = state.t + dt;
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Integrator {
                t,
                reason: "non-finite coefficients; reduce dt".into(),
            });
        }
        let out = OrientationState { coeffs: next, t };
        // every mode of a positive density is bounded by the mass
        if out.coeffs.iter().skip(1).any(|z| z.norm() > 10.0 * out.mass()) {
            return Err(Error::Integrator {
                t,
                reason: "norm blow-up; reduce dt".into(),
            });
        }
        Ok(out)
    }
}

/// Recorded run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<OrientationState>,
    /// Smallest `f/f̂₀` seen at recorded times.
    pub min_relative_density: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &OrientationState {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Largest relative deviation of the mass from its initial value.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.states[0].mass();
        self.states.iter().map(|s| ((s.mass() - m0) / m0).abs()).fold(0.0, f64::max)
    }
}

/// Runs `initial` to `t_max`, calling `observer` at the start and at every output time.
pub fn simulate_with(
    initial: &OrientationState,
    config: &SimConfig,
    mut observer: impl FnMut(&OrientationState) -> Result<()>,
) -> Result<OrientationState> {
    config.validate()?;
    let (e, w) = strain_and_spin(&config.grad_u)?;
    let stride = ((config.output_interval / config.dt).round() as usize).max(1);
    let steps = (config.t_max / config.dt).ceil() as usize;
    let dt = if steps == 0 { config.dt } else { config.t_max / steps as f64 };
    let stepper = Stepper::with_dt(config, initial.order(), dt, e, w);
    let t0 = initial.t;
    let mut state = initial.clone();
    observer(&state)?;
    for i in 1..=steps {
        state = stepper.step(&state)?;
        state.t = t0 + i as f64 * dt;
        if i % stride == 0 || i == steps {
            observer(&state)?;
        }
    }
    Ok(state)
}

/// Runs `initial` to `t_max`, recording the state at every output time.
pub fn simulate(initial: &OrientationState, config: &SimConfig) -> Result<Trajectory> {
    let mut states = Vec::new();
    let mut min_rel = f64::INFINITY;
    simulate_with(initial, config, |s| {
        min_rel = min_rel.min(s.min_relative_density());
        states.push(s.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        states,
        min_relative_density: min_rel,
    })
}

/// Two evaluations of the polymer stress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticStress {
    /// `nΛρQ + ((Λ+1)/2) M + ((Λ-1)/2) Mᵀ`.
    pub sigma1: Matrix2<f64>,
    /// `ε(Λ/2)ρ[Λ(EQ+QE) + QW - WQ + (2Λ/n)E - 2Λ𝕋:E - dQ/dt] + ½(M - Mᵀ)`.
    pub sigma2: Matrix2<f64>,
    /// `M = ∫ ω ⊗ ∇U⁰ f`.
    pub m: Matrix2<f64>,
}

/// `(𝕋_f : X)_{ij} = (1/ρ)∫ ω_iω_j (ω·Xω) f`.
pub fn fourth_moment_contract(state: &OrientationState, x: &Matrix2<f64>) -> Matrix2<f64> {
    let pts = 2 * state.order() + 8;
    let f = state.sample(pts);
    let mut out = Matrix2::zeros();
    for (phi, fv) in grid_angles(pts).zip(&f) {
        let om = Vector2::new(phi.cos(), phi.sin());
        let oxo = om.dot(&(x * om));
        out += om * om.transpose() * (oxo * fv);
    }
    out / (pts as f64 * state.mass())
}

/// `M = -2αρ²[Q² + Q/2 - 𝕋:Q]`.
pub fn potential_moment(state: &OrientationState, alpha: f64) -> Matrix2<f64> {
    let rho = state.mass();
    let q = q_tensor(state);
    -2.0 * alpha * rho * rho * (q * q + q / 2.0 - fourth_moment_contract(state, &q))
}

pub fn kinetic_stress(
    state: &OrientationState,
    grad_u: &Matrix2<f64>,
    params: &ModelParams,
    eps: f64,
    dq_dt: &Matrix2<f64>,
) -> Result<KineticStress> {
    let (e, w) = strain_and_spin(grad_u)?;
    let wm = Matrix2::new(0.0, -w, w, 0.0);
    let l = params.lambda;
    let n = 2.0;
    let rho = state.mass();
    let q = q_tensor(state);
    let m = potential_moment(state, params.alpha);
    let sigma1 = q * (n * l * rho) + m * ((l + 1.0) / 2.0) + m.transpose() * ((l - 1.0) / 2.0);
    let te = fourth_moment_contract(state, &e);
    let bracket = (e * q + q * e) * l + q * wm - wm * q + e * (2.0 * l / n) - te * (2.0 * l) - dq_dt;
    let sigma2 = bracket * (eps * l / 2.0 * rho) + (m - m.transpose()) * 0.5;
    Ok(KineticStress { sigma1, sigma2, m })
}

/// Index of mode `m ∈ [-K, K]` in the full complex basis.
fn full_index(m: i64, order: usize) -> usize {
    (m + order as i64) as usize
}

/// Matrix of the linearized collision operator `D_f C` on the complex basis `e^{i2mφ}`, `|m| ≤ K`.
pub fn linearized_collision_matrix(state: &OrientationState, alpha: f64) -> DMatrix<Complex64> {
    let k = state.order() as i64;
    let dim = (2 * k + 1) as usize;
    let up = potential_slope(state, alpha);
    let um = up.conj();
    let mut a = DMatrix::from_element(dim, dim, ZERO);
    for m in -k..=k {
        let row = full_index(m, state.order());
        let mf = m as f64;
        a[(row, row)] += Complex64::new(-4.0 * mf * mf, 0.0);
        // δf advected by the frozen potential
        if m - 1 >= -k {
            a[(row, full_index(m - 1, state.order()))] += I * 2.0 * mf * up;
        }
        if m + 1 <= k {
            a[(row, full_index(m + 1, state.order()))] += I * 2.0 * mf * um;
        }
        // frozen f advected by the potential of δf: U'_δ = -iαδ₂/2 e^{i2φ} + iαδ₋₂/2 e^{-i2φ}
        let c_plus = I * 2.0 * mf * state.coeff(m - 1) * (-I * alpha / 2.0);
        let c_minus = I * 2.0 * mf * state.coeff(m + 1) * (I * alpha / 2.0);
        if k >= 1 {
            a[(row, full_index(1, state.order()))] += c_plus;
            a[(row, full_index(-1, state.order()))] += c_minus;
        }
    }
    a
}

/// Adjoint `D_f C*` built from `g ↦ g'' - U⁰'g' - (α/4)(ĥ₂e^{i2φ} + ĥ₋₂e^{-i2φ})`,
/// `h = (f g')'`, on the complex basis `e^{i2mφ}`, `|m| ≤ K`.
pub fn adjoint_linearized_matrix(state: &OrientationState, alpha: f64) -> DMatrix<Complex64> {
    let k = state.order() as i64;
    let dim = (2 * k + 1) as usize;
    let up = potential_slope(state, alpha);
    let um = up.conj();
    let mut a = DMatrix::from_element(dim, dim, ZERO);
    for j in -k..=k {
        let col = full_index(j, state.order());
        let jf = j as f64;
        let dg = I * 2.0 * jf;
        a[(col, col)] += Complex64::new(-4.0 * jf * jf, 0.0);
        // -U⁰' g' lands on modes j ± 1
        if j + 1 <= k {
            a[(full_index(j + 1, state.order()), col)] -= up * dg;
        }
        if j - 1 >= -k {
            a[(full_index(j - 1, state.order()), col)] -= um * dg;
        }
        if k >= 1 {
            // ĥ_{±2} = ±i2 (f g')_{±1} with (f g')_{p} = f̂_{2(p-j)} · i2j
            let h_plus = I * 2.0 * state.coeff(1 - j) * dg;
            let h_minus = -I * 2.0 * state.coeff(-1 - j) * dg;
            a[(full_index(1, state.order()), col)] -= alpha / 4.0 * h_plus;
            a[(full_index(-1, state.order()), col)] -= alpha / 4.0 * h_minus;
        }
    }
    a
}

/// Singular-value split of a matrix into numerical kernel and the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    /// Singular values in decreasing order.
    pub singular_values: Vec<f64>,
    pub dimension: usize,
    /// Smallest retained singular value over the largest kernel one.
    pub gap: f64,
    /// Orthonormal kernel basis as columns.
    pub basis: DMatrix<Complex64>,
}

pub const KERNEL_THRESHOLD: f64 = 1e-8;
pub const KERNEL_MIN_GAP: f64 = 1e3;

/// Kernel by singular values below `10⁻⁸ σ_max`; fails when the gap is under `10³`.
pub fn kernel_analysis(a: &DMatrix<Complex64>) -> Result<KernelReport> {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::NumericDomain("SVD did not converge".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let thr = KERNEL_THRESHOLD * smax;
    let dimension = sv.iter().filter(|&&s| s < thr).count();
    let gap = if dimension == 0 || dimension == sv.len() {
        f64::INFINITY
    } else {
        let kept = sv[sv.len() - dimension - 1];
        let top = sv[sv.len() - dimension];
        if top == 0.0 {
            f64::INFINITY
        } else {
            kept / top
        }
    };
    if gap < KERNEL_MIN_GAP {
        return Err(Error::AmbiguousKernel { singular_values: sv });
    }
    let n = a.ncols();
    let mut basis = DMatrix::from_element(n, dimension, ZERO);
    for (c, &i) in order.iter().rev().take(dimension).enumerate() {
        for r in 0..n {
            basis[(r, c)] = v_t[(i, r)].conj();
        }
    }
    Ok(KernelReport {
        singular_values: sv,
        dimension,
        gap,
        basis,
    })
}

/// Orthonormal basis of the column span.
fn orthonormal_columns(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-12 * smax)
        .collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Largest principal angle between two column spans, measured through its sine.
pub fn subspace_angle(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let qa = orthonormal_columns(a);
    let qb = orthonormal_columns(b);
    if qa.ncols() != qb.ncols() {
        return PI / 2.0;
    }
    let resid = &qb - &qa * (qa.adjoint() * &qb);
    resid.svd(false, false).singular_values.max().min(1.0).asin()
}

/// Coefficient vectors of `1` and of the GCI direction on the full basis `|m| ≤ K`.
pub fn gci_span(eta: f64, theta: f64, order: usize) -> Result<DMatrix<Complex64>> {
    let h = solve_h(eta, 2, DEFAULT_BASIS)?;
    let modes = gci_modes(&h, theta, order);
    let dim = 2 * order + 1;
    let mut span = DMatrix::from_element(dim, 2, ZERO);
    span[(full_index(0, order), 0)] = Complex64::new(1.0, 0.0);
    for m in -(order as i64)..=(order as i64) {
        let c = modes[m.unsigned_abs() as usize];
        span[(full_index(m, order), 1)] = if m >= 0 { c } else { c.conj() };
    }
    Ok(span)
}

/// Kernel of `D_f C*` compared with `span{1, GCI}` at the state's own concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelProbe {
    pub kernel: KernelReport,
    pub angle: f64,
    /// Largest deviation between the adjoint formula and the conjugate transpose of `D_f C`.
    pub dual_defect: f64,
}

/// Kernel of `D_{f⁰}C*` for a Gibbs state `ρ G_{ηA_Ω}` and its angle to the GCI span at `η`.
pub fn probe_gci_kernel(rho: f64, eta: f64, theta: f64, alpha: f64, order: usize) -> Result<KernelProbe> {
    let state = OrientationState::gibbs(rho, eta, theta, order)?;
    let adj = adjoint_linearized_matrix(&state, alpha);
    let dual = linearized_collision_matrix(&state, alpha).adjoint();
    let dual_defect = (&adj - &dual).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let kernel = kernel_analysis(&adj)?;
    let span = gci_span(eta, theta, order)?;
    let angle = if kernel.dimension == 0 {
        PI / 2.0
    } else {
        subspace_angle(&kernel.basis, &span)
    };
    Ok(KernelProbe {
        kernel,
        angle,
        dual_defect,
    })
}

/// Applies a complex matrix to the full coefficient vector of a state.
pub fn apply_full(a: &DMatrix<Complex64>, state: &OrientationState) -> DVector<Complex64> {
    let k = state.order() as i64;
    let v = DVector::from_fn((2 * k + 1) as usize, |i, _| state.coeff(i as i64 - k));
    a * v
}
