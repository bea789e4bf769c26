//! Ericksen–Leslie side of the limit: viscosities, stresses, energies and the director equation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::equilibria::{eta_of_rho, rho_of_eta, s2, s2_prime, s4, ModelParams};
use crate::error::{invalid, Error, Result};
use crate::gci::{constant_c, solve_h, DEFAULT_BASIS};
use crate::tensor::{ddot, projector_perp};

/// Leslie viscosities and the derived rotational coefficients at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeslieCoefficients {
    pub c: f64,
    /// `α₁ … α₆`, stored zero-based.
    pub alpha: [f64; 6],
    pub gamma1: f64,
    pub gamma2: f64,
    pub params: ModelParams,
    pub rho: f64,
    pub eta: f64,
    pub s2: f64,
    pub s4: f64,
}

impl LeslieCoefficients {
    /// `α₆ - α₅ - (α₂ + α₃)`.
    pub fn parodi_defect(&self) -> f64 {
        let a = &self.alpha;
        (a[5] - a[4]) - (a[1] + a[2])
    }
}

/// Leslie coefficients from `(S₂, S₄, c)`, without touching the branch or the GCI.
pub fn assemble_leslie(params: &ModelParams, rho: f64, eta: f64, s2: f64, s4: f64, c: f64) -> LeslieCoefficients {
    let n = params.n as f64;
    let l = params.lambda;
    let z = params.zeta - l * l;
    let a1 = z * s4;
    let a2 = -(l * s2 / 2.0) * (1.0 / c + 1.0);
    let a3 = (l * s2 / 2.0) * (1.0 / c - 1.0);
    let a4 = 2.0 * z * s4 / ((n + 2.0) * (n + 4.0))
        - (2.0 / n) * (l * l / 2.0 + 2.0 * z / (n + 4.0)) * s2
        + (1.0 / n) * (l * l + 2.0 * z / (n + 2.0));
    let common = -2.0 * z * s4 / (n + 4.0);
    let a5 = common + (l / 2.0 + l * l / 2.0 + 2.0 * z / (n + 4.0)) * s2;
    let a6 = common + (-l / 2.0 + l * l / 2.0 + 2.0 * z / (n + 4.0)) * s2;
    LeslieCoefficients {
        c,
        alpha: [a1, a2, a3, a4, a5, a6],
        gamma1: l * s2 / c,
        gamma2: -l * s2,
        params: *params,
        rho,
        eta,
        s2,
        s4,
    }
}

/// Leslie coefficients at concentration `η` (density `ρ(η)` on the branch).
pub fn leslie_coefficients_at_eta(params: &ModelParams, eta: f64) -> Result<LeslieCoefficients> {
    params.validate()?;
    if params.lambda == 0.0 {
        return Err(Error::LambdaZero);
    }
    let rho = rho_of_eta(eta, params)?;
    let n = params.n;
    let h = solve_h(eta, n, DEFAULT_BASIS)?;
    let c = constant_c(eta, n, params.lambda, &h)?;
    Ok(assemble_leslie(params, rho, eta, s2(eta, n)?, s4(eta, n)?, c))
}

/// Leslie coefficients at density `ρ` on the stable nematic branch.
pub fn leslie_coefficients(params: &ModelParams, rho: f64) -> Result<LeslieCoefficients> {
    params.validate()?;
    if params.lambda == 0.0 {
        return Err(Error::LambdaZero);
    }
    let eta = eta_of_rho(rho, params)?;
    let n = params.n;
    let h = solve_h(eta, n, DEFAULT_BASIS)?;
    let c = constant_c(eta, n, params.lambda, &h)?;
    Ok(assemble_leslie(params, rho, eta, s2(eta, n)?, s4(eta, n)?, c))
}

const INVARIANT_TOL: f64 = 1e-12;

/// Kinematic data at one point: strain rate, vorticity, director, its co-rotational rate, molecular field.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPoint {
    pub e: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub omega: DVector<f64>,
    pub n_vec: DVector<f64>,
    pub h: DVector<f64>,
}

impl FlowPoint {
    pub fn new(e: DMatrix<f64>, w: DMatrix<f64>, omega: DVector<f64>, n_vec: DVector<f64>, h: DVector<f64>) -> Result<Self> {
        let fp = Self { e, w, omega, n_vec, h };
        fp.validate()?;
        Ok(fp)
    }

    /// Derives `N` from `P_{Ω⊥}(H - γ₁N - γ₂EΩ) = 0`.
    pub fn from_molecular_field(
        e: DMatrix<f64>,
        w: DMatrix<f64>,
        omega: DVector<f64>,
        h: DVector<f64>,
        coeffs: &LeslieCoefficients,
    ) -> Result<Self> {
        if coeffs.gamma1 == 0.0 {
            return Err(Error::SingularCoefficient("gamma1 = 0".into()));
        }
        let p = projector_perp(&omega);
        let n_vec = &p * (&h - &e * &omega * coeffs.gamma2) / coeffs.gamma1;
        Self::new(e, w, omega, n_vec, h)
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.omega.len();
        let shapes_ok = self.e.shape() == (n, n)
            && self.w.shape() == (n, n)
            && self.n_vec.len() == n
            && self.h.len() == n;
        if !shapes_ok {
            return Err(invalid("flow point components have inconsistent dimensions"));
        }
        let scale = 1.0 + self.e.amax() + self.w.amax() + self.n_vec.amax();
        if self.e.trace().abs() > INVARIANT_TOL * scale {
            return Err(invalid("E must be trace-free"));
        }
        if (&self.e - self.e.transpose()).amax() > INVARIANT_TOL * scale {
            return Err(invalid("E must be symmetric"));
        }
        if (&self.w + self.w.transpose()).amax() > INVARIANT_TOL * scale {
            return Err(invalid("W must be antisymmetric"));
        }
        if (self.omega.norm() - 1.0).abs() > INVARIANT_TOL {
            return Err(invalid("director must be a unit vector"));
        }
        if self.n_vec.dot(&self.omega).abs() > INVARIANT_TOL * scale {
            return Err(invalid("N must be orthogonal to the director"));
        }
        Ok(())
    }

    /// Velocity gradient `(∇u)_{ij} = ∂_i u_j = E + W`.
    pub fn velocity_gradient(&self) -> DMatrix<f64> {
        &self.e + &self.w
    }
}

/// Leslie stress `σ_L = ρ{α₁(E:ΩΩ)ΩΩ + α₂Ω⊗N + α₃N⊗Ω + α₄E + α₅(ΩΩ)E + α₆E(ΩΩ)}`.
pub fn leslie_stress(coeffs: &LeslieCoefficients, rho: f64, fp: &FlowPoint) -> Result<DMatrix<f64>> {
    fp.validate()?;
    let a = &coeffs.alpha;
    let oo = &fp.omega * fp.omega.transpose();
    let e_oo = ddot(&fp.e, &oo);
    let s = &oo * (a[0] * e_oo)
        + &fp.omega * fp.n_vec.transpose() * a[1]
        + &fp.n_vec * fp.omega.transpose() * a[2]
        + &fp.e * a[3]
        + &oo * &fp.e * a[4]
        + &fp.e * &oo * a[5];
    Ok(s * rho)
}

/// Value of the dissipation integrand and a definiteness verdict for its quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dissipation {
    pub value: f64,
    /// Minimum of the `E`-part of the form over trace-free `|E| = 1`.
    pub min_over_unit_strain: f64,
    /// True when that minimum is non-negative and `γ₁ > 0`.
    pub positive_scan: bool,
}

fn strain_form(coeffs: &LeslieCoefficients, e: &DMatrix<f64>, omega: &DVector<f64>) -> f64 {
    let a = &coeffs.alpha;
    let g = coeffs.gamma2 * coeffs.gamma2 / coeffs.gamma1;
    let oo = omega * omega.transpose();
    let e_oo = ddot(e, &oo);
    let eo = e * omega;
    (a[0] + g) * e_oo * e_oo + a[3] * ddot(e, e) + (a[4] + a[5] - g) * eo.dot(&eo)
}

/// Orthonormal basis of the trace-free symmetric `n × n` matrices.
fn trace_free_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2 - 1);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] = r;
            e[(j, i)] = r;
            out.push(e);
        }
    }
    // diagonal part: normalized differences of the first k+1 unit diagonals
    for k in 1..n {
        let mut e = DMatrix::zeros(n, n);
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            e[(i, i)] = 1.0 / norm;
        }
        e[(k, k)] = -(k as f64) / norm;
        out.push(e);
    }
    out
}

/// Exact minimum of the strain form over unit trace-free `E`: the smallest eigenvalue
/// of its Gram matrix on an orthonormal basis.
fn strain_form_minimum(coeffs: &LeslieCoefficients, omega: &DVector<f64>) -> f64 {
    let basis = trace_free_basis(omega.len());
    let d = basis.len();
    let diag: Vec<f64> = basis.iter().map(|e| strain_form(coeffs, e, omega)).collect();
    let gram = DMatrix::from_fn(d, d, |a, b| {
        if a == b {
            diag[a]
        } else {
            0.5 * (strain_form(coeffs, &(&basis[a] + &basis[b]), omega) - diag[a] - diag[b])
        }
    });
    gram.symmetric_eigenvalues().min()
}

/// `ρ{(α₁+γ₂²/γ₁)(E:ΩΩ)² + α₄|E|² + (α₅+α₆-γ₂²/γ₁)|EΩ|² + |P_{Ω⊥}H|²/γ₁}`.
pub fn dissipation_density(coeffs: &LeslieCoefficients, rho: f64, fp: &FlowPoint) -> Result<Dissipation> {
    fp.validate()?;
    if coeffs.gamma1 == 0.0 {
        return Err(Error::SingularCoefficient("gamma1 = 0".into()));
    }
    let ph = projector_perp(&fp.omega) * &fp.h;
    let value = rho * (strain_form(coeffs, &fp.e, &fp.omega) + ph.dot(&ph) / coeffs.gamma1);

    let mut omega = DVector::zeros(fp.dim());
    omega[0] = 1.0;
    let min_form = strain_form_minimum(coeffs, &omega);
    Ok(Dissipation {
        value,
        min_over_unit_strain: min_form,
        positive_scan: min_form >= 0.0 && coeffs.gamma1 > 0.0,
    })
}

/// Pointwise spatial data: fields, gradients `(∇a)_i = ∂_i a`, and `(∇Ω)_{ij} = ∂_i Ω_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJet {
    pub rho: f64,
    pub eta: f64,
    pub grad_rho: DVector<f64>,
    pub grad_eta: DVector<f64>,
    pub omega: DVector<f64>,
    pub grad_omega: DMatrix<f64>,
    /// `Δ(ηΩ)`.
    pub lap_eta_omega: DVector<f64>,
}

impl FieldJet {
    pub fn validate(&self) -> Result<()> {
        let n = self.omega.len();
        if self.grad_rho.len() != n || self.grad_eta.len() != n || self.grad_omega.shape() != (n, n) || self.lap_eta_omega.len() != n {
            return Err(invalid("field jet components have inconsistent dimensions"));
        }
        if (self.omega.norm() - 1.0).abs() > INVARIANT_TOL {
            return Err(invalid("director must be a unit vector"));
        }
        let scale = 1.0 + self.grad_omega.amax();
        if (&self.grad_omega * &self.omega).amax() > INVARIANT_TOL * scale {
            return Err(invalid("rows of the director gradient must be orthogonal to the director"));
        }
        Ok(())
    }

    /// `(∇(ηΩ))_{ij} = ∂_i(ηΩ_j)`.
    pub fn grad_eta_omega(&self) -> DMatrix<f64> {
        &self.grad_eta * self.omega.transpose() + &self.grad_omega * self.eta
    }
}

/// Ericksen stress
/// `σ_E = -(2β/α)∇(ηΩ)∇(ηΩ)ᵀ + (n+1)β/(nα) ∇η⊗∇η + (n-1)αβ/n ∇ρ⊗∇ρ`.
pub fn ericksen_stress(params: &ModelParams, jet: &FieldJet) -> Result<DMatrix<f64>> {
    params.validate()?;
    jet.validate()?;
    let (n, a, b) = (params.n as f64, params.alpha, params.beta);
    let ge = jet.grad_eta_omega();
    Ok(&ge * ge.transpose() * (-2.0 * b / a)
        + &jet.grad_eta * jet.grad_eta.transpose() * ((n + 1.0) * b / (n * a))
        + &jet.grad_rho * jet.grad_rho.transpose() * ((n - 1.0) * a * b / n))
}

/// Ericksen stress for an on-branch jet, with the density gradient eliminated through `ρ(η)`:
/// `-(2β/α)η²∇Ω∇Ωᵀ - (n-1)β/(nα) [1 - (1 - ηS₂'/S₂)²/S₂²] ∇η⊗∇η`.
pub fn ericksen_stress_on_branch(params: &ModelParams, jet: &FieldJet) -> Result<DMatrix<f64>> {
    params.validate()?;
    jet.validate()?;
    let (n, a, b) = (params.n as f64, params.alpha, params.beta);
    let eta = jet.eta;
    let k = franck_density_factor(eta, params.n)?;
    Ok(&jet.grad_omega * jet.grad_omega.transpose() * (-2.0 * b / a * eta * eta)
        + &jet.grad_eta * jet.grad_eta.transpose() * (-(n - 1.0) * b / (n * a) * k))
}

/// `1 - (1/S₂²)(1 - ηS₂'/S₂)²`, whose sign decides positivity of the Oseen–Franck energy.
pub fn franck_density_factor(eta: f64, n: usize) -> Result<f64> {
    let s = s2(eta, n)?;
    let sp = s2_prime(eta, n)?;
    let x = (1.0 - eta * sp / s) / s;
    Ok(1.0 - x * x)
}

/// Molecular field `H = 2βS₂(η)Δ(ηΩ)`.
pub fn molecular_field(params: &ModelParams, jet: &FieldJet) -> Result<DVector<f64>> {
    params.validate()?;
    jet.validate()?;
    Ok(&jet.lap_eta_omega * (2.0 * params.beta * s2(jet.eta, params.n)?))
}

/// Director field and density sampled on a uniform periodic grid of `[0, length)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField1D {
    pub length: f64,
    pub rho: Vec<f64>,
    pub omega: Vec<DVector<f64>>,
}

impl PeriodicField1D {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.len() as f64
    }
}

/// Spectral derivative of a periodic sample (the Nyquist mode is dropped).
pub fn spectral_derivative(values: &[f64], length: f64) -> Vec<f64> {
    let m = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (j, z) in buf.iter_mut().enumerate() {
        let k = if j <= m / 2 { j as i64 } else { j as i64 - m as i64 };
        if m % 2 == 0 && j == m / 2 {
            *z = Complex64::new(0.0, 0.0);
        } else {
            *z *= Complex64::new(0.0, 2.0 * PI * k as f64 / length);
        }
    }
    inv.process(&mut buf);
    buf.iter().map(|z| z.re / m as f64).collect()
}

/// Oseen–Franck energy split into its director, density and concentration parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FranckEnergy {
    pub total: f64,
    pub omega_part: f64,
    pub rho_part: f64,
    pub eta_part: f64,
    /// True when `1 - (1/S₂²)(1 - ηS₂'/S₂)² ≥ 0` at every grid point.
    pub positivity: bool,
}

fn branch_concentrations(params: &ModelParams, field: &PeriodicField1D) -> Result<Vec<f64>> {
    field.rho.iter().map(|&r| eta_of_rho(r, params)).collect()
}

fn component_series(field: &PeriodicField1D, eta: &[f64], j: usize) -> Vec<f64> {
    field.omega.iter().zip(eta).map(|(o, e)| e * o[j]).collect()
}

fn check_field(params: &ModelParams, field: &PeriodicField1D) -> Result<()> {
    params.validate()?;
    if field.is_empty() || field.omega.len() != field.len() {
        return Err(invalid("periodic field must have matching, non-empty samples"));
    }
    if !(field.length > 0.0) {
        return Err(invalid("periodic length must be positive"));
    }
    for o in &field.omega {
        if o.len() != params.n || (o.norm() - 1.0).abs() > 1e-10 {
            return Err(invalid("director samples must be unit vectors of dimension n"));
        }
    }
    Ok(())
}

/// `E_F = (2β/α)∫|∂(ηΩ)|²/2 - αβ(n-1)/n ∫|∂ρ|²/2 - β(n+1)/(nα) ∫|∂η|²/2` on the grid.
pub fn franck_energy(params: &ModelParams, field: &PeriodicField1D) -> Result<FranckEnergy> {
    check_field(params, field)?;
    let eta = branch_concentrations(params, field)?;
    franck_energy_with_eta(params, field, &eta)
}

fn franck_energy_with_eta(params: &ModelParams, field: &PeriodicField1D, eta: &[f64]) -> Result<FranckEnergy> {
    let (n, a, b) = (params.n as f64, params.alpha, params.beta);
    let dx = field.spacing();
    let mut omega_part = 0.0;
    for j in 0..params.n {
        let d = spectral_derivative(&component_series(field, eta, j), field.length);
        omega_part += d.iter().map(|v| v * v).sum::<f64>();
    }
    omega_part *= (2.0 * b / a) * 0.5 * dx;
    let drho = spectral_derivative(&field.rho, field.length);
    let deta = spectral_derivative(eta, field.length);
    let rho_part = -a * b * (n - 1.0) / n * 0.5 * dx * drho.iter().map(|v| v * v).sum::<f64>();
    let eta_part = -b * (n + 1.0) / (n * a) * 0.5 * dx * deta.iter().map(|v| v * v).sum::<f64>();
    let mut positivity = true;
    for &e in eta {
        if franck_density_factor(e, params.n)? < 0.0 {
            positivity = false;
        }
    }
    Ok(FranckEnergy {
        total: omega_part + rho_part + eta_part,
        omega_part,
        rho_part,
        eta_part,
        positivity,
    })
}

/// Same energy written as `(2β/α)∫η²|∂Ω|²/2 + (n-1)β/(nα) ∫[1 - (1 - ηS₂'/S₂)²/S₂²]|∂η|²/2`.
pub fn franck_energy_on_branch(params: &ModelParams, field: &PeriodicField1D) -> Result<f64> {
    check_field(params, field)?;
    let eta = branch_concentrations(params, field)?;
    let (n, a, b) = (params.n as f64, params.alpha, params.beta);
    let dx = field.spacing();
    let m = field.len();
    let mut grad_omega_sq = vec![0.0; m];
    for j in 0..params.n {
        let comp: Vec<f64> = field.omega.iter().map(|o| o[j]).collect();
        let d = spectral_derivative(&comp, field.length);
        for (acc, v) in grad_omega_sq.iter_mut().zip(&d) {
            *acc += v * v;
        }
    }
    let deta = spectral_derivative(&eta, field.length);
    let mut total = 0.0;
    for i in 0..m {
        let k = franck_density_factor(eta[i], params.n)?;
        total += (2.0 * b / a) * eta[i] * eta[i] * grad_omega_sq[i] * 0.5
            + (n - 1.0) * b / (n * a) * k * deta[i] * deta[i] * 0.5;
    }
    Ok(total * dx)
}

/// `ρH = (2β/α) η Δ(ηΩ)` at every grid point, with `Δ` the square of the spectral derivative.
pub fn molecular_field_1d(params: &ModelParams, field: &PeriodicField1D) -> Result<Vec<DVector<f64>>> {
    check_field(params, field)?;
    let eta = branch_concentrations(params, field)?;
    let (a, b) = (params.alpha, params.beta);
    let m = field.len();
    let mut out = vec![DVector::zeros(params.n); m];
    for j in 0..params.n {
        let comp = component_series(field, &eta, j);
        let lap = spectral_derivative(&spectral_derivative(&comp, field.length), field.length);
        for i in 0..m {
            out[i][j] = 2.0 * b / a * eta[i] * lap[i];
        }
    }
    Ok(out)
}

/// Oseen–Franck energy with the concentrations held fixed (for derivatives in `Ω`).
pub fn franck_energy_fixed_eta(params: &ModelParams, field: &PeriodicField1D, eta: &[f64]) -> Result<FranckEnergy> {
    params.validate()?;
    if eta.len() != field.len() {
        return Err(invalid("concentration samples must match the field"));
    }
    franck_energy_with_eta(params, field, eta)
}

/// `dΩ/dt = -WΩ + c P_{Ω⊥}(EΩ + (2β/Λ)Δ(ηΩ))` for a homogeneous or given-Laplacian state.
pub fn director_rhs(
    coeffs: &LeslieCoefficients,
    params: &ModelParams,
    omega: &DVector<f64>,
    e: &DMatrix<f64>,
    w: &DMatrix<f64>,
    lap_eta_omega: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    if (omega.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid("director must be a unit vector"));
    }
    let mut drive = e * omega;
    if let Some(lap) = lap_eta_omega {
        if params.lambda == 0.0 {
            return Err(Error::LambdaZero);
        }
        drive += lap * (2.0 * params.beta / params.lambda);
    }
    let p = projector_perp(omega);
    let out = -(w * omega) + p * drive * coeffs.c;
    // remove the roundoff component along Ω
    let along = out.dot(omega);
    Ok(out - omega * along)
}

/// Director behaviour in the simple shear `u = (γ̇ y, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShearResponse {
    /// Steady angle `½ arccos(1/c)` to the flow direction.
    Aligning { angle: f64 },
    /// Periodic rotation with period `2π / (γ̇ √(1 - c²))`.
    Tumbling { period: f64 },
}

/// Prediction of `θ̇ = (γ̇/2)(c cos 2θ - 1)`.
pub fn shear_response(c: f64, shear_rate: f64) -> Result<ShearResponse> {
    if !(shear_rate > 0.0) {
        return Err(invalid("shear rate must be positive"));
    }
    if c.abs() >= 1.0 {
        let angle = 0.5 * (1.0 / c).acos();
        // the stable root has c sin 2θ > 0
        let angle = if c > 0.0 { angle } else { -angle };
        Ok(ShearResponse::Aligning { angle })
    } else {
        Ok(ShearResponse::Tumbling {
            period: 2.0 * PI / (shear_rate * (1.0 - c * c).sqrt()),
        })
    }
}

/// Simple shear `u = (γ̇ y, 0)` in two dimensions: `(E, W)`.
pub fn simple_shear(shear_rate: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let g = shear_rate / 2.0;
    let e = DMatrix::from_row_slice(2, 2, &[0.0, g, g, 0.0]);
    let w = DMatrix::from_row_slice(2, 2, &[0.0, -g, g, 0.0]);
    (e, w)
}
