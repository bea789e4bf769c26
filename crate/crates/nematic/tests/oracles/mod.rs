//! Reference computations that share no code with the library.
//!
//! Everything here is written from first principles: Gauss–Legendre rules from the
//! Legendre recurrence, Bessel functions from their power series, sphere averages
//! by nested product cubature in angular coordinates.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    // P_m(z) and P_m'(z) from the three-term recurrence
    let legendre = |z: f64| {
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=m {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        (p1, m as f64 * (z * p1 - p0) / (z * z - 1.0))
    };
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(z);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on `[a, b]`.
pub fn composite_rule(a: f64, b: f64, panels: usize, nodes: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(nodes);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * nodes);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    composite_rule(a, b, 32, 24).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// Gibbs average `⟨k(cos θ)⟩` in dimension `n` with weight `e^{η cos²θ} sin^{n-2}θ`.
pub fn gibbs_average(n: usize, eta: f64, k: impl Fn(f64) -> f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (t, w) in composite_rule(0.0, PI, 48, 24) {
        let c = t.cos();
        let wt = w * (eta * (c * c - 1.0)).exp() * t.sin().powi(n as i32 - 2);
        num += wt * k(c);
        den += wt;
    }
    num / den
}

pub fn s2(n: usize, eta: f64) -> f64 {
    let nf = n as f64;
    gibbs_average(n, eta, |x| (nf * x * x - 1.0) / (nf - 1.0))
}

pub fn s4(n: usize, eta: f64) -> f64 {
    let nf = n as f64;
    gibbs_average(n, eta, |x| {
        let x2 = x * x;
        (3.0 - 6.0 * (nf + 2.0) * x2 + (nf + 2.0) * (nf + 4.0) * x2 * x2) / ((nf - 1.0) * (nf + 1.0))
    })
}

/// Modified Bessel function `I_m(x)` from its power series.
pub fn bessel_i(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (0..m).fold(1.0, |acc, j| acc * half / (j + 1) as f64);
    let mut sum = term;
    for k in 1..500 {
        term *= half * half / (k as f64 * (k + m) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// `S₂` at `n = 2`: `I₁(η/2)/I₀(η/2)`.
pub fn s2_n2(eta: f64) -> f64 {
    bessel_i(1, eta / 2.0) / bessel_i(0, eta / 2.0)
}

/// `∫₀¹ e^{ηz²} dz = Σ ηᵏ/(k!(2k+1))`.
pub fn erfi_integral(eta: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..400 {
        term *= eta / k as f64;
        let add = term / (2 * k + 1) as f64;
        sum += add;
        if add < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// `S₂` at `n = 3` from the series for `∫₀¹ z^{2j} e^{ηz²} dz`.
pub fn s2_n3(eta: f64) -> f64 {
    let (mut t, mut z0, mut z2) = (1.0, 1.0, 1.0 / 3.0);
    for k in 1..400 {
        t *= eta / k as f64;
        z0 += t / (2 * k + 1) as f64;
        z2 += t / (2 * k + 3) as f64;
        if t < 1e-18 * z0 {
            break;
        }
    }
    (3.0 * z2 / z0 - 1.0) / 2.0
}

/// Largest root of `η = αρ S₂(η)` at `n = 2` by scanning and bisection.
pub fn eta_branch_n2(alpha: f64, rho: f64) -> f64 {
    let f = |e: f64| e - alpha * rho * s2_n2(e);
    let mut hi = 1.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = hi;
    while lo > 1e-8 && f(lo) > 0.0 {
        lo *= 0.5;
    }
    assert!(f(lo) < 0.0, "no nematic root for alpha rho = {}", alpha * rho);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fourier modes `f̂_{2m}`, `m = 0 … K`, of `ρ G` centred on angle `ψ` at `n = 2`.
pub fn gibbs_modes_n2(rho: f64, eta: f64, psi: f64, order: usize) -> Vec<Complex64> {
    let i0 = bessel_i(0, eta / 2.0);
    (0..=order)
        .map(|m| rho * bessel_i(m, eta / 2.0) / i0 * Complex64::from_polar(1.0, -2.0 * m as f64 * psi))
        .collect()
}

/// `n = 2` GCI profile through the first-order reduction:
/// `g'(t) = 1 - e^{-(η/2) cos 2t} / I₀(η/2)`, `g(0) = 0`.
pub fn g_n2(eta: f64, t: f64) -> f64 {
    let i0 = bessel_i(0, eta / 2.0);
    t - integrate(|s| (-(eta / 2.0) * (2.0 * s).cos()).exp(), 0.0, t) / i0
}

pub fn g_prime_n2(eta: f64, t: f64) -> f64 {
    1.0 - (-(eta / 2.0) * (2.0 * t).cos()).exp() / bessel_i(0, eta / 2.0)
}

/// `h(r) = -g(arccos r) / (2η √(1-r²))`.
pub fn h_n2(eta: f64, r: f64) -> f64 {
    let t = r.acos();
    -g_n2(eta, t) / (2.0 * eta * t.sin())
}

/// `c̃ = S₂ / ⟨⟨g · 2η cos θ sin θ⟩⟩` at `n = 2`.
pub fn c_tilde_n2(eta: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (t, w) in composite_rule(0.0, PI, 32, 16) {
        let c = t.cos();
        let wt = w * (eta * (c * c - 1.0)).exp();
        num += wt * g_n2(eta, t) * 2.0 * eta * c * t.sin();
        den += wt;
    }
    s2_n2(eta) / (num / den)
}

/// Points and weights of a product rule on `S^{n-1}` in hyperspherical angles.
pub fn sphere_rule(n: usize, polar_panels: usize, polar_nodes: usize, azimuth: usize) -> Vec<(Vec<f64>, f64)> {
    let polar = composite_rule(0.0, PI, polar_panels, polar_nodes);
    let mut pts: Vec<(Vec<f64>, f64, f64)> = vec![(Vec::new(), 1.0, 1.0)];
    // each entry: leading coordinates, remaining radius, weight
    for level in 0..n.saturating_sub(2) {
        let power = (n - 2 - level) as i32;
        let mut next = Vec::with_capacity(pts.len() * polar.len());
        for (coords, radius, w) in &pts {
            for &(t, wt) in &polar {
                let mut c = coords.clone();
                c.push(radius * t.cos());
                next.push((c, radius * t.sin(), w * wt * t.sin().powi(power)));
            }
        }
        pts = next;
    }
    let dphi = 2.0 * PI / azimuth as f64;
    let mut out = Vec::with_capacity(pts.len() * azimuth);
    for (coords, radius, w) in pts {
        for j in 0..azimuth {
            let phi = dphi * j as f64;
            let mut c = coords.clone();
            c.push(radius * phi.cos());
            c.push(radius * phi.sin());
            out.push((c, w * dphi));
        }
    }
    out
}

/// Dense symmetric 4-tensor with index `((i n + j) n + k) n + l`.
pub struct Dense4 {
    pub n: usize,
    pub v: Vec<f64>,
}

impl Dense4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, v: vec![0.0; n * n * n * n] }
    }

    pub fn at(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.v[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// `(A⊗B)_s` for symmetric matrices given as closures.
    pub fn sym_outer(n: usize, a: impl Fn(usize, usize) -> f64, b: impl Fn(usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = a(i, j) * b(k, l)
                            + a(i, k) * b(j, l)
                            + a(i, l) * b(j, k)
                            + a(k, l) * b(i, j)
                            + a(j, l) * b(i, k)
                            + a(j, k) * b(i, l);
                        t.v[((i * n + j) * n + k) * n + l] = s / 6.0;
                    }
                }
            }
        }
        t
    }

    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (a, b) in self.v.iter_mut().zip(&other.v) {
            *a += s * b;
        }
    }
}

/// Fourth moment of `e^{η(ω·Ω)²}` by product cubature, and its second moment.
pub fn gibbs_fourth_moment(n: usize, eta: f64, omega: &[f64]) -> (Dense4, Vec<f64>) {
    let rule = match n {
        2 => sphere_rule(2, 1, 1, 256),
        3 => sphere_rule(3, 8, 16, 128),
        _ => sphere_rule(n, 6, 16, 96),
    };
    let mut t = Dense4::zeros(n);
    let mut q = vec![0.0; n * n];
    let mut z = 0.0;
    for (w_pt, w) in &rule {
        let x: f64 = w_pt.iter().zip(omega).map(|(a, b)| a * b).sum();
        let wt = w * (eta * (x * x - 1.0)).exp();
        z += wt;
        for i in 0..n {
            for j in 0..n {
                let p = wt * w_pt[i] * w_pt[j];
                q[i * n + j] += p;
                for k in 0..n {
                    let p3 = p * w_pt[k];
                    for l in 0..n {
                        t.v[((i * n + j) * n + k) * n + l] += p3 * w_pt[l];
                    }
                }
            }
        }
    }
    t.v.iter_mut().for_each(|v| *v /= z);
    q.iter_mut().for_each(|v| *v /= z);
    (t, q)
}

/// Fourier modes `m = -K … K` (index `m + K`) of a real function of period `π`.
pub fn modes_of(f: impl Fn(f64) -> f64, order: usize, points: usize) -> Vec<Complex64> {
    let vals: Vec<f64> = (0..points).map(|j| f(PI * j as f64 / points as f64)).collect();
    (-(order as i64)..=order as i64)
        .map(|m| {
            vals.iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * m as f64 * j as f64 / points as f64))
                .sum::<Complex64>()
                / points as f64
        })
        .collect()
}

/// Derivative of samples of a smooth `L`-periodic function by a direct DFT.
pub fn periodic_derivative(values: &[f64], length: f64) -> Vec<f64> {
    let m = values.len();
    let modes: Vec<Complex64> = (0..m)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * j) as f64 / m as f64))
                .sum()
        })
        .collect();
    (0..m)
        .map(|j| {
            let mut s = Complex64::new(0.0, 0.0);
            for (k, c) in modes.iter().enumerate() {
                let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
                if 2 * k == m {
                    continue;
                }
                let wave = 2.0 * PI * kk / length;
                s += c * Complex64::new(0.0, wave) * Complex64::from_polar(1.0, 2.0 * PI * (k * j) as f64 / m as f64);
            }
            s.re / m as f64
        })
        .collect()
}
