//! Dense fourth-order tensors on `ℝⁿ` and a few matrix helpers.

use nalgebra::{DMatrix, DVector};

/// Dense `n⁴` tensor, row-major in `(i, j, k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let p = self.idx(i, j, k, l);
        self.data[p] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `A ⊗ B` with `(A ⊗ B)_{ijkl} = A_{ij} B_{kl}`.
    pub fn outer(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        t.set(i, j, k, l, a[(i, j)] * b[(k, l)]);
                    }
                }
            }
        }
        t
    }

    /// `v ⊗ v ⊗ v ⊗ v`.
    pub fn power4(v: &DVector<f64>) -> Self {
        let vv = v * v.transpose();
        Self::outer(&vv, &vv)
    }

    /// Average over all 24 permutations of the four indices.
    pub fn symmetrize(&self) -> Self {
        const PERMS: [[usize; 4]; 24] = [
            [0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3], [0, 2, 3, 1], [0, 3, 1, 2], [0, 3, 2, 1],
            [1, 0, 2, 3], [1, 0, 3, 2], [1, 2, 0, 3], [1, 2, 3, 0], [1, 3, 0, 2], [1, 3, 2, 0],
            [2, 0, 1, 3], [2, 0, 3, 1], [2, 1, 0, 3], [2, 1, 3, 0], [2, 3, 0, 1], [2, 3, 1, 0],
            [3, 0, 1, 2], [3, 0, 2, 1], [3, 1, 0, 2], [3, 1, 2, 0], [3, 2, 0, 1], [3, 2, 1, 0],
        ];
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let ix = [i, j, k, l];
                        let s: f64 = PERMS
                            .iter()
                            .map(|p| self.get(ix[p[0]], ix[p[1]], ix[p[2]], ix[p[3]]))
                            .sum();
                        out.set(i, j, k, l, s / 24.0);
                    }
                }
            }
        }
        out
    }

    /// `(A ⊗ Id)_s`.
    pub fn sym_with_identity(a: &DMatrix<f64>) -> Self {
        let id = DMatrix::<f64>::identity(a.nrows(), a.nrows());
        Self::outer(a, &id).symmetrize()
    }

    /// `(Id ⊗ Id)_s`.
    pub fn sym_identity(n: usize) -> Self {
        let id = DMatrix::<f64>::identity(n, n);
        Self::outer(&id, &id).symmetrize()
    }

    pub fn scale(mut self, s: f64) -> Self {
        for v in &mut self.data {
            *v *= s;
        }
        self
    }

    pub fn add_scaled(mut self, other: &Self, s: f64) -> Self {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        self
    }

    /// `(𝕋 : M)_{ij} = Σ_{kl} 𝕋_{ijkl} M_{kl}`.
    pub fn contract(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                for l in 0..n {
                    s += self.get(i, j, k, l) * m[(k, l)];
                }
            }
            s
        })
    }

    /// Contraction over the index pair `(p, q)`, `p < q`, leaving the other two in order.
    pub fn trace_pair(&self, p: usize, q: usize) -> DMatrix<f64> {
        assert!(p < q && q < 4);
        let n = self.n;
        let free: Vec<usize> = (0..4).filter(|&x| x != p && x != q).collect();
        DMatrix::from_fn(n, n, |a, b| {
            let mut s = 0.0;
            for m in 0..n {
                let mut ix = [0usize; 4];
                ix[p] = m;
                ix[q] = m;
                ix[free[0]] = a;
                ix[free[1]] = b;
                s += self.get(ix[0], ix[1], ix[2], ix[3]);
            }
            s
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `Id - Ω ⊗ Ω`.
pub fn projector_perp(omega: &DVector<f64>) -> DMatrix<f64> {
    let n = omega.len();
    DMatrix::identity(n, n) - omega * omega.transpose()
}

/// `Ω ⊗ Ω - Id/n`.
pub fn uniaxial(omega: &DVector<f64>) -> DMatrix<f64> {
    let n = omega.len();
    omega * omega.transpose() - DMatrix::identity(n, n) / n as f64
}

/// Sign representative of a director: first nonzero coordinate positive.
pub fn canonical_director(omega: &DVector<f64>) -> DVector<f64> {
    match omega.iter().find(|v| v.abs() > 0.0) {
        Some(&v) if v < 0.0 => -omega,
        _ => omega.clone(),
    }
}

/// Frobenius inner product `A : B`.
pub fn ddot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_symmetrization_matches_pairings() {
        let n = 3;
        let t = Tensor4::sym_identity(n);
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let want = (d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k)) / 3.0;
                        assert!((t.get(i, j, k, l) - want).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_sign() {
        let v = DVector::from_vec(vec![0.0, -0.6, 0.8]);
        assert_eq!(canonical_director(&v)[1], 0.6);
    }
}
