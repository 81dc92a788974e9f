//! Spectral decomposition, powers and products of Gaussian operators.

use ndarray::{s, Array2};
use ndarray_linalg::{Inverse, SVD};
use num_complex::Complex64 as C64;

use super::pfaffian::pfaffian;
use super::CorrelationMatrix;
use crate::error::{Error, Result};

/// Eigenvalues closer than this to ±1 are refined through the defect factor.
const CLUSTER_GAP: f64 = 1e-3;

/// `prefactor · ρ[gamma]` with `ρ[gamma]` of unit trace.
#[derive(Clone, Debug)]
pub struct GaussianFactor {
    pub prefactor: C64,
    pub gamma: CorrelationMatrix,
}

/// Eigen-decomposition `Γ = U diag(ν) U†` of a Hermitian correlation matrix.
///
/// For every eigenvalue the pair of mode probabilities `(1 ± ν)/2` is kept
/// with full relative accuracy, even when one of them is far below machine
/// epsilon, provided the matrix carries a defect factor.
#[derive(Clone, Debug)]
pub struct ModeSpectrum {
    pub vectors: Array2<C64>,
    pub values: Vec<f64>,
    /// 1 - ν² for each eigenvalue.
    pub defects: Vec<f64>,
    /// Modes with vanishing defect.
    pub pure_modes: usize,
}

impl ModeSpectrum {
    pub fn of(g: &CorrelationMatrix) -> Result<Self> {
        let a = g.data();
        let n = a.nrows();
        let herm_err = a
            .indexed_iter()
            .fold(0.0_f64, |m, ((i, j), v)| m.max((v - a[[j, i]].conj()).norm()));
        if herm_err > 1e-8 {
            return Err(Error::Usage(format!("correlation matrix is not Hermitian (deviation {herm_err:e})")));
        }
        let (vals, mut vecs) = crate::linalg::eigh(a)?;
        let mut values: Vec<f64> = vals.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
        let mut defects: Vec<f64> = values.iter().map(|v| ((1.0 - v.abs()) * (1.0 + v.abs())).max(0.0)).collect();
        if let Some(k) = g.defect() {
            for sign in [1.0, -1.0] {
                let idx: Vec<usize> = (0..n).filter(|&j| sign * values[j] > 1.0 - CLUSTER_GAP).collect();
                if idx.is_empty() {
                    continue;
                }
                let mut uc = Array2::zeros((n, idx.len()));
                for (c, &j) in idx.iter().enumerate() {
                    uc.column_mut(c).assign(&vecs.column(j));
                }
                let uh = uc.t().mapv(|x| x.conj());
                let m = uh.dot(k);
                let (y, sv) = if m.ncols() == 0 {
                    (Array2::eye(idx.len()).mapv(|x: f64| C64::new(x, 0.0)), vec![])
                } else {
                    let (y, sv, _) = m.svd(true, false)?;
                    (y.unwrap(), sv.to_vec())
                };
                let rotated = uc.dot(&y);
                for (c, &j) in idx.iter().enumerate() {
                    let sig = sv.get(c).copied().unwrap_or(0.0);
                    let d = (sig * sig).min(1.0);
                    defects[j] = d;
                    values[j] = sign * (1.0 - d).sqrt();
                    vecs.column_mut(j).assign(&rotated.column(c));
                }
            }
        }
        let pure_modes = defects.iter().filter(|d| **d == 0.0).count() / 2;
        Ok(ModeSpectrum { vectors: vecs, values, defects, pure_modes })
    }

    pub fn n_modes(&self) -> usize {
        self.values.len() / 2
    }

    /// Probabilities ((1+ν)/2, (1-ν)/2) of eigenvalue `j`.
    pub fn probabilities(&self, j: usize) -> (f64, f64) {
        let nu = self.values[j];
        let a = nu.abs();
        let big = 0.5 * (1.0 + a);
        let small = if a > 0.5 { 0.5 * self.defects[j] / (1.0 + a) } else { 0.5 * (1.0 - a) };
        if nu >= 0.0 {
            (big, small)
        } else {
            (small, big)
        }
    }

    /// Indices of the N eigenvalues with ν ≥ 0 (one per mode).
    fn upper_half(&self) -> std::ops::Range<usize> {
        let n = self.values.len();
        n / 2..n
    }

    pub fn is_pure(&self) -> bool {
        self.pure_modes == self.n_modes()
    }

    /// Largest eigenvalue of ρ: prod_modes (1 + |ν|)/2.
    pub fn max_probability(&self) -> f64 {
        self.upper_half().map(|j| 0.5 * (1.0 + self.values[j].abs())).product()
    }

    /// tr ρ^α and the eigenvalues tanh(α artanh ν) of Γ^(α).
    pub fn power(&self, alpha: C64) -> (C64, Vec<C64>) {
        let pw = |p: f64| -> C64 {
            if alpha == C64::new(0.0, 0.0) {
                C64::new(1.0, 0.0)
            } else if p == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                (alpha * p.ln()).exp()
            }
        };
        let mut kappa = C64::new(1.0, 0.0);
        let mut t = Vec::with_capacity(self.values.len());
        for j in 0..self.values.len() {
            let (pp, pm) = self.probabilities(j);
            let (a, b) = (pw(pp), pw(pm));
            t.push((a - b) / (a + b));
        }
        for j in self.upper_half() {
            let (pp, pm) = self.probabilities(j);
            kappa *= pw(pp) + pw(pm);
        }
        (kappa, t)
    }

    /// U diag(f) U†, antisymmetrized.
    pub fn compose(&self, f: &[C64]) -> Array2<C64> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|x| x * f[j]);
        }
        let uh = self.vectors.t().mapv(|x| x.conj());
        let m = scaled.dot(&uh);
        let t = m.t().to_owned();
        (&m - &t) * C64::new(0.5, 0.0)
    }
}

/// ρ[g]^α = κ_α ρ[Γ^(α)] with Γ^(α) = tanh(α artanh Γ).
pub fn gamma_power(g: &CorrelationMatrix, alpha: C64) -> Result<GaussianFactor> {
    if alpha == C64::new(1.0, 0.0) {
        return Ok(GaussianFactor { prefactor: C64::new(1.0, 0.0), gamma: g.clone() });
    }
    let spec = ModeSpectrum::of(g)?;
    Ok(power_from_spectrum(&spec, alpha))
}

pub(crate) fn power_from_spectrum(spec: &ModeSpectrum, alpha: C64) -> GaussianFactor {
    let (kappa, t) = spec.power(alpha);
    GaussianFactor { prefactor: kappa, gamma: CorrelationMatrix::from_parts(spec.compose(&t), None) }
}

/// Q(Γ1, Γ2) = (-1)^N pf([[Γ1, -I], [I, Γ2]]), the signed square root of
/// det(I + Γ1Γ2); tr(ρ[Γ1] ρ[Γ2]) = 2^{-N} Q.
pub fn overlap_q(g1: &Array2<C64>, g2: &Array2<C64>) -> Result<C64> {
    let n = g1.nrows();
    if g2.nrows() != n || g1.ncols() != n || g2.ncols() != n {
        return Err(Error::Usage("dimension mismatch in Gaussian overlap".into()));
    }
    let mut b = Array2::zeros((2 * n, 2 * n));
    b.slice_mut(s![..n, ..n]).assign(g1);
    b.slice_mut(s![n.., n..]).assign(g2);
    for i in 0..n {
        b[[i, n + i]] = C64::new(-1.0, 0.0);
        b[[n + i, i]] = C64::new(1.0, 0.0);
    }
    let pf = pfaffian(&b)?;
    Ok(if (n / 2) % 2 == 0 { pf } else { -pf })
}

/// Γ1 × Γ2 = I - (I - Γ2)(I + Γ1Γ2)^{-1}(I - Γ1).
pub(crate) fn product_matrix(g1: &Array2<C64>, g2: &Array2<C64>) -> Result<Array2<C64>> {
    let n = g1.nrows();
    let id = Array2::<C64>::eye(n);
    let m = &id + &g1.dot(g2);
    let inv = m.inv().map_err(|_| Error::OrthogonalStates)?;
    let p = &id - &(&id - g2).dot(&inv.dot(&(&id - g1)));
    let t = p.t().to_owned();
    Ok((&p - &t) * C64::new(0.5, 0.0))
}

/// ρ[Γ1] ρ[Γ2] = prefactor · ρ[Γ1 × Γ2] with prefactor = 2^{-N} Q(Γ1, Γ2).
pub fn gaussian_product(g1: &CorrelationMatrix, g2: &CorrelationMatrix) -> Result<GaussianFactor> {
    if g1.dim() != g2.dim() {
        return Err(Error::Usage("dimension mismatch in Gaussian product".into()));
    }
    let q = overlap_q(g1.data(), g2.data())?;
    let scale = 0.5f64.powi(g1.n_sites() as i32);
    if q.norm() < 1e-14 {
        return Err(Error::OrthogonalStates);
    }
    let p = product_matrix(g1.data(), g2.data())?;
    Ok(GaussianFactor { prefactor: q * scale, gamma: CorrelationMatrix::from_parts(p, None) })
}
