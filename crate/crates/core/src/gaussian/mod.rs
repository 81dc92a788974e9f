//! Fermionic Gaussian states through their Majorana correlation matrices.
//!
//! Site `s` (0-based inside a window) carries the Majoranas
//! `a_{2s} = (prod_{j<s} σz_j) σx_s` and `a_{2s+1} = (prod_{j<s} σz_j) σy_s`,
//! and `Γ = I - <a ⊗ a>`, so `Γ_{jk} = -<a_j a_k>` for `j != k`.

mod algebra;
mod builders;
mod io;
pub mod pfaffian;

pub use algebra::{gamma_power, gaussian_product, overlap_q, GaussianFactor, ModeSpectrum};
pub use builders::{
    finite_chain_correlations, ground_state_correlations, ground_state_with, majorana_hamiltonian,
    quench_correlations, quench_symbol, quench_with, thermal_correlations, thermal_with, Boundary,
    WindowOptions,
};
pub(crate) use algebra::product_matrix;
pub(crate) use builders::single_particle_spectrum;
pub use io::{load, save, read_from, write_to};
pub use pfaffian::{leading_pfaffians, pfaffian};

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use std::ops::Range;

use crate::error::{Error, Result};

/// Majorana two-point matrix of a Gaussian state on `n_sites` sites.
///
/// `defect`, when present, is a factor `K` with `I - Γ² = K K†` that is
/// known more accurately than the product itself; it lets nearly pure modes
/// keep their tiny occupations.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    n_sites: usize,
    data: Array2<C64>,
    defect: Option<Array2<C64>>,
}

impl CorrelationMatrix {
    /// Wraps `data`, enforcing antisymmetry.
    pub fn new(data: Array2<C64>) -> Result<Self> {
        let n = data.nrows();
        if data.ncols() != n || n % 2 != 0 {
            return Err(Error::Usage(format!("correlation matrix must be 2n x 2n, got {}x{}", n, data.ncols())));
        }
        let at = data.t().to_owned();
        let data = (&data - &at) * C64::new(0.5, 0.0);
        Ok(CorrelationMatrix { n_sites: n / 2, data, defect: None })
    }

    pub fn zeros(n_sites: usize) -> Self {
        CorrelationMatrix { n_sites, data: Array2::zeros((2 * n_sites, 2 * n_sites)), defect: None }
    }

    pub(crate) fn from_parts(data: Array2<C64>, defect: Option<Array2<C64>>) -> Self {
        let n_sites = data.nrows() / 2;
        CorrelationMatrix { n_sites, data, defect }
    }

    /// Attaches a factor `K` with `I - Γ² = K K†`.
    pub fn with_defect(mut self, k: Array2<C64>) -> Result<Self> {
        if k.nrows() != self.data.nrows() {
            return Err(Error::Usage("defect factor row count mismatch".into()));
        }
        self.defect = Some(k);
        Ok(self)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        2 * self.n_sites
    }

    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn defect(&self) -> Option<&Array2<C64>> {
        self.defect.as_ref()
    }

    pub fn into_data(self) -> Array2<C64> {
        self.data
    }

    /// Largest singular value minus one (positive values are unphysical).
    pub fn physicality_excess(&self) -> Result<f64> {
        use ndarray_linalg::SVD;
        let (_, s, _) = self.data.svd(false, false)?;
        Ok(s.iter().fold(0.0_f64, |m, v| m.max(*v)) - 1.0)
    }

    pub fn is_physical(&self) -> Result<bool> {
        Ok(self.physicality_excess()? <= 1e-10)
    }

    /// Principal submatrix on a contiguous Majorana index range.
    pub fn restrict(&self, idx: Range<usize>) -> Result<Self> {
        if idx.end > self.dim() || idx.start > idx.end {
            return Err(Error::OutOfRange(format!("{:?} in dimension {}", idx, self.dim())));
        }
        if (idx.end - idx.start) % 2 != 0 {
            return Err(Error::Usage("restriction to an odd number of Majoranas".into()));
        }
        let data = self.data.slice(s![idx.clone(), idx.clone()]).to_owned();
        let defect = self.defect.as_ref().map(|k| {
            let n = self.dim();
            let m = idx.end - idx.start;
            let outside = n - m;
            let mut out = Array2::zeros((m, outside + k.ncols()));
            let mut col = 0;
            for j in (0..idx.start).chain(idx.end..n) {
                out.column_mut(col).assign(&self.data.slice(s![idx.clone(), j]));
                col += 1;
            }
            out.slice_mut(s![.., col..]).assign(&k.slice(s![idx.clone(), ..]));
            out
        });
        Ok(CorrelationMatrix { n_sites: (idx.end - idx.start) / 2, data, defect })
    }

    /// Restriction to the sites `sites` (a contiguous range).
    pub fn restrict_sites(&self, sites: Range<usize>) -> Result<Self> {
        self.restrict(2 * sites.start..2 * sites.end)
    }

    /// `D Γ D` for a diagonal sign matrix `D`.
    pub fn conjugate_by_signs(&self, signs: &[i8]) -> Result<Self> {
        if signs.len() != self.dim() {
            return Err(Error::Usage(format!("{} signs for dimension {}", signs.len(), self.dim())));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Usage("signs must be +1 or -1".into()));
        }
        let mut data = self.data.clone();
        for ((i, j), v) in data.indexed_iter_mut() {
            if signs[i] != signs[j] {
                *v = -*v;
            }
        }
        let defect = self.defect.as_ref().map(|k| {
            let mut k = k.clone();
            for (i, mut row) in k.rows_mut().into_iter().enumerate() {
                if signs[i] < 0 {
                    row.mapv_inplace(|v| -v);
                }
            }
            k
        });
        Ok(CorrelationMatrix { n_sites: self.n_sites, data, defect })
    }

    /// `<σx_l σx_n>` for window sites `l <= n` (0-based).
    pub fn two_point_x(&self, l: usize, n: usize) -> Result<f64> {
        let (l, n) = if l <= n { (l, n) } else { (n, l) };
        if n >= self.n_sites {
            return Err(Error::OutOfRange(format!("site {} in window of {}", n, self.n_sites)));
        }
        if l == n {
            return Ok(1.0);
        }
        let sec = self.data.slice(s![2 * l + 1..2 * n + 1, 2 * l + 1..2 * n + 1]);
        let pf = pfaffian::pfaffian_view(sec)?;
        Ok((i_pow(n - l) * pf).re)
    }
}

/// D^x_l signs for a window of `n_sites`: -1 on Majoranas up to and including `a_{2l}`.
pub fn string_signs(n_sites: usize, l: usize) -> Vec<i8> {
    (0..2 * n_sites).map(|j| if j <= 2 * l { -1 } else { 1 }).collect()
}

/// i^k.
pub fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}
