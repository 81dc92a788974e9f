//! Correlation matrices of equilibrium and quenched states.

use ndarray::{s, Array1, Array2};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use super::CorrelationMatrix;
use crate::error::Result;
use crate::model::{ChainModel, QuenchPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
}

/// Numerical knobs for infinite-chain windows.
#[derive(Clone, Copy, Debug)]
pub struct WindowOptions {
    /// Momentum points of the periodic trapezoid (0 picks 4096, or 16384 at criticality).
    pub quad_points: usize,
    /// Extra sites on each side used to build the purity defect of the window.
    pub padding: usize,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions { quad_points: 0, padding: 48 }
    }
}

impl WindowOptions {
    fn points(&self, model: &ChainModel, reach: usize) -> usize {
        let base = if self.quad_points > 0 {
            self.quad_points
        } else if model.is_critical() {
            16384
        } else {
            4096
        };
        let mut m = base;
        while m < 4 * reach {
            m *= 2;
        }
        m
    }
}

type Symbol = [[C64; 2]; 2];

/// Off-diagonal symbol entry z(k) = 2(h - cos k) + 2iγ sin k.
fn z_of(model: &ChainModel, k: f64) -> C64 {
    C64::new(2.0 * (model.h - k.cos()), 2.0 * model.gamma * k.sin())
}

/// Symbol of the thermal state: -tanh(βε/2) K̂/ε with K̂ = [[0, iz], [-i z*, 0]].
fn thermal_symbol(model: &ChainModel, beta: f64, k: f64) -> Symbol {
    let z = z_of(model, k);
    let eps = z.norm();
    let zero = C64::new(0.0, 0.0);
    if eps == 0.0 {
        return [[zero; 2]; 2];
    }
    let f = if beta.is_infinite() { 1.0 } else { (0.5 * beta * eps).tanh() };
    let i = C64::new(0.0, 1.0);
    [[zero, -i * z * (f / eps)], [i * z.conj() * (f / eps), zero]]
}

/// Symbol of the state evolved from the ground state of `q.pre` for time `t` under `q.post`.
pub fn quench_symbol(q: &QuenchPair, t: f64, k: f64) -> [[C64; 2]; 2] {
    let g0 = thermal_symbol(&q.pre, f64::INFINITY, k);
    let z = z_of(&q.post, k);
    let eps = z.norm();
    if eps == 0.0 || t == 0.0 {
        return g0;
    }
    let (sn, cs) = (eps * t).sin_cos();
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    // e^{ĥ t} with ĥ = [[0, z], [-z*, 0]], ĥ² = -ε²
    let u = [[one * cs, z * (sn / eps)], [-z.conj() * (sn / eps), one * cs]];
    let ud = [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]];
    let mut tmp = [[zero; 2]; 2];
    let mut out = [[zero; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                tmp[a][b] += u[a][c] * g0[c][b];
            }
        }
    }
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                out[a][b] += tmp[a][c] * ud[c][b];
            }
        }
    }
    out
}

/// Block-Toeplitz matrix on `n` sites from a 2x2 symbol: entry ((l,a),(m,b)) is
/// the Fourier coefficient ∫dk/2π e^{ik(l-m)} symbol_ab(k).
fn block_toeplitz<F: Fn(f64) -> Symbol>(symbol: F, n: usize, m_points: usize) -> Array2<C64> {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(m_points);
    let mut bufs = vec![vec![C64::new(0.0, 0.0); m_points]; 4];
    for j in 0..m_points {
        let k = 2.0 * std::f64::consts::PI * j as f64 / m_points as f64;
        let s = symbol(k);
        bufs[0][j] = s[0][0];
        bufs[1][j] = s[0][1];
        bufs[2][j] = s[1][0];
        bufs[3][j] = s[1][1];
    }
    for b in bufs.iter_mut() {
        fft.process(b);
    }
    let norm = 1.0 / m_points as f64;
    let coeff = |ab: usize, d: isize| -> C64 {
        let idx = if d >= 0 { d as usize } else { (m_points as isize + d) as usize };
        bufs[ab][idx] * norm
    };
    let mut out = Array2::zeros((2 * n, 2 * n));
    for l in 0..n {
        for m in 0..n {
            let d = l as isize - m as isize;
            out[[2 * l, 2 * m]] = coeff(0, d);
            out[[2 * l, 2 * m + 1]] = coeff(1, d);
            out[[2 * l + 1, 2 * m]] = coeff(2, d);
            out[[2 * l + 1, 2 * m + 1]] = coeff(3, d);
        }
    }
    out
}

fn antisym(m: Array2<C64>) -> Array2<C64> {
    let t = m.t().to_owned();
    (&m - &t) * C64::new(0.5, 0.0)
}

/// Window of `w` sites cut from a translation-invariant state given by its
/// symbol, with the defect factor assembled from `pad` sites on each side and
/// (for mixed states) the Toeplitz matrix of `mixed_root`.
fn window_from_symbol<F, G>(
    symbol: F,
    mixed_root: Option<G>,
    w: usize,
    pad: usize,
    m_points: usize,
) -> CorrelationMatrix
where
    F: Fn(f64) -> Symbol,
    G: Fn(f64) -> f64,
{
    let big = w + 2 * pad;
    let full = antisym(block_toeplitz(&symbol, big, m_points));
    let inner = 2 * pad..2 * (pad + w);
    let data = full.slice(s![inner.clone(), inner.clone()]).to_owned();
    let mut cols: Vec<Array2<C64>> = Vec::new();
    if pad > 0 {
        cols.push(full.slice(s![inner.clone(), ..2 * pad]).to_owned());
        cols.push(full.slice(s![inner.clone(), 2 * (pad + w)..]).to_owned());
    }
    if let Some(root) = mixed_root {
        let zero = C64::new(0.0, 0.0);
        let sroot = block_toeplitz(
            |k| {
                let r = C64::new(root(k), 0.0);
                [[r, zero], [zero, r]]
            },
            big,
            m_points,
        );
        cols.push(sroot.slice(s![inner.clone(), ..]).to_owned());
    }
    let ncol: usize = cols.iter().map(|c| c.ncols()).sum();
    let mut k = Array2::zeros((2 * w, ncol));
    let mut at = 0;
    for c in cols {
        let nc = c.ncols();
        k.slice_mut(s![.., at..at + nc]).assign(&c);
        at += nc;
    }
    CorrelationMatrix::from_parts(data, Some(k))
}

/// Ground state of the infinite chain restricted to `w` contiguous sites.
///
/// In the ordered phase this is the spin-flip symmetric mixture of the two
/// symmetry-broken states, which share all parity-even correlations.
pub fn ground_state_correlations(model: &ChainModel, w: usize) -> CorrelationMatrix {
    ground_state_with(model, w, WindowOptions::default())
}

pub fn ground_state_with(model: &ChainModel, w: usize, opts: WindowOptions) -> CorrelationMatrix {
    let m = opts.points(model, w + 2 * opts.padding);
    window_from_symbol(|k| thermal_symbol(model, f64::INFINITY, k), None::<fn(f64) -> f64>, w, opts.padding, m)
}

/// Thermal state of the infinite chain at inverse temperature `beta`, restricted to `w` sites.
pub fn thermal_correlations(model: &ChainModel, beta: f64, w: usize) -> CorrelationMatrix {
    thermal_with(model, beta, w, WindowOptions::default())
}

pub fn thermal_with(model: &ChainModel, beta: f64, w: usize, opts: WindowOptions) -> CorrelationMatrix {
    assert!(beta >= 0.0, "negative inverse temperature");
    if beta.is_infinite() {
        return ground_state_with(model, w, opts);
    }
    if beta == 0.0 {
        let mut k = Array2::zeros((2 * w, 2 * w));
        for i in 0..2 * w {
            k[[i, i]] = C64::new(1.0, 0.0);
        }
        return CorrelationMatrix::from_parts(Array2::zeros((2 * w, 2 * w)), Some(k));
    }
    let m = opts.points(model, w + 2 * opts.padding);
    let root = |k: f64| 1.0 / (0.5 * beta * model.dispersion(k)).cosh();
    window_from_symbol(|k| thermal_symbol(model, beta, k), Some(root), w, opts.padding, m)
}

/// State at time `t` after the quench `q`, starting from the pre-quench ground state.
pub fn quench_correlations(q: &QuenchPair, t: f64, w: usize) -> CorrelationMatrix {
    quench_with(q, t, w, WindowOptions::default())
}

pub fn quench_with(q: &QuenchPair, t: f64, w: usize, opts: WindowOptions) -> CorrelationMatrix {
    assert!(t >= 0.0, "negative time");
    let reach = (2.0 * q.post.max_velocity() * t).ceil() as usize;
    let pad = opts.padding + reach;
    let m = opts.points(&q.post, w + 2 * pad + reach);
    window_from_symbol(|k| quench_symbol(q, t, k), None::<fn(f64) -> f64>, w, pad, m)
}

/// Real antisymmetric single-particle matrix `H` of the open chain, with the
/// many-body Hamiltonian equal to `(i/4) sum_jk H_jk a_j a_k`.
pub fn majorana_hamiltonian(model: &ChainModel, n_sites: usize) -> Array2<f64> {
    let mut h = Array2::zeros((2 * n_sites, 2 * n_sites));
    let mut put = |i: usize, j: usize, v: f64| {
        h[[i, j]] += v;
        h[[j, i]] -= v;
    };
    for s in 0..n_sites {
        put(2 * s, 2 * s + 1, 2.0 * model.h);
        if s + 1 < n_sites {
            put(2 * s + 1, 2 * s + 2, 1.0 + model.gamma);
            put(2 * s, 2 * s + 3, -(1.0 - model.gamma));
        }
    }
    h
}

/// Spectral data of `K = iH`: ascending energies and eigenvectors.
pub(crate) fn single_particle_spectrum(model: &ChainModel, n_sites: usize) -> Result<(Array1<f64>, Array2<C64>)> {
    let h = majorana_hamiltonian(model, n_sites);
    let k = h.mapv(|v| C64::new(0.0, v));
    let (e, v) = crate::linalg::eigh(&k)?;
    Ok((e, v))
}

/// Thermal state of an open chain of `n_sites` spins. At `beta = ∞` the ordered
/// phase gives the equal mixture of the two lowest states (the softest mode is
/// left unoccupied-or-occupied with probability 1/2); otherwise the ground state.
pub fn finite_chain_correlations(
    model: &ChainModel,
    n_sites: usize,
    beta: f64,
    _boundary: Boundary,
) -> Result<CorrelationMatrix> {
    assert!(beta >= 0.0, "negative inverse temperature");
    let (e, v) = single_particle_spectrum(model, n_sites)?;
    let n = 2 * n_sites;
    let mut g = vec![0.0; n];
    let mut root = vec![0.0; n];
    for j in 0..n {
        if beta.is_infinite() {
            g[j] = if e[j] > 0.0 { -1.0 } else if e[j] < 0.0 { 1.0 } else { 0.0 };
            root[j] = if e[j] == 0.0 { 1.0 } else { 0.0 };
        } else {
            let x = 0.5 * beta * e[j];
            g[j] = -x.tanh();
            root[j] = 1.0 / x.cosh();
        }
    }
    if beta.is_infinite() && model.is_ferromagnetic() {
        // eigenvalues come in ± pairs; the softest pair sits in the middle
        g[n_sites - 1] = 0.0;
        g[n_sites] = 0.0;
        root[n_sites - 1] = 1.0;
        root[n_sites] = 1.0;
    }
    let mut scaled = v.clone();
    for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|x| x * g[j]);
    }
    let vh = v.t().mapv(|x| x.conj());
    let data = antisym(scaled.dot(&vh));
    let keep: Vec<usize> = (0..n).filter(|&j| root[j] > 0.0).collect();
    let mut k = Array2::zeros((n, keep.len()));
    for (c, &j) in keep.iter().enumerate() {
        let col = v.column(j).mapv(|x| x * root[j]);
        k.column_mut(c).assign(&col);
    }
    Ok(CorrelationMatrix::from_parts(data, Some(k)))
}
