//! Exact diagonalization reference on small chains.
//!
//! Basis states are bit strings with site 0 as the most significant bit;
//! bit value 0 is spin up along z.

use ndarray::{Array1, Array2};
use ndarray_linalg::SVD;

use crate::linalg::eigh;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::ChainModel;

pub const MAX_SITES: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdBoundary {
    Open,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Density matrix on `l` spins with (when known) its eigen-decomposition.
#[derive(Clone, Debug)]
pub struct DenseState {
    pub l: usize,
    pub matrix: Array2<C64>,
    spectrum: Option<(Vec<f64>, Array2<C64>)>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn bit(state: usize, l: usize, site: usize) -> usize {
    (state >> (l - 1 - site)) & 1
}

fn flip(state: usize, l: usize, site: usize) -> usize {
    state ^ (1 << (l - 1 - site))
}

/// Action of a Pauli matrix on a basis state: (new state, amplitude).
fn pauli_action(p: Pauli, state: usize, l: usize, site: usize) -> (usize, C64) {
    let b = bit(state, l, site);
    match p {
        Pauli::X => (flip(state, l, site), C64::new(1.0, 0.0)),
        Pauli::Y => (flip(state, l, site), if b == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) }),
        Pauli::Z => (state, if b == 0 { C64::new(1.0, 0.0) } else { C64::new(-1.0, 0.0) }),
    }
}

fn check_size(l: usize) -> Result<()> {
    if l == 0 || l > MAX_SITES {
        return Err(Error::Usage(format!("exact diagonalization needs 1 <= L <= {MAX_SITES}, got {l}")));
    }
    Ok(())
}

/// Dense operator for a product of Pauli matrices on distinct sites.
pub fn pauli_string(l: usize, ops: &[(usize, Pauli)]) -> Array2<C64> {
    let d = 1 << l;
    let mut m = Array2::zeros((d, d));
    for s in 0..d {
        let mut st = s;
        let mut amp = C64::new(1.0, 0.0);
        for &(site, p) in ops.iter().rev() {
            let (ns, a) = pauli_action(p, st, l, site);
            st = ns;
            amp *= a;
        }
        m[[st, s]] += amp;
    }
    m
}

/// X_A = sum over `sites` of σx.
pub fn sum_x(l: usize, sites: &[usize]) -> Array2<C64> {
    let d = 1 << l;
    let mut m = Array2::zeros((d, d));
    for &s in sites {
        for st in 0..d {
            m[[flip(st, l, s), st]] += C64::new(1.0, 0.0);
        }
    }
    m
}

/// H = -sum [(1+γ)/2 σxσx + (1-γ)/2 σyσy + h σz].
pub fn build_hamiltonian(l: usize, h: f64, gamma: f64, boundary: EdBoundary) -> Result<Array2<C64>> {
    check_size(l)?;
    let d = 1 << l;
    let mut m = Array2::zeros((d, d));
    let mut bonds: Vec<(usize, usize)> = (0..l.saturating_sub(1)).map(|s| (s, s + 1)).collect();
    if boundary == EdBoundary::Periodic && l > 2 {
        bonds.push((l - 1, 0));
    }
    for st in 0..d {
        for s in 0..l {
            let (_, a) = pauli_action(Pauli::Z, st, l, s);
            m[[st, st]] -= a * h;
        }
        for &(i, j) in &bonds {
            for (p, c) in [(Pauli::X, 0.5 * (1.0 + gamma)), (Pauli::Y, 0.5 * (1.0 - gamma))] {
                if c == 0.0 {
                    continue;
                }
                let (s1, a1) = pauli_action(p, st, l, j);
                let (s2, a2) = pauli_action(p, s1, l, i);
                m[[s2, st]] -= a1 * a2 * c;
            }
        }
    }
    Ok(m)
}

pub fn model_hamiltonian(model: &ChainModel, l: usize, boundary: EdBoundary) -> Result<Array2<C64>> {
    build_hamiltonian(l, model.h, model.gamma, boundary)
}

impl DenseState {
    pub fn from_matrix(matrix: Array2<C64>) -> Result<Self> {
        let d = matrix.nrows();
        if !d.is_power_of_two() || matrix.ncols() != d {
            return Err(Error::Usage("density matrix dimension must be a power of two".into()));
        }
        Ok(DenseState { l: d.trailing_zeros() as usize, matrix, spectrum: None })
    }

    /// Mixture sum_k w_k |v_k><v_k| of orthonormal columns `vecs`.
    pub fn from_spectrum(weights: Vec<f64>, vecs: Array2<C64>) -> Result<Self> {
        let d = vecs.nrows();
        let mut scaled = vecs.clone();
        for (j, mut c) in scaled.columns_mut().into_iter().enumerate() {
            c.mapv_inplace(|x| x * weights[j]);
        }
        let matrix = scaled.dot(&vecs.t().mapv(|x| x.conj()));
        let mut s = Self::from_matrix(matrix)?;
        if d != 1 << s.l {
            return Err(Error::Usage("bad spectral data".into()));
        }
        s.spectrum = Some((weights, vecs));
        Ok(s)
    }

    pub fn pure(psi: &Array1<C64>) -> Result<Self> {
        let nrm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v = psi.mapv(|z| z / nrm).insert_axis(ndarray::Axis(1));
        Self::from_spectrum(vec![1.0], v)
    }

    pub fn maximally_mixed(l: usize) -> Result<Self> {
        let d = 1 << l;
        Self::from_spectrum(vec![1.0 / d as f64; d], Array2::eye(d))
    }

    /// Eigenvalues (clamped at 0) and eigenvectors of the density matrix.
    pub fn spectrum(&self) -> Result<(Vec<f64>, Array2<C64>)> {
        if let Some((w, v)) = &self.spectrum {
            if v.ncols() == v.nrows() {
                return Ok((w.clone(), v.clone()));
            }
        }
        let (e, v) = eigh(&self.matrix)?;
        Ok((e.iter().map(|x| x.max(0.0)).collect(), v))
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|z| z.re).sum()
    }

    pub fn expect(&self, op: &Array2<C64>) -> C64 {
        let mut s = zero();
        for ((i, j), v) in self.matrix.indexed_iter() {
            s += v * op[[j, i]];
        }
        s
    }

    /// Partial trace keeping `sites` (in the given order).
    pub fn reduce(&self, sites: &[usize]) -> Result<DenseState> {
        let l = self.l;
        if sites.is_empty() || sites.iter().any(|&s| s >= l) {
            return Err(Error::Usage("invalid subsystem".into()));
        }
        let rest: Vec<usize> = (0..l).filter(|s| !sites.contains(s)).collect();
        let (da, db) = (1 << sites.len(), 1 << rest.len());
        let split = |st: usize| -> (usize, usize) {
            let a = sites.iter().fold(0, |acc, &s| (acc << 1) | bit(st, l, s));
            let b = rest.iter().fold(0, |acc, &s| (acc << 1) | bit(st, l, s));
            (a, b)
        };
        let (w, v) = match &self.spectrum {
            Some(sp) => sp.clone(),
            None => self.spectrum()?,
        };
        let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k] > 0.0).collect();
        let mut m = Array2::<C64>::zeros((da, db * keep.len()));
        for (c, &k) in keep.iter().enumerate() {
            let sw = w[k].sqrt();
            for st in 0..(1 << l) {
                let (a, b) = split(st);
                m[[a, c * db + b]] = v[[st, k]] * sw;
            }
        }
        let (u, s, _) = m.svd(true, false)?;
        let u = u.unwrap();
        let mut weights = vec![0.0; da];
        for (i, sv) in s.iter().enumerate() {
            weights[i] = sv * sv;
        }
        DenseState::from_spectrum(weights, u)
    }
}

/// Thermal state e^{-βH}/Z. At β = ∞ the ground state, or (when `ordered`)
/// the equal mixture of the two lowest eigenstates.
pub fn thermal_state(h: &Array2<C64>, beta: f64, ordered: bool) -> Result<DenseState> {
    let (e, v) = eigh(&h)?;
    let d = e.len();
    let mut w = vec![0.0; d];
    if beta.is_infinite() {
        if ordered && d >= 2 {
            w[0] = 0.5;
            w[1] = 0.5;
        } else {
            w[0] = 1.0;
        }
    } else {
        let e0 = e[0];
        for i in 0..d {
            w[i] = (-beta * (e[i] - e0)).exp();
        }
        let z: f64 = w.iter().sum();
        for x in w.iter_mut() {
            *x /= z;
        }
    }
    DenseState::from_spectrum(w, v)
}

pub fn thermal(model: &ChainModel, l: usize, beta: f64, boundary: EdBoundary) -> Result<DenseState> {
    let h = model_hamiltonian(model, l, boundary)?;
    thermal_state(&h, beta, model.is_ferromagnetic())
}

fn in_eigenbasis(v: &Array2<C64>, op: &Array2<C64>) -> Array2<C64> {
    v.t().mapv(|x| x.conj()).dot(&op.dot(v))
}

/// F/4 = ½ sum_ij (p_i - p_j)² / (p_i + p_j) |O_ij|².
pub fn qfi_exact(rho: &DenseState, op: &Array2<C64>) -> Result<f64> {
    let (p, v) = rho.spectrum()?;
    let o = in_eigenbasis(&v, op);
    let mut s = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            let t = p[i] + p[j];
            if t > 0.0 {
                s += 0.5 * (p[i] - p[j]).powi(2) / t * o[[i, j]].norm_sqr();
            }
        }
    }
    Ok(s)
}

/// I_α = sum_ij [½(p_i + p_j) - p_i^α p_j^{1-α}] |O_ij|²; the imaginary part
/// is returned alongside for diagnostics.
pub fn wydi_exact_complex(rho: &DenseState, op: &Array2<C64>, alpha: C64) -> Result<C64> {
    let (p, v) = rho.spectrum()?;
    let o = in_eigenbasis(&v, op);
    let pw = |x: f64, a: C64| if x > 0.0 { (a * x.ln()).exp() } else { zero() };
    let beta = C64::new(1.0, 0.0) - alpha;
    let pa: Vec<C64> = p.iter().map(|&x| pw(x, alpha)).collect();
    let pb: Vec<C64> = p.iter().map(|&x| pw(x, beta)).collect();
    let mut s = zero();
    for i in 0..p.len() {
        for j in 0..p.len() {
            let w = 0.5 * (p[i] + p[j]) - pa[i] * pb[j];
            s += w * o[[i, j]].norm_sqr();
        }
    }
    Ok(s)
}

pub fn wydi_exact(rho: &DenseState, op: &Array2<C64>, alpha: C64) -> Result<f64> {
    Ok(wydi_exact_complex(rho, op, alpha)?.re)
}

/// tr ρ O² - (tr ρ O)².
pub fn variance_exact(rho: &DenseState, op: &Array2<C64>) -> f64 {
    let o2 = op.dot(op);
    let m = rho.expect(op).re;
    rho.expect(&o2).re - m * m
}

pub fn apply_unitary(rho: &DenseState, u: &Array2<C64>) -> Result<DenseState> {
    let ud = u.t().mapv(|x| x.conj());
    if let Some((w, v)) = &rho.spectrum {
        return DenseState::from_spectrum(w.clone(), u.dot(v));
    }
    DenseState::from_matrix(u.dot(&rho.matrix).dot(&ud))
}

/// e^{-iHt}.
pub fn propagator(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    let (e, v) = eigh(&h)?;
    let mut scaled = v.clone();
    for (j, mut c) in scaled.columns_mut().into_iter().enumerate() {
        let ph = C64::new(0.0, -e[j] * t).exp();
        c.mapv_inplace(|x| x * ph);
    }
    Ok(scaled.dot(&v.t().mapv(|x| x.conj())))
}

pub fn evolve_exact(rho: &DenseState, h: &Array2<C64>, t: f64) -> Result<DenseState> {
    apply_unitary(rho, &propagator(h, t)?)
}

/// Jordan–Wigner Majoranas a_{2s} = Z..Z X_s, a_{2s+1} = Z..Z Y_s (0-based).
pub fn majorana_operators(l: usize) -> Vec<Array2<C64>> {
    let mut out = Vec::with_capacity(2 * l);
    for s in 0..l {
        for p in [Pauli::X, Pauli::Y] {
            let mut ops: Vec<(usize, Pauli)> = (0..s).map(|j| (j, Pauli::Z)).collect();
            ops.push((s, p));
            out.push(pauli_string(l, &ops));
        }
    }
    out
}

/// Γ_jk = δ_jk - tr(ρ a_j a_k).
pub fn majorana_correlations(rho: &DenseState) -> Array2<C64> {
    let a = majorana_operators(rho.l);
    let n = a.len();
    let ra: Vec<Array2<C64>> = a.iter().map(|x| rho.matrix.dot(x)).collect();
    let mut g = Array2::zeros((n, n));
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            // tr(ρ a_j a_k) = sum (ρ a_j)_{xy} (a_k)_{yx}
            let mut s = zero();
            for ((x, y), v) in ra[j].indexed_iter() {
                s += v * a[k][[y, x]];
            }
            g[[j, k]] = -s;
        }
    }
    g
}

/// Dense ρ[Γ] = exp(¼ a^T W a)/Z with Γ = tanh(W/2), for Hermitian Γ with |ν| < 1.
pub fn gaussian_density(gamma: &Array2<C64>) -> Result<DenseState> {
    let n = gamma.nrows();
    let l = n / 2;
    let (nu, u) = eigh(&gamma)?;
    if nu.iter().any(|x| x.abs() >= 1.0) {
        return Err(Error::Usage("gaussian_density needs |ν| < 1".into()));
    }
    let f: Vec<f64> = nu.iter().map(|x| 2.0 * x.atanh()).collect();
    let mut scaled = u.clone();
    for (j, mut c) in scaled.columns_mut().into_iter().enumerate() {
        c.mapv_inplace(|x| x * f[j]);
    }
    let w = scaled.dot(&u.t().mapv(|x| x.conj()));
    let a = majorana_operators(l);
    let d = 1 << l;
    let mut x = Array2::<C64>::zeros((d, d));
    for j in 0..n {
        for k in 0..n {
            if w[[j, k]].norm() > 0.0 {
                x = x + a[j].dot(&a[k]) * (w[[j, k]] * 0.25);
            }
        }
    }
    let xh = (&x + &x.t().mapv(|z| z.conj())) * C64::new(0.5, 0.0);
    let (e, v) = eigh(&xh)?;
    let emax = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut wts: Vec<f64> = e.iter().map(|x| (x - emax).exp()).collect();
    let z: f64 = wts.iter().sum();
    for x in wts.iter_mut() {
        *x /= z;
    }
    DenseState::from_spectrum(wts, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_ising_spectrum() {
        let h = build_hamiltonian(2, 0.0, 1.0, EdBoundary::Open).unwrap();
        let (e, _) = eigh(&h).unwrap();
        let want = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_site_field() {
        let h = build_hamiltonian(1, 0.7, 1.0, EdBoundary::Open).unwrap();
        let (e, _) = eigh(&h).unwrap();
        assert!((e[0] + 0.7).abs() < 1e-14 && (e[1] - 0.7).abs() < 1e-14);
    }

    #[test]
    fn ghz_fisher_information() {
        let l = 5;
        let d = 1 << l;
        // |→...→> + |←...←> in the z basis
        let mut psi = Array1::<C64>::zeros(d);
        for st in 0..d {
            let ones = st.count_ones() as i32;
            let plus = 1.0;
            let minus = if ones % 2 == 0 { 1.0 } else { -1.0 };
            psi[st] = C64::new(plus + minus, 0.0);
        }
        let rho = DenseState::pure(&psi).unwrap();
        let x = sum_x(l, &(0..l).collect::<Vec<_>>());
        assert!((qfi_exact(&rho, &x).unwrap() - 25.0).abs() < 1e-9);
    }

    #[test]
    fn z_ghz_marginal_is_incoherent() {
        let l = 4;
        let mut psi = Array1::<C64>::zeros(1 << l);
        psi[0] = C64::new(1.0, 0.0);
        psi[(1 << l) - 1] = C64::new(1.0, 0.0);
        let rho = DenseState::pure(&psi).unwrap();
        let half = rho.reduce(&[0, 1]).unwrap();
        assert!((half.trace() - 1.0).abs() < 1e-14);
        let xa = sum_x(2, &[0, 1]);
        assert!((qfi_exact(&half, &xa).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn maximally_mixed_has_no_information() {
        let rho = DenseState::maximally_mixed(3).unwrap();
        let x = sum_x(3, &[0, 1, 2]);
        assert!(qfi_exact(&rho, &x).unwrap().abs() < 1e-14);
        assert!(wydi_exact(&rho, &x, C64::new(0.5, 0.3)).unwrap().abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_commutes_with_parity() {
        let h = build_hamiltonian(4, 0.37, 0.6, EdBoundary::Periodic).unwrap();
        let p = pauli_string(4, &[(0, Pauli::Z), (1, Pauli::Z), (2, Pauli::Z), (3, Pauli::Z)]);
        let c = h.dot(&p) - p.dot(&h);
        assert!(c.iter().all(|z| z.norm() < 1e-12));
    }
}
