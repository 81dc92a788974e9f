//! Exact large-time asymptotics of the one-particle part of the reduced
//! density matrix after a local perturbation of a ferromagnet whose domain
//! walls are conserved, and the corresponding contribution to the QFI.
//!
//! For a block `[l, r]` at time `t` a domain wall with velocity v(k) is in the
//! block when l ≤ v(k)t ≤ r. The QFI contribution is built from the window
//! integrals ℒ_n, 𝒜_n, 𝒪_n, 𝒪⁽²⁾_n (n = -1, 0, 1) through 2×2 matrices.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::ChainModel;
use crate::quad;

const DEGENERATE: f64 = 1e-14;
const ROOT_CELLS: usize = 2048;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type PairFn = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;

/// Two domain walls on top of a ferromagnetic ground state, created by
/// U₀ = exp(iα σx₀).
#[derive(Clone)]
pub struct TwoParticleSector {
    scattering: Option<PairFn>,
    dispersion: RealFn,
    velocity: RealFn,
    pub alpha: f64,
}

impl std::fmt::Debug for TwoParticleSector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TwoParticleSector")
            .field("noninteracting", &self.is_noninteracting())
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

impl TwoParticleSector {
    /// Noninteracting walls, S(k, p) = -1.
    pub fn noninteracting(
        dispersion: impl Fn(f64) -> f64 + Send + Sync + 'static,
        velocity: impl Fn(f64) -> f64 + Send + Sync + 'static,
        alpha: f64,
    ) -> Self {
        TwoParticleSector { scattering: None, dispersion: Arc::new(dispersion), velocity: Arc::new(velocity), alpha }
    }

    /// Noninteracting walls with the dispersion of the chain `model`.
    pub fn with_chain_dispersion(model: &ChainModel, alpha: f64) -> Self {
        let (m1, m2) = (*model, *model);
        Self::noninteracting(move |k| m1.dispersion(k), move |k| m2.group_velocity(k), alpha)
    }

    /// Walls hopping with amplitude `hop`: ε(k) = -2 hop cos k.
    pub fn nearest_neighbour(hop: f64, alpha: f64) -> Self {
        Self::noninteracting(move |k| -2.0 * hop * k.cos(), move |k| 2.0 * hop * k.sin(), alpha)
    }

    /// Replaces the scattering phase; it must satisfy S(k,p)S(p,k) = 1.
    pub fn with_scattering(mut self, s: impl Fn(f64, f64) -> C64 + Send + Sync + 'static) -> Result<Self> {
        let n = 16;
        for i in 0..n {
            for j in 0..n {
                let k = -PI + 2.0 * PI * (i as f64 + 0.3) / n as f64;
                let p = -PI + 2.0 * PI * (j as f64 + 0.7) / n as f64;
                let prod = s(k, p) * s(p, k);
                if (prod - C64::new(1.0, 0.0)).norm() > 1e-10 {
                    return Err(Error::Domain(format!("S(k,p)S(p,k) = {prod} at k={k}, p={p}")));
                }
            }
        }
        self.scattering = Some(Arc::new(s));
        Ok(self)
    }

    pub fn is_noninteracting(&self) -> bool {
        self.scattering.is_none()
    }

    pub fn scattering(&self, k: f64, p: f64) -> C64 {
        match &self.scattering {
            None => C64::new(-1.0, 0.0),
            Some(s) => s(k, p),
        }
    }

    pub fn dispersion(&self, k: f64) -> f64 {
        (self.dispersion)(k)
    }

    pub fn velocity(&self, k: f64) -> f64 {
        (self.velocity)(k)
    }

    /// The sector seen in a mirror: v(k) → -v(-k).
    pub fn reflected(&self) -> Self {
        let (e, v) = (self.dispersion.clone(), self.velocity.clone());
        TwoParticleSector {
            scattering: self.scattering.clone(),
            dispersion: Arc::new(move |k| e(-k)),
            velocity: Arc::new(move |k| -v(-k)),
            alpha: self.alpha,
        }
    }
}

/// Window integrals at (t, l, r), each stored for n = -1, 0, 1 at index n+1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowIntegrals {
    pub t: f64,
    pub l: f64,
    pub r: f64,
    pub left: [C64; 3],
    pub inside: [C64; 3],
    pub order: [C64; 3],
    pub order2: [C64; 3],
}

impl WindowIntegrals {
    pub fn l_n(&self, n: i32) -> C64 {
        self.left[(n + 1) as usize]
    }

    pub fn a_n(&self, n: i32) -> C64 {
        self.inside[(n + 1) as usize]
    }

    pub fn o_n(&self, n: i32) -> C64 {
        self.order[(n + 1) as usize]
    }

    pub fn o2_n(&self, n: i32) -> C64 {
        self.order2[(n + 1) as usize]
    }

    /// Same integrals with the exchange (n = ±1) terms dropped.
    pub fn semiclassical(&self) -> Self {
        let z = C64::new(0.0, 0.0);
        let keep = |a: [C64; 3]| [z, a[1], z];
        WindowIntegrals {
            left: keep(self.left),
            inside: keep(self.inside),
            order: keep(self.order),
            order2: keep(self.order2),
            ..*self
        }
    }
}

/// ∫_{-π}^{π} dk/2π f(k) e^{ink} for n = -1, 0, 1, split at `pts`.
fn fourier3(f: impl Fn(f64) -> f64, pts: &[f64]) -> [C64; 3] {
    let (atol, rtol) = (1e-14, 1e-13);
    let re0 = quad::integrate_pts(&f, pts, atol, rtol);
    let re1 = quad::integrate_pts(|k| f(k) * k.cos(), pts, atol, rtol);
    let im1 = quad::integrate_pts(|k| f(k) * k.sin(), pts, atol, rtol);
    let s = 1.0 / (2.0 * PI);
    [C64::new(re1, -im1) * s, C64::new(re0 * s, 0.0), C64::new(re1, im1) * s]
}

/// The seven window integrals of `sector` by quadrature split at the momenta
/// where v(k)t crosses l or r.
pub fn window_integrals(sector: &TwoParticleSector, t: f64, l: f64, r: f64) -> Result<WindowIntegrals> {
    if !(t > 0.0) || !(r >= l) {
        return Err(Error::Usage(format!("window integrals need t > 0 and r ≥ l (t={t}, l={l}, r={r})")));
    }
    let vt = |k: f64| sector.velocity(k) * t;
    let mut roots = quad::roots_on_grid(|k| vt(k) - l, -PI, PI, ROOT_CELLS);
    roots.extend(quad::roots_on_grid(|k| vt(k) - r, -PI, PI, ROOT_CELLS));
    let pts = quad::breakpoints(-PI, PI, roots);
    let step = |x: f64| if x >= 0.0 { 1.0 } else { 0.0 };
    let inside = |k: f64| step(r - vt(k)) * step(vt(k) - l);
    let weight = |k: f64| (r + l) / t - 2.0 * sector.velocity(k);
    Ok(WindowIntegrals {
        t,
        l,
        r,
        left: fourier3(|k| step(l - vt(k)), &pts),
        inside: fourier3(inside, &pts),
        order: fourier3(|k| inside(k) * weight(k), &pts),
        order2: fourier3(|k| inside(k) * weight(k).powi(2), &pts),
    })
}

/// ℙ, 𝕆 and 𝕆⁽²⁾ in the basis ⟨Ψ₀| = 𝒜₀^{1/2}(1, 0),
/// ⟨Ψ₁| = 𝒜₀^{-1/2}(𝒜₋₁, (𝒜₀² - |𝒜₁|²)^{1/2}).
pub fn p_o_matrices(w: &WindowIntegrals) -> Result<(Array2<C64>, Array2<C64>, Array2<C64>)> {
    let a0 = w.a_n(0).re;
    let (a1, am1) = (w.a_n(1), w.a_n(-1));
    let gap = a0 * a0 - a1.norm_sqr();
    if gap <= DEGENERATE {
        return Err(Error::DegenerateBasis(gap));
    }
    let s = gap.sqrt();
    let (l0, l1, lm1) = (w.l_n(0), w.l_n(1), w.l_n(-1));
    let plus = a0 * a0 + a1.norm_sqr();
    let p = Array2::from_shape_vec(
        (2, 2),
        vec![
            l0 * plus / a0 - 2.0 * (a1 * lm1).re,
            s * (a1 * l0 - a0 * l1) / a0,
            s * (am1 * l0 - a0 * lm1) / a0,
            l0 * gap / a0,
        ],
    )
    .expect("2x2");
    let op = |o: [C64; 3]| {
        let (o0, o1, om1) = (o[1], o[2], o[0]);
        Array2::from_shape_vec(
            (2, 2),
            vec![
                o0 / a0,
                (a0 * o1 - a1 * o0) / (a0 * s),
                (a0 * om1 - am1 * o0) / (a0 * s),
                (plus * o0 - 2.0 * a0 * (a1 * om1).re) / (a0 * gap),
            ],
        )
        .expect("2x2")
    };
    Ok((p, op(w.order), op(w.order2)))
}

fn tr(m: &Array2<C64>) -> C64 {
    m[[0, 0]] + m[[1, 1]]
}

/// F/4 restricted to a rank-two block ℙ, with 𝕆 and 𝕆⁽²⁾ the projected
/// operator and its projected square; ℙ need not be normalized.
pub fn projected_qfi(p: &Array2<C64>, o: &Array2<C64>, o2: &Array2<C64>) -> f64 {
    let tp = tr(p).re;
    if tp.abs() < 1e-300 {
        return 0.0;
    }
    let tp2 = tr(&p.dot(p)).re;
    let first = tr(&p.dot(o2)).re - tr(&p.dot(o)).re.powi(2) / tp;
    let g = tp2 - 0.5 * tp * tp;
    let second = if g > 1e-8 * tp * tp {
        let id = Array2::<C64>::eye(2);
        let centred = p - &(id * C64::new(0.5 * tp, 0.0));
        let x = tr(&centred.dot(o)).re;
        let po = p.dot(o);
        let op = o.dot(p);
        let comm = &po - &op;
        let y = 0.5 * tr(&comm.dot(&(-&comm))).re;
        (tp2 - tp * tp) * (x * x + y) / (tp * g)
    } else {
        // ℙ ∝ 1: the quotient tends to the basis-free tr[(𝕆 - ½tr𝕆)²]
        let half = 0.5 * tr(o);
        let d0 = o[[0, 0]] - half;
        let d1 = o[[1, 1]] - half;
        let spread = (d0 * d0 + d1 * d1).re + 2.0 * (o[[0, 1]] * o[[1, 0]]).re;
        (tp2 - tp * tp) * spread / tp
    };
    first + second
}

fn block_length(l: f64, r: f64) -> f64 {
    r - l
}

/// χ of the right-moving one-particle term ℙ₊ from its window integrals.
pub fn chi_from_integrals(w: &WindowIntegrals) -> Result<f64> {
    if w.a_n(0).re <= DEGENERATE {
        // no weight in the block: ℙ → 0
        return Ok(0.0);
    }
    let (p, o, o2) = p_o_matrices(w)?;
    let len = block_length(w.l, w.r);
    Ok(w.t * w.t / (len * len) * projected_qfi(&p, &o, &o2))
}

fn require_free(sector: &TwoParticleSector) -> Result<()> {
    if !sector.is_noninteracting() {
        return Err(Error::Domain("one-particle asymptotics are available for S = -1 only".into()));
    }
    Ok(())
}

/// One-particle contribution χ|_ℙ = χ|_{ℙ₊} + χ|_{ℙ₋} for the block `[l, r]`
/// of length r - l. ℙ₋ is ℙ₊ of the mirrored system: l → -r, r → -l,
/// v(k) → -v(-k).
pub fn chi_one_particle(sector: &TwoParticleSector, t: f64, l: f64, r: f64) -> Result<f64> {
    require_free(sector)?;
    let plus = chi_from_integrals(&window_integrals(sector, t, l, r)?)?;
    let minus = chi_from_integrals(&window_integrals(&sector.reflected(), t, -r, -l)?)?;
    Ok(plus + minus)
}

/// The same contribution with exchange terms dropped.
pub fn chi_one_particle_semiclassical(sector: &TwoParticleSector, t: f64, l: f64, r: f64) -> Result<f64> {
    require_free(sector)?;
    let plus = chi_from_integrals(&window_integrals(sector, t, l, r)?.semiclassical())?;
    let minus = chi_from_integrals(&window_integrals(&sector.reflected(), t, -r, -l)?.semiclassical())?;
    Ok(plus + minus)
}

/// Closed form of the semiclassical ℙ₊ term: (2t²/|A|²) ℒ₀ (𝒪⁽²⁾₀ - 𝒪₀²/𝒜₀).
pub fn semiclassical_first_line(w: &WindowIntegrals) -> f64 {
    let a0 = w.a_n(0).re;
    if a0 <= DEGENERATE {
        return 0.0;
    }
    let len = block_length(w.l, w.r);
    2.0 * w.t * w.t / (len * len) * w.l_n(0).re * (w.o2_n(0).re - w.o_n(0).re.powi(2) / a0)
}

/// Finite periodic chains of `n_sites` spins with exactly two domain walls,
/// used to validate the overlaps of the kicked ground state. Sites are
/// labelled -L/2+1 ..= L/2 and stored at index label + L/2 - 1; bit value 1
/// means spin down.
pub mod bethe {
    use super::*;

    pub const MAX_SITES: usize = 14;

    fn index(n_sites: usize, label: i64) -> usize {
        (label + n_sites as i64 / 2 - 1) as usize
    }

    fn check(n_sites: usize) -> Result<()> {
        if n_sites < 4 || n_sites % 2 != 0 || n_sites > MAX_SITES {
            return Err(Error::Usage(format!("Bethe validation needs an even L in 4..={MAX_SITES}, got {n_sites}")));
        }
        Ok(())
    }

    /// Solutions k < p of e^{iLk} = e^{iLp} = -η (the S = -1 Bethe equations).
    pub fn momenta(n_sites: usize, eta: i8) -> Result<Vec<(f64, f64)>> {
        check(n_sites)?;
        let shift = if eta > 0 { 0.5 } else { 0.0 };
        let ks: Vec<f64> = (0..n_sites)
            .map(|m| {
                let k = 2.0 * PI * (m as f64 + shift) / n_sites as f64;
                if k > PI { k - 2.0 * PI } else { k }
            })
            .collect();
        let mut ks = ks;
        ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out = Vec::new();
        for i in 0..ks.len() {
            for j in i + 1..ks.len() {
                out.push((ks[i], ks[j]));
            }
        }
        Ok(out)
    }

    fn raw_amplitude(l: i64, n: i64, k: f64, p: f64) -> C64 {
        C64::new(0.0, l as f64 * k + n as f64 * p).exp() - C64::new(0.0, l as f64 * p + n as f64 * k).exp()
    }

    /// Z(k, p) normalizing |k, p; η⟩.
    pub fn normalization(n_sites: usize, k: f64, p: f64) -> Result<f64> {
        check(n_sites)?;
        let half = n_sites as i64 / 2;
        let mut s = 0.0;
        for l in -half + 1..half {
            for n in l + 1..=half {
                s += raw_amplitude(l, n, k, p).norm_sqr();
            }
        }
        Ok(1.0 / (2.0 * s).sqrt())
    }

    /// c_{ℓ,n}(k, p) = Z [e^{iℓk+inp} - e^{iℓp+ink}].
    pub fn amplitude(n_sites: usize, l: i64, n: i64, k: f64, p: f64) -> Result<C64> {
        Ok(raw_amplitude(l, n, k, p) * normalization(n_sites, k, p)?)
    }

    /// Basis index of |(ℓ, n)^±⟩: spins ℓ+1..=n down (+) or up (-).
    pub fn wall_pair_state(n_sites: usize, l: i64, n: i64, plus: bool) -> usize {
        let mut bits = 0usize;
        for j in l + 1..=n {
            bits |= 1 << (n_sites - 1 - index(n_sites, j));
        }
        if plus { bits } else { !bits & ((1 << n_sites) - 1) }
    }

    /// Dense |k, p; η⟩ in the computational basis (bit 1 = down, site index
    /// 0 is the most significant bit).
    pub fn state(n_sites: usize, k: f64, p: f64, eta: i8) -> Result<Array1<C64>> {
        check(n_sites)?;
        let half = n_sites as i64 / 2;
        let z = normalization(n_sites, k, p)?;
        let mut psi = Array1::<C64>::zeros(1 << n_sites);
        for l in -half + 1..half {
            for n in l + 1..=half {
                let c = raw_amplitude(l, n, k, p) * z;
                psi[wall_pair_state(n_sites, l, n, true)] += c;
                psi[wall_pair_state(n_sites, l, n, false)] += c * eta as f64;
            }
        }
        Ok(psi)
    }

    /// Predicted ⟨k, p; η| exp(iα σx₀) |⇑⟩ = i sin α c*_{-1,0}(k, p).
    pub fn kick_overlap(n_sites: usize, k: f64, p: f64, alpha: f64) -> Result<C64> {
        Ok(C64::new(0.0, alpha.sin()) * amplitude(n_sites, -1, 0, k, p)?.conj())
    }

    /// Basis index of site label 0, for building exp(iα σx₀) densely.
    pub fn origin_index(n_sites: usize) -> usize {
        index(n_sites, 0)
    }
}
