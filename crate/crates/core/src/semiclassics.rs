//! Quasiparticle predictions: order-parameter profiles after domain-wall
//! perturbations, the QFI of kicked and quenched ferromagnets, and the
//! asymptotic quench formula of the Ising chain.
//!
//! Sites are labelled by real coordinates so that domain walls can sit on
//! bonds (half-integer positions). A block `[l, r]` of `r - l + 1` sites is
//! mapped to the continuum interval `[l - 1/2, r + 1/2]`, the midpoint rule
//! for the site sums.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;

use crate::dynamics::KickKind;
use crate::error::{Error, Result};
use crate::gaussian::ground_state_correlations;
use crate::model::{ChainModel, QuenchPair};
use crate::quad::{self, PanelRule};

const PANEL_ORDER: usize = 32;
const EMPTY: f64 = 1e-14;

#[derive(Clone, Debug)]
struct Table {
    zeta: Vec<f64>,
    m: Vec<f64>,
    /// ∫_{-1}^{ζ_i} 𝓜
    cum: Vec<f64>,
}

/// Magnetization profile 𝓜(ζ) left behind by one domain wall at rescaled
/// position ζ = x/(v̄t). Odd, nondecreasing, equal to sgn ζ for |ζ| ≥ 1.
#[derive(Clone, Debug, Default)]
pub struct ScalingFunction {
    table: Option<Table>,
}

impl ScalingFunction {
    /// 𝓜(ζ) = (2/π) arcsin ζ: uniform cross section with Ising velocities.
    pub fn arcsin() -> Self {
        ScalingFunction { table: None }
    }

    /// Tabulates 𝓜(ζ) = ∫ σ(k) sgn(ζ - v_k/v̄) dk / ∫ σ(k) dk over k ∈ [-π, π].
    /// `velocity` need not be normalized; v̄ is its maximum modulus on the grid.
    pub fn from_cross_section(
        sigma: impl Fn(f64) -> f64,
        velocity: impl Fn(f64) -> f64,
        n_k: usize,
        n_zeta: usize,
    ) -> Result<Self> {
        if n_k < 16 || n_zeta < 3 {
            return Err(Error::Usage("scaling table too coarse".into()));
        }
        let dk = 2.0 * PI / n_k as f64;
        let mut pts: Vec<(f64, f64)> = (0..n_k)
            .map(|i| {
                let k = -PI + (i as f64 + 0.5) * dk;
                (velocity(k), sigma(k) * dk)
            })
            .collect();
        if pts.iter().any(|p| !p.0.is_finite() || !(p.1 >= 0.0)) {
            return Err(Error::Domain("cross section must be finite and non-negative".into()));
        }
        let vbar = pts.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
        let total: f64 = pts.iter().map(|p| p.1).sum();
        if vbar == 0.0 || total <= 0.0 {
            return Err(Error::Domain("cross section or velocity vanishes identically".into()));
        }
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let zeta: Vec<f64> = (0..n_zeta).map(|i| -1.0 + 2.0 * i as f64 / (n_zeta - 1) as f64).collect();
        let mut m = Vec::with_capacity(n_zeta);
        let mut below = 0.0;
        let mut j = 0;
        for &z in &zeta {
            while j < pts.len() && pts[j].0 / vbar < z {
                below += pts[j].1;
                j += 1;
            }
            let mut tie = 0.0;
            let mut jj = j;
            while jj < pts.len() && pts[jj].0 / vbar == z {
                tie += pts[jj].1;
                jj += 1;
            }
            // sgn(0) = 0: ties count half
            m.push(((2.0 * below + tie) / total - 1.0).clamp(-1.0, 1.0));
        }
        m[0] = -1.0;
        m[n_zeta - 1] = 1.0;
        let mut cum = vec![0.0; n_zeta];
        for i in 1..n_zeta {
            cum[i] = cum[i - 1] + 0.5 * (m[i] + m[i - 1]) * (zeta[i] - zeta[i - 1]);
        }
        Ok(ScalingFunction { table: Some(Table { zeta, m, cum }) })
    }

    /// Uniform cross section with the group velocity of `model`.
    pub fn uniform(model: &ChainModel) -> Result<Self> {
        let m = *model;
        Self::from_cross_section(|_| 1.0 / (2.0 * PI), move |k| m.group_velocity(k), 1 << 18, 4001)
    }

    pub fn is_arcsin(&self) -> bool {
        self.table.is_none()
    }

    pub fn eval(&self, zeta: f64) -> f64 {
        if zeta >= 1.0 {
            return 1.0;
        }
        if zeta <= -1.0 {
            return -1.0;
        }
        match &self.table {
            None => 2.0 / PI * zeta.asin(),
            Some(t) => {
                let h = t.zeta[1] - t.zeta[0];
                let i = (((zeta + 1.0) / h) as usize).min(t.zeta.len() - 2);
                let u = (zeta - t.zeta[i]) / h;
                t.m[i] + u * (t.m[i + 1] - t.m[i])
            }
        }
    }

    /// ∫_{-1}^{ζ} 𝓜 for ζ ∈ [-1, 1].
    fn primitive_inside(&self, zeta: f64) -> f64 {
        match &self.table {
            None => 2.0 / PI * (zeta * zeta.asin() + (1.0 - zeta * zeta).max(0.0).sqrt()) - 1.0,
            Some(t) => {
                let h = t.zeta[1] - t.zeta[0];
                let i = (((zeta + 1.0) / h) as usize).min(t.zeta.len() - 2);
                let dz = zeta - t.zeta[i];
                let mz = self.eval(zeta);
                t.cum[i] + 0.5 * (t.m[i] + mz) * dz
            }
        }
    }

    /// Antiderivative with F(-1) = 0, continued linearly outside [-1, 1].
    fn primitive(&self, zeta: f64) -> f64 {
        if zeta < -1.0 {
            -(zeta + 1.0)
        } else if zeta > 1.0 {
            self.primitive_inside(1.0) + (zeta - 1.0)
        } else {
            self.primitive_inside(zeta)
        }
    }

    /// ∫_a^b 𝓜(ζ) dζ.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.primitive(b) - self.primitive(a)
    }
}

/// 𝓜(ζ).
pub fn scaling_m(sf: &ScalingFunction, zeta: f64) -> f64 {
    sf.eval(zeta)
}

/// 𝓜(ζ|ζ_l, ζ_r): the profile conditioned on the excitation lying in (ζ_l, ζ_r).
pub fn conditional_m(sf: &ScalingFunction, zeta: f64, zl: f64, zr: f64) -> Result<f64> {
    if !(zl < zr) {
        return Err(Error::Usage(format!("conditional profile needs ζl < ζr, got ({zl}, {zr})")));
    }
    let (ml, mr) = (sf.eval(zl), sf.eval(zr));
    let den = mr - ml;
    if den <= EMPTY {
        return Err(Error::EmptyWindow);
    }
    Ok((2.0 * sf.eval(zeta) - ml - mr) / den)
}

/// Probability that a wall ends up in (ζ_l, ζ_r).
pub fn p_in_subsystem(sf: &ScalingFunction, zl: f64, zr: f64) -> f64 {
    (0.5 * (sf.eval(zr) - sf.eval(zl))).clamp(0.0, 1.0)
}

/// A domain wall created at `position` at time `time`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Excitation {
    pub position: f64,
    pub time: f64,
}

/// Domain walls created by a kick at `site`. Majorana kicks create one wall
/// on the bond to the left (odd) or right (even) of the site, a spin flip two.
/// σx carries no wall.
pub fn kick_walls(kind: KickKind, site: f64) -> Vec<f64> {
    match kind {
        KickKind::MajoranaOdd => vec![site - 0.5],
        KickKind::MajoranaEven => vec![site + 0.5],
        KickKind::SpinFlip => vec![site - 0.5, site + 0.5],
        KickKind::SigmaXString => Vec::new(),
    }
}

fn elapsed(e: &Excitation, t: f64) -> Option<f64> {
    let tau = t - e.time;
    (tau > 0.0).then_some(tau)
}

/// Semiclassical ⟨O_ℓ⟩ and ⟨O_ℓ O_n⟩ in the presence of independent walls.
/// Walls created at or after `t` are ignored.
pub fn predict_correlations(
    sf: &ScalingFunction,
    m0: f64,
    vbar: f64,
    walls: &[Excitation],
    t: f64,
    l: f64,
    n: f64,
) -> (f64, f64) {
    let mut one = m0;
    let mut two = m0 * m0;
    for e in walls {
        if let Some(tau) = elapsed(e, t) {
            let s = vbar * tau;
            let (ml, mn) = (sf.eval((l - e.position) / s), sf.eval((n - e.position) / s));
            one *= ml;
            two *= 1.0 - (mn - ml).abs();
        }
    }
    (one, two)
}

/// Semiclassical tr[ρ_A O_A²] of the block `[l, r]`: ground-state two-point
/// function `gs[d] = ⟨O_0 O_d⟩` dressed by the wall factors.
pub fn second_moment(
    sf: &ScalingFunction,
    vbar: f64,
    walls: &[Excitation],
    t: f64,
    l: i64,
    r: i64,
    gs: &[f64],
) -> Result<f64> {
    if r < l {
        return Err(Error::Usage("empty block".into()));
    }
    let len = (r - l + 1) as usize;
    if gs.len() < len {
        return Err(Error::Usage(format!("need {len} ground-state correlations, got {}", gs.len())));
    }
    let active: Vec<(f64, f64)> = walls.iter().filter_map(|e| elapsed(e, t).map(|tau| (e.position, vbar * tau))).collect();
    let prof: Vec<Vec<f64>> = active
        .iter()
        .map(|&(x, s)| (l..=r).map(|j| sf.eval((j as f64 - x) / s)).collect())
        .collect();
    let mut total = 0.0;
    for i in 0..len {
        for j in 0..len {
            let mut f = gs[i.abs_diff(j)];
            for p in &prof {
                f *= 1.0 - (p[i] - p[j]).abs();
            }
            total += f;
        }
    }
    Ok(total)
}

/// Largest-distance plateau m₀ = lim √⟨σx_0 σx_d⟩ of the ground state.
pub fn ground_magnetization(model: &ChainModel) -> Result<f64> {
    if !model.is_ferromagnetic() {
        return Err(Error::Domain("no order-parameter plateau outside the ferromagnetic phase".into()));
    }
    let plateau = |d: usize| -> Result<f64> {
        let g = ground_state_correlations(model, d + 1);
        Ok(g.two_point_x(0, d)?.abs().sqrt())
    };
    let mut d = 32;
    let mut prev = plateau(d)?;
    loop {
        let next = plateau(2 * d)?;
        if (next - prev).abs() < 1e-13 || d >= 512 {
            if (next - prev).abs() >= 1e-13 {
                log::warn!("magnetization plateau not converged at d={}: shift {:e}", 2 * d, (next - prev).abs());
            }
            return Ok(next);
        }
        prev = next;
        d *= 2;
    }
}

/// χ after a single wall at `j0` created at t = 0, for the block `[l, r]`.
///
/// `tr_o2` is tr[ρ_A O_A²]/‖O_A‖² and `kappa` = |A|⟨+|O|+⟩/‖O_A‖ (the
/// magnetization m₀ for the order parameter Σσx). A window the wall cannot
/// reach returns the no-particle value `tr_o2 - κ²`.
pub fn chi_single_dw(
    sf: &ScalingFunction,
    l: f64,
    r: f64,
    j0: f64,
    vbar: f64,
    t: f64,
    kappa: f64,
    tr_o2: f64,
) -> Result<f64> {
    if !(r >= l) || !(t > 0.0) || !(vbar > 0.0) {
        return Err(Error::Usage(format!("single-wall prediction needs r ≥ l, t > 0, v̄ > 0 (l={l}, r={r}, t={t})")));
    }
    let len = r - l + 1.0;
    let s = vbar * t;
    let zl = (l - 0.5 - j0) / s;
    let zr = (r + 0.5 - j0) / s;
    let (ml, mr) = (sf.eval(zl), sf.eval(zr));
    let dm = mr - ml;
    let k2 = kappa * kappa;
    let mut chi = tr_o2 - k2 * (1.0 - 0.5 * dm);
    if dm > EMPTY {
        let c = 0.5 * (ml + mr) - s / len * sf.integral(zl, zr);
        chi -= 2.0 * k2 / dm * c * c;
    }
    Ok(chi)
}

struct WallProfile {
    p: f64,
    values: Vec<f64>,
}

/// χ for several independent walls created at possibly different times
/// (walls created at or after `t` are ignored), for the block `[l, r]`.
pub fn chi_multi_kick(
    sf: &ScalingFunction,
    walls: &[Excitation],
    l: f64,
    r: f64,
    vbar: f64,
    t: f64,
    kappa: f64,
    tr_o2: f64,
) -> Result<f64> {
    if !(r >= l) || !(t > 0.0) || !(vbar > 0.0) {
        return Err(Error::Usage(format!("kick prediction needs r ≥ l, t > 0, v̄ > 0 (l={l}, r={r}, t={t})")));
    }
    let (a, b) = (l - 0.5, r + 0.5);
    let len = b - a;
    let mut active = Vec::new();
    for e in walls {
        let Some(tau) = elapsed(e, t) else { continue };
        let s = vbar * tau;
        let (zl, zr) = ((a - e.position) / s, (b - e.position) / s);
        let p = p_in_subsystem(sf, zl, zr);
        if p > EMPTY {
            active.push((e.position, s, zl, zr, p));
        }
    }
    let k2 = kappa * kappa;
    if active.is_empty() {
        return Ok(tr_o2 - k2);
    }
    let rule = PanelRule::new(
        &quad::breakpoints(a, b, active.iter().flat_map(|&(x, s, ..)| [x - s, x + s])),
        PANEL_ORDER,
    );
    let profiles: Vec<WallProfile> = active
        .iter()
        .map(|&(x, s, zl, zr, p)| {
            let values = rule
                .nodes
                .iter()
                .map(|&y| conditional_m(sf, (y - x) / s, zl, zr))
                .collect::<Result<Vec<_>>>()?;
            Ok(WallProfile { p, values })
        })
        .collect::<Result<Vec<_>>>()?;
    let q = rule.nodes.len();
    let mut total = 0.0;
    for i in 0..q {
        let mut row = 0.0;
        for j in 0..q {
            let mut f = 1.0;
            for w in &profiles {
                f *= 1.0 - w.p + w.p * w.values[i] * w.values[j];
            }
            row += rule.weights[j] * f;
        }
        total += rule.weights[i] * row;
    }
    Ok(tr_o2 - k2 * total / (len * len))
}

/// Independent quasiparticle pairs with density ϱ(k) on (0, π).
#[derive(Clone)]
pub struct QuenchEnsemble {
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    velocity: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    m0: f64,
}

impl std::fmt::Debug for QuenchEnsemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuenchEnsemble").field("m0", &self.m0).finish_non_exhaustive()
    }
}

impl QuenchEnsemble {
    pub fn new(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        velocity: impl Fn(f64) -> f64 + Send + Sync + 'static,
        m0: f64,
    ) -> Result<Self> {
        if !(m0 > 0.0 && m0 <= 1.0) {
            return Err(Error::Domain(format!("magnetization {m0} outside (0, 1]")));
        }
        Ok(QuenchEnsemble { density: Arc::new(density), velocity: Arc::new(velocity), m0 })
    }

    /// Ising quench: ϱ(k) = -ln|cos Δ_k|/(4π), post-quench velocities and
    /// m₀ = √C_FF, so that the pair picture reproduces the exact decay rates.
    pub fn ising(q: &QuenchPair) -> Result<Self> {
        let m0 = q.c_ff()?.sqrt();
        let qq = *q;
        let post = q.post;
        Self::new(
            move |k| -qq.cos_delta(k).map(|c| c.abs().ln()).unwrap_or(0.0) / (4.0 * PI),
            move |k| post.group_velocity(k),
            m0,
        )
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn density(&self, k: f64) -> f64 {
        (self.density)(k)
    }

    /// 𝒩[C_j(t)] = 2∫₀^π ϱ|v|t.
    pub fn lightcone_count(&self, t: f64) -> f64 {
        let f = |k: f64| 2.0 * self.density(k) * (self.velocity)(k).abs() * t;
        quad::integrate(f, 0.0, PI, 1e-13, 1e-13).0
    }

    /// 𝒩[C_i(t) ⊔ C_j(t)] = 2∫₀^π ϱ min(2|v|t, d) for |i - j| = d.
    pub fn union_count(&self, t: f64, d: f64) -> f64 {
        let vel = |k: f64| (self.velocity)(k).abs();
        let roots = quad::roots_on_grid(|k| 2.0 * vel(k) * t - d, 0.0, PI, 512);
        let pts = quad::breakpoints(0.0, PI, roots);
        let f = |k: f64| 2.0 * self.density(k) * (2.0 * vel(k) * t).min(d);
        quad::integrate_pts(f, &pts, 1e-13, 1e-13)
    }
}

/// Semiclassical ⟨O_ℓ(t)⟩ and ⟨O_ℓ(t) O_n(t)⟩ after a quench.
pub fn quench_correlators(qe: &QuenchEnsemble, t: f64, l: f64, n: f64) -> (f64, f64) {
    let m0 = qe.m0;
    if t <= 0.0 {
        return (m0, m0 * m0);
    }
    let one = m0 * (-2.0 * qe.lightcone_count(t)).exp();
    let two = m0 * m0 * (-2.0 * qe.union_count(t, (n - l).abs())).exp();
    (one, two)
}

/// Semiclassical two-point table over `[l-1, r+1]` for a block of `a_len` sites.
pub fn quench_two_point_table(qe: &QuenchEnsemble, t: f64, a_len: usize) -> Array2<f64> {
    let n = a_len + 2;
    let by_distance: Vec<f64> = (0..n).map(|d| quench_correlators(qe, t, 0.0, d as f64).1).collect();
    Array2::from_shape_fn((n, n), |(i, j)| by_distance[i.abs_diff(j)])
}

/// F/4 of the block from its order-parameter two-point functions.
///
/// `g` is indexed over `[l-1, r+1]`: rows 1..=|A| are the block, rows 0 and
/// |A|+1 the neighbouring edge sites.
pub fn quench_qfi_from_correlators(g: &Array2<f64>) -> Result<f64> {
    let n = g.nrows();
    if n < 3 || g.ncols() != n {
        return Err(Error::Usage("two-point table must be square and cover the block plus both edges".into()));
    }
    let e = n - 1;
    let edge = g[[0, e]];
    if !(edge.abs() > 1e-300) {
        return Err(Error::PredictionUndefined);
    }
    let mut total = 0.0;
    for i in 1..e {
        for j in 1..e {
            let (lo, hi) = (i.min(j), i.max(j));
            total += g[[i, j]] - g[[0, hi]] * g[[lo, e]] / edge;
        }
    }
    Ok(total)
}

/// χ of the block from its two-point table (see [`quench_qfi_from_correlators`]).
pub fn quench_chi_from_correlators(g: &Array2<f64>) -> Result<f64> {
    let a = g.nrows().saturating_sub(2) as f64;
    Ok(quench_qfi_from_correlators(g)? / (a * a))
}

/// Velocity data of an Ising post-quench chain used by the exact rate ν_x.
struct IsingRate {
    q: QuenchPair,
    kstar: f64,
    vmax: f64,
}

impl IsingRate {
    fn new(q: &QuenchPair) -> Result<Self> {
        q.c_ff()?;
        let post = q.post;
        let (kstar, fmin) = quad::golden_min(|k| -post.group_velocity(k).abs(), 0.0, PI, 1e-14);
        Ok(IsingRate { q: *q, kstar, vmax: -fmin })
    }

    fn log_cos(&self, k: f64) -> f64 {
        self.q.cos_delta(k).map(|c| c.abs().ln()).unwrap_or(0.0)
    }

    fn v(&self, k: f64) -> f64 {
        self.q.post.group_velocity(k).abs()
    }

    /// ν_x(u) = -(1/π)∫₀^π ln|cos Δ_k| min(2v_k, u) dk.
    fn nu(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let mut pts = vec![0.0, self.kstar, PI];
        if u < 2.0 * self.vmax {
            pts.push(quad::bisect(|k| 2.0 * self.v(k) - u, 0.0, self.kstar));
            pts.push(quad::bisect(|k| 2.0 * self.v(k) - u, self.kstar, PI));
        }
        let pts = quad::breakpoints(0.0, PI, pts);
        -quad::integrate_pts(|k| self.log_cos(k) * (2.0 * self.v(k)).min(u), &pts, 1e-14, 1e-13) / PI
    }
}

/// The exact decay rate ν_x(ζ) of the Ising order-parameter two-point function.
pub fn ising_rate(q: &QuenchPair, zeta: f64) -> Result<f64> {
    Ok(IsingRate::new(q)?.nu(zeta))
}

/// Asymptotic χ of a block of `a_len` sites at time `t` after a ferro-to-ferro
/// Ising quench, with the amplitude C_FF taken constant.
pub fn quench_chi_asymptotic(q: &QuenchPair, a_len: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) || a_len == 0 {
        return Err(Error::Usage(format!("asymptotic quench formula needs t > 0 and |A| > 0 (t={t})")));
    }
    let c = q.c_ff()?;
    let rate = IsingRate::new(q)?;
    let zeta = a_len as f64 / t;
    let kink = 2.0 * rate.vmax;
    let pts = |a: f64, b: f64| quad::breakpoints(a, b, [kink]);
    let (atol, rtol) = (1e-13, 1e-11);
    let first = quad::integrate_pts(|u| (zeta - u) * (-t * rate.nu(u)).exp(), &pts(0.0, zeta), atol, rtol);
    let nz = rate.nu(zeta);
    let second = quad::integrate_pts(
        |u| {
            let nu_u = rate.nu(u);
            quad::integrate_pts(|v| (-t * (nu_u + rate.nu(v) - nz)).exp(), &pts(zeta - u, u), atol, rtol)
        },
        &pts(0.5 * zeta, zeta),
        atol,
        rtol,
    );
    let qfi = 2.0 * c * t * t * first - 4.0 * c * t * t * second;
    Ok(qfi / (a_len * a_len) as f64)
}
