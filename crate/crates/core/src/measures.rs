//! Variance, skew informations and the QFI of `X_A = sum_{l in A} σx_l`.

use std::ops::Range;

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{
    gaussian_product, i_pow, leading_pfaffians, overlap_q, product_matrix, string_signs, CorrelationMatrix,
    ModeSpectrum,
};
use crate::quad::{gauss_legendre, golden_min, CubicSpline};

/// Imaginary parts above this fraction of `tr ρ X²` flag a convention error.
const IMAG_RESIDUE: f64 = 1e-9;

fn check_range(g: &CorrelationMatrix, a: &Range<usize>) -> Result<()> {
    if a.start >= a.end || a.end > g.n_sites() {
        return Err(Error::OutOfRange(format!("subsystem {a:?} in window of {}", g.n_sites())));
    }
    Ok(())
}

/// `<σx_l σx_n>` for all `l, n` in the window of `g`.
pub fn two_point_table(g: &CorrelationMatrix) -> Result<Array2<f64>> {
    let n = g.n_sites();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|l| -> Result<Vec<f64>> {
            let mut row = vec![0.0; n];
            row[l] = 1.0;
            if l + 1 < n {
                let sec = g.data().slice(s![2 * l + 1..2 * n - 1, 2 * l + 1..2 * n - 1]);
                for (m, pf) in leading_pfaffians(sec)?.into_iter().enumerate() {
                    row[l + 1 + m] = (i_pow(m + 1) * pf).re;
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut t = Array2::zeros((n, n));
    for l in 0..n {
        for m in l..n {
            t[[l, m]] = rows[l][m];
            t[[m, l]] = rows[l][m];
        }
    }
    Ok(t)
}

/// `tr ρ_A X_A²`; Gaussian states have `<σx> = 0`, so this is also the variance.
pub fn variance_x(g: &CorrelationMatrix, a: Range<usize>) -> Result<f64> {
    check_range(g, &a)?;
    let t = two_point_table(&g.restrict_sites(a)?)?;
    // ordered summation for reproducibility
    Ok(t.iter().sum())
}

/// Skew informations of one subsystem, sharing the spectral decomposition
/// across orders.
pub struct SkewInfo {
    gamma: CorrelationMatrix,
    spectrum: ModeSpectrum,
    second_moment: f64,
}

impl SkewInfo {
    pub fn new(g: &CorrelationMatrix, a: Range<usize>) -> Result<Self> {
        check_range(g, &a)?;
        let gamma = g.restrict_sites(a)?;
        let spectrum = ModeSpectrum::of(&gamma)?;
        let second_moment = two_point_table(&gamma)?.iter().sum();
        Ok(SkewInfo { gamma, spectrum, second_moment })
    }

    pub fn n_sites(&self) -> usize {
        self.gamma.n_sites()
    }

    pub fn variance(&self) -> f64 {
        self.second_moment
    }

    pub fn is_pure(&self) -> bool {
        self.spectrum.is_pure()
    }

    pub fn spectrum(&self) -> &ModeSpectrum {
        &self.spectrum
    }

    /// `I_α(ρ_A, X_A)` for complex `α`; real by construction when `α` is
    /// real or `Re α = 1/2`.
    pub fn wydi(&self, alpha: C64) -> Result<f64> {
        let v = self.wydi_complex(alpha)?;
        if v.im.abs() > IMAG_RESIDUE * self.second_moment.max(1.0) {
            return Err(Error::Convention(v.im));
        }
        Ok(v.re)
    }

    /// `I_α` without the reality check.
    pub fn wydi_complex(&self, alpha: C64) -> Result<C64> {
        if self.is_pure() {
            return Ok(C64::new(self.second_moment, 0.0));
        }
        let beta = C64::new(1.0, 0.0) - alpha;
        let (_, ta) = self.spectrum.power(alpha);
        let (_, tb) = self.spectrum.power(beta);
        let ga = self.spectrum.compose(&ta);
        let gb = self.spectrum.compose(&tb);
        // Q(Γ^(α), Γ^(1-α)) for commuting arguments
        let n = self.spectrum.values.len();
        let q0: C64 = (n / 2..n).map(|j| C64::new(1.0, 0.0) + ta[j] * tb[j]).product();
        let w = self.n_sites();
        let terms: Vec<C64> = (0..w)
            .into_par_iter()
            .map(|a| sandwich_sum(&ga, &gb, a, w, q0))
            .collect::<Result<_>>()?;
        let cross: C64 = terms.iter().sum();
        Ok(C64::new(self.second_moment, 0.0) - cross)
    }

    /// `J_β = I_{1/2 + iβ}`.
    pub fn rotated(&self, beta: f64) -> Result<f64> {
        self.wydi(C64::new(0.5, beta))
    }
}

/// `sum_b tr(ρ^α σx_a ρ^{1-α} σx_b)` divided by `κ_α κ_{1-α}`, for one site `a`.
fn sandwich_sum(ga: &Array2<C64>, gb: &Array2<C64>, a: usize, w: usize, q0: C64) -> Result<C64> {
    let signs = string_signs(w, a);
    let mut b = gb.clone();
    for ((i, j), v) in b.indexed_iter_mut() {
        if signs[i] != signs[j] {
            *v = -*v;
        }
    }
    let q = overlap_q(ga, &b)?;
    if q.norm() == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let c = q / q0;
    let p = product_matrix(ga, &b)?;
    let mut total = C64::new(1.0, 0.0);
    if a + 1 < w {
        let sec = p.slice(s![2 * a + 1..2 * w - 1, 2 * a + 1..2 * w - 1]);
        for (m, pf) in leading_pfaffians(sec)?.into_iter().enumerate() {
            total += i_pow(m + 1) * pf;
        }
    }
    if a > 0 {
        // sections [2b+1, 2a] for b < a, read backwards from index 2a
        let rev = Array2::from_shape_fn((2 * a, 2 * a), |(i, j)| p[[2 * a - i, 2 * a - j]]);
        for (m, pf) in leading_pfaffians(rev.view())?.into_iter().enumerate() {
            let d = m + 1;
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            total += i_pow(d) * pf * sign;
        }
    }
    Ok(c * total)
}

/// `I_α(ρ_A, X_A)`.
pub fn wydi(g: &CorrelationMatrix, a: Range<usize>, alpha: C64) -> Result<f64> {
    SkewInfo::new(g, a)?.wydi(alpha)
}

/// Settings of the β-integration that turns rotated skew informations into the QFI.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiConfig {
    /// Half-width B of the sampled β interval.
    pub b_max: f64,
    /// Grid spacing in β.
    pub spacing: f64,
    /// Number of nested domains (-B_j, B_j), B_j = j B / N.
    pub domains: usize,
}

impl Default for QfiConfig {
    fn default() -> Self {
        QfiConfig { b_max: 3.0, spacing: 0.1, domains: 12 }
    }
}

impl QfiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.b_max > 0.0 && self.spacing > 0.0 && self.spacing <= self.b_max) || self.domains < 3 {
            return Err(Error::Usage(format!("invalid QFI integration config {self:?}")));
        }
        Ok(())
    }

    /// Nonnegative β knots 0, h, ..., B.
    pub fn knots(&self) -> Vec<f64> {
        let n = (self.b_max / self.spacing).round() as usize;
        (0..=n).map(|j| self.b_max * j as f64 / n as f64).collect()
    }
}

/// Parameters of the saturation fit `c - a e^{-b B}`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FitDiagnostics {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    /// Root-mean-square residual of a least-squares fit over all domains.
    pub residual: f64,
    /// Set when the fit failed and the widest-domain integral was reported.
    pub fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiEstimate {
    pub qfi_over_4: f64,
    pub uncertainty: f64,
    pub fit: FitDiagnostics,
}

/// ∫_{-B}^{B} s(β) / cosh(πβ) dβ for an even interpolant `s`, exact up to
/// the Gauss–Legendre rule on each knot interval.
fn sech_integral(s: &CubicSpline, knots: &[f64], upto: f64) -> f64 {
    let (x, w) = gauss_legendre(10);
    let mut total = 0.0;
    for seg in knots.windows(2) {
        let (lo, hi) = (seg[0], seg[1].min(upto));
        if hi <= lo {
            break;
        }
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (xi, wi) in x.iter().zip(&w) {
            let b = c + h * xi;
            total += wi * h * s.eval(b) / (std::f64::consts::PI * b).cosh();
        }
    }
    2.0 * total
}

/// Exact fit of `y = c - a e^{-b x}` through three equally spaced points.
pub fn fit_three_points(x: [f64; 3], y: [f64; 3]) -> Option<FitDiagnostics> {
    let (d1, d2) = (y[1] - y[0], y[2] - y[1]);
    let r = d2 / d1;
    if !(r > 0.0 && r < 1.0) {
        return None;
    }
    let h = x[1] - x[0];
    let b = -r.ln() / h;
    let c = y[2] + d2 * r / (1.0 - r);
    let a = (c - y[2]) * (b * x[2]).exp();
    Some(FitDiagnostics { c, a, b, residual: 0.0, fallback: false })
}

/// Least-squares fit of `y = c - a e^{-b x}` with `b` by golden search and
/// `(c, a)` by linear least squares, `b` searched within a decade of `seed`.
pub fn fit_saturation(x: &[f64], y: &[f64], seed: f64) -> Option<FitDiagnostics> {
    let solve = |b: f64| -> (f64, f64, f64) {
        let e: Vec<f64> = x.iter().map(|xi| (-b * xi).exp()).collect();
        let n = x.len() as f64;
        let (se, see): (f64, f64) = (e.iter().sum(), e.iter().map(|v| v * v).sum());
        let sy: f64 = y.iter().sum();
        let sey: f64 = e.iter().zip(y).map(|(a, b)| a * b).sum();
        let det = n * see - se * se;
        if det.abs() < 1e-300 {
            return (f64::NAN, f64::NAN, f64::INFINITY);
        }
        // y = c + d e with d = -a
        let c = (see * sy - se * sey) / det;
        let d = (n * sey - se * sy) / det;
        let rss: f64 = e.iter().zip(y).map(|(ei, yi)| (yi - c - d * ei).powi(2)).sum();
        (c, -d, rss)
    };
    let (lo, hi) = ((seed / 10.0).ln(), (seed * 10.0).ln());
    let (lb, _) = golden_min(|lb| solve(lb.exp()).2, lo, hi, 1e-10);
    let b = lb.exp();
    let (c, a, rss) = solve(b);
    if !c.is_finite() || !rss.is_finite() {
        return None;
    }
    Some(FitDiagnostics { c, a, b, residual: (rss / x.len() as f64).sqrt(), fallback: false })
}

impl SkewInfo {
    /// Samples of `J_β` on the nonnegative knots of `cfg`.
    pub fn rotated_samples(&self, cfg: &QfiConfig) -> Result<Vec<(f64, f64)>> {
        cfg.knots().into_iter().map(|b| Ok((b, self.rotated(b)?))).collect()
    }

    /// F/4 from `J_β`: spline on (-B, B), sech-weighted integrals over nested
    /// domains, then extrapolation by a saturation fit.
    pub fn qfi_estimate(&self, cfg: &QfiConfig) -> Result<QfiEstimate> {
        cfg.validate()?;
        if self.is_pure() {
            let v = self.second_moment;
            return Ok(QfiEstimate {
                qfi_over_4: v,
                uncertainty: 0.0,
                fit: FitDiagnostics { c: v, ..Default::default() },
            });
        }
        let samples = self.rotated_samples(cfg)?;
        Ok(estimate_from_samples(&samples, cfg))
    }
}

/// The integration and fit steps of the QFI estimate, given `J_β` at β ≥ 0.
///
/// The saturation constant comes from the exponential through the three
/// widest domains; its uncertainty is the shift from the next-widest triple.
pub fn estimate_from_samples(samples: &[(f64, f64)], cfg: &QfiConfig) -> QfiEstimate {
    let mut x: Vec<f64> = samples.iter().rev().map(|s| -s.0).collect();
    let mut y: Vec<f64> = samples.iter().rev().map(|s| s.1).collect();
    x.pop();
    y.pop();
    x.extend(samples.iter().map(|s| s.0));
    y.extend(samples.iter().map(|s| s.1));
    let spline = CubicSpline::new(&x, &y);
    let pos: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let bj: Vec<f64> = (1..=cfg.domains).map(|j| cfg.b_max * j as f64 / cfg.domains as f64).collect();
    let ints: Vec<f64> = bj.iter().map(|&b| sech_integral(&spline, &pos, b)).collect();
    let n = ints.len();
    let widest = ints[n - 1];
    let tail = |k: usize| fit_three_points([bj[k], bj[k + 1], bj[k + 2]], [ints[k], ints[k + 1], ints[k + 2]]);
    match (tail(n - 3), tail(n - 4)) {
        (Some(mut fit), prev) => {
            // the fit over every domain is reported for diagnostics only: the
            // small-B domains are far from the exponential regime
            fit.residual = fit_saturation(&bj, &ints, fit.b).map_or(f64::NAN, |f| f.residual);
            let drift = prev.map_or((fit.c - widest).abs(), |p| (p.c - fit.c).abs());
            QfiEstimate { qfi_over_4: fit.c, uncertainty: drift, fit }
        }
        (None, _) => {
            let spread = (widest - ints[n - 2]).abs();
            QfiEstimate {
                qfi_over_4: widest,
                uncertainty: 10.0 * spread,
                fit: FitDiagnostics { c: widest, fallback: true, ..Default::default() },
            }
        }
    }
}

pub fn qfi_estimate(g: &CorrelationMatrix, a: Range<usize>, cfg: &QfiConfig) -> Result<QfiEstimate> {
    SkewInfo::new(g, a)?.qfi_estimate(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiBounds {
    /// I = I_{1/2}.
    pub lower: f64,
    pub upper_2i: f64,
    /// 10 I - 9 I_{1/3}.
    pub upper_mixed: f64,
    /// ¼ e^{S∞} I(ρ², X), with ρ² unnormalized.
    pub lower_rho2: f64,
}

impl QfiBounds {
    pub fn upper(&self) -> f64 {
        self.upper_2i.min(self.upper_mixed)
    }
}

impl SkewInfo {
    pub fn bounds(&self) -> Result<QfiBounds> {
        if self.is_pure() {
            let v = self.second_moment;
            return Ok(QfiBounds { lower: v, upper_2i: v, upper_mixed: v, lower_rho2: v });
        }
        let i = self.wydi(C64::new(0.5, 0.0))?;
        let i3 = self.wydi(C64::new(1.0 / 3.0, 0.0))?;
        Ok(QfiBounds { lower: i, upper_2i: 2.0 * i, upper_mixed: 10.0 * i - 9.0 * i3, lower_rho2: self.lower_rho2()? })
    }

    fn lower_rho2(&self) -> Result<f64> {
        let sq = match gaussian_product(&self.gamma, &self.gamma) {
            Ok(f) => f,
            Err(Error::OrthogonalStates) => return Ok(0.0),
            Err(e) => return Err(e),
        };
        let tr2 = sq.prefactor.re;
        let n = self.n_sites();
        let i2 = SkewInfo::new(&sq.gamma, 0..n)?.wydi(C64::new(0.5, 0.0))?;
        Ok(0.25 * tr2 * i2 / self.spectrum.max_probability())
    }
}

pub fn qfi_bounds(g: &CorrelationMatrix, a: Range<usize>) -> Result<QfiBounds> {
    SkewInfo::new(g, a)?.bounds()
}

/// χ = (F/4) / ‖X_A‖² with ‖X_A‖ = |A|.
pub fn chi(qfi_over_4: f64, a_len: usize) -> f64 {
    qfi_over_4 / (a_len * a_len) as f64
}

/// All measures of one subsystem at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureReport {
    pub time: f64,
    /// Lattice coordinates of the first and last site of A.
    pub left: i64,
    pub right: i64,
    pub variance: f64,
    pub i_half: f64,
    pub i_third: f64,
    pub qfi: QfiEstimate,
    pub bounds: QfiBounds,
    pub chi: f64,
    /// Extra orders requested by the caller.
    pub wydi_grid: Vec<(C64, f64)>,
}

impl MeasureReport {
    pub const COLUMNS: [&'static str; 11] = [
        "time",
        "subsystem_left",
        "subsystem_right",
        "variance",
        "I_half",
        "I_third",
        "qfi_over4",
        "qfi_err",
        "chi",
        "lower",
        "upper",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.time,
            self.left as f64,
            self.right as f64,
            self.variance,
            self.i_half,
            self.i_third,
            self.qfi.qfi_over_4,
            self.qfi.uncertainty,
            self.chi,
            self.bounds.lower,
            self.bounds.upper(),
        ]
    }
}

/// Computes a report for window sites `a`; `origin` is the lattice coordinate of window site 0.
pub fn measure(
    g: &CorrelationMatrix,
    a: Range<usize>,
    origin: i64,
    time: f64,
    cfg: &QfiConfig,
    extra_orders: &[C64],
) -> Result<MeasureReport> {
    let len = a.end - a.start;
    let (left, right) = (origin + a.start as i64, origin + a.end as i64 - 1);
    let sk = SkewInfo::new(g, a)?;
    let bounds = sk.bounds()?;
    let qfi = sk.qfi_estimate(cfg)?;
    let i_third = if sk.is_pure() { sk.variance() } else { sk.wydi(C64::new(1.0 / 3.0, 0.0))? };
    let wydi_grid = extra_orders.iter().map(|&al| Ok((al, sk.wydi(al)?))).collect::<Result<_>>()?;
    Ok(MeasureReport {
        time,
        left,
        right,
        variance: sk.variance(),
        i_half: bounds.lower,
        i_third,
        chi: chi(qfi.qfi_over_4, len),
        qfi,
        bounds,
        wydi_grid,
    })
}
