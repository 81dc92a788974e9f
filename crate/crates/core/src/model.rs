//! The quantum XY chain
//! H = -sum_l [ (1+γ)/2 σx_l σx_{l+1} + (1-γ)/2 σy_l σy_{l+1} + h σz_l ].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainModel {
    pub h: f64,
    pub gamma: f64,
}

/// A velocity value together with the flag raised at gap-closing momenta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Velocity {
    pub value: f64,
    pub critical_momentum: bool,
}

impl ChainModel {
    pub fn new(h: f64, gamma: f64) -> Self {
        assert!(h.is_finite() && gamma.is_finite(), "non-finite chain parameters");
        ChainModel { h, gamma }
    }

    pub fn ising(h: f64) -> Self {
        Self::new(h, 1.0)
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.h.abs() < 1.0 && self.gamma != 0.0
    }

    pub fn is_critical(&self) -> bool {
        (self.h.abs() - 1.0).abs() < 1e-12 || (self.gamma == 0.0 && self.h.abs() <= 1.0)
    }

    fn radicand(&self, k: f64) -> f64 {
        let a = self.h - k.cos();
        let b = self.gamma * k.sin();
        a * a + b * b
    }

    /// Single-particle energy ε_k = 2 sqrt((h - cos k)^2 + γ^2 sin^2 k).
    pub fn dispersion(&self, k: f64) -> f64 {
        2.0 * self.radicand(k).sqrt()
    }

    /// Group velocity dε/dk. Returns 0 (the symmetric limit) where ε_k = 0.
    pub fn group_velocity(&self, k: f64) -> f64 {
        self.group_velocity_checked(k).value
    }

    pub fn group_velocity_checked(&self, k: f64) -> Velocity {
        let r = self.radicand(k);
        if r <= 1e-300 {
            return Velocity { value: 0.0, critical_momentum: true };
        }
        let (s, c) = k.sin_cos();
        let g2 = self.gamma * self.gamma;
        let num = 2.0 * self.h * s + 2.0 * (g2 - 1.0) * s * c;
        Velocity { value: num / r.sqrt(), critical_momentum: false }
    }

    /// v̄_M = max_k |v_k|: dense grid, then golden-section refinement.
    pub fn max_velocity(&self) -> f64 {
        let n = 4096;
        let grid = |i: usize| PI * i as f64 / n as f64;
        let mut best = 0;
        let mut bv = -1.0;
        for i in 0..=n {
            let v = self.group_velocity(grid(i)).abs();
            if v > bv {
                bv = v;
                best = i;
            }
        }
        if bv <= 0.0 {
            return 0.0;
        }
        let lo = grid(best.saturating_sub(1));
        let hi = grid((best + 1).min(n));
        let (_, fmin) = quad::golden_min(|k| -self.group_velocity(k).abs(), lo, hi, 1e-13);
        bv.max(-fmin)
    }
}

/// A sudden change of the transverse field, pre-quench `pre` to post-quench `post`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuenchPair {
    pub pre: ChainModel,
    pub post: ChainModel,
}

impl QuenchPair {
    pub fn new(pre: ChainModel, post: ChainModel) -> Self {
        QuenchPair { pre, post }
    }

    pub fn ising(h0: f64, h: f64) -> Self {
        QuenchPair { pre: ChainModel::ising(h0), post: ChainModel::ising(h) }
    }

    fn require_ising(&self) -> Result<()> {
        if self.pre.gamma != 1.0 || self.post.gamma != 1.0 {
            return Err(Error::Domain("quench formulas require gamma = 1 on both sides".into()));
        }
        Ok(())
    }

    /// cos Δ_k, the cosine of the Bogoliubov-angle difference.
    pub fn cos_delta(&self, k: f64) -> Result<f64> {
        self.require_ising()?;
        let (h0, h) = (self.pre.h, self.post.h);
        let c = k.cos();
        let num = h0 * h - (h0 + h) * c + 1.0;
        let den = (1.0 + h0 * h0 - 2.0 * h0 * c).sqrt() * (1.0 + h * h - 2.0 * h * c).sqrt();
        if den == 0.0 {
            return Ok(1.0);
        }
        let v = num / den;
        if v.abs() > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("cos Δ_k = {v} outside [-1, 1]")));
        }
        Ok(v.clamp(-1.0, 1.0))
    }

    /// Amplitude of the asymptotic order-parameter two-point function.
    pub fn c_ff(&self) -> Result<f64> {
        self.require_ising()?;
        let (h0, h) = (self.pre.h, self.post.h);
        if h0.abs() >= 1.0 || h.abs() >= 1.0 || h0 * h >= 1.0 {
            return Err(Error::Domain("C_FF needs a ferro-to-ferro quench".into()));
        }
        let a = 1.0 - h0 * h + ((1.0 - h0 * h0) * (1.0 - h * h)).sqrt();
        Ok(a / (2.0 * (1.0 - h0 * h).sqrt() * (1.0 - h0 * h0).powf(0.25)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_examples() {
        let m = ChainModel::ising(0.5);
        assert!((m.dispersion(0.0) - 1.0).abs() < 1e-15);
        assert!((m.dispersion(PI) - 3.0).abs() < 1e-15);
        assert_eq!(ChainModel::ising(1.0).dispersion(0.0), 0.0);
    }

    #[test]
    fn velocity_examples() {
        let m = ChainModel::ising(0.5);
        assert!((m.group_velocity(PI / 2.0) - 1.0 / 1.25f64.sqrt()).abs() < 1e-14);
        assert_eq!(m.group_velocity(0.0), 0.0);
        let c = ChainModel::ising(1.0).group_velocity_checked(0.0);
        assert!(c.critical_momentum && c.value == 0.0);
    }

    #[test]
    fn max_velocity_examples() {
        assert!((ChainModel::ising(0.5).max_velocity() - 1.0).abs() < 1e-9);
        assert!((ChainModel::ising(2.0).max_velocity() - 2.0).abs() < 1e-9);
        assert_eq!(ChainModel::ising(0.0).max_velocity(), 0.0);
    }

    #[test]
    fn quench_examples() {
        let q = QuenchPair::ising(0.0, 0.4);
        assert!((q.cos_delta(PI / 2.0).unwrap() - 1.0 / 1.16f64.sqrt()).abs() < 1e-14);
        assert!((q.cos_delta(0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((q.c_ff().unwrap() - 0.5 * (1.0 + 0.84f64.sqrt())).abs() < 1e-14);
        assert!((QuenchPair::ising(0.0, 0.0).c_ff().unwrap() - 1.0).abs() < 1e-15);
        let s = QuenchPair::ising(0.3, 0.3);
        assert!((s.c_ff().unwrap() - 0.91f64.powf(0.25)).abs() < 1e-14);
        assert!(QuenchPair::ising(0.5, 1.2).c_ff().is_err());
    }
}
