//! Oracle-equivalence check of the Gaussian path against exact diagonalization.

use num_complex::Complex64 as C64;
use qfi_core::gaussian::{finite_chain_correlations, Boundary};
use qfi_core::measures::{QfiConfig, SkewInfo};
use qfi_core::oracle::{self, EdBoundary};
use qfi_core::ChainModel;

pub const WYDI_TOL: f64 = 1e-8;
pub const QFI_REL_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Deviations {
    pub states: usize,
    pub variance: f64,
    pub wydi: f64,
    pub qfi_relative: f64,
}

impl Deviations {
    pub fn passed(&self) -> bool {
        self.variance < WYDI_TOL && self.wydi < WYDI_TOL && self.qfi_relative < QFI_REL_TOL
    }
}

/// Half-chain blocks of open chains; `quick` uses L ∈ {4, 6} and one field.
pub fn oracle_suite(quick: bool) -> qfi_core::Result<Deviations> {
    let lengths: &[usize] = if quick { &[4, 6] } else { &[4, 6, 8] };
    let fields: &[f64] = if quick { &[0.5] } else { &[0.3, 0.5, 1.2] };
    let alphas = [C64::new(1.0 / 3.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.7)];
    let cfg = QfiConfig::default();
    let mut dev = Deviations::default();
    for &l in lengths {
        for &h in fields {
            for beta in [0.5, 2.0, f64::INFINITY] {
                let model = ChainModel::ising(h);
                let g = finite_chain_correlations(&model, l, beta, Boundary::Open)?;
                let rho = oracle::thermal(&model, l, beta, EdBoundary::Open)?;
                let a = l / 2;
                let ra = rho.reduce(&(0..a).collect::<Vec<_>>())?;
                let x = oracle::sum_x(a, &(0..a).collect::<Vec<_>>());
                let sk = SkewInfo::new(&g, 0..a)?;
                dev.variance = dev.variance.max((sk.variance() - oracle::variance_exact(&ra, &x)).abs());
                for &al in &alphas {
                    dev.wydi = dev.wydi.max((sk.wydi(al)? - oracle::wydi_exact(&ra, &x, al)?).abs());
                }
                let f4 = oracle::qfi_exact(&ra, &x)?;
                let est = sk.qfi_estimate(&cfg)?.qfi_over_4;
                dev.qfi_relative = dev.qfi_relative.max((est - f4).abs() / f4);
                dev.states += 1;
            }
        }
    }
    Ok(dev)
}
