//! Pfaffians of complex antisymmetric matrices.
//!
//! Both routines work on the strict upper triangle only; the lower triangle
//! is implied by antisymmetry.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Pivots smaller than this (relative to the largest entry) count as zero.
pub const PIVOT_THRESHOLD: f64 = 1e-13;

/// Relative pivot size below which the unpivoted section sweep gives up.
const SWEEP_GROWTH_LIMIT: f64 = 1e-3;

struct Upper {
    n: usize,
    a: Vec<C64>,
}

impl Upper {
    fn from_view(m: ArrayView2<C64>) -> Self {
        let n = m.nrows();
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i + 1..n {
                a[i * n + j] = 0.5 * (m[[i, j]] - m[[j, i]]);
            }
        }
        Upper { n, a }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> C64 {
        if i < j {
            self.a[i * self.n + j]
        } else if i > j {
            -self.a[j * self.n + i]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: C64) {
        if i < j {
            self.a[i * self.n + j] = v;
        } else if i > j {
            self.a[j * self.n + i] = -v;
        }
    }

    /// Symmetric permutation exchanging indices p and q, acting on indices >= from.
    fn swap(&mut self, p: usize, q: usize, from: usize) {
        for m in from..self.n {
            if m == p || m == q {
                continue;
            }
            let x = self.get(m, p);
            let y = self.get(m, q);
            self.set(m, p, y);
            self.set(m, q, x);
        }
        let x = self.get(p, q);
        self.set(p, q, -x);
    }

    fn scale(&self) -> f64 {
        self.a.iter().fold(0.0_f64, |s, z| s.max(z.norm()))
    }

    /// Schur-complement update after eliminating the pivot pair (k, k+1).
    fn eliminate(&mut self, k: usize) {
        let n = self.n;
        let piv = self.a[k * n + k + 1];
        let x: Vec<C64> = self.a[k * n + k + 2..k * n + n].iter().map(|v| v / piv).collect();
        let y: Vec<C64> = self.a[(k + 1) * n + k + 2..(k + 1) * n + n].to_vec();
        for (ii, i) in (k + 2..n).enumerate() {
            let (xi, yi) = (x[ii], y[ii]);
            let row = &mut self.a[i * n + i + 1..i * n + n];
            for ((r, xj), yj) in row.iter_mut().zip(&x[ii + 1..]).zip(&y[ii + 1..]) {
                *r += yi * xj - xi * yj;
            }
        }
    }
}

fn check_square_even(m: &ArrayView2<C64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Usage(format!("pfaffian of non-square {}x{} matrix", m.nrows(), m.ncols())));
    }
    if m.nrows() % 2 != 0 {
        return Err(Error::Usage(format!("pfaffian of odd dimension {}", m.nrows())));
    }
    Ok(())
}

/// Pfaffian by Parlett–Reid elimination with partial pivoting.
pub fn pfaffian(m: &Array2<C64>) -> Result<C64> {
    pfaffian_view(m.view())
}

pub fn pfaffian_view(m: ArrayView2<C64>) -> Result<C64> {
    check_square_even(&m)?;
    let mut u = Upper::from_view(m);
    Ok(pivoted(&mut u))
}

fn pivoted(u: &mut Upper) -> C64 {
    let n = u.n;
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let tiny = PIVOT_THRESHOLD * u.scale();
    let mut pf = C64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let row = &u.a[k * n + k + 1..k * n + n];
        let (mut best, mut bval) = (0usize, -1.0);
        for (off, z) in row.iter().enumerate() {
            let v = z.norm();
            if v > bval {
                bval = v;
                best = off;
            }
        }
        let kp = k + 1 + best;
        if kp != k + 1 {
            u.swap(k + 1, kp, k);
            pf = -pf;
        }
        let piv = u.a[k * n + k + 1];
        if piv.norm() <= tiny || piv.norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        pf *= piv;
        if k + 2 < n {
            u.eliminate(k);
        }
        k += 2;
    }
    pf
}

/// Pfaffians of all leading principal sections of even size.
///
/// Entry `m` of the result is pf of the top-left (2m+2)x(2m+2) block.
/// An unpivoted sweep produces them all in one O(n^3) pass; if a pivot
/// becomes small relative to its row the remaining sections are computed
/// independently with pivoting.
pub fn leading_pfaffians(m: ArrayView2<C64>) -> Result<Vec<C64>> {
    check_square_even(&m)?;
    let n = m.nrows();
    let mut out = Vec::with_capacity(n / 2);
    let mut u = Upper::from_view(m);
    let mut pf = C64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let row = &u.a[k * n + k + 1..k * n + n];
        let rmax = row.iter().fold(0.0_f64, |s, z| s.max(z.norm()));
        let piv = row[0];
        if rmax > 0.0 && piv.norm() < SWEEP_GROWTH_LIMIT * rmax {
            break;
        }
        pf *= piv;
        out.push(pf);
        if rmax == 0.0 {
            // the whole row vanishes: every larger section has a zero row
            while out.len() < n / 2 {
                out.push(C64::new(0.0, 0.0));
            }
            return Ok(out);
        }
        if k + 2 < n {
            u.eliminate(k);
        }
        k += 2;
    }
    while out.len() < n / 2 {
        let s = 2 * out.len() + 2;
        let mut v = Upper::from_view(m.slice(ndarray::s![..s, ..s]));
        out.push(pivoted(&mut v));
    }
    Ok(out)
}
