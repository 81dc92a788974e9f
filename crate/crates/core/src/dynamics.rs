//! Time evolution of Gaussian windows and localized kicks.
//!
//! Majorana operators evolve as `a(t) = R a` with `R = e^{Ht}` for the real
//! antisymmetric single-particle matrix `H` of the open window, so
//! `Γ(t) = R Γ Rᵀ`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gaussian::{single_particle_spectrum, string_signs, CorrelationMatrix};
use crate::model::ChainModel;

/// Unitary applied at a single time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KickKind {
    /// σz_j: flips the sign of both Majoranas on site j.
    SpinFlip,
    /// The Majorana `(prod_{i<j} σz_i) σx_j`; a domain wall between j-1 and j.
    MajoranaOdd,
    /// The Majorana `(prod_{i<j} σz_i) σy_j`; a domain wall between j and j+1.
    MajoranaEven,
    /// σx_j.
    SigmaXString,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KickEvent {
    pub time: f64,
    /// Site index inside the window.
    pub site: usize,
    pub kind: KickKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KickSchedule {
    events: Vec<KickEvent>,
    horizon: f64,
}

impl KickSchedule {
    pub fn new(events: Vec<KickEvent>, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0) {
            return Err(Error::Usage(format!("horizon must be non-negative, got {horizon}")));
        }
        for w in events.windows(2) {
            if w[1].time < w[0].time {
                return Err(Error::Usage("kick times must be non-decreasing".into()));
            }
        }
        if let Some(e) = events.iter().find(|e| e.time < 0.0 || e.time > horizon) {
            return Err(Error::Usage(format!("kick at t={} outside [0, {horizon}]", e.time)));
        }
        Ok(KickSchedule { events, horizon })
    }

    pub fn empty(horizon: f64) -> Result<Self> {
        Self::new(Vec::new(), horizon)
    }

    /// Kicks of one kind at one site, at times `first + k·period` up to `horizon`.
    pub fn periodic(site: usize, kind: KickKind, first: f64, period: f64, horizon: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::Usage(format!("kick period must be positive, got {period}")));
        }
        let mut events = Vec::new();
        let mut k = 0;
        loop {
            let time = first + k as f64 * period;
            if time > horizon * (1.0 + 1e-12) {
                break;
            }
            events.push(KickEvent { time: time.min(horizon), site, kind });
            k += 1;
        }
        Self::new(events, horizon)
    }

    pub fn events(&self) -> &[KickEvent] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

/// Diagonalized single-particle Hamiltonian of an open window.
#[derive(Clone, Debug)]
pub struct Evolver {
    model: ChainModel,
    n_sites: usize,
    energies: Vec<f64>,
    vectors: Array2<C64>,
    max_velocity: f64,
}

impl Evolver {
    pub fn new(model: &ChainModel, n_sites: usize) -> Result<Self> {
        let (e, v) = single_particle_spectrum(model, n_sites)?;
        Ok(Evolver {
            model: *model,
            n_sites,
            energies: e.to_vec(),
            vectors: v,
            max_velocity: model.max_velocity(),
        })
    }

    pub fn model(&self) -> &ChainModel {
        &self.model
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// `R = e^{H dt}`, real orthogonal.
    pub fn rotation(&self, dt: f64) -> Array2<f64> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
            let ph = C64::new(0.0, -self.energies[j] * dt).exp();
            col.mapv_inplace(|x| x * ph);
        }
        let vh = self.vectors.t().mapv(|x| x.conj());
        scaled.dot(&vh).mapv(|x| x.re)
    }

    pub fn evolve(&self, g: &CorrelationMatrix, dt: f64) -> Result<CorrelationMatrix> {
        if g.n_sites() != self.n_sites {
            return Err(Error::Usage(format!("window of {} sites for an evolver of {}", g.n_sites(), self.n_sites)));
        }
        if !(dt >= 0.0) {
            return Err(Error::Usage(format!("negative time step {dt}")));
        }
        if dt == 0.0 {
            return Ok(g.clone());
        }
        let r = self.rotation(dt);
        let rt = r.t();
        let re = g.data().mapv(|x| x.re);
        let im = g.data().mapv(|x| x.im);
        let re = r.dot(&re).dot(&rt);
        let im = r.dot(&im).dot(&rt);
        let data = Array2::from_shape_fn(re.raw_dim(), |ij| C64::new(re[ij], im[ij]));
        let out = CorrelationMatrix::new(data)?;
        match g.defect() {
            Some(k) => {
                let kr = r.dot(&k.mapv(|x| x.re));
                let ki = r.dot(&k.mapv(|x| x.im));
                out.with_defect(Array2::from_shape_fn(kr.raw_dim(), |ij| C64::new(kr[ij], ki[ij])))
            }
            None => Ok(out),
        }
    }
}

/// One-shot evolution; rebuilds the spectral data on every call.
pub fn evolve(g: &CorrelationMatrix, model: &ChainModel, dt: f64) -> Result<CorrelationMatrix> {
    Evolver::new(model, g.n_sites())?.evolve(g, dt)
}

fn flip(g: &CorrelationMatrix, idx: &[usize]) -> Result<CorrelationMatrix> {
    let mut signs = vec![1i8; g.dim()];
    for &j in idx {
        signs[j] = -1;
    }
    g.conjugate_by_signs(&signs)
}

pub fn apply_spin_flip(g: &CorrelationMatrix, j: usize) -> Result<CorrelationMatrix> {
    if j >= g.n_sites() {
        return Err(Error::OutOfRange(format!("site {j} in window of {}", g.n_sites())));
    }
    flip(g, &[2 * j, 2 * j + 1])
}

/// `a_m ρ a_m`: every Majorana but `a_m` changes sign, equivalently only `a_m` does.
pub fn apply_majorana(g: &CorrelationMatrix, m: usize) -> Result<CorrelationMatrix> {
    if m >= g.dim() {
        return Err(Error::OutOfRange(format!("Majorana {m} in dimension {}", g.dim())));
    }
    flip(g, &[m])
}

pub fn apply_kick(g: &CorrelationMatrix, kind: KickKind, j: usize) -> Result<CorrelationMatrix> {
    if j >= g.n_sites() {
        return Err(Error::OutOfRange(format!("site {j} in window of {}", g.n_sites())));
    }
    match kind {
        KickKind::SpinFlip => apply_spin_flip(g, j),
        KickKind::MajoranaOdd => apply_majorana(g, 2 * j),
        KickKind::MajoranaEven => apply_majorana(g, 2 * j + 1),
        KickKind::SigmaXString => g.conjugate_by_signs(&string_signs(g.n_sites(), j)),
    }
}

/// The lightcone of a kick got closer than `guard` sites to the window edge.
#[derive(Clone, Debug, PartialEq)]
pub struct LightconeWarning {
    pub sample_time: f64,
    pub kick: KickEvent,
    pub reach: f64,
    pub margin: usize,
}

#[derive(Clone, Debug)]
pub struct ScheduleOutput {
    pub samples: Vec<CorrelationMatrix>,
    pub warnings: Vec<LightconeWarning>,
}

/// Evolves `g0` from t = 0, applying kicks in time order and recording Γ at
/// each sample time. At a time shared by a sample and a kick the sample is
/// taken first.
pub fn run_schedule(
    g0: &CorrelationMatrix,
    evolver: &Evolver,
    schedule: &KickSchedule,
    sample_times: &[f64],
    guard: usize,
) -> Result<ScheduleOutput> {
    for w in sample_times.windows(2) {
        if w[1] < w[0] {
            return Err(Error::Usage("sample times must be sorted".into()));
        }
    }
    if let Some(&t) = sample_times.iter().find(|&&t| t < 0.0 || t > schedule.horizon()) {
        return Err(Error::Usage(format!("sample time {t} outside [0, {}]", schedule.horizon())));
    }
    let w = evolver.n_sites();
    let vmax = evolver.max_velocity;
    let mut g = g0.clone();
    let mut now = 0.0;
    let mut applied: Vec<KickEvent> = Vec::new();
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut warnings = Vec::new();
    let mut kicks = schedule.events().iter().peekable();
    for &ts in sample_times {
        while let Some(k) = kicks.peek() {
            if k.time >= ts {
                break;
            }
            g = evolver.evolve(&g, k.time - now)?;
            now = k.time;
            g = apply_kick(&g, k.kind, k.site)?;
            applied.push(**k);
            kicks.next();
        }
        g = evolver.evolve(&g, ts - now)?;
        now = ts;
        for k in &applied {
            let margin = k.site.min(w - 1 - k.site);
            let reach = vmax * (ts - k.time);
            if reach + guard as f64 > margin as f64 {
                log::warn!(
                    "lightcone of kick at site {} (t={}) reaches {:.1} sites at t={}, margin {}",
                    k.site,
                    k.time,
                    reach,
                    ts,
                    margin
                );
                warnings.push(LightconeWarning { sample_time: ts, kick: *k, reach, margin });
            }
        }
        samples.push(g.clone());
    }
    Ok(ScheduleOutput { samples, warnings })
}

/// Window length `|A| + 2⌈v̄T⌉ + pad` recommended for a subsystem of `a_len` sites up to time `horizon`.
pub fn window_size(model: &ChainModel, a_len: usize, horizon: f64, pad: usize) -> usize {
    a_len + 2 * (model.max_velocity() * horizon).ceil() as usize + pad
}
