//! Evaluation of each protocol into output rows.

use std::io::Write;
use std::path::PathBuf;

use num_complex::Complex64 as C64;
use qfi_core::beyond_sc::{self, TwoParticleSector};
use qfi_core::dynamics::{run_schedule, window_size, Evolver, KickEvent, KickKind, KickSchedule};
use qfi_core::gaussian::{
    finite_chain_correlations, ground_state_correlations, quench_correlations, thermal_correlations, Boundary,
    CorrelationMatrix,
};
use qfi_core::measures::{measure, two_point_table, QfiConfig};
use qfi_core::oracle::{self, EdBoundary};
use qfi_core::semiclassics::{
    chi_multi_kick, chi_single_dw, ground_magnetization, kick_walls, quench_chi_from_correlators, second_moment,
    Excitation, ScalingFunction,
};
use qfi_core::{ChainModel, QuenchPair};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{axis_path, KickKindSpec, Protocol, ProtocolConfig};
use crate::output::{Row, Source, Table, TaggedRow};
use crate::CliError;

/// Padding sites between the outermost lightcone and the window edge.
const PAD: usize = 16;
/// Lightcone guard reported in the run log.
const GUARD: usize = 4;

struct Ctx<'a> {
    cfg: &'a ProtocolConfig,
    model: ChainModel,
    qfi: QfiConfig,
    alphas: Vec<C64>,
    warnings: Vec<String>,
}

/// Results of one configuration plus the warnings of the run log.
pub struct RunOutput {
    pub table: Table,
    pub warnings: Vec<String>,
}

fn kind_of(k: KickKindSpec) -> KickKind {
    match k {
        KickKindSpec::SpinFlip => KickKind::SpinFlip,
        KickKindSpec::MajoranaOdd => KickKind::MajoranaOdd,
        KickKindSpec::MajoranaEven => KickKind::MajoranaEven,
        KickKindSpec::SigmaX => KickKind::SigmaXString,
    }
}

fn measured(g: &CorrelationMatrix, a: std::ops::Range<usize>, origin: i64, time: f64, ctx: &Ctx) -> qfi_core::Result<Row> {
    let rep = measure(g, a, origin, time, &ctx.qfi, &ctx.alphas)?;
    Ok(Row {
        beta: None,
        time,
        left: rep.left,
        right: rep.right,
        variance: Some(rep.variance),
        i_half: Some(rep.i_half),
        i_third: Some(rep.i_third),
        qfi_over4: Some(rep.qfi.qfi_over_4),
        qfi_err: Some(rep.qfi.uncertainty),
        chi: Some(rep.chi),
        lower: Some(rep.bounds.lower),
        upper: Some(rep.bounds.upper()),
        wydi: rep.wydi_grid.iter().map(|(a, v)| ([a.re, a.im], *v)).collect(),
    })
}

fn chi_only(time: f64, left: i64, right: i64, chi: f64) -> Row {
    Row { time, left, right, chi: Some(chi), ..Row::default() }
}

/// Runs one configuration without writing anything.
pub fn evaluate(cfg: &ProtocolConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let mut ctx = Ctx {
        cfg,
        model: ChainModel::new(cfg.model.h, cfg.model.gamma),
        qfi: QfiConfig { b_max: cfg.measure.beta_max, spacing: cfg.measure.beta_spacing, domains: cfg.measure.fit_domains },
        alphas: cfg.measure.alphas.iter().map(|a| C64::new(a[0], a[1])).collect(),
        warnings: Vec::new(),
    };
    let rows = match cfg.protocol {
        Protocol::Equilibrium => equilibrium(&mut ctx)?,
        Protocol::SingleKick | Protocol::KickGrid | Protocol::KickPeriodic => kicks(&mut ctx)?,
        Protocol::GlobalQuench => global_quench(&mut ctx)?,
        Protocol::BeyondSc => one_particle(&mut ctx)?,
    };
    let hash = cfg.hash();
    let protocol = serde_json::to_value(cfg.protocol).expect("serializes").as_str().unwrap_or_default().to_string();
    let mut table = Table::default();
    for (source, row) in rows {
        table.push(source, TaggedRow { config_hash: hash.clone(), protocol: protocol.clone(), axis: None, row });
    }
    Ok(RunOutput { table, warnings: ctx.warnings })
}

fn equilibrium(ctx: &mut Ctx) -> Result<Vec<(Source, Row)>, CliError> {
    let cfg = ctx.cfg;
    let mut items = Vec::new();
    for &beta in &cfg.betas {
        for &a in &cfg.block_sizes() {
            items.push((beta, a));
        }
    }
    let model = ctx.model;
    let ctx_ref = &*ctx;
    let results: Vec<qfi_core::Result<Vec<(Source, Row)>>> = items
        .par_iter()
        .map(|&(beta, a)| {
            let b = beta.unwrap_or(f64::INFINITY);
            let (g, start) = match cfg.chain_length {
                Some(l) => (finite_chain_correlations(&model, l, b, Boundary::Open)?, (l - a) / 2),
                None if beta.is_none() => (ground_state_correlations(&model, a), 0),
                None => (thermal_correlations(&model, b, a), 0),
            };
            let mut row = measured(&g, start..start + a, -(start as i64), 0.0, ctx_ref)?;
            row.beta = beta;
            let mut out = vec![(Source::Simulation, row)];
            if cfg.oracle {
                let l = cfg.chain_length.expect("validated");
                let rho = oracle::thermal(&model, l, b, EdBoundary::Open)?;
                let sites: Vec<usize> = (start..start + a).collect();
                let ra = rho.reduce(&sites)?;
                let x = oracle::sum_x(a, &(0..a).collect::<Vec<_>>());
                let i = oracle::wydi_exact(&ra, &x, C64::new(0.5, 0.0))?;
                let i3 = oracle::wydi_exact(&ra, &x, C64::new(1.0 / 3.0, 0.0))?;
                let f4 = oracle::qfi_exact(&ra, &x)?;
                let wydi = ctx_ref
                    .alphas
                    .iter()
                    .map(|&al| Ok(([al.re, al.im], oracle::wydi_exact(&ra, &x, al)?)))
                    .collect::<qfi_core::Result<_>>()?;
                out.push((
                    Source::Oracle,
                    Row {
                        beta,
                        time: 0.0,
                        left: 0,
                        right: a as i64 - 1,
                        variance: Some(oracle::variance_exact(&ra, &x)),
                        i_half: Some(i),
                        i_third: Some(i3),
                        qfi_over4: Some(f4),
                        qfi_err: Some(0.0),
                        chi: Some(f4 / (a * a) as f64),
                        lower: Some(i),
                        upper: Some((2.0 * i).min(10.0 * i - 9.0 * i3)),
                        wydi,
                    },
                ));
            }
            Ok(out)
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Sites (relative to the block centre) and times of every kick.
fn kick_events(ctx: &Ctx, horizon: f64) -> Vec<(i64, f64)> {
    let cfg = ctx.cfg;
    let k = cfg.kick.as_ref().expect("validated");
    let offsets = k.offsets.clone().unwrap_or_else(|| vec![0]);
    match cfg.protocol {
        Protocol::SingleKick => offsets.iter().map(|&o| (o, 0.0)).collect(),
        Protocol::KickPeriodic => {
            let period = k.period.expect("validated");
            let mut out = Vec::new();
            let mut t = 0.0;
            let mut n = 0;
            while t < horizon {
                out.extend(offsets.iter().map(|&o| (o, t)));
                n += 1;
                t = n as f64 * period;
            }
            out
        }
        Protocol::KickGrid => {
            let spacing = k.spacing.expect("validated") as i64;
            let reach = cfg.block_half_width() as i64 + (ctx.model.max_velocity() * horizon).ceil() as i64;
            (-reach / spacing..=reach / spacing).map(|z| (z * spacing, 0.0)).collect()
        }
        _ => unreachable!("not a kick protocol"),
    }
}

fn kicks(ctx: &mut Ctx) -> Result<Vec<(Source, Row)>, CliError> {
    let cfg = ctx.cfg;
    let model = ctx.model;
    let kind = kind_of(cfg.kick.as_ref().expect("validated").kind);
    let r = cfg.block_half_width();
    let horizon = *cfg.times.last().expect("validated");
    let events = kick_events(ctx, horizon);
    let far = events.iter().map(|e| e.0.unsigned_abs() as usize).max().unwrap_or(0);
    let w = window_size(&model, 2 * (r + far) + 1, horizon, 2 * PAD) | 1;
    let centre = w / 2;
    let schedule = KickSchedule::new(
        events.iter().map(|&(o, t)| KickEvent { time: t, site: (centre as i64 + o) as usize, kind }).collect(),
        horizon,
    )?;
    let g0 = ground_state_correlations(&model, w);
    let out = run_schedule(&g0, &Evolver::new(&model, w)?, &schedule, &cfg.times, GUARD)?;
    for wr in &out.warnings {
        ctx.warnings.push(format!(
            "lightcone of the kick at site {} (t = {}) reaches {:.1} sites at t = {}, margin {}",
            wr.kick.site as i64 - centre as i64,
            wr.kick.time,
            wr.reach,
            wr.sample_time,
            wr.margin
        ));
    }
    let a = centre - r..centre + r + 1;
    let origin = -(centre as i64);
    let ctx_ref = &*ctx;
    let sims: Vec<qfi_core::Result<Row>> = out
        .samples
        .par_iter()
        .zip(cfg.times.par_iter())
        .map(|(g, &t)| measured(g, a.clone(), origin, t, ctx_ref))
        .collect();
    let mut rows = Vec::new();
    for s in sims {
        rows.push((Source::Simulation, s?));
    }

    let walls: Vec<Excitation> = events
        .iter()
        .flat_map(|&(o, t)| kick_walls(kind, o as f64).into_iter().map(move |x| Excitation { position: x, time: t }))
        .collect();
    if walls.is_empty() {
        ctx.warnings.push("the kick creates no domain walls: no semiclassical curve".into());
        return Ok(rows);
    }
    if !model.is_ferromagnetic() {
        ctx.warnings.push("no semiclassical curve outside the ferromagnetic phase".into());
        return Ok(rows);
    }
    let sf = if model.gamma == 1.0 { ScalingFunction::arcsin() } else { ScalingFunction::uniform(&model)? };
    let m0 = ground_magnetization(&model)?;
    let vbar = model.max_velocity();
    let len = 2 * r + 1;
    let gs: Vec<f64> = (0..len).map(|d| g0.two_point_x(centre - r, centre - r + d)).collect::<qfi_core::Result<_>>()?;
    let (l, rr) = (-(r as i64), r as i64);
    let norm = (len * len) as f64;
    let preds: Vec<qfi_core::Result<Row>> = cfg
        .times
        .par_iter()
        .map(|&t| {
            let tr_o2 = second_moment(&sf, vbar, &walls, t, l, rr, &gs)? / norm;
            let chi = if walls.len() == 1 {
                chi_single_dw(&sf, l as f64, rr as f64, walls[0].position, vbar, t, m0, tr_o2)?
            } else {
                chi_multi_kick(&sf, &walls, l as f64, rr as f64, vbar, t, m0, tr_o2)?
            };
            Ok(chi_only(t, l, rr, chi))
        })
        .collect();
    for p in preds {
        rows.push((Source::Semiclassical, p?));
    }
    Ok(rows)
}

fn global_quench(ctx: &mut Ctx) -> Result<Vec<(Source, Row)>, CliError> {
    let cfg = ctx.cfg;
    let h0 = cfg.quench.as_ref().expect("validated").h0;
    let q = QuenchPair::new(ChainModel::new(h0, cfg.model.gamma), ctx.model);
    let mut items = Vec::new();
    for &a in &cfg.block_sizes() {
        for &t in &cfg.times {
            items.push((a, t));
        }
    }
    let ctx_ref = &*ctx;
    let results: Vec<qfi_core::Result<(Row, Option<Row>, Option<String>)>> = items
        .par_iter()
        .map(|&(a, t)| {
            let g = quench_correlations(&q, t, a + 2);
            let sim = measured(&g, 1..a + 1, 0, t, ctx_ref)?;
            let (pred, warn) = match quench_chi_from_correlators(&two_point_table(&g)?) {
                Ok(chi) => (Some(chi_only(t, 0, a as i64 - 1, chi)), None),
                Err(qfi_core::Error::PredictionUndefined) => {
                    (None, Some(format!("prediction undefined at |A| = {a}, t = {t}: edge correlation vanishes")))
                }
                Err(e) => return Err(e),
            };
            Ok((sim, pred, warn))
        })
        .collect();
    let mut rows = Vec::new();
    let mut preds = Vec::new();
    for r in results {
        let (sim, pred, warn) = r?;
        rows.push((Source::Simulation, sim));
        preds.extend(pred.map(|p| (Source::Semiclassical, p)));
        ctx.warnings.extend(warn);
    }
    rows.extend(preds);
    Ok(rows)
}

fn one_particle(ctx: &mut Ctx) -> Result<Vec<(Source, Row)>, CliError> {
    let cfg = ctx.cfg;
    let sector = TwoParticleSector::with_chain_dispersion(&ctx.model, 0.0);
    let r = cfg.block_half_width() as f64;
    let results: Vec<qfi_core::Result<(Row, Row)>> = cfg
        .times
        .par_iter()
        .map(|&t| {
            let exact = beyond_sc::chi_one_particle(&sector, t, -r, r)?;
            let sc = beyond_sc::chi_one_particle_semiclassical(&sector, t, -r, r)?;
            let (l, rr) = (-(r as i64), r as i64);
            Ok((chi_only(t, l, rr, exact), chi_only(t, l, rr, sc)))
        })
        .collect();
    let mut exact = Vec::new();
    let mut sc = Vec::new();
    for x in results {
        let (e, s) = x?;
        exact.push((Source::BeyondSc, e));
        sc.push((Source::Semiclassical, s));
    }
    exact.extend(sc);
    Ok(exact)
}

fn write_log(dir: &PathBuf, warnings: &[String]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join("run.log"))?;
    for w in warnings {
        log::warn!("{w}");
        writeln!(f, "warning: {w}")?;
    }
    Ok(())
}

/// `run <config>`: evaluates and writes the CSV files and the run log.
pub fn run(cfg: &ProtocolConfig) -> Result<Vec<PathBuf>, CliError> {
    let out = evaluate(cfg)?;
    write_log(&cfg.output, &out.warnings)?;
    out.table.write(&cfg.output)
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, p) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("sweep axis `{path}`: `{p}` is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert((*p).to_string(), value);
            return Ok(());
        }
        cur = obj.entry((*p).to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// `sweep <config> --axis <name> --values <list>`: one run per value, merged
/// into the base config's output directory with an axis column.
pub fn sweep(base: &Value, axis: &str, values: &[String]) -> Result<Vec<PathBuf>, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let path = axis_path(axis);
    let base_cfg = ProtocolConfig::from_value(base.clone())?;
    let mut table = Table::default();
    let mut warnings = Vec::new();
    for v in values {
        let parsed: Value = serde_json::from_str(v.trim())
            .map_err(|e| CliError::Config(format!("sweep value `{v}` is not a JSON scalar: {e}")))?;
        let mut doc = base.clone();
        set_path(&mut doc, &path, parsed)?;
        let cfg = ProtocolConfig::from_value(doc).map_err(|e| CliError::Config(format!("{axis} = {v}: {e}")))?;
        let mut out = evaluate(&cfg)?;
        for rows in out.table.rows.values_mut() {
            for r in rows {
                r.axis = Some((axis.to_string(), v.trim().to_string()));
            }
        }
        table.extend(out.table);
        warnings.extend(out.warnings.into_iter().map(|w| format!("{axis} = {v}: {w}")));
    }
    write_log(&base_cfg.output, &warnings)?;
    table.write(&base_cfg.output)
}
