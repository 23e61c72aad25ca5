//! Experiment runners: compute, then write each artifact with its sidecar.

use std::fs;
use std::path::PathBuf;

use kho_core::classical::{
    default_web_seeds, evolve_manifold_history, liouville_histogram, stroboscopic_web, Histogram2d, ManifoldConfig,
    Polyline,
};
use kho_core::decoherence::purity_sweep;
use kho_core::export::{
    sidecar_path, write_histogram_csv, write_json, write_observables_csv, write_polylines_csv, write_purity_csv,
    write_state_csv, write_web_csv, write_wigner_csv, write_wigner_pgm,
};
use kho_core::grid::{make_grid, with_grid_growth};
use kho_core::optics::{kick_frequency_for_hbar, max_kicks, DesignReport, KickLimit, LossModel, OpticalDesign};
use kho_core::propagators::kho_evolve;
use kho_core::state::{auto_grid, expectations, prepare_gaussian};
use kho_core::wigner::{fringe_scale, negativity_volume, wigner_transform, LinearPhaseSpaceMap};
use kho_core::{KhoParams, QuantumState};
use serde::Serialize;

use crate::config::{ExperimentConfig, Experiment, Format};
use crate::error::CliError;

/// Doublings of an automatically sized grid tried before giving up.
const GRID_GROWTH: usize = 3;
/// Relative level below which the Wigner output is cropped away.
const CROP_LEVEL: f64 = 1e-8;

#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    artifact: String,
    version: &'static str,
    config: &'a ExperimentConfig,
    result: T,
}

struct Writer<'a> {
    cfg: &'a ExperimentConfig,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn sidecar<T: Serialize>(&mut self, artifact: PathBuf, result: T) -> Result<(), CliError> {
        let meta = Sidecar {
            artifact: artifact.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            version: env!("CARGO_PKG_VERSION"),
            config: self.cfg,
            result,
        };
        write_json(sidecar_path(&artifact), &meta)?;
        self.written.push(artifact);
        Ok(())
    }
}

/// Run an experiment; returns the artifacts written (empty for `params`).
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    if cfg.experiment == Experiment::Params {
        params(cfg)?;
        return Ok(Vec::new());
    }
    fs::create_dir_all(&cfg.out)?;
    let mut w = Writer {
        cfg,
        written: Vec::new(),
    };
    match cfg.experiment {
        Experiment::Evolve => evolve(&mut w)?,
        Experiment::Wigner => wigner(&mut w)?,
        Experiment::Web => web(&mut w)?,
        Experiment::Manifold => manifold(&mut w)?,
        Experiment::Purity => purity(&mut w)?,
        Experiment::Params => unreachable!(),
    }
    Ok(w.written)
}

fn trajectory(cfg: &ExperimentConfig, p: &KhoParams) -> Result<Vec<QuantumState>, CliError> {
    let n = cfg.n_kicks;
    let states = match cfg.grid {
        Some(g) => {
            let grid = make_grid(g.n_points, g.q_max, p.hbar_eff)?;
            let psi = prepare_gaussian(&cfg.gaussian, &grid).map_err(|e| e.at_step(0))?;
            kho_evolve(&psi, p, n)?
        }
        None => {
            let start = auto_grid(&cfg.gaussian, p.hbar_eff, p.kick_strength, n)?;
            with_grid_growth(start, GRID_GROWTH, |g| {
                let psi = prepare_gaussian(&cfg.gaussian, &g).map_err(|e| e.at_step(0))?;
                kho_evolve(&psi, p, n)
            })?
        }
    };
    Ok(states)
}

fn evolve(w: &mut Writer) -> Result<(), CliError> {
    let p = w.cfg.params()?;
    let states = trajectory(w.cfg, &p)?;
    let rows = states
        .iter()
        .map(|s| Ok((expectations(s)?, s.norm_sqr())))
        .collect::<Result<Vec<_>, CliError>>()?;
    let grid = *states[0].grid();

    let obs = w.path("observables.csv");
    write_observables_csv(&obs, &rows)?;
    w.sidecar(obs, serde_json::json!({ "grid": grid }))?;

    let fin = w.path("state_final.csv");
    write_state_csv(&fin, states.last().expect("n+1 snapshots"))?;
    w.sidecar(fin, serde_json::json!({ "grid": grid, "step": w.cfg.n_kicks }))
}

fn wigner(w: &mut Writer) -> Result<(), CliError> {
    let p = w.cfg.params()?;
    let states = trajectory(w.cfg, &p)?;
    let full = wigner_transform(states.last().expect("n+1 snapshots"))?;
    let summary = serde_json::json!({
        "grid": states[0].grid(),
        "negativity_volume": negativity_volume(&full),
        "fringe_scale": fringe_scale(&full),
        "norm": full.norm(),
    });
    let (qi, pk) = full.support_box(CROP_LEVEL, 4);
    let wig = full.crop(qi, pk)?;
    if w.cfg.wants(Format::Csv) {
        let path = w.path("wigner.csv");
        write_wigner_csv(&path, &wig)?;
        w.sidecar(path, &summary)?;
    }
    if w.cfg.wants(Format::Pgm) {
        let path = w.path("wigner.pgm");
        let scale = write_wigner_pgm(&path, &wig)?;
        let mut meta = summary.clone();
        meta["heatmap"] = serde_json::to_value(scale).map_err(kho_core::KhoError::from)?;
        w.sidecar(path, meta)?;
    }
    Ok(())
}

fn web(w: &mut Writer) -> Result<(), CliError> {
    let p = w.cfg.params()?;
    let seeds = default_web_seeds();
    let cloud = stroboscopic_web(&p, &seeds, w.cfg.iterations)?;
    let path = w.path("web.csv");
    write_web_csv(&path, &cloud)?;
    w.sidecar(
        path,
        serde_json::json!({ "seeds": seeds, "n_iter": cloud.n_iter, "max_radius": cloud.max_radius }),
    )
}

fn bounding_window(line: &Polyline, pad: f64) -> ((f64, f64), (f64, f64)) {
    let mut q = (f64::INFINITY, f64::NEG_INFINITY);
    let mut p = q;
    for z in &line.points {
        q = (q.0.min(z.q), q.1.max(z.q));
        p = (p.0.min(z.p), p.1.max(z.p));
    }
    ((q.0 - pad, q.1 + pad), (p.0 - pad, p.1 + pad))
}

fn manifold(w: &mut Writer) -> Result<(), CliError> {
    let cfg = w.cfg;
    let p = cfg.params()?;
    let axis = Polyline::gaussian_axis(&cfg.gaussian, p.hbar_eff, cfg.axis_sigmas, 2)?;
    let mc = ManifoldConfig {
        eps: cfg.manifold_eps,
        max_points: cfg.manifold_max_points,
    };
    let mut history = evolve_manifold_history(&axis, &p, cfg.n_kicks, &mc)?;
    let fin = history.last().expect("n+1 curves").clone();
    if let Some(m) = cfg.post_map {
        let map = LinearPhaseSpaceMap::new(m)?;
        history = history.iter().map(|l| l.mapped(&map)).collect();
    }
    let path = w.path("manifold.csv");
    write_polylines_csv(&path, &history)?;
    let counts: Vec<usize> = history.iter().map(|l| l.points.len()).collect();
    w.sidecar(path, serde_json::json!({ "points_per_step": counts }))?;

    if cfg.samples > 0 {
        // Window around the unmapped final curve, padded by a few packet widths.
        let (qr, pr) = bounding_window(&fin, 4.0 * cfg.gaussian.max_width(p.hbar_eff));
        let hist = Histogram2d::new(qr, pr, (cfg.bins, cfg.bins))?;
        let hist = liouville_histogram(&cfg.gaussian, p.hbar_eff, &p, cfg.n_kicks, cfg.samples, cfg.seed, hist)?;
        let path = w.path("liouville.csv");
        write_histogram_csv(&path, &hist)?;
        w.sidecar(path, serde_json::json!({ "outside": hist.outside, "q_range": qr, "p_range": pr }))?;
    }
    Ok(())
}

fn purity(w: &mut Writer) -> Result<(), CliError> {
    let cfg = w.cfg;
    let template = cfg.params()?;
    let cells = purity_sweep(&cfg.gaussian, &template, cfg.n_kicks, &cfg.hbar_effs, &cfg.kick_strengths)?;
    let mut first_err = None;
    for cell in cells {
        let name = format!("purity_K{}_hbar{}.csv", cell.kick_strength, cell.hbar_eff);
        match cell.curve {
            Ok(curve) => {
                let path = w.path(&name);
                write_purity_csv(&path, &curve)?;
                w.sidecar(path, serde_json::json!({ "params": curve.params, "grid": curve.grid }))?;
            }
            Err(e) => {
                eprintln!("K={} hbar={}: {e}", cell.kick_strength, cell.hbar_eff);
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct ParamsReport {
    version: &'static str,
    design: DesignReport,
    per_pass_transmission: f64,
    floor: f64,
    max_kicks: KickLimit,
}

fn params(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let o = cfg.optics.expect("params config carries optics");
    let alpha = cfg.rotation_angle;
    let nu = match (o.kick_frequency, o.hbar_target) {
        (Some(nu), _) => nu,
        (None, Some(h)) => kick_frequency_for_hbar(o.wavelength, o.focal_length, alpha, h)?,
        (None, None) => unreachable!("validated at resolve time"),
    };
    let design = DesignReport::new(&OpticalDesign {
        wavelength: o.wavelength,
        focal_length: o.focal_length,
        rotation_angle: alpha,
        kick_frequency: nu,
    })?;
    let loss = LossModel::new(1.0, o.transmission, 1.0, 1.0)?;
    let report = ParamsReport {
        version: env!("CARGO_PKG_VERSION"),
        design,
        per_pass_transmission: o.transmission,
        floor: o.floor,
        max_kicks: max_kicks(&loss, o.floor)?,
    };
    if cfg.wants(Format::Json) {
        println!("{}", serde_json::to_string_pretty(&report).map_err(kho_core::KhoError::from)?);
    }
    if cfg.wants(Format::Text) {
        print!("{}", params_text(&report));
    }
    Ok(())
}

fn params_text(r: &ParamsReport) -> String {
    let d = &r.design;
    let kicks = match r.max_kicks {
        KickLimit::Limited(n) => n.to_string(),
        KickLimit::Unbounded => "unbounded".into(),
    };
    format!(
        "wavelength               {} m\n\
         focal length             {} m\n\
         rotation angle           {} rad\n\
         mask frequency nu        {} 1/m\n\
         hbar_eff                 {}\n\
         effective focal length   {} m\n\
         lens spacing z           {} mm\n\
         double-stage spacing     {} mm\n\
         max kicks (T={}, floor={})  {kicks}\n",
        d.wavelength,
        d.focal_length,
        d.rotation_angle,
        d.kick_frequency,
        d.hbar_eff,
        d.effective_focal_length,
        d.lens_spacing * 1e3,
        d.double_stage_lens_spacing * 1e3,
        r.per_pass_transmission,
        r.floor,
    )
}
