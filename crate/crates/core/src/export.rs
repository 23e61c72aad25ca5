//! File writers: CSV tables (shortest round-trip decimal floats), 16-bit PGM
//! heatmaps and JSON metadata sidecars.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classical::{Histogram2d, PhasePoint, Polyline, WebCloud};
use crate::decoherence::PurityCurve;
use crate::error::Result;
use crate::state::Observables;
use crate::wigner::WignerGrid;

fn f(v: f64) -> String {
    // `Display` for f64 prints the shortest string that parses back exactly.
    v.to_string()
}

fn table<P: AsRef<Path>>(path: P, header: &[&str]) -> Result<csv::Writer<BufWriter<File>>> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header)?;
    Ok(w)
}

/// `q,p,w` triples, one per grid node, `q`-major.
pub fn write_wigner_csv<P: AsRef<Path>>(path: P, w: &WignerGrid) -> Result<()> {
    let mut out = table(path, &["q", "p", "w"])?;
    let (nq, np) = w.shape();
    for i in 0..nq {
        let q = f(w.q_axis().at(i));
        for k in 0..np {
            out.write_record([q.as_str(), &f(w.p_axis().at(k)), &f(w.get(i, k))])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Linear value range used for a heatmap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeatmapScale {
    pub min: f64,
    pub max: f64,
    pub maxval: u16,
}

/// Binary 16-bit PGM: columns run along `Q` (ascending), rows along `P`
/// (descending, so `P` points up). Values map linearly from `[min W, max W]`
/// onto `[0, 65535]`.
pub fn write_wigner_pgm<P: AsRef<Path>>(path: P, w: &WignerGrid) -> Result<HeatmapScale> {
    let (nq, np) = w.shape();
    let min = w.values().iter().copied().fold(f64::INFINITY, f64::min);
    let max = w.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{nq} {np}\n65535\n")?;
    let mut buf = Vec::with_capacity(2 * nq);
    for k in (0..np).rev() {
        buf.clear();
        for i in 0..nq {
            let v = ((w.get(i, k) - min) / span * 65535.0).round().clamp(0.0, 65535.0) as u16;
            buf.extend_from_slice(&v.to_be_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(HeatmapScale {
        min,
        max,
        maxval: u16::MAX,
    })
}

/// `seed,iter,q,p` rows.
pub fn write_web_csv<P: AsRef<Path>>(path: P, cloud: &WebCloud) -> Result<()> {
    let mut out = table(path, &["seed", "iter", "q", "p"])?;
    for (idx, z) in cloud.points.iter().enumerate() {
        let (s, it) = (idx / cloud.n_iter, idx % cloud.n_iter + 1);
        out.write_record([s.to_string(), it.to_string(), f(z.q), f(z.p)])?;
    }
    out.flush()?;
    Ok(())
}

/// `step,index,q,p` rows for a sequence of curves.
pub fn write_polylines_csv<P: AsRef<Path>>(path: P, lines: &[Polyline]) -> Result<()> {
    let mut out = table(path, &["step", "index", "q", "p"])?;
    for (s, line) in lines.iter().enumerate() {
        for (i, z) in line.points.iter().enumerate() {
            out.write_record([s.to_string(), i.to_string(), f(z.q), f(z.p)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `q,p` rows.
pub fn write_points_csv<P: AsRef<Path>>(path: P, points: &[PhasePoint]) -> Result<()> {
    let mut out = table(path, &["q", "p"])?;
    for z in points {
        out.write_record([f(z.q), f(z.p)])?;
    }
    out.flush()?;
    Ok(())
}

/// `q,p,count,density` rows at bin centers, `q`-major.
pub fn write_histogram_csv<P: AsRef<Path>>(path: P, hist: &Histogram2d) -> Result<()> {
    let mut out = table(path, &["q", "p", "count", "density"])?;
    for (b, d) in hist.density().into_iter().enumerate() {
        let z = hist.bin_center(b);
        out.write_record([f(z.q), f(z.p), hist.counts[b].to_string(), f(d)])?;
    }
    out.flush()?;
    Ok(())
}

/// `n,purity,abs_f,arg_f` rows.
pub fn write_purity_csv<P: AsRef<Path>>(path: P, curve: &PurityCurve) -> Result<()> {
    let mut out = table(path, &["n", "purity", "abs_f", "arg_f"])?;
    for p in &curve.points {
        out.write_record([p.n.to_string(), f(p.purity), f(p.fidelity.norm()), f(p.fidelity.arg())])?;
    }
    out.flush()?;
    Ok(())
}

/// `n,mean_q,mean_p,var_q,var_p,energy,norm` rows.
pub fn write_observables_csv<P: AsRef<Path>>(path: P, rows: &[(Observables, f64)]) -> Result<()> {
    let mut out = table(path, &["n", "mean_q", "mean_p", "var_q", "var_p", "energy", "norm"])?;
    for (n, (o, norm)) in rows.iter().enumerate() {
        out.write_record([
            n.to_string(),
            f(o.mean_q),
            f(o.mean_p),
            f(o.var_q),
            f(o.var_p),
            f(o.energy),
            f(*norm),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `q,re,im` rows of a wave function.
pub fn write_state_csv<P: AsRef<Path>>(path: P, state: &crate::state::QuantumState) -> Result<()> {
    let mut out = table(path, &["q", "re", "im"])?;
    for (j, a) in state.amplitudes().iter().enumerate() {
        out.write_record([f(state.grid().q(j)), f(a.re), f(a.im)])?;
    }
    out.flush()?;
    Ok(())
}

/// `artifact.ext` → `artifact.ext.json`.
pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<P: AsRef<Path>, T: Serialize + ?Sized>(path: P, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
