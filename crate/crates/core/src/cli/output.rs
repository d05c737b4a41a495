//! Atomic file output and the CSV/plot-data writers.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::report::{format_float, SweepSummary};
use crate::spectral::ChannelSpectrum;
use crate::topo::GridSamples;
use crate::{Error, Result};

/// Largest number of nodes per direction written to `fields.csv`.
pub const FIELD_SAMPLES_PER_AXIS: usize = 128;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_owned(),
        source,
    }
}

/// Writes `bytes` to a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))
}

fn field_stride(n: usize) -> usize {
    n.div_ceil(FIELD_SAMPLES_PER_AXIS).max(1)
}

const FIELD_COLUMNS: [&str; 8] = ["u", "v", "sqrt_g", "K", "H", "V_dacosta", "grad_n_sq", "div_n_sq"];

fn field_rows(samples: &GridSamples) -> Vec<Vec<Vec<String>>> {
    let nu = samples.nu;
    let nv = samples.nodes.len() / nu;
    let (su, sv) = (field_stride(nu), field_stride(nv));
    (0..nv)
        .step_by(sv)
        .map(|j| {
            (0..nu)
                .step_by(su)
                .map(|i| {
                    let n = &samples.nodes[j * nu + i];
                    [n.u, n.v, n.sqrt_g, n.gauss, n.mean, n.v_dacosta, n.grad_n_sq, n.div_n * n.div_n]
                        .iter()
                        .map(|&x| format_float(x))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `fields.csv`, subsampled to at most [`FIELD_SAMPLES_PER_AXIS`] nodes per direction.
pub fn write_fields_csv(dir: &Path, samples: &GridSamples) -> Result<PathBuf> {
    let path = dir.join("fields.csv");
    let rows = field_rows(samples).into_iter().flatten();
    write_atomic(&path, &csv_bytes(&FIELD_COLUMNS, rows)?)?;
    Ok(path)
}

/// `fields.dat`: the same columns, whitespace separated, one block per meridian
/// position for gnuplot `splot`.
pub fn write_fields_plot(dir: &Path, samples: &GridSamples) -> Result<PathBuf> {
    let path = dir.join("fields.dat");
    let mut out = format!("# {}\n", FIELD_COLUMNS.join(" "));
    for block in field_rows(samples) {
        for row in block {
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push('\n');
    }
    write_atomic(&path, out.as_bytes())?;
    Ok(path)
}

/// `spectrum_l<k>.csv` for every swept channel.
pub fn write_spectrum_csv(dir: &Path, channels: &[ChannelSpectrum]) -> Result<Vec<PathBuf>> {
    channels
        .iter()
        .map(|c| {
            let path = dir.join(format!("spectrum_l{}.csv", c.ell));
            let rows = c.eigenvalues.iter().enumerate().map(|(i, e)| {
                vec![
                    c.ell.to_string(),
                    i.to_string(),
                    format_float(*e),
                    c.degeneracy.to_string(),
                    u8::from(i < c.bound.len()).to_string(),
                ]
            });
            write_atomic(&path, &csv_bytes(&["ell", "index", "energy", "degeneracy", "bound"], rows)?)?;
            Ok(path)
        })
        .collect()
}

pub fn write_sweep_csv(dir: &Path, sweep: &SweepSummary) -> Result<PathBuf> {
    let path = dir.join("sweep.csv");
    let f = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    let i = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_default();
    let rows = sweep.rows.iter().map(|r| {
        vec![
            format_float(r.value),
            u8::from(r.flagged).to_string(),
            r.reason.clone().unwrap_or_default(),
            i(r.signed_degree),
            i(r.absolute_degree),
            f(r.total_curvature),
            f(r.willmore_energy),
            f(r.dirichlet_energy),
            f(r.n_paper),
            f(r.n_sigma_lower),
            f(r.n_dacosta),
        ]
    });
    let header = [
        sweep.parameter.as_str(),
        "flagged",
        "reason",
        "signed_degree",
        "absolute_degree",
        "total_curvature",
        "willmore_energy",
        "dirichlet_energy",
        "n_paper",
        "n_sigma_lower",
        "n_dacosta",
    ];
    write_atomic(&path, &csv_bytes(&header, rows)?)?;
    Ok(path)
}
