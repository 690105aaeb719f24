//! File writers selected by format name.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::export::vtk::write_structured_grid;
use crate::forms::FormsGrid;
use crate::growth::GrowthField;
use crate::reconstruct::ReconstructionReport;
use crate::registry::Registry;
use crate::reparam::ReparamMap;
use crate::verify::StressReport;

/// Whatever the stages produced so far.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub forms: Option<FormsGrid>,
    pub reparam: Option<ReparamMap>,
    pub growth: Option<GrowthField>,
    pub stress: Option<StressReport>,
    pub reconstruction: Option<ReconstructionReport>,
}

pub trait Exporter: Send + Sync {
    fn description(&self) -> &'static str;

    /// Writes every artifact this format covers into `dir` and returns the
    /// paths, in a fixed order.
    fn export(&self, artifacts: &Artifacts, dir: &Path) -> io::Result<Vec<PathBuf>>;
}

fn write_file(
    dir: &Path,
    name: &str,
    out: &mut Vec<PathBuf>,
    f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> io::Result<()> {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    f(&mut w)?;
    w.flush()?;
    out.push(path);
    Ok(())
}

pub struct Csv;

impl Exporter for Csv {
    fn description(&self) -> &'static str {
        "comma-separated tables and a plain-text stress summary"
    }

    fn export(&self, a: &Artifacts, dir: &Path) -> io::Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        if let Some(f) = &a.forms {
            write_file(dir, "forms.csv", &mut out, |w| f.write_csv(w))?;
        }
        if let Some(m) = &a.reparam {
            write_file(dir, "reparam_forward.csv", &mut out, |w| m.write_forward_csv(w))?;
            write_file(dir, "reparam_inverse.csv", &mut out, |w| m.write_inverse_csv(w))?;
        }
        if let Some(g) = &a.growth {
            write_file(dir, "growth.csv", &mut out, |w| g.write_csv(w))?;
        }
        if let Some(s) = &a.stress {
            write_file(dir, "stress.csv", &mut out, |w| s.write_csv(w))?;
            write_file(dir, "stress_summary.txt", &mut out, |w| s.write_summary(w))?;
        }
        if let Some(r) = &a.reconstruction {
            write_file(dir, "reconstruction.csv", &mut out, |w| r.write_csv(w))?;
        }
        Ok(out)
    }
}

pub struct Vtk;

impl Exporter for Vtk {
    fn description(&self) -> &'static str {
        "legacy ASCII structured grids"
    }

    fn export(&self, a: &Artifacts, dir: &Path) -> io::Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        if let Some(g) = &a.growth {
            write_file(dir, "growth.vtk", &mut out, |w| write_growth_vtk(g, w))?;
        }
        if let Some(r) = &a.reconstruction {
            write_file(dir, "reconstruction.vtk", &mut out, |w| r.write_vtk(w))?;
        }
        Ok(out)
    }
}

/// The growth grid laid flat at `(p1, p2, 0)`.
pub fn write_growth_vtk<W: Write>(g: &GrowthField, w: &mut W) -> io::Result<()> {
    let s = &g.samples;
    let points: Vec<_> = s
        .iter()
        .map(|(i, j, _)| {
            let (u, v) = s.coords(i, j);
            crate::dsl::Vec3::new(u, v, 0.0)
        })
        .collect();
    let col = |f: fn(&crate::growth::GrowthSample) -> f64| s.data.iter().map(f).collect::<Vec<_>>();
    write_structured_grid(
        w,
        "growth field",
        s.nx,
        s.ny,
        &points,
        &[
            ("l1_0", col(|x| x.l1_0)),
            ("l2_0", col(|x| x.l2_0)),
            ("l1_1", col(|x| x.l1_1)),
            ("l2_1", col(|x| x.l2_1)),
        ],
    )
}

pub fn exporters() -> Registry<dyn Exporter> {
    let mut r: Registry<dyn Exporter> = Registry::new("export format");
    r.register("csv", Box::new(Csv)).register("vtk", Box::new(Vtk));
    r
}

/// Runs each named exporter in turn. Unknown names are an error before any
/// file is written.
pub fn export_all(a: &Artifacts, formats: &[String], dir: &Path) -> Result<Vec<PathBuf>, ExportError> {
    let reg = exporters();
    let chosen = formats
        .iter()
        .map(|f| reg.get(f))
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(dir).map_err(|source| ExportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for e in chosen {
        out.extend(e.export(a, dir).map_err(|source| ExportError::Io {
            path: dir.to_path_buf(),
            source,
        })?);
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error(transparent)]
    Format(#[from] crate::registry::UnknownName),
    #[error("cannot write into {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}
