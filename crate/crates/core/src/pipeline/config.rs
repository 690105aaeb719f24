//! Run configuration: a key/value file, overridable field by field.
//!
//! ```text
//! # one of: gallery, surface (path to a definition file), or inline x/y/z
//! gallery   = torus
//! nx        = 101
//! ny        = 101
//! thickness = 0.01
//! outdir    = out/torus
//! format    = csv, vtk
//! tol_form  = 1e-9
//! tol_stress = 1e-8
//! tol_recon = 1e-4
//! seed_x    = 0.5
//! seed_y    = 0.5
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dsl::{DefinitionError, ParametricSurface};
use crate::gallery::{self, ClosedForm};
use crate::kv::{KvError, KvFile};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Kv(#[from] KvError),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("surface definition: {0}")]
    Definition(#[from] DefinitionError),
    #[error(transparent)]
    Gallery(#[from] crate::registry::UnknownName),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceSource {
    Gallery(String),
    File(PathBuf),
    /// Definition text with keys `x`, `y`, `z` and optionally `name`,
    /// `domain`.
    Inline(String),
}

impl fmt::Display for SurfaceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceSource::Gallery(n) => write!(f, "gallery:{n}"),
            SurfaceSource::File(p) => write!(f, "file:{}", p.display()),
            SurfaceSource::Inline(_) => write!(f, "inline"),
        }
    }
}

impl SurfaceSource {
    pub fn load(&self) -> Result<(ParametricSurface, Option<ClosedForm>), ConfigError> {
        match self {
            SurfaceSource::Gallery(name) => {
                let reg = gallery::registry();
                let p = reg.get(name)?;
                Ok((p.surface(name), p.closed_form()))
            }
            SurfaceSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok((ParametricSurface::from_definition(&text)?, None))
            }
            SurfaceSource::Inline(text) => Ok((ParametricSurface::from_definition(text)?, None)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub source: SurfaceSource,
    pub nx: usize,
    pub ny: usize,
    pub thickness: f64,
    /// Relative size below which `F` and `M` count as zero.
    pub tol_form: f64,
    /// Bound on the first-order stress; the other stress bounds scale with it.
    pub tol_stress: f64,
    /// Bound on the reconstruction deviation, as a fraction of the diagonal.
    pub tol_recon: f64,
    pub outdir: PathBuf,
    pub formats: Vec<String>,
    /// Seed of the curvature-line coordinates; the domain centre if unset.
    pub seed: Option<(f64, f64)>,
    /// `2 C0`.
    pub modulus: f64,
}

impl PipelineConfig {
    pub fn new(source: SurfaceSource) -> PipelineConfig {
        PipelineConfig {
            source,
            nx: 101,
            ny: 101,
            thickness: 0.01,
            tol_form: 1e-9,
            tol_stress: 1e-8,
            tol_recon: 1e-4,
            outdir: PathBuf::from("out"),
            formats: vec!["csv".into(), "vtk".into()],
            seed: None,
            modulus: 1.0,
        }
    }

    /// Reads a configuration file; relative paths in it are taken from
    /// `base`.
    pub fn from_text(text: &str, base: &Path) -> Result<PipelineConfig, ConfigError> {
        let kv = KvFile::parse(text)?;
        kv.restrict_to(&[
            "gallery",
            "surface",
            "name",
            "x",
            "y",
            "z",
            "domain",
            "nx",
            "ny",
            "thickness",
            "outdir",
            "format",
            "tol_form",
            "tol_stress",
            "tol_recon",
            "seed_x",
            "seed_y",
            "modulus",
        ])?;
        let inline = ["x", "y", "z"].iter().any(|k| kv.get(k).is_some());
        let given = [kv.get("gallery").is_some(), kv.get("surface").is_some(), inline];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(ConfigError::Invalid(
                "give exactly one of `gallery`, `surface` or inline `x`, `y`, `z`".into(),
            ));
        }
        let source = if let Some(e) = kv.get("gallery") {
            SurfaceSource::Gallery(e.value.clone())
        } else if let Some(e) = kv.get("surface") {
            SurfaceSource::File(base.join(&e.value))
        } else {
            let mut def = String::new();
            for k in ["name", "x", "y", "z", "domain"] {
                if let Some(e) = kv.get(k) {
                    def.push_str(&format!("{k} = {}\n", e.value));
                }
            }
            SurfaceSource::Inline(def)
        };
        let mut c = PipelineConfig::new(source);
        if let Some(v) = kv.parse_value("nx")? {
            c.nx = v;
        }
        if let Some(v) = kv.parse_value("ny")? {
            c.ny = v;
        }
        if let Some(v) = kv.parse_value("thickness")? {
            c.thickness = v;
        }
        if let Some(v) = kv.parse_value("tol_form")? {
            c.tol_form = v;
        }
        if let Some(v) = kv.parse_value("tol_stress")? {
            c.tol_stress = v;
        }
        if let Some(v) = kv.parse_value("tol_recon")? {
            c.tol_recon = v;
        }
        if let Some(v) = kv.parse_value("modulus")? {
            c.modulus = v;
        }
        if let Some(e) = kv.get("outdir") {
            c.outdir = base.join(&e.value);
        }
        if let Some(e) = kv.get("format") {
            c.formats = parse_formats(&e.value);
        }
        let sx: Option<f64> = kv.parse_value("seed_x")?;
        let sy: Option<f64> = kv.parse_value("seed_y")?;
        c.seed = match (sx, sy) {
            (Some(x), Some(y)) => Some((x, y)),
            (None, None) => None,
            _ => return Err(ConfigError::Invalid("give both `seed_x` and `seed_y`".into())),
        };
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<PipelineConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        PipelineConfig::from_text(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.nx < 3 || self.ny < 3 {
            return bad(format!("resolution must be at least 3 per axis, got {}x{}", self.nx, self.ny));
        }
        for (name, v) in [
            ("thickness", self.thickness),
            ("tol_form", self.tol_form),
            ("tol_stress", self.tol_stress),
            ("tol_recon", self.tol_recon),
            ("modulus", self.modulus),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some((x, y)) = self.seed {
            if !(x.is_finite() && y.is_finite()) {
                return bad("seed must be finite".into());
            }
        }
        let exporters = super::exporters::exporters();
        for f in &self.formats {
            exporters.get(f)?;
        }
        Ok(())
    }
}

/// Comma- or space-separated format names; `none` means no files.
pub fn parse_formats(s: &str) -> Vec<String> {
    s.split([',', ' '])
        .map(str::trim)
        .filter(|f| !f.is_empty() && *f != "none")
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = PipelineConfig::from_text("gallery = torus\nnx = 21\nformat = csv\nseed_x = 0.2\nseed_y = 0.3\n", Path::new("/tmp"))
            .unwrap();
        assert_eq!(c.source, SurfaceSource::Gallery("torus".into()));
        assert_eq!((c.nx, c.ny), (21, 101));
        assert_eq!(c.thickness, 0.01);
        assert_eq!(c.formats, vec!["csv"]);
        assert_eq!(c.seed, Some((0.2, 0.3)));
        assert_eq!(c.outdir, PathBuf::from("out"));
        c.validate().unwrap();
    }

    #[test]
    fn inline_surfaces_load() {
        let c = PipelineConfig::from_text("x = X\ny = Y\nz = X*Y\ndomain = 0 2 0 1\n", Path::new(".")).unwrap();
        let (s, cf) = c.source.load().unwrap();
        assert!(cf.is_none());
        assert_eq!(s.domain.x_hi, 2.0);
    }

    #[test]
    fn invalid_configs() {
        assert!(PipelineConfig::from_text("nx = 5\n", Path::new(".")).is_err());
        assert!(PipelineConfig::from_text("gallery = cone\nsurface = a.txt\n", Path::new(".")).is_err());
        assert!(PipelineConfig::from_text("gallery = cone\nseed_x = 1\n", Path::new(".")).is_err());
        let mut c = PipelineConfig::new(SurfaceSource::Gallery("cone".into()));
        c.nx = 2;
        assert!(c.validate().unwrap_err().to_string().contains("at least 3"));
        c.nx = 3;
        c.thickness = 0.0;
        assert!(c.validate().is_err());
        c.thickness = 0.01;
        c.formats = vec!["stl".into()];
        assert!(c.validate().unwrap_err().to_string().contains("available: csv, vtk"));
        assert_eq!(parse_formats("none"), Vec::<String>::new());
    }
}
