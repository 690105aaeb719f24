//! The full chain: load, forms, optional reparametrization, growth,
//! stress check, reconstruction, export.

pub mod config;
pub mod exporters;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{ConfigError, PipelineConfig, SurfaceSource};
pub use exporters::{export_all, exporters, Artifacts, ExportError, Exporter};

use crate::dsl::{Surface, SurfaceError};
use crate::forms::{FormsError, FormsGrid};
use crate::gallery::ClosedForm;
use crate::growth::{assemble_field, synthesize, GrowthError, GrowthField, NetTolerance};
use crate::reconstruct::{reconstruct, ReconstructError};
use crate::reparam::{self, ReparamError, ReparamOptions, TraceError};
use crate::verify::{verify, StressTolerance, VerifyError};

/// Bound on the mismatch between synthesized and closed-form growth of the
/// presets, relative to `max(|closed form|, 1)`.
pub const CLOSED_FORM_TOL: f64 = 1e-6;

/// Stages that can end a run early. Loading and export always happen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Analyze,
    Reparam,
    Synthesize,
    Verify,
    Reconstruct,
}

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    ToleranceFailure,
    InputError,
    Degenerate,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::ToleranceFailure => 2,
            Outcome::InputError => 3,
            Outcome::Degenerate => 4,
        }
    }

    fn worse(self, other: Outcome) -> Outcome {
        if other.exit_code() > self.exit_code() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Passed,
    Failed,
    Skipped,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub name: &'static str,
    pub status: StageStatus,
    pub seconds: f64,
    pub values: BTreeMap<&'static str, f64>,
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub surface: String,
    pub config: PipelineConfig,
    pub reparametrized: bool,
    pub stages: Vec<StageRecord>,
    /// Files relative to the output directory; `manifest.json` itself is not
    /// listed.
    pub files: Vec<FileRecord>,
    pub outcome: Outcome,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

/// A finished run: the manifest and everything computed.
pub struct Run {
    pub manifest: RunManifest,
    pub artifacts: Artifacts,
}

struct Recorder {
    stages: Vec<StageRecord>,
    outcome: Outcome,
}

impl Recorder {
    fn begin(&mut self, name: &'static str) -> (StageRecord, Instant) {
        let rec = StageRecord {
            name,
            status: StageStatus::Passed,
            seconds: 0.0,
            values: BTreeMap::new(),
            messages: Vec::new(),
        };
        (rec, Instant::now())
    }

    fn end(&mut self, (mut rec, t0): (StageRecord, Instant)) {
        rec.seconds = t0.elapsed().as_secs_f64();
        self.stages.push(rec);
    }

    fn fail(&mut self, rec: &mut StageRecord, message: String) {
        rec.status = StageStatus::Failed;
        rec.messages.push(message);
        self.outcome = self.outcome.worse(Outcome::ToleranceFailure);
    }

    fn error(&mut self, (mut rec, t0): (StageRecord, Instant), kind: Outcome, message: String) {
        rec.status = StageStatus::Error;
        rec.messages.push(format!("{}: {message}", rec.name));
        self.outcome = self.outcome.worse(kind);
        self.end((rec, t0));
    }

    fn skip(&mut self, name: &'static str, message: &str) {
        self.stages.push(StageRecord {
            name,
            status: StageStatus::Skipped,
            seconds: 0.0,
            values: BTreeMap::new(),
            messages: vec![message.to_string()],
        });
    }
}

fn surface_kind(e: &SurfaceError) -> Outcome {
    match e {
        SurfaceError::Eval { .. } | SurfaceError::Map { .. } => Outcome::Degenerate,
    }
}

fn forms_kind(e: &FormsError) -> Outcome {
    match e {
        FormsError::GridTooCoarse { .. } => Outcome::InputError,
        FormsError::Surface(s) => surface_kind(s),
        FormsError::Singular { .. } => Outcome::Degenerate,
    }
}

fn reparam_kind(e: &ReparamError) -> Outcome {
    match e {
        ReparamError::GridTooCoarse { .. } | ReparamError::SeedOutside(..) => Outcome::InputError,
        ReparamError::Forms(f) | ReparamError::Trace(TraceError::Forms(f)) => forms_kind(f),
        _ => Outcome::Degenerate,
    }
}

fn growth_kind(e: &GrowthError) -> Outcome {
    match e {
        GrowthError::Forms(f) => forms_kind(f),
        GrowthError::BadThickness(_) => Outcome::InputError,
        _ => Outcome::Degenerate,
    }
}

fn verify_kind(e: &VerifyError) -> Outcome {
    match e {
        VerifyError::GridTooCoarse { .. } => Outcome::InputError,
        VerifyError::Surface(s) => surface_kind(s),
        _ => Outcome::Degenerate,
    }
}

fn reconstruct_kind(e: &ReconstructError) -> Outcome {
    match e {
        ReconstructError::Incompatible { .. } | ReconstructError::Drift { .. } => Outcome::ToleranceFailure,
        ReconstructError::Forms(f) => forms_kind(f),
        ReconstructError::Surface(s) => surface_kind(s),
        _ => Outcome::Degenerate,
    }
}

/// Largest mismatch between `field` and a closed form, relative to
/// `max(|closed form|, 1)`. `offset` maps field parameters to closed-form
/// parameters by translation; without it they are mapped through the closed
/// form's own parameter expressions.
pub fn closed_form_error(field: &GrowthField, cf: &ClosedForm, offset: Option<(f64, f64)>) -> Result<f64, SurfaceError> {
    let g = &field.samples;
    let mut worst: f64 = 0.0;
    for (i, j, s) in g.iter() {
        let (u, v) = g.coords(i, j);
        let wrap = |e| SurfaceError::Eval {
            component: 'g',
            u,
            v,
            source: e,
        };
        let (p, q) = match offset {
            Some((a, b)) => (u + a, v + b),
            None => cf.params_at(u, v).map_err(wrap)?,
        };
        let want = cf.eval(p, q).map_err(wrap)?;
        let got = [s.l1_0, s.l2_0, s.l1_1, s.l2_1];
        for k in 0..4 {
            worst = worst.max((got[k] - want[k]).abs() / want[k].abs().max(1.0));
        }
    }
    Ok(worst)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn inventory(paths: &[PathBuf], dir: &Path) -> std::io::Result<Vec<FileRecord>> {
    paths
        .iter()
        .map(|p| {
            let bytes = std::fs::read(p)?;
            Ok(FileRecord {
                path: p.strip_prefix(dir).unwrap_or(p).display().to_string(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            })
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
}

/// Runs every stage up to and including `until`, exports the artifacts and
/// writes `manifest.json` into the output directory. Only an invalid
/// configuration is returned as an error; stage failures are recorded in the
/// manifest.
pub fn run_pipeline(config: &PipelineConfig, until: Stage) -> Result<Run, PipelineError> {
    config.validate()?;
    let mut rec = Recorder {
        stages: Vec::new(),
        outcome: Outcome::Pass,
    };
    let mut art = Artifacts::default();

    let st = rec.begin("load");
    let loaded = config.source.load();
    let (surface, closed) = match loaded {
        Ok(v) => {
            rec.end(st);
            v
        }
        Err(e) => {
            rec.error(st, Outcome::InputError, e.to_string());
            return Ok(finish(config, "", false, rec, art));
        }
    };
    let name = surface.name.clone();
    let surface: Arc<dyn Surface> = Arc::new(surface);
    let reparametrized = stages(config, until, &surface, closed, &mut rec, &mut art);
    Ok(finish(config, &name, reparametrized, rec, art))
}

/// The computing stages; returns whether the reparametrization ran.
fn stages(
    config: &PipelineConfig,
    until: Stage,
    original: &Arc<dyn Surface>,
    closed: Option<ClosedForm>,
    rec: &mut Recorder,
    art: &mut Artifacts,
) -> bool {
    let (nx, ny) = (config.nx, config.ny);

    let mut st = rec.begin("analyze");
    let forms = match FormsGrid::sample(original.as_ref(), nx, ny) {
        Ok(f) => f,
        Err(e) => {
            rec.error(st, forms_kind(&e), e.to_string());
            return false;
        }
    };
    let needs = forms.needs_reparam_at(config.tol_form);
    st.0.values.insert("max_abs_F", forms.max_abs_f());
    st.0.values.insert("max_abs_M", forms.max_abs_m());
    st.0.values.insert("length_scale", forms.scale);
    st.0.values.insert("needs_reparam", needs as u8 as f64);
    art.forms = Some(forms);
    rec.end(st);
    if until == Stage::Analyze {
        return false;
    }

    let (surface, params, offset) = if needs {
        let mut st = rec.begin("reparam");
        let seed = config.seed.unwrap_or_else(|| reparam::default_seed(&original.domain()));
        let opts = ReparamOptions { nx, ny, seed };
        let built = reparam::registry()
            .get("curvature-lines")
            .expect("registered")
            .build(original.clone(), &opts);
        let r = match built {
            Ok(r) => r,
            Err(e) => {
                rec.error(st, reparam_kind(&e), e.to_string());
                return true;
            }
        };
        let p = r.map.patch;
        st.0.values.insert("seed_x", seed.0);
        st.0.values.insert("seed_y", seed.1);
        st.0.values.insert("patch_s_lo", p.x_lo);
        st.0.values.insert("patch_s_hi", p.x_hi);
        st.0.values.insert("patch_t_lo", p.y_lo);
        st.0.values.insert("patch_t_hi", p.y_hi);
        st.0.values.insert("min_jacobian", r.map.min_jacobian());
        st.0.values.insert("valid_fraction", r.map.valid_fraction());
        st.0.messages.extend(r.map.diagnostics.iter().cloned());
        let offset = match closed.map(|cf| cf.params_at(seed.0, seed.1)).transpose() {
            Ok(o) => o,
            Err(e) => {
                rec.error(st, Outcome::Degenerate, e.to_string());
                return true;
            }
        };
        art.reparam = Some(r.map);
        rec.end(st);
        (r.surface, ["S", "T"], offset)
    } else {
        rec.skip("reparam", "coordinate curves already form an orthogonal curvature net");
        (original.clone(), ["X", "Y"], None)
    };
    if until == Stage::Reparam {
        return needs;
    }

    let mut st = rec.begin("synthesize");
    let tol = NetTolerance::relative(config.tol_form.max(crate::forms::VANISH_TOL), surface.length_scale());
    let field = synthesize(surface.as_ref(), nx, ny, tol).and_then(|g| assemble_field(g, config.thickness, params));
    let field = match field {
        Ok(f) => f,
        Err(e) => {
            rec.error(st, growth_kind(&e), e.to_string());
            return needs;
        }
    };
    let (lo, hi) = field
        .samples
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            let (a0, b0) = s.at(0.0);
            let (a1, b1) = s.at(config.thickness);
            (lo.min(a0).min(b0).min(a1).min(b1), hi.max(a0).max(b0).max(a1).max(b1))
        });
    st.0.values.insert("min_growth", lo);
    st.0.values.insert("max_growth", hi);
    if let Some(cf) = closed {
        match closed_form_error(&field, &cf, offset) {
            Ok(err) => {
                st.0.values.insert("closed_form_error", err);
                if !(err <= CLOSED_FORM_TOL) {
                    let m = format!("growth differs from the closed form by {err:.3e} > {CLOSED_FORM_TOL:.1e}");
                    rec.fail(&mut st.0, m);
                }
            }
            Err(e) => st.0.messages.push(format!("closed form not evaluated: {e}")),
        }
    }
    art.growth = Some(field);
    rec.end(st);
    if until == Stage::Synthesize {
        return needs;
    }
    let field = art.growth.as_ref().expect("just stored");

    let mut st = rec.begin("verify");
    match verify(surface.as_ref(), field, config.modulus) {
        Ok(report) => {
            let s = report.summary;
            for (k, v) in [
                ("s0", s.s0),
                ("s1", s.s1),
                ("thickness_identity", s.thickness_identity),
                ("plate", s.plate),
                ("traction", s.traction),
                ("moment", s.moment),
                ("brackets", s.brackets),
            ] {
                st.0.values.insert(k, v);
            }
            for m in s.failures(&StressTolerance::scaled(config.tol_stress)) {
                rec.fail(&mut st.0, m);
            }
            art.stress = Some(report);
            rec.end(st);
        }
        Err(e) => {
            rec.error(st, verify_kind(&e), e.to_string());
            return needs;
        }
    }
    if until == Stage::Verify {
        return needs;
    }

    let mut st = rec.begin("reconstruct");
    match reconstruct(field, surface.as_ref()) {
        Ok(r) => {
            st.0.values.insert("max_deviation", r.max_deviation);
            st.0.values.insert("mean_deviation", r.mean_deviation);
            st.0.values.insert("compatibility", r.compatibility);
            st.0.values.insert("path_gap", r.path_gap);
            st.0.values.insert("drift", r.drift);
            if r.ambiguous {
                st.0.messages.push("alignment is not unique".into());
            }
            if !(r.max_deviation <= config.tol_recon) {
                let m = format!(
                    "reconstruction deviates by {:.3e} > {:.1e}",
                    r.max_deviation, config.tol_recon
                );
                rec.fail(&mut st.0, m);
            }
            art.reconstruction = Some(r);
            rec.end(st);
        }
        Err(e) => rec.error(st, reconstruct_kind(&e), e.to_string()),
    }
    needs
}

fn finish(config: &PipelineConfig, name: &str, reparametrized: bool, mut rec: Recorder, art: Artifacts) -> Run {
    let st = rec.begin("export");
    let dir = &config.outdir;
    let files = export_all(&art, &config.formats, dir)
        .map_err(|e| e.to_string())
        .and_then(|paths| inventory(&paths, dir).map_err(|e| e.to_string()));
    let files = match files {
        Ok(f) => {
            let mut st = st;
            st.0.values.insert("files", f.len() as f64);
            rec.end(st);
            f
        }
        Err(e) => {
            rec.error(st, Outcome::InputError, e);
            Vec::new()
        }
    };
    let mut manifest = RunManifest {
        surface: name.to_string(),
        config: config.clone(),
        reparametrized,
        stages: rec.stages,
        files,
        outcome: rec.outcome,
        exit_code: rec.outcome.exit_code(),
    };
    let written = std::fs::create_dir_all(dir).and_then(|_| {
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(dir.join("manifest.json"), json + "\n")
    });
    if let Err(e) = written {
        manifest.outcome = manifest.outcome.worse(Outcome::InputError);
        manifest.exit_code = manifest.outcome.exit_code();
        if let Some(s) = manifest.stages.last_mut() {
            s.status = StageStatus::Error;
            s.messages.push(format!("cannot write manifest into {}: {e}", dir.display()));
        }
    }
    Run {
        manifest,
        artifacts: art,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(name: &str, n: usize, dir: &Path) -> PipelineConfig {
        let mut c = PipelineConfig::new(SurfaceSource::Gallery(name.into()));
        c.nx = n;
        c.ny = n;
        c.outdir = dir.to_path_buf();
        c
    }

    #[test]
    fn torus_passes_without_reparametrization() {
        let dir = tempfile::tempdir().unwrap();
        let run = run_pipeline(&config("torus", 41, dir.path()), Stage::Reconstruct).unwrap();
        let m = &run.manifest;
        assert_eq!(m.exit_code, 0, "{}", serde_json::to_string_pretty(m).unwrap());
        assert!(!m.reparametrized);
        assert_eq!(m.stage("reparam").unwrap().status, StageStatus::Skipped);
        let names: Vec<_> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(
            names,
            [
                "forms.csv",
                "growth.csv",
                "stress.csv",
                "stress_summary.txt",
                "reconstruction.csv",
                "growth.vtk",
                "reconstruction.vtk"
            ]
        );
        assert!(dir.path().join("manifest.json").exists());
        assert!(m.files.iter().all(|f| f.sha256.len() == 64 && f.bytes > 0));
    }

    #[test]
    fn empty_format_list_writes_only_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config("plane", 5, dir.path());
        c.formats.clear();
        let run = run_pipeline(&c, Stage::Reconstruct).unwrap();
        assert!(run.manifest.files.is_empty());
        let listed: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(listed.len(), 1);
    }

    #[test]
    fn stopping_early_skips_later_stages() {
        let dir = tempfile::tempdir().unwrap();
        let run = run_pipeline(&config("cone", 11, dir.path()), Stage::Synthesize).unwrap();
        assert!(run.manifest.stage("verify").is_none());
        assert!(run.artifacts.growth.is_some() && run.artifacts.stress.is_none());
    }

    #[test]
    fn tight_tolerance_fails_with_code_two() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config("torus", 41, dir.path());
        c.tol_recon = 1e-12;
        let run = run_pipeline(&c, Stage::Reconstruct).unwrap();
        assert_eq!(run.manifest.exit_code, 2);
        assert_eq!(run.manifest.stage("reconstruct").unwrap().status, StageStatus::Failed);
        assert!(dir.path().join("reconstruction.csv").exists());
    }

    #[test]
    fn degenerate_surfaces_exit_with_four() {
        let dir = tempfile::tempdir().unwrap();
        let c = PipelineConfig {
            source: SurfaceSource::Inline("x = X\ny = X\nz = X\n".into()),
            ..config("plane", 5, dir.path())
        };
        let run = run_pipeline(&c, Stage::Reconstruct).unwrap();
        assert_eq!(run.manifest.exit_code, 4);
        let a = run.manifest.stage("analyze").unwrap();
        assert!(a.messages[0].starts_with("analyze:"), "{:?}", a.messages);
    }

    #[test]
    fn bad_input_exits_with_three() {
        let dir = tempfile::tempdir().unwrap();
        let c = PipelineConfig {
            source: SurfaceSource::Inline("x = X +\ny = Y\nz = 0\n".into()),
            ..config("plane", 5, dir.path())
        };
        assert_eq!(run_pipeline(&c, Stage::Reconstruct).unwrap().manifest.exit_code, 3);
        let mut c = config("plane", 2, dir.path());
        assert!(run_pipeline(&c, Stage::Reconstruct).is_err());
        c.nx = 5;
        c.ny = 5;
        c.source = SurfaceSource::Gallery("sphere".into());
        assert_eq!(run_pipeline(&c, Stage::Reconstruct).unwrap().manifest.exit_code, 3);
    }
}
