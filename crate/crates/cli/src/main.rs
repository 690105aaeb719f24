use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plategrow::gallery;
use plategrow::pipeline::config::parse_formats;
use plategrow::pipeline::{run_pipeline, PipelineConfig, RunManifest, Stage, StageStatus, SurfaceSource};

/// Growth fields that program a thin plate into a target surface.
#[derive(Parser)]
#[command(name = "plategrow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the fundamental forms and decide whether reparametrization is needed
    Analyze(RunArgs),
    /// Build curvature-line coordinates when the surface needs them
    Reparam(RunArgs),
    /// Compute the growth field
    Synthesize(RunArgs),
    /// Compute the growth field and check that it is stress-free
    Verify(RunArgs),
    /// Compute, verify and rebuild the surface from the growth field
    Reconstruct(RunArgs),
    /// Every stage; same as `reconstruct`
    Run(RunArgs),
    /// Built-in surfaces
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    /// Names and descriptions
    List,
    /// Print a preset as a surface definition file
    Show { name: String },
}

#[derive(Args)]
struct RunArgs {
    /// Key/value configuration file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Surface definition file
    #[arg(long, conflicts_with = "gallery")]
    surface: Option<PathBuf>,
    /// Built-in surface name
    #[arg(long)]
    gallery: Option<String>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Plate thickness h
    #[arg(long)]
    thickness: Option<f64>,
    #[arg(long)]
    outdir: Option<PathBuf>,
    /// Comma-separated export formats (csv, vtk), or `none`
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    tol_form: Option<f64>,
    #[arg(long)]
    tol_stress: Option<f64>,
    #[arg(long)]
    tol_recon: Option<f64>,
    #[arg(long, requires = "seed_y", allow_hyphen_values = true)]
    seed_x: Option<f64>,
    #[arg(long, requires = "seed_x", allow_hyphen_values = true)]
    seed_y: Option<f64>,
    /// Print the manifest instead of the stage table
    #[arg(long)]
    json: bool,
}

const INPUT_ERROR: u8 = 3;

impl RunArgs {
    fn config(&self) -> Result<PipelineConfig, String> {
        let flag_source = match (&self.surface, &self.gallery) {
            (Some(p), _) => Some(SurfaceSource::File(p.clone())),
            (_, Some(g)) => Some(SurfaceSource::Gallery(g.clone())),
            _ => None,
        };
        let mut c = match (&self.config, flag_source.clone()) {
            (Some(path), _) => PipelineConfig::from_file(path).map_err(|e| e.to_string())?,
            (None, Some(src)) => PipelineConfig::new(src),
            (None, None) => return Err("give --surface, --gallery or --config".into()),
        };
        if let Some(src) = flag_source {
            c.source = src;
        }
        if let Some(v) = self.nx {
            c.nx = v;
        }
        if let Some(v) = self.ny {
            c.ny = v;
        }
        if let Some(v) = self.thickness {
            c.thickness = v;
        }
        if let Some(v) = &self.outdir {
            c.outdir = v.clone();
        }
        if let Some(v) = &self.format {
            c.formats = parse_formats(v);
        }
        if let Some(v) = self.tol_form {
            c.tol_form = v;
        }
        if let Some(v) = self.tol_stress {
            c.tol_stress = v;
        }
        if let Some(v) = self.tol_recon {
            c.tol_recon = v;
        }
        if let (Some(x), Some(y)) = (self.seed_x, self.seed_y) {
            c.seed = Some((x, y));
        }
        Ok(c)
    }
}

fn print_table(m: &RunManifest) {
    for s in &m.stages {
        let status = match s.status {
            StageStatus::Passed => "ok",
            StageStatus::Failed => "FAILED",
            StageStatus::Skipped => "skipped",
            StageStatus::Error => "ERROR",
        };
        let values: Vec<String> = s.values.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect();
        println!("{:<12} {:<8} {:>7.2}s  {}", s.name, status, s.seconds, values.join(" "));
        for msg in &s.messages {
            println!("{:<12} {msg}", "");
        }
    }
    println!(
        "{} files in {}; exit {}",
        m.files.len(),
        m.config.outdir.display(),
        m.exit_code
    );
}

fn run(args: &RunArgs, until: Stage) -> ExitCode {
    let config = match args.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    };
    match run_pipeline(&config, until) {
        Ok(r) => {
            if args.json {
                println!("{}", serde_json::to_string_pretty(&r.manifest).expect("manifest serializes"));
            } else {
                print_table(&r.manifest);
            }
            ExitCode::from(r.manifest.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}

fn gallery_cmd(action: &GalleryAction) -> ExitCode {
    let reg = gallery::registry();
    match action {
        GalleryAction::List => {
            for (name, p) in reg.iter() {
                println!("{name:<10} {}", p.description());
            }
            ExitCode::SUCCESS
        }
        GalleryAction::Show { name } => match reg.get(name) {
            Ok(p) => {
                print!("{}", p.surface(name).to_definition());
                if let Some(cf) = p.closed_form() {
                    println!("# closed-form growth in ({}, {}):", cf.params[0], cf.params[1]);
                    for (k, g) in ["l1_0", "l2_0", "l1_1", "l2_1"].iter().zip(cf.growth) {
                        println!("#   {k} = {g}");
                    }
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(INPUT_ERROR)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match &cli.command {
        Command::Analyze(a) => run(a, Stage::Analyze),
        Command::Reparam(a) => run(a, Stage::Reparam),
        Command::Synthesize(a) => run(a, Stage::Synthesize),
        Command::Verify(a) => run(a, Stage::Verify),
        Command::Reconstruct(a) | Command::Run(a) => run(a, Stage::Reconstruct),
        Command::Gallery { action } => gallery_cmd(action),
    }
}
