use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use regge_curvature::fe::{structured_dim, LagrangeSpace, ReggeSpace};
use regge_curvature::study::{self, StudyConfig};
use regge_curvature::Error;

/// Lifted distributional Gauss curvature of Regge metrics.
#[derive(Parser)]
#[command(name = "regge-curv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write the error table as CSV.
    Converge(StudyArgs),
    /// Run the verification suites at each level.
    Verify(StudyArgs),
    /// Print space dimensions per level.
    Dofs(StudyArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// Polynomial degree k of the Regge metric.
    #[arg(long, default_value_t = 1)]
    metric_degree: usize,
    /// Lifting degree minus metric degree (-1, 0, 1 or 2).
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    lift_offset: i32,
    /// Inclusive level range, e.g. 0:5 [default: 0:4 for converge, 0:2 for
    /// verify, 0:6 for dofs].
    #[arg(long, value_parser = parse_levels)]
    levels: Option<(u32, u32)>,
    /// Seed for the interior vertex perturbation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the structured mesh without perturbation.
    #[arg(long)]
    no_perturb: bool,
    /// Quadrature exactness for functional and mass assembly.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Quadrature exactness for error norms.
    #[arg(long)]
    norm_quad_order: Option<usize>,
    /// Also report the broken H1 error of K_h.
    #[arg(long)]
    h1: bool,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl StudyArgs {
    fn config(&self, default_levels: (u32, u32)) -> StudyConfig {
        StudyConfig {
            metric_degree: self.metric_degree,
            lift_offset: self.lift_offset,
            levels: self.levels.unwrap_or(default_levels),
            seed: self.seed,
            perturb: !self.no_perturb,
            assembly_exactness: self.quad_order,
            norm_exactness: self.norm_quad_order,
            h1: self.h1,
        }
    }
}

fn parse_levels(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = match s.split_once(':') {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("bad level '{x}': {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn converge(args: &StudyArgs) -> Result<ExitCode, Error> {
    let config = args.config((0, 4));
    let records = study::run_convergence(&config)?;
    write_output(&args.out, &study::csv_string(&records))?;
    if config.h1 {
        for r in &records {
            eprintln!("level {} err_H1_K {:.16e}", r.level, r.err_h1_k.unwrap_or(f64::NAN));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: &StudyArgs) -> Result<ExitCode, Error> {
    let config = args.config((0, 2));
    if config.levels.0 > config.levels.1 {
        return Err(Error::InvalidConfig(format!(
            "empty level range {}:{}",
            config.levels.0, config.levels.1
        )));
    }
    let mut text = String::new();
    let mut failed = false;
    for level in config.levels.0..=config.levels.1 {
        let checks = study::run_verify(level, config.metric_degree, config.seed).map_err(|e| Error::AtLevel {
            level,
            source: Box::new(e),
        })?;
        for c in checks {
            failed |= !c.passed();
            text += &format!("level {level} k={} {c}\n", config.metric_degree);
        }
    }
    write_output(&args.out, &text)?;
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn dofs(args: &StudyArgs) -> Result<ExitCode, Error> {
    let config = args.config((0, 6));
    config.validate()?;
    let r = config.lift_degree();
    let mut text = String::from("level,ndof_metric,ndof_lift,ndof_dual\n");
    for level in config.levels.0..=config.levels.1 {
        let mesh = config.mesh(level)?;
        let regge = ReggeSpace::new(mesh.clone(), config.metric_degree)?;
        let lift = LagrangeSpace::new(mesh, r);
        debug_assert_eq!(lift.dim(), structured_dim(r, level));
        text += &format!(
            "{level},{},{},{}\n",
            regge.dim(),
            lift.dim(),
            structured_dim(r + 2, level)
        );
    }
    write_output(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Converge(a) => converge(a),
        Command::Verify(a) => verify(a),
        Command::Dofs(a) => dofs(a),
    };
    match result {
        Ok(code) => code,
        Err(e @ Error::InvalidConfig(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
