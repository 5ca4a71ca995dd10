mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ihnc::inversion::{
    error_metric, load_run_dir, run_inversion, ForwardKind, ForwardOperator, HncForward,
    IterationHistory,
};
use ihnc::io::{parse_columns, read_table, write_columns, write_table};
use ihnc::md::{run_nvt, run_nvt_observed, virial_pressure_quadrature, MdForward, MdResult};
use ihnc::thermo::kirkwood_buff_compressibility;
use ihnc::transform::{delta_omega, RadialTransform};
use ihnc::{Error, RadialGrid, SpectralField, StatePoint, TableKind, Tabulated};

use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "ihnc", version, about = "Pair potentials from radial distribution functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radial Fourier transform of a two-column table.
    Transform {
        input: PathBuf,
        output: PathBuf,
        /// Treat the input as a spectrum on the frequency ladder and transform back.
        #[arg(long)]
        inverse: bool,
    },
    /// Solve the HNC equation for the configured potential.
    HncSolve { config: PathBuf },
    /// Canonical MD run for the configured potential.
    Md {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Write every sampled frame as N lines of "x y z".
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Reconstruct a potential from the configured target RDF.
    Invert {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Summarize a run directory written by `invert`.
    Analyze {
        run_dir: PathBuf,
        /// Known potential for the error metric column.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Transform { input, output, inverse } => cmd_transform(&input, &output, inverse),
        Command::HncSolve { config } => cmd_hnc_solve(&config),
        Command::Md { config, seed, trajectory } => cmd_md(&config, seed, trajectory.as_deref()),
        Command::Invert { config, seed } => cmd_invert(&config, seed),
        Command::Analyze { run_dir, reference } => cmd_analyze(&run_dir, reference.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 config/input, 3 no convergence, 4 singular structure factor, 5 RDF range too large.
fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(err) => library_code(err),
        None => 1,
    }
}

fn library_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) | Error::InvalidGrid(_) | Error::Parse { .. } => 2,
        Error::NoConvergence { .. } => 3,
        Error::SingularStructureFactor { .. } => 4,
        Error::RdfRangeExceedsBox { .. } => 5,
        _ => 1,
    }
}

fn cmd_transform(input: &Path, output: &Path, inverse: bool) -> Result<()> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let (mut xs, mut ys) = parse_columns(&text)?;
    // spectra carry their w = 0 limit as the first row
    let mut zero = f64::NAN;
    if xs[0] == 0.0 {
        if !inverse || xs.len() < 2 {
            bail!(ConfigError(format!("{}: radial tables start at r > 0", input.display())));
        }
        zero = ys.remove(0);
        xs.remove(0);
    }
    check_ladder(&xs)?;
    let m = xs.len();
    let spacing = xs[0];
    if inverse {
        // the ladder w_l = l*dw belongs to the grid dr = 1/(2 (m+1) dw)
        let grid = RadialGrid::new(1.0 / (2.0 * (m + 1) as f64 * spacing), m, m)?;
        let field = SpectralField::new(grid, ys, zero)?;
        let f = RadialTransform::new(grid).inverse(&field, TableKind::Generic);
        write_table(output, &f, "r f(r)")?;
    } else {
        let grid = RadialGrid::new(spacing, m, m)?;
        let f = Tabulated::new(grid, ys, TableKind::Generic)?;
        let spec = RadialTransform::new(grid).forward(&f);
        let (w, v) = spec.columns();
        write_columns(output, &w, &v, &format!("w F(w)\ndw = {:e}", delta_omega(&grid)))?;
    }
    Ok(())
}

fn check_ladder(xs: &[f64]) -> Result<()> {
    let h = xs[0];
    for (j, &x) in xs.iter().enumerate() {
        let want = (j + 1) as f64 * h;
        if (x - want).abs() > 1e-9 * want.max(1.0) {
            return Err(Error::Parse {
                line: 0,
                message: format!("abscissa {x} is off the equidistant ladder (expected {want})"),
            }
            .into());
        }
    }
    Ok(())
}

fn cmd_hnc_solve(path: &Path) -> Result<()> {
    let cfg = RunConfig::load(path)?;
    let state = cfg.state()?;
    let grid = cfg.grid()?;
    let solver = cfg.hnc_solver()?;
    let u = cfg.potential(grid)?;
    let sol = solver.solve(&u, &state)?;
    let out = cfg.output_dir();
    fs::create_dir_all(&out)?;
    let header = format!("HNC RDF, density {} temperature {}", state.density, state.temperature);
    write_table(&out.join("rdf.dat"), &sol.g, &header)?;
    let mut report = String::new();
    writeln!(report, "iterations {}", sol.iterations)?;
    writeln!(report, "residual {:e}", sol.residual)?;
    writeln!(report, "pressure {:e}", virial_pressure_quadrature(&u, &sol.g, &state))?;
    writeln!(report, "compressibility {:e}", kirkwood_buff_compressibility(&sol.g, &state))?;
    fs::write(out.join("report.txt"), &report)?;
    print!("{report}");
    Ok(())
}

fn cmd_md(path: &Path, seed: Option<u64>, trajectory: Option<&Path>) -> Result<()> {
    let cfg = RunConfig::load(path)?;
    let state = cfg.md_state()?;
    let grid = cfg.grid()?;
    let params = cfg.md_params(seed)?;
    let u = cfg.potential(grid)?;
    let res = match trajectory {
        None => run_nvt(&u, &state, &params)?,
        Some(tp) => {
            let mut w = BufWriter::new(fs::File::create(tp)?);
            let mut io_err = None;
            let mut obs = |pos: &[[f64; 3]]| {
                for p in pos {
                    if let Err(e) = writeln!(w, "{:e} {:e} {:e}", p[0], p[1], p[2]) {
                        io_err.get_or_insert(e);
                    }
                }
            };
            let res = run_nvt_observed(&u, &state, &params, None, Some(&mut obs))?;
            if let Some(e) = io_err {
                return Err(e.into());
            }
            w.flush()?;
            res
        }
    };
    let out = cfg.output_dir();
    fs::create_dir_all(&out)?;
    write_table(&out.join("rdf.dat"), &res.g, "MD RDF")?;
    write_columns(&out.join("rdf_err.dat"), &grid.radii(), &res.g_err, "standard error of g")?;
    let report = md_report(&res, &state, params.seed);
    fs::write(out.join("report.txt"), &report)?;
    print!("{report}");
    Ok(())
}

fn md_report(res: &MdResult, state: &StatePoint, seed: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed {seed}");
    let _ = writeln!(s, "frames {}", res.frames);
    let _ = writeln!(s, "pressure {:e}", res.pressure);
    let _ = writeln!(s, "pressure_err {:e}", res.pressure_err);
    let _ = writeln!(s, "ideal_pressure {:e}", state.ideal_pressure());
    let _ = writeln!(s, "temperature {:e}", res.temperature);
    let _ = writeln!(s, "potential_energy {:e}", res.potential_energy);
    s
}

fn cmd_invert(path: &Path, seed: Option<u64>) -> Result<()> {
    let cfg = RunConfig::load(path)?;
    let scheme_cfg = cfg.scheme_config()?;
    let Some(target_cfg) = &cfg.target else {
        bail!(ConfigError("missing [target] section".into()));
    };
    let md = scheme_cfg.forward == ForwardKind::Md;
    let state = if md { cfg.md_state()? } else { cfg.state()? };
    let grid = cfg.grid()?;
    let reference = match &target_cfg.reference {
        Some(spec) => Some(cfg.build_potential(spec, grid)?),
        None => None,
    };

    let mut forward: Box<dyn ForwardOperator> = if md {
        let params = cfg.md_params(seed)?;
        Box::new(MdForward::new(params, cfg.md.continuation_equilibration))
    } else {
        Box::new(HncForward::new(cfg.hnc_solver()?))
    };

    let target = match (&target_cfg.rdf, target_cfg.synthesize) {
        (Some(file), false) => {
            let p = cfg.resolve(file);
            read_table(&p, TableKind::Rdf)
                .with_context(|| format!("reading {}", p.display()))?
                .with_grid(grid)
                .map_err(|_| ConfigError(format!("{} is not on the configured grid", p.display())))?
        }
        (None, true) => {
            let Some(u_ref) = &reference else {
                bail!(ConfigError("a synthetic target needs target.reference".into()));
            };
            if md {
                let mut params = cfg.md_params(seed)?;
                params.seed = target_cfg.seed.unwrap_or(params.seed.wrapping_add(1_000_000));
                if let Some(steps) = target_cfg.production_steps {
                    params.production_steps = steps;
                }
                run_nvt(u_ref, &state, &params)?.g
            } else {
                cfg.hnc_solver()?.solve(u_ref, &state)?.g
            }
        }
        _ => bail!(ConfigError("set exactly one of target.rdf or target.synthesize".into())),
    };

    let history = run_inversion(&target, &state, &scheme_cfg, forward.as_mut(), reference.as_ref())?;
    let out = cfg.output_dir();
    fs::create_dir_all(&out)?;
    history.write_run_dir(&out, &target)?;
    print_history(&history);
    if let Some(f) = &history.failure {
        eprintln!("iteration {} failed: {}", f.k, f.error);
        std::process::exit(library_code(&f.error).max(1).into());
    }
    Ok(())
}

fn print_history(h: &IterationHistory) {
    println!("scheme {}", h.scheme);
    println!("k data_fit epsilon pressure constraint_residual");
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
    for r in &h.records {
        println!(
            "{} {:.6e} {} {:.6e} {}",
            r.k,
            r.data_fit,
            opt(r.epsilon),
            r.pressure,
            opt(r.constraint_residual)
        );
    }
    if let Some(b) = h.best() {
        println!("best {}", b.k);
    }
}

fn cmd_analyze(dir: &Path, reference: Option<&Path>) -> Result<()> {
    let run = load_run_dir(dir)?;
    let eps: Vec<Option<f64>> = match reference {
        Some(p) => {
            let Some(target) = &run.target else {
                bail!(ConfigError(format!("{} has no target RDF", dir.display())));
            };
            let u_ref = read_table(p, TableKind::Potential)?;
            run.potentials.iter().map(|u| Some(error_metric(u, &u_ref, target))).collect()
        }
        None => run.rows.iter().map(|r| r.epsilon).collect(),
    };
    let eps0 = eps.first().copied().flatten();
    let ratio = |e: Option<f64>| match (e, eps0) {
        (Some(e), Some(e0)) if e0 > 0.0 => format!("{:.6e}", e / e0),
        _ => "-".into(),
    };
    let mut out = String::from("k data_fit eps_ratio pressure\n");
    for (row, e) in run.rows.iter().zip(&eps) {
        writeln!(out, "{} {:.6e} {} {:.6e}", row.k, row.data_fit, ratio(*e), row.pressure)?;
    }
    let best = run
        .rows
        .iter()
        .fold(None::<&ihnc::inversion::HistoryRow>, |acc, r| match acc {
            Some(b) if b.data_fit <= r.data_fit => Some(b),
            _ => Some(r),
        })
        .map(|r| r.k)
        .unwrap_or(0);
    writeln!(out, "best {best}")?;
    print!("{out}");
    Ok(())
}
