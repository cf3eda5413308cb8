mod analysis;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use analysis::{Failure, Section};
use darboux_lab::field::{load_field, LoadError, VectorField};
use darboux_lab::numerics::Method;

#[derive(Parser, Debug)]
#[command(
    name = "darboux-lab",
    version,
    about = "Darboux integrability analysis for polynomial vector fields"
)]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Darboux polynomials over the default cofactor lattice.
    Darboux {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Exponential factors with coordinate-plane denominators.
    Expfactors {
        file: PathBuf,
        #[command(flatten)]
        exp: ExpArgs,
    },
    /// Darboux first integrals and the rational first-integral obstruction.
    Integrals {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        exp: ExpArgs,
    },
    /// Truncated formal first integrals.
    Formal {
        file: PathBuf,
        #[command(flatten)]
        formal: FormalArgs,
    },
    /// Integrate a trajectory and measure drift of Darboux first integrals.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        /// Write the trajectory as CSV.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Skip the search for first integrals to monitor.
        #[arg(long)]
        no_integrals: bool,
    },
    /// Largest Lyapunov exponent.
    Lyapunov {
        file: PathBuf,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long, default_value_t = 2000.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.5)]
        renorm_dt: f64,
    },
    /// Every exact analysis, plus numerics when --x0 is given.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        exp: ExpArgs,
        #[command(flatten)]
        formal: FormalArgs,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x0: Option<Vec<f64>>,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, conflicts_with = "tol")]
        dt: Option<f64>,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Degree bound for Darboux polynomials.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Multiplier bound of the cofactor lattice (defaults to the degree).
    #[arg(long)]
    lattice_bound: Option<u32>,
}

impl SearchArgs {
    fn bound(&self) -> u32 {
        self.lattice_bound.unwrap_or(self.degree)
    }
}

#[derive(Args, Debug)]
struct ExpArgs {
    /// Degree bound for the numerator g.
    #[arg(long, default_value_t = 2)]
    g_degree: u32,
    /// Largest exponent of each coordinate in the denominator.
    #[arg(long, default_value_t = 1)]
    s_bound: u32,
}

#[derive(Args, Debug)]
struct FormalArgs {
    /// Truncation order N.
    #[arg(long, default_value_t = 6)]
    order: u32,
    /// Extra obstruction degrees m.
    #[arg(long, default_value_t = 2)]
    margin: u32,
    /// Treat this parameter as a variable with zero dynamics.
    #[arg(long)]
    promote: Option<String>,
}

#[derive(Args, Debug)]
struct StartArgs {
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    x0: Vec<f64>,
    /// Tolerance of the adaptive integrator (relative and absolute).
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed RK4 step instead of the adaptive integrator.
    #[arg(long, conflicts_with = "tol")]
    dt: Option<f64>,
}

fn method(tol: Option<f64>, dt: Option<f64>) -> Method {
    match (tol, dt) {
        (_, Some(dt)) => Method::Rk4 { dt },
        (Some(tol), None) => Method::Dopri5 { rtol: tol, atol: tol },
        (None, None) => Method::adaptive(),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("DARBOUX_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("DARBOUX_LAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn load(path: &Path) -> Result<VectorField, Failure> {
    load_field(path).map_err(|e| match e {
        LoadError::Io(p, msg) => Failure::Usage(format!("{p}: {msg}")),
        LoadError::Field(err) => Failure::Usage(format!("{}: {err}", path.display())),
    })
}

/// Integrals monitored by `simulate`: linear Darboux polynomials and
/// quadratic polynomial exponential factors.
fn monitored_integrals(field: &VectorField) -> Result<Vec<darboux_lab::darboux::DarbouxFunction>, Failure> {
    let d = analysis::darboux(field, 1, 1)?;
    let e = analysis::exp_factors(field, 2, 0)?;
    Ok(analysis::integrals(field, &d.certs, &e.efacts, 1, 1)?.functions)
}

fn run(cli: &Cli) -> Result<(Value, Vec<Section>), Failure> {
    configure_threads()?;
    let mut config = Map::new();
    let mut sections = Vec::new();
    let file = match &cli.command {
        Command::Darboux { file, .. }
        | Command::Expfactors { file, .. }
        | Command::Integrals { file, .. }
        | Command::Formal { file, .. }
        | Command::Simulate { file, .. }
        | Command::Lyapunov { file, .. }
        | Command::Analyze { file, .. } => file,
    };
    config.insert("file".into(), json!(file.display().to_string()));
    let field = load(file)?;
    sections.push(analysis::field_section(&field));
    let mut put = |k: &str, v: Value| {
        config.insert(k.to_string(), v);
    };
    match &cli.command {
        Command::Darboux { search, .. } => {
            put("command", json!("darboux"));
            put("degree", json!(search.degree));
            put("lattice_bound", json!(search.bound()));
            sections.push(analysis::darboux(&field, search.degree, search.bound())?.section);
        }
        Command::Expfactors { exp, .. } => {
            put("command", json!("expfactors"));
            put("g_degree", json!(exp.g_degree));
            put("s_bound", json!(exp.s_bound));
            sections.push(analysis::exp_factors(&field, exp.g_degree, exp.s_bound)?.section);
        }
        Command::Integrals { search, exp, .. } => {
            put("command", json!("integrals"));
            put("degree", json!(search.degree));
            put("lattice_bound", json!(search.bound()));
            put("g_degree", json!(exp.g_degree));
            put("s_bound", json!(exp.s_bound));
            let d = analysis::darboux(&field, search.degree, search.bound())?;
            let e = analysis::exp_factors(&field, exp.g_degree, exp.s_bound)?;
            let h = analysis::integrals(&field, &d.certs, &e.efacts, search.degree, search.bound())?;
            sections.extend([d.section, e.section, h.section]);
        }
        Command::Formal { formal, .. } => {
            put("command", json!("formal"));
            put("order", json!(formal.order));
            put("margin", json!(formal.margin));
            put("promote", json!(formal.promote));
            sections.push(analysis::formal(
                &field,
                formal.order,
                formal.margin,
                formal.promote.as_deref(),
            )?);
        }
        Command::Simulate {
            start,
            t_end,
            emit,
            no_integrals,
            ..
        } => {
            let m = method(start.tol, start.dt);
            put("command", json!("simulate"));
            put("x0", json!(start.x0));
            put("t_end", json!(t_end));
            put("method", analysis::method_json(&m));
            put("emit", json!(emit.as_ref().map(|p| p.display().to_string())));
            put("integrals", json!(!no_integrals));
            let functions = if *no_integrals {
                Vec::new()
            } else {
                monitored_integrals(&field)?
            };
            sections.push(analysis::simulate(
                &field,
                &start.x0,
                *t_end,
                m,
                &functions,
                emit.as_deref(),
            )?);
        }
        Command::Lyapunov {
            start,
            t_end,
            renorm_dt,
            ..
        } => {
            let m = method(start.tol, start.dt);
            put("command", json!("lyapunov"));
            put("x0", json!(start.x0));
            put("t_end", json!(t_end));
            put("renorm_dt", json!(renorm_dt));
            put("method", analysis::method_json(&m));
            sections.push(analysis::lyapunov(&field, &start.x0, *t_end, *renorm_dt, m)?);
        }
        Command::Analyze {
            search,
            exp,
            formal,
            x0,
            t_end,
            tol,
            dt,
            emit,
            ..
        } => {
            let m = method(*tol, *dt);
            put("command", json!("analyze"));
            put("degree", json!(search.degree));
            put("lattice_bound", json!(search.bound()));
            put("g_degree", json!(exp.g_degree));
            put("s_bound", json!(exp.s_bound));
            put("order", json!(formal.order));
            put("margin", json!(formal.margin));
            put("promote", json!(formal.promote));
            put("x0", json!(x0));
            put("t_end", json!(t_end));
            put("method", analysis::method_json(&m));
            put("emit", json!(emit.as_ref().map(|p| p.display().to_string())));
            let (d, (e, f)) = rayon::join(
                || analysis::darboux(&field, search.degree, search.bound()),
                || {
                    rayon::join(
                        || analysis::exp_factors(&field, exp.g_degree, exp.s_bound),
                        || analysis::formal(&field, formal.order, formal.margin, formal.promote.as_deref()),
                    )
                },
            );
            let (d, e, f) = (d?, e?, f?);
            let h = analysis::integrals(&field, &d.certs, &e.efacts, search.degree, search.bound())?;
            let functions = h.functions.clone();
            sections.extend([d.section, e.section, h.section, f]);
            if let Some(x0) = x0 {
                sections.push(analysis::simulate(&field, x0, *t_end, m, &functions, emit.as_deref())?);
            }
        }
    }
    Ok((Value::Object(config), sections))
}

fn render(format: Format, config: Value, sections: Vec<Section>) -> String {
    match format {
        Format::Json => {
            let mut report = Map::new();
            report.insert(
                "tool".into(),
                json!({"name": "darboux-lab", "version": env!("CARGO_PKG_VERSION")}),
            );
            report.insert("config".into(), config);
            for s in sections {
                report.insert(s.key.into(), s.json);
            }
            let mut out = serde_json::to_string_pretty(&Value::Object(report)).expect("values serialize");
            out.push('\n');
            out
        }
        Format::Text => {
            let mut out = String::new();
            for s in sections {
                out.push_str(&format!("[{}]\n", s.key));
                for line in s.text {
                    out.push_str(&line);
                    out.push('\n');
                }
                out.push('\n');
            }
            out
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((config, sections)) => {
            print!("{}", render(cli.format, config, sections));
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("internal error: certificate failed re-verification: {msg}");
            ExitCode::from(1)
        }
    }
}
