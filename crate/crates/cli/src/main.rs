//! `freegeo`: command-line front end for the G map, its power and Lyapunov
//! variants, and the random-matrix verifier.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use freegeo::io::{self, SpecFile};
use freegeo::xform::transform_table;
use freegeo::{
    gmap, gmap_boxplus_power, gmap_boxtimes_power, ks_report, lyapunov_distribution,
    lyapunov_empirical, simulate, Error, EvalConfig64, Image64, Measure64, Method, SimConfig,
    SpectrumSample, DEFAULT_FAMILY_POINTS,
};

const SEED_ENV: &str = "FREEGEO_SEED";
const TRANSFORM_DUMP_ROWS: usize = 256;

#[derive(Parser, Debug)]
#[command(
    name = "freegeo",
    version,
    about = "Limit laws of geometric means of free random variables"
)]
struct Cli {
    /// Points in the quantile table of F.
    #[arg(long, global = true, default_value_t = 2048)]
    grid_points: usize,

    /// Root-finding tolerance (relative bracket width).
    #[arg(long, global = true, default_value_t = 1e-13)]
    tol: f64,

    /// Density nodes used to tabulate a named family.
    #[arg(long, global = true, default_value_t = DEFAULT_FAMILY_POINTS)]
    family_points: usize,

    /// Output file; the metadata goes to `<output>.meta.json` in CSV mode.
    /// Without it the table is written to standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PowerOp {
    Boxplus,
    Boxtimes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    #[value(name = "qr_log", alias = "qr-log")]
    QrLog,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::QrLog => Method::QrLog,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
struct MeasureArgs {
    /// Named family: point_mass, projection, marchenko_pastur, quarter_circle_squared.
    #[arg(long)]
    family: Option<String>,

    /// Family parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,

    /// Measure spec file.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Limit law ν = G(μ).
    Gmap {
        #[command(flatten)]
        measure: MeasureArgs,
        /// Also write rows (z, χ(z), S(z)) to this CSV.
        #[arg(long, value_name = "PATH")]
        dump_transform: Option<PathBuf>,
    },
    /// G of a free additive or multiplicative convolution power.
    Power {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, value_enum)]
        op: PowerOp,
        #[arg(long)]
        n: usize,
    },
    /// Law of the Lyapunov exponents, ln of ν.
    Lyapunov {
        #[command(flatten)]
        measure: MeasureArgs,
    },
    /// Monte Carlo sample of the spectrum of B_n^{1/2n}.
    Simulate {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::QrLog)]
        method: MethodArg,
        /// Overrides FREEGEO_SEED; the default seed is 0.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Kolmogorov–Smirnov comparison of a sample CSV with a predicted law.
    Compare {
        /// Sample CSV (first column, header row).
        #[arg(long)]
        sample: PathBuf,
        /// Predicted law as a table written by `gmap`, `power` or `lyapunov`
        /// (atoms are read from its `.meta.json` sibling when present).
        #[arg(long, conflicts_with_all = ["family", "spec"])]
        predicted: Option<PathBuf>,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Compare ln of the positive samples with the Lyapunov law instead.
        #[arg(long)]
        log: bool,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("freegeo: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}

fn eval_config(cli: &Cli) -> Result<EvalConfig64, Failure> {
    let cfg = EvalConfig64 {
        grid_size: cli.grid_points,
        root_tol: cli.tol,
        ..EvalConfig64::default()
    };
    cfg.check()?;
    Ok(cfg)
}

/// Resolves flags and spec file into a measure plus a JSON description of the
/// input. Flags override the file, with a warning on conflicts.
fn load_measure(cli: &Cli, args: &MeasureArgs) -> Result<(Measure64, Value), Failure> {
    let mut spec = match &args.spec {
        Some(path) => SpecFile::read(path).map_err(|e| match e {
            Error::Io(err) => usage(format!("cannot read spec {}: {err}", path.display())),
            other => other.into(),
        })?,
        None => SpecFile::default(),
    };
    if let Some(name) = &args.family {
        if let Some(old) = &spec.family {
            if old != name {
                eprintln!(
                    "freegeo: warning: --family {name} overrides family = {old} from the spec file"
                );
            }
        }
        if !spec.atoms.is_empty() || spec.density_csv.is_some() {
            eprintln!(
                "freegeo: warning: --family overrides the tabulated measure in the spec file"
            );
            spec.atoms.clear();
            spec.density_csv = None;
        }
        spec.family = Some(name.clone());
    }
    for kv in &args.params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--param expects key=value, got {kv:?}")))?;
        let k = k.trim().to_string();
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| usage(format!("--param {k}: not a number: {v:?}")))?;
        if let Some(slot) = spec.params.iter_mut().find(|(key, _)| *key == k) {
            if slot.1 != v {
                eprintln!(
                    "freegeo: warning: --param {k}={v} overrides {k} = {} from the spec file",
                    slot.1
                );
            }
            slot.1 = v;
        } else {
            spec.params.push((k, v));
        }
    }
    if spec.family.is_none() && spec.atoms.is_empty() && spec.density_csv.is_none() {
        return Err(usage("no measure given: use --family/--param or --spec"));
    }
    let mu = spec.to_measure(cli.family_points)?;
    let described = match &spec.family {
        Some(name) => json!({
            "family": name,
            "params": spec.params.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
        }),
        None => json!({
            "spec": args.spec.as_ref().map(|p| p.display().to_string()),
        }),
    };
    Ok((mu, described))
}

fn config_json(cfg: &EvalConfig64) -> Value {
    json!({
        "grid_points": cfg.grid_size,
        "tol": cfg.root_tol,
        "quad_points": cfg.quad_points,
        "eps_boundary": cfg.eps_boundary,
    })
}

fn image_meta(command: &str, input: Value, cfg: &EvalConfig64, img: &Image64) -> Value {
    let m = &img.measure;
    let r = &img.report;
    let mass_error = (r.mass - 1.0).abs();
    json!({
        "command": command,
        "input": input,
        "config": config_json(cfg),
        "atoms": m.atoms().iter().map(|a| [a.location, a.mass]).collect::<Vec<_>>(),
        "atom_at_zero": r.atom_at_zero,
        "support": [r.support.0, r.support.1],
        "mass": r.mass,
        "mass_check": { "error": mass_error, "ok": mass_error <= 1e-6 },
        "convention": r.convention,
        "truncation": r.truncation.map(|t| json!({ "lower": t.lower, "tail_mass": t.tail_mass })),
        "notes": r.notes,
    })
}

fn meta_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Writes a table and its metadata in the selected format.
fn emit(cli: &Cli, csv: String, columns: Value, meta: Value) -> Result<(), Failure> {
    match cli.format {
        Format::Csv => match &cli.output {
            Some(path) => {
                write_file(path, &csv)?;
                write_file(&meta_path(path), &to_json_text(&meta))
            }
            None => {
                print!("{csv}");
                Ok(())
            }
        },
        Format::Json => {
            let mut doc = meta;
            doc["data"] = columns;
            let text = to_json_text(&doc);
            match &cli.output {
                Some(path) => write_file(path, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn measure_columns(m: &Measure64) -> Value {
    let rows = io::measure_rows(m);
    json!({
        "t": rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
        "density": rows.iter().map(|r| r[1]).collect::<Vec<_>>(),
        "cdf": rows.iter().map(|r| r[2]).collect::<Vec<_>>(),
    })
}

fn emit_image(
    cli: &Cli,
    command: &str,
    input: Value,
    cfg: &EvalConfig64,
    img: &Image64,
) -> Result<(), Failure> {
    emit(
        cli,
        io::measure_csv(&img.measure),
        measure_columns(&img.measure),
        image_meta(command, input, cfg, img),
    )
}

fn resolve_seed(flag: Option<u64>) -> Result<(u64, &'static str), Failure> {
    if let Some(s) = flag {
        return Ok((s, "flag"));
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(|s| (s, "env"))
            .map_err(|_| usage(format!("{SEED_ENV} must be a decimal u64, got {v:?}"))),
        Err(_) => Ok((0, "default")),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = eval_config(cli)?;
    match &cli.command {
        Command::Gmap {
            measure,
            dump_transform,
        } => {
            let (mu, input) = load_measure(cli, measure)?;
            let img = gmap(&mu, &cfg)?;
            if let Some(path) = dump_transform {
                let rows = transform_table(&mu, TRANSFORM_DUMP_ROWS, &cfg)?;
                let mut csv = String::from("z,chi,s\n");
                for (z, x, s) in rows {
                    csv.push_str(&format!("{z},{x},{s}\n"));
                }
                write_file(path, &csv)?;
            }
            emit_image(cli, "gmap", input, &cfg, &img)
        }
        Command::Power { measure, op, n } => {
            let (mu, mut input) = load_measure(cli, measure)?;
            if *n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            let img = match op {
                PowerOp::Boxplus => gmap_boxplus_power(&mu, *n, &cfg)?,
                PowerOp::Boxtimes => gmap_boxtimes_power(&mu, *n, &cfg)?,
            };
            input["power"] = json!({
                "op": match op { PowerOp::Boxplus => "boxplus", PowerOp::Boxtimes => "boxtimes" },
                "n": n,
            });
            emit_image(cli, "power", input, &cfg, &img)
        }
        Command::Lyapunov { measure } => {
            let (mu, input) = load_measure(cli, measure)?;
            let img = lyapunov_distribution(&mu, &cfg)?;
            emit_image(cli, "lyapunov", input, &cfg, &img)
        }
        Command::Simulate {
            measure,
            dim,
            n,
            trials,
            method,
            seed,
        } => {
            let (mu, input) = load_measure(cli, measure)?;
            let (seed, seed_source) = resolve_seed(*seed)?;
            let sim = SimConfig {
                dim: *dim,
                n_factors: *n,
                trials: *trials,
                seed,
                method: (*method).into(),
            };
            let sample = simulate(&mu, &sim)?;
            let meta = json!({
                "command": "simulate",
                "input": input,
                "simulation": sim,
                "seed_source": seed_source,
                "samples": sample.len(),
                "zeros": sample.zeros(),
            });
            emit(
                cli,
                io::samples_csv("eigenvalue", &sample.values),
                json!({ "eigenvalue": sample.values }),
                meta,
            )
        }
        Command::Compare {
            sample,
            predicted,
            measure,
            log,
        } => {
            let values = io::read_samples_csv(sample).map_err(|e| match e {
                Error::Io(err) => usage(format!("cannot read {}: {err}", sample.display())),
                other => other.into(),
            })?;
            let mut s = SpectrumSample::from_values(values);
            let mut dropped = 0;
            if *log {
                let (l, d) = lyapunov_empirical(&s);
                s = l;
                dropped = d;
            }
            let (law, source) = match predicted {
                Some(path) => (
                    read_table(path)?,
                    json!({ "table": path.display().to_string() }),
                ),
                None => {
                    let (mu, input) = load_measure(cli, measure)?;
                    let img = if *log {
                        lyapunov_distribution(&mu, &cfg)?
                    } else {
                        gmap(&mu, &cfg)?
                    };
                    (img.measure, input)
                }
            };
            let report = ks_report(&s, &law)?;
            eprintln!("ks_distance {}", report.ks_distance);
            let meta = json!({
                "command": "compare",
                "sample": sample.display().to_string(),
                "predicted": source,
                "log": log,
                "samples": s.len(),
                "dropped_zeros": dropped,
                "ks_distance": report.ks_distance,
            });
            let columns = json!({
                "x": report.cdf_table.iter().map(|r| r.x).collect::<Vec<_>>(),
                "ecdf": report.cdf_table.iter().map(|r| r.ecdf).collect::<Vec<_>>(),
                "cdf": report.cdf_table.iter().map(|r| r.cdf).collect::<Vec<_>>(),
            });
            emit(cli, io::gof_csv(&report), columns, meta)
        }
    }
}

/// A `t,density,cdf` table with atoms from its metadata sibling, if any.
fn read_table(path: &Path) -> Result<Measure64, Failure> {
    let meta = meta_path(path);
    let atoms: Vec<(f64, f64)> = if meta.exists() {
        let text = fs::read_to_string(&meta)
            .map_err(|e| usage(format!("cannot read {}: {e}", meta.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| usage(format!("bad metadata {}: {e}", meta.display())))?;
        v["atoms"]
            .as_array()
            .map(|a| {
                a.iter()
                    .filter_map(|p| Some((p[0].as_f64()?, p[1].as_f64()?)))
                    .collect()
            })
            .unwrap_or_default()
    } else {
        Vec::new()
    };
    io::read_measure_csv(path, &atoms).map_err(|e| match e {
        Error::Io(err) => usage(format!("cannot read {}: {err}", path.display())),
        other => other.into(),
    })
}
