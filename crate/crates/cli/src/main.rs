use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use krpoly::census::{registry_report, run_census, SamplerParams};
use krpoly::combinatorics::{combinatorial_type, is_similar};
use krpoly::exact_math::format_rational;
use krpoly::kr_norm::{gauge_norm, optimal_plan, transport_norm, MassVector};
use krpoly::metric_space::{
    euclidean_type_test, extremality_metric_test, parse_distance_matrix, parse_matrix_rows, validate_rows,
    DistanceMatrix, SamplerMode,
};
use krpoly::polytope::FundamentalPolytope;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "krpoly", version, about = "Fundamental polytopes of finite metric spaces")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms and the extremality characterization.
    Validate { file: PathBuf },
    /// Build the fundamental polytope and print the requested representations.
    Polytope {
        file: PathBuf,
        #[command(flatten)]
        reps: Representations,
    },
    /// Canonical combinatorial type of the fundamental polytope.
    Canon { file: PathBuf },
    /// Whether two metrics have combinatorially equivalent polytopes.
    Similar { first: PathBuf, second: PathBuf },
    /// Transport norm of a zero-sum vector, cross-checked against the polytope gauge.
    Norm {
        file: PathBuf,
        /// Coordinates, as separate arguments or one quoted string. Everything
        /// after the file is read as coordinates, so put options first.
        #[arg(required = true, allow_hyphen_values = true, num_args = 1..)]
        vector: Vec<String>,
    },
    /// Like `norm`, and also print an optimal transport plan.
    Plan {
        file: PathBuf,
        #[arg(required = true, allow_hyphen_values = true, num_args = 1..)]
        vector: Vec<String>,
    },
    /// Sample random metrics and tally combinatorial types.
    Census(CensusArgs),
    /// Whether the metric embeds isometrically in Euclidean space.
    EmbedCheck { file: PathBuf },
    /// Print the unit metric on n points.
    Root { n: usize },
}

#[derive(Args)]
struct Representations {
    /// Everything: the input matrix plus all representations and the type.
    /// The output can be fed back in as a matrix file.
    #[arg(long)]
    frep: bool,
    #[arg(long)]
    vrep: bool,
    #[arg(long)]
    hrep: bool,
    #[arg(long)]
    lattice: bool,
    #[arg(long)]
    fvector: bool,
}

#[derive(Args)]
struct CensusArgs {
    n: usize,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "closure")]
    mode: SamplerMode,
    /// Largest denominator of sampled distances.
    #[arg(long, default_value_t = 100)]
    bound: u64,
    /// Resample until every triangle inequality is strict.
    #[arg(long)]
    strict: bool,
    /// Directory for registry.jsonl and snapshot.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path) -> Result<DistanceMatrix> {
    parse_distance_matrix(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_metric(path: &Path) -> Result<DistanceMatrix> {
    let d = load(path)?;
    d.ensure_metric().with_context(|| format!("in {}", path.display()))?;
    Ok(d)
}

fn rationals(values: &[krpoly::exact_math::Rational]) -> Value {
    values.iter().map(format_rational).collect()
}

fn validate(file: &Path) -> Result<Value> {
    let rows = parse_matrix_rows(&read(file)?).with_context(|| format!("in {}", file.display()))?;
    let report = validate_rows(&rows);
    // The labeled points only exist for symmetric, positive off-diagonal input;
    // anything else fails the test outright.
    let extremal = match DistanceMatrix::from_rows(rows) {
        Ok(d) if d.ensure_positive().is_ok() => extremality_metric_test(&d)?,
        _ => false,
    };
    if extremal != report.is_valid {
        bail!("internal inconsistency: axioms {} but extremality {extremal}", report.is_valid);
    }
    Ok(json!({
        "is_metric_axioms": report.is_valid,
        "is_metric_extremality": extremal,
        "violations": report.violations,
    }))
}

fn polytope(file: &Path, reps: &Representations) -> Result<Value> {
    let d = load(file)?;
    if let Err(e) = d.ensure_metric() {
        eprintln!("warning: {e}; the polytope is still defined");
    }
    let p = FundamentalPolytope::new(&d)?;
    let all = reps.frep || !(reps.vrep || reps.hrep || reps.lattice || reps.fvector);
    let mut out = Map::new();
    if reps.frep {
        out.insert("n".into(), json!(d.n()));
        out.insert("d".into(), d.to_json()["d"].clone());
        let t = combinatorial_type(&d)?;
        out.insert("certificate".into(), json!(t.certificate));
        out.insert("digest".into(), json!(t.digest));
    }
    if all || reps.vrep {
        let points: Vec<Value> = p
            .vrep
            .points
            .iter()
            .zip(&p.vrep.is_vertex)
            .map(|(q, &v)| json!({"from": q.from, "to": q.to, "coords": rationals(&q.coords), "vertex": v}))
            .collect();
        out.insert("points".into(), Value::Array(points));
    }
    if all || reps.hrep {
        let facets: Vec<Value> = p.hrep.facets.iter().map(|f| rationals(&f.normal)).collect();
        out.insert("facets".into(), Value::Array(facets));
        out.insert("rhs".into(), json!("1"));
    }
    if all || reps.lattice {
        let lattice = p.face_lattice()?;
        out.insert("lattice".into(), serde_json::to_value(&lattice)?);
    }
    if all || reps.fvector {
        out.insert("f_vector".into(), json!(p.f_vector()?.to_string()));
    }
    Ok(Value::Object(out))
}

fn canon(file: &Path) -> Result<Value> {
    let d = load_metric(file)?;
    let p = FundamentalPolytope::new(&d)?;
    let t = combinatorial_type(&d)?;
    Ok(json!({
        "digest": t.digest,
        "certificate": t.certificate,
        "automorphism_order": t.automorphism_order,
        "num_vertices": t.num_vertices,
        "num_facets": t.num_facets,
        "f_vector": p.f_vector()?.to_string(),
    }))
}

fn norm(file: &Path, vector: &[String], with_plan: bool) -> Result<Value> {
    let d = load_metric(file)?;
    let v = MassVector::parse(&vector.join(" "))?;
    let lp = transport_norm(&d, &v)?;
    let gauge = gauge_norm(&FundamentalPolytope::new(&d)?.hrep, &v)?;
    let mut out = json!({
        "lp_value": format_rational(&lp),
        "gauge_value": format_rational(&gauge),
        "equal": lp == gauge,
    });
    if with_plan {
        let plan = optimal_plan(&d, &v)?;
        out["plan"] = plan.psi.iter().map(|row| rationals(row)).collect();
    }
    Ok(out)
}

fn census(args: &CensusArgs, format: Format) -> Result<Value> {
    let params = SamplerParams { mode: args.mode, denominator_bound: args.bound, strict: args.strict };
    let workers = args.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |w| w.get()));
    let registry = run_census(args.n, args.samples, args.seed, &params, workers)?;
    if let Some(dir) = &args.out {
        registry.write_files(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    }
    let report = registry_report(&registry);
    if format == Format::Text {
        return Ok(Value::String(report.to_text()));
    }
    Ok(serde_json::to_value(report)?)
}

fn run(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Validate { file } => validate(file),
        Command::Polytope { file, reps } => polytope(file, reps),
        Command::Canon { file } => canon(file),
        Command::Similar { first, second } => {
            Ok(json!({"similar": is_similar(&load_metric(first)?, &load_metric(second)?)?}))
        }
        Command::Norm { file, vector } => norm(file, vector, false),
        Command::Plan { file, vector } => norm(file, vector, true),
        Command::Census(args) => census(args, cli.format),
        Command::EmbedCheck { file } => Ok(json!({"euclidean": euclidean_type_test(&load_metric(file)?)?})),
        Command::Root { n } => {
            let d = DistanceMatrix::unit(*n)?;
            if cli.format == Format::Text {
                return Ok(Value::String(d.to_text()));
            }
            Ok(d.to_json())
        }
    }
}

fn scalar_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(value: &Value, format: Format) -> String {
    match (format, value) {
        (Format::Json, _) => serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n",
        (Format::Text, Value::String(s)) if s.ends_with('\n') => s.clone(),
        (Format::Text, Value::Object(map)) if map.len() == 1 => {
            scalar_text(map.values().next().unwrap()) + "\n"
        }
        (Format::Text, Value::Object(map)) => {
            map.iter().map(|(k, v)| format!("{k}: {}\n", scalar_text(v))).collect()
        }
        (Format::Text, other) => scalar_text(other) + "\n",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(value) => {
            print!("{}", render(&value, cli.format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
