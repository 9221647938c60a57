//! Command-line front end: channel loading, command dispatch and the report envelope.
//!
//! Exit codes: 0 success, 1 input error, 2 non-convergence (a partial report is
//! still written).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::channels::{catalog, channel_from_json_str, parse_json_text, parse_matrix, tensor_channels, Channel, CATALOG_NAMES};
use crate::entropyopt::{
    check_optimal_average, holevo_capacity, min_output_entropy, omega_consistency, ConstraintSet, OptimizerConfig,
};
use crate::error::{Error, Result};
use crate::optsets::{
    coincidence_test, minimal_support_projector, sample_optimal_set_c, sample_optimal_set_e_with, OptimalSetSample,
};
use crate::product::{
    additivity_capacity, additivity_min_entropy, assumption_screen, hereditary_check, hereditary_json,
    AssumptionDefects, CapacityOracle, EntropyOracle, MembershipOracle,
};
use crate::qcore::{set_log_base, DensityMatrix, LogBase};
use crate::random::{random_density, rng_indexed};
use crate::report::{matrix_json, number_json};

pub const CONFIG_ENV: &str = "CHANNEL_OPTIMA_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "channel-optima", version, about = "Entropy and capacity analysis of quantum channels")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Random restarts per pure-state search.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Objective tolerance of the optimizers.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "log-base", global = true, value_enum, default_value = "2")]
    pub log_base: LogBaseArg,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also emit a TSV table of (quantity, value, residual) rows.
    #[arg(long, global = true)]
    pub table: bool,
    /// Optimizer config JSON (overrides the file named by CHANNEL_OPTIMA_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogBaseArg {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
}

impl From<LogBaseArg> for LogBase {
    fn from(b: LogBaseArg) -> Self {
        match b {
            LogBaseArg::Two => LogBase::Two,
            LogBaseArg::E => LogBase::E,
        }
    }
}

/// Channel sources: files, inline descriptors `name:key=value,...`, or `--catalog`.
#[derive(Args, Debug, Clone)]
pub struct ChannelArgs {
    /// Channel JSON files or inline catalog specs such as `depolarizing:d=2,p=0.5`.
    pub channels: Vec<String>,
    #[arg(long)]
    pub catalog: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long = "d-out")]
    pub d_out: Option<usize>,
    #[arg(long, conflicts_with = "gamma")]
    pub p: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetKindArg {
    #[value(name = "C", alias = "c")]
    C,
    #[value(name = "E", alias = "e")]
    E,
    #[value(name = "both")]
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdditivityArg {
    #[value(name = "min-entropy", alias = "minent")]
    MinEntropy,
    #[value(name = "capacity")]
    Capacity,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Minimal output entropy.
    Minent(ChannelArgs),
    /// Holevo capacity, optionally over the convex hull of constraint states.
    Capacity {
        #[command(flatten)]
        channel: ChannelArgs,
        /// JSON file `{"generators": [matrix, ...]}` or `"full"`.
        #[arg(long)]
        constraint: Option<PathBuf>,
    },
    /// Samples of the optimal sets A_E and A_C.
    Optsets {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, value_enum, default_value = "both")]
        kind: SetKindArg,
    },
    /// Tests whether A_E and A_C coincide.
    Coincidence(ChannelArgs),
    /// Additivity of H_min or of the capacity for a channel pair (one channel is paired with itself).
    Additivity {
        #[arg(value_enum)]
        kind: AdditivityArg,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Hereditary property of a product channel's optimal set.
    Hereditary {
        #[arg(long, value_enum)]
        kind: SetKindArg,
        #[arg(long)]
        strong: bool,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Screens the χ-function inequalities over random product-space states.
    Assumptions {
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[command(flatten)]
        channel: ChannelArgs,
    },
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// A table row: quantity, value and optional residual.
type Row = (String, f64, Option<f64>);

struct Outcome {
    report: Value,
    rows: Vec<Row>,
    converged: bool,
}

fn run(cli: &Cli) -> Result<i32> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Error::ParameterOutOfRange {
                name: "threads".into(),
                value: 0.0,
            });
        }
        // Fails only if a pool already exists (repeated in-process runs); the old pool is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = load_config(&cli.global)?;
    let base: LogBase = cli.global.log_base.into();
    set_log_base(base);

    let start = Instant::now();
    let (name, inputs, result) = dispatch(&cli.command, &cfg)?;
    let outcome = match result {
        Ok(o) => o,
        Err(Error::NotConverged(residual)) => Outcome {
            report: json!({ "error": "optimizer did not converge", "residual": number_json(residual) }),
            rows: vec![("residual".into(), residual, None)],
            converged: false,
        },
        Err(e) => return Err(e),
    };
    let envelope = envelope(name, inputs, &cfg, base, outcome.report, start.elapsed().as_secs_f64());
    write_outputs(&cli.global, &envelope, &outcome.rows)?;
    Ok(if outcome.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn read_config(path: &Path) -> Result<OptimizerConfig> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let value = parse_json_text(&text, &label)?;
    serde_json::from_value(value).map_err(|e| Error::Format {
        path: label,
        message: e.to_string(),
    })
}

/// Defaults, then the env config file, then `--config`, then individual flags.
pub fn load_config(global: &GlobalArgs) -> Result<OptimizerConfig> {
    let mut cfg = OptimizerConfig::default();
    if let Some(path) = std::env::var_os(CONFIG_ENV).filter(|p| !p.is_empty()) {
        cfg = read_config(Path::new(&path))?;
    }
    if let Some(path) = &global.config {
        cfg = read_config(path)?;
    }
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(r) = global.restarts {
        cfg.restarts = r;
    }
    if let Some(t) = global.tol {
        cfg.obj_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_inline(source: &str) -> Result<Option<(Channel, Value)>> {
    let (name, rest) = source.split_once(':').unwrap_or((source, ""));
    if !CATALOG_NAMES.contains(&name) {
        return Ok(None);
    }
    let mut params = BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("malformed parameter `{part}` in `{source}`")))?;
        let x: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("parameter `{k}` in `{source}` is not a number")))?;
        params.insert(k.trim().to_string(), x);
    }
    let ch = catalog(name, &params)?;
    Ok(Some((ch, json!({ "catalog": name, "params": params }))))
}

impl ChannelArgs {
    /// Exactly `count` channels; a single source is reused for every slot.
    fn resolve(&self, count: usize) -> Result<(Vec<Channel>, Value)> {
        let mut chans = Vec::new();
        let mut inputs = Vec::new();
        if let Some(name) = &self.catalog {
            let mut params = BTreeMap::new();
            let pairs = [
                ("d", self.dim.map(|v| v as f64)),
                ("d_out", self.d_out.map(|v| v as f64)),
                ("p", self.p),
                ("gamma", self.gamma),
            ];
            for (k, v) in pairs {
                if let Some(v) = v {
                    params.insert(k.to_string(), v);
                }
            }
            chans.push(catalog(name, &params)?);
            inputs.push(json!({ "catalog": name, "params": params }));
        }
        for source in &self.channels {
            let path = Path::new(source);
            if path.is_file() {
                let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
                chans.push(channel_from_json_str(&text, source)?);
                inputs.push(json!({ "file": source }));
            } else if let Some((ch, desc)) = parse_inline(source)? {
                chans.push(ch);
                inputs.push(desc);
            } else {
                return Err(Error::Format {
                    path: source.clone(),
                    message: "no such file and not a catalog descriptor".into(),
                });
            }
        }
        match chans.len() {
            0 => Err(Error::InvalidInput("no channel given (use a file, an inline descriptor or --catalog)".into())),
            1 if count > 1 => {
                let ch = chans.remove(0);
                let desc = inputs.remove(0);
                Ok((vec![ch; count], Value::Array(vec![desc; count])))
            }
            n if n == count => Ok((chans, Value::Array(inputs))),
            n => Err(Error::InvalidInput(format!("expected {count} channel(s), got {n}"))),
        }
    }
}

fn load_constraint(path: &Path) -> Result<ConstraintSet> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let doc = parse_json_text(&text, &label)?;
    if doc.as_str() == Some("full") {
        return Ok(ConstraintSet::Full);
    }
    let gens = doc
        .get("generators")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format {
            path: format!("{label}: field `generators`"),
            message: "expected an array of density matrices or the string \"full\"".into(),
        })?;
    let states = gens
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let field = format!("generators[{i}]");
            let m = parse_matrix(g, &label, &field)?;
            DensityMatrix::new(m).map_err(|e| Error::Format {
                path: format!("{label}: field `{field}`"),
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ConstraintSet::generators(states)
}

type Dispatched = (&'static str, Value, Result<Outcome>);

fn dispatch(command: &Command, cfg: &OptimizerConfig) -> Result<Dispatched> {
    Ok(match command {
        Command::Minent(args) => {
            let (chans, inputs) = args.resolve(1)?;
            ("minent", inputs, cmd_minent(&chans[0], cfg))
        }
        Command::Capacity { channel, constraint } => {
            let (chans, inputs) = channel.resolve(1)?;
            let constraint = match constraint {
                Some(p) => load_constraint(p)?,
                None => ConstraintSet::Full,
            };
            ("capacity", inputs, cmd_capacity(&chans[0], &constraint, cfg))
        }
        Command::Optsets { channel, kind } => {
            let (chans, inputs) = channel.resolve(1)?;
            ("optsets", inputs, cmd_optsets(&chans[0], *kind, cfg))
        }
        Command::Coincidence(args) => {
            let (chans, inputs) = args.resolve(1)?;
            ("coincidence", inputs, cmd_coincidence(&chans[0], cfg))
        }
        Command::Additivity { kind, channel } => {
            let (chans, inputs) = channel.resolve(2)?;
            ("additivity", inputs, cmd_additivity(&chans[0], &chans[1], *kind, cfg))
        }
        Command::Hereditary { kind, strong, channel } => {
            let (chans, inputs) = channel.resolve(2)?;
            if *kind == SetKindArg::Both {
                return Err(Error::InvalidInput("hereditary needs --kind C or --kind E".into()));
            }
            ("hereditary", inputs, cmd_hereditary(&chans[0], &chans[1], *kind, *strong, cfg))
        }
        Command::Assumptions { samples, channel } => {
            let (chans, inputs) = channel.resolve(2)?;
            ("assumptions", inputs, cmd_assumptions(&chans[0], &chans[1], *samples, cfg))
        }
    })
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

fn cmd_minent(ch: &Channel, cfg: &OptimizerConfig) -> Result<Outcome> {
    let m = min_output_entropy(ch, cfg)?;
    Ok(Outcome {
        rows: vec![("h_min".into(), m.value, Some(max_of(&m.residuals)))],
        converged: m.converged,
        report: m.to_json(),
    })
}

fn cmd_capacity(ch: &Channel, constraint: &ConstraintSet, cfg: &OptimizerConfig) -> Result<Outcome> {
    let c = holevo_capacity(ch, constraint, cfg)?;
    let consistency = omega_consistency(ch, &c);
    let mut report = c.to_json();
    report["omega_consistency"] = number_json(consistency);
    let residual = c.max_distance_residual.finite();
    let mut rows = vec![
        ("capacity".to_string(), c.value, residual),
        ("omega_consistency".to_string(), consistency, None),
    ];
    if constraint.is_full() && c.converged {
        let check = check_optimal_average(ch, &c.ensemble.average(), cfg)?;
        rows.push(("optimal_average_chi".into(), check.chi, check.residual.finite()));
        report["optimal_average"] = check.to_json();
    }
    Ok(Outcome {
        report,
        rows,
        converged: c.converged,
    })
}

fn sample_rows(prefix: &str, s: &OptimalSetSample) -> Vec<Row> {
    vec![
        (format!("{prefix}.level"), s.level, None),
        (format!("{prefix}.states"), s.states.len() as f64, Some(max_of(&s.residuals))),
        (format!("{prefix}.support_rank"), s.support_projector.rank() as f64, None),
    ]
}

fn cmd_optsets(ch: &Channel, kind: SetKindArg, cfg: &OptimizerConfig) -> Result<Outcome> {
    let mut report = json!({});
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    let mut converged = true;
    if kind != SetKindArg::C {
        let m = min_output_entropy(ch, cfg)?;
        let s = sample_optimal_set_e_with(ch, &m, cfg)?;
        converged &= m.converged;
        rows.extend(sample_rows("E", &s));
        report["sample_e"] = s.to_json();
        samples.push(s);
    }
    if kind != SetKindArg::E {
        let c = holevo_capacity(ch, &ConstraintSet::Full, cfg)?;
        report["capacity"] = number_json(c.value);
        if c.converged {
            let s = sample_optimal_set_c(ch, &c, cfg)?;
            rows.extend(sample_rows("C", &s));
            report["sample_c"] = s.to_json();
            samples.push(s);
        } else {
            converged = false;
            report["sample_c"] = Value::Null;
            report["error"] = json!("capacity did not converge; A_C not sampled");
        }
    }
    if !samples.is_empty() {
        let refs: Vec<&OptimalSetSample> = samples.iter().collect();
        let p = minimal_support_projector(&refs)?;
        rows.push(("support_rank".into(), p.rank() as f64, None));
        report["minimal_support_projector"] = matrix_json(p.matrix());
    }
    Ok(Outcome {
        report,
        rows,
        converged,
    })
}

fn cmd_coincidence(ch: &Channel, cfg: &OptimizerConfig) -> Result<Outcome> {
    let m = min_output_entropy(ch, cfg)?;
    let c = holevo_capacity(ch, &ConstraintSet::Full, cfg)?;
    if !c.converged {
        return Err(Error::NotConverged(c.max_distance_residual.finite().unwrap_or(f64::INFINITY)));
    }
    let se = sample_optimal_set_e_with(ch, &m, cfg)?;
    let sc = sample_optimal_set_c(ch, &c, cfg)?;
    let r = coincidence_test(ch, &c, &m, &se, &sc, cfg)?;
    let mut report = r.to_json();
    report["condition"] = json!("adjoint(-log Omega) P = lambda P on the minimal support P");
    report["unital_condition"] = json!("adjoint(-log Omega) = lambda I");
    report["capacity"] = number_json(c.value);
    report["h_min"] = number_json(m.value);
    Ok(Outcome {
        rows: vec![
            ("lambda".into(), r.lambda, Some(r.condition_residual)),
            ("lambda_expected".into(), r.lambda_expected, Some(r.unital_condition_residual)),
            ("hull_disagreement".into(), r.hull_disagreement, None),
            ("coincide".into(), if r.coincide { 1.0 } else { 0.0 }, None),
        ],
        converged: m.converged,
        report,
    })
}

fn cmd_additivity(phi: &Channel, psi: &Channel, kind: AdditivityArg, cfg: &OptimizerConfig) -> Result<Outcome> {
    let r = match kind {
        AdditivityArg::MinEntropy => additivity_min_entropy(phi, psi, cfg)?,
        AdditivityArg::Capacity => additivity_capacity(phi, psi, cfg)?,
    };
    let mut rows = vec![
        ("single_left".to_string(), r.single_values.0, None),
        ("single_right".to_string(), r.single_values.1, None),
        ("product".to_string(), r.product_value, None),
        ("gap".to_string(), r.gap, None),
    ];
    if let Some(res) = r.omega_product_residual {
        rows.push(("omega_product_residual".into(), res, None));
    }
    Ok(Outcome {
        rows,
        converged: r.converged,
        report: r.to_json(),
    })
}

fn cmd_hereditary(phi: &Channel, psi: &Channel, kind: SetKindArg, strong: bool, cfg: &OptimizerConfig) -> Result<Outcome> {
    let dims = (phi.dim_in(), psi.dim_in());
    let product = {
        if dims.0 * dims.1 > cfg.product_dim_cap {
            return Err(Error::ParameterOutOfRange {
                name: "product input dimension (raise product_dim_cap to allow)".into(),
                value: (dims.0 * dims.1) as f64,
            });
        }
        tensor_channels(phi, psi).combined
    };
    let (sample, report, converged) = if kind == SetKindArg::E {
        let m = min_output_entropy(&product, cfg)?;
        let s = sample_optimal_set_e_with(&product, &m, cfg)?;
        let oracle = EntropyOracle {
            channel: &product,
            h_min: m.value,
            cfg,
        };
        let r = hereditary_check(&s.states, dims, &oracle as &dyn MembershipOracle, strong)?;
        (s, r, m.converged)
    } else {
        let c = holevo_capacity(&product, &ConstraintSet::Full, cfg)?;
        if !c.converged {
            return Err(Error::NotConverged(c.max_distance_residual.finite().unwrap_or(f64::INFINITY)));
        }
        let s = sample_optimal_set_c(&product, &c, cfg)?;
        let oracle = CapacityOracle {
            channel: &product,
            report: &c,
            cfg,
        };
        let r = hereditary_check(&s.states, dims, &oracle as &dyn MembershipOracle, strong)?;
        (s, r, true)
    };
    let mut json = hereditary_json(&report);
    json["kind"] = json!(if kind == SetKindArg::E { "E" } else { "C" });
    json["strong"] = json!(strong);
    json["sample_size"] = json!(sample.states.len());
    Ok(Outcome {
        rows: vec![
            ("tested".into(), report.tested as f64, None),
            ("violations".into(), report.violations.len() as f64, None),
            ("strong_violations".into(), report.strong_violations.len() as f64, None),
            ("max_defect".into(), report.max_defect.finite().unwrap_or(f64::INFINITY), None),
        ],
        report: json,
        converged,
    })
}

fn cmd_assumptions(phi: &Channel, psi: &Channel, samples: usize, cfg: &OptimizerConfig) -> Result<Outcome> {
    let dim = phi.dim_in() * psi.dim_in();
    let defects: Vec<AssumptionDefects> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_indexed(cfg.seed, "assumption-state", i as u64);
            assumption_screen(phi, psi, &random_density(dim, &mut rng), cfg)
        })
        .collect::<Result<_>>()?;
    let min_a = defects.iter().map(|d| d.a).fold(f64::INFINITY, f64::min);
    let max_subadd = defects.iter().map(|d| d.subadd).fold(f64::NEG_INFINITY, f64::max);
    let max_product_chi = defects.iter().map(|d| d.product_chi.abs()).fold(0.0, f64::max);
    let max_product_closure = defects.iter().map(|d| d.product_closure.abs()).fold(0.0, f64::max);
    let tol = crate::optsets::MEMBERSHIP_TOL;
    let report = json!({
        "assumption_a_holds": defects.iter().all(|d| d.assumption_a_holds(tol)),
        "assumption_b_holds": defects.iter().all(|d| d.assumption_b_holds(1e-3)),
        "defects": defects,
        "max_abs_product_chi": number_json(max_product_chi),
        "max_abs_product_closure": number_json(max_product_closure),
        "max_subadd": number_json(max_subadd),
        "min_a": number_json(min_a),
        "samples": samples,
    });
    Ok(Outcome {
        rows: vec![
            ("min_a".into(), min_a, None),
            ("max_subadd".into(), max_subadd, None),
            ("max_abs_product_chi".into(), max_product_chi, None),
            ("max_abs_product_closure".into(), max_product_closure, None),
        ],
        report,
        converged: true,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn envelope(command: &str, inputs: Value, cfg: &OptimizerConfig, base: LogBase, report: Value, seconds: f64) -> Value {
    let config = serde_json::to_value(cfg).expect("config serializes");
    let hashed = json!({ "config": config, "log_base": base.name() });
    let digest = Sha256::digest(hashed.to_string().as_bytes());
    json!({
        "command": command,
        "config": config,
        "config_hash": hex(&digest),
        "inputs": inputs,
        "log_base": base.name(),
        "report": report,
        "seed": cfg.seed,
        "timing": { "wall_seconds": seconds },
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn table_number(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if (1e-4..1e6).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn table_text(rows: &[Row]) -> String {
    let mut out = String::from("quantity\tvalue\tresidual\n");
    for (q, v, r) in rows {
        let r = r.map(table_number).unwrap_or_default();
        out.push_str(&format!("{q}\t{}\t{r}\n", table_number(*v)));
    }
    out
}

/// JSON to `--out` (or stdout); with `--table` the TSV goes to `<out>.tsv`,
/// or to stdout after the JSON when there is no `--out`.
fn write_outputs(global: &GlobalArgs, envelope: &Value, rows: &[Row]) -> Result<()> {
    let text = serde_json::to_string_pretty(envelope).expect("report serializes") + "\n";
    match &global.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| io_error(path, e))?;
            if global.table {
                let mut tsv = path.as_os_str().to_owned();
                tsv.push(".tsv");
                let tsv = PathBuf::from(tsv);
                std::fs::write(&tsv, table_text(rows)).map_err(|e| io_error(&tsv, e))?;
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let mut emit = |s: &str| lock.write_all(s.as_bytes()).map_err(Error::Io);
            emit(&text)?;
            if global.table {
                emit(&table_text(rows))?;
            }
        }
    }
    Ok(())
}
