use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cpl_core::asymptotics::{Bounds, Margin, TypeProbTable};
use cpl_core::eliminator::{eliminate_with_cost, limit_probability};
use cpl_core::evaluator::Assignment;
use cpl_core::network::LiftedNetwork;
use cpl_core::rational::{format_rational, to_f64};
use cpl_core::worlds::{estimate_probability, exact_probability, sample, DEFAULT_CAP_BITS};
use cpl_core::{parse, render, verify, Error, Formula, Rational};
use serde_json::{json, Value};

/// Conditional probability logic over lifted Bayesian networks.
#[derive(Parser, Debug)]
#[command(name = "cpl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Parse a formula and print it in canonical form.
    Parse,
    /// Print the quantifier rank of a formula.
    Qr,
    /// Eliminate quantifiers almost surely.
    Eliminate,
    /// Check that a formula is noncritical (exit 1 with witnesses if not).
    Check,
    /// List the m-critical numbers of a network.
    Critical,
    /// Exact probability of a formula on worlds of size n.
    Prob,
    /// Draw one world of size n.
    Sample,
    /// Monte-Carlo estimate of a formula's probability.
    Estimate,
    /// Print the network with quantifier-free guards.
    Qfnet,
    /// Check that each relation's guards are exclusive and exhaustive.
    Validate,
    /// Run the acceptance suite.
    Verify,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Network JSON file.
    #[arg(long, global = true)]
    network: Option<String>,
    /// Formula text.
    #[arg(long, global = true, conflicts_with = "formula_file")]
    formula: Option<String>,
    /// File holding the formula text.
    #[arg(long, global = true)]
    formula_file: Option<String>,
    /// Domain size.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Assignment of free variables, e.g. `x=1,y=2`.
    #[arg(long, global = true, default_value = "")]
    assign: String,
    /// Identity pattern of the free variables for `--limit`: `distinct` or `x=y,...`.
    #[arg(long, global = true, default_value = "distinct")]
    pattern: String,
    /// Critical-number order (defaults to the bound, 4).
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Largest |free variables| + quantifier rank accepted by elimination.
    #[arg(long, global = true, default_value_t = 4)]
    k: usize,
    #[arg(long, global = true, default_value_t = 1000)]
    samples: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Machine-readable output with a `result` field.
    #[arg(long, global = true)]
    json: bool,
    /// Print numbers as floating point instead of exact rationals.
    #[arg(long, global = true)]
    float: bool,
    /// Worker threads for enumeration and sampling.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cap on the world-count exponent (number of atoms).
    #[arg(long, global = true, default_value_t = DEFAULT_CAP_BITS)]
    cap: usize,
    /// With `eliminate`: print operation tallies.
    #[arg(long, global = true)]
    show_cost: bool,
    /// With `eliminate`: print the limit probability for `--pattern`.
    #[arg(long, global = true)]
    limit: bool,
}

enum Failure {
    Usage(String),
    Domain(Error),
    /// Output already printed; the command reports a negative verdict.
    Verdict,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Run = Result<(), Failure>;

struct Ctx {
    opts: Opts,
}

impl Ctx {
    fn network(&self) -> Result<LiftedNetwork, Failure> {
        let path = self.opts.network.as_ref().ok_or_else(|| Failure::Usage("--network is required".into()))?;
        Ok(LiftedNetwork::load(path)?)
    }

    fn formula(&self, net: &LiftedNetwork) -> Result<Formula, Failure> {
        let text = match (&self.opts.formula, &self.opts.formula_file) {
            (Some(t), _) => t.clone(),
            (None, Some(path)) => std::fs::read_to_string(path)
                .map_err(|e| Failure::Domain(Error::Io(format!("cannot read {path}: {e}"))))?,
            (None, None) => return Err(Failure::Usage("--formula or --formula-file is required".into())),
        };
        Ok(parse(text.trim(), net.sig())?)
    }

    fn n(&self) -> Result<usize, Failure> {
        self.opts.n.ok_or_else(|| Failure::Usage("--n is required".into()))
    }

    fn table(&self, net: &LiftedNetwork) -> Result<TypeProbTable, Failure> {
        let bounds = Bounds { k: self.opts.k, m: Bounds::default().m.max(self.opts.k), ..Bounds::default() };
        Ok(TypeProbTable::with_bounds(net, bounds)?)
    }

    fn number(&self, r: &Rational) -> String {
        if self.opts.float {
            to_f64(r).to_string()
        } else {
            format_rational(r)
        }
    }

    fn number_json(&self, r: &Rational) -> Value {
        if self.opts.float {
            json!(to_f64(r))
        } else {
            json!(format_rational(r))
        }
    }

    /// Prints `text`, or `{"result": result, ..extra}` with `--json`.
    fn emit(&self, text: &str, result: Value, extra: Value) {
        if self.opts.json {
            let mut obj = serde_json::Map::new();
            obj.insert("result".into(), result);
            if let Value::Object(m) = extra {
                obj.extend(m);
            }
            println!("{}", Value::Object(obj));
        } else {
            println!("{text}");
        }
    }
}

fn run(cmd: Command, ctx: &Ctx) -> Run {
    match cmd {
        Command::Parse => {
            let net = ctx.network()?;
            let f = ctx.formula(&net)?;
            let text = render(&f);
            ctx.emit(&text, json!(text), json!({ "free_vars": f.free_var_list(), "length": f.length() }));
        }
        Command::Qr => {
            let net = ctx.network()?;
            let qr = ctx.formula(&net)?.quantifier_rank();
            ctx.emit(&qr.to_string(), json!(qr), json!({}));
        }
        Command::Eliminate => eliminate_cmd(ctx)?,
        Command::Check => check_cmd(ctx)?,
        Command::Critical => {
            let net = ctx.network()?;
            let m = ctx.opts.m.unwrap_or(Bounds::default().m);
            let table = TypeProbTable::with_bounds(&net, Bounds { m, ..Bounds::default() })?;
            let set = table.critical_numbers(m)?;
            let lines: Vec<String> = set.values.iter().map(|v| ctx.number(v)).collect();
            let values: Vec<Value> = set.values.iter().map(|v| ctx.number_json(v)).collect();
            ctx.emit(&lines.join("\n"), Value::Array(values), json!({ "m": m, "count": set.len() }));
        }
        Command::Prob => {
            let net = ctx.network()?;
            let f = ctx.formula(&net)?;
            let asg = Assignment::parse(&ctx.opts.assign)?;
            let p = exact_probability(&net, ctx.n()?, &f, &asg, ctx.opts.cap)?;
            ctx.emit(&ctx.number(&p), ctx.number_json(&p), json!({}));
        }
        Command::Sample => {
            let net = ctx.network()?;
            let world = sample(&net, ctx.n()?, ctx.opts.seed)?;
            ctx.emit(&world.to_json(), world.to_json_value(), json!({ "seed": ctx.opts.seed }));
        }
        Command::Estimate => {
            let net = ctx.network()?;
            let f = ctx.formula(&net)?;
            let asg = Assignment::parse(&ctx.opts.assign)?;
            let e = estimate_probability(&net, ctx.n()?, &f, &asg, ctx.opts.samples, ctx.opts.seed)?;
            ctx.emit(
                &format!("{:.6} +/- {:.6} ({} of {} samples)", e.estimate, e.half_width_95, e.hits, e.samples),
                json!(e.estimate),
                json!({ "half_width_95": e.half_width_95, "hits": e.hits, "samples": e.samples, "seed": ctx.opts.seed }),
            );
        }
        Command::Qfnet => {
            let net = ctx.network()?;
            let qf = ctx.table(&net)?.quantifier_free_network()?;
            ctx.emit(&qf.to_json_pretty(), qf.to_json_value(), json!({}));
        }
        Command::Validate => {
            let net = ctx.network()?;
            let report = net.validate(ctx.opts.n.unwrap_or(3));
            let lines: Vec<String> = report
                .violations
                .iter()
                .map(|v| format!("{}: {} ({})", v.relation, v.kind, v.witness))
                .collect();
            let listed: Vec<Value> = report
                .violations
                .iter()
                .map(|v| json!({ "relation": v.relation, "kind": v.kind.to_string(), "witness": v.witness }))
                .collect();
            let text = if report.ok() { "ok".to_string() } else { lines.join("\n") };
            ctx.emit(&text, json!(report.ok()), json!({ "violations": listed }));
            if !report.ok() {
                return Err(Failure::Verdict);
            }
        }
        Command::Verify => {
            let results = verify::run_all();
            let lines: Vec<String> = results.iter().map(|r| r.to_string()).collect();
            let listed: Vec<Value> = results
                .iter()
                .map(|r| json!({ "id": r.id, "title": r.title, "passed": r.passed, "detail": r.detail }))
                .collect();
            let all = results.iter().all(|r| r.passed);
            ctx.emit(&lines.join("\n"), json!(all), json!({ "criteria": listed }));
            if !all {
                return Err(Failure::Verdict);
            }
        }
    }
    Ok(())
}

fn eliminate_cmd(ctx: &Ctx) -> Run {
    let net = ctx.network()?;
    let f = ctx.formula(&net)?;
    let table = ctx.table(&net)?;
    let (set, counts) = eliminate_with_cost(&table, &f, ctx.opts.k)?;
    let text = render(&set.to_formula());
    let mut lines = vec![text.clone()];
    let mut extra = serde_json::Map::new();
    if ctx.opts.show_cost {
        lines.push(format!("cost: arith={} num_cmp={} lit_cmp={}", counts.arith, counts.num_cmp, counts.lit_cmp));
        extra.insert(
            "cost".into(),
            json!({ "arith": counts.arith, "num_cmp": counts.num_cmp, "lit_cmp": counts.lit_cmp, "length": f.length() }),
        );
    }
    if ctx.opts.limit {
        let lim = limit_probability(&table, &f, &ctx.opts.pattern)?;
        lines.push(format!("limit: {}", ctx.number(&lim.d)));
        extra.insert("limit".into(), ctx.number_json(&lim.d));
        let by_pattern: serde_json::Map<String, Value> =
            lim.table.iter().map(|(p, d)| (p.clone(), ctx.number_json(d))).collect();
        extra.insert("limits_by_pattern".into(), Value::Object(by_pattern));
    }
    ctx.emit(&lines.join("\n"), json!(text), Value::Object(extra));
    Ok(())
}

fn check_cmd(ctx: &Ctx) -> Run {
    let net = ctx.network()?;
    let f = ctx.formula(&net)?;
    let table = ctx.table(&net)?;
    let check = table.is_noncritical(&f)?;
    if check.ok() {
        let margin = table.epsilon_margin(&f)?;
        let (shown, value) = match &margin {
            Margin::Bounded(e) => (ctx.number(e), ctx.number_json(e)),
            Margin::Unbounded => ("unbounded".to_string(), json!("unbounded")),
        };
        ctx.emit(&format!("noncritical (epsilon margin {shown})"), json!(true), json!({ "epsilon": value }));
        return Ok(());
    }
    let lines: Vec<String> = check
        .witnesses
        .iter()
        .map(|w| format!("witness (r={}, alpha={}, beta={})", ctx.number(&w.r), ctx.number(&w.alpha), ctx.number(&w.beta)))
        .collect();
    let listed: Vec<Value> = check
        .witnesses
        .iter()
        .map(|w| json!({ "r": ctx.number_json(&w.r), "alpha": ctx.number_json(&w.alpha), "beta": ctx.number_json(&w.beta) }))
        .collect();
    ctx.emit(&format!("critical\n{}", lines.join("\n")), json!(false), json!({ "witnesses": listed }));
    Err(Failure::Verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.opts.threads {
        if let Err(e) = rayon_threads(t) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = Ctx { opts: cli.opts };
    match run(cli.command, &ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
    }
}

fn rayon_threads(n: usize) -> Result<(), String> {
    if n == 0 {
        return Err("--threads must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}
