use std::io::{IsTerminal, Read};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use spectre::compile::{compile, CompileError};
use spectre::dsl::{self, Document, ParseError, System};
use spectre::pseries::{self, PsError};
use spectre::setsys::{self, QOptions, SetSysError, SetSystem, SolveOptions, SystemClassification};
use spectre::{EpSet, EpSetError, PeriodicityParams, RatSystem};

#[derive(Parser, Debug)]
#[command(name = "spectre", version, about = "Spectra of power series and set-equation systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Truncation horizon for set systems.
    #[arg(long, global = true, default_value_t = 512)]
    horizon: u64,
    /// Truncation degree for series.
    #[arg(long, global = true, default_value_t = 32)]
    degree: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Elements of an enumerated index set examined for gcds.
    #[arg(long, global = true, default_value_t = 64)]
    enumeration_cap: usize,
    /// Consecutive unchanged gcds that count as stable.
    #[arg(long, global = true, default_value_t = 8)]
    stabilization_window: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a system and report diagnostics.
    Check { file: String },
    /// Closed forms and certificates for every variable.
    Solve { file: String },
    /// Periodicity parameters m, q, p, c.
    Params { file: String },
    /// Coefficients of the series solution.
    Coeffs { file: String },
    /// Dependency digraph.
    Digraph {
        file: String,
        #[arg(long)]
        dot: bool,
    },
    /// Translate a series system to its set system.
    Compile { file: String },
    /// Additive closure of a finite set of positive integers.
    Frobenius {
        #[arg(required = true)]
        generators: Vec<u64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Dot,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn semantic(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<SetSysError> for Failure {
    fn from(e: SetSysError) -> Self {
        let code = match e {
            SetSysError::InvariantBreach(_) | SetSysError::NoConvergence(_) => 4,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<PsError> for Failure {
    fn from(e: PsError) -> Self {
        Failure::semantic(e.to_string())
    }
}

impl From<EpSetError> for Failure {
    fn from(e: EpSetError) -> Self {
        let code = if matches!(e, EpSetError::CertificateBreach(_)) { 4 } else { 3 };
        Failure { code, message: e.to_string() }
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Series(e) => e.into(),
            CompileError::Sets(e) => e.into(),
        }
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn bold(&self, s: &str) -> String {
        if self.color {
            format!("\x1b[1m{}\x1b[0m", s)
        } else {
            s.to_string()
        }
    }
}

struct Ctx {
    cli_format: Format,
    horizon: u64,
    degree: usize,
    q: QOptions,
    style: Style,
    notices: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let color = std::env::var("SPECTRE_COLOR").map_or(true, |v| v != "0") && std::io::stdout().is_terminal();
    let mut ctx = Ctx {
        cli_format: cli.format,
        horizon: cli.horizon,
        degree: cli.degree,
        q: QOptions { window: cli.stabilization_window, cap: cli.enumeration_cap },
        style: Style { color },
        notices: Vec::new(),
    };
    let result = run(&cli.command, &mut ctx);
    for n in &ctx.notices {
        eprintln!("note: {}", n);
    }
    match result {
        Ok(out) => {
            print!("{}", out);
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_input(file: &str) -> Result<String, Failure> {
    if file == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::usage(format!("stdin: {}", e)))?;
        return Ok(s);
    }
    std::fs::read_to_string(file).map_err(|e| Failure::usage(format!("{}: {}", file, e)))
}

fn load(file: &str) -> Result<Document, Failure> {
    let text = read_input(file)?;
    dsl::parse(&text).map_err(|e| Failure { code: 2, message: format!("{}:{}", file, e) })
}

fn run(cmd: &Command, ctx: &mut Ctx) -> Result<String, Failure> {
    if ctx.horizon == 0 {
        return Err(Failure::usage("--horizon must be positive"));
    }
    match cmd {
        Command::Check { file } => check(&load(file)?, ctx),
        Command::Solve { file } => solve(&load(file)?, ctx, false),
        Command::Params { file } => solve(&load(file)?, ctx, true),
        Command::Coeffs { file } => coeffs(&load(file)?, ctx),
        Command::Digraph { file, dot } => digraph(&load(file)?, ctx, *dot),
        Command::Compile { file } => compile_cmd(&load(file)?, ctx),
        Command::Frobenius { generators } => frobenius(generators, ctx),
    }
}

// Series systems are hatted when not elementary, then compiled.
fn to_sets(doc: &Document, ctx: &mut Ctx) -> Result<SetSystem, Failure> {
    match &doc.system {
        System::Sets(s) => Ok(s.clone()),
        System::Series(s) => Ok(compile(&elementary_form(s, ctx)?)?.system),
    }
}

fn elementary_form(s: &RatSystem, ctx: &mut Ctx) -> Result<RatSystem, Failure> {
    let report = pseries::is_elementary(s);
    if report.elementary {
        return Ok(s.clone());
    }
    let hat = pseries::hat_transform(s).map_err(|e| {
        Failure::semantic(format!("system is not elementary ({}) and {}", report.diagnostics.join("; "), e))
    })?;
    ctx.notices.push("system is not elementary; applied the hat transform G -> (I - J)^-1 (G - J y)".into());
    Ok(hat)
}

fn json_out(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json");
    s.push('\n');
    s
}

fn classification_json(c: &SystemClassification, vars: &[String]) -> Value {
    json!({
        "basic": c.is_basic,
        "elementary": c.is_elementary,
        "reduced": c.is_reduced,
        "empties": c.empties.iter().map(|&i| vars[i].clone()).collect::<Vec<_>>(),
        "trivial": c.trivial.iter().map(|&(i, j)| json!([vars[i], vars[j]])).collect::<Vec<_>>(),
    })
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn names(vars: &[String], idx: impl IntoIterator<Item = usize>) -> String {
    let v: Vec<&str> = idx.into_iter().map(|i| vars[i].as_str()).collect();
    if v.is_empty() {
        "none".into()
    } else {
        v.join(", ")
    }
}

fn check(doc: &Document, ctx: &mut Ctx) -> Result<String, Failure> {
    let mut lines = Vec::new();
    let mut series_info = Value::Null;
    if let System::Series(s) = &doc.system {
        let report = pseries::is_elementary(s);
        let zeros = pseries::zero_components(s);
        lines.push(format!("series elementary: {}", yes(report.elementary)));
        for d in &report.diagnostics {
            lines.push(format!("  {}", d));
        }
        lines.push(format!("zero components: {}", names(s.variables(), zeros.iter().copied())));
        if let Some(c) = s.coefficient_free_node() {
            lines.push(format!("coefficients unavailable: uses {}", c));
        }
        series_info = json!({
            "elementary": report.elementary,
            "diagnostics": report.diagnostics,
            "zero_components": zeros.iter().map(|&i| s.variables()[i].clone()).collect::<Vec<_>>(),
        });
    }
    let sets = to_sets(doc, ctx)?;
    let vars = sets.variables();
    let c = sets.classify();
    if ctx.cli_format == Format::Json {
        return Ok(json_out(json!({
            "variables": vars,
            "classification": classification_json(&c, vars),
            "series": series_info,
            "enumerated": doc.enumerated,
        })));
    }
    lines.insert(0, format!("variables: {}", vars.join(", ")));
    lines.push(format!("set system basic: {}", yes(c.is_basic)));
    if let Some(i) = c.not_basic_at {
        lines.push(format!("  equation for {} has a term that can produce 0", vars[i]));
    }
    lines.push(format!("set system elementary: {}", yes(c.is_elementary)));
    lines.push(format!("set system reduced: {}", yes(c.is_reduced)));
    lines.push(format!("empty variables: {}", names(vars, c.empties.iter().copied())));
    for &(i, j) in &c.trivial {
        lines.push(format!("trivial equation {} = {}: substitute {} for {}", vars[i], vars[j], vars[j], vars[i]));
    }
    if doc.enumerated {
        lines.push("enumerated index sets in use: gcds are stabilized, not certified".into());
    }
    Ok(lines.join("\n") + "\n")
}

fn param_cells(p: &PeriodicityParams) -> [String; 4] {
    [
        p.m.map_or("inf".into(), |m| m.to_string()),
        p.q.to_string(),
        p.p.to_string(),
        p.c.to_string(),
    ]
}

fn table(rows: &[Vec<String>], style: &Style) -> String {
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (n, r) in rows.iter().enumerate() {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| if c + 1 == cols { s.clone() } else { format!("{:w$}", s, w = widths[c]) })
            .collect();
        let line = cells.join("  ");
        let line = line.trim_end();
        out.push_str(&if n == 0 { style.bold(line) } else { line.to_string() });
        out.push('\n');
    }
    out
}

fn solve(doc: &Document, ctx: &mut Ctx, params_only: bool) -> Result<String, Failure> {
    let sets = to_sets(doc, ctx)?;
    let class = sets.classify();
    let sol = setsys::solve_with(&sets, SolveOptions { horizon: ctx.horizon, q: ctx.q })?;
    let per_eq = per_equation_gcds(&sets, ctx.q)?;
    if !sol.q_certified {
        ctx.notices.push(format!(
            "q uses gcds over enumerated index sets stabilized after {} unchanged steps (at most {} elements)",
            ctx.q.window, ctx.q.cap
        ));
    }
    let vars = sets.variables();
    if ctx.cli_format == Format::Json {
        let solution: Vec<Value> = sol
            .vars
            .iter()
            .zip(&per_eq)
            .map(|(v, g)| {
                json!({
                    "var": v.name,
                    "closed_form": v.closed_form.to_string(),
                    "m": v.params.m,
                    "q": v.params.q,
                    "p": v.params.p,
                    "c": v.params.c,
                    "certificate": v.certificate.name(),
                    "equation_gcd": g,
                })
            })
            .collect();
        return Ok(json_out(json!({
            "variables": vars,
            "classification": classification_json(&class, vars),
            "solution": solution,
            "horizon": sol.horizon,
            "q_certified": sol.q_certified,
        })));
    }
    let mut rows = Vec::new();
    if params_only {
        rows.push(["var", "m", "q", "p", "c", "equation gcd"].map(String::from).to_vec());
        for (v, g) in sol.vars.iter().zip(&per_eq) {
            let mut r = vec![v.name.clone()];
            r.extend(param_cells(&v.params));
            r.push(g.map_or("-".into(), |g| g.to_string()));
            rows.push(r);
        }
    } else {
        rows.push(["var", "closed form", "m", "q", "p", "c", "certificate"].map(String::from).to_vec());
        for v in &sol.vars {
            let mut r = vec![v.name.clone(), v.closed_form.to_string()];
            r.extend(param_cells(&v.params));
            r.push(v.certificate.name().into());
            rows.push(r);
        }
    }
    Ok(table(&rows, &ctx.style))
}

// Per-equation gcd contributions over the reduced system, None for empties.
fn per_equation_gcds(sets: &SetSystem, q: QOptions) -> Result<Vec<Option<u64>>, Failure> {
    let (reduced, map) = sets.reduce_with_map();
    let mut out = vec![None; sets.len()];
    if reduced.is_empty() {
        return Ok(out);
    }
    let report = setsys::q_vector_with(&reduced, q)?;
    for (new, &old) in map.iter().enumerate() {
        out[old] = Some(report.per_equation[new]);
    }
    Ok(out)
}

fn coeffs(doc: &Document, ctx: &mut Ctx) -> Result<String, Failure> {
    let System::Series(s) = &doc.system else {
        return Err(Failure::semantic("coeffs needs a series system"));
    };
    if let Some(c) = s.coefficient_free_node() {
        return Err(Failure::semantic(format!("{} has spectra only; its coefficients are not computed", c)));
    }
    let hatted = !pseries::is_elementary(s).elementary;
    let e = elementary_form(s, ctx)?;
    let sol = pseries::fixed_point_solve(&e, ctx.degree)?;
    let vars = s.variables();
    if ctx.cli_format == Format::Json {
        let mut cs = serde_json::Map::new();
        for (v, ser) in vars.iter().zip(&sol) {
            cs.insert(v.clone(), Value::Array(ser.coeffs().iter().map(|c| Value::String(c.to_string())).collect()));
        }
        return Ok(json_out(json!({
            "variables": vars,
            "degree": ctx.degree,
            "hatted": hatted,
            "coefficients": cs,
        })));
    }
    let mut rows = vec![std::iter::once("n".to_string()).chain(vars.iter().cloned()).collect::<Vec<_>>()];
    for n in 0..=ctx.degree {
        let mut r = vec![n.to_string()];
        r.extend(sol.iter().map(|ser| ser.coeff(n).to_string()));
        rows.push(r);
    }
    Ok(table(&rows, &ctx.style))
}

fn digraph(doc: &Document, ctx: &mut Ctx, dot: bool) -> Result<String, Failure> {
    let sets = to_sets(doc, ctx)?;
    let g = sets.dependency();
    let vars = sets.variables();
    if dot || ctx.cli_format == Format::Dot {
        return Ok(g.to_dot());
    }
    let edges: Vec<(usize, usize)> =
        (0..g.len()).flat_map(|i| g.successors(i).iter().map(move |&j| (i, j))).collect();
    let comps = g.components();
    if ctx.cli_format == Format::Json {
        return Ok(json_out(json!({
            "variables": vars,
            "edges": edges.iter().map(|&(i, j)| json!([vars[i], vars[j]])).collect::<Vec<_>>(),
            "components": comps.iter().map(|c| c.iter().map(|&i| vars[i].clone()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })));
    }
    let mut out = String::new();
    for (i, j) in edges {
        out.push_str(&format!("{} -> {}\n", vars[i], vars[j]));
    }
    for c in comps {
        out.push_str(&format!("component {{{}}}\n", names(vars, c)));
    }
    Ok(out)
}

fn compile_cmd(doc: &Document, ctx: &mut Ctx) -> Result<String, Failure> {
    let System::Series(s) = &doc.system else {
        return Err(Failure::semantic("compile needs a series system"));
    };
    let report = pseries::is_elementary(s);
    if !report.elementary {
        ctx.notices.push("system is not elementary; solve and params compile its hat transform instead".into());
    }
    let r = compile(s)?;
    if ctx.cli_format == Format::Json {
        let eqs: Vec<String> = (0..r.system.len()).map(|i| dsl::print_set_equation(&r.system, i)).collect();
        return Ok(json_out(json!({
            "variables": r.system.variables(),
            "equations": eqs,
            "notes": r.notes,
            "enumerated": r.enumerated,
        })));
    }
    let mut out = String::new();
    for n in &r.notes {
        out.push_str(&format!("# {}\n", n));
    }
    out.push_str(&dsl::print_sets(&r.system));
    Ok(out)
}

fn frobenius(gens: &[u64], ctx: &mut Ctx) -> Result<String, Failure> {
    let set = EpSet::finite(gens.iter().copied());
    let s = set.closure_summary()?;
    let p = s.set.params();
    if ctx.cli_format == Format::Json {
        return Ok(json_out(json!({
            "generators": set.finite_part(),
            "gcd": s.gcd,
            "conductor": s.conductor,
            "gaps": s.gaps,
            "closure": s.set.to_string(),
            "m": p.m,
            "q": p.q,
            "p": p.p,
            "c": p.c,
        })));
    }
    let gaps: Vec<String> = s.gaps.iter().map(|g| g.to_string()).collect();
    Ok(format!(
        "{}\ngcd: {}\nconductor: {}\ngaps: [{}]\nclosure: {}\nparams: {}\n",
        ctx.style.bold(&format!("generators: {}", set)),
        s.gcd,
        s.conductor,
        gaps.join(", "),
        s.set,
        p
    ))
}
