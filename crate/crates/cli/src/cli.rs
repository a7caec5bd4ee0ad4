//! The `martinet` command line.
//!
//! Exit status: 0 for a definite answer, 2 for an inconclusive one, 1 for
//! errors and failed verifications.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use martinet_core::harness::{invariance_suite_with, HarnessConfig};
use martinet_core::invariants::{classify_sigma220, full_report, InvariantConfig, Sigma22Data, Sigma22Label};
use martinet_core::moser::{grid, integrate_and_verify, summarize, Bridge, MoserConfig, MoserProblem};
use martinet_core::normal_form::{
    decide_equivalence, decompose, from_volume, realizability, Category, EquivalenceConfig, Outcome, Realizability,
};
use martinet_core::{Chart, DiffForm, TruncatedPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::dsl::FormExpr;
use crate::frm::{parse_chart, parse_frm, read_frm};
use crate::json;

pub const DEFAULT_JET: u32 = 8;
pub const SEED_ENV: &str = "MARTINET_SEED";

const OMEGA0: &str = "d(p1*(dx - z*dy)) + x*dx^dy";

#[derive(Parser, Debug)]
#[command(name = "martinet", version, about = "Exact invariants and equivalence checks for singular symplectic form germs")]
struct Cli {
    /// Jet order of the computation (default 8; the harness defaults to 4).
    #[arg(long, global = true)]
    jet: Option<u32>,
    /// Print a JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomized step; `MARTINET_SEED` overrides it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Add wall-clock timings to the output.
    #[arg(long, global = true)]
    timings: bool,
    /// Read inputs as inline expressions on this chart, e.g. "p1 x y z".
    #[arg(long, global = true)]
    chart: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Every invariant of a closed 2-form.
    Invariants { form: String },
    /// Decides whether two closed 2-forms are equivalent.
    Equiv {
        form0: String,
        form1: String,
        /// C (complex analytic) or R (real analytic).
        #[arg(long, default_value = "R", value_parser = parse_category)]
        category: Category,
    },
    /// Splits a form along its Martinet hypersurface.
    Decompose { form: String },
    /// Whether a 2-form on an odd-dimensional chart is a restriction.
    Realize {
        sigma: String,
        /// Degree bound of the annihilator search.
        #[arg(long, default_value_t = 4)]
        degree: u32,
    },
    /// A closed 2-form whose top power is the given function times the volume.
    FromVolume { function: String },
    /// Numerically integrates a Moser homotopy between two forms.
    MoserVerify {
        form0: String,
        form1: String,
        /// Grid points per axis.
        #[arg(long, default_value_t = 5)]
        grid: usize,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Half-width of the sample box.
        #[arg(long = "box", default_value_t = 0.1)]
        half_width: f64,
        /// auto, rel_darboux, fourdim_b or sing.
        #[arg(long, default_value = "auto")]
        bridge: String,
        /// Random sample count; replaces the grid.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// The hyperbolic/elliptic/parabolic label of a restriction.
    Classify { form: String },
    /// Randomized invariance checks under polynomial diffeomorphisms.
    Harness {
        /// Form to test; defaults to d(p1*(dx - z*dy)) + x*dx^dy.
        form: Option<String>,
        #[arg(long, default_value_t = 50)]
        trials: u64,
    },
}

fn parse_category(s: &str) -> Result<Category, String> {
    match s {
        "C" | "c" | "complex" => Ok(Category::Complex),
        "R" | "r" | "real" => Ok(Category::Real),
        _ => Err(format!("unknown category `{s}`, expected C or R")),
    }
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Invariants { .. } => "invariants",
            Cmd::Equiv { .. } => "equiv",
            Cmd::Decompose { .. } => "decompose",
            Cmd::Realize { .. } => "realize",
            Cmd::FromVolume { .. } => "from-volume",
            Cmd::MoserVerify { .. } => "moser-verify",
            Cmd::Classify { .. } => "classify",
            Cmd::Harness { .. } => "harness",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Definite,
    Inconclusive,
    Failed,
}

impl Status {
    fn code(self) -> i32 {
        match self {
            Status::Definite => 0,
            Status::Inconclusive => 2,
            Status::Failed => 1,
        }
    }
}

/// What a command hands back for printing.
struct Output {
    reports: Vec<Value>,
    verdict: Value,
    result: Value,
    text: String,
    status: Status,
}

impl Output {
    fn new(result: Value, text: String) -> Self {
        Output { reports: Vec::new(), verdict: Value::Null, result, text, status: Status::Definite }
    }
}

struct Input {
    file: Option<String>,
    chart: Arc<Chart>,
    source: String,
    expr: FormExpr,
}

struct Ctx {
    jet: Option<u32>,
    seed: Option<u64>,
    chart: Option<Arc<Chart>>,
    inputs: Vec<Input>,
}

type CmdResult<T> = Result<T, String>;

impl Ctx {
    fn jet(&self) -> u32 {
        self.jet.unwrap_or(DEFAULT_JET)
    }

    fn load(&mut self, arg: &str) -> CmdResult<usize> {
        let stdin_text = if arg == "-" {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text).map_err(|e| format!("<stdin>: {e}"))?;
            Some(text)
        } else {
            None
        };
        let input = match (&self.chart, stdin_text) {
            (Some(chart), text) => {
                let text = text.as_deref().unwrap_or(arg);
                let expr = crate::dsl::parse_expr(text).map_err(|e| format!("<inline>: {e}"))?;
                Input { file: None, chart: chart.clone(), source: text.trim().to_string(), expr }
            }
            (None, Some(text)) => {
                let f = parse_frm(&text).map_err(|e| format!("<stdin>: {e}"))?;
                Input { file: Some("-".to_string()), chart: f.chart, source: f.source, expr: f.expr }
            }
            (None, None) => {
                let f = read_frm(Path::new(arg)).map_err(|e| format!("{arg}: {e}"))?;
                Input { file: Some(arg.to_string()), chart: f.chart, source: f.source, expr: f.expr }
            }
        };
        self.inputs.push(input);
        Ok(self.inputs.len() - 1)
    }

    fn form(&mut self, arg: &str) -> CmdResult<DiffForm> {
        let i = self.load(arg)?;
        let inp = &self.inputs[i];
        let name = inp.file.as_deref().unwrap_or("<inline>");
        inp.expr.eval(&inp.chart, self.jet()).map_err(|e| format!("{name}: {e}"))
    }

    fn two_forms(&mut self, a: &str, b: &str) -> CmdResult<(DiffForm, DiffForm)> {
        let w0 = self.form(a)?;
        let w1 = self.form(b)?;
        if w0.chart().vars() != w1.chart().vars() {
            return Err(format!(
                "inputs use different charts: {} vs {}",
                w0.chart().vars().join(" "),
                w1.chart().vars().join(" ")
            ));
        }
        // one chart object for both
        let w1 = w1.rechart(w0.chart()).map_err(|e| e.to_string())?;
        Ok((w0, w1))
    }

    fn invariant_config(&self) -> InvariantConfig {
        let mut cfg = InvariantConfig::default();
        if let Some(s) = self.seed {
            cfg.regular.seed = s;
        }
        cfg
    }

    fn equivalence_config(&self) -> EquivalenceConfig {
        EquivalenceConfig { invariants: self.invariant_config(), ..EquivalenceConfig::default() }
    }

    fn input_json(&self) -> Value {
        let chart = self.inputs.first().map(|i| i.chart.clone()).or_else(|| self.chart.clone());
        json!({
            "files": self.inputs.iter().map(|i| i.file.clone()).collect::<Vec<_>>(),
            "chart": chart.as_ref().map(|c| c.vars().to_vec()),
            "weights": chart.as_ref().and_then(|c| c.weights().map(<[u32]>::to_vec)),
            "jet": self.jet,
            "seed": self.seed,
            "forms": self.inputs.iter().map(|i| i.source.clone()).collect::<Vec<_>>(),
        })
    }
}

fn core<T>(r: martinet_core::Result<T>) -> CmdResult<T> {
    r.map_err(|e| e.to_string())
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let seed = match std::env::var(SEED_ENV) {
        Ok(s) => match s.trim().parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                let _ = writeln!(err, "error: {SEED_ENV}={s} is not an unsigned integer");
                return 1;
            }
        },
        Err(_) => cli.seed,
    };
    let chart = match cli.chart.as_deref().map(parse_chart).transpose() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: --chart: {e}");
            return 1;
        }
    };
    let mut ctx = Ctx { jet: cli.jet, seed, chart, inputs: Vec::new() };
    let start = Instant::now();
    let command = cli.cmd.name();
    let outcome = dispatch(&cli.cmd, &mut ctx);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(o) => {
            if cli.json {
                let mut doc = json!({
                    "schema_version": json::SCHEMA_VERSION,
                    "command": command,
                    "input": ctx.input_json(),
                    "reports": o.reports,
                    "verdict": o.verdict,
                    "result": o.result,
                });
                if cli.timings {
                    doc["timings"] = json!({ "total_ms": json::float(elapsed) });
                }
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
            } else {
                let _ = write!(out, "{}", o.text);
                if cli.timings {
                    let _ = writeln!(out, "time: {elapsed:.1} ms");
                }
            }
            o.status.code()
        }
        Err(msg) => {
            if cli.json {
                let doc = json!({
                    "schema_version": json::SCHEMA_VERSION,
                    "command": command,
                    "input": ctx.input_json(),
                    "error": msg,
                });
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
            }
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn dispatch(cmd: &Cmd, ctx: &mut Ctx) -> CmdResult<Output> {
    match cmd {
        Cmd::Invariants { form } => invariants(ctx, form),
        Cmd::Equiv { form0, form1, category } => equiv(ctx, form0, form1, *category),
        Cmd::Decompose { form } => decompose_cmd(ctx, form),
        Cmd::Realize { sigma, degree } => realize(ctx, sigma, *degree),
        Cmd::FromVolume { function } => from_volume_cmd(ctx, function),
        Cmd::MoserVerify { form0, form1, grid, steps, tol, half_width, bridge, samples } => {
            let cfg = MoserConfig { half_width: *half_width, steps: *steps, tol: *tol, ..MoserConfig::default() };
            moser_verify(ctx, form0, form1, bridge, *grid, *samples, &cfg)
        }
        Cmd::Classify { form } => classify(ctx, form),
        Cmd::Harness { form, trials } => harness(ctx, form.as_deref(), *trials),
    }
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

fn report_text(r: &martinet_core::invariants::InvariantReport) -> String {
    let md = &r.martinet;
    let chart = md.f.chart();
    let mut s = String::new();
    s += &format!("regime: {}\n", r.regime.name());
    s += &format!("martinet function: {}\n", md.f);
    s += &format!("martinet kind: {}\n", json::kind_name(md.kind));
    if let Some(p) = md.pivot {
        s += &format!("pivot: {}\n", chart.var(p));
    }
    if let (Some(sig), Some(sl)) = (&md.sigma, &md.slice) {
        s += &format!("sigma on ({}): {}\n", sl.sub().vars().join(", "), sig);
    }
    s += &format!("kernel of omega^(n-1) at 0: {}\n", r.kernel.format_with(chart));
    s += &format!("rank sigma at 0: {}\n", opt(&r.rank_sigma));
    s += &format!("kernel in T Sigma2: {}\n", opt(&r.kernel_in_sigma2));
    s += &format!("kernel tangent to Sigma22: {}\n", opt(&r.kernel_tangent_to_z));
    s += &format!("orientation: {}\n", opt(&r.orientation));
    s += &format!("dim span j1: {}\n", opt(&r.dim_span_j1));
    if let Some(i) = &r.ideal {
        s += &format!("I(sigma) = ({}, {}): {:?}\n", i.generators[0], i.generators[1], i.verdict);
    }
    if let Some(k) = &r.kernel_field {
        s += &format!("kernel field: {}\n", json::kernel_field_text(k));
    }
    if let Some(l) = &r.sigma22 {
        s += &format!("sigma22: {} (discriminant {})\n", l.label.name(), l.discriminant);
    }
    for n in &r.notes {
        s += &format!("note: {n}\n");
    }
    s
}

fn invariants(ctx: &mut Ctx, arg: &str) -> CmdResult<Output> {
    let w = ctx.form(arg)?;
    let r = core(full_report(&w, &ctx.invariant_config()))?;
    let mut o = Output::new(Value::Null, report_text(&r));
    o.reports.push(json::report(&r));
    Ok(o)
}

fn equiv(ctx: &mut Ctx, a: &str, b: &str, cat: Category) -> CmdResult<Output> {
    let (w0, w1) = ctx.two_forms(a, b)?;
    let cfg = ctx.equivalence_config();
    let r0 = core(full_report(&w0, &cfg.invariants))?;
    let r1 = core(full_report(&w1, &cfg.invariants))?;
    let v = core(decide_equivalence(&w0, &w1, cat, &cfg))?;
    let mut text = format!("{} over {} by {}\n", v.outcome.name(), json::category_name(cat), v.theorem.name());
    for e in &v.evidence {
        text += &format!("  {}: {}\n", e.name, e.detail);
    }
    let mut o = Output::new(Value::Null, text);
    o.reports = vec![json::report(&r0), json::report(&r1)];
    o.verdict = json::verdict(cat, &v);
    if v.outcome == Outcome::Inconclusive {
        o.status = Status::Inconclusive;
    }
    Ok(o)
}

fn decompose_cmd(ctx: &mut Ctx, arg: &str) -> CmdResult<Output> {
    let w = ctx.form(arg)?;
    let d = core(decompose(&w))?;
    let text = format!(
        "pivot: {}\nalpha: {}\nsigma: {}\ntheta: {}\ncontact: {}\n",
        d.slice.full().var(d.slice.pivot()),
        d.alpha,
        d.sigma,
        d.theta,
        d.contact
    );
    Ok(Output::new(json::decomposition(&d), text))
}

fn realize(ctx: &mut Ctx, arg: &str, degree: u32) -> CmdResult<Output> {
    let sigma = ctx.form(arg)?;
    let seed = ctx.seed.unwrap_or(0);
    Ok(match core(realizability(&sigma, degree, seed))? {
        Realizability::Realizable { alpha, omega } => Output::new(
            json!({ "status": "realizable", "alpha": alpha.to_string(), "omega": omega.to_string(),
                    "omega_chart": omega.chart().vars() }),
            format!("realizable\nalpha: {alpha}\nomega on ({}): {omega}\n", omega.chart().vars().join(", ")),
        ),
        Realizability::NotRealizable { reason } => Output::new(
            json!({ "status": "not_realizable", "reason": reason }),
            format!("not realizable: {reason}\n"),
        ),
        Realizability::Open { degree } => {
            let mut o = Output::new(
                json!({ "status": "open", "degree": degree }),
                format!("open: no contact annihilator up to degree {degree}\n"),
            );
            o.status = Status::Inconclusive;
            o
        }
    })
}

fn from_volume_cmd(ctx: &mut Ctx, arg: &str) -> CmdResult<Output> {
    let w = ctx.form(arg)?;
    if w.degree() != 0 {
        return Err(format!("expected a function, got a {}-form", w.degree()));
    }
    let f: TruncatedPoly = core(w.as_function())?;
    let omega = core(from_volume(&f))?;
    let n = omega.dim() / 2;
    let top = core(core(omega.power(n))?.top_coefficient())?;
    let ok = top == f;
    let text = format!("omega: {omega}\nomega^{n} = ({top}) * volume: {}\n", if ok { "verified" } else { "MISMATCH" });
    let mut o = Output::new(json!({ "omega": omega.to_string(), "n": n, "top_coefficient": top.to_string(), "verified": ok }), text);
    if !ok {
        o.status = Status::Failed;
    }
    Ok(o)
}

fn moser_verify(
    ctx: &mut Ctx,
    a: &str,
    b: &str,
    bridge: &str,
    g: usize,
    samples: Option<usize>,
    cfg: &MoserConfig,
) -> CmdResult<Output> {
    let (w0, w1) = ctx.two_forms(a, b)?;
    let problem = match bridge {
        "auto" => core(MoserProblem::auto(&w0, &w1))?,
        name => {
            let br = Bridge::from_name(name).ok_or_else(|| format!("unknown bridge `{name}`"))?;
            core(MoserProblem::new(br, &w0, &w1))?
        }
    };
    let dim = problem.dim();
    let h = cfg.half_width;
    let points = match samples {
        Some(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.unwrap_or(0));
            (0..k).map(|_| (0..dim).map(|_| rng.random_range(-h..=h)).collect()).collect()
        }
        None => grid(dim, g, h),
    };
    let flows = core(integrate_and_verify(&problem, &points, cfg))?;
    let sum = summarize(&problem, &flows);
    let failures: Vec<Value> = flows
        .iter()
        .filter(|s| !s.pass)
        .take(10)
        .map(|s| {
            json!({
                "start": s.start.iter().copied().map(json::float).collect::<Vec<_>>(),
                "residual": json::float(s.residual),
                "failure": s.failure,
            })
        })
        .collect();
    let ok = sum.passed == sum.samples;
    let result = json!({
        "bridge": problem.bridge.name(),
        "divisor": problem.divisor.to_string(),
        "eta": problem.eta.to_string(),
        "prescale": problem.prescale.as_ref().map(|(p, c)| json!({ "variable": w0.chart().var(*p), "factor": json::rational(c) })),
        "steps": cfg.steps,
        "tol": json::float(cfg.tol),
        "box": json::float(h),
        "samples": sum.samples,
        "passed": sum.passed,
        "max_residual": json::float(sum.max_residual),
        "max_moved_on_divisor": sum.max_moved_on_divisor.map(json::float),
        "min_det": json::float(sum.min_det),
        "failures": failures,
    });
    let mut text = format!(
        "bridge: {}\neta: {}\nsamples: {}, passed: {}\nmax residual: {:.3e} (tol {:.1e})\n",
        problem.bridge.name(),
        problem.eta,
        sum.samples,
        sum.passed,
        sum.max_residual,
        cfg.tol
    );
    if let Some(m) = sum.max_moved_on_divisor {
        text += &format!("max displacement on {{{} = 0}}: {m:.3e}\n", problem.divisor);
    }
    text += &format!("min det: {:.6}\n", sum.min_det);
    text += if ok { "verified\n" } else { "FAILED\n" };
    let mut o = Output::new(result, text);
    if !ok {
        o.status = Status::Failed;
    }
    Ok(o)
}

fn sigma22_text(method: &str, d: &Sigma22Data) -> String {
    let mut s = format!("{} (discriminant {}, by {method})\n", d.label.name(), d.discriminant);
    if let (Some(b), Some(h)) = (&d.b, &d.h) {
        s += &format!("b = {b}\nh = {h}\n");
    }
    s
}

fn classify(ctx: &mut Ctx, arg: &str) -> CmdResult<Output> {
    let w = ctx.form(arg)?;
    if w.degree() != 2 {
        return Err(format!("expected a 2-form, got a {}-form", w.degree()));
    }
    let (sigma, omega) = if w.dim() % 2 == 1 {
        let omega = match core(realizability(&w, 4, ctx.seed.unwrap_or(0)))? {
            Realizability::Realizable { omega, .. } => Some(omega),
            _ => None,
        };
        (Some(w), omega)
    } else {
        let md = core(martinet_core::invariants::martinet(&w))?;
        (md.sigma, Some(w))
    };
    let mut reports = Vec::new();
    let found = match sigma.as_ref().map(classify_sigma220) {
        Some(Ok(d)) => Some(("template", d)),
        _ => match &omega {
            Some(om) => {
                let r = core(full_report(om, &ctx.invariant_config()))?;
                reports.push(json::report(&r));
                r.sigma22.clone().map(|d| ("invariant", d))
            }
            None => None,
        },
    };
    let mut o = match found {
        Some((method, d)) => {
            let complex = if d.label == Sigma22Label::Parabolic { "degenerate" } else { "nondegenerate" };
            let mut v = json::sigma22(&d);
            v["method"] = json!(method);
            v["complex_label"] = json!(complex);
            Output::new(v, sigma22_text(method, &d))
        }
        None => {
            let mut o = Output::new(
                json!({ "label": null, "method": null }),
                "inconclusive: no Sigma22 data (needs n = 2 and sigma vanishing at 0)\n".into(),
            );
            o.status = Status::Inconclusive;
            o
        }
    };
    o.reports = reports;
    Ok(o)
}

fn harness(ctx: &mut Ctx, arg: Option<&str>, trials: u64) -> CmdResult<Output> {
    let defaults = HarnessConfig::default();
    let jet = ctx.jet.unwrap_or(defaults.jet);
    let w = match arg {
        Some(s) => ctx.form(s)?,
        None => {
            let chart = Chart::new(["p1", "x", "y", "z"]).map_err(|e| e.to_string())?;
            let expr = crate::dsl::parse_expr(OMEGA0).map_err(|e| e.to_string())?;
            let w = expr.eval(&chart, jet).map_err(|e| e.to_string())?;
            ctx.inputs.push(Input { file: None, chart, source: OMEGA0.into(), expr });
            w
        }
    };
    let cfg = HarnessConfig {
        trials,
        seed: ctx.seed.unwrap_or(defaults.seed),
        jet,
        equivalence: ctx.equivalence_config(),
        ..defaults
    };
    let rep = core(invariance_suite_with(&w, &cfg))?;
    let failures: Vec<Value> = rep
        .failures()
        .into_iter()
        .map(|(t, c, d)| json!({ "trial": t, "check": c, "detail": d }))
        .collect();
    let passed = rep.trials.iter().filter(|t| t.passed()).count();
    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    for t in &rep.trials {
        for (cat, outcome, thm) in &t.verdicts {
            *counts.entry(format!("{}:{}:{}", json::category_name(*cat), outcome.name(), thm)).or_default() += 1;
        }
    }
    let mut text = format!("seed: {}, jet: {}\ntrials: {}, passed: {passed}\n", rep.seed, rep.jet, rep.trials.len());
    for (k, n) in &counts {
        text += &format!("  {k}: {n}\n");
    }
    for f in &failures {
        text += &format!("FAIL trial {} {}: {}\n", f["trial"], f["check"].as_str().unwrap_or(""), f["detail"].as_str().unwrap_or(""));
    }
    let mut o = Output::new(
        json!({
            "seed": rep.seed,
            "jet": rep.jet,
            "trials": rep.trials.len(),
            "passed": passed,
            "failures": failures,
            "verdict_counts": counts,
        }),
        text,
    );
    if !rep.passed() {
        o.status = Status::Failed;
    }
    Ok(o)
}
