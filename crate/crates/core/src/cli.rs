//! Command-line front end.
//!
//! Every command prints a report either as an aligned text table or as JSON.
//! Verification results appear as `PASS`/`FAIL` lines; the exit code is 0
//! only when every requested verification passes.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::bundle::{
    brute_force_sup_psi_with_budget, harder_narasimhan, optimal_weights, phi, psi_flag, BundleSpec,
    FlagData, DEFAULT_SEARCH_BUDGET,
};
use crate::embed::{
    density_convergence, geometric_t_grid, holder_chain, moment_bound_check, DegenerationExample,
    InvariantMetricCP1, MetricSpec, Quadrature,
};
use crate::exact::{fit_polynomial, leading_coefficient, Rational, DEFAULT_GUARD};
use crate::test_config::{
    invariants_with_fits, lower_bound_report, ConfigInvariants, PsiHatBranch, WeightSpectrum,
};
use crate::toric::{
    exact_integral, mean_value, n_infinity, verify_trace_asymptotics, volume, weight_spectrum,
    LatticePolytope, PLConvexFunction, ResidualSeries,
};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "STABILITY_LAB_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "stability-lab",
    version,
    about = "Lower bounds on the Calabi functional from flags, test configurations and moment matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    /// Run the verification suite for the command.
    #[arg(long, global = true)]
    pub verify: bool,
    /// Relative tolerance for numerical quadrature.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Harder–Narasimhan flag, Φ and optimal weights of a direct sum of stable bundles.
    Bundle(BundleArgs),
    /// Test-configuration invariants from a weight spectrum or toric data.
    Config(ConfigArgs),
    /// Lattice sums and exact integrals for a polytope with a PL convex function.
    Toric(ToricArgs),
    /// Moment-matrix checks on named examples.
    Embed(EmbedArgs),
}

#[derive(Debug, Args)]
pub struct BundleArgs {
    /// BundleSpec JSON file.
    pub input: PathBuf,
    /// Weight bound for the exhaustive search (default: sufficient bound).
    #[arg(long)]
    pub bound: Option<i64>,
    /// Maximum number of weight vectors the search may evaluate.
    #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
    pub budget: u128,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Weight-spectrum JSON, or `{"polytope": …, "function": …}`.
    pub input: PathBuf,
    /// Comma-separated even exponents p (or `inf` for toric input).
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub p: Vec<PSpec>,
    #[arg(long)]
    pub k_min: Option<i64>,
    #[arg(long)]
    pub k_max: Option<i64>,
}

#[derive(Debug, Args)]
pub struct ToricArgs {
    /// `{"polytope": …, "function": …}` JSON file.
    pub input: PathBuf,
    /// Comma-separated exponents r for the centered integrals (or `inf`).
    #[arg(long, value_delimiter = ',', default_value = "2,4,inf")]
    pub p: Vec<PSpec>,
    #[arg(long, default_value_t = 1)]
    pub k_min: i64,
    #[arg(long, default_value_t = 12)]
    pub k_max: i64,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// conic-a, conic-b, conic-trivial, round or perturbed.
    pub example: String,
    /// Metric JSON `{"epsilon": ε, "resolution": levels}` for `perturbed`.
    #[arg(long)]
    pub metric: Option<PathBuf>,
    /// Perturbation size for `perturbed` when no metric file is given.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub epsilon: f64,
    /// Initial subdivision level for metric quadrature.
    #[arg(long)]
    pub resolution: Option<u32>,
    #[arg(long, default_value_t = 4)]
    pub k_min: u32,
    #[arg(long, default_value_t = 12)]
    pub k_max: u32,
    /// Exponent p for the generator norm (conics) or the Hölder pair (metrics).
    #[arg(long, default_value = "2")]
    pub p: PSpec,
    /// Schatten exponent q for the moment-matrix norm (metrics).
    #[arg(long, default_value = "2")]
    pub q: PSpec,
}

/// An exponent: a positive number or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PSpec {
    Finite(f64),
    Infinity,
}

impl PSpec {
    pub fn as_f64(self) -> f64 {
        match self {
            PSpec::Finite(p) => p,
            PSpec::Infinity => f64::INFINITY,
        }
    }

    fn as_even(self) -> Option<u32> {
        match self {
            PSpec::Finite(p) if p.fract() == 0.0 && p >= 2.0 && (p as u32).is_multiple_of(2) => {
                Some(p as u32)
            }
            _ => None,
        }
    }
}

impl FromStr for PSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" => Ok(PSpec::Infinity),
            t => match t.parse::<f64>() {
                Ok(p) if p >= 1.0 && p.is_finite() => Ok(PSpec::Finite(p)),
                _ => Err(format!("expected a number >= 1 or `inf`, got {t:?}")),
            },
        }
    }
}

impl fmt::Display for PSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PSpec::Finite(p) => write!(f, "{p}"),
            PSpec::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// A command's output: ordered fields, free-form notes and checks.
#[derive(Debug, Default)]
pub struct Report {
    pub title: String,
    pub fields: Vec<(String, Value)>,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(title: &str) -> Self {
        Report {
            title: title.to_string(),
            ..Default::default()
        }
    }

    fn field(&mut self, name: &str, value: impl Into<Value>) {
        self.fields.push((name.to_string(), value.into()));
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let fields: Map<String, Value> = self.fields.iter().cloned().collect();
        json!({
            "command": self.title,
            "results": fields,
            "notes": self.notes,
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name, "pass": c.pass, "detail": c.detail
            })).collect::<Vec<_>>(),
            "all_pass": self.all_pass(),
        })
    }

    pub fn to_table(&self) -> String {
        let width = self
            .fields
            .iter()
            .map(|(k, _)| k.chars().count())
            .max()
            .unwrap_or(0);
        let mut out = format!("== {} ==\n", self.title);
        for (k, v) in &self.fields {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k:<width$}  {text}\n"));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        for c in &self.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {}: {}\n", c.name, c.detail));
        }
        out
    }
}

/// Parses arguments, runs the command and writes the report.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(report) => {
            let text = match cli.format {
                Format::Table => report.to_table(),
                Format::Json => {
                    serde_json::to_string_pretty(&report.to_json()).expect("serializable") + "\n"
                }
            };
            let _ = out.write_all(text.as_bytes());
            if report.all_pass() {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Fails only if the pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

pub fn execute(cli: &Cli) -> Result<Report, String> {
    let quad = match cli.tolerance {
        Some(t) if t > 0.0 && t.is_finite() => Quadrature::with_tolerance(t),
        Some(t) => return Err(format!("tolerance must be positive, got {t}")),
        None => Quadrature::default(),
    };
    match &cli.command {
        Command::Bundle(a) => cmd_bundle(a, cli.verify),
        Command::Config(a) => cmd_config(a, cli.verify),
        Command::Toric(a) => cmd_toric(a, cli.verify),
        Command::Embed(a) => cmd_embed(a, &quad),
    }
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn decode<T: for<'de> Deserialize<'de>>(value: Value, path: &Path) -> Result<T, String> {
    serde_json::from_value(value).map_err(|e| format!("invalid input in {}: {e}", path.display()))
}

fn flag_json(flag: &FlagData) -> Value {
    Value::String(
        flag.quotients()
            .iter()
            .map(|q| format!("(r={}, d={}, mu={})", q.rank, q.degree, q.slope()))
            .collect::<Vec<_>>()
            .join(" > "),
    )
}

fn text(v: impl ToString) -> Value {
    Value::String(v.to_string())
}

pub fn cmd_bundle(a: &BundleArgs, verify: bool) -> Result<Report, String> {
    let spec: BundleSpec = decode(read_json(&a.input)?, &a.input)?;
    let hn = harder_narasimhan(&spec).map_err(|e| e.to_string())?;
    let phi_hn = phi(&hn).map_err(|e| e.to_string())?;
    let mut r = Report::new("bundle");
    r.field("pieces", spec.piece_count());
    r.field("harder_narasimhan", flag_json(&hn));
    r.field("phi", text(&phi_hn.value));
    r.field("phi_squared", text(&phi_hn.radicand));
    if hn.len() == 1 {
        r.note("semistable: trivial bound only");
    }
    match optimal_weights(&hn) {
        Ok(w) => {
            let psi = psi_flag(&hn, &w).map_err(|e| e.to_string())?;
            r.field("optimal_weights", json!(w.0));
            r.field("psi_at_optimal_weights", text(&psi));
        }
        Err(e) => r.field("optimal_weights", text(format!("none ({e})"))),
    }
    if verify {
        let bound = a.bound.unwrap_or_else(|| spec.sufficient_weight_bound());
        let sup =
            brute_force_sup_psi_with_budget(&spec, bound, a.budget).map_err(|e| e.to_string())?;
        r.field("weight_bound", bound);
        r.field("search_flags", sup.flags_examined);
        r.field("search_evaluations", text(sup.evaluations));
        r.field("sup_psi", text(&sup.value));
        r.field("sup_flag", flag_json(&sup.flag));
        r.field("sup_weights", json!(sup.weights.0));
        let pass = sup.value == phi_hn.value;
        r.check(
            "sup-psi-equals-phi",
            pass,
            format!("max Psi = {} vs Phi(HN) = {}", sup.value, phi_hn.value),
        );
    }
    Ok(r)
}

/// Toric input: a polytope together with a PL convex function.
#[derive(Debug, Clone, Deserialize)]
pub struct ToricInput {
    pub polytope: LatticePolytope,
    pub function: PLConvexFunction,
}

fn invariant_fields(r: &mut Report, inv: &ConfigInvariants, p_even: &[u32]) {
    r.field("n", inv.n);
    r.field("r", inv.r);
    r.field("a0", text(&inv.a0));
    r.field("a1", text(&inv.a1));
    r.field("b0", text(&inv.b0));
    r.field("b1", text(&inv.b1));
    r.field("Q", text(&inv.q));
    for (p, v) in &inv.np_pow_p {
        r.field(&format!("N{p}^{p}"), text(v));
    }
    r.field("futaki", text(&inv.futaki));
    r.field("psi", text(&inv.psi));
    for (p, v) in &inv.psi_hat {
        r.field(&format!("psi_hat_{p}"), text(v));
    }
    let n2 = inv.n2_squared();
    let printed = inv.n2_squared_printed();
    r.field("N2^2 [Q - b0^2/a0]", text(&n2));
    if n2 != printed {
        r.field("N2^2 [Q - b1^2/a0, not used]", text(&printed));
        r.note(
            "the two N2^2 formulas differ on this data; the centered second moment \
             is Q - b0^2/a0, which is the value used",
        );
    }
    let rep = lower_bound_report(inv, p_even);
    r.field("s_hat", text(&rep.s_hat));
    r.field("trivial_bound", text(&rep.trivial_bound));
    for b in &rep.branches {
        match b {
            PsiHatBranch::Bound { p, psi_hat } => {
                r.field(&format!("bound_p{p}"), text(psi_hat));
            }
            PsiHatBranch::Vacuous { p } => {
                r.field(&format!("bound_p{p}"), text("vacuous (F >= 0)"))
            }
            PsiHatBranch::Undefined { p } => {
                r.field(&format!("bound_p{p}"), text("undefined (N_p = 0)"))
            }
        }
    }
    if let Some(c) = &rep.combined_bound {
        r.field("combined_bound", text(c));
    }
    if let (Ok(nu), Ok(sup)) = (inv.optimal_nu(), inv.sup_twisted_psi()) {
        r.field("optimal_twist", text(&nu));
        r.field("sup_twisted_psi", text(&sup));
    }
}

fn split_exponents(ps: &[PSpec]) -> Result<(Vec<u32>, bool), String> {
    let mut even = Vec::new();
    let mut inf = false;
    for &p in ps {
        match p {
            PSpec::Infinity => inf = true,
            other => even.push(
                other
                    .as_even()
                    .ok_or_else(|| format!("p = {other} is not a positive even integer"))?,
            ),
        }
    }
    Ok((even, inf))
}

const TRACE_LABEL_NOTE: &str = "trace_oracle is the k^(n+1) coefficient of Tr A_k: b0 in the \
     trace expansion, written b1 in some statements of the leading-term asymptotics";

fn residual_fields(r: &mut Report, name: &str, s: &ResidualSeries) {
    r.field(&format!("{name}_oracle"), text(&s.oracle));
    if let Some(last) = s.rows.last() {
        r.field(
            &format!("{name}_residual_at_k{}", last.k),
            text(&last.residual),
        );
    }
    r.field(&format!("{name}_C"), text(&s.constant));
    r.field(
        &format!("{name}_loglog_slope"),
        s.log_log_slope.map_or(Value::Null, Value::from),
    );
}

fn rate_check(r: &mut Report, name: &str, s: &ResidualSeries) {
    match s.log_log_slope {
        Some(slope) => r.check(
            name,
            slope <= -0.9,
            format!(
                "residuals decay like k^{slope:.3} (need <= -0.9); C = {}",
                s.constant
            ),
        ),
        None => r.check(name, true, "residuals vanish identically"),
    }
}

pub fn cmd_config(a: &ConfigArgs, verify: bool) -> Result<Report, String> {
    let value = read_json(&a.input)?;
    let (p_even, want_inf) = split_exponents(&a.p)?;
    let mut r = Report::new("config");
    let is_toric = value.get("polytope").is_some();
    if is_toric {
        let input: ToricInput = decode(value, &a.input)?;
        let n = input.polytope.dim() as i64;
        let max_p = p_even.iter().copied().max().unwrap_or(2).max(2) as i64;
        let k_min = a.k_min.unwrap_or(1);
        let k_max = a
            .k_max
            .unwrap_or(k_min + n + max_p + DEFAULT_GUARD as i64 + 1);
        let spectrum = weight_spectrum(&input.polytope, &input.function, k_min, k_max)
            .map_err(|e| e.to_string())?;
        let (inv, _) =
            invariants_with_fits(&spectrum, &p_even, DEFAULT_GUARD).map_err(|e| e.to_string())?;
        r.field("source", text(source_label(&input.function)));
        r.field("k_range", text(format!("{k_min}..={k_max}")));
        invariant_fields(&mut r, &inv, &p_even);
        if want_inf {
            let ninf = n_infinity(&input.polytope, &input.function).map_err(|e| e.to_string())?;
            r.field("N_inf", text(&ninf));
        }
        if verify {
            for &p in &p_even {
                let oracle = exact_integral(&input.polytope, &input.function, p, true)
                    .map_err(|e| e.to_string())?;
                let got = &inv.np_pow_p[&p];
                r.check(
                    &format!("np-oracle-p{p}"),
                    got == &oracle,
                    format!("N{p}^{p} = {got}, integral of (f - f_hat)^{p} = {oracle}"),
                );
            }
            let mean = exact_integral(&input.polytope, &input.function, 1, false)
                .map_err(|e| e.to_string())?;
            r.check(
                "trace-leading-coefficient",
                inv.b0 == mean,
                format!(
                    "k^(n+1) coefficient of Tr A_k = {}, integral of f = {mean}",
                    inv.b0
                ),
            );
            let rep =
                verify_trace_asymptotics(&input.polytope, &input.function, 2, k_min.max(1), k_max)
                    .map_err(|e| e.to_string())?;
            residual_fields(&mut r, "trace", &rep.uncentered);
            r.note(TRACE_LABEL_NOTE);
            residual_fields(&mut r, "centered2", &rep.centered);
            rate_check(&mut r, "trace-rate", &rep.uncentered);
            rate_check(&mut r, "centered2-rate", &rep.centered);
        }
    } else {
        if want_inf {
            return Err("p = inf needs toric input".into());
        }
        let mut spectrum: WeightSpectrum = decode(value, &a.input)?;
        if a.k_min.is_some() || a.k_max.is_some() {
            let lo = a.k_min.unwrap_or(i64::MIN);
            let hi = a.k_max.unwrap_or(i64::MAX);
            spectrum.weights.retain(|k, _| (lo..=hi).contains(k));
        }
        let (inv, _) =
            invariants_with_fits(&spectrum, &p_even, DEFAULT_GUARD).map_err(|e| e.to_string())?;
        let (k_lo, k_hi) = spectrum.k_range().expect("validated");
        r.field("source", text("weight spectrum"));
        r.field("k_range", text(format!("{k_lo}..={k_hi}")));
        invariant_fields(&mut r, &inv, &p_even);
        if verify {
            for &p in &p_even {
                let target = &inv.np_pow_p[&p];
                let resid = |k: i64| {
                    let t = spectrum.centered_trace(k, p).expect("k in range");
                    let scale = Rational::from(k)
                        .pow(inv.n as i32 + p as i32)
                        .expect("k > 0");
                    (t / scale - target).abs()
                };
                let (e_lo, e_hi) = (resid(k_lo), resid(k_hi));
                r.check(
                    &format!("np-consistency-p{p}"),
                    e_hi <= e_lo,
                    format!(
                        "|Tr A_k^{p}/k^(n+{p}) - N{p}^{p}| = {:.3e} at k={k_lo}, {:.3e} at k={k_hi}",
                        e_lo.to_f64(),
                        e_hi.to_f64()
                    ),
                );
            }
        }
    }
    Ok(r)
}

fn source_label(f: &PLConvexFunction) -> &'static str {
    if f.pieces.len() == 1 {
        "product configuration"
    } else {
        "toric degeneration data"
    }
}

pub fn cmd_toric(a: &ToricArgs, verify: bool) -> Result<Report, String> {
    let input: ToricInput = decode(read_json(&a.input)?, &a.input)?;
    let (p, f) = (&input.polytope, &input.function);
    f.validate(p.dim()).map_err(|e| e.to_string())?;
    let (rs, want_inf) = split_exponents(&a.p)?;
    if a.k_min < 1 || a.k_max < a.k_min {
        return Err(format!("invalid k-range {}..={}", a.k_min, a.k_max));
    }
    let mut r = Report::new("toric");
    r.field("n", p.dim());
    r.field("vertices", json!(p.vertices()));
    r.field("source", text(source_label(f)));
    let vol = volume(p);
    r.field("volume", text(&vol));

    let counts: Vec<(i64, Rational)> = (a.k_min..=a.k_max)
        .map(|k| (k, Rational::from(p.lattice_points(k).len())))
        .collect();
    let ehrhart = fit_polynomial(&counts, p.dim(), DEFAULT_GUARD).map_err(|e| e.to_string())?;
    r.field("ehrhart_polynomial", text(&ehrhart));

    let integral = exact_integral(p, f, 1, false).map_err(|e| e.to_string())?;
    r.field("integral_f", text(&integral));
    r.field("f_hat", text(mean_value(p, f).map_err(|e| e.to_string())?));
    for &k in &rs {
        let v = exact_integral(p, f, k, true).map_err(|e| e.to_string())?;
        r.field(&format!("integral_(f-f_hat)^{k}"), text(&v));
    }
    if want_inf {
        r.field("N_inf", text(n_infinity(p, f).map_err(|e| e.to_string())?));
    }
    let idle = f.idle_pieces(p, 2);
    if !idle.is_empty() {
        r.note(format!("pieces {idle:?} never attain the maximum on 2P"));
    }

    if verify {
        let lead = leading_coefficient(&ehrhart, p.dim()).map_err(|e| e.to_string())?;
        r.check(
            "ehrhart-volume",
            lead == vol,
            format!("leading Ehrhart coefficient {lead}, volume {vol}"),
        );
        let spectrum = weight_spectrum(p, f, a.k_min, a.k_max).map_err(|e| e.to_string())?;
        match invariants_with_fits(&spectrum, &rs, DEFAULT_GUARD) {
            Ok((inv, _)) => {
                for &k in &rs {
                    let oracle = exact_integral(p, f, k, true).map_err(|e| e.to_string())?;
                    r.check(
                        &format!("np-oracle-p{k}"),
                        inv.np_pow_p[&k] == oracle,
                        format!("N{k}^{k} = {}, exact integral = {oracle}", inv.np_pow_p[&k]),
                    );
                }
            }
            Err(e) => r.check("np-oracle", false, e.to_string()),
        }
        for &k in rs.iter().take(1) {
            let rep =
                verify_trace_asymptotics(p, f, k, a.k_min, a.k_max).map_err(|e| e.to_string())?;
            residual_fields(&mut r, "trace", &rep.uncentered);
            r.note(TRACE_LABEL_NOTE);
            residual_fields(&mut r, &format!("centered{k}"), &rep.centered);
            rate_check(&mut r, "trace-rate", &rep.uncentered);
            rate_check(&mut r, &format!("centered{k}-rate"), &rep.centered);
        }
    }
    Ok(r)
}

pub fn cmd_embed(a: &EmbedArgs, quad: &Quadrature) -> Result<Report, String> {
    match a.example.as_str() {
        "round" | "perturbed" => embed_metric(a, quad),
        name => {
            let ex = DegenerationExample::by_name(name).map_err(|e| e.to_string())?;
            embed_degeneration(&ex, a, quad)
        }
    }
}

fn embed_degeneration(
    ex: &DegenerationExample,
    a: &EmbedArgs,
    quad: &Quadrature,
) -> Result<Report, String> {
    let mut r = Report::new("embed");
    r.field("example", text(&ex.name));
    r.field("generator", json!(ex.weights));
    let fch = ex.fch(quad).map_err(|e| e.to_string())?;
    r.field("limit_cycle_volume", fch.volume);
    r.field("hamiltonian_integral", fch.integral);
    r.field("fch", fch.fch);
    if let Some(want) = ex.analytic_fch {
        let gap = (fch.fch - want).abs();
        r.check(
            "fch",
            gap <= 1e-6,
            format!("FCh = {:.12}, analytic {want:.12}, gap {gap:.2e}", fch.fch),
        );
    }

    let m = ex.curve.m_matrix(quad).map_err(|e| e.to_string())?;
    let deg = ex.curve.degree() as f64;
    r.field("trace_M", m.trace());
    r.check(
        "trace-M",
        (m.trace() - deg).abs() <= 1e-8,
        format!("Tr M = {:.12}, volume {deg}", m.trace()),
    );

    let grid = geometric_t_grid(1e-3, 20);
    let mono = ex
        .monotonicity_check(&grid, 1e-9, quad)
        .map_err(|e| e.to_string())?;
    r.field("t_grid", json!(mono.t));
    r.field("f_t", json!(mono.values));
    r.field("f_at_one", mono.f_at_one);
    r.field("extrapolated_limit", mono.extrapolated_limit);
    r.check(
        "monotone",
        mono.monotone,
        format!("largest decrease {:.3e}", mono.largest_drop.max(0.0)),
    );
    r.check(
        "limit",
        mono.limit_gap <= 1e-2,
        format!(
            "f(0) ~ {:.6}, -FCh = {:.6}, gap {:.2e}",
            mono.extrapolated_limit, -mono.fch, mono.limit_gap
        ),
    );
    r.check(
        "lower-bound",
        mono.lower_bound_holds,
        format!(
            "Tr(A M) at t=1 is {:.6} >= -FCh = {:.6}",
            mono.f_at_one, -mono.fch
        ),
    );
    let sb = ex
        .schatten_bound_check(a.p.as_f64(), quad)
        .map_err(|e| e.to_string())?;
    r.field("norm_A_p", sb.a_norm);
    r.field("norm_M_q", sb.m_norm);
    r.check(
        "schatten-bound",
        sb.holds(1e-9),
        format!(
            "||M||_{:.4} = {:.6} >= max(-FCh, f(1))/||A||_{} = {:.6}",
            sb.q, sb.m_norm, a.p, sb.bound
        ),
    );
    Ok(r)
}

fn embed_metric(a: &EmbedArgs, quad: &Quadrature) -> Result<Report, String> {
    let mut metric = if a.example == "round" {
        InvariantMetricCP1::round()
    } else {
        let spec = match &a.metric {
            Some(path) => decode::<MetricSpec>(read_json(path)?, path)?,
            None => MetricSpec {
                epsilon: a.epsilon,
                resolution: 3,
            },
        };
        InvariantMetricCP1::from_spec(&spec).map_err(|e| e.to_string())?
    };
    if let Some(res) = a.resolution {
        metric = metric.with_resolution(res);
    }
    let metric = metric.with_quadrature(*quad);
    if a.k_min < 1 || a.k_max < a.k_min {
        return Err(format!("invalid k-range {}..={}", a.k_min, a.k_max));
    }
    let ks: Vec<u32> = (a.k_min..=a.k_max).collect();
    let round = a.example == "round";
    let mut r = Report::new("embed");
    r.field("example", text(&a.example));

    let (int_s, int_sx) = metric.topological_integrals().map_err(|e| e.to_string())?;
    r.field("integral_S", int_s);
    r.field("integral_S_x", int_sx);
    r.check(
        "topological-integrals",
        (int_s - 1.0).abs() <= 1e-8 && (int_sx - 0.5).abs() <= 1e-8,
        format!("integral S = {int_s:.12}, integral S x = {int_sx:.12}"),
    );

    let dos = density_convergence(&metric, &ks).map_err(|e| e.to_string())?;
    let worst_norm = dos
        .rows
        .iter()
        .map(|row| (row.integral - (row.k as f64 + 1.0)).abs())
        .fold(0.0, f64::max);
    r.check(
        "density-normalization",
        worst_norm <= 1e-8,
        format!("max |integral rho_k - (k+1)| = {worst_norm:.2e}"),
    );
    r.field(
        "sup_eta_minus_S",
        json!(dos
            .rows
            .iter()
            .map(|row| json!({"k": row.k, "error": row.sup_error}))
            .collect::<Vec<_>>()),
    );
    if round {
        let worst = ks
            .iter()
            .map(|&k| {
                metric
                    .density_of_states(k)
                    .map(|d| d.sup_distance_to_constant(k as f64 + 1.0))
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?
            .into_iter()
            .fold(0.0, f64::max);
        r.check(
            "round-density",
            worst <= 1e-8,
            format!("max |rho_k - (k+1)| = {worst:.2e}"),
        );
    } else {
        r.field("density_fitted_C", dos.fitted_c);
        r.check(
            "density-decreasing",
            dos.decreasing,
            format!("sup |eta_k - S| <= C/k with C = {:.4}", dos.fitted_c),
        );
    }

    let p = a.p.as_f64();
    let hold = holder_chain(&metric, p).map_err(|e| e.to_string())?;
    r.check(
        "holder",
        hold.holds(1e-8),
        format!(
            "integral (S - S_hat) H / ||H - H_hat||_{} = {:.3e} <= ||S - S_hat||_{:.4} = {:.6}",
            a.p, hold.lhs, hold.q, hold.rhs
        ),
    );

    let q = a.q.as_f64();
    let mb = moment_bound_check(&metric, &ks, q, 1e-10).map_err(|e| e.to_string())?;
    r.field("curvature_deviation_Lq", mb.curvature_norm);
    r.field(
        "scaled_moment_norms",
        json!(mb
            .rows
            .iter()
            .map(|row| json!({"k": row.k, "value": row.scaled_norm}))
            .collect::<Vec<_>>()),
    );
    if round {
        let worst = mb.rows.iter().map(|row| row.norm).fold(0.0, f64::max);
        r.check(
            "moment-matrix-vanishes",
            worst <= 1e-10,
            format!("max ||M||_q = {worst:.2e}"),
        );
    } else {
        r.field("moment_bound_fitted_C", mb.fitted_c);
        r.check(
            "moment-bound",
            mb.holds,
            format!(
                "||M||_q k^(1-1/q) <= {:.6} + C/k, C = {:.4} fitted on k in {:?}",
                mb.curvature_norm, mb.fitted_c, mb.fit_ks
            ),
        );
    }
    Ok(r)
}
