//! Command-line frontend.
//!
//! Exit codes: 0 success or pass, 1 an identity failed, 2 invalid input or a
//! numerical failure (divergence, pole, non-convergence).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::binomial::binom_real;
use crate::complex::{unit_circle, ComplexValue};
use crate::error::{Error, Result};
use crate::identities::{
    run_sweep, verify_bilateral_binomial, verify_bilateral_vandermonde, verify_binomial_theorem,
    verify_eq18, verify_gauss_2h2, verify_vandermonde_exact, BilateralVandermondeInstance,
    Eq18Instance, Eq18Variant, ExactVandermondeInstance, GaussParameters, IdentityKind,
    IdentityReport, SweepConfig, DEFAULT_TOLERANCE,
};
use crate::numerics::{gamma_ratio, GammaRatioSpec};
use crate::series::{
    bilateral_binomial_sum, eval_bilateral, Acceleration, BilateralSeriesSpec, TruncationPolicy,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bilateral",
    version,
    about = "Generalized binomials, Gamma brackets and bilateral hypergeometric series"
)]
struct Cli {
    /// Print JSON documents instead of plain values
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generalized binomial coefficient C(x, y)
    #[command(allow_negative_numbers = true)]
    Binom { x: f64, y: f64 },

    /// Gamma bracket prod Gamma(num) / prod Gamma(den)
    #[command(name = "gamma-ratio")]
    GammaRatio {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        num: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        den: Vec<f64>,
    },

    /// Bilateral series pHp[upper; lower; z] on the unit circle
    #[command(allow_negative_numbers = true)]
    Series {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        upper: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lower: Vec<f64>,
        #[command(flatten)]
        z: ZArgs,
        #[command(flatten)]
        policy: PolicyArgs,
    },

    /// sum_k C(x, y+k) z^(y+k)
    #[command(allow_negative_numbers = true)]
    Bbsum {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[command(flatten)]
        z: ZArgs,
        #[command(flatten)]
        policy: PolicyArgs,
    },

    /// Verify one identity at a parameter point
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),

    /// Run a seeded sweep described by a JSON config
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Also write the full JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ZArgs {
    /// z = e^(i theta)
    #[arg(long = "z-arg", conflicts_with_all = ["z_re", "z_im"])]
    z_arg: Option<f64>,
    #[arg(long = "z-re", requires = "z_im")]
    z_re: Option<f64>,
    #[arg(long = "z-im", requires = "z_re")]
    z_im: Option<f64>,
}

impl ZArgs {
    fn given(&self) -> bool {
        self.z_arg.is_some() || self.z_re.is_some()
    }

    fn value(&self) -> ComplexValue {
        match (self.z_arg, self.z_re, self.z_im) {
            (Some(theta), _, _) => unit_circle(theta),
            (None, Some(re), Some(im)) => ComplexValue::new(re, im),
            _ => ComplexValue::new(1.0, 0.0),
        }
    }
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// Relative truncation tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-half-width")]
    max_half_width: Option<u64>,
    #[arg(long = "allow-conditional")]
    allow_conditional: bool,
    /// Sum raw partial sums without tail correction
    #[arg(long = "no-tail-estimation")]
    no_tail_estimation: bool,
    #[arg(long, value_parser = ["none", "paired-aitken"])]
    acceleration: Option<String>,
}

impl PolicyArgs {
    fn policy(&self) -> Result<TruncationPolicy> {
        let mut p = TruncationPolicy::default();
        if let Some(tol) = self.tol {
            p.rel_tolerance = tol;
        }
        if let Some(n) = self.max_half_width {
            p.max_half_width = n;
        }
        p.allow_conditional = self.allow_conditional;
        p.tail_estimation = !self.no_tail_estimation;
        if self.acceleration.as_deref() == Some("paired-aitken") {
            p.acceleration = Acceleration::PairedAitken;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_parser = IdentityKind::ALL.map(|k| k.name()))]
    identity: String,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// One value, or a comma-separated list for binomial-theorem
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long)]
    y: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long = "M")]
    big_m: Option<f64>,
    #[arg(long = "M0")]
    m0: Option<f64>,
    #[arg(long, value_parser = ["as-printed", "sign-corrected"])]
    variant: Option<String>,
    /// Relative residual accepted as a pass
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[command(flatten)]
    z: ZArgs,
    #[command(flatten)]
    policy: PolicyArgs,
}

impl VerifyArgs {
    fn given(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        for (name, set) in [
            ("n", self.n.is_some()),
            ("m", self.m.is_some()),
            ("p", self.p.is_some()),
            ("x", !self.x.is_empty()),
            ("y", self.y.is_some()),
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("c", self.c.is_some()),
            ("d", self.d.is_some()),
            ("K", self.k.is_some()),
            ("M", self.big_m.is_some()),
            ("M0", self.m0.is_some()),
            ("variant", self.variant.is_some()),
            ("z", self.z.given()),
        ] {
            if set {
                names.push(name);
            }
        }
        names
    }

    fn check_flags(&self, kind: IdentityKind, allowed: &[&str]) -> Result<()> {
        if let Some(extra) = self.given().into_iter().find(|f| !allowed.contains(f)) {
            return Err(Error::InvalidArgument(format!(
                "--{extra} does not apply to {}",
                kind.name()
            )));
        }
        Ok(())
    }

    fn run(&self) -> Result<IdentityReport> {
        let kind: IdentityKind = self.identity.parse()?;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidArgument(format!("{} needs --{name}", kind.name())))
        };
        let tol = self.tolerance;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        match kind {
            IdentityKind::BinomialTheorem => {
                self.check_flags(kind, &["n", "x"])?;
                let n = non_negative_integer(need(self.n, "n")?, "n")?;
                if self.x.is_empty() {
                    return Err(Error::InvalidArgument("binomial-theorem needs --x".into()));
                }
                let xs = self
                    .x
                    .iter()
                    .map(|&x| integer(x, "x"))
                    .collect::<Result<Vec<_>>>()?;
                Ok(verify_binomial_theorem(n, &xs))
            }
            IdentityKind::VandermondeExact => {
                self.check_flags(kind, &["n", "m", "p"])?;
                let inst = ExactVandermondeInstance::new(
                    non_negative_integer(need(self.n, "n")?, "n")?,
                    integer(need(self.m, "m")?, "m")?,
                    non_negative_integer(need(self.p, "p")?, "p")?,
                )?;
                Ok(verify_vandermonde_exact(inst))
            }
            IdentityKind::BilateralBinomial => {
                self.check_flags(kind, &["x", "y", "z"])?;
                let x = match self.x.as_slice() {
                    [x] => *x,
                    _ => {
                        return Err(Error::InvalidArgument(
                            "bilateral-binomial needs a single --x".into(),
                        ))
                    }
                };
                verify_bilateral_binomial(
                    x,
                    need(self.y, "y")?,
                    self.z.value(),
                    &self.policy.policy()?,
                    tol,
                )
            }
            IdentityKind::Gauss2H2 => {
                self.check_flags(kind, &["a", "b", "c", "d"])?;
                let params = GaussParameters::new(
                    need(self.a, "a")?,
                    need(self.b, "b")?,
                    need(self.c, "c")?,
                    need(self.d, "d")?,
                );
                verify_gauss_2h2(params, &self.policy.policy()?, tol)
            }
            IdentityKind::BilateralVandermonde => {
                self.check_flags(kind, &["n", "p", "K", "M0"])?;
                let inst = BilateralVandermondeInstance::new(
                    need(self.n, "n")?,
                    need(self.p, "p")?,
                    need(self.k, "K")?,
                    need(self.m0, "M0")?,
                );
                verify_bilateral_vandermonde(inst, &self.policy.policy()?, tol)
            }
            IdentityKind::Eq18 => {
                self.check_flags(kind, &["n", "p", "K", "M", "variant"])?;
                let variant = match &self.variant {
                    Some(v) => v.parse()?,
                    None => Eq18Variant::default(),
                };
                let inst = Eq18Instance::new(
                    need(self.n, "n")?,
                    need(self.p, "p")?,
                    need(self.k, "K")?,
                    need(self.big_m, "M")?,
                    variant,
                );
                verify_eq18(inst, &self.policy.policy()?, tol)
            }
        }
    }
}

fn integer(v: f64, name: &str) -> Result<i64> {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        Ok(v as i64)
    } else {
        Err(Error::InvalidArgument(format!(
            "--{name} must be an integer, got {v}"
        )))
    }
}

fn non_negative_integer(v: f64, name: &str) -> Result<u64> {
    match integer(v, name)? {
        i if i >= 0 => Ok(i as u64),
        i => Err(Error::InvalidArgument(format!(
            "--{name} must be non-negative, got {i}"
        ))),
    }
}

/// Shortest round-trip decimal; scientific notation outside `[1e-5, 1e16)`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn format_complex(z: ComplexValue) -> String {
    if z.im == 0.0 {
        format_float(z.re)
    } else {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!(
            "{} {sign} {}i",
            format_float(z.re),
            format_float(z.im.abs())
        )
    }
}

/// Pretty JSON with sorted keys; re-serializing the parsed text reproduces it.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    serde_json::to_string_pretty(&v).expect("serializable")
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn out(code: i32, stdout: String) -> Self {
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: &Error) -> Self {
        Self {
            code: EXIT_ERROR,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

fn report_line(r: &IdentityReport) -> String {
    let verdict = if r.passed { "PASS" } else { "FAIL" };
    let variant = r
        .variant
        .as_ref()
        .map(|v| format!(" ({v})"))
        .unwrap_or_default();
    let mut line = format!(
        "{verdict} {}{variant}: lhs = {}, rhs = {}, rel_residual = {}",
        r.identity,
        format_complex(r.lhs),
        format_complex(r.rhs),
        format_float(r.rel_residual)
    );
    if let Some(e) = &r.error {
        line.push_str(&format!(", error: {e}"));
    }
    line
}

fn run(cli: Cli) -> Result<Outcome> {
    let json = cli.json;
    match cli.command {
        Command::Binom { x, y } => {
            let v = binom_real(x, y)?;
            Ok(Outcome::out(
                EXIT_OK,
                if json {
                    canonical_json(&serde_json::json!({ "x": x, "y": y, "value": v }))
                } else {
                    format_float(v)
                },
            ))
        }
        Command::GammaRatio { num, den } => {
            let spec = GammaRatioSpec::new(num, den);
            let v = gamma_ratio(&spec)?;
            let value = v.try_to_f64()?;
            Ok(Outcome::out(
                EXIT_OK,
                if json {
                    canonical_json(&serde_json::json!({
                        "numerator": spec.numerator,
                        "denominator": spec.denominator,
                        "sign": v.sign(),
                        "log_magnitude": v.log_magnitude(),
                        "value": value,
                    }))
                } else {
                    format_float(value)
                },
            ))
        }
        Command::Series {
            upper,
            lower,
            z,
            policy,
        } => {
            let r = eval_bilateral(
                &BilateralSeriesSpec::new(upper, lower, z.value()),
                &policy.policy()?,
            )?;
            let code = if r.converged { EXIT_OK } else { EXIT_ERROR };
            let text = if json {
                canonical_json(&r)
            } else {
                format_complex(r.value)
            };
            let mut out = Outcome::out(code, text);
            if !r.converged {
                out.stderr = format!("error: not converged after {} terms\n", r.terms_used);
            }
            Ok(out)
        }
        Command::Bbsum { x, y, z, policy } => {
            let r = bilateral_binomial_sum(x, y, z.value(), &policy.policy()?)?;
            let code = if r.converged { EXIT_OK } else { EXIT_ERROR };
            let text = if json {
                canonical_json(&r)
            } else {
                format_complex(r.value)
            };
            let mut out = Outcome::out(code, text);
            if !r.converged {
                out.stderr = format!("error: not converged after {} terms\n", r.terms_used);
            }
            Ok(out)
        }
        Command::Verify(args) => {
            let r = args.run()?;
            let converged = r.diagnostics.iter().all(|d| d.result.converged);
            let code = match (converged, r.passed) {
                (false, _) => EXIT_ERROR,
                (true, true) => EXIT_OK,
                (true, false) => EXIT_FAILED,
            };
            let text = if json {
                canonical_json(&r)
            } else {
                report_line(&r)
            };
            let mut out = Outcome::out(code, text);
            if !converged {
                out.stderr = "error: a series did not converge\n".into();
            }
            Ok(out)
        }
        Command::Sweep { config, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
            let report = run_sweep(&SweepConfig::from_json(&text)?)?;
            if let Some(path) = out {
                std::fs::write(&path, report.to_json() + "\n")
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            }
            let code = if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_FAILED
            };
            let text = if json {
                report.to_json()
            } else {
                format!(
                    "{} {}: {}/{} passed, {} errors, worst rel_residual = {}",
                    if report.all_passed() { "PASS" } else { "FAIL" },
                    report.config.identity.name(),
                    report.pass_count,
                    report.case_count,
                    report.error_count,
                    format_float(report.worst_rel_residual)
                )
            };
            Ok(Outcome::out(code, text))
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn dispatch<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_ERROR,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::out(EXIT_OK, text.trim_end().to_owned())
            };
        }
    };
    let mut outcome = run(cli).unwrap_or_else(|e| Outcome::error(&e));
    if !outcome.stdout.is_empty() && !outcome.stdout.ends_with('\n') {
        outcome.stdout.push('\n');
    }
    outcome
}
