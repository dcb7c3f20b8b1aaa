use clap::{Args, Parser, Subcommand};
use matbeta::error::{Error, Result};
use matbeta::fixtures::{example, ExampleId};
use matbeta::hyper::SeriesControl;
use matbeta::manova::{
    f_statistic, matrix_p_value, sums_of_squares, CriteriaReport, Decision, HypothesisSpec, LinearModel, SsMatrices,
};
use matbeta::mc::{estimate_probs, McConfig};
use matbeta::report::{self, Inputs, McReport, Report, SCHEMA_VERSION, TAIL_NOTE};
use matbeta::specfun::AlgebraParam;
use matbeta::symmat::{Matrix, SymMatrix};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

const MAX_DEGREE_ENV: &str = "MATBETA_MAX_DEGREE";

#[derive(Parser)]
#[command(name = "matbeta", version, about = "Matrix p-values for multivariate linear hypotheses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test from hypothesis and error sums of squares S_H, S_E.
    Pvalue {
        #[arg(long)]
        sh: PathBuf,
        #[arg(long)]
        se: PathBuf,
        #[arg(long)]
        nu_h: u32,
        #[arg(long)]
        nu_e: u32,
        #[command(flatten)]
        opts: TestOpts,
    },
    /// Test from a symmetric F_c, or from two sample covariance matrices S1, S2.
    #[command(group(clap::ArgGroup::new("input").required(true).args(["fc", "s1"])))]
    Fc {
        /// Symmetric F_c, e.g. S_E^{-1/2} S_H S_E^{-1/2}.
        #[arg(long)]
        fc: Option<PathBuf>,
        /// Numerator sample matrix of a covariance equality test.
        #[arg(long, requires = "s2")]
        s1: Option<PathBuf>,
        /// Denominator sample matrix; must be positive definite.
        #[arg(long, requires = "s1")]
        s2: Option<PathBuf>,
        /// Degrees of freedom of F_c's numerator (nu_1 in a covariance test).
        #[arg(long)]
        nu_h: u32,
        /// Degrees of freedom of F_c's denominator (nu_2 in a covariance test).
        #[arg(long)]
        nu_e: u32,
        #[command(flatten)]
        opts: TestOpts,
    },
    /// Fit Y = XB + E and test C B M = H.
    Model {
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        c: PathBuf,
        /// Defaults to the identity.
        #[arg(long)]
        m: Option<PathBuf>,
        /// Defaults to zero.
        #[arg(long)]
        h: Option<PathBuf>,
        #[command(flatten)]
        opts: TestOpts,
    },
    /// Recompute one of the built-in worked examples.
    Reproduce {
        #[arg(long, value_parser = ["1", "2A", "2B", "2AB", "3"], ignore_case = true)]
        example: String,
        #[arg(long)]
        max_degree: Option<usize>,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Monte Carlo estimate of P(F > nabla) for real Wishart matrices.
    Mc {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        nu_h: u32,
        #[arg(long)]
        nu_e: u32,
        #[arg(long)]
        nabla: PathBuf,
        /// Number of samples (at least 1000).
        #[arg(long, default_value_t = 200_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputOpts,
    },
}

#[derive(Args)]
struct TestOpts {
    /// 1 real, 2 complex, 4 quaternion, 8 octonion.
    #[arg(long, default_value_t = 1, value_parser = parse_beta)]
    beta: u32,
    /// Level of the reported decision; 0.05 and 0.01 are always reported too.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Truncation degree of every series (also settable through MATBETA_MAX_DEGREE).
    #[arg(long)]
    max_degree: Option<usize>,
    /// Relative tolerance of the series stopping rule.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct OutputOpts {
    /// Full JSON report.
    #[arg(long, conflicts_with = "table")]
    json: bool,
    /// Human-readable output (the default).
    #[arg(long)]
    table: bool,
}

fn parse_beta(s: &str) -> std::result::Result<u32, String> {
    match s.parse::<u32>() {
        Ok(b @ (1 | 2 | 4 | 8)) => Ok(b),
        _ => Err(format!("beta must be 1, 2, 4 or 8, got {s:?}")),
    }
}

fn control(max_degree: Option<usize>, tol: Option<f64>) -> Result<SeriesControl> {
    let mut ctrl = SeriesControl::default();
    if let Ok(v) = std::env::var(MAX_DEGREE_ENV) {
        ctrl.max_degree = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("{MAX_DEGREE_ENV} must be a positive integer, got {v:?}")))?;
    }
    if let Some(k) = max_degree {
        ctrl.max_degree = k;
    }
    if let Some(t) = tol {
        ctrl.rel_tol = t;
    }
    ctrl.validate()?;
    Ok(ctrl)
}

fn build_report(
    command: &str,
    matrices: BTreeMap<String, Vec<Vec<f64>>>,
    ss: &SsMatrices,
    beta: u32,
    alpha: f64,
    ctrl: &SeriesControl,
) -> Result<Report> {
    let CriteriaReport { criteria, test } = matrix_p_value(ss, AlgebraParam::new(beta)?, alpha, ctrl)?;
    let eigenvalues = f_statistic(ss)?.eigenvalues()?;
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        version: report::version(),
        command: command.to_string(),
        inputs: Inputs { m: ss.dim(), nu_h: ss.nu_h, nu_e: ss.nu_e, beta, alpha, matrices },
        eigenvalues,
        criteria,
        test,
        engine: *ctrl,
        notes: vec![TAIL_NOTE.to_string()],
        reproduction: None,
    })
}

fn test_exit(r: &Report) -> ExitCode {
    match r.test.decision {
        Decision::Reject => ExitCode::from(3),
        Decision::Retain => ExitCode::SUCCESS,
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn put(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn emit(r: &Report, out: &OutputOpts) {
    if out.json {
        put(&(report::to_json(r) + "\n"));
    } else {
        put(&table(r));
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "absent".to_string(), |x| format!("{x:.10e}"))
}

fn table(r: &Report) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let t = &r.test;
    let c = &r.criteria;
    let _ = writeln!(s, "{} ({})", r.version, r.command);
    let _ = writeln!(s, "m = {}, nu_H = {}, nu_E = {}, beta = {}", r.inputs.m, r.inputs.nu_h, r.inputs.nu_e, r.inputs.beta);
    let ev: Vec<String> = r.eigenvalues.iter().map(|v| format!("{v:.9e}")).collect();
    let _ = writeln!(s, "eigenvalues of F_c: {}", ev.join(", "));
    let (m2, h2, e2) = t.effective;
    let _ = writeln!(
        s,
        "distribution: m = {m2}, nu_H = {h2}, nu_E = {e2}{} (a = {}, b = {})",
        if t.swapped { " after the parameter swap" } else { "" },
        t.params.a,
        t.params.b
    );
    let _ = writeln!(s, "\nclassical criteria (s = {})", c.s);
    let rows: [(&str, String); 15] = [
        ("Wilks Lambda", format!("{:.10e}", c.wilks_lambda)),
        ("Wilks U", format!("{:.10e}", c.wilks_u)),
        ("Wilks V", fmt_opt(c.wilks_v)),
        ("Lawley-Hotelling U(s)", format!("{:.10e}", c.lawley_hotelling_u)),
        ("Pillai V(s)", format!("{:.10e}", c.pillai_v)),
        ("Pillai W(s)", format!("{:.10e}", c.pillai_w)),
        ("Pillai H(s)", format!("{:.10e}", c.pillai_h)),
        ("Pillai R(s)", fmt_opt(c.pillai_r)),
        ("Pillai T(s)", fmt_opt(c.pillai_t)),
        ("Roy lambda_max", format!("{:.10e}", c.roy_lambda_max)),
        ("Roy theta_max", format!("{:.10e}", c.roy_theta_max)),
        ("Anderson lambda_min", fmt_opt(c.anderson_lambda_min)),
        ("Roy theta_min", fmt_opt(c.roy_theta_min)),
        ("Dempster T_D", format!("{:.10e}", c.dempster_td)),
        (
            "Roy approx F",
            c.roy_f.as_ref().map_or("absent".into(), |f| {
                format!("F({}, {}) = {:.6}, p = {:.6e}{}", f.df1, f.df2, f.f, f.p_value, if f.exact { " (exact)" } else { "" })
            }),
        ),
    ];
    for (name, v) in &rows {
        let _ = writeln!(s, "  {name:<24}{v}");
    }
    match &t.prob {
        None => {
            let _ = writeln!(s, "\nS_H = 0: the p-value is 1 without any series");
        }
        Some(p) => {
            let _ = writeln!(s, "\nupper probability expressions");
            let _ = writeln!(s, "  {:<8}{:<24}{:>7}{:>14}{:>12}  value", "id", "status", "degree", "radius", "tail");
            for o in &p.outcomes {
                let status = match o.series.divergence {
                    Some(d) => format!("{:?} ({d:?})", o.series.status),
                    None => format!("{:?}", o.series.status),
                };
                let value = o.raw.map_or("-".to_string(), |v| format!("{v:.10e}"));
                let _ = writeln!(
                    s,
                    "  {:<8}{:<24}{:>7}{:>14.6}{:>12.2e}  {value}{}",
                    o.id.to_string(),
                    status,
                    o.series.degree_used,
                    o.series.spectral_radius,
                    o.series.tail_estimate,
                    if o.accepted { "" } else { "  (not used)" }
                );
            }
            let ids: Vec<String> = p.chosen_expressions.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "  agreement spread {:.3e} over {}", p.agreement_spread, ids.join(", "));
        }
    }
    let _ = writeln!(s, "\np-value {:.10e}", t.p_value);
    let _ = writeln!(
        s,
        "decision at alpha = {}: {:?} (0.05: {:?}, 0.01: {:?})",
        t.alpha, t.decision, t.decision_05, t.decision_01
    );
    if let Some(rep) = &r.reproduction {
        let _ = writeln!(s, "\nexample {}: {}", rep.example, rep.description);
        let _ = writeln!(s, "  {}", rep.df_note);
        let _ = writeln!(s, "  printed p-value   {:e}", rep.target_p_value);
        let _ = writeln!(s, "  computed p-value  {:.10e}", rep.computed_p_value);
        let _ = writeln!(s, "  deviation         {:.3e} absolute, {:.3e} relative", rep.abs_deviation, rep.rel_deviation);
        for n in &rep.notes {
            let _ = writeln!(s, "  {n}");
        }
    }
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

fn mc_table(r: &McReport) -> String {
    let e = &r.estimate;
    format!(
        "{} (mc)\nm = {}, nu_H = {}, nu_E = {}, samples = {}, seed = {}\nrng: {}\nP(F > nabla) = {:.6e} +- {:.2e}\nP(F < nabla) = {:.6e} +- {:.2e}\n",
        r.version,
        r.config.m,
        r.config.nu_h,
        r.config.nu_e,
        e.samples,
        r.config.seed,
        r.rng,
        e.upper,
        e.upper_stderr,
        e.lower,
        e.lower_stderr
    )
}

fn general(path: &PathBuf, key: &str, matrices: &mut BTreeMap<String, Vec<Vec<f64>>>) -> Result<Matrix> {
    let m = report::read_matrix(path)?;
    matrices.insert(key.to_string(), m.to_rows());
    Ok(m)
}

fn symmetric(path: &PathBuf, key: &str, matrices: &mut BTreeMap<String, Vec<Vec<f64>>>) -> Result<SymMatrix> {
    let m = report::read_symmetric(path)?;
    matrices.insert(key.to_string(), m.to_rows());
    Ok(m)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut mats = BTreeMap::new();
    match cli.command {
        Command::Pvalue { sh, se, nu_h, nu_e, opts } => {
            let ctrl = control(opts.max_degree, opts.tol)?;
            let sh = symmetric(&sh, "sh", &mut mats)?;
            let se = symmetric(&se, "se", &mut mats)?;
            let ss = SsMatrices::new(sh, se, nu_h, nu_e)?;
            let r = build_report("pvalue", mats, &ss, opts.beta, opts.alpha, &ctrl)?;
            emit(&r, &opts.out);
            Ok(test_exit(&r))
        }
        Command::Fc { fc, s1, s2, nu_h, nu_e, opts } => {
            let ctrl = control(opts.max_degree, opts.tol)?;
            let ss = match (fc, s1, s2) {
                (Some(fc), None, None) => {
                    let fc = symmetric(&fc, "fc", &mut mats)?;
                    let m = fc.dim();
                    SsMatrices::new(fc, SymMatrix::identity(m), nu_h, nu_e)?
                }
                (None, Some(s1), Some(s2)) => {
                    let s1 = symmetric(&s1, "s1", &mut mats)?;
                    let s2 = symmetric(&s2, "s2", &mut mats)?;
                    SsMatrices::new(s1, s2, nu_h, nu_e)?
                }
                _ => return Err(Error::InvalidInput("give either --fc, or --s1 with --s2".into())),
            };
            let r = build_report("fc", mats, &ss, opts.beta, opts.alpha, &ctrl)?;
            emit(&r, &opts.out);
            Ok(test_exit(&r))
        }
        Command::Model { y, x, c, m, h, opts } => {
            let ctrl = control(opts.max_degree, opts.tol)?;
            let model = LinearModel::new(general(&y, "y", &mut mats)?, general(&x, "x", &mut mats)?)?;
            let mut hyp = HypothesisSpec::new(general(&c, "c", &mut mats)?);
            if let Some(p) = m {
                hyp.m = Some(general(&p, "m", &mut mats)?);
            }
            if let Some(p) = h {
                hyp.h = Some(general(&p, "h", &mut mats)?);
            }
            let ss = sums_of_squares(&model, &hyp)?;
            let r = build_report("model", mats, &ss, opts.beta, opts.alpha, &ctrl)?;
            emit(&r, &opts.out);
            Ok(test_exit(&r))
        }
        Command::Reproduce { example: id, max_degree, out } => {
            let id = ExampleId::parse(&id).ok_or_else(|| Error::InvalidInput(format!("unknown example {id:?}")))?;
            let ex = example(id);
            let ctrl = control(max_degree, None)?;
            let fc = ex.fc_matrix();
            mats.insert("fc".to_string(), fc.to_rows());
            let m = fc.dim();
            let ss = SsMatrices::new(fc, SymMatrix::identity(m), ex.nu_h, ex.nu_e)?;
            let mut r = build_report(&format!("reproduce {}", id.label()), mats, &ss, 1, 0.05, &ctrl)?;
            r.reproduction = Some(report::reproduction(&ex, &r.test));
            emit(&r, &out);
            Ok(ExitCode::SUCCESS)
        }
        Command::Mc { m, nu_h, nu_e, nabla, n, seed, out } => {
            let cfg = McConfig::new(m, nu_h, nu_e, n, seed)?;
            let nabla = report::read_symmetric(&nabla)?;
            let est = estimate_probs(&cfg, &nabla)?;
            let r = McReport::new(cfg, &nabla, est);
            if out.json {
                put(&(report::to_json(&r) + "\n"));
            } else {
                put(&mc_table(&r));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("matbeta: {e}");
            match e {
                Error::AllDiverged(_) | Error::NotEstimable => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
