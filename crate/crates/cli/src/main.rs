//! `acceltest` command-line front end.
//!
//! Exit codes: 0 success, 2 argument or data errors, 3 non-convergence
//! (the report is still written). Data goes to stdout, diagnostics to stderr.
//! `ACCELTEST_THREADS` sets the worker-thread count.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use acceltest::datasets::load_gab;
use acceltest::degradation::{pseudo_failure_times, Horizon, PseudoConfig, PseudoFailure, TimeScale};
use acceltest::fitml::{
    bootstrap_quantile, default_lambda_grid, fit_lambda_free, profile_lambda, quantile_at_use, BootstrapSummary,
    QuantileEstimate,
};
use acceltest::io::{read_degradation_csv, read_life_csv, read_spectral_csv, write_life_csv, SpectralColumn};
use acceltest::photodeg::{
    effective_exposure, instantaneous_dosage, total_dosage, uniform_time_grid, ExposureConfig, QuantumEfficiency,
    SpectralFunctions, SpectralGrid, Table,
};
use acceltest::relationships::{AccelerationModel, ActivationEnergy};
use acceltest::report::{sig, Report};
use acceltest::{fit_ml, Condition, Error, FitResult, LifeRecord, ModelSpec};

const THREADS_ENV: &str = "ACCELTEST_THREADS";

#[derive(Parser)]
#[command(name = "acceltest", version, about = "Accelerated-test models and censored ML fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Acceleration factors of test conditions relative to a use condition.
    Af(AfArgs),
    /// Maximum-likelihood fit of a life-data CSV; JSON report.
    Fit(FitArgs),
    /// Use-condition quantiles from a fitted model.
    Quantile(QuantileArgs),
    /// Profile log-likelihood over Box-Cox lambda; one CSV row per grid point.
    Profile(ProfileArgs),
    /// Pseudo failure times from degradation data; life-data CSV.
    Pseudo(PseudoArgs),
    /// Effective UV dosage from tabulated spectra.
    Dose(DoseArgs),
    /// Export an embedded dataset as life-data CSV.
    Dataset {
        #[arg(value_enum)]
        name: DatasetName,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetName {
    Gab,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rel {
    Arrhenius,
    Eyring,
    Invpower,
    Userate,
    CoffinManson,
    Boxcox,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct AfArgs {
    #[arg(long, value_enum)]
    rel: Rel,
    /// Use condition, e.g. `temp_C=50`.
    #[arg(long = "use", required = true, value_name = "NAME=VALUE")]
    use_condition: Vec<String>,
    /// Test condition; repeat for several rows.
    #[arg(long, value_name = "NAME=VALUE")]
    test: Vec<String>,
    /// Sweep one variable, `HEADER=LO:HI:N`, starting from the use condition.
    #[arg(long, value_name = "HEADER=LO:HI:N")]
    sweep: Option<String>,
    /// Variable the relationship acts on; defaults to the only use variable.
    #[arg(long)]
    var: Option<String>,
    #[arg(long)]
    ea_ev: Option<f64>,
    #[arg(long)]
    ea_kj: Option<f64>,
    #[arg(long)]
    ea_kcal: Option<f64>,
    /// Eyring temperature exponent.
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    /// Use-rate exponent.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ModelArgs {
    /// Life-data CSV with `time,status` and unit-suffixed condition columns.
    #[arg(long)]
    data: PathBuf,
    /// Model formula, e.g. `lognormal: mu ~ log(voltstress)`.
    #[arg(long)]
    model: String,
    #[arg(long = "use", value_name = "NAME=VALUE")]
    use_condition: Vec<String>,
    /// Quantile probabilities reported at the use condition.
    #[arg(long = "p", value_delimiter = ',', default_value = "0.1")]
    probs: Vec<f64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FitArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Bootstrap replicates for the first quantile; requires `--seed`.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct QuantileArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ProfileArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// `LO:HI:STEP`; default -1:2:0.1.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PseudoArgs {
    /// Degradation CSV with `unit_id,time,response` and condition columns.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    threshold: f64,
    #[arg(long, default_value = "identity")]
    time_scale: String,
    /// `last` (each unit's last measurement), `inf`, or a fixed time.
    #[arg(long, default_value = "last")]
    horizon: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct DoseArgs {
    /// CSV with `wavelength_nm,irradiance`.
    #[arg(long)]
    irradiance: PathBuf,
    /// CSV with `wavelength_nm,absorbance`.
    #[arg(long)]
    absorbance: PathBuf,
    /// Quantum-efficiency `phi = exp(beta0 + beta1 * lambda)`.
    #[arg(long, default_value_t = 0.0)]
    beta0: f64,
    #[arg(long, default_value_t = 0.0)]
    beta1: f64,
    /// Wavelength grid `LO:HI:N`; default 290:320:31.
    #[arg(long)]
    grid: Option<String>,
    /// Exposure duration for the total dosage.
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Concentration factor.
    #[arg(long, default_value_t = 1.0)]
    cf: f64,
    /// Reciprocity exponent.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

enum Failure {
    Usage(String),
    Library(Error),
    /// Report already written.
    NotConverged,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Library(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = match v.trim().parse() {
            Ok(n) if n > 0 => n,
            _ => return usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")),
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn parse_condition(assignments: &[String]) -> CliResult<Condition> {
    let mut c = Condition::new();
    for a in assignments {
        c.parse_assignment(a)?;
    }
    Ok(c)
}

fn parse_range(s: &str, what: &str) -> CliResult<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Vec<f64> = parts.iter().filter_map(|p| p.trim().parse().ok()).collect();
    if parts.len() != 3 || nums.len() != 3 {
        return usage(format!("{what} must look like A:B:C, got `{s}`"));
    }
    Ok((nums[0], nums[1], nums[2]))
}

fn linspace(lo: f64, hi: f64, n: f64, what: &str) -> CliResult<Vec<f64>> {
    if !(n >= 2.0 && n.fract() == 0.0 && lo < hi) {
        return usage(format!("{what} needs LO < HI and an integer N >= 2"));
    }
    let n = n as usize;
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

fn read_life(path: &Path) -> CliResult<Vec<LifeRecord>> {
    let f = File::open(path).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(read_life_csv(f)?)
}

fn write_stdout(s: &str) -> CliResult<()> {
    let mut out = io::stdout().lock();
    out.write_all(s.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn table(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(Error::from)?;
    for r in rows {
        w.write_record(r).map_err(Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

fn six(v: f64) -> String {
    sig(v, 6)
}

fn activation_energy(a: &AfArgs) -> CliResult<ActivationEnergy> {
    let given = [a.ea_ev.map(ActivationEnergy::ev), a.ea_kj.map(ActivationEnergy::kj_per_mol), a.ea_kcal.map(ActivationEnergy::kcal_per_mol)];
    let mut set = given.into_iter().flatten();
    match (set.next(), set.next()) {
        (Some(ea), None) => Ok(ea?),
        (None, _) => usage("this relationship needs an activation energy (--ea-ev, --ea-kj or --ea-kcal)"),
        _ => usage("give only one of --ea-ev, --ea-kj, --ea-kcal"),
    }
}

fn required(v: Option<f64>, flag: &str) -> CliResult<f64> {
    v.ok_or_else(|| Failure::Usage(format!("this relationship needs --{flag}")))
}

fn cmd_af(a: AfArgs) -> CliResult<()> {
    let use_c = parse_condition(&a.use_condition)?;
    let var = match &a.var {
        Some(v) => v.clone(),
        None => {
            let names: Vec<&str> = use_c.names().collect();
            match names.as_slice() {
                [one] => one.to_string(),
                _ => return usage("use condition has several variables; choose one with --var"),
            }
        }
    };
    let model = match a.rel {
        Rel::Arrhenius => AccelerationModel::Arrhenius { temp: var.clone(), ea: activation_energy(&a)? },
        Rel::Eyring => {
            AccelerationModel::Eyring { temp: var.clone(), ea: activation_energy(&a)?, m: required(a.m, "m")? }
        }
        Rel::Invpower => AccelerationModel::InversePower { var: var.clone(), beta1: required(a.beta1, "beta1")? },
        Rel::Userate => AccelerationModel::UseRate { var: var.clone(), p: required(a.p, "p")? },
        Rel::CoffinManson => AccelerationModel::CoffinManson { var: var.clone(), beta1: required(a.beta1, "beta1")? },
        Rel::Boxcox => AccelerationModel::BoxCox {
            var: var.clone(),
            lambda: required(a.lambda, "lambda")?,
            gamma1: required(a.gamma1, "gamma1")?,
        },
    };
    let mut conditions = a.test.iter().map(|t| parse_condition(std::slice::from_ref(t))).collect::<CliResult<Vec<_>>>()?;
    if let Some(s) = &a.sweep {
        let (header, range) = s.split_once('=').ok_or_else(|| Failure::Usage(format!("--sweep needs HEADER=LO:HI:N, got `{s}`")))?;
        let (lo, hi, n) = parse_range(range, "--sweep")?;
        for v in linspace(lo, hi, n, "--sweep")? {
            let mut c = use_c.clone();
            c.set_header(header, v);
            conditions.push(c);
        }
    }
    if conditions.is_empty() {
        return usage("nothing to evaluate; give --test or --sweep");
    }
    #[derive(Serialize)]
    struct Row {
        condition: Condition,
        af: f64,
    }
    let rows = conditions
        .into_iter()
        .map(|c| Ok(Row { af: model.af(&c, &use_c)?.value(), condition: c }))
        .collect::<CliResult<Vec<_>>>()?;
    match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                model: &'a AccelerationModel,
                use_condition: &'a Condition,
                rows: Vec<Row>,
            }
            write_stdout(&Report::new("af", Body { model: &model, use_condition: &use_c, rows }).to_json())
        }
        Format::Csv => {
            let headers = rows[0].condition.headers();
            let mut head: Vec<&str> = headers.iter().map(String::as_str).collect();
            head.push("af");
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut v: Vec<String> = r.condition.header_values().into_iter().map(|(_, x)| six(x)).collect();
                    v.push(six(r.af));
                    v
                })
                .collect();
            write_stdout(&table(&head, &body)?)
        }
    }
}

struct Fitted {
    fit: FitResult,
    lambda: Option<f64>,
    converged: bool,
}

fn fit_model(m: &ModelArgs) -> CliResult<(Vec<LifeRecord>, ModelSpec, Fitted)> {
    let spec = ModelSpec::parse(&m.model)?;
    let data = read_life(&m.data)?;
    let result = match spec.boxcox_lambda() {
        Some(None) => fit_lambda_free(&data, &spec, -1.0, 2.0).map(|(l, f)| (Some(l), f)),
        _ => fit_ml(&data, &spec, None).map(|f| (None, f)),
    };
    let fitted = match result {
        Ok((lambda, fit)) => Fitted { fit, lambda, converged: true },
        Err(Error::NonConvergence(best)) => Fitted { fit: *best, lambda: None, converged: false },
        Err(e) => return Err(e.into()),
    };
    Ok((data, spec, fitted))
}

fn quantiles(fit: &FitResult, m: &ModelArgs) -> CliResult<Vec<QuantileEstimate>> {
    if m.use_condition.is_empty() {
        return Ok(Vec::new());
    }
    let use_c = parse_condition(&m.use_condition)?;
    Ok(m.probs.iter().map(|&p| quantile_at_use(fit, &use_c, p)).collect::<Result<Vec<_>, _>>()?)
}

fn bootstrap(
    data: &[LifeRecord],
    spec: &ModelSpec,
    fitted: &Fitted,
    m: &ModelArgs,
    replicates: Option<usize>,
    seed: Option<u64>,
) -> CliResult<Option<BootstrapSummary>> {
    let Some(n) = replicates else { return Ok(None) };
    let Some(seed) = seed else { return usage("--bootstrap requires --seed") };
    if m.use_condition.is_empty() {
        return usage("--bootstrap requires --use");
    }
    let spec = match fitted.lambda {
        Some(l) => spec.with_lambda(l)?,
        None => spec.clone(),
    };
    let use_c = parse_condition(&m.use_condition)?;
    Ok(Some(bootstrap_quantile(data, &spec, &use_c, m.probs[0], n, seed)?))
}

fn check_seed(replicates: Option<usize>, seed: Option<u64>) -> CliResult<()> {
    if replicates.is_some() && seed.is_none() {
        return usage("--bootstrap requires --seed");
    }
    Ok(())
}

#[derive(Serialize)]
struct FitBody<'a> {
    #[serde(flatten)]
    fit: &'a FitResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    quantiles: Vec<QuantileEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bootstrap: Option<BootstrapSummary>,
}

fn cmd_fit(a: FitArgs) -> CliResult<()> {
    check_seed(a.bootstrap, a.seed)?;
    let (data, spec, fitted) = fit_model(&a.model)?;
    let q = quantiles(&fitted.fit, &a.model)?;
    let boot = bootstrap(&data, &spec, &fitted, &a.model, a.bootstrap, a.seed)?;
    let body = FitBody { fit: &fitted.fit, lambda: fitted.lambda, quantiles: q, bootstrap: boot };
    write_stdout(&Report::new("fit", body).to_json())?;
    if fitted.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn cmd_quantile(a: QuantileArgs) -> CliResult<()> {
    check_seed(a.bootstrap, a.seed)?;
    if a.model.use_condition.is_empty() {
        return usage("quantile requires --use");
    }
    let (data, spec, fitted) = fit_model(&a.model)?;
    let q = quantiles(&fitted.fit, &a.model)?;
    let boot = bootstrap(&data, &spec, &fitted, &a.model, a.bootstrap, a.seed)?;
    match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                converged: bool,
                quantiles: Vec<QuantileEstimate>,
                bootstrap: Option<BootstrapSummary>,
            }
            write_stdout(&Report::new("quantile", Body { converged: fitted.converged, quantiles: q, bootstrap: boot }).to_json())?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = q
                .iter()
                .map(|e| {
                    vec![six(e.p), six(e.estimate), six(e.se), six(e.lower), six(e.upper), e.extrapolated.to_string()]
                })
                .collect();
            write_stdout(&table(&["p", "estimate", "se", "lower", "upper", "extrapolated"], &rows)?)?;
            if let Some(b) = boot {
                eprintln!(
                    "bootstrap p={}: median {}, 95% interval [{}, {}], {} of {} refits failed",
                    six(b.p),
                    six(b.median),
                    six(b.lower),
                    six(b.upper),
                    b.failed_refits,
                    b.replicates
                );
            }
        }
    }
    if fitted.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn cmd_profile(a: ProfileArgs) -> CliResult<()> {
    let spec = ModelSpec::parse(&a.model.model)?;
    let data = read_life(&a.model.data)?;
    if a.model.use_condition.is_empty() {
        return usage("profile requires --use");
    }
    let use_c = parse_condition(&a.model.use_condition)?;
    let grid = match &a.grid {
        None => default_lambda_grid(),
        Some(g) => {
            let (lo, hi, step) = parse_range(g, "--grid")?;
            if !(step > 0.0 && lo <= hi) {
                return usage("--grid needs LO <= HI and STEP > 0");
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| lo + step * i as f64).collect()
        }
    };
    let points = profile_lambda(&data, &spec, &grid, &use_c, a.model.probs[0])?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|pt| {
            let (q, lo, hi) = pt.quantile.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |q| (q.estimate, q.lower, q.upper));
            vec![
                six(pt.lambda),
                six(pt.loglik),
                pt.converged.to_string(),
                six(q),
                six(lo),
                six(hi),
                pt.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_stdout(&table(&["lambda", "loglik", "converged", "quantile", "lower", "upper", "note"], &rows)?)
}

fn cmd_pseudo(a: PseudoArgs) -> CliResult<()> {
    let time_scale = TimeScale::parse(&a.time_scale)?;
    let horizon = match a.horizon.as_str() {
        "last" => Horizon::LastObserved,
        "inf" => Horizon::Unbounded,
        other => match other.parse::<f64>() {
            Ok(t) if t > 0.0 => Horizon::Fixed(t),
            _ => return usage(format!("--horizon must be `last`, `inf` or a positive time, got `{other}`")),
        },
    };
    let f = File::open(&a.data).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", a.data.display())))?;
    let samples = read_degradation_csv(f)?;
    let cfg = PseudoConfig { threshold: a.threshold, time_scale, horizon };
    let pseudo = pseudo_failure_times(&samples, &cfg)?;
    match a.format {
        Format::Json => write_stdout(&Report::new("pseudo", PseudoBody { config: &cfg, units: &pseudo }).to_json()),
        Format::Csv => {
            let records: Vec<LifeRecord> = pseudo.into_iter().map(|p| p.record).collect();
            let mut buf = Vec::new();
            write_life_csv(&records, &mut buf)?;
            write_stdout(&String::from_utf8(buf).expect("UTF-8 CSV"))
        }
    }
}

#[derive(Serialize)]
struct PseudoBody<'a> {
    config: &'a PseudoConfig,
    units: &'a [PseudoFailure],
}

fn read_spectrum(path: &Path, want: SpectralColumn) -> CliResult<Table> {
    let f = File::open(path).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))?;
    let (kind, t) = read_spectral_csv(f)?;
    if kind != want {
        return usage(format!("{} has the wrong spectral column", path.display()));
    }
    Ok(t)
}

fn cmd_dose(a: DoseArgs) -> CliResult<()> {
    let irr = read_spectrum(&a.irradiance, SpectralColumn::Irradiance)?;
    let abs = read_spectrum(&a.absorbance, SpectralColumn::Absorbance)?;
    let grid = match &a.grid {
        None => SpectralGrid::uv_b(),
        Some(g) => {
            let (lo, hi, n) = parse_range(g, "--grid")?;
            SpectralGrid::new(linspace(lo, hi, n, "--grid")?)?
        }
    };
    if !(a.duration >= 0.0 && a.duration.is_finite()) {
        return usage("--duration must be nonnegative");
    }
    let f = SpectralFunctions::tabulated(irr, abs, QuantumEfficiency { beta0: a.beta0, beta1: a.beta1 });
    let cfg = ExposureConfig::new(a.cf, a.p)?;
    let instantaneous = instantaneous_dosage(0.0, &grid, &f)?;
    let total = total_dosage(a.duration, &grid, &f, &uniform_time_grid(a.duration, 1))?;
    let effective = effective_exposure(total, &cfg)?;
    match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                grid_points: usize,
                duration: f64,
                cf: f64,
                p: f64,
                instantaneous_dosage: f64,
                total_dosage: f64,
                effective_exposure: f64,
            }
            let body = Body {
                grid_points: grid.wavelengths().len(),
                duration: a.duration,
                cf: a.cf,
                p: a.p,
                instantaneous_dosage: instantaneous,
                total_dosage: total,
                effective_exposure: effective,
            };
            write_stdout(&Report::new("dose", body).to_json())
        }
        Format::Csv => {
            let rows = vec![
                vec!["instantaneous_dosage".into(), six(instantaneous)],
                vec!["total_dosage".into(), six(total)],
                vec!["effective_exposure".into(), six(effective)],
            ];
            write_stdout(&table(&["quantity", "value"], &rows)?)
        }
    }
}

fn cmd_dataset(name: DatasetName) -> CliResult<()> {
    match name {
        DatasetName::Gab => {
            let mut buf = Vec::new();
            write_life_csv(&load_gab().records, &mut buf)?;
            write_stdout(&String::from_utf8(buf).expect("UTF-8 CSV"))
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Af(a) => cmd_af(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Quantile(a) => cmd_quantile(a),
        Command::Profile(a) => cmd_profile(a),
        Command::Pseudo(a) => cmd_pseudo(a),
        Command::Dose(a) => cmd_dose(a),
        Command::Dataset { name } => cmd_dataset(name),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Library(e)) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(2)
        }
        Err(Failure::NotConverged) => {
            eprintln!("error: optimizer did not converge; report written with converged=false");
            ExitCode::from(3)
        }
    }
}
