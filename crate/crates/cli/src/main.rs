use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use hybridcast::arima::{self, FitOptions};
use hybridcast::fixture;
use hybridcast::ingest::{self, PriceField};
use hybridcast::metrics::AccuracyReport;
use hybridcast::neuralnet::{self, TrainConfig};
use hybridcast::pipeline::{self, DiffOrder, PipelineConfig};
use hybridcast::regression::{self, Action, Direction, FeatureMatrix, SelectionCriterion};
use hybridcast::series;
use hybridcast::{Criterion, IndicatorParams, IndicatorSet};

#[derive(Parser)]
#[command(name = "hybridcast", version, about = "ARIMA, indicators, stepwise regression and a small MLP for daily prices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ACF/PACF of a (differenced) price column as `lag,acf,pacf,band`.
    Diagnose(DiagnoseArgs),
    /// Select and fit an ARIMA model, then forecast the held-out tail one step at a time.
    FitArima(FitArimaArgs),
    /// EMA, RSI, stochastic %K/%D and Williams %R for an OHLC file.
    Indicators(IndicatorsArgs),
    /// Forward or backward stepwise selection on a feature CSV.
    Stepwise(StepwiseArgs),
    /// Train the network on a feature CSV, for one hidden size or the 1..=10 sweep.
    TrainNn(TrainNnArgs),
    /// Run the full chain from a config file.
    Pipeline {
        #[command(subcommand)]
        action: PipelineAction,
    },
    /// Write the seeded synthetic three-asset data set and a matching config.
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum PipelineAction {
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `out` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PriceInput {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "close")]
    column: PriceField,
}

impl PriceInput {
    fn load(&self) -> Result<(Vec<NaiveDate>, Vec<f64>)> {
        let frame = ingest::parse_csv_auto(&self.input)
            .with_context(|| format!("reading {}", self.input.display()))?;
        Ok((frame.dates(), frame.column(self.column)))
    }
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    price: PriceInput,
    #[arg(long, default_value = "auto")]
    d: DiffOrder,
    #[arg(long, default_value_t = 20)]
    lags: usize,
    #[arg(long, default_value_t = series::DEFAULT_STATIONARITY_THRESHOLD)]
    threshold: f64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArimaArgs {
    #[command(flatten)]
    price: PriceInput,
    #[arg(long, default_value = "auto")]
    d: DiffOrder,
    #[arg(long, default_value_t = 3)]
    max_p: usize,
    #[arg(long, default_value_t = 3)]
    max_q: usize,
    #[arg(long, default_value = "sic")]
    criterion: Criterion,
    #[arg(long, default_value_t = series::DEFAULT_STATIONARITY_THRESHOLD)]
    threshold: f64,
    /// Last training date; later rows are forecast. Defaults to an 80/20 split.
    #[arg(long)]
    train_end: Option<NaiveDate>,
    #[arg(long, default_value_t = 10)]
    whiteness_lags: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `date,actual,predicted` destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IndicatorsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 5)]
    ema_fast: usize,
    #[arg(long, default_value_t = 10)]
    ema_slow: usize,
    #[arg(long, default_value_t = 14)]
    rsi_period: usize,
    #[arg(long, default_value_t = 14)]
    stoch_period: usize,
    #[arg(long, default_value_t = 3)]
    stoch_d_period: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StepwiseArgs {
    /// Feature CSV with header `date,<columns...>,y`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "backward")]
    direction: Direction,
    #[arg(long, default_value = "bic")]
    criterion: SelectionCriterion,
    /// Remove exactly collinear columns before selecting.
    #[arg(long)]
    drop_aliased: bool,
    /// Also write the final fit as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct TrainNnArgs {
    /// Training feature CSV, `date,<columns...>,y`.
    #[arg(long)]
    input: PathBuf,
    /// Optional held-out feature CSV to score; the training rows are scored otherwise.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Comma-separated input columns; all columns when omitted.
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// `sweep` or a hidden size in 1..=10.
    #[arg(long, default_value = "sweep")]
    hidden: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long, default_value = "model_nn.json")]
    model: PathBuf,
    /// `date,actual,predicted` destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = fixture::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    FeatureMatrix::read_csv(f).with_context(|| format!("reading {}", path.display()))
}

fn resolve_d(d: DiffOrder, values: &[f64], threshold: f64) -> Result<usize> {
    Ok(match d {
        DiffOrder::Fixed(d) => d,
        DiffOrder::Auto => series::suggest_d(values, threshold)?,
    })
}

fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let (_, values) = a.price.load()?;
    let d = resolve_d(a.d, &values, a.threshold)?;
    let w = series::difference(&values, d)?;
    let acf = series::acf(&w, a.lags)?;
    let pacf = series::pacf(&w, a.lags)?;
    eprintln!("d = {d}, n = {}, band = ±{:.4}", w.len(), acf.band);
    eprintln!("{:>4} {:>9} {:>9}", "lag", "acf", "pacf");
    for (i, lag) in acf.lags.iter().enumerate() {
        let mark = |v: f64| if v.abs() > acf.band { '*' } else { ' ' };
        let (ac, pc) = (acf.coefficients[i], pacf.coefficients[i]);
        eprintln!("{lag:>4} {ac:>9.4}{} {pc:>9.4}{}", mark(ac), mark(pc));
    }
    eprintln!(
        "ACF cutoff lag {} (suggests q), PACF cutoff lag {} (suggests p)",
        acf.cutoff_lag(),
        pacf.cutoff_lag()
    );
    let mut w = csv::Writer::from_writer(sink(&a.output)?);
    w.write_record(["lag", "acf", "pacf", "band"])?;
    for (i, lag) in acf.lags.iter().enumerate() {
        w.write_record([
            lag.to_string(),
            acf.coefficients[i].to_string(),
            pacf.coefficients[i].to_string(),
            acf.band.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn fit_arima(a: FitArimaArgs) -> Result<()> {
    let (dates, values) = a.price.load()?;
    let cut = match a.train_end {
        Some(end) => dates.iter().take_while(|d| **d <= end).count(),
        None => (dates.len() as f64 * 0.8).round() as usize,
    };
    if cut == 0 || cut >= dates.len() {
        bail!("the split leaves no training or no forecast rows ({cut} of {})", dates.len());
    }
    let train = &values[..cut];
    let d = resolve_d(a.d, train, a.threshold)?;
    let opts = FitOptions {
        seed: a.seed,
        ..FitOptions::default()
    };
    let search = arima::search_orders(train, d, a.max_p, a.max_q, a.criterion, &opts)?;
    eprintln!("{:<14} {:>12} {:>12}", "model", "aic", "sic");
    for c in &search.candidates {
        match (&c.aic, &c.sic, &c.error) {
            (Some(aic), Some(sic), _) => eprintln!("{:<14} {aic:>12.3} {sic:>12.3}", c.spec.to_string()),
            (_, _, Some(e)) => eprintln!("{:<14} failed: {e}", c.spec.to_string()),
            _ => {}
        }
    }
    let fit = &search.best;
    eprintln!("selected {} by {}", fit.spec, a.criterion);
    eprintln!("  mu     {:>10.5}", fit.mu);
    for (i, v) in fit.phi.iter().enumerate() {
        eprintln!("  phi{}   {v:>10.5}", i + 1);
    }
    for (i, v) in fit.theta.iter().enumerate() {
        eprintln!("  theta{} {v:>10.5}", i + 1);
    }
    eprintln!("  sigma2 {:>10.5}  aic {:.3}  sic {:.3}", fit.sigma2, fit.aic, fit.sic);
    match fit.whiteness(a.whiteness_lags) {
        Ok(w) => eprintln!(
            "  Ljung-Box Q({}) = {:.3}, p = {:.4}: residuals {}",
            w.lags,
            w.statistic,
            w.p_value,
            if w.white { "look white" } else { "are autocorrelated" }
        ),
        Err(e) => eprintln!("  Ljung-Box unavailable: {e}"),
    }
    let predicted = arima::rolling_one_step(fit, train, &values[cut..])?;
    let report = AccuracyReport::new(dates[cut..].to_vec(), values[cut..].to_vec(), predicted)?;
    eprintln!(
        "rolling one-step on {} rows: MAPE {:.4}%, accuracy {:.4}%",
        report.dates.len(),
        report.mape,
        report.accuracy
    );
    report.write_csv(sink(&a.output)?)?;
    Ok(())
}

fn indicators(a: IndicatorsArgs) -> Result<()> {
    let frame = ingest::parse_csv_auto(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let params = IndicatorParams {
        ema_periods: vec![a.ema_fast, a.ema_slow],
        rsi_period: a.rsi_period,
        stoch_period: a.stoch_period,
        stoch_d_period: a.stoch_d_period,
    };
    IndicatorSet::compute(&frame, &params)?.write_csv(sink(&a.output)?)?;
    Ok(())
}

fn stepwise(a: StepwiseArgs) -> Result<()> {
    let mut m = read_features(&a.input)?;
    if a.drop_aliased {
        let (kept, dropped) = m.drop_aliased()?;
        if !dropped.is_empty() {
            println!("dropped aliased columns: {}", dropped.join(", "));
        }
        m = kept;
    }
    let trace = regression::stepwise(&m, a.direction, a.criterion)?;
    let crit = format!("{:?}", a.criterion).to_uppercase();
    println!("{:>4}  {:<8} {:<10} {:>14}", "step", "action", "column", crit);
    println!("{:>4}  {:<8} {:<10} {:>14.4}", 0, "start", "", trace.start);
    for (i, s) in trace.steps.iter().enumerate() {
        let action = match s.action {
            Action::Add => "add",
            Action::Remove => "remove",
        };
        println!("{:>4}  {:<8} {:<10} {:>14.4}", i + 1, action, s.column, s.criterion);
    }
    println!();
    println!("selected: [{}]", trace.final_fit.included.join(", "));
    println!("{}", trace.final_fit.equation());
    if let Some(p) = &a.json {
        std::fs::write(p, serde_json::to_string_pretty(&trace)?).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn train_nn(a: TrainNnArgs) -> Result<()> {
    let mut train = read_features(&a.input)?;
    let mut test = a.test.as_deref().map(read_features).transpose()?;
    if !a.columns.is_empty() {
        train = train.select(&a.columns)?;
        test = test.map(|t| t.select(&a.columns)).transpose()?;
    }
    let mut cfg = TrainConfig {
        seed: a.seed,
        ..TrainConfig::default()
    };
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(lr) = a.learning_rate {
        cfg.learning_rate = lr;
    }
    let model = if a.hidden.eq_ignore_ascii_case("sweep") {
        let s = neuralnet::sweep(&train, &cfg)?;
        eprintln!("{:>6} {:>12} {:>12} {:>7}", "hidden", "train MAPE", "valid MAPE", "epochs");
        for e in &s.entries {
            match &e.report {
                Some(r) => eprintln!(
                    "{:>6} {:>12.4} {:>12.4} {:>7}{}",
                    e.hidden,
                    r.train_mape,
                    r.selection_mape(),
                    r.epochs_run,
                    if e.hidden == s.best_hidden { "  <- chosen" } else { "" }
                ),
                None => eprintln!("{:>6} failed: {}", e.hidden, e.error.as_deref().unwrap_or("")),
            }
        }
        s.model
    } else {
        let h: usize = a.hidden.parse().context("--hidden takes `sweep` or a number")?;
        let (model, r) = neuralnet::train(&train, h, &cfg)?;
        eprintln!(
            "hidden {h}: {} epochs, train MAPE {:.4}%, validation MAPE {}",
            r.epochs_run,
            r.train_mape,
            r.validation_mape.map_or("n/a".into(), |v| format!("{v:.4}%"))
        );
        model
    };
    model.save(&a.model)?;
    let scored = test.as_ref().unwrap_or(&train);
    let report = model.evaluate(scored)?;
    eprintln!(
        "{} rows scored: MAPE {:.4}%, accuracy {:.4}%",
        report.dates.len(),
        report.mape,
        report.accuracy
    );
    report.write_csv(sink(&a.output)?)?;
    Ok(())
}

fn pipeline_run(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = PipelineConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out = o;
    }
    let report = pipeline::run(&cfg)?;
    let a = &report.accuracy;
    println!("{:<20} {:>9}", "stage", "accuracy");
    for (name, v) in [
        ("arima (gold)", a.arima_gold),
        ("full ols", a.full_ols),
        ("forward stepwise", a.forward_stepwise),
        ("backward stepwise", a.backward_stepwise),
        ("hybrid nn", a.hybrid_nn),
    ] {
        println!("{name:<20} {v:>9.4}");
    }
    for r in &report.arima {
        println!("{}: {}", r.asset, r.order);
    }
    println!("nn inputs [{}], hidden {}", report.nn.inputs.join(", "), report.nn.best_hidden);
    println!("artifacts in {}", cfg.out.display());
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let market = fixture::synthetic_market(a.seed);
    market.save(&a.out)?;
    let cfg = fixture::pipeline_config(a.seed);
    std::fs::write(a.out.join("pipeline.toml"), cfg.to_toml())?;
    eprintln!("wrote gold.csv, oil.csv, eurusd.csv and pipeline.toml to {}", a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Diagnose(a) => diagnose(a),
        Command::FitArima(a) => fit_arima(a),
        Command::Indicators(a) => indicators(a),
        Command::Stepwise(a) => stepwise(a),
        Command::TrainNn(a) => train_nn(a),
        Command::Pipeline {
            action: PipelineAction::Run { config, seed, out },
        } => pipeline_run(&config, seed, out),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
