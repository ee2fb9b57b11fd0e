//! The `dvqr` command-line front end.
//!
//! Exit codes: `0` success, `2` user or configuration error, `3` numeric
//! failure.

use crate::bicop::FitCriterion;
use crate::data::{format_number, DataTable};
use crate::dvine::{fit_quantreg, QuantRegModel};
use crate::error::{Error, Result};
use crate::simbench::{run_mise_study, MarginChoice, Method, ScenarioKind, ScenarioParam, ScenarioSpec};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dvqr", version, about = "D-vine copula based quantile regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a delimited table and write the model document.
    Fit(FitArgs),
    /// Predict conditional quantiles for the rows of a covariate table.
    Predict(PredictArgs),
    /// Conditional response quantiles with covariates pinned at stress levels.
    Stress(StressArgs),
    /// Run a simulation study and write its report.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Model document to write.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub response: String,
    #[arg(long, default_value = "aic", value_parser = parse_criterion)]
    pub criterion: FitCriterion,
    /// Significance level of the pairwise independence test.
    #[arg(long, default_value_t = 0.05)]
    pub indep_level: f64,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Covariate table.
    #[arg(long)]
    pub input: PathBuf,
    /// Prediction table; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Quantile level; repeatable. Defaults to 0.5.
    #[arg(long = "alpha")]
    pub alphas: Vec<f64>,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
}

#[derive(Debug, Args)]
pub struct StressArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Stress levels as `NAME=LEVEL[,LEVEL...]`; repeatable. The i-th level of
    /// every named covariate forms the i-th stress set; a single level is
    /// shared by all sets.
    #[arg(long = "kappa")]
    pub kappa: Vec<String>,
    /// Quantile level; repeatable. Defaults to 0.5.
    #[arg(long = "alpha")]
    pub alphas: Vec<f64>,
    /// Report response quantiles on the data scale instead of the unit scale.
    #[arg(long)]
    pub raw_scale: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// C3, t5 or M5.
    #[arg(long)]
    pub scenario: String,
    /// `delta1`, `delta2` or a number for C3; `R1` or `R2` for t5; sigma for M5.
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long, default_value = "m1")]
    pub margins: String,
    #[arg(long, default_value_t = 300)]
    pub ntrain: usize,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Quantile level; repeatable. Defaults to 0.05, 0.5 and 0.95.
    #[arg(long = "alpha")]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report table; the JSON report is written next to it.
    #[arg(long)]
    pub output: PathBuf,
}

fn parse_criterion(s: &str) -> std::result::Result<FitCriterion, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_delimiter(s: &str) -> std::result::Result<u8, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be a single ASCII character, got '{s}'")),
    }
}

/// Exit code for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numeric { .. } | Error::LinAlg(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "dvqr: error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point of the `dvqr` binary.
pub fn main_exit_code() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Stress(a) => cmd_stress(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
    }
}

fn sorted_alphas(alphas: &[f64], default: &[f64]) -> Result<Vec<f64>> {
    let mut a = if alphas.is_empty() { default.to_vec() } else { alphas.to_vec() };
    if let Some(bad) = a.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(Error::Input(format!("quantile level {bad} outside (0, 1)")));
    }
    a.sort_by(f64::total_cmp);
    a.dedup();
    Ok(a)
}

fn alpha_column(alpha: f64) -> String {
    format!("q_{}", format_number(alpha))
}

fn write_table(table: &DataTable, output: Option<&PathBuf>, delimiter: u8, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| Error::Input(format!("cannot create {}: {e}", path.display())))?;
            table.write_delimited(std::io::BufWriter::new(file), delimiter)
        }
        None => table.write_delimited(out, delimiter),
    }
}

fn node_label(model: &QuantRegModel, node: usize) -> String {
    if node == 0 {
        "V".into()
    } else {
        format!("U{}", model.vine().order()[node - 1] + 1)
    }
}

pub fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> Result<()> {
    if !(0.0..=1.0).contains(&a.indep_level) {
        return Err(Error::Input(format!("independence level {} outside [0, 1]", a.indep_level)));
    }
    let table = DataTable::read_path(&a.input, a.delimiter)?;
    let model = fit_quantreg(&table, &a.response, a.criterion, a.indep_level)?;
    model.save(&a.output)?;

    writeln!(out, "response: {}", model.response_name())?;
    let labels: Vec<String> = model
        .covariate_names()
        .iter()
        .enumerate()
        .map(|(j, n)| format!("U{}={n}", j + 1))
        .collect();
    writeln!(out, "covariates: {}", labels.join(", "))?;
    let vine = model.vine();
    if vine.k() == 0 {
        writeln!(out, "no covariates selected")?;
    } else {
        writeln!(out, "order: {}", model.order_label())?;
        for (t, tree) in vine.pairs().iter().enumerate() {
            let t = t + 1;
            for (e, c) in tree.iter().enumerate() {
                let mut name = format!("{},{}", node_label(&model, e), node_label(&model, e + t));
                if t > 1 {
                    let given: Vec<String> = (e + 1..e + t).map(|n| node_label(&model, n)).collect();
                    name = format!("{name};{}", given.join(","));
                }
                writeln!(out, "tree {t}: {name}: {c}")?;
            }
        }
        let path: Vec<String> = vine.cll_path().iter().map(|v| format!("{v:.4}")).collect();
        writeln!(out, "cll_path ({}): {}", vine.criterion(), path.join(" "))?;
    }
    writeln!(out, "model written to {}", a.output.display())?;
    Ok(())
}

pub fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = QuantRegModel::load(&a.model)?;
    let alphas = sorted_alphas(&a.alphas, &[0.5])?;
    let table = DataTable::read_path(&a.input, a.delimiter)?;
    let selected = model.vine().order().to_vec();
    let mut cols = Vec::with_capacity(selected.len());
    for &j in &selected {
        let name = &model.covariate_names()[j];
        let c = table
            .column(name)
            .ok_or_else(|| Error::Input(format!("covariate column '{name}' required by the model is missing")))?;
        cols.push(c);
    }
    let mut preds = vec![Vec::with_capacity(table.n_rows()); alphas.len()];
    let mut x = vec![0.0; model.covariate_names().len()];
    for i in 0..table.n_rows() {
        for (&j, c) in selected.iter().zip(&cols) {
            x[j] = c[i];
        }
        for (col, q) in preds.iter_mut().zip(model.predict_quantiles(&alphas, &x)?) {
            col.push(q);
        }
    }
    let names = alphas.iter().map(|&a| alpha_column(a)).collect();
    write_table(&DataTable::new(names, preds)?, a.output.as_ref(), a.delimiter, out)
}

/// Splits `NAME=L1,L2,...` specifications into stress sets.
pub fn parse_kappa_sets(specs: &[String]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut names: Vec<String> = Vec::new();
    let mut levels: Vec<Vec<f64>> = Vec::new();
    for s in specs {
        let (name, rhs) = s
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("stress level '{s}' is not of the form NAME=LEVEL")))?;
        let name = name.trim();
        let vals = rhs
            .split(',')
            .map(|v| {
                let x: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Input(format!("invalid stress level '{v}' for '{name}'")))?;
                if !(x > 0.0 && x < 1.0) {
                    return Err(Error::Input(format!("stress level {x} for '{name}' outside (0, 1)")));
                }
                Ok(x)
            })
            .collect::<Result<Vec<_>>>()?;
        match names.iter().position(|n| n == name) {
            Some(p) => levels[p].extend(vals),
            None => {
                names.push(name.to_owned());
                levels.push(vals);
            }
        }
    }
    let n_sets = levels.iter().map(Vec::len).max().unwrap_or(1);
    for (name, l) in names.iter().zip(&mut levels) {
        if l.len() == 1 {
            *l = vec![l[0]; n_sets];
        } else if l.len() != n_sets {
            return Err(Error::Input(format!(
                "covariate '{name}' has {} stress levels but other covariates have {n_sets}",
                l.len()
            )));
        }
    }
    let sets = (0..n_sets).map(|i| levels.iter().map(|l| l[i]).collect()).collect();
    Ok((names, sets))
}

pub fn cmd_stress(a: &StressArgs, out: &mut dyn Write) -> Result<()> {
    let model = QuantRegModel::load(&a.model)?;
    let alphas = sorted_alphas(&a.alphas, &[0.5])?;
    let (names, sets) = parse_kappa_sets(&a.kappa)?;
    let mut columns = vec![Vec::new(); names.len() + alphas.len()];
    for set in &sets {
        let kappa: Vec<(String, f64)> = names.iter().cloned().zip(set.iter().copied()).collect();
        for (c, &k) in columns.iter_mut().zip(set) {
            c.push(k);
        }
        for (c, &alpha) in columns[names.len()..].iter_mut().zip(&alphas) {
            let p = model.stress_predict_named(&kappa, alpha)?;
            c.push(if a.raw_scale { model.response_margin().quantile(p)? } else { p });
        }
    }
    let header = names.iter().cloned().chain(alphas.iter().map(|&a| alpha_column(a))).collect();
    write_table(&DataTable::new(header, columns)?, a.output.as_ref(), a.delimiter, out)
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let kind: ScenarioKind = a.scenario.parse()?;
    let param = match &a.param {
        Some(p) => ScenarioParam::parse(kind, p)?,
        None => ScenarioParam::default_for(kind),
    };
    let margins: MarginChoice = a.margins.parse()?;
    let alphas = sorted_alphas(&a.alphas, &[0.05, 0.5, 0.95])?;
    let spec = ScenarioSpec::new(kind, param, margins, a.ntrain, alphas, a.reps)?;
    let report = run_mise_study(&spec, &[Method::Dvqr, Method::Lqr], a.seed)?;
    report.save(&a.output)?;
    writeln!(
        out,
        "{kind} {param} {} n_train={} reps={} seed={}",
        spec.margins_label(),
        spec.n_train,
        spec.reps,
        a.seed
    )?;
    for r in &report.rows {
        writeln!(out, "alpha={} {}: mise={:.6} rmise={:.3}", r.alpha, r.method, r.mise, r.rmise)?;
    }
    for f in report.failures.iter().filter(|f| f.failed > 0) {
        writeln!(out, "{}: {} replications failed and were excluded", f.method, f.failed)?;
    }
    writeln!(out, "report written to {}", a.output.display())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_sets_broadcast_single_levels() {
        let (names, sets) = parse_kappa_sets(&["x1=0.9,0.95,0.99".into(), "x2=0.5".into()]).unwrap();
        assert_eq!(names, vec!["x1", "x2"]);
        assert_eq!(sets, vec![vec![0.9, 0.5], vec![0.95, 0.5], vec![0.99, 0.5]]);
        let (_, sets) = parse_kappa_sets(&["a=0.9".into(), "a=0.99".into()]).unwrap();
        assert_eq!(sets, vec![vec![0.9], vec![0.99]]);
    }

    #[test]
    fn kappa_errors() {
        assert!(parse_kappa_sets(&["x1=1.2".into()]).is_err());
        assert!(parse_kappa_sets(&["x1".into()]).is_err());
        assert!(parse_kappa_sets(&["x1=0.9,0.95".into(), "x2=0.1,0.2,0.3".into()]).is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["dvqr", "bogus"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run(["dvqr", "--help"], &mut o, &mut e), EXIT_OK);
        assert_eq!(parse_delimiter("tab"), Ok(b'\t'));
    }
}
