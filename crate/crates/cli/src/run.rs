use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;
use srsd_core::stats::running_correlation;
use srsd_core::{
    detect_mean, detect_variance, estimate_ar1, generate_pair, prewhiten, run_srsd_with,
    Ar1Estimate, Ar1Method, ChangePoint, DetectionParams, MeanShiftResult, Regime, RegimeSpec,
    SrsdOptions, SrsdResult, Step, TimeSeries, VarianceShiftResult,
};

use crate::args::{
    Command, CorrelationArgs, DetectArgs, DiagnoseArgs, Format, GenerateArgs, InputArgs, ParamArgs,
    SkipArg,
};
use crate::error::{CliError, Result};
use crate::input::read_columns;
use crate::output::{emit, fmt_float, fmt_opt, CsvTable, Envelope};

pub const SEED_ENV: &str = "SRSD_SEED";

/// One analysed input column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnResult<T> {
    pub column: String,
    /// AR(1) estimate when the column was prewhitened.
    pub prewhitening: Option<Ar1Estimate>,
    /// Add to result indices to get input row numbers.
    pub index_offset: usize,
    pub result: T,
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::DetectMean(a) => detect_single(a, "detect-mean", |s, p| {
            Ok(Single::Mean(detect_mean(s, p)?))
        }),
        Command::DetectVariance(a) => detect_single(a, "detect-variance", |s, p| {
            Ok(Single::Variance(detect_variance(s, p)?))
        }),
        Command::DetectCorrelation(a) => detect_pair(a),
        Command::Generate(a) => generate(a),
        Command::Diagnose(a) => diagnose(a),
    }
}

fn params_from(a: &ParamArgs) -> Result<DetectionParams> {
    let mut p = DetectionParams::new(a.p, a.l);
    if let Some(m) = a.m {
        p.m = m;
    }
    p.prewhiten = a.prewhiten.into();
    p.validate().map_err(|e| CliError::Usage(e.to_string()))
}

fn params_echo(input: &InputArgs, p: &DetectionParams) -> serde_json::Value {
    json!({
        "input": input.input.display().to_string(),
        "columns": input.columns,
        "labels": input.labels,
        "p": p.p,
        "l": p.l,
        "prewhiten": p.prewhiten,
        "m": p.m,
    })
}

fn load(input: &InputArgs) -> Result<Vec<TimeSeries>> {
    read_columns(&input.input, &input.columns, input.labels.as_deref())
}

/// Result of a single-series detector, serialized without a tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Single {
    Mean(MeanShiftResult),
    Variance(VarianceShiftResult),
}

impl Single {
    fn parts(&self) -> (&[Regime], &[ChangePoint]) {
        match self {
            Single::Mean(r) => (&r.regimes, &r.change_points),
            Single::Variance(r) => (&r.regimes, &r.change_points),
        }
    }
}

fn maybe_prewhiten(
    series: &TimeSeries,
    params: &DetectionParams,
) -> Result<(TimeSeries, Option<Ar1Estimate>)> {
    match Ar1Method::from_mode(params.prewhiten) {
        None => Ok((series.clone(), None)),
        Some(method) => {
            let est = estimate_ar1(series, params.m, method)?;
            Ok((prewhiten(series, est.alpha)?, Some(est)))
        }
    }
}

fn detect_single(
    a: DetectArgs,
    command: &str,
    detect: impl Fn(&TimeSeries, &DetectionParams) -> Result<Single>,
) -> Result<()> {
    let params = params_from(&a.params)?;
    let inputs = load(&a.input)?;
    let mut results = Vec::with_capacity(inputs.len());
    for (series, column) in inputs.iter().zip(&a.input.columns) {
        let (s, est) = maybe_prewhiten(series, &params)?;
        let r = detect(&s, &params)?;
        results.push((column.clone(), est, usize::from(est.is_some()), s, r));
    }
    let text = match a.output.format {
        Format::Json => {
            let columns: Vec<ColumnResult<Single>> = results
                .iter()
                .map(|(column, est, offset, _, r)| ColumnResult {
                    column: column.clone(),
                    prewhitening: *est,
                    index_offset: *offset,
                    result: r.clone(),
                })
                .collect();
            Envelope::new(command, params_echo(&a.input, &params), columns).to_json()?
        }
        Format::Csv => {
            let mut table = regime_table();
            for (column, _, offset, s, r) in &results {
                let (regimes, cps) = r.parts();
                push_regimes(&mut table, column, s, *offset, regimes, cps);
            }
            table.finish()
        }
    };
    emit(a.output.output.as_deref(), &text)
}

fn regime_table() -> CsvTable {
    CsvTable::new(&[
        "series",
        "kind",
        "start",
        "end",
        "start_label",
        "end_label",
        "value",
        "shift_p_value",
        "ci_low",
        "ci_high",
        "provisional",
    ])
}

/// One row per regime; `start`/`end` are input row numbers.
fn push_regimes(
    table: &mut CsvTable,
    name: &str,
    series: &TimeSeries,
    offset: usize,
    regimes: &[Regime],
    cps: &[ChangePoint],
) {
    let label = |i: usize| {
        series
            .labels()
            .map(|_| fmt_float(series.label_at(i)))
            .unwrap_or_default()
    };
    for (k, g) in regimes.iter().enumerate() {
        let provisional = k > 0 && cps.get(k - 1).is_some_and(|c| c.provisional);
        table.row(&[
            name.to_string(),
            format!("{:?}", g.kind).to_lowercase(),
            (g.start + offset).to_string(),
            (g.end + offset).to_string(),
            label(g.start),
            label(g.end),
            fmt_float(g.value),
            fmt_opt(g.shift_p_value),
            fmt_opt(g.ci_low),
            fmt_opt(g.ci_high),
            provisional.to_string(),
        ]);
    }
}

fn pair_options(a: &CorrelationArgs) -> Result<SrsdOptions> {
    let params = params_from(&a.params)?;
    let mut options = SrsdOptions::new(params);
    if a.p_corr.is_some() || a.l_corr.is_some() {
        let mut corr = params;
        corr.p = a.p_corr.unwrap_or(params.p);
        corr.l = a.l_corr.unwrap_or(params.l);
        options.correlation_params = Some(
            corr.validate()
                .map_err(|e| CliError::Usage(e.to_string()))?,
        );
    }
    if !(a.confidence > 0.0 && a.confidence < 1.0) {
        return Err(CliError::Usage(format!(
            "--confidence must lie in (0, 1), got {}",
            a.confidence
        )));
    }
    options.confidence = a.confidence;
    Ok(options.skipping(a.skip.iter().map(|s| match s {
        SkipArg::Mean => Step::Mean,
        SkipArg::Variance => Step::Variance,
    })))
}

fn two_columns(input: &InputArgs) -> Result<(TimeSeries, TimeSeries)> {
    if input.columns.len() != 2 {
        return Err(CliError::Usage(format!(
            "exactly two value columns are required, got {}",
            input.columns.len()
        )));
    }
    let mut s = load(input)?;
    let y = s.pop().expect("two columns");
    let x = s.pop().expect("two columns");
    Ok((x, y))
}

fn detect_pair(a: CorrelationArgs) -> Result<()> {
    let options = pair_options(&a)?;
    let (x, y) = two_columns(&a.input)?;
    let r = run_srsd_with(&x, &y, &options)?;
    let text = match a.output.format {
        Format::Json => {
            let mut echo = params_echo(&a.input, &options.params);
            echo["p_corr"] = json!(options.correlation_params.map(|c| c.p));
            echo["l_corr"] = json!(options.correlation_params.map(|c| c.l));
            echo["confidence"] = json!(options.confidence);
            echo["skip"] = json!(options.skip);
            Envelope::new("detect-correlation", echo, r).to_json()?
        }
        Format::Csv => pair_table(&a.input.columns, &r),
    };
    emit(a.output.output.as_deref(), &text)
}

fn pair_table(columns: &[String], r: &SrsdResult) -> String {
    let offset = r.index_offset();
    let mut table = regime_table();
    let series = [&r.x, &r.y];
    if let Some(ms) = &r.mean_results {
        for ((m, name), s) in ms.iter().zip(columns).zip(series) {
            push_regimes(&mut table, name, s, offset, &m.regimes, &m.change_points);
        }
    }
    if let Some(vs) = &r.variance_results {
        for ((v, name), s) in vs.iter().zip(columns).zip(series) {
            push_regimes(&mut table, name, s, offset, &v.regimes, &v.change_points);
        }
    }
    push_regimes(
        &mut table,
        "correlation",
        &r.x,
        offset,
        &r.correlation.regimes,
        &r.correlation.change_points,
    );
    table.finish()
}

fn resolve_seed(flag: Option<u64>) -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(text) => text.trim().parse().map(Some).map_err(|_| {
            CliError::Usage(format!(
                "{SEED_ENV} must be an unsigned integer, got {text:?}"
            ))
        }),
        Err(_) => Ok(flag),
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut spec = match &a.spec {
        Some(path) => read_spec(path)?,
        None => RegimeSpec::reference(0),
    };
    if let Some(seed) = resolve_seed(a.seed)? {
        spec.seed = seed;
    }
    let (x, y) = generate_pair(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut table = CsvTable::new(&["index", "x", "y"]);
    for (i, (a, b)) in x.values().iter().zip(y.values()).enumerate() {
        table.row(&[(i + 1).to_string(), fmt_float(*a), fmt_float(*b)]);
    }
    emit(a.output.as_deref(), &table.finish())
}

fn read_spec(path: &Path) -> Result<RegimeSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let params = params_from(&a.params)?;
    let (x, y) = two_columns(&a.input)?;
    if a.window < 2 {
        return Err(CliError::Usage("--window must be at least 2".into()));
    }
    let r = run_srsd_with(&x, &y, &SrsdOptions::new(params))?;
    let offset = r.index_offset();
    let raw = running_correlation(&x, &y, a.window)?;
    let adjusted = if r.x_normalized.len() >= a.window {
        running_correlation(&r.x_normalized, &r.y_normalized, a.window)?
    } else {
        Vec::new()
    };
    let label = |i: usize| {
        x.labels()
            .map(|_| fmt_float(x.label_at(i)))
            .unwrap_or_default()
    };
    let mut table = CsvTable::new(&[
        "start",
        "end",
        "start_label",
        "end_label",
        "r_raw",
        "r_adjusted",
    ]);
    for (k, r_raw) in raw.iter().enumerate() {
        let (start, end) = (k + 1, k + a.window);
        let adj = k
            .checked_sub(offset)
            .and_then(|j| adjusted.get(j))
            .copied()
            .flatten();
        table.row(&[
            start.to_string(),
            end.to_string(),
            label(start),
            label(end),
            fmt_opt(*r_raw),
            fmt_opt(adj),
        ]);
    }
    emit(a.output.as_deref(), &table.finish())?;
    if let Some(path) = &a.traces {
        emit(Some(path), &trace_table(&r))?;
    }
    Ok(())
}

/// Per-index shift-index traces, keyed by input row number.
fn trace_table(r: &SrsdResult) -> String {
    let mut table = CsvTable::new(&[
        "index",
        "label",
        "x",
        "y",
        "x_rsi",
        "y_rsi",
        "x_rssi",
        "y_rssi",
        "sum_rssi",
        "diff_rssi",
    ]);
    let offset = r.index_offset();
    let pick = |v: Option<&Vec<f64>>, i: usize| v.and_then(|t| t.get(i)).copied();
    let means = r.mean_results.as_ref();
    let vars = r.variance_results.as_ref();
    let sum = r.correlation.sum_channel.as_ref().map(|c| &c.rssi_trace);
    let diff = r.correlation.diff_channel.as_ref().map(|c| &c.rssi_trace);
    for i in 0..r.x.len() {
        let label =
            r.x.labels()
                .map(|_| fmt_float(r.x.label_at(i + 1)))
                .unwrap_or_default();
        table.row(&[
            (i + 1 + offset).to_string(),
            label,
            fmt_float(r.x.values()[i]),
            fmt_float(r.y.values()[i]),
            fmt_opt(pick(means.map(|m| &m[0].rsi_trace), i)),
            fmt_opt(pick(means.map(|m| &m[1].rsi_trace), i)),
            fmt_opt(pick(vars.map(|v| &v[0].rssi_trace), i)),
            fmt_opt(pick(vars.map(|v| &v[1].rssi_trace), i)),
            fmt_opt(pick(sum, i)),
            fmt_opt(pick(diff, i)),
        ]);
    }
    table.finish()
}
