//! CSV and JSON outputs. CSV floats carry 17 significant digits so a
//! parse/serialize round trip reproduces the file byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, OutputFormat};
use crate::harness::experiments::{CltReport, LdReport, MomentReport, SllnReport, TailStatus};
use crate::harness::record::ExperimentRecord;
use crate::harness::svg::{histogram, LinePlot, Series};

/// `{:.16e}` for finite values; `NaN`, `inf` and `-inf` otherwise.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Integers and non-numeric fields pass through; anything else that parses
/// as a float is rewritten with [`format_float`].
fn normalize_field(field: &str) -> String {
    if field.parse::<i128>().is_ok() {
        return field.to_string();
    }
    match field.parse::<f64>() {
        Ok(x) => format_float(x),
        Err(_) => field.to_string(),
    }
}

fn normalize_csv(raw: &[u8]) -> Result<String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(raw);
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in reader.records() {
        let row = row?;
        writer.write_record(row.iter().map(normalize_field))?;
    }
    finish(writer)
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let raw = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    normalize_csv(&raw)
}

pub fn from_csv_str<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Flattened CSV of records: one `f_i` column per dimension and one
/// `T_j_r` column per component class seen in any record.
pub fn records_to_csv(records: &[ExperimentRecord]) -> Result<String> {
    let f_len = records.iter().map(|r| r.f.len()).max().unwrap_or(0);
    let classes: BTreeSet<(usize, usize)> = records
        .iter()
        .flat_map(|r| r.components.keys().filter_map(|k| parse_class(k)))
        .collect();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "n",
        "rep",
        "seed",
        "betti",
        "representation_sum",
        "non_maximal",
        "S_m2",
        "V_m2",
        "T_m2",
        "higher_order",
        "Y_q",
        "identity_violations",
        "wall_ms",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..f_len).map(|i| format!("f_{i}")));
    header.extend(classes.iter().map(|(j, r)| format!("T_{j}_{r}")));
    writer.write_record(&header)?;
    for rec in records {
        let mut row = vec![
            rec.n.to_string(),
            rec.rep.to_string(),
            rec.seed.to_string(),
            rec.betti.to_string(),
            rec.representation_sum.to_string(),
            rec.non_maximal.to_string(),
            rec.s_m2.to_string(),
            rec.v_m2.to_string(),
            rec.t_m2.to_string(),
            rec.higher_order.to_string(),
            rec.y_q.to_string(),
            rec.identity_violations.to_string(),
            format_float(rec.wall_ms),
        ];
        row.extend((0..f_len).map(|i| rec.f.get(i).map(u64::to_string).unwrap_or_default()));
        row.extend(
            classes
                .iter()
                .map(|(j, r)| rec.components.get(&format!("{j},{r}")).copied().unwrap_or(0).to_string()),
        );
        writer.write_record(&row)?;
    }
    finish(writer)
}

fn parse_class(key: &str) -> Option<(usize, usize)> {
    let (j, r) = key.split_once(',')?;
    Some((j.parse().ok()?, r.parse().ok()?))
}

/// Inverse of [`records_to_csv`]; zero `T_j_r` cells are dropped.
pub fn records_from_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let bad = |what: String| Error::InvalidConfig(format!("record CSV: {what}"));
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let mut fields = BTreeMap::new();
        let mut f = Vec::new();
        let mut components = BTreeMap::new();
        for (name, value) in header.iter().zip(row.iter()) {
            if let Some(i) = name.strip_prefix("f_") {
                if !value.is_empty() {
                    let i: usize = i.parse().map_err(|_| bad(format!("column {name}")))?;
                    if f.len() != i {
                        return Err(bad(format!("column {name} out of order")));
                    }
                    f.push(value.parse().map_err(|_| bad(format!("{name} = {value}")))?);
                }
            } else if let Some((j, r)) = name.strip_prefix("T_").and_then(|c| parse_class(&c.replacen('_', ",", 1))) {
                let c: u64 = value.parse().map_err(|_| bad(format!("{name} = {value}")))?;
                if c > 0 {
                    components.insert(format!("{j},{r}"), c);
                }
            } else {
                fields.insert(name.to_string(), value.to_string());
            }
        }
        let int = |key: &str| -> Result<u64> {
            fields
                .get(key)
                .ok_or_else(|| bad(format!("missing {key}")))?
                .parse()
                .map_err(|_| bad(format!("{key} is not an integer")))
        };
        let wall_ms = fields
            .get("wall_ms")
            .ok_or_else(|| bad("missing wall_ms".into()))?
            .parse()
            .map_err(|_| bad("wall_ms is not a number".into()))?;
        out.push(ExperimentRecord {
            n: int("n")? as usize,
            rep: int("rep")?,
            seed: int("seed")?,
            betti: int("betti")?,
            representation_sum: int("representation_sum")?,
            non_maximal: int("non_maximal")?,
            s_m2: int("S_m2")?,
            v_m2: int("V_m2")?,
            t_m2: int("T_m2")?,
            higher_order: int("higher_order")?,
            y_q: int("Y_q")?,
            f,
            components,
            identity_violations: int("identity_violations")?,
            wall_ms,
        });
    }
    Ok(out)
}

fn write(dir: &Path, name: String, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    log::info!("wrote {}", path.display());
    written.push(path);
    Ok(())
}

fn write_table<T: Serialize>(
    dir: &Path,
    stem: &str,
    format: OutputFormat,
    rows: &[T],
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    match format {
        OutputFormat::Csv => write(dir, format!("{stem}.csv"), &to_csv_string(rows)?, written),
        OutputFormat::Json => write(dir, format!("{stem}.json"), &to_json_string(rows)?, written),
    }
}

/// Writes the report, its tables, the records and the plots of one
/// experiment under `config.out_dir`; returns the files written.
struct Outputs<'a> {
    config: &'a ExperimentConfig,
    name: &'static str,
    written: Vec<PathBuf>,
}

impl<'a> Outputs<'a> {
    fn new(config: &'a ExperimentConfig, name: &'static str) -> Result<Self> {
        std::fs::create_dir_all(&config.out_dir)?;
        Ok(Self {
            config,
            name,
            written: Vec::new(),
        })
    }

    fn report<T: Serialize>(&mut self, report: &T) -> Result<()> {
        let dir = self.config.out_dir.clone();
        write(&dir, format!("{}_report.json", self.name), &to_json_string(report)?, &mut self.written)
    }

    fn table<T: Serialize>(&mut self, suffix: &str, rows: &[T]) -> Result<()> {
        let dir = self.config.out_dir.clone();
        let stem = format!("{}_{suffix}", self.name);
        write_table(&dir, &stem, self.config.format, rows, &mut self.written)
    }

    fn records(&mut self, records: &[ExperimentRecord]) -> Result<()> {
        if !self.config.write_records {
            return Ok(());
        }
        let dir = self.config.out_dir.clone();
        match self.config.format {
            OutputFormat::Csv => write(
                &dir,
                format!("{}_records.csv", self.name),
                &records_to_csv(records)?,
                &mut self.written,
            ),
            OutputFormat::Json => write(
                &dir,
                format!("{}_records.json", self.name),
                &to_json_string(records)?,
                &mut self.written,
            ),
        }
    }

    fn svg(&mut self, suffix: &str, svg: String) -> Result<()> {
        if !self.config.plots {
            return Ok(());
        }
        let dir = self.config.out_dir.clone();
        write(&dir, format!("{}_{suffix}.svg", self.name), &svg, &mut self.written)
    }
}

pub fn write_slln(report: &SllnReport) -> Result<Vec<PathBuf>> {
    let mut out = Outputs::new(&report.config, "slln")?;
    out.report(report)?;
    out.table("summary", &report.rows)?;
    out.table("statistics", &report.statistics)?;
    out.records(&report.records)?;
    let plot = LinePlot {
        title: format!("beta_{} / n^e, alpha = ({})", report.config.m, report.config.alpha),
        x_label: "n".into(),
        y_label: "mean ratio".into(),
        series: vec![Series::new(
            "mean ratio",
            report.rows.iter().map(|r| (r.n as f64, r.mean_ratio)).collect(),
        )],
        references: vec![("limit 1/(m+2)!".into(), report.prediction.slln_limit)],
    };
    out.svg("ratio", plot.render())?;
    Ok(out.written)
}

pub fn write_clt(report: &CltReport) -> Result<Vec<PathBuf>> {
    let mut out = Outputs::new(&report.config, "clt")?;
    out.report(report)?;
    out.table("summary", &report.rows)?;
    out.table("statistics", &report.statistics)?;
    out.records(&report.records)?;
    if let (Some(z), Some(row)) = (report.standardized_S.last(), report.rows.last()) {
        let title = format!("standardized S_m2 at n = {} ({:?})", row.n, report.regime);
        out.svg("histogram", histogram(&title, "z", z, 30, true))?;
    }
    let shape = |f: fn(&crate::harness::experiments::CltRow) -> f64| {
        report.rows.iter().map(|r| (r.n as f64, f(r))).collect()
    };
    let plot = LinePlot {
        title: "shape of standardized S_m2".into(),
        x_label: "n".into(),
        y_label: "value".into(),
        series: vec![
            Series::new("|skewness|", shape(|r| r.S_skewness.abs())),
            Series::new("|excess kurtosis|", shape(|r| r.S_excess_kurtosis.abs())),
            Series::new("KS distance", shape(|r| r.S_ks)),
        ],
        references: vec![("0".into(), 0.0)],
    };
    out.svg("shape", plot.render())?;
    Ok(out.written)
}

pub fn write_ld(report: &LdReport) -> Result<Vec<PathBuf>> {
    let mut out = Outputs::new(&report.config, "ld")?;
    out.report(report)?;
    out.table("summary", &report.rows)?;
    out.table("statistics", &report.statistics)?;
    out.records(&report.records)?;
    let mut series = Vec::new();
    for &eps in &report.config.epsilons {
        let rows: Vec<_> = report
            .rows
            .iter()
            .filter(|r| r.epsilon == eps && r.status != TailStatus::Trivial)
            .collect();
        series.push(Series::new(
            format!("log CP lower, eps = {eps}"),
            rows.iter().map(|r| (r.n as f64, r.log_cp_lower)).collect(),
        ));
        series.push(Series::new(
            format!("log bound, eps = {eps}"),
            rows.iter().map(|r| (r.n as f64, r.log_lower_bound)).collect(),
        ));
    }
    let plot = LinePlot {
        title: "lower tail: confidence bound against the rate bound".into(),
        x_label: "n".into(),
        y_label: "log probability".into(),
        series,
        references: Vec::new(),
    };
    out.svg("tail", plot.render())?;
    Ok(out.written)
}

pub fn write_moments(report: &MomentReport) -> Result<Vec<PathBuf>> {
    let mut out = Outputs::new(&report.config, "moments")?;
    out.report(report)?;
    out.table("summary", &report.rows)?;
    out.table("statistics", &report.statistics)?;
    out.records(&report.records)?;
    let z = |f: fn(&crate::harness::experiments::MomentRow) -> f64| {
        report.rows.iter().map(|r| (r.n as f64, f(r))).collect()
    };
    let plot = LinePlot {
        title: "empirical mean against the exact mean".into(),
        x_label: "n".into(),
        y_label: "z-score".into(),
        series: vec![
            Series::new("S_m2", z(|r| r.S_mean_z)),
            Series::new("V_m2", z(|r| r.V_mean_z)),
            Series::new("Y_q", z(|r| r.Y_q_mean_z)),
        ],
        references: vec![("+4".into(), 4.0), ("-4".into(), -4.0)],
    };
    out.svg("zscores", plot.render())?;
    Ok(out.written)
}
