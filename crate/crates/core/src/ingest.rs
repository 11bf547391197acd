//! Dataset readers and writers.
//!
//! Three text formats are supported:
//!
//! * the sktime/UEA `.ts` format (`@`-directives, `@data`, one record per
//!   line, channels separated by `:`, class label last);
//! * a flat CSV: `id,label,v0,v1,...` with `t * d` values in time-major order;
//! * a weights CSV: `id,w0,...,w_{t-1}`.
//!
//! LF and CRLF line endings are both accepted. Blank lines and `#` comments
//! are skipped. Line numbers in errors are 1-based.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, ParseErrorKind, Result};
use crate::series::{FeatureWeights, LabeledDataset, MtsInstance};

/// Header metadata of a `.ts` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsHeader {
    pub problem_name: String,
    pub dimensions: usize,
    pub series_length: usize,
    pub class_labels: Vec<String>,
    pub equal_length: bool,
}

fn parse_value(line: usize, raw: &str) -> Result<f64> {
    let raw = raw.trim();
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, ParseErrorKind::NonNumeric(raw.to_string()))),
    }
}

fn parse_bool(line: usize, key: &str, raw: Option<&str>) -> Result<bool> {
    match raw.map(str::to_ascii_lowercase).as_deref() {
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        _ => Err(Error::parse(
            line,
            ParseErrorKind::BadHeader(format!("@{key} expects true or false")),
        )),
    }
}

fn parse_count(line: usize, key: &str, raw: Option<&str>) -> Result<usize> {
    raw.and_then(|r| r.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            Error::parse(line, ParseErrorKind::BadHeader(format!("@{key} expects a positive integer")))
        })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parse a `.ts` document, returning its header alongside the dataset.
pub fn parse_ts_with_header(text: &str) -> Result<(TsHeader, LabeledDataset)> {
    let mut problem_name = None;
    let mut dimensions = None;
    let mut series_length = None;
    let mut class_labels: Option<Vec<String>> = None;
    let mut equal_length = None;
    let mut lines = content_lines(text);
    let mut data_line = None;

    for (no, line) in lines.by_ref() {
        let Some(directive) = line.strip_prefix('@') else {
            return Err(Error::parse(
                no,
                ParseErrorKind::BadHeader(format!("unexpected line before @data: {line:?}")),
            ));
        };
        let mut parts = directive.split_whitespace();
        let key = parts.next().unwrap_or_default().to_ascii_lowercase();
        match key.as_str() {
            "problemname" => problem_name = parts.next().map(str::to_string),
            "timestamps" => {
                if parse_bool(no, "timeStamps", parts.next())? {
                    return Err(Error::parse(no, ParseErrorKind::TimestampsUnsupported));
                }
            }
            "univariate" => {
                if parse_bool(no, "univariate", parts.next())? {
                    dimensions = Some(1);
                }
            }
            "dimensions" | "dimension" => dimensions = Some(parse_count(no, "dimensions", parts.next())?),
            "serieslength" => series_length = Some(parse_count(no, "seriesLength", parts.next())?),
            "equallength" => {
                let eq = parse_bool(no, "equalLength", parts.next())?;
                if !eq {
                    return Err(Error::parse(no, ParseErrorKind::UnequalLength));
                }
                equal_length = Some(eq);
            }
            "classlabel" => {
                if !parse_bool(no, "classLabel", parts.next())? {
                    return Err(Error::parse(
                        no,
                        ParseErrorKind::BadHeader("unlabelled datasets are not supported".into()),
                    ));
                }
                let labels: Vec<String> = parts.map(str::to_string).collect();
                if labels.is_empty() {
                    return Err(Error::parse(
                        no,
                        ParseErrorKind::BadHeader("@classLabel true needs at least one label".into()),
                    ));
                }
                class_labels = Some(labels);
            }
            "data" => {
                data_line = Some(no);
                break;
            }
            // @missing, @targetLabel and unknown directives carry nothing we use
            _ => {}
        }
    }

    let Some(data_line) = data_line else {
        let last = text.lines().count().max(1);
        return Err(Error::parse(last, ParseErrorKind::MissingData));
    };
    let missing = |what: &str| {
        Error::parse(data_line, ParseErrorKind::BadHeader(format!("missing {what} directive")))
    };
    let records: Vec<(usize, &str)> = lines.collect();
    // older archive files omit @dimensions and sometimes @seriesLength;
    // both then follow the first record
    let first = records.first().map(|(_, l)| l.split(':').collect::<Vec<_>>());
    let dimensions = dimensions.or_else(|| first.as_ref().map(|f| f.len().saturating_sub(1)).filter(|&n| n >= 1));
    let series_length = series_length.or_else(|| first.as_ref().map(|f| f[0].split(',').count()));
    let header = TsHeader {
        problem_name: problem_name.unwrap_or_default(),
        dimensions: dimensions.ok_or_else(|| missing("@dimensions"))?,
        series_length: series_length.ok_or_else(|| missing("@seriesLength"))?,
        class_labels: class_labels.ok_or_else(|| missing("@classLabel"))?,
        equal_length: equal_length.ok_or_else(|| missing("@equalLength"))?,
    };

    let (t, d) = (header.series_length, header.dimensions);
    let mut instances = Vec::new();
    let mut labels = Vec::new();
    for (no, line) in records {
        let fields: Vec<&str> = line.split(':').collect();
        if fields.len() != d + 1 {
            return Err(Error::parse(
                no,
                ParseErrorKind::FieldCount { expected: d + 1, found: fields.len() },
            ));
        }
        let mut channels = Vec::with_capacity(d);
        for field in &fields[..d] {
            let values = field
                .split(',')
                .map(|v| parse_value(no, v))
                .collect::<Result<Vec<_>>>()?;
            if values.len() != t {
                return Err(Error::parse(
                    no,
                    ParseErrorKind::RaggedLength { expected: t, found: values.len() },
                ));
            }
            channels.push(values);
        }
        let label_raw = fields[d].trim();
        let label = header
            .class_labels
            .iter()
            .position(|l| l == label_raw)
            .ok_or_else(|| Error::parse(no, ParseErrorKind::UnknownLabel(label_raw.to_string())))?;
        let mut values = Vec::with_capacity(t * d);
        for step in 0..t {
            values.extend(channels.iter().map(|ch| ch[step]));
        }
        instances.push(MtsInstance::new(instances.len().to_string(), t, d, values)?);
        labels.push(label);
    }

    let dataset = LabeledDataset::with_class_names(instances, labels, header.class_labels.clone())?;
    Ok((header, dataset))
}

/// Parse a `.ts` document. Class labels map to integers in header order.
pub fn parse_ts(text: &str) -> Result<LabeledDataset> {
    parse_ts_with_header(text).map(|(_, ds)| ds)
}

/// Write a dataset in `.ts` form. Instance ids are not preserved; the
/// parser assigns record indices as ids.
pub fn serialize_ts(dataset: &LabeledDataset, problem_name: &str) -> Result<String> {
    let (t, d) = dataset
        .shape()
        .ok_or_else(|| Error::invalid("cannot serialize an empty dataset"))?;
    if let Some(bad) = dataset.class_names().iter().find(|n| n.contains(char::is_whitespace) || n.contains(':')) {
        return Err(Error::invalid(format!("class name {bad:?} is not representable")));
    }
    let mut out = String::new();
    let _ = writeln!(out, "@problemName {problem_name}");
    let _ = writeln!(out, "@timeStamps false");
    let _ = writeln!(out, "@missing false");
    let _ = writeln!(out, "@univariate {}", d == 1);
    if d > 1 {
        let _ = writeln!(out, "@dimensions {d}");
    }
    let _ = writeln!(out, "@equalLength true");
    let _ = writeln!(out, "@seriesLength {t}");
    let _ = writeln!(out, "@classLabel true {}", dataset.class_names().join(" "));
    let _ = writeln!(out, "@data");
    for (inst, &label) in dataset.instances().iter().zip(dataset.labels()) {
        for ch in 0..d {
            let channel: Vec<String> = (0..t).map(|s| format!("{:?}", inst.get(s, ch))).collect();
            out.push_str(&channel.join(","));
            out.push(':');
        }
        out.push_str(&dataset.class_names()[label]);
        out.push('\n');
    }
    Ok(out)
}

/// Parse the flat CSV layout: `id,label,` then `t * d` time-major values.
pub fn parse_csv(text: &str, t: usize, d: usize) -> Result<LabeledDataset> {
    if t == 0 || d == 0 {
        return Err(Error::invalid("t and d must be positive"));
    }
    let mut instances = Vec::new();
    let mut labels = Vec::new();
    for (no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != t * d + 2 {
            return Err(Error::parse(
                no,
                ParseErrorKind::FieldCount { expected: t * d + 2, found: fields.len() },
            ));
        }
        let label = fields[1]
            .parse::<usize>()
            .map_err(|_| Error::parse(no, ParseErrorKind::UnknownLabel(fields[1].to_string())))?;
        let values = fields[2..]
            .iter()
            .map(|v| parse_value(no, v))
            .collect::<Result<Vec<_>>>()?;
        instances.push(MtsInstance::new(fields[0], t, d, values)?);
        labels.push(label);
    }
    let n_classes = labels.iter().max().map_or(1, |m| m + 1);
    LabeledDataset::new(instances, labels, n_classes)
}

pub fn serialize_csv(dataset: &LabeledDataset) -> String {
    let mut out = String::new();
    for (inst, label) in dataset.instances().iter().zip(dataset.labels()) {
        let _ = write!(out, "{},{}", inst.id(), label);
        for v in inst.values() {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    out
}

/// Parse a weights file: `id,w0,...,w_{t-1}` per line.
pub fn parse_weights(text: &str, t: usize) -> Result<HashMap<String, FeatureWeights>> {
    let mut out = HashMap::new();
    for (no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != t + 1 {
            return Err(Error::parse(
                no,
                ParseErrorKind::FieldCount { expected: t + 1, found: fields.len() },
            ));
        }
        let values = fields[1..]
            .iter()
            .map(|v| parse_value(no, v))
            .collect::<Result<Vec<_>>>()?;
        let id = fields[0].to_string();
        if out.contains_key(&id) {
            return Err(Error::parse(no, ParseErrorKind::DuplicateId(id)));
        }
        out.insert(id, FeatureWeights::new(values)?);
    }
    Ok(out)
}

/// Write weights sorted by id so output is stable.
pub fn serialize_weights(weights: &HashMap<String, FeatureWeights>) -> String {
    let mut ids: Vec<&String> = weights.keys().collect();
    ids.sort();
    let mut out = String::new();
    for id in ids {
        out.push_str(id);
        for w in weights[id].as_slice() {
            let _ = write!(out, ",{w:?}");
        }
        out.push('\n');
    }
    out
}
