//! One JSON object per line per (seed, generation).
//!
//! Non-finite numbers are written as `null`. An infinite KL divergence has
//! `null` as its value and a positive `*_zero_support` count.

use std::path::Path;

use serde::{Deserialize, Serialize};

use tneda::diagnostics::KlReport;
use tneda::engine::RunRecord;
use tneda::problems::relative_error;

use crate::config::Instance;
use crate::error::{read_file, BenchError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordLine {
    pub seed: u64,
    pub generation: usize,
    /// Distinct evaluations so far.
    pub calls: usize,
    pub new_evaluations: usize,
    pub best_value: Option<f64>,
    pub relative_error: Option<f64>,
    /// Best string so far, in the problem's original variable order.
    pub best: String,
    pub generation_best: Option<f64>,
    pub generation_median: Option<f64>,
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kl: Option<KlFields>,
    /// Milliseconds since the run started; the only field that differs
    /// between reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlFields {
    pub primary: Option<f64>,
    pub primary_zero_support: usize,
    pub reference: Option<f64>,
    pub reference_zero_support: usize,
    pub delta: Option<f64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl From<&KlReport> for KlFields {
    fn from(k: &KlReport) -> Self {
        KlFields {
            primary: finite(k.kl_primary.value),
            primary_zero_support: k.kl_primary.zero_support,
            reference: finite(k.kl_reference.value),
            reference_zero_support: k.kl_reference.zero_support,
            delta: k.delta,
        }
    }
}

impl RecordLine {
    pub fn new(seed: u64, rec: &RunRecord, instance: &Instance, wall_time_ms: Option<f64>) -> Self {
        RecordLine {
            seed,
            generation: rec.generation,
            calls: rec.calls,
            new_evaluations: rec.new_evaluations,
            best_value: finite(rec.best_value),
            relative_error: instance.optimum.and_then(|opt| finite(relative_error(rec.best_value, opt))),
            best: instance.to_original(&rec.best).to_string(),
            generation_best: finite(rec.generation_best),
            generation_median: finite(rec.generation_median),
            temperature: rec.temperature.and_then(finite),
            kl: rec.kl.as_ref().map(KlFields::from),
            wall_time_ms,
        }
    }

    /// Parses and checks one line: known fields only, a binary `best`
    /// string and consistent KL flags.
    pub fn parse(line: &str) -> std::result::Result<Self, String> {
        let r: RecordLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if r.best.is_empty() || !r.best.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(format!("best {:?} is not a bit string", r.best));
        }
        if r.new_evaluations > r.calls {
            return Err("more new evaluations than calls".into());
        }
        if let Some(kl) = &r.kl {
            if kl.primary.is_none() != (kl.primary_zero_support > 0)
                || kl.reference.is_none() != (kl.reference_zero_support > 0)
            {
                return Err("KL value and zero-support count disagree".into());
            }
            if kl.delta.is_some() != (kl.primary.is_some() && kl.reference.is_some()) {
                return Err("KL delta present without both divergences".into());
            }
        }
        Ok(r)
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Reads and validates a JSON-lines run file. Records must be in generation
/// order and belong to one seed.
pub fn read_run_file(path: &Path) -> Result<Vec<RecordLine>> {
    let text = read_file(path)?;
    let mut out: Vec<RecordLine> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r = RecordLine::parse(line).map_err(|e| BenchError::parse(path, format!("line {}: {e}", i + 1)))?;
        if let Some(prev) = out.last() {
            if r.seed != prev.seed || r.generation <= prev.generation || r.calls < prev.calls {
                return Err(BenchError::parse(path, format!("line {}: out of sequence", i + 1)));
            }
        }
        out.push(r);
    }
    if out.is_empty() {
        return Err(BenchError::parse(path, "no records"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"seed":1,"generation":0,"calls":10,"new_evaluations":10,"best_value":-3.0,"relative_error":0.25,"best":"0111","generation_best":-3.0,"generation_median":-2.0,"temperature":null}"#;

    #[test]
    fn parses_and_round_trips() {
        let r = RecordLine::parse(LINE).unwrap();
        assert_eq!(r.best, "0111");
        assert_eq!(r.to_line(), LINE);
    }

    #[test]
    fn schema_violations() {
        assert!(RecordLine::parse(&LINE.replace("0111", "01x1")).is_err());
        assert!(RecordLine::parse(&LINE.replace("\"seed\":1", "\"seed\":1,\"extra\":2")).is_err());
        assert!(RecordLine::parse(&LINE.replace("\"calls\":10", "\"calls\":3")).is_err());
        let kl = LINE.replace(
            "}",
            r#","kl":{"primary":null,"primary_zero_support":0,"reference":1.0,"reference_zero_support":0,"delta":null}}"#,
        );
        assert!(RecordLine::parse(&kl).is_err());
    }
}
