//! File formats and table rendering.
//!
//! JSON carries full doubles; CSV rounds to six significant digits.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::belief::{Belief, Event, NumericPolicy, StateSpace};
use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::family::UpdateFamily;
use crate::model::{IUModel, UpdateRule, WIUModel};

/// JSON layout of an updating model; `gamma` turns it into a weighted one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub prior: Belief,
    pub distance: DistanceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<NumericPolicy>,
}

/// A model loaded from a [`ModelFile`].
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedModel {
    Inertial(IUModel),
    Weighted(WIUModel),
}

impl ModelFile {
    pub fn into_model(self) -> Result<LoadedModel> {
        let space = StateSpace::new(self.states)?;
        let base = IUModel::with_policy(space, self.prior, self.distance, self.policy.unwrap_or_default())?;
        Ok(match self.gamma {
            Some(g) => LoadedModel::Weighted(WIUModel::new(base, g)?),
            None => LoadedModel::Inertial(base),
        })
    }
}

impl UpdateRule for LoadedModel {
    fn space(&self) -> &StateSpace {
        match self {
            LoadedModel::Inertial(m) => m.space(),
            LoadedModel::Weighted(m) => m.space(),
        }
    }
    fn prior(&self) -> &Belief {
        match self {
            LoadedModel::Inertial(m) => m.prior(),
            LoadedModel::Weighted(m) => m.prior(),
        }
    }
    fn update(&self, e: Event) -> Result<Belief> {
        match self {
            LoadedModel::Inertial(m) => m.update(e),
            LoadedModel::Weighted(m) => m.update(e),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn read_family(path: &Path) -> Result<UpdateFamily> {
    UpdateFamily::from_file(read_json(path)?)
}

/// Six significant digits, trailing zeros trimmed, `-0` folded into `0`.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let scale = 10f64.powi(magnitude - 5);
    let rounded = if magnitude > 5 { (x / scale).round() * scale } else { x };
    let mut s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// Render rows as CSV, quoting fields where needed.
pub fn csv_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn belief_row(b: &Belief) -> Vec<String> {
    b.probs().iter().map(|&p| format_sig(p)).collect()
}

/// One row per event: event name, then the posterior.
pub fn family_csv(fam: &UpdateFamily) -> String {
    let header: Vec<String> = std::iter::once("event".to_string())
        .chain(fam.space().labels().iter().cloned())
        .collect();
    let rows: Vec<Vec<String>> = fam
        .iter()
        .map(|(e, b)| std::iter::once(fam.name(e)).chain(belief_row(b)).collect())
        .collect();
    csv_table(&header, &rows)
}

/// Aligned plain-text table of a family.
pub fn family_text(fam: &UpdateFamily) -> String {
    let labels = fam.space().labels();
    let names: Vec<String> = fam.events().map(|e| fam.name(e)).collect();
    let width = names.iter().map(String::len).chain(["prior".len()]).max().unwrap_or(5);
    let mut out = format!("{:width$}", "event");
    for l in labels {
        out.push_str(&format!("  {l:>10}"));
    }
    out.push('\n');
    let mut line = |name: &str, b: &Belief| {
        out.push_str(&format!("{name:width$}"));
        for p in b.probs() {
            out.push_str(&format!("  {:>10}", format_sig(*p)));
        }
        out.push('\n');
    };
    line("prior", fam.prior());
    for (name, (_, b)) in names.iter().zip(fam.iter()) {
        line(name, b);
    }
    out
}
