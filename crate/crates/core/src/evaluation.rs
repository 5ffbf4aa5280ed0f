//! Reclassification experiment: every grouped model is used as a query,
//! routed through the representatives, and counted as a success when it
//! lands in its own general class.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::representatives::{build_representative_set, RepresentativeSet};
use crate::retrieval::rank_classes_excluding;
use crate::taxonomy::{GeneralClass, GroupedClasses};
use crate::{DescriptorMap, ModelId};

/// `Q` correctly routed queries out of `N` class members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccessfulRate {
    pub class_name: String,
    pub q: usize,
    pub n: usize,
}

impl SuccessfulRate {
    pub fn new(class_name: impl Into<String>, q: usize, n: usize) -> Result<Self> {
        if n == 0 || q > n {
            return Err(Error::InvalidParameter(format!("invalid rate {q}/{n}")));
        }
        Ok(SuccessfulRate {
            class_name: class_name.into(),
            q,
            n,
        })
    }

    pub fn rate(&self) -> f64 {
        self.q as f64 / self.n as f64
    }

    /// Percentage in hundredths of a percent, rounded half up with integer
    /// arithmetic.
    pub fn basis_points(&self) -> u64 {
        let (q, n) = (self.q as u64, self.n as u64);
        (q * 20_000 + n) / (2 * n)
    }

    /// `SR% (Q/N)` with two decimals, e.g. `90.82% (89/98)`.
    pub fn cell(&self) -> String {
        let bp = self.basis_points();
        format!("{}.{:02}% ({}/{})", bp / 100, bp % 100, self.q, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Each subclass routes on its own with one medoid; a query counts as
    /// correct when routed to any subclass of its general class.
    SingleRep,
    /// Each general class routes with the medoids of all its subclasses.
    MultiRep,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::SingleRep => "single-rep",
            Mode::MultiRep => "multi-rep",
        })
    }
}

/// The top-ranked class for a database model used as a query.
pub fn route_query(query_id: &ModelId, reps: &RepresentativeSet, descriptors: &DescriptorMap) -> Result<String> {
    route_query_with(query_id, reps, descriptors, false)
}

/// With `exclude_self`, a query that is itself a representative is
/// compared against its subclass runner-up instead.
pub fn route_query_with(
    query_id: &ModelId,
    reps: &RepresentativeSet,
    descriptors: &DescriptorMap,
    exclude_self: bool,
) -> Result<String> {
    let query = descriptors
        .get(query_id)
        .ok_or_else(|| Error::UnknownModel(query_id.clone()))?;
    let exclude = exclude_self.then_some(query_id);
    let ranked = rank_classes_excluding(query, reps, descriptors, exclude)?;
    Ok(ranked.top().class.clone())
}

/// `routed` maps each query to the general class it was routed to.
pub fn successful_rate(class: &GeneralClass, routed: &HashMap<ModelId, String>) -> Result<SuccessfulRate> {
    let mut q = 0;
    for m in class.members() {
        let got = routed
            .get(m)
            .ok_or_else(|| Error::InvalidParameter(format!("model {m} was not routed")))?;
        if *got == class.name {
            q += 1;
        }
    }
    SuccessfulRate::new(class.name.clone(), q, class.size())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeReport {
    pub mode: Mode,
    pub rows: Vec<SuccessfulRate>,
    pub total: SuccessfulRate,
}

pub fn run_experiment(
    grouped: &GroupedClasses,
    descriptors: &DescriptorMap,
    mode: Mode,
    exclude_self: bool,
) -> Result<ModeReport> {
    let (routing, parent): (GroupedClasses, HashMap<&str, &str>) = match mode {
        Mode::MultiRep => (grouped.clone(), HashMap::new()),
        Mode::SingleRep => {
            let parent = grouped
                .classes
                .iter()
                .flat_map(|c| c.subclasses.iter().map(move |s| (s.name.as_str(), c.name.as_str())))
                .collect();
            (grouped.split_subclasses(), parent)
        }
    };
    let reps = build_representative_set(&routing, descriptors)?;
    let queries: Vec<&ModelId> = grouped.members().collect();
    let routed = queries
        .par_iter()
        .map(|&id| {
            let class = route_query_with(id, &reps, descriptors, exclude_self)?;
            let general = match mode {
                Mode::MultiRep => class,
                Mode::SingleRep => parent.get(class.as_str()).map_or(class.clone(), |p| (*p).to_owned()),
            };
            Ok((id.clone(), general))
        })
        .collect::<Result<HashMap<_, _>>>()?;

    let rows = grouped
        .classes
        .iter()
        .map(|c| successful_rate(c, &routed))
        .collect::<Result<Vec<_>>>()?;
    let total = SuccessfulRate::new("Total", rows.iter().map(|r| r.q).sum(), rows.iter().map(|r| r.n).sum())?;
    Ok(ModeReport { mode, rows, total })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentReport {
    pub single: ModeReport,
    pub multi: ModeReport,
    /// Grouped models left out because they could not be indexed.
    pub excluded_models: usize,
}

impl ExperimentReport {
    pub fn run(grouped: &GroupedClasses, descriptors: &DescriptorMap, exclude_self: bool) -> Result<Self> {
        Ok(ExperimentReport {
            single: run_experiment(grouped, descriptors, Mode::SingleRep, exclude_self)?,
            multi: run_experiment(grouped, descriptors, Mode::MultiRep, exclude_self)?,
            excluded_models: 0,
        })
    }
}

/// Aligned text table, one row per class plus a total row.
pub fn report_table(report: &ExperimentReport) -> String {
    let rows: Vec<(&str, usize, String, String)> = report
        .single
        .rows
        .iter()
        .zip(&report.multi.rows)
        .chain(std::iter::once((&report.single.total, &report.multi.total)))
        .map(|(s, m)| (s.class_name.as_str(), s.n, s.cell(), m.cell()))
        .collect();
    let name_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("Class".len());
    let cell_w = rows
        .iter()
        .map(|r| r.2.len().max(r.3.len()))
        .max()
        .unwrap_or(0)
        .max("multi-rep".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_w$}  {:>5}  {:<cell_w$}  {:<cell_w$}",
        "Class", "N", "single-rep", "multi-rep"
    );
    for (name, n, s, m) in &rows {
        let _ = writeln!(out, "{name:<name_w$}  {n:>5}  {s:<cell_w$}  {m:<cell_w$}");
    }
    let _ = writeln!(out, "# excluded models: {}", report.excluded_models);
    out
}

/// `class,N,mode,Q,SR` rows for both modes.
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut write = |fields: [&str; 5]| w.write_record(fields).expect("writing to memory");
    write(["class", "N", "mode", "Q", "SR"]);
    for mode in [&report.single, &report.multi] {
        for r in mode.rows.iter().chain(std::iter::once(&mode.total)) {
            write([
                &r.class_name,
                &r.n.to_string(),
                &mode.mode.to_string(),
                &r.q.to_string(),
                &format!("{:.6}", r.rate()),
            ]);
        }
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV of UTF-8 fields")
}
