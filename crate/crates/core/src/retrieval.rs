//! Query routing over class representatives, class-by-class retrieval, and
//! the exhaustive baseline.
//!
//! Cost is counted in distance evaluations: routing costs `R` (one per
//! representative), searching a class costs its size, and the baseline
//! costs `N`.

use std::fmt::Write as _;

use crate::descriptor::descriptor_distance;
use crate::error::{Error, Result};
use crate::representatives::RepresentativeSet;
use crate::taxonomy::GroupedClasses;
use crate::{DescriptorMap, ModelId, ShapeDescriptor};

#[derive(Debug, Clone, PartialEq)]
pub struct RankedClass {
    pub class: String,
    /// Smallest distance between the query and any representative of the
    /// class; infinite when the class has none left to compare.
    pub distance: f64,
    pub nearest_subclass: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedClasses {
    pub ordering: Vec<RankedClass>,
    pub evaluations: u64,
}

impl RankedClasses {
    pub fn top(&self) -> &RankedClass {
        &self.ordering[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub model_id: ModelId,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub model_id: ModelId,
    pub distance: f64,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RetrievalResult {
    pub answers: Vec<Answer>,
    pub classes_visited: Vec<String>,
    pub distance_evaluations: u64,
}

fn descriptor<'a>(descriptors: &'a DescriptorMap, id: &ModelId) -> Result<&'a ShapeDescriptor> {
    descriptors.get(id).ok_or_else(|| Error::MissingDescriptor(id.clone()))
}

/// Orders every class by its nearest representative. Ties between classes
/// go to the smaller class name, ties inside a class to the smaller
/// subclass name.
pub fn rank_classes(
    query: &ShapeDescriptor,
    reps: &RepresentativeSet,
    descriptors: &DescriptorMap,
) -> Result<RankedClasses> {
    rank_classes_excluding(query, reps, descriptors, None)
}

/// [`rank_classes`] where the representative equal to `exclude` is
/// replaced by its subclass runner-up, or dropped if there is none.
pub fn rank_classes_excluding(
    query: &ShapeDescriptor,
    reps: &RepresentativeSet,
    descriptors: &DescriptorMap,
    exclude: Option<&ModelId>,
) -> Result<RankedClasses> {
    if reps.total() == 0 {
        return Err(Error::NoRepresentatives);
    }
    let mut evaluations = 0;
    let mut ordering = Vec::with_capacity(reps.classes.len());
    for class in &reps.classes {
        let mut best: Option<(f64, &str)> = None;
        for rep in &class.entries {
            let id = match exclude {
                Some(x) if *x == rep.model_id => match &rep.runner_up {
                    Some(r) => r,
                    None => continue,
                },
                _ => &rep.model_id,
            };
            let d = descriptor_distance(query, descriptor(descriptors, id)?)?.value();
            evaluations += 1;
            let better = match best {
                None => true,
                Some((bd, bs)) => d < bd || (d == bd && rep.subclass.as_str() < bs),
            };
            if better {
                best = Some((d, &rep.subclass));
            }
        }
        let (distance, nearest) = best.unwrap_or((f64::INFINITY, ""));
        ordering.push(RankedClass {
            class: class.class.clone(),
            distance,
            nearest_subclass: nearest.to_owned(),
        });
    }
    ordering.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.class.cmp(&b.class)));
    Ok(RankedClasses { ordering, evaluations })
}

fn by_distance_then_id(a: &Match, b: &Match) -> std::cmp::Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.model_id.cmp(&b.model_id))
}

/// Matches the query against every member and keeps the best `k`.
pub fn search_in_class(
    query: &ShapeDescriptor,
    class_members: &[ModelId],
    descriptors: &DescriptorMap,
    k: usize,
) -> Result<Vec<Match>> {
    if class_members.is_empty() {
        return Err(Error::InvalidParameter("class has no members".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let mut matches = scan(query, class_members.iter(), descriptors)?;
    matches.truncate(k);
    Ok(matches)
}

fn scan<'a>(
    query: &ShapeDescriptor,
    members: impl Iterator<Item = &'a ModelId>,
    descriptors: &DescriptorMap,
) -> Result<Vec<Match>> {
    let mut matches = members
        .map(|m| {
            Ok(Match {
                model_id: m.clone(),
                distance: descriptor_distance(query, descriptor(descriptors, m)?)?.value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    matches.sort_by(by_distance_then_id);
    Ok(matches)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetrieveOptions {
    pub k: usize,
    /// Most classes to visit; clamped to the number of classes.
    pub class_budget: usize,
    /// Re-sort collected answers by distance instead of keeping class-visit
    /// order.
    pub global_sort: bool,
}

/// Visits classes nearest-first, exhausting each one, until at least `k`
/// answers are collected or `class_budget` classes were visited. Answers
/// from an earlier class rank above those of later classes.
pub fn retrieve(
    query: &ShapeDescriptor,
    reps: &RepresentativeSet,
    grouped: &GroupedClasses,
    descriptors: &DescriptorMap,
    k: usize,
    class_budget: usize,
) -> Result<RetrievalResult> {
    retrieve_with(
        query,
        reps,
        grouped,
        descriptors,
        RetrieveOptions {
            k,
            class_budget,
            global_sort: false,
        },
    )
}

pub fn retrieve_with(
    query: &ShapeDescriptor,
    reps: &RepresentativeSet,
    grouped: &GroupedClasses,
    descriptors: &DescriptorMap,
    options: RetrieveOptions,
) -> Result<RetrievalResult> {
    if options.k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if options.class_budget == 0 {
        return Err(Error::InvalidParameter("class budget must be positive".into()));
    }
    let ranked = rank_classes(query, reps, descriptors)?;
    let budget = options.class_budget.min(ranked.ordering.len());
    let mut result = RetrievalResult {
        distance_evaluations: ranked.evaluations,
        ..Default::default()
    };
    for entry in ranked.ordering.iter().take(budget) {
        let class = grouped
            .get(&entry.class)
            .ok_or_else(|| Error::Store(format!("class `{}` missing from grouping", entry.class)))?;
        let members: Vec<ModelId> = class.members().cloned().collect();
        let matches = search_in_class(query, &members, descriptors, members.len())?;
        result.distance_evaluations += members.len() as u64;
        result.classes_visited.push(entry.class.clone());
        result.answers.extend(matches.into_iter().map(|m| Answer {
            model_id: m.model_id,
            distance: m.distance,
            class: entry.class.clone(),
        }));
        if result.answers.len() >= options.k {
            break;
        }
    }
    if options.global_sort {
        result.answers.sort_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then_with(|| a.model_id.cmp(&b.model_id))
        });
    }
    result.answers.truncate(options.k);
    Ok(result)
}

/// Exhaustive scan over every grouped model.
pub fn brute_force_search(
    query: &ShapeDescriptor,
    grouped: &GroupedClasses,
    descriptors: &DescriptorMap,
    k: usize,
) -> Result<RetrievalResult> {
    let placements = grouped.placements();
    let matches = scan(query, grouped.members(), descriptors)?;
    let distance_evaluations = matches.len() as u64;
    let answers = matches
        .into_iter()
        .take(k)
        .map(|m| {
            let class = grouped.classes[placements[&m.model_id].class].name.clone();
            Answer {
                model_id: m.model_id,
                distance: m.distance,
                class,
            }
        })
        .collect();
    Ok(RetrievalResult {
        answers,
        classes_visited: Vec::new(),
        distance_evaluations,
    })
}

/// `<rank>\t<model_id>\t<distance>\t<class>` lines and a trailer with the
/// cost counter and visited classes.
pub fn format_tsv(result: &RetrievalResult) -> String {
    let mut out = String::new();
    for (i, a) in result.answers.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", i + 1, a.model_id, a.distance, a.class);
    }
    let _ = writeln!(
        out,
        "# evaluations={} classes={}",
        result.distance_evaluations,
        result.classes_visited.join(",")
    );
    out
}
