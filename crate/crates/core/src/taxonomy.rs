//! PSB `.cla` classification files and the regrouping of subclasses into
//! general classes.
//!
//! A `.cla` document looks like
//!
//! ```text
//! PSB 1
//! <numCategories> <numModels>
//! <name> <parentName> <numModels>
//! <id>
//! ...
//! ```
//!
//! Blank lines are ignored. Every category becomes a subclass; the parent
//! hierarchy is kept only as the `parent` label. A grouping file then says
//! which subclasses form each general class:
//!
//! ```text
//! # comment
//! class Airplanes
//!     biplane
//!     commercial
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::TaxonomyError;
use crate::ModelId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subclass {
    pub name: String,
    pub parent: String,
    pub members: Vec<ModelId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassTree {
    pub subclasses: Vec<Subclass>,
}

impl ClassTree {
    pub fn get(&self, name: &str) -> Option<&Subclass> {
        self.subclasses.iter().find(|s| s.name == name)
    }

    pub fn model_count(&self) -> usize {
        self.subclasses.iter().map(|s| s.members.len()).sum()
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> TaxonomyError {
    TaxonomyError::Syntax { line, msg: msg.into() }
}

pub fn parse_cla(text: &str) -> Result<ClassTree, TaxonomyError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (_, magic) = lines.next().ok_or_else(|| TaxonomyError::BadMagic(String::new()))?;
    if magic.split_whitespace().collect::<Vec<_>>() != ["PSB", "1"] {
        return Err(TaxonomyError::BadMagic(magic.to_owned()));
    }
    let (line, counts) = lines
        .next()
        .ok_or_else(|| TaxonomyError::CountMismatch("missing category/model counts".into()))?;
    let counts: Vec<&str> = counts.split_whitespace().collect();
    let [n_categories, n_models] = counts[..] else {
        return Err(syntax(line, "expected `<numCategories> <numModels>`"));
    };
    let n_categories: usize = n_categories
        .parse()
        .map_err(|_| syntax(line, "invalid category count"))?;
    let n_models: usize = n_models.parse().map_err(|_| syntax(line, "invalid model count"))?;

    let mut tree = ClassTree::default();
    let mut seen_models = HashSet::new();
    let mut seen_names = HashSet::new();
    while let Some((line, header)) = lines.next() {
        let toks: Vec<&str> = header.split_whitespace().collect();
        let [name, parent, count] = toks[..] else {
            return Err(syntax(line, "expected `<name> <parentName> <numModels>`"));
        };
        let count: usize = count
            .parse()
            .map_err(|_| syntax(line, format!("invalid model count `{count}`")))?;
        if !seen_names.insert(name.to_owned()) {
            return Err(TaxonomyError::DuplicateCategory(name.to_owned()));
        }
        let mut members = Vec::with_capacity(count);
        for k in 0..count {
            let id_tok = match lines.next() {
                Some((_, l)) if l.parse::<u64>().is_ok() => l,
                _ => {
                    return Err(TaxonomyError::CountMismatch(format!(
                        "category `{name}` declares {count} models, lists {k}"
                    )))
                }
            };
            let id = ModelId::from_psb(id_tok.parse().unwrap_or_default());
            if !seen_models.insert(id.clone()) {
                return Err(TaxonomyError::DuplicateModel(id));
            }
            members.push(id);
        }
        tree.subclasses.push(Subclass {
            name: name.to_owned(),
            parent: parent.to_owned(),
            members,
        });
    }
    if tree.subclasses.len() != n_categories {
        return Err(TaxonomyError::CountMismatch(format!(
            "header declares {n_categories} categories, found {}",
            tree.subclasses.len()
        )));
    }
    if tree.model_count() != n_models {
        return Err(TaxonomyError::CountMismatch(format!(
            "header declares {n_models} models, found {}",
            tree.model_count()
        )));
    }
    Ok(tree)
}

/// Ordered mapping from general class name to its subclass names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Grouping {
    pub classes: Vec<(String, Vec<String>)>,
}

impl Grouping {
    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let mut classes: Vec<(String, Vec<String>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let indented = raw.starts_with([' ', '\t']);
            if !indented {
                let name = line
                    .strip_prefix("class")
                    .filter(|rest| rest.starts_with([' ', '\t']))
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| syntax(i + 1, format!("expected `class <Name>`, got `{line}`")))?;
                if classes.iter().any(|(c, _)| c == name) {
                    return Err(TaxonomyError::DuplicateClass(name.to_owned()));
                }
                classes.push((name.to_owned(), Vec::new()));
            } else {
                let (_, subs) = classes
                    .last_mut()
                    .ok_or_else(|| syntax(i + 1, "subclass listed before any `class` line"))?;
                subs.push(line.to_owned());
            }
        }
        Ok(Grouping { classes })
    }

    /// Every non-empty category of the tree as its own class.
    pub fn identity(tree: &ClassTree) -> Self {
        Grouping {
            classes: tree
                .subclasses
                .iter()
                .filter(|s| !s.members.is_empty())
                .map(|s| (s.name.clone(), vec![s.name.clone()]))
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (class, subs) in &self.classes {
            let _ = writeln!(out, "class {class}");
            for s in subs {
                let _ = writeln!(out, "    {s}");
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralClass {
    pub name: String,
    pub subclasses: Vec<Subclass>,
}

impl GeneralClass {
    pub fn members(&self) -> impl Iterator<Item = &ModelId> {
        self.subclasses.iter().flat_map(|s| s.members.iter())
    }

    /// Class size `N`.
    pub fn size(&self) -> usize {
        self.subclasses.iter().map(|s| s.members.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupedClasses {
    pub classes: Vec<GeneralClass>,
}

/// Where a model sits inside a [`GroupedClasses`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub class: usize,
    pub subclass: usize,
}

impl GroupedClasses {
    pub fn model_count(&self) -> usize {
        self.classes.iter().map(GeneralClass::size).sum()
    }

    pub fn subclass_count(&self) -> usize {
        self.classes.iter().map(|c| c.subclasses.len()).sum()
    }

    pub fn get(&self, name: &str) -> Option<&GeneralClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn members(&self) -> impl Iterator<Item = &ModelId> {
        self.classes.iter().flat_map(GeneralClass::members)
    }

    pub fn placements(&self) -> HashMap<&ModelId, Placement> {
        let mut out = HashMap::with_capacity(self.model_count());
        for (ci, c) in self.classes.iter().enumerate() {
            for (si, s) in c.subclasses.iter().enumerate() {
                for m in &s.members {
                    out.insert(
                        m,
                        Placement {
                            class: ci,
                            subclass: si,
                        },
                    );
                }
            }
        }
        out
    }

    pub fn to_grouping(&self) -> Grouping {
        Grouping {
            classes: self
                .classes
                .iter()
                .map(|c| (c.name.clone(), c.subclasses.iter().map(|s| s.name.clone()).collect()))
                .collect(),
        }
    }

    /// Each subclass promoted to a class of its own.
    pub fn split_subclasses(&self) -> GroupedClasses {
        GroupedClasses {
            classes: self
                .classes
                .iter()
                .flat_map(|c| c.subclasses.iter())
                .map(|s| GeneralClass {
                    name: s.name.clone(),
                    subclasses: vec![s.clone()],
                })
                .collect(),
        }
    }

    /// Drops members for which `keep` is false; returns how many were
    /// dropped. Subclasses may end up empty.
    pub fn retain_members(&self, mut keep: impl FnMut(&ModelId) -> bool) -> (GroupedClasses, usize) {
        let mut dropped = 0;
        let mut out = self.clone();
        for s in out.classes.iter_mut().flat_map(|c| c.subclasses.iter_mut()) {
            let before = s.members.len();
            s.members.retain(|m| keep(m));
            dropped += before - s.members.len();
        }
        (out, dropped)
    }
}

pub fn apply_grouping(tree: &ClassTree, grouping: &Grouping) -> Result<GroupedClasses, TaxonomyError> {
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    let mut classes = Vec::with_capacity(grouping.classes.len());
    let mut class_names = HashSet::new();
    for (class, subs) in &grouping.classes {
        if !class_names.insert(class.as_str()) {
            return Err(TaxonomyError::DuplicateClass(class.clone()));
        }
        let mut subclasses = Vec::with_capacity(subs.len());
        for name in subs {
            let sub = tree
                .get(name)
                .ok_or_else(|| TaxonomyError::UnknownSubclass(name.clone()))?;
            if let Some(first) = owner.insert(name, class) {
                return Err(TaxonomyError::SubclassReassigned {
                    subclass: name.clone(),
                    first: first.to_owned(),
                    second: class.clone(),
                });
            }
            subclasses.push(sub.clone());
        }
        let class = GeneralClass {
            name: class.clone(),
            subclasses,
        };
        if class.size() == 0 {
            return Err(TaxonomyError::EmptyClass(class.name));
        }
        classes.push(class);
    }
    Ok(GroupedClasses { classes })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = "PSB 1\n2 3\nDog Quadruped 2\n1\n2\nHorse Quadruped 1\n3\n";

    fn ids(v: &[&str]) -> Vec<ModelId> {
        v.iter().map(|&s| ModelId::from(s)).collect()
    }

    #[test]
    fn minimal_cla() {
        let t = parse_cla(MINI).unwrap();
        assert_eq!(t.subclasses.len(), 2);
        assert_eq!(t.subclasses[0].name, "Dog");
        assert_eq!(t.subclasses[0].parent, "Quadruped");
        assert_eq!(t.subclasses[0].members, ids(&["m1", "m2"]));
        assert_eq!(t.subclasses[1].members, ids(&["m3"]));
    }

    #[test]
    fn psb_layout_with_blank_lines_and_empty_category() {
        let doc = "PSB 1\n\n3 2\n\nvehicle 0 0\n\ncar vehicle 2\n10\n11\n\nboat vehicle 0\n";
        let t = parse_cla(doc).unwrap();
        assert_eq!(t.subclasses.len(), 3);
        assert_eq!(t.get("car").unwrap().members, ids(&["m10", "m11"]));
        assert!(t.get("boat").unwrap().members.is_empty());
    }

    #[test]
    fn cla_errors() {
        assert_eq!(
            parse_cla(&MINI.replace("PSB 1", "PSB 2")),
            Err(TaxonomyError::BadMagic("PSB 2".into()))
        );
        assert!(matches!(
            parse_cla("PSB 1\n1 3\nDog Quadruped 3\n1\n2\n"),
            Err(TaxonomyError::CountMismatch(_))
        ));
        assert_eq!(
            parse_cla("PSB 1\n2 2\nDog Q 1\n1\nCat Q 1\n1\n"),
            Err(TaxonomyError::DuplicateModel("m1".into()))
        );
        assert!(matches!(
            parse_cla("PSB 1\n3 3\nDog Quadruped 2\n1\n2\nHorse Quadruped 1\n3\n"),
            Err(TaxonomyError::CountMismatch(_))
        ));
        assert!(matches!(
            parse_cla("PSB 1\n2 4\nDog Quadruped 2\n1\n2\nHorse Quadruped 1\n3\n"),
            Err(TaxonomyError::CountMismatch(_))
        ));
        assert!(matches!(
            parse_cla("PSB 1\n2 2\nDog Q 1\n1\nDog Q 1\n2\n"),
            Err(TaxonomyError::DuplicateCategory(_))
        ));
    }

    #[test]
    fn grouping_parse_and_apply() {
        let g = Grouping::parse("# demo\nclass Quadruped animals\n  Dog\n\tHorse\n").unwrap();
        assert_eq!(g.classes[0].0, "Quadruped animals");
        let grouped = apply_grouping(&parse_cla(MINI).unwrap(), &g).unwrap();
        assert_eq!(grouped.classes.len(), 1);
        assert_eq!(grouped.classes[0].size(), 3);
        assert_eq!(grouped.model_count(), 3);
    }

    #[test]
    fn grouping_errors() {
        let tree = parse_cla(MINI).unwrap();
        let unknown = Grouping::parse("class A\n  Dog\n  Spaceship\n").unwrap();
        assert_eq!(
            apply_grouping(&tree, &unknown),
            Err(TaxonomyError::UnknownSubclass("Spaceship".into()))
        );
        let twice = Grouping::parse("class A\n  Dog\nclass B\n  Dog\n").unwrap();
        assert!(matches!(
            apply_grouping(&tree, &twice),
            Err(TaxonomyError::SubclassReassigned { .. })
        ));
        assert!(Grouping::parse("  Dog\n").is_err());
        assert!(Grouping::parse("klass A\n").is_err());
        assert!(matches!(
            Grouping::parse("class A\n  Dog\nclass A\n  Horse\n"),
            Err(TaxonomyError::DuplicateClass(_))
        ));
    }

    #[test]
    fn identity_grouping_mirrors_tree() {
        let tree = parse_cla(MINI).unwrap();
        let grouped = apply_grouping(&tree, &Grouping::identity(&tree)).unwrap();
        assert_eq!(grouped.classes.len(), tree.subclasses.len());
        for (c, s) in grouped.classes.iter().zip(&tree.subclasses) {
            assert_eq!(c.name, s.name);
            assert_eq!(c.subclasses, vec![s.clone()]);
        }
        assert_eq!(grouped.split_subclasses(), grouped);
    }

    #[test]
    fn grouping_text_round_trip() {
        let tree = parse_cla(MINI).unwrap();
        let g = Grouping::parse("class Quadruped\n  Horse\n  Dog\n").unwrap();
        let grouped = apply_grouping(&tree, &g).unwrap();
        let again = Grouping::parse(&grouped.to_grouping().to_text()).unwrap();
        assert_eq!(apply_grouping(&tree, &again).unwrap(), grouped);
    }

    #[test]
    fn retain_counts_dropped() {
        let tree = parse_cla(MINI).unwrap();
        let grouped = apply_grouping(&tree, &Grouping::identity(&tree)).unwrap();
        let (kept, dropped) = grouped.retain_members(|m| m.as_str() != "m2");
        assert_eq!(dropped, 1);
        assert_eq!(kept.model_count(), 2);
    }
}
