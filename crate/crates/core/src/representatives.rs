//! Medoid representatives, one per subclass.

use crate::descriptor::descriptor_distance;
use crate::error::{Error, Result};
use crate::taxonomy::GroupedClasses;
use crate::{DescriptorMap, ModelId, ShapeDescriptor};

/// Symmetric dissimilarities among the members of one subclass.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<ModelId>,
    values: Vec<f64>,
    evaluations: u64,
}

impl DistanceMatrix {
    pub fn ids(&self) -> &[ModelId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Number of distance evaluations spent building the matrix.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Builds a matrix from explicit values, mirroring the upper triangle.
    pub fn from_fn(ids: Vec<ModelId>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = ids.len();
        let mut values = vec![0.0; n * n];
        let mut evaluations = 0;
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
                evaluations += 1;
            }
        }
        DistanceMatrix {
            ids,
            values,
            evaluations,
        }
    }
}

fn lookup<'a>(descriptors: &'a DescriptorMap, id: &ModelId) -> Result<&'a ShapeDescriptor> {
    descriptors.get(id).ok_or_else(|| Error::MissingDescriptor(id.clone()))
}

/// Distances among `members`, in the given order. Each unordered pair is
/// evaluated once.
pub fn pairwise_distances(descriptors: &DescriptorMap, members: &[ModelId]) -> Result<DistanceMatrix> {
    let descs = members
        .iter()
        .map(|m| lookup(descriptors, m))
        .collect::<Result<Vec<_>>>()?;
    let mut failure = None;
    let matrix = DistanceMatrix::from_fn(members.to_vec(), |i, j| match descriptor_distance(descs[i], descs[j]) {
        Ok(d) => d.value(),
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(matrix),
    }
}

/// Whether a member's zero distance to itself counts in its row mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfDistance {
    #[default]
    Include,
    Exclude,
}

/// Row positions ordered by mean distance, best first; equal means keep
/// the id order.
pub fn medoid_ranking(matrix: &DistanceMatrix, convention: SelfDistance) -> Vec<usize> {
    let n = matrix.len();
    let divisor = match convention {
        SelfDistance::Include => n,
        SelfDistance::Exclude => n.saturating_sub(1).max(1),
    } as f64;
    let means: Vec<f64> = (0..n).map(|i| matrix.row(i).iter().sum::<f64>() / divisor).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
    order
}

/// The member with the smallest mean distance to its subclass.
pub fn select_representative(matrix: &DistanceMatrix) -> Result<ModelId> {
    select_representative_with(matrix, SelfDistance::Include)
}

pub fn select_representative_with(matrix: &DistanceMatrix, convention: SelfDistance) -> Result<ModelId> {
    medoid_ranking(matrix, convention)
        .first()
        .map(|&i| matrix.ids[i].clone())
        .ok_or_else(|| Error::InvalidParameter("cannot select a representative of an empty set".into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representative {
    pub subclass: String,
    pub model_id: ModelId,
    /// Second-best medoid, used when the representative itself is the query
    /// and self-matches are excluded.
    pub runner_up: Option<ModelId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassRepresentatives {
    pub class: String,
    pub entries: Vec<Representative>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RepresentativeSet {
    pub method_tag: String,
    pub classes: Vec<ClassRepresentatives>,
}

impl RepresentativeSet {
    /// Total number of representatives `R`.
    pub fn total(&self) -> usize {
        self.classes.iter().map(|c| c.entries.len()).sum()
    }

    pub fn get(&self, class: &str) -> Option<&ClassRepresentatives> {
        self.classes.iter().find(|c| c.class == class)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Representative)> {
        self.classes
            .iter()
            .flat_map(|c| c.entries.iter().map(move |r| (c.class.as_str(), r)))
    }
}

/// One medoid per subclass of every class. Members are sorted by id before
/// the matrix is built so ties resolve to the lexicographically smallest id.
pub fn build_representative_set(grouped: &GroupedClasses, descriptors: &DescriptorMap) -> Result<RepresentativeSet> {
    let mut method_tag = None;
    let mut classes = Vec::with_capacity(grouped.classes.len());
    for class in &grouped.classes {
        let mut entries = Vec::with_capacity(class.subclasses.len());
        for sub in &class.subclasses {
            if sub.members.is_empty() {
                return Err(Error::EmptySubclass(sub.name.clone()));
            }
            let mut members = sub.members.clone();
            members.sort();
            let matrix = pairwise_distances(descriptors, &members)?;
            let ranking = medoid_ranking(&matrix, SelfDistance::Include);
            let model_id = members[ranking[0]].clone();
            let tag = lookup(descriptors, &model_id)?.method_tag();
            match &method_tag {
                None => method_tag = Some(tag.to_owned()),
                Some(t) if t != tag => return Err(Error::DescriptorMismatch(format!("method tags `{t}` and `{tag}`"))),
                Some(_) => {}
            }
            entries.push(Representative {
                subclass: sub.name.clone(),
                model_id,
                runner_up: ranking.get(1).map(|&i| members[i].clone()),
            });
        }
        classes.push(ClassRepresentatives {
            class: class.name.clone(),
            entries,
        });
    }
    Ok(RepresentativeSet {
        method_tag: method_tag.ok_or(Error::NoRepresentatives)?,
        classes,
    })
}
