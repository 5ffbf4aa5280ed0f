//! Content-based 3D shape retrieval for classified databases.
//!
//! Every subclass of the database is summarized by its medoid model. A query
//! is compared against those representatives only, classes are ordered by the
//! nearest representative they own, and full matching then runs class by
//! class in that order. A brute-force scan over the whole database is kept
//! alongside as the cost baseline.
//!
//! Pipeline:
//!
//! 1. [`mesh`] parses OFF files and samples their surfaces.
//! 2. [`descriptor`] turns a mesh into a D2 shape distribution histogram.
//! 3. [`taxonomy`] reads a PSB `.cla` file and regroups subclasses into
//!    general classes.
//! 4. [`representatives`] picks one medoid per subclass.
//! 5. [`retrieval`] routes queries and retrieves answers.
//! 6. [`evaluation`] runs the reclassification experiment and reports
//!    successful rates.
//! 7. [`store`] and [`cli`] persist descriptors and drive the commands.

pub mod cli;
pub mod descriptor;
pub mod error;
pub mod evaluation;
pub mod mesh;
pub mod representatives;
pub mod retrieval;
pub mod rng;
pub mod store;
pub mod taxonomy;

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;

pub use descriptor::{compute_d2, descriptor_distance, D2Params, DescriptorMethod, Dissimilarity, ShapeDescriptor};
pub use error::{Error, OffError, Result, TaxonomyError};
pub use evaluation::{run_experiment, successful_rate, ExperimentReport, Mode, SuccessfulRate};
pub use mesh::{parse_off, sample_surface, surface_area, Mesh, SurfaceSample};
pub use representatives::{
    build_representative_set, pairwise_distances, select_representative, DistanceMatrix, RepresentativeSet,
};
pub use retrieval::{brute_force_search, rank_classes, retrieve, search_in_class, RankedClasses, RetrievalResult};
pub use taxonomy::{apply_grouping, parse_cla, ClassTree, GroupedClasses, Grouping};

/// Identifier of a database model, e.g. `m123` for `m123.off`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelId(String);

impl ModelId {
    pub fn new(id: impl Into<String>) -> Self {
        ModelId(id.into())
    }

    /// PSB numeric ids are rendered with an `m` prefix.
    pub fn from_psb(id: u64) -> Self {
        ModelId(format!("m{id}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for ModelId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ModelId {
    fn from(s: &str) -> Self {
        ModelId(s.to_owned())
    }
}

impl From<String> for ModelId {
    fn from(s: String) -> Self {
        ModelId(s)
    }
}

/// Descriptors of the database, keyed by model id.
pub type DescriptorMap = BTreeMap<ModelId, ShapeDescriptor>;
