//! Command implementations behind the `shape-router` binary.
//!
//! Commands share a [`RunConfig`]; artifacts live in the output directory:
//! `descriptors.cache` (or `$SHAPE_ROUTER_CACHE`), `representatives.tsv`,
//! `report.txt` and `report.csv`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::descriptor::{D2Params, DescriptorMethod, DEFAULT_BINS, DEFAULT_PAIRS};
use crate::error::{Error, Result};
use crate::evaluation::{report_csv, report_table, ExperimentReport};
use crate::mesh::load_off;
use crate::representatives::{build_representative_set, RepresentativeSet};
use crate::retrieval::{brute_force_search, format_tsv, retrieve_with, RetrievalResult, RetrieveOptions};
use crate::store::{self, DescriptorCache};
use crate::taxonomy::{apply_grouping, parse_cla, GroupedClasses, Grouping};
use crate::{ModelId, ShapeDescriptor};

pub const CACHE_ENV: &str = "SHAPE_ROUTER_CACHE";
pub const CACHE_FILE: &str = "descriptors.cache";
pub const REPS_FILE: &str = "representatives.tsv";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_CSV_FILE: &str = "report.csv";

#[derive(Debug, Parser)]
#[command(name = "shape-router", version, about = "Representative-routed 3D shape retrieval")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute descriptors for every grouped model.
    Index {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory searched recursively for `<model_id>.off` files.
        #[arg(long)]
        mesh_dir: PathBuf,
    },
    /// Select one medoid representative per subclass.
    Reps {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Retrieve the models most similar to a query mesh.
    Query {
        #[command(flatten)]
        common: CommonArgs,
        /// OFF file of the query object.
        query: PathBuf,
        /// Answers to return.
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Most classes to visit; defaults to all.
        #[arg(long)]
        class_budget: Option<usize>,
        /// Match against every model instead of routing.
        #[arg(long)]
        brute_force: bool,
        /// Sort collected answers by distance across classes.
        #[arg(long)]
        global_sort: bool,
    },
    /// Run the reclassification experiment in both modes.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Route a representative query against its subclass runner-up.
        #[arg(long)]
        exclude_self: bool,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// PSB classification file.
    #[arg(long)]
    pub cla: PathBuf,
    /// Grouping of subclasses into general classes.
    #[arg(long)]
    pub grouping: PathBuf,
    /// Point pairs sampled per mesh.
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pub pairs: usize,
    /// Histogram bins.
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Global sampling seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for all artifacts.
    #[arg(long, default_value = "shape-router-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh_dir: Option<PathBuf>,
    pub cla: PathBuf,
    pub grouping: PathBuf,
    pub params: D2Params,
    pub out: PathBuf,
    pub cache_path: PathBuf,
}

impl RunConfig {
    /// Builds a config; the cache location honors `SHAPE_ROUTER_CACHE`.
    pub fn from_args(common: &CommonArgs, mesh_dir: Option<PathBuf>) -> Self {
        let cache_path = std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| common.out.join(CACHE_FILE));
        RunConfig {
            mesh_dir,
            cla: common.cla.clone(),
            grouping: common.grouping.clone(),
            params: D2Params {
                pairs: common.pairs,
                bins: common.bins,
                seed: common.seed,
            },
            out: common.out.clone(),
            cache_path,
        }
    }

    pub fn reps_path(&self) -> PathBuf {
        self.out.join(REPS_FILE)
    }

    /// Checks that every referenced input exists.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut paths: Vec<&Path> = vec![&self.cla, &self.grouping];
        paths.extend(self.mesh_dir.as_deref());
        for p in paths {
            if !p.exists() {
                return Err(CliError::Usage(format!("{} does not exist", p.display())));
            }
        }
        if self.params.pairs == 0 || self.params.bins == 0 || self.params.pairs < self.params.bins {
            return Err(CliError::Usage(
                "--pairs must be at least --bins and both positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

pub fn load_grouped(config: &RunConfig) -> Result<GroupedClasses> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
    let tree = parse_cla(&read(&config.cla)?)?;
    let grouping = Grouping::parse(&read(&config.grouping)?)?;
    Ok(apply_grouping(&tree, &grouping)?)
}

fn load_cache_checked(config: &RunConfig) -> Result<DescriptorCache> {
    let cache = DescriptorCache::read(&config.cache_path)?;
    let tag = config.params.tag();
    if cache.method_tag != tag {
        return Err(Error::DescriptorMismatch(format!(
            "cache {} holds `{}`, configuration asks for `{tag}`; re-run index",
            config.cache_path.display(),
            cache.method_tag
        )));
    }
    Ok(cache)
}

/// Grouped classes restricted to models present in the cache.
fn indexed_classes(config: &RunConfig, cache: &DescriptorCache) -> Result<(GroupedClasses, usize)> {
    let grouped = load_grouped(config)?;
    let (kept, dropped) = grouped.retain_members(|m| {
        let present = cache.descriptors.contains_key(m);
        if !present {
            log::warn!("{m} is grouped but has no descriptor; excluded");
        }
        present
    });
    if kept.model_count() == 0 {
        return Err(Error::Store(
            "none of the grouped models are in the descriptor cache".into(),
        ));
    }
    Ok((kept, dropped))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSummary {
    pub computed: usize,
    pub reused: usize,
    pub failed: Vec<(ModelId, String)>,
}

impl IndexSummary {
    pub fn records(&self) -> usize {
        self.computed + self.reused
    }
}

/// Describes every grouped model. Records from an existing cache with the
/// same method tag are reused; a different tag rebuilds everything.
/// Unreadable meshes are logged and left out.
pub fn cmd_index(config: &RunConfig) -> Result<IndexSummary> {
    let grouped = load_grouped(config)?;
    if grouped.model_count() == 0 {
        return Err(Error::Store("grouping selects no models".into()));
    }
    let mesh_dir = config
        .mesh_dir
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("index needs a mesh directory".into()))?;
    let tag = config.params.tag();

    let mut previous = match DescriptorCache::read(&config.cache_path) {
        Ok(c) if c.method_tag == tag => c.descriptors,
        Ok(c) => {
            log::info!("method tag changed from `{}`; rebuilding", c.method_tag);
            Default::default()
        }
        Err(Error::Io { .. }) => Default::default(),
        Err(e) => {
            log::warn!("ignoring unreadable cache: {e}");
            Default::default()
        }
    };

    let meshes = store::discover_meshes(mesh_dir)?;
    let mut summary = IndexSummary::default();
    let mut cache = DescriptorCache::new(tag);
    let mut todo = Vec::new();
    for id in grouped.members() {
        if let Some(d) = previous.remove(id) {
            cache.descriptors.insert(id.clone(), d);
            summary.reused += 1;
        } else {
            match meshes.get(id) {
                Some(path) => todo.push((id.clone(), path.clone())),
                None => summary.failed.push((id.clone(), "no mesh file found".into())),
            }
        }
    }

    let params = config.params;
    let computed: Vec<(ModelId, Result<ShapeDescriptor>)> = todo
        .into_par_iter()
        .map(|(id, path)| {
            let d = load_off(&path).and_then(|m| params.describe(&m.with_source_id(id.as_str())));
            (id, d)
        })
        .collect();
    for (id, d) in computed {
        match d {
            Ok(d) => {
                cache.descriptors.insert(id, d);
                summary.computed += 1;
            }
            Err(e) => summary.failed.push((id, e.to_string())),
        }
    }
    summary.failed.sort();
    for (id, why) in &summary.failed {
        log::warn!("excluding {id}: {why}");
    }
    if cache.descriptors.is_empty() {
        return Err(Error::Store("no grouped model could be indexed".into()));
    }
    cache.write(&config.cache_path)?;
    Ok(summary)
}

pub fn cmd_reps(config: &RunConfig) -> Result<RepresentativeSet> {
    let cache = load_cache_checked(config)?;
    let (grouped, _) = indexed_classes(config, &cache)?;
    let reps = build_representative_set(&grouped, &cache.descriptors)?;
    store::write_representatives(&config.reps_path(), &reps)?;
    Ok(reps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryFlags {
    pub k: usize,
    pub class_budget: Option<usize>,
    pub brute_force: bool,
    pub global_sort: bool,
}

/// Describes the query exactly as the index describes a database model
/// with the same file stem, then routes or scans.
pub fn cmd_query(config: &RunConfig, query: &Path, flags: QueryFlags) -> Result<RetrievalResult> {
    let cache = load_cache_checked(config)?;
    let (grouped, _) = indexed_classes(config, &cache)?;
    let mesh = load_off(query)?;
    let descriptor = config.params.describe(&mesh)?;
    if flags.brute_force {
        return brute_force_search(&descriptor, &grouped, &cache.descriptors, flags.k);
    }
    let reps = store::read_representatives(&config.reps_path())?;
    if reps.method_tag != cache.method_tag {
        return Err(Error::DescriptorMismatch(format!(
            "representatives were selected with `{}`, cache holds `{}`; re-run reps",
            reps.method_tag, cache.method_tag
        )));
    }
    retrieve_with(
        &descriptor,
        &reps,
        &grouped,
        &cache.descriptors,
        RetrieveOptions {
            k: flags.k,
            class_budget: flags.class_budget.unwrap_or(grouped.classes.len()),
            global_sort: flags.global_sort,
        },
    )
}

pub fn cmd_evaluate(config: &RunConfig, exclude_self: bool) -> Result<ExperimentReport> {
    let cache = load_cache_checked(config)?;
    let (grouped, excluded) = indexed_classes(config, &cache)?;
    let mut report = ExperimentReport::run(&grouped, &cache.descriptors, exclude_self)?;
    report.excluded_models = excluded;
    store::write_text(&config.out.join(REPORT_TEXT_FILE), &report_table(&report))?;
    store::write_text(&config.out.join(REPORT_CSV_FILE), &report_csv(&report))?;
    Ok(report)
}

/// Parses `args` and runs the command, writing results to stdout.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            e.print().ok();
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            let msg = msg.strip_prefix("error: ").unwrap_or(&msg).trim_end();
            return Err(CliError::Usage(msg.to_owned()));
        }
    };
    match cli.command {
        Command::Index { common, mesh_dir } => {
            let config = RunConfig::from_args(&common, Some(mesh_dir));
            config.validate()?;
            let s = cmd_index(&config)?;
            println!(
                "indexed {} models ({} computed, {} reused, {} excluded) -> {}",
                s.records(),
                s.computed,
                s.reused,
                s.failed.len(),
                config.cache_path.display()
            );
        }
        Command::Reps { common } => {
            let config = RunConfig::from_args(&common, None);
            config.validate()?;
            let reps = cmd_reps(&config)?;
            print!("{}", store::representatives_to_text(&reps));
        }
        Command::Query {
            common,
            query,
            k,
            class_budget,
            brute_force,
            global_sort,
        } => {
            let config = RunConfig::from_args(&common, None);
            config.validate()?;
            if k == 0 || class_budget == Some(0) {
                return Err(CliError::Usage("--k and --class-budget must be positive".into()));
            }
            if !query.exists() {
                return Err(CliError::Usage(format!("{} does not exist", query.display())));
            }
            let flags = QueryFlags {
                k,
                class_budget,
                brute_force,
                global_sort,
            };
            print!("{}", format_tsv(&cmd_query(&config, &query, flags)?));
        }
        Command::Evaluate { common, exclude_self } => {
            let config = RunConfig::from_args(&common, None);
            config.validate()?;
            let report = cmd_evaluate(&config, exclude_self)?;
            print!("{}", report_table(&report));
        }
    }
    Ok(())
}
