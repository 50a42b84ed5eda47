//! Command-line front end.
//!
//! Every command that writes a file also writes `<out>.manifest.json`
//! holding the resolved parameters, the fanned-out seeds and the SHA-256 of
//! each input; `rerun` replays a manifest single-threaded.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conceptspace_core::graph::generate_walks;
use conceptspace_core::ranker::{group_by_level, train_concept, ConceptOptions, ExplainOptions, Method};
use conceptspace_core::sgns::line_pairs;
use conceptspace_core::{seed, EmbeddingTable, Objective, SgnsConfig, Taxonomy, TrainingConfig};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::format::{edges, report, space, taxonomy, word2vec};
use crate::output::{commit, InputDigest, RunManifest, TOOL, VERSION};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(name = "conceptspace", version, about = "Explain node embeddings with taxonomy concept spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "kebab-case")]
pub enum Command {
    /// Train DeepWalk or first-order LINE embeddings from an edge list.
    Embed(EmbedArgs),
    /// Learn the concept space of one concept.
    TrainConcept(TrainConceptArgs),
    /// Score a query entity against a concept and its siblings with SAS and CSD.
    Explain(ExplainArgs),
    /// Mean best validation loss per taxonomy level, per embedding.
    LevelSummary(LevelSummaryArgs),
    /// Check a taxonomy file and optionally write it in canonical order.
    ValidateTaxonomy(ValidateArgs),
    /// Re-run the command recorded in a manifest, single-threaded.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMethod {
    #[value(name = "deepwalk")]
    Deepwalk,
    #[value(name = "line1")]
    Line1,
}

impl EmbedMethod {
    /// Passes over the training pairs when `--epochs` is not given.
    pub fn default_epochs(self) -> usize {
        match self {
            EmbedMethod::Deepwalk => 1,
            EmbedMethod::Line1 => 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Sas,
    Csd,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sas => Method::Sas,
            MethodArg::Csd => Method::Csd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    /// Tab-separated edge list.
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long, value_enum, default_value_t = EmbedMethod::Deepwalk)]
    pub method: EmbedMethod,
    /// Output embeddings in word2vec text format.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = SgnsConfig::default().dim)]
    pub dim: usize,
    #[arg(long, default_value_t = SgnsConfig::default().negatives)]
    pub negatives: usize,
    /// Defaults to 1 for deepwalk and 50 for line1.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = SgnsConfig::default().learning_rate)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = SgnsConfig::default().min_learning_rate)]
    pub min_learning_rate: f64,
    #[arg(long, default_value_t = 10)]
    pub walks_per_node: usize,
    /// Vertices per walk.
    #[arg(long, default_value_t = 40)]
    pub walk_length: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; more than one gives lock-free, non-reproducible updates.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// Flags mirroring the fields of `TrainingConfig`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainingArgs {
    #[arg(long, default_value_t = TrainingConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = TrainingConfig::default().batch_size)]
    pub batch_size: usize,
    #[arg(long, default_value_t = TrainingConfig::default().learning_rate)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = TrainingConfig::default().patience)]
    pub patience: usize,
    #[arg(long, default_value_t = TrainingConfig::default().momentum)]
    pub momentum: f64,
    #[arg(long, default_value_t = TrainingConfig::default().margin_scale)]
    pub margin_scale: f64,
    /// Rows of the projection; half the embedding dimension (rounded up) by default.
    #[arg(long)]
    pub projection_dim: Option<usize>,
    #[arg(long, default_value_t = TrainingConfig::default().n_triplets)]
    pub n_triplets: usize,
    #[arg(long, default_value_t = TrainingConfig::default().val_triplets)]
    pub val_triplets: usize,
}

impl TrainingArgs {
    fn config(&self) -> TrainingConfig {
        TrainingConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            patience: self.patience,
            momentum: self.momentum,
            margin_scale: self.margin_scale,
            projection_dim: self.projection_dim,
            n_triplets: self.n_triplets,
            val_triplets: self.val_triplets,
            seed: 0,
        }
    }

    fn resolve(&mut self, dim: usize) {
        self.projection_dim = Some(self.config().resolved_projection_dim(dim));
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainConceptArgs {
    /// Embeddings in word2vec text format.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Taxonomy triples.
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub concept: String,
    /// Entity to leave out of the dataset; repeatable.
    #[arg(long)]
    pub exclude: Vec<String>,
    /// Ancestor concept whose entities supply the negatives; the whole taxonomy by default.
    #[arg(long)]
    pub negative_scope: Option<String>,
    /// Output concept-space file.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExplainArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// Entity to explain.
    #[arg(long)]
    pub query: String,
    /// Start concept; it and its siblings are scored.
    #[arg(long)]
    pub start: String,
    /// Maximum number of siblings scored.
    #[arg(long)]
    pub sibling_cap: Option<usize>,
    /// Comma-separated concept list replacing the start concept and its siblings.
    #[arg(long, value_delimiter = ',')]
    pub concepts: Option<Vec<String>>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Sas, MethodArg::Csd])]
    pub methods: Vec<MethodArg>,
    #[arg(long)]
    pub negative_scope: Option<String>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Concepts trained concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// `LABEL=PATH`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPath {
    pub label: String,
    pub path: PathBuf,
}

impl FromStr for LabeledPath {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once('=') {
            Some((label, path)) if !label.is_empty() && !path.is_empty() => {
                Ok(LabeledPath { label: label.to_string(), path: PathBuf::from(path) })
            }
            _ => Err(format!("expected LABEL=PATH, got {s:?}")),
        }
    }
}

impl fmt::Display for LabeledPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.label, self.path.display())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LevelSummaryArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// One concept per line; concepts are grouped by their depth below the root.
    #[arg(long)]
    pub concepts_file: PathBuf,
    /// Embeddings to compare, as LABEL=PATH; repeatable.
    #[arg(long = "embeddings", required = true)]
    pub embeddings: Vec<LabeledPath>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// Write the taxonomy back in canonical order.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Write here instead of the recorded output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Rerun(args) => rerun(&args),
        Command::ValidateTaxonomy(args) => validate(args),
        other => {
            let run = execute(other)?;
            commit(&run.manifest, &run.bytes)
        }
    }
}

/// A finished command waiting to be written.
struct Run {
    manifest: RunManifest,
    bytes: Vec<u8>,
}

fn rerun(args: &RerunArgs) -> Result<()> {
    let manifest = RunManifest::read(&args.manifest)?;
    for input in &manifest.inputs {
        input.verify()?;
    }
    let mut command = manifest.command;
    let redirect = |target: &mut PathBuf| {
        if let Some(out) = &args.out {
            target.clone_from(out);
        }
    };
    match &mut command {
        Command::Embed(a) => {
            a.jobs = 1;
            redirect(&mut a.out);
        }
        Command::TrainConcept(a) => redirect(&mut a.out),
        Command::Explain(a) => {
            a.jobs = 1;
            redirect(&mut a.out);
        }
        Command::LevelSummary(a) => {
            a.jobs = 1;
            redirect(&mut a.out);
        }
        Command::ValidateTaxonomy(a) => {
            if args.out.is_some() {
                a.out.clone_from(&args.out);
            }
        }
        Command::Rerun(_) => return Err(AppError::Usage("a manifest cannot record a rerun".into())),
    }
    run(command)
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::path::absolute(path).map_err(|e| AppError::io(path, e))
}

fn manifest(command: Command, seeds: BTreeMap<String, u64>, inputs: Vec<InputDigest>, output: PathBuf) -> RunManifest {
    RunManifest { tool: TOOL.to_string(), version: VERSION.to_string(), command, seeds, inputs, output }
}

fn execute(command: Command) -> Result<Run> {
    match command {
        Command::Embed(args) => embed(args),
        Command::TrainConcept(args) => train(args),
        Command::Explain(args) => explain(args),
        Command::LevelSummary(args) => levels(args),
        Command::ValidateTaxonomy(_) | Command::Rerun(_) => unreachable!("handled by run"),
    }
}

fn embed(mut args: EmbedArgs) -> Result<Run> {
    args.edges = absolute(&args.edges)?;
    args.out = absolute(&args.out)?;
    let inputs = vec![InputDigest::of("edges", &args.edges)?];
    let (graph, stats) = edges::read_edge_list(&args.edges)?;
    if stats.self_loops > 0 || stats.duplicate_edges > 0 {
        eprintln!(
            "warning: dropped {} self-loop(s) and {} duplicate edge(s)",
            stats.self_loops, stats.duplicate_edges
        );
    }
    let epochs = *args.epochs.get_or_insert(args.method.default_epochs());
    let mut seeds = BTreeMap::new();
    let sgns_seed = seed::derive(args.seed, seed::tag("sgns"));
    seeds.insert("sgns".to_string(), sgns_seed);
    let cfg = SgnsConfig {
        dim: args.dim,
        negatives: args.negatives,
        epochs,
        learning_rate: args.learning_rate,
        min_learning_rate: args.min_learning_rate,
        seed: sgns_seed,
    };
    let table = match args.method {
        EmbedMethod::Deepwalk => {
            let walk_seed = seed::derive(args.seed, seed::tag("walks"));
            seeds.insert("walks".to_string(), walk_seed);
            let corpus = generate_walks(&graph, args.walks_per_node, args.walk_length, walk_seed)?;
            let pairs: Vec<_> = corpus.context_pairs(args.window)?.collect();
            parallel::train_embeddings(Objective::SkipGram, graph.names(), &pairs, &cfg, args.jobs)?
        }
        EmbedMethod::Line1 => {
            parallel::train_embeddings(Objective::FirstOrder, graph.names(), &line_pairs(&graph), &cfg, args.jobs)?
        }
    };
    let mut bytes = Vec::new();
    word2vec::save_embeddings(&table, &mut bytes)?;
    let out = args.out.clone();
    Ok(Run { manifest: manifest(Command::Embed(args), seeds, inputs, out), bytes })
}

/// Loads the taxonomy and embeddings, warning about entities only one side knows.
fn load_pair(taxonomy_path: &Path, embeddings: &Path) -> Result<(Taxonomy, EmbeddingTable)> {
    let t = taxonomy::read_taxonomy(taxonomy_path)?;
    let table = word2vec::read_embeddings(embeddings)?;
    warn_coverage(&t, &table, embeddings);
    Ok((t, table))
}

fn warn_coverage(t: &Taxonomy, table: &EmbeddingTable, embeddings: &Path) {
    let unknown = table.names().iter().filter(|n| !t.has_entity(n)).count();
    let missing = t.entities().filter(|&e| !table.contains(t.entity_name(e))).count();
    if unknown > 0 || missing > 0 {
        eprintln!(
            "warning: {}: {unknown} embedded entit{} not in the taxonomy, {missing} taxonomy entit{} without an embedding",
            embeddings.display(),
            if unknown == 1 { "y" } else { "ies" },
            if missing == 1 { "y" } else { "ies" },
        );
    }
}

fn concept_options(training: &TrainingArgs, negative_scope: Option<String>, seed: u64) -> ConceptOptions {
    ConceptOptions { training: training.config(), negative_scope, seed }
}

fn train(mut args: TrainConceptArgs) -> Result<Run> {
    args.embeddings = absolute(&args.embeddings)?;
    args.taxonomy = absolute(&args.taxonomy)?;
    args.out = absolute(&args.out)?;
    let inputs = vec![InputDigest::of("embeddings", &args.embeddings)?, InputDigest::of("taxonomy", &args.taxonomy)?];
    let (t, table) = load_pair(&args.taxonomy, &args.embeddings)?;
    args.training.resolve(table.dim());
    let opts = concept_options(&args.training, args.negative_scope.clone(), args.seed);
    let (spec, training) = opts.for_concept(&args.concept, &args.exclude);
    let seeds = BTreeMap::from([("dataset".to_string(), spec.seed), ("training".to_string(), training.seed)]);
    let space = train_concept(&t, &table, &args.concept, &args.exclude, &opts)?;
    let mut bytes = Vec::new();
    space::save_space(&space, &mut bytes).expect("writing to memory");
    let out = args.out.clone();
    Ok(Run { manifest: manifest(Command::TrainConcept(args), seeds, inputs, out), bytes })
}

fn explain(mut args: ExplainArgs) -> Result<Run> {
    args.embeddings = absolute(&args.embeddings)?;
    args.taxonomy = absolute(&args.taxonomy)?;
    args.out = absolute(&args.out)?;
    let inputs = vec![InputDigest::of("embeddings", &args.embeddings)?, InputDigest::of("taxonomy", &args.taxonomy)?];
    let (t, table) = load_pair(&args.taxonomy, &args.embeddings)?;
    t.concept(&args.start)?;
    args.training.resolve(table.dim());
    let mut methods: Vec<Method> = args.methods.iter().map(|&m| m.into()).collect();
    methods.sort();
    methods.dedup();
    let opts = ExplainOptions {
        concept: concept_options(&args.training, args.negative_scope.clone(), args.seed),
        sibling_cap: args.sibling_cap,
        concepts: args.concepts.clone(),
        methods,
    };
    let report = parallel::explain(&t, &table, &args.query, &args.start, &opts, args.jobs)?;
    let mut seeds = BTreeMap::new();
    for concept in report.rows.iter().map(|r| &r.concept).chain(report.failures.iter().map(|f| &f.concept)) {
        let (spec, training) = opts.concept.for_concept(concept, &[]);
        seeds.insert(format!("{concept}/dataset"), spec.seed);
        seeds.insert(format!("{concept}/training"), training.seed);
    }
    for f in &report.failures {
        eprintln!("warning: {} ({}): {}", f.concept, f.method, f.error);
    }
    let mut bytes = Vec::new();
    report::write_report(&report, &mut bytes).map_err(|e| AppError::Usage(e.to_string()))?;
    let out = args.out.clone();
    Ok(Run { manifest: manifest(Command::Explain(args), seeds, inputs, out), bytes })
}

fn read_concept_list(path: &Path) -> Result<Vec<String>> {
    let file = std::fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| AppError::io(path, e))?;
        let line = line.trim();
        if !line.is_empty() && !line.starts_with('#') && !out.iter().any(|c| c == line) {
            out.push(line.to_string());
        }
    }
    Ok(out)
}

fn levels(mut args: LevelSummaryArgs) -> Result<Run> {
    args.taxonomy = absolute(&args.taxonomy)?;
    args.concepts_file = absolute(&args.concepts_file)?;
    args.out = absolute(&args.out)?;
    let mut inputs =
        vec![InputDigest::of("taxonomy", &args.taxonomy)?, InputDigest::of("concepts", &args.concepts_file)?];
    for e in &mut args.embeddings {
        e.path = absolute(&e.path)?;
        inputs.push(InputDigest::of(&format!("embeddings:{}", e.label), &e.path)?);
    }
    let t = taxonomy::read_taxonomy(&args.taxonomy)?;
    let concepts = read_concept_list(&args.concepts_file)?;
    let levels = group_by_level(&t, &concepts)?;
    if levels.iter().any(|l| l.level == 0) {
        return Err(AppError::Usage("the root concept has no negatives and cannot be summarized".into()));
    }
    let tables = args
        .embeddings
        .iter()
        .map(|e| {
            let table = word2vec::read_embeddings(&e.path)?;
            warn_coverage(&t, &table, &e.path);
            Ok(table)
        })
        .collect::<Result<Vec<_>>>()?;
    // record the resolved projection size when every embedding agrees on it
    if tables.windows(2).all(|w| w[0].dim() == w[1].dim()) {
        args.training.resolve(tables[0].dim());
    }
    let mut summaries = Vec::new();
    for (e, table) in args.embeddings.iter().zip(&tables) {
        let mut training = args.training.clone();
        training.resolve(table.dim());
        let opts = concept_options(&training, None, args.seed);
        summaries.extend(parallel::level_summary(&t, table, &e.label, &levels, &opts, args.jobs)?);
    }
    let opts = concept_options(&args.training, None, args.seed);
    let mut seeds = BTreeMap::new();
    for c in &concepts {
        let (spec, training) = opts.for_concept(c, &[]);
        seeds.insert(format!("{c}/dataset"), spec.seed);
        seeds.insert(format!("{c}/training"), training.seed);
    }
    let mut bytes = Vec::new();
    report::write_levels(&summaries, &mut bytes).map_err(|e| AppError::Usage(e.to_string()))?;
    let out = args.out.clone();
    Ok(Run { manifest: manifest(Command::LevelSummary(args), seeds, inputs, out), bytes })
}

fn validate(mut args: ValidateArgs) -> Result<()> {
    args.taxonomy = absolute(&args.taxonomy)?;
    let inputs = vec![InputDigest::of("taxonomy", &args.taxonomy)?];
    let t = taxonomy::read_taxonomy(&args.taxonomy)?;
    let depth = t.concepts().map(|c| t.depth(c)).max().unwrap_or(0);
    println!(
        "ok: {} concepts, {} entities, root {:?}, depth {depth}",
        t.num_concepts(),
        t.num_entities(),
        t.concept_name(t.root())
    );
    if let Some(out) = &args.out {
        let out = absolute(out)?;
        args.out = Some(out.clone());
        let mut bytes = Vec::new();
        taxonomy::write_taxonomy(&t, &mut bytes).expect("writing to memory");
        commit(&manifest(Command::ValidateTaxonomy(args), BTreeMap::new(), inputs, out), &bytes)?;
    }
    Ok(())
}
