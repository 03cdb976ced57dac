use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mesur", version, about = "Scholarly semantic-network store")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Store snapshot file. The ledger lives next to it as `<store>.ledger`.
    #[arg(long, global = true, env = "MESUR_STORE")]
    pub store: Option<PathBuf>,
    /// Sidecar record file [default: `<store>.sidecar.json`].
    #[arg(long, global = true, env = "MESUR_SIDECAR")]
    pub sidecar: Option<PathBuf>,
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Absolute IRI of the data provider stamped on mapped events.
    #[arg(long, global = true)]
    pub provider: Option<String>,
    /// Extra namespace prefix for query scripts, as `name=iri`.
    #[arg(long = "prefix", global = true, value_name = "NAME=IRI")]
    pub prefixes: Vec<String>,
    /// Fractional digits of computed ratios.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartOf {
    Direct,
    Transitive,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load bibliographic records (TSV with header).
    ///
    /// Columns: doc_id, title, authors (`|`-separated), collection, publisher,
    /// date, start_page, end_page, volume, issue, doi. Only doc_id is required.
    /// TSV report: `kind loaded rejected`.
    IngestBiblio(InputArg),
    /// Load usage events (TSV with header).
    ///
    /// Columns: event_id, time, agent, session, affiliation, doc_id. event_id
    /// and doc_id are required; doc_id must already be loaded.
    /// TSV report: `kind loaded rejected`.
    IngestUsage(InputArg),
    /// Load citations (TSV with header `citing cited`, both doc_ids).
    ///
    /// TSV report: `kind loaded rejected`.
    IngestCitations(InputArg),
    /// Write the graph structure of all sidecar records into the store.
    ///
    /// TSV report: `publishes uses citations affiliations triples`.
    Map {
        /// Mint Organization and Affiliation nodes from usage affiliations.
        #[arg(long)]
        affiliations: bool,
    },
    /// Check every typed node against the ontology; exit 1 on any violation.
    ///
    /// TSV report: `node violation`, one row per violation.
    Validate,
    /// Run a query script from a file or stdin.
    ///
    /// SELECT-only scripts print a `block ?var...` header per block, then one
    /// `block value...` row per distinct projected solution;
    /// scripts with INSERT report `generated inserted`.
    Query(InputArg),
    /// Materialize inferred properties.
    ///
    /// TSV report: `entry inserted`.
    Infer(InferArgs),
    /// Remove triples recorded by earlier materializations.
    ///
    /// TSV report: `entry removed`.
    Retract {
        /// Ledger entry to retract (repeatable).
        #[arg(long = "rule", required_unless_present = "all")]
        rules: Vec<String>,
        #[arg(long, conflicts_with = "rules")]
        all: bool,
    },
    /// Compute a citation or usage impact factor and store it as a Metric node.
    ///
    /// TSV report: `metric object year numerator denominator value`.
    Metric(MetricArgs),
    /// Write the store as canonical N-Triples.
    Export {
        /// Output file [default: stdout].
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Add N-Triples from a file or stdin to the store.
    ///
    /// TSV report: `read inserted`.
    Import(InputArg),
    /// Triple count, per-class instance counts, and ledger sizes.
    ///
    /// `store inferred_triples` counts triples whose predicate is an inferred
    /// property; ledger sizes also include derived aggregate nodes.
    /// TSV report: `section key count`.
    Stats,
    /// Print the ontology: `class iri parent` and
    /// `property iri kind domain range inverse` rows.
    Schema,
    /// Look up a doc_id, event_id, DOI, or mapped IRI in the sidecar.
    ///
    /// TSV report: `field value`.
    Resolve { id: String },
}

#[derive(Debug, Args)]
pub struct InputArg {
    /// Input file; `-` or absent reads stdin.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// List registered rules instead of running anything.
    #[arg(long)]
    pub list: bool,
    /// Run every registered rule.
    #[arg(long)]
    pub all: bool,
    /// Run one registered rule (repeatable).
    #[arg(long = "rule")]
    pub rules: Vec<String>,
    /// Derive directed Coauthor nodes for every co-publishing pair.
    #[arg(long)]
    pub coauthors: bool,
    /// Restrict coauthor counts to publication years `A-B`.
    #[arg(long, value_name = "A-B", requires = "coauthors")]
    pub years: Option<String>,
    /// Derive one GroupCitation node: source root, then sink root.
    #[arg(long, num_args = 2, value_names = ["SOURCE", "SINK"])]
    pub group_citation: Option<Vec<String>>,
    #[arg(long, value_name = "A-B", requires = "group_citation")]
    pub source_years: Option<String>,
    #[arg(long, value_name = "A-B", requires = "group_citation")]
    pub sink_years: Option<String>,
    /// How group roots reach the groups articles are published in.
    #[arg(long, value_enum, default_value_t = PartOf::Transitive)]
    pub part_of: PartOf,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// `if` (impact factor) or `uif` (usage impact factor).
    pub kind: String,
    /// Group root IRI or prefixed name.
    #[arg(long)]
    pub object: String,
    #[arg(long)]
    pub year: i32,
    /// Publication window `A-B` [default: the two years before --year].
    #[arg(long, value_name = "A-B")]
    pub window: Option<String>,
    #[arg(long, value_enum, default_value_t = PartOf::Transitive)]
    pub part_of: PartOf,
}
