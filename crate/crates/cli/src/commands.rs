use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::PathBuf;

use anyhow::{bail, Context};
use mesur_core::inference::{self, GroupCitationRequest, InferenceEngine, PartOfMode, YearRange};
use mesur_core::metrics::{self, MetricKind, MetricRequest};
use mesur_core::ontology::{schema, PropertyKind};
use mesur_core::query::{evaluate_block, execute_script_with, parse_script_bytes, ExecOptions};
use mesur_core::rdf::vocab::rdf;
use mesur_core::rdf::{write_ntriples, Term};
use mesur_core::sidecar::{IngestReport, MapOptions, Resolved};

use crate::args::{Command, Format, InferArgs, InputArg, MetricArgs, PartOf};
use crate::config::Config;
use crate::workspace::{self, WriteLock};
use crate::{DataError, UsageError};

/// Entry in the ledger for triples inserted by ad-hoc query scripts.
const QUERY_ENTRY: &str = "query";

pub struct Ctx {
    pub cfg: Config,
    pub format: Format,
}

impl Ctx {
    fn lock(&self) -> anyhow::Result<WriteLock> {
        WriteLock::acquire(self.cfg.lock_path())
    }

    fn term(&self, text: &str) -> anyhow::Result<Term> {
        let inner = text.strip_prefix('<').and_then(|s| s.strip_suffix('>'));
        let parsed = match inner {
            Some(iri) => Term::iri(iri).ok(),
            None => self.cfg.namespaces.expand(text).ok().or_else(|| Term::iri(text).ok()),
        };
        parsed.ok_or_else(|| UsageError(format!("`{text}` is not an IRI or known prefixed name")).into())
    }
}

fn read_input(arg: &InputArg) -> anyhow::Result<Box<dyn BufRead>> {
    match &arg.input {
        Some(p) if p.as_os_str() != "-" => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            Ok(Box::new(BufReader::new(f)))
        }
        _ => Ok(Box::new(BufReader::new(io::stdin()))),
    }
}

fn parse_years(text: &str) -> anyhow::Result<YearRange> {
    let bad = || UsageError(format!("`{text}` is not a year or a year range A-B"));
    let (a, b) = match text.split_once('-') {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let y = text.trim().parse().map_err(|_| bad())?;
            (y, y)
        }
    };
    YearRange::new(a, b).map_err(|e| UsageError(e.to_string()).into())
}

fn part_of(p: PartOf) -> PartOfMode {
    match p {
        PartOf::Direct => PartOfMode::Direct,
        PartOf::Transitive => PartOfMode::Transitive,
    }
}

pub fn run(command: Command, ctx: &Ctx, out: &mut dyn Write) -> anyhow::Result<()> {
    match command {
        Command::IngestBiblio(input) => ingest(ctx, out, "biblio", &input),
        Command::IngestUsage(input) => ingest(ctx, out, "usage", &input),
        Command::IngestCitations(input) => ingest(ctx, out, "citations", &input),
        Command::Map { affiliations } => map(ctx, out, affiliations),
        Command::Validate => validate(ctx, out),
        Command::Query(input) => query(ctx, out, &input),
        Command::Infer(args) => infer(ctx, out, &args),
        Command::Retract { rules, all } => retract(ctx, out, &rules, all),
        Command::Metric(args) => metric(ctx, out, &args),
        Command::Export { output } => export(ctx, out, output),
        Command::Import(input) => import(ctx, out, &input),
        Command::Stats => stats(ctx, out),
        Command::Schema => {
            out.write_all(schema().export_listing().as_bytes())?;
            Ok(())
        }
        Command::Resolve { id } => resolve(ctx, out, &id),
    }
}

fn ingest(ctx: &Ctx, out: &mut dyn Write, kind: &str, input: &InputArg) -> anyhow::Result<()> {
    let _lock = ctx.lock()?;
    let mut sidecar = workspace::load_sidecar(&ctx.cfg)?;
    let reader = read_input(input)?;
    let report: IngestReport = match kind {
        "biblio" => sidecar.ingest_biblio(reader),
        "usage" => sidecar.ingest_usage(reader),
        _ => sidecar.ingest_citations(reader),
    }
    .map_err(|e| DataError(e.to_string()))?;
    workspace::save_sidecar(&ctx.cfg, &sidecar)?;
    for r in &report.rejected {
        eprintln!("line {}: {}", r.line, r.reason);
    }
    match ctx.format {
        Format::Tsv => writeln!(out, "{kind}\t{}\t{}", report.loaded, report.rejected.len())?,
        Format::Human => writeln!(
            out,
            "{kind}: {} loaded, {} rejected",
            report.loaded,
            report.rejected.len()
        )?,
    }
    Ok(())
}

fn map(ctx: &Ctx, out: &mut dyn Write, affiliations: bool) -> anyhow::Result<()> {
    let provider = ctx
        .cfg
        .provider
        .clone()
        .ok_or_else(|| UsageError("map needs --provider or a config provider".into()))?;
    let _lock = ctx.lock()?;
    let sidecar = workspace::load_sidecar(&ctx.cfg)?;
    let mut store = workspace::load_store(&ctx.cfg)?;
    let r = sidecar.map_to_graph(&mut store, &MapOptions { provider, affiliations })?;
    workspace::save_store(&ctx.cfg, &store)?;
    match ctx.format {
        Format::Tsv => writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.publishes, r.uses, r.citations, r.affiliations, r.triples_inserted
        )?,
        Format::Human => writeln!(
            out,
            "mapped {} publications, {} usage events, {} citations, {} affiliations; {} new triples",
            r.publishes, r.uses, r.citations, r.affiliations, r.triples_inserted
        )?,
    }
    Ok(())
}

fn validate(ctx: &Ctx, out: &mut dyn Write) -> anyhow::Result<()> {
    let store = workspace::load_store(&ctx.cfg)?;
    let typed: BTreeSet<Term> = store
        .triples_matching(None, Some(&rdf::type_()), None)
        .map(|t| t.subject)
        .collect();
    let mut found = 0usize;
    for node in &typed {
        for v in schema().validate_instance(node, &store)? {
            found += 1;
            match ctx.format {
                Format::Tsv => writeln!(out, "{node}\t{v}")?,
                Format::Human => writeln!(out, "{node}: {v}")?,
            }
        }
    }
    if ctx.format == Format::Human {
        writeln!(out, "checked {} typed nodes, {found} violations", typed.len())?;
    }
    if found > 0 {
        return Err(DataError(format!("{found} schema violations")).into());
    }
    Ok(())
}

fn query(ctx: &Ctx, out: &mut dyn Write, input: &InputArg) -> anyhow::Result<()> {
    let mut bytes = Vec::new();
    read_input(input)?.read_to_end(&mut bytes)?;
    let script = parse_script_bytes(&bytes, &ctx.cfg.namespaces)?;
    if script.inserts.is_empty() {
        let store = workspace::load_store(&ctx.cfg)?;
        for (i, block) in script.blocks.iter().enumerate() {
            let solutions = evaluate_block(block, &store)?;
            let rows: BTreeSet<Vec<&Term>> = solutions
                .project(&block.projection)
                .into_iter()
                .map(|row| row.into_iter().map(|id| store.term(id)).collect())
                .collect();
            let vars: Vec<String> = block.projection.iter().map(|v| format!("?{v}")).collect();
            match ctx.format {
                Format::Tsv => writeln!(out, "block\t{}", vars.join("\t"))?,
                Format::Human => writeln!(out, "block {i}: {} rows of {}", rows.len(), vars.join(" "))?,
            }
            for row in &rows {
                let cells: Vec<String> = row.iter().map(|t| t.to_string()).collect();
                match ctx.format {
                    Format::Tsv => writeln!(out, "{i}\t{}", cells.join("\t"))?,
                    Format::Human => writeln!(out, "  {}", cells.join("  "))?,
                }
            }
        }
        return Ok(());
    }
    let _lock = ctx.lock()?;
    let mut store = workspace::load_store(&ctx.cfg)?;
    let mut ledger = workspace::load_ledger(&ctx.cfg)?;
    let opts = ExecOptions {
        precision: ctx.cfg.precision,
        ..ExecOptions::default()
    };
    let report = execute_script_with(&script, &mut store, &opts)?;
    for t in &report.inserted_triples {
        ledger.record(QUERY_ENTRY, t.clone());
    }
    workspace::save_store(&ctx.cfg, &store)?;
    workspace::save_ledger(&ctx.cfg, &ledger)?;
    match ctx.format {
        Format::Tsv => writeln!(out, "{}\t{}", report.generated, report.inserted)?,
        Format::Human => writeln!(out, "generated {} triples, {} new", report.generated, report.inserted)?,
    }
    Ok(())
}

fn infer(ctx: &Ctx, out: &mut dyn Write, args: &InferArgs) -> anyhow::Result<()> {
    if args.list {
        for r in inference::rules() {
            match ctx.format {
                Format::Tsv => writeln!(out, "{}\t{}\t{}", r.name, r.produces.join(","), r.description)?,
                Format::Human => writeln!(out, "{:<14} {}", r.name, r.description)?,
            }
        }
        return Ok(());
    }
    if !args.all && args.rules.is_empty() && !args.coauthors && args.group_citation.is_none() {
        bail!(UsageError(
            "nothing to infer: give --all, --rule, --coauthors, or --group-citation".into()
        ));
    }
    for name in &args.rules {
        if inference::rule(name).is_none() {
            bail!(UsageError(format!("unknown rule `{name}`")));
        }
    }
    let years = args.years.as_deref().map(parse_years).transpose()?;
    let group = match &args.group_citation {
        Some(roots) => {
            let window = |w: &Option<String>, what: &str| {
                w.as_deref()
                    .map(parse_years)
                    .transpose()?
                    .ok_or_else(|| anyhow::Error::from(UsageError(format!("--group-citation needs --{what}-years"))))
            };
            Some(GroupCitationRequest {
                source_root: ctx.term(&roots[0])?,
                sink_root: ctx.term(&roots[1])?,
                source_window: window(&args.source_years, "source")?,
                sink_window: window(&args.sink_years, "sink")?,
            })
        }
        None => None,
    };

    let _lock = ctx.lock()?;
    let mut store = workspace::load_store(&ctx.cfg)?;
    let mut engine = InferenceEngine::with_ledger(workspace::load_ledger(&ctx.cfg)?);
    engine.part_of = part_of(args.part_of);
    let mut report: Vec<(String, usize)> = Vec::new();
    if args.all {
        report.extend(engine.run_all(&mut store)?.into_iter().map(|(n, c)| (n.to_string(), c)));
    } else {
        for name in &args.rules {
            report.push((name.clone(), engine.run_rule(name, &mut store)?));
        }
    }
    if args.coauthors {
        let before = engine.ledger().len(inference::COAUTHOR);
        let pairs = engine.derive_all_coauthors(years, &mut store)?;
        log::info!("{pairs} coauthor pairs");
        report.push((
            inference::COAUTHOR.into(),
            engine.ledger().len(inference::COAUTHOR).saturating_sub(before),
        ));
    }
    let group_node = match &group {
        Some(req) => Some(engine.derive_group_citation(req, &mut store)?),
        None => None,
    };
    workspace::save_store(&ctx.cfg, &store)?;
    workspace::save_ledger(&ctx.cfg, engine.ledger())?;
    for (name, n) in &report {
        match ctx.format {
            Format::Tsv => writeln!(out, "{name}\t{n}")?,
            Format::Human => writeln!(out, "{name}: {n} triples inserted")?,
        }
    }
    if let Some(node) = group_node {
        match ctx.format {
            Format::Tsv => writeln!(out, "{}\t{}\t{}", inference::GROUP_CITATION, node.node, node.weight)?,
            Format::Human => writeln!(out, "group citation {} weight {}", node.node, node.weight)?,
        }
    }
    Ok(())
}

fn retract(ctx: &Ctx, out: &mut dyn Write, rules: &[String], all: bool) -> anyhow::Result<()> {
    let _lock = ctx.lock()?;
    let mut store = workspace::load_store(&ctx.cfg)?;
    let mut engine = InferenceEngine::with_ledger(workspace::load_ledger(&ctx.cfg)?);
    let entries: Vec<String> = if all {
        engine.ledger().rules().map(str::to_string).collect()
    } else {
        rules.to_vec()
    };
    let mut report = Vec::new();
    for entry in &entries {
        report.push((entry, engine.retract_rule(entry, &mut store)));
    }
    workspace::save_store(&ctx.cfg, &store)?;
    workspace::save_ledger(&ctx.cfg, engine.ledger())?;
    for (entry, n) in report {
        match ctx.format {
            Format::Tsv => writeln!(out, "{entry}\t{n}")?,
            Format::Human => writeln!(out, "{entry}: {n} triples removed")?,
        }
    }
    Ok(())
}

fn metric(ctx: &Ctx, out: &mut dyn Write, args: &MetricArgs) -> anyhow::Result<()> {
    let kind: MetricKind = args
        .kind
        .parse()
        .map_err(|e: metrics::MetricError| UsageError(e.to_string()))?;
    let mut req =
        MetricRequest::new(kind, ctx.term(&args.object)?, args.year).map_err(|e| UsageError(e.to_string()))?;
    if let Some(w) = &args.window {
        req = req
            .with_window(parse_years(w)?)
            .map_err(|e| UsageError(e.to_string()))?;
    }
    let _lock = ctx.lock()?;
    let mut store = workspace::load_store(&ctx.cfg)?;
    let mut engine = InferenceEngine::with_ledger(workspace::load_ledger(&ctx.cfg)?);
    engine.part_of = part_of(args.part_of);
    let result = metrics::compute(&mut engine, &req, &mut store, ctx.cfg.precision)?;
    workspace::save_store(&ctx.cfg, &store)?;
    workspace::save_ledger(&ctx.cfg, engine.ledger())?;
    match ctx.format {
        Format::Tsv => {
            writeln!(out, "{}", metrics::TSV_HEADER)?;
            writeln!(out, "{}", result.tsv_line())?;
        }
        Format::Human => writeln!(
            out,
            "{} of {} in {} (window {}): {} = {} / {}",
            kind, req.object, req.year, req.window, result.value, result.numerator, result.denominator
        )?,
    }
    Ok(())
}

fn export(ctx: &Ctx, out: &mut dyn Write, output: Option<PathBuf>) -> anyhow::Result<()> {
    let store = workspace::load_store(&ctx.cfg)?;
    let triples: BTreeSet<_> = store.iter().collect();
    match output {
        Some(path) => workspace::write_atomic(&path, |w| Ok(write_ntriples(w, &triples)?)),
        None => Ok(write_ntriples(out, &triples)?),
    }
}

fn import(ctx: &Ctx, out: &mut dyn Write, input: &InputArg) -> anyhow::Result<()> {
    let _lock = ctx.lock()?;
    let mut store = workspace::load_store(&ctx.cfg)?;
    let before = store.len();
    let read = store.load_ntriples(read_input(input)?)?;
    workspace::save_store(&ctx.cfg, &store)?;
    let inserted = store.len() - before;
    match ctx.format {
        Format::Tsv => writeln!(out, "{read}\t{inserted}")?,
        Format::Human => writeln!(out, "read {read} triples, {inserted} new")?,
    }
    Ok(())
}

fn stats(ctx: &Ctx, out: &mut dyn Write) -> anyhow::Result<()> {
    let store = workspace::load_store(&ctx.cfg)?;
    let ledger = workspace::load_ledger(&ctx.cfg)?;
    let mut rows: Vec<(&str, String, usize)> = vec![("store", "triples".into(), store.len())];
    let inferred = schema()
        .properties()
        .filter(|p| p.kind == PropertyKind::Inferred)
        .map(|p| {
            store
                .triples_matching(None, Some(&Term::iri(p.iri).expect("schema IRI")), None)
                .count()
        })
        .sum();
    rows.push(("store", "inferred_triples".into(), inferred));
    let mut classes: BTreeMap<String, usize> = BTreeMap::new();
    for c in schema().classes() {
        let n = store
            .subjects(&rdf::type_(), &Term::iri(c.iri).expect("schema IRI"))
            .len();
        let name = ctx.cfg.namespaces.compact(c.iri).unwrap_or_else(|| c.iri.to_string());
        classes.insert(name, n);
    }
    rows.extend(classes.into_iter().map(|(k, n)| ("class", k, n)));
    rows.extend(ledger.rules().map(|r| ("ledger", r.to_string(), ledger.len(r))));
    rows.push(("ledger", "total".into(), ledger.total()));
    for (section, key, n) in rows {
        match ctx.format {
            Format::Tsv => writeln!(out, "{section}\t{key}\t{n}")?,
            Format::Human => writeln!(out, "{section:<7} {key:<28} {n}")?,
        }
    }
    Ok(())
}

fn resolve(ctx: &Ctx, out: &mut dyn Write, id: &str) -> anyhow::Result<()> {
    let sidecar = workspace::load_sidecar(&ctx.cfg)?;
    let resolved = sidecar.resolve(id).map_err(|e| DataError(e.to_string()))?;
    let mut fields: Vec<(&str, String)> = vec![("iri", resolved.iri().to_string())];
    let opt = |v: &Option<String>| v.clone().unwrap_or_default();
    match &resolved {
        Resolved::Document { record: r, .. } => fields.extend([
            ("doc_id", r.doc_id.clone()),
            ("title", opt(&r.title)),
            ("authors", r.authors.join("|")),
            ("collection", opt(&r.collection)),
            ("publisher", opt(&r.publisher)),
            ("date", opt(&r.date)),
            ("start_page", opt(&r.start_page)),
            ("end_page", opt(&r.end_page)),
            ("volume", opt(&r.volume)),
            ("issue", opt(&r.issue)),
            ("doi", opt(&r.doi)),
        ]),
        Resolved::Usage { record: r, .. } => fields.extend([
            ("event_id", r.event_id.clone()),
            ("time", opt(&r.time)),
            ("agent", opt(&r.agent)),
            ("session", opt(&r.session)),
            ("affiliation", opt(&r.affiliation)),
            ("doc_id", r.doc_id.clone()),
        ]),
    }
    for (k, v) in fields {
        match ctx.format {
            Format::Tsv => writeln!(out, "{k}\t{v}")?,
            Format::Human => writeln!(out, "{k:<12} {v}")?,
        }
    }
    Ok(())
}
