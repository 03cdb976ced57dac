use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use mesur_core::rdf::{NamespaceTable, Term};
use serde::Deserialize;

use crate::args::GlobalOpts;
use crate::UsageError;

pub const DEFAULT_STORE: &str = "mesur.store";

/// Contents of the optional TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub store: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
    pub provider: Option<String>,
    pub precision: Option<u32>,
    pub verbosity: Option<u8>,
    #[serde(default)]
    pub prefixes: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<FileConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        // paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.store, &mut cfg.sidecar].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Effective settings after merging file and flags.
#[derive(Debug, Clone)]
pub struct Config {
    pub store: PathBuf,
    pub sidecar: PathBuf,
    pub provider: Option<Term>,
    pub namespaces: NamespaceTable,
    pub precision: u32,
    pub verbosity: u8,
}

impl Config {
    pub fn resolve(opts: &GlobalOpts) -> anyhow::Result<Config> {
        let file = match &opts.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let store = opts
            .store
            .clone()
            .or(file.store)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_STORE));
        let sidecar = opts
            .sidecar
            .clone()
            .or(file.sidecar)
            .unwrap_or_else(|| suffixed(&store, ".sidecar.json"));
        let provider = match opts.provider.clone().or(file.provider) {
            Some(p) => {
                Some(Term::iri(p.clone()).map_err(|_| UsageError(format!("provider `{p}` is not an absolute IRI")))?)
            }
            None => None,
        };
        let mut namespaces = NamespaceTable::default();
        let flag_prefixes = opts.prefixes.iter().map(|p| {
            p.split_once('=')
                .map(|(n, i)| (n.to_string(), i.to_string()))
                .ok_or_else(|| UsageError(format!("prefix `{p}` is not NAME=IRI")))
        });
        for entry in file.prefixes.into_iter().map(Ok).chain(flag_prefixes) {
            let (name, iri) = entry?;
            namespaces
                .register(&name, &iri)
                .map_err(|e| UsageError(e.to_string()))?;
        }
        Ok(Config {
            store,
            sidecar,
            provider,
            namespaces,
            precision: opts
                .precision
                .or(file.precision)
                .unwrap_or(mesur_core::decimal::DEFAULT_SCALE),
            verbosity: opts.verbose.max(file.verbosity.unwrap_or(0)),
        })
    }

    pub fn ledger_path(&self) -> PathBuf {
        suffixed(&self.store, ".ledger")
    }

    pub fn lock_path(&self) -> PathBuf {
        suffixed(&self.store, ".lock")
    }
}

pub fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}
