use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use mesur_core::inference::Ledger;
use mesur_core::sidecar::Sidecar;
use mesur_core::Store;

use crate::config::{suffixed, Config};

/// Exclusive writer lock held for the life of a mutating command.
pub struct WriteLock {
    path: PathBuf,
}

impl WriteLock {
    pub fn acquire(path: PathBuf) -> anyhow::Result<WriteLock> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(WriteLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                bail!(
                    "store is locked by another writer ({}); remove it if no mesur process is running",
                    path.display()
                )
            }
            Err(e) => Err(e).with_context(|| format!("creating lock {}", path.display())),
        }
    }
}

impl Drop for WriteLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Writes `path` by renaming a fully written temporary sibling over it.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = suffixed(path, ".tmp");
    let file = File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    let mut out = BufWriter::new(file);
    let result = write(&mut out).and_then(|()| {
        let file = out.into_inner().map_err(|e| e.into_error())?;
        file.sync_all()?;
        Ok(())
    });
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))
}

fn open_existing(path: &Path) -> anyhow::Result<Option<BufReader<File>>> {
    match File::open(path) {
        Ok(f) => Ok(Some(BufReader::new(f))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e).with_context(|| format!("opening {}", path.display())),
    }
}

pub fn load_store(cfg: &Config) -> anyhow::Result<Store> {
    match open_existing(&cfg.store)? {
        Some(r) => Store::read_snapshot(r).with_context(|| format!("reading store {}", cfg.store.display())),
        None => Ok(Store::new()),
    }
}

pub fn save_store(cfg: &Config, store: &Store) -> anyhow::Result<()> {
    write_atomic(&cfg.store, |out| Ok(store.write_snapshot(out)?))
}

pub fn load_ledger(cfg: &Config) -> anyhow::Result<Ledger> {
    let path = cfg.ledger_path();
    match open_existing(&path)? {
        Some(r) => Ledger::read_from(r).with_context(|| format!("reading ledger {}", path.display())),
        None => Ok(Ledger::new()),
    }
}

pub fn save_ledger(cfg: &Config, ledger: &Ledger) -> anyhow::Result<()> {
    write_atomic(&cfg.ledger_path(), |out| Ok(ledger.write_to(out)?))
}

pub fn load_sidecar(cfg: &Config) -> anyhow::Result<Sidecar> {
    match open_existing(&cfg.sidecar)? {
        Some(r) => Sidecar::read_from(r).with_context(|| format!("reading sidecar {}", cfg.sidecar.display())),
        None => Ok(Sidecar::new()),
    }
}

pub fn save_sidecar(cfg: &Config, sidecar: &Sidecar) -> anyhow::Result<()> {
    write_atomic(&cfg.sidecar, |out| Ok(sidecar.write_to(out)?))
}
