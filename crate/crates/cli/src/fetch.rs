use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

const BASE: &str = "https://raw.githubusercontent.com/mfaruqui/eval-word-vectors/master/data/word-sim";

/// Short names and their upstream files.
pub const DATASETS: &[(&str, &str)] = &[
    ("ws353", "EN-WS-353-ALL.txt"),
    ("ws353-rel", "EN-WS-353-REL.txt"),
    ("ws353-sim", "EN-WS-353-SIM.txt"),
    ("men", "EN-MEN-TR-3k.txt"),
    ("mturk", "EN-MTurk-287.txt"),
    ("rg65", "EN-RG-65.txt"),
    ("rw", "EN-RW-STANFORD.txt"),
    ("simlex", "EN-SIMLEX-999.txt"),
];

const SUMS: &str = "SHA256SUMS";
const MAX_BYTES: u64 = 16 << 20;

/// Path of a fetched dataset given its short name or upstream file name.
pub fn dataset_path(dir: &Path, name: &str) -> Option<PathBuf> {
    let lower = name.to_ascii_lowercase();
    DATASETS
        .iter()
        .find(|(short, file)| *short == lower || file.eq_ignore_ascii_case(name))
        .map(|(_, file)| dir.join(file))
        .filter(|p| p.is_file())
        .or_else(|| Some(dir.join(name)).filter(|p| p.is_file()))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn read_sums(path: &Path) -> Result<BTreeMap<String, String>> {
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once("  "))
        .map(|(h, f)| (f.trim().to_string(), h.trim().to_string()))
        .collect())
}

fn download(url: &str) -> Result<Vec<u8>> {
    let mut resp = ureq::get(url).call().with_context(|| format!("GET {url}"))?;
    let body = resp
        .body_mut()
        .with_config()
        .limit(MAX_BYTES)
        .read_to_vec()
        .with_context(|| format!("reading {url}"))?;
    Ok(body)
}

/// Downloads every dataset into `dest`. Hashes are pinned in `SHA256SUMS`
/// on first download and checked on every later one.
pub fn run(dest: &Path) -> Result<()> {
    std::fs::create_dir_all(dest).with_context(|| format!("creating {}", dest.display()))?;
    let sums_path = dest.join(SUMS);
    let mut sums = read_sums(&sums_path)?;
    let mut failed = Vec::new();
    for (short, file) in DATASETS {
        let url = format!("{BASE}/{file}");
        let bytes = match download(&url) {
            Ok(b) => b,
            Err(e) => {
                log::error!("{short}: {e:#}");
                failed.push(*short);
                continue;
            }
        };
        let hash = sha256_hex(&bytes);
        match sums.get(*file) {
            Some(pinned) if *pinned != hash => {
                log::error!("{short}: checksum mismatch (expected {pinned}, got {hash}); not written");
                failed.push(*short);
                continue;
            }
            Some(_) => {}
            None => {
                log::warn!("{short}: no pinned checksum, recording {hash}");
                sums.insert(file.to_string(), hash);
            }
        }
        let path = dest.join(file);
        std::fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        log::info!("{short}: {} bytes -> {}", bytes.len(), path.display());
    }
    let text: String = sums.iter().map(|(f, h)| format!("{h}  {f}\n")).collect();
    std::fs::write(&sums_path, text).with_context(|| format!("writing {}", sums_path.display()))?;
    if !failed.is_empty() {
        bail!("failed to fetch: {}", failed.join(", "));
    }
    Ok(())
}
