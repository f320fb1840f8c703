use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use adjscale::ranking::IntensityVector;

/// Why a subcommand stopped. Usage problems are found before any data is
/// processed and exit with 2; everything else exits with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "invalid configuration: {msg}"),
            Failure::Data(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<adjscale::Error> for Failure {
    fn from(e: adjscale::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Attaches a file name to a data error.
pub trait Context<T> {
    fn with_file(self, path: &Path) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Context<T> for Result<T, E> {
    fn with_file(self, path: &Path) -> CmdResult<T> {
        self.map_err(|e| Failure::Data(e.into().context(format!("{}", path.display()))))
    }
}

pub fn check_input(flag: &str, path: &Path) -> CmdResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("--{flag}: {} is not a readable file", path.display())))
    }
}

pub fn check_output(flag: &str, path: &Path) -> CmdResult {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if path.is_dir() {
        return Err(usage(format!("--{flag}: {} is a directory", path.display())));
    }
    if !parent.is_dir() {
        return Err(usage(format!(
            "--{flag}: directory {} does not exist",
            parent.display()
        )));
    }
    Ok(())
}

pub fn open(path: &Path) -> CmdResult<BufReader<File>> {
    File::open(path).map(BufReader::new).with_file(path)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a half-written output.
pub fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>,
) -> CmdResult {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).with_file(path)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w).with_file(path)?;
        w.flush().with_file(path)?;
    }
    tmp.persist(path).map_err(|e| e.error).with_file(path)?;
    Ok(())
}

/// Writes to `path` atomically, or to standard output when no path is given.
pub fn write_output(
    path: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>,
) -> CmdResult {
    match path {
        Some(p) => write_atomic(p, body),
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

/// A layer selection: `all`, or a comma list of numbers and `a-b` ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerSpec {
    All,
    Some(BTreeSet<i64>),
}

impl LayerSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(LayerSpec::All);
        }
        let mut out = BTreeSet::new();
        for part in s.split(',').map(str::trim) {
            let bad = || format!("bad layer selection {s:?}");
            match part.split_once('-') {
                Some((a, b)) => {
                    let a: i64 = a.trim().parse().map_err(|_| bad())?;
                    let b: i64 = b.trim().parse().map_err(|_| bad())?;
                    if a > b {
                        return Err(bad());
                    }
                    out.extend(a..=b);
                }
                None => {
                    out.insert(part.parse().map_err(|_| bad())?);
                }
            }
        }
        Ok(LayerSpec::Some(out))
    }

    /// Resolves against the layers a store declares. `all` leaves out the
    /// input-embedding layer 0.
    pub fn resolve(&self, declared: &[i64], block_layers: &[i64]) -> Result<Vec<i64>, String> {
        match self {
            LayerSpec::All => {
                if block_layers.is_empty() {
                    Err("the contextual file declares no transformer layers".into())
                } else {
                    Ok(block_layers.to_vec())
                }
            }
            LayerSpec::Some(set) => {
                if let Some(l) = set.iter().find(|l| !declared.contains(l)) {
                    return Err(format!("layer {l} is not declared (available: {declared:?})"));
                }
                Ok(set.iter().copied().collect())
            }
        }
    }
}

/// Intensity vectors from a file holding one JSON object, a JSON array, or
/// one object per line.
pub fn read_dvecs(path: &Path) -> CmdResult<Vec<IntensityVector>> {
    let text = std::fs::read_to_string(path).with_file(path)?;
    if let Ok(one) = serde_json::from_str::<IntensityVector>(&text) {
        return Ok(vec![one]);
    }
    if let Ok(many) = serde_json::from_str::<Vec<IntensityVector>>(&text) {
        return Ok(many);
    }
    adjscale::selection::read_jsonl("intensity vector", text.as_bytes()).with_file(path)
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_spec_parsing() {
        assert_eq!(LayerSpec::parse("all").unwrap(), LayerSpec::All);
        let LayerSpec::Some(s) = LayerSpec::parse("1,3-5, 9").unwrap() else {
            panic!()
        };
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec![1, 3, 4, 5, 9]);
        assert!(LayerSpec::parse("5-3").is_err());
        assert!(LayerSpec::parse("x").is_err());
    }

    #[test]
    fn layer_resolution() {
        let declared = [0, 1, 2, 3];
        assert_eq!(LayerSpec::All.resolve(&declared, &[1, 2, 3]).unwrap(), vec![1, 2, 3]);
        assert!(LayerSpec::parse("4").unwrap().resolve(&declared, &[1, 2, 3]).is_err());
        assert_eq!(LayerSpec::parse("0").unwrap().resolve(&declared, &[1, 2, 3]).unwrap(), vec![0]);
    }
}
