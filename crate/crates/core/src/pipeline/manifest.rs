//! Line-oriented dataset manifest.
//!
//! ```text
//! # comment
//! format 1
//! config_sha256 <hex>
//! seed <u64>
//! class <index> <name> <count>
//! sample <class index> <seed> <sha256> <relative path>
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::config::hex;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestSample {
    pub class: usize,
    pub seed: u64,
    pub sha256: String,
    /// Relative to the manifest's directory.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub config_sha256: String,
    pub seed: u64,
    pub class_names: Vec<String>,
    pub samples: Vec<ManifestSample>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

impl DatasetManifest {
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for s in &self.samples {
            counts[s.class] += 1;
        }
        counts
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# twmd dataset manifest\nformat 1\n");
        let _ = writeln!(out, "config_sha256 {}", self.config_sha256);
        let _ = writeln!(out, "seed {}", self.seed);
        for (i, (name, count)) in self.class_names.iter().zip(self.class_counts()).enumerate() {
            let _ = writeln!(out, "class {i} {name} {count}");
        }
        for s in &self.samples {
            // manifests are portable: always forward slashes
            let path = s.path.to_string_lossy().replace('\\', "/");
            let _ = writeln!(out, "sample {} {} {} {}", s.class, s.seed, s.sha256, path);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |no: usize, what: &str| Error::Manifest(format!("line {}: {what}", no + 1));
        let mut format_seen = false;
        let mut config_sha256 = None;
        let mut seed = None;
        let mut classes: Vec<(String, usize)> = Vec::new();
        let mut samples = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["format", "1"] => format_seen = true,
                ["format", v] => return Err(bad(no, &format!("unsupported format {v}"))),
                ["config_sha256", h] => config_sha256 = Some(h.to_string()),
                ["seed", s] => seed = Some(s.parse().map_err(|_| bad(no, "bad seed"))?),
                ["class", i, name, count] => {
                    let i: usize = i.parse().map_err(|_| bad(no, "bad class index"))?;
                    if i != classes.len() {
                        return Err(bad(no, "classes must be listed in order"));
                    }
                    let count = count.parse().map_err(|_| bad(no, "bad class count"))?;
                    classes.push((name.to_string(), count));
                }
                ["sample", class, seed, sha, path @ ..] if !path.is_empty() => {
                    let class: usize = class.parse().map_err(|_| bad(no, "bad sample class"))?;
                    if class >= classes.len() {
                        return Err(bad(no, "sample refers to an undeclared class"));
                    }
                    samples.push(ManifestSample {
                        class,
                        seed: seed.parse().map_err(|_| bad(no, "bad sample seed"))?,
                        sha256: sha.to_string(),
                        path: PathBuf::from(path.join(" ")),
                    });
                }
                _ => return Err(bad(no, "unrecognized line")),
            }
        }
        if !format_seen {
            return Err(Error::Manifest("missing `format` line".into()));
        }
        let manifest = Self {
            config_sha256: config_sha256.ok_or_else(|| Error::Manifest("missing config hash".into()))?,
            seed: seed.ok_or_else(|| Error::Manifest("missing seed".into()))?,
            class_names: classes.iter().map(|c| c.0.clone()).collect(),
            samples,
        };
        for ((name, declared), actual) in classes.iter().zip(manifest.class_counts()) {
            if *declared != actual {
                return Err(Error::Manifest(format!(
                    "class `{name}` declares {declared} samples, lists {actual}"
                )));
            }
        }
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Manifest(format!("cannot read `{}`: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Reads every listed file and checks its hash. Returns the contents in
    /// manifest order.
    pub fn read_samples(&self, base: &Path) -> Result<Vec<Vec<u8>>> {
        self.samples
            .iter()
            .map(|s| {
                let path = base.join(&s.path);
                let bytes = std::fs::read(&path)
                    .map_err(|e| Error::Manifest(format!("cannot read `{}`: {e}", path.display())))?;
                if sha256_hex(&bytes) != s.sha256 {
                    return Err(Error::Manifest(format!(
                        "`{}` does not match its recorded hash",
                        path.display()
                    )));
                }
                Ok(bytes)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_manifest() -> DatasetManifest {
        DatasetManifest {
            config_sha256: "ab".repeat(32),
            seed: 7,
            class_names: vec!["walk".into(), "sit".into()],
            samples: vec![
                ManifestSample {
                    class: 0,
                    seed: 11,
                    sha256: sha256_hex(b"a"),
                    path: "walk/walk_000.rmap".into(),
                },
                ManifestSample {
                    class: 1,
                    seed: 12,
                    sha256: sha256_hex(b"b"),
                    path: "sit/sit_000.rmap".into(),
                },
            ],
        }
    }

    #[test]
    fn render_parse_round_trip() {
        let m = sample_manifest();
        let text = m.render();
        assert!(text.contains("class 1 sit 1\n"));
        assert_eq!(DatasetManifest::parse(&text).unwrap(), m);
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let text = sample_manifest().render().replace("class 1 sit 1", "class 1 sit 2");
        assert!(matches!(DatasetManifest::parse(&text), Err(Error::Manifest(_))));
        assert!(DatasetManifest::parse("format 2\n").is_err());
        assert!(DatasetManifest::parse("seed 1\n").is_err());
    }

    #[test]
    fn verification_catches_changed_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = sample_manifest();
        std::fs::create_dir_all(dir.path().join("walk")).unwrap();
        std::fs::create_dir_all(dir.path().join("sit")).unwrap();
        std::fs::write(dir.path().join("walk/walk_000.rmap"), b"a").unwrap();
        std::fs::write(dir.path().join("sit/sit_000.rmap"), b"b").unwrap();
        assert_eq!(m.read_samples(dir.path()).unwrap(), vec![b"a".to_vec(), b"b".to_vec()]);
        std::fs::write(dir.path().join("sit/sit_000.rmap"), b"c").unwrap();
        assert!(m.read_samples(dir.path()).is_err());
        std::fs::remove_file(dir.path().join("sit/sit_000.rmap")).unwrap();
        assert!(m.read_samples(dir.path()).is_err());
    }
}
