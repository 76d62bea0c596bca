//! Triple datasets: label interning, split loading and the observed-fact index
//! used by the filtered ranking protocol.

mod index;
mod prepare;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use index::{build_observed_index, ObservedFactIndex};
pub use prepare::{prepare_dataset, prepare_schemaless, PreparationReport, PreparedDataset};

pub type EntityId = usize;
pub type RelationId = usize;

/// Bidirectional label ↔ dense id map. Ids are assigned in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelMap {
    labels: Vec<String>,
    ids: HashMap<String, usize>,
}

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `label`, allocating the next free id if unseen.
    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_owned());
        self.ids.insert(label.to_owned(), id);
        id
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: usize) -> Option<&str> {
        self.labels.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub entities: LabelMap,
    pub relations: LabelMap,
    pub classes: LabelMap,
}

impl Vocabulary {
    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub h: EntityId,
    pub r: RelationId,
    pub t: EntityId,
}

impl Triple {
    pub const fn new(h: EntityId, r: RelationId, t: EntityId) -> Self {
        Triple { h, r, t }
    }
}

/// Which position of a triple is hidden in a link prediction query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Head,
    Tail,
}

impl Triple {
    /// The triple with the `side` entity replaced by `e`.
    pub fn with_entity(self, side: Side, e: EntityId) -> Triple {
        match side {
            Side::Head => Triple { h: e, ..self },
            Side::Tail => Triple { t: e, ..self },
        }
    }

    pub fn entity(&self, side: Side) -> EntityId {
        match side {
            Side::Head => self.h,
            Side::Tail => self.t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Split::Train => "train.txt",
            Split::Valid => "valid.txt",
            Split::Test => "test.txt",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "validation" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub vocab: Vocabulary,
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
}

impl Dataset {
    pub fn split(&self, split: Split) -> &[Triple] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    pub fn num_entities(&self) -> usize {
        self.vocab.num_entities()
    }

    pub fn num_relations(&self) -> usize {
        self.vocab.num_relations()
    }

    /// All triples of all splits, in train, valid, test order.
    pub fn all_triples(&self) -> impl Iterator<Item = &Triple> {
        self.train.iter().chain(&self.valid).chain(&self.test)
    }

    pub fn label_triple(&self, triple: &Triple) -> (String, String, String) {
        let v = &self.vocab;
        (
            v.entities.label(triple.h).unwrap_or("?").to_owned(),
            v.relations.label(triple.r).unwrap_or("?").to_owned(),
            v.entities.label(triple.t).unwrap_or("?").to_owned(),
        )
    }

    /// Builds a dataset from labelled triples per split. Interning follows the
    /// order of first occurrence across train, then valid, then test.
    pub fn from_labeled<S: AsRef<str>>(
        train: &[(S, S, S)],
        valid: &[(S, S, S)],
        test: &[(S, S, S)],
    ) -> Result<Self> {
        let mut builder = DatasetBuilder::default();
        for (split, rows) in [(Split::Train, train), (Split::Valid, valid), (Split::Test, test)] {
            for (h, r, t) in rows {
                builder.push(split, h.as_ref(), r.as_ref(), t.as_ref())?;
            }
        }
        builder.finish()
    }

    /// Checks the invariants the rest of the crate relies on.
    pub fn validate(&self) -> Result<()> {
        let n_e = self.num_entities();
        let n_r = self.num_relations();
        let mut seen: HashMap<Triple, Split> = HashMap::new();
        let mut overlaps = Vec::new();
        for split in Split::ALL {
            let mut local = HashSet::new();
            for t in self.split(split) {
                if t.h >= n_e || t.t >= n_e || t.r >= n_r {
                    return Err(Error::Validation(format!(
                        "{} triple {t:?} references an id outside the vocabulary",
                        split.name()
                    )));
                }
                if !local.insert(*t) {
                    return Err(Error::Validation(format!(
                        "{} split contains duplicate triple {:?}",
                        split.name(),
                        self.label_triple(t)
                    )));
                }
                match seen.get(t) {
                    Some(&other) => overlaps.push((other, split, *t)),
                    None => {
                        seen.insert(*t, split);
                    }
                }
            }
        }
        if overlaps.is_empty() {
            Ok(())
        } else {
            Err(overlap_error(self, &overlaps))
        }
    }
}

fn overlap_error(dataset: &Dataset, overlaps: &[(Split, Split, Triple)]) -> Error {
    const SHOWN: usize = 10;
    let listed: Vec<String> = overlaps
        .iter()
        .take(SHOWN)
        .map(|(a, b, t)| {
            let (h, r, tl) = dataset.label_triple(t);
            format!("({h}, {r}, {tl}) in {} and {}", a.name(), b.name())
        })
        .collect();
    let more = overlaps.len().saturating_sub(SHOWN);
    let suffix = if more > 0 {
        format!(" and {more} more")
    } else {
        String::new()
    };
    Error::Validation(format!(
        "splits overlap on {} triple(s): {}{suffix}",
        overlaps.len(),
        listed.join("; ")
    ))
}

/// Incremental dataset construction with per-split duplicate dropping.
#[derive(Debug, Default)]
pub struct DatasetBuilder {
    dataset: Dataset,
    seen: [HashSet<Triple>; 3],
    duplicates: [usize; 3],
}

impl DatasetBuilder {
    fn slot(split: Split) -> usize {
        match split {
            Split::Train => 0,
            Split::Valid => 1,
            Split::Test => 2,
        }
    }

    /// Adds a triple; returns `false` if it duplicated an earlier line of the same split.
    pub fn push(&mut self, split: Split, h: &str, r: &str, t: &str) -> Result<bool> {
        if h.is_empty() || r.is_empty() || t.is_empty() {
            return Err(Error::Validation(format!(
                "empty label in triple ({h:?}, {r:?}, {t:?})"
            )));
        }
        let v = &mut self.dataset.vocab;
        let triple = Triple::new(v.entities.intern(h), v.relations.intern(r), v.entities.intern(t));
        let slot = Self::slot(split);
        if !self.seen[slot].insert(triple) {
            self.duplicates[slot] += 1;
            return Ok(false);
        }
        match split {
            Split::Train => self.dataset.train.push(triple),
            Split::Valid => self.dataset.valid.push(triple),
            Split::Test => self.dataset.test.push(triple),
        }
        Ok(true)
    }

    pub fn duplicates(&self, split: Split) -> usize {
        self.duplicates[Self::slot(split)]
    }

    pub fn finish(self) -> Result<Dataset> {
        for split in Split::ALL {
            let n = self.duplicates(split);
            if n > 0 {
                log::warn!("dropped {n} duplicate triple(s) from the {} split", split.name());
            }
        }
        self.dataset.validate()?;
        Ok(self.dataset)
    }
}

/// Reads `head<TAB>relation<TAB>tail` lines. Blank lines are skipped.
pub fn read_labeled_triples(path: &Path) -> Result<Vec<(String, String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "empty label".into(),
            });
        }
        rows.push((fields[0].to_owned(), fields[1].to_owned(), fields[2].to_owned()));
    }
    Ok(rows)
}

pub fn load_dataset(train_path: &Path, valid_path: &Path, test_path: &Path) -> Result<Dataset> {
    let mut builder = DatasetBuilder::default();
    for (split, path) in [
        (Split::Train, train_path),
        (Split::Valid, valid_path),
        (Split::Test, test_path),
    ] {
        for (h, r, t) in read_labeled_triples(path)? {
            builder.push(split, &h, &r, &t)?;
        }
    }
    builder.finish()
}

/// Loads `train.txt`, `valid.txt` and `test.txt` from a directory.
pub fn load_dataset_dir(dir: &Path) -> Result<Dataset> {
    load_dataset(
        &dir.join(Split::Train.file_name()),
        &dir.join(Split::Valid.file_name()),
        &dir.join(Split::Test.file_name()),
    )
}

pub fn write_triples(dataset: &Dataset, split: Split, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for t in dataset.split(split) {
        let (h, r, tl) = dataset.label_triple(t);
        writeln!(out, "{h}\t{r}\t{tl}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes the three splits as `train.txt`, `valid.txt`, `test.txt` under `dir`.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for split in Split::ALL {
        write_triples(dataset, split, &dir.join(split.file_name()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn identical_splits_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a", "a\tr\tb\n");
        let b = write(dir.path(), "b", "a\tr\tb\n");
        let c = write(dir.path(), "c", "a\tr\tb\n");
        let err = load_dataset(&a, &b, &c).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("(a, r, b)")), "{err}");
    }

    #[test]
    fn small_train_only_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let tr = write(dir.path(), "tr", "a\tr\tb\nb\tr\tc\n");
        let va = write(dir.path(), "va", "");
        let te = write(dir.path(), "te", "");
        let ds = load_dataset(&tr, &va, &te).unwrap();
        assert_eq!(ds.num_entities(), 3);
        assert_eq!(ds.num_relations(), 1);
        assert_eq!(ds.train.len(), 2);
        assert_eq!(ds.vocab.entities.labels(), &["a", "b", "c"]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let tr = write(dir.path(), "tr", "a\tr\tb\na\tr\n");
        let e = write(dir.path(), "e", "");
        match load_dataset(&tr, &e, &e).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicates_within_split_are_dropped() {
        let mut b = DatasetBuilder::default();
        assert!(b.push(Split::Train, "a", "r", "b").unwrap());
        assert!(!b.push(Split::Train, "a", "r", "b").unwrap());
        assert_eq!(b.duplicates(Split::Train), 1);
        let ds = b.finish().unwrap();
        assert_eq!(ds.train.len(), 1);
    }

    #[test]
    fn interning_follows_train_valid_test_order() {
        let ds = Dataset::from_labeled(
            &[("x", "p", "y")],
            &[("z", "q", "x")],
            &[("w", "p", "z")],
        )
        .unwrap();
        assert_eq!(ds.vocab.entities.labels(), &["x", "y", "z", "w"]);
        assert_eq!(ds.vocab.relations.labels(), &["p", "q"]);
    }

    #[test]
    fn write_then_reload_round_trips() {
        let ds = Dataset::from_labeled(
            &[("a", "r", "b"), ("b", "s", "c")],
            &[("c", "r", "a")],
            &[("a", "s", "c")],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let back = load_dataset_dir(dir.path()).unwrap();
        assert_eq!(back, ds);
    }
}
