use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ClassHierarchy, ClassId, RelationSignature, Schema};
use crate::data::Vocabulary;
use crate::error::{Error, Result};

/// Locations of the three schema files.
///
/// - types: `entity<TAB>class`
/// - hierarchy: `subclass<TAB>superclass` (optional; without it no Wu-Palmer regime)
/// - signature: `relation<TAB>DOMAIN|RANGE<TAB>class`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaPaths {
    pub types: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<PathBuf>,
    pub signature: PathBuf,
    /// Root class label; inferred as the unique parentless class when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
}

impl SchemaPaths {
    /// `types.txt`, `hierarchy.txt` (if present) and `signature.txt` inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        let hierarchy = dir.join("hierarchy.txt");
        SchemaPaths {
            types: dir.join("types.txt"),
            hierarchy: hierarchy.exists().then_some(hierarchy),
            signature: dir.join("signature.txt"),
            root: None,
        }
    }
}

fn read_rows(path: &Path, width: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_owned).collect();
        if fields.len() != width || fields.iter().any(String::is_empty) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected {width} non-empty tab-separated fields"),
            });
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

/// Loads a schema against an existing vocabulary. Class labels are interned
/// into `vocab.classes`; entities and relations unknown to the vocabulary are
/// ignored.
pub fn load_schema(paths: &SchemaPaths, vocab: &mut Vocabulary) -> Result<Schema> {
    let types = read_rows(&paths.types, 2)?;
    let edges = match &paths.hierarchy {
        Some(p) => Some(read_rows(p, 2)?),
        None => None,
    };
    let signature = read_rows(&paths.signature, 3)?;

    let mut asserted = vec![Vec::new(); vocab.num_entities()];
    let mut skipped_entities = 0usize;
    for (_, row) in &types {
        let class = vocab.classes.intern(&row[1]);
        match vocab.entities.id(&row[0]) {
            Some(e) => asserted[e].push(class),
            None => skipped_entities += 1,
        }
    }

    let n_r = vocab.num_relations();
    let mut domain: Vec<Option<Vec<ClassId>>> = vec![None; n_r];
    let mut range: Vec<Option<Vec<ClassId>>> = vec![None; n_r];
    let mut skipped_relations = 0usize;
    for (line, row) in &signature {
        let class = vocab.classes.intern(&row[2]);
        let Some(r) = vocab.relations.id(&row[0]) else {
            skipped_relations += 1;
            continue;
        };
        let slot = match row[1].to_ascii_uppercase().as_str() {
            "DOMAIN" => &mut domain[r],
            "RANGE" => &mut range[r],
            other => {
                return Err(Error::Parse {
                    path: paths.signature.clone(),
                    line: *line,
                    message: format!("expected DOMAIN or RANGE, found `{other}`"),
                })
            }
        };
        slot.get_or_insert_with(Vec::new).push(class);
    }

    let hierarchy = match edges {
        None => None,
        Some(rows) => {
            let pairs: Vec<(ClassId, ClassId)> = rows
                .iter()
                .map(|(_, row)| (vocab.classes.intern(&row[0]), vocab.classes.intern(&row[1])))
                .collect();
            let root = paths.root.as_deref().map(|label| vocab.classes.intern(label));
            Some(
                ClassHierarchy::with_names(vocab.num_classes(), &pairs, root, |c| {
                    format!("`{}`", vocab.classes.label(c).unwrap_or("?"))
                })?,
            )
        }
    };

    if skipped_entities > 0 {
        log::info!("ignored {skipped_entities} type assertion(s) for entities outside the dataset");
    }
    if skipped_relations > 0 {
        log::info!("ignored {skipped_relations} signature line(s) for relations outside the dataset");
    }

    Schema::new(hierarchy, asserted, RelationSignature::new(domain, range))
}

/// Writes `types.txt`, `hierarchy.txt` (when present) and `signature.txt` into `dir`.
pub fn write_schema(schema: &Schema, vocab: &Vocabulary, dir: &Path) -> Result<SchemaPaths> {
    let n_classes = schema.hierarchy.as_ref().map_or(0, |h| h.num_classes());
    let mut used: Vec<ClassId> = (0..vocab.num_entities()).flat_map(|e| schema.types.asserted(e).to_vec()).collect();
    for r in 0..vocab.num_relations() {
        used.extend(schema.signature.domain(r).unwrap_or(&[]));
        used.extend(schema.signature.range(r).unwrap_or(&[]));
    }
    if let Some(c) = used.into_iter().chain(0..n_classes).find(|&c| vocab.classes.label(c).is_none()) {
        return Err(Error::Lookup(format!("class {c} has no label in the vocabulary")));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let class = |c: ClassId| vocab.classes.label(c).unwrap_or_default();

    let types_path = dir.join("types.txt");
    write_lines(&types_path, |out| {
        for e in 0..vocab.num_entities() {
            let label = vocab.entities.label(e).unwrap_or("?");
            for &c in schema.types.asserted(e) {
                writeln!(out, "{label}\t{}", class(c))?;
            }
        }
        Ok(())
    })?;

    let hierarchy_path = match &schema.hierarchy {
        None => None,
        Some(h) => {
            let p = dir.join("hierarchy.txt");
            write_lines(&p, |out| {
                for (sub, sup) in h.edges() {
                    writeln!(out, "{}\t{}", class(sub), class(sup))?;
                }
                Ok(())
            })?;
            Some(p)
        }
    };

    let signature_path = dir.join("signature.txt");
    write_lines(&signature_path, |out| {
        for r in 0..vocab.num_relations() {
            let label = vocab.relations.label(r).unwrap_or("?");
            for &c in schema.signature.domain(r).unwrap_or(&[]) {
                writeln!(out, "{label}\tDOMAIN\t{}", class(c))?;
            }
            for &c in schema.signature.range(r).unwrap_or(&[]) {
                writeln!(out, "{label}\tRANGE\t{}", class(c))?;
            }
        }
        Ok(())
    })?;

    Ok(SchemaPaths {
        types: types_path,
        hierarchy: hierarchy_path,
        signature: signature_path,
        root: schema
            .hierarchy
            .as_ref()
            .map(|h| class(h.root()).to_owned()),
    })
}

fn write_lines(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}
