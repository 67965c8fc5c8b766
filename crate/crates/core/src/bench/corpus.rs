use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lang::ast::Visibility;
use crate::lang::{compile, enumerate_branch_goals, CheckedProgram, MethodId};

use super::BenchError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Pattern {
    StateInit,
    IndirectCallee,
    PublicField,
    StaticUtil,
    Plain,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::StateInit => "STATE_INIT",
            Pattern::IndirectCallee => "INDIRECT_CALLEE",
            Pattern::PublicField => "PUBLIC_FIELD",
            Pattern::StaticUtil => "STATIC_UTIL",
            Pattern::Plain => "PLAIN",
        })
    }
}

#[derive(Debug, Deserialize)]
struct Manifest {
    #[serde(default)]
    entry: Vec<ManifestEntry>,
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    file: String,
    pattern: Pattern,
    /// Classes whose public methods are targets; all classes if omitted.
    #[serde(default)]
    classes: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub class: String,
    pub method: String,
    pub id: MethodId,
    pub branches: usize,
}

/// One source file of the corpus with its typechecked program and targets.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub path: PathBuf,
    /// File name used in reports.
    pub name: String,
    pub pattern: Pattern,
    pub program: Arc<CheckedProgram>,
    pub targets: Vec<Target>,
}

impl CorpusEntry {
    /// Compiles `source`; targets are the public methods of `classes` (all
    /// classes when `None`).
    pub fn from_source(
        path: impl Into<PathBuf>,
        source: &str,
        pattern: Pattern,
        classes: Option<&[String]>,
    ) -> Result<Self, BenchError> {
        let path = path.into();
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let program = compile(source).map_err(|diags| BenchError::Diagnostics {
            rendered: diags.iter().map(|d| d.render(&name)).collect(),
        })?;
        let mut targets = Vec::new();
        let wanted: Vec<String> = match classes {
            Some(c) => c.to_vec(),
            None => program.classes.iter().map(|c| c.name.clone()).collect(),
        };
        for class in &wanted {
            let cid = program
                .class_id(class)
                .ok_or_else(|| BenchError::UnknownTarget(format!("{name}: unknown class {class}")))?;
            targets.extend(target_methods(&program, cid).map(|id| Target {
                class: class.clone(),
                method: program.method(id).name.clone(),
                branches: enumerate_branch_goals(&program, id).len(),
                id,
            }));
        }
        Ok(CorpusEntry {
            path,
            name,
            pattern,
            program: Arc::new(program),
            targets,
        })
    }

    pub fn load(path: &Path, pattern: Pattern, classes: Option<&[String]>) -> Result<Self, BenchError> {
        let source = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_source(path, &source, pattern, classes)
    }

    pub fn target(&self, class: &str, method: &str) -> Option<&Target> {
        self.targets
            .iter()
            .find(|t| t.class == class && t.method == method)
    }
}

/// Public, non-constructor methods of a class, in declaration order.
pub fn target_methods(
    program: &CheckedProgram,
    class: crate::lang::ClassId,
) -> impl Iterator<Item = MethodId> + '_ {
    program.method_ids(class).filter(|m| {
        let info = program.method(*m);
        !info.is_ctor && info.visibility == Visibility::Public
    })
}

/// Loads a corpus directory. With a `manifest.toml` the listed files are
/// loaded in manifest order; otherwise every `.moo` file, sorted by name,
/// as a PLAIN entry.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, BenchError> {
    let manifest_path = dir.join("manifest.toml");
    if manifest_path.exists() {
        let text = std::fs::read_to_string(&manifest_path)
            .map_err(|e| BenchError::io(&manifest_path, e))?;
        let manifest: Manifest = toml::from_str(&text).map_err(|e| BenchError::Manifest {
            path: manifest_path.clone(),
            message: e.to_string(),
        })?;
        return manifest
            .entry
            .iter()
            .map(|e| CorpusEntry::load(&dir.join(&e.file), e.pattern, e.classes.as_deref()))
            .collect();
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| BenchError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "moo"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| CorpusEntry::load(p, Pattern::Plain, None))
        .collect()
}
