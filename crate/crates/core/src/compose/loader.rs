use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::grammar::{parse_grammar, GrammarFragment, QualifiedName};
use crate::report::ProblemReport;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("unknown grammar {0}")]
    NotFound(QualifiedName),
    #[error("grammar {name} could not be loaded")]
    Invalid { name: QualifiedName, reports: Vec<ProblemReport> },
}

/// Looks grammar fragments up by qualified name. Implementations must be
/// callable re-entrantly: composition loads supergrammars while loading.
pub trait FragmentLoader {
    fn load(&self, name: &QualifiedName) -> Result<GrammarFragment, LoadError>;
}

impl<L: FragmentLoader + ?Sized> FragmentLoader for &L {
    fn load(&self, name: &QualifiedName) -> Result<GrammarFragment, LoadError> {
        (**self).load(name)
    }
}

/// In-memory fragments. Lookups fall back to the simple name when it is
/// unambiguous, so `a.b.G` finds a fragment named `G` without a package.
#[derive(Clone, Debug, Default)]
pub struct MemoryLoader {
    fragments: BTreeMap<QualifiedName, GrammarFragment>,
}

impl MemoryLoader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, fragment: GrammarFragment) -> Self {
        self.insert(fragment);
        self
    }

    pub fn insert(&mut self, fragment: GrammarFragment) {
        self.fragments.insert(fragment.qualified_name(), fragment);
    }

    /// Parses and inserts; panics on parse errors (test and fixture helper).
    pub fn with_source(self, text: &str) -> Self {
        let f = parse_grammar(text, "<memory>").unwrap_or_else(|e| panic!("bad fixture: {e:?}"));
        self.with(f)
    }
}

impl FragmentLoader for MemoryLoader {
    fn load(&self, name: &QualifiedName) -> Result<GrammarFragment, LoadError> {
        if let Some(f) = self.fragments.get(name) {
            return Ok(f.clone());
        }
        let mut by_simple = self.fragments.values().filter(|f| f.name == name.simple());
        match (by_simple.next(), by_simple.next()) {
            (Some(f), None) => Ok(f.clone()),
            _ => Err(LoadError::NotFound(name.clone())),
        }
    }
}

/// Resolves `pkg.path.Grammar` to `<root>/pkg/path/Grammar.mc`, trying each
/// root in order.
#[derive(Clone, Debug, Default)]
pub struct GrammarPathLoader {
    roots: Vec<PathBuf>,
}

impl GrammarPathLoader {
    pub fn new(roots: impl IntoIterator<Item = PathBuf>) -> Self {
        GrammarPathLoader { roots: roots.into_iter().collect() }
    }

    pub fn roots(&self) -> &[PathBuf] {
        &self.roots
    }

    /// Reads one grammar file; the package comes from its location below
    /// the first root that contains it.
    pub fn load_file(&self, path: &Path) -> Result<GrammarFragment, LoadError> {
        let name = QualifiedName(vec![path.file_stem().unwrap_or_default().to_string_lossy().into()]);
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Invalid {
            name: name.clone(),
            reports: vec![ProblemReport::error(format!("cannot read file: {e}"), path, 1, 1, "loader")],
        })?;
        let mut f = parse_grammar(&text, path).map_err(|reports| LoadError::Invalid { name, reports })?;
        f.package = self.package_of(path);
        Ok(f)
    }

    fn package_of(&self, path: &Path) -> Vec<String> {
        let abs = |p: &Path| std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
        let file = abs(path);
        for root in &self.roots {
            if let Ok(rel) = file.strip_prefix(abs(root)) {
                if let Some(parent) = rel.parent() {
                    return parent.iter().map(|c| c.to_string_lossy().into_owned()).collect();
                }
            }
        }
        Vec::new()
    }
}

impl FragmentLoader for GrammarPathLoader {
    fn load(&self, name: &QualifiedName) -> Result<GrammarFragment, LoadError> {
        for root in &self.roots {
            let mut path = root.clone();
            for part in name.qualifier() {
                path.push(part);
            }
            path.push(format!("{}.mc", name.simple()));
            if path.is_file() {
                let mut f = self.load_file(&path)?;
                f.package = name.qualifier().to_vec();
                if f.name != name.simple() {
                    let reports = vec![ProblemReport::error(
                        format!("file declares grammar {}, expected {}", f.name, name.simple()),
                        &path,
                        f.loc.line,
                        f.loc.col,
                        "loader",
                    )];
                    return Err(LoadError::Invalid { name: name.clone(), reports });
                }
                return Ok(f);
            }
        }
        Err(LoadError::NotFound(name.clone()))
    }
}
