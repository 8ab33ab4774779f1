//! Two-stage composition: inheritance is flattened per fragment, then
//! embeddings are bound per language.

mod bundle;
mod editor;
mod inherit;
mod language;
mod loader;

pub use bundle::{bundle_tools, BundleManifest, BundledLanguage, MANIFEST_VERSION};
pub use editor::{merge_editor_concepts, EffectiveEditorConfig};
pub use inherit::{check_fragment, resolve_inheritance};
pub use language::{
    bind_embeddings, compose, ComposedLanguage, ComposedProduction, ComposedToken, FragmentLexicon,
};
pub use loader::{FragmentLoader, GrammarPathLoader, LoadError, MemoryLoader};
