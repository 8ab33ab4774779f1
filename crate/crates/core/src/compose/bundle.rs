use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::language::ComposedLanguage;
use crate::grammar::ToolConfig;
use crate::report::ProblemReport;

pub const MANIFEST_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub version: String,
    pub languages: Vec<BundledLanguage>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundledLanguage {
    pub name: String,
    /// Without the leading dot.
    pub extensions: Vec<String>,
    /// Qualified start production.
    pub start: String,
    pub fragments: Vec<String>,
    /// Tool-config path, so a manifest alone is enough to recompose.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
}

impl BundleManifest {
    pub fn language_for(&self, path: &Path) -> Option<&BundledLanguage> {
        let ext = path.extension()?.to_str()?;
        self.languages.iter().find(|l| l.extensions.iter().any(|e| e == ext))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<BundleManifest, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn normalize_ext(e: &str) -> String {
    e.trim_start_matches('.').to_string()
}

/// Lists every language of one deployable bundle. File extensions must be
/// disjoint across languages.
pub fn bundle_tools(
    tools: &[(&ToolConfig, &ComposedLanguage, Vec<String>)],
) -> Result<BundleManifest, Vec<ProblemReport>> {
    let mut errors = Vec::new();
    if tools.is_empty() {
        errors.push(ProblemReport::error("a bundle needs at least one language", "", 1, 1, "bundle"));
    }
    let mut owner: BTreeMap<String, &str> = BTreeMap::new();
    let mut languages = Vec::new();
    for (cfg, lang, exts) in tools {
        let extensions: Vec<String> = exts.iter().map(|e| normalize_ext(e)).collect();
        for e in &extensions {
            if let Some(prev) = owner.insert(e.clone(), &lang.name) {
                errors.push(ProblemReport::error(
                    format!("extension .{e} is claimed by both {prev} and {}", lang.name),
                    &cfg.origin,
                    cfg.start.loc.line,
                    cfg.start.loc.col,
                    "bundle",
                ));
            }
        }
        let config = (!cfg.origin.as_os_str().is_empty()).then(|| cfg.origin.to_string_lossy().into_owned());
        languages.push(BundledLanguage {
            name: lang.name.clone(),
            extensions,
            start: lang.start_symbol.clone(),
            fragments: lang.source_fragments.clone(),
            config,
        });
    }
    if errors.is_empty() {
        Ok(BundleManifest { version: MANIFEST_VERSION.into(), languages })
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::{ComposedLanguage, MemoryLoader};
    use crate::grammar::parse_grammar;

    fn lang(src: &str, start: &str) -> (ToolConfig, ComposedLanguage) {
        let f = parse_grammar(src, "g.mc").unwrap();
        let l = ComposedLanguage::standalone(&f, start, &MemoryLoader::new()).unwrap();
        let mut cfg = crate::grammar::parse_tool_config(
            &format!("rootfactory F for T {{ {}.{} s <<start>>; }}", f.name, start),
            format!("{}.mctool", f.name),
        )
        .unwrap();
        cfg.origin = format!("{}.mctool", f.name).into();
        (cfg, l)
    }

    #[test]
    fn single_and_double_bundles() {
        let (c1, l1) = lang("grammar MSC { M = \"msc\" n:IDENT; }", "M");
        let (c2, l2) = lang("grammar Statechart { S = \"sc\" n:IDENT; }", "S");
        let one = bundle_tools(&[(&c1, &l1, vec![".msc".into()])]).unwrap();
        assert_eq!(one.languages.len(), 1);
        assert_eq!(one.languages[0].extensions, vec!["msc"]);
        let two = bundle_tools(&[(&c1, &l1, vec!["msc".into()]), (&c2, &l2, vec!["sc".into()])]).unwrap();
        assert_eq!(two.languages.len(), 2);
        assert_eq!(two.language_for(Path::new("a/b.sc")).unwrap().name, "Statechart");
        assert_eq!(BundleManifest::from_json(&two.to_json()).unwrap(), two);
    }

    #[test]
    fn extension_conflict() {
        let (c1, l1) = lang("grammar MSC { M = \"msc\" n:IDENT; }", "M");
        let (c2, l2) = lang("grammar Other { S = \"o\"; }", "S");
        let err = bundle_tools(&[(&c1, &l1, vec!["msc".into()]), (&c2, &l2, vec!["msc".into()])]).unwrap_err();
        assert_eq!(err.len(), 1);
        assert!(err[0].message.contains(".msc"));
        assert!(bundle_tools(&[]).is_err());
    }
}
