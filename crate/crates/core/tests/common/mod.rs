#![allow(dead_code)]

pub mod cfg;
pub mod msc_gen;


use std::path::PathBuf;

use fragmentc_core::compose::{compose, ComposedLanguage, GrammarPathLoader};
use fragmentc_core::engine::{build_engine, ParserHandle};
use fragmentc_core::grammar::{parse_tool_config, ToolConfig};

pub fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(corpus().join(rel)).unwrap()
}

pub fn loader() -> GrammarPathLoader {
    GrammarPathLoader::new([corpus()])
}

pub fn msc_tool() -> ToolConfig {
    parse_tool_config(&read("msc.mctool"), corpus().join("msc.mctool")).unwrap()
}

pub fn msc_language() -> ComposedLanguage {
    compose(&msc_tool(), &loader()).unwrap()
}

pub fn msc_engine() -> ParserHandle {
    build_engine(&msc_language()).unwrap()
}

pub fn msc_service() -> fragmentc_core::services::LanguageService {
    fragmentc_core::services::LanguageService::new(msc_language(), &fragmentc_core::services::Extensions::demo())
        .unwrap()
}
