//! Semantic tokens: keyword and comment highlights, split per line and
//! delta-encoded.

use fragmentc_core::services::{HighlightCategory, HighlightSpan};
use lsp_types::{SemanticToken, SemanticTokenType, SemanticTokensLegend};

use crate::convert::Text;

pub fn legend() -> SemanticTokensLegend {
    SemanticTokensLegend {
        token_types: vec![SemanticTokenType::KEYWORD, SemanticTokenType::COMMENT],
        token_modifiers: Vec::new(),
    }
}

fn type_index(c: HighlightCategory) -> u32 {
    match c {
        HighlightCategory::Keyword => 0,
        HighlightCategory::Comment => 1,
    }
}

pub fn encode(highlights: &[HighlightSpan], text: &Text<'_>) -> Vec<SemanticToken> {
    // (line0, start, length, type) in absolute UTF-16 units.
    let mut absolute = Vec::new();
    for h in highlights {
        let s = h.span;
        for line in s.start_line..=s.end_line {
            let start = if line == s.start_line { s.start_col } else { 1 };
            let end = if line == s.end_line {
                s.end_col
            } else {
                text.line(line as usize - 1).chars().count() as u32 + 1
            };
            let (a, b) = (text.position(line, start), text.position(line, end));
            if b.character > a.character {
                absolute.push((a.line, a.character, b.character - a.character, type_index(h.category)));
            }
        }
    }
    absolute.sort();
    let (mut prev_line, mut prev_start) = (0, 0);
    absolute
        .into_iter()
        .map(|(line, start, length, token_type)| {
            let delta_line = line - prev_line;
            let delta_start = if delta_line == 0 { start - prev_start } else { start };
            (prev_line, prev_start) = (line, start);
            SemanticToken { delta_line, delta_start, length, token_type, token_modifiers_bitset: 0 }
        })
        .collect()
}
