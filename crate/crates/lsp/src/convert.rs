//! Positions, ranges and URIs between the core's 1-based character
//! columns and the protocol's 0-based UTF-16 offsets.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use fragmentc_core::{LineIndex, Span};
use lsp_types::{Position, Range, Uri};

/// A document's text with its line index.
pub struct Text<'t> {
    pub text: &'t str,
    index: LineIndex,
}

impl<'t> Text<'t> {
    pub fn new(text: &'t str) -> Self {
        Text { text, index: LineIndex::new(text) }
    }

    pub fn line_count(&self) -> usize {
        self.index.line_count()
    }

    pub fn line(&self, line0: usize) -> &'t str {
        self.index.line_text(self.text, line0)
    }

    /// 1-based (line, char column) to a protocol position.
    pub fn position(&self, line: u32, col: u32) -> Position {
        let line0 = (line.max(1) as usize - 1).min(self.line_count() - 1);
        let units = self.line(line0).chars().take(col.max(1) as usize - 1).map(char::len_utf16).sum::<usize>();
        Position::new(line0 as u32, units as u32)
    }

    pub fn range(&self, span: Span) -> Range {
        Range::new(self.position(span.start_line, span.start_col), self.position(span.end_line, span.end_col))
    }

    /// Protocol position to 1-based (line, char column); offsets inside a
    /// surrogate pair round down.
    pub fn line_col(&self, pos: Position) -> (u32, u32) {
        let line0 = (pos.line as usize).min(self.line_count() - 1);
        let mut units = 0;
        let mut col = 1;
        for c in self.line(line0).chars() {
            units += c.len_utf16();
            if units > pos.character as usize {
                break;
            }
            col += 1;
        }
        (line0 as u32 + 1, col)
    }

    pub fn span(&self, range: Range) -> Span {
        let (sl, sc) = self.line_col(range.start);
        let (el, ec) = self.line_col(range.end);
        Span::new(sl, sc, el, ec)
    }

    pub fn full_range(&self) -> Range {
        let last = self.line_count() - 1;
        let units = self.line(last).encode_utf16().count();
        Range::new(Position::new(0, 0), Position::new(last as u32, units as u32))
    }
}

pub fn uri_to_path(uri: &Uri) -> PathBuf {
    url::Url::parse(uri.as_str())
        .ok()
        .and_then(|u| u.to_file_path().ok())
        .unwrap_or_else(|| PathBuf::from(uri.as_str()))
}

pub fn path_to_uri(path: &Path) -> Option<Uri> {
    let url = url::Url::from_file_path(path).ok()?;
    Uri::from_str(url.as_str()).ok()
}
