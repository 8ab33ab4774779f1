use std::fmt;

use serde::{Deserialize, Serialize};

/// A source region with 1-based lines and columns. Columns count Unicode
/// scalar values; the end column is exclusive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        Span { start_line, start_col, end_line, end_col }
    }

    pub fn start(&self) -> (u32, u32) {
        (self.start_line, self.start_col)
    }

    pub fn end(&self) -> (u32, u32) {
        (self.end_line, self.end_col)
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start() <= other.start() && other.end() <= self.end()
    }

    pub fn line_count(&self) -> u32 {
        self.end_line - self.start_line + 1
    }

    pub fn to_array(self) -> [u32; 4] {
        [self.start_line, self.start_col, self.end_line, self.end_col]
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}:{}", self.start_line, self.start_col, self.end_line, self.end_col)
    }
}

/// Maps byte offsets of one text to line/column positions.
#[derive(Clone, Debug)]
pub struct LineIndex {
    line_starts: Vec<usize>,
    len: usize,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { line_starts, len: text.len() }
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    /// 1-based (line, column) of a byte offset.
    pub fn position(&self, text: &str, offset: usize) -> (u32, u32) {
        let offset = offset.min(self.len);
        let line = match self.line_starts.binary_search(&offset) {
            Ok(l) => l,
            Err(l) => l - 1,
        };
        let col = text[self.line_starts[line]..offset].chars().count();
        (line as u32 + 1, col as u32 + 1)
    }

    pub fn span(&self, text: &str, start: usize, end: usize) -> Span {
        let (sl, sc) = self.position(text, start);
        let (el, ec) = self.position(text, end);
        Span::new(sl, sc, el, ec)
    }

    /// Byte offset of a 1-based (line, column); columns past the line end
    /// clamp to the end of that line.
    pub fn offset(&self, text: &str, line: u32, col: u32) -> usize {
        let line = (line.max(1) as usize - 1).min(self.line_starts.len() - 1);
        let start = self.line_starts[line];
        let end = self.line_end(text, line);
        text[start..end]
            .char_indices()
            .nth(col.max(1) as usize - 1)
            .map(|(i, _)| start + i)
            .unwrap_or(end)
    }

    /// Text of the 0-based line without its terminator.
    pub fn line_text<'t>(&self, text: &'t str, line0: usize) -> &'t str {
        let start = self.line_starts[line0];
        let end = self.line_end(text, line0);
        &text[start..end]
    }

    fn line_end(&self, text: &str, line0: usize) -> usize {
        let mut end = self.line_starts.get(line0 + 1).map(|s| s - 1).unwrap_or(self.len);
        if end > self.line_starts[line0] && text.as_bytes().get(end - 1) == Some(&b'\r') {
            end -= 1;
        }
        end
    }
}
