//! The textual model format.
//!
//! Line oriented, `#` starts a comment, whitespace is insignificant within a
//! line. See `docs/FORMAT.md` at the repository root for the grammar and the
//! list of error codes.

mod lexer;
mod parser;
mod render;

use std::fmt;

pub use parser::parse_system;
pub use render::render_system;

/// Position of a token: 1-based line and column, 0-based byte offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub len: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParseErrorCode {
    InvalidChar,
    UnexpectedToken,
    UnexpectedEnd,
    UnknownKeyword,
    InvalidNumber,
    DuplicateId,
    DuplicateDuration,
    UnknownReference,
    SegSelfLoop,
}

impl ParseErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorCode::InvalidChar => "INVALID_CHAR",
            ParseErrorCode::UnexpectedToken => "UNEXPECTED_TOKEN",
            ParseErrorCode::UnexpectedEnd => "UNEXPECTED_END",
            ParseErrorCode::UnknownKeyword => "UNKNOWN_KEYWORD",
            ParseErrorCode::InvalidNumber => "INVALID_NUMBER",
            ParseErrorCode::DuplicateId => "DUPLICATE_ID",
            ParseErrorCode::DuplicateDuration => "DUPLICATE_DURATION",
            ParseErrorCode::UnknownReference => "UNKNOWN_REFERENCE",
            ParseErrorCode::SegSelfLoop => "SEG_SELF_LOOP",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub code: ParseErrorCode,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.span.line,
            self.span.column,
            self.code.as_str(),
            self.message
        )
    }
}

impl std::error::Error for ParseError {}
