use super::{ParseError, ParseErrorCode, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Identifiers and numeric literals: `[A-Za-z0-9_.]+`.
    Word(String),
    Assign,
    DashDash,
    Arrow,
    BiArrow,
    Colon,
    Comma,
    Pipe,
    Slash,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Lt,
    Le,
    Ge,
    Gt,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Assign => "`=`".into(),
            Tok::DashDash => "`--`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::BiArrow => "`<->`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Gt => "`>`".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'.'
}

/// Tokenizes one line. `line_offset` is the byte offset of the line start.
pub(crate) fn lex_line(
    line: &str,
    line_no: usize,
    line_offset: usize,
) -> Result<Vec<Token>, ParseError> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'#' {
            break;
        }
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let span = |len: usize| SourceSpan {
            line: line_no,
            column: line[..i].chars().count() + 1,
            offset: line_offset + i,
            len,
        };
        if is_word_byte(b) {
            let start = i;
            while i < bytes.len() && is_word_byte(bytes[i]) {
                i += 1;
            }
            let sp = SourceSpan {
                line: line_no,
                column: line[..start].chars().count() + 1,
                offset: line_offset + start,
                len: i - start,
            };
            out.push(Token {
                tok: Tok::Word(line[start..i].to_string()),
                span: sp,
            });
            continue;
        }
        let rest = &line[i..];
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::BiArrow, 3)
        } else if rest.starts_with("<=") {
            (Tok::Le, 2)
        } else if rest.starts_with(">=") {
            (Tok::Ge, 2)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("--") {
            (Tok::DashDash, 2)
        } else {
            let t = match b {
                b'=' => Tok::Assign,
                b':' => Tok::Colon,
                b',' => Tok::Comma,
                b'|' => Tok::Pipe,
                b'/' => Tok::Slash,
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b'[' => Tok::LBracket,
                b']' => Tok::RBracket,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'<' => Tok::Lt,
                b'>' => Tok::Gt,
                _ => {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(ParseError {
                        span: span(ch.len_utf8()),
                        code: ParseErrorCode::InvalidChar,
                        message: format!("unexpected character {ch:?}"),
                    });
                }
            };
            (t, 1)
        };
        out.push(Token {
            tok,
            span: span(len),
        });
        i += len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_match_operators() {
        let toks: Vec<Tok> = lex_line("a <-> b <= c < d -> e -- f >= g > h", 1, 0)
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect();
        assert_eq!(toks[1], Tok::BiArrow);
        assert_eq!(toks[3], Tok::Le);
        assert_eq!(toks[5], Tok::Lt);
        assert_eq!(toks[7], Tok::Arrow);
        assert_eq!(toks[9], Tok::DashDash);
        assert_eq!(toks[11], Tok::Ge);
        assert_eq!(toks[13], Tok::Gt);
    }

    #[test]
    fn comments_and_spans() {
        let toks = lex_line("  node A   # boundary", 3, 100).unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[1].span.line, 3);
        assert_eq!(toks[1].span.column, 8);
        assert_eq!(toks[1].span.offset, 107);
    }

    #[test]
    fn invalid_char() {
        let err = lex_line("node A $", 1, 0).unwrap_err();
        assert_eq!(err.code, ParseErrorCode::InvalidChar);
        assert_eq!(err.span.column, 8);
    }
}
