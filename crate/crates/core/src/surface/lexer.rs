use num_bigint::BigUint;

use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Open,
    Close,
    /// Contents of a quoted literal, already checked to be binary.
    Bits(String),
    Numeral(BigUint),
    Symbol(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub token: Token,
    pub span: SourceSpan,
}

pub(crate) const OPERATORS: &[&str] = &["=", "<", "+", "*", "=>"];

pub(crate) const RESERVED: &[&str] = &[
    "and", "or", "not", "iff", "exists", "forall", "concat", "len", "numstr", "pi", "epsilon",
    "as", "Str", "Num",
];

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';')
}

pub(crate) fn is_identifier(word: &str) -> bool {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '.' | '-' | '!'))
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            ';' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' | ')' => {
                chars.next();
                out.push(Spanned {
                    token: if c == '(' { Token::Open } else { Token::Close },
                    span: SourceSpan::new(start, start + 1),
                });
            }
            '"' => {
                chars.next();
                let mut bits = String::new();
                let end = loop {
                    match chars.next() {
                        None => {
                            return Err(ParseError::new(
                                SourceSpan::new(start, text.len()),
                                "unterminated string literal",
                                vec!["\"".into()],
                            ))
                        }
                        Some((i, '"')) => break i + 1,
                        Some((_, b @ ('0' | '1'))) => bits.push(b),
                        Some((i, other)) => {
                            return Err(ParseError::new(
                                SourceSpan::new(i, i + other.len_utf8()),
                                format!("string literals may only contain 0 and 1, found {other:?}"),
                                vec!["0".into(), "1".into(), "\"".into()],
                            ))
                        }
                    }
                };
                out.push(Spanned {
                    token: Token::Bits(bits),
                    span: SourceSpan::new(start, end),
                });
            }
            _ => {
                let mut end = start;
                while let Some(&(i, c)) = chars.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    end = i + c.len_utf8();
                    chars.next();
                }
                let word = &text[start..end];
                let span = SourceSpan::new(start, end);
                let token = if word.bytes().all(|b| b.is_ascii_digit()) {
                    Token::Numeral(word.parse().expect("decimal digits"))
                } else if OPERATORS.contains(&word) || is_identifier(word) {
                    Token::Symbol(word.to_owned())
                } else {
                    return Err(ParseError::new(
                        span,
                        format!("invalid token {word:?}"),
                        vec!["identifier".into(), "numeral".into(), "string literal".into()],
                    ));
                };
                out.push(Spanned { token, span });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub(crate) enum Sexp {
    Leaf(Spanned),
    List(Vec<Sexp>, SourceSpan),
}

impl Sexp {
    pub fn span(&self) -> SourceSpan {
        match self {
            Sexp::Leaf(s) => s.span,
            Sexp::List(_, span) => *span,
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            Sexp::Leaf(Spanned {
                token: Token::Symbol(s),
                ..
            }) => Some(s),
            _ => None,
        }
    }

    /// Head symbol and arguments of a list whose first element is a symbol.
    pub fn application(&self) -> Option<(&str, &[Sexp])> {
        match self {
            Sexp::List(items, _) => {
                let (head, args) = items.split_first()?;
                Some((head.symbol()?, args))
            }
            Sexp::Leaf(_) => None,
        }
    }
}

/// Reads every top-level s-expression.
pub(crate) fn read_all(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let tokens = tokenize(text)?;
    let mut stack: Vec<(usize, Vec<Sexp>)> = Vec::new();
    let mut top = Vec::new();
    for tok in tokens {
        match tok.token {
            Token::Open => stack.push((tok.span.start, Vec::new())),
            Token::Close => {
                let (start, items) = stack.pop().ok_or_else(|| {
                    ParseError::new(tok.span, "unbalanced ')'", vec!["'('".into(), "end of input".into()])
                })?;
                let list = Sexp::List(items, SourceSpan::new(start, tok.span.end));
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(list),
                    None => top.push(list),
                }
            }
            _ => {
                let leaf = Sexp::Leaf(tok);
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(leaf),
                    None => top.push(leaf),
                }
            }
        }
    }
    if let Some((start, _)) = stack.last() {
        return Err(ParseError::new(
            SourceSpan::new(*start, text.len()),
            "unclosed '('",
            vec!["')'".into()],
        ));
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_spans() {
        let toks = tokenize("(numstr 3 \"11\") ; comment").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.token.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Token::Open,
                Token::Symbol("numstr".into()),
                Token::Numeral(3u32.into()),
                Token::Bits("11".into()),
                Token::Close
            ]
        );
        assert_eq!(toks[3].span, SourceSpan::new(10, 14));
    }

    #[test]
    fn bad_literal_points_at_character() {
        let err = tokenize("(= X \"012\")").unwrap_err();
        assert_eq!(err.span, SourceSpan::new(8, 9));
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("x"));
        assert!(is_identifier("s_h"));
        assert!(is_identifier("n!3"));
        assert!(is_identifier("x'"));
        assert!(!is_identifier("3x"));
        assert!(!is_identifier("!x"));
    }

    #[test]
    fn unbalanced_parens() {
        assert!(read_all("(and").is_err());
        assert!(read_all("and)").is_err());
        assert_eq!(read_all("(a (b)) c").unwrap().len(), 2);
    }
}
