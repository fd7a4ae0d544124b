use std::fmt;

use super::ast::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// `#keyword`
    Directive(String),
    /// `:keyword` written without a space
    Option(String),
    /// `$keyword`
    Dollar(String),
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Assign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    And,
    Or,
    Not,
    Implies,
    Forall,
    Exists,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Directive(s) => write!(f, "#{s}"),
            Tok::Option(s) => write!(f, ":{s}"),
            Tok::Dollar(s) => write!(f, "${s}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Assign => f.write_str("`:=`"),
            Tok::Eq => f.write_str("`==`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Not => f.write_str("`!`"),
            Tok::Implies => f.write_str("`->`"),
            Tok::Forall => f.write_str("`forall`"),
            Tok::Exists => f.write_str("`exists`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Split source text into tokens. Unicode logical symbols are accepted as
/// aliases for their ASCII spellings.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    // Identifier-like run; `-` is kept when a letter follows so names such
    // as `load-truck` stay whole while `e-1` splits.
    let word_end = |start: usize| -> usize {
        let mut j = start;
        while j < chars.len() {
            let c = chars[j];
            if ident_continue(c) {
                j += 1;
            } else if c == '-' && j + 1 < chars.len() && chars[j + 1].is_alphabetic() {
                j += 1;
            } else {
                break;
            }
        }
        j
    };

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let push = |out: &mut Vec<Token>, tok: Tok| out.push(Token { tok, span });
        match c {
            '#' | '$' | ':' if chars.get(i + 1).is_some_and(|&n| ident_start(n)) => {
                let end = word_end(i + 1);
                let word: String = chars[i + 1..end].iter().collect();
                while i < end {
                    bump!();
                }
                let tok = match c {
                    '#' => Tok::Directive(word),
                    '$' => Tok::Dollar(word),
                    _ => Tok::Option(word),
                };
                push(&mut out, tok);
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    if i >= chars.len() {
                        return Err(LexError {
                            span,
                            message: "unterminated string".into(),
                        });
                    }
                    if chars[i] == '"' {
                        bump!();
                        break;
                    }
                    s.push(chars[i]);
                    bump!();
                }
                push(&mut out, Tok::Str(s));
            }
            _ if c.is_ascii_digit() => {
                let mut s = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    bump!();
                }
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    s.push('.');
                    bump!();
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        s.push(chars[i]);
                        bump!();
                    }
                }
                push(&mut out, Tok::Number(s));
            }
            _ if ident_start(c) => {
                let end = word_end(i);
                let word: String = chars[i..end].iter().collect();
                while i < end {
                    bump!();
                }
                let tok = match word.as_str() {
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    _ => Tok::Ident(word),
                };
                push(&mut out, tok);
            }
            _ => {
                let next = chars.get(i + 1).copied();
                let (tok, len) = match (c, next) {
                    (':', Some('=')) => (Tok::Assign, 2),
                    ('=', Some('=')) => (Tok::Eq, 2),
                    ('!', Some('=')) => (Tok::Ne, 2),
                    ('<', Some('=')) => (Tok::Le, 2),
                    ('>', Some('=')) => (Tok::Ge, 2),
                    ('-', Some('>')) => (Tok::Implies, 2),
                    ('(', _) => (Tok::LParen, 1),
                    (')', _) => (Tok::RParen, 1),
                    ('[', _) => (Tok::LBracket, 1),
                    (']', _) => (Tok::RBracket, 1),
                    (',', _) => (Tok::Comma, 1),
                    (':', _) => (Tok::Colon, 1),
                    (';', _) => (Tok::Semi, 1),
                    ('<', _) => (Tok::Lt, 1),
                    ('>', _) => (Tok::Gt, 1),
                    ('+', _) => (Tok::Plus, 1),
                    ('-', _) => (Tok::Minus, 1),
                    ('*', _) => (Tok::Star, 1),
                    ('/', _) => (Tok::Slash, 1),
                    ('&', _) | ('∧', _) => (Tok::And, 1),
                    ('|', _) | ('∨', _) => (Tok::Or, 1),
                    ('!', _) | ('¬', _) => (Tok::Not, 1),
                    ('→', _) => (Tok::Implies, 1),
                    ('∀', _) => (Tok::Forall, 1),
                    ('∃', _) => (Tok::Exists, 1),
                    ('≐', _) | ('=', _) => (Tok::Eq, 1),
                    ('≠', _) => (Tok::Ne, 1),
                    ('≤', _) => (Tok::Le, 1),
                    ('≥', _) => (Tok::Ge, 1),
                    _ => {
                        return Err(LexError {
                            span,
                            message: format!("unexpected character `{c}`"),
                        })
                    }
                };
                for _ in 0..len {
                    bump!();
                }
                push(&mut out, tok);
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn hyphenated_names_and_offsets() {
        assert_eq!(
            toks("load-truck e-1 t+180"),
            vec![
                Tok::Ident("load-truck".into()),
                Tok::Ident("e".into()),
                Tok::Minus,
                Tok::Number("1".into()),
                Tok::Ident("t".into()),
                Tok::Plus,
                Tok::Number("180".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(
            toks("¬ ∧ ∨ → ∀ ∃ ≐ ≠"),
            toks("! & | -> forall exists == !=")
        );
    }

    #[test]
    fn directives_options_and_comments() {
        assert_eq!(
            toks("#control :name \"x\" // trailing\n$borrowed-nonex loc'"),
            vec![
                Tok::Directive("control".into()),
                Tok::Option("name".into()),
                Tok::Str("x".into()),
                Tok::Dollar("borrowed-nonex".into()),
                Tok::Ident("loc'".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn spans_track_lines() {
        let t = tokenize("#obs\n  [0]").unwrap();
        assert_eq!(t[1].span, Span { line: 2, col: 3 });
    }
}
