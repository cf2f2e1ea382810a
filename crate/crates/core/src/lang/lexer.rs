use crate::error::{Error, Result};

/// First line marking machine-generated source; enables `#` in identifiers.
pub const GENERATED_PRAGMA: &str = "-- skelc: generated";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    ConId(String),
    Int(i64),
    Data,
    Let,
    In,
    Where,
    Eq,
    DefEq,
    Sig,
    End,
    Semi,
    Bar,
    Backslash,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Plus,
    Star,
    Append,
    Arrow,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>> {
    let generated = src.lines().next().map(str::trim) == Some(GENERATED_PRAGMA);
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| Error::Parse { line, col, msg };

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| step(&chars, i, &mut line, &mut col, n);
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let start = i;
        let ident_char = |ch: char| ch.is_alphanumeric() || ch == '_' || ch == '\'' || (generated && ch == '#');
        let tok = if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && ident_char(chars[j]) {
                j += 1;
            }
            if j < chars.len() && chars[j] == '#' {
                return Err(err(tl, tc + (j - i), "`#` is reserved for generated names".into()));
            }
            let word: String = chars[start..j].iter().collect();
            advance(j - i, &mut i);
            match word.as_str() {
                "data" => Tok::Data,
                "let" => Tok::Let,
                "in" => Tok::In,
                "where" => Tok::Where,
                _ if c.is_uppercase() => Tok::ConId(word),
                _ => Tok::Ident(word),
            }
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[start..j].iter().collect();
            let n = text.parse::<i64>().map_err(|e| err(tl, tc, format!("bad integer literal `{text}`: {e}")))?;
            advance(j - i, &mut i);
            Tok::Int(n)
        } else {
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let (tok, len) = if rest.starts_with("::=") {
                (Tok::DefEq, 3)
            } else if rest.starts_with("::") {
                (Tok::Sig, 2)
            } else if rest.starts_with(";;") {
                (Tok::End, 2)
            } else if rest.starts_with("++") {
                (Tok::Append, 2)
            } else if rest.starts_with("->") {
                (Tok::Arrow, 2)
            } else {
                let t = match c {
                    '=' => Tok::Eq,
                    ';' => Tok::Semi,
                    '|' => Tok::Bar,
                    '\\' => Tok::Backslash,
                    '.' => Tok::Dot,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    _ => return Err(err(tl, tc, format!("unexpected character `{c}`"))),
                };
                (t, 1)
            };
            advance(len, &mut i);
            tok
        };
        toks.push(Token { tok, line: tl, col: tc });
    }
    toks.push(Token { tok: Tok::Eof, line, col });
    Ok(toks)
}

fn step(chars: &[char], i: &mut usize, line: &mut usize, col: &mut usize, n: usize) {
    for _ in 0..n {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_operators_and_comments() {
        assert_eq!(
            kinds("f x' = x ++ [] -- trailing\n;;"),
            vec![
                Tok::Ident("f".into()),
                Tok::Ident("x'".into()),
                Tok::Eq,
                Tok::Ident("x".into()),
                Tok::Append,
                Tok::LBracket,
                Tok::RBracket,
                Tok::End,
                Tok::Eof
            ]
        );
        assert_eq!(kinds("data T ::= A;;")[2], Tok::DefEq);
        assert_eq!(kinds("-3")[0], Tok::Int(-3));
    }

    #[test]
    fn hash_only_in_generated_files() {
        assert!(lex("f x#1 = x#1;;").is_err());
        let src = format!("{GENERATED_PRAGMA}\nf x#1 = x#1;;");
        assert_eq!(kinds(&src)[1], Tok::Ident("x#1".into()));
    }
}
