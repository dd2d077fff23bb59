//! Tokens shared by the `.hyrql` and `.trs` readers.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Ket0,
    Ket1,
    KetPlus,
    KetMinus,
    Backslash,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Arrow,
    DoubleColon,
    Colon,
    Semi,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Pipe,
    Lolli,
    FatArrow,
    Biarrow,
    At,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) | Tok::Number(s) => return write!(f, "`{s}`"),
            Tok::Ket0 => "|0>",
            Tok::Ket1 => "|1>",
            Tok::KetPlus => "|+>",
            Tok::KetMinus => "|->",
            Tok::Backslash => "\\",
            Tok::Dot => ".",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Arrow => "->",
            Tok::DoubleColon => "::",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Pipe => "|",
            Tok::Lolli => "-o",
            Tok::FatArrow => "=>",
            Tok::Biarrow => "<->",
            Tok::At => "@",
            Tok::Eof => "end of input",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Splits `src` into tokens. `#` starts a comment running to end of line.
pub fn lex(src: &str) -> Result<Vec<Token>, (Pos, String)> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, len) = if rest.starts_with("|0>") {
            (Tok::Ket0, 3)
        } else if rest.starts_with("|1>") {
            (Tok::Ket1, 3)
        } else if rest.starts_with("|+>") {
            (Tok::KetPlus, 3)
        } else if rest.starts_with("|->") {
            (Tok::KetMinus, 3)
        } else if rest.starts_with("<->") {
            (Tok::Biarrow, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("-o") && !chars.get(i + 2).is_some_and(|c| ident_char(*c)) {
            (Tok::Lolli, 2)
        } else if rest.starts_with("=>") {
            (Tok::FatArrow, 2)
        } else if rest.starts_with("::") {
            (Tok::DoubleColon, 2)
        } else if rest.starts_with("[]") {
            (Tok::Ident("[]".into()), 2)
        } else if rest.starts_with("()") {
            (Tok::Ident("()".into()), 2)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[i..j].iter().collect();
            if chars.get(j) == Some(&'~') {
                (Tok::Ident(format!("{digits}~")), j - i + 1)
            } else {
                (Tok::Number(digits), j - i)
            }
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && ident_char(chars[j]) {
                j += 1;
            }
            if chars.get(j) == Some(&'~') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else {
            let t = match c {
                '\\' | 'λ' => Tok::Backslash,
                '.' => Tok::Dot,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '|' => Tok::Pipe,
                '@' => Tok::At,
                _ => return Err((pos, format!("unexpected character `{c}`"))),
            };
            (t, 1)
        };
        out.push(Token { tok, pos });
        advance(len, &mut i, &mut col);
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn kets_and_arrows() {
        assert_eq!(
            toks("|0> -o |1> <-> x"),
            vec![
                Tok::Ket0,
                Tok::Lolli,
                Tok::Ket1,
                Tok::Biarrow,
                Tok::Ident("x".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn shadow_names_and_comments() {
        assert_eq!(
            toks("S~(0~) # note\n[]"),
            vec![
                Tok::Ident("S~".into()),
                Tok::LParen,
                Tok::Ident("0~".into()),
                Tok::RParen,
                Tok::Ident("[]".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn identifier_starting_with_o() {
        assert_eq!(
            toks("-out"),
            vec![Tok::Minus, Tok::Ident("out".into()), Tok::Eof]
        );
    }
}
