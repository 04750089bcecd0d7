use std::fmt;

use super::ast::Span;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Number(f64),
    Ident(String),
    State,
    Tick,
    Let,
    If,
    Else,
    While,
    Drive,
    True,
    False,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Number(n) => return write!(f, "number `{n}`"),
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::State => "`state`",
            Tok::Tick => "`tick`",
            Tok::Let => "`let`",
            Tok::If => "`if`",
            Tok::Else => "`else`",
            Tok::While => "`while`",
            Tok::Drive => "`drive`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::LBrace => "'{'",
            Tok::RBrace => "'}'",
            Tok::LParen => "'('",
            Tok::RParen => "')'",
            Tok::Semi => "';'",
            Tok::Comma => "','",
            Tok::Assign => "'='",
            Tok::Plus => "'+'",
            Tok::Minus => "'-'",
            Tok::Star => "'*'",
            Tok::Slash => "'/'",
            Tok::Percent => "'%'",
            Tok::Lt => "'<'",
            Tok::Le => "'<='",
            Tok::Gt => "'>'",
            Tok::Ge => "'>='",
            Tok::EqEq => "'=='",
            Tok::Ne => "'!='",
            Tok::AndAnd => "'&&'",
            Tok::OrOr => "'||'",
            Tok::Bang => "'!'",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, c)) = next {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        next
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }
}

/// Splits source into tokens. Lexical errors are collected; the offending
/// character is skipped so parsing can still report later problems.
pub fn tokenize(src: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut cur = Cursor {
        chars: src.char_indices().peekable(),
        src,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let span = Span::new(cur.line, cur.col);
        let Some((start, c)) = cur.bump() else {
            tokens.push(Token { tok: Tok::Eof, span });
            return (tokens, errors);
        };
        let two = |cur: &mut Cursor<'_>, next: char, yes: Tok, no: Tok| {
            if cur.peek() == Some(next) {
                cur.bump();
                yes
            } else {
                no
            }
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '%' => Tok::Percent,
            '<' => two(&mut cur, '=', Tok::Le, Tok::Lt),
            '>' => two(&mut cur, '=', Tok::Ge, Tok::Gt),
            '=' => two(&mut cur, '=', Tok::EqEq, Tok::Assign),
            '!' => two(&mut cur, '=', Tok::Ne, Tok::Bang),
            '&' | '|' => {
                if cur.peek() == Some(c) {
                    cur.bump();
                    if c == '&' {
                        Tok::AndAnd
                    } else {
                        Tok::OrOr
                    }
                } else {
                    errors.push(ParseError::at(span, format!("unexpected character '{c}', did you mean '{c}{c}'?")));
                    continue;
                }
            }
            c if c.is_ascii_digit() => {
                while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    cur.bump();
                }
                if cur.peek() == Some('.') {
                    cur.bump();
                    if !cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                        errors.push(ParseError::at(span, "expected digits after '.'"));
                    }
                    while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                        cur.bump();
                    }
                }
                if matches!(cur.peek(), Some('e' | 'E')) {
                    cur.bump();
                    if matches!(cur.peek(), Some('+' | '-')) {
                        cur.bump();
                    }
                    if !cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                        errors.push(ParseError::at(span, "expected exponent digits"));
                    }
                    while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                        cur.bump();
                    }
                }
                let end = cur.offset();
                match src[start..end].parse::<f64>() {
                    Ok(v) if v.is_finite() => Tok::Number(v),
                    _ => {
                        errors.push(ParseError::at(span, format!("number `{}` is out of range", &src[start..end])));
                        Tok::Number(0.0)
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while cur.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    cur.bump();
                }
                let end = cur.offset();
                match &src[start..end] {
                    "state" => Tok::State,
                    "tick" => Tok::Tick,
                    "let" => Tok::Let,
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    "while" => Tok::While,
                    "drive" => Tok::Drive,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    word => Tok::Ident(word.to_string()),
                }
            }
            other => {
                errors.push(ParseError::at(span, format!("unexpected character '{other}'")));
                continue;
            }
        };
        tokens.push(Token { tok, span });
    }
}
