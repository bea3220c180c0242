//! Tokenizer and s-expression reader. Comments (`;` to end of line) are
//! dropped here. The reader is iterative and depth-bounded so adversarial
//! input cannot exhaust the stack.

use super::ast::Span;
use super::diagnostic::PddlDiagnostic;

pub const MAX_DEPTH: usize = 128;

#[derive(Clone, Debug)]
pub enum Sexp {
    Symbol(String, Span),
    List(Vec<Sexp>, Span),
}

impl Sexp {
    pub fn span(&self) -> Span {
        match self {
            Sexp::Symbol(_, s) | Sexp::List(_, s) => *s,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Sexp::Symbol(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }
}

#[derive(Debug)]
enum Token {
    Open(Span),
    Close(Span),
    Symbol(String, Span),
}

struct Cursor {
    offset: usize,
    line: usize,
    col: usize,
}

impl Cursor {
    fn span(&self) -> Span {
        Span {
            offset: self.offset,
            line: self.line,
            col: self.col,
        }
    }

    fn advance(&mut self, c: char) {
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
    }
}

fn tokenize(src: &str) -> (Vec<Token>, Span) {
    let mut tokens = Vec::new();
    let mut cur = Cursor {
        offset: 0,
        line: 1,
        col: 1,
    };
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.advance(c);
                    chars.next();
                }
            }
            '(' => {
                tokens.push(Token::Open(cur.span()));
                cur.advance(c);
                chars.next();
            }
            ')' => {
                tokens.push(Token::Close(cur.span()));
                cur.advance(c);
                chars.next();
            }
            c if c.is_whitespace() => {
                cur.advance(c);
                chars.next();
            }
            _ => {
                let start = cur.span();
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    cur.advance(c);
                    chars.next();
                }
                tokens.push(Token::Symbol(text, start));
            }
        }
    }
    (tokens, cur.span())
}

/// Reads exactly one top-level s-expression. Trailing content is an error.
pub fn read_one(src: &str) -> Result<Sexp, PddlDiagnostic> {
    let (tokens, end) = tokenize(src);
    let mut stack: Vec<(Vec<Sexp>, Span)> = Vec::new();
    let mut result: Option<Sexp> = None;

    for tok in tokens {
        if result.is_some() {
            let at = match &tok {
                Token::Open(s) | Token::Close(s) | Token::Symbol(_, s) => *s,
            };
            return Err(PddlDiagnostic::syntax(
                "unexpected content after the closing parenthesis of the definition",
                at,
            ));
        }
        match tok {
            Token::Open(span) => {
                if stack.len() >= MAX_DEPTH {
                    return Err(PddlDiagnostic::syntax(
                        format!("expression nested deeper than {MAX_DEPTH} levels"),
                        span,
                    ));
                }
                stack.push((Vec::new(), span));
            }
            Token::Close(span) => {
                let Some((items, open)) = stack.pop() else {
                    return Err(PddlDiagnostic::syntax("unbalanced parentheses: unexpected ')'", span));
                };
                let list = Sexp::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => result = Some(list),
                }
            }
            Token::Symbol(text, span) => match stack.last_mut() {
                Some((parent, _)) => parent.push(Sexp::Symbol(text, span)),
                None => {
                    return Err(PddlDiagnostic::syntax(
                        format!("expected '(' but found '{text}'"),
                        span,
                    ))
                }
            },
        }
    }

    if let Some((_, open)) = stack.first() {
        return Err(PddlDiagnostic::syntax(
            format!(
                "unbalanced parentheses: '(' opened at line {}, col {} is never closed",
                open.line, open.col
            ),
            end,
        ));
    }
    result.ok_or_else(|| PddlDiagnostic::syntax("empty input: expected '(define ...)'", end))
}
