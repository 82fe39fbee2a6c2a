use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Kind {
    Atom(String),
    List(Vec<Sexp>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Sexp {
    pub kind: Kind,
    pub line: usize,
    pub column: usize,
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match &self.kind {
            Kind::Atom(a) => Some(a),
            Kind::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            Kind::List(l) => Some(l),
            Kind::Atom(_) => None,
        }
    }

    pub fn syntax(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

/// Reads every top-level s-expression. `;` starts a comment.
pub(crate) fn read_all(src: &str) -> Result<Vec<Sexp>> {
    let mut stack: Vec<(usize, usize, Vec<Sexp>)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&ch) = chars.peek() {
        let (l, c) = (line, col);
        match ch {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            _ if ch.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                stack.push((l, c, Vec::new()));
            }
            ')' => {
                chars.next();
                col += 1;
                let (sl, sc, items) = stack.pop().ok_or(Error::Syntax {
                    line: l,
                    column: c,
                    message: "unexpected `)`".into(),
                })?;
                let e = Sexp {
                    kind: Kind::List(items),
                    line: sl,
                    column: sc,
                };
                match stack.last_mut() {
                    Some(parent) => parent.2.push(e),
                    None => top.push(e),
                }
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                    col += 1;
                }
                let e = Sexp {
                    kind: Kind::Atom(s),
                    line: l,
                    column: c,
                };
                match stack.last_mut() {
                    Some(parent) => parent.2.push(e),
                    None => top.push(e),
                }
            }
        }
    }
    if let Some((l, c, _)) = stack.pop() {
        return Err(Error::Syntax {
            line: l,
            column: c,
            message: "unclosed `(`".into(),
        });
    }
    Ok(top)
}
