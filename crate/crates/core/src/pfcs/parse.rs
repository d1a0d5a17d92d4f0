// Recursive-descent parser for PFCS concrete syntax.
//
//   system     ::= definition*
//   definition ::= name "(" [name ("," name)*] ")" "{" constraint* "}"
//   constraint ::= name "(" [expr ("," expr)*] ")" | expr "==" expr
//   expr       ::= term ("+" term)*
//   term       ::= factor ("*" factor)*
//   factor     ::= name | ["-" | "+"] digits | "(" expr ")"
//
// Constraints are separated by newlines or `;`. Newlines are otherwise
// insignificant inside parentheses and after binary operators. `//` starts a
// line comment.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use thiserror::Error;

use super::{Constraint, Definition, Expr, System, SystemError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: lexical error: {msg}")]
    Lexical { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: {source}")]
    Semantic {
        line: usize,
        col: usize,
        #[source]
        source: SystemError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Int(BigUint),
    Plus,
    Minus,
    Star,
    EqEq,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Newline,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Int(k) => format!("integer `{k}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Newline => "newline".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut depth = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let mut push = |tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: start.0,
                col: start.1,
            });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                if depth == 0 {
                    push(Tok::Newline, 1, &mut i, &mut col);
                } else {
                    i += 1;
                }
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
            }
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            '*' => push(Tok::Star, 1, &mut i, &mut col),
            '(' => {
                depth += 1;
                push(Tok::LParen, 1, &mut i, &mut col)
            }
            ')' => {
                depth = depth.saturating_sub(1);
                push(Tok::RParen, 1, &mut i, &mut col)
            }
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '=' if chars.get(i + 1) == Some(&'=') => push(Tok::EqEq, 2, &mut i, &mut col),
            '=' => {
                return Err(ParseError::Lexical {
                    line,
                    col,
                    msg: "expected `==`".into(),
                })
            }
            c if c.is_ascii_digit() => {
                let len = chars[i..].iter().take_while(|c| c.is_ascii_digit()).count();
                let digits: String = chars[i..i + len].iter().collect();
                if chars.get(i + len).is_some_and(|c| c.is_ascii_alphabetic() || *c == '_') {
                    return Err(ParseError::Lexical {
                        line,
                        col,
                        msg: "names must start with a letter".into(),
                    });
                }
                push(Tok::Int(digits.parse().expect("ascii digits")), len, &mut i, &mut col);
            }
            c if c.is_ascii_alphabetic() => {
                let len = chars[i..]
                    .iter()
                    .take_while(|c| c.is_ascii_alphanumeric() || **c == '_')
                    .count();
                let name: String = chars[i..i + len].iter().collect();
                push(Tok::Name(name), len, &mut i, &mut col);
            }
            other => {
                return Err(ParseError::Lexical {
                    line,
                    col,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.unexpected("a name"),
        }
    }

    /// Comma-separated items up to `)`, newlines allowed between items.
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        let mut out = Vec::new();
        self.skip_newlines();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            self.skip_newlines();
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    self.skip_newlines();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(out);
                }
                _ => return self.unexpected("`,` or `)`"),
            }
        }
    }

    fn system(&mut self) -> Result<System, ParseError> {
        let mut sys = System::default();
        self.skip_newlines();
        while *self.peek() != Tok::Eof {
            let (line, col) = self.here();
            let def = self.definition(&sys)?;
            sys.push(def)
                .map_err(|source| ParseError::Semantic { line, col, source })?;
            self.skip_newlines();
        }
        Ok(sys)
    }

    fn definition(&mut self, known: &System) -> Result<Definition, ParseError> {
        let name = self.name()?;
        self.expect(Tok::LParen)?;
        let mut seen = BTreeSet::new();
        let params = self.list(|p| {
            let (line, col) = p.here();
            let param = p.name()?;
            if !seen.insert(param.clone()) {
                return Err(ParseError::Semantic {
                    line,
                    col,
                    source: SystemError::DuplicateParameter {
                        relation: name.clone(),
                        param,
                    },
                });
            }
            Ok(param)
        })?;
        self.skip_newlines();
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        loop {
            while matches!(self.peek(), Tok::Newline | Tok::Semi) {
                self.bump();
            }
            if *self.peek() == Tok::RBrace {
                self.bump();
                break;
            }
            body.push(self.constraint(&name, known)?);
            match self.peek() {
                Tok::Newline | Tok::Semi | Tok::RBrace => {}
                _ => return self.unexpected("a newline, `;` or `}` after constraint"),
            }
        }
        Ok(Definition { name, params, body })
    }

    fn constraint(&mut self, caller: &str, known: &System) -> Result<Constraint, ParseError> {
        if let (Tok::Name(callee), Tok::LParen) = (self.peek().clone(), self.peek_at(1)) {
            let (line, col) = self.here();
            if known.get(&callee).is_none() {
                return Err(ParseError::Semantic {
                    line,
                    col,
                    source: SystemError::UnknownRelation {
                        caller: caller.to_string(),
                        callee,
                    },
                });
            }
            self.bump();
            self.bump();
            let args = self.list(Self::expr)?;
            return Ok(Constraint::Call { name: callee, args });
        }
        let lhs = self.expr()?;
        self.skip_newlines();
        self.expect(Tok::EqEq)?;
        self.skip_newlines();
        let rhs = self.expr()?;
        Ok(Constraint::Equal { lhs, rhs })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.term()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            self.skip_newlines();
            e = Expr::add(e, self.term()?);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            self.skip_newlines();
            e = Expr::mul(e, self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                self.bump();
                Ok(Expr::Var(n))
            }
            Tok::Int(k) => {
                self.bump();
                Ok(Expr::Const(BigInt::from(k)))
            }
            Tok::Minus | Tok::Plus => {
                let negative = self.bump() == Tok::Minus;
                match self.peek().clone() {
                    Tok::Int(k) => {
                        self.bump();
                        let k = BigInt::from(k);
                        Ok(Expr::Const(if negative { -k } else { k }))
                    }
                    _ => self.unexpected("an integer after sign"),
                }
            }
            Tok::LParen => {
                self.bump();
                self.skip_newlines();
                let e = self.expr()?;
                self.skip_newlines();
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => self.unexpected("an expression"),
        }
    }
}

/// Parses a whole PFCS source text.
pub fn parse_system(text: &str) -> Result<System, ParseError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.system()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var("x")
    }

    #[test]
    fn boolean_assert() {
        let sys = parse_system("boolean_assert(x) { x * (1 + -1 * x) == 0 }").unwrap();
        assert_eq!(sys.len(), 1);
        let d = &sys.definitions()[0];
        assert_eq!(d.name, "boolean_assert");
        assert_eq!(d.params, vec!["x"]);
        assert_eq!(
            d.body,
            vec![Constraint::equal(
                Expr::mul(x(), Expr::add(Expr::constant(1), Expr::mul(Expr::constant(-1), x()))),
                Expr::constant(0)
            )]
        );
    }

    #[test]
    fn empty_body() {
        let sys = parse_system("r(x) { }").unwrap();
        assert!(sys.definitions()[0].body.is_empty());
        assert!(parse_system("r() {}").unwrap().definitions()[0].params.is_empty());
        assert!(parse_system("").unwrap().is_empty());
    }

    #[test]
    fn forward_reference_rejected() {
        let err = parse_system("r(x) { s(x) }").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Semantic {
                source: SystemError::UnknownRelation { .. },
                line: 1,
                col: 8
            }
        ));
        let err = parse_system("r(x) { s(x) }\ns(y) { y == 0 }").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Semantic {
                source: SystemError::UnknownRelation { .. },
                ..
            }
        ));
        let err = parse_system("r(x) { r(x) }").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Semantic {
                source: SystemError::UnknownRelation { .. },
                ..
            }
        ));
    }

    #[test]
    fn duplicates_rejected() {
        let err = parse_system("r(x) {}\nr(y) {}").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Semantic {
                source: SystemError::DuplicateDefinition(_),
                line: 2,
                ..
            }
        ));
        let err = parse_system("r(x, y, x) {}").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Semantic {
                source: SystemError::DuplicateParameter { .. },
                col: 9,
                ..
            }
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        let c = |s: &str| match &parse_system(&format!("r(a, b, c, d) {{ {s} == 0 }}"))
            .unwrap()
            .definitions()[0]
            .body[0]
        {
            Constraint::Equal { lhs, .. } => lhs.clone(),
            _ => unreachable!(),
        };
        let (a, b, cc, d) = (Expr::var("a"), Expr::var("b"), Expr::var("c"), Expr::var("d"));
        assert_eq!(c("a + b * c"), Expr::add(a.clone(), Expr::mul(b.clone(), cc.clone())));
        assert_eq!(c("a * b + c"), Expr::add(Expr::mul(a.clone(), b.clone()), cc.clone()));
        assert_eq!(c("a + b + c"), Expr::add(Expr::add(a.clone(), b.clone()), cc.clone()));
        assert_eq!(c("a * b * c"), Expr::mul(Expr::mul(a.clone(), b.clone()), cc.clone()));
        assert_eq!(c("a * (b + c)"), Expr::mul(a.clone(), Expr::add(b.clone(), cc.clone())));
        assert_eq!(
            c("a + b * c + d"),
            Expr::add(Expr::add(a.clone(), Expr::mul(b.clone(), cc.clone())), d.clone())
        );
        assert_eq!(c("a * -3"), Expr::mul(a, Expr::constant(-3)));
        assert_eq!(c("+2"), Expr::constant(2));
    }

    #[test]
    fn separators_and_comments() {
        let text =
            "// header\nr(x,\n  y) {\n  x == y; y == 0\n  // inside\n  x +\n    y == 0\n}\n\ns(a) { r(a,\n a) }\n";
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.definitions()[0].body.len(), 3);
        assert_eq!(sys.definitions()[1].body.len(), 1);
        let sys = parse_system("r(x) {\n  (x\n  + 1) * x == 0\n}").unwrap();
        assert_eq!(sys.definitions()[0].body.len(), 1);
        assert!(parse_system("r(x) {\n  x\n  + 1 == 0\n}").is_err());
    }

    #[test]
    fn call_arity_checked() {
        let err = parse_system("s(a, b) { a == b }\nr(x) { s(x) }").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Semantic {
                source: SystemError::Arity {
                    expected: 2,
                    found: 1,
                    ..
                },
                ..
            }
        ));
    }

    #[test]
    fn syntax_errors_have_positions() {
        assert!(matches!(
            parse_system("r(x) { x == 0 y == 1 }"),
            Err(ParseError::Syntax { line: 1, col: 15, .. })
        ));
        assert!(matches!(
            parse_system("r(x) { x = 0 }"),
            Err(ParseError::Lexical { col: 10, .. })
        ));
        assert!(matches!(
            parse_system("r(x) { x == 0 } }"),
            Err(ParseError::Syntax { col: 17, .. })
        ));
        assert!(matches!(parse_system("r(x) { x == 0 "), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            parse_system("r(x) { x == # }"),
            Err(ParseError::Lexical { .. })
        ));
        assert!(matches!(
            parse_system("r(x) { x == - y }"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_system("r(x) { 3x == 0 }"),
            Err(ParseError::Lexical { .. })
        ));
        assert!(matches!(
            parse_system("r(x) { x == 0 }\ngarbage"),
            Err(ParseError::Syntax { line: 2, col: 8, .. })
        ));
    }

    #[test]
    fn big_literals() {
        let big = "21888242871839275222246405745257275088548364400416034343698204186575808495616";
        let sys = parse_system(&format!("r(x) {{ x == -{big} }}")).unwrap();
        match &sys.definitions()[0].body[0] {
            Constraint::Equal {
                rhs: Expr::Const(k), ..
            } => assert_eq!(k.to_string(), format!("-{big}")),
            other => panic!("{other:?}"),
        }
    }
}
