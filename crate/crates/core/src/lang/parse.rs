use std::rc::Rc;

use thiserror::Error;

use super::syntax::{Program, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    ChoiceOpen,
    RBracket,
    Semi,
    Int(u64),
    Ident(String),
    Kw(&'static str),
    Eof,
}

const KEYWORDS: [&str; 8] = ["params", "succ", "pred", "fix", "ifz", "then", "else", "Y"];

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Lambda => "'\\'".into(),
        Tok::Dot => "'.'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::ChoiceOpen => "'+['".into(),
        Tok::RBracket => "']'".into(),
        Tok::Semi => "';'".into(),
        Tok::Int(n) => format!("number {n}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Kw(k) => format!("keyword '{k}'"),
        Tok::Eof => "end of input".into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i);
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '\\' | 'λ' => {
                advance(1, &mut i);
                out.push(Token { tok: Tok::Lambda, line: tl, col: tc });
            }
            '.' => {
                advance(1, &mut i);
                out.push(Token { tok: Tok::Dot, line: tl, col: tc });
            }
            '(' => {
                advance(1, &mut i);
                out.push(Token { tok: Tok::LParen, line: tl, col: tc });
            }
            ')' => {
                advance(1, &mut i);
                out.push(Token { tok: Tok::RParen, line: tl, col: tc });
            }
            ']' => {
                advance(1, &mut i);
                out.push(Token { tok: Tok::RBracket, line: tl, col: tc });
            }
            ';' => {
                advance(1, &mut i);
                out.push(Token { tok: Tok::Semi, line: tl, col: tc });
            }
            '+' => {
                if chars.get(i + 1) != Some(&'[') {
                    return Err(err(tl, tc, "expected '[' after '+'".into()));
                }
                advance(2, &mut i);
                out.push(Token { tok: Tok::ChoiceOpen, line: tl, col: tc });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(1, &mut i);
                }
                let text: String = chars[start..i].iter().collect();
                let n = text.parse::<u64>().map_err(|_| err(tl, tc, format!("number too large: {text}")))?;
                out.push(Token { tok: Tok::Int(n), line: tl, col: tc });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    advance(1, &mut i);
                }
                let text: String = chars[start..i].iter().collect();
                let tok = match KEYWORDS.iter().find(|k| **k == text) {
                    Some(k) => Tok::Kw(k),
                    None => Tok::Ident(text),
                };
                out.push(Token { tok, line: tl, col: tc });
            }
            other => return Err(err(tl, tc, format!("unexpected character '{other}'"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    declared: Option<u32>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, msg: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, col: t.col, msg }
    }

    fn expect(&mut self, want: Tok) -> Result<Token, ParseError> {
        if *self.peek() == want {
            Ok(self.next())
        } else {
            Err(self.error_here(format!("expected {}, found {}", describe(&want), describe(self.peek()))))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error_here(format!("expected identifier, found {}", describe(&other)))),
        }
    }

    fn term(&mut self) -> Result<Rc<Term>, ParseError> {
        if *self.peek() == Tok::Lambda {
            self.lam()
        } else {
            self.choice()
        }
    }

    fn lam(&mut self) -> Result<Rc<Term>, ParseError> {
        self.expect(Tok::Lambda)?;
        let x = self.ident()?;
        self.expect(Tok::Dot)?;
        let body = self.term()?;
        Ok(Term::lam(&x, body))
    }

    fn choice(&mut self) -> Result<Rc<Term>, ParseError> {
        let left = self.app()?;
        if *self.peek() != Tok::ChoiceOpen {
            return Ok(left);
        }
        self.next();
        let param = self.param()?;
        self.expect(Tok::RBracket)?;
        let right = self.choice()?;
        Ok(Term::choice(param, left, right))
    }

    fn param(&mut self) -> Result<u32, ParseError> {
        let tok = self.toks[self.pos].clone();
        let name = match &tok.tok {
            Tok::Ident(s) => s.clone(),
            other => return Err(self.error_here(format!("expected parameter like X1, found {}", describe(other)))),
        };
        let digits = name.strip_prefix('X').filter(|d| d.chars().all(|c| c.is_ascii_digit()));
        let index = match digits {
            Some("") => 1,
            Some(d) => d.parse::<u32>().map_err(|_| self.error_here(format!("bad parameter '{name}'")))?,
            None => return Err(self.error_here(format!("expected parameter like X1, found '{name}'"))),
        };
        if index == 0 {
            return Err(self.error_here("parameter indices start at 1".into()));
        }
        if let Some(k) = self.declared {
            if index > k {
                return Err(self.error_here(format!("unknown parameter index X{index}: only {k} declared")));
            }
        }
        self.next();
        Ok(index)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Int(_) | Tok::Ident(_) | Tok::LParen | Tok::Kw("succ") | Tok::Kw("pred") | Tok::Kw("fix") | Tok::Kw("Y") | Tok::Kw("ifz")
        )
    }

    fn app(&mut self) -> Result<Rc<Term>, ParseError> {
        let mut head = self.atom()?;
        loop {
            if self.starts_atom() {
                let arg = self.atom()?;
                head = Term::app(head, arg);
            } else if *self.peek() == Tok::Lambda {
                let arg = self.lam()?;
                return Ok(Term::app(head, arg));
            } else {
                return Ok(head);
            }
        }
    }

    fn atom(&mut self) -> Result<Rc<Term>, ParseError> {
        let tok = self.next();
        match tok.tok {
            Tok::Int(n) => Ok(Term::num(n)),
            Tok::Ident(x) => Ok(Term::var(&x)),
            Tok::Kw("succ") => Ok(Rc::new(Term::Succ(self.atom()?))),
            Tok::Kw("pred") => Ok(Rc::new(Term::Pred(self.atom()?))),
            Tok::Kw("fix") | Tok::Kw("Y") => Ok(Term::fix(self.atom()?)),
            Tok::Kw("ifz") => {
                let s = self.term()?;
                self.expect(Tok::Kw("then"))?;
                let a = self.term()?;
                self.expect(Tok::Kw("else"))?;
                let b = self.term()?;
                Ok(Term::ifz(s, a, b))
            }
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => {
                Err(ParseError { line: tok.line, col: tok.col, msg: format!("expected a term, found {}", describe(&other)) })
            }
        }
    }
}

/// Parses a `.pcfx` source. Without a `params` declaration, `k` is the largest index used.
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0, declared: None };
    while *p.peek() == Tok::Kw("params") {
        p.next();
        let k = match p.next().tok {
            Tok::Int(n) if n <= u32::MAX as u64 => n as u32,
            other => return Err(p.error_here(format!("expected parameter count, found {}", describe(&other)))),
        };
        p.expect(Tok::Semi)?;
        p.declared = Some(k);
    }
    let term = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error_here(format!("unexpected {}", describe(p.peek()))));
    }
    let params = p.declared.unwrap_or_else(|| term.max_param());
    Ok(Program { params, term })
}

/// Parses a bare term, for tests and tools.
pub fn parse_term(source: &str) -> Result<Rc<Term>, ParseError> {
    parse(source).map(|p| p.term)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choice_literal() {
        let t = parse_term("1 +[X] 0").unwrap();
        assert_eq!(*t, Term::Choice(1, Term::num(1), Term::num(0)));
    }

    #[test]
    fn fix_choice() {
        let t = parse_term("fix (\\x. x +[X] 1)").unwrap();
        let expected = Term::fix(Term::lam("x", Term::choice(1, Term::var("x"), Term::num(1))));
        assert_eq!(t, expected);
    }

    #[test]
    fn truncated_ifz() {
        let e = parse("ifz 0 then 1 else").unwrap_err();
        assert_eq!((e.line, e.col), (1, 18));
        assert!(e.msg.contains("expected a term"));
    }

    #[test]
    fn choice_is_right_associative() {
        let t = parse_term("0 +[X1] 1 +[X2] 0").unwrap();
        assert_eq!(t, Term::choice(1, Term::num(0), Term::choice(2, Term::num(1), Term::num(0))));
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse_term("f x y").unwrap();
        assert_eq!(t, Term::app(Term::app(Term::var("f"), Term::var("x")), Term::var("y")));
    }

    #[test]
    fn params_declaration() {
        let p = parse("# header\nparams 3;\n0 +[X2] 1").unwrap();
        assert_eq!(p.params, 3);
        let e = parse("params 1; 0 +[X2] 1").unwrap_err();
        assert!(e.msg.contains("unknown parameter"));
        assert!(parse("0 +[X0] 1").is_err());
    }

    #[test]
    fn error_positions() {
        let e = parse("\\x.\n  x )").unwrap_err();
        assert_eq!((e.line, e.col), (2, 5));
        assert!(parse("0 + 1").is_err());
        assert!(parse("0 $").is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "(1 +[X1] 0) +[X1] ((1 +[X1] 0) +[X1] (0 +[X1] 1))",
            "fix (\\f. \\x. ifz x then 0 else f (pred x)) 3",
            "(\\x. x) ((\\y. y) 1 +[X2] 0)",
            "succ (pred (succ 0 +[X1] 0))",
            "(ifz 0 then \\x. x else \\y. 1) 0",
            "(\\x. 1 +[X1] x) 0",
        ] {
            let t = parse_term(src).unwrap();
            let again = parse_term(&t.to_string()).unwrap();
            assert_eq!(t, again, "{src} printed as {t}");
        }
    }
}
