use std::fmt;
use std::rc::Rc;

/// Abstract syntax of PCF with labeled binary choice. Numerals are `Succ^n(Zero)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Zero,
    Succ(Rc<Term>),
    Pred(Rc<Term>),
    Ifz(Rc<Term>, Rc<Term>, Rc<Term>),
    Var(Rc<str>),
    Lam(Rc<str>, Rc<Term>),
    App(Rc<Term>, Rc<Term>),
    Fix(Rc<Term>),
    /// `left +[X_i] right`; the left branch has weight `X_i`, the right `~X_i`.
    Choice(u32, Rc<Term>, Rc<Term>),
}

/// A parsed source file: the term and its parameter count `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub params: u32,
    pub term: Rc<Term>,
}

impl Program {
    pub fn new(params: u32, term: Rc<Term>) -> Self {
        Program { params, term }
    }

    pub fn dim(&self) -> usize {
        2 * self.params as usize
    }
}

impl Term {
    pub fn num(n: u64) -> Rc<Term> {
        let mut t = Rc::new(Term::Zero);
        for _ in 0..n {
            t = Rc::new(Term::Succ(t));
        }
        t
    }

    pub fn var(x: &str) -> Rc<Term> {
        Rc::new(Term::Var(x.into()))
    }

    pub fn lam(x: &str, body: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::Lam(x.into(), body))
    }

    pub fn app(f: Rc<Term>, a: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::App(f, a))
    }

    pub fn choice(i: u32, l: Rc<Term>, r: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::Choice(i, l, r))
    }

    pub fn fix(t: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::Fix(t))
    }

    pub fn ifz(s: Rc<Term>, a: Rc<Term>, b: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::Ifz(s, a, b))
    }

    /// `Some(n)` when the term is the numeral `n`.
    pub fn numeral_value(&self) -> Option<u64> {
        let mut n = 0;
        let mut t = self;
        loop {
            match t {
                Term::Zero => return Some(n),
                Term::Succ(inner) => {
                    n += 1;
                    t = inner;
                }
                _ => return None,
            }
        }
    }

    /// Number of constructors, counting each `Succ` of a numeral.
    pub fn size(&self) -> usize {
        match self {
            Term::Zero | Term::Var(_) => 1,
            Term::Succ(t) | Term::Pred(t) | Term::Fix(t) | Term::Lam(_, t) => 1 + t.size(),
            Term::App(a, b) | Term::Choice(_, a, b) => 1 + a.size() + b.size(),
            Term::Ifz(a, b, c) => 1 + a.size() + b.size() + c.size(),
        }
    }

    pub fn max_param(&self) -> u32 {
        match self {
            Term::Zero | Term::Var(_) => 0,
            Term::Succ(t) | Term::Pred(t) | Term::Fix(t) | Term::Lam(_, t) => t.max_param(),
            Term::App(a, b) => a.max_param().max(b.max_param()),
            Term::Choice(i, a, b) => (*i).max(a.max_param()).max(b.max_param()),
            Term::Ifz(a, b, c) => a.max_param().max(b.max_param()).max(c.max_param()),
        }
    }

    pub fn has_fix(&self) -> bool {
        match self {
            Term::Zero | Term::Var(_) => false,
            Term::Fix(_) => true,
            Term::Succ(t) | Term::Pred(t) | Term::Lam(_, t) => t.has_fix(),
            Term::App(a, b) | Term::Choice(_, a, b) => a.has_fix() || b.has_fix(),
            Term::Ifz(a, b, c) => a.has_fix() || b.has_fix() || c.has_fix(),
        }
    }

    pub fn is_free(&self, x: &str) -> bool {
        match self {
            Term::Zero => false,
            Term::Var(y) => &**y == x,
            Term::Lam(y, t) => &**y != x && t.is_free(x),
            Term::Succ(t) | Term::Pred(t) | Term::Fix(t) => t.is_free(x),
            Term::App(a, b) | Term::Choice(_, a, b) => a.is_free(x) || b.is_free(x),
            Term::Ifz(a, b, c) => a.is_free(x) || b.is_free(x) || c.is_free(x),
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, level: Level) -> fmt::Result {
        if let Some(n) = self.numeral_value() {
            return write!(f, "{n}");
        }
        let needs_parens = match self {
            Term::Lam(..) | Term::Ifz(..) => level != Level::Term,
            Term::Choice(..) => level > Level::ChoiceRight,
            Term::App(..) => level > Level::App,
            _ => false,
        };
        if needs_parens {
            f.write_str("(")?;
            self.fmt_at(f, Level::Term)?;
            return f.write_str(")");
        }
        match self {
            Term::Zero => f.write_str("0"),
            Term::Var(x) => f.write_str(x),
            Term::Succ(t) => {
                f.write_str("succ ")?;
                t.fmt_at(f, Level::Atom)
            }
            Term::Pred(t) => {
                f.write_str("pred ")?;
                t.fmt_at(f, Level::Atom)
            }
            Term::Fix(t) => {
                f.write_str("fix ")?;
                t.fmt_at(f, Level::Atom)
            }
            Term::Lam(x, t) => {
                write!(f, "\\{x}. ")?;
                t.fmt_at(f, Level::Term)
            }
            Term::Ifz(s, a, b) => {
                f.write_str("ifz ")?;
                s.fmt_at(f, Level::Term)?;
                f.write_str(" then ")?;
                a.fmt_at(f, Level::Term)?;
                f.write_str(" else ")?;
                b.fmt_at(f, Level::Term)
            }
            Term::App(a, b) => {
                a.fmt_at(f, Level::App)?;
                f.write_str(" ")?;
                b.fmt_at(f, Level::Atom)
            }
            Term::Choice(i, a, b) => {
                a.fmt_at(f, Level::App)?;
                write!(f, " +[X{i}] ")?;
                b.fmt_at(f, Level::ChoiceRight)
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Term,
    ChoiceRight,
    App,
    Atom,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, Level::Term)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "params {}; {}", self.params, self.term)
    }
}
