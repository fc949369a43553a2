//! Mu-recursive function expressions: AST, a small prefix-notation
//! parser, and a direct fuel-bounded evaluator used as the differential
//! oracle for the compiler.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr := "Z" [ "[" nat "]" ]            n-ary zero (Z alone is Z[1])
//!       | "S"                            successor
//!       | "U" "[" nat "," nat "]"        projection U[n,i], 1 <= i <= n
//!       | "C" "(" expr ";" expr { "," expr } ")"   composition C(f; g1,..,gm)
//!       | "P" "(" expr "," expr ")"      primitive recursion P(f, g)
//!       | "M" "(" expr ")"               minimalization
//! ```

use std::fmt;

use thiserror::Error;

/// AST of a mu-recursive function expression.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RecExpr {
    /// `Z[n]`: discards its n arguments and returns 0.
    Zero(usize),
    /// `S`: unary successor.
    Succ,
    /// `U[n,i]`: returns its i-th of n arguments (1-based).
    Proj(usize, usize),
    /// `C(f; g1,..,gm)`: x -> f(g1(x),..,gm(x)).
    Comp(Box<RecExpr>, Vec<RecExpr>),
    /// `P(f, g)`: h(x,0) = f(x); h(x,m+1) = g(x, m, h(x,m)).
    PrimRec(Box<RecExpr>, Box<RecExpr>),
    /// `M(f)`: h(x) = least y with f(x,y) = 0, undefined if none exists.
    Min(Box<RecExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at column {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("arity error at {path}: found {found} where {required} is required ({rule})")]
    Arity {
        path: String,
        found: usize,
        required: usize,
        rule: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("arity mismatch: expression takes {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
}

/// Result of a fuel-bounded evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalResult {
    Value(u64),
    /// Fuel ran out; carries the fuel spent (the full initial budget).
    Diverged(u64),
}

impl EvalResult {
    pub fn value(self) -> Option<u64> {
        match self {
            EvalResult::Value(v) => Some(v),
            EvalResult::Diverged(_) => None,
        }
    }
}

impl RecExpr {
    /// Number of arguments the expression takes.
    pub fn arity(&self) -> usize {
        match self {
            RecExpr::Zero(n) => *n,
            RecExpr::Succ => 1,
            RecExpr::Proj(n, _) => *n,
            RecExpr::Comp(_, gs) => gs[0].arity(),
            RecExpr::PrimRec(f, _) => f.arity() + 1,
            RecExpr::Min(f) => f.arity() - 1,
        }
    }

    /// Checks every arity invariant of the tree. `parse` calls this; it is
    /// public for programmatically built expressions.
    pub fn check(&self) -> Result<(), ParseError> {
        self.check_at("root")
    }

    fn check_at(&self, path: &str) -> Result<(), ParseError> {
        match self {
            RecExpr::Zero(_) | RecExpr::Succ => Ok(()),
            RecExpr::Proj(n, i) => {
                if *i < 1 || i > n {
                    return Err(ParseError::Arity {
                        path: path.into(),
                        found: *i,
                        required: *n,
                        rule: "projection index must satisfy 1 <= i <= n",
                    });
                }
                Ok(())
            }
            RecExpr::Comp(f, gs) => {
                f.check_at(&format!("{path}.f"))?;
                for (k, g) in gs.iter().enumerate() {
                    g.check_at(&format!("{path}.g{}", k + 1))?;
                }
                if f.arity() != gs.len() {
                    return Err(ParseError::Arity {
                        path: format!("{path}.f"),
                        found: f.arity(),
                        required: gs.len(),
                        rule: "composition needs arity(f) = number of inner functions",
                    });
                }
                let shared = gs[0].arity();
                for (k, g) in gs.iter().enumerate() {
                    if g.arity() != shared {
                        return Err(ParseError::Arity {
                            path: format!("{path}.g{}", k + 1),
                            found: g.arity(),
                            required: shared,
                            rule: "all inner functions of a composition share one arity",
                        });
                    }
                }
                Ok(())
            }
            RecExpr::PrimRec(f, g) => {
                f.check_at(&format!("{path}.f"))?;
                g.check_at(&format!("{path}.g"))?;
                if g.arity() != f.arity() + 2 {
                    return Err(ParseError::Arity {
                        path: format!("{path}.g"),
                        found: g.arity(),
                        required: f.arity() + 2,
                        rule: "primitive recursion needs arity(g) = arity(f) + 2",
                    });
                }
                Ok(())
            }
            RecExpr::Min(f) => {
                f.check_at(&format!("{path}.f"))?;
                if f.arity() < 2 {
                    return Err(ParseError::Arity {
                        path: format!("{path}.f"),
                        found: f.arity(),
                        required: 2,
                        rule: "minimalization needs arity(f) >= 2",
                    });
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for RecExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecExpr::Zero(n) => write!(f, "Z[{n}]"),
            RecExpr::Succ => write!(f, "S"),
            RecExpr::Proj(n, i) => write!(f, "U[{n},{i}]"),
            RecExpr::Comp(fun, gs) => {
                write!(f, "C({fun}; ")?;
                for (k, g) in gs.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ")")
            }
            RecExpr::PrimRec(base, step) => write!(f, "P({base}, {step})"),
            RecExpr::Min(fun) => write!(f, "M({fun})"),
        }
    }
}

/// Parses the DSL described in the module docs and checks all arity
/// invariants. Error positions are 1-based columns.
pub fn parse(text: &str) -> Result<RecExpr, ParseError> {
    let mut parser = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    parser.skip_ws();
    let expr = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.err("end of input"));
    }
    expr.check()?;
    Ok(expr)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, expected: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            position: self.pos + 1,
            expected: expected.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, expected: u8) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(expected) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("{:?}", expected as char)))
        }
    }

    fn nat(&mut self) -> Result<usize, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("a number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("digits are ascii")
            .parse()
            .map_err(|_| ParseError::Syntax {
                position: start + 1,
                expected: "a smaller number".into(),
            })
    }

    fn expr(&mut self) -> Result<RecExpr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'Z') => {
                self.pos += 1;
                self.skip_ws();
                if self.peek() == Some(b'[') {
                    self.pos += 1;
                    let n = self.nat()?;
                    self.eat(b']')?;
                    Ok(RecExpr::Zero(n))
                } else {
                    Ok(RecExpr::Zero(1))
                }
            }
            Some(b'S') => {
                self.pos += 1;
                Ok(RecExpr::Succ)
            }
            Some(b'U') => {
                self.pos += 1;
                self.eat(b'[')?;
                let n = self.nat()?;
                self.eat(b',')?;
                let i = self.nat()?;
                self.eat(b']')?;
                Ok(RecExpr::Proj(n, i))
            }
            Some(b'C') => {
                self.pos += 1;
                self.eat(b'(')?;
                let f = self.expr()?;
                self.eat(b';')?;
                let mut gs = vec![self.expr()?];
                loop {
                    self.skip_ws();
                    if self.peek() == Some(b',') {
                        self.pos += 1;
                        gs.push(self.expr()?);
                    } else {
                        break;
                    }
                }
                self.eat(b')')?;
                Ok(RecExpr::Comp(Box::new(f), gs))
            }
            Some(b'P') => {
                self.pos += 1;
                self.eat(b'(')?;
                let f = self.expr()?;
                self.eat(b',')?;
                let g = self.expr()?;
                self.eat(b')')?;
                Ok(RecExpr::PrimRec(Box::new(f), Box::new(g)))
            }
            Some(b'M') => {
                self.pos += 1;
                self.eat(b'(')?;
                let f = self.expr()?;
                self.eat(b')')?;
                Ok(RecExpr::Min(Box::new(f)))
            }
            _ => Err(self.err("one of Z, S, U, C, P, M")),
        }
    }
}

enum Stop {
    OutOfFuel,
}

/// Direct recursive evaluation with a fuel budget: every node visit and
/// every minimalization probe costs one unit, so divergence detection is
/// deterministic.
pub fn eval(expr: &RecExpr, args: &[u64], fuel: u64) -> Result<EvalResult, EvalError> {
    if args.len() != expr.arity() {
        return Err(EvalError::ArityMismatch {
            expected: expr.arity(),
            got: args.len(),
        });
    }
    let mut remaining = fuel;
    match eval_inner(expr, args, &mut remaining) {
        Ok(v) => Ok(EvalResult::Value(v)),
        Err(Stop::OutOfFuel) => Ok(EvalResult::Diverged(fuel - remaining)),
    }
}

fn eval_inner(expr: &RecExpr, args: &[u64], fuel: &mut u64) -> Result<u64, Stop> {
    if *fuel == 0 {
        return Err(Stop::OutOfFuel);
    }
    *fuel -= 1;
    match expr {
        RecExpr::Zero(_) => Ok(0),
        RecExpr::Succ => Ok(args[0] + 1),
        RecExpr::Proj(_, i) => Ok(args[i - 1]),
        RecExpr::Comp(f, gs) => {
            let mut inner = Vec::with_capacity(gs.len());
            for g in gs {
                inner.push(eval_inner(g, args, fuel)?);
            }
            eval_inner(f, &inner, fuel)
        }
        RecExpr::PrimRec(f, g) => {
            let (xs, y) = args.split_at(args.len() - 1);
            let mut acc = eval_inner(f, xs, fuel)?;
            let mut step_args = xs.to_vec();
            step_args.push(0);
            step_args.push(0);
            for m in 0..y[0] {
                let k = step_args.len();
                step_args[k - 2] = m;
                step_args[k - 1] = acc;
                acc = eval_inner(g, &step_args, fuel)?;
            }
            Ok(acc)
        }
        RecExpr::Min(f) => {
            let mut probe_args = args.to_vec();
            probe_args.push(0);
            for y in 0.. {
                if *fuel == 0 {
                    return Err(Stop::OutOfFuel);
                }
                *probe_args.last_mut().expect("non-empty") = y;
                if eval_inner(f, &probe_args, fuel)? == 0 {
                    return Ok(y);
                }
            }
            unreachable!("loop exits via fuel or a zero")
        }
    }
}
