//! Recursive-descent parser and evaluator for residual expressions.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | factor
//! factor  := primary ('^' unary)?          // right-associative power
//! primary := number | variable | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-x1^2` reads as `-(x1^2)`.
//! Variables are `x1 .. xn` (1-based); there is no implicit multiplication.
//! Numbers are decimal with an optional exponent part.

use std::fmt;

use crate::model::{ModelError, ResidualProblem};
use crate::qcalc::VectorField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn name(&self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "ln" => Some(Func::Ln),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }
}

/// Parsed expression tree. Variable indices are stored 0-based; the source
/// syntax is 1-based (`x1` is index 0).
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Number(f64),
    Var(usize),
    Neg(Box<ExprAst>),
    Binary {
        op: BinOp,
        lhs: Box<ExprAst>,
        rhs: Box<ExprAst>,
    },
    Call {
        func: Func,
        arg: Box<ExprAst>,
    },
}

impl ExprAst {
    /// Evaluates the tree at `x`. Total over finite inputs: out-of-domain
    /// arithmetic yields NaN or infinities rather than panicking.
    ///
    /// Panics if `x` is shorter than the largest variable index in the tree.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ExprAst::Number(v) => *v,
            ExprAst::Var(i) => x[*i],
            ExprAst::Neg(inner) => -inner.eval(x),
            ExprAst::Binary { op, lhs, rhs } => {
                let (a, b) = (lhs.eval(x), rhs.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            ExprAst::Call { func, arg } => {
                let v = arg.eval(x);
                match func {
                    Func::Exp => v.exp(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Ln => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => v.abs(),
                }
            }
        }
    }

    /// Largest 0-based variable index referenced, if any variable occurs.
    pub fn max_var_index(&self) -> Option<usize> {
        match self {
            ExprAst::Number(_) => None,
            ExprAst::Var(i) => Some(*i),
            ExprAst::Neg(inner) => inner.max_var_index(),
            ExprAst::Binary { lhs, rhs, .. } => match (lhs.max_var_index(), rhs.max_var_index()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
            ExprAst::Call { arg, .. } => arg.max_var_index(),
        }
    }
}

/// Fully parenthesized form; re-parsing it reproduces the tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Number(v) => write!(f, "{v}"),
            ExprAst::Var(i) => write!(f, "x{}", i + 1),
            ExprAst::Neg(inner) => write!(f, "(-{inner})"),
            ExprAst::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            ExprAst::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    /// Unexpected input at `offset`; `expected` names the acceptable tokens.
    Syntax {
        offset: usize,
        expected: &'static str,
    },
    /// An identifier that is neither a variable nor a known function.
    UnknownIdentifier { offset: usize, name: String },
    /// A variable outside `x1 ..= xn` for the declared dimension.
    VarIndexOutOfRange {
        offset: usize,
        index: usize,
        dim: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::VarIndexOutOfRange { offset, .. } => *offset,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { offset, expected } => {
                write!(f, "syntax error at offset {offset}: expected {expected}")
            }
            ParseError::UnknownIdentifier { offset, name } => {
                write!(f, "unknown identifier '{name}' at offset {offset}")
            }
            ParseError::VarIndexOutOfRange { offset, index, dim } => {
                write!(
                    f,
                    "variable x{index} at offset {offset} is out of range for dimension {dim}"
                )
            }
        }
    }
}

impl std::error::Error for ParseError {}

/// Parses `source` as an expression over `x1 .. xn`.
pub fn parse(source: &str, n: usize) -> Result<ExprAst, ParseError> {
    let mut parser = Parser {
        src: source.as_bytes(),
        pos: 0,
        dim: n,
    };
    let expr = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.src.len() {
        return Err(ParseError::Syntax {
            offset: parser.pos,
            expected: "an operator ('+', '-', '*', '/', '^') or end of input",
        });
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = ExprAst::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = ExprAst::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ParseError> {
        if self.eat(b'-') {
            return Ok(ExprAst::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            // Exponent may itself carry a unary minus: 2^-3 is valid.
            let exponent = self.unary()?;
            return Ok(ExprAst::Binary {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exponent),
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<ExprAst, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(ParseError::Syntax {
                        offset: self.pos,
                        expected: "')'",
                    });
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            _ => Err(ParseError::Syntax {
                offset: self.pos,
                expected: "a number, variable, function call, '(' or '-'",
            }),
        }
    }

    fn number(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos == start || self.src[start..self.pos] == *b"." {
            return Err(ParseError::Syntax {
                offset: start,
                expected: "a number",
            });
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits_start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits_start {
                // Not an exponent after all; leave 'e' for the caller, where
                // it will fail as a stray identifier.
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        match text.parse::<f64>() {
            Ok(v) => Ok(ExprAst::Number(v)),
            Err(_) => Err(ParseError::Syntax {
                offset: start,
                expected: "a number",
            }),
        }
    }

    fn identifier(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii identifier")
            .to_string();
        if let Some(index_text) = name.strip_prefix('x') {
            if !index_text.is_empty() && index_text.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = index_text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    expected: "a variable index",
                })?;
                if index == 0 || index > self.dim {
                    return Err(ParseError::VarIndexOutOfRange {
                        offset: start,
                        index,
                        dim: self.dim,
                    });
                }
                return Ok(ExprAst::Var(index - 1));
            }
        }
        if let Some(func) = Func::from_name(&name) {
            if !self.eat(b'(') {
                return Err(ParseError::Syntax {
                    offset: self.pos,
                    expected: "'(' after a function name",
                });
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(ParseError::Syntax {
                    offset: self.pos,
                    expected: "')'",
                });
            }
            return Ok(ExprAst::Call {
                func,
                arg: Box::new(arg),
            });
        }
        Err(ParseError::UnknownIdentifier {
            offset: start,
            name,
        })
    }
}

/// A set of residual expressions over a shared variable space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedProblem {
    name: String,
    n: usize,
    residuals: Vec<ExprAst>,
}

impl ParsedProblem {
    /// Validates that every expression stays within `x1 .. xn`.
    pub fn new(n: usize, residuals: Vec<ExprAst>) -> Result<Self, ParseError> {
        for expr in &residuals {
            if let Some(max) = expr.max_var_index() {
                if max >= n {
                    return Err(ParseError::VarIndexOutOfRange {
                        offset: 0,
                        index: max + 1,
                        dim: n,
                    });
                }
            }
        }
        Ok(Self {
            name: "user-defined".to_string(),
            n,
            residuals,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parameter_count(&self) -> usize {
        self.n
    }

    pub fn residual_count(&self) -> usize {
        self.residuals.len()
    }

    pub fn residuals(&self) -> &[ExprAst] {
        &self.residuals
    }
}

/// Wraps a parsed problem as a [`ResidualProblem`] with numeric q-Jacobian
/// only and no domain guard.
pub fn to_vector_field(p: &ParsedProblem) -> Result<ResidualProblem, ModelError> {
    let exprs = p.residuals.to_vec();
    let field = VectorField::new(p.n, p.residuals.len(), move |x| {
        exprs.iter().map(|e| e.eval(x)).collect()
    });
    ResidualProblem::new(p.name.clone(), field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_str(src: &str, n: usize, x: &[f64]) -> f64 {
        parse(src, n).unwrap().eval(x)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(eval_str("x1 + 2*x2", 2, &[1.0, 2.0]), 5.0);
        assert_eq!(eval_str("2+3*4", 0, &[]), 14.0);
        assert_eq!(eval_str("2*3+4*5", 0, &[]), 26.0);
        assert_eq!(eval_str("(2+3)*4", 0, &[]), 20.0);
        assert_eq!(eval_str("7", 0, &[]), 7.0);
        assert_eq!(eval_str("2 - -3", 0, &[]), 5.0);
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        assert_eq!(eval_str("-x1^2", 1, &[2.0]), -4.0);
        assert_eq!(eval_str("(-x1)^2", 1, &[2.0]), 4.0);
        assert_eq!(eval_str("2^-3", 0, &[]), 0.125);
        // Right-associative: 2^(3^2).
        assert_eq!(eval_str("2^3^2", 0, &[]), 512.0);
        assert_eq!(eval_str("x1^2*3", 1, &[2.0]), 12.0);
    }

    #[test]
    fn number_formats() {
        assert_eq!(eval_str("1.5e2", 0, &[]), 150.0);
        assert_eq!(eval_str("2.5E-1", 0, &[]), 0.25);
        assert_eq!(eval_str(".5", 0, &[]), 0.5);
        assert_eq!(eval_str("3.", 0, &[]), 3.0);
    }

    #[test]
    fn functions_and_the_reference_objective() {
        let f = parse("2 - (exp(-x1^2) + 2*exp(-(x1-3)^2))", 1).unwrap();
        let v = f.eval(&[3.0]);
        let oracle = -(-9.0_f64).exp();
        assert!((v - oracle).abs() < 1e-15);
        // The minimum value quoted for this objective is about -1.2348e-4.
        assert!((v + 1.2348e-4).abs() < 1e-6);
        assert!((eval_str("sqrt(abs(-9))", 0, &[]) - 3.0).abs() < 1e-15);
        assert!((eval_str("sin(0) + cos(0)", 0, &[]) - 1.0).abs() < 1e-15);
        assert!((eval_str("ln(exp(2))", 0, &[]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eval_is_total_over_poles() {
        let f = parse("x1/(x1+0.1)", 1).unwrap();
        assert!(!f.eval(&[-0.1]).is_finite());
        let g = parse("ln(x1)", 1).unwrap();
        assert!(g.eval(&[-1.0]).is_nan());
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("2 +", 0).unwrap_err() {
            ParseError::Syntax { offset, .. } => assert_eq!(offset, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse("(2", 0).unwrap_err() {
            ParseError::Syntax { offset, expected } => {
                assert_eq!(offset, 2);
                assert_eq!(expected, "')'");
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse("2x1", 1).unwrap_err() {
            ParseError::Syntax { offset, .. } => assert_eq!(offset, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("", 0).is_err());
        match parse("exp 2", 0).unwrap_err() {
            ParseError::Syntax { expected, .. } => {
                assert_eq!(expected, "'(' after a function name")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identifier_errors() {
        match parse("foo(2)", 0).unwrap_err() {
            ParseError::UnknownIdentifier { offset, name } => {
                assert_eq!(offset, 0);
                assert_eq!(name, "foo");
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse("x0 + 1", 2).unwrap_err() {
            ParseError::VarIndexOutOfRange {
                index: 0, dim: 2, ..
            } => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse("x1 + x3", 2).unwrap_err() {
            ParseError::VarIndexOutOfRange {
                offset: 5,
                index: 3,
                dim: 2,
            } => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "-x1^2",
            "2 - (exp(-x1^2) + 2*exp(-(x1-3)^2))",
            "x1/(x2+0.1)*3",
        ] {
            let ast = parse(src, 2).unwrap();
            let printed = ast.to_string();
            let reparsed = parse(&printed, 2).unwrap();
            assert_eq!(ast, reparsed, "source {src:?} printed as {printed:?}");
        }
    }

    #[test]
    fn parsed_problem_validation() {
        let ok = ParsedProblem::new(2, vec![parse("x1+x2", 2).unwrap()]).unwrap();
        assert_eq!(ok.parameter_count(), 2);
        assert_eq!(ok.residual_count(), 1);
        let bad = ParsedProblem::new(1, vec![parse("x1+x2", 2).unwrap()]);
        assert!(matches!(
            bad,
            Err(ParseError::VarIndexOutOfRange {
                index: 2,
                dim: 1,
                ..
            })
        ));
    }

    #[test]
    fn vector_field_wrapping() {
        let p = ParsedProblem::new(1, vec![parse("x1", 1).unwrap()])
            .unwrap()
            .with_name("ident");
        let problem = to_vector_field(&p).unwrap();
        assert_eq!(problem.name(), "ident");
        assert!(!problem.has_analytic_q_jacobian());
        let result =
            crate::solver::gauss_newton(&problem, &[5.0], &crate::solver::SolveConfig::default());
        assert_eq!(result.status, crate::solver::SolveStatus::Converged);
        assert!(result.final_x[0].abs() < 1e-12);

        // m < n cannot form a residual problem.
        let wide = ParsedProblem::new(2, vec![parse("x1+x2", 2).unwrap()]).unwrap();
        assert!(to_vector_field(&wide).is_err());
    }
}
