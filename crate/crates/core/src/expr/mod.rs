//! Scalar expressions over `t`, the state `x1..xn` and the small parameter `eps`.
//!
//! Vector-field components are written in a small infix language:
//!
//! ```text
//! x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2
//! ```
//!
//! Precedence from loosest to tightest is `+ -`, then `* /`, then `^`, then
//! unary minus, so `-x1^2` reads as `(-x1)^2` and `2^3^2` as `2^(3^2)`.
//! State variables may also be spelled `u1..un`; both prefixes refer to the
//! same slot, which lets original-form perturbations use their customary
//! names.
//!
//! The nonsmooth primitives `abs`, `sign`, `min` and `max` are where a field
//! loses differentiability. [`Expr::switching_functions`] exposes their
//! arguments so the integrator and the quadrature can split at the zero set.

mod parser;

use std::fmt;

pub use parser::{parse, ParseError, ParseErrorKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Time,
    /// Zero-based state index; printed as `x{index + 1}`.
    State(usize),
    Eps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sign,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Sign,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    pub fn is_nonsmooth(self) -> bool {
        matches!(self, Func::Abs | Func::Sign | Func::Min | Func::Max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainErrorKind {
    LogNonPositive,
    SqrtNegative,
    DivisionByZero,
    NegativeBaseFractionalPower,
    Overflow,
}

impl fmt::Display for DomainErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            DomainErrorKind::LogNonPositive => "log of a nonpositive number",
            DomainErrorKind::SqrtNegative => "sqrt of a negative number",
            DomainErrorKind::DivisionByZero => "division by zero",
            DomainErrorKind::NegativeBaseFractionalPower => "negative base raised to a fractional power",
            DomainErrorKind::Overflow => "overflow to a non-finite value",
        };
        f.write_str(msg)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error: {kind} (argument {argument})")]
    Domain { kind: DomainErrorKind, argument: f64 },
    #[error("state x{} referenced but only {available} components supplied", index + 1)]
    MissingState { index: usize, available: usize },
}

fn domain(kind: DomainErrorKind, argument: f64) -> EvalError {
    EvalError::Domain { kind, argument }
}

fn finite(value: f64, argument: f64) -> Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(DomainErrorKind::Overflow, argument))
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn state(index: usize) -> Expr {
        Expr::Var(Var::State(index))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(func: Func, args: Vec<Expr>) -> Expr {
        Expr::Call(func, args)
    }

    /// Evaluates the expression. `sign(0)` is `0`; domain violations are
    /// reported instead of producing NaN.
    pub fn eval(&self, t: f64, x: &[f64], eps: f64) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Const(c) => Ok(c.value()),
            Expr::Var(Var::Time) => Ok(t),
            Expr::Var(Var::Eps) => Ok(eps),
            Expr::Var(Var::State(i)) => x.get(*i).copied().ok_or(EvalError::MissingState {
                index: *i,
                available: x.len(),
            }),
            Expr::Neg(e) => Ok(-e.eval(t, x, eps)?),
            Expr::Binary(op, a, b) => {
                let a = a.eval(t, x, eps)?;
                let b = b.eval(t, x, eps)?;
                match op {
                    BinOp::Add => finite(a + b, a),
                    BinOp::Sub => finite(a - b, a),
                    BinOp::Mul => finite(a * b, a),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(domain(DomainErrorKind::DivisionByZero, a))
                        } else {
                            finite(a / b, a)
                        }
                    }
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            Err(domain(DomainErrorKind::NegativeBaseFractionalPower, a))
                        } else if a == 0.0 && b < 0.0 {
                            Err(domain(DomainErrorKind::DivisionByZero, a))
                        } else if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
                            finite(a.powi(b as i32), a)
                        } else {
                            finite(a.powf(b), a)
                        }
                    }
                }
            }
            Expr::Call(func, args) => {
                let a = args[0].eval(t, x, eps)?;
                match func {
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Tan => finite(a.tan(), a),
                    Func::Exp => finite(a.exp(), a),
                    Func::Log => {
                        if a <= 0.0 {
                            Err(domain(DomainErrorKind::LogNonPositive, a))
                        } else {
                            Ok(a.ln())
                        }
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            Err(domain(DomainErrorKind::SqrtNegative, a))
                        } else {
                            Ok(a.sqrt())
                        }
                    }
                    Func::Abs => Ok(a.abs()),
                    Func::Sign => Ok(if a > 0.0 {
                        1.0
                    } else if a < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }),
                    Func::Min => Ok(a.min(args[1].eval(t, x, eps)?)),
                    Func::Max => Ok(a.max(args[1].eval(t, x, eps)?)),
                }
            }
        }
    }

    /// Arguments of the nonsmooth primitives, in pre-order. `abs` and `sign`
    /// contribute their argument; `min(a, b)` and `max(a, b)` contribute the
    /// single difference `a - b`.
    pub fn switching_functions(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        self.collect_switching(&mut out);
        out
    }

    fn collect_switching(&self, out: &mut Vec<Expr>) {
        match self {
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(e) => e.collect_switching(out),
            Expr::Binary(_, a, b) => {
                a.collect_switching(out);
                b.collect_switching(out);
            }
            Expr::Call(func, args) => {
                match func {
                    Func::Abs | Func::Sign => out.push(args[0].clone()),
                    Func::Min | Func::Max => {
                        out.push(Expr::binary(BinOp::Sub, args[0].clone(), args[1].clone()))
                    }
                    _ => {}
                }
                for a in args {
                    a.collect_switching(out);
                }
            }
        }
    }

    pub fn nonsmooth_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Neg(e) => e.nonsmooth_count(),
            Expr::Binary(_, a, b) => a.nonsmooth_count() + b.nonsmooth_count(),
            Expr::Call(func, args) => {
                usize::from(func.is_nonsmooth()) + args.iter().map(Expr::nonsmooth_count).sum::<usize>()
            }
        }
    }

    fn any_var(&self, pred: &dyn Fn(Var) -> bool) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Var(v) => pred(*v),
            Expr::Neg(e) => e.any_var(pred),
            Expr::Binary(_, a, b) => a.any_var(pred) || b.any_var(pred),
            Expr::Call(_, args) => args.iter().any(|a| a.any_var(pred)),
        }
    }

    pub fn references_time(&self) -> bool {
        self.any_var(&|v| v == Var::Time)
    }

    pub fn references_state(&self) -> bool {
        self.any_var(&|v| matches!(v, Var::State(_)))
    }

    /// One past the largest state index referenced (0 when none).
    pub fn state_extent(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Const(_) | Expr::Var(Var::Time | Var::Eps) => 0,
            Expr::Var(Var::State(i)) => i + 1,
            Expr::Neg(e) => e.state_extent(),
            Expr::Binary(_, a, b) => a.state_extent().max(b.state_extent()),
            Expr::Call(_, args) => args.iter().map(Expr::state_extent).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized form; parsing it back gives the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Var(Var::Time) => f.write_str("t"),
            Expr::Var(Var::Eps) => f.write_str("eps"),
            Expr::Var(Var::State(i)) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
