use std::fmt;
use std::ops::{Add, Mul, Neg};

use super::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "z" => Some(Var::Z),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
        }
    }

    fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::Z => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Ln, Func::Sqrt, Func::Abs];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

/// Expression tree over the coordinates x, y, z.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// Binding strength used by the printer; mirrors the parser's grammar levels.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    pub fn constant(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(f: Func, arg: Expr) -> Self {
        Expr::Call(f, Box::new(arg))
    }

    /// Evaluates the expression at the point `(x, y, z)`.
    ///
    /// Fails on division by zero, `ln` of a non-positive value, `sqrt` of a
    /// negative value, or any non-finite intermediate. The error carries the
    /// printed form of the node that failed.
    pub fn eval(&self, p: [f64; 3]) -> Result<f64, ExprError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => p[v.index()],
            Expr::Neg(c) => -c.eval(p)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval(p)?;
                let b = r.eval(p)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(self.eval_error("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, arg) => {
                let a = arg.eval(p)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(self.eval_error("logarithm of a non-positive value"));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(self.eval_error("square root of a negative value"));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                }
            }
        };
        if !v.is_finite() {
            return Err(self.eval_error("non-finite result"));
        }
        Ok(v)
    }

    fn eval_error(&self, message: &str) -> ExprError {
        ExprError::Eval {
            node: self.to_string(),
            message: message.to_string(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
            Expr::Neg(_) => PREC_UNARY,
            Expr::Binary(op, ..) => match op {
                BinOp::Add | BinOp::Sub => PREC_SUM,
                BinOp::Mul | BinOp::Div => PREC_PRODUCT,
                BinOp::Pow => PREC_POWER,
            },
        }
    }

    /// Renders every non-atomic subexpression inside its own parentheses.
    pub fn to_fully_parenthesized(&self) -> String {
        match self {
            Expr::Const(c) => format!("{c}"),
            Expr::Var(v) => v.name().to_string(),
            Expr::Neg(c) => format!("(-{})", c.to_fully_parenthesized()),
            Expr::Binary(op, l, r) => format!(
                "({}{}{})",
                l.to_fully_parenthesized(),
                op.symbol(),
                r.to_fully_parenthesized()
            ),
            Expr::Call(f, a) => format!("{}({})", f.name(), a.to_fully_parenthesized()),
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, rhs)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Minimal-parenthesis rendering. Parsing the output yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(c) => {
                f.write_str("-")?;
                c.write_child(f, c.precedence() < PREC_UNARY)
            }
            Expr::Binary(BinOp::Pow, l, r) => {
                // right-associative; the exponent may itself be a negation
                l.write_child(f, l.precedence() <= PREC_POWER)?;
                f.write_str("^")?;
                r.write_child(f, r.precedence() < PREC_UNARY)
            }
            Expr::Binary(op, l, r) => {
                let p = self.precedence();
                l.write_child(f, l.precedence() < p)?;
                write!(f, "{}", op.symbol())?;
                r.write_child(f, r.precedence() <= p)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
