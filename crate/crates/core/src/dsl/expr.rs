use std::fmt;

use super::jet::Jet2;

/// Surface parameter referenced by an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Power with a constant exponent.
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Arcsinh,
    Arccos,
    Arcsin,
}

impl Func {
    pub const ALL: [Func; 14] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sech,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::Arcsinh,
        Func::Arccos,
        Func::Arcsin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Arcsinh => "arcsinh",
            Func::Arccos => "arccos",
            Func::Arcsin => "arcsin",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, u: Jet2) -> Result<Jet2, EvalError> {
        let domain = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(EvalError::Domain {
                    func: self.name(),
                    arg: u.v,
                })
            }
        };
        match self {
            Func::Sin => Ok(u.sin()),
            Func::Cos => Ok(u.cos()),
            Func::Tan => {
                domain(u.v.cos() != 0.0)?;
                Ok(u.tan())
            }
            Func::Sinh => Ok(u.sinh()),
            Func::Cosh => Ok(u.cosh()),
            Func::Tanh => Ok(u.tanh()),
            Func::Sech => Ok(u.sech()),
            Func::Exp => Ok(u.exp()),
            Func::Ln => {
                domain(u.v > 0.0)?;
                Ok(u.ln())
            }
            Func::Sqrt => {
                // the derivative blows up at zero
                domain(u.v > 0.0)?;
                Ok(u.sqrt())
            }
            Func::Abs => {
                if u.v == 0.0 {
                    return Err(EvalError::NonDifferentiable { func: "abs" });
                }
                Ok(u.abs())
            }
            Func::Arcsinh => Ok(u.asinh()),
            Func::Arccos => {
                domain(u.v.abs() < 1.0)?;
                Ok(u.acos())
            }
            Func::Arcsin => {
                domain(u.v.abs() < 1.0)?;
                Ok(u.asin())
            }
        }
    }
}

/// Parsed expression over the parameters `X`, `Y`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("{func} evaluated outside its domain (argument {arg})")]
    Domain { func: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} is not differentiable at this point")]
    NonDifferentiable { func: &'static str },
    #[error("exponent does not evaluate to a constant")]
    NonConstantExponent,
    #[error("expression evaluated to a non-finite value")]
    NonFinite,
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Value of a constant sub-expression.
    pub fn eval_constant(&self) -> Result<f64, EvalError> {
        if !self.is_constant() {
            return Err(EvalError::NonConstantExponent);
        }
        Ok(self.eval_jet(0.0, 0.0)?.v)
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        Ok(self.eval_jet(x, y)?.v)
    }

    /// Evaluates the expression and all its partial derivatives up to order
    /// two at `(x, y)`.
    pub fn eval_jet(&self, x: f64, y: f64) -> Result<Jet2, EvalError> {
        let j = self.jet_rec(x, y)?;
        if !(j.v.is_finite()
            && j.dx.is_finite()
            && j.dy.is_finite()
            && j.dxx.is_finite()
            && j.dxy.is_finite()
            && j.dyy.is_finite())
        {
            return Err(EvalError::NonFinite);
        }
        Ok(j)
    }

    fn jet_rec(&self, x: f64, y: f64) -> Result<Jet2, EvalError> {
        Ok(match self {
            Expr::Num(v) => Jet2::constant(*v),
            Expr::Pi => Jet2::constant(std::f64::consts::PI),
            Expr::Var(Var::X) => Jet2::var_x(x),
            Expr::Var(Var::Y) => Jet2::var_y(y),
            Expr::Neg(a) => -a.jet_rec(x, y)?,
            Expr::Call(f, a) => f.apply(a.jet_rec(x, y)?)?,
            Expr::Binary(op, a, b) => {
                let ja = a.jet_rec(x, y)?;
                match op {
                    BinOp::Add => ja + b.jet_rec(x, y)?,
                    BinOp::Sub => ja - b.jet_rec(x, y)?,
                    BinOp::Mul => ja * b.jet_rec(x, y)?,
                    BinOp::Div => {
                        let jb = b.jet_rec(x, y)?;
                        if jb.v == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        ja / jb
                    }
                    BinOp::Pow => {
                        let p = b.eval_constant()?;
                        pow_checked(ja, p)?
                    }
                }
            }
        })
    }
}

fn pow_checked(base: Jet2, p: f64) -> Result<Jet2, EvalError> {
    let integer = p.fract() == 0.0;
    if base.v == 0.0 {
        if p < 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        if !integer && p < 2.0 && p != 1.0 {
            return Err(EvalError::NonDifferentiable { func: "^" });
        }
    }
    if base.v < 0.0 && !integer {
        return Err(EvalError::Domain {
            func: "^",
            arg: base.v,
        });
    }
    Ok(base.powf(p))
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Fully parenthesised infix form; parsing it yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "(-{})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(Var::X) => f.write_str("X"),
            Expr::Var(Var::Y) => f.write_str("Y"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
