use std::fmt;

use super::ast::{BinOp, Expr};

// Binding strength of the grammar level that produced a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Sum,
    Product,
    Unary,
    Power,
    Atom,
}

fn level(e: &Expr) -> Level {
    match e {
        Expr::Num(c) if c.is_sign_negative() => Level::Unary,
        Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => Level::Atom,
        Expr::Neg(_) => Level::Unary,
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => Level::Sum,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => Level::Product,
        Expr::Bin(BinOp::Pow, ..) => Level::Power,
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn is_nonneg_literal(e: &Expr) -> bool {
    matches!(e, Expr::Num(c) if !c.is_sign_negative())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Expr::Neg(inner) => {
                write!(f, "-")?;
                // `-2` would re-parse as the literal -2, so keep the node visible.
                let parens = is_nonneg_literal(inner) || level(inner) < Level::Unary;
                wrap(f, inner, parens)
            }
            Expr::Bin(op, lhs, rhs) => {
                let (lp, rp) = match op {
                    BinOp::Add | BinOp::Sub => (false, level(rhs) <= Level::Sum),
                    BinOp::Mul | BinOp::Div => {
                        (level(lhs) < Level::Product, level(rhs) <= Level::Product)
                    }
                    BinOp::Pow => (level(lhs) < Level::Atom, level(rhs) < Level::Unary),
                };
                wrap(f, lhs, lp)?;
                write!(f, "{}", op.symbol())?;
                wrap(f, rhs, rp)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_expr;
    use super::*;

    #[test]
    fn prints_minimal_parentheses() {
        for src in [
            "x1^2+x2^2",
            "-x1^2",
            "(x1+x2)*t",
            "x1-(x2-t)",
            "x1/(x2*t)",
            "(-2)^x1",
            "2^3^2",
            "(2^3)^2",
            "-(2)",
            "--2",
            "x1^-2",
            "sin(x1)*cos(t)",
            "-2*x1",
        ] {
            let e = parse_expr(src).unwrap();
            assert_eq!(e.to_string(), src, "printing {src}");
        }
    }

    #[test]
    fn negative_literal_as_power_base_round_trips() {
        let e = Expr::bin(BinOp::Pow, Expr::Num(-2.0), Expr::x(1));
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }
}
