use super::ast::{BinOp, Expr, Func, Var};

impl Expr {
    /// Exact symbolic partial derivative with respect to `var`.
    pub fn differentiate(&self, var: Var) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(v) => Expr::Num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(a.differentiate(var)),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                let (da, db) = (a.differentiate(var), b.differentiate(var));
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db)),
                    BinOp::Div => Expr::div(
                        Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db)),
                        Expr::pow(b.clone(), Expr::Num(2.0)),
                    ),
                    BinOp::Pow => {
                        if db.is_zero() {
                            // c * a^(c-1) * a'
                            let lowered = Expr::pow(a.clone(), Expr::sub(b.clone(), Expr::Num(1.0)));
                            Expr::mul(Expr::mul(b.clone(), lowered), da)
                        } else if da.is_zero() {
                            Expr::mul(
                                Expr::mul(self.clone(), Expr::apply(Func::Ln, a.clone())),
                                db,
                            )
                        } else {
                            // a^b * (b' ln a + b a'/a)
                            Expr::mul(
                                self.clone(),
                                Expr::add(
                                    Expr::mul(db, Expr::apply(Func::Ln, a.clone())),
                                    Expr::div(Expr::mul(b.clone(), da), a.clone()),
                                ),
                            )
                        }
                    }
                }
            }
            Expr::Call(func, a) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return Expr::Num(0.0);
                }
                let a = a.as_ref().clone();
                let two = || Expr::Num(2.0);
                let outer = match func {
                    Func::Sin => Expr::apply(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::apply(Func::Sin, a)),
                    Func::Tan => Expr::div(
                        Expr::Num(1.0),
                        Expr::pow(Expr::apply(Func::Cos, a), two()),
                    ),
                    Func::Exp => Expr::apply(Func::Exp, a),
                    Func::Ln => return Expr::div(da, a),
                    Func::Sqrt => {
                        return Expr::div(da, Expr::mul(two(), Expr::apply(Func::Sqrt, a)))
                    }
                    Func::Sinh => Expr::apply(Func::Cosh, a),
                    Func::Cosh => Expr::apply(Func::Sinh, a),
                    Func::Tanh => Expr::div(
                        Expr::Num(1.0),
                        Expr::pow(Expr::apply(Func::Cosh, a), two()),
                    ),
                    Func::Abs => Expr::div(a.clone(), Expr::apply(Func::Abs, a)),
                };
                Expr::mul(outer, da)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_expr, Bindings};
    use super::*;

    fn d(src: &str, var: Var) -> Expr {
        parse_expr(src).unwrap().differentiate(var)
    }

    #[test]
    fn polynomial_derivative_is_simplified() {
        assert_eq!(d("x1^2 + x2^2", Var::X(1)), parse_expr("2*x1").unwrap());
        assert_eq!(d("x1^2 + x2^2", Var::T), Expr::Num(0.0));
        assert_eq!(d("3*x1 + 4*x2", Var::X(2)), Expr::Num(4.0));
    }

    #[test]
    fn log_cosh_derivative_is_tanh() {
        let e = d("ln(cosh(x1))", Var::X(1));
        let value = e.eval(&Bindings::spatial(&[1.0])).unwrap();
        assert!((value - 1f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn variable_exponent() {
        // d/dx 2^x = 2^x ln 2
        let e = d("2^x1", Var::X(1));
        let v = e.eval(&Bindings::spatial(&[3.0])).unwrap();
        assert!((v - 8.0 * 2f64.ln()).abs() < 1e-12);
        // d/dx x^x = x^x (ln x + 1)
        let e = d("x1^x1", Var::X(1));
        let v = e.eval(&Bindings::spatial(&[2.0])).unwrap();
        assert!((v - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-12);
    }
}
