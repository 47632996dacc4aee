use super::ast::{BinOp, Expr, Func, Var};
use crate::error::{Error, PointDisplay, Result};

/// Coordinate layout of a chart.
///
/// With `time == true`, coordinate 0 is `t` and coordinates `1..dim` are
/// `x1..x{dim-1}`. Otherwise coordinates `0..dim` are `x1..x{dim}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chart {
    pub dim: usize,
    pub time: bool,
}

impl Chart {
    pub fn spatial(dim: usize) -> Self {
        Chart { dim, time: false }
    }

    /// A chart `(t, x1..x{spatial_dim})`.
    pub fn spacetime(spatial_dim: usize) -> Self {
        Chart {
            dim: spatial_dim + 1,
            time: true,
        }
    }

    pub fn spatial_dim(&self) -> usize {
        if self.time {
            self.dim - 1
        } else {
            self.dim
        }
    }

    pub fn var(&self, index: usize) -> Var {
        match (self.time, index) {
            (true, 0) => Var::T,
            (true, k) => Var::X(k as u32),
            (false, k) => Var::X(k as u32 + 1),
        }
    }

    pub fn index_of(&self, var: Var) -> Option<usize> {
        let idx = match (self.time, var) {
            (_, Var::X(0)) | (false, Var::T) => return None,
            (true, Var::T) => 0,
            (true, Var::X(i)) => i as usize,
            (false, Var::X(i)) => i as usize - 1,
        };
        (idx < self.dim).then_some(idx)
    }

    pub fn bindings<'a>(&self, coords: &'a [f64]) -> Bindings<'a> {
        if self.time {
            Bindings::spacetime(coords)
        } else {
            Bindings::spatial(coords)
        }
    }

    /// Fails with `UnknownVariable` if `expr` references a variable outside this chart.
    pub fn check(&self, expr: &Expr) -> Result<()> {
        for var in expr.variables() {
            if self.index_of(var).is_none() {
                return Err(Error::UnknownVariable {
                    name: var.to_string(),
                    dim: self.dim,
                });
            }
        }
        Ok(())
    }
}

/// Values for `t` and `x1..xn` during evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Bindings<'a> {
    t: Option<f64>,
    x: &'a [f64],
}

impl<'a> Bindings<'a> {
    pub fn new(t: Option<f64>, x: &'a [f64]) -> Self {
        Bindings { t, x }
    }

    pub fn spatial(x: &'a [f64]) -> Self {
        Bindings { t: None, x }
    }

    /// `coords[0]` is `t`, the rest are `x1..`.
    pub fn spacetime(coords: &'a [f64]) -> Self {
        match coords.split_first() {
            Some((t, x)) => Bindings { t: Some(*t), x },
            None => Bindings { t: None, x: coords },
        }
    }

    pub fn get(&self, var: Var) -> Result<f64> {
        let found = match var {
            Var::T => self.t,
            Var::X(i) => (i as usize)
                .checked_sub(1)
                .and_then(|k| self.x.get(k).copied()),
        };
        found.ok_or_else(|| Error::UnknownVariable {
            name: var.to_string(),
            dim: self.x.len() + usize::from(self.t.is_some()),
        })
    }

    fn point(&self) -> PointDisplay {
        let mut p: Vec<f64> = self.t.into_iter().collect();
        p.extend_from_slice(self.x);
        PointDisplay(p)
    }

    fn domain(&self, message: impl Into<String>) -> Error {
        Error::Domain {
            message: message.into(),
            point: self.point(),
        }
    }
}

impl Expr {
    /// Evaluates the expression. Fails on unknown variables, on `ln`/`sqrt`
    /// outside their domain, division by zero, and any non-finite result.
    pub fn eval(&self, b: &Bindings<'_>) -> Result<f64> {
        let value = match self {
            Expr::Num(c) => *c,
            Expr::Var(v) => b.get(*v)?,
            Expr::Neg(a) => -a.eval(b)?,
            Expr::Bin(op, lhs, rhs) => {
                let x = lhs.eval(b)?;
                let y = rhs.eval(b)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(b.domain(format!("division by zero in `{self}`")));
                        }
                        x / y
                    }
                    BinOp::Pow => {
                        let r = x.powf(y);
                        if r.is_nan() {
                            return Err(b.domain(format!("{x}^{y} is undefined")));
                        }
                        r
                    }
                }
            }
            Expr::Call(func, arg) => {
                let x = arg.eval(b)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(b.domain(format!("ln of non-positive value {x}")));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(b.domain(format!("sqrt of negative value {x}")));
                        }
                        x.sqrt()
                    }
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Abs => x.abs(),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(b.domain(format!("`{self}` overflowed")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_expr;
    use super::*;

    #[test]
    fn evaluates_time_square() {
        let e = parse_expr("t^2").unwrap();
        assert_eq!(e.eval(&Bindings::new(Some(3.0), &[])).unwrap(), 9.0);
    }

    #[test]
    fn domain_errors_carry_point() {
        let e = parse_expr("ln(x1)").unwrap();
        match e.eval(&Bindings::spatial(&[-1.0])) {
            Err(Error::Domain { point, .. }) => assert_eq!(point.0, vec![-1.0]),
            other => panic!("unexpected {other:?}"),
        }
        let e = parse_expr("1/(x1-x1)").unwrap();
        assert!(matches!(e.eval(&Bindings::spatial(&[2.0])), Err(Error::Domain { .. })));
        let e = parse_expr("sqrt(x1)").unwrap();
        assert!(e.eval(&Bindings::spatial(&[-1e-3])).is_err());
        let e = parse_expr("exp(x1)").unwrap();
        assert!(e.eval(&Bindings::spatial(&[1e4])).is_err());
    }

    #[test]
    fn unknown_variable() {
        let e = parse_expr("x3 + t").unwrap();
        assert!(matches!(
            e.eval(&Bindings::spatial(&[1.0, 2.0])),
            Err(Error::UnknownVariable { .. })
        ));
        assert!(Chart::spatial(2).check(&e).is_err());
        assert!(Chart::spacetime(3).check(&e).is_ok());
    }

    #[test]
    fn chart_index_mapping() {
        let st = Chart::spacetime(2);
        assert_eq!(st.var(0), Var::T);
        assert_eq!(st.var(2), Var::X(2));
        assert_eq!(st.index_of(Var::X(1)), Some(1));
        let sp = Chart::spatial(2);
        assert_eq!(sp.var(0), Var::X(1));
        assert_eq!(sp.index_of(Var::T), None);
        assert_eq!(sp.index_of(Var::X(3)), None);
    }
}
