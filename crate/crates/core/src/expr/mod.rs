//! A small expression language for coordinate functions.
//!
//! Scenario files describe metrics, fields, pressures and potentials as
//! strings in this language. Expressions are parsed into an [`Expr`] tree that
//! can be printed back, evaluated at a point and differentiated symbolically,
//! so every field built from text carries exact partial derivatives.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | power ;
//! power    = primary [ "^" unary ] ;
//! primary  = number | variable | function "(" expr ")" | "(" expr ")" ;
//! variable = "t" | "x" digit { digit } ;
//! function = "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt"
//!          | "sinh" | "cosh" | "tanh" | "abs" ;
//! number   = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ] ;
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x1^2`
//! is `-(x1^2)` and `2^3^2` is `2^(3^2)`. A minus sign directly in front of a
//! numeric literal that is not itself raised to a power folds into the
//! literal: `-2*x1` parses as `Num(-2) * x1`.

mod ast;
mod diff;
mod eval;
mod parse;
mod print;

pub use ast::{BinOp, Expr, Func, Var};
pub use eval::{Bindings, Chart};
pub use parse::{parse_expr, ParseError};

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}
