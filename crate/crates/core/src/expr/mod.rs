//! Exact symbolic differential functions.

mod coeff;
mod diffexpr;
mod parse;
pub mod rational;
mod upoly;

use thiserror::Error;

pub use coeff::{Coeff, CoeffAtom, TrigKind, Wave, XFactor};
pub use diffexpr::{DiffExpr, JetPoint, Monomial, MultiIndex};
pub use parse::{parse_expr, parse_upoly};
pub use rational::Rational;
pub use upoly::{UKey, UPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("exponent at position {pos} is not a non-negative integer")]
    BadExponent { pos: usize },
    #[error("literal at position {pos} is not an exact rational")]
    NonRational { pos: usize },
    #[error("unknown symbol '{name}' at position {pos}")]
    UnknownSymbol { pos: usize, name: String },
    #[error("product leaves the coefficient class: two oscillatory/exponential factors in x{}", .coord + 1)]
    Closure { coord: usize },
    #[error("u_t may appear at most linearly")]
    UtPower,
    #[error("{source} (at position {pos})")]
    At {
        pos: usize,
        #[source]
        source: Box<ExprError>,
    },
}

impl ExprError {
    pub(crate) fn at(self, pos: usize) -> ExprError {
        match self {
            e @ (ExprError::Closure { .. } | ExprError::UtPower) => ExprError::At {
                pos,
                source: Box::new(e),
            },
            e => e,
        }
    }
}

#[cfg(test)]
mod props;
