//! Surface expressions: parsing, second-order jets and parametric surfaces.

pub mod expr;
pub mod jet;
pub mod parser;
pub mod surface;

pub use expr::{BinOp, EvalError, Expr, Func, Var};
pub use jet::Jet2;
pub use parser::{parse, ParseError};
pub use surface::{
    sampled_diagonal, DefinitionError, Domain, ParametricSurface, Surface, SurfaceError, SurfaceJet, Vec3,
};
