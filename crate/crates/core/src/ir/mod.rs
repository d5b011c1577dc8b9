//! Syntactic representation of the analyzed logic program.

mod parser;
mod program;
mod term;
mod unify;

pub use parser::{parse_program, ParseError};
pub use program::{
    classify_recursion, rename_apart, Builtin, Clause, ClauseId, CompareOp, EntryDecl, EntryProp,
    FreshIds, Program,
};
pub use term::{PredKey, Symbol, Term, Var, VarId, CONS, NIL};
pub use unify::{mgu, Bindings};
