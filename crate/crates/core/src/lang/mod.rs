//! The source language: syntax, parsing, printing, evaluation and the
//! program-level transformations it needs (lambda lifting, distilled-form
//! validation).

pub mod ast;
pub mod check;
pub mod distilled;
pub mod eval;
pub mod lexer;
pub mod lift;
pub mod machine;
pub mod names;
pub mod parser;
pub mod prelude;
pub mod pretty;
pub mod resolve;
pub mod step;
pub mod subst;
pub mod value;

pub use ast::{Clause, CtorDecl, Expr, FunDef, Name, Pattern, Program, Type, TypeDecl};
pub use distilled::validate_distilled;
pub use eval::{evaluate, evaluate_expr, DEFAULT_FUEL};
pub use lift::lambda_lift;
pub use parser::{parse_expr_in, parse_program, parse_program_with, ParseOptions};
pub use pretty::program_to_string;
pub use subst::{free_vars, substitute};
pub use value::Value;
