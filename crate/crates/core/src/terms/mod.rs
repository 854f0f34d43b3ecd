//! A term language for composed free operations.

mod ast;
mod eval;
mod normalize;
mod parse;
mod rules;
mod typing;
mod witness;

pub use ast::Term;
pub use eval::{eval, eval_closed, Env};
pub use normalize::{is_normal_form, normalize};
pub use parse::parse;
pub use rules::{rule, rules, RewriteRule};
pub use typing::{typecheck, typecheck_with, Linearity, TypingContext};
pub use witness::{deterministic_term, noncontextual_to_term};
