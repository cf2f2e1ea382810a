//! Builtin functions available to every program: the native arithmetic
//! primitives and the list functions written in the language itself.

use std::sync::OnceLock;

use super::ast::{FunDef, Name};
use super::lexer::GENERATED_PRAGMA;
use super::parser::{parse_program_with, ParseOptions};
use super::subst::rename_funs;

/// Strict integer primitives evaluated natively.
pub const PRIMITIVES: &[&str] = &["+", "*"];

/// Names of the skeleton functions recognised by the identifier.
pub const SKELETONS: &[&str] = &["map", "mapReduce", "mapReduce1"];

const SOURCE: &str = "
map [] f = [];;
map (x : xs) f = f x : map xs f;;
mapReduce [] g v f = v;;
mapReduce (x : xs) g v f = g (f x) (mapReduce xs g v f);;
mapReduce1 (x : xs) g f = mapReduce1#go x xs g f;;
mapReduce1#go x [] g f = f x;;
mapReduce1#go x (y : ys) g f = g (f x) (mapReduce1#go y ys g f);;
init (x : xs) = init#go x xs;;
init#go x [] = [];;
init#go x (y : ys) = x : init#go y ys;;
append#prim [] ys = ys;;
append#prim (x : xs) ys = x : append#prim xs ys;;
main = [];;
";

/// User-visible prelude names.
pub fn prelude_names() -> impl Iterator<Item = Name> {
    ["map", "mapReduce", "mapReduce1", "init", "++"].into_iter().map(String::from)
}

pub fn is_builtin(name: &str) -> bool {
    PRIMITIVES.contains(&name) || lookup(name).is_some()
}

pub fn defs() -> &'static [FunDef] {
    static DEFS: OnceLock<Vec<FunDef>> = OnceLock::new();
    DEFS.get_or_init(|| {
        let src = format!("{GENERATED_PRAGMA}\n{SOURCE}");
        let opts = ParseOptions { require_exhaustive: false, with_prelude: false };
        let prog = parse_program_with(&src, opts).expect("prelude parses");
        let renames = [("append#prim".to_string(), "++".to_string())].into_iter().collect();
        prog.defs
            .into_iter()
            .map(|d| FunDef {
                name: if d.name == "append#prim" { "++".into() } else { d.name },
                clauses: d
                    .clauses
                    .into_iter()
                    .map(|c| super::ast::Clause { params: c.params, body: rename_funs(&c.body, &renames) })
                    .collect(),
            })
            .collect()
    })
}

pub fn lookup(name: &str) -> Option<&'static FunDef> {
    defs().iter().find(|d| d.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prelude_defines_skeletons() {
        for s in SKELETONS {
            assert!(lookup(s).is_some(), "{s}");
        }
        assert_eq!(lookup("++").unwrap().arity(), 2);
        assert!(is_builtin("+"));
        assert!(!is_builtin("foldr"));
    }
}
