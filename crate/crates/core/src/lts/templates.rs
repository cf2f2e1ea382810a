use std::sync::OnceLock;

use crate::lang::ast::{Pattern, CONS};
use crate::lang::lexer::GENERATED_PRAGMA;
use crate::lang::machine::Skeleton;
use crate::lang::{parse_program_with, Name, ParseOptions};

use super::{build_function_lts, Lts};

/// The recursive clause of a skeleton's definition, as a graph.
///
/// Only the clause that consumes a list cell is kept; how the list ends is
/// decided by the matcher, since the encoded lists a candidate walks end
/// either with `[]` or with a cell for which the candidate stops.
#[derive(Clone, Debug)]
pub struct SkeletonTemplate {
    pub skeleton: Skeleton,
    pub lts: Lts,
    /// Parameter position of the list.
    pub list_pos: usize,
    /// Head and tail variables bound by the list pattern.
    pub element: Name,
    pub tail: Name,
}

const SOURCES: &[(Skeleton, &str)] = &[
    (Skeleton::Map, "map (x : xs) f = f x : map xs f;;"),
    (Skeleton::MapReduce, "mapReduce (x : xs) g v f = g (f x) (mapReduce xs g v f);;"),
    (Skeleton::MapReduce1, "mapReduce1 (x : xs) g f = g (f x) (mapReduce1 xs g f);;"),
];

impl SkeletonTemplate {
    fn from_source(skeleton: Skeleton, src: &str) -> SkeletonTemplate {
        let src = format!("{GENERATED_PRAGMA}\n{src}\nmain = 0;;");
        let opts = ParseOptions { require_exhaustive: false, with_prelude: false };
        let prog = parse_program_with(&src, opts).expect("template parses");
        let lts = build_function_lts(&prog, skeleton.name()).expect("template builds");
        let (pats, _) = lts.clauses(lts.start)[0];
        let list_pos = pats.iter().position(|p| !p.is_var()).expect("template matches a list");
        let (element, tail) = match &pats[list_pos] {
            Pattern::Con(c, ps) if c == CONS => (ps[0].vars()[0].clone(), ps[1].vars()[0].clone()),
            _ => unreachable!("template list pattern"),
        };
        SkeletonTemplate { skeleton, lts, list_pos, element, tail }
    }

    /// Names of the skeleton's function parameters.
    pub fn params(&self) -> Vec<Name> {
        let (pats, _) = self.lts.clauses(self.lts.start)[0];
        pats.iter().filter(|p| p.is_var()).flat_map(Pattern::vars).collect()
    }
}

/// Templates for every registered skeleton, in the order the identifier
/// tries them.
pub fn builtin_templates() -> &'static [SkeletonTemplate] {
    static T: OnceLock<Vec<SkeletonTemplate>> = OnceLock::new();
    T.get_or_init(|| {
        let mut out: Vec<SkeletonTemplate> =
            SOURCES.iter().map(|(s, src)| SkeletonTemplate::from_source(*s, src)).collect();
        let rank = |s: Skeleton| match s {
            Skeleton::MapReduce => 0,
            Skeleton::MapReduce1 => 1,
            Skeleton::Map => 2,
        };
        out.sort_by_key(|t| rank(t.skeleton));
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn registry_is_exactly_the_three_skeletons() {
        let names: BTreeSet<&str> = builtin_templates().iter().map(|t| t.skeleton.name()).collect();
        assert_eq!(names, ["map", "mapReduce", "mapReduce1"].into_iter().collect());
    }

    #[test]
    fn templates_are_single_recursive_clauses() {
        for t in builtin_templates() {
            assert_eq!(t.lts.clauses(t.lts.start).len(), 1);
            assert_eq!(t.lts.back_edges.len(), 1);
            assert_eq!(t.list_pos, 0);
            assert_eq!((t.element.as_str(), t.tail.as_str()), ("x", "xs"));
        }
        let mr = builtin_templates().iter().find(|t| t.skeleton == Skeleton::MapReduce).unwrap();
        assert_eq!(mr.params(), ["g", "v", "f"]);
    }
}
