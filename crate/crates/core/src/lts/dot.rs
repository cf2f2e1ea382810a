use std::fmt::Write;

use super::{Action, Lts, TERMINAL};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. States are circles, the start state a double
/// circle. Application edges into a function state are labelled with the
/// function name.
pub fn to_dot(l: &Lts) -> String {
    let mut out = String::from("digraph lts {\n  rankdir=TB;\n  node [shape=circle, label=\"\"];\n");
    for (i, s) in l.states.iter().enumerate() {
        let shape = if i == l.start { "doublecircle" } else { "circle" };
        let label = match (&s.function, i) {
            (Some(f), _) => escape(f),
            (None, TERMINAL) => "0".to_string(),
            _ => String::new(),
        };
        let _ = writeln!(out, "  s{i} [shape={shape}, label=\"{label}\"];");
    }
    for (i, s) in l.states.iter().enumerate() {
        for (a, t) in &s.edges {
            let label = match (a, &l.states[*t].function) {
                (Action::App, Some(f)) => format!("@({f})"),
                _ => a.to_string(),
            };
            let style = if l.back_edges.contains(&(i, *t)) { ", style=dashed" } else { "" };
            let _ = writeln!(out, "  s{i} -> s{t} [label=\"{}\"{style}];", escape(&label));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_expr_in, parse_program};
    use crate::lts::{build_expr_lts, build_function_lts};

    #[test]
    fn lambda_graph() {
        let p = parse_program("main = 0;;").unwrap();
        let e = parse_expr_in(&p, "\\x. x").unwrap();
        let d = to_dot(&build_expr_lts(&p, &e).unwrap());
        assert!(d.starts_with("digraph lts {"));
        assert!(d.contains("label=\"\\\\x\""), "{d}");
        assert!(d.contains("label=\"x\""));
        assert!(d.contains("doublecircle"));
    }

    #[test]
    fn recursive_calls_are_labelled() {
        let p = parse_program("len [] = 0;; len (x : xs) = 1 + len xs;; main xs = len xs;;").unwrap();
        let d = to_dot(&build_function_lts(&p, "len").unwrap());
        assert!(d.contains("label=\"@(len)\", style=dashed"), "{d}");
        assert!(d.contains("label=\"(x : xs)\""), "{d}");
    }
}
