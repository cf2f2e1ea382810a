use std::fmt;

use super::ast::{Expr, Name, CONS, NIL};

/// A fully evaluated result. Functions are read back into closed lambda
/// terms so that values can cross thread boundaries and be compared.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Con(Name, Vec<Value>),
    Closure { param: Name, body: Expr },
}

impl Value {
    pub fn nil() -> Value {
        Value::Con(NIL.into(), vec![])
    }

    pub fn list(items: impl IntoIterator<Item = Value>) -> Value {
        let items: Vec<Value> = items.into_iter().collect();
        items.into_iter().rev().fold(Value::nil(), |t, h| Value::Con(CONS.into(), vec![h, t]))
    }

    pub fn int_matrix(rows: &[Vec<i64>]) -> Value {
        Value::list(rows.iter().map(|r| Value::list(r.iter().map(|&n| Value::Int(n)))))
    }

    /// Elements of a proper list value.
    pub fn as_list(&self) -> Option<Vec<&Value>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Value::Con(c, args) if c == CONS => {
                    out.push(&args[0]);
                    cur = &args[1];
                }
                Value::Con(c, _) if c == NIL => return Some(out),
                _ => return None,
            }
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn to_int_matrix(&self) -> Option<Vec<Vec<i64>>> {
        self.as_list()?.into_iter().map(|row| row.as_list()?.into_iter().map(Value::as_int).collect()).collect()
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Int(n) => Expr::Int(*n),
            Value::Con(c, args) => Expr::Con(c.clone(), args.iter().map(Value::to_expr).collect()),
            Value::Closure { param, body } => Expr::Lam(param.clone(), Box::new(body.clone())),
        }
    }

    /// Number of constructor and integer nodes.
    pub fn size(&self) -> usize {
        match self {
            Value::Int(_) | Value::Closure { .. } => 1,
            Value::Con(_, args) => 1 + args.iter().map(Value::size).sum::<usize>(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_print_as_literals() {
        let v = Value::int_matrix(&[vec![1, 2], vec![]]);
        assert_eq!(v.to_string(), "[[1, 2], []]");
        assert_eq!(v.to_int_matrix().unwrap(), vec![vec![1, 2], vec![]]);
    }
}
