//! Structured basis labels.
//!
//! Generators carry terms rather than opaque integers so that tensor words,
//! trees and cubes can be read back from a basis and compared structurally.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Sym(String),
    Int(i64),
    Node(String, Vec<Label>),
}

impl Label {
    pub fn sym(s: &str) -> Label {
        Label::Sym(s.to_string())
    }

    pub fn node(head: &str, children: Vec<Label>) -> Label {
        Label::Node(head.to_string(), children)
    }

    /// Tensor word `a ⊗ b ⊗ …`, flattened one level.
    pub fn tensor(parts: Vec<Label>) -> Label {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Label::Node(h, cs) if h == "⊗" => flat.extend(cs),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        Label::Node("⊗".to_string(), flat)
    }

    pub fn boxed(self) -> Box<Label> {
        Box::new(self)
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Label::Node(h, _) => Some(h),
            Label::Sym(s) => Some(s),
            Label::Int(_) => None,
        }
    }

    pub fn children(&self) -> &[Label] {
        match self {
            Label::Node(_, cs) => cs,
            _ => &[],
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Sym(s) => f.write_str(s),
            Label::Int(i) => write!(f, "{i}"),
            Label::Node(h, cs) if h == "⊗" => {
                for (k, c) in cs.iter().enumerate() {
                    if k > 0 {
                        f.write_str("⊗")?;
                    }
                    match c {
                        Label::Node(h2, _) if h2 == "⊗" => write!(f, "({c})")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                Ok(())
            }
            Label::Node(h, cs) => {
                write!(f, "{h}(")?;
                for (k, c) in cs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Label {
        Label::sym(s)
    }
}

impl From<i64> for Label {
    fn from(i: i64) -> Label {
        Label::Int(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn tensor_flattens_and_prints() {
        let t = Label::tensor(vec![Label::tensor(vec!["a".into(), "b".into()]), "c".into()]);
        assert_eq!(t.to_string(), "a⊗b⊗c");
        assert_eq!(Label::node("f", vec![1.into(), "x".into()]).to_string(), "f(1,x)");
    }
}
