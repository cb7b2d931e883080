//! Presentation files, schema `kanbar/1`.
//!
//! A file is one JSON document: a ring descriptor, a bounds record, an
//! ordered list of named objects and a list of expectations. Objects may
//! only refer to objects declared before them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const SCHEMA: &str = "kanbar/1";

#[derive(Clone, Debug, Deserialize)]
pub struct Presentation {
    pub schema: String,
    pub ring: RingDesc,
    #[serde(default)]
    pub bounds: BoundsDesc,
    #[serde(default)]
    pub objects: Vec<ObjectDesc>,
    #[serde(default)]
    pub expect: Vec<Map<String, Value>>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(tag = "kind")]
pub enum RingDesc {
    Z,
    Q,
    Fp { p: u64 },
    #[serde(rename = "novikov")]
    Novikov { base: String, cutoff: String, grid: u32 },
}

/// Every field optional so that `--bounds` can override a subset.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct BoundsDesc {
    pub arity_max: Option<usize>,
    pub n_max: Option<usize>,
    pub degree_window: Option<(i64, i64)>,
    pub seq_len_max: Option<usize>,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct Bounds {
    pub arity_max: usize,
    pub n_max: usize,
    pub degree_window: (i64, i64),
    pub seq_len_max: usize,
}

impl BoundsDesc {
    pub fn merged(&self, over: &BoundsDesc) -> BoundsDesc {
        BoundsDesc {
            arity_max: over.arity_max.or(self.arity_max),
            n_max: over.n_max.or(self.n_max),
            degree_window: over.degree_window.or(self.degree_window),
            seq_len_max: over.seq_len_max.or(self.seq_len_max),
        }
    }

    pub fn resolve(&self) -> Bounds {
        Bounds {
            arity_max: self.arity_max.unwrap_or(2),
            n_max: self.n_max.unwrap_or(3),
            degree_window: self.degree_window.unwrap_or((0, 3)),
            seq_len_max: self.seq_len_max.unwrap_or(2),
        }
    }

    /// `key=value` pairs separated by commas; the window is `a..b`.
    pub fn parse_overrides(s: &str) -> Result<BoundsDesc, String> {
        let mut b = BoundsDesc::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("bound `{part}` is not key=value"))?;
            let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bound {k}: {e}"));
            match k.trim() {
                "arity_max" => b.arity_max = Some(num(v)?),
                "n_max" => b.n_max = Some(num(v)?),
                "seq_len_max" => b.seq_len_max = Some(num(v)?),
                "degree_window" => b.degree_window = Some(parse_range(v)?),
                other => return Err(format!("unknown bound `{other}`")),
            }
        }
        Ok(b)
    }
}

/// `a..b`, inclusive at both ends; `b < a` is the empty range.
pub fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let s = s.trim();
    let (a, b) = s.split_once("..").ok_or_else(|| format!("range `{s}` is not a..b"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let p = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("range `{s}`: {e}"));
    Ok((p(a)?, p(b)?))
}

/// A coefficient: an integer or a string understood by the ring.
#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum Coef {
    Int(i64),
    Text(String),
}

pub type Entry = (String, String, Coef);

#[derive(Clone, Debug, Deserialize)]
pub struct ObjectDesc {
    pub name: String,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
pub enum GradingDesc {
    #[default]
    Z,
    Z2,
}

#[derive(Clone, Debug, Deserialize)]
pub struct CellDesc {
    pub label: String,
    /// Pairs `[d⁻, d⁺]` per coordinate; see [`crate::load`] for cube syntax.
    #[serde(default)]
    pub faces: Vec<(String, String)>,
    /// Labels of the transposed cubes, one per adjacent transposition.
    #[serde(default)]
    pub transp: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct HomDesc {
    pub inputs: Vec<String>,
    pub output: String,
    pub gens: Vec<(String, i64)>,
    #[serde(default)]
    pub d: Vec<Entry>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ComposeDesc {
    pub inner: String,
    pub slot: usize,
    pub outer: String,
    #[serde(default)]
    pub value: Vec<(String, Coef)>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ActionDesc {
    pub of: String,
    pub k: usize,
    #[serde(default)]
    pub value: Vec<(String, Coef)>,
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct FixtureArgs {
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub threshold: Option<usize>,
    pub arity_max: Option<usize>,
    #[serde(default)]
    pub complexes: Vec<String>,
}

fn default_scenarios() -> Vec<String> {
    vec!["phi".into()]
}

fn trivial() -> String {
    "trivial".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Complex {
        gens: Vec<(String, i64)>,
        #[serde(default)]
        d: Vec<Entry>,
        #[serde(default)]
        grading: GradingDesc,
    },
    Map {
        source: String,
        target: String,
        #[serde(default)]
        degree: i64,
        #[serde(default)]
        entries: Vec<Entry>,
    },
    Cubical {
        fixture: Option<String>,
        n_max: Option<usize>,
        #[serde(default)]
        cells: Vec<Vec<CellDesc>>,
    },
    Tree {
        shape: Option<String>,
        leveled: Option<Vec<Vec<usize>>>,
    },
    Multicat {
        fixture: Option<String>,
        #[serde(default)]
        args: FixtureArgs,
        #[serde(default)]
        objects: Vec<String>,
        arity_max: Option<usize>,
        #[serde(default)]
        homs: Vec<HomDesc>,
        #[serde(default)]
        units: BTreeMap<String, String>,
        #[serde(default)]
        compose: Vec<ComposeDesc>,
        /// Absent: every transposition acts by matching labels.
        actions: Option<Vec<ActionDesc>>,
    },
    Functor {
        source: String,
        target: String,
        rule: String,
        object: Option<String>,
    },
    Algebra {
        over: String,
        #[serde(default = "trivial")]
        rule: String,
    },
    Kan {
        functor: String,
        algebra: String,
        n_max: Option<usize>,
        arity_max: Option<usize>,
        #[serde(default = "default_scenarios")]
        scenarios: Vec<String>,
    },
    GroupBar {
        order: usize,
    },
    Sequence {
        complexes: Vec<String>,
        #[serde(default)]
        maps: Vec<String>,
    },
    Continuation {
        map: String,
    },
    HvSquare {
        f: String,
        p: String,
        q: String,
        g: String,
        #[serde(default = "trivial")]
        module: String,
    },
    Tower {
        complex: String,
        map: Option<String>,
        cutoffs: Vec<String>,
    },
    FreeAlgebra {
        over: String,
        complexes: Vec<String>,
    },
    Untangle {
        algebra: String,
        y: Vec<String>,
    },
}

impl Body {
    pub fn kind(&self) -> &'static str {
        match self {
            Body::Complex { .. } => "complex",
            Body::Map { .. } => "map",
            Body::Cubical { .. } => "cubical",
            Body::Tree { .. } => "tree",
            Body::Multicat { .. } => "multicat",
            Body::Functor { .. } => "functor",
            Body::Algebra { .. } => "algebra",
            Body::Kan { .. } => "kan",
            Body::GroupBar { .. } => "group_bar",
            Body::Sequence { .. } => "sequence",
            Body::Continuation { .. } => "continuation",
            Body::HvSquare { .. } => "hv_square",
            Body::Tower { .. } => "tower",
            Body::FreeAlgebra { .. } => "free_algebra",
            Body::Untangle { .. } => "untangle",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0..3"), Ok((0, 3)));
        assert_eq!(parse_range(" -1..=2 "), Ok((-1, 2)));
        assert_eq!(parse_range("2..1"), Ok((2, 1)));
        assert!(parse_range("3").is_err());
        assert!(parse_range("a..2").is_err());
    }

    #[test]
    fn overrides_merge_over_file_bounds() {
        let file = BoundsDesc { n_max: Some(5), arity_max: Some(3), ..BoundsDesc::default() };
        let over = BoundsDesc::parse_overrides("n_max=2, degree_window=1..4").unwrap();
        let b = file.merged(&over).resolve();
        assert_eq!((b.n_max, b.arity_max, b.degree_window, b.seq_len_max), (2, 3, (1, 4), 2));
        assert!(BoundsDesc::parse_overrides("depth=2").is_err());
        assert!(BoundsDesc::parse_overrides("n_max").is_err());
        assert_eq!(BoundsDesc::parse_overrides("").unwrap(), BoundsDesc::default());
    }

    #[test]
    fn objects_are_tagged_by_kind() {
        let o: ObjectDesc = serde_json::from_str(r#"{"name": "c", "kind": "complex", "gens": [["x", 0]]}"#).unwrap();
        assert_eq!(o.body.kind(), "complex");
        let o: ObjectDesc = serde_json::from_str(r#"{"name": "k", "kind": "kan", "functor": "f", "algebra": "a"}"#).unwrap();
        assert!(matches!(o.body, Body::Kan { ref scenarios, .. } if scenarios == &["phi"]));
        assert!(serde_json::from_str::<ObjectDesc>(r#"{"name": "q", "kind": "quiver"}"#).is_err());
    }
}
