//! The builtin corpus of test functions and boxes, loaded from
//! `data/corpus.toml`.

use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::quad::BoxNd;

const SOURCE: &str = include_str!("../data/corpus.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Convex,
    Affine,
    Concave,
    Coordinate,
}

impl Class {
    /// Members every chain and H check must pass on.
    pub fn is_convex(self) -> bool {
        matches!(self, Class::Convex | Class::Affine)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub name: String,
    pub expr: String,
    pub class: Class,
    pub dim: usize,
}

impl Member {
    pub fn parse(&self) -> Result<Expr> {
        Ok(parse(&self.expr)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedBox {
    pub name: String,
    pub bounds: Vec<f64>,
}

impl NamedBox {
    pub fn dim(&self) -> usize {
        self.bounds.len() / 2
    }

    pub fn to_box(&self) -> Result<BoxNd<f64>> {
        BoxNd::from_flat(&self.bounds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    #[serde(rename = "function")]
    pub functions: Vec<Member>,
    #[serde(rename = "box")]
    pub boxes: Vec<NamedBox>,
}

impl FromStr for Corpus {
    type Err = Error;

    /// Parses and validates a corpus document: every expression parses,
    /// has arity at most its declared dimension, names are unique and
    /// every box is well formed.
    fn from_str(s: &str) -> Result<Self> {
        let corpus: Corpus = toml::from_str(s).map_err(|e| Error::Corpus(e.to_string()))?;
        let mut names = std::collections::BTreeSet::new();
        for m in &corpus.functions {
            if !names.insert(m.name.as_str()) {
                return Err(Error::Corpus(format!("duplicate function `{}`", m.name)));
            }
            if !(1..=3).contains(&m.dim) {
                return Err(Error::Corpus(format!(
                    "`{}`: dim must be 1, 2 or 3",
                    m.name
                )));
            }
            let e = m
                .parse()
                .map_err(|e| Error::Corpus(format!("`{}`: {e}", m.name)))?;
            if e.arity() > m.dim {
                return Err(Error::Corpus(format!(
                    "`{}` has arity {} but dim {}",
                    m.name,
                    e.arity(),
                    m.dim
                )));
            }
        }
        for b in &corpus.boxes {
            b.to_box()
                .map_err(|e| Error::Corpus(format!("box `{}`: {e}", b.name)))?;
        }
        Ok(corpus)
    }
}

impl Corpus {
    /// The corpus shipped with the crate.
    pub fn builtin() -> &'static Corpus {
        static CORPUS: OnceLock<Corpus> = OnceLock::new();
        CORPUS.get_or_init(|| SOURCE.parse().expect("builtin corpus is valid"))
    }

    pub fn function(&self, name: &str) -> Option<&Member> {
        self.functions.iter().find(|m| m.name == name)
    }

    pub fn boxes_of_dim(&self, dim: usize) -> impl Iterator<Item = &NamedBox> {
        self.boxes.iter().filter(move |b| b.dim() == dim)
    }

    pub fn of_class(&self, class: Class) -> impl Iterator<Item = &Member> {
        self.functions.iter().filter(move |m| m.class == class)
    }

    /// Every (function, box) pair with matching dimension, in file order.
    pub fn pairs(&self) -> impl Iterator<Item = (&Member, &NamedBox)> {
        self.functions
            .iter()
            .flat_map(move |m| self.boxes_of_dim(m.dim).map(move |b| (m, b)))
    }
}
