//! Network documents: parsing, open-loop assembly, reduction and canonical output.
//!
//! A document is one JSON object:
//!
//! ```text
//! { "hilbert_dim": 2,
//!   "components": [ { "name": "c1", "inputs": ["a"], "form": "slh",
//!                     "S": [[OpLit]], "L": [OpLit], "H": OpLit } ],
//!   "connections": [ { "from": "c1.out[a]", "to": "c2.in[a]" } ] }
//! ```
//!
//! An `OpLit` is either `[re, im]` (a multiple of the identity) or a `d x d`
//! array of `[re, im]` pairs. Strat components carry `"E"`, a `(1+n) x (1+n)`
//! array with the `0` row and column first. Channel `p` of component `c` is
//! labelled `c.p` in assembled models.

mod build;
mod examples;
mod parse;
mod reduce;
mod serialize;

pub use build::{build_open_loop, OpenLoop};
pub use examples::bundled_examples;
pub use parse::parse_network;
pub use reduce::{reduce_network, ReductionResult, Route};
pub use serialize::{serialize_model, serialize_spec, REDUCED_NAME};

use std::fmt;

use crate::block::{Label, LabelSet, LabeledBlockMatrix};
use crate::error::{Error, Result};
use crate::linalg::{Operator, Tolerances};
use crate::models::{generator_labels, SlhModel, StratGenerator};

/// Matrices of one component, as declared.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Slh {
        s: Vec<Vec<Operator>>,
        l: Vec<Operator>,
        h: Operator,
    },
    Strat {
        e: Vec<Vec<Operator>>,
    },
}

impl Payload {
    pub fn form(&self) -> &'static str {
        match self {
            Payload::Slh { .. } => "slh",
            Payload::Strat { .. } => "strat",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDecl {
    pub name: String,
    pub inputs: Vec<String>,
    pub payload: Payload,
}

impl ComponentDecl {
    /// `name.port` for every input, in declaration order.
    pub fn channel_labels(&self) -> Result<LabelSet> {
        LabelSet::new(
            self.inputs
                .iter()
                .map(|p| Label::new(format!("{}.{p}", self.name)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// The component as an SLH model, converting from Stratonovich form if needed.
    pub fn slh(&self, tol: &Tolerances) -> Result<SlhModel> {
        let channels = self.channel_labels()?;
        match &self.payload {
            Payload::Slh { s, l, h } => {
                let d = h.dim();
                let s = LabeledBlockMatrix::from_blocks(channels.clone(), channels.clone(), d, s.concat())?;
                SlhModel::new(channels, s, l.clone(), h.clone(), tol)
            }
            Payload::Strat { .. } => self.strat(tol)?.to_slh(tol),
        }
    }

    /// The component as a Stratonovich generator, converting from SLH form if needed.
    pub fn strat(&self, tol: &Tolerances) -> Result<StratGenerator> {
        match &self.payload {
            Payload::Slh { .. } => StratGenerator::from_slh(&self.slh(tol)?, tol),
            Payload::Strat { e } => {
                let labels = generator_labels(&self.channel_labels()?);
                let d = e[0][0].dim();
                let m = LabeledBlockMatrix::from_blocks(labels.clone(), labels, d, e.concat())?;
                StratGenerator::new(m, tol)
            }
        }
    }
}

/// `component.out[port]` or `component.in[port]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PortRef {
    pub component: String,
    pub port: String,
}

impl PortRef {
    pub fn label(&self) -> String {
        format!("{}.{}", self.component, self.port)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub from: PortRef,
    pub to: PortRef,
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.out[{}] -> {}.in[{}]",
            self.from.component, self.from.port, self.to.component, self.to.port
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub hilbert_dim: usize,
    pub components: Vec<ComponentDecl>,
    pub connections: Vec<Connection>,
}

impl NetworkSpec {
    /// A document holding one component and no connections.
    pub fn single(name: &str, inputs: Vec<String>, payload: Payload, hilbert_dim: usize) -> Self {
        Self {
            hilbert_dim,
            components: vec![ComponentDecl {
                name: name.to_string(),
                inputs,
                payload,
            }],
            connections: Vec::new(),
        }
    }

    pub fn component(&self, name: &str) -> Option<&ComponentDecl> {
        self.components.iter().find(|c| c.name == name)
    }

    /// The only component of a one-component document.
    pub fn sole_component(&self) -> Result<&ComponentDecl> {
        match self.components.as_slice() {
            [c] => Ok(c),
            other => Err(Error::InvalidValue(format!(
                "expected a single-component document, found {} components",
                other.len()
            ))),
        }
    }
}

/// Payload for an SLH model, with `S` and `L` laid out in channel order.
pub fn slh_payload(m: &SlhModel) -> Payload {
    let k = m.channels();
    Payload::Slh {
        s: k
            .iter()
            .map(|r| k.iter().map(|c| m.s().entry(r, c).unwrap().clone()).collect())
            .collect(),
        l: m.l_ops(),
        h: m.h().clone(),
    }
}

/// Payload for a Stratonovich generator, `0` row and column first.
pub fn strat_payload(e: &StratGenerator) -> Payload {
    let labels = e.matrix().rows().clone();
    Payload::Strat {
        e: labels
            .iter()
            .map(|r| labels.iter().map(|c| e.matrix().entry(r, c).unwrap().clone()).collect())
            .collect(),
    }
}
