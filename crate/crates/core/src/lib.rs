//! Geometric random graphs on metric spaces and the finite-scale model
//! theory around them: generation, g.e.c. probing, first-order recovery of
//! the circle structure from adjacency, the α volume invariant,
//! Ehrenfeucht–Fraïssé play and Urysohn back-and-forth.

pub mod alpha;
pub mod bitset;
pub mod efgame;
pub mod error;
pub mod gec;
pub mod graphgen;
pub mod logic;
pub mod metric;
pub mod rng;
pub mod sampling;
pub mod urysohn;
pub mod recovery;
pub mod spaces;

pub use bitset::VertexSet;
pub use error::{Error, Result};
pub use metric::{MetricViolation, Rational, RationalMetricSpace};
pub use spaces::{Circle, FlatTorus, Point, SpaceDescriptor, Sphere};
pub use graphgen::{GeoGraph, NeighborhoodCache};
pub use sampling::{sample_iid, SampleConfig, SampleSet};
