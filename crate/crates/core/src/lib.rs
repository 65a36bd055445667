//! Exact computational laboratory for collinear triples in permutation
//! graphs over GF(q) and for minimal Besicovitch line covers of the affine
//! plane: field and plane arithmetic, collinearity structure, graph
//! classification and point identities, cover constructions and duality,
//! and symmetry-reduced exhaustive searches with machine-checkable
//! certificates.

pub mod collinear;
pub mod field;
pub mod kakeya;
pub mod permgraph;
pub mod plane;
pub mod report;
pub mod search;
