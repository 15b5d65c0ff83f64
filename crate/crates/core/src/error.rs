use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("barycentric weights do not sum to one (sum = {0})")]
    MalformedWeights(f64),

    #[error("monomial {exponents:?} has a positive exponent on a coordinate that vanishes on the {entity}")]
    VanishingCoordinate { exponents: [u32; 4], entity: String },

    #[error("degenerate tetrahedron (signed volume {0:e})")]
    DegenerateGeometry(f64),

    #[error("negatively oriented tetrahedron (signed volume {0:e})")]
    NegativeOrientation(f64),

    #[error("quantity `{0}` is irrational for this geometry and has no exact representation")]
    Irrational(&'static str),

    #[error("quadrature degree {degree} outside the supported range 0..={max}")]
    QuadratureDegree { degree: usize, max: usize },

    #[error("quadrature rule of dimension {rule} applied to an entity of dimension {entity}")]
    RuleDimension { rule: usize, entity: usize },

    #[error("enrichment nullspace on face {face} has dimension {found}, expected {expected}")]
    NullspaceDimension { face: usize, found: usize, expected: usize },

    #[error("DOF matrix is singular")]
    SingularDofMatrix,

    #[error("DOF matrix is ill conditioned (estimate {0:e})")]
    IllConditioned(f64),

    #[error("element build failed on tet {tet}: {source}")]
    ElementBuild { tet: usize, source: Box<Error> },

    #[error("non-conforming mesh: face {0:?} has more than two incident tetrahedra")]
    NonConforming([usize; 3]),

    #[error("mesh level {0} outside the supported range 1..=6")]
    MeshLevel(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sparse Cholesky factorization failed: {0}")]
    Factorization(String),

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("solver residual {0:e} exceeds the accepted bound")]
    Residual(f64),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
