pub mod compile;
pub mod dsl;
pub mod epset;
pub mod index;
pub mod pseries;
pub mod scalar;
pub mod setsys;

pub use epset::{EpSet, EpSetError, PeriodicityParams};
pub use index::{Enumerated, IndexSet};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
pub type RatSeries = pseries::Series<Rational>;
pub type RatMatrix = pseries::Matrix<Rational>;
pub type RatExpr = pseries::Expr<Rational>;
pub type RatSystem = pseries::PsSystem<Rational>;
pub type FloatSeries = pseries::Series<f64>;
pub type FloatMatrix = pseries::Matrix<f64>;

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}
