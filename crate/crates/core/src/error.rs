use alloc::string::String;

/// Every failure the engine reports.
///
/// Validators that return witnesses (cubical axioms, multicategory axioms)
/// do not use this type; they return a verdict with the first failing instance.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("operands belong to different rings: {0} vs {1}")]
    MixedRings(String, String),
    #[error("exponent {0} is not on the grid 1/{1}")]
    NonGridExponent(String, u32),
    #[error("operation needs a Novikov ring, got {0}")]
    WrongRing(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("division by a non-unit or zero")]
    NotInvertible,
    #[error("d^2 != 0: d(d({element})) = {composite}")]
    NotADifferential { element: String, composite: String },
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("ring {0} unsupported here")]
    UnsupportedRing(String),
    #[error("degree {0} has an infinite basis")]
    InfiniteDegree(i64),
    #[error("complex is not acyclic (degree {0})")]
    NotAcyclic(i64),
    #[error("no lift found in degree {0}")]
    NoLift(i64),
    #[error("group generated in S_{0} exceeds the enumeration bound {1}")]
    GroupTooLarge(usize, usize),
    #[error("action is not by signed permutations")]
    NonPermutationAction,
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("coinvariants have torsion over the integers ({0})")]
    TorsionQuotient(String),
    #[error("edge {0} is external")]
    ExternalEdge(String),
    #[error("bad index {0}")]
    BadIndex(String),
    #[error("bad level {0}")]
    BadLevel(usize),
    #[error("composite of arity {0} exceeds arity_max {1}")]
    ArityOverflow(usize, usize),
    #[error("simplicial truncation {0} too small")]
    TruncationTooSmall(usize),
    #[error("module mismatch: {0}")]
    ModuleMismatch(String),
    #[error("sequence is not non-decreasing: {0}")]
    UnorderedSequence(String),
    #[error("maps are not composable: {0}")]
    NonComposable(String),
    #[error("square does not commute: {0}")]
    NonCommutingSquare(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
