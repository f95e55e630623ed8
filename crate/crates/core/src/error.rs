use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not a square")]
    NotASquare,
    #[error("operands live over different fields")]
    SpecMismatch,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("forms of degree {left} and {right} cannot be added")]
    DegreeMismatch { left: usize, right: usize },
    #[error("division is not exact")]
    InexactDivision,
    #[error("the zero form has no degree")]
    ZeroForm,
    #[error("extension of order {order} exceeds the enumeration limit {limit}")]
    ExtensionTooLarge { order: u64, limit: u64 },
    #[error("Gram determinant vanishes identically")]
    DegenerateForm,
    #[error("invalid fibration: {0}")]
    InvalidSpec(String),
    #[error("no integer twist normalizes the degree pattern")]
    Inconsistent,
    #[error("no squarefree sample after {tries} tries")]
    SamplingExhausted { tries: u64 },
    #[error("search needs {needed} candidates but the budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("not enough interpolation points off the discriminant (need {needed})")]
    NotEnoughInterpolationPoints { needed: usize },
    #[error("constraint point {0} lies on the discriminant")]
    ConstraintOnDiscriminant(String),
    #[error("constraint point is not on the fiber quadric over {0}")]
    ConstraintOffQuadric(String),
    #[error("point is not on the fiber quadric")]
    PointNotOnQuadric,
    #[error("fiber is singular")]
    SingularFiber,
    #[error("lines lie in different fibers")]
    FiberMismatch,
    #[error("fiber quadric has no rational point")]
    NoRationalFiberPoint,
    #[error("line is not isotropic in the fiber")]
    LineNotIsotropic,
    #[error("line is not defined over the base field")]
    LineNotRational,
    #[error("fiber at the transformation point is singular")]
    SingularFiberAtP,
    #[error("no graded automorphism moves the line into position")]
    NoGradedAutomorphism,
    #[error("section does not lie on the input fibration")]
    SectionNotOnInput,
    #[error("classes have different relative dimensions")]
    DimensionMismatch,
    #[error("class is not top-dimensional")]
    NotTopDimensional,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}
