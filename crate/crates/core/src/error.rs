use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    NotPrime(u64),
    #[error("modulus {0} is below the supported minimum of 13")]
    ModulusTooSmall(u64),
    #[error("modulus {0} exceeds 2^61")]
    ModulusTooLarge(u64),
    #[error("operands belong to different fields")]
    ModulusMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative exponent applied to zero")]
    NegativePowerOfZero,
    #[error("exponent must be positive")]
    NonPositiveExponent,
    #[error("group exponent does not fit in 128 bits")]
    ExponentOverflow,
    #[error("element does not satisfy g^E = 1 for the supplied exponent")]
    BadExponent,
    #[error("matrix has determinant different from one")]
    NotSpecial,
    #[error("matrix is singular")]
    Singular,
    #[error("identity has no involution factorization")]
    IdentityFactor,
    #[error("matrix is not a rotation with a one-dimensional fixed axis")]
    NoAxis,
    #[error("handle does not belong to this group")]
    ForeignHandle,
    #[error("malformed handle: {0}")]
    MalformedHandle(String),
    #[error("elements come from different PGL2 setups")]
    MixedSetups,
    #[error("letter refers to an entry outside the torus alphabets")]
    ForeignLetter,
    #[error("torus alphabets are empty")]
    EmptyAlphabet,
    #[error("retry budget exhausted in {0}")]
    BudgetExhausted(&'static str),
    #[error("element is not an involution")]
    NotInvolution,
    #[error("all homogeneous coordinates are zero")]
    ZeroPoint,
    #[error("point is isotropic and carries no involution")]
    IsotropicPoint,
    #[error("degenerate anchor configuration")]
    DegenerateAnchors,
    #[error("involution image failed the sharp-action check")]
    ImageMismatch,
    #[error("no center-coset lift has the requested order {0}")]
    NoMatchingLift(u128),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
