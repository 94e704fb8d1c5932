use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HdError {
    #[error("D = {0} is not squarefree")]
    NotSquarefree(i64),
    #[error("D = {0} is not in the supported class-number-one whitelist")]
    UnsupportedField(i64),
    #[error("arguments are not coprime (chain ended at a non-unit)")]
    NotCoprime,
    #[error("division by zero")]
    DivisionByZero,
    #[error("enumeration cap exceeded: more than {0} terms qualify")]
    CapExceeded(usize),
    #[error("matrix is not quasi-elliptic")]
    NotQuasiElliptic,
    #[error("matrix is not elliptic of finite order <= 12")]
    NotElliptic,
    #[error("matrix has a parabolic embedding")]
    NotClassifiable,
    #[error("element is not prime")]
    NotPrime,
    #[error("element is not totally positive")]
    NotTotallyPositive,
    #[error("sign condition violated: {0}")]
    SignCondition(&'static str),
    #[error("reduction did not terminate within {0} steps")]
    NonTermination(usize),
    #[error("unit does not stabilise the module")]
    NotStable,
    #[error("determinant is not 1")]
    BadDeterminant,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, HdError>;
