//! 2x2 matrices, the involution families of SL(2,E) and their conjugator certificates.

mod conjugator;
mod involution;
mod mat;
mod sample;

pub use conjugator::{
    conj_cond_check, conjugator_to_diagonal, conjugator_to_sigma, fixed_ends,
    h_theta_sigma_membership, CaseTag, ConjugatorCertificate, Target,
};
pub use involution::{
    apply_involution, fixed_point_test, verify_involution, Family, Gamma, Involution,
};
pub use mat::Mat2;
pub use sample::{
    draw_case_parameters, h_theta_a_element, h_theta_a_sample, random_sl2, random_sl2_exact,
};

use thiserror::Error;

use crate::padic::PadicError;

/// Digits of slack allowed for accumulated products when testing equality at precision.
pub const SLACK: u32 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Sl2Error {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("not an involution: residual {0} digits")]
    NotAnInvolution(f64),
    #[error("case condition undecidable: {0} is zero only to within precision")]
    CaseUndecidable(String),
    #[error("no admissible c: {0}")]
    NoAdmissibleC(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Exact-zero test for case dispatch: exact zero is zero, a known nonzero digit is nonzero, and
/// a value whose known digits all vanish cannot be decided.
pub(crate) fn decide_zero(x: &crate::padic::Padic, what: &str) -> Result<bool, Sl2Error> {
    if x.is_exact_zero() {
        Ok(true)
    } else if x.is_zero() {
        Err(Sl2Error::CaseUndecidable(what.to_string()))
    } else {
        Ok(false)
    }
}
