//! How many distinct name-sequence shapes a policy space produces.

use super::LabelError;

fn check_dimension(d: u32) -> Result<(), LabelError> {
    if d == 0 {
        return Err(LabelError::InvalidDimension(d));
    }
    Ok(())
}

/// Number of policies of length `d`: 4^d.
pub fn count_policies(d: u32) -> Result<u128, LabelError> {
    check_dimension(d)?;
    4u128.checked_pow(d).ok_or(LabelError::CountOverflow(d))
}

/// Number of policies of length `d` whose labels have `length` names:
/// 2^d * binomial(d, length - d).
///
/// Each of the `length - d` dual positions is chosen among `d`, and every
/// position then has two letters to choose from.
pub fn count_policies_by_length(d: u32, length: u32) -> Result<u128, LabelError> {
    check_dimension(d)?;
    if length < d || length > 2 * d {
        return Err(LabelError::LengthOutOfRange { d, length });
    }
    let k = length - d;
    let mut binom: u128 = 1;
    for i in 0..k {
        binom = binom
            .checked_mul(u128::from(d - i))
            .ok_or(LabelError::CountOverflow(d))?
            / u128::from(i + 1);
    }
    2u128
        .checked_pow(d)
        .and_then(|p| p.checked_mul(binom))
        .ok_or(LabelError::CountOverflow(d))
}
