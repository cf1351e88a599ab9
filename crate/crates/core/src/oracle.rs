//! Ground truths computed independently of the recursion engines.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::arith::binomial;
use crate::error::{Error, Result};

/// Rational plane curves of degree `d` through `3d - 1` general points.
pub fn kontsevich(d: u32) -> Result<BigUint> {
    if d < 1 {
        return Err(Error::Validation(format!("kontsevich: degree {d} < 1")));
    }
    let mut n: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for d in 2..=d as u64 {
        let mut acc = BigInt::zero();
        for d1 in 1..d {
            let d2 = d - d1;
            let a = BigInt::from(binomial(3 * d - 4, 3 * d1 - 2)) * d2;
            let b = BigInt::from(binomial(3 * d - 4, 3 * d1 - 1)) * d1;
            acc += &n[d1 as usize] * &n[d2 as usize] * (d1 * d1 * d2) * (a - b);
        }
        n.push(acc);
    }
    n.pop()
        .and_then(|v| v.to_biguint())
        .ok_or_else(|| Error::Assertion(format!("kontsevich({d}) negative")))
}

/// `4^n C(n + 2, 2)`.
pub fn closed_form_blowup(n: u32) -> BigUint {
    BigUint::from(4u32).pow(n) * binomial(n as u64 + 2, 2)
}

/// `sum_{m=0}^{n} 2^m sum_{k=0}^{n-m} C(k+3, 3) C(2n+4-m, n-m-k)`.
pub fn lando_sum(n: u32) -> BigUint {
    let n = n as u64;
    let mut total = BigUint::zero();
    for m in 0..=n {
        let inner = (0..=n - m).fold(BigUint::zero(), |acc, k| {
            acc + binomial(k + 3, 3) * binomial(2 * n + 4 - m, n - m - k)
        });
        total += (BigUint::one() << m) * inner;
    }
    total
}

pub fn lando_identity(n: u32) -> bool {
    closed_form_blowup(n) == lando_sum(n)
}
