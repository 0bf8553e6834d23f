//! Smallest distortion compatible with the collapse inequalities.

use crate::bitgraphs::Family;
use crate::error::{argument, Error, Result};
use crate::spaces::DeltaProvider;

/// The scale `c` in `δ(c/D)` used by each family's collapse argument.
pub fn delta_scale(family: Family) -> Result<f64> {
    match family {
        Family::Tree | Family::Laakso => Ok(0.5),
        Family::Diamond => Ok(1.0),
        other => Err(argument(format!("no collapse argument for {other} graphs"))),
    }
}

/// The threshold `D*` where `D (1 − δ(c/D))^n` reaches 1, found by
/// bisection; every factorization constant is at least `D*`.
///
/// For trees `n` indexes `B_{2^n}`. Returns 1 when `δ` vanishes at
/// `D = 1`.
pub fn lower_bound_solve(family: Family, n: usize, delta: &dyn DeltaProvider) -> Result<f64> {
    let c = delta_scale(family)?;
    let g = |d: f64| d * (1.0 - delta.delta(c / d)).powi(n as i32);
    if n == 0 || g(1.0) >= 1.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while g(hi) < 1.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::Precondition(format!(
                "D (1 − δ({c}/D))^{n} stays below 1; is δ monotone?"
            )));
        }
    }
    // Bisect until the bracket cannot shrink in floating point.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
