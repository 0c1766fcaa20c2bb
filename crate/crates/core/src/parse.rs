//! Text parsers shared by the CLI and the fuzz targets.

use crate::error::{Error, Result};
use crate::moments::FockIndex;
use crate::steering::{Direction, Path};
use crate::wigner::Observable;

/// `N,M,L`, optionally parenthesized.
pub fn fock(s: &str) -> Result<FockIndex> {
    s.parse()
}

/// `x2y`, `x->y` or `xy`.
pub fn direction(s: &str) -> Result<Direction> {
    s.parse()
}

/// `moments`, `closed`/`closed_form` or `oracle`.
pub fn path(s: &str) -> Result<Path> {
    s.parse()
}

/// `+`-separated sum of lab monomials such as `x^2*py^2 + z^2`.
pub fn observable(s: &str) -> Result<Observable> {
    s.parse()
}

/// `LO,HI` with finite `LO < HI`.
pub fn bracket(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected LO,HI, got {s:?}")))?;
    let lo = real(lo)?;
    let hi = real(hi)?;
    if lo >= hi {
        return Err(Error::Parse(format!("bracket needs LO < HI, got {s:?}")));
    }
    Ok((lo, hi))
}

/// A finite real number.
pub fn real(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("number must be finite, got {s:?}")))
    }
}
