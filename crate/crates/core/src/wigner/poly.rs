//! Hermite and Laguerre polynomials by three-term recurrence.

/// Physicists' Hermite polynomial `H_k(x)`.
pub fn hermite(k: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for j in 1..k {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Laguerre polynomial `L_k(x)`.
pub fn laguerre(k: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 - x) * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln(k!)`, summed directly.
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}
