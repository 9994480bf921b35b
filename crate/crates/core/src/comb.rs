//! Composition enumeration and overflow-checked multinomials.

use crate::error::{Result, SkgError};

/// Iterates all weak compositions of `total` into `parts` nonnegative
/// summands, in lexicographic order on the composition vector
/// (`(0,...,0,total)` first, `(total,0,...,0)` last).
pub struct Compositions {
    current: Option<Vec<u32>>,
    total: u32,
}

impl Compositions {
    pub fn new(total: u32, parts: usize) -> Self {
        assert!(parts >= 1);
        let mut first = vec![0u32; parts];
        first[parts - 1] = total;
        Compositions { current: Some(first), total }
    }

    /// `C(total + parts - 1, parts - 1)`, the number of compositions.
    pub fn count(total: u32, parts: usize) -> Result<u128> {
        binomial(total as u128 + parts as u128 - 1, parts as u128 - 1)
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.clone()?;
        let m = self.current.as_mut().unwrap();
        let parts = m.len();
        // Find the rightmost index i < parts-1 with mass strictly to its
        // right; move one unit onto it and flush the remainder to the end.
        let mut tail: u32 = 0;
        let mut advanced = false;
        for i in (0..parts - 1).rev() {
            tail += m[i + 1];
            if tail > 0 {
                m[i] += 1;
                for x in m[i + 1..].iter_mut() {
                    *x = 0;
                }
                m[parts - 1] = tail - 1;
                advanced = true;
                break;
            }
        }
        if !advanced {
            debug_assert_eq!(m[0], self.total);
            self.current = None;
        }
        Some(out)
    }
}

/// Binomial coefficient in checked u128 arithmetic.
pub fn binomial(n: u128, k: u128) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k {
        result = result
            .checked_mul(n - k + i)
            .ok_or(SkgError::Overflow("binomial coefficient"))?
            / i;
    }
    Ok(result)
}

/// Multinomial `(sum m)! / prod m_i!` as a product of binomials, each step
/// overflow-checked. Never wraps.
pub fn multinomial(m: &[u32]) -> Result<u128> {
    let mut remaining: u128 = m.iter().map(|&x| x as u128).sum();
    let mut result: u128 = 1;
    for &mi in m {
        let b = binomial(remaining, mi as u128)?;
        result = result
            .checked_mul(b)
            .ok_or(SkgError::Overflow("multinomial coefficient"))?;
        remaining -= mi as u128;
    }
    Ok(result)
}
