//! Read-current error of a cross-point and the arrangement of `n` devices
//! that minimizes the worst-case error.
//!
//! Wire drop is taken to grow linearly with the cross-point index, so the
//! error at 1-based position `(r, c)` is `k_wire * (r + c)` and the worst
//! cell of an `R x C` block is the far corner `(R, C)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrangement {
    pub rows: usize,
    pub cols: usize,
    pub k_wire: f64,
}

pub fn read_error(r: i64, c: i64, k_wire: f64) -> Result<f64> {
    if r < 1 || c < 1 {
        return Err(Error::NonPositiveIndex { r, c });
    }
    Ok(k_wire * (r + c) as f64)
}

pub fn max_read_error(a: &Arrangement) -> f64 {
    a.k_wire * (a.rows + a.cols) as f64
}

/// All `(R, C)` with `R * C = n`, in increasing `R`.
pub fn factorizations(n: usize) -> Vec<(usize, usize)> {
    (1..=n).filter(|r| n % r == 0).map(|r| (r, n / r)).collect()
}

/// Square-like arrangement: the divisor pair with the smallest `R + C`,
/// reported with `R <= C`.
pub fn best_arrangement(n: usize, k_wire: f64) -> Result<Arrangement> {
    if n < 1 {
        return Err(Error::InvalidConfig("crossbar needs n >= 1".into()));
    }
    // The largest divisor not exceeding sqrt(n) gives the minimal sum.
    let mut rows = (n as f64).sqrt() as usize;
    while rows * rows > n {
        rows -= 1;
    }
    while (rows + 1) * (rows + 1) <= n {
        rows += 1;
    }
    while n % rows != 0 {
        rows -= 1;
    }
    Ok(Arrangement {
        rows,
        cols: n / rows,
        k_wire,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn read_error_examples() {
        assert_eq!(read_error(1, 1, 0.3).unwrap(), 0.6);
        assert_eq!(read_error(3, 7, 1.0).unwrap(), read_error(7, 3, 1.0).unwrap());
        assert_eq!(read_error(5, 9, 0.0).unwrap(), 0.0);
        assert!(read_error(0, 2, 1.0).is_err());
        assert!(read_error(2, -1, 1.0).is_err());
    }

    #[test]
    fn max_error_examples() {
        let k = 1.0;
        let one = Arrangement { rows: 1, cols: 1, k_wire: k };
        assert_eq!(max_read_error(&one), 2.0);
        let square = Arrangement { rows: 8, cols: 8, k_wire: k };
        let line = Arrangement { rows: 1, cols: 64, k_wire: k };
        assert_eq!(max_read_error(&square), 16.0);
        assert_eq!(max_read_error(&line), 65.0);
        let scaled = Arrangement { k_wire: 2.5, ..square };
        assert_eq!(max_read_error(&scaled), 2.5 * 16.0);
    }

    #[test]
    fn best_arrangement_examples() {
        let a = best_arrangement(36, 1.0).unwrap();
        assert_eq!((a.rows, a.cols), (6, 6));
        let a = best_arrangement(2, 1.0).unwrap();
        assert_eq!((a.rows, a.cols), (1, 2));
        let a = best_arrangement(1, 1.0).unwrap();
        assert_eq!((a.rows, a.cols), (1, 1));
        let a = best_arrangement(12, 1.0).unwrap();
        assert_eq!((a.rows, a.cols), (3, 4));
        assert!(best_arrangement(0, 1.0).is_err());
    }

    #[test]
    fn read_error_monotone() {
        for r in 1..20 {
            for c in 1..20 {
                let e = read_error(r, c, 0.7).unwrap();
                assert!(read_error(r + 1, c, 0.7).unwrap() > e);
                assert!(read_error(r, c + 1, 0.7).unwrap() > e);
            }
        }
    }
}
