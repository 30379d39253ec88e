//! Scalars of F_p and dense Gaussian elimination over them.

use std::fmt;

use crate::error::{Error, Result};

/// One of the supported primes 2, 3 or 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u8);

impl Prime {
    pub const TWO: Prime = Prime(2);
    pub const THREE: Prime = Prime(3);
    pub const FIVE: Prime = Prime(5);

    pub fn new(p: u64) -> Result<Prime> {
        match p {
            2 | 3 | 5 => Ok(Prime(p as u8)),
            _ => Err(Error::UnsupportedPrime(p)),
        }
    }

    #[inline]
    pub fn get(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u16 * b as u16) % self.0 as u16) as u8
    }

    /// Multiplicative inverse of a nonzero scalar.
    pub fn inv(self, a: u8) -> u8 {
        assert!(a % self.0 != 0, "inverse of zero in F_{}", self.0);
        (1..self.0).find(|&b| self.mul(a, b) == 1).unwrap()
    }

    /// Reduce an arbitrary integer into `{0, ..., p-1}`.
    #[inline]
    pub fn reduce(self, v: i64) -> u8 {
        v.rem_euclid(self.0 as i64) as u8
    }

    /// `p^e` as a `u128`, or `None` on overflow.
    pub fn pow(self, e: u32) -> Option<u128> {
        (self.0 as u128).checked_pow(e)
    }

    pub fn dot(self, a: &[u8], b: &[u8]) -> u8 {
        let s: u32 = a.iter().zip(b).map(|(&x, &y)| x as u32 * y as u32).sum();
        (s % self.0 as u32) as u8
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bring `rows` into reduced row echelon form in place; returns pivot columns.
/// Zero rows are removed.
pub fn rref(p: Prime, rows: &mut Vec<Vec<u8>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = p.inv(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = p.mul(*v, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v = p.sub(*v, p.mul(f, pv));
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(p: Prime, rows: &[Vec<u8>]) -> usize {
    let mut m = rows.to_vec();
    rref(p, &mut m).len()
}

/// Basis of `{x : row . x = 0 for every row}` in a space of dimension `ncols`,
/// returned in reduced echelon form.
pub fn null_space(p: Prime, rows: &[Vec<u8>], ncols: usize) -> Vec<Vec<u8>> {
    let mut m: Vec<Vec<u8>> = rows.iter().filter(|r| r.iter().any(|&v| v != 0)).cloned().collect();
    let pivots = rref(p, &mut m);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u8; ncols];
        v[free] = 1;
        for (row, &pc) in m.iter().zip(&pivots) {
            v[pc] = p.neg(row[free]);
        }
        basis.push(v);
    }
    rref(p, &mut basis);
    basis
}

/// Solve `A x = b` where `A` is given by rows. Returns one solution or `None`.
pub fn solve(p: Prime, a: &[Vec<u8>], b: &[u8], ncols: usize) -> Option<Vec<u8>> {
    let mut aug: Vec<Vec<u8>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let pivots = rref(p, &mut aug);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![0u8; ncols];
    for (row, &pc) in aug.iter().zip(&pivots) {
        x[pc] = row[ncols];
    }
    Some(x)
}

/// Inverse of a square matrix given by rows, or `None` if singular.
pub fn inverse(p: Prime, m: &[Vec<u8>]) -> Option<Vec<Vec<u8>>> {
    let n = m.len();
    let mut aug: Vec<Vec<u8>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u8::from(i == j)));
            r
        })
        .collect();
    let pivots = rref(p, &mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverses_in_each_field() {
        for p in [Prime::TWO, Prime::THREE, Prime::FIVE] {
            for a in 1..p.get() {
                assert_eq!(p.mul(a, p.inv(a)), 1);
            }
        }
        assert!(Prime::new(7).is_err());
    }

    #[test]
    fn null_space_of_small_system() {
        let p = Prime::THREE;
        let ns = null_space(p, &[vec![1, 1, 0], vec![0, 1, 1]], 3);
        assert_eq!(ns, vec![vec![1, 2, 1]]);
    }

    #[test]
    fn inverse_round_trip() {
        let p = Prime::FIVE;
        let m = vec![vec![1, 2], vec![3, 4]];
        let inv = inverse(p, &m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s = (0..2).fold(0, |acc, t| p.add(acc, p.mul(m[i][t], inv[t][j])));
                assert_eq!(s, u8::from(i == j));
            }
        }
        assert!(inverse(Prime::TWO, &[vec![1, 1], vec![1, 1]]).is_none());
    }

    #[test]
    fn solve_detects_inconsistency() {
        let p = Prime::TWO;
        assert!(solve(p, &[vec![1, 1], vec![1, 1]], &[0, 1], 2).is_none());
        assert_eq!(solve(p, &[vec![1, 0], vec![0, 1]], &[1, 1], 2), Some(vec![1, 1]));
    }
}
