//! Bit-packed linear algebra over GF(2) for small affine systems.
//!
//! A system `A·i + b = 0` has at most 32 unknowns, so every row of `A` fits
//! in one `u32` and the right-hand side bit rides along in bit 32 of a `u64`
//! during elimination. Column `j` of `A` is bit `j` (value `2^j`) of the
//! unknown `i`, which is also how solutions are reported as integers.

use crate::error::{Error, Result};

/// Largest supported number of unknowns.
pub const MAX_COLS: u32 = 32;

const RHS_BIT: u64 = 1 << 32;

#[inline]
fn col_mask(cols: u32) -> u32 {
    if cols >= 32 {
        u32::MAX
    } else {
        (1u32 << cols) - 1
    }
}

/// A binary matrix with at most 32 columns, one packed word per row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: u32,
    rows: Vec<u32>,
}

impl BitMatrix {
    pub fn new(cols: u32) -> Result<Self> {
        if cols > MAX_COLS {
            return Err(Error::domain(format!("{cols} columns exceeds the {MAX_COLS}-column limit")));
        }
        Ok(BitMatrix { cols, rows: Vec::new() })
    }

    pub fn from_rows(cols: u32, rows: Vec<u32>) -> Result<Self> {
        let mut m = BitMatrix::new(cols)?;
        m.rows.reserve(rows.len());
        for r in rows {
            m.push_row(r)?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: u32) -> Result<()> {
        if row & !col_mask(self.cols) != 0 {
            return Err(Error::domain(format!("row {row:#b} has bits beyond column {}", self.cols.saturating_sub(1))));
        }
        self.rows.push(row);
        Ok(())
    }

    #[inline]
    pub fn cols(&self) -> u32 {
        self.cols
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn rows(&self) -> &[u32] {
        &self.rows
    }
}

/// The system `A·i + b = 0` over GF(2).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineSystem {
    a: BitMatrix,
    b: Vec<bool>,
}

impl AffineSystem {
    pub fn new(a: BitMatrix, b: Vec<bool>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::domain(format!("right-hand side has {} bits for {} rows", b.len(), a.nrows())));
        }
        Ok(AffineSystem { a, b })
    }

    /// Empty system in `cols` unknowns (every `i` is a solution).
    pub fn empty(cols: u32) -> Result<Self> {
        Ok(AffineSystem { a: BitMatrix::new(cols)?, b: Vec::new() })
    }

    pub fn push(&mut self, row: u32, b: bool) -> Result<()> {
        self.a.push_row(row)?;
        self.b.push(b);
        Ok(())
    }

    pub fn clear(&mut self) {
        self.a.rows.clear();
        self.b.clear();
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[bool] {
        &self.b
    }

    pub fn cols(&self) -> u32 {
        self.a.cols
    }

    pub fn nrows(&self) -> usize {
        self.b.len()
    }

    /// Checks a single candidate directly, without elimination.
    pub fn is_solution(&self, i: u32) -> bool {
        self.a.rows.iter().zip(&self.b).all(|(&row, &b)| ((row & i).count_ones() & 1 == 1) == b)
    }
}

/// Reduced description of `{i : A·i + b = 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSpace {
    cols: u32,
    consistent: bool,
    rank: u32,
    pivots: Vec<u8>,
    free: Vec<u8>,
    particular: u32,
    // One null-space vector per free column, in ascending column order; the
    // highest set bit of `basis[t]` is `free[t]`.
    basis: Vec<u32>,
}

impl SolutionSpace {
    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn pivot_columns(&self) -> &[u8] {
        &self.pivots
    }

    pub fn free_columns(&self) -> &[u8] {
        &self.free
    }

    /// The solution with every free variable set to zero, if one exists.
    pub fn particular(&self) -> Option<u32> {
        self.consistent.then_some(self.particular)
    }

    pub fn solution_count(&self) -> u64 {
        if self.consistent {
            1u64 << (self.cols - self.rank)
        } else {
            0
        }
    }

    /// Calls `f` on every solution in ascending order, O(1) per solution.
    pub fn for_each_solution(&self, mut f: impl FnMut(u32)) {
        if !self.consistent {
            return;
        }
        // Counting m = 0, 1, 2, ... and selecting basis[t] for each set bit t
        // of m visits the affine space in increasing order, because each
        // basis vector's leading bit is a free column that is zero in the
        // particular solution and in every other basis vector. Going from
        // m-1 to m flips bits 0..=tz(m) of m, hence the prefix XORs.
        let mut flip = Vec::with_capacity(self.basis.len());
        let mut acc = 0u32;
        for &v in &self.basis {
            acc ^= v;
            flip.push(acc);
        }
        let mut val = self.particular;
        f(val);
        let total = self.solution_count();
        for m in 1..total {
            val ^= flip[m.trailing_zeros() as usize];
            f(val);
        }
    }

    pub fn enumerate_solutions(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.solution_count().min(1 << 20) as usize);
        self.for_each_solution(|i| out.push(i));
        out
    }
}

/// Gauss–Jordan elimination, pivoting on columns from bit 0 upwards.
///
/// Rows beyond the rank are reduced to zero; a row that reduces to `0 = 1`
/// stops the elimination and yields an inconsistent space.
pub fn eliminate(sys: &AffineSystem) -> SolutionSpace {
    let cols = sys.cols();
    let mut rows: Vec<u64> =
        sys.a.rows.iter().zip(&sys.b).map(|(&r, &b)| r as u64 | if b { RHS_BIT } else { 0 }).collect();

    let inconsistent = |cols| SolutionSpace {
        cols,
        consistent: false,
        rank: 0,
        pivots: Vec::new(),
        free: Vec::new(),
        particular: 0,
        basis: Vec::new(),
    };

    if rows.contains(&RHS_BIT) {
        return inconsistent(cols);
    }

    let mut rank = 0usize;
    let mut pivots = Vec::new();
    let mut free = Vec::new();
    for c in 0..cols {
        let bit = 1u64 << c;
        let Some(found) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            free.push(c as u8);
            continue;
        };
        rows.swap(rank, found);
        let pivot_row = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= pivot_row;
                if *row == RHS_BIT {
                    return inconsistent(cols);
                }
            }
        }
        pivots.push(c as u8);
        rank += 1;
    }

    // Any remaining row has an all-zero coefficient part; it was either
    // caught above or is the trivial equation 0 = 0.
    debug_assert!(rows[rank..].iter().all(|&r| r == 0));

    let mut particular = 0u32;
    for (r, &p) in pivots.iter().enumerate() {
        if rows[r] & RHS_BIT != 0 {
            particular |= 1 << p;
        }
    }
    let basis = free
        .iter()
        .map(|&f| {
            let fbit = 1u64 << f;
            let mut v = 1u32 << f;
            for (r, &p) in pivots.iter().enumerate() {
                if rows[r] & fbit != 0 {
                    v |= 1 << p;
                }
            }
            v
        })
        .collect();

    SolutionSpace { cols, consistent: true, rank: rank as u32, pivots, free, particular, basis }
}

/// Convenience: eliminate and list every solution in ascending order.
pub fn solve(sys: &AffineSystem) -> Vec<u32> {
    eliminate(sys).enumerate_solutions()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn system(cols: u32, rows: &[(u32, bool)]) -> AffineSystem {
        let mut s = AffineSystem::empty(cols).unwrap();
        for &(r, b) in rows {
            s.push(r, b).unwrap();
        }
        s
    }

    fn brute_force(sys: &AffineSystem) -> Vec<u32> {
        let k = 1u64 << sys.cols();
        (0..k as u32)
            .filter(|&i| {
                sys.matrix().rows().iter().zip(sys.rhs()).all(|(&row, &b)| {
                    let mut parity = false;
                    for j in 0..sys.cols() {
                        if (row >> j) & 1 == 1 && (i >> j) & 1 == 1 {
                            parity = !parity;
                        }
                    }
                    parity == b
                })
            })
            .collect()
    }

    #[test]
    fn identity_system_has_unique_solution() {
        let s = system(2, &[(0b01, true), (0b10, true)]);
        let space = eliminate(&s);
        assert!(space.is_consistent());
        assert_eq!(space.rank(), 2);
        assert_eq!(space.solution_count(), 1);
        assert_eq!(space.enumerate_solutions(), vec![3]);
    }

    #[test]
    fn one_free_variable() {
        let s = system(2, &[(0b11, false)]);
        let space = eliminate(&s);
        assert!(space.is_consistent());
        assert_eq!(space.rank(), 1);
        assert_eq!(space.solution_count(), 2);
        assert_eq!(space.enumerate_solutions(), vec![0, 3]);
    }

    #[test]
    fn zero_row_with_nonzero_target_is_inconsistent() {
        let s = system(2, &[(0b00, true)]);
        let space = eliminate(&s);
        assert!(!space.is_consistent());
        assert_eq!(space.solution_count(), 0);
        assert!(space.enumerate_solutions().is_empty());
    }

    #[test]
    fn overdetermined_consistent_and_inconsistent() {
        // Three equations in two unknowns, third is the sum of the first two.
        let ok = system(2, &[(0b01, true), (0b10, false), (0b11, true)]);
        assert_eq!(solve(&ok), vec![1]);
        let bad = system(2, &[(0b01, true), (0b10, false), (0b11, false)]);
        assert!(!eliminate(&bad).is_consistent());
    }

    #[test]
    fn zero_columns() {
        let s = AffineSystem::empty(0).unwrap();
        assert_eq!(solve(&s), vec![0]);
        let bad = system(0, &[(0, true)]);
        assert!(solve(&bad).is_empty());
    }

    #[test]
    fn rejects_out_of_range_rows() {
        assert!(BitMatrix::from_rows(3, vec![0b1000]).is_err());
        assert!(BitMatrix::new(33).is_err());
        assert!(BitMatrix::from_rows(32, vec![u32::MAX]).is_ok());
        let m = BitMatrix::from_rows(2, vec![1]).unwrap();
        assert!(AffineSystem::new(m, vec![]).is_err());
    }

    #[test]
    fn full_width_enumeration_is_lazy_and_sorted() {
        // 30 free variables out of 32: count without materializing.
        let s = system(32, &[(1, true), (1 << 31, false)]);
        let space = eliminate(&s);
        assert_eq!(space.solution_count(), 1 << 30);
        let mut first = Vec::new();
        let mut n = 0u64;
        space.for_each_solution(|i| {
            if first.len() < 4 {
                first.push(i);
            }
            n += 1;
        });
        assert_eq!(n, 1 << 30);
        assert_eq!(first, vec![1, 3, 5, 7]);
    }

    fn arb_system() -> impl Strategy<Value = AffineSystem> {
        (0u32..=10).prop_flat_map(|cols| {
            let mask = col_mask(cols);
            prop::collection::vec((any::<u32>(), any::<bool>()), 0..14).prop_map(move |rows| {
                let rows: Vec<(u32, bool)> = rows.into_iter().map(|(r, b)| (r & mask, b)).collect();
                system(cols, &rows)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn matches_brute_force(sys in arb_system()) {
            let space = eliminate(&sys);
            let sols = space.enumerate_solutions();
            prop_assert_eq!(&sols, &brute_force(&sys));
            let n = sols.len() as u64;
            prop_assert!(n == 0 || n == 1u64 << (sys.cols() - space.rank()));
            prop_assert_eq!(space.is_consistent(), n > 0);
            prop_assert!(sols.iter().all(|&i| sys.is_solution(i)));
        }

        #[test]
        fn deterministic(sys in arb_system()) {
            prop_assert_eq!(eliminate(&sys), eliminate(&sys.clone()));
        }
    }
}
