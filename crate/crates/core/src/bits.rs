//! Dense linear algebra over the two-element field.
//!
//! Everything downstream (resolutions, spectral sequence pages, coset
//! arithmetic) reduces to rank / kernel / solve on matrices over GF(2), so
//! rows are packed into `u64` words and the elimination kernels work a word
//! at a time. Pivoting is deterministic: lowest column, then lowest row, so
//! repeated runs produce identical bases and identical chart class names.

use std::fmt;

const BITS: usize = 64;

#[inline]
fn words_for(cols: usize) -> usize {
    cols.div_ceil(BITS)
}

/// A vector over GF(2), bit-packed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, b) in bits.iter().enumerate() {
            if *b % 2 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / BITS] >> (i % BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / BITS];
        let mask = 1u64 << (i % BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / BITS] ^= 1u64 << (i % BITS);
    }

    pub fn add_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        for (wi, w) in self.words.iter().enumerate() {
            if *w != 0 {
                return Some(wi * BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |i| self.get(*i))
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(other.words.iter()) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// A dense matrix over GF(2); rows are bit-packed into machine words.
///
/// Row and column counts are immutable after construction; bits outside the
/// `rows x cols` rectangle are never set (the tail word of each row is kept
/// masked).
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    row_words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let row_words = words_for(cols);
        BitMatrix {
            rows,
            cols,
            row_words,
            data: vec![0; rows * row_words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from 0/1 entries, one slice per row.
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = BitMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                if *v % 2 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn from_bitvec_rows(rows: &[BitVec], cols: usize) -> Self {
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            m.set_row(i, r);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.row_words + c / BITS] >> (c % BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols, "({r},{c}) out of range");
        let w = &mut self.data[r * self.row_words + c / BITS];
        let mask = 1u64 << (c % BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row(&self, r: usize) -> BitVec {
        let start = r * self.row_words;
        BitVec {
            len: self.cols,
            words: self.data[start..start + self.row_words].to_vec(),
        }
    }

    pub fn set_row(&mut self, r: usize, v: &BitVec) {
        assert_eq!(v.len, self.cols);
        let start = r * self.row_words;
        self.data[start..start + self.row_words].copy_from_slice(&v.words);
    }

    #[inline]
    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let (sw, dw) = (src * self.row_words, dst * self.row_words);
        if sw == dw {
            return;
        }
        for k in 0..self.row_words {
            let v = self.data[sw + k];
            self.data[dw + k] ^= v;
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            let base = r * self.row_words;
            for (wi, w) in self.data[base..base + self.row_words].iter().enumerate() {
                let mut bits = *w;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    t.set(wi * BITS + b, r, true);
                    bits &= bits - 1;
                }
            }
        }
        t
    }

    /// Matrix-vector product over GF(2).
    pub fn apply(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len, self.cols, "dimension mismatch");
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            let base = r * self.row_words;
            let mut acc = 0u64;
            for k in 0..self.row_words {
                acc ^= self.data[base + k] & v.words[k];
            }
            if acc.count_ones() % 2 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    pub fn multiply(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let base = r * self.row_words;
            let obase = r * out.row_words;
            for (wi, w) in self.data[base..base + self.row_words].iter().enumerate() {
                let mut bits = *w;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    let c = wi * BITS + b;
                    let srow = c * other.row_words;
                    for k in 0..other.row_words {
                        let v = other.data[srow + k];
                        out.data[obase + k] ^= v;
                    }
                    bits &= bits - 1;
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|w| *w == 0)
    }

    /// Reduced row-echelon form together with the pivot columns.
    ///
    /// Pivot choice is lowest column, lowest row, so the output is a
    /// deterministic function of the input.
    pub fn rref(&self) -> (BitMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut next_row = 0;
        for col in 0..m.cols {
            if next_row >= m.rows {
                break;
            }
            let mut pivot = None;
            for r in next_row..m.rows {
                if m.get(r, col) {
                    pivot = Some(r);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            if p != next_row {
                for k in 0..m.row_words {
                    m.data.swap(p * m.row_words + k, next_row * m.row_words + k);
                }
            }
            for r in 0..m.rows {
                if r != next_row && m.get(r, col) {
                    m.xor_row_into(next_row, r);
                }
            }
            pivots.push(col);
            next_row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of the right null space: vectors v with m * v = 0.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let (r, pivots) = self.rref();
        let pivot_of_col: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (i, c) in pivots.iter().enumerate() {
                v[*c] = Some(i);
            }
            v
        };
        let mut basis = Vec::with_capacity(self.cols - pivots.len());
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut v = BitVec::zeros(self.cols);
            v.set(free, true);
            for (i, c) in pivots.iter().enumerate() {
                if r.get(i, free) {
                    v.set(*c, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Some solution x of m * x = b, if one exists.
    pub fn solve(&self, b: &BitVec) -> Option<BitVec> {
        assert_eq!(b.len, self.rows, "rhs length must equal row count");
        // Eliminate on the augmented matrix [m | b].
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            let base = r * self.row_words;
            let abase = r * aug.row_words;
            aug.data[abase..abase + self.row_words]
                .copy_from_slice(&self.data[base..base + self.row_words]);
            if b.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None; // a row (0 .. 0 | 1)
        }
        let mut x = BitVec::zeros(self.cols);
        for (i, c) in pivots.iter().enumerate() {
            if red.get(i, self.cols) {
                x.set(*c, true);
            }
        }
        Some(x)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", u8::from(self.get(r, c)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Row space of a set of vectors, kept in reduced echelon form.
///
/// Used for incremental image/cycle bookkeeping in resolutions and spectral
/// sequence pages.
#[derive(Clone, Debug)]
pub struct Subspace {
    dim_ambient: usize,
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn empty(dim_ambient: usize) -> Self {
        Subspace {
            dim_ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn from_vectors(dim_ambient: usize, vecs: &[BitVec]) -> Self {
        let mut s = Subspace::empty(dim_ambient);
        for v in vecs {
            s.insert(v.clone());
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient(&self) -> usize {
        self.dim_ambient
    }

    /// Reduce v against the subspace; the result is zero iff v is a member.
    pub fn reduce(&self, mut v: BitVec) -> BitVec {
        assert_eq!(v.len(), self.dim_ambient);
        for (row, p) in self.rows.iter().zip(self.pivots.iter()) {
            if v.get(*p) {
                v.add_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v.clone()).is_zero()
    }

    /// Insert v; returns true if it enlarged the subspace.
    pub fn insert(&mut self, v: BitVec) -> bool {
        let v = self.reduce(v);
        let Some(p) = v.first_one() else { return false };
        // Back-reduce existing rows and keep rows sorted by pivot.
        for row in self.rows.iter_mut() {
            if row.get(p) {
                row.add_assign(&v);
            }
        }
        let idx = self.pivots.partition_point(|q| *q < p);
        self.rows.insert(idx, v);
        self.pivots.insert(idx, p);
        true
    }

    pub fn basis(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: enumerate all vectors of length n.
    fn all_vectors(n: usize) -> Vec<BitVec> {
        (0..1usize << n)
            .map(|mask| {
                let mut v = BitVec::zeros(n);
                for i in 0..n {
                    if mask >> i & 1 == 1 {
                        v.set(i, true);
                    }
                }
                v
            })
            .collect()
    }

    fn all_matrices(rows: usize, cols: usize) -> Vec<BitMatrix> {
        let cells = rows * cols;
        (0..1usize << cells)
            .map(|mask| {
                let mut m = BitMatrix::zeros(rows, cols);
                for i in 0..cells {
                    if mask >> i & 1 == 1 {
                        m.set(i / cols, i % cols, true);
                    }
                }
                m
            })
            .collect()
    }

    /// Brute-force rank: dimension of the span of the rows, by enumeration.
    fn rank_brute(m: &BitMatrix) -> usize {
        let rows: Vec<BitVec> = (0..m.rows()).map(|r| m.row(r)).collect();
        let mut span = std::collections::HashSet::new();
        span.insert(BitVec::zeros(m.cols()));
        for r in rows {
            let cur: Vec<BitVec> = span.iter().cloned().collect();
            for v in cur {
                let mut w = v.clone();
                w.add_assign(&r);
                span.insert(w);
            }
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn rref_identity() {
        let id = BitMatrix::identity(3);
        let (r, p) = id.rref();
        assert_eq!(r, id);
        assert_eq!(p, vec![0, 1, 2]);
    }

    #[test]
    fn rref_zero() {
        let z = BitMatrix::zeros(2, 2);
        let (r, p) = z.rref();
        assert_eq!(r, z);
        assert!(p.is_empty());
    }

    #[test]
    fn rref_hand_example() {
        // [[1,1,0],[1,0,1]] -> [[1,0,1],[0,1,1]] with pivots [0,1],
        // by hand row-reduction over GF(2).
        let m = BitMatrix::from_rows(&[&[1, 1, 0], &[1, 0, 1]]);
        let (r, p) = m.rref();
        assert_eq!(p, vec![0, 1]);
        assert_eq!(r, BitMatrix::from_rows(&[&[1, 0, 1], &[0, 1, 1]]));
    }

    #[test]
    fn kernel_identity_empty() {
        assert!(BitMatrix::identity(4).kernel_basis().is_empty());
    }

    #[test]
    fn kernel_zero_full() {
        assert_eq!(BitMatrix::zeros(2, 3).kernel_basis().len(), 3);
    }

    #[test]
    fn kernel_hand_example() {
        // [[1,1,0],[0,1,1]]: the only nonzero kernel vector is (1,1,1),
        // found by checking all 8 vectors.
        let m = BitMatrix::from_rows(&[&[1, 1, 0], &[0, 1, 1]]);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], BitVec::from_bits(&[1, 1, 1]));
    }

    #[test]
    fn solve_identity() {
        let id = BitMatrix::identity(3);
        let b = BitVec::from_bits(&[1, 0, 1]);
        assert_eq!(id.solve(&b), Some(b));
    }

    #[test]
    fn solve_unsolvable() {
        let z = BitMatrix::zeros(2, 2);
        assert_eq!(z.solve(&BitVec::from_bits(&[1, 0])), None);
    }

    #[test]
    fn solve_hand_example() {
        // [[1,1],[0,1]] x = (1,0): checking all 4 candidates, the unique
        // solution is (1,0).
        let m = BitMatrix::from_rows(&[&[1, 1], &[0, 1]]);
        let x = m.solve(&BitVec::from_bits(&[1, 0])).unwrap();
        assert_eq!(x, BitVec::from_bits(&[1, 0]));
        // (1,1) maps to (0,1), not (1,0).
        assert_eq!(m.apply(&BitVec::from_bits(&[1, 1])), BitVec::from_bits(&[0, 1]));
    }

    #[test]
    fn brute_force_equivalence_small() {
        // Every matrix up to 4x4 (3x3 exhaustive; 4x4 on a stride to keep
        // the suite quick): rank against enumeration, rank-nullity, solve
        // round trip, rank of transpose.
        for rows in 0..=3 {
            for cols in 0..=3 {
                for m in all_matrices(rows, cols) {
                    check_one(&m);
                }
            }
        }
        let mats = all_matrices(4, 4);
        for (i, m) in mats.iter().enumerate() {
            if i % 257 == 0 {
                check_one(m);
            }
        }
    }

    fn check_one(m: &BitMatrix) {
        let rank = m.rank();
        assert_eq!(rank, rank_brute(m));
        assert_eq!(rank, m.transpose().rank());
        let kernel = m.kernel_basis();
        assert_eq!(rank + kernel.len(), m.cols());
        for v in &kernel {
            assert!(m.apply(v).is_zero());
        }
        for b in all_vectors(m.rows()) {
            let solvable_brute = all_vectors(m.cols()).iter().any(|x| m.apply(x) == b);
            match m.solve(&b) {
                Some(x) => {
                    assert!(solvable_brute);
                    assert_eq!(m.apply(&x), b);
                }
                None => assert!(!solvable_brute),
            }
        }
    }

    #[test]
    fn subspace_reduce_and_insert() {
        let mut s = Subspace::empty(3);
        assert!(s.insert(BitVec::from_bits(&[1, 1, 0])));
        assert!(s.insert(BitVec::from_bits(&[0, 1, 1])));
        assert!(!s.insert(BitVec::from_bits(&[1, 0, 1])));
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&BitVec::from_bits(&[1, 0, 1])));
        assert!(!s.contains(&BitVec::from_bits(&[1, 0, 0])));
    }

    proptest::proptest! {
        #[test]
        fn prop_rank_transpose(rows in 0usize..6, cols in 0usize..6, seed: u64) {
            let mut m = BitMatrix::zeros(rows, cols);
            let mut state = seed;
            for r in 0..rows {
                for c in 0..cols {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if state >> 33 & 1 == 1 {
                        m.set(r, c, true);
                    }
                }
            }
            proptest::prop_assert_eq!(m.rank(), m.transpose().rank());
            proptest::prop_assert_eq!(m.rank() + m.kernel_basis().len(), cols);
            let (rref, pivots) = m.rref();
            proptest::prop_assert_eq!(rref.rank(), pivots.len());
            // Row space is preserved: every rref row solves against the original rows.
            let tm = m.transpose();
            for i in 0..pivots.len() {
                let row = rref.row(i);
                proptest::prop_assert!(tm.solve(&row).is_some());
            }
        }
    }
}
