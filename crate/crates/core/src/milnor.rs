//! Milnor-basis arithmetic in the finite subalgebras A(n) of the mod-2
//! Steenrod algebra.
//!
//! A basis element is Sq(r_1, ..., r_k), dual to xi_1^{r_1} ... xi_k^{r_k};
//! its degree is sum r_i (2^i - 1). The element lies in A(n) when
//! r_i < 2^{n+2-i}. Multiplication is by Milnor's matrix formula: the
//! product Sq(R) Sq(S) is the sum over matrices X with row sums
//! sum_j 2^j X[i][j] = R[i] and column sums sum_i X[i][j] = S[j], of
//! Sq(T(X)) where T_n = sum_{i+j=n} X[i][j], with coefficient 1 exactly
//! when every diagonal's entries have pairwise disjoint binary digits.
//!
//! The Milnor basis is canonical internally; admissible Sq^{i_1}...Sq^{i_k}
//! words are produced only for display.

use crate::error::Error;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Binomial coefficient mod 2 by Lucas: digits of `bottom` must be a subset
/// of the digits of `top`. Negative `top` is read 2-adically (two's
/// complement supplies the digits), which is exactly the convention for
/// stunted projective spaces.
pub fn binom2(top: i64, bottom: i64) -> bool {
    if bottom < 0 {
        return false;
    }
    (top as u64) & (bottom as u64) == bottom as u64
}

/// Multinomial coefficient mod 2: nonzero iff the parts have pairwise
/// disjoint binary digits.
pub fn multinomial2(parts: &[u32]) -> bool {
    let mut seen: u64 = 0;
    for p in parts {
        if seen & *p as u64 != 0 {
            return false;
        }
        seen |= *p as u64;
    }
    true
}

/// A Milnor basis element Sq(r_1, ..., r_k), trailing zeros normalized away.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MilnorElement {
    exponents: Vec<u32>,
}

impl MilnorElement {
    pub fn new(exponents: &[u32]) -> Self {
        let mut v = exponents.to_vec();
        while v.last() == Some(&0) {
            v.pop();
        }
        MilnorElement { exponents: v }
    }

    pub fn unit() -> Self {
        MilnorElement::new(&[])
    }

    /// Sq(k) = the total square Sq^k.
    pub fn sq(k: u32) -> Self {
        MilnorElement::new(&[k])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.exponents.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i32 {
        self.exponents
            .iter()
            .enumerate()
            .map(|(i, r)| *r as i32 * ((1 << (i + 1)) - 1))
            .sum()
    }

    pub fn is_unit(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Membership in A(n): r_i < 2^{n+2-i} (1-indexed i).
    pub fn in_profile(&self, n: u32) -> bool {
        self.exponents.iter().enumerate().all(|(i, r)| {
            let bound_exp = (n as i64) + 2 - (i as i64 + 1);
            bound_exp > 0 && (*r as u64) < (1u64 << bound_exp)
        })
    }
}

impl fmt::Display for MilnorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "Sq()");
        }
        write!(f, "Sq(")?;
        for (i, r) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MilnorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parse "Sq(r1,r2,...)" or "Sq()" / "1".
pub fn parse_milnor(s: &str) -> Result<MilnorElement, Error> {
    let s = s.trim();
    if s == "1" {
        return Ok(MilnorElement::unit());
    }
    let body = s
        .strip_prefix("Sq(")
        .and_then(|x| x.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected Sq(...), got {s:?}")))?;
    if body.trim().is_empty() {
        return Ok(MilnorElement::unit());
    }
    let exponents = body
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad exponent {t:?} in {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MilnorElement::new(&exponents))
}

/// A GF(2) sum of Milnor basis elements of one degree, inside a fixed A(n).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SteenrodSum {
    pub profile: u32,
    terms: Vec<MilnorElement>, // sorted, deduplicated mod 2
}

impl SteenrodSum {
    pub fn zero(profile: u32) -> Self {
        SteenrodSum {
            profile,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(profile: u32, terms: Vec<MilnorElement>) -> Self {
        let mut counts: BTreeMap<MilnorElement, usize> = BTreeMap::new();
        for t in terms {
            *counts.entry(t).or_default() += 1;
        }
        let terms: Vec<MilnorElement> = counts
            .into_iter()
            .filter_map(|(t, c)| (c % 2 == 1).then_some(t))
            .collect();
        SteenrodSum { profile, terms }
    }

    pub fn single(profile: u32, m: MilnorElement) -> Self {
        SteenrodSum {
            profile,
            terms: vec![m],
        }
    }

    pub fn terms(&self) -> &[MilnorElement] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<i32> {
        self.terms.first().map(|t| t.degree())
    }

    pub fn add(&self, other: &SteenrodSum) -> SteenrodSum {
        assert_eq!(self.profile, other.profile, "profile mismatch");
        let mut all = self.terms.clone();
        all.extend(other.terms.iter().cloned());
        SteenrodSum::from_terms(self.profile, all)
    }
}

impl fmt::Display for SteenrodSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Milnor matrix product at p = 2: all terms of Sq(R) * Sq(S).
pub fn milnor_product_terms(r: &MilnorElement, s: &MilnorElement) -> Vec<MilnorElement> {
    let rl = r.exponents.len();
    let sl = s.exponents.len();
    if rl == 0 {
        return vec![s.clone()];
    }
    if sl == 0 {
        return vec![r.clone()];
    }
    let mut st = MatrixState {
        rl,
        sl,
        interior: vec![vec![0u32; sl + 1]; rl + 1],
        row_rem: {
            let mut v = vec![0u32; rl + 1];
            v[1..].copy_from_slice(&r.exponents);
            v
        },
        col_rem: {
            let mut v = vec![0u32; sl + 1];
            v[1..].copy_from_slice(&s.exponents);
            v
        },
        out: Vec::new(),
    };
    st.fill(1, 1);
    st.out
}

struct MatrixState {
    rl: usize,
    sl: usize,
    /// interior[i][j] for i, j >= 1; row/col 0 unused.
    interior: Vec<Vec<u32>>,
    /// row_rem[i] = R_i minus the weight already spent; this is X[i][0].
    row_rem: Vec<u32>,
    /// col_rem[j] = S_j minus the entries already placed; this is X[0][j].
    col_rem: Vec<u32>,
    out: Vec<MilnorElement>,
}

impl MatrixState {
    fn fill(&mut self, i: usize, j: usize) {
        if i > self.rl {
            self.emit();
            return;
        }
        let (ni, nj) = if j == self.sl { (i + 1, 1) } else { (i, j + 1) };
        // X[i][j] consumes 2^j units of row weight and one unit of column j.
        let pw = 1u32 << j;
        let max = (self.row_rem[i] / pw).min(self.col_rem[j]);
        for v in 0..=max {
            self.interior[i][j] = v;
            self.row_rem[i] -= v * pw;
            self.col_rem[j] -= v;
            self.fill(ni, nj);
            self.row_rem[i] += v * pw;
            self.col_rem[j] += v;
        }
        self.interior[i][j] = 0;
    }

    fn x(&self, i: usize, j: usize) -> u32 {
        match (i, j) {
            (0, j) => self.col_rem[j],
            (i, 0) => self.row_rem[i],
            (i, j) => self.interior[i][j],
        }
    }

    fn emit(&mut self) {
        // Coefficient: each anti-diagonal's entries must have pairwise
        // disjoint binary digits; the result exponent is the diagonal sum.
        let mut t = Vec::with_capacity(self.rl + self.sl);
        for n in 1..=(self.rl + self.sl) {
            let mut diag = Vec::new();
            let mut sum = 0u32;
            for i in 0..=n.min(self.rl) {
                let j = n - i;
                if j > self.sl {
                    continue;
                }
                let v = self.x(i, j);
                diag.push(v);
                sum += v;
            }
            if !multinomial2(&diag) {
                return;
            }
            t.push(sum);
        }
        self.out.push(MilnorElement::new(&t));
    }
}

/// Precomputed tables for one A(n): graded basis, products, and expressions
/// of each basis element through the algebra generators Sq(2^k).
pub struct MilnorAlgebra {
    pub n: u32,
    basis_by_degree: Vec<Vec<MilnorElement>>,
    index: HashMap<MilnorElement, (i32, usize)>,
    top_degree: i32,
    /// product[(deg_a, ia, deg_b, ib)] -> indices of basis terms of a*b
    products: HashMap<(i32, usize, i32, usize), Vec<usize>>,
    /// For each basis element b of positive degree: b = sum_k Sq(2^{g_k}) * c_k
    /// with c_k a basis element of lower degree. Empty for the unit.
    generator_decomposition: Vec<Vec<Vec<(u32, usize)>>>,
}

impl MilnorAlgebra {
    pub fn new(n: u32) -> Self {
        // Top degree of A(n): sum over i of (2^{n+2-i} - 1)(2^i - 1).
        let mut top = 0i32;
        for i in 1..=(n + 1) {
            top += ((1i64 << (n + 2 - i)) - 1) as i32 * ((1 << i) - 1);
        }
        let mut basis_by_degree: Vec<Vec<MilnorElement>> = vec![Vec::new(); top as usize + 1];
        enumerate_profile(n, &mut basis_by_degree);
        for v in basis_by_degree.iter_mut() {
            v.sort();
        }
        let mut index = HashMap::new();
        for (d, v) in basis_by_degree.iter().enumerate() {
            for (i, m) in v.iter().enumerate() {
                index.insert(m.clone(), (d as i32, i));
            }
        }
        let mut alg = MilnorAlgebra {
            n,
            basis_by_degree,
            index,
            top_degree: top,
            products: HashMap::new(),
            generator_decomposition: Vec::new(),
        };
        alg.build_products();
        alg.build_generator_decompositions();
        alg
    }

    pub fn top_degree(&self) -> i32 {
        self.top_degree
    }

    pub fn basis(&self, degree: i32) -> &[MilnorElement] {
        if degree < 0 || degree > self.top_degree {
            return &[];
        }
        &self.basis_by_degree[degree as usize]
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.basis(degree).len()
    }

    pub fn total_dim(&self) -> usize {
        self.basis_by_degree.iter().map(|v| v.len()).sum()
    }

    pub fn index_of(&self, m: &MilnorElement) -> Option<(i32, usize)> {
        self.index.get(m).copied()
    }

    /// Algebra generators Sq(1), Sq(2), ..., Sq(2^n).
    pub fn generators(&self) -> Vec<u32> {
        (0..=self.n).collect()
    }

    fn build_products(&mut self) {
        let degrees: Vec<i32> = (0..=self.top_degree).collect();
        for &da in &degrees {
            for ia in 0..self.dim(da) {
                for &db in &degrees {
                    if da + db > self.top_degree {
                        break;
                    }
                    for ib in 0..self.dim(db) {
                        let a = self.basis_by_degree[da as usize][ia].clone();
                        let b = self.basis_by_degree[db as usize][ib].clone();
                        let mut terms = Vec::new();
                        for t in milnor_product_terms(&a, &b) {
                            debug_assert!(
                                t.in_profile(self.n),
                                "product left the subalgebra: {a} * {b} has term {t}"
                            );
                            let (_, it) = self.index[&t];
                            terms.push(it);
                        }
                        // reduce mod 2
                        terms.sort_unstable();
                        let mut reduced = Vec::new();
                        let mut k = 0;
                        while k < terms.len() {
                            let mut run = 1;
                            while k + run < terms.len() && terms[k + run] == terms[k] {
                                run += 1;
                            }
                            if run % 2 == 1 {
                                reduced.push(terms[k]);
                            }
                            k += run;
                        }
                        self.products.insert((da, ia, db, ib), reduced);
                    }
                }
            }
        }
    }

    /// Product of basis elements by index, expanded in the target basis.
    pub fn product_indices(&self, da: i32, ia: usize, db: i32, ib: usize) -> &[usize] {
        self.products
            .get(&(da, ia, db, ib))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn product(&self, a: &SteenrodSum, b: &SteenrodSum) -> SteenrodSum {
        assert_eq!(a.profile, b.profile, "profile mismatch");
        assert_eq!(a.profile, self.n, "wrong algebra for these operands");
        let mut terms = Vec::new();
        for ta in a.terms() {
            for tb in b.terms() {
                let (da, ia) = self.index[ta];
                let (db, ib) = self.index[tb];
                let d = da + db;
                for &it in self.product_indices(da, ia, db, ib) {
                    terms.push(self.basis_by_degree[d as usize][it].clone());
                }
            }
        }
        SteenrodSum::from_terms(self.n, terms)
    }

    /// Express every positive-degree basis element as a sum of products
    /// Sq(2^k) * (lower basis element). Exists because the Sq(2^k), k <= n,
    /// generate A(n); found degreewise by Gaussian elimination.
    fn build_generator_decompositions(&mut self) {
        use crate::bits::{BitMatrix, BitVec};
        self.generator_decomposition = (0..=self.top_degree)
            .map(|d| vec![Vec::new(); self.dim(d)])
            .collect::<Vec<_>>();
        for d in 1..=self.top_degree {
            let dim = self.dim(d);
            if dim == 0 {
                continue;
            }
            // Columns: (k, c) with c a basis element of degree d - 2^k.
            let mut cols: Vec<(u32, usize)> = Vec::new();
            for k in 0..=self.n {
                let gd = 1i32 << k;
                let rest = d - gd;
                if rest < 0 {
                    continue;
                }
                for ic in 0..self.dim(rest) {
                    cols.push((k, ic));
                }
            }
            let mut mat = BitMatrix::zeros(dim, cols.len());
            for (j, (k, ic)) in cols.iter().enumerate() {
                let gd = 1i32 << *k;
                let g = MilnorElement::sq(gd as u32);
                let (dg, ig) = self.index[&g];
                for &it in self.product_indices(dg, ig, d - gd, *ic) {
                    mat.set(it, j, true);
                }
            }
            for target in 0..dim {
                let mut rhs = BitVec::zeros(dim);
                rhs.set(target, true);
                let sol = mat.solve(&rhs).unwrap_or_else(|| {
                    panic!("A({}) degree {} element not generated by Sq(2^k)", self.n, d)
                });
                let decomp: Vec<(u32, usize)> =
                    sol.iter_ones().map(|j| cols[j]).collect();
                self.generator_decomposition[d as usize][target] = decomp;
            }
        }
    }

    /// b = sum of Sq(2^k) * c over the returned (k, index-of-c) pairs.
    pub fn decomposition(&self, degree: i32, idx: usize) -> &[(u32, usize)] {
        &self.generator_decomposition[degree as usize][idx]
    }
}

fn enumerate_profile(n: u32, out: &mut Vec<Vec<MilnorElement>>) {
    // All exponent vectors (r_1, ..., r_{n+1}) with r_i < 2^{n+2-i}.
    let len = (n + 1) as usize;
    let mut current = vec![0u32; len];
    fn rec(i: usize, len: usize, n: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<MilnorElement>>) {
        if i == len {
            let m = MilnorElement::new(current);
            out[m.degree() as usize].push(m);
            return;
        }
        let bound = 1u32 << (n + 2 - (i as u32 + 1));
        for r in 0..bound {
            current[i] = r;
            rec(i + 1, len, n, current, out);
        }
        current[i] = 0;
    }
    rec(0, len, n, &mut current, out);
}

/// Enumerate the Milnor basis of A(n) in one degree, in canonical order.
pub fn basis(n: u32, degree: i32) -> Vec<MilnorElement> {
    MilnorAlgebra::new(n).basis(degree).to_vec()
}

// ---------------------------------------------------------------------------
// Admissible form (display only)
// ---------------------------------------------------------------------------

/// An admissible word Sq^{i_1} ... Sq^{i_k} with i_j >= 2 i_{j+1}.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct AdmissibleWord(pub Vec<u32>);

impl fmt::Display for AdmissibleWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "Sq^{a}")?;
        }
        Ok(())
    }
}

fn admissible_words_of_degree(d: i32) -> Vec<AdmissibleWord> {
    // Words i_1 >= 2 i_2 >= 4 i_3 >= ..., sum = d.
    fn rec(remaining: i32, min_first: i32, acc: &mut Vec<u32>, out: &mut Vec<AdmissibleWord>) {
        if remaining == 0 {
            let mut w = acc.clone();
            w.reverse();
            out.push(AdmissibleWord(w));
            return;
        }
        // Build from the right: next entry is at least 2 * previous and at
        // most remaining.
        for next in min_first..=remaining {
            acc.push(next as u32);
            rec(remaining - next, 2 * next, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        out.push(AdmissibleWord(Vec::new()));
        return out;
    }
    rec(d, 1, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Expand an admissible word into the Milnor basis of the full Steenrod
/// algebra (computed inside A(m) for m large enough to contain the degree).
fn word_to_milnor(word: &AdmissibleWord) -> Vec<MilnorElement> {
    let mut acc = vec![MilnorElement::unit()];
    for a in word.0.iter().rev() {
        let sq = MilnorElement::sq(*a);
        let mut counts: BTreeMap<MilnorElement, usize> = BTreeMap::new();
        for m in &acc {
            for t in milnor_product_terms(&sq, m) {
                *counts.entry(t).or_default() += 1;
            }
        }
        acc = counts
            .into_iter()
            .filter_map(|(t, c)| (c % 2 == 1).then_some(t))
            .collect();
    }
    acc
}

/// Rewrite a Steenrod sum in the admissible basis. Round-tripping through
/// `word_to_milnor` is the identity; used for human-readable output.
pub fn to_admissible(a: &SteenrodSum) -> Vec<AdmissibleWord> {
    use crate::bits::{BitMatrix, BitVec};
    let Some(d) = a.degree() else {
        return Vec::new();
    };
    let words = admissible_words_of_degree(d);
    // Milnor basis of the full algebra in degree d: take the union of the
    // expansions (they span) plus the target terms.
    let mut milnor_all: Vec<MilnorElement> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let expansions: Vec<Vec<MilnorElement>> = words.iter().map(word_to_milnor).collect();
    for e in expansions.iter().flatten().chain(a.terms().iter()) {
        if seen.insert(e.clone()) {
            milnor_all.push(e.clone());
        }
    }
    milnor_all.sort();
    let pos: HashMap<&MilnorElement, usize> =
        milnor_all.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut mat = BitMatrix::zeros(milnor_all.len(), words.len());
    for (j, e) in expansions.iter().enumerate() {
        for t in e {
            mat.set(pos[t], j, true);
        }
    }
    let mut rhs = BitVec::zeros(milnor_all.len());
    for t in a.terms() {
        rhs.flip(pos[t]);
    }
    let sol = mat
        .solve(&rhs)
        .expect("admissible words span each degree of the Steenrod algebra");
    sol.iter_ones().map(|j| words[j].clone()).collect()
}
