//! Finite-window presentations of graded A(n)-modules.
//!
//! A module is a list of named basis elements with integer degrees (negative
//! allowed) and an action table for the algebra generators Sq(2^k), k <= n.
//! The action of an arbitrary Milnor basis element is derived through the
//! generator decompositions of [`MilnorAlgebra`]. Actions that would land
//! above the window top are silently zero (window truncation); downstream
//! computations are trusted only up to `trusted_top`.

use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::milnor::{binom2, parse_milnor, MilnorAlgebra, MilnorElement, SteenrodSum};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// A GF(2) sum of basis elements, kept as a sorted index set.
pub type Elt = Vec<usize>;

pub fn elt_xor(a: &Elt, b: &Elt) -> Elt {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Clone, Debug)]
pub struct ModuleGen {
    pub name: String,
    pub degree: i32,
}

/// A finite-window graded A(n)-module with explicit generator action tables.
#[derive(Clone)]
pub struct ModulePresentation {
    pub profile: u32,
    pub t_min: i32,
    pub t_max: i32,
    /// No truncation anywhere: the module is finite and fully represented.
    pub complete: bool,
    gens: Vec<ModuleGen>,
    by_degree: BTreeMap<i32, Vec<usize>>,
    /// action[k][i] = Sq(2^k) * gen_i as an index set.
    action: Vec<Vec<Elt>>,
}

impl ModulePresentation {
    pub fn new(profile: u32, t_min: i32, t_max: i32, complete: bool) -> Self {
        let n_gens_actions = profile as usize + 1;
        ModulePresentation {
            profile,
            t_min,
            t_max,
            complete,
            gens: Vec::new(),
            by_degree: BTreeMap::new(),
            action: vec![Vec::new(); n_gens_actions],
        }
    }

    pub fn add_gen(&mut self, name: impl Into<String>, degree: i32) -> usize {
        let idx = self.gens.len();
        self.gens.push(ModuleGen {
            name: name.into(),
            degree,
        });
        self.by_degree.entry(degree).or_default().push(idx);
        for a in self.action.iter_mut() {
            a.push(Vec::new());
        }
        idx
    }

    /// Set Sq(2^k) * gen_i. Targets above the window top are dropped (the
    /// truncation convention); degree consistency is asserted.
    pub fn set_action(&mut self, k: u32, i: usize, targets: Elt) {
        let expect = self.gens[i].degree + (1 << k);
        let kept: Elt = targets
            .into_iter()
            .filter(|t| {
                assert_eq!(
                    self.gens[*t].degree, expect,
                    "action of Sq(2^{k}) on {} must raise degree by {}",
                    self.gens[i].name,
                    1 << k
                );
                self.gens[*t].degree <= self.t_max
            })
            .collect();
        self.action[k as usize][i] = kept;
    }

    pub fn gens(&self) -> &[ModuleGen] {
        &self.gens
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.by_degree.get(&degree).map_or(0, |v| v.len())
    }

    pub fn total_dim(&self) -> usize {
        self.gens.len()
    }

    pub fn degree_indices(&self, degree: i32) -> &[usize] {
        self.by_degree.get(&degree).map_or(&[], |v| v.as_slice())
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    /// Top internal degree to which downstream computations may trust this
    /// presentation: the window top unless the module is complete.
    pub fn trusted_top(&self) -> i32 {
        if self.complete {
            i32::MAX / 4
        } else {
            self.t_max
        }
    }

    /// Apply the generator Sq(2^k) to an element.
    pub fn act_gen(&self, k: u32, elt: &Elt) -> Elt {
        let mut out = Vec::new();
        for &i in elt {
            out = elt_xor(&out, &self.action[k as usize][i]);
        }
        out
    }

    /// Apply a Milnor basis element through the generator decompositions.
    pub fn act_milnor(&self, alg: &MilnorAlgebra, m: &MilnorElement, elt: &Elt) -> Elt {
        assert_eq!(alg.n, self.profile);
        if m.is_unit() {
            return elt.clone();
        }
        let (d, i) = alg
            .index_of(m)
            .unwrap_or_else(|| panic!("{m} is not in A({})", self.profile));
        let mut out = Vec::new();
        for (k, ic) in alg.decomposition(d, i) {
            let c = &alg.basis(d - (1 << k))[*ic];
            let inner = self.act_milnor(alg, c, elt);
            out = elt_xor(&out, &self.act_gen(*k, &inner));
        }
        out
    }

    pub fn act_sum(&self, alg: &MilnorAlgebra, s: &SteenrodSum, elt: &Elt) -> Elt {
        let mut out = Vec::new();
        for t in s.terms() {
            out = elt_xor(&out, &self.act_milnor(alg, t, elt));
        }
        out
    }

    /// Forget the actions of the generators above A(m): restriction of
    /// scalars along A(m) c A(n).
    pub fn restrict(&self, m: u32) -> ModulePresentation {
        assert!(m <= self.profile);
        let mut out = self.clone();
        out.profile = m;
        out.action.truncate(m as usize + 1);
        out
    }

    /// Degree-shifted copy.
    pub fn suspend(&self, shift: i32) -> ModulePresentation {
        let mut m = self.clone();
        m.t_min += shift;
        m.t_max += shift;
        m.gens.iter_mut().for_each(|g| g.degree += shift);
        m.by_degree = m
            .by_degree
            .into_iter()
            .map(|(d, v)| (d + shift, v))
            .collect();
        m
    }

    /// Validation report: degree bookkeeping, window truncation, and every
    /// A(n) relation instance-wise. Empty report = valid.
    pub fn check_action(&self, alg: &MilnorAlgebra) -> Vec<String> {
        assert_eq!(alg.n, self.profile);
        let mut violations = Vec::new();
        // Degree raising and window truncation are structural via set_action;
        // re-verify degrees here anyway in case of hand-edited tables.
        for (k, table) in self.action.iter().enumerate() {
            for (i, targets) in table.iter().enumerate() {
                for &t in targets {
                    if self.gens[t].degree != self.gens[i].degree + (1 << k) {
                        violations.push(format!(
                            "Sq(2^{k}) {} -> {} does not raise degree by {}",
                            self.gens[i].name,
                            self.gens[t].name,
                            1 << k
                        ));
                    }
                    if self.gens[t].degree > self.t_max {
                        violations.push(format!(
                            "Sq(2^{k}) {} escapes the window",
                            self.gens[i].name
                        ));
                    }
                }
            }
        }
        // Relations: act(g * b) = act(g) o act(b) for every generator g and
        // Milnor basis element b, wherever truncation provably cannot matter.
        let trusted = self.trusted_top();
        for db in 0..=alg.top_degree() {
            for (ib, b) in alg.basis(db).iter().enumerate() {
                for k in alg.generators() {
                    let gd = 1i32 << k;
                    let g = MilnorElement::sq(gd as u32);
                    let (dg, ig) = alg.index_of(&g).unwrap();
                    // g * b expanded in the Milnor basis; empty (zero) when
                    // the degree exceeds the top of A(n).
                    let product: Vec<&MilnorElement> = alg
                        .product_indices(dg, ig, db, ib)
                        .iter()
                        .map(|&it| &alg.basis(dg + db)[it])
                        .collect();
                    for (i, gen) in self.gens.iter().enumerate() {
                        if gen.degree + db + gd > trusted {
                            continue;
                        }
                        let via_compose = self.act_gen(k, &self.act_milnor(alg, b, &vec![i]));
                        let mut via_product = Vec::new();
                        for m in &product {
                            via_product =
                                elt_xor(&via_product, &self.act_milnor(alg, m, &vec![i]));
                        }
                        if via_compose != via_product {
                            violations.push(format!(
                                "relation Sq({}) * {} fails on {}",
                                1 << k,
                                b,
                                gen.name
                            ));
                        }
                    }
                }
            }
        }
        violations
    }

    pub fn render_elt(&self, elt: &Elt) -> String {
        if elt.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (j, &i) in elt.iter().enumerate() {
            if j > 0 {
                s.push_str(" + ");
            }
            s.push_str(&self.gens[i].name);
        }
        s
    }

    // -- file format ------------------------------------------------------

    /// Serialize in the module-definition text format.
    pub fn to_text(&self, alg: &MilnorAlgebra) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "profile {}", self.profile);
        let _ = writeln!(out, "window {} {}", self.t_min, self.t_max);
        for g in &self.gens {
            let _ = writeln!(out, "gen {} {}", g.name, g.degree);
        }
        for k in alg.generators() {
            for (i, targets) in self.action[k as usize].iter().enumerate() {
                if targets.is_empty() {
                    continue;
                }
                let rhs = targets
                    .iter()
                    .map(|t| self.gens[*t].name.clone())
                    .collect::<Vec<_>>()
                    .join(" + ");
                let _ = writeln!(out, "act Sq({}) {} = {}", 1 << k, self.gens[i].name, rhs);
            }
        }
        out
    }

    /// Parse the module-definition text format:
    /// `profile n`, `window t_min t_max`, `gen <name> <degree>`,
    /// `act Sq(r1,..) <name> = <name> [+ <name> ...]` (or `= 0`).
    /// Action lines whose operation is a generator Sq(2^k) define the table;
    /// any other Sq(r) line is validated against the derived action.
    pub fn from_text(text: &str) -> Result<ModulePresentation> {
        let mut profile = None;
        let mut window = None;
        let mut gens: Vec<(String, i32)> = Vec::new();
        let mut acts: Vec<(MilnorElement, String, Vec<String>)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let head = words.next().unwrap();
            let fail = |msg: &str| Error::Parse(format!("line {}: {}", lineno + 1, msg));
            match head {
                "profile" => {
                    profile = Some(
                        words
                            .next()
                            .and_then(|w| w.parse::<u32>().ok())
                            .ok_or_else(|| fail("expected `profile n`"))?,
                    );
                }
                "window" => {
                    let lo = words.next().and_then(|w| w.parse::<i32>().ok());
                    let hi = words.next().and_then(|w| w.parse::<i32>().ok());
                    match (lo, hi) {
                        (Some(a), Some(b)) if a <= b => window = Some((a, b)),
                        _ => return Err(fail("expected `window t_min t_max` with t_min <= t_max")),
                    }
                }
                "gen" => {
                    let name = words.next().ok_or_else(|| fail("missing name"))?;
                    let degree = words
                        .next()
                        .and_then(|w| w.parse::<i32>().ok())
                        .ok_or_else(|| fail("missing degree"))?;
                    gens.push((name.to_string(), degree));
                }
                "act" => {
                    let op = words.next().ok_or_else(|| fail("missing operation"))?;
                    let op = parse_milnor(op).map_err(|e| fail(&e.to_string()))?;
                    let src = words.next().ok_or_else(|| fail("missing source"))?;
                    let eq = words.next();
                    if eq != Some("=") {
                        return Err(fail("expected `=`"));
                    }
                    let rest: Vec<String> = words
                        .filter(|w| *w != "+")
                        .map(|w| w.to_string())
                        .collect();
                    if rest.is_empty() {
                        return Err(fail("missing right-hand side"));
                    }
                    let targets = if rest == ["0"] { Vec::new() } else { rest };
                    acts.push((op, src.to_string(), targets));
                }
                other => return Err(fail(&format!("unknown directive {other:?}"))),
            }
        }
        let profile = profile.ok_or_else(|| Error::Parse("missing `profile` line".into()))?;
        let (t_min, t_max) =
            window.ok_or_else(|| Error::Parse("missing `window` line".into()))?;
        let mut m = ModulePresentation::new(profile, t_min, t_max, false);
        for (name, degree) in gens {
            if degree < t_min || degree > t_max {
                return Err(Error::Parse(format!(
                    "generator {name} of degree {degree} outside window"
                )));
            }
            if m.gen_index(&name).is_some() {
                return Err(Error::Parse(format!("duplicate generator {name}")));
            }
            m.add_gen(name, degree);
        }
        let alg = MilnorAlgebra::new(profile);
        let mut checks: Vec<(MilnorElement, usize, Elt)> = Vec::new();
        for (op, src, targets) in acts {
            let i = m
                .gen_index(&src)
                .ok_or_else(|| Error::Parse(format!("unknown generator {src}")))?;
            let elt: Elt = {
                let mut v = Vec::new();
                for t in &targets {
                    let ti = m
                        .gen_index(t)
                        .ok_or_else(|| Error::Parse(format!("unknown generator {t}")))?;
                    v = elt_xor(&v, &vec![ti]);
                }
                v
            };
            let d = op.degree();
            if op.exponents().len() == 1 && d.count_ones() == 1 && op.exponent(0) == d as u32 {
                let k = d.trailing_zeros();
                if k <= profile {
                    m.set_action(k, i, elt);
                    continue;
                }
            }
            if !op.in_profile(profile) {
                return Err(Error::Parse(format!("{op} is not in A({profile})")));
            }
            checks.push((op, i, elt));
        }
        // Non-generator action lines are assertions against the derived
        // action.
        for (op, i, expect) in checks {
            let got = m.act_milnor(&alg, &op, &vec![i]);
            let expect_in_window: Elt = expect
                .into_iter()
                .filter(|t| m.gens[*t].degree <= m.t_max)
                .collect();
            if got != expect_in_window {
                return Err(Error::InvalidModule(format!(
                    "declared action {op} {} = {} disagrees with the derived action {}",
                    m.gens[i].name,
                    m.render_elt(&expect_in_window),
                    m.render_elt(&got)
                )));
            }
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// The trivial module F_2 concentrated in degree 0.
pub fn f2_module(n: u32) -> ModulePresentation {
    let mut m = ModulePresentation::new(n, 0, 0, true);
    m.add_gen("1", 0);
    m
}

/// H^*(V(0)): classes v0, v1 with Sq^1 v0 = v1.
pub fn v0_module(n: u32) -> ModulePresentation {
    let mut m = ModulePresentation::new(n, 0, 1, true);
    let v0 = m.add_gen("v0", 0);
    let v1 = m.add_gen("v1", 1);
    m.set_action(0, v0, vec![v1]);
    m
}

/// H^*(P^infty_N) in the window [N, window_top]: classes x^j with
/// Sq^k x^j = C(j, k) x^{j+k}, binomials of negative j read 2-adically.
pub fn stunted_projective(bottom: i32, window_top: i32, n: u32) -> Result<ModulePresentation> {
    if bottom > window_top {
        return Err(Error::WindowTooSmall(format!(
            "empty stunted window [{bottom}, {window_top}]"
        )));
    }
    let mut m = ModulePresentation::new(n, bottom, window_top, false);
    for j in bottom..=window_top {
        m.add_gen(format!("x{j}"), j);
    }
    for k in 0..=n {
        let step = 1i64 << k;
        for j in bottom..=window_top {
            if i64::from(j) + step > i64::from(window_top) {
                continue;
            }
            if binom2(j as i64, step) {
                let src = (j - bottom) as usize;
                let tgt = (j + step as i32 - bottom) as usize;
                m.set_action(k, src, vec![tgt]);
            }
        }
    }
    Ok(m)
}

/// H^*(Sigma P^infty_{-N}) in a window: the suspended stunted module with
/// bottom cell in degree -N+1.
pub fn suspended_stunted(neg_bottom: i32, window_top: i32, n: u32) -> Result<ModulePresentation> {
    Ok(stunted_projective(-neg_bottom, window_top - 1, n)?.suspend(1))
}

/// Exponent vectors of length `count` monomials of total length sigma.
fn monomials_of_length(count: usize, sigma: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; count];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
    }
    if count == 0 {
        if sigma == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, sigma, &mut cur, &mut out);
    out
}

/// Exponent vector of xi_1, xi_2, ... — a monomial in the dual Steenrod
/// algebra.
type XiMonomial = Vec<u32>;

fn xi_mul(a: &XiMonomial, b: &XiMonomial) -> XiMonomial {
    let mut out = vec![0u32; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    while out.last() == Some(&0) {
        out.pop();
    }
    out
}

/// Check a xi-monomial against the profile of A(m)^*: exponent of xi_j must
/// be < 2^{m+2-j}.
fn xi_in_profile(m: u32, mono: &XiMonomial) -> bool {
    mono.iter().enumerate().all(|(j0, e)| {
        let bound_exp = m as i64 + 2 - (j0 as i64 + 1);
        bound_exp > 0 && (*e as u64) < (1u64 << bound_exp)
    })
}

/// The coaction-derived left A(m)-action on the dual basis of a span of
/// monomials in the generators g_i = xi_i^{2^{n+1-i}}, i = 1..=n+1.
///
/// `monomials` lists the exponent vectors of the basis (over the g_i). The
/// action of the Milnor basis element dual to the xi-monomial `xi^r` sends
/// the dual basis vector of P to the sum of dual vectors of Q over all Q
/// whose coaction contains the term xi^r (x) P. Used for the Koszul modules
/// R_n^sigma (m = n-1 or n) and for A(n) // A(n-1) (exponents <= 1).
fn dual_comodule(
    n: u32,
    m_act: u32,
    monomials: &[Vec<u32>],
    name: impl Fn(&[u32]) -> String,
    square_free: bool,
    keep_unit_drops: bool,
) -> ModulePresentation {
    let gen_count = (n + 1) as usize;
    let gen_degree: Vec<i32> = (1..=gen_count)
        .map(|i| ((1i64 << (n as usize + 1)) - (1i64 << (gen_count - i))) as i32)
        .collect();
    let mono_degree = |p: &[u32]| -> i32 {
        p.iter()
            .enumerate()
            .map(|(i, e)| *e as i32 * gen_degree[i])
            .sum()
    };
    let mut degrees: Vec<i32> = monomials.iter().map(|p| mono_degree(p)).collect();
    let t_min = degrees.iter().copied().min().unwrap_or(0);
    let t_max = degrees.iter().copied().max().unwrap_or(0);
    // Canonical order: by degree, then lexicographic.
    let mut order: Vec<usize> = (0..monomials.len()).collect();
    order.sort_by(|&a, &b| (degrees[a], &monomials[a]).cmp(&(degrees[b], &monomials[b])));
    let monomials: Vec<Vec<u32>> = order.iter().map(|&i| monomials[i].clone()).collect();
    degrees = order.iter().map(|&i| degrees[i]).collect();

    let mut module = ModulePresentation::new(m_act, t_min, t_max, true);
    for (p, d) in monomials.iter().zip(&degrees) {
        module.add_gen(name(p), *d);
    }
    let index_of: BTreeMap<&Vec<u32>, usize> =
        monomials.iter().enumerate().map(|(i, p)| (p, i)).collect();

    // Expand the coaction of each basis monomial Q:
    // psi(g_i) = sum_{k=0..=i} xi_k^{2^{n+1-i}} (x) g_{i-k}, where the k = i
    // term has unit right factor. For the length-graded quotients R^sigma
    // the k = i terms drop to lower length and are omitted.
    // Multiplicativity distributes each exponent Q_i over k with a
    // multinomial coefficient mod 2.
    let mut action_of: BTreeMap<XiMonomial, Vec<(usize, usize)>> = BTreeMap::new();
    for (qi, q) in monomials.iter().enumerate() {
        // terms: (left xi-monomial, right exponent vector)
        let mut terms: Vec<(XiMonomial, Vec<u32>)> = vec![(Vec::new(), vec![0u32; gen_count])];
        for (i0, &qe) in q.iter().enumerate() {
            if qe == 0 {
                continue;
            }
            let i = i0 + 1; // generator index, 1-based
            let exp_pow = (n as usize + 1) - i; // g_i = xi_i^{2^exp_pow}
            // Distributions of qe over k = 0..=i-1 (or ..=i) with nonzero
            // multinomial mod 2.
            let slots = if keep_unit_drops { i + 1 } else { i };
            let mut dists: Vec<Vec<u32>> = Vec::new();
            distribute(qe, slots, &mut vec![0u32; slots], 0, &mut dists);
            let mut new_terms = Vec::new();
            for (left, right) in &terms {
                'dist: for c in &dists {
                    // left factor: product over k >= 1 of xi_k^{2^exp_pow * c[k]}
                    let mut l = left.clone();
                    for (k, &ck) in c.iter().enumerate().skip(1) {
                        if ck == 0 {
                            continue;
                        }
                        let mut add = vec![0u32; k];
                        add[k - 1] = ck << exp_pow;
                        l = xi_mul(&l, &add);
                    }
                    if !xi_in_profile(m_act, &l) {
                        continue;
                    }
                    // right factor: g_{i-k}^{c[k]}, unit when k = i
                    let mut r = right.clone();
                    for (k, &ck) in c.iter().enumerate() {
                        if ck == 0 || k == i {
                            continue;
                        }
                        r[i - k - 1] += ck;
                        if square_free && r[i - k - 1] > 1 {
                            continue 'dist;
                        }
                    }
                    new_terms.push((l, r));
                }
            }
            terms = reduce_mod2(new_terms);
        }
        for (left, right) in terms {
            if left.is_empty() {
                continue; // identity component
            }
            if let Some(&pi) = index_of.get(&right) {
                action_of.entry(left).or_default().push((pi, qi));
            }
        }
    }
    // Install generator actions: Sq(2^k) is dual to xi_1^{2^k}.
    for k in 0..=m_act {
        let xi = vec![1u32 << k];
        let mut table: Vec<Elt> = vec![Vec::new(); monomials.len()];
        if let Some(pairs) = action_of.get(&xi) {
            for &(p, q) in pairs {
                table[p] = elt_xor(&table[p], &vec![q]);
            }
        }
        for (i, t) in table.into_iter().enumerate() {
            module.set_action(k, i, t);
        }
    }
    module
}

/// Distribute `total` over `slots` entries with nonzero multinomial mod 2
/// (pairwise disjoint binary digits).
fn distribute(total: u32, slots: usize, cur: &mut Vec<u32>, i: usize, out: &mut Vec<Vec<u32>>) {
    if i + 1 == slots {
        cur[i] = total;
        if crate::milnor::multinomial2(cur) {
            out.push(cur.clone());
        }
        return;
    }
    for v in 0..=total {
        cur[i] = v;
        distribute(total - v, slots, cur, i + 1, out);
    }
    cur[i] = 0;
}

fn reduce_mod2(terms: Vec<(XiMonomial, Vec<u32>)>) -> Vec<(XiMonomial, Vec<u32>)> {
    let mut counts: BTreeMap<(XiMonomial, Vec<u32>), usize> = BTreeMap::new();
    for t in terms {
        *counts.entry(t).or_default() += 1;
    }
    counts
        .into_iter()
        .filter_map(|(t, c)| (c % 2 == 1).then_some(t))
        .collect()
}

fn koszul_name(p: &[u32]) -> String {
    if p.iter().all(|e| *e == 0) {
        return "1".into();
    }
    let mut s = String::new();
    for (i, e) in p.iter().enumerate() {
        if *e == 0 {
            continue;
        }
        if !s.is_empty() {
            s.push('.');
        }
        let _ = write!(s, "g{}", i + 1);
        if *e > 1 {
            let _ = write!(s, "^{e}");
        }
    }
    s
}

/// R_n^sigma: length-sigma monomials in the Koszul generators, as a module
/// over A(n-1) restricted from the dual coaction.
pub fn koszul_module(n: u32, sigma: u32, _window_top: i32) -> ModulePresentation {
    assert!(n >= 1, "R_n needs n >= 1");
    let monomials = monomials_of_length((n + 1) as usize, sigma);
    dual_comodule(n, n - 1, &monomials, koszul_name, false, false)
}

/// R_n^sigma with its full A(n)-module structure (used by the Koszul
/// resolution).
pub fn koszul_module_full(n: u32, sigma: u32) -> ModulePresentation {
    assert!(n >= 1);
    let monomials = monomials_of_length((n + 1) as usize, sigma);
    dual_comodule(n, n, &monomials, koszul_name, false, false)
}

/// A(n) // A(n-1) as a left A(n)-module: the dual of the exterior algebra on
/// the Koszul generators. Basis is indexed by subsets.
pub fn quotient_coalgebra(n: u32) -> ModulePresentation {
    assert!(n >= 1);
    let count = (n + 1) as usize;
    let monomials: Vec<Vec<u32>> = (0..1u32 << count)
        .map(|mask| (0..count).map(|i| (mask >> i) & 1).collect())
        .collect();
    dual_comodule(n, n, &monomials, koszul_name, true, true)
}

/// Tensor product with the Cartan diagonal action.
pub fn tensor(a: &ModulePresentation, b: &ModulePresentation) -> Result<ModulePresentation> {
    if a.profile != b.profile {
        return Err(Error::ProfileMismatch(format!(
            "tensor of A({}) and A({}) modules",
            a.profile, b.profile
        )));
    }
    let n = a.profile;
    let alg = MilnorAlgebra::new(n);
    let complete = a.complete && b.complete;
    let t_min = a.t_min + b.t_min;
    let t_max = a.t_max + b.t_max;
    let trusted = if complete {
        t_max
    } else {
        (a.trusted_top().saturating_add(b.t_min)).min(b.trusted_top().saturating_add(a.t_min))
    };
    let mut m = ModulePresentation::new(n, t_min, t_max.min(trusted), complete);
    // Basis: pairs in (a, b) order.
    let mut pair_index = BTreeMap::new();
    for (i, ga) in a.gens.iter().enumerate() {
        for (j, gb) in b.gens.iter().enumerate() {
            let d = ga.degree + gb.degree;
            if d > m.t_max {
                continue;
            }
            let idx = m.add_gen(format!("{}(x){}", ga.name, gb.name), d);
            pair_index.insert((i, j), idx);
        }
    }
    // Cartan: Sq(2^k)(x (x) y) = sum_{u+v = 2^k} Sq(u) x (x) Sq(v) y.
    for k in 0..=n {
        let total = 1u32 << k;
        for (&(i, j), &idx) in pair_index.iter() {
            let mut out: Elt = Vec::new();
            for u in 0..=total {
                let xa = a.act_milnor(&alg, &MilnorElement::sq(u), &vec![i]);
                if xa.is_empty() {
                    continue;
                }
                let xb = b.act_milnor(&alg, &MilnorElement::sq(total - u), &vec![j]);
                for &ia in &xa {
                    for &jb in &xb {
                        if let Some(&t) = pair_index.get(&(ia, jb)) {
                            out = elt_xor(&out, &vec![t]);
                        }
                    }
                }
            }
            m.set_action(k, idx, out);
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Module maps
// ---------------------------------------------------------------------------

/// A degree-preserving map of modules, stored as images of source basis
/// elements.
#[derive(Clone, Debug)]
pub struct ModuleMap {
    pub images: Vec<Elt>,
}

impl ModuleMap {
    pub fn zero(source: &ModulePresentation) -> Self {
        ModuleMap {
            images: vec![Vec::new(); source.total_dim()],
        }
    }

    pub fn identity(m: &ModulePresentation) -> Self {
        ModuleMap {
            images: (0..m.total_dim()).map(|i| vec![i]).collect(),
        }
    }

    /// Match source generators to target generators by name.
    pub fn by_name(source: &ModulePresentation, target: &ModulePresentation) -> Self {
        ModuleMap {
            images: source
                .gens
                .iter()
                .map(|g| target.gen_index(&g.name).map_or(Vec::new(), |t| vec![t]))
                .collect(),
        }
    }

    pub fn apply(&self, elt: &Elt) -> Elt {
        let mut out = Vec::new();
        for &i in elt {
            out = elt_xor(&out, &self.images[i]);
        }
        out
    }

    /// Check degree preservation and A(n)-equivariance on generators within
    /// the trusted range; returns the first offending (generator, element)
    /// pair on failure.
    pub fn check_equivariant(
        &self,
        alg: &MilnorAlgebra,
        source: &ModulePresentation,
        target: &ModulePresentation,
    ) -> Result<()> {
        for (i, img) in self.images.iter().enumerate() {
            for &t in img {
                if target.gens[t].degree != source.gens[i].degree {
                    return Err(Error::NotEquivariant(format!(
                        "({}, degree {} -> {})",
                        source.gens[i].name, source.gens[i].degree, target.gens[t].degree
                    )));
                }
            }
        }
        let trusted = source.trusted_top().min(target.trusted_top());
        for k in alg.generators() {
            let gd = 1i32 << k;
            for i in 0..source.total_dim() {
                if source.gens[i].degree + gd > trusted {
                    continue;
                }
                let lhs = self.apply(&source.act_gen(k, &vec![i]));
                let rhs = target.act_gen(k, &self.apply(&vec![i]));
                if lhs != rhs {
                    return Err(Error::NotEquivariant(format!(
                        "(Sq({}), {})",
                        1 << k,
                        source.gens[i].name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Restriction of a degree-t slice to a matrix (target-degree-t rows x
    /// source-degree-t columns), both slices in canonical index order.
    pub fn slice_matrix(
        &self,
        source: &ModulePresentation,
        target: &ModulePresentation,
        degree: i32,
    ) -> BitMatrix {
        let src = source.degree_indices(degree);
        let tgt = target.degree_indices(degree);
        let tpos: BTreeMap<usize, usize> =
            tgt.iter().enumerate().map(|(p, &g)| (g, p)).collect();
        let mut m = BitMatrix::zeros(tgt.len(), src.len());
        for (col, &s) in src.iter().enumerate() {
            for &t in &self.images[s] {
                if let Some(&row) = tpos.get(&t) {
                    m.set(row, col, true);
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stunted_low_examples() {
        // Sq^1 x^-3 = x^-2 (C(-3,1) odd), Sq^2 x^-3 = 0 (C(-3,2) = 6 even).
        let m = stunted_projective(-3, 5, 1).unwrap();
        let i = m.gen_index("x-3").unwrap();
        assert_eq!(m.render_elt(&m.act_gen(0, &vec![i])), "x-2");
        assert_eq!(m.render_elt(&m.act_gen(1, &vec![i])), "0");
    }

    #[test]
    fn stunted_passes_check_action() {
        for n in 0..=2 {
            let alg = MilnorAlgebra::new(n);
            let m = stunted_projective(-9, 24, n).unwrap();
            assert!(m.check_action(&alg).is_empty(), "A({n}) stunted module");
        }
    }

    #[test]
    fn planted_defect_is_caught() {
        // Sq^1 Sq^1 != 0 on a hand-built module: one violation.
        let mut m = ModulePresentation::new(0, 0, 2, true);
        let a = m.add_gen("a", 0);
        let b = m.add_gen("b", 1);
        let c = m.add_gen("c", 2);
        m.set_action(0, a, vec![b]);
        m.set_action(0, b, vec![c]);
        let alg = MilnorAlgebra::new(0);
        let report = m.check_action(&alg);
        assert_eq!(report.len(), 1, "{report:?}");
        assert!(report[0].contains("Sq(1)"));
    }

    #[test]
    fn odd_bottom_stunted_splits_into_v0_cells_over_a0() {
        // H^*(Sigma P^infty_{2N-1}) = sum of Sigma^{2i} H^*(V(0)) as an
        // A(0)-module: Sq^1 pairs each even-degree class with the odd class
        // above it, and kills odd-degree classes.
        let m = suspended_stunted(9, 20, 0).unwrap(); // bottom cell -8 = 2*(-4)... odd unsuspended bottom -9
        for (i, g) in m.gens().iter().enumerate() {
            let img = m.act_gen(0, &vec![i]);
            if g.degree % 2 == 0 {
                if g.degree < m.t_max {
                    assert_eq!(img.len(), 1, "Sq^1 on even class {}", g.name);
                }
            } else {
                assert!(img.is_empty(), "Sq^1 on odd class {}", g.name);
            }
        }
    }

    #[test]
    fn stunted_is_two_periodic_over_a0() {
        // The A(0)-action tables of bottom cells N and N+2 agree after a
        // degree-2 shift.
        let a = stunted_projective(-7, 8, 0).unwrap();
        let b = stunted_projective(-5, 10, 0).unwrap().suspend(-2);
        for (i, g) in a.gens().iter().enumerate() {
            let j = b.gen_index(&format!("x{}", g.degree + 2)).map(|j| j);
            let Some(j) = j else { continue };
            if g.degree + 1 > a.t_max || b.gens()[j].degree + 1 > b.t_max {
                continue;
            }
            assert_eq!(
                a.act_gen(0, &vec![i]).len(),
                b.act_gen(0, &vec![j]).len(),
                "Sq^1 on degree {}",
                g.degree
            );
        }
    }

    #[test]
    fn koszul_r1_sigma1_is_suspended_a0() {
        // R_1^1 = Sigma^2 A(0): two classes in degrees 2, 3 joined by Sq^1.
        let r = koszul_module(1, 1, 100);
        assert_eq!(r.total_dim(), 2);
        assert_eq!(r.dim(2), 1);
        assert_eq!(r.dim(3), 1);
        let bottom = r.degree_indices(2)[0];
        assert_eq!(r.act_gen(0, &vec![bottom]).len(), 1);
        let alg = MilnorAlgebra::new(0);
        assert!(r.check_action(&alg).is_empty());
    }

    #[test]
    fn koszul_r1_sigma2_is_a0_plus_f2() {
        // R_1^2 = Sigma^4 A(0) + Sigma^6 F_2.
        let r = koszul_module(1, 2, 100);
        assert_eq!(r.total_dim(), 3);
        assert_eq!((r.dim(4), r.dim(5), r.dim(6)), (1, 1, 1));
        let d4 = r.degree_indices(4)[0];
        let d5 = r.degree_indices(5)[0];
        let d6 = r.degree_indices(6)[0];
        assert_eq!(r.act_gen(0, &vec![d4]), vec![d5]);
        assert!(r.act_gen(0, &vec![d5]).is_empty());
        assert!(r.act_gen(0, &vec![d6]).is_empty());
    }

    #[test]
    fn koszul_r1_sigma0_is_f2() {
        let r = koszul_module(1, 0, 100);
        assert_eq!(r.total_dim(), 1);
        assert_eq!(r.dim(0), 1);
    }

    #[test]
    fn koszul_modules_pass_check_action() {
        for sigma in 0..=5 {
            let r = koszul_module(1, sigma, 100);
            assert!(r.check_action(&MilnorAlgebra::new(0)).is_empty());
        }
        for sigma in 0..=3 {
            let r = koszul_module(2, sigma, 100);
            assert!(
                r.check_action(&MilnorAlgebra::new(1)).is_empty(),
                "R_2^{sigma}"
            );
            let rf = koszul_module_full(2, sigma);
            assert!(
                rf.check_action(&MilnorAlgebra::new(2)).is_empty(),
                "R_2^{sigma} over A(2)"
            );
        }
        for sigma in 0..=6 {
            let rf = koszul_module_full(1, sigma);
            assert!(rf.check_action(&MilnorAlgebra::new(1)).is_empty());
        }
    }

    #[test]
    fn quotient_coalgebra_shape() {
        // A(1)//A(0) has dimension 4 in degrees 0, 2, 3, 5.
        let q = quotient_coalgebra(1);
        assert_eq!(q.total_dim(), 4);
        assert_eq!(
            (q.dim(0), q.dim(2), q.dim(3), q.dim(5)),
            (1, 1, 1, 1)
        );
        assert!(q.check_action(&MilnorAlgebra::new(1)).is_empty());
        // A(2)//A(1) has dimension 8 in degrees 0,4,6,7,10,11,13,17.
        let q2 = quotient_coalgebra(2);
        assert_eq!(q2.total_dim(), 8);
        for d in [0, 4, 6, 7, 10, 11, 13, 17] {
            assert_eq!(q2.dim(d), 1, "degree {d}");
        }
        assert!(q2.check_action(&MilnorAlgebra::new(2)).is_empty());
    }

    #[test]
    fn tensor_unit() {
        let m = stunted_projective(-3, 6, 1).unwrap();
        let f2 = f2_module(1);
        let t = tensor(&m, &f2).unwrap();
        assert_eq!(t.total_dim(), m.total_dim());
        for d in -3..=6 {
            assert_eq!(t.dim(d), m.dim(d));
        }
        let alg = MilnorAlgebra::new(1);
        for k in 0..=1u32 {
            for i in 0..m.total_dim() {
                if m.gens()[i].degree + (1 << k) > m.t_max {
                    continue;
                }
                assert_eq!(
                    t.act_gen(k, &vec![i]).len(),
                    m.act_gen(k, &vec![i]).len()
                );
            }
        }
        assert!(tensor(&m, &v0_module(1)).unwrap().check_action(&alg).is_empty());
    }

    #[test]
    fn tensor_cartan_example() {
        // Sq^1 on (g2 (x) x^-1) = g1 (x) x^-1 + g2 (x) x^0 in
        // R_1^1 (x) stunted: the Cartan expansion of the two factor actions.
        // In the dual basis the Koszul factor has Sq^1 (degree-2 class) =
        // (degree-3 class), so check on the degree-2 class instead.
        let r = koszul_module(1, 1, 100);
        let p = stunted_projective(-1, 6, 0).unwrap();
        let t = tensor(&r, &p).unwrap();
        let src = t.gen_index("g1(x)x-1").unwrap();
        let img = t.act_gen(0, &vec![src]);
        let rendered = t.render_elt(&img);
        assert_eq!(rendered, "g1(x)x0 + g2(x)x-1");
    }

    #[test]
    fn file_format_round_trip() {
        let m = stunted_projective(-5, 9, 1).unwrap();
        let alg = MilnorAlgebra::new(1);
        let text = m.to_text(&alg);
        let back = ModulePresentation::from_text(&text).unwrap();
        assert_eq!(back.total_dim(), m.total_dim());
        for k in 0..=1u32 {
            for i in 0..m.total_dim() {
                assert_eq!(back.act_gen(k, &vec![i]), m.act_gen(k, &vec![i]));
            }
        }
        assert!(back.check_action(&alg).is_empty());
    }

    #[test]
    fn file_format_rejects_bad_input() {
        assert!(ModulePresentation::from_text("gen a 0").is_err());
        assert!(ModulePresentation::from_text("profile 1\nwindow 5 0\n").is_err());
        let text = "profile 0\nwindow 0 1\ngen a 0\ngen b 1\nact Sq(2) a = b\n";
        assert!(ModulePresentation::from_text(text).is_err()); // Sq(2) not in A(0)
    }

    #[test]
    fn declared_non_generator_actions_are_checked() {
        // Q_1 = Sq(0,1) acts on the stunted module as the derived action;
        // a wrong declaration must be rejected.
        let good = "profile 1\nwindow 0 4\ngen a 0\ngen b 1\ngen c 3\ngen d 4\n\
                    act Sq(1) a = b\nact Sq(2) b = c\nact Sq(1) c = d\nact Sq(0,1) a = c\n";
        assert!(ModulePresentation::from_text(good).is_ok());
        let bad = "profile 1\nwindow 0 4\ngen a 0\ngen b 1\ngen c 3\ngen d 4\n\
                   act Sq(1) a = b\nact Sq(2) b = c\nact Sq(1) c = d\nact Sq(0,1) a = 0\n";
        assert!(ModulePresentation::from_text(bad).is_err());
    }

    #[test]
    fn suspension_commutes_with_tensor_dimensionwise() {
        let a = koszul_module(1, 2, 100);
        let b = v0_module(0);
        let t1 = tensor(&a.suspend(3), &b).unwrap();
        let t2 = tensor(&a, &b).unwrap().suspend(3);
        for d in t2.t_min..=t2.t_max {
            assert_eq!(t1.dim(d), t2.dim(d));
        }
    }
}
