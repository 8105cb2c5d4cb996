//! Algebraic E-based Mahowald invariants over the stunted tower.
//!
//! For alpha in Ext_{A(n-1)}(F_2), realized in the chart of a deep stunted
//! module H^*(Sigma P^infty_{-K}) through the change-of-rings splitting, the
//! invariant is computed by walking the truncation family downward: N is
//! minimal with nonzero image in the chart of Sigma P^infty_{-N}, and the
//! coset of lifts through the bottom-cell quotient gives the representative
//! and its indeterminacy in Ext_{A(n)}(F_2).

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::milnor::MilnorAlgebra;
use crate::module::{f2_module, suspended_stunted, ModuleMap};
use crate::resolution::{induced_map, named_product, ChartMap, FreeResolution, PinTable};
use std::collections::BTreeMap;
use std::sync::Arc;

/// The computed invariant of one input class.
#[derive(Clone)]
pub struct MICoset {
    pub n: u32,
    /// Bidegree (s, t) of the input in Ext_{A(n-1)}(F_2).
    pub input: (u32, i32),
    /// Minimal N with nonzero image in the chart of Sigma P^infty_{-N}.
    pub detection: u32,
    /// Bidegree (s, t + N - 1) of the representative in Ext_{A(n)}(F_2).
    pub bidegree: (u32, i32),
    pub representative: BitVec,
    pub indeterminacy: Vec<BitVec>,
    /// Bottom-cell index at which the input was stabilized.
    pub stabilized_at: u32,
}

impl MICoset {
    pub fn indeterminacy_dim(&self) -> usize {
        self.indeterminacy.len()
    }

    /// Coset membership: v = representative modulo indeterminacy?
    pub fn contains(&self, v: &BitVec) -> bool {
        let mut diff = v.clone();
        diff.add_assign(&self.representative);
        let sub = crate::bits::Subspace::from_vectors(diff.len(), &self.indeterminacy);
        sub.contains(&diff)
    }
}

/// Charts of H^*(Sigma P^infty_{-N}) for N in range, with the bottom-cell
/// collapse maps between consecutive stages.
pub struct TruncationFamily {
    pub n: u32,
    pub n_lo: u32,
    pub n_hi: u32,
    pub s_max: u32,
    pub t_max: i32,
    /// resolutions[N - n_lo] resolves H^*(Sigma P^infty_{-N}).
    resolutions: Vec<FreeResolution>,
    /// maps[N - n_lo - 1]: chart(N) -> chart(N-1), induced by inclusion.
    maps: Vec<ChartMap>,
    /// Resolution of F_2 over A(n), for bottom-cell lifting and products.
    pub f2_res: FreeResolution,
}

impl TruncationFamily {
    pub fn compute(n: u32, n_lo: u32, n_hi: u32, s_max: u32, t_max: i32) -> Result<Self> {
        assert!(n_lo < n_hi);
        let alg = Arc::new(MilnorAlgebra::new(n));
        let mut resolutions = Vec::new();
        for big_n in n_lo..=n_hi {
            let m = suspended_stunted(big_n as i32, t_max, n)?;
            resolutions.push(FreeResolution::compute(Arc::clone(&alg), m, s_max, t_max)?);
        }
        let mut maps = Vec::new();
        for big_n in (n_lo + 1)..=n_hi {
            let r_small = &resolutions[(big_n - 1 - n_lo) as usize];
            let r_big = &resolutions[(big_n - n_lo) as usize];
            let incl = ModuleMap::by_name(&r_small.module, &r_big.module);
            maps.push(induced_map(&incl, r_small, r_big)?);
        }
        // F_2 chart out to the largest representative degree we can need.
        let f2_res = FreeResolution::compute(
            Arc::clone(&alg),
            f2_module(n),
            s_max,
            t_max + n_hi as i32,
        )?;
        Ok(TruncationFamily {
            n,
            n_lo,
            n_hi,
            s_max,
            t_max,
            resolutions,
            maps,
            f2_res,
        })
    }

    pub fn resolution(&self, big_n: u32) -> &FreeResolution {
        &self.resolutions[(big_n - self.n_lo) as usize]
    }

    /// chart(N) -> chart(N-1).
    pub fn collapse_map(&self, big_n: u32) -> &ChartMap {
        &self.maps[(big_n - self.n_lo - 1) as usize]
    }

    pub fn dim(&self, big_n: u32, s: u32, t: i32) -> usize {
        self.resolution(big_n).dim(s, t)
    }

    /// Functoriality check: composing consecutive collapse maps agrees with
    /// the map induced by the two-step inclusion.
    pub fn verify_functorial(&self, big_n: u32, s: u32, t: i32) -> Result<()> {
        if big_n < self.n_lo + 2 {
            return Ok(());
        }
        let two_small = self.resolution(big_n - 2);
        let big = self.resolution(big_n);
        let incl = ModuleMap::by_name(&two_small.module, &big.module);
        let direct = induced_map(&incl, two_small, big)?;
        let m1 = self.collapse_map(big_n).matrix(s, t);
        let m2 = self.collapse_map(big_n - 1).matrix(s, t);
        let d = direct.matrix(s, t);
        match (m1, m2, d) {
            (Some(m1), Some(m2), Some(d)) => {
                if &m2.multiply(m1) != d {
                    return Err(Error::Verify(format!(
                        "collapse maps fail to compose at N = {big_n}, ({s},{t})"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The algebraic Mahowald invariant of the class at input bidegree
    /// (s, t) of Ext_{A(n-1)}(F_2).
    ///
    /// The class is located in the stabilized chart: the bidegree must be
    /// one-dimensional at the two deepest stages with the collapse map an
    /// isomorphism between them.
    pub fn algebraic_mi(&self, s: u32, t: i32) -> Result<MICoset> {
        let k = self.n_hi;
        if self.dim(k, s, t) != 1 || self.dim(k - 1, s, t) != 1 {
            return Err(Error::NotDetected(format!(
                "bidegree ({s},{t}) is not 1-dimensional at the stabilized bottom \
                 (dims {} and {}); enlarge N range",
                self.dim(k, s, t),
                self.dim(k - 1, s, t)
            )));
        }
        let stab = self
            .collapse_map(k)
            .matrix(s, t)
            .ok_or_else(|| Error::NotDetected("no collapse map at bidegree".into()))?;
        if stab.rank() != 1 {
            return Err(Error::NotDetected(format!(
                "chart not stabilized at ({s},{t}): collapse map has rank {}",
                stab.rank()
            )));
        }
        // Walk the class down the family.
        let mut v = BitVec::zeros(1);
        v.set(0, true);
        let mut current = v;
        let mut detection = None;
        for big_n in (self.n_lo + 1..=self.n_hi).rev() {
            let next = self
                .collapse_map(big_n)
                .apply(s, t, &current)
                .unwrap_or_else(|| BitVec::zeros(self.dim(big_n - 1, s, t)));
            if next.is_zero() {
                detection = Some(big_n);
                break;
            }
            current = next;
        }
        let Some(n_det) = detection else {
            return Err(Error::NotDetected(format!(
                "image of ({s},{t}) still nonzero at the bottom of the range N = {}",
                self.n_lo
            )));
        };
        if n_det == 0 {
            return Err(Error::NotDetected("detected at N = 0".into()));
        }
        // Lift through the bottom-cell quotient q : W_N -> Sigma^{-N+1} F_2.
        let res_n = self.resolution(n_det);
        let module = &res_n.module;
        let bottom_degree = 1 - n_det as i32;
        let bottom = module
            .gen_index(&format!("x{}", bottom_degree - 1))
            .ok_or_else(|| Error::NotDetected("missing bottom cell".into()))?;
        let shifted_f2 = f2_module(self.n).suspend(bottom_degree);
        let mut q = ModuleMap::zero(module);
        q.images[bottom] = vec![0];
        let alg = &res_n.alg;
        let r_f2_shift = FreeResolution::compute(
            Arc::clone(alg),
            shifted_f2.clone(),
            self.s_max,
            self.t_max,
        )?;
        let qmap = induced_map(&q, res_n, &r_f2_shift)?;
        let matrix = qmap
            .matrix(s, t)
            .ok_or_else(|| Error::NotDetected("bottom-cell map missing bidegree".into()))?;
        let rep = matrix.solve(&current).ok_or_else(|| {
            Error::NotDetected(format!(
                "detected class at N = {n_det} does not lift to the bottom cell"
            ))
        })?;
        let indeterminacy = matrix.kernel_basis();
        let coset = MICoset {
            n: self.n,
            input: (s, t),
            detection: n_det,
            bidegree: (s, t + n_det as i32 - 1),
            representative: rep,
            indeterminacy,
            stabilized_at: self.n_hi,
        };
        // Nontriviality: the representative lies outside the indeterminacy.
        let sub =
            crate::bits::Subspace::from_vectors(coset.representative.len(), &coset.indeterminacy);
        if sub.contains(&coset.representative) {
            return Err(Error::NotDetected(
                "representative inside indeterminacy; coset trivial".into(),
            ));
        }
        Ok(coset)
    }

    /// Check a multiplicative relation M(multiplier_input * x) =
    /// theta * M(x) as an equality of cosets, with theta a pinned class of
    /// the F_2 chart.
    pub fn check_relation(
        &self,
        pins: &PinTable,
        theta: &str,
        lhs: &MICoset,
        rhs: &MICoset,
    ) -> Result<()> {
        let prod = named_product(&self.f2_res, &self.f2_res, pins, theta)?;
        let (s0, t0, _) = pins.find(theta).unwrap();
        let (bs, bt) = rhs.bidegree;
        if lhs.bidegree != (bs + s0, bt + t0) {
            return Err(Error::Verify(format!(
                "bidegree mismatch: M(lhs) at {:?}, {theta} * M(rhs) lands at {:?}",
                lhs.bidegree,
                (bs + s0, bt + t0)
            )));
        }
        let matrix = prod
            .matrix(bs, bt)
            .ok_or_else(|| Error::Verify("product matrix missing".into()))?;
        let image = matrix.apply(&rhs.representative);
        // Coset equality: image of the representative agrees with the lhs
        // representative modulo both indeterminacies.
        let mut indets = lhs.indeterminacy.clone();
        for v in &rhs.indeterminacy {
            indets.push(matrix.apply(v));
        }
        let sub = crate::bits::Subspace::from_vectors(image.len(), &indets);
        let mut diff = image.clone();
        diff.add_assign(&lhs.representative);
        if !sub.contains(&diff) {
            return Err(Error::Verify(format!(
                "coset mismatch: {theta} * M(x) differs from M({theta}-multiple input) \
                 at bidegree {:?}",
                lhs.bidegree
            )));
        }
        Ok(())
    }
}

/// One line of the CLI-facing report: input -> (N, representative bidegree,
/// indeterminacy dim).
pub fn report_line(name: &str, coset: &MICoset, rep_name: &str) -> String {
    format!(
        "{name} -> (N = {}, {rep_name} at ({}, {}), indeterminacy dim {})",
        coset.detection, coset.bidegree.0, coset.bidegree.1, coset.indeterminacy.len(),
    )
}

/// The bo table: inputs h_0^k for k = 0..=max_power, over A(1).
pub fn bo_table(
    family: &TruncationFamily,
) -> Result<BTreeMap<u32, MICoset>> {
    assert_eq!(family.n, 1);
    let mut out = BTreeMap::new();
    let max_power = ((family.s_max as i32 - 1).max(0)) as u32;
    for k in 0..=max_power {
        match family.algebraic_mi(k, k as i32) {
            Ok(c) => {
                out.insert(k, c);
            }
            Err(Error::NotDetected(_)) if k > 0 => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1_pins() -> PinTable {
        let mut pins = PinTable::empty();
        pins.insert(1, 1, 0, "h0");
        pins.insert(1, 2, 0, "h1");
        pins.insert(3, 7, 0, "alpha");
        pins.insert(4, 12, 0, "beta");
        pins
    }

    #[test]
    fn bo_table_base_rows() {
        // 1 -> 1, h0 -> h1, h0^2 -> h1^2, h0^3 -> alpha.
        let family = TruncationFamily::compute(1, 0, 9, 7, 12).unwrap();
        let pins = a1_pins();
        let unit = family.algebraic_mi(0, 0).unwrap();
        assert_eq!(unit.detection, 1);
        assert_eq!(unit.bidegree, (0, 0));

        let m_h0 = family.algebraic_mi(1, 1).unwrap();
        assert_eq!(m_h0.detection, 2);
        assert_eq!(m_h0.bidegree, (1, 2)); // h1
        let (s, t, idx) = pins.find("h1").unwrap();
        assert_eq!((s, t), m_h0.bidegree);
        assert!(m_h0.representative.get(idx));

        let m_h02 = family.algebraic_mi(2, 2).unwrap();
        assert_eq!(m_h02.bidegree, (2, 4)); // h1^2

        let m_h03 = family.algebraic_mi(3, 3).unwrap();
        assert_eq!(m_h03.bidegree, (3, 7)); // alpha
        assert_eq!(m_h03.detection, 5);
    }

    #[test]
    fn family_maps_compose() {
        let family = TruncationFamily::compute(1, 0, 6, 4, 8).unwrap();
        for n in 2..=6u32 {
            family.verify_functorial(n, 2, 2).unwrap();
            family.verify_functorial(n, 1, 2).unwrap();
        }
    }

    #[test]
    fn dims_stabilize_along_tower() {
        // Fixed bidegree dims become constant as the bottom cell drops.
        let family = TruncationFamily::compute(1, 0, 8, 4, 8).unwrap();
        let d7 = family.dim(7, 2, 2);
        let d8 = family.dim(8, 2, 2);
        assert_eq!(d7, d8, "(2,2) should have stabilized");
    }

    #[test]
    fn not_detected_reports_range_exhaustion() {
        // A tiny range cannot detect h0^3 (needs N = 5).
        let family = TruncationFamily::compute(1, 0, 3, 5, 9).unwrap();
        match family.algebraic_mi(3, 3) {
            Err(Error::NotDetected(_)) => {}
            other => panic!("expected NotDetected, got {:?}", other.map(|c| c.detection)),
        }
    }

    #[test]
    fn h0_tower_relation_through_beta() {
        // M(h0^4) = beta * M(1) and M(h0^5) = beta * M(h0), as cosets.
        let family = TruncationFamily::compute(1, 0, 13, 10, 16).unwrap();
        let pins = a1_pins();
        let m1 = family.algebraic_mi(0, 0).unwrap();
        let m4 = family.algebraic_mi(4, 4).unwrap();
        assert_eq!(m4.bidegree, (4, 12)); // beta
        family.check_relation(&pins, "beta", &m4, &m1).unwrap();

        let mh = family.algebraic_mi(1, 1).unwrap();
        let m5 = family.algebraic_mi(5, 5).unwrap();
        assert_eq!(m5.bidegree, (5, 14)); // beta h1
        family.check_relation(&pins, "beta", &m5, &mh).unwrap();
    }

    #[test]
    fn detection_n_monotone_along_h0_tower() {
        let family = TruncationFamily::compute(1, 0, 13, 10, 16).unwrap();
        let mut last = 0;
        for k in 0..=5u32 {
            let c = family.algebraic_mi(k, k as i32).unwrap();
            assert!(c.detection >= last, "N(h0^{k}) dropped");
            last = c.detection;
        }
    }
}
