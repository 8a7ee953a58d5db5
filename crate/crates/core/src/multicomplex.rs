//! Multicomplexes, their totalization, and `E' = E ∘ Tot`.
//!
//! The operator `d_i` has bidegree `(-i, 1-i)` and the family satisfies
//! `Σ_{i+j=l} (-1)^i d_i d_j = 0` for every `l`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bigraded::{Bidegree, BigradedMap, BigradedModule};
use crate::error::{Result, SseqError, Violation, ViolationKind};
use crate::field::Field;
use crate::filtered::{associated, comparison_to_path, e_of_morphism_between, FilteredComplex, FilteredMorphism};
use crate::linalg::{left_inverse, solve_affine, Matrix};
use crate::paths::{path, RHomotopy};
use crate::spectral::{SpectralMorphism, Ss};

pub fn op_shift(i: usize) -> Bidegree {
    Bidegree::new(-(i as i32), 1 - i as i32)
}

#[derive(Clone, Debug)]
pub struct Multicomplex<F> {
    module: BigradedModule,
    ops: Vec<BigradedMap<F>>,
}

impl<F: Field> PartialEq for Multicomplex<F> {
    fn eq(&self, other: &Self) -> bool {
        self.module == other.module && self.ops == other.ops
    }
}

impl<F: Field> Eq for Multicomplex<F> {}

impl<F: Field> Multicomplex<F> {
    /// `ops[i]` is `d_i`; trailing zero operators are dropped.
    pub fn new(module: BigradedModule, ops: Vec<BigradedMap<F>>) -> Result<Self, Violation> {
        let mc = Self::new_unchecked(module, ops);
        mc.validate()?;
        Ok(mc)
    }

    pub fn new_unchecked(module: BigradedModule, mut ops: Vec<BigradedMap<F>>) -> Self {
        while ops.last().is_some_and(|d| d.is_zero()) {
            ops.pop();
        }
        Multicomplex { module, ops }
    }

    pub fn zero() -> Self {
        Multicomplex {
            module: BigradedModule::zero(),
            ops: Vec::new(),
        }
    }

    /// A module with every operator zero.
    pub fn discrete(module: BigradedModule) -> Self {
        Multicomplex { module, ops: Vec::new() }
    }

    pub fn module(&self) -> &BigradedModule {
        &self.module
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    pub fn op(&self, i: usize) -> BigradedMap<F> {
        self.ops
            .get(i)
            .cloned()
            .unwrap_or_else(|| BigradedMap::zero(self.module.clone(), self.module.clone(), op_shift(i)))
    }

    pub fn ops(&self) -> &[BigradedMap<F>] {
        &self.ops
    }

    /// `Σ_{i+j=l} (-1)^i d_i d_j`.
    pub fn relation(&self, l: usize) -> BigradedMap<F> {
        let mut acc = BigradedMap::zero(self.module.clone(), self.module.clone(), op_shift(l) + Bidegree::new(0, 1));
        for i in 0..=l {
            let term = self.op(i).compose(&self.op(l - i));
            acc = if i % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }

    pub fn validate(&self) -> Result<(), Violation> {
        for (i, d) in self.ops.iter().enumerate() {
            if d.shift() != op_shift(i) || d.source() != &self.module || d.target() != &self.module {
                return Err(Violation::new(ViolationKind::WrongBidegree, format!("d_{i} has the wrong shape")));
            }
            d.validate_shapes()?;
        }
        for l in 0..=2 * self.ops.len() {
            let rel = self.relation(l);
            let bad = rel.blocks().find(|(_, m)| !m.is_zero()).map(|(x, _)| x);
            if let Some(x) = bad {
                return Err(Violation::new(
                    ViolationKind::MulticomplexRelation { l },
                    format!("Σ_(i+j={l}) (-1)^i d_i d_j ≠ 0"),
                )
                .at(x));
            }
        }
        Ok(())
    }

    /// `d_i = 0` for all `i ≥ n`.
    pub fn is_n_multicomplex(&self, n: usize) -> bool {
        self.ops.iter().skip(n).all(|d| d.is_zero())
    }

    pub fn direct_sum(parts: &[&Multicomplex<F>]) -> Self {
        let module = BigradedModule::direct_sum(&parts.iter().map(|p| &p.module).collect::<Vec<_>>());
        let n = parts.iter().map(|p| p.ops.len()).max().unwrap_or(0);
        let ops = (0..n)
            .map(|i| {
                let ds: Vec<BigradedMap<F>> = parts.iter().map(|p| p.op(i)).collect();
                BigradedMap::direct_sum(&ds.iter().collect::<Vec<_>>())
            })
            .collect();
        Self::new_unchecked(module, ops)
    }

    /// Conjugate every operator by a bidegree-preserving automorphism.
    pub fn conjugate(&self, phi: &BigradedMap<F>) -> Result<Self> {
        let inv = phi
            .inverse()
            .ok_or_else(|| SseqError::Invariant("conjugating map is not invertible".into()))?;
        let ops = self.ops.iter().map(|d| phi.compose(&d.compose(&inv))).collect();
        Ok(Self::new_unchecked(self.module.clone(), ops))
    }
}

/// Strict morphism: one bidegree-`(0,0)` map commuting with every `d_i`.
#[derive(Clone, Debug)]
pub struct MultiMorphism<F> {
    source: Arc<Multicomplex<F>>,
    target: Arc<Multicomplex<F>>,
    map: BigradedMap<F>,
}

impl<F: Field> PartialEq for MultiMorphism<F> {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.map == other.map
    }
}

impl<F: Field> MultiMorphism<F> {
    pub fn new(source: Arc<Multicomplex<F>>, target: Arc<Multicomplex<F>>, map: BigradedMap<F>) -> Result<Self> {
        if map.source() != source.module() || map.target() != target.module() || map.shift() != Bidegree::ZERO {
            return Err(SseqError::Invariant("strict morphism has the wrong shape".into()));
        }
        map.validate_shapes()?;
        let n = source.num_ops().max(target.num_ops());
        for i in 0..n {
            let lhs = target.op(i).compose(&map);
            let rhs = map.compose(&source.op(i));
            if let Some(x) = source.module().support().find(|&x| lhs.block(x) != rhs.block(x)) {
                return Err(SseqError::NonChainMap { bidegree: x });
            }
        }
        Ok(MultiMorphism { source, target, map })
    }

    pub fn identity(a: Arc<Multicomplex<F>>) -> Self {
        let map = BigradedMap::identity(a.module());
        MultiMorphism {
            source: a.clone(),
            target: a,
            map,
        }
    }

    pub fn zero(source: Arc<Multicomplex<F>>, target: Arc<Multicomplex<F>>) -> Self {
        let map = BigradedMap::zero(source.module().clone(), target.module().clone(), Bidegree::ZERO);
        MultiMorphism { source, target, map }
    }

    pub fn source(&self) -> &Arc<Multicomplex<F>> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Multicomplex<F>> {
        &self.target
    }

    pub fn map(&self) -> &BigradedMap<F> {
        &self.map
    }

    pub fn compose(&self, other: &MultiMorphism<F>) -> Self {
        MultiMorphism {
            source: other.source.clone(),
            target: self.target.clone(),
            map: self.map.compose(&other.map),
        }
    }
}

pub fn validate_multicomplex<F: Field>(a: &Multicomplex<F>) -> Result<(), Violation> {
    a.validate()
}

/// Position of each bidegree inside its total degree `n = q - p`.
struct TotLayout {
    offsets: BTreeMap<Bidegree, usize>,
    levels: BTreeMap<i32, Vec<i32>>,
}

impl TotLayout {
    fn new(m: &BigradedModule) -> Self {
        let mut offsets = BTreeMap::new();
        let mut levels: BTreeMap<i32, Vec<i32>> = BTreeMap::new();
        for (x, d) in m.entries() {
            let lv = levels.entry(x.q - x.p).or_default();
            offsets.insert(x, lv.len());
            lv.extend(std::iter::repeat_n(x.p, d));
        }
        TotLayout { offsets, levels }
    }

    fn dim(&self, n: i32) -> usize {
        self.levels.get(&n).map_or(0, Vec::len)
    }
}

/// Totalization: `Tot^n = ⊕_{q-p=n} A^{p,q}`, `F_s = ⊕_{p≤s}`,
/// `D = Σ_i (-1)^{i·n} d_i` on total degree `n`.
pub fn tot<F: Field>(a: &Multicomplex<F>) -> Result<FilteredComplex<F>> {
    let lay = TotLayout::new(a.module());
    let mut diffs: BTreeMap<i32, Matrix<F>> = lay.levels.keys().map(|&n| (n, Matrix::zeros(lay.dim(n + 1), lay.dim(n)))).collect();
    for (i, d) in a.ops().iter().enumerate() {
        for (x, block) in d.blocks() {
            let n = x.q - x.p;
            let y = x + op_shift(i);
            let b = if (i as i64 * n as i64) % 2 == 0 { block.clone() } else { block.neg() };
            diffs.get_mut(&n).expect("source degree").set_block(lay.offsets[&y], lay.offsets[&x], &b);
        }
    }
    FilteredComplex::new(lay.levels, diffs).map_err(|v| SseqError::Invariant(format!("totalization: {v}")))
}

pub fn tot_morphism<F: Field>(f: &MultiMorphism<F>, ta: &Arc<FilteredComplex<F>>, tb: &Arc<FilteredComplex<F>>) -> Result<FilteredMorphism<F>> {
    let (la, lb) = (TotLayout::new(f.source().module()), TotLayout::new(f.target().module()));
    let mut maps: BTreeMap<i32, Matrix<F>> = la.levels.keys().map(|&n| (n, Matrix::zeros(lb.dim(n), la.dim(n)))).collect();
    for (x, block) in f.map().blocks() {
        maps.get_mut(&(x.q - x.p))
            .expect("source degree")
            .set_block(lb.offsets[&x], la.offsets[&x], block);
    }
    FilteredMorphism::new(ta.clone(), tb.clone(), maps)
}

/// `E'(A) = E(Tot A)`.
pub fn eprime<F: Field>(a: &Multicomplex<F>) -> Result<Ss<F>> {
    Ok(associated(&Arc::new(tot(a)?))?.ss)
}

/// `E'(f) = E(Tot f)`.
pub fn eprime_of_morphism<F: Field>(f: &MultiMorphism<F>) -> Result<SpectralMorphism<F>> {
    let ta = Arc::new(tot(f.source())?);
    let tb = Arc::new(tot(f.target())?);
    let tf = tot_morphism(f, &ta, &tb)?;
    e_of_morphism_between(&tf, &associated(&ta)?, &associated(&tb)?)
}

/// `Λ_r` read as a multicomplex: `e_±` at `(0,0)`, `u` at `(-r,1-r)`,
/// `d_r e_- = -u`, `d_r e_+ = u`.
pub fn lambda_mc<F: Field>(r: usize) -> Multicomplex<F> {
    mc_path(r, &Multicomplex::discrete(BigradedModule::unit(Bidegree::ZERO))).object.as_ref().clone()
}

/// `Λ_r ⊗ B` with its structure maps.
#[derive(Clone, Debug)]
pub struct McPath<F> {
    pub r: usize,
    pub object: Arc<Multicomplex<F>>,
    pub base: Arc<Multicomplex<F>>,
    pub iota: MultiMorphism<F>,
    pub d_minus: MultiMorphism<F>,
    pub d_plus: MultiMorphism<F>,
}

/// Summands `e_-⊗A`, `e_+⊗A`, `u⊗A`. With `|x| = q - p`,
/// `d_i(x⊗a) = d_i x⊗a + (-1)^{q_x + i|x|} x⊗d_i a`.
pub fn mc_path<F: Field>(r: usize, a: &Multicomplex<F>) -> McPath<F> {
    let s = Bidegree::homotopy(r);
    let am = a.module();
    let um = am.shifted(s);
    let n = a.num_ops().max(r + 1);
    let to_u = BigradedMap::shift_identity(am, s);
    let from_minus = to_u.neg();
    let ops: Vec<BigradedMap<F>> = (0..n)
        .map(|i| {
            let d = a.op(i);
            let du = d.reindexed(s);
            let du = if (1 + r + i).is_multiple_of(2) { du } else { du.neg() };
            let (dm, dp) = if i == r { (Some(&from_minus), Some(&to_u)) } else { (None, None) };
            BigradedMap::block_matrix(
                &[am, am, &um],
                &[am, am, &um],
                op_shift(i),
                &[
                    vec![Some(&d), None, None],
                    vec![None, Some(&d), None],
                    vec![dm, dp, Some(&du)],
                ],
            )
        })
        .collect();
    let module = BigradedModule::direct_sum(&[am, am, &um]);
    let object = Arc::new(Multicomplex::new(module, ops).expect("Λ_r ⊗ A satisfies the multicomplex relation"));
    let base = Arc::new(a.clone());
    let id = BigradedMap::identity(am);
    let iota = BigradedMap::block_matrix(&[am], &[am, am, &um], Bidegree::ZERO, &[vec![Some(&id)], vec![Some(&id)], vec![None]]);
    let dm = BigradedMap::block_matrix(&[am, am, &um], &[am], Bidegree::ZERO, &[vec![Some(&id), None, None]]);
    let dp = BigradedMap::block_matrix(&[am, am, &um], &[am], Bidegree::ZERO, &[vec![None, Some(&id), None]]);
    McPath {
        r,
        iota: MultiMorphism::new(base.clone(), object.clone(), iota).expect("ι"),
        d_minus: MultiMorphism::new(object.clone(), base.clone(), dm).expect("∂^-"),
        d_plus: MultiMorphism::new(object.clone(), base.clone(), dp).expect("∂^+"),
        object,
        base,
    }
}

#[derive(Clone, Debug)]
pub struct McPullback<F> {
    pub object: Arc<Multicomplex<F>>,
    pub pi_u: MultiMorphism<F>,
    pub pi_a: MultiMorphism<F>,
}

/// `X = Ker(p - g: U ⊕ A -> B)` with `d_i(u,a) = (d_i u, d_i a)`.
pub fn mc_pullback<F: Field>(g: &MultiMorphism<F>, p: &MultiMorphism<F>) -> Result<McPullback<F>> {
    if g.target() != p.target() {
        return Err(SseqError::Invariant("pullback needs a common target".into()));
    }
    let (u, a) = (g.source(), p.source());
    let (um, am) = (u.module(), a.module());
    let neg_p = p.map().neg();
    let diff = BigradedMap::block_matrix(&[um, am], &[g.target().module()], Bidegree::ZERO, &[vec![Some(g.map()), Some(&neg_p)]]);
    let sum = BigradedModule::direct_sum(&[um, am]);
    let mut bases = BTreeMap::new();
    let mut xm = BigradedModule::zero();
    for s in sum.support() {
        let k = diff.block(s).kernel_basis();
        xm.add_dim(s, k.cols());
        bases.insert(s, k);
    }
    let inclusion = BigradedMap::from_fn(xm.clone(), sum.clone(), Bidegree::ZERO, |s, _, _| bases[&s].clone());
    let retraction = BigradedMap::from_fn(sum.clone(), xm.clone(), Bidegree::ZERO, |s, _, _| left_inverse(&bases[&s]));
    let sum_mc = Multicomplex::direct_sum(&[u, a]);
    let ops = sum_mc.ops().iter().map(|d| retraction.compose(&d.compose(&inclusion))).collect();
    let object = Arc::new(Multicomplex::new(xm, ops)?);
    let id_u = BigradedMap::identity(um);
    let id_a = BigradedMap::identity(am);
    let pu = BigradedMap::block_matrix(&[um, am], &[um], Bidegree::ZERO, &[vec![Some(&id_u), None]]);
    let pa = BigradedMap::block_matrix(&[um, am], &[am], Bidegree::ZERO, &[vec![None, Some(&id_a)]]);
    Ok(McPullback {
        pi_u: MultiMorphism::new(object.clone(), u.clone(), pu.compose(&inclusion))?,
        pi_a: MultiMorphism::new(object.clone(), a.clone(), pa.compose(&inclusion))?,
        object,
    })
}

/// Product with its two projections.
pub fn mc_product<F: Field>(a: &Arc<Multicomplex<F>>, b: &Arc<Multicomplex<F>>) -> (Arc<Multicomplex<F>>, MultiMorphism<F>, MultiMorphism<F>) {
    let x = Arc::new(Multicomplex::direct_sum(&[a, b]));
    let (am, bm) = (a.module(), b.module());
    let pa = BigradedMap::block_matrix(&[am, bm], &[am], Bidegree::ZERO, &[vec![Some(&BigradedMap::identity(am)), None]]);
    let pb = BigradedMap::block_matrix(&[am, bm], &[bm], Bidegree::ZERO, &[vec![None, Some(&BigradedMap::identity(bm))]]);
    (
        x.clone(),
        MultiMorphism::new(x.clone(), a.clone(), pa).expect("projection"),
        MultiMorphism::new(x, b.clone(), pb).expect("projection"),
    )
}

/// `h: A -> Λ_r ⊗ B` is a strict morphism with `∂^- h = f` and `∂^+ h = g`.
pub fn mc_strict_homotopy_check<F: Field>(h: &BigradedMap<F>, f: &MultiMorphism<F>, g: &MultiMorphism<F>, pb: &McPath<F>) -> bool {
    let Ok(h) = MultiMorphism::new(f.source().clone(), pb.object.clone(), h.clone()) else {
        return false;
    };
    pb.d_minus.compose(&h).map() == f.map() && pb.d_plus.compose(&h).map() == g.map()
}

/// Sends a strict homotopy `h: A -> Λ_r ⊗ B` to an r-homotopy `E'(f) ≃_r E'(g)`.
pub fn eprime_homotopy<F: Field>(h: &MultiMorphism<F>, pb: &McPath<F>) -> Result<RHomotopy<F>> {
    let r = pb.r;
    let ta = Arc::new(tot(h.source())?);
    let tb = Arc::new(tot(&pb.base)?);
    let tp = Arc::new(tot(&pb.object)?);
    let (ea, eb, ep) = (associated(&ta)?, associated(&tb)?, associated(&tp)?);
    let eh = e_of_morphism_between(&tot_morphism(h, &ta, &tp)?, &ea, &ep)?;
    let dm = e_of_morphism_between(&tot_morphism(&pb.d_minus, &tp, &tb)?, &ep, &eb)?;
    let dp = e_of_morphism_between(&tot_morphism(&pb.d_plus, &tp, &tb)?, &ep, &eb)?;
    let target_path = path(r, &eb.ss);
    let phi = comparison_to_path(&ep.ss, &target_path, &dm, &dp)
        .ok_or_else(|| SseqError::Invariant("no comparison map E'(Λ ⊗ B) -> P(r; E'(B))".into()))?;
    let k = phi.compose(&eh);
    let spectral = RHomotopy::from_path_morphism(&k, &target_path)?;
    RHomotopy::new(r, dm.compose(&eh), dp.compose(&eh), spectral.map(0).clone())
}

/// Basis of strict morphisms `A -> B`.
pub fn mc_hom_basis<F: Field>(a: &Arc<Multicomplex<F>>, b: &Arc<Multicomplex<F>>) -> Vec<MultiMorphism<F>> {
    let (am, bm) = (a.module().clone(), b.module().clone());
    let n = BigradedMap::<F>::num_coords(&am, &bm, Bidegree::ZERO);
    let k = a.num_ops().max(b.num_ops());
    let sol = solve_affine(n, |x| {
        let f = BigradedMap::from_coords(am.clone(), bm.clone(), Bidegree::ZERO, x);
        (0..k)
            .flat_map(|i| b.op(i).compose(&f).sub(&f.compose(&a.op(i))).coords())
            .collect()
    });
    sol.kernel
        .columns()
        .iter()
        .map(|c| {
            let f = BigradedMap::from_coords(am.clone(), bm.clone(), Bidegree::ZERO, c);
            MultiMorphism::new(a.clone(), b.clone(), f).expect("solution of the commutation system")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::F7;
    use crate::filtered::lambda_fc;
    use crate::paths::{is_r_homotopy, lambda};
    use crate::spectral::isomorphic;

    type F = F7;

    fn bicomplex_square() -> Multicomplex<F> {
        // a at (0,0), b = d_0 a at (0,1), c = d_1 a at (-1,0), e at (-1,1)
        let m = BigradedModule::new([
            (Bidegree::new(0, 0), 1),
            (Bidegree::new(0, 1), 1),
            (Bidegree::new(-1, 0), 1),
            (Bidegree::new(-1, 1), 1),
        ]);
        let one = || Matrix::<F>::identity(1);
        let d0 = BigradedMap::from_blocks(
            m.clone(),
            m.clone(),
            op_shift(0),
            [(Bidegree::new(0, 0), one()), (Bidegree::new(-1, 0), one())],
        )
        .unwrap();
        let d1 = BigradedMap::from_blocks(
            m.clone(),
            m.clone(),
            op_shift(1),
            [(Bidegree::new(0, 0), one()), (Bidegree::new(0, 1), one())],
        )
        .unwrap();
        Multicomplex::new(m, vec![d0, d1]).unwrap()
    }

    #[test]
    fn lambda_multicomplex() {
        for r in 0..4 {
            let l = lambda_mc::<F>(r);
            assert!(l.validate().is_ok());
            assert!(l.is_n_multicomplex(r + 1));
            assert!(!l.is_n_multicomplex(r));
            let t = tot(&l).unwrap();
            assert_eq!(&t, lambda_fc::<F>(r).as_ref());
            assert!(isomorphic(&eprime(&l).unwrap(), &lambda(r)).is_some());
        }
    }

    #[test]
    fn bicomplex_is_valid_and_acyclic() {
        let b = bicomplex_square();
        assert!(b.is_n_multicomplex(2));
        let e = eprime(&b).unwrap();
        assert!(e.validate().is_ok());
        assert!(e.module(1).is_zero());
    }

    #[test]
    fn broken_relation_reports_level() {
        let b = bicomplex_square();
        let mut d1 = b.op(1);
        d1.set_block(Bidegree::new(0, 1), Matrix::from_i64_rows(&[&[2]]));
        let err = Multicomplex::new(b.module().clone(), vec![b.op(0), d1]).unwrap_err();
        assert_eq!(err.kind, ViolationKind::MulticomplexRelation { l: 1 });
    }

    #[test]
    fn path_of_bicomplex() {
        let b = bicomplex_square();
        for r in 0..3 {
            let p = mc_path(r, &b);
            let e = eprime(&p.object).unwrap();
            assert!(isomorphic(&e, &path(r, &eprime(&b).unwrap()).object).is_some(), "r = {r}");
        }
    }

    #[test]
    fn reflexive_strict_homotopy() {
        let b = Arc::new(bicomplex_square());
        let id = MultiMorphism::identity(b.clone());
        let p = mc_path(1, &b);
        let h = p.iota.compose(&id);
        assert!(mc_strict_homotopy_check(h.map(), &id, &id, &p));
        let w = eprime_homotopy(&h, &p).unwrap();
        assert!(is_r_homotopy(&w));
        let bad = BigradedMap::zero(b.module().clone(), p.object.module().clone(), Bidegree::ZERO);
        assert!(!mc_strict_homotopy_check(&bad, &id, &id, &p));
    }

    #[test]
    fn pullback_along_identity() {
        let b = Arc::new(bicomplex_square());
        let id = MultiMorphism::identity(b.clone());
        let pb = mc_pullback(&id, &id).unwrap();
        assert_eq!(pb.object.module(), b.module());
        assert_eq!(mc_hom_basis(&b, &b).len(), 1);
    }
}
