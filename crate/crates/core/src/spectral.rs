//! Spectral sequences and their morphisms.
//!
//! A spectral sequence is stored as a finite tower of pages `A_0, …, A_M`
//! whose last page has zero differential. Pages beyond `M` are implicitly
//! equal to `A_M` with identity characteristic maps.

use std::borrow::Cow;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bigraded::{
    homology, pullback_rcomplex, Bidegree, Subquotient, BigradedMap, BigradedModule, HomologyData, RComplex, RPullback,
};
use crate::error::{Result, SseqError, Violation, ViolationKind};
use crate::field::Field;
use crate::linalg::{solve_affine, AffineSolution, Matrix};

/// A spectral sequence with explicit characteristic isomorphisms
/// `ψ_m : H(A_m) -> A_{m+1}` expressed in the deterministic homology bases.
#[derive(Clone, Debug)]
pub struct SpectralSequence<F> {
    pages: Vec<RComplex<F>>,
    psi: Vec<BigradedMap<F>>,
    homology: Vec<HomologyData<F>>,
    /// `ψ_m ∘ projection_m : A_m -> A_{m+1}`, meaningful on cycles.
    transfer: Vec<BigradedMap<F>>,
    /// `section_m ∘ ψ_m^{-1} : A_{m+1} -> Z(A_m)`.
    lift: Vec<BigradedMap<F>>,
}

impl<F: Field> PartialEq for SpectralSequence<F> {
    fn eq(&self, other: &Self) -> bool {
        self.pages == other.pages && self.psi == other.psi
    }
}

impl<F: Field> Eq for SpectralSequence<F> {}

/// Checks a candidate tower of pages and characteristic maps.
pub fn validate_tower<F: Field>(pages: &[RComplex<F>], psi: &[BigradedMap<F>]) -> Result<(), Violation> {
    if pages.is_empty() || psi.len() + 1 != pages.len() {
        return Err(Violation::new(
            ViolationKind::PageCount,
            format!("{} pages need {} characteristic maps, found {}", pages.len(), pages.len().saturating_sub(1), psi.len()),
        ));
    }
    for (m, page) in pages.iter().enumerate() {
        if page.r() != m {
            return Err(Violation::new(ViolationKind::WrongBidegree, format!("page {m} is stored as an {}-complex", page.r())).at_page(m));
        }
        page.validate().map_err(|v| v.at_page(m))?;
    }
    check_characteristic_dimensions(pages)?;
    for (m, map) in psi.iter().enumerate() {
        let h = homology(&pages[m]);
        let next = pages[m + 1].module();
        if map.source() != &h.homology || map.target() != next || map.shift() != Bidegree::ZERO {
            return Err(Violation::new(ViolationKind::BlockShape, "characteristic map has the wrong shape").at_page(m));
        }
        map.validate_shapes().map_err(|v| v.at_page(m))?;
        for x in next.support() {
            if !map.block(x).is_invertible() {
                return Err(Violation::new(ViolationKind::CharacteristicNotInvertible, "ψ is not invertible")
                    .at_page(m)
                    .at(x));
            }
        }
    }
    let last = pages.len() - 1;
    if !pages[last].differential().is_zero() {
        return Err(Violation::new(ViolationKind::NotStable, "last stored page has a nonzero differential").at_page(last));
    }
    Ok(())
}

/// `dim H(A_m) = dim A_{m+1}` everywhere, the part of the tower invariant
/// that needs no characteristic maps.
pub fn check_characteristic_dimensions<F: Field>(pages: &[RComplex<F>]) -> Result<(), Violation> {
    for (m, pair) in pages.windows(2).enumerate() {
        let h = homology(&pair[0]).homology;
        let next = pair[1].module();
        for x in BigradedModule::joint_support([&h, next]) {
            let (dh, dn) = (h.dim(x), next.dim(x));
            if dh != dn {
                return Err(Violation::new(
                    ViolationKind::CharacteristicDimension {
                        homology: dh,
                        next_page: dn,
                    },
                    format!("dim H(A_{m}) = {dh} but dim A_{} = {dn}", m + 1),
                )
                .at_page(m)
                .at(x));
            }
        }
    }
    Ok(())
}

impl<F: Field> SpectralSequence<F> {
    /// Builds from pages and characteristic maps, validating every invariant.
    pub fn new(pages: Vec<RComplex<F>>, psi: Vec<BigradedMap<F>>) -> Result<Self, Violation> {
        validate_tower(&pages, &psi)?;
        Ok(Self::with_caches(pages, psi))
    }

    /// Builds from pages and transfer maps `T_m : A_m -> A_{m+1}` that are
    /// well defined on cycles and kill boundaries; `ψ_m = T_m ∘ section_m`.
    pub fn from_transfers(pages: Vec<RComplex<F>>, transfers: Vec<BigradedMap<F>>) -> Result<Self, Violation> {
        if pages.is_empty() || transfers.len() + 1 != pages.len() {
            return Err(Violation::new(ViolationKind::PageCount, "one transfer per page transition"));
        }
        for (m, page) in pages.iter().enumerate() {
            page.validate().map_err(|v| v.at_page(m))?;
        }
        let mut psi = Vec::with_capacity(transfers.len());
        for (m, t) in transfers.iter().enumerate() {
            let h = homology(&pages[m]);
            for x in BigradedModule::joint_support([&h.homology, pages[m + 1].module()]) {
                let (dh, dn) = (h.homology.dim(x), pages[m + 1].module().dim(x));
                if dh != dn {
                    return Err(Violation::new(
                        ViolationKind::CharacteristicDimension {
                            homology: dh,
                            next_page: dn,
                        },
                        format!("dim H(A_{m}) = {dh} but dim A_{} = {dn}", m + 1),
                    )
                    .at_page(m)
                    .at(x));
                }
            }
            psi.push(t.compose(&h.section));
        }
        Self::new(pages, psi)
    }

    fn with_caches(pages: Vec<RComplex<F>>, psi: Vec<BigradedMap<F>>) -> Self {
        let mut hs = Vec::with_capacity(psi.len());
        let mut transfer = Vec::with_capacity(psi.len());
        let mut lift = Vec::with_capacity(psi.len());
        for (m, map) in psi.iter().enumerate() {
            let h = homology(&pages[m]);
            transfer.push(map.compose(&h.projection));
            lift.push(h.section.compose(&map.inverse().expect("validated invertible")));
            hs.push(h);
        }
        SpectralSequence {
            pages,
            psi,
            homology: hs,
            transfer,
            lift,
        }
    }

    /// The zero spectral sequence, the final object.
    pub fn zero() -> Self {
        Self::concentrated_module(BigradedModule::zero())
    }

    /// A bigraded module placed on every page with zero differentials.
    pub fn concentrated_module(module: BigradedModule) -> Self {
        SpectralSequence::new(vec![RComplex::zero_differential(module, 0)], vec![]).expect("zero differential")
    }

    /// `R(p,n)`: the field in bidegree `(p,n)`, all differentials zero.
    pub fn unit(b: Bidegree) -> Self {
        Self::concentrated_module(BigradedModule::unit(b))
    }

    /// Stabilization index `M`.
    pub fn stable_index(&self) -> usize {
        self.pages.len() - 1
    }

    pub fn stored_pages(&self) -> &[RComplex<F>] {
        &self.pages
    }

    pub fn characteristic_maps(&self) -> &[BigradedMap<F>] {
        &self.psi
    }

    pub fn is_zero(&self) -> bool {
        self.pages[0].module().is_zero()
    }

    /// Page `m`, materialized for `m > M`.
    pub fn page(&self, m: usize) -> Cow<'_, RComplex<F>> {
        match self.pages.get(m) {
            Some(p) => Cow::Borrowed(p),
            None => Cow::Owned(RComplex::zero_differential(self.pages.last().unwrap().module().clone(), m)),
        }
    }

    pub fn module(&self, m: usize) -> &BigradedModule {
        self.pages[m.min(self.stable_index())].module()
    }

    pub fn differential(&self, m: usize) -> Cow<'_, BigradedMap<F>> {
        match self.pages.get(m) {
            Some(p) => Cow::Borrowed(p.differential()),
            None => {
                let module = self.module(m).clone();
                Cow::Owned(BigradedMap::zero(module.clone(), module, Bidegree::differential(m)))
            }
        }
    }

    pub fn homology_data(&self, m: usize) -> Cow<'_, HomologyData<F>> {
        match self.homology.get(m) {
            Some(h) => Cow::Borrowed(h),
            None => Cow::Owned(HomologyData::trivial(self.module(m))),
        }
    }

    pub fn psi(&self, m: usize) -> Cow<'_, BigradedMap<F>> {
        match self.psi.get(m) {
            Some(p) => Cow::Borrowed(p),
            None => Cow::Owned(BigradedMap::identity(self.module(m))),
        }
    }

    /// `ψ_m ∘ projection_m : A_m -> A_{m+1}`.
    pub fn transfer(&self, m: usize) -> Cow<'_, BigradedMap<F>> {
        match self.transfer.get(m) {
            Some(t) => Cow::Borrowed(t),
            None => Cow::Owned(BigradedMap::identity(self.module(m))),
        }
    }

    /// `section_m ∘ ψ_m^{-1} : A_{m+1} -> A_m`, landing in cycles.
    pub fn lift(&self, m: usize) -> Cow<'_, BigradedMap<F>> {
        match self.lift.get(m) {
            Some(t) => Cow::Borrowed(t),
            None => Cow::Owned(BigradedMap::identity(self.module(m))),
        }
    }

    /// Re-runs every structural check.
    pub fn validate(&self) -> Result<(), Violation> {
        validate_tower(&self.pages, &self.psi)
    }

    /// Bidegrees carrying something on page 0; every later page lives inside it.
    pub fn support(&self) -> impl Iterator<Item = Bidegree> + '_ {
        self.pages[0].module().support()
    }
}

/// Validates a spectral sequence (diagnostic wrapper).
pub fn validate_spectral_sequence<F: Field>(s: &SpectralSequence<F>) -> Result<(), Violation> {
    s.validate()
}

/// Shared handle to a spectral sequence.
pub type Ss<F> = Arc<SpectralSequence<F>>;

/// A morphism of spectral sequences, stored on every page up to
/// `max(M_source, M_target)`; later pages repeat the last map.
#[derive(Clone, Debug)]
pub struct SpectralMorphism<F> {
    source: Ss<F>,
    target: Ss<F>,
    maps: Vec<BigradedMap<F>>,
}

impl<F: Field> PartialEq for SpectralMorphism<F> {
    fn eq(&self, other: &Self) -> bool {
        same_object(&self.source, &other.source)
            && same_object(&self.target, &other.target)
            && self.maps[0] == other.maps[0]
    }
}

pub(crate) fn same_object<F: Field>(a: &Ss<F>, b: &Ss<F>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn horizon<F: Field>(a: &SpectralSequence<F>, b: &SpectralSequence<F>) -> usize {
    a.stable_index().max(b.stable_index())
}

/// Page maps determined by `f0`, without checking they are chain maps.
pub(crate) fn derive_pages<F: Field>(
    f0: &BigradedMap<F>,
    a: &SpectralSequence<F>,
    b: &SpectralSequence<F>,
    last: usize,
) -> Vec<BigradedMap<F>> {
    let mut maps = Vec::with_capacity(last + 1);
    maps.push(f0.clone());
    for m in 0..last {
        let next = b.transfer(m).compose(&maps[m].compose(&a.lift(m)));
        maps.push(next);
    }
    maps
}

/// Same as [`derive_pages`] for maps of an arbitrary bidegree, such as homotopies.
pub(crate) fn derive_shifted<F: Field>(
    h0: &BigradedMap<F>,
    a: &SpectralSequence<F>,
    b: &SpectralSequence<F>,
    last: usize,
) -> Vec<BigradedMap<F>> {
    let mut maps = Vec::with_capacity(last + 1);
    maps.push(h0.clone());
    for m in 0..last {
        let tb = b.transfer(m);
        let la = a.lift(m);
        let next = BigradedMap::from_fn(a.module(m + 1).clone(), b.module(m + 1).clone(), h0.shift(), |x, _, _| {
            let y = x + h0.shift();
            tb.block(y).mul(&maps[m].block(x)).mul(&la.block(x))
        });
        maps.push(next);
    }
    maps
}

impl<F: Field> SpectralMorphism<F> {
    /// The morphism determined by its page-0 map: `f_{m+1} = ψ^B H(f_m) (ψ^A)^{-1}`.
    pub fn derive(f0: BigradedMap<F>, source: Ss<F>, target: Ss<F>) -> Result<Self> {
        if f0.source() != source.module(0) || f0.target() != target.module(0) || f0.shift() != Bidegree::ZERO {
            return Err(SseqError::Invalid(Violation::new(ViolationKind::BlockShape, "page-0 map has the wrong shape")));
        }
        let last = horizon(&source, &target);
        let maps = derive_pages(&f0, &source, &target, last);
        for (m, f) in maps.iter().enumerate() {
            if source.page(m).check_chain_map(&target.page(m), f).is_err() {
                return Err(SseqError::NotAMorphism { page: m });
            }
        }
        Ok(SpectralMorphism { source, target, maps })
    }

    /// A morphism from explicitly given page maps, checked for chain maps and
    /// compatibility with the characteristic maps.
    pub fn from_pages(maps: Vec<BigradedMap<F>>, source: Ss<F>, target: Ss<F>) -> Result<Self> {
        let last = horizon(&source, &target);
        if maps.is_empty() {
            return Err(SseqError::Invariant("no page maps".into()));
        }
        let derived = Self::derive(maps[0].clone(), source.clone(), target.clone())?;
        for (m, f) in maps.iter().enumerate().take(last + 1) {
            if *f != derived.maps[m] {
                if source.page(m).check_chain_map(&target.page(m), f).is_err() {
                    return Err(SseqError::NotAMorphism { page: m });
                }
                return Err(SseqError::Invariant(format!(
                    "page {m} map is not compatible with the characteristic maps"
                )));
            }
        }
        for f in maps.iter().skip(last + 1) {
            if *f != derived.maps[last] {
                return Err(SseqError::Invariant("stabilized page maps differ".into()));
            }
        }
        Ok(derived)
    }

    /// Wraps page maps without any check, for residual computations.
    pub(crate) fn from_parts_unchecked(source: Ss<F>, target: Ss<F>, maps: Vec<BigradedMap<F>>) -> Self {
        SpectralMorphism { source, target, maps }
    }

    pub fn identity(a: Ss<F>) -> Self {
        let maps = (0..=a.stable_index()).map(|m| BigradedMap::identity(a.module(m))).collect();
        SpectralMorphism {
            source: a.clone(),
            target: a,
            maps,
        }
    }

    pub fn zero(source: Ss<F>, target: Ss<F>) -> Self {
        let last = horizon(&source, &target);
        let maps = (0..=last)
            .map(|m| BigradedMap::zero(source.module(m).clone(), target.module(m).clone(), Bidegree::ZERO))
            .collect();
        SpectralMorphism { source, target, maps }
    }

    pub fn source(&self) -> &Ss<F> {
        &self.source
    }

    pub fn target(&self) -> &Ss<F> {
        &self.target
    }

    /// Last stored page index.
    pub fn horizon(&self) -> usize {
        self.maps.len() - 1
    }

    /// Page-`m` map.
    pub fn map(&self, m: usize) -> &BigradedMap<F> {
        &self.maps[m.min(self.maps.len() - 1)]
    }

    pub fn page_maps(&self) -> &[BigradedMap<F>] {
        &self.maps
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SpectralMorphism<F>) -> SpectralMorphism<F> {
        assert!(same_object(&other.target, &self.source), "composition of incompatible morphisms");
        let last = horizon(&other.source, &self.target).max(self.source.stable_index());
        let maps: Vec<BigradedMap<F>> = (0..=last).map(|m| self.map(m).compose(other.map(m))).collect();
        let last = horizon(&other.source, &self.target);
        SpectralMorphism {
            source: other.source.clone(),
            target: self.target.clone(),
            maps: maps.into_iter().take(last + 1).collect(),
        }
    }

    fn zip(&self, other: &SpectralMorphism<F>, f: impl Fn(&BigradedMap<F>, &BigradedMap<F>) -> BigradedMap<F>) -> Self {
        assert!(same_object(&self.source, &other.source) && same_object(&self.target, &other.target));
        let maps = (0..self.maps.len()).map(|m| f(self.map(m), other.map(m))).collect();
        SpectralMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            maps,
        }
    }

    pub fn add(&self, other: &SpectralMorphism<F>) -> Self {
        self.zip(other, BigradedMap::add)
    }

    pub fn sub(&self, other: &SpectralMorphism<F>) -> Self {
        self.zip(other, BigradedMap::sub)
    }

    pub fn neg(&self) -> Self {
        self.zip(self, |a, _| a.neg())
    }

    /// Isomorphism: invertible on page 0, hence on every page.
    pub fn is_isomorphism(&self) -> bool {
        self.maps[0].is_invertible()
    }

    pub fn inverse(&self) -> Option<Self> {
        let inv = self.maps[0].inverse()?;
        Self::derive(inv, self.target.clone(), self.source.clone()).ok()
    }

    /// Re-checks chain maps and compatibility on every stored page.
    pub fn validate(&self) -> Result<()> {
        Self::from_pages(self.maps.clone(), self.source.clone(), self.target.clone()).map(|_| ())
    }
}

/// Surjective in every bidegree on every page.
pub fn is_surjection<F: Field>(f: &SpectralMorphism<F>) -> bool {
    first_non_surjective(f, f.horizon()).is_none()
}

fn first_non_surjective<F: Field>(f: &SpectralMorphism<F>, up_to: usize) -> Option<(usize, Bidegree)> {
    (0..=up_to.min(f.horizon())).find_map(|m| f.map(m).first_non_surjective().map(|b| (m, b)))
}

/// `f_r` is a quasi-isomorphism of r-bigraded complexes.
pub fn is_er_quasi_iso<F: Field>(f: &SpectralMorphism<F>, r: usize) -> bool {
    let (a, b) = (f.source(), f.target());
    let ha = a.homology_data(r);
    let hb = b.homology_data(r);
    let hf = hb.projection.compose(&f.map(r).compose(&ha.section));
    hf.is_invertible()
}

/// `f_k` surjective for `0 ≤ k ≤ r`.
pub fn is_r_fibration<F: Field>(f: &SpectralMorphism<F>, r: usize) -> bool {
    first_non_surjective(f, r).is_none()
}

pub fn is_acyclic_r_fibration<F: Field>(f: &SpectralMorphism<F>, r: usize) -> bool {
    is_r_fibration(f, r) && is_er_quasi_iso(f, r)
}

/// `f_k` is an isomorphism for every `k > r`; equivalent to [`is_er_quasi_iso`].
pub fn is_iso_beyond<F: Field>(f: &SpectralMorphism<F>, r: usize) -> bool {
    (r + 1..=f.horizon().max(r + 1)).all(|k| f.map(k).is_invertible())
}

/// Finite product with its projections.
#[derive(Clone, Debug)]
pub struct Product<F> {
    pub object: Ss<F>,
    pub projections: Vec<SpectralMorphism<F>>,
}

impl<F: Field> Product<F> {
    /// The map `Y -> ∏ A_i` with the given components.
    pub fn pair(&self, components: &[&SpectralMorphism<F>]) -> Result<SpectralMorphism<F>> {
        assert_eq!(components.len(), self.projections.len());
        let y = components[0].source().clone();
        let targets: Vec<&BigradedModule> = self.projections.iter().map(|p| p.target().module(0)).collect();
        let entries: Vec<Vec<Option<&BigradedMap<F>>>> = components.iter().map(|c| vec![Some(c.map(0))]).collect();
        let f0 = BigradedMap::block_matrix(&[y.module(0)], &targets, Bidegree::ZERO, &entries);
        SpectralMorphism::derive(f0, y, self.object.clone())
    }
}

/// Pagewise direct sum with block-diagonal characteristic maps.
pub fn product<F: Field>(factors: &[Ss<F>]) -> Product<F> {
    let last = factors.iter().map(|a| a.stable_index()).max().unwrap_or(0);
    let pages: Vec<RComplex<F>> = (0..=last)
        .map(|m| {
            let ps: Vec<Cow<'_, RComplex<F>>> = factors.iter().map(|a| a.page(m)).collect();
            let refs: Vec<&RComplex<F>> = ps.iter().map(|c| c.as_ref()).collect();
            let mut sum = RComplex::direct_sum(&refs);
            if refs.is_empty() {
                sum = RComplex::zero_differential(BigradedModule::zero(), m);
            }
            sum
        })
        .collect();
    let transfers: Vec<BigradedMap<F>> = (0..last)
        .map(|m| {
            let ts: Vec<Cow<'_, BigradedMap<F>>> = factors.iter().map(|a| a.transfer(m)).collect();
            let refs: Vec<&BigradedMap<F>> = ts.iter().map(|c| c.as_ref()).collect();
            if refs.is_empty() {
                BigradedMap::zero(BigradedModule::zero(), BigradedModule::zero(), Bidegree::ZERO)
            } else {
                BigradedMap::direct_sum(&refs)
            }
        })
        .collect();
    let object = Arc::new(SpectralSequence::from_transfers(pages, transfers).expect("direct sum of spectral sequences"));
    let projections = (0..factors.len())
        .map(|i| {
            let sources: Vec<&BigradedModule> = factors.iter().map(|a| a.module(0)).collect();
            let id = BigradedMap::identity(factors[i].module(0));
            let row: Vec<Option<&BigradedMap<F>>> = (0..factors.len()).map(|j| (i == j).then_some(&id)).collect();
            let f0 = BigradedMap::block_matrix(&sources, &[factors[i].module(0)], Bidegree::ZERO, &[row]);
            SpectralMorphism::derive(f0, object.clone(), factors[i].clone()).expect("projection")
        })
        .collect();
    Product { object, projections }
}

/// Binary product.
pub fn product2<F: Field>(a: &Ss<F>, b: &Ss<F>) -> Product<F> {
    product(&[a.clone(), b.clone()])
}

pub fn final_object<F: Field>() -> Ss<F> {
    Arc::new(SpectralSequence::zero())
}

/// Direct sum of morphisms `f ⊕ g : A ⊕ C -> B ⊕ D`.
pub fn direct_sum_morphism<F: Field>(f: &SpectralMorphism<F>, g: &SpectralMorphism<F>) -> SpectralMorphism<F> {
    let src = product2(f.source(), g.source());
    let tgt = product2(f.target(), g.target());
    let f0 = BigradedMap::direct_sum(&[f.map(0), g.map(0)]);
    SpectralMorphism::derive(f0, src.object, tgt.object).expect("direct sum of morphisms")
}

/// Pullback of a surjection, computed pagewise.
#[derive(Clone, Debug)]
pub struct SpectralPullback<F> {
    pub object: Ss<F>,
    pub pi_u: SpectralMorphism<F>,
    pub pi_a: SpectralMorphism<F>,
    pages: Vec<RPullback<F>>,
}

impl<F: Field> SpectralPullback<F> {
    /// The mediating morphism of a commuting cone, `None` if it does not commute.
    pub fn mediate(&self, alpha: &SpectralMorphism<F>, beta: &SpectralMorphism<F>) -> Option<SpectralMorphism<F>> {
        let m0 = self.pages[0].mediate(alpha.map(0), beta.map(0))?;
        SpectralMorphism::derive(m0, alpha.source().clone(), self.object.clone()).ok()
    }
}

/// Pullback of `p: A -> B` along `g: U -> B`. Refuses non-surjective `p`.
pub fn pullback_surjection<F: Field>(g: &SpectralMorphism<F>, p: &SpectralMorphism<F>) -> Result<SpectralPullback<F>> {
    if !same_object(g.target(), p.target()) {
        return Err(SseqError::Invariant("pullback needs a common target".into()));
    }
    if let Some((page, bidegree)) = first_non_surjective(p, p.horizon()) {
        return Err(SseqError::NotASurjection { page, bidegree });
    }
    let (u, a, b) = (g.source(), p.source(), p.target());
    let last = u.stable_index().max(a.stable_index()).max(b.stable_index());
    let mut pbs = Vec::with_capacity(last + 1);
    for m in 0..=last {
        pbs.push(pullback_rcomplex(&u.page(m), &a.page(m), &b.page(m), g.map(m), p.map(m))?);
    }
    let transfers = (0..last)
        .map(|m| {
            let t = BigradedMap::direct_sum(&[u.transfer(m).as_ref(), a.transfer(m).as_ref()]);
            pbs[m + 1].retraction.compose(&t.compose(&pbs[m].inclusion))
        })
        .collect();
    let pages = pbs.iter().map(|pb| pb.complex.clone()).collect();
    let object = SpectralSequence::from_transfers(pages, transfers)
        .map_err(|v| SseqError::Invariant(format!("pagewise pullback is not a spectral sequence: {v}")))?;
    let object = Arc::new(object);
    let pi_u = SpectralMorphism::from_pages(pbs.iter().map(|pb| pb.pi_u.clone()).collect(), object.clone(), u.clone())?;
    let pi_a = SpectralMorphism::from_pages(pbs.iter().map(|pb| pb.pi_a.clone()).collect(), object.clone(), a.clone())?;
    Ok(SpectralPullback {
        object,
        pi_u,
        pi_a,
        pages: pbs,
    })
}

/// The affine space of morphisms `A -> B` satisfying extra affine
/// conditions on their page maps, in page-0 coordinates.
pub fn solve_morphisms<F: Field>(
    a: &SpectralSequence<F>,
    b: &SpectralSequence<F>,
    extra: impl Fn(&[BigradedMap<F>]) -> Vec<F>,
) -> AffineSolution<F> {
    let last = horizon(a, b);
    let n = BigradedMap::<F>::num_coords(a.module(0), b.module(0), Bidegree::ZERO);
    solve_affine(n, |x| {
        let f0 = BigradedMap::from_coords(a.module(0).clone(), b.module(0).clone(), Bidegree::ZERO, x);
        let maps = derive_pages(&f0, a, b, last);
        let mut res = Vec::new();
        for (m, f) in maps.iter().enumerate() {
            let lhs = b.differential(m).compose(f);
            let rhs = f.compose(&a.differential(m));
            res.extend(lhs.sub(&rhs).coords());
        }
        res.extend(extra(&maps));
        res
    })
}

/// All morphisms `A -> B` as a vector space.
#[derive(Clone, Debug)]
pub struct HomSpace<F> {
    pub source: Ss<F>,
    pub target: Ss<F>,
    /// Columns are page-0 coordinates of a basis.
    pub basis: Matrix<F>,
}

impl<F: Field> HomSpace<F> {
    pub fn new(source: Ss<F>, target: Ss<F>) -> Self {
        let sol = solve_morphisms(&source, &target, |_| Vec::new());
        HomSpace {
            source,
            target,
            basis: sol.kernel,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn num_coords(&self) -> usize {
        self.basis.rows()
    }

    pub fn morphism(&self, coords: &[F]) -> SpectralMorphism<F> {
        let f0 = BigradedMap::from_coords(
            self.source.module(0).clone(),
            self.target.module(0).clone(),
            Bidegree::ZERO,
            coords,
        );
        SpectralMorphism::derive(f0, self.source.clone(), self.target.clone()).expect("element of the hom space")
    }

    pub fn basis_morphisms(&self) -> Vec<SpectralMorphism<F>> {
        self.basis.columns().iter().map(|c| self.morphism(c)).collect()
    }
}

/// Searches the affine space of morphisms satisfying `extra` for an
/// isomorphism. The search samples the space with a fixed seed, so a `None`
/// is not a proof that no isomorphism exists.
pub fn find_isomorphism<F: Field>(
    a: &Ss<F>,
    b: &Ss<F>,
    extra: impl Fn(&[BigradedMap<F>]) -> Vec<F>,
) -> Option<SpectralMorphism<F>> {
    if a.module(0) != b.module(0) {
        return None;
    }
    let sol = solve_morphisms(a, b, extra);
    let base = sol.particular.clone()?;
    let try_point = |x: &[F]| {
        let f0 = BigradedMap::from_coords(a.module(0).clone(), b.module(0).clone(), Bidegree::ZERO, x);
        if f0.is_invertible() {
            SpectralMorphism::derive(f0, a.clone(), b.clone()).ok()
        } else {
            None
        }
    };
    if let Some(f) = try_point(&base) {
        return Some(f);
    }
    let k = sol.dimension();
    if k == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..64 {
        let coeffs: Vec<F> = (0..k).map(|_| F::sample(&mut rng)).collect();
        if let Some(f) = try_point(&sol.point(&coeffs).unwrap()) {
            return Some(f);
        }
    }
    None
}

/// Plain isomorphism search without side conditions.
pub fn isomorphic<F: Field>(a: &Ss<F>, b: &Ss<F>) -> Option<SpectralMorphism<F>> {
    find_isomorphism(a, b, |_| Vec::new())
}

/// Named fixtures.
/// Pagewise cokernels `coker f_m` with the induced differentials, up to the
/// later stable page. Usually not a spectral sequence.
pub fn pagewise_cokernel<F: Field>(f: &SpectralMorphism<F>) -> Vec<RComplex<F>> {
    let top = f.source().stable_index().max(f.target().stable_index()).max(f.horizon());
    (0..=top)
        .map(|m| {
            let b = f.target().module(m);
            let d = f.target().differential(m);
            let fm = f.map(m);
            let parts: std::collections::BTreeMap<Bidegree, Subquotient<F>> = b
                .support()
                .map(|x| {
                    let n = b.dim(x);
                    (x, Subquotient::new(n, &Matrix::identity(n), &fm.block(x)))
                })
                .collect();
            let mut c = BigradedModule::zero();
            for (x, q) in &parts {
                c.add_dim(*x, q.dim());
            }
            let shift = d.shift();
            let dc = BigradedMap::from_fn(c.clone(), c.clone(), shift, |x, _, _| {
                parts[&(x + shift)].proj.mul(&d.block(x)).mul(&parts[&x].reps)
            });
            RComplex::new_unchecked(c, m, dc)
        })
        .collect()
}

pub mod fixtures {
    use super::*;

    /// `R(p,n)`.
    pub fn unit<F: Field>(p: i32, n: i32) -> Ss<F> {
        Arc::new(SpectralSequence::unit(Bidegree::new(p, n)))
    }

    /// `S`: `R^{0,0} ⊕ R^{1,0}` on pages 0 and 1, with `d_1` the identity from
    /// `(1,0)` to `(0,0)`, and zero from page 2 on.
    pub fn s<F: Field>() -> Ss<F> {
        let m = BigradedModule::new([(Bidegree::new(0, 0), 1), (Bidegree::new(1, 0), 1)]);
        let p0 = RComplex::zero_differential(m.clone(), 0);
        let d1 = BigradedMap::from_blocks(m.clone(), m.clone(), Bidegree::differential(1), [(Bidegree::new(1, 0), Matrix::identity(1))])
            .expect("shape");
        let p1 = RComplex::new_unchecked(m.clone(), 1, d1);
        let p2 = RComplex::zero_differential(BigradedModule::zero(), 2);
        let t0 = BigradedMap::identity(&m);
        let t1 = BigradedMap::zero(m, BigradedModule::zero(), Bidegree::ZERO);
        Arc::new(SpectralSequence::from_transfers(vec![p0, p1, p2], vec![t0, t1]).expect("fixture S"))
    }

    /// `T`: `R^{0,0} -> R^{0,1}` by the identity on page 0, zero afterwards.
    pub fn t<F: Field>() -> Ss<F> {
        let m = BigradedModule::new([(Bidegree::new(0, 0), 1), (Bidegree::new(0, 1), 1)]);
        let d0 = BigradedMap::from_blocks(m.clone(), m.clone(), Bidegree::differential(0), [(Bidegree::new(0, 0), Matrix::identity(1))])
            .expect("shape");
        let p0 = RComplex::new_unchecked(m.clone(), 0, d0);
        let p1 = RComplex::zero_differential(BigradedModule::zero(), 1);
        let t0 = BigradedMap::zero(m, BigradedModule::zero(), Bidegree::ZERO);
        Arc::new(SpectralSequence::from_transfers(vec![p0, p1], vec![t0]).expect("fixture T"))
    }

    /// `f: R(0,0) -> S` with `f_0 = f_1 = 1` on `R^{0,0}`.
    pub fn f_into_s<F: Field>() -> SpectralMorphism<F> {
        let r = unit(0, 0);
        let s = s();
        let f0 = BigradedMap::from_blocks(r.module(0).clone(), s.module(0).clone(), Bidegree::ZERO, [(Bidegree::ZERO, Matrix::identity(1))])
            .expect("shape");
        SpectralMorphism::derive(f0, r, s).expect("fixture f")
    }

    /// `π: T -> R(0,0)` with `π_0 = 1` on `R^{0,0}` and `π_i = 0` for `i > 0`.
    pub fn pi_t<F: Field>() -> SpectralMorphism<F> {
        let t = t();
        let r = unit(0, 0);
        let f0 = BigradedMap::from_blocks(t.module(0).clone(), r.module(0).clone(), Bidegree::ZERO, [(Bidegree::ZERO, Matrix::identity(1))])
            .expect("shape");
        SpectralMorphism::derive(f0, t, r).expect("fixture π")
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::field::F7;

    type F = F7;

    #[test]
    fn unit_and_fixtures_validate() {
        assert!(unit::<F>(0, 0).validate().is_ok());
        assert!(s::<F>().validate().is_ok());
        assert!(t::<F>().validate().is_ok());
        assert_eq!(s::<F>().stable_index(), 2);
    }

    #[test]
    fn f_into_s_pages() {
        let f = f_into_s::<F>();
        assert_eq!(f.map(1).block(Bidegree::ZERO), Matrix::identity(1));
        assert!(f.map(2).is_zero());
        assert!(f.validate().is_ok());
    }

    #[test]
    fn pi_is_not_a_surjection() {
        let pi = pi_t::<F>();
        assert!(!is_surjection(&pi));
        assert!(is_r_fibration(&pi, 0));
        assert!(!is_r_fibration(&pi, 1));
    }

    #[test]
    fn zero_map_predicates() {
        let r = unit::<F>(0, 0);
        let z = SpectralMorphism::zero(r.clone(), r.clone());
        assert!(!is_surjection(&z));
        assert!(!is_er_quasi_iso(&z, 0));
        assert!(!is_r_fibration(&z, 0));
        assert!(!is_acyclic_r_fibration(&z, 0));
        let id = SpectralMorphism::identity(r);
        assert!(is_surjection(&id) && is_er_quasi_iso(&id, 0) && is_acyclic_r_fibration(&id, 3));
    }

    #[test]
    fn products() {
        let r = unit::<F>(0, 0);
        let p = product2(&r, &r);
        for m in 0..3 {
            assert_eq!(p.object.module(m).dim(Bidegree::ZERO), 2);
        }
        let z = final_object::<F>();
        let p = product2(&s::<F>(), &z);
        assert_eq!(p.object.stored_pages(), s::<F>().stored_pages());
    }

    #[test]
    fn pullback_of_non_surjection_is_refused() {
        let pi = pi_t::<F>();
        let zero_in = SpectralMorphism::zero(final_object(), pi.target().clone());
        let err = pullback_surjection(&zero_in, &pi).unwrap_err();
        assert!(matches!(err, SseqError::NotASurjection { page: 1, .. }));
    }

    #[test]
    fn pullback_along_identity() {
        let a = s::<F>();
        let id = SpectralMorphism::identity(a.clone());
        let pb = pullback_surjection(&id, &id).unwrap();
        assert!(pb.pi_u.is_isomorphism());
        assert!(is_surjection(&pb.pi_u));
    }

    #[test]
    fn hom_space_of_units() {
        let h = HomSpace::new(unit::<F>(0, 0), s::<F>());
        assert_eq!(h.dim(), 1);
        let h = HomSpace::new(s::<F>(), unit::<F>(0, 0));
        // a map S_0 -> R must kill (0,0) on page 1 since it is a boundary there
        assert_eq!(h.dim(), 0);
    }

    #[test]
    fn derive_rejects_non_morphism() {
        // identity on the (0,0) summand only: S -> S is not compatible with d_1
        let a = s::<F>();
        let f0 = BigradedMap::from_blocks(
            a.module(0).clone(),
            a.module(0).clone(),
            Bidegree::ZERO,
            [(Bidegree::new(1, 0), Matrix::identity(1))],
        )
        .unwrap();
        assert!(matches!(
            SpectralMorphism::derive(f0, a.clone(), a),
            Err(SseqError::NotAMorphism { page: 1 })
        ));
    }
}
