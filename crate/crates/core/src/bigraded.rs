//! Bigraded vector spaces, bigraded maps and r-bigraded complexes.
//!
//! Every bigraded module has finite support and a standard basis in each
//! bidegree, so a bigraded map is a finite collection of matrix blocks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Result, SseqError, Violation, ViolationKind};
use crate::field::Field;
use crate::linalg::{left_inverse, Matrix};

/// A bidegree `(p, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bidegree {
    pub p: i32,
    pub q: i32,
}

impl Bidegree {
    pub const ZERO: Bidegree = Bidegree { p: 0, q: 0 };

    pub const fn new(p: i32, q: i32) -> Self {
        Bidegree { p, q }
    }

    /// Bidegree `(-r, 1-r)` of the page-`r` differential.
    pub fn differential(r: usize) -> Self {
        let r = r as i32;
        Bidegree::new(-r, 1 - r)
    }

    /// Bidegree `(r, r-1)` of an r-homotopy.
    pub fn homotopy(r: usize) -> Self {
        -Self::differential(r)
    }
}

impl Add for Bidegree {
    type Output = Bidegree;
    fn add(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.p + o.p, self.q + o.q)
    }
}

impl Sub for Bidegree {
    type Output = Bidegree;
    fn sub(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.p - o.p, self.q - o.q)
    }
}

impl Neg for Bidegree {
    type Output = Bidegree;
    fn neg(self) -> Bidegree {
        Bidegree::new(-self.p, -self.q)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Finite-support bigraded vector space, recorded by its dimensions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BigradedModule {
    dims: BTreeMap<Bidegree, usize>,
}

impl BigradedModule {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(dims: impl IntoIterator<Item = (Bidegree, usize)>) -> Self {
        let mut m = Self::default();
        for (b, d) in dims {
            m.add_dim(b, d);
        }
        m
    }

    /// One copy of the field at `b`.
    pub fn unit(b: Bidegree) -> Self {
        Self::new([(b, 1)])
    }

    pub fn add_dim(&mut self, b: Bidegree, d: usize) {
        if d > 0 {
            *self.dims.entry(b).or_insert(0) += d;
        }
    }

    pub fn dim(&self, b: Bidegree) -> usize {
        self.dims.get(&b).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = Bidegree> + '_ {
        self.dims.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Bidegree, usize)> + '_ {
        self.dims.iter().map(|(b, d)| (*b, *d))
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    /// `A[s]` with `A[s]^x = A^{x+s}`.
    pub fn shifted(&self, s: Bidegree) -> Self {
        Self::new(self.entries().map(|(b, d)| (b - s, d)))
    }

    pub fn direct_sum(parts: &[&BigradedModule]) -> Self {
        let mut m = Self::default();
        for part in parts {
            for (b, d) in part.entries() {
                m.add_dim(b, d);
            }
        }
        m
    }

    /// Union of supports.
    pub fn joint_support<'a>(mods: impl IntoIterator<Item = &'a BigradedModule>) -> BTreeSet<Bidegree> {
        mods.into_iter().flat_map(|m| m.support()).collect()
    }
}

/// Offsets of each summand of a direct sum at a bidegree.
pub(crate) fn offsets(parts: &[&BigradedModule], b: Bidegree) -> Vec<usize> {
    let mut out = Vec::with_capacity(parts.len() + 1);
    let mut acc = 0;
    out.push(0);
    for part in parts {
        acc += part.dim(b);
        out.push(acc);
    }
    out
}

/// A linear map of bidegree `shift` between bigraded modules. The block at
/// `x` maps `source(x)` to `target(x + shift)`; absent blocks are zero.
#[derive(Clone, Debug)]
pub struct BigradedMap<F> {
    source: BigradedModule,
    target: BigradedModule,
    shift: Bidegree,
    blocks: BTreeMap<Bidegree, Matrix<F>>,
}

impl<F: Field> PartialEq for BigradedMap<F> {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.shift == other.shift
            && self.source.support().all(|x| self.block(x) == other.block(x))
    }
}

impl<F: Field> Eq for BigradedMap<F> {}

impl<F: Field> BigradedMap<F> {
    pub fn zero(source: BigradedModule, target: BigradedModule, shift: Bidegree) -> Self {
        BigradedMap {
            source,
            target,
            shift,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(module: &BigradedModule) -> Self {
        Self::from_fn(module.clone(), module.clone(), Bidegree::ZERO, |_, s, _| {
            Matrix::identity(s)
        })
    }

    /// Builds a map from a block function `(x, dim source(x), dim target(x+shift))`.
    pub fn from_fn(
        source: BigradedModule,
        target: BigradedModule,
        shift: Bidegree,
        mut f: impl FnMut(Bidegree, usize, usize) -> Matrix<F>,
    ) -> Self {
        let mut map = Self::zero(source, target, shift);
        let keys: Vec<Bidegree> = map.source.support().collect();
        for x in keys {
            let (s, t) = (map.source.dim(x), map.target.dim(x + shift));
            if t == 0 {
                continue;
            }
            let block = f(x, s, t);
            map.set_block(x, block);
        }
        map
    }

    /// Builds a map from explicit blocks, checking every shape.
    pub fn from_blocks(
        source: BigradedModule,
        target: BigradedModule,
        shift: Bidegree,
        blocks: impl IntoIterator<Item = (Bidegree, Matrix<F>)>,
    ) -> Result<Self, Violation> {
        let mut map = Self::zero(source, target, shift);
        for (x, m) in blocks {
            let expect = (map.target.dim(x + shift), map.source.dim(x));
            if m.shape() != expect {
                if m.is_zero() && (expect.0 == 0 || expect.1 == 0) && m.rows() * m.cols() == 0 {
                    continue;
                }
                return Err(Violation::new(
                    ViolationKind::BlockShape,
                    format!("block is {}x{}, expected {}x{}", m.rows(), m.cols(), expect.0, expect.1),
                )
                .at(x));
            }
            map.set_block(x, m);
        }
        Ok(map)
    }

    pub fn source(&self) -> &BigradedModule {
        &self.source
    }

    pub fn target(&self) -> &BigradedModule {
        &self.target
    }

    pub fn shift(&self) -> Bidegree {
        self.shift
    }

    /// Stored nonzero-shape blocks.
    pub fn blocks(&self) -> impl Iterator<Item = (Bidegree, &Matrix<F>)> + '_ {
        self.blocks.iter().map(|(b, m)| (*b, m))
    }

    /// The block at `x`, zero if absent.
    pub fn block(&self, x: Bidegree) -> Matrix<F> {
        match self.blocks.get(&x) {
            Some(m) => m.clone(),
            None => Matrix::zeros(self.target.dim(x + self.shift), self.source.dim(x)),
        }
    }

    pub fn block_ref(&self, x: Bidegree) -> Option<&Matrix<F>> {
        self.blocks.get(&x)
    }

    /// Replaces the block at `x`. Panics on a shape mismatch.
    pub fn set_block(&mut self, x: Bidegree, m: Matrix<F>) {
        let expect = (self.target.dim(x + self.shift), self.source.dim(x));
        assert_eq!(m.shape(), expect, "block shape at {x}");
        if expect.0 == 0 || expect.1 == 0 || m.is_zero() {
            self.blocks.remove(&x);
        } else {
            self.blocks.insert(x, m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(Matrix::is_zero)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &BigradedMap<F>) -> BigradedMap<F> {
        assert_eq!(other.target, self.source, "composition of incompatible maps");
        let shift = other.shift + self.shift;
        let mut out = BigradedMap::zero(other.source.clone(), self.target.clone(), shift);
        for (x, b) in &other.blocks {
            let y = *x + other.shift;
            if let Some(a) = self.blocks.get(&y) {
                out.set_block(*x, a.mul(b));
            }
        }
        out
    }

    fn zip(&self, other: &BigradedMap<F>, f: impl Fn(&Matrix<F>, &Matrix<F>) -> Matrix<F>) -> Self {
        assert_eq!(self.source, other.source, "maps with different sources");
        assert_eq!(self.target, other.target, "maps with different targets");
        assert_eq!(self.shift, other.shift, "maps with different bidegrees");
        let keys: BTreeSet<Bidegree> = self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        let mut out = Self::zero(self.source.clone(), self.target.clone(), self.shift);
        for x in keys {
            out.set_block(x, f(&self.block(x), &other.block(x)));
        }
        out
    }

    pub fn add(&self, other: &BigradedMap<F>) -> Self {
        self.zip(other, Matrix::add)
    }

    pub fn sub(&self, other: &BigradedMap<F>) -> Self {
        self.zip(other, Matrix::sub)
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut out = self.clone();
        for m in out.blocks.values_mut() {
            *m = m.scale(c);
        }
        out.blocks.retain(|_, m| !m.is_zero());
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-F::one())
    }

    /// The same map viewed between shifted modules `source[s] -> target[s]`.
    pub fn reindexed(&self, s: Bidegree) -> Self {
        BigradedMap {
            source: self.source.shifted(s),
            target: self.target.shifted(s),
            shift: self.shift,
            blocks: self.blocks.iter().map(|(x, m)| (*x - s, m.clone())).collect(),
        }
    }

    /// Identity `A -> A[s]`, of bidegree `-s`.
    pub fn shift_identity(module: &BigradedModule, s: Bidegree) -> Self {
        Self::from_fn(module.clone(), module.shifted(s), -s, |_, d, _| Matrix::identity(d))
    }

    /// Block matrix of maps between direct sums. `entries[i][j]` maps
    /// `sources[j]` to `targets[i]`; `None` is zero.
    pub fn block_matrix(
        sources: &[&BigradedModule],
        targets: &[&BigradedModule],
        shift: Bidegree,
        entries: &[Vec<Option<&BigradedMap<F>>>],
    ) -> Self {
        assert_eq!(entries.len(), targets.len());
        let source = BigradedModule::direct_sum(sources);
        let target = BigradedModule::direct_sum(targets);
        Self::from_fn(source, target, shift, |x, s, t| {
            let so = offsets(sources, x);
            let to = offsets(targets, x + shift);
            let mut m = Matrix::zeros(t, s);
            for (i, row) in entries.iter().enumerate() {
                assert_eq!(row.len(), sources.len());
                for (j, e) in row.iter().enumerate() {
                    if let Some(map) = e {
                        assert_eq!(map.shift, shift, "block entries must share a bidegree");
                        if let Some(b) = map.blocks.get(&x) {
                            m.set_block(to[i], so[j], b);
                        }
                    }
                }
            }
            m
        })
    }

    /// Blockwise direct sum `f ⊕ g`.
    pub fn direct_sum(maps: &[&BigradedMap<F>]) -> Self {
        let shift = maps.first().map_or(Bidegree::ZERO, |m| m.shift);
        let sources: Vec<&BigradedModule> = maps.iter().map(|m| &m.source).collect();
        let targets: Vec<&BigradedModule> = maps.iter().map(|m| &m.target).collect();
        let entries: Vec<Vec<Option<&BigradedMap<F>>>> = (0..maps.len())
            .map(|i| (0..maps.len()).map(|j| (i == j).then_some(maps[i])).collect())
            .collect();
        Self::block_matrix(&sources, &targets, shift, &entries)
    }

    /// Number of free coordinates: the sum of block sizes.
    pub fn num_coords(source: &BigradedModule, target: &BigradedModule, shift: Bidegree) -> usize {
        source.entries().map(|(x, d)| d * target.dim(x + shift)).sum()
    }

    /// Flattened entries, blocks in bidegree order, each row-major.
    pub fn coords(&self) -> Vec<F> {
        let mut v = Vec::with_capacity(Self::num_coords(&self.source, &self.target, self.shift));
        for x in self.source.support() {
            if self.target.dim(x + self.shift) == 0 {
                continue;
            }
            v.extend(self.block(x).entries().iter().cloned());
        }
        v
    }

    pub fn from_coords(source: BigradedModule, target: BigradedModule, shift: Bidegree, coords: &[F]) -> Self {
        let mut pos = 0;
        let out = Self::from_fn(source, target, shift, |_, s, t| {
            let m = Matrix::new(t, s, coords[pos..pos + s * t].to_vec());
            pos += s * t;
            m
        });
        assert_eq!(pos, coords.len(), "coordinate vector length");
        out
    }

    /// Shapes of all blocks agree with the source and target dimensions.
    pub fn validate_shapes(&self) -> Result<(), Violation> {
        for (x, m) in &self.blocks {
            let expect = (self.target.dim(*x + self.shift), self.source.dim(*x));
            if m.shape() != expect {
                return Err(Violation::new(ViolationKind::BlockShape, "block shape").at(*x));
            }
        }
        Ok(())
    }

    /// Surjective onto every target bidegree.
    pub fn is_surjective(&self) -> bool {
        self.first_non_surjective().is_none()
    }

    /// First target bidegree not covered by the image.
    pub fn first_non_surjective(&self) -> Option<Bidegree> {
        self.target
            .support()
            .find(|y| self.block(*y - self.shift).rank() < self.target.dim(*y))
    }

    pub fn is_injective(&self) -> bool {
        self.source.support().all(|x| self.block(x).is_injective())
    }

    /// Invertible in every bidegree (a bidegree-(0,0) isomorphism).
    pub fn is_invertible(&self) -> bool {
        self.shift == Bidegree::ZERO
            && BigradedModule::joint_support([&self.source, &self.target])
                .into_iter()
                .all(|x| self.block(x).is_invertible())
    }

    /// Blockwise inverse of an isomorphism.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_invertible() {
            return None;
        }
        Some(Self::from_fn(self.target.clone(), self.source.clone(), Bidegree::ZERO, |x, _, _| {
            self.block(x).inverse().expect("checked invertible")
        }))
    }

    /// Image of a vector at bidegree `x`.
    pub fn apply(&self, x: Bidegree, v: &[F]) -> Vec<F> {
        self.block(x).mul_vec(v)
    }
}

/// A bigraded module with a square-zero differential of bidegree `(-r, 1-r)`.
#[derive(Clone, Debug)]
pub struct RComplex<F> {
    module: BigradedModule,
    r: usize,
    differential: BigradedMap<F>,
}

impl<F: Field> PartialEq for RComplex<F> {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.module == other.module && self.differential == other.differential
    }
}

impl<F: Field> Eq for RComplex<F> {}

impl<F: Field> RComplex<F> {
    /// Builds and validates.
    pub fn new(module: BigradedModule, r: usize, differential: BigradedMap<F>) -> Result<Self, Violation> {
        let c = RComplex {
            module,
            r,
            differential,
        };
        c.validate()?;
        Ok(c)
    }

    /// Builds without validation; callers run [`RComplex::validate`] themselves.
    pub fn new_unchecked(module: BigradedModule, r: usize, differential: BigradedMap<F>) -> Self {
        RComplex {
            module,
            r,
            differential,
        }
    }

    pub fn zero_differential(module: BigradedModule, r: usize) -> Self {
        let d = BigradedMap::zero(module.clone(), module.clone(), Bidegree::differential(r));
        RComplex {
            module,
            r,
            differential: d,
        }
    }

    pub fn module(&self) -> &BigradedModule {
        &self.module
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn differential(&self) -> &BigradedMap<F> {
        &self.differential
    }

    /// Confirms the bidegree pattern and `d² = 0`; reports the first failing bidegree.
    pub fn validate(&self) -> Result<(), Violation> {
        let d = &self.differential;
        if d.shift() != Bidegree::differential(self.r) {
            return Err(Violation::new(
                ViolationKind::WrongBidegree,
                format!("differential has bidegree {}, expected {}", d.shift(), Bidegree::differential(self.r)),
            ));
        }
        if d.source() != &self.module || d.target() != &self.module {
            return Err(Violation::new(ViolationKind::BlockShape, "differential must be an endomorphism"));
        }
        d.validate_shapes()?;
        let dd = d.compose(d);
        for (x, m) in dd.blocks() {
            if !m.is_zero() {
                return Err(Violation::new(ViolationKind::NotSquareZero, "d∘d ≠ 0").at(x));
            }
        }
        Ok(())
    }

    /// Pagewise direct sum.
    pub fn direct_sum(parts: &[&RComplex<F>]) -> Self {
        let r = parts.first().map_or(0, |c| c.r);
        let maps: Vec<&BigradedMap<F>> = parts.iter().map(|c| &c.differential).collect();
        let d = BigradedMap::direct_sum(&maps);
        RComplex {
            module: d.source().clone(),
            r,
            differential: d,
        }
    }

    /// Whether `f: self -> other` commutes with the differentials; the
    /// first failing bidegree otherwise.
    pub fn check_chain_map(&self, other: &RComplex<F>, f: &BigradedMap<F>) -> Result<(), Bidegree> {
        let lhs = other.differential.compose(f);
        let rhs = f.compose(&self.differential);
        for x in self.module.support() {
            if lhs.block(x) != rhs.block(x) {
                return Err(x);
            }
        }
        Ok(())
    }
}

/// Homology of an r-complex with chosen representatives.
///
/// `section` sends the standard basis of `H` to cycles; `projection` is
/// defined on the whole page but only meaningful on cycles, where it kills
/// boundaries and inverts `section`.
#[derive(Clone, Debug)]
pub struct HomologyData<F> {
    pub homology: BigradedModule,
    pub section: BigradedMap<F>,
    pub projection: BigradedMap<F>,
}

impl<F: Field> HomologyData<F> {
    /// Homology of a complex with zero differential: identity data.
    pub fn trivial(module: &BigradedModule) -> Self {
        HomologyData {
            homology: module.clone(),
            section: BigradedMap::identity(module),
            projection: BigradedMap::identity(module),
        }
    }
}

/// Per-bidegree subquotient `Z / B` of a vector space `V`.
#[derive(Clone, Debug)]
pub(crate) struct Subquotient<F> {
    /// Representatives, columns in `V`.
    pub reps: Matrix<F>,
    /// Coordinates of an element of `Z` modulo `B`.
    pub proj: Matrix<F>,
}

impl<F: Field> Subquotient<F> {
    /// `cycles` and `boundaries` are spanning columns with `B ⊆ Z ⊆ V`.
    pub fn new(ambient: usize, cycles: &Matrix<F>, boundaries: &Matrix<F>) -> Self {
        let b = boundaries.image_basis();
        let reps = b.extension_from(cycles);
        let basis = b.hstack(&reps);
        let full = left_inverse(&basis);
        let k = reps.cols();
        let proj = full.submatrix(b.cols()..b.cols() + k, 0..ambient);
        Subquotient { reps, proj }
    }

    pub fn dim(&self) -> usize {
        self.reps.cols()
    }
}

/// Homology with representatives extended leftmost from the cycle basis.
pub fn homology<F: Field>(c: &RComplex<F>) -> HomologyData<F> {
    let d = c.differential();
    let shift = d.shift();
    let mut parts = BTreeMap::new();
    let mut h = BigradedModule::zero();
    for x in c.module().support() {
        let n = c.module().dim(x);
        let cycles = d.block(x).kernel_basis();
        let incoming = d.block(x - shift);
        let sq = Subquotient::new(n, &cycles, &incoming);
        h.add_dim(x, sq.dim());
        parts.insert(x, sq);
    }
    let section = BigradedMap::from_fn(h.clone(), c.module().clone(), Bidegree::ZERO, |x, _, _| {
        parts[&x].reps.clone()
    });
    let projection = BigradedMap::from_fn(c.module().clone(), h.clone(), Bidegree::ZERO, |x, _, _| {
        parts[&x].proj.clone()
    });
    HomologyData {
        homology: h,
        section,
        projection,
    }
}

/// `H(f) = projection_B ∘ f ∘ section_A`, after checking `f` is a chain map.
pub fn induced_on_homology<F: Field>(
    f: &BigradedMap<F>,
    a: &RComplex<F>,
    b: &RComplex<F>,
    ha: &HomologyData<F>,
    hb: &HomologyData<F>,
) -> Result<BigradedMap<F>> {
    a.check_chain_map(b, f)
        .map_err(|bidegree| SseqError::NonChainMap { bidegree })?;
    Ok(hb.projection.compose(&f.compose(&ha.section)))
}

/// Pullback `X = ker(g - p) ⊆ U ⊕ A` of r-complexes.
#[derive(Clone, Debug)]
pub struct RPullback<F> {
    pub complex: RComplex<F>,
    /// Inclusion `X -> U ⊕ A`.
    pub inclusion: BigradedMap<F>,
    /// Left inverse of the inclusion.
    pub retraction: BigradedMap<F>,
    pub pi_u: BigradedMap<F>,
    pub pi_a: BigradedMap<F>,
    u_module: BigradedModule,
    a_module: BigradedModule,
}

impl<F: Field> RPullback<F> {
    /// The unique map `Y -> X` with `π_U ∘ m = alpha` and `π_A ∘ m = beta`,
    /// or `None` when the cone does not commute.
    pub fn mediate(&self, alpha: &BigradedMap<F>, beta: &BigradedMap<F>) -> Option<BigradedMap<F>> {
        let y = alpha.source().clone();
        let both = BigradedMap::block_matrix(
            &[&y],
            &[&self.u_module, &self.a_module],
            Bidegree::ZERO,
            &[vec![Some(alpha)], vec![Some(beta)]],
        );
        let x = self.complex.module().clone();
        let mut out = BigradedMap::zero(y.clone(), x, Bidegree::ZERO);
        for s in y.support() {
            let cols = both.block(s);
            let basis = self.inclusion.block(s);
            let sol = basis.solve_matrix(&cols).ok()??;
            out.set_block(s, sol);
        }
        Some(out)
    }
}

/// Pullback of `g: U -> B` and `p: A -> B` in r-bigraded complexes.
pub fn pullback_rcomplex<F: Field>(
    u: &RComplex<F>,
    a: &RComplex<F>,
    b: &RComplex<F>,
    g: &BigradedMap<F>,
    p: &BigradedMap<F>,
) -> Result<RPullback<F>> {
    u.check_chain_map(b, g).map_err(|bidegree| SseqError::NonChainMap { bidegree })?;
    a.check_chain_map(b, p).map_err(|bidegree| SseqError::NonChainMap { bidegree })?;
    let r = u.r();
    let sum_module = BigradedModule::direct_sum(&[u.module(), a.module()]);
    let neg_p = p.neg();
    let diff = BigradedMap::block_matrix(
        &[u.module(), a.module()],
        &[b.module()],
        Bidegree::ZERO,
        &[vec![Some(g), Some(&neg_p)]],
    );
    let mut bases = BTreeMap::new();
    let mut x_module = BigradedModule::zero();
    for s in sum_module.support() {
        let k = diff.block(s).kernel_basis();
        x_module.add_dim(s, k.cols());
        bases.insert(s, k);
    }
    let inclusion = BigradedMap::from_fn(x_module.clone(), sum_module.clone(), Bidegree::ZERO, |s, _, _| {
        bases[&s].clone()
    });
    let retraction = BigradedMap::from_fn(sum_module.clone(), x_module.clone(), Bidegree::ZERO, |s, _, _| {
        left_inverse(&bases[&s])
    });
    let sum_d = BigradedMap::direct_sum(&[u.differential(), a.differential()]);
    let d = retraction.compose(&sum_d.compose(&inclusion));
    let complex = RComplex::new(x_module.clone(), r, d)?;
    let proj_u = BigradedMap::block_matrix(
        &[u.module(), a.module()],
        &[u.module()],
        Bidegree::ZERO,
        &[vec![Some(&BigradedMap::identity(u.module())), None]],
    );
    let proj_a = BigradedMap::block_matrix(
        &[u.module(), a.module()],
        &[a.module()],
        Bidegree::ZERO,
        &[vec![None, Some(&BigradedMap::identity(a.module()))]],
    );
    Ok(RPullback {
        complex,
        pi_u: proj_u.compose(&inclusion),
        pi_a: proj_a.compose(&inclusion),
        inclusion,
        retraction,
        u_module: u.module().clone(),
        a_module: a.module().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::F7;

    fn b(p: i32, q: i32) -> Bidegree {
        Bidegree::new(p, q)
    }

    fn one() -> Matrix<F7> {
        Matrix::identity(1)
    }

    /// Page 1 of the disk D_1(0,0): R at (0,0) mapping isomorphically to R at (-1,0).
    fn disk_page() -> RComplex<F7> {
        let m = BigradedModule::new([(b(0, 0), 1), (b(-1, 0), 1)]);
        let d = BigradedMap::from_blocks(m.clone(), m.clone(), Bidegree::differential(1), [(b(0, 0), one())]).unwrap();
        RComplex::new(m, 1, d).unwrap()
    }

    /// Page 1 of Λ_1: e_-, e_+ at (0,0), u at (-1,0), d e_∓ = ∓u.
    fn lambda_page() -> RComplex<F7> {
        let m = BigradedModule::new([(b(0, 0), 2), (b(-1, 0), 1)]);
        let d = BigradedMap::from_blocks(
            m.clone(),
            m.clone(),
            Bidegree::differential(1),
            [(b(0, 0), Matrix::from_i64_rows(&[&[-1, 1]]))],
        )
        .unwrap();
        RComplex::new(m, 1, d).unwrap()
    }

    #[test]
    fn zero_differential_is_valid_and_its_homology_is_itself() {
        let m = BigradedModule::new([(b(0, 0), 2), (b(3, -1), 1)]);
        let c = RComplex::<F7>::zero_differential(m.clone(), 2);
        assert!(c.validate().is_ok());
        let h = homology(&c);
        assert_eq!(h.homology, m);
        assert_eq!(h.section, BigradedMap::identity(&m));
    }

    #[test]
    fn disk_page_is_valid_and_acyclic() {
        let c = disk_page();
        assert!(c.validate().is_ok());
        assert!(homology(&c).homology.is_zero());
    }

    #[test]
    fn wrong_bidegree_is_reported() {
        let m = BigradedModule::new([(b(0, 0), 1), (b(-1, 0), 1)]);
        let d = BigradedMap::<F7>::from_blocks(m.clone(), m.clone(), Bidegree::differential(2), []).unwrap();
        let err = RComplex::new(m, 1, d).unwrap_err();
        assert_eq!(err.kind, ViolationKind::WrongBidegree);
    }

    #[test]
    fn non_square_zero_is_reported_at_its_bidegree() {
        let m = BigradedModule::new([(b(0, 0), 1), (b(0, 1), 1), (b(0, 2), 1)]);
        let d = BigradedMap::<F7>::from_blocks(
            m.clone(),
            m.clone(),
            Bidegree::differential(0),
            [(b(0, 0), one()), (b(0, 1), one())],
        )
        .unwrap();
        let err = RComplex::new(m, 0, d).unwrap_err();
        assert_eq!(err.kind, ViolationKind::NotSquareZero);
        assert_eq!(err.bidegree, Some(b(0, 0)));
    }

    #[test]
    fn lambda_page_homology_is_spanned_by_the_sum() {
        let c = lambda_page();
        let h = homology(&c);
        assert_eq!(h.homology, BigradedModule::unit(b(0, 0)));
        let rep = h.section.block(b(0, 0)).col(0);
        assert_eq!(rep[0], rep[1]);
        assert!(!rep[0].is_zero());
    }

    #[test]
    fn fold_map_induces_identity() {
        let c = lambda_page();
        let r = RComplex::<F7>::zero_differential(BigradedModule::unit(b(0, 0)), 1);
        let fold = BigradedMap::from_blocks(
            c.module().clone(),
            r.module().clone(),
            Bidegree::ZERO,
            [(b(0, 0), Matrix::from_i64_rows(&[&[1, 1]]))],
        )
        .unwrap();
        let hc = homology(&c);
        let hr = homology(&r);
        let hf = induced_on_homology(&fold, &c, &r, &hc, &hr).unwrap();
        // rep is a multiple of e_- + e_+, so H(fold) is multiplication by 2·rep[0]
        let rep = hc.section.block(b(0, 0)).col(0);
        assert_eq!(hf.block(b(0, 0)), Matrix::column(&[rep[0] + rep[1]]));
        assert!(hf.block(b(0, 0)).is_invertible());
    }

    #[test]
    fn non_chain_map_is_rejected() {
        let c = disk_page();
        let f = BigradedMap::from_blocks(
            c.module().clone(),
            c.module().clone(),
            Bidegree::ZERO,
            [(b(0, 0), one())],
        )
        .unwrap();
        let h = homology(&c);
        let err = induced_on_homology(&f, &c, &c, &h, &h).unwrap_err();
        assert!(matches!(err, SseqError::NonChainMap { .. }));
    }

    #[test]
    fn diagonal_pullback() {
        let r = RComplex::<F7>::zero_differential(BigradedModule::unit(b(0, 0)), 0);
        let id = BigradedMap::identity(r.module());
        let pb = pullback_rcomplex(&r, &r, &r, &id, &id).unwrap();
        assert_eq!(pb.complex.module().dim(b(0, 0)), 1);
        let v = pb.inclusion.block(b(0, 0)).col(0);
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn pullback_along_identity_is_source() {
        let c = lambda_page();
        let id = BigradedMap::identity(c.module());
        let pb = pullback_rcomplex(&c, &c, &c, &id, &id).unwrap();
        assert_eq!(pb.complex.module(), c.module());
        assert!(pb.pi_u.is_invertible());
    }

    #[test]
    fn coords_round_trip() {
        let c = lambda_page();
        let d = c.differential().clone();
        let v = d.coords();
        let back = BigradedMap::from_coords(d.source().clone(), d.target().clone(), d.shift(), &v);
        assert_eq!(back, d);
    }
}
