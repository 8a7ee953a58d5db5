//! Filtered cochain complexes and their spectral sequences.
//!
//! A basis vector of degree `n` with level `ℓ` lies in `F_p A^n` exactly when
//! `ℓ ≤ p`, so filtrations are coordinate conditions. The page `E_r` at
//! `(p, n+p)` is `Z_r / B_r` with
//! `Z_r(p,n) = F_p A^n ∩ d^{-1} F_{p-r} A^{n+1}`,
//! `B_0(p,n) = F_{p-1} A^n` and
//! `B_r(p,n) = Z_{r-1}(p-1,n) + d Z_{r-1}(p+r-1,n-1)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bigraded::{Bidegree, BigradedMap, BigradedModule, RComplex, Subquotient};
use crate::error::{Result, SseqError, Violation, ViolationKind};
use crate::field::Field;
use crate::linalg::{left_inverse, solve_affine, subspace_intersection, subspace_sum, Matrix};
use crate::paths::{path, RHomotopy};
use crate::spectral::{
    is_er_quasi_iso, is_r_fibration, product, SpectralMorphism, SpectralSequence, Ss,
};

/// Bounded filtered cochain complex with per-vector filtration levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredComplex<F> {
    levels: BTreeMap<i32, Vec<i32>>,
    diffs: BTreeMap<i32, Matrix<F>>,
}

impl<F: Field> FilteredComplex<F> {
    /// `levels[n]` gives the level of each basis vector in degree `n`;
    /// `diffs[n]` is `d: A^n -> A^{n+1}`. Missing differentials are zero.
    pub fn new(levels: BTreeMap<i32, Vec<i32>>, diffs: BTreeMap<i32, Matrix<F>>) -> Result<Self, Violation> {
        let levels: BTreeMap<i32, Vec<i32>> = levels.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        let c = FilteredComplex { levels, diffs };
        c.validate()?;
        let diffs = c.diffs.clone().into_iter().filter(|(_, m)| !m.is_zero()).collect();
        Ok(FilteredComplex { diffs, ..c })
    }

    pub fn zero() -> Self {
        FilteredComplex {
            levels: BTreeMap::new(),
            diffs: BTreeMap::new(),
        }
    }

    fn validate(&self) -> Result<(), Violation> {
        for (&n, m) in &self.diffs {
            if m.shape() != (self.dim(n + 1), self.dim(n)) {
                return Err(Violation::new(
                    ViolationKind::BlockShape,
                    format!("d^{n} is {}x{}, expected {}x{}", m.rows(), m.cols(), self.dim(n + 1), self.dim(n)),
                ));
            }
            let (src, tgt) = (self.levels(n), self.levels(n + 1));
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    if !m[(i, j)].is_zero() && tgt[i] > src[j] {
                        return Err(Violation::new(
                            ViolationKind::Filtration,
                            format!("d^{n} sends a vector of level {} to level {}", src[j], tgt[i]),
                        )
                        .at(Bidegree::new(src[j], n + src[j])));
                    }
                }
            }
        }
        for &n in self.diffs.keys() {
            if !self.diff(n + 1).mul(&self.diff(n)).is_zero() {
                return Err(Violation::new(ViolationKind::NotSquareZero, format!("d^{} d^{n} ≠ 0", n + 1)));
            }
        }
        Ok(())
    }

    pub fn dim(&self, n: i32) -> usize {
        self.levels.get(&n).map_or(0, Vec::len)
    }

    pub fn levels(&self, n: i32) -> &[i32] {
        self.levels.get(&n).map_or(&[], Vec::as_slice)
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.levels.keys().copied()
    }

    /// `d: A^n -> A^{n+1}`.
    pub fn diff(&self, n: i32) -> Matrix<F> {
        self.diffs.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(self.dim(n + 1), self.dim(n)))
    }

    pub fn all_levels(&self) -> &BTreeMap<i32, Vec<i32>> {
        &self.levels
    }

    pub fn all_diffs(&self) -> &BTreeMap<i32, Matrix<F>> {
        &self.diffs
    }

    /// `(p_min, p_max)` over all basis vectors.
    pub fn filtration_range(&self) -> Option<(i32, i32)> {
        let mut it = self.levels.values().flatten().copied();
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), l| (lo.min(l), hi.max(l))))
    }

    /// Page index by which the spectral sequence has stabilized.
    pub fn stable_page(&self) -> usize {
        self.filtration_range().map_or(0, |(lo, hi)| (hi - lo) as usize) + 1
    }

    /// `F_p A^n` as standard basis columns.
    pub fn filtration_basis(&self, p: i32, n: i32) -> Matrix<F> {
        let lv = self.levels(n);
        let idx: Vec<usize> = (0..lv.len()).filter(|&j| lv[j] <= p).collect();
        Matrix::identity(lv.len()).select_columns(&idx)
    }

    /// `Z_r(p,n)`.
    pub fn z(&self, r: usize, p: i32, n: i32) -> Matrix<F> {
        let src = self.levels(n);
        let tgt = self.levels(n + 1);
        let cols: Vec<usize> = (0..src.len()).filter(|&j| src[j] <= p).collect();
        let rows: Vec<usize> = (0..tgt.len()).filter(|&i| tgt[i] > p - r as i32).collect();
        let d = self.diff(n).select_rows(&rows).select_columns(&cols);
        let k = d.kernel_basis();
        Matrix::identity(src.len()).select_columns(&cols).mul(&k)
    }

    /// `B_r(p,n)`.
    pub fn b(&self, r: usize, p: i32, n: i32) -> Matrix<F> {
        if r == 0 {
            return self.filtration_basis(p - 1, n);
        }
        let lower = self.z(r - 1, p - 1, n);
        let from = self.z(r - 1, p + r as i32 - 1, n - 1);
        subspace_sum(&lower, &self.diff(n - 1).mul(&from))
    }

    /// Both `Z_r` and `B_r`.
    pub fn zr_br(&self, r: usize, p: i32, n: i32) -> (Matrix<F>, Matrix<F>) {
        (self.z(r, p, n), self.b(r, p, n))
    }

    /// Direct sum.
    pub fn direct_sum(parts: &[&FilteredComplex<F>]) -> Self {
        let mut levels: BTreeMap<i32, Vec<i32>> = BTreeMap::new();
        for c in parts {
            for (&n, lv) in &c.levels {
                levels.entry(n).or_default().extend(lv);
            }
        }
        let mut diffs = BTreeMap::new();
        let degrees: Vec<i32> = levels.keys().copied().collect();
        for n in degrees {
            let mut m = Matrix::zeros(levels.get(&(n + 1)).map_or(0, Vec::len), levels[&n].len());
            let (mut r0, mut c0) = (0, 0);
            for c in parts {
                m.set_block(r0, c0, &c.diff(n));
                r0 += c.dim(n + 1);
                c0 += c.dim(n);
            }
            diffs.insert(n, m);
        }
        FilteredComplex::new(levels, diffs).expect("direct sum of filtered complexes")
    }
}

/// A filtration-preserving chain map.
#[derive(Clone, Debug)]
pub struct FilteredMorphism<F> {
    source: Arc<FilteredComplex<F>>,
    target: Arc<FilteredComplex<F>>,
    maps: BTreeMap<i32, Matrix<F>>,
}

impl<F: Field> PartialEq for FilteredMorphism<F> {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.source.degrees().all(|n| self.map(n) == other.map(n))
    }
}

fn check_levels<F: Field>(m: &Matrix<F>, src: &[i32], tgt: &[i32], slack: i32) -> bool {
    (0..m.rows()).all(|i| (0..m.cols()).all(|j| m[(i, j)].is_zero() || tgt[i] <= src[j] + slack))
}

impl<F: Field> FilteredMorphism<F> {
    pub fn new(source: Arc<FilteredComplex<F>>, target: Arc<FilteredComplex<F>>, maps: BTreeMap<i32, Matrix<F>>) -> Result<Self> {
        for (&n, m) in &maps {
            if m.shape() != (target.dim(n), source.dim(n)) {
                return Err(SseqError::DimensionMismatch {
                    expected: target.dim(n) * source.dim(n),
                    found: m.rows() * m.cols(),
                });
            }
            if !check_levels(m, source.levels(n), target.levels(n), 0) {
                return Err(SseqError::Invalid(Violation::new(
                    ViolationKind::Filtration,
                    format!("map in degree {n} does not preserve the filtration"),
                )));
            }
        }
        let f = FilteredMorphism { source, target, maps };
        for n in f.source.degrees().chain(f.source.degrees().map(|n| n - 1)) {
            let lhs = f.target.diff(n).mul(&f.map(n));
            let rhs = f.map(n + 1).mul(&f.source.diff(n));
            if lhs != rhs {
                return Err(SseqError::Invariant(format!("not a chain map in degree {n}")));
            }
        }
        Ok(f)
    }

    pub fn identity(a: Arc<FilteredComplex<F>>) -> Self {
        let maps = a.degrees().map(|n| (n, Matrix::identity(a.dim(n)))).collect();
        FilteredMorphism {
            source: a.clone(),
            target: a,
            maps,
        }
    }

    pub fn zero(source: Arc<FilteredComplex<F>>, target: Arc<FilteredComplex<F>>) -> Self {
        FilteredMorphism {
            source,
            target,
            maps: BTreeMap::new(),
        }
    }

    pub fn source(&self) -> &Arc<FilteredComplex<F>> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FilteredComplex<F>> {
        &self.target
    }

    pub fn map(&self, n: i32) -> Matrix<F> {
        self.maps
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.target.dim(n), self.source.dim(n)))
    }

    pub fn all_maps(&self) -> &BTreeMap<i32, Matrix<F>> {
        &self.maps
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FilteredMorphism<F>) -> Self {
        let maps = other.source.degrees().map(|n| (n, self.map(n).mul(&other.map(n)))).collect();
        FilteredMorphism {
            source: other.source.clone(),
            target: self.target.clone(),
            maps,
        }
    }

    pub fn sub(&self, other: &FilteredMorphism<F>) -> Self {
        let maps = self.source.degrees().map(|n| (n, self.map(n).sub(&other.map(n)))).collect();
        FilteredMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            maps,
        }
    }
}

/// `E(A)` together with the subquotient data used to build it.
#[derive(Clone, Debug)]
pub struct Associated<F> {
    pub ss: Ss<F>,
    complex: Arc<FilteredComplex<F>>,
    parts: Vec<BTreeMap<(i32, i32), Subquotient<F>>>,
}

fn bidegree(p: i32, n: i32) -> Bidegree {
    Bidegree::new(p, n + p)
}

impl<F: Field> Associated<F> {
    fn part(&self, r: usize, p: i32, n: i32) -> Option<&Subquotient<F>> {
        self.parts[r.min(self.parts.len() - 1)].get(&(p, n))
    }

    /// Class of a vector of `Z_r(p,n)` in page `r`.
    pub fn class(&self, r: usize, p: i32, n: i32, v: &[F]) -> Vec<F> {
        self.part(r, p, n).map_or(Vec::new(), |sq| sq.proj.mul_vec(v))
    }

    /// Representative in `A^n` of a class of page `r` at `(p,n)`.
    pub fn representative(&self, r: usize, p: i32, n: i32, c: &[F]) -> Vec<F> {
        self.part(r, p, n).map_or(vec![F::zero(); self.complex.dim(n)], |sq| sq.reps.mul_vec(c))
    }
}

/// The spectral sequence of a filtered complex, with its construction data.
pub fn associated<F: Field>(a: &Arc<FilteredComplex<F>>) -> Result<Associated<F>> {
    let last = a.stable_page();
    let (lo, hi) = a.filtration_range().unwrap_or((0, 0));
    let mut parts: Vec<BTreeMap<(i32, i32), Subquotient<F>>> = Vec::with_capacity(last + 2);
    let mut zs: Vec<BTreeMap<(i32, i32), Matrix<F>>> = Vec::with_capacity(last + 2);
    for r in 0..=last + 1 {
        let mut pr = BTreeMap::new();
        let mut zr = BTreeMap::new();
        for n in a.degrees() {
            for p in lo..=hi {
                let (z, b) = a.zr_br(r, p, n);
                let sq = Subquotient::new(a.dim(n), &z, &b);
                if sq.dim() > 0 {
                    pr.insert((p, n), sq);
                }
                zr.insert((p, n), z);
            }
        }
        parts.push(pr);
        zs.push(zr);
    }
    let module_of = |r: usize| BigradedModule::new(parts[r].iter().map(|(&(p, n), sq)| (bidegree(p, n), sq.dim())));
    let mut pages = Vec::with_capacity(last + 1);
    for r in 0..=last {
        let m = module_of(r);
        let delta = Bidegree::differential(r);
        let d = BigradedMap::from_fn(m.clone(), m.clone(), delta, |x, _, _| {
            let (p, n) = (x.p, x.q - x.p);
            let src = &parts[r][&(p, n)];
            let tgt = &parts[r][&(p - r as i32, n + 1)];
            tgt.proj.mul(&a.diff(n).mul(&src.reps))
        });
        pages.push(RComplex::new_unchecked(m, r, d));
    }
    let mut transfers = Vec::with_capacity(last);
    for r in 0..last {
        let (src, tgt) = (module_of(r), module_of(r + 1));
        let d = pages[r].differential();
        let t = BigradedMap::from_fn(src.clone(), tgt, Bidegree::ZERO, |x, s, t| {
            let (p, n) = (x.p, x.q - x.p);
            let cur = &parts[r][&(p, n)];
            let next = &parts[r + 1][&(p, n)];
            let kernel = d.block(x).kernel_basis();
            if kernel.cols() == 0 {
                return Matrix::zeros(t, s);
            }
            let z = &zs[r + 1][&(p, n)];
            let sys = z.hstack(&a.b(r, p, n));
            let mut cols = Vec::with_capacity(kernel.cols());
            for c in kernel.columns() {
                let v = cur.reps.mul_vec(&c);
                let y = sys.solve(&v).ok().flatten().expect("δ-cycles come from Z_{r+1} + B_r");
                let zpart = z.mul_vec(&y[..z.cols()]);
                cols.push(next.proj.mul_vec(&zpart));
            }
            Matrix::from_columns(t, &cols).mul(&left_inverse(&kernel))
        });
        transfers.push(t);
    }
    let ss = SpectralSequence::from_transfers(pages, transfers)
        .map_err(|v| SseqError::Invariant(format!("spectral sequence of a filtered complex: {v}")))?;
    parts.truncate(last + 1);
    Ok(Associated {
        ss: Arc::new(ss),
        complex: a.clone(),
        parts,
    })
}

/// `E(A)`.
pub fn spectral_sequence<F: Field>(a: &Arc<FilteredComplex<F>>) -> Result<Ss<F>> {
    Ok(associated(a)?.ss)
}

/// `E(f)` between already computed spectral sequences of its ends.
pub fn e_of_morphism_between<F: Field>(f: &FilteredMorphism<F>, ea: &Associated<F>, eb: &Associated<F>) -> Result<SpectralMorphism<F>> {
    let last = ea.ss.stable_index().max(eb.ss.stable_index());
    let maps = (0..=last)
        .map(|r| {
            BigradedMap::from_fn(ea.ss.module(r).clone(), eb.ss.module(r).clone(), Bidegree::ZERO, |x, s, t| {
                let (p, n) = (x.p, x.q - x.p);
                let src = ea.part(r, p, n).expect("support");
                match eb.part(r, p, n) {
                    Some(tgt) => tgt.proj.mul(&f.map(n).mul(&src.reps)),
                    None => Matrix::zeros(t, s),
                }
            })
        })
        .collect();
    SpectralMorphism::from_pages(maps, ea.ss.clone(), eb.ss.clone())
}

/// `E(f)`.
pub fn e_of_morphism<F: Field>(f: &FilteredMorphism<F>) -> Result<SpectralMorphism<F>> {
    e_of_morphism_between(f, &associated(f.source())?, &associated(f.target())?)
}

/// `Z_0(f)` surjective in every filtration degree and `E_i(f)` surjective for `i ≤ r`.
pub fn is_fc_fibration<F: Field>(f: &FilteredMorphism<F>, r: usize) -> Result<bool> {
    if !z0_surjective(f) {
        return Ok(false);
    }
    Ok(is_r_fibration(&e_of_morphism(f)?, r))
}

fn z0_surjective<F: Field>(f: &FilteredMorphism<F>) -> bool {
    let b = f.target();
    b.degrees().all(|n| {
        let mut ps: Vec<i32> = b.levels(n).to_vec();
        ps.sort_unstable();
        ps.dedup();
        let fa = f.source().levels(n);
        let m = f.map(n);
        ps.into_iter().all(|p| {
            let cols: Vec<usize> = (0..fa.len()).filter(|&j| fa[j] <= p).collect();
            let need = b.levels(n).iter().filter(|&&l| l <= p).count();
            m.select_columns(&cols).rank() == need
        })
    })
}

/// Weak equivalence: `E(f)` is an `E_r`-quasi-isomorphism.
pub fn is_fc_weq<F: Field>(f: &FilteredMorphism<F>, r: usize) -> Result<bool> {
    Ok(is_er_quasi_iso(&e_of_morphism(f)?, r))
}

/// A filtered r-homotopy `h: f ≃_r g`: `dh + hd = g - f`, `h(F_p) ⊆ F_{p+r}`.
#[derive(Clone, Debug)]
pub struct FilteredHomotopy<F> {
    pub r: usize,
    pub f: FilteredMorphism<F>,
    pub g: FilteredMorphism<F>,
    /// `h^n : A^n -> B^{n-1}`.
    pub maps: BTreeMap<i32, Matrix<F>>,
}

impl<F: Field> FilteredHomotopy<F> {
    pub fn map(&self, n: i32) -> Matrix<F> {
        self.maps
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.f.target().dim(n - 1), self.f.source().dim(n)))
    }
}

/// Checks both defining conditions exactly.
pub fn filtered_r_homotopy_check<F: Field>(h: &FilteredHomotopy<F>) -> bool {
    let (a, b) = (h.f.source(), h.f.target());
    for (&n, m) in &h.maps {
        if m.shape() != (b.dim(n - 1), a.dim(n)) || !check_levels(m, a.levels(n), b.levels(n - 1), h.r as i32) {
            return false;
        }
    }
    a.degrees().all(|n| {
        let lhs = b.diff(n - 1).mul(&h.map(n)).add(&h.map(n + 1).mul(&a.diff(n)));
        lhs == h.g.map(n).sub(&h.f.map(n))
    })
}

/// `Λ_r^{FC}`: `e_±` in degree 0 at level 0, `u` in degree 1 at level `-r`,
/// `d e_- = -u`, `d e_+ = u`.
pub fn lambda_fc<F: Field>(r: usize) -> Arc<FilteredComplex<F>> {
    let levels = BTreeMap::from([(0, vec![0, 0]), (1, vec![-(r as i32)])]);
    let diffs = BTreeMap::from([(0, Matrix::from_i64_rows(&[&[-1, 1]]))]);
    Arc::new(FilteredComplex::new(levels, diffs).expect("Λ_r^FC"))
}

/// `Λ_r^{FC} ⊗ B` with the convolution filtration, and its structure maps.
#[derive(Clone, Debug)]
pub struct FilteredPath<F> {
    pub r: usize,
    pub object: Arc<FilteredComplex<F>>,
    pub base: Arc<FilteredComplex<F>>,
    pub iota: FilteredMorphism<F>,
    pub d_minus: FilteredMorphism<F>,
    pub d_plus: FilteredMorphism<F>,
}

/// Degree `n` has basis `e_-⊗B^n, e_+⊗B^n, u⊗B^{n-1}` with levels `ℓ, ℓ, ℓ-r`
/// and `d(u⊗b) = -u⊗db`.
pub fn tensor_lambda_fc<F: Field>(r: usize, b: &Arc<FilteredComplex<F>>) -> FilteredPath<F> {
    let ri = r as i32;
    let mut degrees: Vec<i32> = b.degrees().chain(b.degrees().map(|n| n + 1)).collect();
    degrees.sort_unstable();
    degrees.dedup();
    let mut levels = BTreeMap::new();
    for &n in &degrees {
        let mut lv = b.levels(n).to_vec();
        lv.extend(b.levels(n));
        lv.extend(b.levels(n - 1).iter().map(|l| l - ri));
        levels.insert(n, lv);
    }
    let mut diffs = BTreeMap::new();
    for &n in &degrees {
        let (bn, bn1, bm1) = (b.dim(n), b.dim(n + 1), b.dim(n - 1));
        let mut m = Matrix::zeros(2 * bn1 + bn, 2 * bn + bm1);
        let d = b.diff(n);
        m.set_block(0, 0, &d);
        m.set_block(bn1, bn, &d);
        m.set_block(2 * bn1, 0, &Matrix::identity(bn).neg());
        m.set_block(2 * bn1, bn, &Matrix::identity(bn));
        m.set_block(2 * bn1, 2 * bn, &b.diff(n - 1).neg());
        diffs.insert(n, m);
    }
    let object = Arc::new(FilteredComplex::new(levels, diffs).expect("Λ ⊗ B"));
    let comp = |which: usize| -> BTreeMap<i32, Matrix<F>> {
        degrees
            .iter()
            .map(|&n| {
                let (bn, bm1) = (b.dim(n), b.dim(n - 1));
                let mut m = Matrix::zeros(bn, 2 * bn + bm1);
                m.set_block(0, which * bn, &Matrix::identity(bn));
                (n, m)
            })
            .collect()
    };
    let iota_maps = degrees
        .iter()
        .map(|&n| {
            let (bn, bm1) = (b.dim(n), b.dim(n - 1));
            let mut m = Matrix::zeros(2 * bn + bm1, bn);
            m.set_block(0, 0, &Matrix::identity(bn));
            m.set_block(bn, 0, &Matrix::identity(bn));
            (n, m)
        })
        .collect();
    FilteredPath {
        r,
        iota: FilteredMorphism::new(b.clone(), object.clone(), iota_maps).expect("ι"),
        d_minus: FilteredMorphism::new(object.clone(), b.clone(), comp(0)).expect("∂^-"),
        d_plus: FilteredMorphism::new(object.clone(), b.clone(), comp(1)).expect("∂^+"),
        object,
        base: b.clone(),
    }
}

/// The morphism `A -> Λ_r^{FC} ⊗ B`, `a ↦ e_-⊗f(a) + e_+⊗g(a) + u⊗h(a)`.
pub fn homotopy_morphism<F: Field>(h: &FilteredHomotopy<F>, path: &FilteredPath<F>) -> Result<FilteredMorphism<F>> {
    let a = h.f.source();
    let maps = a
        .degrees()
        .map(|n| {
            let m = h.f.map(n).vstack(&h.g.map(n)).vstack(&h.map(n));
            (n, m)
        })
        .collect();
    FilteredMorphism::new(a.clone(), path.object.clone(), maps)
}

/// Transports a filtered r-homotopy `f ≃_r g` to an r-homotopy
/// `E(f) ≃_r E(g)` through `E(Λ_r^{FC} ⊗ B) -> P(r; E(B))`.
pub fn spectral_homotopy<F: Field>(h: &FilteredHomotopy<F>) -> Result<RHomotopy<F>> {
    let r = h.r;
    let fp = tensor_lambda_fc(r, h.f.target());
    let ea = associated(h.f.source())?;
    let eb = associated(h.f.target())?;
    let el = associated(&fp.object)?;
    let big_h = e_of_morphism_between(&homotopy_morphism(h, &fp)?, &ea, &el)?;
    let dm = e_of_morphism_between(&fp.d_minus, &el, &eb)?;
    let dp = e_of_morphism_between(&fp.d_plus, &el, &eb)?;
    let pb = path(r, &eb.ss);
    let comparison = comparison_to_path(&el.ss, &pb, &dm, &dp)
        .ok_or_else(|| SseqError::Invariant("no comparison map E(Λ ⊗ B) -> P(r; E(B))".into()))?;
    let k = comparison.compose(&big_h);
    let spectral = RHomotopy::from_path_morphism(&k, &pb)?;
    let ef = e_of_morphism_between(&h.f, &ea, &eb)?;
    let eg = e_of_morphism_between(&h.g, &ea, &eb)?;
    RHomotopy::new(r, ef, eg, spectral.map(0).clone())
}

/// A morphism `X -> P(r;B)` whose boundaries are the given `X -> B`.
pub fn comparison_to_path<F: Field>(
    x: &Ss<F>,
    pb: &crate::paths::PathObject<F>,
    dm: &SpectralMorphism<F>,
    dp: &SpectralMorphism<F>,
) -> Option<SpectralMorphism<F>> {
    let sol = crate::spectral::solve_morphisms(x, &pb.object, |maps| {
        let mut res = pb.d_minus.map(0).compose(&maps[0]).sub(dm.map(0)).coords();
        res.extend(pb.d_plus.map(0).compose(&maps[0]).sub(dp.map(0)).coords());
        res
    });
    let x0 = sol.particular?;
    let f0 = BigradedMap::from_coords(x.module(0).clone(), pb.object.module(0).clone(), Bidegree::ZERO, &x0);
    SpectralMorphism::derive(f0, x.clone(), pb.object.clone()).ok()
}

/// Filtered direct sum with projections.
pub fn product_fc<F: Field>(a: &Arc<FilteredComplex<F>>, b: &Arc<FilteredComplex<F>>) -> (Arc<FilteredComplex<F>>, FilteredMorphism<F>, FilteredMorphism<F>) {
    let x = Arc::new(FilteredComplex::direct_sum(&[a, b]));
    let proj = |first: bool| {
        let maps = x
            .degrees()
            .map(|n| {
                let (da, db) = (a.dim(n), b.dim(n));
                let mut m = Matrix::zeros(if first { da } else { db }, da + db);
                if first {
                    m.set_block(0, 0, &Matrix::identity(da));
                } else {
                    m.set_block(0, da, &Matrix::identity(db));
                }
                (n, m)
            })
            .collect();
        FilteredMorphism::new(x.clone(), if first { a.clone() } else { b.clone() }, maps).expect("projection")
    };
    let (pa, pb) = (proj(true), proj(false));
    (x, pa, pb)
}

/// Pullback `X = ker(g - p) ⊆ U ⊕ A` with the induced filtration.
#[derive(Clone, Debug)]
pub struct FilteredPullback<F> {
    pub object: Arc<FilteredComplex<F>>,
    pub pi_u: FilteredMorphism<F>,
    pub pi_a: FilteredMorphism<F>,
}

pub fn pullback_fc<F: Field>(g: &FilteredMorphism<F>, p: &FilteredMorphism<F>) -> Result<FilteredPullback<F>> {
    if g.target() != p.target() {
        return Err(SseqError::Invariant("pullback needs a common target".into()));
    }
    let (u, a) = (g.source(), p.source());
    let sum = FilteredComplex::direct_sum(&[u, a]);
    let mut degrees: Vec<i32> = sum.degrees().collect();
    degrees.sort_unstable();
    let mut bases: BTreeMap<i32, Matrix<F>> = BTreeMap::new();
    let mut levels = BTreeMap::new();
    for &n in &degrees {
        let kernel = g.map(n).hstack(&p.map(n).neg()).kernel_basis();
        let lv = sum.levels(n);
        let mut ps: Vec<i32> = lv.to_vec();
        ps.sort_unstable();
        ps.dedup();
        let mut basis = Matrix::zeros(lv.len(), 0);
        let mut blv = Vec::new();
        for q in ps {
            let piece = subspace_intersection(&kernel, &sum.filtration_basis(q, n));
            let new = basis.extension_from(&piece);
            blv.extend(std::iter::repeat_n(q, new.cols()));
            basis = basis.hstack(&new);
        }
        if basis.cols() > 0 {
            levels.insert(n, blv);
        }
        bases.insert(n, basis);
    }
    let basis_of = |n: i32| bases.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(sum.dim(n), 0));
    let mut diffs = BTreeMap::new();
    for &n in &degrees {
        let image = sum.diff(n).mul(&basis_of(n));
        let coords = basis_of(n + 1)
            .solve_matrix(&image)
            .ok()
            .flatten()
            .ok_or_else(|| SseqError::Invariant("kernel is not a subcomplex".into()))?;
        diffs.insert(n, coords);
    }
    let object = Arc::new(FilteredComplex::new(levels, diffs)?);
    let split = |first: bool| -> BTreeMap<i32, Matrix<F>> {
        degrees
            .iter()
            .map(|&n| {
                let k = basis_of(n);
                let du = u.dim(n);
                let rows = if first { 0..du } else { du..du + a.dim(n) };
                (n, k.submatrix(rows, 0..k.cols()))
            })
            .collect()
    };
    Ok(FilteredPullback {
        pi_u: FilteredMorphism::new(object.clone(), u.clone(), split(true))?,
        pi_a: FilteredMorphism::new(object.clone(), a.clone(), split(false))?,
        object,
    })
}

/// The r-homotopy `h: f ≃_r f + dh + hd`; fails when `h` or the new end
/// breaks the filtration.
pub fn homotopy_from_h<F: Field>(r: usize, f: &FilteredMorphism<F>, maps: BTreeMap<i32, Matrix<F>>) -> Result<FilteredHomotopy<F>> {
    let (a, b) = (f.source(), f.target());
    let get = |n: i32| maps.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(b.dim(n - 1), a.dim(n)));
    let g_maps = a
        .degrees()
        .map(|n| {
            let dh = b.diff(n - 1).mul(&get(n)).add(&get(n + 1).mul(&a.diff(n)));
            (n, f.map(n).add(&dh))
        })
        .collect();
    let g = FilteredMorphism::new(a.clone(), b.clone(), g_maps)?;
    let h = FilteredHomotopy {
        r,
        f: f.clone(),
        g,
        maps,
    };
    if filtered_r_homotopy_check(&h) {
        Ok(h)
    } else {
        Err(SseqError::Invariant("h violates the filtration bound".into()))
    }
}

/// Basis of the maps `h` of degree `-1` with `h(F_p) ⊆ F_{p+r}` for which
/// `dh + hd` preserves the filtration, so that `f + dh + hd` is again filtered.
pub fn filtered_homotopy_basis<F: Field>(r: usize, a: &FilteredComplex<F>, b: &FilteredComplex<F>) -> Vec<BTreeMap<i32, Matrix<F>>> {
    let slots: Vec<(i32, usize, usize)> = a
        .degrees()
        .flat_map(|n| {
            let (sa, sb) = (a.levels(n), b.levels(n - 1));
            (0..sb.len()).flat_map(move |i| {
                (0..sa.len()).filter(move |&j| sb[i] <= sa[j] + r as i32).map(move |j| (n, i, j))
            })
        })
        .collect();
    let build = |x: &[F]| -> BTreeMap<i32, Matrix<F>> {
        let mut maps: BTreeMap<i32, Matrix<F>> = a.degrees().map(|n| (n, Matrix::zeros(b.dim(n - 1), a.dim(n)))).collect();
        for (k, &(n, i, j)) in slots.iter().enumerate() {
            maps.get_mut(&n).unwrap()[(i, j)] = x[k].clone();
        }
        maps
    };
    let sol = solve_affine(slots.len(), |x| {
        let maps = build(x);
        let get = |n: i32| maps.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(b.dim(n - 1), a.dim(n)));
        let mut res = Vec::new();
        for n in a.degrees() {
            let dh = b.diff(n - 1).mul(&get(n)).add(&get(n + 1).mul(&a.diff(n)));
            let (la, lb) = (a.levels(n), b.levels(n));
            for i in 0..lb.len() {
                for j in 0..la.len() {
                    if lb[i] > la[j] {
                        res.push(dh[(i, j)].clone());
                    }
                }
            }
        }
        res
    });
    sol.kernel.columns().iter().map(|c| build(c)).collect()
}

/// Filtered morphisms `A -> B`, as a basis of the solution space.
pub fn filtered_hom_basis<F: Field>(a: &Arc<FilteredComplex<F>>, b: &Arc<FilteredComplex<F>>) -> Vec<FilteredMorphism<F>> {
    let slots: Vec<(i32, usize, usize)> = a
        .degrees()
        .flat_map(|n| {
            let (sa, sb) = (a.levels(n), b.levels(n));
            (0..sb.len())
                .flat_map(move |i| (0..sa.len()).filter(move |&j| sb[i] <= sa[j]).map(move |j| (n, i, j)))
        })
        .collect();
    let build = |x: &[F]| -> BTreeMap<i32, Matrix<F>> {
        let mut maps: BTreeMap<i32, Matrix<F>> = a.degrees().map(|n| (n, Matrix::zeros(b.dim(n), a.dim(n)))).collect();
        for (k, &(n, i, j)) in slots.iter().enumerate() {
            maps.get_mut(&n).unwrap()[(i, j)] = x[k].clone();
        }
        maps
    };
    let sol = solve_affine(slots.len(), |x| {
        let maps = build(x);
        let get = |n: i32| maps.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(b.dim(n), a.dim(n)));
        let mut res = Vec::new();
        for n in a.degrees().chain(a.degrees().map(|n| n - 1)) {
            res.extend(b.diff(n).mul(&get(n)).sub(&get(n + 1).mul(&a.diff(n))).entries().to_vec());
        }
        res
    });
    sol.kernel
        .columns()
        .iter()
        .map(|c| FilteredMorphism::new(a.clone(), b.clone(), build(c)).expect("solution of the chain-map system"))
        .collect()
}

/// `E(A × B)` compared with `E(A) × E(B)`: the canonical map is an isomorphism.
pub fn product_comparison<F: Field>(a: &Arc<FilteredComplex<F>>, b: &Arc<FilteredComplex<F>>) -> Result<bool> {
    let (x, pa, pb) = product_fc(a, b);
    let (ex, ea, eb) = (associated(&x)?, associated(a)?, associated(b)?);
    let epa = e_of_morphism_between(&pa, &ex, &ea)?;
    let epb = e_of_morphism_between(&pb, &ex, &eb)?;
    let prod = product(&[ea.ss.clone(), eb.ss.clone()]);
    let canonical = prod.pair(&[&epa, &epb])?;
    Ok(canonical.is_isomorphism())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::F7;
    use crate::paths::lambda;
    use crate::representables::disk;
    use crate::spectral::isomorphic;

    type F = F7;

    fn two_generator() -> Arc<FilteredComplex<F>> {
        let levels = BTreeMap::from([(0, vec![1]), (1, vec![0])]);
        let diffs = BTreeMap::from([(0, Matrix::identity(1))]);
        Arc::new(FilteredComplex::new(levels, diffs).unwrap())
    }

    #[test]
    fn page_formulas_on_two_generators() {
        let a = two_generator();
        let (z, b) = a.zr_br(1, 1, 0);
        assert_eq!(z.rank(), 1);
        assert_eq!(b.rank(), 0);
        let e = spectral_sequence(&a).unwrap();
        assert!(e.validate().is_ok());
        assert_eq!(e.module(1).dim(Bidegree::new(1, 1)), 1);
        assert_eq!(e.module(1).dim(Bidegree::new(0, 1)), 1);
        assert!(e.module(2).is_zero());
        assert!(isomorphic(&e, &disk(1, 1, 1)).is_some());
    }

    #[test]
    fn lambda_fc_gives_lambda() {
        for r in 0..4 {
            let e = spectral_sequence(&lambda_fc::<F>(r)).unwrap();
            assert!(isomorphic(&e, &lambda(r)).is_some(), "r = {r}");
        }
    }

    #[test]
    fn filtration_violation_is_reported() {
        let levels = BTreeMap::from([(0, vec![0]), (1, vec![1])]);
        let diffs = BTreeMap::from([(0, Matrix::<F>::identity(1))]);
        let err = FilteredComplex::new(levels, diffs).unwrap_err();
        assert_eq!(err.kind, ViolationKind::Filtration);
    }

    #[test]
    fn trivial_filtration_degenerates() {
        let levels = BTreeMap::from([(0, vec![0, 0]), (1, vec![0])]);
        let diffs = BTreeMap::from([(0, Matrix::<F>::from_i64_rows(&[&[1, 1]]))]);
        let a = Arc::new(FilteredComplex::new(levels, diffs).unwrap());
        let e = spectral_sequence(&a).unwrap();
        assert_eq!(e.module(1).total_dim(), 1);
        assert_eq!(e.module(5).total_dim(), 1);
    }

    #[test]
    fn e_of_identity_and_zero() {
        let a = two_generator();
        let id = e_of_morphism(&FilteredMorphism::identity(a.clone())).unwrap();
        assert!(id.map(0).is_invertible());
        let z = e_of_morphism(&FilteredMorphism::zero(a.clone(), a.clone())).unwrap();
        assert!(z.map(0).is_zero());
        assert!(is_fc_fibration(&FilteredMorphism::identity(a.clone()), 3).unwrap());
        assert!(!is_fc_fibration(&FilteredMorphism::zero(Arc::new(FilteredComplex::zero()), a), 0).unwrap());
    }

    #[test]
    fn path_of_filtered_complex() {
        let b = two_generator();
        for r in 0..3 {
            let fp = tensor_lambda_fc(r, &b);
            let e = spectral_sequence(&fp.object).unwrap();
            let pb = path(r, &spectral_sequence(&b).unwrap());
            assert!(isomorphic(&e, &pb.object).is_some(), "r = {r}");
        }
    }

    #[test]
    fn homotopy_transport() {
        let b = two_generator();
        let f = FilteredMorphism::identity(b.clone());
        for r in 1..3 {
            // h: degree 1 -> degree 0 raises the level from 0 to 1 ≤ 0 + r
            let maps = BTreeMap::from([(1, Matrix::from_i64_rows(&[&[3]]))]);
            let h = homotopy_from_h(r, &f, maps).unwrap();
            let spectral = spectral_homotopy(&h).unwrap();
            assert!(crate::paths::is_r_homotopy(&spectral));
        }
    }

    #[test]
    fn products_and_pullbacks() {
        let a = two_generator();
        let l = lambda_fc::<F>(1);
        assert!(product_comparison(&a, &l).unwrap());
        let id = FilteredMorphism::identity(a.clone());
        let pb = pullback_fc(&id, &id).unwrap();
        assert_eq!(pb.object.dim(0), 1);
        assert_eq!(pb.object.levels(0), &[1]);
    }

    #[test]
    fn hom_basis_contains_identity_multiples() {
        let a = two_generator();
        let basis = filtered_hom_basis(&a, &a);
        assert_eq!(basis.len(), 1);
    }
}
