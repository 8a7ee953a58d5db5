//! Disks, spheres and the lifting-property characterizations of
//! r-fibrations and acyclic r-fibrations.
//!
//! `D_r(p,n)` has generators `a` at `(p,n)` and `b` at `(p-r, n+1-r)`, zero
//! differentials below page `r`, `d_r a = b`, and vanishes from page `r+1`.
//! `S_r(p,n) = D_{r-1}(p-1,n-1) ⊕ D_{r-1}(p+r-1,n+r-2)` and
//! `φ_r : D_r(p,n) -> S_r(p,n)` is the identity on matching bidegrees.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::bigraded::{Bidegree, BigradedMap, BigradedModule, RComplex};
use crate::error::{Result, SseqError};
use crate::field::Field;
use crate::linalg::{solve_affine, Matrix};
use crate::spectral::{product2, HomSpace, SpectralMorphism, SpectralSequence, Ss};

pub fn disk<F: Field>(r: usize, p: i32, n: i32) -> Ss<F> {
    let a = Bidegree::new(p, n);
    let b = a + Bidegree::differential(r);
    let m = BigradedModule::new([(a, 1), (b, 1)]);
    let mut pages: Vec<RComplex<F>> = (0..r).map(|k| RComplex::zero_differential(m.clone(), k)).collect();
    let d = BigradedMap::from_blocks(m.clone(), m.clone(), Bidegree::differential(r), [(a, Matrix::identity(1))]).expect("shape");
    pages.push(RComplex::new_unchecked(m.clone(), r, d));
    pages.push(RComplex::zero_differential(BigradedModule::zero(), r + 1));
    let mut transfers: Vec<BigradedMap<F>> = (0..r).map(|_| BigradedMap::identity(&m)).collect();
    transfers.push(BigradedMap::zero(m, BigradedModule::zero(), Bidegree::ZERO));
    Arc::new(SpectralSequence::from_transfers(pages, transfers).expect("disk"))
}

pub fn sphere<F: Field>(r: usize, p: i32, n: i32) -> Result<Ss<F>> {
    if r == 0 {
        return Err(SseqError::UnsupportedGenerator("S_0 is not defined".into()));
    }
    let (r1, ri) = (r - 1, r as i32);
    Ok(product2(&disk(r1, p - 1, n - 1), &disk(r1, p + ri - 1, n + ri - 2)).object)
}

pub fn varphi<F: Field>(r: usize, p: i32, n: i32) -> Result<SpectralMorphism<F>> {
    let s = sphere::<F>(r, p, n)?;
    let d = disk::<F>(r, p, n);
    let f0 = BigradedMap::from_fn(d.module(0).clone(), s.module(0).clone(), Bidegree::ZERO, |_, _, _| Matrix::identity(1));
    SpectralMorphism::derive(f0, d, s)
}

/// The generating maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    /// `0 -> D_k(p,n)`.
    FromZero { k: usize, p: i32, n: i32 },
    /// `φ_k : D_k(p,n) -> S_k(p,n)`, `k ≥ 1`.
    Varphi { k: usize, p: i32, n: i32 },
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::FromZero { k, p, n } => write!(f, "0 -> D_{k}({p},{n})"),
            Generator::Varphi { k, p, n } => write!(f, "phi_{k}({p},{n})"),
        }
    }
}

impl Generator {
    pub fn morphism<F: Field>(&self) -> Result<SpectralMorphism<F>> {
        match *self {
            Generator::FromZero { k, p, n } => Ok(SpectralMorphism::zero(Arc::new(SpectralSequence::zero()), disk(k, p, n))),
            Generator::Varphi { k: 0, .. } => Err(SseqError::UnsupportedGenerator(self.to_string())),
            Generator::Varphi { k, p, n } => varphi(k, p, n),
        }
    }

    /// Bidegrees of the generator's objects relative to `(p,n)`.
    fn offsets(kind_k: usize, varphi: bool) -> Vec<Bidegree> {
        let k = kind_k as i32;
        let mut out = vec![Bidegree::ZERO, Bidegree::new(-k, 1 - k)];
        if varphi {
            out.push(Bidegree::new(-1, -1));
            out.push(Bidegree::new(k - 1, k - 2));
        }
        out
    }
}

/// Whether `f` has the right lifting property against `i`: every commuting
/// square `f α = β i` admits `λ` with `λ i = α` and `f λ = β`.
pub fn lifting_property<F: Field>(i: &SpectralMorphism<F>, f: &SpectralMorphism<F>) -> bool {
    let (x, y) = (i.source(), i.target());
    let (a, b) = (f.source(), f.target());
    let hxa = HomSpace::new(x.clone(), a.clone());
    let hyb = HomSpace::new(y.clone(), b.clone());
    let hya = HomSpace::new(y.clone(), a.clone());
    let (n1, n2) = (hxa.num_coords(), hyb.num_coords());
    let (k1, k2) = (hxa.dim(), hyb.dim());
    let (i0, f0) = (i.map(0), f.map(0));
    let mx = || (x.module(0).clone(), a.module(0).clone());
    let my = || (y.module(0).clone(), b.module(0).clone());
    let sq = solve_affine(k1 + k2, |c| {
        let alpha = hxa.basis.mul_vec(&c[..k1]);
        let beta = hyb.basis.mul_vec(&c[k1..]);
        let (sx, ta) = mx();
        let (sy, tb) = my();
        let alpha = BigradedMap::from_coords(sx, ta, Bidegree::ZERO, &alpha);
        let beta = BigradedMap::from_coords(sy, tb, Bidegree::ZERO, &beta);
        f0.compose(&alpha).sub(&beta.compose(i0)).coords()
    });
    let squares = sq.kernel.cols();
    if squares == 0 {
        return true;
    }
    let mut images = Vec::with_capacity(hya.dim());
    for lam in hya.basis.columns() {
        let lam = BigradedMap::from_coords(y.module(0).clone(), a.module(0).clone(), Bidegree::ZERO, &lam);
        let mut v = lam.compose(i0).coords();
        v.extend(f0.compose(&lam).coords());
        images.push(v);
    }
    debug_assert!(images.iter().all(|v| v.len() == n1 + n2));
    Matrix::from_columns(n1 + n2, &images).rank() == squares
}

/// [`lifting_property`] against a generating map.
pub fn has_rlp<F: Field>(f: &SpectralMorphism<F>, gen: Generator) -> Result<bool> {
    Ok(lifting_property(&gen.morphism()?, f))
}

/// Every `(p,n)` at which a generator with these offsets touches the
/// supports of `f`; elsewhere all lifting problems are trivial.
fn window<F: Field>(f: &SpectralMorphism<F>, k: usize, varphi: bool) -> BTreeSet<(i32, i32)> {
    let supp = BigradedModule::joint_support([f.source().module(0), f.target().module(0)]);
    let mut out = BTreeSet::new();
    for s in supp {
        for o in Generator::offsets(k, varphi) {
            let c = s - o;
            out.insert((c.p, c.q));
        }
    }
    out
}

/// `J'_r = ∪_{k ≤ r} J_k` restricted to the window of `f`.
pub fn j_prime<F: Field>(f: &SpectralMorphism<F>, r: usize) -> Vec<Generator> {
    (0..=r)
        .flat_map(|k| window(f, k, false).into_iter().map(move |(p, n)| Generator::FromZero { k, p, n }))
        .collect()
}

/// `I'_r = ∪_{k < r} J_k ∪ {φ_{r+1}}` restricted to the window of `f`.
pub fn i_prime<F: Field>(f: &SpectralMorphism<F>, r: usize) -> Vec<Generator> {
    let mut gens: Vec<Generator> = (0..r)
        .flat_map(|k| window(f, k, false).into_iter().map(move |(p, n)| Generator::FromZero { k, p, n }))
        .collect();
    gens.extend(window(f, r + 1, true).into_iter().map(|(p, n)| Generator::Varphi { k: r + 1, p, n }));
    gens
}

/// First generator of `gens` that `f` fails to lift against.
pub fn first_failure<F: Field>(f: &SpectralMorphism<F>, gens: &[Generator]) -> Option<Generator> {
    gens.iter().copied().find(|g| !has_rlp(f, *g).expect("supported generator"))
}

pub fn rfib_via_rlp<F: Field>(f: &SpectralMorphism<F>, r: usize) -> bool {
    first_failure(f, &j_prime(f, r)).is_none()
}

pub fn acyclic_rfib_via_rlp<F: Field>(f: &SpectralMorphism<F>, r: usize) -> bool {
    first_failure(f, &i_prime(f, r)).is_none()
}

/// `D_r^{p,n}(A)`: pairs of compatible sequences `a_0..a_r` at `(p,n)` and
/// `b_0..b_r` at `(p-r, n+1-r)` with `d_r a_r = b_r`. Columns of `basis`
/// list `a_0, …, a_r, b_0, …, b_r` coordinates.
#[derive(Clone, Debug)]
pub struct DiskSpace<F> {
    pub r: usize,
    pub p: i32,
    pub n: i32,
    pub basis: Matrix<F>,
    layout: Vec<usize>,
}

impl<F: Field> DiskSpace<F> {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Splits a coordinate vector into its `2r+2` pieces.
    pub fn split<'a>(&self, v: &'a [F]) -> Vec<&'a [F]> {
        let mut out = Vec::with_capacity(self.layout.len());
        let mut at = 0;
        for &len in &self.layout {
            out.push(&v[at..at + len]);
            at += len;
        }
        out
    }
}

pub fn disk_space<F: Field>(r: usize, p: i32, n: i32, a: &SpectralSequence<F>) -> DiskSpace<F> {
    let top = Bidegree::new(p, n);
    let bot = top + Bidegree::differential(r);
    let layout: Vec<usize> = (0..=r).map(|i| a.module(i).dim(top)).chain((0..=r).map(|i| a.module(i).dim(bot))).collect();
    let total = layout.iter().sum();
    let space = DiskSpace {
        r,
        p,
        n,
        basis: Matrix::zeros(total, 0),
        layout,
    };
    let sol = solve_affine(total, |v| {
        let parts = space.split(v);
        let (aa, bb) = parts.split_at(r + 1);
        let mut res = Vec::new();
        for (x, seq) in [(top, aa), (bot, bb)] {
            for i in 0..r {
                let d = a.differential(i);
                if d.target().dim(x + d.shift()) > 0 {
                    res.extend(d.block(x).mul_vec(seq[i]));
                }
                let t = a.transfer(i).block(x);
                let next = t.mul_vec(seq[i]);
                res.extend(next.into_iter().zip(seq[i + 1].iter()).map(|(u, w)| u - w.clone()));
            }
        }
        let d = a.differential(r);
        if a.module(r).dim(bot) > 0 {
            let da = d.block(top).mul_vec(aa[r]);
            res.extend(da.into_iter().zip(bb[r].iter()).map(|(u, w)| u - w.clone()));
        }
        res
    });
    DiskSpace { basis: sol.kernel, ..space }
}

/// The morphism `D_r(p,n) -> A` with the given disk-space coordinates.
pub fn morphism_from_disk_coords<F: Field>(space: &DiskSpace<F>, coords: &[F], a: &Ss<F>) -> Result<SpectralMorphism<F>> {
    let d = disk::<F>(space.r, space.p, space.n);
    let parts = space.split(coords);
    let top = Bidegree::new(space.p, space.n);
    let bot = top + Bidegree::differential(space.r);
    let f0 = BigradedMap::from_fn(d.module(0).clone(), a.module(0).clone(), Bidegree::ZERO, |x, _, _| {
        let v = if x == top { parts[0] } else { parts[space.r + 1] };
        debug_assert!(x == top || x == bot);
        Matrix::column(v)
    });
    SpectralMorphism::derive(f0, d, a.clone())
}

/// Disk-space coordinates of a morphism out of `D_r(p,n)`.
pub fn disk_coords<F: Field>(f: &SpectralMorphism<F>, r: usize, p: i32, n: i32) -> Vec<F> {
    let top = Bidegree::new(p, n);
    let bot = top + Bidegree::differential(r);
    let mut out = Vec::new();
    for x in [top, bot] {
        for i in 0..=r {
            out.extend(f.map(i).block(x).col(0));
        }
    }
    out
}

/// Morphisms `D_r(p,n) -> A`, one per disk-space basis vector.
pub fn hom_from_disk<F: Field>(r: usize, p: i32, n: i32, a: &Ss<F>) -> Vec<SpectralMorphism<F>> {
    let space = disk_space(r, p, n, a);
    space
        .basis
        .columns()
        .iter()
        .map(|c| morphism_from_disk_coords(&space, c, a).expect("disk-space elements are morphisms"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::F7;
    use crate::paths::{lambda, path};
    use crate::spectral::{fixtures, is_acyclic_r_fibration, is_r_fibration};

    type F = F7;

    #[test]
    fn disks_and_spheres_validate() {
        for r in 0..4 {
            assert!(disk::<F>(r, 1, -2).validate().is_ok());
            if r > 0 {
                assert!(sphere::<F>(r, 1, -2).unwrap().validate().is_ok());
                assert!(varphi::<F>(r, 1, -2).unwrap().validate().is_ok());
            }
        }
        let d0 = disk::<F>(0, 0, 0);
        assert_eq!(d0.module(0).dim(Bidegree::new(0, 1)), 1);
        assert!(d0.module(1).is_zero());
        assert!(sphere::<F>(0, 0, 0).is_err());
        assert!(matches!(
            has_rlp(&SpectralMorphism::identity(d0), Generator::Varphi { k: 0, p: 0, n: 0 }),
            Err(SseqError::UnsupportedGenerator(_))
        ));
    }

    #[test]
    fn sphere_one_is_two_zero_disks() {
        let s = sphere::<F>(1, 0, 0).unwrap();
        let expect = product2(&disk::<F>(0, -1, -1), &disk::<F>(0, 0, -1)).object;
        assert_eq!(*s, *expect);
    }

    #[test]
    fn disk_space_of_lambda_one() {
        let l = lambda::<F>(1);
        let space = disk_space(1, 0, 0, &l);
        assert_eq!(space.dim(), 2);
        let homs = hom_from_disk(1, 0, 0, &l);
        assert_eq!(homs.len(), 2);
        for (h, col) in homs.iter().zip(space.basis.columns()) {
            assert_eq!(disk_coords(h, 1, 0, 0), col);
        }
        assert_eq!(HomSpace::new(disk::<F>(1, 0, 0), l).dim(), 2);
    }

    #[test]
    fn disk_space_of_zero_and_self() {
        let z: Ss<F> = Arc::new(SpectralSequence::zero());
        assert_eq!(disk_space(2, 0, 0, &z).dim(), 0);
        let d = disk::<F>(2, 3, 1);
        let homs = hom_from_disk(2, 3, 1, &d);
        assert!(homs.iter().any(|h| *h == SpectralMorphism::identity(d.clone())));
    }

    #[test]
    fn identity_lifts_against_everything() {
        let a = fixtures::s::<F>();
        let id = SpectralMorphism::identity(a);
        assert!(rfib_via_rlp(&id, 2));
        assert!(acyclic_rfib_via_rlp(&id, 2));
    }

    #[test]
    fn pi_fails_a_disk_lift() {
        let pi = fixtures::pi_t::<F>();
        assert!(rfib_via_rlp(&pi, 0));
        assert!(!rfib_via_rlp(&pi, 1));
        assert!(!has_rlp(&pi, Generator::FromZero { k: 1, p: 0, n: 0 }).unwrap());
    }

    #[test]
    fn boundary_maps_of_path_objects() {
        for r in 0..3 {
            let a = product2(&fixtures::s::<F>(), &lambda::<F>(1)).object;
            let p = path(r, &a);
            let both = product2(&a, &a).pair(&[&p.d_minus, &p.d_plus]).unwrap();
            assert!(rfib_via_rlp(&both, r));
            assert!(is_r_fibration(&both, r));
            assert!(acyclic_rfib_via_rlp(&p.d_minus, r));
            assert!(is_acyclic_r_fibration(&p.d_minus, r));
            assert!(!acyclic_rfib_via_rlp(&both, r) || is_acyclic_r_fibration(&both, r));
        }
    }
}
