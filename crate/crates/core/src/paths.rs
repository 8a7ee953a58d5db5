//! Path objects, mapping path factorizations and r-homotopies.
//!
//! For `u: A -> B` the mapping path object `P̄(r;u)` has, on pages `m ≤ r`,
//! the module `A_m ⊕ B_m[s] ⊕ B_m` with `s = (r, r-1)` and differential
//! `diag(d, (-1)^{m+r+1} d, d)` below `r` and
//! `(a, b', b) ↦ (da, -u a - d b' + b, db)` on page `r`. From page `r+1` on
//! it agrees with `A`. The path object of `A` is the case `u = 1_A`.

use std::sync::Arc;

use crate::bigraded::{Bidegree, BigradedMap, BigradedModule, RComplex};
use crate::error::{Result, SseqError};
use crate::field::Field;
use crate::linalg::solve_affine;
use crate::spectral::{derive_pages, derive_shifted, same_object, SpectralMorphism, SpectralSequence, Ss};

/// `u = p ∘ i` with `ρ ∘ i = 1`.
#[derive(Clone, Debug)]
pub struct MappingPath<F> {
    pub r: usize,
    pub object: Ss<F>,
    /// `A -> P̄`, `a ↦ (a, 0, u a)`.
    pub i: SpectralMorphism<F>,
    /// `P̄ -> B`, `(a, b', b) ↦ b`.
    pub p: SpectralMorphism<F>,
    /// `P̄ -> A`, `(a, b', b) ↦ a`.
    pub rho: SpectralMorphism<F>,
}

fn sign<F: Field>(odd: bool) -> F {
    if odd {
        -F::one()
    } else {
        F::one()
    }
}

/// `Λ_r`: `e_-, e_+` at `(0,0)` and `u` at `(-r, 1-r)`, with
/// `d_r e_- = -u`, `d_r e_+ = u` and every other differential zero. From
/// page `r+1` on it is the field at `(0,0)`, generated by `e_+ + e_-`.
pub fn lambda<F: Field>(r: usize) -> Ss<F> {
    let o = Bidegree::ZERO;
    let ub = Bidegree::differential(r);
    let m = BigradedModule::new([(o, 2), (ub, 1)]);
    let mut pages: Vec<RComplex<F>> = (0..r).map(|k| RComplex::zero_differential(m.clone(), k)).collect();
    let d = BigradedMap::from_blocks(m.clone(), m.clone(), ub, [(o, crate::linalg::Matrix::from_i64_rows(&[&[-1, 1]]))]).expect("shape");
    pages.push(RComplex::new_unchecked(m.clone(), r, d));
    let top = BigradedModule::unit(o);
    pages.push(RComplex::zero_differential(top.clone(), r + 1));
    let mut transfers: Vec<BigradedMap<F>> = (0..r).map(|_| BigradedMap::identity(&m)).collect();
    transfers.push(BigradedMap::from_blocks(m, top, Bidegree::ZERO, [(o, crate::linalg::Matrix::from_i64_rows(&[&[1, 0]]))]).expect("shape"));
    Arc::new(SpectralSequence::from_transfers(pages, transfers).expect("Λ_r"))
}

/// Mapping path factorization of `u` at level `r`.
pub fn mapping_path<F: Field>(r: usize, u: &SpectralMorphism<F>) -> MappingPath<F> {
    let (a, b) = (u.source(), u.target());
    let s = Bidegree::homotopy(r);
    let last = a.stable_index().max(b.stable_index()).max(r + 1);
    let mut pages = Vec::with_capacity(last + 1);
    for m in 0..=last {
        if m > r {
            pages.push(a.page(m).into_owned());
            continue;
        }
        let (ma, mb) = (a.module(m), b.module(m));
        let mbs = mb.shifted(s);
        let da = a.differential(m);
        let db = b.differential(m);
        let dbs = db.reindexed(s);
        let delta = Bidegree::differential(m);
        let d = if m < r {
            let mid = dbs.scale(&sign::<F>((m + r + 1) % 2 == 1));
            BigradedMap::direct_sum(&[da.as_ref(), &mid, db.as_ref()])
        } else {
            let to_shift_a = BigradedMap::from_fn(ma.clone(), mbs.clone(), delta, |x, _, _| u.map(m).block(x)).neg();
            let to_shift_b = BigradedMap::shift_identity(mb, s);
            let mid = dbs.neg();
            BigradedMap::block_matrix(
                &[ma, &mbs, mb],
                &[ma, &mbs, mb],
                delta,
                &[
                    vec![Some(da.as_ref()), None, None],
                    vec![Some(&to_shift_a), Some(&mid), Some(&to_shift_b)],
                    vec![None, None, Some(db.as_ref())],
                ],
            )
        };
        pages.push(RComplex::new_unchecked(d.source().clone(), m, d));
    }
    let transfers = (0..last)
        .map(|m| {
            if m < r {
                let tb = b.transfer(m);
                let tbs = tb.reindexed(s);
                BigradedMap::direct_sum(&[a.transfer(m).as_ref(), &tbs, tb.as_ref()])
            } else if m == r {
                let (ma, mb) = (a.module(m), b.module(m));
                let mbs = mb.shifted(s);
                let t = a.transfer(m);
                BigradedMap::block_matrix(&[ma, &mbs, mb], &[a.module(m + 1)], Bidegree::ZERO, &[vec![Some(t.as_ref()), None, None]])
            } else {
                a.transfer(m).into_owned()
            }
        })
        .collect();
    let object = Arc::new(SpectralSequence::from_transfers(pages, transfers).expect("mapping path object"));
    let (ma, mb) = (a.module(0), b.module(0));
    let mbs = mb.shifted(s);
    let id_a = BigradedMap::identity(ma);
    let id_b = BigradedMap::identity(mb);
    let i0 = BigradedMap::block_matrix(&[ma], &[ma, &mbs, mb], Bidegree::ZERO, &[vec![Some(&id_a)], vec![None], vec![Some(u.map(0))]]);
    let p0 = BigradedMap::block_matrix(&[ma, &mbs, mb], &[mb], Bidegree::ZERO, &[vec![None, None, Some(&id_b)]]);
    let rho0 = BigradedMap::block_matrix(&[ma, &mbs, mb], &[ma], Bidegree::ZERO, &[vec![Some(&id_a), None, None]]);
    MappingPath {
        r,
        i: SpectralMorphism::derive(i0, a.clone(), object.clone()).expect("i is a morphism"),
        p: SpectralMorphism::derive(p0, object.clone(), b.clone()).expect("p is a morphism"),
        rho: SpectralMorphism::derive(rho0, object.clone(), a.clone()).expect("ρ is a morphism"),
        object,
    }
}

/// The path object `P(r;A)` with `ι: A -> P`, `∂^-, ∂^+: P -> A`.
#[derive(Clone, Debug)]
pub struct PathObject<F> {
    pub r: usize,
    pub object: Ss<F>,
    pub iota: SpectralMorphism<F>,
    pub d_minus: SpectralMorphism<F>,
    pub d_plus: SpectralMorphism<F>,
}

pub fn path<F: Field>(r: usize, a: &Ss<F>) -> PathObject<F> {
    let mp = mapping_path(r, &SpectralMorphism::identity(a.clone()));
    PathObject {
        r,
        object: mp.object,
        iota: mp.i,
        d_minus: mp.rho,
        d_plus: mp.p,
    }
}

/// `P(r;f) : P(r;A) -> P(r;B)`, acting by `f` on all three summands.
pub fn path_map<F: Field>(r: usize, f: &SpectralMorphism<F>, pa: &PathObject<F>, pb: &PathObject<F>) -> Result<SpectralMorphism<F>> {
    path_map_with_signs(r, f, pa, pb, false)
}

/// Variant whose middle block on page `m` is `(-1)^m f_m`. For `r > 0` it
/// disagrees with the map induced from page 0, and on page `r` with `r` odd
/// it is not even a chain map; it exists so that this can be checked.
pub fn path_map_with_signs<F: Field>(
    r: usize,
    f: &SpectralMorphism<F>,
    pa: &PathObject<F>,
    pb: &PathObject<F>,
    alternate: bool,
) -> Result<SpectralMorphism<F>> {
    let s = Bidegree::homotopy(r);
    let last = pa.object.stable_index().max(pb.object.stable_index());
    let maps = (0..=last)
        .map(|m| {
            if m > r {
                return f.map(m).clone();
            }
            let mid = f.map(m).reindexed(s).scale(&sign::<F>(alternate && m % 2 == 1));
            BigradedMap::direct_sum(&[f.map(m), &mid, f.map(m)])
        })
        .collect();
    SpectralMorphism::from_pages(maps, pa.object.clone(), pb.object.clone())
}

/// An r-homotopy `f ≃_r g : A -> B`: maps `ĥ_m : A_m -> B_m` of bidegree
/// `(r, r-1)` for `m ≤ r` with `ĥ_{m+1}` determined by `ĥ_m`, such that
/// `(-1)^{m+r+1} d ĥ_m = ĥ_m d` for `m < r` and `-(d ĥ_r + ĥ_r d) = f_r - g_r`.
#[derive(Clone, Debug)]
pub struct RHomotopy<F> {
    pub r: usize,
    pub f: SpectralMorphism<F>,
    pub g: SpectralMorphism<F>,
    maps: Vec<BigradedMap<F>>,
}

impl<F: Field> RHomotopy<F> {
    /// Checks the homotopy equations for the page maps determined by `h0`.
    pub fn new(r: usize, f: SpectralMorphism<F>, g: SpectralMorphism<F>, h0: BigradedMap<F>) -> Result<Self> {
        if !same_object(f.source(), g.source()) || !same_object(f.target(), g.target()) {
            return Err(SseqError::Invariant("homotopy between morphisms with different ends".into()));
        }
        let (a, b) = (f.source().clone(), f.target().clone());
        if h0.source() != a.module(0) || h0.target() != b.module(0) || h0.shift() != Bidegree::homotopy(r) {
            return Err(SseqError::Invariant("homotopy has the wrong shape".into()));
        }
        let maps = derive_shifted(&h0, &a, &b, r);
        if homotopy_residual(r, &f, &g, &maps).iter().any(|x| !x.is_zero()) {
            return Err(SseqError::Invariant("homotopy equations fail".into()));
        }
        Ok(RHomotopy { r, f, g, maps })
    }

    pub fn map(&self, m: usize) -> &BigradedMap<F> {
        &self.maps[m]
    }

    pub fn maps(&self) -> &[BigradedMap<F>] {
        &self.maps
    }

    /// `f ≃ f` by zero.
    pub fn reflexive(r: usize, f: &SpectralMorphism<F>) -> Self {
        let h0 = BigradedMap::zero(f.source().module(0).clone(), f.target().module(0).clone(), Bidegree::homotopy(r));
        RHomotopy::new(r, f.clone(), f.clone(), h0).expect("zero homotopy")
    }

    /// `g ≃ f` by `-ĥ`.
    pub fn symmetric(&self) -> Self {
        RHomotopy::new(self.r, self.g.clone(), self.f.clone(), self.maps[0].neg()).expect("negated homotopy")
    }

    /// `f ≃ k` from `f ≃ g` and `g ≃ k`.
    pub fn transitive(&self, other: &RHomotopy<F>) -> Result<Self> {
        if self.g != other.f || self.r != other.r {
            return Err(SseqError::Invariant("homotopies do not chain".into()));
        }
        RHomotopy::new(self.r, self.f.clone(), other.g.clone(), self.maps[0].add(&other.maps[0]))
    }

    /// `k f ≃ k g` for `k: B -> C`.
    pub fn post_compose(&self, k: &SpectralMorphism<F>) -> Result<Self> {
        let h0 = k.map(0).compose(&self.maps[0]);
        RHomotopy::new(self.r, k.compose(&self.f), k.compose(&self.g), h0)
    }

    /// `f k ≃ g k` for `k: Z -> A`.
    pub fn pre_compose(&self, k: &SpectralMorphism<F>) -> Result<Self> {
        let h0 = self.maps[0].compose(k.map(0));
        RHomotopy::new(self.r, self.f.compose(k), self.g.compose(k), h0)
    }

    /// The morphism `A -> P(r;B)` with components `(f, ĥ, g)`.
    pub fn to_path_morphism(&self, pb: &PathObject<F>) -> Result<SpectralMorphism<F>> {
        let (a, b) = (self.f.source(), self.f.target());
        let s = Bidegree::homotopy(self.r);
        let (ma, mb) = (a.module(0), b.module(0));
        let mbs = mb.shifted(s);
        let mid = BigradedMap::from_fn(ma.clone(), mbs.clone(), Bidegree::ZERO, |x, _, _| self.maps[0].block(x));
        let h0 = BigradedMap::block_matrix(&[ma], &[mb, &mbs, mb], Bidegree::ZERO, &[vec![Some(self.f.map(0))], vec![Some(&mid)], vec![Some(self.g.map(0))]]);
        SpectralMorphism::derive(h0, a.clone(), pb.object.clone())
    }

    /// Reads `(f, ĥ, g)` off a morphism `A -> P(r;B)`.
    pub fn from_path_morphism(k: &SpectralMorphism<F>, pb: &PathObject<F>) -> Result<Self> {
        let f = pb.d_minus.compose(k);
        let g = pb.d_plus.compose(k);
        let (a, b) = (k.source(), pb.d_minus.target());
        let s = Bidegree::homotopy(pb.r);
        let k0 = k.map(0);
        let h0 = BigradedMap::from_fn(a.module(0).clone(), b.module(0).clone(), s, |x, _, t| {
            let off = b.module(0).dim(x);
            k0.block(x).submatrix(off..off + t, 0..a.module(0).dim(x))
        });
        RHomotopy::new(pb.r, f, g, h0)
    }
}

/// Re-checks the defining equations of a witness.
pub fn is_r_homotopy<F: Field>(h: &RHomotopy<F>) -> bool {
    homotopy_residual(h.r, &h.f, &h.g, &h.maps).iter().all(|x| x.is_zero())
}

fn homotopy_residual<F: Field>(r: usize, f: &SpectralMorphism<F>, g: &SpectralMorphism<F>, h: &[BigradedMap<F>]) -> Vec<F> {
    let (a, b) = (f.source(), f.target());
    let mut out = Vec::new();
    for (m, hm) in h.iter().enumerate() {
        let dh = b.differential(m).compose(hm);
        let hd = hm.compose(&a.differential(m));
        let lhs = if m < r {
            dh.scale(&sign::<F>((m + r + 1) % 2 == 1)).sub(&hd)
        } else {
            dh.add(&hd).neg().sub(&f.map(m).sub(g.map(m)))
        };
        out.extend(lhs.coords());
    }
    out
}

/// Searches for an r-homotopy `f ≃_r g`.
pub fn find_r_homotopy<F: Field>(r: usize, f: &SpectralMorphism<F>, g: &SpectralMorphism<F>) -> Option<RHomotopy<F>> {
    let (a, b) = (f.source(), f.target());
    let s = Bidegree::homotopy(r);
    let n = BigradedMap::<F>::num_coords(a.module(0), b.module(0), s);
    let sol = solve_affine(n, |x| {
        let h0 = BigradedMap::from_coords(a.module(0).clone(), b.module(0).clone(), s, x);
        homotopy_residual(r, f, g, &derive_shifted(&h0, a, b, r))
    });
    let x = sol.particular?;
    let h0 = BigradedMap::from_coords(a.module(0).clone(), b.module(0).clone(), s, &x);
    RHomotopy::new(r, f.clone(), g.clone(), h0).ok()
}

/// The homotopy `ĥ(x, y, z) = (0, 0, -y)` from `1` to `ι ∘ ∂^-` on `P(r;A)`.
pub fn path_contraction<F: Field>(pa: &PathObject<F>) -> Result<RHomotopy<F>> {
    let r = pa.r;
    let a = pa.d_minus.target();
    let s = Bidegree::homotopy(r);
    let ma = a.module(0);
    let mas = ma.shifted(s);
    let down = BigradedMap::shift_identity(&mas, -s).neg();
    let h0 = BigradedMap::block_matrix(&[ma, &mas, ma], &[ma, &mas, ma], s, &[vec![None, None, None], vec![None, None, None], vec![None, Some(&down), None]]);
    let one = SpectralMorphism::identity(pa.object.clone());
    let back = pa.iota.compose(&pa.d_minus);
    RHomotopy::new(r, one, back, h0)
}

/// An r-homotopy equivalence `f: A -> B` with inverse `g`.
#[derive(Clone, Debug)]
pub struct HomotopyEquivalence<F> {
    pub f: SpectralMorphism<F>,
    pub g: SpectralMorphism<F>,
    pub gf: RHomotopy<F>,
    pub fg: RHomotopy<F>,
}

/// Searches for a homotopy inverse of `f` together with both homotopies.
pub fn find_homotopy_inverse<F: Field>(r: usize, f: &SpectralMorphism<F>) -> Option<HomotopyEquivalence<F>> {
    let (a, b) = (f.source().clone(), f.target().clone());
    let s = Bidegree::homotopy(r);
    let ng = BigradedMap::<F>::num_coords(b.module(0), a.module(0), Bidegree::ZERO);
    let n1 = BigradedMap::<F>::num_coords(a.module(0), a.module(0), s);
    let n2 = BigradedMap::<F>::num_coords(b.module(0), b.module(0), s);
    let last = a.stable_index().max(b.stable_index());
    let split = |x: &[F]| {
        let g0 = BigradedMap::from_coords(b.module(0).clone(), a.module(0).clone(), Bidegree::ZERO, &x[..ng]);
        let h1 = BigradedMap::from_coords(a.module(0).clone(), a.module(0).clone(), s, &x[ng..ng + n1]);
        let h2 = BigradedMap::from_coords(b.module(0).clone(), b.module(0).clone(), s, &x[ng + n1..]);
        (g0, h1, h2)
    };
    let sol = solve_affine(ng + n1 + n2, |x| {
        let (g0, h1, h2) = split(x);
        let gm = derive_pages(&g0, &b, &a, last);
        let mut res = Vec::new();
        for (m, g) in gm.iter().enumerate() {
            res.extend(a.differential(m).compose(g).sub(&g.compose(&b.differential(m))).coords());
        }
        // unchecked morphism wrappers; the residual only reads page maps
        let g = unchecked(b.clone(), a.clone(), gm);
        let ida = SpectralMorphism::identity(a.clone());
        let idb = SpectralMorphism::identity(b.clone());
        res.extend(homotopy_residual(r, &g.compose(f), &ida, &derive_shifted(&h1, &a, &a, r)));
        res.extend(homotopy_residual(r, &f.compose(&g), &idb, &derive_shifted(&h2, &b, &b, r)));
        res
    });
    let x = sol.particular?;
    let (g0, h1, h2) = split(&x);
    let g = SpectralMorphism::derive(g0, b.clone(), a.clone()).ok()?;
    let gf = RHomotopy::new(r, g.compose(f), SpectralMorphism::identity(a), h1).ok()?;
    let fg = RHomotopy::new(r, f.compose(&g), SpectralMorphism::identity(b), h2).ok()?;
    Some(HomotopyEquivalence { f: f.clone(), g, gf, fg })
}

fn unchecked<F: Field>(source: Ss<F>, target: Ss<F>, maps: Vec<BigradedMap<F>>) -> SpectralMorphism<F> {
    SpectralMorphism::from_parts_unchecked(source, target, maps)
}

/// Modules of the three summands of a path object page, for callers that
/// address components directly.
pub fn path_summands(a: &BigradedModule, r: usize) -> [BigradedModule; 3] {
    [a.clone(), a.shifted(Bidegree::homotopy(r)), a.clone()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rational, F7};
    use crate::spectral::{fixtures, is_acyclic_r_fibration, is_er_quasi_iso, is_r_fibration};

    type F = F7;

    fn two_page() -> Ss<F> {
        // a d_1 between (1,0) and (0,0) plus a lone class at (2,1)
        let s = fixtures::s::<F>();
        let r = fixtures::unit::<F>(2, 1);
        crate::spectral::product2(&s, &r).object
    }

    #[test]
    fn lambda_pages() {
        for r in 0..5 {
            let l = lambda::<F>(r);
            assert!(l.validate().is_ok());
            assert_eq!(l.stable_index(), r + 1);
            assert_eq!(l.module(0).dim(Bidegree::differential(r)), 1);
            assert_eq!(l.module(r + 1).total_dim(), 1);
        }
        assert_eq!(lambda::<F>(0).module(0).dim(Bidegree::new(0, 1)), 1);
        assert_eq!(lambda::<F>(1).module(1).dim(Bidegree::new(-1, 0)), 1);
    }

    #[test]
    fn path_of_unit_puts_the_middle_copy_where_u_lives() {
        let p = path(0, &fixtures::unit::<F>(0, 0));
        assert_eq!(p.object.module(0), lambda::<F>(0).module(0));
        assert_eq!(p.object.module(1).total_dim(), 1);
    }

    #[test]
    fn path_object_validates_for_small_r() {
        for r in 0..4 {
            let a = two_page();
            let p = path(r, &a);
            assert!(p.object.validate().is_ok(), "r = {r}");
            assert!(p.iota.validate().is_ok());
            assert!(p.d_minus.compose(&p.iota) == SpectralMorphism::identity(a.clone()));
            assert!(p.d_plus.compose(&p.iota) == SpectralMorphism::identity(a.clone()));
            assert!(is_er_quasi_iso(&p.iota, r));
            assert!(is_acyclic_r_fibration(&p.d_minus, r));
        }
    }

    #[test]
    fn contraction_witness_is_accepted() {
        for r in 0..3 {
            let p = path(r, &two_page());
            assert!(path_contraction(&p).is_ok(), "r = {r}");
        }
    }

    #[test]
    fn alternating_path_map_fails_for_odd_r() {
        let a = two_page();
        let f = SpectralMorphism::identity(a.clone()).add(&SpectralMorphism::identity(a.clone()));
        for r in 0..4 {
            let pa = path(r, &a);
            assert!(path_map(r, &f, &pa, &pa).is_ok());
            let alt = path_map_with_signs(r, &f, &pa, &pa, true);
            assert_eq!(alt.is_ok(), r == 0, "r = {r}");
        }
    }

    #[test]
    fn homotopy_round_trips_through_path_object() {
        let a = two_page();
        let r = 1;
        let pa = path(r, &a);
        let h = path_contraction(&pa).unwrap();
        let ppa = path(r, &pa.object);
        let k = h.to_path_morphism(&ppa).unwrap();
        let back = RHomotopy::from_path_morphism(&k, &ppa).unwrap();
        assert_eq!(back.map(0), h.map(0));
    }

    #[test]
    fn mapping_path_factors() {
        let f = fixtures::f_into_s::<F>();
        for r in 0..3 {
            let mp = mapping_path(r, &f);
            assert!(mp.object.validate().is_ok());
            assert!(mp.p.compose(&mp.i) == f);
            assert!(mp.rho.compose(&mp.i) == SpectralMorphism::identity(f.source().clone()));
            assert!(is_r_fibration(&mp.p, r));
            assert!(is_acyclic_r_fibration(&mp.rho, r));
        }
    }

    #[test]
    fn homotopy_search_over_rationals() {
        let s = fixtures::s::<Rational>();
        let p = path(1, &s);
        let one = SpectralMorphism::identity(p.object.clone());
        let back = p.iota.compose(&p.d_minus);
        assert!(find_r_homotopy(1, &one, &back).is_some());
        let zero = SpectralMorphism::zero(s.clone(), s.clone());
        let id = SpectralMorphism::identity(s.clone());
        // S is E_2-acyclic, so 1 ≃_1 0 while 1 ≄_0 0
        assert!(find_r_homotopy(1, &id, &zero).is_some());
        assert!(find_r_homotopy(0, &id, &zero).is_none());
    }

    #[test]
    fn homotopy_inverse_of_iota() {
        let p = path(1, &two_page());
        let e = find_homotopy_inverse(1, &p.iota).expect("ι is a homotopy equivalence");
        assert!(e.gf.map(0).source() == p.iota.source().module(0));
    }
}
