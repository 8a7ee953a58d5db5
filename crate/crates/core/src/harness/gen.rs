//! Random objects built from elementary pieces and conjugated by automorphisms.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bigraded::{Bidegree, BigradedMap, BigradedModule};
use crate::field::Field;
use crate::filtered::{filtered_hom_basis, filtered_homotopy_basis, spectral_sequence, FilteredComplex, FilteredMorphism};
use crate::linalg::Matrix;
use crate::multicomplex::{mc_hom_basis, op_shift, MultiMorphism, Multicomplex};
use crate::spectral::{HomSpace, SpectralMorphism, Ss};

use super::GenSpec;

fn level_bound(spec: &GenSpec) -> i32 {
    (spec.window / 2).max(0)
}

fn pieces<R: Rng + ?Sized>(rng: &mut R, spec: &GenSpec) -> usize {
    if spec.max_dim == 0 {
        0
    } else {
        rng.gen_range(1..=spec.max_dim)
    }
}

/// Unit upper triangular in the order `(level, index)`, so it and its inverse
/// preserve the filtration.
fn filtered_automorphism<F: Field, R: Rng + ?Sized>(rng: &mut R, levels: &[i32]) -> Matrix<F> {
    let n = levels.len();
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            F::one()
        } else if (levels[i], i) < (levels[j], j) && rng.gen_bool(0.5) {
            F::sample(rng)
        } else {
            F::zero()
        }
    })
}

/// Direct sum of dots and arrows `x ↦ dx` with random degrees and
/// filtration jumps, conjugated by a filtration-preserving automorphism.
pub fn gen_filtered<F: Field, R: Rng + ?Sized>(rng: &mut R, spec: &GenSpec) -> FilteredComplex<F> {
    let lb = level_bound(spec);
    let nb = (spec.window - lb).clamp(0, 1);
    let mut levels: BTreeMap<i32, Vec<i32>> = BTreeMap::new();
    let mut arrows: Vec<((i32, usize), (i32, usize))> = Vec::new();
    for _ in 0..pieces(rng, spec) {
        let n = rng.gen_range(-nb..=nb);
        let l = rng.gen_range(-lb..=lb);
        let xi = levels.entry(n).or_default();
        xi.push(l);
        let x = (n, xi.len() - 1);
        if rng.gen_bool(0.7) {
            let jump = rng.gen_range(0..=(l + lb).min(2));
            let yi = levels.entry(n + 1).or_default();
            yi.push(l - jump);
            arrows.push((x, (n + 1, yi.len() - 1)));
        }
    }
    let mut diffs: BTreeMap<i32, Matrix<F>> = BTreeMap::new();
    let dim = |n: i32| levels.get(&n).map_or(0, Vec::len);
    for ((n, j), (_, i)) in arrows {
        let d = diffs.entry(n).or_insert_with(|| Matrix::zeros(dim(n + 1), dim(n)));
        d[(i, j)] = F::sample_nonzero(rng);
    }
    let phis: BTreeMap<i32, Matrix<F>> = levels.iter().map(|(&n, lv)| (n, filtered_automorphism(rng, lv))).collect();
    let diffs = diffs
        .into_iter()
        .map(|(n, d)| {
            let inv = phis[&n].inverse().expect("unit triangular");
            (n, phis[&(n + 1)].mul(&d).mul(&inv))
        })
        .collect();
    FilteredComplex::new(levels, diffs).expect("generated filtered complex")
}

pub fn gen_spectral<F: Field, R: Rng + ?Sized>(rng: &mut R, spec: &GenSpec) -> Ss<F> {
    spectral_sequence(&Arc::new(gen_filtered(rng, spec))).expect("spectral sequence of a generated complex")
}

fn combination<F: Field, R: Rng + ?Sized>(rng: &mut R, basis: &Matrix<F>) -> Vec<F> {
    let c: Vec<F> = (0..basis.cols()).map(|_| F::sample(rng)).collect();
    basis.mul_vec(&c)
}

/// A random morphism `A -> B`, `None` when only zero exists.
pub fn gen_morphism<F: Field, R: Rng + ?Sized>(rng: &mut R, a: &Ss<F>, b: &Ss<F>) -> Option<SpectralMorphism<F>> {
    let hom = HomSpace::new(a.clone(), b.clone());
    if hom.dim() == 0 {
        return None;
    }
    Some(hom.morphism(&combination(rng, &hom.basis)))
}

/// As [`gen_morphism`], falling back to zero.
pub fn gen_morphism_or_zero<F: Field, R: Rng + ?Sized>(rng: &mut R, a: &Ss<F>, b: &Ss<F>) -> SpectralMorphism<F> {
    gen_morphism(rng, a, b).unwrap_or_else(|| SpectralMorphism::zero(a.clone(), b.clone()))
}

pub fn gen_filtered_morphism<F: Field, R: Rng + ?Sized>(
    rng: &mut R,
    a: &Arc<FilteredComplex<F>>,
    b: &Arc<FilteredComplex<F>>,
) -> FilteredMorphism<F> {
    let basis = filtered_hom_basis(a, b);
    let mut out = FilteredMorphism::zero(a.clone(), b.clone());
    for f in basis {
        let c = F::sample(rng);
        let maps = a.degrees().map(|n| (n, out.map(n).add(&f.map(n).scale(&c)))).collect();
        out = FilteredMorphism::new(a.clone(), b.clone(), maps).expect("linear combination of filtered morphisms");
    }
    out
}

/// A random `h` with `h(F_p A^n) ⊆ F_{p+r} B^{n-1}` and `dh + hd` filtered.
pub fn gen_filtered_homotopy_data<F: Field, R: Rng + ?Sized>(
    rng: &mut R,
    r: usize,
    a: &FilteredComplex<F>,
    b: &FilteredComplex<F>,
) -> BTreeMap<i32, Matrix<F>> {
    let mut out: BTreeMap<i32, Matrix<F>> = a.degrees().map(|n| (n, Matrix::zeros(b.dim(n - 1), a.dim(n)))).collect();
    for h in filtered_homotopy_basis(r, a, b) {
        let c = F::sample(rng);
        for (n, m) in h {
            let acc = out.get_mut(&n).expect("degree of A");
            *acc = acc.add(&m.scale(&c));
        }
    }
    out
}

fn bigraded_automorphism<F: Field, R: Rng + ?Sized>(rng: &mut R, m: &BigradedModule) -> BigradedMap<F> {
    BigradedMap::from_fn(m.clone(), m.clone(), Bidegree::ZERO, |_, s, _| {
        let lower = Matrix::from_fn(s, s, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => F::one(),
            std::cmp::Ordering::Greater => F::sample(rng),
            std::cmp::Ordering::Less => F::zero(),
        });
        let upper = Matrix::from_fn(s, s, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => F::sample_nonzero(rng),
            std::cmp::Ordering::Less => F::sample(rng),
            std::cmp::Ordering::Greater => F::zero(),
        });
        lower.mul(&upper)
    })
}

enum Piece {
    Dot(Bidegree),
    Arrow(Bidegree, usize),
    Square(Bidegree, usize),
}

/// Dots, single-operator arrows and bicomplex squares, conjugated by a
/// bigraded automorphism and re-validated.
pub fn gen_multicomplex<F: Field, R: Rng + ?Sized>(rng: &mut R, spec: &GenSpec) -> Multicomplex<F> {
    let lb = level_bound(spec);
    let mut module = BigradedModule::zero();
    let mut entries: Vec<(usize, Bidegree, usize, Bidegree, usize, F)> = Vec::new();
    let add = |module: &mut BigradedModule, x: Bidegree| {
        let k = module.dim(x);
        module.add_dim(x, 1);
        k
    };
    let n = pieces(rng, spec);
    let mut shapes = Vec::with_capacity(n);
    for _ in 0..n {
        let x = Bidegree::new(rng.gen_range(0..=lb), rng.gen_range(-lb..lb.max(1)));
        shapes.push(match rng.gen_range(0..4) {
            0 => Piece::Dot(x),
            1 | 2 => Piece::Arrow(x, rng.gen_range(0..=2)),
            _ => Piece::Square(x, rng.gen_range(1..=2)),
        });
    }
    shapes.shuffle(rng);
    for piece in shapes {
        match piece {
            Piece::Dot(x) => {
                add(&mut module, x);
            }
            Piece::Arrow(x, i) => {
                let y = x + op_shift(i);
                let (kx, ky) = (add(&mut module, x), add(&mut module, y));
                entries.push((i, x, kx, y, ky, F::sample_nonzero(rng)));
            }
            Piece::Square(x, i) => {
                let b = x + op_shift(0);
                let c = x + op_shift(i);
                let e = c + op_shift(0);
                let (ka, kb, kc, ke) = (add(&mut module, x), add(&mut module, b), add(&mut module, c), add(&mut module, e));
                let beta = if i % 2 == 1 { F::one() } else { -F::one() };
                entries.push((0, x, ka, b, kb, F::one()));
                entries.push((i, x, ka, c, kc, F::one()));
                entries.push((0, c, kc, e, ke, F::one()));
                entries.push((i, b, kb, e, ke, beta));
            }
        }
    }
    let top = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
    let mut ops: Vec<BigradedMap<F>> = (0..top).map(|i| BigradedMap::zero(module.clone(), module.clone(), op_shift(i))).collect();
    for (i, x, kx, y, ky, c) in entries {
        let mut block = ops[i].block(x);
        if block.shape() != (module.dim(y), module.dim(x)) {
            block = Matrix::zeros(module.dim(y), module.dim(x));
        }
        block[(ky, kx)] = c;
        ops[i].set_block(x, block);
    }
    let raw = Multicomplex::new(module.clone(), ops).expect("elementary pieces satisfy the relation");
    let phi = bigraded_automorphism(rng, &module);
    let out = raw.conjugate(&phi).expect("invertible conjugation");
    out.validate().expect("conjugation preserves the relation");
    out
}

/// A random strict morphism `A -> B`.
pub fn gen_multi_morphism<F: Field, R: Rng + ?Sized>(rng: &mut R, a: &Arc<Multicomplex<F>>, b: &Arc<Multicomplex<F>>) -> MultiMorphism<F> {
    let basis = mc_hom_basis(a, b);
    let mut map = BigradedMap::zero(a.module().clone(), b.module().clone(), Bidegree::ZERO);
    for f in basis {
        map = map.add(&f.map().scale(&F::sample(rng)));
    }
    MultiMorphism::new(a.clone(), b.clone(), map).expect("linear combination of strict morphisms")
}
