//! One line per acceptance criterion; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use sseq_core::bigraded::{Bidegree, BigradedMap, BigradedModule};
use sseq_core::error::{SseqError, ViolationKind};
use sseq_core::field::{Field, F7};
use sseq_core::filtered::{lambda_fc, spectral_sequence, FilteredComplex};
use sseq_core::harness::{self, gen, Check, GenSpec, Mutation};
use sseq_core::linalg::Matrix;
use sseq_core::multicomplex::{eprime, lambda_mc, tot, validate_multicomplex};
use sseq_core::paths::{lambda, path, path_contraction, RHomotopy};
use sseq_core::representables::{disk, sphere};
use sseq_core::spectral::{
    check_characteristic_dimensions, fixtures, isomorphic, pagewise_cokernel, pullback_surjection, SpectralMorphism, SpectralSequence,
};

type F = F7;

fn spec(trials: usize) -> GenSpec {
    GenSpec {
        trials,
        ..GenSpec::default()
    }
}

fn harness_clean(checks: &[Check], trials: usize) -> Result<String, String> {
    let mut total = 0;
    for &check in checks {
        for r in 0..=2 {
            let rep = harness::run::<F>(check, &spec(trials), r, Mutation::None);
            total += trials;
            if !rep.passed() {
                return Err(rep.render(false).lines().last().unwrap_or_default().to_string());
            }
        }
    }
    Ok(format!("{total} trials, 0 counterexamples"))
}

fn validators() -> Result<String, String> {
    let mut count = 0;
    let mut check = |name: String, s: &SpectralSequence<F>| {
        count += 1;
        s.validate().map_err(|v| format!("{name}: {v}"))
    };
    for r in 0..=4 {
        check(format!("lambda({r})"), &lambda::<F>(r))?;
    }
    for r in 0..=3 {
        for p in -4..=4 {
            for n in -4..=4 {
                check(format!("disk({r},{p},{n})"), &disk::<F>(r, p, n))?;
                match (r, sphere::<F>(r, p, n)) {
                    (0, Err(SseqError::UnsupportedGenerator(_))) => {}
                    (0, _) => return Err("sphere(0, p, n) should be rejected".into()),
                    (_, s) => {
                        let s = s.map_err(|e| e.to_string())?;
                        check(format!("sphere({r},{p},{n})"), &s)?;
                    }
                }
            }
        }
    }
    check("S".into(), &fixtures::s::<F>())?;
    check("T".into(), &fixtures::t::<F>())?;
    let pages = pagewise_cokernel(&fixtures::f_into_s::<F>());
    match check_characteristic_dimensions(&pages) {
        Err(v) if v.kind == ViolationKind::CharacteristicDimension { homology: 1, next_page: 0 } && v.page == Some(1) => {}
        other => return Err(format!("cokernel of f: R(0,0) -> S: expected dim H(C_1) = 1 vs dim C_2 = 0, got {other:?}")),
    }
    Ok(format!("{count} objects validate, cokernel rejected"))
}

fn lifting() -> Result<String, String> {
    harness_clean(&[Check::Lifting], 100)
}

/// `x` in degree 0 at filtration 1, `y = dx` in degree 1 at filtration 0.
fn two_generator() -> Arc<FilteredComplex<F>> {
    let levels = BTreeMap::from([(0, vec![1]), (1, vec![0])]);
    let diffs = BTreeMap::from([(0, Matrix::from_i64_rows(&[&[1]]))]);
    Arc::new(FilteredComplex::new(levels, diffs).expect("two-generator complex"))
}

fn filtered_pages() -> Result<String, String> {
    let e = spectral_sequence(&two_generator()).map_err(|e| e.to_string())?;
    let iso = isomorphic(&e, &disk::<F>(1, 1, 1)).ok_or("E(two-generator complex) is not isomorphic to disk(1,1,1)")?;
    if !iso.is_isomorphism() {
        return Err("solver returned a non-invertible map".into());
    }
    for r in 0..=3 {
        let e = spectral_sequence(&lambda_fc::<F>(r)).map_err(|e| e.to_string())?;
        isomorphic(&e, &lambda::<F>(r)).ok_or(format!("E(lambda_fc({r})) is not isomorphic to lambda({r})"))?;
    }
    Ok("5 isomorphisms found".into())
}

fn functor_e() -> Result<String, String> {
    harness_clean(&[Check::FunctorE], 50)
}

fn multicomplexes() -> Result<String, String> {
    for t in 0..50 {
        let mut rng = harness::trial_rng(42, t);
        let m = gen::gen_multicomplex::<F, _>(&mut rng, &GenSpec::default());
        validate_multicomplex(&m).map_err(|v| format!("multicomplex {t}: {v}"))?;
        let fc = tot(&m).map_err(|e| format!("multicomplex {t}: {e}"))?;
        for n in fc.degrees() {
            let (d0, d1) = (fc.diff(n), fc.diff(n + 1));
            if d1.cols() == d0.rows() && !d1.mul(&d0).is_zero() {
                return Err(format!("multicomplex {t}: D² ≠ 0 in degree {n}"));
            }
        }
    }
    for r in 0..=3 {
        let e = eprime(&lambda_mc::<F>(r)).map_err(|e| e.to_string())?;
        isomorphic(&e, &lambda::<F>(r)).ok_or(format!("E'(Λ_{r}) is not isomorphic to lambda({r})"))?;
    }
    let mut out = harness_clean(&[Check::FunctorEprime], 50)?;
    out += "; ";
    out += &harness_clean(&[Check::MultiPath], 25)?;
    Ok(out)
}

/// `(x, y, z) ↦ (0, 0, -y)` on page 0 of `P(r;A) = A ⊕ A[s] ⊕ A`, written
/// out blockwise.
fn contraction_h0(a: &BigradedModule, p: &BigradedModule, r: usize) -> BigradedMap<F> {
    let s = Bidegree::homotopy(r);
    BigradedMap::from_fn(p.clone(), p.clone(), s, |x, cols, rows| {
        let (ax, axs, axss) = (a.dim(x), a.dim(x + s), a.dim(x + s + s));
        assert_eq!((cols, rows), (ax + axs + ax, axs + axss + axs));
        Matrix::from_fn(rows, cols, |i, j| {
            let in_y = j >= ax && j < ax + axs;
            let in_z = i >= axs + axss;
            if in_y && in_z && i - axs - axss == j - ax {
                -<F as Field>::one()
            } else {
                <F as Field>::zero()
            }
        })
    })
}

fn homotopy() -> Result<String, String> {
    let mut out = harness_clean(&[Check::Homotopy], 50)?;
    for t in 0..10 {
        let a = gen::gen_spectral::<F, _>(&mut harness::trial_rng(42, t), &GenSpec::default());
        for r in 0..=2 {
            let pa = path(r, &a);
            let h0 = contraction_h0(a.module(0), pa.object.module(0), r);
            let one = SpectralMorphism::identity(pa.object.clone());
            let back = pa.iota.compose(&pa.d_minus);
            let w = RHomotopy::new(r, one, back, h0).map_err(|e| format!("A #{t}, r={r}: {e}"))?;
            let lib = path_contraction(&pa).map_err(|e| e.to_string())?;
            if w.maps() != lib.maps() {
                return Err(format!("A #{t}, r={r}: library contraction differs"));
            }
        }
    }
    out += "; contraction certified on 30 path objects";
    Ok(out)
}

fn surjection_guard() -> Result<String, String> {
    let r = fixtures::unit::<F>(0, 0);
    let zero = SpectralMorphism::zero(Arc::new(SpectralSequence::zero()), r);
    match pullback_surjection(&zero, &fixtures::pi_t::<F>()) {
        Err(SseqError::NotASurjection { page, bidegree }) => Ok(format!("NotASurjection at page {page}, {bidegree}")),
        Err(e) => Err(format!("wrong error: {e}")),
        Ok(_) => Err("pullback along a non-surjection was accepted".into()),
    }
}

type Criterion = (&'static str, fn() -> Result<String, String>, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("validator suite", validators, Duration::from_secs(1)),
        ("model axioms harness", || harness_clean(&[Check::TwoOutOfThree, Check::AxiomC, Check::AxiomD, Check::PartialBrown], 100), Duration::from_secs(60)),
        ("lifting characterisation", lifting, Duration::MAX),
        ("filtered pages", filtered_pages, Duration::MAX),
        ("functor E", functor_e, Duration::MAX),
        ("multicomplexes", multicomplexes, Duration::MAX),
        ("homotopy relation", homotopy, Duration::MAX),
        ("surjection guard", surjection_guard, Duration::MAX),
    ];
    let mut ok = true;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let result = result.and_then(|m| if took <= limit { Ok(m) } else { Err(format!("{m}, but took {took:?} (limit {limit:?})")) });
        match result {
            Ok(msg) => println!("criterion {} {name}: PASS ({msg}; {} ms)", i + 1, took.as_millis()),
            Err(msg) => {
                ok = false;
                println!("criterion {} {name}: FAIL ({msg})", i + 1);
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
