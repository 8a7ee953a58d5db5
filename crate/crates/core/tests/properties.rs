use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sseq_core::field::{Field, Rational, F7};
use sseq_core::filtered::spectral_sequence;
use sseq_core::format::{self, Object};
use sseq_core::harness::{gen, GenSpec};
use sseq_core::linalg::Matrix;
use sseq_core::multicomplex::eprime;

fn matrix(rows: usize, cols: usize, entries: &[i64]) -> Matrix<F7> {
    Matrix::from_fn(rows, cols, |i, j| F7::from_i64(entries[(i * cols + j) % entries.len()]))
}

fn small_spec() -> GenSpec {
    GenSpec {
        max_dim: 4,
        ..GenSpec::default()
    }
}

proptest! {
    #[test]
    fn fp_inverses(v in 1i64..7) {
        let x = F7::from_i64(v);
        prop_assert!((x * x.inv().unwrap()).is_one());
    }

    #[test]
    fn rational_inverses(n in -50i64..50, d in 1i64..50) {
        prop_assume!(n != 0);
        let x = Rational::new(n, d);
        prop_assert_eq!(x.clone() * x.inv().unwrap(), Rational::one());
    }

    #[test]
    fn rank_nullity(rows in 0usize..6, cols in 0usize..6, entries in prop::collection::vec(-3i64..4, 1..40)) {
        let a = matrix(rows, cols, &entries);
        let k = a.kernel_basis();
        prop_assert_eq!(a.rank() + k.cols(), cols);
        prop_assert!(a.mul(&k).is_zero());
    }

    #[test]
    fn solve_finds_preimages(rows in 1usize..6, cols in 1usize..6, entries in prop::collection::vec(-3i64..4, 1..40), x in prop::collection::vec(-3i64..4, 6)) {
        let a = matrix(rows, cols, &entries);
        let x: Vec<F7> = x[..cols].iter().map(|&v| F7::from_i64(v)).collect();
        let b = a.mul_vec(&x);
        let y = a.solve(&b).unwrap().expect("b is in the image");
        prop_assert_eq!(a.mul_vec(&y), b);
    }

    #[test]
    fn inverse_is_two_sided(n in 1usize..5, entries in prop::collection::vec(-3i64..4, 1..30)) {
        let a = matrix(n, n, &entries);
        match a.inverse() {
            Some(inv) => {
                prop_assert!(a.mul(&inv).is_identity());
                prop_assert!(inv.mul(&a).is_identity());
            }
            None => prop_assert!(a.rank() < n),
        }
    }

    #[test]
    fn stable_page_matches_homology(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Arc::new(gen::gen_filtered::<F7, _>(&mut rng, &small_spec()));
        let e = spectral_sequence(&c).unwrap();
        prop_assert!(e.validate().is_ok());
        let last = e.module(e.stable_index());
        for n in c.degrees() {
            let d_in = c.diff(n - 1);
            let d_out = c.diff(n);
            let h = c.dim(n) - d_out.rank() - d_in.rank();
            let from_e: usize = last.entries().filter(|(x, _)| x.q - x.p == n).map(|(_, d)| d).sum();
            prop_assert_eq!(h, from_e, "degree {}", n);
        }
    }

    #[test]
    fn spectral_documents_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = gen::gen_spectral::<F7, _>(&mut rng, &small_spec());
        let text = format::print(&Object::Spectral(s.clone()));
        match format::parse::<F7>(&text).unwrap() {
            Object::Spectral(t) => prop_assert_eq!(t, s),
            _ => prop_assert!(false, "wrong kind"),
        }
    }

    #[test]
    fn filtered_documents_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Arc::new(gen::gen_filtered::<F7, _>(&mut rng, &small_spec()));
        let text = format::print(&Object::Filtered(c.clone()));
        let back = format::parse::<F7>(&text).unwrap();
        prop_assert_eq!(format::print(&back), text);
    }

    #[test]
    fn multicomplex_documents_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = gen::gen_multicomplex::<F7, _>(&mut rng, &small_spec());
        prop_assert!(eprime(&m).unwrap().validate().is_ok());
        let text = format::print(&Object::Multicomplex(Arc::new(m.clone())));
        match format::parse::<F7>(&text).unwrap() {
            Object::Multicomplex(t) => prop_assert_eq!(&*t, &m),
            _ => prop_assert!(false, "wrong kind"),
        }
    }
}
