use cifc_core::gaussian::{closed_form_params, dpc_rates, outer_sum, GaussianSymChannel};
use cifc_core::gf2::{shift_matrix, BitMatrix};
use cifc_core::ldc::{f_function, ldc3_sum_outer, ldc_k_sym_sum_capacity, LdcGains};
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
    prop::collection::vec(prop::collection::vec(0u8..2, cols), rows).prop_map(|r| BitMatrix::from_rows(&r))
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..80, 1usize..80, 1usize..80)
}

proptest! {
    #[test]
    fn transpose_reverses_products(
        (a, b) in dims().prop_flat_map(|(r, k, c)| (matrix(r, k), matrix(k, c)))
    ) {
        let ab = a.matmul(&b).unwrap();
        prop_assert_eq!(ab.transpose(), b.transpose().matmul(&a.transpose()).unwrap());
    }

    #[test]
    fn kernel_is_annihilated_and_complements_rank(a in (1usize..70, 1usize..70).prop_flat_map(|(r, c)| matrix(r, c))) {
        let k = a.kernel();
        prop_assert_eq!(a.rank() + k.cols(), a.cols());
        prop_assert!(a.matmul(&k).unwrap().is_zero());
        prop_assert_eq!(k.rank(), k.cols());
    }

    #[test]
    fn solve_recovers_a_consistent_system(
        (a, x) in dims().prop_flat_map(|(r, k, c)| (matrix(r, k), matrix(k, c)))
    ) {
        let b = a.matmul(&x).unwrap();
        let y = a.solve(&b).unwrap().expect("consistent by construction");
        prop_assert_eq!(a.matmul(&y).unwrap(), b);
    }

    #[test]
    fn unipotent_matrices_invert(n in 1usize..90, k in 1usize..90, seed in any::<u64>()) {
        // identity plus a strictly lower-triangular random part
        let mut a = BitMatrix::identity(n);
        let mut s = seed | 1;
        for r in 0..n {
            for c in 0..r {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                a.set(r, c, s & 1 == 1);
            }
        }
        let a = a.add(&shift_matrix(n, k.min(n))).unwrap();
        let inv = a.invert().unwrap();
        prop_assert_eq!(inv.matmul(&a).unwrap(), BitMatrix::identity(n));
    }

    #[test]
    fn f_is_a_conditional_entropy(c in 0u32..12, d in 0u32..12, a in 0u32..12, b in 0u32..12) {
        let f = f_function(c, d, a, b);
        prop_assert!(f <= c.max(d));
        // symmetric under swapping the two inputs
        prop_assert_eq!(f, f_function(d, c, b, a));
    }

    #[test]
    fn three_user_bound_matches_symmetric_capacity(nd in 0u32..10, ni in 0u32..10) {
        let g = LdcGains::symmetric(nd, ni, 3);
        prop_assert_eq!(ldc3_sum_outer(&g).unwrap().value, ldc_k_sym_sum_capacity(nd, ni, 3).unwrap().value);
    }

    #[test]
    fn closed_form_stays_below_outer(
        hd in 0.0f64..1e3,
        re in -1e3f64..1e3,
        im in -1e3f64..1e3,
        k in 3usize..7,
    ) {
        let ch = GaussianSymChannel::new(hd, Complex64::new(re, im), k).unwrap();
        let p = closed_form_params(&ch).unwrap();
        p.check_power(k).unwrap();
        let inner = dpc_rates(&ch, &p).unwrap().sum();
        prop_assert!(inner <= outer_sum(&ch) + 1e-9, "inner {} outer {}", inner, outer_sum(&ch));
    }
}
