//! Property tests for the algebraic invariants that hold for arbitrary
//! well-formed inputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use arakelov::numerics::cholesky;
use arakelov::theta::{reduce_point, PeriodMatrix, ThetaCharacteristic};

fn arb_pd_matrix(g: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-1.0f64..1.0, g * g).prop_map(move |entries| {
        let a = DMatrix::from_vec(g, g, entries);
        &a * a.transpose() + DMatrix::identity(g, g) * 0.05
    })
}

fn arb_period_matrix(g: usize) -> impl Strategy<Value = PeriodMatrix> {
    (
        arb_pd_matrix(g),
        proptest::collection::vec(-0.5f64..0.5, g * g),
    )
        .prop_map(move |(y, re)| {
            let re_m = DMatrix::from_vec(g, g, re);
            let re_sym = (&re_m + re_m.transpose()) / 2.0;
            let omega = DMatrix::from_fn(g, g, |i, j| Complex64::new(re_sym[(i, j)], y[(i, j)]));
            PeriodMatrix::new(omega).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cholesky_reconstructs(y in arb_pd_matrix(4)) {
        let f = cholesky(&y).unwrap();
        let resid = (&f.lower * f.lower.transpose() - &y).amax();
        prop_assert!(resid < 1e-10 * y.amax());
        for j in 0..4 {
            prop_assert!(f.lower[(j, j)] > 0.0);
        }
    }

    #[test]
    fn reduce_point_is_a_lattice_inverse(
        pm in arb_period_matrix(3),
        coords in proptest::collection::vec(-4.0f64..4.0, 6),
    ) {
        let z = DVector::from_fn(3, |j, _| Complex64::new(coords[j], coords[3 + j]));
        let red = reduce_point(&pm, &z);
        for j in 0..3 {
            prop_assert!((0.0..1.0).contains(&red.x[j]));
            prop_assert!((0.0..1.0).contains(&red.y[j]));
        }
        let back = red.reconstruct(&pm);
        let diff = &z - &back;
        // the difference must be m + Omega n with integer m, n
        let im = DVector::from_fn(3, |j, _| diff[j].im);
        let n = pm.y_factor().solve(&im);
        for j in 0..3 {
            prop_assert!((n[j] - n[j].round()).abs() < 1e-8);
        }
        let n_round = n.map(|v| v.round());
        let omega_n = pm.omega() * DVector::from_fn(3, |j, _| Complex64::from(n_round[j]));
        let rem = &diff - &omega_n;
        for j in 0..3 {
            prop_assert!((rem[j].re - rem[j].re.round()).abs() < 1e-8);
            prop_assert!(rem[j].im.abs() < 1e-8);
        }
    }

    #[test]
    fn characteristic_sum_is_symmetric_difference(
        tops in proptest::collection::vec(0u32..8, 3),
        bottoms in proptest::collection::vec(0u32..8, 3),
    ) {
        let chars: Vec<ThetaCharacteristic> = tops
            .iter()
            .zip(&bottoms)
            .map(|(&t, &b)| ThetaCharacteristic::new(3, t, b))
            .collect();
        // associativity + self-inverse: (a+b)+b = a
        let a = chars[0];
        let b = chars[1];
        let c = chars[2];
        prop_assert_eq!((a + b) + b, a);
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!(a + b, b + a);
    }
}
