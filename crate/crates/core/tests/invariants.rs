use num_bigint::BigInt;
use proptest::prelude::*;

use chow_descent::correspondences::{compose, idempotent_power, transpose};
use chow_descent::{Correspondence, CycleClass, Matrix, Modulus, ProductSpace, SplitAlgebra};
use std::sync::Arc;

fn big_mod(v: BigInt, m: u64) -> u64 {
    let r = ((v % m) + m) % m;
    u64::try_from(r).unwrap()
}

proptest! {
    #[test]
    fn ring_ops_agree_with_bigint(m in 2u64..=Modulus::MAX, a: u64, b: u64) {
        let md = Modulus::new(m).unwrap();
        let (a, b) = (a % m, b % m);
        prop_assert_eq!(md.mul(a, b), big_mod(BigInt::from(a) * BigInt::from(b), m));
        prop_assert_eq!(md.add(a, b), big_mod(BigInt::from(a) + BigInt::from(b), m));
        prop_assert_eq!(md.sub(a, b), big_mod(BigInt::from(a) - BigInt::from(b), m));
    }

    #[test]
    fn inverse_is_an_involution(m in 2u64..30, entries in prop::collection::vec(0i64..30, 9)) {
        let md = Modulus::new(m).unwrap();
        let a = Matrix::from_rows(md, &[&entries[0..3], &entries[3..6], &entries[6..9]]).unwrap();
        if let Ok(inv) = a.inverse() {
            prop_assert_eq!(inv.inverse().unwrap(), a.clone());
            prop_assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(md, 3));
        } else {
            prop_assert!(!md.is_unit(a.det().unwrap()));
        }
    }

    #[test]
    fn transpose_reverses_composition_on_p2(m in 2u64..10, u in prop::collection::vec(0u64..10, 9), v in prop::collection::vec(0u64..10, 9)) {
        let x = Arc::new(SplitAlgebra::projective_space(Modulus::new(m).unwrap(), 2));
        let space = ProductSpace::pair(&x, &x).unwrap();
        let mk = |c: &[u64]| Correspondence::new(CycleClass::from_coeffs(space.clone(), c.iter().map(|e| e % m).collect()).unwrap()).unwrap();
        let (u, v) = (mk(&u), mk(&v));
        let lhs = transpose(&compose(&u, &v).unwrap()).unwrap();
        let rhs = compose(&transpose(&v).unwrap(), &transpose(&u).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn idempotent_power_is_idempotent(m in 2u64..10, u in prop::collection::vec(0u64..10, 9)) {
        let x = Arc::new(SplitAlgebra::projective_space(Modulus::new(m).unwrap(), 2));
        let space = ProductSpace::pair(&x, &x).unwrap();
        let e = Correspondence::new(CycleClass::from_coeffs(space, u.iter().map(|c| c % m).collect()).unwrap()).unwrap();
        let ip = idempotent_power(&e).unwrap();
        prop_assert_eq!(compose(&ip.idempotent, &ip.idempotent).unwrap(), ip.idempotent);
    }
}
