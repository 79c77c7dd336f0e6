//! Property tests for the exact field arithmetic: comparison against
//! high-precision numeric evaluation, and the ring laws under exact
//! equality.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;
use rifs_core::field::{FieldScalar, NumberField};
use rifs_core::precision::{to_f64, Ctx};
use rifs_core::rng::stream;

fn golden() -> Arc<NumberField> {
    NumberField::new(
        vec![BigInt::from(-1), BigInt::from(-1), BigInt::from(1)],
        BigRational::new(3.into(), 2.into()),
        BigRational::from_integer(2.into()),
    )
    .unwrap()
}

fn random_scalar(field: &Arc<NumberField>, rng: &mut impl Rng) -> FieldScalar {
    let coeffs = (0..field.degree())
        .map(|_| {
            let num = rng.random_range(-50i64..=50);
            let den = rng.random_range(1i64..=20);
            BigRational::new(num.into(), den.into())
        })
        .collect();
    field.scalar(coeffs)
}

#[test]
fn compare_agrees_with_high_precision_evaluation() {
    let field = golden();
    let ctx = Ctx::from_digits(100);
    let mut rng = stream(2718, "field-props", 0);
    for trial in 0..10_000 {
        let a = random_scalar(&field, &mut rng);
        let b = random_scalar(&field, &mut rng);
        let exact = a.compare(&b);
        let fa = to_f64(&a.to_big(&ctx));
        let fb = to_f64(&b.to_big(&ctx));
        let numeric = if a == b {
            Ordering::Equal
        } else {
            fa.partial_cmp(&fb).unwrap()
        };
        assert_eq!(exact, numeric, "trial {trial}: {a} vs {b} ({fa} vs {fb})");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn addition_and_multiplication_laws(
        seeds in prop::array::uniform3(0u64..1_000_000)
    ) {
        let field = golden();
        let mut rng = stream(seeds[0], "field-laws", seeds[1] ^ seeds[2]);
        let a = random_scalar(&field, &mut rng);
        let b = random_scalar(&field, &mut rng);
        let c = random_scalar(&field, &mut rng);
        // commutativity
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        // associativity
        prop_assert_eq!(
            a.add(&b).unwrap().add(&c).unwrap(),
            a.add(&b.add(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            a.mul(&b).unwrap().mul(&c).unwrap(),
            a.mul(&b.mul(&c).unwrap()).unwrap()
        );
        // distributivity
        prop_assert_eq!(
            a.mul(&b.add(&c).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
        );
    }

    #[test]
    fn canonical_form_decides_equality(
        seeds in prop::array::uniform2(0u64..1_000_000)
    ) {
        let field = golden();
        let mut rng = stream(seeds[0], "field-canon", seeds[1]);
        let a = random_scalar(&field, &mut rng);
        let b = random_scalar(&field, &mut rng);
        let equal_compare = a.compare(&b) == Ordering::Equal;
        let equal_coeffs = a.coeffs() == b.coeffs();
        prop_assert_eq!(equal_compare, equal_coeffs);
        // and the difference reduces to the zero vector exactly then
        if equal_compare {
            prop_assert!(a.sub(&b).unwrap().is_zero());
        }
    }

    #[test]
    fn division_inverts_multiplication(
        seeds in prop::array::uniform2(0u64..1_000_000)
    ) {
        let field = golden();
        let mut rng = stream(seeds[0], "field-div", seeds[1]);
        let a = random_scalar(&field, &mut rng);
        let b = random_scalar(&field, &mut rng);
        if !b.is_zero() {
            let q = a.div(&b).unwrap();
            prop_assert_eq!(q.mul(&b).unwrap(), a);
        }
    }
}
