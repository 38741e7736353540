//! Property tests for the structural invariants: round trips, sampler
//! soundness, frame covariance and serialization.

use proptest::prelude::*;

use bisectional::basis::{matrix_traceless, spectrum, standard_basis, FormBasis};
use bisectional::curvature::{recompose, KahlerCurvature, SampleStyle};
use bisectional::io::{tensor_from_json, tensor_to_json};
use bisectional::lie::bracket;
use bisectional::linalg;

fn random_tensor(n: usize, seed: u64) -> KahlerCurvature {
    let b = standard_basis(n).unwrap();
    KahlerCurvature::random(n, seed, SampleStyle::Unconstrained, &b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampler_emits_valid_tensors(n in 2usize..=4, seed in 0u64..1_000_000) {
        let t = random_tensor(n, seed);
        let (report, ok) = t.validate(1e-12);
        prop_assert!(ok, "residuals {report:?}");
    }

    #[test]
    fn decompose_recompose_is_identity(n in 2usize..=4, seed in 0u64..1_000_000) {
        let t = random_tensor(n, seed);
        let p = t.decompose();
        // traceless parts invariants hold after decomposition
        p.validate(1e-12).unwrap();
        let t2 = recompose(&p, 1e-10).unwrap();
        prop_assert!(t.max_abs_diff(&t2) < 1e-12);
        // and the reverse composition fixes the parts
        let p2 = t2.decompose();
        prop_assert!(p.s4.max_abs_diff(&p2.s4) < 1e-12);
        prop_assert!((p.scalar - p2.scalar).abs() < 1e-12);
    }

    #[test]
    fn four_tensor_part_is_trace_free(n in 2usize..=4, seed in 0u64..1_000_000) {
        let t = random_tensor(n, seed);
        let p = t.decompose();
        let weak = p.s4.weak_residuals();
        prop_assert!(weak.trace < 1e-12 * (1.0 + p.s4.max_abs()));
    }

    #[test]
    fn tensor_json_roundtrip(n in 2usize..=3, seed in 0u64..1_000_000) {
        let t = random_tensor(n, seed);
        let doc = tensor_to_json(&t);
        let t2 = tensor_from_json(&doc, 1e-10).unwrap();
        prop_assert!(t.max_abs_diff(&t2) < 1e-14);
    }

    #[test]
    fn bracket_is_antisymmetric_and_traceless(n in 2usize..=4, p in 0usize..8, q in 0usize..8) {
        let b = standard_basis(n).unwrap();
        let d = b.dim();
        let (p, q) = (p % d, q % d);
        let k1 = bracket(&b.elems[p], &b.elems[q]).unwrap();
        let k2 = bracket(&b.elems[q], &b.elems[p]).unwrap();
        prop_assert!((k1.clone() + k2).camax() < 1e-14);
        prop_assert!(k1.trace().norm() < 1e-14);
        // anti-Hermitian
        prop_assert!((k1.adjoint() + k1).camax() < 1e-14);
    }
}

#[test]
fn scalar_and_spectrum_are_frame_invariant() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for n in 2..=3usize {
        let b = standard_basis(n).unwrap();
        for seed in 0..6 {
            let t = random_tensor(n, seed);
            let ev0 = spectrum(&matrix_traceless(&t, &b).unwrap());
            for _ in 0..4 {
                let u = linalg::haar_unitary(n, &mut rng);
                let tc = t.unitary_conjugate(&u).unwrap();
                assert!((tc.scalar() - t.scalar()).abs() < 1e-10);
                let ev1 = spectrum(&matrix_traceless(&tc, &b).unwrap());
                for (a, c) in ev0.iter().zip(ev1.iter()) {
                    assert!((a - c).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn operator_matrix_is_basis_covariant() {
    // two orthonormal bases give orthogonally conjugate matrices: the sorted
    // spectra agree
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for n in 2..=3usize {
        let b = standard_basis(n).unwrap();
        let d = b.dim();
        // random orthogonal mix of the elements via QR of a Gaussian matrix
        let g = nalgebra::DMatrix::from_fn(d, d, |_, _| linalg::standard_normal(&mut rng));
        let qr = g.qr();
        let o = qr.q();
        let mut elems2 = Vec::with_capacity(d);
        for j in 0..d {
            let mut acc = bisectional::HermitianForm::zero(n);
            for i in 0..d {
                acc = acc.add(&b.elems[i].scaled(o[(i, j)]));
            }
            elems2.push(acc);
        }
        let b2 = FormBasis::new(n, elems2, "rotated").unwrap();
        for seed in 0..5 {
            let t = random_tensor(n, seed);
            let ev1 = spectrum(&matrix_traceless(&t, &b).unwrap());
            let ev2 = spectrum(&matrix_traceless(&t, &b2).unwrap());
            for (a, c) in ev1.iter().zip(ev2.iter()) {
                assert!((a - c).abs() < 1e-10);
            }
        }
    }
}
