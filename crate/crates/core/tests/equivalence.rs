use sipframe_core::atomic::{equivalence_harness, min_norm_coeffs};
use sipframe_core::instances::equivalence_instance;
use sipframe_core::{rng, Tolerances, Vector};

#[test]
fn sweep_agrees() {
    let tol = Tolerances::default().with_restarts(16);
    let mut kinds = [0usize; 2];
    for i in 0..60 {
        let inst = equivalence_instance(2024, i, 5, 8).unwrap();
        let rep = equivalence_harness(&inst.fam, &inst.k, &tol).unwrap();
        assert!(rep.agree, "instance {i} ({:?}, rank {}): {:?}", inst.kind, inst.rank, rep.failures);
        kinds[rep.k_frame as usize] += 1;
        if rep.k_frame {
            assert!(rep.reconstruction_residual <= 1e-7);
            let c = rep.atomic_constant.unwrap();
            let n = inst.fam.space().dim();
            let f = Vector(rng::complex_vector(&mut rng::stream(i, 9), n));
            let a = min_norm_coeffs(&inst.fam, &inst.k, &f, &tol).unwrap();
            assert!(inst.fam.coeff_norm(&a) <= c * inst.fam.space().norm(&f).unwrap() * (1.0 + 1e-6));
        }
    }
    // the sweep must exercise both outcomes
    assert!(kinds[0] >= 5 && kinds[1] >= 5, "{kinds:?}");
}
