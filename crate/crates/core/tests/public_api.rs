use hbvm_core::integrator::{integrate, step, Formulation, SolveSettings};
use hbvm_core::problems::{builtin, vector_field};
use hbvm_core::quadrature::{gauss_rule, lobatto_rule};
use hbvm_core::spectral::isospectral_report;
use hbvm_core::tableau::{build_collocation, filter_collocation, row_sums};
use hbvm_core::{Builtin, Error, HamiltonianSystem, HbvmTableau, NodeKind};

#[test]
fn tableau_consistency_conditions() {
    for (kind, k, s) in [(NodeKind::Gauss, 5, 2), (NodeKind::Lobatto, 6, 3), (NodeKind::Gauss, 3, 3)] {
        let t = HbvmTableau::new(kind, k, s).unwrap();
        let sums = row_sums(t.a());
        for (ci, ri) in t.c().iter().zip(&sums) {
            assert!((ci - ri).abs() <= 1e-14, "{kind}({k},{s})");
        }
        assert!((t.b().iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        assert!(t.orthogonality_residual() <= 1e-13);
        assert!(t.antiderivative_residual() <= 1e-13);
    }
}

#[test]
fn rank_is_s() {
    // A = I_s P_sᵀ Ω has exactly s nonzero eigenvalues
    let t = HbvmTableau::gauss(10, 3).unwrap();
    let r = isospectral_report(&t).unwrap();
    assert_eq!(r.nonzero_eigs_a.len(), 3);
    assert!(r.matched && r.gap_ok());
}

#[test]
fn precondition_errors() {
    assert!(matches!(
        HbvmTableau::gauss(2, 3),
        Err(Error::InsufficientExactness { exactness: 3, required: 5 })
    ));
    assert!(HbvmTableau::lobatto(2, 2).is_err());
    assert!(matches!(builtin("duffing"), Err(Error::UnknownProblem(_))));
    let t = HbvmTableau::gauss(2, 2).unwrap();
    assert!(step(&Builtin::Harmonic, &t, &[1.0, 0.0, 0.0], 0.1, &SolveSettings::default()).is_err());
}

#[test]
fn filtered_collocation_integrates_like_direct() {
    let rule = lobatto_rule(5).unwrap();
    let filtered = filter_collocation(&build_collocation(&rule).unwrap(), 2).unwrap();
    let direct = HbvmTableau::lobatto(5, 2).unwrap();
    let settings = SolveSettings::default();
    let sys = Builtin::Pendulum;
    let y0 = sys.default_initial_state();
    let a = integrate(&sys, &filtered, &y0, 0.1, 50, &settings).unwrap();
    let b = integrate(&sys, &direct, &y0, 0.1, 50, &settings).unwrap();
    let (ya, yb) = (&a.last().unwrap().y, &b.last().unwrap().y);
    for (x, y) in ya.iter().zip(yb) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn henon_heiles_cubic_is_conserved_from_k_3() {
    // ν = 3, s = 2: exact for k ≥ 3
    let sys = Builtin::HenonHeiles;
    assert_eq!(sys.poly_degree(), Some(3));
    let y0 = sys.default_initial_state();
    let settings = SolveSettings::default();
    let drift = |k| {
        let t = HbvmTableau::gauss(k, 2).unwrap();
        integrate(&sys, &t, &y0, 0.2, 500, &settings).unwrap().max_abs_drift()
    };
    assert!(drift(3) <= 5e-12);
    assert!(drift(4) <= 5e-12);
    assert!(drift(2) > 1e-8);
}

#[test]
fn stage_space_formulation_runs() {
    let settings = SolveSettings {
        formulation: Formulation::StageSpace,
        ..Default::default()
    };
    let t = HbvmTableau::gauss(4, 2).unwrap();
    let sys = Builtin::QuarticOscillator;
    let traj = integrate(&sys, &t, &[1.0, 0.0], 0.1, 100, &settings).unwrap();
    assert!(traj.max_abs_drift() <= 5e-13);
    assert_eq!(traj.iterations.len(), 100);
}

#[test]
fn vector_field_of_pendulum() {
    let f = vector_field(&Builtin::Pendulum, &[0.0, 1.0]).unwrap();
    assert_eq!(f, [1.0, 0.0]);
    assert_eq!(gauss_rule(3).unwrap().exactness(), 5);
}
