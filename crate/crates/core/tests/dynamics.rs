use fbsplit::flows::{newton_flow, prox_grad_flow, semigroup_flow, Admissibility, FlowConfig, Integrator};
use fbsplit::gallery::{builtin_gallery, gallery_entry, oracle_solve_from, GalleryEntry};
use fbsplit::hilbert::{sample_points, Vector};
use fbsplit::lyapunov::{bz_constancy, check_monotone, Anchor};
use fbsplit::splitters::{run, run_fbn_varying, StepPolicy, StopRule};
use fbsplit::trace::series;

fn anchor(e: &GalleryEntry) -> Anchor {
    Anchor::certified(&e.problem, e.reference.clone(), e.problem.beta(), 1e-11).unwrap()
}

fn v(c: &[f64]) -> Vector {
    Vector::from_slice(c).unwrap()
}

#[test]
fn flows_are_stationary_at_solutions() {
    let cfg = FlowConfig::new(0.01, 10.0, Integrator::Rk4, 50).unwrap();
    for e in builtin_gallery() {
        let z = &e.reference;
        let beta = e.problem.beta();
        let vz = e.problem.operator().apply(z) * -1.0;
        let moved = |states: &[Vector]| states.iter().map(|x| x.distance(z)).fold(0.0, f64::max);
        let nf = newton_flow(&e.problem, beta, z, Some(&vz), &cfg, None).unwrap();
        let sg = semigroup_flow(&e.problem, z, &FlowConfig::new(0.01_f64.min(beta), 10.0, Integrator::ExplicitEuler, 50).unwrap(), None, Admissibility::Enforce).unwrap();
        let pg = prox_grad_flow(&e.problem, beta, z, &cfg, None, Admissibility::Enforce).unwrap();
        for (name, tr) in [("newton", nf), ("semigroup", sg), ("prox-grad", pg)] {
            assert!(moved(&tr.states) < 1e-9, "{} {name} moved {}", e.name, moved(&tr.states));
        }
    }
}

#[test]
fn all_flows_reach_the_b_image() {
    for e in builtin_gallery() {
        let beta = e.problem.beta();
        let a = anchor(&e);
        let rk = FlowConfig::new(0.01, 50.0, Integrator::Rk4, 100).unwrap();
        let eu = FlowConfig::new(0.01_f64.min(beta / 2.0), 50.0, Integrator::ExplicitEuler, 100).unwrap();
        let nf = newton_flow(&e.problem, beta, &e.start, None, &rk, Some(&a)).unwrap();
        let sg = semigroup_flow(&e.problem, &e.start, &eu, Some(&a), Admissibility::Enforce).unwrap();
        let pg = prox_grad_flow(&e.problem, beta, &e.start, &rk, Some(&a), Admissibility::Enforce).unwrap();
        for (name, tr) in [("newton", &nf), ("semigroup", &sg), ("prox-grad", &pg)] {
            assert!(tr.is_consistent());
            let db = tr.last(series::B_ERROR).unwrap();
            assert!(db <= 1e-6, "{} {name}: {db:e}", e.name);
            let kz = tr.last(series::K_Z).unwrap();
            assert!(kz.abs() <= 1e-6, "{} {name}: k_z {kz:e}", e.name);
        }
        assert!(nf.last(series::G_Z).unwrap() <= 1e-6);
        // Newton flow Lyapunov function, discretization slack 1e-6 per unit time
        let dt = nf.index[1] - nf.index[0];
        assert!(check_monotone(nf.series(series::GAMMA_Z).unwrap(), 1e-6 * dt).unwrap().pass);
        let hk = sg.series(series::H_PLUS_K).unwrap();
        assert!(check_monotone(hk, 1e-12).unwrap().pass, "{}", e.name);
    }
}

#[test]
fn newton_flow_on_every_known_solution() {
    let e = gallery_entry("halfspace-nonunique").unwrap();
    let cfg = FlowConfig::new(0.01, 20.0, Integrator::Rk4, 10).unwrap();
    for z in &e.known_solutions {
        let a = Anchor::certified(&e.problem, z.clone(), 1.0, 1e-12).unwrap();
        let tr = newton_flow(&e.problem, 1.0, &v(&[3.0, -1.0]), None, &cfg, Some(&a)).unwrap();
        let dt = tr.index[1] - tr.index[0];
        assert!(check_monotone(tr.series(series::GAMMA_Z).unwrap(), 1e-6 * dt).unwrap().pass);
    }
}

#[test]
fn semigroup_energy_stays_bounded() {
    let e = gallery_entry("rotation-residual").unwrap();
    let mut totals = Vec::new();
    for horizon in [10.0, 20.0, 40.0] {
        let cfg = FlowConfig::new(0.01, horizon, Integrator::ExplicitEuler, 1).unwrap();
        let tr = semigroup_flow(&e.problem, &e.start, &cfg, None, Admissibility::Enforce).unwrap();
        totals.push(tr.series(series::ENERGY_INCREMENT).unwrap()[1..].iter().sum::<f64>());
    }
    assert!((totals[2] - totals[1]).abs() <= 1e-9 * totals[0].max(1.0));
}

#[test]
fn euler_order_is_one() {
    let p = fbsplit::InclusionProblem::new(
        std::sync::Arc::new(fbsplit::hilbert::ZeroFunction::new(1)),
        std::sync::Arc::new(fbsplit::hilbert::LinearOperator::identity(1)),
    )
    .unwrap();
    let err = |dt: f64| {
        let cfg = FlowConfig::new(dt, 1.0, Integrator::ExplicitEuler, 1).unwrap();
        let tr = newton_flow(&p, 1.0, &v(&[1.0]), None, &cfg, None).unwrap();
        (tr.last_state().unwrap()[0] - (-1.0_f64).exp()).abs()
    };
    let ratio = err(0.01) / err(0.005);
    assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
}

#[test]
fn splitter_invariants_on_gallery() {
    for e in builtin_gallery() {
        let beta = e.problem.beta();
        let a = anchor(&e);
        let bz = &a.bz;
        let fbn = StepPolicy::fbn(1.2, beta, beta).unwrap();
        let tr = run(&e.problem, &fbn, &e.start, &StopRule::new(-1.0, 10_000), Some(&a)).unwrap();
        let dy = tr.series(series::Y_STEP_NORM_SQ).unwrap();
        let partial = |k: usize| dy[1..=k].iter().sum::<f64>();
        assert!(partial(10_000) - partial(1_000) < 1e-8, "{}", e.name);
        assert!(tr.last(series::B_ERROR).unwrap() <= 1e-8);
        assert!(tr.last(series::Y_MINUS_X_ERROR).unwrap() <= 1e-7);

        let mut limits = Vec::new();
        for policy in [
            fbn.clone(),
            StepPolicy::fb_classical(beta, beta).unwrap(),
            StepPolicy::fb_relaxed(0.6, 1.5 * beta, beta).unwrap(),
        ] {
            let tr = run(&e.problem, &policy, &e.start, &StopRule::new(1e-11, 100_000), None).unwrap();
            assert_eq!(tr.converged, Some(true), "{} {:?}", e.name, policy.scheme);
            let x = tr.last_state().unwrap().clone();
            assert!(e.problem.residual(beta, &x).unwrap() <= 1e-8);
            assert!(e.problem.operator().apply(&x).distance(bz) <= 1e-7);
            limits.push(x);
        }
    }
}

#[test]
fn lasso_matches_oracle() {
    let e = gallery_entry("lasso").unwrap();
    let beta = e.problem.beta();
    for policy in [
        StepPolicy::fb_classical(1.5 * beta, beta).unwrap(),
        StepPolicy::fbn(1.4, 0.5 * beta, beta).unwrap(),
    ] {
        let tr = run(&e.problem, &policy, &Vector::zeros(10), &StopRule::new(1e-10, 100_000), None).unwrap();
        assert_eq!(tr.converged, Some(true));
        assert!(tr.last_state().unwrap().distance(&e.reference) <= 1e-8);
    }
}

#[test]
fn varying_relaxation_converges_on_lasso() {
    let e = gallery_entry("lasso").unwrap();
    let beta = e.problem.beta();
    let tr = run_fbn_varying(
        &e.problem,
        beta,
        |k| 0.4 + 0.9 * ((k as f64) * 0.7).sin().abs(),
        0.05,
        &e.start,
        &StopRule::new(1e-10, 100_000),
        None,
    )
    .unwrap();
    assert_eq!(tr.converged, Some(true));
    assert!(tr.last_state().unwrap().distance(&e.reference) <= 1e-8);
}

#[test]
fn oracle_uniqueness_and_b_constancy() {
    let boxq = gallery_entry("box-quadratic").unwrap();
    for x0 in sample_points(2, 10, 5.0, 11) {
        let z = oracle_solve_from(&boxq.problem, &x0).unwrap();
        assert!(z.distance(&boxq.reference) <= 1e-8);
    }
    let hs = gallery_entry("halfspace-nonunique").unwrap();
    let sols: Vec<Vector> = sample_points(2, 6, 5.0, 12)
        .iter()
        .map(|x0| oracle_solve_from(&hs.problem, x0).unwrap())
        .collect();
    let report = bz_constancy(&hs.problem, &sols, 1.0, 1e-11).unwrap();
    assert!(report.pass && report.max_deviation <= 1e-9);
}
