use std::f64::consts::PI;

use chainswap::frqme::{assemble, trace_annihilation_defect, GeneratorSpec};
use chainswap::metrics::concurrence;
use chainswap::model::{drive_hamiltonian, system_env_coupling, Carrier, DriveSpec, PulseTarget};
use chainswap::operator::{apply, embed, kron, max_norm, partial_trace, unvec, vec, Operator, C64};
use chainswap::pulse::rotation;
use chainswap::{BathSpec, ChainSpec};
use proptest::prelude::*;

fn matrix(d: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d)
        .prop_map(move |v| Operator::from_iterator(d, d, v.into_iter().map(|(re, im)| C64::new(re, im))))
}

fn density(d: usize) -> impl Strategy<Value = Operator> {
    matrix(d).prop_map(|a| {
        let p = &a * a.adjoint();
        let tr = p.trace();
        p / tr
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vec_unvec_round_trip(a in matrix(4)) {
        prop_assert_eq!(unvec(&vec(&a)).unwrap(), a);
    }

    #[test]
    fn partial_trace_in_stages(rho in density(8)) {
        let dims = [2, 2, 2];
        let direct = partial_trace(&rho, &[0], &dims).unwrap();
        let staged = partial_trace(&partial_trace(&rho, &[0, 1], &dims).unwrap(), &[0], &[2, 2]).unwrap();
        prop_assert!(max_norm(&(direct - staged)) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product(a in density(2), b in density(4)) {
        let r = partial_trace(&kron(&a, &b), &[0], &[2, 2, 2]).unwrap();
        prop_assert!(max_norm(&(r - a)) < 1e-14);
    }

    #[test]
    fn embedded_ops_on_distinct_sites_commute(a in matrix(2), b in matrix(2), i in 0usize..3, j in 0usize..3) {
        prop_assume!(i != j);
        let ea = embed(&a, i, 3).unwrap();
        let eb = embed(&b, j, 3).unwrap();
        prop_assert!(max_norm(&(&ea * &eb - &eb * &ea)) < 1e-14);
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(
        rho in density(4),
        angles in prop::collection::vec((0.0f64..PI, 0.0f64..2.0 * PI), 2),
    ) {
        let u = kron(
            &rotation(angles[0].0, &[PulseTarget { site: 0, phase: angles[0].1 }], 1).unwrap(),
            &rotation(angles[1].0, &[PulseTarget { site: 0, phase: angles[1].1 }], 1).unwrap(),
        );
        let turned = &u * &rho * u.adjoint();
        prop_assert!((concurrence(&rho).unwrap() - concurrence(&turned).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn concurrence_is_bounded(rho in density(4)) {
        let c = concurrence(&rho).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
    }

    #[test]
    fn generator_is_trace_annihilating_and_hermiticity_preserving(
        w1 in 1e4f64..2e6,
        wse in 1e4f64..2e6,
        tc_scale in 0.01f64..0.3,
        phase in 0.0f64..2.0 * PI,
        detuning in -5e5f64..5e5,
        x in matrix(4),
    ) {
        let tau_c = tc_scale / w1.max(wse);
        let chain = ChainSpec::uniform(vec![6e7, 3e7], 1e5).unwrap();
        let bath = BathSpec::new(wse, tau_c).unwrap();
        let drive = DriveSpec {
            amplitude: w1,
            carrier: Carrier::Fixed { omega_rad_s: 6e7 + detuning },
            targets: vec![PulseTarget { site: 0, phase }, PulseTarget { site: 1, phase: phase + 1.0 }],
        };
        let mut components = drive_hamiltonian(&drive, &chain).unwrap();
        components.extend(system_env_coupling(&chain, &bath).unwrap());
        let spec = GeneratorSpec { components, static_h: Operator::zeros(4, 4), bath, secular_cutoff: 1e5 };
        let l = assemble(&spec).unwrap();
        prop_assert!(trace_annihilation_defect(&l.gen) < 1e-12);
        prop_assert!(l.gkls.valid, "{:?}", l.gkls);
        let h = &x + x.adjoint();
        let out = apply(&l.gen, &h).unwrap();
        prop_assert!(max_norm(&(&out - out.adjoint())) <= 1e-12 * max_norm(&l.gen).max(1.0));
    }
}
