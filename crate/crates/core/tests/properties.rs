use cplifs::ifs::{cylinder, Cplifs};
use cplifs::lab::{perturb, PerturbMode, PerturbationSpec};
use cplifs::markov::{spectral_radius, DiagramCaps, MarkovModel, SparseMatrix};
use cplifs::pressure::CylinderLengths;
use cplifs::{cplifs_distance, systems, Budget};
use proptest::prelude::*;

fn two_map_system() -> impl Strategy<Value = Cplifs> {
    (0.1f64..0.45, 0.1f64..0.45, -0.5f64..0.5, 0.05f64..0.3).prop_filter_map("valid", |(r1, r2, b, r3)| {
        Cplifs::from_params(&[(&[b], &[r1, r3], 0.0), (&[], &[-r2], 1.0)]).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cylinders_nest(f in two_map_system(), word in prop::collection::vec(0usize..2, 1..10), j in 0usize..2) {
        let base = f.support().unwrap();
        let outer = cylinder(&f, &word, &base);
        let mut longer = word.clone();
        longer.push(j);
        prop_assert!(outer.contains_interval(&cylinder(&f, &longer, &base), 1e-12));
    }

    #[test]
    fn direct_pressure_decreasing(f in two_map_system(), s in 0.0f64..2.0, ds in 0.01f64..1.0) {
        let l = CylinderLengths::compute(&f, 8, &Budget::default()).unwrap();
        prop_assert!(l.pressure(s + ds) <= l.pressure(s));
        prop_assert_eq!(l.pressure(0.0), 2f64.ln());
    }

    #[test]
    fn diagram_radius_monotone_in_s_and_r(f in two_map_system(), s in 0.1f64..1.5) {
        let lo = MarkovModel::build(&f, &[], DiagramCaps::levels(2)).unwrap();
        let hi = MarkovModel::build(&f, &[], DiagramCaps::levels(6)).unwrap();
        prop_assert!(lo.radius(s).unwrap() <= hi.radius(s).unwrap() * (1.0 + 1e-9));
        prop_assert!(hi.radius(s + 0.1).unwrap() <= hi.radius(s).unwrap() * (1.0 + 1e-9));
    }

    #[test]
    fn perturbations_are_close(seed in any::<u64>(), trial in 0u64..100, delta in 1e-6f64..1e-2) {
        let f = systems::kinked_separated().unwrap();
        let mode = PerturbMode::Uniform { translations: true, breakpoints: true, slopes: true };
        let spec = PerturbationSpec::new(delta, mode, seed, 1);
        let g = perturb(&f, &spec, trial).unwrap();
        prop_assert!(cplifs_distance(&f, &g).unwrap().epsilon <= delta);
        prop_assert_eq!(g.type_vector(), f.type_vector());
        prop_assert_eq!(perturb(&f, &spec, trial).unwrap(), g);
    }

    #[test]
    fn radius_is_scale_equivariant(entries in prop::collection::vec(0.0f64..1.0, 16), c in 0.1f64..10.0) {
        let dense: Vec<Vec<f64>> = entries.chunks(4).map(|r| r.to_vec()).collect();
        let scaled: Vec<Vec<f64>> = dense.iter().map(|r| r.iter().map(|x| x * c).collect()).collect();
        let a = spectral_radius(&SparseMatrix::from_dense(&dense), 1e-12).unwrap();
        let b = spectral_radius(&SparseMatrix::from_dense(&scaled), 1e-12).unwrap();
        prop_assert!((a * c - b).abs() <= 1e-9 * b.max(1.0));
    }
}
