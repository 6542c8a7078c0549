//! End-to-end flows across modules and through the file formats.

mod common;

use inertia::audit::{self, fit_distortion, recover_wiu};
use inertia::cps::{self, ecps_posterior, ht_from_ecps, ht_posterior, HTModel, Ladder};
use inertia::family::FamilyFile;
use inertia::io;
use inertia::model::complete_family;
use inertia::{DeltaSpec, DistanceSpec, Event, IUModel, StateSpace, UpdateFamily, WIUModel};
use proptest::prelude::*;
use rand::Rng;

fn through_json(fam: &UpdateFamily) -> UpdateFamily {
    let text = io::to_json(&fam.to_file());
    UpdateFamily::from_file(serde_json::from_str::<FamilyFile>(&text).unwrap()).unwrap()
}

#[test]
fn fitted_table_regenerates_the_family() {
    let mut rng = common::rng(201);
    for _ in 0..10 {
        let n = rng.gen_range(3..=5);
        let prior = common::distinct(&mut rng, n, 0.02, 1e-3);
        let delta = common::monotone_delta(&mut rng);
        let space = StateSpace::numbered(n).unwrap();
        let fam = complete_family(&IUModel::new(space.clone(), prior.clone(), DistanceSpec::distorted(delta)).unwrap())
            .unwrap();
        let table = fit_distortion(&through_json(&fam)).unwrap();
        assert!(matches!(table, DeltaSpec::Table { .. }));
        let refit = complete_family(&IUModel::new(space, prior, DistanceSpec::distorted(table)).unwrap()).unwrap();
        for (e, b) in fam.iter() {
            assert!(refit.get(e).unwrap().sup_dist(b) < 1e-9, "{e}");
        }
    }
}

#[test]
fn weighted_recovery_returns_the_base_rule() {
    let mut rng = common::rng(202);
    for gamma in [0.1, 0.45, 0.8] {
        let n = 4;
        let base = IUModel::new(
            StateSpace::numbered(n).unwrap(),
            common::interior(&mut rng, n, 0.02),
            common::distance(&mut rng, "bayesian_divergence", n),
        )
        .unwrap();
        let base_fam = complete_family(&base).unwrap();
        let fam = complete_family(&WIUModel::new(base, gamma).unwrap()).unwrap();
        assert!(!audit::check_consequentialism(&fam).passed);
        let rec = recover_wiu(&through_json(&fam)).unwrap();
        assert!((rec.gamma - gamma).abs() < 1e-10);
        for (e, b) in base_fam.iter() {
            assert!(rec.surrogates.get(e).unwrap().sup_dist(b) < 1e-9);
        }
        assert!(audit::run_all(&rec.surrogates).iter().all(|r| r.passed));
    }
}

#[test]
fn ladder_family_round_trips_through_files() {
    let mut rng = common::rng(203);
    for _ in 0..10 {
        let n = rng.gen_range(3..=6);
        let lad = common::ladder(&mut rng, n);
        let fam = through_json(&complete_family(&lad).unwrap());
        assert!(audit::run_all(&fam).iter().all(|r| r.passed || r.axiom == "dynamic_consistency"));
        let back = cps::ladder_from_family(&fam).unwrap();
        let file = back.to_file(None);
        let (again, eps) = Ladder::from_file(serde_json::from_str(&io::to_json(&file)).unwrap()).unwrap();
        assert_eq!(eps, 0.0);
        for (a, b) in again.levels().iter().zip(lad.levels()) {
            assert!(a.sup_dist(b) < 1e-12);
        }
    }
}

#[test]
fn ht_model_survives_serialization() {
    let mut rng = common::rng(204);
    for _ in 0..8 {
        let n = rng.gen_range(3..=5);
        let lad = common::ladder(&mut rng, n);
        let eps = [0.0, 0.1, 0.2][rng.gen_range(0..3)];
        let c = ht_from_ecps(&lad, eps).unwrap();
        let model = HTModel::from_file(serde_json::from_str(&io::to_json(&c.model.to_file())).unwrap()).unwrap();
        for e in Event::all_nonempty(n) {
            if let Ok(want) = ecps_posterior(&lad, eps, e) {
                assert!(ht_posterior(&model, e).unwrap().sup_dist(&want) < 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ladder_families_have_certificates(seed in any::<u64>(), n in 3usize..=5) {
        let mut rng = <common::TestRng as rand::SeedableRng>::seed_from_u64(seed);
        let fam = complete_family(&common::ladder(&mut rng, n)).unwrap();
        prop_assert!(audit::check_dynamic_coherence(&fam).passed);
        prop_assert!(audit::rank_certificate(&fam).is_ok());
        prop_assert!(cps::check_cps(&fam).passed);
    }

    #[test]
    fn planted_cycles_are_caught(seed in any::<u64>(), n in 3usize..=4) {
        let mut rng = <common::TestRng as rand::SeedableRng>::seed_from_u64(seed);
        let m = IUModel::new(
            StateSpace::numbered(n).unwrap(),
            common::interior(&mut rng, n, 0.02),
            DistanceSpec::bayesian(),
        ).unwrap();
        let fam = common::plant_cycle(&mut rng, &complete_family(&m).unwrap());
        prop_assert!(!audit::check_dynamic_coherence(&fam).passed);
        prop_assert!(audit::rank_certificate(&fam).is_err());
    }
}
