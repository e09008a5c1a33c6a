use super::*;
use crate::theta::BasePair;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn find(id: &str) -> Case {
    catalog().into_iter().find(|c| c.id == id).unwrap()
}

#[test]
fn ids_are_unique_and_kebab_case() {
    let cases = catalog();
    let mut ids: Vec<_> = cases.iter().map(|c| c.id).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), cases.len());
    assert!(ids.iter().all(|id| id.chars().all(|ch| ch.is_ascii_lowercase() || ch.is_ascii_digit() || ch == '-')));
}

#[test]
fn frenkel_filter_selects_the_two_summations() {
    let cfg = CatalogConfig { filter: "frenkel".into(), trials: 3, seed: 5, ..Default::default() };
    let ids: Vec<_> = run_catalog(&cfg).unwrap().reports().map(|r| r.id.clone()).collect();
    assert_eq!(ids, ["frenkel-turaev", "frenkel-turaev-special"]);
    assert!(matches_filter("gasper", ""));
    assert!(matches_filter("gasper", "nothing, gasp"));
    assert!(!matches_filter("gasper", "weier"));
}

#[test]
fn every_id_selects_exactly_itself() {
    let ids: Vec<_> = catalog().iter().map(|c| c.id).collect();
    for id in &ids {
        let hit: Vec<_> = ids.iter().filter(|other| matches_filter(other, id)).collect();
        assert_eq!(hit, [id]);
    }
    assert_eq!(ids.iter().filter(|id| matches_filter(id, "weierstrass")).count(), 1);
    assert_eq!(ids.iter().filter(|id| matches_filter(id, "weier")).count(), 3);
}

#[test]
fn same_seed_gives_identical_json() {
    let cfg = CatalogConfig { filter: "weier,interp-wang,karlsson".into(), trials: 12, seed: 11, ..Default::default() };
    let a = serde_json::to_string(&run_catalog(&cfg).unwrap().to_json()).unwrap();
    let single = CatalogConfig { threads: Some(1), ..cfg.clone() };
    let b = serde_json::to_string(&run_catalog(&single).unwrap().to_json()).unwrap();
    assert_eq!(a, b);
    let other = CatalogConfig { seed: 12, ..cfg };
    assert_ne!(a, serde_json::to_string(&run_catalog(&other).unwrap().to_json()).unwrap());
}

#[test]
fn every_case_passes_and_breaks_under_mutation() {
    let cfg = CatalogConfig { seed: 3, trials: 25, mutation: true, ..Default::default() };
    let rep = run_catalog(&cfg).unwrap();
    assert_eq!(rep.runs.len(), catalog().len());
    for r in &rep.runs {
        assert!(r.report.pass, "{}: {:?}", r.report.id, r.report.failures.first());
        let m = r.mutation.unwrap();
        assert!(m.checked > 0 && m.broken_fraction() >= 0.9, "{}: {m:?}", r.report.id);
        assert!(r.rejection_rate() < 0.5, "{}: {}", r.report.id, r.rejection_rate());
    }
}

#[test]
fn impossible_tolerance_reports_failures_with_params() {
    let cfg = CatalogConfig { filter: "weier".into(), trials: 4, seed: 1, tol: Some(1e-30), ..Default::default() };
    let rep = run_catalog(&cfg).unwrap();
    assert!(!rep.pass());
    let json = rep.to_json();
    assert_eq!(json["version"], 1);
    assert_eq!(json["tol"], 1e-30);
    let first = &json["cases"][0];
    assert_eq!(first["pass"], false);
    assert!(first["failures"][0]["params"]["p"].is_array());
    assert!(rep.to_text().contains("FAIL"));
}

#[test]
fn report_tol_is_null_without_override() {
    let cfg = CatalogConfig { filter: "triple".into(), trials: 2, ..Default::default() };
    let json = run_catalog(&cfg).unwrap().to_json();
    assert!(json["tol"].is_null());
    let keys: Vec<_> = json["cases"][0].as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys.len(), 6);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        CatalogConfig { trials: 0, ..Default::default() },
        CatalogConfig { tol: Some(-1.0), ..Default::default() },
        CatalogConfig { threads: Some(0), ..Default::default() },
        CatalogConfig {
            sampler: SamplerConfig { p: Some(c(1.5, 0.0)), ..Default::default() },
            ..Default::default()
        },
    ];
    for cfg in bad {
        assert!(run_catalog(&cfg).is_err(), "{cfg:?}");
    }
}

#[test]
fn param_sets_serialize_and_perturb() {
    let ps = ParamSet::new().with_c("x", c(1.0, -2.0)).with_list("b", vec![c(0.5, 0.0), c(0.0, 0.5)]).with_int("N", 3);
    assert_eq!(ps.to_json(), serde_json::json!({"N": 3, "b": [[0.5, 0.0], [0.0, 0.5]], "x": [1.0, -2.0]}));
    assert_eq!(ps.slots().len(), 3);
    let m = ps.perturbed(&("b".to_string(), Some(1)), 1e-3);
    assert_eq!(m.list("b").unwrap()[1], c(0.0, 0.5005));
    assert_eq!(m.c("x").unwrap(), c(1.0, -2.0));
    assert!(ps.c("missing").is_err());
}

#[test]
fn zero_length_summations_reduce_to_one() {
    let bp = BasePair::new(c(0.4, 0.2), crate::theta::Nome::new(c(0.1, 0.05)).unwrap()).unwrap();
    let base = ParamSet::new().with_c("p", bp.p.value()).with_c("q", bp.q);
    let ft = base
        .clone()
        .with_int("n", 0)
        .with_c("a", c(0.6, 0.1))
        .with_c("b", c(0.5, -0.2))
        .with_c("c", c(0.45, 0.3))
        .with_c("d", c(0.7, 0.05))
        .with_c("e", c(0.55, -0.1));
    let o = (find("frenkel-turaev").eval)(&ft, &ft).unwrap();
    assert!(o.residual < 1e-15, "{o:?}");
    let binom = base.with_int("n", 5).with_int("k", 0);
    assert!((find("elliptic-binomial").eval)(&binom, &binom).unwrap().residual < 1e-15);
}

#[test]
fn k0_sum_ignores_everything_but_b0() {
    let case = find("weierstrass-k0");
    let mut s = crate::sampling::Sampler::new(crate::sampling::cell_rng(4, case.id, 0, 0), SamplerConfig::default());
    let ps = (case.draw)(&mut s).unwrap();
    for key in case.invariant_in {
        for slot in ps.slots().into_iter().filter(|s| s.0 == *key) {
            let o = (case.eval)(&ps.perturbed(&slot, 1e-2), &ps).unwrap();
            assert!(o.residual < 1e-10, "{slot:?}: {o:?}");
        }
    }
    let o = (case.eval)(&ps.perturbed(&("b0".to_string(), None), 1e-3), &ps).unwrap();
    assert!(o.residual > 1e-5);
}

#[test]
fn family_helpers_cover_their_cases() {
    let cfg = SamplerConfig::default();
    let w = check_weierstrass_family(2, 5, cfg).unwrap();
    assert_eq!(w.len(), 3);
    assert!(w.iter().all(|r| r.pass));
    assert!(check_summation_family(2, 5, cfg).unwrap().iter().any(|r| r.id == "gasper"));
    assert_eq!(check_karlsson_family(2, 5, cfg).unwrap().len(), 3);
    let pq = check_pq_power_expansions(2, 5, cfg).unwrap();
    assert!(pq.iter().all(|r| r.pass && r.trials == 5));
}
