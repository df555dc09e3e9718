use iteration_pipeline::{bundled_instance, bundled_instances, run_pipeline, verify_trace, Kind, Op, PipelineTrace, Status};
use rational_core::ReducedRational;

fn trace(name: &str) -> PipelineTrace {
    let inp = bundled_instance(name).unwrap();
    run_pipeline(&inp, &inp.toy_constants().unwrap()).unwrap()
}

#[test]
fn bundled_instances_complete_and_verify() {
    let all = bundled_instances();
    assert!(all.len() >= 5);
    for inp in all {
        let t = run_pipeline(&inp, &inp.toy_constants().unwrap()).unwrap();
        assert!(t.completed, "{}: {:?}", inp.name, t.halted);
        assert!(t.failures().is_empty(), "{}: {:?}", inp.name, t.failures());
        let identities = t.assertions.iter().filter(|a| a.kind == Kind::Identity);
        assert!(identities.clone().count() > 10);
        assert!(identities.into_iter().all(|a| a.status == Status::Held));
        let back = PipelineTrace::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        let rep = verify_trace(&back).unwrap();
        assert!(rep.ok, "{}: {:?}", inp.name, rep.failures);
    }
}

#[test]
fn instances_cover_every_step_kind() {
    let ops: Vec<Op> = bundled_instances()
        .iter()
        .flat_map(|i| run_pipeline(i, &i.toy_constants().unwrap()).unwrap().steps)
        .map(|s| s.op)
        .collect();
    assert!(ops.iter().any(|o| matches!(o, Op::SmallPrime { p: 2 })));
    assert!(ops.iter().any(|o| matches!(o, Op::Iter1 { .. })));
    assert!(ops.iter().any(|o| matches!(o, Op::Structured { k_p: -1, .. })));
    assert!(ops.iter().any(|o| matches!(o, Op::CommonNeighbor { .. })));
}

#[test]
fn shared_denominator_prime_is_removed() {
    let t = trace("shared-seven");
    let ex = t.extraction.as_ref().unwrap();
    assert_eq!(ex.new_minus.e.to_string(), "7");
    assert!(ex.new_plus.d == 1u32.into() && ex.new_plus.e == 1u32.into() && ex.new_plus.j == 1u32.into());
    assert_eq!(ex.n_factored.get(&13), Some(&1));
}

#[test]
fn prime_sum_inequality_checked_when_z_exceeds_c6() {
    let t = trace("remove-l");
    let checked: Vec<_> = t.assertions.iter().filter(|a| a.name.starts_with("L(v/w; z)")).collect();
    assert!(!checked.is_empty());
    assert!(checked.iter().all(|a| a.status == Status::Held));
    let skipped = trace("wide");
    assert!(skipped.assertions.iter().filter(|a| a.name.starts_with("L(v/w; z)")).all(|a| a.status == Status::Skipped));
}

#[test]
fn tampered_quality_fails_verification() {
    let mut t = trace("gcd-thirteen");
    t.stages[1].quality.mu_e *= rational_core::rat(2);
    let rep = verify_trace(&t).unwrap();
    assert!(!rep.ok);
    let mut t = trace("gcd-thirteen");
    t.steps[0].quality_after.log_value += 1.0;
    assert!(!verify_trace(&t).unwrap().ok);
}

#[test]
fn inadmissible_pair_is_named() {
    let mut inp = bundled_instance("shared-seven").unwrap();
    let (a, b) = (inp.r[0].clone(), inp.s[0].clone());
    inp.e = Some(vec![(a.clone(), b.clone())]);
    if inp.admissible(&a, &b).unwrap() {
        inp.y = rational_core::rat(1000);
    }
    let err = inp.graph().unwrap_err().to_string();
    assert!(err.contains(&a.to_string()) && err.contains(&b.to_string()), "{err}");
}

#[test]
fn non_primitive_numerators_rejected() {
    let mut inp = bundled_instance("wide").unwrap();
    let n = inp.r[0].num().clone() * 3u32;
    inp.r.push(ReducedRational::from_big_rational(&rational_core::BigRational::new(n.into(), inp.r[0].den().clone().into())).unwrap());
    assert!(inp.graph().is_err());
}
