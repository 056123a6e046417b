use cpl_core::evaluator::{evaluate, Assignment, FiniteStructure};
use cpl_core::network::LiftedNetwork;
use cpl_core::worlds::sample;
use cpl_core::{fixtures, parse};

#[test]
fn networks_round_trip_through_json() {
    for net in [fixtures::pq(), fixtures::exists_guard(), fixtures::chain(), fixtures::proportion_guard("337/1000")] {
        let back = LiftedNetwork::from_json(&net.to_json_pretty()).unwrap();
        assert_eq!(back, net);
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let text = r#"{"relations":[{"name":"P","arity":1,"parents":[],"rules":[{"guard":"true","prob":"1/2"}],"extra":1}]}"#;
    assert!(LiftedNetwork::from_json(text).is_err());
}

#[test]
fn sampled_worlds_round_trip_and_replay() {
    let net = fixtures::graph();
    let w = sample(&net, 7, 11).unwrap();
    assert_eq!(sample(&net, 7, 11).unwrap(), w);
    let back = FiniteStructure::from_json(&w.to_json(), net.sig()).unwrap();
    assert_eq!(back, w);
    let f = parse("exists x : R(x,x)", net.sig()).unwrap();
    assert_eq!(evaluate(&back, &f, &Assignment::new()).unwrap(), evaluate(&w, &f, &Assignment::new()).unwrap());
}
