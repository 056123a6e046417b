//! Small reference networks used throughout the tests and the acceptance suite.

use crate::network::LiftedNetwork;

fn net(json: &str) -> LiftedNetwork {
    LiftedNetwork::from_json(json).expect("fixture network is well formed")
}

/// One unary relation, each element independently in `P` with probability 1/2.
pub fn coin() -> LiftedNetwork {
    net(r#"{"relations":[{"name":"P","arity":1,"parents":[],"rules":[{"guard":"true","prob":"1/2"}]}]}"#)
}

/// A fair coin `P` and a child `Q` with `Q` likely exactly where `P` holds.
pub fn pq() -> LiftedNetwork {
    net(r#"{"relations":[
        {"name":"Q","arity":1,"parents":["P"],
         "rules":[{"guard":"P(x1)","prob":"3/4"},{"guard":"~P(x1)","prob":"1/4"}]},
        {"name":"P","arity":1,"parents":[],"rules":[{"guard":"true","prob":"1/2"}]}]}"#)
}

/// A uniformly random directed graph with loops.
pub fn graph() -> LiftedNetwork {
    net(r#"{"relations":[{"name":"R","arity":2,"parents":[],"rules":[{"guard":"true","prob":"1/2"}]}]}"#)
}

/// `P` holds everywhere.
pub fn certain() -> LiftedNetwork {
    net(r#"{"relations":[{"name":"P","arity":1,"parents":[],"rules":[{"guard":"true","prob":"1"}]}]}"#)
}

/// A random graph `R` and a child `Q` whose probability depends on whether
/// the element has an outgoing edge.
pub fn exists_guard() -> LiftedNetwork {
    net(r#"{"relations":[
        {"name":"R","arity":2,"parents":[],"rules":[{"guard":"true","prob":"1/2"}]},
        {"name":"Q","arity":1,"parents":["R"],
         "rules":[{"guard":"exists y : R(x1,y)","prob":"3/4"},{"guard":"~exists y : R(x1,y)","prob":"1/4"}]}]}"#)
}

/// Like [`exists_guard`], but the guard is a proportion threshold `r` on out-edges.
pub fn proportion_guard(r: &str) -> LiftedNetwork {
    net(&format!(
        r#"{{"relations":[
        {{"name":"R","arity":2,"parents":[],"rules":[{{"guard":"true","prob":"1/2"}}]}},
        {{"name":"Q","arity":1,"parents":["R"],
         "rules":[{{"guard":"[ ||R(x1,y) : y=y||{{y}} >= {r} ]","prob":"3/4"}},
                  {{"guard":"~[ ||R(x1,y) : y=y||{{y}} >= {r} ]","prob":"1/4"}}]}}]}}"#
    ))
}

/// The chain `A -> B -> C` of unary relations.
pub fn chain() -> LiftedNetwork {
    net(r#"{"relations":[
        {"name":"A","arity":1,"parents":[],"rules":[{"guard":"true","prob":"1/2"}]},
        {"name":"B","arity":1,"parents":["A"],
         "rules":[{"guard":"A(x1)","prob":"2/3"},{"guard":"~A(x1)","prob":"1/3"}]},
        {"name":"C","arity":1,"parents":["B"],
         "rules":[{"guard":"B(x1)","prob":"1/5"},{"guard":"~B(x1)","prob":"4/5"}]}]}"#)
}

/// Looks a fixture up by its short name.
pub fn by_name(name: &str) -> Option<LiftedNetwork> {
    Some(match name {
        "coin" => coin(),
        "pq" => pq(),
        "graph" => graph(),
        "certain" => certain(),
        "exists_guard" => exists_guard(),
        "chain" => chain(),
        _ => return None,
    })
}
