//! The distribution a lifted network induces on structures with domain `{1..n}`:
//! exact world probabilities, brute-force sentence probabilities, and a
//! reproducible forward sampler.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluator::{decode, Assignment, Compiled, FiniteStructure};
use crate::formula::{Formula, Var};
use crate::network::{structure_from_mask, LiftedNetwork};
use crate::rational::{one, Rational};

/// Default cap on the number of atoms (the exponent of the world count).
pub const DEFAULT_CAP_BITS: usize = 24;

struct CompiledRule {
    guard: Option<Compiled>, // None for `true`
    positions: Vec<usize>,   // index into x1..xk of each free guard variable
    prob: Rational,
    one_minus: Rational,
    threshold: u128, // floor(prob * 2^64)
}

struct CompiledRelation {
    name: String,
    index: usize,
    arity: usize,
    rules: Vec<CompiledRule>,
}

/// Guards compiled once per network for repeated per-tuple lookups.
pub struct GuardTable {
    relations: Vec<CompiledRelation>, // in sampling order
}

impl GuardTable {
    pub fn new(net: &LiftedNetwork) -> Result<Self> {
        let sig = net.sig();
        let mut relations = Vec::new();
        for name in net.topological_order() {
            let spec = net.relation(&name).expect("listed");
            let vars = spec.arg_vars();
            let mut rules = Vec::new();
            for rule in &spec.rules {
                let guard = if rule.guard == Formula::Top { None } else { Some(Compiled::new(&rule.guard, sig)?) };
                let positions = guard.as_ref().map_or_else(Vec::new, |g| {
                    g.free_vars().map(|v| vars.iter().position(|w| w == v).expect("guard vars are x1..xk")).collect()
                });
                let scaled = &rule.prob * Rational::from_integer(BigInt::one() << 64);
                rules.push(CompiledRule {
                    guard,
                    positions,
                    prob: rule.prob.clone(),
                    one_minus: one() - &rule.prob,
                    threshold: scaled.floor().to_integer().to_u128().expect("prob <= 1"),
                });
            }
            relations.push(CompiledRelation { name, index: sig.index_of(&spec.name).expect("in sig"), arity: spec.arity, rules });
        }
        Ok(GuardTable { relations })
    }

    /// Index of the unique rule whose guard holds for `tuple` (0-based) in `world`.
    fn rule_for(&self, rel: &CompiledRelation, world: &FiniteStructure, tuple: &[usize]) -> Result<usize> {
        if rel.rules.len() == 1 && rel.rules[0].guard.is_none() {
            return Ok(0);
        }
        let mut found = None;
        for (i, rule) in rel.rules.iter().enumerate() {
            let holds = match &rule.guard {
                None => true,
                Some(g) => {
                    let args: Vec<usize> = rule.positions.iter().map(|&p| tuple[p]).collect();
                    g.eval_tuple(world, &args)
                }
            };
            if holds {
                if found.is_some() {
                    return Err(Error::Network(format!("two guards of `{}` hold for {:?}", rel.name, one_based(tuple))));
                }
                found = Some(i);
            }
        }
        found.ok_or_else(|| Error::Network(format!("no guard of `{}` holds for {:?}", rel.name, one_based(tuple))))
    }

    /// Exact probability of `world`.
    pub fn world_probability(&self, world: &FiniteStructure) -> Result<Rational> {
        let n = world.n();
        let mut p = one();
        for rel in &self.relations {
            for t in 0..n.pow(rel.arity as u32) {
                let tuple = decode(t, n, rel.arity);
                let rule = &rel.rules[self.rule_for(rel, world, &tuple)?];
                if world.holds_index(rel.index, &tuple) {
                    p *= &rule.prob;
                } else {
                    p *= &rule.one_minus;
                }
                if p.is_zero() {
                    return Ok(p);
                }
            }
        }
        Ok(p)
    }

    /// Draws a world: relations parent-first, tuples in lexicographic order,
    /// one 64-bit word per tuple from a ChaCha8 stream keyed by the relation.
    pub fn sample(&self, sig: &crate::formula::Signature, n: usize, seed: u64) -> Result<FiniteStructure> {
        let mut world = FiniteStructure::empty(sig, n);
        for rel in &self.relations {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rel.index as u64);
            for t in 0..n.pow(rel.arity as u32) {
                let tuple = decode(t, n, rel.arity);
                let rule = &rel.rules[self.rule_for(rel, &world, &tuple)?];
                let u = rng.next_u64() as u128;
                if u < rule.threshold {
                    world.set_index(rel.index, &tuple, true);
                }
            }
        }
        Ok(world)
    }
}

fn one_based(tuple: &[usize]) -> Vec<usize> {
    tuple.iter().map(|e| e + 1).collect()
}

/// Number of atoms of a world of size `n`.
pub fn atom_bits(net: &LiftedNetwork, n: usize) -> usize {
    net.sig().iter().map(|(_, a)| n.pow(a as u32)).sum()
}

fn check_cap(net: &LiftedNetwork, n: usize, cap: usize) -> Result<usize> {
    let bits = atom_bits(net, n);
    if bits > cap || bits >= 64 {
        return Err(Error::WorldCapExceeded { bits, cap });
    }
    Ok(bits)
}

pub fn world_probability(net: &LiftedNetwork, world: &FiniteStructure) -> Result<Rational> {
    if world.sig() != net.sig() {
        return Err(Error::Signature(format!("world over {} but network over {}", world.sig(), net.sig())));
    }
    GuardTable::new(net)?.world_probability(world)
}

/// Probability of every world of size `n`, indexed by its atom mask
/// (relations by name, tuples lexicographically, first atom least significant).
pub fn world_distribution(net: &LiftedNetwork, n: usize, cap: usize) -> Result<Vec<Rational>> {
    let bits = check_cap(net, n, cap)?;
    let table = GuardTable::new(net)?;
    (0u64..1 << bits)
        .into_par_iter()
        .map(|mask| table.world_probability(&structure_from_mask(net.sig(), n, mask)))
        .collect()
}

/// Exact `P_n(f(asg))` by enumerating all worlds.
pub fn exact_probability(net: &LiftedNetwork, n: usize, f: &Formula, asg: &Assignment, cap: usize) -> Result<Rational> {
    let bits = check_cap(net, n, cap)?;
    let table = GuardTable::new(net)?;
    let compiled = Compiled::new(f, net.sig())?;
    // Surface unassigned variables before fanning out.
    compiled.eval(&FiniteStructure::empty(net.sig(), n), asg)?;
    (0u64..1 << bits)
        .into_par_iter()
        .try_fold(Rational::zero, |acc, mask| {
            let world = structure_from_mask(net.sig(), n, mask);
            if compiled.eval(&world, asg)? {
                Ok(acc + table.world_probability(&world)?)
            } else {
                Ok(acc)
            }
        })
        .try_reduce(Rational::zero, |a, b| Ok(a + b))
}

pub fn sample(net: &LiftedNetwork, n: usize, seed: u64) -> Result<FiniteStructure> {
    GuardTable::new(net)?.sample(net.sig(), n, seed)
}

/// SplitMix64 finalizer, used to derive independent per-sample seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `i`-th sample of a run seeded with `seed`.
pub fn sample_seed(seed: u64, i: u64) -> u64 {
    splitmix64(seed ^ splitmix64(i))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub half_width_95: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Monte-Carlo estimate of `P_n(f(asg))` with a normal-approximation 95% half-width.
pub fn estimate_probability(
    net: &LiftedNetwork,
    n: usize,
    f: &Formula,
    asg: &Assignment,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::Structure("at least one sample is required".into()));
    }
    let table = GuardTable::new(net)?;
    let compiled = Compiled::new(f, net.sig())?;
    compiled.eval(&FiniteStructure::empty(net.sig(), n), asg)?;
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let world = table.sample(net.sig(), n, sample_seed(seed, i))?;
            Ok(u64::from(compiled.eval(&world, asg)?))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p = hits as f64 / samples as f64;
    Ok(Estimate { estimate: p, half_width_95: 1.96 * (p * (1.0 - p) / samples as f64).sqrt(), hits, samples })
}

/// Fraction of sampled worlds in which `f` holds for every assignment of its free variables.
pub fn sampled_universal_rate(net: &LiftedNetwork, n: usize, f: &Formula, samples: u64, seed: u64) -> Result<f64> {
    let free: Vec<Var> = f.free_var_list();
    let closed = if free.is_empty() { f.clone() } else { Formula::exists(&free, f.clone().negate()).negate() };
    Ok(estimate_probability(net, n, &closed, &Assignment::new(), samples, seed)?.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse;
    use crate::rational::rat;

    #[test]
    fn pq_single_world() {
        let net = fixtures::pq();
        let w = FiniteStructure::from_tuples(net.sig(), 1, [("P", vec![vec![1]]), ("Q", vec![vec![1]])]).unwrap();
        assert_eq!(world_probability(&net, &w).unwrap(), rat(3, 8));
    }

    #[test]
    fn coin_worlds_are_uniform() {
        let d = world_distribution(&fixtures::coin(), 2, DEFAULT_CAP_BITS).unwrap();
        assert_eq!(d, vec![rat(1, 4); 4]);
    }

    #[test]
    fn certain_relation() {
        let net = fixtures::certain();
        let w = FiniteStructure::empty(net.sig(), 1);
        assert_eq!(world_probability(&net, &w).unwrap(), rat(0, 1));
    }

    #[test]
    fn exact_examples() {
        let coin = fixtures::coin();
        let f = parse("exists x : P(x)", coin.sig()).unwrap();
        assert_eq!(exact_probability(&coin, 2, &f, &Assignment::new(), 24).unwrap(), rat(3, 4));
        let pq = fixtures::pq();
        let q = parse("Q(x)", pq.sig()).unwrap();
        assert_eq!(exact_probability(&pq, 1, &q, &Assignment::new().with("x", 1), 24).unwrap(), rat(1, 2));
        let graph = fixtures::graph();
        let g = parse("exists x : exists y : (x!=y & R(x,y) & ~R(y,x))", graph.sig()).unwrap();
        assert_eq!(exact_probability(&graph, 3, &g, &Assignment::new(), 24).unwrap(), rat(7, 8));
    }

    #[test]
    fn cap_and_assignment_errors() {
        let graph = fixtures::graph();
        let g = parse("R(x,x)", graph.sig()).unwrap();
        assert_eq!(
            exact_probability(&graph, 5, &g, &Assignment::new().with("x", 1), 24),
            Err(Error::WorldCapExceeded { bits: 25, cap: 24 })
        );
        assert_eq!(exact_probability(&graph, 2, &g, &Assignment::new(), 24), Err(Error::UnassignedVariable("x".into())));
    }

    #[test]
    fn sampling_is_deterministic() {
        let net = fixtures::exists_guard();
        assert_eq!(sample(&net, 7, 42).unwrap(), sample(&net, 7, 42).unwrap());
        assert_ne!(sample(&net, 7, 42).unwrap(), sample(&net, 7, 43).unwrap());
    }

    #[test]
    fn coin_frequency_concentrates() {
        let w = sample(&fixtures::coin(), 10_000, 7).unwrap();
        let freq = w.tuples("P").len() as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.02, "{freq}");
    }

    #[test]
    fn pq_conditional_frequency() {
        let w = sample(&fixtures::pq(), 10_000, 11).unwrap();
        let p: Vec<Vec<usize>> = w.tuples("P");
        let with_q = p.iter().filter(|t| w.holds("Q", t)).count();
        let freq = with_q as f64 / p.len() as f64;
        assert!((freq - 0.75).abs() < 0.03, "{freq}");
    }

    #[test]
    fn trivial_estimates() {
        let net = fixtures::pq();
        let top = estimate_probability(&net, 3, &Formula::Top, &Assignment::new(), 100, 1).unwrap();
        assert_eq!((top.estimate, top.half_width_95), (1.0, 0.0));
        let never = parse("x!=x", net.sig()).unwrap();
        let e = estimate_probability(&net, 3, &never, &Assignment::new().with("x", 1), 100, 1).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn estimate_matches_exact() {
        let coin = fixtures::coin();
        let f = parse("exists x : P(x)", coin.sig()).unwrap();
        let e = estimate_probability(&coin, 2, &f, &Assignment::new(), 100_000, 5).unwrap();
        assert!((e.estimate - 0.75).abs() < 0.01, "{e:?}");
    }

    #[test]
    fn mu_one_always_fires() {
        let w = sample(&fixtures::certain(), 50, 3).unwrap();
        assert_eq!(w.tuples("P").len(), 50);
    }
}
