mod common;

use num_traits::Zero;
use rayon::prelude::*;

use tap_core::decompose::{
    cover_heavy_edges, decompose, gamma_for, heavy_core, is_gamma_light, partial_separation_oracle, reduce_to_k_wide,
    split_decomposition, zeta_for, ExactInner, OracleOutcome, Subtree,
};
use tap_core::exact::brute_force_opt;
use tap_core::harness::{generate, Family, GenParams, LinkMode};
use tap_core::instance::{is_k_wide, shadow_complete};
use tap_core::lp::{build_cut_lp, solve_lp};
use tap_core::rounding::RoundingInner;
use tap_core::scalar::{int, rat};
use tap_core::{LinkSet, Radical, Rational, TapInstance, Tree};

use common::*;

fn path(n: usize, pairs: &[(usize, usize)]) -> TapInstance {
    TapInstance::unit(Tree::new(n, (1..n).map(|v| (v - 1, v)).collect(), None).unwrap(), pairs).unwrap()
}

fn random_closed(seed: u64, n: usize) -> TapInstance {
    let links = if seed % 2 == 0 { LinkMode::Density { p: 0.3 } } else { LinkMode::LeafPairs };
    shadow_complete(&generate(&GenParams { links, ..GenParams::new(Family::RandomTree, n) }, seed).unwrap())
}

/// Light by the definition: x(cov e) ≤ γ·min over both sides of the mass of
/// links touching that side but not crossing e.
fn light_by_definition(inst: &TapInstance, x: &[Rational], sub: &Subtree, e: usize, gamma_sq: &Rational) -> bool {
    let masks = link_masks(inst);
    let sub_mask = sub.edges.ones().fold(0u64, |m, f| m | 1 << f);
    let (a, b) = inst.tree().edge(e);
    let side_mask = |start: usize| {
        // edges of the subtree reachable from `start` without using e
        let mut mask = 0u64;
        let mut stack = vec![start];
        let mut seen = vec![false; inst.n()];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for (f, &(p, q)) in inst.tree().edges().iter().enumerate() {
                if f == e || sub_mask >> f & 1 == 0 || (p != v && q != v) {
                    continue;
                }
                let w = if p == v { q } else { p };
                mask |= 1 << f;
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        mask
    };
    let mass = |side: u64| -> Rational {
        (0..inst.link_count()).filter(|&id| masks[id] >> e & 1 == 0 && masks[id] & side != 0).map(|id| x[id].clone()).sum()
    };
    let cov: Rational = (0..inst.link_count()).filter(|&id| masks[id] >> e & 1 == 1).map(|id| x[id].clone()).sum();
    let m = mass(side_mask(a)).min(mass(side_mask(b)));
    &cov * &cov <= gamma_sq * &m * &m
}

#[test]
fn light_examples() {
    let inst = path(3, &[(0, 1), (1, 2)]);
    let whole = Subtree::whole(inst.tree());
    // edge 0−1: covered once, far side of the leaf is empty
    assert!(!is_gamma_light(&inst, &[int(1), int(1)], &whole, 0, &gamma_for(1)));
    assert!(is_gamma_light(&inst, &[int(0), int(1)], &whole, 0, &gamma_for(4)));
}

#[test]
fn light_matches_definition() {
    for seed in 0..25 {
        let inst = random_closed(seed, 8);
        let x = solve_lp(&build_cut_lp(&inst)).unwrap().x;
        let whole = Subtree::whole(inst.tree());
        for e in 0..inst.tree().edge_count() {
            assert_eq!(
                is_gamma_light(&inst, &x, &whole, e, &gamma_for(4)),
                light_by_definition(&inst, &x, &whole, e, &rat(1, 4)),
                "seed {seed} edge {e}"
            );
        }
    }
}

#[test]
fn split_at_the_only_light_edge() {
    // two paths 0..4 and 5..9 joined by edge 4−5, crossed only by {3,6}
    let inst = path(10, &[(0, 4), (5, 9), (3, 6)]);
    let x = vec![int(1), int(1), int(1)];
    let d = split_decomposition(&inst, &x, 1).unwrap();
    assert_eq!(d.split_edges, vec![4]);
    assert_eq!(d.subtrees.len(), 2);
    d.check(&inst, &x).unwrap();

    let none = path(3, &[(0, 2)]);
    let d = split_decomposition(&none, &[int(1)], 2).unwrap();
    assert_eq!(d.subtrees.len(), 1);
    assert!(d.split_edges.is_empty());
}

#[test]
fn split_postconditions_on_random_lps() {
    for seed in 0..40 {
        let k = 1 + seed as usize % 5;
        let inst = random_closed(seed, 6 + seed as usize % 8);
        let x = solve_lp(&build_cut_lp(&inst)).unwrap().x;
        let d = split_decomposition(&inst, &x, k).unwrap();
        d.check(&inst, &x).unwrap();
        let mut seen = inst.tree().empty_edge_set();
        for s in &d.subtrees {
            assert!(seen.is_disjoint(&s.edges));
            seen.union_with(&s.edges);
            for e in s.edges.ones() {
                assert!(!is_gamma_light(&inst, &x, s, e, &gamma_for(k)), "seed {seed}: light edge left");
            }
        }
        assert_eq!(seen, inst.tree().full_edge_set());
        let total: Rational = x.iter().sum();
        let split: Rational = d.split_edges.iter().map(|&e| inst.cov(e).iter().map(|&id| &x[id]).sum::<Rational>()).sum();
        assert!(le_sqrt_times(&split, 1, k as i64, &total));
    }
}

#[test]
fn heavy_core_extremes() {
    let inst = path(4, &[(0, 3)]);
    let whole = Subtree::whole(inst.tree());
    // ζ = √4/4 = 1/2: every edge with mass 1 is heavy
    let c = heavy_core(&inst, &[int(1)], &whole, 4);
    assert_eq!(c.edges, inst.tree().full_edge_set());
    // ζ = √64/4 = 2: nothing is heavy
    let c = heavy_core(&inst, &[int(1)], &whole, 64);
    assert!(c.edges.is_clear());
}

#[test]
fn heavy_core_root_is_a_source() {
    for seed in 0..30 {
        let inst = random_closed(seed, 9);
        let x = solve_lp(&build_cut_lp(&inst)).unwrap().x;
        let d = decompose(&inst, &x, 25).unwrap();
        for (i, s) in d.subtrees.iter().enumerate() {
            let r = d.core_roots[i];
            assert!(s.vertices.contains(&r));
            for e in d.cores[i].ones() {
                assert!(edge_mass_at_least(&inst, &x, e, &zeta_for(25)));
            }
        }
    }
}

fn edge_mass_at_least(inst: &TapInstance, x: &[Rational], e: usize, zeta: &Radical) -> bool {
    let m: Rational = inst.cov(e).iter().map(|&id| &x[id]).sum();
    zeta.scaled_at_most(&m, &Rational::from_integer(1.into()))
}

#[test]
fn heavy_cover_examples() {
    let inst = path(2, &[(0, 1)]);
    assert!(cover_heavy_edges(&inst, &[int(1)], &[inst.tree().empty_edge_set()], &zeta_for(4)).unwrap().is_empty());
    let m = cover_heavy_edges(&inst, &[int(1)], &[inst.tree().full_edge_set()], &zeta_for(4)).unwrap();
    assert_eq!(m, LinkSet::from([0]));
}

#[test]
fn oracle_simple_outcomes() {
    let inst = shadow_complete(&path(4, &[(0, 3)]));
    let zero = vec![int(0); inst.link_count()];
    let inner = ExactInner::default();
    assert!(matches!(partial_separation_oracle(&inst, &zero, &int(5), 2, &inner).unwrap(), OracleOutcome::Covering(_)));
    let ones = vec![int(1); inst.link_count()];
    let nu = int(inst.link_count() as i64 - 1);
    assert!(matches!(partial_separation_oracle(&inst, &ones, &nu, 2, &inner).unwrap(), OracleOutcome::Budget));
}

#[test]
fn oracle_never_cuts_an_optimum() {
    let runs: Vec<()> = (0..60u64)
        .into_par_iter()
        .map(|seed| {
            let k = [2, 17, 25][seed as usize % 3];
            let inst = random_closed(seed, 5 + seed as usize % 8);
            let opt = brute_force_opt(&inst, &inst.tree().full_edge_set()).unwrap();
            let y: Vec<Rational> =
                (0..inst.link_count()).map(|id| if opt.links.contains(&id) { int(1) } else { int(0) }).collect();
            let out = partial_separation_oracle(&inst, &y, &opt.value, k, &ExactInner::default()).unwrap();
            assert!(matches!(out, OracleOutcome::NotSeparated(_)), "seed {seed}: optimum separated");
        })
        .collect();
    assert_eq!(runs.len(), 60);
}

#[test]
fn reduction_single_edge() {
    let t = Tree::new(2, vec![(0, 1)], None).unwrap();
    let inst = TapInstance::new(t, vec![(0, 1, rat(3, 2))]).unwrap();
    let r = reduce_to_k_wide(&inst, 2, &ExactInner::default()).unwrap();
    assert_eq!(r.solution, LinkSet::from([0]));
}

#[test]
fn reduction_with_exact_inner_is_optimal_on_k_wide() {
    for seed in 0..30 {
        let gp = GenParams { k: 2, links: LinkMode::Density { p: 0.5 }, ..GenParams::new(Family::KWide, 6 + seed as usize % 7) };
        let inst = shadow_complete(&generate(&gp, seed).unwrap());
        assert!(is_k_wide(inst.tree(), inst.tree().root().unwrap_or(0), 2));
        let r = reduce_to_k_wide(&inst, 2, &ExactInner::default()).unwrap();
        let opt = brute_force_opt(&inst, &inst.tree().full_edge_set()).unwrap().value;
        assert!(naive_covers(&inst, &r.solution));
        assert_eq!(inst.total_cost(&r.solution), opt, "seed {seed}");
    }
}

#[test]
fn reduction_with_rounding_inner_k9() {
    let ratios: Vec<f64> = (1..=200u64)
        .into_par_iter()
        .map(|seed| {
            let inst = random_closed(seed, 5 + seed as usize % 8);
            let r = reduce_to_k_wide(&inst, 9, &RoundingInner::default()).unwrap();
            assert!(naive_covers(&inst, &r.solution), "seed {seed}");
            let opt = brute_force_opt(&inst, &inst.tree().full_edge_set()).unwrap().value;
            let cost = inst.total_cost(&r.solution);
            assert!(!opt.is_zero());
            num_traits::ToPrimitive::to_f64(&(cost / opt)).unwrap()
        })
        .collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    println!("k = 9 reduction, 200 runs: max ratio {max:.4}");
    assert!(max <= 1.5 + 2.0 / 3.0);
}
