mod common;

use tap_core::exact::{brute_force_opt, complete_cross_set, shadow_minimalize, solve_few_leaf};
use tap_core::harness::{generate, Family, GenParams, LinkMode};
use tap_core::instance::{is_shadow_minimal, shadow_complete, Rooted};
use tap_core::lp::LambdaFamily;
use tap_core::scalar::int;
use tap_core::{Limits, LinkSet, Rational, TapError, TapInstance, Tree};

use common::*;

fn path3(pairs: &[(usize, usize)]) -> TapInstance {
    TapInstance::unit(Tree::new(3, vec![(0, 1), (1, 2)], None).unwrap(), pairs).unwrap()
}

#[test]
fn brute_force_examples() {
    let inst = path3(&[(0, 1), (1, 2), (0, 2)]);
    let s = brute_force_opt(&inst, &inst.tree().full_edge_set()).unwrap();
    assert_eq!(s.value, int(1));
    assert_eq!(s.links, LinkSet::from([inst.link_id(0, 2).unwrap()]));
    let none = brute_force_opt(&inst, &inst.tree().empty_edge_set()).unwrap();
    assert_eq!(none.value, int(0));
    assert!(none.links.is_empty());

    let star = generate(&GenParams::new(Family::GapFamily, 4), 0).unwrap();
    assert_eq!(brute_force_opt(&star, &star.tree().full_edge_set()).unwrap().value, int(2));
}

#[test]
fn brute_force_matches_subset_enumeration() {
    for seed in 0..60 {
        let n = 4 + seed as usize % 7;
        let delta = if seed % 3 == 0 { Some(4) } else { None };
        let gp = GenParams { links: LinkMode::Density { p: 0.3 }, delta, ..GenParams::new(Family::RandomTree, n) };
        let inst = generate(&gp, seed).unwrap();
        if inst.link_count() > 18 {
            continue;
        }
        let s = brute_force_opt(&inst, &inst.tree().full_edge_set()).unwrap();
        assert_eq!(s.value, naive_opt(&inst), "seed {seed}");
        assert!(naive_covers(&inst, &s.links));
        assert_eq!(inst.total_cost(&s.links), s.value);
    }
}

#[test]
fn infeasible_target_and_size_limit() {
    let t = Tree::new(3, vec![(0, 1), (1, 2)], None).unwrap();
    let inst = TapInstance::unit(t, &[(0, 1)]).unwrap();
    let err = brute_force_opt(&inst, &inst.tree().full_edge_set()).unwrap_err();
    assert!(matches!(err, TapError::Infeasible(_)));
    assert_eq!(err.exit_code(), 2);

    let n = Limits::default().exact_max_vertices + 1;
    let big = generate(&GenParams::new(Family::Path, n), 0).unwrap();
    let err = brute_force_opt(&big, &big.tree().full_edge_set()).unwrap_err();
    assert!(matches!(err, TapError::SizeLimit { .. }));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn shadow_minimalize_examples() {
    let inst = shadow_complete(&path3(&[(0, 2), (0, 1)]));
    let ac = inst.link_id(0, 2).unwrap();
    let ab = inst.link_id(0, 1).unwrap();
    let out = shadow_minimalize(&inst, &LinkSet::from([ac, ab])).unwrap();
    assert_eq!(out.len(), 2);
    assert!(is_shadow_minimal(&inst, &out));
    assert_eq!(inst.covered_edges(&out), inst.covered_edges(&LinkSet::from([ac, ab])));
    assert_eq!(shadow_minimalize(&inst, &out).unwrap(), out);
}

#[test]
fn shadow_minimalize_random() {
    for seed in 0..40 {
        let gp = GenParams { links: LinkMode::Density { p: 0.3 }, ..GenParams::new(Family::RandomTree, 9) };
        let inst = shadow_complete(&generate(&gp, seed).unwrap());
        let sol: LinkSet = (0..inst.link_count()).filter(|id| (id * 7 + seed as usize) % 3 == 0).collect();
        let out = shadow_minimalize(&inst, &sol).unwrap();
        assert!(is_shadow_minimal(&inst, &out));
        assert_eq!(inst.covered_edges(&out), inst.covered_edges(&sol), "seed {seed}");
        assert!(inst.total_cost(&out) <= inst.total_cost(&sol));
        assert_eq!(shadow_minimalize(&inst, &out).unwrap(), out);
    }
}

#[test]
fn few_leaf_examples() {
    let inst = path3(&[(0, 1), (1, 2), (0, 2)]);
    let mut contracted = inst.tree().full_edge_set();
    assert_eq!(solve_few_leaf(&inst, &contracted).unwrap().value, int(0));
    contracted.set(1, false);
    let s = solve_few_leaf(&inst, &contracted).unwrap();
    assert_eq!(s.value, int(1));
    assert!(s.links.iter().all(|&id| inst.covers(id, 1)));
}

#[test]
fn few_leaf_matches_enumeration() {
    for seed in 0..30 {
        let gp = GenParams {
            links: LinkMode::Density { p: 0.35 },
            delta: Some(3),
            ..GenParams::new(Family::Caterpillar, 6 + seed as usize % 3)
        };
        let inst = generate(&gp, seed).unwrap();
        if inst.link_count() > 18 {
            continue;
        }
        let contracted = inst.tree().empty_edge_set();
        match solve_few_leaf(&inst, &contracted) {
            Ok(s) => assert_eq!(s.value, naive_opt(&inst), "seed {seed}"),
            Err(e) => assert!(matches!(e, TapError::SizeLimit { .. })),
        }
    }
}

/// Cheapest C ⊆ links inside V_i with R ∪ C covering E_i and shadow-minimal.
fn inside_links(inst: &TapInstance, rooted: &Rooted, i: usize) -> Vec<usize> {
    (0..inst.link_count())
        .filter(|&id| rooted.in_branch(inst.link(id).u, i) && rooted.in_branch(inst.link(id).v, i))
        .collect()
}

fn constrained_min(inst: &TapInstance, rooted: &Rooted, i: usize, r: &LinkSet) -> Option<Rational> {
    let inside = inside_links(inst, rooted, i);
    let target = rooted.branch_edges(i);
    let masks = link_masks(inst);
    let target_mask = target.ones().fold(0u64, |m, e| m | 1 << e);
    let base = r.iter().fold(0u64, |m, &id| m | masks[id]);
    let mut best: Option<Rational> = None;
    for s in 0usize..1 << inside.len() {
        let c: LinkSet = (0..inside.len()).filter(|j| s >> j & 1 == 1).map(|j| inside[j]).collect();
        let cov = c.iter().fold(base, |m, &id| m | masks[id]);
        if cov & target_mask != target_mask {
            continue;
        }
        let all: LinkSet = c.union(r).copied().collect();
        if !is_shadow_minimal(inst, &all) {
            continue;
        }
        let cost = inst.total_cost(&c);
        if best.as_ref().is_none_or(|b| cost < *b) {
            best = Some(cost);
        }
    }
    best
}

#[test]
fn complete_cross_set_examples() {
    // root 0 with one principal subtree 1−2
    let t = Tree::new(3, vec![(0, 1), (1, 2)], None).unwrap();
    let inst = shadow_complete(&TapInstance::unit(t, &[(0, 2)]).unwrap());
    let rooted = inst.tree().rooted(0).unwrap();
    let c = complete_cross_set(&inst, &rooted, 0, &LinkSet::new()).unwrap();
    assert_eq!(c, LinkSet::from([inst.link_id(0, 2).unwrap()]));

    // R already covering E_i
    let t = Tree::new(5, vec![(0, 1), (1, 2), (0, 3), (3, 4)], None).unwrap();
    let inst = shadow_complete(&TapInstance::unit(t, &[(2, 4)]).unwrap());
    let rooted = inst.tree().rooted(0).unwrap();
    let r = LinkSet::from([inst.link_id(2, 4).unwrap()]);
    assert!(complete_cross_set(&inst, &rooted, 0, &r).unwrap().is_empty());
}

#[test]
fn complete_cross_set_matches_constrained_search() {
    let mut checked = 0;
    for seed in 0..40 {
        let gp = GenParams { k: 2, links: LinkMode::Density { p: 0.4 }, ..GenParams::new(Family::KWide, 8) };
        let inst = shadow_complete(&generate(&gp, seed).unwrap());
        let rooted = inst.tree().rooted(0).unwrap();
        for i in 0..rooted.branch_count() {
            if inside_links(&inst, &rooted, i).len() > 16 {
                continue;
            }
            for r in LambdaFamily::cross_candidates(&inst, &rooted, i) {
                let r = LinkSet::from([r]);
                let want = constrained_min(&inst, &rooted, i, &r);
                match complete_cross_set(&inst, &rooted, i, &r) {
                    Ok(c) => {
                        let all: LinkSet = c.union(&r).copied().collect();
                        assert!(is_shadow_minimal(&inst, &all));
                        let cov = inst.covered_edges(&all);
                        assert!(rooted.branch_edges(i).is_subset(&cov));
                        assert_eq!(Some(inst.total_cost(&c)), want, "seed {seed} subtree {i}");
                        checked += 1;
                    }
                    Err(_) => assert_eq!(want, None, "seed {seed} subtree {i}: a completion exists"),
                }
            }
        }
    }
    assert!(checked > 20);
}
