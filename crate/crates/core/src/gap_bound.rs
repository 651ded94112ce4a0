//! Upper bounds from the generalized-assignment view of the relaxed problem.
//!
//! Dropping the backhaul and link-count limits leaves a GAP in which SCs may
//! stay unassigned. Relaxing the per-NFP bandwidth limit to a per-pair check
//! gives U0 (each SC takes its best admissible rate). Each overloaded NFP must
//! shed enough bandwidth, and moving an SC costs at least its penalty; the
//! cheapest cover per NFP is a min-knapsack, and subtracting those costs gives
//! U1. [`solve_relaxed_bnb`] closes the remaining gap by branch-and-bound.

use std::time::Instant;

use thiserror::Error;

use crate::greedy::solve_cmdms;
use crate::model::{fits, Limits, ProblemInstance, Solution, SolveStatus};
use crate::search::{lp_bound, node_penalty, ranked_nfps, relax_node, snap_bound, Active, Node};

pub const RELAXED_BNB_NAME: &str = "gap_bnb";
pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapBoundError {
    #[error("items cover {available} Hz but the overload is {overload} Hz")]
    Unsatisfiable { available: f64, overload: f64 },
}

/// Per-SC capacity-relaxed assignment of the relaxed problem.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxedAssignment {
    /// j(i); `None` when SC `i` has no admissible NFP.
    pub best_nfp: Vec<Option<usize>>,
    pub u0: f64,
    /// O_j, Hz. Values within tolerance of zero are reported as nonpositive.
    pub overload: Vec<f64>,
    /// L_j.
    pub lists: Vec<Vec<usize>>,
    /// M′.
    pub violating_nfps: Vec<usize>,
    /// L′, ascending.
    pub affected_scs: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnapsackItem {
    pub sc: usize,
    /// q_i, bps.
    pub penalty: f64,
    /// b_ij, Hz.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnapsackCover {
    /// v_j, bps.
    pub cost: f64,
    /// Selected SC indices, ascending.
    pub selected: Vec<usize>,
}

pub fn relaxed_assign(instance: &ProblemInstance) -> RelaxedAssignment {
    relaxed_at(instance, Active::RELAXED, &Node::root(instance))
}

fn relaxed_at(instance: &ProblemInstance, active: Active, node: &Node) -> RelaxedAssignment {
    let r = relax_node(instance, active, node);
    let violating_nfps = r.violating();
    let mut affected_scs: Vec<usize> = violating_nfps.iter().flat_map(|&j| r.lists[j].iter().copied()).collect();
    affected_scs.sort_unstable();
    RelaxedAssignment {
        best_nfp: r.best_nfp,
        u0: r.u0,
        overload: r.overload,
        lists: r.lists,
        violating_nfps,
        affected_scs,
    }
}

/// q_i for the relaxed problem.
pub fn penalty(instance: &ProblemInstance, relaxed: &RelaxedAssignment, i: usize) -> f64 {
    debug_assert!(relaxed.best_nfp[i].is_some());
    node_penalty(instance, Active::RELAXED, &Node::root(instance), i)
}

/// Exact min-cost cover: minimize Σ q_i y_i subject to Σ w_i y_i ≥ `overload`.
///
/// Dynamic program over the Pareto frontier of (covered weight, cost), with
/// covered weight capped at the overload.
pub fn min_knapsack(items: &[KnapsackItem], overload: f64) -> Result<KnapsackCover, GapBoundError> {
    if overload <= 0.0 {
        return Ok(KnapsackCover {
            cost: 0.0,
            selected: Vec::new(),
        });
    }
    let available: f64 = items.iter().map(|it| it.weight).sum();
    if !fits(overload, available) {
        return Err(GapBoundError::Unsatisfiable { available, overload });
    }
    let covers = |w: f64| fits(overload, w);

    // (weight, cost, selected item positions); weight ascending, cost strictly
    // ascending.
    let mut frontier: Vec<(f64, f64, Vec<usize>)> = vec![(0.0, 0.0, Vec::new())];
    for (k, item) in items.iter().enumerate() {
        let shifted = frontier.iter().map(|(w, c, s)| {
            let mut s = s.clone();
            s.push(k);
            ((w + item.weight).min(overload), c + item.penalty, s)
        });
        let mut merged: Vec<(f64, f64, Vec<usize>)> = frontier.iter().cloned().chain(shifted).collect();
        merged.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
        frontier.clear();
        let mut cheapest = f64::INFINITY;
        for state in merged {
            if state.1 < cheapest {
                cheapest = state.1;
                frontier.push(state);
            }
        }
        frontier.reverse();
    }
    let (_, cost, positions) = frontier
        .into_iter()
        .filter(|(w, _, _)| covers(*w))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("total weight covers the overload");
    let mut selected: Vec<usize> = positions.into_iter().map(|k| items[k].sc).collect();
    selected.sort_unstable();
    Ok(KnapsackCover { cost, selected })
}

/// U1 for the relaxed problem.
pub fn u1_bound(instance: &ProblemInstance) -> f64 {
    u1_at(instance, Active::RELAXED, &Node::root(instance), &relaxed_assign(instance))
}

fn u1_at(instance: &ProblemInstance, active: Active, node: &Node, relaxed: &RelaxedAssignment) -> f64 {
    let mut u1 = relaxed.u0;
    for &j in &relaxed.violating_nfps {
        let items: Vec<KnapsackItem> = relaxed.lists[j]
            .iter()
            .map(|&i| KnapsackItem {
                sc: i,
                penalty: node_penalty(instance, active, node, i),
                weight: instance.bandwidth(i, j),
            })
            .collect();
        // Removing all of L_j always clears the overload, so the cover exists.
        let cover = min_knapsack(&items, relaxed.overload[j]).expect("L_j covers its own overload");
        u1 -= cover.cost;
    }
    u1
}

/// U1 of the residual subproblem at `node` under `active` limits, excluding
/// the node's fixed rate.
pub(crate) fn residual_u1(instance: &ProblemInstance, active: Active, node: &Node) -> f64 {
    let relaxed = relaxed_at(instance, active, node);
    u1_at(instance, active, node, &relaxed)
}

pub fn solve_relaxed_bnb(instance: &ProblemInstance) -> Solution {
    solve_relaxed_bnb_with(instance, DEFAULT_NODE_CAP)
}

/// Exact optimum of the relaxed problem (bandwidth, SINR and row limits only).
///
/// Depth-first. Each node solves the capacity-relaxed assignment of its free
/// SCs; if no NFP is overloaded that assignment completes the node. Otherwise
/// the node is pruned when min(U1, LP bound) does not beat the incumbent, or
/// split on the affected SC with the largest penalty: one child per admissible
/// NFP by descending rate, then the unassigned child.
pub fn solve_relaxed_bnb_with(instance: &ProblemInstance, node_cap: u64) -> Solution {
    let start = Instant::now();
    let active = Active::RELAXED;
    let granularity = instance.rate_granularity();

    let relaxed_copy = instance
        .with_limits(relaxed_limits(instance))
        .expect("relaxed limits are valid");
    let warm = solve_cmdms(&relaxed_copy);
    let mut best_choices = warm.assignment.choices();
    let mut best_value = warm.sum_rate;

    let mut stack = vec![Node::root(instance)];
    let mut nodes: u64 = 0;
    let mut status = SolveStatus::Optimal;
    while let Some(node) = stack.pop() {
        if nodes >= node_cap {
            status = SolveStatus::NodeBudgetExceeded;
            break;
        }
        nodes += 1;
        let relaxed = relaxed_at(instance, active, &node);
        if relaxed.violating_nfps.is_empty() {
            let value = node.fixed_rate + relaxed.u0;
            if value > best_value {
                best_value = value;
                best_choices = node.complete(|i| relaxed.best_nfp[i]);
            }
            continue;
        }
        let mut bound = node.fixed_rate + u1_at(instance, active, &node, &relaxed);
        if let Some(lp) = lp_bound(instance, active, &node, true) {
            bound = bound.min(node.fixed_rate + lp.value);
        }
        if !beats(snap_bound(bound, granularity), best_value) {
            continue;
        }
        let sc = relaxed
            .affected_scs
            .iter()
            .copied()
            .map(|i| (i, node_penalty(instance, active, &node, i)))
            .fold(None, |acc: Option<(usize, f64)>, (i, q)| match acc {
                Some((_, bq)) if bq >= q => acc,
                _ => Some((i, q)),
            })
            .map(|(i, _)| i)
            .expect("an overloaded NFP has members");
        let mut children: Vec<Node> = ranked_nfps(instance, active, &node, sc)
            .into_iter()
            .map(|j| node.child(instance, sc, Some(j)))
            .collect();
        children.push(node.child(instance, sc, None));
        stack.extend(children.into_iter().rev());
    }

    Solution::from_choices(
        instance,
        &best_choices,
        RELAXED_BNB_NAME,
        start.elapsed().as_secs_f64(),
        nodes,
        status,
    )
}

/// True when a node bound can still improve on the incumbent.
pub(crate) fn beats(bound: f64, incumbent: f64) -> bool {
    bound > incumbent + crate::model::REL_TOL * incumbent.abs().max(1.0)
}

/// Limits with backhaul and link counts made non-binding.
pub(crate) fn relaxed_limits(instance: &ProblemInstance) -> Limits {
    let l = instance.limits();
    let total: f64 = (0..instance.n_sc())
        .map(|i| (0..instance.n_d()).map(|j| instance.rate(i, j)).fold(0.0, f64::max))
        .sum();
    Limits {
        backhaul_rate: 2.0 * total + 1.0,
        nfp_bandwidth: l.nfp_bandwidth.clone(),
        nfp_links: vec![instance.n_sc(); instance.n_d()],
        sinr_min: l.sinr_min,
    }
}
