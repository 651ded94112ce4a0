//! Residual subproblems shared by the branch-and-bound searches.
//!
//! A [`Node`] fixes the decision of some SCs and tracks what is left of each
//! limit. [`Active`] selects which aggregate limits the search enforces: the
//! relaxed problem drops the backhaul and link-count limits.

use crate::lp::{self, LpStatus};
use crate::model::{fits, ProblemInstance};

const INTEGRAL_EPS: f64 = 1e-9;
/// Absolute slack (in units of the largest rate) added to LP bounds to absorb
/// simplex round-off.
const LP_SLACK: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Active {
    pub backhaul: bool,
    pub links: bool,
}

impl Active {
    pub const ALL: Self = Self {
        backhaul: true,
        links: true,
    };
    pub const RELAXED: Self = Self {
        backhaul: false,
        links: false,
    };
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    /// `None`: undecided. `Some(None)`: left unassociated.
    pub decided: Vec<Option<Option<usize>>>,
    pub fixed_rate: f64,
    pub bandwidth_left: Vec<f64>,
    pub links_left: Vec<usize>,
    pub rate_left: f64,
}

impl Node {
    pub fn root(instance: &ProblemInstance) -> Self {
        let l = instance.limits();
        Self {
            decided: vec![None; instance.n_sc()],
            fixed_rate: 0.0,
            bandwidth_left: l.nfp_bandwidth.clone(),
            links_left: l.nfp_links.clone(),
            rate_left: l.backhaul_rate,
        }
    }

    pub fn free(&self) -> impl Iterator<Item = usize> + '_ {
        self.decided.iter().enumerate().filter(|(_, d)| d.is_none()).map(|(i, _)| i)
    }

    /// Pair `(i, j)` can still be added under the active limits.
    pub fn admits(&self, instance: &ProblemInstance, active: Active, i: usize, j: usize) -> bool {
        instance.qos_ok(i, j)
            && fits(instance.bandwidth(i, j), self.bandwidth_left[j])
            && (!active.links || self.links_left[j] > 0)
            && (!active.backhaul || fits(instance.rate(i, j), self.rate_left))
    }

    pub fn child(&self, instance: &ProblemInstance, i: usize, choice: Option<usize>) -> Self {
        let mut c = self.clone();
        c.decided[i] = Some(choice);
        if let Some(j) = choice {
            c.fixed_rate += instance.rate(i, j);
            c.bandwidth_left[j] = (c.bandwidth_left[j] - instance.bandwidth(i, j)).max(0.0);
            c.links_left[j] = c.links_left[j].saturating_sub(1);
            c.rate_left = (c.rate_left - instance.rate(i, j)).max(0.0);
        }
        c
    }

    /// Decisions with undecided SCs mapped through `rest`.
    pub fn complete(&self, rest: impl Fn(usize) -> Option<usize>) -> Vec<Option<usize>> {
        self.decided
            .iter()
            .enumerate()
            .map(|(i, d)| d.unwrap_or_else(|| rest(i)))
            .collect()
    }

    /// Σ over free SCs of their best admissible rate, capped by the
    /// remaining backhaul when active.
    pub fn rate_sum_bound(&self, instance: &ProblemInstance, active: Active) -> f64 {
        let sum: f64 = self
            .free()
            .map(|i| {
                (0..instance.n_d())
                    .filter(|&j| self.admits(instance, active, i, j))
                    .map(|j| instance.rate(i, j))
                    .fold(0.0, f64::max)
            })
            .sum();
        if active.backhaul {
            sum.min(self.rate_left)
        } else {
            sum
        }
    }
}

/// Rounds a bound down to the rate grid, when the instance has one.
pub(crate) fn snap_bound(bound: f64, granularity: Option<f64>) -> f64 {
    match granularity {
        Some(g) => (bound / g + 1e-9).floor() * g,
        None => bound,
    }
}

pub(crate) struct LpBound {
    /// Optimum of the residual LP, not including the node's fixed rate.
    pub value: f64,
    pub pairs: Vec<(usize, usize)>,
    pub x: Vec<f64>,
}

impl LpBound {
    /// Binary completion when every variable is integral.
    pub fn integral_choices(&self) -> Option<Vec<(usize, usize)>> {
        let mut ones = Vec::new();
        for (&p, &v) in self.pairs.iter().zip(&self.x) {
            if v > 1.0 - INTEGRAL_EPS {
                ones.push(p);
            } else if v > INTEGRAL_EPS {
                return None;
            }
        }
        Some(ones)
    }

    /// Fractional SC with the largest rate; ties go to the lower index.
    pub fn branching_sc(&self, instance: &ProblemInstance) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (&(i, j), &v) in self.pairs.iter().zip(&self.x) {
            if v > INTEGRAL_EPS && v < 1.0 - INTEGRAL_EPS {
                let r = instance.rate(i, j);
                let better = match best {
                    None => true,
                    Some((bi, br)) => r > br || (r == br && i < bi),
                };
                if better {
                    best = Some((i, r));
                }
            }
        }
        best.map(|(i, _)| i)
    }
}

/// LP relaxation of the residual subproblem. With `binary_filter`, pairs that
/// no binary completion can use (demand above what is left) are dropped first.
/// `None` when the simplex does not reach optimality.
pub(crate) fn lp_bound(instance: &ProblemInstance, active: Active, node: &Node, binary_filter: bool) -> Option<LpBound> {
    let n_d = instance.n_d();
    let usable = |i: usize, j: usize| {
        if binary_filter {
            node.admits(instance, active, i, j)
        } else {
            instance.qos_ok(i, j) && (!active.links || node.links_left[j] > 0)
        }
    };
    let pairs: Vec<(usize, usize)> = node
        .free()
        .flat_map(|i| (0..n_d).map(move |j| (i, j)))
        .filter(|&(i, j)| usable(i, j))
        .collect();
    if pairs.is_empty() {
        return Some(LpBound {
            value: 0.0,
            pairs,
            x: Vec::new(),
        });
    }
    let n = pairs.len();
    let c: Vec<f64> = pairs.iter().map(|&(i, j)| instance.rate(i, j)).collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();

    let mut row_of_sc = vec![usize::MAX; instance.n_sc()];
    for (k, &(i, _)) in pairs.iter().enumerate() {
        if row_of_sc[i] == usize::MAX {
            row_of_sc[i] = rows.len();
            rows.push(vec![0.0; n]);
            rhs.push(1.0);
        }
        rows[row_of_sc[i]][k] = 1.0;
    }
    for j in 0..n_d {
        let members: Vec<usize> = (0..n).filter(|&k| pairs[k].1 == j).collect();
        if members.is_empty() {
            continue;
        }
        let demand: f64 = members.iter().map(|&k| instance.bandwidth(pairs[k].0, j)).sum();
        if demand > node.bandwidth_left[j] {
            let mut row = vec![0.0; n];
            for &k in &members {
                row[k] = instance.bandwidth(pairs[k].0, j);
            }
            rows.push(row);
            rhs.push(node.bandwidth_left[j]);
        }
        if active.links && members.len() > node.links_left[j] {
            let mut row = vec![0.0; n];
            for &k in &members {
                row[k] = 1.0;
            }
            rows.push(row);
            rhs.push(node.links_left[j] as f64);
        }
    }
    if active.backhaul {
        let best_total: f64 = c.iter().sum();
        if best_total > node.rate_left {
            rows.push(c.clone());
            rhs.push(node.rate_left);
        }
    }

    let out = lp::maximize(&c, &rows, &rhs);
    if out.status != LpStatus::Optimal {
        return None;
    }
    let scale = c.iter().fold(0.0f64, |m, v| m.max(*v));
    let x: Vec<f64> = out.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Some(LpBound {
        value: out.objective + LP_SLACK * scale,
        pairs,
        x,
    })
}

/// Capacity-relaxed assignment of the free SCs of `node`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct NodeRelaxation {
    pub best_nfp: Vec<Option<usize>>,
    pub u0: f64,
    pub overload: Vec<f64>,
    pub lists: Vec<Vec<usize>>,
}

impl NodeRelaxation {
    pub fn violating(&self) -> Vec<usize> {
        (0..self.overload.len()).filter(|&j| self.overload[j] > 0.0 && !self.lists[j].is_empty()).collect()
    }
}

/// Admissible NFPs of SC `i`, best first: larger rate, then smaller
/// bandwidth, then lower index.
pub(crate) fn ranked_nfps(instance: &ProblemInstance, active: Active, node: &Node, i: usize) -> Vec<usize> {
    let mut js: Vec<usize> = (0..instance.n_d()).filter(|&j| node.admits(instance, active, i, j)).collect();
    js.sort_by(|&a, &b| {
        instance
            .rate(i, b)
            .total_cmp(&instance.rate(i, a))
            .then(instance.bandwidth(i, a).total_cmp(&instance.bandwidth(i, b)))
            .then(a.cmp(&b))
    });
    js
}

pub(crate) fn relax_node(instance: &ProblemInstance, active: Active, node: &Node) -> NodeRelaxation {
    let n_d = instance.n_d();
    let mut best_nfp = vec![None; instance.n_sc()];
    let mut lists = vec![Vec::new(); n_d];
    let mut load = vec![0.0; n_d];
    let mut u0 = 0.0;
    for i in node.free() {
        if let Some(&j) = ranked_nfps(instance, active, node, i).first() {
            best_nfp[i] = Some(j);
            lists[j].push(i);
            load[j] += instance.bandwidth(i, j);
            u0 += instance.rate(i, j);
        }
    }
    let overload = (0..n_d)
        .map(|j| {
            let o = load[j] - node.bandwidth_left[j];
            if fits(load[j], node.bandwidth_left[j]) {
                o.min(0.0)
            } else {
                o
            }
        })
        .collect();
    NodeRelaxation {
        best_nfp,
        u0,
        overload,
        lists,
    }
}

/// Cost of moving SC `i` off its relaxed choice: the drop to its second-best
/// admissible rate, or its whole rate when no alternative exists.
pub(crate) fn node_penalty(instance: &ProblemInstance, active: Active, node: &Node, i: usize) -> f64 {
    let ranked = ranked_nfps(instance, active, node, i);
    match ranked.as_slice() {
        [] => 0.0,
        [only] => instance.rate(i, *only),
        [first, second, ..] => instance.rate(i, *first) - instance.rate(i, *second),
    }
}
