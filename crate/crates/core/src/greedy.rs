//! Greedy association heuristics.
//!
//! Both algorithms rank SC–NFP pairs by the decision ratio `r_ij / b_ij`.
//! Equal ratios are broken toward the larger rate, then the lower SC index,
//! then the lower NFP index.
//!
//! - [`solve_mdmds`]: distributed three-step scheme. SCs request their best
//!   NFP, each NFP admits requests within its own limits, and a final
//!   central pass either fills remaining backhaul capacity or sheds the
//!   smallest-rate pairs until the backhaul limit holds.
//! - [`solve_cmdms`]: centralized single pass over the global candidate list
//!   that never exceeds the backhaul limit.

use std::cmp::Ordering;
use std::time::Instant;

use crate::model::{fits, ProblemInstance, Solution, SolveStatus};

pub const MDMDS_NAME: &str = "mdmds";
pub const CMDMS_NAME: &str = "cmdms";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub sc: usize,
    pub nfp: usize,
    pub ratio: f64,
    pub rate: f64,
    pub bandwidth: f64,
}

impl Candidate {
    fn new(instance: &ProblemInstance, sc: usize, nfp: usize) -> Self {
        Self {
            sc,
            nfp,
            ratio: instance.decision_ratio(sc, nfp),
            rate: instance.rate(sc, nfp),
            bandwidth: instance.bandwidth(sc, nfp),
        }
    }

    /// Priority order: `Less` means `self` goes first.
    pub fn priority(&self, other: &Self) -> Ordering {
        other
            .ratio
            .total_cmp(&self.ratio)
            .then(other.rate.total_cmp(&self.rate))
            .then(self.sc.cmp(&other.sc))
            .then(self.nfp.cmp(&other.nfp))
    }
}

/// QoS-feasible pairs in priority order.
#[derive(Clone, Debug, Default)]
pub struct CandidateList {
    pub entries: Vec<Candidate>,
}

impl CandidateList {
    /// All QoS-feasible pairs whose SC passes `keep_sc`.
    pub fn build(instance: &ProblemInstance, keep_sc: impl Fn(usize) -> bool) -> Self {
        let mut entries: Vec<Candidate> = (0..instance.n_sc())
            .filter(|&i| keep_sc(i))
            .flat_map(|i| (0..instance.n_d()).map(move |j| (i, j)))
            .filter(|&(i, j)| instance.qos_ok(i, j))
            .map(|(i, j)| Candidate::new(instance, i, j))
            .collect();
        entries.sort_by(Candidate::priority);
        Self { entries }
    }
}

/// Per-NFP link and bandwidth counters plus the total rate counter.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceCounters {
    pub links_used: Vec<usize>,
    pub bandwidth_used: Vec<f64>,
    pub rate_used: f64,
}

impl ResourceCounters {
    pub fn empty(n_d: usize) -> Self {
        Self {
            links_used: vec![0; n_d],
            bandwidth_used: vec![0.0; n_d],
            rate_used: 0.0,
        }
    }

    /// Counters recomputed by scanning an assignment.
    pub fn scan(instance: &ProblemInstance, choices: &[Option<usize>]) -> Self {
        let mut c = Self::empty(instance.n_d());
        for (i, choice) in choices.iter().enumerate() {
            if let Some(j) = *choice {
                c.add(&Candidate::new(instance, i, j));
            }
        }
        c
    }

    /// NFP still has a free link and unsaturated bandwidth.
    fn open(&self, instance: &ProblemInstance, j: usize) -> bool {
        let limits = instance.limits();
        self.links_used[j] < limits.nfp_links[j] && self.bandwidth_used[j] < limits.nfp_bandwidth[j]
    }

    fn fits_bandwidth(&self, instance: &ProblemInstance, c: &Candidate) -> bool {
        fits(self.bandwidth_used[c.nfp] + c.bandwidth, instance.limits().nfp_bandwidth[c.nfp])
    }

    fn fits_rate(&self, instance: &ProblemInstance, c: &Candidate) -> bool {
        fits(self.rate_used + c.rate, instance.limits().backhaul_rate)
    }

    fn add(&mut self, c: &Candidate) {
        self.links_used[c.nfp] += 1;
        self.bandwidth_used[c.nfp] += c.bandwidth;
        self.rate_used += c.rate;
    }

    fn remove(&mut self, c: &Candidate) {
        self.links_used[c.nfp] -= 1;
        self.bandwidth_used[c.nfp] -= c.bandwidth;
        self.rate_used -= c.rate;
    }
}

/// Central admission pass shared by CMDMS and the fill phase of M(DM)²S.
/// Walks `list` in priority order; pairs of saturated NFPs and of already
/// associated SCs are dropped, rejected pairs are dropped individually.
fn admit_in_order(
    instance: &ProblemInstance,
    list: &CandidateList,
    choices: &mut [Option<usize>],
    counters: &mut ResourceCounters,
    mut on_admit: impl FnMut(&ResourceCounters),
) {
    let backhaul = instance.limits().backhaul_rate;
    let mut nfp_closed = vec![false; instance.n_d()];
    for c in &list.entries {
        if counters.rate_used >= backhaul {
            break;
        }
        if choices[c.sc].is_some() || nfp_closed[c.nfp] {
            continue;
        }
        if !counters.open(instance, c.nfp) {
            nfp_closed[c.nfp] = true;
            continue;
        }
        if counters.fits_rate(instance, c) && counters.fits_bandwidth(instance, c) {
            choices[c.sc] = Some(c.nfp);
            counters.add(c);
            on_admit(counters);
        }
    }
}

/// Distributed three-step heuristic.
pub fn solve_mdmds(instance: &ProblemInstance) -> Solution {
    let start = Instant::now();
    let choices = mdmds_choices(instance);
    Solution::from_choices(
        instance,
        &choices,
        MDMDS_NAME,
        start.elapsed().as_secs_f64(),
        0,
        SolveStatus::Heuristic,
    )
}

fn mdmds_choices(instance: &ProblemInstance) -> Vec<Option<usize>> {
    let (n_sc, n_d) = (instance.n_sc(), instance.n_d());

    // Step 1: each SC requests its best QoS-feasible NFP.
    let mut requests: Vec<Vec<Candidate>> = vec![Vec::new(); n_d];
    for i in 0..n_sc {
        let best = (0..n_d)
            .filter(|&j| instance.qos_ok(i, j))
            .map(|j| Candidate::new(instance, i, j))
            .min_by(Candidate::priority);
        if let Some(c) = best {
            requests[c.nfp].push(c);
        }
    }

    // Step 2: every NFP admits its requesters independently.
    let mut choices: Vec<Option<usize>> = vec![None; n_sc];
    for (j, list) in requests.iter_mut().enumerate() {
        list.sort_by(Candidate::priority);
        let links_cap = instance.limits().nfp_links[j];
        let bandwidth_cap = instance.limits().nfp_bandwidth[j];
        let (mut links, mut bandwidth) = (0usize, 0.0f64);
        for c in list.iter() {
            if links >= links_cap || bandwidth >= bandwidth_cap {
                break;
            }
            if fits(bandwidth + c.bandwidth, bandwidth_cap) {
                choices[c.sc] = Some(j);
                links += 1;
                bandwidth += c.bandwidth;
            }
        }
    }

    // Step 3: reconcile with the backhaul limit.
    let mut counters = ResourceCounters::scan(instance, &choices);
    let backhaul = instance.limits().backhaul_rate;
    if counters.rate_used < backhaul {
        let unassociated: Vec<bool> = choices.iter().map(Option::is_none).collect();
        let list = CandidateList::build(instance, |i| unassociated[i]);
        admit_in_order(instance, &list, &mut choices, &mut counters, |_| {});
    }
    while !fits(counters.rate_used, backhaul) {
        let victim = choices
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|j| Candidate::new(instance, i, j)))
            .min_by(|a, b| {
                a.rate
                    .total_cmp(&b.rate)
                    .then(b.bandwidth.total_cmp(&a.bandwidth))
                    .then(a.sc.cmp(&b.sc))
            });
        let Some(v) = victim else { break };
        choices[v.sc] = None;
        counters.remove(&v);
    }
    choices
}

/// Centralized single-pass heuristic.
pub fn solve_cmdms(instance: &ProblemInstance) -> Solution {
    let start = Instant::now();
    let choices = cmdms_choices(instance, |_| {});
    Solution::from_choices(
        instance,
        &choices,
        CMDMS_NAME,
        start.elapsed().as_secs_f64(),
        0,
        SolveStatus::Heuristic,
    )
}

/// CMDMS with the backhaul counter recorded after every admission.
pub fn solve_cmdms_traced(instance: &ProblemInstance) -> (Solution, Vec<f64>) {
    let mut trace = Vec::new();
    let start = Instant::now();
    let choices = cmdms_choices(instance, |c| trace.push(c.rate_used));
    let solution = Solution::from_choices(
        instance,
        &choices,
        CMDMS_NAME,
        start.elapsed().as_secs_f64(),
        0,
        SolveStatus::Heuristic,
    );
    (solution, trace)
}

fn cmdms_choices(instance: &ProblemInstance, on_admit: impl FnMut(&ResourceCounters)) -> Vec<Option<usize>> {
    let list = CandidateList::build(instance, |_| true);
    let mut choices = vec![None; instance.n_sc()];
    let mut counters = ResourceCounters::empty(instance.n_d());
    admit_in_order(instance, &list, &mut choices, &mut counters, on_admit);
    choices
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_feasible, Limits, Matrix};
    use crate::synthetic::random_instance;

    const M: f64 = 1e6;

    fn inst(rates: &[f64], sinr: Vec<Vec<f64>>, limits: Limits) -> ProblemInstance {
        let n_d = sinr[0].len();
        let r = Matrix::from_fn(rates.len(), n_d, |i, _| rates[i] * M);
        ProblemInstance::from_sinr(r, Matrix::from_rows(sinr).unwrap(), limits).unwrap()
    }

    /// Exhaustive optimum over all binary assignments (test oracle).
    fn brute_optimum(p: &ProblemInstance) -> f64 {
        let (n, m) = (p.n_sc(), p.n_d());
        let mut best: f64 = 0.0;
        let total = (m + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let choices: Vec<Option<usize>> = (0..n)
                .map(|_| {
                    let d = c % (m + 1);
                    c /= m + 1;
                    (d < m).then_some(d)
                })
                .collect();
            let s = Solution::from_choices(p, &choices, "oracle", 0.0, 0, SolveStatus::Optimal);
            if check_feasible(p, &s.assignment).unwrap().feasible {
                best = best.max(s.sum_rate);
            }
        }
        best
    }

    /// Literal replay of the centralized listing: repeated max selection on
    /// an explicit list with removals.
    fn cmdms_replay(p: &ProblemInstance) -> Vec<Option<usize>> {
        let l = p.limits();
        let mut list: Vec<(usize, usize)> = (0..p.n_sc())
            .flat_map(|i| (0..p.n_d()).map(move |j| (i, j)))
            .filter(|&(i, j)| p.sinr(i, j) >= l.sinr_min)
            .collect();
        let mut links = vec![0usize; p.n_d()];
        let mut bw = vec![0.0; p.n_d()];
        let mut cr = 0.0;
        let mut a = vec![None; p.n_sc()];
        let key = |&(i, j): &(usize, usize)| (p.rate(i, j) / p.bandwidth(i, j), p.rate(i, j), -(i as f64), -(j as f64));
        while !list.is_empty() && cr < l.backhaul_rate {
            let pos = (0..list.len())
                .max_by(|&x, &y| key(&list[x]).partial_cmp(&key(&list[y])).unwrap())
                .unwrap();
            let (i, j) = list[pos];
            if links[j] < l.nfp_links[j] && bw[j] < l.nfp_bandwidth[j] {
                if cr + p.rate(i, j) <= l.backhaul_rate * (1.0 + 1e-9)
                    && bw[j] + p.bandwidth(i, j) <= l.nfp_bandwidth[j] * (1.0 + 1e-9)
                {
                    a[i] = Some(j);
                    links[j] += 1;
                    bw[j] += p.bandwidth(i, j);
                    cr += p.rate(i, j);
                    list.retain(|&(k, _)| k != i);
                } else {
                    list.remove(pos);
                }
            } else {
                list.retain(|&(_, q)| q != j);
            }
        }
        a
    }

    #[test]
    fn mdmds_prefers_higher_ratio_on_single_link() {
        // SC1 (60 Mbps, SINR 3) has ratio 2 against SC0's ratio 1.
        let p = inst(&[30.0, 60.0], vec![vec![1.0], vec![3.0]], Limits::uniform(1, 1e12, 1e12, 1, 0.5));
        let s = solve_mdmds(&p);
        assert_eq!(s.assignment.choices(), vec![None, Some(0)]);
        assert_eq!(s.sum_rate, 60.0 * M);
        assert_eq!(s.sum_rate, brute_optimum(&p));
    }

    #[test]
    fn mdmds_qos_filter_removes_everything() {
        let p = inst(&[30.0, 60.0], vec![vec![0.1, 0.2], vec![0.2, 0.1]], Limits::uniform(2, 1e12, 1e12, 5, 0.5));
        let s = solve_mdmds(&p);
        assert_eq!(s.sum_rate, 0.0);
        assert_eq!(s.associated_count(), 0);
    }

    #[test]
    fn mdmds_sheds_smallest_rates_after_overshoot() {
        // SC0, SC1 prefer NFP0; SC2, SC3 prefer NFP1. Step 2 admits all four
        // (360 Mbps). With R = 300 Mbps, Step 3 drops SC1 (30), still 330 >
        // 300, then SC3 (60), leaving 270.
        let p = inst(
            &[150.0, 30.0, 120.0, 60.0],
            vec![vec![15.0, 1.0], vec![15.0, 1.0], vec![1.0, 15.0], vec![1.0, 15.0]],
            Limits::uniform(2, 300.0 * M, 1e12, 2, 0.5),
        );
        let s = solve_mdmds(&p);
        assert_eq!(s.assignment.choices(), vec![Some(0), None, Some(1), None]);
        assert_eq!(s.sum_rate, 270.0 * M);
        assert!(check_feasible(&p, &s.assignment).unwrap().feasible);
        assert!(s.sum_rate <= brute_optimum(&p));
    }

    #[test]
    fn mdmds_fill_phase_uses_other_nfp() {
        // Both SCs request NFP0 whose bandwidth hosts only one; the fill pass
        // places SC1 on NFP1.
        let p = inst(
            &[90.0, 60.0],
            vec![vec![15.0, 3.0], vec![15.0, 3.0]],
            Limits {
                backhaul_rate: 1e12,
                nfp_bandwidth: vec![30.0 * M, 1e12],
                nfp_links: vec![5, 5],
                sinr_min: 0.5,
            },
        );
        let s = solve_mdmds(&p);
        assert_eq!(s.assignment.choices(), vec![Some(0), Some(1)]);
        assert_eq!(s.sum_rate, 150.0 * M);
    }

    #[test]
    fn ties_prefer_larger_rate() {
        // Equal SINR everywhere: all ratios tie, larger rates go first.
        let p = inst(&[30.0, 150.0, 90.0], vec![vec![7.0]; 3], Limits::uniform(1, 1e12, 1e12, 1, 0.5));
        assert_eq!(solve_cmdms(&p).assignment.choices(), vec![None, Some(0), None]);
        assert_eq!(solve_mdmds(&p).assignment.choices(), vec![None, Some(0), None]);
    }

    #[test]
    fn cmdms_single_candidate() {
        let p = inst(&[90.0], vec![vec![3.0]], Limits::uniform(1, 1e12, 1e12, 1, 0.5));
        let s = solve_cmdms(&p);
        assert_eq!(s.sum_rate, 90.0 * M);
    }

    #[test]
    fn cmdms_backhaul_below_smallest_rate() {
        let p = inst(&[30.0, 60.0], vec![vec![3.0, 1.0], vec![1.0, 3.0]], Limits::uniform(2, 20.0 * M, 1e12, 5, 0.5));
        let s = solve_cmdms(&p);
        assert_eq!(s.sum_rate, 0.0);
    }

    #[test]
    fn cmdms_matches_replay_when_bandwidth_forces_a_choice() {
        // NFP0 is everyone's best but holds 60 MHz.
        let p = inst(
            &[120.0, 90.0, 60.0],
            vec![vec![15.0, 1.0], vec![7.0, 3.0], vec![31.0, 0.6]],
            Limits {
                backhaul_rate: 1e12,
                nfp_bandwidth: vec![60.0 * M, 80.0 * M],
                nfp_links: vec![3, 3],
                sinr_min: 0.5,
            },
        );
        let s = solve_cmdms(&p);
        assert_eq!(s.assignment.choices(), cmdms_replay(&p));
        assert!(check_feasible(&p, &s.assignment).unwrap().feasible);
        assert!(s.sum_rate <= brute_optimum(&p));
        // ratios: SC2/NFP0 = 5, SC0/NFP0 = 4, SC1/NFP0 = 3 ...
        // SC2 (12 MHz) then SC0 (30 MHz) fit NFP0; SC1 needs 30 MHz more
        // there, which overflows, and 45 MHz on NFP1, which fits.
        assert_eq!(s.assignment.choices(), vec![Some(0), Some(1), Some(0)]);
    }

    #[test]
    fn cmdms_matches_replay_on_random_instances() {
        for seed in 0..300 {
            let p = random_instance(seed, 1 + (seed as usize % 9), 1 + (seed as usize % 3));
            assert_eq!(solve_cmdms(&p).assignment.choices(), cmdms_replay(&p), "seed {seed}");
        }
    }

    #[test]
    fn greedy_outputs_feasible_and_dominated() {
        for seed in 0..200 {
            let p = random_instance(seed, 1 + (seed as usize % 7), 1 + (seed as usize % 3));
            let opt = brute_optimum(&p);
            for s in [solve_mdmds(&p), solve_cmdms(&p)] {
                let report = check_feasible(&p, &s.assignment).unwrap();
                assert!(report.feasible, "seed {seed} {}: {report}", s.solver_name);
                assert!(s.sum_rate <= opt * (1.0 + 1e-12), "seed {seed}");
            }
        }
    }

    #[test]
    fn deterministic() {
        let p = random_instance(5, 12, 3);
        assert_eq!(solve_mdmds(&p).assignment, solve_mdmds(&p).assignment);
        assert_eq!(solve_cmdms(&p).assignment, solve_cmdms(&p).assignment);
    }

    #[test]
    fn saturation_when_only_bandwidth_matters() {
        // r_ij = r_i, everything passes QoS, backhaul and links slack, and
        // bandwidth fits every SC: both heuristics associate all SCs.
        for seed in 0..50 {
            let p = random_instance(seed, 10, 3);
            let sum: f64 = (0..p.n_sc()).map(|i| p.rate(i, 0)).sum();
            let mut sinr_rows = Vec::new();
            for i in 0..p.n_sc() {
                sinr_rows.push((0..p.n_d()).map(|j| p.sinr(i, j).max(1.0)).collect::<Vec<_>>());
            }
            let q = ProblemInstance::from_sinr(
                p.rates().clone(),
                Matrix::from_rows(sinr_rows).unwrap(),
                Limits::uniform(3, 2.0 * sum, 1e12, 10, 0.5),
            )
            .unwrap();
            assert_eq!(solve_cmdms(&q).associated_count(), 10);
            assert_eq!(solve_mdmds(&q).associated_count(), 10);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]
            #[test]
            fn cmdms_never_exceeds_backhaul(seed in any::<u64>(), n in 1usize..20, m in 1usize..4) {
                let p = random_instance(seed, n, m);
                let (s, trace) = solve_cmdms_traced(&p);
                let r = p.limits().backhaul_rate;
                for c in &trace {
                    prop_assert!(*c <= r * (1.0 + 1e-9));
                }
                prop_assert_eq!(trace.len(), s.associated_count());
            }

            #[test]
            fn greedy_usage_fields_consistent(seed in any::<u64>(), n in 1usize..20, m in 1usize..4) {
                let p = random_instance(seed, n, m);
                for s in [solve_mdmds(&p), solve_cmdms(&p)] {
                    let counters = ResourceCounters::scan(&p, &s.assignment.choices());
                    prop_assert_eq!(&counters.links_used, &s.per_nfp_links_used);
                    prop_assert!(check_feasible(&p, &s.assignment).unwrap().feasible);
                }
            }
        }
    }
}
