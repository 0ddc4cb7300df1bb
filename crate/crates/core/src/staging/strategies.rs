use super::Staging;
use crate::block_model::{BlockModel, EconomicModel};
use crate::error::{Error, Result};
use crate::grade_ensemble::UncertaintyField;
use crate::pit::ShellAssignment;

pub const DEFAULT_STAGES: usize = 6;
/// Grade standard deviation, in mass-fraction units, above which ore counts as uncertain.
pub const DEFAULT_STD_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StagingStrategy {
    /// Read from a file prepared by an engineer.
    Expected,
    Lazy,
    WorstCase,
    Levelled,
}

impl StagingStrategy {
    pub const ALL: [StagingStrategy; 4] = [
        StagingStrategy::Expected,
        StagingStrategy::Lazy,
        StagingStrategy::WorstCase,
        StagingStrategy::Levelled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StagingStrategy::Expected => "expected",
            StagingStrategy::Lazy => "lazy",
            StagingStrategy::WorstCase => "worst-case",
            StagingStrategy::Levelled => "levelled",
        }
    }
}

impl std::fmt::Display for StagingStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StagingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected" | "file" => Ok(StagingStrategy::Expected),
            "lazy" => Ok(StagingStrategy::Lazy),
            "worst-case" | "worst_case" | "worstcase" => Ok(StagingStrategy::WorstCase),
            "levelled" | "leveled" => Ok(StagingStrategy::Levelled),
            other => Err(Error::Invalid(format!(
                "unknown staging strategy `{other}` (expected or file, lazy, worst-case, levelled)"
            ))),
        }
    }
}

/// Greedy contiguous grouping of `weights` into exactly `k` groups: a group
/// closes once it reaches `total / k`, or when the items left are only just
/// enough for the groups left. Returns the group of every item.
fn greedy_groups(weights: &[f64], k: usize) -> Vec<usize> {
    let m = weights.len();
    debug_assert!(k >= 1 && m >= k);
    let threshold = weights.iter().sum::<f64>() / k as f64;
    let mut groups = Vec::with_capacity(m);
    let (mut group, mut acc) = (0, 0.0);
    for (idx, w) in weights.iter().enumerate() {
        groups.push(group);
        acc += w;
        if group + 1 == k {
            continue;
        }
        let items_after = m - idx - 1;
        let groups_after = k - group - 1;
        if acc >= threshold * (1.0 - 1e-12) || items_after == groups_after {
            group += 1;
            acc = 0.0;
        }
    }
    groups
}

/// Shells that hold at least one block, in shell order.
fn nonempty_shells(shells: &ShellAssignment) -> Vec<usize> {
    let mut used = vec![false; shells.n_shells() + 1];
    for &s in &shells.shell_index {
        used[s] = true;
    }
    (1..=shells.n_shells()).filter(|&s| used[s]).collect()
}

/// Stage per block from a stage per nonempty shell.
fn stage_from_shells(shells: &ShellAssignment, nonempty: &[usize], groups: &[usize], k: usize) -> Staging {
    let mut shell_stage = vec![0; shells.n_shells() + 1];
    for (shell, g) in nonempty.iter().zip(groups) {
        shell_stage[*shell] = g + 1;
    }
    Staging {
        stage: shells.shell_index.iter().map(|&s| shell_stage[s]).collect(),
        k,
        fallback: false,
    }
}

fn check_enough_shells(nonempty: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Staging("at least one stage is required".to_string()));
    }
    if nonempty < k {
        return Err(Error::Staging(format!("{nonempty} nonempty shells cannot form {k} stages")));
    }
    Ok(())
}

/// Merges consecutive shells into `k` stages of roughly equal tonnage.
pub fn lazy_staging(shells: &ShellAssignment, model: &BlockModel, k: usize) -> Result<Staging> {
    let nonempty = nonempty_shells(shells);
    check_enough_shells(nonempty.len(), k)?;
    let tonnage = shells.shell_tonnages(model);
    let weights: Vec<f64> = nonempty.iter().map(|s| tonnage[s - 1]).collect();
    Ok(stage_from_shells(shells, &nonempty, &greedy_groups(&weights, k), k))
}

fn is_uncertain_ore(aggregate: &BlockModel, uncertainty: &UncertaintyField, econ: &EconomicModel, b: usize, threshold: f64) -> bool {
    aggregate.blocks[b].grade >= econ.cutoff_grade && uncertainty.grade_std[b] > threshold
}

/// Puts uncertain ore (grade at or above cut-off, grade std above
/// `std_threshold`) into the last two stages, or the last stage alone when
/// there is a single such block, and stages the rest lazily over the
/// stages before. The rest is grouped by block in (shell, bench, id) order
/// when it spans too few shells. Without uncertain ore this is lazy
/// staging with `fallback` set.
pub fn worst_case_staging(
    shells: &ShellAssignment,
    aggregate: &BlockModel,
    uncertainty: &UncertaintyField,
    econ: &EconomicModel,
    k: usize,
    std_threshold: f64,
) -> Result<Staging> {
    if k < 3 {
        return Err(Error::Staging(format!("worst-case staging needs k >= 3, got {k}")));
    }
    let n = shells.shell_index.len();
    let uncertain: Vec<bool> = (0..n)
        .map(|b| shells.in_pit(b) && is_uncertain_ore(aggregate, uncertainty, econ, b, std_threshold))
        .collect();
    let mut uncertain_blocks: Vec<usize> = (0..n).filter(|&b| uncertain[b]).collect();
    if uncertain_blocks.is_empty() {
        log::warn!("worst-case staging: no uncertain ore in the pit; staging lazily");
        let mut staging = lazy_staging(shells, aggregate, k)?;
        staging.fallback = true;
        return Ok(staging);
    }
    let order = |b: usize| (shells.shell_index[b], aggregate.blocks[b].index.k, b);
    let isolated = uncertain_blocks.len().min(2);
    let rest_groups = k - isolated;

    let mut rest: Vec<usize> = (0..n).filter(|&b| shells.in_pit(b) && !uncertain[b]).collect();
    rest.sort_by_key(|&b| order(b));
    let rest_shells: Vec<usize> = {
        let mut v: Vec<usize> = rest.iter().map(|&b| shells.shell_index[b]).collect();
        v.dedup();
        v
    };
    let mut stage = vec![0; n];
    if rest_shells.len() >= rest_groups {
        let mut tonnage = vec![0.0; shells.n_shells() + 1];
        for &b in &rest {
            tonnage[shells.shell_index[b]] += aggregate.blocks[b].tonnage;
        }
        let weights: Vec<f64> = rest_shells.iter().map(|&s| tonnage[s]).collect();
        let mut shell_stage = vec![0; shells.n_shells() + 1];
        for (s, g) in rest_shells.iter().zip(greedy_groups(&weights, rest_groups)) {
            shell_stage[*s] = g + 1;
        }
        for &b in &rest {
            stage[b] = shell_stage[shells.shell_index[b]];
        }
    } else if rest.len() >= rest_groups {
        log::warn!(
            "worst-case staging: other blocks span {} shells for {rest_groups} stages; grouping by block",
            rest_shells.len()
        );
        let weights: Vec<f64> = rest.iter().map(|&b| aggregate.blocks[b].tonnage).collect();
        for (&b, g) in rest.iter().zip(greedy_groups(&weights, rest_groups)) {
            stage[b] = g + 1;
        }
    } else {
        return Err(Error::Staging(format!(
            "{} blocks outside the uncertain ore cannot fill {rest_groups} stages",
            rest.len()
        )));
    }

    // Split the uncertain ore by tonnage in (shell, bench, id) order.
    uncertain_blocks.sort_by_key(|&b| order(b));
    let total: f64 = uncertain_blocks.iter().map(|&b| aggregate.blocks[b].tonnage).sum();
    let mut acc = 0.0;
    let last = uncertain_blocks.len() - 1;
    let mut in_first = isolated == 2;
    for (pos, &b) in uncertain_blocks.iter().enumerate() {
        if !in_first || pos == last {
            stage[b] = k;
            continue;
        }
        stage[b] = k - 1;
        acc += aggregate.blocks[b].tonnage;
        if acc >= total / 2.0 * (1.0 - 1e-12) {
            in_first = false;
        }
    }
    Ok(Staging { stage, k, fallback: false })
}

/// Tonnage-weighted grade std of ore blocks (grade at or above cut-off)
/// in each shell, at position `s - 1`.
pub fn shell_uncertainty_mass(
    shells: &ShellAssignment,
    aggregate: &BlockModel,
    uncertainty: &UncertaintyField,
    econ: &EconomicModel,
) -> Vec<f64> {
    let mut mass = vec![0.0; shells.n_shells()];
    for (b, &s) in shells.shell_index.iter().enumerate() {
        let block = &aggregate.blocks[b];
        if s > 0 && block.grade >= econ.cutoff_grade {
            mass[s - 1] += block.tonnage * uncertainty.grade_std[b];
        }
    }
    mass
}

/// Contiguous grouping of `mass` into `k` groups with the smallest spread
/// between the heaviest and lightest group. Ties prefer the smaller
/// heaviest group, then the earlier boundaries.
fn min_spread_groups(mass: &[f64], k: usize) -> Vec<usize> {
    let m = mass.len();
    // sums[a][b] = mass of items a..b, summed left to right.
    let mut sums = vec![vec![0.0; m + 1]; m + 1];
    for a in 0..m {
        for b in a + 1..=m {
            sums[a][b] = sums[a][b - 1] + mass[b - 1];
        }
    }
    let mut floors: Vec<f64> = (0..m).flat_map(|a| (a + 1..=m).map(move |b| (a, b))).map(|(a, b)| sums[a][b]).collect();
    floors.sort_by(f64::total_cmp);
    floors.dedup();

    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for &floor in &floors {
        // heaviest[j][i]: smallest possible heaviest group splitting the
        // first i items into j groups that all weigh at least `floor`.
        let mut heaviest = vec![vec![f64::INFINITY; m + 1]; k + 1];
        let mut split = vec![vec![0usize; m + 1]; k + 1];
        heaviest[0][0] = f64::NEG_INFINITY;
        for j in 1..=k {
            for i in j..=m {
                for p in (j - 1)..i {
                    let group = sums[p][i];
                    if group < floor || heaviest[j - 1][p] == f64::INFINITY {
                        continue;
                    }
                    let candidate = heaviest[j - 1][p].max(group);
                    if candidate < heaviest[j][i] {
                        heaviest[j][i] = candidate;
                        split[j][i] = p;
                    }
                }
            }
        }
        if heaviest[k][m] == f64::INFINITY {
            continue;
        }
        let mut bounds = vec![m];
        let mut i = m;
        for j in (1..=k).rev() {
            i = split[j][i];
            bounds.push(i);
        }
        bounds.reverse();
        let groups: Vec<f64> = bounds.windows(2).map(|w| sums[w[0]][w[1]]).collect();
        let hi = groups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = groups.iter().copied().fold(f64::INFINITY, f64::min);
        let key = (hi - lo, hi, bounds);
        let better = match &best {
            None => true,
            Some(b) => {
                key.0 < b.0 || (key.0 == b.0 && (key.1 < b.1 || (key.1 == b.1 && key.2 < b.2)))
            }
        };
        if better {
            best = Some(key);
        }
    }
    let bounds = best.expect("k <= m always admits a grouping").2;
    let mut groups = vec![0; m];
    for (g, w) in bounds.windows(2).enumerate() {
        groups[w[0]..w[1]].iter_mut().for_each(|x| *x = g);
    }
    groups
}

/// Merges consecutive shells into `k` stages with uncertainty mass as even
/// as possible. Without any uncertain ore this is lazy staging.
pub fn levelled_staging(
    shells: &ShellAssignment,
    aggregate: &BlockModel,
    uncertainty: &UncertaintyField,
    econ: &EconomicModel,
    k: usize,
) -> Result<Staging> {
    let nonempty = nonempty_shells(shells);
    check_enough_shells(nonempty.len(), k)?;
    let mass = shell_uncertainty_mass(shells, aggregate, uncertainty, econ);
    let weights: Vec<f64> = nonempty.iter().map(|s| mass[s - 1]).collect();
    if weights.iter().all(|w| *w == 0.0) {
        return lazy_staging(shells, aggregate, k);
    }
    Ok(stage_from_shells(shells, &nonempty, &min_spread_groups(&weights, k), k))
}
