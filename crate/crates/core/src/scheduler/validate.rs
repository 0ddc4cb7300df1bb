use std::fmt;

use super::{Schedule, SchedulingProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constraint {
    /// Unit fractions positive, at most one in total, schedule within the horizon.
    Fraction,
    /// Each parcel split fully between destinations; no block mined beyond
    /// its tonnage or reclaimed beyond what was stockpiled; with a stockpile,
    /// no block both processed and wasted.
    Destination,
    Precedence,
    Mining,
    Processing,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Fraction => "fraction",
            Constraint::Destination => "destination",
            Constraint::Precedence => "precedence",
            Constraint::Mining => "mining capacity",
            Constraint::Processing => "processing capacity",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub period: Option<usize>,
    pub subject: String,
    /// Amount by which the limit is exceeded (tonnes, fraction or periods).
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated", self.constraint)?;
        if let Some(t) = self.period {
            write!(f, " in period {t}")?;
        }
        write!(f, " by {}: {}", self.magnitude, self.subject)
    }
}

const REL_TOL: f64 = 1e-9;

fn exceeds(value: f64, limit: f64) -> bool {
    value > limit + REL_TOL * limit.abs().max(1.0)
}

/// Every breach of the fraction, destination, precedence, mining and
/// processing constraints. Empty for any decoder output.
pub fn validate(schedule: &Schedule, problem: &SchedulingProblem) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |constraint, period, subject: String, magnitude| {
        out.push(Violation {
            constraint,
            period,
            subject,
            magnitude,
        })
    };
    let units = &problem.units;
    let econ = &problem.economics;
    let n_units = units.len();
    let t_max = problem.calendar.t_max();

    if schedule.periods.len() > t_max {
        push(
            Constraint::Fraction,
            None,
            format!("{} periods scheduled, horizon is {t_max}", schedule.periods.len()),
            (schedule.periods.len() - t_max) as f64,
        );
    }

    let mut total_fraction = vec![0.0; n_units];
    let mut first = vec![usize::MAX; n_units];
    let mut complete = vec![usize::MAX; n_units];
    let mut mined = vec![0.0; econ.len()];
    let mut stocked = vec![0.0; econ.len()];
    let mut reclaimed = vec![0.0; econ.len()];
    let mut processed = vec![false; econ.len()];
    let mut wasted = vec![false; econ.len()];

    for (idx, period) in schedule.periods.iter().enumerate() {
        let t = idx + 1;
        for e in &period.mining {
            if e.unit >= n_units {
                push(Constraint::Fraction, Some(t), format!("unknown unit {}", e.unit), 1.0);
                continue;
            }
            let name = unit_name(problem, e.unit);
            if !(e.fraction > 0.0 && e.fraction <= 1.0) {
                push(Constraint::Fraction, Some(t), format!("unit {name} fraction {}", e.fraction), e.fraction);
            }
            total_fraction[e.unit] += e.fraction;
            first[e.unit] = first[e.unit].min(t);
            if total_fraction[e.unit] >= 1.0 - 1e-9 && complete[e.unit] == usize::MAX {
                complete[e.unit] = t;
            }
        }

        for p in &period.parcels {
            let split = p.milled + p.wasted + p.stockpiled;
            let parts = [p.milled, p.wasted, p.stockpiled];
            if parts.iter().any(|x| *x < 0.0) || (split - p.tonnes).abs() > REL_TOL * p.tonnes.max(1.0) {
                push(
                    Constraint::Destination,
                    Some(t),
                    format!("block {} parcel of {} t split as {parts:?}", p.block, p.tonnes),
                    (split - p.tonnes).abs(),
                );
            }
            mined[p.block] += p.tonnes;
            stocked[p.block] += p.stockpiled;
            processed[p.block] |= p.milled > 0.0 || p.stockpiled > 0.0;
            wasted[p.block] |= p.wasted > 0.0;
        }
        for r in &period.reclaims {
            reclaimed[r.block] += r.tonnes;
            if r.tonnes < 0.0 || exceeds(reclaimed[r.block], stocked[r.block]) {
                push(
                    Constraint::Destination,
                    Some(t),
                    format!("block {} reclaimed {} t of {} t stockpiled", r.block, reclaimed[r.block], stocked[r.block]),
                    reclaimed[r.block] - stocked[r.block],
                );
            }
        }

        let cap = problem.calendar.periods.get(idx).copied();
        if let Some(cap) = cap {
            let mined_t = period.tonnes_mined();
            if exceeds(mined_t, cap.mining_capacity) {
                push(
                    Constraint::Mining,
                    Some(t),
                    format!("{mined_t} t mined, capacity {}", cap.mining_capacity),
                    mined_t - cap.mining_capacity,
                );
            }
            let milled_t = period.tonnes_milled();
            if exceeds(milled_t, cap.plant_capacity) {
                push(
                    Constraint::Processing,
                    Some(t),
                    format!("{milled_t} t milled, capacity {}", cap.plant_capacity),
                    milled_t - cap.plant_capacity,
                );
            }
        }
    }

    for (u, &f) in total_fraction.iter().enumerate() {
        if exceeds(f, 1.0) {
            push(Constraint::Fraction, None, format!("unit {} mined {f} times over", unit_name(problem, u)), f - 1.0);
        }
    }
    for b in 0..econ.len() {
        if exceeds(mined[b], econ.tonnage[b]) {
            push(
                Constraint::Destination,
                None,
                format!("block {b} mined {} t of {} t", mined[b], econ.tonnage[b]),
                mined[b] - econ.tonnage[b],
            );
        }
        if schedule.stockpiling && processed[b] && wasted[b] {
            push(Constraint::Destination, None, format!("block {b} both processed and wasted"), 1.0);
        }
    }

    for &(a, b) in &problem.precedence.arcs {
        let (na, nb) = (unit_name(problem, a), unit_name(problem, b));
        if first[b] == usize::MAX {
            continue;
        }
        if first[a] == usize::MAX {
            push(
                Constraint::Precedence,
                Some(first[b]),
                format!("unit {nb} started but its predecessor {na} was never mined"),
                1.0,
            );
            continue;
        }
        if first[b] < first[a] {
            push(
                Constraint::Precedence,
                Some(first[b]),
                format!("unit {nb} started in period {} before predecessor {na} in period {}", first[b], first[a]),
                (first[a] - first[b]) as f64,
            );
        }
        if complete[b] != usize::MAX && complete[b] < complete[a] {
            let done_a = if complete[a] == usize::MAX { "never".to_string() } else { format!("in period {}", complete[a]) };
            push(
                Constraint::Precedence,
                Some(complete[b]),
                format!("unit {nb} completed in period {} before predecessor {na} completed ({done_a})", complete[b]),
                1.0,
            );
        }
    }
    out
}

fn unit_name(problem: &SchedulingProblem, u: usize) -> String {
    let unit = &problem.units[u];
    format!("{u} (stage {}, bench {})", unit.stage, unit.bench)
}
