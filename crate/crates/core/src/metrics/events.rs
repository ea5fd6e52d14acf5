use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metrics::record::{EventKind, RunRecord};
use crate::metrics::stats::distance_stats;

/// Reaction timeline of one run.
///
/// * `t_s`: the interferer first comes closer than `d_E1` to any agent.
/// * `t_d`: first logged detection by any agent.
/// * `t_e`: every agent is Active or Passive for the first time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EventTimes {
    pub t_s: Option<f64>,
    pub t_d: Option<f64>,
    pub t_e: Option<f64>,
}

impl EventTimes {
    /// Detection to whole-swarm escape.
    pub fn t_ed(&self) -> Option<f64> {
        Some(self.t_e? - self.t_d?)
    }

    /// Unsafe distance to detection.
    pub fn t_ds(&self) -> Option<f64> {
        Some(self.t_d? - self.t_s?)
    }

    pub fn is_ordered(&self) -> bool {
        match (self.t_s, self.t_d, self.t_e) {
            (Some(s), Some(d), Some(e)) => s <= d && d <= e,
            _ => true,
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "X".to_owned(), |t| format!("{t:.3}"))
}

impl fmt::Display for EventTimes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t_s={} t_d={} t_e={} t_ed={} t_ds={}",
            cell(self.t_s),
            cell(self.t_d),
            cell(self.t_e),
            cell(self.t_ed()),
            cell(self.t_ds())
        )
    }
}

pub fn extract_event_times(record: &RunRecord, d_e1: f64) -> EventTimes {
    let t_s = distance_stats(record)
        .into_iter()
        .find(|d| d.intruder.is_some_and(|s| s.min < d_e1))
        .map(|d| d.time);
    let t_d = record.first_event(EventKind::Detected).map(|e| e.time);
    let t_e = record
        .frames
        .iter()
        .find(|f| !f.agents.is_empty() && f.agents.iter().all(|a| a.mode.is_escaping()))
        .map(|f| f.time);
    EventTimes { t_s, t_d, t_e }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub t_s: Option<f64>,
    pub t_d: Option<f64>,
    pub t_e: Option<f64>,
    pub t_ed: Option<f64>,
    pub t_ds: Option<f64>,
    pub min_interagent_overall: Option<f64>,
    pub min_intruder_overall: Option<f64>,
}

pub fn summarize(record: &RunRecord, d_e1: f64) -> Summary {
    let ev = extract_event_times(record, d_e1);
    let stats = distance_stats(record);
    let min_of = |it: &mut dyn Iterator<Item = f64>| it.reduce(f64::min);
    Summary {
        t_s: ev.t_s,
        t_d: ev.t_d,
        t_e: ev.t_e,
        t_ed: ev.t_ed(),
        t_ds: ev.t_ds(),
        min_interagent_overall: min_of(&mut stats.iter().filter_map(|d| d.agents.map(|s| s.min))),
        min_intruder_overall: min_of(&mut stats.iter().filter_map(|d| d.intruder.map(|s| s.min))),
    }
}
