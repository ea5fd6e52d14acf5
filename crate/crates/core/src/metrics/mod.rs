//! Run recording, distance statistics, reaction-time extraction and export.

pub mod csv;
pub mod events;
pub mod record;
pub mod stats;
pub mod svg;

pub use csv::{export_csv, fmt_sig9, render_csv, CSV_HEADER};
pub use events::{extract_event_times, summarize, EventTimes, Summary};
pub use record::{AgentSample, Event, EventKind, Frame, RunRecord};
pub use stats::{distance_stats, frame_distances, lattice_spacing, nearest_neighbor_distances, FrameDistances, Spread};

/// Distance chart for a run: min/mean agent-interferer distance and the
/// minimal inter-agent distance over time.
pub fn distance_chart(record: &RunRecord) -> String {
    let stats = distance_stats(record);
    let pick = |f: &dyn Fn(&FrameDistances) -> Option<f64>| -> Vec<(f64, f64)> {
        stats.iter().filter_map(|d| f(d).map(|v| (d.time, v))).collect()
    };
    let series = [
        svg::Series {
            label: "min agent-interferer",
            color: "#d62728",
            points: pick(&|d| d.intruder.map(|s| s.min)),
        },
        svg::Series {
            label: "mean agent-interferer",
            color: "#ff9896",
            points: pick(&|d| d.intruder.map(|s| s.mean)),
        },
        svg::Series {
            label: "min inter-agent",
            color: "#1f77b4",
            points: pick(&|d| d.agents.map(|s| s.min)),
        },
    ];
    svg::line_chart("Distances", "time [s]", "distance [m]", &series)
}
