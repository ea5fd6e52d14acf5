//! Per-(step, agent) CSV export.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::metrics::record::RunRecord;
use crate::metrics::stats::frame_distances;

pub const CSV_HEADER: &str =
    "time,agent_id,x,y,z,mode,min_dist_agents,mean_dist_agents,min_dist_intruder,mean_dist_intruder";

/// Formats `v` with 9 significant digits, `%.9g` style.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_owned();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        trim_fraction(&s).to_owned()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig9).unwrap_or_default()
}

pub fn render_csv(record: &RunRecord) -> String {
    let mut out = String::with_capacity(64 * (record.frames.len() * record.agent_ids.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for frame in &record.frames {
        let d = frame_distances(frame);
        let agents = (opt(d.agents.map(|s| s.min)), opt(d.agents.map(|s| s.mean)));
        let intr = (opt(d.intruder.map(|s| s.min)), opt(d.intruder.map(|s| s.mean)));
        let t = fmt_sig9(frame.time);
        for (id, a) in record.agent_ids.iter().zip(&frame.agents) {
            let _ = writeln!(
                out,
                "{t},{id},{},{},{},{},{},{},{},{}",
                fmt_sig9(a.position.x),
                fmt_sig9(a.position.y),
                fmt_sig9(a.position.z),
                a.mode,
                agents.0,
                agents.1,
                intr.0,
                intr.1,
            );
        }
    }
    out
}

pub fn export_csv(record: &RunRecord, path: &Path) -> io::Result<()> {
    std::fs::write(path, render_csv(record))
}
