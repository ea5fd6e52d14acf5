use serde::Serialize;

use crate::metrics::record::{Frame, RunRecord};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Spread {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut n = 0usize;
        let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for v in values {
            n += 1;
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        (n > 0).then(|| Self {
            min,
            mean: sum / n as f64,
            max,
        })
    }
}

/// Distance statistics of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameDistances {
    pub time: f64,
    /// Over all unordered agent pairs; `None` with fewer than two agents.
    pub agents: Option<Spread>,
    /// Over all (agent, interferer) pairs; `None` without interferers.
    pub intruder: Option<Spread>,
}

pub fn pairwise_spread(points: &[Vec3<f64>]) -> Option<Spread> {
    Spread::of(
        points
            .iter()
            .enumerate()
            .flat_map(|(i, a)| points[i + 1..].iter().map(move |b| a.distance(*b))),
    )
}

pub fn frame_distances(frame: &Frame) -> FrameDistances {
    let pts: Vec<Vec3<f64>> = frame.agents.iter().map(|a| a.position).collect();
    let intruder = Spread::of(
        frame
            .interferers
            .iter()
            .flat_map(|(_, r)| pts.iter().map(move |p| p.distance(*r))),
    );
    FrameDistances {
        time: frame.time,
        agents: pairwise_spread(&pts),
        intruder,
    }
}

pub fn distance_stats(record: &RunRecord) -> Vec<FrameDistances> {
    record.frames.iter().map(frame_distances).collect()
}

/// Distance from every point to its nearest other point.
pub fn nearest_neighbor_distances(points: &[Vec3<f64>]) -> Vec<f64> {
    points
        .iter()
        .enumerate()
        .map(|(i, a)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| a.distance(*b))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Mean/min/max nearest-neighbour spacing of a point set.
pub fn lattice_spacing(points: &[Vec3<f64>]) -> Option<Spread> {
    if points.len() < 2 {
        return None;
    }
    Spread::of(nearest_neighbor_distances(points))
}
