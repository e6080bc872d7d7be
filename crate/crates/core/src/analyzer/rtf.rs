use serde::{Deserialize, Serialize};

use crate::store::{TimeStamp, TraceLog};
use crate::time::SimTime;

pub const DEFAULT_BUCKET: SimTime = SimTime::from_ms(10);

/// Real-time factor of one sim-time bucket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RtfPoint {
    /// Midpoint of the sim-time span the bucket covers.
    pub bucket_mid: SimTime,
    /// Covered sim-time span of the bucket.
    pub sim_span: SimTime,
    pub real_span_ns: u64,
    pub rtf: f64,
}

impl RtfPoint {
    fn between(begin: TimeStamp, end: TimeStamp) -> RtfPoint {
        let sim = end.sim - begin.sim;
        let real = end.real_ns - begin.real_ns;
        RtfPoint {
            bucket_mid: SimTime::from_ps(begin.sim.as_ps() + sim.as_ps() / 2),
            sim_span: sim,
            real_span_ns: real,
            rtf: ratio(sim, real),
        }
    }
}

fn ratio(sim: SimTime, real_ns: u64) -> f64 {
    // ps / ns -> s / s
    (sim.as_ps() as f64 / 1_000.0) / real_ns as f64
}

/// RTF series over fixed sim-time buckets.
///
/// Every record's timestamp is a sample point. Points are grouped by
/// `sim / bucket`; a bucket spans from the last point of the previous
/// emitted bucket to its own last point, so consecutive buckets share
/// endpoints and their sim spans add up to the whole run. A group with
/// fewer than two records, or with no real time elapsed, is merged into the
/// next one; a leftover at the end extends the last emitted bucket.
pub fn compute_rtf(log: &TraceLog, bucket: SimTime) -> Vec<RtfPoint> {
    assert!(bucket > SimTime::ZERO, "bucket must be positive");
    let points: Vec<TimeStamp> = log.records.iter().map(|r| r.ts).collect();
    if points.len() < 2 {
        return Vec::new();
    }
    let width = bucket.as_ps();

    let mut spans: Vec<(TimeStamp, TimeStamp)> = Vec::new();
    let mut begin = points[0];
    let mut members = 0usize;
    let mut i = 0;
    while i < points.len() {
        let index = points[i].sim.as_ps() / width;
        let mut j = i;
        while j < points.len() && points[j].sim.as_ps() / width == index {
            j += 1;
        }
        // The very first sample only opens the series.
        members += if i == 0 { j - i - 1 } else { j - i };
        let end = points[j - 1];
        if members >= 2 && end.real_ns > begin.real_ns {
            spans.push((begin, end));
            begin = end;
            members = 0;
        }
        i = j;
    }

    let last = points[points.len() - 1];
    if members > 0 {
        match spans.last_mut() {
            Some(span) => span.1 = last,
            None if last.real_ns > begin.real_ns => spans.push((begin, last)),
            None => {}
        }
    }
    spans
        .into_iter()
        .map(|(b, e)| RtfPoint::between(b, e))
        .collect()
}

/// Δsim/Δreal between the first and last record, if real time elapsed.
pub fn overall_rtf(log: &TraceLog) -> Option<f64> {
    let first = log.records.first()?.ts;
    let last = log.records.last()?.ts;
    let real = last.real_ns.checked_sub(first.real_ns).filter(|r| *r > 0)?;
    Some(ratio(last.sim - first.sim, real))
}
