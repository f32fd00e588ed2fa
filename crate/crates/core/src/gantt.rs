//! Static SVG Gantt charts: one lane per machine, one labeled rectangle
//! per execution interval, release times as dashed vertical ticks. Output
//! is deterministic for identical input, so charts diff cleanly.

use std::fmt::Write;

use crate::rational::Rat;
use crate::schedule::Schedule;

const LANE_HEIGHT: f64 = 28.0;
const LANE_GAP: f64 = 8.0;
const MARGIN_LEFT: f64 = 52.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_BOTTOM: f64 = 12.0;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];

fn compact(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        r.to_string()
    }
}

/// Renders the schedule as an SVG document. `scale` is pixels per time
/// unit. Job labels use the original input numbering.
pub fn emit_gantt(schedule: &Schedule, scale: u32) -> String {
    let instance = schedule.instance();
    let m = instance.machines();
    let scale = scale as f64;

    let t_end = schedule
        .intervals()
        .iter()
        .map(|iv| iv.end.clone())
        .chain(instance.releases().iter().cloned())
        .max()
        .unwrap_or_else(Rat::one);
    let span_px = (t_end.to_f64() * scale).max(scale);
    let width = MARGIN_LEFT + span_px + MARGIN_RIGHT;
    let height = MARGIN_TOP + m as f64 * (LANE_HEIGHT + LANE_GAP) + MARGIN_BOTTOM;
    let x_of = |t: &Rat| MARGIN_LEFT + t.to_f64() * scale;
    let lane_y = |machine: usize| MARGIN_TOP + (machine - 1) as f64 * (LANE_HEIGHT + LANE_GAP);

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         font-family=\"sans-serif\" font-size=\"11\">"
    )
    .unwrap();
    // Machine lanes, rendered even when empty.
    for q in 1..=m {
        let y = lane_y(q);
        writeln!(
            svg,
            "  <rect class=\"lane\" x=\"{MARGIN_LEFT}\" y=\"{y}\" width=\"{span_px}\" \
             height=\"{LANE_HEIGHT}\" fill=\"#f0f0f0\"/>"
        )
        .unwrap();
        writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">M{q}</text>",
            MARGIN_LEFT - 6.0,
            y + LANE_HEIGHT / 2.0 + 4.0
        )
        .unwrap();
    }
    // Release ticks.
    let mut releases: Vec<Rat> = instance.releases().to_vec();
    releases.sort();
    releases.dedup();
    let lanes_bottom = lane_y(m) + LANE_HEIGHT;
    for r in &releases {
        let x = x_of(r);
        writeln!(
            svg,
            "  <line class=\"release\" x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{lanes_bottom}\" \
             stroke=\"#666\" stroke-dasharray=\"3 2\"/>",
            MARGIN_TOP - 14.0
        )
        .unwrap();
        writeln!(
            svg,
            "  <text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" fill=\"#666\">{}</text>",
            MARGIN_TOP - 18.0,
            compact(r)
        )
        .unwrap();
    }
    // Execution intervals, sorted for deterministic output.
    let mut intervals = schedule.intervals().to_vec();
    intervals.sort_by(|a, b| (a.machine, &a.start, a.job).cmp(&(b.machine, &b.start, b.job)));
    for iv in &intervals {
        let x = x_of(&iv.start);
        let w = (&iv.end - &iv.start).to_f64() * scale;
        let y = lane_y(iv.machine);
        let original = instance.original_position(iv.job) + 1;
        let color = PALETTE[(original - 1) % PALETTE.len()];
        writeln!(
            svg,
            "  <rect class=\"iv\" data-job=\"{original}\" data-machine=\"{}\" x=\"{x}\" \
             y=\"{y}\" width=\"{w}\" height=\"{LANE_HEIGHT}\" fill=\"{color}\" \
             stroke=\"#333\"/>",
            iv.machine
        )
        .unwrap();
        writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"#fff\">{original}</text>",
            x + w / 2.0,
            y + LANE_HEIGHT / 2.0 + 4.0
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
