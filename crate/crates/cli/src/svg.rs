//! Deterministic SVG cell mosaics of the report trees.

use std::fmt::Write;

use nregions::{Bounds, HyperTree};

use crate::config::Artifact;
use crate::report::AnalysisReport;
use crate::CliError;

const PLOT_WIDTH: f64 = 800.0;
const MARGIN: f64 = 50.0;
const LEGEND_WIDTH: f64 = 190.0;
const TICK_STEP: f64 = 5.0;
const WORKSPACE_FILL: &str = "#c8c8c8";
const REGION_FILLS: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const LOCUS_FILLS: [&str; 4] = ["#000000", "#b8860b", "#006400", "#8b008b"];

struct Layer {
    label: String,
    fill: &'static str,
    opacity: f64,
    tree: HyperTree,
}

struct Frame {
    root: Bounds,
    scale: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.root.lo()[0]) * self.scale
    }

    fn y(&self, v: f64) -> f64 {
        MARGIN + (self.root.hi()[1] - v) * self.scale
    }

    fn height(&self) -> f64 {
        self.root.width(1) * self.scale
    }
}

fn layers(report: &AnalysisReport, selection: &Artifact) -> Result<Vec<Layer>, CliError> {
    let mut out = vec![Layer {
        label: "workspace W".into(),
        fill: WORKSPACE_FILL,
        opacity: 1.0,
        tree: report.workspace.tree.decode()?,
    }];
    let region_layer = |i: usize| -> Result<Layer, CliError> {
        let r = &report.regions[i];
        Ok(Layer {
            label: format!("region {} (mode {})", r.id, r.mode),
            fill: REGION_FILLS[r.id % REGION_FILLS.len()],
            opacity: 0.55,
            tree: r.projection.decode()?,
        })
    };
    match selection {
        Artifact::Workspace => {}
        Artifact::Regions => {
            for i in 0..report.regions.len() {
                out.push(region_layer(i)?);
            }
        }
        Artifact::Region(id) => {
            let i = report
                .regions
                .iter()
                .position(|r| r.id == *id)
                .ok_or_else(|| CliError::Render(format!("no region {id} in the report")))?;
            out.push(region_layer(i)?);
        }
        Artifact::Loci => {
            let loci =
                report.loci.as_ref().ok_or_else(|| CliError::Render("the report holds no singularity loci".into()))?;
            for (i, l) in loci.iter().enumerate() {
                out.push(Layer {
                    label: format!("det A locus ({:+}, {:+})", l.posture[0], l.posture[1]),
                    fill: LOCUS_FILLS[i % LOCUS_FILLS.len()],
                    opacity: 0.8,
                    tree: l.tree.decode()?,
                });
            }
        }
        Artifact::Report => return Err(CliError::Render("the report is not an image".into())),
    }
    Ok(out)
}

/// Renders one selection (`workspace`, `regions`, `region-<id>`, `loci`).
pub fn render_svg(report: &AnalysisReport, selection: &str) -> Result<String, CliError> {
    let selection = Artifact::parse(selection).map_err(|e| CliError::Render(e.to_string()))?;
    let layers = layers(report, &selection)?;
    let root = *layers[0].tree.root_box();
    let frame = Frame { root, scale: PLOT_WIDTH / root.width(0) };
    let width = PLOT_WIDTH + 2.0 * MARGIN + LEGEND_WIDTH;
    let height = frame.height() + 2.0 * MARGIN;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<title>{}</title>", selection.name());
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="#ffffff"/>"##);
    for (i, layer) in layers.iter().enumerate() {
        let _ =
            writeln!(s, r#"<g id="layer-{i}" fill="{}" fill-opacity="{}" stroke="none">"#, layer.fill, layer.opacity);
        for (_, b) in layer.tree.inside_leaves() {
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#,
                frame.x(b.lo()[0]),
                frame.y(b.hi()[1]),
                b.width(0) * frame.scale,
                b.width(1) * frame.scale
            );
        }
        s.push_str("</g>\n");
    }
    axes(&mut s, &frame);
    legend(&mut s, &layers);
    s.push_str("</svg>\n");
    Ok(s)
}

fn axes(s: &mut String, f: &Frame) {
    let (x0, y0) = (f.x(f.root.lo()[0]), f.y(f.root.hi()[1]));
    let _ = writeln!(
        s,
        r##"<g id="axes" stroke="#000000" fill="none"><rect x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}"/>"##,
        PLOT_WIDTH,
        f.height()
    );
    let ticks = |lo: f64, hi: f64| {
        let first = (lo / TICK_STEP).ceil() as i64;
        let last = (hi / TICK_STEP).floor() as i64;
        (first..=last).map(|i| i as f64 * TICK_STEP)
    };
    let bottom = f.y(f.root.lo()[1]);
    for v in ticks(f.root.lo()[0], f.root.hi()[0]) {
        let x = f.x(v);
        let _ = writeln!(s, r#"<line x1="{x:.3}" y1="{bottom:.3}" x2="{x:.3}" y2="{:.3}"/>"#, bottom + 5.0);
    }
    for v in ticks(f.root.lo()[1], f.root.hi()[1]) {
        let y = f.y(v);
        let _ = writeln!(s, r#"<line x1="{:.3}" y1="{y:.3}" x2="{x0:.3}" y2="{y:.3}"/>"#, x0 - 5.0);
    }
    s.push_str("</g>\n<g id=\"labels\" fill=\"#000000\">\n");
    for v in ticks(f.root.lo()[0], f.root.hi()[0]) {
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{v}</text>"#, f.x(v), bottom + 18.0);
    }
    for v in ticks(f.root.lo()[1], f.root.hi()[1]) {
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{v}</text>"#, x0 - 8.0, f.y(v) + 4.0);
    }
    let _ =
        writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">x</text>"#, x0 + PLOT_WIDTH / 2.0, bottom + 36.0);
    let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">y</text>"#, x0 - 36.0, y0 + f.height() / 2.0);
    let bar = TICK_STEP * f.scale;
    let _ = writeln!(
        s,
        r##"<line x1="{x0:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#000000" stroke-width="3"/><text x="{:.3}" y="{:.3}">{TICK_STEP} length units</text>"##,
        y0 - 20.0,
        x0 + bar,
        y0 - 20.0,
        x0 + bar + 8.0,
        y0 - 16.0
    );
    s.push_str("</g>\n");
}

fn legend(s: &mut String, layers: &[Layer]) {
    let x = MARGIN + PLOT_WIDTH + 20.0;
    s.push_str("<g id=\"legend\">\n");
    for (i, layer) in layers.iter().enumerate() {
        let y = MARGIN + 22.0 * i as f64;
        let _ = writeln!(
            s,
            r##"<rect x="{x:.3}" y="{y:.3}" width="14" height="14" fill="{}" fill-opacity="{}" stroke="#000000"/><text x="{:.3}" y="{:.3}">{}</text>"##,
            layer.fill,
            layer.opacity,
            x + 20.0,
            y + 11.0,
            layer.label
        );
    }
    s.push_str("</g>\n");
}
