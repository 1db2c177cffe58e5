//! Scatter plots of root clouds as standalone SVG documents.
//!
//! Family 0 is blue, 1 red, 2 black (for Padé runs: zeros blue, poles red).
//! Layers are drawn blue, then red, then black on top. Output bytes depend
//! only on the inputs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::roots::RootCloud;

/// Side of the square document in user units.
pub const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

pub const COLORS: [&str; 3] = ["#1f3fbf", "#d01c1c", "#000000"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvgError {
    #[error("invalid viewport: {0}")]
    Viewport(&'static str),
    #[error("nothing to plot")]
    Empty,
    #[error("unknown family {0}")]
    Family(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub re: f64,
    pub im: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub re: (f64, f64),
    pub im: (f64, f64),
    /// Families drawn; others are skipped.
    pub families: Vec<usize>,
    pub marker_radius: f64,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
    #[serde(default)]
    pub allow_empty: bool,
    #[serde(default)]
    pub title: String,
}

impl PlotSpec {
    pub fn new(re: (f64, f64), im: (f64, f64), families: Vec<usize>) -> Self {
        Self { re, im, families, marker_radius: 2.0, annotations: Vec::new(), allow_empty: false, title: String::new() }
    }

    /// Square viewport around all points with a 10% margin (a unit square
    /// around the origin when there are none).
    pub fn fit(layers: &[Layer], families: Vec<usize>) -> Self {
        let pts: Vec<&Complex64> = layers.iter().flat_map(|l| l.points.iter()).filter(|z| z.re.is_finite() && z.im.is_finite()).collect();
        if pts.is_empty() {
            return Self::new((-1.0, 1.0), (-1.0, 1.0), families);
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in pts {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        let half = ((x1 - x0).max(y1 - y0) * 0.55).max(1e-6);
        let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        Self::new((cx - half, cx + half), (cy - half, cy + half), families)
    }

    fn check(&self) -> Result<(), SvgError> {
        let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.1 > r.0;
        if !ok(self.re) {
            return Err(SvgError::Viewport("real range must be finite and increasing"));
        }
        if !ok(self.im) {
            return Err(SvgError::Viewport("imaginary range must be finite and increasing"));
        }
        if !(self.marker_radius > 0.0) {
            return Err(SvgError::Viewport("marker radius must be positive"));
        }
        Ok(())
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re.0 && z.re <= self.re.1 && z.im >= self.im.0 && z.im <= self.im.1
    }
}

/// Points of one family.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub family: usize,
    pub points: Vec<Complex64>,
}

impl Layer {
    pub fn from_cloud(c: &RootCloud) -> Self {
        Self { family: c.family, points: c.points_c64() }
    }
}

/// `{label}_{n}_{families}.svg`, families as digits, e.g. `ang1_40_012.svg`.
pub fn plot_file_name(label: &str, n: usize, families: &[usize]) -> String {
    let mut f = String::new();
    for k in families {
        let _ = write!(f, "{k}");
    }
    format!("{label}_{n}_{f}.svg")
}

struct Frame {
    scale: f64,
    ox: f64,
    oy: f64,
}

impl Frame {
    fn new(spec: &PlotSpec) -> Self {
        let w = spec.re.1 - spec.re.0;
        let h = spec.im.1 - spec.im.0;
        let inner = SIZE - 2.0 * MARGIN;
        let scale = inner / w.max(h);
        let ox = MARGIN + (inner - w * scale) / 2.0;
        let oy = MARGIN + (inner - h * scale) / 2.0;
        Self { scale, ox, oy }
    }

    fn map(&self, spec: &PlotSpec, z: Complex64) -> (f64, f64) {
        let x = self.ox + (z.re - spec.re.0) * self.scale;
        let y = SIZE - (self.oy + (z.im - spec.im.0) * self.scale);
        (x, y)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the layers; only points inside the viewport become markers.
pub fn scatter(layers: &[Layer], spec: &PlotSpec) -> Result<String, SvgError> {
    spec.check()?;
    if layers.is_empty() && !spec.allow_empty {
        return Err(SvgError::Empty);
    }
    for l in layers {
        if l.family > 2 {
            return Err(SvgError::Family(l.family));
        }
    }
    let fr = Frame::new(spec);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    if !spec.title.is_empty() {
        let _ = writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, SIZE / 2.0, escape(&spec.title));
    }

    // frame and axes
    let (x0, y0) = fr.map(spec, Complex64::new(spec.re.0, spec.im.1));
    let (x1, y1) = fr.map(spec, Complex64::new(spec.re.1, spec.im.0));
    let _ = writeln!(
        s,
        r##"<rect x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#888888" stroke-width="1"/>"##,
        x1 - x0,
        y1 - y0
    );
    if spec.im.0 <= 0.0 && spec.im.1 >= 0.0 {
        let (_, y) = fr.map(spec, Complex64::new(0.0, 0.0));
        let _ = writeln!(s, r##"<line x1="{x0:.3}" y1="{y:.3}" x2="{x1:.3}" y2="{y:.3}" stroke="#bbbbbb" stroke-width="0.8"/>"##);
    }
    if spec.re.0 <= 0.0 && spec.re.1 >= 0.0 {
        let (x, _) = fr.map(spec, Complex64::new(0.0, 0.0));
        let _ = writeln!(s, r##"<line x1="{x:.3}" y1="{y0:.3}" x2="{x:.3}" y2="{y1:.3}" stroke="#bbbbbb" stroke-width="0.8"/>"##);
    }
    let _ = writeln!(
        s,
        r#"<text x="{x0:.3}" y="{:.3}" font-size="11">{:.4}</text><text x="{x1:.3}" y="{:.3}" font-size="11" text-anchor="end">{:.4}</text>"#,
        y1 + 14.0,
        spec.re.0,
        y1 + 14.0,
        spec.re.1
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{y1:.3}" font-size="11" text-anchor="end">{:.4}</text><text x="{:.3}" y="{:.3}" font-size="11" text-anchor="end">{:.4}</text>"#,
        x0 - 4.0,
        spec.im.0,
        x0 - 4.0,
        y0 + 10.0,
        spec.im.1
    );

    // blue, then red, then black
    for fam in 0..3 {
        if !spec.families.contains(&fam) {
            continue;
        }
        let mut body = String::new();
        for l in layers.iter().filter(|l| l.family == fam) {
            for z in l.points.iter().filter(|z| spec.contains(**z)) {
                let (x, y) = fr.map(spec, *z);
                let _ = writeln!(body, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{}"/>"#, spec.marker_radius);
            }
        }
        if !body.is_empty() {
            let _ = writeln!(s, r#"<g fill="{}" class="family{fam}">"#, COLORS[fam]);
            s.push_str(&body);
            s.push_str("</g>\n");
        }
    }

    for a in &spec.annotations {
        let (x, y) = fr.map(spec, Complex64::new(a.re, a.im));
        let r = 5.0;
        let _ = writeln!(
            s,
            r##"<path d="M{:.3} {:.3}L{:.3} {:.3}M{:.3} {:.3}L{:.3} {:.3}" stroke="#228b22" stroke-width="1.5"/>"##,
            x - r,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r,
            x + r,
            y - r
        );
        if !a.label.is_empty() {
            let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" font-size="12">{}</text>"#, x + 7.0, y - 7.0, escape(&a.label));
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Convenience over [`scatter`] for root clouds.
pub fn scatter_clouds(clouds: &[RootCloud], spec: &PlotSpec) -> Result<String, SvgError> {
    let layers: Vec<Layer> = clouds.iter().map(Layer::from_cloud).collect();
    scatter(&layers, spec)
}
