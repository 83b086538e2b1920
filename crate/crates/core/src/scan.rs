//! Uniform parameter sweeps: susceptibility, kink detection and output
//! formats (CSV, SVG, JSON).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cic::OptimizerOptions;
use crate::error::{Error, Result};
use crate::kitaev::{self, KitaevLine, LinkType};
use crate::xxz;

pub const DEFAULT_Z_THRESHOLD: f64 = 8.0;
/// Flags closer than this many grid steps are merged.
const MERGE_STEPS: usize = 2;
/// Second differences below `NOISE_ULPS · ε · scale` count as exact zeros.
const NOISE_ULPS: f64 = 1e3;
/// Grid points are snapped to this resolution so that reruns agree bitwise.
const GRID_SNAP: f64 = 1e12;

/// Uniform grid `min, min + step, ...` up to and including `max` (to 1e-9
/// relative slack).
pub fn grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) {
        return Err(Error::Grid("range must be finite".into()));
    }
    if min >= max {
        return Err(Error::Grid(format!("empty range: min {min} >= max {max}")));
    }
    if step <= 0.0 {
        return Err(Error::Grid(format!("step must be positive, got {step}")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((min + i as f64 * step) * GRID_SNAP).round() / GRID_SNAP)
        .collect())
}

fn uniform_step(parameter: &[f64]) -> Result<f64> {
    let n = parameter.len();
    let h = (parameter[n - 1] - parameter[0]) / (n - 1) as f64;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Grid("grid must be increasing".into()));
    }
    for w in parameter.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-6 * h {
            return Err(Error::Grid(format!(
                "non-uniform spacing {} (expected {h})",
                w[1] - w[0]
            )));
        }
    }
    Ok(h)
}

fn check_series(parameter: &[f64], value: &[f64], min_len: usize) -> Result<f64> {
    if parameter.len() != value.len() {
        return Err(Error::Shape(format!(
            "{} parameters but {} values",
            parameter.len(),
            value.len()
        )));
    }
    if parameter.len() < min_len {
        return Err(Error::Grid(format!(
            "need at least {min_len} grid points, got {}",
            parameter.len()
        )));
    }
    uniform_step(parameter)
}

/// `dv/dparam` by central differences, with one-sided three-point formulas
/// at both ends.
pub fn susceptibility(parameter: &[f64], value: &[f64]) -> Result<Vec<f64>> {
    let h = check_series(parameter, value, 5)?;
    let n = value.len();
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * value[0] + 4.0 * value[1] - value[2]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (value[i + 1] - value[i - 1]) / (2.0 * h);
    }
    out[n - 1] = (3.0 * value[n - 1] - 4.0 * value[n - 2] + value[n - 3]) / (2.0 * h);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    /// The curve itself jumps.
    Discontinuity,
    /// Continuous curve, discontinuous slope.
    Kink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: f64,
    pub score: f64,
    pub kind: CriticalKind,
}

/// Flags nonanalytic points of a sampled curve.
///
/// A grid point is flagged when `|v[i+1] − 2v[i] + v[i−1]|` is a local
/// maximum (both neighbouring second differences exist and are not larger)
/// and exceeds `z_threshold` times the median. Second differences at the
/// rounding level are treated as zero; if the median vanishes, the score is
/// measured against that rounding floor instead. Flags within two grid steps
/// are merged, keeping the highest score. Output is sorted by descending
/// score.
pub fn detect_kinks(parameter: &[f64], value: &[f64], z_threshold: f64) -> Result<Vec<CriticalPoint>> {
    check_series(parameter, value, 9)?;
    if z_threshold.is_nan() || z_threshold <= 0.0 {
        return Err(Error::Config(format!("z threshold must be positive, got {z_threshold}")));
    }
    if value.iter().any(|v| !v.is_finite()) {
        return Err(Error::Grid("curve contains non-finite values".into()));
    }
    let scale = value.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let floor = NOISE_ULPS * f64::EPSILON * scale;
    let d2: Vec<f64> = value
        .windows(3)
        .map(|w| {
            let d = (w[2] - 2.0 * w[1] + w[0]).abs();
            if d < floor {
                0.0
            } else {
                d
            }
        })
        .collect();

    let mut sorted = d2.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    let reference = if median > 0.0 { median } else { floor };

    let mut flags: Vec<(usize, f64)> = Vec::new();
    for k in 1..d2.len() - 1 {
        let score = d2[k] / reference;
        if d2[k] > 0.0 && d2[k] >= d2[k - 1] && d2[k] >= d2[k + 1] && score > z_threshold {
            flags.push((k + 1, score));
        }
    }

    // merge runs of nearby flags, keeping the strongest
    let mut merged: Vec<(usize, f64)> = Vec::new();
    for (i, score) in flags {
        match merged.last_mut() {
            Some(last) if i - last.0 <= MERGE_STEPS => {
                if score > last.1 {
                    *last = (i, score);
                }
            }
            _ => merged.push((i, score)),
        }
    }

    let mut points: Vec<CriticalPoint> = merged
        .into_iter()
        .map(|(i, score)| CriticalPoint {
            location: parameter[i],
            score,
            kind: classify(value, i, floor),
        })
        .collect();
    points.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.location.total_cmp(&b.location)));
    Ok(points)
}

/// Jump if the larger step next to `i` dwarfs the steps one further out.
fn classify(value: &[f64], i: usize, floor: f64) -> CriticalKind {
    let step = |j: usize| -> Option<f64> { value.get(j + 1).map(|v| (v - value[j]).abs()) };
    let inner = step(i - 1).unwrap_or(0.0).max(step(i).unwrap_or(0.0));
    let outer = [i.checked_sub(2).and_then(step), step(i + 1)]
        .into_iter()
        .flatten()
        .fold(floor, f64::max);
    if inner > 10.0 * outer {
        CriticalKind::Discontinuity
    } else {
        CriticalKind::Kink
    }
}

/// Sampled CIC curve, its derivative and the detected critical points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub parameter: Vec<f64>,
    pub value: Vec<f64>,
    pub susceptibility: Vec<f64>,
    pub critical_points: Vec<CriticalPoint>,
}

impl ScanResult {
    pub fn from_curve(parameter: Vec<f64>, value: Vec<f64>, z_threshold: f64) -> Result<Self> {
        let susceptibility = susceptibility(&parameter, &value)?;
        let critical_points = detect_kinks(&parameter, &value, z_threshold)?;
        Ok(Self {
            parameter,
            value,
            susceptibility,
            critical_points,
        })
    }

    pub fn len(&self) -> usize {
        self.parameter.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameter.is_empty()
    }

    pub fn table(&self, parameter_name: &str) -> Table {
        Table {
            header: vec![parameter_name.to_string(), "cic".into(), "susceptibility".into()],
            rows: (0..self.len())
                .map(|i| {
                    vec![
                        Cell::Number(self.parameter[i]),
                        Cell::Number(self.value[i]),
                        Cell::Number(self.susceptibility[i]),
                    ]
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Number(x) => format_sig(*x, 12),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `%.{digits}g`-style formatting.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    write_file(path, &table.to_csv())
}

pub fn emit_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, &text)
}

pub fn emit_svg(result: &ScanResult, parameter_name: &str, path: &Path) -> Result<()> {
    write_file(path, &render_svg(result, parameter_name)?)
}

/// Line plot of the susceptibility with dashed markers at critical points.
pub fn render_svg(result: &ScanResult, parameter_name: &str) -> Result<String> {
    if result.is_empty() {
        return Err(Error::Grid("nothing to plot".into()));
    }
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 50.0;

    let xs = &result.parameter;
    let ys = &result.susceptibility;
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let finite = ys.iter().copied().filter(|y| y.is_finite());
    let (mut y0, mut y1) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
    if !y0.is_finite() {
        y0 = -1.0;
        y1 = 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let xspan = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| LEFT + (x - x0) / xspan * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for k in 0..=4 {
        let fx = x0 + xspan * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            px(fx),
            H - BOTTOM + 16.0,
            format_sig(fx, 4)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py(fy) + 4.0,
            format_sig(fy, 4)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 10.0,
        xml_escape(parameter_name)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">dC/d{}</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0,
        xml_escape(parameter_name)
    );

    let mut d = String::new();
    let mut pen_down = false;
    for (&x, &y) in xs.iter().zip(ys) {
        if !y.is_finite() {
            pen_down = false;
            continue;
        }
        let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(x), py(y));
        pen_down = true;
    }
    let _ = writeln!(
        svg,
        r#"<path d="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        d.trim_end()
    );
    for cp in &result.critical_points {
        let x = px(cp.location);
        let _ = writeln!(
            svg,
            r#"<line class="critical" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="firebrick" stroke-dasharray="6,4"/>"#,
            H - BOTTOM
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Xxz,
    Kitaev,
    StateFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub quadrature: f64,
    pub optimizer: OptimizerOptions,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: 1e-6,
            optimizer: OptimizerOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub model: Model,
    pub range: ScanRange,
    pub link: Option<LinkType>,
    /// Kitaev line; the symmetric line when absent.
    pub line: Option<KitaevLine>,
    pub tolerances: Tolerances,
    pub output: OutputPaths,
}

/// Tabulated scan plus the derived curve analysis.
#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub parameter_name: &'static str,
    pub table: Table,
    pub result: ScanResult,
}

impl ScanOutput {
    /// Writes whichever outputs are configured.
    pub fn emit(&self, output: &OutputPaths) -> Result<()> {
        if let Some(p) = &output.csv {
            emit_csv(&self.table, p)?;
        }
        if let Some(p) = &output.svg {
            emit_svg(&self.result, self.parameter_name, p)?;
        }
        if let Some(p) = &output.json {
            emit_json(&self.result, p)?;
        }
        Ok(())
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let ScanRange { min, max, step } = self.range;
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(Error::Config("range must be finite".into()));
        }
        if min >= max {
            return Err(Error::Config(format!("min ({min}) must be below max ({max})")));
        }
        if step <= 0.0 {
            return Err(Error::Config(format!("step must be positive, got {step}")));
        }
        if step >= (max - min) / 10.0 {
            return Err(Error::Config(format!(
                "step {step} too coarse: need fewer than a tenth of the range ({})",
                max - min
            )));
        }
        if !(1e-10..=1e-3).contains(&self.tolerances.quadrature) {
            return Err(Error::Config(format!(
                "quadrature tolerance {} outside [1e-10, 1e-3]",
                self.tolerances.quadrature
            )));
        }
        self.tolerances.optimizer.validate()?;
        match self.model {
            Model::Xxz => Ok(()),
            Model::Kitaev => {
                if min < 0.0 || max > 1.0 {
                    return Err(Error::Config(format!("jz range [{min}, {max}] leaves [0, 1]")));
                }
                Ok(())
            }
            Model::StateFile => Err(Error::Config("a state file is not a parameter scan".into())),
        }
    }

    pub fn run(&self) -> Result<ScanOutput> {
        self.validate()?;
        let ScanRange { min, max, step } = self.range;
        match self.model {
            Model::Xxz => {
                let scan = xxz::xxz_scan(min, max, step)?;
                Ok(ScanOutput {
                    parameter_name: "delta",
                    table: scan.table(),
                    result: scan.result,
                })
            }
            Model::Kitaev => {
                let link = self.link.unwrap_or(LinkType::Z);
                let line = self.line.unwrap_or_default();
                let scan = kitaev::line_scan_on(line, min, max, step, link, self.tolerances.quadrature)?;
                Ok(ScanOutput {
                    parameter_name: "jz",
                    table: scan.table(),
                    result: scan.result,
                })
            }
            Model::StateFile => unreachable!("rejected by validate"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_and_snapping() {
        let g = grid(-2.0, 3.0, 0.01).unwrap();
        assert_eq!(g.len(), 501);
        assert_eq!(g[0], -2.0);
        assert_eq!(g[100], -1.0);
        assert_eq!(g[300], 1.0);
        assert_eq!(*g.last().unwrap(), 3.0);
        assert!(grid(1.0, 1.0, 0.1).is_err());
        assert!(grid(0.0, 1.0, 0.0).is_err());
        assert!(grid(0.0, f64::NAN, 0.1).is_err());
    }

    #[test]
    fn susceptibility_of_linear_and_quadratic() {
        let x = grid(0.0, 1.0, 0.1).unwrap();
        let lin: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        for s in susceptibility(&x, &lin).unwrap() {
            assert!((s - 2.0).abs() < 1e-12);
        }
        let quad: Vec<f64> = x.iter().map(|v| v * v).collect();
        let s = susceptibility(&x, &quad).unwrap();
        for i in 0..x.len() {
            assert!((s[i] - 2.0 * x[i]).abs() < 1e-12, "{i}: {}", s[i]);
        }
    }

    #[test]
    fn susceptibility_rejects_short_or_uneven_grids() {
        assert!(susceptibility(&[0.0, 1.0, 2.0, 3.0], &[0.0; 4]).is_err());
        assert!(susceptibility(&[0.0, 1.0, 2.0, 3.0, 5.0], &[0.0; 5]).is_err());
        assert!(susceptibility(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0; 4]).is_err());
    }

    #[test]
    fn smooth_curve_has_no_kinks() {
        let x = grid(0.0, 1.0, 0.01).unwrap();
        let v: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        assert!(detect_kinks(&x, &v, 8.0).unwrap().is_empty());
        let zero = vec![0.0; x.len()];
        assert!(detect_kinks(&x, &zero, 8.0).unwrap().is_empty());
    }

    #[test]
    fn constructed_kink_is_found() {
        let x = grid(0.0, 1.0, 0.01).unwrap();
        let v: Vec<f64> = x.iter().map(|t| t.abs().max(0.5)).collect();
        let cps = detect_kinks(&x, &v, 8.0).unwrap();
        assert_eq!(cps.len(), 1, "{cps:?}");
        assert!((cps[0].location - 0.5).abs() <= 0.01 + 1e-12);
        assert_eq!(cps[0].kind, CriticalKind::Kink);
    }

    #[test]
    fn jump_is_labelled() {
        let x = grid(0.0, 1.0, 0.01).unwrap();
        let v: Vec<f64> = x.iter().map(|&t| if t < 0.305 { 1.0 } else { 0.5 - 0.3 * t }).collect();
        let cps = detect_kinks(&x, &v, 8.0).unwrap();
        assert_eq!(cps.len(), 1, "{cps:?}");
        assert!((cps[0].location - 0.305).abs() <= 0.01);
        assert_eq!(cps[0].kind, CriticalKind::Discontinuity);
    }

    #[test]
    fn format_matches_printf_g() {
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(1.0, 12), "1");
        assert_eq!(format_sig(-0.5, 12), "-0.5");
        assert_eq!(format_sig(std::f64::consts::PI, 12), "3.14159265359");
        assert_eq!(format_sig(1e-5, 12), "1e-05");
        assert_eq!(format_sig(1.5e13, 12), "1.5e+13");
        assert_eq!(format_sig(123456.789, 12), "123456.789");
        assert_eq!(format_sig(0.0001234, 12), "0.0001234");
        assert_eq!(format_sig(f64::NAN, 12), "nan");
        assert_eq!(format_sig(999999999999.9, 12), "1e+12");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let table = Table {
            header: vec!["a".into(), "b".into()],
            rows: (0..3).map(|i| vec![Cell::Number(i as f64 * 0.1), Cell::Text("x".into())]).collect(),
        };
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv, "a,b\n0,x\n0.1,x\n0.2,x\n");
    }

    #[test]
    fn svg_marks_each_critical_point() {
        let x = grid(0.0, 1.0, 0.01).unwrap();
        let v: Vec<f64> = x.iter().map(|t| t.abs().max(0.5)).collect();
        let r = ScanResult::from_curve(x, v, 8.0).unwrap();
        let svg = render_svg(&r, "x").unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
        assert!(!svg.contains("href"));
    }

    #[test]
    fn config_validation() {
        let mut cfg = ScanConfig {
            model: Model::Xxz,
            range: ScanRange { min: -2.0, max: 3.0, step: 0.01 },
            link: None,
            line: None,
            tolerances: Tolerances::default(),
            output: OutputPaths::default(),
        };
        assert!(cfg.validate().is_ok());
        cfg.range.step = 0.6;
        assert!(cfg.validate().is_err());
        cfg.range = ScanRange { min: 1.0, max: 1.0, step: 0.01 };
        assert!(cfg.validate().is_err());
        cfg.model = Model::Kitaev;
        cfg.range = ScanRange { min: 0.0, max: 1.2, step: 0.01 };
        assert!(cfg.validate().is_err());
    }
}
