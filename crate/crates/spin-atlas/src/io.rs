//! File formats: spec files, sweep tables, feature reports, temperature-shift
//! tables, PL traces and fit reports.
//!
//! Numbers are written with fixed precision (fields 0.01 G, energies
//! 1e-4 MHz, slopes 1e-4 G/K, projections 1e-6) so that equal inputs give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use spin_atlas_core::spin::SpinSystemSpec;
use spin_atlas_core::sweep::{CrossingFeature, CrossingKind, FeatureKind, SpectralLine, SweepResult, TemperatureShift};
use spin_atlas_core::trace::{DipFit, Trace, TraceDefect};
use spin_atlas_core::Error;

use crate::AtlasError;

/// Decimals for fields, G.
pub const FIELD_DECIMALS: usize = 2;
/// Decimals for energies, MHz.
pub const ENERGY_DECIMALS: usize = 4;
/// Decimals for slopes, G/K.
pub const SLOPE_DECIMALS: usize = 4;
/// Decimals for projections and other dimensionless numbers.
pub const RATIO_DECIMALS: usize = 6;

/// `x` printed with `d` decimals; negative zero is printed as zero.
pub fn fixed(x: f64, d: usize) -> String {
    let s = format!("{x:.d$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// `x` rounded to `d` decimals (for JSON output).
pub fn rounded(x: f64, d: usize) -> f64 {
    if !x.is_finite() {
        return x;
    }
    fixed(x, d).parse().unwrap_or(x)
}

/// Read a file to a string.
pub fn read_text(path: &Path) -> Result<String, AtlasError> {
    fs::read_to_string(path).map_err(|e| AtlasError::io(path, e))
}

/// Write `contents` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), AtlasError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path.file_name().ok_or_else(|| AtlasError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(AtlasError::io(path, e));
    }
    Ok(())
}

/// Load a spin-system spec file (JSON).
pub fn load_spec(path: &Path) -> Result<SpinSystemSpec, AtlasError> {
    let text = read_text(path)?;
    SpinSystemSpec::from_json(&text).map_err(|e| match e {
        Error::SpecParse(m) => AtlasError::parse(path, m),
        other => AtlasError::Core(other),
    })
}

/// Sweep as CSV: `B_gauss,eps_0..eps_{n-1},p_0..p_{n-1}`.
pub fn sweep_csv(sr: &SweepResult) -> String {
    let n = sr.dimension();
    let mut out = String::from("B_gauss");
    for i in 0..n {
        let _ = write!(out, ",eps_{i}");
    }
    for i in 0..n {
        let _ = write!(out, ",p_{i}");
    }
    out.push('\n');
    for k in 0..sr.len() {
        out.push_str(&fixed(sr.field_grid[k], FIELD_DECIMALS));
        for e in &sr.eigenvalues[k] {
            out.push(',');
            out.push_str(&fixed(*e, ENERGY_DECIMALS));
        }
        for p in &sr.projections[k] {
            out.push(',');
            out.push_str(&fixed(*p, RATIO_DECIMALS));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct SweepDoc {
    temperature_K: f64,
    zfs_MHz: f64,
    shift_applied_MHz: f64,
    field_grid: Vec<f64>,
    eigenvalues: Vec<Vec<f64>>,
    projections: Vec<Vec<f64>>,
}

/// Sweep as JSON.
pub fn sweep_json(sr: &SweepResult) -> String {
    let doc = SweepDoc {
        temperature_K: sr.temperature,
        zfs_MHz: rounded(sr.zfs, ENERGY_DECIMALS),
        shift_applied_MHz: rounded(sr.shift_applied, ENERGY_DECIMALS),
        field_grid: sr.field_grid.iter().map(|&b| rounded(b, FIELD_DECIMALS)).collect(),
        eigenvalues: sr.eigenvalues.iter().map(|w| w.iter().map(|&e| rounded(e, ENERGY_DECIMALS)).collect()).collect(),
        projections: sr.projections.iter().map(|w| w.iter().map(|&p| rounded(p, RATIO_DECIMALS)).collect()).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serialisable") + "\n"
}

fn kind_str(k: CrossingKind) -> &'static str {
    match k {
        CrossingKind::True => "true",
        CrossingKind::Avoided => "avoided",
    }
}

fn feature_kind_str(k: FeatureKind) -> &'static str {
    match k {
        FeatureKind::True => "true",
        FeatureKind::Avoided => "avoided",
        FeatureKind::Mixed => "mixed",
    }
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct EventDoc {
    field_G: f64,
    levels: (usize, usize),
    min_gap_MHz: f64,
    kind: &'static str,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct LineDoc {
    field_G: f64,
    kind: &'static str,
    min_gap_MHz: f64,
    events: Vec<EventDoc>,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct FeatureDoc {
    center_G: f64,
    span_G: (f64, f64),
    kind: &'static str,
    min_gap_MHz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_G_per_K: Option<f64>,
    lines: Vec<LineDoc>,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct ReportDoc<'a> {
    system: &'a str,
    temperature_K: f64,
    zfs_MHz: f64,
    range_G: (f64, f64),
    features: Vec<FeatureDoc>,
}

/// Context printed at the top of a feature report.
#[derive(Debug, Clone, Copy)]
pub struct ReportHeader<'a> {
    /// System id or spec path.
    pub system: &'a str,
    /// Temperature, K.
    pub temperature: f64,
    /// Zero-field splitting, MHz.
    pub zfs: f64,
    /// Swept range, G.
    pub range: (f64, f64),
}

fn line_doc(l: &SpectralLine) -> LineDoc {
    LineDoc {
        field_G: rounded(l.field, FIELD_DECIMALS),
        kind: kind_str(l.kind),
        min_gap_MHz: rounded(l.min_gap, ENERGY_DECIMALS),
        events: l
            .events
            .iter()
            .map(|e| EventDoc {
                field_G: rounded(e.field, FIELD_DECIMALS),
                levels: e.levels,
                min_gap_MHz: rounded(e.min_gap, ENERGY_DECIMALS),
                kind: kind_str(e.kind),
            })
            .collect(),
    }
}

/// Feature report as JSON. `slopes[i]` belongs to `features[i]`.
pub fn features_json(h: &ReportHeader<'_>, features: &[CrossingFeature], slopes: &[Option<f64>]) -> String {
    let doc = ReportDoc {
        system: h.system,
        temperature_K: h.temperature,
        zfs_MHz: rounded(h.zfs, ENERGY_DECIMALS),
        range_G: (rounded(h.range.0, FIELD_DECIMALS), rounded(h.range.1, FIELD_DECIMALS)),
        features: features
            .iter()
            .enumerate()
            .map(|(i, f)| FeatureDoc {
                center_G: rounded(f.center, FIELD_DECIMALS),
                span_G: (rounded(f.span.0, FIELD_DECIMALS), rounded(f.span.1, FIELD_DECIMALS)),
                kind: feature_kind_str(f.kind),
                min_gap_MHz: rounded(f.min_gap, ENERGY_DECIMALS),
                slope_G_per_K: slopes.get(i).copied().flatten().map(|s| rounded(s, SLOPE_DECIMALS)),
                lines: f.lines.iter().map(line_doc).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serialisable") + "\n"
}

/// Feature report as CSV, one row per feature.
pub fn features_csv(features: &[CrossingFeature], slopes: &[Option<f64>]) -> String {
    let mut out = String::from("center_G,span_lo_G,span_hi_G,kind,min_gap_MHz,lines,slope_G_per_K\n");
    for (i, f) in features.iter().enumerate() {
        let slope = slopes.get(i).copied().flatten().map(|s| fixed(s, SLOPE_DECIMALS)).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fixed(f.center, FIELD_DECIMALS),
            fixed(f.span.0, FIELD_DECIMALS),
            fixed(f.span.1, FIELD_DECIMALS),
            feature_kind_str(f.kind),
            fixed(f.min_gap, ENERGY_DECIMALS),
            f.lines.len(),
            slope
        );
    }
    out
}

/// Temperature shift as CSV with `#` metadata lines for the slope and any
/// temperatures at which the feature was lost.
pub fn tshift_csv(ts: &TemperatureShift) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# reference_center_G,{}", fixed(ts.reference_center, FIELD_DECIMALS));
    match ts.slope_300k {
        Some(s) => _ = writeln!(out, "# slope_300K_G_per_K,{}", fixed(s, SLOPE_DECIMALS)),
        None => out.push_str("# slope_300K_G_per_K,\n"),
    }
    if !ts.lost_at.is_empty() {
        let lost: Vec<String> = ts.lost_at.iter().map(|t| fixed(*t, 2)).collect();
        let _ = writeln!(out, "# lost_at_K,{}", lost.join(","));
    }
    out.push_str("T_K,center_G,delta_B_G\n");
    for p in &ts.points {
        let _ = writeln!(out, "{},{},{}", fixed(p.t, 2), fixed(p.center, FIELD_DECIMALS), fixed(p.delta_b, FIELD_DECIMALS));
    }
    out
}

/// Parse a PL trace: optional `# temperature_K,<value>` line, header
/// `B_gauss,pl`, then one row per sample. `path` is used in messages.
pub fn parse_trace(text: &str, path: &Path) -> Result<Trace, AtlasError> {
    let mut temperature = None;
    let mut body = String::with_capacity(text.len());
    let mut offsets = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(meta) = t.strip_prefix('#') {
            let mut parts = meta.split(',').map(str::trim);
            if parts.next() == Some("temperature_K") {
                let v = parts.next().unwrap_or("");
                temperature = Some(
                    v.parse::<f64>()
                        .map_err(|_| AtlasError::parse(path, format!("line {}: bad temperature '{v}'", lineno + 1)))?,
                );
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        body.push_str(line);
        body.push('\n');
        offsets.push(lineno + 1);
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(body.as_bytes());
    let headers = rdr.headers().map_err(|e| AtlasError::parse(path, e.to_string()))?.clone();
    if headers.len() < 2 || &headers[0] != "B_gauss" || &headers[1] != "pl" {
        return Err(AtlasError::parse(path, format!("expected header 'B_gauss,pl', found '{}'", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let (mut field, mut pl) = (Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let line = offsets.get(row + 1).copied().unwrap_or(0);
        let rec = rec.map_err(|e| AtlasError::parse(path, format!("line {line}: {e}")))?;
        let num = |i: usize, what: &str| -> Result<Option<f64>, AtlasError> {
            match rec.get(i).filter(|s| !s.is_empty()) {
                None => Ok(None),
                Some(s) => s.parse().map(Some).map_err(|_| AtlasError::parse(path, format!("line {line}: bad {what} '{s}'"))),
            }
        };
        if rec.len() > 2 {
            return Err(AtlasError::parse(path, format!("line {line}: expected 2 columns, found {}", rec.len())));
        }
        if let Some(b) = num(0, "field")? {
            field.push(b);
        }
        if let Some(p) = num(1, "pl")? {
            pl.push(p);
        }
    }
    Ok(Trace::new(field, pl, temperature)?)
}

/// Load a PL trace from a CSV file.
pub fn load_trace(path: &Path) -> Result<Trace, AtlasError> {
    parse_trace(&read_text(path)?, path)
}

/// Trace as CSV (inverse of [`parse_trace`]); values written with full
/// precision.
pub fn trace_csv(t: &Trace) -> String {
    let mut out = String::new();
    if let Some(temp) = t.temperature() {
        let _ = writeln!(out, "# temperature_K,{temp}");
    }
    out.push_str("B_gauss,pl\n");
    for (b, p) in t.field().iter().zip(t.pl()) {
        let _ = writeln!(out, "{b},{p}");
    }
    out
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct DipDoc {
    center_G: f64,
    center_err_G: f64,
    hwhm_G: f64,
    hwhm_err_G: f64,
    depth: f64,
    depth_err: f64,
    contrast_percent: f64,
    removable: bool,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct BaselineDoc {
    a: f64,
    b_per_G: f64,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct FitDoc {
    dips: Vec<DipDoc>,
    baseline: BaselineDoc,
    residual_rms: f64,
    converged: bool,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    central_G: Option<f64>,
    separations_G: Vec<f64>,
}

/// Fit report as JSON. Infinite uncertainties (vanishing dips) are written
/// as null.
pub fn fit_json(fit: &DipFit, central: Option<f64>, separations: &[f64]) -> String {
    let doc = FitDoc {
        dips: fit
            .dips
            .iter()
            .map(|d| DipDoc {
                center_G: rounded(d.center, 4),
                center_err_G: rounded(d.center_err, 4),
                hwhm_G: rounded(d.hwhm, 4),
                hwhm_err_G: rounded(d.hwhm_err, 4),
                depth: rounded(d.depth, RATIO_DECIMALS),
                depth_err: rounded(d.depth_err, RATIO_DECIMALS),
                contrast_percent: rounded(d.contrast_percent(), 4),
                removable: d.removable,
            })
            .collect(),
        baseline: BaselineDoc { a: rounded(fit.baseline.0, 8), b_per_G: rounded(fit.baseline.1, 10) },
        residual_rms: rounded(fit.residual_rms, 8),
        converged: fit.converged,
        iterations: fit.iterations,
        central_G: central.map(|c| rounded(c, 4)),
        separations_G: separations.iter().map(|s| rounded(*s, 4)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serialisable") + "\n"
}

/// Distinguish trace validation failures from other errors.
pub fn trace_defect(e: &AtlasError) -> Option<&TraceDefect> {
    match e {
        AtlasError::Core(Error::InvalidTrace(d)) => Some(d),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_precision() {
        assert_eq!(fixed(591.3649, 2), "591.36");
        assert_eq!(fixed(-0.0001, 2), "0.00");
        assert_eq!(fixed(-0.025_14, 4), "-0.0251");
        assert_eq!(rounded(1024.256, 2), 1024.26);
    }

    #[test]
    fn trace_parsing() {
        let mut text = String::from("# temperature_K,300\nB_gauss,pl\n");
        for i in 0..20 {
            text.push_str(&format!("{},{}\n", 500 + i, 1.0));
        }
        let t = parse_trace(&text, Path::new("t.csv")).unwrap();
        assert_eq!(t.len(), 20);
        assert_eq!(t.temperature(), Some(300.0));
        let again = parse_trace(&trace_csv(&t), Path::new("t.csv")).unwrap();
        assert_eq!(again, t);

        let short = text.replace("519,1\n", "519\n");
        let e = parse_trace(&short, Path::new("t.csv")).unwrap_err();
        assert!(matches!(trace_defect(&e), Some(TraceDefect::LengthMismatch { field: 20, pl: 19 })));
        let bad = text.replace("505,1", "505,x");
        assert!(matches!(parse_trace(&bad, Path::new("t.csv")), Err(AtlasError::Parse { .. })));
        let desc = text.replace("505,1", "400,1");
        let e = parse_trace(&desc, Path::new("t.csv")).unwrap_err();
        assert!(matches!(trace_defect(&e), Some(TraceDefect::NonMonotonic { .. })));
    }
}
