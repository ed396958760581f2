//! Validation experiments comparing median filter steps with the
//! predicted PDE time steps.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{invalid, Result};
use crate::filter::{iterate_filter, MedianSpec, MedianVariant};
use crate::pde::{jet_from_analytic, l1_rhs_22, oja_rhs_22, oja_rhs_23, oja_rhs_33, PdeUpdate};
use crate::scheme::{evolve, SchemeConfig};
use crate::window::{rasterize, sample_ball, sample_disc, AnalyticField, MultiChannelImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdeKind {
    L1Planar,
    OjaPlanar,
    OjaVolume,
    OjaThreeChannel,
}

impl PdeKind {
    pub fn evaluate(self, field: &AnalyticField, location: &[f64], rho: f64) -> Result<PdeUpdate> {
        let jet = jet_from_analytic(field, location)?;
        match self {
            PdeKind::L1Planar => l1_rhs_22(&jet, rho),
            PdeKind::OjaPlanar => oja_rhs_22(&jet, rho),
            PdeKind::OjaVolume => oja_rhs_33(&jet, rho),
            PdeKind::OjaThreeChannel => oja_rhs_23(&jet, rho),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NamedSpec {
    pub name: String,
    pub spec: MedianSpec,
}

impl NamedSpec {
    pub fn new(name: &str, variant: MedianVariant) -> Self {
        NamedSpec {
            name: name.to_string(),
            spec: MedianSpec::new(variant),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ValidationCase {
    pub label: String,
    pub field: AnalyticField,
    pub location: Vec<f64>,
    pub rho: f64,
    pub h: f64,
    pub variants: Vec<NamedSpec>,
    pub pde: Option<PdeKind>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariantResult {
    pub name: String,
    /// Median minus the centre value.
    pub update: Vec<f64>,
    /// `|update − τ·rhs| / |τ·rhs|`; absent without a PDE reference.
    pub rel_error: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRow {
    pub label: String,
    pub location: Vec<f64>,
    pub rho: f64,
    pub h: f64,
    pub points: usize,
    pub pde_step: Option<Vec<f64>>,
    pub variants: Vec<VariantResult>,
}

/// Relative deviation of a median update from the PDE step.
pub fn relative_error(update: &[f64], step: &[f64]) -> f64 {
    let num: f64 = update.iter().zip(step).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = step.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

pub fn run_case(case: &ValidationCase) -> Result<ValidationRow> {
    let m = case.field.domain_dim();
    if case.location.len() != m {
        return Err(invalid("location dimension differs from field domain"));
    }
    let se = match m {
        2 => sample_disc(case.rho, case.h)?,
        _ => sample_ball(case.rho, case.h)?,
    };
    let cloud = rasterize(&case.field, &se, &case.location)?;
    let centre = case.field.eval(&case.location);
    let pde_step = match case.pde {
        Some(k) => Some(k.evaluate(&case.field, &case.location, case.rho)?.step()),
        None => None,
    };
    let mut variants = Vec::with_capacity(case.variants.len());
    for v in &case.variants {
        let out = v.spec.apply(&cloud)?;
        let update: Vec<f64> = out
            .value
            .as_slice()
            .iter()
            .zip(&centre)
            .map(|(a, b)| a - b)
            .collect();
        let rel_error = pde_step
            .as_ref()
            .filter(|s| s.iter().any(|v| *v != 0.0))
            .map(|s| relative_error(&update, s));
        variants.push(VariantResult {
            name: v.name.clone(),
            update,
            rel_error,
            converged: out.converged && !out.fallback,
            iterations: out.iterations,
        });
    }
    Ok(ValidationRow {
        label: case.label.clone(),
        location: case.location.clone(),
        rho: case.rho,
        h: case.h,
        points: cloud.len(),
        pde_step,
        variants,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl TableId {
    pub const ALL: [TableId; 5] = [TableId::T1, TableId::T2, TableId::T3, TableId::T4, TableId::T5];

    /// Factor applied to updates in the CSV output.
    pub fn scale(self) -> f64 {
        match self {
            TableId::T3 => 1e4,
            _ => 1e6,
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TableId::T1 => "t1",
            TableId::T2 => "t2",
            TableId::T3 => "t3",
            TableId::T4 => "t4",
            TableId::T5 => "t5",
        };
        f.write_str(s)
    }
}

impl FromStr for TableId {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(TableId::T1),
            "t2" => Ok(TableId::T2),
            "t3" => Ok(TableId::T3),
            "t4" => Ok(TableId::T4),
            "t5" => Ok(TableId::T5),
            _ => Err(invalid(format!("unknown table '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TableOptions {
    /// Use the full sampling of the volume table.
    pub long: bool,
    /// Replaces the table's grid step.
    pub h: Option<f64>,
}

/// Default volume-table grid step; the long run uses 0.15.
pub const T3_DESK_H: f64 = 0.2;
pub const T3_FULL_H: f64 = 0.15;

/// Evaluation points of the radial comparison tables, rounded
/// to four digits, so "c" is deliberately not exactly on the unit diagonal.
#[allow(clippy::approx_constant)]
pub const RADIAL_LOCATIONS: [(&str, [f64; 2]); 7] = [
    ("a", [0.9986, 0.0523]),
    ("b", [0.9659, 0.2588]),
    ("c", [0.7071, 0.7071]),
    ("d", [0.2588, 0.9659]),
    ("e", [0.0523, 0.9986]),
    ("f", [0.1000, 0.1000]),
    ("g", [0.3000, 0.3000]),
];

/// `(x², |(x, y)|)`.
pub fn radial_field() -> AnalyticField {
    AnalyticField::new(2, 2, |p| vec![p[0] * p[0], p[0].hypot(p[1])])
}

fn planar2(label: &str, f: fn(f64, f64) -> [f64; 2]) -> (String, AnalyticField) {
    (label.to_string(), AnalyticField::new(2, 2, move |p| f(p[0], p[1]).to_vec()))
}

fn planar3(label: &str, f: fn(f64, f64) -> [f64; 3]) -> (String, AnalyticField) {
    (label.to_string(), AnalyticField::new(2, 3, move |p| f(p[0], p[1]).to_vec()))
}

fn volume(label: &str, f: fn(f64, f64, f64) -> [f64; 3]) -> (String, AnalyticField) {
    (label.to_string(), AnalyticField::new(3, 3, move |p| f(p[0], p[1], p[2]).to_vec()))
}

/// Cases making up one table, in the table's row order.
pub fn table_cases(table: TableId, opts: TableOptions) -> Vec<ValidationCase> {
    let simple = |rows: Vec<(String, AnalyticField)>, h: f64, variants: Vec<NamedSpec>, pde| {
        rows.into_iter()
            .map(|(label, field)| ValidationCase {
                location: vec![0.0; field.domain_dim()],
                label,
                field,
                rho: 1.0,
                h,
                variants: variants.clone(),
                pde: Some(pde),
            })
            .collect::<Vec<_>>()
    };
    let radial = |h: f64, variants: Vec<NamedSpec>, pde| {
        RADIAL_LOCATIONS
            .iter()
            .map(|(label, loc)| ValidationCase {
                label: label.to_string(),
                field: radial_field(),
                location: loc.to_vec(),
                rho: 0.1,
                h,
                variants: variants.clone(),
                pde: Some(pde),
            })
            .collect::<Vec<_>>()
    };
    match table {
        TableId::T1 => simple(
            vec![
                planar2("u=x+0.05x^2 v=y", |x, y| [x + 0.05 * x * x, y]),
                planar2("u=x+0.1xy v=y", |x, y| [x + 0.1 * x * y, y]),
                planar2("u=x+0.05y^2 v=y", |x, y| [x + 0.05 * y * y, y]),
            ],
            opts.h.unwrap_or(0.01),
            vec![
                NamedSpec::new("L1", MedianVariant::L1),
                NamedSpec::new("Oja", MedianVariant::OjaFull),
            ],
            PdeKind::OjaPlanar,
        ),
        TableId::T2 => simple(
            vec![
                planar3("u=x w=0.05x^2", |x, y| [x, y, 0.05 * x * x]),
                planar3("u=x w=0.1xy", |x, y| [x, y, 0.1 * x * y]),
                planar3("u=x w=0.05y^2", |x, y| [x, y, 0.05 * y * y]),
                planar3("u=x+0.05x^2 w=0.05x^2", |x, y| [x + 0.05 * x * x, y, 0.05 * x * x]),
                planar3("u=x+0.05x^2 w=0.1xy", |x, y| [x + 0.05 * x * x, y, 0.1 * x * y]),
                planar3("u=x+0.05x^2 w=0.05y^2", |x, y| [x + 0.05 * x * x, y, 0.05 * y * y]),
            ],
            opts.h.unwrap_or(0.01),
            vec![
                NamedSpec::new("L1", MedianVariant::L1),
                NamedSpec::new("Oja", MedianVariant::Oja2In3),
            ],
            PdeKind::OjaThreeChannel,
        ),
        TableId::T3 => simple(
            vec![
                volume("u=x+0.05x^2", |x, y, z| [x + 0.05 * x * x, y, z]),
                volume("u=x+0.1xy", |x, y, z| [x + 0.1 * x * y, y, z]),
                volume("u=x+0.1xz", |x, y, z| [x + 0.1 * x * z, y, z]),
                volume("u=x+0.05y^2", |x, y, z| [x + 0.05 * y * y, y, z]),
                volume("u=x+0.1yz", |x, y, z| [x + 0.1 * y * z, y, z]),
                volume("u=x+0.05z^2", |x, y, z| [x + 0.05 * z * z, y, z]),
            ],
            opts.h.unwrap_or(if opts.long { T3_FULL_H } else { T3_DESK_H }),
            vec![
                NamedSpec::new("L1", MedianVariant::L1),
                NamedSpec::new("Oja", MedianVariant::OjaFull),
            ],
            PdeKind::OjaVolume,
        ),
        TableId::T4 => radial(
            opts.h.unwrap_or(0.001),
            vec![NamedSpec::new("L1", MedianVariant::L1)],
            PdeKind::L1Planar,
        ),
        TableId::T5 => radial(
            opts.h.unwrap_or(0.001),
            vec![
                NamedSpec::new("Oja", MedianVariant::OjaFull),
                NamedSpec::new("TR-L1", MedianVariant::TrL1),
            ],
            PdeKind::OjaPlanar,
        ),
    }
}

/// Runs every row of a table in order.
pub fn run_table(table: TableId, opts: TableOptions) -> Result<Vec<ValidationRow>> {
    table_cases(table, opts).iter().map(run_case).collect()
}

const CHANNELS: [&str; 3] = ["u", "v", "w"];

/// Writes rows as CSV with a header line.
///
/// Updates are scaled by [`TableId::scale`]; relative errors are in percent.
pub fn write_csv(table: TableId, rows: &[ValidationRow], out: &mut impl Write) -> Result<()> {
    let Some(first) = rows.first() else {
        return Ok(());
    };
    let exp = table.scale().log10().round() as i32;
    let with_err = matches!(table, TableId::T4 | TableId::T5) && first.pde_step.is_some();
    let n = first.pde_step.as_ref().map_or(first.variants[0].update.len(), Vec::len);
    let mut head = vec!["Function".to_string()];
    head.extend(["x", "y", "z"].iter().take(first.location.len()).map(|s| s.to_string()));
    head.extend(["rho", "h", "N"].map(String::from));
    for v in &first.variants {
        for c in &CHANNELS[..n] {
            head.push(format!("{} 10^{exp}{c}*", v.name));
        }
        if with_err {
            head.push(format!("{} Rel. err (%)", v.name));
        }
        head.push(format!("{} converged", v.name));
    }
    if first.pde_step.is_some() {
        for c in &CHANNELS[..n] {
            head.push(format!("PDE 10^{exp}tau {c}_t"));
        }
    }
    writeln!(out, "{}", head.join(","))?;
    let scale = table.scale();
    for r in rows {
        let mut cells = vec![r.label.clone()];
        cells.extend(r.location.iter().map(|v| format!("{v}")));
        cells.extend([format!("{}", r.rho), format!("{}", r.h), r.points.to_string()]);
        for v in &r.variants {
            cells.extend(v.update.iter().map(|u| format!("{:.1}", u * scale)));
            if with_err {
                cells.push(v.rel_error.map_or(String::new(), |e| format!("{:.2}", e * 100.0)));
            }
            cells.push(v.converged.to_string());
        }
        if let Some(s) = &r.pde_step {
            cells.extend(s.iter().map(|u| format!("{:.1}", u * scale)));
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResponseTerm {
    Uxx,
    Uyy,
    Vxy,
}

impl ResponseTerm {
    pub const ALL: [ResponseTerm; 3] = [ResponseTerm::Uxx, ResponseTerm::Uyy, ResponseTerm::Vxy];

    /// Slope of the linearised `u` response per unit `s`.
    pub fn linear_slope(self) -> f64 {
        match self {
            ResponseTerm::Uxx => 1.0 / 24.0,
            ResponseTerm::Uyy => 3.0 / 24.0,
            ResponseTerm::Vxy => 2.0 / 24.0,
        }
    }

    pub fn field(self, s: f64) -> AnalyticField {
        match self {
            ResponseTerm::Uxx => AnalyticField::new(2, 2, move |p| vec![p[0] + 0.5 * s * p[0] * p[0], p[1]]),
            ResponseTerm::Uyy => AnalyticField::new(2, 2, move |p| vec![p[0] + 0.5 * s * p[1] * p[1], p[1]]),
            ResponseTerm::Vxy => AnalyticField::new(2, 2, move |p| vec![p[0], p[1] - s * p[0] * p[1]]),
        }
    }
}

impl fmt::Display for ResponseTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResponseTerm::Uxx => "u_xx",
            ResponseTerm::Uyy => "u_yy",
            ResponseTerm::Vxy => "v_xy",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponsePoint {
    pub s: f64,
    /// `u` component of the Oja median update.
    pub response: f64,
    pub linear: f64,
    pub converged: bool,
}

/// Oja median `u` update at the origin for the field of `term` with
/// strength `s`, disc radius 1 and grid step `h`.
pub fn nonlinear_response(term: ResponseTerm, s_values: &[f64], h: f64) -> Result<Vec<ResponsePoint>> {
    let spec = MedianSpec::new(MedianVariant::OjaFull);
    let se = sample_disc(1.0, h)?;
    s_values
        .iter()
        .map(|&s| {
            if !(0.0..=2.5).contains(&s) {
                return Err(invalid(format!("s must lie in [0, 2.5], got {s}")));
            }
            let cloud = rasterize(&term.field(s), &se, &[0.0, 0.0])?;
            let out = spec.apply(&cloud)?;
            Ok(ResponsePoint {
                s,
                response: out.value[0],
                linear: term.linear_slope() * s,
                converged: out.converged && !out.fallback,
            })
        })
        .collect()
}

pub fn write_response_csv(curves: &[(ResponseTerm, Vec<ResponsePoint>)], out: &mut impl Write) -> Result<()> {
    writeln!(out, "term,s,u*,linear")?;
    for (t, pts) in curves {
        for p in pts {
            writeln!(out, "{t},{},{:.8},{:.8}", p.s, p.response, p.linear)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub time: f64,
    pub median: MultiChannelImage,
    pub pde: MultiChannelImage,
    /// Per channel.
    pub mean_abs_diff: Vec<f64>,
    pub max_abs_diff: Vec<f64>,
    pub median_converged_fraction: f64,
}

/// Evolution time of `iters` Oja median steps with disc radius `rho`.
pub fn median_time(rho: f64, iters: usize) -> f64 {
    iters as f64 * rho * rho / 24.0
}

/// Runs the iterated triangle Oja median filter and the scheme to the
/// same evolution time and compares the results.
///
/// `rho` is measured in the units of `cfg.h`.
pub fn compare_median_vs_pde(
    img: &MultiChannelImage,
    rho: f64,
    median_iters: usize,
    cfg: &SchemeConfig,
) -> Result<ComparisonReport> {
    if img.dims() != 2 || img.channels() != 3 {
        return Err(invalid("comparison needs a three-channel planar image"));
    }
    let t_med = median_time(rho, median_iters);
    let t_pde = cfg.evolution_time();
    if (t_med - t_pde).abs() > 1e-9 * t_med.max(t_pde) {
        return Err(invalid(format!(
            "evolution times differ: median {t_med}, scheme {t_pde}"
        )));
    }
    let se = sample_disc(rho, cfg.h)?;
    let med = iterate_filter(img, &se, &MedianSpec::new(MedianVariant::Oja2In3), median_iters)?;
    let pde = evolve(img, cfg)?.image;
    let c = img.channels();
    let mut mean = vec![0.0; c];
    let mut max = vec![0.0f64; c];
    for (i, (a, b)) in med.output.data().iter().zip(pde.data()).enumerate() {
        let d = (a - b).abs();
        mean[i % c] += d;
        max[i % c] = max[i % c].max(d);
    }
    for m in &mut mean {
        *m /= img.pixel_count() as f64;
    }
    Ok(ComparisonReport {
        time: t_med,
        median: med.output,
        pde,
        mean_abs_diff: mean,
        max_abs_diff: max,
        median_converged_fraction: med.converged_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_definition() {
        assert_eq!(relative_error(&[0.0, 0.0], &[3.0, 4.0]), 1.0);
        assert!((relative_error(&[1.1, 0.0], &[1.0, 0.0]) - 0.1).abs() < 1e-12);
        assert!((relative_error(&[1.0, 1.0], &[0.0, 2.0]) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_field_gives_zero_row() {
        let case = ValidationCase {
            label: "c".into(),
            field: AnalyticField::new(2, 2, |_| vec![0.3, -0.2]),
            location: vec![0.0, 0.0],
            rho: 1.0,
            h: 0.25,
            variants: vec![
                NamedSpec::new("L1", MedianVariant::L1),
                NamedSpec::new("Medoid", MedianVariant::Medoid),
            ],
            pde: None,
        };
        let row = run_case(&case).unwrap();
        assert_eq!(row.points, 49);
        for v in &row.variants {
            assert_eq!(v.update, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn table_shapes() {
        let counts = [3, 6, 6, 7, 7];
        for (t, n) in TableId::ALL.iter().zip(counts) {
            let cases = table_cases(*t, TableOptions::default());
            assert_eq!(cases.len(), n);
            assert!(cases.iter().all(|c| c.h <= c.rho));
            assert_eq!(t.to_string().parse::<TableId>().unwrap(), *t);
        }
        assert_eq!(table_cases(TableId::T3, TableOptions::default())[0].h, T3_DESK_H);
        assert_eq!(table_cases(TableId::T3, TableOptions { long: true, h: None })[0].h, T3_FULL_H);
        assert!("t9".parse::<TableId>().is_err());
    }

    #[test]
    fn coarse_table_one_and_csv() {
        let rows = run_table(TableId::T1, TableOptions { long: false, h: Some(0.1) }).unwrap();
        let pde = rows[0].pde_step.as_ref().unwrap();
        assert!((pde[0] - 0.1 / 24.0).abs() < 1e-9 && pde[1].abs() < 1e-9);
        // symmetry of the first and third rows keeps v at zero
        for r in [&rows[0], &rows[2]] {
            for v in &r.variants {
                assert!(v.update[1].abs() < 1e-9, "{v:?}");
            }
        }
        let mut buf = Vec::new();
        write_csv(TableId::T1, &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("Function,x,y,rho,h,N,L1 10^6u*,L1 10^6v*,L1 converged,Oja 10^6u*"), "{}", lines[0]);
        assert!(lines[0].ends_with("PDE 10^6tau u_t,PDE 10^6tau v_t"));
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == lines[0].split(',').count()));
    }

    #[test]
    fn response_is_zero_at_zero_strength() {
        for t in ResponseTerm::ALL {
            let r = nonlinear_response(t, &[0.0], 0.2).unwrap();
            assert!(r[0].response.abs() < 1e-9);
        }
        assert!(nonlinear_response(ResponseTerm::Uxx, &[3.0], 0.2).is_err());
    }

    #[test]
    fn comparison_time_matching() {
        assert!((median_time(2.0, 3) - 0.5).abs() < 1e-15);
        assert!((median_time(2.0, 9) - median_time(3.0, 4)).abs() < 1e-15);
        let img = MultiChannelImage::filled(&[6, 6], 1.0, &[0.2, 0.5, 0.7]).unwrap();
        let cfg = SchemeConfig { tau: 0.05, steps: 10, ..SchemeConfig::default() };
        let r = compare_median_vs_pde(&img, 2.0, 3, &cfg).unwrap();
        assert_eq!(r.time, 0.5);
        assert_eq!(r.max_abs_diff, vec![0.0; 3]);
        let bad = SchemeConfig { steps: 11, ..cfg };
        assert!(compare_median_vs_pde(&img, 2.0, 3, &bad).is_err());
    }
}
