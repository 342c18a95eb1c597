//! CSV and SVG artifacts of a training run.
//!
//! Numbers are written positionally with 17 significant digits, which is
//! enough to reproduce every `f64` exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::xor::{TrainRun, XorDataset};

/// `x` with 17 significant digits and no exponent, e.g. `0.025000000000000001`.
pub fn format_f64(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.0000000000000000".to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else if (exp as usize) + 1 < digits.len() {
        let (int, frac) = digits.split_at(exp as usize + 1);
        format!("{int}.{frac}")
    } else {
        format!("{}{}.0", digits, "0".repeat(exp as usize + 1 - digits.len()))
    };
    format!("{sign}{body}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes a header row and data rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}

/// One named polyline.
pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn svg_frame(title: &str, x_label: &str, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n",
            "<rect x=\"{p}\" y=\"{p}\" width=\"{iw}\" height=\"{ih}\" fill=\"none\" stroke=\"black\"/>\n",
            "<text x=\"{cx}\" y=\"{xl}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{x_label}</text>\n",
            "<text x=\"{p}\" y=\"{xl}\" font-family=\"sans-serif\" font-size=\"10\">{x0:.3}</text>\n",
            "<text x=\"{r}\" y=\"{xl}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{x1:.3}</text>\n",
            "<text x=\"4\" y=\"{b}\" font-family=\"sans-serif\" font-size=\"10\">{y0:.3}</text>\n",
            "<text x=\"4\" y=\"{t}\" font-family=\"sans-serif\" font-size=\"10\">{y1:.3}</text>\n",
        ),
        w = W,
        h = H,
        cx = W / 2.0,
        p = PAD,
        iw = W - 2.0 * PAD,
        ih = H - 2.0 * PAD,
        xl = H - 15.0,
        r = W - PAD,
        b = H - PAD,
        t = PAD + 10.0,
        title = title,
        x_label = x_label,
        x0 = x0,
        x1 = x1,
        y0 = y0,
        y1 = y1,
    )
}

fn project(v: f64, (lo, hi): (f64, f64), start: f64, len: f64) -> f64 {
    start + (v - lo) / (hi - lo) * len
}

/// A line chart of one or more series.
pub fn line_plot_svg(title: &str, x_label: &str, series: &[Series<'_>]) -> String {
    let xb = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yb = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let mut out = svg_frame(title, x_label, xb, yb);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| {
                let px = project(x, xb, PAD, W - 2.0 * PAD);
                let py = project(y, yb, H - PAD, -(H - 2.0 * PAD));
                format!("{px:.2},{py:.2}")
            })
            .collect();
        out += &format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>\n",
            pts.join(" ")
        );
        out += &format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            W - PAD - 90.0,
            PAD + 15.0 * (k as f64 + 1.0),
            s.name
        );
    }
    out + "</svg>\n"
}

/// Points in the unit square coloured by class, true labels on the left and
/// predictions on the right.
pub fn label_scatter_svg(title: &str, points: &[(f64, f64, u8, u8)]) -> String {
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{h}\" viewBox=\"0 0 {W} {h}\">\n\
         <rect width=\"{W}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{cx}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n",
        h = H,
        cx = W / 2.0,
    );
    let side = (W - 3.0 * PAD) / 2.0;
    for (panel, name) in ["true", "predicted"].iter().enumerate() {
        let x0 = PAD + panel as f64 * (side + PAD);
        out += &format!(
            "<rect x=\"{x0}\" y=\"{PAD}\" width=\"{side}\" height=\"{side}\" fill=\"none\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{name}</text>\n",
            x0 + side / 2.0,
            PAD + side + 20.0
        );
        for &(x, y, truth, pred) in points {
            let class = if panel == 0 { truth } else { pred };
            let color = if class == 0 { "#e6b800" } else { "#5b2c83" };
            out += &format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                x0 + x * side,
                PAD + (1.0 - y) * side
            );
        }
    }
    out + "</svg>\n"
}

/// Writes the CSV tables and plots of a training run into `out_dir`.
///
/// `loss.csv`, `val_accuracy.csv`, `params.csv` (row 0 is the initial point),
/// `test_report.csv`, `summary.csv` and one SVG per table.
pub fn emit_reports(run: &TrainRun, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let path = |name: &str| out_dir.join(name);
    let mut written = Vec::new();

    let loss_rows: Vec<Vec<String>> = run
        .history
        .iter()
        .enumerate()
        .map(|(i, h)| vec![(i + 1).to_string(), format_f64(h.loss)])
        .collect();
    write_csv(&path("loss.csv"), &["batch", "loss"], &loss_rows)?;

    let acc_rows: Vec<Vec<String>> = run
        .history
        .iter()
        .enumerate()
        .map(|(i, h)| vec![(i + 1).to_string(), format_f64(h.val_accuracy)])
        .collect();
    write_csv(&path("val_accuracy.csv"), &["batch", "accuracy"], &acc_rows)?;

    let param_rows: Vec<Vec<String>> = run
        .trajectory
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = vec![i.to_string()];
            row.extend(p.iter().map(|&v| format_f64(v)));
            row
        })
        .collect();
    write_csv(
        &path("params.csv"),
        &["batch", "theta1", "theta2", "alpha1", "alpha2"],
        &param_rows,
    )?;

    let test_rows: Vec<Vec<String>> = run
        .test_predictions
        .iter()
        .map(|(s, pred)| {
            vec![
                format_f64(s.x1),
                format_f64(s.x2),
                s.label.to_string(),
                pred.to_string(),
            ]
        })
        .collect();
    write_csv(&path("test_report.csv"), &["x1", "x2", "true", "predicted"], &test_rows)?;

    let c = &run.config;
    let [t1, t2, a1, a2] = run.model.all_four();
    let summary = vec![
        vec!["variant".into(), c.variant.name().into()],
        vec!["seed".into(), c.seed.to_string()],
        vec!["epochs".into(), c.epochs.to_string()],
        vec!["batch_size".into(), c.batch_size.to_string()],
        vec!["learning_rate".into(), format_f64(c.learning_rate)],
        vec!["shift".into(), format_f64(c.shift)],
        vec!["loss".into(), c.loss.name().into()],
        vec!["shots".into(), c.shots.map_or("exact".into(), |s| s.to_string())],
        vec!["batches".into(), run.history.len().to_string()],
        vec!["theta1".into(), format_f64(t1)],
        vec!["theta2".into(), format_f64(t2)],
        vec!["alpha1".into(), format_f64(a1)],
        vec!["alpha2".into(), format_f64(a2)],
        vec!["test_accuracy".into(), format_f64(run.test_accuracy)],
    ];
    write_csv(&path("summary.csv"), &["key", "value"], &summary)?;

    let xs = |f: &dyn Fn(usize) -> f64, n: usize, offset: usize| {
        (0..n).map(|i| ((i + offset) as f64, f(i))).collect::<Vec<_>>()
    };
    let n = run.history.len();
    write_text(
        &path("loss.svg"),
        &line_plot_svg(
            "Training loss",
            "batch",
            &[Series {
                name: "loss",
                points: xs(&|i| run.history[i].loss, n, 1),
            }],
        ),
    )?;
    write_text(
        &path("val_accuracy.svg"),
        &line_plot_svg(
            "Validation accuracy",
            "batch",
            &[Series {
                name: "accuracy",
                points: xs(&|i| run.history[i].val_accuracy, n, 1),
            }],
        ),
    )?;
    let names = ["theta1", "theta2", "alpha1", "alpha2"];
    let series: Vec<Series<'_>> = names
        .iter()
        .enumerate()
        .map(|(k, name)| Series {
            name,
            points: xs(&|i| run.trajectory[i][k], run.trajectory.len(), 0),
        })
        .collect();
    write_text(&path("params.svg"), &line_plot_svg("Parameters", "batch", &series))?;
    let pts: Vec<(f64, f64, u8, u8)> = run
        .test_predictions
        .iter()
        .map(|(s, p)| (s.x1, s.x2, s.label, *p))
        .collect();
    write_text(&path("test_report.svg"), &label_scatter_svg("Test set", &pts))?;

    for name in [
        "loss.csv",
        "val_accuracy.csv",
        "params.csv",
        "test_report.csv",
        "summary.csv",
        "loss.svg",
        "val_accuracy.svg",
        "params.svg",
        "test_report.svg",
    ] {
        written.push(path(name));
    }
    Ok(written)
}

/// All samples in train, validation, test order as `x1,x2,label`.
pub fn write_dataset_csv(data: &XorDataset, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = data
        .all()
        .map(|s| vec![format_f64(s.x1), format_f64(s.x2), s.label.to_string()])
        .collect();
    write_csv(path, &["x1", "x2", "label"], &rows)
}

/// Numeric rows of a CSV file with a header row; every cell must parse as `f64`.
pub fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r
        .headers()
        .map_err(|e| io_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 2,
                    column: col + 1,
                    message: format!("`{cell}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
