//! Miss statistics, the evaluation report and its CSV and SVG renderings.

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Distribution of masked misses over a test set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissStats {
    pub average: f64,
    pub min: usize,
    pub max: usize,
    /// Sample standard deviation.
    pub std: f64,
    /// `histogram[j]` test cases had `j` misses, for `j` in `0..=mask size`.
    pub histogram: Vec<usize>,
    /// Miss frequency of each mask position, in mask order.
    pub per_bit: Vec<f64>,
}

impl MissStats {
    /// `misses[i]` holds, per test case, the mask positions that missed.
    pub fn from_misses(misses: &[Vec<usize>], mask_len: usize) -> Self {
        let n = misses.len().max(1) as f64;
        let counts: Vec<usize> = misses.iter().map(Vec::len).collect();
        let mut histogram = vec![0; mask_len + 1];
        let mut per_bit = vec![0usize; mask_len];
        for m in misses {
            histogram[m.len()] += 1;
            for &p in m {
                per_bit[p] += 1;
            }
        }
        let average = counts.iter().sum::<usize>() as f64 / n;
        let var = if counts.len() > 1 {
            counts
                .iter()
                .map(|&c| (c as f64 - average).powi(2))
                .sum::<f64>()
                / (n - 1.0)
        } else {
            0.0
        };
        Self {
            average,
            min: counts.iter().copied().min().unwrap_or(0),
            max: counts.iter().copied().max().unwrap_or(0),
            std: var.sqrt(),
            histogram,
            per_bit: per_bit.into_iter().map(|c| c as f64 / n).collect(),
        }
    }

    pub fn cases(&self) -> usize {
        self.histogram.iter().sum()
    }
}

/// Outcome of the testing protocol.
///
/// Wall-clock time is left out so that reruns produce identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub name: String,
    pub test_set_size: usize,
    pub mask: Vec<usize>,
    pub predicted: MissStats,
    pub random_baseline: MissStats,
    /// Test cases with zero masked misses.
    pub exact_inversions: usize,
    pub epochs_trained: usize,
    pub loss_history: Vec<f64>,
    pub config: ExperimentConfig,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One line per misses count: `misses,predicted,random`.
    pub fn histogram_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(["misses", "predicted", "random"])
            .expect("in-memory write");
        for (j, (p, r)) in self
            .predicted
            .histogram
            .iter()
            .zip(&self.random_baseline.histogram)
            .enumerate()
        {
            w.write_record([j.to_string(), p.to_string(), r.to_string()])
                .expect("in-memory write");
        }
        into_string(w)
    }

    /// One line per mask bit: `bit,predicted,random` miss frequencies.
    pub fn per_bit_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(["bit", "predicted", "random"])
            .expect("in-memory write");
        for (i, &bit) in self.mask.iter().enumerate() {
            w.write_record([
                bit.to_string(),
                format!("{:?}", self.predicted.per_bit[i]),
                format!("{:?}", self.random_baseline.per_bit[i]),
            ])
            .expect("in-memory write");
        }
        into_string(w)
    }

    pub fn summary(&self) -> String {
        let p = &self.predicted;
        let r = &self.random_baseline;
        format!(
            "{}: predicted misses avg {:.3} min {} max {} | random avg {:.3} min {} max {} | exact {}/{}",
            self.name, p.average, p.min, p.max, r.average, r.min, r.max, self.exact_inversions, self.test_set_size
        )
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

fn plot_err<E: std::fmt::Debug>(e: E) -> Error {
    Error::Usage(format!("chart rendering failed: {e:?}"))
}

const SIZE: (u32, u32) = (720, 360);

/// Loss per epoch.
pub fn loss_svg(history: &[f64]) -> Result<String> {
    let points: Vec<(f64, f64)> = history
        .iter()
        .enumerate()
        .map(|(i, &l)| ((i + 1) as f64, l))
        .collect();
    let top = history.iter().copied().fold(0.0f64, f64::max).max(1e-9) * 1.05;
    curve_svg(
        "training loss",
        ("epoch", "loss"),
        &points,
        (1.0, history.len().max(2) as f64),
        (0.0, top),
    )
}

/// A single polyline over the given axis ranges.
pub fn curve_svg(
    title: &str,
    axes: (&str, &str),
    points: &[(f64, f64)],
    x: (f64, f64),
    y: (f64, f64),
) -> Result<String> {
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(32)
            .y_label_area_size(56)
            .build_cartesian_2d(x.0..x.1, y.0..y.1)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(axes.0)
            .y_desc(axes.1)
            .draw()
            .map_err(plot_err)?;
        chart
            .draw_series(LineSeries::new(points.iter().copied(), &BLUE))
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(out)
}

type Series<'a> = (&'a str, RGBColor, Vec<(usize, f64)>);

fn bars(title: &str, x_desc: &str, series: &[Series], x_max: usize) -> Result<String> {
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let top = series
            .iter()
            .flat_map(|s| s.2.iter().map(|p| p.1))
            .fold(0.0f64, f64::max)
            .max(1e-9)
            * 1.05;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(32)
            .y_label_area_size(56)
            .build_cartesian_2d(0f64..(x_max + 1) as f64, 0f64..top)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(x_desc)
            .draw()
            .map_err(plot_err)?;
        let width = 1.0 / series.len() as f64;
        for (k, (label, color, points)) in series.iter().enumerate() {
            let color = *color;
            chart
                .draw_series(points.iter().map(|&(x, y)| {
                    let x0 = x as f64 + k as f64 * width;
                    Rectangle::new([(x0, 0.0), (x0 + width * 0.9, y)], color.filled())
                }))
                .map_err(plot_err)?
                .label(*label)
                .legend(move |(x, y)| {
                    Rectangle::new([(x, y - 5), (x + 10, y + 5)], color.filled())
                });
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(out)
}

/// Histograms of total misses, predicted against random.
pub fn histogram_svg(report: &EvalReport) -> Result<String> {
    let nonzero = |h: &[usize]| h.iter().rposition(|&c| c > 0).unwrap_or(0);
    let x_max =
        nonzero(&report.predicted.histogram).max(nonzero(&report.random_baseline.histogram));
    let pts = |h: &[usize]| -> Vec<(usize, f64)> {
        h.iter()
            .enumerate()
            .filter(|p| *p.1 > 0)
            .map(|(j, &c)| (j, c as f64))
            .collect()
    };
    bars(
        "hashes per number of misses",
        "misses",
        &[
            ("predicted", BLUE, pts(&report.predicted.histogram)),
            ("random", RED, pts(&report.random_baseline.histogram)),
        ],
        x_max,
    )
}

/// Miss frequency per hash bit of the predicted messages.
pub fn per_bit_svg(report: &EvalReport) -> Result<String> {
    let pts: Vec<(usize, f64)> = report
        .mask
        .iter()
        .zip(&report.predicted.per_bit)
        .map(|(&b, &f)| (b, f))
        .collect();
    let x_max = report.mask.last().copied().unwrap_or(0);
    bars(
        "miss frequency per hash bit",
        "hash bit",
        &[("predicted", BLUE, pts)],
        x_max,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_are_consistent() {
        let misses = vec![vec![], vec![0, 2], vec![2], vec![0, 1, 2]];
        let s = MissStats::from_misses(&misses, 3);
        assert_eq!(s.histogram, vec![1, 1, 1, 1]);
        assert_eq!(s.cases(), 4);
        assert_eq!((s.min, s.max), (0, 3));
        assert_eq!(s.average, 1.5);
        assert_eq!(s.per_bit, vec![0.5, 0.25, 0.75]);
        let by_bits: f64 = s.per_bit.iter().sum::<f64>() * 4.0;
        let by_hist: usize = s.histogram.iter().enumerate().map(|(j, c)| j * c).sum();
        assert_eq!(by_bits, by_hist as f64);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn charts_render() {
        let svg = loss_svg(&[3.0, 2.0, 1.5]).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("epoch"));
        assert!(loss_svg(&[]).unwrap().starts_with("<svg"));
    }
}
