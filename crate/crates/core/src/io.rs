//! CSV serialization of the metrics series and gnuplot script emission.
//!
//! The CSV dialect is fixed: comma separator, `.` decimal point, LF line
//! endings, UTF-8, floats at 9 significant digits. Equal series produce
//! byte-identical files.

use crate::metrics::RoundMetrics;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const CSV_HEADER: &str =
    "round,time_s,alive,consumed_j,emitted_j,delivered_j,data_bits,ch_count,tour_m,clusters_visited";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot emit plots for an empty series")]
    EmptySeries,
    #[error("malformed metrics CSV at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Formats with 9 significant digits, trailing zeros stripped, scientific
/// notation outside [1e-4, 1e9). Stable under parse-reformat round trips.
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    } else {
        let fixed = format!("{x:.*}", (8 - exp) as usize);
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    }
}

/// Renders the series as CSV text: header plus one row per round, every line
/// LF-terminated.
pub fn csv_string(series: &[RoundMetrics]) -> String {
    let mut out = String::with_capacity(64 * (series.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for m in series {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            m.round_index,
            fmt_g9(m.sim_time),
            m.alive_count,
            fmt_g9(m.consumed_cumulative),
            fmt_g9(m.emitted_cumulative),
            fmt_g9(m.delivered_cumulative),
            m.data_received_cumulative,
            m.ch_count,
            fmt_g9(m.tour_length),
            m.clusters_visited,
        );
    }
    out
}

pub fn write_csv(series: &[RoundMetrics], path: &Path) -> Result<(), IoError> {
    fs::write(path, csv_string(series))?;
    Ok(())
}

fn field<'a>(
    fields: &mut impl Iterator<Item = &'a str>,
    line: usize,
    name: &str,
) -> Result<&'a str, IoError> {
    fields.next().ok_or_else(|| IoError::Parse {
        line,
        message: format!("missing column {name}"),
    })
}

fn parse_num<T: std::str::FromStr>(raw: &str, line: usize, name: &str) -> Result<T, IoError> {
    raw.parse().map_err(|_| IoError::Parse {
        line,
        message: format!("column {name}: cannot parse {raw:?}"),
    })
}

/// Parses text produced by [`csv_string`].
pub fn parse_csv(text: &str) -> Result<Vec<RoundMetrics>, IoError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(IoError::Parse {
                line: 1,
                message: format!("unexpected header {header:?}"),
            })
        }
        None => {
            return Err(IoError::Parse {
                line: 1,
                message: "empty file".to_string(),
            })
        }
    }
    let mut series = Vec::new();
    for (idx, row) in lines {
        let line = idx + 1;
        let mut fields = row.split(',');
        let f = &mut fields;
        series.push(RoundMetrics {
            round_index: parse_num(field(f, line, "round")?, line, "round")?,
            sim_time: parse_num(field(f, line, "time_s")?, line, "time_s")?,
            alive_count: parse_num(field(f, line, "alive")?, line, "alive")?,
            consumed_cumulative: parse_num(field(f, line, "consumed_j")?, line, "consumed_j")?,
            emitted_cumulative: parse_num(field(f, line, "emitted_j")?, line, "emitted_j")?,
            delivered_cumulative: parse_num(field(f, line, "delivered_j")?, line, "delivered_j")?,
            data_received_cumulative: parse_num(field(f, line, "data_bits")?, line, "data_bits")?,
            ch_count: parse_num(field(f, line, "ch_count")?, line, "ch_count")?,
            tour_length: parse_num(field(f, line, "tour_m")?, line, "tour_m")?,
            clusters_visited: parse_num(
                field(f, line, "clusters_visited")?,
                line,
                "clusters_visited",
            )?,
        });
        if fields.next().is_some() {
            return Err(IoError::Parse {
                line,
                message: "too many columns".to_string(),
            });
        }
    }
    Ok(series)
}

pub fn read_csv(path: &Path) -> Result<Vec<RoundMetrics>, IoError> {
    parse_csv(&fs::read_to_string(path)?)
}

struct PlotSpec {
    prefix: &'static str,
    title: &'static str,
    ylabel: &'static str,
    series: &'static str,
}

const PLOTS: [PlotSpec; 4] = [
    PlotSpec {
        prefix: "alive",
        title: "Time Vs. No of Alive Nodes",
        ylabel: "No of Alive Nodes",
        series: "using 2:3 with lines lw 2 notitle",
    },
    PlotSpec {
        prefix: "consumed",
        title: "Time Vs. Total Consumed Energy",
        ylabel: "Total Consumed Energy (J)",
        series: "using 2:4 with lines lw 2 notitle",
    },
    PlotSpec {
        prefix: "harvested",
        title: "Time Vs. Total Harvested Energy",
        ylabel: "Total Harvested Energy (J)",
        series: "using 2:5 with lines lw 2 title 'emitted', '' using 2:6 with lines lw 2 title 'delivered'",
    },
    PlotSpec {
        prefix: "data",
        title: "Time Vs. Total Data Received",
        ylabel: "Total Data Received (bits)",
        series: "using 2:7 with lines lw 2 notitle",
    },
];

/// Writes the four gnuplot scripts (alive, consumed, harvested, data) next to
/// the CSV they reference, named `<family>_<scenario>.plt`. Returns the paths
/// written.
pub fn emit_plots(
    series: &[RoundMetrics],
    out_dir: &Path,
    scenario: &str,
) -> Result<Vec<PathBuf>, IoError> {
    if series.is_empty() {
        return Err(IoError::EmptySeries);
    }
    let csv_name = format!("metrics_{scenario}.csv");
    let mut written = Vec::with_capacity(PLOTS.len());
    for spec in &PLOTS {
        let script = format!(
            "# render with: gnuplot -p {prefix}_{scenario}.plt\n\
             set datafile separator ','\n\
             set title \"{title}\"\n\
             set xlabel \"Time (s)\"\n\
             set ylabel \"{ylabel}\"\n\
             set grid\n\
             plot '{csv_name}' {series}\n",
            prefix = spec.prefix,
            title = spec.title,
            ylabel = spec.ylabel,
            series = spec.series,
        );
        let path = out_dir.join(format!("{}_{scenario}.plt", spec.prefix));
        fs::write(&path, script)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digit_formatting() {
        assert_eq!(fmt_g9(0.0), "0");
        assert_eq!(fmt_g9(20.0), "20");
        assert_eq!(fmt_g9(1000.0), "1000");
        assert_eq!(fmt_g9(0.5), "0.5");
        assert_eq!(fmt_g9(1.0e-4), "0.0001");
        assert_eq!(fmt_g9(2.001e-4), "0.0002001");
        assert_eq!(fmt_g9(2.0e-7), "2e-7");
        assert_eq!(fmt_g9(100.0 * std::f64::consts::SQRT_2), "141.421356");
        assert_eq!(fmt_g9(1234567890.0), "1.23456789e9");
        assert_eq!(fmt_g9(0.1 + 0.2), "0.3");
    }

    fn sample_row(round: u32) -> RoundMetrics {
        RoundMetrics {
            round_index: round,
            sim_time: (round + 1) as f64 * 20.0,
            alive_count: 50,
            consumed_cumulative: 0.1 * (round + 1) as f64 + 1.0 / 3.0,
            emitted_cumulative: 2.0_f64.sqrt() * round as f64,
            delivered_cumulative: 0.3333333333333 * round as f64,
            data_received_cumulative: 2000 * round as u64,
            ch_count: 3,
            tour_length: 100.0 * std::f64::consts::SQRT_2,
            clusters_visited: 2,
        }
    }

    #[test]
    fn empty_series_writes_header_only() {
        let text = csv_string(&[]);
        assert_eq!(text, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn fifty_rounds_write_fifty_one_lines() {
        let series: Vec<RoundMetrics> = (0..50).map(sample_row).collect();
        let text = csv_string(&series);
        assert_eq!(text.lines().count(), 51);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn parse_reserialize_is_byte_identical() {
        let series: Vec<RoundMetrics> = (0..20).map(sample_row).collect();
        let text = csv_string(&series);
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(csv_string(&parsed), text);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        let series: Vec<RoundMetrics> = (0..5).map(sample_row).collect();
        write_csv(&series, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(csv_string(&back), csv_string(&series));
    }

    #[test]
    fn malformed_rows_are_rejected_with_line_numbers() {
        let text = format!("{CSV_HEADER}\n1,20,50,0.1,0,0,2000,3,0,x\n");
        let err = parse_csv(&text).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 2, .. }), "{err}");

        let wrong_header = "round,time\n";
        assert!(matches!(
            parse_csv(wrong_header).unwrap_err(),
            IoError::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn plots_cover_the_four_figure_families() {
        let dir = tempfile::tempdir().unwrap();
        let series: Vec<RoundMetrics> = (0..3).map(sample_row).collect();
        let written = emit_plots(&series, dir.path(), "50").unwrap();
        assert_eq!(written.len(), 4);
        for prefix in ["alive", "consumed", "harvested", "data"] {
            assert!(dir.path().join(format!("{prefix}_50.plt")).exists());
        }
        let alive = fs::read_to_string(dir.path().join("alive_50.plt")).unwrap();
        assert!(alive.contains("No of Alive Nodes"));
        assert!(alive.contains("metrics_50.csv"));
    }

    #[test]
    fn plots_require_data() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_plots(&[], dir.path(), "50"),
            Err(IoError::EmptySeries)
        ));
    }
}
