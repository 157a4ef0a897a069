//! Deterministic report output: JSON with every float written to 17
//! significant digits, scan curves as CSV and two-column plot data.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::analysis::ConcavityReport;
use crate::error::{Error, Result};

/// Pretty JSON whose floats are printed as `d.dddddddddddddddde±x`.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{:.16e}", v as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Problem(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Problem(e.to_string()))
}

/// Columns `r, t, G, second_difference`; the second difference is empty at
/// the two ends of the grid.
pub fn write_scan_csv<W: Write>(report: &ConcavityReport, w: W) -> Result<()> {
    let io = |e: csv::Error| Error::Problem(e.to_string());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["r", "t", "G", "second_difference"]).map_err(io)?;
    let n = report.r_grid.len();
    for i in 0..n {
        let sd = if i > 0 && i + 1 < n {
            format!("{:.16e}", report.second_differences[i - 1])
        } else {
            String::new()
        };
        out.write_record([
            format!("{:.16e}", report.r_grid[i]),
            format!("{:.16e}", report.t_grid[i]),
            format!("{:.16e}", report.g_values[i]),
            sd,
        ])
        .map_err(io)?;
    }
    out.flush().map_err(|e| Error::Problem(e.to_string()))
}

/// Two whitespace-separated columns `r G`, gnuplot style.
pub fn write_plot_data<W: Write>(report: &ConcavityReport, mut w: W) -> Result<()> {
    let io = |e: io::Error| Error::Problem(e.to_string());
    writeln!(w, "# r G(h^-1(r))").map_err(io)?;
    for (r, g) in report.r_grid.iter().zip(&report.g_values) {
        writeln!(w, "{r:.16e} {g:.16e}").map_err(io)?;
    }
    Ok(())
}
