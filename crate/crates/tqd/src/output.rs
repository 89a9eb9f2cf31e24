//! CSV output.

use std::io::Write;

pub const HEADER: [&str; 8] = ["t", "fidelity", "min_gap", "adiabaticity", "norm_drift", "N", "protocol", "mode"];

/// Marker written in the `fidelity` column of a failed sweep entry.
pub const ERROR_MARKER: &str = "error";

/// `%.12g`: 12 significant digits, exponent form outside `1e-5 ≤ |x| < 1e12`.
pub fn format_g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{x:.*}", (11 - exp) as usize)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvRecord {
    pub t: f64,
    /// `None` marks a failed run.
    pub fidelity: Option<f64>,
    pub min_gap: f64,
    pub adiabaticity: f64,
    pub norm_drift: f64,
    pub n: usize,
    pub protocol: String,
    pub mode: String,
}

impl CsvRecord {
    fn fields(&self) -> [String; 8] {
        let num = |v: f64| if self.fidelity.is_some() { format_g12(v) } else { String::new() };
        [
            format_g12(self.t),
            self.fidelity.map_or_else(|| ERROR_MARKER.to_string(), format_g12),
            num(self.min_gap),
            num(self.adiabaticity),
            num(self.norm_drift),
            self.n.to_string(),
            self.protocol.clone(),
            self.mode.clone(),
        ]
    }
}

pub fn write_csv<W: Write>(out: W, records: &[CsvRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}
