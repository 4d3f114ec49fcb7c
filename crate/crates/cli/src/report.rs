//! Console formatting and the metrics CSV.

use std::fmt::Write as _;
use std::path::Path;

use boltzkit::{Matrix, SupervisedTrace};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// C `%g` with 6 significant digits: `0.0552593`, `0.1`, `0`, `1.5e-07`.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    // Rounding to 6 digits can carry into the next decade.
    let exp = {
        let rounded: f64 = format!("{:.5e}", x).parse().unwrap();
        if rounded.abs() >= 10f64.powi(exp + 1) { exp + 1 } else { exp }
    };
    if !(-4..6).contains(&exp) {
        let s = format!("{:.5e}", x);
        let (mantissa, e) = s.split_once('e').unwrap();
        let e: i32 = e.parse().unwrap();
        let sign = if e < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), e.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Right-aligned table, one matrix row per line.
pub fn format_matrix(m: &Matrix, decimals: usize) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        for v in row {
            write!(out, " {v:>w$.decimals$}", w = decimals + 3).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Hex SHA-256 of the canonical configuration text.
pub fn config_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Header lines and one row per epoch. The `seconds` column stays empty
/// unless `timings` is set, so equal runs produce equal files.
pub fn metrics_csv(command: &str, seed: u64, hash: &str, trace: &SupervisedTrace, timings: bool) -> String {
    let mut out = String::new();
    writeln!(out, "# boltzkit {} metrics", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "# command: {command}").unwrap();
    writeln!(out, "# seed: {seed}").unwrap();
    writeln!(out, "# config-sha256: {hash}").unwrap();
    out.push_str("epoch,phase,objective,seconds\n");
    let phases = trace
        .pretrain
        .iter()
        .enumerate()
        .map(|(i, t)| (format!("pretrain-{}", i + 1), t))
        .chain(std::iter::once(("finetune".to_string(), &trace.finetune)));
    for (phase, t) in phases {
        for (epoch, (obj, secs)) in t.objective.iter().zip(&t.elapsed).enumerate() {
            write!(out, "{},{phase},{obj:e},", epoch + 1).unwrap();
            if timings {
                write!(out, "{secs:.6}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use boltzkit::TrainTrace;

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(0.0552593), "0.0552593");
        assert_eq!(fmt_g(0.0155251), "0.0155251");
        assert_eq!(fmt_g(0.1), "0.1");
        assert_eq!(fmt_g(0.0161), "0.0161");
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(123456.7), "123457");
        assert_eq!(fmt_g(1234567.0), "1.23457e+06");
        assert_eq!(fmt_g(0.00001234), "1.234e-05");
        assert_eq!(fmt_g(0.9999999), "1");
        assert_eq!(fmt_g(-0.25), "-0.25");
    }

    #[test]
    fn csv_layout() {
        let pre = TrainTrace { objective: vec![0.5, 0.25], elapsed: vec![0.1, 0.2], warnings: vec![] };
        let tune = TrainTrace { objective: vec![0.125], elapsed: vec![0.3], warnings: vec![] };
        let trace = SupervisedTrace { pretrain: vec![pre], finetune: tune };
        let csv = metrics_csv("train", 3, "abc", &trace, false);
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, ["epoch,phase,objective,seconds", "1,pretrain-1,5e-1,", "2,pretrain-1,2.5e-1,", "1,finetune,1.25e-1,"]);
        assert!(csv.contains("# seed: 3\n"));
        assert!(metrics_csv("train", 3, "abc", &trace, true).contains("1,finetune,1.25e-1,0.300000"));
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(config_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
