//! CSV output for benchmark results.

use std::io::{self, Write};

use crate::bench::BenchmarkRow;

pub const CSV_HEADER: &str = "detector,M,N,snr_db,errors,bits,ber,flops,phi_calls,time_s";

pub fn write_csv<W: Write>(w: &mut W, rows: &[BenchmarkRow]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.detector, r.m, r.n, r.snr_db, r.errors, r.bits, r.ber, r.flops, r.phi_calls, r.time_s
        )?;
    }
    Ok(())
}
