//! Table and matrix writers. Everything here is a pure function of its
//! input, so repeated runs give identical bytes.

use std::fmt::Write;

use h2nc::assembly::SparseSystem;
use h2nc::estimate::ConvergenceReport;

use crate::config::Format;

pub const CSV_HEADER: &str = "level,ndof,L2,L2_order,H1,H1_order,H2,H2_order";

fn order(x: f64) -> String {
    if x == 0.0 {
        "0.0".into()
    } else {
        format!("{x:.3}")
    }
}

pub fn table(report: &ConvergenceReport, format: Format) -> String {
    let mut s = String::new();
    match format {
        Format::Csv => {
            s.push_str(CSV_HEADER);
            s.push('\n');
            for r in &report.rows {
                let (e, o) = (r.errors, r.orders);
                writeln!(
                    s,
                    "{},{},{:.9e},{},{:.9e},{},{:.9e},{}",
                    r.level,
                    r.ndofs,
                    e.l2,
                    order(o.l2),
                    e.h1,
                    order(o.h1),
                    e.h2,
                    order(o.h2)
                )
                .expect("string write");
            }
        }
        Format::Markdown => {
            writeln!(
                s,
                "The error and the order of convergence, {} ({}).\n",
                report.family.label(),
                report.family.name()
            )
            .expect("string write");
            s.push_str("| Grid | ndof | ‖u−u_h‖_0 | h^n | \\|u−u_h\\|_1,h | h^n | \\|u−u_h\\|_2,h | h^n |\n");
            s.push_str("|---:|---:|---:|---:|---:|---:|---:|---:|\n");
            for r in &report.rows {
                let (e, o) = (r.errors, r.orders);
                let n = 1usize << (r.level - 1);
                writeln!(
                    s,
                    "| {n}×{n}×{n} | {} | {:.7} | {:.1} | {:.7} | {:.1} | {:.7} | {:.1} |",
                    r.ndofs, e.l2, o.l2, e.h1, o.h1, e.h2, o.h2
                )
                .expect("string write");
            }
        }
    }
    s
}

/// Matrix Market coordinate format, lower triangle of the symmetric matrix,
/// followed by the load vector as a dense array section.
pub fn matrix_market(sys: &SparseSystem) -> String {
    let mut entries = Vec::new();
    for r in 0..sys.n {
        for k in sys.row_ptr[r]..sys.row_ptr[r + 1] {
            let c = sys.col_idx[k];
            if c <= r {
                entries.push((r, c, sys.values[k]));
            }
        }
    }
    let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    writeln!(s, "{} {} {}", sys.n, sys.n, entries.len()).expect("string write");
    for (r, c, v) in entries {
        writeln!(s, "{} {} {:.17e}", r + 1, c + 1, v).expect("string write");
    }
    s
}

pub fn rhs_array(sys: &SparseSystem) -> String {
    let mut s = String::from("%%MatrixMarket matrix array real general\n");
    writeln!(s, "{} 1", sys.n).expect("string write");
    for v in &sys.rhs {
        writeln!(s, "{v:.17e}").expect("string write");
    }
    s
}
