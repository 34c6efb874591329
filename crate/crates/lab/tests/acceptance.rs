//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use powerfree_lab::parallel::DEFAULT_SEGMENT;
use powerfree_lab::repro::{run, Report};
use powerfree_lab::Runner;

struct Criterion {
    number: u32,
    title: &'static str,
    ids: &'static [&'static str],
    max_seconds: Option<f64>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        number: 1,
        title: "k-free masks equal complete factorisation",
        ids: &["oracle"],
        max_seconds: Some(10.0),
    },
    Criterion { number: 2, title: "lifted roots equal residue enumeration", ids: &["hensel"], max_seconds: Some(30.0) },
    Criterion { number: 3, title: "local root counts of x^2 + 1", ids: &["cor12"], max_seconds: None },
    Criterion { number: 4, title: "divisor-sum split is exact", ids: &["prop21"], max_seconds: None },
    Criterion {
        number: 5,
        title: "twin squarefree count and error exponent",
        ids: &["carlitz"],
        max_seconds: Some(60.0),
    },
    Criterion { number: 6, title: "squarefree values of n^2 + 1", ids: &["estermann"], max_seconds: Some(120.0) },
    Criterion { number: 7, title: "squarefree values of n^3 + 5", ids: &["hb17"], max_seconds: None },
    Criterion { number: 8, title: "cubefree values of n^3 + 2", ids: &["browning18"], max_seconds: None },
    Criterion { number: 9, title: "Liouville averages", ids: &["pnt"], max_seconds: None },
    Criterion { number: 10, title: "circle rotation along squarefree n^2 + 1", ids: &["thm11"], max_seconds: None },
    Criterion { number: 11, title: "Omega(mn + r) equidistributed mod m", ids: &["thm31"], max_seconds: None },
    Criterion {
        number: 12,
        title: "(n^2 + 1)(n^2 + 2) squarefree count and average",
        ids: &["thm41", "cor42"],
        max_seconds: None,
    },
    Criterion { number: 13, title: "tail count exponent", ids: &["cond31"], max_seconds: None },
    Criterion { number: 14, title: "density intervals nest", ids: &["intervals"], max_seconds: None },
];

fn bytes(r: &Report) -> Vec<u8> {
    let mut b = r.csv_bytes().expect("csv");
    b.extend(r.json_bytes().expect("json"));
    b
}

fn main() -> ExitCode {
    let single = Runner::new(1, DEFAULT_SEGMENT).expect("pool");
    let mut all_pass = true;
    let mut outputs = Vec::new();
    for c in CRITERIA {
        let start = Instant::now();
        let mut pass = true;
        let mut notes = Vec::new();
        for id in c.ids {
            match run(id, &single) {
                Ok(rep) => {
                    for ch in rep.checks.iter().filter(|ch| !ch.pass) {
                        notes.push(format!("{}: {} (tolerance {})", ch.name, ch.value, ch.tolerance));
                    }
                    pass &= rep.pass;
                    outputs.push((id, bytes(&rep)));
                }
                Err(e) => {
                    pass = false;
                    notes.push(format!("{id}: error {e}"));
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        if let Some(limit) = c.max_seconds {
            if secs >= limit {
                pass = false;
                notes.push(format!("runtime {secs:.1} s exceeds {limit} s"));
            }
        }
        all_pass &= pass;
        println!("criterion {:>2} {}: {} [{secs:.1} s]", c.number, if pass { "PASS" } else { "FAIL" }, c.title);
        for n in notes {
            println!("    {n}");
        }
    }
    let start = Instant::now();
    let eight = Runner::new(8, DEFAULT_SEGMENT).expect("pool");
    let mut differ = Vec::new();
    for (id, first) in &outputs {
        match run(id, &eight) {
            Ok(rep) if bytes(&rep) == *first => {}
            Ok(_) => differ.push(format!("{id}: output differs")),
            Err(e) => differ.push(format!("{id}: error {e}")),
        }
    }
    let pass = differ.is_empty();
    all_pass &= pass;
    println!(
        "criterion 15 {}: identical output at 1 and 8 threads [{:.1} s]",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    for d in differ {
        println!("    {d}");
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
