#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use mvreturn::indicators::{compute_panels, PanelResults, DEFAULT_THRESHOLD};
use mvreturn::ingestion::{assemble_panels, parse_long_file, Assembly, ParseOptions, ParsedFile};
use mvreturn::reporting::{
    compare_with_reference, parse_reference_file, render_fgr_table, render_line_chart,
    render_shares_table, Format, ReportOptions, SeriesSelector, DEFAULT_BAND,
};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub struct FixtureRun {
    pub parsed: ParsedFile,
    pub assembly: Assembly,
    pub results: PanelResults,
}

pub fn run_fixture() -> FixtureRun {
    let file = fs::File::open(fixture_dir().join("wid_fixture.csv")).unwrap();
    let parsed = parse_long_file(file, &ParseOptions::default()).unwrap();
    let assembly = assemble_panels(&parsed.records);
    let results = compute_panels(&assembly.panels, DEFAULT_THRESHOLD).unwrap();
    FixtureRun { parsed, assembly, results }
}

/// Header-keyed rows of a ledger output file.
pub fn read_expected(name: &str) -> Vec<Vec<(String, String)>> {
    let text = fs::read_to_string(fixture_dir().join(name)).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

pub fn field<'a>(row: &'a [(String, String)], key: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == key).unwrap().1
}

pub fn float(row: &[(String, String)], key: &str) -> f64 {
    field(row, key).parse().unwrap()
}

/// Compares against a golden file, or rewrites it when UPDATE_GOLDEN is set.
/// Returns whether the content matched.
pub fn golden_matches(name: &str, actual: &str) -> bool {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(golden_dir()).unwrap();
        fs::write(&path, actual).unwrap();
        return true;
    }
    match fs::read_to_string(&path) {
        Ok(expected) => expected == actual,
        Err(_) => false,
    }
}

/// Every golden artifact for the bundled fixture, by file name.
pub fn golden_outputs() -> Vec<(String, String)> {
    let run = run_fixture();
    let opts = ReportOptions::default();
    let summaries = &run.results.summaries;
    let mut out = Vec::new();
    for format in [Format::Csv, Format::Txt, Format::Md, Format::Tex] {
        let ext = format.extension();
        out.push((format!("fgr.{ext}"), render_fgr_table(summaries, format, &opts).unwrap()));
        out.push((format!("shares.{ext}"), render_shares_table(summaries, format, &opts).unwrap()));
    }
    let reference = std::fs::File::open(fixture_dir().join("reference_fixture.csv")).unwrap();
    let reference = parse_reference_file(reference).unwrap();
    out.push((
        "compare.txt".into(),
        compare_with_reference(summaries, &reference, DEFAULT_BAND, Format::Txt, opts.decimals).unwrap(),
    ));
    for country in run.assembly.panels.keys() {
        let rows: Vec<_> = run.results.rows.iter().filter(|r| &r.country == country).cloned().collect();
        for selector in [SeriesSelector::Rates, SeriesSelector::Shares] {
            out.push((
                format!("{country}_{}.svg", selector.slug()),
                render_line_chart(country, &rows, selector).unwrap(),
            ));
        }
    }
    out
}

/// WID-style long text for `countries` × `years`, all seven variables.
pub fn synthetic_wid(countries: usize, years: usize, seed: u64) -> String {
    use rand::{Rng, SeedableRng};
    use std::fmt::Write;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("country;variable;percentile;year;value;age;pop\n");
    for c in 0..countries {
        let code = format!("S{c:02}");
        let mut capital: f64 = rng.gen_range(1e3..1e5);
        let xlcusp: f64 = rng.gen_range(0.5..3.0);
        let mut income: f64 = rng.gen_range(2e3..6e4);
        for year in 1960..1960 + years as i32 {
            capital *= 1.0 + rng.gen_range(-0.05..0.08);
            income *= 1.0 + rng.gen_range(-0.02..0.04);
            let nninc = capital * rng.gen_range(0.15..0.3);
            let consumption = nninc * rng.gen_range(0.7..0.95);
            let gov = consumption * rng.gen_range(0.15..0.25);
            for (var, value) in [
                ("mnweal999i", capital),
                ("mnninc999i", nninc),
                ("wlabsh999i", rng.gen_range(0.5..0.75)),
                ("mcongo999i", gov),
                ("mconhn999i", consumption - gov),
                ("anninc992i", income),
                ("xlcusp999i", xlcusp),
            ] {
                let _ = writeln!(out, "{code};{var};p0p100;{year};{value:.6};999;i");
            }
        }
    }
    out
}
