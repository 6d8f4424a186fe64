use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mvreturn::artifact::{self, ArtifactKind};
use mvreturn::domain::{CountryCode, IndicatorRow, PanelObservation};
use mvreturn::indicators::{compute_panels, stationary_check, DerivationWarning};
use mvreturn::ingestion::{assemble_panels, parse_long_file, Assembly, ParseOptions, YearIssue};
use mvreturn::oracle::{generate_economy, net_output_two_ways, verify_with_tolerance, EconomyConfig};
use mvreturn::numeric::relative_difference;
use mvreturn::reporting::{
    compare_with_reference, headline_counts, parse_reference_file, render_fgr_table,
    render_headline, render_line_charts, render_shares_table, Format, SeriesSelector,
};

use crate::config::RunConfig;
use crate::fail::{Failure, Outcome};
use crate::files::{open_artifact, write_artifact_file, write_atomic};

/// What a command produced: text for stdout and notes for stderr.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub failed: bool,
}

fn ingest_files(cfg: &RunConfig, out: &mut Output) -> Outcome<Assembly> {
    if cfg.inputs.is_empty() {
        return Err(Failure::validation("InvalidConfig", "no input files given"));
    }
    let options = ParseOptions {
        delimiter: cfg.delimiter,
        variables: cfg.variables()?,
    };
    let mut records = Vec::new();
    for path in &cfg.inputs {
        let file = fs::File::open(path).map_err(|e| Failure::io(path.display(), e))?;
        let parsed = parse_long_file(file, &options)?;
        let d = &parsed.diagnostics;
        let _ = writeln!(
            out.stdout,
            "file {}: delimiter {:?} rows {} accepted {} malformed {} unrecognized {}",
            path.display(),
            char::from(d.delimiter),
            d.rows_read,
            d.accepted,
            d.malformed.len(),
            d.unrecognized_total()
        );
        for m in &d.malformed {
            let _ = writeln!(out.stdout, "  malformed line {}: {}", m.line, m.reason);
        }
        for (code, n) in &d.unrecognized {
            let _ = writeln!(out.stdout, "  unrecognized variable {code}: {n} rows");
        }
        records.extend(parsed.records);
    }
    let assembly = assemble_panels(&records);
    for c in &assembly.conflicts {
        let _ = writeln!(
            out.stdout,
            "conflict {} {} {}: lines {:?}, dropped",
            c.country,
            c.variable.code(),
            c.year,
            c.lines
        );
    }
    for (country, info) in &assembly.completeness {
        let _ = write!(out.stdout, "country {country}: years {} usable {}", info.years_seen, info.usable_years);
        let issues: Vec<String> = info
            .issues
            .iter()
            .map(|(year, issue)| match issue {
                YearIssue::Missing(what) => format!("{year} missing {}", what.join(" ")),
                YearIssue::Rejected(why) => format!("{year} rejected ({why})"),
            })
            .collect();
        if !issues.is_empty() {
            let _ = write!(out.stdout, "; {}", issues.join(", "));
        }
        if !info.labor_share_out_of_range.is_empty() {
            let _ = write!(out.stdout, "; labor share outside [0, 1] in {:?}", info.labor_share_out_of_range);
        }
        if !info.ppp_fallback_years.is_empty() {
            let _ = write!(out.stdout, "; PPP factor borrowed for {} years", info.ppp_fallback_years.len());
        }
        let _ = writeln!(out.stdout);
    }
    Ok(assembly)
}

fn flatten(panels: &BTreeMap<CountryCode, Vec<PanelObservation>>) -> Vec<PanelObservation> {
    panels.values().flatten().cloned().collect()
}

pub fn ingest(cfg: &RunConfig) -> Outcome<Output> {
    let mut out = Output::default();
    let assembly = ingest_files(cfg, &mut out)?;
    let observations = flatten(&assembly.panels);
    let path = write_artifact_file(&cfg.dir, ArtifactKind::Panel, |buf| artifact::write_panel(buf, &observations))?;
    let _ = writeln!(
        out.stdout,
        "panel: {} countries, {} observations -> {}",
        assembly.panels.len(),
        observations.len(),
        path.display()
    );
    Ok(out)
}

pub fn compute(cfg: &RunConfig) -> Outcome<Output> {
    let mut out = Output::default();
    let panels = if cfg.inputs.is_empty() {
        let observations = artifact::read_panel(open_artifact(&cfg.dir, ArtifactKind::Panel)?)?;
        let mut panels: BTreeMap<CountryCode, Vec<PanelObservation>> = BTreeMap::new();
        for obs in observations {
            panels.entry(obs.country.clone()).or_default().push(obs);
        }
        panels
    } else {
        let assembly = ingest_files(cfg, &mut out)?;
        let observations = flatten(&assembly.panels);
        write_artifact_file(&cfg.dir, ArtifactKind::Panel, |buf| artifact::write_panel(buf, &observations))?;
        assembly.panels
    };
    let results = compute_panels(&panels, cfg.threshold)?;
    for w in &results.warnings {
        match w {
            DerivationWarning::TooFewYears { country, .. } => {
                let _ = writeln!(out.stderr, "warning: {country} has no consecutive years; no rows");
            }
            DerivationWarning::SharesOutOfRange { country, year, labor_share } => {
                let _ = writeln!(out.stderr, "warning: {country} {year} labor share {labor_share:.4} outside [0, 1]");
            }
        }
    }
    let rows_path =
        write_artifact_file(&cfg.dir, ArtifactKind::Indicators, |buf| artifact::write_indicators(buf, &results.rows))?;
    let summaries_path =
        write_artifact_file(&cfg.dir, ArtifactKind::Summaries, |buf| artifact::write_summaries(buf, &results.summaries))?;
    let near_stationary = stationary_check(&results.rows, cfg.epsilon_g)
        .iter()
        .filter(|c| c.is_near_stationary)
        .count();
    let high = results.summaries.iter().filter(|s| s.high_cash_flow).count();
    let _ = writeln!(
        out.stdout,
        "indicators: {} rows -> {}\nsummaries: {} countries, {high} with average f(K) above {} -> {}\nnear-stationary rows (|g| <= {}): {near_stationary}",
        results.rows.len(),
        rows_path.display(),
        results.summaries.len(),
        cfg.threshold,
        summaries_path.display(),
        cfg.epsilon_g,
    );
    Ok(out)
}

fn comment_prefix(format: Format) -> &'static str {
    match format {
        Format::Csv => "# ",
        Format::Tex => "% ",
        _ => "",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableChoice {
    Fgr,
    Shares,
    All,
}

pub fn report(cfg: &RunConfig, table: TableChoice) -> Outcome<String> {
    if cfg.format == Format::Svg {
        return Err(Failure::validation("UnsupportedFormat", "tables render as csv, txt, md or tex; use `chart` for svg"));
    }
    // both artifacts come from `compute`; require the full set
    open_artifact(&cfg.dir, ArtifactKind::Indicators)?;
    let summaries = artifact::read_summaries(open_artifact(&cfg.dir, ArtifactKind::Summaries)?)?;
    let opts = cfg.report_options();
    let mut text = String::new();
    if matches!(table, TableChoice::Fgr | TableChoice::All) {
        text.push_str(&render_fgr_table(&summaries, cfg.format, &opts)?);
    }
    if table == TableChoice::All {
        text.push('\n');
    }
    if matches!(table, TableChoice::Shares | TableChoice::All) {
        text.push_str(&render_shares_table(&summaries, cfg.format, &opts)?);
    }
    text.push('\n');
    let prefix = comment_prefix(cfg.format);
    for line in render_headline(&headline_counts(&summaries, &opts), &opts).lines() {
        let _ = writeln!(text, "{prefix}{line}");
    }
    Ok(text)
}

pub fn compare(cfg: &RunConfig, reference: &Path) -> Outcome<String> {
    if cfg.format == Format::Svg {
        return Err(Failure::validation("UnsupportedFormat", "comparison renders as csv, txt, md or tex"));
    }
    let summaries = artifact::read_summaries(open_artifact(&cfg.dir, ArtifactKind::Summaries)?)?;
    let file = fs::File::open(reference).map_err(|e| Failure::io(reference.display(), e))?;
    let references = parse_reference_file(file)?;
    Ok(compare_with_reference(&summaries, &references, cfg.band, cfg.format, cfg.decimals)?)
}

pub fn chart(cfg: &RunConfig, selector: SeriesSelector, out_dir: &Path) -> Outcome<Output> {
    let rows: Vec<IndicatorRow> = artifact::read_indicators(open_artifact(&cfg.dir, ArtifactKind::Indicators)?)?;
    let mut out = Output::default();
    let mut by_country: BTreeMap<CountryCode, usize> = BTreeMap::new();
    for r in &rows {
        *by_country.entry(r.country.clone()).or_default() += 1;
    }
    let chartable: Vec<IndicatorRow> = rows
        .iter()
        .filter(|r| by_country[&r.country] >= 2)
        .cloned()
        .collect();
    for (country, n) in &by_country {
        if *n < 2 {
            let _ = writeln!(out.stderr, "warning: {country} has {n} row; chart skipped");
        }
    }
    for (country, svg) in render_line_charts(&chartable, selector)? {
        let path = out_dir.join(format!("{country}_{}.svg", selector.slug()));
        write_atomic(&path, svg.as_bytes())?;
        let _ = writeln!(out.stdout, "{}", path.display());
    }
    Ok(out)
}

pub struct SimulateArgs {
    pub seed: u64,
    pub households: usize,
    pub years: usize,
    pub economies: u64,
    pub tolerance: f64,
}

pub fn simulate(args: &SimulateArgs) -> Outcome<Output> {
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        return Err(Failure::validation("InvalidConfig", "tolerance must be nonnegative"));
    }
    if args.economies == 0 {
        return Err(Failure::validation("InvalidConfig", "need at least one economy"));
    }
    let cfg = EconomyConfig::default();
    let mut merged = None;
    let mut uses_vs_factors = 0.0f64;
    for i in 0..args.economies {
        let economy = generate_economy(args.seed.wrapping_add(i), args.households, args.years, &cfg)?;
        for state in &economy.states {
            let (uses, factors) = net_output_two_ways(state)?;
            uses_vs_factors = uses_vs_factors.max(relative_difference(uses, factors));
        }
        let report = verify_with_tolerance(&economy, args.tolerance);
        match merged.as_mut() {
            None => merged = Some(report),
            Some(m) => m.merge(&report),
        }
    }
    let report = merged.expect("at least one economy");
    let eq1_pass = uses_vs_factors <= args.tolerance;
    let mut out = Output {
        failed: !report.all_passed() || !eq1_pass,
        ..Default::default()
    };
    let _ = writeln!(
        out.stdout,
        "economies={} households={} years={} seed={}",
        args.economies, args.households, args.years, args.seed
    );
    let _ = writeln!(
        out.stdout,
        "{:<22} {} max_residual={uses_vs_factors:.3e}",
        "net_output.two_ways",
        if eq1_pass { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(out.stdout, "{report}");
    Ok(out)
}
