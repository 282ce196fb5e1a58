use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::{Alignment, CorpusEntry, EntryResult, OppositeCause};

/// The summary row as printed alongside the case table:
/// opposite, partial, match, total.
pub const REFERENCE_ROW: [usize; 4] = [3, 2, 5, 11];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub id: String,
    pub computed: Alignment,
    pub expected: Alignment,
    pub agree: bool,
    pub cause: Option<OppositeCause>,
    pub ledgers_match: bool,
    pub lints_match: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tallies {
    pub opposite: usize,
    pub partial: usize,
    #[serde(rename = "match")]
    pub matched: usize,
    pub total: usize,
    pub lint_only: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AlignmentReport {
    pub rows: Vec<ReportRow>,
    pub tallies: Tallies,
    pub cause_tallies: BTreeMap<OppositeCause, usize>,
    pub notes: Vec<String>,
}

impl AlignmentReport {
    /// Every row agrees with its label, golden ledgers and lint codes.
    pub fn is_clean(&self) -> bool {
        self.rows.iter().all(|r| r.agree && r.ledgers_match && r.lints_match)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("id\tcomputed\texpected\tagree\tledgers\tlints\n");
        let yn = |b: bool| if b { "yes" } else { "NO" };
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.id,
                r.computed,
                r.expected,
                yn(r.agree),
                yn(r.ledgers_match),
                yn(r.lints_match)
            );
        }
        let t = &self.tallies;
        let _ = writeln!(
            out,
            "tally\tOpposite {}\tPartial {}\tMatch {}\ttotal {}\tLintOnly {}",
            t.opposite, t.partial, t.matched, t.total, t.lint_only
        );
        let causes: Vec<String> = [
            OppositeCause::EncodingError,
            OppositeCause::AmbiguousLanguage,
            OppositeCause::Either,
        ]
        .iter()
        .map(|c| format!("{c} {}", self.cause_tallies.get(c).copied().unwrap_or(0)))
        .collect();
        let _ = writeln!(out, "causes\t{}", causes.join("\t"));
        for note in &self.notes {
            let _ = writeln!(out, "FLAG\t{note}");
        }
        out
    }
}

/// Tallies are folded from the computed alignments, never from labels.
pub fn build_report(entries: &[CorpusEntry], results: &[EntryResult]) -> AlignmentReport {
    let mut report = AlignmentReport::default();
    for (entry, result) in entries.iter().zip(results) {
        debug_assert_eq!(entry.id, result.id);
        match result.computed_alignment {
            Alignment::Opposite => {
                report.tallies.opposite += 1;
                if let Some(cause) = entry.opposite_cause {
                    *report.cause_tallies.entry(cause).or_default() += 1;
                }
            }
            Alignment::Partial => report.tallies.partial += 1,
            Alignment::Match => report.tallies.matched += 1,
            Alignment::LintOnly => report.tallies.lint_only += 1,
        }
        report.rows.push(ReportRow {
            id: entry.id.clone(),
            computed: result.computed_alignment,
            expected: entry.expected_alignment,
            agree: result.computed_alignment == entry.expected_alignment,
            cause: entry.opposite_cause,
            ledgers_match: result.ledgers_match(),
            lints_match: result.lint_codes() == entry.expected_lints,
        });
    }
    let t = &mut report.tallies;
    t.total = t.opposite + t.partial + t.matched;

    let [o, p, m, total] = REFERENCE_ROW;
    report.notes.push(format!(
        "reference summary row {o} | {p} | {m} | {total} sums to {}, not {total}; computed Opposite {} | Partial {} | Match {} | total {}",
        o + p + m,
        t.opposite,
        t.partial,
        t.matched,
        t.total
    ));
    report
}
