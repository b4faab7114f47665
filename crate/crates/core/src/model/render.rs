use std::fmt::Write;

use super::section::{ReportSection, SectionKind};
use super::{InsightReport, PrioritySignal, SignalledBullet};

/// Separator between navigation steps in rendered tips.
pub const NAV_ARROW: &str = " → ";

/// Renders a report as canonical Markdown: one H2 per non-empty report
/// section in canonical order, sectional headers always present for the
/// sections the report carries.
pub fn render_report(report: &InsightReport) -> String {
    let mut blocks: Vec<String> = Vec::new();

    for kind in SectionKind::ALL {
        if let Some(section) = report.section(kind) {
            let mut block = header(ReportSection::Sectional(kind));
            for bullet in &section.bullets {
                push_signalled(&mut block, bullet);
            }
            blocks.push(block);
        }
    }

    if !report.key_contributions.is_empty() {
        let mut block = header(ReportSection::KeyContributions);
        for c in &report.key_contributions {
            block.push_str("- ");
            push_signals(&mut block, &c.signals);
            let _ = write!(block, "**{}**", c.title);
            if !c.detail.is_empty() {
                let _ = write!(block, ": {}", c.detail);
            }
            block.push('\n');
        }
        blocks.push(block);
    }

    if !report.limitations.is_empty() {
        let mut block = header(ReportSection::Limitations);
        for bullet in &report.limitations {
            push_signalled(&mut block, bullet);
        }
        blocks.push(block);
    }

    if !report.critical_questions.is_empty() {
        let mut block = header(ReportSection::CriticalQuestions);
        for qa in &report.critical_questions {
            let _ = write!(block, "- **{}**", qa.question);
            if !qa.answer.is_empty() {
                let _ = write!(block, ": {}", qa.answer);
            }
            block.push('\n');
        }
        blocks.push(block);
    }

    if !report.evidence_refs.is_empty() {
        let mut block = header(ReportSection::Evidence);
        for e in &report.evidence_refs {
            let _ = write!(block, "- {}", e.label);
            if !e.rationale.is_empty() {
                let _ = write!(block, ": {}", e.rationale);
            }
            block.push('\n');
        }
        blocks.push(block);
    }

    if !report.navigation_tips.is_empty() {
        let mut block = header(ReportSection::NavigationTips);
        for tip in &report.navigation_tips {
            let _ = writeln!(block, "- {}: {}", tip.goal, tip.path.join(NAV_ARROW));
        }
        blocks.push(block);
    }

    blocks.join("\n")
}

fn header(section: ReportSection) -> String {
    format!("## {}\n", section.header())
}

fn push_signals(out: &mut String, signals: &[PrioritySignal]) {
    for s in signals {
        out.push_str(s.token());
        out.push(' ');
    }
}

fn push_signalled(out: &mut String, bullet: &SignalledBullet) {
    out.push_str("- ");
    push_signals(out, &bullet.signals);
    out.push_str(&bullet.text);
    out.push('\n');
}
