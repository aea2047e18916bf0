//! Plain-text tables mirroring the usual report layouts (dataset
//! statistics, within-protocol evaluation, pairwise agreement,
//! baselines), plus their JSON forms via serde elsewhere.

use biyu_core::dataset::{DatasetStats, LabelType};

use crate::evalio::{CompareReport, EvalReport};

fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: &[String], widths: &[usize], out: &mut String| {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(cell);
            for _ in cell.chars().count()..widths[i] {
                out.push(' ');
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    let header_cells: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    line(&header_cells, &widths, &mut out);
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for row in rows {
        line(row, &widths, &mut out);
    }
    out
}

fn f3(x: f64) -> String {
    format!("{x:.3}")
}

pub fn stats_table(rows: &[(String, DatasetStats, LabelType)]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, s, label_type)| {
            vec![
                name.clone(),
                s.total.to_string(),
                s.metaphor.to_string(),
                s.literal.to_string(),
                s.other.to_string(),
                format!("{:.1}%", s.metaphor_pct * 100.0),
                match label_type {
                    LabelType::Token => "Token",
                    LabelType::Sentence => "Sentence",
                    LabelType::Span => "Span",
                }
                .to_string(),
            ]
        })
        .collect();
    render_table(
        &[
            "Dataset",
            "Total",
            "Metaphor",
            "Literal",
            "Other",
            "Metaphor%",
            "Label Type",
        ],
        &body,
    )
}

pub fn eval_table(name: &str, report: &EvalReport) -> String {
    let mut rows = vec![vec![
        name.to_string(),
        f3(report.overall.precision),
        f3(report.overall.recall),
        f3(report.overall.f1),
        f3(report.overall.accuracy),
    ]];
    for (register, r) in &report.per_register {
        rows.push(vec![
            format!("  {register}"),
            f3(r.precision),
            f3(r.recall),
            f3(r.f1),
            f3(r.accuracy),
        ]);
    }
    let mut out = render_table(&["Evaluation", "P", "R", "F1", "Acc"], &rows);
    if !report.span_roles.is_empty() {
        let rows: Vec<Vec<String>> = report
            .span_roles
            .iter()
            .map(|(role, r)| {
                vec![
                    format!("{role} partial F1"),
                    f3(r.precision),
                    f3(r.recall),
                    f3(r.f1),
                    format!("{}/{}", r.matched, r.gold_count),
                ]
            })
            .collect();
        out.push('\n');
        out.push_str(&render_table(&["Span", "P", "R", "F1", "Matched"], &rows));
    }
    if let Some(b) = &report.bootstrap {
        out.push_str(&format!(
            "\nF1 95% CI [{:.3}, {:.3}] ({} bootstrap iterations, seed {})\n",
            b.ci_low, b.ci_high, b.iterations, b.seed
        ));
    }
    out.push_str(&format!(
        "\ninstances compared: {}; abstentions: {}\n",
        report.compared, report.abstain_count
    ));
    out
}

pub fn kappa_table(report: &CompareReport) -> String {
    let ids = &report.matrix.ids;
    let mut header: Vec<&str> = vec![""];
    for id in ids {
        header.push(id);
    }
    let mut rows = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        for j in 0..ids.len() {
            row.push(f3(report.matrix.get(i, j)));
        }
        rows.push(row);
    }
    let mut out = render_table(&header, &rows);
    out.push('\n');
    for (i, a) in ids.iter().enumerate() {
        for (j, b) in ids.iter().enumerate() {
            if j > i {
                out.push_str(&format!(
                    "{a} vs {b}: {:.3} ({})\n",
                    report.matrix.get(i, j),
                    report.matrix.band_of(i, j)
                ));
            }
        }
    }
    for (name, abstains) in &report.abstains {
        if *abstains > 0 {
            out.push_str(&format!("{name}: {abstains} abstentions scored as LITERAL\n"));
        }
    }
    out.push_str(&format!("instances compared: {}\n", report.compared));
    out
}

pub fn baseline_table(rows: &[(String, f64)]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, f1)| vec![name.clone(), f3(*f1)])
        .collect();
    render_table(&["System", "F1"], &body)
}
