//! CPLEX-style LP text dump, for cross-checking a model with external solvers.
//!
//! Column names: `p_l{loc}_t{t}`, `phi_e{edge}_t{t}`, `psi_t{t}`,
//! `cw_e{edge}_t{t}`, `comega_o{opp}_t{t}` (dense scenario indices, 1-based
//! time). Row names follow the row family, e.g. `trav_short_e3_t2` or
//! `flow_v1_t5`.

use std::fmt::Write;

use super::{Integrality, MipModel, Relation, RowTag, VarKind};

pub fn column_name(model: &MipModel, j: usize) -> String {
    let var = model.layout.var(j);
    let t = var.t;
    match var.kind {
        VarKind::P { loc } => format!("p_l{loc}_t{t}"),
        VarKind::Phi { edge } => format!("phi_e{edge}_t{t}"),
        VarKind::Psi => format!("psi_t{t}"),
        VarKind::Cw { edge } => format!("cw_e{edge}_t{t}"),
        VarKind::Comega { opp } => format!("comega_o{opp}_t{t}"),
    }
}

fn row_name(tag: &RowTag) -> String {
    match *tag {
        RowTag::TraversalShortfall { edge, t } => format!("trav_short_e{edge}_t{t}"),
        RowTag::TraversalTeaming { edge, t } => format!("trav_team_e{edge}_t{t}"),
        RowTag::OverwatchRamp { opp, t } => format!("ow_ramp_o{opp}_t{t}"),
        RowTag::OverwatchSurplus { opp, t } => format!("ow_surplus_o{opp}_t{t}"),
        RowTag::OverwatchGate { opp, t } => format!("ow_gate_o{opp}_t{t}"),
        RowTag::OverwatchCap { opp, t } => format!("ow_cap_o{opp}_t{t}"),
        RowTag::ReachSteps => "reach_steps".into(),
        RowTag::ReachLayer { k } => format!("reach_layer_{k}"),
        RowTag::EdgeTraffic { edge, t } => format!("traffic_e{edge}_t{t}"),
        RowTag::StepTraffic { t } => format!("step_traffic_t{t}"),
        RowTag::StepUsed { edge, t } => format!("step_used_e{edge}_t{t}"),
        RowTag::GoalCut { goal } => format!("goal_cut_l{goal}"),
        RowTag::EdgeUsed { edge, t } => format!("used_e{edge}_t{t}"),
        RowTag::Moving { t } => format!("moving_t{t}"),
        RowTag::Start { loc } => format!("start_l{loc}"),
        RowTag::Goal { loc } => format!("goal_l{loc}"),
        RowTag::TeamSize { t } => format!("team_t{t}"),
        RowTag::Flow { node, t } => format!("flow_v{node}_t{t}"),
    }
}

fn term(out: &mut String, coeff: f64, name: &str) {
    if coeff < 0.0 {
        write!(out, " - {} {name}", -coeff).unwrap();
    } else {
        write!(out, " + {coeff} {name}").unwrap();
    }
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

pub fn write_lp(model: &MipModel) -> String {
    let names: Vec<String> = (0..model.n_columns()).map(|j| column_name(model, j)).collect();
    let mut out = String::new();
    writeln!(
        out,
        "\\ {} columns, {} rows",
        model.n_columns(),
        model.n_rows()
    )
    .unwrap();
    writeln!(out, "Minimize").unwrap();
    let mut obj = String::from(" obj:");
    for (j, &c) in model.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut obj, c, &names[j]);
        }
    }
    writeln!(out, "{obj}").unwrap();
    writeln!(out, "Subject To").unwrap();
    for row in &model.rows {
        let mut line = format!(" {}:", row_name(&row.tag));
        if row.coeffs.is_empty() {
            line.push_str(" 0 ");
            line.push_str(&names[0]);
        }
        for &(j, a) in &row.coeffs {
            term(&mut line, a, &names[j]);
        }
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        writeln!(out, "{line} {rel} {}", row.rhs).unwrap();
    }
    writeln!(out, "Bounds").unwrap();
    for (j, c) in model.columns.iter().enumerate() {
        if c.integrality == Integrality::Binary {
            continue;
        }
        writeln!(out, " {} <= {} <= {}", bound(c.lower), names[j], bound(c.upper)).unwrap();
    }
    let section = |out: &mut String, title: &str, kind: Integrality| {
        let cols: Vec<&str> = model
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.integrality == kind)
            .map(|(j, _)| names[j].as_str())
            .collect();
        if !cols.is_empty() {
            writeln!(out, "{title}").unwrap();
            for chunk in cols.chunks(8) {
                writeln!(out, " {}", chunk.join(" ")).unwrap();
            }
        }
    };
    section(&mut out, "Generals", Integrality::Integer);
    section(&mut out, "Binaries", Integrality::Binary);
    writeln!(out, "End").unwrap();
    out
}
