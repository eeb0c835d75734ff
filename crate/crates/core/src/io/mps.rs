//! Free-format MPS subset: NAME, ROWS, COLUMNS, RHS, BOUNDS (LO/UP/FR), ENDATA.
//!
//! The result is always in standard form. Lower bounds are shifted out,
//! upper-only bounds are reflected, free columns are split into `name` and
//! `name_neg`, doubly bounded columns get an extra equality row, and every
//! inequality row gets a slack column `_s<k>` (k is the 1-based row number).
//! Columns come in first-appearance order, then negative parts, then slacks.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{FacetError, Result};
use crate::lp::StandardFormLP;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    E,
    L,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    ObjSense,
}

struct Bounds {
    lower: f64,
    upper: f64,
}

fn parse_err(line: usize, message: impl Into<String>) -> FacetError {
    FacetError::ParseError {
        line,
        message: message.into(),
    }
}

fn number(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("expected a number, found {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

#[derive(Default)]
struct Model {
    objective: Option<String>,
    rows: Vec<(String, RowKind)>,
    row_index: HashMap<String, usize>,
    cols: Vec<String>,
    col_index: HashMap<String, usize>,
    entries: HashMap<(usize, usize), f64>,
    obj: HashMap<usize, f64>,
    rhs: Vec<f64>,
    rhs_objective: f64,
    bounds: Vec<Bounds>,
}

impl Model {
    fn add_coefficient(&mut self, col: usize, row: &str, value: f64, line: usize) -> Result<()> {
        if self.objective.as_deref() == Some(row) {
            if self.obj.insert(col, value).is_some() {
                return Err(parse_err(line, format!("duplicate objective entry for {}", self.cols[col])));
            }
            return Ok(());
        }
        let Some(&i) = self.row_index.get(row) else {
            return Err(parse_err(line, format!("unknown row {row:?}")));
        };
        if self.entries.insert((i, col), value).is_some() {
            return Err(parse_err(
                line,
                format!("duplicate entry for row {row:?}, column {:?}", self.cols[col]),
            ));
        }
        Ok(())
    }
}

pub fn parse_mps(text: &str) -> Result<StandardFormLP> {
    let mut model = Model::default();
    let mut free_rows: Vec<String> = Vec::new();
    let mut section = Section::None;
    let mut seen_endata = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let indented = raw.starts_with(' ') || raw.starts_with('\t');
        if seen_endata {
            return Err(parse_err(line, "content after ENDATA"));
        }

        if !indented {
            let head = toks[0].to_ascii_uppercase();
            match head.as_str() {
                "NAME" => {
                    section = Section::None;
                    continue;
                }
                "ROWS" | "COLUMNS" | "RHS" | "BOUNDS" if toks.len() == 1 => {
                    section = match head.as_str() {
                        "ROWS" => Section::Rows,
                        "COLUMNS" => Section::Columns,
                        "RHS" => Section::Rhs,
                        _ => Section::Bounds,
                    };
                    continue;
                }
                "ENDATA" => {
                    seen_endata = true;
                    continue;
                }
                "OBJSENSE" => {
                    section = Section::ObjSense;
                    if let Some(sense) = toks.get(1) {
                        check_sense(sense, line)?;
                        section = Section::None;
                    }
                    continue;
                }
                "RANGES" | "SOS" | "QUADOBJ" | "QMATRIX" | "QSECTION" | "QCMATRIX" | "CSECTION"
                | "INDICATORS" | "OBJNAME" => {
                    return Err(FacetError::UnsupportedSection {
                        line,
                        section: head,
                    })
                }
                _ => {
                    if section == Section::None {
                        return Err(FacetError::UnsupportedSection {
                            line,
                            section: toks[0].to_string(),
                        });
                    }
                    parse_data(&mut model, &mut free_rows, section, &toks, line)?;
                    continue;
                }
            }
        }
        parse_data(&mut model, &mut free_rows, section, &toks, line)?;
    }

    if !seen_endata {
        return Err(parse_err(text.lines().count().max(1), "missing ENDATA"));
    }
    build(model)
}

fn check_sense(tok: &str, line: usize) -> Result<()> {
    match tok.to_ascii_uppercase().as_str() {
        "MIN" | "MINIMIZE" => Ok(()),
        "MAX" | "MAXIMIZE" => Err(FacetError::UnsupportedSection {
            line,
            section: "OBJSENSE MAX".into(),
        }),
        other => Err(parse_err(line, format!("unknown objective sense {other:?}"))),
    }
}

fn parse_data(
    model: &mut Model,
    free_rows: &mut Vec<String>,
    section: Section,
    toks: &[&str],
    line: usize,
) -> Result<()> {
    match section {
        Section::None => Err(parse_err(line, "data line outside any section")),
        Section::ObjSense => check_sense(toks[0], line),
        Section::Rows => {
            if toks.len() != 2 {
                return Err(parse_err(line, "ROWS lines are `<type> <name>`"));
            }
            let name = toks[1].to_string();
            if model.row_index.contains_key(&name)
                || model.objective.as_deref() == Some(toks[1])
                || free_rows.contains(&name)
            {
                return Err(parse_err(line, format!("duplicate row {name:?}")));
            }
            let kind = match toks[0].to_ascii_uppercase().as_str() {
                "N" => {
                    if model.objective.is_none() {
                        model.objective = Some(name);
                    } else {
                        free_rows.push(name);
                    }
                    return Ok(());
                }
                "E" => RowKind::E,
                "L" => RowKind::L,
                "G" => RowKind::G,
                other => return Err(parse_err(line, format!("unknown row type {other:?}"))),
            };
            model.row_index.insert(name.clone(), model.rows.len());
            model.rows.push((name, kind));
            model.rhs.push(0.0);
            Ok(())
        }
        Section::Columns => {
            if toks.iter().any(|t| t.contains("MARKER")) {
                return Err(FacetError::UnsupportedSection {
                    line,
                    section: "MARKER".into(),
                });
            }
            if toks.len() != 3 && toks.len() != 5 {
                return Err(parse_err(line, "COLUMNS lines are `<col> <row> <value> [<row> <value>]`"));
            }
            let col = match model.col_index.get(toks[0]) {
                Some(&j) => j,
                None => {
                    let j = model.cols.len();
                    model.cols.push(toks[0].to_string());
                    model.col_index.insert(toks[0].to_string(), j);
                    model.bounds.push(Bounds {
                        lower: 0.0,
                        upper: f64::INFINITY,
                    });
                    j
                }
            };
            for pair in toks[1..].chunks(2) {
                let value = number(pair[1], line)?;
                if free_rows.iter().any(|r| r == pair[0]) {
                    continue;
                }
                model.add_coefficient(col, pair[0], value, line)?;
            }
            Ok(())
        }
        Section::Rhs => {
            let pairs = match toks.len() {
                2 | 4 => toks,
                3 | 5 => &toks[1..],
                _ => return Err(parse_err(line, "RHS lines are `[<set>] <row> <value> [<row> <value>]`")),
            };
            for pair in pairs.chunks(2) {
                let value = number(pair[1], line)?;
                if model.objective.as_deref() == Some(pair[0]) {
                    model.rhs_objective = value;
                } else if let Some(&i) = model.row_index.get(pair[0]) {
                    model.rhs[i] = value;
                } else if !free_rows.iter().any(|r| r == pair[0]) {
                    return Err(parse_err(line, format!("unknown row {:?}", pair[0])));
                }
            }
            Ok(())
        }
        Section::Bounds => {
            let kind = toks[0].to_ascii_uppercase();
            let (col, value) = match (kind.as_str(), toks.len()) {
                ("FR", 2) => (toks[1], None),
                ("FR", 3) => (toks[2], None),
                ("LO" | "UP", 3) => (toks[1], Some(number(toks[2], line)?)),
                ("LO" | "UP", 4) => (toks[2], Some(number(toks[3], line)?)),
                ("LO" | "UP" | "FR", _) => {
                    return Err(parse_err(line, "BOUNDS lines are `<type> [<set>] <col> [<value>]`"))
                }
                _ => {
                    return Err(FacetError::UnsupportedBound {
                        line,
                        bound: toks[0].to_string(),
                    })
                }
            };
            let Some(&j) = model.col_index.get(col) else {
                return Err(parse_err(line, format!("unknown column {col:?}")));
            };
            let b = &mut model.bounds[j];
            match (kind.as_str(), value) {
                ("FR", _) => {
                    b.lower = f64::NEG_INFINITY;
                    b.upper = f64::INFINITY;
                }
                ("LO", Some(v)) => b.lower = v,
                ("UP", Some(v)) => b.upper = v,
                _ => unreachable!(),
            }
            if b.lower > b.upper {
                return Err(parse_err(line, format!("empty bound interval for column {col:?}")));
            }
            Ok(())
        }
    }
}

fn build(model: Model) -> Result<StandardFormLP> {
    let m0 = model.rows.len();
    let n0 = model.cols.len();
    let mut dense = DMatrix::<f64>::zeros(m0, n0);
    for (&(i, j), &v) in &model.entries {
        dense[(i, j)] = v;
    }
    let mut b = DVector::from_vec(model.rhs.clone());
    let mut c = DVector::from_fn(n0, |j, _| model.obj.get(&j).copied().unwrap_or(0.0));
    let mut offset = -model.rhs_objective;

    // Per structural column: shift, reflect, split, or cap with an extra row.
    let mut negative_parts: Vec<usize> = Vec::new();
    let mut capped: Vec<(usize, f64)> = Vec::new();
    for (j, bd) in model.bounds.iter().enumerate() {
        let (lo, up) = (bd.lower, bd.upper);
        if lo.is_finite() {
            if lo != 0.0 {
                for i in 0..m0 {
                    b[i] -= dense[(i, j)] * lo;
                }
                offset += c[j] * lo;
            }
            if up.is_finite() {
                capped.push((j, up - lo));
            }
        } else if up.is_finite() {
            for i in 0..m0 {
                b[i] -= dense[(i, j)] * up;
                dense[(i, j)] = -dense[(i, j)];
            }
            offset += c[j] * up;
            c[j] = -c[j];
        } else {
            negative_parts.push(j);
        }
    }

    let mut kinds: Vec<RowKind> = model.rows.iter().map(|r| r.1).collect();
    kinds.extend(std::iter::repeat_n(RowKind::L, capped.len()));
    let m = kinds.len();
    let slack_rows: Vec<usize> = (0..m).filter(|&i| kinds[i] != RowKind::E).collect();
    let n = n0 + negative_parts.len() + slack_rows.len();

    let mut a = DMatrix::<f64>::zeros(m, n);
    a.view_mut((0, 0), (m0, n0)).copy_from(&dense);
    let mut rhs_extra = Vec::with_capacity(capped.len());
    for (k, &(j, width)) in capped.iter().enumerate() {
        a[(m0 + k, j)] = 1.0;
        rhs_extra.push(width);
    }
    let mut rhs = DVector::zeros(m);
    rhs.rows_mut(0, m0).copy_from(&b);
    rhs.rows_mut(m0, capped.len()).copy_from_slice(&rhs_extra);
    let mut cost = DVector::zeros(n);
    cost.rows_mut(0, n0).copy_from(&c);
    let mut names = model.cols.clone();
    for (k, &j) in negative_parts.iter().enumerate() {
        let col = n0 + k;
        for i in 0..m {
            a[(i, col)] = -a[(i, j)];
        }
        cost[col] = -cost[j];
        names.push(format!("{}_neg", model.cols[j]));
    }
    for (k, &i) in slack_rows.iter().enumerate() {
        let col = n0 + negative_parts.len() + k;
        a[(i, col)] = if kinds[i] == RowKind::G { -1.0 } else { 1.0 };
        names.push(format!("_s{}", i + 1));
    }

    let mut lp = StandardFormLP::new(a, rhs, cost)?.with_names(names)?;
    lp.objective_offset = offset;
    Ok(lp)
}
