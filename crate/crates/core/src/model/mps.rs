//! Fixed-field MPS reader and writer.
//!
//! Supported: `NAME`, an optional `OBJSENSE` section, `ROWS` (N/L/G/E),
//! `COLUMNS` with `INTORG`/`INTEND` markers, `RHS`, `BOUNDS` (LO/UP/BV/FR)
//! and `ENDATA`. Fields sit in the classic columns 2-3, 5-12, 15-22, 25-36,
//! 40-47 and 50-61. Integer columns must be binary.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{GeneralLp, Relation, Sense, VarKind};

const MAX_LINE: usize = 255;
const NAME_WIDTH: usize = 8;
const NUM_WIDTH: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input is not valid 8-bit text")]
    Encoding,
    #[error("model cannot be written: {0}")]
    Unwritable(String),
}

fn err(line: usize, message: impl Into<String>) -> MpsError {
    MpsError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Start,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

/// Field `k` (0-based) of a fixed-format data line.
fn field(line: &str, k: usize) -> &str {
    const SPANS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];
    let (start, end) = SPANS[k];
    let bytes = line.as_bytes();
    if start >= bytes.len() {
        return "";
    }
    let end = end.min(bytes.len());
    line.get(start..end).unwrap_or("").trim()
}

fn parse_num(s: &str, line: usize) -> Result<f64, MpsError> {
    let v: f64 = s
        .parse()
        .map_err(|_| err(line, format!("invalid number '{s}'")))?;
    if v.is_nan() {
        return Err(err(line, "NaN value"));
    }
    Ok(v)
}

/// Parses a fixed-field MPS byte stream.
pub fn read_mps(bytes: &[u8]) -> Result<GeneralLp, MpsError> {
    // 8-bit text: reject anything that is not ASCII.
    if !bytes.is_ascii() {
        return Err(MpsError::Encoding);
    }
    let text = std::str::from_utf8(bytes).map_err(|_| MpsError::Encoding)?;

    let mut lp = GeneralLp::new("", Sense::Minimize);
    let mut section = Section::Start;
    let mut objective_row: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut in_integer_block = false;
    let mut integer_cols: Vec<usize> = Vec::new();
    let mut upper_set: Vec<bool> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        if raw.len() > MAX_LINE {
            return Err(err(line_no, format!("line longer than {MAX_LINE} characters")));
        }
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        if !line.starts_with(' ') {
            let mut words = line.split_whitespace();
            let keyword = words.next().unwrap_or("");
            let next = match keyword {
                "NAME" => Section::Name,
                "OBJSENSE" => Section::ObjSense,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(err(line_no, format!("unknown section '{other}'"))),
            };
            if next <= section {
                return Err(err(line_no, format!("section {keyword} out of order")));
            }
            if section == Section::Start && next != Section::Name {
                return Err(err(line_no, "expected NAME section first"));
            }
            section = next;
            match next {
                Section::Name => lp.name = words.collect::<Vec<_>>().join(" "),
                Section::ObjSense => {
                    if let Some(s) = words.next() {
                        lp.sense = parse_sense(s, line_no)?;
                    }
                }
                Section::End => break,
                _ => {}
            }
            continue;
        }
        match section {
            Section::Start | Section::Name | Section::End => {
                return Err(err(line_no, "data line outside of a section"))
            }
            Section::ObjSense => lp.sense = parse_sense(line.trim(), line_no)?,
            Section::Rows => {
                let kind = field(line, 0);
                let name = field(line, 1);
                if name.is_empty() {
                    return Err(err(line_no, "row without a name"));
                }
                if row_index.contains_key(name) || objective_row.as_deref() == Some(name) {
                    return Err(err(line_no, format!("duplicate row '{name}'")));
                }
                let relation = match kind {
                    "N" => {
                        if objective_row.is_some() {
                            return Err(err(line_no, "only one objective (N) row is supported"));
                        }
                        objective_row = Some(name.to_string());
                        continue;
                    }
                    "L" => Relation::Le,
                    "G" => Relation::Ge,
                    "E" => Relation::Eq,
                    other => return Err(err(line_no, format!("unknown row type '{other}'"))),
                };
                row_index.insert(name.to_string(), lp.rows.len());
                lp.add_row(name, Vec::new(), relation, 0.0);
            }
            Section::Columns => {
                if field(line, 2) == "'MARKER'" {
                    match field(line, 4) {
                        "'INTORG'" => in_integer_block = true,
                        "'INTEND'" => in_integer_block = false,
                        other => return Err(err(line_no, format!("unknown marker {other}"))),
                    }
                    continue;
                }
                let col_name = field(line, 1);
                if col_name.is_empty() {
                    return Err(err(line_no, "column entry without a column name"));
                }
                let j = match col_index.get(col_name) {
                    Some(&j) if j + 1 == lp.num_vars() => j,
                    Some(_) => {
                        return Err(err(line_no, format!("column '{col_name}' is not contiguous")))
                    }
                    None => {
                        let j = lp.add_var(col_name, 0.0, 0.0, f64::INFINITY, VarKind::Continuous);
                        col_index.insert(col_name.to_string(), j);
                        upper_set.push(false);
                        if in_integer_block {
                            integer_cols.push(j);
                        }
                        j
                    }
                };
                for (rf, vf) in [(2, 3), (4, 5)] {
                    let row_name = field(line, rf);
                    if row_name.is_empty() {
                        continue;
                    }
                    let value = parse_num(field(line, vf), line_no)?;
                    if objective_row.as_deref() == Some(row_name) {
                        lp.costs[j] += value;
                    } else if let Some(&i) = row_index.get(row_name) {
                        lp.rows[i].coeffs.push((j, value));
                    } else {
                        return Err(err(line_no, format!("unknown row '{row_name}'")));
                    }
                }
            }
            Section::Rhs => {
                for (rf, vf) in [(2, 3), (4, 5)] {
                    let row_name = field(line, rf);
                    if row_name.is_empty() {
                        continue;
                    }
                    let value = parse_num(field(line, vf), line_no)?;
                    if objective_row.as_deref() == Some(row_name) {
                        lp.constant = -value;
                    } else if let Some(&i) = row_index.get(row_name) {
                        lp.rows[i].rhs = value;
                    } else {
                        return Err(err(line_no, format!("unknown row '{row_name}'")));
                    }
                }
            }
            Section::Bounds => {
                let kind = field(line, 0);
                let col_name = field(line, 2);
                let j = *col_index
                    .get(col_name)
                    .ok_or_else(|| err(line_no, format!("unknown column '{col_name}'")))?;
                match kind {
                    "LO" => lp.lower[j] = parse_num(field(line, 3), line_no)?,
                    "UP" => {
                        lp.upper[j] = parse_num(field(line, 3), line_no)?;
                        upper_set[j] = true;
                    }
                    "FR" => {
                        lp.lower[j] = f64::NEG_INFINITY;
                        lp.upper[j] = f64::INFINITY;
                    }
                    "BV" => {
                        lp.lower[j] = 0.0;
                        lp.upper[j] = 1.0;
                        upper_set[j] = true;
                        lp.kinds[j] = VarKind::Binary;
                    }
                    other => return Err(err(line_no, format!("unsupported bound type '{other}'"))),
                }
            }
        }
    }
    if section != Section::End {
        return Err(err(text.lines().count(), "missing ENDATA"));
    }
    if objective_row.is_none() {
        return Err(err(0, "no objective (N) row"));
    }
    for j in integer_cols {
        if !upper_set[j] {
            lp.upper[j] = 1.0;
        }
        if lp.lower[j] < 0.0 || lp.upper[j] > 1.0 {
            return Err(err(
                0,
                format!("integer column '{}' is not binary", lp.var_names[j]),
            ));
        }
        lp.kinds[j] = VarKind::Binary;
    }
    lp.validate()
        .map_err(|e| err(0, format!("invalid model: {e}")))?;
    Ok(lp)
}

fn parse_sense(s: &str, line: usize) -> Result<Sense, MpsError> {
    match s {
        "MIN" | "MINIMIZE" => Ok(Sense::Minimize),
        "MAX" | "MAXIMIZE" => Ok(Sense::Maximize),
        other => Err(err(line, format!("unknown objective sense '{other}'"))),
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= NAME_WIDTH
        && name.bytes().all(|b| b.is_ascii_graphic() && b != b'\'')
}

/// Shortest decimal rendering that fits the 12-character numeric field.
fn fmt_num(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= NUM_WIDTH {
        return plain;
    }
    let exp = format!("{v:e}");
    if exp.len() <= NUM_WIDTH {
        return exp;
    }
    (0..NUM_WIDTH)
        .rev()
        .map(|p| format!("{v:.p$e}"))
        .find(|s| s.len() <= NUM_WIDTH)
        .unwrap_or_else(|| format!("{v:.0e}"))
}

fn data_line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str, f5: &str, f6: &str) {
    let mut line = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}");
    if !f5.is_empty() {
        let _ = write!(line, "   {f5:<8}  {f6:>12}");
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

/// Writes a model as fixed-field MPS. Names that do not fit the 8-character
/// fields are replaced by generated ones (`C0000012`, `R0000003`).
pub fn write_mps(p: &GeneralLp) -> Result<Vec<u8>, MpsError> {
    p.validate()
        .map_err(|e| MpsError::Unwritable(e.to_string()))?;
    let mut used: HashMap<String, ()> = HashMap::new();
    let obj_name = "COST".to_string();
    used.insert(obj_name.clone(), ());
    let mut unique = |name: &str, prefix: char, k: usize| -> String {
        let candidate = if valid_name(name) && !used.contains_key(name) {
            name.to_string()
        } else {
            format!("{prefix}{k:07}")
        };
        used.insert(candidate.clone(), ());
        candidate
    };
    let row_names: Vec<String> = p
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| unique(&r.name, 'R', i))
        .collect();
    let col_names: Vec<String> = p
        .var_names
        .iter()
        .enumerate()
        .map(|(j, n)| unique(n, 'C', j))
        .collect();

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.num_vars()];
    for (i, row) in p.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            columns[j].push((i, a));
        }
    }

    let mut out = String::new();
    let name = if p.name.is_empty() { "MODEL" } else { p.name.as_str() };
    let _ = writeln!(out, "NAME          {name}");
    if p.sense == Sense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    out.push_str("ROWS\n");
    data_line(&mut out, "N", &obj_name, "", "", "", "");
    for (row, name) in p.rows.iter().zip(&row_names) {
        let kind = match row.relation {
            Relation::Le => "L",
            Relation::Ge => "G",
            Relation::Eq => "E",
        };
        data_line(&mut out, kind, name, "", "", "", "");
    }
    out.push_str("COLUMNS\n");
    let mut marker = 0usize;
    let mut in_block = false;
    for j in 0..p.num_vars() {
        let binary = p.kinds[j] == VarKind::Binary;
        if binary != in_block {
            let tag = if binary { "'INTORG'" } else { "'INTEND'" };
            data_line(&mut out, "", &format!("M{marker:07}"), "'MARKER'", "", tag, "");
            marker += 1;
            in_block = binary;
        }
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if p.costs[j] != 0.0 {
            entries.push((&obj_name, p.costs[j]));
        }
        for &(i, a) in &columns[j] {
            entries.push((&row_names[i], a));
        }
        if entries.is_empty() {
            // Keep the column declared.
            entries.push((&obj_name, 0.0));
        }
        for pair in entries.chunks(2) {
            let (r1, v1) = pair[0];
            let (r2, v2) = pair
                .get(1)
                .map(|&(r, v)| (r, fmt_num(v)))
                .unwrap_or(("", String::new()));
            data_line(&mut out, "", &col_names[j], r1, &fmt_num(v1), r2, &v2);
        }
    }
    if in_block {
        data_line(&mut out, "", &format!("M{marker:07}"), "'MARKER'", "", "'INTEND'", "");
    }
    out.push_str("RHS\n");
    if p.constant != 0.0 {
        data_line(&mut out, "", "RHS", &obj_name, &fmt_num(-p.constant), "", "");
    }
    for (row, name) in p.rows.iter().zip(&row_names) {
        if row.rhs != 0.0 {
            data_line(&mut out, "", "RHS", name, &fmt_num(row.rhs), "", "");
        }
    }
    out.push_str("BOUNDS\n");
    for j in 0..p.num_vars() {
        let (lo, up) = (p.lower[j], p.upper[j]);
        let col = &col_names[j];
        if p.kinds[j] == VarKind::Binary {
            data_line(&mut out, "BV", "BND", col, "", "", "");
            if lo != 0.0 {
                data_line(&mut out, "LO", "BND", col, &fmt_num(lo), "", "");
            }
            if up != 1.0 {
                data_line(&mut out, "UP", "BND", col, &fmt_num(up), "", "");
            }
            continue;
        }
        if lo == f64::NEG_INFINITY {
            data_line(&mut out, "FR", "BND", col, "", "", "");
        } else if lo != 0.0 {
            data_line(&mut out, "LO", "BND", col, &fmt_num(lo), "", "");
        }
        if up.is_finite() {
            data_line(&mut out, "UP", "BND", col, &fmt_num(up), "", "");
        }
    }
    out.push_str("ENDATA\n");
    Ok(out.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GeneralLp {
        let mut p = GeneralLp::new("TINY", Sense::Minimize);
        let x = p.add_var("x", 1.5, 0.0, f64::INFINITY, VarKind::Continuous);
        p.add_row("c1", vec![(x, 2.0)], Relation::Ge, 3.0);
        p
    }

    #[test]
    fn minimal_instance_round_trips() {
        let p = tiny();
        let text = write_mps(&p).unwrap();
        let q = read_mps(&text).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn bv_bound_marks_binary() {
        let text = "NAME          B\nROWS\n N  COST\n L  R1\nCOLUMNS\n    X         COST               1.0   R1                 1.0\nRHS\n    RHS       R1                 1.0\nBOUNDS\n BV BND       X\nENDATA\n";
        let p = read_mps(text.as_bytes()).unwrap();
        assert_eq!(p.kinds, vec![VarKind::Binary]);
        assert_eq!((p.lower[0], p.upper[0]), (0.0, 1.0));
        assert_eq!(p.rows[0].relation, Relation::Le);
    }

    #[test]
    fn markers_declare_binaries() {
        let mut p = tiny();
        let u = p.add_binary("u", 10.0);
        p.rows[0].coeffs.push((u, -1.0));
        p.constant = 4.25;
        p.add_var("f", -1.0, f64::NEG_INFINITY, 2.0, VarKind::Continuous);
        p.add_var("g", 0.0, -3.0, 7.5, VarKind::Continuous);
        let text = write_mps(&p).unwrap();
        let q = read_mps(&text).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn maximize_round_trips() {
        let mut p = tiny();
        p.sense = Sense::Maximize;
        p.rows[0].relation = Relation::Le;
        let q = read_mps(&write_mps(&p).unwrap()).unwrap();
        assert_eq!(q.sense, Sense::Maximize);
    }

    #[test]
    fn unknown_section_is_rejected() {
        let text = "NAME          X\nROWS\n N  COST\nRANGES\nENDATA\n";
        assert_eq!(
            read_mps(text.as_bytes()).unwrap_err(),
            MpsError::Parse {
                line: 4,
                message: "unknown section 'RANGES'".into()
            }
        );
    }

    #[test]
    fn sections_out_of_order_are_rejected() {
        let text = "NAME          X\nCOLUMNS\nROWS\nENDATA\n";
        assert!(matches!(
            read_mps(text.as_bytes()),
            Err(MpsError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn unknown_row_reference_names_line() {
        let text = "NAME          X\nROWS\n N  COST\nCOLUMNS\n    X         NOPE               1.0\nRHS\nENDATA\n";
        let e = read_mps(text.as_bytes()).unwrap_err();
        assert_eq!(
            e,
            MpsError::Parse {
                line: 5,
                message: "unknown row 'NOPE'".into()
            }
        );
    }

    #[test]
    fn general_integers_are_rejected() {
        let text = "NAME          X\nROWS\n N  COST\nCOLUMNS\n    M0        'MARKER'                 'INTORG'\n    X         COST               1.0\n    M1        'MARKER'                 'INTEND'\nBOUNDS\n UP BND       X                  5.0\nENDATA\n";
        assert!(read_mps(text.as_bytes()).is_err());
    }

    #[test]
    fn long_numbers_fit_the_field() {
        for v in [1.0 / 3.0, -123456.789012345, 1e-300, 6.02214076e23] {
            let s = fmt_num(v);
            assert!(s.len() <= NUM_WIDTH, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 1e-6 * v.abs());
        }
        assert_eq!(fmt_num(352.43), "352.43");
    }
}
