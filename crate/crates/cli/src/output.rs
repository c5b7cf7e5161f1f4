//! Locale-free number formatting and the CSV / JSON / SVG writers.

use serde_json::{json, Map, Value};

/// Significant digits of every printed real.
pub const DIGITS: usize = 15;
pub const SCHEMA_VERSION: u32 = 1;

/// `v` with [`DIGITS`] significant digits, in the style of `%.15g`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", DIGITS - 1, v);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS as i32).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `v` rounded to [`DIGITS`] significant digits, for JSON output.
fn rounded(v: f64) -> Value {
    match num(v).parse::<f64>() {
        Ok(r) if r.is_finite() => json!(r),
        _ => Value::String(num(v)),
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(r) => num(*r),
            Cell::Text(t) => t.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Real(r) => rounded(*r),
            Cell::Text(t) => json!(t),
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Rows under a fixed header, plus metadata carried by JSON and SVG.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(&'static str, Cell)>,
}

impl Table {
    pub fn new(command: &'static str, header: &[&'static str]) -> Self {
        Table {
            command,
            header: header.to_vec(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &'static str, value: impl Into<Cell>) {
        self.meta.push((key, value.into()));
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    fn meta_json(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
        m.insert("command".into(), json!(self.command));
        for (k, v) in &self.meta {
            m.insert((*k).into(), v.json());
        }
        m
    }

    pub fn to_json(&self) -> String {
        let mut top = self.meta_json();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (h, c) in self.header.iter().zip(row) {
                    obj.insert((*h).into(), c.json());
                }
                Value::Object(obj)
            })
            .collect();
        top.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("serialisable");
        s.push('\n');
        s
    }

    /// The boundary as one closed polyline, `y` up, origin at the centre.
    pub fn to_svg(&self, points: &[(f64, f64)]) -> String {
        let extent = points
            .iter()
            .map(|(x, y)| x.abs().max(y.abs()))
            .fold(0.0f64, f64::max)
            * 1.1;
        let extent = if extent > 0.0 { extent } else { 1.0 };
        let mut coords: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{},{}", num(*x), num(-*y)))
            .collect();
        if let Some(first) = coords.first().cloned() {
            coords.push(first);
        }
        let meta = serde_json::to_string(&Value::Object(self.meta_json())).expect("serialisable");
        format!(
            concat!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{lo} {lo} {size} {size}\" ",
                "width=\"600\" height=\"600\">\n",
                "<metadata>{meta}</metadata>\n",
                "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"{stroke}\" points=\"{pts}\"/>\n",
                "</svg>\n"
            ),
            lo = num(-extent),
            size = num(2.0 * extent),
            meta = meta,
            stroke = num(extent / 200.0),
            pts = coords.join(" "),
        )
    }
}
