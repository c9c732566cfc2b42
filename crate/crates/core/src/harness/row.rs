//! One CSV row per corpus member. Every numeric header carries its unit in
//! brackets; `L` is the coordinate length unit. Empty cells mean the
//! diagnostic was disabled or the run failed.

use crate::error::{Error, Result};

trait Cell: Sized {
    fn cell(&self) -> String;
    fn parse(s: &str) -> Option<Self>;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        format!("{self:.9e}")
    }
    fn parse(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl Cell for bool {
    fn cell(&self) -> String {
        self.to_string()
    }
    fn parse(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl Cell for u64 {
    fn cell(&self) -> String {
        self.to_string()
    }
    fn parse(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

fn cell<T: Cell>(v: &Option<T>) -> String {
    v.as_ref().map(Cell::cell).unwrap_or_default()
}

fn uncell<T: Cell>(s: &str, header: &str) -> Result<Option<T>> {
    if s.is_empty() {
        return Ok(None);
    }
    T::parse(s)
        .map(Some)
        .ok_or_else(|| Error::Format(format!("column `{header}`: cannot parse `{s}`")))
}

macro_rules! row_columns {
    ($($field:ident : $ty:ty => $header:literal),* $(,)?) => {
        #[derive(Debug, Clone, PartialEq, Default)]
        pub struct SweepRow {
            pub member: String,
            /// `ok` or `failed: <reason>`.
            pub status: String,
            $(pub $field: Option<$ty>,)*
        }

        pub const HEADERS: &[&str] = &["member", "status", $($header),*];

        impl SweepRow {
            pub fn cells(&self) -> Vec<String> {
                vec![self.member.clone(), self.status.clone(), $(cell(&self.$field)),*]
            }

            pub fn from_cells(cells: &[&str]) -> Result<Self> {
                if cells.len() != HEADERS.len() {
                    return Err(Error::Format(format!(
                        "row has {} cells, expected {}",
                        cells.len(),
                        HEADERS.len()
                    )));
                }
                let mut it = cells.iter().copied();
                let member = it.next().unwrap_or_default().to_string();
                let status = it.next().unwrap_or_default().to_string();
                Ok(SweepRow {
                    member,
                    status,
                    $($field: uncell(it.next().unwrap_or_default(), $header)?,)*
                })
            }
        }
    };
}

row_columns! {
    m_exact: f64 => "m_exact [L]",
    m_adm: f64 => "m_adm [L]",
    bkks_1: f64 => "bkks_1 [L]",
    bkks_2: f64 => "bkks_2 [L]",
    bkks_3: f64 => "bkks_3 [L]",
    min_slack: f64 => "min_slack [L]",
    tau: f64 => "tau [1]",
    tau1_min: f64 => "tau1_min [1]",
    tau2: f64 => "tau2 [1]",
    area_g: f64 => "area_g [L^2]",
    seed_ok: bool => "seed_ok [bool]",
    coarea_lhs: f64 => "coarea_lhs [L^2]",
    coarea_rhs: f64 => "coarea_rhs [L^2]",
    certificate: bool => "certificate [bool]",
    mask_nodes: u64 => "mask_nodes [count]",
    sup_q: f64 => "sup_q [1]",
    cyl_ratio_min: f64 => "cyl_ratio_min [1]",
    cyl_ratio_max: f64 => "cyl_ratio_max [1]",
    coverage_defect: f64 => "coverage_defect [L^3]",
    ball_volume: f64 => "ball_volume [L^3]",
    weak_integral: f64 => "weak_integral [L^3]",
    max_sqrt_det_dev: f64 => "max_sqrt_det_dev [1]",
    chart_max: f64 => "chart_max [1]",
    chart_mean: f64 => "chart_mean [1]",
    chart_pairs: u64 => "chart_pairs [count]",
    bg_lambda: f64 => "bg_lambda [L^-2]",
    bg_max_increase: f64 => "bg_max_increase [1]",
    bg_monotone: bool => "bg_monotone [bool]",
    inj_min_ratio: f64 => "inj_min_ratio [1]",
    sup_hess: f64 => "sup_hess [L^-1]",
    hess_constant: f64 => "hess_constant [L^(-101/96)]",
    sup_defect: f64 => "sup_defect [1]",
    defect_constant: f64 => "defect_constant [L^(-1/192)]",
    decay_exponent: f64 => "decay_exponent [1]",
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn failed(member: &str, m_exact: Option<f64>, reason: &str) -> Self {
        SweepRow {
            member: member.to_string(),
            status: format!("failed: {}", reason.replace(['\n', '\r'], " ")),
            m_exact,
            ..SweepRow::default()
        }
    }
}

pub fn write_rows<W: std::io::Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADERS)?;
    for r in rows {
        w.write_record(r.cells())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADERS {
        return Err(Error::Format("CSV header does not match the sweep schema".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let cells: Vec<&str> = rec.iter().collect();
        rows.push(SweepRow::from_cells(&cells)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip_through_csv() {
        let rows = vec![
            SweepRow {
                member: "a".into(),
                status: "ok".into(),
                m_exact: Some(0.2),
                seed_ok: Some(true),
                mask_nodes: Some(12),
                ..SweepRow::default()
            },
            SweepRow::failed("b, with comma", Some(0.1), "cg stalled\nbadly"),
        ];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let back = read_rows(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert!(!back[1].is_ok());
    }

    #[test]
    fn every_numeric_header_has_a_unit() {
        assert!(HEADERS[2..].iter().all(|h| h.ends_with(']') && h.contains(" [")));
    }
}
