//! CSV readers and writers for life, degradation, spectral and moisture data.
//!
//! Condition columns use unit-suffixed headers (`temp_C`, `rh_frac`, ...).
//! Floats are written in shortest round-trip form.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::condition::Condition;
use crate::degradation::DegradationSample;
use crate::error::{Error, Result};
use crate::fitml::{LifeRecord, Status};
use crate::photodeg::{MoistureTable, Table};

fn parse_f64(s: &str, what: &str, row: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Data(format!("row {row}: `{s}` is not a number in column `{what}`")))
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Data(format!("missing required column `{name}`")))
}

fn condition_columns(headers: &csv::StringRecord, reserved: &[&str]) -> Vec<(usize, String)> {
    headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !reserved.contains(&h.trim()))
        .map(|(i, h)| (i, h.trim().to_string()))
        .collect()
}

fn condition_from(row: &csv::StringRecord, cols: &[(usize, String)], line: usize) -> Result<Condition> {
    let mut c = Condition::new();
    for (i, h) in cols {
        let v = row.get(*i).ok_or_else(|| Error::Data(format!("row {line}: missing `{h}`")))?;
        c.set_header(h, parse_f64(v, h, line)?);
    }
    Ok(c)
}

/// Reads `time,status,<condition columns>`.
pub fn read_life_csv<R: Read>(reader: R) -> Result<Vec<LifeRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let ti = column(&headers, "time")?;
    let si = column(&headers, "status")?;
    let cols = condition_columns(&headers, &["time", "status"]);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let time = parse_f64(row.get(ti).unwrap_or(""), "time", line)?;
        let status = Status::parse(row.get(si).unwrap_or(""))?;
        let record = LifeRecord::new(time, status, condition_from(&row, &cols, line)?)
            .map_err(|e| Error::Data(format!("row {line}: {e}")))?;
        out.push(record);
    }
    if out.is_empty() {
        return Err(Error::Data("life-data file has no records".into()));
    }
    Ok(out)
}

fn all_headers<'a>(conditions: impl Iterator<Item = &'a Condition>) -> Vec<String> {
    let mut set = BTreeSet::new();
    for c in conditions {
        set.extend(c.headers());
    }
    set.into_iter().collect()
}

fn value_for(c: &Condition, header: &str) -> String {
    c.header_values()
        .into_iter()
        .find(|(h, _)| h == header)
        .map(|(_, v)| v.to_string())
        .unwrap_or_default()
}

pub fn write_life_csv<W: Write>(records: &[LifeRecord], writer: W) -> Result<()> {
    let headers = all_headers(records.iter().map(|r| &r.condition));
    let mut w = csv::Writer::from_writer(writer);
    let mut head = vec!["time".to_string(), "status".to_string()];
    head.extend(headers.iter().cloned());
    w.write_record(&head)?;
    for r in records {
        let mut row = vec![r.time.to_string(), r.status.as_str().to_string()];
        row.extend(headers.iter().map(|h| value_for(&r.condition, h)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn life_csv_string(records: &[LifeRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_life_csv(records, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))
}

/// Reads `unit_id,time,response,<condition columns>`, grouped by unit in
/// order of first appearance.
pub fn read_degradation_csv<R: Read>(reader: R) -> Result<Vec<DegradationSample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let ui = column(&headers, "unit_id")?;
    let ti = column(&headers, "time")?;
    let yi = column(&headers, "response")?;
    let cols = condition_columns(&headers, &["unit_id", "time", "response"]);
    let mut units: Vec<(String, Vec<(f64, f64)>, Condition)> = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let id = row.get(ui).unwrap_or("").to_string();
        let t = parse_f64(row.get(ti).unwrap_or(""), "time", line)?;
        let y = parse_f64(row.get(yi).unwrap_or(""), "response", line)?;
        let c = condition_from(&row, &cols, line)?;
        match units.iter_mut().find(|(u, _, _)| *u == id) {
            Some((_, pts, cond)) => {
                if *cond != c {
                    return Err(Error::Data(format!("row {line}: conditions change within unit `{id}`")));
                }
                pts.push((t, y));
            }
            None => units.push((id, vec![(t, y)], c)),
        }
    }
    if units.is_empty() {
        return Err(Error::Data("degradation file has no rows".into()));
    }
    units.into_iter().map(|(id, pts, c)| DegradationSample::new(id, pts, c)).collect()
}

pub fn write_degradation_csv<W: Write>(samples: &[DegradationSample], writer: W) -> Result<()> {
    let headers = all_headers(samples.iter().map(|s| &s.condition));
    let mut w = csv::Writer::from_writer(writer);
    let mut head = vec!["unit_id".to_string(), "time".to_string(), "response".to_string()];
    head.extend(headers.iter().cloned());
    w.write_record(&head)?;
    for s in samples {
        let cond: Vec<String> = headers.iter().map(|h| value_for(&s.condition, h)).collect();
        for (t, y) in s.times.iter().zip(&s.responses) {
            let mut row = vec![s.unit_id.clone(), t.to_string(), y.to_string()];
            row.extend(cond.iter().cloned());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Which quantity a spectral file tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralColumn {
    Irradiance,
    Absorbance,
}

/// Reads `wavelength_nm` plus one of `irradiance` or `absorbance`.
pub fn read_spectral_csv<R: Read>(reader: R) -> Result<(SpectralColumn, Table)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let wi = column(&headers, "wavelength_nm")?;
    let (kind, vi) = match (column(&headers, "irradiance"), column(&headers, "absorbance")) {
        (Ok(i), Err(_)) => (SpectralColumn::Irradiance, i),
        (Err(_), Ok(i)) => (SpectralColumn::Absorbance, i),
        _ => return Err(Error::Data("spectral file needs exactly one of `irradiance` or `absorbance`".into())),
    };
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        x.push(parse_f64(row.get(wi).unwrap_or(""), "wavelength_nm", line)?);
        let v = parse_f64(row.get(vi).unwrap_or(""), &headers[vi], line)?;
        if v < 0.0 {
            return Err(Error::Data(format!("row {line}: negative {} {v}", &headers[vi])));
        }
        y.push(v);
    }
    Ok((kind, Table::new(x, y)?))
}

/// Reads `rh,moisture_content` with RH as a proportion.
pub fn read_mc_csv<R: Read>(reader: R) -> Result<MoistureTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let ri = column(&headers, "rh")?;
    let mi = column(&headers, "moisture_content")?;
    let (mut rh, mut mc) = (Vec::new(), Vec::new());
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        rh.push(parse_f64(row.get(ri).unwrap_or(""), "rh", i + 2)?);
        mc.push(parse_f64(row.get(mi).unwrap_or(""), "moisture_content", i + 2)?);
    }
    MoistureTable::new(rh, mc)
}
