//! File formats: CSV trajectories and tables, JSON reports, coordinate-format
//! matrices and plain vectors.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::Trajectory;
use crate::{Error, Result};

/// Full double precision, 17 significant digits; exact integers below
/// `2⁵³` are written plainly.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() || (x.fract() == 0.0 && x.abs() < 9_007_199_254_740_992.0) {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

/// Header row plus one row per record.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt17(x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// `t, h, <value columns>`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut header = vec!["t".to_string(), "h".to_string()];
    header.extend(traj.columns.iter().cloned());
    let rows: Vec<Vec<f64>> = (0..traj.len())
        .map(|i| {
            let mut r = vec![traj.times[i], traj.step_sizes[i]];
            r.extend_from_slice(&traj.values[i]);
            r
        })
        .collect();
    write_table(path, &header, &rows)
}

/// `t, rejects, <indicator>`: controller diagnostics per accepted step.
pub fn write_control_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let header = vec![
        "t".to_string(),
        "rejects".to_string(),
        traj.indicator_name.clone(),
    ];
    let rows: Vec<Vec<f64>> = (0..traj.len())
        .map(|i| vec![traj.times[i], traj.rejects[i] as f64, traj.indicator[i]])
        .collect();
    write_table(path, &header, &rows)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn data_lines(path: &Path) -> Result<impl Iterator<Item = (usize, String)>> {
    let file = File::open(path)
        .map_err(|e| Error::config(format!("cannot open {}: {e}", path.display())))?;
    let lines: Vec<(usize, String)> = BufReader::new(file)
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)))
        .collect::<std::io::Result<_>>()?;
    Ok(lines.into_iter().filter(|(_, l)| {
        let l = l.trim();
        !(l.is_empty() || l.starts_with('#') || l.starts_with('%'))
    }))
}

fn parse_number<T: std::str::FromStr>(path: &Path, line: usize, token: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::config(format!("{}:{line}: cannot parse '{token}'", path.display())))
}

/// Square matrix from `row col value` lines with 1-based indices; repeated
/// entries are summed. The size is the largest index unless given.
pub fn read_coordinate_matrix(path: &Path, size: Option<usize>) -> Result<DMatrix<f64>> {
    let mut entries = Vec::new();
    for (line, text) in data_lines(path)? {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(Error::config(format!(
                "{}:{line}: expected 'row col value'",
                path.display()
            )));
        }
        let r: usize = parse_number(path, line, tokens[0])?;
        let c: usize = parse_number(path, line, tokens[1])?;
        let v: f64 = parse_number(path, line, tokens[2])?;
        if r == 0 || c == 0 {
            return Err(Error::config(format!(
                "{}:{line}: indices are 1-based",
                path.display()
            )));
        }
        entries.push((r - 1, c - 1, v));
    }
    let largest = entries
        .iter()
        .map(|&(r, c, _)| r.max(c) + 1)
        .max()
        .unwrap_or(0);
    let n = size.unwrap_or(largest);
    if largest > n {
        return Err(Error::config(format!(
            "{}: index {largest} exceeds size {n}",
            path.display()
        )));
    }
    let mut m = DMatrix::zeros(n, n);
    for (r, c, v) in entries {
        m[(r, c)] += v;
    }
    Ok(m)
}

/// One value per line.
pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let values = data_lines(path)?
        .map(|(line, text)| parse_number(path, line, text.trim()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DVector::from_vec(values))
}

pub fn write_coordinate_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if m[(r, c)] != 0.0 {
                writeln!(w, "{} {} {}", r + 1, c + 1, fmt17(m[(r, c)]))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_vector(path: &Path, v: &DVector<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for x in v.iter() {
        writeln!(w, "{}", fmt17(*x))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            std::f64::consts::PI,
        ] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
        assert_eq!(fmt17(0.0), "0");
        assert_eq!(fmt17(-1215.0), "-1215");
        assert_eq!(fmt17(1e300).parse::<f64>().unwrap(), 1e300);
    }

    #[test]
    fn matrix_and_vector_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 0.1]);
        let p = dir.path().join("a.txt");
        write_coordinate_matrix(&p, &m).unwrap();
        assert_eq!(read_coordinate_matrix(&p, None).unwrap(), m);
        let v = DVector::from_vec(vec![1.0, -1e-17, 3.25]);
        let q = dir.path().join("b.txt");
        write_vector(&q, &v).unwrap();
        assert_eq!(read_vector(&q).unwrap(), v);
    }

    #[test]
    fn coordinate_format_details() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        std::fs::write(&p, "% comment\n1 1 1.5\n\n2 1 2\n1 1 0.5\n").unwrap();
        let m = read_coordinate_matrix(&p, Some(3)).unwrap();
        assert_eq!(m.shape(), (3, 3));
        assert_eq!((m[(0, 0)], m[(1, 0)]), (2.0, 2.0));
        std::fs::write(&p, "0 1 1\n").unwrap();
        assert!(matches!(
            read_coordinate_matrix(&p, None),
            Err(Error::Config(_))
        ));
        std::fs::write(&p, "1 x 1\n").unwrap();
        assert!(matches!(
            read_coordinate_matrix(&p, None),
            Err(Error::Config(_))
        ));
        std::fs::write(&p, "4 1 1\n").unwrap();
        assert!(matches!(
            read_coordinate_matrix(&p, Some(3)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn trajectory_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Trajectory::new("abel", &["Re(z)", "Im(z)", "|z|"], "gamma2");
        t.push(0.0, vec![1.0, 0.0, 1.0], 0, 0.0);
        t.push(0.5, vec![0.6, 0.8, 1.0], 2, 3.0);
        let p = dir.path().join("t.csv");
        write_trajectory_csv(&p, &t).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,h,Re(z),Im(z),|z|");
        assert_eq!(lines.len(), 3);
        let last: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(last, vec![0.5, 0.5, 0.6, 0.8, 1.0]);
        let c = dir.path().join("c.csv");
        write_control_csv(&c, &t).unwrap();
        assert!(std::fs::read_to_string(&c)
            .unwrap()
            .starts_with("t,rejects,gamma2\n"));
    }
}
