//! CSV artifacts.
//!
//! Numbers are written with 12 significant digits in `%g` style so outputs
//! are byte-stable across runs. Trajectories use the header `t,x_1,…,x_d`
//! with time in process units.

use std::io::{Read, Write};

use crate::dde::InitialHistory;
use crate::simplex::SimplexVector;
use crate::{Error, Result, Trajectory};

const SIG_DIGITS: i32 = 12;

/// `%.12g`-style formatting.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS).contains(&exp) {
        let decimals = (SIG_DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes a header and pre-formatted rows.
pub fn write_table<W: Write>(
    out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trajectory_header(dim: usize) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain((1..=dim).map(|i| format!("x_{i}")))
        .collect()
}

pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let header = trajectory_header(traj.dim());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..traj.len()).map(|i| {
        std::iter::once(format_number(traj.time(i)))
            .chain(traj.point(i).iter().map(|&v| format_number(v)))
            .collect()
    });
    write_table(out, &header, rows)
}

/// Parses a trajectory CSV (`t,x_1,…,x_d`) on a uniform grid.
pub fn read_trajectory<R: Read>(input: R) -> Result<Trajectory> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(csv_err)?.clone();
    let dim = header.len().saturating_sub(1);
    if dim == 0 || &header[0] != "t" {
        return Err(Error::Parse(
            "trajectory header must be t,x_1,...,x_d".into(),
        ));
    }
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("x_{}", i + 1) {
            return Err(Error::Parse(format!(
                "unexpected column '{name}', expected x_{}",
                i + 1
            )));
        }
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != dim + 1 {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                line + 1,
                record.len(),
                dim + 1
            )));
        }
        let mut nums = record.iter().map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("row {}: invalid number '{f}'", line + 1)))
        });
        times.push(nums.next().expect("non-empty record")?);
        for v in nums {
            values.push(v?);
        }
    }
    if times.is_empty() {
        return Err(Error::Parse("trajectory has no rows".into()));
    }
    let dt = if times.len() > 1 {
        times[1] - times[0]
    } else {
        1.0
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parse("trajectory times must increase".into()));
    }
    let origin_f = times[0] / dt;
    let origin = origin_f.round();
    if (origin_f - origin).abs() > 1e-6 || origin.abs() > 1e15 {
        return Err(Error::Parse(format!(
            "start time {} is not a multiple of the step {dt}",
            times[0]
        )));
    }
    let origin = origin as i64;
    let mut traj = Trajectory::new(origin, dt, dim);
    for (i, t) in times.iter().enumerate() {
        let expected = traj.time(i);
        if (t - expected).abs() > 1e-6 * dt.max(expected.abs() * 1e-6) + 1e-9 {
            return Err(Error::Parse(format!(
                "row {}: time {t} breaks uniform spacing {dt}",
                i + 1
            )));
        }
        traj.push(&values[i * dim..(i + 1) * dim]);
    }
    Ok(traj)
}

/// Tabulated initial function: a trajectory CSV ending at `t = 0` whose rows
/// all lie in the simplex.
pub fn read_initial_function<R: Read>(input: R) -> Result<InitialHistory> {
    let traj = read_trajectory(input)?;
    if traj.end_time().abs() > 1e-9 {
        return Err(Error::Parse(format!(
            "initial function must end at t=0, ends at {}",
            traj.end_time()
        )));
    }
    let points = traj
        .points()
        .map(|p| SimplexVector::new(p.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(InitialHistory::Tabulated {
        step: traj.dt(),
        points,
    })
}
