//! Mesh- and time-refinement studies against the manufactured solution, and
//! the CSV format they are written in.
//!
//! CSV layout: header `m,h,tau,r,lambda,l2_error,rate`, floats with 17
//! significant digits, `rate` left empty on the first row of each refinement
//! chain, LF line endings.

use std::io::{Read, Write};

use crate::assembly::l2_error;
use crate::coeff::DiffusionParams;
use crate::error::{Error, Result};
use crate::felib::{build_space, quadrature_rule, FeField};
use crate::mesh::build_mesh;
use crate::mms::{ManufacturedForcing, ManufacturedProblem};
use crate::stepper::{run, SolverSettings, StepperConfig, Trajectory};

pub const CSV_HEADER: [&str; 7] = ["m", "h", "tau", "r", "lambda", "l2_error", "rate"];

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub m: usize,
    pub h: f64,
    pub tau: f64,
    pub r: usize,
    pub lambda: f64,
    pub l2_error: f64,
    /// `log2(previous error / this error)` along the refinement chain.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateAxis {
    /// Consecutive rows double `m`.
    Mesh,
    /// Consecutive rows halve `tau`.
    Time,
}

/// Quadrature degree for assembly: `2r + 2`.
pub fn assembly_degree(r: usize) -> usize {
    2 * r + 2
}

/// Quadrature degree for error norms: `2r + 4`.
pub fn error_degree(r: usize) -> usize {
    2 * r + 4
}

/// One manufactured-solution run and its final-time L2 error.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub record: StudyRecord,
    pub trajectory: Trajectory,
}

impl CaseResult {
    pub fn final_field(&self) -> &FeField {
        self.trajectory.final_field()
    }
}

pub fn solve_case(m: usize, r: usize, lambda: f64, tau: f64, t_end: f64) -> Result<CaseResult> {
    solve_case_with(m, r, lambda, tau, t_end, SolverSettings::default())
}

/// [`solve_case`] with explicit CG settings.
pub fn solve_case_with(
    m: usize,
    r: usize,
    lambda: f64,
    tau: f64,
    t_end: f64,
    solver: SolverSettings,
) -> Result<CaseResult> {
    let params = DiffusionParams::new(lambda)?;
    let problem = ManufacturedProblem::new(params);
    let mesh = build_mesh(m)?;
    let h = mesh.h();
    let space = build_space(mesh, r)?;
    let rule = quadrature_rule(assembly_degree(r))?;
    let mut config = StepperConfig::new(tau, t_end, params)?;
    config.solver = solver;
    let trajectory = run(
        &space,
        &rule,
        &config,
        |x, y| problem.u0(x, y),
        ManufacturedForcing::new(params),
    )?;
    let t_final = trajectory.final_time();
    let err = l2_error(
        trajectory.final_field(),
        |x, y| problem.u(x, y, t_final),
        &quadrature_rule(error_degree(r))?,
    );
    Ok(CaseResult {
        record: StudyRecord {
            m,
            h,
            tau,
            r,
            lambda,
            l2_error: err,
            rate: None,
        },
        trajectory,
    })
}

/// Fills `rate` for a chain refined by factor 2 along `axis`.
pub fn compute_rates(records: &[StudyRecord], axis: RateAxis) -> Result<Vec<StudyRecord>> {
    let mut out = records.to_vec();
    for k in 1..out.len() {
        let (prev, this) = (&records[k - 1], &records[k]);
        let dyadic = match axis {
            RateAxis::Mesh => this.m == 2 * prev.m,
            RateAxis::Time => prev.tau == 2.0 * this.tau,
        };
        if !dyadic {
            return Err(Error::InvalidArgument(format!(
                "rows {} and {} are not a factor-2 refinement along the {:?} axis",
                k - 1,
                k,
                axis
            )));
        }
        out[k].rate = Some((prev.l2_error / this.l2_error).log2());
    }
    if let Some(first) = out.first_mut() {
        first.rate = None;
    }
    Ok(out)
}

/// The finest-pair rate of a refinement chain.
pub fn headline_rate(records: &[StudyRecord]) -> Option<f64> {
    records.last().and_then(|r| r.rate)
}

fn check_m_list(m_list: &[usize]) -> Result<()> {
    if m_list.is_empty() {
        return Err(Error::InvalidArgument("empty mesh list".into()));
    }
    if m_list.contains(&0) || m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "mesh list must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Error at `t_end` for each `m`, with rates between consecutive meshes.
pub fn spatial_study(
    r: usize,
    lambda: f64,
    tau: f64,
    m_list: &[usize],
    t_end: f64,
) -> Result<Vec<StudyRecord>> {
    check_m_list(m_list)?;
    let records = m_list
        .iter()
        .map(|&m| solve_case(m, r, lambda, tau, t_end).map(|c| c.record))
        .collect::<Result<Vec<_>>>()?;
    rates_if_dyadic(records, RateAxis::Mesh)
}

/// Full `(tau, m)` grid, ordered by `tau_list` then `m_list`. Rates run along
/// the mesh axis within each fixed-`tau` chain.
pub fn temporal_study(
    r: usize,
    lambda: f64,
    tau_list: &[f64],
    m_list: &[usize],
    t_end: f64,
) -> Result<Vec<StudyRecord>> {
    check_m_list(m_list)?;
    if tau_list.is_empty() {
        return Err(Error::InvalidArgument("empty time-step list".into()));
    }
    let mut out = Vec::with_capacity(tau_list.len() * m_list.len());
    for &tau in tau_list {
        let chain = m_list
            .iter()
            .map(|&m| solve_case(m, r, lambda, tau, t_end).map(|c| c.record))
            .collect::<Result<Vec<_>>>()?;
        out.extend(rates_if_dyadic(chain, RateAxis::Mesh)?);
    }
    Ok(out)
}

fn rates_if_dyadic(records: Vec<StudyRecord>, axis: RateAxis) -> Result<Vec<StudyRecord>> {
    match compute_rates(&records, axis) {
        Ok(r) => Ok(r),
        // non-dyadic lists still produce rows, just without rates
        Err(Error::InvalidArgument(_)) => Ok(records),
        Err(e) => Err(e),
    }
}

/// Least-squares slope of `log(error)` against `log(x)`.
pub fn fitted_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(records: &[StudyRecord], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for rec in records {
        wtr.write_record([
            rec.m.to_string(),
            fmt_float(rec.h),
            fmt_float(rec.tau),
            rec.r.to_string(),
            fmt_float(rec.lambda),
            fmt_float(rec.l2_error),
            rec.rate.map(fmt_float).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(row: &csv::StringRecord, k: usize) -> Result<T> {
    let raw = row.get(k).unwrap_or("");
    raw.parse().map_err(|_| {
        Error::InvalidArgument(format!("bad value {raw:?} in column {}", CSV_HEADER[k]))
    })
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<StudyRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidArgument(format!(
            "unexpected CSV header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    rdr.records()
        .map(|row| {
            let row = row?;
            let rate = match row.get(6).unwrap_or("") {
                "" => None,
                _ => Some(parse_field(&row, 6)?),
            };
            Ok(StudyRecord {
                m: parse_field(&row, 0)?,
                h: parse_field(&row, 1)?,
                tau: parse_field(&row, 2)?,
                r: parse_field(&row, 3)?,
                lambda: parse_field(&row, 4)?,
                l2_error: parse_field(&row, 5)?,
                rate,
            })
        })
        .collect()
}
