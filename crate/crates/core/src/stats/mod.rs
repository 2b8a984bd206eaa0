//! Descriptive statistics, Student t, one-way ANOVA and same/different
//! response-rate arithmetic.

pub mod dist;
pub mod tables;

use std::fmt;
use std::io::{Read, Write};

use thiserror::Error;

use crate::som::CompensatedSum;
pub use tables::{published_table, PublishedTable, TableId};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no `{0:?}` trials in the response log")]
    MissingPairKind(PairKind),
    #[error("rate {0} outside [0, 100]")]
    RateOutOfRange(f64),
    #[error("unknown table `{0}` (expected T1..T7)")]
    UnknownTable(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad number `{value}` in column `{column}`")]
    BadNumber { column: String, value: String },
}

pub type Result<T> = std::result::Result<T, StatsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    TTest,
    Anova,
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatKind::TTest => "t_test",
            StatKind::Anova => "anova",
        })
    }
}

/// Test statistic with its degrees of freedom and p-value.
///
/// Two-sample t results carry `df1 = 1` and `df2` = error degrees of
/// freedom, mirroring the `t(1, 38)` notation; `t²` is then an `F(1, df2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatResult {
    pub kind: StatKind,
    pub statistic: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_value: f64,
}

impl StatResult {
    /// `F` equivalent: `t²` for t-tests, the statistic itself for ANOVA.
    pub fn f_equivalent(&self) -> f64 {
        match self.kind {
            StatKind::TTest => self.statistic * self.statistic,
            StatKind::Anova => self.statistic,
        }
    }

    pub const CSV_HEADER: &'static str = "kind,statistic,df1,df2,p";

    pub fn csv_row(&self) -> String {
        format!("{},{:.6},{},{},{:.6e}", self.kind, self.statistic, self.df1, self.df2, self.p_value)
    }
}

impl fmt::Display for StatResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StatKind::TTest => write!(
                f,
                "t({}, {}) = {:.4}; p = {:.6} (F = t² = {:.4})",
                self.df1,
                fmt_df(self.df2),
                self.statistic,
                self.p_value,
                self.f_equivalent()
            ),
            StatKind::Anova => {
                write!(f, "F({}, {}) = {:.4}; p = {:.6}", self.df1, fmt_df(self.df2), self.statistic, self.p_value)
            }
        }
    }
}

fn fmt_df(df: f64) -> String {
    if df.fract() == 0.0 {
        format!("{df}")
    } else {
        format!("{df:.2}")
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    let s: CompensatedSum = xs.iter().copied().collect();
    s.total() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let s: CompensatedSum = xs.iter().map(|x| (x - m) * (x - m)).collect();
    s.total() / (xs.len() - 1) as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

pub fn std_error(xs: &[f64]) -> f64 {
    std_dev(xs) / (xs.len() as f64).sqrt()
}

/// Two-sample t-test of `mean(a) - mean(b)`.
///
/// `pooled` selects Student's equal-variance test (df = |a| + |b| - 2);
/// otherwise Welch's test with Satterthwaite degrees of freedom.
pub fn two_sample_t(a: &[f64], b: &[f64], pooled: bool) -> Result<StatResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::InsufficientData("each group needs at least two values".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let diff = mean(a) - mean(b);
    let (va, vb) = (variance(a), variance(b));
    let (se, df) = if pooled {
        let df = na + nb - 2.0;
        let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
        ((sp2 * (1.0 / na + 1.0 / nb)).sqrt(), df)
    } else {
        let (qa, qb) = (va / na, vb / nb);
        let se2 = qa + qb;
        let df = if se2 > 0.0 {
            se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
        } else {
            na + nb - 2.0
        };
        (se2.sqrt(), df)
    };
    let t = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok(StatResult { kind: StatKind::TTest, statistic: t, df1: 1.0, df2: df, p_value: dist::student_t_two_sided(t, df) })
}

/// Classic between/within one-way ANOVA.
pub fn one_way_anova<G: AsRef<[f64]>>(groups: &[G]) -> Result<StatResult> {
    if groups.len() < 2 {
        return Err(StatsError::InsufficientData("ANOVA needs at least two groups".into()));
    }
    if groups.iter().any(|g| g.as_ref().len() < 2) {
        return Err(StatsError::InsufficientData("each group needs at least two values".into()));
    }
    let k = groups.len() as f64;
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let all: Vec<f64> = groups.iter().flat_map(|g| g.as_ref().iter().copied()).collect();
    let grand = mean(&all);
    let mut between = CompensatedSum::default();
    let mut within = CompensatedSum::default();
    for g in groups {
        let g = g.as_ref();
        let m = mean(g);
        between.add(g.len() as f64 * (m - grand) * (m - grand));
        for x in g {
            within.add((x - m) * (x - m));
        }
    }
    let (df1, df2) = (k - 1.0, n as f64 - k);
    let ms_between = between.total() / df1;
    let ms_within = within.total() / df2;
    let f = if ms_within > 0.0 {
        ms_between / ms_within
    } else if ms_between == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(StatResult { kind: StatKind::Anova, statistic: f, df1, df2, p_value: dist::f_survival(f, df1, df2) })
}

/// Hit rate corrected by guess rate: `cp - fp`, in percentage points.
/// Zero or negative means performance at or below guessing.
pub fn detectability(cp: f64, fp: f64) -> Result<f64> {
    for r in [cp, fp] {
        if !(0.0..=100.0).contains(&r) {
            return Err(StatsError::RateOutOfRange(r));
        }
    }
    Ok(cp - fp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Same,
    Different,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Same,
    Different,
}

/// Response rates (percent) in a same/different task.
///
/// `cn`/`fp` partition responses to identical pairs, `fn_`/`cp` responses to
/// different pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionTable {
    pub cn: f64,
    pub fn_: f64,
    pub fp: f64,
    pub cp: f64,
}

impl ConfusionTable {
    pub fn detectability(&self) -> f64 {
        self.cp - self.fp
    }
}

pub fn confusion_from_log(trials: &[(PairKind, Response)]) -> Result<ConfusionTable> {
    let mut counts = [[0usize; 2]; 2];
    for &(pair, resp) in trials {
        counts[pair as usize][resp as usize] += 1;
    }
    let same_total = counts[PairKind::Same as usize].iter().sum::<usize>();
    let diff_total = counts[PairKind::Different as usize].iter().sum::<usize>();
    if same_total == 0 {
        return Err(StatsError::MissingPairKind(PairKind::Same));
    }
    if diff_total == 0 {
        return Err(StatsError::MissingPairKind(PairKind::Different));
    }
    let pct = |n: usize, d: usize| 100.0 * n as f64 / d as f64;
    Ok(ConfusionTable {
        cn: pct(counts[0][0], same_total),
        fp: pct(counts[0][1], same_total),
        fn_: pct(counts[1][0], diff_total),
        cp: pct(counts[1][1], diff_total),
    })
}

/// Named groups read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Groups {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// One column per group with a header row. Blank cells are skipped, so
/// groups may have different lengths.
pub fn read_groups_csv<R: Read>(reader: R) -> Result<Groups> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut values = vec![Vec::new(); names.len()];
    for record in rdr.records() {
        let record = record?;
        for (j, cell) in record.iter().enumerate().take(names.len()) {
            if cell.is_empty() {
                continue;
            }
            let v = cell
                .parse()
                .map_err(|_| StatsError::BadNumber { column: names[j].clone(), value: cell.to_string() })?;
            values[j].push(v);
        }
    }
    Ok(Groups { names, values })
}

pub fn write_results_csv<W: Write>(mut w: W, results: &[StatResult]) -> std::io::Result<()> {
    writeln!(w, "{}", StatResult::CSV_HEADER)?;
    for r in results {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}
