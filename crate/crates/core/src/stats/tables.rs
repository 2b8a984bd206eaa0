//! Published result tables, embedded verbatim.
//!
//! Values keep the exact printed text alongside the parsed number, so dumps
//! reproduce trailing zeros. Known inconsistencies between tables (for
//! example the first column of Table 3 versus Table 1) are kept as printed.

use std::fmt;
use std::str::FromStr;

use super::{ConfusionTable, StatsError};

/// A number as printed, with its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Printed {
    pub text: &'static str,
    pub value: f64,
}

macro_rules! p {
    ($v:literal) => {
        Printed { text: stringify!($v), value: $v }
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QeRow<const N: usize> {
    pub image: &'static str,
    pub qe: [Printed; N],
}

/// Tables 4–6: one confusion table per exposure condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionPair {
    pub lesion_percent: u32,
    pub five_seconds: ConfusionTable,
    pub observer_controlled: ConfusionTable,
}

/// Table 7 row. Detection entries are `(cp, fp)` and absent for the
/// unmodified image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotQeRow {
    pub label: &'static str,
    pub lesion_percent: u32,
    pub qe: Printed,
    pub five_seconds: Option<(Printed, Printed)>,
    pub observer_controlled: Option<(Printed, Printed)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
}

impl TableId {
    pub const ALL: [TableId; 7] =
        [TableId::T1, TableId::T2, TableId::T3, TableId::T4, TableId::T5, TableId::T6, TableId::T7];
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", *self as u8 + 1)
    }
}

impl FromStr for TableId {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, StatsError> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(TableId::T1),
            "T2" => Ok(TableId::T2),
            "T3" => Ok(TableId::T3),
            "T4" => Ok(TableId::T4),
            "T5" => Ok(TableId::T5),
            "T6" => Ok(TableId::T6),
            "T7" => Ok(TableId::T7),
            _ => Err(StatsError::UnknownTable(s.to_string())),
        }
    }
}

/// Uniform row/column view used for dumping any table.
#[derive(Debug, Clone, PartialEq)]
pub struct PublishedTable {
    pub id: TableId,
    pub title: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<(String, Vec<Option<Printed>>)>,
}

impl PublishedTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|(_, v)| v[j].map(|p| p.value)).collect())
    }

    pub fn row(&self, label: &str) -> Option<Vec<Option<f64>>> {
        self.rows
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.iter().map(|c| c.map(|p| p.value)).collect())
    }

    /// CSV with a leading `row` column; blank cells for absent values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (label, vals) in &self.rows {
            out.push_str(label);
            for v in vals {
                out.push(',');
                if let Some(p) = v {
                    out.push_str(p.text);
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn published_table(id: TableId) -> PublishedTable {
    let some = |v: &[Printed]| v.iter().copied().map(Some).collect::<Vec<_>>();
    match id {
        TableId::T1 => PublishedTable {
            id,
            title: "QE of two series from consecutive clinical visits",
            columns: vec!["qe_1st", "qe_2nd"],
            rows: TABLE1.iter().map(|r| (r.image.to_string(), some(&r.qe))).collect(),
        },
        TableId::T2 => PublishedTable {
            id,
            title: "QE of original images and images with one and two synthetic lesions",
            columns: vec!["original", "one_lesion", "two_lesions"],
            rows: TABLE2.iter().map(|r| (r.image.to_string(), some(&r.qe))).collect(),
        },
        TableId::T3 => PublishedTable {
            id,
            title: "QE of two clinical series before and after Poisson noise",
            columns: vec!["clinical_1st", "noised_1st", "clinical_2nd", "noised_2nd"],
            rows: TABLE3.iter().enumerate().map(|(i, r)| (format!("{}", i + 1), some(r))).collect(),
        },
        TableId::T4 | TableId::T5 | TableId::T6 => {
            let pair = &CONFUSION[id as usize - TableId::T4 as usize];
            let rates = |t: &ConfusionTable| {
                [t.cn, t.fn_, t.fp, t.cp].into_iter().map(|v| Some(Printed { text: rate_text(v), value: v })).collect()
            };
            PublishedTable {
                id,
                title: match id {
                    TableId::T4 => "Conditional response rates, 5% dot size increase",
                    TableId::T5 => "Conditional response rates, 10% dot size increase",
                    _ => "Conditional response rates, 30% dot size increase",
                },
                columns: vec!["cn", "fn", "fp", "cp"],
                rows: vec![
                    ("five_seconds".to_string(), rates(&pair.five_seconds)),
                    ("observer_controlled".to_string(), rates(&pair.observer_controlled)),
                ],
            }
        }
        TableId::T7 => PublishedTable {
            id,
            title: "QE of random-dot images and human detection rates",
            columns: vec!["qe", "cp_five_seconds", "fp_five_seconds", "cp_observer", "fp_observer"],
            rows: TABLE7
                .iter()
                .map(|r| {
                    let (a, b) = match (r.five_seconds, r.observer_controlled) {
                        (Some(a), Some(b)) => ([Some(a.0), Some(a.1)], [Some(b.0), Some(b.1)]),
                        _ => ([None, None], [None, None]),
                    };
                    (r.label.to_string(), vec![Some(r.qe), a[0], a[1], b[0], b[1]])
                })
                .collect(),
        },
    }
}

// Rates in Tables 4-6 are all printed with one decimal.
fn rate_text(v: f64) -> &'static str {
    RATE_TEXT
        .iter()
        .find(|p| p.value == v)
        .map(|p| p.text)
        .unwrap_or("?")
}

static RATE_TEXT: [Printed; 20] = [
    p!(88.7), p!(91.4), p!(11.3), p!(8.6), p!(86.5), p!(13.5),
    p!(87.5), p!(82.0), p!(12.5), p!(18.0), p!(87.0), p!(77.4),
    p!(13.0), p!(22.6), p!(85.5), p!(66.4), p!(14.5), p!(33.6),
    p!(60.9), p!(39.1),
];

const fn ct(cn: f64, fn_: f64, fp: f64, cp: f64) -> ConfusionTable {
    ConfusionTable { cn, fn_, fp, cp }
}

pub static CONFUSION: [ConfusionPair; 3] = [
    ConfusionPair {
        lesion_percent: 5,
        five_seconds: ct(88.7, 91.4, 11.3, 8.6),
        observer_controlled: ct(86.5, 91.4, 13.5, 8.6),
    },
    ConfusionPair {
        lesion_percent: 10,
        five_seconds: ct(87.5, 82.0, 12.5, 18.0),
        observer_controlled: ct(87.0, 77.4, 13.0, 22.6),
    },
    ConfusionPair {
        lesion_percent: 30,
        five_seconds: ct(85.5, 66.4, 14.5, 33.6),
        observer_controlled: ct(86.5, 60.9, 13.5, 39.1),
    },
];

pub static TABLE7: [DotQeRow; 4] = [
    DotQeRow { label: "0%", lesion_percent: 0, qe: p!(750.3749), five_seconds: None, observer_controlled: None },
    DotQeRow {
        label: "5%",
        lesion_percent: 5,
        qe: p!(750.4555),
        five_seconds: Some((p!(8.6), p!(13.0))),
        observer_controlled: Some((p!(8.6), p!(13.0))),
    },
    DotQeRow {
        label: "10%",
        lesion_percent: 10,
        qe: p!(751.7827),
        five_seconds: Some((p!(18.0), p!(13.0))),
        observer_controlled: Some((p!(22.6), p!(13.0))),
    },
    DotQeRow {
        label: "30%",
        lesion_percent: 30,
        qe: p!(754.4679),
        five_seconds: Some((p!(33.6), p!(13.0))),
        observer_controlled: Some((p!(39.1), p!(13.0))),
    },
];

pub static TABLE1: [QeRow<2>; 20] = [
    QeRow { image: "dcm 0001", qe: [p!(5544.68), p!(8078.32)] },
    QeRow { image: "dcm 0002", qe: [p!(5724.76), p!(7410.38)] },
    QeRow { image: "dcm 0003", qe: [p!(7096.77), p!(10381.9)] },
    QeRow { image: "dcm 0004", qe: [p!(6101.77), p!(6478.89)] },
    QeRow { image: "dcm 0005", qe: [p!(6174.82), p!(8193.23)] },
    QeRow { image: "dcm 0006", qe: [p!(6507.84), p!(9757.81)] },
    QeRow { image: "dcm 0007", qe: [p!(7484.48), p!(10326.94)] },
    QeRow { image: "dcm 0008", qe: [p!(6661.52), p!(6985.06)] },
    QeRow { image: "dcm 0009", qe: [p!(5992.41), p!(5992.17)] },
    QeRow { image: "dcm 0010", qe: [p!(6417.38), p!(6972.39)] },
    QeRow { image: "dcm 0011", qe: [p!(6001.4), p!(5982.37)] },
    QeRow { image: "dcm 0012", qe: [p!(7240.49), p!(6198.58)] },
    QeRow { image: "dcm 0013", qe: [p!(6201.82), p!(9034.32)] },
    QeRow { image: "dcm 0014", qe: [p!(5966.33), p!(5842.39)] },
    QeRow { image: "dcm 0015", qe: [p!(6024.03), p!(7830.31)] },
    QeRow { image: "dcm 0016", qe: [p!(5714.79), p!(6135.71)] },
    QeRow { image: "dcm 0017", qe: [p!(5557.94), p!(5924.59)] },
    QeRow { image: "dcm 0018", qe: [p!(7182.26), p!(9330.04)] },
    QeRow { image: "dcm 0019", qe: [p!(5450.78), p!(7041.98)] },
    QeRow { image: "dcm 0020", qe: [p!(6023.86), p!(5957.58)] },
];

pub static TABLE2: [QeRow<3>; 20] = [
    QeRow { image: "dcm 0001", qe: [p!(1138.9128), p!(1200.9820), p!(1234.8677)] },
    QeRow { image: "dcm 0002", qe: [p!(1213.9390), p!(1273.5073), p!(1305.3644)] },
    QeRow { image: "dcm 0003", qe: [p!(912.0454), p!(985.4192), p!(1032.4355)] },
    QeRow { image: "dcm 0004", qe: [p!(965.0731), p!(1024.0330), p!(1062.7660)] },
    QeRow { image: "dcm 0005", qe: [p!(848.7616), p!(908.4071), p!(948.0895)] },
    QeRow { image: "dcm 0006", qe: [p!(858.5535), p!(919.0936), p!(960.0879)] },
    QeRow { image: "dcm 0007", qe: [p!(857.2325), p!(927.1354), p!(969.5507)] },
    QeRow { image: "dcm 0008", qe: [p!(734.0570), p!(808.2034), p!(855.7769)] },
    QeRow { image: "dcm 0009", qe: [p!(676.9681), p!(751.9430), p!(802.0007)] },
    QeRow { image: "dcm 0010", qe: [p!(765.6439), p!(837.8734), p!(881.9957)] },
    QeRow { image: "dcm 0011", qe: [p!(782.6192), p!(851.3009), p!(895.5168)] },
    QeRow { image: "dcm 0012", qe: [p!(876.5664), p!(935.8310), p!(974.4636)] },
    QeRow { image: "dcm 0013", qe: [p!(1000.3647), p!(1059.5208), p!(1095.0401)] },
    QeRow { image: "dcm 0014", qe: [p!(1003.1925), p!(1068.2832), p!(1104.3974)] },
    QeRow { image: "dcm 0015", qe: [p!(1026.7828), p!(1095.1051), p!(1131.4206)] },
    QeRow { image: "dcm 0016", qe: [p!(1067.1361), p!(1137.2907), p!(1172.9960)] },
    QeRow { image: "dcm 0017", qe: [p!(1194.5449), p!(1257.6472), p!(1290.4847)] },
    QeRow { image: "dcm 0018", qe: [p!(1176.3578), p!(1232.5629), p!(1267.2867)] },
    QeRow { image: "dcm 0019", qe: [p!(1098.3993), p!(1156.7749), p!(1191.4239)] },
    QeRow { image: "dcm 0020", qe: [p!(1109.3291), p!(1157.2493), p!(1181.3063)] },
];

pub static TABLE3: [[Printed; 4]; 20] = [
    [p!(5544.4807), p!(11086.7877), p!(8078.2439), p!(16157.1898)],
    [p!(7181.9884), p!(14364.0413), p!(9330.1503), p!(18660.5707)],
    [p!(5558.1511), p!(11117.9896), p!(5924.6644), p!(11850.9655)],
    [p!(5714.7921), p!(11429.2792), p!(6135.6891), p!(12273.3048)],
    [p!(5023.7532), p!(12048.4203), p!(7830.3322), p!(15663.1586)],
    [p!(5966.3444), p!(11932.9385), p!(5842.4854), p!(11684.4111)],
    [p!(5201.7292), p!(12405.2023), p!(9034.2843), p!(18067.9178)],
    [p!(7240.853), p!(14482.1577), p!(6198.6079), p!(12401.7001)],
    [p!(5001.4699), p!(12002.7776), p!(5982.453), p!(11965.1671)],
    [p!(5417.1673), p!(12836.4429), p!(5972.2216), p!(13943.6979)],
    [p!(5992.5), p!(11984.7077), p!(5992.1492), p!(11984.4634)],
    [p!(5661.4586), p!(13324.6943), p!(5985.1401), p!(13973.7904)],
    [p!(7484.6984), p!(14968.1884), p!(10327.1069), p!(20659.262)],
    [p!(5507.8144), p!(13017.8913), p!(9757.7571), p!(19514.2742)],
    [p!(5174.883), p!(12349.7042), p!(8193.1116), p!(16388.2526)],
    [p!(5101.946), p!(12203.2147), p!(5478.8401), p!(12960.4942)],
    [p!(7096.3922), p!(14191.5997), p!(10381.9172), p!(20764.6702)],
    [p!(5724.8007), p!(11450.6902), p!(7410.2646), p!(14823.074)],
    [p!(5450.6741), p!(10901.116), p!(7041.9858), p!(14083.6771)],
    [p!(5023.8499), p!(12049.4355), p!(5957.4332), p!(11916.3526)],
];
