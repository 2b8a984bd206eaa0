// Statistics on the embedded published tables: t-tests, a one-way ANOVA
// and hit-minus-false-alarm detectability.
//
// ```text
// cargo run --example published_stats
// ```

use somqe::stats::tables::{CONFUSION, TABLE1, TABLE2, TABLE7};
use somqe::stats::{detectability, one_way_anova, published_table, two_sample_t, TableId};

pub fn run_example() -> somqe::Result<()> {
    let t1 = |k: usize| TABLE1.iter().map(|r| r.qe[k].value).collect::<Vec<_>>();
    println!("Table 1, second column vs first: {}", two_sample_t(&t1(1), &t1(0), true)?);

    let t2 = |k: usize| TABLE2.iter().map(|r| r.qe[k].value).collect::<Vec<_>>();
    println!("Table 2, one lesion vs original:  {}", two_sample_t(&t2(1), &t2(0), true)?);
    println!("Table 2, two lesions vs original: {}", two_sample_t(&t2(2), &t2(0), true)?);
    println!("Table 2, all three columns:       {}", one_way_anova(&[t2(0), t2(1), t2(2)])?);

    println!("\nsame/different task, CP - FP:");
    for row in TABLE7.iter() {
        if let (Some((cp, fp)), Some((cp2, fp2))) = (row.five_seconds, row.observer_controlled) {
            let a = detectability(cp.value, fp.value)?;
            let b = detectability(cp2.value, fp2.value)?;
            println!("  {:>4}  5 s: {a:+.1}  observer-controlled: {b:+.1}", row.label);
        }
    }
    for pair in CONFUSION.iter() {
        let c = pair.five_seconds;
        println!("  {:>3}% confusion (5 s): CN {} FN {} FP {} CP {}", pair.lesion_percent, c.cn, c.fn_, c.fp, c.cp);
    }

    println!("\n{}", published_table(TableId::T7).to_csv());
    Ok(())
}

fn main() -> somqe::Result<()> {
    run_example()
}
