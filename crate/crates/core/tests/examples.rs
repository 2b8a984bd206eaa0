macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(qe_basics, "qe_basics.rs");
example!(map_persistence, "map_persistence.rs");
example!(published_stats, "published_stats.rs");
example!(series_plot, "series_plot.rs");
example!(poisson_noise, "poisson_noise.rs");

#[test]
fn qe_basics_runs() {
    qe_basics::run_example().expect("qe_basics example should run");
}

#[test]
fn map_persistence_runs() {
    map_persistence::run_example().expect("map_persistence example should run");
}

#[test]
fn published_stats_runs() {
    published_stats::run_example().expect("published_stats example should run");
}

#[test]
fn series_plot_runs() {
    series_plot::run_example().expect("series_plot example should run");
}

#[test]
fn poisson_noise_runs() {
    poisson_noise::run_example().expect("poisson_noise example should run");
}
