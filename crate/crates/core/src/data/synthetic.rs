//! Synthetic operator records with a planted score.
//!
//! Every user carries a latent creditworthiness `z`. Each feature subset sees
//! its own noisy view of `z`, so subsets are correlated but not redundant.
//! The score itself depends on the recorded features only.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::{canonical_schema, Dataset};
use crate::rng;

/// Generator settings. The defaults define the standard fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDesign {
    /// Noise scale of each subset's view of the latent factor, in the order
    /// consumer, location, app, other.
    pub view_noise: [f64; 4],
    pub net_age_mean: f64,
    pub net_age_loading: f64,
    /// Log-scale loading of the monetary amounts on the consumer view.
    pub amount_loading: f64,
    /// Log-rate loading of the shopping count on the location view.
    pub shopping_loading: f64,
    /// Log-rate dispersion of app counts for a user at the latent mean.
    pub app_dispersion: f64,
    /// How fast app dispersion shrinks as the app view grows.
    pub app_regularity: f64,
}

impl Default for SyntheticDesign {
    fn default() -> Self {
        SyntheticDesign {
            view_noise: [0.6, 2.0, 0.6, 0.7],
            net_age_mean: 70.0,
            net_age_loading: 25.0,
            amount_loading: 1.1,
            shopping_loading: 0.8,
            app_dispersion: 1.0,
            app_regularity: 0.8,
        }
    }
}

pub const SCORE_MIN: f64 = 350.0;
pub const SCORE_MAX: f64 = 720.0;
pub const NOISE_SD: f64 = 15.0;

/// `n` records from the standard fixture.
pub fn generate_synthetic(n: usize, seed: u64) -> Dataset {
    generate_with(&SyntheticDesign::default(), n, seed)
}

/// `n` records with their noise-free planted score.
pub fn generate_with_signal(n: usize, seed: u64) -> (Dataset, Vec<f64>) {
    let d = generate_synthetic(n, seed);
    let s = planted_signal(&d);
    (d, s)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn flag(r: &mut ChaCha8Rng, p: f64) -> f64 {
    f64::from(u8::from(r.random::<f64>() < p))
}

fn poisson(r: &mut ChaCha8Rng, mean: f64) -> f64 {
    Poisson::new(mean.clamp(1e-6, 1e6)).expect("positive rate").sample(r)
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn generate_with(design: &SyntheticDesign, n: usize, seed: u64) -> Dataset {
    let schema = canonical_schema();
    let mut r = rng::stream(seed, rng::SYNTHETIC, 0);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut cols = vec![Vec::with_capacity(n); schema.len()];
    let idx = |name: &str| schema.index_of(name).expect("canonical column");
    let [sc, sl, sa, so] = design.view_noise;
    let location_flags = [
        ("freq_shopping_flag", -1.0),
        ("wanda_flag", -1.2),
        ("sam_flag", -1.5),
        ("movie_flag", -0.8),
        ("tour_flag", -1.0),
        ("sport_flag", -1.0),
    ];
    let app_counts = [
        ("online_shopping_count", 2.0),
        ("express_count", 1.5),
        ("finance_app_count", 1.0),
        ("video_app_count", 2.5),
        ("flight_count", 0.2),
        ("train_count", 0.5),
        ("tour_app_count", 0.3),
    ];

    for _ in 0..n {
        let mut g = || normal.sample(&mut r);
        let z = g();
        let vc = z + sc * g();
        let vl = z + sl * g();
        let va = z + sa * g();
        let vo = z + so * g();
        let mut set = |name: &str, v: f64| cols[idx(name)].push(v);

        set("age", f64::from(r.random_range(18u8..=80)));
        let net_age = (design.net_age_mean + design.net_age_loading * vo + 6.0 * normal.sample(&mut r)).round();
        set("net_age_till_now", net_age.clamp(1.0, 240.0));
        set("connect_num", poisson(&mut r, (3.0 + 0.3 * vo).exp()));
        set("true_name_flag", flag(&mut r, logistic(2.5 + vo)));
        set("uni_student_flag", flag(&mut r, 0.1));
        set("blk_list_flag", flag(&mut r, logistic(-3.0 - 1.5 * vo)));
        set("4g_unhealth_flag", flag(&mut r, logistic(-2.5 - 0.7 * vo)));

        let a = design.amount_loading;
        let mut amount = |median: f64, sd: f64| round2(median * (a * vc + sd * normal.sample(&mut r)).exp());
        let top_up = amount(50.0, 0.5);
        let avg_use = amount(40.0, 0.3);
        let fee = amount(45.0, 0.3);
        let balance = amount(30.0, 0.7);
        set("top_up_month_diff", poisson(&mut r, (0.7 - 0.6 * vc).exp()));
        set("top_up_amount", top_up);
        set("recent_6month_avg_use", avg_use);
        set("total_account_fee", fee);
        set("curr_month_balance", balance);
        set("cost_sensitivity", (3.0 - vc + 0.7 * normal.sample(&mut r)).round().clamp(1.0, 5.0));
        set("curr_overdue_flag", flag(&mut r, logistic(-2.2 - 1.3 * vc)));

        set("recent_3month_shopping_count", poisson(&mut r, (1.0 + design.shopping_loading * vl).exp()));
        for (name, base) in location_flags {
            set(name, flag(&mut r, logistic(base + 0.5 * vl)));
        }

        // Regular usage goes with good credit: dispersion shrinks as `va` grows.
        let spread = (design.app_dispersion * (-design.app_regularity * va).exp()).min(2.0);
        for (name, mu) in app_counts {
            let log_rate = mu + spread * normal.sample(&mut r);
            set(name, poisson(&mut r, log_rate.exp()));
        }
    }

    let ids = (0..n).map(|i| format!("u{i:06}")).collect();
    let zeros = vec![0.0; n];
    let d = Dataset::new(schema, cols, zeros, ids).expect("generated columns are consistent");
    let signal = planted_signal(&d);
    let target = signal
        .iter()
        .map(|s| (s + NOISE_SD * normal.sample(&mut r)).clamp(SCORE_MIN, SCORE_MAX))
        .collect();
    d.with_target(target).expect("target length matches")
}

fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// The noise-free planted score of every row of a canonical-schema dataset.
/// The finance threshold is the median of the dataset's own column.
pub fn planted_signal(d: &Dataset) -> Vec<f64> {
    let col = |name: &str| d.column_by_name(name).expect("canonical column");
    let net_age = col("net_age_till_now");
    let top_up_diff = col("top_up_month_diff");
    let avg_use = col("recent_6month_avg_use");
    let blk = col("blk_list_flag");
    let overdue = col("curr_overdue_flag");
    let fee = col("total_account_fee");
    let true_name = col("true_name_flag");
    let finance = col("finance_app_count");
    let connect = col("connect_num");
    let (movie, tour, sport) = (col("movie_flag"), col("tour_flag"), col("sport_flag"));
    let finance_median = median(finance);
    (0..d.n_rows())
        .map(|i| {
            620.0 + 0.8 * net_age[i] - 1.5 * top_up_diff[i] + 0.05 * avg_use[i] - 60.0 * blk[i] - 45.0 * overdue[i]
                + 0.02 * fee[i] * true_name[i]
                + 12.0 * f64::from(u8::from(finance[i] > finance_median))
                + 4.0 * connect[i].sqrt()
                + 2.0 * (movie[i] + tour[i] + sport[i])
        })
        .collect()
}
