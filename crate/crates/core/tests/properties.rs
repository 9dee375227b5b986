use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use poclm::estimation::{fit_direction_constrained, FitOptions};
use poclm::inference::quantile::chi2_cdf;
use poclm::inference::{chi2_quantile, cr_membership, Fits, RegionKind, RegionSpec, RegionTarget};
use poclm::model::likelihood::{derivatives_flat, loglik_flat};
use poclm::model::{
    category_probabilities, Constraint, DesignData, Direction, ModelSpec, MonotoneDirection,
    ParameterVector, PredictorSpec,
};

/// One ordinal predictor with `c` categories plus a numeric covariate.
fn spec(k: usize, c: usize) -> ModelSpec {
    ModelSpec::with_numbered_response(
        "y",
        k,
        vec![
            PredictorSpec::ordinal_numbered("z", c, Constraint::Either),
            PredictorSpec::numeric("x"),
        ],
    )
    .unwrap()
}

/// Raw draws: ordinal category (zero-based), numeric value and response.
struct Draw {
    cats: Vec<usize>,
    xs: Vec<f64>,
    y: Vec<usize>,
    c: usize,
    k: usize,
}

impl Draw {
    fn new(seed: u64, n: usize, k: usize, c: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let cats: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
            let d = Draw { cats, xs, y, c, k };
            if d.design().empty_category().is_none() {
                return d;
            }
        }
    }

    fn design(&self) -> DesignData {
        let cols = self.c;
        let mut x = Vec::with_capacity(self.y.len() * cols);
        for (&cat, &v) in self.cats.iter().zip(&self.xs) {
            let mut row = vec![0.0; cols];
            if cat > 0 {
                row[cat - 1] = 1.0;
            }
            row[cols - 1] = v;
            x.extend(row);
        }
        DesignData::from_parts(self.k, cols, self.y.clone(), x).unwrap()
    }

    /// Same data with the ordinal categories in reverse order.
    fn reversed(&self) -> Self {
        Draw {
            cats: self.cats.iter().map(|c| self.c - 1 - c).collect(),
            xs: self.xs.clone(),
            y: self.y.clone(),
            c: self.c,
            k: self.k,
        }
    }
}

fn params(seed: u64, spec: &ModelSpec) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = spec.k();
    let mut gamma: Vec<f64> = (0..spec.dim())
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    let mut a = rng.random_range(-2.0..-1.0);
    for g in gamma.iter_mut().take(k - 1) {
        *g = a;
        a += rng.random_range(0.2..1.5);
    }
    gamma
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_are_normalised(seed in any::<u64>(), k in 2usize..6, c in 2usize..5, v in -3.0f64..3.0) {
        let spec = spec(k, c);
        let gamma = params(seed, &spec);
        let pv = ParameterVector::from_flat(&spec.layout(), &gamma).unwrap();
        let mut row = vec![0.0; c];
        row[(seed as usize) % c] = 1.0;
        row[c - 1] = v;
        let p = category_probabilities(&pv, &row).unwrap();
        prop_assert_eq!(p.len(), k);
        prop_assert!(p.iter().all(|&q| q > 0.0 && q < 1.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn score_matches_finite_differences(seed in any::<u64>(), k in 2usize..5, c in 2usize..5) {
        let spec = spec(k, c);
        let data = Draw::new(seed, 40, k, c).design();
        let gamma = params(seed ^ 1, &spec);
        let s = derivatives_flat(&data, &gamma, false).unwrap().score;
        let h = 1e-5;
        let scale = s.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for j in 0..gamma.len() {
            let (mut up, mut down) = (gamma.clone(), gamma.clone());
            up[j] += h;
            down[j] -= h;
            let fd = (loglik_flat(&data, &up).unwrap() - loglik_flat(&data, &down).unwrap()) / (2.0 * h);
            prop_assert!((fd - s[j]).abs() / scale < 1e-6);
        }
    }

    #[test]
    fn quantile_cdf_agrees_with_statrs(r in 1usize..12, x in 0.01f64..60.0, level in 0.5f64..0.999) {
        let reference = ChiSquared::new(r as f64).unwrap();
        prop_assert!((chi2_cdf(r, x) - reference.cdf(x)).abs() < 1e-9);
        let q = chi2_quantile(r, level).unwrap();
        prop_assert!((reference.cdf(q) - level).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fits_ignore_row_order(seed in any::<u64>()) {
        let spec = spec(3, 3);
        let data = Draw::new(seed, 120, 3, 3).design();
        let mut order: Vec<usize> = (0..data.n()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 7));
        let shuffled = data.permuted(&order);
        let a = Fits::new(&data, &spec, FitOptions::default()).unwrap();
        let b = Fits::new(&shuffled, &spec, FitOptions::default()).unwrap();
        prop_assert!((a.umle.log_likelihood - b.umle.log_likelihood).abs() < 1e-8);
        prop_assert!((a.cmle.log_likelihood - b.cmle.log_likelihood).abs() < 1e-8);
    }

    #[test]
    fn reversing_categories_swaps_directions(seed in any::<u64>(), c in 3usize..5) {
        let spec = spec(3, c);
        let draw = Draw::new(seed, 150, 3, c);
        let (data, rev) = (draw.design(), draw.reversed().design());
        let opts = FitOptions::default();
        let fit = |d: &DesignData, dir| {
            fit_direction_constrained(d, &spec, &MonotoneDirection(vec![Some(dir)]), &opts).unwrap().log_likelihood
        };
        prop_assert!((fit(&data, Direction::Iso) - fit(&rev, Direction::Anti)).abs() < 1e-6);
        prop_assert!((fit(&data, Direction::Anti) - fit(&rev, Direction::Iso)).abs() < 1e-6);
        let a = Fits::new(&data, &spec, opts.clone()).unwrap();
        let b = Fits::new(&rev, &spec, opts.clone()).unwrap();
        let lr = |f: &Fits| 2.0 * (f.umle.log_likelihood - f.cmle.log_likelihood);
        prop_assert!((lr(&a) - lr(&b)).abs() < 1e-6);
    }

    #[test]
    fn regions_nest(seed in any::<u64>(), u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let spec = spec(3, 3);
        let data = Draw::new(seed, 150, 3, 3).design();
        let fits = Fits::new(&data, &spec, FitOptions::default()).unwrap();
        let centre = &fits.umle.flat()[2..4];
        let point = [centre[0] + u, centre[1] + v];
        let wide = RegionSpec::new(RegionTarget::Block(0));
        let narrow = wide.clone().with_level(0.5);
        let w = cr_membership(&point, &wide, &fits).unwrap();
        let n = cr_membership(&point, &narrow, &fits).unwrap();
        prop_assume!(!w.indeterminate && !n.indeterminate);
        prop_assert!(!w.uccr || w.ucr);
        prop_assert_eq!(w.acr, w.uccr || w.ccr);
        for kind in [RegionKind::Ucr, RegionKind::Uccr, RegionKind::Ccr, RegionKind::Acr] {
            prop_assert!(!n.get(kind) || w.get(kind), "{kind} not nested in level");
        }
    }
}
