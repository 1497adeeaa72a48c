//! The acceptance criteria and the auxiliary diagnostics of each subcommand.
//!
//! Criteria that name a domain run on it. The weighted criteria (7 to 11)
//! take the domain, the in-range weight and `p` from the config.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::config::ExperimentConfig;
use super::report::{Cell, Check, Table, Verdict};
use crate::error::{Error, Result};
use crate::geometry::{
    comparability_probe, engulfing_probe, homogeneity_fit, triangle_constant_probe,
    boundary_slab_measure, domain::complex_gaussian, CPoint, Domain, QuasiBall,
};
use crate::kernels::{
    boundary_size_probe, derivative_probe, lower_bound_probe, separated_pairs, size_probe, smoothness_probe,
    EstimateFit, KernelEvaluator, KernelMode, PairSampler,
};
use crate::operators::{
    good_lambda_experiment, maximal_many, necessity_probe, norm_ratios, random_bundle, regularizer_lemma_suite,
    two_ball_lower_bound, DictionarySpec, GoodLambdaSpec, LemmaSpec, MaximalDictionary, NecessitySpec, NormSpec,
    OperatorTag, Projector, TestFunction, TwoBallSpec,
};
use crate::quadrature::{integrate, sample_domain, QuadratureSpec};
use crate::rng::{derive_seed, par_generate};
use crate::weights::{
    ap_characteristic, ball_family, bp_characteristic, duality_identity_check, regularized_weight,
    weight_doubling_probe, BpOptions, FamilySpec, Regularizer, Weight,
};

/// Number, short name and runtime budget in seconds.
pub const CRITERIA: [(u32, &str, f64); 12] = [
    (1, "reproducing property", 30.0),
    (2, "kernel cross-validation", 30.0),
    (3, "size and boundary-size estimates", 120.0),
    (4, "smoothness exponent", 120.0),
    (5, "strong homogeneity", 60.0),
    (6, "boundary slab", 60.0),
    (7, "B_p characteristic", 120.0),
    (8, "regularizer machinery", 180.0),
    (9, "good-lambda", 300.0),
    (10, "weighted boundedness", 300.0),
    (11, "necessity", 300.0),
    (12, "quadrature engine", 120.0),
];

/// Exponent of the out-of-range weight in the B_p growth check.
const DIVERGENT_BP_T: f64 = 1.5;
/// Exponent of the out-of-range weight in the necessity probe.
const DIVERGENT_NECESSITY_T: f64 = 1.2;

/// Checks and tables produced by one criterion or diagnostic group.
#[derive(Debug, Default)]
pub struct Section {
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Section {
    fn check(&mut self, criterion: Option<u32>, name: &str, value: f64, condition: &str, ok: bool) {
        self.checks.push(Check::new(criterion, name, value, condition, Verdict::from_bool(ok)));
    }

    fn judged(&mut self, criterion: Option<u32>, name: &str, value: f64, condition: &str, ok: bool, flagged: bool) {
        self.checks.push(Check::new(criterion, name, value, condition, Verdict::judged(ok, flagged)));
    }
}

pub fn run_criterion(n: u32, cfg: &ExperimentConfig) -> Result<Section> {
    let c = Some(n);
    match n {
        1 => reproducing(c, cfg),
        2 => cross_validation(c, cfg),
        3 => size_estimates(c, cfg),
        4 => smoothness(c, cfg),
        5 => homogeneity(c, cfg),
        6 => slab(c, cfg),
        7 => bp(c, cfg),
        8 => regularizer(c, cfg),
        9 => good_lambda(c, cfg),
        10 => boundedness(c, cfg),
        11 => necessity(c, cfg),
        12 => quadrature_engine(c, cfg),
        _ => Err(Error::InvalidArgument(format!("no criterion {n}"))),
    }
}

/// Points uniform in the Euclidean ball of radius `rmax` in `C^dim`.
fn probe_points(dim: usize, rmax: f64, n: usize, seed: u64) -> Vec<CPoint> {
    par_generate(seed, n, |rng, _| {
        let g = complex_gaussian(rng, dim);
        let r = rmax * rng.random::<f64>().powf(1.0 / (2 * dim) as f64);
        g.scale(r / g.norm())
    })
}

/// Multi-indices of total degree in `lo..=hi`.
fn multi_indices(dim: usize, lo: u32, hi: u32) -> Vec<Vec<u32>> {
    let mut out = vec![];
    for deg in lo..=hi {
        if dim == 1 {
            out.push(vec![deg]);
        } else {
            for a in (0..=deg).rev() {
                for mut rest in multi_indices(dim - 1, deg - a, deg - a) {
                    rest.insert(0, a);
                    out.push(rest);
                }
            }
        }
    }
    out
}

fn label(prefix: &str, alpha: &[u32]) -> String {
    let parts: Vec<String> = alpha.iter().map(|a| a.to_string()).collect();
    format!("{prefix}^({})", parts.join(" "))
}

fn relative_change(a: f64, b: f64) -> f64 {
    (b / a - 1.0).abs()
}

fn reproducing(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let mut t = Table::new("c01_reproducing", &["domain", "function", "max_abs_error", "max_abs_value"]);
    let cases = [
        (Domain::disk(), QuadratureSpec::polar(64, 64), 0.95),
        (Domain::ball(2), QuadratureSpec::polar(24, 24), 0.6),
    ];
    for (i, (domain, rule, rmax)) in cases.into_iter().enumerate() {
        let dim = domain.dim();
        let proj = Projector::new(KernelEvaluator::for_domain(&domain)?, rule)?;
        let holo = multi_indices(dim, 0, 4);
        let anti = multi_indices(dim, 1, 3);
        let mut fs: Vec<TestFunction> = holo.iter().map(|a| TestFunction::monomial(a.clone())).collect();
        fs.extend(anti.iter().map(|a| TestFunction::AntiHolo(a.clone())));
        let zs = probe_points(dim, rmax, 50, derive_seed(cfg.seed, 100 + i as u64));
        let vals = zs.iter().map(|z| proj.bundle(&fs, z)).collect::<Result<Vec<_>>>()?;
        let name = domain.kind().to_string();
        let (mut worst_holo, mut worst_anti) = (0.0f64, 0.0f64);
        for (j, f) in fs.iter().enumerate() {
            // P annihilates the antiholomorphic monomials
            let target = |z: &CPoint| if j < holo.len() { f.eval(z) } else { Complex64::new(0.0, 0.0) };
            let err = zs.iter().zip(&vals).map(|(z, v)| (v.p[j] - target(z)).norm()).fold(0.0, f64::max);
            let scale = zs.iter().map(|z| f.eval(z).norm()).fold(0.0, f64::max);
            if j < holo.len() {
                worst_holo = worst_holo.max(err / scale);
                t.push(vec![name.as_str().into(), label("z", &holo[j]).into(), err.into(), scale.into()]);
            } else {
                worst_anti = worst_anti.max(err);
                t.push(vec![name.as_str().into(), label("conj z", &anti[j - holo.len()]).into(), err.into(), scale.into()]);
            }
        }
        s.check(c, &format!("{name} holomorphic max |Pf - f| / max |f|"), worst_holo, "<= 1e-3", worst_holo <= 1e-3);
        s.check(c, &format!("{name} antiholomorphic max |P f|"), worst_anti, "<= 1e-3", worst_anti <= 1e-3);
    }
    s.tables.push(t);
    Ok(s)
}

fn cross_validation(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let egg = KernelEvaluator::new(&Domain::egg(1), KernelMode::TruncatedBasis { max_degree: 60 })?;
    let ball = KernelEvaluator::new(&Domain::ball(2), KernelMode::ClosedForm)?;
    let zs = probe_points(2, 0.6, 200, derive_seed(cfg.seed, 200));
    let mut worst = 0.0f64;
    let mut t = Table::new("c02_cross_validation", &["pair", "truncated_abs", "closed_form_abs", "relative_error"]);
    for (i, pair) in zs.chunks(2).enumerate() {
        let a = egg.eval(&pair[0], &pair[1])?;
        let b = ball.eval(&pair[0], &pair[1])?;
        let rel = (a - b).norm() / b.norm();
        worst = worst.max(rel);
        t.push(vec![i.into(), a.norm().into(), b.norm().into(), rel.into()]);
    }
    s.check(c, "egg(1) truncated N=60 vs ball(2) closed form, max relative error", worst, "<= 1e-6", worst <= 1e-6);
    s.tables.push(t);
    Ok(s)
}

fn size_estimates(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let n = cfg.knobs.n_pairs;
    let mut t = Table::new(
        "c03_size",
        &["domain", "estimate", "sup_n", "sup_2n", "relative_change", "n_samples", "n_excluded"],
    );
    let cases = [
        (Domain::disk(), QuadratureSpec::polar(32, 32)),
        (Domain::ball(2), QuadratureSpec::uniform(20_000, derive_seed(cfg.seed, 301)).with_tolerance(0.05)),
    ];
    for (i, (domain, rule)) in cases.into_iter().enumerate() {
        let ev = KernelEvaluator::for_domain(&domain)?;
        let pairs = PairSampler::default().sample(&domain, 2 * n, derive_seed(cfg.seed, 300 + i as u64));
        let (first, second) = pairs.split_at(n);
        let name = domain.kind().to_string();
        for (est, probe) in [
            ("size", size_probe as fn(&KernelEvaluator, &[(CPoint, CPoint)], &QuadratureSpec) -> Result<EstimateFit>),
            ("boundary_size", boundary_size_probe),
        ] {
            let a = probe(&ev, first, &rule)?;
            let b = probe(&ev, second, &rule)?;
            let sup_n = a.constant;
            let sup_2n = a.constant.max(b.constant);
            let change = relative_change(sup_n, sup_2n);
            t.push(vec![
                name.as_str().into(),
                est.into(),
                sup_n.into(),
                sup_2n.into(),
                change.into(),
                (a.n_samples + b.n_samples).into(),
                (a.n_excluded + b.n_excluded).into(),
            ]);
            s.check(
                c,
                &format!("{name} {est} sup change under sample doubling"),
                change,
                "finite and < 0.2",
                sup_2n.is_finite() && change < 0.2,
            );
        }
    }
    s.tables.push(t);
    Ok(s)
}

fn smoothness(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let domain = Domain::disk();
    let ev = KernelEvaluator::for_domain(&domain)?;
    let pairs = PairSampler::default().sample(&domain, cfg.knobs.n_pairs, derive_seed(cfg.seed, 400));
    let rule = QuadratureSpec::polar(32, 32);
    let c2 = cfg.knobs.c2;
    let mut t = Table::new("c04_smoothness", &["c2", "nu", "constant", "n_samples", "n_excluded"]);
    let mut nus = vec![];
    for cc in [c2, 2.0 * c2] {
        let fit = smoothness_probe(&ev, &pairs, cc, derive_seed(cfg.seed, 401), &rule)?;
        t.push(vec![cc.into(), fit.exponent.into(), fit.constant.into(), fit.n_samples.into(), fit.n_excluded.into()]);
        nus.push(fit.exponent);
    }
    s.check(c, &format!("disk fitted nu at C2={c2}"), nus[0], ">= 0.5", nus[0] >= 0.5);
    let shift = (nus[1] - nus[0]).abs();
    s.check(c, "disk nu shift under C2 doubling", shift, "<= 0.2", shift <= 0.2);
    s.tables.push(t);
    Ok(s)
}

/// Boundary-touching family with centers much closer to the boundary than
/// the radius, so that every dilation stays in the touching regime.
fn homogeneity_family(domain: &Domain, cfg: &ExperimentConfig) -> Result<Vec<QuasiBall>> {
    let mut spec = FamilySpec::touching(cfg.knobs.family_centers, FamilySpec::dyadic(4, 7), derive_seed(cfg.seed, 500));
    spec.depth_range = (1.0 / 64.0, 1.0 / 16.0);
    ball_family(domain, &spec)
}

fn homogeneity(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let mut t = Table::new("c05_homogeneity", &["domain", "m", "c0", "n_pairs", "n_flagged"]);
    let cases = [
        (Domain::disk(), QuadratureSpec::polar(64, 64), (1.8, 2.2)),
        (
            Domain::ball(2),
            QuadratureSpec::uniform(20_000, derive_seed(cfg.seed, 501)).with_tolerance(0.05),
            (2.6, 3.4),
        ),
    ];
    for (domain, rule, (lo, hi)) in cases {
        let fam = homogeneity_family(&domain, cfg)?;
        let fit = homogeneity_fit(&domain, &fam, &[1.0, 2.0, 4.0], &rule)?;
        let name = domain.kind().to_string();
        t.push(vec![name.as_str().into(), fit.m.into(), fit.c0.into(), fit.n_pairs.into(), fit.n_flagged.into()]);
        let ok = (lo..=hi).contains(&fit.m);
        s.judged(c, &format!("{name} fitted m"), fit.m, &format!("in [{lo}, {hi}]"), ok, fit.n_flagged > 0);
    }
    s.tables.push(t);
    Ok(s)
}

fn slab(c: Option<u32>, _cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let domain = Domain::disk();
    let r = 0.25;
    let b0 = QuasiBall::new(&domain, CPoint::c1(1.0 - r / 4.0, 0.0), r)?;
    let rule = QuadratureSpec::polar(64, 64);
    let mut t = Table::new("c06_slab", &["s", "slab_fraction", "std_error", "fraction_over_s"]);
    let mut scaled = vec![];
    let mut flagged = false;
    for frac in [0.2, 0.1, 0.05] {
        let est = boundary_slab_measure(&domain, &b0, frac, &rule)?;
        flagged |= est.flagged;
        scaled.push(est.value / frac);
        t.push(vec![frac.into(), est.value.into(), est.std_error.into(), (est.value / frac).into()]);
    }
    let spread = scaled.iter().copied().fold(0.0, f64::max) / scaled.iter().copied().fold(f64::INFINITY, f64::min);
    s.judged(c, "disk slab fraction / s, max over min", spread, "<= 2", spread <= 2.0, flagged);
    s.tables.push(t);
    Ok(s)
}

fn touching(cfg: &ExperimentConfig, domain: &Domain, hi: i32, salt: u64) -> Result<Vec<QuasiBall>> {
    ball_family(domain, &FamilySpec::touching(cfg.knobs.family_centers, FamilySpec::dyadic(2, hi), derive_seed(cfg.seed, salt)))
}

fn bp(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let domain = cfg.domain_value()?;
    let sigma = cfg.weight_value()?;
    let opts = BpOptions::new(cfg.quadrature);
    let hi = cfg.knobs.family_radii.1;
    let coarse = touching(cfg, &domain, hi, 700)?;
    let fine = touching(cfg, &domain, hi + 1, 700)?;
    let mut t = Table::new("c07_bp", &["weight", "p", "min_radius", "floor", "value", "std_error", "divergent"]);
    let row = |t: &mut Table, w: &Weight, e: &crate::weights::BpEstimate| {
        t.push(vec![w.label().into(), w.p.into(), e.min_radius.into(), e.floor.into(), e.value.into(), e.std_error.into(), e.divergent.into()]);
    };

    let one = Weight::constant(&domain, 1.0, cfg.p)?;
    let e1 = bp_characteristic(&domain, &one, &coarse, &opts)?;
    row(&mut t, &one, &e1);
    s.check(c, "[1]_{B_p}", e1.value, "== 1", e1.value == 1.0);

    let a = bp_characteristic(&domain, &sigma, &coarse, &opts)?;
    let b = bp_characteristic(&domain, &sigma, &fine, &opts)?;
    row(&mut t, &sigma, &a);
    row(&mut t, &sigma, &b);
    let change = relative_change(a.value, b.value);
    s.check(
        c,
        &format!("[{}]_{{B_p}} change under radius-floor halving", sigma.label()),
        change,
        "finite and < 0.1",
        b.value.is_finite() && change < 0.1,
    );

    let bad = Weight::power(&domain, DIVERGENT_BP_T, cfg.p)?;
    let mut values = vec![];
    for floor in [1e-3, 1e-4, 1e-5] {
        let e = bp_characteristic(&domain, &bad, &coarse, &opts.with_floor(floor))?;
        row(&mut t, &bad, &e);
        values.push(e.value);
    }
    let growth = values.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    s.check(
        c,
        &format!("[{}]_{{B_p}} growth per decade of floor", bad.label()),
        growth,
        ">= 2",
        growth >= 2.0,
    );
    s.tables.push(t);
    Ok(s)
}

/// A_p characteristic, doubling and duality for the configured weight.
fn bp_extras(cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let domain = cfg.domain_value()?;
    let sigma = cfg.weight_value()?;
    let opts = BpOptions::new(cfg.quadrature);
    let (lo, hi) = cfg.knobs.family_radii;
    let mixed = ball_family(
        &domain,
        &FamilySpec::mixed(cfg.knobs.family_centers, FamilySpec::dyadic(lo, hi), derive_seed(cfg.seed, 710)),
    )?;
    let ap = ap_characteristic(&domain, &sigma, &mixed, &opts)?;
    let touching_fam = touching(cfg, &domain, hi, 700)?;
    let bpv = bp_characteristic(&domain, &sigma, &touching_fam, &opts)?;
    let mut t = Table::new("bp_weight", &["quantity", "value", "std_error"]);
    t.push(vec!["B_p".into(), bpv.value.into(), bpv.std_error.into()]);
    t.push(vec!["A_p".into(), ap.value.into(), ap.std_error.into()]);
    s.check(None, &format!("[{}]_{{B_p}}", sigma.label()), bpv.value, "finite, not divergent", bpv.value.is_finite() && !bpv.divergent);
    s.check(None, &format!("[{}]_{{A_p}}", sigma.label()), ap.value, "finite, not divergent", ap.value.is_finite() && !ap.divergent);

    let ball = touching_fam.iter().find(|b| b.radius <= 0.125).unwrap_or(&touching_fam[0]);
    let dbl = weight_doubling_probe(&domain, &sigma, ball, 1.0 + 1e-9, 2.0, &cfg.quadrature)?;
    t.push(vec!["doubling sigma(2B)/sigma(B)".into(), dbl.value.into(), dbl.std_error.into()]);
    s.judged(None, "weight doubling sigma(2B)/sigma(B)", dbl.value, "finite", dbl.value.is_finite(), dbl.flagged);

    let dual = duality_identity_check(&domain, &sigma, &touching_fam, bpv.floor, &cfg.quadrature)?;
    t.push(vec!["duality max abs deviation".into(), dual.max_abs_deviation.into(), Cell::Num(None)]);
    s.check(
        None,
        "duality identity max relative deviation",
        dual.max_abs_deviation / bpv.value.max(1.0),
        "<= 1e-9",
        dual.max_abs_deviation <= 1e-9 * bpv.value.max(1.0),
    );
    s.tables.push(t);
    Ok(s)
}

fn regularizer(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let domain = cfg.domain_value()?;
    let sigma = cfg.weight_value()?;
    let opts = BpOptions::new(cfg.quadrature);
    let (lo, hi) = cfg.knobs.family_radii;
    let family = |hi: i32| {
        ball_family(
            &domain,
            &FamilySpec::mixed(cfg.knobs.family_centers, FamilySpec::dyadic(lo, hi), derive_seed(cfg.seed, 800)),
        )
    };
    let (coarse, fine) = (family(hi)?, family(hi + 1)?);
    let mut ap_t = Table::new("c08_ap", &["k", "min_radius", "value", "std_error"]);
    let mut suite_t = Table::new(
        "c08_lemma_suite",
        &[
            "k",
            "k_prime",
            "n_instances",
            "maximal_max_ratio",
            "duality_max_ratio",
            "stability_max_log_ratio",
            "dilation_needed",
            "n_nonfinite",
            "containment_pairs",
            "containment_holds",
        ],
    );
    let mut reports = vec![];
    for (i, k) in cfg.knobs.k_values.iter().enumerate() {
        let reg = Regularizer::new(*k, 1.0)?;
        let rw = regularized_weight(&domain, &sigma, &reg, &QuadratureSpec::polar(32, 32))?;
        let a = ap_characteristic(&domain, &rw, &coarse, &opts)?;
        let b = ap_characteristic(&domain, &rw, &fine, &opts)?;
        for e in [&a, &b] {
            ap_t.push(vec![(*k).into(), e.min_radius.into(), e.value.into(), e.std_error.into()]);
        }
        let change = relative_change(a.value, b.value);
        s.check(
            c,
            &format!("[R_{k}(sigma)]_{{A_p}} change under radius-floor halving"),
            change,
            "finite and < 0.2",
            b.value.is_finite() && change < 0.2,
        );
        let r = regularizer_lemma_suite(&domain, *k, cfg.knobs.n_instances, derive_seed(cfg.seed, 810 + i as u64), &LemmaSpec::default())?;
        suite_t.push(vec![
            r.k.into(),
            r.k_prime.into(),
            r.n_instances.into(),
            r.maximal_max_ratio.into(),
            r.duality_max_ratio.into(),
            r.stability_max_log_ratio.into(),
            r.dilation_needed.into(),
            r.n_nonfinite.into(),
            r.containment_pairs.into(),
            r.containment_holds.into(),
        ]);
        let finite = [r.maximal_max_ratio, r.duality_max_ratio, r.stability_max_log_ratio, r.dilation_needed]
            .iter()
            .all(|x| x.is_finite())
            && r.n_nonfinite == 0;
        s.check(c, &format!("k={k} lemma max ratios finite"), r.n_nonfinite as f64, "all finite", finite);
        let frac = r.containment_fraction();
        s.check(c, &format!("k={k} containment z in B_k'(z')"), frac, "== 1", frac == 1.0);
        reports.push(r);
    }
    let columns: [(&str, fn(&crate::operators::LemmaSuiteReport) -> f64); 4] = [
        ("maximal", |r| r.maximal_max_ratio),
        ("duality", |r| r.duality_max_ratio),
        ("stability", |r| r.stability_max_log_ratio),
        ("dilation", |r| r.dilation_needed),
    ];
    for (name, col) in columns {
        let vals: Vec<f64> = reports.iter().map(col).collect();
        let spread = vals.iter().copied().fold(0.0, f64::max) / vals.iter().copied().fold(f64::INFINITY, f64::min);
        s.check(c, &format!("{name} ratio spread across k"), spread, "<= 3", spread <= 3.0);
    }
    s.tables.push(ap_t);
    s.tables.push(suite_t);
    Ok(s)
}

fn good_lambda(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let domain = cfg.domain_value()?;
    let ev = cfg.evaluator()?;
    let sigma = cfg.weight_value()?;
    let k = &cfg.knobs;
    let mut center = vec![0.0; domain.dim()];
    center[0] = k.indicator_center;
    let f = TestFunction::indicator(&domain, QuasiBall::new(&domain, CPoint::real(&center), k.indicator_radius)?);
    let mut spec = GoodLambdaSpec::default();
    spec.sample.seed = derive_seed(cfg.seed, 900);
    spec.dictionary.seed = derive_seed(cfg.seed, 901);
    let r = good_lambda_experiment(&ev, &f, &sigma, &k.gamma_grid, &k.lambda_grid, &spec)?;
    let mut t = Table::new("c09_good_lambda", &["gamma", "lambda", "ratio", "std_error"]);
    for (i, g) in r.gamma_grid.iter().enumerate() {
        for (j, l) in r.lambda_grid.iter().enumerate() {
            let cell = r.ratio_table[i][j];
            t.push(vec![(*g).into(), (*l).into(), cell.map(|x| x.ratio).into(), cell.map(|x| x.std_error).into()]);
        }
    }
    // small-gamma rows in decreasing gamma order
    let mut rows: Vec<usize> = (0..r.gamma_grid.len()).filter(|i| r.gamma_grid[*i] <= 0.3).collect();
    rows.sort_by(|a, b| r.gamma_grid[*b].partial_cmp(&r.gamma_grid[*a]).unwrap());
    let mut worst_rise = f64::NEG_INFINITY;
    let mut final_ratio = 0.0f64;
    for j in 0..r.lambda_grid.len() {
        for w in rows.windows(2) {
            if let (Some(a), Some(b)) = (r.ratio_table[w[0]][j], r.ratio_table[w[1]][j]) {
                let tol = 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
                worst_rise = worst_rise.max(b.ratio - a.ratio - tol);
            }
        }
        if let Some(last) = rows.last().and_then(|i| r.ratio_table[*i][j]) {
            final_ratio = final_ratio.max(last.ratio);
        }
    }
    if rows.len() >= 2 {
        s.check(c, "ratio rise as gamma decreases, beyond 3 SE", worst_rise.max(0.0), "== 0", worst_rise <= 0.0);
    } else {
        s.check(c, "ratio monotonicity needs two gammas <= 0.3", rows.len() as f64, ">= 2", false);
    }
    s.check(c, "ratio at the smallest gamma", final_ratio, "< 0.3", final_ratio < 0.3 && !rows.is_empty());
    s.check(
        c,
        "fitted exponent delta",
        r.fitted_exponent,
        &format!("> 0 (1/m = {:.3})", r.target_exponent),
        r.fitted_exponent > 0.0,
    );
    s.tables.push(t);
    Ok(s)
}

fn boundedness(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let domain = cfg.domain_value()?;
    let ev = cfg.evaluator()?;
    let sigma = cfg.weight_value()?;
    let bundle = random_bundle(&domain, cfg.knobs.bundle_size, derive_seed(cfg.seed, 1000));
    let ops = [OperatorTag::P, OperatorTag::PPlus, OperatorTag::M];
    let dictionary = DictionarySpec { seed: derive_seed(cfg.seed, 1001), ..Default::default() };
    let mut t = Table::new("c10_norm_ratios", &["operator", "grid_level", "sup_ratio", "n_excluded", "n_probe_points"]);
    let mut per_level = vec![];
    for level in [0, 1] {
        let spec = NormSpec { grid_level: level, seed: derive_seed(cfg.seed, 1002), dictionary: dictionary.clone(), ..Default::default() };
        let reports = norm_ratios(&ops, &ev, &sigma, &bundle, &spec)?;
        for r in &reports {
            t.push(vec![r.op.to_string().into(), level.into(), r.sup_ratio.into(), r.n_excluded.into(), r.n_probe_points.into()]);
        }
        per_level.push(reports);
    }
    for (a, b) in per_level[0].iter().zip(&per_level[1]) {
        let change = relative_change(a.sup_ratio, b.sup_ratio);
        s.check(
            c,
            &format!("{} sup norm ratio change under grid refinement", a.op),
            change,
            "finite and < 0.2",
            a.sup_ratio.is_finite() && b.sup_ratio.is_finite() && change < 0.2,
        );
    }
    let dict = MaximalDictionary::new(&domain, &dictionary)?;
    let zs: Vec<CPoint> = probe_points(domain.dim(), 0.9, 16, derive_seed(cfg.seed, 1003))
        .into_iter()
        .filter(|z| domain.contains(z))
        .collect();
    let one = |_: &CPoint| 1.0;
    let m1 = maximal_many(&dict, &[one], &zs)?;
    let worst = m1[0].iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    s.check(c, "max |M1 - 1|", worst, "== 0", worst == 0.0);
    s.tables.push(t);
    Ok(s)
}

fn necessity(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let domain = cfg.domain_value()?;
    let ev = cfg.evaluator()?;
    let radii = &cfg.knobs.radii;
    let two_ball = TwoBallSpec { c2: cfg.knobs.c2, ..Default::default() };
    let mut t = Table::new(
        "c11_two_ball",
        &["radius", "center_distance", "separation_margin", "inf_constant", "swapped_constant", "measure_b1", "grid_points"],
    );
    let mut infs = vec![];
    for r in radii {
        let rep = two_ball_lower_bound(&ev, *r, &two_ball)?;
        t.push(vec![
            rep.radius.into(),
            rep.center_distance.into(),
            rep.separation_margin.into(),
            rep.inf_constant.into(),
            rep.swapped_constant.into(),
            rep.measure_b1.into(),
            rep.grid_points.into(),
        ]);
        infs.push(rep.inf_constant);
    }
    s.tables.push(t);
    let min = infs.iter().copied().fold(f64::INFINITY, f64::min);
    s.check(c, "two-ball inf constant, min over radii", min, ">= 0.01", min >= 0.01);
    let mut sorted = infs.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let dev = infs.iter().map(|v| relative_change(median, *v)).fold(0.0, f64::max);
    s.check(c, "two-ball inf constant, max deviation from median", dev, "<= 0.2", dev <= 0.2);

    let spec = NecessitySpec { two_ball: two_ball.clone(), ..Default::default() };
    let mut nt = Table::new(
        "c11_necessity",
        &["weight", "radius", "floor", "product", "product_se", "ratio_chi_b2", "ratio_dual_b1", "max_ratio"],
    );
    let good = cfg.weight_value()?;
    let bad = Weight::power(&domain, DIVERGENT_NECESSITY_T, cfg.p)?;
    let mut reps = vec![];
    for sigma in [&good, &bad] {
        let rep = necessity_probe(&ev, sigma, radii, &spec)?;
        for row in &rep.rows {
            nt.push(vec![
                rep.weight.as_str().into(),
                row.radius.into(),
                row.floor.into(),
                row.product.into(),
                row.product_se.into(),
                row.ratio_chi_b2.into(),
                row.ratio_dual_b1.into(),
                row.max_ratio.into(),
            ]);
        }
        reps.push(rep);
    }
    s.tables.push(nt);
    let spread = |rep: &crate::operators::NecessityReport, col: fn(&crate::operators::NecessityRow) -> f64| {
        let vals: Vec<f64> = rep.rows.iter().map(col).collect();
        vals.iter().copied().fold(0.0, f64::max) / vals.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let g = &reps[0];
    let ps = spread(g, |r| r.product);
    let rs = spread(g, |r| r.max_ratio);
    s.check(c, &format!("{} product, max over min across radii", g.weight), ps, "finite and <= 2", ps.is_finite() && ps <= 2.0);
    s.check(c, &format!("{} norm ratio, max over min across radii", g.weight), rs, "finite and <= 2", rs.is_finite() && rs <= 2.0);
    let b = &reps[1];
    let pg = b.min_growth(|r| r.product);
    let rg = b.min_growth(|r| r.max_ratio);
    s.check(c, &format!("{} product growth per radius halving", b.weight), pg, ">= 1.5", pg >= 1.5);
    s.check(c, &format!("{} norm ratio growth per radius halving", b.weight), rg, ">= 1.3", rg >= 1.3);
    Ok(s)
}

fn quadrature_engine(c: Option<u32>, cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let disk = Domain::disk();
    let ball = Domain::ball(2);
    let mut t = Table::new("c12_integrals", &["domain", "rule", "integrand", "value", "std_error", "exact"]);

    let g = integrate(&disk, |_| 1.0, &QuadratureSpec::polar(64, 64))?;
    t.push(vec!["unit_disk".into(), "polar(64,64)".into(), "1".into(), g.value.into(), g.std_error.into(), PI.into()]);
    let err = (g.value - PI).abs();
    s.check(c, "disk polar integral of 1, abs error", err, "<= 1e-10", err <= 1e-10);

    for (domain, exact) in [(&disk, PI), (&ball, PI * PI / 2.0)] {
        let mc = integrate(domain, |_| 1.0, &QuadratureSpec::uniform(1_000_000, derive_seed(cfg.seed, 1200)))?;
        let name = domain.kind().to_string();
        t.push(vec![name.as_str().into(), "uniform(1e6)".into(), "1".into(), mc.value.into(), mc.std_error.into(), exact.into()]);
        // the disk sampler accepts every draw, so its error is pure rounding
        let se = mc.std_error.max(1e-14 * exact);
        let ratio = (mc.value - exact).abs() / se;
        s.check(
            c,
            &format!("{name} MC integral of 1, error in standard errors"),
            ratio,
            "<= 3 (standard error floored at 1e-14 relative)",
            ratio <= 3.0,
        );
    }

    // the disk sampler integrates constants exactly, so the rate is measured on |z|^2
    let exact = PI / 2.0;
    let mut st = Table::new("c12_mc_rate", &["n", "rms_error", "mean_std_error"]);
    let (mut xs, mut ys, mut ses) = (vec![], vec![], vec![]);
    for (i, n) in [1_000usize, 10_000, 100_000].into_iter().enumerate() {
        let reps = 16;
        let mut sq = 0.0;
        let mut se = 0.0;
        for r in 0..reps {
            let spec = QuadratureSpec::uniform(n, derive_seed(cfg.seed, 1210 + (i * reps + r) as u64));
            let e = integrate(&disk, |z| z.norm_sqr(), &spec)?;
            sq += (e.value - exact).powi(2);
            se += e.std_error;
        }
        let rms = (sq / reps as f64).sqrt();
        let se = se / reps as f64;
        st.push(vec![n.into(), rms.into(), se.into()]);
        xs.push((n as f64).ln());
        ys.push(rms.ln());
        ses.push(se.ln());
    }
    let slope = crate::operators::slope(&xs, &ys);
    let se_slope = crate::operators::slope(&xs, &ses);
    s.check(c, "MC rms error slope against n", slope, "in [-0.65, -0.35]", (-0.65..=-0.35).contains(&slope));
    s.check(c, "MC standard error slope against n", se_slope, "in [-0.55, -0.45]", (-0.55..=-0.45).contains(&se_slope));
    s.tables.push(t);
    s.tables.push(st);

    let bits = |threads: usize| -> Result<Vec<u64>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        pool.install(|| {
            let mut out = vec![];
            let mc = integrate(&ball, |z| z.norm_sqr(), &QuadratureSpec::stratified(6, 200_000, cfg.seed))?;
            out.extend([mc.value.to_bits(), mc.std_error.to_bits()]);
            let set = sample_domain(&disk, &QuadratureSpec::stratified(6, 100_000, cfg.seed))?;
            out.push(set.integrate(|z| z.coords()[0].re.exp(), 1e-2).value.to_bits());
            let proj = Projector::new(KernelEvaluator::for_domain(&disk)?, QuadratureSpec::polar(32, 64))?;
            let fs = random_bundle(&disk, 4, cfg.seed);
            let v = proj.bundle(&fs, &CPoint::c1(0.7, 0.2))?;
            out.extend(v.p.iter().flat_map(|p: &Complex64| [p.re.to_bits(), p.im.to_bits()]));
            out.extend(v.positive.iter().map(|p| p.to_bits()));
            Ok(out)
        })
    };
    let reference = bits(1)?;
    let mut mismatches = 0usize;
    for threads in [2, 4] {
        mismatches += bits(threads)?.iter().zip(&reference).filter(|(a, b)| a != b).count();
    }
    s.check(c, "bitwise mismatches across 1, 2 and 4 threads", mismatches as f64, "== 0", mismatches == 0);
    Ok(s)
}

/// Triangle constant, comparability and engulfing on the configured domain.
fn geometry_extras(cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let domain = cfg.domain_value()?;
    let seed = derive_seed(cfg.seed, 1300);
    let tri = triangle_constant_probe(&domain, 20_000, seed)?;
    let (lo, hi) = comparability_probe(&domain, 2000, seed)?;
    let q1 = domain.at_depth(&CPoint::real(&unit_first(domain.dim())), 0.01);
    let mut q2 = q1.clone();
    q2.0[0] *= Complex64::from_polar(1.0, 0.002);
    let eng = engulfing_probe(&domain, &q1, &q2, 0.01, 4000, seed)?;
    let mut t = Table::new("geometry", &["quantity", "value"]);
    t.push(vec!["triangle_constant".into(), tri.into()]);
    t.push(vec!["comparability_lower".into(), lo.into()]);
    t.push(vec!["comparability_upper".into(), hi.into()]);
    t.push(vec!["engulfing_c".into(), eng.c.into()]);
    t.push(vec!["engulfing_d".into(), eng.d.into()]);
    s.check(None, "sampled quasi-triangle constant", tri, "finite", tri.is_finite());
    s.check(None, "comparability interval", hi / lo, "finite", (hi / lo).is_finite());
    s.check(None, "engulfing dilation D", eng.d, "finite", eng.d.is_finite());
    s.tables.push(t);
    Ok(s)
}

fn unit_first(dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    v
}

/// Derivative and lower-bound probes on the configured domain.
fn kernel_extras(cfg: &ExperimentConfig) -> Result<Section> {
    let mut s = Section::default();
    let domain = cfg.domain_value()?;
    let ev = cfg.evaluator()?;
    let pairs = PairSampler::default().sample(&domain, 200, derive_seed(cfg.seed, 1400));
    let der = derivative_probe(&ev, &pairs)?;
    let mut t = Table::new("kernel_extras", &["quantity", "value"]);
    t.push(vec!["order_zero".into(), der.order_zero.constant.into()]);
    for (k, (z, w)) in der.z_derivatives.iter().zip(&der.w_derivatives).enumerate() {
        t.push(vec![format!("d_z{k}").into(), z.constant.into()]);
        t.push(vec![format!("d_conj_w{k}").into(), w.constant.into()]);
    }
    let finite = der.z_derivatives.iter().chain(&der.w_derivatives).all(|f| f.constant.is_finite());
    s.check(None, "frame derivative bounds", der.order_zero.constant, "finite", finite && der.order_zero.constant.is_finite());
    let k = &cfg.knobs;
    let pairs = separated_pairs(&domain, &k.radii, k.kappa, 40, derive_seed(cfg.seed, 1401));
    let rule = if domain.dim() == 1 {
        QuadratureSpec::polar(32, 32)
    } else {
        QuadratureSpec::uniform(4000, derive_seed(cfg.seed, 1402)).with_tolerance(0.05)
    };
    let lb = lower_bound_probe(&ev, k.kappa, k.eps0, &pairs, &rule)?;
    t.push(vec!["lower_bound_inf".into(), lb.constant.into()]);
    s.check(None, "kernel lower bound inf", lb.constant, "> 0", lb.constant > 0.0);
    s.tables.push(t);
    Ok(s)
}

/// Auxiliary diagnostics attached to a subcommand, beyond its criteria.
pub fn run_extras(subcommand: &str, cfg: &ExperimentConfig) -> Result<Option<Section>> {
    Ok(match subcommand {
        "geometry-check" => Some(geometry_extras(cfg)?),
        "kernel-check" => Some(kernel_extras(cfg)?),
        "bp" => Some(bp_extras(cfg)?),
        _ => None,
    })
}
