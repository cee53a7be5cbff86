//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wegner_core::experiments::{
    run_ise, run_spectral_minimum, run_stubborn, run_stubborn_exponential, run_uncertainty, run_wegner,
    ExperimentReport, IseParams, SpectralMinParams, StubbornExpParams, StubbornParams, UncertaintyParams,
    Verdict, WegnerParams,
};
use wegner_core::grid_operator::{build_free_laplacian, max_spectral_gap_below, Boundary, BoxSpec};
use wegner_core::random_model::{construct_diluted_minorant, AlloyModel, Distribution};
use wegner_core::spectral_engine::{eigs_below, EigenOptions};
use wegner_core::thick_sets::{stripes, CantorSpec, RasterSet, WindowSpec};

type Outcome = Result<String, String>;

fn check(ok: bool, pass: String, fail: String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail)
    }
}

fn within(t: Instant, budget: Duration) -> Result<(), String> {
    if t.elapsed() <= budget {
        Ok(())
    } else {
        Err(format!("took {:.1?}, budget {budget:.0?}", t.elapsed()))
    }
}

fn uniform() -> Distribution {
    Distribution::Uniform { lo: 0.0, hi: 1.0 }
}

fn clause_summary(r: &ExperimentReport) -> String {
    r.clauses.iter().map(|c| format!("{}={}", c.name, c.verdict)).collect::<Vec<_>>().join(" ")
}

fn ac1_free_spectrum() -> Outcome {
    let t = Instant::now();
    let bx = BoxSpec::<f64>::centered(1, PI, 2000, Boundary::Dirichlet).map_err(|e| e.to_string())?;
    let h = build_free_laplacian(&bx).map_err(|e| e.to_string())?;
    let eig = eigs_below(&h, 102.0, &EigenOptions::default()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for k in 1..=10 {
        let want = (k * k) as f64;
        worst = worst.max((eig.eigenvalues[k - 1] - want).abs() / want);
    }
    within(t, Duration::from_secs(10))?;
    check(
        worst < 1e-3 && eig.eigenvalues.len() >= 10,
        format!("first 10 eigenvalues within {:.2e} relative of k² ({:.2?})", worst, t.elapsed()),
        format!("worst relative error {worst:.3e}"),
    )
}

fn ac2_gap_bound() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut violations = Vec::new();
    for d in [1, 2] {
        for l in [1.0, 2.0, 4.0, 8.0] {
            for e in [0.0, 1.0, 5.0, 20.0] {
                let gap = max_spectral_gap_below(l, d, e);
                let bound = 6.0 * PI * (e + 1.0).sqrt() / l;
                worst = worst.max(gap / bound);
                if gap > bound {
                    violations.push(format!("(d={d}, L={l}, E={e}): gap {gap:.4} > {bound:.4}"));
                }
                cases += 1;
            }
        }
    }
    within(t, Duration::from_secs(1))?;
    check(
        violations.is_empty(),
        format!("{cases} cases, max gap/bound = {worst:.4}"),
        format!("gap exceeds bound in {} of {cases} cases: {}", violations.len(), violations.join(", ")),
    )
}

fn ac3_uncertainty() -> Outcome {
    let t = Instant::now();
    let s = stripes(1.0 / 3.0, 1.0, 96).map_err(|e| e.to_string())?;
    let w = WindowSpec::new(vec![1.0], 1.0 / 3.0).map_err(|e| e.to_string())?;
    let p = UncertaintyParams {
        e_list: vec![25.0, 100.0, 225.0, 400.0],
        l_list: vec![2.0, 3.0, 4.0],
        bc: Boundary::Dirichlet,
        mesh: 64,
    };
    let r = run_uncertainty(&s, &w, &p).map_err(|e| e.to_string())?;
    let at100: Vec<f64> = p.l_list.iter().map(|l| r.find(&format!("L={l};E=100"), "lambda_min").unwrap().value).collect();
    let (lo, hi) = at100.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let full = RasterSet::full(vec![0.0], vec![1.0], vec![8], true).map_err(|e| e.to_string())?;
    let rf = run_uncertainty(
        &full,
        &WindowSpec::new(vec![1.0], 1.0).unwrap(),
        &UncertaintyParams { e_list: vec![100.0], ..p.clone() },
    )
    .map_err(|e| e.to_string())?;
    let full_dev = rf.records.iter().filter(|x| x.statistic == "lambda_min").map(|x| (x.value - 1.0).abs()).fold(0.0, f64::max);
    let corr = r.records.iter().filter(|x| x.statistic == "correlation").map(|x| x.value).fold(1.0, f64::min);
    let ok = lo > 0.0 && hi / lo <= 2.0 && full_dev <= 1e-10 && corr >= 0.9;
    check(
        ok,
        format!(
            "λ(E=100) over L = {:?}, ratio {:.3}; full set |λ−1| = {:.1e}; min correlation {:.4}; K̂ = {:.3} ({:.1?})",
            at100.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>(),
            hi / lo,
            full_dev,
            corr,
            r.fitted["K"],
            t.elapsed()
        ),
        format!("λ(E=100) = {at100:?}, full dev {full_dev:e}, correlation {corr:.4}; {}", clause_summary(&r)),
    )
}

fn ac4_wegner() -> Outcome {
    let t = Instant::now();
    let p = WegnerParams {
        e0: 30.0,
        eps_list: vec![0.4, 0.2, 0.1],
        l_list: vec![8.0, 16.0, 32.0],
        replicas: 200,
        centers: None,
        mesh: 16,
    };
    let covering = AlloyModel::covering(1, 40, uniform()).map_err(|e| e.to_string())?;
    let a = run_wegner(&covering, &p, 2024).map_err(|e| e.to_string())?;
    let cantor = AlloyModel::cantor_translates(1, 40, &CantorSpec::smith_volterra(3), 512, uniform())
        .map_err(|e| e.to_string())?;
    let b = run_wegner(&cantor, &WegnerParams { mesh: 32, ..p.clone() }, 2024).map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(15 * 60))?;
    check(
        a.overall() == Verdict::Pass && b.overall() == Verdict::Pass,
        format!(
            "covering C_W = {:.3}, fat-Cantor C_W = {:.3}; both without upward trend ({:.1?})",
            a.fitted["C_W"],
            b.fitted["C_W"],
            t.elapsed()
        ),
        format!(
            "covering: {} | fat Cantor: {}",
            a.clauses.iter().map(|c| format!("[{}] {}: {}", c.verdict, c.name, c.detail)).collect::<Vec<_>>().join("; "),
            b.clauses.iter().map(|c| format!("[{}] {}: {}", c.verdict, c.name, c.detail)).collect::<Vec<_>>().join("; "),
        ),
    )
}

fn dilution() -> Result<AlloyModel, String> {
    AlloyModel::geometric_dilution(1, 130, uniform()).map_err(|e| e.to_string())
}

fn stubborn_params() -> StubbornParams {
    StubbornParams { e: 5.0, l: 8.0, box_candidates: 3, replicas: 100, mesh: 16, search_resolution: 8 }
}

fn exp_params() -> StubbornExpParams {
    StubbornExpParams { l: 6.0, eigen_index: 1, box_candidates: 3, replicas: 100, mesh: 16, search_resolution: 8 }
}

fn ac5_stubborn() -> Outcome {
    let t = Instant::now();
    let r = run_stubborn(&dilution()?, &stubborn_params(), 7).map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(600))?;
    check(
        r.overall() == Verdict::Pass,
        format!("{} ({:.1?})", r.clauses[0].detail, t.elapsed()),
        r.summary(),
    )
}

fn ac6_exponential() -> Outcome {
    let t = Instant::now();
    let r = run_stubborn_exponential(&dilution()?, &exp_params(), 7).map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(600))?;
    check(
        r.overall() == Verdict::Pass,
        format!("E = {:.6}: {} ({:.1?})", r.fitted["E"], r.clauses[0].detail, t.elapsed()),
        r.summary(),
    )
}

fn ac7_minorant() -> Outcome {
    let t = Instant::now();
    let model = AlloyModel::covering(1, 40, uniform()).map_err(|e| e.to_string())?;
    let w = construct_diluted_minorant(&model, 4, 16).map_err(|e| e.to_string())?;
    let cell = 1.0 / 16.0;
    let sizes_ok = w.cells.iter().all(|c| (c.t.measure() - w.params.gamma_hat).abs() <= cell);
    let bx = BoxSpec::<f64>::with_mesh(1, 60.0, vec![0.0], 16, Boundary::Dirichlet).map_err(|e| e.to_string())?;
    let mut dominated = true;
    for rep in 0..100 {
        let v = model.sample_potential(11, rep, &bx).map_err(|e| e.to_string())?;
        let wv = w.potential(&model, 11, rep, &bx).map_err(|e| e.to_string())?;
        dominated &= wv.iter().zip(&v).all(|(a, b)| a <= b);
    }
    within(t, Duration::from_secs(60))?;
    check(
        sizes_ok && dominated && w.params.m > 0.0,
        format!(
            "N = {}, γ̂ = {}, {} cells, ε₁ = {:.6}, m = {:.4}; W ≤ V on 100 samples ({:.1?})",
            w.params.n,
            w.params.gamma_hat,
            w.cells.len(),
            w.params.eps1,
            w.params.m,
            t.elapsed()
        ),
        format!("sizes {sizes_ok}, dominated {dominated}, m = {}", w.params.m),
    )
}

fn ise_params() -> IseParams {
    IseParams { l_list: vec![8.0, 16.0], replicas: 200, mesh: 16 }
}

fn ac8_ise() -> Outcome {
    let t = Instant::now();
    let model = AlloyModel::covering(1, 40, uniform()).map_err(|e| e.to_string())?;
    let r = run_ise(&model, &ise_params(), 13).map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(15 * 60))?;
    check(
        r.overall() == Verdict::Pass,
        format!("{}; c0 = {:.4} ({:.1?})", r.clauses[0].detail, r.fitted["c0"], t.elapsed()),
        r.summary(),
    )
}

fn specmin_params() -> SpectralMinParams {
    SpectralMinParams { eps_list: vec![0.01], l: 10.0, replicas: 100, mesh: 16 }
}

fn ac9_spectral_minimum() -> Outcome {
    let t = Instant::now();
    let model = AlloyModel::covering(1, 40, uniform()).map_err(|e| e.to_string())?;
    let r = run_spectral_minimum(&model, &specmin_params(), 17).map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(60))?;
    check(
        r.overall() == Verdict::Pass,
        format!("{} ({:.1?})", clause_summary(&r), t.elapsed()),
        r.summary(),
    )
}

fn ac10_modulus() -> Outcome {
    let t = Instant::now();
    let n = 1_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cases = [
        (uniform(), 0.5),
        (Distribution::Bernoulli { v0: 0.0, v1: 1.0, p: 0.3 }, 1.0),
    ];
    let mut worst = 0.0f64;
    for (dist, argmax) in cases {
        let samples: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        for eps in [0.05, 0.1, 0.5] {
            let s = dist.modulus(eps);
            let se = (s * (1.0 - s) / n as f64).sqrt();
            // the window at the maximizing center, plus a sweep that must stay below s
            let hits = |c: f64| samples.iter().filter(|&&x| (x - c).abs() <= eps / 2.0).count() as f64 / n as f64;
            let z = (hits(argmax) - s).abs() / se;
            worst = worst.max(z);
            for k in 0..=10 {
                let c = -0.25 + 1.5 * k as f64 / 10.0;
                let over = (hits(c) - s) / se;
                worst = worst.max(over);
            }
        }
    }
    within(t, Duration::from_secs(60))?;
    check(
        worst <= 3.0,
        format!("largest deviation {worst:.2} standard errors ({:.1?})", t.elapsed()),
        format!("deviation {worst:.2} standard errors"),
    )
}

fn ac11_determinism() -> Outcome {
    let t = Instant::now();
    let model = AlloyModel::covering(1, 40, uniform()).map_err(|e| e.to_string())?;
    let wp = WegnerParams {
        e0: 30.0,
        eps_list: vec![0.4, 0.2, 0.1],
        l_list: vec![8.0, 16.0, 32.0],
        replicas: 200,
        centers: None,
        mesh: 16,
    };
    let runs = |threads: usize| -> Result<Vec<String>, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        pool.install(|| {
            let dil = dilution()?;
            let reports = [
                run_wegner(&model, &wp, 2024),
                run_stubborn(&dil, &stubborn_params(), 7),
                run_stubborn_exponential(&dil, &exp_params(), 7),
                run_ise(&model, &ise_params(), 13),
                run_spectral_minimum(&model, &specmin_params(), 17),
            ];
            reports
                .into_iter()
                .map(|r| r.and_then(|r| r.to_csv()).map_err(|e| e.to_string()))
                .collect()
        })
    };
    let a = runs(1)?;
    let b = runs(4)?;
    let same = a == b;
    check(
        same,
        format!("{} reports byte-identical across reruns with 1 and 4 workers ({:.1?})", a.len(), t.elapsed()),
        "reports differ between reruns".into(),
    )
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("AC-1", "free-spectrum oracle", ac1_free_spectrum),
        ("AC-2", "gap bound", ac2_gap_bound),
        ("AC-3", "uncertainty positivity and stability", ac3_uncertainty),
        ("AC-4", "Wegner scaling", ac4_wegner),
        ("AC-5", "stubborn eigenvalues", ac5_stubborn),
        ("AC-6", "exponential stubbornness", ac6_exponential),
        ("AC-7", "diluted minorant", ac7_minorant),
        ("AC-8", "initial-scale trend", ac8_ise),
        ("AC-9", "spectral minimum", ac9_spectral_minimum),
        ("AC-10", "modulus oracle", ac10_modulus),
        ("AC-11", "determinism", ac11_determinism),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if filter.as_ref().is_some_and(|f| !id.contains(f.as_str()) && !name.contains(f.as_str())) {
            continue;
        }
        match run() {
            Ok(detail) => println!("[{id}] PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[{id}] FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
