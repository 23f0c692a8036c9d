//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use catlab::parallel::{default_threads, run_monte_carlo_parallel};
use catlab::scenario::load_scenario;
use catlab_core::linalg::C64;
use catlab_core::protocols::stats::chi_square_gof;
use catlab_core::protocols::{build_scenario, discriminate, enumerate, leaf_mass, ProtocolSpec, Scenario};
use catlab_core::qstate::{DensityMatrix, HilbertSpace, QuantumState, State, StateVector};
use catlab_core::rng::RandomStream;
use catlab_core::{nogo_verdict, outcome_distribution, ProjectiveMeasurement, PSD_FLOOR};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn shipped(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.scn"));
    load_scenario(&path).unwrap_or_else(|e| panic!("{e}")).0.scenario
}

fn tenths() -> impl Iterator<Item = f64> {
    (1..=9).map(|t| t as f64 / 10.0)
}

fn cat_candidate(a: f64, b: f64) -> StateVector {
    StateVector::from_real(&HilbertSpace::new(["alive", "dead"]).unwrap(), &[a, b]).unwrap()
}

fn nogo_witness() -> Outcome {
    let sc = build_scenario("cat").map_err(|e| e.to_string())?;
    let (alive, dead) = (sc.pure_state("alive").unwrap(), sc.pure_state("dead").unwrap());
    let mut worst: f64 = 0.0;
    for a2 in tenths() {
        let s = cat_candidate(a2.sqrt(), (1.0 - a2).sqrt());
        let v = nogo_verdict(&sc.lab, "P_S", &s.projector(), alive, dead, 8).map_err(|e| e.to_string())?;
        let w = v.witness.ok_or(format!("|a|^2={a2}: no witness"))?;
        if w.depth() != 2 {
            return Err(format!("|a|^2={a2}: witness depth {}", w.depth()));
        }
        let err = (w.probability - a2 * (1.0 - a2)).abs();
        if err > 1e-10 {
            return Err(format!("|a|^2={a2}: p={} expected {}", w.probability, a2 * (1.0 - a2)));
        }
        worst = worst.max(err);
    }
    Ok(format!("9 candidates, depth 2, max |p - |a|^2|b|^2| = {worst:.1e}"))
}

fn degenerate_safety() -> Outcome {
    let sc = build_scenario("cat").map_err(|e| e.to_string())?;
    let (alive, dead) = (sc.pure_state("alive").unwrap(), sc.pure_state("dead").unwrap());
    for (a, b) in [(0.0, 1.0), (1.0, 0.0)] {
        let v = nogo_verdict(&sc.lab, "P_S", &cat_candidate(a, b).projector(), alive, dead, 6).map_err(|e| e.to_string())?;
        if v.violated {
            return Err(format!("a={a} b={b} produced a witness"));
        }
    }
    Ok("a=0 and b=0 candidates: violated=false at depth 6".into())
}

// Alive mass from the dead state by walking every branch of k rounds.
fn branch_oracle(a2: f64, k: usize) -> f64 {
    let (a, b) = (a2.sqrt(), (1.0 - a2).sqrt());
    let mut alive = 0.0;
    let mut still_dead = 1.0;
    for _ in 0..k {
        // |<s|D>|^2 |<L|s>|^2 + |<s'|D>|^2 |<L|s'>|^2 with s' = b|L> - a|D>
        let succeed = b * b * a * a + a * a * b * b;
        alive += still_dead * succeed;
        still_dead *= 1.0 - succeed;
    }
    alive
}

fn amplification() -> Outcome {
    let sc = build_scenario("cat").map_err(|e| e.to_string())?;
    let (alive, dead) = (sc.pure_state("alive").unwrap(), sc.pure_state("dead").unwrap());
    let mut worst: f64 = 0.0;
    for a2 in tenths() {
        let s = cat_candidate(a2.sqrt(), (1.0 - a2).sqrt());
        let lab = sc.lab.adjoin("P_S", ProjectiveMeasurement::from_states(&[s], &["S"]).unwrap()).map_err(|e| e.to_string())?;
        let mut previous = 0.0;
        for k in 1..=12 {
            let tree = enumerate(&ProtocolSpec::resurrection("P_S", "P_L", "alive", k), &lab, dead).map_err(|e| e.to_string())?;
            let mass = leaf_mass(&tree, alive);
            let closed = 1.0 - (1.0 - 2.0 * a2 * (1.0 - a2)).powi(k as i32);
            let err = (mass - closed).abs().max((mass - branch_oracle(a2, k)).abs());
            if err > 1e-10 {
                return Err(format!("|a|^2={a2} k={k}: mass {mass} closed form {closed}"));
            }
            if mass < previous {
                return Err(format!("|a|^2={a2}: mass decreased at k={k}"));
            }
            if (tree.leaf_total() + tree.pruned_mass - 1.0).abs() > 1e-8 {
                return Err(format!("|a|^2={a2} k={k}: tree mass not conserved"));
            }
            worst = worst.max(err);
            previous = mass;
        }
    }
    let h = 0.5f64.sqrt();
    let lab = sc.lab.adjoin("P_S", ProjectiveMeasurement::from_states(&[cat_candidate(h, h)], &["S"]).unwrap()).unwrap();
    let tree = enumerate(&ProtocolSpec::resurrection("P_S", "P_L", "alive", 10), &lab, dead).map_err(|e| e.to_string())?;
    let k10 = leaf_mass(&tree, alive);
    if k10 <= 0.999 {
        return Err(format!("k=10 mass {k10} not above 0.999"));
    }
    Ok(format!("108 (|a|^2, k) pairs, max error {worst:.1e}, k=10 balanced mass {k10:.10}"))
}

fn discrimination_table() -> Outcome {
    let rows = [
        ("composite", "psi_s_plus", "rho_s", "P_Sch+", 0.5),
        ("composite", "psi_s_plus", "rho_s", "basis", 0.0),
        ("cat", "psi_cat_plus", "rho_cat", "pm", 0.5),
        ("cat", "psi_cat_plus", "rho_cat", "P_L", 0.0),
        ("photon", "x_plus", "rho_ph", "polarizer_45", 0.5),
        ("photon", "x_plus", "rho_ph", "polarizer_0", 0.0),
    ];
    let mut out = Vec::new();
    for (scenario, a, b, m, expected) in rows {
        let sc = shipped(scenario);
        let (sa, sb) = (sc.state(a).unwrap(), sc.state(b).unwrap());
        let r = discriminate(sa, sb, sc.measurement(m).unwrap(), m, 1_000, 5).map_err(|e| e.to_string())?;
        if (r.total_variation - expected).abs() > 1e-10 {
            return Err(format!("{scenario}: TV({a}, {b}) under {m} = {} expected {expected}", r.total_variation));
        }
        out.push(format!("{m}={expected}"));
    }
    Ok(format!("TV {}", out.join(", ")))
}

fn reduced_state() -> Outcome {
    let comp = build_scenario("composite").map_err(|e| e.to_string())?;
    let cat = build_scenario("cat").map_err(|e| e.to_string())?;
    let reduced = DensityMatrix::pure(comp.pure_state("psi_s_plus").unwrap()).partial_trace(1).map_err(|e| e.to_string())?;
    let rho_cat = cat.state("rho_cat").unwrap().to_density();
    let diff = reduced.matrix().max_abs_diff(rho_cat.matrix());
    if diff > 1e-12 {
        return Err(format!("max entry difference {diff:e}"));
    }
    Ok(format!("tr_device |Psi+><Psi+| vs rho_cat: max difference {diff:.1e}"))
}

fn statistical_consistency() -> Outcome {
    const N: u64 = 100_000;
    let threads = default_threads();
    let mut checked = 0;
    let mut min_p: f64 = 1.0;
    for name in ["cat", "composite", "photon", "stone-bread"] {
        let sc = shipped(name);
        for (pname, proto) in &sc.protocols {
            let lab = sc.lab_for(proto).map_err(|e| e.to_string())?;
            let initial: &State = sc.state(proto.initial.as_deref().ok_or(format!("{name}/{pname}: no initial state"))?).unwrap();
            let tree = enumerate(&proto.spec, &lab, initial).map_err(|e| e.to_string())?;
            let classes = tree.leaf_classes();
            for seed in [1, 2, 3] {
                let hist = run_monte_carlo_parallel(&proto.spec, &lab, initial, N, seed, threads).map_err(|e| e.to_string())?;
                let mut observed = Vec::new();
                let mut expected = Vec::new();
                for c in &classes {
                    let count = hist.count(&c.key);
                    let freq = count as f64 / N as f64;
                    let bound = 4.0 * (c.probability * (1.0 - c.probability) / N as f64).sqrt();
                    if (freq - c.probability).abs() > bound + 1e-12 {
                        return Err(format!("{name}/{pname} seed {seed}: freq {freq} vs p {} (bound {bound:.2e})", c.probability));
                    }
                    observed.push(count);
                    expected.push(c.probability);
                }
                let matched: u64 = observed.iter().sum();
                if matched != N {
                    return Err(format!("{name}/{pname} seed {seed}: {} samples outside the exact support", N - matched));
                }
                let chi = chi_square_gof(&observed, &expected);
                if chi.p_value <= 0.001 {
                    return Err(format!("{name}/{pname} seed {seed}: chi-square p = {}", chi.p_value));
                }
                min_p = min_p.min(chi.p_value);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} protocol/seed runs at n=1e5, all within 4 sigma, min chi-square p = {min_p:.3}"))
}

fn random_vector(rng: &mut RandomStream, dim: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| C64::new(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0)).collect();
        if v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3 {
            return v;
        }
    }
}

fn random_basis(rng: &mut RandomStream, dim: usize) -> Vec<Vec<C64>> {
    'retry: loop {
        let mut out: Vec<Vec<C64>> = Vec::new();
        for _ in 0..dim {
            let mut v = random_vector(rng, dim);
            for u in &out {
                let c: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n < 1e-3 {
                continue 'retry;
            }
            v.iter_mut().for_each(|z| *z /= n);
            out.push(v);
        }
        return out;
    }
}

fn invariant_suite() -> Outcome {
    const EPS: f64 = 1e-9;
    let mut rng = RandomStream::new(2024, 0);
    for case in 0..1000 {
        let dim = 2 + case % 4;
        let space = HilbertSpace::new((0..dim).map(|i| format!("e{i}"))).unwrap();
        let fail = |what: &str| Err(format!("case {case} (dim {dim}): {what}"));

        let psi = StateVector::new(&space, random_vector(&mut rng, dim)).map_err(|e| e.to_string())?;
        if (psi.norm_sqr() - 1.0).abs() > EPS {
            return fail("state not normalized");
        }
        let parts: Vec<(f64, StateVector)> = (0..3)
            .map(|_| (rng.uniform() + 0.01, StateVector::new(&space, random_vector(&mut rng, dim)).unwrap()))
            .collect();
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let parts: Vec<_> = parts.into_iter().map(|(w, v)| (w / total, v)).collect();
        let rho = DensityMatrix::mixture(&parts).map_err(|e| e.to_string())?;
        if (rho.trace() - C64::new(1.0, 0.0)).norm() > EPS || !rho.matrix().is_hermitian(EPS) {
            return fail("mixture trace or Hermiticity");
        }
        if rho.eigenvalues().iter().any(|&e| e < PSD_FLOOR) {
            return fail("mixture not PSD");
        }

        let basis = random_basis(&mut rng, dim);
        let take = 1 + case % dim;
        let states: Vec<StateVector> = basis[..take].iter().map(|v| StateVector::new(&space, v.clone()).unwrap()).collect();
        let labels: Vec<String> = (0..take).map(|i| format!("m{i}")).collect();
        let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
        let m = ProjectiveMeasurement::from_states(&states, &labels).map_err(|e| e.to_string())?;
        let mut sum = catlab_core::linalg::CMatrix::zeros(dim);
        for o in m.outcomes() {
            let p = o.projector.matrix();
            if !p.is_hermitian(EPS) || (p * p).max_abs_diff(p) > EPS {
                return fail("projector not Hermitian idempotent");
            }
            sum = &sum + p;
        }
        if sum.max_abs_diff(&catlab_core::linalg::CMatrix::identity(dim)) > EPS {
            return fail("projectors do not sum to identity");
        }
        for source in [State::Pure(psi.clone()), State::Mixed(rho.clone())] {
            let dist = outcome_distribution(&m, &source).map_err(|e| e.to_string())?;
            if (dist.iter().map(|r| r.probability).sum::<f64>() - 1.0).abs() > EPS {
                return fail("probabilities do not sum to 1");
            }
            for (i, rec) in dist.iter().enumerate() {
                let Some(post) = &rec.post_state else { continue };
                if post.validate().is_err() {
                    return fail("post state invalid");
                }
                let again = outcome_distribution(&m, post).map_err(|e| e.to_string())?;
                if (again[i].probability - 1.0).abs() > EPS {
                    return fail("measurement not repeatable");
                }
            }
        }
    }
    Ok("1000 random states, mixtures and measurements".into())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 no-go witness", nogo_witness, Duration::from_secs(1)),
        ("2 degenerate safety", degenerate_safety, Duration::from_secs(1)),
        ("3 amplification", amplification, Duration::from_secs(5)),
        ("4 discrimination table", discrimination_table, Duration::from_secs(1)),
        ("5 reduced state identity", reduced_state, Duration::from_secs(1)),
        ("6 statistical consistency", statistical_consistency, Duration::from_secs(30)),
        ("7 invariant suite", invariant_suite, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > budget => Err(format!("{detail}; took {took:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} ({took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} ({took:.2?})");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
