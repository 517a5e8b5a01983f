use crate::config::{BondSourceName, ConfigError, CorrConfig, PercConfig, PercMode, ProtocolConfig, Restart, WalkConfig};
use crate::output::{csv_writer, fmt, log, sink};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use slocc_mbqc::mps::nun_ring_length;
use slocc_mbqc::percolation::{bundo_spanning, crossing_of, site_spanning_curve, spanning_curve, BondSource, PercolationEstimate};
use slocc_mbqc::protocol::{
    bub_rotate, bundo_vertical, cz_equivalence_residual, nun_rotate, BubChain, BundoMode, EntangleFragment, NunChain, OutcomeSource,
    RotationTarget,
};
use slocc_mbqc::qmath::{d_theta, hadamard, ket0, random_unitary, rz_re, Mat2};
use slocc_mbqc::scalar::{c, C};
use slocc_mbqc::slocc::{b_canon, classify, n_canon};
use slocc_mbqc::verify::{run_checks, Formulas};
use slocc_mbqc::walk::{crossing, default_lambda_grid, per_k_curves};
use slocc_mbqc::Error;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

#[derive(Debug)]
pub enum Failure {
    Check(String),
    Config(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::NotNType | Error::NotBType | Error::SingularInput | Error::TooManyQubits { .. } => {
                Failure::Config(e.to_string())
            }
            e => Failure::Check(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Check(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Check(format!("csv: {e}"))
    }
}

pub type Outcome = Result<(), Failure>;

pub fn verify(filter: Option<&str>, out: Option<&Path>) -> Outcome {
    let reports = run_checks(filter, &Formulas::default());
    if reports.is_empty() {
        return Err(Failure::Config(format!("no check matches `{}`", filter.unwrap_or(""))));
    }
    let mut w = sink(out)?;
    for r in &reports {
        writeln!(w, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
    }
    w.flush()?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    log("verify", json!({ "checks": reports.len(), "failed": failed }));
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} check(s) failed", failed.len())))
    }
}

pub fn fig_corrlength(cfg: &CorrConfig, out: Option<&Path>) -> Outcome {
    let thetas = cfg.thetas.points();
    let gammas = cfg.gammas.points();
    let jobs: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| gammas.iter().map(move |&g| (t, g))).collect();
    let rows: Vec<_> = jobs.par_iter().map(|&(t, g)| (t, g, nun_ring_length(cfg.ring, t, g))).collect();
    let mut w = csv_writer(out, &["theta", "gamma", "L", "residual", "points", "flag"])?;
    let mut flagged = 0;
    for (t, g, r) in rows {
        let (l, res, pts, flag) = match r {
            Ok(f) => (f.length, f.residual, f.points, "ok".to_string()),
            Err(e) => {
                flagged += 1;
                let flag = match e {
                    Error::InsufficientDecay(_) => "insufficient_decay".to_string(),
                    e => e.to_string(),
                };
                (f64::NAN, f64::NAN, 0, flag)
            }
        };
        w.write_record([fmt(t), fmt(g), fmt(l), fmt(res), pts.to_string(), flag])?;
    }
    w.flush()?;
    log("fig-corrlength", json!({ "ring": cfg.ring, "rows": jobs.len(), "flagged": flagged }));
    Ok(())
}

pub fn fig_walk(cfg: &WalkConfig, out: Option<&Path>) -> Outcome {
    let lambdas = cfg.lambdas.as_ref().map_or_else(default_lambda_grid, |g| g.points());
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Failure::Config(format!("lambda {bad} outside (0, 1)")));
    }
    let curves = per_k_curves(cfg.n, &lambdas);
    let mut w = csv_writer(out, &["lambda", "k", "p_k", "cumulative"])?;
    for d in &curves {
        for (k, (p, cum)) in d.per_k.iter().zip(d.cumulative()).enumerate() {
            w.write_record([fmt(d.lambda), (k + 1).to_string(), fmt(*p), fmt(cum)])?;
        }
    }
    w.flush()?;
    let star = crossing(cfg.n, cfg.target).ok();
    log("fig-walk", json!({ "n": cfg.n, "points": lambdas.len(), "target": cfg.target, "lambda_star": star }));
    Ok(())
}

pub fn percolation(cfg: &PercConfig, seed: u64, out: Option<&Path>) -> Outcome {
    let grid = cfg.grid.points();
    let control = if cfg.mode == PercMode::Bundo { "lambda" } else { "p" };
    let mut w = csv_writer(out, &["L", control, "trials", "spanning_fraction", "stderr"])?;
    for &l in &cfg.sizes {
        let s = seed.wrapping_add(l as u64);
        let curve: Vec<PercolationEstimate> = match cfg.mode {
            PercMode::Bond => spanning_curve(l, &grid, cfg.trials, s)?,
            PercMode::Site => site_spanning_curve(l, &grid, cfg.trials, s)?,
            PercMode::Bundo => {
                let source = match cfg.source {
                    BondSourceName::Formula => BondSource::Formula,
                    BondSourceName::Walker => BondSource::Walker,
                };
                grid.iter()
                    .enumerate()
                    .map(|(i, &lam)| bundo_spanning(l, lam, cfg.n_budget, cfg.trials, s.wrapping_add(1_000_003 * i as u64), source))
                    .collect::<slocc_mbqc::Result<_>>()?
            }
        };
        for (x, e) in grid.iter().zip(&curve) {
            w.write_record([l.to_string(), fmt(*x), e.trials.to_string(), fmt(e.spanning_fraction), fmt(e.stderr)])?;
        }
        let along: Vec<PercolationEstimate> = grid.iter().zip(&curve).map(|(x, e)| PercolationEstimate { p: *x, ..*e }).collect();
        let cross = crossing_of(&along, 0.5);
        log("percolation", json!({ "L": l, "mode": format!("{:?}", cfg.mode).to_lowercase(), "half_crossing": cross }));
    }
    w.flush()?;
    Ok(())
}

fn bloch(angles: Option<[f64; 2]>) -> [C<f64>; 2] {
    match angles {
        None => ket0(),
        Some([t, p]) => [c((t / 2.0).cos(), 0.0), C::from_polar((t / 2.0).sin(), p)],
    }
}

/// Site operators for nun chains, drawn in order so that an extended chain
/// keeps its prefix.
struct NunOps {
    rng: ChaCha8Rng,
    theta: Option<f64>,
    gamma: f64,
    range: [f64; 2],
}

impl NunOps {
    fn site(&mut self, j: usize) -> Mat2<f64> {
        match self.theta {
            Some(t) if j % 2 == 0 => d_theta(t) * hadamard() * rz_re(self.gamma),
            Some(_) => Mat2::identity(),
            None => {
                let u = random_unitary(&mut self.rng);
                if j % 2 == 0 {
                    let t = self.rng.random_range(self.range[0]..self.range[1]);
                    u * d_theta(t) * hadamard() * rz_re(self.rng.random_range(0.0..2.0 * PI))
                } else {
                    u
                }
            }
        }
    }
}

fn random_n(r: &mut ChaCha8Rng, theta: Option<f64>) -> Mat2<f64> {
    let t = theta.unwrap_or_else(|| r.random_range(PI / 8.0..3.0 * PI / 8.0));
    random_unitary(r) * d_theta(t) * hadamard() * rz_re(r.random_range(0.0..2.0 * PI))
}

pub fn run_protocol(cfg: &ProtocolConfig, seed: u64, out: Option<&Path>) -> Outcome {
    let mut w = sink(out)?;
    let mut emit = |v: serde_json::Value| -> std::io::Result<()> { writeln!(w, "{v}") };
    let source = |outcomes: &Option<Vec<u8>>| outcomes.clone().map_or(OutcomeSource::Seed(seed), OutcomeSource::Forced);
    match cfg {
        ProtocolConfig::Nun { sites, theta, gamma, theta_range, target, input, outcomes, on_exhausted, attempts } => {
            if *sites < 2 || *attempts == 0 {
                return Err(Failure::Config("nun protocol needs at least two sites and one attempt".into()));
            }
            let mut ops = NunOps {
                rng: ChaCha8Rng::seed_from_u64(seed),
                theta: *theta,
                gamma: *gamma,
                range: theta_range.unwrap_or([PI / 8.0, 3.0 * PI / 8.0]),
            };
            let tgt = RotationTarget::new(target[0], target[1], target[2]);
            let psi = bloch(*input);
            let tries = if *on_exhausted == Restart::Stop { 1 } else { *attempts };
            let mut chain_ops: Vec<Mat2<f64>> = Vec::new();
            let mut run = None;
            for attempt in 0..tries {
                let src = match (outcomes, on_exhausted) {
                    (Some(v), _) => OutcomeSource::Forced(v.clone()),
                    (None, Restart::Fresh) => OutcomeSource::Seed(seed.wrapping_add(attempt as u64)),
                    (None, _) => OutcomeSource::Seed(seed),
                };
                if *on_exhausted != Restart::Continue {
                    chain_ops.clear();
                }
                let base = chain_ops.len();
                chain_ops.extend((0..*sites).map(|j| ops.site(base + j)));
                let r = nun_rotate(&NunChain::new(chain_ops.clone())?, &tgt, psi, &src, chain_ops.len() - 1)?;
                if *on_exhausted == Restart::Fresh || attempt + 1 == tries || r.success() {
                    for e in &r.record.entries {
                        let mut v = serde_json::to_value(e).expect("serialisable");
                        v["attempt"] = json!(attempt);
                        emit(v)?;
                    }
                }
                let done = r.success();
                run = Some((attempt, r));
                if done {
                    break;
                }
            }
            let (attempt, run) = run.expect("at least one attempt");
            emit(json!({ "summary": {
                "protocol": "nun",
                "on_exhausted": format!("{on_exhausted:?}").to_lowercase(),
                "attempts": attempt + 1,
                "success": run.success(),
                "sites_used": run.sites_used,
                "fidelity": run.success().then(|| run.fidelity(&tgt, psi)),
                "path_probability": run.record.path_probability(),
            }}))?;
        }
        ProtocolConfig::Bub { thetas, eta, input, outcomes, tol } => {
            let chain = BubChain::from_thetas(thetas)?;
            let psi = bloch(*input);
            let run = bub_rotate(&chain, *eta, psi, &source(outcomes), chain.len().saturating_sub(1), *tol)?;
            for e in &run.record.entries {
                emit(serde_json::to_value(e).expect("serialisable"))?;
            }
            emit(json!({ "summary": {
                "protocol": "bub",
                "success": run.success(),
                "sites_used": run.sites_used,
                "walker": run.walker,
                "fidelity": run.success().then(|| run.fidelity(*eta, psi)),
                "path_probability": run.record.path_probability(),
            }}))?;
        }
        ProtocolConfig::Bundo { lambda, max_even, statevec_sites } => {
            let mode = match statevec_sites {
                Some(n) => BundoMode::Statevec { seed, n_sites: *n },
                None => BundoMode::Sample { seed },
            };
            let run = bundo_vertical(*lambda, *max_even, mode)?;
            let path_probability: f64 = run.probs.iter().product();
            emit(json!({ "summary": { "protocol": "bundo", "run": run, "path_probability": path_probability } }))?;
        }
        ProtocolConfig::Entangle { outcomes, theta1, theta3 } => {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let frag = EntangleFragment {
                n1: random_n(&mut r, *theta1),
                u2: random_unitary(&mut r),
                n3: random_n(&mut r, *theta3),
                outcomes: *outcomes,
            };
            let run = slocc_mbqc::protocol::nun_entangle(&frag)?;
            emit(json!({ "summary": {
                "protocol": "entangle",
                "outcomes": outcomes,
                "distance_to_prediction": run.distance,
                "cz_equivalence_residual": cz_equivalence_residual::<f64>(),
                "success": run.distance < 1e-9,
            }}))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn classify_cmd(numbers: &[f64], out: Option<&Path>) -> Outcome {
    let m = match numbers.len() {
        4 => Mat2::from_real(numbers[0], numbers[1], numbers[2], numbers[3]),
        8 => {
            let z = |k: usize| c(numbers[2 * k], numbers[2 * k + 1]);
            Mat2::new(z(0), z(1), z(2), z(3))
        }
        n => return Err(Failure::Config(format!("expected 4 real or 8 (re, im) numbers, got {n}"))),
    };
    let op = classify(&m)?;
    let mut v = json!({
        "n_type": op.flags.is_n_type,
        "b_type": op.flags.is_b_type,
        "unitary": op.flags.is_unitary,
        "theta": op.theta,
        "lambda": op.lambda(),
    });
    if let Ok(nc) = n_canon(&op) {
        v["n_canon"] = json!({ "theta": nc.theta, "gamma": nc.gamma, "u": nc.u });
    }
    if let Ok(bc) = b_canon(&op) {
        v["b_canon"] = json!({ "theta": bc.theta, "imaginary_angle": bc.eps_im, "u": bc.u });
    }
    let mut w = sink(out)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&v).expect("serialisable"))?;
    w.flush()?;
    Ok(())
}
