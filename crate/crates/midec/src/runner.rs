//! Experiment execution: runs the chains (parallel across chains), fills a
//! bound report row per record point, and verifies dominance.

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DVector;
use rand::Rng;

use midec_core::bounds::{
    self, BoundReport, BoundRow, Violation, ViolationKind,
};
use midec_core::estimation::{mi_plugin_bootstrap, mi_plugin_gaussian, MomentAccumulator};
use midec_core::gaussian::{
    ou_joint, proximal_gaussian_joint, ula_gaussian_joint, JointGaussianState,
};
use midec_core::phi::{phi_mutual_info_gaussian, PhiKind, SobolevConstant};
use midec_core::rng::aux_rng;
use midec_core::samplers::{simulate_chain, ChainKind, RecordPoints};

use crate::config::{Plan, Tolerances};

/// One record point on the grid: iteration count or physical time.
#[derive(Debug, Clone, Copy)]
pub enum GridPoint {
    Step(u64),
    Time(f64),
}

/// Flattened per-record sample arrays, chain-major (`n_chains`·d entries).
pub struct RecordArrays {
    pub x0: Vec<f64>,
    pub xk: Vec<f64>,
}

fn thread_count() -> usize {
    match std::env::var("MIDEC_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    }
}

/// Runs all chains, fanned out over threads in contiguous index ranges and
/// merged back in index order, so the result is identical for any thread
/// count. Returns per-record flat arrays plus the total oracle calls.
pub fn collect_records(plan: &Plan) -> Result<(Vec<RecordArrays>, u64)> {
    let n = plan.chain.n_chains;
    let d = plan.chain.init.dim();
    let n_rec = plan.chain.records.len();
    let workers = thread_count().min(n.max(1));
    let chunk = n.div_ceil(workers);

    struct ChunkOut {
        start: usize,
        recs: Vec<RecordArrays>,
        calls: u64,
    }

    let run_range = |start: usize, end: usize| -> Result<ChunkOut> {
        let mut recs: Vec<RecordArrays> = (0..n_rec)
            .map(|_| RecordArrays {
                x0: Vec::with_capacity((end - start) * d),
                xk: Vec::with_capacity((end - start) * d),
            })
            .collect();
        let mut calls = 0u64;
        for c in start..end {
            let (x0, rec, k) = simulate_chain(&plan.chain, &plan.target, c as u64)
                .map_err(|e| anyhow!("chain {c}: {e}"))?;
            calls += k;
            for (r, xk) in rec.into_iter().enumerate() {
                recs[r].x0.extend(x0.iter());
                recs[r].xk.extend(xk.iter());
            }
        }
        Ok(ChunkOut { start, recs, calls })
    };

    let mut chunks: Vec<ChunkOut> = if workers <= 1 {
        vec![run_range(0, n)?]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let (s, e) = ((w * chunk).min(n), ((w + 1) * chunk).min(n));
                    let run = &run_range;
                    scope.spawn(move || run(s, e))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect::<Vec<_>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
    };
    chunks.sort_by_key(|c| c.start);

    let mut merged: Vec<RecordArrays> = (0..n_rec)
        .map(|_| RecordArrays { x0: Vec::with_capacity(n * d), xk: Vec::with_capacity(n * d) })
        .collect();
    let mut calls = 0u64;
    for c in chunks {
        calls += c.calls;
        for (r, rec) in c.recs.into_iter().enumerate() {
            merged[r].x0.extend_from_slice(&rec.x0);
            merged[r].xk.extend_from_slice(&rec.xk);
        }
    }
    Ok((merged, calls))
}

// ------------------------------------------------------------ exact oracles

/// Scalar joint law of one decoupled coordinate at a grid point.
fn scalar_exact_joint(
    plan: &Plan,
    alpha_i: f64,
    point: GridPoint,
) -> Result<JointGaussianState> {
    let init = midec_core::targets::GaussianDist::scalar(
        0.0,
        plan.oracle.as_ref().expect("oracle setup").init_var,
    )?;
    let j = match (point, &plan.chain.kind) {
        (GridPoint::Time(t), ChainKind::LangevinEm { .. }) => ou_joint(alpha_i, &init, t)?,
        (GridPoint::Step(k), ChainKind::Ula) => {
            ula_gaussian_joint(alpha_i, plan.chain.eta, k, &init)?
        }
        (GridPoint::Step(k), ChainKind::Proximal) => {
            proximal_gaussian_joint(alpha_i, plan.chain.eta, k, &init)?
        }
        _ => bail!("grid point kind does not match chain kind"),
    };
    Ok(j)
}

/// Exact Φ-mutual information at a grid point, when the oracle applies: any
/// dimension for KL (coordinatewise additivity), d = 1 otherwise.
pub fn exact_mi_at(plan: &Plan, point: GridPoint) -> Result<Option<f64>> {
    let Some(setup) = &plan.oracle else { return Ok(None) };
    if plan.generator != PhiKind::Kl && setup.alphas.len() != 1 {
        return Ok(None);
    }
    let mut total = 0.0;
    for &a in &setup.alphas {
        let j = scalar_exact_joint(plan, a, point)?;
        let mi = phi_mutual_info_gaussian(&j, plan.generator)?;
        if mi.is_infinite() {
            return Ok(Some(f64::INFINITY));
        }
        total += mi;
    }
    Ok(Some(total))
}

/// Exact (cross-covariance op-norm, √λ_max(Cov X_k), λ_max(Cov X₀)) from the
/// decoupled coordinates.
fn exact_cov_quantities(plan: &Plan, point: GridPoint) -> Result<(f64, f64, f64)> {
    let setup = plan.oracle.as_ref().expect("oracle setup");
    let mut cross_max = 0.0f64;
    let mut covk_max = 0.0f64;
    for &a in &setup.alphas {
        let j = scalar_exact_joint(plan, a, point)?;
        cross_max = cross_max.max(j.cross[(0, 0)].abs());
        covk_max = covk_max.max(j.covk[(0, 0)]);
    }
    Ok((cross_max, covk_max.sqrt(), setup.init_var))
}

// ------------------------------------------------------------ sobolev / bounds

/// Sobolev constants along the chain: `steps[k]` for discrete chains, or a
/// closed-form evaluation at arbitrary times for Langevin.
fn sobolev_at_step(plan: &Plan, k: u64) -> Result<f64> {
    let mut a = plan.alpha0;
    match &plan.chain.kind {
        ChainKind::Ula => {
            let gamma = 1.0 - plan.chain.eta * plan.alpha;
            for _ in 0..k {
                a = bounds::sobolev_evolution_ula(a, gamma, plan.chain.eta)?.value();
            }
        }
        ChainKind::Proximal => {
            for _ in 0..k {
                a = bounds::sobolev_evolution_proximal(plan.alpha, a, plan.chain.eta)?.value();
            }
        }
        ChainKind::LangevinEm { .. } => bail!("langevin uses time-indexed Sobolev constants"),
    }
    Ok(a)
}

fn sobolev_at(plan: &Plan, point: GridPoint) -> Result<f64> {
    match point {
        GridPoint::Step(k) => sobolev_at_step(plan, k),
        GridPoint::Time(t) => Ok(bounds::sobolev_evolution_langevin(
            plan.alpha,
            SobolevConstant::new(plan.alpha0)?,
            t,
        )?
        .value()),
    }
}

fn regularity_at(plan: &Plan, point: GridPoint) -> Option<f64> {
    match (point, &plan.chain.kind) {
        (GridPoint::Time(t), _) if t > 0.0 => {
            bounds::bound_mi_regularity_ld(plan.alpha, t, plan.var0).ok()
        }
        (GridPoint::Step(k), ChainKind::Ula) if k >= 1 => {
            bounds::bound_mi_regularity_ula(plan.alpha, plan.chain.eta, k, plan.var0).ok()
        }
        (GridPoint::Step(1), ChainKind::Proximal) => {
            bounds::bound_mi_proximal_first_step(plan.chain.eta, plan.var0).ok()
        }
        _ => None,
    }
}

/// The MI reference fed to the theorem bounds: the exact oracle value at the
/// reference index when available and finite, otherwise the regularity bound
/// there (a valid upper bound, yielding a weaker but still correct theorem
/// bound).
fn reference_mi(plan: &Plan, ref_point: GridPoint) -> Result<Option<f64>> {
    if let Some(mi) = exact_mi_at(plan, ref_point)? {
        if mi.is_finite() {
            return Ok(Some(mi));
        }
    }
    Ok(regularity_at(plan, ref_point))
}

// ------------------------------------------------------------ empirical side

/// Unbiased scalar joint fit from raw sums, with the same ridge policy as
/// the general accumulator.
fn scalar_joint_from_sums(
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
) -> Result<JointGaussianState> {
    let (m0, mk) = (sx / n, sy / n);
    let denom = n - 1.0;
    // identical estimator and ridge policy to MomentAccumulator::fit at d = 1
    let v0 = (sxx - n * m0 * m0) / denom;
    let vk = (syy - n * mk * mk) / denom;
    let v0 = v0 + (1e-12 * v0).max(1e-12);
    let vk = vk + (1e-12 * vk).max(1e-12);
    let cross = (sxy - n * m0 * mk) / denom;
    // the ridge can leave |cross| marginally above √(v0·vk); clamp inside
    let lim = (v0 * vk).sqrt();
    let cross = cross.clamp(-lim, lim);
    JointGaussianState::scalar(m0, v0, mk, vk, cross).map_err(|e| anyhow!("{e}"))
}

fn scalar_mi_from_samples(x0: &[f64], xk: &[f64], idx: Option<&[usize]>) -> Result<f64> {
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut push = |x: f64, y: f64| {
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    };
    let n = match idx {
        Some(ids) => {
            for &i in ids {
                push(x0[i], xk[i]);
            }
            ids.len()
        }
        None => {
            for (&x, &y) in x0.iter().zip(xk.iter()) {
                push(x, y);
            }
            x0.len()
        }
    };
    let j = scalar_joint_from_sums(n as f64, sx, sy, sxx, syy, sxy)?;
    mi_plugin_gaussian(&j).map_err(|e| anyhow!("{e}"))
}

/// Plug-in MI with a 200-replicate bootstrap 95% halfwidth; the scalar path
/// avoids materializing vector pairs for large chain counts.
fn empirical_mi(
    plan: &Plan,
    rec: &RecordArrays,
    row_salt: u64,
) -> Result<(f64, f64)> {
    let d = plan.chain.init.dim();
    let n = plan.chain.n_chains;
    if d == 1 {
        let point = scalar_mi_from_samples(&rec.x0, &rec.xk, None)?;
        let mut reps = Vec::with_capacity(200);
        let mut idx = vec![0usize; n];
        for r in 0..200u64 {
            let mut rng = aux_rng(plan.chain.seed, row_salt * 1024 + r);
            for slot in idx.iter_mut() {
                *slot = rng.gen_range(0..n);
            }
            reps.push(scalar_mi_from_samples(&rec.x0, &rec.xk, Some(&idx))?);
        }
        reps.sort_by(|a, b| a.partial_cmp(b).expect("NaN bootstrap replicate"));
        let q = |p: f64| reps[(p * (reps.len() - 1) as f64).round() as usize];
        Ok((point, 0.5 * (q(0.975) - q(0.025))))
    } else {
        let pairs: Vec<(DVector<f64>, DVector<f64>)> = (0..n)
            .map(|c| {
                (
                    DVector::from_column_slice(&rec.x0[c * d..(c + 1) * d]),
                    DVector::from_column_slice(&rec.xk[c * d..(c + 1) * d]),
                )
            })
            .collect();
        mi_plugin_bootstrap(&pairs, plan.chain.seed.wrapping_add(row_salt))
            .map_err(|e| anyhow!("{e}"))
    }
}

fn fit_joint(plan: &Plan, rec: &RecordArrays) -> Result<JointGaussianState> {
    let d = plan.chain.init.dim();
    let mut acc = MomentAccumulator::new(d);
    let n = plan.chain.n_chains;
    for c in 0..n {
        acc.push(
            &DVector::from_column_slice(&rec.x0[c * d..(c + 1) * d]),
            &DVector::from_column_slice(&rec.xk[c * d..(c + 1) * d]),
        );
    }
    acc.fit().map_err(|e| anyhow!("{e}"))
}

// ------------------------------------------------------------ orchestration

fn grid(plan: &Plan) -> Vec<(u64, f64, GridPoint)> {
    match &plan.chain.records {
        RecordPoints::Steps(ks) => ks
            .iter()
            .map(|&k| (k, k as f64 * plan.chain.eta, GridPoint::Step(k)))
            .collect(),
        RecordPoints::Times(ts) => ts
            .iter()
            .enumerate()
            .map(|(i, &t)| (i as u64, t, GridPoint::Time(t)))
            .collect(),
    }
}

fn theorem_bounds_at(
    plan: &Plan,
    point: GridPoint,
    ref_mi: f64,
    ref_sobolev: f64,
) -> Result<Option<(f64, Option<f64>)>> {
    let a_ref = SobolevConstant::new(ref_sobolev).map_err(|e| anyhow!("{e}"))?;
    let out = match (point, &plan.chain.kind) {
        (GridPoint::Time(t), ChainKind::LangevinEm { .. }) => {
            if t < plan.reference_time {
                return Ok(None);
            }
            let dt = t - plan.reference_time;
            let loose = bounds::bound_mi_langevin(plan.alpha, a_ref, ref_mi, dt)
                .map_err(|e| anyhow!("{e}"))?;
            let sharp = bounds::bound_mi_langevin_sharp(plan.alpha, a_ref, ref_mi, dt)
                .map_err(|e| anyhow!("{e}"))?;
            Some((loose, Some(sharp)))
        }
        (GridPoint::Step(k), ChainKind::Ula) => {
            if k < plan.reference_step {
                return Ok(None);
            }
            let b = bounds::bound_mi_ula(
                plan.alpha,
                plan.chain.eta,
                a_ref,
                ref_mi,
                k - plan.reference_step,
            )
            .map_err(|e| anyhow!("{e}"))?;
            Some((b, None))
        }
        (GridPoint::Step(k), ChainKind::Proximal) => {
            if k < plan.reference_step {
                return Ok(None);
            }
            let b = bounds::bound_mi_proximal(
                plan.alpha,
                plan.chain.eta,
                a_ref,
                ref_mi,
                k - plan.reference_step,
            )
            .map_err(|e| anyhow!("{e}"))?;
            Some((b, None))
        }
        _ => bail!("grid point kind does not match chain kind"),
    };
    Ok(out)
}

fn contraction_at(plan: &Plan, point: GridPoint, prev_time: f64) -> Result<Option<f64>> {
    let v = match (point, &plan.chain.kind) {
        (GridPoint::Step(0), _) => None,
        (GridPoint::Step(k), ChainKind::Ula) => {
            let gamma = 1.0 - plan.chain.eta * plan.alpha;
            Some(bounds::contraction_ula(
                gamma,
                plan.chain.eta,
                sobolev_at_step(plan, k - 1)?,
            )
            .map_err(|e| anyhow!("{e}"))?)
        }
        (GridPoint::Step(k), ChainKind::Proximal) => Some(
            bounds::contraction_proximal(
                plan.alpha,
                plan.chain.eta,
                sobolev_at_step(plan, k - 1)?,
            )
            .map_err(|e| anyhow!("{e}"))?,
        ),
        (GridPoint::Time(t), ChainKind::LangevinEm { .. }) => Some(
            bounds::contraction_langevin(
                plan.alpha,
                sobolev_at(plan, GridPoint::Time(prev_time))?,
                t - prev_time,
            )
            .map_err(|e| anyhow!("{e}"))?,
        ),
        _ => bail!("grid point kind does not match chain kind"),
    };
    Ok(v)
}

/// Executes the full experiment: chains (when requested), oracles, bounds,
/// dominance verification. Returns the report and the oracle call count.
pub fn run_experiment(plan: &Plan) -> Result<(BoundReport, u64)> {
    let points = grid(plan);
    let (records, oracle_calls) = if plan.chain.n_chains > 0 && !points.is_empty() {
        collect_records(plan)?
    } else {
        (Vec::new(), 0)
    };

    let ref_point = match &plan.chain.kind {
        ChainKind::LangevinEm { .. } => GridPoint::Time(plan.reference_time),
        _ => GridPoint::Step(plan.reference_step),
    };
    let reference = if plan.bounds.theorem {
        match reference_mi(plan, ref_point)? {
            Some(mi) => Some((mi, sobolev_at(plan, ref_point)?)),
            None => None,
        }
    } else {
        None
    };

    let mut report = BoundReport::default();
    let mut prev_time = 0.0;
    for (row_idx, &(index, time, point)) in points.iter().enumerate() {
        let mut row = BoundRow { index, time, ..Default::default() };

        row.exact_mi = exact_mi_at(plan, point)?;
        if !records.is_empty() {
            let rec = &records[row_idx];
            if plan.generator == PhiKind::Kl {
                let (mi, ci) = empirical_mi(plan, rec, row_idx as u64)?;
                row.empirical_mi = Some(mi);
                row.ci_halfwidth = Some(ci);
            }
        }
        if let Some((ref_mi, ref_sob)) = reference {
            if let Some((loose, sharp)) = theorem_bounds_at(plan, point, ref_mi, ref_sob)? {
                row.thm_bound = Some(loose * plan.debug_scale_thm_bound);
                row.thm_bound_sharp = sharp.map(|s| s * plan.debug_scale_thm_bound);
            }
        }
        if plan.bounds.regularity {
            row.regularity_bound = regularity_at(plan, point);
        }
        row.sobolev_lower = Some(sobolev_at(plan, point)?);
        row.contraction_coeff = contraction_at(plan, point, prev_time)?;

        if plan.bounds.covariance && plan.generator == PhiKind::Kl {
            // Everything for the covariance check comes from one joint law
            // (fitted when samples exist, exact otherwise), so the bound is
            // checked against a self-consistent MI.
            if !records.is_empty() {
                let j = fit_joint(plan, &records[row_idx])?;
                let mi = mi_plugin_gaussian(&j).map_err(|e| anyhow!("{e}"))?;
                row.cov_opnorm = Some(midec_core::estimation::empirical_cov_opnorm(&j));
                let xi = midec_core::linalg::sym_eig_max(&j.covk).sqrt();
                let var = midec_core::linalg::sym_eig_max(&j.cov0);
                if mi.is_finite() {
                    row.cov_bound = Some(
                        bounds::bound_cov_from_mi(mi, var, xi).map_err(|e| anyhow!("{e}"))?,
                    );
                }
            } else if plan.oracle.is_some() {
                let (opnorm, xi, var) = exact_cov_quantities(plan, point)?;
                row.cov_opnorm = Some(opnorm);
                if let Some(mi) = row.exact_mi.filter(|m| m.is_finite()) {
                    row.cov_bound = Some(
                        bounds::bound_cov_from_mi(mi, var, xi).map_err(|e| anyhow!("{e}"))?,
                    );
                }
            }
        }

        prev_time = time;
        report.rows.push(row);
    }

    report.violations = verify_dominance(&report.rows, &plan.tolerances);
    Ok((report, oracle_calls))
}

/// Flags rows where the measurements contradict the bounds: exact MI above
/// the theorem bound beyond the slack, empirical MI above it beyond
/// mc_sigma standard errors, or the cross-covariance above its bound.
pub fn verify_dominance(rows: &[BoundRow], tol: &Tolerances) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if let (Some(exact), Some(bound)) = (row.exact_mi, row.thm_bound) {
            if exact.is_finite() && exact > bound + tol.dominance_slack {
                out.push(Violation {
                    row: i,
                    kind: ViolationKind::ExactAboveTheorem,
                    margin: exact - bound,
                });
            }
        }
        if let (Some(emp), Some(ci), Some(bound)) =
            (row.empirical_mi, row.ci_halfwidth, row.thm_bound)
        {
            // the 95% halfwidth is ≈ 1.96 standard errors
            let se = ci / 1.96;
            if emp - tol.mc_sigma * se > bound {
                out.push(Violation {
                    row: i,
                    kind: ViolationKind::EmpiricalAboveTheorem,
                    margin: emp - tol.mc_sigma * se - bound,
                });
            }
        }
        if let (Some(op), Some(bound)) = (row.cov_opnorm, row.cov_bound) {
            if op > bound + tol.dominance_slack {
                out.push(Violation {
                    row: i,
                    kind: ViolationKind::CovAboveBound,
                    margin: op - bound,
                });
            }
        }
    }
    out
}

/// End-to-end: resolve nothing (takes a plan), run, write artifacts, and
/// report whether violations were found.
pub fn execute(plan: &Plan) -> Result<bool> {
    let (report, oracle_calls) = run_experiment(plan)?;
    let dir = std::path::Path::new(&plan.output_dir);
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output dir {}", dir.display()))?;
    crate::report::write_csv(&dir.join("report.csv"), &report.rows)?;
    crate::report::write_summary(&dir.join("summary.json"), &report, oracle_calls)?;
    Ok(report.violations.is_empty())
}
