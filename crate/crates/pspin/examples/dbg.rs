// Scratch exploration runs used while calibrating the acceptance suite.
// Invoke: cargo run --release -p pspin --example dbg -- <section>

use pspin::*;
use std::time::Instant;

fn rt_curve(p: u32, n: usize, gamma_i: f64, taus: &[f64], cfg: &IntegratorConfig) -> Vec<(f64, f64)> {
    let params = model::ModelParams::with_unit_coupling(p, n).unwrap();
    let start = dynamics::WaveFunction::from_real(quantum::initial_quantum_state(&params, gamma_i).unwrap()).unwrap();
    taus.iter()
        .map(|&tau| {
            let sched = schedule::AnnealingSchedule::transverse_field(gamma_i, 0.0, tau).unwrap();
            let out = dynamics::evolve_rt(&start, &sched, &params, cfg).unwrap();
            (tau, dynamics::residual_energy_quantum(&out.state, &params))
        })
        .collect()
}

fn it_curve(p: u32, n: usize, gamma_i: f64, taus: &[f64], cfg: &IntegratorConfig) -> Vec<(f64, f64)> {
    let params = model::ModelParams::with_unit_coupling(p, n).unwrap();
    let start = dynamics::WaveFunction::from_real(quantum::initial_quantum_state(&params, gamma_i).unwrap()).unwrap();
    taus.iter()
        .map(|&tau| {
            let sched = schedule::AnnealingSchedule::transverse_field(gamma_i, 0.0, tau).unwrap();
            let out = dynamics::evolve_it(&start, &sched, &params, cfg).unwrap();
            (tau, dynamics::residual_energy_quantum(&out.state, &params))
        })
        .collect()
}

fn sa_curve(p: u32, n: usize, t_i: f64, t_f: f64, taus: &[f64], cfg: &IntegratorConfig) -> Vec<(f64, f64)> {
    let params = model::ModelParams::with_unit_coupling(p, n).unwrap();
    let eq = master::equilibrium_distribution(&params, t_i).unwrap();
    let start = dynamics::ProbabilityVector::new(eq.probabilities().to_vec()).unwrap();
    taus.iter()
        .map(|&tau| {
            let sched = schedule::AnnealingSchedule::temperature(t_i, t_f, tau).unwrap();
            let out = dynamics::evolve_sa(&start, &sched, &params, cfg).unwrap();
            (tau, dynamics::residual_energy_classical(&out.probabilities, &params, t_f).unwrap())
        })
        .collect()
}

fn main() {
    let section = std::env::args().nth(1).unwrap_or_else(|| "all".into());
    let cfg = IntegratorConfig::default();

    if section == "gaps2" || section == "all" {
        let t0 = Instant::now();
        println!("== p=2 minimum gaps ==");
        let mut data = Vec::new();
        for n in [64usize, 128, 256, 512, 1024] {
            let params = model::ModelParams::with_unit_coupling(2, n).unwrap();
            let (g, d) = spectral::min_gap_scan(&params, (0.7, 1.4), 25).unwrap();
            println!("N={n:5}  Gamma_min={g:.6}  Delta={d:.6e}");
            data.push((n as f64, d));
        }
        let fit = spectral::gap_scaling_fit(&data, spectral::ScalingModel::Power).unwrap();
        println!("power fit: z = {:.4} +- {:.4}  [{:?}]", fit.exponent, fit.exponent_stderr, t0.elapsed());
    }

    if section == "gaps3" || section == "all" {
        let t0 = Instant::now();
        println!("== p=3 minimum gaps ==");
        let mut data = Vec::new();
        for n in [16usize, 24, 32, 40, 48, 56, 64] {
            let params = model::ModelParams::with_unit_coupling(3, n).unwrap();
            let (g, d) = spectral::min_gap_scan(&params, (0.3, 1.2), 31).unwrap();
            println!("N={n:4}  Gamma_min={g:.6}  Delta={d:.6e}  tau*~{:.1}", 4.0 / std::f64::consts::PI / (d * d));
            data.push((n as f64, d));
        }
        let fe = spectral::gap_scaling_fit(&data, spectral::ScalingModel::Exponential).unwrap();
        let fp = spectral::gap_scaling_fit(&data, spectral::ScalingModel::Power).unwrap();
        println!(
            "exp fit: alpha3 = {:.4} +- {:.4} resid {:.3e} | power resid {:.3e}  [{:?}]",
            fe.exponent, fe.exponent_stderr, fe.residual_norm, fp.residual_norm, t0.elapsed()
        );
    }

    if section == "tc" || section == "all" {
        for p in [3u32, 4, 5] {
            let params = model::ModelParams::with_unit_coupling(p, 16).unwrap();
            println!("T_c(p={p}) = {:.6}", model::critical_temperature(&params).unwrap());
        }
        for p in [3u32, 5, 11, 21] {
            let params = model::ModelParams::with_unit_coupling(p, 16).unwrap();
            println!("Gamma_c(p={p}) ~ {:.6}", model::critical_field_estimate(&params).unwrap());
        }
    }

    if section == "it" || section == "all" {
        println!("== QA-IT eps tau^2 (expect Gamma_i^2/p^3) ==");
        let taus = [10.0, 31.6, 100.0, 316.0, 1000.0];
        for p in [2u32, 3] {
            for n in [32usize, 256] {
                let t0 = Instant::now();
                let curve = it_curve(p, n, 2.0, &taus, &cfg);
                let expect = 4.0 / (p as f64).powi(3);
                print!("p={p} N={n:4}: ");
                for (tau, eps) in &curve {
                    print!("{:.4} ", eps * tau * tau / expect);
                }
                println!(" [{:?}]", t0.elapsed());
            }
        }
    }

    if section == "rt16" || section == "all" {
        println!("== QA-RT finite-N asymptote, N=16 (eps tau^2 / (G^2/p^3)) ==");
        for p in [2u32, 3] {
            let taus = [200.0, 300.0, 450.0, 675.0, 1000.0, 1500.0];
            let t0 = Instant::now();
            let curve = rt_curve(p, 16, 2.0, &taus, &cfg);
            let expect = 4.0 / (p as f64).powi(3);
            print!("p={p}: ");
            for (tau, eps) in &curve {
                print!("{:.4} ", eps * tau * tau / expect);
            }
            println!(" [{:?}]", t0.elapsed());
        }
    }

    if section == "sa2" || section == "all" {
        println!("== SA p=2, T_f=0: size collapse + exponential ==");
        let taus = logspace(1.0, 60.0, 12);
        for n in [32usize, 128, 512] {
            let t0 = Instant::now();
            let curve = sa_curve(2, n, 2.0, 0.0, &taus, &cfg);
            print!("N={n:4}: ");
            for (_, eps) in &curve {
                print!("{:.4e} ", eps);
            }
            println!(" [{:?}]", t0.elapsed());
        }
    }

    if section == "sa2f" || section == "all" {
        println!("== SA p=2 N=32, T_f=0.4: late tail vs adiabatic prediction ==");
        let taus = logspace(10.0, 1e4, 10);
        let curve = sa_curve(2, 32, 2.0, 0.4, &taus, &cfg);
        let params = model::ModelParams::with_unit_coupling(2, 32).unwrap();
        for (tau, eps) in &curve {
            let pred = analysis::adiabatic_sa_tail(&params, 2.0, 0.4, *tau).unwrap();
            println!("tau={tau:9.1} eps={eps:.6e} pred={:.6e} ratio={:.3}", pred.eps_res, eps / pred.eps_res);
        }
    }

    if section == "sa3" || section == "all" {
        println!("== SA p=3, T_f=0: tau* scaling ==");
        let mut tsdata = Vec::new();
        for n in [32usize, 64, 128, 256, 512] {
            let t0 = Instant::now();
            // sample around the decay: tau* ~ sqrt(N)-ish scale unknown yet
            let taus = logspace(2.0, 4000.0, 14);
            let curve = sa_curve(3, n, 2.0, 0.0, &taus, &cfg);
            let params = model::ModelParams::with_unit_coupling(3, n).unwrap();
            let rc = analysis::ResidualEnergyCurve::from_points(
                params,
                schedule::Driver::Temperature,
                2.0,
                0.0,
                curve.clone(),
            )
            .unwrap();
            match analysis::fit_sa_exponential(&rc) {
                Ok((a, ts)) => {
                    println!("N={n:4}: A={a:.4} tau*={ts:.2}  [{:?}]", t0.elapsed());
                    tsdata.push(((n as f64).ln(), ts.ln()));
                }
                Err(e) => {
                    println!("N={n:4}: fit failed: {e}  curve={curve:?}");
                }
            }
        }
        if tsdata.len() >= 2 {
            let xs: Vec<f64> = tsdata.iter().map(|x| x.0).collect();
            let ys: Vec<f64> = tsdata.iter().map(|x| x.1).collect();
            let nf = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / nf;
            let my = ys.iter().sum::<f64>() / nf;
            let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
            let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
            println!("log tau* vs log N slope = {:.4}", sxy / sxx);
        }
    }

    if section == "rt512" || section == "all" {
        println!("== QA-RT p=2 N=512 pre-LZ window ==");
        let taus = logspace(1.0, 60.0, 10);
        let t0 = Instant::now();
        let curve = rt_curve(2, 512, 2.0, &taus, &cfg);
        for (tau, eps) in &curve {
            println!("tau={tau:8.2} eps={eps:.6e}");
        }
        println!("[{:?}]", t0.elapsed());
    }

    if section == "lz3" || section == "all" {
        println!("== QA-RT p=3 LZ fits ==");
        for n in [24usize, 32, 40, 48, 56, 64] {
            let params = model::ModelParams::with_unit_coupling(3, n).unwrap();
            let (_, d) = spectral::min_gap_scan(&params, (0.3, 1.2), 31).unwrap();
            let ts_guess = 4.0 / std::f64::consts::PI / (d * d);
            let taus = logspace(0.3 * ts_guess, 6.0 * ts_guess, 12);
            let t0 = Instant::now();
            let curve = rt_curve(3, n, 2.0, &taus, &cfg);
            let rc = analysis::ResidualEnergyCurve::from_points(
                params,
                schedule::Driver::TransverseField,
                2.0,
                0.0,
                curve,
            )
            .unwrap();
            match analysis::fit_lz_regime(&rc, None) {
                Ok(fit) => println!(
                    "N={n:3}: C={:.3} tau*={:.1} (guess {:.1}) window=({:.1},{:.1}) pts={} R2={:.5} [{:?}]",
                    fit.c, fit.tau_star, ts_guess, fit.window.0, fit.window.1, fit.points_used, fit.r_squared, t0.elapsed()
                ),
                Err(e) => println!("N={n:3}: {e}"),
            }
        }
    }
}
