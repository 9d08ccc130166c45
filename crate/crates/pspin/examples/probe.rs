use pspin::*;
fn main() {
    for n in [32usize, 128, 512] {
        let params = model::ModelParams::with_unit_coupling(3, n).unwrap();
        let eq = master::equilibrium_distribution(&params, 2.0).unwrap();
        let start = dynamics::ProbabilityVector::new(eq.probabilities().to_vec()).unwrap();
        let scale = (n as f64 / 32.0).sqrt();
        let tmax = 40.0 * scale;
        let taus: Vec<f64> = (1..=22).map(|i| tmax * i as f64 / 22.0).collect();
        let mut pts = Vec::new();
        for &tau in &taus {
            let sched = schedule::AnnealingSchedule::temperature(2.0, 0.0, tau).unwrap();
            let out = dynamics::evolve_sa(&start, &sched, &params, &IntegratorConfig::default()).unwrap();
            let e = dynamics::residual_energy_classical(&out.probabilities, &params, 0.0).unwrap();
            pts.push((tau, e));
        }
        let eps0 = pts[0].1;
        let win: Vec<(f64, f64)> = pts.iter().copied().filter(|&(_, e)| e > 0.05 * eps0).collect();
        let xs: Vec<f64> = win.iter().map(|&(t, _)| t).collect();
        let ys: Vec<f64> = win.iter().map(|&(_, e)| e.ln()).collect();
        let nf = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / nf;
        let my = ys.iter().sum::<f64>() / nf;
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
        let slope = sxy / sxx;
        println!("N={n:4}: pts={} A={:.4} tau*={:.2} eps_first={:.4}", win.len(), (my - slope * mx).exp(), -1.0 / slope, eps0);
    }
}
