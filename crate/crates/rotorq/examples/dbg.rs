fn main() {
    use rotorq::*;
    use rayon::prelude::*;
    let spec = RotorSpec::nacs();
    let basis = RotationalBasis::new(&spec);
    let template = PulseTemplate::with_delay_revivals(&spec, 112.0);
    let g = TargetGate::by_name("S").unwrap();
    let sol = solve_two_pulse(&g, &template).unwrap();
    for spp in [256.0, 1024.0, 4096.0] {
        let vals: Vec<(f64, f64)> = [0.06, 0.08, 0.10, 0.12, 0.14, 0.16].par_iter().map(|frac| {
            let mut p = sol.params;
            p.bandwidth = frac * spec.omega01();
            let wf = synthesize(&p, spec.mu01_debye()).unwrap();
            let dt = 2.0*std::f64::consts::PI/p.carrier/spp;
            let r = propagate(&spec, &basis, &wf, dt, wf.window.0, wf.window.1).unwrap();
            let f = average_gate_fidelity(&r.unitary_interaction, g.matrix()).unwrap();
            (*frac, f.f_av)
        }).collect();
        println!("spp {spp}:");
        for (frac, f) in vals { println!("  {frac:.2}: 1-F = {:.6e}", 1.0 - f); }
    }
}
