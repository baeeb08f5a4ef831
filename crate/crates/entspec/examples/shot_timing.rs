use entspec::circuits::{build_jst_circuit, build_two_copy_circuit, prepare_state_gates};
use entspec::compile::haar_random_1q;
use entspec::noise::NoiseParams;
use entspec::runner::{derived_rng, ShotRunner, STREAM_SHOT};

fn main() {
    let mut rng = derived_rng(1, 9, 9, 9);
    let v_a = haar_random_1q(&mut rng);
    let v_b = haar_random_1q(&mut rng);
    let prep = prepare_state_gates(0.8, &v_a, &v_b).unwrap();
    let noise = NoiseParams::default();
    let zeros = NoiseParams::none();
    for (name, circuit) in [
        ("two_copy n=3", build_two_copy_circuit(3, 1, 1, &prep).unwrap()),
        ("two_copy n=4", build_two_copy_circuit(4, 1, 1, &prep).unwrap()),
        ("jst n=3", build_jst_circuit(3, 1, 1, &prep).unwrap()),
        ("jst n=4", build_jst_circuit(4, 1, 1, &prep).unwrap()),
    ] {
        for (mode, params) in [("noisy", &noise), ("zero-noise-traj", &zeros)] {
            let mut runner = ShotRunner::new(&circuit, Some(params)).unwrap().force_trajectory();
            let shots = 2000usize;
            let t0 = std::time::Instant::now();
            let mut acc = 0usize;
            for s in 0..shots {
                let mut r = derived_rng(1, STREAM_SHOT, 0, s as u64);
                let (bits, ok) = runner.run_shot(&mut r).unwrap();
                acc += bits.index() as usize + ok as usize;
            }
            let dt = t0.elapsed();
            println!("{name} [{mode}]: {:.1} us/shot ({} qubits) [{acc}]", dt.as_micros() as f64 / shots as f64, circuit.num_qubits());
        }
    }
}
