use ndarray::{Array2, Axis};
use ttgan_core::data::Dataset;
use ttgan_core::harness::{make_two_moons, TwoMoonsSpec};
use ttgan_core::preprocess::{self, PreprocessConfig};
use ttgan_core::ttgan::*;

fn mean_nn_distance(gen: &Array2<f64>, x_min: &Array2<f64>) -> f64 {
    let mut total = 0.0;
    for g in gen.axis_iter(Axis(0)) {
        let mut best = f64::INFINITY;
        for m in x_min.axis_iter(Axis(0)) {
            let d2: f64 = g.iter().zip(m.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.min(d2);
        }
        total += best.sqrt();
    }
    total / gen.nrows() as f64
}

#[test]
#[ignore]
fn moons_distance_probe() {
    for epochs in [150usize, 300, 600] {
        let mut wins = 0;
        let mut ratios = Vec::new();
        for seed in 0..5u64 {
            let d = make_two_moons(&TwoMoonsSpec {
                n_majority: 250,
                n_minority: 25,
                noise: 0.06,
                seed: 1000 + seed,
            })
            .unwrap();
            let pipeline = preprocess::fit(&d, &PreprocessConfig::default()).unwrap();
            let x = preprocess::apply(&pipeline, &d).unwrap();
            let proc = Dataset::from_matrix("m", x, d.y.clone()).unwrap();
            let (maj_idx, min_idx) = proc.class_indices();
            let x_maj = proc.x.select(Axis(0), &maj_idx);
            let x_min = proc.x.select(Axis(0), &min_idx);

            let ttgan_cfg = TtganConfig {
                epochs,
                coefficients: LossCoefficients { translation: 0.1, cycle: 0.0, identity: 0.0 },
                seed,
                ..Default::default()
            };
            let vanilla_cfg = TtganConfig {
                mode: GanMode::Vanilla,
                coefficients: LossCoefficients::zero(),
                ..ttgan_cfg
            };
            let tb = train(&x_maj, &x_min, &ttgan_cfg).unwrap();
            let vb = train(&x_maj, &x_min, &vanilla_cfg).unwrap();
            let tg = generate(&tb, &x_maj).unwrap();
            let vg = generate(&vb, &x_maj).unwrap();
            let td = mean_nn_distance(&tg, &x_min);
            let vd = mean_nn_distance(&vg, &x_min);
            ratios.push(td / vd);
            if td <= 0.75 * vd {
                wins += 1;
            }
            println!("epochs={epochs} seed={seed}: ttgan={td:.3} vanilla={vd:.3} ratio={:.2}", td / vd);
        }
        println!("epochs={epochs}: wins={wins}/5\n");
    }
}
