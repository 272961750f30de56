use gauss_assist_core::entanglement::MonotoneF;
use gauss_assist_core::gaussian::Partition;
use gauss_assist_core::oracle::*;
use gauss_assist_core::symplectic::random_qcm;

fn main() {
    let v = random_qcm(2, 515, 2.0);
    let obj = AssistObjective::Entanglement {
        partition: Partition::bipartite(1, 1),
        monotone: MonotoneF::renyi2(),
    };
    let light = OptimizerConfig { restarts: 48, max_iters: 4000, ..Default::default() };
    let one = regularized_estimate(&v, &obj, 1, &light).unwrap();
    let t0 = std::time::Instant::now();
    let heavy = OptimizerConfig::scaled_for(4);
    let two = regularized_estimate(&v, &obj, 2, &heavy).unwrap();
    println!("one {one:.8} two {two:.8} gap {:.2e} heavy-time {:?}", one - two, t0.elapsed());
}
