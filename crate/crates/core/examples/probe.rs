use qgeom::chart::*;
use qgeom::models::*;
use qgeom::subgeometry::*;

fn main() {
    for seed in [2u64, 4u64] {
        let model = random_compatible(seed).unwrap();
        let point = [0.2, 0.1];
        println!("seed {seed}: n={} m={}", model.n, model.m);
        for h in [4e-2, 2e-2, 1e-2, 5e-3] {
            let fd = FdConfig::central4(h);
            let ff = AlignedFrameField::new(&model.projector, &point).unwrap();
            let g1 = gauss_residuals(&model.projector, &ff, &point, fd).unwrap();
            let g2 = gauss_residuals(&model.projector, &ff, &point, fd.halved()).unwrap();
            let c1 = codazzi_residuals(&model.projector, &ff, &point, fd, &BaseConnection::Zero).unwrap();
            println!("  h={h}: gauss par {:.3e} (order {:+.2}) perp {:.3e} codazzi par {:.3e} perp {:.3e}",
                g1.parallel, (g1.parallel/g2.parallel).log2(), g1.perp, c1.parallel, c1.perp);
        }
    }
}
