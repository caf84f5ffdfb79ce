use esdg_core::refops::ReferenceOperators;
use esdg_core::mesh::{build_cartesian, Rect};
use esdg_core::dgsem::{FieldState, ResolvedBcs, FluxChoice, residual};
use esdg_core::cases::vortex_exact;

fn main() {
    let n = 3;
    let ops = ReferenceOperators::new(n).unwrap();
    for m in [20usize, 40, 80] {
        let mesh = build_cartesian(m, m, Rect::square(-10.0, 10.0), &ops, true, true).unwrap();
        let field = FieldState::sample(&mesh, |x, y| vortex_exact(x, y, 0.0));
        let bcs = ResolvedBcs::none(&mesh).unwrap();
        let rhs = residual(&field, &mesh, &ops, FluxChoice::Llf, &bcs).unwrap();
        let h = 1e-6;
        let mut num = 0.0; let mut den = 0.0;
        for (e, geom) in mesh.elements.iter().enumerate() {
            for (node, c) in geom.coords.iter().enumerate() {
                let plus = vortex_exact(c[0], c[1], h);
                let minus = vortex_exact(c[0], c[1], -h);
                for k in 0..4 {
                    let exact = (plus.component(k) - minus.component(k)) / (2.0 * h);
                    let got = rhs.elements[e].nodal[node].component(k);
                    num += (got - exact) * (got - exact);
                    den += exact * exact;
                }
            }
        }
        println!("M={} rel residual err = {:.4e}", m, (num / den).sqrt());
    }
}
