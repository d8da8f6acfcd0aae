//! The family M(t, s) = tD - sA on a 5-cycle: matvecs, the edge form of the
//! quadratic form, Rayleigh quotients and Gershgorin bounds at a few named
//! points of the family.
//!
//!     cargo run --example interpolated_family

use ile::graph::Graph;
use ile::operator::{InterpolatedOperator, SymmetricOperator};

fn main() -> ile::Result<()> {
    let edges: Vec<_> = (0..5).map(|v| (v, (v + 1) % 5, 1.0)).collect();
    let g = Graph::from_edge_list(&edges, 5)?;
    let x = [1.0, -1.0, 0.5, 0.0, 2.0];

    let named = [
        ("laplacian", 1.0, 1.0),
        ("adjacency (negated)", 0.0, -1.0),
        ("signless laplacian", 1.0, -1.0),
        ("halfway", 1.0, 0.5),
    ];
    for (name, t, s) in named {
        let op = InterpolatedOperator::new(&g, t, s)?;
        let (lo, hi) = op.gershgorin_bounds();
        println!(
            "{name:>20} (t={t:>4}, s={s:>4}): Mx = {:?}  x'Mx = {:.3}  R(x) = {:.3}  spectrum in [{lo}, {hi}]",
            op.apply(&x)?,
            op.quadratic_form_edges(&x)?,
            op.rayleigh_quotient(&x)?,
        );
    }

    // the deformed Laplacian I - qA + q^2 (D - I) is M(q^2, q) shifted by 1 - q^2
    let (op, shift) = InterpolatedOperator::from_deformed(&g, 0.5)?;
    println!("deformed q=0.5 -> M({}, {}) + {shift} I", op.t(), op.s());
    Ok(())
}
