//! Deterministic table exports. Ordering is fixed by the GTA and canonical-basis orders,
//! and no file carries timestamps, so repeated exports are byte-identical.

use serde_json::{json, Value};

use crate::center_slf::{center_labels, gta_labels, Center, Gta};
use crate::error::Result;
use crate::mcg_sl2z::Theta1;
use crate::skein::SkeinReport;
use crate::uq_algebra::Uq;

/// One row per ordered pair (left, right) of GTA basis elements; the remaining columns are
/// the coordinates of the product, each entry a Q(ζ) element in ζ-power notation.
pub fn gta_table_csv(uq: &Uq, gta: &Gta) -> Result<String> {
    let labels = gta_labels(uq.p);
    let table = gta.product_table(uq)?;
    let mut out = String::new();
    out.push_str("left,right,");
    out.push_str(&labels.join(","));
    out.push('\n');
    for (i, row) in table.iter().enumerate() {
        for (j, prod) in row.iter().enumerate() {
            let cells: Vec<String> = prod.0.iter().map(|c| csv_cell(&c.to_string())).collect();
            out.push_str(&format!("{},{},{}\n", labels[i], labels[j], cells.join(",")));
        }
    }
    Ok(out)
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// The canonical central basis e_s, w^±_t as PBW expansions.
pub fn central_basis_json(p: usize, center: &Center) -> Value {
    let labels = center_labels(p);
    let elems: Vec<Value> = labels.iter().zip(&center.basis.elems).map(|(l, z)| json!({ "label": l, "element": z })).collect();
    json!({ "p": p, "pbw_order": "E^m F^n K^(l_halves/2)", "basis": elems })
}

/// θ₁(τ_a^{±1}), θ₁(τ_b^{±1}) on SLF in GTA coordinates (column j = image of basis form j).
pub fn theta1_json(p: usize, th: &Theta1) -> Value {
    json!({
        "p": p,
        "basis": gta_labels(p),
        "xi": th.xi,
        "tau_a": th.a,
        "tau_b": th.b,
        "tau_a_inv": th.a_inv,
        "tau_b_inv": th.b_inv,
    })
}

/// Skein-module matrices: ρ(a), ρ(b) on the reduced basis and W_A, W_B on SLF.
pub fn skein_json(r: &SkeinReport) -> Value {
    json!({
        "p": r.p,
        "slf_basis": gta_labels(r.p),
        "rho_a": r.rho_a,
        "rho_b": r.rho_b,
        "w_a": r.w_a,
        "w_b": r.w_b,
        "composition_dims": r.composition.dims,
        "iso_f": r.iso_f.f,
        "jones_wenzl": r.jw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center_slf::{chi_minus, g_index};

    #[test]
    fn table_rows_and_determinism() {
        let p = 3;
        let uq = Uq::new(p);
        let center = Center::new(&uq).unwrap();
        let gta = Gta::new(&uq, &center).unwrap();
        let csv = gta_table_csv(&uq, &gta).unwrap();
        assert_eq!(csv, gta_table_csv(&uq, &gta).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        let n = 3 * p - 1;
        assert_eq!(lines.len(), 1 + n * n);
        assert_eq!(lines[0], "left,right,chi+1,chi+2,chi+3,chi-1,chi-2,chi-3,G1,G2");
        let labels = gta_labels(p);
        // (ε, x) is the identity row
        for j in 0..n {
            let cells: Vec<&str> = lines[1 + j].split(',').collect();
            for (k, c) in cells[2..].iter().enumerate() {
                assert_eq!(*c, if k == j { "1" } else { "0" });
            }
        }
        // (χ⁻₁, G_s) has the single entry −1 at G_{p−s}
        for s in 1..p {
            let row = 1 + chi_minus(p, 1) * n + g_index(p, s);
            let cells: Vec<&str> = lines[row].split(',').collect();
            assert_eq!(cells[0], "chi-1");
            assert_eq!(cells[1], labels[g_index(p, s)]);
            for (k, c) in cells[2..].iter().enumerate() {
                assert_eq!(*c, if k == g_index(p, p - s) { "-1" } else { "0" });
            }
        }
        let a = serde_json::to_string(&central_basis_json(p, &center)).unwrap();
        assert_eq!(a, serde_json::to_string(&central_basis_json(p, &center)).unwrap());
    }
}
