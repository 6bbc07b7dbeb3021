use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::field::Field;
use super::grid::PolarGrid;
use crate::error::Result;

/// CSV text with header `r,theta,<components>`, ring-outer order, 17 significant digits.
pub fn field_to_csv<F: Field>(field: &F) -> String {
    let grid = field.grid();
    let mut out = String::from("r,theta");
    for name in F::component_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..grid.n_r() {
        for j in 0..grid.n_theta() {
            let k = grid.index(i, j);
            write!(out, "{:.16e},{:.16e}", grid.radial_nodes()[i], grid.thetas()[j]).unwrap();
            for c in 0..F::COMPONENTS {
                write!(out, ",{:.16e}", field.component(k, c)).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_field_csv<F: Field>(path: &Path, field: &F) -> Result<()> {
    fs::write(path, field_to_csv(field))?;
    Ok(())
}

pub fn write_grid_metadata(path: &Path, grid: &PolarGrid) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&grid.metadata())?)?;
    Ok(())
}
