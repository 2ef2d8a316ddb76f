use ndarray::Array2;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Writes 2-D scatter data as TSV rows `x <tab> y <tab> class`, with class in
/// {majority, minority, generated}. The dataset must have exactly two
/// feature columns.
pub fn write_scatter_tsv<W: std::io::Write>(
    base: &Dataset,
    generated: Option<&Array2<f64>>,
    mut w: W,
) -> Result<()> {
    if base.n_features() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "scatter output needs width 2, dataset has {}",
            base.n_features()
        )));
    }
    if let Some(g) = generated {
        if g.nrows() > 0 && g.ncols() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "scatter output needs width 2, generated rows have {}",
                g.ncols()
            )));
        }
    }
    writeln!(w, "x\ty\tclass")?;
    for (i, row) in base.x.axis_iter(ndarray::Axis(0)).enumerate() {
        let class = if base.y[i] == 0 { "majority" } else { "minority" };
        writeln!(w, "{}\t{}\t{class}", row[0], row[1])?;
    }
    if let Some(g) = generated {
        for row in g.axis_iter(ndarray::Axis(0)) {
            writeln!(w, "{}\t{}\tgenerated", row[0], row[1])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::two_moons::{make_two_moons, TwoMoonsSpec};
    use ndarray::array;

    #[test]
    fn scatter_rows_and_classes() {
        let d = make_two_moons(&TwoMoonsSpec {
            n_majority: 10,
            n_minority: 3,
            noise: 0.0,
            seed: 0,
        })
        .unwrap();
        let generated = array![[0.1, 0.2], [0.3, 0.4]];

        let mut buf = Vec::new();
        write_scatter_tsv(&d, Some(&generated), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x\ty\tclass");
        assert_eq!(lines.len(), 1 + 13 + 2);
        assert!(lines.iter().any(|l| l.ends_with("majority")));
        assert!(lines.iter().any(|l| l.ends_with("minority")));
        assert!(lines.iter().any(|l| l.ends_with("generated")));

        // Without generated rows only two classes appear.
        let mut buf = Vec::new();
        write_scatter_tsv(&d, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains("generated"));
    }

    #[test]
    fn non_2d_dataset_is_rejected() {
        let x = ndarray::Array2::zeros((4, 3));
        let d = Dataset::from_matrix("t", x, vec![0, 0, 1, 1]).unwrap();
        assert!(write_scatter_tsv(&d, None, Vec::new()).is_err());
    }
}
