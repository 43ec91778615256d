use std::io::{self, Write};

use crate::integrate::{Section, Trajectory};

/// 17 significant digits round-trip any `f64`.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,x1,...,xn`, one row per recorded state.
pub fn write_trajectory_csv<W: Write + ?Sized>(
    w: &mut W,
    traj: &Trajectory,
    dim: usize,
) -> io::Result<()> {
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=dim).map(|k| format!("x{k}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (t, x) in traj.times().iter().zip(traj.states()) {
        let row: Vec<String> = std::iter::once(*t)
            .chain(x.iter().copied())
            .map(fmt)
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// `orbit,t,` followed by the coordinates other than the section axis (1-based `x` labels).
pub fn write_section_csv<W: Write + ?Sized>(
    w: &mut W,
    sections: &[Section],
    dim: usize,
    axis: usize,
) -> io::Result<()> {
    let mut header = vec!["orbit".to_string(), "t".to_string()];
    header.extend(
        (0..dim)
            .filter(|k| *k != axis)
            .map(|k| format!("x{}", k + 1)),
    );
    writeln!(w, "{}", header.join(","))?;
    for (orbit, sec) in sections.iter().enumerate() {
        for (t, p) in sec.times.iter().zip(&sec.points) {
            let mut row = vec![orbit.to_string(), fmt(*t)];
            row.extend(p.iter().map(|v| fmt(*v)));
            writeln!(w, "{}", row.join(","))?;
        }
    }
    Ok(())
}
