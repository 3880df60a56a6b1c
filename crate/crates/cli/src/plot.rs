//! gnuplot scripts written next to the CSV output.

use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// `<output>.plot`.
pub fn script_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".plot");
    PathBuf::from(name)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Negative regions of each sign pair on the `(omega t1, omega t2)` plane.
pub fn grid_script(csv: &Path) -> String {
    let data = file_name(csv);
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 1200,1100\n");
    s.push_str(&format!("set output '{data}.png'\n"));
    s.push_str("set xlabel '{/Symbol w}t_1'\nset ylabel '{/Symbol w}t_2'\n");
    s.push_str("set size ratio -1\nset palette defined (0 'navy', 1 'white')\nunset colorbox\n");
    s.push_str("set multiplot layout 2,2\n");
    for (col, tag) in [(3, "pp"), (4, "pm"), (5, "mp"), (6, "mm")] {
        s.push_str(&format!(
            "set title 'q_{{{tag}}} < 0'\nplot '{data}' every ::1 using 1:2:(${col} < 0 ? ${col} : 1/0) with points pt 5 ps 0.3 palette notitle\n"
        ));
    }
    s.push_str("unset multiplot\n");
    s
}

/// Columns `2..` of `csv` against column 1.
pub fn curve_script(csv: &Path, xlabel: &str, columns: &[&str]) -> String {
    let data = file_name(csv);
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{data}.png'\n"));
    s.push_str(&format!("set xlabel '{xlabel}'\nset key top left\n"));
    let curves: Vec<String> = columns
        .iter()
        .enumerate()
        .map(|(i, name)| format!("'{data}' every ::1 using 1:{} with lines title '{name}'", i + 2))
        .collect();
    s.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    s
}

pub fn write_script(output: &Path, script: &str) -> Result<PathBuf> {
    let path = script_path(output);
    std::fs::write(&path, script).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
