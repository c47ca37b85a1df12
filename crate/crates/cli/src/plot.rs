//! Plot scripts for the CSV outputs, in gnuplot syntax.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

fn header(path: &Path) -> Result<(Vec<String>, Option<String>)> {
    let mut rd = csv::Reader::from_path(path).context(format!("opening {}", path.display()))?;
    let cols: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let first = rd.records().next().transpose()?;
    let exp = match (first, cols.iter().position(|c| c == "experiment")) {
        (Some(rec), Some(k)) => rec.get(k).map(str::to_string),
        _ => None,
    };
    Ok((cols, exp))
}

fn require(cols: &[String], need: &[&str]) -> Result<()> {
    for n in need {
        if !cols.iter().any(|c| c == n) {
            bail!("missing column '{n}'");
        }
    }
    Ok(())
}

/// Script text for `csv`, chosen by its `experiment` column.
pub fn plot_script(csv: &Path) -> Result<String> {
    let (cols, exp) = header(csv)?;
    require(&cols, &["experiment"])?;
    let file = csv.display();
    let preamble = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\nset output '{}'\n",
        csv.with_extension("png").display()
    );
    let body = match exp.as_deref() {
        Some("disc-example") => {
            require(&cols, &["neighborhood", "r_quotient", "witness_bound"])?;
            format!(
                "set xlabel 'j'\nset ylabel 'R_j'\n\
                 jcol(s) = real(s[3:])\n\
                 plot '{file}' using (jcol(strcol('neighborhood'))):(column('r_quotient')) with linespoints title 'R_j', \\\n\
                 \x20    '' using (jcol(strcol('neighborhood'))):(column('witness_bound')) with lines title '1/j^2 + C_f'\n"
            )
        }
        Some(_) => {
            require(&cols, &["domain", "h", "lambda"])?;
            format!(
                "set logscale xy\nset xlabel 'h (proportional to the neighbourhood radius)'\nset ylabel 'lambda_h'\n\
                 plot '{file}' using (strcol('domain') eq 'pseudoconvex' ? column('h') : 1/0):(column('lambda')) with linespoints title 'pseudoconvex balls', \\\n\
                 \x20    '' using (strcol('domain') eq 'model' ? column('h') : 1/0):(column('lambda')) with points title 'model neighbourhoods'\n"
            )
        }
        None => bail!("missing column 'experiment' data: the CSV has no rows"),
    };
    Ok(preamble + &body)
}

/// Writes the script next to the CSV as `<stem>.gp`.
pub fn emit_plot_script(csv: &Path) -> Result<PathBuf> {
    let text = plot_script(csv)?;
    let out = csv.with_extension("gp");
    std::fs::write(&out, text).context(format!("writing {}", out.display()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn shrink_csv_gives_log_log_plot() {
        let d = tempfile::tempdir().unwrap();
        let p = write(
            d.path(),
            "s.csv",
            "experiment,domain,neighborhood,h,dofs,lambda,residual,witness_bound,alpha,r_quotient,pass\n\
             shrink-study,pseudoconvex,\"B(0,0.4)\",0.066,10,22.3,1e-10,,,,true\n",
        );
        let s = plot_script(&p).unwrap();
        assert!(s.contains("set logscale xy"));
        assert!(s.contains("column('lambda')"));
    }

    #[test]
    fn disc_csv_plots_quotient_and_bound() {
        let d = tempfile::tempdir().unwrap();
        let p = write(
            d.path(),
            "d.csv",
            "experiment,domain,neighborhood,h,dofs,lambda,residual,witness_bound,alpha,r_quotient,pass\n\
             disc-example,model,V_2,,,,,4.3,1e-67,4.08,true\n",
        );
        let s = plot_script(&p).unwrap();
        assert!(s.contains("r_quotient") && s.contains("witness_bound"));
    }

    #[test]
    fn empty_or_partial_csv_is_rejected() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), "e.csv", "");
        assert!(plot_script(&p).unwrap_err().to_string().contains("missing column"));
        let p = write(d.path(), "p.csv", "experiment,h\ndisc-example,0.1\n");
        assert!(plot_script(&p).unwrap_err().to_string().contains("missing column"));
    }
}
