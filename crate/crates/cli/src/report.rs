//! Static renderings of an evaluation report. Scores are shown in percent.

use std::fmt::Write as _;

use keystep_core::eval::{EvalReport, Scores};

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

fn rows(rep: &EvalReport) -> Vec<(String, &Scores, &Scores)> {
    rep.ksl
        .iter()
        .map(|(name, m)| (name.clone(), &m.per_step, &m.overall))
        .collect()
}

pub fn text(rep: &EvalReport) -> String {
    let mut s = String::new();
    writeln!(s, "{:<12} {:>8} {:>8} {:>10} {:>10}", "method", "F1", "IoU", "F1(all)", "IoU(all)").unwrap();
    for (name, ps, ov) in rows(rep) {
        writeln!(s, "{name:<12} {:>8} {:>8} {:>10} {:>10}", pct(ps.f1), pct(ps.iou), pct(ov.f1), pct(ov.iou)).unwrap();
    }
    if let Some(tau) = rep.kendall_tau_mean {
        writeln!(s, "kendall tau  {tau:.4} over {} pairs", rep.kendall_tau.len()).unwrap();
    }
    for (frac, acc) in &rep.phase_accuracy {
        writeln!(s, "phase accuracy @{frac}: {}", pct(*acc)).unwrap();
    }
    s
}

pub fn csv(rep: &EvalReport) -> String {
    let mut s = String::from("method,averaging,precision,recall,f1,iou\n");
    for (name, ps, ov) in rows(rep) {
        for (mode, sc) in [("per_step", ps), ("overall", ov)] {
            writeln!(
                s,
                "{name},{mode},{},{},{},{}",
                pct(sc.precision),
                pct(sc.recall),
                pct(sc.f1),
                pct(sc.iou)
            )
            .unwrap();
        }
    }
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Inline SVG polyline of the per-epoch loss.
fn loss_curve(loss: &[f64]) -> String {
    let (w, h, pad) = (480.0, 200.0, 24.0);
    let lo = loss.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = loss.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let n = (loss.len().max(2) - 1) as f64;
    let points: Vec<String> = loss
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let x = pad + (w - 2.0 * pad) * i as f64 / n;
            let y = h - pad - (h - 2.0 * pad) * (l - lo) / span;
            format!("{x:.1},{y:.1}")
        })
        .collect();
    format!(
        "<svg width=\"{w}\" height=\"{h}\" xmlns=\"http://www.w3.org/2000/svg\">\
<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\" stroke=\"#ccc\"/>\
<polyline fill=\"none\" stroke=\"#2266aa\" stroke-width=\"2\" points=\"{}\"/>\
<text x=\"{pad}\" y=\"16\" font-size=\"12\">loss {hi:.4} → {:.4} ({} epochs)</text></svg>",
        points.join(" "),
        loss.last().copied().unwrap_or(0.0),
        loss.len()
    )
}

pub fn html(rep: &EvalReport, loss: Option<&[f64]>) -> String {
    let mut s = String::from(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Key-step evaluation</title>\
<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}\
td,th{border:1px solid #bbb;padding:4px 10px;text-align:right}th{background:#eee}</style></head><body>\n",
    );
    s.push_str("<h1>Key-step evaluation</h1>\n<h2>Key-step localization</h2>\n<table><tr><th>method</th>\
<th>P</th><th>R</th><th>F1</th><th>IoU</th><th>F1 (overall)</th><th>IoU (overall)</th></tr>\n");
    for (name, ps, ov) in rows(rep) {
        writeln!(
            s,
            "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
            escape(&name),
            pct(ps.precision),
            pct(ps.recall),
            pct(ps.f1),
            pct(ps.iou),
            pct(ov.f1),
            pct(ov.iou)
        )
        .unwrap();
    }
    s.push_str("</table>\n");
    if !rep.phase_accuracy.is_empty() {
        s.push_str("<h2>Phase classification</h2>\n<table><tr><th>label fraction</th><th>accuracy</th></tr>\n");
        for (frac, acc) in &rep.phase_accuracy {
            writeln!(s, "<tr><td>{}</td><td>{}</td></tr>", escape(frac), pct(*acc)).unwrap();
        }
        s.push_str("</table>\n");
    }
    if !rep.kendall_tau.is_empty() {
        writeln!(
            s,
            "<h2>Kendall's tau</h2>\n<p>mean {:.4}</p>\n<table><tr><th>video</th><th>video</th><th>tau</th></tr>",
            rep.kendall_tau_mean.unwrap_or(f64::NAN)
        )
        .unwrap();
        for p in &rep.kendall_tau {
            writeln!(s, "<tr><td>{}</td><td>{}</td><td>{:.4}</td></tr>", escape(&p.a), escape(&p.b), p.tau).unwrap();
        }
        s.push_str("</table>\n");
    }
    if let Some(loss) = loss.filter(|l| !l.is_empty()) {
        s.push_str("<h2>Training loss</h2>\n");
        s.push_str(&loss_curve(loss));
        s.push('\n');
    }
    s.push_str("</body></html>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use keystep_core::eval::{MethodScores, TauPair};
    use std::collections::BTreeMap;

    fn sample() -> EvalReport {
        let perfect = Scores {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
            iou: 1.0,
        };
        EvalReport {
            ksl: BTreeMap::from([(
                "features".to_string(),
                MethodScores {
                    per_step: perfect,
                    overall: perfect,
                    videos: BTreeMap::new(),
                },
            )]),
            kendall_tau: vec![TauPair {
                a: "v0".into(),
                b: "v1".into(),
                tau: 0.5,
            }],
            kendall_tau_mean: Some(0.5),
            phase_accuracy: BTreeMap::from([("0.5".to_string(), 0.75)]),
        }
    }

    #[test]
    fn renders_percentages() {
        let rep = sample();
        assert!(csv(&rep).contains("features,per_step,100.0,100.0,100.0,100.0"));
        let page = html(&rep, Some(&[3.0, 2.0, 1.5]));
        assert!(page.contains("<td>100.0</td>") && page.contains("<polyline") && page.contains("75.0"));
        assert!(text(&rep).contains("1 pairs"));
    }
}
