//! The two result formats: a weighted-term table (TSV) and a tag-cloud
//! image (SVG). Both serializers are pure functions of the model, so equal
//! models produce byte-identical files.

use std::fs;
use std::path::Path;

use crate::config::RenderSpec;
use crate::error::{Error, Result};
use crate::lda::{top_terms, TopicModel};

/// Fixed per-topic palette, cycled when K exceeds its length.
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// TSV body: header `topic\tterm\tweight`, rows ordered by topic, then
/// weight descending, then term; weights with six decimals.
pub fn table_string(model: &TopicModel, top_n: usize) -> String {
    let mut out = String::from("topic\tterm\tweight\n");
    for k in 0..model.num_topics() {
        // Topic id is always in range here.
        for (term, weight) in top_terms(model, k, top_n).expect("topic id in range") {
            out.push_str(&format!("{k}\t{term}\t{weight:.6}\n"));
        }
    }
    out
}

pub fn write_table(model: &TopicModel, top_n: usize, path: &Path) -> Result<()> {
    fs::write(path, table_string(model, top_n)).map_err(|e| Error::io(path, e))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct CloudTerm {
    term: String,
    weight: f64,
    topic: usize,
}

/// Pool each topic's top terms; a term's weight is the maximum it attains
/// across topics and its color comes from the topic attaining it.
fn pooled_cloud_terms(model: &TopicModel, top_n: usize) -> Vec<CloudTerm> {
    let mut pooled: Vec<CloudTerm> = Vec::new();
    for k in 0..model.num_topics() {
        for (term, _) in top_terms(model, k, top_n).expect("topic id in range") {
            if pooled.iter().any(|c| c.term == term) {
                continue;
            }
            let w = model.vocab.iter().position(|t| *t == term).expect("term in vocab");
            let (topic, weight, _) = model
                .topic_term_weights
                .iter()
                .enumerate()
                .map(|(t, row)| (t, row[w]))
                .fold((0usize, f64::NEG_INFINITY, false), |acc, (t, x)| {
                    if x > acc.1 {
                        (t, x, true)
                    } else {
                        acc
                    }
                });
            pooled.push(CloudTerm { term, weight, topic });
        }
    }
    pooled.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.term.cmp(&b.term))
    });
    pooled
}

/// Linear weight-to-font mapping over the rendered set; a degenerate
/// weight range maps everything to `max_font`.
fn font_size(weight: f64, min_w: f64, max_w: f64, spec: &RenderSpec) -> f64 {
    if max_w - min_w <= f64::EPSILON {
        return spec.max_font;
    }
    spec.min_font + (weight - min_w) / (max_w - min_w) * (spec.max_font - spec.min_font)
}

/// Deterministic row-wrap tag cloud: terms sorted by weight descending,
/// placed left to right, wrapping at the canvas width. `layout_seed` is
/// reserved for future jitter and ignored by this layout.
pub fn cloud_svg_string(model: &TopicModel, spec: &RenderSpec) -> Result<String> {
    spec.validate()?;
    let terms = pooled_cloud_terms(model, spec.top_n);
    let min_w = terms.iter().map(|t| t.weight).fold(f64::INFINITY, f64::min);
    let max_w = terms.iter().map(|t| t.weight).fold(f64::NEG_INFINITY, f64::max);

    let width = spec.canvas_width as f64;
    let margin = 10.0;
    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        spec.canvas_width, spec.canvas_height, spec.canvas_width, spec.canvas_height
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let mut x = margin;
    let mut baseline = margin;
    let mut row_max_font = 0.0f64;
    for item in &terms {
        let font = font_size(item.weight, min_w, max_w, spec);
        // Width estimate for a roughly proportional font.
        let est_width = item.term.chars().count() as f64 * font * 0.6;
        if x > margin && x + est_width > width - margin {
            x = margin;
            baseline += row_max_font * 1.3;
            row_max_font = 0.0;
        }
        row_max_font = row_max_font.max(font);
        let color = PALETTE[item.topic % PALETTE.len()];
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"{:.2}\" fill=\"{}\">{}</text>\n",
            x,
            baseline + font,
            font,
            color,
            xml_escape(&item.term)
        ));
        x += est_width + font * 0.5;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_tag_cloud(model: &TopicModel, spec: &RenderSpec, path: &Path) -> Result<()> {
    let svg = cloud_svg_string(model, spec)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LdaConfig;
    use crate::rng::RNG_ALGORITHM;

    fn model(vocab: &[&str], rows: Vec<Vec<f64>>) -> TopicModel {
        TopicModel {
            config: LdaConfig { topics: rows.len(), ..Default::default() },
            rng_algorithm: RNG_ALGORITHM.into(),
            document_ids: vec!["d".into()],
            vocab: vocab.iter().map(|s| s.to_string()).collect(),
            doc_topic_weights: vec![vec![1.0 / rows.len() as f64; rows.len()]],
            assignments: vec![vec![0]],
            topic_term_weights: rows,
        }
    }

    #[test]
    fn single_term_table() {
        let m = model(&["a"], vec![vec![1.0]]);
        assert_eq!(table_string(&m, 5), "topic\tterm\tweight\n0\ta\t1.000000\n");
    }

    #[test]
    fn zero_top_n_is_header_only() {
        let m = model(&["a"], vec![vec![1.0]]);
        assert_eq!(table_string(&m, 0), "topic\tterm\tweight\n");
    }

    #[test]
    fn table_rows_parse_back_to_top_terms() {
        let m = model(
            &["alpha", "beta", "gamma"],
            vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.2, 0.7]],
        );
        let text = table_string(&m, 2);
        // Each topic's printed weights sum to at most 1.
        for k in 0..2 {
            let sum: f64 = text
                .lines()
                .skip(1)
                .filter(|l| l.starts_with(&format!("{k}\t")))
                .map(|l| l.rsplit('\t').next().unwrap().parse::<f64>().unwrap())
                .sum();
            assert!(sum <= 1.0 + 1e-9);
        }
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("topic\tterm\tweight"));
        for k in 0..2 {
            for (term, weight) in top_terms(&m, k, 2).unwrap() {
                let line = lines.next().unwrap();
                let mut cols = line.split('\t');
                assert_eq!(cols.next().unwrap(), k.to_string());
                assert_eq!(cols.next().unwrap(), term);
                let printed: f64 = cols.next().unwrap().parse().unwrap();
                assert!((printed - weight).abs() < 5e-7);
            }
        }
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn single_term_cloud_uses_max_font() {
        let m = model(&["solo"], vec![vec![1.0]]);
        let spec = RenderSpec::default();
        let svg = cloud_svg_string(&m, &spec).unwrap();
        assert_eq!(svg.matches("<text").count(), 1);
        assert!(svg.contains("font-size=\"48.00\""));
        assert!(svg.contains(">solo</text>"));
    }

    #[test]
    fn equal_weights_equal_fonts_lexicographic_order() {
        let m = model(&["zed", "ant"], vec![vec![0.5, 0.5]]);
        let svg = cloud_svg_string(&m, &RenderSpec::default()).unwrap();
        let ant = svg.find(">ant</text>").unwrap();
        let zed = svg.find(">zed</text>").unwrap();
        assert!(ant < zed, "expected lexicographic placement");
        assert_eq!(svg.matches("font-size=\"48.00\"").count(), 2);
    }

    #[test]
    fn font_monotone_in_weight() {
        let spec = RenderSpec::default();
        let sizes: Vec<f64> = [0.1, 0.2, 0.5, 0.9]
            .iter()
            .map(|&w| font_size(w, 0.1, 0.9, &spec))
            .collect();
        assert!(sizes.windows(2).all(|p| p[0] <= p[1]));
        assert!((sizes[0] - spec.min_font).abs() < 1e-9);
        assert!((sizes[3] - spec.max_font).abs() < 1e-9);
    }

    #[test]
    fn svg_deterministic() {
        let m = model(
            &["alpha", "beta", "gamma"],
            vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.2, 0.7]],
        );
        let spec = RenderSpec::default();
        assert_eq!(
            cloud_svg_string(&m, &spec).unwrap(),
            cloud_svg_string(&m, &spec).unwrap()
        );
    }

    #[test]
    fn xml_escaping() {
        let m = model(&["a&b"], vec![vec![1.0]]);
        let svg = cloud_svg_string(&m, &RenderSpec::default()).unwrap();
        assert!(svg.contains(">a&amp;b</text>"));
    }
}
