use plap::plot::{render_plot, render_svg, PlotStyle, Series};
use plap::Error;

fn tick_labels(svg: &str, class: &str) -> Vec<String> {
    let start = svg.find(&format!("<g class=\"{class}\"")).unwrap();
    let block = &svg[start..start + svg[start..].find("</g>").unwrap()];
    block.split("<text").skip(1).map(|t| t[t.find('>').unwrap() + 1..t.find("</text>").unwrap()].to_string()).collect()
}

#[test]
fn one_series_one_polyline() {
    let svg = render_svg(&[Series::new("a", vec![(0.0, 1.0), (1.0, 2.0)])], &PlotStyle::default()).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("version=\"1.1\""));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn empty_series_is_an_error() {
    assert!(matches!(render_svg(&[], &PlotStyle::default()), Err(Error::EmptySeries)));
    assert!(matches!(render_svg(&[Series::new("a", vec![])], &PlotStyle::default()), Err(Error::EmptySeries)));
    let log = PlotStyle { log_y: true, ..PlotStyle::default() };
    assert!(render_svg(&[Series::new("a", vec![(1.0, 0.0), (2.0, -1.0)])], &log).is_err());
}

#[test]
fn log_ticks_are_monotone() {
    let mse: Vec<(f64, f64)> = (5..=10).map(|k| (2f64.powi(k), 3.0 * 2f64.powi(k).powf(-2.0 / 3.0))).collect();
    let style = PlotStyle { log_x: true, log_y: true, ..PlotStyle::default() };
    let svg = render_svg(&[Series::new("mse", mse)], &style).unwrap();
    for class in ["xticks", "yticks"] {
        let v: Vec<f64> = tick_labels(&svg, class).iter().map(|s| s.parse().unwrap()).collect();
        assert!(v.len() >= 2, "{class}");
        assert!(v.windows(2).all(|w| w[0] < w[1]), "{class}: {v:?}");
    }
    let lin = render_svg(&[Series::new("a", vec![(-3.0, 0.2), (7.0, 0.9)])], &PlotStyle::default()).unwrap();
    let v: Vec<f64> = tick_labels(&lin, "xticks").iter().map(|s| s.parse().unwrap()).collect();
    assert!(v.windows(2).all(|w| w[0] < w[1]) && v[0] <= -3.0 && *v.last().unwrap() >= 7.0, "{v:?}");
}

#[test]
fn byte_stable_and_escaped() {
    let dir = tempfile::tempdir().unwrap();
    let s = [Series::new("p < 2 & more", vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)]), Series::new("b", vec![(0.5, 0.3)])];
    let style = PlotStyle { title: "t".into(), markers: true, ..PlotStyle::default() };
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    render_plot(&s, &style, &a).unwrap();
    render_plot(&s, &style, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let svg = std::fs::read_to_string(&a).unwrap();
    assert!(svg.contains("p &lt; 2 &amp; more"));
    assert_eq!(svg.matches("<polyline").count(), 1);
}
