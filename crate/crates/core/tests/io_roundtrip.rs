use std::fs;

use modlab_core::io::{
    read_bumps, read_family, read_grid, read_polyline, read_vector_field, write_bumps,
    write_family, write_grid, write_polyline, write_series_csv, write_vector_field,
};
use modlab_core::report::Series;
use modlab_core::sobolev::TestFunction;
use modlab_core::{CurveFamily, Error, Grid, NormTag, Polyline, VectorField};

#[test]
fn round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(vec![0.0, -1.0], vec![2.0, 1.0], vec![5, 3]).unwrap();
    write_grid(&dir.path().join("g.json"), &grid).unwrap();
    assert_eq!(read_grid(&dir.path().join("g.json")).unwrap(), grid);

    let c = Polyline::new(vec![vec![0.1, 0.2], vec![1.0 / 3.0, 0.7]]).unwrap();
    write_polyline(&dir.path().join("c.csv"), &c).unwrap();
    assert_eq!(read_polyline(&dir.path().join("c.csv")).unwrap(), c);

    let fam = CurveFamily::new(
        "two",
        vec![
            c.clone(),
            Polyline::segment(&[0.0, 0.0], &[1.0, 0.0]).unwrap(),
        ],
    )
    .unwrap();
    write_family(&dir.path().join("fam.json"), &fam).unwrap();
    let back = read_family(&dir.path().join("fam.json")).unwrap();
    assert_eq!(back.label, "two");
    assert_eq!(back.curves(), fam.curves());

    let f = VectorField::from_fn(grid, 2, NormTag::Linf, |x| vec![x[0].sin(), x[1] / 7.0]).unwrap();
    write_vector_field(&dir.path().join("f.csv"), &f).unwrap();
    assert_eq!(read_vector_field(&dir.path().join("f.csv")).unwrap(), f);

    let bumps = vec![TestFunction::new(vec![0.5, 0.5], 0.2).unwrap()];
    write_bumps(&dir.path().join("b.json"), &bumps).unwrap();
    assert_eq!(read_bumps(&dir.path().join("b.json")).unwrap(), bumps);
}

#[test]
fn series_csv_is_sorted_and_headered() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Series::new("s", &["h", "gap"]);
    s.push(vec![0.1, 1.0]);
    s.push(vec![0.01, 2.0]);
    let path = dir.path().join("s.csv");
    write_series_csv(&path, &s).unwrap();
    let text = fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,gap");
    assert!(lines[1].starts_with("1.0000000000000000e-2"));
}

#[test]
fn malformed_inputs_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.json");
    fs::write(&g, "{\"box_min\": [0.0], \"box_max\": [1.0]").unwrap();
    assert!(matches!(read_grid(&g), Err(Error::Parse(_))));
    fs::write(
        &g,
        "{\"box_min\": [1.0], \"box_max\": [0.0], \"resolution\": [4]}",
    )
    .unwrap();
    assert!(matches!(read_grid(&g), Err(Error::Parse(_))));

    let c = dir.path().join("c.csv");
    fs::write(&c, "0.1,0.2\n0.3,abc\n").unwrap();
    assert!(matches!(read_polyline(&c), Err(Error::Parse(_))));

    let f = dir.path().join("f.csv");
    let grid = Grid::unit(1, 2).unwrap();
    write_vector_field(&f, &VectorField::zeros(grid, 1, NormTag::L2).unwrap()).unwrap();
    fs::write(&f, "i0,v0\n0,1.0\n").unwrap();
    assert!(matches!(read_vector_field(&f), Err(Error::Parse(_))));
    assert!(matches!(
        read_grid(&dir.path().join("missing.json")),
        Err(Error::Io(_))
    ));
}
