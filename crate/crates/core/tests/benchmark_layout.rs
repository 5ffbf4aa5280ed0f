mod common;

use common::*;
use shape_router::evaluation::SuccessfulRate;
use shape_router::{build_representative_set, Grouping};

type Row = (&'static str, (usize, usize), (usize, usize), &'static str, &'static str);

const TABLE: [Row; 7] = [
    ("Airplanes", (70, 98), (89, 98), "71.43% (70/98)", "90.82% (89/98)"),
    ("Humans", (46, 78), (71, 78), "58.97% (46/78)", "91.03% (71/78)"),
    ("Quadruped", (6, 13), (10, 13), "46.15% (6/13)", "76.92% (10/13)"),
    ("Blades", (14, 26), (23, 26), "53.85% (14/26)", "88.46% (23/26)"),
    ("Chairs", (20, 26), (21, 26), "76.92% (20/26)", "80.77% (21/26)"),
    ("Plants & trees", (26, 60), (43, 60), "43.33% (26/60)", "71.67% (43/60)"),
    ("Cars", (22, 24), (23, 24), "91.67% (22/24)", "95.83% (23/24)"),
];

#[test]
fn table_cells_match_reference_values() {
    for (class, single, multi, single_cell, multi_cell) in TABLE {
        assert_eq!(
            SuccessfulRate::new(class, single.0, single.1).unwrap().cell(),
            single_cell
        );
        assert_eq!(SuccessfulRate::new(class, multi.0, multi.1).unwrap().cell(), multi_cell);
    }
    assert!((SuccessfulRate::new("Cars", 23, 24).unwrap().rate() - 0.958_333).abs() < 1e-6);
    assert!((SuccessfulRate::new("Humans", 71, 78).unwrap().rate() - 0.910_256).abs() < 1e-6);
}

#[test]
fn seven_class_sizes_and_representative_counts() {
    let g = grouped(&PSB7);
    let sizes: Vec<(&str, usize, usize)> = g
        .classes
        .iter()
        .map(|c| (c.name.as_str(), c.size(), c.subclasses.len()))
        .collect();
    assert_eq!(
        sizes,
        [
            ("Airplanes", 98, 5),
            ("Humans", 78, 3),
            ("Quadruped", 13, 2),
            ("Blades", 26, 3),
            ("Chairs", 26, 2),
            ("Plants & trees", 60, 5),
            ("Cars", 24, 2),
        ]
    );
    let sum: usize = g.classes.iter().map(|c| c.size()).sum();
    assert_eq!(sum, 325);
    assert_eq!(g.model_count(), sum);
    assert_eq!(g.subclass_count(), 22);
    for (class, _, (_, n), _, _) in TABLE {
        assert_eq!(g.get(class).unwrap().size(), n);
    }

    let reps = build_representative_set(&g, &clustered(&g, 64, 0.01, 5)).unwrap();
    assert_eq!(reps.total(), 22);
    let per_class: Vec<usize> = reps.classes.iter().map(|c| c.entries.len()).collect();
    assert_eq!(per_class, [5, 3, 2, 3, 2, 5, 2]);
}

#[test]
fn bundled_grouping_file_matches_the_layout() {
    let text = std::fs::read_to_string(repo_root().join("data/psb7.grouping")).unwrap();
    let file = Grouping::parse(&text).unwrap();
    let expected = Grouping::parse(&grouping_text(&PSB7)).unwrap();
    assert_eq!(file, expected);
}

#[test]
fn identity_grouping_reproduces_single_rep_layout() {
    let tree = shape_router::parse_cla(&cla_text(&PSB7)).unwrap();
    let g = shape_router::apply_grouping(&tree, &Grouping::identity(&tree)).unwrap();
    assert_eq!(g.classes.len(), 22);
    assert_eq!(g.model_count(), 325);
    for (class, sub) in g.classes.iter().zip(&tree.subclasses) {
        assert_eq!(class.name, sub.name);
        assert_eq!(class.subclasses, std::slice::from_ref(sub));
    }
}
