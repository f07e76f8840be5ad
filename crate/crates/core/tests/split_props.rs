use proptest::prelude::*;
use rram_snn::dataset::{normalize, parse_csv, split, CsvSchema, Column, Dataset, Sample};

/// Samples carry their own index as the first feature so partitions can be
/// checked for identity.
fn indexed(labels: &[usize], classes: usize) -> Dataset {
    Dataset {
        name: "p".into(),
        samples: labels
            .iter()
            .enumerate()
            .map(|(i, &label)| Sample {
                features: vec![i as f64, (i * 7 % 13) as f64],
                label,
            })
            .collect(),
        num_classes: classes,
        num_features: 2,
        class_names: (0..classes).map(|c| c.to_string()).collect(),
    }
}

fn labels_strategy() -> impl Strategy<Value = (Vec<usize>, usize)> {
    (2usize..5).prop_flat_map(|classes| {
        proptest::collection::vec(4usize..30, classes).prop_map(move |sizes| {
            let labels = sizes
                .iter()
                .enumerate()
                .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
                .collect();
            (labels, classes)
        })
    })
}

proptest! {
    #[test]
    fn split_is_disjoint_exhaustive_and_stratified(
        (labels, classes) in labels_strategy(),
        frac in 0.3f64..0.7,
        seed in any::<u64>(),
    ) {
        let d = indexed(&labels, classes);
        let (train, test) = split(&d, frac, seed).unwrap();
        let mut ids: Vec<usize> = train
            .samples
            .iter()
            .chain(&test.samples)
            .map(|s| s.features[0] as usize)
            .collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..d.len()).collect::<Vec<_>>());

        let whole = d.class_counts();
        for (part, share) in [(&train, frac), (&test, 1.0 - frac)] {
            for (c, &n) in part.class_counts().iter().enumerate() {
                let expected = whole[c] as f64 * share;
                prop_assert!((n as f64 - expected).abs() <= 1.0, "class {} has {} expected {}", c, n, expected);
            }
        }
    }

    #[test]
    fn split_repeats_under_equal_seeds(
        (labels, classes) in labels_strategy(),
        seed in any::<u64>(),
    ) {
        let d = indexed(&labels, classes);
        prop_assert_eq!(split(&d, 0.5, seed).unwrap(), split(&d, 0.5, seed).unwrap());
    }

    #[test]
    fn normalize_is_idempotent(rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 3), 2..40)) {
        let d = Dataset {
            name: "n".into(),
            samples: rows.into_iter().map(|features| Sample { features, label: 0 }).collect(),
            num_classes: 1,
            num_features: 3,
            class_names: vec!["x".into()],
        };
        let once = normalize(&d);
        for s in &once.samples {
            prop_assert!(s.features.iter().all(|x| (0.0..=1.0).contains(x)));
        }
        let twice = normalize(&once);
        for (a, b) in once.samples.iter().zip(&twice.samples) {
            for (x, y) in a.features.iter().zip(&b.features) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn iris_half_split_has_25_per_class_each_side() {
    let (train, test) = split(&Dataset::iris(), 0.5, 7).unwrap();
    assert_eq!(train.len(), 75);
    assert_eq!(test.len(), 75);
    assert_eq!(train.class_counts(), vec![25, 25, 25]);
    assert_eq!(test.class_counts(), vec![25, 25, 25]);
}

#[test]
fn custom_marker_drops_rows() {
    let text = "a,b,y\n1,NA,x\n2,3,y\n4,5,x\n";
    let schema = CsvSchema {
        label_col: Column::Name("y".into()),
        feature_cols: vec![Column::Name("a".into()), Column::Name("b".into())],
        has_header: true,
        missing_marker: "NA".into(),
    };
    let d = parse_csv(text.as_bytes(), "t", &schema).unwrap();
    assert_eq!(d.len(), 2);
    assert_eq!(d.samples[0].features, vec![2.0, 3.0]);
}
