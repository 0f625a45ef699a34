//! Property tests of geometric invariants.

use proptest::prelude::*;

use morsecert_core::flags::flag_distance;
use morsecert_core::sample::{random_flag, random_group_element, random_point, random_reduced_word, rng};
use morsecert_core::words::{format_word, is_reduced, parse_word, reduced_word_count, reduced_words};
use morsecert_core::{cartan_vector, iota, midpoint, riemannian_distance, FaceType};

fn face_for(n: usize, pick: usize) -> FaceType {
    let faces: Vec<FaceType> = match n {
        2 => vec![FaceType::full(2)],
        3 => vec![FaceType::full(3), FaceType::new(3, vec![1]).unwrap()],
        _ => vec![FaceType::full(4), FaceType::new(4, vec![2]).unwrap(), FaceType::new(4, vec![1, 3]).unwrap()],
    };
    faces[pick % faces.len()].clone()
}

proptest! {
    #[test]
    fn cartan_symmetry(seed in any::<u64>(), n in 2usize..5) {
        let mut source = rng(seed);
        let p = random_point(n, 1.5, &mut source);
        let q = random_point(n, 1.5, &mut source);
        let forward = cartan_vector(&p, &q).unwrap();
        let backward = iota(&cartan_vector(&q, &p).unwrap());
        prop_assert!(forward.distance(&backward) < 1e-8);
    }

    #[test]
    fn cartan_vectors_are_invariant(seed in any::<u64>(), n in 2usize..5) {
        let mut source = rng(seed);
        let p = random_point(n, 1.0, &mut source);
        let q = random_point(n, 1.0, &mut source);
        let g = random_group_element(n, 0.7, &mut source);
        let before = cartan_vector(&p, &q).unwrap();
        let after = cartan_vector(&p.translate(&g), &q.translate(&g)).unwrap();
        prop_assert!(before.distance(&after) < 1e-7);
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>(), n in 2usize..5) {
        let mut source = rng(seed);
        let [p, q, r] = [0, 1, 2].map(|_| random_point(n, 1.5, &mut source));
        let pq = riemannian_distance(&p, &q).unwrap();
        let qr = riemannian_distance(&q, &r).unwrap();
        let pr = riemannian_distance(&p, &r).unwrap();
        prop_assert!(pr <= pq + qr + 1e-9);
    }

    #[test]
    fn midpoints_halve_distances(seed in any::<u64>(), n in 2usize..5) {
        let mut source = rng(seed);
        let p = random_point(n, 1.5, &mut source);
        let q = random_point(n, 1.5, &mut source);
        let m = midpoint(&p, &q).unwrap();
        let whole = riemannian_distance(&p, &q).unwrap();
        prop_assert!((riemannian_distance(&p, &m).unwrap() - whole / 2.0).abs() < 1e-8);
        prop_assert!((riemannian_distance(&m, &q).unwrap() - whole / 2.0).abs() < 1e-8);
    }

    #[test]
    fn flag_distance_is_a_symmetric_gauge(seed in any::<u64>(), n in 2usize..5, pick in 0usize..3) {
        let mut source = rng(seed);
        let face = face_for(n, pick);
        let a = random_flag(&face, &mut source);
        let b = random_flag(&face, &mut source);
        let ab = flag_distance(&a, &b).unwrap();
        prop_assert!((ab - flag_distance(&b, &a).unwrap()).abs() < 1e-10);
        prop_assert!(flag_distance(&a, &a).unwrap() < 1e-7);
        prop_assert!((0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&ab));
    }

    #[test]
    fn random_words_are_reduced_and_round_trip(seed in any::<u64>(), rank in 1usize..4, length in 0usize..20) {
        let word = random_reduced_word(rank, length, &mut rng(seed));
        prop_assert_eq!(word.len(), length);
        prop_assert!(is_reduced(&word));
        prop_assert_eq!(parse_word(&format_word(&word)).unwrap(), word);
    }
}

#[test]
fn reduced_word_enumeration_counts() {
    for rank in 1..=3 {
        for length in 1..=5 {
            let words: Vec<_> = reduced_words(rank, length).collect();
            let expected = 2 * rank as u64 * (2 * rank as u64 - 1).pow(length as u32 - 1);
            assert_eq!(words.len() as u64, expected);
            assert_eq!(reduced_word_count(rank, length), Some(expected));
            assert!(words.iter().all(|w| is_reduced(w) && w.len() == length));
            assert!(words.windows(2).all(|w| w[0] < w[1]), "lexicographic and distinct");
        }
    }
}
