use super::*;
use num_traits::ToPrimitive;

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

#[test]
fn inventories() {
    assert_eq!(supersingular_inventory(5).unwrap(), vec![3]);
    assert_eq!(supersingular_inventory(7).unwrap(), vec![2]);
    assert_eq!(supersingular_inventory(13).unwrap(), vec![1]);
    assert_eq!(supersingular_inventory(11).unwrap(), vec![2, 3]);
    assert_eq!(supersingular_inventory(37).unwrap(), vec![1, 1, 1]);
    assert!(supersingular_inventory(3).is_err());
    assert!(supersingular_inventory(2).is_err());
    assert!(supersingular_inventory(15).is_err());
}

#[test]
fn mass_identity_for_all_small_characteristics() {
    for q in crate::arith::primes_up_to(97)
        .into_iter()
        .filter(|&q| q >= 5)
    {
        for p in [3u64, 5, 7, 13] {
            if p == q {
                continue;
            }
            let g = dual_graph(p, q).unwrap();
            assert!(mass_identity_holds(&g), "mass identity fails at ({p}, {q})");
        }
    }
}

#[test]
fn graphs_for_the_target_levels() {
    assert_eq!(
        dual_graph(13, 5).unwrap().edge_lengths,
        vec![1, 1, 1, 1, 3, 3]
    );
    assert_eq!(
        dual_graph(5, 13).unwrap().edge_lengths,
        vec![1, 1, 1, 1, 1, 1]
    );
    assert_eq!(dual_graph(7, 5).unwrap().edge_lengths, vec![1, 1, 3, 3]);
    assert_eq!(dual_graph(5, 7).unwrap().edge_lengths, vec![1, 1, 2, 2]);
    assert_eq!(dual_graph(3, 13).unwrap().edge_lengths, vec![1, 1, 1, 1]);
}

#[test]
fn cusp_placement_follows_coprimality() {
    let g = dual_graph(13, 5).unwrap();
    assert_eq!(g.hub_of(1), Hub::Infinity);
    assert_eq!(g.hub_of(13), Hub::Infinity);
    assert_eq!(g.hub_of(5), Hub::Zero);
    assert_eq!(g.hub_of(65), Hub::Zero);
}

#[test]
fn component_groups_of_level_65() {
    // at 5: Z/42 with hub difference of order 14
    let g5 = dual_graph(13, 5).unwrap();
    let c5 = component_group(&g5);
    assert_eq!(c5.group, AbGroup::cyclic(42));
    assert_eq!(c5.hub_difference_order, big(14));
    // at 13: Z/6, hub difference of full order
    let g13 = dual_graph(5, 13).unwrap();
    let c13 = component_group(&g13);
    assert_eq!(c13.group, AbGroup::cyclic(6));
    assert_eq!(c13.hub_difference_order, big(6));
}

#[test]
fn trivial_group_for_a_single_edge() {
    let g = dual_graph_from_lengths(13, 5, &[1]);
    let c = component_group(&g);
    assert!(c.group.is_trivial());
    assert_eq!(c.hub_difference_order, big(1));
}

#[test]
fn component_groups_of_other_levels() {
    let c = component_group(&dual_graph(7, 5).unwrap());
    assert_eq!(c.group, AbGroup::cyclic(24));
    assert_eq!(c.hub_difference_order, big(8));

    let c = component_group(&dual_graph(5, 7).unwrap());
    assert_eq!(c.group, AbGroup::cyclic(12));
    assert_eq!(c.hub_difference_order, big(6));

    let c = component_group(&dual_graph(3, 13).unwrap());
    assert_eq!(c.group, AbGroup::cyclic(4));
    assert_eq!(c.hub_difference_order, big(4));

    // the characteristic-3 fiber of level 39, from supplied chain lengths
    let g = dual_graph_from_lengths(13, 3, &[1, 2, 2, 3]);
    assert!(mass_identity_holds(&g));
    let c = component_group(&g);
    assert_eq!(c.group, AbGroup::cyclic(28));
    assert_eq!(c.hub_difference_order, big(14));
}

#[test]
fn group_order_matches_closed_formula() {
    // order = prod(l) * sum(1/l): checked internally by component_group,
    // exercised here over an assortment of length multisets
    for lengths in [
        vec![1u32, 1, 1],
        vec![2, 2],
        vec![1, 2, 3],
        vec![3, 3, 3],
        vec![1, 1, 2, 3],
        vec![2, 3],
        vec![6, 2, 1],
    ] {
        let g = dual_graph_from_lengths(13, 5, &lengths);
        let c = component_group(&g);
        let prod: u64 = lengths.iter().map(|&l| l as u64).product();
        let expect: u64 = lengths.iter().map(|&l| prod / l as u64).sum();
        assert_eq!(
            c.group.order().to_u64().unwrap(),
            expect,
            "lengths {lengths:?}"
        );
    }
}

#[test]
fn cusp_reduction_for_level_65() {
    // at 5: the order of wp([1]-[5]) is 14, wp([1]-[13]) = 0, cokernel Z/3
    let g5 = dual_graph(13, 5).unwrap();
    let c5 = component_group(&g5);
    let r5 = cusp_reduction_map(&g5, &c5);
    assert_eq!(r5.order_for(5), &big(14));
    assert_eq!(r5.order_for(13), &big(1));
    assert_eq!(r5.image_order, big(14));
    assert_eq!(r5.cokernel, AbGroup::cyclic(3));

    // at 13: wp([1]-[13]) has order 6, wp([1]-[5]) = 0, cokernel trivial
    let g13 = dual_graph(5, 13).unwrap();
    let c13 = component_group(&g13);
    let r13 = cusp_reduction_map(&g13, &c13);
    assert_eq!(r13.order_for(13), &big(6));
    assert_eq!(r13.order_for(5), &big(1));
    assert_eq!(r13.image_order, big(6));
    assert!(r13.cokernel.is_trivial());
}

#[test]
fn combination_orders_respect_the_cuspidal_relation() {
    // the level-65 relation 14([1]-[5]) = 6([1]-[13]) must reduce to zero
    // at both bad primes
    let g5 = dual_graph(13, 5).unwrap();
    let c5 = component_group(&g5);
    // for this graph (a, b) weight [1]-[13] and [1]-[5] respectively
    assert_eq!(c5.combination_order(&g5, -6, 14), big(1));
    assert_eq!(c5.combination_order(&g5, 0, 1), big(14));
    let g13 = dual_graph(5, 13).unwrap();
    let c13 = component_group(&g13);
    // here (a, b) weight [1]-[5] and [1]-[13]
    assert_eq!(c13.combination_order(&g13, 14, -6), big(1));
    assert_eq!(c13.combination_order(&g13, 0, 1), big(6));
}

#[test]
fn image_and_kernel_orders_multiply_to_the_cuspidal_order() {
    // #C = 168 at level 65: kernel of wp_5 has order 168/14 = 12 = #<c_q>,
    // kernel of wp_13 has order 168/6 = 28 = #<c_p>
    let g5 = dual_graph(13, 5).unwrap();
    let r5 = cusp_reduction_map(&g5, &component_group(&g5));
    assert_eq!(big(168) / &r5.image_order, big(12));
    let g13 = dual_graph(5, 13).unwrap();
    let r13 = cusp_reduction_map(&g13, &component_group(&g13));
    assert_eq!(big(168) / &r13.image_order, big(28));
}
