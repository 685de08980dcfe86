use std::collections::HashMap;

use super::view::{Edge, ViewModel};

/// Merges edges joining the same two nodes, in either direction, into one
/// edge that shows the earliest action and counts the rest. The merged edge
/// keeps every member so a renderer can cycle through them.
pub fn group_parallel_edges(view: &ViewModel) -> ViewModel {
    let pair = |e: &Edge| {
        if e.src_key <= e.dst_key {
            (e.src_key.clone(), e.dst_key.clone())
        } else {
            (e.dst_key.clone(), e.src_key.clone())
        }
    };
    let mut groups: Vec<Vec<&Edge>> = Vec::new();
    let mut index: HashMap<(String, String), usize> = HashMap::new();
    for edge in &view.edges {
        let slot = *index.entry(pair(edge)).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(edge);
    }

    let edges = groups
        .into_iter()
        .map(|mut members| {
            if members.len() == 1 {
                return members[0].clone();
            }
            // Stable sort: equal orders keep their original sequence.
            members.sort_by_key(|e| e.order.unwrap_or(usize::MAX));
            let first = members[0];
            let (a, b) = pair(first);
            Edge {
                key: format!("group:{a}|{b}"),
                count: members.iter().map(|e| e.count).sum(),
                grouped: members
                    .iter()
                    .flat_map(|e| {
                        if e.grouped.is_empty() {
                            vec![e.member()]
                        } else {
                            e.grouped.clone()
                        }
                    })
                    .collect(),
                ..first.clone()
            }
        })
        .collect();
    ViewModel {
        edges,
        ..view.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(key: &str, src: &str, dst: &str, label: &str, order: usize) -> Edge {
        Edge {
            key: key.into(),
            src_key: src.into(),
            dst_key: dst.into(),
            label: label.into(),
            event_id: Some(key.into()),
            order: Some(order),
            count: 1,
            grouped: Vec::new(),
        }
    }

    #[test]
    fn single_edge_is_unchanged() {
        let view = ViewModel { edges: vec![edge("x", "A", "B", "notices", 0)], ..ViewModel::default() };
        assert_eq!(group_parallel_edges(&view), view);
    }

    #[test]
    fn parallel_edges_show_the_first_action() {
        let view = ViewModel {
            edges: vec![edge("y", "A", "B", "chases", 3), edge("x", "A", "B", "follows", 1)],
            ..ViewModel::default()
        };
        let grouped = group_parallel_edges(&view);
        assert_eq!(grouped.edges.len(), 1);
        let e = &grouped.edges[0];
        assert_eq!((e.label.as_str(), e.count), ("follows", 2));
        let keys: Vec<&str> = e.grouped.iter().map(|m| m.key.as_str()).collect();
        assert_eq!(keys, ["x", "y"]);
    }

    #[test]
    fn opposite_directions_share_a_group() {
        let view = ViewModel {
            edges: vec![
                edge("x", "A", "B", "asks", 0),
                edge("y", "B", "A", "answers", 1),
                edge("z", "A", "A", "thinks", 2),
            ],
            ..ViewModel::default()
        };
        let grouped = group_parallel_edges(&view);
        assert_eq!(grouped.edges.len(), 2);
        assert_eq!(grouped.edges[0].count, 2);
        assert_eq!(grouped.edges.iter().map(|e| e.count).sum::<usize>(), 3);
    }
}
